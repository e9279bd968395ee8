"""Functions on a grid space: Lebesgue norms, level-set measures and weak quasinorms."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from ._exponents import inv, parse_exponent
from ._windows import centered_max
from .space import Ball, Space


@dataclass(frozen=True, eq=False)
class GridFunction:
    space: Space
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(self.space.shape)
        if not np.all(np.isfinite(v)):
            raise ValueError("grid function values must be finite")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __abs__(self):
        return GridFunction(self.space, np.abs(self.values))

    def __mul__(self, other):
        if isinstance(other, GridFunction):
            return GridFunction(self.space, self.values * other.values)
        return GridFunction(self.space, self.values * other)

    __rmul__ = __mul__

    def __add__(self, other):
        if isinstance(other, GridFunction):
            other = other.values
        return GridFunction(self.space, self.values + other)

    def __pow__(self, e):
        return GridFunction(self.space, self.values**e)

    def restrict(self, mask):
        return GridFunction(self.space, np.where(mask, self.values, 0.0))

    def to_json(self):
        return json.dumps(self.values.ravel().tolist())

    @classmethod
    def from_json(cls, space, text):
        return cls(space, np.asarray(json.loads(text), dtype=float))


def _region_mask(f, region):
    if region is None:
        return np.ones(f.space.shape, dtype=bool)
    if isinstance(region, Ball):
        return f.space.ball_mask(region)
    return np.asarray(region, dtype=bool).reshape(f.space.shape)


def lp_norm(f, q, region=None, measure=None):
    """``(sum |f|^q mu)^(1/q)`` over ``region`` (a :class:`Ball` or boolean mask).

    ``measure`` replaces the cell masses (e.g. ``w * mu`` for weighted norms).
    """
    q = parse_exponent(q)
    if q < 1:
        raise ValueError(f"Lebesgue exponent must be >= 1, got {q}")
    mask = _region_mask(f, region)
    mu = f.space.measures if measure is None else np.asarray(measure).reshape(f.space.shape)
    mask = mask & (mu > 0)
    a = np.abs(f.values[mask])
    if a.size == 0:
        return 0.0
    if math.isinf(q):
        return float(a.max())
    top = a.max()
    if top == 0:
        return 0.0
    # scaled to avoid overflow for large q
    s = math.fsum(((a / top) ** q * mu[mask]).tolist())
    return float(top * s ** (1.0 / q))


def ball_lq_norms(f, q, r):
    """``||f chi_B(x, r)||_q`` for the ball around every cell center ``x``."""
    q = parse_exponent(q)
    sp = f.space
    if math.isinf(q):
        return centered_max(np.abs(f.values), sp.halfwidths(r), sp.periodic)
    a = np.abs(f.values)
    top = a.max()
    if top == 0:
        return np.zeros(sp.shape)
    s = sp.ball_sums((a / top) ** q * sp.measures, r)
    return top * np.maximum(s, 0.0) ** (1.0 / q)


def distribution(f, theta, measure=None):
    """Measure of the strict level set ``{|f| > theta}``."""
    if theta < 0:
        raise ValueError("threshold must be nonnegative")
    mu = f.space.measures if measure is None else np.asarray(measure).reshape(f.space.shape)
    return math.fsum(mu[np.abs(f.values) > theta].tolist())


def level_profile(values, measure):
    """Distinct levels ``v_1 > v_2 > ...`` of ``|values|`` and ``W_k = measure{|values| >= v_k}``.

    ``W_k`` is the level-set measure ``measure{|values| > theta}`` for every
    ``theta`` just below ``v_k``; zero levels are dropped.
    """
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    w = np.asarray(measure, dtype=float).ravel()
    keep = (a > 0) & (w > 0)
    a, w = a[keep], w[keep]
    if a.size == 0:
        return np.empty(0), np.empty(0)
    order = np.argsort(-a, kind="stable")
    a, w = a[order], w[order]
    cum = np.cumsum(w, dtype=np.longdouble).astype(float)
    last = np.r_[a[1:] != a[:-1], True]
    return a[last], cum[last]


def weak_sup(values, measure, theta_power=1.0, measure_power=1.0):
    """Exact ``sup_theta theta**theta_power * measure{|values| > theta}**measure_power``.

    The supremum over ``theta > 0`` is approached just below one of the
    distinct levels, so it is a maximum over the level profile.
    """
    levels, W = level_profile(values, measure)
    if levels.size == 0:
        return 0.0
    return float(np.max(levels**theta_power * W**measure_power))


def weak_quasinorm(f, s, measure=None):
    """``sup_theta theta * mu{|f| > theta}**(1/s)``; ``s = inf`` gives ``max |f|``."""
    s = parse_exponent(s)
    if s <= 0:
        raise ValueError("weak exponent must be positive")
    mu = f.space.measures if measure is None else np.asarray(measure).reshape(f.space.shape)
    if math.isinf(s):
        return lp_norm(f, math.inf, measure=mu)
    return weak_sup(f.values, mu, 1.0, inv(s))


# -- generators ---------------------------------------------------------------


def constant(space, c=1.0):
    return GridFunction(space, np.full(space.shape, float(c)))


def indicator_box(space, lo, hi, value=1.0):
    """``value`` on cells whose centers lie in the half-open box ``[lo, hi)``."""
    lo, hi = np.atleast_1d(lo), np.atleast_1d(hi)
    c = space.centers
    inside = np.all((c >= lo) & (c < hi), axis=1)
    return GridFunction(space, np.where(inside, float(value), 0.0))


def indicator_ball(space, center, radius, value=1.0):
    return GridFunction(space, np.where(space.ball_mask(Ball(center, radius)), float(value), 0.0))


def power_spike(space, x0, c, clip=None, cutoff=None):
    """``|x - x0|**(-c)`` with the distance clipped below at ``clip`` (default half a cell).

    ``cutoff`` restricts the spike to ``|x - x0| < cutoff`` (max-norm).
    """
    clip = 0.5 * min(space.h) if clip is None else clip
    d = np.max(np.abs(space.centers - np.atleast_1d(x0)), axis=1)
    v = np.maximum(d, clip) ** (-c)
    if cutoff is not None:
        v = np.where(d < cutoff, v, 0.0)
    return GridFunction(space, v)


def random_piecewise(space, pieces, seed, low=0.0, high=1.0):
    """Random piecewise-constant field on a ``pieces``-per-axis partition of the box.

    The pieces are defined in coordinates, so the same seed gives the same
    function on refined spaces.
    """
    rng = np.random.default_rng(seed)
    table = rng.uniform(low, high, size=(pieces,) * space.n)
    idx = []
    for a in range(space.n):
        x = (space.axis_centers(a) - space.lo[a]) / (space.hi[a] - space.lo[a])
        idx.append(np.minimum((x * pieces).astype(int), pieces - 1))
    grids = np.meshgrid(*idx, indexing="ij")
    return GridFunction(space, table[tuple(grids)])


def from_generator(space, spec):
    """Build a function from a config dict ``{"kind": ..., ...}``."""
    kind = spec["kind"]
    if kind == "constant":
        return constant(space, spec.get("value", 1.0))
    if kind == "indicator_box":
        return indicator_box(space, spec["lo"], spec["hi"], spec.get("value", 1.0))
    if kind == "indicator_ball":
        return indicator_ball(space, spec["center"], spec["radius"], spec.get("value", 1.0))
    if kind == "power_spike":
        return power_spike(space, spec["x0"], spec["c"], spec.get("clip"), spec.get("cutoff"))
    if kind == "random_piecewise":
        return random_piecewise(space, spec["pieces"], spec["seed"],
                                spec.get("low", 0.0), spec.get("high", 1.0))
    if kind == "values":
        return GridFunction(space, np.asarray(spec["values"], dtype=float))
    raise ValueError(f"unknown function generator {kind!r}")
