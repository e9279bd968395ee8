"""The (L^q, L^p)^alpha norms: ball-average form on a space, Euclidean cube-partition form, dyadic form."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from ._exponents import inv, parse_exponent
from ._windows import sliding_max, sliding_sum
from .functions import ball_lq_norms


@dataclass(frozen=True)
class AmalgamExponents:
    q: float
    alpha: float
    p: float

    def __post_init__(self):
        q, a, p = (parse_exponent(x) for x in (self.q, self.alpha, self.p))
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "p", p)
        if not (1 <= q <= a <= p):
            raise ValueError(f"amalgam exponents need 1 <= q <= alpha <= p, got ({q}, {a}, {p})")


def _scaled_lp_sum(terms, weights, p):
    """``(sum terms**p * weights)**(1/p)`` without overflow, compensated."""
    terms = np.asarray(terms, dtype=float).ravel()
    weights = np.asarray(weights, dtype=float).ravel()
    top = terms.max() if terms.size else 0.0
    if top == 0:
        return 0.0
    return float(top * math.fsum(((terms / top) ** p * weights).tolist()) ** (1.0 / p))


def amalgam_norm_at_r(f, exps, r):
    """``_r||f||_{q,p,alpha}``: L^p(dmu(y)) of ``mu(B(y,r))**(1/alpha - 1/p - 1/q) ||f chi_B(y,r)||_q``."""
    sp = f.space
    if r ** (1.0 / sp.rho_m) < 0.5 * min(sp.h):
        warnings.warn(f"radius {r} is below half a cell side; balls reduce to single cells",
                      stacklevel=2)
    mass = sp.ball_masses(r)
    local = ball_lq_norms(f, exps.q, r)
    if math.isinf(exps.p):
        return float(np.max(mass ** (inv(exps.alpha) - inv(exps.q)) * local))
    terms = mass ** (inv(exps.alpha) - inv(exps.p) - inv(exps.q)) * local
    return _scaled_lp_sum(terms, sp.measures, exps.p)


def amalgam_norm(f, exps, radii):
    """Supremum of :func:`amalgam_norm_at_r` over a finite radii grid."""
    radii = list(radii)
    if not radii:
        raise ValueError("empty radii grid")
    return max(amalgam_norm_at_r(f, exps, r) for r in radii)


def amalgam_profile(f, exps, radii):
    """``[(r, _r||f||)]`` rows for CSV export."""
    return [(float(r), amalgam_norm_at_r(f, exps, r)) for r in radii]


# -- Euclidean cube form ------------------------------------------------------


def _require_lebesgue(space):
    if not space.is_lebesgue:
        raise NotImplementedError("Euclidean amalgam norms need a Lebesgue space")


def _window_count(r, h):
    """Largest number of consecutive centers (spacing ``h``) fitting in an open interval of length ``r``."""
    m = int(math.ceil(r / h))
    while m > 1 and (m - 1) * h >= r:
        m -= 1
    return max(m, 1)


def euclid_amalgam_at_r(f, exps, r):
    """``r**(n(1/alpha - 1/q)) * _r||f||_{q,p}`` with the partition cubes ``I_k^r`` (p < inf)
    or the sliding open cubes ``J_x^r`` (p = inf)."""
    sp = f.space
    _require_lebesgue(sp)
    q, p = exps.q, exps.p
    scale = r ** (sp.n * (inv(exps.alpha) - inv(q)))
    a = np.abs(f.values)
    if math.isinf(p):
        sizes = [_window_count(r, h) for h in sp.h]
        if math.isinf(q):
            return float(scale * sliding_max(a, sizes).max())
        top = a.max()
        if top == 0:
            return 0.0
        s = sliding_sum((a / top) ** q * sp.measures, sizes)
        return float(scale * top * np.max(np.maximum(s, 0.0)) ** (1.0 / q))

    keys = [np.floor(sp.axis_centers(ax) / r).astype(np.int64) for ax in range(sp.n)]
    grids = np.meshgrid(*keys, indexing="ij")
    flat = np.stack([g.ravel() for g in grids], axis=1)
    _, label = np.unique(flat, axis=0, return_inverse=True)
    label = label.ravel()
    if math.isinf(q):
        local = np.zeros(label.max() + 1)
        np.maximum.at(local, label, a.ravel())
    else:
        top = a.max()
        if top == 0:
            return 0.0
        sums = np.bincount(label, weights=((a / top) ** q * sp.measures).ravel())
        local = top * sums ** (1.0 / q)
    return float(scale * _scaled_lp_sum(local, np.ones_like(local), p))


def euclid_amalgam_norm(f, exps, sides):
    """``||f||_{q,p,alpha}`` on R^n: supremum over a finite grid of cube sides."""
    sides = list(sides)
    if not sides:
        raise ValueError("empty radii grid")
    return max(euclid_amalgam_at_r(f, exps, r) for r in sides)


def dyadic_sides(space, top=None):
    """Cube sides ``h * 2**j`` from one cell up to ``top`` (default: the box extent)."""
    h = min(space.h)
    top = max(b - a for a, b in zip(space.lo, space.hi)) if top is None else top
    out, r = [], h
    while r <= top * (1 + 1e-12):
        out.append(r)
        r *= 2
    return out


# -- dyadic form --------------------------------------------------------------


def dyadic_amalgam_norm(grid, f, exps, level):
    """``[sum_l (mu(E_l)**(1/alpha - 1/q) ||f chi_E_l||_q)**p]**(1/p)`` over the level-``level`` sets."""
    if level not in grid.levels:
        raise KeyError(f"dyadic grid has no level {level}")
    sp = f.space
    lab = grid.labels[level].ravel()
    mass = np.bincount(lab, weights=sp.measures.ravel())
    a = np.abs(f.values).ravel()
    if math.isinf(exps.q):
        local = np.zeros(mass.size)
        np.maximum.at(local, lab, a)
    else:
        local = np.bincount(lab, weights=a**exps.q * sp.measures.ravel()) ** (1.0 / exps.q)
    terms = mass ** (inv(exps.alpha) - inv(exps.q)) * local
    if math.isinf(exps.p):
        return float(terms.max())
    return _scaled_lp_sum(terms, np.ones_like(terms), exps.p)


def dyadic_level_for_radius(grid, r):
    """Level ``k`` with ``rho**(k+1) <= r / (2 kappa) < rho**(k+2)``."""
    from .geometry import level_for_radius

    return level_for_radius(grid, r)
