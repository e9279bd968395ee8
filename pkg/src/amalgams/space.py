"""Discretized spaces of homogeneous type on regular boxes.

A :class:`Space` is a lattice of cells on an ``n``-dimensional box (``n`` is 1
or 2). Each cell is an atom sitting at its center, carrying the mass of the
density over the cell (midpoint rule). The quasi-metric is a power of the
max-norm distance, ``d(x, y) = |x - y|_inf ** rho_m``, whose quasi-triangle
constant is ``kappa = 2 ** (rho_m - 1)``.

Because every ball ``B(x, r) = {y : d(x, y) < r}`` around a cell center is an
index box, ball sums are evaluated with prefix sums.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._windows import centered_sum

BOUNDARIES = ("truncate", "periodic")


class SpaceError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Space:
    n: int
    lo: tuple
    hi: tuple
    N: int
    rho_m: float
    boundary: str
    measures: np.ndarray = field(repr=False)
    density: dict = field(default_factory=lambda: {"kind": "lebesgue"})

    def __post_init__(self):
        self.measures.setflags(write=False)

    @property
    def shape(self):
        return (self.N,) * self.n

    @property
    def size(self):
        return self.N**self.n

    @property
    def h(self):
        return tuple((b - a) / self.N for a, b in zip(self.lo, self.hi))

    @property
    def kappa(self):
        return 2.0 ** (self.rho_m - 1.0)

    @property
    def periodic(self):
        return self.boundary == "periodic"

    @property
    def total_measure(self):
        return math.fsum(self.measures.ravel())

    @property
    def is_lebesgue(self):
        return self.density.get("kind") == "lebesgue"

    def axis_centers(self, axis):
        a, h = self.lo[axis], self.h[axis]
        return a + (np.arange(self.N) + 0.5) * h

    @property
    def centers(self):
        """Cell-center coordinates, shape ``(size, n)`` in C order."""
        grids = np.meshgrid(*[self.axis_centers(a) for a in range(self.n)], indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=-1)

    @property
    def min_distance(self):
        """Smallest quasi-distance between distinct cell centers."""
        return min(self.h) ** self.rho_m

    @property
    def diameter(self):
        if self.periodic:
            ext = max(self.N // 2 * h for h in self.h)
        else:
            ext = max((self.N - 1) * h for h in self.h)
        return ext**self.rho_m

    # -- balls ---------------------------------------------------------------

    def halfwidths(self, r):
        """Per-axis index half-widths ``k`` of the ball ``B(center, r)``.

        Offset ``j`` along an axis is inside iff ``(|j| h) ** rho_m < r``.
        """
        ks = []
        for h in self.h:
            k = int(math.floor(r ** (1.0 / self.rho_m) / h)) if r > 0 else 0
            while ((k + 1) * h) ** self.rho_m < r:
                k += 1
            while k > 0 and (k * h) ** self.rho_m >= r:
                k -= 1
            ks.append(k)
        return tuple(ks)

    def ball_sums(self, values, r):
        """``sum_{y in B(x, r)} values[y]`` for every cell center ``x``."""
        return centered_sum(values, self.halfwidths(r), self.periodic)

    def ball_masses(self, r):
        return self.ball_sums(self.measures, r)

    def unravel(self, index):
        return np.unravel_index(int(index), self.shape)

    def distances_from_cell(self, index):
        """Quasi-distances from cell ``index`` to all cells, shape ``self.shape``."""
        idx = self.unravel(index)
        dist = np.zeros(self.shape)
        for axis in range(self.n):
            off = np.abs(np.arange(self.N) - idx[axis])
            if self.periodic:
                off = np.minimum(off, self.N - off)
            d_axis = off * self.h[axis]
            shape = [1] * self.n
            shape[axis] = self.N
            dist = np.maximum(dist, d_axis.reshape(shape))
        return dist**self.rho_m

    def distances_from_point(self, x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        dist = np.zeros(self.shape)
        for axis in range(self.n):
            d_axis = np.abs(self.axis_centers(axis) - x[axis])
            if self.periodic:
                ext = self.hi[axis] - self.lo[axis]
                d_axis = np.minimum(d_axis, ext - d_axis)
            shape = [1] * self.n
            shape[axis] = self.N
            dist = np.maximum(dist, d_axis.reshape(shape))
        return dist**self.rho_m

    def ball_mask(self, ball: "Ball"):
        if isinstance(ball.center, (int, np.integer)):
            d = self.distances_from_cell(ball.center)
        else:
            d = self.distances_from_point(ball.center)
        return d < ball.radius

    def quasi_distance(self, x, y):
        x, y = np.atleast_1d(x), np.atleast_1d(y)
        diff = np.abs(x - y)
        if self.periodic:
            ext = np.asarray(self.hi) - np.asarray(self.lo)
            diff = np.minimum(diff, ext - diff)
        return float(diff.max()) ** self.rho_m

    # -- serialization -------------------------------------------------------

    def spec(self):
        box = [[a, b] for a, b in zip(self.lo, self.hi)]
        return {"n": self.n, "box": box, "N": self.N, "density": dict(self.density),
                "rho_m": self.rho_m, "boundary": self.boundary}

    def to_json(self):
        doc = self.spec()
        doc["kappa"] = self.kappa
        doc["measures"] = self.measures.ravel().tolist()
        return json.dumps(doc)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        if "measures" not in doc:
            return space_from_spec(doc)
        density = dict(doc.get("density", {"kind": "lebesgue"}))
        lo, hi = _parse_box(doc["box"], doc["n"])
        m = np.asarray(doc["measures"], dtype=float).reshape((doc["N"],) * doc["n"])
        return cls(doc["n"], lo, hi, doc["N"], float(doc.get("rho_m", 1.0)),
                   doc.get("boundary", "truncate"), m.copy(), density)

    def refine(self, factor=2):
        """Same box and density on a lattice ``factor`` times finer per axis."""
        spec = self.spec()
        if spec["density"].get("kind") == "table":
            raise SpaceError("tabulated densities cannot be refined")
        spec["N"] = self.N * factor
        return space_from_spec(spec)


@dataclass(frozen=True)
class Ball:
    center: object  # cell index (int) or coordinate sequence
    radius: float


@dataclass(frozen=True)
class BallFamily:
    """Balls centered at every cell center with radii from a finite increasing grid."""

    radii: tuple
    closed_under_2kappa: bool = False
    kappa: float = 1.0

    def __post_init__(self):
        r = np.asarray(self.radii, dtype=float)
        if r.size == 0:
            raise SpaceError("ball family needs at least one radius")
        if np.any(r <= 0) or np.any(np.diff(r) <= 0):
            raise SpaceError("radii must be positive and strictly increasing")
        if self.closed_under_2kappa and not self.is_closed_under_2kappa():
            raise SpaceError("radii grid is not closed under division by 2*kappa")

    @classmethod
    def geometric(cls, r0, tau, J, **kw):
        return cls(tuple(float(r0 * tau**j) for j in range(J + 1)), **kw)

    @classmethod
    def closed(cls, r0, kappa, per_step, J):
        """Geometric grid with ratio ``(2 kappa) ** (1 / per_step)``; closed under ``r -> r / 2kappa``."""
        tau = (2.0 * kappa) ** (1.0 / per_step)
        radii = tuple(float(r0 * tau**j) for j in range(J + 1))
        return cls(radii, closed_under_2kappa=True, kappa=kappa)

    def companion_index(self, i, rtol=1e-9):
        """Index of ``radii[i] / (2 kappa)`` in the grid, or ``None``."""
        target = self.radii[i] / (2.0 * self.kappa)
        for j, r in enumerate(self.radii):
            if abs(r - target) <= rtol * target:
                return j
        return None

    def is_closed_under_2kappa(self):
        r0 = self.radii[0]
        for i, r in enumerate(self.radii):
            if r / (2.0 * self.kappa) >= r0 * (1 - 1e-9) and self.companion_index(i) is None:
                return False
        return True

    def __len__(self):
        return len(self.radii)


# -- construction -----------------------------------------------------------


def _parse_box(box, n):
    box = np.asarray(box, dtype=float)
    if box.ndim == 1:
        box = np.tile(box, (n, 1))
    if box.shape != (n, 2) or np.any(box[:, 1] <= box[:, 0]):
        raise SpaceError(f"box must be {n} intervals [lo, hi) with lo < hi, got {box.tolist()}")
    return tuple(box[:, 0].tolist()), tuple(box[:, 1].tolist())


def make_grid_space(n, box, N, density="lebesgue", rho_m=1.0, boundary="truncate"):
    """Build a :class:`Space` on ``box`` with ``N`` cells per axis.

    ``density`` is ``"lebesgue"``, ``("power", a)`` / ``{"kind": "power",
    "param": a}`` for ``|x|**a`` (``a > -1``), or ``{"kind": "table",
    "param": values}`` with one density value per cell.
    """
    if n not in (1, 2):
        raise SpaceError("only n = 1 or n = 2 is supported")
    if int(N) < 2:
        raise SpaceError("N must be at least 2")
    if rho_m < 1:
        raise SpaceError("rho_m must be >= 1")
    if boundary not in BOUNDARIES:
        raise SpaceError(f"boundary must be one of {BOUNDARIES}")
    N = int(N)
    lo, hi = _parse_box(box, n)
    density = _parse_density(density)

    grids = np.meshgrid(*[lo[a] + (np.arange(N) + 0.5) * (hi[a] - lo[a]) / N
                          for a in range(n)], indexing="ij")
    vol = float(np.prod([(hi[a] - lo[a]) / N for a in range(n)]))
    kind = density["kind"]
    if kind == "lebesgue":
        dens = np.ones((N,) * n)
    elif kind == "power":
        a = float(density["param"])
        if a <= -1:
            raise SpaceError(f"power density |x|^a needs a > -1 (got {a})")
        radius = np.sqrt(sum(g**2 for g in grids))
        with np.errstate(divide="ignore"):
            dens = radius**a
    elif kind == "table":
        dens = np.asarray(density["param"], dtype=float).reshape((N,) * n)
    else:
        raise SpaceError(f"unknown density kind {kind!r}")
    if not np.all(np.isfinite(dens)) or np.any(dens <= 0):
        raise SpaceError("density must be finite and strictly positive at every cell center")
    return Space(n, lo, hi, N, float(rho_m), boundary, dens * vol, density)


def _parse_density(density):
    if isinstance(density, str):
        return {"kind": density}
    if isinstance(density, (tuple, list)):
        return {"kind": density[0], "param": density[1]}
    return dict(density)


def space_from_spec(spec):
    """Build a space from a JSON-style dict ``{n, box, N, density, rho_m, boundary}``."""
    try:
        return make_grid_space(int(spec["n"]), spec["box"], int(spec["N"]),
                               spec.get("density", "lebesgue"), float(spec.get("rho_m", 1.0)),
                               spec.get("boundary", "truncate"))
    except KeyError as exc:
        raise SpaceError(f"space spec is missing key {exc}") from None


def ball_measure(space, ball):
    if ball.radius <= 0:
        raise SpaceError("ball radius must be positive")
    return math.fsum(space.measures[space.ball_mask(ball)])


# -- doubling constants -----------------------------------------------------


@dataclass
class DoublingReport:
    C_mu: float
    D_mu: float
    samples: int
    skipped: int
    nested_pairs: int
    violations: int


@dataclass
class ReverseDoublingReport:
    C_tilde: float
    delta: float
    samples: int


@dataclass
class NormalityReport:
    a: float
    b: float
    radii: tuple
    phi: tuple
    monotone: bool

    @property
    def ratio(self):
        return self.b / self.a


def _select(values, centers):
    v = np.asarray(values).ravel()
    return v if centers is None else v[np.asarray(centers).ravel()]


def estimate_doubling(space, family, centers=None):
    """Sampled doubling constant ``max mu(B(x, 2r)) / mu(B(x, r))`` over the family.

    ``centers`` optionally restricts the sampled centers (boolean mask or
    index array). Also counts violations of the nested-ball bound
    ``mu(B1)/mu(B2) <= C (r1/r2)**D`` over concentric pairs of family radii.
    """
    ratios, skipped = [], 0
    masses = {}
    for r in family.radii:
        m1 = _select(space.ball_masses(r), centers)
        m2 = _select(space.ball_masses(2 * r), centers)
        ok = m1 > 0
        skipped += int(np.count_nonzero(~ok))
        ratios.append(np.max(m2[ok] / m1[ok]))
        masses[r] = m1
    C = max(1.0, float(max(ratios)))
    D = math.log2(C)
    pairs = violations = 0
    radii = list(family.radii)
    for i, r2 in enumerate(radii):
        for r1 in radii[i + 1:]:
            m1, m2 = masses[r1], masses[r2]
            ok = m2 > 0
            bound = C * (r1 / r2) ** D
            pairs += int(np.count_nonzero(ok))
            violations += int(np.count_nonzero(m1[ok] / m2[ok] > bound * (1 + 1e-12)))
    return DoublingReport(C, D, len(radii) * len(masses[radii[0]]), skipped, pairs, violations)


def estimate_reverse_doubling(space, family, centers=None):
    """Fit ``mu(B1)/mu(B2) >= C_tilde (r1/r2)**delta`` over concentric pairs.

    ``delta`` is the least-squares slope of log mass ratio against log radius
    ratio; ``C_tilde`` is then the largest constant valid on every pair.
    """
    radii = list(family.radii)
    if len(radii) < 2:
        raise SpaceError("reverse doubling needs at least two radii")
    masses = [_select(space.ball_masses(r), centers) for r in radii]
    xs, ys = [], []
    for i in range(len(radii)):
        for j in range(i + 1, len(radii)):
            ok = masses[i] > 0
            xs.append(np.full(np.count_nonzero(ok), math.log(radii[j] / radii[i])))
            ys.append(np.log(masses[j][ok] / masses[i][ok]))
    x, y = np.concatenate(xs), np.concatenate(ys)
    A = np.stack([x, np.ones_like(x)], axis=1)
    delta = float(np.linalg.lstsq(A, y, rcond=None)[0][0])
    C_tilde = float(np.exp(np.min(y - delta * x)))
    return ReverseDoublingReport(C_tilde, delta, int(x.size))


def check_normal(space, radii, centers=None):
    """Normality profile ``phi(r) = median_x mu(B(x, r))`` and the constants ``a <= b``."""
    radii = tuple(float(r) for r in radii)
    phi, lo, hi = [], math.inf, 0.0
    for r in radii:
        m = _select(space.ball_masses(r), centers)
        p = float(np.median(m))
        phi.append(p)
        lo = min(lo, float(m.min()) / p)
        hi = max(hi, float(m.max()) / p)
    monotone = bool(np.all(np.diff(phi) >= 0))
    return NormalityReport(lo, hi, radii, tuple(phi), monotone)


def quasi_triangle_violations(space, indices: Optional[Sequence[int]] = None):
    """Count triples violating ``d(x,z) <= kappa (d(x,y) + d(y,z))`` among the given cells."""
    idx = np.arange(space.size) if indices is None else np.asarray(indices)
    D = np.stack([space.distances_from_cell(i).ravel()[idx] for i in idx])
    lhs = D[:, None, :]
    rhs = space.kappa * (D[:, :, None] + D[None, :, :])
    return int(np.count_nonzero(lhs > rhs * (1 + 1e-12)))
