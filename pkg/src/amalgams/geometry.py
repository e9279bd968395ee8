"""Covering lemma selection and nested dyadic decompositions of grid spaces.

Dyadic levels use ``rho = 8 kappa**5``. Level-``k`` sets ``E^k_j`` with
centers ``x^k_j`` must satisfy

(i)   ``B(x^k_j, rho**k) <= E^k_j <= B(x^k_j, rho**(k+1))``
(ii)  each level partitions the cells
(iii) a set is inside or disjoint from every set of a higher level.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .space import Ball


class DyadicConstructionError(RuntimeError):
    pass


# -- covering lemma -------------------------------------------------------------


@dataclass
class CoveringResult:
    selected: list
    assignment: np.ndarray  # input ball -> index (into the input list) of its kept ball

    def dilation(self, kappa):
        return 3.0 * kappa**2


def vitali_select(space, balls, kappa=None):
    """Greedy disjoint subfamily: scan by decreasing radius (lowest index first on ties),
    keep a ball iff it misses every kept ball.

    Each input ball is assigned to the first kept ball (in scan order) that it
    meets; that ball was scanned earlier, so its radius is at least as large,
    and the input lies in its ``3 kappa**2`` dilate.
    """
    kappa = space.kappa if kappa is None else kappa
    masks = np.stack([space.ball_mask(b).ravel() for b in balls]) if balls else np.zeros((0, space.size), bool)
    order = sorted(range(len(balls)), key=lambda i: (-balls[i].radius, i))
    union = np.zeros(space.size, bool)
    kept = []
    for i in order:
        if not np.any(masks[i] & union):
            kept.append(i)
            union |= masks[i]
    assignment = np.empty(len(balls), dtype=int)
    kept_masks = masks[kept] if kept else np.zeros((0, space.size), bool)
    for i in range(len(balls)):
        if i in kept:
            assignment[i] = i
            continue
        hits = np.flatnonzero(np.any(kept_masks & masks[i], axis=1))
        # an empty ball meets nothing; it is contained in any kept ball
        assignment[i] = kept[hits[0]] if hits.size else kept[0]
    return CoveringResult(kept, assignment)


def covering_violations(space, balls, result, kappa=None):
    """``(overlapping kept pairs, inputs not inside 3 kappa^2 * assigned ball)``."""
    kappa = space.kappa if kappa is None else kappa
    masks = [space.ball_mask(b).ravel() for b in balls]
    overlap = 0
    for a_pos, a in enumerate(result.selected):
        for b in result.selected[a_pos + 1:]:
            overlap += int(np.any(masks[a] & masks[b]))
    outside = 0
    for i, j in enumerate(result.assignment):
        big = space.ball_mask(Ball(balls[j].center, 3 * kappa**2 * balls[j].radius)).ravel()
        outside += int(np.any(masks[i] & ~big))
    return overlap, outside


# -- dyadic grids ------------------------------------------------------------------


@dataclass
class DyadicGrid:
    space: object = field(repr=False)
    kappa: float
    rho: float
    levels: list
    members: dict = field(repr=False)  # level -> list of cell-index arrays
    centers: dict = field(repr=False)  # level -> (count, n) coordinates
    center_cells: dict = field(repr=False)  # level -> cell index of each center, -1 if off-grid
    parents: dict = field(repr=False)  # level -> parent index at the next level (-1 at top)
    method: str = "net"

    @property
    def labels(self):
        out = {}
        for k in self.levels:
            lab = np.full(self.space.size, -1, dtype=int)
            for j, m in enumerate(self.members[k]):
                lab[m] = np.where(lab[m] < 0, j, lab[m])
            out[k] = lab.reshape(self.space.shape)
        return out

    def count(self, level):
        return len(self.members[level])

    def to_json(self):
        doc = {"kappa": self.kappa, "rho": self.rho, "method": self.method, "levels": []}
        for k in self.levels:
            sets = [{"center": self.centers[k][j].tolist(),
                     "members": self.members[k][j].tolist(),
                     "parent": int(self.parents[k][j])} for j in range(self.count(k))]
            doc["levels"].append({"k": k, "sets": sets})
        return json.dumps(doc)


def _level_range(space, rho):
    k_min = math.floor(math.log(min(space.h) ** space.rho_m) / math.log(rho))
    while rho**k_min >= min(space.h) ** space.rho_m:
        k_min -= 1
    k_max = k_min
    while rho ** (k_max + 1) <= space.diameter:
        k_max += 1
    return k_min, k_max


def build_dyadic(space, method="auto"):
    """Nested decomposition satisfying (i)-(iii).

    ``method="cubes"`` (``rho_m = 1``, truncated boxes) uses cubes of side
    ``rho**(k+1)`` anchored at the lower box corner, centered at their
    midpoints. ``method="net"`` builds nested nets bottom-up: singletons at
    the base level, then at each level a greedy maximal separated subset of
    the previous centers (lowest cell index first) with every child set
    attached to its nearest new center.
    """
    kappa = space.kappa
    rho = 8.0 * kappa**5
    if method == "auto":
        method = "cubes" if space.rho_m == 1.0 and not space.periodic else "net"
    if method == "cubes":
        if space.rho_m != 1.0 or space.periodic:
            raise ValueError("cube decomposition needs rho_m = 1 and a truncated box")
        grid = _build_cubes(space, rho)
    elif method == "net":
        grid = _build_net(space, rho)
    else:
        raise ValueError(f"unknown dyadic method {method!r}")
    bad = _check_inclusions(grid)
    if bad:
        raise DyadicConstructionError(f"property (i) fails at {len(bad)} sets, first: {bad[:5]}")
    return grid


def _build_cubes(space, rho):
    k_min, k_max = _level_range(space, rho)
    levels = list(range(k_min, k_max + 1))
    members, centers, cells, parents = {}, {}, {}, {}
    lab_by_level = {}
    lo = np.asarray(space.lo)
    c = space.centers
    for k in levels:
        side = rho ** (k + 1)
        keys = np.floor((c - lo) / side).astype(np.int64)
        uniq, lab = np.unique(keys, axis=0, return_inverse=True)
        lab = lab.ravel()
        order = np.argsort(lab, kind="stable")
        bounds = np.searchsorted(lab[order], np.arange(len(uniq) + 1))
        members[k] = [order[bounds[j]:bounds[j + 1]] for j in range(len(uniq))]
        centers[k] = lo + (uniq + 0.5) * side
        cells[k] = np.full(len(uniq), -1)
        lab_by_level[k] = lab
    for k in levels:
        if k == k_max:
            parents[k] = np.full(len(members[k]), -1)
        else:
            parents[k] = np.array([lab_by_level[k + 1][m[0]] for m in members[k]])
    return DyadicGrid(space, space.kappa, rho, levels, members, centers, cells, parents, "cubes")


def _build_net(space, rho):
    kappa = space.kappa
    k_min, _ = _level_range(space, rho)
    coords = space.centers
    k = k_min
    levels = [k]
    members = {k: [np.array([i]) for i in range(space.size)]}
    cells = {k: np.arange(space.size)}
    parents = {}
    radius = 0.0
    while True:
        Z = cells[k]
        if len(Z) == 1 and rho ** (k + 1) > space.diameter:
            parents[k] = np.array([-1])
            break
        sep = 2.0 * kappa**2 * (rho ** (k + 1) + radius) * (1 + 1e-9)
        chosen = []
        dist_rows = []
        for pos, z in enumerate(Z):
            d = space.distances_from_cell(z).ravel()
            if chosen and np.min(d[Z[chosen]]) < sep:
                continue
            chosen.append(pos)
            dist_rows.append(d)
        new_cells = Z[chosen]
        D = np.stack(dist_rows)[:, Z]  # new centers x old centers
        parent = np.argmin(D, axis=0)  # ties -> lowest new-center index
        kids = [[] for _ in chosen]
        for j, p in enumerate(parent):
            kids[p].append(members[k][j])
        parents[k] = parent
        k += 1
        levels.append(k)
        members[k] = [np.sort(np.concatenate(g)) for g in kids]
        cells[k] = new_cells
        radius = max(float(np.max(dist_rows[i][members[k][i]])) for i in range(len(chosen)))
    centers = {lv: coords[cells[lv]] for lv in levels}
    return DyadicGrid(space, kappa, rho, levels, members, centers, cells, parents, "net")


def _center_distances(grid, k, j):
    sp = grid.space
    cell = grid.center_cells[k][j]
    if cell >= 0:
        return sp.distances_from_cell(cell).ravel()
    return sp.distances_from_point(grid.centers[k][j]).ravel()


def _check_inclusions(grid):
    bad = []
    for k in grid.levels:
        inner, outer = grid.rho**k, grid.rho ** (k + 1)
        if grid.method == "net" and k == grid.levels[0]:
            # singletons: inner ball is the center cell alone since rho**k_min < min distance
            if inner > grid.space.min_distance:
                bad.append((k, -1, "base level too coarse"))
            continue
        for j, m in enumerate(grid.members[k]):
            d = _center_distances(grid, k, j)
            inside = np.zeros(grid.space.size, bool)
            inside[m] = True
            if np.any(d[m] >= outer):
                bad.append((k, j, "outer"))
            if np.any((d < inner) & ~inside):
                bad.append((k, j, "inner"))
    return bad


@dataclass
class DyadicReport:
    inclusion_violations: int
    partition_violations: int
    nesting_violations: int
    levels: int
    sets: int

    @property
    def ok(self):
        return not (self.inclusion_violations or self.partition_violations or self.nesting_violations)


def _membership(grid, k):
    m = grid.members[k]
    rows = np.concatenate(m) if m else np.empty(0, int)
    cols = np.concatenate([np.full(len(x), j) for j, x in enumerate(m)]) if m else np.empty(0, int)
    return sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(grid.space.size, len(m)))


def verify_dyadic(grid):
    """Exhaustive check of (i), (ii), (iii); returns violation counts."""
    sp = grid.space
    inc = 0
    for k in grid.levels:
        inner, outer = grid.rho**k, grid.rho ** (k + 1)
        for j, m in enumerate(grid.members[k]):
            d = _center_distances(grid, k, j)
            inside = np.zeros(sp.size, bool)
            inside[m] = True
            inc += int(np.any(d[m] >= outer) or np.any((d < inner) & ~inside))
    part = 0
    for k in grid.levels:
        cov = np.bincount(np.concatenate(grid.members[k]), minlength=sp.size) if grid.members[k] else np.zeros(sp.size)
        part += int(np.count_nonzero(cov != 1))
    nest = 0
    mats = {k: _membership(grid, k) for k in grid.levels}
    for a, k in enumerate(grid.levels):
        sizes = np.array([len(x) for x in grid.members[k]])
        for l in grid.levels[a + 1:]:
            inter = (mats[k].T @ mats[l]).tocoo()
            nest += int(np.count_nonzero(inter.data != sizes[inter.row]))
    return DyadicReport(inc, part, nest, len(grid.levels), sum(grid.count(k) for k in grid.levels))


def level_for_radius(grid, r):
    """Level ``k`` with ``rho**(k+1) <= r/(2 kappa) < rho**(k+2)``."""
    x = r / (2.0 * grid.kappa)
    k = math.floor(math.log(x) / math.log(grid.rho)) - 1
    while grid.rho ** (k + 1) > x:
        k -= 1
    while grid.rho ** (k + 2) <= x:
        k += 1
    return k


def bounded_overlap_count(grid, ball):
    """Number of level-``k`` sets meeting ``ball``, ``k`` matched to the radius."""
    k = level_for_radius(grid, ball.radius)
    if k not in grid.levels:
        raise ValueError(f"radius {ball.radius} maps to level {k}, outside {grid.levels[0]}..{grid.levels[-1]}")
    mask = grid.space.ball_mask(ball).ravel()
    return int(np.unique(grid.labels[k].ravel()[mask]).size)


def max_overlap(grid, radii):
    """Largest :func:`bounded_overlap_count` over all cell-centered balls with the given radii."""
    sp = grid.space
    labels = grid.labels
    worst = 0
    for r in radii:
        k = level_for_radius(grid, r)
        if k not in grid.levels:
            continue
        lab = labels[k].ravel()
        for i in range(sp.size):
            mask = sp.distances_from_cell(i).ravel() < r
            worst = max(worst, int(np.unique(lab[mask]).size))
    return worst
