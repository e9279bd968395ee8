import copy
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from amalgams.geometry import (DyadicConstructionError, bounded_overlap_count, build_dyadic,
                               covering_violations, level_for_radius, max_overlap, verify_dyadic,
                               vitali_select)
from amalgams.space import Ball, make_grid_space

GRIDS = {
    "1d-cubes": make_grid_space(1, [0, 1], 512),
    "1d-net": make_grid_space(1, [0, 1], 512, rho_m=2.0),
    "1d-periodic": make_grid_space(1, [0, 1], 300, boundary="periodic"),
    "2d-cubes": make_grid_space(2, [0, 1], 32),
    "2d-net": make_grid_space(2, [0, 1], 32, rho_m=2.0),
}


def random_balls(sp, rng, count):
    centers = rng.integers(0, sp.size, count)
    radii = np.exp(rng.uniform(np.log(sp.min_distance), np.log(sp.diameter), count))
    return [Ball(int(c), float(r)) for c, r in zip(centers, radii)]


@settings(max_examples=25)
@given(st.integers(0, 10_000), st.sampled_from(["1d-cubes", "1d-net", "2d-net"]))
def test_vitali_selection_is_disjoint_and_covers(seed, name):
    sp = GRIDS[name]
    rng = np.random.default_rng(seed)
    balls = random_balls(sp, rng, int(rng.integers(1, 60)))
    res = vitali_select(sp, balls)
    assert covering_violations(sp, balls, res) == (0, 0)
    for i, j in enumerate(res.assignment):
        assert balls[j].radius >= balls[i].radius


def test_vitali_keeps_largest_ball_first():
    sp = GRIDS["1d-cubes"]
    balls = [Ball(10, 0.01), Ball(200, 0.5), Ball(400, 0.02)]
    res = vitali_select(sp, balls)
    assert res.selected[0] == 1
    assert res.dilation(sp.kappa) == 3.0


@pytest.mark.parametrize("name", GRIDS)
def test_dyadic_grid_has_no_violations(name):
    grid = build_dyadic(GRIDS[name])
    rep = verify_dyadic(grid)
    assert rep.ok, rep
    assert grid.count(grid.levels[-1]) == 1 or grid.method == "cubes"
    assert grid.rho == pytest.approx(8 * grid.kappa**5)


def test_methods_by_space():
    assert build_dyadic(GRIDS["1d-cubes"]).method == "cubes"
    assert build_dyadic(GRIDS["1d-net"]).method == "net"
    assert build_dyadic(GRIDS["1d-periodic"]).method == "net"
    assert verify_dyadic(build_dyadic(GRIDS["1d-cubes"], "net")).ok
    with pytest.raises(ValueError):
        build_dyadic(GRIDS["1d-net"], "cubes")
    with pytest.raises(ValueError):
        build_dyadic(GRIDS["1d-cubes"], "hexagons")


def test_fault_injection_is_detected():
    grid = build_dyadic(GRIDS["1d-net"])
    k = grid.levels[2]
    moved = copy.deepcopy(grid)
    a, b = moved.members[k][0], moved.members[k][1]
    moved.members[k][0], moved.members[k][1] = a[1:], np.sort(np.append(b, a[0]))
    rep = verify_dyadic(moved)
    assert rep.nesting_violations > 0 or rep.inclusion_violations > 0
    dropped = copy.deepcopy(grid)
    dropped.members[k][0] = dropped.members[k][0][1:]
    assert verify_dyadic(dropped).partition_violations == 1


def test_coarse_base_level_is_rejected(monkeypatch):
    from amalgams import geometry

    monkeypatch.setattr(geometry, "_level_range", lambda sp, rho: (5, 6))
    with pytest.raises(DyadicConstructionError):
        build_dyadic(GRIDS["1d-net"])


def test_level_for_radius_and_overlap():
    grid = build_dyadic(GRIDS["1d-cubes"])
    for r in (0.05, 0.3, 0.9):
        k = level_for_radius(grid, r)
        assert grid.rho ** (k + 1) <= r / 2 < grid.rho ** (k + 2)
    # B(0.5 + h/2, 0.3) spans (0.2, 0.8): level-side 1/8 cubes with indices 1..6
    assert bounded_overlap_count(grid, Ball(256, 0.3)) == 6
    # side > r/(2 rho) gives at most 2r/side + 2 = 4 rho + 2 sets in one dimension
    assert max_overlap(grid, [0.1, 0.3]) <= 4 * grid.rho + 2
    with pytest.raises(ValueError):
        bounded_overlap_count(grid, Ball(0, 1e6))


def test_labels_and_json():
    grid = build_dyadic(GRIDS["2d-net"])
    for k, lab in grid.labels.items():
        assert lab.shape == grid.space.shape and lab.min() == 0
        assert lab.max() == grid.count(k) - 1
    doc = json.loads(grid.to_json())
    assert doc["rho"] == grid.rho and len(doc["levels"]) == len(grid.levels)
    top = doc["levels"][-1]["sets"]
    assert len(top) == 1 and top[0]["parent"] == -1
    assert sorted(top[0]["members"]) == list(range(grid.space.size))
