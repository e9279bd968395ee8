"""Acceptance criteria, one test per criterion; a pass/fail line per criterion is
printed in the terminal summary."""

import json
import math
import time
from fractions import Fraction

import numpy as np
import pytest

from amalgams import harness
from amalgams.amalgam import AmalgamExponents, dyadic_sides, euclid_amalgam_norm
from amalgams.functions import GridFunction, from_generator, indicator_box, lp_norm, random_piecewise
from amalgams.geometry import build_dyadic, covering_violations, verify_dyadic, vitali_select
from amalgams.harness import ExperimentConfig
from amalgams.operators import domination_check, fractional_integral
from amalgams.orlicz import YoungFunction, conjugate, holder_check, luxemburg_norm
from amalgams.space import Ball, BallFamily, estimate_doubling, make_grid_space, space_from_spec
from amalgams.weights import check_condition_AP, check_condition_main, check_condition_thmB

from conftest import ACCEPTANCE

CONFIGS = {p.stem: p for p in harness.shipped_configs()}


def record(key, ok, detail):
    ACCEPTANCE[key] = (bool(ok), detail)
    assert ok, detail


def random_functions(sp, count, seed, low=-1.0):
    rng = np.random.default_rng(seed)
    return [random_piecewise(sp, int(rng.choice([4, 16, 64, 256])), seed=int(rng.integers(2**31)), low=low)
            for _ in range(count)]


SP_1024 = make_grid_space(1, [-2, 2], 1024)
FAMILY_1 = random_functions(SP_1024, 200, seed=1)


def test_criterion_01_lebesgue_endpoint():
    start = time.perf_counter()
    sides = dyadic_sides(SP_1024)
    rng = np.random.default_rng(11)
    worst = 0.0
    for f in FAMILY_1:
        a = float(rng.choice([1.0, 1.5, 2.0, 3.0, 4.5]))
        got = euclid_amalgam_norm(f, AmalgamExponents(a, a, a), sides)
        worst = max(worst, abs(got / lp_norm(f, a) - 1))
    elapsed = time.perf_counter() - start
    record("1", worst <= 1e-12 and elapsed < 10,
           f"max relative error {worst:.2e} (limit 1e-12), {elapsed:.2f} s (limit 10 s)")


def _exact_holder_sides(f, q, a, sides):
    """``sup_r`` of the p = alpha partition norm and ``||f||_alpha``, both raised to ``alpha``, in rationals.

    Float samples, cell centers and dyadic sides are dyadic rationals; with
    ``alpha / q`` an integer every term is rational.
    """
    sp = f.space
    h = Fraction(sp.h[0])
    x = [Fraction(c) for c in sp.axis_centers(0)]
    fq = [abs(Fraction(v)) ** q for v in f.values]
    rhs = sum(abs(Fraction(v)) ** a for v in f.values) * h
    best = Fraction(0)
    for side in sides:
        r = Fraction(side)
        cubes = {}
        for xi, v in zip(x, fq):
            key = math.floor(xi / r)
            cubes[key] = cubes.get(key, 0) + v
        best = max(best, sum(r ** (1 - a // q) * (s * h) ** (a // q) for s in cubes.values()))
    return best, rhs


def test_criterion_02_per_cube_holder():
    # exact comparison: float rounding alone can flip the equality case (one-cell cubes)
    sides = dyadic_sides(SP_1024)
    pairs = [(1, 2), (1, 3), (2, 4), (1, 4)]
    bad, agree = 0, 0.0
    for i, f in enumerate(FAMILY_1):
        q, a = pairs[i % len(pairs)]
        lhs, rhs = _exact_holder_sides(f, q, a, sides)
        bad += lhs > rhs
        got = euclid_amalgam_norm(f, AmalgamExponents(q, a, a), sides)
        agree = max(agree, abs(got / float(lhs) ** (1 / a) - 1))
    record("2", bad == 0 and agree <= 1e-12,
           f"{bad} exact violations of p = alpha value <= ||f||_alpha; float path agrees to {agree:.1e}")


def test_criterion_03_luxemburg_power():
    rng = np.random.default_rng(13)
    sp = make_grid_space(1, [0, 1], 512)
    worst = 0.0
    for f in random_functions(sp, 100, seed=3):
        m = float(rng.choice([1.5, 2.0, 3.0]))
        ball = Ball(int(rng.integers(sp.size)), float(rng.uniform(0.005, 0.7)))
        mask = sp.ball_mask(ball)
        avg = lp_norm(f, m, region=mask) / sp.measures[mask].sum() ** (1 / m)
        worst = max(worst, abs(luxemburg_norm(f, YoungFunction.power(m), ball) / avg - 1))
    record("3", worst <= 1e-9, f"max relative error {worst:.2e} (limit 1e-9)")


HOLDER_PHIS = [YoungFunction.power(2), YoungFunction.power(3, normalized=True), YoungFunction.power(1.5),
               YoungFunction.power_log(2, 1.0), YoungFunction.linear()]


def test_criterion_04a_young_inequality():
    t, u = np.meshgrid(np.geomspace(1e-3, 1e3, 100), np.geomspace(1e-3, 1e3, 100))
    bad = 0
    for phi in HOLDER_PHIS:
        star = conjugate(phi)
        with np.errstate(invalid="ignore"):
            rhs = phi(t) + star(u)
        bad += int(np.count_nonzero(t * u > rhs * (1 + 1e-12)))
    record("4a", bad == 0, f"{bad} violations of tu <= Phi(t) + Phi*(u) on 10^4 points x {len(HOLDER_PHIS)} Phi")


def _holder_samples():
    rng = np.random.default_rng(14)
    sp = make_grid_space(1, [0, 1], 256)
    for i in range(200):
        f = GridFunction(sp, rng.exponential(size=256) * (rng.random(256) < rng.uniform(0.2, 1)))
        g = GridFunction(sp, rng.exponential(size=256))
        ball = Ball(int(rng.integers(256)), float(rng.uniform(0.01, 0.6)))
        yield f, g, ball, HOLDER_PHIS[i % len(HOLDER_PHIS)]


def test_criterion_04b_local_holder():
    # Literal two-Luxemburg-norm form. It needs a factor 2 in general: f = g = chi_B with
    # Phi(t) = t**2 gives lhs = 1 and rhs = 1 * 1/2. The test reports the actual count.
    bad, worst = 0, 0.0
    for f, g, ball, phi in _holder_samples():
        lhs, rhs = holder_check(f, g, phi, ball)
        worst = max(worst, lhs / rhs)
        bad += lhs > rhs * (1 + 1e-9)
    record("4b", bad == 0, f"{bad}/200 violations of lhs <= ||f||_Phi ||g||_Phi*; worst lhs/rhs {worst:.4f} "
                           "(the two-Luxemburg form only holds with constant 2)")


def test_criterion_05_covering_lemma():
    spaces = [make_grid_space(1, [0, 1], 512), make_grid_space(1, [0, 1], 512, rho_m=2.0),
              make_grid_space(2, [0, 1], 24), make_grid_space(2, [0, 1], 24, rho_m=2.0, boundary="periodic")]
    rng = np.random.default_rng(15)
    overlaps = outside = balls_seen = 0
    for i in range(100):
        sp = spaces[i % len(spaces)]
        count = int(rng.integers(1, 501))
        centers = rng.integers(0, sp.size, count)
        radii = np.exp(rng.uniform(np.log(sp.min_distance), np.log(sp.diameter), count))
        balls = [Ball(int(c), float(r)) for c, r in zip(centers, radii)]
        o, x = covering_violations(sp, balls, vitali_select(sp, balls))
        overlaps, outside, balls_seen = overlaps + o, outside + x, balls_seen + count
    record("5", overlaps == 0 and outside == 0,
           f"{overlaps} overlapping kept pairs, {outside} uncovered inputs over {balls_seen} balls")


@pytest.mark.parametrize("n,N,rho_m", [(1, 4096, 1.0), (1, 4096, 2.0), (2, 128, 1.0), (2, 128, 2.0)],
                         ids=["1d-k1", "1d-k2", "2d-k1", "2d-k2"])
def test_criterion_06_dyadic_sets(n, N, rho_m):
    sp = make_grid_space(n, [0, 1], N, rho_m=rho_m)
    grid = build_dyadic(sp)
    rep = verify_dyadic(grid)
    record(f"6-{n}d-k{int(sp.kappa)}", rep.ok,
           f"{grid.method}: {rep.levels} levels, {rep.sets} sets; violations (i) {rep.inclusion_violations}, "
           f"(ii) {rep.partition_violations}, (iii) {rep.nesting_violations}")


def _domination_generators(count, seed):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        c = float(rng.uniform(-1.2, 1.2))
        if i % 3 == 0:
            half = float(rng.uniform(0.05, 0.6))
            out.append({"kind": "indicator_box", "lo": [c - half], "hi": [c + half], "value": 1.0})
        elif i % 3 == 1:
            out.append({"kind": "random_piecewise", "pieces": 8, "seed": int(rng.integers(2**31))})
        else:
            out.append({"kind": "power_spike", "x0": [c], "c": float(rng.uniform(0.2, 0.6)), "clip": 0.02,
                        "cutoff": 0.5})
    return out


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_criterion_07_pointwise_domination(gamma):
    gens = _domination_generators(50, seed=17)
    fam = BallFamily.geometric(0.02, 2.0, 7)
    C = {}
    for N in (512, 1024):
        sp = make_grid_space(1, [-2, 2], N)
        C[N] = max(domination_check(from_generator(sp, g), gamma, fam).C for g in gens)
    growth = C[1024] / C[512]
    record(f"7-g{gamma}", math.isfinite(C[512]) and growth <= 1.10,
           f"C(N=512) {C[512]:.4f}, C(N=1024) {C[1024]:.4f}, growth {growth:.4f} (limit 1.10)")


@pytest.mark.parametrize("name", ["theo_2_4_a", "theo_2_4_b"])
def test_criterion_08_reverse_inequality(name):
    doc = json.loads(CONFIGS[name].read_text())
    doc["functions"] = {"count": 100, "seed": 18, "kinds": ["box", "piecewise", "spike"]}
    cfg = ExperimentConfig.from_dict(doc)
    sp, fam = cfg.build_space(), cfg.family()
    assert fam.is_closed_under_2kappa()
    ex = harness.cfg_exps(cfg)
    C_mu = estimate_doubling(sp, fam).C_mu
    bound = C_mu ** (1 / ex["q"] - 1 / ex["beta"])
    rep = harness.run_verifier(cfg)
    ratios = [r["ratio"] for r in rep.rows]
    bad = sum(r > bound * (1 + 1e-9) for r in ratios)
    record(f"8-{name[-1]}", len(ratios) == 100 and bad == 0,
           f"(q,alpha,beta,u,v)=({ex['q']:g},{ex['alpha']:g},{ex['beta']:g},{ex['u']:g},{ex['v']:g}): "
           f"max ratio {max(ratios):.4f} <= C_mu^(1/q-1/beta) = {bound:.4f}; {bad} violations")


SHIPPED_9 = ["theo_1_3a", "theo_1_5", "theo_2_3", "theo_3_1", "remark_3_2"]


def test_criterion_09_refinement_stability():
    start = time.perf_counter()
    lines, ok = [], True
    for name in SHIPPED_9:
        cfg = ExperimentConfig.load(CONFIGS[name]).with_overrides(N=512)
        rep = harness.estimate_constant(cfg)
        growth = max(rep.trend["growth"].values())
        good = math.isfinite(rep.constant) and rep.constant > 0 and growth <= 1.10 and rep.passed
        ok &= good
        lines.append(f"{name}: C={rep.constant:.4g} growth={growth:.4f}")
    elapsed = time.perf_counter() - start
    record("9", ok and elapsed < 300, "; ".join(lines) + f"; {elapsed:.1f} s (limit 300 s)")


def test_criterion_10_negative_control():
    cfg = ExperimentConfig.load(CONFIGS["bp_control"])
    rep = harness.run_verifier(cfg)
    growth = rep.trend["growth"]["bp"]
    record("10", not rep.preconditions["Bp"] and growth > 1.5,
           f"Phi {rep.preconditions['phi']} fails B_p; ratios {[round(r, 3) for r in rep.trend['ratios']]}, "
           f"growth {growth:.3f} (needs > 1.5)")


def _shipped_spaces():
    out = {}
    for path in sorted(CONFIGS["theo_1_1"].parent.glob("spaces/*.json")) + sorted(CONFIGS.values()):
        doc = json.loads(path.read_text())
        key = json.dumps(doc["space"], sort_keys=True)
        out.setdefault(key, (path.stem, doc["space"]))
    return list(out.values())


def test_criterion_11_unit_weights():
    worst, names = 0.0, []
    for name, spec in _shipped_spaces():
        sp = space_from_spec(spec)
        fam = BallFamily.geometric(2 * sp.min_distance ** (1 / sp.rho_m) ** sp.rho_m, 2.0, 5)
        one = GridFunction(sp, np.ones(sp.shape))
        vals = [check_condition_AP(one, 2, 4, fam).sup, check_condition_thmB(one, 1, 2, 4, fam).sup,
                check_condition_main(one, one, 2, 3, YoungFunction.power(2), fam).sup]
        worst = max(worst, max(abs(v - 1) for v in vals))
        names.append(name)
    record("11", worst <= 1e-12, f"{len(names)} distinct shipped spaces, max |value - 1| = {worst:.1e}")


@pytest.mark.parametrize("gamma", [0.25, 0.5, 0.75])
def test_criterion_12_fractional_integral_quadrature(gamma):
    lines, ok = [], True
    exact = 2**gamma / gamma
    for N in (257, 1025, 4097):
        sp = make_grid_space(1, [-2, 2], N)
        i = N // 2  # the cell centered at the origin
        assert sp.axis_centers(0)[i] == 0.0
        got = fractional_integral(indicator_box(sp, [-1.0], [1.0]), gamma).values[i]
        err = abs(got / exact - 1)
        ok &= err <= 2 / N
        lines.append(f"N={N}: rel err {err:.2e} (limit {2 / N:.2e})")
    record(f"12-g{gamma}", ok, "; ".join(lines))
