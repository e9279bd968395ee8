import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from amalgams.functions import GridFunction, lp_norm, power_spike, random_piecewise
from amalgams.orlicz import (YoungFunction, amemiya_norm, ball_luxemburg_norms, check_Bp,
                             check_Bp_boundedness, check_doubling, conjugate, holder_check,
                             luxemburg_norm, orlicz_maximal)
from amalgams.space import Ball, BallFamily, make_grid_space

SP = make_grid_space(1, [0, 1], 200)
FAMILIES = [YoungFunction.power(2), YoungFunction.power(3, normalized=True), YoungFunction.power(1.5, coef=2.0),
            YoungFunction.power_log(2, 1.0), YoungFunction.power_log(1.5, 2.0)]


def brute_conjugate(phi, u):
    t = np.geomspace(1e-8, 1e8, 200_001)
    return max(0.0, float(np.max(t * u - phi(t))))


@pytest.mark.parametrize("phi", FAMILIES[:3])
def test_power_conjugate_closed_form(phi):
    star = conjugate(phi)
    for u in (0.1, 0.7, 1.0, 3.0, 20.0):
        assert float(star(u)) == pytest.approx(brute_conjugate(phi, u), rel=1e-6)


def test_conjugate_of_cubic_over_three():
    star = conjugate(YoungFunction.power(3, normalized=True))
    assert star.params["m"] == pytest.approx(1.5)
    assert star.params["coef"] == pytest.approx(2 / 3)


def test_linear_and_indicator_are_conjugate():
    star = conjugate(YoungFunction.linear(2.0))
    assert star.family == "indicator"
    assert float(star(1.9)) == 0.0 and math.isinf(float(star(2.1)))
    assert conjugate(star).describe() == YoungFunction.linear(2.0).describe()


@given(st.floats(1e-3, 1e3), st.floats(1e-3, 1e3), st.sampled_from(range(len(FAMILIES))))
def test_young_inequality(t, u, i):
    phi = FAMILIES[i]
    star = conjugate(phi)
    assert t * u <= float(phi(t)) + float(star(u)) + 1e-9 * (1 + t * u)


def test_legendre_conjugate_matches_brute_force():
    phi = YoungFunction.power_log(2, 1.0)
    star = conjugate(phi)
    for u in (0.5, 2.0, 10.0):
        assert float(star(u)) == pytest.approx(brute_conjugate(phi, u), rel=1e-4)


@given(st.integers(0, 10_000), st.sampled_from([1.5, 2.0, 3.0]))
def test_luxemburg_power_is_normalized_lm_average(seed, m):
    f = random_piecewise(SP, 6, seed=seed, low=-2, high=2)
    ball = Ball((0.4,), 0.3)
    mask = SP.ball_mask(ball)
    avg = lp_norm(f, m, region=mask) / SP.measures[mask].sum() ** (1 / m)
    assert luxemburg_norm(f, YoungFunction.power(m), ball) == pytest.approx(avg, rel=1e-12)
    assert luxemburg_norm(f, YoungFunction.power(m), ball, method="bisect") == pytest.approx(avg, rel=1e-12)


@pytest.mark.parametrize("phi", FAMILIES)
def test_luxemburg_constraint_is_tight(phi):
    f = random_piecewise(SP, 6, seed=3, high=5)
    ball = Ball(50, 0.2)
    mask = SP.ball_mask(ball)
    a = luxemburg_norm(f, phi, ball)
    mu = SP.measures[mask]
    mean = lambda s: float(np.sum(phi(np.abs(f.values[mask]) / s) * mu) / mu.sum())
    assert mean(a) <= 1 + 1e-12
    assert mean(a * (1 - 1e-9)) > 1


def test_indicator_luxemburg_is_scaled_sup():
    f = random_piecewise(SP, 6, seed=5)
    mask = SP.ball_mask(Ball(10, 0.1))
    assert luxemburg_norm(f, YoungFunction.indicator(2.0), mask) == pytest.approx(f.values[mask].max() / 2)


@pytest.mark.parametrize("phi", [YoungFunction.power(2.5), YoungFunction.power_log(2, 1.0)])
def test_ball_luxemburg_norms_match_single_balls(phi):
    sp = make_grid_space(2, [0, 1], 8, boundary="periodic")
    f = random_piecewise(sp, 4, seed=1, high=3)
    got = ball_luxemburg_norms(f, phi, 0.3).ravel()
    want = [luxemburg_norm(f, phi, Ball(i, 0.3)) for i in range(sp.size)]
    assert np.allclose(got, want, rtol=1e-12)


def test_orlicz_maximal_method_agreement():
    f = random_piecewise(SP, 6, seed=8)
    fam = BallFamily.geometric(0.01, 2.0, 5)
    a = orlicz_maximal(f, YoungFunction.power(2), fam).values
    b = orlicz_maximal(f, YoungFunction.power(2), fam, method="bisect").values
    assert np.allclose(a, b, rtol=1e-12)


def test_doubling_checks():
    ok, ratio = check_doubling(YoungFunction.power(3))
    assert ok and ratio == pytest.approx(8.0)
    ok, ratio = check_doubling(YoungFunction.power_log(2, 1.0))
    assert ok and 4.0 < ratio < 5.0
    assert check_doubling(YoungFunction.indicator(1.0)) == (False, math.inf)


def test_Bp_verdicts():
    assert check_Bp(YoungFunction.power(1.5), 2).holds
    assert not check_Bp(YoungFunction.power(2), 2).holds
    assert not check_Bp(YoungFunction.power(3), 2).holds
    assert check_Bp(YoungFunction.power_log(1.5, 4.0), 2).holds
    assert not check_Bp(YoungFunction.power_log(2, 1.0), 2).holds
    assert not check_Bp(YoungFunction.indicator(1.0), 2).holds
    t = np.geomspace(1e-3, 1e7, 200)
    assert check_Bp(YoungFunction.table(t, t**1.2), 2).holds
    with pytest.raises(ValueError):
        check_Bp(YoungFunction.power(2), 1.0)


def test_amemiya_power_closed_form():
    # inf_k (1 + k**m A) / k = m/(m-1) * ((m-1) A)**(1/m) with A the ball average of |f|**m
    f = random_piecewise(SP, 6, seed=11)
    mask = SP.ball_mask(Ball(100, 0.25))
    for m in (1.5, 2.0, 3.0):
        A = np.sum(np.abs(f.values[mask]) ** m * SP.measures[mask]) / SP.measures[mask].sum()
        want = m / (m - 1) * ((m - 1) * A) ** (1 / m)
        assert amemiya_norm(f, YoungFunction.power(m), mask) == pytest.approx(want, rel=1e-8)


@given(st.integers(0, 10_000), st.sampled_from(range(len(FAMILIES))))
def test_holder_with_amemiya_and_factor_two(seed, i):
    rng = np.random.default_rng(seed)
    f = GridFunction(SP, rng.exponential(size=200))
    g = GridFunction(SP, rng.exponential(size=200))
    ball = Ball(int(rng.integers(200)), float(rng.uniform(0.02, 0.5)))
    phi = FAMILIES[i]
    star = conjugate(phi)
    lhs, rhs = holder_check(f, g, phi, ball, star)
    assert lhs <= 2 * rhs * (1 + 1e-9)
    mask = SP.ball_mask(ball)
    assert lhs <= luxemburg_norm(f, phi, mask) * amemiya_norm(g, star, mask) * (1 + 1e-7)


def test_Bp_boundedness_grows_only_outside_Bp():
    sp = make_grid_space(1, [-1, 1], 4096)
    fam = BallFamily.geometric(0.0005, 2.0, 11)

    def ratios(phi):
        return [check_Bp_boundedness(phi, 2, [power_spike(sp, [0.0], 0.5, clip=c)], fam)
                for c in (0.02, 0.005, 0.00125)]

    bad = ratios(YoungFunction.power(3))
    good = ratios(YoungFunction.power(1.5))
    assert bad[-1] / bad[0] > 1.5
    assert good[-1] / good[0] < bad[-1] / bad[0]
