"""Fractional maximal operators and the fractional integral on grid spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._exponents import inv, parse_exponent
from ._windows import centered_max, centered_sum
from .functions import GridFunction, ball_lq_norms
from .space import BallFamily


def _check_q_beta(q, beta):
    q, beta = parse_exponent(q), parse_exponent(beta)
    if not 1 <= q <= beta:
        raise ValueError(f"fractional maximal operator needs 1 <= q <= beta, got q={q}, beta={beta}")
    return q, beta


def ball_values(f, q, beta, r):
    """``mu(B(x, r))**(1/beta - 1/q) * ||f chi_B(x, r)||_q`` for every center ``x``."""
    mass = f.space.ball_masses(r)
    return mass ** (inv(beta) - inv(q)) * ball_lq_norms(f, q, r)


def fractional_maximal(f, q, beta, family):
    """``M_{q,beta} f(x)``: max over family balls containing ``x``.

    The balls containing ``x`` with radius ``r`` are exactly those whose
    centers lie in ``B(x, r)``, so each radius costs one prefix-sum pass and
    one sliding maximum.
    """
    q, beta = _check_q_beta(q, beta)
    sp = f.space
    out = np.zeros(sp.shape)
    for r in family.radii:
        v = ball_values(f, q, beta, r)
        out = np.maximum(out, centered_max(v, sp.halfwidths(r), sp.periodic))
    return GridFunction(sp, out)


def euclid_fractional_maximal(f, q, beta, sides):
    """``m_{q,beta} f`` over open axis-parallel cubes of the given side lengths.

    Under the max-norm metric the open cube of side ``l`` centered at a cell is
    the ball of radius ``l/2``.
    """
    sp = f.space
    if not sp.is_lebesgue or sp.rho_m != 1.0:
        raise NotImplementedError("cube maximal operator needs a Lebesgue space with rho_m = 1")
    return fractional_maximal(f, q, beta, BallFamily(tuple(0.5 * s for s in sides)))


# -- fractional integral ------------------------------------------------------


def _shell_distances(space):
    """Sorted distinct max-norm distances between cell centers and per-axis closed half-widths."""
    per_axis = []
    for h in space.h:
        top = space.N // 2 if space.periodic else space.N - 1
        per_axis.append(np.arange(top + 1) * h)
    D = np.unique(np.round(np.concatenate(per_axis), 12))
    widths = []
    for d in D:
        widths.append(tuple(min(int(math.floor(d / h + 1e-9)), space.N) for h in space.h))
    return D, widths


def fractional_integral(f, gamma, rule="layer_cake", diagonal="half_cell"):
    """``I_gamma f(x) = sum_y f(y) mu(y) / mu(B(x, d(x, y)))**(1 - gamma)`` on atoms.

    Cells are grouped into spheres ``S_i(x)`` of equal distance to ``x``. With
    ``rule="layer_cake"`` (default) each sphere contributes
    ``F_i (M_i**gamma - M_{i-1}**gamma) / (gamma (M_i - M_{i-1}))`` where
    ``M_i`` is the closed-ball mass, i.e. the kernel integrated exactly over
    the sphere's share of the radial mass; the own cell gives
    ``f(x) mu(x)**gamma / gamma``. ``rule="direct"`` evaluates the kernel at
    the open ball ``B(x, d(x, y))`` and handles the own cell by ``diagonal``:
    ``"half_cell"`` (``f(x) mu(x)**gamma``) or ``"exclude"``.
    """
    if not 0 < gamma < 1:
        raise ValueError("fractional integral needs 0 < gamma < 1")
    if rule not in ("layer_cake", "direct") or diagonal not in ("half_cell", "exclude"):
        raise ValueError("unknown quadrature rule")
    sp = f.space
    fm = f.values * sp.measures
    mu = sp.measures
    if rule == "layer_cake":
        out = fm * mu ** (gamma - 1.0) / gamma
    elif diagonal == "half_cell":
        out = fm * mu ** (gamma - 1.0)
    else:
        out = np.zeros(sp.shape)
    _, widths = _shell_distances(sp)
    prev_mass, prev_sum = mu.copy(), fm.copy()
    for ks in widths[1:]:
        mass = centered_sum(mu, ks, sp.periodic)
        total = centered_sum(fm, ks, sp.periodic)
        ring = total - prev_sum
        dm = mass - prev_mass
        live = dm > 0
        if rule == "layer_cake":
            kern = np.where(live, (mass**gamma - prev_mass**gamma) / (gamma * np.where(live, dm, 1.0)), 0.0)
        else:
            kern = np.where(live, prev_mass ** (gamma - 1.0), 0.0)
        out = out + np.where(live, ring, 0.0) * kern
        prev_mass, prev_sum = mass, total
    return GridFunction(sp, out)


@dataclass
class DominationResult:
    C: float
    ratios: np.ndarray
    vacuous: bool


def domination_check(f, gamma, family, **integral_kw):
    """Worst ratio ``M_{1,1/gamma} f / I_gamma f`` over cells (``f >= 0``)."""
    if np.any(f.values < 0):
        raise ValueError("domination check needs a nonnegative function")
    M = fractional_maximal(f, 1.0, 1.0 / gamma, family).values
    I = fractional_integral(f, gamma, **integral_kw).values
    ok = I > 0
    if not np.any(ok):
        return DominationResult(0.0, np.empty(0), True)
    ratios = M[ok] / I[ok]
    return DominationResult(float(ratios.max()), ratios, False)
