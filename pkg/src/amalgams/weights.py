"""Weights and the weight conditions: two-weight Sobolev-type sups, the Orlicz bump
condition, Muckenhoupt A_p and an A_infinity probe."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._exponents import conj, from_inv, inv, parse_exponent
from .functions import GridFunction, ball_lq_norms
from .orlicz import _ball_windows, ball_luxemburg_norms


# -- construction ---------------------------------------------------------------


@dataclass
class WeightSpec:
    """``{kind: unit|power|table, params, clip}`` as read from a config."""

    kind: str = "unit"
    params: dict = field(default_factory=dict)
    clip: float | None = None

    @classmethod
    def from_dict(cls, d):
        if d is None:
            return cls()
        kind = d.get("kind", "unit")
        if kind not in ("unit", "power", "table"):
            raise ValueError(f"unknown weight kind {kind!r}")
        return cls(kind, dict(d.get("params", {})), d.get("clip"))

    def build(self, space):
        if self.kind == "unit":
            return GridFunction(space, np.ones(space.shape))
        if self.kind == "power":
            return power_weight(space, self.params.get("x0", 0.0), self.params["lam"], self.clip)
        vals = np.asarray(self.params["values"], dtype=float)
        return _positive(GridFunction(space, vals))

    def to_dict(self):
        return {"kind": self.kind, "params": self.params, "clip": self.clip}


def _positive(w, name="weight"):
    if np.any(w.values <= 0):
        raise ValueError(f"{name} must be strictly positive on every cell")
    return w


def power_weight(space, x0, lam, clip=None):
    """``|x - x0|**lam`` (max-norm distance), clipped below at ``clip`` (default half a cell)."""
    clip = 0.5 * min(space.h) if clip is None else float(clip)
    if clip <= 0:
        raise ValueError("power weight clip must be positive")
    d = np.max(np.abs(space.centers - np.atleast_1d(x0)), axis=1)
    return GridFunction(space, np.maximum(d, clip) ** lam)


@dataclass
class WeightPair:
    w: GridFunction
    v: GridFunction
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        _positive(self.w, "w")
        _positive(self.v, "v")

    @classmethod
    def from_specs(cls, space, w_spec, v_spec):
        ws, vs = WeightSpec.from_dict(w_spec), WeightSpec.from_dict(v_spec)
        meta = {"w": ws.to_dict(), "v": vs.to_dict(), "default_clip": 0.5 * min(space.h)}
        return cls(ws.build(space), vs.build(space), meta)


# -- sup scans ------------------------------------------------------------------


@dataclass
class ConditionScan:
    sup: float
    radii: list
    per_radius: list  # sup over centers for each radius

    def __float__(self):
        return self.sup


def _scan(family, per_r):
    vals = [float(np.max(per_r(r))) for r in family.radii]
    return ConditionScan(max(vals), list(family.radii), vals)


def check_condition_AP(v, q, beta, family):
    """``sup_B mu(B)**(1/beta - 1) ||v chi_B||_t ||v**-1 chi_B||_{q'}`` with ``1/t = 1/q - 1/beta``."""
    q, beta = parse_exponent(q), parse_exponent(beta)
    if not 1 <= q < beta:
        raise ValueError(f"condition needs 1 <= q < beta, got q={q}, beta={beta}")
    _positive(v, "v")
    t = 1.0 / (inv(q) - inv(beta))
    sp = v.space
    vinv = GridFunction(sp, 1.0 / v.values)

    def per_r(r):
        mass = sp.ball_masses(r)
        return mass ** (inv(beta) - 1.0) * ball_lq_norms(v, t, r) * ball_lq_norms(vinv, conj(q), r)

    return _scan(family, per_r)


def check_condition_thmB(v, q, q1, beta, family):
    """``sup_B mu(B)**(1/beta - 1/q) ||v chi_B||_t ||v**-1 chi_B||_{1/(1/q - 1/q1)}``, ``1/t = 1/q1 - 1/beta``."""
    q, q1, beta = (parse_exponent(x) for x in (q, q1, beta))
    if not q <= q1:
        raise ValueError("condition needs q <= q1")
    if not inv(q1) - inv(beta) > 0:
        raise ValueError("condition needs 1/q1 - 1/beta > 0")
    _positive(v, "v")
    t = 1.0 / (inv(q1) - inv(beta))
    e = from_inv(inv(q) - inv(q1))
    sp = v.space
    vinv = GridFunction(sp, 1.0 / v.values)

    def per_r(r):
        mass = sp.ball_masses(r)
        return mass ** (inv(beta) - inv(q)) * ball_lq_norms(v, t, r) * ball_lq_norms(vinv, e, r)

    return _scan(family, per_r)


def check_condition_main(w, v, q, t, phi, family, method="auto"):
    """``sup_B mu(B)**(-1/t) ||w chi_B||_t ||v**-q||_{Phi,B}**(1/q)``."""
    q, t = parse_exponent(q), parse_exponent(t)
    _positive(w, "w")
    _positive(v, "v")
    sp = w.space
    vq = GridFunction(sp, v.values ** (-q))

    def per_r(r):
        mass = sp.ball_masses(r)
        return (mass ** (-inv(t)) * ball_lq_norms(w, t, r)
                * ball_luxemburg_norms(vq, phi, r, method) ** (1.0 / q))

    return _scan(family, per_r)


# -- A_p / A_infinity -----------------------------------------------------------


def check_Ap(w, p, family):
    """``sup_B (avg_B w) (avg_B w**(-1/(p-1)))**(p-1)``.

    ``p = inf`` takes the limit ``(avg_B w) exp(avg_B log(1/w))``.
    """
    p = parse_exponent(p)
    if not p > 1:
        raise ValueError("A_p needs p > 1")
    _positive(w)
    sp = w.space
    wm = w.values * sp.measures

    def per_r(r):
        mass = sp.ball_masses(r)
        avg_w = sp.ball_sums(wm, r) / mass
        if math.isinf(p):
            dual = np.exp(sp.ball_sums(-np.log(w.values) * sp.measures, r) / mass)
        else:
            dual = (sp.ball_sums(w.values ** (-1.0 / (p - 1.0)) * sp.measures, r) / mass) ** (p - 1.0)
        return avg_w * dual

    return _scan(family, per_r).sup


def eps_delta_table(w, family, deltas=(0.5, 0.25, 0.1)):
    """``max w(E)/w(B)`` over family balls and level-set subsets ``E`` of ``B`` with ``mu(E) <= delta mu(B)``.

    ``E`` is the largest set of top-valued cells of ``w`` inside ``B`` whose
    measure stays within ``delta mu(B)``.
    """
    sp = w.space
    out = {d: 0.0 for d in deltas}
    wv, mv = w.values.ravel(), sp.measures.ravel()
    for r in family.radii:
        idx, ok = _ball_windows(sp, r)
        step = max(1, 2_000_000 // idx.shape[1])
        for s in range(0, sp.size, step):
            vals = np.where(ok[s:s + step], wv[idx[s:s + step]], -np.inf)
            mu = np.where(ok[s:s + step], mv[idx[s:s + step]], 0.0)
            order = np.argsort(-vals, axis=1, kind="stable")
            vs = np.take_along_axis(vals, order, axis=1)
            ms = np.take_along_axis(mu, order, axis=1)
            wm = np.where(np.isfinite(vs), vs, 0.0) * ms
            cm, cw = np.cumsum(ms, axis=1), np.cumsum(wm, axis=1)
            mass, total = cm[:, -1], cw[:, -1]
            for d in deltas:
                fits = cm <= d * mass[:, None] * (1 + 1e-12)
                last = fits.sum(axis=1) - 1
                got = np.where(last >= 0, cw[np.arange(len(last)), np.maximum(last, 0)], 0.0)
                out[d] = max(out[d], float(np.max(got / total)))
    return out


@dataclass
class AinfResult:
    holds: bool
    best_p: float | None
    constant: float
    constants: dict
    growth: dict
    eps_delta: dict
    eps_delta_holds: bool


def check_Ainf(w, family, p_list=(1.5, 2.0, 4.0, 8.0), refined=None, growth_tol=1.10,
               eps_delta_limit=0.5):
    """A_infinity verdict from an A_p scan, plus the epsilon-delta probe.

    With ``refined`` (the same weight on a 2x refined grid) the verdict is
    "A_p constant stable under refinement for some tested ``p``"; without it
    every finite constant counts. The probe holds when the worst
    ``w(E)/w(B)`` at the smallest ``delta`` is at most ``eps_delta_limit``.
    """
    consts = {p: check_Ap(w, p, family) for p in p_list}
    growth = {}
    if refined is not None:
        for p in p_list:
            growth[p] = check_Ap(refined, p, family) / consts[p]
        good = [p for p in p_list if growth[p] <= growth_tol]
    else:
        good = [p for p in p_list if math.isfinite(consts[p])]
    best = min(good, key=lambda p: consts[p]) if good else None
    table = eps_delta_table(w, family)
    return AinfResult(
        holds=best is not None,
        best_p=best,
        constant=consts[best] if best is not None else math.inf,
        constants=consts,
        growth=growth,
        eps_delta=table,
        eps_delta_holds=table[min(table)] <= eps_delta_limit,
    )
