"""Config-driven verifiers for the weighted norm inequalities, constant estimation under
refinement, and report emission."""

from __future__ import annotations

import csv
import hashlib
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._exponents import from_inv, inv, parse_exponent
from .amalgam import AmalgamExponents, amalgam_norm, euclid_amalgam_norm
from .functions import GridFunction, from_generator, level_profile, lp_norm, weak_quasinorm, weak_sup
from .operators import fractional_integral, fractional_maximal
from .orlicz import YoungFunction, check_Bp, check_Bp_boundedness, check_doubling, conjugate
from .space import (BallFamily, SpaceError, check_normal, estimate_doubling, make_grid_space,
                    space_from_spec)
from .weights import (WeightSpec, check_Ainf, check_condition_AP, check_condition_main,
                      check_condition_thmB)

THEOREMS = ("1.1", "1.2", "1.3a", "1.5", "2.3", "2.4", "3.1", "3.2", "bp")
GROWTH_LIMIT = 1.10
TOL = 1e-12


class ConfigError(ValueError):
    """Malformed or hypothesis-violating config; ``line`` points into the JSON text."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


# -- config -------------------------------------------------------------------------


def _line_of(text, key):
    if not text:
        return None
    needle = f'"{key}"'
    for i, row in enumerate(text.splitlines(), start=1):
        if needle in row:
            return i
    return None


@dataclass
class ExperimentConfig:
    theorem: str
    space: dict
    functions: dict
    exponents: dict
    radii: dict
    weights: dict = field(default_factory=dict)
    young: dict | None = None
    theta_grid: dict = field(default_factory=lambda: {"mode": "exact"})
    control: dict = field(default_factory=dict)
    allow_hypothesis_violation: bool = False
    raw: dict = field(default_factory=dict, repr=False)
    text: str = field(default="", repr=False)
    path: str | None = None

    @classmethod
    def from_json(cls, text, path=None):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object", 1)
        return cls.from_dict(doc, text, path)

    @classmethod
    def load(cls, path):
        return cls.from_json(Path(path).read_text(), str(path))

    @classmethod
    def from_dict(cls, doc, text="", path=None):
        def need(key):
            if key not in doc:
                raise ConfigError(f"missing required key {key!r}", 1)
            return doc[key]

        theorem = str(need("theorem"))
        if theorem not in THEOREMS:
            raise ConfigError(f"unknown theorem id {theorem!r}; expected one of {', '.join(THEOREMS)}",
                              _line_of(text, "theorem"))
        cfg = cls(
            theorem=theorem,
            space=need("space"),
            functions=doc.get("functions", {}),
            exponents=doc.get("exponents", {}),
            radii=doc.get("radii", {}),
            weights=doc.get("weights", {}),
            young=doc.get("young"),
            theta_grid=doc.get("theta_grid", {"mode": "exact"}),
            control=doc.get("control", {}),
            allow_hypothesis_violation=bool(doc.get("allow_hypothesis_violation", False)),
            raw=doc,
            text=text or json.dumps(doc, indent=1),
            path=path,
        )
        cfg.validate()
        return cfg

    def fail(self, message, key):
        raise ConfigError(message, _line_of(self.text, key))

    @property
    def config_hash(self):
        return hashlib.sha256(json.dumps(self.raw, sort_keys=True).encode()).hexdigest()[:16]

    def with_overrides(self, N=None, seed=None):
        doc = json.loads(json.dumps(self.raw))
        if N is not None:
            doc["space"]["N"] = int(N)
        if seed is not None:
            doc.setdefault("functions", {})["seed"] = int(seed)
        return ExperimentConfig.from_dict(doc, json.dumps(doc, indent=1), self.path)

    # -- validation ---------------------------------------------------------

    def validate(self):
        try:
            self.build_space()
        except (SpaceError, TypeError, ValueError) as exc:
            self.fail(f"bad space spec: {exc}", "space")
        if self.theorem in ("1.1", "1.2", "1.3a"):
            sp = self.build_space()
            if not sp.is_lebesgue or sp.rho_m != 1.0:
                self.fail("Euclidean theorems run on a Lebesgue space with rho_m = 1", "space")
        self.derived = validate_exponents(self)
        try:
            self.family()
        except (SpaceError, KeyError, TypeError, ValueError) as exc:
            self.fail(f"bad radii spec: {exc}", "radii")
        for key in ("w", "v"):
            try:
                WeightSpec.from_dict(self.weights.get(key))
            except ValueError as exc:
                self.fail(str(exc), "weights")
        if self.young is not None:
            try:
                self.phi()
            except (KeyError, TypeError, ValueError) as exc:
                self.fail(f"bad Young function spec: {exc}", "young")
        mode = self.theta_grid.get("mode", "exact")
        if mode not in ("exact", "grid"):
            self.fail(f"theta_grid mode must be 'exact' or 'grid', got {mode!r}", "theta_grid")

    # -- builders -----------------------------------------------------------

    def build_space(self):
        return space_from_spec(self.space)

    def family(self):
        """Radii grid: ``{r0, tau, J}`` or ``{r0, per_step, J, closed: true}`` (closed under 2 kappa)."""
        r = self.radii
        if not r:
            raise KeyError("radii")
        if r.get("closed"):
            kappa = 2.0 ** (float(self.space.get("rho_m", 1.0)) - 1.0)
            return BallFamily.closed(float(r["r0"]), kappa, int(r["per_step"]), int(r["J"]))
        if "values" in r:
            return BallFamily(tuple(float(x) for x in r["values"]))
        return BallFamily.geometric(float(r["r0"]), float(r["tau"]), int(r["J"]))

    def phi(self):
        return YoungFunction.from_spec(self.young)

    def weight(self, key, space):
        return WeightSpec.from_dict(self.weights.get(key)).build(space)


def _e(d, key, default=None):
    if key not in d:
        if default is None:
            raise KeyError(key)
        return default
    return parse_exponent(d[key])


def validate_exponents(cfg):
    """Check the exponent hypotheses of ``cfg.theorem``; returns derived exponents."""
    th, ex = cfg.theorem, cfg.exponents

    def get(key):
        try:
            return _e(ex, key)
        except KeyError:
            cfg.fail(f"theorem {th} needs exponent {key!r}", "exponents")
        except (TypeError, ValueError) as exc:
            cfg.fail(f"bad exponent {key!r}: {exc}", key)

    def rule(ok, message, key):
        if not ok:
            cfg.fail(f"theorem {th}: {message}", key)

    def le(a, b):
        return a <= b + TOL * max(1.0, abs(b)) if math.isfinite(b) else True

    out = {}
    if th == "1.1":
        q, beta = get("q"), get("beta")
        rule(1 <= q < beta, "needs 1 <= q < beta <= inf", "q")
        out["t"] = from_inv(inv(q) - inv(beta))
    elif th in ("1.2", "2.3", "3.2"):
        q, a, p = get("q"), get("alpha"), get("p")
        q1, a1, p1 = get("q1"), get("alpha1"), get("p1")
        if th == "3.2":
            g = get("gamma")
            rule(0 < g < 1, "needs 0 < gamma < 1", "gamma")
            sinv, tinv = inv(a) - g, inv(q1) - g
        else:
            beta = get("beta")
            sinv, tinv = inv(a) - inv(beta), inv(q1) - inv(beta)
        rule(1 <= q <= a <= p, "needs 1 <= q <= alpha <= p", "alpha")
        rule(sinv > 0, "needs 1/s = 1/alpha - 1/beta > 0", "alpha")
        if th == "1.2":
            rule(q <= q1 <= a1 <= p1, "needs q <= q1 <= alpha1 <= p1", "q1")
        else:
            rule(q < q1, "needs q < q1", "q1")
            rule(q1 <= a1 <= p1 < math.inf, "needs q1 <= alpha1 <= p1 < inf", "alpha1")
        rule(tinv > 0, "needs 1/t = 1/q1 - 1/beta > 0", "q1")
        rule(le(tinv, inv(p1)), "needs 1/t <= 1/p1", "p1")
        out.update(s=from_inv(sinv), t=from_inv(tinv))
        out["e"] = out["s"] * (inv(q1) - inv(a1))
    elif th == "1.3a":
        q, a, beta, p = get("q"), get("alpha"), get("beta"), get("p")
        rule(1 <= q <= a <= beta, "needs 1 <= q <= alpha <= beta", "alpha")
        rule(a <= p, "needs alpha <= p", "p")
        rule(le(inv(q) - inv(beta), inv(p)), "needs 1/q - 1/beta <= 1/p", "p")
        out["s"] = from_inv(inv(a) - inv(beta))
    elif th == "1.5":
        q, a, beta, p = get("q"), get("alpha"), get("beta"), get("p")
        rule(1 <= q <= a <= p, "needs 1 <= q <= alpha <= p", "alpha")
        sinv = inv(a) - inv(beta)
        rule(sinv > 0, "needs 0 < 1/s = 1/alpha - 1/beta", "beta")
        rule(le(sinv, inv(q) - inv(beta)), "needs 1/s <= 1/q - 1/beta", "q")
        rule(le(inv(q) - inv(beta), inv(p)), "needs 1/q - 1/beta <= 1/p", "p")
        out["s"] = from_inv(sinv)
    elif th == "2.4":
        q, a, beta, u, v = get("q"), get("alpha"), get("beta"), get("u"), get("v")
        rule(1 <= q <= a, "needs 1 <= q <= alpha", "alpha")
        sinv = inv(a) - inv(beta)
        rule(sinv >= 0, "needs 1/s = 1/alpha - 1/beta >= 0", "beta")
        s = from_inv(sinv)
        rule(1 <= u <= s <= v, "needs 1 <= u <= s <= v", "u")
        out["s"] = s
        if not cfg.radii.get("closed"):
            cfg.fail("theorem 2.4 needs a radii grid closed under division by 2 kappa", "radii")
    elif th == "3.1":
        g, q = get("gamma"), get("q")
        rule(0 < g < 1, "needs 0 < gamma < 1", "gamma")
        rule(0 < q < math.inf, "needs 0 < q < inf", "q")
    elif th == "bp":
        p = get("p")
        rule(1 < p < math.inf, "needs 1 < p < inf", "p")
    return out


# -- function families --------------------------------------------------------------


def sample_generators(cfg, seed=None):
    """Seeded generator specs in box coordinates, so they describe the same functions at every N."""
    fs = cfg.functions
    if "generators" in fs:
        return list(fs["generators"])
    count = int(fs.get("count", 8))
    if count <= 0:
        cfg.fail("function family is empty", "functions")
    kinds = fs.get("kinds", ["box", "piecewise", "spike"])
    rng = np.random.default_rng(fs.get("seed", 0) if seed is None else seed)
    sp = cfg.build_space()
    lo, hi = np.asarray(sp.lo), np.asarray(sp.hi)
    ext = hi - lo
    c_lo, c_hi = fs.get("spike_c", [0.2, 0.8])
    clip = float(fs.get("spike_clip", 0.01 * float(ext.min())))
    out = []
    for i in range(count):
        kind = kinds[i % len(kinds)]
        center = lo + ext * rng.uniform(0.2, 0.8, size=sp.n)
        if kind == "box":
            half = ext * rng.uniform(0.03, 0.25, size=sp.n)
            out.append({"kind": "indicator_box", "lo": (center - half).tolist(),
                        "hi": (center + half).tolist(), "value": float(rng.uniform(0.5, 2.0))})
        elif kind == "piecewise":
            out.append({"kind": "random_piecewise", "pieces": int(rng.choice([4, 8])),
                        "seed": int(rng.integers(2**31)), "low": 0.0, "high": 1.0})
        elif kind == "spike":
            out.append({"kind": "power_spike", "x0": center.tolist(), "c": float(rng.uniform(c_lo, c_hi)),
                        "clip": clip, "cutoff": float(ext.min() * rng.uniform(0.1, 0.4))})
        else:
            cfg.fail(f"unknown function kind {kind!r}", "kinds")
    return out


# -- reports ------------------------------------------------------------------------


@dataclass
class Report:
    theorem: str
    config_hash: str
    seed: int
    N: int
    rows: list = field(default_factory=list)  # {id, part, lhs, rhs, ratio}
    constants: dict = field(default_factory=dict)
    violations: int = 0
    bound: float | None = None
    preconditions: dict = field(default_factory=dict)
    trend: dict | None = None
    passed: bool = False
    notes: list = field(default_factory=list)

    def finalize(self):
        self.constants = {}
        self.violations = 0
        for row in self.rows:
            r = row["ratio"]
            self.constants[row["part"]] = max(self.constants.get(row["part"], 0.0), r)
            if not math.isfinite(r):
                self.violations += 1
            elif self.bound is not None and r > self.bound * (1 + 1e-9):
                self.violations += 1
        ok = self.violations == 0
        if self.trend is not None:
            if self.theorem == "bp" and self.trend.get("expect") == "unbounded":
                ok = ok and all(g > self.trend["threshold"] for g in self.trend["growth"].values())
            else:
                ok = ok and all(g <= GROWTH_LIMIT for g in self.trend["growth"].values())
        self.passed = bool(ok)
        return self

    @property
    def constant(self):
        return max(self.constants.values()) if self.constants else 0.0

    def to_dict(self):
        d = asdict(self)
        d["constant"] = self.constant
        return _jsonable(d)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else ("inf" if x > 0 else "-inf" if x < 0 else "nan")
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _row(sample, part, lhs, rhs):
    lhs, rhs = float(lhs), float(rhs)
    if rhs > 0:
        ratio = lhs / rhs
    else:
        ratio = 0.0 if lhs == 0 else math.inf
    return {"id": sample, "part": part, "lhs": lhs, "rhs": rhs, "ratio": ratio}


def _level_sup(values, measure, a, b, grid):
    """``sup_theta theta**a * measure{|values| > theta}**b``: exact, or over a geometric grid."""
    if grid.get("mode", "exact") == "exact":
        return weak_sup(values, measure, a, b)
    levels, W = level_profile(values, measure)
    if levels.size == 0:
        return 0.0
    top = levels[0]
    thetas = np.geomspace(float(grid.get("low", 0.01)) * top, top, int(grid.get("points", 64)))
    asc, Wasc = levels[::-1], W[::-1]
    # measure{|v| > theta} is W at the smallest level strictly above theta
    k = np.searchsorted(asc, thetas, side="right")
    dist = np.where(k < asc.size, Wasc[np.minimum(k, asc.size - 1)], 0.0)
    return float(np.max(thetas**a * dist**b))


# -- verifier context ---------------------------------------------------------------


@dataclass
class _Context:
    cfg: ExperimentConfig
    space: object
    family: BallFamily
    pre: dict
    extra: dict


def _hyp(cfg, ok, message, key):
    if not ok and not cfg.allow_hypothesis_violation:
        cfg.fail(message, key)


def _orlicz_hypotheses(cfg, pre, q, q1):
    if cfg.young is None:
        cfg.fail(f"theorem {cfg.theorem} needs a Young function", "young")
    phi = cfg.phi()
    doubling, ratio = check_doubling(phi)
    star = conjugate(phi)
    bp = check_Bp(star, q1 / q)
    pre.update(phi=phi.describe(), phi_doubling=doubling, phi_doubling_ratio=ratio,
               phi_star=star.describe(), phi_star_Bp=bp.holds, phi_star_Bp_tail=bp.tail)
    _hyp(cfg, doubling, "Young function is not doubling", "young")
    _hyp(cfg, bp.holds, f"conjugate Young function fails the B_{q1 / q:g} condition", "young")
    return phi


def prepare(cfg, space=None):
    sp = cfg.build_space() if space is None else space
    fam = cfg.family()
    ex, der = cfg.exponents, cfg.derived
    pre, extra = {}, {}
    th = cfg.theorem
    if th in ("1.1", "1.2", "1.3a"):
        extra["cubes"] = BallFamily(tuple(0.5 * r for r in fam.radii))
        extra["sides"] = list(fam.radii)
    if th in ("1.1", "1.2"):
        v = cfg.weight("v", sp)
        extra["v"] = v
        if th == "1.1":
            scan = check_condition_AP(v, _e(ex, "q"), _e(ex, "beta"), extra["cubes"])
        else:
            scan = check_condition_thmB(v, _e(ex, "q"), _e(ex, "q1"), _e(ex, "beta"), extra["cubes"])
        pre["weight_condition"] = scan.sup
        _hyp(cfg, math.isfinite(scan.sup), "weight condition is infinite", "weights")
    if th in ("1.5", "2.3", "3.2"):
        nr = check_normal(sp, fam.radii)
        pre.update(normal_a=nr.a, normal_b=nr.b, normal_ratio=nr.ratio)
    if th in ("2.3", "3.2"):
        q, q1 = _e(ex, "q"), _e(ex, "q1")
        phi = _orlicz_hypotheses(cfg, pre, q, q1)
        w, v = cfg.weight("w", sp), cfg.weight("v", sp)
        extra.update(w=w, v=v)
        scan = check_condition_main(w, v, q, der["t"], phi, fam)
        pre["condition_main"] = scan.sup
        _hyp(cfg, math.isfinite(scan.sup), "two-weight Orlicz condition is infinite", "weights")
    if th in ("3.1", "3.2"):
        w = cfg.weight("w", sp)
        fine = cfg.weight("w", sp.refine(2))
        power = der["t"] if th == "3.2" else 1.0
        wt = GridFunction(sp, w.values**power)
        ainf = check_Ainf(wt, fam, refined=GridFunction(fine.space, fine.values**power))
        pre.update(ainf=ainf.holds, ainf_best_p=ainf.best_p, ainf_constant=ainf.constant,
                   eps_delta={str(k): v for k, v in ainf.eps_delta.items()},
                   eps_delta_holds=ainf.eps_delta_holds)
        _hyp(cfg, ainf.holds, "weight is not in A_infinity", "weights")
        extra["w"] = w
    if th == "2.4":
        dbl = estimate_doubling(sp, fam)
        C_pair = _proof_pair_constant(sp, fam)
        pre.update(C_mu=dbl.C_mu, D_mu=dbl.D_mu, C_pair=C_pair)
        q, beta = _e(ex, "q"), _e(ex, "beta")
        extra["C"] = max(dbl.C_mu, C_pair)
        extra["small_radii"] = sorted({fam.radii[j] for i in range(len(fam.radii))
                                       if (j := fam.companion_index(i)) is not None})
        if not extra["small_radii"]:
            cfg.fail("radii grid has no pair r, r/(2 kappa)", "radii")
        pre["bound"] = extra["C"] ** (inv(q) - inv(beta))
    return _Context(cfg, sp, fam, pre, extra)


def _proof_pair_constant(space, family):
    """``max mu(B(x, r)) / mu(B(y, r/(2 kappa)))`` over ``x`` in ``B(y, r/(2 kappa))``, family pairs."""
    from ._windows import centered_max

    worst = 1.0
    for i, r in enumerate(family.radii):
        j = family.companion_index(i)
        if j is None:
            continue
        r1 = family.radii[j]
        big = centered_max(space.ball_masses(r), space.halfwidths(r1), space.periodic)
        worst = max(worst, float(np.max(big / space.ball_masses(r1))))
    return worst


# -- per-sample evaluation -------------------------------------------------------------


def _rows_for(ctx, sid, f):
    cfg, sp, fam, ex, der = ctx.cfg, ctx.space, ctx.family, cfg_exps(ctx.cfg), ctx.cfg.derived
    th, grid = cfg.theorem, cfg.theta_grid
    mu = sp.measures
    if th == "1.1":
        v, t = ctx.extra["v"], der["t"]
        m = fractional_maximal(f, 1.0, ex["beta"], ctx.extra["cubes"]).values
        lhs = _level_sup(m, v.values**t * mu, 1.0, 1.0 / t, grid)
        return [_row(sid, "weak", lhs, lp_norm(f * v, ex["q"]))]
    if th == "1.2":
        v, t, e = ctx.extra["v"], der["t"], der["e"]
        m = fractional_maximal(f, 1.0, ex["beta"], ctx.extra["cubes"]).values
        lhs = _level_sup(m, v.values**t * mu, 1.0 + e, 1.0 / t, grid)
        A = euclid_amalgam_norm(f * v, AmalgamExponents(ex["q1"], ex["alpha1"], ex["p1"]), ctx.extra["sides"])
        B = euclid_amalgam_norm(f, AmalgamExponents(ex["q"], ex["alpha"], math.inf), ctx.extra["sides"])
        return [_row(sid, "weak", lhs, A * B**e)]
    if th == "1.3a":
        m = fractional_maximal(f, ex["q"], ex["beta"], ctx.extra["cubes"])
        rhs = euclid_amalgam_norm(f, AmalgamExponents(ex["q"], ex["alpha"], ex["p"]), ctx.extra["sides"])
        return [_row(sid, "weak", weak_quasinorm(m, der["s"]), rhs)]
    if th == "1.5":
        m = fractional_maximal(f, ex["q"], ex["beta"], fam)
        rhs = amalgam_norm(f, AmalgamExponents(ex["q"], ex["alpha"], ex["p"]), fam.radii)
        return [_row(sid, "weak", weak_quasinorm(m, der["s"]), rhs)]
    if th in ("2.3", "3.2"):
        w, v, t, e = ctx.extra["w"], ctx.extra["v"], der["t"], der["e"]
        if th == "2.3":
            level = fractional_maximal(f, ex["q"], ex["beta"], fam).values
        else:
            level = np.abs(fractional_integral(f, ex["gamma"]).values)
        wt = w.values**t * mu
        A = amalgam_norm(f * v, AmalgamExponents(ex["q1"], ex["alpha1"], ex["p1"]), fam.radii)
        B = amalgam_norm(f, AmalgamExponents(ex["q"], ex["alpha"], ex["p"]), fam.radii)
        rows = [_row(sid, "amalgam", _level_sup(level, wt, 1.0 + e, 1.0 / t, grid), A * B**e)]
        if th == "2.3":
            rows.append(_row(sid, "lebesgue", _level_sup(level, wt, 1.0, 1.0 / t, grid),
                             lp_norm(f * v, ex["q1"])))
        return rows
    if th == "2.4":
        m = fractional_maximal(f, ex["q"], ex["beta"], fam)
        lhs = amalgam_norm(f, AmalgamExponents(ex["q"], ex["alpha"], ex["v"]), ctx.extra["small_radii"])
        rhs = amalgam_norm(m, AmalgamExponents(ex["u"], der["s"], ex["v"]), fam.radii)
        return [_row(sid, "reverse", lhs, rhs)]
    if th == "3.1":
        g, q = ex["gamma"], ex["q"]
        wm = ctx.extra["w"].values * mu
        I = fractional_integral(f, g).values
        M = fractional_maximal(f, 1.0, 1.0 / g, fam).values
        return [_row(sid, "good_lambda", _level_sup(I, wm, q, 1.0, grid), _level_sup(M, wm, q, 1.0, grid))]
    raise ConfigError(f"no sample evaluator for theorem {th}")


def cfg_exps(cfg):
    return {k: parse_exponent(v) for k, v in cfg.exponents.items()}


# -- running ---------------------------------------------------------------------------


def run_verifier(cfg, threads=1, seed=None):
    """Evaluate every sample function of ``cfg``; rows are ordered by sample index."""
    if cfg.theorem == "bp":
        return run_bp_control(cfg)
    seed = cfg.functions.get("seed", 0) if seed is None else seed
    ctx = prepare(cfg)
    gens = sample_generators(cfg, seed)
    sp = ctx.space

    def one(i):
        return _rows_for(ctx, i, from_generator(sp, gens[i]))

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(one, range(len(gens))))
    else:
        chunks = [one(i) for i in range(len(gens))]
    rep = Report(cfg.theorem, cfg.config_hash, int(seed), sp.N,
                 rows=[r for c in chunks for r in c], preconditions=ctx.pre)
    if cfg.theorem == "2.4":
        rep.bound = ctx.pre["bound"]
    return rep.finalize()


def estimate_constant(cfg, factor=2, threads=1, seed=None):
    """Run at ``N`` and ``factor * N`` with identical seeds; attach the growth trend."""
    if cfg.theorem == "bp":
        return run_bp_control(cfg)
    base = run_verifier(cfg, threads, seed)
    fine_cfg = cfg.with_overrides(N=cfg.space["N"] * factor)
    fine = run_verifier(fine_cfg, threads, seed)
    growth = {}
    for part, c in base.constants.items():
        c2 = fine.constants.get(part, 0.0)
        growth[part] = 1.0 if c == c2 == 0 else (c2 / c if c > 0 else math.inf)
    base.trend = {"N": [base.N, fine.N],
                  "constants": {p: [base.constants[p], fine.constants.get(p, 0.0)] for p in base.constants},
                  "growth": growth}
    return base.finalize()


def run_bp_control(cfg):
    """Operator-norm ratio ``||M_Phi f||_p**p / ||f||_p**p`` along a sharpening spike sequence."""
    ctl = cfg.control
    sp = cfg.build_space()
    fam = cfg.family()
    p = _e(cfg.exponents, "p")
    phi = YoungFunction.from_spec(ctl["phi"])
    bp = check_Bp(phi, p)
    c = float(ctl.get("spike_c", 0.5))
    x0 = ctl.get("x0", [0.5 * (a + b) for a, b in zip(sp.lo, sp.hi)])
    clips = [float(x) for x in ctl["clips"]]
    rep = Report("bp", cfg.config_hash, 0, sp.N,
                 preconditions={"phi": phi.describe(), "Bp": bp.holds, "Bp_tail": bp.tail})
    for i, clip in enumerate(clips):
        f = from_generator(sp, {"kind": "power_spike", "x0": x0, "c": c, "clip": clip})
        lhs = check_Bp_boundedness(phi, p, [f], fam)
        rep.rows.append(_row(f"clip={clip:g}", "bp", lhs, 1.0))
    ratios = [r["ratio"] for r in rep.rows]
    expect = ctl.get("expect", "unbounded" if not bp.holds else "bounded")
    rep.trend = {"clips": clips, "ratios": ratios, "growth": {"bp": ratios[-1] / ratios[0]},
                 "expect": expect, "threshold": float(ctl.get("threshold", 1.5))}
    return rep.finalize()


def write_report(report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report.to_dict(), indent=2))
    with open(out / "ratios.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["sample_id", "part", "lhs", "rhs", "ratio"])
        for r in report.rows:
            wr.writerow([r["id"], r["part"], repr(r["lhs"]), repr(r["rhs"]), repr(r["ratio"])])
    with open(out / "trend.csv", "w", newline="") as fh:
        wr = csv.writer(fh)
        wr.writerow(["part", "level", "value"])
        t = report.trend or {}
        if "constants" in t:
            for part, vals in t["constants"].items():
                for N, v in zip(t["N"], vals):
                    wr.writerow([part, N, repr(v)])
        elif "ratios" in t:
            for clip, v in zip(t["clips"], t["ratios"]):
                wr.writerow(["bp", clip, repr(v)])
    return out


def default_out_dir():
    return os.environ.get("AMALGAMS_OUT", "amalgams_out")


def shipped_configs():
    """Paths of the configs shipped with the package."""
    here = Path(__file__).parent / "configs"
    return sorted(here.glob("*.json"))
