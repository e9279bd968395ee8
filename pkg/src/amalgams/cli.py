"""Command-line interface: ``amalgams <command> --config c.json``.

Exit status is 0 when every acceptance rule passes, 1 when a check fails
and 2 for a malformed or hypothesis-violating config.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import harness
from .amalgam import AmalgamExponents, amalgam_norm, euclid_amalgam_norm
from .functions import from_generator, lp_norm, weak_quasinorm
from .geometry import build_dyadic, verify_dyadic
from .harness import ConfigError, ExperimentConfig
from .operators import fractional_integral, fractional_maximal
from .space import (BallFamily, SpaceError, check_normal, estimate_doubling,
                    estimate_reverse_doubling, space_from_spec)
from .weights import WeightSpec, check_Ainf, check_Ap


def _load_doc(path):
    text = Path(path).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, dict) or "space" not in doc:
        raise ConfigError("config needs a 'space' object", 1)
    return doc, text


def _space_and_family(args):
    doc, text = _load_doc(args.config)
    if args.refine:
        doc["space"]["N"] = int(doc["space"]["N"]) * 2
    try:
        sp = space_from_spec(doc["space"])
        r = doc.get("radii") or {"r0": 2 * min(sp.h), "tau": 2.0, "J": 6}
        fam = BallFamily.geometric(float(r["r0"]), float(r.get("tau", 2.0)), int(r.get("J", 6)))
    except (SpaceError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc), harness._line_of(text, "space")) from None
    return doc, sp, fam


def _functions(doc, sp, seed):
    """Sample functions of a config: explicit generators or the seeded random family."""
    if "theorem" in doc:
        cfg = ExperimentConfig.from_dict(doc)
        gens = harness.sample_generators(cfg, seed)
    else:
        gens = doc.get("functions", {}).get("generators", [{"kind": "constant", "value": 1.0}])
    return [from_generator(sp, g) for g in gens]


def _emit(args, payload):
    print(json.dumps(harness._jsonable(payload), indent=2))
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.json").write_text(json.dumps(harness._jsonable(payload), indent=2))


# -- commands -----------------------------------------------------------------------


def cmd_space_info(args):
    _, sp, fam = _space_and_family(args)
    dbl = estimate_doubling(sp, fam)
    rev = estimate_reverse_doubling(sp, fam)
    nr = check_normal(sp, fam.radii)
    _emit(args, {"n": sp.n, "N": sp.N, "kappa": sp.kappa, "rho_m": sp.rho_m, "boundary": sp.boundary,
                 "total_measure": sp.total_measure, "C_mu": dbl.C_mu, "D_mu": dbl.D_mu,
                 "C_tilde": rev.C_tilde, "delta_mu": rev.delta, "normal_a": nr.a, "normal_b": nr.b})
    return 0


def _exps(doc, keys=("q", "alpha", "p")):
    ex = doc.get("exponents", {})
    return AmalgamExponents(*(ex.get(k, d) for k, d in zip(keys, (1, 2, "inf"))))


def cmd_norm(args):
    doc, sp, fam = _space_and_family(args)
    exps = _exps(doc)
    rows = []
    for i, f in enumerate(_functions(doc, sp, args.seed)):
        row = {"id": i, "amalgam": amalgam_norm(f, exps, fam.radii), "lp_alpha": lp_norm(f, exps.alpha)}
        if sp.is_lebesgue:
            row["euclid"] = euclid_amalgam_norm(f, exps, fam.radii)
        rows.append(row)
    _emit(args, {"exponents": vars(exps), "rows": rows})
    return 0


def cmd_maximal(args):
    doc, sp, fam = _space_and_family(args)
    ex = doc.get("exponents", {})
    q, beta = ex.get("q", 1), ex.get("beta", "inf")
    rows = []
    for i, f in enumerate(_functions(doc, sp, args.seed)):
        m = fractional_maximal(f, q, beta, fam)
        rows.append({"id": i, "max": float(m.values.max()), "weak_s": weak_quasinorm(m, ex.get("s", q))})
    _emit(args, {"q": q, "beta": beta, "rows": rows})
    return 0


def cmd_integral(args):
    doc, sp, _ = _space_and_family(args)
    gamma = float(doc.get("exponents", {}).get("gamma", 0.5))
    rows = []
    for i, f in enumerate(_functions(doc, sp, args.seed)):
        v = fractional_integral(f, gamma).values
        rows.append({"id": i, "max": float(v.max()), "min": float(v.min())})
    _emit(args, {"gamma": gamma, "rows": rows})
    return 0


def cmd_check_weight(args):
    doc, sp, fam = _space_and_family(args)
    spec = WeightSpec.from_dict(doc.get("weights", {}).get("w"))
    w = spec.build(sp)
    ainf = check_Ainf(w, fam, refined=spec.build(sp.refine(2)))
    ap = {str(p): check_Ap(w, p, fam) for p in (1.5, 2.0, 4.0)}
    _emit(args, {"weight": spec.to_dict(), "A_p": ap, "A_inf": ainf.holds, "best_p": ainf.best_p,
                 "growth": {str(k): v for k, v in ainf.growth.items()},
                 "eps_delta": {str(k): v for k, v in ainf.eps_delta.items()},
                 "eps_delta_holds": ainf.eps_delta_holds})
    return 0 if ainf.holds == ainf.eps_delta_holds else 1


def cmd_dyadic_verify(args):
    _, sp, _ = _space_and_family(args)
    grid = build_dyadic(sp, args.method)
    rep = verify_dyadic(grid)
    _emit(args, {"method": grid.method, "rho": grid.rho, "levels": grid.levels,
                 "sets": [grid.count(k) for k in grid.levels], "inclusion_violations": rep.inclusion_violations,
                 "partition_violations": rep.partition_violations,
                 "nesting_violations": rep.nesting_violations, "ok": rep.ok})
    return 0 if rep.ok else 1


def _run_one(path, args, out_dir):
    cfg = ExperimentConfig.load(path)
    if args.seed is not None:
        cfg = cfg.with_overrides(seed=args.seed)
    if args.refine:
        rep = harness.estimate_constant(cfg, threads=args.threads)
    else:
        rep = harness.run_verifier(cfg, threads=args.threads)
    harness.write_report(rep, out_dir)
    return rep


def cmd_verify(args):
    cfg = ExperimentConfig.load(args.config)
    if cfg.theorem != args.theorem:
        raise ConfigError(f"config is for theorem {cfg.theorem}, not {args.theorem}",
                          harness._line_of(cfg.text, "theorem"))
    out = Path(args.out or harness.default_out_dir())
    rep = _run_one(args.config, args, out)
    print(f"theorem {rep.theorem}: constant {rep.constant:.6g}, violations {rep.violations}, "
          f"{'PASS' if rep.passed else 'FAIL'} -> {out}")
    return 0 if rep.passed else 1


def cmd_sweep(args):
    paths = [Path(p) for p in args.configs] or harness.shipped_configs()
    out = Path(args.out or harness.default_out_dir())
    ok = True
    for p in paths:
        rep = _run_one(p, args, out / p.stem)
        growth = (rep.trend or {}).get("growth", {})
        print(f"{p.stem}: theorem {rep.theorem} constant {rep.constant:.6g} growth "
              f"{', '.join(f'{k}={v:.4f}' for k, v in growth.items()) or '-'} "
              f"{'PASS' if rep.passed else 'FAIL'}")
        ok &= rep.passed
    return 0 if ok else 1


def build_parser():
    parser = argparse.ArgumentParser(prog="amalgams", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config=True):
        if config:
            p.add_argument("--config", required=True, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the function-family seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads for sample evaluation")
        p.add_argument("--refine", action="store_true", help="also run at 2N and report the growth factor")
        p.add_argument("--out", default=None, help="output directory (default $AMALGAMS_OUT or ./amalgams_out)")

    for name, fn in [("space-info", cmd_space_info), ("norm", cmd_norm), ("maximal", cmd_maximal),
                     ("integral", cmd_integral), ("check-weight", cmd_check_weight),
                     ("dyadic-verify", cmd_dyadic_verify)]:
        p = sub.add_parser(name)
        common(p)
        p.set_defaults(func=fn)
        if name == "dyadic-verify":
            p.add_argument("--method", choices=["auto", "cubes", "net"], default="auto")
    p = sub.add_parser("verify", help="run one theorem verifier")
    p.add_argument("theorem", choices=harness.THEOREMS)
    common(p)
    p.set_defaults(func=cmd_verify)
    p = sub.add_parser("sweep", help="run verifiers over configs (default: all shipped ones)")
    p.add_argument("configs", nargs="*")
    common(p, config=False)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        where = getattr(args, "config", None) or "config"
        line = exc.line if exc.line is not None else 1
        print(f"{where}:{line}: error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
