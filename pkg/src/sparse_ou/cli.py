"""Command line entry point: ``sparse-ou {simulate,estimate,bounds,fig1,fig2,check}``.

Exit status: 0 success, 1 domain failure (assumption (H) violated, infeasible
LP, singular Gram matrix, malformed data), 2 usage error (bad flags, missing or
unwritable paths, invalid configuration). Data goes to files and stdout;
diagnostics go to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from pathlib import Path as FsPath

import numpy as np

from . import __version__
from .bounds import ConeSpec, bounds_report, h0, restricted_eigenvalue_empirical
from .estimate import Method, estimate, lambda_plugin
from .exceptions import ParseError, SparseOUError
from .experiments import ExperimentConfig, run_fig1, run_fig2
from .io import (
    dump_json, read_model, read_stats_json, write_matrix_csv, write_model_json, write_path_csv,
    write_stats_json,
)
from .model import (
    ErgodicConstants, check_assumption_h, ergodic_constants, generate_sparse_stable,
    plugin_constants,
)
from .simulate import SimConfig, simulate_path, sufficient_stats

log = logging.getLogger("sparse_ou")

OUTPUT_ENV = "SPARSE_OU_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def _parse_set(items):
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        try:
            out[key.strip()] = json.loads(value)
        except json.JSONDecodeError:
            out[key.strip()] = value
    return out


def _load_config(path):
    if path is None:
        return {}
    p = FsPath(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    try:
        obj = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise UsageError(f"{p}:{exc.lineno}: invalid JSON in config ({exc.msg})") from None
    if not isinstance(obj, dict):
        raise UsageError(f"{p}: config must be a JSON object")
    return obj


def _out_dir(args):
    out = FsPath(args.out_dir or os.environ.get(OUTPUT_ENV) or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc.strerror}") from None
    if not os.access(out, os.W_OK):
        raise UsageError(f"output directory is not writable: {out}")
    return out


def _require_file(path, what):
    p = FsPath(path)
    if not p.is_file():
        raise UsageError(f"{what} not found: {p}")
    return p


def _common(p, seed=True):
    p.add_argument("--out-dir", help=f"output directory (default ${OUTPUT_ENV} or .)")
    if seed:
        p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("-v", "--verbose", action="count", default=0)
    p.add_argument("-q", "--quiet", action="store_true")


def build_parser():
    parser = _Parser(prog="sparse-ou", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="simulate a path and write sufficient statistics")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--model", help="model JSON or matrix CSV")
    src.add_argument("--d", type=int, help="generate a random sparse stable drift of this size")
    p.add_argument("--s", type=int, help="nonzeros of the generated drift (default round(0.3 d^2), at least d)")
    p.add_argument("--margin", type=float, help="Gershgorin margin of the generated drift (default 0.5)")
    p.add_argument("--model-seed", type=int, help="seed for the generated drift (default: --seed)")
    p.add_argument("--T", dest="t_horizon", type=float)
    p.add_argument("--n-steps", type=int)
    p.add_argument("--scheme", choices=["exact", "euler"])
    p.add_argument("--retain-brownian", action="store_true", default=None)
    p.add_argument("--write-path", action="store_true", help="also write path.csv")
    p.add_argument("--config", help="JSON file with any of the above as keys")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    _common(p)

    p = sub.add_parser("estimate", help="estimate the drift from sufficient statistics")
    p.add_argument("--stats", required=True, help="stats JSON written by 'simulate'")
    p.add_argument("--method", choices=[m.value for m in Method] + ["all"], default="lasso")
    lam = p.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", type=float, help="fixed tuning parameter")
    lam.add_argument("--lambda-mode", choices=["plugin"], help="plug-in lambda rule")
    p.add_argument("--eps0", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=20000)
    p.add_argument("--lp-tol", type=float, default=1e-9)
    _common(p, seed=False)

    p = sub.add_parser("bounds", help="print every theoretical constant with its formula")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--s", type=int, required=True, help="cone sparsity for T0 / T_mart")
    p.add_argument("--s0", type=int, help="true sparsity for oracle bounds (default: --s)")
    p.add_argument("--c0", type=float, default=3.0)
    p.add_argument("--eps0", type=float, default=0.1)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--T", dest="t_horizon", type=float, help="horizon for the lambda rule")
    p.add_argument("--lambda", dest="lam", type=float, help="lambda for the oracle bounds")
    p.add_argument("--h0-at", type=float, action="append", default=[], metavar="X")
    consts = p.add_mutually_exclusive_group(required=True)
    consts.add_argument("--unit-constants", action="store_true")
    consts.add_argument("--model", help="population constants of this drift")
    consts.add_argument("--stats", help="plug-in constants from C_hat (r0, p0 need --model)")
    p.add_argument("--re-samples", type=int, default=0,
                   help="with --stats: Monte-Carlo restricted-eigenvalue estimate")
    p.add_argument("--json", help="also write the report as JSON")
    _common(p)

    for name, helptext in (("fig1", "heatmap example at one dimension"),
                           ("fig2", "relative error against dimension")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--config", help="experiment config JSON")
        p.add_argument("--set", action="append", metavar="KEY=VALUE")
        if name == "fig1":
            p.add_argument("--d", type=int, default=None, help="dimension (default 15)")
        p.add_argument("--jobs", type=int, help="parallel replications")
        _common(p)

    p = sub.add_parser("check", help="certify assumption (H) and print ergodic constants")
    p.add_argument("model_path", nargs="?", help="model JSON or matrix CSV")
    p.add_argument("--model", dest="model_opt")
    _common(p, seed=False)
    return parser


def _fmt(v):
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def cmd_simulate(args):
    cfg = {"t_horizon": 300.0, "n_steps": 500_000, "scheme": "exact", "seed": 0,
           "retain_brownian": False, "margin": 0.5}
    cfg.update(_load_config(args.config))
    for key in ("t_horizon", "n_steps", "scheme", "seed", "retain_brownian", "margin", "d", "s",
                "model_seed", "model"):
        v = getattr(args, key, None)
        if v is not None:
            cfg[key] = v
    cfg.update(_parse_set(args.set))
    allowed = {"t_horizon", "n_steps", "scheme", "seed", "retain_brownian", "margin", "d", "s",
               "model_seed", "model"}
    unknown = sorted(set(cfg) - allowed)
    if unknown:
        raise UsageError(f"unknown simulate settings: {', '.join(unknown)}")
    out = _out_dir(args)
    if cfg.get("model"):
        model = read_model(_require_file(cfg["model"], "model file"))
    elif cfg.get("d"):
        d = int(cfg["d"])
        s = cfg.get("s") or max(d, int(math.floor(0.3 * d * d + 0.5)))
        model = generate_sparse_stable(d, s, cfg["margin"], cfg.get("model_seed", cfg["seed"]))
    else:
        raise UsageError("simulate needs --model or --d")
    try:
        sim = SimConfig(cfg["t_horizon"], cfg["n_steps"], cfg["scheme"], cfg["seed"],
                        bool(cfg["retain_brownian"]))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    log.info("simulating d=%d T=%g n=%d scheme=%s", model.d, sim.t_horizon, sim.n_steps,
             sim.scheme.value)
    path = simulate_path(model, sim)
    stats = sufficient_stats(path)
    stats.meta.update({"seed": sim.seed, "dt": sim.dt})
    write_model_json(out / "model.json", model)
    write_stats_json(out / "stats.json", stats)
    if args.write_path:
        write_path_csv(out / "path.csv", path)
    print(f"wrote {out / 'stats.json'}")
    return 0


def cmd_estimate(args):
    out = _out_dir(args)
    stats = read_stats_json(_require_file(args.stats, "stats file"))
    methods = [m.value for m in Method] if args.method == "all" else [args.method]
    if args.lambda_mode == "plugin":
        lam = lambda_plugin(stats, args.eps0)
        mode = f"plugin(eps0={args.eps0})"
    elif args.lam is not None:
        lam, mode = args.lam, "fixed"
    elif any(m != "mle" for m in methods):
        raise UsageError("--lambda or --lambda-mode is required for lasso/dantzig")
    else:
        lam, mode = 0.0, "none"
    for m in methods:
        kwargs = {}
        if m == "lasso":
            kwargs = {"tol": args.tol, "max_iter": args.max_iter}
        elif m == "dantzig":
            kwargs = {"lp_tol": args.lp_tol}
        res = estimate(stats, m, lam, **kwargs)
        res.meta["lambda_mode"] = mode
        suffix = "" if len(methods) == 1 else f"_{m}"
        write_matrix_csv(out / f"a_hat{suffix}.csv", res.a_hat)
        dump_json(res.to_dict(), out / f"estimate{suffix}.json")
        if not res.converged:
            log.warning("%s did not converge: %s", m, res.status)
        print(f"{m}: lambda={_fmt(res.lam)} objective={_fmt(res.objective)} "
              f"l1={_fmt(res.l1_norm)} status={res.status}")
    return 0


def cmd_bounds(args):
    if args.unit_constants:
        c, source = ErgodicConstants.unit(), "unit"
    elif args.model:
        model = read_model(_require_file(args.model, "model file"))
        c, source = ergodic_constants(model.a0), "population"
    else:
        stats = read_stats_json(_require_file(args.stats, "stats file"))
        c, source = plugin_constants(stats.c_hat), "plug-in"
        if args.t_horizon is None:
            args.t_horizon = stats.t_horizon
    s0 = args.s0 if args.s0 is not None else args.s
    try:
        rep = bounds_report(args.d, s0, args.eps0, c, t_horizon=args.t_horizon, lam=args.lam,
                            gamma=args.gamma, s=args.s, c0=args.c0)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = rep.rows()
    for x in args.h0_at:
        rows.append((f"H0({x:g})", "r0/(8 p0 K) x^2/(x+K)", h0(x, c)))
    if args.stats and args.re_samples > 0:
        re = restricted_eigenvalue_empirical(stats.c_hat, ConeSpec(args.s, args.c0),
                                             args.re_samples, args.seed or 0)
        rows.append(("RE_estimate", "min sampled tr(V C V^T)/|V|_2^2 over cone (estimate)", re))
    print(f"# constants: {source}  " + "  ".join(f"{k}={_fmt(v)}" for k, v in c.as_dict().items()))
    print(f"{'quantity':<28} {'value':>14}  formula")
    for label, formula, value in rows:
        print(f"{label:<28} {_fmt(value):>14}  {formula}")
    for flag in rep.flags:
        log.warning("%s", flag)
    if args.json:
        d = rep.to_dict()
        d["constants_source"] = source
        dump_json(d, args.json)
    return 0


def _experiment_config(args, **extra):
    cfg = {}
    cfg.update(_load_config(args.config))
    cfg.update(_parse_set(args.set))
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.jobs is not None:
        cfg["n_jobs"] = args.jobs
    cfg.update({k: v for k, v in extra.items() if v is not None})
    try:
        return ExperimentConfig.from_dict(cfg)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid experiment config: {exc}") from None


def cmd_fig1(args):
    d = args.d if args.d is not None else 15
    cfg = _experiment_config(args)
    out = _out_dir(args)
    bundle = run_fig1(d, cfg, out)
    for m, v in bundle["support"].items():
        print(f"{m}: precision={_fmt(v['precision'])} recall={_fmt(v['recall'])} f1={_fmt(v['f1'])}")
    print(f"lambda={_fmt(bundle['lambda'])} ({cfg.lambda_mode}); files in {out}")
    return 0


def cmd_fig2(args):
    cfg = _experiment_config(args)
    out = _out_dir(args)
    report = run_fig2(cfg, out)
    print("d,method,norm,mean,std")
    for r in report.summary:
        print(f"{r['d']},{r['method']},{r['norm']},{_fmt(r['mean'])},{_fmt(r['std'])}")
    if report.meta["failed_cells"]:
        log.warning("failed cells (d, rep): %s", report.meta["failed_cells"])
    return 0


def cmd_check(args):
    path = args.model_path or args.model_opt
    if not path:
        raise UsageError("check needs a model file")
    model = read_model(_require_file(path, "model file"))
    cert = check_assumption_h(model.a0)
    eig = ", ".join(f"{z.real:.6g}{z.imag:+.6g}j" if z.imag else f"{z.real:.6g}"
                    for z in cert.eigenvalues)
    print(f"d = {model.d}")
    print(f"s0 = {model.s0} (s0 >= d: {model.s0 >= model.d})")
    print(f"eigenvalues = [{eig}]")
    print(f"r0 = {cert.r0:.6g}")
    print(f"p0 = {cert.p0:.6g}")
    print(f"diagonalizable = {cert.diagonalizable} (eigenvector condition {cert.condition_estimate:.3g})")
    print(f"assumption (H) holds = {cert.holds}")
    if not cert.holds:
        return 1
    c = ergodic_constants(model.a0, cert)
    for k, v in c.as_dict().items():
        print(f"{k} = {v:.6g}")
    print("C_inf =")
    print(np.array2string(c.c_inf, precision=6))
    return 0


COMMANDS = {
    "simulate": cmd_simulate,
    "estimate": cmd_estimate,
    "bounds": cmd_bounds,
    "fig1": cmd_fig1,
    "fig2": cmd_fig2,
    "check": cmd_check,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    level = logging.WARNING if args.quiet else (logging.DEBUG if args.verbose > 1 else
                                                 logging.INFO if args.verbose else logging.WARNING)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s",
                        force=True)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ParseError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 1
    except SparseOUError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
