"""Command-line front end.

Subcommands: ``tune``, ``rate-sweep``, ``classify-sweep``, ``certify``.

Data (CSV or JSON) goes to ``--out`` or standard output; human-readable
reports go to standard error. Exit status: 0 success/PASS, 1 usage or
input error, 2 FAIL/inconclusive.
"""

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import experiments as ex
from .engine import EstimationError, SolverError
from .rate_theory import UNBOUNDED, DomainError

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_grid(text):
    """``"1,10,100"``, ``"log:1:1000:7"`` (log-spaced) or ``"lin:0.5:1.5:5"``."""
    text = text.strip()
    if not text:
        return []
    if text.startswith(("log:", "lin:")):
        kind, a, b, n = text.split(":")
        a, b, n = float(a), float(b), int(n)
        if n < 1 or (kind == "log" and (a <= 0 or b <= 0)):
            raise argparse.ArgumentTypeError(f"bad range {text!r}")
        vals = np.geomspace(a, b, n) if kind == "log" else np.linspace(a, b, n)
        return [float(v) for v in vals]
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None


def parse_int_list(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad integer list {text!r}") from None


def load_config(path):
    """Flat ``key = value`` file; ``#`` starts a comment. Keys mirror flags."""
    cfg = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            cfg[key.replace("-", "_")] = val.strip("\"'")
    return cfg


def _fmt(v):
    if v is None:
        return ""
    if v is UNBOUNDED:
        return "unbounded"
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _jsonable(v):
    if v is UNBOUNDED:
        return "unbounded"
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return None if math.isnan(v) else float(f"{v:.12g}")
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_records(rows, fields, out=None, fmt="csv"):
    """Write a list of dicts with a fixed column order."""
    if fmt == "json":
        text = json.dumps([{k: _jsonable(r[k]) for k in fields} for r in rows], indent=2) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(fields)
        for r in rows:
            w.writerow([_fmt(r[k]) for k in fields])
        text = buf.getvalue()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


def _report(msg=""):
    print(msg, file=sys.stderr)


# -- subcommands -----------------------------------------------------------

TUNE_FIELDS = ["m", "L", "sigma_max", "sigma_min", "kappa", "rho", "alpha",
               "inf_rate", "tau", "bound_constant", "t", "alpha_t", "tau_t", "bound_t"]


def cmd_tune(args):
    try:
        rec = ex.tune(args.m, args.L, args.sigma_max, args.sigma_min,
                      args.t, args.alpha_margin)
    except DomainError as e:
        raise UsageError(str(e)) from None
    _report(f"kappa = {rec['kappa']:.6g}")
    _report(f"rho*  = {rec['rho']:.6g}   (rho0 = 1)")
    _report(f"alpha = {rec['alpha']:.6g}   tau = {rec['tau']:.6g}   "
            f"inf rate = {rec['inf_rate']:.6g}")
    if rec["t"] is not None:
        line = f"t = {rec['t']}: best alpha = {rec['alpha_t']:.6g}"
        if rec["bound_t"] is not None:
            line += f"   tau = {rec['tau_t']:.6g}   bound = {_fmt(rec['bound_t'])}"
        else:
            line += "   (at the boundary alpha = 2; no certificate)"
        _report(line)
    write_records([rec], TUNE_FIELDS, args.out, args.format)
    return EXIT_OK


SWEEP_FIELDS = ["problem", "alpha", "rho0", "kappa", "tau_theory", "tau_empirical",
                "bound_constant"]


def cmd_rate_sweep(args):
    cfg = ex.SweepConfig(
        problem=args.problem, alphas=args.alpha, rho0s=args.rho0, kappas=args.kappa,
        iters=args.iters, seeds=args.seeds if args.seeds else [args.seed],
        simulate=args.simulate, p=args.p,
    )
    try:
        cfg.validate()
    except ValueError as e:
        raise UsageError(str(e)) from None
    rows = ex.rate_sweep(cfg, jobs=args.jobs)
    fields = SWEEP_FIELDS + (["wall_time"] if args.timing else [])
    write_records([vars(r) for r in rows], fields, args.out, args.format)
    if args.simulate:
        errs = [abs(r.tau_empirical - r.tau_theory) for r in rows]
        _report(f"{len(rows)} rows; max |empirical - theory| = {max(errs):.3e}")
    else:
        _report(f"{len(rows)} rows")
    return EXIT_OK


CLASSIFY_FIELDS = ["alpha", "tau", "log_tau", "iterations"]


def cmd_classify_sweep(args):
    if args.N < args.d:
        raise UsageError("need N >= d")
    if not args.alpha:
        raise UsageError("alpha grid is empty")
    try:
        rows, meta = ex.classify_sweep(
            N=args.N, d=args.d, sigma=args.sigma, lam=args.lam, rho=args.rho,
            alphas=args.alpha, iters=args.iters, seed=args.seed,
        )
    except DomainError as e:
        raise UsageError(str(e)) from None
    for k, v in meta.items():
        _report(f"# {k} = {_fmt(v)}")
    best = min(rows, key=lambda r: r["tau"])
    _report(f"# empirically best alpha = {_fmt(best['alpha'])} (tau = {best['tau']:.6g})")
    write_records(rows, CLASSIFY_FIELDS, args.out, args.format)
    return EXIT_OK


CERTIFY_FIELDS = ["status", "m", "L", "alpha", "rho0", "tau_theory", "tau_empirical",
                  "error", "iterations"]


def cmd_certify(args):
    try:
        res = ex.certify(args.m, args.L, args.alpha, args.rho0, args.iters)
    except DomainError as e:
        raise UsageError(f"{e}; the rate formula only holds for 0 < alpha < 2") from None
    rec = {k: getattr(res, k) for k in CERTIFY_FIELDS}
    _report(f"tau (formula) = {res.tau_theory:.9g}")
    _report(f"tau (fitted)  = {_fmt(res.tau_empirical) or 'n/a'}")
    _report(res.status)
    write_records([rec], CERTIFY_FIELDS, args.out, args.format)
    return EXIT_OK if res.status == "PASS" else EXIT_FAIL


# -- parser ----------------------------------------------------------------

def _common(p):
    p.add_argument("--out", default=None, help="output path (default: stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--config", default=None, help="flat key = value file")


def build_parser():
    parser = _Parser(prog="relaxadmm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser, required=True)

    p = sub.add_parser("tune", help="optimal (alpha, rho) from conditioning")
    p.add_argument("--m", type=float, required=True)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--sigma-max", type=float, default=1.0)
    p.add_argument("--sigma-min", type=float, default=1.0)
    p.add_argument("--t", type=int, default=None, help="iteration budget for finite-t alpha")
    p.add_argument("--alpha-margin", type=float, default=1e-2)
    _common(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("rate-sweep", help="rate vs kappa over (alpha, rho0) grids")
    p.add_argument("--problem", choices=ex.RATE_PROBLEMS, default="attainability")
    p.add_argument("--alpha", type=parse_grid, default="0.5,1.0,1.5,1.9")
    p.add_argument("--rho0", type=parse_grid, default="0.5,1,2")
    p.add_argument("--kappa", type=parse_grid, default="log:1:1000:7")
    p.add_argument("--iters", type=int, default=20_000)
    p.add_argument("--seeds", type=parse_int_list, default=None,
                   help="instance seeds for random-quadratic (default: --seed)")
    p.add_argument("--p", type=int, default=6, help="random-quadratic dimension")
    p.add_argument("--simulate", action="store_true")
    p.add_argument("--timing", action="store_true", help="add a wall_time column")
    p.add_argument("--jobs", type=int, default=1)
    _common(p)
    p.set_defaults(func=cmd_rate_sweep)

    p = sub.add_parser("classify-sweep", help="fitted rates on sparse logistic regression")
    p.add_argument("--N", type=int, default=400)
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--lambda", dest="lam", type=float, default=1.0)
    p.add_argument("--rho", type=float, default=None,
                   help="penalty (default: sqrt(m_est * L_est))")
    p.add_argument("--alpha", type=parse_grid, default="1.0,1.2,1.4,1.6,1.8")
    p.add_argument("--iters", type=int, default=5000)
    _common(p)
    p.set_defaults(func=cmd_classify_sweep)

    p = sub.add_parser("certify", help="check the rate formula on diag(m, L)")
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--L", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rho0", type=float, default=1.0)
    p.add_argument("--iters", type=int, default=300)
    _common(p)
    p.set_defaults(func=cmd_certify)
    return parser


_BOOL_TRUE = {"1", "true", "yes", "on"}


def parse_args(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    config = pre.parse_known_args(argv)[0].config
    subparsers = parser._subparsers._group_actions[0].choices
    command = next((a for a in argv if a in subparsers), None)
    if config and command:
        subparser = subparsers[command]
        known = {}
        for action in subparser._actions:
            known[action.dest] = action
            for opt in action.option_strings:
                known[opt.lstrip("-").replace("-", "_")] = action
        defaults = {}
        for key, val in load_config(config).items():
            action = known.get(key)
            if action is None or action.dest in ("config", "help"):
                raise UsageError(f"{config}: unknown key {key!r}")
            if isinstance(action, argparse._StoreTrueAction):
                val = val.lower() in _BOOL_TRUE
            action.required = False
            defaults[action.dest] = val
        subparser.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None):
    try:
        try:
            args = parse_args(argv)
        except SystemExit as e:  # argparse usage errors and --help
            return e.code if isinstance(e.code, int) else EXIT_USAGE
        return args.func(args)
    except UsageError as e:
        print(f"relaxadmm: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (EstimationError, SolverError) as e:
        print(f"relaxadmm: {e}", file=sys.stderr)
        return EXIT_FAIL
    except OSError as e:
        print(f"relaxadmm: I/O error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
