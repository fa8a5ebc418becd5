"""Command-line front end.

Subcommands
-----------
families   list built-in bound families and their parameters
eval       print one bound's samples (t, beta, psi, alpha, phi) on a grid
generate   build (beta, psi) from a coefficient preset or table; emit CSV
check      audit a hypothesis suite; emit a report (exit 3 on failure)
verify     sweep the bound inequality on model data (exit 2 on violations)
compare    tabulate several bounds side by side; emit CSV
crossover  bisect where one bound's psi overtakes another's
solve      run the radial heat march and persist it as CSV
selftest   run the acceptance suite and optionally write a JSON report

Exit codes: 0 success, 1 usage or configuration error, 2 failed
verification, 3 failed condition suite.

Any compute subcommand accepts ``--scenario FILE`` (strict JSON with a
``version`` field: unknown keys are errors, so typos in mathematical
parameters cannot silently fall back to defaults).  Command-line flags
override scenario values.  Outputs are written atomically and floats use
shortest round-trip formatting, so identical inputs give byte-identical
files.  ``GRADEST_THREADS`` caps grid-sweep parallelism.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import acceptance
from .conditions import check_suite
from .coefficients import beta_from_b, coefficient_preset, psi_from_b, bound_from_b
from .context import EstimateContext
from .errors import GradestError, InvalidParameterError
from .families import GradientBound, canonical_family, family_catalog, make_family
from .manifolds import (RadialSolverConfig, euclidean_gaussian, hyperbolic3_kernel,
                        load_solution_csv, radial_heat_solve, save_solution_csv)
from .reporting import atomic_write_text, fmt, write_csv, write_json
from .timefunc import TimeFunction, table_function
from .verifier import compare_bounds, find_crossover, verify_bound

SCENARIO_VERSION = 1


# ---------------------------------------------------------------------------
# scenario handling

def _load_scenario(path, parser_dests: set[str]) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise InvalidParameterError("scenario file must hold a JSON object")
    version = raw.pop("version", None)
    if version != SCENARIO_VERSION:
        raise InvalidParameterError(
            f"scenario version must be {SCENARIO_VERSION}, got {version!r}")
    unknown = set(raw) - parser_dests
    if unknown:
        raise InvalidParameterError(
            f"unknown scenario keys {sorted(unknown)}; allowed: {sorted(parser_dests)}")
    return raw


def _merge_scenario(args: argparse.Namespace, argv: list[str], spec_dests: set[str]) -> None:
    if not getattr(args, "scenario", None):
        return
    values = _load_scenario(args.scenario, spec_dests)
    given = {a.lstrip("-").replace("-", "_").split("=")[0] for a in argv if a.startswith("--")}
    for key, val in values.items():
        if key not in given:
            setattr(args, key, val)


# ---------------------------------------------------------------------------
# shared argument groups

def _add_ctx(p):
    p.add_argument("--n", type=int, default=None, help="dimension (>= 2)")
    p.add_argument("--k", type=float, default=None, help="Ricci lower-bound constant (>= 0)")
    p.add_argument("--T", type=float, default=None, help="time horizon (> 0)")


def _add_family(p):
    p.add_argument("--family", default=None,
                   help="family id, optionally with colon-joined parameters (e.g. lyd:0.5)")
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--gamma", type=float, default=None)


def _add_tgrid(p):
    p.add_argument("--t-min", type=float, default=None)
    p.add_argument("--t-max", type=float, default=None)
    p.add_argument("--t-points", type=int, default=60)


def _add_coefficient(p):
    p.add_argument("--preset", default=None,
                   help="coefficient preset: theta-power | lixu-sinh | qian-from-a")
    p.add_argument("--a", default=None, help="a for qian-from-a: t2 | sinh2")
    p.add_argument("--table", default=None,
                   help="CSV of t,b,bprime rows (monotone t) interpolated by cubic pieces")


def _ctx_from(args) -> EstimateContext:
    if args.n is None or args.k is None or args.T is None:
        raise InvalidParameterError("--n, --k and --T are required (flags or scenario)")
    return EstimateContext(n=args.n, k=args.k, T=args.T)


def _parse_family_spec(spec: str, ctx: EstimateContext) -> GradientBound:
    parts = str(spec).split(":")
    fam = canonical_family(parts[0])
    order = family_catalog().get(fam, ())
    vals = [float(x) for x in parts[1:]]
    if len(vals) != len(order):
        raise InvalidParameterError(
            f"{fam} takes {len(order)} parameter(s) {order}, got {parts[1:]}")
    return make_family(ctx, fam, vals)


def _bound_from(args, ctx: EstimateContext) -> GradientBound:
    if args.family is None:
        raise InvalidParameterError("--family is required")
    if ":" in str(args.family):
        return _parse_family_spec(args.family, ctx)
    fam = canonical_family(args.family)
    order = family_catalog().get(fam, ())
    params = {}
    for name in order:
        val = getattr(args, name, None)
        if val is None:
            raise InvalidParameterError(f"{fam} needs --{name}")
        params[name] = val
    return make_family(ctx, fam, params)


def _coefficient_from(args, ctx: EstimateContext) -> TimeFunction:
    if args.table:
        rows = []
        with open(args.table, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.lower().startswith("t,"):
                    continue
                rows.append([float(x) for x in line.split(",")])
        return table_function(rows, T=ctx.T, label=f"table({args.table})")
    if args.preset:
        return coefficient_preset(args.preset, k=ctx.k, T=ctx.T,
                                  theta=args.theta, a=args.a)
    raise InvalidParameterError("give either --preset or --table")


def _t_grid(args, lo_default, hi_default):
    lo = args.t_min if args.t_min is not None else lo_default
    hi = args.t_max if args.t_max is not None else hi_default
    if not (0.0 < lo < hi):
        raise InvalidParameterError(f"bad time grid [{lo}, {hi}]")
    return np.geomspace(lo, hi, args.t_points)


def _emit(path, text):
    if path:
        atomic_write_text(path, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# subcommand handlers

def _cmd_families(args) -> int:
    rows = [f"{name}({', '.join(params) if params else ''})"
            for name, params in sorted(family_catalog().items())]
    rows.append("generated-from-b  (built by `generate` / the library from a coefficient)")
    print("\n".join(rows))
    return 0


def _cmd_eval(args) -> int:
    ctx = _ctx_from(args)
    bound = _bound_from(args, ctx)
    lo_default = max(bound.t_min * 1.001, 1e-3 * ctx.T) if bound.t_min > 0 else 1e-3 * ctx.T
    grid = _t_grid(args, lo_default, ctx.T)
    lines = ["t,beta,psi,alpha,phi"]
    for t in grid:
        s = bound.evaluate(float(t))
        lines.append(",".join(fmt(x) for x in (s.t, s.beta, s.psi, s.alpha, s.phi)))
    _emit(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_generate(args) -> int:
    ctx = _ctx_from(args)
    b = _coefficient_from(args, ctx)
    beta = beta_from_b(ctx, b)
    psi = psi_from_b(ctx, b, beta)
    grid = _t_grid(args, 1e-3 * ctx.T, ctx.T)
    lines = ["t,beta,psi"]
    for t in grid:
        lines.append(",".join(fmt(x) for x in (float(t), beta(float(t)), psi(float(t)))))
    _emit(args.out, "\n".join(lines) + "\n")
    return 0


def _cmd_check(args) -> int:
    if args.n is None:
        args.n = 2          # the A/C suites do not involve the dimension
    ctx = _ctx_from(args)
    suite = args.suite
    if suite is None:
        raise InvalidParameterError("--suite is required (A | B | Bprime | C)")
    key = suite.strip().lower()
    if key in ("a",):
        from .coefficients import quadratic_a, sinh_sq_a
        which = args.a or "t2"
        fn = quadratic_a(ctx.T) if which == "t2" else sinh_sq_a(ctx.k, ctx.T)
        fns = {"a": fn}
    elif key in ("c",):
        fns = {"b": _coefficient_from(args, ctx)}
    elif key in ("b", "bprime", "b'"):
        b = _coefficient_from(args, ctx)
        beta = beta_from_b(ctx, b)
        psi = psi_from_b(ctx, b, beta)
        if key == "b":
            lam = TimeFunction(fn=lambda t: math.sqrt(b(t)), T=ctx.T,
                               vectorized=False, label=f"sqrt({b.label})")
        else:
            d = args.delta if args.delta is not None else 0.5
            lam = TimeFunction(fn=lambda t: float(b(t)) ** (1.0 - d), T=ctx.T,
                               vectorized=False, label=f"({b.label})^{1 - d}")
        fns = {"lambda": lam, "beta": beta, "psi": psi}
    else:
        raise InvalidParameterError(f"unknown suite {suite!r}")

    report = check_suite(suite, fns, ctx, eps=args.eps, delta=args.delta)
    if args.json:
        text = json.dumps(report.to_json(), indent=2) + "\n"
    else:
        text = report.to_table() + "\n"
    _emit(args.out, text)
    return 0 if report.passed else 3


def _data_from(args):
    name = str(args.data or "").strip()
    if name == "euclidean":
        return euclidean_gaussian(args.n if args.n else 3)
    if name == "h3":
        return hyperbolic3_kernel()
    if name.endswith(".csv"):
        return load_solution_csv(name)
    raise InvalidParameterError("--data must be euclidean, h3, or a solver CSV path")


def _cmd_verify(args) -> int:
    data = _data_from(args)
    if args.T is None:
        args.T = data.t_range[1]
    ctx = _ctx_from(args)
    bound = _bound_from(args, ctx)
    report = verify_bound(bound, data, tol=args.tol)
    if args.out:
        write_csv(args.out, ["r", "t", "G"], report.grid_rows())
    if args.margins_out:
        write_csv(args.margins_out, ["t", "margin"], report.margin_curve)
    payload = report.to_json()
    payload.pop("margin_curve", None)
    text = json.dumps(payload, indent=2) + "\n" if args.json else (
        f"bound: {report.bound_id}\ndata: {report.data_id}\n"
        f"max_G: {fmt(report.max_G)} at r={fmt(report.argmax[0])}, t={fmt(report.argmax[1])}\n"
        f"tolerance: {report.tol_policy}\nviolations: {len(report.violations)}\n"
        f"result: {'pass' if report.passed else 'FAIL'}\n")
    sys.stdout.write(text)
    return 0 if report.passed else 2


def _cmd_compare(args) -> int:
    ctx = _ctx_from(args)
    if not args.families:
        raise InvalidParameterError("--families is required (comma-separated specs)")
    bounds = [_parse_family_spec(s, ctx) for s in str(args.families).split(",")]
    t_lo = min((b.t_min for b in bounds)) or 1e-3 * ctx.T
    grid = _t_grid(args, max(t_lo * 1.001, 1e-3 * ctx.T), ctx.T)
    table = compare_bounds(bounds, grid)
    rows = iter(table.rows())
    header = next(rows)
    if args.out:
        write_csv(args.out, header, rows)
    else:
        print(",".join(header))
        for row in rows:
            print(",".join(fmt(c) for c in row))
    return 0


def _cmd_crossover(args) -> int:
    if args.T is None:
        args.T = float(args.bracket[1])
    ctx = _ctx_from(args)
    if not args.a or not args.b:
        raise InvalidParameterError("--a and --b family specs are required")
    b1 = _parse_family_spec(args.a, ctx)
    b2 = _parse_family_spec(args.b, ctx)
    t_star = find_crossover(b1, b2, (args.bracket[0], args.bracket[1]))
    print(fmt(t_star))
    return 0


def _cmd_solve(args) -> int:
    if args.n is None:
        raise InvalidParameterError("--n is required")
    cfg = RadialSolverConfig(
        n=args.n, r_max=args.r_max, n_r=args.nr,
        t_start=args.t_start, t_end=args.t_end,
        dt_init=args.dt_init, dt_growth=args.dt_growth, seed=args.seed)
    data = radial_heat_solve(cfg)
    if not args.out:
        raise InvalidParameterError("--out is required for solve")
    save_solution_csv(data, args.out)
    print(f"wrote {args.out}: {len(data.t_grid)} time levels, window "
          f"({fmt(data.t_range[0])}, {fmt(data.t_range[1])})")
    return 0


def _cmd_selftest(args) -> int:
    results = acceptance.run_all(progress=print)
    payload = acceptance.report_payload(results)
    if args.report:
        write_json(args.report, payload)
    print("determinism of this report (criterion 10) is asserted by running "
          "selftest twice and comparing the files byte for byte")
    return 0 if all(r.passed for r in results) else 2


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradest", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("families", help="list built-in bound families")
    p.set_defaults(func=_cmd_families)

    p = sub.add_parser("eval", help="evaluate one bound on a time grid")
    _add_ctx(p); _add_family(p); _add_tgrid(p)
    p.add_argument("--out", default=None)
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("generate", help="coefficient -> (beta, psi) CSV")
    _add_ctx(p); _add_coefficient(p); _add_tgrid(p)
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("check", help="audit a hypothesis suite")
    _add_ctx(p); _add_coefficient(p)
    p.add_argument("--suite", required=False, default=None, help="A | B | Bprime | C")
    p.add_argument("--theta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None)
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=_cmd_check)

    p = sub.add_parser("verify", help="check the inequality on model data")
    _add_ctx(p); _add_family(p)
    p.add_argument("--data", default=None, help="euclidean | h3 | solver CSV path")
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--json", action="store_true")
    p.add_argument("--out", default=None, help="grid CSV (r, t, G)")
    p.add_argument("--margins-out", default=None, help="per-t margin CSV")
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=_cmd_verify)

    p = sub.add_parser("compare", help="tabulate several bounds")
    _add_ctx(p); _add_tgrid(p)
    p.add_argument("--families", default=None, help="comma-separated specs, e.g. lyd:0.5,hamilton")
    p.add_argument("--out", default=None)
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("crossover", help="bisect a psi crossover time")
    _add_ctx(p)
    p.add_argument("--a", default=None, help="first family spec, e.g. lyd:0.5")
    p.add_argument("--b", default=None, help="second family spec")
    p.add_argument("--bracket", type=float, nargs=2, metavar=("LO", "HI"), required=True)
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=_cmd_crossover)

    p = sub.add_parser("solve", help="radial heat march; persist as CSV")
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--r-max", type=float, default=12.0)
    p.add_argument("--nr", type=int, default=1200)
    p.add_argument("--t-start", type=float, default=0.01)
    p.add_argument("--t-end", type=float, default=2.0)
    p.add_argument("--dt-init", type=float, default=None)
    p.add_argument("--dt-growth", type=float, default=1.01)
    p.add_argument("--seed", default="auto", choices=("auto", "exact", "euclidean"))
    p.add_argument("--out", default=None)
    p.add_argument("--scenario", default=None)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("selftest", help="run the acceptance suite")
    p.add_argument("--report", default=None, help="write a JSON report here")
    p.set_defaults(func=_cmd_selftest)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        if getattr(args, "scenario", None):
            dests = {a.dest for a in parser._subparsers._group_actions[0]
                     .choices[args.command]._actions if a.dest not in ("help", "func")}
            dests.discard("scenario")
            _merge_scenario(args, argv, dests)
        return args.func(args)
    except GradestError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
