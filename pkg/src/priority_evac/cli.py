"""Command-line front end: ``evaluate``, ``optimize``, ``bounds``, ``export``, ``verify``."""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import __version__, bounds
from .algorithms import FAMILIES, PARAM_NAMES, REFERENCE_PARAMS, InfeasibleError, build, build_search1
from .cost import REFINE_TOL, evacuation_cost, robot_name
from .geometry import DomainError
from .ode import ODE_STEP
from .optimizer import NoFeasibleStart, optimize

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_INFEASIBLE = 2
EXIT_USAGE = 64
EXIT_IO = 74


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not (v > 0 and math.isfinite(v)):
        raise argparse.ArgumentTypeError(f"must be positive: {text}")
    return v


def _g(x: float) -> str:
    return f"{x:.6g}"


def _dump(doc) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def _emit(args, text: str) -> None:
    if args.out and args.command in ("evaluate", "optimize", "bounds", "verify"):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _params(parser, args) -> dict:
    names = PARAM_NAMES[args.family]
    given = {n: getattr(args, n) for n in ("alpha", "beta", "rho") if getattr(args, n) is not None}
    extra = sorted(set(given) - set(names))
    missing = [n for n in names if n not in given]
    if extra:
        parser.error(f"{args.family} does not take --{', --'.join(extra)}")
    if missing:
        if args.command == "optimize" and not given and args.family in REFERENCE_PARAMS:
            return dict(REFERENCE_PARAMS[args.family])
        parser.error(f"{args.family} needs --{', --'.join(missing)}")
    return {n: given[n] for n in names}


def _build(args, params):
    kw = {"ode_step": args.ode_step} if args.family == "nsearch3" else {}
    return build(args.family, params, **kw)


def _report_doc(report, args) -> dict:
    doc = report.to_dict()
    if args.family == "nsearch3":
        doc["tolerances"]["ode_step"] = args.ode_step
    doc["version"] = __version__
    return doc


def cmd_evaluate(parser, args) -> int:
    params = _params(parser, args)
    inst = _build(args, params)
    report = evacuation_cost(inst, args.tol)
    if args.json:
        _emit(args, _dump(_report_doc(report, args)))
        return EXIT_OK
    out = [
        f"algorithm    {args.family}",
        "params       " + " ".join(f"{k}={_g(v)}" for k, v in params.items()),
        f"cost         {_g(report.cost)}",
        f"search time  {_g(report.search_time)}",
        "worst exits:",
    ]
    for m in report.maximizers:
        out.append(f"  {robot_name(m.finder):<3} t={_g(m.discovery_time)}  angle={_g(m.exit_angle)}  cost={_g(m.value)}")
    _emit(args, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_optimize(parser, args) -> int:
    seed = _params(parser, args)
    res = optimize(
        args.family,
        seed,
        args.radius,
        args.xtol,
        refine_tol=args.tol,
        final_ode_step=args.ode_step,
    )
    if args.trace:
        res.write_trace_csv(args.trace)
    if args.json:
        doc = res.to_dict()
        doc["version"] = __version__
        _emit(args, _dump(doc))
        return EXIT_OK
    out = [
        f"algorithm    {args.family}",
        "params       " + " ".join(f"{k}={_g(v)}" for k, v in res.params.items()),
        f"cost         {_g(res.cost)}",
        f"iterations   {res.iterations} ({len(res.trace)} evaluations, {'converged' if res.converged else 'not converged'})",
    ]
    _emit(args, "\n".join(out) + "\n")
    return EXIT_OK


def table_rows(ode_step: float = ODE_STEP, refine_tol: float = REFINE_TOL) -> list[dict]:
    a0 = bounds.solve_alpha0()
    ubs = {
        1: evacuation_cost(build_search1(a0["alpha0"], a0["beta0"]), refine_tol).cost,
        2: evacuation_cost(build("search2", REFERENCE_PARAMS["search2"]), refine_tol).cost,
        3: evacuation_cost(build("nsearch3", REFERENCE_PARAMS["nsearch3"], ode_step=ode_step), refine_tol).cost,
    }
    lbs = {1: bounds.hexagon_lower_bound(), 2: bounds.solve_lb2()["T"], 3: bounds.solve_lb3()["T"]}
    return [
        {"servants": n, "upper": ubs[n], "lower": lbs[n], "ordinary_lower": bounds.ordinary_evacuation_lb(n + 1)}
        for n in (1, 2, 3)
    ]


def cmd_bounds(parser, args) -> int:
    sols = {"alpha0": bounds.solve_alpha0(), "lb2": bounds.solve_lb2(), "lb3": bounds.solve_lb3()}
    rows = table_rows(args.ode_step, args.tol)
    if args.json:
        doc = {k: s.to_dict() for k, s in sols.items()}
        doc["hexagon"] = bounds.hexagon_lower_bound()
        doc["table"] = rows
        doc["version"] = __version__
        _emit(args, _dump(doc))
        return EXIT_OK
    out = []
    for name, s in sols.items():
        vals = " ".join(f"{k}={_g(v)}" for k, v in s.unknowns.items())
        out.append(f"{name:<7} {vals}  (residual {s.max_residual:.1e})")
    out.append(f"hexagon {_g(bounds.hexagon_lower_bound())}")
    out.append("")
    out.append(f"{'n':>2}  {'upper':>9}  {'lower':>9}  {'ordinary':>9}")
    for r in rows:
        out.append(f"{r['servants']:>2}  {_g(r['upper']):>9}  {_g(r['lower']):>9}  {_g(r['ordinary_lower']):>9}")
    _emit(args, "\n".join(out) + "\n")
    return EXIT_OK


def cmd_export(parser, args) -> int:
    from .export import csv_text, svg_text

    params = _params(parser, args)
    inst = _build(args, params)
    report = evacuation_cost(inst, args.tol)
    base = Path(args.out) if args.out else Path(args.family)
    if base.suffix in (".svg", ".csv"):
        base = base.with_suffix("")
    csv_path, svg_path = base.with_suffix(".csv"), base.with_suffix(".svg")
    csv_path.write_text(csv_text(inst, args.dt))
    svg_path.write_text(svg_text(inst, report))
    if args.json:
        sys.stdout.write(_dump({"csv": str(csv_path), "svg": str(svg_path), "version": __version__}))
    else:
        print(f"wrote {csv_path} and {svg_path}")
    return EXIT_OK


def cmd_verify(parser, args) -> int:
    from .checks import REGISTRY, Context, run_checks

    if args.list:
        lines = [f"{name:<36} {summary}" for name, (summary, _) in REGISTRY.items()]
        _emit(args, "\n".join(lines) + "\n")
        return EXIT_OK
    results = run_checks(Context(ode_step=args.ode_step, refine_tol=args.tol))
    if args.json:
        doc = {
            "checks": [
                {"name": r.name, "ok": r.ok, "observed": r.observed, "bound": r.bound, "detail": r.detail}
                for r in results
            ],
            "version": __version__,
        }
        _emit(args, _dump(doc))
    else:
        failed = sum(not r.ok for r in results)
        _emit(args, "\n".join(r.line() for r in results) + f"\n{len(results) - failed}/{len(results)} checks passed\n")
    return EXIT_OK if all(r.ok for r in results) else EXIT_FAIL


def make_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--tol", type=_positive, default=REFINE_TOL, help="maximizer refinement tolerance")
    common.add_argument("--ode-step", type=_positive, default=ODE_STEP, help="RK4 step for the cost-preserving curve")
    common.add_argument("--out", help="output path")

    fam = _Parser(add_help=False)
    fam.add_argument("family", choices=FAMILIES)
    fam.add_argument("--alpha", type=float)
    fam.add_argument("--beta", type=float)
    fam.add_argument("--rho", type=float)

    p = _Parser(prog="priority-evac", description="Worst-case costs, optimization, lower bounds and plots for priority evacuation.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    ev = sub.add_parser("evaluate", parents=[common, fam], help="worst-case evacuation time")
    ev.set_defaults(handler=cmd_evaluate, subparser=ev)
    o = sub.add_parser("optimize", parents=[common, fam], help="tune parameters from a seed")
    o.set_defaults(handler=cmd_optimize, subparser=o)
    o.add_argument("--radius", type=float, default=0.1, help="half-width of the seed box")
    o.add_argument("--xtol", type=_positive, default=1e-6, help="simplex diameter at convergence")
    o.add_argument("--trace", help="write the evaluation trace as CSV")
    b = sub.add_parser("bounds", parents=[common], help="lower bounds and the summary table")
    b.set_defaults(handler=cmd_bounds, subparser=b)
    e = sub.add_parser("export", parents=[common, fam], help="trajectory CSV and SVG")
    e.set_defaults(handler=cmd_export, subparser=e)
    e.add_argument("--dt", type=_positive, default=1e-3, help="CSV sampling step")
    v = sub.add_parser("verify", parents=[common], help="run the invariant checks")
    v.set_defaults(handler=cmd_verify, subparser=v)
    v.add_argument("--list", action="store_true", help="list checks without running them")
    return p


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args.subparser, args)
    except (InfeasibleError, DomainError, NoFeasibleStart) as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
