"""Command-line front end.

Subcommands: validate, evaluate, curve, optimize, allocate, sample, report.
Exit codes: 0 success, 1 domain error (bad scenario, unknown GDF, ...),
2 usage error (argparse).  ``--json`` mirrors every human-readable output
as machine-parseable JSON.  File outputs are written atomically (temp file
plus rename), so failures never leave partial files behind.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import tempfile

from .evaluate import (
    ADDITIVE,
    LITERAL,
    EvalContext,
    EvaluationError,
    UnknownGdfError,
    enb,
    enbcds_curve,
)
from .io import (
    allocation_to_dict,
    curve_to_dict,
    emit_curve,
    emit_report,
    optimal_to_dict,
    parse_scenario,
    sensitivity_to_dict,
)
from .model import Portfolio
from .optimize import OptimizationError, allocate, optimal_spend
from .sensitivity import SensitivityError, sample

__all__ = ["main"]


def _load(args):
    with open(args.scenario, encoding="utf-8") as fh:
        text = fh.read()
    return parse_scenario(text, lenient=args.lenient)


def _gdf(p: Portfolio, gdf_id: str):
    try:
        return p.gdf(gdf_id)
    except KeyError:
        raise UnknownGdfError(
            f"no gdf {gdf_id!r} in scenario; available: {', '.join(p.ids())}"
        ) from None


def _actual_spends(p: Portfolio) -> dict[str, float]:
    return {g.id: g.actual_spend if g.actual_spend is not None else 0.0 for g in p.gdfs}


def _write(data: bytes | str, path: str | None) -> None:
    if isinstance(data, str):
        data = data.encode("utf-8")
    if path is None:
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".enbcds-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _emit_json(obj, path: str | None) -> None:
    _write(json.dumps(obj, indent=2) + "\n", path)


def _cmd_validate(args) -> int:
    _load(args)
    if args.json:
        _emit_json({"ok": True}, args.output)
    else:
        _write("OK\n", args.output)
    return 0


def _cmd_evaluate(args) -> int:
    sf = _load(args)
    g = _gdf(sf.portfolio, args.gdf)
    spends = _actual_spends(sf.portfolio)
    spend = args.spend if args.spend is not None else spends[g.id]
    ctx = EvalContext(sf.portfolio, spends, args.mode)
    value = enb(g, spend, ctx)
    if args.json:
        _emit_json({"gdf": g.id, "spend": spend, "enbcds": value}, args.output)
    else:
        _write(f"gdf {g.id}: enbcds({spend}) = {value}\n", args.output)
    return 0


def _cmd_curve(args) -> int:
    sf = _load(args)
    g = _gdf(sf.portfolio, args.gdf)
    ctx = EvalContext(sf.portfolio, _actual_spends(sf.portfolio), args.mode)
    curve = enbcds_curve(g, s_max=args.s_max, n_samples=args.samples, context=ctx)
    if args.json:
        _emit_json(curve_to_dict(curve), args.output)
    else:
        _write(emit_curve(curve, args.format, actual_spend=g.actual_spend), args.output)
    return 0


def _cmd_optimize(args) -> int:
    sf = _load(args)
    g = _gdf(sf.portfolio, args.gdf)
    ctx = EvalContext(sf.portfolio, _actual_spends(sf.portfolio), args.mode)
    best = optimal_spend(g, context=ctx)
    if args.json:
        _emit_json({"gdf": g.id, **optimal_to_dict(best)}, args.output)
    else:
        _write(f"gdf {g.id}: s_star = {best.s_star}\nvalue at s_star = {best.value}\n", args.output)
    return 0


def _kkt_summary(result) -> dict:
    inner = [result.marginal_at_solution[i] for i, ok in result.interior.items() if ok]
    spread = 0.0
    if len(inner) >= 2:
        lo, hi = min(inner), max(inner)
        spread = (hi - lo) / max(abs(hi), abs(lo), 1e-300)
    lam = result.lam if result.lam is not None else 0.0
    zero_ok = all(
        result.marginal_at_solution[i] <= lam + 1e-4
        for i, s in result.spends.items()
        if i in result.marginal_at_solution and s == 0.0 and i not in result.dropped
    )
    return {"interior_count": len(inner), "marginal_spread_rel": spread, "zero_spend_ok": zero_ok}


def _cmd_allocate(args) -> int:
    sf = _load(args)
    result = allocate(sf.portfolio, budget=args.budget, mode=args.mode)
    kkt = _kkt_summary(result)
    if args.json:
        _emit_json({**allocation_to_dict(result), "kkt": kkt}, args.output)
        return 0
    lines = [f"{'gdf':<28} {'spend':>16} {'marginal':>14} {'interior':>9}  status"]
    for gid in sf.portfolio.ids():
        spend = result.spends[gid]
        marginal = result.marginal_at_solution.get(gid)
        interior = result.interior.get(gid, False)
        status = "dropped" if gid in result.dropped else "retained"
        lines.append(
            f"{gid:<28} {spend:>16,.2f} "
            f"{(f'{marginal:.6g}' if marginal is not None else '-'):>14} "
            f"{('yes' if interior else 'no'):>9}  {status}"
        )
    lines.append(f"objective = {result.objective}")
    lines.append(f"budget_used = {result.budget_used}")
    lines.append(f"lam = {result.lam}")
    lines.append(f"iterations = {result.iterations}")
    lines.append(
        "kkt: interior marginals "
        f"{kkt['interior_count']}, relative spread {kkt['marginal_spread_rel']:.3g}, "
        f"zero-spend marginals within lam+1e-4: {'yes' if kkt['zero_spend_ok'] else 'no'}"
    )
    _write("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_sample(args) -> int:
    sf = _load(args)
    report = sample(
        sf.portfolio,
        sf.uncertainty,
        draws=args.draws,
        seed=args.seed,
        budget=args.budget,
        threads=args.threads,
    )
    if args.json:
        _emit_json(sensitivity_to_dict(report), args.output)
        return 0
    lines = [f"draws = {report.draws}, seed = {report.seed}"]

    def stat_line(label, st, extra=""):
        return (
            f"{label:<44} mean={st.mean:.6g} std={st.std:.6g} "
            f"p5={st.p5:.6g} p50={st.p50:.6g} p95={st.p95:.6g}{extra}"
        )

    if report.param_stats:
        lines.append("sampled parameters (after clamping):")
        for target, st in report.param_stats.items():
            clamps = report.clamp_events.get(target, 0)
            lines.append("  " + stat_line(target, st, f" clamps={clamps}"))
    if report.enbcds_at_spend:
        lines.append("net benefit at given spends:")
        for gid, st in report.enbcds_at_spend.items():
            lines.append("  " + stat_line(gid, st))
    if report.s_star:
        lines.append("optimal spend per gdf:")
        for gid, st in report.s_star.items():
            lines.append("  " + stat_line(gid, st))
    if report.allocation_objective is not None:
        lines.append(stat_line("allocation objective", report.allocation_objective))
    if report.drop_frequency:
        lines.append("drop frequency:")
        for gid, freq in report.drop_frequency.items():
            lines.append(f"  {gid:<44} {freq:.4f}")
    _write("\n".join(lines) + "\n", args.output)
    return 0


def _cmd_report(args) -> int:
    sf = _load(args)
    p = sf.portfolio
    spends = _actual_spends(p)
    ctx = EvalContext(p, spends, args.mode)
    optimal = {g.id: optimal_spend(g, context=ctx) for g in p.gdfs}
    values_at_actual = {g.id: enb(g, spends[g.id], ctx) for g in p.gdfs}
    result = allocate(p, budget=args.budget, mode=args.mode)
    if args.plots is not None:
        os.makedirs(args.plots, exist_ok=True)
        for g in p.gdfs:
            curve = enbcds_curve(g, context=ctx)
            _write(
                emit_curve(curve, "svg", actual_spend=g.actual_spend),
                os.path.join(args.plots, f"{g.id}.svg"),
            )
    if args.json:
        payload = {
            "gdfs": {
                g.id: {
                    "actual_spend": g.actual_spend,
                    "value_at_actual": values_at_actual[g.id],
                    **optimal_to_dict(optimal[g.id]),
                }
                for g in p.gdfs
            },
            "allocation": allocation_to_dict(result),
        }
        _emit_json(payload, args.output)
    else:
        _write(emit_report(p, optimal, result, values_at_actual), args.output)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="enbcds",
        description="Expected-net-benefit analysis and defense-budget allocation for grid digital functionalities",
    )
    parser.add_argument("--json", action="store_true", help="emit machine-readable JSON")
    parser.add_argument(
        "--lenient", action="store_true", help="warn on unknown scenario fields instead of failing"
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(sp, mode=True, output=True):
        sp.add_argument("scenario", help="path to a scenario JSON file")
        if mode:
            sp.add_argument(
                "--mode",
                choices=(ADDITIVE, LITERAL),
                default=ADDITIVE,
                help="how defense spend enters the expected cyber cost",
            )
        if output:
            sp.add_argument("-o", "--output", default=None, help="write output to a file (atomic)")

    sp = sub.add_parser("validate", help="check a scenario file")
    common(sp, mode=False)
    sp.set_defaults(func=_cmd_validate)

    sp = sub.add_parser("evaluate", help="net benefit of one GDF at a spend")
    common(sp)
    sp.add_argument("--gdf", required=True, help="gdf id")
    sp.add_argument("--spend", type=float, default=None, help="defense spend (default: actual)")
    sp.set_defaults(func=_cmd_evaluate)

    sp = sub.add_parser("curve", help="sample the benefit-versus-spend curve")
    common(sp)
    sp.add_argument("--gdf", required=True, help="gdf id")
    sp.add_argument("--s-max", type=float, default=None, help="upper end of the spend window")
    sp.add_argument("--samples", type=int, default=200, help="number of samples (default 200)")
    sp.add_argument("--format", choices=("csv", "svg"), default="csv")
    sp.set_defaults(func=_cmd_curve)

    sp = sub.add_parser("optimize", help="optimal spend for one GDF")
    common(sp)
    sp.add_argument("--gdf", required=True, help="gdf id")
    sp.set_defaults(func=_cmd_optimize)

    sp = sub.add_parser("allocate", help="split the budget across the portfolio")
    common(sp)
    sp.add_argument("--budget", type=float, default=None, help="override the scenario budget")
    sp.set_defaults(func=_cmd_allocate)

    sp = sub.add_parser("sample", help="Monte Carlo over the scenario's uncertain parameters")
    common(sp, mode=False)
    sp.add_argument("--draws", type=int, required=True, help="number of draws")
    sp.add_argument("--seed", type=int, required=True, help="substream seed (reproducibility)")
    sp.add_argument("--budget", type=float, default=None, help="override the scenario budget")
    sp.add_argument(
        "--threads", type=int, default=None, help="worker threads (ENBCDS_THREADS caps this)"
    )
    sp.set_defaults(func=_cmd_sample)

    sp = sub.add_parser("report", help="full portfolio comparison report")
    common(sp)
    sp.add_argument("--budget", type=float, default=None, help="override the scenario budget")
    sp.add_argument("--plots", default=None, help="directory for per-GDF SVG curves")
    sp.set_defaults(func=_cmd_report)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, EvaluationError, OptimizationError, SensitivityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
