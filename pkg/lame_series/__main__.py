"""
Command-line front end for lame_series.

Usage:
    python -m lame_series eval --a 2 --b 1 --c 0 --q 8 --alpha 1 --x 1.8:2.2:0.1
    python -m lame_series eval --a 2 --b 1 --c 0 --mode polynomial --alpha-seq 1,1,2 --x 2.3
    python -m lame_series compare --preset positive_split --tol 1e-8 --output csv
    python -m lame_series domain --a 2 --b 1 --c 0
    python -m lame_series residual --config run.json --depth 30
    python -m lame_series kernel-check

Configuration layers (later wins): --preset, --config, explicit flags.
A JSON document written with --output json is accepted back by --config.

Exit codes:
    0  ok
    2  config / parameter error
    3  x outside the convergence domain (without --force), branch error
    4  tolerance exceeded (compare, kernel-check)
"""

from __future__ import annotations
import sys
import argparse
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Callable, Optional

import numpy as np

from .config import OutputFormat, PresetLoader, RunConfig, load_config_dict, merge_flags
from .domain import convergence_metric, domain_classify
from .errors import (
    EXIT_OK,
    EXIT_TOLERANCE,
    DomainError,
    InvalidParamsError,
    LameError,
)
from .eval_trace import EvalTraceStore
from .hypergeometric import kernel_identity_gap
from .models import DomainReport, IndicialRoot, SeriesMode, TruncationSpec
from .numerics import rel_err
from .recurrence import ode_residual, residual_from_coefficients
from .render import domain_rows, fmt, render, write_domain_human
from .series import evaluate, reference_value

logger = logging.getLogger(__name__)

COMMANDS = ("eval", "compare", "domain", "residual", "kernel-check")

# kernel-check grid
KERNEL_LEVELS = range(1, 5)
KERNEL_ALPHAS = range(0, 6)
KERNEL_ETAS = tuple(float(v) for v in np.linspace(-0.6, 0.6, 13))
KERNEL_TOL = 1e-10


# ── Argument parsing ─────────────────────────────────────────────────

def _add_run_flags(parser: argparse.ArgumentParser):
    g = parser.add_argument_group("parameters")
    g.add_argument("--a", type=float, default=None, help="Expansion point a")
    g.add_argument("--b", type=float, default=None, help="Singular point b")
    g.add_argument("--c", type=float, default=None, help="Singular point c")
    g.add_argument("--q", type=float, default=None, help="Accessory parameter q (default: 0)")
    g.add_argument("--alpha", type=float, default=None, help="Exponent parameter alpha (default: 0)")
    g.add_argument("--lambda", dest="lam", choices=["0", "half"], default=None,
                   help="Indicial root: 0 (first kind) or half (second kind)")

    g = parser.add_argument_group("series")
    g.add_argument("--mode", choices=[m.value for m in SeriesMode], default=None,
                   help="infinite series or B-terminated polynomial")
    g.add_argument("--alpha-seq", default=None,
                   help="Polynomial mode: comma-separated nondecreasing ints, one per level")
    g.add_argument("--j", type=int, default=None,
                   help="Polynomial mode: level whose alpha_j fixes alpha (default: 0)")
    g.add_argument("--sign", choices=["plus", "minus"], default=None,
                   help="Polynomial mode: eigenvalue branch (default: plus)")
    g.add_argument("--x", default=None, help="x values: 'x1,x2,...' or 'start:stop:step' (stop included)")
    g.add_argument("--n-max", type=int, default=None, help="Last sub-series index (default: 40)")
    g.add_argument("--i-max", type=int, default=None, help="Inner summation cutoff (default: 40)")
    g.add_argument("--depth", type=int, default=None,
                   help="Frobenius oracle depth for compare/residual (default: 2*i_max + n_max)")

    g = parser.add_argument_group("run")
    g.add_argument("--tol", type=float, default=None, help="Tail / comparison tolerance")
    g.add_argument("--force", action="store_true", default=None,
                   help="Evaluate x outside the convergence domain anyway")
    g.add_argument("--output", choices=[o.value for o in OutputFormat], default=None,
                   help="Output format (default: human)")
    g.add_argument("--config", default=None, help="YAML/JSON run config (or a previous JSON output)")
    g.add_argument("--preset", default=None, help="Bundled preset name (see --list-presets)")
    g.add_argument("--precision", choices=["double", "extended"], default=None,
                   help="Arithmetic (default: $LAME_PRECISION or double)")
    g.add_argument("--workers", type=int, default=None, help="Threads for x sweeps (default: 1)")
    g.add_argument("--debug", action="store_true", help="Enable debug logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lame-series",
        description="Lamé functions by 3TRF series decomposition, with oracle checks",
    )
    parser.add_argument("--list-presets", action="store_true", help="List bundled presets and exit")
    sub = parser.add_subparsers(dest="command")
    helps = {
        "eval": "Evaluate the series at each x",
        "compare": "Compare the 3TRF value against the Frobenius oracle",
        "domain": "Report the convergence domain of the series about x = a",
        "residual": "ODE residual of the truncated Frobenius series (depth N and 2N)",
        "kernel-check": "Check the beta-weighted 2F1 kernel identity on a fixed grid",
    }
    for name in COMMANDS:
        _add_run_flags(sub.add_parser(name, help=helps[name]))
    return parser


# ── Config assembly ──────────────────────────────────────────────────

def _flag_values(args: argparse.Namespace) -> dict:
    return {
        "a": args.a, "b": args.b, "c": args.c, "q": args.q, "alpha": args.alpha,
        "lambda": args.lam,
        "mode": args.mode,
        "alpha_seq": args.alpha_seq,
        "j": args.j,
        "sign": args.sign,
        "x": args.x,
        "n_max": args.n_max,
        "i_max": args.i_max,
        "tol": args.tol,
        "force": args.force,
        "output": args.output,
        "depth": args.depth,
        "precision": args.precision,
        "workers": args.workers,
    }


def build_config(args: argparse.Namespace, loader: PresetLoader = None) -> RunConfig:
    """Preset, then --config file, then explicit flags."""
    base: dict = {}
    if args.preset:
        loader = loader or PresetLoader()
        preset = loader.get(args.preset)
        if preset is None:
            raise InvalidParamsError(
                f"unknown preset {args.preset!r}; available: {', '.join(loader.list_presets())}"
            )
        base = preset
    if args.config:
        file_data = load_config_dict(args.config)
        base = dict(base)
        for key, value in file_data.items():
            if isinstance(value, dict) and isinstance(base.get(key), dict):
                base[key] = {**base[key], **value}
            else:
                base[key] = value
    data = merge_flags(base, _flag_values(args))
    if not {"a", "b", "c"} <= set(data["params"]):
        raise InvalidParamsError("a, b and c are required (flags, --config or --preset)")
    return RunConfig.from_dict(data)


# ── Sweeps ───────────────────────────────────────────────────────────

def sweep(cfg: RunConfig, fn: Callable[[float], dict]) -> list[dict]:
    """fn over cfg.x_values; rows come back in input order."""
    if not cfg.x_values:
        raise InvalidParamsError("no x values given (use --x)")
    if cfg.workers == 1 or len(cfg.x_values) == 1:
        return [fn(x) for x in cfg.x_values]
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        return list(pool.map(fn, cfg.x_values))


def check_domain(cfg: RunConfig):
    """Infinite mode: every x must satisfy metric < 1 unless --force."""
    if cfg.mode is not SeriesMode.INFINITE:
        return
    outside = [x for x in cfg.x_values if convergence_metric(cfg.params, x) >= 1]
    if not outside:
        return
    shown = ", ".join(fmt(x) for x in outside[:5]) + (" ..." if len(outside) > 5 else "")
    if cfg.force:
        logger.warning(f"--force: evaluating {len(outside)} x outside the convergence domain: {shown}")
        return
    raise DomainError(f"{len(outside)} x values outside the convergence domain: {shown}")


# ── Commands ─────────────────────────────────────────────────────────

def cmd_eval(cfg: RunConfig, store: EvalTraceStore) -> tuple[list[dict], int]:
    check_domain(cfg)

    def row(x: float) -> dict:
        result = evaluate(cfg.mode, cfg.kind, cfg.params, x, cfg.trunc, cfg.spec, cfg.precision)
        store.store(result.trace)
        return {
            "x": x,
            "lambda": cfg.kind.label,
            "mode": cfg.mode.value,
            "value": result.value,
            "sub_values": list(result.sub_values),
            "tail": result.tail_estimate,
            "metric": convergence_metric(cfg.params, x),
            "levels": len(result.sub_values),
            "converged": result.converged,
            "stop_reason": result.stop_reason,
        }

    return sweep(cfg, row), EXIT_OK


def cmd_compare(cfg: RunConfig, store: EvalTraceStore) -> tuple[list[dict], int]:
    """
    A row fails when rel_err > tol; the tail is a reported column only.
    The 3TRF side stops at min(tol, the default series tolerance).
    """
    check_domain(cfg)
    tol = cfg.trunc.tol
    trunc = replace(cfg.trunc, tol=min(tol, TruncationSpec().tol))

    def row(x: float) -> dict:
        result = evaluate(cfg.mode, cfg.kind, cfg.params, x, trunc, cfg.spec, cfg.precision)
        store.store(result.trace)
        oracle = reference_value(cfg.mode, cfg.kind, cfg.params, x, cfg.oracle_depth,
                                 cfg.spec, cfg.precision)
        err = rel_err(result.value, oracle)
        return {
            "x": x,
            "lambda": cfg.kind.label,
            "mode": cfg.mode.value,
            "y_3trf": result.value,
            "y_oracle": oracle,
            "rel_err": err,
            "tail": result.tail_estimate,
            "ok": err <= tol,
        }

    rows = sweep(cfg, row)
    failed = [r for r in rows if not r["ok"]]
    if failed:
        worst = max(r["rel_err"] for r in failed)
        logger.error(f"compare: {len(failed)}/{len(rows)} rows above tol={tol:g} (worst rel_err {worst:.3e})")
        return rows, EXIT_TOLERANCE
    return rows, EXIT_OK


def cmd_residual(cfg: RunConfig, store: EvalTraceStore) -> tuple[list[dict], int]:
    """
    Infinite mode: residual of the Frobenius series at depth N and 2N.
    Polynomial mode: residual of the finite 3TRF coefficient sequence.
    """
    check_domain(cfg)
    depth = cfg.oracle_depth

    def rows_at(x: float) -> list[dict]:
        base = {"x": x, "lambda": cfg.kind.label, "mode": cfg.mode.value}
        if cfg.mode is SeriesMode.POLYNOMIAL:
            result = evaluate(cfg.mode, cfg.kind, cfg.params, x, spec=cfg.spec, precision=cfg.precision)
            store.store(result.trace)
            res = residual_from_coefficients(cfg.params, cfg.kind, result.coefficients, x, cfg.precision)
            return [{**base, "N": len(result.coefficients) - 1, "residual": res}]
        return [
            {**base, "N": n, "residual": ode_residual(cfg.params, cfg.kind, x, n, cfg.precision)}
            for n in (depth, 2 * depth)
        ]

    nested = sweep(cfg, rows_at)
    return [r for group in nested for r in group], EXIT_OK


def cmd_domain(cfg: RunConfig) -> tuple[list[dict], DomainReport, list[dict]]:
    report = domain_classify(cfg.params)
    points = []
    if report.intervals:
        for x in cfg.x_values:
            metric = convergence_metric(cfg.params, x)
            points.append({"x": x, "metric": metric, "inside": metric < 1})
    return domain_rows(report), report, points


def cmd_kernel_check(tol: float, precision: Optional[str]) -> tuple[list[dict], int]:
    """Worst gap per (l, alpha_l, lambda) over i_prev ≤ alpha_l and the eta grid."""
    rows = []
    for lam in IndicialRoot:
        for l in KERNEL_LEVELS:
            for alpha_l in KERNEL_ALPHAS:
                worst = {"gap": -1.0}
                for i_prev in range(alpha_l + 1):
                    for eta in KERNEL_ETAS:
                        gap = kernel_identity_gap(l, i_prev, alpha_l, lam, eta, precision=precision)
                        if gap > worst["gap"]:
                            worst = {"i_prev": i_prev, "eta": eta, "gap": gap}
                rows.append({"l": l, "alpha_l": alpha_l, "lambda": lam.label, **worst})
    top = max(r["gap"] for r in rows)
    if top > tol:
        logger.error(f"kernel-check: max gap {top:.3e} above tol={tol:g}")
        return rows, EXIT_TOLERANCE
    logger.info(f"kernel-check: {len(rows)} cells, max gap {top:.3e}")
    return rows, EXIT_OK


# ── Main ─────────────────────────────────────────────────────────────

def run(args: argparse.Namespace, stream=None) -> int:
    stream = stream or sys.stdout
    store = EvalTraceStore()

    if args.command == "kernel-check":
        output = OutputFormat(args.output or OutputFormat.HUMAN.value)
        tol = args.tol if args.tol is not None else KERNEL_TOL
        rows, code = cmd_kernel_check(tol, args.precision)
        render(args.command, None, rows, stream, output=output)
        return code

    cfg = build_config(args)
    logger.debug(f"config: {cfg.to_dict()}")

    if args.command == "domain":
        rows, report, points = cmd_domain(cfg)
        if cfg.output is OutputFormat.HUMAN:
            write_domain_human(report, stream, points)
        elif cfg.output is OutputFormat.JSON:
            render(args.command, cfg, [{**report.to_dict(), "points": points}], stream)
        else:
            render(args.command, cfg, rows, stream)
        return EXIT_OK

    handlers = {"eval": cmd_eval, "compare": cmd_compare, "residual": cmd_residual}
    rows, code = handlers[args.command](cfg, store)
    render(args.command, cfg, rows, stream)

    if args.debug:
        for name, info in store.summary().items():
            logger.debug(f"traces[{name}]: {info}")
            for record in store.get_recent(name, n=3):
                result = record.get("result", {})
                logger.debug(
                    f"  recent x={record.get('inputs', {}).get('x')} "
                    f"value={result.get('value')} stop={record.get('stop_reason')}"
                )
        for record in store.get_failures():
            logger.debug(f"not converged: {record.get('inputs', {}).get('x')} stop={record.get('stop_reason')}")
    return code


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    # Logging
    level = logging.DEBUG if getattr(args, "debug", False) else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(asctime)s [%(name)s] %(levelname)s: %(message)s",
        datefmt="%H:%M:%S",
    )

    if args.list_presets:
        loader = PresetLoader()
        for name in loader.list_presets():
            print(f"{name:24s} {loader.describe(name)}")
        return EXIT_OK
    if not args.command:
        parser.print_help()
        return EXIT_OK

    try:
        return run(args)
    except LameError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
