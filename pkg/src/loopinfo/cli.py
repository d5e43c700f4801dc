"""Command-line front end: analyze, verify, simulate, sweep.

Exit codes are a stable contract: 0 success, 1 parse/usage error, 2 unstable
loop or diverged simulation, 3 tolerance failure. All numeric output uses 12
significant digits; rates are nats/sample unless --bits (or the config's
log_base option) asks for bits.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import replace

from .config import RunOptions, load_config
from .decomposition import (
    RateInputs,
    controller_independence_check,
    decompose,
    export_integrands,
    run_identity_suite,
)
from .errors import (
    ConfigError,
    DegenerateLoopError,
    DivergenceError,
    LoopInfoError,
    UnstableLoopError,
)
from .lti import is_stabilizing, tf
from .montecarlo import SimulationConfig, compare_report
from .spectral import FrequencyGrid

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_UNSTABLE = 2
EXIT_TOLERANCE = 3

RESIDUAL_LIMIT = 1e-8


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage errors; the contract here says 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _r(x: float) -> float:
    """Round a float to 12 significant digits for stable, readable output."""
    return float(f"{x:.12g}")


def _poles_json(poles):
    return [[_r(p.real), _r(p.imag)] for p in poles]


def _emit(text: str, output):
    if output:
        with open(output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _units(args, options: RunOptions):
    bits = args.bits or options.log_base == "bits"
    factor = 1.0 / math.log(2.0) if bits else 1.0
    return factor, ("bits/sample" if bits else "nats/sample")


def _grid(args, options: RunOptions) -> FrequencyGrid:
    return FrequencyGrid(args.grid if args.grid is not None else options.grid_points)


def _stability_block(report):
    return {
        "is_stabilizing": report.is_stabilizing,
        "degenerate": report.degenerate,
        "closed_loop_poles": _poles_json(report.closed_loop_poles),
        "offending_poles": _poles_json(report.offending_poles),
        "unstable_cancellations": _poles_json(report.unstable_cancellations),
    }


def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    factor, units = _units(args, cfg.options)
    grid = _grid(args, cfg.options)

    stab = is_stabilizing(cfg.model)
    if not stab.is_stabilizing:
        doc = {"stability": _stability_block(stab)}
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
        return EXIT_UNSTABLE

    inputs = RateInputs(cfg.model, grid)
    report = decompose(inputs)

    literal = sum(max(0.0, p.real) for p in cfg.model.plant.poles())
    doc = {
        "stability": _stability_block(stab),
        "units": units,
        "rate": {
            "total_rate": _r(report.total_rate * factor),
            "control_term": _r(report.control_term * factor),
            "disturbance_term": _r(report.disturbance_term * factor),
            "residual": _r(report.residual * factor),
            "bode_analytic": _r(report.bode_analytic * factor),
            "grid_points": report.grid_points,
            "convergence_estimate": _r(report.convergence_estimate * factor),
        },
        "pole_sum_literal": _r(literal * factor),
    }
    if abs(literal - report.bode_analytic) > 1e-9:
        doc["pole_sum_note"] = (
            "raw pole-sum reading differs from the log-magnitude Bode value; "
            "the reported bode_analytic is the quadrature-certified "
            "sum of ln max(1, |pole|)"
        )
    if args.integrands:
        export_integrands(inputs, args.integrands)
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    return EXIT_OK


def _parse_controller(spec_pair):
    num_text, den_text = spec_pair
    try:
        num = json.loads(num_text)
        den = json.loads(den_text)
        return tf([float(x) for x in num], [float(x) for x in den])
    except (ValueError, TypeError) as exc:
        raise ConfigError(f"bad --alt-controller coefficients: {exc}") from exc


def cmd_verify(args) -> int:
    if args.random is not None:
        grid = FrequencyGrid(args.grid) if args.grid is not None else FrequencyGrid()
        cases = run_identity_suite(args.random, seed=args.seed or 0, grid=grid)
        residuals = [abs(c.report.residual) for c in cases]
        gaps = [c.proof_chain_gap for c in cases]
        ok = sum(1 for r in residuals if r < RESIDUAL_LIMIT)
        doc = {
            "cases": len(cases),
            "identities_pass": ok,
            "max_residual": _r(max(residuals)) if residuals else 0.0,
            "max_proof_chain_gap": _r(max(gaps)) if gaps else 0.0,
            "passed": ok == len(cases),
            "note": f"{ok}/{len(cases)} identities PASS"
            + (" (0 cases: vacuous)" if not cases else ""),
        }
        _emit(json.dumps(doc, indent=2) + "\n", args.output)
        return EXIT_OK if doc["passed"] else EXIT_TOLERANCE

    if args.config is None:
        raise ConfigError("verify needs a config path or --random N")
    cfg = load_config(args.config)
    factor, units = _units(args, cfg.options)
    grid = _grid(args, cfg.options)

    report = decompose(RateInputs(cfg.model, grid))
    controllers = [cfg.model.controller] + [
        _parse_controller(pair) for pair in (args.alt_controller or [])
    ]
    independence = controller_independence_check(cfg.model, controllers, grid)

    doc = {
        "units": units,
        "residual": _r(report.residual * factor),
        "residual_pass": abs(report.residual) < RESIDUAL_LIMIT,
        "independence": {
            "disturbance_terms": [_r(t * factor) for t in independence.disturbance_terms],
            "max_deviation": _r(independence.max_deviation * factor),
            "passed": independence.passed,
        },
        "grid_points": grid.n_points,
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    passed = doc["residual_pass"] and independence.passed
    return EXIT_OK if passed else EXIT_TOLERANCE


def cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    factor, units = _units(args, cfg.options)
    grid = _grid(args, cfg.options)
    seed = args.seed if args.seed is not None else cfg.options.seed

    sim = SimulationConfig(cfg.model, n_samples=cfg.options.n_samples, seed=seed)
    record = compare_report(sim, tolerance=args.tolerance, grid=grid)

    doc = {
        "units": units,
        "seed": record.seed,
        "n_samples": record.n_samples,
        "analytic_rate": _r(record.analytic_rate * factor),
        "empirical_rate": _r(record.empirical_rate * factor),
        "abs_gap": _r(record.abs_gap * factor),
        "rel_gap": _r(record.rel_gap) if record.rel_gap is not None else None,
        "tolerance": _r(record.tolerance * factor),
        "passed": record.passed,
        "floored_bins": record.floored_bins,
    }
    _emit(json.dumps(doc, indent=2) + "\n", args.output)
    return EXIT_OK if record.passed else EXIT_TOLERANCE


def _parse_values(text: str):
    text = text.strip()
    if not text:
        return []
    try:
        parsed = json.loads(text)
        if isinstance(parsed, list):
            return [float(x) for x in parsed]
        return [float(parsed)]
    except (ValueError, TypeError):
        pass
    try:
        return [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad --values list: {exc}") from exc


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    factor, _ = _units(args, cfg.options)
    grid = _grid(args, cfg.options)
    values = _parse_values(args.values)

    lines = ["value,total,control,disturbance"]
    for val in values:
        if args.param == "sigma_v2":
            noise = replace(cfg.model.output_disturbance, variance=val)
            model = replace(cfg.model, output_disturbance=noise)
        else:
            noise = replace(cfg.model.channel_noise, variance=val)
            model = replace(cfg.model, channel_noise=noise)
        report = decompose(RateInputs(model, grid))
        lines.append(
            f"{val:.12g},{report.total_rate * factor:.12g},"
            f"{report.control_term * factor:.12g},"
            f"{report.disturbance_term * factor:.12g}"
        )
    _emit("\n".join(lines) + "\n", args.output)
    return EXIT_OK


def build_parser() -> _Parser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, metavar="N",
                        help="frequency grid size (power of two)")
    common.add_argument("--bits", action="store_true",
                        help="report rates in bits/sample")
    common.add_argument("--output", metavar="PATH",
                        help="write the report here instead of stdout")
    common.add_argument("--seed", type=int, metavar="S",
                        help="override the config seed")

    parser = _Parser(prog="loopinfo",
                     description="feedback-channel information rate toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common],
                       help="decompose the rate of one configured loop")
    p.add_argument("config", help="JSON loop description")
    p.add_argument("--integrands", metavar="PATH",
                   help="also write per-frequency integrands as CSV")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("verify", parents=[common],
                       help="check the decomposition identity and controller independence")
    p.add_argument("config", nargs="?", help="JSON loop description")
    p.add_argument("--random", type=int, metavar="N",
                   help="run the randomized identity suite instead")
    p.add_argument("--alt-controller", nargs=2, action="append",
                   metavar=("NUM", "DEN"),
                   help="extra stabilizing controller as two JSON coefficient arrays")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("simulate", parents=[common],
                       help="Monte Carlo validation of the analytic rate")
    p.add_argument("config", help="JSON loop description")
    p.add_argument("--tolerance", type=float, default=0.03, metavar="T",
                   help="absolute pass tolerance in nats (default 0.03)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", parents=[common],
                       help="sweep a noise variance and tabulate the terms")
    p.add_argument("config", help="JSON loop description")
    p.add_argument("--param", required=True, choices=("sigma_v2", "sigma_w2"))
    p.add_argument("--values", required=True,
                   help="comma-separated or JSON list of variances")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UnstableLoopError, DivergenceError, DegenerateLoopError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSTABLE
    except LoopInfoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
