"""Command-line interface.

Three subcommands::

    fdnoma sweep            evaluate capacities/outages over a grid
    fdnoma compare-baseline sum-capacity comparison vs. the relay-only baseline
    fdnoma check            independent-route validation of the closed forms

A JSON config file (flat key-value document) may supply both system
parameters (exact SystemConfig field names, SNRs optionally in dB via the
``_db`` suffix) and flag defaults; command-line flags override the file.
Sigma precedence: config-file value < ``--ic`` preset < ``--sigma1``/``--sigma3``.

Exit codes: 0 success, 2 validation error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from .experiments import (
    AXES,
    ENGINES,
    IC_PRESETS,
    SweepSpec,
    checks_failed,
    emit_checks,
    emit_comparison,
    emit_results,
    run_baseline_comparison,
    run_checks,
    run_sweep,
)
from .model import ConfigError, SystemConfig, config_from_dict
from .montecarlo import SimulationPlan
from .numerics import QuadratureError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

# Keys in a config document that act as flag defaults rather than system
# parameters.
_FLAG_KEYS = ("axis", "grid", "ic", "engine", "samples", "seed", "shards",
              "out", "format", "strict")


def parse_grid(text: str) -> tuple[float, ...]:
    """Parse ``start:step:stop`` (inclusive stop) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise ValueError(f"grid must be 'start:step:stop' or a single value, got {text!r}")
    start, step, stop = (float(p) for p in parts)
    if step <= 0.0:
        raise ValueError("grid step must be > 0")
    if stop < start:
        raise ValueError("grid stop must be >= start")
    values = []
    k = 0
    while True:
        v = start + k * step
        if v > stop + step * 1e-9:
            break
        values.append(v)
        k += 1
    return tuple(values)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fdnoma",
        description="Capacity/outage analysis of a full-duplex cooperative "
                    "NOMA downlink with a device-to-device side link.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="JSON config file (system parameters and flag defaults)")
        p.add_argument("--samples", type=int, default=None,
                       help="Monte Carlo samples per grid point (default 1000000)")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed for the Monte Carlo streams (default 12345)")
        p.add_argument("--shards", type=int, default=None,
                       help="independent sample shards (default 4)")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    def add_sweep_flags(p):
        p.add_argument("--axis", choices=[a.replace("_", "-") for a in AXES],
                       default=None, help="sweep axis (default rho-b-db)")
        p.add_argument("--grid", default=None,
                       help="grid as start:step:stop, inclusive (default 0:2:40)")
        p.add_argument("--ic", choices=sorted(IC_PRESETS), default=None,
                       help="residual-cancellation preset")
        p.add_argument("--sigma1", type=float, default=None,
                       help="override the relay self-interference level")
        p.add_argument("--sigma3", type=float, default=None,
                       help="override the near user's known-interference level")
        p.add_argument("--engine", choices=list(ENGINES), default=None,
                       help="evaluation engine (default analytic)")
        p.add_argument("--rho-b-db", type=float, default=None, dest="rho_b_db",
                       help="fix the BS transmit SNR in dB (power-split sweeps)")
        p.add_argument("--format", choices=["csv", "jsonl"], default=None,
                       help="output format (default csv)")

    p_sweep = sub.add_parser("sweep", help="evaluate capacities and outages over a grid")
    add_common(p_sweep)
    add_sweep_flags(p_sweep)

    p_cmp = sub.add_parser("compare-baseline",
                           help="sum-capacity comparison vs. the relay-only baseline")
    add_common(p_cmp)
    add_sweep_flags(p_cmp)

    p_check = sub.add_parser("check", help="run the independent-route validation suite")
    add_common(p_check)
    p_check.add_argument("--strict", action="store_true", default=None,
                         help="fail on documented known differences as well")
    return parser


def _load_doc(path: str) -> tuple[dict, dict]:
    """Split a flat config document into system keys and flag defaults."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ConfigError("<root>", "config document must be a JSON object")
    flags = {}
    system = {}
    for key, value in doc.items():
        if key in _FLAG_KEYS:
            flags[key] = value
        else:
            system[key] = value
    return system, flags


def _resolve(args, flags: dict, name: str, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in flags:
        return flags[name]
    return default


def _make_spec(args) -> SweepSpec:
    system_doc, flags = _load_doc(args.config) if args.config else ({}, {})
    fixed = config_from_dict(system_doc, base=SystemConfig())
    rho_b_db = getattr(args, "rho_b_db", None)
    if rho_b_db is not None:
        rho_b = 10.0 ** (rho_b_db / 10.0)
        fixed = fixed.replace(rho_b=rho_b, rho_u=rho_b / 2.0)

    axis = _resolve(args, flags, "axis", "rho-b-db").replace("-", "_")
    grid_text = _resolve(args, flags, "grid", "0:2:40")
    grid = parse_grid(str(grid_text))
    plan = SimulationPlan(
        n_samples=int(_resolve(args, flags, "samples", 1_000_000)),
        master_seed=int(_resolve(args, flags, "seed", 12345)),
        n_shards=int(_resolve(args, flags, "shards", 4)),
    )
    return SweepSpec(
        axis=axis,
        grid=grid,
        fixed=fixed,
        ic_mode=_resolve(args, flags, "ic", None),
        sigma1=args.sigma1,
        sigma3=args.sigma3,
        engine=_resolve(args, flags, "engine", "analytic"),
        plan=plan,
    ), flags


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "sweep":
            spec, flags = _make_spec(args)
            rows = run_sweep(spec)
            emit_results(rows, format=_resolve(args, flags, "format", "csv"),
                         destination=_resolve(args, flags, "out", None))
        elif args.command == "compare-baseline":
            spec, flags = _make_spec(args)
            rows = run_baseline_comparison(spec)
            emit_comparison(rows, format=_resolve(args, flags, "format", "csv"),
                            destination=_resolve(args, flags, "out", None))
        elif args.command == "check":
            system_doc, flags = _load_doc(args.config) if args.config else ({}, {})
            config_from_dict(system_doc, base=SystemConfig())  # validate only
            results = run_checks(
                samples=int(_resolve(args, flags, "samples", 1_000_000)),
                seed=int(_resolve(args, flags, "seed", 12345)),
                shards=int(_resolve(args, flags, "shards", 4)),
            )
            emit_checks(results, destination=_resolve(args, flags, "out", None))
            strict = bool(_resolve(args, flags, "strict", False))
            if checks_failed(results, strict=strict):
                return EXIT_NUMERICAL
        else:  # pragma: no cover - argparse enforces the choices
            parser.error(f"unknown command {args.command!r}")
    except QuadratureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ConfigError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
