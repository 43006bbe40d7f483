"""Command-line entry point: ``evolve``, ``spectrum``, ``qfi`` and ``sweep``.

Exit codes: 0 success, 2 invalid configuration, 3 solver divergence,
1 any other numerical failure.  Messages go to standard error.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from . import records
from .config import RUN_METHODS, SWEEP_AXES, RunConfig, build_config, preset
from .dynamics import decoherence_rates, markovian_amplitude, solve_amplitude
from .errors import (
    ConfigurationError,
    DivergenceError,
    DomainError,
    ReservoirError,
    UnsupportedOperationError,
)
from .qfi import qfi_series
from .spectral import bound_state_threshold
from .spectrum import discretized_spectrum, find_bound_state, locate_threshold, reconstruct_amplitude

EXIT_CONFIG = 2
EXIT_DIVERGENCE = 3
EXIT_NUMERICAL = 1


def _output(cfg: RunConfig, default: str) -> Path:
    return Path(cfg.out or default)


def cmd_evolve(cfg: RunConfig) -> dict[str, Any]:
    J = cfg.spectral_density()
    grid = cfg.grid()
    if cfg.methods == ("markovian",):
        traj = markovian_amplitude(J, cfg.omega0, grid)
    else:
        traj = solve_amplitude(J, cfg.omega0, grid)
    out = _output(cfg, "evolve.csv")
    records.write_csv(out, records.TRAJECTORY_HEADER,
                      records.trajectory_rows(traj, decoherence_rates(traj)))
    summary: dict[str, Any] = {"out": str(out), "method": traj.metadata["method"]}
    if "laplace_oracle" in cfg.methods:
        oracle = reconstruct_amplitude(J, cfg.omega0, grid)
        side = out.with_suffix(".laplace.csv")
        records.write_csv(side, records.TRAJECTORY_HEADER,
                          records.trajectory_rows(oracle, decoherence_rates(oracle)))
        summary["laplace_out"] = str(side)
        summary["max_deviation"] = float(np.max(np.abs(traj.c - oracle.c)))
    return summary


def cmd_spectrum(cfg: RunConfig) -> dict[str, Any]:
    J = cfg.spectral_density()
    bs = find_bound_state(J, cfg.omega0)
    spec = discretized_spectrum(J, cfg.omega0, cfg.n_modes, cfg.omega_max)
    rhs = bound_state_threshold(J)
    try:
        omega_c_star = locate_threshold(J, cfg.omega0, "omega_c", tol=1e-9) if J.eta > 0 else None
    except ReservoirError:
        omega_c_star = None
    record = {
        "E_b": None if bs is None else bs.E_b,
        "Z": None if bs is None else bs.Z,
        "converged": True if bs is None else bs.converged,
        "bound_state": bs is not None,
        "criterion_lhs": cfg.omega0,
        "criterion_rhs": rhs,
        "omega_c_threshold": omega_c_star,
        "n_modes": spec.n_modes,
        "omega_max": spec.omega_max,
        "ground_eigenvalue": float(spec.eigenvalues[0]),
    }
    out = _output(cfg, "spectrum.csv")
    records.write_csv(out, ("E",), ((e,) for e in spec.eigenvalues))
    records.write_json(out.with_suffix(".json"), record)
    return {"out": str(out), **record}


def _qfi_columns(cfg: RunConfig) -> tuple[np.ndarray, dict[str, np.ndarray | None]]:
    J = cfg.spectral_density()
    grid = cfg.grid()
    sel = cfg.selector()
    cols: dict[str, np.ndarray | None] = {}
    for method in ("exact", "markovian", "asymptotic"):
        if method not in cfg.methods:
            cols[method] = None
            continue
        if method == "asymptotic" and find_bound_state(J, cfg.omega0) is None:
            cols[method] = None
            continue
        cols[method] = qfi_series(J, cfg.omega0, grid, sel, cfg.probe, cfg.N, method).F
    return grid.times, cols


def cmd_qfi(cfg: RunConfig) -> dict[str, Any]:
    if not cfg.spectral_density().is_ohmic:
        raise UnsupportedOperationError("qfi runs need an Ohmic-family spectral density")
    if not set(cfg.methods) & {"exact", "markovian", "asymptotic"}:
        raise ConfigurationError("qfi needs at least one of exact, markovian, asymptotic")
    t, cols = _qfi_columns(cfg)
    empty = [None] * len(t)
    series = [cols[m] if cols[m] is not None else empty for m in ("exact", "markovian", "asymptotic")]
    out = _output(cfg, "qfi.csv")
    records.write_csv(out, records.QFI_HEADER, zip(t, *series))
    return {"out": str(out), "methods": [m for m, v in cols.items() if v is not None]}


def _sweep_point(cfg: RunConfig, method: str) -> tuple[np.ndarray, np.ndarray]:
    J = cfg.spectral_density()
    grid = cfg.grid()
    if method == "asymptotic" and find_bound_state(J, cfg.omega0) is None:
        return grid.times, np.full(grid.n_steps + 1, np.nan)
    return grid.times, qfi_series(J, cfg.omega0, grid, cfg.selector(), cfg.probe, cfg.N, method).F


def cmd_sweep(cfg: RunConfig, jobs: int = 1) -> dict[str, Any]:
    if cfg.sweep_axis is None or not cfg.sweep_values:
        raise ConfigurationError("sweep needs an axis and a nonempty value list")
    method = next((m for m in ("exact", "markovian", "asymptotic") if m in cfg.methods), None)
    if method is None:
        raise ConfigurationError("sweep needs one of exact, markovian, asymptotic")
    values = sorted(set(cfg.sweep_values))
    points = [cfg.with_axis(cfg.sweep_axis, v) for v in values]
    if jobs > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, points, [method] * len(points)))
    else:
        results = [_sweep_point(p, method) for p in points]
    axis = cfg.sweep_axis

    def rows():
        for v, (t, F) in zip(values, results):
            for tk, Fk in zip(t, F):
                yield (axis, v, tk, Fk)

    out = _output(cfg, "sweep.csv")
    records.write_csv(out, records.SWEEP_HEADER, rows())
    return {"out": str(out), "axis": axis, "values": values, "method": method}


COMMANDS = {"evolve": cmd_evolve, "spectrum": cmd_spectrum, "qfi": cmd_qfi, "sweep": cmd_sweep}


def _float_list(text: str) -> list[float]:
    """``"7,7.5,8"`` or a range ``"start:stop:num"`` (inclusive, ``num`` points)."""
    if ":" in text:
        start, stop, num = text.split(":")
        return [float(v) for v in np.linspace(float(start), float(stop), int(num))]
    return [float(v) for v in text.split(",") if v]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reservoir-qfi",
        description="Sense a zero-temperature reservoir with N two-level probes.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="YAML/JSON run configuration")
        p.add_argument("--preset", help="named parameter set, e.g. fig2f")
        p.add_argument("--out", help="output path")
        p.add_argument("--jobs", type=int, default=1, help="parallel sweep points")
        p.add_argument("--eta", type=float)
        p.add_argument("--s", type=float)
        p.add_argument("--omega-c", dest="omega_c", type=float)
        p.add_argument("--omega0", type=float)
        p.add_argument("--probe", choices=("uncorrelated", "ghz"))
        p.add_argument("--N", "-N", dest="N", type=int)
        p.add_argument("--theta", choices=("s", "omega_c", "eta"))
        p.add_argument("--t-max", dest="t_max", type=float)
        p.add_argument("--n-steps", dest="n_steps", type=int)
        p.add_argument("--methods", type=lambda v: [m for m in v.split(",") if m],
                       help=f"comma-separated subset of {','.join(RUN_METHODS)}")
        p.add_argument("--fd-step", dest="fd_step", type=float)
        p.add_argument("--n-modes", dest="n_modes", type=int)
        p.add_argument("--omega-max", dest="omega_max", type=float)
        if name == "sweep":
            p.add_argument("--axis", dest="sweep_axis", choices=SWEEP_AXES)
            p.add_argument("--values", dest="sweep_values", type=_float_list,
                           help="comma list or start:stop:num")
    return parser


_NON_CONFIG = {"command", "config", "preset", "jobs"}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    layers: list[dict[str, Any]] = []
    if args.preset:
        layers.append(preset(args.preset))
    if args.config:
        layers.append(records.load_config(args.config))
    flags = {k: v for k, v in vars(args).items() if k not in _NON_CONFIG and v is not None}
    if "sweep_axis" in flags or "sweep_values" in flags:
        flags["sweep"] = {k.split("_")[1]: flags.pop(k) for k in ("sweep_axis", "sweep_values") if k in flags}
    layers.append(flags)
    return build_config(*layers)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.jobs < 1:
            raise ConfigurationError("--jobs must be >= 1")
        if args.command == "sweep":
            summary = cmd_sweep(cfg, args.jobs)
        else:
            summary = COMMANDS[args.command](cfg)
    except DivergenceError as exc:
        print(f"error: solver diverged: {exc}", file=sys.stderr)
        return EXIT_DIVERGENCE
    except (ConfigurationError, DomainError, UnsupportedOperationError) as exc:
        print(f"error: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ReservoirError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    print(json.dumps(summary, sort_keys=True, default=float), file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
