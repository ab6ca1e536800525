"""Command-line front end: solve, synth, verify-tables, sweep, potential.

Every command writes its outputs plus the fully-resolved configuration
into a run directory, so any artifact can be regenerated byte for byte.
Exit codes: 0 success, 1 usage error, 2 solver exhaustion, 3 synthesis
failure, 4 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from .ansatz import Family, PhaseFunction, TargetRotation
from .benchmark import noise_sweep, square_baseline
from .constraints import GModel, NoiseKind, NoiseSpec, error_potential
from .dynamics import propagate
from .errors import (
    EndpointDivergenceError,
    RobustPulseError,
    SolverExhaustionError,
)
from .solver import (
    SolveRequest,
    TableKind,
    load_gate_table,
    solutions_to_json,
    solve,
    verify_entry,
)
from .synthesis import Pulse, pulse_to_csv, sphere_curve, sphere_curve_to_csv, synthesize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_EXHAUSTED = 2
EXIT_SYNTHESIS = 3
EXIT_VERIFICATION = 4


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        raise _UsageError(message)


def _default_workers() -> int:
    env = os.environ.get("PULSE_WORKERS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        return json.load(fh)


def _resolve(args: argparse.Namespace, config: dict, keys: dict) -> dict:
    """Flags override config-file values, which override defaults."""
    resolved = {}
    for key, default in keys.items():
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in config:
            resolved[key] = config[key]
        else:
            resolved[key] = default
    return resolved

def _echo_config(outdir: Path, command: str, resolved: dict) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    payload = {"command": command, **resolved}
    (outdir / "config.json").write_text(
        json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _parse_target(text: str) -> TargetRotation:
    parts = text.split(",")
    if len(parts) != 2:
        raise _UsageError("--target expects 'theta,phi'")
    try:
        return TargetRotation(float(parts[0]), float(parts[1]))
    except ValueError as exc:
        raise _UsageError(f"bad --target: {exc}") from exc


def _parse_grid(text: str) -> np.ndarray:
    try:
        lo, hi, num = text.split(",")
        return np.linspace(float(lo), float(hi), int(num))
    except ValueError as exc:
        raise _UsageError(f"bad grid spec {text!r}: want lo,hi,n") from exc


def _read_phase_function(path: str) -> PhaseFunction:
    with open(path) as fh:
        return PhaseFunction.from_json_dict(json.load(fh))


def _scaled_pulse(pulse: Pulse, beta0_mhz: float) -> Pulse:
    """Present a dimensionless pulse in microseconds / MHz."""
    return Pulse(beta0_mhz, pulse.times / beta0_mhz,
                 pulse.omega * beta0_mhz, pulse.t_f / beta0_mhz,
                 pulse.antisymmetric, pulse.source)


def _cmd_solve(args) -> int:
    config = _load_config(args.config)
    resolved = _resolve(args, config, {
        "target": None, "noise": "epsilon", "family": "sin2-sin3",
        "seed": 0, "starts": 32, "tol": 1e-8, "free": None, "base": None,
        "n3": 1, "g_model": "amplitude", "out": "run", "workers": None,
    })
    if resolved["target"] is None:
        raise _UsageError("--target is required")
    target = _parse_target(resolved["target"])
    family = Family.parse(resolved["family"])
    noise = resolved["noise"]
    if noise == "both":
        kinds = frozenset({NoiseKind.BETA, NoiseKind.EPSILON})
    elif noise in ("beta", "epsilon"):
        kinds = frozenset({NoiseKind(noise)})
    else:
        raise _UsageError("--noise must be beta, epsilon, or both")
    if resolved["free"] is not None:
        free = tuple(int(i) for i in str(resolved["free"]).split(","))
    elif family is Family.ANALYTIC_BETA:
        free = ()
    elif family is Family.SIN2_MIXED:
        free = (1, 2, 3, 4)
    else:
        free = (1, 2, 3)
    base = None
    if resolved["base"] is not None:
        base = tuple(float(v) for v in str(resolved["base"]).split(","))
    workers = resolved["workers"] or _default_workers()
    resolved["workers"] = workers
    outdir = Path(resolved["out"])
    _echo_config(outdir, "solve", resolved)
    req = SolveRequest(target=target, family=family, free_indices=free,
                       noise_kinds=kinds, g_model=GModel(resolved["g_model"]),
                       starts=int(resolved["starts"]),
                       seed=int(resolved["seed"]), tol=float(resolved["tol"]),
                       base_coefficients=base, aux={"n3": int(resolved["n3"])})
    try:
        results = solve(req, workers=workers)
    except SolverExhaustionError as exc:
        (outdir / "solutions.json").write_text(json.dumps(
            {"error": str(exc), "best_objective": exc.best_objective},
            sort_keys=True, indent=2) + "\n")
        print(f"solver exhausted: {exc}", file=sys.stderr)
        return EXIT_EXHAUSTED
    (outdir / "solutions.json").write_text(solutions_to_json(results) + "\n")
    print(f"{len(results)} solution(s) written to {outdir / 'solutions.json'}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    config = _load_config(args.config)
    resolved = _resolve(args, config, {
        "phase_function": None, "samples": 10001, "general": False,
        "units": None, "beta0_mhz": 1.0, "out": "run",
    })
    if resolved["phase_function"] is None:
        raise _UsageError("--phase-function is required")
    pf = _read_phase_function(resolved["phase_function"])
    outdir = Path(resolved["out"])
    _echo_config(outdir, "synth", resolved)
    try:
        pulse = synthesize(pf, n_samples=int(resolved["samples"]),
                           antisymmetric=not resolved["general"])
    except EndpointDivergenceError as exc:
        print(f"synthesis failed: {exc}", file=sys.stderr)
        return EXIT_SYNTHESIS
    if resolved["units"] == "mhz":
        pulse = _scaled_pulse(pulse, float(resolved["beta0_mhz"]))
    elif resolved["units"] is not None:
        raise _UsageError("--units supports only 'mhz'")
    pulse_to_csv(pulse, str(outdir / "waveform.csv"))
    sphere_curve_to_csv(sphere_curve(pf, int(resolved["samples"])),
                        str(outdir / "sphere_curve.csv"))
    print(f"waveform written to {outdir / 'waveform.csv'} "
          f"(duration {pulse.duration:.6g})")
    return EXIT_OK


def _cmd_verify_tables(args) -> int:
    config = _load_config(args.config)
    resolved = _resolve(args, config, {"table": "both", "out": "run",
                                       "samples": 10001})
    outdir = Path(resolved["out"])
    _echo_config(outdir, "verify-tables", resolved)
    kinds = {"epsilon": [TableKind.EPSILON_TABLE],
             "beta": [TableKind.BETA_TABLE],
             "both": [TableKind.EPSILON_TABLE, TableKind.BETA_TABLE]}
    if resolved["table"] not in kinds:
        raise _UsageError("--table must be epsilon, beta, or both")
    rows = []
    all_passed = True
    for kind in kinds[resolved["table"]]:
        for entry in load_gate_table(kind):
            report = verify_entry(entry, n_samples=int(resolved["samples"]))
            rows.append({
                "table": kind.value,
                "label": entry.label,
                "abs_residual": report.residual.magnitude,
                "infidelity": report.realized_infidelity,
                "passed": report.passed,
            })
            all_passed &= report.passed
            print(f"[{kind.value}] {entry.label}: "
                  f"|E|={report.residual.magnitude:.3e} "
                  f"infid={report.realized_infidelity:.3e} "
                  f"{'PASS' if report.passed else 'FAIL'}")
    (outdir / "table_report.json").write_text(
        json.dumps(rows, sort_keys=True, indent=2) + "\n")
    return EXIT_OK if all_passed else EXIT_VERIFICATION


def _cmd_sweep(args) -> int:
    config = _load_config(args.config)
    resolved = _resolve(args, config, {
        "phase_function": None, "noise": "beta", "samples": 10001,
        "grid": None, "out": "run", "workers": None, "g_model": "amplitude",
    })
    if resolved["phase_function"] is None:
        raise _UsageError("--phase-function is required")
    if resolved["noise"] not in ("beta", "epsilon"):
        raise _UsageError("--noise must be beta or epsilon")
    pf = _read_phase_function(resolved["phase_function"])
    workers = resolved["workers"] or _default_workers()
    resolved["workers"] = workers
    outdir = Path(resolved["out"])
    _echo_config(outdir, "sweep", resolved)
    grid = None
    if resolved["grid"] is not None:
        lo, hi, num = str(resolved["grid"]).split(",")
        grid = np.logspace(math.log10(float(lo)), math.log10(float(hi)),
                           int(num))
    pulse = synthesize(pf, n_samples=int(resolved["samples"]))
    kind = NoiseKind(resolved["noise"])
    corrected = noise_sweep(pulse, kind, grid=grid,
                            g_model=resolved["g_model"], workers=workers)
    baseline = square_baseline(propagate(pulse))
    uncorrected = noise_sweep(baseline, kind, grid=grid, workers=workers)
    corrected.to_csv(str(outdir / "corrected_sweep.csv"))
    uncorrected.to_csv(str(outdir / "baseline_sweep.csv"))
    (outdir / "sweeps.json").write_text(json.dumps(
        {"corrected": corrected.to_json_dict(),
         "baseline": uncorrected.to_json_dict()},
        sort_keys=True, indent=2) + "\n")
    print(f"corrected fit: {corrected.fit_coefficient:.4g} "
          f"* x^{corrected.fit_exponent:.3f}")
    print(f"baseline  fit: {uncorrected.fit_coefficient:.4g} "
          f"* x^{uncorrected.fit_exponent:.3f}")
    return EXIT_OK


def _cmd_potential(args) -> int:
    config = _load_config(args.config)
    resolved = _resolve(args, config, {
        "template": None, "axes": "2,3", "grid1": None, "grid2": None,
        "noise": "epsilon", "out": "run",
    })
    if resolved["template"] is None:
        raise _UsageError("--template is required")
    if resolved["grid1"] is None or resolved["grid2"] is None:
        raise _UsageError("--grid1 and --grid2 are required")
    pf = _read_phase_function(resolved["template"])
    axes = tuple(int(i) for i in str(resolved["axes"]).split(","))
    if len(axes) != 2:
        raise _UsageError("--axes expects two comma-separated indices")
    outdir = Path(resolved["out"])
    _echo_config(outdir, "potential", resolved)
    noise = NoiseSpec(NoiseKind(resolved["noise"]))
    grid = error_potential(pf, axes, _parse_grid(str(resolved["grid1"])),
                           _parse_grid(str(resolved["grid2"])), noise)
    grid.to_csv(str(outdir / "error_potential.csv"))
    print(f"grid written to {outdir / 'error_potential.csv'} "
          f"(min |E| = {grid.values.min():.3e})")
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="robustpulse",
                     description="Smooth noise-robust pulses for two-level systems")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override it")
        p.add_argument("--out", help="output directory (default: run)")

    p = sub.add_parser("solve", help="find constraint-satisfying pulses")
    common(p)
    p.add_argument("--target", help="theta,phi in radians")
    p.add_argument("--noise", choices=["beta", "epsilon", "both"])
    p.add_argument("--family")
    p.add_argument("--seed", type=int)
    p.add_argument("--starts", type=int)
    p.add_argument("--tol", type=float)
    p.add_argument("--free", help="comma-separated free coefficient indices")
    p.add_argument("--base", help="comma-separated base coefficients")
    p.add_argument("--n3", type=int)
    p.add_argument("--g-model", dest="g_model",
                   choices=["amplitude", "additive"])
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("synth", help="export a waveform CSV")
    common(p)
    p.add_argument("--phase-function", dest="phase_function",
                   help="phase-function JSON file")
    p.add_argument("--samples", type=int)
    p.add_argument("--general", action="store_const", const=True,
                   help="synthesize a one-sided (non-antisymmetric) pulse")
    p.add_argument("--units", choices=["mhz"])
    p.add_argument("--beta0-mhz", dest="beta0_mhz", type=float)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("verify-tables", help="regression-check gate tables")
    common(p)
    p.add_argument("--table", choices=["epsilon", "beta", "both"])
    p.add_argument("--samples", type=int)
    p.set_defaults(func=_cmd_verify_tables)

    p = sub.add_parser("sweep", help="noise sweeps: pulse vs square baseline")
    common(p)
    p.add_argument("--phase-function", dest="phase_function")
    p.add_argument("--noise", choices=["beta", "epsilon"])
    p.add_argument("--grid", help="lo,hi,n (log-spaced)")
    p.add_argument("--samples", type=int)
    p.add_argument("--g-model", dest="g_model",
                   choices=["amplitude", "additive"])
    p.add_argument("--workers", type=int)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("potential", help="error-potential grid CSV")
    common(p)
    p.add_argument("--template", help="phase-function JSON file")
    p.add_argument("--axes", help="two coefficient indices, e.g. 2,3")
    p.add_argument("--grid1", help="lo,hi,n for the first axis")
    p.add_argument("--grid2", help="lo,hi,n for the second axis")
    p.add_argument("--noise", choices=["beta", "epsilon"])
    p.set_defaults(func=_cmd_potential)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (RobustPulseError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
