"""Smooth noise-robust control pulses for driven two-level systems.

Design a phase function Phi(chi), synthesize the drive Omega(t) it
determines, verify the first-order error-cancelation constraints, and
benchmark the result against a square-pulse baseline under quasi-static
noise.
"""
from .ansatz import (
    EndpointSpec,
    Family,
    PhaseFunction,
    TargetRotation,
    ZetaFunction,
    analytic_beta_family,
    endpoint_conditions,
    eval_phase,
)
from .benchmark import (
    SquareSequence,
    SweepResult,
    default_noise_grid,
    first_order_sensitivity,
    fit_power_law,
    infidelity,
    noise_sweep,
    square_baseline,
)
from .constraints import (
    ConstraintResidual,
    ErrorPotential,
    GModel,
    NoiseKind,
    NoiseSpec,
    delta_chi_beta,
    delta_chi_epsilon,
    error_potential,
    residual_beta,
    residual_epsilon,
)
from .dynamics import (
    EvolutionOperator,
    NoiseRealization,
    analytic_evolution,
    compose_antisymmetric,
    propagate,
    rotating_frame_beta,
)
from .solver import (
    GateTableEntry,
    SolveRequest,
    SolveResult,
    TableKind,
    VerificationReport,
    load_gate_table,
    solutions_to_json,
    solve,
    verify_entry,
)
from .synthesis import (
    ChiTrajectory,
    Pulse,
    arc_length,
    curve_length,
    invert_chi,
    omega_of_chi,
    pulse_from_csv,
    pulse_to_csv,
    sphere_curve,
    sphere_curve_to_csv,
    synthesize,
)

__version__ = "0.1.0"

__all__ = [
    "ChiTrajectory", "ConstraintResidual", "EndpointSpec",
    "ErrorPotential", "EvolutionOperator", "Family", "GModel",
    "GateTableEntry", "NoiseKind", "NoiseRealization", "NoiseSpec",
    "PhaseFunction", "Pulse", "SolveRequest", "SolveResult",
    "SquareSequence", "SweepResult", "TableKind", "TargetRotation",
    "VerificationReport", "ZetaFunction", "analytic_beta_family",
    "analytic_evolution", "arc_length", "compose_antisymmetric",
    "curve_length", "default_noise_grid", "delta_chi_beta",
    "delta_chi_epsilon", "endpoint_conditions", "error_potential",
    "eval_phase", "first_order_sensitivity", "fit_power_law", "infidelity",
    "invert_chi", "load_gate_table", "noise_sweep", "omega_of_chi",
    "propagate", "pulse_from_csv", "pulse_to_csv", "residual_beta",
    "residual_epsilon", "rotating_frame_beta", "solutions_to_json", "solve",
    "sphere_curve", "sphere_curve_to_csv", "square_baseline", "synthesize",
    "verify_entry",
]
