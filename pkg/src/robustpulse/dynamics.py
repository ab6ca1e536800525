"""Two independent routes to the evolution operator of H = Omega sz + beta sx.

Analytic route (chi-formalism, single-axis driving, eta = -1):

    u11 = cos(chi0) e^{i xi_-},   u21 = -i sin(chi0) e^{i xi_+},
    xi_pm = Phi(chi0) -/+ (1/2) arctan(Phi'(chi0) sin(2 chi0)).

The arctan is the continuous branch of the arcsec appearing in the
endpoint formula: both give the same angle for Phi' > 0, and continuity
of xi_pm along the trajectory forces the signed form when Phi' < 0.

Numeric route: adaptive embedded Runge-Kutta integration of
i dU/dt = H(t) U with the waveform cubic-spline interpolated and
quasi-static noise injected as beta -> beta0 + dbeta,
Omega -> Omega0 + deps * g(t).

For a time-antisymmetric pulse run from -t_f to t_f the two halves
compose as U_tot = U sz U^dag sz, with U the 0 -> t_f evolution.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline, PchipInterpolator

from .ansatz import PhaseFunction
from .errors import IntegratorError, ValidationError
from .synthesis import ChiTrajectory, Pulse

UNITARITY_TOL = 1e-10


@dataclass(frozen=True)
class EvolutionOperator:
    """2x2 unitary stored as its first column (u11, u21).

    The full matrix is [[u11, -conj(u21)], [u21, conj(u11)]] and the norm
    constraint |u11|^2 + |u21|^2 = 1 must hold to 1e-10.
    """

    u11: complex
    u21: complex

    def __post_init__(self):
        if self.unitarity_residual > UNITARITY_TOL:
            raise ValidationError(
                f"norm defect {self.unitarity_residual:.2e} exceeds 1e-10")

    @property
    def unitarity_residual(self) -> float:
        return abs(abs(self.u11) ** 2 + abs(self.u21) ** 2 - 1.0)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.u11, -np.conj(self.u21)],
                         [self.u21, np.conj(self.u11)]])

    @classmethod
    def identity(cls) -> "EvolutionOperator":
        return cls(1.0 + 0j, 0.0 + 0j)

    @classmethod
    def from_matrix(cls, u: np.ndarray) -> "EvolutionOperator":
        """Project a (possibly U(2)) matrix onto the SU(2) storage form."""
        det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
        if abs(abs(det) - 1.0) > 1e-8:
            raise ValidationError(f"matrix is not unitary: |det| = {abs(det)}")
        v = u / np.sqrt(det)
        return cls(complex(v[0, 0]), complex(v[1, 0]))

    def to_json_dict(self) -> dict:
        m = self.matrix
        return {
            "u11": [m[0, 0].real, m[0, 0].imag],
            "u12": [m[0, 1].real, m[0, 1].imag],
            "u21": [m[1, 0].real, m[1, 0].imag],
            "u22": [m[1, 1].real, m[1, 1].imag],
            "unitarity_residual": self.unitarity_residual,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "EvolutionOperator":
        return cls(complex(*d["u11"]), complex(*d["u21"]))


@dataclass(frozen=True)
class NoiseRealization:
    """Quasi-static noise: constant over one pulse application."""

    delta_beta: float = 0.0
    delta_epsilon: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.delta_beta)
                and math.isfinite(self.delta_epsilon)):
            raise ValidationError("noise amplitudes must be finite")


def analytic_evolution(pf: PhaseFunction, trajectory: ChiTrajectory,
                       t_index: int) -> EvolutionOperator:
    """Noiseless U(t) from the closed-form chi-parametrization.

    Valid for the evolution started at chi(0) = 0 with beta0 = 1 and no
    noise; exact unitarity by construction.
    """
    chi = float(trajectory.chi[t_index])
    phi, dphi, _ = pf.evaluate(chi)
    phi = float(phi)
    half = 0.5 * math.atan(float(dphi) * math.sin(2 * chi))
    u11 = math.cos(chi) * np.exp(1j * (phi + half))
    u21 = -1j * math.sin(chi) * np.exp(1j * (phi - half))
    return EvolutionOperator(complex(u11), complex(u21))


def compose_antisymmetric(half: EvolutionOperator) -> EvolutionOperator:
    """Full antisymmetric-pulse evolution U_tot = U sz U^dag sz.

    Component form: U_tot,11 = |u11|^2 - |u21|^2 (purely real) and
    U_tot,21 = 2 conj(u11) u21.
    """
    u11, u21 = half.u11, half.u21
    tot11 = abs(u11) ** 2 - abs(u21) ** 2
    tot21 = 2.0 * np.conj(u11) * u21
    return EvolutionOperator(complex(tot11), complex(tot21))


def rotating_frame_beta(E: float, omega: float) -> float:
    """Effective splitting (omega - E)/2 of the rotating-frame Hamiltonian."""
    return (omega - E) / 2.0


def _g_spline(pulse: Pulse, g_model: str, g_table=None):
    """Return g(t) for the requested epsilon-noise model.

    amplitude: g = Omega0(t); additive: g = 1; custom: monotone-cubic
    interpolated table g(chi) evaluated on |chi0(t)| and oddly extended
    for antisymmetric pulses.
    """
    if g_model == "amplitude":
        omega0 = CubicSpline(pulse.times, pulse.omega)
        return lambda t: float(omega0(t))
    if g_model == "additive":
        return lambda t: 1.0
    if g_model == "custom":
        if g_table is None:
            raise ValidationError("custom g model needs a (chi, g) table")
        chi_grid, g_vals = g_table
        interp = PchipInterpolator(np.asarray(chi_grid), np.asarray(g_vals))
        if pulse.source is None:
            raise ValidationError("custom g model needs pulse.source")
        from .synthesis import invert_chi
        traj = invert_chi(pulse.source, max(len(pulse.times) // 2 + 1, 33))
        chi_of_t = CubicSpline(traj.times, traj.chi)

        def g(t):
            val = float(interp(float(chi_of_t(abs(t)))))
            if pulse.antisymmetric and t < 0:
                return -val
            return val

        return g
    raise ValidationError(f"unknown g model {g_model!r}")


def propagate(pulse: Pulse, noise: NoiseRealization | None = None,
              g_model: str = "amplitude", g_table=None, t_eval=None,
              rtol: float = 1e-12, atol: float = 1e-14,
              return_drift: bool = False):
    """Integrate i dU/dt = [(Omega0 + deps g) sz + (beta0 + dbeta) sx] U.

    Runs over the pulse's full sample span (covering [-t_f, t_f] for
    antisymmetric pulses). Only the first column of U is integrated; the
    SU(2) structure provides the rest. The norm drift is removed by a
    single renormalization at readout; pass return_drift=True to get
    (operator, drift) with the measured defect.

    With t_eval (sorted interior times), returns a list of
    EvolutionOperator at those times instead of the final one.
    """
    noise = noise or NoiseRealization()
    omega0 = CubicSpline(pulse.times, pulse.omega)
    beta = pulse.beta0 + noise.delta_beta
    deps = noise.delta_epsilon
    if deps != 0.0:
        g = _g_spline(pulse, g_model, g_table)

        def drive(t):
            return float(omega0(t)) + deps * g(t)
    else:
        def drive(t):
            return float(omega0(t))

    def rhs(t, y):
        om = drive(t)
        u11 = y[0] + 1j * y[1]
        u21 = y[2] + 1j * y[3]
        d11 = -1j * (om * u11 + beta * u21)
        d21 = -1j * (beta * u11 - om * u21)
        return [d11.real, d11.imag, d21.real, d21.imag]

    t0, t1 = float(pulse.times[0]), float(pulse.times[-1])
    sol = solve_ivp(rhs, (t0, t1), [1.0, 0.0, 0.0, 0.0], method="DOP853",
                    rtol=rtol, atol=atol,
                    t_eval=None if t_eval is None else np.asarray(t_eval))
    if not sol.success:
        raise IntegratorError(f"propagation failed: {sol.message}")

    def pack(col):
        u11 = col[0] + 1j * col[1]
        u21 = col[2] + 1j * col[3]
        norm = math.sqrt(abs(u11) ** 2 + abs(u21) ** 2)
        op = EvolutionOperator(complex(u11 / norm), complex(u21 / norm))
        return op, abs(norm - 1.0)

    if t_eval is None:
        op, drift = pack(sol.y[:, -1])
        return (op, drift) if return_drift else op
    ops, drifts = zip(*(pack(sol.y[:, k]) for k in range(sol.y.shape[1])))
    return (list(ops), max(drifts)) if return_drift else list(ops)
