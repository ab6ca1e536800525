"""Time-domain pulse synthesis from a phase function.

The trajectory chi0(t) follows from inverting the arc-length relation

    beta t = int_0^chi sqrt(1 + Phi'(x)^2 sin^2(2x)) dx,

equivalently chi0 solves d(chi)/dt = beta / sqrt(1 + Phi'^2 sin^2(2 chi)),
which keeps |d(chi)/dt| <= beta automatically. The drive follows from

    Omega(chi)/beta = -[Phi'' s + 4 Phi' c + 2 Phi'^3 s^2 c]
                      / (2 [1 + Phi'^2 s^2]^(3/2)),   s = sin 2chi, c = cos 2chi,

and time-antisymmetric pulses are exported on [-t_f, t_f] with
Omega(-t) = -Omega(t) exactly. Everything internal uses beta0 = 1; physical
units are a presentation concern of the CLI.

The integrand of the arc length is the line element of
ds^2 = d(chi)^2 + sin^2(2 chi) d(Phi)^2, so the pulse duration is the
length of the curve traced by (chi, Phi(chi)); sphere_curve exports that
curve as (polar, azimuth) = (chi/2, Phi/2) samples.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from ._quadrature import quad_real
from .ansatz import PhaseFunction
from .errors import (
    DomainError,
    EndpointDivergenceError,
    StiffnessError,
    ValidationError,
)

OMEGA_DIVERGENCE_FACTOR = 1e6


def speed_factor(pf: PhaseFunction, chi):
    """sqrt(1 + Phi'(chi)^2 sin^2(2 chi)); equals beta0 / chidot."""
    _, dp, _ = pf.evaluate(chi)
    return np.sqrt(1.0 + dp ** 2 * np.sin(2 * np.asarray(chi, dtype=float)) ** 2)


def arc_length(pf: PhaseFunction, chi: float, tol: float = 1e-12) -> float:
    """beta0 * t at which the trajectory reaches chi (adaptive quadrature)."""
    if chi < 0 or chi > pf.chi_f + 1e-9 * max(1.0, pf.chi_f):
        raise DomainError(f"chi = {chi} outside [0, {pf.chi_f}]")
    val, _ = quad_real(lambda x: float(speed_factor(pf, x)),
                       0.0, min(chi, pf.chi_f), tol=tol)
    return val


@dataclass(frozen=True)
class ChiTrajectory:
    """chi0 on a uniform time grid over [0, t_f], with its rate."""

    times: np.ndarray
    chi: np.ndarray
    chidot: np.ndarray

    @property
    def t_f(self) -> float:
        return float(self.times[-1])


def invert_chi(pf: PhaseFunction, n_samples: int = 10001) -> ChiTrajectory:
    """Integrate d(chi)/dt = 1/speed_factor on a uniform grid over [0, t_f].

    t_f comes from the arc-length quadrature; the round trip
    arc_length(chi[i]) = t[i] holds to 1e-9.
    """
    if n_samples < 16:
        raise ValidationError("n_samples must be >= 16")
    t_f = arc_length(pf, pf.chi_f)
    times = np.linspace(0.0, t_f, n_samples)
    if t_f == 0.0:
        z = np.zeros(n_samples)
        return ChiTrajectory(times, z, np.ones(n_samples))

    def rhs(_t, y):
        return [1.0 / float(speed_factor(pf, min(y[0], pf.chi_f)))]

    sol = solve_ivp(rhs, (0.0, t_f), [0.0], t_eval=times,
                    method="DOP853", rtol=1e-12, atol=1e-14)
    if not sol.success:
        chi_last = float(sol.y[0, -1]) if sol.y.size else 0.0
        raise StiffnessError(
            f"trajectory integration failed: {sol.message}", chi=chi_last)
    chi = sol.y[0]
    if abs(chi[-1] - pf.chi_f) > 1e-8 * max(1.0, pf.chi_f):
        raise StiffnessError(
            f"trajectory endpoint {chi[-1]} missed chi_f = {pf.chi_f}",
            chi=float(chi[-1]))
    chi = np.clip(chi, 0.0, pf.chi_f)
    chi[-1] = pf.chi_f
    chidot = 1.0 / speed_factor(pf, chi)
    return ChiTrajectory(times, chi, chidot)


def omega_of_chi(pf: PhaseFunction, chi):
    """Drive amplitude Omega(chi)/beta0 in closed form.

    The expression is regular on the whole interval: with Phi'(0) = 0 the
    numerator vanishes at chi = 0, so no special-casing is needed there.
    """
    x = np.asarray(chi, dtype=float)
    _, dp, d2p = pf.evaluate(x)
    s, c = np.sin(2 * x), np.cos(2 * x)
    num = d2p * s + 4 * dp * c + 2 * dp ** 3 * s ** 2 * c
    den = 2 * (1 + dp ** 2 * s ** 2) ** 1.5
    out = -num / den
    return float(out) if np.isscalar(chi) else out


@dataclass(frozen=True)
class Pulse:
    """Sampled waveform {t_i, Omega_i} with beta0 = 1 internally.

    For antisymmetric pulses the samples cover [-t_f, t_f] (odd waveform)
    and t_f is the half-duration; general pulses cover [0, t_f].
    """

    beta0: float
    times: np.ndarray
    omega: np.ndarray
    t_f: float
    antisymmetric: bool
    source: PhaseFunction | None = None

    @property
    def samples(self) -> np.ndarray:
        return np.column_stack([self.times, self.omega])

    @property
    def duration(self) -> float:
        return float(self.times[-1] - self.times[0])


def synthesize(pf: PhaseFunction, n_samples: int = 10001,
               antisymmetric: bool = True) -> Pulse:
    """Sample Omega(chi0(t)) on a uniform time grid.

    Antisymmetric pulses are mirrored about t = 0 so the export covers
    [-t_f, t_f] with Omega(-t) = -Omega(t) holding exactly sample by
    sample. General pulses keep [0, t_f] and must end with a finite
    amplitude; |Omega(chi_f)| > 1e6 beta0 raises EndpointDivergenceError.
    """
    traj = invert_chi(pf, n_samples)
    omega = np.atleast_1d(omega_of_chi(pf, traj.chi))
    if antisymmetric:
        times = np.concatenate([-traj.times[::-1], traj.times[1:]])
        omega = np.concatenate([-omega[::-1], omega[1:]])
        return Pulse(1.0, times, omega, traj.t_f, True, pf)
    if abs(omega[-1]) > OMEGA_DIVERGENCE_FACTOR:
        raise EndpointDivergenceError(
            f"|Omega(chi_f)| = {abs(omega[-1]):.3e} exceeds 1e6 * beta0")
    return Pulse(1.0, traj.times.copy(), omega, traj.t_f, False, pf)


def sphere_curve(pf: PhaseFunction, n_samples: int = 1001) -> np.ndarray:
    """(polar, azimuth) = (chi/2, Phi(chi)/2) sampled uniformly in chi.

    The first point is the north pole (0, 0). The curve length measured
    with ds^2 = d(chi)^2 + sin^2(2 chi) d(Phi)^2 converges to beta0 * t_f
    under refinement (see curve_length).
    """
    if n_samples < 2:
        raise ValidationError("n_samples must be >= 2")
    chi = np.linspace(0.0, pf.chi_f, n_samples)
    phi, _, _ = pf.evaluate(chi)
    return np.column_stack([chi / 2.0, phi / 2.0])


def curve_length(points: np.ndarray) -> float:
    """Discrete length of a sphere_curve under the pulse-duration metric.

    Midpoint rule on ds^2 = d(chi)^2 + sin^2(2 chi) d(Phi)^2 with
    chi = 2 * polar and Phi = 2 * azimuth.
    """
    chi = 2.0 * points[:, 0]
    phi = 2.0 * points[:, 1]
    dchi = np.diff(chi)
    dphi = np.diff(phi)
    mid = 0.5 * (chi[1:] + chi[:-1])
    return float(np.sum(np.sqrt(dchi ** 2 + np.sin(2 * mid) ** 2 * dphi ** 2)))


# --- CSV interchange -----------------------------------------------------

def pulse_to_csv(pulse: Pulse, path_or_file) -> None:
    """Write `# beta0=`, `# t_f=`, `# antisymmetric=` headers then t,omega rows."""
    own = isinstance(path_or_file, (str, bytes))
    fh = open(path_or_file, "w") if own else path_or_file
    try:
        fh.write(f"# beta0={pulse.beta0:.17g}\n")
        fh.write(f"# t_f={pulse.t_f:.17g}\n")
        fh.write(f"# antisymmetric={1 if pulse.antisymmetric else 0}\n")
        fh.write("t,omega\n")
        for t, om in zip(pulse.times, pulse.omega):
            fh.write(f"{t:.17g},{om:.17g}\n")
    finally:
        if own:
            fh.close()


def pulse_from_csv(path_or_file) -> Pulse:
    """Read a waveform written by pulse_to_csv."""
    own = isinstance(path_or_file, (str, bytes))
    fh = open(path_or_file, "r") if own else path_or_file
    try:
        header: dict[str, str] = {}
        rows = []
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line[1:].strip().partition("=")
                header[key.strip()] = value.strip()
            elif line != "t,omega":
                t_str, _, om_str = line.partition(",")
                rows.append((float(t_str), float(om_str)))
    finally:
        if own:
            fh.close()
    if not rows:
        raise ValidationError("no samples in waveform CSV")
    times = np.array([r[0] for r in rows])
    omega = np.array([r[1] for r in rows])
    return Pulse(float(header.get("beta0", 1.0)), times, omega,
                 float(header.get("t_f", times[-1])),
                 header.get("antisymmetric", "0") == "1")


def sphere_curve_to_csv(points: np.ndarray, path_or_file) -> None:
    """`polar,azimuth` rows for a sphere_curve sample array."""
    own = isinstance(path_or_file, (str, bytes))
    fh = open(path_or_file, "w") if own else path_or_file
    try:
        fh.write("polar,azimuth\n")
        for p, a in points:
            fh.write(f"{p:.17g},{a:.17g}\n")
    finally:
        if own:
            fh.close()
