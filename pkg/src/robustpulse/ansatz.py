"""Phase-function ansatz families and target-rotation endpoint conditions.

A control problem is encoded in a single real function Phi(chi) on
[0, chi_f] with Phi(0) = Phi'(0) = 0. Everything else (waveform, evolution
operator, noise residuals) derives from Phi and its first two derivatives,
which are evaluated in closed form here.

Families
--------
zero            Phi = 0 (free x-precession)
poly-sin3       Phi = a1 chi^2 + a2 chi^3 + a3 sin^3(pi chi / chi_f)
                      + a4 sin^3(2 pi chi / chi_f)
sin2-sin3       Phi = a1 sin^2(a2 chi) + a3 sin^3(pi chi / chi_f)
                      + a4 sin^3(2 pi chi / chi_f)
sin2-mixed      Phi = a1 sin^2(a2 chi) + a3 sin^3(N3 pi chi / chi_f)
                      + a4 sin^3(pi (phi - 4 chi) / phi)
                      + a5 sin^3(pi chi (phi - 4 chi) / 4),  phi = 4 chi_f
analytic-beta   Phi = [v + lam * zeta(v)] / n,  v = 4 chi - sin(4 chi),
                      chi_f = n pi / 4

The sin^3 terms and their first derivatives vanish at both endpoints, so
they can be tuned freely without moving the realized rotation.

For a time-antisymmetric pulse the realized gate is a rotation about an
xy-plane axis with angle phi = 4 chi_f and axis angle
theta = -arctan(Phi'(chi_f) sin(phi/2)); endpoint_conditions inverts this
mapping. The sign was fixed by propagating known pulse tables against
R(theta, phi) = exp[-i (cos(theta) sx + sin(theta) sy) phi/2].
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any

import numpy as np

from ._quadrature import quad_real
from .errors import (
    DegenerateZetaError,
    DomainError,
    UnrepresentableTargetError,
    ValidationError,
)
from .pauli import xy_rotation

_EPS = 1e-12


class Family(str, Enum):
    ZERO = "zero"
    POLY_SIN3 = "poly-sin3"
    SIN2_SIN3 = "sin2-sin3"
    SIN2_MIXED = "sin2-mixed"
    ANALYTIC_BETA = "analytic-beta"

    @classmethod
    def parse(cls, name: str) -> "Family":
        """Accept hyphen/underscore/case variants, e.g. 'sin2sin3'."""
        key = name.lower().replace("-", "").replace("_", "")
        for fam in cls:
            if fam.value.replace("-", "") == key:
                return fam
        raise ValidationError(f"unknown ansatz family {name!r}")


_N_COEFFS = {
    Family.ZERO: 0,
    Family.POLY_SIN3: 4,
    Family.SIN2_SIN3: 4,
    Family.SIN2_MIXED: 5,
    Family.ANALYTIC_BETA: 0,
}


def _sin3(amp, u, du, d2u=0.0):
    """Value and two chi-derivatives of amp * sin(u)^3 for u = u(chi)."""
    s, c = np.sin(u), np.cos(u)
    val = amp * s ** 3
    d1 = 3 * amp * s ** 2 * c * du
    d2 = 3 * amp * ((2 * s * c ** 2 - s ** 3) * du ** 2 + s ** 2 * c * d2u)
    return val, d1, d2


@dataclass(frozen=True)
class ZetaFunction:
    """Finite Fourier-sine series with period n*pi/2.

    zeta(v) = sum_m c_m sin(4 m v / n). Exact periodicity and closed-form
    derivatives come for free with this basis.
    """

    n: int
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        if self.n < 1:
            raise ValidationError("zeta period index n must be >= 1")
        object.__setattr__(self, "coefficients",
                           tuple(float(c) for c in self.coefficients))
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ValidationError("zeta coefficients must be finite")

    @property
    def period(self) -> float:
        return self.n * np.pi / 2

    def value(self, v):
        out = np.zeros_like(np.asarray(v, dtype=float))
        for m, c in enumerate(self.coefficients, start=1):
            out = out + c * np.sin(4 * m * np.asarray(v) / self.n)
        return out

    def derivative(self, v):
        out = np.zeros_like(np.asarray(v, dtype=float))
        for m, c in enumerate(self.coefficients, start=1):
            k = 4 * m / self.n
            out = out + c * k * np.cos(k * np.asarray(v))
        return out

    def second_derivative(self, v):
        out = np.zeros_like(np.asarray(v, dtype=float))
        for m, c in enumerate(self.coefficients, start=1):
            k = 4 * m / self.n
            out = out - c * k * k * np.sin(k * np.asarray(v))
        return out


@dataclass(frozen=True)
class PhaseFunction:
    """An ansatz Phi(chi) with parameters, valid on [0, chi_f]."""

    family: Family
    coefficients: tuple[float, ...]
    chi_f: float
    aux: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        object.__setattr__(self, "coefficients",
                           tuple(float(c) for c in self.coefficients))
        if not all(math.isfinite(c) for c in self.coefficients):
            raise ValidationError("coefficients must be finite")
        if not math.isfinite(self.chi_f) or self.chi_f < 0:
            raise ValidationError("chi_f must be finite and non-negative")
        want = _N_COEFFS[self.family]
        if len(self.coefficients) != want:
            raise ValidationError(
                f"family {self.family.value} takes {want} coefficients, "
                f"got {len(self.coefficients)}")
        if self.family is Family.SIN2_MIXED:
            n3 = self.aux.get("n3")
            if not isinstance(n3, int) or n3 < 1:
                raise ValidationError("sin2-mixed requires integer aux['n3'] >= 1")
        if self.family is Family.ANALYTIC_BETA:
            n = self.aux.get("n")
            if not isinstance(n, int) or n < 1:
                raise ValidationError("analytic-beta requires integer aux['n'] >= 1")
            if abs(self.chi_f - n * np.pi / 4) > 1e-9:
                raise ValidationError("analytic-beta requires chi_f = n*pi/4")
            if not math.isfinite(self.aux.get("lam", 0.0)):
                raise ValidationError("analytic-beta lambda must be finite")

    def _zeta(self) -> ZetaFunction:
        return ZetaFunction(self.aux["n"], tuple(self.aux.get("zeta", ())))

    def evaluate(self, chi):
        """Closed-form (Phi, Phi', Phi'') at chi; vectorized, no domain check."""
        x = np.asarray(chi, dtype=float)
        fam = self.family
        if fam is Family.ZERO:
            z = np.zeros_like(x)
            return z, z.copy(), z.copy()
        if fam is Family.ANALYTIC_BETA:
            n = self.aux["n"]
            lam = self.aux.get("lam", 0.0)
            v = 4 * x - np.sin(4 * x)
            dv = 4 - 4 * np.cos(4 * x)
            d2v = 16 * np.sin(4 * x)
            if lam != 0.0 and self.aux.get("zeta"):
                zeta = self._zeta()
                zv, zp, zpp = (zeta.value(v), zeta.derivative(v),
                               zeta.second_derivative(v))
            else:
                zv = zp = zpp = np.zeros_like(x)
            p = (v + lam * zv) / n
            dp = dv * (1 + lam * zp) / n
            d2p = (d2v * (1 + lam * zp) + dv ** 2 * lam * zpp) / n
            return p, dp, d2p

        chif = self.chi_f
        if fam is Family.POLY_SIN3:
            a1, a2, a3, a4 = self.coefficients
            p = a1 * x ** 2 + a2 * x ** 3
            dp = 2 * a1 * x + 3 * a2 * x ** 2
            d2p = 2 * a1 + 6 * a2 * x
            extras = [_sin3(a3, np.pi * x / chif, np.pi / chif),
                      _sin3(a4, 2 * np.pi * x / chif, 2 * np.pi / chif)]
        elif fam is Family.SIN2_SIN3:
            a1, a2, a3, a4 = self.coefficients
            p = a1 * np.sin(a2 * x) ** 2
            dp = a1 * a2 * np.sin(2 * a2 * x)
            d2p = 2 * a1 * a2 ** 2 * np.cos(2 * a2 * x)
            extras = [_sin3(a3, np.pi * x / chif, np.pi / chif),
                      _sin3(a4, 2 * np.pi * x / chif, 2 * np.pi / chif)]
        else:  # Family.SIN2_MIXED
            a1, a2, a3, a4, a5 = self.coefficients
            n3 = self.aux["n3"]
            p = a1 * np.sin(a2 * x) ** 2
            dp = a1 * a2 * np.sin(2 * a2 * x)
            d2p = 2 * a1 * a2 ** 2 * np.cos(2 * a2 * x)
            ph = 4 * chif
            extras = [
                _sin3(a3, n3 * np.pi * x / chif, n3 * np.pi / chif),
                # sin(pi (phi - 4x)/phi) = sin(pi x / chi_f), exact at x = 0
                _sin3(a4, np.pi * x / chif, np.pi / chif),
                _sin3(a5, (np.pi / 4) * x * (ph - 4 * x),
                      (np.pi / 4) * (ph - 8 * x), -2 * np.pi),
            ]
        for dp_, ddp_, dd2p_ in extras:
            p = p + dp_
            dp = dp + ddp_
            d2p = d2p + dd2p_
        return p, dp, d2p

    # --- JSON interchange ------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "family": self.family.value,
            "coefficients": list(self.coefficients),
            "chi_f": self.chi_f,
            "aux": dict(self.aux),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @classmethod
    def from_json_dict(cls, d: dict) -> "PhaseFunction":
        aux = dict(d.get("aux", {}))
        for key in ("n", "n3"):
            if key in aux:
                aux[key] = int(aux[key])
        if "zeta" in aux:
            aux["zeta"] = tuple(float(c) for c in aux["zeta"])
        return cls(Family.parse(d["family"]), tuple(d["coefficients"]),
                   float(d["chi_f"]), aux)

    @classmethod
    def from_json(cls, s: str) -> "PhaseFunction":
        return cls.from_json_dict(json.loads(s))


def eval_phase(pf: PhaseFunction, chi: float) -> tuple[float, float, float]:
    """Evaluate (Phi, Phi', Phi'') at a point of [0, chi_f].

    Raises DomainError outside the interval (with a small roundoff band).
    """
    tol = 1e-9 * max(1.0, pf.chi_f)
    if chi < -tol or chi > pf.chi_f + tol:
        raise DomainError(f"chi = {chi} outside [0, {pf.chi_f}]")
    chi = min(max(chi, 0.0), pf.chi_f)
    p, dp, d2p = pf.evaluate(chi)
    return float(p), float(dp), float(d2p)


@dataclass(frozen=True)
class TargetRotation:
    """Rotation by angle phi about the xy-plane axis at angle theta from x."""

    theta: float
    phi: float

    def __post_init__(self):
        if not (math.isfinite(self.theta) and math.isfinite(self.phi)):
            raise ValidationError("theta and phi must be finite")
        if self.phi <= 0:
            raise ValidationError("rotation angle phi must be positive")

    def unitary(self) -> np.ndarray:
        return xy_rotation(self.theta, self.phi)

    def canonical(self) -> "TargetRotation":
        """Equivalent target with theta in (-pi/2, pi/2].

        Uses R(theta, phi) = R(theta - pi, 4 pi - phi) (same matrix) and
        the 4 pi periodicity of SU(2) rotations.
        """
        theta = self.theta
        phi = self.phi % (4 * np.pi)
        if phi == 0.0:
            phi = 4 * np.pi
        # fold theta into (-pi/2, pi/2], flipping the axis when needed
        theta = (theta + np.pi / 2) % np.pi - np.pi / 2
        if theta == -np.pi / 2:
            theta = np.pi / 2
        flipped = abs(math.remainder(theta - self.theta, 2 * np.pi)) > 1e-9
        if flipped:
            phi = 4 * np.pi - phi
            if phi == 0.0:
                phi = 4 * np.pi
        return TargetRotation(theta, phi)


@dataclass(frozen=True)
class EndpointSpec:
    """Boundary data Phi must satisfy to realize a target rotation."""

    chi_f: float
    dphi: float
    d2phi: float | None = None  # None for antisymmetric pulses


def endpoint_conditions(target: TargetRotation,
                        antisymmetric: bool = True) -> EndpointSpec:
    """Map a target rotation to required endpoint values of Phi.

    Antisymmetric pulses need chi_f = phi/4 and
    Phi'(chi_f) = -tan(theta) csc(phi/2); general pulses additionally pin
    Phi''(chi_f) so the waveform ends at zero amplitude:
    Phi'' = -4 Phi' cot(2 chi_f) - 2 Phi'^3 sin(2 chi_f) cos(2 chi_f).
    """
    tgt = target.canonical()
    chi_f = tgt.phi / 4
    s = math.sin(tgt.phi / 2)
    tan_theta = math.tan(tgt.theta)
    if abs(s) < _EPS:
        if abs(tan_theta) > _EPS:
            raise UnrepresentableTargetError(
                f"csc(phi/2) singular at phi = {tgt.phi}; axis angle is "
                "unconstrained only for tan(theta) = 0")
        dphi = 0.0
    else:
        dphi = -tan_theta / s
    if antisymmetric:
        return EndpointSpec(chi_f, dphi)
    s2, c2 = math.sin(2 * chi_f), math.cos(2 * chi_f)
    if abs(s2) < _EPS:
        if abs(dphi) > _EPS:
            raise UnrepresentableTargetError(
                "cot(2 chi_f) singular; general pulse needs Phi'(chi_f) = 0 here")
        d2phi = 0.0
    else:
        d2phi = -4 * dphi * c2 / s2 - 2 * dphi ** 3 * s2 * c2
    return EndpointSpec(chi_f, dphi, d2phi)


def analytic_beta_family(n: int, zeta: ZetaFunction | None = None,
                         tol: float = 1e-12) -> PhaseFunction:
    """Closed-form solution family of the splitting-noise constraints.

    Phi(chi) = [v + lam * zeta(v)] / n with v = 4 chi - sin(4 chi) and
    chi_f = n pi / 4 makes the primary constraint vanish identically; lam
    is fixed by quadrature,

        1/lam = (2 / (3 pi n)) * int_0^{n pi} sin(t) zeta(t - sin t) dt,

    which zeroes the secondary constraint for non-constant zeta.
    """
    if n < 1:
        raise ValidationError("n must be a positive integer")
    if zeta is not None and zeta.n != n:
        raise ValidationError("zeta period index must match n")
    aux: dict[str, Any] = {"n": int(n), "lam": 0.0}
    if zeta is not None and zeta.coefficients:
        integral, _ = quad_real(
            lambda t: math.sin(t) * float(zeta.value(t - math.sin(t))),
            0.0, n * np.pi, tol=tol)
        lam_inv = 2.0 * integral / (3.0 * np.pi * n)
        if abs(lam_inv) < 1e-12:
            raise DegenerateZetaError(
                f"lambda-defining integral {lam_inv:.2e} below 1e-12")
        aux["lam"] = 1.0 / lam_inv
        aux["zeta"] = zeta.coefficients
    return PhaseFunction(Family.ANALYTIC_BETA, (), n * np.pi / 4, aux)


def with_coefficients(pf: PhaseFunction,
                      coefficients: tuple[float, ...]) -> PhaseFunction:
    """Copy of pf with replaced coefficients (same family, chi_f, aux)."""
    return replace(pf, coefficients=tuple(float(c) for c in coefficients))
