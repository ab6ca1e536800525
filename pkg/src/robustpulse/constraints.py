"""First-order error-cancelation residuals and fluctuation diagnostics.

Splitting noise (beta -> beta0 + dbeta) cancels to first order iff

    E_beta = sin(4 chi_f)
             + 8 e^{-2i Phi(chi_f)} int_0^{chi_f} sin^2(2x) e^{2i Phi(x)} dx = 0

and, for general (non-antisymmetric) pulses, additionally

    int_0^{chi_f} Phi'(x) sin^2(2x) dx = 0.

Drive noise (Omega -> Omega0 + deps g) cancels iff

    E_eps = int_0^{chi_f} sin(2x) sqrt(1 + Phi'^2 sin^2 2x) g~(x) e^{2i Phi(x)} dx = 0

plus, for general pulses, the same integral with cos(2x) and no phase
factor. g~(chi(t)) = g(t); amplitude noise has g~ = Omega(chi).

The time-resolved fluctuations per unit noise are

    dchi/dbeta (t) = 2 [ sin(4 chi0)/8 + Re(e^{-2i xi0} G_beta(chi0)) ],
    dchi/deps  (t) = -Im(e^{-2i xi0} G_eps(chi0)),

with xi0 = Phi(chi0) and G_* the cumulative versions of the integrals
above. Everything is evaluated in the chi domain (dt = dchi/chidot), which
reuses one quadrature engine and avoids interpolating the trajectory. The
drive-noise prefactor is pinned by the independent finite-difference
oracle (chi extracted from perturbed propagations): it is exact to the
oracle's resolution on every ansatz family, and the constraint zero set
does not depend on it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.interpolate import CubicSpline, PchipInterpolator

from ._quadrature import gl_grid, quad_complex, quad_real
from .ansatz import PhaseFunction
from .errors import QuadratureError, ValidationError
from .synthesis import ChiTrajectory, omega_of_chi, speed_factor


class NoiseKind(str, Enum):
    BETA = "beta"
    EPSILON = "epsilon"


class GModel(str, Enum):
    AMPLITUDE = "amplitude"   # g~(chi) = Omega(chi)
    ADDITIVE = "additive"     # g~(chi) = 1
    CUSTOM = "custom"         # tabulated g~(chi)


@dataclass(frozen=True)
class NoiseSpec:
    """Which noise channel, and the g model for drive noise."""

    kind: NoiseKind
    g_model: GModel = GModel.AMPLITUDE
    g_table: tuple[tuple[float, ...], tuple[float, ...]] | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", NoiseKind(self.kind))
        object.__setattr__(self, "g_model", GModel(self.g_model))
        if self.g_model is GModel.CUSTOM and self.g_table is None:
            raise ValidationError("custom g model requires g_table")

    def g_of_chi(self, pf: PhaseFunction):
        """Vectorized g~(chi) callable for this spec."""
        if self.g_model is GModel.AMPLITUDE:
            return lambda chi: omega_of_chi(pf, chi)
        if self.g_model is GModel.ADDITIVE:
            return lambda chi: np.ones_like(np.asarray(chi, dtype=float))
        chi_grid, g_vals = self.g_table
        if min(chi_grid) > 0.0 or max(chi_grid) < pf.chi_f - 1e-12:
            raise ValidationError("custom g table must cover [0, chi_f]")
        interp = PchipInterpolator(np.asarray(chi_grid), np.asarray(g_vals))
        return lambda chi: interp(np.asarray(chi, dtype=float))


@dataclass(frozen=True)
class ConstraintResidual:
    """Complex primary residual plus the general-pulse secondary integral.

    secondary is zero-filled and flagged absent for antisymmetric pulses.
    Error estimates come from the adaptive quadrature.
    """

    primary: complex
    secondary: float
    secondary_present: bool
    primary_error: float = 0.0
    secondary_error: float = 0.0

    @property
    def magnitude(self) -> float:
        mag = abs(self.primary)
        if self.secondary_present:
            mag = math.hypot(mag, self.secondary)
        return mag


def residual_beta(pf: PhaseFunction, antisymmetric: bool = True,
                  tol: float = 1e-10) -> ConstraintResidual:
    """Splitting-noise residual pair for a phase function."""
    chif = pf.chi_f

    def integrand(x):
        p, _, _ = pf.evaluate(x)
        return math.sin(2 * x) ** 2 * np.exp(2j * float(p))

    g_beta, err = quad_complex(integrand, 0.0, chif, tol=tol)
    phi_f = float(pf.evaluate(chif)[0])
    primary = math.sin(4 * chif) + 8 * np.exp(-2j * phi_f) * g_beta
    secondary, serr = 0.0, 0.0
    if not antisymmetric:
        def sec_integrand(x):
            _, dp, _ = pf.evaluate(x)
            return float(dp) * math.sin(2 * x) ** 2

        secondary, serr = quad_real(sec_integrand, 0.0, chif, tol=tol)
    return ConstraintResidual(complex(primary), secondary,
                              not antisymmetric, 8 * err, serr)


def residual_epsilon(pf: PhaseFunction, noise: NoiseSpec,
                     antisymmetric: bool = True,
                     tol: float = 1e-10) -> ConstraintResidual:
    """Drive-noise residual pair for a phase function."""
    if noise.kind is not NoiseKind.EPSILON:
        raise ValidationError("residual_epsilon needs an epsilon NoiseSpec")
    chif = pf.chi_f
    g = noise.g_of_chi(pf)

    def integrand(x):
        p, _, _ = pf.evaluate(x)
        return (math.sin(2 * x) * float(speed_factor(pf, x)) * float(g(x))
                * np.exp(2j * float(p)))

    primary, err = quad_complex(integrand, 0.0, chif, tol=tol)
    secondary, serr = 0.0, 0.0
    if not antisymmetric:
        def sec_integrand(x):
            return math.cos(2 * x) * float(g(x)) * float(speed_factor(pf, x))

        secondary, serr = quad_real(sec_integrand, 0.0, chif, tol=tol)
    return ConstraintResidual(complex(primary), secondary,
                              not antisymmetric, err, serr)


def _cumulative(chi: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Cumulative integral over a strictly increasing chi grid (spline)."""
    if np.iscomplexobj(values):
        re = CubicSpline(chi, values.real).antiderivative()
        im = CubicSpline(chi, values.imag).antiderivative()
        return (re(chi) - re(chi[0])) + 1j * (im(chi) - im(chi[0]))
    anti = CubicSpline(chi, values).antiderivative()
    return anti(chi) - anti(chi[0])


def delta_chi_beta(pf: PhaseFunction, trajectory: ChiTrajectory) -> np.ndarray:
    """dchi(t)/dbeta per sample of the trajectory (beta0 = 1 units)."""
    chi = trajectory.chi
    phi, _, _ = pf.evaluate(chi)
    g_cum = _cumulative(chi, np.sin(2 * chi) ** 2 * np.exp(2j * phi))
    return 2.0 * (np.sin(4 * chi) / 8.0
                  + np.real(np.exp(-2j * phi) * g_cum))


def delta_chi_epsilon(pf: PhaseFunction, trajectory: ChiTrajectory,
                      noise: NoiseSpec) -> np.ndarray:
    """dchi(t)/deps per sample of the trajectory (k = 0 branch)."""
    if noise.kind is not NoiseKind.EPSILON:
        raise ValidationError("delta_chi_epsilon needs an epsilon NoiseSpec")
    chi = trajectory.chi
    phi, _, _ = pf.evaluate(chi)
    g = noise.g_of_chi(pf)
    integrand = (np.sin(2 * chi) * speed_factor(pf, chi)
                 * np.asarray(g(chi), dtype=float) * np.exp(2j * phi))
    g_cum = _cumulative(chi, integrand)
    return -np.imag(np.exp(-2j * phi) * g_cum)


def residual_beta_gl(pf: PhaseFunction, antisymmetric: bool = True,
                     n_nodes: int = 800) -> ConstraintResidual:
    """residual_beta on a fixed Gauss-Legendre grid (fast, vectorized).

    Used by grid scans and solver objectives; the adaptive quadrature
    version is the reporting path.
    """
    x, w = gl_grid(0.0, pf.chi_f, n_nodes)
    phi, dp, _ = pf.evaluate(x)
    g_beta = np.sum(np.sin(2 * x) ** 2 * np.exp(2j * phi) * w)
    phi_f = float(pf.evaluate(pf.chi_f)[0])
    primary = math.sin(4 * pf.chi_f) + 8 * np.exp(-2j * phi_f) * g_beta
    secondary = 0.0
    if not antisymmetric:
        secondary = float(np.sum(dp * np.sin(2 * x) ** 2 * w))
    return ConstraintResidual(complex(primary), secondary, not antisymmetric)


def residual_epsilon_gl(pf: PhaseFunction, noise: NoiseSpec,
                        antisymmetric: bool = True,
                        n_nodes: int = 800) -> ConstraintResidual:
    """residual_epsilon on a fixed Gauss-Legendre grid (fast, vectorized)."""
    x, w = gl_grid(0.0, pf.chi_f, n_nodes)
    phi, dp, _ = pf.evaluate(x)
    s = np.sin(2 * x)
    sf = np.sqrt(1 + dp ** 2 * s ** 2)
    if noise.g_model is GModel.AMPLITUDE:
        g = omega_of_chi(pf, x)
    elif noise.g_model is GModel.ADDITIVE:
        g = np.ones_like(x)
    else:
        g = np.asarray(noise.g_of_chi(pf)(x), dtype=float)
    primary = complex(np.sum(s * sf * g * np.exp(2j * phi) * w))
    secondary = 0.0
    if not antisymmetric:
        secondary = float(np.sum(np.cos(2 * x) * g * sf * w))
    return ConstraintResidual(primary, secondary, not antisymmetric)


@dataclass(frozen=True)
class ErrorPotential:
    """|primary residual| over a 2D scan of two ansatz coefficients."""

    axes: tuple[int, int]
    grid1: np.ndarray
    grid2: np.ndarray
    values: np.ndarray          # shape (len(grid1), len(grid2)), row-major
    error_estimates: np.ndarray

    def local_minima(self, threshold: float = np.inf) -> list[tuple[int, int]]:
        """Strict interior grid-local minima with value below threshold."""
        out = []
        v = self.values
        for i in range(1, v.shape[0] - 1):
            for j in range(1, v.shape[1] - 1):
                window = v[i - 1:i + 2, j - 1:j + 2]
                if v[i, j] == window.min() and v[i, j] < threshold \
                        and np.count_nonzero(window == v[i, j]) == 1:
                    out.append((i, j))
        return out

    def to_csv(self, path_or_file) -> None:
        own = isinstance(path_or_file, (str, bytes))
        fh = open(path_or_file, "w") if own else path_or_file
        try:
            fh.write(f"# scanned coefficient indices: {self.axes[0]},{self.axes[1]}\n")
            fh.write("param1,param2,abs_residual\n")
            for i, p1 in enumerate(self.grid1):
                for j, p2 in enumerate(self.grid2):
                    fh.write(f"{p1:.17g},{p2:.17g},{self.values[i, j]:.17g}\n")
        finally:
            if own:
                fh.close()


def error_potential(pf_template: PhaseFunction, axes: tuple[int, int],
                    grid1, grid2, noise: NoiseSpec,
                    n_nodes: int = 600) -> ErrorPotential:
    """|primary residual| over a 2D coefficient scan, row-major.

    Fixed-order Gauss-Legendre panels evaluate every cell; the per-cell
    error estimate is the change against a half-resolution pass, recorded
    (not fatal) so a rough cell cannot abort the grid.
    """
    grid1 = np.asarray(grid1, dtype=float)
    grid2 = np.asarray(grid2, dtype=float)
    if grid1.size < 2 or grid2.size < 2:
        raise ValidationError("grids need at least 2 points per axis")
    if not (np.all(np.isfinite(grid1)) and np.all(np.isfinite(grid2))):
        raise ValidationError("grid bounds must be finite")
    naxes = len(pf_template.coefficients)
    if not all(0 <= a < naxes for a in axes) or axes[0] == axes[1]:
        raise ValidationError(f"axes {axes} invalid for {naxes} coefficients")

    def scan(nodes: int) -> np.ndarray:
        vals = np.empty((len(grid1), len(grid2)))
        coeffs = np.array(pf_template.coefficients)
        for i, p1 in enumerate(grid1):
            for j, p2 in enumerate(grid2):
                c = coeffs.copy()
                c[axes[0]] = p1
                c[axes[1]] = p2
                pf = replace(pf_template, coefficients=tuple(c))
                if noise.kind is NoiseKind.EPSILON:
                    r = residual_epsilon_gl(pf, noise, n_nodes=nodes)
                else:
                    r = residual_beta_gl(pf, n_nodes=nodes)
                vals[i, j] = abs(r.primary)
        return vals

    coarse = scan(n_nodes // 2)
    fine = scan(n_nodes)
    return ErrorPotential((int(axes[0]), int(axes[1])), grid1, grid2,
                          fine, np.abs(fine - coarse))
