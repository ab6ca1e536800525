"""Internal quadrature helpers built on scipy.integrate.quad.

All integrands here are smooth on a finite interval; adaptive
Gauss-Kronrod is used for scalar results and cached Gauss-Legendre
panels for vectorized grid evaluation.
"""
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .errors import QuadratureError

_QUAD_LIMIT = 400


def quad_real(f, a, b, tol=1e-12):
    """Integrate a real-valued f over [a, b] to absolute tolerance tol.

    Returns (value, error_estimate). Raises QuadratureError when the
    reported error exceeds the tolerance by more than a factor 100.
    """
    if a == b:
        return 0.0, 0.0
    val, err = quad(f, a, b, epsabs=tol, epsrel=tol, limit=_QUAD_LIMIT)
    if err > 100 * max(tol, tol * abs(val)):
        raise QuadratureError(
            f"quadrature error {err:.2e} exceeds tolerance {tol:.2e}",
            achieved=err,
        )
    return val, err


def quad_complex(f, a, b, tol=1e-12):
    """Integrate a complex-valued f over [a, b]; returns (value, error)."""
    re, ere = quad_real(lambda x: f(x).real, a, b, tol)
    im, eim = quad_real(lambda x: f(x).imag, a, b, tol)
    return complex(re, im), float(np.hypot(ere, eim))


@lru_cache(maxsize=8)
def _gl_nodes(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def gl_grid(a: float, b: float, n: int = 600):
    """Gauss-Legendre nodes and weights mapped onto [a, b]."""
    nodes, weights = _gl_nodes(n)
    x = 0.5 * (b - a) * (nodes + 1) + a
    w = 0.5 * (b - a) * weights
    return x, w
