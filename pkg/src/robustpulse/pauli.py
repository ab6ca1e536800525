"""Pauli matrices and elementary SU(2) helpers."""
import numpy as np

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
IDENTITY = np.eye(2, dtype=complex)


def xy_rotation(theta: float, phi: float) -> np.ndarray:
    """Rotation by angle phi about the xy-plane axis at angle theta from x.

    R(theta, phi) = exp[-i (cos(theta) sx + sin(theta) sy) phi / 2]
    """
    axis = np.cos(theta) * SIGMA_X + np.sin(theta) * SIGMA_Y
    return np.cos(phi / 2) * IDENTITY - 1j * np.sin(phi / 2) * axis


def su2_normalize(u: np.ndarray) -> np.ndarray:
    """Divide out the global phase so that det(u) = 1 (principal branch)."""
    det = u[0, 0] * u[1, 1] - u[0, 1] * u[1, 0]
    return u / np.sqrt(det)
