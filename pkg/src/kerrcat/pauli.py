"""Single-qubit Pauli matrices and Pauli transfer matrices (basis order I, X, Y, Z)."""

import numpy as np

from .errors import SingularInputError

I2 = np.eye(2, dtype=complex)
SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (I2, SX, SY, SZ)
LABELS = ("I", "X", "Y", "Z")


def rotation(axis, theta):
    """``exp(-i theta sigma/2)`` about ``axis`` in ``{"X", "Y", "Z"}``."""
    s = PAULIS[LABELS.index(axis)]
    return np.cos(theta / 2) * I2 - 1j * np.sin(theta / 2) * s


def ptm_from_map(channel):
    """PTM ``R_ij = Tr(sigma_i E(sigma_j))/2`` of a linear map on 2x2 matrices."""
    out = np.empty((4, 4))
    for j, pj in enumerate(PAULIS):
        e = channel(pj)
        for i, pi in enumerate(PAULIS):
            out[i, j] = 0.5 * np.real(np.trace(pi @ e))
    return out


def ptm_from_unitary(u):
    u = np.asarray(u, dtype=complex)
    return ptm_from_map(lambda m: u @ m @ u.conj().T)


def ptm_from_kraus(kraus):
    return ptm_from_map(lambda m: sum(k @ m @ k.conj().T for k in kraus))


def bloch(rho):
    """Pauli vector ``(1, <X>, <Y>, <Z>)`` of a 2x2 density matrix."""
    return np.array([np.real(np.trace(p @ rho)) for p in PAULIS])


def density_from_bloch(r):
    return 0.5 * sum(c * p for c, p in zip(r, PAULIS))


def process_fidelity(ptm, ideal):
    """``Tr(ideal^-1 ptm)/4`` clamped to ``[0, 1]``."""
    ideal = np.asarray(ideal, dtype=float)
    if ideal.shape != (4, 4) or np.linalg.cond(ideal) > 1e12:
        raise SingularInputError("ideal PTM is not invertible")
    return float(min(max(np.trace(np.linalg.inv(ideal) @ np.asarray(ptm)) / 4, 0.0), 1.0))


def ptm_distance(a, b):
    """Largest absolute entry of ``a - b``."""
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
