"""Dense linear algebra on a truncated oscillator Hilbert space.

States are 1-D complex arrays of length ``dim`` and operators are ``dim x dim``
complex arrays. Nothing here is sparse: the intended truncations are at most a
few tens of levels, where dense products and eigensolvers are faster and simpler.
"""

import math

import numpy as np
from scipy.linalg import expm as _scipy_expm

from .errors import InvalidDimensionError, NonHermitianError, ZeroVectorError

HERMITIAN_TOL = 1e-10


def _check_dim(dim):
    if int(dim) != dim or dim < 2:
        raise InvalidDimensionError(f"truncation dimension must be an integer >= 2, got {dim!r}")
    return int(dim)


def annihilation_op(dim):
    """Lowering operator with ``a[n-1, n] = sqrt(n)``."""
    dim = _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), 1).astype(complex)


def creation_op(dim):
    return annihilation_op(dim).conj().T


def number_op(dim):
    dim = _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def parity_op(dim):
    dim = _check_dim(dim)
    return np.diag((-1.0) ** np.arange(dim)).astype(complex)


def fock_state(n, dim):
    dim = _check_dim(dim)
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock level {n} outside truncation {dim}")
    psi = np.zeros(dim, dtype=complex)
    psi[n] = 1.0
    return psi


def default_dim(alpha):
    """Truncation that keeps the coherent-state tail mass of ``|alpha>`` negligible.

    ``ceil(|alpha|^2 + 6 sqrt(|alpha|^2 + 1) + 10)``; for ``|alpha|^2 <= 12`` the
    discarded tail is below 1e-10.
    """
    n = abs(alpha) ** 2
    return int(math.ceil(n + 6.0 * math.sqrt(n + 1.0) + 10.0))


def is_hermitian(op, tol=HERMITIAN_TOL):
    op = np.asarray(op)
    scale = max(1.0, float(np.max(np.abs(op))))
    return bool(np.max(np.abs(op - op.conj().T)) <= tol * scale)


def eig_hermitian(op, tol=HERMITIAN_TOL):
    """Eigen-decomposition of a Hermitian operator.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending and the
    eigenvectors as the columns of a unitary matrix.
    """
    op = np.asarray(op, dtype=complex)
    if op.ndim != 2 or op.shape[0] != op.shape[1]:
        raise InvalidDimensionError(f"expected a square matrix, got shape {op.shape}")
    if not is_hermitian(op, tol):
        raise NonHermitianError("eig_hermitian requires a Hermitian operator")
    return np.linalg.eigh(0.5 * (op + op.conj().T))


def expm_hermitian(h, t=1.0):
    """``exp(-i h t)`` for Hermitian ``h`` through its eigenbasis."""
    w, v = eig_hermitian(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


def expm_antihermitian(g):
    """``exp(g)`` for anti-Hermitian ``g``; the result is unitary to rounding."""
    # g = -i h with h = i g Hermitian
    return expm_hermitian(1j * np.asarray(g), 1.0)


def expm(m):
    """General matrix exponential (scaling and squaring with a Pade approximant)."""
    return _scipy_expm(np.asarray(m))


def displacement_op(alpha, dim):
    """``D(alpha) = exp(alpha a^dag - alpha^* a)`` on the truncated space."""
    a = annihilation_op(dim)
    gen = alpha * a.conj().T - np.conj(alpha) * a
    return expm_antihermitian(gen)


def coherent_state(alpha, dim):
    """Normalized truncation of ``|alpha>`` built from its Poissonian expansion."""
    dim = _check_dim(dim)
    amps = np.empty(dim, dtype=complex)
    amps[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, dim):
        amps[n] = amps[n - 1] * alpha / math.sqrt(n)
    return amps / np.linalg.norm(amps)


def cat_state(alpha, parity, dim):
    """Parity cat ``|C_alpha^+-> ~ |alpha> +- |-alpha>``, normalized.

    ``parity=+1`` keeps only even Fock components and ``-1`` only odd ones; the
    masking makes the support exactly disjoint instead of merely to rounding.
    """
    if parity not in (1, -1):
        raise ValueError(f"parity must be +1 or -1, got {parity!r}")
    dim = _check_dim(dim)
    if parity == -1 and alpha == 0:
        raise ZeroVectorError("the odd cat state is undefined at alpha = 0")
    plus = coherent_state(alpha, dim)
    minus = coherent_state(-alpha, dim)
    psi = plus + parity * minus
    keep = (np.arange(dim) % 2) == (0 if parity == 1 else 1)
    psi = np.where(keep, psi, 0.0)
    norm = np.linalg.norm(psi)
    if norm < 1e-300:
        raise ZeroVectorError("cat state has zero norm at this truncation")
    return psi / norm


def expect(op, state):
    """Expectation value for a ket or a density matrix."""
    state = np.asarray(state)
    if state.ndim == 1:
        return complex(np.vdot(state, op @ state))
    return complex(np.trace(op @ state))


def ket_to_dm(psi):
    psi = np.asarray(psi)
    return np.outer(psi, psi.conj())
