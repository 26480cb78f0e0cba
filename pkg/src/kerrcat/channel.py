"""Pauli-transfer-matrix channel algebra: error generators, twirls and metrics."""

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm, logm

from .dihedral import all_elements, element_ptm
from .errors import AmbiguousLogError
from .pauli import LABELS, PAULIS, process_fidelity, ptm_distance, ptm_from_unitary  # noqa: F401

# rotations closer than this to pi leave the principal logarithm ill defined
LOG_BRANCH_MARGIN = 1e-6


@dataclass(frozen=True)
class ErrorGenerator:
    """Coherent angles ``h = (h_x, h_y, h_z)`` and stochastic rates ``p = (p_x, p_y, p_z)``.

    Estimated generators may carry slightly negative ``p`` from noise; they are
    kept as is.
    """

    h: tuple = (0.0, 0.0, 0.0)
    p: tuple = (0.0, 0.0, 0.0)

    def __post_init__(self):
        object.__setattr__(self, "h", tuple(float(x) for x in self.h))
        object.__setattr__(self, "p", tuple(float(x) for x in self.p))
        if len(self.h) != 3 or len(self.p) != 3:
            raise ValueError("h and p need three components each")

    @property
    def vector(self):
        return np.array(self.h + self.p)

    def __add__(self, other):
        v = self.vector + other.vector
        return ErrorGenerator(v[:3], v[3:])

    def to_dict(self):
        return {"h": list(self.h), "p": list(self.p)}


def generator_matrices():
    """The six basis generators ``(H_x, H_y, H_z, P_x, P_y, P_z)``."""
    hx = np.zeros((4, 4))
    hx[2, 3], hx[3, 2] = -1.0, 1.0
    hy = np.zeros((4, 4))
    hy[1, 3], hy[3, 1] = 1.0, -1.0
    hz = np.zeros((4, 4))
    hz[1, 2], hz[2, 1] = -1.0, 1.0
    px = np.diag([0.0, 0.0, -2.0, -2.0])
    py = np.diag([0.0, -2.0, 0.0, -2.0])
    pz = np.diag([0.0, -2.0, -2.0, 0.0])
    return hx, hy, hz, px, py, pz


_BASIS = np.array([m.ravel() for m in generator_matrices()]).T


def build_error_generator(g):
    return sum(c * m for c, m in zip(g.vector, generator_matrices()))


def ptm_exp(gen):
    return np.real(expm(np.asarray(gen, dtype=float)))


def ptm_log(ptm):
    """Principal matrix logarithm of a PTM.

    Raises :class:`AmbiguousLogError` when an eigenvalue sits on or next to the
    negative real axis (a rotation by about pi) or at zero.
    """
    ptm = np.asarray(ptm, dtype=float)
    w = np.linalg.eigvals(ptm)
    if np.any(np.abs(w) < 1e-12):
        raise AmbiguousLogError("PTM is singular; logarithm undefined")
    if np.any(np.abs(np.angle(w)) > math.pi - LOG_BRANCH_MARGIN):
        raise AmbiguousLogError("PTM has an eigenvalue on the negative real axis; branch is ambiguous")
    return np.real(logm(ptm))


def decompose_generator(gen):
    """Least-squares projection onto the six-generator basis; returns ``(ErrorGenerator, residual)``."""
    gen = np.asarray(gen, dtype=float)
    c, *_ = np.linalg.lstsq(_BASIS, gen.ravel(), rcond=None)
    residual = float(np.linalg.norm(gen.ravel() - _BASIS @ c))
    return ErrorGenerator(c[:3], c[3:]), residual


def generator_gram_condition():
    return float(np.linalg.cond(_BASIS.T @ _BASIS))


_PAULI_PTMS = [ptm_from_unitary(p) for p in PAULIS]


def pauli_twirl(ptm):
    """``(1/4) sum_P R_P ptm R_P`` over the four Pauli PTMs."""
    ptm = np.asarray(ptm, dtype=float)
    return sum(r @ ptm @ r for r in _PAULI_PTMS) / 4.0


def dihedral_twirl(ptm):
    """``(1/16) sum_g R_g^-1 ptm R_g`` over the dihedral group."""
    ptm = np.asarray(ptm, dtype=float)
    out = np.zeros((4, 4))
    for g in all_elements():
        r = element_ptm(g)
        out += r.T @ ptm @ r
    return out / 16.0


def twirled_probabilities(g):
    """Pauli error rates after twirling, ``p'_m = p_m + h_m^2/4``."""
    return tuple(p + 0.25 * h * h for p, h in zip(g.p, g.h))


def pauli_rates_from_ptm(ptm):
    """Pauli generator rates of the twirled channel.

    Uses the logarithm of the twirled diagonal, ``a_m = -ln(lambda_m)/2``, and
    ``p_x = (a_y + a_z - a_x)/2`` (cyclic), so a channel ``exp(L(0, p))`` returns
    exactly ``p``.
    """
    lam = np.diag(pauli_twirl(ptm))[1:]
    a = -0.5 * np.log(lam)
    ax, ay, az = a
    return ((ay + az - ax) / 2, (ax + az - ay) / 2, (ax + ay - az) / 2)


def pauli_channel_infidelity(g):
    return float(sum(twirled_probabilities(g)))


def pauli_channel_ptm(px, py, pz):
    """PTM of the stochastic Pauli channel with the given error probabilities."""
    return np.diag([1.0, 1 - 2 * (py + pz), 1 - 2 * (px + pz), 1 - 2 * (px + py)])
