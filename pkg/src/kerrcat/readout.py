"""Semiclassical model of cat-quadrature readout (CQR).

A beam-splitter coupling at rate ``eps_cqr`` drives a readout resonator of
linewidth ``kappa_r`` with the cat amplitude, so the pointer settles at
``2 eps_cqr <a>/kappa_r``. A record is that pointer plus Gaussian noise; the
label is the sign of its real part. Between consecutive reads the qubit flips
with probability ``flip_prob_per_read``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtr

from .errors import SingularInputError
from .rng import stream


@dataclass(frozen=True)
class CqrParams:
    eps_cqr: float
    kappa_r: float
    t_read: float = 0.0
    noise_sigma: float = 0.0
    flip_prob_per_read: float = 0.0

    def __post_init__(self):
        for name in ("eps_cqr", "kappa_r", "t_read", "noise_sigma", "flip_prob_per_read"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.flip_prob_per_read > 0.5:
            raise ValueError("flip_prob_per_read must not exceed 0.5")


@dataclass(frozen=True)
class ReadoutRecord:
    pointer: complex
    label: int


def cqr_steady_state(c, a_expect):
    """``<b>(t -> inf) = 2 eps_cqr <a>/kappa_r``, real and positive for ``+alpha``."""
    if c.kappa_r == 0:
        raise SingularInputError("kappa_r must be positive")
    return 2.0 * c.eps_cqr / c.kappa_r * a_expect


def cqr_transient(c, a_expect, t_grid):
    """Pointer amplitude from ``db/dt = -i eps a - (kappa/2) b`` with ``b(0) = 0``.

    The closed form is ``b(t) = -i b_ss (1 - exp(-kappa t/2))``: the transient
    carries a fixed ``-i`` phase relative to :func:`cqr_steady_state`, which
    the discriminator rotates away.
    """
    t = np.asarray(t_grid, dtype=float)
    if c.kappa_r == 0:
        return -1j * c.eps_cqr * a_expect * t
    return -1j * cqr_steady_state(c, a_expect) * (1.0 - np.exp(-0.5 * c.kappa_r * t))


def snr(c, a_expect):
    """Half-separation of the two pointer clouds over the noise width."""
    sep = abs(cqr_steady_state(c, a_expect))
    return math.inf if c.noise_sigma == 0 else sep / c.noise_sigma


def misassignment(c, a_expect):
    """Probability that a single read lands on the wrong side of the boundary."""
    s = snr(c, a_expect)
    return 0.0 if math.isinf(s) else float(ndtr(-s))


def qndness_analytic(c, a_expect):
    """Agreement of two consecutive reads in the flip-and-misassign Markov model.

    With flip probability ``f`` and misassignment ``e`` the two labels agree with
    probability ``(1 - f)((1-e)^2 + e^2) + 2 e (1 - e) f`` for either input.
    """
    f = c.flip_prob_per_read
    e = misassignment(c, a_expect)
    return (1 - f) * ((1 - e) ** 2 + e**2) + 2 * e * (1 - e) * f


def qndness(labels_first, labels_second):
    """``(P[+|+] + P[-|-])/2`` over pairs of consecutive reads.

    A conditional whose first label never occurs is skipped and the other one
    is used alone. The value is unchanged by flipping every label.
    """
    a = np.asarray(labels_first)
    b = np.asarray(labels_second)
    conds = []
    for s in (1, -1):
        m = a == s
        if m.any():
            conds.append(float(np.mean(b[m] == s)))
    if not conds:
        raise ValueError("no readout pairs")
    return sum(conds) / len(conds)


def simulate_readout(c, true_state, shots, seed, a_expect=1.0):
    """Simulate ``shots`` consecutive reads starting in well ``true_state``.

    Each read integrates the steady pointer of the current well plus complex
    Gaussian noise; the state then flips with ``flip_prob_per_read``. Shot ``k``
    draws from the stream keyed ``(seed, k)``. Returns ``(records, qndness)``
    with QNDness estimated over consecutive pairs.

    A single chain mostly sits in one well, so on its own the ``-|-``
    conditional would only see misassigned reads. The model is symmetric under
    a global flip, so every pair is paired with its mirror image, which stands
    in for the run prepared in the opposite well.
    """
    if shots < 2:
        raise ValueError("need at least two shots")
    if true_state not in (1, -1):
        raise ValueError("true_state must be +1 or -1")
    b_ss = cqr_steady_state(c, a_expect)
    phase = np.exp(-1j * np.angle(b_ss)) if b_ss != 0 else 1.0
    state = true_state
    records = []
    for k in range(shots):
        rng = stream(seed, k)
        noise = c.noise_sigma * complex(rng.normal(), rng.normal())
        pointer = state * b_ss + noise
        label = 1 if (pointer * phase).real >= 0 else -1
        records.append(ReadoutRecord(complex(pointer), label))
        if rng.random() < c.flip_prob_per_read:
            state = -state
    labels = np.array([r.label for r in records])
    first, second = labels[:-1], labels[1:]
    return records, qndness(np.concatenate([first, -first]), np.concatenate([second, -second]))


def flip_prob_from_tz(t_read, t_z):
    """Small-error flip probability of one read window, ``t_read/(2 T_z)``."""
    if t_z <= 0:
        raise ValueError("T_z must be positive")
    return min(t_read / (2.0 * t_z), 0.5)


def heralded_preparation(c, shots, seed, a_expect=1.0, target=1):
    """Initialization by measurement: read once and keep shots whose label is ``target``.

    The qubit starts in a uniformly random well. Returns the accepted fraction
    and the fraction of accepted shots actually in ``target`` after the read.
    """
    b_ss = cqr_steady_state(c, a_expect)
    phase = np.exp(-1j * np.angle(b_ss)) if b_ss != 0 else 1.0
    kept = correct = 0
    for k in range(shots):
        rng = stream(seed, k)
        state = 1 if rng.random() < 0.5 else -1
        pointer = state * b_ss + c.noise_sigma * complex(rng.normal(), rng.normal())
        label = 1 if (pointer * phase).real >= 0 else -1
        if rng.random() < c.flip_prob_per_read:
            state = -state
        if label == target:
            kept += 1
            correct += state == target
    return kept / shots, (correct / kept if kept else math.nan)
