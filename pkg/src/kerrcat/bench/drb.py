"""Dihedral randomized benchmarking over D8.

A depth-``n`` circuit is ``P, D_1, ..., D_n, D_{n+1}`` with ``P`` a virtual
Pauli, ``D_k`` uniform in D8 and ``D_{n+1}`` inverting ``D_n ... D_1``. Basis
1 prepares ``|0>`` and measures Z (sensitive to bit flips); basis 2 prepares
``|+>`` and measures X (phase flips). The survival ``S_b(n)`` averages
``chi_b(P) (2 p_0 - 1)`` over circuits.

Noise placement: every element applies the ``"Z"`` error channel after its
ideal PTM, except the pure virtual X(pi) ``(0, 1)`` (noiseless unless
``noisy_virtual_x``) and the identity ``(0, 0)`` when ``noisy_identity`` is off.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np

from ..channel import pauli_channel_ptm
from ..dihedral import (DihedralElement, all_elements, character, dihedral_compose, dihedral_inverse,
                        element_ptm)
from ..errors import CalibrationError, FitRejectedError
from ..fitting import fit_exponential
from ..pauli import LABELS, PAULIS, ptm_from_unitary
from ..pool import ordered_map
from ..rng import stream
from .noise import GateNoiseModel

_PAULI_PTMS = {lab: ptm_from_unitary(p) for lab, p in zip(LABELS, PAULIS)}
DEFAULT_SCALE_BIT = 1.07
DEFAULT_SCALE_PH = 1.02


@dataclass(frozen=True)
class Circuit:
    """DRB circuit: virtual Pauli then dihedral elements in time order."""

    pauli: str
    elements: tuple
    basis: int
    depth: int
    seed: int = 0
    index: int = 0

    @property
    def weight(self):
        return character(self.basis, self.pauli)

    def to_line(self):
        body = [f"P:{self.pauli}"] + [f"D:{g.label}" for g in self.elements[:-1]]
        return " ".join(body + [f"INV:{self.elements[-1].label}"])

    @classmethod
    def from_line(cls, line, basis, seed=0, index=0):
        toks = line.split()
        pauli = toks[0].split(":")[1]
        els = tuple(DihedralElement(*map(int, t.split(":")[1].split(","))) for t in toks[1:])
        return cls(pauli, els, basis, len(els) - 1, seed, index)


@dataclass(frozen=True)
class DrbResult:
    lambda1: float
    lambda2: float
    sigma_lambda1: float
    sigma_lambda2: float
    p_bit: float
    p_ph: float
    sigma_p_bit: float
    sigma_p_ph: float
    eta: float
    eta_lower_bound: bool
    scale_bit: float
    scale_ph: float

    def to_dict(self):
        d = asdict(self)
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in d.items()}


def drb_sample(n, basis, seed, index=0):
    """Random depth-``n`` circuit; stream keyed by ``(seed, basis, n, index)``."""
    if n < 1:
        raise ValueError("depth must be >= 1")
    if basis not in (1, 2):
        raise ValueError("basis must be 1 or 2")
    rng = stream(seed, 0, basis, n, index)
    pauli = LABELS[int(rng.integers(4))]
    draws = rng.integers(0, 16, size=n)
    els = [DihedralElement(int(d) // 2, int(d) % 2) for d in draws]
    total = DihedralElement(0, 0)
    for g in els:
        total = dihedral_compose(g, total)
    return Circuit(pauli, tuple(els) + (dihedral_inverse(total),), basis, n, seed, index)


def _is_noisy(g, noise):
    if g.k == 0 and g.b == 1:
        return noise.noisy_virtual_x
    if g.k == 0 and g.b == 0:
        return noise.noisy_identity
    return True


def noisy_element_ptms(noise):
    """Sixteen noisy element PTMs indexed by ``2k + b``."""
    err = noise.error("Z")
    return [err @ element_ptm(g) if _is_noisy(g, noise) else element_ptm(g) for g in all_elements()]


def circuit_probability(circ, noise, mats=None):
    """Exact probability of outcome 0 for one circuit."""
    mats = noisy_element_ptms(noise) if mats is None else mats
    rho, meas = noise.spam(circ.basis)
    v = _PAULI_PTMS[circ.pauli] @ rho
    for g in circ.elements:
        v = mats[g.index] @ v
    return 0.5 * float(meas @ v)


def circuit_survival(circ, noise, mats=None):
    """``chi_b(P) (2 p_0 - 1)`` evaluated exactly."""
    return circ.weight * (2.0 * circuit_probability(circ, noise, mats) - 1.0)


def drb_expected(noise, depths, basis):
    """Exact survival averaged over every circuit of each depth (shots and samples infinite).

    Dynamic programming over the accumulated group element: one Pauli vector
    per element of D8, updated by averaging over the next uniform draw. The
    character-weighted start vector makes the constant part of ``2 p_0 - 1``
    average out, so ``S = meas . v``.
    """
    mats = noisy_element_ptms(noise)
    rho, meas = noise.spam(basis)
    start = sum(character(basis, lab) * (_PAULI_PTMS[lab] @ rho) for lab in LABELS) / 4.0
    els = all_elements()
    table = [np.array([dihedral_compose(d, g).index for g in els]) for d in els]
    inv_mats = np.array([mats[dihedral_inverse(g).index] for g in els])
    mats_t = [m.T for m in mats]
    state = np.zeros((16, 4))
    state[0] = start
    n = 0
    out = {}
    for target in sorted(set(int(x) for x in depths)):
        while n < target:
            new = np.zeros((16, 4))
            for d in range(16):
                new[table[d]] += state @ mats_t[d]
            state = new / 16.0
            n += 1
        final = np.einsum("gij,gj->i", inv_mats, state)
        out[target] = float(meas @ final)
    return out


def drb_run(noise, depths, samples_per_depth, shots, seed, bases=(1, 2), threads=1):
    """Sampled DRB survival tables.

    ``shots=None`` is analytic mode (exact probabilities per sampled circuit).
    Otherwise outcome counts are binomial draws from a stream keyed by
    ``(seed, basis, depth, sample)``. Returns
    ``{basis: {"depths": [...], "S": [...], "samples": [[...], ...]}}``.
    """
    depths = [int(n) for n in depths]
    if len(set(depths)) < 2:
        raise ValueError("need at least two distinct depths")
    mats = noisy_element_ptms(noise)
    tables = {}
    for b in bases:
        jobs = [(n, s) for n in depths for s in range(samples_per_depth)]

        def one(job, b=b):
            n, s = job
            circ = drb_sample(n, b, seed, s)
            p0 = min(max(circuit_probability(circ, noise, mats), 0.0), 1.0)
            if shots is not None:
                p0 = stream(seed, 1, b, n, s).binomial(int(shots), p0) / shots
            return circ.weight * (2.0 * p0 - 1.0)

        vals = np.array(ordered_map(one, jobs, threads)).reshape(len(depths), samples_per_depth)
        tables[b] = {"depths": depths, "S": vals.mean(axis=1).tolist(), "samples": vals.tolist()}
    return tables


def _fit_lambda(depths, s_values, s_samples=None):
    """Fit ``A lambda^n``, weighting each depth by the inverse variance of its mean when samples are given."""
    weights = None
    if s_samples is not None and len(s_samples[0]) > 1:
        var = np.var(np.asarray(s_samples, dtype=float), axis=1, ddof=1) / len(s_samples[0])
        # keep noiseless depths from dominating the fit
        floor = max(float(np.max(var)) * 1e-6, 1e-18)
        weights = 1.0 / np.maximum(var, floor)
    fit = fit_exponential(depths, s_values, weights=weights, absolute_sigma=weights is not None)
    if not 0 < fit.lam <= 1 + 1e-6:
        raise FitRejectedError(f"fitted decay {fit.lam:.6g} outside (0, 1]")
    return fit


def drb_fit(tables, scale_bit=DEFAULT_SCALE_BIT, scale_ph=DEFAULT_SCALE_PH, ph_mode="twirl", weighted=True):
    """Fit ``S_b(n) = A_b lambda_b^n`` for both bases and derive the error rates.

    When the tables carry per-sample survivals and ``weighted`` is set, each
    depth is weighted by the inverse variance of its mean and the uncertainties
    are absolute.

    ``p_bit = (1 - lambda1)/2`` and ``p_ph = (1 - lambda2 - p_bit)/2``
    (``ph_mode="simple"`` uses ``(1 - lambda2)/2``), each multiplied by its
    scale factor. ``eta = p_ph/p_bit``; with no resolvable bit flips ``eta`` is
    ``p_ph`` over the one-sigma bit-flip resolution and flagged a lower bound.
    """
    for b in (1, 2):
        if len(tables[b]["depths"]) < 3:
            raise ValueError("need at least three depths per basis")
    f1, f2 = (_fit_lambda(tables[b]["depths"], tables[b]["S"], tables[b].get("samples") if weighted else None)
              for b in (1, 2))
    pb_raw = (1 - f1.lam) / 2
    sig_pb_raw = f1.sigma_lam / 2
    if ph_mode == "twirl":
        pp_raw = (1 - f2.lam - pb_raw) / 2
        sig_pp_raw = math.hypot(f2.sigma_lam, sig_pb_raw) / 2
    elif ph_mode == "simple":
        pp_raw = (1 - f2.lam) / 2
        sig_pp_raw = f2.sigma_lam / 2
    else:
        raise ValueError("ph_mode must be 'twirl' or 'simple'")
    p_bit = max(pb_raw, 0.0) * scale_bit
    p_ph = max(pp_raw, 0.0) * scale_ph
    sig_pb, sig_pp = sig_pb_raw * scale_bit, sig_pp_raw * scale_ph
    if p_bit > 0 and p_bit > sig_pb:
        eta, lower = p_ph / p_bit, False
    else:
        res = max(p_bit, sig_pb)
        eta, lower = (p_ph / res if res > 0 else math.inf), True
    return DrbResult(f1.lam, f2.lam, f1.sigma_lam, f2.sigma_lam, p_bit, p_ph, sig_pb, sig_pp,
                     eta, lower, scale_bit, scale_ph)


def injected_noise(p_ph, bit_fraction=0.02, **kw):
    """Pauli channel on Z-type elements with ``p_z = p_ph`` and ``p_x = p_y = bit_fraction p_ph/2``."""
    pb = bit_fraction * p_ph
    return GateNoiseModel(errors={"Z": pauli_channel_ptm(pb / 2, pb / 2, p_ph)}, **kw)


def drb_scaling_calibration(error_grid, seed=0, depths=(1, 2, 4, 8, 16, 32, 64, 128), shots=None,
                            samples_per_depth=None, bit_fraction=0.02, ph_mode="twirl", threads=1):
    """Slopes of real versus extracted error rates, fitted through the origin.

    For each ``p_ph`` in ``error_grid`` a Pauli channel with bit-flip rate
    ``bit_fraction p_ph`` is injected on the Z-type elements, DRB is run and
    fitted without scaling. With ``samples_per_depth=None`` the exact average
    over all circuits is used; otherwise circuits are sampled (and measured with
    ``shots``, ``None`` meaning exact probabilities). Returns
    ``(scale_bit, scale_ph, rows)`` with per-point ``(real, extracted)`` rows.
    """
    grid = [float(x) for x in error_grid]
    if not grid or all(x == 0 for x in grid) or any(not 0 <= x <= 0.03 + 1e-12 for x in grid):
        raise CalibrationError("calibration grid needs non-zero rates in [0, 0.03]")
    rows = []
    for i, pr in enumerate(grid):
        noise = injected_noise(pr, bit_fraction)
        if samples_per_depth is None:
            tables = {b: {"depths": list(depths), "S": [v for _, v in sorted(drb_expected(noise, depths, b).items())]}
                      for b in (1, 2)}
        else:
            tables = drb_run(noise, depths, samples_per_depth, shots, stream(seed, 2, i).integers(2**31),
                             threads=threads)
        # unweighted, so exact and sampled modes fit the same model
        res = drb_fit(tables, 1.0, 1.0, ph_mode, weighted=False)
        rows.append({"p_ph_real": pr, "p_bit_real": bit_fraction * pr,
                     "p_ph_extracted": res.p_ph, "p_bit_extracted": res.p_bit})
    xb = np.array([r["p_bit_extracted"] for r in rows])
    yb = np.array([r["p_bit_real"] for r in rows])
    xp = np.array([r["p_ph_extracted"] for r in rows])
    yp = np.array([r["p_ph_real"] for r in rows])
    if xb @ xb == 0 or xp @ xp == 0:
        raise CalibrationError("extracted error rates vanish on the whole grid")
    return float(xb @ yb / (xb @ xb)), float(xp @ yp / (xp @ xp)), rows
