"""Gate set tomography circuits, simulated datasets and linear-inversion estimates.

Gate labels: ``"X"`` is X(pi/2), ``"Z"`` is Z(pi/2) and ``"Y"`` is Y(pi/2)
compiled as the operator product ``X(pi) Z(pi/2) X(pi/2) Z(pi/2)``, i.e. the
time sequence Z, X, Z followed by a virtual X(pi). Label strings are read in
time order. Circuits are ``F_i G^l F_j`` with ``l = floor(L/len(G))``.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from ..errors import GramSingularError, ModelError
from ..pauli import ptm_from_unitary, rotation
from ..pool import ordered_map
from ..rng import stream

DEFAULT_GERMS = ("Z", "X", "Y", "YX", "XZ", "YZ", "YXXZ", "YYYZ", "XZYZZ", "XXXZ")
DEFAULT_FIDUCIALS = ("X", "Y", "XX", "")
DEFAULT_MAX_LENGTHS = (0, 1, 2, 4, 8, 16, 32, 64, 128)

IDEAL = {
    "X": ptm_from_unitary(rotation("X", math.pi / 2)),
    "Z": ptm_from_unitary(rotation("Z", math.pi / 2)),
    "Xpi": ptm_from_unitary(rotation("X", math.pi)),
}
RHO_IDEAL = np.array([1.0, 0.0, 0.0, 1.0])
MEAS_IDEAL = np.array([1.0, 0.0, 0.0, 1.0])


def _compose_y(g):
    return g["Xpi"] @ g["Z"] @ g["X"] @ g["Z"]


IDEAL["Y"] = _compose_y(IDEAL)


def sequence_ptm(labels, gates):
    m = np.eye(4)
    for lab in labels:
        m = gates[lab] @ m
    return m


@dataclass(frozen=True)
class GstCircuit:
    prep: str
    germ: str
    power: int
    meas: str
    L: int = 0
    germ_index: int = 0
    i: int = 0
    j: int = 0

    @property
    def labels(self):
        return tuple(self.prep) + tuple(self.germ) * self.power + tuple(self.meas)

    def to_line(self):
        def fid(s):
            return ",".join(s) if s else "-"

        germ = ",".join(self.germ) if self.power else "-"
        return f"F:{fid(self.prep)} G:{germ}^{self.power} F:{fid(self.meas)}"

    @classmethod
    def from_line(cls, line):
        f1, g, f2 = line.split()
        germ, power = g[2:].split("^")

        def fid(s):
            return "" if s == "-" else s.replace(",", "")

        return cls(fid(f1[2:]), "" if germ == "-" else germ.replace(",", ""), int(power), fid(f2[2:]))


def gst_generate(max_lengths=DEFAULT_MAX_LENGTHS, germs=DEFAULT_GERMS, fiducials=DEFAULT_FIDUCIALS):
    """Deduplicated ``F_i G^l F_j`` circuits ordered by ``L``, germ index, then fiducial indices."""
    for s in tuple(germs) + tuple(fiducials):
        if any(c not in "XYZ" for c in s):
            raise ValueError(f"unknown gate label in {s!r}")
    seen = set()
    out = []
    for L in max_lengths:
        for gi, germ in enumerate(germs):
            power = L // len(germ)
            for i, fi in enumerate(fiducials):
                for j, fj in enumerate(fiducials):
                    c = GstCircuit(fi, germ if power else "", power, fj, L, gi, i, j)
                    if c.labels in seen:
                        continue
                    seen.add(c.labels)
                    out.append(c)
    return out


def model_gates(noise):
    """``(germ_gates, fiducial_gates)`` PTM dictionaries for a noise model."""
    xpi = noise.error("Xpi") @ IDEAL["Xpi"] if noise.noisy_virtual_x else IDEAL["Xpi"]
    g = {"X": noise.error("X") @ IDEAL["X"], "Z": noise.error("Z") @ IDEAL["Z"], "Xpi": xpi}
    g["Y"] = _compose_y(g)
    return g, (IDEAL if noise.ideal_fiducials else g)


def circuit_probability(c, germ_gates, fid_gates, rho, meas):
    m = np.linalg.matrix_power(sequence_ptm(c.germ, germ_gates), c.power) if c.power else np.eye(4)
    v = sequence_ptm(c.meas, fid_gates) @ m @ sequence_ptm(c.prep, fid_gates) @ rho
    return 0.5 * float(meas @ v)


@dataclass
class GstDataset:
    """Outcome-0 counts per circuit. ``shots=None`` marks exact probabilities (``n0 + n1 = 1``)."""

    circuits: list
    n0: np.ndarray
    n1: np.ndarray
    shots: int = None

    @property
    def p0(self):
        return self.n0 / (self.n0 + self.n1)

    def lookup(self):
        return {c.labels: k for k, c in enumerate(self.circuits)}


def gst_simulate(circuits, noise, shots=None, seed=0, threads=1):
    germ_g, fid_g = model_gates(noise)
    rho, meas = noise.spam(1)

    def one(k):
        p = circuit_probability(circuits[k], germ_g, fid_g, rho, meas)
        if not -1e-9 <= p <= 1 + 1e-9:
            raise ModelError(f"circuit {k} has outcome probability {p:.3g}")
        p = min(max(p, 0.0), 1.0)
        if shots is None:
            return p, 1.0 - p
        n0 = int(stream(seed, k).binomial(int(shots), p))
        return float(n0), float(shots - n0)

    vals = np.array(ordered_map(one, range(len(circuits)), threads))
    return GstDataset(list(circuits), vals[:, 0], vals[:, 1], shots)


@dataclass
class LgstResult:
    gates: dict
    condition: float


def _fiducial_matrices(fiducials):
    b = np.array([sequence_ptm(f, IDEAL) @ RHO_IDEAL for f in fiducials]).T
    return b


def _lgst(dataset, fiducials, labels):
    idx = dataset.lookup()
    p = dataset.p0
    nf = len(fiducials)

    def pmat(mid):
        out = np.empty((nf, nf))
        for i, fi in enumerate(fiducials):
            for j, fj in enumerate(fiducials):
                key = tuple(fi) + tuple(mid) + tuple(fj)
                if key not in idx:
                    raise GramSingularError(f"dataset lacks circuit {''.join(key) or '(empty)'}")
                out[j, i] = p[idx[key]]
        return out

    p0 = pmat("")
    cond = float(np.linalg.cond(p0))
    if not np.isfinite(cond) or cond > 1e10:
        raise GramSingularError(f"fiducial Gram matrix is singular (condition number {cond:.3g})")
    b = _fiducial_matrices(fiducials)
    binv = np.linalg.inv(b)
    p0inv = np.linalg.inv(p0)
    gates = {lab: b @ p0inv @ pmat(lab) @ binv for lab in labels}
    return gates, cond


def _unpack(x):
    g = {"Xpi": IDEAL["Xpi"]}
    for k, lab in enumerate(("X", "Z")):
        m = np.zeros((4, 4))
        m[0, 0] = 1.0
        m[1:, :] = x[12 * k:12 * (k + 1)].reshape(3, 4)
        g[lab] = m
    g["Y"] = _compose_y(g)
    return g


def _refine(dataset, start):
    circuits = dataset.circuits
    y = dataset.p0
    if dataset.shots is None:
        w = np.ones_like(y)
    else:
        var = np.clip(y * (1 - y), 1.0 / dataset.shots, None) / dataset.shots
        w = 1.0 / np.sqrt(var)
    # circuits sharing a germ power differ only by ideal fiducials: evaluate each power once
    fids = sorted({c.prep for c in circuits} | {c.meas for c in circuits})
    fpos = {f: k for k, f in enumerate(fids)}
    preps = np.array([sequence_ptm(f, IDEAL) @ RHO_IDEAL for f in fids])
    effects = np.array([0.5 * MEAS_IDEAL @ sequence_ptm(f, IDEAL) for f in fids])
    groups = {}
    for k, c in enumerate(circuits):
        groups.setdefault((c.germ, c.power), []).append((k, fpos[c.prep], fpos[c.meas]))
    groups = [(key, np.array(v)) for key, v in groups.items()]

    def resid(x):
        g = _unpack(x)
        pred = np.empty(len(circuits))
        for (germ, power), rows in groups:
            m = np.linalg.matrix_power(sequence_ptm(germ, g), power) if power else np.eye(4)
            pred[rows[:, 0]] = np.einsum("ki,ij,kj->k", effects[rows[:, 2]], m, preps[rows[:, 1]])
        return w * (pred - y)

    x0 = np.concatenate([start["X"][1:].ravel(), start["Z"][1:].ravel()])
    res = least_squares(resid, x0, method="lm", xtol=1e-12, ftol=1e-12)
    g = _unpack(res.x)
    return {lab: g[lab] for lab in ("X", "Z", "Y")}


def lgst_estimate(dataset, fiducials=DEFAULT_FIDUCIALS, refine=True):
    """Gate estimates gauge-fixed by ideal fiducials and SPAM.

    Linear inversion ``G = B P_0^-1 P(G) B^-1`` uses the single-gate circuits
    ``F_i G F_j``. With ``refine`` the X and Z estimates then seed a
    trace-preserving least-squares fit to every circuit, which brings in the
    long germ powers. Returns an :class:`LgstResult` with the fiducial Gram
    condition number.
    """
    gates, cond = _lgst(dataset, fiducials, ("X", "Z", "Y"))
    if refine:
        gates = _refine(dataset, gates)
    return LgstResult(gates, cond)
