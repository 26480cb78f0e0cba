"""SNAIL potential and the detuned Kerr-cat Hamiltonian.

The Hamiltonian is ``H = delta a^dag a + eps2 a^dag^2 + eps2^* a^2 - K a^dag^2 a^2``.
With the negative Kerr term the stabilized cat doublet sits at the *top* of the
spectrum, so "ground" and "excited" levels here are counted from the highest
eigenvalue downward (equivalently, they are the lowest levels of ``-H``).
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import fock
from .errors import CodespaceError, InvalidRegimeError, NumericFailure, SingularInputError


@dataclass(frozen=True)
class SnailParams:
    E_J: float
    beta: float
    phi_ext: float = 0.0

    def __post_init__(self):
        if not self.E_J > 0:
            raise ValueError("E_J must be positive")
        if not 0 <= self.beta < 1:
            raise ValueError("beta must lie in [0, 1)")


@dataclass(frozen=True)
class KerrCatParams:
    """Hamiltonian parameters in units where frequencies share one scale (usually K = 1).

    ``dim=None`` picks the default truncation for the resulting mean photon number.
    """

    delta: float
    eps2: float
    kerr: float = 1.0
    dim: int = None

    def __post_init__(self):
        if not self.kerr > 0:
            raise InvalidRegimeError("Kerr coefficient must be positive")
        if self.eps2 < 0:
            raise InvalidRegimeError("eps2 is taken real and non-negative")
        nbar = (self.eps2 + self.delta / 2) / self.kerr
        if nbar < -1e-12:
            raise InvalidRegimeError(f"mean photon number {nbar:.4g} is negative")
        if self.dim is None:
            object.__setattr__(self, "dim", fock.default_dim(math.sqrt(max(nbar, 0.0))))
        elif self.dim < 2:
            raise fock.InvalidDimensionError("dim must be >= 2")

    def replace(self, **kw):
        vals = dict(delta=self.delta, eps2=self.eps2, kerr=self.kerr, dim=self.dim)
        vals.update(kw)
        return KerrCatParams(**vals)


@dataclass(frozen=True)
class DisplacedCoeffs:
    E: float
    Lambda: complex
    delta_tilde: float
    eps2_tilde: complex
    Gamma: complex


@dataclass(frozen=True, eq=False)
class CatFrame:
    """Encoded qubit on the stabilized doublet.

    ``ground_pair`` holds the even and odd parity eigenvectors (the logical X
    eigenstates). Their relative phase is fixed so that ``<alpha|g_+->`` are
    both real and positive, which makes ``(g_+ +- g_-)/sqrt(2)`` the well
    states near ``|+-alpha>`` (logical ``+-Z``).
    """

    alpha: complex
    ground_pair: tuple
    energies: tuple
    third_level: float
    logical_X: np.ndarray = field(repr=False)
    logical_Y: np.ndarray = field(repr=False)
    logical_Z: np.ndarray = field(repr=False)
    projector: np.ndarray = field(repr=False)

    @property
    def dim(self):
        return self.projector.shape[0]

    @property
    def basis(self):
        """``dim x 2`` isometry whose columns are the logical ``|0> = |+Z>`` and ``|1> = |-Z>``."""
        gp, gm = self.ground_pair
        return np.stack([(gp + gm) / math.sqrt(2), (gp - gm) / math.sqrt(2)], axis=1)

    @property
    def gap(self):
        """Separation between the doublet and the next level below it."""
        return min(self.energies) - self.third_level

    def state(self, label):
        """Logical cardinal state: one of ``+Z -Z +X -X +Y -Y``."""
        v0, v1 = self.basis.T
        table = {
            "+Z": v0,
            "-Z": v1,
            "+X": (v0 + v1) / math.sqrt(2),
            "-X": (v0 - v1) / math.sqrt(2),
            "+Y": (v0 + 1j * v1) / math.sqrt(2),
            "-Y": (v0 - 1j * v1) / math.sqrt(2),
        }
        if label not in table:
            raise KeyError(f"unknown logical state {label!r}")
        return table[label]

    def paulis(self, state):
        """Logical ``(<X>, <Y>, <Z>)`` of a ket or density matrix."""
        return tuple(fock.expect(op, state).real for op in (self.logical_X, self.logical_Y, self.logical_Z))

    def leakage(self, state):
        return 1.0 - fock.expect(self.projector, state).real


def _snail_u(phi, p):
    return (p.phi_ext - phi) / 3.0


def snail_potential(phi, p):
    """``U(phi) = -beta E_J cos(phi) - 3 E_J cos((phi_ext - phi)/3)``."""
    return -p.beta * p.E_J * np.cos(phi) - 3.0 * p.E_J * np.cos(_snail_u(phi, p))


def snail_derivative(phi, p, order):
    """Analytic ``d^order U / d phi^order`` for order 0..4."""
    b, ej, u = p.beta, p.E_J, _snail_u(phi, p)
    if order == 0:
        return snail_potential(phi, p)
    if order == 1:
        return b * ej * np.sin(phi) - ej * np.sin(u)
    if order == 2:
        return b * ej * np.cos(phi) + ej / 3.0 * np.cos(u)
    if order == 3:
        return -b * ej * np.sin(phi) + ej / 9.0 * np.sin(u)
    if order == 4:
        return -b * ej * np.cos(phi) - ej / 27.0 * np.cos(u)
    raise ValueError("derivative order must be 0..4")


def snail_taylor(p):
    """Minimum of the SNAIL potential and its Taylor coefficients ``g_k = U^(k)/k!``.

    The minimum is bracketed on ``(-pi, pi)`` and polished with Newton steps on
    ``U'`` so that ``|U'(phi_min)|`` is at rounding level. Returns
    ``(phi_min, g2, g3, g4)``.
    """
    res = minimize_scalar(lambda x: snail_potential(x, p) / p.E_J, bounds=(-math.pi, math.pi),
                          method="bounded", options={"xatol": 1e-10})
    phi = float(res.x)
    for _ in range(50):
        d2 = snail_derivative(phi, p, 2)
        if d2 <= 0:
            break
        step = snail_derivative(phi, p, 1) / d2
        phi -= step
        if abs(step) < 1e-15:
            break
    if not abs(snail_derivative(phi, p, 1)) <= 1e-9 * p.E_J or snail_derivative(phi, p, 2) <= 0:
        raise NumericFailure("could not locate a SNAIL potential minimum in (-pi, pi)")
    g = [snail_derivative(phi, p, k) / math.factorial(k) for k in (2, 3, 4)]
    return phi, g[0], g[1], g[2]


def mean_photon(p):
    """``|alpha|^2 = (eps2 + delta/2)/K``."""
    nbar = (p.eps2 + p.delta / 2) / p.kerr
    if nbar < 0:
        raise InvalidRegimeError(f"mean photon number {nbar:.4g} is negative")
    return nbar


def build_hamiltonian(p):
    a = fock.annihilation_op(p.dim)
    ad = a.conj().T
    a2 = a @ a
    ad2 = ad @ ad
    h = p.delta * (ad @ a) + p.eps2 * ad2 + np.conj(p.eps2) * a2 - p.kerr * (ad2 @ a2)
    return 0.5 * (h + h.conj().T)


def displaced_coeffs(p, alpha):
    """Coefficients of ``D^dag(alpha) H D(alpha)``, i.e. ``H`` with ``a -> a + alpha``.

    The displaced operator reads
    ``E + Lambda a^dag + Lambda^* a + delta_t a^dag a + eps2_t a^dag^2 + eps2_t^* a^2
    + Gamma a^dag^2 a + Gamma^* a^dag a^2 - K a^dag^2 a^2``.
    """
    d, e2, k = p.delta, p.eps2, p.kerr
    n = abs(alpha) ** 2
    ac = np.conj(alpha)
    E = d * n + e2 * ac**2 + np.conj(e2) * alpha**2 - k * n**2
    return DisplacedCoeffs(
        E=float(np.real(E)),
        Lambda=complex(d * alpha + 2 * e2 * ac - 2 * k * n * alpha),
        delta_tilde=float(d - 4 * k * n),
        eps2_tilde=complex(e2 - k * alpha**2),
        Gamma=complex(-2 * k * alpha),
    )


def displaced_hamiltonian(p, alpha):
    """Operator rebuilt from :func:`displaced_coeffs`."""
    c = displaced_coeffs(p, alpha)
    a = fock.annihilation_op(p.dim)
    ad = a.conj().T
    h = (
        c.E * np.eye(p.dim)
        + c.Lambda * ad
        + np.conj(c.Lambda) * a
        + c.delta_tilde * (ad @ a)
        + c.eps2_tilde * (ad @ ad)
        + np.conj(c.eps2_tilde) * (a @ a)
        + c.Gamma * (ad @ ad @ a)
        + np.conj(c.Gamma) * (ad @ a @ a)
        - p.kerr * (ad @ ad @ a @ a)
    )
    return 0.5 * (h + h.conj().T)


def _pt_denominator(p):
    den = 4 * p.eps2 + p.delta
    if den == 0:
        raise SingularInputError("4*eps2 + delta vanishes")
    return den


def perturbative_ground_energy(p):
    """``(delta/2 + eps2)^2/K + delta^2 K/(4 eps2 + delta)^2``."""
    den = _pt_denominator(p)
    return (p.delta / 2 + p.eps2) ** 2 / p.kerr + p.delta**2 * p.kerr / den**2


def perturbative_ground_state(p):
    """Perturbative stabilized state as ``(displaced_frame, lab_frame)`` kets.

    The displaced-frame state is ``|0> - c|2>`` with ``c = sqrt(2) delta/(4(4 eps2 + delta))``,
    normalized. The lab-frame state is ``D^dag(alpha)`` applied to it, the well
    near ``|-alpha>``.
    """
    den = _pt_denominator(p)
    psi = np.zeros(p.dim, dtype=complex)
    psi[0] = 1.0
    psi[2] = -math.sqrt(2) * p.delta / (4 * den)
    psi /= np.linalg.norm(psi)
    alpha = math.sqrt(mean_photon(p))
    lab = fock.displacement_op(-alpha, p.dim) @ psi
    return psi, lab


def _sector_top(h, idx):
    w, v = np.linalg.eigh(h[np.ix_(idx, idx)])
    vec = np.zeros(h.shape[0], dtype=complex)
    vec[idx] = v[:, -1]
    return w, vec


def cat_frame(p, min_gap=None):
    """Logical frame on the top doublet of :func:`build_hamiltonian`.

    The two parity sectors are diagonalized separately, which removes the
    ordering and mixing ambiguity of the nearly degenerate doublet. Raises
    :class:`CodespaceError` when the doublet is closer than ``min_gap``
    (default ``K``) to the next level.
    """
    if p.eps2 / p.kerr < 1:
        raise InvalidRegimeError("cat frame requires eps2/K >= 1")
    h = build_hamiltonian(p)
    dim = p.dim
    even = np.arange(0, dim, 2)
    odd = np.arange(1, dim, 2)
    we, gp = _sector_top(h, even)
    wo, gm = _sector_top(h, odd)
    alpha = math.sqrt(mean_photon(p))
    coh = fock.coherent_state(alpha, dim)
    gp = gp * np.exp(-1j * np.angle(np.vdot(coh, gp)))
    gm = gm * np.exp(-1j * np.angle(np.vdot(coh, gm)))
    third = max(we[-2], wo[-2])
    energies = (float(we[-1]), float(wo[-1]))
    min_gap = p.kerr if min_gap is None else min_gap
    if min(energies) - third < min_gap:
        raise CodespaceError(
            f"doublet separated from next level by {min(energies) - third:.3g}, need {min_gap:.3g}"
        )
    pp = np.outer(gp, gp.conj())
    mm = np.outer(gm, gm.conj())
    pm = np.outer(gp, gm.conj())
    mp = pm.conj().T
    return CatFrame(
        alpha=alpha,
        ground_pair=(gp, gm),
        energies=energies,
        third_level=float(third),
        logical_X=pp - mm,
        logical_Y=1j * (pm - mp),
        logical_Z=pm + mp,
        projector=pp + mm,
    )


@dataclass(frozen=True)
class SpectrumReport:
    deltas: np.ndarray
    levels: np.ndarray
    pair_gaps: np.ndarray
    degenerate: list
    threshold: float

    def degenerate_pairs(self, i):
        """Indices of excited pairs (1, 2, ...) flagged degenerate at grid point ``i``."""
        return self.degenerate[i]


def spectrum_vs_detuning(eps2, kerr, delta_grid, dim=None, m=8, threshold=None):
    """Top ``m`` levels of the Hamiltonian along a detuning sweep.

    Levels are listed from the stabilized doublet downward. Consecutive levels
    are grouped into pairs (0,1), (2,3), ...; an excited pair (index >= 1) whose
    splitting is below ``threshold`` (default ``1e-2 K``) is flagged.
    """
    threshold = 1e-2 * kerr if threshold is None else threshold
    deltas = np.asarray(delta_grid, dtype=float)
    if not np.all(np.isfinite(deltas)):
        raise ValueError("detuning grid must be finite")
    levels, gaps, flagged = [], [], []
    for d in deltas:
        p = KerrCatParams(delta=float(d), eps2=eps2, kerr=kerr, dim=dim)
        w = np.linalg.eigvalsh(build_hamiltonian(p))[::-1][:m]
        pg = np.abs(w[0:len(w) - 1:2] - w[1::2])
        levels.append(w)
        gaps.append(pg)
        flagged.append([int(j) for j in range(1, len(pg)) if pg[j] < threshold])
    return SpectrumReport(deltas, np.array(levels), np.array(gaps), flagged, threshold)
