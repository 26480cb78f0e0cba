"""Pulse-level gates on the cat qubit and extraction of their logical channels.

``Z(theta)`` comes from a resonant single-photon drive that tilts the double
well; ``X(pi/2)`` from phase-modulating the two-photon drive, which lowers the
barrier and lets the wells tunnel. Logical states and projections always use
the frame of the static, unmodulated Hamiltonian.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from . import fock, model
from .dynamics import lindblad_states, schrodinger_evolve, standard_collapse_set
from .errors import DomainError
from .pauli import process_fidelity, ptm_distance, ptm_from_map, ptm_from_unitary, rotation  # noqa: F401
from .pool import ordered_map


@dataclass(frozen=True)
class ZGatePulse:
    """Square single-photon drive ``H_d = (omega/2) a^dag + (omega^*/2) a``."""

    omega: complex
    duration: float

    def __post_init__(self):
        if self.duration < 0:
            raise ValueError("duration must be non-negative")


@dataclass(frozen=True)
class XGatePulse:
    delta0: float
    t_gate: float

    def __post_init__(self):
        if not self.t_gate > 0:
            raise ValueError("t_gate must be positive")


@dataclass(frozen=True)
class LogicalChannel:
    ptm: np.ndarray
    leakage: float

    def to_dict(self):
        return {"basis": "IXYZ", "ptm": self.ptm.tolist(), "leakage": self.leakage}


def ideal_ptm(axis, theta):
    return ptm_from_unitary(rotation(axis, theta))


def _envelope(t, tg):
    return np.exp(-8.0 * (t - tg / 3) ** 2 / tg**2)


def modulation_phase(t, pulse):
    """Phase ``g(t)`` of the modulated two-photon drive ``eps2 exp(-i g(t))``.

    ``g = -delta0 t sin(3 pi t/(2 T_g))`` up to ``T_g/3`` and
    ``-delta0 t f(t)(f(t) - f(T_g))/(1 - f(T_g))`` after, with
    ``f(t) = exp(-8 (t - T_g/3)^2/T_g^2)``.
    """
    tg = pulse.t_gate
    t_arr = np.asarray(t, dtype=float)
    eps = 1e-12 * tg
    if np.any(t_arr < -eps) or np.any(t_arr > tg + eps):
        raise DomainError("modulation phase is defined on [0, T_g] only")
    t_arr = np.clip(t_arr, 0.0, tg)
    ftg = _envelope(tg, tg)
    f = _envelope(t_arr, tg)
    first = -np.sin(1.5 * np.pi * t_arr / tg)
    second = -f * (f - ftg) / (1.0 - ftg)
    g = pulse.delta0 * t_arr * np.where(t_arr <= tg / 3, first, second)
    return float(g) if np.ndim(t) == 0 else g


def _ops(dim):
    a = fock.annihilation_op(dim)
    ad = a.conj().T
    return a, ad


def x_gate_hamiltonian(p, pulse):
    """``t -> H(t)`` with ``eps2 -> eps2 exp(-i g(t))``."""
    a, ad = _ops(p.dim)
    n, a2, ad2 = ad @ a, a @ a, ad @ ad
    static = p.delta * n - p.kerr * (ad2 @ a2)

    def h(t):
        ph = np.exp(-1j * modulation_phase(min(max(t, 0.0), pulse.t_gate), pulse))
        return static + p.eps2 * ph * ad2 + p.eps2 * np.conj(ph) * a2

    return h


def z_gate_hamiltonian(p, pulse):
    a, ad = _ops(p.dim)
    return model.build_hamiltonian(p) + 0.5 * pulse.omega * ad + 0.5 * np.conj(pulse.omega) * a


def _evolve_block(h, t_end, block, noise, p):
    """Evolve kets (``dim`` or ``dim x k``) or, with noise, a density matrix."""
    if noise is None:
        if callable(h):
            _, out = schrodinger_evolve(h, block, [0.0, t_end])
            return out
        return fock.expm_hermitian(h, t_end) @ block
    cops = standard_collapse_set(noise, p.dim)
    return lindblad_states(h, cops, block, [0.0, t_end])[-1]


def _frame(p, frame):
    return model.cat_frame(p) if frame is None else frame


def x_gate_sim(p, noise, pulse, psi0, frame=None):
    """Apply the modulated-drive pulse to ``psi0``.

    ``psi0`` is a ket (closed system when ``noise`` is None) or a density
    matrix. Returns ``(final_state, <Z_L>)``.
    """
    frame = _frame(p, frame)
    state = np.asarray(psi0, dtype=complex)
    if noise is not None and state.ndim == 1:
        state = fock.ket_to_dm(state)
    out = _evolve_block(x_gate_hamiltonian(p, pulse), pulse.t_gate, state, noise, p)
    return out, fock.expect(frame.logical_Z, out).real


def z_gate_sim(p, pulse, psi0, noise=None):
    """Apply a square single-photon drive for ``pulse.duration``; returns the final state."""
    state = np.asarray(psi0, dtype=complex)
    if noise is not None and state.ndim == 1:
        state = fock.ket_to_dm(state)
    return _evolve_block(z_gate_hamiltonian(p, pulse), pulse.duration, state, noise, p)


def extract_logical_channel(gate, frame, closed=True):
    """Logical PTM and leakage of a linear gate map.

    ``gate`` maps kets to kets when ``closed`` (it may receive a ``dim x 2``
    block), otherwise density matrices to density matrices. Outputs are
    projected onto the codespace; leakage is ``1 - Tr(P E(I/2))``.
    """
    v = frame.basis
    if closed:
        w = v.conj().T @ np.asarray(gate(v))

        def logical(m):
            return w @ m @ w.conj().T
    else:
        kets = {
            "0": v[:, 0],
            "1": v[:, 1],
            "+": (v[:, 0] + v[:, 1]) / math.sqrt(2),
            "i": (v[:, 0] + 1j * v[:, 1]) / math.sqrt(2),
        }
        out = {k: v.conj().T @ gate(fock.ket_to_dm(s)) @ v for k, s in kets.items()}
        # images of the matrix units |0><1| and |1><0|
        e01 = out["+"] + 1j * out["i"] - 0.5 * (1 + 1j) * (out["0"] + out["1"])
        e10 = out["+"] - 1j * out["i"] - 0.5 * (1 - 1j) * (out["0"] + out["1"])

        def logical(m):
            return m[0, 0] * out["0"] + m[1, 1] * out["1"] + m[0, 1] * e01 + m[1, 0] * e10

    ptm = ptm_from_map(logical)
    leak = 1.0 - float(np.real(np.trace(logical(np.eye(2))))) / 2
    return LogicalChannel(ptm, min(max(leak, 0.0), 1.0))


def x_gate_channel(p, pulse, noise=None, frame=None):
    frame = _frame(p, frame)
    return extract_logical_channel(lambda s: x_gate_sim(p, noise, pulse, s, frame)[0], frame, closed=noise is None)


def z_gate_channel(p, pulse, noise=None, frame=None):
    frame = _frame(p, frame)
    return extract_logical_channel(lambda s: z_gate_sim(p, pulse, s, noise), frame, closed=noise is None)


def z_rotation_rate(p, omega, t_max, n_points=41, frame=None):
    """Fitted logical Z rotation rate under a constant single-photon drive.

    Starts in ``|+X>``, records the azimuth ``atan2(<Y>, <X>)`` and fits a line
    through it. Returns ``(rate, r_squared, times, angles)``.
    """
    frame = _frame(p, frame)
    h = z_gate_hamiltonian(p, ZGatePulse(omega, t_max))
    w, vecs = fock.eig_hermitian(h)
    c0 = vecs.conj().T @ frame.state("+X")
    times = np.linspace(0.0, t_max, n_points)
    ang = []
    for t in times:
        psi = vecs @ (np.exp(-1j * w * t) * c0)
        x, y, _ = frame.paulis(psi)
        ang.append(math.atan2(y, x))
    ang = np.unwrap(np.array(ang))
    slope, icpt = np.polyfit(times, ang, 1)
    fit = slope * times + icpt
    ss = float(np.sum((ang - ang.mean()) ** 2))
    r2 = 1.0 - float(np.sum((ang - fit) ** 2)) / ss if ss > 0 else 1.0
    return float(slope), r2, times, ang


def chevron_x(p, delta0_grid, t_gate_grid, initial="ground", frame=None, threads=1):
    """``<Z>`` after one modulation pulse for each ``(t_gate, delta0)``.

    Rows follow ``t_gate_grid`` and columns ``delta0_grid``. The system starts
    in the ``+Z`` well state of the top doublet (``initial="ground"``) or of
    the next doublet below it (``initial="excited"``), and ``<Z>`` is measured
    with the matching doublet's logical Z.
    """
    frame = _frame(p, frame)
    if initial == "ground":
        psi0, zop = frame.state("+Z"), frame.logical_Z
    elif initial == "excited":
        psi0, zop = excited_well(p)
    else:
        raise ValueError("initial must be 'ground' or 'excited'")
    grid = [(tg, d0) for tg in t_gate_grid for d0 in delta0_grid]
    if not grid:
        raise ValueError("grid must be non-empty")

    def point(item):
        tg, d0 = item
        out, _ = x_gate_sim(p, None, XGatePulse(d0, tg), psi0, frame)
        return fock.expect(zop, out).real

    vals = ordered_map(point, grid, threads)
    return np.array(vals).reshape(len(t_gate_grid), len(delta0_grid))


def chevron_z(p, phase_grid, duration_grid, omega_abs, frame=None, threads=1):
    """``<Y>`` after a single-photon drive ``|omega| e^{i phase}`` starting in ``|+Y>``.

    This mirrors the calibration sequence that prepares and reads out along Y.
    Rows follow ``duration_grid`` and columns ``phase_grid``.
    """
    frame = _frame(p, frame)
    psi0 = frame.state("+Y")
    if len(phase_grid) == 0 or len(duration_grid) == 0:
        raise ValueError("grid must be non-empty")

    def column(phase):
        h = z_gate_hamiltonian(p, ZGatePulse(omega_abs * np.exp(1j * phase), 0.0))
        w, vecs = fock.eig_hermitian(h)
        c0 = vecs.conj().T @ psi0
        return [fock.expect(frame.logical_Y, vecs @ (np.exp(-1j * w * t) * c0)).real for t in duration_grid]

    cols = ordered_map(column, list(phase_grid), threads)
    return np.array(cols).T


def excited_well(p):
    """``+Z``-like well state of the doublet just below the stabilized one, and its Z operator."""
    h = model.build_hamiltonian(p)
    dim = p.dim
    vecs = []
    for start in (0, 1):
        idx = np.arange(start, dim, 2)
        _, v = np.linalg.eigh(h[np.ix_(idx, idx)])
        e = np.zeros(dim, dtype=complex)
        e[idx] = v[:, -2]
        vecs.append(e)
    ep, em = vecs
    a = fock.annihilation_op(dim)
    ov = np.vdot(ep, a @ em)
    em = em * np.exp(1j * np.angle(ov))
    z = np.outer(ep, em.conj()) + np.outer(em, ep.conj())
    return (ep + em) / math.sqrt(2), z


def optimize_x_gate(p, delta0_grid=(4.0, 8.0, 12.0, 16.0), t_gate_grid=(2.5, 3.5, 4.5), frame=None,
                    maxiter=60, threads=1):
    """Coarse grid then Nelder-Mead on ``(delta0, t_gate)`` minimizing X(pi/2) infidelity.

    Returns ``(pulse, fidelity, channel)``.
    """
    frame = _frame(p, frame)
    ideal = ideal_ptm("X", math.pi / 2)

    def infid(x):
        d0, tg = float(x[0]), float(x[1])
        if tg <= 0.1:
            return 1.0
        ch = x_gate_channel(p, XGatePulse(d0, tg), frame=frame)
        return 1.0 - process_fidelity(ch.ptm, ideal)

    grid = [(d0, tg) for tg in t_gate_grid for d0 in delta0_grid]
    scores = ordered_map(infid, grid, threads)
    start = grid[int(np.argmin(scores))]
    res = minimize(infid, np.array(start), method="Nelder-Mead",
                   options={"maxiter": maxiter, "xatol": 1e-3, "fatol": 1e-6,
                            "initial_simplex": [start, (start[0] * 1.1, start[1]), (start[0], start[1] * 1.1)]})
    best = res.x if res.fun <= min(scores) else np.array(start)
    pulse = XGatePulse(float(best[0]), float(best[1]))
    ch = x_gate_channel(p, pulse, frame=frame)
    return pulse, process_fidelity(ch.ptm, ideal), ch
