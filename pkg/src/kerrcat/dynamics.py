"""Schrodinger and Lindblad time evolution, the noise model, and lifetime extraction.

Density matrices are vectorized column-major (``vec(A X B) = (B^T kron A) vec(X)``)
whenever a superoperator is formed.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import fock, model
from .errors import IntegratorError
from .fitting import fit_decay
from .pool import ordered_map
from .rng import stream

RTOL = 1e-8
ATOL = 1e-10
# static Hamiltonians up to this size are propagated with a cached superoperator exponential
EXPM_MAX_DIM = 45


@dataclass(frozen=True)
class NoiseParams:
    """Rates of the four incoherent processes and the quasi-static detuning spread."""

    kappa1: float = 0.0
    n_th: float = 0.0
    kappa2: float = 0.0
    kappa_phi: float = 0.0
    xi: float = 0.0

    def __post_init__(self):
        for name in ("kappa1", "n_th", "kappa2", "kappa_phi", "xi"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.n_th >= 0.5:
            raise ValueError("n_th must be below 0.5")

    def replace(self, **kw):
        vals = dict(kappa1=self.kappa1, n_th=self.n_th, kappa2=self.kappa2, kappa_phi=self.kappa_phi, xi=self.xi)
        vals.update(kw)
        return NoiseParams(**vals)


@dataclass
class Trajectory:
    times: np.ndarray
    observables: dict = field(default_factory=dict)

    def rows(self):
        """``(t, name, value)`` rows ordered by observable name, then time."""
        for name in sorted(self.observables):
            for t, v in zip(self.times, self.observables[name]):
                yield float(t), name, float(v)

    def __getitem__(self, name):
        return self.observables[name]


def _as_h_of_t(h):
    if callable(h):
        return h, False
    h = np.asarray(h, dtype=complex)
    return (lambda t: h), True


def _observe(obs, states, rho):
    out = {}
    for name, op in obs.items():
        if callable(op):
            out[name] = [float(op(s)) for s in states]
        elif rho:
            out[name] = [float(np.real(np.trace(op @ s))) for s in states]
        else:
            out[name] = [float(np.real(np.vdot(s, op @ s))) for s in states]
    return {k: np.array(v) for k, v in out.items()}


def _integrate(rhs, y0, t_grid, rtol, atol):
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) == 1 or t_grid[-1] == t_grid[0]:
        return np.repeat(y0[:, None], len(t_grid), axis=1)
    sol = solve_ivp(rhs, (t_grid[0], t_grid[-1]), y0, method="DOP853", t_eval=t_grid, rtol=rtol, atol=atol)
    if sol.status != 0:
        raise IntegratorError(f"integration failed: {sol.message}")
    return sol.y


def schrodinger_evolve(h_of_t, psi0, t_grid, observables=None, rtol=RTOL, atol=ATOL):
    """Integrate ``i d psi/dt = H(t) psi`` on ``t_grid``.

    ``h_of_t`` is a Hermitian matrix or a callable ``t -> matrix``. ``psi0`` may
    be a ket or a ``dim x k`` block of kets evolved together. ``observables`` maps
    names to operators (or callables on the state) recorded at each grid time.
    Returns ``(Trajectory, final_state)``.
    """
    hf, _ = _as_h_of_t(h_of_t)
    psi0 = np.asarray(psi0, dtype=complex)
    shape = psi0.shape

    def rhs(t, y):
        return (-1j * (hf(t) @ y.reshape(shape))).ravel()

    ys = _integrate(rhs, psi0.ravel(), t_grid, rtol, atol)
    states = [ys[:, i].reshape(shape) for i in range(ys.shape[1])]
    traj = Trajectory(np.asarray(t_grid, dtype=float), _observe(observables or {}, states, rho=False))
    return traj, states[-1]


def _active(collapse_ops):
    return [(np.asarray(op, dtype=complex), float(g)) for op, g in collapse_ops if g > 0]


def liouvillian(h, collapse_ops):
    """Dense column-stacking Liouvillian of ``-i[H, rho] + sum g D[L] rho``."""
    h = np.asarray(h, dtype=complex)
    dim = h.shape[0]
    eye = np.eye(dim)
    heff = h.copy()
    cops = _active(collapse_ops)
    for op, g in cops:
        heff = heff - 0.5j * g * (op.conj().T @ op)
    lv = -1j * (np.kron(eye, heff) - np.kron(heff.conj(), eye))
    for op, g in cops:
        lv = lv + g * np.kron(op.conj(), op)
    return lv


def _propagate_expm(h, collapse_ops, rho0, t_grid):
    lv = liouvillian(h, collapse_ops)
    dim = rho0.shape[0]
    t_grid = np.asarray(t_grid, dtype=float)
    steps = []
    props = []
    r = rho0.reshape(-1, order="F")
    out = [rho0]
    for dt in np.diff(t_grid):
        # steps of a uniform grid differ only by rounding; reuse their propagator
        for k, s in enumerate(steps):
            if abs(dt - s) <= 1e-10 * max(abs(s), 1.0):
                break
        else:
            steps.append(dt)
            props.append(fock.expm(lv * dt))
            k = len(steps) - 1
        r = props[k] @ r
        out.append(r.reshape(dim, dim, order="F"))
    return out


def lindblad_states(h_of_t, collapse_ops, rho0, t_grid, method="auto", rtol=RTOL, atol=ATOL):
    """Density matrices at every point of ``t_grid``; see :func:`lindblad_evolve`."""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.ndim == 1:
        rho0 = fock.ket_to_dm(rho0)
    for _, g in collapse_ops:
        if g < 0:
            raise ValueError("collapse rates must be non-negative")
    hf, static = _as_h_of_t(h_of_t)
    dim = rho0.shape[0]
    if method == "auto":
        method = "expm" if static and dim <= EXPM_MAX_DIM else "rk"
    if method == "expm":
        if not static:
            raise ValueError("expm propagation needs a static Hamiltonian")
        states = _propagate_expm(hf(0.0), collapse_ops, rho0, t_grid)
    elif method == "rk":
        cops = _active(collapse_ops)
        decay = sum((g * (op.conj().T @ op) for op, g in cops), np.zeros((dim, dim), complex))
        jumps = [(op, op.conj().T, g) for op, g in cops]

        def rhs(t, y):
            rho = y.reshape(dim, dim)
            heff = hf(t) - 0.5j * decay
            d = -1j * (heff @ rho - rho @ heff.conj().T)
            for op, opd, g in jumps:
                d += g * (op @ rho @ opd)
            return d.ravel()

        ys = _integrate(rhs, rho0.ravel(), t_grid, rtol, atol)
        states = [ys[:, i].reshape(dim, dim) for i in range(ys.shape[1])]
    else:
        raise ValueError(f"unknown method {method!r}")
    return [0.5 * (s + s.conj().T) for s in states]


def lindblad_evolve(h_of_t, collapse_ops, rho0, t_grid, observables=None, method="auto", rtol=RTOL, atol=ATOL):
    """Integrate ``d rho/dt = -i[H(t), rho] + sum_l g_l D[L_l] rho``.

    ``collapse_ops`` is a list of ``(operator, rate)``. With ``method="auto"`` a
    static Hamiltonian of modest size is propagated exactly with a superoperator
    exponential per distinct grid step; otherwise (or with ``method="rk"``) an
    adaptive eighth-order Runge-Kutta integrator is used.
    Returns ``(Trajectory, final_rho)``.
    """
    states = lindblad_states(h_of_t, collapse_ops, rho0, t_grid, method, rtol, atol)
    traj = Trajectory(np.asarray(t_grid, dtype=float), _observe(observables or {}, states, rho=True))
    return traj, states[-1]


def standard_collapse_set(noise, dim):
    """Single-photon loss/gain, two-photon loss/gain and dephasing with thermal weights."""
    a = fock.annihilation_op(dim)
    ad = a.conj().T
    n = noise.n_th
    return [
        (a, noise.kappa1 * (1 + n)),
        (ad, noise.kappa1 * n),
        (a @ a, noise.kappa2 * (1 + n) ** 2),
        (ad @ ad, noise.kappa2 * n**2),
        (ad @ a, noise.kappa_phi),
    ]


def detuning_shifts(xi, n_samples, seed):
    """Per-sample detuning offsets ``delta_i ~ N(0, xi)`` drawn from keyed streams."""
    return [float(stream(seed, i).normal(0.0, xi)) for i in range(n_samples)]


def quasi_static_average(sim, xi, n_samples=64, seed=0, threads=1):
    """Average ``sim(delta_shift) -> Trajectory`` over Gaussian detuning offsets.

    Sample ``i`` always uses the offset drawn from stream ``(seed, i)`` and the
    sum runs in index order, so the result is bitwise reproducible regardless of
    ``threads``. ``xi = 0`` returns the single unshifted run.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    if xi == 0:
        return sim(0.0)
    runs = ordered_map(sim, detuning_shifts(xi, n_samples, seed), threads)
    names = sorted(runs[0].observables)
    acc = {k: np.zeros_like(runs[0].observables[k]) for k in names}
    for r in runs:
        for k in names:
            acc[k] = acc[k] + r.observables[k]
    return Trajectory(runs[0].times, {k: acc[k] / n_samples for k in names})


def _idle_trajectory(p, noise, psi0, t_max, n_points, seed, n_samples, threads, observables):
    cops = standard_collapse_set(noise, p.dim)
    times = np.linspace(0.0, t_max, n_points + 1)
    rho0 = fock.ket_to_dm(psi0)

    def sim(shift):
        h = model.build_hamiltonian(p.replace(delta=p.delta + shift))
        traj, _ = lindblad_evolve(h, cops, rho0, times, observables)
        return traj

    return quasi_static_average(sim, noise.xi, n_samples, seed, threads)


def bit_flip_time(p, noise, t_max, seed=0, n_points=60, n_samples=64, threads=1, fit_skip=1,
                  return_trajectory=False):
    """``T_z`` from the decay of logical ``<Z>`` of the idling cat qubit.

    The initial state is ``|alpha>`` projected onto the stabilized doublet. The
    frame is that of the unshifted Hamiltonian for every quasi-static sample.
    The first ``fit_skip`` samples are left out of the fit: dissipation first
    settles the state into its driven-dissipative well within a few ``1/K``,
    a fast transient that is not part of the bit-flip decay.
    """
    frame = model.cat_frame(p)
    psi0 = frame.projector @ fock.coherent_state(frame.alpha, p.dim)
    psi0 /= np.linalg.norm(psi0)
    traj = _idle_trajectory(p, noise, psi0, t_max, n_points, seed, n_samples, threads,
                            {"Z": frame.logical_Z, "leakage": np.eye(p.dim) - frame.projector})
    fit = fit_decay(traj.times[fit_skip:], traj["Z"][fit_skip:])
    return (fit, traj) if return_trajectory else fit


def phase_flip_time(p, noise, t_max, seed=0, n_points=60, n_samples=64, threads=1, fit_skip=1,
                    return_trajectory=False):
    """``T_y`` from the decay of logical ``<Y>`` starting in ``|+Y>``; see :func:`bit_flip_time`."""
    frame = model.cat_frame(p)
    traj = _idle_trajectory(p, noise, frame.state("+Y"), t_max, n_points, seed, n_samples, threads,
                            {"Y": frame.logical_Y, "leakage": np.eye(p.dim) - frame.projector})
    fit = fit_decay(traj.times[fit_skip:], traj["Y"][fit_skip:])
    return (fit, traj) if return_trajectory else fit


def ramp_profile(t, ramp_time, steepness=8.0):
    """Smooth 0 -> 1 tanh step on ``[0, ramp_time]``, exactly 0 and 1 at the ends."""
    s = np.clip(np.asarray(t, dtype=float) / ramp_time, 0.0, 1.0)
    h = math.tanh(steepness / 2)
    return (np.tanh(steepness * (s - 0.5)) + h) / (2 * h)


def _cat_pair(alpha, dim):
    if abs(alpha) < 1e-6:
        return fock.fock_state(0, dim), fock.fock_state(1, dim)
    return fock.cat_state(alpha, 1, dim), fock.cat_state(alpha, -1, dim)


def initialization_sim(p, noise, ramp_time, relax_time, n_points=40, steepness=8.0):
    """Ramp the two-photon drive up from vacuum, then let the oscillator relax.

    Records the populations of the instantaneous cats ``|C_alpha^+->`` with
    ``alpha(t)^2 = (eps2(t) + delta/2)/K`` and the leakage
    ``1 - P(C^+) - P(C^-)``. ``noise=None`` runs both segments without dissipation.
    """
    if ramp_time <= 0:
        raise ValueError("ramp_time must be positive")
    dim = p.dim
    a = fock.annihilation_op(dim)
    ad = a.conj().T
    n_op, a2, ad2 = ad @ a, a @ a, ad @ ad
    kerr = ad2 @ a2
    cops = standard_collapse_set(noise, dim) if noise is not None else []

    def eps_at(t):
        return p.eps2 * float(ramp_profile(t, ramp_time, steepness))

    def h_of_t(t):
        e = eps_at(t)
        return p.delta * n_op + e * ad2 + e * a2 - p.kerr * kerr

    def alpha_at(t):
        return math.sqrt(max((eps_at(t) + p.delta / 2) / p.kerr, 0.0))

    t_ramp = np.linspace(0.0, ramp_time, n_points + 1)
    rho0 = fock.ket_to_dm(fock.fock_state(0, dim))
    states = lindblad_states(h_of_t, cops, rho0, t_ramp, method="rk")
    rho_r = states[-1]
    times = list(t_ramp)
    if relax_time > 0:
        t_rel = np.linspace(0.0, relax_time, n_points + 1)
        h_final = h_of_t(ramp_time)
        rel = _propagate_expm(h_final, cops, rho_r, t_rel) if cops else [rho_r] * len(t_rel)
        times += list(ramp_time + t_rel[1:])
        states = states + rel[1:]
    p_plus, p_minus = [], []
    for t, rho in zip(times, states):
        cp, cm = _cat_pair(alpha_at(t), dim)
        p_plus.append(float(np.real(np.vdot(cp, rho @ cp))))
        p_minus.append(float(np.real(np.vdot(cm, rho @ cm))))
    p_plus, p_minus = np.array(p_plus), np.array(p_minus)
    return Trajectory(np.array(times), {
        "p_plus": p_plus,
        "p_minus": p_minus,
        "leakage": 1.0 - p_plus - p_minus,
        "n": np.array([float(np.real(np.trace(n_op @ r))) for r in states]),
    })
