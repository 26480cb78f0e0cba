"""Exponential decay fits used by the lifetime and benchmarking code.

Both fits run scipy's Levenberg-Marquardt driver and report one-sigma errors
from the linearized covariance ``s^2 (J^T W J)^-1`` at the optimum, where
``s^2`` is the reduced chi-square.
"""

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import least_squares

from .errors import FitError

# a decay slower than this many fit windows is reported as a lower bound
SENTINEL_WINDOWS = 1e4


@dataclass(frozen=True)
class DecayFit:
    """``y = A exp(-t/T) + C``.

    When ``lower_bound`` is set the data showed no resolvable decay and ``T``
    is only a lower bound (``1e4`` times the fit window); sigmas are then NaN.
    """

    A: float
    C: float
    T: float
    sigma_A: float
    sigma_C: float
    sigma_T: float
    n_points: int
    lower_bound: bool = False

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ExpFit:
    """``y = A lam^n``."""

    A: float
    lam: float
    sigma_A: float
    sigma_lam: float


def _covariance(jac, resid, n_params, absolute=False):
    n = len(resid)
    dof = max(n - n_params, 1)
    s2 = 1.0 if absolute else float(resid @ resid) / dof
    jtj = jac.T @ jac
    try:
        return s2 * np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        return np.full((n_params, n_params), np.nan)


def _loglin_rate(t, y, c):
    """Rate guess from a log-linear fit over the first decade of ``|y - c|``."""
    d = np.abs(y - c)
    if d[0] <= 0:
        return None
    keep = d > 0.1 * d[0]
    stop = np.argmin(keep) if not keep.all() else len(keep)
    stop = max(stop, 3)
    tt, dd = t[:stop], d[:stop]
    ok = dd > 0
    if ok.sum() < 2:
        return None
    slope = np.polyfit(tt[ok], np.log(dd[ok]), 1)[0]
    return -slope if slope < 0 else None


def _growth(k, tau):
    """``(1 - exp(-k tau))/k``, continuous through ``k = 0``."""
    if abs(k) < 1e-12:
        return tau * (1 - 0.5 * k * tau)
    return -np.expm1(-k * tau) / k


def _growth_dk(k, tau):
    """Derivative of :func:`_growth` with respect to ``k``."""
    if abs(k) < 1e-6:
        return tau**2 * (-0.5 + k * tau / 3)
    return (tau * np.exp(-k * tau) - _growth(k, tau)) / k


def fit_decay(t, y, max_nfev=2000):
    """Fit ``A exp(-t/T) + C`` and return a :class:`DecayFit`.

    Internally the model is ``y0 + S (1 - exp(-k tau))/k`` on the rescaled
    window ``tau``, which stays well conditioned when the decay is much slower
    than the window (only the initial slope is then resolved). Data with no
    visible decay, or a rate below ``1/(1e4 * window)``, yields the lower-bound
    sentinel instead of a value.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(t)
    if n < 4:
        raise FitError("need at least four points for a decay fit")
    window = float(t[-1] - t[0])
    if window <= 0:
        raise FitError("time grid must span a positive window")
    sentinel = DecayFit(float(y.mean()), 0.0, SENTINEL_WINDOWS * window, math.nan, math.nan, math.nan, n, True)
    scale = float(np.max(np.abs(y))) or 1.0
    if np.ptp(y) <= 1e-12 * scale:
        return sentinel

    tau = (t - t[0]) / window
    k0 = (_loglin_rate(t - t[0], y, y[-1]) or 3.0 / window) * window
    s0 = (y[-1] - y[0]) / _growth(k0, 1.0)

    def resid(x):
        return x[0] + x[1] * _growth(x[2], tau) - y

    def jac(x):
        return np.stack([np.ones_like(tau), _growth(x[2], tau), x[1] * _growth_dk(x[2], tau)], axis=1)

    x0 = np.array([y[0], s0, k0])
    try:
        res = least_squares(resid, x0, jac=jac, method="lm", max_nfev=max_nfev, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    except Exception as exc:
        raise FitError(f"decay fit failed: {exc}", residuals=resid(x0)) from exc
    if not res.success:
        raise FitError(f"decay fit did not converge: {res.message}", residuals=res.fun)
    y0, slope, kw = res.x
    if kw < 1.0 / SENTINEL_WINDOWS:
        return sentinel
    cov = _covariance(res.jac, res.fun, 3)
    a = -slope / kw
    shift = math.exp(kw * t[0] / window)
    T = window / kw
    # (A, C, T) as functions of (y0, S, k), with A moved back to the absolute time origin
    jac = np.array([
        [0.0, -shift / kw, shift * (slope / kw**2 + a * t[0] / window)],
        [1.0, 1.0 / kw, -slope / kw**2],
        [0.0, 0.0, -window / kw**2],
    ])
    var = np.diag(jac @ cov @ jac.T)
    sig_a, sig_c, sig_t = (math.sqrt(max(v, 0.0)) for v in var)
    return DecayFit(float(a * shift), float(y0 - a), float(T), sig_a, sig_c, sig_t, n)


def fit_exponential(x, y, weights=None, max_nfev=2000, absolute_sigma=False):
    """Weighted least-squares fit of ``A lam^x``.

    ``weights`` multiply the squared residuals (pass inverse variances). With
    ``absolute_sigma`` the weights are taken as exact inverse variances;
    otherwise the covariance is rescaled by the residual chi-square.
    Constant data is fitted exactly by ``lam = 1``.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(x) < 3:
        raise FitError("need at least three points for an exponential fit")
    w = np.ones_like(y) if weights is None else np.asarray(weights, dtype=float)
    sw = np.sqrt(w)
    pos = y > 0
    if pos.sum() >= 2 and np.ptp(x[pos]) > 0:
        slope, icpt = np.polyfit(x[pos], np.log(y[pos]), 1)
        lam0, a0 = math.exp(slope), math.exp(icpt)
    else:
        lam0, a0 = 0.99, float(y[0]) or 1.0
    # work in log(lam) so lam stays positive
    x0 = np.array([a0, math.log(max(lam0, 1e-12))])

    def resid(par):
        return sw * (par[0] * np.exp(par[1] * x) - y)

    def jac(par):
        e = np.exp(par[1] * x)
        return np.stack([sw * e, sw * par[0] * x * e], axis=1)

    res = least_squares(resid, x0, jac=jac, method="lm", max_nfev=max_nfev, xtol=1e-15, ftol=1e-15, gtol=1e-15)
    if not res.success:
        raise FitError(f"exponential fit did not converge: {res.message}", residuals=res.fun)
    a, ll = res.x
    lam = math.exp(ll)
    cov = _covariance(res.jac, res.fun, 2, absolute=absolute_sigma and weights is not None)
    return ExpFit(float(a), lam, math.sqrt(max(cov[0, 0], 0.0)), lam * math.sqrt(max(cov[1, 1], 0.0)))
