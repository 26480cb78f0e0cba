import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from kerrcat import readout
from kerrcat.errors import SingularInputError
from kerrcat.readout import CqrParams

C = CqrParams(eps_cqr=0.1, kappa_r=0.4, t_read=1.0)


def test_steady_state_zero_and_value():
    assert readout.cqr_steady_state(C, 0.0) == 0
    assert readout.cqr_steady_state(C, math.sqrt(5.2)) == pytest.approx(0.5 * math.sqrt(5.2), rel=1e-15)


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=10), st.floats(-5, 5))
def test_steady_state_homogeneous(a, s):
    assert readout.cqr_steady_state(C, s * a) == pytest.approx(s * readout.cqr_steady_state(C, a), abs=1e-12)


def test_steady_state_singular():
    with pytest.raises(SingularInputError):
        readout.cqr_steady_state(CqrParams(0.1, 0.0), 1.0)


def test_transient_matches_ode():
    a = math.sqrt(5.2)

    def rhs(_, y):
        b = y[0] + 1j * y[1]
        db = -1j * C.eps_cqr * a - 0.5 * C.kappa_r * b
        return [db.real, db.imag]

    t_end = 20 / C.kappa_r
    sol = solve_ivp(rhs, (0, t_end), [0.0, 0.0], rtol=1e-10, atol=1e-12, t_eval=[t_end / 4, t_end])
    ode = sol.y[0] + 1j * sol.y[1]
    closed = readout.cqr_transient(C, a, [t_end / 4, t_end])
    assert np.max(np.abs(ode - closed)) < 1e-8
    b_ss = readout.cqr_steady_state(C, a)
    assert abs(abs(ode[-1]) - abs(b_ss)) < 0.01 * abs(b_ss)
    assert abs(ode[-1] * 1j - b_ss) < 0.01 * abs(b_ss)


def test_transient_closed_form_and_half_life():
    t = np.linspace(0, 50, 101)
    b = readout.cqr_transient(C, 2.0, t)
    b_ss = readout.cqr_steady_state(C, 2.0)
    assert np.max(np.abs(b - (-1j) * b_ss * (1 - np.exp(-C.kappa_r * t / 2)))) < 1e-8
    assert np.all(readout.cqr_transient(C, 0.0, t) == 0)
    half = 2 * math.log(2) / C.kappa_r
    assert abs(readout.cqr_transient(C, 2.0, [half])[0]) == pytest.approx(0.5 * abs(b_ss), rel=1e-6)


@pytest.mark.parametrize("kw", [{"eps_cqr": -1}, {"noise_sigma": -0.1}, {"flip_prob_per_read": 0.6}])
def test_params_validation(kw):
    args = {"eps_cqr": 0.1, "kappa_r": 0.4}
    args.update(kw)
    with pytest.raises(ValueError):
        CqrParams(**args)


def test_noiseless_readout_is_perfectly_qnd():
    recs, q = readout.simulate_readout(C, 1, 500, seed=0)
    assert q == 1.0
    assert all(r.label == 1 for r in recs)
    recs, q = readout.simulate_readout(C, -1, 500, seed=0)
    assert q == 1.0 and all(r.label == -1 for r in recs)


def test_labels_follow_pointer_sign():
    c = CqrParams(0.1, 0.4, noise_sigma=0.5, flip_prob_per_read=0.1)
    recs, _ = readout.simulate_readout(c, 1, 300, seed=4, a_expect=1.0 + 1.0j)
    rot = np.exp(-1j * math.pi / 4)
    for r in recs:
        assert r.label == (1 if (r.pointer * rot).real >= 0 else -1)


@pytest.mark.parametrize("f", [0.01, 0.05, 0.2])
def test_flip_only_qndness(f):
    c = CqrParams(0.1, 0.4, flip_prob_per_read=f)
    _, q = readout.simulate_readout(c, 1, 10_000, seed=1)
    sigma = math.sqrt(f * (1 - f) / 5_000)
    assert abs(q - (1 - f)) < 3 * sigma


@pytest.mark.parametrize("f,sigma", [(0.02, 0.2), (0.0, 0.4), (0.1, 0.3)])
def test_monte_carlo_matches_markov_model(f, sigma):
    c = CqrParams(0.1, 0.4, noise_sigma=sigma, flip_prob_per_read=f)
    expected = readout.qndness_analytic(c, 1.0)
    _, q = readout.simulate_readout(c, 1, 10_000, seed=7)
    tol = 3 * math.sqrt(expected * (1 - expected) / 5_000)
    assert abs(q - expected) < tol


def test_high_qndness_exists():
    c = CqrParams(0.1, 0.4, noise_sigma=0.1, flip_prob_per_read=0.01)
    assert readout.snr(c, 1.0) >= 5
    assert readout.qndness_analytic(c, 1.0) >= 0.98


def test_qndness_label_flip_symmetry():
    rng = np.random.default_rng(0)
    a = rng.choice([-1, 1], 200)
    b = np.where(rng.random(200) < 0.1, -a, a)
    assert readout.qndness(a, b) == readout.qndness(-a, -b)


def test_qndness_examples():
    assert readout.qndness([1, 1, -1, -1], [1, -1, -1, -1]) == pytest.approx(0.75)
    assert readout.qndness([1, 1], [1, 1]) == 1.0
    with pytest.raises(ValueError):
        readout.qndness([], [])


def test_readout_is_seeded():
    c = CqrParams(0.1, 0.4, noise_sigma=0.3, flip_prob_per_read=0.05)
    a, qa = readout.simulate_readout(c, 1, 200, seed=9)
    b, qb = readout.simulate_readout(c, 1, 200, seed=9)
    assert a == b and qa == qb
    assert readout.simulate_readout(c, 1, 200, seed=10)[0] != a


def test_readout_validation():
    with pytest.raises(ValueError):
        readout.simulate_readout(C, 1, 1, seed=0)
    with pytest.raises(ValueError):
        readout.simulate_readout(C, 0, 10, seed=0)


def test_flip_prob_from_tz():
    assert readout.flip_prob_from_tz(1.0, 1200.0) == pytest.approx(1 / 2400)
    assert readout.flip_prob_from_tz(10.0, 1.0) == 0.5
    with pytest.raises(ValueError):
        readout.flip_prob_from_tz(1.0, 0.0)


def test_misassignment_closed_form():
    c = CqrParams(0.1, 0.4, noise_sigma=0.25)
    assert readout.snr(c, 1.0) == pytest.approx(2.0)
    assert readout.misassignment(c, 1.0) == pytest.approx(0.5 * math.erfc(2 / math.sqrt(2)), rel=1e-12)
    assert readout.misassignment(C, 1.0) == 0.0


def test_heralded_preparation():
    c = CqrParams(0.1, 0.4, noise_sigma=0.2, flip_prob_per_read=0.01)
    kept, purity = readout.heralded_preparation(c, 20_000, seed=2)
    assert kept == pytest.approx(0.5, abs=0.02)
    expected = 1 - 0.01 - readout.misassignment(c, 1.0)
    assert purity == pytest.approx(expected, abs=0.01)
