import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from kerrcat import fock
from kerrcat.errors import InvalidDimensionError, NonHermitianError, ZeroVectorError


def poisson_amplitudes(alpha, n_max):
    return np.array([math.exp(-abs(alpha) ** 2 / 2) * alpha**n / math.sqrt(math.factorial(n))
                     for n in range(n_max)])


def test_annihilation_dim2():
    assert np.array_equal(fock.annihilation_op(2), np.array([[0, 1], [0, 0]]))


def test_ladder_rule():
    out = fock.annihilation_op(10) @ fock.fock_state(3, 10)
    assert np.allclose(out, math.sqrt(3) * fock.fock_state(2, 10), atol=0)


@pytest.mark.parametrize("dim", [2, 5, 17, 40])
def test_truncated_commutator(dim):
    a = fock.annihilation_op(dim)
    comm = a @ a.conj().T - a.conj().T @ a
    expected = np.diag([1.0] * (dim - 1) + [-(dim - 1.0)])
    assert np.max(np.abs(comm - expected)) < 1e-12


@pytest.mark.parametrize("dim", [0, 1, -3])
def test_invalid_dim(dim):
    with pytest.raises(InvalidDimensionError):
        fock.annihilation_op(dim)


def test_displacement_zero_is_identity():
    assert np.allclose(fock.displacement_op(0, 12), np.eye(12), atol=1e-14)


def test_displacement_column_matches_poisson():
    d = fock.displacement_op(1.0, 30)
    assert np.max(np.abs(d[:5, 0] - poisson_amplitudes(1.0, 5))) < 1e-8


def test_displacement_inverse():
    d = fock.displacement_op(2.0, 40)
    assert np.max(np.abs(d @ fock.displacement_op(-2.0, 40) - np.eye(40))) < 1e-8


def test_displacement_matches_scipy_expm():
    a = fock.annihilation_op(25)
    alpha = 0.7 - 0.4j
    ref = scipy.linalg.expm(alpha * a.conj().T - np.conj(alpha) * a)
    assert np.max(np.abs(fock.displacement_op(alpha, 25) - ref)) < 1e-10


def test_coherent_vacuum():
    assert np.allclose(fock.coherent_state(0, 8), fock.fock_state(0, 8))


def test_coherent_overlap():
    a = fock.coherent_state(1.5, 40)
    b = fock.coherent_state(-1.5, 40)
    assert abs(np.vdot(a, b) - math.exp(-2 * 1.5**2)) < 1e-8


def test_coherent_mean_photon():
    psi = fock.coherent_state(math.sqrt(5.2), 40)
    assert abs(fock.expect(fock.number_op(40), psi).real - 5.2) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.floats(-2.5, 2.5), st.floats(-2.5, 2.5))
def test_coherent_equals_displaced_vacuum(re, im):
    alpha = complex(re, im)
    # the truncated exponential is off by ~1e-7 in the last Fock entry at the default dim
    dim = fock.default_dim(abs(alpha)) + 10
    psi = fock.coherent_state(alpha, dim)
    ref = fock.displacement_op(alpha, dim) @ fock.fock_state(0, dim)
    assert abs(np.linalg.norm(psi) - 1) < 1e-10
    assert np.max(np.abs(psi - ref)) < 1e-8


def test_cat_parity_orthogonal():
    assert abs(np.vdot(fock.cat_state(2.0, 1, 40), fock.cat_state(2.0, -1, 40))) < 1e-12


def test_cat_vacuum_and_odd_error():
    assert np.allclose(fock.cat_state(0.0, 1, 6), fock.fock_state(0, 6))
    with pytest.raises(ZeroVectorError):
        fock.cat_state(0.0, -1, 6)


def test_cats_rebuild_coherent_state():
    alpha, dim = 2.28, 40
    v = fock.cat_state(alpha, 1, dim) + fock.cat_state(alpha, -1, dim)
    v /= np.linalg.norm(v)
    assert abs(np.vdot(fock.coherent_state(alpha, dim), v)) ** 2 >= 1 - 1e-8


@settings(max_examples=30, deadline=None)
@given(st.floats(0.1, 3.0), st.sampled_from([1, -1]))
def test_cat_support_is_parity_pure(alpha, parity):
    psi = fock.cat_state(alpha, parity, 40)
    wrong = psi[1::2] if parity == 1 else psi[0::2]
    assert np.max(np.abs(wrong)) < 1e-10
    assert abs(np.linalg.norm(psi) - 1) < 1e-10


def test_eig_diag():
    w, _ = fock.eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    assert np.allclose(w, [1, 2, 3])


def test_eig_number_op():
    w, _ = fock.eig_hermitian(fock.number_op(5))
    assert np.allclose(w, np.arange(5))


@pytest.mark.parametrize("dim,seed", [(20, 0), (40, 1), (40, 2)])
def test_eig_reconstruction_and_orthonormality(dim, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    a = m + m.conj().T
    w, v = fock.eig_hermitian(a)
    assert np.all(np.diff(w) >= 0)
    assert np.linalg.norm(a - v @ np.diag(w) @ v.conj().T) < 1e-8 * np.linalg.norm(a)
    assert np.max(np.abs(v.conj().T @ v - np.eye(dim))) < 1e-8


def test_eig_rejects_non_hermitian():
    with pytest.raises(NonHermitianError):
        fock.eig_hermitian(np.array([[0, 1], [0, 0]], dtype=complex))


def test_expm_paths_agree_with_scipy():
    rng = np.random.default_rng(3)
    m = rng.normal(size=(12, 12)) + 1j * rng.normal(size=(12, 12))
    h = m + m.conj().T
    ref = scipy.linalg.expm(-1j * 0.3 * h)
    assert np.max(np.abs(fock.expm_hermitian(h, 0.3) - ref)) < 1e-10
    assert np.max(np.abs(fock.expm_antihermitian(-1j * 0.3 * h) - ref)) < 1e-10
    assert np.max(np.abs(fock.expm(m) - scipy.linalg.expm(m))) < 1e-10 * np.linalg.norm(scipy.linalg.expm(m))


@pytest.mark.parametrize("alpha", [0.0, 1.0, math.sqrt(5.2), math.sqrt(12)])
def test_default_dim_tail_mass(alpha):
    dim = fock.default_dim(alpha)
    assert dim == math.ceil(alpha**2 + 6 * math.sqrt(alpha**2 + 1) + 10)
    amps = poisson_amplitudes(alpha, dim)
    assert 1 - np.sum(np.abs(amps) ** 2) < 1e-10
