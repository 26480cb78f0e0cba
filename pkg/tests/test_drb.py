import itertools
import time

import numpy as np
import pytest

from kerrcat.bench import drb
from kerrcat.bench.drb import Circuit
from kerrcat.bench.noise import GateNoiseModel
from kerrcat.channel import dihedral_twirl, pauli_channel_ptm
from kerrcat.dihedral import IDENTITY, DihedralElement, all_elements, character, dihedral_compose, \
    dihedral_inverse, element_ptm
from kerrcat.errors import CalibrationError, FitRejectedError
from kerrcat.fitting import fit_exponential
from kerrcat.pauli import LABELS, PAULIS, ptm_from_unitary

E_REF = pauli_channel_ptm(1e-4, 1e-4, 0.01)
NOISE = GateNoiseModel(errors={"Z": E_REF})
ELEMENTS = all_elements()
PAULI_PTMS = {lab: ptm_from_unitary(p) for lab, p in zip(LABELS, PAULIS)}
WEIGHT = 15 / 16


def enumerate_survival(noise, n, basis):
    """Average of chi_b(P)(2 p0 - 1) over every Pauli and every element sequence."""
    total = 0.0
    count = 0
    for pauli in LABELS:
        for seq in itertools.product(ELEMENTS, repeat=n):
            acc = IDENTITY
            for g in seq:
                acc = dihedral_compose(g, acc)
            circ = Circuit(pauli, seq + (dihedral_inverse(acc),), basis, n)
            total += drb.circuit_survival(circ, noise)
            count += 1
    return total / count


def transfer_matrix_survival(noise, depths, basis):
    """Exact survival from an explicit 64x64 transfer matrix over (group element, Pauli vector)."""
    mats = drb.noisy_element_ptms(noise)
    big = np.zeros((64, 64))
    for g in ELEMENTS:
        for d in ELEMENTS:
            h = dihedral_compose(d, g)
            big[4 * h.index:4 * h.index + 4, 4 * g.index:4 * g.index + 4] += mats[d.index] / 16
    rho, meas = noise.spam(basis)
    v = np.zeros(64)
    v[:4] = sum(character(basis, lab) * PAULI_PTMS[lab] @ rho for lab in LABELS) / 4
    out = {}
    for n in depths:
        w = np.linalg.matrix_power(big, n) @ v
        fin = sum(mats[dihedral_inverse(g).index] @ w[4 * g.index:4 * g.index + 4] for g in ELEMENTS)
        out[n] = float(meas @ fin)
    return out


def test_sampled_circuits_invert():
    for i in range(1000):
        circ = drb.drb_sample(1 + i % 37, 1 + i % 2, seed=11, index=i)
        acc = IDENTITY
        for g in circ.elements:
            acc = dihedral_compose(g, acc)
        assert acc == IDENTITY
        assert len(circ.elements) == circ.depth + 1


def test_sample_validation_and_determinism():
    with pytest.raises(ValueError):
        drb.drb_sample(0, 1, 0)
    with pytest.raises(ValueError):
        drb.drb_sample(3, 3, 0)
    assert drb.drb_sample(20, 1, 5, 2) == drb.drb_sample(20, 1, 5, 2)
    assert drb.drb_sample(20, 1, 5, 2) != drb.drb_sample(20, 1, 5, 3)


def test_circuit_line_round_trip():
    circ = drb.drb_sample(6, 2, seed=1)
    line = circ.to_line()
    assert line.startswith("P:") and " INV:" in line
    assert Circuit.from_line(line, 2, seed=1) == circ


def test_element_ptm_examples():
    assert np.array_equal(element_ptm(IDENTITY), np.eye(4))
    z2 = element_ptm(DihedralElement(2, 0))
    assert np.allclose(z2[1:3, 1:3], [[0, -1], [1, 0]], atol=1e-15)
    assert np.allclose(element_ptm(DihedralElement(0, 1)), np.diag([1, 1, -1, -1]), atol=1e-15)
    assert dihedral_compose(DihedralElement(3, 0), DihedralElement(7, 0)) == DihedralElement(2, 0)


def test_noiseless_survival_is_character():
    ideal = GateNoiseModel()
    for i in range(200):
        circ = drb.drb_sample(1 + i % 9, 1 + i % 2, seed=4, index=i)
        assert drb.circuit_survival(circ, ideal) == pytest.approx(1.0, abs=1e-12)
        assert drb.circuit_probability(circ, ideal) in (pytest.approx(0.0, abs=1e-12), pytest.approx(1.0, abs=1e-12))


def test_noiseless_run_is_flat():
    tables = drb.drb_run(GateNoiseModel(), [1, 5, 20], 10, None, seed=0)
    for b in (1, 2):
        assert np.allclose(tables[b]["S"], 1.0, atol=1e-12)
    tables = drb.drb_run(GateNoiseModel(), [1, 5, 20], 10, 256, seed=0)
    assert np.allclose(tables[1]["S"], 1.0)


@pytest.mark.parametrize("basis,eig", [(1, 3), (2, 1)])
def test_depth_one_equals_twirl_eigenvalue(basis, eig):
    noise = GateNoiseModel(errors={"Z": E_REF}, noisy_virtual_x=True)
    lam = dihedral_twirl(E_REF)[eig, eig]
    # S(1) carries the final inverse too, so it is lambda times the SPAM-like factor lambda
    assert enumerate_survival(noise, 1, basis) == pytest.approx(lam**2, abs=1e-12)
    assert enumerate_survival(noise, 2, basis) / enumerate_survival(noise, 1, basis) == pytest.approx(lam, abs=1e-12)


@pytest.mark.parametrize("basis", [1, 2])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_expected_matches_enumeration(basis, n):
    assert drb.drb_expected(NOISE, [n], basis)[n] == pytest.approx(enumerate_survival(NOISE, n, basis), abs=1e-12)


@pytest.mark.parametrize("basis", [1, 2])
def test_expected_matches_transfer_matrix(basis):
    depths = [1, 2, 5, 16, 33, 64]
    fast = drb.drb_expected(NOISE, depths, basis)
    slow = transfer_matrix_survival(NOISE, depths, basis)
    for n in depths:
        assert abs(fast[n] - slow[n]) < 1e-10


@pytest.mark.parametrize("basis,eig", [(1, 3), (2, 1)])
def test_exact_decay_law(basis, eig):
    noise = GateNoiseModel(errors={"Z": E_REF}, noisy_virtual_x=True)
    lam = dihedral_twirl(E_REF)[eig, eig]
    ex = drb.drb_expected(noise, range(1, 65), basis)
    a = ex[1] / lam
    for n in range(1, 65):
        assert abs(ex[n] - a * lam**n) < 1e-10
    # default placement: one of the sixteen elements is noise-free
    ex = drb.drb_expected(NOISE, [48, 64], basis)
    assert (ex[64] / ex[48]) ** (1 / 16) == pytest.approx(1 - WEIGHT * (1 - lam), abs=1e-9)


def test_analytic_survival_is_single_exponential():
    depths = [1, 2, 4, 8, 16, 32, 64, 100, 150, 200, 300, 400, 500, 700, 900, 1100, 1300, 1500, 1750, 2000]
    start = time.perf_counter()
    tables = drb.drb_run(NOISE, depths, 50, None, seed=3, bases=(1,))
    assert time.perf_counter() - start < 60
    s = np.array(tables[1]["S"])
    fit = fit_exponential(depths, s)
    pred = fit.A * fit.lam ** np.array(depths)
    r2 = 1 - np.sum((s - pred) ** 2) / np.sum((s - s.mean()) ** 2)
    assert r2 > 0.9999


def test_run_is_thread_independent():
    a = drb.drb_run(NOISE, [1, 4, 16], 8, 128, seed=2, threads=1)
    b = drb.drb_run(NOISE, [1, 4, 16], 8, 128, seed=2, threads=3)
    assert a == b


def test_run_needs_distinct_depths():
    with pytest.raises(ValueError):
        drb.drb_run(NOISE, [4, 4], 2, None, seed=0)


def test_fit_recovers_injected_rates():
    pb_true = WEIGHT * 2e-4
    pp_true = (WEIGHT * (2e-4 + 0.02) - pb_true) / 2
    hits = 0
    for seed in range(20):
        tables = drb.drb_run(NOISE, [1, 2, 4, 8, 16, 32, 64, 128], 50, 1024, seed=seed)
        res = drb.drb_fit(tables, 1.0, 1.0)
        hits += abs(res.p_bit - pb_true) < 3 * res.sigma_p_bit and abs(res.p_ph - pp_true) < 3 * res.sigma_p_ph
        assert res.eta == pytest.approx(res.p_ph / res.p_bit)
        assert not res.eta_lower_bound
    assert hits >= 19


def test_fit_applies_scales_and_modes():
    tables = {b: {"depths": [1, 2, 4, 8], "S": [0.9 * lam**n for n in (1, 2, 4, 8)]}
              for b, lam in ((1, 0.999), (2, 0.98))}
    res = drb.drb_fit(tables)
    assert res.p_bit == pytest.approx(0.0005 * 1.07, rel=1e-7)
    assert res.p_ph == pytest.approx((0.02 - 0.0005) / 2 * 1.02, rel=1e-7)
    simple = drb.drb_fit(tables, 1.0, 1.0, ph_mode="simple")
    assert simple.p_ph == pytest.approx(0.01, rel=1e-7)
    with pytest.raises(ValueError):
        drb.drb_fit(tables, ph_mode="other")


def test_noise_free_fit_is_lower_bound():
    tables = {b: {"depths": [1, 2, 4, 8], "S": [1.0] * 4} for b in (1, 2)}
    res = drb.drb_fit(tables)
    assert res.p_bit == 0 and res.p_ph == 0
    assert res.eta_lower_bound


def test_fit_rejects_growth():
    tables = {b: {"depths": [1, 2, 4, 8], "S": [0.9 * 1.01**n for n in (1, 2, 4, 8)]} for b in (1, 2)}
    with pytest.raises(FitRejectedError):
        drb.drb_fit(tables)


def test_high_bias_regime_is_representable():
    noise = GateNoiseModel(errors={"Z": pauli_channel_ptm(4e-5, 4e-5, 0.02)})
    depths = [1, 2, 4, 8, 16, 32, 64, 128, 256]
    tables = {b: {"depths": depths, "S": [drb.drb_expected(noise, depths, b)[n] for n in depths]} for b in (1, 2)}
    res = drb.drb_fit(tables, 1.0, 1.0)
    assert res.p_bit == pytest.approx(WEIGHT * 8e-5, rel=1e-4)
    assert res.eta == pytest.approx((WEIGHT * (8e-5 + 0.04) - WEIGHT * 8e-5) / 2 / (WEIGHT * 8e-5), rel=1e-3)
    assert 240 < res.eta < 260


def test_calibration_zero_point():
    _, _, rows = drb.drb_scaling_calibration([0.0, 0.01])
    assert rows[0]["p_ph_extracted"] == pytest.approx(0.0, abs=1e-12)
    assert rows[0]["p_bit_extracted"] == pytest.approx(0.0, abs=1e-12)


def test_calibration_slopes_follow_noisy_weight():
    sb, sp, _ = drb.drb_scaling_calibration([0.005, 0.01, 0.02, 0.03])
    assert sb == pytest.approx(1 / WEIGHT, rel=1e-3)
    assert sp == pytest.approx(1 / WEIGHT, rel=1e-3)


def test_calibration_analytic_equals_many_shots():
    kw = dict(samples_per_depth=50, seed=8)
    sb_a, sp_a, _ = drb.drb_scaling_calibration([0.005, 0.01, 0.02, 0.03], shots=None, **kw)
    sb_s, sp_s, _ = drb.drb_scaling_calibration([0.005, 0.01, 0.02, 0.03], shots=10**6, **kw)
    assert abs(sp_a - sp_s) < 1e-3
    assert abs(sb_a - sb_s) < 1e-3


def test_calibration_rejects_bad_grid():
    for grid in ([], [0.0], [0.05]):
        with pytest.raises(CalibrationError):
            drb.drb_scaling_calibration(grid)
