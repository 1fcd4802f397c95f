import numpy as np
import pytest

from vqsense.bounds import ee_bound, sql_bound
from vqsense.encoding import make_custom, make_uniform, make_weighted_central
from vqsense.fisher import (
    MeasurementSetup,
    directional_cfi,
    outcome_probabilities,
    phase_partials,
)
from vqsense.quantum import Rotation, ShapeError, StateVector, ghz_state, plus_state, random_state

import oracles

SETUP = MeasurementSetup()


def test_setup_validation():
    with pytest.raises(ValueError):
        MeasurementSetup(shift_delta=0.0)
    with pytest.raises(ValueError):
        MeasurementSetup(shift_delta=np.pi)
    with pytest.raises(ValueError):
        MeasurementSetup(probability_floor=0.0)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_plus_state_reads_all_zeros(n):
    p = outcome_probabilities(plus_state(n), make_uniform(n), 0.0, SETUP)
    assert p[0] == pytest.approx(1.0, abs=1e-10)


def test_ghz2_at_sum_phase_pi():
    p = outcome_probabilities(ghz_state(2), make_uniform(2), np.pi, SETUP)
    # (|00> - |11>)/sqrt2 through R_y(-pi/2)^{x2}: weight only on 01 and 10
    np.testing.assert_allclose(p, [0, 0.5, 0.5, 0], atol=1e-12)
    np.testing.assert_allclose(p, oracles.probs_at_phases(oracles.ghz(2), np.full(2, np.pi / 2)),
                               atol=1e-12)


def test_probabilities_normalized_and_shape_checked():
    rng = np.random.default_rng(0)
    for n in (2, 3, 5):
        p = outcome_probabilities(random_state(n, rng), make_weighted_central(n), 0.37, SETUP)
        assert abs(p.sum() - 1) < 1e-10
    with pytest.raises(ShapeError):
        outcome_probabilities(plus_state(3), make_uniform(2), 0.1, SETUP)


def test_single_qubit_partial_at_extremum():
    probe = plus_state(1)
    d = phase_partials(probe, make_custom([1.0]), 0.0, SETUP)
    fd = oracles.fd_partials(probe.amplitudes, np.zeros(1), h=1e-6)
    assert d[0, 0] == pytest.approx(0.0, abs=1e-12)
    np.testing.assert_allclose(d, fd, atol=1e-8)


def test_product_probe_partials_leave_other_marginals():
    n = 3
    d = phase_partials(plus_state(n), make_custom([0.3, 0.8, 1.1]), 0.4, SETUP)
    d = d.reshape((n,) + (2,) * n)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            marg = d[i].sum(axis=tuple(k for k in range(n) if k != j))
            np.testing.assert_allclose(marg, 0.0, atol=1e-10)


def test_partials_sum_to_zero():
    rng = np.random.default_rng(2)
    for _ in range(10):
        n = int(rng.integers(2, 6))
        d = phase_partials(random_state(n, rng), make_custom(rng.normal(size=n)), rng.normal(), SETUP)
        np.testing.assert_allclose(d.sum(axis=1), 0.0, atol=1e-8)


def test_partials_match_finite_differences():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(1, 5))
        psi = random_state(n, rng)
        alpha = make_custom(rng.uniform(-1.5, 1.5, n))
        theta = rng.uniform(-np.pi, np.pi)
        ps = phase_partials(psi, alpha, theta, SETUP)
        fd = oracles.fd_partials(psi.amplitudes, alpha.weights * theta)
        assert np.max(np.abs(ps - fd)) < 1e-6


@pytest.mark.parametrize("delta", [0.3, np.pi / 2, 2.5])
def test_shift_rule_exact_for_any_delta(delta):
    rng = np.random.default_rng(4)
    psi = random_state(3, rng)
    alpha = make_weighted_central(3)
    ref = phase_partials(psi, alpha, 0.2, SETUP)
    got = phase_partials(psi, alpha, 0.2, MeasurementSetup(shift_delta=delta))
    np.testing.assert_allclose(got, ref, atol=1e-12)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_product_probe_hits_sql(n):
    alpha = make_uniform(n)
    r = directional_cfi(plus_state(n), alpha, 0.1, SETUP)
    assert r.cfi_q == pytest.approx(n, rel=1e-6)
    assert oracles.brute_force_cfi_q(oracles.plus(n), alpha.weights, 0.1) == pytest.approx(n, rel=1e-6)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_ghz_hits_heisenberg(n):
    alpha = make_uniform(n)
    r = directional_cfi(ghz_state(n), alpha, 0.1, SETUP)
    assert r.cfi_q == pytest.approx(n**2, rel=1e-6)
    assert oracles.brute_force_cfi_q(oracles.ghz(n), alpha.weights, 0.1) == pytest.approx(n**2, rel=1e-6)


def test_ghz_weighted_two_qubits_table_value():
    r = directional_cfi(ghz_state(2), make_weighted_central(2), 0.1, SETUP)
    assert r.cfi_q == pytest.approx(1.44, abs=5e-4)
    assert r.cfi_q == pytest.approx(1.5**2 / 1.25**2, rel=1e-9)


def test_report_invariants():
    rng = np.random.default_rng(5)
    for _ in range(20):
        n = int(rng.integers(2, 6))
        alpha = make_custom(rng.uniform(0.1, 1.0, n))
        r = directional_cfi(random_state(n, rng), alpha, rng.uniform(-1, 1), SETUP)
        assert abs(r.probabilities.sum() - 1) < 1e-10
        assert abs(r.directional_derivative.sum()) < 1e-8
        assert r.cfi_q >= 0
        assert r.cfi_theta == pytest.approx(r.cfi_q * alpha.norm_sq**2, rel=1e-8)
        assert r.partials.shape == (n, 2**n)
        assert r.cfi_q <= ee_bound(alpha) + 1e-6


def test_chain_rule_against_direct_theta_shift():
    rng = np.random.default_rng(6)
    for _ in range(10):
        n = int(rng.integers(2, 5))
        psi = random_state(n, rng)
        alpha = make_custom(rng.uniform(-1, 1, n))
        theta = rng.uniform(-1, 1)
        r = directional_cfi(psi, alpha, theta, SETUP)
        direct = oracles.brute_force_cfi_theta(psi.amplitudes, alpha.weights, theta)
        assert direct == pytest.approx(r.cfi_theta, rel=1e-8)


def test_scale_invariance_of_fq():
    rng = np.random.default_rng(7)
    psi = random_state(3, rng)
    alpha = make_custom([0.4, 0.9, 0.2])
    base = directional_cfi(psi, alpha, 0.6, SETUP).cfi_q
    for c in (0.5, -2.0, 3.0):
        scaled = directional_cfi(psi, alpha.scaled(c), 0.6 / c, SETUP).cfi_q
        # q = ||c alpha||^2 theta/c: Fisher w.r.t. q rescales by 1/c^2
        assert scaled * c**2 == pytest.approx(base, rel=1e-8)


def test_global_phase_invariance():
    rng = np.random.default_rng(8)
    psi = random_state(4, rng)
    rotated = StateVector(4, np.exp(0.7j) * psi.amplitudes)
    a = make_weighted_central(4)
    assert directional_cfi(rotated, a, 0.1, SETUP).cfi_q == pytest.approx(
        directional_cfi(psi, a, 0.1, SETUP).cfi_q, rel=1e-12)


def test_floor_excludes_vanishing_outcomes():
    # GHZ at theta = 0 sits on a fringe extremum: half the outcomes have p = 0
    r = directional_cfi(ghz_state(3), make_uniform(3), 0.0, SETUP)
    assert np.isfinite(r.cfi_q)
    assert r.cfi_q <= 9 + 1e-6


def test_z_readout_is_blind():
    setup = MeasurementSetup(rotation=Rotation("z", 0.0))
    assert directional_cfi(ghz_state(3), make_uniform(3), 0.1, setup).cfi_q == pytest.approx(0, abs=1e-12)


def test_sql_helper_consistency():
    for n in (2, 5):
        assert directional_cfi(plus_state(n), make_weighted_central(n), 0.1, SETUP).cfi_q == \
            pytest.approx(sql_bound(make_weighted_central(n)), rel=1e-6)
