import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ising_qubits.utils.base import DimensionMismatchError, QuantumConditionError
from ising_qubits.utils.bitq_maps import correlation_map, correlation_supported_family, extract_coefficients
from ising_qubits.utils.entangled import random_correlation_state
from ising_qubits.utils.qcond import (
    basis_decomposition,
    basis_state,
    chsh_sweep,
    chsh_tilted,
    chsh_value,
    classical_implication_holds,
    correlation_tensor,
    m33_bound,
    pair_constraints,
    positivity_report,
    random_positive_rho,
    reassemble,
    two_level_check,
    direction_bound_sweep,
)
from ising_qubits.utils.quantum_core import QuantumDensityMatrix, pauli_basis, pure_state, rho_from_coefficients
from ising_qubits.utils.spin_core import ProbabilityDistribution, random_distribution

SINGLET = pure_state(np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2))


def test_positivity_of_pure_state():
    """A pure two-qubit state is positive with purity one"""
    report = positivity_report(SINGLET)
    assert report.positive and report.pure
    assert report.purity == pytest.approx(1.0)
    assert report.coefficient_norm == pytest.approx(3.0)
    assert report.violations == []


def test_positivity_single_qubit_bloch_ball():
    """A single-qubit state is positive iff |rho| <= 1"""
    assert positivity_report(rho_from_coefficients(1, [0.6, 0.0, 0.8])).pure
    assert not positivity_report(rho_from_coefficients(1, [0.8, 0.0, 0.8])).positive


def test_counterexample_passes_norm_bound_but_not_positivity():
    """diag(7, 7, 7, -1)/20 has ||rho_z|| = 2 sqrt(3)/5 yet a negative eigenvalue"""
    rho = QuantumDensityMatrix(2, np.diag([7.0, 7.0, 7.0, -1.0]) / 20)
    sweep = direction_bound_sweep(rho, samples=2000, seed=0)
    assert sweep["maximum"] == pytest.approx(2 * math.sqrt(3) / 5, abs=1e-12)
    assert sweep["within_bound"]
    assert sweep["sampled_maximum"] <= sweep["maximum"] + 1e-12
    report = positivity_report(rho)
    assert not report.positive
    assert report.eigenvalues[0] == pytest.approx(-0.05)


def test_m33_bound():
    """<M33> = 1 - 4 rho_44"""
    assert m33_bound(SINGLET) == pytest.approx(1.0)
    assert m33_bound(pure_state([0, 0, 0, 1])) == pytest.approx(-3.0)


def test_pair_constraints_singlet():
    """Anticorrelated 3-spins put weight 1/2 on +- and -+"""
    report = pair_constraints(SINGLET)
    assert report.satisfied
    np.testing.assert_allclose(report.probabilities[(3, 3)], [[0.0, 0.5], [0.5, 0.0]], atol=1e-12)


def test_pair_constraints_require_positive():
    """Non-positive input is rejected unless explicitly allowed"""
    rho = QuantumDensityMatrix(2, np.diag([7.0, 7.0, 7.0, -1.0]) / 20)
    with pytest.raises(QuantumConditionError):
        pair_constraints(rho)
    assert not pair_constraints(rho, require_positive=False).satisfied


def test_chsh_saturation_cases():
    """The singlet reproduces <C> = 2, 1 and 0 for the axis choices"""
    assert chsh_value(SINGLET, (1, 1), (1, 3), (-1, 3), (1, 3)) == pytest.approx(2.0, abs=1e-12)
    assert chsh_value(SINGLET, (1, 1), (1, 3), (-1, 3), (1, 2)) == pytest.approx(1.0, abs=1e-12)
    assert chsh_value(SINGLET, (1, 1), (1, 1), (1, 3), (1, 2)) == pytest.approx(0.0, abs=1e-12)


def test_chsh_tilted_axes_violate():
    """Tilted axes reach 2 sqrt(2) on the singlet"""
    assert chsh_tilted(SINGLET) == pytest.approx(2 * math.sqrt(2), abs=1e-12)


def test_chsh_rejects_bad_axis():
    """Axes are signed basis directions or unit vectors"""
    with pytest.raises(DimensionMismatchError):
        chsh_value(SINGLET, (1, 4), (1, 3), (1, 3), (1, 2))
    with pytest.raises(DimensionMismatchError):
        chsh_value(SINGLET, [1.0, 1.0, 0.0], (1, 3), (1, 3), (1, 2))


def test_correlation_tensor_singlet():
    """The singlet has rho_kl = -delta_kl"""
    np.testing.assert_allclose(correlation_tensor(SINGLET), -np.eye(3), atol=1e-12)


def test_two_level_check():
    """Unit combinations of anticommuting generators are two-level observables"""
    basis = pauli_basis(2)
    e = np.zeros(15)
    e[basis.index("30")] = e[basis.index("13")] = 1 / np.sqrt(2)
    assert two_level_check(2, e)
    e = np.zeros(15)
    e[basis.index("30")] = e[basis.index("03")] = 1 / np.sqrt(2)
    assert not two_level_check(2, e)


def test_basis_decomposition_reassembles():
    """The 36 basis states reproduce rho"""
    rho = random_positive_rho(2, np.random.default_rng(5))
    alpha = basis_decomposition(rho)
    assert alpha.shape == (3, 3, 2, 2)
    np.testing.assert_allclose(reassemble(alpha).matrix, rho.matrix, atol=1e-12)


def test_basis_decomposition_of_a_basis_state():
    """Equal splitting of rho_0 gives the basis state weight 4/9, not 1"""
    rho = basis_state(3, 3, 1, 1)
    alpha = basis_decomposition(rho)
    assert alpha[2, 2, 0, 0] == pytest.approx(4 / 9, abs=1e-12)
    assert alpha.sum() == pytest.approx(1.0, abs=1e-12)
    np.testing.assert_allclose(reassemble(alpha).matrix, rho.matrix, atol=1e-12)


def test_basis_state_is_pure():
    """Each basis state is a pure product state"""
    assert positivity_report(basis_state(1, 3, 1, -1)).pure


def test_classical_implication():
    """Three perfect classical correlations force the fourth"""
    dist = ProbabilityDistribution.uniform(4)
    assert classical_implication_holds(dist, 1, 2, 3, 4)
    sharp = ProbabilityDistribution.delta(4, 15)
    assert classical_implication_holds(sharp, 1, 2, 3, 4)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_chsh_bound_for_correlation_map_states(seed):
    """Axis-aligned CHSH combinations never exceed 2 for classically realized states"""
    dist = random_correlation_state(np.random.default_rng(seed))
    rho = rho_from_coefficients(2, extract_coefficients(correlation_map(2), dist))
    value, choice = chsh_sweep(rho)
    assert value <= 2 + 1e-10
    assert len(choice) == 4


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_pair_bounds_for_positive_states(seed):
    """Positivity implies all nine pair bounds"""
    assert pair_constraints(random_positive_rho(2, np.random.default_rng(seed))).satisfied


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_classical_implication_random(seed):
    """The implication holds for every classical distribution"""
    assert classical_implication_holds(random_distribution(4, np.random.default_rng(seed)), 1, 2, 3, 4)


def test_rotated_singlet_exceeds_axis_aligned_bound():
    """A positive state outside the correlation map reaches 2 sqrt(2) with axis-aligned settings"""
    turn = np.diag([np.exp(-0.125j * np.pi), np.exp(0.125j * np.pi)])
    rho = pure_state(np.kron(np.eye(2), turn) @ np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2))
    assert positivity_report(rho).positive
    value, _ = chsh_sweep(rho)
    assert value == pytest.approx(2 * math.sqrt(2), abs=1e-10)
    assert correlation_supported_family(rho) is None
