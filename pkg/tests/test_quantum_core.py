import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ising_qubits.utils.base import DimensionMismatchError, GateUnavailableError
from ising_qubits.utils.quantum_core import (
    QuantumDensityMatrix,
    apply_unitary,
    coefficient_map,
    coefficients_from_rho,
    conditional_state,
    gate,
    gate_arity,
    gate_period,
    hamiltonian_from_generators,
    infinitesimal_step,
    measurement_correlation,
    pauli_basis,
    pure_state,
    random_unitary,
    rho_from_coefficients,
    structure_coefficients,
    unitary_coefficient_map,
    von_neumann_step,
)


def test_pauli_basis_order():
    """Labels are lexicographic with the identity removed"""
    basis = pauli_basis(2)
    assert basis.size == 15
    assert basis.label_string(0) == "01"
    assert basis.index("10") == 3
    assert basis.index((3, 3)) == 14


def test_pauli_basis_rejects_unknown_label():
    """The all-zero label is not a generator"""
    with pytest.raises(DimensionMismatchError):
        pauli_basis(1).index("0")


def test_rho_from_coefficients_roundtrip():
    """Coefficients survive the density matrix construction"""
    coeffs = np.array([0.1, -0.2, 0.3])
    np.testing.assert_allclose(coefficients_from_rho(rho_from_coefficients(1, coeffs)), coeffs, atol=1e-15)


def test_density_matrix_validation():
    """Non-Hermitian or wrong-trace matrices are rejected"""
    with pytest.raises(DimensionMismatchError):
        QuantumDensityMatrix(1, np.array([[1.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(DimensionMismatchError):
        QuantumDensityMatrix(1, np.eye(2))


def test_hadamard_coefficient_map():
    """H sends (rho_1, rho_2, rho_3) to (rho_3, -rho_2, rho_1)"""
    expected = np.array([[0, 0, 1], [0, -1, 0], [1, 0, 0]])
    np.testing.assert_allclose(coefficient_map(gate("H")), expected, atol=1e-12)


def test_cnot_sign():
    """CNOT maps rho_22 into -rho_13"""
    basis = pauli_basis(2)
    b = coefficient_map(gate("CNOT", 1, 2, Q=2))
    assert b[basis.index("13"), basis.index("22")] == pytest.approx(-1.0, abs=1e-12)


def test_conj_coefficient_map():
    """Complex conjugation flips every coefficient with an odd number of tau_2"""
    b = coefficient_map(gate("CONJ", Q=2))
    basis = pauli_basis(2)
    assert b[basis.index("20"), basis.index("20")] == -1.0
    assert b[basis.index("22"), basis.index("22")] == 1.0


def test_gate_arity_and_unknown_gate():
    """Gate arities come from the catalog"""
    assert gate_arity("T") == 1
    assert gate_arity("CNOT") == 2
    assert gate_arity("CONJ") == 0
    with pytest.raises(GateUnavailableError):
        gate_arity("TOFFOLI")


def test_gate_target_checks():
    """Targets must be in range and distinct"""
    with pytest.raises(DimensionMismatchError):
        gate("H", 2, Q=1)
    with pytest.raises(DimensionMismatchError):
        gate("CNOT", 1, 1, Q=2)
    with pytest.raises(DimensionMismatchError):
        gate("CNOT", 1, Q=2)
    with pytest.raises(DimensionMismatchError):
        gate("H", Q=2)


def test_single_qubit_gate_defaults_to_first_qubit():
    """On one qubit a single-qubit gate needs no explicit target"""
    assert gate("T").targets == (1,)
    np.testing.assert_array_equal(gate("H").matrix, gate("H", 1).matrix)
    assert gate("CONJ").targets == ()


def test_gate_periods():
    """Projective periods of the catalog gates"""
    assert gate_period(gate("H")) == 2
    assert gate_period(gate("T")) == 8
    assert gate_period(gate("PI4_31")) == 8
    assert gate_period(gate("ROT5")) == 5
    assert gate_period(gate("CNOT", 1, 2, Q=2)) == 2


def test_pi4_squares_to_u31():
    """The pi/4 rotation applied twice equals U31"""
    U = gate("PI4_31").matrix
    np.testing.assert_allclose(U @ U, gate("U31").matrix, atol=1e-12)


def test_apply_unitary_bell_state():
    """H then CNOT on |00> prepares the Bell state"""
    rho = pure_state([1, 0, 0, 0])
    rho = apply_unitary(rho, gate("H", 1, Q=2))
    rho = apply_unitary(rho, gate("CNOT", 1, 2, Q=2))
    expected = pure_state(np.array([1, 0, 0, 1]) / np.sqrt(2))
    np.testing.assert_allclose(rho.matrix, expected.matrix, atol=1e-12)


def test_apply_unitary_dimension_mismatch():
    """Gate and state must have the same qubit count"""
    with pytest.raises(DimensionMismatchError):
        apply_unitary(pure_state([1, 0]), gate("H", 1, Q=2))


def test_structure_coefficients_single_qubit():
    """[tau_1, tau_2] = 2i tau_3"""
    f = structure_coefficients(1).f
    assert f[0, 1, 2] == pytest.approx(1.0)
    assert f[1, 0, 2] == pytest.approx(-1.0)


def test_infinitesimal_step_matches_von_neumann():
    """First-order generator update agrees with the commutator step"""
    rho = rho_from_coefficients(1, [0.3, 0.0, 0.4])
    eps_tilde = np.array([0.0, 0.0, 1e-4])
    by_generators = infinitesimal_step(rho, eps_tilde)
    H = hamiltonian_from_generators(eps_tilde, 1.0)
    np.testing.assert_allclose(H, -np.einsum("z,zab->ab", eps_tilde, pauli_basis(1).matrices))
    by_commutator = von_neumann_step(rho, H, 1.0)
    np.testing.assert_allclose(by_generators.coefficients, by_commutator.coefficients, atol=1e-12)


def test_measurement_correlation_identity():
    """Without evolution s_2 and s_1 are uncorrelated"""
    assert measurement_correlation(rho_from_coefficients(1, [0.2, 0.1, 0.5]), np.eye(2)) == pytest.approx(0.0)


def test_conditional_state():
    """Finding s_1 = +1 projects onto the tau_1 eigenstate"""
    rho = conditional_state(rho_from_coefficients(1, [0.0, 0.0, 1.0]), 1)
    np.testing.assert_allclose(rho.coefficients, [1.0, 0.0, 0.0], atol=1e-12)
    with pytest.raises(DimensionMismatchError):
        conditional_state(rho_from_coefficients(1, [1.0, 0.0, 0.0]), -1)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_coefficient_map_is_orthogonal(seed):
    """Unitary conjugation acts as a rotation on the coefficients"""
    U = random_unitary(4, np.random.default_rng(seed))
    b = unitary_coefficient_map(U)
    np.testing.assert_allclose(b @ b.T, np.eye(15), atol=1e-10)
