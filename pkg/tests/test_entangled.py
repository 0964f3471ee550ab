import numpy as np
import pytest

from ising_qubits.utils.base import InvalidDistributionError, QuantumConditionError
from ising_qubits.utils.bitq_maps import correlation_map, direct_map, extract_coefficients
from ising_qubits.utils.classical_ops import conditional_jump_c, gate_realization
from ising_qubits.utils.entangled import (
    basis_gate_transfer,
    bell_distribution,
    entangled_family,
    family_rho,
    nonlinearity_witness,
    product_state_wavefunction,
    reference_wavefunction,
    sector_vector_to_configs,
    single_qubit_rotation_o,
)
from ising_qubits.utils.quantum_core import gate, pure_state
from ising_qubits.utils.spin_core import distribution_from_normalized


@pytest.mark.parametrize("theta", np.linspace(0.0, 2 * np.pi, 64))
def test_entangled_family_realizes_psi_theta(theta):
    """The classical wave function reproduces every coefficient of psi_theta"""
    _, dist = entangled_family(theta)
    coeffs = extract_coefficients(correlation_map(2), dist)
    np.testing.assert_allclose(coeffs, family_rho(theta).coefficients, atol=1e-12)


def test_entangled_family_sign_choices():
    """Sign choices in sectors 1 and 2 leave the quantum state unchanged"""
    _, dist = entangled_family(0.7, eps1=-1, eps2=-1)
    coeffs = extract_coefficients(correlation_map(2), dist)
    np.testing.assert_allclose(coeffs, family_rho(0.7).coefficients, atol=1e-12)


def test_bell_distribution():
    """Eight anticorrelated configurations at 1/8 each"""
    p = bell_distribution().p
    support = np.flatnonzero(p > 1e-15)
    assert support.size == 8
    np.testing.assert_allclose(p[support], 0.125, atol=1e-15)


def test_sector_vector_validation():
    with pytest.raises(InvalidDistributionError):
        sector_vector_to_configs([np.ones(4), np.ones(4)])
    with pytest.raises(InvalidDistributionError):
        sector_vector_to_configs([np.ones(4), np.ones(4), np.ones(3)])


def test_product_state_wavefunctions_share_rho():
    """Different wave functions give the same product state |00>"""
    expected = pure_state([1, 0, 0, 0]).coefficients
    for params, signs in (((1.0, 0.0, 1.0, 0.0), (1, 1, 1, 1)), ((0.3, 0.8, 2.0, -1.0), (1, -1, -1, 1))):
        q = product_state_wavefunction(*params, signs=signs)
        coeffs = extract_coefficients(correlation_map(2), distribution_from_normalized(q))
        np.testing.assert_allclose(coeffs, expected, atol=1e-12)


def test_product_state_wavefunction_degenerate():
    with pytest.raises(InvalidDistributionError):
        product_state_wavefunction(0.0, 0.0, 1.0, 0.0)


def test_reference_wavefunction():
    """q_3 realizes the tau_3 eigenstate"""
    dist = distribution_from_normalized(reference_wavefunction())
    np.testing.assert_allclose(extract_coefficients(direct_map(1), dist), [0.0, 0.0, 1.0], atol=1e-15)


@pytest.mark.parametrize("target", [(0.0, 0.0, 1.0), (1.0, 0.0, 0.0), (0.6, 0.0, 0.8), (0.36, 0.48, 0.8)])
def test_single_qubit_rotation(target):
    """Rotated reference wave functions hit every pure target"""
    result = single_qubit_rotation_o(np.array(target))
    np.testing.assert_allclose(result.rho, target, atol=1e-10)
    np.testing.assert_allclose(result.O @ result.O.T, np.eye(8), atol=1e-12)


def test_single_qubit_rotation_rejects_mixed_and_invalid():
    with pytest.raises(QuantumConditionError):
        single_qubit_rotation_o(np.array([0.3, 0.0, 0.4]))
    with pytest.raises(QuantumConditionError):
        single_qubit_rotation_o(np.array([1.5, 0.0, 0.0]))


def test_nonlinearity_witness():
    """The flip works on tau_3 eigenstates but leaves rho_2 = 1 where -1 is needed"""
    report = nonlinearity_witness(seed=0, samples=20)
    assert report.s3_family_ok
    assert report.rho2_after == pytest.approx(1.0)
    assert report.commutator_diagonal_max == 0.0
    assert report.linear_realization_excluded


def test_basis_transfer_for_local_gate():
    """A local unique jump passes on all 36 basis states and extends by linearity"""
    bq_map = correlation_map(2)
    op = gate_realization("H", bq_map, (1,))
    report = basis_gate_transfer(op, bq_map, gate("H", 1, Q=2), seed=0)
    assert report.ok
    assert report.reassembly_error <= 1e-9


def test_basis_transfer_for_conditional_jump():
    """The conditional jump fails CNOT on some basis states"""
    report = basis_gate_transfer(conditional_jump_c(), correlation_map(2), gate("CNOT", 1, 2, Q=2), seed=0)
    assert report.basis_failures
    assert not report.ok
