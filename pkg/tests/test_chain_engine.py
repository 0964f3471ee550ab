import logging

import numpy as np
import pytest

from ising_qubits.utils.base import DimensionMismatchError, InvalidDistributionError, SingularStepError
from ising_qubits.utils.bitq_maps import correlation_map, extract_coefficients
from ising_qubits.utils.chain_engine import (
    Chain,
    ClassicalDensityMatrix,
    CouplingTerm,
    SpinCoupling,
    StepEvolutionOperator,
    algebraic_checks,
    copy_operator,
    direct_subsystem_operators,
    equipartition_check,
    evolve_density,
    layer_distributions,
    markov_reducibility,
    memory_decay,
    no_cloning_check,
    partial_equipartition_state,
    partial_trace_operators,
    prepare_quantum_state,
    projector_sp,
    s_of_u,
    spectrum_report,
    step_preset,
    step_from_interaction,
    subsystem_closure,
    trajectory,
    two_step_probability_map,
    equipartition_attractor,
)
from ising_qubits.utils.classical_ops import UniqueJumpOp, hadamard_rule, rule_to_permutation
from ising_qubits.utils.quantum_core import pauli_basis
from ising_qubits.utils.spin_core import ProbabilityDistribution, WaveFunctionPair


def _moduli(S):
    return np.sort(np.abs(spectrum_report(S).eigenvalues))[::-1]


def test_projector_spectrum():
    """S_P has eigenvalues 1, -1, 0, 0"""
    eigenvalues = np.sort(spectrum_report(projector_sp()).eigenvalues.real)
    np.testing.assert_allclose(eigenvalues, [-1.0, 0.0, 0.0, 1.0], atol=1e-12)
    assert not StepEvolutionOperator(projector_sp()).invertible


def test_s_of_u_spectrum():
    """S(u) keeps +-1 and damps the memory plane by |1 - 2u|"""
    np.testing.assert_allclose(_moduli(s_of_u(0.3)), [1.0, 1.0, 0.4, 0.4], atol=1e-12)
    with pytest.raises(InvalidDistributionError):
        s_of_u(1.5)


def test_attractor_spectrum():
    """The attractor has one leading eigenvalue and a subleading modulus of 1/3"""
    report = spectrum_report(equipartition_attractor())
    assert report.eigenvalues[0] == pytest.approx(1.0)
    assert report.subleading == pytest.approx(1 / 3)
    assert report.period is None


def test_step_operator_detects_permutations():
    """Dense permutation matrices are stored as permutations"""
    step = StepEvolutionOperator(UniqueJumpOp(np.array([1, 2, 3, 0])).matrix)
    assert step.is_permutation
    np.testing.assert_array_equal(step.inverse(), step.S.T)
    with pytest.raises(InvalidDistributionError):
        StepEvolutionOperator(equipartition_attractor(), representation="permutation")
    with pytest.raises(DimensionMismatchError):
        StepEvolutionOperator(np.eye(3))


def test_step_presets():
    """Named presets build the expected operators"""
    assert step_preset("sp").M == 2
    assert step_preset("projector").M == 3
    assert step_preset("s(u)", u=0.25).name == "s(u=0.25)"
    swap = step_preset("swap_coupling")
    assert swap.is_permutation and swap.M == 6
    assert swap.as_operation().order() == 2
    assert step_preset("hadamard_coupling").is_permutation


def test_step_preset_errors():
    """Unknown names and missing parameters are reported"""
    with pytest.raises(KeyError):
        step_preset("nope")
    with pytest.raises(InvalidDistributionError):
        step_preset("s(u)")
    with pytest.raises(InvalidDistributionError):
        step_preset("frustrated", gamma=0)


def test_frustrated_step_without_gamma_is_conditional_jump():
    """gamma = 0 leaves a unique successor for every configuration"""
    step = step_preset("frustrated", gamma=0, delta=0, Delta=10)
    assert step.is_permutation


def test_frustrated_step_with_gamma_splits():
    """gamma = 2 leaves several equally likely successors"""
    step = step_preset("frustrated", gamma=2, delta=0, Delta=10)
    assert not step.is_permutation


def test_preparation_from_single_configuration():
    """The projector sends (+, -, -) to an equal split and a pure rho = (1, 0, 0)"""
    result = prepare_quantum_state(ProbabilityDistribution.delta(3, 4))
    np.testing.assert_allclose(result.distribution.p[[5, 6]], [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(result.rho, [1.0, 0.0, 0.0], atol=1e-12)
    assert result.positive and result.pure
    assert result.to_dict()["layer"] == 1


def test_preparation_needs_three_spins():
    with pytest.raises(DimensionMismatchError):
        prepare_quantum_state(ProbabilityDistribution.uniform(2))


def test_memory_decay_rate():
    """The memory plane shrinks by |1 - 2u| per step"""
    decay = memory_decay(0.3, 20, seed=1)
    assert decay.rate == pytest.approx(0.4)
    assert decay.max_relative_error <= 1e-10
    for u in (0.1, 0.3):
        long_run = memory_decay(u, 50, seed=0)
        assert long_run.norms[-1] == pytest.approx(long_run.norms[0] * long_run.rate ** 50, rel=1e-10)
        assert long_run.max_relative_error <= 1e-10
    assert memory_decay(0.5, 3, seed=1).norms[1] == pytest.approx(0.0, abs=1e-15)


def test_density_and_wavefunction_routes_agree():
    """S rho' S^-1 reproduces the wave-function probabilities for invertible steps"""
    step = StepEvolutionOperator(UniqueJumpOp(np.array([1, 2, 3, 0])).matrix)
    chain = Chain((step, step), WaveFunctionPair(np.array([0.4, 0.3, 0.2, 0.1]), np.ones(4)))
    by_density = [layer.diagonal for layer in evolve_density(chain)]
    by_wavefunction = [dist.p for dist in layer_distributions(chain)]
    for a, b in zip(by_density, by_wavefunction):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_singular_step_raises_without_pinv():
    """Density evolution through S_P needs the explicit pseudo-inverse opt-in"""
    chain = Chain((step_preset("sp"),), ClassicalDensityMatrix.from_distribution(ProbabilityDistribution.uniform(2)))
    with pytest.raises(SingularStepError):
        evolve_density(chain)


def test_singular_step_with_pinv_warns(caplog):
    """The pseudo-inverse route logs a warning and keeps unit trace"""
    chain = Chain((step_preset("sp"),), ClassicalDensityMatrix.from_distribution(ProbabilityDistribution.uniform(2)))
    with caplog.at_level(logging.WARNING):
        layers = evolve_density(chain, allow_singular=True)
    assert "pseudo-inverse" in caplog.text
    assert layers[-1].trace == pytest.approx(1.0)
    np.testing.assert_allclose(layers[-1].diagonal, 0.25, atol=1e-12)


def test_chain_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        Chain((step_preset("projector"),), WaveFunctionPair(np.ones(4), np.ones(4)))


def test_trajectory_reports_rho():
    """Each layer carries t, the local probabilities and the extracted coefficients"""
    chain = Chain((step_preset("swap_coupling"),), ClassicalDensityMatrix.from_distribution(ProbabilityDistribution.uniform(6)),
                  t_in=1.0, eps=0.5)
    rows = trajectory(chain, correlation_map(2))
    assert [row["t"] for row in rows] == [1.0, 1.5]
    assert rows[-1]["verdict"]["positive"]


def test_markov_reducibility():
    """Permutations reduce to probability maps, the attractor does not"""
    P = UniqueJumpOp(np.array([1, 2, 3, 0])).matrix
    report = markov_reducibility(P)
    assert report.reducible
    np.testing.assert_allclose(report.W, P)
    assert not markov_reducibility(equipartition_attractor()).reducible
    with pytest.raises(SingularStepError):
        markov_reducibility(projector_sp())


def test_two_step_probability_map_for_permutations():
    """Two unique jumps always give a probability map"""
    P = UniqueJumpOp(np.array([1, 2, 3, 0])).matrix
    result = two_step_probability_map(P, P)
    assert result.exists
    np.testing.assert_allclose(result.W, P)


def test_subsystem_closure_for_hadamard_jump():
    """The Hadamard jump closes on the single-qubit subsystem"""
    S = rule_to_permutation(hadamard_rule()).matrix
    closure = subsystem_closure(S, direct_subsystem_operators(3), list(pauli_basis(1).matrices), seed=3)
    assert closure.closed
    np.testing.assert_allclose(closure.c, [[0, 0, 1], [0, -1, 0], [1, 0, 0]], atol=1e-9)


def test_no_cloning_for_orthogonal_states():
    """The copy permutation clones both sharp states, which are orthogonal"""
    plus = WaveFunctionPair(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    minus = WaveFunctionPair(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    ancilla = WaveFunctionPair(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    report = no_cloning_check(copy_operator(), plus, minus, ancilla)
    assert report.cloned_first and report.cloned_second
    assert report.overlap == 0.0
    assert report.consistent


def test_no_cloning_of_superposition():
    """A spread wave function is not copied"""
    spread = WaveFunctionPair(np.array([0.5, 0.5]), np.array([1.0, 1.0]))
    sharp = WaveFunctionPair(np.array([0.0, 1.0]), np.array([0.0, 1.0]))
    ancilla = WaveFunctionPair(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
    report = no_cloning_check(copy_operator(), spread, sharp, ancilla)
    assert not report.cloned_first
    assert report.consistent


def test_algebraic_checks_cnot_always_violated():
    """No step operator satisfies every CNOT relation on the correlation map"""
    for S in (np.eye(64), step_preset("frustrated", gamma=0, delta=0, Delta=10).S):
        assert algebraic_checks(S).violated


def test_algebraic_checks_hadamard_step():
    """The Hadamard coupling satisfies every relation of H on qubit 1"""
    report = algebraic_checks(step_preset("hadamard_coupling"), "H", (1,))
    assert report.relations
    assert report.violated == []


def test_equipartition_check():
    """The attractor preserves equipartition, a non-stochastic diagonal does not"""
    report = equipartition_check(equipartition_attractor())
    assert report.preserves and report.sum_conditions
    report = equipartition_check(np.diag([2.0, 0.5, 1.0, 1.0]))
    assert not report.preserves and not report.row_sums_ok


def test_partial_equipartition_state():
    """Fixed s3(1) and s1(2) with equipartition elsewhere"""
    state = partial_equipartition_state(1, -1)
    coeffs = extract_coefficients(correlation_map(2), state.distribution())
    basis = pauli_basis(2)
    assert coeffs[basis.index("30")] == pytest.approx(1.0)
    assert coeffs[basis.index("01")] == pytest.approx(-1.0)
    assert coeffs[basis.index("31")] == pytest.approx(-1.0)
    with pytest.raises(InvalidDistributionError):
        partial_equipartition_state(0, 1)


def test_partial_trace_closure():
    """A product step keeps the traced subsystem closed, a system/environment swap does not"""
    operators, generators = partial_trace_operators(2, 2)
    X = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert subsystem_closure(np.kron(X, X), operators, generators, seed=0).closed

    swap = np.eye(4)[[0, 2, 1, 3]]
    assert not subsystem_closure(swap, operators, generators, seed=0).closed


def test_zero_temperature_leaking_zero_set():
    """A configuration with no minimal-L successor is rejected"""
    coupling = SpinCoupling((CouplingTerm(1.0, (1,), (1,)), CouplingTerm(1.0, (1,), ())), beta_infinite=True)
    with pytest.raises(SingularStepError):
        step_from_interaction(coupling, 1)


def test_zero_temperature_splitter_and_merge():
    """Several minimal successors split equally, unique ones jump"""
    splitter = step_from_interaction(SpinCoupling((), beta_infinite=True), 1)
    np.testing.assert_allclose(splitter.S, np.full((2, 2), 0.5))

    merge = step_from_interaction(SpinCoupling((CouplingTerm(1.0, (1,), ()),), beta_infinite=True), 1)
    np.testing.assert_allclose(merge.S.sum(axis=0), [1.0, 1.0])
    assert not merge.is_permutation


def test_classical_density_matrix_trace_tolerance():
    """The trace must be one to within 1e-12"""
    ClassicalDensityMatrix(np.diag([0.5, 0.5 + 1e-13]))
    with pytest.raises(InvalidDistributionError):
        ClassicalDensityMatrix(np.diag([0.5, 0.5 + 1e-11]))
