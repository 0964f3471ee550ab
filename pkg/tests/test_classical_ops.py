import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ising_qubits.utils.base import (
    DimensionMismatchError,
    GateUnavailableError,
    InvalidDistributionError,
    NonBijectiveRuleError,
)
from ising_qubits.utils.bitq_maps import (
    correlation_map,
    correlation_spin,
    direct_map,
    extended_map,
    extract_coefficients,
    icosahedral_map,
    make_map,
    sample_quantum_distribution,
    signed_map,
)
from ising_qubits.utils.classical_ops import (
    MarkovOp,
    SpinAction,
    SpinTransformRule,
    UniqueJumpOp,
    cnot_counterexample_distribution,
    apply_markov,
    catalog_unique_jumps,
    conditional_jump_c,
    gate_realization,
    gate_violations,
    group_closure,
    hadamard_rule,
    hadamard_t_closure,
    induced_coefficient_map,
    rule_to_permutation,
    spectrum_period,
    t_gate_signed_map,
)
from ising_qubits.utils.entangled import entangled_family
from ising_qubits.utils.qcond import random_positive_rho
from ising_qubits.utils.quantum_core import coefficient_map, gate, pauli_basis, rho_from_coefficients
from ising_qubits.utils.spin_core import ProbabilityDistribution, expectation


def test_hadamard_rule_permutation():
    """s1' = s3, s2' = -s2, s3' = s1 permutes the eight configurations"""
    op = rule_to_permutation(hadamard_rule())
    assert op.M == 3
    assert op.order() == 2
    # (+, +, -) -> (-, -, +)
    assert op.perm[0b110] == 0b001
    assert hadamard_rule().describe() == ["s1' = s3", "s2' = -s2", "s3' = s1"]


def test_hadamard_on_direct_map():
    """The Hadamard jump induces (rho_1, rho_2, rho_3) -> (rho_3, -rho_2, rho_1)"""
    bq_map = direct_map(1)
    op = gate_realization("H", bq_map)
    rho = rho_from_coefficients(1, [0.2, -0.3, 0.5])
    after = extract_coefficients(bq_map, op.apply(sample_quantum_distribution(bq_map, rho)))
    np.testing.assert_allclose(after, [0.5, 0.3, 0.2], atol=1e-12)


def test_non_bijective_rule():
    """Copying one spin onto another is not a permutation"""
    rule = SpinTransformRule.from_mapping(2, {2: (1, 1)})
    with pytest.raises(NonBijectiveRuleError):
        rule_to_permutation(rule)


def test_unique_jump_validation():
    """Index arrays must be permutations of 2**M states"""
    with pytest.raises(NonBijectiveRuleError):
        UniqueJumpOp(np.array([0, 0, 1, 2]))
    with pytest.raises(DimensionMismatchError):
        UniqueJumpOp(np.array([0, 1, 2]))


def test_unique_jump_algebra():
    """Composition, inverse and order behave like a permutation group"""
    op = UniqueJumpOp(np.array([1, 2, 3, 0]), "cycle")
    assert op.order() == 4
    np.testing.assert_array_equal(op.compose(op.inverse()).perm, np.arange(4))
    np.testing.assert_allclose(op.matrix @ op.matrix.T, np.eye(4))
    assert UniqueJumpOp.from_json(op.to_json()).name == "cycle"


def test_unique_jump_moves_probability():
    """State tau jumps to perm[tau]"""
    op = UniqueJumpOp(np.array([1, 2, 3, 0]))
    dist = op.apply(ProbabilityDistribution.delta(2, 0))
    assert dist.p[1] == 1.0


def test_markov_op_validation():
    """Columns must sum to one and be nonnegative unless signed"""
    with pytest.raises(InvalidDistributionError):
        MarkovOp(np.array([[0.5, 0.5], [0.4, 0.5]]))
    with pytest.raises(InvalidDistributionError):
        MarkovOp(np.array([[1.5, 0.0], [-0.5, 1.0]]))
    op = MarkovOp(np.array([[1.5, 0.0], [-0.5, 1.0]]), signed=True)
    with pytest.raises(InvalidDistributionError):
        apply_markov(op, ProbabilityDistribution.delta(1, 0))


def test_t_gate_unavailable_on_direct_map():
    """T has no unique-jump realization on three spins"""
    with pytest.raises(GateUnavailableError, match="use map signed3"):
        gate_realization("T", direct_map(1))


def test_signed_t_gate():
    """The signed map on signed3 induces the T rotation"""
    bq_map = signed_map()
    op = gate_realization("T", bq_map)
    assert isinstance(op, MarkovOp) and op.signed
    fit = induced_coefficient_map(op, bq_map, seed=1)
    assert fit.closed
    np.testing.assert_allclose(fit.b, coefficient_map(gate("T")), atol=1e-10)


def test_signed_t_gate_eighth_power():
    """Eight signed T steps return every distribution"""
    W = t_gate_signed_map().W
    np.testing.assert_allclose(np.linalg.matrix_power(W, 8), np.eye(8), atol=1e-12)


def test_extended_map_pi4_rotation():
    """A four-spin unique jump rotates (rho_1, rho_3) by pi/4"""
    bq_map = extended_map()
    op = gate_realization("PI4_31", bq_map)
    assert isinstance(op, UniqueJumpOp)
    assert op.order() == 8
    fit = induced_coefficient_map(op, bq_map, seed=2)
    plane = np.ix_([0, 2], [0, 2])
    np.testing.assert_allclose(fit.b[plane], coefficient_map(gate("PI4_31"))[plane], atol=1e-10)


def test_icosahedral_five_fold_rotation():
    """ROT5 is a unique jump of the icosahedral map with order five"""
    op = gate_realization("ROT5", icosahedral_map())
    assert op.order() == 5


def test_cnot_on_direct15():
    """CNOT on 15 spins turns the product input into sigma_kk = -1"""
    bq_map = make_map("direct15")
    basis = pauli_basis(2)
    coeffs = np.zeros(15)
    coeffs[basis.index("10")] = -1.0
    coeffs[basis.index("03")] = -1.0
    coeffs[basis.index("13")] = 1.0
    dist = sample_quantum_distribution(bq_map, rho_from_coefficients(2, coeffs))
    after = gate_realization("CNOT", bq_map, (1, 2)).apply(dist)
    for label in ("11", "22", "33"):
        assert extract_coefficients(bq_map, after)[basis.index(label)] == pytest.approx(-1.0, abs=1e-12)


def test_cnot_unavailable_on_correlation_map():
    """CNOT has no unique jump on the correlation map"""
    with pytest.raises(GateUnavailableError):
        gate_realization("CNOT", correlation_map(2), (1, 2))


def test_correlation_map_local_gates():
    """Local Clifford gates and SWAP act without violations on the correlation map"""
    bq_map = correlation_map(2)
    _, dist = entangled_family(0.3)
    for name, targets in (("H", (1,)), ("UY", (2,)), ("SWAP", (1, 2)), ("CONJ", ())):
        op = gate_realization(name, bq_map, targets)
        spec = gate(name, *targets, Q=2)
        assert gate_violations(bq_map, spec, dist, op.apply(dist), tol=1e-12) == []


def test_conditional_jump_fails_cnot():
    """The conditional jump C does not realize CNOT on its counterexample distribution"""
    dist = cnot_counterexample_distribution()
    s = correlation_spin
    assert expectation(dist, (s(1, 1), s(2, 1), s(2, 2))) == pytest.approx(1.0)
    after = conditional_jump_c().apply(dist)
    failures = gate_violations(correlation_map(2), gate("CNOT", 1, 2, Q=2), dist, after)
    assert failures
    assert all({"label", "actual", "expected"} <= set(f) for f in failures)


def test_spectrum_of_cycle():
    """A four-cycle has the fourth roots of unity"""
    report = spectrum_period(UniqueJumpOp(np.array([1, 2, 3, 0])))
    assert report.period == 4
    assert sorted(report.periods) == [1, 2, 4, 4]
    assert report.subleading == 0.0


def test_spectrum_of_markov_matrix():
    """A mixing Markov matrix has one leading eigenvalue and no period"""
    report = spectrum_period(np.array([[0.9, 0.2], [0.1, 0.8]]))
    assert report.eigenvalues[0] == pytest.approx(1.0)
    assert report.subleading == pytest.approx(0.7)
    assert report.period is None


def test_group_closure_small():
    """Two generators of S_3 acting on four states close to six elements"""
    a = UniqueJumpOp(np.array([1, 0, 2, 3]))
    b = UniqueJumpOp(np.array([0, 2, 1, 3]))
    assert len(group_closure([a, b])) == 6


def test_catalog_on_direct_map():
    """Clifford gates are catalog unique jumps, T is not"""
    names = {op.name for op in catalog_unique_jumps(direct_map(1))}
    assert "H 1" in names and "CONJ" in names
    assert not any(name.startswith("T") for name in names)


def test_hadamard_t_closure_no_go():
    """No element of the finite unique-jump group induces H T"""
    report = hadamard_t_closure(seed=0)
    assert report.size == 48
    assert report.target_period is None
    assert not report.realizes_target
    assert report.min_residual >= 1e-3


def test_induced_map_for_non_gate_permutation():
    """A generic configuration permutation does not induce a closed coefficient map"""
    rng = np.random.default_rng(4)
    op = UniqueJumpOp(rng.permutation(8))
    fit = induced_coefficient_map(op, direct_map(1), seed=4)
    assert fit.samples == 13
    assert fit.rejected == 0


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_hadamard_property(seed):
    """H acts correctly on every positive single-qubit state"""
    rng = np.random.default_rng(seed)
    bq_map = direct_map(1)
    rho = random_positive_rho(1, rng)
    op = gate_realization("H", bq_map)
    after = extract_coefficients(bq_map, op.apply(sample_quantum_distribution(bq_map, rho, seed=seed)))
    r1, r2, r3 = rho.coefficients
    np.testing.assert_allclose(after, [r3, -r2, r1], atol=1e-9)
