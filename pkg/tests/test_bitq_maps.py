import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ising_qubits.utils.base import ConstructionNotFoundError, DimensionMismatchError, QuantumConditionError
from ising_qubits.utils.bitq_maps import (
    MAP_NAMES,
    MapVariant,
    bernoulli_distribution,
    correlation_map,
    correlation_spin,
    correlation_supported_family,
    density_linear_map,
    direct_map,
    extended_map,
    extract_coefficients,
    extract_rho,
    icosahedral_map,
    icosahedral_relation,
    linearity_check,
    make_map,
    map_constraint_residual,
    sample_quantum_distribution,
)
from ising_qubits.utils.entangled import family_rho
from ising_qubits.utils.qcond import random_positive_rho
from ising_qubits.utils.quantum_core import pauli_basis, pure_state, rho_from_coefficients
from ising_qubits.utils.spin_core import ProbabilityDistribution, random_distribution


def test_make_map_names():
    """Every CLI map name builds a map with the advertised spin count"""
    spins = {"direct3": 3, "direct15": 15, "correlation6": 6, "signed3": 3, "extended4": 4, "icosa6": 6}
    for name in MAP_NAMES:
        assert make_map(name).M == spins[name]
    with pytest.raises(DimensionMismatchError):
        make_map("direct7")


def test_direct_map_reads_spin_means():
    """rho_k = <s_k> for the direct single-qubit map"""
    dist = bernoulli_distribution([0.2, -0.4, 0.6])
    np.testing.assert_allclose(extract_coefficients(direct_map(1), dist), [0.2, -0.4, 0.6], atol=1e-14)


def test_correlation_spin_numbering():
    """Spin (i, k) is number 3(i-1) + k"""
    assert correlation_spin(1, 1) == 1
    assert correlation_spin(2, 3) == 6
    assert correlation_map(2).products[pauli_basis(2).index("13")] == (1, 6)


def test_extract_rho_uniform_is_maximally_mixed():
    """Equipartition maps to rho = 1/2**Q"""
    rho = extract_rho(correlation_map(2), ProbabilityDistribution.uniform(6))
    np.testing.assert_allclose(rho.matrix, np.eye(4) / 4, atol=1e-15)


def test_extract_rejects_wrong_size():
    """The distribution must live on the map's spins"""
    with pytest.raises(DimensionMismatchError):
        extract_coefficients(direct_map(1), ProbabilityDistribution.uniform(2))


def test_extended_map_constraint():
    """Redundant spins of the extended map obey their linear relation"""
    bq_map = extended_map()
    assert bq_map.constraints.shape == (2, 4)
    dist = sample_quantum_distribution(bq_map, rho_from_coefficients(1, [0.3, 0.0, -0.5]))
    assert map_constraint_residual(bq_map, dist) <= 1e-12


def test_extended_map_rejects_rho2():
    """States with rho_2 != 0 have no preimage under the extended map"""
    with pytest.raises(ConstructionNotFoundError):
        sample_quantum_distribution(extended_map(), rho_from_coefficients(1, [0.0, 0.5, 0.0]))


def test_icosahedral_map_roundtrip():
    """The icosahedral map realizes arbitrary single-qubit states"""
    rho = rho_from_coefficients(1, [0.1, 0.5, -0.3])
    dist = sample_quantum_distribution(icosahedral_map(), rho)
    np.testing.assert_allclose(extract_coefficients(icosahedral_map(), dist), rho.coefficients, atol=1e-12)
    assert abs(icosahedral_relation(dist)) <= 1e-12


def test_sample_rejects_non_positive():
    """Preimages are only built for positive density matrices"""
    with pytest.raises(QuantumConditionError):
        sample_quantum_distribution(direct_map(1), [1.0, 1.0, 0.0])


def test_sample_dimension_mismatch():
    """The state and the map must agree on Q"""
    with pytest.raises(DimensionMismatchError):
        sample_quantum_distribution(direct_map(1), pure_state([1, 0, 0, 0]))


def test_correlation_map_theta_family():
    """The entangled family is realized exactly"""
    rho = family_rho(0.4)
    dist = sample_quantum_distribution(correlation_map(2), rho)
    np.testing.assert_allclose(extract_coefficients(correlation_map(2), dist), rho.coefficients, atol=1e-12)
    assert correlation_supported_family(rho).kind == "theta"


def test_correlation_map_product_state():
    """Product states are realized by independent spins"""
    rho = pure_state(np.kron([1, 1], [1, 0]) / np.sqrt(2))
    assert correlation_supported_family(rho).kind == "product"
    dist = sample_quantum_distribution(correlation_map(2), rho)
    np.testing.assert_allclose(extract_coefficients(correlation_map(2), dist), rho.coefficients, atol=1e-12)


def test_correlation_map_local_image():
    """The Bell state |00> + |11> is an axis-permuted image of the family"""
    rho = pure_state(np.array([1, 0, 0, 1]) / np.sqrt(2))
    match = correlation_supported_family(rho)
    assert match is not None and match.kind in ("theta", "local-image")
    dist = sample_quantum_distribution(correlation_map(2), rho)
    np.testing.assert_allclose(extract_coefficients(correlation_map(2), dist), rho.coefficients, atol=1e-12)


def test_signed_correlation_map_is_rejected():
    """Flipping a product sign breaks the bit-quantum property"""
    bq_map = correlation_map(2, signs={"22": -1})
    with pytest.raises(ConstructionNotFoundError):
        sample_quantum_distribution(bq_map, family_rho(0.4))


def test_density_linear_map():
    """The density-linear map reads the same rho as its base map"""
    base = direct_map(1)
    linear = density_linear_map(base)
    assert linear.variant == MapVariant.DENSITY_LINEAR
    dist = bernoulli_distribution([0.1, 0.2, 0.3])
    np.testing.assert_allclose(extract_coefficients(linear, dist), extract_coefficients(base, dist), atol=1e-14)
    with pytest.raises(DimensionMismatchError):
        density_linear_map(extended_map())


def test_linearity():
    """Extraction is linear in the classical data"""
    rng = np.random.default_rng(3)
    a, b = random_distribution(6, rng), random_distribution(6, rng)
    assert linearity_check(correlation_map(2), a, b, 0.3, 0.7)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_direct_map_preimage_roundtrip(seed):
    """Random positive states are recovered from their seeded preimages"""
    rng = np.random.default_rng(seed)
    bq_map = direct_map(2)
    rho = random_positive_rho(2, rng)
    dist = sample_quantum_distribution(bq_map, rho, seed=seed)
    np.testing.assert_allclose(extract_coefficients(bq_map, dist), rho.coefficients, atol=1e-9)
