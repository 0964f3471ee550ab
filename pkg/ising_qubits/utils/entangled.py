"""
Explicit classical wave functions for entangled two-qubit states on the correlation map,
and the per-state (non-linear) rotations that realize single-qubit unitaries
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .base import DEFAULT_SEED, InvalidDistributionError, QuantumConditionError
from .bitq_maps import BitQuantumMap, correlation_map, direct_map, extract_coefficients, sample_quantum_distribution
from .qcond import basis_decomposition, basis_state, random_positive_rho
from .quantum_core import GateSpec, QuantumDensityMatrix, apply_unitary, pauli_basis, pure_state
from .spin_core import (
    NormalizedClassicalWaveFunction,
    ProbabilityDistribution,
    distribution_from_normalized,
    spin_table,
)

logger = logging.getLogger(__name__)


def _pair_position(first: np.ndarray, second: np.ndarray) -> np.ndarray:
    """Position 0..3 of (+,+), (+,-), (-,+), (-,-) for spin value columns."""
    return 2 * (first < 0) + (second < 0)


def sector_vector_to_configs(q_sectors: Sequence[np.ndarray]) -> np.ndarray:
    """
    Product wave function q^(1) x q^(2) x q^(3) over the k-sectors, as a vector over
    the 64 correlation-map configurations.

    Sector k holds the pair (s_k(1), s_k(2)); its four components are ordered
    (+,+), (+,-), (-,+), (-,-).
    """
    if len(q_sectors) != 3:
        raise InvalidDistributionError("need one four-component vector per sector")
    table = spin_table(6)
    q = np.ones(64)
    for k, vector in enumerate(q_sectors):
        vector = np.asarray(vector, dtype=float)
        if vector.shape != (4,):
            raise InvalidDistributionError(f"sector {k + 1} vector must have four components")
        q = q * vector[_pair_position(table[:, k], table[:, 3 + k])]
    return q


def entangled_family(theta: float, eps1: int = 1, eps2: int = 1) -> Tuple[NormalizedClassicalWaveFunction, ProbabilityDistribution]:
    """
    Classical wave function and distribution realizing psi_theta = (0, cos theta, sin theta, 0).

    Sectors 1 and 2 carry (a, b, eps2 b, eps1 a) with a = (cos + sin)/2, b = (cos - sin)/2;
    sector 3 carries (0, cos theta, sin theta, 0).

    Returns:
        (NormalizedClassicalWaveFunction, ProbabilityDistribution) over M=6
    """
    c, s = np.cos(theta), np.sin(theta)
    a, b = (c + s) / 2, (c - s) / 2
    q12 = np.array([a, b, eps2 * b, eps1 * a])
    q3 = np.array([0.0, c, s, 0.0])
    q = NormalizedClassicalWaveFunction.normalized(sector_vector_to_configs([q12, q12, q3]))
    return q, distribution_from_normalized(q)


def bell_distribution() -> ProbabilityDistribution:
    """Maximally entangled state: eight configurations with s_k(1) = -s_k(2) at 1/8."""
    # theta = -pi/4 with exact zeros; cos and sin of -pi/4 differ in the last bit
    h = 1.0 / np.sqrt(2.0)
    q12 = np.array([0.0, h, h, 0.0])
    q3 = np.array([0.0, h, -h, 0.0])
    q = NormalizedClassicalWaveFunction.normalized(sector_vector_to_configs([q12, q12, q3]))
    return distribution_from_normalized(q)


def family_rho(theta: float) -> QuantumDensityMatrix:
    return pure_state([0.0, np.cos(theta), np.sin(theta), 0.0])


def random_correlation_state(rng: np.random.Generator, max_parts: int = 3) -> ProbabilityDistribution:
    """
    Random mixture of correlation-map distributions for product states and psi_theta states.

    Every two-spin correlation is a classical expectation value, so the extracted rho
    obeys the classical CHSH bound.
    """
    bq_map = correlation_map(2)
    parts = []
    for _ in range(int(rng.integers(1, max_parts + 1))):
        if rng.random() < 0.5:
            parts.append(entangled_family(float(rng.uniform(0.0, 2 * np.pi)))[1].p)
        else:
            product = np.kron(random_positive_rho(1, rng).matrix, random_positive_rho(1, rng).matrix)
            parts.append(sample_quantum_distribution(bq_map, QuantumDensityMatrix(2, product)).p)
    weights = rng.dirichlet(np.ones(len(parts)))
    return ProbabilityDistribution.from_array(weights @ np.array(parts), renormalize=True)


def product_state_wavefunction(a: float, b: float, c: float, d: float,
                               signs: Tuple[int, int, int, int] = (1, 1, 1, 1)) -> NormalizedClassicalWaveFunction:
    """
    Wave functions realizing rho_30 = rho_03 = rho_33 = 1.

    q = q^(1) x q^(2) x q^(3): q^(1) = (a, b, +-b, +-a) over qubit 1's pair (s1(1), s2(1)),
    q^(2) = (c, d, +-d, +-c) over (s1(2), s2(2)), q^(3) = (1, 0, 0, 0) over (s3(1), s3(2)).
    Different parameters give different wave functions for the same quantum state.

    Raises:
        InvalidDistributionError: a**2 + b**2 or c**2 + d**2 vanishes
    """
    n1, n2 = a * a + b * b, c * c + d * d
    if n1 <= 1e-300 or n2 <= 1e-300:
        raise InvalidDistributionError("degenerate normalization: a**2 + b**2 and c**2 + d**2 must be positive")
    q1 = np.array([a, b, signs[0] * b, signs[1] * a]) / np.sqrt(2 * n1)
    q2 = np.array([c, d, signs[2] * d, signs[3] * c]) / np.sqrt(2 * n2)
    q3 = np.array([1.0, 0.0, 0.0, 0.0])
    table = spin_table(6)
    q = (
        q1[_pair_position(table[:, 0], table[:, 1])]
        * q2[_pair_position(table[:, 3], table[:, 4])]
        * q3[_pair_position(table[:, 2], table[:, 5])]
    )
    return NormalizedClassicalWaveFunction.normalized(q)


def _rotation(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, s], [-s, c]])


def _to_configs(kron_vector: np.ndarray) -> np.ndarray:
    # kron index 0 is s = +1 while configuration bit 1 is s = +1
    return kron_vector[::-1]


def reference_wavefunction() -> NormalizedClassicalWaveFunction:
    """q_3 = 1/2 (1, 1) x (1, 1) x (1, 0), realizing rho = (0, 0, 1)."""
    q = 0.5 * np.kron(np.kron([1.0, 1.0], [1.0, 1.0]), [1.0, 0.0])
    return NormalizedClassicalWaveFunction(_to_configs(q))


@dataclass
class RotationResult:
    """Orthogonal O = O^(1) x O^(2) x O^(3) taking q_3 to a wave function for the target"""

    O: np.ndarray = field(repr=False)
    angles: Tuple[float, float, float]
    q: NormalizedClassicalWaveFunction = field(repr=False)

    @property
    def rho(self) -> np.ndarray:
        return extract_coefficients(direct_map(1), distribution_from_normalized(self.q))


def single_qubit_rotation_o(rho_target, tol: float = 1e-9) -> RotationResult:
    """
    Rotation of the reference wave function realizing a pure single-qubit state.

    sin(theta_k) cos(theta_k) = rho_k / 2 for k = 1, 2 and
    cos(theta_3) = sqrt((1 + rho_3) / 2), theta_3 <= 0.

    Raises:
        QuantumConditionError: |rho_k| > 1 or rho is not pure
    """
    rho = np.asarray(getattr(rho_target, "coefficients", rho_target), dtype=float)
    if rho.shape != (3,):
        raise QuantumConditionError("single-qubit rotation needs three coefficients")
    if np.abs(rho).max() > 1 + tol:
        raise QuantumConditionError(f"|rho_k| = {np.abs(rho).max():.6f} exceeds one")
    if abs(float(rho @ rho) - 1) > tol:
        raise QuantumConditionError(f"target is not pure: sum rho_k^2 = {float(rho @ rho):.6f}")
    rho = np.clip(rho, -1.0, 1.0)
    angles = (
        float(np.arcsin(rho[0]) / 2),
        float(np.arcsin(rho[1]) / 2),
        float(-np.arctan2(np.sqrt((1 - rho[2]) / 2), np.sqrt((1 + rho[2]) / 2))),
    )
    O_kron = np.kron(np.kron(_rotation(angles[0]), _rotation(angles[1])), _rotation(angles[2]))
    O = O_kron[::-1, ::-1]
    q = NormalizedClassicalWaveFunction.normalized(O @ reference_wavefunction().q)
    result = RotationResult(O, angles, q)
    error = float(np.abs(result.rho - rho).max())
    if error > 1e-10:
        raise QuantumConditionError(f"rotated wave function misses the target by {error:.3e}")
    return result


@dataclass
class NonlinearityReport:
    """Evidence that no state-independent orthogonal O realizes U = tau_1"""

    s3_family_ok: bool
    rho2_after: float
    rho2_required: float
    commutator_diagonal_max: float
    samples: int

    @property
    def linear_realization_excluded(self) -> bool:
        return self.s3_family_ok and abs(self.rho2_after - self.rho2_required) > 1e-9

    def to_dict(self) -> Dict[str, Any]:
        return {
            "s3_family_ok": self.s3_family_ok,
            "rho2_after": self.rho2_after,
            "rho2_required": self.rho2_required,
            "commutator_diagonal_max": self.commutator_diagonal_max,
            "samples": self.samples,
            "linear_realization_excluded": self.linear_realization_excluded,
        }


def flip_rotation_o1() -> np.ndarray:
    """O_1 = 1 x 1 x ((0, -1), (1, 0)), realizing tau_1 on s3 eigenstates."""
    O_kron = np.kron(np.eye(4), _rotation(-np.pi / 2))
    return O_kron[::-1, ::-1]


def nonlinearity_witness(seed: Optional[int] = None, samples: int = 100) -> NonlinearityReport:
    """
    O_1 maps rho = (0, 0, +-1) to (0, 0, -+1) as tau_1 requires, but leaves rho_2 = 1
    unchanged where tau_1 demands -1. Infinitesimal rotations cannot help either:
    [beta, s_k] has zero diagonal for every antisymmetric beta.
    """
    bq_map = direct_map(1)
    O1 = flip_rotation_o1()

    def rotate(target):
        q = single_qubit_rotation_o(target).q
        return extract_coefficients(bq_map, distribution_from_normalized(NormalizedClassicalWaveFunction.normalized(O1 @ q.q)))

    s3_ok = all(
        np.abs(rotate(np.array([0.0, 0.0, sign])) - np.array([0.0, 0.0, -sign])).max() <= 1e-12
        for sign in (1.0, -1.0)
    )
    rho2_after = float(rotate(np.array([0.0, 1.0, 0.0]))[1])

    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    table = spin_table(3)
    worst = 0.0
    for _ in range(samples):
        beta = rng.standard_normal((8, 8))
        beta = beta - beta.T
        for k in range(3):
            s_hat = np.diag(table[:, k])
            worst = max(worst, float(np.abs(np.diag(beta @ s_hat - s_hat @ beta)).max()))
    return NonlinearityReport(s3_ok, rho2_after, -1.0, worst, samples)


@dataclass
class TransferReport:
    """A classical operation checked on the 36 basis states and extended by linearity"""

    basis_failures: List[Tuple[int, int, int, int]]
    reassembly_error: float

    @property
    def ok(self) -> bool:
        return not self.basis_failures and self.reassembly_error <= 1e-9

    def to_dict(self) -> Dict[str, Any]:
        return {
            "basis_failures": [list(f) for f in self.basis_failures],
            "reassembly_error": self.reassembly_error,
            "ok": self.ok,
        }


def basis_gate_transfer(op, bq_map: BitQuantumMap, gate_spec: GateSpec,
                        rho: Optional[QuantumDensityMatrix] = None, seed: Optional[int] = None) -> TransferReport:
    """
    Check a classical operation on every two-qubit basis state, then predict its
    action on rho from the basis decomposition.

    Args:
        op: UniqueJumpOp or MarkovOp acting on the map's configurations
        bq_map: Two-qubit map
        gate_spec: The gate the operation should realize
        rho: State to reassemble; a random positive state by default
    """
    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    rho = rho if rho is not None else random_positive_rho(2, rng)
    images = {}
    failures = []
    for k, l in itertools.product((1, 2, 3), repeat=2):
        for ek, el in itertools.product((1, -1), repeat=2):
            state = basis_state(k, l, ek, el)
            dist = sample_quantum_distribution(bq_map, state)
            after = extract_coefficients(bq_map, op.apply_vector(dist.p))
            expected = apply_unitary(state, gate_spec).coefficients
            if np.abs(after - expected).max() > 1e-9:
                failures.append((k, l, ek, el))
            images[(k, l, ek, el)] = after
    alpha = basis_decomposition(rho)
    predicted = np.zeros(pauli_basis(2).size)
    for (k, l, ek, el), image in images.items():
        predicted += alpha[k - 1, l - 1, 0 if ek > 0 else 1, 0 if el > 0 else 1] * image
    error = float(np.abs(predicted - apply_unitary(rho, gate_spec).coefficients).max())
    logger.debug(f"Basis transfer: {len(failures)} failing basis states, reassembly error {error:.3e}")
    return TransferReport(failures, error)
