"""
Bit-quantum maps: rules that read a quantum density matrix off classical spin data
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .base import (
    CLOSURE_TOL,
    POSITIVITY_TOL,
    ConstructionNotFoundError,
    DimensionMismatchError,
    QuantumConditionError,
    check_spin_count,
)
from .qcond import positivity_report
from .quantum_core import QuantumDensityMatrix, pauli_basis, pure_state, rho_from_coefficients
from .spin_core import ProbabilityDistribution, spin_product, spin_table

logger = logging.getLogger(__name__)

MAP_NAMES = ("direct3", "direct15", "correlation6", "signed3", "extended4", "icosa6")

_GOLDEN = (1 + np.sqrt(5)) / 2
ICOSA_A = float(np.sqrt((1 + np.sqrt(5)) / (2 * np.sqrt(5))))
ICOSA_B = float(np.sqrt(2 / (5 + np.sqrt(5))))


class MapVariant(str, Enum):
    DIRECT = "direct"
    CORRELATION = "correlation"
    DENSITY_LINEAR = "density-linear"


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class BitQuantumMap:
    """
    A bit-quantum map for Q qubits over M classical spins.

    DIRECT maps carry a direction matrix: <s_j> = directions[j] . rho.
    CORRELATION maps carry, per coefficient, the spin product that measures it.
    DENSITY_LINEAR maps carry diagonal classical operators A'_(z) with entries +-1.
    The observable matrix A (shape (4**Q - 1, 2**M)) gives rho_z = A[z] . p for all variants.
    """

    name: str
    variant: MapVariant
    Q: int
    M: int
    spin_labels: Tuple[str, ...]
    observables: np.ndarray = field(repr=False)
    directions: Optional[np.ndarray] = field(default=None, repr=False)
    products: Optional[Tuple[Tuple[int, ...], ...]] = field(default=None, repr=False)
    product_signs: Optional[np.ndarray] = field(default=None, repr=False)
    base: Optional["BitQuantumMap"] = field(default=None, repr=False)

    def __post_init__(self):
        check_spin_count(self.M)
        if self.observables.shape != (4 ** self.Q - 1, 1 << self.M):
            raise DimensionMismatchError(
                f"observable table has shape {self.observables.shape}, expected {(4 ** self.Q - 1, 1 << self.M)}"
            )

    @property
    def extraction(self) -> Optional[np.ndarray]:
        """rho = extraction @ <s> for direct maps."""
        if self.directions is None:
            return None
        return np.linalg.pinv(self.directions)

    @property
    def constraints(self) -> np.ndarray:
        """Rows r with r . <s> = 0 on every state the map can represent."""
        if self.directions is None:
            return np.zeros((0, self.M))
        return linalg.null_space(self.directions.T).T

    def describe(self) -> Dict[str, object]:
        return {
            "name": self.name,
            "variant": self.variant.value,
            "Q": self.Q,
            "M": self.M,
            "spins": list(self.spin_labels),
        }


def _direction_map(name: str, Q: int, directions, labels: Sequence[str]) -> BitQuantumMap:
    directions = _frozen(directions)
    M = directions.shape[0]
    observables = np.linalg.pinv(directions) @ spin_table(M).T
    return BitQuantumMap(
        name=name,
        variant=MapVariant.DIRECT,
        Q=Q,
        M=M,
        spin_labels=tuple(labels),
        observables=_frozen(observables),
        directions=directions,
    )


def direct_map(Q: int = 1, name: Optional[str] = None) -> BitQuantumMap:
    """One spin per coefficient, spins ordered like the flat Pauli index."""
    basis = pauli_basis(Q)
    check_spin_count(basis.size)
    labels = [f"s{basis.label_string(z)}" for z in range(basis.size)]
    return _direction_map(name or f"direct{basis.size}", Q, np.eye(basis.size), labels)


def signed_map() -> BitQuantumMap:
    """direct3 tables; the signed T-gate map is in its gate catalog."""
    return direct_map(1, name="signed3")


def extended_map() -> BitQuantumMap:
    """
    Four spins s1, s3, s13+, s13- for one qubit with rho_2 = 0.

    <s13+-> = (rho_1 +- rho_3) / sqrt(2).
    """
    r = 1 / np.sqrt(2)
    directions = [
        [1, 0, 0],
        [0, 0, 1],
        [r, 0, r],
        [r, 0, -r],
    ]
    return _direction_map("extended4", 1, directions, ["s1", "s3", "s13+", "s13-"])


def icosahedral_map() -> BitQuantumMap:
    """
    Six spins on the vertex axes of an icosahedron.

    <s1+-> = a rho_1 +- b rho_3, <s2+-> = a rho_2 +- b rho_1, <s3+-> = a rho_3 +- b rho_2.
    """
    a, b = ICOSA_A, ICOSA_B
    directions = [
        [a, 0, b],
        [a, 0, -b],
        [b, a, 0],
        [-b, a, 0],
        [0, b, a],
        [0, -b, a],
    ]
    return _direction_map("icosa6", 1, directions, ["s1+", "s1-", "s2+", "s2-", "s3+", "s3-"])


def correlation_spin(qubit: int, axis: int) -> int:
    """1-based spin number of s_axis^(qubit) in the correlation map."""
    return (qubit - 1) * 3 + axis


def correlation_map(Q: int = 2, signs: Optional[Dict[str, float]] = None) -> BitQuantumMap:
    """
    3Q spins s_k^(i); rho_(mu_1..mu_Q) is the correlation of s_mu_i^(i) over nonzero mu_i.

    Args:
        Q: Number of qubits
        signs: Optional sign per label string, e.g. {"22": -1}; anything but +1
               breaks the map and exists for negative tests

    Returns:
        BitQuantumMap
    """
    basis = pauli_basis(Q)
    M = check_spin_count(3 * Q)
    products = tuple(
        tuple(correlation_spin(i + 1, mu) for i, mu in enumerate(label) if mu)
        for label in basis.labels
    )
    sign_vector = np.ones(basis.size)
    for label, sign in (signs or {}).items():
        sign_vector[basis.index(label)] = float(sign)
    observables = np.array([spin_product(M, spins) for spins in products]) * sign_vector[:, None]
    labels = [f"s{k}({i})" for i in range(1, Q + 1) for k in (1, 2, 3)]
    name = f"correlation{M}" if signs is None else f"correlation{M}-signed"
    return BitQuantumMap(
        name=name,
        variant=MapVariant.CORRELATION,
        Q=Q,
        M=M,
        spin_labels=tuple(labels),
        observables=_frozen(observables),
        products=products,
        product_signs=_frozen(sign_vector),
    )


def density_linear_map(base: BitQuantumMap) -> BitQuantumMap:
    """
    Linear map rho_z = tr(A'_(z) rho') with diagonal operators taken from a base map.

    The base map's observables must take the values +-1 (direct maps with unit
    directions and correlation maps do).
    """
    operators = np.asarray(base.observables)
    if not np.allclose(np.abs(operators), 1.0, atol=1e-12):
        raise DimensionMismatchError(f"map {base.name} has observables that are not +-1 valued")
    return BitQuantumMap(
        name=f"density-{base.name}",
        variant=MapVariant.DENSITY_LINEAR,
        Q=base.Q,
        M=base.M,
        spin_labels=base.spin_labels,
        observables=_frozen(np.sign(operators)),
        base=base,
    )


def make_map(name: str) -> BitQuantumMap:
    """Build a map from its CLI name."""
    builders = {
        "direct3": lambda: direct_map(1),
        "direct15": lambda: direct_map(2),
        "correlation6": lambda: correlation_map(2),
        "signed3": signed_map,
        "extended4": extended_map,
        "icosa6": icosahedral_map,
        "density-linear": lambda: density_linear_map(direct_map(1)),
    }
    if name not in builders:
        raise DimensionMismatchError(f"unknown map '{name}'; choose from {', '.join(builders)}")
    return builders[name]()


def _diagonal(source) -> np.ndarray:
    if isinstance(source, ProbabilityDistribution):
        return source.p
    diagonal = getattr(source, "diagonal", None)
    if diagonal is not None and not callable(diagonal):
        return np.asarray(diagonal, dtype=float)
    array = np.asarray(source, dtype=float)
    if array.ndim == 2:
        return np.diag(array).copy()
    return array


def extract_coefficients(bq_map: BitQuantumMap, source) -> np.ndarray:
    """
    Raw coefficients rho_z from a distribution, a classical density matrix or a vector.

    Unlike extract_rho this never validates the result as a density matrix.
    """
    p = _diagonal(source)
    if p.shape != (1 << bq_map.M,):
        raise DimensionMismatchError(f"map {bq_map.name} needs {1 << bq_map.M} probabilities, got shape {p.shape}")
    return bq_map.observables @ p


def extract_rho(bq_map: BitQuantumMap, source) -> QuantumDensityMatrix:
    """
    Quantum density matrix of the subsystem.

    Args:
        bq_map: The bit-quantum map
        source: ProbabilityDistribution, ClassicalDensityMatrix (its diagonal is used)
                or a raw probability vector

    Returns:
        QuantumDensityMatrix (Hermitian, trace one; positivity is not implied)
    """
    return rho_from_coefficients(bq_map.Q, extract_coefficients(bq_map, source))


def linearity_check(bq_map: BitQuantumMap, rho_a, rho_b, alpha: float, beta: float, tol: float = 1e-12) -> bool:
    """rho(alpha rho'_a + beta rho'_b) == alpha rho(rho'_a) + beta rho(rho'_b)."""
    d_a, d_b = _diagonal(rho_a), _diagonal(rho_b)
    combined = extract_coefficients(bq_map, alpha * d_a + beta * d_b)
    separate = alpha * extract_coefficients(bq_map, d_a) + beta * extract_coefficients(bq_map, d_b)
    scale = max(1.0, abs(alpha) + abs(beta))
    return bool(np.abs(combined - separate).max() <= tol * scale)


def map_constraint_residual(bq_map: BitQuantumMap, dist: ProbabilityDistribution) -> float:
    """Largest violation of the linear relations the redundant spins of a direct map obey."""
    R = bq_map.constraints
    if R.shape[0] == 0:
        return 0.0
    means = spin_table(bq_map.M).T @ _diagonal(dist)
    return float(np.abs(R @ means).max())


def icosahedral_relation(dist: ProbabilityDistribution) -> float:
    """<s2+> - <s2-> - 2/(1+sqrt 5) (<s1+> + <s1->), zero inside the icosahedral map's domain."""
    means = spin_table(6).T @ _diagonal(dist)
    return float(means[2] - means[3] - (means[0] + means[1]) / _GOLDEN)


def bernoulli_distribution(means) -> ProbabilityDistribution:
    """Independent spins with p(s_j = 1) = (1 + m_j) / 2."""
    means = np.asarray(means, dtype=float)
    if np.abs(means).max(initial=0.0) > 1 + 1e-12:
        raise ConstructionNotFoundError(f"spin mean {np.abs(means).max():.6f} outside [-1, 1]")
    means = np.clip(means, -1.0, 1.0)
    table = spin_table(means.size)
    p = np.prod((1 + table * means[None, :]) / 2, axis=1)
    return ProbabilityDistribution.from_array(p, renormalize=True)


def perturb_preimage(bq_map: BitQuantumMap, dist: ProbabilityDistribution, rng: np.random.Generator,
                     strength: float = 0.5) -> ProbabilityDistribution:
    """
    Another distribution with the same extracted rho.

    Moves p along a random direction in the null space of the observable table,
    restricted to the support of p, and stays nonnegative.
    """
    p = np.array(dist.p)
    support = np.flatnonzero(p > 1e-15)
    if support.size < 2:
        return dist
    B = np.vstack([bq_map.observables[:, support], np.ones(support.size)])
    r = rng.standard_normal(support.size)
    coeffs, *_ = np.linalg.lstsq(B.T, r, rcond=None)
    delta = r - B.T @ coeffs
    if np.abs(delta).max() <= 1e-14:
        return dist
    negative = delta < 0
    step = np.min(p[support][negative] / -delta[negative]) if negative.any() else 1.0
    p[support] = p[support] + strength * rng.uniform(0.0, 1.0) * step * delta
    return ProbabilityDistribution.from_array(np.clip(p, 0.0, None), renormalize=True)


# Signed permutations of (rho_1, rho_2, rho_3) with determinant +1: the rotation
# group of the cube, induced by local Clifford unitaries.
def _octahedral_rotations() -> List[Tuple[Tuple[int, ...], Tuple[int, ...]]]:
    rotations = []
    for perm in itertools.permutations(range(3)):
        for signs in itertools.product((1, -1), repeat=3):
            R = np.zeros((3, 3))
            for k in range(3):
                R[k, perm[k]] = signs[k]
            if np.linalg.det(R) > 0:
                rotations.append((perm, signs))
    return rotations


_ROTATIONS = _octahedral_rotations()


def _rotation_matrix(rotation) -> np.ndarray:
    perm, signs = rotation
    R = np.eye(4)
    R[1:, 1:] = 0
    for k in range(3):
        R[1 + k, 1 + perm[k]] = signs[k]
    return R


@dataclass
class FamilyMatch:
    """Where a state sits inside the constructible correlation-map family"""

    kind: str
    theta: Optional[float] = None
    rotations: Optional[Tuple] = None
    marginals: Optional[np.ndarray] = None
    components: List[Tuple[float, "FamilyMatch"]] = field(default_factory=list)


def _full_tensor(rho: QuantumDensityMatrix) -> np.ndarray:
    """T[mu, nu] = rho_(mu nu) with T[0, 0] = 1 for two qubits."""
    basis = pauli_basis(2)
    T = np.zeros((4, 4))
    T[0, 0] = 1.0
    for z, value in enumerate(rho.coefficients):
        mu, nu = basis.label(z)
        T[mu, nu] = value
    return T


def _product_marginals(rho: QuantumDensityMatrix, tol: float) -> Optional[np.ndarray]:
    basis = pauli_basis(rho.Q)
    coeffs = rho.coefficients
    marginals = np.zeros((rho.Q, 3))
    for i in range(rho.Q):
        for k in range(1, 4):
            label = [0] * rho.Q
            label[i] = k
            marginals[i, k - 1] = coeffs[basis.index(label)]
    for z, label in enumerate(basis.labels):
        expected = np.prod([marginals[i, mu - 1] for i, mu in enumerate(label) if mu])
        if abs(coeffs[z] - expected) > tol:
            return None
    return marginals


def _family_tensor(theta: float) -> np.ndarray:
    T = np.zeros((4, 4))
    T[0, 0] = 1.0
    T[3, 0] = np.cos(2 * theta)
    T[0, 3] = -np.cos(2 * theta)
    T[3, 3] = -1.0
    T[1, 1] = T[2, 2] = np.sin(2 * theta)
    return T


def _match_theta(T: np.ndarray, tol: float) -> Optional[float]:
    theta = 0.5 * np.arctan2(T[1, 1], T[3, 0])
    if np.abs(T - _family_tensor(theta)).max() <= tol:
        return float(theta % (2 * np.pi))
    return None


def _match_pure(rho: QuantumDensityMatrix, tol: float) -> Optional[FamilyMatch]:
    marginals = _product_marginals(rho, tol)
    if marginals is not None:
        return FamilyMatch("product", marginals=marginals)
    if rho.Q != 2:
        return None
    T = _full_tensor(rho)
    theta = _match_theta(T, tol)
    if theta is not None:
        return FamilyMatch("theta", theta=theta)
    for r1 in _ROTATIONS:
        R1 = _rotation_matrix(r1)
        for r2 in _ROTATIONS:
            R2 = _rotation_matrix(r2)
            theta = _match_theta(R1.T @ T @ R2, tol)
            if theta is not None:
                return FamilyMatch("local-image", theta=theta, rotations=(r1, r2))
    return None


def correlation_supported_family(rho: QuantumDensityMatrix, tol: float = CLOSURE_TOL) -> Optional[FamilyMatch]:
    """
    Classify rho against the states the correlation map can construct.

    Product states (pure or mixed), the psi_theta family, its images under local
    unitaries that permute the Pauli axes, and mixtures of those pure states.

    Returns:
        FamilyMatch, or None when rho is outside the supported family
    """
    marginals = _product_marginals(rho, tol)
    if marginals is not None:
        return FamilyMatch("product", marginals=marginals)
    match = _match_pure(rho, tol) if positivity_report(rho).pure else None
    if match is not None:
        return match
    eigenvalues, vectors = linalg.eigh(rho.matrix)
    components = []
    for weight, vector in zip(eigenvalues, vectors.T):
        if weight <= POSITIVITY_TOL:
            continue
        component = _match_pure(pure_state(vector), tol)
        if component is None:
            logger.debug(f"Eigenvector with weight {weight:.4f} is outside the supported family")
            return None
        components.append((float(weight), component))
    total = sum(w for w, _ in components)
    return FamilyMatch("mixture", components=[(w / total, c) for w, c in components])


def _relabel(p: np.ndarray, M: int, sources: Sequence[int], signs: Sequence[int]) -> np.ndarray:
    """Distribution of the spins s'_j = signs[j] * s_sources[j]."""
    table = spin_table(M)
    new_spins = table[:, list(sources)] * np.asarray(signs)[None, :]
    bits = ((new_spins + 1) // 2).astype(int)
    weights = 1 << (M - 1 - np.arange(M))
    targets = bits @ weights
    out = np.zeros_like(p)
    np.add.at(out, targets, p)
    return out


def _realize(match: FamilyMatch, Q: int) -> np.ndarray:
    if match.kind == "product":
        return bernoulli_distribution(match.marginals.reshape(-1)).p
    if match.kind == "mixture":
        return sum(w * _realize(c, Q) for w, c in match.components)
    from .entangled import entangled_family

    _, dist = entangled_family(match.theta)
    if match.kind == "theta":
        return dist.p
    sources, signs = [], []
    for qubit, (perm, sgn) in enumerate(match.rotations):
        for k in range(3):
            sources.append(qubit * 3 + perm[k])
            signs.append(sgn[k])
    return _relabel(dist.p, 6, sources, signs)


def sample_quantum_distribution(bq_map: BitQuantumMap, rho, seed: Optional[int] = None) -> ProbabilityDistribution:
    """
    A classical distribution whose extraction under the map is rho.

    Args:
        bq_map: Map to realize rho under
        rho: QuantumDensityMatrix or coefficient vector; must be positive
        seed: None for the canonical construction; otherwise the result is moved
              to a random other preimage of rho

    Returns:
        ProbabilityDistribution

    Raises:
        QuantumConditionError: rho is not positive
        ConstructionNotFoundError: no supported construction exists for this map
    """
    if not isinstance(rho, QuantumDensityMatrix):
        rho = rho_from_coefficients(bq_map.Q, rho)
    if rho.Q != bq_map.Q:
        raise DimensionMismatchError(f"map {bq_map.name} is for Q={bq_map.Q}, state has Q={rho.Q}")
    if not positivity_report(rho).positive:
        raise QuantumConditionError("target density matrix is not positive")
    coeffs = rho.coefficients

    if bq_map.variant == MapVariant.CORRELATION:
        if bq_map.product_signs is not None and np.any(bq_map.product_signs != 1):
            raise ConstructionNotFoundError(f"map {bq_map.name} is not a bit-quantum map")
        match = correlation_supported_family(rho)
        if match is None:
            raise ConstructionNotFoundError(
                "state is outside the constructible correlation-map family "
                "(product states, psi_theta family, axis-permuting local images, mixtures)"
            )
        logger.debug(f"Correlation-map construction via {match.kind}")
        p = _realize(match, rho.Q)
    elif bq_map.variant == MapVariant.DIRECT:
        means = bq_map.directions @ coeffs
        if np.abs(bq_map.extraction @ means - coeffs).max() > CLOSURE_TOL:
            raise ConstructionNotFoundError(f"map {bq_map.name} cannot represent this state")
        p = bernoulli_distribution(means).p
    else:
        p = sample_quantum_distribution(bq_map.base, rho).p

    dist = ProbabilityDistribution.from_array(p, renormalize=True)
    if seed is not None:
        dist = perturb_preimage(bq_map, dist, np.random.default_rng(seed))
    residual = float(np.abs(extract_coefficients(bq_map, dist) - coeffs).max())
    if residual > CLOSURE_TOL:
        raise ConstructionNotFoundError(f"construction residual {residual:.3e} exceeds {CLOSURE_TOL}")
    return dist

