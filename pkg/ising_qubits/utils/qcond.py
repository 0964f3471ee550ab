"""
Quantum conditions: positivity, purity, pair bounds, CHSH values, two-level observables
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .base import POSITIVITY_TOL, DimensionMismatchError, QuantumConditionError
from .quantum_core import (
    QuantumDensityMatrix,
    pauli_basis,
    random_unitary,
    rho_from_coefficients,
    structure_coefficients,
)
from .spin_core import ProbabilityDistribution, expectation

logger = logging.getLogger(__name__)

# A signed qubit axis (sign, k): sign * S_k with k in {1, 2, 3}
Axis = Tuple[int, int]
SIGNED_AXES: Tuple[Axis, ...] = tuple((s, k) for k in (1, 2, 3) for s in (1, -1))


@dataclass
class PositivityReport:
    """Spectrum-based verdict on a density matrix"""

    eigenvalues: List[float]
    positive: bool
    pure: bool
    purity: float
    coefficient_norm: float
    violations: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "positive": self.positive,
            "pure": self.pure,
            "eigenvalues": [float(x) for x in self.eigenvalues],
            "violations": list(self.violations),
        }


def positivity_report(rho: QuantumDensityMatrix, tol: float = POSITIVITY_TOL) -> PositivityReport:
    """
    Check positivity and purity of a density matrix.

    Args:
        rho: Density matrix
        tol: Tolerance for the smallest eigenvalue and for ||rho^2 - rho||

    Returns:
        PositivityReport
    """
    m = rho.matrix
    eigenvalues = np.linalg.eigvalsh(m)
    positive = bool(eigenvalues.min() >= -tol)
    pure = bool(np.linalg.norm(m @ m - m) <= tol)
    coeffs = rho.coefficients
    norm2 = float(coeffs @ coeffs)
    violations = []
    if not positive:
        violations.append(f"negative eigenvalue {eigenvalues.min():.6g}")
    if rho.Q == 1 and positive != (norm2 <= 1 + tol):
        violations.append(f"single-qubit cross-check failed: rho_z rho_z = {norm2:.6g}")
    if rho.Q == 2 and pure:
        d = structure_coefficients(2).d
        if abs(norm2 - 3) > 1e-8:
            violations.append(f"pure-state cross-check failed: rho_z rho_z = {norm2:.6g}, expected 3")
        residual = np.abs(np.einsum("zyw,z,y->w", d, coeffs, coeffs) - 2 * coeffs).max()
        if residual > 1e-8:
            violations.append(f"pure-state cross-check failed: d rho rho - 2 rho = {residual:.3g}")
    return PositivityReport(
        eigenvalues=sorted(float(x) for x in eigenvalues),
        positive=positive,
        pure=pure,
        purity=float(np.trace(m @ m).real),
        coefficient_norm=norm2,
        violations=violations,
    )


@dataclass
class PairReport:
    """Pair bounds for the nine (k, l) spin pairs of two qubits"""

    satisfied: bool
    violations: List[Tuple[int, int]]
    probabilities: Dict[Tuple[int, int], np.ndarray]


def pair_probabilities(a: float, b: float, c: float) -> np.ndarray:
    """p[i, j] for (eps_k, eps_l) = (+, -)[i], (+, -)[j] reproducing <s_k>=a, <s_l>=b, <s_k s_l>=c."""
    signs = np.array([1.0, -1.0])
    return (1 + signs[:, None] * a + signs[None, :] * b + np.outer(signs, signs) * c) / 4


def pair_constraints(rho: QuantumDensityMatrix, require_positive: bool = True) -> PairReport:
    """
    Check -1 + |rho_k0 + rho_0l| <= rho_kl <= 1 - |rho_k0 - rho_0l| for all nine pairs.

    Args:
        rho: Two-qubit density matrix
        require_positive: Reject non-positive input

    Returns:
        PairReport with the pair distributions p_{+-+-}
    """
    if rho.Q != 2:
        raise DimensionMismatchError("pair constraints are defined for two qubits")
    if require_positive and not positivity_report(rho).positive:
        raise QuantumConditionError("pair constraints need a positive density matrix")
    basis = pauli_basis(2)
    coeffs = rho.coefficients
    probabilities = {}
    violations = []
    for k, l in itertools.product((1, 2, 3), repeat=2):
        p = pair_probabilities(
            coeffs[basis.index((k, 0))], coeffs[basis.index((0, l))], coeffs[basis.index((k, l))]
        )
        probabilities[(k, l)] = p
        if p.min() < -POSITIVITY_TOL:
            violations.append((k, l))
    return PairReport(satisfied=not violations, violations=violations, probabilities=probabilities)


def _axis_vector(axis) -> np.ndarray:
    if isinstance(axis, tuple) and len(axis) == 2:
        sign, k = axis
        if k not in (1, 2, 3) or sign not in (1, -1):
            raise DimensionMismatchError(f"axis must be (+-1, k) with k in 1..3, got {axis}")
        v = np.zeros(3)
        v[k - 1] = sign
        return v
    v = np.asarray(axis, dtype=float)
    if v.shape != (3,) or abs(np.linalg.norm(v) - 1) > 1e-12:
        raise DimensionMismatchError(f"axis must be a unit 3-vector, got {axis}")
    return v


def correlation_tensor(rho: QuantumDensityMatrix) -> np.ndarray:
    """The 3x3 matrix rho_kl of two-qubit spin correlations."""
    if rho.Q != 2:
        raise DimensionMismatchError("correlation tensor is defined for two qubits")
    basis = pauli_basis(2)
    coeffs = rho.coefficients
    return np.array([[coeffs[basis.index((k, l))] for l in (1, 2, 3)] for k in (1, 2, 3)])


def chsh_value(rho: QuantumDensityMatrix, A, A_prime, B, B_prime) -> float:
    """
    <C> = <AB> + <AB'> + <A'B> - <A'B'>.

    Args:
        rho: Two-qubit density matrix
        A, A_prime: Axes on qubit 1, either (sign, k) or a unit 3-vector
        B, B_prime: Axes on qubit 2

    Returns:
        The CHSH combination
    """
    corr = correlation_tensor(rho)
    a, a2, b, b2 = (_axis_vector(x) for x in (A, A_prime, B, B_prime))
    return float(a @ corr @ b + a @ corr @ b2 + a2 @ corr @ b - a2 @ corr @ b2)


def chsh_sweep(rho: QuantumDensityMatrix) -> Tuple[float, Tuple[Axis, Axis, Axis, Axis]]:
    """Largest |<C>| over all signed axis-aligned choices."""
    corr = correlation_tensor(rho)
    # A -> -A equals (B, B') -> (-B', -B); A' -> -A' equals B <-> B'
    best, best_choice = -1.0, None
    for ka, ka2, kb, kb2 in itertools.product((1, 2, 3), repeat=4):
        for sb, sb2 in itertools.product((1, -1), repeat=2):
            value = (
                sb * corr[ka - 1, kb - 1] + sb2 * corr[ka - 1, kb2 - 1]
                + sb * corr[ka2 - 1, kb - 1] - sb2 * corr[ka2 - 1, kb2 - 1]
            )
            if abs(value) > best:
                best, best_choice = abs(value), ((1, ka), (1, ka2), (sb, kb), (sb2, kb2))
    return float(best), best_choice


def chsh_tilted(rho: QuantumDensityMatrix) -> float:
    """CHSH value with A = S_3, A' = S_2 and B, B' at pi/4 to the 3-axis in the 2-3 plane."""
    e2, e3 = np.array([0.0, 1.0, 0.0]), np.array([0.0, 0.0, 1.0])
    B = -(e3 + e2) / np.sqrt(2)
    B_prime = -(e3 - e2) / np.sqrt(2)
    return chsh_value(rho, e3, e2, B, B_prime)


def two_level_check(Q: int, e, tol: float = 1e-10) -> bool:
    """
    Whether A(e) = e_z L_z squares to one: e_z e_z = 1 and d_zyw e_z e_y = 0.
    """
    e = np.asarray(e, dtype=float)
    if e.shape != (4 ** Q - 1,):
        raise DimensionMismatchError(f"expected {4 ** Q - 1} components for Q={Q}, got {e.shape}")
    d = structure_coefficients(Q).d
    algebraic = bool(abs(e @ e - 1) <= tol and np.abs(np.einsum("zyw,z,y->w", d, e, e)).max() <= tol)
    A = np.einsum("z,zab->ab", e, pauli_basis(Q).matrices)
    by_matrix = bool(np.abs(A @ A - np.eye(1 << Q)).max() <= 10 * tol)
    if algebraic != by_matrix:
        logger.warning(f"two-level check disagrees with matrix square for e={e}")
    return algebraic


def m33_operator() -> np.ndarray:
    basis = pauli_basis(2)
    L = basis.matrices
    return (L[basis.index("30")] + L[basis.index("03")] - L[basis.index("33")]).real


def m33_bound(rho: QuantumDensityMatrix) -> float:
    """<M33> = <L30 + L03 - L33> = 1 - 4 rho_44; lies in [-3, 1] for positive rho."""
    if rho.Q != 2:
        raise DimensionMismatchError("M33 is defined for two qubits")
    return float(np.trace(m33_operator() @ rho.matrix).real)


def direction_bound_sweep(rho: QuantumDensityMatrix, samples: int = 0, seed: Optional[int] = None) -> Dict[str, Any]:
    """
    Largest |<A(e)>| = |e_z rho_z| over unit vectors e.

    The closed form is ||rho_z||; with samples > 0 random unit vectors are tried as well.
    """
    coeffs = rho.coefficients
    maximum = float(np.linalg.norm(coeffs))
    result = {"maximum": maximum, "within_bound": maximum <= 1 + POSITIVITY_TOL}
    if samples > 0:
        rng = np.random.default_rng(seed)
        e = rng.standard_normal((samples, coeffs.size))
        e /= np.linalg.norm(e, axis=1, keepdims=True)
        result["sampled_maximum"] = float(np.abs(e @ coeffs).max())
    return result


def basis_state(k: int, l: int, ek: int, el: int) -> QuantumDensityMatrix:
    """Pure state 1/4 (1 + e_k L_k0 + e_l L_0l + e_k e_l L_kl)."""
    basis = pauli_basis(2)
    coeffs = np.zeros(basis.size)
    coeffs[basis.index((k, 0))] = ek
    coeffs[basis.index((0, l))] = el
    coeffs[basis.index((k, l))] = ek * el
    return rho_from_coefficients(2, coeffs)


def basis_decomposition(rho: QuantumDensityMatrix) -> np.ndarray:
    """
    Coefficients alpha[k-1, l-1, i, j] of rho over the 36 basis states, (+, -)[i], (+, -)[j].

    rho_0 is split equally over the nine pairs and rho_k0, rho_0l equally over the
    three pairs sharing them; inside a pair the four combinations are solved exactly.
    """
    if rho.Q != 2:
        raise DimensionMismatchError("basis decomposition is defined for two qubits")
    basis = pauli_basis(2)
    coeffs = rho.coefficients
    rho_0 = float(np.trace(rho.matrix).real)
    signs = np.array([1.0, -1.0])
    alpha = np.zeros((3, 3, 2, 2))
    for k, l in itertools.product((1, 2, 3), repeat=2):
        ck = coeffs[basis.index((k, 0))] / 3
        cl = coeffs[basis.index((0, l))] / 3
        ckl = coeffs[basis.index((k, l))]
        alpha[k - 1, l - 1] = (
            rho_0 / 9 + signs[:, None] * ck + signs[None, :] * cl + np.outer(signs, signs) * ckl
        ) / 4
    return alpha


def reassemble(alpha: np.ndarray) -> QuantumDensityMatrix:
    m = np.zeros((4, 4), dtype=complex)
    signs = (1, -1)
    for k, l in itertools.product((1, 2, 3), repeat=2):
        for i, j in itertools.product(range(2), repeat=2):
            m += alpha[k - 1, l - 1, i, j] * basis_state(k, l, signs[i], signs[j]).matrix
    return QuantumDensityMatrix(2, m)


def random_pure_rho(Q: int, rng: np.random.Generator) -> QuantumDensityMatrix:
    psi = random_unitary(1 << Q, rng)[:, 0]
    return QuantumDensityMatrix(Q, np.outer(psi, psi.conj()))


def random_positive_rho(Q: int, rng: np.random.Generator, rank: Optional[int] = None) -> QuantumDensityMatrix:
    """Mixture of `rank` random pure states with Dirichlet weights."""
    rank = rank or int(rng.integers(1, (1 << Q) + 1))
    weights = rng.dirichlet(np.ones(rank))
    m = sum(w * random_pure_rho(Q, rng).matrix for w in weights)
    return QuantumDensityMatrix(Q, m / np.trace(m).real)


def classical_implication_holds(dist: ProbabilityDistribution, a: int, b: int, a2: int, b2: int,
                                tol: float = 1e-12) -> bool:
    """<ab> = <ab'> = <a'b> = 1 forces <a'b'> = 1 for classical spins."""
    premise = all(abs(expectation(dist, pair) - 1) <= tol for pair in ((a, b), (a, b2), (a2, b)))
    return (not premise) or abs(expectation(dist, (a2, b2)) - 1) <= 1e-9
