"""
Qubit-side algebra: Pauli tensor basis, density matrices, gates and unitary evolution
"""

import itertools
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache, reduce
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .base import DimensionMismatchError, GateUnavailableError

logger = logging.getLogger(__name__)

PAULI = (
    np.eye(2, dtype=complex),
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
)

_S2 = 1 / np.sqrt(2)

SINGLE_QUBIT_GATES: Dict[str, np.ndarray] = {
    "H": np.array([[1, 1], [1, -1]], dtype=complex) * _S2,
    "U12": np.diag([1, -1j]).astype(complex),
    "U31": np.array([[1, 1], [-1, 1]], dtype=complex) * _S2,
    "UZ": np.diag([1, -1]).astype(complex),
    "UY": np.array([[0, 1], [-1, 0]], dtype=complex),
    "UX": np.array([[0, 1], [1, 0]], dtype=complex),
    "T": np.diag([1, np.exp(1j * np.pi / 4)]),
    # pi/4 rotation of (rho_1, rho_3); its square is U31
    "PI4_31": np.array(
        [[np.cos(np.pi / 8), np.sin(np.pi / 8)], [-np.sin(np.pi / 8), np.cos(np.pi / 8)]], dtype=complex
    ),
    # 2pi/5 rotation about the icosahedral vertex axis (phi, 0, 1)
    "ROT5": linalg.expm(
        -1j * np.pi / 5 * (((1 + np.sqrt(5)) / 2) * PAULI[1] + PAULI[3]) / np.sqrt((5 + np.sqrt(5)) / 2)
    ),
}

TWO_QUBIT_GATES = ("CNOT", "SWAP")
GLOBAL_GATES = ("CONJ",)
GATE_NAMES = tuple(SINGLE_QUBIT_GATES) + TWO_QUBIT_GATES + GLOBAL_GATES


def gate_arity(name: str) -> int:
    if name in SINGLE_QUBIT_GATES:
        return 1
    if name in TWO_QUBIT_GATES:
        return 2
    if name in GLOBAL_GATES:
        return 0
    raise GateUnavailableError(f"unknown gate '{name}'")


@dataclass(frozen=True)
class PauliTensorBasis:
    """
    Generators L_z = tau_mu1 x ... x tau_muQ, all-zero label excluded,
    ordered lexicographically in (mu_1, ..., mu_Q)
    """

    Q: int

    def __post_init__(self):
        if not 1 <= self.Q <= 4:
            raise DimensionMismatchError(f"Pauli basis supports 1 <= Q <= 4, got {self.Q}")

    @property
    def dim(self) -> int:
        return 1 << self.Q

    @property
    def size(self) -> int:
        return 4 ** self.Q - 1

    @property
    def labels(self) -> Tuple[Tuple[int, ...], ...]:
        return _labels(self.Q)

    @property
    def matrices(self) -> np.ndarray:
        return _generators(self.Q)

    def index(self, label: Union[str, Sequence[int]]) -> int:
        """0-based position of a label such as (3, 0) or '30'."""
        if isinstance(label, str):
            label = tuple(int(c) for c in label)
        label = tuple(label)
        try:
            return self.labels.index(label)
        except ValueError:
            raise DimensionMismatchError(f"label {label} is not a Q={self.Q} generator")

    def label(self, z: int) -> Tuple[int, ...]:
        return self.labels[z]

    def label_string(self, z: int) -> str:
        return "".join(str(mu) for mu in self.labels[z])


@lru_cache(maxsize=None)
def _labels(Q: int) -> Tuple[Tuple[int, ...], ...]:
    return tuple(itertools.product(range(4), repeat=Q))[1:]


@lru_cache(maxsize=None)
def _generators(Q: int) -> np.ndarray:
    mats = np.array([reduce(np.kron, [PAULI[mu] for mu in label]) for label in _labels(Q)])
    mats.setflags(write=False)
    return mats


def pauli_basis(Q: int) -> PauliTensorBasis:
    return PauliTensorBasis(Q)


def _qubits_for(dim: int) -> int:
    Q = int(dim).bit_length() - 1
    if dim < 2 or 1 << Q != dim:
        raise DimensionMismatchError(f"matrix dimension {dim} is not 2**Q")
    return Q


@dataclass(frozen=True, eq=False)
class QuantumDensityMatrix:
    """Hermitian trace-one 2**Q x 2**Q matrix; positivity is checked by qcond"""

    Q: int
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        d = 1 << self.Q
        if m.shape != (d, d):
            raise DimensionMismatchError(f"expected {d}x{d} density matrix for Q={self.Q}, got {m.shape}")
        if np.abs(m - m.conj().T).max() > 1e-12:
            raise DimensionMismatchError("density matrix is not Hermitian")
        if abs(np.trace(m) - 1) > 1e-12:
            raise DimensionMismatchError(f"density matrix has trace {np.trace(m).real!r}")
        m = (m + m.conj().T) / 2
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def coefficients(self) -> np.ndarray:
        """rho_z = tr(L_z rho) in flat Pauli order."""
        return np.einsum("zab,ba->z", _generators(self.Q), self.matrix).real

    def to_json(self) -> Dict[str, Any]:
        return {
            "Q": self.Q,
            "re": self.matrix.real.tolist(),
            "im": self.matrix.imag.tolist(),
        }

    @classmethod
    def from_json(cls, data: Union[str, Dict[str, Any]]) -> "QuantumDensityMatrix":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(int(data["Q"]), np.asarray(data["re"], dtype=float) + 1j * np.asarray(data["im"], dtype=float))


def rho_from_coefficients(Q: int, rho_z) -> QuantumDensityMatrix:
    """
    Density matrix rho = 2**-Q (1 + rho_z L_z).

    Args:
        Q: Number of qubits
        rho_z: 4**Q - 1 real coefficients in flat Pauli order

    Returns:
        QuantumDensityMatrix
    """
    rho_z = np.asarray(rho_z, dtype=float)
    if rho_z.shape != (4 ** Q - 1,):
        raise DimensionMismatchError(f"expected {4 ** Q - 1} coefficients for Q={Q}, got {rho_z.shape}")
    d = 1 << Q
    m = (np.eye(d) + np.einsum("z,zab->ab", rho_z, _generators(Q))) / d
    return QuantumDensityMatrix(Q, m)


def coefficients_from_rho(rho: QuantumDensityMatrix) -> np.ndarray:
    return rho.coefficients


def pure_state(psi) -> QuantumDensityMatrix:
    psi = np.asarray(psi, dtype=complex)
    psi = psi / np.linalg.norm(psi)
    return QuantumDensityMatrix(_qubits_for(psi.size), np.outer(psi, psi.conj()))


def _embed_permutation(Q: int, mapping) -> np.ndarray:
    d = 1 << Q
    U = np.zeros((d, d), dtype=complex)
    for col in range(d):
        bits = [(col >> (Q - 1 - i)) & 1 for i in range(Q)]
        new_bits = mapping(bits)
        row = 0
        for b in new_bits:
            row = (row << 1) | b
        U[row, col] = 1
    return U


def _check_targets(Q: int, targets: Sequence[int]):
    for t in targets:
        if not 1 <= t <= Q:
            raise DimensionMismatchError(f"qubit target {t} out of range 1..{Q}")
    if len(set(targets)) != len(targets):
        raise DimensionMismatchError(f"qubit targets {tuple(targets)} must be distinct")


def gate_matrix(name: str, targets: Sequence[int], Q: int) -> Optional[np.ndarray]:
    """Full 2**Q unitary of a gate acting on 1-based qubit targets (None for CONJ)."""
    targets = tuple(int(t) for t in targets)
    arity = gate_arity(name)
    if len(targets) != arity:
        raise DimensionMismatchError(f"{name} takes {arity} qubit target(s), got {len(targets)}")
    _check_targets(Q, targets)
    if name in GLOBAL_GATES:
        return None
    if name in SINGLE_QUBIT_GATES:
        factors = [np.eye(2, dtype=complex)] * Q
        factors[targets[0] - 1] = SINGLE_QUBIT_GATES[name]
        return reduce(np.kron, factors)
    a, b = targets[0] - 1, targets[1] - 1
    if name == "CNOT":
        def mapping(bits):
            out = list(bits)
            if bits[a]:
                out[b] ^= 1
            return out
    else:
        def mapping(bits):
            out = list(bits)
            out[a], out[b] = bits[b], bits[a]
            return out
    return _embed_permutation(Q, mapping)


@dataclass(frozen=True, eq=False)
class GateSpec:
    """A named gate with its targets and full unitary (antiunitary CONJ has none)"""

    name: str
    targets: Tuple[int, ...]
    Q: int
    matrix: Optional[np.ndarray] = field(default=None, repr=False)
    antiunitary: bool = False

    @classmethod
    def build(cls, name: str, *targets: int, Q: int = 1) -> "GateSpec":
        if not targets and Q == 1 and gate_arity(name) == 1:
            targets = (1,)
        matrix = gate_matrix(name, targets, Q)
        return cls(name, tuple(targets), Q, matrix, matrix is None)


def gate(name: str, *targets: int, Q: int = 1) -> GateSpec:
    return GateSpec.build(name, *targets, Q=Q)


def apply_unitary(rho: QuantumDensityMatrix, g: GateSpec) -> QuantumDensityMatrix:
    """rho -> U rho U^dagger, or rho -> rho* for CONJ."""
    if g.Q != rho.Q:
        raise DimensionMismatchError(f"gate acts on Q={g.Q}, density matrix has Q={rho.Q}")
    if g.antiunitary:
        return QuantumDensityMatrix(rho.Q, rho.matrix.conj())
    U = g.matrix
    return QuantumDensityMatrix(rho.Q, U @ rho.matrix @ U.conj().T)


def projective_residual(U: np.ndarray) -> float:
    """min over theta of ||U - e^{i theta} 1||_F."""
    phase = np.trace(U)
    phase = phase / abs(phase) if abs(phase) > 1e-15 else 1.0
    return float(np.linalg.norm(U - phase * np.eye(U.shape[0])))


def gate_period(U, max_n: int = 64, tol: float = 1e-10) -> Optional[int]:
    """
    Smallest n with U**n proportional to the identity.

    Args:
        U: Unitary matrix or GateSpec
        max_n: Largest power tried

    Returns:
        The projective period, or None if none exists up to max_n
    """
    if isinstance(U, GateSpec):
        U = U.matrix
    if max_n < 1:
        raise ValueError("max_n must be at least 1")
    power = np.eye(U.shape[0], dtype=complex)
    for n in range(1, max_n + 1):
        power = power @ U
        if projective_residual(power) <= tol:
            return n
    return None


def coefficient_map(g: GateSpec) -> np.ndarray:
    """
    Adjoint action on the coefficients: rho'_z = b_zy rho_y.

    b_zy = tr(L_z U L_y U^dagger) / 2**Q; CONJ gives the sign (-1)**(number of tau_2 factors).
    """
    basis = pauli_basis(g.Q)
    if g.antiunitary:
        return np.diag([(-1.0) ** label.count(2) for label in basis.labels])
    return unitary_coefficient_map(g.matrix)


def unitary_coefficient_map(U: np.ndarray) -> np.ndarray:
    Q = _qubits_for(U.shape[0])
    L = _generators(Q)
    conj = np.einsum("ab,ybc,dc->yad", U, L, U.conj())
    return np.einsum("zab,yba->zy", L, conj).real / (1 << Q)


@dataclass(frozen=True, eq=False)
class StructureCoefficients:
    """[L_z, L_y] = 2i f_zyw L_w and {L_z, L_y} = 2 delta_zy + 2 d_zyw L_w"""

    Q: int
    f: np.ndarray = field(repr=False)
    d: np.ndarray = field(repr=False)


@lru_cache(maxsize=None)
def structure_coefficients(Q: int) -> StructureCoefficients:
    if not 1 <= Q <= 3:
        raise DimensionMismatchError(f"structure coefficients supported for Q <= 3, got {Q}")
    L = _generators(Q)
    products = np.einsum("zab,ybc->zyac", L, L)
    traces = np.einsum("zyab,wba->zyw", products, L) / (1 << Q)
    # tr(L_z L_y L_w) = 2**Q (d_zyw + i f_zyw)
    f = traces.imag
    d = traces.real
    f.setflags(write=False)
    d.setflags(write=False)
    logger.debug(f"Structure coefficients for Q={Q}: {np.count_nonzero(np.abs(f) > 1e-12)} nonzero f")
    return StructureCoefficients(Q, f, d)


def infinitesimal_step(rho: QuantumDensityMatrix, eps_tilde) -> QuantumDensityMatrix:
    """First-order unitary change delta rho_z = -2 eps_y f_yxz rho_x."""
    eps_tilde = np.asarray(eps_tilde, dtype=float)
    coeffs = rho.coefficients
    f = structure_coefficients(rho.Q).f
    delta = -2 * np.einsum("y,yxz,x->z", eps_tilde, f, coeffs)
    return rho_from_coefficients(rho.Q, coeffs + delta)


def hamiltonian_from_generators(eps_tilde, eps: float) -> np.ndarray:
    """H = -eps_tilde_z L_z / eps."""
    eps_tilde = np.asarray(eps_tilde, dtype=float)
    Q = (int(eps_tilde.size + 1).bit_length() - 1) // 2
    return -np.einsum("z,zab->ab", eps_tilde, _generators(Q)) / eps


def von_neumann_step(rho: QuantumDensityMatrix, H, eps: float, exact: bool = False) -> QuantumDensityMatrix:
    """
    Advance rho by a time step eps under the Hamiltonian H.

    Args:
        rho: Density matrix
        H: Hermitian matrix
        eps: Step size
        exact: Use exp(-i eps H) instead of the first-order update

    Returns:
        QuantumDensityMatrix
    """
    H = np.asarray(H, dtype=complex)
    if exact:
        U = linalg.expm(-1j * eps * H)
        return QuantumDensityMatrix(rho.Q, U @ rho.matrix @ U.conj().T)
    commutator = H @ rho.matrix - rho.matrix @ H
    return QuantumDensityMatrix(rho.Q, rho.matrix - 1j * eps * commutator)


def measurement_correlation(rho: QuantumDensityMatrix, U) -> float:
    """
    Measurement correlation <s_2(t+eps) s_1(t)>_m = 1/2 tr({U^dagger tau_2 U, tau_1} rho) for one qubit.
    """
    if rho.Q != 1:
        raise DimensionMismatchError("measurement correlation is defined for a single qubit")
    U = np.asarray(U.matrix if isinstance(U, GateSpec) else U, dtype=complex)
    s2 = U.conj().T @ PAULI[2] @ U
    anti = s2 @ PAULI[1] + PAULI[1] @ s2
    return float(0.5 * np.trace(anti @ rho.matrix).real)


def conditional_state(rho: QuantumDensityMatrix, sign: int) -> QuantumDensityMatrix:
    """State after finding s_1 = sign for a single qubit."""
    if rho.Q != 1:
        raise DimensionMismatchError("conditional state is defined for a single qubit")
    P = (np.eye(2) + sign * PAULI[1]) / 2
    m = P @ rho.matrix @ P
    weight = np.trace(m).real
    if weight <= 1e-15:
        raise DimensionMismatchError(f"outcome s_1={sign} has zero probability")
    return QuantumDensityMatrix(1, m / weight)


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Gaussian matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))
