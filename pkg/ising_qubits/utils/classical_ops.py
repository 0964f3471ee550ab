"""
Classical realizations of gates: unique jumps, Markov and signed maps, induced coefficient maps
"""

import logging
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .base import (
    CLOSURE_TOL,
    DEFAULT_SEED,
    PROB_TOL,
    DimensionMismatchError,
    GateUnavailableError,
    InvalidDistributionError,
    NonBijectiveRuleError,
    check_spin_count,
)
from .bitq_maps import (
    BitQuantumMap,
    MapVariant,
    correlation_spin,
    direct_map,
    extract_coefficients,
    sample_quantum_distribution,
)
from .qcond import random_positive_rho
from .quantum_core import (
    SINGLE_QUBIT_GATES,
    GateSpec,
    coefficient_map,
    gate,
    gate_period,
    pauli_basis,
    rho_from_coefficients,
    unitary_coefficient_map,
)
from .spin_core import ProbabilityDistribution, spin_table

logger = logging.getLogger(__name__)

MATCH_TOL = 1e-9


@dataclass(frozen=True)
class SpinAction:
    """
    New value of one spin: sign * s_source, 1-based source.

    With a condition (spin, value) the action applies only where s_spin == value;
    elsewhere the spin keeps its value.
    """

    source: int
    sign: int = 1
    condition: Optional[Tuple[int, int]] = None


@dataclass(frozen=True)
class SpinTransformRule:
    """One SpinAction per target spin, in spin order"""

    actions: Tuple[SpinAction, ...]

    @property
    def M(self) -> int:
        return len(self.actions)

    @classmethod
    def identity(cls, M: int) -> "SpinTransformRule":
        return cls(tuple(SpinAction(j) for j in range(1, M + 1)))

    @classmethod
    def from_mapping(cls, M: int, mapping: Dict[int, Tuple[int, int]]) -> "SpinTransformRule":
        """Rule s'_target = sign * s_source for the given targets, identity elsewhere."""
        actions = [SpinAction(j) for j in range(1, M + 1)]
        for target, (source, sign) in mapping.items():
            actions[target - 1] = SpinAction(source, sign)
        return cls(tuple(actions))

    def describe(self) -> List[str]:
        lines = []
        for j, action in enumerate(self.actions, start=1):
            if action.source == j and action.sign == 1 and action.condition is None:
                continue
            text = f"s{j}' = {'-' if action.sign < 0 else ''}s{action.source}"
            if action.condition is not None:
                text += f" if s{action.condition[0]} = {action.condition[1]:+d}"
            lines.append(text)
        return lines


@dataclass(frozen=True, eq=False)
class UniqueJumpOp:
    """Deterministic bijection of configurations: state tau jumps to perm[tau]"""

    perm: np.ndarray = field(repr=False)
    name: str = ""

    def __post_init__(self):
        perm = np.array(self.perm, dtype=np.int64)
        n = perm.size
        if n < 2 or n & (n - 1):
            raise DimensionMismatchError(f"permutation length {n} is not 2**M")
        if not np.array_equal(np.sort(perm), np.arange(n)):
            raise NonBijectiveRuleError("index array is not a permutation")
        perm.setflags(write=False)
        object.__setattr__(self, "perm", perm)

    @property
    def M(self) -> int:
        return int(self.perm.size).bit_length() - 1

    @property
    def matrix(self) -> np.ndarray:
        S = np.zeros((self.perm.size, self.perm.size))
        S[self.perm, np.arange(self.perm.size)] = 1.0
        return S

    def apply_vector(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        out = np.empty_like(p)
        out[self.perm] = p
        return out

    def apply(self, dist: ProbabilityDistribution) -> ProbabilityDistribution:
        if dist.M != self.M:
            raise DimensionMismatchError(f"operation acts on M={self.M}, distribution has M={dist.M}")
        return ProbabilityDistribution(dist.M, self.apply_vector(dist.p))

    def compose(self, other: "UniqueJumpOp") -> "UniqueJumpOp":
        """self after other."""
        if other.M != self.M:
            raise DimensionMismatchError("cannot compose operations on different spin counts")
        return UniqueJumpOp(self.perm[other.perm], f"{self.name}*{other.name}".strip("*"))

    def inverse(self) -> "UniqueJumpOp":
        inv = np.empty_like(self.perm)
        inv[self.perm] = np.arange(self.perm.size)
        return UniqueJumpOp(inv, f"{self.name}^-1" if self.name else "")

    def order(self) -> int:
        """Least common multiple of the cycle lengths."""
        seen = np.zeros(self.perm.size, dtype=bool)
        result = 1
        for start in range(self.perm.size):
            if seen[start]:
                continue
            length, tau = 0, start
            while not seen[tau]:
                seen[tau] = True
                tau = int(self.perm[tau])
                length += 1
            result = result * length // math.gcd(result, length)
        return result

    def to_json(self) -> Dict[str, Any]:
        return {"kind": "unique-jump", "name": self.name, "perm": [int(t) for t in self.perm]}

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "UniqueJumpOp":
        return cls(np.asarray(data["perm"], dtype=np.int64), data.get("name", ""))


@dataclass(frozen=True, eq=False)
class MarkovOp:
    """Linear map of probabilities p' = W p with unit column sums"""

    W: np.ndarray = field(repr=False)
    signed: bool = False
    name: str = ""

    def __post_init__(self):
        W = np.array(self.W, dtype=float)
        if W.ndim != 2 or W.shape[0] != W.shape[1]:
            raise DimensionMismatchError(f"Markov matrix must be square, got shape {W.shape}")
        if np.abs(W.sum(axis=0) - 1).max() > 1e-10:
            raise InvalidDistributionError("Markov matrix columns must sum to one")
        if not self.signed and W.min() < -PROB_TOL:
            raise InvalidDistributionError(f"Markov matrix has negative entry {W.min():.3e}; pass signed=True")
        W.setflags(write=False)
        object.__setattr__(self, "W", W)

    @property
    def M(self) -> int:
        return int(self.W.shape[0]).bit_length() - 1

    @property
    def matrix(self) -> np.ndarray:
        return self.W

    def apply_vector(self, p) -> np.ndarray:
        return self.W @ np.asarray(p, dtype=float)

    def apply(self, dist: ProbabilityDistribution) -> ProbabilityDistribution:
        return apply_markov(self, dist)

    def to_json(self) -> Dict[str, Any]:
        return {"kind": "markov", "name": self.name, "signed": self.signed, "W": self.W.tolist()}


ClassicalOp = Union[UniqueJumpOp, MarkovOp]


def rule_to_permutation(rule: SpinTransformRule, M: Optional[int] = None, name: str = "") -> UniqueJumpOp:
    """
    Configuration permutation induced by a spin rule.

    Args:
        rule: Per-spin actions
        M: Expected spin count (defaults to the rule's)
        name: Label carried by the operation

    Returns:
        UniqueJumpOp

    Raises:
        NonBijectiveRuleError: two configurations map to the same one
    """
    M = rule.M if M is None else M
    if rule.M != M:
        raise DimensionMismatchError(f"rule has {rule.M} actions for M={M}")
    check_spin_count(M)
    table = spin_table(M)
    new = np.empty_like(table)
    for j, action in enumerate(rule.actions):
        for spin in (action.source,) + ((action.condition[0],) if action.condition else ()):
            if not 1 <= spin <= M:
                raise DimensionMismatchError(f"spin {spin} out of range 1..{M}")
        value = action.sign * table[:, action.source - 1]
        if action.condition is not None:
            spin, wanted = action.condition
            value = np.where(table[:, spin - 1] == wanted, value, table[:, j])
        new[:, j] = value
    bits = ((new + 1) // 2).astype(np.int64)
    perm = bits @ (1 << (M - 1 - np.arange(M)))
    if np.unique(perm).size != perm.size:
        raise NonBijectiveRuleError(f"rule maps {perm.size - np.unique(perm).size} configurations onto others")
    logger.debug(f"Built permutation of {perm.size} states from {len(rule.describe())} spin actions")
    return UniqueJumpOp(perm, name)


def apply_markov(op: ClassicalOp, dist: ProbabilityDistribution) -> ProbabilityDistribution:
    """
    p' = W p.

    Raises:
        InvalidDistributionError: a signed map produced a negative probability, so the
            input lies outside the domain on which the map realizes a quantum gate
    """
    if isinstance(op, UniqueJumpOp):
        return op.apply(dist)
    if op.W.shape[0] != dist.p.size:
        raise DimensionMismatchError(f"Markov matrix of size {op.W.shape[0]} for {dist.p.size} probabilities")
    p = op.W @ dist.p
    if p.min() < -PROB_TOL:
        raise InvalidDistributionError(
            f"signed map produced negative probability {p.min():.3e}; input outside the quantum-constrained domain"
        )
    return ProbabilityDistribution.from_array(np.clip(p, 0.0, None), renormalize=True)


def _signed_t_update(p: np.ndarray) -> np.ndarray:
    # pairs (1,2), (3,4), (5,6), (7,8) differ only in s3
    sigma = p[0::2] + p[1::2]
    delta = p[0::2] - p[1::2]
    n = sigma.sum()
    u = sigma[0] - sigma[3]
    v = sigma[1] - sigma[2]
    x = sigma[0] + sigma[3] - sigma[1] - sigma[2]
    rho1 = -(u + v)
    r = 1 / np.sqrt(2)
    u_new = (u + v) * r
    v_new = (v - u) * r
    x_new = x + (np.sqrt(2) - 1) * rho1
    sigma_new = np.array([
        (n + x_new) / 4 + u_new / 2,
        (n - x_new) / 4 + v_new / 2,
        (n - x_new) / 4 - v_new / 2,
        (n + x_new) / 4 - u_new / 2,
    ])
    out = np.empty(8)
    out[0::2] = (sigma_new + delta) / 2
    out[1::2] = (sigma_new - delta) / 2
    return out


def t_gate_signed_map(M: int = 3) -> MarkovOp:
    """
    Signed linear map realizing the T gate on the direct map of one qubit.

    Rotates (p_1278 - ..., p_3456 - ...) by pi/4 so that (rho_1, rho_2) turn like
    under T, keeps p_1 - p_2, p_3 - p_4, p_5 - p_6, p_7 - p_8 (hence rho_3), and
    shifts <s1 s2> by (sqrt 2 - 1) rho_1; the shifts cancel over eight steps.
    """
    if M != 3:
        raise DimensionMismatchError("the signed T-gate map is defined for M=3")
    W = np.column_stack([_signed_t_update(col) for col in np.eye(8)])
    return MarkovOp(W, signed=True, name="T")


def _signed_match(v: np.ndarray, directions: np.ndarray) -> Optional[Tuple[int, int]]:
    for k, d in enumerate(directions):
        if np.abs(v - d).max() <= MATCH_TOL:
            return k, 1
        if np.abs(v + d).max() <= MATCH_TOL:
            return k, -1
    return None


def _direction_rule(b: np.ndarray, directions: np.ndarray) -> Optional[SpinTransformRule]:
    """s'_j = sign * s_k with b^T d_j = sign * d_k for every spin, if such k exist."""
    actions = []
    for d in directions:
        match = _signed_match(b.T @ d, directions)
        if match is None:
            return None
        actions.append(SpinAction(match[0] + 1, match[1]))
    return SpinTransformRule(tuple(actions))


def _single_qubit_block(name: str) -> np.ndarray:
    if name == "CONJ":
        return np.diag([1.0, -1.0, 1.0])
    return unitary_coefficient_map(SINGLE_QUBIT_GATES[name])


def _correlation_rule(bq_map: BitQuantumMap, spec: GateSpec) -> Optional[SpinTransformRule]:
    Q = bq_map.Q
    mapping: Dict[int, Tuple[int, int]] = {}
    if spec.name == "SWAP":
        a, c = spec.targets
        for k in (1, 2, 3):
            mapping[correlation_spin(a, k)] = (correlation_spin(c, k), 1)
            mapping[correlation_spin(c, k)] = (correlation_spin(a, k), 1)
        return SpinTransformRule.from_mapping(bq_map.M, mapping)
    if spec.name == "CNOT":
        return None
    qubits = range(1, Q + 1) if spec.name == "CONJ" else spec.targets
    block = _single_qubit_block(spec.name)
    local = _direction_rule(block, np.eye(3))
    if local is None:
        return None
    for qubit in qubits:
        for k, action in enumerate(local.actions, start=1):
            mapping[correlation_spin(qubit, k)] = (correlation_spin(qubit, action.source), action.sign)
    return SpinTransformRule.from_mapping(bq_map.M, mapping)


def gate_realization(gate_name: str, bq_map: BitQuantumMap, targets: Sequence[int] = ()) -> ClassicalOp:
    """
    Classical operation realizing a gate under a bit-quantum map.

    Args:
        gate_name: Name from the gate table (CONJ takes no targets)
        bq_map: The map the classical data is read with
        targets: 1-based qubit targets; defaults to qubit 1 (qubits 1, 2 for two-qubit gates)

    Returns:
        UniqueJumpOp, or the signed MarkovOp for T on signed3

    Raises:
        GateUnavailableError: the gate has no realization for this map
    """
    if bq_map.variant == MapVariant.DENSITY_LINEAR:
        if bq_map.base is None:
            raise GateUnavailableError(f"map {bq_map.name} has no gate catalog")
        return gate_realization(gate_name, bq_map.base, targets)
    if gate_name == "CONJ":
        targets = ()
    elif not targets:
        targets = (1, 2) if gate_name in ("CNOT", "SWAP") else (1,)
    spec = gate(gate_name, *targets, Q=bq_map.Q)
    label = f"{gate_name} {' '.join(str(t) for t in targets)}".strip()

    if gate_name == "T" and bq_map.name == "signed3":
        return t_gate_signed_map()

    if bq_map.variant == MapVariant.CORRELATION:
        rule = _correlation_rule(bq_map, spec)
        if rule is None:
            raise GateUnavailableError(f"{gate_name} unavailable as unique jump on map {bq_map.name}")
    else:
        rule = _direction_rule(coefficient_map(spec), bq_map.directions)
        if rule is None:
            if gate_name == "T":
                raise GateUnavailableError("T unavailable as unique jump; use map signed3")
            raise GateUnavailableError(f"{gate_name} unavailable as unique jump on map {bq_map.name}")
    logger.debug(f"{label} on {bq_map.name}: {'; '.join(rule.describe()) or 'identity'}")
    return rule_to_permutation(rule, bq_map.M, name=label)


def hadamard_rule() -> SpinTransformRule:
    """s1' = s3, s2' = -s2, s3' = s1."""
    return SpinTransformRule.from_mapping(3, {1: (3, 1), 2: (2, -1), 3: (1, 1)})


def conditional_jump_c() -> UniqueJumpOp:
    """
    Conditional jump on the six correlation-map spins.

    If s3(1) = -1 flip s2(2) and s3(2); if s1(2) = -1 flip s1(1) and s2(1).
    """
    s = correlation_spin
    actions = [SpinAction(j) for j in range(1, 7)]
    for qubit, axis, control in ((1, 1, s(2, 1)), (1, 2, s(2, 1)), (2, 2, s(1, 3)), (2, 3, s(1, 3))):
        j = s(qubit, axis)
        actions[j - 1] = SpinAction(j, -1, (control, -1))
    return rule_to_permutation(SpinTransformRule(tuple(actions)), 6, name="C")


def cnot_counterexample_distribution() -> ProbabilityDistribution:
    """
    Eight configurations at 1/8 with s3(1) = s3(2) = 1.

    All one- and two-point functions that a CNOT must map to zero vanish, while
    <s1(1) s1(2) s2(2)> = 1.
    """
    # values of (s1(1), s2(1), s1(2), s2(2))
    support = ["++++", "+-++", "++--", "+---", "-++-", "--+-", "-+-+", "---+"]
    p = np.zeros(64)
    for pattern in support:
        s11, s21, s12, s22 = (1 if c == "+" else 0 for c in pattern)
        bits = [s11, s21, 1, s12, s22, 1]
        p[int("".join(str(b) for b in bits), 2)] = 1 / 8
    return ProbabilityDistribution(6, p)


def gate_violations(bq_map: BitQuantumMap, spec: GateSpec, before, after, tol: float = 1e-9) -> List[Dict[str, Any]]:
    """Coefficients where rho(after) differs from the gate applied to rho(before)."""
    rho_before = extract_coefficients(bq_map, before)
    rho_after = extract_coefficients(bq_map, after)
    expected = coefficient_map(spec) @ rho_before
    basis = pauli_basis(bq_map.Q)
    out = []
    for z in np.flatnonzero(np.abs(rho_after - expected) > tol):
        out.append({
            "label": basis.label_string(int(z)),
            "actual": float(rho_after[z]),
            "expected": float(expected[z]),
        })
    return out


@dataclass
class CoefficientMapResult:
    """Fit of rho' = b rho over a sample of classical distributions"""

    b: np.ndarray
    residual: float
    closed: bool
    samples: int
    rejected: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "b": np.round(self.b, 12).tolist(),
            "residual": self.residual,
            "closed": self.closed,
            "samples": self.samples,
            "rejected": self.rejected,
        }


def spanning_sample(bq_map: BitQuantumMap, rng: np.random.Generator, extra: int = 10) -> List[ProbabilityDistribution]:
    """Distributions realizing 4**Q - 1 + extra random positive states under the map."""
    size = 4 ** bq_map.Q - 1 + extra
    out = []
    if bq_map.variant == MapVariant.CORRELATION:
        from .entangled import entangled_family

        for _ in range(size):
            factors = [random_positive_rho(1, rng).coefficients for _ in range(bq_map.Q)]
            coeffs = _product_coefficients(factors)
            out.append(sample_quantum_distribution(bq_map, rho_from_coefficients(bq_map.Q, coeffs)))
        if bq_map.Q == 2:
            out.extend(entangled_family(theta)[1] for theta in rng.uniform(0, 2 * np.pi, size=4))
        return out
    if bq_map.variant == MapVariant.DIRECT and bq_map.M > bq_map.directions.shape[1]:
        # redundant spins: only states with rho_2 = 0 are representable on extended4
        mask = np.abs(bq_map.directions).sum(axis=0) > 0
    else:
        mask = None
    while len(out) < size:
        rho = random_positive_rho(bq_map.Q, rng)
        if mask is not None and not mask.all():
            coeffs = rho.coefficients * mask
            rho = rho_from_coefficients(bq_map.Q, coeffs)
        out.append(sample_quantum_distribution(bq_map, rho))
    return out


def _product_coefficients(factors: Sequence[np.ndarray]) -> np.ndarray:
    Q = len(factors)
    basis = pauli_basis(Q)
    coeffs = np.empty(basis.size)
    for z, label in enumerate(basis.labels):
        coeffs[z] = np.prod([factors[i][mu - 1] for i, mu in enumerate(label) if mu])
    return coeffs


def induced_coefficient_map(op: ClassicalOp, bq_map: BitQuantumMap,
                            samples: Optional[Sequence[ProbabilityDistribution]] = None,
                            seed: Optional[int] = None, tol: float = CLOSURE_TOL) -> CoefficientMapResult:
    """
    Least-squares fit of rho'_z = b_zy rho_y over a spanning sample.

    Signed maps are fitted on their linear action; outputs with negative entries
    are counted in `rejected` but still enter the fit.

    Returns:
        CoefficientMapResult with closed=False when the residual exceeds tol
    """
    if samples is None:
        rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
        samples = spanning_sample(bq_map, rng)
    X, Y, rejected = [], [], 0
    for dist in samples:
        after = op.apply_vector(dist.p)
        if after.min() < -PROB_TOL:
            rejected += 1
        X.append(extract_coefficients(bq_map, dist))
        Y.append(bq_map.observables @ after)
    X, Y = np.array(X), np.array(Y)
    bt, *_ = np.linalg.lstsq(X, Y, rcond=None)
    residual = float(np.abs(X @ bt - Y).max())
    closed = residual <= tol
    logger.debug(f"Coefficient fit over {len(X)} samples: residual {residual:.3e}, closed={closed}")
    return CoefficientMapResult(bt.T, residual, closed, len(X), rejected)


@dataclass
class SpectrumReport:
    """Eigenvalues sorted by modulus, the unit-modulus subset and its periods"""

    eigenvalues: np.ndarray
    leading: np.ndarray
    periods: List[Optional[int]]
    phases: List[Optional[int]]
    period: Optional[int]
    subleading: float

    def to_dict(self) -> Dict[str, Any]:
        def pair(z):
            return [round(float(z.real), 12) + 0.0, round(float(z.imag), 12) + 0.0]

        return {
            "eigenvalues": [pair(z) for z in self.eigenvalues],
            "leading": [pair(z) for z in self.leading],
            "periods": self.periods,
            "phases": self.phases,
            "period": self.period,
            "subleading_modulus": round(self.subleading, 12),
        }


def _root_of_unity(z: complex, max_h: int, tol: float) -> Tuple[Optional[int], Optional[int]]:
    angle = np.angle(z) / (2 * np.pi)
    for h in range(1, max_h + 1):
        k = angle * h
        if abs(k - round(k)) <= tol:
            return h, int(round(k)) % h
    return None, None


def spectrum_period(op, max_period: int = 256, tol: float = 1e-10) -> SpectrumReport:
    """
    Spectrum of a classical operation or any square matrix.

    Args:
        op: UniqueJumpOp, MarkovOp or square array
        max_period: Largest power searched for S**h = 1

    Returns:
        SpectrumReport
    """
    if isinstance(op, UniqueJumpOp):
        S, exact_order = op.matrix, op.order()
    else:
        S, exact_order = np.asarray(getattr(op, "matrix", op), dtype=float), None
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatchError(f"spectrum needs a square matrix, got shape {S.shape}")
    eigenvalues = np.linalg.eigvals(S)
    eigenvalues = np.where(np.abs(eigenvalues.imag) < 1e-13, eigenvalues.real + 0j, eigenvalues)
    order = np.lexsort((-eigenvalues.imag, -eigenvalues.real, -np.round(np.abs(eigenvalues), 12)))
    eigenvalues = eigenvalues[order]
    moduli = np.abs(eigenvalues)
    is_leading = np.abs(moduli - 1) <= 1e-8
    leading = eigenvalues[is_leading]
    periods, phases = [], []
    for z in leading:
        h, k = _root_of_unity(z, max_period, 1e-8)
        periods.append(h)
        phases.append(k)
    subleading = float(moduli[~is_leading].max()) if (~is_leading).any() else 0.0

    period = exact_order
    if period is None and is_leading.all():
        power = np.eye(S.shape[0])
        for h in range(1, max_period + 1):
            power = power @ S
            if np.abs(power - np.eye(S.shape[0])).max() <= tol:
                period = h
                break
    return SpectrumReport(eigenvalues, leading, periods, phases, period, subleading)


def catalog_unique_jumps(bq_map: BitQuantumMap) -> List[UniqueJumpOp]:
    """Every catalog gate that this map realizes as a unique jump, on every target."""
    ops = []
    names = list(SINGLE_QUBIT_GATES) + ["CNOT", "SWAP", "CONJ"]
    for name in names:
        if name == "CONJ":
            target_sets = [()]
        elif name in ("CNOT", "SWAP"):
            target_sets = [(a, b) for a in range(1, bq_map.Q + 1) for b in range(1, bq_map.Q + 1) if a != b]
        else:
            target_sets = [(t,) for t in range(1, bq_map.Q + 1)]
        for targets in target_sets:
            try:
                op = gate_realization(name, bq_map, targets)
            except (GateUnavailableError, DimensionMismatchError):
                continue
            if isinstance(op, UniqueJumpOp):
                ops.append(op)
    return ops


def group_closure(generators: Sequence[UniqueJumpOp], limit: int = 100000) -> List[UniqueJumpOp]:
    """All products of the generators (breadth first), identity included."""
    if not generators:
        return []
    n = generators[0].perm.size
    identity = tuple(range(n))
    seen = {identity}
    queue = deque([np.arange(n)])
    gens = [g.perm for g in generators]
    while queue:
        current = queue.popleft()
        for g in gens:
            nxt = g[current]
            key = tuple(int(t) for t in nxt)
            if key not in seen:
                if len(seen) >= limit:
                    raise DimensionMismatchError(f"group closure exceeds {limit} elements")
                seen.add(key)
                queue.append(nxt)
    return [UniqueJumpOp(np.array(key)) for key in sorted(seen)]


@dataclass
class ClosureReport:
    """Finite unique-jump group against the coefficient map of U_H U_T"""

    size: int
    max_order: int
    min_residual: float
    target_period: Optional[int]

    @property
    def realizes_target(self) -> bool:
        return self.min_residual < 1e-6

    def to_dict(self) -> Dict[str, Any]:
        return {
            "size": self.size,
            "max_order": self.max_order,
            "min_residual": self.min_residual,
            "target_period": self.target_period,
            "realizes_target": self.realizes_target,
        }


def hadamard_t_closure(M: int = 3, seed: Optional[int] = None) -> ClosureReport:
    """
    Close the catalog unique jumps of the direct map under composition and look
    for an element inducing the U_H U_T coefficient map, which has infinite order.
    """
    if M != 3:
        raise DimensionMismatchError("the catalog closure is built for the M=3 direct map")
    bq_map = direct_map(1)
    group = group_closure(catalog_unique_jumps(bq_map))
    target_U = gate("H").matrix @ gate("T").matrix
    target = unitary_coefficient_map(target_U)
    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    samples = spanning_sample(bq_map, rng)
    best = np.inf
    for op in group:
        fit = induced_coefficient_map(op, bq_map, samples=samples)
        best = min(best, float(np.abs(fit.b - target).max()))
    report = ClosureReport(len(group), max(op.order() for op in group), best, gate_period(target_U, max_n=512))
    logger.debug(f"Unique-jump closure: {report.size} elements, min residual {best:.3e}")
    return report
