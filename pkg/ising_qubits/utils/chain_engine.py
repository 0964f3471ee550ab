"""
Static memory materials and probabilistic computing: step evolution operators built from
interactions between neighboring layers, classical density matrices and their evolution,
memory loss, state preparation, subsystem closure and operator-level no-go checks
"""

import logging
from dataclasses import dataclass, field
from functools import partial
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .base import (
    DEFAULT_SEED,
    POSITIVITY_TOL,
    PROB_TOL,
    DimensionMismatchError,
    InvalidDistributionError,
    SingularStepError,
    check_spin_count,
)
from .bitq_maps import BitQuantumMap, correlation_map, correlation_spin, direct_map, extract_coefficients
from .classical_ops import (
    MarkovOp,
    SpectrumReport,
    SpinAction,
    SpinTransformRule,
    UniqueJumpOp,
    rule_to_permutation,
    spectrum_period,
)
from .qcond import PositivityReport, positivity_report
from .quantum_core import coefficient_map, gate, pauli_basis, rho_from_coefficients
from .spin_core import ProbabilityDistribution, WaveFunctionPair, distribution_from_pair, spin_table

logger = logging.getLogger(__name__)

ZERO_SET_TOL = 1e-9


# ---------------------------------------------------------------------------
# Interactions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CouplingTerm:
    """coefficient * prod s'_primed * prod s_unprimed, 1-based spins of layers t+eps and t"""

    coefficient: float
    primed: Tuple[int, ...] = ()
    unprimed: Tuple[int, ...] = ()


@dataclass(frozen=True, eq=False)
class ExplicitMatrix:
    """L given directly by its matrix M_{tau rho}; S_bar = exp(-M)"""

    M_matrix: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class SpinCoupling:
    """L = -beta (sum of couplings - offset); beta_infinite takes the zero-temperature limit"""

    terms: Tuple[CouplingTerm, ...]
    beta: float = 1.0
    offset: float = 0.0
    beta_infinite: bool = False


@dataclass(frozen=True, eq=False)
class BoltzmannForm:
    """L = -a . s' - b . s - s' W s, one layer of a restricted Boltzmann machine"""

    a: np.ndarray = field(repr=False)
    b: np.ndarray = field(repr=False)
    W: np.ndarray = field(repr=False)
    beta: float = 1.0


@dataclass(frozen=True)
class FrustratedExample:
    """The frustrated two-qubit coupling; beta=None is the zero-temperature limit"""

    gamma: float
    delta: float
    Delta: float
    beta: Optional[float] = None


InteractionTerm = Union[ExplicitMatrix, SpinCoupling, BoltzmannForm, FrustratedExample]


def hadamard_coupling(beta: Optional[float] = None) -> SpinCoupling:
    """
    Couplings forcing s1(1)' = s3(1), s3(1)' = s1(1), s2(1)' = -s2(1) and s_k(2)' = s_k(2).
    """
    s = correlation_spin
    terms = [
        CouplingTerm(1.0, (s(1, 1),), (s(1, 3),)),
        CouplingTerm(1.0, (s(1, 3),), (s(1, 1),)),
        CouplingTerm(-1.0, (s(1, 2),), (s(1, 2),)),
    ]
    terms += [CouplingTerm(1.0, (s(2, k),), (s(2, k),)) for k in (1, 2, 3)]
    return SpinCoupling(tuple(terms), beta=beta or 1.0, offset=6.0, beta_infinite=beta is None)


def swap_coupling(beta: Optional[float] = None) -> SpinCoupling:
    """Couplings exchanging the spins of the two qubits."""
    s = correlation_spin
    terms = []
    for k in (1, 2, 3):
        terms.append(CouplingTerm(1.0, (s(1, k),), (s(2, k),)))
        terms.append(CouplingTerm(1.0, (s(2, k),), (s(1, k),)))
    return SpinCoupling(tuple(terms), beta=beta or 1.0, offset=6.0, beta_infinite=beta is None)


def frustrated_coupling(gamma: float, delta: float, Delta: float, beta: Optional[float] = None) -> SpinCoupling:
    """
    Fifteen couplings resembling a CNOT that cannot all be satisfied at once.

    gamma in {0, 1} with Delta = 10 + delta gives the conditional jump C;
    gamma = 2, delta = 0, Delta = 10 leaves three equally likely successors.
    """
    a = partial(correlation_spin, 1)
    b = partial(correlation_spin, 2)
    T = CouplingTerm
    terms = (
        T(1.0, (a(3), b(3)), (b(3),)),
        T(1.0, (b(3),), (a(3), b(3))),
        T(1.0, (a(3), b(2)), (b(2),)),
        T(1.0, (b(2),), (a(3), b(2))),
        T(1.0, (a(1), b(1)), (a(1),)),
        T(1.0, (a(1),), (a(1), b(1))),
        T(1.0, (a(2), b(1)), (a(2),)),
        T(1.0, (a(2),), (a(2), b(1))),
        T(gamma, (a(1), b(2)), (a(2), b(3))),
        T(gamma, (a(2), b(3)), (a(1), b(2))),
        T(-gamma, (a(2), b(2)), (a(1), b(3))),
        T(-gamma, (a(1), b(3)), (a(2), b(2))),
        T(1.0, (a(3),), (a(3),)),
        T(1.0, (b(1),), (b(1),)),
        T(delta, (a(3), b(1)), (a(3), b(1))),
    )
    return SpinCoupling(terms, beta=beta or 1.0, offset=float(Delta), beta_infinite=beta is None)


def projector_sp() -> np.ndarray:
    """Two-spin operator erasing the memory in the q3, q4 directions."""
    return 0.5 * np.array([
        [0, 1, 1, 0],
        [1, 0, 0, 1],
        [1, 0, 0, 1],
        [0, 1, 1, 0],
    ], dtype=float)


def s_of_u(u: float) -> np.ndarray:
    """Smooth memory loss; eigenvalues +-1 and +-i(1 - 2u)."""
    if not 0.0 <= u <= 1.0:
        raise InvalidDistributionError(f"u must lie in [0, 1], got {u}")
    w = 1.0 - u
    return np.array([
        [0, w, u, 0],
        [u, 0, 0, w],
        [w, 0, 0, u],
        [0, u, w, 0],
    ], dtype=float)


def equipartition_attractor() -> np.ndarray:
    """Equipartition attractor with eigenvalues 1, 1/3, 1/3, -1/3."""
    return np.array([
        [1, 1, 1, 0],
        [1, 1, 0, 1],
        [1, 0, 1, 1],
        [0, 1, 1, 1],
    ], dtype=float) / 3.0


def embedded_projector() -> np.ndarray:
    """Three-spin operator acting with S_P on s2, s3 and leaving s1 unchanged."""
    return linalg.block_diag(projector_sp(), projector_sp())


# ---------------------------------------------------------------------------
# Step evolution operators
# ---------------------------------------------------------------------------


def _spin_count(dim: int) -> int:
    M = int(dim).bit_length() - 1
    if dim < 2 or (1 << M) != dim:
        raise DimensionMismatchError(f"dimension {dim} is not 2**M")
    return M


def _is_permutation(S: np.ndarray) -> bool:
    if not np.all((np.abs(S) <= ZERO_SET_TOL) | (np.abs(S - 1) <= ZERO_SET_TOL)):
        return False
    ones = np.abs(S - 1) <= ZERO_SET_TOL
    return bool(np.all(ones.sum(axis=0) == 1) and np.all(ones.sum(axis=1) == 1))


@dataclass(frozen=True, eq=False)
class StepEvolutionOperator:
    """Transfer matrix normalized to unit spectral radius; columns index layer t, rows layer t+eps"""

    S: np.ndarray = field(repr=False)
    representation: str = "dense"
    name: str = ""

    def __post_init__(self):
        S = np.array(self.S, dtype=float)
        if S.ndim != 2 or S.shape[0] != S.shape[1]:
            raise DimensionMismatchError(f"step operator must be square, got shape {S.shape}")
        _spin_count(S.shape[0])
        representation = self.representation
        if representation == "permutation" and not _is_permutation(S):
            raise InvalidDistributionError("matrix is not a permutation")
        if representation == "dense" and _is_permutation(S):
            representation = "permutation"
        S.setflags(write=False)
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "representation", representation)

    @property
    def M(self) -> int:
        return _spin_count(self.S.shape[0])

    @property
    def is_permutation(self) -> bool:
        return self.representation == "permutation"

    @property
    def invertible(self) -> bool:
        return bool(np.linalg.matrix_rank(self.S) == self.S.shape[0])

    def inverse(self) -> np.ndarray:
        if self.is_permutation:
            return self.S.T.copy()
        if not self.invertible:
            raise SingularStepError(f"step operator {self.name!r} is singular")
        return np.linalg.inv(self.S)

    def as_operation(self) -> Union[UniqueJumpOp, MarkovOp]:
        """The operation on local probabilities when S is a unique jump or a Markov matrix."""
        if self.is_permutation:
            return UniqueJumpOp(np.argmax(self.S, axis=0), name=self.name)
        return MarkovOp(self.S, name=self.name)

    def to_json(self) -> Dict[str, Any]:
        return {"name": self.name, "representation": self.representation, "S": self.S.tolist()}


def normalize_step(S_bar: np.ndarray, name: str = "") -> StepEvolutionOperator:
    """Divide by the largest eigenvalue modulus."""
    S_bar = np.asarray(S_bar, dtype=float)
    radius = float(np.abs(np.linalg.eigvals(S_bar)).max())
    if radius <= 1e-300:
        raise SingularStepError("transfer matrix has vanishing spectral radius and cannot be normalized")
    return StepEvolutionOperator(S_bar / radius, name=name)


def coupling_energy(term: SpinCoupling, M: int) -> np.ndarray:
    """E[tau', tau] = sum of couplings between configuration tau' at t+eps and tau at t."""
    table = spin_table(M)
    E = np.zeros((1 << M, 1 << M))
    for coupling in term.terms:
        for spin in coupling.primed + coupling.unprimed:
            if not 1 <= spin <= M:
                raise DimensionMismatchError(f"coupling spin {spin} out of range 1..{M}")
        primed = np.prod(table[:, [g - 1 for g in coupling.primed]], axis=1) if coupling.primed else np.ones(1 << M)
        unprimed = (
            np.prod(table[:, [g - 1 for g in coupling.unprimed]], axis=1) if coupling.unprimed else np.ones(1 << M)
        )
        E += coupling.coefficient * np.outer(primed, unprimed)
    return E


def _zero_temperature(E: np.ndarray, offset: float) -> np.ndarray:
    maximum = float(E.max())
    if abs(maximum - offset) > ZERO_SET_TOL:
        logger.debug(f"Offset {offset} does not vanish the minimal L (maximum coupling sum {maximum})")
    indicator = (np.abs(E - maximum) <= ZERO_SET_TOL).astype(float)
    counts = indicator.sum(axis=0)
    leaking = np.flatnonzero(counts == 0)
    if leaking.size:
        raise SingularStepError(
            f"zero-temperature limit leaves configurations {leaking.tolist()} without a successor"
        )
    # unique successors give a jump, several give an equal-weight splitter
    return indicator / counts


def step_from_interaction(term: InteractionTerm, M: int) -> StepEvolutionOperator:
    """
    Step evolution operator of an interaction between neighboring layers.

    S_bar = exp(-L) entrywise, normalized to unit spectral radius. The zero-temperature
    limit keeps the indicator of the minimal-L configurations: a permutation for a
    unique jump, otherwise an equal-weight splitter.

    Raises:
        DimensionMismatchError: term does not fit M spins
        SingularStepError: S_bar vanishes identically, or the zero-temperature limit leaves a
            configuration without a successor
    """
    check_spin_count(M)
    dim = 1 << M
    if isinstance(term, FrustratedExample):
        if M != 6:
            raise DimensionMismatchError("the frustrated coupling acts on the six correlation-map spins")
        term = frustrated_coupling(term.gamma, term.delta, term.Delta, term.beta)

    if isinstance(term, ExplicitMatrix):
        L = np.asarray(term.M_matrix)
        if np.iscomplexobj(L) and np.abs(L.imag).max() > 0:
            raise InvalidDistributionError("explicit interaction matrix must be real")
        L = np.asarray(L, dtype=float)
        if L.shape != (dim, dim):
            raise DimensionMismatchError(f"interaction matrix has shape {L.shape}, expected {(dim, dim)}")
        S_bar, name = np.exp(-(L - L.min())), "explicit"
    elif isinstance(term, SpinCoupling):
        E = coupling_energy(term, M)
        if term.beta_infinite:
            S_bar = _zero_temperature(E, term.offset)
        else:
            if term.beta <= 0:
                raise InvalidDistributionError(f"beta must be positive, got {term.beta}")
            S_bar = np.exp(term.beta * (E - E.max()))
        name = "coupling"
    elif isinstance(term, BoltzmannForm):
        if term.beta <= 0:
            raise InvalidDistributionError(f"beta must be positive, got {term.beta}")
        a, b, W = (np.asarray(x, dtype=float) for x in (term.a, term.b, term.W))
        if a.shape != (M,) or b.shape != (M,) or W.shape != (M, M):
            raise DimensionMismatchError("Boltzmann parameters must have shapes (M,), (M,), (M, M)")
        table = spin_table(M)
        E = (table @ a)[:, None] + (table @ b)[None, :] + table @ W @ table.T
        S_bar, name = np.exp(term.beta * (E - E.max())), "boltzmann"
    else:
        raise TypeError(f"unsupported interaction term {type(term).__name__}")

    step = normalize_step(S_bar, name=name)
    logger.debug(f"Built {step.representation} step operator on M={M} from {type(term).__name__}")
    return step


def step_preset(name: str, **params) -> StepEvolutionOperator:
    """
    Named step operators: sp, projector (S_P on s2, s3 of three spins), attractor, s(u) with u=...,
    hadamard_coupling, swap_coupling, frustrated with gamma, delta, Delta.
    """
    key = name.strip().lower()
    if key == "sp":
        return StepEvolutionOperator(projector_sp(), name="sp")
    if key == "projector":
        return StepEvolutionOperator(embedded_projector(), name="projector")
    if key == "attractor":
        return StepEvolutionOperator(equipartition_attractor(), name="attractor")
    if key in ("s(u)", "su"):
        if "u" not in params:
            raise InvalidDistributionError("s(u) needs u=<float>")
        return StepEvolutionOperator(s_of_u(float(params["u"])), name=f"s(u={float(params['u']):g})")
    if key == "hadamard_coupling":
        step = step_from_interaction(hadamard_coupling(), 6)
    elif key == "swap_coupling":
        step = step_from_interaction(swap_coupling(), 6)
    elif key == "frustrated":
        missing = [p for p in ("gamma", "delta", "Delta") if p not in params]
        if missing:
            raise InvalidDistributionError(f"frustrated step needs {', '.join(missing)}")
        step = step_from_interaction(
            FrustratedExample(float(params["gamma"]), float(params["delta"]), float(params["Delta"])), 6
        )
    else:
        raise KeyError(f"unknown step preset {name!r}")
    return StepEvolutionOperator(step.S, step.representation, name=key)


# ---------------------------------------------------------------------------
# Classical density matrices and chains
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ClassicalDensityMatrix:
    """Real rho' whose diagonal holds the local probabilities"""

    rho: np.ndarray = field(repr=False)

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise DimensionMismatchError(f"classical density matrix must be square, got shape {rho.shape}")
        _spin_count(rho.shape[0])
        diag = np.diag(rho)
        tol = PROB_TOL * max(1, rho.shape[0])
        if diag.min() < -tol:
            raise InvalidDistributionError(
                f"negative local probability {diag.min():.3e} at index {int(diag.argmin())}"
            )
        if abs(diag.sum() - 1.0) > PROB_TOL:
            raise InvalidDistributionError(f"classical density matrix has trace {diag.sum()!r}")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def M(self) -> int:
        return _spin_count(self.rho.shape[0])

    @property
    def diagonal(self) -> np.ndarray:
        return np.clip(np.diag(self.rho), 0.0, None)

    @property
    def trace(self) -> float:
        return float(np.trace(self.rho))

    def distribution(self) -> ProbabilityDistribution:
        return ProbabilityDistribution.from_array(self.diagonal, renormalize=True)

    @classmethod
    def pure(cls, q_tilde, q_bar) -> "ClassicalDensityMatrix":
        """rho' = q_tilde q_bar^T / (q_bar . q_tilde)."""
        q_tilde = np.asarray(q_tilde, dtype=float)
        q_bar = np.asarray(q_bar, dtype=float)
        overlap = float(q_bar @ q_tilde)
        if abs(overlap) <= 1e-300:
            raise InvalidDistributionError("wave functions are orthogonal; the pure state is not normalizable")
        return cls(np.outer(q_tilde, q_bar) / overlap)

    @classmethod
    def from_distribution(cls, dist: ProbabilityDistribution) -> "ClassicalDensityMatrix":
        return cls(np.diag(dist.p))


@dataclass(frozen=True)
class Chain:
    """
    Ordered step operators with layers t = t_in + n * eps.

    A WaveFunctionPair boundary holds q_tilde at the initial layer and q_bar at the final layer.
    """

    steps: Tuple[StepEvolutionOperator, ...]
    boundary: Union[WaveFunctionPair, ClassicalDensityMatrix]
    t_in: float = 0.0
    eps: float = 1.0

    def __post_init__(self):
        steps = tuple(self.steps)
        object.__setattr__(self, "steps", steps)
        dims = {step.S.shape[0] for step in steps}
        if isinstance(self.boundary, WaveFunctionPair):
            dims.add(self.boundary.q_tilde.size)
        elif isinstance(self.boundary, ClassicalDensityMatrix):
            dims.add(self.boundary.rho.shape[0])
        else:
            raise TypeError("boundary must be a WaveFunctionPair or a ClassicalDensityMatrix")
        if len(dims) != 1:
            raise DimensionMismatchError(f"chain layers disagree on the state count: {sorted(dims)}")

    @property
    def M(self) -> int:
        return self.steps[0].M if self.steps else _boundary_dim(self.boundary).bit_length() - 1

    @property
    def length(self) -> int:
        return len(self.steps)

    def layer_time(self, n: int) -> float:
        return self.t_in + n * self.eps


def _boundary_dim(boundary) -> int:
    if isinstance(boundary, WaveFunctionPair):
        return boundary.q_tilde.size
    return boundary.rho.shape[0]


def _layer_count(chain: Chain, n: Optional[int]) -> int:
    n = chain.length if n is None else n
    if not 0 <= n <= chain.length:
        raise DimensionMismatchError(f"layer {n} outside the chain's 0..{chain.length}")
    return n


def _initial_conjugate(chain: Chain) -> np.ndarray:
    q_bar = np.asarray(chain.boundary.q_bar, dtype=float)
    for step in reversed(chain.steps):
        q_bar = q_bar @ step.S
    return q_bar


def initial_density(chain: Chain) -> ClassicalDensityMatrix:
    if isinstance(chain.boundary, ClassicalDensityMatrix):
        return chain.boundary
    return ClassicalDensityMatrix.pure(chain.boundary.q_tilde, _initial_conjugate(chain))


def evolve_density(chain: Chain, n: Optional[int] = None, allow_singular: bool = False) -> List[ClassicalDensityMatrix]:
    """
    rho'(t + eps) = S rho'(t) S^-1 for layers 0..n.

    Args:
        chain: Chain to evolve
        n: Last layer; the full chain by default
        allow_singular: Conjugate singular steps with the pseudo-inverse and renormalize the trace

    Returns:
        ClassicalDensityMatrix per layer

    Raises:
        SingularStepError: a step is singular and allow_singular is False
    """
    n = _layer_count(chain, n)
    layers = [initial_density(chain)]
    rho = layers[0].rho
    for index, step in enumerate(chain.steps[:n]):
        if step.is_permutation or step.invertible:
            rho = step.S @ rho @ step.inverse()
            trace = float(np.trace(rho))
            if abs(trace - 1.0) > POSITIVITY_TOL:
                raise InvalidDistributionError(f"step {index} moved the trace of rho' to {trace!r}")
            rho = rho / trace
        elif allow_singular:
            logger.warning(f"Step {index} is singular; evolving rho' with the pseudo-inverse and renormalizing")
            rho = step.S @ rho @ np.linalg.pinv(step.S)
            trace = float(np.trace(rho))
            if abs(trace) <= 1e-300:
                raise SingularStepError(f"step {index} annihilates the classical density matrix")
            rho = rho / trace
        else:
            raise SingularStepError(
                f"step {index} is singular; use the wave-function route or allow_singular=True"
            )
        layers.append(ClassicalDensityMatrix(rho))
    logger.debug(f"Evolved classical density matrix over {n} layers (dim {rho.shape[0]})")
    return layers


def evolve_wavefunctions(chain: Chain, n: Optional[int] = None) -> List[WaveFunctionPair]:
    """
    q_tilde(t + eps) = S q_tilde(t) forward from the initial layer and
    q_bar(t) = q_bar(t + eps) S backward from the final layer.

    Defined for singular steps as well.
    """
    if not isinstance(chain.boundary, WaveFunctionPair):
        raise InvalidDistributionError("wave-function evolution needs a product boundary")
    n = _layer_count(chain, n)
    forward = [np.asarray(chain.boundary.q_tilde, dtype=float)]
    for step in chain.steps:
        forward.append(step.S @ forward[-1])
    backward = [np.asarray(chain.boundary.q_bar, dtype=float)]
    for step in reversed(chain.steps):
        backward.append(backward[-1] @ step.S)
    backward.reverse()
    return [WaveFunctionPair(forward[k], backward[k]) for k in range(n + 1)]


def layer_distributions(chain: Chain, n: Optional[int] = None, allow_singular: bool = False) -> List[ProbabilityDistribution]:
    """Local probabilities per layer, through the wave functions whenever the boundary allows."""
    if isinstance(chain.boundary, WaveFunctionPair):
        return [distribution_from_pair(pair) for pair in evolve_wavefunctions(chain, n)]
    return [layer.distribution() for layer in evolve_density(chain, n, allow_singular)]


def trajectory(chain: Chain, bq_map: Optional[BitQuantumMap] = None, allow_singular: bool = False) -> List[Dict[str, Any]]:
    """Per layer: t, local probabilities and, for a matching map, rho_z with its quantum-condition verdict."""
    rows = []
    for k, dist in enumerate(layer_distributions(chain, None, allow_singular)):
        row: Dict[str, Any] = {"t": chain.layer_time(k), "diag": [float(x) for x in dist.p]}
        if bq_map is not None and bq_map.M == dist.M:
            coeffs = extract_coefficients(bq_map, dist)
            row["rho"] = [float(x) for x in coeffs]
            row["verdict"] = positivity_report(rho_from_coefficients(bq_map.Q, coeffs)).to_dict()
        rows.append(row)
    return rows


# ---------------------------------------------------------------------------
# Preparation and memory loss
# ---------------------------------------------------------------------------


@dataclass
class PreparationResult:
    """Quantum state read off one layer after a preparing step"""

    layer: int
    t: float
    rho: np.ndarray
    distribution: ProbabilityDistribution = field(repr=False)
    report: PositivityReport = field(repr=False)

    @property
    def positive(self) -> bool:
        return self.report.positive

    @property
    def pure(self) -> bool:
        return self.report.pure

    def to_dict(self) -> Dict[str, Any]:
        return {
            "layer": self.layer,
            "t": self.t,
            "rho": [float(x) for x in self.rho],
            "diag": [float(x) for x in self.distribution.p],
            "verdict": self.report.to_dict(),
        }


def prepare_quantum_state(dist: ProbabilityDistribution,
                          steps: Optional[Sequence[StepEvolutionOperator]] = None) -> PreparationResult:
    """
    Run a three-spin distribution through preparing steps and read the single-qubit state.

    With the default S_P step on s2, s3 any input, even a single configuration, ends with
    rho_2 = rho_3 = 0 and |rho_1| <= 1. The final conjugate boundary is equipartition.
    """
    if dist.M != 3:
        raise DimensionMismatchError(f"preparation acts on three spins, got M={dist.M}")
    steps = tuple(steps) if steps is not None else (StepEvolutionOperator(embedded_projector(), name="projector"),)
    chain = Chain(steps, WaveFunctionPair(dist.p, np.ones(8)))
    prepared = layer_distributions(chain)[-1]
    rho = extract_coefficients(direct_map(1), prepared)
    report = positivity_report(rho_from_coefficients(1, rho))
    return PreparationResult(chain.length, chain.layer_time(chain.length), rho, prepared, report)


@dataclass
class MemoryDecay:
    """Norm of the q3, q4 component of S(u)^P q per step"""

    u: float
    norms: np.ndarray = field(repr=False)
    rate: float

    @property
    def predicted(self) -> np.ndarray:
        return self.norms[0] * self.rate ** np.arange(self.norms.size)

    @property
    def max_relative_error(self) -> float:
        predicted = self.predicted
        mask = predicted > 1e-300
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.norms[mask] - predicted[mask]) / predicted[mask]))


def memory_decay(u: float, steps: int, q0=None, seed: Optional[int] = None) -> MemoryDecay:
    """
    Track the memory stored in the q3, q4 plane under repeated S(u).

    S(u) maps the plane into itself, so the plane coordinates are evolved with the
    2x2 block of S(u); the fixed-point components never mix into the tracked norm.
    """
    S = s_of_u(u)
    basis = np.array([[1.0, 0.0, 0.0, -1.0], [0.0, 1.0, -1.0, 0.0]]) / np.sqrt(2)
    block = basis @ S @ basis.T
    leak = float(np.abs(S @ basis.T - basis.T @ block).max())
    if leak > 1e-12:
        raise InvalidDistributionError(f"memory plane is not invariant under S(u={u}): {leak:.2e}")
    if q0 is None:
        rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
        q0 = rng.random(4) + 0.1
    c = basis @ np.asarray(q0, dtype=float)
    norms = [float(np.linalg.norm(c))]
    for _ in range(steps):
        c = block @ c
        norms.append(float(np.linalg.norm(c)))
    return MemoryDecay(u, np.array(norms), abs(1.0 - 2.0 * u))


# ---------------------------------------------------------------------------
# Maps of local probabilities
# ---------------------------------------------------------------------------


def _matrix(S) -> np.ndarray:
    S = np.asarray(getattr(S, "S", S), dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got shape {S.shape}")
    return S


def _inverse(S: np.ndarray) -> np.ndarray:
    if np.linalg.matrix_rank(S) < S.shape[0]:
        raise SingularStepError("step operator is singular")
    return np.linalg.inv(S)


@dataclass
class MarkovReducibility:
    """Whether p(t + eps) depends on p(t) alone"""

    reducible: bool
    W: Optional[np.ndarray] = field(repr=False)
    off_diagonal: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "reducible": self.reducible,
            "verdict": "probability map" if self.reducible else "density-matrix required",
            "off_diagonal": self.off_diagonal,
            "W": None if self.W is None else self.W.tolist(),
        }


def markov_reducibility(S, tol: float = 1e-10) -> MarkovReducibility:
    """
    Test S_{tau rho} S^-1_{sigma tau} = W_{tau rho} delta_{rho sigma}.

    The matrices A^(tau)_{sigma rho} = S_{tau rho} S^-1_{sigma tau} must all be diagonal.

    Raises:
        SingularStepError: S is not invertible
    """
    S = _matrix(S)
    S_inv = _inverse(S)
    # A[tau, sigma, rho] = S[tau, rho] * S_inv[sigma, tau]
    A = S[:, None, :] * S_inv.T[:, :, None]
    diagonal = np.einsum("tss->ts", A)
    off = A.copy()
    idx = np.arange(S.shape[0])
    off[:, idx, idx] = 0.0
    worst = float(np.abs(off).max())
    if worst > tol:
        return MarkovReducibility(False, None, worst)
    return MarkovReducibility(True, diagonal, worst)


@dataclass
class TwoStepMap:
    """Probability map p(t + eps) = W p(t) enforced by the step after next"""

    exists: bool
    W: Optional[np.ndarray] = field(repr=False)
    residual: float


def two_step_probability_map(S1, S2, tol: float = 1e-10) -> TwoStepMap:
    """
    Map of local probabilities through S1 when the conjugate wave function at t + eps
    is constrained to the left image of the following step S2.

    Entry W_{tau rho} exists when S1_{tau rho} S2[:, tau] is proportional to (S2 S1)[:, rho].
    """
    S1, S2 = _matrix(S1), _matrix(S2)
    if S1.shape != S2.shape:
        raise DimensionMismatchError("both steps must act on the same states")
    product = S2 @ S1
    dim = S1.shape[0]
    W = np.zeros((dim, dim))
    residual = 0.0
    for tau in range(dim):
        for rho in range(dim):
            target = S1[tau, rho] * S2[:, tau]
            column = product[:, rho]
            norm = float(column @ column)
            if norm <= 1e-300:
                residual = max(residual, float(np.abs(target).max()))
                continue
            W[tau, rho] = float(column @ target) / norm
            residual = max(residual, float(np.abs(target - W[tau, rho] * column).max()))
    if residual > tol:
        return TwoStepMap(False, None, residual)
    return TwoStepMap(True, W, residual)


# ---------------------------------------------------------------------------
# Subsystems
# ---------------------------------------------------------------------------


@dataclass
class SubsystemClosure:
    """rho_z(t + eps) = c_zy rho_y(t) and, when it exists, rho(t + eps) = D rho(t) D^-1"""

    closed: bool
    c: Optional[np.ndarray] = field(repr=False)
    D: Optional[np.ndarray] = field(repr=False)
    residual: float
    samples: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "closed": self.closed,
            "residual": self.residual,
            "samples": self.samples,
            "c": None if self.c is None else self.c.tolist(),
        }


def _operator_matrix(op) -> np.ndarray:
    op = np.asarray(op, dtype=float)
    return np.diag(op) if op.ndim == 1 else op


def _subsystem_rho(coeffs: np.ndarray, generators: Sequence[np.ndarray]) -> np.ndarray:
    R = generators[0].shape[0]
    combined = sum(c * L for c, L in zip(coeffs, generators))
    if all(abs(np.trace(L)) <= 1e-12 for L in generators):
        return (np.eye(R) + combined) / R
    return combined


def _solve_similarity(c: np.ndarray, generators: Sequence[np.ndarray], rng: np.random.Generator) -> Optional[np.ndarray]:
    R = generators[0].shape[0]
    identity = np.eye(R)
    blocks = []
    for y, L_y in enumerate(generators):
        M_y = sum(c[z, y] * L_z for z, L_z in enumerate(generators))
        blocks.append(np.kron(identity, M_y) - np.kron(np.asarray(L_y).T, identity))
    kernel = linalg.null_space(np.vstack(blocks).astype(complex))
    if kernel.shape[1] == 0:
        return None
    weights = rng.standard_normal(kernel.shape[1]) + 1j * rng.standard_normal(kernel.shape[1])
    D = (kernel @ weights if kernel.shape[1] > 1 else kernel[:, 0]).reshape((R, R), order="F")
    if np.linalg.cond(D) > 1e10:
        return None
    D = D / np.abs(np.linalg.eigvals(D)).max()
    # fix the global phase so that the largest entry is real and positive
    pivot = D.flat[np.argmax(np.abs(D))]
    return D * (abs(pivot) / pivot)


def subsystem_closure(S, operators: Sequence, generators: Sequence, samples: Optional[Sequence[np.ndarray]] = None,
                      seed: Optional[int] = None, tol: float = 1e-9) -> SubsystemClosure:
    """
    Decide whether the subsystem rho_z = tr(A'_z rho') evolves without the environment.

    Args:
        S: Step operator (matrix or StepEvolutionOperator)
        operators: Classical operators A'_z (matrices, or diagonals as vectors)
        generators: Subsystem generators L_z in the same order
        samples: Classical density matrices to fit on; by default random pure classical
                 states q_tilde q_bar^T whose subsystem density matrix has a valid diagonal,
                 four times the parameter count
        seed: Sampling seed
        tol: Largest residual accepted as closure

    Returns:
        SubsystemClosure
    """
    S = _matrix(S)
    S_inv = _inverse(S)
    A = [_operator_matrix(op) for op in operators]
    L = [np.asarray(g) for g in generators]
    if len(A) != len(L):
        raise DimensionMismatchError(f"{len(A)} classical operators for {len(L)} generators")
    if any(a.shape != S.shape for a in A):
        raise DimensionMismatchError("classical operators must match the step operator")
    B = [S_inv @ a @ S for a in A]
    n = len(A)
    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)

    if samples is None:
        wanted = 4 * n * n
        samples = []
        attempts = 0
        while len(samples) < wanted and attempts < 100 * wanted:
            attempts += 1
            q_tilde = rng.random(S.shape[0]) + 0.05
            q_bar = rng.random(S.shape[0]) + 0.05
            rho = np.outer(q_tilde, q_bar) / float(q_bar @ q_tilde)
            sub = _subsystem_rho(np.array([np.trace(a @ rho) for a in A]), L)
            if np.real(np.diag(sub)).min() >= -POSITIVITY_TOL:
                samples.append(rho)
    if not samples:
        raise InvalidDistributionError("no admissible classical density matrices to fit on")

    X = np.array([[np.trace(a @ rho) for a in A] for rho in samples])
    Y = np.array([[np.trace(b @ rho) for b in B] for rho in samples])
    coef, *_ = np.linalg.lstsq(X, Y, rcond=None)
    c = coef.T
    residual = float(np.abs(X @ coef - Y).max())
    closed = residual <= tol
    logger.debug(f"Subsystem fit on {len(samples)} samples: residual {residual:.3e}")
    if not closed:
        return SubsystemClosure(False, None, None, residual, len(samples))
    D = _solve_similarity(c, L, rng)
    return SubsystemClosure(True, c, D, residual, len(samples))


def direct_subsystem_operators(M: int = 3) -> List[np.ndarray]:
    """Diagonal spin operators A'_(k) = diag(s_k) of the direct single-qubit map."""
    table = spin_table(M)
    return [table[:, k] for k in range(M)]


def partial_trace_operators(R: int, env: int) -> Tuple[List[np.ndarray], List[np.ndarray]]:
    """
    Operators realizing the partial trace over an environment of size env.

    Returns (A'_(ab), L_ab) with (A'_(ab))_{alpha lambda, beta sigma} = delta_{a beta} delta_{b alpha}
    delta_{lambda sigma} and L_ab the matrix units.
    """
    operators, generators = [], []
    for a in range(R):
        for b in range(R):
            unit = np.zeros((R, R))
            unit[a, b] = 1.0
            operators.append(np.kron(unit.T, np.eye(env)))
            generators.append(unit)
    return operators, generators


# ---------------------------------------------------------------------------
# No-cloning
# ---------------------------------------------------------------------------


@dataclass
class NoCloningReport:
    """Cloning outcome for two states with a shared ancilla"""

    cloned_first: bool
    cloned_second: bool
    overlap: float
    consistent: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "cloned_first": self.cloned_first,
            "cloned_second": self.cloned_second,
            "overlap": self.overlap,
            "consistent": self.consistent,
        }


def copy_operator(bits: int = 1) -> StepEvolutionOperator:
    """
    Copy permutation on 2*bits spins: ancilla spin bits+j flips where data spin j is +1.

    With the ancilla prepared all -1 it ends as a copy of the data.
    """
    actions = [SpinAction(j) for j in range(1, bits + 1)]
    actions += [SpinAction(bits + j, -1, (j, 1)) for j in range(1, bits + 1)]
    op = rule_to_permutation(SpinTransformRule(tuple(actions)), 2 * bits, name="copy")
    return StepEvolutionOperator(op.matrix, "permutation", name="copy")


def _clones(S: np.ndarray, S_inv: np.ndarray, pair: WaveFunctionPair, ancilla: WaveFunctionPair, tol: float) -> bool:
    forward = S @ np.kron(pair.q_tilde, ancilla.q_tilde)
    backward = np.kron(pair.q_bar, ancilla.q_bar) @ S_inv
    return bool(
        np.abs(forward - np.kron(pair.q_tilde, pair.q_tilde)).max() <= tol
        and np.abs(backward - np.kron(pair.q_bar, pair.q_bar)).max() <= tol
    )


def no_cloning_check(S, first: WaveFunctionPair, second: WaveFunctionPair, ancilla: WaveFunctionPair,
                     tol: float = 1e-9) -> NoCloningReport:
    """
    Check whether S clones both states; when it does, their overlap <q_bar_2|q_tilde_1>
    must equal zero or one.
    """
    S = _matrix(S)
    S_inv = _inverse(S)
    if abs(ancilla.overlap - 1.0) > tol:
        raise InvalidDistributionError(f"ancilla must be normalized, got overlap {ancilla.overlap}")
    if S.shape[0] != first.q_tilde.size * ancilla.q_tilde.size:
        raise DimensionMismatchError("step operator does not act on state x ancilla")
    cloned_first = _clones(S, S_inv, first, ancilla, tol)
    cloned_second = _clones(S, S_inv, second, ancilla, tol)
    overlap = float(second.q_bar @ first.q_tilde)
    consistent = not (cloned_first and cloned_second) or min(abs(overlap), abs(overlap - 1.0)) <= tol
    return NoCloningReport(cloned_first, cloned_second, overlap, consistent)


# ---------------------------------------------------------------------------
# Operator-level checks
# ---------------------------------------------------------------------------


@dataclass
class AlgebraicReport:
    """Residuals of S A'_y = sign A'_z S for every relation a gate implies"""

    gate: str
    relations: List[Dict[str, Any]]
    square_commutator: float

    @property
    def violated(self) -> List[Dict[str, Any]]:
        return [r for r in self.relations if r["residual"] > 1e-10]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "gate": self.gate,
            "relations": self.relations,
            "violated": len(self.violated),
            "square_commutator": self.square_commutator,
        }


def algebraic_checks(S, gate_name: str = "CNOT", targets: Sequence[int] = (1, 2),
                     bq_map: Optional[BitQuantumMap] = None) -> AlgebraicReport:
    """
    Operator-level realization test: rho'_z = sign rho_y needs S A'_y = sign A'_z S.

    For CNOT on the correlation map no S satisfies all relations, so at least one
    relation is always reported violated.
    """
    bq_map = bq_map or correlation_map(2)
    S = _matrix(S)
    if S.shape[0] != 1 << bq_map.M:
        raise DimensionMismatchError(f"step operator acts on {S.shape[0]} states, map on {1 << bq_map.M}")
    spec = gate(gate_name, *targets, Q=bq_map.Q)
    b = coefficient_map(spec)
    basis = pauli_basis(bq_map.Q)
    A = [np.diag(row) for row in bq_map.observables]
    relations = []
    for z in range(basis.size):
        y = int(np.argmax(np.abs(b[z])))
        if abs(abs(b[z, y]) - 1) > 1e-9:
            continue
        sign = float(np.sign(b[z, y]))
        residual = float(np.abs(S @ A[y] - sign * A[z] @ S).max())
        prefix = "-" if sign < 0 else ""
        relations.append({
            "relation": f"S A'({basis.label_string(y)}) = {prefix}A'({basis.label_string(z)}) S",
            "residual": residual,
        })
    S2 = S @ S
    square = max(float(np.abs(S2 @ a - a @ S2).max()) for a in A)
    return AlgebraicReport(spec.name, relations, square)


@dataclass
class EquipartitionReport:
    """Whether T leaves the all-ones matrix E invariant"""

    preserves: bool
    row_sums_ok: bool
    column_sums_ok: bool
    residual: float

    @property
    def sum_conditions(self) -> bool:
        return self.row_sums_ok and self.column_sums_ok

    def to_dict(self) -> Dict[str, Any]:
        return {
            "preserves": self.preserves,
            "row_sums_ok": self.row_sums_ok,
            "column_sums_ok": self.column_sums_ok,
            "residual": self.residual,
        }


def equipartition_check(T, tol: float = 1e-10) -> EquipartitionReport:
    """T E T^-1 = E, compared with unit row sums of T and unit column sums of T^-1."""
    T = _matrix(T)
    T_inv = _inverse(T)
    E = np.ones_like(T)
    residual = float(np.abs(T @ E @ T_inv - E).max())
    rows = bool(np.abs(T.sum(axis=1) - 1).max() <= tol)
    columns = bool(np.abs(T_inv.sum(axis=0) - 1).max() <= tol)
    return EquipartitionReport(residual <= tol, rows, columns, residual)


def partial_equipartition_state(sigma3: int, rho1: int) -> ClassicalDensityMatrix:
    """
    Pure classical state with s3(1) = sigma3, s1(2) = rho1 and equipartition in the other
    four spins; realizes rho_30 = sigma3, rho_01 = rho1, rho_31 = sigma3 rho1.
    """
    if sigma3 not in (1, -1) or rho1 not in (1, -1):
        raise InvalidDistributionError("sigma3 and rho1 must be +1 or -1")
    table = spin_table(6)
    mask = (table[:, correlation_spin(1, 3) - 1] == sigma3) & (table[:, correlation_spin(2, 1) - 1] == rho1)
    q = np.where(mask, 0.25, 0.0)
    return ClassicalDensityMatrix.pure(q, q)


def spectrum_report(S, max_period: int = 256) -> SpectrumReport:
    return spectrum_period(_matrix(S), max_period=max_period)
