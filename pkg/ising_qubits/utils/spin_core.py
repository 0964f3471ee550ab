"""
Spin configurations, probability distributions and classical wave functions
"""

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, Sequence, Tuple, Union

import numpy as np

from .base import (
    PROB_TOL,
    RENORM_TOL,
    DimensionMismatchError,
    InvalidDistributionError,
    check_spin_count,
)

logger = logging.getLogger(__name__)


def _frozen(array) -> np.ndarray:
    out = np.array(array, dtype=float)
    out.setflags(write=False)
    return out


def _spin_count_for(length: int) -> int:
    M = int(length).bit_length() - 1
    if length < 2 or 1 << M != length:
        raise DimensionMismatchError(f"vector length {length} is not 2**M for any M >= 1")
    return M


def config_index(bits: Sequence[int]) -> int:
    """
    Index of a spin configuration; spin 1 is the most significant bit.

    Args:
        bits: Occupation numbers b_1..b_M, each 0 or 1

    Returns:
        tau in [0, 2**M)
    """
    if len(bits) < 1:
        raise DimensionMismatchError("a configuration needs at least one spin")
    tau = 0
    for b in bits:
        if b not in (0, 1):
            raise DimensionMismatchError(f"bit values must be 0 or 1, got {b}")
        tau = (tau << 1) | int(b)
    return tau


def index_config(index: int, M: int) -> Tuple[int, ...]:
    """Inverse of config_index."""
    if M < 1 or not 0 <= index < (1 << M):
        raise DimensionMismatchError(f"index {index} out of range for M={M}")
    return tuple((index >> (M - 1 - g)) & 1 for g in range(M))


@lru_cache(maxsize=None)
def spin_table(M: int) -> np.ndarray:
    """Matrix of spin values s_gamma(tau) = 2 b_gamma - 1, shape (2**M, M)."""
    check_spin_count(M)
    tau = np.arange(1 << M)[:, None]
    shifts = (M - 1 - np.arange(M))[None, :]
    table = 2 * ((tau >> shifts) & 1) - 1
    table = table.astype(float)
    table.setflags(write=False)
    return table


@dataclass(frozen=True)
class SpinConfig:
    """A single configuration of M Ising spins"""

    bits: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        config_index(self.bits)

    @property
    def M(self) -> int:
        return len(self.bits)

    @property
    def spins(self) -> Tuple[int, ...]:
        return tuple(2 * b - 1 for b in self.bits)

    @property
    def index(self) -> int:
        return config_index(self.bits)

    @classmethod
    def from_index(cls, index: int, M: int) -> "SpinConfig":
        return cls(index_config(index, M))

    @classmethod
    def from_spins(cls, spins: Sequence[int]) -> "SpinConfig":
        return cls(tuple((int(s) + 1) // 2 for s in spins))


@dataclass(frozen=True, eq=False)
class ProbabilityDistribution:
    """Probabilities p_tau over the 2**M configurations of M spins"""

    M: int
    p: np.ndarray = field(repr=False)

    def __post_init__(self):
        check_spin_count(self.M)
        p = np.asarray(self.p, dtype=float)
        if p.shape != (1 << self.M,):
            raise DimensionMismatchError(f"expected {1 << self.M} probabilities for M={self.M}, got shape {p.shape}")
        if p.min() < -PROB_TOL:
            raise InvalidDistributionError(f"negative probability {p.min():.3e} at index {int(p.argmin())}")
        p = np.clip(p, 0.0, None)
        total = p.sum()
        if abs(total - 1.0) > PROB_TOL:
            raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
        object.__setattr__(self, "p", _frozen(p))

    @classmethod
    def from_array(cls, p, renormalize: bool = False) -> "ProbabilityDistribution":
        """
        Build a distribution from raw values.

        Args:
            p: Vector of length 2**M
            renormalize: Rescale when the sum is within RENORM_TOL of one

        Returns:
            ProbabilityDistribution
        """
        p = np.asarray(p, dtype=float)
        M = _spin_count_for(p.size)
        if renormalize:
            if p.min() < -PROB_TOL:
                raise InvalidDistributionError(f"negative probability {p.min():.3e} at index {int(p.argmin())}")
            p = np.clip(p, 0.0, None)
            total = p.sum()
            if abs(total - 1.0) > RENORM_TOL:
                raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
            p = p / total
        return cls(M, p)

    @classmethod
    def uniform(cls, M: int) -> "ProbabilityDistribution":
        check_spin_count(M)
        return cls(M, np.full(1 << M, 1.0 / (1 << M)))

    @classmethod
    def delta(cls, M: int, index: int) -> "ProbabilityDistribution":
        check_spin_count(M)
        p = np.zeros(1 << M)
        p[index] = 1.0
        return cls(M, p)

    def to_json(self) -> Dict[str, Any]:
        return {"M": self.M, "p": [float(x) for x in self.p]}

    @classmethod
    def from_json(cls, data: Union[str, Dict[str, Any]]) -> "ProbabilityDistribution":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            M, p = int(data["M"]), data["p"]
        except (KeyError, TypeError) as e:
            raise InvalidDistributionError(f"distribution JSON needs 'M' and 'p': {str(e)}")
        return cls(M, np.asarray(p, dtype=float))

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(["index", "probability"])
        for tau, value in enumerate(self.p):
            writer.writerow([tau, repr(float(value))])
        return buffer.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ProbabilityDistribution":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or [c.strip() for c in rows[0]] != ["index", "probability"]:
            raise InvalidDistributionError("CSV header must be 'index,probability'")
        values = {}
        for row in rows[1:]:
            if not row:
                continue
            values[int(row[0])] = float(row[1])
        p = np.zeros(len(values))
        for tau, value in values.items():
            if not 0 <= tau < p.size:
                raise InvalidDistributionError(f"CSV index {tau} out of range")
            p[tau] = value
        return cls(_spin_count_for(p.size), p)


@dataclass(frozen=True, eq=False)
class WaveFunctionPair:
    """Forward wave function q_tilde and conjugate wave function q_bar"""

    q_tilde: np.ndarray = field(repr=False)
    q_bar: np.ndarray = field(repr=False)

    def __post_init__(self):
        q_tilde = _frozen(self.q_tilde)
        q_bar = _frozen(self.q_bar)
        if q_tilde.ndim != 1 or q_tilde.shape != q_bar.shape:
            raise DimensionMismatchError(f"wave function shapes differ: {q_tilde.shape} vs {q_bar.shape}")
        _spin_count_for(q_tilde.size)
        object.__setattr__(self, "q_tilde", q_tilde)
        object.__setattr__(self, "q_bar", q_bar)

    @property
    def M(self) -> int:
        return _spin_count_for(self.q_tilde.size)

    @property
    def overlap(self) -> float:
        return float(self.q_tilde @ self.q_bar)


@dataclass(frozen=True, eq=False)
class NormalizedClassicalWaveFunction:
    """Real unit vector q whose squares are the local probabilities"""

    q: np.ndarray = field(repr=False)

    def __post_init__(self):
        q = _frozen(self.q)
        _spin_count_for(q.size)
        norm = float(q @ q)
        if abs(norm - 1.0) > PROB_TOL * max(1, q.size):
            raise InvalidDistributionError(f"classical wave function has squared norm {norm!r}")
        object.__setattr__(self, "q", q)

    @property
    def M(self) -> int:
        return _spin_count_for(self.q.size)

    @classmethod
    def normalized(cls, q) -> "NormalizedClassicalWaveFunction":
        q = np.asarray(q, dtype=float)
        norm = np.linalg.norm(q)
        if norm == 0:
            raise InvalidDistributionError("cannot normalize the zero wave function")
        return cls(q / norm)


def _check_spins(M: int, spins: Sequence[int]) -> Tuple[int, ...]:
    spins = tuple(int(g) for g in spins)
    if not spins:
        raise DimensionMismatchError("expectation needs a nonempty spin subset")
    bad = [g for g in spins if not 1 <= g <= M]
    if bad:
        raise DimensionMismatchError(f"spin indices {bad} out of range 1..{M}")
    return spins


def spin_product(M: int, spins: Sequence[int]) -> np.ndarray:
    """Values of the product of the given spins on every configuration."""
    spins = _check_spins(M, spins)
    return np.prod(spin_table(M)[:, [g - 1 for g in spins]], axis=1)


def expectation(dist: ProbabilityDistribution, spins: Sequence[int]) -> float:
    """
    Expectation value of a product of spins.

    Args:
        dist: Probability distribution over M spins
        spins: 1-based spin indices; repeated indices square to one

    Returns:
        <prod s_gamma>
    """
    value = float(dist.p @ spin_product(dist.M, spins))
    return float(np.clip(value, -1.0, 1.0))


def distribution_from_pair(pair: WaveFunctionPair) -> ProbabilityDistribution:
    """Local probabilities p_tau = q_tilde_tau q_bar_tau."""
    p = pair.q_tilde * pair.q_bar
    if p.min() < -PROB_TOL:
        raise InvalidDistributionError(
            f"boundary data gives negative probability {p.min():.3e} at index {int(p.argmin())}"
        )
    return ProbabilityDistribution.from_array(p, renormalize=True)


def distribution_from_normalized(q: NormalizedClassicalWaveFunction) -> ProbabilityDistribution:
    """Local probabilities p_tau = q_tau**2."""
    return ProbabilityDistribution.from_array(q.q ** 2, renormalize=True)


def correlation_bounds(dist: ProbabilityDistribution, g: int, d: int) -> Tuple[float, float, float]:
    """
    Two-spin correlation with the bounds allowed by the one-spin expectations.

    Returns:
        (lower, <s_g s_d>, upper)
    """
    sg, sd = expectation(dist, [g]), expectation(dist, [d])
    return -1.0 + abs(sg + sd), expectation(dist, [g, d]), 1.0 - abs(sg - sd)


def random_distribution(M: int, rng: np.random.Generator, concentration: float = 1.0) -> ProbabilityDistribution:
    """Dirichlet-distributed random probabilities over 2**M configurations."""
    check_spin_count(M)
    return ProbabilityDistribution.from_array(rng.dirichlet(np.full(1 << M, concentration)), renormalize=True)
