"""
Single qubits realized by continuous classical variables: the Gaussian model, the
rotation-invariant half-space model, the particle on a circle and continuous spins
"""

import concurrent.futures
import csv
import io
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, linalg, optimize, special
from scipy.spatial.transform import Rotation

from .base import DEFAULT_SEED, DimensionMismatchError, InvalidDistributionError, QuantumConditionError
from .classical_ops import UniqueJumpOp
from .qcond import two_level_check
from .quantum_core import PAULI, pauli_basis, random_unitary

logger = logging.getLogger(__name__)

UNIT_TOL = 1e-12
FIT_TOL = 1e-8
MIN_FIT_SAMPLES = 8

CSV_HEADER = ("e_x", "e_y", "e_z", "estimate", "stderr", "exact", "method")


def _unit(e, name: str = "e") -> np.ndarray:
    e = np.array(e, dtype=float)
    if e.shape != (3,):
        raise DimensionMismatchError(f"{name} must be a 3-vector, got shape {e.shape}")
    if abs(np.linalg.norm(e) - 1.0) > UNIT_TOL:
        raise DimensionMismatchError(f"{name} must be a unit vector, |{name}| = {np.linalg.norm(e)}")
    e.setflags(write=False)
    return e


@dataclass(frozen=True, eq=False)
class HalfSpaceSpin:
    """s(e; x) = +1 for x.e > 0 and -1 for x.e < 0"""

    e: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "e", _unit(self.e))

    def __call__(self, x) -> np.ndarray:
        return np.sign(np.asarray(x, dtype=float) @ self.e)


@dataclass
class Estimate:
    """A classical expectation value next to the quantum value it should reproduce"""

    value: float
    stderr: float
    exact: float
    method: str

    @property
    def error(self) -> float:
        return abs(self.value - self.exact)

    def to_dict(self) -> Dict[str, Any]:
        return {"value": self.value, "stderr": self.stderr, "exact": self.exact, "method": self.method}


def _shard_sizes(n: int, shards: int) -> List[int]:
    shards = max(1, min(shards, n))
    base, extra = divmod(n, shards)
    return [base + (1 if i < extra else 0) for i in range(shards)]


def _sharded_mean(draw: Callable[[np.random.Generator, int], np.ndarray], n_samples: int,
                  seed: Optional[int], shards: int) -> Tuple[float, float]:
    """
    Mean and standard error of a +-1 estimator over independent generator streams.

    Shard i uses the stream seeded with seed + i; the reduction is ordered, so the result
    only depends on (seed, shards, n_samples).
    """
    if n_samples < 2:
        raise ValueError(f"Monte Carlo needs at least 2 samples, got {n_samples}")
    seed = DEFAULT_SEED if seed is None else seed
    sizes = _shard_sizes(n_samples, shards)

    def run(index: int) -> Tuple[float, float]:
        values = draw(np.random.default_rng(seed + index), sizes[index])
        return float(values.sum()), float((values * values).sum())

    with concurrent.futures.ThreadPoolExecutor(max_workers=len(sizes)) as executor:
        partials = list(executor.map(run, range(len(sizes))))
    logger.debug(f"Monte Carlo over {len(sizes)} shards, {n_samples} samples, seed {seed}")

    total = sum(s for s, _ in partials)
    total_sq = sum(q for _, q in partials)
    mean = total / n_samples
    variance = max(total_sq / n_samples - mean * mean, 0.0) * n_samples / (n_samples - 1)
    return mean, math.sqrt(variance / n_samples)


# ---------------------------------------------------------------------------
# Gaussian model
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """
    p(x) = (a sqrt(pi))**-3 exp(-|x - x_bar|**2 / a**2) over three real variables.

    a == 0 is the point-like limit delta(x - x_bar).
    """

    x_bar: np.ndarray
    a: float

    def __post_init__(self):
        x_bar = np.array(self.x_bar, dtype=float)
        if x_bar.shape != (3,):
            raise DimensionMismatchError(f"x_bar must be a 3-vector, got shape {x_bar.shape}")
        if self.a < 0:
            raise InvalidDistributionError(f"width must be nonnegative, got {self.a}")
        x_bar.setflags(write=False)
        object.__setattr__(self, "x_bar", x_bar)
        object.__setattr__(self, "a", float(self.a))
        if self.a == 0:
            logger.warning(f"Gaussian model at x_bar={x_bar.tolist()} taken in the point-like limit a -> 0")

    @property
    def point_like(self) -> bool:
        return self.a == 0

    @property
    def rho(self) -> np.ndarray:
        return np.array([gaussian_spin_expectation(self, k) for k in (1, 2, 3)])

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.normal(self.x_bar, self.a / np.sqrt(2), size=(n, 3))


def _signed_erf(t: float, a: float) -> float:
    if a == 0:
        return float(np.sign(t))
    return float(special.erf(t / a))


def gaussian_spin_expectation(model: GaussianModel, k: int) -> float:
    """<s_k> = erf(x_bar_k / a); sign(x_bar_k) in the point-like limit."""
    if k not in (1, 2, 3):
        raise DimensionMismatchError(f"spin index must be 1, 2 or 3, got {k}")
    return _signed_erf(model.x_bar[k - 1], model.a)


def gaussian_purity(model: GaussianModel) -> float:
    """P = sum_k erf(x_bar_k / a)**2; the quantum condition is P <= 1."""
    return float(np.sum(model.rho ** 2))


def solve_width_for_pure(x_bar, tol: float = 1e-10) -> float:
    """
    Width a with P(a) = 1 for the given center.

    P decreases from the number of nonzero components (a -> 0) to zero (a -> inf), so a
    root exists when at least two components differ from zero. A single nonzero component
    reaches P = 1 only in the point-like limit and returns 0.

    Raises:
        QuantumConditionError: x_bar = 0, P stays zero
    """
    x_bar = np.asarray(x_bar, dtype=float)
    if x_bar.shape != (3,):
        raise DimensionMismatchError(f"x_bar must be a 3-vector, got shape {x_bar.shape}")
    nonzero = np.abs(x_bar[np.abs(x_bar) > 0])
    if nonzero.size == 0:
        raise QuantumConditionError("x_bar = 0 is maximally mixed; no width gives a pure state")
    if nonzero.size == 1:
        logger.warning(f"x_bar={x_bar.tolist()} is pure only in the point-like limit")
        return 0.0

    def excess(a: float) -> float:
        return float(np.sum(special.erf(x_bar / a) ** 2)) - 1.0

    # erf(10) == 1 in double precision; beyond 2|x_bar| the linear bound keeps P < 1
    lo, hi = float(nonzero.min()) / 10.0, 2.0 * float(np.linalg.norm(x_bar))
    a = optimize.brentq(excess, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    if abs(excess(a)) > tol:
        raise QuantumConditionError(f"width search did not converge: P(a) - 1 = {excess(a)}")
    logger.debug(f"Pure-state width for x_bar={x_bar.tolist()}: a={a}")
    return float(a)


def gaussian_halfspace_expectation(model: GaussianModel, e, method: str = "closed", n_samples: int = 100_000,
                                   seed: Optional[int] = None, shards: int = 1) -> Estimate:
    """
    <s(e)> of the half-space spin under the Gaussian model.

    x.e is normal with mean x_bar.e and variance a**2/2, so the closed form is erf(x_bar.e / a).
    The quantum value it is compared with is e.rho with rho_k = erf(x_bar_k / a).
    """
    spin = HalfSpaceSpin(e)
    exact = float(spin.e @ model.rho)
    if method == "closed":
        return Estimate(_signed_erf(float(model.x_bar @ spin.e), model.a), 0.0, exact, method)
    if method == "montecarlo":
        mean, stderr = _sharded_mean(lambda rng, n: spin(model.sample(rng, n)), n_samples, seed, shards)
        return Estimate(mean, stderr, exact, method)
    raise ValueError(f"unknown method {method!r}, expected 'closed' or 'montecarlo'")


def gaussian_halfspace_mismatch(model: GaussianModel, e) -> float:
    """
    Quantum minus classical expectation for the spin in direction e.

    Along the direction of a pure state this is 1 - <s(e)> = 2 * (weight of the lower half-space).
    """
    estimate = gaussian_halfspace_expectation(model, e)
    return estimate.exact - estimate.value


def pure_diagonal_model() -> GaussianModel:
    """Pure state rho = (1/sqrt2, 1/sqrt2, 0) with the width fixed by erf(1/(sqrt2 a)) = 1/sqrt2."""
    x_bar = np.array([1.0, 1.0, 0.0]) / np.sqrt(2)
    return GaussianModel(x_bar, solve_width_for_pure(x_bar))


# ---------------------------------------------------------------------------
# Rotation-invariant model
# ---------------------------------------------------------------------------


def cubic_exponential(r: float) -> float:
    return r ** 3 * math.exp(-r)


@dataclass(frozen=True, eq=False)
class RotationInvariantModel:
    """
    p(rho, x) = |rho| C p(r) (rho_hat.f) theta(rho_hat.f) + (1 - |rho|) C/4 p(r), x = r f.

    The first term realizes the pure state rho_hat, the second is isotropic and carries no
    spin; C normalizes the radial profile. Invariant under joint rotations of rho and x.
    """

    rho: np.ndarray
    radial: Callable[[float], float] = field(default=cubic_exponential, repr=False)
    r_max: float = 80.0

    def __post_init__(self):
        rho = np.array(self.rho, dtype=float)
        if rho.shape != (3,):
            raise DimensionMismatchError(f"rho must be a 3-vector, got shape {rho.shape}")
        if np.linalg.norm(rho) > 1 + UNIT_TOL:
            raise QuantumConditionError(f"|rho| = {np.linalg.norm(rho)} exceeds one")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def length(self) -> float:
        return float(min(np.linalg.norm(self.rho), 1.0))

    @property
    def direction(self) -> Optional[np.ndarray]:
        n = np.linalg.norm(self.rho)
        return self.rho / n if n > 0 else None

    @cached_property
    def normalization(self) -> float:
        """C with C pi int r**2 p(r) dr = 1."""
        moment, _ = integrate.quad(lambda r: r * r * self.radial(r), 0.0, np.inf)
        if moment <= 0:
            raise InvalidDistributionError("radial profile has no weight")
        return 1.0 / (np.pi * moment)

    @cached_property
    def reduced_weight(self) -> float:
        return radial_normalization(self).reduced

    def density(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        r = np.linalg.norm(x, axis=1)
        profile = np.array([self.radial(float(v)) for v in r]) * self.normalization
        isotropic = (1.0 - self.length) * profile / 4.0
        if self.direction is None:
            return isotropic
        cos = np.divide(x @ self.direction, r, out=np.zeros_like(r), where=r > 0)
        return self.length * profile * np.clip(cos, 0.0, None) + isotropic

    @cached_property
    def _radius_quantiles(self) -> Tuple[np.ndarray, np.ndarray]:
        grid = np.linspace(0.0, self.r_max, 20001)
        weight = grid ** 2 * np.array([self.radial(float(r)) for r in grid])
        cdf = integrate.cumulative_trapezoid(weight, grid, initial=0.0)
        return cdf / cdf[-1], grid

    def sample_radius(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.radial is cubic_exponential:
            # r**2 * r**3 exp(-r) is a Gamma(6) density
            return rng.gamma(6.0, size=n)
        cdf, grid = self._radius_quantiles
        return np.interp(rng.random(n), cdf, grid)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """
        Exact sampler: with probability |rho| a direction with density cos(theta) sin(theta) about
        rho_hat (sin**2 theta is uniform), otherwise a uniform direction; radius from the profile.
        """
        u = rng.random(n)
        phi = rng.uniform(0.0, 2 * np.pi, n)
        pure = rng.random(n) < self.length
        cos_theta = np.where(pure, np.sqrt(1.0 - u), 2.0 * u - 1.0)
        sin_theta = np.sqrt(np.clip(1.0 - cos_theta ** 2, 0.0, None))
        axis = self.direction if self.direction is not None else np.array([0.0, 0.0, 1.0])
        e1, e2 = _orthonormal_complement(axis)
        f = (cos_theta[:, None] * axis + (sin_theta * np.cos(phi))[:, None] * e1
             + (sin_theta * np.sin(phi))[:, None] * e2)
        return f * self.sample_radius(rng, n)[:, None]


def _orthonormal_complement(axis: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    helper = np.array([1.0, 0.0, 0.0]) if abs(axis[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    e1 = np.cross(axis, helper)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(axis, e1)


@dataclass
class RadialNormalization:
    """int dR R**2 h(R) with h(R) = int dx2 C p(r)/r; a normalized pure part needs 1/2"""

    reduced: float
    tol: float = 1e-8

    @property
    def total(self) -> float:
        """Weight of the pure part, int dx1 dx3 h(R) x3 theta(x3) = 2 int dR R**2 h(R)."""
        return 2.0 * self.reduced

    @property
    def ok(self) -> bool:
        return abs(self.reduced - 0.5) <= self.tol

    def to_dict(self) -> Dict[str, Any]:
        return {"reduced": self.reduced, "total": self.total, "ok": self.ok}


def radial_normalization(model: RotationInvariantModel) -> RadialNormalization:
    """Integrate x2 out of the radial profile and measure the weight left in the (x1, x3) plane."""
    C = model.normalization

    def integrand(x2: float, R: float) -> float:
        r = math.hypot(R, x2)
        if r == 0:
            return 0.0
        return R * R * C * model.radial(r) / r

    # h(R) is even in x2
    half, _ = integrate.dblquad(integrand, 0.0, np.inf, 0.0, np.inf, epsabs=1e-12, epsrel=1e-10)
    return RadialNormalization(2.0 * half)


def _angular_integral(phi: float) -> float:
    """int_{-pi/2}^{pi/2} d alpha cos(alpha) sign(cos(alpha - phi)), which is 2 cos(phi)."""
    kink = phi - np.pi / 2
    points = [kink] if -np.pi / 2 < kink < np.pi / 2 else None
    value, _ = integrate.quad(lambda a: math.cos(a) * np.sign(math.cos(a - phi)), -np.pi / 2, np.pi / 2,
                              points=points, epsabs=1e-13, epsrel=1e-12)
    return value


def rotation_invariant_expectation(model: RotationInvariantModel, e, method: str = "quadrature",
                                   n_samples: int = 100_000, seed: Optional[int] = None,
                                   shards: int = 1) -> Estimate:
    """
    <s(e)> under the rotation-invariant model; equals rho.e.

    quadrature rotates rho_hat to the third axis and e into the (1, 3) plane, integrates x2 out
    of the radial profile and does the remaining angular integral. montecarlo averages s(e)
    over exact samples.
    """
    spin = HalfSpaceSpin(e)
    exact = float(spin.e @ model.rho)
    if method == "quadrature":
        direction = model.direction
        if direction is None:
            return Estimate(0.0, 0.0, exact, method)
        phi = float(np.arccos(np.clip(direction @ spin.e, -1.0, 1.0)))
        reduced = model.reduced_weight
        value = model.length * reduced * _angular_integral(phi)
        return Estimate(float(value), 0.0, exact, method)
    if method in ("montecarlo", "monte-carlo"):
        mean, stderr = _sharded_mean(lambda rng, n: spin(model.sample(rng, n)), n_samples, seed, shards)
        return Estimate(mean, stderr, exact, "montecarlo")
    raise ValueError(f"unknown method {method!r}, expected 'quadrature' or 'montecarlo'")


# ---------------------------------------------------------------------------
# Particle on a circle
# ---------------------------------------------------------------------------

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class CircleModel:
    """
    p(alpha) = r/2 cos(alpha - psi) on the half-circle around psi, plus (1 - r)/(2 pi)
    """

    psi: float
    r: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.r <= 1.0:
            raise QuantumConditionError(f"circle amplitude must lie in [0, 1], got {self.r}")
        object.__setattr__(self, "psi", float(self.psi) % TWO_PI)

    def density(self, alpha) -> np.ndarray:
        delta = np.cos(np.asarray(alpha, dtype=float) - self.psi)
        return self.r * 0.5 * np.clip(delta, 0.0, None) + (1.0 - self.r) / TWO_PI

    def mass(self, lo: float, hi: float) -> float:
        """Probability of lo <= alpha <= hi for hi - lo <= 2 pi."""
        return self.r * _cos_mass(lo - self.psi, hi - self.psi) + (1.0 - self.r) * (hi - lo) / TWO_PI


def _cos_mass(lo: float, hi: float) -> float:
    """int_lo^hi 1/2 cos(beta) theta(cos beta) d beta for an interval shorter than 2 pi."""
    shift = TWO_PI * math.floor((lo + math.pi / 2) / TWO_PI)
    lo, hi = lo - shift, hi - shift
    total = 0.0
    for centre in (0.0, TWO_PI):
        a, b = max(lo, centre - math.pi / 2), min(hi, centre + math.pi / 2)
        if b > a:
            total += 0.5 * (math.sin(b - centre) - math.sin(a - centre))
    return total


def circle_expectation(model: CircleModel, phi: float, observable: str = "spin") -> float:
    """
    <n(phi)> is the weight of the half-circle around phi, <s(phi)> = 2 <n(phi)> - 1.

    The result is (1 + r cos(phi - psi))/2 for the occupation number and r cos(phi - psi) for the spin.
    """
    occupation = model.mass(phi - math.pi / 2, phi + math.pi / 2)
    if observable == "occupation":
        return occupation
    if observable == "spin":
        return 2.0 * occupation - 1.0
    raise ValueError(f"unknown observable {observable!r}, expected 'spin' or 'occupation'")


def circle_rotate(model: CircleModel, gamma: float) -> CircleModel:
    """p(psi; alpha) -> p(psi + gamma; alpha)."""
    return CircleModel(model.psi + gamma, model.r)


@dataclass(frozen=True, eq=False)
class DiscreteCircle:
    """Probabilities of N bins centred at alpha_j = 2 pi j / N"""

    angles: np.ndarray
    p: np.ndarray

    @property
    def N(self) -> int:
        return int(self.p.size)

    def expectation(self, phi: float) -> float:
        """<s(phi)> with each bin's mass spread uniformly over the bin."""
        half = math.pi / self.N
        distance = np.abs(np.remainder(self.angles - phi + math.pi, TWO_PI) - math.pi)
        inside = np.clip((math.pi / 2 - distance + half) / (2 * half), 0.0, 1.0)
        return float(2.0 * self.p @ inside - 1.0)

    def evolve(self, op: UniqueJumpOp) -> "DiscreteCircle":
        return DiscreteCircle(self.angles, op.apply_vector(self.p))


def discrete_circle(model: CircleModel, N: int = 256) -> DiscreteCircle:
    """Bin the circle model into N = 2**M particle positions."""
    if N < 2 or N & (N - 1):
        raise DimensionMismatchError(f"bin count {N} must be a power of two")
    angles = TWO_PI * np.arange(N) / N
    half = math.pi / N
    p = np.array([model.mass(a - half, a + half) for a in angles])
    return DiscreteCircle(angles, p / p.sum())


def discrete_rotation(N: int, steps: int = 1) -> UniqueJumpOp:
    """
    Zero-temperature limit of L = -beta sum (delta(alpha', alpha + gamma) - 1), gamma = 2 pi steps / N.

    Each position jumps to the one gamma further on: a cyclic permutation of the N positions.
    """
    if N < 2 or N & (N - 1):
        raise DimensionMismatchError(f"bin count {N} must be a power of two")
    perm = (np.arange(N) + steps) % N
    return UniqueJumpOp(perm, name=f"rotate{steps}/{N}")


# ---------------------------------------------------------------------------
# Quantum condition for continuous spins
# ---------------------------------------------------------------------------


@dataclass
class ConditionFit:
    """Least-squares fit of <s(e)> to r cos(phi - psi) on a circle or to e.rho on the sphere"""

    kind: str
    rho: np.ndarray
    residual: float
    r: float
    psi: Optional[float] = None
    tol: float = FIT_TOL

    @property
    def harmonic(self) -> bool:
        return self.residual <= self.tol

    @property
    def within_unit(self) -> bool:
        return self.r <= 1.0 + self.tol

    @property
    def ok(self) -> bool:
        return self.harmonic and self.within_unit

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "kind": self.kind,
            "rho": [float(x) for x in self.rho],
            "r": self.r,
            "residual": self.residual,
            "harmonic": self.harmonic,
            "within_unit": self.within_unit,
        }
        if self.psi is not None:
            data["psi"] = self.psi
        return data


def continuous_quantum_condition(directions, values, tol: float = FIT_TOL) -> ConditionFit:
    """
    Fit sampled expectation values to the form a quantum subsystem requires.

    A 1-D array of angles is fitted to rho_1 cos(phi) + rho_3 sin(phi); an (n, 3) array of unit
    vectors to e.rho. The residual is the largest deviation from the fit.
    """
    directions = np.asarray(directions, dtype=float)
    values = np.asarray(values, dtype=float)
    if values.ndim != 1 or directions.shape[0] != values.size:
        raise DimensionMismatchError("need one value per direction")
    if values.size < MIN_FIT_SAMPLES:
        raise DimensionMismatchError(f"need at least {MIN_FIT_SAMPLES} directions, got {values.size}")

    if directions.ndim == 1:
        design = np.column_stack([np.cos(directions), np.sin(directions)])
        kind = "circle"
    elif directions.ndim == 2 and directions.shape[1] == 3:
        design = directions
        kind = "sphere"
    else:
        raise DimensionMismatchError(f"directions must be angles or 3-vectors, got shape {directions.shape}")

    coeffs, *_ = linalg.lstsq(design, values)
    residual = float(np.abs(design @ coeffs - values).max())
    r = float(np.linalg.norm(coeffs))
    psi = float(math.atan2(coeffs[1], coeffs[0])) if kind == "circle" else None
    logger.debug(f"Continuous quantum condition ({kind}): r={r}, residual={residual}")
    return ConditionFit(kind, coeffs, residual, r, psi, tol)


@dataclass(frozen=True, eq=False)
class DirectionRotation:
    """
    Unique jump of continuous spins s'(e) = s(e'), e'_k = e_l O_lk.

    Every direction is mapped to exactly one direction, and the induced map of rho is rho' = O rho.
    """

    O: np.ndarray

    def __post_init__(self):
        O = np.array(self.O, dtype=float)
        if O.shape != (3, 3):
            raise DimensionMismatchError(f"rotation must be 3x3, got {O.shape}")
        if np.abs(O.T @ O - np.eye(3)).max() > 1e-10 or linalg.det(O) < 0:
            raise DimensionMismatchError("matrix is not a proper rotation")
        O.setflags(write=False)
        object.__setattr__(self, "O", O)

    def source(self, e) -> np.ndarray:
        """Direction e' whose spin becomes the new spin in direction e."""
        return self.O.T @ np.asarray(e, dtype=float)

    def apply(self, model: RotationInvariantModel) -> RotationInvariantModel:
        return RotationInvariantModel(self.O @ model.rho, model.radial, model.r_max)

    def unitary(self) -> np.ndarray:
        """U with U tau_l U^dagger = O_kl tau_k, fixed up to the irrelevant overall phase."""
        rotvec = Rotation.from_matrix(self.O).as_rotvec()
        generator = sum(c * P for c, P in zip(rotvec, PAULI[1:]))
        return linalg.expm(-0.5j * generator)


def continuous_unique_jump(rotation) -> DirectionRotation:
    """Rotation of the direction field from a 3x3 matrix or a scipy Rotation."""
    if isinstance(rotation, Rotation):
        rotation = rotation.as_matrix()
    return DirectionRotation(rotation)


@dataclass
class SpotCheck:
    Q: int
    samples: int
    failures: List[int] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_dict(self) -> Dict[str, Any]:
        return {"Q": self.Q, "samples": self.samples, "passed": self.passed, "failures": self.failures}


def two_level_spot_check(Q: int, n: int = 20, seed: Optional[int] = None) -> SpotCheck:
    """
    Rotated generators V L_z V^dagger are two-level observables: their coefficient vectors e
    must pass two_level_check.
    """
    if Q not in (1, 2, 3):
        raise DimensionMismatchError(f"spot checks cover 1 to 3 qubits, got {Q}")
    rng = np.random.default_rng(DEFAULT_SEED if seed is None else seed)
    L = pauli_basis(Q).matrices
    dim = 1 << Q
    report = SpotCheck(Q, n)
    for i in range(n):
        V = random_unitary(dim, rng)
        A = V @ L[rng.integers(len(L))] @ V.conj().T
        e = np.einsum("zab,ba->z", L, A).real / dim
        if not two_level_check(Q, e):
            report.failures.append(i)
    logger.debug(f"Two-level spot checks for Q={Q}: {n - len(report.failures)}/{n} passed")
    return report


def directions_grid(n: int) -> np.ndarray:
    """n unit vectors spread over the sphere on a Fibonacci spiral."""
    if n < 1:
        raise ValueError(f"need at least one direction, got {n}")
    i = np.arange(n) + 0.5
    z = 1.0 - 2.0 * i / n
    radius = np.sqrt(1.0 - z * z)
    angle = np.pi * (3.0 - np.sqrt(5.0)) * i
    grid = np.column_stack([radius * np.cos(angle), radius * np.sin(angle), z])
    return grid / np.linalg.norm(grid, axis=1, keepdims=True)


def _row(e: Sequence[float], estimate: Estimate) -> Tuple[Any, ...]:
    return (float(e[0]), float(e[1]), float(e[2]), estimate.value, estimate.stderr, estimate.exact,
            estimate.method)


def continuous_csv_rows(kind: str, directions: int = 20, rho=(0.0, 0.0, 1.0), n_samples: int = 100_000,
                        seed: Optional[int] = None, shards: int = 1, psi: float = 0.3, r: float = 1.0,
                        bins: int = 256) -> List[Tuple[Any, ...]]:
    """
    Rows (e_x, e_y, e_z, estimate, stderr, exact, method) for one continuous experiment.

    quadrature and montecarlo evaluate the rotation-invariant model at rho, gaussian the pure
    diagonal Gaussian state against its quantum values, circle the binned circle model at psi
    with directions (cos phi, 0, sin phi).
    """
    rows: List[Tuple[Any, ...]] = []
    if kind in ("quadrature", "montecarlo"):
        model = RotationInvariantModel(np.asarray(rho, dtype=float))
        for e in directions_grid(directions):
            rows.append(_row(e, rotation_invariant_expectation(model, e, kind, n_samples, seed, shards)))
    elif kind == "gaussian":
        model = pure_diagonal_model()
        for e in directions_grid(directions):
            rows.append(_row(e, gaussian_halfspace_expectation(model, e)))
    elif kind == "circle":
        circle = CircleModel(psi, r)
        binned = discrete_circle(circle, bins)
        for phi in TWO_PI * np.arange(directions) / directions:
            exact = circle.r * math.cos(phi - circle.psi)
            rows.append(_row((math.cos(phi), 0.0, math.sin(phi)),
                             Estimate(binned.expectation(phi), 0.0, exact, "circle")))
    else:
        raise ValueError(f"unknown continuous experiment {kind!r}")
    return rows


def rows_to_csv(rows: Sequence[Tuple[Any, ...]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for row in rows:
        writer.writerow([f"{v:.15g}" if isinstance(v, float) else v for v in row])
    return buffer.getvalue()
