"""
Verification presets reproducing the worked examples and no-go results, and the chain-file
format read by the spectrum command
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .base import DEFAULT_SEED, CircuitSyntaxError, InvalidDistributionError, SimulationError
from .bitq_maps import (
    correlation_map,
    correlation_spin,
    correlation_supported_family,
    direct_map,
    extended_map,
    extract_coefficients,
    make_map,
    sample_quantum_distribution,
    signed_map,
)
from .chain_engine import (
    StepEvolutionOperator,
    algebraic_checks,
    memory_decay,
    prepare_quantum_state,
    projector_sp,
    s_of_u,
    spectrum_report,
    step_preset,
    equipartition_attractor,
)
from .circuit import compile_and_run, load_state, parse_circuit
from .classical_ops import (
    UniqueJumpOp,
    cnot_counterexample_distribution,
    conditional_jump_c,
    gate_realization,
    gate_violations,
    hadamard_rule,
    hadamard_t_closure,
    induced_coefficient_map,
    rule_to_permutation,
)
from .continuous import (
    CircleModel,
    RotationInvariantModel,
    circle_expectation,
    continuous_quantum_condition,
    directions_grid,
    discrete_circle,
    gaussian_halfspace_mismatch,
    pure_diagonal_model,
    rotation_invariant_expectation,
)
from .entangled import bell_distribution, entangled_family, family_rho, random_correlation_state
from .qcond import (
    chsh_sweep,
    chsh_tilted,
    chsh_value,
    pair_constraints,
    positivity_report,
    random_positive_rho,
    direction_bound_sweep,
)
from .quantum_core import (
    QuantumDensityMatrix,
    coefficient_map,
    gate,
    gate_period,
    pauli_basis,
    pure_state,
    rho_from_coefficients,
)
from .spin_core import ProbabilityDistribution, expectation

logger = logging.getLogger(__name__)

RANDOM_STATES = 1000
NO_GO_TRIALS = 10_000
MONTE_CARLO_SAMPLES = 1_000_000


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "passed": self.passed, "detail": self.detail}


def render_table(results: List[CheckResult]) -> str:
    """Fixed-width pass/fail table with a summary line."""
    width = max([len(r.name) for r in results] + [5])
    lines = [f"{'check'.ljust(width)}  result  detail", f"{'-' * width}  ------  ------"]
    for r in results:
        lines.append(f"{r.name.ljust(width)}  {'PASS' if r.passed else 'FAIL':<6}  {r.detail}")
    failed = sum(not r.passed for r in results)
    lines.append(f"{len(results) - failed}/{len(results)} checks passed")
    return "\n".join(lines)


def _check(name: str, passed: bool, detail: str = "") -> CheckResult:
    if not passed:
        logger.debug(f"Check {name} failed: {detail}")
    return CheckResult(name, bool(passed), detail)


def _spectrum_matches(eigenvalues, expected, tol: float = 1e-10) -> bool:
    remaining = list(np.asarray(expected, dtype=complex))
    for z in eigenvalues:
        distances = [abs(z - w) for w in remaining]
        if not distances or min(distances) > tol:
            return False
        remaining.pop(int(np.argmin(distances)))
    return not remaining


def _rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(DEFAULT_SEED if seed is None else seed)


def singlet() -> QuantumDensityMatrix:
    return pure_state(np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2))


def rotated_singlet(angle: float = np.pi / 4) -> QuantumDensityMatrix:
    """Singlet with qubit 2 turned about the 3-axis."""
    turn = np.diag([np.exp(-0.5j * angle), np.exp(0.5j * angle)])
    return pure_state(np.kron(np.eye(2), turn) @ np.array([0.0, 1.0, -1.0, 0.0]) / np.sqrt(2))


def hadamard_checks(seed: Optional[int] = None) -> List[CheckResult]:
    bq_map = direct_map(1)
    op = gate_realization("H", bq_map)
    same = np.array_equal(op.perm, rule_to_permutation(hadamard_rule()).perm)
    rng = _rng(seed)
    worst = 0.0
    for _ in range(50):
        rho = random_positive_rho(1, rng)
        after = extract_coefficients(bq_map, op.apply(sample_quantum_distribution(bq_map, rho)))
        r1, r2, r3 = rho.coefficients
        worst = max(worst, float(np.abs(after - np.array([r3, -r2, r1])).max()))
    return [
        _check("hadamard/permutation", same, "gate catalog equals s1'=s3, s2'=-s2, s3'=s1"),
        _check("hadamard/induced-map", worst <= 1e-12, f"max error {worst:.2e} over 50 states"),
    ]


def cnot_checks(seed: Optional[int] = None) -> List[CheckResult]:
    bq_map = make_map("direct15")
    basis = pauli_basis(2)
    op = gate_realization("CNOT", bq_map, (1, 2))
    spec = gate("CNOT", 1, 2, Q=2)
    dist = sample_quantum_distribution(bq_map, load_state("product:-1,-3", 2))
    after = extract_coefficients(bq_map, op.apply(dist))
    expected = np.zeros(basis.size)
    for label in ("11", "22", "33"):
        expected[basis.index(label)] = -1.0
    sharp = float(np.abs(after - expected).max())

    b = coefficient_map(spec)
    sign = b[basis.index("13"), basis.index("22")]
    rng = _rng(seed)
    violations = 0
    for _ in range(10):
        sample = sample_quantum_distribution(bq_map, random_positive_rho(2, rng))
        violations += len(gate_violations(bq_map, spec, sample, op.apply(sample), tol=1e-12))

    program = parse_circuit("qubits 2\nmap direct15\nstate product:+3,+3\nH 1\nCNOT 1 2\n")
    bell = compile_and_run(program, seed)
    return [
        _check("cnot/entangling", sharp <= 1e-12, f"sigma11=sigma22=sigma33=-1, error {sharp:.2e}"),
        _check("cnot/sign", abs(sign + 1) <= 1e-12 and violations == 0,
               f"rho13 <- -rho22 (b={sign:+.0f}), {violations} violations on 10 states"),
        _check("cnot/circuit", bell.passed, f"H then CNOT, Frobenius error {bell.final_fidelity:.2e}"),
    ]


def entangled_checks(seed: Optional[int] = None) -> List[CheckResult]:
    bq_map = correlation_map(2)
    worst = 0.0
    for theta in np.linspace(0.0, 2 * np.pi, 64, endpoint=False):
        _, dist = entangled_family(float(theta))
        worst = max(worst, float(np.abs(extract_coefficients(bq_map, dist) - family_rho(theta).coefficients).max()))
    bell = bell_distribution().p
    support = bell[bell > 0]
    exact = support.size == 8 and bool(np.allclose(support, 1 / 8, rtol=0, atol=1e-15))
    return [
        _check("entangled/family", worst <= 1e-12, f"64 angles, max error {worst:.2e}"),
        _check("entangled/bell", exact, f"{support.size} configurations at 1/8"),
    ]


def spectra_checks(seed: Optional[int] = None) -> List[CheckResult]:
    cases = [
        ("S_P", projector_sp(), [1, -1, 0, 0]),
        ("S(u=0.3)", s_of_u(0.3), [1, -1, 0.4j, -0.4j]),
        ("attractor", equipartition_attractor(), [1, 1 / 3, 1 / 3, -1 / 3]),
    ]
    results = []
    for name, S, expected in cases:
        eigenvalues = spectrum_report(S).eigenvalues
        results.append(_check(f"spectra/{name}", _spectrum_matches(eigenvalues, expected),
                              "eigenvalues " + ", ".join(f"{complex(z):.6g}" for z in eigenvalues)))
    return results


def preparation_checks(seed: Optional[int] = None) -> List[CheckResult]:
    result = prepare_quantum_state(ProbabilityDistribution.delta(3, 4))
    p = result.distribution.p
    split = bool(np.allclose(p[[5, 6]], 0.5, rtol=0, atol=1e-12)) and abs(p.sum() - 1.0) <= 1e-12
    pure = result.pure and float(np.abs(result.rho - np.array([1.0, 0.0, 0.0])).max()) <= 1e-12
    decay = [memory_decay(u, 50).max_relative_error for u in (0.1, 0.3)]
    return [
        _check("preparation/split", split, f"p6={p[5]:g}, p7={p[6]:g}"),
        _check("preparation/pure", pure, f"rho={np.round(result.rho, 12).tolist()}"),
        _check("preparation/memory-loss", max(decay) <= 0.02, f"max relative error {max(decay):.2e} over 50 steps"),
    ]


def t_gate_checks(seed: Optional[int] = None) -> List[CheckResult]:
    bq_map = signed_map()
    fit = induced_coefficient_map(gate_realization("T", bq_map), bq_map, seed=seed)
    error = float(np.abs(fit.b - coefficient_map(gate("T"))).max())
    period = gate_period(gate("T").matrix)

    extended = extended_map()
    jump = gate_realization("PI4_31", extended)
    fit4 = induced_coefficient_map(jump, extended, seed=seed)
    plane = np.ix_([0, 2], [0, 2])
    error4 = float(np.abs(fit4.b[plane] - coefficient_map(gate("PI4_31"))[plane]).max())
    order = jump.order() if isinstance(jump, UniqueJumpOp) else None
    return [
        _check("t-gate/signed-map", error <= 1e-10, f"coefficient error {error:.2e}"),
        _check("t-gate/period", period == 8, f"projective period {period}"),
        _check("t-gate/extended-jump", error4 <= 1e-10 and order == 8 and gate_period(gate("PI4_31").matrix) == 8,
               f"pi/4 rotation by a 4-spin unique jump, error {error4:.2e}, order {order}"),
    ]


def chsh_checks(seed: Optional[int] = None, states: int = RANDOM_STATES) -> List[CheckResult]:
    """
    The bound |<C>| <= 2 is checked on states the correlation map realizes; a positive
    rho without a classical realization may exceed it with axis-aligned settings.
    """
    rng = _rng(seed)
    bq_map = correlation_map(2)
    worst = max(
        chsh_sweep(rho_from_coefficients(2, extract_coefficients(bq_map, random_correlation_state(rng))))[0]
        for _ in range(states)
    )
    outside = rotated_singlet()
    beyond = chsh_sweep(outside)[0]
    unrealized = positivity_report(outside).positive and correlation_supported_family(outside) is None
    rho = singlet()
    saturated = chsh_value(rho, (1, 1), (1, 3), (-1, 3), (1, 3))
    partial = chsh_value(rho, (1, 1), (1, 3), (-1, 3), (1, 2))
    repeated = chsh_value(rho, (1, 1), (1, 1), (1, 3), (1, 2))
    tilted = chsh_tilted(rho)
    cases_ok = abs(saturated - 2) <= 1e-12 and abs(partial - 1) <= 1e-12 and abs(repeated) <= 1e-12
    return [
        _check("chsh/bound", worst <= 2 + 1e-10, f"max |<C>| {worst:.12f} over {states} correlation-map states"),
        _check("chsh/unrealized", unrealized and abs(beyond - 2 * math.sqrt(2)) <= 1e-10,
               f"rotated singlet: max |<C>| {beyond:.6f} without a correlation-map realization"),
        _check("chsh/cases", cases_ok, f"<C> = {saturated:g}, {partial:g}, {repeated:g}"),
        _check("chsh/tilted", tilted > 2, f"<C> = {tilted:.6f} with tilted axes"),
    ]


def pair_checks(seed: Optional[int] = None, states: int = RANDOM_STATES) -> List[CheckResult]:
    rng = _rng(seed)
    violations = sum(len(pair_constraints(random_positive_rho(2, rng)).violations) for _ in range(states))
    report = pair_constraints(singlet())
    anti = np.allclose(report.probabilities[(3, 3)], [[0, 0.5], [0.5, 0]], atol=1e-12)
    return [
        _check("pairs/positivity", violations == 0, f"{violations} violations over {states} states"),
        _check("pairs/singlet", anti, "pair (3,3): p+- = p-+ = 1/2"),
    ]


def no_go_checks(seed: Optional[int] = None, trials: int = NO_GO_TRIALS) -> List[CheckResult]:
    closure = hadamard_t_closure(seed=seed)
    rng = _rng(seed)
    unviolated = 0
    for _ in range(trials):
        S = UniqueJumpOp(rng.permutation(64)).matrix
        if not algebraic_checks(S).violated:
            unviolated += 1
    conditional = algebraic_checks(conditional_jump_c().matrix)
    return [
        _check("no-go/unique-jump-closure", not closure.realizes_target and closure.min_residual >= 1e-3,
               f"{closure.size} elements, min residual {closure.min_residual:.3e}"),
        _check("no-go/cnot-relations", unviolated == 0 and bool(conditional.violated),
               f"{trials} random permutations, {unviolated} satisfy every relation"),
    ]


def counterexample_checks(seed: Optional[int] = None) -> List[CheckResult]:
    rho = QuantumDensityMatrix(2, np.diag([7.0, 7.0, 7.0, -1.0]) / 20)
    sweep = direction_bound_sweep(rho)
    positive = positivity_report(rho).positive
    bound_ok = sweep["within_bound"] and abs(sweep["maximum"] - 2 * math.sqrt(3) / 5) <= 1e-12

    dist = cnot_counterexample_distribution()
    s = correlation_spin
    triple = expectation(dist, (s(1, 1), s(2, 1), s(2, 2)))
    bq_map = correlation_map(2)
    failures = gate_violations(bq_map, gate("CNOT", 1, 2, Q=2), dist, conditional_jump_c().apply(dist))
    return [
        _check("counterexamples/direction-bound", bound_ok and not positive,
               f"max |<A(e)>| = {sweep['maximum']:.12f}, positive={positive}"),
        _check("counterexamples/conditional-jump", abs(triple - 1) <= 1e-12 and bool(failures),
               f"<s1(1) s1(2) s2(2)> = {triple:g}, CNOT fails on " + ", ".join(f["label"] for f in failures)),
    ]


def continuous_checks(seed: Optional[int] = None, n_samples: int = MONTE_CARLO_SAMPLES) -> List[CheckResult]:
    grid = directions_grid(20)
    model = RotationInvariantModel(np.array([1.0, 2.0, 2.0]) / 3)
    quadrature = max(rotation_invariant_expectation(model, e).error for e in grid)
    mc = rotation_invariant_expectation(model, grid[3], "montecarlo", n_samples=n_samples, seed=seed, shards=4)
    mismatch = gaussian_halfspace_mismatch(pure_diagonal_model(), np.array([1.0, 1.0, 0.0]) / np.sqrt(2))

    circle = CircleModel(0.3)
    angles = np.linspace(0.0, 2 * np.pi, 16, endpoint=False)
    values = np.array([circle_expectation(circle, phi) for phi in angles])
    circle_error = float(np.abs(values - np.cos(angles - 0.3)).max())
    fit = continuous_quantum_condition(angles, values)
    binned = discrete_circle(circle, 256)
    binned_error = max(abs(binned.expectation(phi) - math.cos(phi - 0.3)) for phi in angles)
    return [
        _check("continuous/quadrature", quadrature <= 1e-6, f"20 directions, max error {quadrature:.2e}"),
        _check("continuous/montecarlo", mc.error <= 3 * mc.stderr,
               f"N={n_samples}: {mc.value:.6f} vs {mc.exact:.6f} (stderr {mc.stderr:.1e})"),
        _check("continuous/gaussian-mismatch", mismatch > 0, f"1 - <s(e)> = {mismatch:.6f}"),
        _check("continuous/circle", circle_error <= 1e-12 and fit.ok and abs(fit.psi - 0.3) <= 1e-10,
               f"error {circle_error:.2e}, fitted psi {fit.psi:.12f}"),
        _check("continuous/discrete-circle", binned_error <= 1 / 256, f"N=256, max error {binned_error:.2e}"),
    ]


def acceptance_checks(seed: Optional[int] = None) -> List[CheckResult]:
    results: List[CheckResult] = []
    for name in PRESETS:
        if name != "acceptance":
            results.extend(run_preset(name, seed))
    return results


PRESETS: Dict[str, Callable[..., List[CheckResult]]] = {
    "hadamard": hadamard_checks,
    "cnot": cnot_checks,
    "entangled": entangled_checks,
    "spectra": spectra_checks,
    "preparation": preparation_checks,
    "t-gate": t_gate_checks,
    "chsh": chsh_checks,
    "pairs": pair_checks,
    "no-go": no_go_checks,
    "counterexamples": counterexample_checks,
    "continuous": continuous_checks,
    "acceptance": acceptance_checks,
}


def run_preset(name: str, seed: Optional[int] = None) -> List[CheckResult]:
    """
    Run a verification preset; a check that raises is reported as failed.

    Raises:
        KeyError: unknown preset
    """
    if name not in PRESETS:
        raise KeyError(f"unknown preset '{name}'; choose from {', '.join(PRESETS)}")
    try:
        return PRESETS[name](seed)
    except SimulationError as e:
        logger.error(f"Preset {name} error: {str(e)}")
        return [CheckResult(name, False, str(e))]


def _parse_params(tokens: List[str], raw: str, number: int) -> Dict[str, float]:
    params = {}
    for token in tokens:
        key, sep, value = token.partition("=")
        try:
            if not sep:
                raise ValueError
            params[key] = float(value)
        except ValueError:
            raise CircuitSyntaxError(f"expected key=<float>, got '{token}'", number, raw.find(token) + 1)
    return params


def parse_chain_file(text: str) -> List[StepEvolutionOperator]:
    """
    Step operators of a chain file.

    One statement per line, '#' starts a comment: 'step NAME [key=value ...]' for a preset
    (sp, projector, attractor, s(u) u=.., hadamard_coupling, swap_coupling, frustrated gamma=.. delta=.. Delta=..)
    or 'matrix' followed by the rows of an explicit step operator.

    Raises:
        CircuitSyntaxError: malformed statement, with line and column
    """
    steps: List[StepEvolutionOperator] = []
    rows: Optional[List[List[float]]] = None
    matrix_line = 0

    def close_matrix():
        nonlocal rows
        if rows is None:
            return
        try:
            steps.append(StepEvolutionOperator(np.array(rows, dtype=float), name=f"matrix@{matrix_line}"))
        except (SimulationError, ValueError) as e:
            raise CircuitSyntaxError(f"bad matrix: {str(e)}", matrix_line, 1)
        rows = None

    for number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        head = tokens[0]
        if head == "step":
            close_matrix()
            if len(tokens) < 2:
                raise CircuitSyntaxError("step needs a preset name", number, raw.find(head) + 1)
            params = _parse_params(tokens[2:], raw, number)
            try:
                steps.append(step_preset(tokens[1], **params))
            except KeyError:
                raise CircuitSyntaxError(f"unknown step preset '{tokens[1]}'", number, raw.find(tokens[1]) + 1)
            except (InvalidDistributionError, TypeError) as e:
                raise CircuitSyntaxError(str(e), number, raw.find(tokens[1]) + 1)
        elif head == "matrix":
            close_matrix()
            rows, matrix_line = [], number
        elif rows is not None:
            try:
                rows.append([float(t) for t in tokens])
            except ValueError:
                raise CircuitSyntaxError("matrix rows hold numbers only", number, raw.find(head) + 1)
        else:
            raise CircuitSyntaxError(f"unknown statement '{head}'", number, raw.find(head) + 1)
    close_matrix()
    return steps


def spectrum_reports(steps: List[StepEvolutionOperator]) -> List[Dict[str, Any]]:
    return [
        {"name": step.name, "representation": step.representation, **spectrum_report(step.S).to_dict()}
        for step in steps
    ]
