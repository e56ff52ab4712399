"""Exact functional inequalities on enumerated multislices and prefixes.

Difference operators built from coordinate switches (full space) or
admissible single-coordinate replacements (prefix spaces) feed
entropy, variance, Dirichlet-form and moment comparisons that are
evaluated by exhaustive enumeration.  Each check returns a report with
both sides of its inequality and the achieved slack; identities report
the maximum absolute deviation instead.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .core import (
    DEFAULT_ENUMERATION_CAP,
    EnumeratedMultislice,
    EnumeratedPrefix,
    MultisliceSpec,
)
from .stats import MultilinearPolynomial, gradient_tensor

MOMENT_THETA = math.sqrt(math.e) / (math.sqrt(math.e) - 1.0)  # < 2.5415
PROJECTION_CAP = 40_000
DEFAULT_TOLERANCE = 1e-9

__all__ = [
    "MOMENT_THETA",
    "DEFAULT_TOLERANCE",
    "FunctionTable",
    "CheckReport",
    "expectation",
    "variance",
    "entropy",
    "lp_norm",
    "gamma_square",
    "gamma_plus_square",
    "h_square",
    "h_plus_square",
    "dirichlet_form",
    "lsi_constant",
    "swor_lsi_constant",
    "empirical_lsi_constant",
    "check_lsi",
    "check_mlsi",
    "check_poincare",
    "check_beckner",
    "check_moment_estimate",
    "check_local_variance_identity",
    "check_projection_identities",
    "check_convex_mlsi",
    "check_swor_lsi",
    "check_swor_mlsi",
    "check_gradient_estimate",
    "euclidean_gradient_square",
    "euclidean_gradient_gap_example",
    "random_table",
    "save_check_reports",
]


@dataclass(frozen=True)
class FunctionTable:
    """A real function given by its values in enumeration order."""

    space: object  # EnumeratedMultislice or EnumeratedPrefix
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", vals)
        if vals.ndim != 1 or vals.shape[0] != self.space.size:
            raise ValueError("values must match the enumerated state count")
        if not np.all(np.isfinite(vals)):
            raise ValueError("values must be finite")

    @property
    def weights(self) -> np.ndarray:
        return self.space.weights

    @property
    def spec(self) -> MultisliceSpec:
        return self.space.spec


@dataclass(frozen=True)
class CheckReport:
    """One verified inequality or identity: both sides and the slack."""

    check: str
    detail: str
    lhs: float
    rhs: float
    slack: float
    tolerance: float
    passed: bool


def _report(check: str, detail: str, lhs: float, rhs: float, tol: float) -> CheckReport:
    slack = lhs - rhs
    return CheckReport(check, detail, float(lhs), float(rhs), float(slack), tol, bool(slack <= tol))


def _spec_label(space) -> str:
    spec = space.spec
    label = f"kappa={spec.kappa} values={spec.values}"
    if isinstance(space, EnumeratedPrefix):
        label += f" n={space.n}"
    return label


def expectation(values: np.ndarray, weights: np.ndarray) -> float:
    return float(np.dot(weights, values))


def variance(values: np.ndarray, weights: np.ndarray) -> float:
    mean = expectation(values, weights)
    return float(np.dot(weights, (values - mean) ** 2))


def entropy(values: np.ndarray, weights: np.ndarray, allow_zero: bool = False) -> float:
    """E f log f - E f log E f under the given weights.

    Negative values are always rejected.  Exact zeros are rejected too
    unless ``allow_zero`` is set, in which case 0 log 0 = 0 applies (as
    needed for entropies of squares).
    """
    vals = np.asarray(values, dtype=float)
    if np.any(vals < 0):
        raise ValueError("entropy needs nonnegative values")
    if not allow_zero and np.any(vals == 0):
        raise ValueError("entropy needs strictly positive values")
    mean = expectation(vals, weights)
    if mean == 0.0:
        return 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        flogf = np.where(vals > 0, vals * np.log(np.where(vals > 0, vals, 1.0)), 0.0)
    return float(np.dot(weights, flogf) - mean * math.log(mean))


def lp_norm(values: np.ndarray, weights: np.ndarray, p: float) -> float:
    if p < 1:
        raise ValueError("p must be at least 1")
    return float(np.dot(weights, np.abs(values) ** p) ** (1.0 / p))


def _switch_terms(space: EnumeratedMultislice, values: np.ndarray):
    for (i, j) in space.switch_pairs:
        yield values - values[space.switch_permutation(i, j)]


def gamma_square(space: EnumeratedMultislice, values: np.ndarray) -> np.ndarray:
    """Squared switch gradient: (1/2N) sum over pairs of squared differences."""
    acc = np.zeros(space.size)
    for diff in _switch_terms(space, values):
        acc += diff**2
    return acc / (2.0 * space.spec.total)


def gamma_plus_square(space: EnumeratedMultislice, values: np.ndarray) -> np.ndarray:
    """Positive-part variant of the squared switch gradient."""
    acc = np.zeros(space.size)
    for diff in _switch_terms(space, values):
        acc += np.clip(diff, 0.0, None) ** 2
    return acc / (2.0 * space.spec.total)


def h_square(space: EnumeratedPrefix, values: np.ndarray) -> np.ndarray:
    """(1/2) sum over coordinates of squared admissible oscillation."""
    acc = np.zeros(space.size)
    for i in range(space.n):
        hoods = space.replacement_neighbourhoods(i)
        osc = np.array([values[h].max() - values[h].min() for h in hoods])
        acc += osc**2
    return acc / 2.0


def h_plus_square(space: EnumeratedPrefix, values: np.ndarray) -> np.ndarray:
    """(1/2) sum over coordinates of squared drop to the admissible infimum."""
    acc = np.zeros(space.size)
    for i in range(space.n):
        hoods = space.replacement_neighbourhoods(i)
        drop = np.array([values[s] - values[h].min() for s, h in enumerate(hoods)])
        acc += drop**2
    return acc / 2.0


def dirichlet_form(space: EnumeratedMultislice, f: np.ndarray, g: np.ndarray) -> float:
    """(1/2N) sum over pairs of E[(switch difference of f)(same of g)]."""
    acc = 0.0
    for (i, j) in space.switch_pairs:
        perm = space.switch_permutation(i, j)
        acc += expectation((f - f[perm]) * (g - g[perm]), space.weights)
    return acc / (2.0 * space.spec.total)


def lsi_constant(spec: MultisliceSpec) -> float:
    """2 log(N / kappa_min) / log 2."""
    return 2.0 * math.log(spec.total / spec.kappa_min) / math.log(2.0)


def swor_lsi_constant(spec: MultisliceSpec, n: int) -> float:
    """The full-space constant damped by the finite-sampling factor 1 - n/N."""
    return lsi_constant(spec) * (1.0 - n / spec.total)


def empirical_lsi_constant(table: FunctionTable) -> float:
    """Smallest constant sigma^2 making Ent(f^2) <= 2 sigma^2 E Gamma(f)^2 tight."""
    ent = entropy(table.values**2, table.weights, allow_zero=True)
    energy = expectation(gamma_square(table.space, table.values), table.weights)
    if energy == 0.0:
        return 0.0
    return float(ent / (2.0 * energy))


def check_lsi(table: FunctionTable, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """Ent(f^2) against 2 sigma^2 E Gamma(f)^2 with sigma^2 = 2 log(N/kappa_min)/log 2."""
    space = table.space
    sigma_sq = lsi_constant(space.spec)
    lhs = entropy(table.values**2, space.weights, allow_zero=True)
    rhs = 2.0 * sigma_sq * expectation(gamma_square(space, table.values), space.weights)
    return _report("lsi", _spec_label(space), lhs, rhs, tol)


def check_mlsi(
    table: FunctionTable, op: str = "gamma", tol: float = DEFAULT_TOLERANCE
) -> CheckReport:
    """Ent(e^f) against (sigma^2/2) E[op(f)^2 e^f]; sigma^2 = 4 (switch) or 8 (positive part)."""
    space = table.space
    if op == "gamma":
        sigma_sq, op_sq = 4.0, gamma_square(space, table.values)
    elif op == "gamma-plus":
        sigma_sq, op_sq = 8.0, gamma_plus_square(space, table.values)
    else:
        raise ValueError("op must be 'gamma' or 'gamma-plus'")
    ef = np.exp(table.values)
    lhs = entropy(ef, space.weights)
    rhs = sigma_sq / 2.0 * expectation(op_sq * ef, space.weights)
    return _report(f"mlsi-{op}", _spec_label(space), lhs, rhs, tol)


def check_poincare(table: FunctionTable, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """Var(f) against (2N/(N+2)) E Gamma(f)^2, the p = 2 moment comparison."""
    space = table.space
    N = space.spec.total
    lhs = variance(table.values, space.weights)
    rhs = 2.0 * N / (N + 2.0) * expectation(gamma_square(space, table.values), space.weights)
    return _report("poincare", _spec_label(space), lhs, rhs, tol)


def check_beckner(
    table: FunctionTable, p: float, tol: float = DEFAULT_TOLERANCE
) -> CheckReport:
    """E f^p - (E f)^p against (2N/(N+2)) E(f, f^(p-1)) for 1 < p <= 2, f >= 0."""
    if not 1.0 < p <= 2.0:
        raise ValueError("p must lie in (1, 2]")
    if np.any(table.values < 0):
        raise ValueError("needs a nonnegative function")
    space = table.space
    N = space.spec.total
    f = table.values
    lhs = expectation(f**p, space.weights) - expectation(f, space.weights) ** p
    rhs = 2.0 * N / (N + 2.0) * dirichlet_form(space, f, f ** (p - 1.0))
    return _report(f"beckner-p{p:g}", _spec_label(space), lhs, rhs, tol)


def check_moment_estimate(
    table: FunctionTable, p: float, tol: float = DEFAULT_TOLERANCE
) -> CheckReport:
    """Centered L^p norm against sqrt(4 theta p) times the L^p norm of Gamma(f)."""
    if p < 2:
        raise ValueError("p must be at least 2")
    space = table.space
    centered = table.values - expectation(table.values, space.weights)
    lhs = lp_norm(centered, space.weights, p)
    gam = np.sqrt(gamma_square(space, table.values))
    rhs = math.sqrt(4.0 * MOMENT_THETA * p) * lp_norm(gam, space.weights, p)
    return _report(f"moment-p{p:g}", _spec_label(space), lhs, rhs, tol)


def _conditional_pair_arrangements(space: EnumeratedMultislice, i: int, j: int):
    """State indices of all admissible rearrangements of the (i, j) pair.

    Given everything off the pair, the conditional support consists of
    the level assignments (a, b) whose counts complete the remaining
    coordinates to kappa; they carry equal conditional mass.
    """
    spec = space.spec
    kappa = np.asarray(spec.kappa)
    out = []
    for row in space.level_indices:
        counts = np.bincount(row, minlength=spec.num_levels)
        counts[row[i]] -= 1
        counts[row[j]] -= 1
        states = []
        for a in range(spec.num_levels):
            for b in range(spec.num_levels):
                trial = counts.copy()
                trial[a] += 1
                trial[b] += 1
                if np.array_equal(trial, kappa):
                    alt = row.copy()
                    alt[i], alt[j] = a, b
                    states.append(space.index_of(alt))
        out.append(np.array(states, dtype=np.intp))
    return out


def check_local_variance_identity(
    table: FunctionTable, tol: float = DEFAULT_TOLERANCE
) -> CheckReport:
    """Squared pair difference equals twice the conditional second moment.

    For every state and coordinate pair: Gamma_ij(f)^2 = 2 E[(f - f')^2]
    where f' runs over the admissible rearrangements of the pair given
    the remaining coordinates, each with its exact conditional weight.
    """
    space = table.space
    if not isinstance(space, EnumeratedMultislice):
        raise ValueError("needs a fully enumerated multislice")
    f = table.values
    worst = 0.0
    for (i, j) in space.switch_pairs:
        perm = space.switch_permutation(i, j)
        lhs = (f - f[perm]) ** 2
        arrangements = _conditional_pair_arrangements(space, i, j)
        rhs = np.array(
            [2.0 * np.mean((f[s] - f[states]) ** 2) for s, states in enumerate(arrangements)]
        )
        worst = max(worst, float(np.abs(lhs - rhs).max()))
    return _report("local-variance-identity", _spec_label(space), worst, 0.0, tol)


def _coarsening_levels(spec: MultisliceSpec) -> np.ndarray:
    """Level of each symbol 1..N when symbols are packed by occupation counts."""
    return np.repeat(np.arange(spec.num_levels), spec.kappa)


def check_projection_identities(
    table_f: FunctionTable,
    table_g: FunctionTable,
    tol: float = DEFAULT_TOLERANCE,
) -> CheckReport:
    """Lift to the symmetric group and compare means and Dirichlet forms.

    Symbols 1..N are coarsened onto the levels by occupation counts; the
    push-forward of the uniform permutation measure is the multislice
    measure, preserving expectations and switch Dirichlet forms.
    """
    space = table_f.space
    if table_g.space is not space:
        raise ValueError("both tables must live on the same space")
    if not isinstance(space, EnumeratedMultislice):
        raise ValueError("needs a fully enumerated multislice")
    spec = space.spec
    N = spec.total
    if math.factorial(N) > PROJECTION_CAP:
        raise ValueError(f"symmetric-group lift capped at {PROJECTION_CAP} states")

    sym_spec = MultisliceSpec((1,) * N, tuple(float(i + 1) for i in range(N)))
    perm_space = EnumeratedMultislice(sym_spec, cap=PROJECTION_CAP)
    levels = _coarsening_levels(spec)

    # each permutation state lists the symbols 1..N; coarsen coordinatewise
    proj = np.fromiter(
        (
            space.index_of(levels[row])
            for row in perm_space.level_indices
        ),
        dtype=np.intp,
        count=perm_space.size,
    )

    f_lift = table_f.values[proj]
    g_lift = table_g.values[proj]

    mean_dev = abs(
        expectation(f_lift, perm_space.weights)
        - expectation(table_f.values, space.weights)
    )
    dir_dev = abs(
        dirichlet_form(perm_space, f_lift, g_lift)
        - dirichlet_form(space, table_f.values, table_g.values)
    )
    worst = max(mean_dev, dir_dev)
    return _report("projection-identities", _spec_label(space), worst, 0.0, tol)


def check_convex_mlsi(
    space: EnumeratedMultislice,
    fn: Callable[[np.ndarray], float],
    grad_fn: Callable[[np.ndarray], np.ndarray],
    tol: float = DEFAULT_TOLERANCE,
    grad_tol: float = 1e-6,
) -> CheckReport:
    """Ent(e^f) against 4 diam^2 E[e^f |grad f|^2] for a smooth convex extension.

    The supplied gradient is validated against central finite
    differences at every enumerated configuration before use.
    """
    spec = space.spec
    f_vals = np.array([float(fn(c)) for c in space.configurations])
    grads = np.array([np.asarray(grad_fn(c), dtype=float) for c in space.configurations])
    if grads.shape != (space.size, spec.total):
        raise ValueError("gradient shape mismatch")

    step = 1e-6 * max(1.0, spec.diameter)
    for s in range(space.size):
        base = space.configurations[s]
        for i in range(spec.total):
            hi = base.copy()
            lo = base.copy()
            hi[i] += step
            lo[i] -= step
            fd = (float(fn(hi)) - float(fn(lo))) / (2.0 * step)
            if abs(fd - grads[s, i]) > grad_tol * max(1.0, abs(grads[s, i])):
                raise ValueError(
                    f"gradient check failed at state {s} coordinate {i}: "
                    f"finite difference {fd}, supplied {grads[s, i]}"
                )

    ef = np.exp(f_vals)
    lhs = entropy(ef, space.weights)
    rhs = 4.0 * spec.diameter**2 * expectation(ef * (grads**2).sum(axis=1), space.weights)
    return _report("convex-mlsi", _spec_label(space), lhs, rhs, tol)


def _require_symmetric(space: EnumeratedPrefix, values: np.ndarray) -> None:
    if not space.is_symmetric(values):
        raise ValueError("needs a symmetric function of the prefix")


def check_swor_lsi(table: FunctionTable, tol: float = DEFAULT_TOLERANCE) -> CheckReport:
    """Prefix-space Ent(f^2) against the oscillation operator, damped by 1 - n/N."""
    space = table.space
    if not isinstance(space, EnumeratedPrefix):
        raise ValueError("needs an enumerated prefix space")
    _require_symmetric(space, table.values)
    sigma_sq = swor_lsi_constant(space.spec, space.n)
    lhs = entropy(table.values**2, space.weights, allow_zero=True)
    rhs = 2.0 * sigma_sq * expectation(h_square(space, table.values), space.weights)
    return _report("swor-lsi", _spec_label(space), lhs, rhs, tol)


def check_swor_mlsi(
    table: FunctionTable, op: str = "h", tol: float = DEFAULT_TOLERANCE
) -> CheckReport:
    """Prefix-space Ent(e^f) against oscillation operators with 1 - n/N damping."""
    space = table.space
    if not isinstance(space, EnumeratedPrefix):
        raise ValueError("needs an enumerated prefix space")
    _require_symmetric(space, table.values)
    frac = 1.0 - space.n / space.spec.total
    if op == "h":
        sigma_sq, op_sq = 4.0 * frac, h_square(space, table.values)
    elif op == "h-plus":
        sigma_sq, op_sq = 8.0 * frac, h_plus_square(space, table.values)
    else:
        raise ValueError("op must be 'h' or 'h-plus'")
    ef = np.exp(table.values)
    lhs = entropy(ef, space.weights)
    rhs = sigma_sq / 2.0 * expectation(op_sq * ef, space.weights)
    return _report(f"swor-mlsi-{op}", _spec_label(space), lhs, rhs, tol)


def euclidean_gradient_square(poly: MultilinearPolynomial, config: np.ndarray) -> float:
    grad = gradient_tensor(poly, config, 1)
    return float((grad**2).sum())


def check_gradient_estimate(
    space: EnumeratedMultislice,
    poly: MultilinearPolynomial,
    tol: float = DEFAULT_TOLERANCE,
) -> CheckReport:
    """Pointwise switch gradient against Euclidean gradient plus Hessian terms.

    Gamma(f)^2 <= (3 diam^2 / 2) |grad f|^2 + (3 diam^4 / 4N) |hess f|_HS^2
    at every enumerated configuration; reports the worst margin.
    """
    spec = space.spec
    if poly.dimension != spec.total:
        raise ValueError("polynomial dimension must match the spec length")
    f_vals = poly.evaluate_batch(space.configurations)
    gam_sq = gamma_square(space, f_vals)
    worst = -np.inf
    lhs_at_worst = rhs_at_worst = 0.0
    for s, config in enumerate(space.configurations):
        grad_sq = euclidean_gradient_square(poly, config)
        hess = gradient_tensor(poly, config, 2)
        hess_sq = float((hess**2).sum())
        rhs = (
            1.5 * spec.diameter**2 * grad_sq
            + 0.75 * spec.diameter**4 / spec.total * hess_sq
        )
        margin = gam_sq[s] - rhs
        if margin > worst:
            worst, lhs_at_worst, rhs_at_worst = margin, float(gam_sq[s]), rhs
    return _report("gradient-estimate", _spec_label(space), lhs_at_worst, rhs_at_worst, tol)


def euclidean_gradient_gap_example():
    """A configuration where the Euclidean gradient vanishes but switches move f.

    Three coordinates holding one zero and two ones; f = x0 x1 - x0 x2.
    At (0, 1, 1) the gradient is zero while the switch gradient is
    1/sqrt(3), so no pointwise bound by the gradient alone can hold.
    """
    spec = MultisliceSpec((1, 2), (0.0, 1.0))
    poly = MultilinearPolynomial(3, {(0, 1): 1.0, (0, 2): -1.0})
    config = np.array([0.0, 1.0, 1.0])
    space = EnumeratedMultislice(spec)
    grad_norm = math.sqrt(euclidean_gradient_square(poly, config))
    f_vals = poly.evaluate_batch(space.configurations)
    gam = math.sqrt(gamma_square(space, f_vals)[space.index_of([0, 1, 1])])
    return spec, poly, config, grad_norm, gam


def random_table(
    space, rng: np.random.Generator, positive: bool = False
) -> FunctionTable:
    """Uniform values in [-1, 1]; exponentiated when positivity is required."""
    vals = rng.uniform(-1.0, 1.0, size=space.size)
    if positive:
        vals = np.exp(vals)
    return FunctionTable(space, vals)


def save_check_reports(path: str, reports: Sequence[CheckReport]) -> None:
    """JSON lines: check id, spec label, both sides, slack and the verdict."""
    with open(path, "w") as fh:
        for rep in reports:
            fh.write(
                json.dumps(
                    {
                        "check": rep.check,
                        "detail": rep.detail,
                        "lhs": rep.lhs,
                        "rhs": rep.rhs,
                        "slack": rep.slack,
                        "tolerance": rep.tolerance,
                        "result": "PASS" if rep.passed else "FAIL",
                    }
                )
                + "\n"
            )
