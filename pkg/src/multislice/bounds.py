"""Closed-form tail bounds for statistics of multislices and prefix sampling.

Every calculator returns the bound value itself (prefactor times a
Gaussian or mixed-tail exponential); values never exceed the prefactor
for t >= 0.  Degenerate sampling fractions n == N collapse the bounds
to the point mass at zero deviation: prefactor at t == 0, zero for
t > 0.  Calculators with an unspecified absolute constant default it to
one and are flagged qualitative; quantitative domination verdicts are
not claimed for them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .tensor_norms import Partition

__all__ = [
    "bounded_difference",
    "convex_lipschitz",
    "multilinear_tail",
    "triangle_tail",
    "triangle_tail_relative",
    "swor_bounded_difference",
    "serfling",
    "serfling_original",
    "kolmogorov_tail",
    "convex_lipschitz_median",
    "eigenvalue_tail",
    "swor_convex_distance",
    "swor_convex_lipschitz",
    "mean_median_gap",
    "BoundInfo",
    "REGISTRY",
    "evaluate_bound",
]


def _as_t(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if np.any(arr < 0) or not np.all(np.isfinite(arr)):
        raise ValueError("thresholds must be finite and nonnegative")
    return arr


def _scalar_like(t, out: np.ndarray):
    return float(out) if np.isscalar(t) or np.ndim(t) == 0 else out


def _degenerate(t, prefactor: float):
    arr = _as_t(t)
    return _scalar_like(t, np.where(arr == 0.0, prefactor, 0.0))


def _check_fraction(n: int, total: int) -> float:
    if total < 2:
        raise ValueError("population size must be at least 2")
    if not 1 <= n <= total:
        raise ValueError("sample size must lie in [1, total]")
    return 1.0 - n / total


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive and finite")
    return value


def bounded_difference(t, total: int, sum_c_sq: float):
    """exp(-N t^2 / (4 sum of squared switch increments)), one-sided."""
    if total < 2:
        raise ValueError("population size must be at least 2")
    arr = _as_t(t)
    if sum_c_sq == 0.0:
        return _degenerate(t, 1.0)
    sum_c_sq = _check_positive("sum_c_sq", sum_c_sq)
    return _scalar_like(t, np.exp(-total * arr**2 / (4.0 * sum_c_sq)))


def convex_lipschitz(t, diam: float):
    """exp(-t^2 / (16 diam^2)) for convex 1-Lipschitz deviations above the mean."""
    diam = _check_positive("diam", diam)
    arr = _as_t(t)
    return _scalar_like(t, np.exp(-(arr**2) / (16.0 * diam**2)))


def multilinear_tail(t, norms: Mapping[Partition, float], diam: float, c: float = 1.0):
    """Mixed tail 2 exp(-c min over partitions (t / (diam^k norm))^(2/#blocks)).

    ``norms`` maps partitions of {0..k-1} (one per derivative order k)
    to expected-derivative-tensor partition norms; zero norms are
    skipped.
    """
    diam = _check_positive("diam", diam)
    c = _check_positive("c", c)
    arr = _as_t(t)
    exponents = []
    for part, norm in norms.items():
        norm = float(norm)
        if norm < 0 or not math.isfinite(norm):
            raise ValueError("norms must be finite and nonnegative")
        if norm == 0.0:
            continue
        k = part.order
        ratio = arr / (diam**k * norm)
        exponents.append(ratio ** (2.0 / part.num_blocks))
    if not exponents:
        raise ValueError("no positive norms to build the tail from")
    return _scalar_like(t, 2.0 * np.exp(-c * np.minimum.reduce(exponents)))


def triangle_tail(t, n_vertices: int, edge_prob: float, c: float = 1.0):
    """Mixed tail for the centered triangle count of a fixed-edge-budget graph."""
    if n_vertices < 3:
        raise ValueError("need at least three vertices")
    p = float(edge_prob)
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    c = _check_positive("c", c)
    arr = _as_t(t)
    n = float(n_vertices)
    var_scale = n**3 + p**2 * n**3 + p**4 * n**4
    linear_scale = math.sqrt(n) + p * n
    with np.errstate(divide="ignore"):
        branch_sq = arr**2 / var_scale
        branch_lin = arr / linear_scale
        branch_23 = arr ** (2.0 / 3.0)
    expo = np.minimum(np.minimum(branch_sq, branch_lin), branch_23)
    return _scalar_like(t, 2.0 * np.exp(-c * expo))


def triangle_tail_relative(eps, n_vertices: int, edge_prob: float, c: float = 1.0):
    """Mixed tail for deviations by a multiple eps of the mean triangle count."""
    if n_vertices < 3:
        raise ValueError("need at least three vertices")
    p = float(edge_prob)
    if not 0.0 <= p <= 1.0:
        raise ValueError("edge probability must lie in [0, 1]")
    c = _check_positive("c", c)
    arr = _as_t(eps)
    n = float(n_vertices)
    first = arr**2 * n**3 * p**6
    second = np.minimum(arr**2, arr ** (2.0 / 3.0)) * n**2 * p**2
    return _scalar_like(eps, 2.0 * np.exp(-c * np.minimum(first, second)))


def swor_bounded_difference(t, n: int, total: int, sum_c_sq: float):
    """exp(-t^2 / (4 (1 - n/N) sum of squared coordinate increments))."""
    frac = _check_fraction(n, total)
    if sum_c_sq == 0.0 or frac == 0.0:
        return _degenerate(t, 1.0)
    sum_c_sq = _check_positive("sum_c_sq", sum_c_sq)
    arr = _as_t(t)
    return _scalar_like(t, np.exp(-(arr**2) / (4.0 * frac * sum_c_sq)))


def serfling(t, n: int, total: int, diam: float):
    """exp(-n t^2 / (4 (1 - n/N) diam^2)) for the sample mean."""
    frac = _check_fraction(n, total)
    diam = _check_positive("diam", diam)
    if frac == 0.0:
        return _degenerate(t, 1.0)
    arr = _as_t(t)
    return _scalar_like(t, np.exp(-n * arr**2 / (4.0 * frac * diam**2)))


def serfling_original(t, n: int, total: int, diam: float):
    """exp(-2 n t^2 / ((1 - (n-1)/N) diam^2)), the classical sample-mean bound."""
    _check_fraction(n, total)
    diam = _check_positive("diam", diam)
    factor = 1.0 - (n - 1) / total
    arr = _as_t(t)
    return _scalar_like(t, np.exp(-2.0 * n * arr**2 / (factor * diam**2)))


def kolmogorov_tail(t, n: int, total: int):
    """2 exp(-t^2 / (4 (1 - n/N))) for sqrt(n) times the one-sided CDF gap."""
    frac = _check_fraction(n, total)
    if frac == 0.0:
        return _degenerate(t, 2.0)
    arr = _as_t(t)
    return _scalar_like(t, 2.0 * np.exp(-(arr**2) / (4.0 * frac)))


def convex_lipschitz_median(t, lipschitz: float, diam: float):
    """4 exp(-t^2 / (144 L^2 diam^2)) around the median of a convex Lipschitz map."""
    lipschitz = _check_positive("lipschitz", lipschitz)
    diam = _check_positive("diam", diam)
    arr = _as_t(t)
    return _scalar_like(t, 4.0 * np.exp(-(arr**2) / (144.0 * lipschitz**2 * diam**2)))


def eigenvalue_tail(t, diam: float):
    """4 exp(-t^2 / (144 diam^2)) for the top eigenvalue around its median."""
    diam = _check_positive("diam", diam)
    arr = _as_t(t)
    return _scalar_like(t, 4.0 * np.exp(-(arr**2) / (144.0 * diam**2)))


def swor_convex_distance(t, n: int, total: int):
    """e exp(-t^2 / (16 (1 - n/N))) for the convex distance to a symmetric set."""
    frac = _check_fraction(n, total)
    if frac == 0.0:
        return _degenerate(t, math.e)
    arr = _as_t(t)
    return _scalar_like(t, math.e * np.exp(-(arr**2) / (16.0 * frac)))


def swor_convex_lipschitz(t, n: int, total: int, lipschitz: float, diam: float):
    """2e exp(-t^2 / (16 (1 - n/N) L^2 diam^2)) around the median, two-sided."""
    frac = _check_fraction(n, total)
    lipschitz = _check_positive("lipschitz", lipschitz)
    diam = _check_positive("diam", diam)
    if frac == 0.0:
        return _degenerate(t, 2.0 * math.e)
    arr = _as_t(t)
    return _scalar_like(
        t, 2.0 * math.e * np.exp(-(arr**2) / (16.0 * frac * lipschitz**2 * diam**2))
    )


def mean_median_gap(n: int, total: int, lipschitz: float, diam: float) -> float:
    """2e sqrt(4 pi (1 - n/N) diam^2 L^2), a mean-median distance bound."""
    frac = _check_fraction(n, total)
    lipschitz = _check_positive("lipschitz", lipschitz)
    diam = _check_positive("diam", diam)
    return float(2.0 * math.e * math.sqrt(4.0 * math.pi * frac * diam**2 * lipschitz**2))


@dataclass(frozen=True)
class BoundInfo:
    """Registry record: calculator, parameter names, sidedness and prefactor."""

    id: str
    fn: Callable
    params: tuple[str, ...]
    sided: str  # default deviation sidedness: "upper" or "two"
    prefactor: float
    qualitative: bool = False


REGISTRY: dict[str, BoundInfo] = {
    info.id: info
    for info in [
        BoundInfo("bounded-difference", bounded_difference, ("total", "sum_c_sq"), "upper", 1.0),
        BoundInfo("convex-lipschitz", convex_lipschitz, ("diam",), "upper", 1.0),
        BoundInfo("multilinear", multilinear_tail, ("norms", "diam", "c"), "two", 2.0, True),
        BoundInfo("triangles", triangle_tail, ("n_vertices", "edge_prob", "c"), "two", 2.0, True),
        BoundInfo(
            "triangles-relative",
            triangle_tail_relative,
            ("n_vertices", "edge_prob", "c"),
            "two",
            2.0,
            True,
        ),
        BoundInfo(
            "swor-bounded-difference",
            swor_bounded_difference,
            ("n", "total", "sum_c_sq"),
            "upper",
            1.0,
        ),
        BoundInfo("serfling", serfling, ("n", "total", "diam"), "upper", 1.0),
        BoundInfo("serfling-original", serfling_original, ("n", "total", "diam"), "upper", 1.0),
        BoundInfo("kolmogorov", kolmogorov_tail, ("n", "total"), "two", 2.0),
        BoundInfo(
            "convex-lipschitz-median",
            convex_lipschitz_median,
            ("lipschitz", "diam"),
            "two",
            4.0,
        ),
        BoundInfo("eigenvalue", eigenvalue_tail, ("diam",), "two", 4.0),
        BoundInfo("swor-convex-distance", swor_convex_distance, ("n", "total"), "upper", math.e),
        BoundInfo(
            "swor-convex-lipschitz",
            swor_convex_lipschitz,
            ("n", "total", "lipschitz", "diam"),
            "two",
            2.0 * math.e,
        ),
    ]
}


def evaluate_bound(bound_id: str, params: Mapping[str, object], t):
    """Look up a calculator and evaluate it on a threshold grid."""
    if bound_id not in REGISTRY:
        raise KeyError(f"unknown bound id {bound_id!r}")
    info = REGISTRY[bound_id]
    kwargs = {}
    for name in info.params:
        if name in params:
            kwargs[name] = params[name]
        elif name == "c":
            kwargs[name] = 1.0
        else:
            raise ValueError(f"bound {bound_id!r} needs parameter {name!r}")
    extra = set(params) - set(info.params)
    if extra:
        raise ValueError(f"unknown parameters for {bound_id!r}: {sorted(extra)}")
    return info.fn(t, **kwargs)
