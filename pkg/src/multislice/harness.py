"""Parallel Monte Carlo tail estimation and exact product checks.

Experiments draw without-replacement samples in counter-keyed batches,
count threshold exceedances of a registered statistic around a chosen
center, attach exact binomial confidence limits, and compare the upper
limit against a registered tail bound.  Identical seeds give identical
reports for any worker count because batches, not workers, own the
random streams and every reduction runs in batch order.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import beta as _beta

from .bounds import REGISTRY as BOUND_REGISTRY
from .bounds import evaluate_bound
from .convex_distance import convex_distance
from .core import (
    EnumerationTooLarge,
    EnumeratedMultislice,
    MultisliceSpec,
    cardinality,
    sample_batch,
)
from .stats import (
    expected_triangles,
    kolmogorov_batch,
    sample_mean_batch,
    sample_std_batch,
    triangle_count_batch,
)
from .streams import BATCH_SIZE, batch_sizes, substream

CONFIDENCE_LEVEL = 0.999
TALAGRAND_CAP = 720
_CENTERINGS = ("exact-expectation", "mc-expectation", "median", "none")

__all__ = [
    "CONFIDENCE_LEVEL",
    "StatisticInfo",
    "STATISTICS",
    "TailExperiment",
    "CenterEstimate",
    "TailRow",
    "TailReport",
    "clopper_pearson",
    "estimate_center",
    "run_tail",
    "save_tail_csv",
    "save_tail_metadata",
    "TalagrandReport",
    "talagrand_product",
    "run_talagrand_exact",
    "run_talagrand_all_subsets",
]


@dataclass(frozen=True)
class StatisticInfo:
    """A batch-evaluable statistic with an optional closed-form center."""

    id: str
    evaluate: Callable[[MultisliceSpec, int, dict, np.ndarray], np.ndarray]
    exact_center: Callable[[MultisliceSpec, int, dict], float] | None
    validate: Callable[[MultisliceSpec, int, dict], None]


def _no_params(spec: MultisliceSpec, n: int, params: dict) -> None:
    if params:
        raise ValueError(f"unexpected statistic parameters: {sorted(params)}")


def _validate_std(spec: MultisliceSpec, n: int, params: dict) -> None:
    _no_params(spec, n, params)
    if n < 2:
        raise ValueError("sample standard deviation needs n >= 2")


def _validate_triangles(spec: MultisliceSpec, n: int, params: dict) -> None:
    extra = set(params) - {"n_vertices"}
    if extra:
        raise ValueError(f"unexpected statistic parameters: {sorted(extra)}")
    if "n_vertices" not in params:
        raise ValueError("triangle statistic needs n_vertices")
    v = int(params["n_vertices"])
    total = v * (v - 1) // 2
    if spec.total != total or n != total:
        raise ValueError("triangle statistic needs the full edge multislice")
    if spec.values != (0.0, 1.0):
        raise ValueError("triangle statistic needs 0/1 edge values")


def _triangle_center(spec: MultisliceSpec, n: int, params: dict) -> float:
    return expected_triangles(int(params["n_vertices"]), spec.kappa[1])


STATISTICS: dict[str, StatisticInfo] = {
    "sample-mean": StatisticInfo(
        "sample-mean",
        lambda spec, n, params, batch: sample_mean_batch(batch),
        lambda spec, n, params: spec.mean,
        _no_params,
    ),
    "sample-std": StatisticInfo(
        "sample-std",
        lambda spec, n, params, batch: sample_std_batch(batch),
        None,
        _validate_std,
    ),
    "kolmogorov": StatisticInfo(
        "kolmogorov",
        lambda spec, n, params, batch: kolmogorov_batch(batch, spec),
        None,
        _no_params,
    ),
    "triangles": StatisticInfo(
        "triangles",
        lambda spec, n, params, batch: triangle_count_batch(
            batch, int(params["n_vertices"])
        ),
        _triangle_center,
        _validate_triangles,
    ),
}


@dataclass(frozen=True)
class TailExperiment:
    """One tail-estimation run: statistic, thresholds, budget and bound.

    ``t_grid`` holds absolute deviations, or relative ones (epsilons)
    when ``relative`` is set, in which case thresholds become t * center.
    ``scale`` multiplies the centered statistic before thresholding.
    """

    spec: MultisliceSpec
    n: int
    statistic: str
    t_grid: tuple[float, ...]
    samples: int
    seed: int
    bound: str
    statistic_params: dict = field(default_factory=dict)
    bound_params: dict = field(default_factory=dict)
    workers: int = 1
    centering: str = "exact-expectation"
    scale: float = 1.0
    relative: bool = False
    sided: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "t_grid", tuple(float(t) for t in self.t_grid))
        if not 1 <= self.n <= self.spec.total:
            raise ValueError("n must lie in 1..N")
        if self.samples < 1000:
            raise ValueError("need at least 1000 samples")
        if len(self.t_grid) == 0:
            raise ValueError("t_grid must be nonempty")
        if any(t < 0 for t in self.t_grid):
            raise ValueError("thresholds must be nonnegative")
        if any(a >= b for a, b in zip(self.t_grid, self.t_grid[1:])):
            raise ValueError("t_grid must be strictly increasing")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        if self.centering not in _CENTERINGS:
            raise ValueError(f"centering must be one of {_CENTERINGS}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be positive")
        if self.sided not in (None, "upper", "two"):
            raise ValueError("sided must be 'upper' or 'two'")


@dataclass(frozen=True)
class CenterEstimate:
    value: float
    se: float
    method: str


@dataclass(frozen=True)
class TailRow:
    t: float
    threshold: float  # effective deviation threshold after widening
    count: int
    p_hat: float
    ci_lo: float
    ci_hi: float
    bound: float
    verdict: str


@dataclass(frozen=True)
class TailReport:
    experiment: TailExperiment
    center: CenterEstimate
    rows: tuple[TailRow, ...]
    qualitative: bool
    passed: bool
    runtime_seconds: float


def clopper_pearson(k: int, n: int, level: float = CONFIDENCE_LEVEL) -> tuple[float, float]:
    """Exact binomial confidence interval for k successes in n trials."""
    if not 0 <= k <= n or n <= 0:
        raise ValueError("need 0 <= k <= n with n positive")
    alpha = 1.0 - level
    lo = 0.0 if k == 0 else float(_beta.ppf(alpha / 2.0, k, n - k + 1))
    hi = 1.0 if k == n else float(_beta.ppf(1.0 - alpha / 2.0, k + 1, n - k))
    return lo, hi


def _effective_workers(experiment: TailExperiment) -> int:
    env = os.environ.get("CONC_THREADS")
    if env is not None:
        workers = int(env)
        if workers < 1:
            raise ValueError("CONC_THREADS must be at least 1")
        return workers
    return experiment.workers


def _map_batches(fn: Callable[[int, int], object], sizes: Sequence[int], workers: int):
    """Apply fn(batch_index, batch_size); results come back in batch order."""
    if workers <= 1:
        return [fn(b, size) for b, size in enumerate(sizes)]
    out: list[object] = [None] * len(sizes)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {
            pool.submit(fn, b, size): b for b, size in enumerate(sizes)
        }
        for fut in futures:
            out[futures[fut]] = fut.result()
    return out


def _sample_values(
    experiment: TailExperiment, stat: StatisticInfo, b: int, size: int, center_pass: bool
) -> np.ndarray:
    rng = substream(experiment.seed, b, center_pass=center_pass)
    batch = sample_batch(experiment.spec, size, rng)[:, : experiment.n]
    return stat.evaluate(experiment.spec, experiment.n, experiment.statistic_params, batch)


def estimate_center(experiment: TailExperiment, workers: int | None = None) -> CenterEstimate:
    """Statistic center per the experiment's centering mode.

    Closed forms where the registry has them; otherwise a Monte Carlo
    mean with its standard error, or the empirical median with an
    order-statistic error proxy.  The 'none' mode centers at zero for
    statistics that already are deviations.
    """
    stat = STATISTICS[experiment.statistic]
    stat.validate(experiment.spec, experiment.n, experiment.statistic_params)
    mode = experiment.centering
    if mode == "none":
        return CenterEstimate(0.0, 0.0, mode)
    if mode == "exact-expectation":
        if stat.exact_center is None:
            raise ValueError(
                f"no closed-form center for statistic '{experiment.statistic}'"
            )
        value = float(
            stat.exact_center(experiment.spec, experiment.n, experiment.statistic_params)
        )
        return CenterEstimate(value, 0.0, mode)

    if workers is None:
        workers = _effective_workers(experiment)
    sizes = batch_sizes(experiment.samples)

    if mode == "mc-expectation":
        def one(b: int, size: int) -> tuple[float, float]:
            vals = _sample_values(experiment, stat, b, size, center_pass=True)
            return float(vals.sum()), float(np.square(vals).sum())

        parts = _map_batches(one, sizes, workers)
        total = sum(p[0] for p in parts)
        total_sq = sum(p[1] for p in parts)
        m = experiment.samples
        mean = total / m
        var = max(total_sq - m * mean * mean, 0.0) / (m - 1)
        return CenterEstimate(mean, math.sqrt(var / m), mode)

    # median: keep all values, error proxy from a 3-sigma rank interval
    def one_vals(b: int, size: int) -> np.ndarray:
        return _sample_values(experiment, stat, b, size, center_pass=True)

    vals = np.sort(np.concatenate(_map_batches(one_vals, sizes, workers)))
    m = vals.size
    med = float(np.median(vals))
    half = 1.5 * math.sqrt(m)
    lo = int(max(0, math.floor(m / 2 - half)))
    hi = int(min(m - 1, math.ceil(m / 2 + half)))
    se = float(vals[hi] - vals[lo]) / 6.0
    return CenterEstimate(med, se, mode)


def run_tail(experiment: TailExperiment) -> TailReport:
    """Estimate the tail on the threshold grid and compare with the bound.

    A DOMINATED verdict means the exact binomial upper confidence limit
    sits below the bound; qualitative bounds (unspecified constants)
    instead require the empirical tail to decay monotonically.
    Monte-Carlo-estimated centers widen each event by three standard
    errors so center noise cannot produce a false failure.
    """
    start = time.perf_counter()
    if experiment.statistic not in STATISTICS:
        raise KeyError(f"unknown statistic id: {experiment.statistic}")
    if experiment.bound not in BOUND_REGISTRY:
        raise KeyError(f"unknown bound id: {experiment.bound}")
    stat = STATISTICS[experiment.statistic]
    stat.validate(experiment.spec, experiment.n, experiment.statistic_params)
    bound_info = BOUND_REGISTRY[experiment.bound]
    sided = experiment.sided or bound_info.sided

    workers = _effective_workers(experiment)
    center = estimate_center(experiment, workers)

    t_grid = np.array(experiment.t_grid)
    thresholds = t_grid * center.value if experiment.relative else t_grid
    widen = 3.0 * experiment.scale * center.se
    effective = np.clip(thresholds - widen, 0.0, None)

    sizes = batch_sizes(experiment.samples)

    def one(b: int, size: int) -> np.ndarray:
        vals = _sample_values(experiment, stat, b, size, center_pass=False)
        dev = experiment.scale * (vals - center.value)
        if sided == "two":
            dev = np.abs(dev)
        return (dev[:, None] >= effective[None, :]).sum(axis=0).astype(np.int64)

    counts = sum(_map_batches(one, sizes, workers))

    rows = []
    all_ok = True
    for k, t in enumerate(experiment.t_grid):
        count = int(counts[k])
        p_hat = count / experiment.samples
        ci_lo, ci_hi = clopper_pearson(count, experiment.samples)
        bound_val = float(evaluate_bound(experiment.bound, experiment.bound_params, t))
        if bound_info.qualitative:
            verdict = "QUALITATIVE"
        elif ci_hi <= bound_val:
            verdict = "DOMINATED"
        else:
            verdict = "EXCEEDS"
            all_ok = False
        rows.append(
            TailRow(t, float(effective[k]), count, p_hat, ci_lo, ci_hi, bound_val, verdict)
        )

    if bound_info.qualitative:
        p = [r.p_hat for r in rows]
        all_ok = all(a >= b for a, b in zip(p, p[1:]))

    return TailReport(
        experiment=experiment,
        center=center,
        rows=tuple(rows),
        qualitative=bound_info.qualitative,
        passed=all_ok,
        runtime_seconds=time.perf_counter() - start,
    )


def save_tail_csv(path: str, report: TailReport) -> None:
    """Plot-ready CSV; the body is identical for any worker count."""
    with open(path, "w") as fh:
        fh.write("t,p_hat,ci_lo,ci_hi,bound,verdict\n")
        for r in report.rows:
            fh.write(f"{r.t!r},{r.p_hat!r},{r.ci_lo!r},{r.ci_hi!r},{r.bound!r},{r.verdict}\n")


def save_tail_metadata(path: str, report: TailReport) -> None:
    """One JSON line describing the run, its center and the verdicts."""
    exp = report.experiment
    record = {
        "kappa": list(exp.spec.kappa),
        "values": list(exp.spec.values),
        "n": exp.n,
        "statistic": exp.statistic,
        "statistic_params": exp.statistic_params,
        "bound": exp.bound,
        "bound_params": exp.bound_params,
        "t_grid": list(exp.t_grid),
        "samples": exp.samples,
        "seed": exp.seed,
        "batch_size": BATCH_SIZE,
        "centering": exp.centering,
        "center": report.center.value,
        "center_se": report.center.se,
        "scale": exp.scale,
        "relative": exp.relative,
        "sided": exp.sided,
        "qualitative": report.qualitative,
        "passed": report.passed,
        "runtime_seconds": report.runtime_seconds,
        "verdicts": [r.verdict for r in report.rows],
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(record) + "\n")


@dataclass(frozen=True)
class TalagrandReport:
    num_sets: int
    max_product: float
    passed: bool


def _check_talagrand_spec(spec: MultisliceSpec) -> EnumeratedMultislice:
    if cardinality(spec) > TALAGRAND_CAP:
        raise EnumerationTooLarge(
            f"cardinality {cardinality(spec)} exceeds the exact cap {TALAGRAND_CAP}"
        )
    return EnumeratedMultislice(spec)


def talagrand_product(
    space: EnumeratedMultislice, member_indices: Sequence[int]
) -> tuple[float, float, float]:
    """(set mass, exp moment of squared distance / 144, their product)."""
    idx = sorted(set(int(i) for i in member_indices))
    if not idx:
        raise ValueError("member set must be nonempty")
    members = space.configurations[idx]
    prob = float(space.weights[idx].sum())
    moment = 0.0
    for s in range(space.size):
        d = convex_distance(space.configurations[s], members).value
        moment += space.weights[s] * math.exp(d * d / 144.0)
    return prob, moment, prob * moment


def run_talagrand_exact(
    spec: MultisliceSpec,
    set_size: int | None = None,
    trials: int = 50,
    seed: int = 0,
    tol: float = 1e-9,
) -> TalagrandReport:
    """Exact product check on random member sets over the whole space.

    ``set_size`` fixes the set cardinality; when omitted each trial
    draws a uniform size.  All states are enumerated, so the product is
    exact and PASS means max over trials <= 1 + tol.
    """
    space = _check_talagrand_spec(spec)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        size = int(set_size) if set_size is not None else int(rng.integers(1, space.size + 1))
        if not 1 <= size <= space.size:
            raise ValueError("set size must lie in 1..cardinality")
        idx = rng.choice(space.size, size=size, replace=False)
        worst = max(worst, talagrand_product(space, idx)[2])
    return TalagrandReport(trials, worst, worst <= 1.0 + tol)


def run_talagrand_all_subsets(spec: MultisliceSpec, tol: float = 1e-9) -> TalagrandReport:
    """Exact product check on every nonempty subset of the space."""
    space = _check_talagrand_spec(spec)
    if space.size > 20:
        raise EnumerationTooLarge("subset enumeration capped at 2^20 sets")
    worst = 0.0
    num = 0
    for mask in range(1, 1 << space.size):
        idx = [s for s in range(space.size) if mask >> s & 1]
        worst = max(worst, talagrand_product(space, idx)[2])
        num += 1
    return TalagrandReport(num, worst, worst <= 1.0 + tol)
