"""Uniform measures on multislices and on their sampled prefixes.

A multislice is the set of all length-N real sequences in which the
level ``values[l]`` occurs exactly ``kappa[l]`` times.  Drawing the
first n coordinates of a uniform element is sampling n items out of N
without replacement.  This module holds the state-space bookkeeping:
validation, exact counting, lexicographic enumeration, uniform
sampling, coordinate switches and admissible replacements.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

import numpy as np

try:
    import tomllib as _toml
except ImportError:  # pragma: no cover - Python < 3.11
    import tomli as _toml

DEFAULT_ENUMERATION_CAP = 10**6

__all__ = [
    "DEFAULT_ENUMERATION_CAP",
    "EnumerationTooLarge",
    "MultisliceSpec",
    "cardinality",
    "prefix_cardinality",
    "enumerate_level_indices",
    "enumerate_configurations",
    "enumerate_prefix_level_indices",
    "sample_configuration",
    "sample_batch",
    "sample_prefix",
    "switch",
    "level_indices_of",
    "is_configuration",
    "is_prefix",
    "admissible_replacements",
    "EnumeratedMultislice",
    "EnumeratedPrefix",
    "spec_to_text",
    "spec_from_text",
    "save_configurations",
    "load_configurations",
]


class EnumerationTooLarge(ValueError):
    """Requested enumeration exceeds the state-count cap."""


@dataclass(frozen=True)
class MultisliceSpec:
    """Occupation counts ``kappa`` and the distinct levels they count.

    ``values`` must be strictly increasing; every count must be at
    least one.  N = sum(kappa) is the sequence length.
    """

    kappa: tuple[int, ...]
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        kappa = tuple(int(k) for k in self.kappa)
        values = tuple(float(v) for v in self.values)
        object.__setattr__(self, "kappa", kappa)
        object.__setattr__(self, "values", values)
        if len(kappa) < 2:
            raise ValueError("need at least two levels")
        if len(values) != len(kappa):
            raise ValueError("kappa and values must have equal length")
        if any(k < 1 for k in kappa):
            raise ValueError("every occupation count must be >= 1")
        if any(not math.isfinite(v) for v in values):
            raise ValueError("levels must be finite")
        if any(a >= b for a, b in zip(values, values[1:])):
            raise ValueError("levels must be strictly increasing")

    @property
    def num_levels(self) -> int:
        return len(self.kappa)

    @property
    def total(self) -> int:
        """Sequence length N."""
        return sum(self.kappa)

    @property
    def kappa_min(self) -> int:
        return min(self.kappa)

    @property
    def diameter(self) -> float:
        """Spread of the level set, values[-1] - values[0]."""
        return self.values[-1] - self.values[0]

    @property
    def mean(self) -> float:
        """Expectation of a single coordinate under the uniform measure."""
        return float(np.dot(self.kappa, self.values) / self.total)

    def base_sequence(self) -> np.ndarray:
        """The sorted configuration: level l repeated kappa[l] times."""
        return np.repeat(np.asarray(self.values, dtype=float), self.kappa)

    def base_level_indices(self) -> list[int]:
        return [l for l, k in enumerate(self.kappa) for _ in range(k)]

    def population_cdf(self) -> np.ndarray:
        """P(coordinate <= values[l]) for each level l."""
        return np.cumsum(self.kappa) / self.total


def cardinality(spec: MultisliceSpec) -> int:
    """Exact number of configurations, the multinomial N! / prod kappa_l!."""
    out = math.factorial(spec.total)
    for k in spec.kappa:
        out //= math.factorial(k)
    return out


def _completions(spec: MultisliceSpec, counts: Sequence[int], n: int) -> int:
    """Number of full configurations extending a prefix with these level counts."""
    out = math.factorial(spec.total - n)
    for k, c in zip(spec.kappa, counts):
        out //= math.factorial(k - c)
    return out


def prefix_cardinality(spec: MultisliceSpec, n: int) -> int:
    """Number of distinct length-n prefixes of configurations."""
    _check_prefix_length(spec, n)
    total = 0
    for counts in _prefix_count_vectors(spec, n):
        total += math.factorial(n) // math.prod(math.factorial(c) for c in counts)
    return total


def _prefix_count_vectors(spec: MultisliceSpec, n: int) -> Iterator[tuple[int, ...]]:
    """All level-count vectors c with sum(c) == n and c <= kappa."""

    def rec(level: int, remaining: int, acc: list[int]) -> Iterator[tuple[int, ...]]:
        if level == spec.num_levels - 1:
            if remaining <= spec.kappa[level]:
                yield tuple(acc + [remaining])
            return
        for c in range(min(remaining, spec.kappa[level]) + 1):
            yield from rec(level + 1, remaining - c, acc + [c])

    yield from rec(0, n, [])


def _check_prefix_length(spec: MultisliceSpec, n: int) -> None:
    if not 1 <= n <= spec.total:
        raise ValueError(f"prefix length must lie in [1, {spec.total}], got {n}")


def _next_permutation(a: list[int]) -> bool:
    """Advance to the lexicographic successor in place; False at the last one."""
    i = len(a) - 2
    while i >= 0 and a[i] >= a[i + 1]:
        i -= 1
    if i < 0:
        return False
    j = len(a) - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1 :] = a[:i:-1]
    return True


def enumerate_level_indices(
    spec: MultisliceSpec, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[int, ...]]:
    """Yield every configuration once as a level-index vector, lexicographically."""
    size = cardinality(spec)
    if size > cap:
        raise EnumerationTooLarge(f"{size} states exceed the cap {cap}")
    a = spec.base_level_indices()
    while True:
        yield tuple(a)
        if not _next_permutation(a):
            return


def enumerate_configurations(
    spec: MultisliceSpec, cap: int = DEFAULT_ENUMERATION_CAP
) -> np.ndarray:
    """All configurations as a (cardinality, N) float array, lexicographic."""
    idx = np.array(list(enumerate_level_indices(spec, cap)), dtype=np.intp)
    return np.asarray(spec.values, dtype=float)[idx]


def enumerate_prefix_level_indices(
    spec: MultisliceSpec, n: int, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[tuple[int, ...]]:
    """Yield every distinct length-n prefix as a level-index vector, lexicographically."""
    _check_prefix_length(spec, n)
    size = prefix_cardinality(spec, n)
    if size > cap:
        raise EnumerationTooLarge(f"{size} prefixes exceed the cap {cap}")

    counts = [0] * spec.num_levels
    acc: list[int] = []

    def rec() -> Iterator[tuple[int, ...]]:
        if len(acc) == n:
            yield tuple(acc)
            return
        for l in range(spec.num_levels):
            if counts[l] < spec.kappa[l]:
                counts[l] += 1
                acc.append(l)
                yield from rec()
                acc.pop()
                counts[l] -= 1

    yield from rec()


def sample_configuration(spec: MultisliceSpec, rng: np.random.Generator) -> np.ndarray:
    """One uniform configuration, an in-place shuffle of the sorted sequence."""
    return rng.permutation(spec.base_sequence())


def sample_batch(
    spec: MultisliceSpec, size: int, rng: np.random.Generator
) -> np.ndarray:
    """(size, N) array of independent uniform configurations."""
    if size < 0:
        raise ValueError("size must be nonnegative")
    out = np.tile(spec.base_sequence(), (size, 1))
    rng.permuted(out, axis=1, out=out)
    return out


def sample_prefix(
    spec: MultisliceSpec, n: int, rng: np.random.Generator
) -> np.ndarray:
    """First n coordinates of a uniform configuration (n of N without replacement)."""
    _check_prefix_length(spec, n)
    return sample_configuration(spec, rng)[:n]


def switch(config: np.ndarray, i: int, j: int) -> np.ndarray:
    """Copy of ``config`` with coordinates i and j (0-based) transposed."""
    w = np.array(config, dtype=float, copy=True)
    n = w.shape[0]
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"coordinates must lie in [0, {n})")
    if i == j:
        raise ValueError("coordinates must be distinct")
    w[i], w[j] = w[j], w[i]
    return w


def level_indices_of(spec: MultisliceSpec, config: Sequence[float]) -> np.ndarray:
    """Map configuration values back to level indices; exact equality required."""
    arr = np.asarray(config, dtype=float)
    vals = np.asarray(spec.values, dtype=float)
    idx = np.searchsorted(vals, arr)
    idx = np.clip(idx, 0, len(vals) - 1)
    if not np.array_equal(vals[idx], arr):
        raise ValueError("configuration contains values outside the level set")
    return idx


def is_configuration(spec: MultisliceSpec, config: Sequence[float]) -> bool:
    """True iff ``config`` lies on the multislice (exact counts, exact values)."""
    arr = np.asarray(config, dtype=float)
    if arr.ndim != 1 or arr.shape[0] != spec.total:
        return False
    try:
        idx = level_indices_of(spec, arr)
    except ValueError:
        return False
    counts = np.bincount(idx, minlength=spec.num_levels)
    return bool(np.array_equal(counts, spec.kappa))


def is_prefix(spec: MultisliceSpec, config: Sequence[float]) -> bool:
    """True iff ``config`` is a prefix of some configuration (counts <= kappa)."""
    arr = np.asarray(config, dtype=float)
    if arr.ndim != 1 or not 1 <= arr.shape[0] <= spec.total:
        return False
    try:
        idx = level_indices_of(spec, arr)
    except ValueError:
        return False
    counts = np.bincount(idx, minlength=spec.num_levels)
    return bool(np.all(counts <= spec.kappa))


def admissible_replacements(
    spec: MultisliceSpec, prefix: Sequence[float], i: int
) -> np.ndarray:
    """Levels that may replace ``prefix[i]`` so the prefix stays extendable.

    A level qualifies iff the replaced prefix still has all level counts
    bounded by kappa.  The current value always qualifies.  On a full
    configuration (n == N) it is the only one.
    """
    arr = np.asarray(prefix, dtype=float)
    if not is_prefix(spec, arr):
        raise ValueError("not a prefix of this multislice")
    if not 0 <= i < arr.shape[0]:
        raise IndexError("coordinate out of range")
    idx = level_indices_of(spec, arr)
    counts = np.bincount(idx, minlength=spec.num_levels)
    counts[idx[i]] -= 1
    ok = counts < np.asarray(spec.kappa)
    return np.asarray(spec.values, dtype=float)[ok]


class EnumeratedMultislice:
    """Fully enumerated multislice with constant-time state lookup.

    States are ordered lexicographically by level-index vector and the
    uniform measure puts mass 1/cardinality on each.  Switch
    permutations (state index -> index of the switched state) are built
    lazily per coordinate pair and cached.
    """

    def __init__(self, spec: MultisliceSpec, cap: int = DEFAULT_ENUMERATION_CAP):
        self.spec = spec
        self.level_indices = np.array(
            list(enumerate_level_indices(spec, cap)), dtype=np.intp
        )
        self.configurations = np.asarray(spec.values, dtype=float)[self.level_indices]
        self.size = self.level_indices.shape[0]
        self.weights = np.full(self.size, 1.0 / self.size)
        self._index = {
            tuple(row): s for s, row in enumerate(map(tuple, self.level_indices))
        }
        self._switch_cache: dict[tuple[int, int], np.ndarray] = {}

    def index_of(self, level_idx: Sequence[int]) -> int:
        return self._index[tuple(int(x) for x in level_idx)]

    @property
    def switch_pairs(self) -> list[tuple[int, int]]:
        n = self.spec.total
        return [(i, j) for i in range(n) for j in range(i + 1, n)]

    def switch_permutation(self, i: int, j: int) -> np.ndarray:
        """Index permutation realising the coordinate switch tau_ij."""
        if i > j:
            i, j = j, i
        key = (i, j)
        if key not in self._switch_cache:
            swapped = self.level_indices.copy()
            swapped[:, [i, j]] = swapped[:, [j, i]]
            perm = np.fromiter(
                (self._index[tuple(row)] for row in map(tuple, swapped)),
                dtype=np.intp,
                count=self.size,
            )
            self._switch_cache[key] = perm
        return self._switch_cache[key]


class EnumeratedPrefix:
    """Enumerated space of length-n prefixes with exact push-forward weights.

    The weight of a prefix is the number of full configurations
    extending it divided by the multislice cardinality; weights sum to
    one exactly in integer arithmetic before the final division.
    """

    def __init__(
        self, spec: MultisliceSpec, n: int, cap: int = DEFAULT_ENUMERATION_CAP
    ):
        self.spec = spec
        self.n = n
        self.level_indices = np.array(
            list(enumerate_prefix_level_indices(spec, n, cap)), dtype=np.intp
        )
        self.configurations = np.asarray(spec.values, dtype=float)[self.level_indices]
        self.size = self.level_indices.shape[0]
        card = cardinality(spec)
        comp = []
        for row in self.level_indices:
            counts = np.bincount(row, minlength=spec.num_levels)
            comp.append(_completions(spec, counts, n))
        self.completion_counts = np.array(comp, dtype=object)
        assert sum(self.completion_counts) == card
        self.weights = np.array([c / card for c in comp], dtype=float)
        self._index = {
            tuple(row): s for s, row in enumerate(map(tuple, self.level_indices))
        }
        self._replacement_cache: dict[int, list[np.ndarray]] = {}

    def index_of(self, level_idx: Sequence[int]) -> int:
        return self._index[tuple(int(x) for x in level_idx)]

    def replacement_neighbourhoods(self, i: int) -> list[np.ndarray]:
        """For each state, indices of states reachable by replacing coordinate i.

        Replacements must keep the prefix extendable; the state itself is
        always included.
        """
        if not 0 <= i < self.n:
            raise IndexError("coordinate out of range")
        if i not in self._replacement_cache:
            kappa = np.asarray(self.spec.kappa)
            hoods = []
            for row in self.level_indices:
                counts = np.bincount(row, minlength=self.spec.num_levels)
                counts[row[i]] -= 1
                out = []
                for l in range(self.spec.num_levels):
                    if counts[l] < kappa[l]:
                        alt = row.copy()
                        alt[i] = l
                        out.append(self._index[tuple(alt)])
                hoods.append(np.array(sorted(out), dtype=np.intp))
            self._replacement_cache[i] = hoods
        return self._replacement_cache[i]

    def is_symmetric(self, values: np.ndarray, atol: float = 0.0) -> bool:
        """True iff the table depends on a prefix only through its level counts."""
        seen: dict[tuple[int, ...], float] = {}
        for s, row in enumerate(self.level_indices):
            key = tuple(np.bincount(row, minlength=self.spec.num_levels))
            v = float(values[s])
            if key in seen:
                if abs(seen[key] - v) > atol:
                    return False
            else:
                seen[key] = v
        return True


def spec_to_text(spec: MultisliceSpec) -> str:
    """Serialise a spec as structured text with keys ``kappa`` and ``values``."""
    kappa = ", ".join(str(k) for k in spec.kappa)
    values = ", ".join(repr(v) for v in spec.values)
    return f"kappa = [{kappa}]\nvalues = [{values}]\n"


def spec_from_text(text: str) -> MultisliceSpec:
    data = _toml.loads(text)
    if "kappa" not in data or "values" not in data:
        raise ValueError("spec text needs 'kappa' and 'values' keys")
    return MultisliceSpec(tuple(data["kappa"]), tuple(data["values"]))


def save_configurations(path: str, configs: Iterable[Sequence[float]]) -> None:
    """Write configurations as JSON lines, one array per line."""
    with open(path, "w") as fh:
        for row in configs:
            fh.write(json.dumps([float(x) for x in row]) + "\n")


def load_configurations(path: str) -> np.ndarray:
    with open(path) as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    return np.asarray(rows, dtype=float)
