"""Statistics evaluated on configurations and their sampled prefixes.

Covers the scalar sample functionals (mean, standard deviation, the
one-sided Kolmogorov statistic), edge-indicator graph statistics
(triangle counts under a fixed edge budget), sparse multilinear
polynomials with their gradient tensors, and exact product moments of
distinct coordinates under the uniform multislice measure.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .core import MultisliceSpec

MAX_PRODUCT_MOMENT_ORDER = 6
MAX_DENSE_TENSOR_ORDER = 3
MAX_DENSE_TENSOR_DIM = 64

__all__ = [
    "sample_mean",
    "sample_std",
    "sample_mean_batch",
    "sample_std_batch",
    "kolmogorov_stat",
    "kolmogorov_batch",
    "EdgeConfiguration",
    "edge_pairs",
    "edge_index",
    "edge_multislice",
    "triangle_triples",
    "triangle_count",
    "triangle_count_batch",
    "expected_triangles",
    "triangle_polynomial",
    "product_moment",
    "assignment_probability",
    "MultilinearPolynomial",
    "gradient_tensor",
    "expected_gradient_tensor",
    "quadratic_form",
    "quadratic_polynomial",
    "largest_abs_eigenvalue",
    "save_polynomial",
    "load_polynomial",
    "save_matrix",
    "load_matrix",
]


def sample_mean(config: Sequence[float]) -> float:
    arr = np.asarray(config, dtype=float)
    if arr.size == 0:
        raise ValueError("empty configuration")
    return float(arr.mean())


def sample_std(config: Sequence[float]) -> float:
    """Square root of the unbiased sample variance (ddof 1)."""
    arr = np.asarray(config, dtype=float)
    if arr.size < 2:
        raise ValueError("need at least two coordinates")
    return float(arr.std(ddof=1))


def sample_mean_batch(batch: np.ndarray) -> np.ndarray:
    return np.asarray(batch, dtype=float).mean(axis=1)


def sample_std_batch(batch: np.ndarray) -> np.ndarray:
    return np.asarray(batch, dtype=float).std(axis=1, ddof=1)


def kolmogorov_stat(prefix: Sequence[float], spec: MultisliceSpec) -> float:
    """One-sided sup of empirical CDF minus population CDF.

    Both step functions jump only at the population levels, so the sup
    over the real line is attained on that grid.
    """
    return float(kolmogorov_batch(np.asarray(prefix, dtype=float)[None, :], spec)[0])


def kolmogorov_batch(batch: np.ndarray, spec: MultisliceSpec) -> np.ndarray:
    batch = np.asarray(batch, dtype=float)
    n = batch.shape[1]
    pop = spec.population_cdf()
    diffs = np.empty((batch.shape[0], spec.num_levels))
    for l, v in enumerate(spec.values):
        diffs[:, l] = (batch <= v).sum(axis=1) / n - pop[l]
    return diffs.max(axis=1)


def edge_pairs(n_vertices: int) -> list[tuple[int, int]]:
    """Vertex pairs (i < j) in lexicographic order; the edge coordinate order."""
    return list(itertools.combinations(range(n_vertices), 2))


def edge_index(n_vertices: int, i: int, j: int) -> int:
    """Position of edge {i, j} in the lexicographic pair order."""
    if not 0 <= i < j < n_vertices:
        raise ValueError("need 0 <= i < j < n_vertices")
    return i * n_vertices - i * (i + 1) // 2 + (j - i - 1)


@dataclass(frozen=True)
class EdgeConfiguration:
    """A graph on ``n_vertices`` encoded as a 0/1 edge-indicator vector.

    Coordinates follow the lexicographic order of vertex pairs.
    """

    n_vertices: int
    edges: tuple[int, ...]

    def __post_init__(self) -> None:
        n = int(self.n_vertices)
        edges = tuple(int(e) for e in self.edges)
        object.__setattr__(self, "n_vertices", n)
        object.__setattr__(self, "edges", edges)
        if n < 2:
            raise ValueError("need at least two vertices")
        if len(edges) != n * (n - 1) // 2:
            raise ValueError("edge vector length must be n_vertices choose 2")
        if any(e not in (0, 1) for e in edges):
            raise ValueError("edge indicators must be 0 or 1")

    @property
    def num_edges(self) -> int:
        return sum(self.edges)

    def adjacency(self) -> np.ndarray:
        n = self.n_vertices
        adj = np.zeros((n, n), dtype=np.int64)
        for e, (i, j) in enumerate(edge_pairs(n)):
            adj[i, j] = adj[j, i] = self.edges[e]
        return adj


def edge_multislice(n_vertices: int, num_edges: int) -> MultisliceSpec:
    """Uniform graphs with a fixed edge budget as a two-level multislice.

    Requires 0 < num_edges < binom(n_vertices, 2) so both levels occur.
    """
    total = n_vertices * (n_vertices - 1) // 2
    if not 0 < num_edges < total:
        raise ValueError("edge budget must leave both levels occupied")
    return MultisliceSpec((total - num_edges, num_edges), (0.0, 1.0))


def triangle_triples(n_vertices: int) -> np.ndarray:
    """Edge-coordinate triples forming each vertex triangle, shape (T, 3)."""
    out = []
    for i, j, k in itertools.combinations(range(n_vertices), 3):
        out.append(
            (
                edge_index(n_vertices, i, j),
                edge_index(n_vertices, j, k),
                edge_index(n_vertices, i, k),
            )
        )
    return np.array(out, dtype=np.intp)


def triangle_count(edges: Sequence[float], n_vertices: int) -> float:
    return float(triangle_count_batch(np.asarray(edges, dtype=float)[None, :], n_vertices)[0])


def triangle_count_batch(batch: np.ndarray, n_vertices: int) -> np.ndarray:
    batch = np.asarray(batch, dtype=float)
    if batch.shape[1] != n_vertices * (n_vertices - 1) // 2:
        raise ValueError("edge vector length must be n_vertices choose 2")
    triples = triangle_triples(n_vertices)
    return batch[:, triples].prod(axis=2).sum(axis=1)


def expected_triangles(n_vertices: int, num_edges: int) -> float:
    """Exact mean triangle count of a uniform graph with this edge budget."""
    total = n_vertices * (n_vertices - 1) // 2
    if not 0 <= num_edges <= total:
        raise ValueError("edge budget out of range")
    num = math.comb(n_vertices, 3) * num_edges * (num_edges - 1) * (num_edges - 2)
    den = total * (total - 1) * (total - 2)
    return float(Fraction(max(num, 0), den))


@dataclass(frozen=True)
class MultilinearPolynomial:
    """Sparse multilinear polynomial over ``dimension`` coordinates.

    ``terms`` maps strictly increasing index tuples to coefficients; the
    symmetric coefficient tensor is implied and vanishes on repeated
    indices.  ``constant`` is the order-zero term.
    """

    dimension: int
    terms: dict[tuple[int, ...], float] = field(default_factory=dict)
    constant: float = 0.0

    def __post_init__(self) -> None:
        dim = int(self.dimension)
        object.__setattr__(self, "dimension", dim)
        object.__setattr__(self, "constant", float(self.constant))
        if dim < 1:
            raise ValueError("dimension must be positive")
        clean: dict[tuple[int, ...], float] = {}
        for tup, coeff in self.terms.items():
            tup = tuple(int(i) for i in tup)
            coeff = float(coeff)
            if len(tup) == 0:
                raise ValueError("order-zero terms belong in 'constant'")
            if any(a >= b for a, b in zip(tup, tup[1:])):
                raise ValueError(f"index tuple {tup} must be strictly increasing")
            if tup[0] < 0 or tup[-1] >= dim:
                raise ValueError(f"index tuple {tup} out of range")
            if not math.isfinite(coeff):
                raise ValueError("coefficients must be finite")
            if coeff != 0.0:
                clean[tup] = coeff
        object.__setattr__(self, "terms", clean)

    @property
    def degree(self) -> int:
        return max((len(t) for t in self.terms), default=0)

    def evaluate(self, config: Sequence[float]) -> float:
        return float(self.evaluate_batch(np.asarray(config, dtype=float)[None, :])[0])

    def evaluate_batch(self, batch: np.ndarray) -> np.ndarray:
        batch = np.asarray(batch, dtype=float)
        if batch.shape[1] != self.dimension:
            raise ValueError("configuration length does not match dimension")
        out = np.full(batch.shape[0], self.constant)
        for tup, coeff in self.terms.items():
            out += coeff * batch[:, tup].prod(axis=1)
        return out


def triangle_polynomial(n_vertices: int) -> MultilinearPolynomial:
    """Triangle count as a degree-3 polynomial in the edge coordinates."""
    terms = {tuple(sorted(t)): 1.0 for t in map(tuple, triangle_triples(n_vertices))}
    return MultilinearPolynomial(n_vertices * (n_vertices - 1) // 2, terms)


def _check_dense_limits(order: int, dimension: int) -> None:
    if order > MAX_DENSE_TENSOR_ORDER:
        raise ValueError(f"dense tensors are materialised only up to order {MAX_DENSE_TENSOR_ORDER}")
    if dimension > MAX_DENSE_TENSOR_DIM:
        raise ValueError(f"dense tensors are materialised only up to dimension {MAX_DENSE_TENSOR_DIM}")


def gradient_tensor(
    poly: MultilinearPolynomial, config: Sequence[float], order: int
) -> np.ndarray:
    """Order-k derivative tensor at ``config``, symmetric and zero on diagonals.

    Entry (j_1, ..., j_k) with distinct j's sums, over monomials
    containing all of them, the coefficient times the product of the
    remaining coordinates.
    """
    if order < 1:
        raise ValueError("order must be at least one")
    _check_dense_limits(order, poly.dimension)
    arr = np.asarray(config, dtype=float)
    if arr.shape[0] != poly.dimension:
        raise ValueError("configuration length does not match dimension")
    out = np.zeros((poly.dimension,) * order)
    for tup, coeff in poly.terms.items():
        if len(tup) < order:
            continue
        for sub in itertools.combinations(tup, order):
            rest = [i for i in tup if i not in sub]
            v = coeff * arr[rest].prod() if rest else coeff
            for perm in itertools.permutations(sub):
                out[perm] += v
    return out


def expected_gradient_tensor(
    poly: MultilinearPolynomial, spec: MultisliceSpec, order: int
) -> np.ndarray:
    """Entrywise expectation of the order-k derivative tensor under the spec."""
    if order < 1:
        raise ValueError("order must be at least one")
    _check_dense_limits(order, poly.dimension)
    if poly.dimension != spec.total:
        raise ValueError("polynomial dimension does not match the spec length")
    moments = [
        product_moment(spec, tuple(range(m))) if m else 1.0
        for m in range(max(poly.degree - order, 0) + 1)
    ]
    out = np.zeros((poly.dimension,) * order)
    for tup, coeff in poly.terms.items():
        if len(tup) < order:
            continue
        for sub in itertools.combinations(tup, order):
            v = coeff * moments[len(tup) - order]
            for perm in itertools.permutations(sub):
                out[perm] += v
    return out


def product_moment(spec: MultisliceSpec, indices: Sequence[int]) -> float:
    """Exact expectation of the product of the listed distinct coordinates.

    By exchangeability only the number of coordinates matters.  Computed
    by enumerating level-count vectors of the assignment and weighting
    with falling factorials of the occupation counts.
    """
    idx = tuple(int(i) for i in indices)
    k = len(idx)
    if len(set(idx)) != k:
        raise ValueError("indices must be distinct")
    if any(i < 0 or i >= spec.total for i in idx):
        raise ValueError("index out of range")
    if k == 0:
        return 1.0
    if k > MAX_PRODUCT_MOMENT_ORDER:
        raise ValueError(f"product moments supported up to order {MAX_PRODUCT_MOMENT_ORDER}")
    den = math.perm(spec.total, k)
    acc = Fraction(0)
    for counts in _bounded_count_vectors(spec.kappa, k):
        ways = math.factorial(k)
        prob_num = 1
        prod_val = Fraction(1)
        for l, c in enumerate(counts):
            ways //= math.factorial(c)
            prob_num *= math.perm(spec.kappa[l], c)
            prod_val *= Fraction(spec.values[l]) ** c
        acc += Fraction(ways * prob_num, den) * prod_val
    return float(acc)


def _bounded_count_vectors(kappa: Sequence[int], k: int):
    L = len(kappa)

    def rec(level: int, remaining: int, acc: list[int]):
        if level == L - 1:
            if remaining <= kappa[level]:
                yield tuple(acc + [remaining])
            return
        for c in range(min(remaining, kappa[level]) + 1):
            yield from rec(level + 1, remaining - c, acc + [c])

    yield from rec(0, k, [])


def assignment_probability(spec: MultisliceSpec, values: Sequence[float]) -> float:
    """Exact probability that k distinct coordinates equal the given values in order."""
    arr = np.asarray(values, dtype=float)
    k = arr.shape[0]
    if k > spec.total:
        raise ValueError("more values than coordinates")
    level_of = {v: l for l, v in enumerate(spec.values)}
    counts = [0] * spec.num_levels
    for v in arr:
        if float(v) not in level_of:
            raise ValueError("value outside the level set")
        counts[level_of[float(v)]] += 1
    if any(c > kl for c, kl in zip(counts, spec.kappa)):
        return 0.0
    num = 1
    for l, c in enumerate(counts):
        num *= math.perm(spec.kappa[l], c)
    return float(Fraction(num, math.perm(spec.total, k)))


def quadratic_form(matrix: np.ndarray, config: Sequence[float]) -> float:
    """Evaluate the centered quadratic statistic x -> x.T A x / 2.

    The coefficient matrix must be symmetric with zero diagonal, so the
    statistic is the multilinear polynomial sum_{i<j} A_ij x_i x_j.
    """
    A = np.asarray(matrix, dtype=float)
    x = np.asarray(config, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.array_equal(A, A.T):
        raise ValueError("matrix must be symmetric")
    if np.any(np.diag(A) != 0.0):
        raise ValueError("matrix must have zero diagonal")
    if A.shape[0] != x.shape[0]:
        raise ValueError("dimension mismatch")
    return float(x @ A @ x / 2.0)


def quadratic_polynomial(matrix: np.ndarray) -> MultilinearPolynomial:
    """The quadratic statistic as a sparse degree-2 polynomial."""
    A = np.asarray(matrix, dtype=float)
    quadratic_form(A, np.zeros(A.shape[0]))  # reuse validation
    terms = {
        (i, j): A[i, j]
        for i in range(A.shape[0])
        for j in range(i + 1, A.shape[0])
        if A[i, j] != 0.0
    }
    return MultilinearPolynomial(A.shape[0], terms)


def largest_abs_eigenvalue(matrix: np.ndarray) -> float:
    """Spectral radius of a symmetric matrix."""
    A = np.asarray(matrix, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("matrix must be square")
    if not np.allclose(A, A.T, rtol=0, atol=0):
        raise ValueError("matrix must be symmetric")
    return float(np.max(np.abs(np.linalg.eigvalsh(A))))


def save_polynomial(path: str, poly: MultilinearPolynomial) -> None:
    """JSON lines: one record per term with order, indices and coefficient."""
    with open(path, "w") as fh:
        fh.write(
            json.dumps({"order": 0, "indices": [], "coefficient": poly.constant, "dimension": poly.dimension})
            + "\n"
        )
        for tup in sorted(poly.terms, key=lambda t: (len(t), t)):
            rec = {"order": len(tup), "indices": list(tup), "coefficient": poly.terms[tup]}
            fh.write(json.dumps(rec) + "\n")


def load_polynomial(path: str) -> MultilinearPolynomial:
    constant = 0.0
    dimension = None
    terms: dict[tuple[int, ...], float] = {}
    with open(path) as fh:
        for line in fh:
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec["order"] == 0:
                constant = float(rec["coefficient"])
                dimension = int(rec["dimension"])
            else:
                terms[tuple(rec["indices"])] = float(rec["coefficient"])
    if dimension is None:
        dimension = 1 + max((t[-1] for t in terms), default=0)
    return MultilinearPolynomial(dimension, terms, constant)


def save_matrix(path: str, matrix: np.ndarray) -> None:
    np.savetxt(path, np.asarray(matrix, dtype=float), delimiter=",")


def load_matrix(path: str) -> np.ndarray:
    out = np.loadtxt(path, delimiter=",")
    return np.atleast_2d(out)
