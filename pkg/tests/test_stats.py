"""Statistics, polynomials and exact moments against independent oracles."""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from multislice.core import EnumeratedMultislice, MultisliceSpec, sample_batch
from multislice.stats import (
    EdgeConfiguration,
    MultilinearPolynomial,
    assignment_probability,
    edge_index,
    edge_multislice,
    edge_pairs,
    expected_gradient_tensor,
    expected_triangles,
    gradient_tensor,
    kolmogorov_batch,
    kolmogorov_stat,
    largest_abs_eigenvalue,
    load_matrix,
    load_polynomial,
    product_moment,
    quadratic_form,
    quadratic_polynomial,
    sample_mean,
    sample_mean_batch,
    sample_std,
    sample_std_batch,
    save_matrix,
    save_polynomial,
    triangle_count,
    triangle_count_batch,
    triangle_polynomial,
)


# ---------------------------------------------------------------- oracles


def enumeration_moment(spec, k):
    """Oracle: average the product of the first k coordinates over all states."""
    space = EnumeratedMultislice(spec)
    return float(space.configurations[:, :k].prod(axis=1).mean())


def kolmogorov_grid_oracle(prefix, spec, grid=10_000):
    """Oracle: sup over a dense real grid spanning beyond the level range."""
    prefix = np.asarray(prefix, dtype=float)
    lo, hi = spec.values[0] - 1.0, spec.values[-1] + 1.0
    ts = np.linspace(lo, hi, grid)
    ecdf = (prefix[None, :] <= ts[:, None]).mean(axis=1)
    pop = np.zeros_like(ts)
    for l, v in enumerate(spec.values):
        pop += np.where(ts >= v, spec.kappa[l] / spec.total, 0.0)
    return float((ecdf - pop).max())


def divided_difference_partial(poly, config, coords):
    """Oracle: mixed partial of a multilinear map via 2^k divided differences."""
    coords = list(coords)
    total = 0.0
    for signs in itertools.product((1.0, 0.0), repeat=len(coords)):
        point = np.array(config, dtype=float)
        for c, s in zip(coords, signs):
            point[c] = s
        total += (-1) ** signs.count(0.0) * poly.evaluate(point)
    return total


def cubic_eigen_oracle(A):
    """Oracle: eigenvalues of a symmetric 3x3 via the trigonometric cubic formula."""
    A = np.asarray(A, dtype=float)
    q = np.trace(A) / 3.0
    B = A - q * np.eye(3)
    p = math.sqrt(max(np.trace(B @ B) / 6.0, 0.0))
    if p == 0.0:
        return np.array([q, q, q])
    detB = np.linalg.det(B / p)
    r = min(max(detB / 2.0, -1.0), 1.0)
    phi = math.acos(r) / 3.0
    eig = [q + 2 * p * math.cos(phi + 2 * math.pi * k / 3) for k in range(3)]
    return np.array(sorted(eig))


# ------------------------------------------------------ scalar functionals


def test_sample_mean_and_std_basics():
    assert sample_mean([0.0, 1.0, 1.0]) == pytest.approx(2 / 3)
    assert sample_std([0.0, 2.0]) == pytest.approx(math.sqrt(2.0))
    with pytest.raises(ValueError):
        sample_std([1.0])
    with pytest.raises(ValueError):
        sample_mean([])


def test_sample_std_pairwise_identity():
    # ddof-1 variance equals the average squared pairwise gap over n(n-1)
    rng = np.random.default_rng(5)
    x = rng.normal(size=9)
    n = x.size
    pair = sum((a - b) ** 2 for a, b in itertools.combinations(x, 2))
    assert sample_std(x) == pytest.approx(math.sqrt(pair * 2 / (n * (n - 1)) / 2))


def test_batch_functionals_match_scalars():
    rng = np.random.default_rng(11)
    batch = rng.normal(size=(16, 6))
    assert np.allclose(sample_mean_batch(batch), [sample_mean(r) for r in batch])
    assert np.allclose(sample_std_batch(batch), [np.std(r, ddof=1) for r in batch])


def test_kolmogorov_examples_and_oracle():
    spec = MultisliceSpec((1, 1, 1, 1), (1.0, 2.0, 3.0, 4.0))
    # prefix (3, 4): empirical CDF never exceeds the population CDF
    assert kolmogorov_stat([3.0, 4.0], spec) == pytest.approx(0.0)
    # prefix (1, 2): empirical CDF is 1 at value 2, population CDF is 1/2
    assert kolmogorov_stat([1.0, 2.0], spec) == pytest.approx(0.5)
    spec2 = MultisliceSpec((3, 2), (-1.0, 1.5))
    for prefix in ([-1.0, -1.0], [-1.0, 1.5], [1.5, 1.5], [-1.0, -1.0, 1.5]):
        assert kolmogorov_stat(prefix, spec2) == pytest.approx(
            kolmogorov_grid_oracle(prefix, spec2), abs=1e-12
        )


def test_kolmogorov_batch_matches_scalar():
    spec = MultisliceSpec((2, 3, 1), (0.0, 0.5, 2.0))
    rng = np.random.default_rng(2)
    batch = sample_batch(spec, 50, rng)[:, :4]
    single = [kolmogorov_stat(row, spec) for row in batch]
    assert np.allclose(kolmogorov_batch(batch, spec), single)


# ------------------------------------------------------------ graph counts


def test_edge_index_matches_pair_order():
    n = 6
    for e, (i, j) in enumerate(edge_pairs(n)):
        assert edge_index(n, i, j) == e


def test_edge_configuration_validation():
    with pytest.raises(ValueError):
        EdgeConfiguration(4, (1, 0, 1))
    with pytest.raises(ValueError):
        EdgeConfiguration(3, (1, 0, 2))
    conf = EdgeConfiguration(4, (1, 1, 0, 1, 0, 1))
    assert conf.num_edges == 4
    assert np.array_equal(conf.adjacency(), conf.adjacency().T)


def test_triangle_count_known_graphs():
    # complete graph on 4 vertices has 4 triangles
    assert triangle_count([1.0] * 6, 4) == 4.0
    # 5-cycle has none
    n = 5
    cyc = np.zeros(10)
    for k in range(5):
        i, j = sorted((k, (k + 1) % 5))
        cyc[edge_index(n, i, j)] = 1.0
    assert triangle_count(cyc, 5) == 0.0
    with pytest.raises(ValueError):
        triangle_count([1.0] * 7, 4)


def test_triangle_count_equals_adjacency_trace():
    rng = np.random.default_rng(8)
    for _ in range(10):
        edges = rng.integers(0, 2, size=15).astype(float)
        conf = EdgeConfiguration(6, tuple(int(e) for e in edges))
        adj = conf.adjacency()
        assert triangle_count(edges, 6) == np.trace(adj @ adj @ adj) / 6


def test_expected_triangles_exhaustive():
    # oracle: enumerate all edge sets of the given size on 4 vertices
    for M in range(0, 7):
        acc = Fraction(0)
        count = 0
        for ones in itertools.combinations(range(6), M):
            vec = np.zeros(6)
            vec[list(ones)] = 1.0
            acc += Fraction(int(triangle_count(vec, 4)))
            count += 1
        assert expected_triangles(4, M) == float(acc / count)
    assert expected_triangles(4, 3) == pytest.approx(0.2)


def test_triangle_polynomial_agrees_with_count():
    poly = triangle_polynomial(5)
    rng = np.random.default_rng(3)
    batch = rng.integers(0, 2, size=(20, 10)).astype(float)
    assert np.allclose(poly.evaluate_batch(batch), triangle_count_batch(batch, 5))


def test_edge_multislice_spec():
    spec = edge_multislice(4, 3)
    assert spec.kappa == (3, 3) and spec.values == (0.0, 1.0)
    with pytest.raises(ValueError):
        edge_multislice(4, 0)
    with pytest.raises(ValueError):
        edge_multislice(4, 6)


# --------------------------------------------------------- product moments


def test_product_moment_two_point_example():
    spec = MultisliceSpec((1, 1), (-1.0, 1.0))
    assert product_moment(spec, (0, 1)) == pytest.approx(-1.0)


def test_product_moment_indicator_falling_factorials():
    spec = edge_multislice(4, 3)  # kappa = (3, 3), levels 0/1
    N, M = 6, 3
    assert product_moment(spec, (2,)) == pytest.approx(M / N)
    assert product_moment(spec, (0, 5)) == pytest.approx(M * (M - 1) / (N * (N - 1)))
    assert product_moment(spec, (0, 1, 2)) == pytest.approx(
        M * (M - 1) * (M - 2) / (N * (N - 1) * (N - 2))
    )


def test_product_moment_enumeration_oracle():
    specs = [
        MultisliceSpec((2, 1, 1), (-1.0, 0.5, 2.0)),
        MultisliceSpec((2, 2), (-0.3, 1.7)),
        MultisliceSpec((3, 2), (0.25, 1.0)),
    ]
    for spec in specs:
        for k in range(1, spec.total + 1):
            if k > 6:
                continue
            assert product_moment(spec, tuple(range(k))) == pytest.approx(
                enumeration_moment(spec, k), abs=1e-12
            )


def test_product_moment_validation():
    spec = MultisliceSpec((2, 2), (0.0, 1.0))
    with pytest.raises(ValueError):
        product_moment(spec, (0, 0))
    with pytest.raises(ValueError):
        product_moment(spec, (0, 9))
    big = MultisliceSpec((5, 5), (0.0, 1.0))
    with pytest.raises(ValueError):
        product_moment(big, tuple(range(7)))


def test_assignment_probability_oracle():
    spec = MultisliceSpec((2, 1, 1), (-1.0, 0.5, 2.0))
    space = EnumeratedMultislice(spec)
    for vals in itertools.product(spec.values, repeat=2):
        hits = np.mean(
            (space.configurations[:, 0] == vals[0])
            & (space.configurations[:, 1] == vals[1])
        )
        assert assignment_probability(spec, vals) == pytest.approx(float(hits))
    assert assignment_probability(spec, (2.0, 2.0)) == 0.0
    with pytest.raises(ValueError):
        assignment_probability(spec, (0.1,))


# ------------------------------------------------- multilinear polynomials


def test_polynomial_validation():
    with pytest.raises(ValueError):
        MultilinearPolynomial(3, {(1, 1): 1.0})
    with pytest.raises(ValueError):
        MultilinearPolynomial(3, {(2, 1): 1.0})
    with pytest.raises(ValueError):
        MultilinearPolynomial(3, {(0, 3): 1.0})
    with pytest.raises(ValueError):
        MultilinearPolynomial(3, {(): 1.0})
    poly = MultilinearPolynomial(3, {(0, 1): 0.0, (1, 2): 2.0}, constant=1.0)
    assert poly.degree == 2 and (0, 1) not in poly.terms


def test_polynomial_evaluation():
    poly = MultilinearPolynomial(3, {(0,): 2.0, (0, 2): -1.0}, constant=0.5)
    assert poly.evaluate([1.0, 9.0, 3.0]) == pytest.approx(0.5 + 2.0 - 3.0)
    batch = np.array([[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    assert np.allclose(poly.evaluate_batch(batch), [2.5, 0.5])


def test_gradient_tensor_example():
    poly = MultilinearPolynomial(2, {(0, 1): 1.0})
    hess = gradient_tensor(poly, [5.0, 7.0], 2)
    assert np.array_equal(hess, np.array([[0.0, 1.0], [1.0, 0.0]]))
    grad = gradient_tensor(poly, [5.0, 7.0], 1)
    assert np.allclose(grad, [7.0, 5.0])


def test_gradient_tensor_divided_difference_oracle():
    rng = np.random.default_rng(17)
    dim = 5
    for _ in range(5):
        terms = {}
        for order in (1, 2, 3):
            for tup in itertools.combinations(range(dim), order):
                if rng.random() < 0.4:
                    terms[tup] = float(rng.normal())
        poly = MultilinearPolynomial(dim, terms, constant=float(rng.normal()))
        config = rng.normal(size=dim)
        for order in (1, 2, 3):
            tensor = gradient_tensor(poly, config, order)
            for coords in itertools.combinations(range(dim), order):
                want = divided_difference_partial(poly, config, coords)
                for perm in itertools.permutations(coords):
                    assert tensor[perm] == pytest.approx(want, abs=1e-9)
            # diagonals vanish
            if order == 2:
                assert np.all(np.diag(tensor) == 0.0)


def test_gradient_tensor_limits():
    poly = MultilinearPolynomial(3, {(0, 1): 1.0})
    with pytest.raises(ValueError):
        gradient_tensor(poly, [0.0, 0.0, 0.0], 4)
    big = MultilinearPolynomial(65, {(0, 1): 1.0})
    with pytest.raises(ValueError):
        gradient_tensor(big, np.zeros(65), 1)


def test_expected_gradient_tensor_triangle_example():
    # order-1 expected gradient of the triangle count at 4 vertices, 3 edges
    poly = triangle_polynomial(4)
    spec = edge_multislice(4, 3)
    grad = expected_gradient_tensor(poly, spec, 1)
    assert np.allclose(grad, 0.4)
    # oracle: entrywise average of the pointwise gradient over all states
    space = EnumeratedMultislice(spec)
    for order in (1, 2, 3):
        want = np.mean(
            [gradient_tensor(poly, c, order) for c in space.configurations], axis=0
        )
        got = expected_gradient_tensor(poly, spec, order)
        assert np.allclose(got, want, atol=1e-12)


# ---------------------------------------------------------- quadratic form


def test_quadratic_form_examples():
    ones = np.ones((3, 3)) - np.eye(3)
    assert quadratic_form(ones, [1.0, 1.0, 1.0]) == pytest.approx(3.0)
    A = np.array([[0.0, 2.0], [2.0, 0.0]])
    assert quadratic_form(A, [3.0, -1.0]) == pytest.approx(-6.0)


def test_quadratic_form_validation():
    with pytest.raises(ValueError):
        quadratic_form(np.array([[0.0, 1.0], [0.0, 0.0]]), [1.0, 1.0])
    with pytest.raises(ValueError):
        quadratic_form(np.array([[1.0, 1.0], [1.0, 0.0]]), [1.0, 1.0])
    with pytest.raises(ValueError):
        quadratic_form(np.zeros((2, 2)), [1.0])


def test_quadratic_polynomial_matches_form():
    rng = np.random.default_rng(23)
    B = rng.normal(size=(4, 4))
    A = B + B.T
    np.fill_diagonal(A, 0.0)
    poly = quadratic_polynomial(A)
    for _ in range(5):
        x = rng.normal(size=4)
        assert poly.evaluate(x) == pytest.approx(quadratic_form(A, x))


# ------------------------------------------------------------- eigenvalues


def test_largest_abs_eigenvalue_2x2_closed_form():
    rng = np.random.default_rng(29)
    for _ in range(20):
        a, b, c = rng.normal(size=3)
        A = np.array([[a, b], [b, c]])
        disc = math.sqrt((a - c) ** 2 + 4 * b * b)
        lams = [(a + c + disc) / 2, (a + c - disc) / 2]
        assert largest_abs_eigenvalue(A) == pytest.approx(max(abs(l) for l in lams))


def test_largest_abs_eigenvalue_cubic_oracle():
    rng = np.random.default_rng(31)
    for _ in range(20):
        B = rng.normal(size=(3, 3))
        A = (B + B.T) / 2
        want = np.max(np.abs(cubic_eigen_oracle(A)))
        assert largest_abs_eigenvalue(A) == pytest.approx(want, abs=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.0, 1.0))
def test_largest_abs_eigenvalue_is_convex(seed, lam):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(4, 4))
    Y = rng.normal(size=(4, 4))
    X, Y = (X + X.T) / 2, (Y + Y.T) / 2
    mix = largest_abs_eigenvalue(lam * X + (1 - lam) * Y)
    assert mix <= lam * largest_abs_eigenvalue(X) + (1 - lam) * largest_abs_eigenvalue(Y) + 1e-10


def test_largest_abs_eigenvalue_rejects_asymmetric():
    with pytest.raises(ValueError):
        largest_abs_eigenvalue(np.array([[0.0, 1.0], [0.5, 0.0]]))


# ------------------------------------------------------------ serialization


def test_polynomial_round_trip(tmp_path):
    poly = MultilinearPolynomial(4, {(0, 2): 1.5, (1, 2, 3): -2.0}, constant=0.25)
    path = tmp_path / "poly.jsonl"
    save_polynomial(path, poly)
    back = load_polynomial(path)
    assert back == poly


def test_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    A = rng.normal(size=(3, 3))
    path = tmp_path / "mat.csv"
    save_matrix(path, A)
    assert np.allclose(load_matrix(path), A)
