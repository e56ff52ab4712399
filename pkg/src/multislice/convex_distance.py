"""Talagrand's convex distance from a configuration to a set of configurations.

The distance is the value of a minimax: the supremum over unit weight
vectors of the weighted Hamming distance to the set equals, by convex
duality, the minimum over probability vectors nu on the member list of
the Euclidean norm of the vector of disagreement probabilities
(nu(member_k != omega_k))_k.  The minimum is a small convex quadratic
over the simplex and is solved by conditional gradient steps (exact
line search, lowest-index tie break, no away steps) plus an
equality-constrained solve on the current support that removes the
sublinear tail of plain conditional gradient.  The returned duality gap
certifies the squared value.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from math import factorial
from typing import Sequence

import numpy as np

__all__ = [
    "members_array",
    "alpha_distance",
    "ConvexDistanceResult",
    "convex_distance",
    "convex_distance_bruteforce",
    "SelfBoundingReport",
    "check_self_bounding",
    "is_permutation_closed",
    "symmetrize_members",
    "save_members",
    "load_members",
    "save_distance_report",
]

BRUTEFORCE_MAX_MEMBERS = 5


def members_array(members: Sequence[Sequence[float]]) -> np.ndarray:
    """Validate and canonicalise a member list: 2D, nonempty, duplicates dropped."""
    arr = np.asarray(members, dtype=float)
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise ValueError("need a nonempty 2D member list")
    return np.unique(arr, axis=0)


def _disagreements(config: np.ndarray, members: np.ndarray) -> np.ndarray:
    config = np.asarray(config, dtype=float)
    if config.ndim != 1 or config.shape[0] != members.shape[1]:
        raise ValueError("configuration length does not match members")
    return (members != config[None, :]).astype(float)


def alpha_distance(
    config: Sequence[float], members: Sequence[Sequence[float]], alpha: Sequence[float]
) -> float:
    """Weighted Hamming distance min over members of sum_i |alpha_i| [mismatch]."""
    mem = members_array(members)
    B = _disagreements(np.asarray(config, dtype=float), mem)
    a = np.abs(np.asarray(alpha, dtype=float))
    if a.shape[0] != mem.shape[1]:
        raise ValueError("alpha length does not match members")
    return float((B * a[None, :]).sum(axis=1).min())


@dataclass(frozen=True)
class ConvexDistanceResult:
    value: float
    gap: float
    iterations: int
    nu: np.ndarray


def convex_distance(
    config: Sequence[float],
    members: Sequence[Sequence[float]],
    tol: float = 1e-9,
    max_iter: int = 10_000,
) -> ConvexDistanceResult:
    """Convex distance with a duality-gap certificate on the squared value.

    The gap bounds the suboptimality of value**2; it is zero whenever
    the support solve lands on the exact face minimiser.
    """
    mem = members_array(members)
    B = _disagreements(np.asarray(config, dtype=float), mem)
    m = mem.shape[0]
    Q = B @ B.T

    # start at the closest member in Hamming distance, lowest index on ties
    nu = np.zeros(m)
    nu[int(np.argmin(np.diag(Q)))] = 1.0

    def objective(v: np.ndarray) -> float:
        return float(v @ Q @ v)

    gap = np.inf
    it = 0
    for it in range(1, max_iter + 1):
        q = Q @ nu
        grad = 2.0 * q
        s = int(np.argmin(grad))
        gap = float(nu @ grad - grad[s])
        if gap <= tol:
            break

        if it % 50 == 0:
            polished = _support_solve(Q, nu)
            if polished is not None and objective(polished) <= objective(nu):
                nu = polished
                continue

        d = np.zeros(m)
        d[s] = 1.0
        d -= nu
        curv = float(d @ Q @ d)
        if curv <= 0.0:
            gamma = 1.0
        else:
            gamma = min(max(gap / (2.0 * curv), 0.0), 1.0)
        if gamma == 0.0:
            break
        nu = nu + gamma * d
    else:
        it = max_iter

    # final polish and certificate refresh
    polished = _support_solve(Q, nu)
    if polished is not None and objective(polished) <= objective(nu):
        nu = polished
    grad = 2.0 * (Q @ nu)
    gap = float(nu @ grad - grad.min())
    value = float(np.sqrt(max(objective(nu), 0.0)))
    return ConvexDistanceResult(value, gap, it, nu)


def _support_solve(Q: np.ndarray, nu: np.ndarray, floor: float = 1e-12):
    """Minimise the quadratic on the affine hull of the current support.

    Returns a feasible simplex point or None when the solve leaves the
    face or degenerates.
    """
    support = np.flatnonzero(nu > floor)
    k = support.size
    if k == 0:
        return None
    if k == 1:
        out = np.zeros_like(nu)
        out[support[0]] = 1.0
        return out
    kkt = np.zeros((k + 1, k + 1))
    kkt[:k, :k] = 2.0 * Q[np.ix_(support, support)]
    kkt[:k, k] = 1.0
    kkt[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    try:
        sol = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:k]
    except np.linalg.LinAlgError:  # pragma: no cover - lstsq rarely fails
        return None
    if sol.min() < -1e-10:
        return None
    sol = np.clip(sol, 0.0, None)
    total = sol.sum()
    if total <= 0.0:
        return None
    out = np.zeros_like(nu)
    out[support] = sol / total
    return out


def _outer_count_vectors(num_fixed: int, grid: int) -> np.ndarray:
    """All integer vectors of length num_fixed with sum <= grid, as an array."""
    if num_fixed == 0:
        return np.zeros((1, 0), dtype=np.int64)
    prev = _outer_count_vectors(num_fixed - 1, grid)
    rows = []
    for row in prev:
        rest = grid - int(row.sum())
        ks = np.arange(rest + 1, dtype=np.int64)
        block = np.empty((rest + 1, num_fixed), dtype=np.int64)
        block[:, :-1] = row
        block[:, -1] = ks
        rows.append(block)
    return np.concatenate(rows, axis=0)


def convex_distance_bruteforce(
    config: Sequence[float], members: Sequence[Sequence[float]], grid: int = 1000
) -> float:
    """Exact minimum over the simplex lattice with denominator ``grid``.

    All but the last two lattice coordinates are enumerated; the
    objective is an explicit convex parabola in the remaining degree of
    freedom, so its integer minimum is read off by rounding.  The result
    equals full lattice enumeration.
    """
    mem = members_array(members)
    B = _disagreements(np.asarray(config, dtype=float), mem)
    m = mem.shape[0]
    if m > BRUTEFORCE_MAX_MEMBERS:
        raise ValueError(f"brute force supports at most {BRUTEFORCE_MAX_MEMBERS} members")
    if grid < 1:
        raise ValueError("grid must be positive")
    if m == 1:
        return float(np.linalg.norm(B[0]))

    fixed = _outer_count_vectors(m - 2, grid)  # (n_outer, m-2)
    rest = grid - fixed.sum(axis=1)  # budget for the last two coordinates
    base = fixed.astype(float) @ B[: m - 2] + rest[:, None].astype(float) * B[m - 1]
    u = B[m - 2] - B[m - 1]
    uu = float(u @ u)
    bu = base @ u
    best = np.inf
    if uu == 0.0:
        best = float((base * base).sum(axis=1).min())
    else:
        star = -bu / uu
        for cand in (np.floor(star), np.ceil(star)):
            s = np.clip(cand, 0.0, rest.astype(float))
            vals = (base * base).sum(axis=1) + 2.0 * s * bu + s * s * uu
            best = min(best, float(vals.min()))
    return float(np.sqrt(max(best, 0.0)) / grid)


@dataclass(frozen=True)
class SelfBoundingReport:
    max_difference_excess: float
    max_switch_difference: float
    passed: bool


def check_self_bounding(space, members: Sequence[Sequence[float]], slack: float = 1e-8) -> SelfBoundingReport:
    """Verify the self-bounding certificate of f = convex distance squared over 4.

    On the enumerated multislice ``space``: the positive-part difference
    operator of f satisfies Gamma_plus(f)^2 <= f, and every coordinate
    switch moves f by at most one.  The slack absorbs solver tolerance.
    """
    mem = members_array(members)
    f = np.array(
        [convex_distance(cfg, mem).value ** 2 / 4.0 for cfg in space.configurations]
    )
    n = space.spec.total
    pos_sq = np.zeros_like(f)
    max_diff = 0.0
    for (i, j) in space.switch_pairs:
        perm = space.switch_permutation(i, j)
        diff = f - f[perm]
        max_diff = max(max_diff, float(np.abs(diff).max()))
        pos_sq += np.clip(diff, 0.0, None) ** 2
    gamma_plus_sq = pos_sq / (2.0 * n)
    excess = float((gamma_plus_sq - f).max())
    passed = excess <= slack and max_diff <= 1.0 + slack
    return SelfBoundingReport(excess, max_diff, passed)


def is_permutation_closed(members: Sequence[Sequence[float]]) -> bool:
    """True iff the member list is closed under coordinate permutations."""
    mem = members_array(members)
    sig_counts: dict[tuple[float, ...], int] = {}
    for row in mem:
        key = tuple(sorted(row.tolist()))
        sig_counts[key] = sig_counts.get(key, 0) + 1
    for key, count in sig_counts.items():
        distinct = factorial(len(key))
        for v in set(key):
            distinct //= factorial(key.count(v))
        if count != distinct:
            return False
    return True


def symmetrize_members(members: Sequence[Sequence[float]]) -> np.ndarray:
    """Close a member list under coordinate permutations."""
    from itertools import permutations

    mem = members_array(members)
    out = {tuple(p) for row in mem for p in permutations(row.tolist())}
    return np.array(sorted(out), dtype=float)


def save_members(path: str, members: Sequence[Sequence[float]]) -> None:
    import json

    mem = members_array(members)
    with open(path, "w") as fh:
        for row in mem:
            fh.write(json.dumps([float(x) for x in row]) + "\n")


def load_members(path: str) -> np.ndarray:
    import json

    with open(path) as fh:
        rows = [json.loads(line) for line in fh if line.strip()]
    return members_array(rows)


def save_distance_report(path: str, rows: Sequence[tuple[int, ConvexDistanceResult]]) -> None:
    """CSV rows: state id, distance, certificate gap, iterations."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["state", "distance", "gap", "iterations"])
        for state, res in rows:
            writer.writerow([state, repr(res.value), repr(res.gap), res.iterations])
