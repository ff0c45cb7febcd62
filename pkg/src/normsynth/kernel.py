"""Evolutionary building blocks shared by the four optimisers.

Ranking, diversity and indicator code works on *minimisation* arrays.  The
value objectives are maximised, so they are negated exactly once, with
``to_min``, at the boundary between an evaluator and an algorithm.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np

from .errors import DomainError

ASF_WEIGHT_FLOOR = 1e-6
SBX_EPS = 1e-14


def to_min(objectives: np.ndarray) -> np.ndarray:
    return -np.asarray(objectives, dtype=float)


@dataclass
class Individual:
    genes: np.ndarray
    objectives: np.ndarray  # maximisation sense
    rank: int = 0
    crowding: float = 0.0
    fitness: float = 0.0
    scalar_cache: dict = field(default_factory=dict)


@dataclass(frozen=True)
class WeightVectorSet:
    vectors: np.ndarray
    H: int

    def __len__(self) -> int:
        return len(self.vectors)


# -- dominance ---------------------------------------------------------------


def dominates(a, b) -> bool:
    """Pareto dominance of ``a`` over ``b`` for maximisation vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise DomainError(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    return bool(np.all(a >= b) and np.any(a > b))


def dominance_matrix(F: np.ndarray) -> np.ndarray:
    """``D[i, j]`` is True when row ``i`` dominates row ``j`` (minimisation)."""
    F = np.asarray(F, dtype=float)
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return le & lt


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=float)
    if len(F) == 0:
        return np.zeros(0, dtype=bool)
    return ~dominance_matrix(F).any(axis=0)


def fronts_from_dominance(D: np.ndarray) -> list[np.ndarray]:
    remaining = np.ones(len(D), dtype=bool)
    counts = D.sum(axis=0)
    fronts = []
    while remaining.any():
        current = np.flatnonzero(remaining & (counts == 0))
        fronts.append(current)
        remaining[current] = False
        counts = counts - D[current].sum(axis=0)
    return fronts


def fast_nondominated_sort(F: np.ndarray) -> list[np.ndarray]:
    """Partition rows of a minimisation matrix into Pareto fronts (index arrays, best first)."""
    F = np.asarray(F, dtype=float)
    if len(F) == 0:
        return []
    return fronts_from_dominance(dominance_matrix(F))


def front_ranks(F: np.ndarray) -> np.ndarray:
    ranks = np.empty(len(F), dtype=int)
    for r, front in enumerate(fast_nondominated_sort(F)):
        ranks[front] = r
    return ranks


def crowding_distance(F: np.ndarray) -> np.ndarray:
    """NSGA-II crowding distance of the rows of one front."""
    F = np.asarray(F, dtype=float)
    n, m = F.shape
    if n <= 2:
        return np.full(n, np.inf)
    distance = np.zeros(n)
    for k in range(m):
        order = np.argsort(F[:, k], kind="stable")
        values = F[order, k]
        span = values[-1] - values[0]
        distance[order[0]] = distance[order[-1]] = np.inf
        if span > 0:
            distance[order[1:-1]] += (values[2:] - values[:-2]) / span
    return distance


# -- variation -----------------------------------------------------------------


def _sbx_betaq(rand, beta, eta):
    alpha = 2.0 - beta ** -(eta + 1.0)
    low = (rand * alpha) ** (1.0 / (eta + 1.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        high = (1.0 / (2.0 - rand * alpha)) ** (1.0 / (eta + 1.0))
    return np.where(rand <= 1.0 / alpha, low, high)


def sbx_crossover(p1, p2, eta_c, p_c, bounds, rng):
    """Simulated binary crossover with bounded spread.

    ``p1`` and ``p2`` are arrays of shape ``(n,)`` or ``(pairs, n)``.  Each pair
    crosses with probability ``p_c``; within a crossing pair each variable is
    recombined with probability 0.5 and the two children swap that variable
    with probability 0.5.  Random draws per call are fixed in number, so a
    call's stream consumption never depends on the data.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    lower, upper = (np.asarray(b, dtype=float) for b in bounds)
    shape = np.broadcast_shapes(p1.shape, p2.shape)
    pair_draw = rng.random(shape[:-1] + (1,))
    var_draw = rng.random(shape)
    beta_draw = rng.random(shape)
    swap_draw = rng.random(shape)

    y1 = np.minimum(p1, p2)
    y2 = np.maximum(p1, p2)
    gap = y2 - y1
    active = (pair_draw <= p_c) & (var_draw <= 0.5) & (gap > SBX_EPS)
    safe_gap = np.where(active, gap, 1.0)

    beta_low = 1.0 + 2.0 * (y1 - lower) / safe_gap
    beta_high = 1.0 + 2.0 * (upper - y2) / safe_gap
    c1 = 0.5 * ((y1 + y2) - _sbx_betaq(beta_draw, beta_low, eta_c) * gap)
    c2 = 0.5 * ((y1 + y2) + _sbx_betaq(beta_draw, beta_high, eta_c) * gap)
    c1 = np.clip(c1, lower, upper)
    c2 = np.clip(c2, lower, upper)
    swap = swap_draw <= 0.5
    child1 = np.where(active, np.where(swap, c2, c1), p1)
    child2 = np.where(active, np.where(swap, c1, c2), p2)
    return child1, child2


def polynomial_mutation(x, eta_m, p_m, bounds, rng):
    """Bounded polynomial mutation applied independently to every gene with probability ``p_m``."""
    x = np.asarray(x, dtype=float)
    lower, upper = (np.asarray(b, dtype=float) for b in bounds)
    span = upper - lower
    mutate = rng.random(x.shape) <= p_m
    rnd = rng.random(x.shape)
    safe_span = np.where(span > 0, span, 1.0)
    delta1 = (x - lower) / safe_span
    delta2 = (upper - x) / safe_span
    power = 1.0 / (eta_m + 1.0)
    left = 2.0 * rnd + (1.0 - 2.0 * rnd) * (1.0 - delta1) ** (eta_m + 1.0)
    right = 2.0 * (1.0 - rnd) + 2.0 * (rnd - 0.5) * (1.0 - delta2) ** (eta_m + 1.0)
    deltaq = np.where(rnd <= 0.5, left**power - 1.0, 1.0 - right**power)
    mutated = np.clip(x + deltaq * span, lower, upper)
    return np.where(mutate & (span > 0), mutated, x)


def random_population(size: int, bounds, rng) -> np.ndarray:
    lower, upper = (np.asarray(b, dtype=float) for b in bounds)
    return lower + rng.random((size, lower.size)) * (upper - lower)


# -- weights and scalarising functions ------------------------------------------


def das_dennis_weights(m: int, H: int) -> WeightVectorSet:
    """All points of the unit simplex in ``m`` dimensions with coordinates in steps of ``1/H``."""
    if m < 2 or H < 1:
        raise DomainError(f"need m >= 2 and H >= 1, got m={m}, H={H}")
    vectors = []
    for bars in itertools.combinations(range(H + m - 1), m - 1):
        edges = (-1, *bars, H + m - 1)
        vectors.append([edges[i + 1] - edges[i] - 1 for i in range(m)])
    W = np.array(vectors, dtype=float) / H
    assert len(W) == comb(H + m - 1, m - 1)
    return WeightVectorSet(vectors=W, H=H)


def lattice_resolution(m: int, size: int) -> int:
    """Smallest H whose simplex lattice has at least ``size`` points."""
    H = 1
    while comb(H + m - 1, m - 1) < size:
        H += 1
    return H


def pbi(F, weights, ideal, theta=5.0):
    """Penalty boundary intersection ``d1 + theta * d2`` (minimisation)."""
    diff = np.asarray(F, dtype=float) - np.asarray(ideal, dtype=float)
    w = np.asarray(weights, dtype=float)
    unit = w / np.linalg.norm(w, axis=-1, keepdims=True)
    d1 = np.sum(diff * unit, axis=-1)
    d2 = np.linalg.norm(diff - d1[..., None] * unit, axis=-1)
    return d1 + theta * d2


def perpendicular_distance(F, weights, ideal):
    """``d2`` of every row of ``F`` against every weight: shape ``(len(F), len(weights))``."""
    diff = np.asarray(F, dtype=float) - np.asarray(ideal, dtype=float)
    W = np.asarray(weights, dtype=float)
    unit = W / np.linalg.norm(W, axis=1, keepdims=True)
    d1 = diff @ unit.T
    sq = np.sum(diff**2, axis=1)[:, None] - d1**2
    return np.sqrt(np.maximum(sq, 0.0))


def asf(F, weights, ideal):
    """Achievement scalarising function ``max_i (f_i - z_i) / w_i`` with floored weights."""
    diff = np.asarray(F, dtype=float) - np.asarray(ideal, dtype=float)
    w = np.maximum(np.asarray(weights, dtype=float), ASF_WEIGHT_FLOOR)
    return np.max(diff / w, axis=-1)


def scalarize(f, weight, kind: str, ideal, theta: float = 5.0) -> float:
    if kind == "pbi":
        return float(pbi(f, weight, ideal, theta))
    if kind == "asf":
        return float(asf(f, weight, ideal))
    raise DomainError(f"unknown scalarizing function {kind!r}; use 'pbi' or 'asf'")
