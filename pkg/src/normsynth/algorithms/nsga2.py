"""Generational NSGA-II with (mu + mu) elitist survival."""

from __future__ import annotations

import numpy as np

from ..kernel import crowding_distance, fast_nondominated_sort, random_population, to_min
from .base import AlgorithmParams, binary_tournament, make_offspring


def rank_and_crowding(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    rank = np.empty(len(F), dtype=int)
    crowd = np.empty(len(F))
    for r, front in enumerate(fast_nondominated_sort(F)):
        rank[front] = r
        crowd[front] = crowding_distance(F[front])
    return rank, crowd


def survival(F: np.ndarray, n: int) -> np.ndarray:
    """Indices of the ``n`` survivors: whole fronts first, then the least crowded of the split front."""
    chosen: list[np.ndarray] = []
    count = 0
    for front in fast_nondominated_sort(F):
        if count + len(front) <= n:
            chosen.append(front)
            count += len(front)
            if count == n:
                break
        else:
            crowd = crowding_distance(F[front])
            order = np.argsort(-crowd, kind="stable")
            chosen.append(front[order[: n - count]])
            break
    return np.concatenate(chosen)


def run(evaluator, params: AlgorithmParams, rng) -> tuple[np.ndarray, np.ndarray]:
    bounds = evaluator.problem.bounds
    n = params.population_size
    X = random_population(n, bounds, rng)
    F = to_min(evaluator(X))
    for _ in range(params.generations):
        rank, crowd = rank_and_crowding(F)
        parents = binary_tournament((rank, -crowd), n, rng)
        Y = make_offspring(X[parents], params, bounds, rng)
        X = np.vstack([X, Y])
        F = np.vstack([F, to_min(evaluator(Y))])
        keep = survival(F, n)
        X, F = X[keep], F[keep]
    return X, F
