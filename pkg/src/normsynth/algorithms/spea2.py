"""SPEA2: strength fitness, k-th nearest neighbour density, archive truncation."""

from __future__ import annotations

import numpy as np

from ..kernel import dominance_matrix, random_population, to_min
from .base import AlgorithmParams, binary_tournament, make_offspring


def _distances(F: np.ndarray) -> np.ndarray:
    diff = F[:, None, :] - F[None, :, :]
    dist = np.sqrt(np.sum(diff**2, axis=2))
    np.fill_diagonal(dist, np.inf)
    return dist


def strength_fitness(F: np.ndarray) -> np.ndarray:
    """Raw fitness (sum of dominators' strengths) plus density ``1 / (sigma_k + 2)``."""
    D = dominance_matrix(F)
    strength = D.sum(axis=1)
    raw = (D * strength[:, None]).sum(axis=0)
    n = len(F)
    if n < 2:
        return raw + 0.5
    k = min(max(int(np.sqrt(n)), 1), n - 1)
    sigma = np.sort(_distances(F), axis=1)[:, k - 1]
    return raw + 1.0 / (sigma + 2.0)


def truncate(F: np.ndarray, size: int) -> np.ndarray:
    """Iteratively drop the point whose sorted neighbour distances are lexicographically smallest.

    Returns the indices (into ``F``) of the ``size`` survivors in original order.
    """
    alive = np.arange(len(F))
    dist = _distances(F)
    while len(alive) > size:
        ordered = np.sort(dist[np.ix_(alive, alive)], axis=1)
        candidates = np.arange(len(alive))
        for col in range(ordered.shape[1]):
            column = ordered[candidates, col]
            candidates = candidates[column == column.min()]
            if len(candidates) == 1:
                break
        alive = np.delete(alive, candidates[0])
    return alive


def environmental_selection(F: np.ndarray, size: int) -> tuple[np.ndarray, np.ndarray]:
    """Archive indices and their fitness values."""
    fitness = strength_fitness(F)
    nondominated = np.flatnonzero(fitness < 1.0)
    if len(nondominated) == size:
        chosen = nondominated
    elif len(nondominated) < size:
        chosen = np.argsort(fitness, kind="stable")[:size]
    else:
        chosen = nondominated[truncate(F[nondominated], size)]
    return chosen, fitness[chosen]


def run(evaluator, params: AlgorithmParams, rng) -> tuple[np.ndarray, np.ndarray]:
    bounds = evaluator.problem.bounds
    n = params.population_size
    X = random_population(n, bounds, rng)
    F = to_min(evaluator(X))
    archive_X = np.empty((0, X.shape[1]))
    archive_F = np.empty((0, F.shape[1]))
    for _ in range(params.generations):
        union_X = np.vstack([X, archive_X])
        union_F = np.vstack([F, archive_F])
        chosen, fitness = environmental_selection(union_F, params.spea2_archive)
        archive_X, archive_F = union_X[chosen], union_F[chosen]
        parents = binary_tournament((fitness,), n, rng)
        X = make_offspring(archive_X[parents], params, bounds, rng)
        F = to_min(evaluator(X))
    union_X = np.vstack([X, archive_X])
    union_F = np.vstack([F, archive_F])
    chosen, _ = environmental_selection(union_F, params.spea2_archive)
    return union_X[chosen], union_F[chosen]
