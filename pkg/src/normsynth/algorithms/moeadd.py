"""MOEA/DD: steady-state evolution with dominance levels and decomposition.

Every weight vector defines a subregion; a solution belongs to the subregion
whose weight line is closest (perpendicular distance from the ideal point).
After each offspring the merged population loses exactly one member, chosen
from the last non-domination level and the most crowded subregion, while the
sole occupant of an isolated subregion is protected.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigurationError
from ..kernel import (
    das_dennis_weights,
    dominance_matrix,
    fronts_from_dominance,
    pbi,
    perpendicular_distance,
    random_population,
    to_min,
)
from .base import AlgorithmParams, make_offspring


def neighborhoods(weights: np.ndarray, T: int) -> np.ndarray:
    """Indices of the ``T`` nearest weights (Euclidean) for each weight, itself first."""
    dist = np.linalg.norm(weights[:, None, :] - weights[None, :, :], axis=2)
    return np.argsort(dist, axis=1, kind="stable")[:, :T]


def weights_for(m: int, population_size: int) -> np.ndarray:
    H = 1
    W = das_dennis_weights(m, H).vectors
    while len(W) < population_size:
        H += 1
        W = das_dennis_weights(m, H).vectors
    if len(W) != population_size:
        raise ConfigurationError(
            f"MOEA/DD needs population_size equal to a simplex-lattice size for m={m}; "
            f"{population_size} is not (nearest: {len(W)} at H={H})"
        )
    return W


def associate(F, weights, ideal) -> np.ndarray:
    return np.argmin(perpendicular_distance(F, weights, ideal), axis=1)


def mating_pool(i: int, assoc: np.ndarray, neighbors: np.ndarray, delta: float, rng) -> np.ndarray:
    """Candidate parents for subproblem ``i``: its neighbourhood with probability ``delta``."""
    if rng.random() < delta:
        local = np.flatnonzero(np.isin(assoc, neighbors[i]))
        if len(local) >= 2:
            return local
    return np.arange(len(assoc))


class Population:
    """Genes, minimisation objectives and the pairwise dominance matrix, kept in sync."""

    def __init__(self, X, F):
        self.X = X
        self.F = F
        self.D = dominance_matrix(F)

    def add(self, x, f):
        le_new = np.all(f <= self.F, axis=1) & np.any(f < self.F, axis=1)
        le_old = np.all(self.F <= f, axis=1) & np.any(self.F < f, axis=1)
        n = len(self.F)
        D = np.zeros((n + 1, n + 1), dtype=bool)
        D[:n, :n] = self.D
        D[n, :n] = le_new
        D[:n, n] = le_old
        self.X = np.vstack([self.X, x])
        self.F = np.vstack([self.F, f])
        self.D = D

    def remove(self, index: int):
        self.X = np.delete(self.X, index, axis=0)
        self.F = np.delete(self.F, index, axis=0)
        self.D = np.delete(np.delete(self.D, index, axis=0), index, axis=1)


def _most_crowded(regions, assoc, scores) -> int:
    """Region (from ``regions``) with most members; ties go to the larger summed PBI."""
    counts = np.bincount(assoc, minlength=assoc.max() + 1)
    sums = np.bincount(assoc, weights=scores, minlength=assoc.max() + 1)
    regions = np.unique(regions)
    best = np.lexsort((-sums[regions], -counts[regions]))[0]
    return int(regions[best])


def _worst_in(members, scores) -> int:
    return int(members[np.argmax(scores[members])])


def choose_removal(D, assoc, scores) -> int:
    """Index of the member to discard from a merged population of size N + 1."""
    fronts = fronts_from_dominance(D)

    def locate():
        h = _most_crowded(assoc, assoc, scores)
        return _worst_in(np.flatnonzero(assoc == h), scores)

    if len(fronts) == 1:
        return locate()
    last = fronts[-1]
    if len(last) == 1:
        x = int(last[0])
        if np.count_nonzero(assoc == assoc[x]) > 1:
            return x
        return locate()
    h = _most_crowded(assoc[last], assoc, scores)
    if np.count_nonzero(assoc == h) > 1:
        return _worst_in(last[assoc[last] == h], scores)
    return locate()


def run(evaluator, params: AlgorithmParams, rng) -> tuple[np.ndarray, np.ndarray]:
    bounds = evaluator.problem.bounds
    n = params.population_size
    W = weights_for(evaluator.problem.n_objectives, n)
    B = neighborhoods(W, params.moeadd_T)

    X = random_population(n, bounds, rng)
    pop = Population(X, to_min(evaluator(X)))
    ideal = pop.F.min(axis=0)
    assoc = associate(pop.F, W, ideal)
    for _ in range(params.generations):
        for i in rng.permutation(n):
            pool = mating_pool(i, assoc, B, params.moeadd_delta, rng)
            a, b = rng.choice(pool, size=2, replace=False)
            child = make_offspring(pop.X[[a, b]], params, bounds, rng)[0]
            f = to_min(evaluator(child))[0]
            ideal = np.minimum(ideal, f)
            pop.add(child, f)
            assoc = associate(pop.F, W, ideal)
            scores = pbi(pop.F, W[assoc], ideal, params.pbi_theta)
            out = choose_removal(pop.D, assoc, scores)
            pop.remove(out)
            assoc = np.delete(assoc, out)
    return pop.X, pop.F
