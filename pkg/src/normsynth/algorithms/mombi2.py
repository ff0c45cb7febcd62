"""MOMBI-II: R2-indicator ranking with achievement scalarising utilities.

Objectives are normalised between an ideal and a nadir estimate.  The nadir
follows the statistics rule: the maxima of the last few merged populations are
recorded, and when their variance is large the nadir jumps to the current
maxima; otherwise each coordinate tracks the current maximum unless it has
collapsed onto the ideal (within ``epsilon``), in which case it is held.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from ..kernel import asf, das_dennis_weights, lattice_resolution, random_population, to_min
from .base import AlgorithmParams, binary_tournament, make_offspring


def normalize(F: np.ndarray, ideal: np.ndarray, nadir: np.ndarray) -> np.ndarray:
    span = nadir - ideal
    span = np.where(span > 1e-12, span, 1e-12)
    return (F - ideal) / span


def r2_ranking(F_norm: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Rank (1 = best) as the best position over the per-weight utility orderings, plus L2 norms."""
    utility = asf(F_norm[:, None, :], weights[None, :, :], np.zeros(F_norm.shape[1]))
    order = np.argsort(utility, axis=0, kind="stable")
    position = np.empty_like(order)
    np.put_along_axis(position, order, np.arange(len(F_norm))[:, None], axis=0)
    return position.min(axis=1) + 1, np.linalg.norm(F_norm, axis=1)


class NadirTracker:
    def __init__(self, record: int, alpha: float, epsilon: float):
        self.history: deque[np.ndarray] = deque(maxlen=record)
        self.alpha = alpha
        self.epsilon = epsilon
        self.nadir: np.ndarray | None = None

    def update(self, F: np.ndarray, ideal: np.ndarray) -> np.ndarray:
        current = F.max(axis=0)
        self.history.append(current)
        if self.nadir is None:
            self.nadir = current.copy()
            return self.nadir
        variance = np.var(np.array(self.history), axis=0)
        if variance.max() > self.alpha:
            self.nadir = current.copy()
        else:
            collapsed = np.abs(current - ideal) < self.epsilon
            self.nadir = np.where(collapsed, self.nadir, current)
        return self.nadir


def select(F: np.ndarray, ideal, nadir, weights, n: int):
    rank, norm = r2_ranking(normalize(F, ideal, nadir), weights)
    keep = np.lexsort((norm, rank))[:n]
    return keep, rank[keep], norm[keep]


def run(evaluator, params: AlgorithmParams, rng) -> tuple[np.ndarray, np.ndarray]:
    bounds = evaluator.problem.bounds
    n = params.population_size
    m = evaluator.problem.n_objectives
    weights = das_dennis_weights(m, lattice_resolution(m, n)).vectors
    tracker = NadirTracker(params.mombi2_record, params.mombi2_alpha, params.mombi2_epsilon)

    X = random_population(n, bounds, rng)
    F = to_min(evaluator(X))
    ideal = F.min(axis=0)
    nadir = tracker.update(F, ideal)
    rank, norm = r2_ranking(normalize(F, ideal, nadir), weights)
    for _ in range(params.generations):
        parents = binary_tournament((rank, norm), n, rng)
        Y = make_offspring(X[parents], params, bounds, rng)
        X = np.vstack([X, Y])
        F = np.vstack([F, to_min(evaluator(Y))])
        ideal = np.minimum(ideal, F.min(axis=0))
        nadir = tracker.update(F, ideal)
        keep, rank, norm = select(F, ideal, nadir, weights, n)
        X, F = X[keep], F[keep]
    return X, F
