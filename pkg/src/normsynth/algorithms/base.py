"""Parameters, result archive and variation shared by every optimiser."""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from ..errors import ConfigurationError
from ..kernel import Individual, nondominated_mask, polynomial_mutation, sbx_crossover
from ..objectives import ProblemSpec

ALGORITHM_NAMES = ("NSGA2", "SPEA2", "MOEADD", "MOMBI2")
DEFAULT_POPULATION = {2: 100, 5: 210}


@dataclass(frozen=True)
class AlgorithmParams:
    algorithm: str = "NSGA2"
    population_size: int | None = None
    generations: int = 500
    eta_c: float = 20.0
    p_c: float = 0.9
    eta_m: float = 20.0
    p_m: float | None = None
    moeadd_T: int = 10
    moeadd_delta: float = 0.9
    moeadd_nr: int = 1
    pbi_theta: float = 5.0
    spea2_archive: int | None = None
    mombi2_epsilon: float = 1e-3
    mombi2_alpha: float = 0.5
    mombi2_record: int = 5
    seed: int = 0

    def resolved(self, problem: ProblemSpec) -> "AlgorithmParams":
        """Fill problem-dependent defaults and validate."""
        if self.algorithm not in ALGORITHM_NAMES:
            raise ConfigurationError(
                f"unknown algorithm {self.algorithm!r}; valid names: {', '.join(ALGORITHM_NAMES)}"
            )
        pop = self.population_size or DEFAULT_POPULATION[problem.n_objectives]
        params = replace(
            self,
            population_size=pop,
            p_m=self.p_m if self.p_m is not None else 1.0 / problem.decision_dims,
            spea2_archive=self.spea2_archive or pop,
        )
        if pop < 4 or pop % 2:
            raise ConfigurationError(f"population_size={pop} must be even and >= 4")
        if params.generations < 1:
            raise ConfigurationError(f"generations={params.generations} must be >= 1")
        if params.algorithm == "MOEADD" and not 1 <= params.moeadd_T <= pop:
            raise ConfigurationError(f"moeadd_T={params.moeadd_T} must lie in [1, {pop}]")
        if params.moeadd_nr != 1:
            # one offspring displaces at most one member in the dominance/decomposition update
            raise ConfigurationError("only moeadd_nr=1 is supported")
        return params

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


@dataclass
class FrontArchive:
    """Non-dominated genes/objectives (maximisation sense) plus run metadata."""

    genes: np.ndarray
    objectives: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.genes)

    @property
    def individuals(self) -> list[Individual]:
        return [Individual(g.copy(), f.copy()) for g, f in zip(self.genes, self.objectives)]


def extract_front(genes, objectives, metadata: dict | None = None) -> FrontArchive:
    """Keep the rows whose maximisation objectives are not dominated by any other row."""
    genes = np.atleast_2d(np.asarray(genes, dtype=float))
    objectives = np.atleast_2d(np.asarray(objectives, dtype=float))
    keep = nondominated_mask(-objectives)
    return FrontArchive(genes[keep].copy(), objectives[keep].copy(), dict(metadata or {}))


def binary_tournament(keys: tuple[np.ndarray, ...], n: int, rng) -> np.ndarray:
    """Pick ``n`` winners of random pairs; ``keys`` compared lexicographically, smaller wins.

    Remaining ties are settled by a coin flip.
    """
    size = len(keys[0])
    a, b = rng.integers(size, size=(2, n))
    coin = rng.random(n) < 0.5
    winner = np.where(coin, a, b)
    decided = np.zeros(n, dtype=bool)
    for key in keys:
        ka, kb = key[a], key[b]
        a_wins = ~decided & (ka < kb)
        b_wins = ~decided & (kb < ka)
        winner = np.where(a_wins, a, np.where(b_wins, b, winner))
        decided |= a_wins | b_wins
    return winner


def make_offspring(parents: np.ndarray, params: AlgorithmParams, bounds, rng) -> np.ndarray:
    """SBX on consecutive parent pairs followed by polynomial mutation."""
    c1, c2 = sbx_crossover(parents[0::2], parents[1::2], params.eta_c, params.p_c, bounds, rng)
    children = np.empty_like(parents)
    children[0::2] = c1
    children[1::2] = c2
    return polynomial_mutation(children, params.eta_m, params.p_m, bounds, rng)
