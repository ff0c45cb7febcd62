"""The four multi-objective optimisers.

Each ``run_*`` function takes a problem and parameters and returns the final
population's non-dominated set as a :class:`FrontArchive`.
"""

from __future__ import annotations

import time
from dataclasses import replace

import numpy as np

from ..objectives import Evaluator, ProblemSpec
from . import moeadd, mombi2, nsga2, spea2
from .base import ALGORITHM_NAMES, AlgorithmParams, FrontArchive, extract_front

_RUNNERS = {
    "NSGA2": nsga2.run,
    "SPEA2": spea2.run,
    "MOEADD": moeadd.run,
    "MOMBI2": mombi2.run,
}


def run_algorithm(problem: ProblemSpec, params: AlgorithmParams) -> FrontArchive:
    params = params.resolved(problem)
    evaluator = Evaluator(problem)
    rng = np.random.default_rng(params.seed)
    start = time.perf_counter()
    X, F = _RUNNERS[params.algorithm](evaluator, params, rng)
    wall = time.perf_counter() - start
    return extract_front(
        X,
        -F,
        {
            "algorithm": params.algorithm,
            "seed": params.seed,
            "params_hash": params.digest(),
            "evaluations": evaluator.evaluations,
            "wall_time": round(wall, 3),
        },
    )


def _named(name: str):
    def runner(problem: ProblemSpec, params: AlgorithmParams) -> FrontArchive:
        return run_algorithm(problem, replace(params, algorithm=name))

    runner.__name__ = f"run_{name.lower()}"
    return runner


run_nsga2 = _named("NSGA2")
run_spea2 = _named("SPEA2")
run_moeadd = _named("MOEADD")
run_mombi2 = _named("MOMBI2")

__all__ = [
    "ALGORITHM_NAMES",
    "AlgorithmParams",
    "FrontArchive",
    "extract_front",
    "run_algorithm",
    "run_moeadd",
    "run_mombi2",
    "run_nsga2",
    "run_spea2",
]
