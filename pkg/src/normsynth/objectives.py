"""Value functions and Monte-Carlo fitness of a norm vector.

All five values are maximised:

1. equality        1 - 2 * Gini index of wealth
2. fairness        2 * (fraction of evaders in the poorest group) - 1
3. wealth share    fraction of total wealth held by the richest group
4. gained amount   net gain of the second-richest group over the last pool
5. collect portion 1 - tax rate of the poorest group
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError
from .society import (
    LOWER_BOUNDS,
    NUM_GENES,
    NUM_GROUPS,
    UPPER_BOUNDS,
    NormVector,
    SocietyConfig,
    SocietyState,
    advance,
    draw_path,
    normalize_shares,
    rank_groups,
)

OBJECTIVE_SETS = {"two": 2, "five": 5}
OBJECTIVE_NAMES = ("equality", "fairness", "wealth", "gained_amount", "collect_portion")


@dataclass(frozen=True)
class ProblemSpec:
    objective_set: str = "two"
    society: SocietyConfig = field(default_factory=SocietyConfig)

    def __post_init__(self):
        if self.objective_set not in OBJECTIVE_SETS:
            raise ConfigurationError(
                f"objective_set must be one of {sorted(OBJECTIVE_SETS)}, got {self.objective_set!r}"
            )
        self.society.validate()
        if self.society.num_groups != NUM_GROUPS:
            raise ConfigurationError(f"the norm encoding needs num_groups={NUM_GROUPS}")

    @property
    def n_objectives(self) -> int:
        return OBJECTIVE_SETS[self.objective_set]

    @property
    def decision_dims(self) -> int:
        return NUM_GENES

    @property
    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return LOWER_BOUNDS.copy(), UPPER_BOUNDS.copy()


# -- array kernels (reduce along the agent axis) ---------------------------


def gini_index(wealth: np.ndarray) -> np.ndarray:
    wealth = np.asarray(wealth, dtype=float)
    n = wealth.shape[-1]
    if n == 0:
        raise DomainError("Gini index of an empty society")
    ordered = np.sort(wealth, axis=-1)
    weights = 2.0 * np.arange(1, n + 1) - n - 1
    total = ordered.sum(axis=-1)
    num = (ordered * weights).sum(axis=-1)
    return np.where(total > 0, num / (n * np.where(total > 0, total, 1.0)), 0.0)


def _fairness(evader, group):
    n_evaders = evader.sum(axis=-1)
    in_poorest = (evader & (group == 0)).sum(axis=-1)
    return np.where(n_evaders > 0, 2.0 * in_poorest / np.maximum(n_evaders, 1) - 1.0, -1.0)


def _wealth_share(wealth, group, richest):
    total = wealth.sum(axis=-1)
    top = np.where(group == richest, wealth, 0.0).sum(axis=-1)
    return np.where(total > 0, top / np.where(total > 0, total, 1.0), 0.0)


def _gained_amount(wealth, primary, group, pool, member_group):
    gain = np.where(group == member_group, wealth - primary, 0.0).sum(axis=-1)
    return np.where(pool > 0, gain / np.where(pool > 0, pool, 1.0), 0.0)


# -- state-level value functions -------------------------------------------


def gini(state: SocietyState) -> float:
    return float(gini_index(state.wealth))


def equality(state: SocietyState) -> float:
    return 1.0 - 2.0 * gini(state)


def fairness(state: SocietyState) -> float:
    return float(_fairness(state.evader, state.group))


def wealth_share(state: SocietyState) -> float:
    return float(_wealth_share(state.wealth, state.group, int(state.group.max())))


def gained_amount(state: SocietyState, cr: float) -> float:
    if cr < 0:
        raise DomainError(f"common pool must be non-negative, got {cr}")
    member = int(state.group.max()) - 1
    return float(_gained_amount(state.wealth, state.primary_wealth, state.group, cr, member))


def collect_portion(norms: NormVector) -> float:
    return 1.0 - norms.collect[0]


def objectives_of_state(state: SocietyState, norms: NormVector, n_objectives: int) -> np.ndarray:
    """Objective vector read off one final state (the single-path computation)."""
    values = [equality(state), fairness(state)]
    if n_objectives == 5:
        values += [wealth_share(state), gained_amount(state, state.common_pool), collect_portion(norms)]
    return np.array(values)


# -- Monte-Carlo evaluation --------------------------------------------------


def sample_seed(seed: int, index: int) -> int:
    """Seed of Monte-Carlo sample ``index`` under base ``seed``."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


class Evaluator:
    """Batched, deterministic objective evaluation with common random numbers.

    Every norm vector is simulated on the same ``num_samples`` societies
    (initial wealth, evaders and catch draws come from ``seed``), so fitness is
    a pure function of the genes.  Counts evaluated norm vectors in
    ``evaluations``.
    """

    def __init__(self, problem: ProblemSpec, seed: int | None = None):
        self.problem = problem
        cfg = problem.society
        self.seed = cfg.master_seed if seed is None else int(seed)
        draws = [draw_path(cfg, sample_seed(self.seed, s)) for s in range(cfg.num_samples)]
        self._wealth0 = np.stack([d[0] for d in draws])  # (S, n)
        self._evader = np.stack([d[1] for d in draws])[:, None, :]  # (S, 1, n)
        self._catch = np.stack([d[2] for d in draws])  # (S, L, n)
        self._group0 = rank_groups(self._wealth0, cfg.num_groups)
        self.evaluations = 0

    def __call__(self, genes) -> np.ndarray:
        genes = np.atleast_2d(np.asarray(genes, dtype=float))
        if genes.shape[1] != NUM_GENES:
            raise ConfigurationError(f"expected {NUM_GENES} genes per row, got {genes.shape[1]}")
        cfg = self.problem.society
        n_pop = genes.shape[0]
        n_samples = self._wealth0.shape[0]
        shape = (n_samples, n_pop, cfg.num_agents)

        collect = genes[None, :, :NUM_GROUPS]
        shares = normalize_shares(genes[:, NUM_GROUPS : 2 * NUM_GROUPS])[None]
        catch = genes[None, :, -2, None]
        fine = genes[None, :, -1, None]

        wealth = np.broadcast_to(self._wealth0[:, None, :], shape).copy()
        group = np.broadcast_to(self._group0[:, None, :], shape)
        primary = wealth
        pool = np.zeros(shape[:2])
        for t in range(cfg.path_length):
            primary = wealth
            wealth, pool, _ = advance(
                wealth,
                group,
                self._evader,
                self._catch[:, None, t, :],
                collect,
                shares,
                catch,
                fine,
                cfg.invest_rate,
                cfg.group_size,
            )
            group = rank_groups(wealth, cfg.num_groups)

        columns = [
            1.0 - 2.0 * gini_index(wealth),
            np.broadcast_to(_fairness(self._evader, group), shape[:2]),
        ]
        if self.problem.n_objectives == 5:
            columns += [
                _wealth_share(wealth, group, cfg.num_groups - 1),
                _gained_amount(wealth, primary, group, pool, cfg.num_groups - 2),
            ]
        per_sample = np.stack(columns, axis=-1).mean(axis=0)  # (P, k)
        if self.problem.n_objectives == 5:
            per_sample = np.concatenate([per_sample, 1.0 - genes[:, :1]], axis=1)
        self.evaluations += n_pop
        return per_sample


def evaluate(norms: NormVector, problem: ProblemSpec, seed: int) -> np.ndarray:
    """Mean objective vector of ``norms`` over the problem's Monte-Carlo samples."""
    return Evaluator(problem, seed)(norms.to_genes())[0]
