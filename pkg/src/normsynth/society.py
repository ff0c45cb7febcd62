"""Agent-based tax society.

Citizens hold wealth, are partitioned into equal-sized wealth groups, pay a
group-specific tax (evaders skip it and risk a fine when caught), and receive a
group-specific share of the collected pool plus a fixed interest.

Group indices are 0-based here: group 0 is the poorest, ``num_groups - 1`` the
richest.  The array kernels (``advance`` and ``rank_groups``) operate along the
last axis so the same code path serves one society or a stacked batch of
``(samples, population, agents)`` societies.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import ConfigurationError

NUM_GROUPS = 5
NUM_GENES = 2 * NUM_GROUPS + 2

#: Per-gene [low, high] box: collect rates, raw redistribution shares, catch, fine.
LOWER_BOUNDS = np.zeros(NUM_GENES)
UPPER_BOUNDS = np.array([1.0] * (2 * NUM_GROUPS) + [0.5, 1.0])


@dataclass(frozen=True)
class SocietyConfig:
    num_agents: int = 200
    num_groups: int = NUM_GROUPS
    invest_rate: float = 0.05
    evader_prob: float = 0.05
    wealth_init_low: float = 0.0
    wealth_init_high: float = 100.0
    path_length: int = 10
    num_samples: int = 10
    master_seed: int = 0

    def validate(self) -> "SocietyConfig":
        if self.num_agents < 1 or self.num_groups < 1:
            raise ConfigurationError("num_agents and num_groups must be positive")
        if self.num_agents % self.num_groups:
            raise ConfigurationError(
                f"num_agents={self.num_agents} is not divisible by num_groups={self.num_groups}"
            )
        if not 0.0 <= self.evader_prob <= 1.0:
            raise ConfigurationError(f"evader_prob={self.evader_prob} outside [0, 1]")
        if self.invest_rate < 0:
            raise ConfigurationError(f"invest_rate={self.invest_rate} must be >= 0")
        if self.wealth_init_low > self.wealth_init_high or self.wealth_init_low < 0:
            raise ConfigurationError(
                f"wealth_init_low={self.wealth_init_low} must lie in [0, wealth_init_high]"
            )
        if self.path_length < 1:
            raise ConfigurationError(f"path_length={self.path_length} must be >= 1")
        if self.num_samples < 1:
            raise ConfigurationError(f"num_samples={self.num_samples} must be >= 1")
        return self

    @property
    def group_size(self) -> int:
        return self.num_agents // self.num_groups


@dataclass(frozen=True)
class NormVector:
    """The four parametric norms.

    ``collect`` is the per-group tax rate, ``redistribute_raw`` the per-group
    redistribution weights before normalisation, ``catch`` the probability an
    evader is caught in a step and ``fine`` the surcharge rate on evaded tax.
    """

    collect: tuple[float, ...]
    redistribute_raw: tuple[float, ...]
    catch: float
    fine: float

    @classmethod
    def from_genes(cls, genes) -> "NormVector":
        g = np.asarray(genes, dtype=float)
        if g.shape != (NUM_GENES,):
            raise ConfigurationError(f"expected {NUM_GENES} genes, got shape {g.shape}")
        return cls(
            collect=tuple(g[:NUM_GROUPS]),
            redistribute_raw=tuple(g[NUM_GROUPS : 2 * NUM_GROUPS]),
            catch=float(g[-2]),
            fine=float(g[-1]),
        )

    def to_genes(self) -> np.ndarray:
        return np.array([*self.collect, *self.redistribute_raw, self.catch, self.fine])

    @property
    def shares(self) -> np.ndarray:
        return normalize_shares(np.asarray(self.redistribute_raw, dtype=float))

    def check_bounds(self) -> None:
        g = self.to_genes()
        bad = np.flatnonzero((g < LOWER_BOUNDS) | (g > UPPER_BOUNDS))
        if bad.size:
            raise ConfigurationError(f"norm genes out of bounds at positions {bad.tolist()}")


def normalize_shares(raw: np.ndarray) -> np.ndarray:
    """Scale raw redistribution weights (last axis) to unit sum; all-zero rows become uniform."""
    raw = np.asarray(raw, dtype=float)
    total = raw.sum(axis=-1, keepdims=True)
    uniform = np.full_like(raw, 1.0 / raw.shape[-1])
    safe = np.where(total > 0, total, 1.0)
    return np.where(total > 0, raw / safe, uniform)


@dataclass
class SocietyState:
    wealth: np.ndarray
    primary_wealth: np.ndarray
    evader: np.ndarray
    group: np.ndarray
    common_pool: float = 0.0
    collected: float = field(default=0.0)

    @property
    def num_agents(self) -> int:
        return self.wealth.shape[-1]

    def copy(self) -> "SocietyState":
        return replace(
            self,
            wealth=self.wealth.copy(),
            primary_wealth=self.primary_wealth.copy(),
            evader=self.evader.copy(),
            group=self.group.copy(),
        )


def rank_groups(wealth: np.ndarray, num_groups: int) -> np.ndarray:
    """Group index per agent from a stable ascending sort of wealth along the last axis."""
    n = wealth.shape[-1]
    if n % num_groups:
        raise ConfigurationError(f"{n} agents cannot be split into {num_groups} equal groups")
    order = np.argsort(wealth, axis=-1, kind="stable")
    blocks = np.broadcast_to(np.arange(n) // (n // num_groups), order.shape)
    group = np.empty(order.shape, dtype=np.intp)
    np.put_along_axis(group, order, blocks, axis=-1)
    return group


def advance(wealth, group, evader, catch_draw, collect, shares, catch, fine, invest_rate, group_size):
    """One tax/redistribution step on (possibly batched) arrays.

    ``collect`` and ``shares`` carry the group axis last and must broadcast
    against ``group`` in every other dimension; ``catch`` and ``fine`` broadcast
    against ``wealth``.  Returns ``(new_wealth, pool, collected)``.
    """
    tax = wealth * np.take_along_axis(collect, group, axis=-1)
    caught = evader & (catch_draw < catch)
    penalty = np.minimum(wealth, tax * (1.0 + fine))
    paid = np.where(evader, np.where(caught, penalty, 0.0), tax)
    collected = paid.sum(axis=-1)
    pool = (1.0 + invest_rate) * collected
    received = pool[..., None] * np.take_along_axis(shares, group, axis=-1) / group_size
    return wealth - paid + received, pool, collected


def _draw_initial(config: SocietyConfig, rng: np.random.Generator):
    wealth = rng.uniform(config.wealth_init_low, config.wealth_init_high, config.num_agents)
    evader = rng.random(config.num_agents) < config.evader_prob
    return wealth, evader


def draw_path(config: SocietyConfig, seed: int):
    """All random numbers one path consumes: initial wealth, evader flags, per-step catch draws.

    Draw order matches ``run_path`` exactly, so batched evaluation and the
    step-by-step simulator see identical randomness for the same seed.
    """
    rng = np.random.default_rng(seed)
    wealth, evader = _draw_initial(config, rng)
    catch_draws = rng.random((config.path_length, config.num_agents))
    return wealth, evader, catch_draws


def _state_from(config: SocietyConfig, wealth: np.ndarray, evader: np.ndarray) -> SocietyState:
    return SocietyState(
        wealth=wealth,
        primary_wealth=wealth.copy(),
        evader=evader,
        group=rank_groups(wealth, config.num_groups),
    )


def init_society(config: SocietyConfig, seed: int) -> SocietyState:
    config.validate()
    return _state_from(config, *_draw_initial(config, np.random.default_rng(seed)))


def assign_groups(state: SocietyState, num_groups: int) -> SocietyState:
    return replace(state, group=rank_groups(state.wealth, num_groups))


def step(
    state: SocietyState, norms: NormVector, config: SocietyConfig, rng: np.random.Generator
) -> SocietyState:
    """Advance one time-step; consumes exactly ``num_agents`` uniforms from ``rng``."""
    catch_draw = rng.random(state.num_agents)
    return apply_step(state, norms, config, catch_draw)


def apply_step(
    state: SocietyState, norms: NormVector, config: SocietyConfig, catch_draw: np.ndarray
) -> SocietyState:
    primary = state.wealth.copy()
    wealth, pool, collected = advance(
        primary,
        state.group,
        state.evader,
        catch_draw,
        np.asarray(norms.collect, dtype=float),
        norms.shares,
        norms.catch,
        norms.fine,
        config.invest_rate,
        config.group_size,
    )
    return SocietyState(
        wealth=wealth,
        primary_wealth=primary,
        evader=state.evader,
        group=rank_groups(wealth, config.num_groups),
        common_pool=float(pool),
        collected=float(collected),
    )


def run_path(config: SocietyConfig, norms: NormVector, seed: int):
    """Simulate one path from a fresh society.

    Returns ``(final_state, last_pool, last_primary_wealth)``.
    """
    config.validate()
    rng = np.random.default_rng(seed)
    state = _state_from(config, *_draw_initial(config, rng))
    for _ in range(config.path_length):
        state = step(state, norms, config, rng)
    return state, state.common_pool, state.primary_wealth
