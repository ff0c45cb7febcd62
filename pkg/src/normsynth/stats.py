"""Kruskal-Wallis test and best-versus-rest comparison tables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import chdtrc
from scipy.stats import rankdata

from .errors import DomainError


def kruskal_wallis(samples) -> tuple[float, float]:
    """Tie-corrected H statistic and its chi-square upper-tail p-value (k - 1 dof)."""
    groups = [np.asarray(g, dtype=float).ravel() for g in samples]
    if len(groups) < 2:
        raise DomainError("Kruskal-Wallis needs at least two groups")
    if any(len(g) == 0 for g in groups):
        raise DomainError("Kruskal-Wallis groups must be non-empty")
    pooled = np.concatenate(groups)
    n = len(pooled)
    ranks = rankdata(pooled)
    _, tie_counts = np.unique(pooled, return_counts=True)
    correction = 1.0 - np.sum(tie_counts**3 - tie_counts) / (n**3 - n) if n > 1 else 0.0
    if correction <= 0:
        return 0.0, 1.0
    bounds = np.cumsum([0] + [len(g) for g in groups])
    h = sum(
        ranks[lo:hi].sum() ** 2 / (hi - lo) for lo, hi in zip(bounds[:-1], bounds[1:])
    )
    h = (12.0 / (n * (n + 1)) * h - 3.0 * (n + 1)) / correction
    h = max(h, 0.0)
    return float(h), float(chdtrc(len(groups) - 1, h))


@dataclass
class IndicatorRow:
    name: str
    mean: float
    std: float
    max: float
    n: int
    best: bool = False
    tied: bool = False
    p_value: float = 1.0


@dataclass
class ComparisonTable:
    indicator: str
    sense: str
    alpha: float
    rows: list[IndicatorRow] = field(default_factory=list)

    @property
    def best(self) -> str:
        return next(r.name for r in self.rows if r.best)

    def row(self, name: str) -> IndicatorRow:
        return next(r for r in self.rows if r.name == name)


def compare_to_best(
    samples: dict[str, list[float]], sense: str = "higher_better", alpha: float = 0.01, indicator: str = ""
) -> ComparisonTable:
    """Mark the algorithm with the best mean and every algorithm statistically tied with it.

    Each non-best algorithm is tested against the best with a two-group
    Kruskal-Wallis test; it is tied when the p-value exceeds ``alpha``.
    """
    if sense not in ("higher_better", "lower_better"):
        raise DomainError(f"sense must be 'higher_better' or 'lower_better', got {sense!r}")
    if len(samples) < 2:
        raise DomainError("comparison needs at least two algorithms")
    rows = []
    for name, values in samples.items():
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            raise DomainError(f"no samples for {name}")
        rows.append(
            IndicatorRow(name, float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0, float(v.max()), v.size)
        )
    means = np.array([r.mean for r in rows])
    best = int(np.argmax(means) if sense == "higher_better" else np.argmin(means))
    rows[best].best = rows[best].tied = True
    best_values = samples[rows[best].name]
    for i, r in enumerate(rows):
        if i == best:
            continue
        _, p = kruskal_wallis([best_values, samples[r.name]])
        r.p_value = p
        r.tied = p > alpha
    return ComparisonTable(indicator=indicator, sense=sense, alpha=alpha, rows=rows)
