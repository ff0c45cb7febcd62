"""Acceptance criteria A1-A8.

The campaign-backed criteria (A3, A4, A6, A7) run desk-profile campaigns once
per session.  Set ``NORMSYNTH_ACCEPTANCE_DIR`` to keep the campaigns on disk
and reuse them in later sessions; otherwise they live in a temporary directory.
Each criterion prints a PASS/FAIL line in the terminal summary.
"""

from __future__ import annotations

import os
import time
from pathlib import Path

import numpy as np
import pytest

from normsynth import harness
from normsynth.indicators import hypervolume
from normsynth.kernel import das_dennis_weights, fast_nondominated_sort, polynomial_mutation, sbx_crossover
from normsynth.objectives import gini_index
from normsynth.society import LOWER_BOUNDS, NUM_GENES, UPPER_BOUNDS, NormVector, SocietyConfig, init_society, step
from normsynth.stats import compare_to_best, kruskal_wallis

MASTER_SEED = 1
pytestmark = pytest.mark.slow


def _campaign(tmp_path_factory, problem: str, name: str, **overrides) -> tuple[Path, float]:
    root = os.environ.get("NORMSYNTH_ACCEPTANCE_DIR")
    base = Path(root) if root else tmp_path_factory.mktemp("acceptance")
    out = base / name
    if (out / "indicators.csv").exists() and root:
        return out, float("nan")
    config = harness.build_config(
        profile="desk", problem=problem, master_seed=MASTER_SEED, out=str(out), **overrides
    )
    start = time.perf_counter()
    harness.cmd_experiment(config)
    return out, time.perf_counter() - start


@pytest.fixture(scope="session")
def two_obj_campaign(tmp_path_factory):
    return _campaign(tmp_path_factory, "two", "desk_two")


@pytest.fixture(scope="session")
def five_obj_campaign(tmp_path_factory):
    return _campaign(tmp_path_factory, "five", "desk_five")


# -- A1 ------------------------------------------------------------------------------


@pytest.mark.criterion("A1")
def test_a1_simulator_conservation(detail):
    rng = np.random.default_rng(20240101)
    cfg = SocietyConfig()
    span = UPPER_BOUNDS - LOWER_BOUNDS
    worst = 0.0
    start = time.perf_counter()
    for _ in range(10_000):
        seed = int(rng.integers(2**63))
        state = init_society(cfg, seed)
        norms = NormVector.from_genes(LOWER_BOUNDS + rng.random(NUM_GENES) * span)
        before = state.wealth.sum()
        after = step(state, norms, cfg, np.random.default_rng(seed + 1))
        gain = after.wealth.sum() - before
        expected = cfg.invest_rate * after.collected
        worst = max(worst, abs(gain - expected) / before)
        assert after.wealth.min() >= 0
    elapsed = time.perf_counter() - start
    detail(f"max relative error {worst:.2e}, {elapsed:.1f}s")
    assert worst <= 1e-9
    assert elapsed < 10


# -- A2 ------------------------------------------------------------------------------


def _peel_off(F: np.ndarray) -> list[list[int]]:
    remaining = np.arange(len(F))
    fronts = []
    while len(remaining):
        R = F[remaining]
        keep = []
        for i, row in enumerate(R):
            dominated = np.any(np.all(R <= row, axis=1) & np.any(R < row, axis=1))
            if not dominated:
                keep.append(i)
        fronts.append(sorted(remaining[keep].tolist()))
        remaining = np.delete(remaining, keep)
    return fronts


def _pairwise_gini(w: np.ndarray) -> float:
    n = len(w)
    return float(np.abs(w[:, None] - w[None, :]).sum() / (2 * n * n * w.mean()))


def _mc_hypervolume(front: np.ndarray, ref: np.ndarray, samples: int, rng) -> tuple[float, float]:
    lower = front.min(axis=0)
    volume = float(np.prod(ref - lower))
    hits = 0
    for chunk in range(0, samples, 50_000):
        pts = lower + rng.random((min(50_000, samples - chunk), len(ref))) * (ref - lower)
        covered = np.zeros(len(pts), bool)
        for p in front:
            covered |= (pts >= p).all(axis=1)
        hits += covered.sum()
    frac = hits / samples
    return volume * frac, volume * np.sqrt(frac * (1 - frac) / samples)


@pytest.mark.criterion("A2")
def test_a2_nondominated_sort_oracle(detail):
    rng = np.random.default_rng(7)
    start = time.perf_counter()
    for k in range(200):
        n = int(rng.integers(1, 201))
        m = (2, 5)[k % 2]
        # coarse integer grids give ties and deep front structures
        F = rng.integers(0, 8, size=(n, m)).astype(float) if k % 4 < 2 else rng.random((n, m))
        got = [sorted(f.tolist()) for f in fast_nondominated_sort(F)]
        assert got == _peel_off(F)
    detail(f"sort 200 populations {time.perf_counter() - start:.1f}s")


@pytest.mark.criterion("A2")
def test_a2_gini_oracle(detail):
    rng = np.random.default_rng(8)
    worst = 0.0
    for _ in range(100):
        w = rng.uniform(0, 100, int(rng.integers(2, 201)))
        worst = max(worst, abs(float(gini_index(w)) - _pairwise_gini(w)))
    detail(f"gini max abs error {worst:.1e}")
    assert worst <= 1e-12


@pytest.mark.criterion("A2")
def test_a2_hypervolume_oracle(detail):
    assert hypervolume(np.array([[0.0, 1.0], [0.5, 0.5], [1.0, 0.0]]), np.array([2.0, 2.0])) == 3.25
    rng = np.random.default_rng(9)
    start = time.perf_counter()
    worst = 0.0
    for k in range(20):
        d = (2, 3, 5)[k % 3]
        n = int(rng.integers(5, 31))
        x = rng.random((n, d)) + 0.05
        front = 1.0 - x / np.linalg.norm(x, axis=1, keepdims=True) * rng.uniform(0.7, 1.0, (n, 1))
        ref = np.full(d, 1.1)
        exact = hypervolume(front, ref)
        est, se = _mc_hypervolume(front, ref, 1_000_000, rng)
        worst = max(worst, abs(exact - est) / se)
        assert abs(exact - est) <= 3 * se, (k, d, exact, est, se)
    elapsed = time.perf_counter() - start
    detail(f"hypervolume worst |exact-MC| = {worst:.2f} sigma, {elapsed:.1f}s")
    assert elapsed < 120


# -- A3 ------------------------------------------------------------------------------


@pytest.mark.criterion("A3")
def test_a3_two_objective_ordering(two_obj_campaign, detail):
    campaign, elapsed = two_obj_campaign
    rows = harness.read_indicators(campaign)
    hv = harness.indicator_samples(rows, "hypervolume")
    assert all(len(v) == 10 for v in hv.values()) and len(hv) == 4
    table = compare_to_best(hv, "higher_better", alpha=0.05)
    means = {r.name: round(r.mean, 4) for r in table.rows}
    mombi = table.row("MOMBI2")
    detail(f"mean HV {means}, best {table.best}, MOMBI2 p={mombi.p_value:.3g}, campaign {elapsed:.0f}s")
    assert np.mean(hv["NSGA2"]) > np.mean(hv["MOMBI2"])
    assert not mombi.tied


# -- A4 ------------------------------------------------------------------------------


@pytest.mark.criterion("A4")
def test_a4_five_objective_ordering(five_obj_campaign, detail):
    campaign, elapsed = five_obj_campaign
    rows = harness.read_indicators(campaign)
    igd = harness.indicator_samples(rows, "igd_plus")
    assert all(len(v) == 10 for v in igd.values()) and len(igd) == 4
    means = {a: float(np.mean(v)) for a, v in igd.items()}
    table = compare_to_best(igd, "lower_better", alpha=0.01)
    detail(
        f"mean IGD+ { {a: round(m, 4) for a, m in means.items()} }, best {table.best}, campaign {elapsed:.0f}s"
    )
    assert min(means, key=means.get) == "MOEADD"


# -- A5 ------------------------------------------------------------------------------


@pytest.mark.criterion("A5")
def test_a5_kruskal_wallis(detail):
    h, p = kruskal_wallis([[1, 2, 3], [4, 5, 6]])
    detail(f"H={h:.4f} p={p:.4f}")
    assert abs(h - 3.857) <= 1e-3
    assert abs(p - 0.0495) <= 1e-3
    assert kruskal_wallis([[5.0, 5.0, 5.0], [5.0, 5.0, 5.0]]) == (0.0, 1.0)


# -- A6 ------------------------------------------------------------------------------


@pytest.mark.criterion("A6")
def test_a6_wealth_priority_opposes_equality(five_obj_campaign, detail):
    campaign, _ = five_obj_campaign
    sel = harness.cmd_select(campaign, 3)
    top, front = sel.top_objectives[:, 0].mean(), sel.front_mean[0]
    detail(f"Obj3-priority top-10 Obj1 mean {top:.4f} vs front {front:.4f}")
    assert len(sel.top_objectives) == 10
    assert top < front


@pytest.mark.criterion("A6")
def test_a6_collect_priority_keeps_gained_amount(five_obj_campaign, detail):
    campaign, _ = five_obj_campaign
    sel = harness.cmd_select(campaign, 5)
    obj4, best = sel.top_objectives[:, 3], sel.front_max[3]
    gap = np.max(np.abs(obj4 - best)) / abs(best)
    # context only: the best Obj4 among all front members whose Obj5 is within 1e-3 of its maximum
    front = harness.read_known_front(campaign).objectives
    near = front[front[:, 4] >= front[:, 4].max() - 1e-3, 3].max()
    detail(
        f"Obj5-priority top-10 Obj4 in [{obj4.min():.4f}, {obj4.max():.4f}], front max {best:.4f}, "
        f"best Obj4 with Obj5 >= max-1e-3: {near:.4f}"
    )
    assert len(obj4) == 10
    assert gap <= 0.05


# -- A7 ------------------------------------------------------------------------------


@pytest.mark.criterion("A7")
def test_a7_determinism_and_round_trip(two_obj_campaign, tmp_path, detail):
    campaign, _ = two_obj_campaign
    config = harness.build_config(
        profile="desk", problem="two", master_seed=MASTER_SEED, executions=2, out=str(tmp_path / "again")
    )
    again = harness.cmd_experiment(config)
    compared = 0
    for alg in harness.ALGORITHM_NAMES:
        for e in range(2):
            a = harness.run_dir(campaign, alg, e) / "front.csv"
            b = harness.run_dir(again, alg, e) / "front.csv"
            assert a.read_bytes() == b.read_bytes(), f"{alg} run {e}"
            compared += 1
    record = harness.execute_run(config, "NSGA2", 0)
    genes, objs = harness.read_front_csv(harness.run_dir(campaign, "NSGA2", 0) / "front.csv")
    assert np.array_equal(objs, record.archive.objectives)
    assert np.array_equal(genes, record.archive.genes)
    detail(f"{compared} front CSVs byte-identical, persisted objectives exact")


# -- A8 ------------------------------------------------------------------------------


@pytest.mark.criterion("A8")
def test_a8_operator_contracts(detail):
    rng = np.random.default_rng(10)
    bounds = (LOWER_BOUNDS, UPPER_BOUNDS)
    span = UPPER_BOUNDS - LOWER_BOUNDS
    total = 1_000_000
    batch = 100_000
    mutated = np.zeros(NUM_GENES)
    for _ in range(total // batch):
        p1 = LOWER_BOUNDS + rng.random((batch, NUM_GENES)) * span
        p2 = LOWER_BOUNDS + rng.random((batch, NUM_GENES)) * span
        c1, c2 = sbx_crossover(p1, p2, 20.0, 0.9, bounds, rng)
        assert np.all((c1 >= LOWER_BOUNDS) & (c1 <= UPPER_BOUNDS))
        assert np.all((c2 >= LOWER_BOUNDS) & (c2 <= UPPER_BOUNDS))
        m = polynomial_mutation(c1, 20.0, 1 / 12, bounds, rng)
        assert np.all((m >= LOWER_BOUNDS) & (m <= UPPER_BOUNDS))
        mutated += (m != c1).sum(axis=0)
    freq = mutated / total
    sigma = np.sqrt((1 / 12) * (11 / 12) / total)
    z = np.max(np.abs(freq - 1 / 12)) / sigma
    detail(f"mutation frequency max deviation {z:.2f} sigma")
    assert z <= 3
    assert len(das_dennis_weights(2, 99)) == 100
    assert len(das_dennis_weights(5, 6)) == 210
