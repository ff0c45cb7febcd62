"""Campaign orchestration and persistence.

Layout of a campaign directory::

    config.yaml                       resolved experiment configuration
    <ALGORITHM>/run_<e>/front.csv     gene_0..gene_11, obj_0..obj_k (maximisation)
    <ALGORITHM>/run_<e>/meta.txt      key=value run record
    timings.csv                       wall-clock seconds per run (the only non-reproducible file)
    failures.csv                      runs that raised, if any
    known_front.csv                   non-dominated union of all runs
    indicators.csv                    hypervolume / IGD+ per run
    indicators_summary.csv            mean / std / max per algorithm
    compare.md, compare.csv           best-versus-rest statistical table
    select_obj<k>.csv                 known front ordered by objective k
    plotdata/                         plain-text plot inputs and rendered figures
"""

from __future__ import annotations

import csv
import hashlib
import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from .algorithms import ALGORITHM_NAMES, AlgorithmParams, FrontArchive, run_algorithm
from .errors import ConfigurationError, DomainError
from .indicators import build_reference, hypervolume, igd_plus, normalize_for_indicators
from .kernel import nondominated_mask
from .objectives import OBJECTIVE_NAMES, OBJECTIVE_SETS, Evaluator, ProblemSpec
from .society import SocietyConfig
from .stats import ComparisonTable, compare_to_best

log = logging.getLogger(__name__)

PROFILES = {
    "full": {"generations": 500, "executions": 30, "num_samples": 10},
    "desk": {"generations": 100, "executions": 10, "num_samples": 5},
}
MIN_EXECUTIONS_FOR_COMPARE = 5
TOP_K = 10
PROJECTIONS = ((1, 2, 3), (1, 2, 4), (1, 2, 5), (1, 4, 5), (3, 4, 5))

_PARAM_KEYS = {f.name for f in fields(AlgorithmParams)} - {"algorithm", "seed"}
_SOCIETY_KEYS = {f.name for f in fields(SocietyConfig)} - {"master_seed"}


@dataclass
class ExperimentConfig:
    problem: str = "two"
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHM_NAMES))
    executions: int = 30
    master_seed: int = 0
    out: str = "campaign"
    profile: str = "full"
    society: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    workers: int = 1
    revalidate: int = 0

    def validate(self) -> "ExperimentConfig":
        if self.problem not in OBJECTIVE_SETS:
            raise ConfigurationError(f"problem must be one of {sorted(OBJECTIVE_SETS)}, got {self.problem!r}")
        if self.profile not in PROFILES:
            raise ConfigurationError(f"profile must be one of {sorted(PROFILES)}, got {self.profile!r}")
        if self.executions < 1:
            raise ConfigurationError(f"executions={self.executions} must be >= 1")
        unknown = [a for a in self.algorithms if a not in ALGORITHM_NAMES]
        if unknown:
            raise ConfigurationError(
                f"unknown algorithm(s) {unknown}; valid names: {', '.join(ALGORITHM_NAMES)}"
            )
        if len(set(self.algorithms)) != len(self.algorithms) or not self.algorithms:
            raise ConfigurationError("algorithm names must be unique and non-empty")
        bad = set(self.society) - _SOCIETY_KEYS
        if bad:
            raise ConfigurationError(f"unknown society keys {sorted(bad)}")
        bad = set(self.params) - _PARAM_KEYS
        if bad:
            raise ConfigurationError(f"unknown algorithm parameter keys {sorted(bad)}")
        self.problem_spec()
        for name in self.algorithms:
            self.algorithm_params(name, 0).resolved(self.problem_spec())
        return self

    def problem_spec(self) -> ProblemSpec:
        society = {"num_samples": PROFILES[self.profile]["num_samples"], **self.society}
        return ProblemSpec(self.problem, SocietyConfig(**society, master_seed=self.master_seed))

    def algorithm_params(self, name: str, seed: int) -> AlgorithmParams:
        params = {"generations": PROFILES[self.profile]["generations"], **self.params}
        return AlgorithmParams(algorithm=name, seed=seed, **params)

    def to_dict(self) -> dict:
        return asdict(self)


def build_config(file: str | Path | None = None, profile: str | None = None, **flags) -> ExperimentConfig:
    """Resolve configuration with precedence flags > file > profile > defaults."""
    values: dict = {}
    if file is not None:
        try:
            loaded = yaml.safe_load(Path(file).read_text()) or {}
        except OSError as exc:
            raise ConfigurationError(f"cannot read config file {file}: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigurationError(f"config file {file} must hold a mapping")
        values.update(loaded)
    if profile is not None:
        values["profile"] = profile
    values.update({k: v for k, v in flags.items() if v is not None})
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(values) - known
    if unknown:
        raise ConfigurationError(f"unknown configuration keys {sorted(unknown)}")
    prof = values.get("profile", "full")
    if prof not in PROFILES:
        raise ConfigurationError(f"profile must be one of {sorted(PROFILES)}, got {prof!r}")
    values.setdefault("executions", PROFILES[prof]["executions"])
    if isinstance(values.get("algorithms"), str):
        values["algorithms"] = [values["algorithms"]]
    return ExperimentConfig(**values).validate()


def derive_seed(master_seed: int, algorithm: str, execution: int) -> int:
    digest = hashlib.blake2b(f"{master_seed}:{algorithm}:{execution}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "big") >> 1


# -- persistence -------------------------------------------------------------------


@dataclass
class RunRecord:
    algorithm: str
    execution: int
    seed: int
    problem: str
    archive: FrontArchive
    config: dict = field(default_factory=dict)
    wall_time: float = 0.0

    @property
    def evaluations(self) -> int:
        return int(self.archive.metadata.get("evaluations", 0))


def _fmt(x: float) -> str:
    return repr(float(x))


def write_front_csv(path: Path, genes: np.ndarray, objectives: np.ndarray, extra: dict | None = None) -> None:
    m = objectives.shape[1]
    extra = extra or {}
    header = list(extra) + [f"gene_{i}" for i in range(genes.shape[1])] + [f"obj_{k}" for k in range(m)]
    lines = [",".join(header)]
    for i, (g, f) in enumerate(zip(genes, objectives)):
        prefix = [str(col[i]) for col in extra.values()]
        lines.append(",".join(prefix + [_fmt(v) for v in g] + [_fmt(v) for v in f]))
    path.write_text("\n".join(lines) + "\n")


def read_front_csv(path: Path) -> tuple[np.ndarray, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    gcols = [i for i, h in enumerate(header) if h.startswith("gene_")]
    ocols = [i for i, h in enumerate(header) if h.startswith("obj_")]
    genes = np.array([[float(r[i]) for i in gcols] for r in body]).reshape(len(body), len(gcols))
    objs = np.array([[float(r[i]) for i in ocols] for r in body]).reshape(len(body), len(ocols))
    return genes, objs


def run_dir(campaign: Path, algorithm: str, execution: int) -> Path:
    return Path(campaign) / algorithm / f"run_{execution}"


def save_record(record: RunRecord, campaign: Path) -> Path:
    where = run_dir(campaign, record.algorithm, record.execution)
    try:
        where.mkdir(parents=True, exist_ok=True)
        write_front_csv(where / "front.csv", record.archive.genes, record.archive.objectives)
        meta = {
            "algorithm": record.algorithm,
            "execution": record.execution,
            "seed": record.seed,
            "problem": record.problem,
            "params_hash": record.archive.metadata.get("params_hash", ""),
            "evaluations": record.evaluations,
            "front_size": len(record.archive),
        }
        meta.update({f"config.{k}": v for k, v in sorted(_flatten(record.config).items())})
        (where / "meta.txt").write_text("".join(f"{k}={v}\n" for k, v in meta.items()))
    except OSError as exc:
        raise OSError(f"failed writing run record to {where}: {exc}") from exc
    return where


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        elif isinstance(v, list):
            out[key] = ";".join(map(str, v))
        else:
            out[key] = v
    return out


def read_meta(path: Path) -> dict:
    meta = {}
    for line in Path(path).read_text().splitlines():
        if "=" in line:
            k, v = line.split("=", 1)
            meta[k] = v
    return meta


def load_record(where: Path) -> RunRecord:
    where = Path(where)
    meta = read_meta(where / "meta.txt")
    genes, objs = read_front_csv(where / "front.csv")
    archive = FrontArchive(
        genes, objs, {"evaluations": int(meta["evaluations"]), "params_hash": meta.get("params_hash", "")}
    )
    return RunRecord(meta["algorithm"], int(meta["execution"]), int(meta["seed"]), meta["problem"], archive)


def load_campaign(campaign: Path) -> list[RunRecord]:
    campaign = Path(campaign)
    records = [load_record(p.parent) for p in campaign.glob("*/run_*/meta.txt")]
    records.sort(key=lambda r: (_alg_order(r.algorithm), r.execution))
    return records


def _alg_order(name: str) -> tuple[int, str]:
    return (ALGORITHM_NAMES.index(name) if name in ALGORITHM_NAMES else len(ALGORITHM_NAMES), name)


def load_config(campaign: Path) -> ExperimentConfig:
    data = yaml.safe_load((Path(campaign) / "config.yaml").read_text())
    return ExperimentConfig(**data)


# -- commands ---------------------------------------------------------------------------


def execute_run(config: ExperimentConfig, algorithm: str, execution: int, seed: int | None = None) -> RunRecord:
    seed = derive_seed(config.master_seed, algorithm, execution) if seed is None else seed
    problem = config.problem_spec()
    archive = run_algorithm(problem, config.algorithm_params(algorithm, seed))
    return RunRecord(
        algorithm=algorithm,
        execution=execution,
        seed=seed,
        problem=config.problem,
        archive=archive,
        config=config.to_dict() | {"out": ""},
        wall_time=float(archive.metadata.get("wall_time", 0.0)),
    )


def revalidate(record: RunRecord, config: ExperimentConfig, samples: int) -> np.ndarray:
    """Re-evaluate an archive with ``samples`` fresh Monte-Carlo paths."""
    problem = config.problem_spec()
    problem = replace(problem, society=replace(problem.society, num_samples=samples))
    return Evaluator(problem, seed=derive_seed(config.master_seed, "revalidate", samples))(record.archive.genes)


def cmd_run(config: ExperimentConfig, algorithm: str, seed: int | None = None, execution: int = 0) -> RunRecord:
    config = replace(config, algorithms=[algorithm]).validate()
    record = execute_run(config, algorithm, execution, seed)
    where = save_record(record, Path(config.out))
    if config.revalidate:
        write_front_csv(where / "revalidated.csv", record.archive.genes, revalidate(record, config, config.revalidate))
    log.info("%s run %d: %d solutions, %d evaluations", algorithm, execution, len(record.archive), record.evaluations)
    return record


def _guarded_run(args):
    config, algorithm, execution = args
    try:
        return execute_run(config, algorithm, execution), None
    except Exception as exc:  # failed runs are recorded, the campaign goes on
        return None, (algorithm, execution, f"{type(exc).__name__}: {exc}", traceback.format_exc())


def cmd_experiment(config: ExperimentConfig) -> Path:
    config.validate()
    campaign = Path(config.out)
    campaign.mkdir(parents=True, exist_ok=True)
    (campaign / "config.yaml").write_text(yaml.safe_dump(config.to_dict(), sort_keys=True))
    jobs = [(config, a, e) for a in config.algorithms for e in range(config.executions)]
    pool = ProcessPoolExecutor(max_workers=config.workers) if config.workers > 1 else None
    results = pool.map(_guarded_run, jobs) if pool else map(_guarded_run, jobs)

    failures = []
    counts = dict.fromkeys(config.algorithms, 0)
    timings = ["algorithm,execution,wall_time"]
    try:
        # results arrive in job order, so every record is persisted as soon as it exists
        for record, failure in results:
            if failure is not None:
                failures.append(failure)
                log.error("run %s/%d failed: %s", failure[0], failure[1], failure[2])
                continue
            where = save_record(record, campaign)
            counts[record.algorithm] += 1
            timings.append(f"{record.algorithm},{record.execution},{record.wall_time}")
            log.info("%s run %d done in %.1fs", record.algorithm, record.execution, record.wall_time)
            if config.revalidate:
                objs = revalidate(record, config, config.revalidate)
                write_front_csv(where / "revalidated.csv", record.archive.genes, objs)
    finally:
        if pool:
            pool.shutdown()
    (campaign / "timings.csv").write_text("\n".join(timings) + "\n")
    if failures:
        with open(campaign / "failures.csv", "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["algorithm", "execution", "error"])
            writer.writerows(f[:3] for f in failures)
    cmd_indicators(campaign)
    eligible = [a for a, c in counts.items() if c >= MIN_EXECUTIONS_FOR_COMPARE]
    if len(eligible) >= 2:
        cmd_compare(campaign)
    else:
        log.warning("skipping comparison: needs >= 2 algorithms with >= %d executions", MIN_EXECUTIONS_FOR_COMPARE)
    return campaign


@dataclass
class KnownFront:
    genes: np.ndarray
    objectives: np.ndarray  # maximisation


def known_front(records: list[RunRecord]) -> KnownFront:
    genes = np.vstack([r.archive.genes for r in records if len(r.archive)])
    objs = np.vstack([r.archive.objectives for r in records if len(r.archive)])
    keep = nondominated_mask(-objs)
    genes, objs = genes[keep], objs[keep]
    _, first = np.unique(objs, axis=0, return_index=True)
    first = np.sort(first)
    return KnownFront(genes[first], objs[first])


def compute_indicators(records: list[RunRecord]) -> list[dict]:
    if not records:
        raise DomainError("campaign holds no run records")
    reference = build_reference([-r.archive.objectives for r in records])
    normed, ref_front, ref_point = normalize_for_indicators([-r.archive.objectives for r in records], reference)
    rows = []
    for r, front in zip(records, normed):
        rows.append(
            {
                "algorithm": r.algorithm,
                "execution": r.execution,
                "seed": r.seed,
                "hypervolume": hypervolume(front, ref_point) if len(front) else 0.0,
                "igd_plus": igd_plus(front, ref_front),
            }
        )
    return rows


def summarize(rows: list[dict], indicator: str) -> dict[str, dict[str, float]]:
    out: dict[str, dict[str, float]] = {}
    for alg in dict.fromkeys(r["algorithm"] for r in rows):
        v = np.array([r[indicator] for r in rows if r["algorithm"] == alg])
        out[alg] = {
            "mean": float(v.mean()),
            "std": float(v.std(ddof=1)) if len(v) > 1 else 0.0,
            "max": float(v.max()),
            "n": len(v),
        }
    return out


def cmd_indicators(campaign: Path) -> Path:
    campaign = Path(campaign)
    records = load_campaign(campaign)
    if not records:
        raise DomainError(f"no run records under {campaign}")
    kf = known_front(records)
    write_front_csv(campaign / "known_front.csv", kf.genes, kf.objectives)
    rows = compute_indicators(records)
    with open(campaign / "indicators.csv", "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=["algorithm", "execution", "seed", "hypervolume", "igd_plus"])
        writer.writeheader()
        for row in rows:
            writer.writerow({**row, "hypervolume": _fmt(row["hypervolume"]), "igd_plus": _fmt(row["igd_plus"])})
    with open(campaign / "indicators_summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["algorithm", "indicator", "mean", "std", "max", "n"])
        for indicator in ("hypervolume", "igd_plus"):
            for alg, s in summarize(rows, indicator).items():
                writer.writerow([alg, indicator, _fmt(s["mean"]), _fmt(s["std"]), _fmt(s["max"]), s["n"]])
    return campaign / "indicators.csv"


def read_indicators(campaign: Path) -> list[dict]:
    path = Path(campaign) / "indicators.csv"
    if not path.exists():
        raise DomainError(f"{path} not found; run the indicators command first")
    with open(path, newline="") as fh:
        return [
            {**row, "execution": int(row["execution"]), "hypervolume": float(row["hypervolume"]),
             "igd_plus": float(row["igd_plus"])}
            for row in csv.DictReader(fh)
        ]


def indicator_samples(rows: list[dict], indicator: str) -> dict[str, list[float]]:
    samples: dict[str, list[float]] = {}
    for r in rows:
        samples.setdefault(r["algorithm"], []).append(r[indicator])
    return samples


def compare_tables(rows: list[dict], alpha: float = 0.01) -> tuple[ComparisonTable, ComparisonTable]:
    hv = indicator_samples(rows, "hypervolume")
    short = {a: len(v) for a, v in hv.items() if len(v) < MIN_EXECUTIONS_FOR_COMPARE}
    if len(hv) < 2:
        raise DomainError("comparison needs at least 2 algorithms")
    if short:
        raise DomainError(
            f"comparison needs at least {MIN_EXECUTIONS_FOR_COMPARE} executions per algorithm; got {short}"
        )
    return (
        compare_to_best(hv, "higher_better", alpha, "hypervolume"),
        compare_to_best(indicator_samples(rows, "igd_plus"), "lower_better", alpha, "igd_plus"),
    )


def render_markdown(tables: tuple[ComparisonTable, ...]) -> str:
    alpha = tables[0].alpha
    lines = [
        f"Best mean marked (best); values tied with the best (Kruskal-Wallis p > {alpha}) in bold.",
        "",
        "| Algorithm | Metric | " + " | ".join(t.indicator for t in tables) + " |",
        "|---|---|" + "---:|" * len(tables),
    ]
    for name in [r.name for r in tables[0].rows]:
        for metric in ("mean", "std", "max"):
            cells = []
            for t in tables:
                r = t.row(name)
                text = f"{getattr(r, metric):.6f}"
                if metric == "mean":
                    if r.tied:
                        text = f"**{text}**"
                    if r.best:
                        text += " (best)"
                cells.append(text)
            lines.append(f"| {name if metric == 'mean' else ''} | {metric} | " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def cmd_compare(campaign: Path, alpha: float = 0.01) -> tuple[ComparisonTable, ComparisonTable]:
    campaign = Path(campaign)
    tables = compare_tables(read_indicators(campaign), alpha)
    (campaign / "compare.md").write_text(render_markdown(tables))
    with open(campaign / "compare.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["indicator", "algorithm", "mean", "std", "max", "n", "best", "tied", "p_value"])
        for t in tables:
            for r in t.rows:
                writer.writerow(
                    [t.indicator, r.name, _fmt(r.mean), _fmt(r.std), _fmt(r.max), r.n, int(r.best), int(r.tied),
                     _fmt(r.p_value)]
                )
    return tables


@dataclass
class Selection:
    objective: int  # 1-based
    selected_genes: np.ndarray
    selected_objectives: np.ndarray
    top_genes: np.ndarray
    top_objectives: np.ndarray
    front_mean: np.ndarray
    front_max: np.ndarray


def select_by_priority(front: KnownFront, objective: int, top: int = TOP_K) -> Selection:
    """Order the front by objective ``objective`` (1-based, descending), ties by the others descending."""
    m = front.objectives.shape[1]
    if not 1 <= objective <= m:
        raise DomainError(f"objective index must be in 1..{m}, got {objective}")
    if len(front.objectives) == 0:
        raise DomainError("known front is empty")
    k = objective - 1
    others = [j for j in range(m) if j != k]
    keys = [-front.objectives[:, j] for j in reversed(others)] + [-front.objectives[:, k]]
    order = np.lexsort(keys)
    return Selection(
        objective=objective,
        selected_genes=front.genes[order[0]],
        selected_objectives=front.objectives[order[0]],
        top_genes=front.genes[order[:top]],
        top_objectives=front.objectives[order[:top]],
        front_mean=front.objectives.mean(axis=0),
        front_max=front.objectives.max(axis=0),
    )


def read_known_front(campaign: Path) -> KnownFront:
    path = Path(campaign) / "known_front.csv"
    if not path.exists():
        cmd_indicators(campaign)
    return KnownFront(*read_front_csv(path))


def cmd_select(campaign: Path, prioritize: int) -> Selection:
    campaign = Path(campaign)
    front = read_known_front(campaign)
    sel = select_by_priority(front, prioritize)
    write_front_csv(
        campaign / f"select_obj{prioritize}.csv",
        sel.top_genes,
        sel.top_objectives,
        {"position": list(range(1, len(sel.top_genes) + 1))},
    )
    return sel


def describe_selection(sel: Selection) -> str:
    m = len(sel.selected_objectives)
    names = OBJECTIVE_NAMES[:m]
    lines = [f"prioritising Obj{sel.objective} ({names[sel.objective - 1]})", "",
             "| | " + " | ".join(f"Obj{j + 1}" for j in range(m)) + " |", "|---|" + "---:|" * m]
    lines.append("| selected | " + " | ".join(f"{v:.6f}" for v in sel.selected_objectives) + " |")
    lines.append(f"| top-{len(sel.top_objectives)} mean | " + " | ".join(
        f"{v:.6f}" for v in sel.top_objectives.mean(axis=0)) + " |")
    lines.append("| front mean | " + " | ".join(f"{v:.6f}" for v in sel.front_mean) + " |")
    lines.append("| front max | " + " | ".join(f"{v:.6f}" for v in sel.front_max) + " |")
    return "\n".join(lines) + "\n"


def cmd_plotdata(campaign: Path, figures: bool = True) -> Path:
    """Columnar plot inputs: fronts per algorithm, 3-D projections, indicator samples per algorithm."""
    campaign = Path(campaign)
    records = load_campaign(campaign)
    if not records:
        raise DomainError(f"no run records under {campaign}")
    out = campaign / "plotdata"
    out.mkdir(exist_ok=True)
    m = records[0].archive.objectives.shape[1]
    obj_cols = [f"obj_{k}" for k in range(m)]
    for alg in dict.fromkeys(r.algorithm for r in records):
        lines = [",".join(["execution"] + obj_cols)]
        for r in records:
            if r.algorithm == alg:
                lines += [",".join([str(r.execution)] + [_fmt(v) for v in f]) for f in r.archive.objectives]
        (out / f"front_{alg}.csv").write_text("\n".join(lines) + "\n")
    if m == 5:
        for proj in PROJECTIONS:
            lines = ["algorithm,execution," + ",".join(f"obj_{k - 1}" for k in proj)]
            for r in records:
                for f in r.archive.objectives:
                    lines.append(f"{r.algorithm},{r.execution}," + ",".join(_fmt(f[k - 1]) for k in proj))
            (out / ("projection_" + "_".join(map(str, proj)) + ".csv")).write_text("\n".join(lines) + "\n")
    rows = read_indicators(campaign) if (campaign / "indicators.csv").exists() else compute_indicators(records)
    for indicator in ("hypervolume", "igd_plus"):
        samples = indicator_samples(rows, indicator)
        algs = list(samples)
        depth = max(len(v) for v in samples.values())
        lines = [",".join(algs)]
        for i in range(depth):
            lines.append(",".join(_fmt(samples[a][i]) if i < len(samples[a]) else "" for a in algs))
        (out / f"box_{indicator}.csv").write_text("\n".join(lines) + "\n")
    if figures:
        from .plotting import render_campaign_figures

        render_campaign_figures(records, rows, out)
    return out

