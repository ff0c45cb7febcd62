"""Figures rendered next to the plain-text plot data."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

LABELS = {"hypervolume": "Hypervolume", "igd_plus": "IGD+"}
OBJ_LABELS = ("Obj1 equality", "Obj2 fairness", "Obj3 wealth", "Obj4 gained amount", "Obj5 collect portion")

plt.rcParams.update(
    {
        "font.size": 9,
        "axes.labelsize": 9,
        "legend.fontsize": 8,
        "xtick.labelsize": 8,
        "ytick.labelsize": 8,
        "savefig.dpi": 150,
    }
)


def boxplot(samples: dict[str, list[float]], indicator: str, path: Path) -> Path:
    fig, ax = plt.subplots(figsize=(4.5, 3.2))
    ax.boxplot(list(samples.values()))
    ax.set_xticks(range(1, len(samples) + 1), list(samples))
    ax.set_ylabel(LABELS.get(indicator, indicator))
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def front_scatter(fronts: dict[str, np.ndarray], columns: tuple[int, ...], path: Path) -> Path:
    """2-D or 3-D scatter of one execution per algorithm; ``columns`` are 1-based objective indices."""
    three_d = len(columns) == 3
    fig = plt.figure(figsize=(5, 4))
    ax = fig.add_subplot(projection="3d" if three_d else None)
    for name, objs in fronts.items():
        cols = [objs[:, c - 1] for c in columns]
        ax.scatter(*cols, s=8, label=name)
    ax.set_xlabel(OBJ_LABELS[columns[0] - 1])
    ax.set_ylabel(OBJ_LABELS[columns[1] - 1])
    if three_d:
        ax.set_zlabel(OBJ_LABELS[columns[2] - 1])
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def render_campaign_figures(records, rows, out: Path) -> list[Path]:
    out = Path(out)
    written = []
    for indicator in ("hypervolume", "igd_plus"):
        samples: dict[str, list[float]] = {}
        for r in rows:
            samples.setdefault(r["algorithm"], []).append(r[indicator])
        written.append(boxplot(samples, indicator, out / f"box_{indicator}.png"))

    first = {}
    for r in records:
        if r.algorithm not in first and len(r.archive):
            first[r.algorithm] = r.archive.objectives
    if not first:
        return written
    m = next(iter(first.values())).shape[1]
    if m == 2:
        written.append(front_scatter(first, (1, 2), out / "front_obj1_obj2.png"))
    else:
        from .harness import PROJECTIONS

        for proj in PROJECTIONS:
            name = "front_" + "_".join(f"obj{k}" for k in proj) + ".png"
            written.append(front_scatter(first, proj, out / name))
    return written
