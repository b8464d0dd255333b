"""Strategy comparison for the ``stats`` subcommand: CSV table and bar chart."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

from .core import ClauseSet
from .instantiate import Baseline, Direction, Strategy, ground_all


@dataclass
class StrategyRow:
    strategy: str
    instances: int
    steps: int


STRATEGIES = [
    ("auto", Strategy()),
    ("lower", Strategy(default_direction=Direction.LOWER)),
    ("upper", Strategy(default_direction=Direction.UPPER)),
    ("filtered", Strategy(baseline=Baseline.ARG_FILTERED, complete=False)),
    ("exhaustive", Strategy(baseline=Baseline.EXHAUSTIVE, complete=False)),
]


def compare_strategies(cs: ClauseSet, designate: list | None = None) -> list[StrategyRow]:
    rows = []
    for name, st in STRATEGIES:
        st = Strategy(
            directions=st.directions,
            default_direction=st.default_direction,
            baseline=st.baseline,
            designate=designate,
            complete=st.complete if designate is None else False,
        )
        _, trace = ground_all(cs, st)
        rows.append(StrategyRow(name, trace.count, len(trace.steps)))
    return rows


def rows_to_csv(rows: list[StrategyRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["strategy", "instances", "steps"])
    for r in rows:
        w.writerow([r.strategy, r.instances, r.steps])
    return buf.getvalue()


def plot_rows(rows: list[StrategyRow], path, title: str = "") -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 3.5))
    names = [r.strategy for r in rows]
    vals = [r.instances for r in rows]
    bars = ax.bar(names, vals, color="#4C72B0")
    ax.bar_label(bars)
    ax.set_ylabel("non-redundant instances")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    # fixed metadata keeps the file byte-identical across runs
    fig.savefig(path, metadata={"Software": None})
    plt.close(fig)
