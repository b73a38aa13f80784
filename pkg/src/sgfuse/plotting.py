"""Figure rendering for aggregated run metrics.

The report path writes PNG figures next to the delimited output: per-run F1
bars for the three prediction tasks, and the efficiency view (traffic in MB
and total alignment seconds).
"""

from __future__ import annotations

from pathlib import Path
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

TASKS = ("triplet", "object", "predicate")


def _run_label(row: Dict) -> str:
    return f"{row['scenario']}/{row['domain_size']}r/seed{row['seed']}"


def plot_f1_bars(rows: List[Dict], out_path: Path) -> Path:
    """Grouped F1 bars per run for the triplet/object/predicate tasks."""
    labels = [_run_label(r) for r in rows]
    x = range(len(rows))
    width = 0.25
    fig, ax = plt.subplots(figsize=(max(6, 1.6 * len(rows)), 4))
    for i, task in enumerate(TASKS):
        values = [r[task]["f1"] for r in rows]
        ax.bar([xi + (i - 1) * width for xi in x], values, width, label=task)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel("F1@k")
    ax.set_ylim(0, 1.05)
    ax.legend()
    ax.set_title("Prediction F1 per run")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def plot_efficiency(rows: List[Dict], out_path: Path) -> Path:
    """Traffic (MB) and alignment time (s) per run, side by side."""
    labels = [_run_label(r) for r in rows]
    x = range(len(rows))
    fig, (ax1, ax2) = plt.subplots(
        1, 2, figsize=(max(8, 2.2 * len(rows)), 4), sharex=False
    )
    ax1.bar(list(x), [r["traffic_mb"] for r in rows], color="tab:blue")
    ax1.set_ylabel("traffic (MB)")
    ax1.set_title("Data traffic")
    ax2.bar(list(x), [r["align_seconds"] for r in rows], color="tab:orange")
    ax2.set_ylabel("alignment time (s)")
    ax2.set_title("Alignment time")
    for ax in (ax1, ax2):
        ax.set_xticks(list(x))
        ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_report_figures(rows: List[Dict], out_dir: Path) -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    return [
        plot_f1_bars(rows, out_dir / "f1_by_task.png"),
        plot_efficiency(rows, out_dir / "efficiency.png"),
    ]
