"""Aggregate training runs into a summary CSV and matplotlib figures.

A "run" is a directory holding the config.json and metrics.csv written by
`permtensor train`.  The report path renders learning curves and, when
several channel orders or widths are present, a final-MSE comparison,
saving PNG files next to the delimited summary.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .train import read_metrics


@dataclass
class RunRecord:
    path: Path
    config: dict
    history: list[dict]

    @property
    def label(self) -> str:
        c = self.config
        return f"k={c.get('k')} S={c.get('width')} seed={c.get('seed')}"


def discover_runs(paths) -> list[RunRecord]:
    """Collect run directories from explicit paths or one level below them."""
    runs = []
    for p in sorted(Path(p) for p in paths):
        candidates = [p] + sorted(d for d in p.iterdir() if d.is_dir()) if p.is_dir() else []
        for c in candidates:
            metrics = c / "metrics.csv"
            config = c / "config.json"
            if metrics.is_file() and config.is_file():
                runs.append(
                    RunRecord(c, json.loads(config.read_text()), read_metrics(metrics))
                )
    if not runs:
        raise ValueError("no runs found (need directories with metrics.csv and config.json)")
    return runs


def write_summary(runs: list[RunRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["run", "task", "mode", "k", "width", "seed", "epochs",
             "final_train_mse", "final_test_mse", "final_test_mse_n5", "final_test_mse_n10"]
        )
        for run in runs:
            last = run.history[-1]
            c = run.config
            writer.writerow(
                [run.path.name, c.get("task"), c.get("mode"), c.get("k"),
                 c.get("width"), c.get("seed"), len(run.history),
                 last["train_mse"], last["test_mse"],
                 last["test_mse_n5"], last["test_mse_n10"]]
            )


def render_figures(runs: list[RunRecord], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    by_task: dict[str, list[RunRecord]] = {}
    for run in runs:
        by_task.setdefault(str(run.config.get("task")), []).append(run)

    for task, task_runs in sorted(by_task.items()):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for run in task_runs:
            epochs = [row["epoch"] for row in run.history]
            ax.plot(epochs, [row["train_mse"] for row in run.history],
                    lw=1.2, label=f"{run.label} train")
            ax.plot(epochs, [row["test_mse"] for row in run.history],
                    lw=1.2, ls="--", label=f"{run.label} test")
        ax.set_xlabel("epoch")
        ax.set_ylabel("MSE")
        ax.set_yscale("log")
        ax.set_title(f"learning curves: {task}")
        ax.legend(fontsize=7, ncol=2)
        fig.tight_layout()
        path = out_dir / f"learning_curves_{task}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)

        # final test MSE against channel order, averaged over seeds
        byk: dict[int, list[float]] = {}
        for run in task_runs:
            byk.setdefault(int(run.config.get("k", 0)), []).append(
                run.history[-1]["test_mse"]
            )
        if len(byk) > 1:
            fig, ax = plt.subplots(figsize=(5, 4))
            ks = sorted(byk)
            means = [sum(byk[k]) / len(byk[k]) for k in ks]
            ax.plot(ks, means, "o-")
            for k in ks:
                ax.plot([k] * len(byk[k]), byk[k], "k.", alpha=0.5, ms=4)
            ax.set_xlabel("channel order k")
            ax.set_ylabel("final test MSE")
            ax.set_xticks(ks)
            ax.set_title(f"final test MSE by channel order: {task}")
            fig.tight_layout()
            path = out_dir / f"final_mse_{task}.png"
            fig.savefig(path, dpi=150)
            plt.close(fig)
            written.append(path)
    return written
