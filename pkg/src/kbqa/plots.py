"""Figures written next to the CSV reports."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# no timestamps or version strings, so reruns give identical files
_META = {"Software": None}


def figure_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".png")


def _save(fig, path) -> Path:
    path = Path(path)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def plot_beam(rows, path) -> Path:
    finite = [r for r in rows if r.beam_size is not None]
    ks = [r.beam_size for r in finite]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [r.recall for r in finite], "o-", label="recall")
    ax.plot(ks, [r.reduction for r in finite], "s--", label="path reduction")
    ax.set_xscale("log", base=2)
    ax.set_xticks(ks)
    ax.set_xticklabels([str(k) for k in ks])
    ax.set_xlabel("beam size K")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("ratio")
    ax2 = ax.twinx()
    ax2.plot(ks, [r.avg_paths for r in finite], "^:", color="tab:gray", label="avg paths")
    ax2.set_ylabel("avg candidate paths")
    lines = ax.get_lines() + ax2.get_lines()
    ax.legend(lines, [ln.get_label() for ln in lines], loc="center right")
    return _save(fig, path)


def plot_losses(traces: dict[str, Sequence[float]], path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    for name, losses in traces.items():
        ax.plot(range(1, len(losses) + 1), losses, marker=".", label=name)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean perceptron loss")
    if len(traces) > 1:
        ax.legend()
    return _save(fig, path)


def plot_ablation(rows, path) -> Path:
    names = [r.variant for r in rows]
    x = range(len(rows))
    fig, ax = plt.subplots(figsize=(7, 4))
    w = 0.38
    ax.bar([i - w / 2 for i in x], [r.one_entity for r in rows], w, label="one-entity")
    ax.bar([i + w / 2 for i in x], [r.multi_entity for r in rows], w, label="multi-entity")
    ax.set_xticks(list(x))
    ax.set_xticklabels(names)
    ax.set_ylabel("linking recall")
    ax.set_ylim(0, 1.05)
    ax.legend()
    return _save(fig, path)


def plot_mixing(rows, path) -> Path:
    labels = [f"{r.real_fraction:g} + {r.synth_count}" for r in rows]
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.bar(range(len(rows)), [r.accuracy for r in rows])
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_xlabel("real fraction + synthetic count")
    ax.set_ylabel("held-out accuracy")
    ax.set_ylim(0, 1.05)
    return _save(fig, path)


def plot_f1(report, path) -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist([r.f1 for r in report.rows], bins=[i / 10 for i in range(11)], edgecolor="black")
    ax.set_xlabel("per-question F1")
    ax.set_ylabel("questions")
    ax.set_title(f"avg F1 = {report.avg_f1:.4f}")
    return _save(fig, path)
