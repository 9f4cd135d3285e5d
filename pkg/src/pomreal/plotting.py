"""Matplotlib renderings of witnesses: Hasse diagrams and sequence charts."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .pomset import CommLabel, Pomset, _bits  # noqa: E402

LOCAL = "#333333"
CROSS = "#1f77b4"


def _depths(r: Pomset) -> list[int]:
    depth = [0] * len(r)
    for j in r.linear_order():
        depth[j] = max((depth[i] + 1 for i in _bits(r.cover_below[j])), default=0)
    return depth


def plot_pomset(r: Pomset, path, title: str = "") -> Path:
    """Hasse diagram with one column per participant, time flowing downwards."""
    path = Path(path)
    subjects = sorted({l.subject for l in r.labels})
    col = {a: k for k, a in enumerate(subjects)}
    depth = _depths(r)
    # events of one participant at the same depth are spread horizontally
    slots: dict[tuple[str, int], list[int]] = {}
    for i in sorted(range(len(r)), key=lambda i: r.ids[i]):
        slots.setdefault((r.labels[i].subject, depth[i]), []).append(i)
    pos = {}
    for (a, d), evs in slots.items():
        for k, i in enumerate(evs):
            offset = (k - (len(evs) - 1) / 2) * 0.55
            pos[i] = (col[a] * 2.0 + offset, -d)
    width = max(2.5, 2.0 * len(subjects) + 1)
    height = max(2.0, 0.9 * (max(depth, default=0) + 2))
    fig, ax = plt.subplots(figsize=(width, height))
    for a in subjects:
        ax.text(col[a] * 2.0, 0.8, a, ha="center", va="bottom", fontsize=11, fontweight="bold")
    for j in range(len(r)):
        for i in _bits(r.cover_below[j]):
            cross = r.labels[i].subject != r.labels[j].subject
            ax.annotate("", xy=pos[j], xytext=pos[i],
                        arrowprops=dict(arrowstyle="->", color=CROSS if cross else LOCAL,
                                        linestyle="--" if cross else "-", shrinkA=12, shrinkB=12))
    for i, (x, y) in pos.items():
        ax.text(x, y, str(r.labels[i]), ha="center", va="center", fontsize=9,
                bbox=dict(boxstyle="round,pad=0.3", fc="white", ec=LOCAL))
    ax.set_xlim(-1.2, 2.0 * max(len(subjects) - 1, 0) + 1.2)
    ax.set_ylim(-(max(depth, default=0) + 1), 1.4)
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_word(word: Sequence[CommLabel], path, title: str = "") -> Path:
    """Sequence chart of a word; the k-th send on a channel is paired with its k-th receive."""
    path = Path(path)
    parts = sorted({p for l in word for p in l.channel})
    col = {a: k for k, a in enumerate(parts)}
    fig, ax = plt.subplots(figsize=(max(3.0, 1.6 * len(parts)), max(2.0, 0.45 * (len(word) + 2))))
    for a in parts:
        ax.plot([col[a], col[a]], [0.5, -len(word) - 0.5], color="#999999", linewidth=1)
        ax.text(col[a], 0.7, a, ha="center", va="bottom", fontweight="bold")
    sent: dict[tuple, list[int]] = {}
    for t, l in enumerate(word):
        key = (l.sender, l.receiver, l.message)
        y = -t
        ax.plot(col[l.subject], y, "o", color=CROSS if l.is_output else LOCAL, markersize=4)
        ax.text(col[l.subject] + 0.08, y, str(l), fontsize=7, va="center")
        if l.is_output:
            sent.setdefault(key, []).append(t)
        elif sent.get(key):
            t0 = sent[key].pop(0)
            ax.annotate("", xy=(col[l.receiver], y), xytext=(col[l.sender], -t0),
                        arrowprops=dict(arrowstyle="->", color=CROSS))
    ax.set_xlim(-0.5, len(parts) - 0.2)
    ax.set_ylim(-len(word) - 0.6, 1.3)
    ax.axis("off")
    if title:
        ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path
