"""Histogram figures written next to the text outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .circuit import BitString  # noqa: E402
from .distribution import OutcomeDistribution  # noqa: E402

# past this many outcomes the x tick labels are dropped
MAX_LABELLED = 64


def _labels(k: int) -> list[str]:
    return [str(BitString.from_int(i, k)) for i in range(1 << k)]


def plot_distribution(
    dist: OutcomeDistribution,
    path: str | Path,
    title: str | None = None,
    reference: OutcomeDistribution | None = None,
    reference_label: str = "reference",
    label: str = "probability",
) -> Path:
    """Bar chart of ``dist``; ``reference`` is overlaid as markers when given."""
    path = Path(path)
    size = 1 << dist.k
    x = np.arange(size)
    width = max(6.0, min(16.0, 0.35 * size))
    fig, ax = plt.subplots(figsize=(width, 4.0), dpi=100)
    ax.bar(x, dist.probs, width=0.8, color="#4c72b0", label=label)
    if reference is not None:
        ax.plot(x, reference.probs, "o", color="#dd8452", markersize=4, label=reference_label)
        ax.legend(frameon=False)
    if size <= MAX_LABELLED:
        ax.set_xticks(x)
        ax.set_xticklabels(_labels(dist.k), rotation=90, fontsize=8, family="monospace")
    else:
        ax.set_xlabel("outcome index (big-endian)")
    ax.set_ylabel("probability")
    ax.set_xlim(-0.6, size - 0.4)
    ax.set_ylim(0.0, max(1e-9, float(dist.probs.max()), float(reference.probs.max()) if reference else 0.0) * 1.1)
    if title:
        ax.set_title(title)
    ax.spines["top"].set_visible(False)
    ax.spines["right"].set_visible(False)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None} if path.suffix.lower() == ".png" else None)
    plt.close(fig)
    return path


def plot_truth_table(
    truth_table: tuple[int, ...],
    event_probabilities: tuple[float, ...],
    n_inputs: int,
    path: str | Path,
    title: str | None = None,
) -> Path:
    """Gadget summary: output bit and conditioning probability per input."""
    path = Path(path)
    labels = _labels(n_inputs)
    x = np.arange(len(labels))
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(8.0, 3.2), dpi=100)
    ax0.bar(x, truth_table, color="#55a868")
    ax0.set_ylim(0, 1.15)
    ax0.set_yticks([0, 1])
    ax0.set_title("post-selected output")
    ax1.bar(x, event_probabilities, color="#c44e52")
    ax1.set_title("event probability")
    for ax in (ax0, ax1):
        ax.set_xticks(x)
        ax.set_xticklabels(labels, family="monospace")
        ax.set_xlabel("input x")
        ax.spines["top"].set_visible(False)
        ax.spines["right"].set_visible(False)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Software": None} if path.suffix.lower() == ".png" else None)
    plt.close(fig)
    return path
