"""Matplotlib figure emission for the report paths.

Every figure is written as static SVG next to its delimited table.
Rendering is pinned to the Agg backend with a fixed svg hashsalt and no
embedded creation date, so identical inputs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "featgan"

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_DOMAIN_COLORS = {"real": "#1f77b4", "synthetic": "#d62728"}
_SAVE_KW = {"format": "svg", "metadata": {"Date": None}}


def save_scatter(points: np.ndarray, domains, path, title: str = "") -> None:
    """2-d scatter colored by domain tag."""
    points = np.asarray(points)
    domains = np.asarray(domains)
    fig, ax = plt.subplots(figsize=(6, 5))
    for domain in sorted(set(domains.tolist())):
        mask = domains == domain
        ax.scatter(points[mask, 0], points[mask, 1], s=8, alpha=0.6,
                   label=domain, color=_DOMAIN_COLORS.get(domain))
    ax.set_xlabel("component 1")
    ax.set_ylabel("component 2")
    if title:
        ax.set_title(title)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_history(history: list[dict], path, title: str = "training loss") -> None:
    """Per-epoch loss curves; one line per recorded term."""
    if not history:
        return
    epochs = [h["epoch"] for h in history]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for key in history[0]:
        if key == "epoch":
            continue
        ax.plot(epochs, [h[key] for h in history], label=key, linewidth=1.2)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_title(title)
    ax.legend(fontsize=7, ncol=3)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_confusion(confusion: np.ndarray, classes, path) -> None:
    """Confusion-matrix heatmap, rows true, cols predicted."""
    fig, ax = plt.subplots(figsize=(6.5, 5.5))
    im = ax.imshow(confusion, cmap="Blues")
    ax.set_xticks(range(len(classes)), classes, rotation=45, ha="right",
                  fontsize=7)
    ax.set_yticks(range(len(classes)), classes, fontsize=7)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_accuracy_bars(names, means, stds, path,
                       title: str = "accuracy over seeds") -> None:
    """Bar chart with error bars for the multi-seed report."""
    fig, ax = plt.subplots(figsize=(6, 4))
    x = np.arange(len(names))
    ax.bar(x, means, yerr=stds, capsize=4, color="#1f77b4", alpha=0.8)
    ax.set_xticks(x, names, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel("accuracy")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
