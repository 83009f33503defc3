"""Figure rendering for the CLI report path.

Each table-emitting command can drop a matplotlib figure next to its
delimited output. Everything renders to files (Agg backend); nothing is
interactive.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

__all__ = [
    "plot_beta_threshold",
    "plot_capacity",
    "plot_keyrate",
    "plot_performance",
]

_FIGSIZE = (6.4, 4.2)


def _finish(fig, ax, path: str, xlabel: str, ylabel: str, title: str) -> None:
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    if ax.get_legend_handles_labels()[0]:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_capacity(doc, path: str) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    ax.plot(doc.column("snr"), doc.column("capacity"),
            label=doc.config.get("which", "capacity"))
    ax.set_xscale("log")
    _finish(fig, ax, path, "SNR", "bits per channel use", "Channel capacity")


def plot_beta_threshold(doc, path: str) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    va = [v for v, st in zip(doc.column("v_a"), doc.column("status")) if st == "ok"]
    rb = [b for b, st in zip(doc.column("required_beta"), doc.column("status")) if st == "ok"]
    ax.plot(va, rb)
    ax.axhline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xscale("log")
    _finish(fig, ax, path, "modulation variance $V_A$",
            r"required efficiency $\beta$", "Efficiency needed for a positive key")


def plot_performance(doc, path: str) -> None:
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    s = doc.column("snr")
    ax.semilogy(s, [max(w, 1e-12) for w in doc.column("wer")], "o-", label="WER")
    ax.semilogy(s, [max(b, 1e-12) for b in doc.column("ber")], "s--", label="BER")
    _finish(fig, ax, path, "SNR", "error rate", "Code performance")


def plot_keyrate(docs, path: str) -> None:
    """Key rate vs distance; one curve per table (model name in the legend)."""
    fig, ax = plt.subplots(figsize=_FIGSIZE)
    for doc in docs:
        models = set(doc.column("model"))
        label = ",".join(sorted(str(m) for m in models))
        d = doc.column("distance_km")
        y = doc.column("keyrate_clamped")
        ax.semilogy([di for di, yi in zip(d, y) if yi and yi > 0],
                    [yi for yi in y if yi and yi > 0], label=label)
    _finish(fig, ax, path, "distance (km)", "key rate (bits/symbol)",
            "Secret key rate vs distance")
