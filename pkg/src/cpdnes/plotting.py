"""Figure rendering for experiment output.

matplotlib is imported lazily so that library users and fast CLI paths never
pay its startup cost; the Agg backend keeps rendering headless-safe.
"""

from __future__ import annotations

from pathlib import Path


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=False)
    import matplotlib.pyplot as plt

    return plt


def _style(ax, xlabel: str, ylabel: str) -> None:
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend()


def convergence_figure(results: dict, path, metric: str = "mse") -> Path:
    """Log-log trial-mean error vs iteration, one line per variant."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, series in results.items():
        values = series.mse_mean if metric == "mse" else series.norm_mean
        ax.loglog(series.k[1:], values[1:], label=name)
    _style(ax, "iteration", "mean squared error" if metric == "mse" else "mean error norm")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def bits_figure(results: dict, path, metric: str = "mse") -> Path:
    """Error against cumulative broadcast bits: the communication picture."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, series in results.items():
        values = series.mse_mean if metric == "mse" else series.norm_mean
        ax.semilogy(series.bits_cum[1:], values[1:], label=name)
    _style(ax, "cumulative bits broadcast", "mean squared error" if metric == "mse" else "mean error norm")
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def privacy_figure(results: dict, path) -> Path | None:
    """Per-round privacy budget for variants that have one; None if none do."""
    import numpy as np

    plotted = {n: s for n, s in results.items() if np.isfinite(s.delta).any()}
    if not plotted:
        return None
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for name, series in plotted.items():
        ax.semilogx(series.k[1:], series.delta[1:], label=name)
    _style(ax, "iteration", "per-round budget delta_k")
    ax.set_ylim(0, 1.05)
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return Path(path)


def render_all(results: dict, directory, stem: str = "experiment", fmt: str = "svg") -> list[Path]:
    """Write the standard figure set next to the delimited output."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = [
        convergence_figure(results, directory / f"{stem}-convergence.{fmt}"),
        bits_figure(results, directory / f"{stem}-bits.{fmt}"),
    ]
    privacy = privacy_figure(results, directory / f"{stem}-privacy.{fmt}")
    if privacy is not None:
        written.append(privacy)
    return written
