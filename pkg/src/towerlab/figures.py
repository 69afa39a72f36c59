"""Figure rendering for the report path.

Delimited output stays the canonical interface; these are the same numbers
drawn for a quick look, written straight to PNG files with the Agg backend
so no display is ever needed.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)


def _finish(fig, ax, path: Path, xlabel: str, ylabel: str, title: str) -> str:
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def series_figure(
    series: dict[str, tuple[list, list]],
    path: str | Path,
    xlabel: str,
    ylabel: str,
    title: str,
    logy: bool = False,
) -> str:
    """One line per labelled (xs, ys) series, markers on data points."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    for label, (xs, ys) in series.items():
        ax.plot(xs, ys, marker="o", label=label)
    if logy:
        ax.set_yscale("log")
    if len(series) > 1 or any(series):
        ax.legend()
    return _finish(fig, ax, Path(path), xlabel, ylabel, title)


def bounds_figure(report, path: str | Path) -> str:
    """Genus and the certified gonality corridor against the level index."""
    levels = [row.level for row in report.rows]
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(levels, [row.genus for row in report.rows], marker="s", label="genus")
    ax.plot(
        levels,
        [row.interval.lower for row in report.rows],
        marker="o",
        label="gonality lower",
    )
    uppers = [(row.level, row.interval.upper) for row in report.rows
              if row.interval.upper is not None]
    if uppers:
        ax.plot(*zip(*uppers), marker="^", linestyle="--", label="gonality upper")
    ax.legend()
    return _finish(fig, ax, Path(path), "level", "value",
                   f"{report.kind} tower bounds")


def spectrum_figure(eigenvalues, label: str, path: str | Path) -> str:
    """Sorted Laplacian spectrum against its index."""
    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    ax.plot(range(len(eigenvalues)), list(eigenvalues),
            marker=".", linestyle="none")
    return _finish(fig, ax, Path(path), "index", "eigenvalue",
                   f"Laplacian spectrum of {label}")
