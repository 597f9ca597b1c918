"""CSV tables and PNG figures for ``--report DIR``."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def write_csv(path, header: Sequence[str], rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def bar_plot(path, labels: Sequence[str], values: Sequence[float], errors: Sequence[float] | None = None,
             title: str = "", ylabel: str = "") -> Path:
    """One bar per label; error bars when given (zero errors are drawn as none)."""
    fig, ax = plt.subplots(figsize=(max(4.0, 0.35 * len(labels) + 2), 3.5))
    xs = range(len(labels))
    ax.bar(xs, values, yerr=errors, capsize=3 if errors is not None else 0, color="#4c72b0")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=60 if len(labels) > 6 else 0, ha="right" if len(labels) > 6 else "center",
                       fontsize=7)
    ax.axhline(0.0, color="black", lw=0.6)
    ax.set_title(title)
    ax.set_ylabel(ylabel)
    return _save(fig, path)


def scatter_errors(path, values: Sequence[float], errors: Sequence[float], title: str = "") -> Path:
    """Each coefficient against its standard error, with the 3-sigma cone."""
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.scatter(errors, [abs(v) for v in values], s=12)
    top = max(list(errors) + [1e-12])
    ax.plot([0, top], [0, 3 * top], "r--", lw=0.8, label="3 sigma")
    ax.set_xlabel("standard error")
    ax.set_ylabel("|value|")
    ax.set_title(title)
    ax.legend(fontsize=7)
    return _save(fig, path)
