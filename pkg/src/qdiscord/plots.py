"""Figure rendering for the report-style CLI outputs.

Figures are written to files next to the delimited output; matplotlib is
imported lazily with the Agg backend so the library never needs a display.
"""

from __future__ import annotations

import math

from .scan import ProfileRow, ScanRecord


def _pyplot():
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    return plt


def save_profile_figure(rows: list[ProfileRow], path: str, title: str = "") -> None:
    """Discord vs angular step size for m = 2, 3, 4, with running minima."""
    plt = _pyplot()
    steps = [r.step / math.pi for r in rows]
    fig, (ax, axr) = plt.subplots(1, 2, figsize=(9.0, 3.6))
    series = [
        ("delta2", "run2", "k", r"$\delta_2$"),
        ("delta3", "run3", "tab:red", r"$\delta_3$"),
        ("delta4", "run4", "tab:orange", r"$\delta_4$"),
    ]
    for raw_attr, run_attr, color, label in series:
        raw = [getattr(r, raw_attr) for r in rows]
        run = [getattr(r, run_attr) for r in rows]
        ax.plot(steps, raw, marker="o", ms=3.5, color=color, label=label)
        axr.plot(steps, run, marker="s", ms=3.5, color=color, label=label)
    for a, name in ((ax, "grid value"), (axr, "running minimum")):
        a.set_xlabel(r"step size / $\pi$")
        a.invert_xaxis()
        a.set_title(name, fontsize=10)
        a.grid(alpha=0.3)
    ax.set_ylabel("discord (bits)")
    ax.legend(fontsize=9)
    if title:
        fig.suptitle(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)


def save_scan_figure(records: list[ScanRecord], path: str, threshold: float) -> None:
    """Positive deviations delta2 - delta_{3,4} against delta2, log scale."""
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(5.4, 3.8))
    for attr, color, label in (
        ("dev3", "tab:blue", r"$\delta_2-\delta_3$"),
        ("dev4", "tab:red", r"$\delta_2-\delta_4$"),
    ):
        xs = [r.delta2 for r in records if getattr(r, attr) > 0.0]
        ys = [getattr(r, attr) for r in records if getattr(r, attr) > 0.0]
        ax.scatter(xs, ys, s=14, color=color, label=label, alpha=0.8)
    ax.axhline(threshold, color="gray", lw=0.8, ls="--", label="threshold")
    ax.set_yscale("log")
    ax.set_xlabel(r"$\delta_2$ (bits)")
    ax.set_ylabel("deviation (bits)")
    ax.legend(fontsize=9)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=160)
    plt.close(fig)
