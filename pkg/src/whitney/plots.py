"""Figure rendering for the report path.

Every figure is written next to its CSV with deterministic bytes: the Agg
backend, a fixed style, and scrubbed PNG metadata (no software/version tag),
so repeated runs with one seed produce identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .harness import ExperimentReport, fit_loglog_slope

_SAVE_KW = dict(dpi=150, metadata={"Software": None})


def growth_figure(report: ExperimentReport, path: str) -> None:
    """log-log probe sup versus dimension, one curve per operator/probe kind."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    styles = {
        ("classical", "corner"): dict(color="#b2182b", marker="s", ls="-"),
        ("classical", "interior"): dict(color="#ef8a62", marker="s", ls="--"),
        ("averaged", "corner"): dict(color="#2166ac", marker="o", ls="-"),
        ("averaged", "interior"): dict(color="#67a9cf", marker="o", ls="--"),
    }
    for (op, kind), style in styles.items():
        ns, sups = report.curve(op, kind)
        if len(ns) < 2 or not np.all(sups > 0):
            continue
        slope = fit_loglog_slope(ns, sups)
        ax.loglog(ns, sups, label=f"{op} / {kind} (slope {slope:.2f})", **style)
    ax.set_xlabel("dimension n")
    ax.set_ylabel(r"probe sup of $|\partial^\alpha F|$")
    ax.set_title("operator growth across dimension")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def restriction_figure(report: ExperimentReport, path: str) -> None:
    """log-log restriction norm versus dimension with its fitted power law."""
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ns, sups = report.curve("restriction")
    if len(ns) >= 2 and np.all(sups > 0):
        slope = fit_loglog_slope(ns, sups)
        ax.loglog(ns, sups, "o-", color="#1b7837", label=f"data (slope {slope:.2f})")
        fit = sups[0] * (ns / ns[0]) ** slope
        ax.loglog(ns, fit, ":", color="gray", label="power-law fit")
    ax.set_xlabel("dimension n")
    ax.set_ylabel("restriction norm")
    ax.set_title("restriction norm across dimension")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def curve_data_files(report: ExperimentReport, stem: str) -> list[str]:
    """Two-column (n, sup) text files per curve, gnuplot-friendly."""
    written = []
    for op in ("classical", "averaged", "restriction"):
        kinds = {r.probe_kind for r in report.rows if r.operator == op}
        for kind in sorted(kinds):
            ns, sups = report.curve(op, kind if op != "restriction" else None)
            if len(ns) == 0:
                continue
            path = f"{stem}_{op}_{kind}.dat"
            with open(path, "w") as fh:
                for n, s in zip(ns, sups):
                    fh.write(f"{n:g} {s!r}\n")
            written.append(path)
            if op == "restriction":
                break
    return written
