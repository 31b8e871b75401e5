"""Figure rendering for evaluation reports.

Headless by design: the Agg backend is forced before pyplot is imported, so
rendering works in batch jobs and containers without a display.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .evaluation import EvalReport


def _draw_folds(ax, report: EvalReport, kind: str) -> None:
    for fr in report.per_fold:
        points = fr.roc if kind == "roc" else fr.pr
        xs = [p[1] for p in points]
        ys = [p[2] for p in points]
        ax.plot(xs, ys, color="tab:blue", alpha=0.35, linewidth=0.9)


def render_roc(report: EvalReport, path: str) -> str:
    """Overlay every fold's ROC curve; the title carries the mean area."""
    fig, ax = plt.subplots(figsize=(5, 5))
    _draw_folds(ax, report, "roc")
    ax.plot([0, 1], [0, 1], color="gray", linestyle="--", linewidth=0.8)
    ax.set_xlabel("false positive rate")
    ax.set_ylabel("true positive rate")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_title(f"ROC, mean area {report.mean.auroc:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def render_pr(report: EvalReport, path: str) -> str:
    """Overlay every fold's precision-recall curve."""
    fig, ax = plt.subplots(figsize=(5, 5))
    _draw_folds(ax, report, "pr")
    ax.set_xlabel("recall")
    ax.set_ylabel("precision")
    ax.set_xlim(0, 1)
    ax.set_ylim(0, 1.02)
    ax.set_title(f"precision-recall, mean area {report.mean.aupr:.4f}")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
