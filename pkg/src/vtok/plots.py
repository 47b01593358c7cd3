"""Figure rendering for the CLI report paths (headless, PNG output)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .budget import CostRow


def save_cost_figure(rows: list[CostRow], path: str | Path) -> None:
    """Max frames vs tokens-per-frame, one line per budget."""
    by_budget: dict[int, list[CostRow]] = {}
    for row in rows:
        by_budget.setdefault(row.n_max, []).append(row)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for n_max in sorted(by_budget, reverse=True):
        budget_rows = sorted(by_budget[n_max], key=lambda r: r.tokens_per_frame)
        ax.plot(
            [r.tokens_per_frame for r in budget_rows],
            [r.max_frames for r in budget_rows],
            marker="o",
            label=f"budget {n_max:,}",
        )
    ax.set_xlabel("tokens per frame")
    ax.set_ylabel("max frames")
    ax.set_title("Frame capacity under visual-token budgets")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_pipeline_figure(report, path: str | Path) -> None:
    """Kept-per-category bars next to per-stage drop bars."""
    fig, (ax_cat, ax_drop) = plt.subplots(1, 2, figsize=(9.0, 4.0))

    categories = sorted(report.category_counts)
    ax_cat.bar(categories, [report.category_counts[c] for c in categories], color="#4c72b0")
    ax_cat.set_title(f"Kept records ({report.kept_count})")
    ax_cat.set_ylabel("records")
    ax_cat.tick_params(axis="x", rotation=30)

    drops = [
        ("dedup", report.dedup_dropped),
        ("downsample", report.downsample_dropped),
        *((f"filter:{reason}", count) for reason, count in sorted(report.drop_counts.items())),
    ]
    ax_drop.bar([d[0] for d in drops], [d[1] for d in drops], color="#c44e52")
    ax_drop.set_title("Dropped per stage")
    ax_drop.tick_params(axis="x", rotation=30)

    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
