"""Figure rendering for sweep results."""

from __future__ import annotations

from typing import List, Optional

from .montecarlo import SweepResult

AXIS_LABELS = {
    "K1": "smallest key ring size $K_1$",
    "alpha_diag": r"diagonal channel probability $\alpha$",
}


def render_sweep_figure(
    rows: List[SweepResult], out_path: str, title: Optional[str] = None
) -> str:
    """Plot both empirical probability curves with their confidence intervals.

    The predicted threshold row, when present, is marked by a vertical
    dashed line.  Returns the path written.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    xs = [row.sweep_value for row in rows]
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for attr, ci_attr, label, marker in (
        ("p_connected", "p_connected_ci", "connected", "o"),
        ("p_no_isolated", "p_no_isolated_ci", "no isolated node", "s"),
    ):
        ps = [getattr(row, attr) for row in rows]
        lo = [p - getattr(row, ci_attr)[0] for row, p in zip(rows, ps)]
        hi = [getattr(row, ci_attr)[1] - p for row, p in zip(rows, ps)]
        ax.errorbar(
            xs, ps, yerr=[lo, hi], marker=marker, markersize=3.5,
            linewidth=1.0, capsize=2, label=label,
        )
    for row in rows:
        if row.is_predicted_threshold:
            ax.axvline(row.sweep_value, linestyle="--", color="k", linewidth=1.0,
                       label="predicted threshold")
            break
    axis = rows[0].sweep_axis if rows else ""
    ax.set_xlabel(AXIS_LABELS.get(axis, axis))
    ax.set_ylabel("empirical probability")
    ax.set_ylim(-0.03, 1.03)
    ax.grid(True, alpha=0.4)
    ax.legend(loc="best")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path
