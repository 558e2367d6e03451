"""Matplotlib figures rendered from a :class:`ReportBundle`."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from ..experiment.runner import Condition  # noqa: E402

# PNG metadata otherwise records the matplotlib version; dropping it keeps
# figures byte-identical across reruns on one install.
_PNG_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=110, metadata=_PNG_META)
    plt.close(fig)
    return path


def trajectory_figure(bundle, path: Path) -> Path:
    """Mean maximum ToM level per hand bin, one line per condition."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for cond in [c.value for c in Condition]:
        pts = [t for t in bundle.trajectory if t["condition"] == cond]
        if not pts:
            continue
        x = np.array([t["hand_bin"] for t in pts])
        m = np.array([t["mean"] for t in pts])
        sd = np.array([t["sd"] for t in pts])
        ax.plot(x, m, marker="o", markersize=3, label=cond)
        ax.fill_between(x, m - sd, m + sd, alpha=0.15)
    ax.set_xlabel("hand (end of bin)")
    ax.set_ylabel("max ToM level")
    ax.set_ylim(-0.2, 5.2)
    ax.legend(loc="lower right")
    ax.set_title("ToM level over the session")
    fig.tight_layout()
    return _save(fig, path)


def player_stats_figure(bundle, path: Path) -> Path:
    """VPIP, PFR and aggression factor by condition (means over agents)."""
    conds = [c.value for c in Condition if any(r["condition"] == c.value for r in bundle.player_rows)]
    fig, axes = plt.subplots(1, 3, figsize=(10, 3.5))
    for ax, key in zip(axes, ("vpip", "pfr", "af")):
        means = []
        for cond in conds:
            vals = [r[key] for r in bundle.player_rows if r["condition"] == cond and r[key] != "inf"]
            means.append(float(np.mean(vals)) if vals else 0.0)
        ax.bar(conds, means, color="0.55")
        ax.set_title(key.upper())
        ax.tick_params(axis="x", rotation=30)
    fig.tight_layout()
    return _save(fig, path)


def deception_figure(bundle, path: Path) -> Path:
    """Tier-1 and Tier-2 hand rates by condition."""
    conds = [t["condition"] for t in bundle.table2]
    x = np.arange(len(conds))
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for i, tier in enumerate((1, 2)):
        means = [t[f"tier{tier}_mean"] or 0.0 for t in bundle.table2]
        sds = [t[f"tier{tier}_sd"] or 0.0 for t in bundle.table2]
        ax.bar(x + (i - 0.5) * 0.38, means, 0.38, yerr=sds, capsize=3, label=f"Tier {tier}")
    ax.set_xticks(x, conds)
    ax.set_ylabel("share of hands")
    ax.legend()
    fig.tight_layout()
    return _save(fig, path)


def render_figures(bundle, out_dir: Path | str) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return [
        trajectory_figure(bundle, out / "trajectory.png"),
        player_stats_figure(bundle, out / "player_stats.png"),
        deception_figure(bundle, out / "deception.png"),
    ]
