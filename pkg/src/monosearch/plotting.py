"""Figures for run reports (matplotlib, file output only)."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_series(report: dict, path: Path) -> Path | None:
    """Pending messages, temporary edges, sorted-list edges and components
    over steps for one run recorded with ``record_series``."""
    series = report.get("series") or {}
    panels = [k for k in ("pending", "temporary", "list-edges", "components", "phi") if series.get(k)]
    if not panels:
        return None
    fig, axes = plt.subplots(len(panels), 1, figsize=(7, 1.9 * len(panels)), sharex=True)
    if len(panels) == 1:
        axes = [axes]
    for ax, key in zip(axes, panels):
        xs, ys = zip(*series[key])
        ax.step(xs, ys, where="post", lw=1.1)
        ax.set_ylabel(key)
        conv = report.get("converged_step")
        if conv is not None:
            ax.axvline(conv, color="tab:green", ls="--", lw=0.8)
    axes[-1].set_xlabel("step")
    cfg = report.get("config", {})
    axes[0].set_title(f"seed {cfg.get('seed')}  n={cfg.get('n')}  mode={cfg.get('mode')}")
    return _save(fig, path)


def plot_convergence(reports: Sequence[dict], path: Path) -> Path | None:
    by_n: dict[int, list[int]] = {}
    for r in reports:
        if r.get("converged_step") is not None:
            by_n.setdefault(r["config"]["n"], []).append(r["converged_step"])
    if not by_n:
        return None
    ns = sorted(by_n)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.boxplot([by_n[n] for n in ns])
    ax.set_xticks(range(1, len(ns) + 1), [str(n) for n in ns])
    ax.set_xlabel("n")
    ax.set_ylabel("steps to legitimacy")
    ax.set_yscale("log")
    return _save(fig, path)


def plot_outcomes(reports: Sequence[dict], path: Path) -> Path | None:
    rows = [(i, r.get("ledger") or {}) for i, r in enumerate(reports)]
    rows = [(i, l) for i, l in rows if l.get("initiated")]
    if not rows:
        return None
    fig, ax = plt.subplots(figsize=(max(5, 0.12 * len(rows) + 2), 3.2))
    xs = [i for i, _ in rows]
    succ = [l.get("success", 0) for _, l in rows]
    fail = [l.get("fail", 0) for _, l in rows]
    unres = [l.get("unresolved", 0) for _, l in rows]
    ax.bar(xs, succ, color="tab:green", label="success")
    ax.bar(xs, fail, bottom=succ, color="tab:red", label="fail")
    ax.bar(xs, unres, bottom=[a + b for a, b in zip(succ, fail)], color="tab:gray", label="unresolved")
    bad = [i for i, r in enumerate(reports) if r.get("monotone_pairs")]
    for i in bad:
        ax.annotate("x", (i, 0), ha="center", va="top", color="black")
    ax.set_xlabel("run")
    ax.set_ylabel("searches")
    ax.legend(fontsize=8)
    return _save(fig, path)


def plot_violations(reports: Sequence[dict], path: Path) -> Path | None:
    counts: dict[str, int] = {}
    for r in reports:
        for k in r.get("violated", []):
            counts[k] = counts.get(k, 0) + 1
    fig, ax = plt.subplots(figsize=(6, 3.2))
    if counts:
        keys = sorted(counts)
        ax.bar(keys, [counts[k] for k in keys], color="tab:orange")
        ax.tick_params(axis="x", rotation=45)
    else:
        ax.text(0.5, 0.5, "no violations", ha="center", va="center", transform=ax.transAxes)
    ax.set_ylabel("runs with violation")
    ax.set_title(f"{len(reports)} runs")
    return _save(fig, path)


def render_all(reports: Sequence[dict], out_dir: Path) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    made = [
        plot_convergence(reports, out_dir / "convergence.png"),
        plot_outcomes(reports, out_dir / "outcomes.png"),
        plot_violations(reports, out_dir / "violations.png"),
    ]
    for i, r in enumerate(reports):
        if r.get("series"):
            made.append(plot_series(r, out_dir / f"series-{i:03d}.png"))
    return [p for p in made if p is not None]
