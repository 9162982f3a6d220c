"""Rendered reports for a demo record: metrics JSON, a per-joint CSV
summary, and matplotlib figures written next to them.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from puppet.harness.metrics import Metrics, compute_metrics
from puppet.harness.record import DemoRecord


def write_report(record: DemoRecord, out_dir: str | Path,
                 metrics: Metrics | None = None) -> dict:
    """Write metrics.json, summary.csv and figures into out_dir.

    Returns a manifest of the files written.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    metrics = metrics if metrics is not None else compute_metrics(record)

    t = np.array([r["t"] for r in record.rows])
    ql = np.array([r["q_leader"] for r in record.rows])
    qf = np.array([r["q_follower"] for r in record.rows])
    qt = np.array([r["q_tilde"] for r in record.rows])
    dof = ql.shape[1] if ql.ndim == 2 else 0

    (out / "metrics.json").write_text(json.dumps(metrics.to_dict(), indent=2) + "\n")

    with (out / "summary.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["joint", "rms_error_rad", "max_error_rad", "leader_range_rad"])
        for j in range(dof):
            err = ql[:, j] - qf[:, j]
            w.writerow(
                [
                    j,
                    f"{np.sqrt(np.mean(err ** 2)):.9g}",
                    f"{np.max(np.abs(err)):.9g}",
                    f"{ql[:, j].max() - ql[:, j].min():.9g}",
                ]
            )

    files = {
        "metrics": str(out / "metrics.json"),
        "summary": str(out / "summary.csv"),
    }
    if dof and len(t) > 1:
        files["tracking"] = str(_tracking_figure(out, t, ql, qf, qt))
        files["error"] = str(_error_figure(out, t, ql, qf, record))
    return files


def _tracking_figure(out: Path, t, ql, qf, qt) -> Path:
    dof = ql.shape[1]
    ncols = 2
    nrows = (dof + ncols - 1) // ncols
    fig, axes = plt.subplots(nrows, ncols, figsize=(10, 2.2 * nrows), sharex=True)
    axes = np.atleast_1d(axes).ravel()
    for j in range(dof):
        ax = axes[j]
        ax.plot(t, ql[:, j], label="leader", lw=1.2)
        ax.plot(t, qf[:, j], label="follower", lw=1.0)
        ax.plot(t, qt[:, j], label="filtered target", lw=0.8, ls="--")
        ax.set_ylabel(f"q{j} [rad]")
        ax.grid(True, alpha=0.3)
    for ax in axes[dof:]:
        ax.set_visible(False)
    axes[0].legend(loc="upper right", fontsize=8)
    axes[min(dof, len(axes)) - 1].set_xlabel("t [s]")
    fig.suptitle("Leader vs follower joint trajectories")
    fig.tight_layout()
    path = out / "fig_tracking.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _error_figure(out: Path, t, ql, qf, record: DemoRecord) -> Path:
    err = np.abs(ql - qf)
    fig, ax = plt.subplots(figsize=(10, 4))
    for j in range(err.shape[1]):
        ax.plot(t, err[:, j], lw=0.9, label=f"q{j}")
    ax.axhline(0.2, color="red", ls="--", lw=1.0, label="divergence threshold")
    locked = [i for i, r in enumerate(record.rows) if r["gate_mode"].startswith("locked")]
    if locked:
        first = locked[0]
        ax.axvline(t[first], color="black", ls=":", lw=1.0, label="first lock")
    ax.set_xlabel("t [s]")
    ax.set_ylabel("|leader - follower| [rad]")
    ax.set_title("Per-joint tracking error")
    ax.grid(True, alpha=0.3)
    ax.legend(loc="upper left", fontsize=8, ncol=3)
    fig.tight_layout()
    path = out / "fig_error.png"
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path
