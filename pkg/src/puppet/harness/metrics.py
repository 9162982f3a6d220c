"""Post-hoc metrics over a demo record, and bit-exact replay verification.

Metrics are always computed from the recorded rows, never inline during a
run, so the record is the single source of truth.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from puppet.errors import ReplayMismatch
from puppet.follower import FollowerGains, FollowerState, follower_tick, ingest_target
from puppet.harness.record import DemoRecord, read_demo
from puppet.kinematics.model import model_from_dict

MAX_LAG_SAMPLES = 100  # +-2 s at the 50Hz record rate


@dataclass(frozen=True)
class Metrics:
    rms_tracking_error: float          # rad, over all joints and rows
    max_joint_error: float             # rad
    lag_estimate_ms: float
    lock_events: int
    lock_causes: dict = field(default_factory=dict)
    ik_failures: int = 0
    velocity_faults: int = 0
    rows: int = 0

    def to_dict(self) -> dict:
        return {
            "rms_tracking_error": self.rms_tracking_error,
            "max_joint_error": self.max_joint_error,
            "lag_estimate_ms": self.lag_estimate_ms,
            "lock_events": self.lock_events,
            "lock_causes": dict(self.lock_causes),
            "ik_failures": self.ik_failures,
            "velocity_faults": self.velocity_faults,
            "rows": self.rows,
        }


def estimate_lag_samples(q_leader: np.ndarray, q_follower: np.ndarray,
                         max_lag: int = MAX_LAG_SAMPLES) -> int:
    """Argmax of the leader/follower cross-correlation, in record samples.

    Positive values mean the follower lags the leader. Constant signals
    give zero; ties resolve toward the smaller magnitude.
    """
    a = q_leader - q_leader.mean(axis=0, keepdims=True)
    b = q_follower - q_follower.mean(axis=0, keepdims=True)
    n = a.shape[0]
    if n < 2 or float(np.sum(a * a)) < 1e-24 or float(np.sum(b * b)) < 1e-24:
        return 0
    k_max = min(max_lag, n - 1)
    best_k, best_score = 0, -np.inf
    for mag in range(0, k_max + 1):
        for k in ((mag,) if mag == 0 else (mag, -mag)):
            if k >= 0:
                x, y = a[: n - k], b[k:]
            else:
                x, y = a[-k:], b[: n + k]
            score = float(np.sum(x * y)) / x.shape[0]
            if score > best_score + 1e-15:
                best_score, best_k = score, k
    return best_k


def _transitions(labels: list[str], into_prefix: str) -> list[int]:
    hits = []
    prev = None
    for i, lab in enumerate(labels):
        if lab.startswith(into_prefix) and (prev is None or not prev.startswith(into_prefix)):
            hits.append(i)
        prev = lab
    return hits


def compute_metrics(record: DemoRecord) -> Metrics:
    rows = record.rows
    if not rows:
        return Metrics(0.0, 0.0, 0.0, 0, {}, 0, 0, 0)
    ql = np.array([r["q_leader"] for r in rows])
    qf = np.array([r["q_follower"] for r in rows])
    err = ql - qf
    rms = float(np.sqrt(np.mean(err**2)))
    max_err = float(np.max(np.abs(err)))

    times = np.array([r["t"] for r in rows])
    record_dt = float(np.median(np.diff(times))) if len(times) > 1 else 0.02
    lag_ms = estimate_lag_samples(ql, qf) * record_dt * 1000.0

    gate_labels = [r["gate_mode"] for r in rows]
    lock_rows = _transitions(gate_labels, "locked")
    causes: dict[str, int] = {}
    for i in lock_rows:
        cause = gate_labels[i].split(":", 1)[1] if ":" in gate_labels[i] else "unknown"
        causes[cause] = causes.get(cause, 0) + 1

    grasp_labels = [r["grasp_phase"] for r in rows]
    ik_failures = len(_transitions(grasp_labels, "faulted:ik_failure"))
    velocity_faults = len(_transitions(grasp_labels, "faulted:velocity_limit"))

    return Metrics(
        rms_tracking_error=rms,
        max_joint_error=max_err,
        lag_estimate_ms=lag_ms,
        lock_events=len(lock_rows),
        lock_causes=causes,
        ik_failures=ik_failures,
        velocity_faults=velocity_faults,
        rows=len(rows),
    )


def replay(record_or_path) -> Metrics:
    """Re-simulate the follower from the recorded target stream and verify
    every recorded follower state bit for bit; returns the record metrics.

    Raises ReplayMismatch naming the first divergent row and field.
    """
    record = record_or_path if isinstance(record_or_path, DemoRecord) else read_demo(record_or_path)
    header = record.header
    model = model_from_dict(header["model"], "header.model")
    gains = FollowerGains(np.array(header["k_p"]), np.array(header["k_d"]))
    dt = header["control_dt"]
    period = header["target_period"]
    follower = FollowerState.at_rest(model, q0=np.array(header["q0"]), alpha=header["alpha"])

    freeze_times = sorted(
        f["t"] for f in header.get("faults", []) if f["kind"] == "freeze_follower"
    )
    frozen = False
    seq = 0
    tick = 0
    for idx, row in enumerate(record.rows):
        if row["q_sent"] is not None:
            follower = ingest_target(follower, seq, np.array(row["q_sent"]))
            seq += 1
        got = follower.q.tolist()
        if got != row["q_follower"]:
            j = next(k for k in range(len(got)) if got[k] != row["q_follower"][k])
            raise ReplayMismatch(
                idx, "q_follower", f"joint {j}: recomputed {got[j]!r} vs recorded {row['q_follower'][j]!r}"
            )
        got_tilde = follower.filter.q_tilde.tolist()
        if got_tilde != row["q_tilde"]:
            j = next(k for k in range(len(got_tilde)) if got_tilde[k] != row["q_tilde"][k])
            raise ReplayMismatch(
                idx, "q_tilde", f"joint {j}: recomputed {got_tilde[j]!r} vs recorded {row['q_tilde'][j]!r}"
            )
        for _ in range(period):
            t = tick * dt
            if freeze_times and t >= freeze_times[0]:
                frozen = True
            if not frozen:
                follower = follower_tick(follower, model, gains, dt)
            tick += 1
    return compute_metrics(record)
