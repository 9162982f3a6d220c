"""Leader-follower streaming interlock.

Targets only flow while the gate is streaming. It locks when any joint
diverges past the threshold (strictly greater than 0.2 rad by default),
when feedback heartbeats stop for longer than the timeout, or when a
simulation fault is reported. A lock is absorbing: only realignment
(snapping the leader onto the follower) restores streaming. The overlay
color shown to the operator is green exactly when streaming and red
exactly when locked, derived from the mode so the two can never disagree.

Every lock/unlock/realign transition is appended to an event log that can
be flushed as JSON lines.
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from puppet.errors import ContractViolation
from puppet.leader import LeaderState, Grasp

DEFAULT_DIVERGENCE_THRESHOLD = 0.2   # rad
DEFAULT_TIMEOUT = 0.2                # s (10 missed 50Hz messages)


class LockCause(enum.Enum):
    DIVERGENCE = "divergence"
    TIMEOUT = "timeout"
    LEADER_FAULT = "leader_fault"
    FOLLOWER_FAULT = "follower_fault"


@dataclass(frozen=True)
class Divergence:
    """First joint whose leader/follower difference exceeds the threshold."""

    joint: int
    delta: float


def divergence_check(
    q_leader: np.ndarray,
    q_follower: np.ndarray,
    threshold: float = DEFAULT_DIVERGENCE_THRESHOLD,
) -> Divergence | None:
    """Returns the first diverged joint, or None when aligned.

    The comparison is strict: a delta of exactly the threshold is aligned.
    """
    if threshold <= 0:
        raise ContractViolation("threshold must be > 0")
    a = np.asarray(q_leader, dtype=float)
    b = np.asarray(q_follower, dtype=float)
    if a.shape != b.shape:
        raise ContractViolation("config length mismatch in divergence_check")
    deltas = np.abs(a - b)
    over = np.nonzero(deltas > threshold)[0]
    if over.size == 0:
        return None
    j = int(over[0])
    return Divergence(j, float(deltas[j]))


class GateMode(enum.Enum):
    STREAMING = "streaming"
    LOCKED = "locked"


@dataclass(frozen=True)
class GateState:
    mode: GateMode = GateMode.STREAMING
    cause: LockCause | None = None
    detail: Divergence | None = None
    last_heartbeat: float = 0.0
    divergence_threshold: float = DEFAULT_DIVERGENCE_THRESHOLD
    timeout: float = DEFAULT_TIMEOUT

    @property
    def overlay(self) -> str:
        return "green" if self.mode is GateMode.STREAMING else "red"

    def label(self) -> str:
        if self.mode is GateMode.STREAMING:
            return "streaming"
        return f"locked:{self.cause.value}"


def heartbeat(state: GateState, now: float) -> GateState:
    """Feedback from the follower arrived; refresh the watchdog."""
    return replace(state, last_heartbeat=now)


def gate(
    state: GateState,
    q_leader: np.ndarray,
    q_follower: np.ndarray,
    now: float,
) -> tuple[GateState, bool]:
    """One pre-send check. Returns (new state, forward?).

    Locked is absorbing; a streaming gate locks on divergence first, then
    on heartbeat timeout.
    """
    if state.mode is GateMode.LOCKED:
        return state, False
    diverged = divergence_check(q_leader, q_follower, state.divergence_threshold)
    if diverged is not None:
        locked = replace(state, mode=GateMode.LOCKED, cause=LockCause.DIVERGENCE, detail=diverged)
        return locked, False
    if now - state.last_heartbeat > state.timeout:
        locked = replace(state, mode=GateMode.LOCKED, cause=LockCause.TIMEOUT, detail=None)
        return locked, False
    return state, True


def realign(
    state: GateState, leader: LeaderState, q_follower: np.ndarray
) -> tuple[GateState, LeaderState]:
    """Reset the leader onto the follower and restore streaming.

    Idempotent: realigning an already-streaming pair just re-syncs the
    leader. The grasp is forced back to idle and velocity zeroed.
    """
    q = np.asarray(q_follower, dtype=float).copy()
    if q.shape != leader.q.shape:
        raise ContractViolation("config length mismatch in realign")
    new_leader = LeaderState(
        q=q, q_dot=np.zeros_like(q), grasp=Grasp(), sim_time=leader.sim_time
    )
    new_state = replace(state, mode=GateMode.STREAMING, cause=None, detail=None)
    return new_state, new_leader


class EventLog:
    """Append-only lock/unlock/realign record, one JSON object per row."""

    def __init__(self):
        self.rows: list[dict] = []

    def append(self, t: float, event: str, cause: str | None = None,
               joint_deltas: list[float] | None = None) -> None:
        self.rows.append(
            {"t": t, "event": event, "cause": cause, "joint_deltas": joint_deltas}
        )

    def locks(self) -> list[dict]:
        return [r for r in self.rows if r["event"] == "lock"]

    def to_jsonl(self) -> str:
        return "".join(json.dumps(row) + "\n" for row in self.rows)

    def write(self, path: str | Path) -> None:
        Path(path).write_text(self.to_jsonl())


class SafetyGate:
    """Single-owner wrapper: holds the gate state and records transitions.

    A lock can only be entered through ``check`` (or an explicit fault
    report), which is also the only place events are appended, so every
    lock in the log carries its cause and timestamp.
    """

    def __init__(
        self,
        dof: int,
        threshold: float = DEFAULT_DIVERGENCE_THRESHOLD,
        timeout: float = DEFAULT_TIMEOUT,
        t0: float = 0.0,
        log: EventLog | None = None,
    ):
        self.dof = dof
        self.state = GateState(
            last_heartbeat=t0, divergence_threshold=threshold, timeout=timeout
        )
        self.log = log if log is not None else EventLog()

    @property
    def streaming(self) -> bool:
        return self.state.mode is GateMode.STREAMING

    def feed_heartbeat(self, now: float) -> None:
        self.state = heartbeat(self.state, now)

    def check(self, q_leader: np.ndarray, q_follower: np.ndarray, now: float) -> bool:
        before = self.state.mode
        self.state, forward = gate(self.state, q_leader, q_follower, now)
        if before is GateMode.STREAMING and self.state.mode is GateMode.LOCKED:
            deltas = np.abs(np.asarray(q_leader) - np.asarray(q_follower)).tolist()
            self.log.append(now, "lock", self.state.cause.value, deltas)
        return forward

    def force_lock(self, cause: LockCause, now: float) -> None:
        """Locks immediately on a reported simulation fault."""
        if self.state.mode is GateMode.LOCKED:
            return
        self.state = replace(self.state, mode=GateMode.LOCKED, cause=cause, detail=None)
        self.log.append(now, "lock", cause.value, None)

    def realign(self, leader: LeaderState, q_follower: np.ndarray, now: float) -> LeaderState:
        was_locked = self.state.mode is GateMode.LOCKED
        self.state, new_leader = realign(self.state, leader, q_follower)
        self.state = heartbeat(self.state, now)
        self.log.append(now, "realign", None, None)
        if was_locked:
            self.log.append(now, "unlock", None, None)
        return new_leader
