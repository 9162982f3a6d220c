"""Follower-side control: 50Hz target ingestion with zero-order hold,
a first-order low-pass filter stepped at the 1000Hz control rate, a joint
PD law, and a unit-inertia simulated plant.

The filter recurrence is implemented in exactly the form
``q_tilde = (1 - alpha) * q_tilde + alpha * q`` so that offline
recomputations of a target trace reproduce the state trajectory
bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from puppet.errors import ContractViolation, NumericalFault
from puppet.kinematics.model import RobotModel

CONTROL_DT = 1e-3            # 1000Hz inner loop
TARGET_PERIOD_TICKS = 20     # 50Hz target stream = one message per 20 ticks

DEFAULT_K_P = (600.0, 600.0, 600.0, 250.0, 150.0, 50.0, 1.0)
DEFAULT_K_D = (50.0, 50.0, 20.0, 20.0, 20.0, 10.0, 1.0)


@dataclass(frozen=True)
class FilterState:
    """First-order low-pass over the held target stream."""

    q_tilde: np.ndarray
    alpha: float = 0.02

    def __post_init__(self):
        if not (0.0 < self.alpha <= 1.0):
            raise ContractViolation(f"alpha must be in (0, 1], got {self.alpha}")
        q = np.asarray(self.q_tilde, dtype=float)
        if not np.all(np.isfinite(q)):
            raise ContractViolation("q_tilde must be finite")
        object.__setattr__(self, "q_tilde", q)


def filter_step(state: FilterState, q_target: np.ndarray) -> FilterState:
    """One tick of the smoothing recurrence against the held target."""
    q_target = np.asarray(q_target, dtype=float)
    if q_target.shape != state.q_tilde.shape:
        raise ContractViolation("target length does not match filter state")
    q_tilde = (1.0 - state.alpha) * state.q_tilde + state.alpha * q_target
    return FilterState(q_tilde, state.alpha)


@dataclass(frozen=True)
class FollowerGains:
    k_p: np.ndarray
    k_d: np.ndarray

    def __post_init__(self):
        kp = np.asarray(self.k_p, dtype=float)
        kd = np.asarray(self.k_d, dtype=float)
        if kp.shape != kd.shape:
            raise ContractViolation("k_p and k_d must have equal length")
        if np.any(kp <= 0) or np.any(kd <= 0):
            raise ContractViolation("gains must be > 0")
        object.__setattr__(self, "k_p", kp)
        object.__setattr__(self, "k_d", kd)

    @staticmethod
    def default() -> "FollowerGains":
        return FollowerGains(np.array(DEFAULT_K_P), np.array(DEFAULT_K_D))


def follower_pd(
    q_tilde: np.ndarray, q: np.ndarray, q_dot: np.ndarray, gains: FollowerGains
) -> np.ndarray:
    """Joint torques: proportional on filtered-target error, damping on velocity."""
    if not (len(q_tilde) == len(q) == len(q_dot) == len(gains.k_p)):
        raise ContractViolation("follower_pd: length mismatch")
    return gains.k_p * (q_tilde - q) - gains.k_d * q_dot


@dataclass(frozen=True)
class FollowerState:
    """Simulated follower arm plus its target mailbox and filter."""

    q: np.ndarray
    q_dot: np.ndarray
    latest_target: np.ndarray    # zero-order-held 50Hz input
    filter: FilterState
    sim_time: float = 0.0
    last_seq: int | None = None
    dropped_msgs: int = 0

    @staticmethod
    def at_rest(model: RobotModel, q0: np.ndarray | None = None, alpha: float = 0.02) -> "FollowerState":
        q = model.check_config(model.home if q0 is None else q0)
        return FollowerState(
            q=q.copy(),
            q_dot=np.zeros(model.dof),
            latest_target=q.copy(),
            filter=FilterState(q.copy(), alpha),
        )


def ingest_target(state: FollowerState, seq: int, q: np.ndarray) -> FollowerState:
    """Accept a new 50Hz target; stale or duplicate sequence numbers are dropped."""
    if state.last_seq is not None and seq <= state.last_seq:
        return replace(state, dropped_msgs=state.dropped_msgs + 1)
    q = np.asarray(q, dtype=float)
    if q.shape != state.q.shape:
        raise ContractViolation("target length does not match follower state")
    return replace(state, latest_target=q.copy(), last_seq=seq)


def follower_tick(
    state: FollowerState,
    model: RobotModel,
    gains: FollowerGains,
    dt: float = CONTROL_DT,
) -> FollowerState:
    """One 1000Hz control step: filter, PD, semi-implicit Euler, limit clamp."""
    filt = filter_step(state.filter, state.latest_target)
    tau = follower_pd(filt.q_tilde, state.q, state.q_dot, gains)
    q_dot = state.q_dot + tau * dt
    q = state.q + q_dot * dt
    lo, hi = model.lower_limits, model.upper_limits
    below, above = q < lo, q > hi
    if np.any(below) or np.any(above):
        q = np.clip(q, lo, hi)
        q_dot = np.where(below | above, 0.0, q_dot)
    if not (np.all(np.isfinite(q)) and np.all(np.isfinite(q_dot))):
        raise NumericalFault("follower state became non-finite")
    return FollowerState(
        q=q,
        q_dot=q_dot,
        latest_target=state.latest_target,
        filter=filt,
        sim_time=state.sim_time + dt,
        last_seq=state.last_seq,
        dropped_msgs=state.dropped_msgs,
    )
