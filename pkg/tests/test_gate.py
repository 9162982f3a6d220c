import numpy as np

from puppet.gate import (
    Divergence,
    EventLog,
    GateMode,
    GateState,
    LockCause,
    SafetyGate,
    divergence_check,
    gate,
    heartbeat,
    realign,
)
from puppet.leader import GraspMode, LeaderState
from puppet.kinematics.model import planar_arm


# ------------------------------------------------------------------
# divergence check
# ------------------------------------------------------------------

def test_identical_configs_aligned():
    q = np.array([0.1, -0.4, 0.9])
    assert divergence_check(q, q) is None


def test_single_joint_over_threshold():
    q1 = np.zeros(7)
    q2 = np.zeros(7)
    q2[4] = 0.25
    d = divergence_check(q1, q2, 0.2)
    assert d == Divergence(4, 0.25)


def test_exactly_threshold_is_aligned():
    # "bigger than" is strict: 0.2 exactly does not diverge
    q1 = np.zeros(7)
    q2 = np.full(7, 0.2)
    assert divergence_check(q1, q2, 0.2) is None
    q2[2] = 0.2000001
    d = divergence_check(q1, q2, 0.2)
    assert d is not None and d.joint == 2


def test_reports_first_diverged_joint():
    q1 = np.zeros(5)
    q2 = np.array([0.0, 0.3, 0.0, 0.5, 0.0])
    d = divergence_check(q1, q2, 0.2)
    assert d.joint == 1


# ------------------------------------------------------------------
# gate transitions
# ------------------------------------------------------------------

def test_streaming_aligned_forwards():
    s = GateState(last_heartbeat=0.0)
    q = np.zeros(3)
    s2, forward = gate(s, q, q, now=0.01)
    assert forward
    assert s2.mode is GateMode.STREAMING
    assert s2.overlay == "green"


def test_divergence_locks_and_blocks():
    s = GateState(last_heartbeat=0.0)
    ql = np.zeros(3)
    qf = np.array([0.0, 0.3, 0.0])
    s2, forward = gate(s, ql, qf, now=0.01)
    assert not forward
    assert s2.mode is GateMode.LOCKED
    assert s2.cause is LockCause.DIVERGENCE
    assert s2.detail.joint == 1
    assert s2.overlay == "red"


def test_heartbeat_timeout_locks():
    s = GateState(last_heartbeat=0.0, timeout=0.2)
    q = np.zeros(3)
    s2, forward = gate(s, q, q, now=0.19)
    assert forward
    s3, forward = gate(s2, q, q, now=0.2)  # boundary: not yet (strict >)
    assert forward
    s4, forward = gate(s3, q, q, now=0.2001)
    assert not forward
    assert s4.cause is LockCause.TIMEOUT


def test_heartbeat_refresh_prevents_timeout():
    s = GateState(last_heartbeat=0.0, timeout=0.2)
    q = np.zeros(3)
    s = heartbeat(s, 0.5)
    s2, forward = gate(s, q, q, now=0.6)
    assert forward


def test_locked_is_absorbing():
    s = GateState(last_heartbeat=0.0)
    ql, qf = np.zeros(2), np.array([0.5, 0.0])
    s, _ = gate(s, ql, qf, now=0.0)
    assert s.mode is GateMode.LOCKED
    # deltas return under threshold without realign: still blocked
    s2, forward = gate(s, qf, qf, now=0.01)
    assert not forward
    assert s2.mode is GateMode.LOCKED


# ------------------------------------------------------------------
# realign
# ------------------------------------------------------------------

def _leader(model):
    return LeaderState.at_rest(model)


def test_realign_restores_streaming_and_syncs():
    model = planar_arm(1.0, 1.0)
    s = GateState(mode=GateMode.LOCKED, cause=LockCause.DIVERGENCE, last_heartbeat=0.0)
    leader = _leader(model)
    qf = np.array([0.4, -0.2])
    s2, leader2 = realign(s, leader, qf)
    assert s2.mode is GateMode.STREAMING
    assert s2.overlay == "green"
    assert np.array_equal(leader2.q, qf)
    assert np.array_equal(leader2.q_dot, np.zeros(2))
    assert leader2.grasp.mode is GraspMode.IDLE
    assert divergence_check(leader2.q, qf) is None


def test_realign_idempotent_when_streaming():
    model = planar_arm(1.0, 1.0)
    s = GateState(last_heartbeat=0.0)
    qf = np.array([0.1, 0.1])
    s2, leader2 = realign(s, _leader(model), qf)
    assert s2.mode is GateMode.STREAMING
    assert np.array_equal(leader2.q, qf)


# ------------------------------------------------------------------
# stateful wrapper: event log and safety monotonicity
# ------------------------------------------------------------------

def test_lock_events_carry_cause_and_time():
    g = SafetyGate(dof=3, t0=0.0)
    ql, qf = np.zeros(3), np.array([0.3, 0.0, 0.0])
    assert g.check(ql, ql, 0.02)
    assert not g.check(ql, qf, 0.04)
    locks = g.log.locks()
    assert len(locks) == 1
    assert locks[0]["cause"] == "divergence"
    assert locks[0]["t"] == 0.04
    assert locks[0]["joint_deltas"] == [0.3, 0.0, 0.0]


def test_realign_logs_unlock():
    model = planar_arm(1.0, 1.0)
    g = SafetyGate(dof=2, t0=0.0)
    g.check(np.zeros(2), np.array([0.5, 0.0]), 0.02)
    assert not g.streaming
    g.realign(_leader(model), np.array([0.5, 0.0]), 0.04)
    assert g.streaming
    events = [r["event"] for r in g.log.rows]
    assert events == ["lock", "realign", "unlock"]


def test_no_forward_while_locked_random_schedules(rng):
    # safety monotonicity over randomized fault schedules: once locked,
    # nothing is forwarded until a realign
    for _ in range(300):
        g = SafetyGate(dof=4, t0=0.0)
        locked = False
        t = 0.0
        for step in range(60):
            t += 0.02
            if rng.random() < 0.1:
                qf = rng.uniform(-0.5, 0.5, 4)
            else:
                qf = np.zeros(4)
            if rng.random() < 0.05:
                g.realign(_leader(planar_arm(1, 1, 1, 1)), qf, t)
                locked = False
            if rng.random() < 0.3:
                g.feed_heartbeat(t)
            forward = g.check(np.zeros(4), qf, t)
            if locked:
                assert not forward
            if not g.streaming:
                locked = True
            if forward:
                assert g.streaming


def test_every_lock_has_log_row(rng):
    g = SafetyGate(dof=2, t0=0.0)
    model = planar_arm(1.0, 1.0)
    transitions = 0
    t = 0.0
    for _ in range(500):
        t += 0.02
        qf = rng.uniform(-0.6, 0.6, 2) if rng.random() < 0.2 else np.zeros(2)
        was = g.streaming
        g.feed_heartbeat(t)
        g.check(np.zeros(2), qf, t)
        if was and not g.streaming:
            transitions += 1
        if not g.streaming and rng.random() < 0.3:
            g.realign(_leader(model), qf, t)
    assert len(g.log.locks()) == transitions
    for row in g.log.locks():
        assert row["cause"] in {c.value for c in LockCause}
        assert row["t"] is not None


def test_overlay_is_pure_function_of_mode():
    s = GateState(last_heartbeat=0.0)
    assert s.overlay == "green"
    s2, _ = gate(s, np.zeros(1), np.array([0.5]), 0.0)
    assert s2.overlay == "red"
    # no independent overlay field exists to disagree with the mode
    assert not hasattr(s2, "__dict__") or "overlay" not in s2.__dict__


def test_event_log_jsonl_roundtrip(tmp_path):
    log = EventLog()
    log.append(0.1, "lock", "divergence", [0.3, 0.0])
    log.append(0.2, "realign")
    p = tmp_path / "events.jsonl"
    log.write(p)
    import json

    rows = [json.loads(ln) for ln in p.read_text().splitlines()]
    assert rows[0]["event"] == "lock"
    assert rows[1]["event"] == "realign"
