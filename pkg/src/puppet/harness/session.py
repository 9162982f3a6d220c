"""Deterministic lockstep execution of a scenario.

One virtual clock drives everything: the 1000Hz physics/control tick, the
50Hz target and feedback exchange, and 10Hz heartbeats. Messages pass
through the real wire encoding both ways, so a run exercises the protocol
end to end while staying byte-reproducible. One demo row is recorded per
50Hz tick, snapshotting exactly the values the safety gate saw.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from puppet.bridge.messages import MessageFactory, decode, encode
from puppet.errors import NumericalFault, ScenarioError
from puppet.follower import FollowerGains, FollowerState, follower_tick, ingest_target
from puppet.gate import LockCause, SafetyGate
from puppet.harness.record import DemoWriter, config_hash, make_header
from puppet.harness.scenario import ExternalOperator, Scenario
from puppet.kinematics.model import RobotModel, load_model, model_to_dict
from puppet.kinematics.solver import IkParams, forward_kinematics, link_poses
from puppet.leader import LeaderArm, LeaderGains, VelocityLimits


@dataclass(frozen=True)
class SessionConfig:
    control_dt: float = 1e-3
    target_period: int = 20        # control ticks between 50Hz exchanges
    heartbeat_period: int = 100    # control ticks between heartbeats (10Hz)
    alpha: float = 0.02
    sphere_radius: float = 0.15
    divergence_threshold: float = 0.2
    gate_timeout: float = 0.2
    ik: IkParams = IkParams()
    velocity_limits: VelocityLimits = VelocityLimits()


@dataclass
class SessionResult:
    header: dict
    rows: list[dict]
    demo_text: str
    events: EventLog
    counts: dict
    model: RobotModel
    follower: FollowerState


def run_scenario(
    scenario: Scenario,
    config: SessionConfig = SessionConfig(),
    model: RobotModel | None = None,
) -> SessionResult:
    """Run one scenario to completion under the virtual clock."""
    if isinstance(scenario.operator, ExternalOperator):
        raise ScenarioError("operator.type: external operators need interactive serve mode")
    if model is None:
        model = load_model(scenario.model_file)
    dof = model.dof
    for i, inj in enumerate(scenario.fault_injections):
        if inj.kind == "teleport_leader" and len(inj.dq) != dof:
            raise ScenarioError(
                f"fault_injections[{i}].dq: expected {dof} entries, got {len(inj.dq)}"
            )

    dt = config.control_dt
    leader_gains = LeaderGains.default(dof)
    follower_gains = FollowerGains.default()
    if len(follower_gains.k_p) != dof:
        follower_gains = FollowerGains(np.full(dof, 600.0), np.full(dof, 50.0))

    leader = LeaderArm(
        model,
        gains=leader_gains,
        ik_params=config.ik,
        limits=config.velocity_limits,
        sphere_radius=config.sphere_radius,
        command_dt=dt * config.target_period,
    )
    follower = FollowerState.at_rest(model, alpha=config.alpha)
    gate = SafetyGate(
        dof,
        threshold=config.divergence_threshold,
        timeout=config.gate_timeout,
        t0=0.0,
    )
    factory = MessageFactory()
    home_ee = forward_kinematics(model, model.home)

    header = make_header(
        scenario_name=scenario.name,
        model_name=model.name,
        model_doc=model_to_dict(model),
        dof=dof,
        alpha=config.alpha,
        k_p=follower_gains.k_p.tolist(),
        k_d=follower_gains.k_d.tolist(),
        leader_k_p=leader_gains.k_p.tolist(),
        leader_k_d=leader_gains.k_d.tolist(),
        control_dt=dt,
        target_period=config.target_period,
        q0=model.home.tolist(),
        seed=scenario.seed,
    )
    # fault schedule and duration are part of the reproducibility contract
    header["faults"] = [
        {"t": f.t, "kind": f.kind, "dq": None if f.dq is None else f.dq.tolist()}
        for f in scenario.fault_injections
    ]
    header["duration"] = scenario.duration
    header["config_hash"] = config_hash(header)
    writer = DemoWriter(header)

    counts = {
        "leader_targets_emitted": 0,
        "leader_targets_delivered": 0,
        "follower_feedback": 0,
        "heartbeats": 0,
        "follower_ticks": 0,
        "dropped_stale": 0,
    }

    link_up = True
    follower_frozen = False
    leader_frozen = False
    q_follower_view = follower.q.copy()
    pending = sorted(scenario.fault_injections, key=lambda f: f.t)
    n_ticks = int(round(scenario.duration / dt))

    for i in range(n_ticks):
        t = i * dt
        t_ns = i * 1_000_000

        while pending and pending[0].t <= t:
            inj = pending.pop(0)
            if inj.kind == "freeze_follower":
                follower_frozen = True
            elif inj.kind == "drop_link":
                link_up = False
            elif inj.kind == "restore_link":
                link_up = True
            elif inj.kind == "teleport_leader":
                leader.teleport(inj.dq)
            elif inj.kind == "realign":
                leader.adopt(gate.realign(leader.state, follower.q, t))

        if i % config.target_period == 0:
            # feedback first: the leader-side gate sees a snapshot that is
            # at most one exchange old
            if link_up:
                fb = factory.follower_state(
                    t_ns, follower.q, follower.q_dot, link_poses(model, follower.q)
                )
                delivered = decode(encode(fb), dof)
                q_follower_view = np.array(delivered.q)
                gate.feed_heartbeat(t)
                counts["follower_feedback"] += 1

            controller, pressed, trigger = scenario.operator.sample(t, home_ee)
            leader.operator_update(controller, pressed, trigger)

            forward = gate.check(leader.state.q, q_follower_view, t)
            sent = None
            if forward and leader.engaged:
                msg = factory.target(t_ns, leader.state.q, leader.gripper_closed)
                frame = encode(msg)
                counts["leader_targets_emitted"] += 1
                if link_up:
                    delivered = decode(frame, dof)
                    before = follower.dropped_msgs
                    follower = ingest_target(follower, delivered.seq, np.array(delivered.q))
                    counts["dropped_stale"] += follower.dropped_msgs - before
                    counts["leader_targets_delivered"] += 1
                    sent = list(delivered.q)

            writer.add_row(
                t=t,
                q_leader=leader.state.q,
                q_follower=follower.q,
                q_tilde=follower.filter.q_tilde,
                q_sent=sent,
                gripper="close" if leader.gripper_closed else "open",
                gate_mode=gate.state.label(),
                grasp_phase=leader.state.grasp.label(),
            )

        if i % config.heartbeat_period == 0:
            factory.heartbeat()
            counts["heartbeats"] += 1

        if not leader_frozen:
            try:
                leader.physics_tick(dt)
            except NumericalFault:
                gate.force_lock(LockCause.LEADER_FAULT, t)
                leader_frozen = True
        if not follower_frozen:
            try:
                follower = follower_tick(follower, model, follower_gains, dt)
                counts["follower_ticks"] += 1
            except NumericalFault:
                gate.force_lock(LockCause.FOLLOWER_FAULT, t)
                follower_frozen = True

    rows = [json.loads(line) for line in writer.text().splitlines()[1:]]
    return SessionResult(
        header=header,
        rows=rows,
        demo_text=writer.text(),
        events=gate.log,
        counts=counts,
        model=model,
        follower=follower,
    )
