"""Interactive wall-clock mode.

Both halves of the system run in one process but talk through a real TCP
socket, exactly as they would across machines:

* the follower service listens on the wire port, runs the 1000Hz control
  loop, and publishes state at 50Hz;
* the leader service connects to it, runs the virtual arm, the IK
  pipeline, and the safety gate, and publishes targets at 50Hz;
* a browser gateway (WebSocket + static files on the UI port) feeds
  operator input to the leader and broadcasts both arms to the console.
"""
from __future__ import annotations

import asyncio
import json
import logging
import threading
import time
from pathlib import Path

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse

from puppet.bridge.messages import (
    FollowerStateMsg,
    Hello,
    LeaderJointTarget,
    MessageFactory,
    Realign,
    payload_dict,
)
from puppet.bridge.transport import FrameConnection, LatestMailbox, connect, listen_one
from puppet.errors import NumericalFault
from puppet.follower import FollowerGains, FollowerState, follower_tick, ingest_target
from puppet.gate import LockCause, SafetyGate
from puppet.kinematics.model import RobotModel, load_model
from puppet.kinematics.solver import link_poses
from puppet.kinematics.transforms import Pose, quat_normalize
from puppet.leader import LeaderArm

logger = logging.getLogger(__name__)

CONTROL_DT = 1e-3
TARGET_PERIOD = 20      # 50Hz
HEARTBEAT_PERIOD = 100  # 10Hz


class FollowerService:
    """Hosts the simulated follower behind the wire port."""

    def __init__(self, model: RobotModel, host: str, port: int):
        self.model = model
        self.state = FollowerState.at_rest(model)
        self.gains = FollowerGains.default()
        if len(self.gains.k_p) != model.dof:
            self.gains = FollowerGains(
                np.full(model.dof, 600.0), np.full(model.dof, 50.0)
            )
        self.targets = LatestMailbox()
        self.factory = MessageFactory()
        self.conn: FrameConnection | None = None
        self._stop = threading.Event()
        self._lock = threading.Lock()
        self.server, self._accept = listen_one(
            host, port, self._on_message, expected_dof=model.dof, name="follower"
        )
        self.port = self.server.getsockname()[1]
        self._threads = [
            threading.Thread(target=self._accept_loop, name="follower-accept", daemon=True),
            threading.Thread(target=self._control_loop, name="follower-control", daemon=True),
        ]

    def start(self):
        for t in self._threads:
            t.start()

    def stop(self):
        self._stop.set()
        self.server.close()
        if self.conn:
            self.conn.close()

    def snapshot(self) -> FollowerState:
        with self._lock:
            return self.state

    def _on_message(self, msg):
        if isinstance(msg, LeaderJointTarget):
            self.targets.put(msg)
        elif isinstance(msg, Hello):
            logger.info("follower: peer hello (model %s)", msg.model_name)
        elif isinstance(msg, Realign):
            # the leader realigns itself onto our state; nothing to do here
            logger.info("follower: realign notice #%d", msg.seq)

    def _accept_loop(self):
        while not self._stop.is_set():
            conn = self._accept()
            if conn is None:
                return
            logger.info("follower: leader connected")
            if self.conn:
                self.conn.close()
            self.conn = conn
            conn.send(self.factory.hello(self.model.name))

    def _control_loop(self):
        tick = 0
        next_deadline = time.monotonic()
        while not self._stop.is_set():
            msg = self.targets.take()
            with self._lock:
                if msg is not None:
                    self.state = ingest_target(self.state, msg.seq, np.array(msg.q))
                try:
                    self.state = follower_tick(self.state, self.model, self.gains, CONTROL_DT)
                except NumericalFault:
                    logger.error("follower: non-finite state, holding")
                    self.state = FollowerState.at_rest(self.model, q0=None)
                state = self.state
            if tick % TARGET_PERIOD == 0 and self.conn and not self.conn.closed:
                t_ns = time.monotonic_ns()
                fb = self.factory.follower_state(
                    t_ns, state.q, state.q_dot, link_poses(self.model, state.q)
                )
                self.conn.send(fb)
            if tick % HEARTBEAT_PERIOD == 0 and self.conn and not self.conn.closed:
                self.conn.send(self.factory.heartbeat())
            tick += 1
            next_deadline += CONTROL_DT
            delay = next_deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            elif delay < -0.25:
                next_deadline = time.monotonic()  # fell far behind; resync


class LeaderService:
    """Hosts the virtual leader arm, IK pipeline, and the safety gate."""

    def __init__(self, model: RobotModel, host: str, port: int):
        self.model = model
        self.arm = LeaderArm(model, command_dt=CONTROL_DT * TARGET_PERIOD)
        self.gate = SafetyGate(model.dof, t0=time.monotonic())
        self.factory = MessageFactory()
        self.operator_input = LatestMailbox()
        self.realign_requests = LatestMailbox()
        self.q_follower_view = self.arm.state.q.copy()
        self.follower_msg: FollowerStateMsg | None = None
        self._lock = threading.Lock()
        self._stop = threading.Event()
        self.conn = connect(
            host, port, self._on_message, expected_dof=model.dof, name="leader"
        )
        self.conn.send(self.factory.hello(model.name))
        self._thread = threading.Thread(
            target=self._control_loop, name="leader-control", daemon=True
        )

    def start(self):
        self._thread.start()

    def stop(self):
        self._stop.set()
        self.conn.close()

    def _on_message(self, msg):
        if isinstance(msg, FollowerStateMsg):
            with self._lock:
                self.q_follower_view = np.array(msg.q)
                self.follower_msg = msg
            self.gate.feed_heartbeat(time.monotonic())

    def console_snapshot(self) -> dict:
        """Everything the browser console renders, kinematics included."""
        with self._lock:
            q = self.arm.state.q.copy()
            grasp = self.arm.state.grasp
            fmsg = self.follower_msg
            gripper = self.arm.gripper_closed
        poses = link_poses(self.model, q)
        doc = {
            "type": "leader_state",
            "t_mono_ns": time.monotonic_ns(),
            "q": q.tolist(),
            "link_poses": [
                {"position": p.position.tolist(), "orientation": p.orientation.tolist()}
                for p in poses
            ],
            "grasp_color": grasp.color,
            "grasp_phase": grasp.label(),
            "overlay_color": self.gate.state.overlay,
            "gate_mode": self.gate.state.label(),
            "gripper": "close" if gripper else "open",
        }
        follower_doc = None if fmsg is None else payload_dict(fmsg)
        return {"leader": doc, "follower": follower_doc}

    def _control_loop(self):
        tick = 0
        next_deadline = time.monotonic()
        while not self._stop.is_set():
            now = time.monotonic()
            with self._lock:
                if tick % TARGET_PERIOD == 0:
                    if self.realign_requests.take() is not None:
                        self.arm.adopt(
                            self.gate.realign(self.arm.state, self.q_follower_view, now)
                        )
                        self.conn.send(self.factory.realign())
                    sample = self.operator_input.peek()
                    if sample is not None:
                        controller, pressed, trigger = sample
                        self.arm.operator_update(controller, pressed, trigger)
                    else:
                        self.arm.operator_update(None, False, False)
                    forward = self.gate.check(self.arm.state.q, self.q_follower_view, now)
                    if forward and self.arm.engaged and not self.conn.closed:
                        msg = self.factory.target(
                            time.monotonic_ns(), self.arm.state.q, self.arm.gripper_closed
                        )
                        self.conn.send(msg)
                try:
                    self.arm.physics_tick(CONTROL_DT)
                except NumericalFault:
                    logger.error("leader: non-finite torque, locking stream")
                    self.gate.force_lock(LockCause.LEADER_FAULT, now)
                    self.arm.realign_to(self.q_follower_view)
            tick += 1
            next_deadline += CONTROL_DT
            delay = next_deadline - time.monotonic()
            if delay > 0:
                time.sleep(delay)
            elif delay < -0.25:
                next_deadline = time.monotonic()


def parse_console_input(doc: dict):
    """Controller sample from a console message, or None if not one."""
    if doc.get("type") != "controller_input":
        return None
    pose_doc = doc.get("pose", {})
    pos = np.array(pose_doc.get("position", [0, 0, 0]), dtype=float)
    quat = np.array(pose_doc.get("orientation", [1, 0, 0, 0]), dtype=float)
    controller = Pose(pos, quat_normalize(quat))
    return controller, bool(doc.get("pressed", False)), bool(doc.get("trigger", False))


def build_gateway_app(leader: LeaderService, ui_dir: str | None = None,
                      broadcast_hz: float = 25.0):
    """FastAPI app: WebSocket console endpoint plus optional static files."""
    app = FastAPI(title="puppet console gateway")

    @app.get("/status")
    def status():
        snap = leader.console_snapshot()
        return JSONResponse(
            {
                "model": leader.model.name,
                "gate_mode": snap["leader"]["gate_mode"],
                "grasp_phase": snap["leader"]["grasp_phase"],
            }
        )

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        await ws.send_text(
            json.dumps({"type": "hello", "version": 1, "model_name": leader.model.name})
        )

        async def pump_in():
            while True:
                text = await ws.receive_text()
                try:
                    doc = json.loads(text)
                except json.JSONDecodeError:
                    continue
                if doc.get("type") == "realign":
                    leader.realign_requests.put(True)
                    continue
                sample = parse_console_input(doc)
                if sample is not None:
                    leader.operator_input.put(sample)

        async def pump_out():
            period = 1.0 / broadcast_hz
            while True:
                snap = leader.console_snapshot()
                await ws.send_text(json.dumps(snap["leader"]))
                if snap["follower"] is not None:
                    await ws.send_text(json.dumps(snap["follower"]))
                await asyncio.sleep(period)

        try:
            await asyncio.gather(pump_in(), pump_out())
        except (WebSocketDisconnect, RuntimeError):
            pass

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="console")
    return app


def serve(model_file: str, host: str, port: int, ui_port: int, ui_dir: str | None = None):
    """Run the full interactive stack until interrupted."""
    import uvicorn

    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(name)s: %(message)s")
    model = load_model(model_file)
    follower = FollowerService(model, host, port)
    follower.start()
    time.sleep(0.05)
    leader = LeaderService(model, host, follower.port)
    leader.start()

    if ui_dir is None:
        default_ui = Path(__file__).resolve().parents[2] / "frontend" / "dist"
        ui_dir = str(default_ui) if default_ui.is_dir() else None
    app = build_gateway_app(leader, ui_dir)
    logger.info(
        "serving: wire %s:%d, console http://%s:%d (model %s)",
        host, follower.port, host, ui_port, model.name,
    )
    try:
        uvicorn.run(app, host=host, port=ui_port, log_level="warning")
    finally:
        leader.stop()
        follower.stop()
