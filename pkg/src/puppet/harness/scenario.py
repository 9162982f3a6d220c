"""Scenario files: who drives the arm, for how long, and what breaks when.

Validation mirrors the model loader: every error message carries the JSON
path of the offending value.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from puppet.errors import ScenarioError
from puppet.kinematics.transforms import Pose, quat_normalize

FAULT_KINDS = ("freeze_follower", "drop_link", "restore_link", "teleport_leader", "realign")


@dataclass(frozen=True)
class Waypoint:
    t: float
    controller: Pose
    pressed: bool
    trigger: bool


@dataclass(frozen=True)
class ScriptedOperator:
    """Piecewise-linear controller path; button states hold between waypoints.

    Before the first waypoint the operator is absent (far away, released).
    After the last waypoint the pose and buttons hold.
    """

    waypoints: tuple[Waypoint, ...] = ()

    def sample(self, t: float, home_ee: Pose) -> tuple[Pose | None, bool, bool]:
        wps = self.waypoints
        if not wps or t < wps[0].t:
            return None, False, False
        if t >= wps[-1].t:
            w = wps[-1]
            return w.controller, w.pressed, w.trigger
        hi = 0
        while wps[hi + 1].t <= t:
            hi += 1
        a, b = wps[hi], wps[hi + 1]
        u = (t - a.t) / (b.t - a.t)
        pos = (1.0 - u) * a.controller.position + u * b.controller.position
        return Pose(pos, a.controller.orientation), a.pressed, a.trigger


@dataclass(frozen=True)
class SinusoidOperator:
    """Grasps the end-effector at t=0 and oscillates along a fixed axis."""

    axis: np.ndarray
    amplitude: float      # m
    period: float         # s

    def __post_init__(self):
        axis = np.asarray(self.axis, dtype=float).reshape(3)
        n = np.linalg.norm(axis)
        if n < 1e-12:
            raise ScenarioError("operator.axis: zero norm")
        object.__setattr__(self, "axis", axis / n)

    def sample(self, t: float, home_ee: Pose) -> tuple[Pose | None, bool, bool]:
        offset = self.amplitude * np.sin(2.0 * np.pi * t / self.period)
        return Pose(home_ee.position + offset * self.axis, home_ee.orientation), True, False


@dataclass(frozen=True)
class ExternalOperator:
    """Console-driven; only valid in interactive serve mode."""

    def sample(self, t: float, home_ee: Pose):
        return None, False, False


Operator = ScriptedOperator | SinusoidOperator | ExternalOperator


@dataclass(frozen=True)
class FaultInjection:
    t: float
    kind: str                      # one of FAULT_KINDS
    dq: np.ndarray | None = None   # teleport_leader only


@dataclass(frozen=True)
class Scenario:
    name: str
    model_file: str
    operator: Operator
    duration: float
    fault_injections: tuple[FaultInjection, ...] = ()
    seed: int = 0


# ------------------------------------------------------------------
# parsing
# ------------------------------------------------------------------

def _expect(doc: dict, key: str, where: str):
    if key not in doc:
        raise ScenarioError(f"{where}: missing required field {key!r}")
    return doc[key]


def _number(value, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ScenarioError(f"{where}: expected a number")
    return float(value)


def _vec(value, n: int, where: str) -> np.ndarray:
    if not isinstance(value, list) or len(value) != n:
        raise ScenarioError(f"{where}: expected a list of {n} numbers")
    return np.array([_number(v, f"{where}[{i}]") for i, v in enumerate(value)])


def _parse_pose(doc, where: str) -> Pose:
    if not isinstance(doc, dict):
        raise ScenarioError(f"{where}: expected an object")
    pos = _vec(_expect(doc, "position", where), 3, f"{where}.position")
    if "orientation" in doc:
        quat = _vec(doc["orientation"], 4, f"{where}.orientation")
        try:
            quat = quat_normalize(quat)
        except Exception:
            raise ScenarioError(f"{where}.orientation: zero norm") from None
    else:
        quat = np.array([1.0, 0.0, 0.0, 0.0])
    return Pose(pos, quat)


def _parse_operator(doc, where: str) -> Operator:
    if not isinstance(doc, dict):
        raise ScenarioError(f"{where}: expected an object")
    kind = _expect(doc, "type", where)
    if kind == "scripted":
        raw = doc.get("waypoints", [])
        if not isinstance(raw, list):
            raise ScenarioError(f"{where}.waypoints: expected a list")
        wps = []
        last_t = -np.inf
        for i, w in enumerate(raw):
            ww = f"{where}.waypoints[{i}]"
            if not isinstance(w, dict):
                raise ScenarioError(f"{ww}: expected an object")
            t = _number(_expect(w, "t", ww), f"{ww}.t")
            if t <= last_t:
                raise ScenarioError(f"{ww}.t: waypoint times must be strictly increasing")
            last_t = t
            wps.append(
                Waypoint(
                    t=t,
                    controller=_parse_pose(_expect(w, "controller", ww), f"{ww}.controller"),
                    pressed=bool(w.get("pressed", False)),
                    trigger=bool(w.get("trigger", False)),
                )
            )
        return ScriptedOperator(tuple(wps))
    if kind == "sinusoid":
        amplitude = _number(_expect(doc, "amplitude", where), f"{where}.amplitude")
        period = _number(_expect(doc, "period", where), f"{where}.period")
        if period <= 0:
            raise ScenarioError(f"{where}.period: must be > 0")
        return SinusoidOperator(
            axis=_vec(_expect(doc, "axis", where), 3, f"{where}.axis"),
            amplitude=amplitude,
            period=period,
        )
    if kind == "external":
        return ExternalOperator()
    raise ScenarioError(f"{where}.type: unknown operator type {kind!r}")


def _parse_fault(doc, where: str) -> FaultInjection:
    if not isinstance(doc, dict):
        raise ScenarioError(f"{where}: expected an object")
    kind = _expect(doc, "kind", where)
    if kind not in FAULT_KINDS:
        raise ScenarioError(f"{where}.kind: unknown fault kind {kind!r}")
    t = _number(_expect(doc, "t", where), f"{where}.t")
    dq = None
    if kind == "teleport_leader":
        if "dq" not in doc:
            raise ScenarioError(f"{where}: teleport_leader requires 'dq'")
        raw = doc["dq"]
        if not isinstance(raw, list) or not raw:
            raise ScenarioError(f"{where}.dq: expected a non-empty list of numbers")
        dq = np.array([_number(v, f"{where}.dq[{i}]") for i, v in enumerate(raw)])
    return FaultInjection(t=t, kind=kind, dq=dq)


def scenario_from_dict(doc: dict, source: str = "<dict>") -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError(f"{source}: top-level value must be an object")
    name = str(_expect(doc, "name", source))
    model_file = str(_expect(doc, "model_file", source))
    duration = _number(_expect(doc, "duration", source), f"{source}.duration")
    if duration <= 0:
        raise ScenarioError(f"{source}.duration: must be > 0")
    operator = _parse_operator(_expect(doc, "operator", source), f"{source}.operator")
    faults = []
    raw_faults = doc.get("fault_injections", [])
    if not isinstance(raw_faults, list):
        raise ScenarioError(f"{source}.fault_injections: expected a list")
    for i, f in enumerate(raw_faults):
        faults.append(_parse_fault(f, f"{source}.fault_injections[{i}]"))
    seed = doc.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ScenarioError(f"{source}.seed: expected an integer")
    return Scenario(
        name=name,
        model_file=model_file,
        operator=operator,
        duration=duration,
        fault_injections=tuple(faults),
        seed=seed,
    )


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError(f"{path}: cannot read scenario file ({exc})") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None
    return scenario_from_dict(doc, str(path))
