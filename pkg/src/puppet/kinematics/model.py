"""Kinematic chain description and the JSON model loader.

A robot model is an ordered list of revolute joints. Each joint carries a
fixed transform from its parent frame, a rotation axis expressed in the
frame after that fixed transform, position limits, and a velocity limit.
A final fixed transform maps the last joint frame to the end-effector.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from puppet.errors import ModelError
from puppet.kinematics.transforms import rpy_to_matrix

AXIS_NORM_TOL = 1e-9


@dataclass(frozen=True)
class JointDescriptor:
    """One revolute joint: fixed parent transform + rotation axis + limits."""

    translation: np.ndarray          # meters, in the parent frame
    rotation: np.ndarray             # 3x3, fixed rotation of the parent transform
    axis: np.ndarray                 # unit rotation axis in the post-transform frame
    limits: tuple[float, float]      # position limits, rad
    vel_limit: float                 # rad/s, > 0

    def __post_init__(self):
        object.__setattr__(self, "translation", np.asarray(self.translation, float).reshape(3))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, float).reshape(3, 3))
        object.__setattr__(self, "axis", np.asarray(self.axis, float).reshape(3))

    def fixed_matrix(self) -> np.ndarray:
        t = np.eye(4)
        t[:3, :3] = self.rotation
        t[:3, 3] = self.translation
        return t


@dataclass(frozen=True)
class RobotModel:
    """Serial chain shared by leader, follower, and console."""

    name: str
    joints: tuple[JointDescriptor, ...]
    ee_offset: np.ndarray            # 4x4 fixed transform, last joint frame -> EE
    home: np.ndarray                 # a valid in-limit configuration, rad

    def __post_init__(self):
        object.__setattr__(self, "ee_offset", np.asarray(self.ee_offset, float).reshape(4, 4))
        object.__setattr__(self, "home", np.asarray(self.home, float).reshape(len(self.joints)))
        _validate_model(self)

    @property
    def dof(self) -> int:
        return len(self.joints)

    @property
    def lower_limits(self) -> np.ndarray:
        return np.array([j.limits[0] for j in self.joints])

    @property
    def upper_limits(self) -> np.ndarray:
        return np.array([j.limits[1] for j in self.joints])

    @property
    def vel_limits(self) -> np.ndarray:
        return np.array([j.vel_limit for j in self.joints])

    def check_config(self, q: np.ndarray, what: str = "q") -> np.ndarray:
        """Validates a joint vector against the model: length + finiteness."""
        q = np.asarray(q, dtype=float).reshape(-1)
        if q.shape[0] != self.dof:
            raise ModelError(f"{what}: length {q.shape[0]} does not match {self.dof}-joint model")
        if not np.all(np.isfinite(q)):
            raise ModelError(f"{what}: non-finite entries")
        return q

    def clamp(self, q: np.ndarray) -> np.ndarray:
        return np.clip(q, self.lower_limits, self.upper_limits)

    def random_config(self, rng: np.random.Generator) -> np.ndarray:
        return rng.uniform(self.lower_limits, self.upper_limits)


def _validate_model(model: RobotModel) -> None:
    if len(model.joints) < 1:
        raise ModelError("joints: model needs at least one joint")
    for i, j in enumerate(model.joints):
        where = f"joints[{i}]"
        if abs(np.linalg.norm(j.axis) - 1.0) > AXIS_NORM_TOL:
            raise ModelError(f"{where}.axis: norm {np.linalg.norm(j.axis)!r} not within 1e-9 of 1")
        lo, hi = j.limits
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ModelError(f"{where}.limits: need finite lower < upper, got [{lo}, {hi}]")
        if not (np.isfinite(j.vel_limit) and j.vel_limit > 0):
            raise ModelError(f"{where}.vel_limit: must be > 0, got {j.vel_limit}")
        if not np.all(np.isfinite(j.translation)) or not np.all(np.isfinite(j.rotation)):
            raise ModelError(f"{where}: non-finite fixed transform")
    lo, hi = model.lower_limits, model.upper_limits
    if np.any(model.home < lo) or np.any(model.home > hi):
        raise ModelError("home: configuration outside position limits")


# ------------------------------------------------------------------
# JSON loading
# ------------------------------------------------------------------

def _expect(obj: dict, key: str, where: str):
    if key not in obj:
        raise ModelError(f"{where}: missing required field {key!r}")
    return obj[key]


def _vec(value, n: int, where: str) -> np.ndarray:
    try:
        arr = np.asarray(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"{where}: not a numeric array ({exc})") from None
    if arr.shape != (n,):
        raise ModelError(f"{where}: expected {n} numbers, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{where}: non-finite entries")
    return arr


def _fixed_transform(obj: dict, where: str) -> tuple[np.ndarray, np.ndarray]:
    translation = _vec(obj.get("translation", [0, 0, 0]), 3, f"{where}.translation")
    if "rotation_matrix" in obj:
        flat = _vec(obj["rotation_matrix"], 9, f"{where}.rotation_matrix")
        return translation, flat.reshape(3, 3)
    rpy = _vec(obj.get("rotation_rpy", [0, 0, 0]), 3, f"{where}.rotation_rpy")
    return translation, rpy_to_matrix(rpy)


def model_from_dict(doc: dict, source: str = "<dict>") -> RobotModel:
    name = _expect(doc, "name", source)
    joints_doc = _expect(doc, "joints", source)
    if not isinstance(joints_doc, list) or not joints_doc:
        raise ModelError(f"{source}.joints: expected a non-empty list")

    joints = []
    for i, jd in enumerate(joints_doc):
        where = f"{source}.joints[{i}]"
        translation, rotation = _fixed_transform(jd, where)
        axis = _vec(_expect(jd, "axis", where), 3, f"{where}.axis")
        limits = _vec(_expect(jd, "limits", where), 2, f"{where}.limits")
        vel_limit = float(_expect(jd, "vel_limit", where))
        joints.append(
            JointDescriptor(
                translation=translation,
                rotation=rotation,
                axis=axis,
                limits=(float(limits[0]), float(limits[1])),
                vel_limit=vel_limit,
            )
        )

    ee_doc = _expect(doc, "ee_offset", source)
    ee_translation, ee_rotation = _fixed_transform(ee_doc, f"{source}.ee_offset")
    ee = np.eye(4)
    ee[:3, :3] = ee_rotation
    ee[:3, 3] = ee_translation

    if "home" in doc:
        home = _vec(doc["home"], len(joints), f"{source}.home")
    else:
        home = np.array([0.5 * (j.limits[0] + j.limits[1]) for j in joints])

    try:
        return RobotModel(name=str(name), joints=tuple(joints), ee_offset=ee, home=home)
    except ModelError as exc:
        raise ModelError(f"{source}: {exc}") from None


def model_to_dict(model: RobotModel) -> dict:
    """Exact JSON document for a model (rotations as row-major matrices)."""
    return {
        "name": model.name,
        "joints": [
            {
                "translation": j.translation.tolist(),
                "rotation_matrix": j.rotation.ravel().tolist(),
                "axis": j.axis.tolist(),
                "limits": list(j.limits),
                "vel_limit": j.vel_limit,
            }
            for j in model.joints
        ],
        "ee_offset": {
            "translation": model.ee_offset[:3, 3].tolist(),
            "rotation_matrix": model.ee_offset[:3, :3].ravel().tolist(),
        },
        "home": model.home.tolist(),
    }


def load_model(path: str | Path) -> RobotModel:
    """Loads and validates a robot model JSON file.

    Bare names (no path separator, no .json suffix) resolve against the
    models packaged with the library, e.g. ``load_model("panda_7dof")``.
    """
    p = Path(path)
    if p.suffix != ".json" and not p.exists() and "/" not in str(path):
        text = packaged_model_text(str(path))
        source = f"builtin:{path}"
    else:
        try:
            text = p.read_text()
        except OSError as exc:
            raise ModelError(f"{path}: cannot read model file ({exc})") from None
        source = str(path)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelError(f"{source}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from None
    if not isinstance(doc, dict):
        raise ModelError(f"{source}: top-level value must be an object")
    return model_from_dict(doc, source)


def packaged_model_text(name: str) -> str:
    ref = resources.files("puppet").joinpath(f"data/models/{name}.json")
    if not ref.is_file():
        raise ModelError(f"unknown builtin model {name!r}")
    return ref.read_text()


def planar_arm(
    *link_lengths: float, name: str = "planar", home: np.ndarray | None = None
) -> RobotModel:
    """N-link planar arm in the xy plane, all joints about +z.

    Used throughout the tests: FK of the straight arm is the sum of link
    lengths along +x.
    """
    joints = []
    for i, length in enumerate(link_lengths):
        translation = np.zeros(3) if i == 0 else np.array([link_lengths[i - 1], 0.0, 0.0])
        joints.append(
            JointDescriptor(
                translation=translation,
                rotation=np.eye(3),
                axis=np.array([0.0, 0.0, 1.0]),
                limits=(-np.pi, np.pi),
                vel_limit=1.0,
            )
        )
    ee = np.eye(4)
    ee[0, 3] = link_lengths[-1]
    return RobotModel(
        name=name,
        joints=tuple(joints),
        ee_offset=ee,
        home=np.zeros(len(link_lengths)) if home is None else np.asarray(home, float),
    )


