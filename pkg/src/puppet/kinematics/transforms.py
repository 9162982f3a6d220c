"""Rigid-transform primitives: unit quaternions, rotation matrices, poses.

Quaternions are stored as (w, x, y, z) numpy arrays. A Pose is a position
plus a unit quaternion; composition follows the usual homogeneous-transform
semantics (rotate then translate).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from puppet.errors import ContractViolation

QUAT_NORM_TOL = 1e-9
IDENTITY_QUAT = np.array([1.0, 0.0, 0.0, 0.0])


def quat_normalize(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    n = np.linalg.norm(q)
    if n < 1e-12:
        raise ContractViolation("cannot normalize a near-zero quaternion")
    return q / n


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product a*b, both (w, x, y, z)."""
    aw, ax, ay, az = a
    bw, bx, by, bz = b
    return np.array(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ]
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    return np.array([q[0], -q[1], -q[2], -q[3]])


def quat_rotate(q: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Rotate vector v by quaternion q."""
    return quat_to_matrix(q) @ np.asarray(v, dtype=float)


def quat_to_matrix(q: np.ndarray) -> np.ndarray:
    w, x, y, z = q
    return np.array(
        [
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ]
    )


def matrix_to_quat(r: np.ndarray) -> np.ndarray:
    """Shepperd's method; returns the quaternion with non-negative w."""
    m = np.asarray(r, dtype=float)
    t = np.trace(m)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2.0
        q = np.array(
            [0.25 * s, (m[2, 1] - m[1, 2]) / s, (m[0, 2] - m[2, 0]) / s, (m[1, 0] - m[0, 1]) / s]
        )
    else:
        i = int(np.argmax(np.diagonal(m)))
        if i == 0:
            s = np.sqrt(1.0 + m[0, 0] - m[1, 1] - m[2, 2]) * 2.0
            q = np.array(
                [(m[2, 1] - m[1, 2]) / s, 0.25 * s, (m[0, 1] + m[1, 0]) / s, (m[0, 2] + m[2, 0]) / s]
            )
        elif i == 1:
            s = np.sqrt(1.0 - m[0, 0] + m[1, 1] - m[2, 2]) * 2.0
            q = np.array(
                [(m[0, 2] - m[2, 0]) / s, (m[0, 1] + m[1, 0]) / s, 0.25 * s, (m[1, 2] + m[2, 1]) / s]
            )
        else:
            s = np.sqrt(1.0 - m[0, 0] - m[1, 1] + m[2, 2]) * 2.0
            q = np.array(
                [(m[1, 0] - m[0, 1]) / s, (m[0, 2] + m[2, 0]) / s, (m[1, 2] + m[2, 1]) / s, 0.25 * s]
            )
    if q[0] < 0:
        q = -q
    return quat_normalize(q)


def quat_log(q: np.ndarray) -> np.ndarray:
    """Axis-angle vector (rotation log map) of a unit quaternion.

    The sign of q is first fixed so the returned rotation angle is the
    shortest one; the result norm is therefore <= pi.
    """
    q = np.asarray(q, dtype=float)
    if q[0] < 0:
        q = -q
    v = q[1:]
    vn = np.linalg.norm(v)
    if vn < 1e-12:
        return np.zeros(3)
    angle = 2.0 * np.arctan2(vn, q[0])
    return (angle / vn) * v


def axis_angle_matrix(axis: np.ndarray, angle: float) -> np.ndarray:
    """Rodrigues rotation about a unit axis."""
    x, y, z = axis
    c = np.cos(angle)
    s = np.sin(angle)
    t = 1.0 - c
    return np.array(
        [
            [c + x * x * t, x * y * t - z * s, x * z * t + y * s],
            [x * y * t + z * s, c + y * y * t, y * z * t - x * s],
            [x * z * t - y * s, y * z * t + x * s, c + z * z * t],
        ]
    )


def rpy_to_matrix(rpy: np.ndarray) -> np.ndarray:
    """Fixed-axis roll/pitch/yaw: Rz(yaw) @ Ry(pitch) @ Rx(roll)."""
    r, p, y = rpy
    cr, sr = np.cos(r), np.sin(r)
    cp, sp = np.cos(p), np.sin(p)
    cy, sy = np.cos(y), np.sin(y)
    return np.array(
        [
            [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
            [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
            [-sp, cp * sr, cp * cr],
        ]
    )


@dataclass(frozen=True)
class Pose:
    """End-effector (or any frame) pose: position in meters + unit quaternion."""

    position: np.ndarray
    orientation: np.ndarray = field(default_factory=lambda: IDENTITY_QUAT.copy())

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float).reshape(3))
        q = np.asarray(self.orientation, dtype=float).reshape(4)
        if abs(np.linalg.norm(q) - 1.0) > QUAT_NORM_TOL:
            raise ContractViolation(f"quaternion norm {np.linalg.norm(q)!r} not within 1e-9 of 1")
        object.__setattr__(self, "orientation", q)

    @staticmethod
    def identity() -> "Pose":
        return Pose(np.zeros(3), IDENTITY_QUAT.copy())

    @staticmethod
    def from_matrix(t: np.ndarray) -> "Pose":
        return Pose(t[:3, 3].copy(), matrix_to_quat(t[:3, :3]))

    def matrix(self) -> np.ndarray:
        t = np.eye(4)
        t[:3, :3] = quat_to_matrix(self.orientation)
        t[:3, 3] = self.position
        return t

    def compose(self, other: "Pose") -> "Pose":
        """self then other, i.e. self @ other as homogeneous transforms."""
        pos = self.position + quat_to_matrix(self.orientation) @ other.position
        return Pose(pos, quat_normalize(quat_multiply(self.orientation, other.orientation)))

    def inverse(self) -> "Pose":
        rt = quat_to_matrix(self.orientation).T
        return Pose(-(rt @ self.position), quat_conjugate(self.orientation))

    def allclose(self, other: "Pose", atol: float = 1e-9) -> bool:
        qa, qb = self.orientation, other.orientation
        # q and -q describe the same rotation
        quat_ok = np.allclose(qa, qb, atol=atol) or np.allclose(qa, -qb, atol=atol)
        return bool(np.allclose(self.position, other.position, atol=atol) and quat_ok)
