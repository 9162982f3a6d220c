"""Forward kinematics, geometric Jacobian, and iterative pseudo-inverse IK.

The IK loop repeats: compute the 6D task error between the target pose and
FK of the current estimate, stop if converged, otherwise step the estimate
by the damped pseudo-inverse of the geometric Jacobian applied to the
error, with a per-iteration step clamp. Near-singular configurations stall
gracefully instead of exploding, and the stall is reported as an explicit
failure so callers can surface it (red grasp sphere).
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from puppet.errors import ContractViolation
from puppet.kinematics.model import RobotModel
from puppet.kinematics.transforms import (
    Pose,
    axis_angle_matrix,
    matrix_to_quat,
    quat_conjugate,
    quat_log,
    quat_multiply,
)

STALL_STEP_NORM = 1e-12


class IkFailure(enum.Enum):
    NONE = "none"
    MAX_ITERATIONS = "max_iterations"
    SINGULARITY_STALL = "singularity_stall"
    STEP_VELOCITY_EXCEEDED = "step_velocity_exceeded"


@dataclass(frozen=True)
class IkParams:
    eps_pos: float = 1e-3        # m
    eps_rot: float = 1e-2        # rad
    max_iter: int = 100
    sigma_min: float = 1e-4      # singular values below this are dropped
    dq_clamp: float = 0.2        # rad per iteration, infinity norm


@dataclass(frozen=True)
class IkResult:
    converged: bool
    q_hat: np.ndarray
    iterations: int
    residual: np.ndarray         # 6-vector (m, rad)
    failure: IkFailure = IkFailure.NONE


def _chain_pass(model: RobotModel, q: np.ndarray):
    """One forward pass: world joint origins, world joint axes, EE frame.

    Returns (origins (n,3), axes (n,3), r (3,3 EE rotation), p (3 EE pos)).
    """
    r = np.eye(3)
    p = np.zeros(3)
    n = model.dof
    origins = np.empty((n, 3))
    axes = np.empty((n, 3))
    for i, joint in enumerate(model.joints):
        # fixed parent transform
        p = p + r @ joint.translation
        r = r @ joint.rotation
        origins[i] = p
        axes[i] = r @ joint.axis
        r = r @ axis_angle_matrix(joint.axis, q[i])
    ee = model.ee_offset
    p = p + r @ ee[:3, 3]
    r = r @ ee[:3, :3]
    return origins, axes, r, p


def forward_kinematics(model: RobotModel, q: np.ndarray) -> Pose:
    """End-effector pose for a joint configuration. Pure and deterministic."""
    q = model.check_config(q)
    _, _, r, p = _chain_pass(model, q)
    return Pose(p, matrix_to_quat(r))


def link_poses(model: RobotModel, q: np.ndarray) -> list[Pose]:
    """Pose of every joint frame plus the end-effector (dof + 1 entries).

    The last entry equals forward_kinematics(model, q); consumers that only
    render (e.g. the console) never need kinematics of their own.
    """
    q = model.check_config(q)
    r = np.eye(3)
    p = np.zeros(3)
    poses = []
    for i, joint in enumerate(model.joints):
        p = p + r @ joint.translation
        r = r @ joint.rotation @ axis_angle_matrix(joint.axis, q[i])
        poses.append(Pose(p.copy(), matrix_to_quat(r)))
    ee = model.ee_offset
    poses.append(Pose(p + r @ ee[:3, 3], matrix_to_quat(r @ ee[:3, :3])))
    return poses


def jacobian(model: RobotModel, q: np.ndarray) -> np.ndarray:
    """Geometric Jacobian, 6 x dof, in the base frame.

    Column i is (axis_i x (p_ee - p_i); axis_i) for revolute joint i.
    """
    q = model.check_config(q)
    origins, axes, _, p_ee = _chain_pass(model, q)
    j = np.empty((6, model.dof))
    j[:3, :] = np.cross(axes, p_ee - origins).T
    j[3:, :] = axes.T
    return j


def damped_pseudo_inverse(j: np.ndarray, sigma_min: float = 1e-4) -> np.ndarray:
    """SVD pseudo-inverse dropping singular values below sigma_min.

    With sigma_min=0 this is the plain Moore-Penrose inverse (exact zeros
    are still dropped at numerical rank).
    """
    j = np.asarray(j, dtype=float)
    if not np.all(np.isfinite(j)):
        raise ContractViolation("jacobian contains non-finite entries")
    if sigma_min < 0:
        raise ContractViolation("sigma_min must be >= 0")
    u, s, vt = np.linalg.svd(j, full_matrices=False)
    # numerical-rank floor guards exact zeros when sigma_min == 0
    floor = np.finfo(float).eps * max(j.shape) * (s[0] if s.size else 0.0)
    inv = np.where((s >= sigma_min) & (s > floor), 1.0 / np.where(s == 0, 1.0, s), 0.0)
    return (vt.T * inv) @ u.T


def pose_error(target: Pose, current: Pose) -> np.ndarray:
    """6-vector task error: position difference and rotation log map.

    The rotation part is the axis-angle of target.orientation composed with
    the inverse of current.orientation, expressed in the base frame;
    its norm is at most pi and it is continuous near identity.
    """
    err = np.empty(6)
    err[:3] = target.position - current.position
    q_rel = quat_multiply(target.orientation, quat_conjugate(current.orientation))
    err[3:] = quat_log(q_rel)
    return err


def solve_ik(
    model: RobotModel,
    q_init: np.ndarray,
    target: Pose,
    params: IkParams = IkParams(),
) -> IkResult:
    """Iterative Jacobian pseudo-inverse IK toward a 6D pose target.

    Never mutates its inputs; identical inputs produce bit-identical
    results. Convergence means both the position and rotation residuals
    are within the tolerances of ``params``.
    """
    q_hat = model.check_config(q_init, "q_init").copy()
    iterations = 0
    while True:
        origins, axes, r, p = _chain_pass(model, q_hat)
        current = Pose(p, matrix_to_quat(r))
        err = pose_error(target, current)
        if np.linalg.norm(err[:3]) <= params.eps_pos and np.linalg.norm(err[3:]) <= params.eps_rot:
            return IkResult(True, q_hat, iterations, err)
        if iterations >= params.max_iter:
            return IkResult(False, q_hat, iterations, err, IkFailure.MAX_ITERATIONS)

        j = np.empty((6, model.dof))
        j[:3, :] = np.cross(axes, p - origins).T
        j[3:, :] = axes.T
        dq = damped_pseudo_inverse(j, params.sigma_min) @ err
        step = np.max(np.abs(dq))
        if step > params.dq_clamp:
            dq = dq * (params.dq_clamp / step)
        if np.linalg.norm(dq) < STALL_STEP_NORM:
            return IkResult(False, q_hat, iterations, err, IkFailure.SINGULARITY_STALL)
        q_hat = q_hat + dq
        iterations += 1
