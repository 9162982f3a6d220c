"""Serial-chain kinematics: forward kinematics, geometric Jacobian, and
iterative pseudo-inverse IK with explicit failure reporting."""

from puppet.kinematics.transforms import (
    Pose,
    quat_multiply,
    quat_conjugate,
    quat_normalize,
    quat_to_matrix,
    matrix_to_quat,
    quat_log,
    rpy_to_matrix,
    axis_angle_matrix,
)
from puppet.kinematics.model import JointDescriptor, RobotModel, load_model, planar_arm
from puppet.kinematics.solver import (
    IkParams,
    IkFailure,
    IkResult,
    forward_kinematics,
    link_poses,
    jacobian,
    damped_pseudo_inverse,
    pose_error,
    solve_ik,
)

__all__ = [
    "Pose",
    "quat_multiply",
    "quat_conjugate",
    "quat_normalize",
    "quat_to_matrix",
    "matrix_to_quat",
    "quat_log",
    "rpy_to_matrix",
    "axis_angle_matrix",
    "JointDescriptor",
    "RobotModel",
    "load_model",
    "planar_arm",
    "IkParams",
    "IkFailure",
    "IkResult",
    "forward_kinematics",
    "link_poses",
    "jacobian",
    "damped_pseudo_inverse",
    "pose_error",
    "solve_ik",
]
