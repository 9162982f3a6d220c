"""The simulated leader arm an operator drags around.

Grasping works through a sphere around the end-effector: white when idle,
blue when the controller hovers inside it, green while grasped, red after
a fault. While grasped, the end-effector target follows the controller as
if a rigid link connected the two, captured at grasp time. New joint
targets come from the IK solver and pass a velocity gate before they are
applied; failures turn the sphere red until the operator releases and
re-grasps.

The virtual arm itself is a unit-inertia double integrator per joint,
driven by PD torques and stepped with semi-implicit Euler.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, replace

import numpy as np

from puppet.errors import ContractViolation, NumericalFault
from puppet.kinematics.model import RobotModel
from puppet.kinematics.solver import (
    IkFailure,
    IkParams,
    IkResult,
    forward_kinematics,
    solve_ik,
)
from puppet.kinematics.transforms import Pose

DEFAULT_SPHERE_RADIUS = 0.15   # m
LEADER_K_P = 600.0
LEADER_K_D = 50.0
COMMAND_DT = 0.02              # 50Hz operator/IK pipeline


class GraspMode(enum.Enum):
    IDLE = "idle"        # white sphere
    HOVER = "hover"      # blue sphere
    ENGAGED = "engaged"  # green sphere
    FAULTED = "faulted"  # red sphere

    @property
    def color(self) -> str:
        return _GRASP_COLORS[self]


_GRASP_COLORS = {
    GraspMode.IDLE: "white",
    GraspMode.HOVER: "blue",
    GraspMode.ENGAGED: "green",
    GraspMode.FAULTED: "red",
}


class FaultCause(enum.Enum):
    IK_FAILURE = "ik_failure"
    VELOCITY_LIMIT = "velocity_limit"


@dataclass(frozen=True)
class RigidLink:
    """Fixed controller-frame -> end-effector-frame transform captured at grasp."""

    transform: Pose


@dataclass(frozen=True)
class Grasp:
    mode: GraspMode = GraspMode.IDLE
    link: RigidLink | None = None
    fault: FaultCause | None = None

    def __post_init__(self):
        if self.mode is GraspMode.ENGAGED and self.link is None:
            raise ContractViolation("engaged grasp requires a captured rigid link")

    @property
    def color(self) -> str:
        return self.mode.color

    def label(self) -> str:
        if self.mode is GraspMode.FAULTED and self.fault is not None:
            return f"faulted:{self.fault.value}"
        return self.mode.value


@dataclass(frozen=True)
class LeaderState:
    q: np.ndarray
    q_dot: np.ndarray
    grasp: Grasp
    sim_time: float = 0.0

    @staticmethod
    def at_rest(model: RobotModel, q0: np.ndarray | None = None) -> "LeaderState":
        q = model.check_config(model.home if q0 is None else q0)
        return LeaderState(q=q.copy(), q_dot=np.zeros(model.dof), grasp=Grasp())


@dataclass(frozen=True)
class LeaderGains:
    k_p: np.ndarray
    k_d: np.ndarray

    def __post_init__(self):
        kp = np.asarray(self.k_p, dtype=float)
        kd = np.asarray(self.k_d, dtype=float)
        # k_d may be zero (undamped virtual arm); k_p must be positive
        if np.any(kp <= 0) or np.any(kd < 0):
            raise ContractViolation("k_p must be > 0 and k_d >= 0")
        object.__setattr__(self, "k_p", kp)
        object.__setattr__(self, "k_d", kd)

    @staticmethod
    def default(dof: int) -> "LeaderGains":
        return LeaderGains(np.full(dof, LEADER_K_P), np.full(dof, LEADER_K_D))


def grasp_update(
    state: LeaderState,
    controller: Pose,
    pressed: bool,
    model: RobotModel,
    sphere_radius: float = DEFAULT_SPHERE_RADIUS,
) -> LeaderState:
    """Advance the grasp state machine for one operator sample.

    All transitions are total. A faulted grasp stays faulted while the
    button is held; releasing clears it back to idle, after which the
    operator can hover and grasp again.
    """
    if sphere_radius <= 0:
        raise ContractViolation("sphere_radius must be > 0")
    ee = forward_kinematics(model, state.q)
    within = float(np.linalg.norm(controller.position - ee.position)) <= sphere_radius
    g = state.grasp

    if g.mode is GraspMode.FAULTED:
        new = g if pressed else Grasp(GraspMode.IDLE)
    elif g.mode is GraspMode.ENGAGED:
        if pressed:
            new = g
        else:
            new = Grasp(GraspMode.HOVER if within else GraspMode.IDLE)
    else:  # IDLE or HOVER
        if not within:
            new = Grasp(GraspMode.IDLE)
        elif pressed:
            link = RigidLink(controller.inverse().compose(ee))
            new = Grasp(GraspMode.ENGAGED, link=link)
        else:
            new = Grasp(GraspMode.HOVER)
    return replace(state, grasp=new)


def set_fault(state: LeaderState, cause: FaultCause) -> LeaderState:
    """Marks the grasp red. Only meaningful while engaged."""
    return replace(state, grasp=Grasp(GraspMode.FAULTED, fault=cause))


def target_from_controller(link: RigidLink, controller: Pose) -> Pose:
    """End-effector target implied by the controller pose and captured link."""
    return controller.compose(link.transform)


@dataclass(frozen=True)
class VelocityLimits:
    ee: float = 2.0      # m/s
    joint: float = 1.0   # rad/s per joint


@dataclass(frozen=True)
class VelocityViolation:
    which: str           # "ee" or "joint"
    joint: int | None
    rate: float


def velocity_gate(
    q_prev: np.ndarray,
    q_new: np.ndarray,
    ee_prev: Pose,
    ee_new: Pose,
    dt: float,
    limits: VelocityLimits = VelocityLimits(),
) -> VelocityViolation | None:
    """Checks one commanded step against the velocity limits.

    Returns None when the step is admissible. Symmetric under swapping
    prev/new. Callers treat a violation by faulting the grasp and not
    applying the new joint targets.
    """
    if dt <= 0:
        raise ContractViolation("dt must be > 0")
    ee_rate = float(np.linalg.norm(ee_new.position - ee_prev.position)) / dt
    if ee_rate > limits.ee:
        return VelocityViolation("ee", None, ee_rate)
    joint_rates = np.abs(np.asarray(q_new) - np.asarray(q_prev)) / dt
    worst = int(np.argmax(joint_rates))
    if joint_rates[worst] > limits.joint:
        return VelocityViolation("joint", worst, float(joint_rates[worst]))
    return None


def leader_pd_step(
    state: LeaderState,
    q_target: np.ndarray,
    gains: LeaderGains,
    dt: float,
    model: RobotModel,
) -> LeaderState:
    """One physics step of the virtual arm toward a joint target.

    Unit-inertia semi-implicit Euler; torque is proportional on the target
    error and damps the current velocity. Joints are clamped to the model
    limits with velocity zeroed at the stop.
    """
    if not (0.0 < dt <= 0.02):
        raise ContractViolation(f"dt must be in (0, 0.02], got {dt}")
    q_target = model.check_config(q_target, "q_target")
    tau = gains.k_p * (q_target - state.q) - gains.k_d * state.q_dot
    if not np.all(np.isfinite(tau)):
        raise NumericalFault("leader torque became non-finite")
    q_dot = state.q_dot + tau * dt
    q = state.q + q_dot * dt
    lo, hi = model.lower_limits, model.upper_limits
    below, above = q < lo, q > hi
    if np.any(below) or np.any(above):
        q = np.clip(q, lo, hi)
        q_dot = np.where(below | above, 0.0, q_dot)
    return LeaderState(q=q, q_dot=q_dot, grasp=state.grasp, sim_time=state.sim_time + dt)


class LeaderArm:
    """Single-owner wrapper driving the leader at the two system rates.

    ``operator_update`` runs at the 50Hz command rate: grasp machine, IK,
    velocity gate. ``physics_tick`` runs at the 1000Hz simulation rate.
    Snapshots handed out (q, grasp) are immutable values.
    """

    def __init__(
        self,
        model: RobotModel,
        q0: np.ndarray | None = None,
        gains: LeaderGains | None = None,
        ik_params: IkParams = IkParams(),
        limits: VelocityLimits = VelocityLimits(),
        sphere_radius: float = DEFAULT_SPHERE_RADIUS,
        command_dt: float = COMMAND_DT,
    ):
        self.model = model
        self.gains = gains or LeaderGains.default(model.dof)
        self.ik_params = ik_params
        self.limits = limits
        self.sphere_radius = sphere_radius
        self.command_dt = command_dt
        self.state = LeaderState.at_rest(model, q0)
        self.q_cmd = self.state.q.copy()
        self.ee_cmd = forward_kinematics(model, self.q_cmd)
        self.gripper_closed = False
        self.ik_failures = 0
        self.velocity_faults = 0
        self.last_ik: IkResult | None = None

    @property
    def engaged(self) -> bool:
        return self.state.grasp.mode is GraspMode.ENGAGED

    def operator_update(self, controller: Pose | None, pressed: bool, trigger: bool) -> None:
        """One 50Hz operator sample: grasp transitions, then IK + velocity gate."""
        if controller is None:
            controller, pressed, trigger = _FAR_AWAY, False, False
        was_engaged = self.engaged
        self.state = grasp_update(self.state, controller, pressed, self.model, self.sphere_radius)
        self.gripper_closed = bool(trigger) if self.engaged else self.gripper_closed
        if not self.engaged:
            self.q_cmd = self.state.q.copy()
            return
        if not was_engaged:
            # fresh grasp: the command baseline is wherever the arm is now
            self.q_cmd = self.state.q.copy()
            self.ee_cmd = forward_kinematics(self.model, self.q_cmd)
        target = target_from_controller(self.state.grasp.link, controller)
        result = solve_ik(self.model, self.q_cmd, target, self.ik_params)
        self.last_ik = result
        if not result.converged:
            self.ik_failures += 1
            self.state = set_fault(self.state, FaultCause.IK_FAILURE)
            return
        ee_new = forward_kinematics(self.model, result.q_hat)
        violation = velocity_gate(
            self.q_cmd, result.q_hat, self.ee_cmd, ee_new, self.command_dt, self.limits
        )
        if violation is not None:
            self.velocity_faults += 1
            self.last_ik = IkResult(
                False, result.q_hat, result.iterations, result.residual,
                IkFailure.STEP_VELOCITY_EXCEEDED,
            )
            self.state = set_fault(self.state, FaultCause.VELOCITY_LIMIT)
            return
        self.q_cmd = result.q_hat
        self.ee_cmd = ee_new

    def physics_tick(self, dt: float) -> None:
        """One 1000Hz step. Disengaged arms hold (and damp toward) their
        current position; engaged or faulted arms keep settling on the last
        accepted command."""
        mode = self.state.grasp.mode
        if mode in (GraspMode.ENGAGED, GraspMode.FAULTED):
            q_target = self.q_cmd
        else:
            q_target = self.state.q
        self.state = leader_pd_step(self.state, q_target, self.gains, dt, self.model)

    def teleport(self, dq: np.ndarray) -> None:
        """Fault-injection hook: instantly offsets the joint configuration."""
        q = self.model.clamp(self.state.q + np.asarray(dq, dtype=float))
        self.state = replace(self.state, q=q)
        self.q_cmd = q.copy()
        self.ee_cmd = forward_kinematics(self.model, self.q_cmd)

    def realign_to(self, q_follower: np.ndarray) -> None:
        """Snaps the arm onto the follower configuration with zero velocity."""
        q = self.model.check_config(q_follower).copy()
        self.adopt(
            LeaderState(
                q=q, q_dot=np.zeros(self.model.dof), grasp=Grasp(), sim_time=self.state.sim_time
            )
        )

    def adopt(self, state: LeaderState) -> None:
        """Replace the arm state wholesale (realignment), resetting the command."""
        self.state = state
        self.q_cmd = state.q.copy()
        self.ee_cmd = forward_kinematics(self.model, self.q_cmd)


_FAR_AWAY = Pose(np.array([1e3, 1e3, 1e3]))
