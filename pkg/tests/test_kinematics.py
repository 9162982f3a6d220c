import numpy as np
import pytest

from puppet.errors import ContractViolation, ModelError
from puppet.kinematics import (
    IkFailure,
    IkParams,
    Pose,
    damped_pseudo_inverse,
    forward_kinematics,
    jacobian,
    link_poses,
    planar_arm,
    pose_error,
    solve_ik,
)
from puppet.kinematics.transforms import quat_log, quat_multiply, quat_conjugate

from oracles import brute_force_fk, two_link_ik


# ------------------------------------------------------------------
# forward kinematics
# ------------------------------------------------------------------

def test_fk_straight_two_link(two_link):
    pose = forward_kinematics(two_link, np.zeros(2))
    assert np.allclose(pose.position, [2.0, 0.0, 0.0], atol=1e-12)
    assert np.allclose(pose.orientation, [1, 0, 0, 0], atol=1e-12)


def test_fk_two_link_quarter_turn(two_link):
    pose = forward_kinematics(two_link, [np.pi / 2, 0.0])
    assert np.allclose(pose.position, [0.0, 2.0, 0.0], atol=1e-12)


def test_fk_matches_brute_force_oracle(panda, rng):
    for _ in range(100):
        q = panda.random_config(rng)
        pose = forward_kinematics(panda, q)
        ref_pos, ref_rot = brute_force_fk(panda, q)
        assert np.allclose(pose.position, ref_pos, atol=1e-9)
        from puppet.kinematics.transforms import quat_to_matrix

        assert np.allclose(quat_to_matrix(pose.orientation), ref_rot, atol=1e-9)


def test_fk_rejects_length_mismatch(panda):
    with pytest.raises(ModelError):
        forward_kinematics(panda, np.zeros(6))


def test_link_poses_last_equals_fk(panda, rng):
    q = panda.random_config(rng)
    poses = link_poses(panda, q)
    assert len(poses) == panda.dof + 1
    assert poses[-1].allclose(forward_kinematics(panda, q), atol=1e-12)


# ------------------------------------------------------------------
# jacobian
# ------------------------------------------------------------------

def test_jacobian_single_joint_unit_lever():
    arm = planar_arm(1.0)
    j = jacobian(arm, np.zeros(1))
    assert np.allclose(j[:, 0], [0, 1, 0, 0, 0, 1], atol=1e-12)


def test_jacobian_orientation_rows_are_axes(panda, rng):
    # definition of the geometric jacobian: bottom rows = world joint axes
    q = panda.random_config(rng)
    j = jacobian(panda, q)
    axes = j[3:, :]
    for col in range(panda.dof):
        assert np.isclose(np.linalg.norm(axes[:, col]), 1.0, atol=1e-9)


def _finite_difference_jacobian(model, q, h=1e-6):
    n = len(q)
    out = np.zeros((6, n))
    for i in range(n):
        qp, qm = q.copy(), q.copy()
        qp[i] += h
        qm[i] -= h
        pp, pm = forward_kinematics(model, qp), forward_kinematics(model, qm)
        out[:3, i] = (pp.position - pm.position) / (2 * h)
        rel = quat_multiply(pp.orientation, quat_conjugate(pm.orientation))
        out[3:, i] = quat_log(rel) / (2 * h)
    return out


def test_jacobian_matches_finite_differences(panda, rng):
    worst = 0.0
    for _ in range(100):
        q = panda.random_config(rng)
        j = jacobian(panda, q)
        fd = _finite_difference_jacobian(panda, q)
        worst = max(worst, float(np.max(np.abs(j - fd))))
    assert worst <= 1e-5


# ------------------------------------------------------------------
# damped pseudo-inverse
# ------------------------------------------------------------------

def test_pinv_identity():
    assert np.allclose(damped_pseudo_inverse(np.eye(6), 0.0), np.eye(6), atol=1e-12)


def test_pinv_zero_row_maps_to_zero():
    j = np.vstack([np.eye(5, 6), np.zeros(6)])
    jp = damped_pseudo_inverse(j, 0.0)
    err = np.zeros(6)
    err[5] = 1.0  # only the dead component is in error
    assert np.allclose(jp @ err, np.zeros(6), atol=1e-12)


def test_pinv_moore_penrose_identities(rng):
    for _ in range(20):
        j = rng.normal(size=(6, 7))
        jp = damped_pseudo_inverse(j, 0.0)
        assert np.allclose(j @ jp @ j, j, atol=1e-9)
        assert np.allclose(jp @ j @ jp, jp, atol=1e-9)
        assert np.allclose((j @ jp).T, j @ jp, atol=1e-9)
        assert np.allclose((jp @ j).T, jp @ j, atol=1e-9)


def test_pinv_truncation_drops_small_directions():
    j = np.diag([1.0, 1e-6])
    jp = damped_pseudo_inverse(j, 1e-4)
    assert np.allclose(jp, np.diag([1.0, 0.0]), atol=1e-12)


def test_pinv_rejects_non_finite():
    with pytest.raises(ContractViolation):
        damped_pseudo_inverse(np.array([[np.nan, 0.0]]), 0.0)


# ------------------------------------------------------------------
# pose error
# ------------------------------------------------------------------

def test_pose_error_identical_is_zero():
    p = Pose(np.array([0.3, -0.2, 0.5]))
    assert np.allclose(pose_error(p, p), np.zeros(6), atol=1e-12)


def test_pose_error_pure_translation():
    a = Pose(np.array([0.1, 0.0, 0.0]))
    b = Pose(np.zeros(3))
    assert np.allclose(pose_error(a, b), [0.1, 0, 0, 0, 0, 0], atol=1e-12)


def test_pose_error_z_quarter_rotation():
    target = Pose(np.zeros(3), np.array([np.cos(np.pi / 4), 0, 0, np.sin(np.pi / 4)]))
    current = Pose(np.zeros(3))
    assert np.allclose(pose_error(target, current), [0, 0, 0, 0, 0, np.pi / 2], atol=1e-12)


# ------------------------------------------------------------------
# solve_ik
# ------------------------------------------------------------------

def test_ik_fixed_point(panda):
    target = forward_kinematics(panda, panda.home)
    res = solve_ik(panda, panda.home, target)
    assert res.converged
    assert res.iterations <= 1
    assert np.allclose(res.q_hat, panda.home, atol=1e-12)
    assert res.failure is IkFailure.NONE


def test_ik_two_link_matches_closed_form(two_link):
    x, y = 1.2, 0.8
    sols = two_link_ik(x, y)
    assert sols is not None
    # pin the target orientation to the elbow-down branch so the 6D
    # problem has that exact solution
    q1, q2 = sols[0]
    target = forward_kinematics(two_link, [q1, q2])
    assert np.allclose(target.position[:2], [x, y], atol=1e-12)

    params = IkParams(eps_pos=1e-9, eps_rot=1e-9, max_iter=100)
    res = solve_ik(two_link, np.array([0.1, 0.1]), target, params)
    assert res.converged
    assert np.linalg.norm(forward_kinematics(two_link, res.q_hat).position - target.position) <= 1e-6
    matches_any = any(
        np.allclose(res.q_hat, np.array(sol), atol=1e-6) for sol in sols
    )
    assert matches_any


def test_ik_unreachable_target_fails(two_link):
    target = Pose(np.array([5.0, 0.0, 0.0]))
    res = solve_ik(two_link, np.array([0.3, 0.3]), target)
    assert not res.converged
    assert res.failure in (IkFailure.MAX_ITERATIONS, IkFailure.SINGULARITY_STALL)


def test_ik_roundtrip_convergence(panda, rng):
    params = IkParams()
    trials, converged = 200, 0
    for _ in range(trials):
        q = panda.random_config(rng)
        target = forward_kinematics(panda, q)
        q_init = q + rng.uniform(-0.1, 0.1, panda.dof)
        res = solve_ik(panda, q_init, target, params)
        if res.converged:
            converged += 1
            assert np.linalg.norm(res.residual[:3]) <= params.eps_pos
            assert np.linalg.norm(res.residual[3:]) <= params.eps_rot
            assert res.iterations <= params.max_iter
    assert converged / trials >= 0.99


def test_ik_deterministic(panda, rng):
    q = panda.random_config(rng)
    target = forward_kinematics(panda, q)
    q_init = panda.home
    a = solve_ik(panda, q_init, target)
    b = solve_ik(panda, q_init, target)
    assert a.converged == b.converged
    assert a.iterations == b.iterations
    assert a.q_hat.tolist() == b.q_hat.tolist()
    assert a.residual.tolist() == b.residual.tolist()


def test_ik_never_mutates_inputs(panda):
    q_init = panda.home.copy()
    target = forward_kinematics(panda, panda.home + 0.05)
    solve_ik(panda, q_init, target)
    assert np.array_equal(q_init, panda.home)


def test_ik_step_clamp(panda, rng, monkeypatch):
    # every iterate must move each joint by at most dq_clamp
    from puppet.kinematics import solver

    seen = []
    original = solver.damped_pseudo_inverse

    def spy(j, sigma_min):
        return original(j, sigma_min)

    q = panda.random_config(rng)
    target = forward_kinematics(panda, q)
    params = IkParams(dq_clamp=0.05)
    res = solve_ik(panda, panda.home, target, params)
    # reconstruct the trajectory: replay the loop and track step sizes
    q_hat = panda.home.copy()
    for _ in range(res.iterations):
        err = pose_error(target, forward_kinematics(panda, q_hat))
        dq = damped_pseudo_inverse(jacobian(panda, q_hat), params.sigma_min) @ err
        step = np.max(np.abs(dq))
        if step > params.dq_clamp:
            dq = dq * (params.dq_clamp / step)
        assert np.max(np.abs(dq)) <= params.dq_clamp + 1e-12
        q_hat = q_hat + dq
    assert np.allclose(q_hat, res.q_hat, atol=1e-12)
