import numpy as np
import pytest

from puppet.errors import ContractViolation
from puppet.follower import (
    DEFAULT_K_D,
    DEFAULT_K_P,
    FilterState,
    FollowerGains,
    FollowerState,
    filter_step,
    follower_pd,
    follower_tick,
    ingest_target,
)
from puppet.kinematics.model import planar_arm

from oracles import scalar_follower_chain


# ------------------------------------------------------------------
# low-pass filter
# ------------------------------------------------------------------

def test_filter_alpha_one_is_identity():
    f = FilterState(np.array([0.0, 0.0]), alpha=1.0)
    f2 = filter_step(f, np.array([0.3, -0.7]))
    assert np.array_equal(f2.q_tilde, [0.3, -0.7])


def test_filter_step_response_geometric_series():
    # constant unit target from zero: after n ticks the filter value is
    # 1 - (1 - alpha)^n
    f = FilterState(np.array([0.0]), alpha=0.02)
    for n in range(1, 101):
        f = filter_step(f, np.array([1.0]))
        assert abs(f.q_tilde[0] - (1.0 - 0.98**n)) <= 1e-12
    # spot value from the closed form
    f50 = 1.0 - 0.98**50
    assert abs(f50 - 0.63583) < 1e-4


def test_filter_fixed_point():
    f = FilterState(np.array([0.4, -0.2]), alpha=0.02)
    f2 = filter_step(f, np.array([0.4, -0.2]))
    assert np.array_equal(f2.q_tilde, f.q_tilde)


def test_filter_alpha_range_enforced():
    with pytest.raises(ContractViolation):
        FilterState(np.zeros(1), alpha=0.0)
    with pytest.raises(ContractViolation):
        FilterState(np.zeros(1), alpha=1.5)


def test_filter_dc_gain_is_one():
    # closed form: reaching within tol of a held target takes
    # n = log(tol) / log(1 - alpha) ticks
    alpha, tol = 0.05, 1e-6
    n = int(np.ceil(np.log(tol) / np.log(1 - alpha)))
    f = FilterState(np.array([0.0]), alpha=alpha)
    for _ in range(n):
        f = filter_step(f, np.array([1.0]))
    assert abs(f.q_tilde[0] - 1.0) <= tol


def test_smaller_alpha_never_overshoots_more():
    # step response of the filtered-target chain is monotone in alpha
    alphas = [0.01, 0.02, 0.1, 0.5]
    finals = []
    for a in alphas:
        f = FilterState(np.array([0.0]), alpha=a)
        trace = []
        for _ in range(200):
            f = filter_step(f, np.array([1.0]))
            trace.append(f.q_tilde[0])
        finals.append(trace)
    for lo, hi in zip(finals, finals[1:]):
        assert all(x <= y + 1e-12 for x, y in zip(lo, hi))


# ------------------------------------------------------------------
# PD law and gains
# ------------------------------------------------------------------

def test_default_gains_exact():
    g = FollowerGains.default()
    assert g.k_p.tolist() == [600.0, 600.0, 600.0, 250.0, 150.0, 50.0, 1.0]
    assert g.k_d.tolist() == [50.0, 50.0, 20.0, 20.0, 20.0, 10.0, 1.0]
    assert DEFAULT_K_P == (600.0, 600.0, 600.0, 250.0, 150.0, 50.0, 1.0)
    assert DEFAULT_K_D == (50.0, 50.0, 20.0, 20.0, 20.0, 10.0, 1.0)


def test_pd_zero_at_rest_on_target():
    g = FollowerGains.default()
    q = np.zeros(7)
    tau = follower_pd(q, q, np.zeros(7), g)
    assert np.array_equal(tau, np.zeros(7))


def test_pd_joint1_arithmetic():
    g = FollowerGains.default()
    q_tilde = np.zeros(7)
    q = np.zeros(7)
    q_tilde[0] = 0.1
    tau = follower_pd(q_tilde, q, np.zeros(7), g)
    assert tau[0] == pytest.approx(60.0, abs=1e-12)


def test_pd_joint6_damping_arithmetic():
    g = FollowerGains.default()
    q = np.zeros(7)
    q_dot = np.zeros(7)
    q_dot[5] = 0.5
    tau = follower_pd(q, q, q_dot, g)
    assert tau[5] == pytest.approx(-5.0, abs=1e-12)


def test_gains_must_be_positive():
    with pytest.raises(ContractViolation):
        FollowerGains(np.array([600.0, 0.0]), np.array([50.0, 50.0]))


# ------------------------------------------------------------------
# control tick
# ------------------------------------------------------------------

def _arm3():
    return planar_arm(1.0, 1.0, 0.5, home=np.array([0.3, -0.6, 0.3]))


def _gains(n):
    return FollowerGains(np.full(n, 600.0), np.full(n, 50.0))


def test_tick_at_rest_on_target_unchanged():
    model = _arm3()
    s = FollowerState.at_rest(model)
    s2 = follower_tick(s, model, _gains(3))
    assert np.array_equal(s2.q, s.q)
    assert np.array_equal(s2.q_dot, s.q_dot)
    assert s2.sim_time == pytest.approx(1e-3)


def test_tick_step_target_converges_two_seconds():
    model = _arm3()
    s = FollowerState.at_rest(model)
    target = s.q + 0.3
    s = ingest_target(s, 0, target)
    for _ in range(2000):
        s = follower_tick(s, model, _gains(3))
    assert np.max(np.abs(s.q - target)) <= 1e-3


def test_square_wave_filter_trace_bit_identical():
    # the q_tilde trace must equal an offline recomputation bit for bit
    model = planar_arm(1.0, home=np.array([0.0]))
    gains = FollowerGains(np.array([600.0]), np.array([50.0]))
    s = FollowerState.at_rest(model, alpha=0.02)
    period_samples = 10  # 50Hz samples per half-wave
    u_samples = [0.4 if (k // period_samples) % 2 == 0 else -0.4 for k in range(60)]

    trace = []
    for k, u in enumerate(u_samples):
        s = ingest_target(s, k, np.array([u]))
        for _ in range(20):
            s = follower_tick(s, model, gains)
            trace.append(float(s.filter.q_tilde[0]))

    _, ref_tilde = scalar_follower_chain(
        u_samples, alpha=0.02, k_p=600.0, k_d=50.0, dt=1e-3, ticks_per_sample=20, q0=0.0
    )
    assert trace == ref_tilde  # bitwise


def test_follower_trace_matches_offline_chain_exactly():
    # whole chain (filter + PD + integrator), same bit-exact requirement
    model = planar_arm(1.0, home=np.array([0.0]))
    gains = FollowerGains(np.array([600.0]), np.array([50.0]))
    s = FollowerState.at_rest(model, alpha=0.02)
    u_samples = [0.2, 0.2, -0.1, 0.3, 0.0, 0.25] * 5

    got_q = []
    for k, u in enumerate(u_samples):
        s = ingest_target(s, k, np.array([u]))
        for _ in range(20):
            s = follower_tick(s, model, gains)
            got_q.append(float(s.q[0]))

    ref_q, _ = scalar_follower_chain(
        u_samples, alpha=0.02, k_p=600.0, k_d=50.0, dt=1e-3, ticks_per_sample=20, q0=0.0
    )
    assert got_q == ref_q


def test_rate_decoupling_twenty_ticks_per_target():
    # 1000Hz / 50Hz = 20 control ticks between consecutive on-time targets
    from puppet.follower import CONTROL_DT, TARGET_PERIOD_TICKS

    assert TARGET_PERIOD_TICKS == 20
    assert CONTROL_DT == 1e-3
    assert round((1 / 50) / CONTROL_DT) == TARGET_PERIOD_TICKS


# ------------------------------------------------------------------
# target ingestion
# ------------------------------------------------------------------

def test_ingest_first_message():
    model = _arm3()
    s = FollowerState.at_rest(model)
    s2 = ingest_target(s, 0, s.q + 0.1)
    assert np.allclose(s2.latest_target, s.q + 0.1)
    assert s2.last_seq == 0


def test_ingest_duplicate_seq_ignored():
    model = _arm3()
    s = FollowerState.at_rest(model)
    s = ingest_target(s, 5, s.q + 0.1)
    before = s.latest_target.copy()
    s2 = ingest_target(s, 5, s.q + 0.2)
    assert np.array_equal(s2.latest_target, before)
    assert s2.dropped_msgs == 1


def test_ingest_out_of_order_ignored():
    model = _arm3()
    s = FollowerState.at_rest(model)
    s = ingest_target(s, 7, s.q + 0.1)
    s2 = ingest_target(s, 5, s.q + 0.9)
    assert np.array_equal(s2.latest_target, s.latest_target)
    assert s2.dropped_msgs == 1
    assert s2.last_seq == 7
