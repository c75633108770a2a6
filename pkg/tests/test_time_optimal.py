import math

import numpy as np
import pytest

from cavcoord import (
    InfeasibleBoundary,
    Limits,
    NoSwitchingPoint,
    Profile,
    VehicleState,
    ZoneBoundary,
    eval_trajectory,
    feedback_control,
    final_speed_bounds,
    integrate_const_accel,
    plan_min_time,
    process_time,
    switching_state,
)
from cavcoord.time_optimal import sample_trajectory
from cavcoord.topology import Zone, ZoneKind

from oracles import random_interior_instances, terminal_speed_after_distance


def test_final_speed_bounds_10m(limits_iv):
    # oracle: terminal speeds of full-throttle / full-brake arcs over 10 m
    lo, hi = final_speed_bounds(0.0, 10.0, 10.0, limits_iv)
    assert hi == pytest.approx(terminal_speed_after_distance(10.0, 3.0, 10.0), abs=1e-12)
    assert lo == pytest.approx(terminal_speed_after_distance(10.0, -3.0, 10.0), abs=1e-12)
    assert (lo, hi) == (pytest.approx(6.324555320336759), pytest.approx(12.649110640673518))


def test_final_speed_bounds_clamped(limits_iv):
    # over 100 m the brake arc stops before the end (negative radicand) and the
    # throttle arc exceeds the speed limit, so both sides clamp
    assert terminal_speed_after_distance(10.0, -3.0, 100.0) is None
    lo, hi = final_speed_bounds(0.0, 10.0, 100.0, limits_iv)
    assert (lo, hi) == (1.0, 25.0)
    assert math.sqrt(2 * 3 * 100 + 100) > 25.0


def test_final_speed_bounds_degenerate_zone(limits_iv):
    lo, hi = final_speed_bounds(0.0, 10.0, 1e-9, limits_iv)
    assert lo == pytest.approx(10.0, abs=1e-4)
    assert hi == pytest.approx(10.0, abs=1e-4)


def test_switching_state_symmetric_midpoint(limits_iv):
    p_c, v_c = switching_state(ZoneBoundary(5.0, 12.0, 35.0, 12.0), limits_iv)
    assert p_c == pytest.approx(20.0, rel=1e-12)
    assert v_c > 12.0


def test_switching_state_derived_case(limits_iv):
    p_c, v_c = switching_state(ZoneBoundary(0.0, 10.0, 100.0, 15.0), limits_iv)
    assert p_c == pytest.approx(60.416666666666664, rel=1e-12)
    assert v_c == pytest.approx(21.50581316760657, rel=1e-12)
    # verify by forward integration: full throttle to p_c, full brake to p_e
    t1 = (v_c - 10.0) / 3.0
    s = integrate_const_accel(VehicleState(0.0, 10.0), 3.0, t1)
    assert s.p == pytest.approx(p_c, abs=1e-9)
    t2 = (15.0 - v_c) / -3.0
    s = integrate_const_accel(s, -3.0, t2)
    assert s.p == pytest.approx(100.0, abs=1e-9)
    assert s.v == pytest.approx(15.0, abs=1e-9)


def test_switching_state_boundary_case(limits_iv):
    v_hi = math.sqrt(2 * 3 * 10 + 100)
    with pytest.raises(NoSwitchingPoint):
        switching_state(ZoneBoundary(0.0, 10.0, 10.0, v_hi), limits_iv)


def test_switching_state_infeasible(limits_iv):
    with pytest.raises(InfeasibleBoundary):
        switching_state(ZoneBoundary(0.0, 10.0, 10.0, 20.0), limits_iv)


def test_plan_min_time_100m(limits_iv):
    plan = plan_min_time(ZoneBoundary(0.0, 10.0, 100.0, 15.0), limits_iv)
    assert plan.profile is Profile.ACCEL_THEN_DECEL
    assert plan.t_c == pytest.approx(3.8352710558688563, rel=1e-12)
    assert plan.t_e == pytest.approx(6.003875445071046, rel=1e-12)
    state = eval_trajectory(plan, plan.t_c)
    assert state.p == pytest.approx(plan.p_c, abs=1e-9)
    assert state.v == pytest.approx(plan.v_c, abs=1e-9)


def test_plan_min_time_100m_grid_oracle(limits_iv):
    # brute-force over full-throttle-to-x-then-full-brake profiles, 1e-4 m grid
    plan = plan_min_time(ZoneBoundary(0.0, 10.0, 100.0, 15.0), limits_iv)
    x = np.arange(1e-4, 100.0, 1e-4)
    v1sq = 100.0 + 6.0 * x
    with np.errstate(invalid="ignore"):
        ve = np.sqrt(v1sq - 6.0 * (100.0 - x))
    i = int(np.nanargmin(np.abs(ve - 15.0)))
    v1 = math.sqrt(v1sq[i])
    t_grid = (v1 - 10.0) / 3.0 + (15.0 - v1) / -3.0
    assert abs(ve[i] - 15.0) < 1e-3
    assert plan.t_e == pytest.approx(t_grid, abs=1e-4)


def test_plan_min_time_symmetric(limits_iv):
    plan = plan_min_time(ZoneBoundary(0.0, 15.0, 30.0, 15.0), limits_iv)
    assert plan.v_c == pytest.approx(17.74823934929885, rel=1e-12)
    assert plan.v_c < limits_iv.v_max
    assert plan.t_e == pytest.approx(1.832159566199233, rel=1e-12)
    assert plan.t_c == pytest.approx(plan.t_e / 2.0, rel=1e-12)


def test_plan_pure_accel(limits_iv):
    v_hi = math.sqrt(2 * 3 * 10 + 100)  # below v_max, so the raw bound binds
    plan = plan_min_time(ZoneBoundary(0.0, 10.0, 10.0, v_hi), limits_iv)
    assert plan.profile is Profile.PURE_ACCEL
    assert plan.t_e == pytest.approx((v_hi - 10.0) / 3.0, rel=1e-12)
    assert len(plan.phases) == 1
    assert plan.t_c == plan.t_e


def test_plan_pure_decel(limits_iv):
    v_lo = math.sqrt(-2 * 3 * 10 + 144)
    plan = plan_min_time(ZoneBoundary(0.0, 12.0, 10.0, v_lo), limits_iv)
    assert plan.profile is Profile.PURE_DECEL
    assert plan.t_c == 0.0
    assert plan.t_e == pytest.approx((v_lo - 12.0) / -3.0, rel=1e-12)


def test_plan_infeasible_exit_speed(limits_iv):
    with pytest.raises(InfeasibleBoundary):
        plan_min_time(ZoneBoundary(0.0, 10.0, 10.0, 20.0), limits_iv)
    with pytest.raises(InfeasibleBoundary):
        plan_min_time(ZoneBoundary(0.0, 10.0, 10.0, 0.5), limits_iv)


def test_plan_saturated_cruise(limits_iv):
    # 400 m at 15 -> 15: the unconstrained switching speed would exceed 25 m/s
    plan = plan_min_time(ZoneBoundary(0.0, 15.0, 400.0, 15.0), limits_iv)
    assert plan.profile is Profile.ACCEL_CRUISE_DECEL
    assert plan.saturated
    assert plan.v_c == limits_iv.v_max
    assert plan.t_e == pytest.approx(52.0 / 3.0, rel=1e-12)
    assert len(plan.phases) == 3
    # cruise phase keeps the speed cap; endpoints are met
    for t in np.linspace(0.0, plan.t_e, 200):
        s = eval_trajectory(plan, float(t))
        assert s.v <= limits_iv.v_max + 1e-9
    end = eval_trajectory(plan, plan.t_e)
    assert end.p == pytest.approx(400.0, abs=1e-9)
    assert end.v == pytest.approx(15.0, abs=1e-9)


def test_process_time_merging():
    zone = Zone(id=1, kind=ZoneKind.MERGING, length=30.0)
    b = ZoneBoundary(0.0, 15.0, 30.0, 15.0)
    lim = Limits(-3.0, 3.0, 1.0, 25.0)
    assert process_time(zone, b, lim, 15.0) == 2.0


def test_process_time_merging_requires_vz():
    zone = Zone(id=1, kind=ZoneKind.MERGING, length=30.0)
    b = ZoneBoundary(0.0, 14.0, 30.0, 15.0)
    with pytest.raises(ValueError):
        process_time(zone, b, Limits(-3.0, 3.0, 1.0, 25.0), 15.0)


def test_process_time_regular(limits_iv):
    zone = Zone(id=11, kind=ZoneKind.REGULAR, length=30.0)
    b = ZoneBoundary(0.0, 15.0, 30.0, 15.0)
    assert process_time(zone, b, limits_iv, 15.0) == pytest.approx(1.832159566199233, rel=1e-12)


def test_process_time_degenerate_zone(limits_iv):
    zone = Zone(id=1, kind=ZoneKind.MERGING, length=30.0)
    assert process_time(zone, ZoneBoundary(10.0, 15.0, 10.0, 15.0), limits_iv, 15.0) == 0.0
    reg = Zone(id=3, kind=ZoneKind.REGULAR, length=30.0)
    assert process_time(reg, ZoneBoundary(10.0, 15.0, 10.0, 15.0), limits_iv, 15.0) == 0.0


def test_feedback_switch_convention(limits_iv):
    plan = plan_min_time(ZoneBoundary(0.0, 10.0, 100.0, 15.0), limits_iv)
    t0 = 7.0
    assert feedback_control(plan, t0, t0) == limits_iv.u_max
    assert feedback_control(plan, t0 + plan.t_e, t0) == limits_iv.u_min
    assert feedback_control(plan, t0 + plan.t_c - 1e-9, t0) == limits_iv.u_max
    assert feedback_control(plan, t0 + plan.t_c, t0) == limits_iv.u_min
    with pytest.raises(ValueError):
        feedback_control(plan, t0 - 0.1, t0)
    with pytest.raises(ValueError):
        feedback_control(plan, t0 + plan.t_e + 0.1, t0)


def test_feedback_cruise_returns_zero(limits_iv):
    plan = plan_min_time(ZoneBoundary(0.0, 15.0, 400.0, 15.0), limits_iv)
    assert feedback_control(plan, plan.t_e / 2.0, 0.0) == 0.0


def test_eval_endpoints_and_switch(limits_iv):
    plan = plan_min_time(ZoneBoundary(0.0, 10.0, 100.0, 15.0), limits_iv)
    s0 = eval_trajectory(plan, 0.0)
    assert (s0.p, s0.v) == (0.0, 10.0)
    se = eval_trajectory(plan, plan.t_e)
    assert se.p == pytest.approx(100.0, abs=1e-9)
    assert se.v == pytest.approx(15.0, abs=1e-9)
    sc = eval_trajectory(plan, plan.t_c)
    assert sc.p == pytest.approx(60.416666666666664, abs=1e-9)
    assert sc.v == pytest.approx(21.50581316760657, abs=1e-9)
    with pytest.raises(ValueError):
        eval_trajectory(plan, -0.1)
    with pytest.raises(ValueError):
        eval_trajectory(plan, plan.t_e + 0.1)


def test_eval_continuity_at_switch(limits_iv):
    plan = plan_min_time(ZoneBoundary(0.0, 10.0, 100.0, 15.0), limits_iv)
    eps = 1e-12
    before = eval_trajectory(plan, plan.t_c - eps)
    after = eval_trajectory(plan, plan.t_c + eps)
    assert before.p == pytest.approx(after.p, abs=1e-9)
    assert before.v == pytest.approx(after.v, abs=1e-9)


def test_random_plans_properties():
    rng = np.random.default_rng(7)
    dp, v_s, v_e, u_min, u_max, v_min, v_max = random_interior_instances(rng, 1000)
    for k in range(dp.size):
        lim = Limits(u_min=u_min[k], u_max=u_max[k], v_min=v_min[k], v_max=v_max[k])
        b = ZoneBoundary(0.0, v_s[k], dp[k], v_e[k])
        plan = plan_min_time(b, lim)
        assert plan.profile is Profile.ACCEL_THEN_DECEL
        assert not plan.saturated
        assert 0.0 <= plan.t_c <= plan.t_e
        assert b.p_s <= plan.p_c <= b.p_e
        end = eval_trajectory(plan, plan.t_e)
        assert end.p == pytest.approx(b.p_e, abs=1e-9)
        assert end.v == pytest.approx(b.v_e, abs=1e-9)
        # both equations of the switching-state system hold
        r1 = plan.v_c**2 - b.v_s**2 - 2.0 * lim.u_max * (plan.p_c - b.p_s)
        r2 = b.v_e**2 - plan.v_c**2 - 2.0 * lim.u_min * (b.p_e - plan.p_c)
        assert abs(r1) < 1e-9 * max(1.0, plan.v_c**2)
        assert abs(r2) < 1e-9 * max(1.0, plan.v_c**2)
        # position strictly increasing along the plan
        ts = np.linspace(0.0, plan.t_e, 50)
        ps, vs_, _ = sample_trajectory(plan, ts)
        assert np.all(np.diff(ps) > 0.0)
        assert np.all(vs_ >= min(b.v_s, b.v_e) - 1e-9)
