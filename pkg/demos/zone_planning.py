# Minimum-time traversal of a single zone: reachable exit speeds, the
# switching state where the control flips, and the resulting speed profile.
# Run: python demos/zone_planning.py  (writes zone_planning.png if matplotlib
# is available)

import numpy as np

from cavcoord import (
    Limits,
    ZoneBoundary,
    eval_trajectory,
    feedback_control,
    final_speed_bounds,
    plan_min_time,
    switching_state,
)

lim = Limits(u_min=-3.0, u_max=3.0, v_min=1.0, v_max=25.0)

# A 100 m zone entered at 10 m/s. What exit speeds are even possible?
v_lo, v_hi = final_speed_bounds(0.0, 10.0, 100.0, lim)
print(f"exit speed range over 100 m from 10 m/s: [{v_lo:.3f}, {v_hi:.3f}] m/s")

# Ask for 15 m/s at the end: accelerate hard, then brake hard.
boundary = ZoneBoundary(p_s=0.0, v_s=10.0, p_e=100.0, v_e=15.0)
p_c, v_c = switching_state(boundary, lim)
print(f"switch at p = {p_c:.4f} m, v = {v_c:.4f} m/s")

plan = plan_min_time(boundary, lim)
print(f"profile {plan.profile.value}: switch at t = {plan.t_c:.4f} s, exit at t = {plan.t_e:.4f} s")
print(f"control just before/at the switch: "
      f"{feedback_control(plan, plan.t_c - 1e-9, 0.0):+.0f} / {feedback_control(plan, plan.t_c, 0.0):+.0f} m/s^2")

# A long zone saturates: accelerate to the speed limit, cruise, brake.
long_plan = plan_min_time(ZoneBoundary(0.0, 15.0, 400.0, 15.0), lim)
print(f"\n400 m zone at 15 -> 15 m/s: {long_plan.profile.value}, "
      f"saturated={long_plan.saturated}, duration {long_plan.t_e:.4f} s "
      f"(vs {400 / 15:.2f} s at constant speed)")

ts = np.linspace(0.0, plan.t_e, 400)
states = [eval_trajectory(plan, float(t)) for t in ts]
ts2 = np.linspace(0.0, long_plan.t_e, 400)
states2 = [eval_trajectory(long_plan, float(t)) for t in ts2]

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 3.5))
    ax1.plot(ts, [s.v for s in states])
    ax1.axvline(plan.t_c, linestyle="--", linewidth=0.8)
    ax1.set_xlabel("time (s)")
    ax1.set_ylabel("speed (m/s)")
    ax1.set_title("100 m zone: accelerate then brake")
    ax2.plot(ts2, [s.v for s in states2])
    ax2.axhline(lim.v_max, linestyle="--", linewidth=0.8)
    ax2.set_xlabel("time (s)")
    ax2.set_title("400 m zone: cruise at the speed cap")
    fig.tight_layout()
    fig.savefig("zone_planning.png", dpi=120)
    print("\nwrote zone_planning.png")
except ImportError:
    print("\nmatplotlib not installed; skipping the plot")
