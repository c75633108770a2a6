# When a vehicle cannot enter the next zone at its earliest time, it stretches
# the current zone over the assigned horizon with the minimum-energy profile:
# linear control, quadratic speed, cubic position. This demo solves one such
# profile, shows that sinusoidal control perturbations only add cost, and
# replans mid-zone after a disturbance.
# Run: python demos/energy_fallback.py

import math

import numpy as np

from cavcoord import (
    Limits,
    TimedBoundary,
    ZoneBoundary,
    check_inactive_constraints,
    eval_energy,
    plan_min_time,
    replan_from,
    solve_energy,
)

lim = Limits(u_min=-3.0, u_max=3.0, v_min=1.0, v_max=25.0)
boundary = ZoneBoundary(p_s=0.0, v_s=15.0, p_e=400.0, v_e=15.0)

t_min = plan_min_time(boundary, lim).t_e
print(f"minimum-time traversal of the 400 m zone: {t_min:.4f} s")

# The schedule granted 2.5 s more than the minimum: spread the slack smoothly.
tb = TimedBoundary(boundary=boundary, t_entry=0.0, t_exit=t_min + 2.5)
coeffs = solve_energy(tb)
print(f"cubic coefficients: a={coeffs.a:.6f}, b={coeffs.b:.6f}, c={coeffs.c:.6f}, d={coeffs.d:.6f}")
for v in check_inactive_constraints(coeffs, tb, lim):
    print(f"  note: {v.kind} ({v.value:.3f} vs bound {v.bound}) at t = {v.t:.3f} s")

taus = np.linspace(tb.t_entry, tb.t_exit, 2001)
u_star = np.array([eval_energy(coeffs, float(t))[0] for t in taus])
base_cost = np.trapezoid(u_star**2, taus)
print(f"control energy of the cubic: {base_cost:.6f}")

# Perturb the control with endpoint-preserving sinusoids: cost only goes up.
h = tb.horizon
rel = taus - tb.t_entry
gram = np.array([[h, h**2 / 2.0], [h**2 / 2.0, h**3 / 3.0]])
for k in (1, 2, 3):
    delta = np.sin(k * math.pi * rel / h)
    moments = np.array([np.trapezoid(delta, rel), np.trapezoid(delta * rel, rel)])
    alpha, beta = np.linalg.solve(gram, moments)
    admissible = delta - alpha - beta * rel
    cost = np.trapezoid((u_star + 0.1 * admissible) ** 2, taus)
    print(f"  perturbed with mode k={k}: energy {cost:.6f} (+{cost - base_cost:.6f})")

# Mid-zone the speed turns out 0.5 m/s high; re-solve to still hit the exit.
t_now = tb.t_entry + 0.4 * h
_, state = eval_energy(coeffs, t_now)
fixed = solve_energy(
    TimedBoundary(
        boundary=ZoneBoundary(state.p, state.v + 0.5, boundary.p_e, boundary.v_e),
        t_entry=t_now,
        t_exit=tb.t_exit,
    )
)
_, end = eval_energy(fixed, tb.t_exit)
print(f"\nreplanned after +0.5 m/s disturbance at t = {t_now:.2f} s: "
      f"exit state p = {end.p:.6f} m, v = {end.v:.6f} m/s")

# On-trajectory replanning is a no-op (same four constants).
same = replan_from(coeffs, t_now, tb)
drift = max(abs(getattr(same, n) - getattr(coeffs, n)) for n in "abcd")
print(f"on-trajectory replan coefficient drift: {drift:.2e}")
