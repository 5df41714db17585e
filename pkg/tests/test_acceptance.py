"""Acceptance suite: one criterion per test, one PASS/FAIL line per criterion.

Run with `pytest -s tests/test_acceptance.py` to see the report lines.
Reference values for the quadrature criteria are the published four-decimal
figures; everything else is checked against closed forms, independent
oracles, or the documented tolerances.
"""

import math
import time

import numpy as np

from gradflow import (
    AdmissibilityConfig,
    ControllerParams,
    admissibility_measure,
    control_value,
    integrate_gradient_flow,
    make_controller,
    make_v_alpha,
    preset_sim_config,
    simulate,
    table1,
    tracking_deviation,
)
from gradflow.kinematics import frame_inverse, frame_matrix, lie_bracket, vector_fields
from gradflow.presets import PRESETS
from gradflow.simulator import SimConfig, TERMINATED_GOAL

TABLE1_REFERENCE = (0.3333, 0.3056, 0.3658, 0.4716, 0.2123, 0.2228, 0.4219)
V_ALPHA_REFERENCE = {2.0: 0.1403, 4.0: 0.0962, 10.0: 0.0906}


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    assert ok, f"{name}: {detail}"


def test_criterion_1_table1_reproduction():
    t0 = time.perf_counter()
    results = table1()  # X = [-1,1]^3, q = 2, midpoint 200 cells/axis
    elapsed = time.perf_counter() - t0
    worst = 0.0
    for (coeffs, res), ref in zip(results, TABLE1_REFERENCE):
        worst = max(worst, abs(res.value - ref))
    ok = worst <= 0.005 and elapsed <= 60.0
    report("criterion 1 (seven-cell quadratic sweep)", ok,
           f"max |J - ref| = {worst:.6f} (tol 0.005), runtime {elapsed:.1f}s (cap 60s)")


def test_criterion_2_v_alpha_sequence():
    values = {}
    for alpha in (2.0, 4.0, 10.0):
        values[alpha] = admissibility_measure(make_v_alpha(alpha)).value
    worst = max(abs(values[a] - ref) for a, ref in V_ALPHA_REFERENCE.items())
    decreasing = values[2.0] > values[4.0] > values[10.0]
    ok = worst <= 0.005 and decreasing
    report("criterion 2 (anisotropic cost sequence)", ok,
           f"J = {values[2.0]:.4f} > {values[4.0]:.4f} > {values[10.0]:.4f}, "
           f"max |J - ref| = {worst:.6f} (tol 0.005), decreasing = {decreasing}")


def test_criterion_3_residual_oracle_equivalence():
    from gradflow import rho, rho_bruteforce
    rng = np.random.default_rng(1234)
    t0 = time.perf_counter()
    worst = 0.0
    for _ in range(500):
        x = rng.uniform(-5.0, 5.0, size=3)
        p = rng.uniform(-1.0, 1.0, size=3)
        norm = np.linalg.norm(p)
        if norm > 0:
            p *= rng.uniform(0.0, 10.0) / norm
        worst = max(worst, abs(rho(x, p) - rho_bruteforce(x, p, coarse_range=10.0)))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-4 and elapsed <= 10.0
    report("criterion 3 (closed-form residual vs brute force)", ok,
           f"max disagreement = {worst:.2e} on 500 pairs (tol 1e-4), "
           f"runtime {elapsed:.1f}s (cap 10s)")


def test_criterion_4_frame_identity_and_bracket():
    rng = np.random.default_rng(4321)
    eye = np.eye(3)
    worst_frame = 0.0
    worst_bracket = 0.0
    step = 1e-5
    for _ in range(1000):
        x = rng.uniform(-10.0, 10.0, size=3)
        worst_frame = max(worst_frame,
                          np.abs(frame_matrix(x) @ frame_inverse(x) - eye).max())
        fd = np.zeros((3, 3, 2))
        for j in range(3):
            hi, lo = x.copy(), x.copy()
            hi[j] += step
            lo[j] -= step
            f1h, f2h = vector_fields(hi)
            f1l, f2l = vector_fields(lo)
            fd[:, j, 0] = (f1h - f1l) / (2 * step)
            fd[:, j, 1] = (f2h - f2l) / (2 * step)
        f1, f2 = vector_fields(x)
        bracket_fd = fd[:, :, 1] @ f1 - fd[:, :, 0] @ f2
        worst_bracket = max(worst_bracket, np.abs(lie_bracket(x) - bracket_fd).max())
    ok = worst_frame <= 1e-12 and worst_bracket <= 1e-8
    report("criterion 4 (frame identity and bracket)", ok,
           f"max |F F^-1 - I| = {worst_frame:.2e} (tol 1e-12), "
           f"max bracket error = {worst_bracket:.2e} (tol 1e-8), 1000 states")


def test_criterion_5_scale_invariance():
    cfg = AdmissibilityConfig(grid_n=200)
    base = admissibility_measure(make_v_alpha(1.0), cfg=cfg).value
    scaled = admissibility_measure(make_v_alpha(1.0).scaled(3.0), cfg=cfg).value
    diff = abs(scaled - base)
    ok = diff <= 0.001
    report("criterion 5 (scale invariance of the cost)", ok,
           f"|J[3V] - J[V]| = {diff:.2e} (tol 0.001)")


def test_criterion_6_preset_convergence():
    details = []
    ok = True
    for name in ("P1", "P2", "P3", "P4"):
        for mode in ("continuous", "sampling"):
            t0 = time.perf_counter()
            traj = simulate(preset_sim_config(name, loop_mode=mode, bounds_mode="ideal"))
            elapsed = time.perf_counter() - t0
            v_drop = traj.potential_values[-1] < traj.potential_values[0]
            run_ok = (traj.terminated == TERMINATED_GOAL
                      and traj.convergence_time < 600.0
                      and v_drop and elapsed <= 120.0)
            ok = ok and run_ok
            details.append(f"{name}/{mode}/ideal t={traj.convergence_time:.1f}s")

            t0 = time.perf_counter()
            clamped = simulate(preset_sim_config(name, loop_mode=mode, bounds_mode="clamp"))
            elapsed = time.perf_counter() - t0
            planar = float(np.hypot(clamped.final_state[0], clamped.final_state[1]))
            max_u1 = float(np.abs(clamped.column("u1")).max())
            max_u2 = float(np.abs(clamped.column("u2")).max())
            run_ok = (planar < 0.1 and max_u1 <= 0.22 and max_u2 <= 2.84
                      and elapsed <= 120.0)
            ok = ok and run_ok
            details.append(
                f"{name}/{mode}/clamp planar={planar:.3f} sat={clamped.saturation_count}"
            )
    report("criterion 6 (preset convergence at desk scale)", ok, "; ".join(details))


def test_criterion_7_epsilon_refinement():
    potential = make_v_alpha(1.0)
    gamma = 0.05
    reference = integrate_gradient_flow(potential.scaled(gamma), [-0.5, -0.5, 0.0],
                                        t_max=2.0, h=1e-3)
    deviations = []
    for eps in (0.5, 0.1, 0.02):
        cp = eps / 2000.0
        controller = ControllerParams(epsilon=eps, gamma=gamma, loop_mode="sampling")
        cfg = SimConfig(potential=potential, controller=controller,
                        x0=(-0.5, -0.5, 0.0), goal_tol=0.0, t_max=2.0,
                        h=cp, control_period=cp)
        deviations.append(tracking_deviation(simulate(cfg), reference))
    ok = deviations[0] >= deviations[1] >= deviations[2]
    report("criterion 7 (oscillation-period refinement)", ok,
           "deviations " + " >= ".join(f"{d:.4f}" for d in deviations))


def test_criterion_8_gradient_flow_exactness():
    traj = integrate_gradient_flow(make_v_alpha(1.0), [-0.5, -0.5, 0.0],
                                   t_max=1.0, h=1e-3)
    expected = math.exp(-2.0) * np.array([-0.5, -0.5, 0.0])
    err = np.abs(traj.final_state - expected).max()
    ok = err <= 1e-6
    report("criterion 8 (gradient-flow closed form)", ok,
           f"max |x(1) - exp(-2) x0| = {err:.2e} (tol 1e-6)")


def test_criterion_9_controller_algebra():
    accepted = []
    for name, p in PRESETS.items():
        try:
            make_controller(ControllerParams(k1=p.k1, k2=p.k2))
            accepted.append(name)
        except ValueError:
            pass
    rejected = False
    try:
        ControllerParams(k1=1.0, k2=1.0)
    except ValueError:
        rejected = True

    ctrl = make_controller(ControllerParams())
    zero_ok = all(
        np.array_equal(control_value(ctrl, np.zeros(3), t)[0], np.zeros(2))
        for t in (0.0, 0.4, 7.3)
    )

    rng = np.random.default_rng(99)
    a = np.array([0.03, -0.02, 0.017])
    period_err = 0.0
    for t in rng.uniform(0.0, 10.0, size=100):
        u0, _ = control_value(ctrl, a, float(t))
        u1, _ = control_value(ctrl, a, float(t) + 1.0)
        period_err = max(period_err, float(np.abs(u1 - u0).max()))

    ok = (len(accepted) == 4 and rejected and zero_ok and period_err <= 1e-12)
    report("criterion 9 (controller algebra)", ok,
           f"presets accepted = {sorted(accepted)}, (1,1) rejected = {rejected}, "
           f"zero amplitude -> zero control = {zero_ok}, "
           f"periodicity error = {period_err:.2e} (tol 1e-12)")
