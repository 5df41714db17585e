"""Hot numeric loops with a compiled and an interpreted build.

Two kinds of kernels live here:

* sequential loops (closed-loop integration, gradient-flow integration)
  written once as plain scalar Python; the numba backend runs the njit
  compilation of the very same function, so both backends execute the
  same arithmetic,
* box-quadrature reductions, where the numpy backend is a slab-vectorized
  twin of the compiled triple loop.

Backend selection: the environment variable GRADFLOW_BACKEND ("numba" or
"numpy") is consulted at every dispatch, so tests and benchmarks can flip
it; set_backend() overrides the environment within a process. The default
is numba when importable, numpy otherwise.

Reduction order is fixed and documented per kernel: midpoint quadrature
accumulates x3-slab subtotals in slab index order; Monte Carlo accumulates
fixed-size chunk subtotals in chunk index order. Results are therefore
deterministic within a backend regardless of worker count. Across backends
the summation order inside a slab/chunk differs, so agreement is to
rounding (~1e-13 relative), not bitwise.
"""

import math
import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    njit = None
    HAVE_NUMBA = False

_BACKEND_OVERRIDE: str | None = None

# status codes returned by the loop kernels
STATUS_HORIZON = 0
STATUS_GOAL = 1
STATUS_NONFINITE = 2


def backend() -> str:
    """Active backend name: override > GRADFLOW_BACKEND > availability."""
    if _BACKEND_OVERRIDE is not None:
        return _BACKEND_OVERRIDE
    env = os.environ.get("GRADFLOW_BACKEND", "").strip().lower()
    if env == "numpy":
        return "numpy"
    if env == "numba":
        return "numba" if HAVE_NUMBA else "numpy"
    return "numba" if HAVE_NUMBA else "numpy"


def set_backend(name: str | None) -> None:
    """Force a backend ("numba"/"numpy"); None restores environment selection."""
    global _BACKEND_OVERRIDE
    if name is None:
        _BACKEND_OVERRIDE = None
        return
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not HAVE_NUMBA:
        raise ValueError("numba backend requested but numba is not importable")
    _BACKEND_OVERRIDE = name


_NJIT_CACHE: dict = {}


def _jit(fn):
    """Lazily njit-compile `fn`, keeping the interpreted original intact."""
    compiled = _NJIT_CACHE.get(fn)
    if compiled is None:
        compiled = njit(cache=True, nogil=True)(fn)
        _NJIT_CACHE[fn] = compiled
    return compiled


def _dispatch(fn):
    return _jit(fn) if backend() == "numba" else fn


# ---------------------------------------------------------------------------
# closed-loop integration, diagonal quadratic potentials
# ---------------------------------------------------------------------------

def _closed_loop_quadratic(x0, coeffs, gamma, k1, k2, omega, control_period, h,
                           n_updates, upd_per_eps, steps_per_update, sampling,
                           do_clamp, u1_max, u2_max, goal, goal_tol,
                           log_every, rows):
    """Closed-loop run; fills `rows` with (t, x, u, a, V, saturated).

    Returns (rows_written, status, convergence_time). The control is held
    constant over each control period; amplitudes refresh every update in
    continuous mode and only at multiples of upd_per_eps in sampling mode.
    Goal detection runs at update instants on the full-state distance.
    """
    x1 = x0[0]
    x2 = x0[1]
    x3 = x0[2]
    c1 = coeffs[0]
    c2 = coeffs[1]
    c3 = coeffs[2]
    a1 = 0.0
    a2 = 0.0
    a12 = 0.0
    n_rows = 0
    status = STATUS_HORIZON
    conv_time = math.nan
    for k in range(n_updates + 1):
        t = k * control_period
        if (not sampling) or (k % upd_per_eps == 0):
            gx1 = 2.0 * c1 * x1
            gx2 = 2.0 * c2 * x2
            gx3 = 2.0 * c3 * x3
            s = math.sin(x3)
            c = math.cos(x3)
            a1 = -gamma * (gx1 * c + gx2 * s)
            a2 = -gamma * gx3
            a12 = -gamma * (gx1 * s - gx2 * c)
        osc = math.sqrt(omega * abs(a12))
        sign = 0.0
        if a12 > 0.0:
            sign = 1.0
        elif a12 < 0.0:
            sign = -1.0
        u1 = a1 + k1 * osc * sign * math.cos(omega * t)
        u2 = a2 + k2 * osc * math.sin(omega * t)
        sat = 0.0
        if do_clamp:
            if u1 > u1_max:
                u1 = u1_max
                sat = 1.0
            elif u1 < -u1_max:
                u1 = -u1_max
                sat = 1.0
            if u2 > u2_max:
                u2 = u2_max
                sat = 1.0
            elif u2 < -u2_max:
                u2 = -u2_max
                sat = 1.0
        v_val = c1 * x1 * x1 + c2 * x2 * x2 + c3 * x3 * x3
        # a finite state can still overflow in u/a/V; never log such a row
        if not (math.isfinite(x1) and math.isfinite(x2) and math.isfinite(x3)
                and math.isfinite(u1) and math.isfinite(u2)
                and math.isfinite(a12) and math.isfinite(v_val)):
            status = STATUS_NONFINITE
            break
        d1 = x1 - goal[0]
        d2 = x2 - goal[1]
        d3 = x3 - goal[2]
        at_goal = math.sqrt(d1 * d1 + d2 * d2 + d3 * d3) <= goal_tol
        if (k % log_every == 0) or at_goal or (k == n_updates):
            rows[n_rows, 0] = t
            rows[n_rows, 1] = x1
            rows[n_rows, 2] = x2
            rows[n_rows, 3] = x3
            rows[n_rows, 4] = u1
            rows[n_rows, 5] = u2
            rows[n_rows, 6] = a1
            rows[n_rows, 7] = a2
            rows[n_rows, 8] = a12
            rows[n_rows, 9] = v_val
            rows[n_rows, 10] = sat
            n_rows += 1
        if at_goal:
            status = STATUS_GOAL
            conv_time = t
            break
        if k == n_updates:
            break
        for _ in range(steps_per_update):
            # RK4 on xdot = (u1*cos x3, u1*sin x3, u2) with u frozen; since
            # xdot3 = u2 is constant, stages 2 and 3 see the same heading and
            # the x3 update is exact
            k1x = u1 * math.cos(x3)
            k1y = u1 * math.sin(x3)
            x3b = x3 + 0.5 * h * u2
            k2x = u1 * math.cos(x3b)
            k2y = u1 * math.sin(x3b)
            k3x = k2x
            k3y = k2y
            x3d = x3 + h * u2
            k4x = u1 * math.cos(x3d)
            k4y = u1 * math.sin(x3d)
            x1 += h * (k1x + 2.0 * k2x + 2.0 * k3x + k4x) / 6.0
            x2 += h * (k1y + 2.0 * k2y + 2.0 * k3y + k4y) / 6.0
            x3 += h * u2
        if not (math.isfinite(x1) and math.isfinite(x2) and math.isfinite(x3)):
            status = STATUS_NONFINITE
            break
    return n_rows, status, conv_time


def closed_loop_quadratic(*args):
    return _dispatch(_closed_loop_quadratic)(*args)


# ---------------------------------------------------------------------------
# gradient-flow integration, diagonal quadratic potentials
# ---------------------------------------------------------------------------

def _gradient_flow_quadratic(x0, coeffs, h, n_steps, log_every, rows):
    """RK4 on xdot = -grad V = -2*c.*x; control/amplitude columns stay zero."""
    x1 = x0[0]
    x2 = x0[1]
    x3 = x0[2]
    c1 = coeffs[0]
    c2 = coeffs[1]
    c3 = coeffs[2]
    lam1 = -2.0 * c1
    lam2 = -2.0 * c2
    lam3 = -2.0 * c3
    n_rows = 0
    status = STATUS_HORIZON
    for k in range(n_steps + 1):
        v_val = c1 * x1 * x1 + c2 * x2 * x2 + c3 * x3 * x3
        if not (math.isfinite(x1) and math.isfinite(x2) and math.isfinite(x3)
                and math.isfinite(v_val)):
            status = STATUS_NONFINITE
            break
        if (k % log_every == 0) or (k == n_steps):
            rows[n_rows, 0] = k * h
            rows[n_rows, 1] = x1
            rows[n_rows, 2] = x2
            rows[n_rows, 3] = x3
            for j in range(4, 9):
                rows[n_rows, j] = 0.0
            rows[n_rows, 9] = v_val
            rows[n_rows, 10] = 0.0
            n_rows += 1
        if k == n_steps:
            break
        # components decouple: RK4 on each scalar xdot = lam*x
        s1 = lam1 * x1
        s2 = lam1 * (x1 + 0.5 * h * s1)
        s3 = lam1 * (x1 + 0.5 * h * s2)
        s4 = lam1 * (x1 + h * s3)
        x1 += h * (s1 + 2.0 * s2 + 2.0 * s3 + s4) / 6.0
        s1 = lam2 * x2
        s2 = lam2 * (x2 + 0.5 * h * s1)
        s3 = lam2 * (x2 + 0.5 * h * s2)
        s4 = lam2 * (x2 + h * s3)
        x2 += h * (s1 + 2.0 * s2 + 2.0 * s3 + s4) / 6.0
        s1 = lam3 * x3
        s2 = lam3 * (x3 + 0.5 * h * s1)
        s3 = lam3 * (x3 + 0.5 * h * s2)
        s4 = lam3 * (x3 + h * s3)
        x3 += h * (s1 + 2.0 * s2 + 2.0 * s3 + s4) / 6.0
    return n_rows, status


def gradient_flow_quadratic(*args):
    return _dispatch(_gradient_flow_quadratic)(*args)


# ---------------------------------------------------------------------------
# admissibility quadrature, diagonal quadratic potentials
# ---------------------------------------------------------------------------

def _midpoint_quadratic(xs1, xs2, xs3, c1, c2, c3, q, grad_floor):
    """Sum of rho(x, grad V)^q / |grad V|^q over the tensor grid.

    Accumulates one subtotal per x3 slab, added in slab index order.
    Points with |grad V| <= grad_floor contribute 0 and are counted.
    """
    total = 0.0
    excluded = 0
    q_is_2 = q == 2.0
    for k3 in range(xs3.shape[0]):
        x3 = xs3[k3]
        s = math.sin(x3)
        c = math.cos(x3)
        gx3 = 2.0 * c3 * x3
        slab = 0.0
        for i1 in range(xs1.shape[0]):
            gx1 = 2.0 * c1 * xs1[i1]
            for i2 in range(xs2.shape[0]):
                gx2 = 2.0 * c2 * xs2[i2]
                gn = math.sqrt(gx1 * gx1 + gx2 * gx2 + gx3 * gx3)
                if gn <= grad_floor:
                    excluded += 1
                    continue
                r = abs(gx1 * s - gx2 * c) / gn
                if q_is_2:
                    slab += r * r
                else:
                    slab += r ** q
        total += slab
    return total, excluded


def _midpoint_quadratic_numpy(xs1, xs2, xs3, c1, c2, c3, q, grad_floor):
    gx1 = (2.0 * c1 * xs1)[:, None]
    gx2 = (2.0 * c2 * xs2)[None, :]
    total = 0.0
    excluded = 0
    for x3 in xs3:
        s = math.sin(x3)
        c = math.cos(x3)
        gx3 = 2.0 * c3 * x3
        gn = np.sqrt(gx1 * gx1 + gx2 * gx2 + gx3 * gx3)
        keep = gn > grad_floor
        num = np.abs(gx1 * s - gx2 * c)
        r = np.where(keep, num / np.where(keep, gn, 1.0), 0.0)
        vals = r * r if q == 2.0 else r ** q
        total += float(vals.sum())
        excluded += int(np.count_nonzero(~keep))
    return total, excluded


def midpoint_quadratic(xs1, xs2, xs3, c1, c2, c3, q, grad_floor):
    if backend() == "numba":
        return _jit(_midpoint_quadratic)(xs1, xs2, xs3, c1, c2, c3, q, grad_floor)
    return _midpoint_quadratic_numpy(xs1, xs2, xs3, c1, c2, c3, q, grad_floor)


def _mc_chunk_quadratic(pts, c1, c2, c3, q, grad_floor):
    """(sum, sum of squares, excluded count) of the integrand over `pts`."""
    total = 0.0
    total_sq = 0.0
    excluded = 0
    q_is_2 = q == 2.0
    for i in range(pts.shape[0]):
        gx1 = 2.0 * c1 * pts[i, 0]
        gx2 = 2.0 * c2 * pts[i, 1]
        x3 = pts[i, 2]
        gx3 = 2.0 * c3 * x3
        gn = math.sqrt(gx1 * gx1 + gx2 * gx2 + gx3 * gx3)
        if gn <= grad_floor:
            excluded += 1
            continue
        r = abs(gx1 * math.sin(x3) - gx2 * math.cos(x3)) / gn
        v = r * r if q_is_2 else r ** q
        total += v
        total_sq += v * v
    return total, total_sq, excluded


def _mc_chunk_quadratic_numpy(pts, c1, c2, c3, q, grad_floor):
    gx1 = 2.0 * c1 * pts[:, 0]
    gx2 = 2.0 * c2 * pts[:, 1]
    x3 = pts[:, 2]
    gx3 = 2.0 * c3 * x3
    gn = np.sqrt(gx1 * gx1 + gx2 * gx2 + gx3 * gx3)
    keep = gn > grad_floor
    num = np.abs(gx1 * np.sin(x3) - gx2 * np.cos(x3))
    r = np.where(keep, num / np.where(keep, gn, 1.0), 0.0)
    vals = r * r if q == 2.0 else r ** q
    return float(vals.sum()), float((vals * vals).sum()), int(np.count_nonzero(~keep))


def mc_chunk_quadratic(pts, c1, c2, c3, q, grad_floor):
    if backend() == "numba":
        return _jit(_mc_chunk_quadratic)(pts, c1, c2, c3, q, grad_floor)
    return _mc_chunk_quadratic_numpy(pts, c1, c2, c3, q, grad_floor)
