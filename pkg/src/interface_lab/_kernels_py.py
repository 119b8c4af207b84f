"""Pure numpy kernels: reference backend for the hot Monte Carlo loops.

Same stream-consumption contract and the same floating-point arithmetic,
expression for expression, as the compiled backend in ``_kernels.pyx``; the
two produce identical trajectories from identical streams (up to decision
flips at one-ulp coincidences between libm and numpy's vectorized exp,
which have never been observed in testing).  Paths advance time-major
across a whole block so the per-step work is vectorized.

The exact-in-law step from x over dt, consuming one normal z and one
uniform u:

    w = x + sqrt(dt) * z                  endpoint of the driving BM
    if x*w > 0:  p = 1 - exp(-2*x*w/dt)   prob. the BM bridge avoided 0
        u <  p:  next = w                 no touch, skewness irrelevant
        u >= p:  v = (u - p) / (1 - p)    still uniform given a touch
    else:        v = u                    touch certain
    touched:     next = +|w| if v < alpha else -|w|

The touched-endpoint magnitude |w| has the folded density 2*phi_t(x + |w|),
so signing it +/- with probability alpha reproduces the closed-form skew
transition density exactly.
"""

from __future__ import annotations

import math

import numpy as np


def _draw_block(streams, n_steps, with_bridge):
    # Per-path layout: n normals, n uniforms, (n bridge uniforms).
    b = len(streams)
    z = np.empty((b, n_steps))
    u = np.empty((b, n_steps))
    ub = np.empty((b, n_steps)) if with_bridge else None
    for i, bg in enumerate(streams):
        g = np.random.Generator(bg)
        z[i] = g.standard_normal(n_steps)
        u[i] = g.random(n_steps)
        if with_bridge:
            ub[i] = g.random(n_steps)
    return z, u, ub


def _step_columns(x, zj, uj, sqrt_dt, inv_dt, alpha):
    """Advance a column of paths by one exact-in-law step."""
    w = x + sqrt_dt * zj
    xw = x * w
    same = xw > 0.0
    arg = np.where(same, -2.0 * xw * inv_dt, 0.0)
    p = 1.0 - np.exp(arg)
    avoided = same & (uj < p)
    den = 1.0 - p
    den = np.where(den > 0.0, den, 1.0)
    v = np.where(same, (uj - p) / den, uj)
    aw = np.abs(w)
    return np.where(avoided, w, np.where(v < alpha, aw, -aw))


def simulate_path(stream, x0, alpha, dt, n_steps):
    """One full trajectory: returns the n_steps+1 grid values."""
    g = np.random.Generator(stream)
    z = g.standard_normal(n_steps)
    u = g.random(n_steps)
    sqrt_dt = math.sqrt(dt)
    inv_dt = 1.0 / dt
    out = np.empty(n_steps + 1)
    out[0] = x = x0
    for j in range(n_steps):
        w = x + sqrt_dt * z[j]
        xw = x * w
        if xw > 0.0:
            p = 1.0 - math.exp(-2.0 * xw * inv_dt)
            if u[j] < p:
                out[j + 1] = x = w
                continue
            v = (u[j] - p) / (1.0 - p)
        else:
            v = u[j]
        aw = abs(w)
        out[j + 1] = x = aw if v < alpha else -aw
    return out


def simulate_summaries(streams, x0, alpha, dt, n_steps):
    """Endpoints plus occupation tallies for a block of paths.

    Returns (x_end, occ_plus_interp, occ_plus_left):
      occ_plus_interp  plus-side Lebesgue time, sign changes split by
                       linear interpolation |x_i| / (|x_i| + |x_{i+1}|)
      occ_plus_left    plus-side time by left endpoints (dt per step with
                       x_i >= 0), the martingale-compensator weight
    """
    z, u, _ = _draw_block(streams, n_steps, with_bridge=False)
    b = len(streams)
    sqrt_dt = math.sqrt(dt)
    inv_dt = 1.0 / dt
    x = np.full(b, float(x0))
    occ_interp = np.zeros(b)
    occ_left = np.zeros(b)
    for j in range(n_steps):
        occ_left += dt * (x >= 0.0)
        x_new = _step_columns(x, z[:, j], u[:, j], sqrt_dt, inv_dt, alpha)
        sp = x >= 0.0
        sn = x_new >= 0.0
        both_plus = sp & sn
        cross = sp != sn
        denom = np.abs(x) + np.abs(x_new)
        denom = np.where(denom > 0.0, denom, 1.0)
        frac = np.abs(x) / denom
        occ_interp += dt * both_plus + dt * np.where(
            cross, np.where(sp, frac, 1.0 - frac), 0.0
        )
        x = x_new
    return x, occ_interp, occ_left


def simulate_fpt(streams, x0, x_target, alpha, dt, n_steps, bridge):
    """First-passage times to x_target for a block of paths; NaN = censored.

    Passage is declared at the first grid point at or beyond the target
    (sign-aware), or, with the bridge correction on and a step strictly
    one-sided relative to both the target and the interface, inside a step
    with the Brownian-bridge hit probability exp(-2*(x_i-a)(x_{i+1}-a)/dt);
    bridge crossings are stamped at the step midpoint.
    """
    z, u, ub = _draw_block(streams, n_steps, with_bridge=True)
    b = len(streams)
    sqrt_dt = math.sqrt(dt)
    inv_dt = 1.0 / dt
    a = float(x_target)
    upward = a > x0
    x = np.full(b, float(x0))
    t_pass = np.full(b, np.nan)
    active = np.ones(b, dtype=bool)
    for j in range(n_steps):
        x_new = _step_columns(x, z[:, j], u[:, j], sqrt_dt, inv_dt, alpha)
        hit = active & ((x_new >= a) if upward else (x_new <= a))
        t_pass[hit] = (j + 1) * dt
        active &= ~hit
        if bridge:
            prod = (x - a) * (x_new - a)
            elig = active & (prod > 0.0) & (x * x_new > 0.0)
            arg = np.where(elig, -2.0 * prod * inv_dt, 0.0)
            p_hit = np.exp(arg)
            hit_b = elig & (ub[:, j] < p_hit)
            t_pass[hit_b] = j * dt + 0.5 * dt
            active &= ~hit_b
        if not active.any():
            break
        x = x_new
    return t_pass
