"""Numba inner loops.

Single source of truth for the vector field and demographic-noise
amplitudes; the public modules wrap these scalar kernels.  All kernels are
compiled with ``nogil`` so ensemble drivers can run them from threads.
"""

import numpy as np
from numba import njit, prange

# status codes shared by the integrator kernels
OK = 0
NONFINITE = 1
STEP_TOO_LARGE = 2
ABSORBED = 3
CROSSED = 4

POLICY_REFLECT = 0
POLICY_ABSORB = 1


@njit(cache=True, nogil=True, inline="always")
def rates(x, y, z, b1, b2, c, d, h):
    """Unscaled drift terms (f1, f2, f3) of the three-species model."""
    p1 = b1 + x
    p2 = b2 + x
    f1 = x * (1.0 - x - y / p1 - z / p2)
    f2 = y * (x / p1 - c)
    f3 = z * (x / p2 - d - h * z)
    return f1, f2, f3


@njit(cache=True, nogil=True, inline="always")
def noise_sq(x, y, z, b1, b2, c, d, h):
    """Squared demographic-noise amplitudes (F1^2, F2^2, F3^2)."""
    p1 = b1 + x
    p2 = b2 + x
    bx = x
    dx = x * x + x * y / p1 + x * z / p2
    f1s = (bx + dx * (1.0 + 4.0 * x)) / (1.0 + bx + dx)
    by = x * y / p1
    dy = c * y
    f2s = (by + dy + 4.0 * by * dy) / (1.0 + by + dy)
    bz = x * z / p2
    dz = d * z + h * z * z
    f3s = (bz + dz + 4.0 * bz * dz) / (1.0 + bz + dz)
    return f1s, f2s, f3s


@njit(cache=True, nogil=True)
def rk4_path(x, y, z, b1, b2, c, d, h, a1, a2, a3, dt, n_steps, save_every, out):
    """Classical fixed-step RK4 on the scaled field (a1*f1, a2*f2, a3*f3).

    Saves step 0 and every ``save_every``-th step into ``out`` (rows of
    t, x, y, z).  Returns (status, rows_written, steps_done).
    """
    k = 0
    out[k, 0] = 0.0
    out[k, 1] = x
    out[k, 2] = y
    out[k, 3] = z
    k += 1
    for i in range(1, n_steps + 1):
        f1, f2, f3 = rates(x, y, z, b1, b2, c, d, h)
        k1x, k1y, k1z = a1 * f1, a2 * f2, a3 * f3
        f1, f2, f3 = rates(x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, z + 0.5 * dt * k1z, b1, b2, c, d, h)
        k2x, k2y, k2z = a1 * f1, a2 * f2, a3 * f3
        f1, f2, f3 = rates(x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, z + 0.5 * dt * k2z, b1, b2, c, d, h)
        k3x, k3y, k3z = a1 * f1, a2 * f2, a3 * f3
        f1, f2, f3 = rates(x + dt * k3x, y + dt * k3y, z + dt * k3z, b1, b2, c, d, h)
        k4x, k4y, k4z = a1 * f1, a2 * f2, a3 * f3
        x = x + dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y = y + dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z = z + dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            return NONFINITE, k, i
        if i % save_every == 0:
            out[k, 0] = i * dt
            out[k, 1] = x
            out[k, 2] = y
            out[k, 3] = z
            k += 1
    return OK, k, n_steps


@njit(cache=True, nogil=True)
def em_chunk(st, b1, b2, c, d, h, a1, a2, a3, g1, g2, g3, dt, dw, i0, save_every, out, krow, policy):
    """Euler-Maruyama over one chunk of pre-drawn Brownian increments.

    ``st`` carries the state across chunks; ``dw`` holds Delta-W rows,
    ``i0`` the global step index of the first row.  Drift is scaled by
    (a1, a2, a3) and the noise amplitudes by (g1, g2, g3), so the same
    kernel serves both timescales.  Returns (status, steps_done, krow).
    """
    x, y, z = st[0], st[1], st[2]
    m = dw.shape[0]
    for i in range(m):
        f1, f2, f3 = rates(x, y, z, b1, b2, c, d, h)
        d1 = a1 * f1 * dt
        d2 = a2 * f2 * dt
        d3 = a3 * f3 * dt
        if abs(d1) > 0.5 or abs(d2) > 0.5 or abs(d3) > 0.5:
            st[0], st[1], st[2] = x, y, z
            return STEP_TOO_LARGE, i, krow
        f1s, f2s, f3s = noise_sq(x, y, z, b1, b2, c, d, h)
        x = x + d1 + g1 * np.sqrt(f1s) * dw[i, 0]
        y = y + d2 + g2 * np.sqrt(f2s) * dw[i, 1]
        z = z + d3 + g3 * np.sqrt(f3s) * dw[i, 2]
        hit = x < 0.0 or y < 0.0 or z < 0.0
        if x < 0.0:
            x = 0.0
        if y < 0.0:
            y = 0.0
        if z < 0.0:
            z = 0.0
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            st[0], st[1], st[2] = x, y, z
            return NONFINITE, i, krow
        j = i0 + i + 1
        if j % save_every == 0:
            out[krow, 0] = j * dt
            out[krow, 1] = x
            out[krow, 2] = y
            out[krow, 3] = z
            krow += 1
        if hit and policy == POLICY_ABSORB:
            st[0], st[1], st[2] = x, y, z
            return ABSORBED, i + 1, krow
    st[0], st[1], st[2] = x, y, z
    return OK, m, krow


@njit(cache=True, nogil=True)
def em_path(st, b1, b2, c, d, h, a1, a2, a3, g1, g2, g3, dt, gen, n_steps,
            save_every, out, policy):
    """Full Euler-Maruyama path drawing its increments from ``gen`` in-loop.

    Draw order matches consuming a (n_steps, 3) standard-normal block from
    the same generator row by row, so results are bit-identical to the
    chunked variant on the same stream.  Returns (status, steps_done, krow).
    """
    x, y, z = st[0], st[1], st[2]
    sqdt = np.sqrt(dt)
    krow = 1
    for i in range(n_steps):
        w1 = sqdt * gen.standard_normal()
        w2 = sqdt * gen.standard_normal()
        w3 = sqdt * gen.standard_normal()
        f1, f2, f3 = rates(x, y, z, b1, b2, c, d, h)
        d1 = a1 * f1 * dt
        d2 = a2 * f2 * dt
        d3 = a3 * f3 * dt
        if abs(d1) > 0.5 or abs(d2) > 0.5 or abs(d3) > 0.5:
            st[0], st[1], st[2] = x, y, z
            return STEP_TOO_LARGE, i, krow
        f1s, f2s, f3s = noise_sq(x, y, z, b1, b2, c, d, h)
        x = x + d1 + g1 * np.sqrt(f1s) * w1
        y = y + d2 + g2 * np.sqrt(f2s) * w2
        z = z + d3 + g3 * np.sqrt(f3s) * w3
        hit = x < 0.0 or y < 0.0 or z < 0.0
        if x < 0.0:
            x = 0.0
        if y < 0.0:
            y = 0.0
        if z < 0.0:
            z = 0.0
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            st[0], st[1], st[2] = x, y, z
            return NONFINITE, i, krow
        j = i + 1
        if j % save_every == 0:
            out[krow, 0] = j * dt
            out[krow, 1] = x
            out[krow, 2] = y
            out[krow, 3] = z
            krow += 1
        if hit and policy == POLICY_ABSORB:
            st[0], st[1], st[2] = x, y, z
            return ABSORBED, i + 1, krow
    st[0], st[1], st[2] = x, y, z
    return OK, n_steps, krow


@njit(cache=True, nogil=True)
def em_to_crossing(st, b1, b2, c, d, h, a1, a2, a3, g1, g2, g3, dt, gen, n_steps,
                   xsec, excl, direction):
    """EM stepping with section-crossing detection for the return map.

    A crossing counts only once the path is armed (|x - xsec| > excl was
    reached) and x passes xsec in ``direction`` (+1 rising, -1 falling).
    Returns (status, steps_done, x_prev, y_prev, z_prev) with the pre-step
    state for interpolation when status == CROSSED.
    """
    x, y, z = st[0], st[1], st[2]
    sqdt = np.sqrt(dt)
    armed = False
    for i in range(n_steps):
        xp, yp, zp = x, y, z
        w1 = sqdt * gen.standard_normal()
        w2 = sqdt * gen.standard_normal()
        w3 = sqdt * gen.standard_normal()
        f1, f2, f3 = rates(x, y, z, b1, b2, c, d, h)
        f1s, f2s, f3s = noise_sq(x, y, z, b1, b2, c, d, h)
        x = x + a1 * f1 * dt + g1 * np.sqrt(f1s) * w1
        y = y + a2 * f2 * dt + g2 * np.sqrt(f2s) * w2
        z = z + a3 * f3 * dt + g3 * np.sqrt(f3s) * w3
        if x < 0.0:
            x = 0.0
        if y < 0.0:
            y = 0.0
        if z < 0.0:
            z = 0.0
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            st[0], st[1], st[2] = x, y, z
            return NONFINITE, i + 1, xp, yp, zp
        if x == 0.0 or y == 0.0 or z == 0.0:
            st[0], st[1], st[2] = x, y, z
            return ABSORBED, i + 1, xp, yp, zp
        if not armed:
            if abs(x - xsec) > excl:
                armed = True
        elif (direction > 0 and xp < xsec <= x) or (direction < 0 and xp > xsec >= x):
            st[0], st[1], st[2] = x, y, z
            return CROSSED, i + 1, xp, yp, zp
    st[0], st[1], st[2] = x, y, z
    return OK, n_steps, x, y, z


@njit(cache=True, nogil=True, inline="always")
def _propensities(x, y, z, b1, b2, c, d, h):
    """Birth/death propensity pairs per species at the given densities."""
    p1 = b1 + x
    p2 = b2 + x
    bx = x
    dx = x * x + x * y / p1 + x * z / p2
    by = x * y / p1
    dy = c * y
    bz = x * z / p2
    dz = d * z + h * z * z
    return bx, dx, by, dy, bz, dz


@njit(cache=True, nogil=True)
def chain_run(seed, nx, ny, nz, w1, w2, w3, zeta, b1, b2, c, d, h, horizon,
              include_noops, times, counts):
    """One birth-death chain on the slow timescale.

    Species event streams carry rate (scale/zeta or scale) times the total
    outcome weight at the current densities; each event applies +1/-1/0
    with the tabulated outcome probabilities.  With ``include_noops`` the
    zero-outcome channel is simulated explicitly; without it the no-change
    events are thinned away, which leaves the law of the counts unchanged.
    Records every event into (times, counts) up to their capacity.
    Returns (status, n_recorded, t_end, nx, ny, nz); status 1 means the
    record buffers filled before the horizon.
    """
    np.random.seed(seed)
    cap = times.shape[0]
    k = 0
    t = 0.0
    while True:
        x = nx / w1
        y = ny / w2
        z = nz / w3
        bx, dx, by, dy, bz, dz = _propensities(x, y, z, b1, b2, c, d, h)
        if include_noops:
            wx = 1.0 + bx + dx
            wy = 1.0 + by + dy
            wz = 1.0 + bz + dz
        else:
            wx = bx + dx
            wy = by + dy
            wz = bz + dz
        lx = (w1 / zeta) * wx
        ly = w2 * wy
        lz = w3 * wz
        lam = lx + ly + lz
        if lam <= 0.0:
            return OK, k, horizon, nx, ny, nz
        t += np.random.exponential(1.0 / lam)
        if t > horizon:
            return OK, k, horizon, nx, ny, nz
        u = np.random.random() * lam
        if u < lx:
            v = np.random.random() * wx
            if v < bx:
                nx += 1
            elif v < bx + dx:
                nx -= 1
        elif u < lx + ly:
            v = np.random.random() * wy
            if v < by:
                ny += 1
            elif v < by + dy:
                ny -= 1
        else:
            v = np.random.random() * wz
            if v < bz:
                nz += 1
            elif v < bz + dz:
                nz -= 1
        if nx < 0:
            nx = 0
        if ny < 0:
            ny = 0
        if nz < 0:
            nz = 0
        if k >= cap:
            return 1, k, t, nx, ny, nz
        times[k] = t
        counts[k, 0] = nx
        counts[k, 1] = ny
        counts[k, 2] = nz
        k += 1


@njit(cache=True, nogil=True)
def chain_increment(seed, nx, ny, nz, w1, w2, w3, zeta, b1, b2, c, d, h, ds):
    """Final counts of one chain after slow-time ds (no-op events thinned)."""
    np.random.seed(seed)
    t = 0.0
    while True:
        x = nx / w1
        y = ny / w2
        z = nz / w3
        bx, dx, by, dy, bz, dz = _propensities(x, y, z, b1, b2, c, d, h)
        lx = (w1 / zeta) * (bx + dx)
        ly = w2 * (by + dy)
        lz = w3 * (bz + dz)
        lam = lx + ly + lz
        if lam <= 0.0:
            return nx, ny, nz
        t += np.random.exponential(1.0 / lam)
        if t > ds:
            return nx, ny, nz
        u = np.random.random() * lam
        if u < lx:
            if np.random.random() * (bx + dx) < bx:
                nx += 1
            else:
                nx -= 1
        elif u < lx + ly:
            if np.random.random() * (by + dy) < by:
                ny += 1
            else:
                ny -= 1
        else:
            if np.random.random() * (bz + dz) < bz:
                nz += 1
            else:
                nz -= 1
        if nx < 0:
            nx = 0
        if ny < 0:
            ny = 0
        if nz < 0:
            nz = 0


@njit(cache=True, parallel=True)
def chain_increment_batch(seeds, nx, ny, nz, w1, w2, w3, zeta, b1, b2, c, d, h, ds, out):
    """Replica increments in parallel; replica r is seeded by seeds[r] only."""
    for r in prange(seeds.shape[0]):
        a, b_, g = chain_increment(seeds[r], nx, ny, nz, w1, w2, w3, zeta, b1, b2, c, d, h, ds)
        out[r, 0] = a
        out[r, 1] = b_
        out[r, 2] = g
