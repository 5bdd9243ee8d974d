"""Pure-Python reference kernels: retarded-time solve, moving-charge fields,
and the coupled-dipole time-stepping loop.

The compiled backend (_core.pyx) transliterates these routines statement for
statement; any change here must be mirrored there to preserve bit-level parity
between backends.

History layout shared with the compiled kernel: flat float64 sequences
(rf, vf, af) of length 3*count holding position/velocity/acceleration triples
at uniformly spaced times t0 + i*dt. Queries before t0 use the static
pre-history position (prex, prey, prez) with zero velocity/acceleration when
allow_pre is true, and raise HorizonError otherwise (bounded-window mode).
"""

from __future__ import annotations

import math
from array import array

import numpy as np

from ..constants import CODATA
from ..errors import (
    DomainError,
    HorizonError,
    SingularityError,
    SolverError,
    VelocityLimitError,
)

BACKEND_NAME = "python"

C = CODATA.c
EPS0 = CODATA.eps0
FOURPI_EPS0 = 4.0 * math.pi * EPS0
EXCLUSION_RADIUS = 1e-15  # m; queries closer to the retarded source point raise
NEWTON_MAX_ITER = 25
BISECT_MAX_ITER = 200


def _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre, tq):
    """Cubic-Hermite position/velocity, linear acceleration, at time tq."""
    if tq <= t0:
        if not allow_pre:
            raise HorizonError(
                f"query at t={tq!r} precedes the retained history window ({t0!r})"
            )
        return (prex, prey, prez, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    if count < 2:
        return (rf[0], rf[1], rf[2], vf[0], vf[1], vf[2], af[0], af[1], af[2])
    x = (tq - t0) / dt
    i = int(x)
    if i > count - 2:
        i = count - 2
    s = x - i
    j = 3 * i
    r0x = rf[j]; r0y = rf[j + 1]; r0z = rf[j + 2]
    r1x = rf[j + 3]; r1y = rf[j + 4]; r1z = rf[j + 5]
    v0x = vf[j]; v0y = vf[j + 1]; v0z = vf[j + 2]
    v1x = vf[j + 3]; v1y = vf[j + 4]; v1z = vf[j + 5]
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    px = h00 * r0x + h10 * dt * v0x + h01 * r1x + h11 * dt * v1x
    py = h00 * r0y + h10 * dt * v0y + h01 * r1y + h11 * dt * v1y
    pz = h00 * r0z + h10 * dt * v0z + h01 * r1z + h11 * dt * v1z
    d00 = 6.0 * s2 - 6.0 * s
    d10 = 3.0 * s2 - 4.0 * s + 1.0
    d01 = -6.0 * s2 + 6.0 * s
    d11 = 3.0 * s2 - 2.0 * s
    vx = (d00 * r0x + d01 * r1x) / dt + d10 * v0x + d11 * v1x
    vy = (d00 * r0y + d01 * r1y) / dt + d10 * v0y + d11 * v1y
    vz = (d00 * r0z + d01 * r1z) / dt + d10 * v0z + d11 * v1z
    ax = (1.0 - s) * af[j] + s * af[j + 3]
    ay = (1.0 - s) * af[j + 1] + s * af[j + 4]
    az = (1.0 - s) * af[j + 2] + s * af[j + 5]
    return (px, py, pz, vx, vy, vz, ax, ay, az)


def _solve_retarded(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre,
                    ox, oy, oz, t, tr):
    """Newton iteration on f(tr) = tr - t + |obs - r_s(tr)|/c from guess tr,
    with a bisection fallback; returns (tr, interpolated state)."""
    # Converge to the fp-representation floor of f (~3 ulp of t): retarded-time
    # error maps to source-phase error by omega0*dt_err, so a loose tolerance
    # would inject field noise far above round-off.
    tol = 1e-12 * dt
    tt = 6e-16 * abs(t)
    if tt > tol:
        tol = tt
    f = 0.0
    for _ in range(NEWTON_MAX_ITER):
        if tr > t:
            tr = t
        st = _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre, tr)
        rx = ox - st[0]
        ry = oy - st[1]
        rz = oz - st[2]
        rn = math.sqrt(rx * rx + ry * ry + rz * rz)
        if rn < EXCLUSION_RADIUS:
            raise SingularityError(
                f"observation point within {EXCLUSION_RADIUS:g} m of the "
                f"retarded source position"
            )
        f = tr - t + rn / C
        if abs(f) <= tol:
            return tr, st
        fp = 1.0 - (rx * st[3] + ry * st[4] + rz * st[5]) / (rn * C)
        if fp <= 1e-12:
            break
        tr = tr - f / fp
    # Bisection fallback on a causal bracket [lo, t].
    hi = t
    span = 4.0 * dt + 2.0 * abs(f)
    lo = tr - span
    for _ in range(64):
        st = _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre, lo)
        rx = ox - st[0]
        ry = oy - st[1]
        rz = oz - st[2]
        rn = math.sqrt(rx * rx + ry * ry + rz * rz)
        if lo - t + rn / C <= 0.0:
            break
        span *= 2.0
        lo = t - span
    else:
        raise SolverError("no causal bracket found for the retarded time", residual=f)
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        st = _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre, mid)
        rx = ox - st[0]
        ry = oy - st[1]
        rz = oz - st[2]
        rn = math.sqrt(rx * rx + ry * ry + rz * rz)
        if rn < EXCLUSION_RADIUS:
            raise SingularityError(
                f"observation point within {EXCLUSION_RADIUS:g} m of the "
                f"retarded source position"
            )
        f = mid - t + rn / C
        if abs(f) <= tol or (hi - lo) <= 1e-18 * max(abs(t), dt):
            return mid, st
        if f > 0.0:
            hi = mid
        else:
            lo = mid
    raise SolverError("retarded-time solve did not converge", residual=f)


def retarded_time(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre,
                  ox, oy, oz, t):
    """Retarded emission time for an observation at (ox,oy,oz) and time t."""
    t_last = t0 + (count - 1) * dt
    if t > t_last + 1e-9 * dt:
        raise DomainError(f"query time {t!r} is beyond the last history sample")
    st = _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre,
                 min(t, t_last))
    dx = ox - st[0]
    dy = oy - st[1]
    dz = oz - st[2]
    guess = t - math.sqrt(dx * dx + dy * dy + dz * dz) / C
    tr, _st = _solve_retarded(rf, vf, af, count, t0, dt, prex, prey, prez,
                              allow_pre, ox, oy, oz, t, guess)
    return tr


def _fields_from_state(q, ox, oy, oz, st):
    """Coulomb/radiation electric fields, B, and potentials from a retarded state."""
    px, py, pz, vx, vy, vz, ax, ay, az = st
    rx = ox - px
    ry = oy - py
    rz = oz - pz
    rn = math.sqrt(rx * rx + ry * ry + rz * rz)
    nx = rx / rn
    ny = ry / rn
    nz = rz / rn
    ux = C * nx - vx
    uy = C * ny - vy
    uz = C * nz - vz
    ru = rx * ux + ry * uy + rz * uz  # = rn * c * kappa
    common = q / FOURPI_EPS0 * rn / (ru * ru * ru)
    c2v2 = C * C - (vx * vx + vy * vy + vz * vz)
    ecx = common * c2v2 * ux
    ecy = common * c2v2 * uy
    ecz = common * c2v2 * uz
    # u x a, then R x (u x a)
    wx = uy * az - uz * ay
    wy = uz * ax - ux * az
    wz = ux * ay - uy * ax
    erx = common * (ry * wz - rz * wy)
    ery = common * (rz * wx - rx * wz)
    erz = common * (rx * wy - ry * wx)
    etx = ecx + erx
    ety = ecy + ery
    etz = ecz + erz
    bx = (ny * etz - nz * ety) / C
    by = (nz * etx - nx * etz) / C
    bz = (nx * ety - ny * etx) / C
    phi = q * C / (FOURPI_EPS0 * ru)
    avx = vx * phi / (C * C)
    avy = vy * phi / (C * C)
    avz = vz * phi / (C * C)
    return (ecx, ecy, ecz, erx, ery, erz, bx, by, bz, phi, avx, avy, avz)


def lw_eval(q, rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre,
            ox, oy, oz, t):
    """Full Lienard-Wiechert evaluation: (E_coul, E_rad, B, phi, A, t_r)."""
    t_last = t0 + (count - 1) * dt
    if t > t_last + 1e-9 * dt:
        raise DomainError(f"query time {t!r} is beyond the last history sample")
    st = _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre,
                 min(t, t_last))
    dx = ox - st[0]
    dy = oy - st[1]
    dz = oz - st[2]
    guess = t - math.sqrt(dx * dx + dy * dy + dz * dz) / C
    tr, st = _solve_retarded(rf, vf, af, count, t0, dt, prex, prey, prez,
                             allow_pre, ox, oy, oz, t, guess)
    return _fields_from_state(q, ox, oy, oz, st) + (tr,)


def run_coupled(qs, ms, w0s, gam0s, pol, base, drv_amp, drv_omega, drv_phase,
                drv_axis, y_init, ydot_init, dt, n_steps, stride, cap,
                vel_limit, per_charge_field=False):
    """Self-consistent time stepping of n coupled Lorentz-oscillator dipoles.

    Each step evaluates the retarded fields of all other dipoles' charges at
    the dipole's COM (optionally per charge), freezes that driving field over
    the step, and advances the internal coordinate with the exact
    damped-oscillator propagator. Charge kinematics appended to the histories
    include the prescribed COM drive.

    cap bounds the retained history rows; cap > n_steps keeps everything,
    otherwise the oldest half is dropped whenever the buffer fills (the light
    horizon between dipoles must fit in cap//2 rows; validated by the caller).
    """
    n = len(qs)
    nq = 2 * n
    if cap < 8:
        raise DomainError("history capacity must be at least 8 rows")
    keep = cap // 2

    # Per-dipole propagator coefficients (exact solution of
    # y'' + g*y' + w0^2*y = f over one step with f frozen).
    a11 = [0.0] * n; a12 = [0.0] * n; a21 = [0.0] * n; a22 = [0.0] * n
    qm = [0.0] * n; inv_w02 = [0.0] * n
    for i in range(n):
        w0 = w0s[i]
        g = gam0s[i]
        wt = math.sqrt(w0 * w0 - 0.25 * g * g)
        ex = math.exp(-0.5 * g * dt)
        cs = math.cos(wt * dt)
        sn = math.sin(wt * dt)
        a11[i] = ex * (cs + 0.5 * g * sn / wt)
        a12[i] = ex * sn / wt
        a21[i] = -ex * w0 * w0 * sn / wt
        a22[i] = ex * (cs - 0.5 * g * sn / wt)
        qm[i] = qs[i] / ms[i]
        inv_w02[i] = 1.0 / (w0 * w0)

    hr = [array("d", bytes(24 * cap)) for _ in range(nq)]
    hv = [array("d", bytes(24 * cap)) for _ in range(nq)]
    ha = [array("d", bytes(24 * cap)) for _ in range(nq)]
    qcharge = [0.0] * nq
    pre = [(0.0, 0.0, 0.0)] * nq

    y = [float(v) for v in y_init]
    yd = [float(v) for v in ydot_init]

    def com_state(i, t):
        ax_, ay_, az_ = drv_axis[i][0], drv_axis[i][1], drv_axis[i][2]
        amp = drv_amp[i]
        if amp == 0.0:
            return (base[i][0], base[i][1], base[i][2],
                    0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        w = drv_omega[i]
        ang = w * t + drv_phase[i]
        s = amp * math.sin(ang)
        v = amp * w * math.cos(ang)
        a = -amp * w * w * math.sin(ang)
        return (base[i][0] + s * ax_, base[i][1] + s * ay_, base[i][2] + s * az_,
                v * ax_, v * ay_, v * az_, a * ax_, a * ay_, a * az_)

    # Row 0: dipoles at rest internally-displaced; accelerations provisional
    # (fixed up with the true driving field at the start of step 0).
    vel2_limit = vel_limit * vel_limit
    for i in range(n):
        cx, cy, cz, cvx, cvy, cvz, cax, cay, caz = com_state(i, 0.0)
        for s_i, sg in ((0, 0.5), (1, -0.5)):
            c = 2 * i + s_i
            qcharge[c] = qs[i] if s_i == 0 else -qs[i]
            px = cx + sg * y[i] * pol[i][0]
            py = cy + sg * y[i] * pol[i][1]
            pz = cz + sg * y[i] * pol[i][2]
            hr[c][0] = px; hr[c][1] = py; hr[c][2] = pz
            hv[c][0] = cvx + sg * yd[i] * pol[i][0]
            hv[c][1] = cvy + sg * yd[i] * pol[i][1]
            hv[c][2] = cvz + sg * yd[i] * pol[i][2]
            ha[c][0] = cax; ha[c][1] = cay; ha[c][2] = caz
            pre[c] = (px, py, pz)

    m_rec = n_steps // stride + 1
    times = np.empty(m_rec)
    rec_y = np.empty((m_rec, n))
    rec_yd = np.empty((m_rec, n))
    times[0] = 0.0
    for i in range(n):
        rec_y[0, i] = y[i]
        rec_yd[0, i] = yd[i]

    cur = 0
    t0_hist = 0.0
    allow_pre = True
    compacted = False
    tr_cache = [[0.0] * nq for _ in range(2 * n)]  # warm starts per obs point
    tr_cache_ok = [[False] * nq for _ in range(2 * n)]
    ed = [0.0] * n

    for k in range(n_steps):
        t = k * dt
        count = cur + 1
        # Driving field on each dipole from all other dipoles' charges.
        for i in range(n):
            cx, cy, cz, cvx, cvy, cvz, cax, cay, caz = com_state(i, t)
            if per_charge_field:
                obs_list = (
                    (2 * i, cx + 0.5 * y[i] * pol[i][0],
                     cy + 0.5 * y[i] * pol[i][1], cz + 0.5 * y[i] * pol[i][2]),
                    (2 * i + 1, cx - 0.5 * y[i] * pol[i][0],
                     cy - 0.5 * y[i] * pol[i][1], cz - 0.5 * y[i] * pol[i][2]),
                )
            else:
                obs_list = ((2 * i, cx, cy, cz),)
            acc = 0.0
            for slot, ox, oy, oz in obs_list:
                epx = 0.0; epy = 0.0; epz = 0.0
                for j in range(n):
                    if j == i:
                        continue
                    for s_i in range(2):
                        c = 2 * j + s_i
                        if tr_cache_ok[slot][c]:
                            guess = tr_cache[slot][c] + dt
                        else:
                            dx = ox - hr[c][3 * cur]
                            dy = oy - hr[c][3 * cur + 1]
                            dz = oz - hr[c][3 * cur + 2]
                            guess = t - math.sqrt(dx * dx + dy * dy + dz * dz) / C
                        tr, st = _solve_retarded(
                            hr[c], hv[c], ha[c], count, t0_hist, dt,
                            pre[c][0], pre[c][1], pre[c][2], allow_pre,
                            ox, oy, oz, t, guess)
                        tr_cache[slot][c] = tr
                        tr_cache_ok[slot][c] = True
                        fl = _fields_from_state(qcharge[c], ox, oy, oz, st)
                        epx += fl[0] + fl[3]
                        epy += fl[1] + fl[4]
                        epz += fl[2] + fl[5]
                acc += epx * pol[i][0] + epy * pol[i][1] + epz * pol[i][2]
            ed[i] = acc / len(obs_list)

        # Fix up the current row's accelerations with the fresh field.
        for i in range(n):
            _, _, _, _, _, _, cax, cay, caz = com_state(i, t)
            ydd = qm[i] * ed[i] - gam0s[i] * yd[i] - w0s[i] * w0s[i] * y[i]
            for s_i, sg in ((0, 0.5), (1, -0.5)):
                c = 2 * i + s_i
                ha[c][3 * cur] = cax + sg * ydd * pol[i][0]
                ha[c][3 * cur + 1] = cay + sg * ydd * pol[i][1]
                ha[c][3 * cur + 2] = caz + sg * ydd * pol[i][2]

        # Advance the internal coordinate (field frozen over the step).
        tn = (k + 1) * dt
        nxt = cur + 1
        if nxt == cap:
            drop = cap - keep
            for c in range(nq):
                hr[c][: 3 * keep] = hr[c][3 * drop:]
                hv[c][: 3 * keep] = hv[c][3 * drop:]
                ha[c][: 3 * keep] = ha[c][3 * drop:]
            t0_hist += drop * dt
            allow_pre = False
            compacted = True
            cur = keep - 1
            nxt = keep

        for i in range(n):
            f = qm[i] * ed[i]
            yp = f * inv_w02[i]
            dy0 = y[i] - yp
            y_new = yp + a11[i] * dy0 + a12[i] * yd[i]
            yd_new = a21[i] * dy0 + a22[i] * yd[i]
            y[i] = y_new
            yd[i] = yd_new
            ydd = f - gam0s[i] * yd_new - w0s[i] * w0s[i] * y_new
            cx, cy, cz, cvx, cvy, cvz, cax, cay, caz = com_state(i, tn)
            for s_i, sg in ((0, 0.5), (1, -0.5)):
                c = 2 * i + s_i
                j3 = 3 * nxt
                hr[c][j3] = cx + sg * y_new * pol[i][0]
                hr[c][j3 + 1] = cy + sg * y_new * pol[i][1]
                hr[c][j3 + 2] = cz + sg * y_new * pol[i][2]
                vx = cvx + sg * yd_new * pol[i][0]
                vy = cvy + sg * yd_new * pol[i][1]
                vz = cvz + sg * yd_new * pol[i][2]
                hv[c][j3] = vx
                hv[c][j3 + 1] = vy
                hv[c][j3 + 2] = vz
                ha[c][j3] = cax + sg * ydd * pol[i][0]
                ha[c][j3 + 1] = cay + sg * ydd * pol[i][1]
                ha[c][j3 + 2] = caz + sg * ydd * pol[i][2]
                v2 = vx * vx + vy * vy + vz * vz
                if v2 > vel2_limit:
                    raise VelocityLimitError(k + 1, math.sqrt(v2), vel_limit)
        cur = nxt

        if (k + 1) % stride == 0:
            jr = (k + 1) // stride
            times[jr] = tn
            for i in range(n):
                rec_y[jr, i] = y[i]
                rec_yd[jr, i] = yd[i]

    rows = cur + 1
    out_r = [np.frombuffer(hr[c], count=3 * rows).reshape(rows, 3).copy()
             for c in range(nq)]
    out_v = [np.frombuffer(hv[c], count=3 * rows).reshape(rows, 3).copy()
             for c in range(nq)]
    out_a = [np.frombuffer(ha[c], count=3 * rows).reshape(rows, 3).copy()
             for c in range(nq)]
    return {
        "times": times,
        "y": rec_y,
        "ydot": rec_yd,
        "hist_r": out_r,
        "hist_v": out_v,
        "hist_a": out_a,
        "hist_t0": t0_hist,
        "hist_pre": [np.array(p) for p in pre],
        "hist_charge": list(qcharge),
        "compacted": compacted,
    }
