# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: retarded-time solve, moving-charge fields, and the
coupled-dipole stepping loop.

Statement-for-statement transliteration of _pycore.py; keep the two in sync
(the parity test compares them on identical inputs). Compiled with
-ffp-contract=off so the arithmetic matches the pure-Python reference bit for
bit.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, fabs, sin, sqrt

from ..constants import CODATA
from ..errors import (
    DomainError,
    HorizonError,
    SingularityError,
    SolverError,
    VelocityLimitError,
)

cnp.import_array()

BACKEND_NAME = "compiled"

cdef double C = CODATA.c
cdef double EPS0 = CODATA.eps0
cdef double PI = 3.14159265358979323846264338327950288
cdef double FOURPI_EPS0 = 4.0 * PI * EPS0
cdef double EXCLUSION_RADIUS = 1e-15
cdef int NEWTON_MAX_ITER = 25
cdef int BISECT_MAX_ITER = 200


cdef struct State:
    double px, py, pz
    double vx, vy, vz
    double ax, ay, az


cdef int _interp(double[:, ::1] rf, double[:, ::1] vf, double[:, ::1] af,
                 long count, double t0, double dt,
                 double prex, double prey, double prez, bint allow_pre,
                 double tq, State* out) except -1:
    cdef double x, s, s2, s3, h00, h10, h01, h11, d00, d10, d01, d11
    cdef double r0x, r0y, r0z, r1x, r1y, r1z, v0x, v0y, v0z, v1x, v1y, v1z
    cdef long i
    if tq <= t0:
        if not allow_pre:
            raise HorizonError(
                f"query at t={tq!r} precedes the retained history window ({t0!r})"
            )
        out.px = prex; out.py = prey; out.pz = prez
        out.vx = 0.0; out.vy = 0.0; out.vz = 0.0
        out.ax = 0.0; out.ay = 0.0; out.az = 0.0
        return 0
    if count < 2:
        out.px = rf[0, 0]; out.py = rf[0, 1]; out.pz = rf[0, 2]
        out.vx = vf[0, 0]; out.vy = vf[0, 1]; out.vz = vf[0, 2]
        out.ax = af[0, 0]; out.ay = af[0, 1]; out.az = af[0, 2]
        return 0
    x = (tq - t0) / dt
    i = <long>x
    if i > count - 2:
        i = count - 2
    s = x - i
    r0x = rf[i, 0]; r0y = rf[i, 1]; r0z = rf[i, 2]
    r1x = rf[i + 1, 0]; r1y = rf[i + 1, 1]; r1z = rf[i + 1, 2]
    v0x = vf[i, 0]; v0y = vf[i, 1]; v0z = vf[i, 2]
    v1x = vf[i + 1, 0]; v1y = vf[i + 1, 1]; v1z = vf[i + 1, 2]
    s2 = s * s
    s3 = s2 * s
    h00 = 2.0 * s3 - 3.0 * s2 + 1.0
    h10 = s3 - 2.0 * s2 + s
    h01 = -2.0 * s3 + 3.0 * s2
    h11 = s3 - s2
    out.px = h00 * r0x + h10 * dt * v0x + h01 * r1x + h11 * dt * v1x
    out.py = h00 * r0y + h10 * dt * v0y + h01 * r1y + h11 * dt * v1y
    out.pz = h00 * r0z + h10 * dt * v0z + h01 * r1z + h11 * dt * v1z
    d00 = 6.0 * s2 - 6.0 * s
    d10 = 3.0 * s2 - 4.0 * s + 1.0
    d01 = -6.0 * s2 + 6.0 * s
    d11 = 3.0 * s2 - 2.0 * s
    out.vx = (d00 * r0x + d01 * r1x) / dt + d10 * v0x + d11 * v1x
    out.vy = (d00 * r0y + d01 * r1y) / dt + d10 * v0y + d11 * v1y
    out.vz = (d00 * r0z + d01 * r1z) / dt + d10 * v0z + d11 * v1z
    out.ax = (1.0 - s) * af[i, 0] + s * af[i + 1, 0]
    out.ay = (1.0 - s) * af[i, 1] + s * af[i + 1, 1]
    out.az = (1.0 - s) * af[i, 2] + s * af[i + 1, 2]
    return 0


cdef double _solve_retarded(double[:, ::1] rf, double[:, ::1] vf,
                            double[:, ::1] af, long count, double t0,
                            double dt, double prex, double prey, double prez,
                            bint allow_pre, double ox, double oy, double oz,
                            double t, double tr, State* st) except? -1e300:
    # Converge to the fp-representation floor of f (~3 ulp of t); see _pycore.
    cdef double tol = 1e-12 * dt
    cdef double tt = 6e-16 * fabs(t)
    cdef double f = 0.0
    if tt > tol:
        tol = tt
    cdef double rx, ry, rz, rn, fp, hi, span, lo, mid, tmax
    cdef int it, found
    for it in range(NEWTON_MAX_ITER):
        if tr > t:
            tr = t
        _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre, tr, st)
        rx = ox - st.px
        ry = oy - st.py
        rz = oz - st.pz
        rn = sqrt(rx * rx + ry * ry + rz * rz)
        if rn < EXCLUSION_RADIUS:
            raise SingularityError(
                f"observation point within {EXCLUSION_RADIUS:g} m of the "
                f"retarded source position"
            )
        f = tr - t + rn / C
        if fabs(f) <= tol:
            return tr
        fp = 1.0 - (rx * st.vx + ry * st.vy + rz * st.vz) / (rn * C)
        if fp <= 1e-12:
            break
        tr = tr - f / fp
    hi = t
    span = 4.0 * dt + 2.0 * fabs(f)
    lo = tr - span
    found = 0
    for it in range(64):
        _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre, lo, st)
        rx = ox - st.px
        ry = oy - st.py
        rz = oz - st.pz
        rn = sqrt(rx * rx + ry * ry + rz * rz)
        if lo - t + rn / C <= 0.0:
            found = 1
            break
        span *= 2.0
        lo = t - span
    if not found:
        raise SolverError("no causal bracket found for the retarded time",
                          residual=f)
    tmax = fabs(t)
    if dt > tmax:
        tmax = dt
    for it in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        _interp(rf, vf, af, count, t0, dt, prex, prey, prez, allow_pre, mid, st)
        rx = ox - st.px
        ry = oy - st.py
        rz = oz - st.pz
        rn = sqrt(rx * rx + ry * ry + rz * rz)
        if rn < EXCLUSION_RADIUS:
            raise SingularityError(
                f"observation point within {EXCLUSION_RADIUS:g} m of the "
                f"retarded source position"
            )
        f = mid - t + rn / C
        if fabs(f) <= tol or (hi - lo) <= 1e-18 * tmax:
            return mid
        if f > 0.0:
            hi = mid
        else:
            lo = mid
    raise SolverError("retarded-time solve did not converge", residual=f)


cdef struct Fields:
    double ecx, ecy, ecz
    double erx, ery, erz
    double bx, by, bz
    double phi
    double avx, avy, avz


cdef int _fields_from_state(double q, double ox, double oy, double oz,
                            State* st, Fields* out) except -1:
    cdef double rx, ry, rz, rn, nx, ny, nz, ux, uy, uz, ru, common, c2v2
    cdef double wx, wy, wz, etx, ety, etz, phi
    rx = ox - st.px
    ry = oy - st.py
    rz = oz - st.pz
    rn = sqrt(rx * rx + ry * ry + rz * rz)
    nx = rx / rn
    ny = ry / rn
    nz = rz / rn
    ux = C * nx - st.vx
    uy = C * ny - st.vy
    uz = C * nz - st.vz
    ru = rx * ux + ry * uy + rz * uz
    common = q / FOURPI_EPS0 * rn / (ru * ru * ru)
    c2v2 = C * C - (st.vx * st.vx + st.vy * st.vy + st.vz * st.vz)
    out.ecx = common * c2v2 * ux
    out.ecy = common * c2v2 * uy
    out.ecz = common * c2v2 * uz
    wx = uy * st.az - uz * st.ay
    wy = uz * st.ax - ux * st.az
    wz = ux * st.ay - uy * st.ax
    out.erx = common * (ry * wz - rz * wy)
    out.ery = common * (rz * wx - rx * wz)
    out.erz = common * (rx * wy - ry * wx)
    etx = out.ecx + out.erx
    ety = out.ecy + out.ery
    etz = out.ecz + out.erz
    out.bx = (ny * etz - nz * ety) / C
    out.by = (nz * etx - nx * etz) / C
    out.bz = (nx * ety - ny * etx) / C
    phi = q * C / (FOURPI_EPS0 * ru)
    out.phi = phi
    out.avx = st.vx * phi / (C * C)
    out.avy = st.vy * phi / (C * C)
    out.avz = st.vz * phi / (C * C)
    return 0


def retarded_time(rf, vf, af, long count, double t0, double dt,
                  double prex, double prey, double prez, bint allow_pre,
                  double ox, double oy, double oz, double t):
    """Retarded emission time for an observation at (ox,oy,oz) and time t."""
    cdef double[:, ::1] rv = np.ascontiguousarray(rf, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] vv = np.ascontiguousarray(vf, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] av = np.ascontiguousarray(af, dtype=np.float64).reshape(-1, 3)
    cdef State st
    cdef double t_last = t0 + (count - 1) * dt
    cdef double dx, dy, dz, guess, tq
    if t > t_last + 1e-9 * dt:
        raise DomainError(f"query time {t!r} is beyond the last history sample")
    tq = t if t < t_last else t_last
    _interp(rv, vv, av, count, t0, dt, prex, prey, prez, allow_pre, tq, &st)
    dx = ox - st.px
    dy = oy - st.py
    dz = oz - st.pz
    guess = t - sqrt(dx * dx + dy * dy + dz * dz) / C
    return _solve_retarded(rv, vv, av, count, t0, dt, prex, prey, prez,
                           allow_pre, ox, oy, oz, t, guess, &st)


def lw_eval(double q, rf, vf, af, long count, double t0, double dt,
            double prex, double prey, double prez, bint allow_pre,
            double ox, double oy, double oz, double t):
    """Full Lienard-Wiechert evaluation: (E_coul, E_rad, B, phi, A, t_r)."""
    cdef double[:, ::1] rv = np.ascontiguousarray(rf, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] vv = np.ascontiguousarray(vf, dtype=np.float64).reshape(-1, 3)
    cdef double[:, ::1] av = np.ascontiguousarray(af, dtype=np.float64).reshape(-1, 3)
    cdef State st
    cdef Fields fl
    cdef double t_last = t0 + (count - 1) * dt
    cdef double dx, dy, dz, guess, tr, tq
    if t > t_last + 1e-9 * dt:
        raise DomainError(f"query time {t!r} is beyond the last history sample")
    tq = t if t < t_last else t_last
    _interp(rv, vv, av, count, t0, dt, prex, prey, prez, allow_pre, tq, &st)
    dx = ox - st.px
    dy = oy - st.py
    dz = oz - st.pz
    guess = t - sqrt(dx * dx + dy * dy + dz * dz) / C
    tr = _solve_retarded(rv, vv, av, count, t0, dt, prex, prey, prez,
                         allow_pre, ox, oy, oz, t, guess, &st)
    _fields_from_state(q, ox, oy, oz, &st, &fl)
    return (fl.ecx, fl.ecy, fl.ecz, fl.erx, fl.ery, fl.erz,
            fl.bx, fl.by, fl.bz, fl.phi, fl.avx, fl.avy, fl.avz, tr)


cdef void _com_state(double[:, ::1] BASE, double[::1] DAMP, double[::1] DOMG,
                     double[::1] DPH, double[:, ::1] DAX, long i, double t,
                     double* cx, double* cy, double* cz,
                     double* cvx, double* cvy, double* cvz,
                     double* cax, double* cay, double* caz):
    cdef double amp = DAMP[i]
    cdef double w, ang, s, v, a
    if amp == 0.0:
        cx[0] = BASE[i, 0]; cy[0] = BASE[i, 1]; cz[0] = BASE[i, 2]
        cvx[0] = 0.0; cvy[0] = 0.0; cvz[0] = 0.0
        cax[0] = 0.0; cay[0] = 0.0; caz[0] = 0.0
        return
    w = DOMG[i]
    ang = w * t + DPH[i]
    s = amp * sin(ang)
    v = amp * w * cos(ang)
    a = -amp * w * w * sin(ang)
    cx[0] = BASE[i, 0] + s * DAX[i, 0]
    cy[0] = BASE[i, 1] + s * DAX[i, 1]
    cz[0] = BASE[i, 2] + s * DAX[i, 2]
    cvx[0] = v * DAX[i, 0]
    cvy[0] = v * DAX[i, 1]
    cvz[0] = v * DAX[i, 2]
    cax[0] = a * DAX[i, 0]
    cay[0] = a * DAX[i, 1]
    caz[0] = a * DAX[i, 2]


def run_coupled(qs, ms, w0s, gam0s, pol, base, drv_amp, drv_omega, drv_phase,
                drv_axis, y_init, ydot_init, double dt, long n_steps,
                long stride, long cap, double vel_limit,
                bint per_charge_field=False):
    """Coupled-dipole stepping loop; see _pycore.run_coupled for the contract."""
    cdef long n = len(qs)
    cdef long nq = 2 * n
    if cap < 8:
        raise DomainError("history capacity must be at least 8 rows")
    cdef long keep = cap // 2

    cdef cnp.ndarray[cnp.float64_t, ndim=1] qs_a = np.ascontiguousarray(qs, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ms_a = np.ascontiguousarray(ms, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] w0_a = np.ascontiguousarray(w0s, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] gm_a = np.ascontiguousarray(gam0s, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] pol_a = np.ascontiguousarray(pol, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] base_a = np.ascontiguousarray(base, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] damp_a = np.ascontiguousarray(drv_amp, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] domg_a = np.ascontiguousarray(drv_omega, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dph_a = np.ascontiguousarray(drv_phase, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] dax_a = np.ascontiguousarray(drv_axis, dtype=np.float64)

    cdef double[::1] Q = qs_a
    cdef double[::1] M = ms_a
    cdef double[::1] W0 = w0_a
    cdef double[::1] GAM = gm_a
    cdef double[:, ::1] POL = pol_a
    cdef double[:, ::1] BASE = base_a
    cdef double[::1] DAMP = damp_a
    cdef double[::1] DOMG = domg_a
    cdef double[::1] DPH = dph_a
    cdef double[:, ::1] DAX = dax_a

    # Exact-propagator coefficients per dipole.
    cdef cnp.ndarray[cnp.float64_t, ndim=2] coef = np.zeros((n, 6))
    cdef double[:, ::1] CF = coef
    cdef long i, s_i, c, k, jr, j, nxt, cur
    cdef double w0, g, wt, ex, cs, sn
    for i in range(n):
        w0 = W0[i]
        g = GAM[i]
        wt = sqrt(w0 * w0 - 0.25 * g * g)
        ex = exp(-0.5 * g * dt)
        cs = cos(wt * dt)
        sn = sin(wt * dt)
        CF[i, 0] = ex * (cs + 0.5 * g * sn / wt)   # a11
        CF[i, 1] = ex * sn / wt                    # a12
        CF[i, 2] = -ex * w0 * w0 * sn / wt         # a21
        CF[i, 3] = ex * (cs - 0.5 * g * sn / wt)   # a22
        CF[i, 4] = Q[i] / M[i]                     # q/m_eff
        CF[i, 5] = 1.0 / (w0 * w0)                 # 1/w0^2

    hist_r = np.zeros((nq, cap, 3))
    hist_v = np.zeros((nq, cap, 3))
    hist_a = np.zeros((nq, cap, 3))
    cdef double[:, :, ::1] HR = hist_r
    cdef double[:, :, ::1] HV = hist_v
    cdef double[:, :, ::1] HA = hist_a
    qcharge = np.zeros(nq)
    cdef double[::1] QC = qcharge
    pre = np.zeros((nq, 3))
    cdef double[:, ::1] PRE = pre

    cdef cnp.ndarray[cnp.float64_t, ndim=1] yv = np.ascontiguousarray(y_init, dtype=np.float64).copy()
    cdef cnp.ndarray[cnp.float64_t, ndim=1] ydv = np.ascontiguousarray(ydot_init, dtype=np.float64).copy()
    cdef double[::1] Y = yv
    cdef double[::1] YD = ydv

    cdef double vel2_limit = vel_limit * vel_limit
    cdef double t, tn, cx, cy, cz, cvx, cvy, cvz, cax, cay, caz
    cdef double sg, px_, py_, pz_, ydd, f, yp, dy0, y_new, yd_new
    cdef double ox, oy, oz, dx, dy, dz, guess, tr, epx, epy, epz, acc
    cdef double vx, vy, vz, v2
    cdef long slot, n_obs, ob
    cdef State st
    cdef Fields fl

    # Row 0 (accelerations fixed up with the true field at step 0).
    for i in range(n):
        _com_state(BASE, DAMP, DOMG, DPH, DAX, i, 0.0,
                   &cx, &cy, &cz, &cvx, &cvy, &cvz, &cax, &cay, &caz)
        for s_i in range(2):
            sg = 0.5 if s_i == 0 else -0.5
            c = 2 * i + s_i
            QC[c] = Q[i] if s_i == 0 else -Q[i]
            px_ = cx + sg * Y[i] * POL[i, 0]
            py_ = cy + sg * Y[i] * POL[i, 1]
            pz_ = cz + sg * Y[i] * POL[i, 2]
            HR[c, 0, 0] = px_; HR[c, 0, 1] = py_; HR[c, 0, 2] = pz_
            HV[c, 0, 0] = cvx + sg * YD[i] * POL[i, 0]
            HV[c, 0, 1] = cvy + sg * YD[i] * POL[i, 1]
            HV[c, 0, 2] = cvz + sg * YD[i] * POL[i, 2]
            HA[c, 0, 0] = cax; HA[c, 0, 1] = cay; HA[c, 0, 2] = caz
            PRE[c, 0] = px_; PRE[c, 1] = py_; PRE[c, 2] = pz_

    cdef long m_rec = n_steps // stride + 1
    times = np.empty(m_rec)
    rec_y = np.empty((m_rec, n))
    rec_yd = np.empty((m_rec, n))
    cdef double[::1] TREC = times
    cdef double[:, ::1] YREC = rec_y
    cdef double[:, ::1] YDREC = rec_yd
    TREC[0] = 0.0
    for i in range(n):
        YREC[0, i] = Y[i]
        YDREC[0, i] = YD[i]

    cur = 0
    cdef double t0_hist = 0.0
    cdef bint allow_pre = True
    cdef bint compacted = False
    tr_cache = np.zeros((2 * n, nq))
    tr_cache_ok = np.zeros((2 * n, nq), dtype=np.uint8)
    cdef double[:, ::1] TRC = tr_cache
    cdef cnp.uint8_t[:, ::1] TRCOK = tr_cache_ok
    ed = np.zeros(n)
    cdef double[::1] ED = ed
    cdef long count, drop

    for k in range(n_steps):
        t = k * dt
        count = cur + 1
        for i in range(n):
            _com_state(BASE, DAMP, DOMG, DPH, DAX, i, t,
                       &cx, &cy, &cz, &cvx, &cvy, &cvz, &cax, &cay, &caz)
            n_obs = 2 if per_charge_field else 1
            acc = 0.0
            for ob in range(n_obs):
                if per_charge_field:
                    slot = 2 * i + ob
                    sg = 0.5 if ob == 0 else -0.5
                    ox = cx + sg * Y[i] * POL[i, 0]
                    oy = cy + sg * Y[i] * POL[i, 1]
                    oz = cz + sg * Y[i] * POL[i, 2]
                else:
                    slot = 2 * i
                    ox = cx; oy = cy; oz = cz
                epx = 0.0; epy = 0.0; epz = 0.0
                for j in range(n):
                    if j == i:
                        continue
                    for s_i in range(2):
                        c = 2 * j + s_i
                        if TRCOK[slot, c]:
                            guess = TRC[slot, c] + dt
                        else:
                            dx = ox - HR[c, cur, 0]
                            dy = oy - HR[c, cur, 1]
                            dz = oz - HR[c, cur, 2]
                            guess = t - sqrt(dx * dx + dy * dy + dz * dz) / C
                        tr = _solve_retarded(HR[c], HV[c], HA[c], count,
                                             t0_hist, dt, PRE[c, 0], PRE[c, 1],
                                             PRE[c, 2], allow_pre,
                                             ox, oy, oz, t, guess, &st)
                        TRC[slot, c] = tr
                        TRCOK[slot, c] = 1
                        _fields_from_state(QC[c], ox, oy, oz, &st, &fl)
                        epx += fl.ecx + fl.erx
                        epy += fl.ecy + fl.ery
                        epz += fl.ecz + fl.erz
                acc += epx * POL[i, 0] + epy * POL[i, 1] + epz * POL[i, 2]
            ED[i] = acc / n_obs

        for i in range(n):
            _com_state(BASE, DAMP, DOMG, DPH, DAX, i, t,
                       &cx, &cy, &cz, &cvx, &cvy, &cvz, &cax, &cay, &caz)
            ydd = CF[i, 4] * ED[i] - GAM[i] * YD[i] - W0[i] * W0[i] * Y[i]
            for s_i in range(2):
                sg = 0.5 if s_i == 0 else -0.5
                c = 2 * i + s_i
                HA[c, cur, 0] = cax + sg * ydd * POL[i, 0]
                HA[c, cur, 1] = cay + sg * ydd * POL[i, 1]
                HA[c, cur, 2] = caz + sg * ydd * POL[i, 2]

        tn = (k + 1) * dt
        nxt = cur + 1
        if nxt == cap:
            drop = cap - keep
            hist_r[:, :keep] = hist_r[:, drop:].copy()
            hist_v[:, :keep] = hist_v[:, drop:].copy()
            hist_a[:, :keep] = hist_a[:, drop:].copy()
            t0_hist += drop * dt
            allow_pre = False
            compacted = True
            cur = keep - 1
            nxt = keep

        for i in range(n):
            f = CF[i, 4] * ED[i]
            yp = f * CF[i, 5]
            dy0 = Y[i] - yp
            y_new = yp + CF[i, 0] * dy0 + CF[i, 1] * YD[i]
            yd_new = CF[i, 2] * dy0 + CF[i, 3] * YD[i]
            Y[i] = y_new
            YD[i] = yd_new
            ydd = f - GAM[i] * yd_new - W0[i] * W0[i] * y_new
            _com_state(BASE, DAMP, DOMG, DPH, DAX, i, tn,
                       &cx, &cy, &cz, &cvx, &cvy, &cvz, &cax, &cay, &caz)
            for s_i in range(2):
                sg = 0.5 if s_i == 0 else -0.5
                c = 2 * i + s_i
                HR[c, nxt, 0] = cx + sg * y_new * POL[i, 0]
                HR[c, nxt, 1] = cy + sg * y_new * POL[i, 1]
                HR[c, nxt, 2] = cz + sg * y_new * POL[i, 2]
                vx = cvx + sg * yd_new * POL[i, 0]
                vy = cvy + sg * yd_new * POL[i, 1]
                vz = cvz + sg * yd_new * POL[i, 2]
                HV[c, nxt, 0] = vx
                HV[c, nxt, 1] = vy
                HV[c, nxt, 2] = vz
                HA[c, nxt, 0] = cax + sg * ydd * POL[i, 0]
                HA[c, nxt, 1] = cay + sg * ydd * POL[i, 1]
                HA[c, nxt, 2] = caz + sg * ydd * POL[i, 2]
                v2 = vx * vx + vy * vy + vz * vz
                if v2 > vel2_limit:
                    raise VelocityLimitError(k + 1, sqrt(v2), vel_limit)
        cur = nxt

        if (k + 1) % stride == 0:
            jr = (k + 1) // stride
            TREC[jr] = tn
            for i in range(n):
                YREC[jr, i] = Y[i]
                YDREC[jr, i] = YD[i]

    cdef long rows = cur + 1
    out_r = [hist_r[c, :rows].copy() for c in range(nq)]
    out_v = [hist_v[c, :rows].copy() for c in range(nq)]
    out_a = [hist_a[c, :rows].copy() for c in range(nq)]
    return {
        "times": times,
        "y": rec_y,
        "ydot": rec_yd,
        "hist_r": out_r,
        "hist_v": out_v,
        "hist_a": out_a,
        "hist_t0": t0_hist,
        "hist_pre": [pre[c].copy() for c in range(nq)],
        "hist_charge": [float(qcharge[c]) for c in range(nq)],
        "compacted": compacted,
    }
