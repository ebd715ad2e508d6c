# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled fixed-step integration kernel.

Same contract as datrack._reference.integrate; plain C loops over the tiny
per-node matrices, no BLAS calls, GIL released for the whole stepping loop.
"""

import numpy as np

from libc.math cimport exp, isfinite, sin, sqrt


cdef struct Params:
    Py_ssize_t N
    Py_ssize_t n
    Py_ssize_t p
    int field_kind
    int variant
    int zero_input
    double field_scale
    double beta
    double nu
    double epsilon
    double c_rate


cdef inline void _field(int kind, double scale, double[::1] v, Py_ssize_t base,
                        Py_ssize_t p, double[::1] out) noexcept nogil:
    cdef Py_ssize_t q
    cdef double z
    for q in range(p):
        z = v[base + q]
        if kind == 0:
            out[q] = 0.0
        elif kind == 1:
            out[q] = scale * sin(z)
        else:
            if z > 1.0:
                z = 1.0
            elif z < -1.0:
                z = -1.0
            out[q] = scale * z

cdef void _rhs(double t, double[::1] v, double[::1] dv, double[:, ::1] U,
               double[:, ::1] A, double[:, ::1] B,
               double[:, ::1] K1, double[:, ::1] K2,
               long[::1] noff, long[::1] nidx,
               double[::1] kappa, double[::1] chi,
               double[:, ::1] pbuf, double[::1] ybuf, double[::1] diry,
               double[::1] k2xt, double[::1] dirx,
               double[::1] fr, double[::1] fx, double[::1] w1, double[::1] ub,
               Params* prm) noexcept nogil:
    cdef Py_ssize_t N = prm.N, n = prm.n, p = prm.p
    cdef Py_ssize_t nn = N * n
    cdef Py_ssize_t i, j, k, kk, q, e, br, bs, bx
    cdef double width = 0.0
    cdef double acc, ny, nk, th, ph, den, d, m_eff, a_eff, uq, accr, accs, accx
    if prm.variant == 2:
        width = prm.epsilon * exp(-prm.c_rate * t)

    for i in range(N):
        for k in range(n):
            pbuf[i, k] = v[nn + i * n + k] + v[i * n + k]

    for i in range(N):
        br = i * n
        bs = nn + i * n
        bx = 2 * nn + i * n

        for q in range(p):
            ybuf[q] = 0.0
        for e in range(noff[i], noff[i + 1]):
            j = nidx[e]
            for q in range(p):
                acc = 0.0
                for k in range(n):
                    acc += K1[q, k] * (pbuf[i, k] - pbuf[j, k])
                ybuf[q] += acc
        ny = 0.0
        for q in range(p):
            ny += ybuf[q] * ybuf[q]
        ny = sqrt(ny)
        if prm.variant == 2:
            den = ny + width
            for q in range(p):
                diry[q] = ybuf[q] / den
        elif ny > 0.0:
            for q in range(p):
                diry[q] = ybuf[q] / ny
        else:
            for q in range(p):
                diry[q] = 0.0

        th = 0.0
        ph = 0.0
        for k in range(n):
            th += v[br + k] * v[br + k]
            d = v[bx + k] - v[br + k]
            ph += d * d
        th = sqrt(th) + prm.beta
        ph = sqrt(ph) + prm.nu

        for q in range(p):
            acc = 0.0
            for k in range(n):
                acc += K2[q, k] * (v[bx + k] - pbuf[i, k])
            k2xt[q] = acc
        nk = 0.0
        for q in range(p):
            nk += k2xt[q] * k2xt[q]
        nk = sqrt(nk)
        if prm.variant == 2:
            den = nk + width
            for q in range(p):
                dirx[q] = k2xt[q] / den
        elif nk > 0.0:
            for q in range(p):
                dirx[q] = k2xt[q] / nk
        else:
            for q in range(p):
                dirx[q] = 0.0

        _field(prm.field_kind, prm.field_scale, v, br, p, fr)
        _field(prm.field_kind, prm.field_scale, v, bx, p, fx)

        m_eff = v[3 * nn + i]
        a_eff = v[3 * nn + N + i]

        for q in range(p):
            acc = 0.0
            for k in range(n):
                acc += K1[q, k] * v[bs + k]
            w1[q] = acc

        for q in range(p):
            if prm.zero_input:
                uq = 0.0
            else:
                uq = w1[q] + k2xt[q] + m_eff * ph * dirx[q] + a_eff * th * diry[q]
            ub[q] = uq
            U[i, q] = uq

        for k in range(n):
            accr = 0.0
            accs = 0.0
            accx = 0.0
            for kk in range(n):
                accr += A[k, kk] * v[br + kk]
                accs += A[k, kk] * v[bs + kk]
                accx += A[k, kk] * v[bx + kk]
            for q in range(p):
                accr += B[k, q] * fr[q]
                accs += B[k, q] * (w1[q] + a_eff * th * diry[q])
                accx += B[k, q] * (fx[q] + ub[q])
            dv[br + k] = accr
            dv[bs + k] = accs
            dv[bx + k] = accx

        if prm.variant == 1:
            dv[3 * nn + i] = kappa[i] * ph * nk
            dv[3 * nn + N + i] = chi[i] * th * ny
        else:
            dv[3 * nn + i] = 0.0
            dv[3 * nn + N + i] = 0.0


def integrate(A, B, K1, K2, nbr_offsets, nbr_indices, field_kind, field_scale,
              variant, beta, nu, epsilon, c_rate, kappa, chi,
              x0, s0, r0, mu0, alpha0, dt, n_steps, stride, zero_input=False):
    """Compiled twin of datrack._reference.integrate; see that docstring."""
    cdef double[:, ::1] A_ = np.ascontiguousarray(A, dtype=np.float64)
    cdef double[:, ::1] B_ = np.ascontiguousarray(B, dtype=np.float64)
    cdef double[:, ::1] K1_ = np.ascontiguousarray(K1, dtype=np.float64)
    cdef double[:, ::1] K2_ = np.ascontiguousarray(K2, dtype=np.float64)
    cdef long[::1] noff = np.ascontiguousarray(nbr_offsets, dtype=np.int64)
    cdef long[::1] nidx = np.ascontiguousarray(nbr_indices, dtype=np.int64)
    cdef double[::1] kap = np.ascontiguousarray(kappa, dtype=np.float64)
    cdef double[::1] ch = np.ascontiguousarray(chi, dtype=np.float64)

    x0a = np.ascontiguousarray(x0, dtype=np.float64)
    cdef Py_ssize_t N = x0a.shape[0]
    cdef Py_ssize_t n = x0a.shape[1]
    cdef Py_ssize_t p = B_.shape[1]
    cdef Py_ssize_t nn = N * n
    cdef Py_ssize_t total = 3 * nn + 2 * N

    cdef Params prm
    prm.N = N
    prm.n = n
    prm.p = p
    prm.field_kind = int(field_kind)
    prm.variant = int(variant)
    prm.zero_input = 1 if zero_input else 0
    prm.field_scale = float(field_scale)
    prm.beta = float(beta)
    prm.nu = float(nu)
    prm.epsilon = float(epsilon)
    prm.c_rate = float(c_rate)

    state_np = np.concatenate([
        np.ascontiguousarray(r0, dtype=np.float64).ravel(),
        np.ascontiguousarray(s0, dtype=np.float64).ravel(),
        x0a.ravel(),
        np.ascontiguousarray(mu0, dtype=np.float64),
        np.ascontiguousarray(alpha0, dtype=np.float64),
    ])
    cdef double[::1] v = state_np

    cdef Py_ssize_t n_samples = n_steps // stride + 1
    times_np = np.zeros(n_samples)
    r_np = np.zeros((n_samples, N, n))
    s_np = np.zeros((n_samples, N, n))
    x_np = np.zeros((n_samples, N, n))
    u_np = np.zeros((n_samples, N, p))
    mu_np = np.zeros((n_samples, N))
    al_np = np.zeros((n_samples, N))
    cdef double[::1] times = times_np
    cdef double[:, :, ::1] rout = r_np
    cdef double[:, :, ::1] sout = s_np
    cdef double[:, :, ::1] xout = x_np
    cdef double[:, :, ::1] uout = u_np
    cdef double[:, ::1] muout = mu_np
    cdef double[:, ::1] alout = al_np

    # stage and scratch buffers
    cdef double[::1] d1 = np.zeros(total)
    cdef double[::1] d2 = np.zeros(total)
    cdef double[::1] d3 = np.zeros(total)
    cdef double[::1] d4 = np.zeros(total)
    cdef double[::1] tmp = np.zeros(total)
    cdef double[:, ::1] Ustage = np.zeros((N, p))
    cdef double[:, ::1] Urec = np.zeros((N, p))
    cdef double[:, ::1] pbuf = np.zeros((N, n))
    cdef double[::1] ybuf = np.zeros(p)
    cdef double[::1] diry = np.zeros(p)
    cdef double[::1] k2xt = np.zeros(p)
    cdef double[::1] dirx = np.zeros(p)
    cdef double[::1] fr = np.zeros(p)
    cdef double[::1] fx = np.zeros(p)
    cdef double[::1] w1 = np.zeros(p)
    cdef double[::1] ub = np.zeros(p)

    cdef double dtc = float(dt)
    cdef double half = 0.5 * dtc
    cdef double sixth = dtc / 6.0
    cdef Py_ssize_t steps = int(n_steps)
    cdef Py_ssize_t strd = int(stride)
    cdef Py_ssize_t step, idx, rec, i, k, q, bad
    cdef double t, ts
    cdef int status = 0
    cdef Py_ssize_t abort_step = -1
    cdef Py_ssize_t abort_node = -1

    with nogil:
        # sample 0
        _rhs(0.0, v, d1, Urec, A_, B_, K1_, K2_, noff, nidx, kap, ch,
             pbuf, ybuf, diry, k2xt, dirx, fr, fx, w1, ub, &prm)
        times[0] = 0.0
        for i in range(N):
            for k in range(n):
                rout[0, i, k] = v[i * n + k]
                sout[0, i, k] = v[nn + i * n + k]
                xout[0, i, k] = v[2 * nn + i * n + k]
            for q in range(p):
                uout[0, i, q] = Urec[i, q]
            muout[0, i] = v[3 * nn + i]
            alout[0, i] = v[3 * nn + N + i]
        rec = 1

        for step in range(steps):
            t = step * dtc
            _rhs(t, v, d1, Ustage, A_, B_, K1_, K2_, noff, nidx, kap, ch,
                 pbuf, ybuf, diry, k2xt, dirx, fr, fx, w1, ub, &prm)
            for idx in range(total):
                tmp[idx] = v[idx] + half * d1[idx]
            _rhs(t + half, tmp, d2, Ustage, A_, B_, K1_, K2_, noff, nidx, kap, ch,
                 pbuf, ybuf, diry, k2xt, dirx, fr, fx, w1, ub, &prm)
            for idx in range(total):
                tmp[idx] = v[idx] + half * d2[idx]
            _rhs(t + half, tmp, d3, Ustage, A_, B_, K1_, K2_, noff, nidx, kap, ch,
                 pbuf, ybuf, diry, k2xt, dirx, fr, fx, w1, ub, &prm)
            for idx in range(total):
                tmp[idx] = v[idx] + dtc * d3[idx]
            _rhs(t + dtc, tmp, d4, Ustage, A_, B_, K1_, K2_, noff, nidx, kap, ch,
                 pbuf, ybuf, diry, k2xt, dirx, fr, fx, w1, ub, &prm)
            for idx in range(total):
                v[idx] = v[idx] + sixth * (d1[idx] + 2.0 * d2[idx] + 2.0 * d3[idx] + d4[idx])

            bad = -1
            for idx in range(total):
                if not isfinite(v[idx]):
                    bad = idx
                    break
            if bad >= 0:
                status = 1
                abort_step = step + 1
                if bad < 3 * nn:
                    abort_node = (bad % nn) // n
                else:
                    abort_node = (bad - 3 * nn) % N
                break

            if (step + 1) % strd == 0:
                ts = (step + 1) * dtc
                _rhs(ts, v, d1, Urec, A_, B_, K1_, K2_, noff, nidx, kap, ch,
                     pbuf, ybuf, diry, k2xt, dirx, fr, fx, w1, ub, &prm)
                times[rec] = ts
                for i in range(N):
                    for k in range(n):
                        rout[rec, i, k] = v[i * n + k]
                        sout[rec, i, k] = v[nn + i * n + k]
                        xout[rec, i, k] = v[2 * nn + i * n + k]
                    for q in range(p):
                        uout[rec, i, q] = Urec[i, q]
                    muout[rec, i] = v[3 * nn + i]
                    alout[rec, i] = v[3 * nn + N + i]
                rec += 1

    return {
        "status": status,
        "n_samples": int(rec),
        "abort_step": int(abort_step),
        "abort_node": int(abort_node),
        "times": times_np,
        "r": r_np,
        "s": s_np,
        "x": x_np,
        "u": u_np,
        "mu": mu_np,
        "alpha": al_np,
    }
