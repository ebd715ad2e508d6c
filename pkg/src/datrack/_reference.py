"""Pure-numpy fixed-step integration kernel.

Fallback used when the compiled stepper is unavailable, and the readable
reference the compiled kernel is tested against. Shares its exact argument
and result contract with datrack._speedup.integrate.

Variant codes: 0 robust, 1 adaptive, 2 continuous.
Field codes: 0 zero, 1 sine, 2 saturation.
Status codes: 0 completed, 1 aborted on non-finite state.
"""

import numpy as np


def _field_rows(kind, scale, states, p):
    head = states[:, :p]
    if kind == 0:
        return np.zeros_like(head)
    if kind == 1:
        return scale * np.sin(head)
    return scale * np.clip(head, -1.0, 1.0)


def _direction_rows(y, width):
    """Row-wise y/||y|| (width=0, zero rows stay zero) or y/(||y||+width)."""
    norms = np.linalg.norm(y, axis=1)
    if width == 0.0:
        out = np.zeros_like(y)
        nz = norms > 0.0
        out[nz] = y[nz] / norms[nz, None]
        return out
    return y / (norms + width)[:, None]


def integrate(A, B, K1, K2, nbr_offsets, nbr_indices, field_kind, field_scale,
              variant, beta, nu, epsilon, c_rate, kappa, chi,
              x0, s0, r0, mu0, alpha0, dt, n_steps, stride, zero_input=False):
    """Integrate the coupled reference / filter / agent / gain system.

    Classical RK4 with fixed step dt for n_steps steps, sampling every
    `stride` steps (step 0 included). Returns a dict with the sampled
    series and an abort record; deterministic for identical inputs.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    K1 = np.asarray(K1, dtype=float)
    K2 = np.asarray(K2, dtype=float)
    N, n = np.asarray(x0).shape
    p = B.shape[1]

    # Neighbor sums via the Laplacian: sum_j (v_i - v_j) over N_i == (L v)_i.
    L = np.zeros((N, N))
    for i in range(N):
        for k in range(nbr_offsets[i], nbr_offsets[i + 1]):
            j = nbr_indices[k]
            L[i, i] += 1.0
            L[i, j] -= 1.0

    adaptive = variant == 1
    continuous = variant == 2

    nn = N * n
    state = np.concatenate([
        np.asarray(r0, dtype=float).ravel(),
        np.asarray(s0, dtype=float).ravel(),
        np.asarray(x0, dtype=float).ravel(),
        np.asarray(mu0, dtype=float),
        np.asarray(alpha0, dtype=float),
    ])

    def rhs(t, v):
        R = v[:nn].reshape(N, n)
        S = v[nn:2 * nn].reshape(N, n)
        X = v[2 * nn:3 * nn].reshape(N, n)
        MU = v[3 * nn:3 * nn + N]
        AL = v[3 * nn + N:]

        P = S + R
        width = epsilon * np.exp(-c_rate * t) if continuous else 0.0
        Y = (L @ P) @ K1.T
        dir_y = _direction_rows(Y, width)
        th = np.linalg.norm(R, axis=1) + beta
        ph = np.linalg.norm(X - R, axis=1) + nu

        k2xt = (X - P) @ K2.T
        dir_x = _direction_rows(k2xt, width)

        a_eff = AL
        m_eff = MU

        f_r = _field_rows(field_kind, field_scale, R, p)
        f_x = _field_rows(field_kind, field_scale, X, p)

        w1 = S @ K1.T                       # K1 (p_i - r_i) = K1 s_i
        cons = (a_eff * th)[:, None] * dir_y
        U = w1 + k2xt + (m_eff * ph)[:, None] * dir_x + cons
        if zero_input:
            U = np.zeros_like(U)

        dR = R @ A.T + f_r @ B.T
        dS = S @ A.T + (w1 + cons) @ B.T
        dX = X @ A.T + (f_x + U) @ B.T
        if adaptive:
            dMU = kappa * ph * np.linalg.norm(k2xt, axis=1)
            dAL = chi * th * np.linalg.norm(Y, axis=1)
        else:
            dMU = np.zeros(N)
            dAL = np.zeros(N)
        return np.concatenate([dR.ravel(), dS.ravel(), dX.ravel(), dMU, dAL]), U

    n_samples = n_steps // stride + 1
    out = {
        "times": np.zeros(n_samples),
        "r": np.zeros((n_samples, N, n)),
        "s": np.zeros((n_samples, N, n)),
        "x": np.zeros((n_samples, N, n)),
        "u": np.zeros((n_samples, N, p)),
        "mu": np.zeros((n_samples, N)),
        "alpha": np.zeros((n_samples, N)),
    }

    def record(idx, t, v):
        _, U = rhs(t, v)
        out["times"][idx] = t
        out["r"][idx] = v[:nn].reshape(N, n)
        out["s"][idx] = v[nn:2 * nn].reshape(N, n)
        out["x"][idx] = v[2 * nn:3 * nn].reshape(N, n)
        out["u"][idx] = U
        out["mu"][idx] = v[3 * nn:3 * nn + N]
        out["alpha"][idx] = v[3 * nn + N:]

    status = 0
    abort_step = -1
    abort_node = -1
    recorded = 0
    record(0, 0.0, state)
    recorded = 1

    half = 0.5 * dt
    sixth = dt / 6.0
    for k in range(n_steps):
        t = k * dt
        d1, _ = rhs(t, state)
        d2, _ = rhs(t + half, state + half * d1)
        d3, _ = rhs(t + half, state + half * d2)
        d4, _ = rhs(t + dt, state + dt * d3)
        state = state + sixth * (d1 + 2.0 * d2 + 2.0 * d3 + d4)
        if not np.all(np.isfinite(state)):
            status = 1
            abort_step = k + 1
            bad = int(np.flatnonzero(~np.isfinite(state))[0])
            abort_node = (bad % nn) // n if bad < 3 * nn else (bad - 3 * nn) % N
            break
        if (k + 1) % stride == 0:
            record(recorded, (k + 1) * dt, state)
            recorded += 1

    return {
        "status": status,
        "n_samples": recorded,
        "abort_step": abort_step,
        "abort_node": abort_node,
        **out,
    }
