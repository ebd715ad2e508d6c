"""Post-hoc trajectory metrics: decay fits, monotonicity audits, chattering.

These turn the convergence certificates into checkable numbers: the
predicted exponential rate lambda_min(Q)/lambda_max(P), a log-linear fit of
the observed rate, slack-gated monotonicity violations, total variation of
the control as the chattering proxy, and tail-flatness detection for the
adapted gains.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class DecayFit:
    """Least-squares exponential rate on a (time, value) window."""

    eta_hat: float
    r_squared: float
    window: tuple
    n_samples: int


@dataclass(frozen=True)
class ChatteringReport:
    """Total variation per node and channel, plus the largest single jump."""

    total_variation: np.ndarray
    max_step_jump: float


def fit_decay_rate(times, values, window=None) -> DecayFit:
    """Fit value ~ exp(-eta_hat * t) by least squares on (t, ln value).

    Only strictly positive samples inside the window participate. A
    zero-variance time regressor yields slope 0 with r_squared 0 by
    convention. Raises ValueError when fewer than 2 positive samples
    remain (caller shrinks the window).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (float(times[0]), float(times[-1]))
    lo, hi = window
    mask = (times >= lo) & (times <= hi) & (values > 0.0)
    t = times[mask]
    y = np.log(values[mask])
    if t.size < 2:
        raise ValueError("fewer than 2 positive samples in the fit window")
    tc = t - t.mean()
    denom = float(tc @ tc)
    if denom == 0.0:
        return DecayFit(eta_hat=0.0, r_squared=0.0, window=(lo, hi), n_samples=int(t.size))
    slope = float(tc @ (y - y.mean())) / denom
    resid = (y - y.mean()) - slope * tc
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float((resid ** 2).sum()) / ss_tot if ss_tot > 0.0 else (1.0 if abs(slope) < np.inf else 0.0)
    return DecayFit(eta_hat=-slope, r_squared=r2, window=(lo, hi), n_samples=int(t.size))


def monotonicity_violations(times, values, slack=0.0) -> list:
    """Times t_{k+1} where the series rises by more than slack."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 2:
        raise ValueError("need at least 2 samples")
    if slack < 0:
        raise ValueError("slack must be nonnegative")
    rises = values[1:] > values[:-1] + slack
    return [float(t) for t in times[1:][rises]]


def monotonicity_slack(times, values, dt, factor=10.0) -> float:
    """Slack factor * dt * max |dV/dt|, with the derivative estimated from samples."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    rates = np.abs(np.diff(values) / np.diff(times))
    return factor * dt * float(rates.max())


def total_variation(u_series) -> ChatteringReport:
    """Sum of |u_{k+1} - u_k| along axis 0, per trailing channel.

    Accepts (S,), (S, C), or (S, N, p) sampled control series.
    """
    u = np.asarray(u_series, dtype=float)
    if u.shape[0] < 2:
        raise ValueError("need at least 2 samples")
    jumps = np.abs(np.diff(u, axis=0))
    return ChatteringReport(
        total_variation=jumps.sum(axis=0),
        max_step_jump=float(jumps.max()),
    )


def gains_converged(gain_series, tail_fraction=0.1, tol=1e-3, decrease_tol=1e-12):
    """Tail-flatness of non-decreasing gain series.

    gain_series is (S,) for one node or (S, N); returns a bool (or bool
    array per node): max-min over the trailing tail_fraction of samples
    <= tol. A decrease beyond decrease_tol (scaled by the series magnitude)
    means the upstream non-decreasing invariant broke: ValueError.
    """
    g = np.asarray(gain_series, dtype=float)
    if not 0.0 < tail_fraction < 1.0:
        raise ValueError("tail_fraction must be in (0, 1)")
    if tol <= 0:
        raise ValueError("tol must be positive")
    squeeze = g.ndim == 1
    if squeeze:
        g = g[:, None]
    scale = max(1.0, float(np.abs(g).max()))
    if np.any(np.diff(g, axis=0) < -decrease_tol * scale):
        raise ValueError("gain series is decreasing; adaptive invariant broken upstream")
    k = max(2, int(np.ceil(g.shape[0] * tail_fraction)))
    tail = g[-k:]
    conv = (tail.max(axis=0) - tail.min(axis=0)) <= tol
    return bool(conv[0]) if squeeze else conv


def predicted_decay_rate(Q, P) -> float:
    """Certified exponential rate lambda_min(Q) / lambda_max(P) for SPD Q, P."""
    Q = np.atleast_2d(np.asarray(Q, dtype=float))
    P = np.atleast_2d(np.asarray(P, dtype=float))
    for name, M in (("Q", Q), ("P", P)):
        if np.linalg.norm(M - M.T, "fro") > 1e-10 * max(1.0, np.linalg.norm(M, "fro")):
            raise ValueError(f"{name} must be symmetric")
        if np.min(np.linalg.eigvalsh(M)) <= 0.0:
            raise ValueError(f"{name} must be positive definite")
    return float(np.linalg.eigvalsh(Q)[0] / np.linalg.eigvalsh(P)[-1])


def comparison_envelope(times, v0, eta_hat, tail_coeff, c_rate) -> np.ndarray:
    """Exponential envelope v0 e^{-eta t} plus the boundary-layer tail.

    tail_coeff is the constant multiplying the integral of
    e^{-eta (t - tau)} e^{-c tau}; closed form used, with the eta == c
    limit handled continuously.
    """
    t = np.asarray(times, dtype=float)
    base = v0 * np.exp(-eta_hat * t)
    if abs(eta_hat - c_rate) < 1e-12:
        tail = tail_coeff * t * np.exp(-c_rate * t)
    else:
        tail = tail_coeff * (np.exp(-c_rate * t) - np.exp(-eta_hat * t)) / (eta_hat - c_rate)
    return base + tail
