"""Gain synthesis and the three tracking controller / filter families.

The robust family uses constant switching gains sized from the Lipschitz
constant and the Riccati solutions; the adaptive family replaces them with
per-node integrated gains so no global constant is needed; the continuous
family swaps the unit direction for its boundary-layer smoothing to kill
chattering.

The controller's consensus term is applied without the input matrix B
(the filter keeps it), which makes B @ u_i reproduce the intended
tracking-error dynamics exactly; see design notes in the README.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .care import CareProblem, solve_care
from .dynamics import BoundaryLayer, SystemMatrices, smoothed_direction, unit_direction

VARIANTS = ("robust", "adaptive", "continuous")


@dataclass(frozen=True)
class RobustGains:
    """Riccati gains plus the constant switching parameters.

    alpha dominates gamma + ||B^T P1|| and mu dominates gamma by
    construction in design_gains; beta and nu keep the state-dependent
    scales strictly positive.
    """

    K1: np.ndarray
    K2: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    alpha: float
    beta: float
    mu: float
    nu: float

    def __post_init__(self):
        if self.beta <= 0:
            raise ValueError("beta must be positive")
        if self.nu <= 0:
            raise ValueError("nu must be positive")


@dataclass(frozen=True)
class AdaptiveParams:
    """Per-node adaptation rates and initial gain values."""

    kappa: np.ndarray
    chi: np.ndarray
    mu0: np.ndarray
    alpha0: np.ndarray

    def __post_init__(self):
        for name in ("kappa", "chi", "mu0", "alpha0"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name), dtype=float)))
        if len({v.shape[0] for v in (self.kappa, self.chi, self.mu0, self.alpha0)}) != 1:
            raise ValueError("per-node parameter lengths differ")
        if np.any(self.kappa <= 0) or np.any(self.chi <= 0):
            raise ValueError("kappa and chi must be positive")
        if np.any(self.mu0 < 0) or np.any(self.alpha0 < 0):
            raise ValueError("initial gains must be nonnegative")

    @classmethod
    def broadcast(cls, n_nodes, kappa=1.0, chi=1.0, mu0=0.0, alpha0=0.0):
        """Scalar convenience: same value on every node."""
        full = lambda v: np.full(n_nodes, float(v))
        return cls(kappa=full(kappa), chi=full(chi), mu0=full(mu0), alpha0=full(alpha0))


@dataclass(frozen=True)
class ControllerVariant:
    """Which controller family runs, with its family-specific payload."""

    tag: str
    layer: Optional[BoundaryLayer] = None
    adaptive: Optional[AdaptiveParams] = None

    def __post_init__(self):
        if self.tag not in VARIANTS:
            raise ValueError(f"unknown variant {self.tag!r}; expected one of {VARIANTS}")
        if (self.tag == "continuous") != (self.layer is not None):
            raise ValueError("boundary layer required exactly for the continuous variant")
        if (self.tag == "adaptive") != (self.adaptive is not None):
            raise ValueError("adaptive parameters required exactly for the adaptive variant")


def design_gains(mat: SystemMatrices, Q1, Q2, gamma,
                 alpha_margin=0.0, beta=0.1, mu_margin=0.0, nu=0.1,
                 care_tol=1e-10) -> RobustGains:
    """Two Riccati solves plus the switching-gain sizing rule.

    alpha = gamma + ||B^T P1||_2 + alpha_margin and mu = gamma + mu_margin,
    the smallest choices the convergence analysis allows, padded by the
    caller's margins.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    if alpha_margin < 0 or mu_margin < 0:
        raise ValueError("margins must be nonnegative")
    sol1 = solve_care(CareProblem(mat.A, mat.B, np.asarray(Q1, dtype=float)), tol=care_tol)
    sol2 = solve_care(CareProblem(mat.A, mat.B, np.asarray(Q2, dtype=float)), tol=care_tol)
    alpha = gamma + float(np.linalg.norm(mat.B.T @ sol1.P, 2)) + alpha_margin
    return RobustGains(
        K1=sol1.K, K2=sol2.K, P1=sol1.P, P2=sol2.P,
        alpha=alpha, beta=beta, mu=gamma + mu_margin, nu=nu,
    )


def tracking_scale(x_i, r_i, nu) -> float:
    """State-dependent scale ||x_i - r_i|| + nu on the tracking switch."""
    if nu <= 0:
        raise ValueError("nu must be positive")
    return float(np.linalg.norm(np.asarray(x_i, dtype=float) - np.asarray(r_i, dtype=float))) + nu


def reference_scale(r_i, beta) -> float:
    """State-dependent scale ||r_i|| + beta on the consensus switch."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    return float(np.linalg.norm(np.asarray(r_i, dtype=float))) + beta


def consensus_argument(K1, p_i, p_neighbors) -> np.ndarray:
    """Sum over neighbors of K1 (p_i - p_j), the consensus switching argument."""
    p_i = np.asarray(p_i, dtype=float)
    out = np.zeros(np.asarray(K1).shape[0])
    for p_j in p_neighbors:
        out += K1 @ (p_i - np.asarray(p_j, dtype=float))
    return out


def _direction(variant: ControllerVariant, x, t):
    if variant.tag == "continuous":
        return smoothed_direction(x, variant.layer, t)
    return unit_direction(x)


def filter_rhs(variant: ControllerVariant, gains: RobustGains, mat: SystemMatrices,
               s_i, r_i, p_neighbors, alpha_i=None, t=0.0) -> np.ndarray:
    """Estimator-state dynamics for one node.

    ds_i = A s_i + B K1 (p_i - r_i)
           + alpha_eff * (||r_i|| + beta) * B * dir(sum_j K1 (p_i - p_j))
    with p_i = s_i + r_i, alpha_eff the constant gain or the node's adapted
    one, and dir the variant's direction map.
    """
    s_i = np.asarray(s_i, dtype=float)
    r_i = np.asarray(r_i, dtype=float)
    if s_i.shape != (mat.n,) or r_i.shape != (mat.n,):
        raise ValueError("state dimension mismatch")
    p_i = s_i + r_i
    y = consensus_argument(gains.K1, p_i, p_neighbors)
    a_eff = gains.alpha if variant.tag != "adaptive" else float(alpha_i)
    th = reference_scale(r_i, gains.beta)
    return mat.A @ s_i + mat.B @ (gains.K1 @ s_i + a_eff * th * _direction(variant, y, t))


def control_input(variant: ControllerVariant, gains: RobustGains,
                  x_i, p_i, r_i, p_neighbors, mu_i=None, alpha_i=None, t=0.0) -> np.ndarray:
    """Agent input for one node.

    u_i = K1 (p_i - r_i) + K2 (x_i - p_i)
          + mu_eff  * (||x_i - r_i|| + nu)  * dir(K2 (x_i - p_i))
          + alpha_eff * (||r_i|| + beta)    * dir(sum_j K1 (p_i - p_j))
    """
    x_i = np.asarray(x_i, dtype=float)
    p_i = np.asarray(p_i, dtype=float)
    r_i = np.asarray(r_i, dtype=float)
    if not (x_i.shape == p_i.shape == r_i.shape):
        raise ValueError("state dimension mismatch")
    x_tilde = x_i - p_i
    k2xt = gains.K2 @ x_tilde
    y = consensus_argument(gains.K1, p_i, p_neighbors)
    if variant.tag == "adaptive":
        m_eff, a_eff = float(mu_i), float(alpha_i)
    else:
        m_eff, a_eff = gains.mu, gains.alpha
    ph = tracking_scale(x_i, r_i, gains.nu)
    th = reference_scale(r_i, gains.beta)
    return (gains.K1 @ (p_i - r_i) + k2xt
            + m_eff * ph * _direction(variant, k2xt, t)
            + a_eff * th * _direction(variant, y, t))


def adaptive_gain_rates(params: AdaptiveParams, i, k2_x_tilde, k1_neighbor_sum,
                        tracking_scale_i, reference_scale_i):
    """Gain growth rates (dmu_i, dalpha_i); both nonnegative by construction."""
    if tracking_scale_i <= 0 or reference_scale_i <= 0:
        raise ValueError("scales must be positive")
    dmu = params.kappa[i] * tracking_scale_i * float(np.linalg.norm(k2_x_tilde))
    dalpha = params.chi[i] * reference_scale_i * float(np.linalg.norm(k1_neighbor_sum))
    return float(dmu), float(dalpha)
