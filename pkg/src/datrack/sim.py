"""Deterministic fixed-step simulation of the coupled tracking network.

A Scenario bundles graph, dynamics, controller variant, gains, initial
conditions, and the integration grid. simulate() advances references,
filters, agents, and (for the adaptive variant) the per-node gains under
one classical RK4 stepper and returns a sampled Trajectory with the
energy-certificate monitors attached.

The hot loop lives in a compiled kernel (datrack._speedup) when the
extension built, with a numpy fallback (datrack._reference) selected at
import time. Both honor the same contract; see tests/test_kernels.py.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _reference
from .controller import ControllerVariant, RobustGains
from .dynamics import NonlinearField, SystemMatrices, verify_lipschitz
from .graph import UndirectedGraph, is_connected, laplacian
from .care import is_stabilizable

try:
    from . import _speedup
    HAVE_SPEEDUP = True
except ImportError:  # extension not built; numpy fallback only
    _speedup = None
    HAVE_SPEEDUP = False

_VARIANT_CODE = {"robust": 0, "adaptive": 1, "continuous": 2}
_FIELD_CODE = {"zero": 0, "sine": 1, "saturation": 2}


def available_kernels():
    return ("cython", "python") if HAVE_SPEEDUP else ("python",)


def default_kernel():
    return "cython" if HAVE_SPEEDUP else "python"


class ScenarioError(ValueError):
    """Scenario invariants violated; .violations lists them all."""

    def __init__(self, violations):
        super().__init__("; ".join(violations))
        self.violations = list(violations)


class SimulationAborted(RuntimeError):
    """Non-finite state encountered; carries the partial trajectory."""

    def __init__(self, t, node, partial):
        super().__init__(f"non-finite state at t={t:.6g} on node {node}")
        self.t = t
        self.node = node
        self.partial = partial


@dataclass(frozen=True)
class Scenario:
    """Complete experiment description; immutable once built."""

    graph: UndirectedGraph
    matrices: SystemMatrices
    field: NonlinearField
    variant: ControllerVariant
    gains: RobustGains
    x0: np.ndarray
    s0: np.ndarray
    r0: np.ndarray
    t_end: float
    dt: float
    monitor_stride: int
    r_bound: Optional[float] = None

    def __post_init__(self):
        for name in ("x0", "s0", "r0"):
            arr = np.asarray(getattr(self, name), dtype=float)
            object.__setattr__(self, name, arr)

    @property
    def n_nodes(self):
        return self.graph.n_nodes

    @property
    def n_steps(self):
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class Trajectory:
    """Sampled run record; p = s + r holds exactly at every sample."""

    times: np.ndarray
    x: np.ndarray
    s: np.ndarray
    p: np.ndarray
    r: np.ndarray
    u: np.ndarray
    mu: np.ndarray
    alpha: np.ndarray
    consensus_energy: np.ndarray        # V1 = xi^T (L kron P1) xi
    tracking_energy: np.ndarray         # V2 = xtilde^T (I kron P2) xtilde
    consensus_error_norm: np.ndarray    # ||xi|| stacked over nodes
    avg_tracking_error: np.ndarray      # max_i ||x_i - mean_k r_k||
    kernel: str


def validate_scenario(sc: Scenario, lipschitz_pairs=2000) -> list:
    """All violated scenario invariants, by name; empty list means valid."""
    v = []
    N, n, p = sc.graph.n_nodes, sc.matrices.n, sc.matrices.p
    if not is_connected(sc.graph):
        v.append("Assumption 1 violated: graph not connected")
    if not is_stabilizable(sc.matrices.A, sc.matrices.B):
        v.append("Assumption 2 violated: (A, B) not stabilizable")
    ok, worst = verify_lipschitz(sc.field, n_pairs=lipschitz_pairs)
    if not ok:
        v.append(
            f"Assumption 3 spot-check failed: observed Lipschitz ratio {worst:.6g} "
            f"exceeds declared gamma {sc.field.gamma:.6g}"
        )
    if sc.variant.tag in ("adaptive", "continuous") and sc.r_bound is None:
        v.append(
            "Assumption 4 unverifiable: adaptive/continuous variants need a "
            "declared r_bound for the post-run boundedness audit"
        )
    if sc.field.output_dim != p:
        v.append(f"field output_dim {sc.field.output_dim} != input dimension {p}")
    for name in ("x0", "s0", "r0"):
        if getattr(sc, name).shape != (N, n):
            v.append(f"{name} must have shape ({N}, {n})")
    if sc.variant.tag == "adaptive" and sc.variant.adaptive.kappa.shape[0] != N:
        v.append(f"adaptive parameter length != {N} nodes")
    if sc.gains.K1.shape != (p, n) or sc.gains.K2.shape != (p, n):
        v.append("gain shapes inconsistent with (A, B)")
    if sc.dt <= 0 or sc.t_end <= 0 or sc.dt >= sc.t_end:
        v.append("need 0 < dt < t_end")
    else:
        n_steps = int(round(sc.t_end / sc.dt))
        if abs(n_steps * sc.dt - sc.t_end) > 1e-9 * max(1.0, sc.t_end):
            v.append("t_end must be an integer multiple of dt")
        elif sc.monitor_stride < 1 or n_steps % sc.monitor_stride != 0:
            v.append("monitor_stride must be positive and divide t_end/dt")
    return v


def consensus_error(p_all) -> np.ndarray:
    """Deviation of each node's p from the network mean (rows sum to zero)."""
    p_all = np.asarray(p_all, dtype=float)
    return p_all - p_all.mean(axis=0, keepdims=True)


def consensus_energy(xi, L, P1) -> float:
    """Graph-weighted quadratic form sum_ij L_ij xi_i^T P1 xi_j; >= 0."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[0] != np.asarray(L).shape[0]:
        xi = xi.reshape(np.asarray(L).shape[0], -1)
    G = xi @ np.asarray(P1, dtype=float) @ xi.T
    return float(np.sum(np.asarray(L) * G))


def tracking_energy(x_tilde, P2) -> float:
    """Block quadratic form sum_i xtilde_i^T P2 xtilde_i; zero iff xtilde = 0."""
    xt = np.atleast_2d(np.asarray(x_tilde, dtype=float))
    P2 = np.asarray(P2, dtype=float)
    if xt.shape[-1] != P2.shape[0]:
        xt = xt.reshape(-1, P2.shape[0])
    return float(np.einsum("in,nm,im->", xt, P2, xt))


def average_tracking_error(x_all, r_all) -> np.ndarray:
    """Per-node distance to the average reference: ||x_i - mean_k r_k||."""
    x_all = np.asarray(x_all, dtype=float)
    r_bar = np.asarray(r_all, dtype=float).mean(axis=0)
    return np.linalg.norm(x_all - r_bar, axis=1)


def _kernel_module(kernel):
    if kernel is None:
        kernel = default_kernel()
    if kernel == "cython":
        if not HAVE_SPEEDUP:
            raise ValueError("compiled kernel requested but datrack._speedup is not built")
        return _speedup, "cython"
    if kernel == "python":
        return _reference, "python"
    raise ValueError(f"unknown kernel {kernel!r}; expected 'cython' or 'python'")


def simulate(sc: Scenario, kernel=None, zero_input=False) -> Trajectory:
    """Run the scenario and return the sampled trajectory with monitors.

    kernel: None for the fastest available, or 'cython' / 'python' to force
    one. zero_input forces u = 0 (diagnostic mode). Raises ScenarioError on
    invalid scenarios and SimulationAborted (carrying the partial
    trajectory) if the state leaves the finite range.
    """
    violations = validate_scenario(sc)
    if violations:
        raise ScenarioError(violations)
    mod, kname = _kernel_module(kernel)

    N = sc.graph.n_nodes
    offsets, indices = sc.graph.neighbor_csr()
    if sc.variant.tag == "adaptive":
        ap = sc.variant.adaptive
        kappa, chi, mu0, alpha0 = ap.kappa, ap.chi, ap.mu0, ap.alpha0
    else:
        kappa = np.zeros(N)
        chi = np.zeros(N)
        mu0 = np.full(N, sc.gains.mu)
        alpha0 = np.full(N, sc.gains.alpha)
    if sc.variant.tag == "continuous":
        epsilon, c_rate = sc.variant.layer.epsilon, sc.variant.layer.c
    else:
        epsilon, c_rate = 0.0, 0.0

    res = mod.integrate(
        np.ascontiguousarray(sc.matrices.A), np.ascontiguousarray(sc.matrices.B),
        np.ascontiguousarray(sc.gains.K1), np.ascontiguousarray(sc.gains.K2),
        offsets, indices,
        _FIELD_CODE[sc.field.kind], float(sc.field.scale),
        _VARIANT_CODE[sc.variant.tag],
        float(sc.gains.beta), float(sc.gains.nu), float(epsilon), float(c_rate),
        np.ascontiguousarray(kappa, dtype=float), np.ascontiguousarray(chi, dtype=float),
        np.ascontiguousarray(sc.x0), np.ascontiguousarray(sc.s0), np.ascontiguousarray(sc.r0),
        np.ascontiguousarray(mu0, dtype=float), np.ascontiguousarray(alpha0, dtype=float),
        float(sc.dt), sc.n_steps, int(sc.monitor_stride), bool(zero_input),
    )

    m = res["n_samples"]
    traj = _build_trajectory(sc, res, m, kname)
    if res["status"] != 0:
        raise SimulationAborted(res["abort_step"] * sc.dt, res["abort_node"], traj)
    return traj


def _build_trajectory(sc, res, m, kname):
    L = laplacian(sc.graph)
    r = res["r"][:m]
    s = res["s"][:m]
    x = res["x"][:m]
    p = s + r
    xi = p - p.mean(axis=1, keepdims=True)
    xt = x - p
    P1, P2 = sc.gains.P1, sc.gains.P2
    v1 = np.einsum("ij,sin,nm,sjm->s", L, xi, P1, xi)
    v2 = np.einsum("sin,nm,sim->s", xt, P2, xt)
    cons = np.linalg.norm(xi.reshape(m, -1), axis=1)
    r_bar = r.mean(axis=1, keepdims=True)
    avg_err = np.linalg.norm(x - r_bar, axis=2).max(axis=1)
    return Trajectory(
        times=res["times"][:m], x=x, s=s, p=p, r=r, u=res["u"][:m],
        mu=res["mu"][:m], alpha=res["alpha"][:m],
        consensus_energy=v1, tracking_energy=v2,
        consensus_error_norm=cons, avg_tracking_error=avg_err,
        kernel=kname,
    )
