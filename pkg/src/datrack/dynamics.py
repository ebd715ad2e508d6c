"""Lipschitz nonlinear fields, direction maps, and the reference dynamics.

The builtin field catalogue (zero / sine / saturation) is deliberately small:
each member has an exact, declared Lipschitz constant gamma with f(0, t) = 0,
which the gain design relies on. The direction maps are the unit-norm field
x/||x|| and its boundary-layer smoothing x/(||x|| + eps*exp(-c t)).
"""

from dataclasses import dataclass

import numpy as np

FIELD_KINDS = ("zero", "sine", "saturation")


@dataclass(frozen=True)
class SystemMatrices:
    """Constant (A, B) pair shared by agents and references."""

    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        if A.shape[0] != A.shape[1]:
            raise ValueError("A must be square")
        if B.shape[0] != A.shape[0]:
            raise ValueError("B row count must match A")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def p(self):
        return self.B.shape[1]


@dataclass(frozen=True)
class NonlinearField:
    """Builtin nonlinearity with declared Lipschitz constant gamma.

    Acts on the first output_dim state components, so B @ f(theta, t) is
    dimensionally consistent with the state equation. `scale` is the actual
    amplitude of the nonlinearity and defaults to gamma; declaring a gamma
    below the scale is the mistake verify_lipschitz exists to catch, while
    gamma above the scale is simply a conservative bound.
    """

    kind: str
    gamma: float
    output_dim: int = 1
    scale: float = None

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}; expected one of {FIELD_KINDS}")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")
        if self.output_dim < 1:
            raise ValueError("output_dim must be positive")
        if self.scale is None:
            object.__setattr__(self, "scale", float(self.gamma))
        elif self.scale < 0:
            raise ValueError("scale must be nonnegative")


@dataclass(frozen=True)
class BoundaryLayer:
    """Shrinking boundary layer eps * exp(-c t) for the smoothed direction map."""

    epsilon: float
    c: float

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if self.c <= 0:
            raise ValueError("c must be positive")

    def width(self, t):
        return self.epsilon * np.exp(-self.c * t)


def eval_field(field: NonlinearField, theta, t=0.0) -> np.ndarray:
    """Evaluate the builtin field at state theta (first output_dim components)."""
    theta = np.asarray(theta, dtype=float)
    p = field.output_dim
    if theta.shape[-1] < p:
        raise ValueError(f"state dimension {theta.shape[-1]} below field output_dim {p}")
    head = theta[..., :p]
    if field.kind == "zero":
        return np.zeros_like(head)
    if field.kind == "sine":
        return field.scale * np.sin(head)
    return field.scale * np.clip(head, -1.0, 1.0)


def lipschitz_margin(fun, gamma, dim, n_pairs=10_000, box_radius=10.0, seed=0):
    """Spot-check ||f(a,t)-f(b,t)|| <= gamma ||a-b|| on random pairs in a box.

    Returns (ok, worst_ratio) where worst_ratio is the largest observed
    ||df||/||dtheta||. The declared bound is accepted up to a 1e-12 relative
    rounding allowance. `fun` is any callable (theta, t) -> vector.
    """
    if n_pairs < 1:
        raise ValueError("need at least one sample pair")
    rng = np.random.default_rng(seed)
    worst = 0.0
    ok = True
    for _ in range(n_pairs):
        a = rng.uniform(-box_radius, box_radius, dim)
        b = rng.uniform(-box_radius, box_radius, dim)
        t = rng.uniform(0.0, 10.0)
        dth = np.linalg.norm(a - b)
        if dth == 0.0:
            continue
        df = np.linalg.norm(np.asarray(fun(a, t), dtype=float) - np.asarray(fun(b, t), dtype=float))
        ratio = df / dth
        worst = max(worst, ratio)
        if df > gamma * dth * (1.0 + 1e-12):
            ok = False
    return ok, worst


def verify_lipschitz(field: NonlinearField, n_pairs=10_000, box_radius=10.0, seed=0):
    """lipschitz_margin specialized to a builtin field and its declared gamma."""
    return lipschitz_margin(
        lambda th, t: eval_field(field, th, t),
        field.gamma,
        field.output_dim,
        n_pairs=n_pairs,
        box_radius=box_radius,
        seed=seed,
    )


def unit_direction(x) -> np.ndarray:
    """x / ||x|| with the 0 -> 0 convention at the origin."""
    x = np.asarray(x, dtype=float)
    nrm = np.linalg.norm(x)
    if nrm == 0.0:
        return np.zeros_like(x)
    return x / nrm


def smoothed_direction(x, layer: BoundaryLayer, t) -> np.ndarray:
    """x / (||x|| + eps*exp(-c t)): continuous everywhere, norm < 1."""
    x = np.asarray(x, dtype=float)
    return x / (np.linalg.norm(x) + layer.width(t))


def reference_rhs(mat: SystemMatrices, field: NonlinearField, r, t) -> np.ndarray:
    """Reference signal dynamics: A r + B f(r, t)."""
    r = np.asarray(r, dtype=float)
    if r.shape[-1] != mat.n:
        raise ValueError(f"reference state dimension {r.shape[-1]} != {mat.n}")
    return mat.A @ r + mat.B @ eval_field(field, r, t)
