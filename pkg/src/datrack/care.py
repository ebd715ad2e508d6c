"""Continuous algebraic Riccati equation solving for the feedback-gain design.

The solver targets P A + A^T P - P B B^T P + Q = 0 with Q symmetric positive
definite, returning the stabilizing solution (A - B B^T P Hurwitz) and the
gain K = -B^T P. Everything is dense and self-contained: Newton-Kleinman
iteration, each step a Lyapunov solve through the Kronecker-product linear
system. Problem sizes here are tiny (n <= ~10) so the O(n^6) solve is fine.
"""

from dataclasses import dataclass

import numpy as np


class CareSolverError(RuntimeError):
    """CARE solve failed; carries the last residual norm when available."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class CareProblem:
    """(A, B, Q) triple; Q must be symmetric positive definite."""

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B[:, None]
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        if B.shape[0] != n:
            raise ValueError("B row count must match A")
        if Q.shape != (n, n):
            raise ValueError("Q must match A's shape")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Q", Q)


@dataclass(frozen=True)
class CareSolution:
    """Stabilizing solution P, gain K = -B^T P, and the achieved residual."""

    P: np.ndarray
    K: np.ndarray
    residual_norm: float


def is_hurwitz(A) -> bool:
    """True iff every eigenvalue of A has strictly negative real part."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    return bool(np.max(np.linalg.eigvals(A).real) < 0.0)


def is_stabilizable(A, B) -> bool:
    """PBH test: rank [A - lambda I, B] = n at every closed-right-half-plane mode.

    Rank decided from singular values with threshold 1e-9 * sigma_max.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.asarray(B, dtype=float)
    if B.ndim == 1:
        B = B[:, None]
    n = A.shape[0]
    scale = 1.0 + np.abs(np.linalg.eigvals(A).real).max()
    for lam in np.linalg.eigvals(A):
        if lam.real < -1e-9 * scale:
            continue
        M = np.hstack([A - lam * np.eye(n), B.astype(complex)])
        sv = np.linalg.svd(M, compute_uv=False)
        if sv[-1] <= 1e-9 * sv[0]:
            return False
    return True


def solve_lyapunov(A, C):
    """Solve A^T X + X A + C = 0 via the Kronecker-product linear system.

    Two passes of iterative refinement recover digits lost on poorly
    conditioned closed loops.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n = A.shape[0]
    eye = np.eye(n)
    lhs = np.kron(eye, A.T) + np.kron(A.T, eye)
    x = np.linalg.solve(lhs, -C.reshape(-1, order="F"))
    X = x.reshape((n, n), order="F")
    for _ in range(2):
        R = A.T @ X + X @ A + C
        dx = np.linalg.solve(lhs, -R.reshape(-1, order="F"))
        X = X + dx.reshape((n, n), order="F")
    return X


def _initial_stabilizing_gain(A, B):
    """Gain K0 with A + B K0 Hurwitz, found by shifted-Lyapunov stabilization.

    Shift the spectrum right of the imaginary axis by beta, solve
    (A + beta I) Z + Z (A + beta I)^T = 2 B B^T, and take K0 = -B^T pinv(Z).
    The pseudo-inverse keeps stabilizable-but-uncontrollable pairs working
    (Z is singular exactly on the uncontrollable subspace, whose modes are
    already stable).
    """
    n = A.shape[0]
    if is_hurwitz(A):
        return np.zeros((B.shape[1], n))
    beta = 1.0 + max(0.0, -np.min(np.linalg.eigvals(A).real))
    As = A + beta * np.eye(n)
    # Sylvester form: As Z + Z As^T = 2 B B^T  <=>  (I (x) As + As (x) I) vec(Z) = vec(2BB^T)
    lhs = np.kron(np.eye(n), As) + np.kron(As, np.eye(n))
    z = np.linalg.solve(lhs, (2.0 * B @ B.T).reshape(-1, order="F"))
    Z = z.reshape((n, n), order="F")
    Z = 0.5 * (Z + Z.T)
    K0 = -B.T @ np.linalg.pinv(Z, rcond=1e-10)
    if not is_hurwitz(A + B @ K0):
        raise CareSolverError("could not construct an initial stabilizing gain")
    return K0


def care_residual(prob: CareProblem, P) -> float:
    """Frobenius norm of P A + A^T P - P B B^T P + Q."""
    A, B, Q = prob.A, prob.B, prob.Q
    R = P @ A + A.T @ P - P @ B @ B.T @ P + Q
    return float(np.linalg.norm(R, "fro"))


def solve_care(prob: CareProblem, tol: float = 1e-9, max_iter: int = 100) -> CareSolution:
    """Newton-Kleinman iteration to the stabilizing CARE solution.

    Each step solves the closed-loop Lyapunov equation
    (A + B K)^T P + P (A + B K) + Q + K^T K = 0 and refreshes K = -B^T P;
    P is symmetrized every step to suppress drift. Converged when the
    residual Frobenius norm is <= tol * max(1, ||Q||_F); a stalled
    iterate (P no longer moving at double precision) that misses that
    target raises instead of spinning.

    Raises CareSolverError for non-stabilizable pairs, non-SPD Q, or
    failure to converge within max_iter (the error carries the last
    residual).
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    A, B, Q = prob.A, prob.B, prob.Q
    if np.linalg.norm(Q - Q.T, "fro") > 1e-12 * max(1.0, np.linalg.norm(Q, "fro")):
        raise CareSolverError("Q must be symmetric")
    if np.min(np.linalg.eigvalsh(0.5 * (Q + Q.T))) <= 0.0:
        raise CareSolverError("Q must be positive definite")
    if not is_stabilizable(A, B):
        raise CareSolverError("(A, B) is not stabilizable")

    scale = max(1.0, float(np.linalg.norm(Q, "fro")))
    K = _initial_stabilizing_gain(A, B)
    P_prev = None
    residual = np.inf
    for _ in range(max_iter):
        Acl = A + B @ K
        P = solve_lyapunov(Acl, Q + K.T @ K)
        P = 0.5 * (P + P.T)
        K = -B.T @ P
        residual = care_residual(prob, P)
        if residual <= tol * scale:
            return CareSolution(P=P, K=K, residual_norm=residual)
        if P_prev is not None and np.abs(P - P_prev).max() <= 1e-15 * max(1.0, np.abs(P).max()):
            break  # at the double-precision floor, still above tol
        P_prev = P
    raise CareSolverError(
        f"Newton-Kleinman stalled above tolerance "
        f"(residual {residual:.3e}, target {tol * scale:.3e})",
        residual=residual,
    )
