"""Dense small-matrix numerics: Riccati design, stabilizability, symmetric spectra."""

from dataclasses import dataclass

import numpy as np


class AssumptionError(ValueError):
    """A standing assumption of the synchronization design does not hold."""


def _as_matrix(M, name):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise ValueError(f"{name} must be a matrix")
    return M


def is_stabilizable(A, B, tol=1e-8):
    """Eigenvector (PBH) test for stabilizability of the pair (A, B).

    For every eigenvalue of A with nonnegative real part, [A - lambda I, B]
    must have full row rank. Singular values below ``tol`` times the
    largest one count as zero. A small guard band (-1e-9) on the real part
    absorbs eigensolver round-off on marginally stable modes.
    """
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    n = A.shape[0]
    if A.shape[1] != n or B.shape[0] != n:
        raise ValueError("A must be square and B must have matching row count")
    return not _pbh_defects(A, B, tol)


def _pbh_defects(A, B, tol=1e-8):
    # eigenvalues at which [A - lambda I, B] loses row rank
    n = A.shape[0]
    bad = []
    for lam in np.linalg.eigvals(A):
        if lam.real < -1e-9:
            continue
        M = np.hstack([A - lam * np.eye(n), B.astype(complex)])
        s = np.linalg.svd(M, compute_uv=False)
        if s[-1] <= tol * s[0]:
            bad.append(complex(lam))
    return bad


def image_containment(E, B):
    """Least-squares X with B X = E, for disturbances entering through the input.

    Raises AssumptionError when the residual shows that the columns of E
    are not realizable through B (the disturbance is not input-additive).
    """
    E = _as_matrix(E, "E")
    B = _as_matrix(B, "B")
    if B.shape[0] != E.shape[0]:
        raise ValueError("B and E must have the same row count")
    X, *_ = np.linalg.lstsq(B, E, rcond=None)
    X = np.atleast_2d(X)
    resid = np.linalg.norm(B @ X - E)
    if resid > 1e-9 * max(1.0, np.linalg.norm(E)):
        raise AssumptionError(
            "disturbance is not input-additive: im E is not contained in im B "
            f"(least-squares residual {resid:.3e})"
        )
    return X


def min_eigenvalue_sym(M):
    """Smallest eigenvalue of a symmetric matrix (asymmetry above 1e-10 is rejected)."""
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    if np.abs(M - M.T).max() > 1e-10:
        raise ValueError("matrix must be symmetric")
    return float(np.linalg.eigvalsh(M)[0])


class AgentModel:
    """Linear agent dx/dt = A x + B u + E w.

    The disturbance map must be realizable through the input channel:
    construction solves E = B X and refuses models where that fails.

    Parameters
    ----------
    A : (n, n) array
    B : (n, m) array
    E : (n, w) array
    X : (m, w) array, optional
        Factor with E = B X. Computed by least squares when omitted;
        validated when supplied.
    """

    def __init__(self, A, B, E, X=None):
        self.A = _as_matrix(A, "A")
        self.B = _as_matrix(B, "B")
        self.E = _as_matrix(E, "E")
        n = self.A.shape[0]
        if self.A.shape[1] != n:
            raise ValueError("A must be square")
        if self.B.shape[0] != n or self.E.shape[0] != n:
            raise ValueError("B and E must have as many rows as A")
        if X is None:
            X = image_containment(self.E, self.B)
        else:
            X = _as_matrix(X, "X")
            if X.shape != (self.m, self.w):
                raise ValueError("X must be m x w")
            if np.linalg.norm(self.B @ X - self.E) > 1e-9 * max(1.0, np.linalg.norm(self.E)):
                raise ValueError("supplied X does not satisfy E = B X")
        self.X = X

    @property
    def n(self):
        return self.A.shape[0]

    @property
    def m(self):
        return self.B.shape[1]

    @property
    def w(self):
        return self.E.shape[1]

    def __repr__(self):
        return f"AgentModel(n={self.n}, m={self.m}, w={self.w})"


def triple_integrator():
    """The benchmark agent: a chain of three integrators driven through the last state.

    Scalar input and a matching scalar disturbance channel, so the
    disturbance is trivially input-additive (X = 1).
    """
    A = np.array([[0.0, 1.0, 0.0], [0.0, 0.0, 1.0], [0.0, 0.0, 0.0]])
    B = np.array([[0.0], [0.0], [1.0]])
    E = np.array([[0.0], [0.0], [1.0]])
    return AgentModel(A, B, E)


@dataclass(frozen=True)
class RiccatiSolution:
    """Stabilizing solution P of A'P + PA - PBB'P + Q = 0 plus its residual norm."""

    P: np.ndarray
    residual_norm: float


def care_residual(P, A, B, Q=None):
    """Residual A'P + PA - P B B' P + Q (Q defaults to the identity).

    The quadratic term is evaluated as K'K with K = B'P: the products then
    stay at the scale of the result, which keeps the rounding floor low
    enough to certify large-norm solutions.
    """
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    if Q is None:
        Q = np.eye(A.shape[0])
    K = B.T @ P
    return A.T @ P + P @ A - K.T @ K + Q


def lyapunov(Ac, rhs):
    """Solve Ac' X + X Ac = rhs for symmetric X by Kronecker vectorization.

    Dense and cubic in n^2; meant for the small state dimensions this
    toolkit works at.
    """
    Ac = _as_matrix(Ac, "Ac")
    n = Ac.shape[0]
    M = np.kron(np.eye(n), Ac.T) + np.kron(Ac.T, np.eye(n))
    X = np.linalg.solve(M, np.asarray(rhs, dtype=float).reshape(-1)).reshape(n, n)
    return 0.5 * (X + X.T)


def solve_care(A, B, Q=None):
    """Stabilizing solution of the continuous algebraic Riccati equation.

    Solves A'P + PA - P B B' P + Q = 0 for symmetric positive definite P
    with A - B B' P Hurwitz. Q defaults to the identity; a different
    symmetric positive definite Q supports coordinate-change experiments.

    Method: integrate the matrix differential equation dP/dt = A'P + PA
    - P B B' P + Q from P(0) = I with an adaptive step (step doubling for
    error control, symmetrization each step). Once the residual is small
    and the closed loop is already stable, switch to Newton iterations,
    each solving a Lyapunov equation for the correction; from a
    stabilizing iterate Newton converges quadratically.

    Raises
    ------
    AssumptionError
        If (A, B) fails the stabilizability test (no stabilizing solution
        exists), with the offending eigenvalues in the message.
    RuntimeError
        If the iteration does not reach the residual target; the last
        residual norm is carried in the ``residual`` attribute.
    """
    A = _as_matrix(A, "A")
    B = _as_matrix(B, "B")
    n = A.shape[0]
    if A.shape[1] != n or B.shape[0] != n:
        raise ValueError("A must be square and B must have matching row count")
    bad = _pbh_defects(A, B)
    if bad:
        desc = ", ".join(f"{lam:.6g}" for lam in bad)
        raise AssumptionError(
            f"(A, B) is not stabilizable: rank test fails at eigenvalue(s) {desc}"
        )
    if Q is None:
        Qm = np.eye(n)
    else:
        Qm = _as_matrix(Q, "Q")
        if np.abs(Qm - Qm.T).max() > 1e-10:
            raise ValueError("Q must be symmetric")
        Qm = 0.5 * (Qm + Qm.T)

    BBt = B @ B.T

    def resid(P):
        K = B.T @ P
        return A.T @ P + P @ A - K.T @ K + Qm

    def rk4(P0, h):
        k1 = resid(P0)
        k2 = resid(P0 + 0.5 * h * k1)
        k3 = resid(P0 + 0.5 * h * k2)
        k4 = resid(P0 + h * k3)
        return P0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    P = np.eye(n)
    step = 0.05
    for _ in range(20000):
        R = resid(P)
        rnorm = np.linalg.norm(R)
        if rnorm <= 1e-10:
            break
        if rnorm <= 1e-3:
            # Newton converges from any stabilizing iterate; hand off early
            cl = A - BBt @ P
            if np.linalg.eigvals(cl).real.max() < 0:
                break
        while True:
            big = rk4(P, step)
            half = rk4(rk4(P, 0.5 * step), 0.5 * step)
            err = np.linalg.norm(big - half)
            scale = max(1.0, np.linalg.norm(P))
            if err <= 1e-6 * scale or step < 1e-12:
                P = 0.5 * (half + half.T)
                if err < 1e-8 * scale:
                    step = min(step * 2.0, 10.0)
                break
            step *= 0.5
    for _ in range(50):
        R = resid(P)
        # the relative target governs well-scaled problems; the absolute
        # cap keeps large-norm solutions iterating until the returned
        # invariant (residual <= 1e-8) actually holds
        if np.linalg.norm(R) <= min(1e-8, 1e-13 * max(1.0, np.linalg.norm(P))):
            break
        Ac = A - BBt @ P
        delta = lyapunov(Ac, -R)
        P = P + delta
        P = 0.5 * (P + P.T)

    rnorm = float(np.linalg.norm(resid(P)))
    sym_err = float(np.abs(P - P.T).max())
    min_eig = float(np.linalg.eigvalsh(0.5 * (P + P.T))[0])
    cl_max = float(np.linalg.eigvals(A - BBt @ P).real.max())
    if not (rnorm <= 1e-8 and sym_err <= 1e-10 and min_eig > 0 and cl_max < 0):
        exc = RuntimeError(
            "Riccati iteration did not converge to a stabilizing solution: "
            f"residual {rnorm:.3e}, symmetry error {sym_err:.3e}, "
            f"smallest eigenvalue {min_eig:.3e}, closed-loop real part {cl_max:.3e}"
        )
        exc.residual = rnorm
        raise exc
    return RiccatiSolution(P=P, residual_norm=rnorm)
