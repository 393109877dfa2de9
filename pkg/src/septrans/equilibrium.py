"""Linear analysis at the hyperbolic equilibrium.

The linearized flow is governed by the product Bmat*A with A = -D^2 V(0,0)
and Bmat = B(0,0).  Because Bmat is positive definite the product is
similar to the symmetric matrix L^T A L (Bmat = L L^T, Cholesky), so its
eigenvalues are real; hyperbolicity means they are positive, and the
Lyapunov exponents are their square roots.  The quadratic part of the
unstable generating function is Eu = N Lam M^{-1} with M the eigenvector
matrix of Bmat*A and N = Bmat^{-1} M.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .models import HamiltonianModel, hessian_at_origin


class NotHyperbolicError(ValueError):
    """Bmat*A has a non-positive eigenvalue; the origin is not a saddle."""


@dataclass(frozen=True)
class Linearization:
    A: np.ndarray
    Bmat: np.ndarray
    lambda1: float
    lambda2: float
    M: np.ndarray
    N: np.ndarray
    Eu: np.ndarray

    @property
    def Es(self) -> np.ndarray:
        return -self.Eu


def check_positive_definite(S: np.ndarray) -> bool:
    """Sylvester test for a symmetric 2x2 matrix."""
    return S[0, 0] > 0 and (S[0, 0] * S[1, 1] - S[0, 1] * S[1, 0]) > 0


def sym_eig_2x2(S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigendecomposition of a symmetric 2x2 matrix.

    Returns (w, U) with eigenvalues w ascending and orthonormal eigenvector
    columns in U.
    """
    a, b, c = S[0, 0], S[0, 1], S[1, 1]
    half_tr = 0.5 * (a + c)
    disc = math.hypot(0.5 * (a - c), b)
    w = np.array([half_tr - disc, half_tr + disc])
    if disc < 1e-300 or abs(b) < 1e-15 * max(1.0, abs(a), abs(c)):
        # (near-)diagonal: eigenvectors are the axes
        if a <= c:
            U = np.eye(2)
        else:
            U = np.array([[0.0, 1.0], [1.0, 0.0]])
            w = np.array([c, a])
        return w, U
    # eigenvector for w[0]: (b, w0 - a) or (w0 - c, b), whichever is larger
    cols = []
    for wk in w:
        v1 = np.array([b, wk - a])
        v2 = np.array([wk - c, b])
        v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
        cols.append(v / np.linalg.norm(v))
    U = np.column_stack(cols)
    return w, U


def linearize(model: HamiltonianModel) -> Linearization:
    """Exponents and unstable quadratic form at the origin.

    Exponent ordering: lambda1 is the exponent whose eigenvector is tangent
    to the loop line q2=0 when one of them is axis-aligned; otherwise the
    exponents are ascending.
    """
    a11, a12, a22 = hessian_at_origin(model)
    A = np.array([[a11, a12], [a12, a22]])
    b11 = model.b110(0.0)
    b12 = model.b120(0.0)
    b22 = model.b220(0.0)
    Bmat = np.array([[b11, b12], [b12, b22]])
    if not check_positive_definite(Bmat):
        raise NotHyperbolicError("B(0,0) is not positive definite")

    # Cholesky Bmat = L L^T in closed form, then C = L^T A L is symmetric
    # and similar to Bmat*A
    l11 = math.sqrt(b11)
    l21 = b12 / l11
    l22 = math.sqrt(b22 - l21 * l21)
    L = np.array([[l11, 0.0], [l21, l22]])
    C = L.T @ A @ L
    w, U = sym_eig_2x2(C)
    if w[0] <= 0:
        raise NotHyperbolicError(
            "Bmat*A has eigenvalues %s; not hyperbolic" % (w,))
    # columns of M are eigenvectors of Bmat*A
    M = L @ U
    lams = np.sqrt(w)

    # ordering: put the loop-tangent direction first when axis-aligned
    tangent = [abs(M[1, k]) < 1e-9 * np.linalg.norm(M[:, k]) for k in (0, 1)]
    if tangent[1] and not tangent[0]:
        M = M[:, ::-1].copy()
        lams = lams[::-1].copy()

    M = M / np.linalg.norm(M, axis=0)
    N = np.linalg.solve(Bmat, M)
    Eu = N @ np.diag(lams) @ np.linalg.inv(M)
    Eu = 0.5 * (Eu + Eu.T)
    return Linearization(A=A, Bmat=Bmat, lambda1=float(lams[0]),
                         lambda2=float(lams[1]), M=M, N=N, Eu=Eu)
