"""Neumann finite-difference operators on the segment.

``N`` is the second-order negative Laplacian with reflecting ghost nodes at
both ends and ``A = N + I``, the grid version of the Riesz map onto the dual
of H^1.  ``W N`` (``W`` the trapezoid weights) is symmetric tridiagonal, so
every shifted system ``(alpha I + beta N) u = v`` is solved through a banded
Cholesky factorization of ``W (alpha I + beta N)``.
"""

from __future__ import annotations

import threading

import numpy as np
from scipy.linalg import cho_solve_banded, cholesky_banded
from scipy import sparse

from .grid import Domain1D, Field, as_values

__all__ = [
    "EllipticOps",
    "apply_A",
    "apply_neg_laplacian",
    "resolvent_J_lambda",
    "resolvent_eps",
    "yosida_laplacian",
    "F_inverse",
    "norm_Vstar",
]


class EllipticOps:
    def __init__(self, domain: Domain1D):
        self.domain = domain
        n, h = domain.n, domain.h
        lower = np.full(n - 1, -1.0 / h ** 2)
        upper = np.full(n - 1, -1.0 / h ** 2)
        upper[0] = -2.0 / h ** 2
        lower[-1] = -2.0 / h ** 2
        self._lower = lower  # N[i+1, i]
        self._upper = upper  # N[i, i+1]
        self._diag = np.full(n, 2.0 / h ** 2)
        # W N: symmetric, off-diagonal -1/h everywhere.
        self._wdiag = domain.weights * self._diag
        self._woff = np.full(n - 1, -1.0 / h)
        self._factors: dict[tuple[float, float], np.ndarray] = {}
        self._lock = threading.Lock()

    # -- matrices -----------------------------------------------------------

    def neg_laplacian_dense(self) -> np.ndarray:
        return (np.diag(self._diag) + np.diag(self._upper, 1) + np.diag(self._lower, -1))

    def neg_laplacian_sparse(self) -> sparse.csr_matrix:
        return sparse.diags([self._lower, self._diag, self._upper], [-1, 0, 1], format="csr")

    def neg_laplacian_bands(self):
        """Raw bands ``(lower, diag, upper)`` of ``N``."""
        return self._lower, self._diag, self._upper

    # -- applications -------------------------------------------------------

    def neg_laplacian(self, u: np.ndarray) -> np.ndarray:
        out = self._diag * u
        out[:-1] += self._upper * u[1:]
        out[1:] += self._lower * u[:-1]
        return out

    def A(self, u: np.ndarray) -> np.ndarray:
        return self.neg_laplacian(u) + u

    def _factor(self, alpha: float, beta: float) -> np.ndarray:
        key = (float(alpha), float(beta))
        ab = self._factors.get(key)
        if ab is None:
            band = np.zeros((2, self.domain.n))
            band[0, 1:] = beta * self._woff
            band[1, :] = alpha * self.domain.weights + beta * self._wdiag
            ab = cholesky_banded(band, lower=False)
            with self._lock:
                self._factors[key] = ab
        return ab

    def prepare(self, lambdas=(), epss=()):
        """Factor every resolvent a run will need before it starts."""
        self._factor(1.0, 1.0)
        for lam in lambdas:
            self._factor(1.0, lam)
        for eps in epss:
            if eps > 0:
                self._factor(1.0 + eps, eps)

    def solve_shifted(self, alpha: float, beta: float, v: np.ndarray) -> np.ndarray:
        """Solve ``(alpha I + beta N) u = v``; requires ``alpha > 0``, ``beta >= 0``."""
        ab = self._factor(alpha, beta)
        return cho_solve_banded((ab, False), self.domain.weights * v)

    def J_lambda(self, lam: float, v: np.ndarray) -> np.ndarray:
        return self.solve_shifted(1.0, lam, v)

    def yosida(self, lam: float, v: np.ndarray) -> np.ndarray:
        return (v - self.J_lambda(lam, v)) / lam

    def resolvent_eps(self, eps: float, v: np.ndarray) -> np.ndarray:
        """``(I + eps A)^{-1} v``."""
        return self.solve_shifted(1.0 + eps, eps, v)

    def F_inverse(self, v: np.ndarray) -> np.ndarray:
        return self.solve_shifted(1.0, 1.0, v)

    def vstar_sq(self, v: np.ndarray) -> float:
        return self.domain.inner(v, self.F_inverse(v))

    def norm_vstar(self, v: np.ndarray) -> float:
        return np.sqrt(max(self.vstar_sq(v), 0.0))

    def v_inner(self, u: np.ndarray, w: np.ndarray) -> float:
        return self.domain.inner(self.A(u), w)


def _wrap(ops: EllipticOps, u, out):
    return Field(ops.domain, out) if isinstance(u, Field) else out


def apply_A(ops: EllipticOps, u):
    return _wrap(ops, u, ops.A(as_values(u, ops.domain)))


def apply_neg_laplacian(ops: EllipticOps, u):
    return _wrap(ops, u, ops.neg_laplacian(as_values(u, ops.domain)))


def resolvent_J_lambda(ops: EllipticOps, lam: float, v):
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return _wrap(ops, v, ops.J_lambda(lam, as_values(v, ops.domain)))


def resolvent_eps(ops: EllipticOps, eps: float, v):
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    return _wrap(ops, v, ops.resolvent_eps(eps, as_values(v, ops.domain)))


def yosida_laplacian(ops: EllipticOps, lam: float, v):
    if not lam > 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    return _wrap(ops, v, ops.yosida(lam, as_values(v, ops.domain)))


def F_inverse(ops: EllipticOps, v):
    return _wrap(ops, v, ops.F_inverse(as_values(v, ops.domain)))


def norm_Vstar(ops: EllipticOps, v) -> float:
    return ops.norm_vstar(as_values(v, ops.domain))
