"""Double-well potential ``G = betahat + pihat`` and its Moreau-Yosida regularization.

All scalar maps accept floats or arrays and return the same kind.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "PotentialSpec",
    "QUARTIC",
    "RegularizedPotential",
    "resolvent_beta",
    "yosida_beta",
    "moreau_yosida_betahat",
    "G",
    "G_prime",
    "G_eps",
    "G_eps_prime",
]

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class PotentialSpec:
    """Convex part ``betahat`` (with derivative ``beta``) plus a smooth ``pihat``.

    ``beta_prime`` drives the Newton solve for the resolvent and the
    stabilization constant of the linearly implicit schemes.
    """

    betahat: ArrayFn
    beta: ArrayFn
    beta_prime: ArrayFn
    pihat: ArrayFn
    pi: ArrayFn
    pi_lipschitz: float
    name: str = "custom"

    def G(self, r):
        return self.betahat(r) + self.pihat(r)

    def G_prime(self, r):
        return self.beta(r) + self.pi(r)


QUARTIC = PotentialSpec(
    betahat=lambda r: (r * r) * (r * r),
    beta=lambda r: 4.0 * r * r * r,
    beta_prime=lambda r: 12.0 * r * r,
    pihat=lambda r: -2.0 * r * r,
    pi=lambda r: -4.0 * r,
    pi_lipschitz=4.0,
    name="quartic",
)


def _wrap(r, out):
    return float(out) if np.ndim(r) == 0 else out


def resolvent_beta(eps: float, r, spec: PotentialSpec = QUARTIC, max_iter: int = 200):
    """Solve ``s + eps * beta(s) = r`` for ``s``.

    Newton's method from ``s0 = r / (1 + eps * beta(r) / r)``, safeguarded by
    the bracket ``[-|r|, |r|]``: any Newton iterate that leaves the current
    bracket is replaced by the bisection midpoint.
    """
    eps_arr = np.asarray(eps, dtype=float)
    if not np.all(eps_arr > 0):
        raise ValueError(f"eps must be positive, got {eps}")
    r_arr = np.asarray(r, dtype=float)
    shape = np.broadcast_shapes(eps_arr.shape, r_arr.shape)
    rr = np.array(np.broadcast_to(r_arr, shape), dtype=float).reshape(-1)
    eps = np.broadcast_to(eps_arr, shape).reshape(-1) if eps_arr.ndim else float(eps_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        slope = np.where(rr != 0.0, spec.beta(rr) / rr, 0.0)
    s = rr / (1.0 + eps * slope)
    lo = -np.abs(rr)
    hi = np.abs(rr)
    tol = 1e-14 * (1.0 + np.abs(rr))
    active = np.ones(rr.shape, dtype=bool)
    for _ in range(max_iter):
        f = s + eps * spec.beta(s) - rr
        active &= np.abs(f) > tol
        if not active.any():
            break
        lo = np.where(active & (f < 0), s, lo)
        hi = np.where(active & (f > 0), s, hi)
        step = f / (1.0 + eps * spec.beta_prime(s))
        cand = s - step
        outside = (cand <= lo) | (cand >= hi)
        cand = np.where(outside, 0.5 * (lo + hi), cand)
        stalled = cand == s
        active &= ~stalled
        s = np.where(active, cand, s)
    return float(s[0]) if len(shape) == 0 else s.reshape(shape)


def yosida_beta(eps: float, r, spec: PotentialSpec = QUARTIC):
    """``beta_eps(r) = (r - J_eps(r)) / eps``, which equals ``beta(J_eps(r))``.

    Of the two equal expressions the one less sensitive to the error in the
    root is used: ``beta(s)`` where ``eps beta'(s) < 1``, the quotient elsewhere.
    """
    r_arr = np.asarray(r, dtype=float)
    e = np.asarray(eps, dtype=float)
    s = np.asarray(resolvent_beta(eps, r_arr, spec))
    out = np.where(e * spec.beta_prime(s) < 1.0, spec.beta(s), (r_arr - s) / e)
    return _wrap(out, out)


def moreau_yosida_betahat(eps: float, r, spec: PotentialSpec = QUARTIC):
    """Envelope value via the resolvent: ``|r - J|^2 / (2 eps) + betahat(J)``."""
    r_arr = np.asarray(r, dtype=float)
    s = np.asarray(resolvent_beta(eps, r_arr, spec))
    out = (r_arr - s) ** 2 / (2.0 * np.asarray(eps, dtype=float)) + spec.betahat(s)
    return _wrap(out, out)


def G(r, spec: PotentialSpec = QUARTIC):
    return _wrap(r, spec.G(np.asarray(r, dtype=float)))


def G_prime(r, spec: PotentialSpec = QUARTIC):
    return _wrap(r, spec.G_prime(np.asarray(r, dtype=float)))


def G_eps(eps: float, r, spec: PotentialSpec = QUARTIC):
    r_arr = np.asarray(r, dtype=float)
    out = np.asarray(moreau_yosida_betahat(eps, r_arr, spec)) + spec.pihat(r_arr)
    return _wrap(out, out)


def G_eps_prime(eps: float, r, spec: PotentialSpec = QUARTIC):
    r_arr = np.asarray(r, dtype=float)
    out = np.asarray(yosida_beta(eps, r_arr, spec)) + spec.pi(r_arr)
    return _wrap(out, out)


@dataclass(frozen=True)
class RegularizedPotential:
    """The potential at regularization level ``eps``; ``eps = 0`` means unregularized."""

    spec: PotentialSpec = QUARTIC
    eps: float = 0.0

    def __post_init__(self):
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")

    def beta(self, r):
        if self.eps == 0:
            return self.spec.beta(np.asarray(r, dtype=float))
        return yosida_beta(self.eps, r, self.spec)

    def betahat(self, r):
        if self.eps == 0:
            return self.spec.betahat(np.asarray(r, dtype=float))
        return moreau_yosida_betahat(self.eps, r, self.spec)

    def G(self, r):
        return self.betahat(r) + self.spec.pihat(np.asarray(r, dtype=float))

    def G_prime(self, r):
        return self.beta(r) + self.spec.pi(np.asarray(r, dtype=float))

    def resolvent(self, r):
        return resolvent_beta(self.eps, r, self.spec)
