"""Gaussian interaction kernel and the convolution over the exterior domain.

With even fields on ``(-inf, -eta] U [eta, inf)`` the convolution becomes

    (J * u)(x_i) = sum_j w_j [J(x_i - x_j) + J(x_i + x_j)] u_j,

a Toeplitz part plus a Hankel part that accounts for the mirrored ray.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import erf

from .grid import Domain1D, Field, as_values

__all__ = [
    "KernelSpec",
    "DEFAULT_C_J",
    "kernel_mass",
    "compute_a",
    "KernelOperator",
    "convolve",
    "convolution_operator_symmetry_check",
]

# Amplitude giving total mass 21 in one dimension.
DEFAULT_C_J = 21.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class KernelSpec:
    """``J(x) = c_J exp(-x^2)``; ``profile`` may replace the Gaussian shape.

    A custom profile must be even and nonnegative, and then ``mass`` has to
    be supplied because only the Gaussian has a built-in closed form.
    """

    c_J: float = DEFAULT_C_J
    profile: Callable[[np.ndarray], np.ndarray] | None = None
    mass: float | None = None

    def __post_init__(self):
        if not self.c_J > 0:
            raise ValueError(f"kernel amplitude must be positive, got {self.c_J}")
        if self.profile is not None and self.mass is None:
            raise ValueError("a custom kernel profile needs an explicit L1 mass")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if self.profile is None:
            return self.c_J * np.exp(-x * x)
        return self.c_J * self.profile(x)

    @property
    def is_gaussian(self) -> bool:
        return self.profile is None

    @property
    def L1_mass(self) -> float:
        return kernel_mass(self)


def kernel_mass(spec: KernelSpec) -> float:
    if spec.mass is not None:
        return float(spec.mass)
    return spec.c_J * math.sqrt(math.pi)


def _a_closed(spec: KernelSpec, x: np.ndarray, eta: float) -> np.ndarray:
    m = kernel_mass(spec)
    return m - 0.5 * m * (erf(x + eta) - erf(x - eta))


def _a_segment(spec: KernelSpec, x: np.ndarray, eta: float, L: float) -> np.ndarray:
    # Exact integral of J(x-y) + J(x+y) over y in [eta, eta+L].
    half = 0.5 * kernel_mass(spec)
    return half * (erf(x - eta) - erf(x - eta - L) + erf(x + eta + L) - erf(x + eta))


def compute_a(spec: KernelSpec, domain: Domain1D, method: str = "closed") -> Field:
    """The partial kernel mass ``a(x) = int_Omega J(x - y) dy`` on the grid.

    ``closed``
        erf formula for the untruncated exterior domain (used to check the
        lower bound on ``inf a``).
    ``segment``
        erf formula for the truncated segment plus its mirror image.
    ``quadrature``
        ``J * 1`` with the grid weights; this is the coefficient the dynamics
        use, so constant states interact exactly like the discrete convolution.
    """
    x = domain.nodes
    if method == "quadrature":
        return Field(domain, KernelOperator(spec, domain).apply(np.ones(domain.n)))
    if not spec.is_gaussian:
        raise ValueError(f"method {method!r} requires the Gaussian kernel")
    if method == "closed":
        return Field(domain, _a_closed(spec, x, domain.eta))
    if method == "segment":
        return Field(domain, _a_segment(spec, x, domain.eta, domain.L))
    raise ValueError(f"unknown method {method!r}")


class KernelOperator:
    """Discrete convolution ``u -> J * u`` on a fixed domain.

    The dense matrix is the default path; :meth:`apply_fast` evaluates the
    Toeplitz and Hankel parts by zero-padded real FFTs.
    """

    def __init__(self, spec: KernelSpec, domain: Domain1D):
        self.spec = spec
        self.domain = domain
        x = domain.nodes
        n = domain.n
        h = domain.h
        self.matrix = (spec(x[:, None] - x[None, :]) + spec(x[:, None] + x[None, :])) \
            * domain.weights[None, :]
        self.matrix.flags.writeable = False

        # Toeplitz symbol on the circulant of size 2n, Hankel symbol of length 2n-1.
        t = spec(h * np.arange(n))
        circ = np.concatenate([t, [0.0], t[:0:-1]])
        self._nt = 2 * n
        self._toep_hat = np.fft.rfft(circ)
        g = spec(2.0 * domain.eta + h * np.arange(2 * n - 1))
        self._nh = 1 << int(math.ceil(math.log2(3 * n - 2)))
        self._hank_hat = np.fft.rfft(g, self._nh)

    @property
    def mass(self) -> float:
        return kernel_mass(self.spec)

    def apply(self, u: np.ndarray) -> np.ndarray:
        return self.matrix @ u

    def apply_fast(self, u: np.ndarray) -> np.ndarray:
        n = self.domain.n
        v = self.domain.weights * u
        toep = np.fft.irfft(self._toep_hat * np.fft.rfft(v, self._nt), self._nt)[:n]
        hank = np.fft.irfft(self._hank_hat * np.fft.rfft(v[::-1], self._nh), self._nh)
        return toep + hank[n - 1:2 * n - 1]

    def __call__(self, u):
        return self.apply(u)


def convolve(spec: KernelSpec, domain: Domain1D, u, fast: bool = False,
             operator: KernelOperator | None = None):
    """``J * u``; returns a Field when given a Field, else an array."""
    op = operator if operator is not None else KernelOperator(spec, domain)
    vals = as_values(u, domain)
    out = op.apply_fast(vals) if fast else op.apply(vals)
    return Field(domain, out) if isinstance(u, Field) else out


def convolution_operator_symmetry_check(spec: KernelSpec, domain: Domain1D,
                                        apply: Callable[[np.ndarray], np.ndarray] | None = None,
                                        samples: int = 20, rtol: float = 1e-12,
                                        seed: int = 0) -> bool:
    """Check ``(J*u, v)_H == (u, J*v)_H`` on random pairs.

    ``apply`` substitutes another linear map for the kernel convolution, which
    lets a caller confirm that an asymmetric operator is rejected.
    """
    if apply is None:
        apply = KernelOperator(spec, domain).apply
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        u = rng.standard_normal(domain.n)
        v = rng.standard_normal(domain.n)
        lhs = domain.inner(apply(u), v)
        rhs = domain.inner(u, apply(v))
        scale = kernel_mass(spec) * domain.norm_h(u) * domain.norm_h(v)
        if abs(lhs - rhs) > rtol * scale:
            return False
    return True
