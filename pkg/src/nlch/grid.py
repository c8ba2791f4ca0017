"""Uniform grid on the even-symmetric exterior domain.

The exterior domain ``R \\ (-eta, eta)`` is represented by its right ray
truncated to ``[eta, eta + L]``.  Fields are assumed even, so every integral
over the full domain is twice the integral over the segment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainMismatchError

__all__ = [
    "Domain1D",
    "Field",
    "make_domain",
    "as_values",
    "inner_H",
    "norm_H",
    "norm_V",
]


@dataclass(frozen=True, eq=False)
class Domain1D:
    eta: float
    L: float
    n: int
    symmetry_factor: float = 2.0
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not (self.eta > 0 and self.L > 0):
            raise ConfigurationError(
                f"domain needs eta > 0 and L > 0, got eta={self.eta}, L={self.L}")
        if int(self.n) != self.n or self.n < 3:
            raise ConfigurationError(f"domain needs n >= 3 nodes, got n={self.n}")
        h = self.L / (self.n - 1)
        nodes = self.eta + h * np.arange(self.n)
        nodes[-1] = self.eta + self.L
        w = np.full(self.n, h)
        w[0] = w[-1] = 0.5 * h
        nodes.flags.writeable = False
        w.flags.writeable = False
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", w)

    @property
    def h(self) -> float:
        return self.L / (self.n - 1)

    def same_as(self, other: "Domain1D") -> bool:
        return self is other or (
            self.eta == other.eta and self.L == other.L and self.n == other.n
            and self.symmetry_factor == other.symmetry_factor)

    # Array-level primitives; the Field-level functions below delegate here.

    def inner(self, u, v) -> float:
        """Weighted inner product over both rays."""
        return self.symmetry_factor * float(np.dot(self.weights * u, v))

    def norm_h(self, u) -> float:
        return np.sqrt(self.inner(u, u))

    def grad_sq(self, u) -> float:
        """Squared L2 norm of the cell-edge difference quotient, both rays.

        Equal to ``inner(-lap u, u)`` for the Neumann Laplacian of
        :mod:`nlch.operators`, so the discrete V product is exactly
        ``(A u, u)_H``.
        """
        d = np.diff(u)
        return self.symmetry_factor * float(np.dot(d, d)) / self.h

    def norm_v(self, u) -> float:
        return np.sqrt(self.grad_sq(u) + self.inner(u, u))

    def field(self, values) -> "Field":
        return Field(self, values)

    def constant(self, c: float) -> "Field":
        return Field(self, np.full(self.n, float(c)))


def make_domain(eta: float, L: float, n: int) -> Domain1D:
    return Domain1D(float(eta), float(L), n)


@dataclass(frozen=True, eq=False)
class Field:
    """Grid function tied to a :class:`Domain1D`."""

    domain: Domain1D
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.domain.n,):
            raise DomainMismatchError(
                f"field of shape {v.shape} does not fit a domain with {self.domain.n} nodes")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def _other(self, other):
        if isinstance(other, Field):
            if not self.domain.same_as(other.domain):
                raise DomainMismatchError("arithmetic between fields on different domains")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.domain, self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.domain, self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.domain, self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.domain, self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return Field(self.domain, self.values / self._other(other))

    def __neg__(self):
        return Field(self.domain, -self.values)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    def __len__(self):
        return self.domain.n


def as_values(u, domain: Domain1D) -> np.ndarray:
    """Return the nodal values of ``u`` after checking it lives on ``domain``."""
    if isinstance(u, Field):
        if not domain.same_as(u.domain):
            raise DomainMismatchError("field belongs to a different domain")
        return u.values
    u = np.asarray(u, dtype=float)
    if u.shape != (domain.n,):
        raise DomainMismatchError(
            f"array of shape {u.shape} does not fit a domain with {domain.n} nodes")
    return u


def _check_pair(u: Field, v: Field) -> Domain1D:
    if not isinstance(u, Field) or not isinstance(v, Field):
        raise TypeError("expected Field arguments")
    if not u.domain.same_as(v.domain):
        raise DomainMismatchError("inner product of fields on different domains")
    return u.domain


def inner_H(u: Field, v: Field) -> float:
    return _check_pair(u, v).inner(u.values, v.values)


def norm_H(u: Field) -> float:
    return u.domain.norm_h(u.values)


def norm_V(u: Field) -> float:
    return u.domain.norm_v(u.values)
