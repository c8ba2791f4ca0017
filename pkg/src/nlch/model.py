"""Assembled discrete problem: grid, kernel, potential and elliptic operators.

A :class:`Model` is immutable once built and is shared read-only by every
run of a sweep.
"""

from __future__ import annotations

import numpy as np

from .grid import Domain1D, make_domain
from .kernel import KernelOperator, KernelSpec
from .operators import EllipticOps
from .potential import QUARTIC, PotentialSpec, RegularizedPotential


class Model:
    def __init__(self, domain: Domain1D, kernel: KernelSpec | None = None,
                 potential: PotentialSpec = QUARTIC, fast_convolution: bool = False):
        self.domain = domain
        self.kernel = kernel if kernel is not None else KernelSpec()
        self.potential = potential
        self.fast_convolution = fast_convolution
        self.ops = EllipticOps(domain)
        self.kop = KernelOperator(self.kernel, domain)
        self.a = self.kop.apply(np.ones(domain.n))
        self.a.flags.writeable = False

    @classmethod
    def build(cls, eta: float, L: float, n: int, c_J: float | None = None, **kw) -> "Model":
        kernel = KernelSpec(c_J) if c_J is not None else KernelSpec()
        return cls(make_domain(eta, L, n), kernel, **kw)

    def conv(self, u: np.ndarray) -> np.ndarray:
        return self.kop.apply_fast(u) if self.fast_convolution else self.kop.apply(u)

    def regularized(self, eps: float) -> RegularizedPotential:
        return RegularizedPotential(self.potential, eps)

    # -- chemical potentials --------------------------------------------------

    def mu_limit(self, phi: np.ndarray) -> np.ndarray:
        """``a phi - J*phi + G'(phi)``."""
        return self.a * phi - self.conv(phi) + self.potential.G_prime(phi)

    def mu_eps(self, phi: np.ndarray, eps: float, beta=None) -> np.ndarray:
        """Chemical potential of the viscous level with the time derivative eliminated.

        Substituting ``d phi/dt = -A mu`` into
        ``mu = eps A phi + a phi - J*phi + G_eps'(phi) + eps d phi/dt`` gives
        ``(I + eps A) mu = eps A phi + a phi - J*phi + G_eps'(phi)``.
        """
        if beta is None:
            beta = self.regularized(eps).beta(phi)
        rhs = eps * self.ops.A(phi) + self.a * phi - self.conv(phi) + beta \
            + self.potential.pi(phi)
        return self.ops.resolvent_eps(eps, rhs)

    # -- energies ---------------------------------------------------------------

    def nonlocal_energy(self, phi: np.ndarray) -> float:
        """``1/2 (a phi, phi)_H - 1/2 (phi, J*phi)_H``."""
        return 0.5 * self.domain.inner(self.a * phi - self.conv(phi), phi)

    def nonlocal_energy_double(self, phi: np.ndarray) -> float:
        """Same quantity as the double integral ``1/4 iint J(x-y) (phi(x)-phi(y))^2``.

        Both rays appear in both integration variables; for even fields this
        folds to ``(s/4) sum_ij w_i w_j Jhat_ij (phi_i - phi_j)^2`` with the
        symmetry factor ``s = 2``.
        """
        w = self.domain.weights
        jhat = self.kop.matrix / w[None, :]
        diff = phi[:, None] - phi[None, :]
        total = np.einsum("i,ij,j->", w, jhat * diff * diff, w)
        return 0.25 * self.domain.symmetry_factor * float(total)

    def potential_energy(self, phi: np.ndarray, eps: float = 0.0, beta_hat=None) -> float:
        reg = self.regularized(eps)
        if beta_hat is None:
            dens = reg.G(phi)
        else:
            dens = beta_hat + self.potential.pihat(phi)
        return self.domain.symmetry_factor * float(np.dot(self.domain.weights, dens))

    def energy(self, phi: np.ndarray, eps: float = 0.0) -> float:
        """Free energy; for ``eps > 0`` the Lyapunov functional of the viscous level.

        That is ``eps/2 ||phi||_V^2 + nonlocal + int G_eps(phi)``.
        """
        e = self.nonlocal_energy(phi) + self.potential_energy(phi, eps)
        if eps > 0:
            e += 0.5 * eps * self.domain.norm_v(phi) ** 2
        return e

    def lyapunov_lambda(self, phi: np.ndarray, mu: np.ndarray, eps: float, lam: float) -> float:
        """Lyapunov functional of the doubly regularized level.

        ``lam/2 ||mu||^2 + eps/2 ((-lap)_lam phi, phi) + eps/2 ||phi||^2``
        plus the nonlocal and regularized potential energies.
        """
        d = self.domain
        e = 0.5 * lam * d.inner(mu, mu)
        e += 0.5 * eps * (d.inner(self.ops.yosida(lam, phi), phi) + d.inner(phi, phi))
        return e + self.nonlocal_energy(phi) + self.potential_energy(phi, eps)
