"""Time integration of the three levels of the regularization cascade.

``P``
    ``phi_t = -A mu``, ``mu = a phi - J*phi + G'(phi)``.
``P_eps``
    viscous level: ``mu = eps A phi + a phi - J*phi + G_eps'(phi) + eps phi_t``.
``P_eps_lambda``
    the Lipschitz ODE system in ``(phi, mu)`` obtained by replacing the
    Laplacian with its Yosida approximation and adding ``lam mu_t``.

Two families of schemes are provided.  ``rk4`` is classical Runge-Kutta on
the method-of-lines ODE.  ``semi_implicit`` is a stabilized linearly implicit
Euler scheme whose formulas at ``lam -> 0`` and then ``eps -> 0`` reduce
exactly to the scheme of the next level, so cascade comparisons at a common
step size measure regularization error and not time-discretization error.
"""

from __future__ import annotations

import dataclasses
import re
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.linalg import solve_banded

from .errors import ConfigurationError, NumericalAbort
from .grid import Field, as_values
from .kernel import DEFAULT_C_J
from .model import Model
from .operators import EllipticOps
from .potential import resolvent_beta

__all__ = [
    "SimConfig",
    "Trajectory",
    "AprioriReport",
    "initial_condition",
    "mollify_initial",
    "rhs_P_eps_lambda",
    "lipschitz_constant",
    "step_P_eps_lambda",
    "rk4_stability_bound_P_eps",
    "mu_of_phi_P_eps",
    "solve",
    "check_apriori",
]

LEVELS = ("P", "P_eps", "P_eps_lambda")
SCHEMES = ("rk4", "semi_implicit")
BASE_ICS = ("tanh_front", "gaussian_bump", "random_sym")
_MOLLIFIED = re.compile(r"mollified\((\w+)\)")

# Largest |z| on the negative real axis inside the RK4 stability region.
RK4_REAL_STABILITY = 2.785


@dataclass(frozen=True)
class SimConfig:
    """Parameters of one run.  ``lam is None`` selects the ``P`` or ``P_eps`` level."""

    eps: float = 1e-2
    lam: float | None = None
    T: float = 0.5
    dt: float = 1e-4
    scheme: str = "semi_implicit"
    eta: float = 0.04
    L: float = 12.0
    n: int = 512
    c_J: float = DEFAULT_C_J
    initial_condition: str = "mollified(gaussian_bump)"
    ic_center: float | None = None
    ic_width: float = 1.0
    ic_amplitude: float = 1.0
    seed: int = 0
    snapshot_stride: int = 10
    fast_convolution: bool = False
    c0: float = 16.0
    c1: float = 6.0

    def __post_init__(self):
        for name in ("eps", "T", "dt", "eta", "L", "c_J", "ic_width", "ic_amplitude"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigurationError(f"{name} must be finite")
        if not (self.T > 0 and self.dt > 0):
            raise ConfigurationError(f"need T > 0 and dt > 0, got T={self.T}, dt={self.dt}")
        if self.dt > self.T * (1 + 1e-12):
            raise ConfigurationError(f"dt={self.dt} exceeds T={self.T}")
        nsteps = round(self.T / self.dt)
        if abs(nsteps * self.dt - self.T) > 1e-9 * self.T:
            raise ConfigurationError(f"T={self.T} is not a multiple of dt={self.dt}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown scheme {self.scheme!r}; expected one of {SCHEMES}")
        if self.eps < 0:
            raise ConfigurationError("eps must be nonnegative")
        if self.eps == 0 and self.scheme != "semi_implicit":
            raise ConfigurationError("eps = 0 (the limit problem) requires scheme = semi_implicit")
        if self.lam is not None:
            if not (self.lam > 0 and np.isfinite(self.lam)):
                raise ConfigurationError("lambda must be positive and finite when given")
            if self.eps == 0:
                raise ConfigurationError("lambda requires eps > 0")
        if not self.ic_width > 0:
            raise ConfigurationError("ic_width must be positive")
        if not self.c_J > 0:
            raise ConfigurationError("kernel amplitude c_J must be positive")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise ConfigurationError("snapshot_stride must be a positive integer")
        ic = _MOLLIFIED.fullmatch(self.initial_condition)
        base = ic.group(1) if ic else self.initial_condition
        if base not in BASE_ICS:
            raise ConfigurationError(
                f"unknown initial condition {self.initial_condition!r}; "
                f"expected one of {BASE_ICS} or mollified(<base>)")

    @property
    def level(self) -> str:
        if self.eps == 0:
            return "P"
        return "P_eps" if self.lam is None else "P_eps_lambda"

    @property
    def nsteps(self) -> int:
        return int(round(self.T / self.dt))

    @property
    def base_initial_condition(self) -> str:
        m = _MOLLIFIED.fullmatch(self.initial_condition)
        return m.group(1) if m else self.initial_condition

    @property
    def mollified(self) -> bool:
        return _MOLLIFIED.fullmatch(self.initial_condition) is not None

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def build_model(self) -> Model:
        return Model.build(self.eta, self.L, self.n, self.c_J,
                           fast_convolution=self.fast_convolution)

    def model_key(self) -> tuple:
        return (self.eta, self.L, self.n, self.c_J, self.fast_convolution)


@dataclass
class Trajectory:
    """Snapshots plus per-step diagnostics of one run.

    ``diagnostics`` holds arrays of length ``nsteps + 1``.  Entries built from
    increments (``dphi_*``, ``dmu_*``) refer to the interval ending at that
    step and are zero at index 0.
    """

    config: SimConfig
    level: str
    times: np.ndarray
    phi: np.ndarray
    mu: np.ndarray
    step_times: np.ndarray
    diagnostics: dict[str, np.ndarray] = field(default_factory=dict)
    dissipation_source: str = "trapezoid"

    @property
    def dt(self) -> float:
        return self.config.dt

    @property
    def energy(self) -> np.ndarray:
        return self.diagnostics["energy"]

    @property
    def dissipation(self) -> np.ndarray:
        return self.diagnostics["dissipation"]

    @property
    def phi_final(self) -> np.ndarray:
        return self.phi[-1]


# -- initial data ---------------------------------------------------------------

def _base_initial(config: SimConfig, x: np.ndarray, name: str) -> np.ndarray:
    center = config.ic_center if config.ic_center is not None else config.eta + 0.5 * config.L
    width = config.ic_width
    amp = config.ic_amplitude
    if name == "tanh_front":
        return amp * np.tanh((x - center) / width)
    if name == "gaussian_bump":
        return amp * np.exp(-((x - center) / width) ** 2)
    if name == "random_sym":
        # Nodal values on the segment; the mirrored ray makes the datum even.
        rng = np.random.default_rng(config.seed)
        return amp * rng.uniform(-1.0, 1.0, x.size)
    raise ConfigurationError(f"unknown initial condition {name!r}")


def mollify_initial(ops: EllipticOps, eps: float, phi0):
    """``phi_0eps = (I + eps A)^{-1} phi_0``."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    out = ops.resolvent_eps(eps, as_values(phi0, ops.domain))
    return Field(ops.domain, out) if isinstance(phi0, Field) else out


def initial_condition(config: SimConfig, model: Model) -> np.ndarray:
    """Initial field for the configured level (mollified at ``config.eps`` if requested)."""
    phi0 = _base_initial(config, model.domain.nodes, config.base_initial_condition)
    if config.mollified and config.eps > 0:
        phi0 = mollify_initial(model.ops, config.eps, phi0)
    return phi0


# -- doubly regularized level ---------------------------------------------------

def rhs_P_eps_lambda(model: Model, eps: float, lam: float, phi: np.ndarray,
                     mu: np.ndarray, beta: np.ndarray | None = None):
    """Right-hand side ``(dphi, dmu)`` of the Lipschitz ODE system.

    ``dphi = -(-lap)_lam phi - phi + (mu - a phi + J*phi - G_eps'(phi)) / eps``
    and ``dmu = -(dphi + ((-lap)_lam + 1) mu) / lam``.
    """
    ops = model.ops
    if beta is None:
        beta = model.regularized(eps).beta(phi)
    gprime = beta + model.potential.pi(phi)
    dphi = -ops.yosida(lam, phi) - phi \
        + (mu - model.a * phi + model.conv(phi) - gprime) / eps
    dmu = -(dphi + ops.yosida(lam, mu) + mu) / lam
    return dphi, dmu


def lipschitz_constant(model: Model, eps: float, lam: float):
    """Lipschitz constant of the ODE right-hand side on ``H x H``.

    Assembled from the bounds ``||(-lap)_lam|| <= 1/lam``, ``||a||_inf``,
    ``||J||_L1`` and ``1/eps + ||pi'||_inf`` for ``G_eps'``.  Returns
    ``(K, parts)`` with ``parts`` the 2x2 block bounds.
    """
    a_max = float(np.max(np.abs(model.a)))
    jmass = model.kop.mass
    lip_g = 1.0 / eps + model.potential.pi_lipschitz
    phi_phi = 1.0 / lam + 1.0 + (a_max + jmass + lip_g) / eps
    phi_mu = 1.0 / eps
    mu_phi = phi_phi / lam
    mu_mu = phi_mu / lam + (1.0 / lam + 1.0) / lam
    blocks = np.array([[phi_phi, phi_mu], [mu_phi, mu_mu]])
    return float(np.sqrt(np.sum(blocks ** 2))), {
        "yosida": 1.0 / lam, "a_inf": a_max, "J_L1": jmass, "G_eps_prime": lip_g,
        "blocks": blocks}


def _rk4(f, y, dt):
    k1 = f(y)
    k2 = f(tuple(a + 0.5 * dt * b for a, b in zip(y, k1)))
    k3 = f(tuple(a + 0.5 * dt * b for a, b in zip(y, k2)))
    k4 = f(tuple(a + dt * b for a, b in zip(y, k3)))
    return tuple(a + dt / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def step_P_eps_lambda(model: Model, eps: float, lam: float, phi: np.ndarray,
                      mu: np.ndarray, dt: float, guard: bool = True):
    """One classical RK4 step; refuses ``dt > 2/K``."""
    if guard:
        K, _ = lipschitz_constant(model, eps, lam)
        if dt > 2.0 / K:
            raise ConfigurationError(
                f"dt={dt:g} exceeds the RK4 guard 2/K={2.0 / K:.6g} (K={K:.6g})")

    def f(y):
        return rhs_P_eps_lambda(model, eps, lam, y[0], y[1])

    return _rk4(f, (phi, mu), dt)


# -- viscous level ---------------------------------------------------------------

def mu_of_phi_P_eps(model: Model, eps: float, phi):
    """Chemical potential of the viscous level as a function of ``phi`` alone."""
    if not eps > 0:
        raise ValueError(f"eps must be positive, got {eps}")
    vals = as_values(phi, model.domain)
    out = model.mu_eps(vals, eps)
    return Field(model.domain, out) if isinstance(phi, Field) else out


def rk4_stability_bound_P_eps(model: Model, eps: float, phi: np.ndarray) -> float:
    """Upper bound on the spectral radius of the linearized viscous flow at ``phi``.

    The Jacobian is ``P Q`` with ``P = A (I + eps A)^{-1}`` and
    ``Q = eps A + diag(a + G_eps''(phi)) - J*``; ``P^{1/2} Q P^{1/2}`` is
    symmetric, which gives ``eps max(p alpha) + max(p) ||Q - eps A||``.
    """
    alpha = 4.0 / model.domain.h ** 2 + 1.0
    p = alpha / (1.0 + eps * alpha)
    beta_prime = min(float(np.max(model.potential.beta_prime(phi))), 1.0 / eps)
    rest = float(np.max(model.a)) + beta_prime + model.potential.pi_lipschitz + model.kop.mass
    return eps * p * alpha + p * rest


# -- steppers ---------------------------------------------------------------------

def _band_from_sparse(m, lower: int, upper: int) -> np.ndarray:
    n = m.shape[0]
    ab = np.zeros((lower + upper + 1, n))
    for k in range(-lower, upper + 1):
        d = m.diagonal(k)
        if k >= 0:
            ab[upper - k, k:] = d
        else:
            ab[upper - k, :n + k] = d
    return ab


class _Stepper:
    """Common bookkeeping: current state, cached nonlinearity, instantaneous mu."""

    def __init__(self, model: Model, eps: float, dt: float):
        self.model = model
        self.eps = eps
        self.dt = dt
        self.pot = model.potential
        self.ell = model.potential.pi_lipschitz

    def beta_terms(self, phi):
        """``(beta_eps(phi), betahat_eps(phi))`` from one resolvent solve."""
        if self.eps == 0:
            return self.pot.beta(phi), self.pot.betahat(phi)
        s = resolvent_beta(self.eps, phi, self.pot)
        d = phi - s
        return d / self.eps, d * d / (2.0 * self.eps) + self.pot.betahat(s)

    def explicit_part(self, phi, beta, S):
        return -self.model.conv(phi) + beta - S * phi + self.pot.pi(phi) + self.ell * phi

    def implicit_coefficient(self, S):
        return self.model.a - self.ell + S


class _SemiImplicitViscous(_Stepper):
    """Stabilized linearly implicit Euler for ``P`` (eps = 0) and ``P_eps``.

    ``(I + eps A + dt eps A^2 + dt A C) phi' = (I + eps A) phi - dt A E(phi)``
    where ``C = diag(a - l + S)`` is treated implicitly, ``E`` collects the
    convolution and the nonlinear remainder, and ``S = max beta'(phi)``.
    """

    def __init__(self, model, eps, dt):
        super().__init__(model, eps, dt)
        n = model.domain.n
        A = model.ops.neg_laplacian_sparse() + sparse.identity(n, format="csr")
        base = sparse.identity(n, format="csr") + eps * A + dt * eps * (A @ A)
        self._base = _band_from_sparse(base, 2, 2)
        self._abA = _band_from_sparse(A, 2, 2)

    def step(self, phi, beta):
        ops = self.model.ops
        S = float(np.max(self.pot.beta_prime(phi)))
        c = self.implicit_coefficient(S)
        E = self.explicit_part(phi, beta, S)
        rhs = phi - self.dt * ops.A(E)
        if self.eps > 0:
            rhs = rhs + self.eps * ops.A(phi)
        ab = self._base + self.dt * self._abA * c[None, :]
        return solve_banded((2, 2), ab, rhs, check_finite=False)


class _RK4Viscous(_Stepper):
    """RK4 on ``phi_t = -A mu_eps(phi)``, integrating the dissipation alongside."""

    def rate(self, phi):
        ops = self.model.ops
        beta, _ = self.beta_terms(phi)
        mu = self.model.mu_eps(phi, self.eps, beta)
        amu = ops.A(mu)
        dq = self.model.domain.inner(amu, mu) + self.eps * self.model.domain.inner(amu, amu)
        return -amu, np.array(dq)

    def step(self, phi, q):
        return _rk4(lambda y: self.rate(y[0]), (phi, q), self.dt)


class _RK4Lambda(_Stepper):
    def __init__(self, model, eps, dt, lam):
        super().__init__(model, eps, dt)
        self.lam = lam

    def rate(self, phi, mu):
        beta, _ = self.beta_terms(phi)
        dphi, dmu = rhs_P_eps_lambda(self.model, self.eps, self.lam, phi, mu, beta)
        d = self.model.domain
        dq = d.inner(self.model.ops.yosida(self.lam, mu) + mu, mu) + self.eps * d.inner(dphi, dphi)
        return dphi, dmu, np.array(dq)

    def step(self, phi, mu, q):
        return _rk4(lambda y: self.rate(y[0], y[1]), (phi, mu, q), self.dt)


class _SemiImplicitLambda(_Stepper):
    """Linearly implicit Euler for the doubly regularized system.

    With ``M = I + lam N`` both equations are multiplied by ``M`` so that
    ``(-lap)_lam = N M^{-1}`` never has to be formed.  Unknowns are
    interleaved as ``(phi_0, mu_0, phi_1, mu_1, ...)`` which makes the block
    system banded with three sub- and super-diagonals.  At ``lam = 0`` it is
    exactly the viscous scheme.
    """

    def __init__(self, model, eps, dt, lam):
        super().__init__(model, eps, dt)
        self.lam = lam
        n = model.domain.n
        I = sparse.identity(n, format="csr")
        N = model.ops.neg_laplacian_sparse()
        M = (I + lam * N).tocsr()
        self._M = M
        Z = sparse.csr_matrix((n, n))
        const = sparse.bmat([[M, lam * M + dt * (N + M)],
                             [eps * (N + M) + (eps / dt) * M, -M]], format="csr")
        coupling = sparse.bmat([[Z, Z], [M, Z]], format="csr")
        self._perm = np.arange(2 * n).reshape(2, n).T.ravel()
        p = self._perm
        self._ab0 = _band_from_sparse(const[p][:, p], 3, 3)
        self._abM = _band_from_sparse(coupling[p][:, p], 3, 3)

    def step(self, phi, mu, beta):
        S = float(np.max(self.pot.beta_prime(phi)))
        c = self.implicit_coefficient(S)
        E = self.explicit_part(phi, beta, S)
        M = self._M
        n = phi.size
        cols = np.zeros(2 * n)
        cols[0::2] = c
        ab = self._ab0 + self._abM * cols[None, :]
        rhs = np.concatenate([M @ phi + self.lam * (M @ mu),
                              -(M @ E) + (self.eps / self.dt) * (M @ phi)])[self._perm]
        z = solve_banded((3, 3), ab, rhs, check_finite=False)
        return z[0::2], z[1::2]


# -- driver -------------------------------------------------------------------------

_DIAG_KEYS = ("norm_H_sq", "norm_V_sq", "Aphi_H_sq", "mu_V_sq", "beta_H_sq", "energy",
              "dissipation_rate", "dphi_H_sq", "dphi_Vstar_sq", "dmu_H_sq", "dissipation",
              "residual")


def solve(config: SimConfig, model: Model | None = None, phi0: np.ndarray | None = None,
          mu0: np.ndarray | None = None) -> Trajectory:
    """Integrate the configured level from ``t = 0`` to ``config.T``.

    ``phi0`` overrides the configured initial field (after any mollification
    the caller wants).  The doubly regularized level starts from
    ``mu(0) = phi(0)`` unless ``mu0`` is given.
    """
    if model is None:
        model = config.build_model()
    d = model.domain
    ops = model.ops
    eps, lam, dt = config.eps, config.lam, config.dt
    level = config.level
    nsteps = config.nsteps
    if lam is not None:
        ops.prepare(lambdas=[lam], epss=[eps])
    else:
        ops.prepare(epss=[eps])

    phi = np.array(initial_condition(config, model) if phi0 is None else phi0, dtype=float)
    mu = None
    if level == "P_eps_lambda":
        mu = phi.copy() if mu0 is None else np.array(mu0, dtype=float)

    if level == "P_eps_lambda":
        stepper = (_RK4Lambda(model, eps, dt, lam) if config.scheme == "rk4"
                   else _SemiImplicitLambda(model, eps, dt, lam))
        if config.scheme == "rk4":
            K, _ = lipschitz_constant(model, eps, lam)
            if dt > 2.0 / K:
                raise ConfigurationError(
                    f"dt={dt:g} exceeds the RK4 guard 2/K={2.0 / K:.6g} (K={K:.6g})")
    elif config.scheme == "rk4":
        stepper = _RK4Viscous(model, eps, dt)
        rho = rk4_stability_bound_P_eps(model, eps, phi)
        if dt * rho > RK4_REAL_STABILITY:
            raise ConfigurationError(
                f"dt={dt:g} exceeds the RK4 stability guard "
                f"{RK4_REAL_STABILITY / rho:.6g} (spectral bound {rho:.6g})")
    else:
        stepper = _SemiImplicitViscous(model, eps, dt)

    diag = {k: np.zeros(nsteps + 1) for k in _DIAG_KEYS}
    stride = int(config.snapshot_stride)
    snap_idx = sorted(set(range(0, nsteps + 1, stride)) | {nsteps})
    phis = np.empty((len(snap_idx), d.n))
    mus = np.empty((len(snap_idx), d.n))
    snap_pos = {k: i for i, k in enumerate(snap_idx)}
    q_scheme = np.array(0.0)

    def current_mu(phi, beta):
        if level == "P":
            return model.a * phi - model.conv(phi) + beta + model.potential.pi(phi)
        if level == "P_eps":
            return model.mu_eps(phi, eps, beta)
        return mu

    def record(k, phi, mu_k, beta, betahat, prev_phi, prev_mu):
        aphi = ops.A(phi)
        amu = ops.A(mu_k)
        diag["norm_H_sq"][k] = d.inner(phi, phi)
        diag["norm_V_sq"][k] = d.inner(aphi, phi)
        diag["Aphi_H_sq"][k] = d.inner(aphi, aphi)
        diag["mu_V_sq"][k] = d.inner(amu, mu_k)
        diag["beta_H_sq"][k] = d.inner(beta, beta)
        pot = d.symmetry_factor * float(np.dot(d.weights, betahat + model.potential.pihat(phi)))
        if level == "P":
            diag["energy"][k] = model.nonlocal_energy(phi) + pot
            diag["dissipation_rate"][k] = diag["mu_V_sq"][k]
        elif level == "P_eps":
            diag["energy"][k] = model.nonlocal_energy(phi) + pot + 0.5 * eps * diag["norm_V_sq"][k]
            diag["dissipation_rate"][k] = diag["mu_V_sq"][k] + eps * d.inner(amu, amu)
        else:
            ymu = ops.yosida(lam, mu_k)
            yphi = ops.yosida(lam, phi)
            diag["energy"][k] = (0.5 * lam * d.inner(mu_k, mu_k)
                                 + 0.5 * eps * (d.inner(yphi, phi) + diag["norm_H_sq"][k])
                                 + model.nonlocal_energy(phi) + pot)
            dphi, _ = rhs_P_eps_lambda(model, eps, lam, phi, mu_k, beta)
            diag["dissipation_rate"][k] = d.inner(ymu + mu_k, mu_k) + eps * d.inner(dphi, dphi)
        if k > 0:
            inc = (phi - prev_phi) / dt
            diag["dphi_H_sq"][k] = d.inner(inc, inc)
            diag["dphi_Vstar_sq"][k] = ops.vstar_sq(inc)
            if prev_mu is not None:
                dm = (mu_k - prev_mu) / dt
                diag["dmu_H_sq"][k] = d.inner(dm, dm)
            if stepper_integrates:
                diag["dissipation"][k] = float(q_scheme)
            else:
                diag["dissipation"][k] = diag["dissipation"][k - 1] + 0.5 * dt * (
                    diag["dissipation_rate"][k] + diag["dissipation_rate"][k - 1])
        diag["residual"][k] = diag["energy"][k] + diag["dissipation"][k] - diag["energy"][0]
        if k in snap_pos:
            phis[snap_pos[k]] = phi
            mus[snap_pos[k]] = mu_k

    def checked_beta_terms(k, phi):
        beta, betahat = stepper.beta_terms(phi)
        if not np.all(np.isfinite(beta)):
            raise NumericalAbort(f"non-finite potential derivative at step {k} (t={k * dt:g})", step=k)
        return beta, betahat

    stepper_integrates = config.scheme == "rk4"
    # Overflow is caught below as a non-finite field.
    with np.errstate(over="ignore", invalid="ignore"):
        beta, betahat = checked_beta_terms(0, phi)
        mu_k = current_mu(phi, beta)
        record(0, phi, mu_k, beta, betahat, None, None)

        for k in range(1, nsteps + 1):
            prev_phi, prev_mu = phi, mu_k
            if level == "P_eps_lambda":
                if config.scheme == "rk4":
                    phi, mu, q_scheme = stepper.step(phi, mu, q_scheme)
                else:
                    phi, mu = stepper.step(phi, mu, beta)
            elif config.scheme == "rk4":
                phi, q_scheme = stepper.step(phi, q_scheme)
            else:
                phi = stepper.step(phi, beta)
            if not np.all(np.isfinite(phi)) or (mu is not None and not np.all(np.isfinite(mu))):
                raise NumericalAbort(f"non-finite field at step {k} (t={k * dt:g})", step=k)
            beta, betahat = checked_beta_terms(k, phi)
            mu_k = current_mu(phi, beta)
            record(k, phi, mu_k, beta, betahat, prev_phi,
                   prev_mu if level == "P_eps_lambda" else None)

    return Trajectory(
        config=config, level=level,
        times=np.array(snap_idx, dtype=float) * dt,
        phi=phis, mu=mus,
        step_times=np.arange(nsteps + 1) * dt,
        diagnostics=diag,
        dissipation_source="scheme" if stepper_integrates else "trapezoid",
    )


# -- a-priori report ------------------------------------------------------------------

@dataclass(frozen=True)
class AprioriReport:
    sup_phi_H_sq: float
    eps_sup_phi_V_sq: float
    int_mu_V_sq: float
    eps_int_Aphi_H_sq: float
    eps_int_dphi_H_sq: float
    int_phi_V_sq: float
    int_dphi_Vstar_sq: float
    int_beta_H_sq: float
    lambda_sq_int_dmu_H_sq: float | None = None

    QUANTITIES = ("sup_phi_H_sq", "eps_sup_phi_V_sq", "int_mu_V_sq", "eps_int_Aphi_H_sq",
                  "eps_int_dphi_H_sq", "int_phi_V_sq", "int_dphi_Vstar_sq", "int_beta_H_sq")

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def values(self) -> np.ndarray:
        return np.array([getattr(self, k) for k in self.QUANTITIES])

    def all_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.values())))


def check_apriori(trajectory: Trajectory, eps: float | None = None) -> AprioriReport:
    """Sup norms and time integrals bounded uniformly in ``eps`` by the a-priori estimates."""
    cfg = trajectory.config
    eps = cfg.eps if eps is None else eps
    dg = trajectory.diagnostics
    t = trajectory.step_times
    dt = cfg.dt

    def trap(y):
        return float(np.trapezoid(y, t)) if hasattr(np, "trapezoid") else float(np.trapz(y, t))

    lam_term = None
    if cfg.lam is not None:
        lam_term = cfg.lam ** 2 * dt * float(np.sum(dg["dmu_H_sq"][1:]))
    return AprioriReport(
        sup_phi_H_sq=float(np.max(dg["norm_H_sq"])),
        eps_sup_phi_V_sq=eps * float(np.max(dg["norm_V_sq"])),
        int_mu_V_sq=trap(dg["mu_V_sq"]),
        eps_int_Aphi_H_sq=eps * trap(dg["Aphi_H_sq"]),
        eps_int_dphi_H_sq=eps * dt * float(np.sum(dg["dphi_H_sq"][1:])),
        int_phi_V_sq=trap(dg["norm_V_sq"]),
        int_dphi_Vstar_sq=dt * float(np.sum(dg["dphi_Vstar_sq"][1:])),
        int_beta_H_sq=trap(dg["beta_H_sq"]),
        lambda_sq_int_dmu_H_sq=lam_term,
    )
