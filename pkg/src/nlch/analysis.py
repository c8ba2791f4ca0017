"""Energies, energy balance, assumption checks and convergence studies.

Every study here is a sweep of independent runs of :func:`nlch.dynamics.solve`
that share one :class:`~nlch.model.Model`.  The runs are dispatched to a
thread pool; the report is assembled only after all of them have finished.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .dynamics import SimConfig, Trajectory, _base_initial, mollify_initial, rhs_P_eps_lambda, solve
from .errors import ConfigurationError
from .grid import Domain1D
from .kernel import KernelSpec, compute_a, kernel_mass
from .model import Model
from .potential import QUARTIC, PotentialSpec, moreau_yosida_betahat

__all__ = [
    "energy",
    "energy_two_forms",
    "EnergyReport",
    "energy_balance",
    "AssumptionReport",
    "validate_assumptions",
    "ConvergenceReport",
    "fit_power_law",
    "trajectory_distance",
    "converge_eps",
    "converge_lambda",
    "rhs_consistency",
    "cauchy_table",
]


def _trapezoid(y, x) -> float:
    if hasattr(np, "trapezoid"):
        return float(np.trapezoid(y, x))
    return float(np.trapz(y, x))


# -- energy ---------------------------------------------------------------------

def energy(model: Model, phi, level: str | float = "limit") -> float:
    """Free energy of ``phi``.

    ``level`` is ``"limit"`` (or ``0``) for the unregularized energy, or a
    positive ``eps`` for the viscous Lyapunov functional
    ``eps/2 ||phi||_V^2 + nonlocal + int G_eps(phi)``.
    """
    eps = 0.0 if level == "limit" else float(level)
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    return model.energy(np.asarray(phi, dtype=float), eps)


def energy_two_forms(model: Model, phi) -> tuple[float, float]:
    """Nonlocal energy evaluated with ``a`` and as the double integral of squared jumps."""
    phi = np.asarray(phi, dtype=float)
    return model.nonlocal_energy(phi), model.nonlocal_energy_double(phi)


@dataclass
class EnergyReport:
    """Energy history of one run.

    ``residual = energy + dissipation - energy[0]`` where ``dissipation`` is
    the accumulated ``int ||mu||_V^2`` plus, on the viscous levels, the extra
    ``eps``-weighted term (``extra_dissipation``).
    """

    times: np.ndarray
    energy: np.ndarray
    dissipation: np.ndarray
    extra_dissipation: np.ndarray
    residual: np.ndarray
    level: str

    @property
    def max_residual(self) -> float:
        return float(np.max(np.abs(self.residual)))

    def max_relative_increase(self) -> float:
        """Largest step-to-step increase of the energy relative to ``|E(0)|``."""
        scale = abs(self.energy[0]) or 1.0
        return float(np.max(np.diff(self.energy))) / scale

    def non_increasing(self, rtol: float = 1e-10) -> bool:
        return self.max_relative_increase() <= rtol


def energy_balance(trajectory: Trajectory) -> EnergyReport:
    dg = trajectory.diagnostics
    t = trajectory.step_times
    E = np.array(dg["energy"])
    total = np.array(dg["dissipation"])
    mu_part = np.zeros_like(total)
    if t.size > 1:
        steps = 0.5 * np.diff(t) * (dg["mu_V_sq"][1:] + dg["mu_V_sq"][:-1])
        mu_part[1:] = np.cumsum(steps)
    extra = total - mu_part if trajectory.level != "P" else np.zeros_like(total)
    residual = E + total - E[0]
    residual[0] = 0.0
    return EnergyReport(times=t, energy=E, dissipation=total, extra_dissipation=extra,
                        residual=residual, level=trajectory.level)


# -- assumptions ----------------------------------------------------------------

@dataclass
class AssumptionReport:
    J_L1: float
    min_a_closed: float
    min_a_quadrature: float
    c0: float
    c1: float
    pi_lipschitz: float
    checks: dict[str, bool]
    c2: float | None = None
    c3: float | None = None
    c2_parts: dict[str, float] = field(default_factory=dict)
    eps_grid: tuple[float, ...] = ()

    @property
    def all_pass(self) -> bool:
        return all(self.checks.values())

    def failing(self) -> list[str]:
        return [k for k, v in self.checks.items() if not v]

    def as_dict(self) -> dict:
        return {
            "J_L1": self.J_L1, "min_a_closed": self.min_a_closed,
            "min_a_quadrature": self.min_a_quadrature, "c0": self.c0, "c1": self.c1,
            "pi_lipschitz": self.pi_lipschitz, "c2": self.c2, "c3": self.c3,
            "c2_parts": dict(self.c2_parts), "eps_grid": list(self.eps_grid),
            "checks": dict(self.checks), "all_pass": self.all_pass,
        }


def validate_assumptions(kernel: KernelSpec, potential: PotentialSpec, domain: Domain1D,
                         c0: float = 16.0, c1: float = 6.0, phi0=None,
                         eps_grid=(1e-1, 1e-2, 1e-3, 1e-4), samples: int = 2001,
                         seed: int = 0) -> AssumptionReport:
    """Check the structural hypotheses on kernel, potential and initial data.

    Pointwise properties are sampled on ``[-4, 4]`` and checked up to a small
    relative tolerance.  A failed inequality is reported as ``False``; nothing
    here raises for a violated hypothesis.  The initial-data constants are
    computed only when ``phi0`` is given.
    """
    rng = np.random.default_rng(seed)
    r = np.linspace(-4.0, 4.0, samples)
    x = np.concatenate([np.linspace(0.0, 6.0, 257), rng.uniform(-6.0, 6.0, 64)])
    Jx = np.asarray(kernel(x))
    mass = kernel_mass(kernel)
    a_closed = compute_a(kernel, domain, "closed").values
    a_quad = compute_a(kernel, domain, "quadrature").values
    ell = potential.pi_lipschitz
    tol = 1e-12

    beta = potential.beta(r)
    bhat = potential.betahat(r)
    pi = potential.pi(r)
    G = potential.G(r)
    dr = np.diff(r)
    chord = np.diff(bhat) / dr
    checks = {
        "A1_kernel_even": bool(np.allclose(Jx, kernel(-x), rtol=1e-14, atol=0.0)),
        "A1_kernel_nonnegative": bool(np.all(Jx >= 0)),
        "A1_kernel_integrable": bool(np.isfinite(mass)),
        "A1_a_nonnegative": bool(np.all(a_closed >= 0) and np.all(a_quad >= 0)),
        "A2_split": bool(np.allclose(G, bhat + potential.pihat(r), rtol=1e-13, atol=1e-13)),
        "A3_beta_monotone": bool(np.all(np.diff(beta) >= -tol * np.max(np.abs(beta)))),
        "A3_beta_zero_at_zero": float(potential.beta(0.0)) == 0.0,
        "A3_betahat_nonnegative": bool(np.all(bhat >= 0)) and float(potential.betahat(0.0)) == 0.0,
        "A3_betahat_convex": bool(np.all(np.diff(chord) >= -tol * np.max(np.abs(chord)))),
        "A4_pi_lipschitz": bool(np.max(np.abs(np.diff(pi) / dr)) <= ell * (1 + 1e-12)),
        "A4_pi_zero_at_zero": float(potential.pi(0.0)) == 0.0 and float(potential.pihat(0.0)) == 0.0,
        "A5_lower_bound": bool(np.all(G + 0.5 * ell * r * r >= -tol)),
    }
    env_ok = True
    for eps in (1e-3, 1e-1, 1.0):
        env = moreau_yosida_betahat(eps, r, potential)
        env_ok &= bool(np.all(env >= -tol) and np.all(env <= bhat * (1 + 1e-12) + tol))
    checks["A6_envelope_bounds"] = env_ok
    checks["A7_c1_range"] = bool(0 < c1 < c0 / 2 and c0 > 0)
    checks["A7_mass_bound"] = bool(mass < c0 + c1)
    checks["A7_a_lower_bound"] = bool(np.min(a_closed) >= c0 + ell)

    report = AssumptionReport(J_L1=mass, min_a_closed=float(np.min(a_closed)),
                              min_a_quadrature=float(np.min(a_quad)), c0=c0, c1=c1,
                              pi_lipschitz=ell, checks=checks)
    if phi0 is not None:
        from .operators import EllipticOps

        ops = EllipticOps(domain)
        phi0 = np.asarray(phi0, dtype=float)
        norm0 = domain.inner(phi0, phi0)
        parts = {"phi_H_sq": 0.0, "G_L1": 0.0, "eps_grad_sq": 0.0}
        c3 = 0.0
        mollified_ok = True
        for eps in eps_grid:
            m = mollify_initial(ops, eps, phi0)
            parts["phi_H_sq"] = max(parts["phi_H_sq"], domain.inner(m, m))
            parts["G_L1"] = max(parts["G_L1"], domain.symmetry_factor * float(
                np.dot(domain.weights, np.abs(potential.G(m)))))
            parts["eps_grad_sq"] = max(parts["eps_grad_sq"], eps * domain.grad_sq(m))
            gap = ops.vstar_sq(m - phi0)
            c3 = max(c3, gap / math.sqrt(eps))
            mollified_ok &= gap <= eps * norm0 * (1 + 1e-10) + 1e-300
        report.c2 = max(parts.values())
        report.c2_parts = parts
        report.c3 = c3
        report.eps_grid = tuple(eps_grid)
        checks["A8_data_finite"] = bool(np.isfinite(report.c2) and np.all(np.isfinite(phi0)))
        checks["A8_mollifier_gap"] = bool(mollified_ok)
    return report


# -- convergence studies ----------------------------------------------------------

@dataclass
class ConvergenceReport:
    """Errors of a parameter sweep against a reference and their power-law fit."""

    parameter: str
    params: np.ndarray
    err_vstar_sq: np.ndarray
    err_l2h_sq: np.ndarray
    order: float | None = None
    constant: float | None = None
    flags: list[str] = field(default_factory=list)
    reference: str = ""
    cauchy: np.ndarray | None = None
    initial_gap: np.ndarray | None = None
    cauchy_constant: float | None = None
    extra: dict = field(default_factory=dict)

    @property
    def errors(self) -> np.ndarray:
        return self.err_vstar_sq + self.err_l2h_sq

    def strictly_decreasing(self) -> bool:
        e = self.errors
        return bool(e.size >= 2 and np.all(np.diff(e) < 0))

    def bound_holds(self, exponent: float = 0.5) -> bool:
        """``e <= C p**exponent`` with the fitted ``C`` at every grid point."""
        if self.constant is None:
            return False
        return bool(np.all(self.errors <= self.constant * self.params ** exponent * (1 + 1e-12)))

    def rows(self) -> list[tuple[float, float, float, float]]:
        return [(float(p), float(a), float(b), float(a + b))
                for p, a, b in zip(self.params, self.err_vstar_sq, self.err_l2h_sq)]


def fit_power_law(params, errors) -> tuple[float, float]:
    """Least-squares fit of ``log e = p log x + log C``; returns ``(p, C)``."""
    x = np.log(np.asarray(params, dtype=float))
    y = np.log(np.asarray(errors, dtype=float))
    p, logc = np.polyfit(x, y, 1)
    return float(p), float(math.exp(logc))


def trajectory_distance(model: Model, a: Trajectory, b: Trajectory) -> tuple[float, float]:
    """``(max_t ||a - b||_V*^2, int ||a - b||_H^2 dt)`` over the shared snapshot times."""
    if a.times.shape != b.times.shape or not np.allclose(a.times, b.times, rtol=0, atol=1e-12):
        raise ConfigurationError("trajectories must share snapshot times")
    d = model.domain
    diff = a.phi - b.phi
    vstar = np.array([model.ops.vstar_sq(row) for row in diff])
    l2 = np.array([d.inner(row, row) for row in diff])
    return float(np.max(vstar)), _trapezoid(l2, a.times)


def _run_all(configs, model, threads):
    if model is not None:
        model.ops.prepare(lambdas=[c.lam for c in configs if c.lam is not None],
                          epss=[c.eps for c in configs if c.eps > 0])
    if threads <= 1 or len(configs) <= 1:
        return [solve(c, model) for c in configs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda c: solve(c, model), configs))


def _grid(values, name) -> np.ndarray:
    g = np.asarray([float(v) for v in values])
    if g.size == 0 or not np.all(np.isfinite(g)) or np.any(g <= 0):
        raise ConfigurationError(f"{name} grid must be nonempty and positive")
    return g


def _check_grid(grid, flags):
    if grid.size >= 2 and not np.all(np.diff(grid) < 0):
        flags.append("grid not strictly decreasing")


def _finish_fit(report: ConvergenceReport, min_points: int = 2) -> ConvergenceReport:
    e = report.errors
    keep = e > 0
    if np.sum(keep) < min_points or np.unique(report.params[keep]).size < min_points:
        report.flags.append("degenerate sweep: too few distinct points for a fit")
        return report
    params, errs = report.params[keep], e[keep]
    # Non-monotone beyond 10% noise: flag, and drop the largest parameter for the fit.
    order = np.argsort(-params)
    ps, es = params[order], errs[order]
    if np.any(es[1:] > 1.1 * es[:-1]):
        report.flags.append("non-monotone errors")
        if ps.size > min_points:
            ps, es = ps[1:], es[1:]
            report.flags.append(f"fit excludes largest parameter {params[order][0]:g}")
    report.order, report.constant = fit_power_law(ps, es)
    return report


def converge_eps(base: SimConfig, eps_list, reference: str = "direct_P",
                 model: Model | None = None, threads: int = 1) -> ConvergenceReport:
    """Squared ``C([0,T];V*)`` plus ``L2(0,T;H)`` error of the viscous runs.

    Each run starts from the datum mollified at its own ``eps``.  With
    ``reference="direct_P"`` the reference is the limit problem started from
    the unmollified datum; with ``"smallest_eps"`` it is the last run of the
    grid, which is then not reported.
    """
    grid = _grid(eps_list, "eps")
    if reference not in ("direct_P", "smallest_eps"):
        raise ConfigurationError(f"unknown reference {reference!r}")
    flags: list[str] = []
    _check_grid(grid, flags)
    model = model if model is not None else base.build_model()
    cfgs = [base.replace(eps=float(e), lam=None) for e in grid]
    if reference == "direct_P":
        cfgs.append(base.replace(eps=0.0, lam=None, scheme="semi_implicit"))
    runs = _run_all(cfgs, model, threads)
    ref = runs[-1]
    runs = runs[:-1]
    params = grid if reference == "direct_P" else grid[:-1]
    dist = [trajectory_distance(model, r, ref) for r in runs]
    report = ConvergenceReport(
        parameter="eps", params=params,
        err_vstar_sq=np.array([d[0] for d in dist]),
        err_l2h_sq=np.array([d[1] for d in dist]),
        flags=flags, reference=reference)
    report.extra["initial_gap_vstar_sq"] = [
        model.ops.vstar_sq(r.phi[0] - ref.phi[0]) for r in runs]
    return _finish_fit(report)


def converge_lambda(base: SimConfig, lambda_list, model: Model | None = None,
                    threads: int = 1) -> ConvergenceReport:
    """Errors of the doubly regularized runs against the viscous run at the same ``eps``."""
    grid = _grid(lambda_list, "lambda")
    if not base.eps > 0:
        raise ConfigurationError("the lambda sweep needs eps > 0")
    flags: list[str] = []
    _check_grid(grid, flags)
    model = model if model is not None else base.build_model()
    cfgs = [base.replace(lam=float(l)) for l in grid] + [base.replace(lam=None)]
    runs = _run_all(cfgs, model, threads)
    ref, runs = runs[-1], runs[:-1]
    dist = [trajectory_distance(model, r, ref) for r in runs]
    report = ConvergenceReport(
        parameter="lambda", params=grid,
        err_vstar_sq=np.array([d[0] for d in dist]),
        err_l2h_sq=np.array([d[1] for d in dist]),
        flags=flags, reference="P_eps")
    report.extra["lambda_sq_int_dmu_H_sq"] = [
        r.config.lam ** 2 * r.dt * float(np.sum(r.diagnostics["dmu_H_sq"][1:])) for r in runs]
    report.extra["strictly_decreasing"] = report.strictly_decreasing()
    return _finish_fit(report)


def rhs_consistency(model: Model, eps: float, lam: float, phi) -> float:
    """Relative mismatch of ``d phi/dt`` between the two regularized levels at one state.

    The doubly regularized right-hand side is evaluated at
    ``mu = mu_eps(phi)`` and compared with the viscous ``-A mu_eps(phi)``.
    """
    phi = np.asarray(phi, dtype=float)
    mu = model.mu_eps(phi, eps)
    target = -model.ops.A(mu)
    dphi, _ = rhs_P_eps_lambda(model, eps, lam, phi, mu)
    d = model.domain
    return d.norm_h(dphi - target) / d.norm_h(target)


def cauchy_table(base: SimConfig, eps_list, model: Model | None = None,
                 threads: int = 1) -> ConvergenceReport:
    """Pairwise distances of viscous runs and the smallest constant covering them all.

    For each pair the constant needed is
    ``d(eps, gam) / (eps^1/2 + gam^1/2 + ||phi_0eps - phi_0gam||_V*^2)``.
    """
    grid = _grid(eps_list, "eps")
    flags: list[str] = []
    _check_grid(grid, flags)
    if grid.size < 3:
        flags.append("fewer than 3 eps values")
    model = model if model is not None else base.build_model()
    runs = _run_all([base.replace(eps=float(e), lam=None) for e in grid], model, threads)
    k = grid.size
    table = np.zeros((k, k))
    gap = np.zeros((k, k))
    vs = np.zeros((k, k))
    l2 = np.zeros((k, k))
    needed = 0.0
    for i in range(k):
        for j in range(i + 1, k):
            a, b = trajectory_distance(model, runs[i], runs[j])
            vs[i, j] = vs[j, i] = a
            l2[i, j] = l2[j, i] = b
            table[i, j] = table[j, i] = a + b
            g = model.ops.vstar_sq(runs[i].phi[0] - runs[j].phi[0])
            gap[i, j] = gap[j, i] = g
            needed = max(needed, (a + b) / (math.sqrt(grid[i]) + math.sqrt(grid[j]) + g))
    # Rows report each eps against the smallest one.
    report = ConvergenceReport(
        parameter="eps", params=grid, err_vstar_sq=vs[:, -1].copy(),
        err_l2h_sq=l2[:, -1].copy(), flags=flags, reference="pairwise",
        cauchy=table, initial_gap=gap, cauchy_constant=needed)
    return report


def base_initial_field(config: SimConfig, model: Model) -> np.ndarray:
    """The configured datum before mollification."""
    return _base_initial(config, model.domain.nodes, config.base_initial_condition)
