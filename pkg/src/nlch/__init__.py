"""Nonlocal Cahn-Hilliard equation on a one-dimensional exterior domain.

The package follows a regularization cascade: a doubly regularized Lipschitz
system, its limit as the Yosida parameter vanishes (the viscous problem), and
the limit problem as the viscosity vanishes.  Each level can be integrated in
time, and the convergence between levels can be measured.
"""

__version__ = "0.1.0"

from .analysis import (cauchy_table, converge_eps, converge_lambda, energy, energy_balance,
                       validate_assumptions)
from .dynamics import SimConfig, Trajectory, check_apriori, solve
from .errors import BudgetError, ConfigurationError, DomainMismatchError, NLCHError, NumericalAbort
from .grid import Domain1D, Field, make_domain
from .kernel import DEFAULT_C_J, KernelSpec
from .model import Model
from .operators import EllipticOps
from .potential import QUARTIC, PotentialSpec, RegularizedPotential

__all__ = [
    "__version__",
    "SimConfig", "Trajectory", "solve", "check_apriori",
    "energy", "energy_balance", "validate_assumptions",
    "converge_eps", "converge_lambda", "cauchy_table",
    "Domain1D", "Field", "make_domain", "KernelSpec", "DEFAULT_C_J", "Model",
    "EllipticOps", "QUARTIC", "PotentialSpec", "RegularizedPotential",
    "NLCHError", "ConfigurationError", "DomainMismatchError", "NumericalAbort", "BudgetError",
]
