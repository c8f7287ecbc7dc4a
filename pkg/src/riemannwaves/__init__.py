"""riemannwaves: rank-k wave solutions of the isentropic compressible fluid equations.

The package constructs the closed-form solution families (simple acoustic
and vortex waves and their admissible superpositions), evaluates them by
solving the implicit Riemann-invariant equations, and verifies them
numerically: residual substitution into the fluid system, compatibility
trace conditions, involutivity of the wave geometry, and empirical
gradient-catastrophe detection.
"""

from . import catalog, conditions, elliptic, fluid, linalg, solver, verify
from .catalog import ConstraintError, FamilySpec, ValidityError, make_family
from .fluid import GasParams, StateVec, WaveVector
from .solver import CatastropheError, ConvergenceError, ImplicitPoint, ImplicitProblem
from .verify import GridSpec, ResidualReport

__version__ = "0.1.0"

__all__ = [
    "catalog", "conditions", "elliptic", "fluid", "linalg", "solver", "verify",
    "ConstraintError", "FamilySpec", "ValidityError", "make_family",
    "GasParams", "StateVec", "WaveVector",
    "CatastropheError", "ConvergenceError", "ImplicitPoint", "ImplicitProblem",
    "GridSpec", "ResidualReport",
    "__version__",
]
