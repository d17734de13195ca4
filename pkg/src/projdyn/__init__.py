"""Projective dynamics of degree -3 homogeneous force fields.

Free motion under a degree -3 field, centrally projected onto a screen and
reparametrized by the Appell time, is the constrained motion on that screen.
The package integrates both sides, builds the classical instances (Neumann,
Braden, Jacobi) and checks the structural identities numerically.
"""

from .dynamics import (
    CENTRAL,
    ConstrainedSystem,
    PhaseState,
    Trajectory,
    central_reaction,
    constraint_drift,
    integrate_constrained,
    integrate_free,
    linear_reaction,
    multiplier,
)
from .errors import DomainError, IntegrationError, TransversalityError
from .forces import (
    ForceField,
    Potential,
    braden_field,
    euler_residual,
    gradient_field,
    homogeneity_residual,
    inverse_quadratic_potential,
    kepler_field,
    linear_field,
    neumann_potential,
    projective_extension,
    quadratic_power_field,
    zero_field,
)
from .geometry import SymForm
from .ode import IntegratorOptions
from .problems import (
    EllipsoidData,
    JacobiParams,
    braden_system,
    integrate_jacobi,
    jacobi_system,
    joachimsthal,
    knorrer_step1,
    knorrer_step2,
    neumann_system,
    orbit_exchange_report,
    projection_instance,
    random_ellipsoid,
)
from .projective import (
    appell_time,
    compare_trajectories,
    equivalence_test,
    matched_initial_state,
    project_trajectory,
)
from .screens import LinearScreen, QuadricScreen, Screen, project_point, tangent_project
from .sl2 import lie_bracket, make_XYZ, make_Y_beta, verify_beta, verify_sl2

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
