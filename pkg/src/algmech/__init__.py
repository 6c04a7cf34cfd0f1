"""Numerical mechanics on finite-rank almost Lie algebroids."""

from .algebroid import (
    AlgebroidSpec,
    DualSection,
    Section,
    SpecError,
    anchor_apply,
    bracket,
    bracket_difference,
    d_rho_0,
    d_rho_1,
    jacobiator,
    lie_derivative_0,
    load_spec,
    reconstruct_from_differential,
    validate,
)
from .expr import (
    Expr,
    directional,
    evaluate,
    parse,
    second_directional,
    to_string,
)
from .hj import HJReport, drho_closed_defect, hj_defect, hj_equivalence_check
from .mechanics import (
    ConstrainedSystem,
    VelPoint,
    constrain,
    el_field,
    integrate_el,
    lagrangian_energy,
    legendre,
    riemannian_spray,
    spray_defect,
)
from .poisson import (
    PhasePoint,
    hamiltonian_field,
    integrate_hamilton,
    phi,
    poisson_bracket,
)
from .properties import property_suite
from .snake import (
    GVector,
    HeadCurve,
    SnakeConfig,
    charm,
    control_operator,
    curve_energy,
    e_field,
    end_map,
    extremal_regular,
    extremal_singular,
    g_bracket,
    horizontal_velocity,
    singularity_margin,
    snake_bracket_defect,
)
from .trajectory import BlowUpError, Trajectory, emit_csv

__version__ = "0.1.0"
