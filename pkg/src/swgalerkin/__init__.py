"""1-D Galerkin finite element toolkit for the shallow water systems."""

from .banded import BandedMatrix, NotSPDError, banded_solve
from .experiments import (
    ComponentErrors,
    ConvergenceConfig,
    error_norms,
    observed_order,
    run_convergence,
    run_energy_check,
    run_eps_comparison,
    run_stability_probe,
)
from .integrators import (
    CLASSICAL_RK4,
    EULER,
    IMPROVED_EULER,
    SCHEMES,
    SHU_OSHER3,
    Blowup,
    BlowupError,
    Scheme,
    StepRule,
    integrate,
    step,
)
from .mesh import Mesh, MeshFamily, build_mesh
from .projection import FemFunction, l2_project
from .quadrature import QuadRule, quad_rule
from .spaces import Boundary, FemSpace, SpaceSpec, assemble_gram, build_space
from .superacc import (
    cell_moments,
    dual_functional_norms,
    fit_rate,
    midpoint_derivative_errors,
)
from .systems import (
    PRESETS,
    ManufacturedSolution,
    SystemFamily,
    SystemKind,
    SystemState,
    energy,
    initial_state,
    preset,
    rhs,
)

__version__ = "0.1.0"
