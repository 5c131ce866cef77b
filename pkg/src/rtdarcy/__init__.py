"""Mixed Raviart-Thomas discretizations of the Darcy problem with weakly
imposed Neumann boundary conditions, on triangular and quadrilateral
meshes (optionally isoparametric), plus study drivers for convergence,
penalty sensitivity and conditioning."""

from ._kernels import backend as kernel_backend
from .assembly import (
    LinearSystem,
    assemble_nitsche,
    assemble_penalty,
    assemble_system,
    norm_pressure_1h,
    norm_velocity_0h,
)
from .cases import ManufacturedCase, case_names, get_case
from .errors import (
    AccuracyError,
    ConfigurationError,
    DegenerateCellError,
    InvalidParameterError,
    SolverError,
)
from .harness import (
    ConvergenceReport,
    StudyConfig,
    l2_errors,
    run_condition_study,
    run_convergence,
    run_penalty_sweep,
    run_property_battery,
)
from .interpolation import infsup_witness, interpolate_rt, project_pressure
from .linalg import condition_number_l2, solve
from .mesh import (
    Mesh,
    build_quarter_annulus_quad,
    build_unit_circle_tri,
    build_unit_square_quad,
    build_unit_square_tri,
    classify_facets,
    write_mesh,
)
from .spaces import FeFunction, build_dofmap

__version__ = "0.1.0"
