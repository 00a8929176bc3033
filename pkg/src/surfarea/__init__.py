"""Surface areas by Lagrange and Crouzeix-Raviart interpolation on triangulations."""
from .analysis import (
    ConvergenceRecord,
    babuska_aziz_a2,
    fit_rate,
    lantern_area_closed_form,
    lantern_limit,
    run_convergence,
)
from .area import (
    AreaMethod,
    AreaReport,
    area_cr,
    area_exact,
    area_lagrange,
    area_parametric_exact,
    area_parametric_pl,
    area_pl_graph,
    seminorm_error_w11,
)
from .errors import (
    DegenerateTriangle,
    InsufficientData,
    InvalidParameter,
    MeshMismatch,
    NonpositiveError,
    SurfAreaError,
    UnknownField,
)
from .fields import ScalarField, VectorField3, builtin, parse_field_spec
from .geometry import TriangleGeom, normalize_to_ktilde, triangle_geom
from .interp import Kind, PiecewiseLinearSurface, cr_on_triangle, interpolate_mesh, lagrange_on_triangle
from .mesh import LanternMesh, Triangulation, generate_aniso, generate_lantern, generate_uniform

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
