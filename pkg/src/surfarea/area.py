"""Area functionals for graphs and parametric surfaces.

Every functional has a ``*_terms`` companion returning per-triangle
contributions; totals are summed with :func:`math.fsum`, which is exactly
rounded and therefore independent of summation order.
"""
from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np

from .interp import Kind, PiecewiseLinearSurface, check_same_mesh, interpolate_mesh
from .mesh import Triangulation
from .quadrature import DEFAULT_TRIANGLE_DEGREE, TriangleRule, integrate_over_triangles, triangle_rule

__all__ = [
    "AreaMethod",
    "AreaReport",
    "area_exact",
    "area_pl_graph",
    "area_lagrange",
    "area_cr",
    "area_parametric_exact",
    "area_parametric_pl",
    "seminorm_error_w11",
    "exact_area_terms",
    "graph_area_terms",
    "parametric_exact_terms",
    "parametric_pl_terms",
    "seminorm_terms",
    "triangle_areas_3d",
    "DEFAULT_SEMINORM_RULE",
]

# the kink of |f_x - P| crosses triangles, hence the composite rule
DEFAULT_SEMINORM_RULE = (DEFAULT_TRIANGLE_DEGREE, 2)


class AreaMethod(enum.Enum):
    EXACT_QUADRATURE = "ExactQuadrature"
    PL_GRAPH = "PLGraph"
    CR_FUNCTIONAL = "CRFunctional"
    PARAMETRIC_PL = "ParametricPL"
    PARAMETRIC_EXACT = "ParametricExact"


@dataclass(frozen=True)
class AreaReport:
    value: float
    method: AreaMethod
    mesh_fineness: float
    max_circumradius: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["method"] = self.method.value
        return d


def _report(value, method, mesh: Triangulation) -> AreaReport:
    return AreaReport(float(value), method, mesh.fineness, mesh.max_circumradius)


def _rule(rule) -> TriangleRule:
    if rule is None:
        return triangle_rule(DEFAULT_TRIANGLE_DEGREE)
    if isinstance(rule, TriangleRule):
        return rule
    return triangle_rule(*rule) if isinstance(rule, tuple) else triangle_rule(int(rule))


def triangle_areas_3d(tri3d) -> np.ndarray:
    """Areas of triangles in space, ``tri3d`` of shape (T, 3, 3)."""
    tri3d = np.asarray(tri3d, dtype=float)
    cr = np.cross(tri3d[:, 1] - tri3d[:, 0], tri3d[:, 2] - tri3d[:, 0])
    return 0.5 * np.linalg.norm(cr, axis=1)


def exact_area_terms(f, mesh: Triangulation, rule=None) -> np.ndarray:
    """Per-triangle quadrature of ``sqrt(1 + |grad f|^2)``."""

    def integrand(x, y):
        gx, gy = f.grad(x, y)
        return np.sqrt(1.0 + gx * gx + gy * gy)

    return integrate_over_triangles(integrand, mesh.xy, _rule(rule))


def area_exact(f, mesh: Triangulation, rule=None) -> AreaReport:
    """Graph area ``int sqrt(1 + |grad f|^2)`` by quadrature on ``mesh``."""
    return _report(math.fsum(exact_area_terms(f, mesh, rule)), AreaMethod.EXACT_QUADRATURE, mesh)


def graph_area_terms(s: PiecewiseLinearSurface) -> np.ndarray:
    """``|K| sqrt(1 + P_K^2 + Q_K^2)`` for every triangle."""
    return s.mesh.areas * np.sqrt(1.0 + s.P * s.P + s.Q * s.Q)


def area_pl_graph(s: PiecewiseLinearSurface) -> AreaReport:
    """Sum of the flat facet areas of a piecewise-affine graph (no quadrature)."""
    method = AreaMethod.CR_FUNCTIONAL if s.kind is Kind.CR else AreaMethod.PL_GRAPH
    return _report(math.fsum(graph_area_terms(s)), method, s.mesh)


def area_lagrange(f, mesh: Triangulation) -> AreaReport:
    """Area of the graph of the Lagrange interpolant of ``f``."""
    return area_pl_graph(interpolate_mesh(f, mesh, Kind.LAGRANGE))


def area_cr(f, mesh: Triangulation, edge_rule=None) -> AreaReport:
    """Area of the (discontinuous) graph of the Crouzeix-Raviart interpolant of ``f``."""
    return area_pl_graph(interpolate_mesh(f, mesh, Kind.CR, edge_rule))


def parametric_exact_terms(F, mesh: Triangulation, rule=None) -> np.ndarray:
    def integrand(x, y):
        J = F.jacobian(x, y)
        return np.linalg.norm(np.cross(J[..., 0], J[..., 1]), axis=-1)

    return integrate_over_triangles(integrand, mesh.xy, _rule(rule))


def area_parametric_exact(F, mesh: Triangulation, rule=None) -> AreaReport:
    """``int |F_x x F_y|`` over the parameter domain covered by ``mesh``."""
    return _report(math.fsum(parametric_exact_terms(F, mesh, rule)), AreaMethod.PARAMETRIC_EXACT, mesh)


def parametric_pl_terms(surfaces) -> np.ndarray:
    mesh = check_same_mesh(surfaces)
    gx = np.column_stack([s.P for s in surfaces])
    gy = np.column_stack([s.Q for s in surfaces])
    return mesh.areas * np.linalg.norm(np.cross(gx, gy), axis=1)


def area_parametric_pl(surfaces) -> AreaReport:
    """Area of the piecewise-affine image given by three component surfaces."""
    surfaces = tuple(surfaces)
    if len(surfaces) != 3:
        raise ValueError(f"expected three component surfaces, got {len(surfaces)}")
    return _report(math.fsum(parametric_pl_terms(surfaces)), AreaMethod.PARAMETRIC_PL, surfaces[0].mesh)


def seminorm_terms(f, s: PiecewiseLinearSurface, rule=None) -> np.ndarray:
    """Per-triangle ``int_K |f_x - P_K| + |f_y - Q_K|``."""
    rule = _rule(rule if rule is not None else DEFAULT_SEMINORM_RULE)
    P, Q = s.P, s.Q

    def integrand(x, y, k):
        gx, gy = f.grad(x, y)
        return np.abs(gx - P[k]) + np.abs(gy - Q[k])

    return integrate_over_triangles(integrand, s.mesh.xy, rule, indexed=True)


def seminorm_error_w11(f, s: PiecewiseLinearSurface, rule=None) -> float:
    """``|f - s|_{1,1}`` summed over the mesh (broken seminorm for CR surfaces)."""
    return math.fsum(seminorm_terms(f, s, rule))
