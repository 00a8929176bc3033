"""Lagrange and Crouzeix-Raviart interpolation by affine functions.

On a triangle with barycentric coordinates ``lam_i`` and edges ``e_i``
opposite vertex ``i``, the Crouzeix-Raviart interpolant is
``sum_i (int_{e_i} f ds) * theta_i`` with ``theta_i = (1 - 2 lam_i) / |e_i|``.
Since ``theta_i * |e_i|`` has unit mean on ``e_i`` and zero mean on the other
edges, this is ``sum_i m_i (1 - 2 lam_i)`` with ``m_i`` the mean of ``f``
over ``e_i``; its gradient is ``-2 sum_i m_i grad(lam_i)``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter, MeshMismatch
from .geometry import TriangleGeom, triangle_geom
from .mesh import Triangulation
from .quadrature import DEFAULT_EDGE_ORDER, EdgeRule, gauss_legendre

__all__ = [
    "Kind",
    "AffineFunction",
    "CRBasis",
    "PiecewiseLinearSurface",
    "barycentric_gradients",
    "lagrange_on_triangle",
    "cr_basis",
    "cr_on_triangle",
    "edge_means",
    "interpolate_mesh",
    "interpolate_mesh_vector",
]


class Kind(enum.Enum):
    LAGRANGE = "lagrange"
    CR = "cr"

    @classmethod
    def parse(cls, value) -> "Kind":
        if isinstance(value, cls):
            return value
        v = str(value).lower().replace("-", "").replace("_", "")
        if v in ("lagrange", "l", "p1"):
            return cls.LAGRANGE
        if v in ("cr", "crouzeixraviart"):
            return cls.CR
        raise InvalidParameter(f"unknown interpolation kind {value!r}; use 'lagrange' or 'cr'")


@dataclass(frozen=True)
class AffineFunction:
    """``P x + Q y + R``."""

    P: float
    Q: float
    R: float

    def __call__(self, x, y):
        return self.P * np.asarray(x, dtype=float) + self.Q * np.asarray(y, dtype=float) + self.R

    @property
    def gradient(self):
        return self.P, self.Q

    def as_field(self):
        """The same function as a :class:`~surfarea.fields.ScalarField`."""
        from .fields import builtin

        return builtin("affine", {"P": self.P, "Q": self.Q, "R": self.R})


@dataclass(frozen=True)
class CRBasis:
    """The three affine functions dual to the edge integrals of a triangle."""

    tri: TriangleGeom
    theta: tuple


def _as_geom(tri) -> TriangleGeom:
    if isinstance(tri, TriangleGeom):
        return tri
    return triangle_geom(*np.asarray(tri, dtype=float))


def barycentric_gradients(xy) -> np.ndarray:
    """Gradients of the barycentric coordinates, shape (..., 3, 2).

    ``grad(lam_i)`` is the edge ``x_{i+2} - x_{i+1}`` rotated by +90 degrees
    and divided by twice the signed area.
    """
    xy = np.asarray(xy, dtype=float)
    e = np.roll(xy, -2, axis=-2) - np.roll(xy, -1, axis=-2)
    d1 = xy[..., 1, :] - xy[..., 0, :]
    d2 = xy[..., 2, :] - xy[..., 0, :]
    twice_area = d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0]
    g = np.stack([-e[..., 1], e[..., 0]], axis=-1)
    return g / twice_area[..., None, None]


def _affine_fit(pts, vals):
    """``(P, Q, R)`` of the affine function taking ``vals`` at the three ``pts``.

    Solved in the orthonormal frame of the longest side rather than by
    Cramer's rule: the slope along that side is then exact to rounding and
    only the (intrinsically ill-conditioned) slope across a thin triangle
    absorbs the cancellation, which keeps pointwise values accurate to a few
    ulps of ``max|vals|`` even for aspect ratios of 1e4 and beyond.
    """
    pts = np.asarray(pts, dtype=float)
    vals = np.asarray(vals, dtype=float)
    side = np.linalg.norm(np.roll(pts, -1, axis=-2) - np.roll(pts, -2, axis=-2), axis=-1)
    k = np.argmax(side, axis=-1)[..., None]
    order = (k + np.array([1, 2, 0])) % 3  # longest side first, opposite point last
    q = np.take_along_axis(pts, order[..., None], axis=-2)
    v = np.take_along_axis(vals, order, axis=-1)
    e = q[..., 1, :] - q[..., 0, :]
    length = np.hypot(e[..., 0], e[..., 1])
    t = e / length[..., None]
    n = np.stack([-t[..., 1], t[..., 0]], axis=-1)
    r = q[..., 2, :] - q[..., 0, :]
    gt = (v[..., 1] - v[..., 0]) / length
    gn = (v[..., 2] - v[..., 0] - gt * np.sum(r * t, axis=-1)) / np.sum(r * n, axis=-1)
    grad = gt[..., None] * t + gn[..., None] * n
    c = pts.mean(axis=-2)
    R = vals.mean(axis=-1) - grad[..., 0] * c[..., 0] - grad[..., 1] * c[..., 1]
    return np.stack([grad[..., 0], grad[..., 1], R], axis=-1)


def _edge_midpoints(xy):
    """Midpoint of edge ``i`` (opposite vertex ``i``), shape (..., 3, 2)."""
    return 0.5 * (np.roll(xy, -1, axis=-2) + np.roll(xy, -2, axis=-2))


def _lagrange_coefficients(xy, vals):
    return _affine_fit(xy, vals)


def _cr_coefficients(xy, means):
    # an affine function's mean over a segment is its midpoint value, so the
    # interpolant is the affine function taking m_i at the midpoint of e_i;
    # its gradient is -2 sum_i m_i grad(lam_i)
    return _affine_fit(_edge_midpoints(xy), means)


def _edge_rule(edge_rule):
    if edge_rule is None:
        return gauss_legendre(DEFAULT_EDGE_ORDER)
    if isinstance(edge_rule, EdgeRule):
        return edge_rule
    return gauss_legendre(int(edge_rule))


def lagrange_on_triangle(f, tri) -> AffineFunction:
    """The affine function matching ``f`` at the three vertices of ``tri``."""
    geom = _as_geom(tri)
    xy = geom.xy
    vals = np.asarray(f(xy[:, 0], xy[:, 1]), dtype=float)
    P, Q, R = _lagrange_coefficients(xy, vals)
    return AffineFunction(float(P), float(Q), float(R))


def cr_basis(tri) -> CRBasis:
    """``theta_i = (1 - 2 lam_i) / |e_i|`` for ``i = 0, 1, 2``."""
    geom = _as_geom(tri)
    xy = geom.xy
    thetas = []
    for i, length in enumerate(geom.edge_lengths):
        m = np.zeros(3)
        m[i] = 1.0 / length
        P, Q, R = _cr_coefficients(xy, m)
        thetas.append(AffineFunction(float(P), float(Q), float(R)))
    return CRBasis(geom, tuple(thetas))


def edge_means(f, p, q, edge_rule=None) -> np.ndarray:
    """Mean of ``f`` over the segments ``p -> q`` (arrays of shape (E, 2))."""
    rule = _edge_rule(edge_rule)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pts = p[..., None, :] + rule.nodes[:, None] * (q - p)[..., None, :]
    vals = np.asarray(f(pts[..., 0], pts[..., 1]), dtype=float)
    return vals @ rule.weights


def cr_on_triangle(f, tri, edge_rule=None) -> AffineFunction:
    """Crouzeix-Raviart interpolant of ``f`` on one triangle."""
    geom = _as_geom(tri)
    xy = geom.xy
    m = edge_means(f, np.roll(xy, -1, axis=0), np.roll(xy, -2, axis=0), edge_rule)
    P, Q, R = _cr_coefficients(xy, m)
    return AffineFunction(float(P), float(Q), float(R))


@dataclass(frozen=True, eq=False)
class PiecewiseLinearSurface:
    """One affine function per triangle of ``mesh``; ``coeffs[k] = (P, Q, R)``."""

    mesh: Triangulation
    coeffs: np.ndarray
    kind: Kind

    def __len__(self):
        return len(self.coeffs)

    def __getitem__(self, k) -> AffineFunction:
        P, Q, R = self.coeffs[k]
        return AffineFunction(float(P), float(Q), float(R))

    @property
    def P(self) -> np.ndarray:
        return self.coeffs[:, 0]

    @property
    def Q(self) -> np.ndarray:
        return self.coeffs[:, 1]

    @property
    def R(self) -> np.ndarray:
        return self.coeffs[:, 2]

    def evaluate(self, tri_index, x, y):
        """Value of the piece on triangle ``tri_index`` at ``(x, y)``."""
        c = self.coeffs[tri_index]
        return c[..., 0] * x + c[..., 1] * y + c[..., 2]

    def corner_values(self) -> np.ndarray:
        """Values at each triangle's own vertices, shape (T, 3)."""
        xy = self.mesh.xy
        return self.coeffs[:, None, 0] * xy[..., 0] + self.coeffs[:, None, 1] * xy[..., 1] + self.coeffs[:, None, 2]

    def continuity_defect(self) -> float:
        """Largest jump between neighbours at the points where the kind is continuous.

        Lagrange surfaces are compared at shared vertices, CR surfaces at the
        midpoints of shared edges.
        """
        mesh = self.mesh
        if self.kind is Kind.LAGRANGE:
            vals = self.corner_values().ravel()
            idx = mesh.triangles.ravel()
            hi = np.full(mesh.n_vertices, -np.inf)
            lo = np.full(mesh.n_vertices, np.inf)
            np.maximum.at(hi, idx, vals)
            np.minimum.at(lo, idx, vals)
            used = np.isfinite(hi)
            return float(np.max(hi[used] - lo[used]))
        xy = mesh.xy
        mid = _edge_midpoints(xy)
        vals = (self.coeffs[:, None, 0] * mid[..., 0] + self.coeffs[:, None, 1] * mid[..., 1] + self.coeffs[:, None, 2]).ravel()
        idx = mesh.triangle_edges.ravel()
        n = len(mesh.edges)
        hi = np.full(n, -np.inf)
        lo = np.full(n, np.inf)
        np.maximum.at(hi, idx, vals)
        np.minimum.at(lo, idx, vals)
        return float(np.max(hi - lo))

    def to_off_data(self):
        """Vertices and faces of the graph ``z = g(x, y)``.

        Lagrange surfaces share mesh vertices; CR surfaces are written as a
        triangle soup because they jump across edges.
        """
        mesh = self.mesh
        if self.kind is Kind.LAGRANGE:
            z = np.empty(mesh.n_vertices)
            z[mesh.triangles.ravel()] = self.corner_values().ravel()
            return np.column_stack([mesh.vertices, z]), mesh.triangles.copy()
        xy = mesh.xy.reshape(-1, 2)
        z = self.corner_values().ravel()
        faces = np.arange(3 * len(mesh)).reshape(-1, 3)
        return np.column_stack([xy, z]), faces


def _check_finite(coeffs):
    bad = ~np.all(np.isfinite(coeffs), axis=1)
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        raise InvalidParameter(f"interpolant is not finite on triangle {k}; is the field defined there?")


def interpolate_mesh(f, mesh: Triangulation, kind="lagrange", edge_rule=None) -> PiecewiseLinearSurface:
    """Triangle-by-triangle Lagrange or CR interpolant of ``f`` on ``mesh``.

    CR edge means are computed once per global edge, so neighbouring
    triangles use identical numbers and agree at shared edge midpoints.
    """
    kind = Kind.parse(kind)
    xy = mesh.xy
    with np.errstate(invalid="ignore", divide="ignore"):
        if kind is Kind.LAGRANGE:
            vals = np.asarray(f(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float)
            coeffs = _lagrange_coefficients(xy, vals[mesh.triangles])
        else:
            E = mesh.edges
            means = edge_means(f, mesh.vertices[E[:, 0]], mesh.vertices[E[:, 1]], edge_rule)
            coeffs = _cr_coefficients(xy, means[mesh.triangle_edges])
    _check_finite(coeffs)
    coeffs.setflags(write=False)
    return PiecewiseLinearSurface(mesh, coeffs, kind)


def interpolate_mesh_vector(F, mesh: Triangulation, kind="lagrange", edge_rule=None):
    """Componentwise interpolation of a map into R^3; returns three surfaces."""
    return tuple(interpolate_mesh(F.component(i), mesh, kind, edge_rule) for i in range(3))


def check_same_mesh(surfaces):
    mesh = surfaces[0].mesh
    kind = surfaces[0].kind
    for s in surfaces[1:]:
        if s.mesh is not mesh:
            raise MeshMismatch("surfaces are defined on different meshes")
        if s.kind is not kind:
            raise MeshMismatch("surfaces mix Lagrange and Crouzeix-Raviart pieces")
    return mesh
