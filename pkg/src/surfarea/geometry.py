"""Triangle measures and shape parameters.

Scalar entry points (:func:`triangle_geom`, :func:`normalize_to_ktilde`) work
on a single triangle; the ``*_arrays`` helpers do the same arithmetic on
stacks of triangles of shape ``(T, 3, 2)`` and are what the mesh code uses.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import DegenerateTriangle

__all__ = [
    "Point2",
    "Point3",
    "TriangleGeom",
    "ShapeTransform",
    "triangle_geom",
    "normalize_to_ktilde",
    "ktilde_vertices",
    "signed_areas",
    "edge_lengths",
    "triangle_angles",
    "circumradii",
    "DEGENERACY_RTOL",
]

# relative to diameter**2
DEGENERACY_RTOL = 1e-14


class Point2(NamedTuple):
    x: float
    y: float


class Point3(NamedTuple):
    x: float
    y: float
    z: float


def signed_areas(xy):
    """Signed areas of triangles ``xy[..., 3, 2]`` (positive when counterclockwise)."""
    xy = np.asarray(xy, dtype=float)
    d1 = xy[..., 1, :] - xy[..., 0, :]
    d2 = xy[..., 2, :] - xy[..., 0, :]
    return 0.5 * (d1[..., 0] * d2[..., 1] - d1[..., 1] * d2[..., 0])


def edge_lengths(xy):
    """Edge lengths with ``e_i`` opposite vertex ``i``; shape ``(..., 3)``."""
    xy = np.asarray(xy, dtype=float)
    nxt = np.roll(xy, -1, axis=-2)
    prv = np.roll(xy, 1, axis=-2)
    return np.linalg.norm(nxt - prv, axis=-1)


def triangle_angles(xy):
    """Interior angles at each vertex, computed with atan2(|cross|, dot)."""
    xy = np.asarray(xy, dtype=float)
    u = np.roll(xy, -1, axis=-2) - xy
    v = np.roll(xy, 1, axis=-2) - xy
    cross = np.abs(u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0])
    dot = np.sum(u * v, axis=-1)
    return np.arctan2(cross, dot)


def circumradii(xy):
    """Circumradius ``|e1||e2||e3| / (4 |K|)`` of each triangle."""
    e = edge_lengths(xy)
    return np.prod(e, axis=-1) / (4.0 * np.abs(signed_areas(xy)))


@dataclass(frozen=True)
class TriangleGeom:
    """Measures of one non-degenerate triangle, vertices stored counterclockwise."""

    vertices: tuple
    edge_lengths: tuple
    area: float
    diameter: float
    circumradius: float
    min_angle: float
    max_angle: float
    angles: tuple

    @property
    def xy(self) -> np.ndarray:
        return np.array(self.vertices, dtype=float)

    @property
    def centroid(self) -> Point2:
        c = self.xy.mean(axis=0)
        return Point2(float(c[0]), float(c[1]))


def triangle_geom(p0, p1, p2) -> TriangleGeom:
    """Compute the size and shape measures of the triangle ``p0 p1 p2``.

    Clockwise input is reordered to counterclockwise by swapping ``p1`` and
    ``p2``. Raises :class:`DegenerateTriangle` if the area is below
    ``1e-14 * diameter**2``.
    """
    xy = np.array([p0, p1, p2], dtype=float)
    if xy.shape != (3, 2) or not np.all(np.isfinite(xy)):
        raise DegenerateTriangle(f"expected three finite 2D points, got {xy.tolist()}")
    a = float(signed_areas(xy))
    if a < 0:
        xy = xy[[0, 2, 1]]
        a = -a
    e = edge_lengths(xy)
    diam = float(e.max())
    if diam == 0.0 or a < DEGENERACY_RTOL * diam * diam:
        raise DegenerateTriangle(f"triangle {xy.tolist()} is degenerate (area {a:.3g})")
    ang = triangle_angles(xy)
    return TriangleGeom(
        vertices=tuple(Point2(float(x), float(y)) for x, y in xy),
        edge_lengths=tuple(float(v) for v in e),
        area=a,
        diameter=diam,
        circumradius=float(np.prod(e) / (4.0 * a)),
        min_angle=float(ang.min()),
        max_angle=float(ang.max()),
        angles=tuple(float(v) for v in ang),
    )


@dataclass(frozen=True)
class ShapeTransform:
    """Similarity (plus optional mirror) carrying the model triangle onto a triangle.

    A model point ``v`` goes to ``translation + scale * R(rotation) @ M @ v``,
    with ``M = diag(1, -1)`` when ``mirrored``. ``s`` and ``t`` are the cosine
    and sine of the model triangle's angle at the origin.
    """

    s: float
    t: float
    scale: float
    rotation: float
    translation: Point2
    mirrored: bool

    def matrix(self) -> np.ndarray:
        c, sn = math.cos(self.rotation), math.sin(self.rotation)
        rot = np.array([[c, -sn], [sn, c]])
        if self.mirrored:
            rot = rot @ np.diag([1.0, -1.0])
        return self.scale * rot

    def apply(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        return pts @ self.matrix().T + np.asarray(self.translation)


def ktilde_vertices(alpha: float, s: float, t: float) -> np.ndarray:
    """Vertices ``(0,0), (1,0), (alpha*s, alpha*t)`` of the model triangle."""
    return np.array([[0.0, 0.0], [1.0, 0.0], [alpha * s, alpha * t]])


def normalize_to_ktilde(tri: TriangleGeom):
    """Find the similarity that maps the model triangle onto ``tri``.

    The model triangle has its longest edge opposite the origin, a unit edge
    along the x-axis (the middle edge of ``tri`` after scaling) and the
    shortest edge of length ``alpha <= 1`` at angle ``theta`` from it.

    Returns
    -------
    transform : ShapeTransform
    alpha : float
    """
    xy = tri.xy
    e = np.asarray(tri.edge_lengths)
    # stable sort keeps ties deterministic
    order = np.argsort(-e, kind="stable")
    i1 = int(order[0])  # opposite the longest edge: largest angle
    # the edge x1-x2 has length |e_3| (opposite x3), the second longest
    i3 = int(order[1])
    i2 = 3 - i1 - i3
    x1, x2, x3 = xy[i1], xy[i2], xy[i3]
    d2 = x2 - x1
    d3 = x3 - x1
    scale = float(np.hypot(*d2))
    alpha = float(np.hypot(*d3)) / scale
    cross = d2[0] * d3[1] - d2[1] * d3[0]
    dot = d2[0] * d3[0] + d2[1] * d3[1]
    theta = math.atan2(abs(cross), dot)
    rotation = math.atan2(d2[1], d2[0])
    transform = ShapeTransform(
        s=math.cos(theta),
        t=math.sin(theta),
        scale=scale,
        rotation=rotation,
        translation=Point2(float(x1[0]), float(x1[1])),
        mirrored=bool(cross < 0),
    )
    return transform, alpha
