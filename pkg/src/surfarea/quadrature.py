"""Gauss rules on [0, 1] and on triangles.

Triangle rules are stored in barycentric coordinates with weights summing to
one, so ``integral = |K| * sum(w * f(nodes))``. Degrees 1 and 2 use the
centroid and three-point symmetric rules; higher degrees use a collapsed
(Duffy) tensor product of Gauss-Legendre rules, ``n = ceil((d + 2) / 2)``
points per direction, which is exact to degree ``2n - 2 >= d``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidParameter

__all__ = [
    "EdgeRule",
    "TriangleRule",
    "gauss_legendre",
    "triangle_rule",
    "integrate_edge",
    "integrate_triangle",
    "integrate_over_triangles",
    "DEFAULT_EDGE_ORDER",
    "DEFAULT_TRIANGLE_DEGREE",
]

DEFAULT_EDGE_ORDER = 5
DEFAULT_TRIANGLE_DEGREE = 8


@dataclass(frozen=True, eq=False)
class EdgeRule:
    order: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True, eq=False)
class TriangleRule:
    degree: int
    barycentric_nodes: np.ndarray
    weights: np.ndarray
    refine: int = 0

    @property
    def size(self) -> int:
        return len(self.weights)


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> EdgeRule:
    """Gauss-Legendre rule with ``order`` points mapped to [0, 1]."""
    if int(order) != order or not 1 <= order <= 20:
        raise InvalidParameter(f"edge rule order must be an integer in [1, 20], got {order}")
    x, w = np.polynomial.legendre.leggauss(int(order))
    nodes = 0.5 * (x + 1.0)
    weights = 0.5 * w
    nodes.setflags(write=False)
    weights.setflags(write=False)
    return EdgeRule(int(order), nodes, weights)


def _base_triangle_rule(degree):
    if degree == 1:
        return np.full((1, 3), 1.0 / 3.0), np.ones(1)
    if degree == 2:
        lam = np.array([[2 / 3, 1 / 6, 1 / 6], [1 / 6, 2 / 3, 1 / 6], [1 / 6, 1 / 6, 2 / 3]])
        return lam, np.full(3, 1.0 / 3.0)
    n = math.ceil((degree + 2) / 2)
    g = gauss_legendre(n)
    xi, eta = np.meshgrid(g.nodes, g.nodes, indexing="ij")
    wxi, weta = np.meshgrid(g.weights, g.weights, indexing="ij")
    x = xi.ravel()
    y = (eta * (1.0 - xi)).ravel()
    # reference-triangle area 1/2 is divided out
    w = 2.0 * (wxi * weta * (1.0 - xi)).ravel()
    lam = np.column_stack([1.0 - x - y, x, y])
    return lam, w


def _refine_barycentric(lam, w, levels):
    """Composite rule over the ``4**levels`` congruent subtriangles."""
    corners = np.eye(3)[None]  # (1, 3, 3): subtriangle corner barycentrics
    for _ in range(levels):
        a, b, c = corners[:, 0], corners[:, 1], corners[:, 2]
        ab, bc, ca = (a + b) / 2, (b + c) / 2, (c + a) / 2
        corners = np.concatenate(
            [
                np.stack([a, ab, ca], axis=1),
                np.stack([ab, b, bc], axis=1),
                np.stack([ca, bc, c], axis=1),
                np.stack([bc, ca, ab], axis=1),
            ]
        )
    nodes = np.einsum("qi,sij->sqj", lam, corners).reshape(-1, 3)
    weights = np.tile(w, len(corners)) / len(corners)
    return nodes, weights


@lru_cache(maxsize=None)
def triangle_rule(degree: int, refine: int = 0) -> TriangleRule:
    """Triangle rule exact for polynomials of total degree ``degree``.

    ``refine = k`` applies the rule on each of ``4**k`` subtriangles.
    """
    if int(degree) != degree or not 1 <= degree <= 20:
        raise InvalidParameter(f"triangle rule degree must be an integer in [1, 20], got {degree}")
    if int(refine) != refine or not 0 <= refine <= 6:
        raise InvalidParameter(f"refine must be an integer in [0, 6], got {refine}")
    lam, w = _base_triangle_rule(int(degree))
    if refine:
        lam, w = _refine_barycentric(lam, w, int(refine))
    lam.setflags(write=False)
    w.setflags(write=False)
    return TriangleRule(int(degree), lam, w, int(refine))


def integrate_edge(f, p, q, rule: EdgeRule | None = None) -> float:
    """Integrate ``f(x, y)`` along the segment from ``p`` to ``q`` (arc length)."""
    rule = rule or gauss_legendre(DEFAULT_EDGE_ORDER)
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pts = p + np.outer(rule.nodes, q - p)
    vals = f(pts[:, 0], pts[:, 1])
    return float(np.dot(rule.weights, vals) * np.hypot(*(q - p)))


def integrate_triangle(g, tri, rule: TriangleRule | None = None) -> float:
    """Integrate ``g(x, y)`` over one triangle.

    ``tri`` is a :class:`~surfarea.geometry.TriangleGeom` or a (3, 2) array.
    """
    rule = rule or triangle_rule(DEFAULT_TRIANGLE_DEGREE)
    xy = np.asarray(getattr(tri, "xy", tri), dtype=float).reshape(1, 3, 2)
    return float(integrate_over_triangles(g, xy, rule)[0])


def quadrature_points(xy, rule: TriangleRule) -> np.ndarray:
    """Physical quadrature nodes, shape (T, q, 2), for triangles ``xy`` of shape (T, 3, 2)."""
    return np.einsum("qi,tij->tqj", rule.barycentric_nodes, xy)


def integrate_over_triangles(g, xy, rule: TriangleRule, chunk: int | None = None, indexed: bool = False) -> np.ndarray:
    """Per-triangle integrals of ``g`` over a stack of triangles.

    With ``indexed=True``, ``g`` is called as ``g(x, y, index)`` where
    ``index`` holds the triangle number of every node; otherwise as ``g(x, y)``.
    Work is chunked to bound memory.
    """
    xy = np.asarray(xy, dtype=float)
    d1 = xy[:, 1] - xy[:, 0]
    d2 = xy[:, 2] - xy[:, 0]
    area = 0.5 * np.abs(d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])
    out = np.empty(len(xy))
    if chunk is None:
        chunk = max(1, (1 << 21) // rule.size)  # about 2M nodes per batch
    for start in range(0, len(xy), chunk):
        sl = slice(start, start + chunk)
        pts = quadrature_points(xy[sl], rule)
        if indexed:
            idx = np.broadcast_to(np.arange(start, start + len(pts))[:, None], pts.shape[:2])
            vals = g(pts[..., 0], pts[..., 1], idx)
        else:
            vals = g(pts[..., 0], pts[..., 1])
        # einsum (no BLAS) keeps each triangle's sum independent of the batch shape
        out[sl] = np.einsum("tq,q->t", vals, rule.weights) * area[sl]
    return out
