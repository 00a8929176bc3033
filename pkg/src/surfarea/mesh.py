"""Triangulations of rectangles, the anisotropic strip family and the Schwarz lantern.

All generators index vertices by integer grid arithmetic; coordinates are
never compared to deduplicate. Triangles are stored counterclockwise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .errors import DegenerateTriangle, InvalidParameter
from .geometry import DEGENERACY_RTOL, circumradii, edge_lengths, signed_areas, triangle_angles

__all__ = [
    "Triangulation",
    "LanternMesh",
    "generate_uniform",
    "generate_aniso",
    "aniso_layout",
    "generate_lantern",
    "generate_lantern_parameter_mesh",
    "is_face_to_face",
    "write_off",
    "read_off",
]

DEFAULT_DOMAIN = (-1.0, 1.0, -1.0, 1.0)


def _check_domain(domain):
    a, b, c, d = (float(v) for v in domain)
    if not (b > a and d > c):
        raise InvalidParameter(f"domain must be (a, b, c, d) with a < b and c < d, got {domain}")
    return a, b, c, d


def _frozen(arr):
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Triangulation:
    """Immutable triangle mesh of an axis-aligned rectangle ``(a, b) x (c, d)``.

    Parameters
    ----------
    vertices : array_like, shape (V, 2)
    triangles : array_like of int, shape (T, 3)
        Any orientation is accepted; clockwise triangles are flipped.
    domain : tuple
        ``(a, b, c, d)``.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    domain: tuple = DEFAULT_DOMAIN
    name: str = field(default="", compare=False)

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        t = np.array(self.triangles, dtype=np.int64)
        if v.ndim != 2 or v.shape[1] != 2:
            raise ValueError("vertices must have shape (V, 2)")
        if t.ndim != 2 or t.shape[1] != 3:
            raise ValueError("triangles must have shape (T, 3)")
        if t.size and (t.min() < 0 or t.max() >= len(v)):
            raise ValueError("triangle index out of range")
        if not np.all(np.isfinite(v)):
            raise ValueError("vertex coordinates must be finite")
        sa = signed_areas(v[t])
        flip = sa < 0
        if np.any(flip):
            t[flip] = t[flip][:, [0, 2, 1]]
        diam2 = edge_lengths(v[t]).max(axis=1) ** 2
        bad = np.abs(sa) < DEGENERACY_RTOL * diam2
        if np.any(bad):
            k = int(np.flatnonzero(bad)[0])
            raise DegenerateTriangle(f"triangle {k} with vertices {v[t[k]].tolist()} is degenerate")
        object.__setattr__(self, "vertices", _frozen(v))
        object.__setattr__(self, "triangles", _frozen(t))
        object.__setattr__(self, "domain", _check_domain(self.domain))

    def __len__(self):
        return len(self.triangles)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @cached_property
    def xy(self) -> np.ndarray:
        """Triangle vertex coordinates, shape (T, 3, 2)."""
        return _frozen(self.vertices[self.triangles])

    @cached_property
    def areas(self) -> np.ndarray:
        return _frozen(signed_areas(self.xy))

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return _frozen(edge_lengths(self.xy))

    @cached_property
    def diameters(self) -> np.ndarray:
        return _frozen(self.edge_lengths.max(axis=1))

    @cached_property
    def circumradii(self) -> np.ndarray:
        return _frozen(circumradii(self.xy))

    @cached_property
    def angles(self) -> np.ndarray:
        return _frozen(triangle_angles(self.xy))

    @property
    def fineness(self) -> float:
        """``|tau|``, the largest triangle diameter."""
        return float(self.diameters.max())

    @property
    def max_circumradius(self) -> float:
        return float(self.circumradii.max())

    @property
    def max_angle(self) -> float:
        return float(self.angles.max())

    @property
    def min_angle(self) -> float:
        return float(self.angles.min())

    @property
    def domain_area(self) -> float:
        a, b, c, d = self.domain
        return (b - a) * (d - c)

    @cached_property
    def _edge_table(self):
        t = self.triangles
        # local edge i is opposite local vertex i
        local = np.stack([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]], axis=1)
        key = np.sort(local.reshape(-1, 2), axis=1)
        edges, inverse = np.unique(key, axis=0, return_inverse=True)
        return _frozen(edges), _frozen(inverse.reshape(-1, 3))

    @property
    def edges(self) -> np.ndarray:
        """Global edges as sorted vertex-index pairs, shape (E, 2)."""
        return self._edge_table[0]

    @property
    def triangle_edges(self) -> np.ndarray:
        """Global edge index of the edge opposite each local vertex, shape (T, 3)."""
        return self._edge_table[1]

    def summary(self) -> dict:
        return {
            "triangles": len(self),
            "vertices": self.n_vertices,
            "fineness": self.fineness,
            "max_circumradius": self.max_circumradius,
            "max_angle_deg": math.degrees(self.max_angle),
            "min_angle_deg": math.degrees(self.min_angle),
        }


def generate_uniform(N: int, domain=DEFAULT_DOMAIN) -> Triangulation:
    """``N x N`` grid of rectangles, each cut by the diagonal from lower left to upper right."""
    if int(N) != N or N < 1:
        raise InvalidParameter(f"N must be a positive integer, got {N}")
    N = int(N)
    a, b, c, d = _check_domain(domain)
    x = a + (b - a) * np.arange(N + 1) / N
    y = c + (d - c) * np.arange(N + 1) / N
    x[-1], y[-1] = b, d
    X, Y = np.meshgrid(x, y)
    verts = np.column_stack([X.ravel(), Y.ravel()])
    j, i = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    v00 = (j * (N + 1) + i).ravel()
    v10, v01, v11 = v00 + 1, v00 + N + 1, v00 + N + 2
    tris = np.concatenate([np.column_stack([v00, v10, v11]), np.column_stack([v00, v11, v01])])
    return Triangulation(verts, tris, (a, b, c, d), name=f"uniform(N={N})")


def aniso_layout(N: int, alpha: float, domain=DEFAULT_DOMAIN):
    """Base length, strip count and strip height of :func:`generate_aniso`.

    Returns ``(h, M, k)`` with ``h = (b - a)/N``, ``M = floor((d - c)/h**alpha)``
    and ``k = (d - c)/M``.
    """
    if int(N) != N or N < 2:
        raise InvalidParameter(f"N must be an integer >= 2, got {N}")
    if not alpha >= 1.0:
        raise InvalidParameter(f"alpha must be >= 1, got {alpha}")
    a, b, c, d = _check_domain(domain)
    h = (b - a) / int(N)
    # guards floor() against 2/(2/N) evaluating to N - ulp
    M = math.floor((d - c) / h**alpha * (1.0 + 1e-12))
    if M < 1:
        raise InvalidParameter(f"h**alpha = {h**alpha:.4g} exceeds the domain height {d - c:.4g}")
    return h, M, (d - c) / M


def generate_aniso(N: int, alpha: float, domain=DEFAULT_DOMAIN, strips: int | None = None) -> Triangulation:
    """Strips of congruent isosceles triangles with base ``h`` and height ``~h**alpha``.

    Horizontal lines alternate between nodes at ``a + i h`` and nodes at the
    half-offsets ``a + (i + 1/2) h`` (plus the two corners), so apexes of one
    strip meet base vertices of the next. Each strip holds ``N`` triangles
    with base on the full-node line, ``N - 1`` with base on the half-node line
    and a right triangle with legs ``h/2`` and ``k`` at each end; ``2N + 1``
    triangles in all, stored strip by strip from the bottom.

    ``strips`` truncates the mesh to the lowest ``strips`` strips (the domain
    shrinks accordingly); studies of y-independent fields use this to work on
    a two-strip cell.
    """
    a, b, c, d = _check_domain(domain)
    h, M, k = aniso_layout(N, alpha, domain)
    N = int(N)
    n_strips = M if strips is None else int(strips)
    if not 1 <= n_strips <= M:
        raise InvalidParameter(f"strips must lie in [1, {M}], got {strips}")

    n_lines = n_strips + 1
    # full lines (even index) hold N+1 nodes, half lines N+2
    sizes = np.where(np.arange(n_lines) % 2 == 0, N + 1, N + 2)
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    xs_full = a + h * np.arange(N + 1)
    xs_full[-1] = b
    xs_half = np.concatenate([[a], a + h * (np.arange(N) + 0.5), [b]])
    verts = []
    for ell in range(n_lines):
        y = d if ell == M else c + (d - c) * ell / M
        xs = xs_full if ell % 2 == 0 else xs_half
        verts.append(np.column_stack([xs, np.full(len(xs), y)]))
    verts = np.concatenate(verts)

    i = np.arange(N)
    im = np.arange(N - 1)
    tris = []
    for ell in range(n_strips):
        if ell % 2 == 0:
            L, U = offsets[ell], offsets[ell + 1]
        else:
            U, L = offsets[ell], offsets[ell + 1]
        left = np.array([[L, U + 1, U]])
        base_on_full = np.column_stack([L + i, L + i + 1, U + i + 1])
        base_on_half = np.column_stack([U + im + 1, L + im + 1, U + im + 2])
        right = np.array([[L + N, U + N + 1, U + N]])
        tris.append(np.concatenate([left, base_on_full, base_on_half, right]))
    tris = np.concatenate(tris)
    top = d if n_strips == M else c + (d - c) * n_strips / M
    return Triangulation(verts, tris, (a, b, c, top), name=f"aniso(N={N}, alpha={alpha:g})")


@dataclass(frozen=True, eq=False)
class LanternMesh:
    """Polyhedral surface inscribed in the cylinder of radius ``r`` and height ``H``."""

    m: int
    n: int
    r: float
    H: float
    vertices3d: np.ndarray
    faces: np.ndarray

    @property
    def triangles3d(self) -> np.ndarray:
        return self.vertices3d[self.faces]

    def triangle_areas(self) -> np.ndarray:
        tri = self.triangles3d
        cr = np.cross(tri[:, 1] - tri[:, 0], tri[:, 2] - tri[:, 0])
        return 0.5 * np.linalg.norm(cr, axis=1)

    def area(self) -> float:
        return math.fsum(self.triangle_areas())


def _check_lantern(m, n, r, H):
    if int(m) != m or m < 1:
        raise InvalidParameter(f"m must be a positive integer, got {m}")
    if int(n) != n or n < 2:
        raise InvalidParameter(f"n must be an integer >= 2, got {n}")
    if not (r > 0 and H > 0):
        raise InvalidParameter(f"r and H must be positive, got r={r}, H={H}")
    return int(m), int(n), float(r), float(H)


def _lantern_faces(m, n, row_size, wrap):
    """Faces of the lantern strip structure; ``wrap`` closes rows periodically.

    In strip ``j`` the triangle family with its base on the lower ring
    alternates with ``j`` so that the rings' half-step rotation is followed.
    """
    j = np.arange(m)[:, None]
    i = np.arange(n)[None, :]
    lo, hi = j * row_size, (j + 1) * row_size
    even = j % 2 == 0
    base, apex = np.where(even, lo, hi), np.where(even, hi, lo)
    if wrap:
        b0, b1, a0, a_prev = base + i, base + (i + 1) % n, apex + i, apex + (i - 1) % n
    else:
        # full rows carry nodes at 0..n, half rows nodes -1..n-1 stored at 0..n
        b0, b1, a0, a_prev = base + i, base + i + 1, apex + i + 1, apex + i
    up = np.stack([b0, b1, a0], axis=-1)
    down = np.stack([a_prev, b0, a0], axis=-1)
    return np.stack([up, down], axis=2).reshape(-1, 3).astype(np.int64)


def generate_lantern(m: int, n: int, r: float, H: float) -> LanternMesh:
    """Schwarz lantern: ``m`` strips of ``2n`` congruent triangles on the cylinder.

    Ring ``j`` sits at height ``j H / m``; its ``n`` vertices are at angles
    ``(2 i + j) pi / n`` so consecutive rings are rotated by ``pi / n``.
    """
    m, n, r, H = _check_lantern(m, n, r, H)
    j, i = np.meshgrid(np.arange(m + 1), np.arange(n), indexing="ij")
    phi = (2 * i + (j % 2)) * math.pi / n
    z = j * H / m
    z[-1] = H
    verts = np.stack([r * np.cos(phi), r * np.sin(phi), z.astype(float)], axis=-1).reshape(-1, 3)
    faces = _lantern_faces(m, n, n, wrap=True)
    return LanternMesh(m, n, r, H, verts, faces)


def generate_lantern_parameter_mesh(m: int, n: int, r: float, H: float) -> Triangulation:
    """Triangulation of the ``(u, v)`` parameter strip that rolls up into the lantern.

    Even rows carry nodes at ``u = 2 i pi r / n`` (``i = 0..n``), odd rows at
    ``u = (2 i + 1) pi r / n`` (``i = -1..n-1``). The covered region is a
    sawtooth-edged fundamental domain of the ``2 pi r``-periodic strip; its
    area equals that of ``(0, 2 pi r) x (0, H)``, which is stored as ``domain``.
    """
    m, n, r, H = _check_lantern(m, n, r, H)
    du = math.pi * r / n
    rows = []
    for j in range(m + 1):
        v = H if j == m else j * H / m
        u = (2 * np.arange(n + 1)) * du if j % 2 == 0 else (2 * np.arange(-1, n) + 1) * du
        rows.append(np.column_stack([u, np.full(n + 1, v)]))
    verts = np.concatenate(rows)
    faces = _lantern_faces(m, n, n + 1, wrap=False)
    return Triangulation(verts, faces, (0.0, 2 * math.pi * r, 0.0, H), name=f"lantern-param(m={m}, n={n})")


def _segments_cross(p, q, r, s):
    """Proper crossings between segment arrays ``p q`` and ``r s`` (broadcast)."""

    def orient(a, b, c):
        return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])

    o1, o2 = orient(p, q, r), orient(p, q, s)
    o3, o4 = orient(r, s, p), orient(r, s, q)
    return (o1 * o2 < 0) & (o3 * o4 < 0)


def is_face_to_face(mesh: Triangulation, exhaustive: bool | None = None, rtol: float = 1e-9) -> bool:
    """Check that triangles meet only in full shared edges or vertices.

    The hashed-edge test requires every edge to be used at most twice, with
    opposite orientations when shared, a disk topology (``V - E + T = 1``,
    which fails for hanging nodes) and an area sum equal to the domain area.
    ``exhaustive`` adds a pairwise geometric test (default: meshes with at
    most 2000 triangles).
    """
    t = mesh.triangles
    directed = np.stack([t[:, [1, 2]], t[:, [2, 0]], t[:, [0, 1]]], axis=1).reshape(-1, 2)
    key = np.sort(directed, axis=1)
    _, inverse, counts = np.unique(key, axis=0, return_inverse=True, return_counts=True)
    if counts.max() > 2:
        return False
    shared = counts[inverse] == 2
    # a shared edge must be traversed in both directions
    fwd = directed[:, 0] < directed[:, 1]
    pair_fwd = np.bincount(inverse[shared], weights=fwd[shared].astype(float), minlength=len(counts))
    if np.any(pair_fwd[counts == 2] != 1):
        return False
    used = np.unique(t)
    if len(used) - len(counts) + len(t) != 1:
        return False
    if abs(math.fsum(mesh.areas) - mesh.domain_area) > rtol * mesh.domain_area:
        return False
    if exhaustive is None:
        exhaustive = len(t) <= 2000
    if not exhaustive:
        return True

    xy = mesh.xy
    scale = mesh.fineness
    eps = 1e-12 * scale * scale
    # no vertex strictly inside a triangle or strictly inside a foreign edge
    P = mesh.vertices[used][None, :, :]
    A, B, C = xy[:, None, 0], xy[:, None, 1], xy[:, None, 2]

    def cr(a, b, p):
        return (b[..., 0] - a[..., 0]) * (p[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (p[..., 0] - a[..., 0])

    c1, c2, c3 = cr(A, B, P), cr(B, C, P), cr(C, A, P)
    own = (t[:, :, None] == used[None, None, :]).any(axis=1)
    inside = (c1 >= -eps) & (c2 >= -eps) & (c3 >= -eps) & ~own
    if np.any(inside):
        return False
    E = np.unique(key, axis=0)
    p, q = mesh.vertices[E[:, 0]], mesh.vertices[E[:, 1]]
    crossing = _segments_cross(p[:, None], q[:, None], p[None, :], q[None, :])
    return not np.any(crossing)


def write_off(path, vertices, faces) -> Path:
    """Write an ASCII OFF file with triangular faces."""
    path = Path(path)
    vertices = np.asarray(vertices, dtype=float)
    if vertices.shape[1] == 2:
        vertices = np.column_stack([vertices, np.zeros(len(vertices))])
    faces = np.asarray(faces, dtype=np.int64)
    with path.open("w") as fh:
        fh.write("OFF\n")
        fh.write(f"{len(vertices)} {len(faces)} 0\n")
        for x, y, z in vertices:
            fh.write(f"{float(x)!r} {float(y)!r} {float(z)!r}\n")
        for i, j, k in faces:
            fh.write(f"3 {i} {j} {k}\n")
    return path


def read_off(path):
    """Read the triangle subset of the OFF format written by :func:`write_off`.

    Returns
    -------
    vertices : ndarray, shape (V, 3)
    faces : ndarray of int, shape (F, 3)
    """
    tokens = []
    with Path(path).open() as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.append(line.split())
    if not tokens or tokens[0][0] != "OFF":
        raise ValueError(f"{path}: missing OFF header")
    head = tokens[0][1:] if len(tokens[0]) > 1 else None
    body = tokens[1:]
    if head is None:
        head, body = body[0], body[1:]
    nv, nf = int(head[0]), int(head[1])
    if len(body) < nv + nf:
        raise ValueError(f"{path}: expected {nv} vertices and {nf} faces")
    vertices = np.array([[float(v) for v in row[:3]] for row in body[:nv]])
    faces = []
    for row in body[nv : nv + nf]:
        if int(row[0]) != 3:
            raise ValueError(f"{path}: only triangular faces are supported")
        faces.append([int(v) for v in row[1:4]])
    return vertices, np.array(faces, dtype=np.int64).reshape(-1, 3)
