import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from surfarea.errors import InvalidParameter, MeshMismatch
from surfarea.fields import affine_vector_field, builtin
from surfarea.geometry import triangle_geom
from surfarea.interp import (
    AffineFunction,
    Kind,
    barycentric_gradients,
    cr_basis,
    cr_on_triangle,
    edge_means,
    interpolate_mesh,
    interpolate_mesh_vector,
    lagrange_on_triangle,
)
from surfarea.mesh import generate_aniso, generate_uniform
from surfarea.quadrature import gauss_legendre, integrate_edge, integrate_triangle, triangle_rule

from conftest import random_triangle, well_shaped

REF = triangle_geom((0, 0), (1, 0), (0, 1))
coord = st.floats(-3, 3, allow_nan=False)
triangle = st.tuples(*[st.tuples(coord, coord)] * 3).map(np.array).filter(well_shaped)


def square(x, y):
    return np.asarray(x, dtype=float) ** 2


def test_lagrange_x_squared():
    g = lagrange_on_triangle(square, REF)
    assert (g.P, g.Q, g.R) == pytest.approx((1.0, 0.0, 0.0), abs=1e-15)


def test_lagrange_cylinder_slice():
    f = builtin("cylinder-slice", {"a": 1.1})
    g = lagrange_on_triangle(f, REF)
    assert g.P == pytest.approx(math.sqrt(0.21) - 1.1, abs=1e-15)
    assert g.Q == pytest.approx(0.0, abs=1e-15)
    assert g.R == pytest.approx(1.1, abs=1e-15)


def test_cr_x_squared_mean_gradient():
    g = cr_on_triangle(square, REF)
    assert (g.P, g.Q) == pytest.approx((2 / 3, 0.0), abs=1e-14)
    # edge-integral oracle: the interpolant matches the exact edge means of x^2
    # mean of x^2 over the edges opposite (0,0), (1,0), (0,1)
    exact_means = [1 / 3, 0.0, 1 / 3]
    v = REF.xy
    for i in range(3):
        p, q = v[(i + 1) % 3], v[(i + 2) % 3]
        mean_g = integrate_edge(g, p, q) / np.hypot(*(q - p))
        assert mean_g == pytest.approx(exact_means[i], abs=1e-14)


@pytest.mark.parametrize("op", [lagrange_on_triangle, cr_on_triangle])
def test_affine_reproduced_to_the_last_bits(op):
    f = AffineFunction(2.0, -1.0, 3.0)
    tri = triangle_geom((0.1, 0.2), (0.9, 0.3), (0.4, 0.8))
    g = op(f, tri)
    assert (g.P, g.Q, g.R) == pytest.approx((2.0, -1.0, 3.0), abs=1e-14)


def test_cr_basis_duality():
    rng = np.random.default_rng(2)
    for _ in range(20):
        geom = triangle_geom(*random_triangle(rng, max_aspect=100, diameter=(0.5, 2)))
        basis = cr_basis(geom)
        v = geom.xy
        for i, theta in enumerate(basis.theta):
            for j in range(3):
                p, q = v[(j + 1) % 3], v[(j + 2) % 3]
                assert integrate_edge(theta, p, q) == pytest.approx(float(i == j), abs=1e-12)
        # sum_i |e_i| theta_i = sum_i (1 - 2 lam_i) = 1
        x, y = (rng.dirichlet([1, 1, 1], 5) @ v).T
        total = sum(length * th(x, y) for length, th in zip(geom.edge_lengths, basis.theta))
        np.testing.assert_allclose(total, 1.0, atol=1e-12)


@settings(max_examples=100)
@given(triangle)
def test_barycentric_gradients_partition_of_unity(xy):
    G = barycentric_gradients(xy)
    geom = triangle_geom(*xy)
    cond = geom.diameter**2 / geom.area
    np.testing.assert_allclose(G.sum(axis=0), 0.0, atol=1e-13 * np.abs(G).max())
    # grad(lam_i) . (x_j - x_0) = delta_ij for i, j in {1, 2}
    np.testing.assert_allclose((xy[1:] - xy[0]) @ G[1:].T, np.eye(2), atol=1e-14 * cond)


@settings(max_examples=100)
@given(triangle, st.tuples(*[st.floats(-5, 5)] * 3))
def test_interpolants_are_projections(xy, coeffs):
    P, Q, R = coeffs
    geom = triangle_geom(*xy)
    f = AffineFunction(P, Q, R)
    pts = np.vstack([geom.xy, geom.xy.mean(axis=0)])
    scale = max(1.0, np.abs(f(pts[:, 0], pts[:, 1])).max())
    for op in (lagrange_on_triangle, cr_on_triangle):
        g = op(f, geom)
        np.testing.assert_allclose(g(pts[:, 0], pts[:, 1]), f(pts[:, 0], pts[:, 1]), atol=1e-13 * scale)


def test_edge_means_vectorised():
    f = builtin("gauss-bump")
    p = np.array([[0, 0], [0.5, -0.5]])
    q = np.array([[1, 0], [0.5, 0.5]])
    m = edge_means(f, p, q, gauss_legendre(12))
    for k in range(2):
        assert m[k] == pytest.approx(integrate_edge(f, p[k], q[k], gauss_legendre(12)) / np.hypot(*(q[k] - p[k])))


def _w1inf(gx, gy):
    return max(np.abs(gx).max(), np.abs(gy).max())


def _stability_ratio(f, geom, rng):
    """|I^L f|_{1,inf,K} / |f|_{1,inf,K}, the sup sampled densely on K."""
    g = lagrange_on_triangle(f, geom)
    pts = np.vstack([geom.xy, rng.dirichlet([1, 1, 1], 2000) @ geom.xy])
    return _w1inf(g.P, g.Q) / _w1inf(*f.grad(pts[:, 0], pts[:, 1]))


def test_lagrange_stability_bound(rng):
    """The W^{1,inf} stability constant is at most 4 / sin(max angle)."""
    for _ in range(200):
        geom = triangle_geom(*random_triangle(rng, max_aspect=1e3, diameter=(0.1, 1)))
        k = rng.normal(size=2) * 3
        f = builtin("gauss-bump", {"sigma": rng.uniform(0.2, 1), "x0": k[0] / 6, "y0": k[1] / 6})
        assert _stability_ratio(f, geom, rng) <= 4 / math.sin(geom.max_angle)


def test_lagrange_stability_controlled_by_maximum_angle(rng):
    """Flat triangles (max angle -> pi) lose stability; thin right triangles do not."""
    f = builtin("quadratic")  # x^2 + y^2
    h = 0.1
    flat, right = [], []
    for eps in (0.3, 0.1, 0.03, 0.01):
        flat.append(_stability_ratio(f, triangle_geom((0, 0), (h, 0), (h / 2, eps * h)), rng))
        right.append(_stability_ratio(f, triangle_geom((0, 0), (h, 0), (0, eps * h)), rng))
    assert all(b > 2 * a for a, b in zip(flat, flat[1:]))
    assert max(right) <= 1.0 + 1e-12


@pytest.mark.parametrize("kind", ["lagrange", "cr"])
def test_mesh_affine_reproduction(kind):
    f = builtin("affine", {"P": 0.5, "Q": -1.5, "R": 2.0})
    s = interpolate_mesh(f, generate_aniso(8, 1.6), kind)
    np.testing.assert_allclose(s.P, 0.5, atol=1e-12)
    np.testing.assert_allclose(s.Q, -1.5, atol=1e-12)
    np.testing.assert_allclose(s.R, 2.0, atol=1e-12)
    assert isinstance(s[3], AffineFunction)


def test_mesh_matches_single_triangle_ops():
    f = builtin("gauss-bump", {"sigma": 0.3})
    mesh = generate_uniform(5)
    s_l = interpolate_mesh(f, mesh, Kind.LAGRANGE)
    s_c = interpolate_mesh(f, mesh, Kind.CR, 7)
    for k in (0, 7, 31, 49):
        a = lagrange_on_triangle(f, mesh.xy[k])
        b = cr_on_triangle(f, mesh.xy[k], gauss_legendre(7))
        assert s_l.coeffs[k] == pytest.approx([a.P, a.Q, a.R], abs=1e-13)
        assert s_c.coeffs[k] == pytest.approx([b.P, b.Q, b.R], abs=1e-13)


def test_continuity_at_vertices_and_midpoints():
    f = builtin("gauss-bump", {"sigma": 0.3})
    mesh = generate_aniso(10, 1.6)
    assert interpolate_mesh(f, mesh, "lagrange").continuity_defect() < 1e-14
    cr = interpolate_mesh(f, mesh, "cr")
    assert cr.continuity_defect() < 1e-14
    # but CR jumps at vertices
    corners = cr.corner_values().ravel()
    idx = mesh.triangles.ravel()
    spread = max(np.ptp(corners[idx == v]) for v in range(mesh.n_vertices))
    assert spread > 1e-6


def test_off_data_shapes():
    f = builtin("quadratic")
    mesh = generate_uniform(3)
    v, faces = interpolate_mesh(f, mesh, "lagrange").to_off_data()
    assert v.shape == (mesh.n_vertices, 3) and np.array_equal(faces, mesh.triangles)
    np.testing.assert_allclose(v[:, 2], f(v[:, 0], v[:, 1]))
    v, faces = interpolate_mesh(f, mesh, "cr").to_off_data()
    assert v.shape == (3 * len(mesh), 3) and faces.shape == (len(mesh), 3)


def test_vector_interpolation():
    A = np.array([[1, 2], [0, 1], [3, -1]], dtype=float)
    F = affine_vector_field(A, (1, 2, 3))
    mesh = generate_uniform(4)
    for kind in ("lagrange", "cr"):
        comps = interpolate_mesh_vector(F, mesh, kind)
        for i, s in enumerate(comps):
            np.testing.assert_allclose(s.P, A[i, 0], atol=1e-13)
            np.testing.assert_allclose(s.Q, A[i, 1], atol=1e-13)


def test_non_finite_interpolant_reports_triangle():
    f = builtin("cylinder-slice", {"a": 1.1})
    mesh = generate_uniform(4, (-1.2, 1.2, -1, 1))  # leaves the field's domain
    with pytest.raises(InvalidParameter, match="triangle"):
        interpolate_mesh(f, mesh, "lagrange")


def test_kind_parse():
    assert Kind.parse("Lagrange") is Kind.LAGRANGE
    assert Kind.parse("crouzeix-raviart") is Kind.CR
    with pytest.raises(InvalidParameter):
        Kind.parse("p2")


def test_same_mesh_check():
    from surfarea.area import area_parametric_pl

    F = builtin("cylinder-param")
    a = interpolate_mesh_vector(F, generate_uniform(2, (0, 6, 0, 1)))
    b = interpolate_mesh_vector(F, generate_uniform(2, (0, 6, 0, 1)))
    with pytest.raises(MeshMismatch):
        area_parametric_pl((a[0], b[1], a[2]))
