"""Analytic test functions with exact derivatives.

Scalar fields map ``(x, y)`` arrays to values and gradients; vector fields map
them to points of R^3 and 3x2 Jacobians. All callables broadcast over numpy
arrays of any matching shape.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import InvalidParameter, UnknownField

__all__ = [
    "Smoothness",
    "ScalarField",
    "VectorField3",
    "builtin",
    "parse_field_spec",
    "graph_embedding",
    "affine_vector_field",
    "BUILTIN_FIELDS",
]

DEFAULT_DOMAIN = (-1.0, 1.0, -1.0, 1.0)


class Smoothness(enum.Enum):
    W1INF = "W1inf"
    W2INF = "W2inf"
    ANALYTIC = "analytic"


@dataclass(frozen=True)
class ScalarField:
    """A function ``f(x, y)`` together with its gradient ``(f_x, f_y)``.

    ``y_invariant`` marks fields that do not depend on ``y``; studies on
    strip meshes use it to evaluate one strip period instead of the full mesh.
    """

    name: str
    func: Callable
    gradient: Callable
    smoothness: Smoothness = Smoothness.ANALYTIC
    valid_domain: tuple = DEFAULT_DOMAIN
    params: dict = field(default_factory=dict)
    y_invariant: bool = False

    def __call__(self, x, y):
        return self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def eval(self, x, y):
        return self(x, y)

    def grad(self, x, y):
        """Return ``(f_x, f_y)`` as a pair of arrays."""
        gx, gy = self.gradient(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        shape = np.broadcast(np.asarray(x), np.asarray(y)).shape
        return np.broadcast_to(gx, shape), np.broadcast_to(gy, shape)


@dataclass(frozen=True)
class VectorField3:
    """A map ``(x, y) -> R^3`` with its Jacobian of shape ``(..., 3, 2)``."""

    name: str
    func: Callable
    jac: Callable
    valid_domain: tuple = DEFAULT_DOMAIN
    params: dict = field(default_factory=dict)

    def __call__(self, x, y):
        return self.func(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def eval(self, x, y):
        return self(x, y)

    def jacobian(self, x, y):
        return self.jac(np.asarray(x, dtype=float), np.asarray(y, dtype=float))

    def component(self, i: int) -> ScalarField:
        """The ``i``-th coordinate function as a :class:`ScalarField`."""
        return ScalarField(
            name=f"{self.name}[{i}]",
            func=lambda x, y: self.func(x, y)[..., i],
            gradient=lambda x, y: (self.jac(x, y)[..., i, 0], self.jac(x, y)[..., i, 1]),
            valid_domain=self.valid_domain,
        )


def _cylinder_slice(a=1.1, domain=DEFAULT_DOMAIN):
    a = float(a)
    xmax = max(abs(domain[0]), abs(domain[1]))
    if not a > xmax:
        raise InvalidParameter(
            f"cylinder-slice needs a > max|x| = {xmax:g} on the domain to be Lipschitz, got a={a:g}"
        )

    def f(x, y):
        return np.sqrt(a * a - x * x) + 0.0 * y

    def g(x, y):
        return -x / np.sqrt(a * a - x * x), np.zeros(np.broadcast(x, y).shape)

    return ScalarField("cylinder-slice", f, g, Smoothness.ANALYTIC, tuple(domain), {"a": a}, y_invariant=True)


def _affine(P=0.0, Q=0.0, R=0.0, domain=DEFAULT_DOMAIN):
    P, Q, R = float(P), float(Q), float(R)

    def f(x, y):
        return P * x + Q * y + R

    def g(x, y):
        shape = np.broadcast(x, y).shape
        return np.full(shape, P), np.full(shape, Q)

    return ScalarField("affine", f, g, Smoothness.ANALYTIC, tuple(domain), {"P": P, "Q": Q, "R": R}, y_invariant=Q == 0.0)


def _quadratic(xx=1.0, xy=0.0, yy=1.0, x=0.0, y=0.0, c=0.0, domain=DEFAULT_DOMAIN):
    cxx, cxy, cyy, cx, cy, c0 = (float(v) for v in (xx, xy, yy, x, y, c))

    def f(X, Y):
        return cxx * X * X + cxy * X * Y + cyy * Y * Y + cx * X + cy * Y + c0

    def g(X, Y):
        return 2 * cxx * X + cxy * Y + cx, cxy * X + 2 * cyy * Y + cy

    params = {"xx": cxx, "xy": cxy, "yy": cyy, "x": cx, "y": cy, "c": c0}
    return ScalarField("quadratic", f, g, Smoothness.ANALYTIC, tuple(domain), params,
                       y_invariant=cxy == 0.0 and cyy == 0.0 and cy == 0.0)


def _gauss_bump(sigma=0.5, x0=0.0, y0=0.0, amp=1.0, domain=DEFAULT_DOMAIN):
    sigma, x0, y0, amp = float(sigma), float(x0), float(y0), float(amp)
    if not sigma > 0:
        raise InvalidParameter(f"gauss-bump needs sigma > 0, got {sigma:g}")
    s2 = sigma * sigma

    def f(x, y):
        return amp * np.exp(-((x - x0) ** 2 + (y - y0) ** 2) / (2 * s2))

    def g(x, y):
        v = f(x, y)
        return -(x - x0) / s2 * v, -(y - y0) / s2 * v

    return ScalarField("gauss-bump", f, g, Smoothness.ANALYTIC, tuple(domain),
                       {"sigma": sigma, "x0": x0, "y0": y0, "amp": amp})


def _cylinder_param(r=1.0, H=1.0, domain=None):
    r, H = float(r), float(H)
    if not (r > 0 and H > 0):
        raise InvalidParameter(f"cylinder-param needs r > 0 and H > 0, got r={r:g}, H={H:g}")
    if domain is None:
        domain = (0.0, 2 * math.pi * r, 0.0, H)

    def f(u, v):
        u, v = np.broadcast_arrays(u, v)
        return np.stack([r * np.cos(u / r), r * np.sin(u / r), v.astype(float)], axis=-1)

    def jac(u, v):
        u, v = np.broadcast_arrays(u, v)
        J = np.zeros(u.shape + (3, 2))
        J[..., 0, 0] = -np.sin(u / r)
        J[..., 1, 0] = np.cos(u / r)
        J[..., 2, 1] = 1.0
        return J

    return VectorField3("cylinder-param", f, jac, tuple(domain), {"r": r, "H": H})


BUILTIN_FIELDS = {
    "cylinder-slice": _cylinder_slice,
    "affine": _affine,
    "quadratic": _quadratic,
    "gauss-bump": _gauss_bump,
    "cylinder-param": _cylinder_param,
}


def builtin(name: str, params: dict | None = None, domain=None):
    """Instantiate a registered field by name.

    Parameters
    ----------
    name : str
        One of ``cylinder-slice`` (``a``), ``affine`` (``P, Q, R``),
        ``quadratic`` (``xx, xy, yy, x, y, c``), ``gauss-bump``
        (``sigma, x0, y0, amp``) or ``cylinder-param`` (``r, H``).
    params : dict, optional
        Keyword parameters; missing ones take their defaults.
    domain : tuple, optional
        Rectangle the field will be used on; validated where it matters.
    """
    try:
        factory = BUILTIN_FIELDS[name]
    except KeyError:
        raise UnknownField(f"unknown field {name!r}; choose from {', '.join(BUILTIN_FIELDS)}") from None
    kwargs = dict(params or {})
    if domain is not None:
        kwargs["domain"] = tuple(domain)
    try:
        return factory(**kwargs)
    except TypeError as exc:
        raise InvalidParameter(f"bad parameters for {name!r}: {exc}") from None


def parse_field_spec(spec: str, domain=None):
    """Build a field from a string such as ``"cylinder-slice:a=1.1"``."""
    name, _, rest = spec.strip().partition(":")
    params = {}
    for item in filter(None, (s.strip() for s in rest.split(","))):
        key, eq, value = item.partition("=")
        if not eq:
            raise InvalidParameter(f"field parameter {item!r} is not of the form key=value")
        try:
            params[key.strip()] = float(value)
        except ValueError:
            raise InvalidParameter(f"field parameter {key!r} must be numeric, got {value!r}") from None
    return builtin(name.strip(), params, domain)


def graph_embedding(f: ScalarField) -> VectorField3:
    """The parametrisation ``(x, y) -> (x, y, f(x, y))`` of the graph of ``f``."""

    def func(x, y):
        x, y = np.broadcast_arrays(x, y)
        return np.stack([x.astype(float), y.astype(float), f(x, y)], axis=-1)

    def jac(x, y):
        x, y = np.broadcast_arrays(x, y)
        gx, gy = f.grad(x, y)
        J = np.zeros(x.shape + (3, 2))
        J[..., 0, 0] = 1.0
        J[..., 1, 1] = 1.0
        J[..., 2, 0] = gx
        J[..., 2, 1] = gy
        return J

    return VectorField3(f"graph({f.name})", func, jac, f.valid_domain, dict(f.params))


def affine_vector_field(matrix, offset=(0.0, 0.0, 0.0), domain=DEFAULT_DOMAIN) -> VectorField3:
    """``(x, y) -> matrix @ (x, y) + offset`` with a constant 3x2 ``matrix``."""
    A = np.asarray(matrix, dtype=float).reshape(3, 2)
    b = np.asarray(offset, dtype=float).reshape(3)

    def func(x, y):
        x, y = np.broadcast_arrays(x, y)
        return x[..., None] * A[:, 0] + y[..., None] * A[:, 1] + b

    def jac(x, y):
        shape = np.broadcast(x, y).shape
        return np.broadcast_to(A, shape + (3, 2)).copy()

    return VectorField3("affine-vector", func, jac, tuple(domain), {})
