"""Convergence studies, log-log rate fits, lantern formulas and the constant A_2."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .area import exact_area_terms, graph_area_terms, seminorm_terms
from .errors import InsufficientData, InvalidParameter, NonpositiveError
from .fields import ScalarField
from .interp import Kind, interpolate_mesh
from .mesh import DEFAULT_DOMAIN, aniso_layout, generate_aniso, generate_uniform
from .quadrature import DEFAULT_EDGE_ORDER, DEFAULT_TRIANGLE_DEGREE, gauss_legendre, triangle_rule

__all__ = [
    "ConvergenceRecord",
    "RateFit",
    "lantern_area_closed_form",
    "lantern_limit",
    "babuska_aziz_a2",
    "reference_area",
    "aniso_study_mesh",
    "study_point",
    "run_convergence",
    "fit_rate",
    "fit_loglog",
    "collapse_ratios",
    "write_csv",
    "format_csv",
    "write_gnuplot",
    "CSV_COLUMNS",
]

log = logging.getLogger(__name__)

CSV_COLUMNS = (
    "N",
    "alpha",
    "h",
    "max_circumradius",
    "max_angle_deg",
    "area_exact",
    "area_lagrange",
    "area_cr",
    "err_lagrange",
    "err_cr",
)
_LAGRANGE_COLUMNS = ("area_lagrange", "err_lagrange")
_CR_COLUMNS = ("area_cr", "err_cr")


# -- Schwarz lantern ---------------------------------------------------------


def lantern_area_closed_form(m: int, n: int, r: float, H: float) -> float:
    """Total area of the ``2 m n`` lantern triangles.

    Each triangle has base ``2 r sin(pi/n)`` and height
    ``sqrt((H/m)^2 + r^2 (1 - cos(pi/n))^2)``.
    """
    if int(m) != m or m < 1 or int(n) != n or n < 2 or not (r > 0 and H > 0):
        raise InvalidParameter(f"need m >= 1, n >= 2, r > 0, H > 0; got m={m}, n={n}, r={r}, H={H}")
    s = math.pi / n
    # 1 - cos(s) = 2 sin^2(s/2) avoids cancellation for large n
    sag = 2.0 * math.sin(s / 2) ** 2
    return 2.0 * m * n * r * math.sin(s) * math.hypot(H / m, r * sag)


def lantern_limit(r: float, H: float, ratio: float) -> float:
    """Limit of the lantern area when ``m / n**2 -> ratio``."""
    return 2.0 * math.pi * r * math.sqrt(H * H + (math.pi**4 * r * r / 4.0) * ratio * ratio)


# -- Babuska-Aziz constant ---------------------------------------------------


def babuska_aziz_a2() -> float:
    """Largest positive root of ``1/x + tan(1/x) = 0``.

    With ``y = 1/x`` the largest ``x`` is the smallest positive root of
    ``y + tan(y)``, which lies in ``(pi/2, pi)`` where the function increases
    from minus infinity to ``pi``. Bisection is run in ``y`` to stay clear of
    the pole of the tangent.
    """
    lo = math.nextafter(math.pi / 2, math.inf)
    hi = math.pi
    while True:
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        if mid + math.tan(mid) < 0:
            lo = mid
        else:
            hi = mid
    y = lo if abs(lo + math.tan(lo)) <= abs(hi + math.tan(hi)) else hi
    return 1.0 / y


# -- convergence studies -------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRecord:
    N: int
    alpha: float
    h: float
    max_circumradius: float
    max_angle: float
    area_exact: float
    area_lagrange: float = math.nan
    area_cr: float = math.nan
    err_lagrange: float = math.nan
    err_cr: float = math.nan
    seminorm_lagrange: float = math.nan
    seminorm_cr: float = math.nan

    @property
    def max_angle_deg(self) -> float:
        return math.degrees(self.max_angle)

    def row(self) -> dict:
        d = asdict(self)
        d["max_angle_deg"] = self.max_angle_deg
        return d


@dataclass(frozen=True)
class RateFit:
    slope: float
    intercept: float
    r_squared: float


def reference_area(field: ScalarField, domain=DEFAULT_DOMAIN, quad_degree: int = DEFAULT_TRIANGLE_DEGREE,
                   refine: int = 3, validate: bool = True, rtol: float = 1e-10) -> float:
    """Graph area of ``field`` over the rectangle ``domain``.

    ``cylinder-slice`` on a rectangle symmetric in ``x`` has the closed form
    ``2 a (d - c) arcsin(b / a)``; it is checked against quadrature when
    ``validate`` is set. Other fields use quadrature on a uniform mesh.
    """
    a0, b0, c0, d0 = domain
    if field.name == "cylinder-slice" and a0 == -b0:
        a = field.params["a"]
        value = 2.0 * a * (d0 - c0) * math.asin(b0 / a)
        if validate:
            check = math.fsum(exact_area_terms(field, generate_uniform(64, domain), triangle_rule(12, 1)))
            if abs(check - value) > rtol * value:
                raise RuntimeError(f"closed-form area {value!r} disagrees with quadrature {check!r}")
        return value
    mesh = generate_uniform(32, domain)
    return math.fsum(exact_area_terms(field, mesh, triangle_rule(quad_degree, refine)))


def aniso_study_mesh(field: ScalarField, N: int, alpha: float, domain=DEFAULT_DOMAIN):
    """Mesh and per-triangle multiplicities for a study point.

    For fields that do not depend on ``y`` every strip of the same parity
    contributes the same amount, so only the lowest two strips are built and
    their triangles are weighted by the number of strips they stand for.
    Returns ``(mesh, weights)``; ``weights`` is ``None`` for the full mesh.
    """
    h, M, k = aniso_layout(N, alpha, domain)
    if not field.y_invariant or M <= 2:
        return generate_aniso(N, alpha, domain), None
    cell = generate_aniso(N, alpha, domain, strips=2)
    per_strip = 2 * int(N) + 1
    weights = np.repeat([float((M + 1) // 2), float(M // 2)], per_strip)
    return cell, weights


def _total(terms, weights):
    return math.fsum(terms if weights is None else terms * weights)


def study_point(field: ScalarField, N: int, alpha: float, reference: float, kinds=(Kind.LAGRANGE, Kind.CR),
                domain=DEFAULT_DOMAIN, edge_order: int = DEFAULT_EDGE_ORDER, seminorms: bool = False,
                seminorm_rule=None) -> ConvergenceRecord:
    """One row of a convergence study on ``generate_aniso(N, alpha)``."""
    mesh, weights = aniso_study_mesh(field, N, alpha, domain)
    rule = gauss_legendre(edge_order)
    values = {}
    for kind in (Kind.parse(k) for k in kinds):
        s = interpolate_mesh(field, mesh, kind, rule)
        area = _total(graph_area_terms(s), weights)
        tag = "lagrange" if kind is Kind.LAGRANGE else "cr"
        values[f"area_{tag}"] = area
        values[f"err_{tag}"] = abs(area - reference)
        if seminorms:
            values[f"seminorm_{tag}"] = _total(seminorm_terms(field, s, seminorm_rule), weights)
    return ConvergenceRecord(
        N=int(N),
        alpha=float(alpha),
        h=mesh.fineness,
        max_circumradius=mesh.max_circumradius,
        max_angle=mesh.max_angle,
        area_exact=reference,
        **values,
    )


def run_convergence(field: ScalarField, alphas, Ns, kinds=(Kind.LAGRANGE, Kind.CR), domain=DEFAULT_DOMAIN,
                    edge_order: int = DEFAULT_EDGE_ORDER, quad_degree: int = DEFAULT_TRIANGLE_DEGREE,
                    refine: int = 3, threads: int = 1, seminorms: bool = False, reference: float | None = None):
    """Compute one :class:`ConvergenceRecord` per ``(alpha, N)``, ordered by alpha then N."""
    Ns = [int(n) for n in Ns]
    alphas = [float(a) for a in alphas]
    if not Ns or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise InvalidParameter(f"Ns must be strictly increasing, got {Ns}")
    if not alphas or any(not a >= 1.0 for a in alphas):
        raise InvalidParameter(f"alphas must all be >= 1, got {alphas}")
    if threads < 1:
        raise InvalidParameter(f"threads must be >= 1, got {threads}")
    if reference is None:
        reference = reference_area(field, domain, quad_degree, refine)
    tasks = [(a, n) for a in alphas for n in Ns]

    def work(task):
        alpha, N = task
        log.debug("study point alpha=%g N=%d", alpha, N)
        return study_point(field, N, alpha, reference, kinds, domain, edge_order, seminorms)

    if threads == 1:
        return [work(t) for t in tasks]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(work, tasks))


def fit_loglog(h, err) -> RateFit:
    """Least-squares line through ``(log h, log err)``."""
    h = np.asarray(h, dtype=float)
    err = np.asarray(err, dtype=float)
    if len(h) < 4 or len(h) != len(err):
        raise InsufficientData(f"need at least 4 (h, err) pairs, got {len(h)}")
    if np.any(~(err > 0)) or np.any(~(h > 0)):
        raise NonpositiveError("log-log fit needs strictly positive h and errors")
    x, y = np.log(h), np.log(err)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return RateFit(float(slope), float(intercept), min(1.0, max(0.0, r2)))


def fit_rate(records, column: str = "err_cr") -> RateFit:
    """Slope of ``log(column)`` against ``log(h)`` over ``records``."""
    records = list(records)
    return fit_loglog([r.h for r in records], [getattr(r, column) for r in records])


def collapse_ratios(records, column: str = "err_cr") -> dict:
    """For each N, the max/min ratio of ``column`` across alpha."""
    by_n = {}
    for r in records:
        by_n.setdefault(r.N, []).append(getattr(r, column))
    return {n: max(v) / min(v) for n, v in sorted(by_n.items())}


# -- output --------------------------------------------------------------------


def _columns(kinds):
    kinds = {Kind.parse(k) for k in kinds}
    drop = set()
    if Kind.LAGRANGE not in kinds:
        drop.update(_LAGRANGE_COLUMNS)
    if Kind.CR not in kinds:
        drop.update(_CR_COLUMNS)
    return [c for c in CSV_COLUMNS if c not in drop]


def _fmt(v):
    if isinstance(v, int):
        return str(v)
    return repr(float(v))


def format_csv(records, kinds=(Kind.LAGRANGE, Kind.CR)) -> str:
    cols = _columns(kinds)
    lines = [",".join(cols)]
    for r in records:
        row = r.row()
        lines.append(",".join(_fmt(row[c]) for c in cols))
    return "\n".join(lines) + "\n"


def write_csv(records, path, kinds=(Kind.LAGRANGE, Kind.CR)) -> Path:
    path = Path(path)
    path.write_text(format_csv(records, kinds))
    return path


def write_gnuplot(csv_path, alphas, path=None, kinds=(Kind.LAGRANGE, Kind.CR)) -> Path:
    """Write a gnuplot script drawing log-log error curves, one per alpha."""
    csv_path = Path(csv_path)
    path = Path(path) if path is not None else csv_path.with_suffix(".gp")
    cols = _columns(kinds)
    panels = []
    for tag, title in (("err_lagrange", "Lagrange"), ("err_cr", "Crouzeix-Raviart")):
        if tag not in cols:
            continue
        ycol = cols.index(tag) + 1
        hcol = cols.index("h") + 1
        acol = cols.index("alpha") + 1
        curves = ", \\\n     ".join(
            f"'{csv_path.name}' using (abs(${acol}-{a!r})<1e-12 ? ${hcol} : 1/0):{ycol} "
            f"with linespoints title 'alpha={a:g}'"
            for a in alphas
        )
        panels.append(f"set title '{title}'\nplot {curves}\n")
    layout = len(panels)
    script = (
        "set datafile separator ','\n"
        "set key autotitle columnhead\n"
        "set logscale xy\n"
        "set xlabel 'max triangle diameter'\n"
        "set ylabel 'area error'\n"
        "set format y '10^{%L}'\n"
        f"set multiplot layout {layout},1\n"
        + "".join(panels)
        + "unset multiplot\n"
    )
    path.write_text(script)
    return path
