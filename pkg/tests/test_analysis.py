import dataclasses
import math

import numpy as np
import pytest

from surfarea import analysis
from surfarea.analysis import (
    CSV_COLUMNS,
    babuska_aziz_a2,
    collapse_ratios,
    fit_loglog,
    fit_rate,
    format_csv,
    lantern_area_closed_form,
    lantern_limit,
    reference_area,
    run_convergence,
    study_point,
    write_csv,
    write_gnuplot,
)
from surfarea.area import area_exact
from surfarea.errors import InsufficientData, InvalidParameter, NonpositiveError
from surfarea.fields import builtin
from surfarea.interp import Kind
from surfarea.mesh import generate_uniform
from surfarea.quadrature import triangle_rule

CYL = builtin("cylinder-slice", {"a": 1.1})


def sinc_form(m, n, r, H):
    """The lantern area rewritten with sin(x)/x factors."""
    s, s2 = math.pi / n, math.pi / (2 * n)
    return 2 * math.pi * r * math.sin(s) / s * math.sqrt(
        H**2 + math.pi**4 * r**2 / 4 * (m / n**2) ** 2 * (math.sin(s2) / s2) ** 4
    )


@pytest.mark.parametrize("m,n,r,H", [(1, 2, 1, 1), (4, 4, 1, 1), (9, 7, 0.5, 2), (100, 3, 2, 0.5), (256, 256, 1, 1)])
def test_lantern_closed_form_matches_sinc_form(m, n, r, H):
    assert lantern_area_closed_form(m, n, r, H) == pytest.approx(sinc_form(m, n, r, H), rel=1e-13)


def test_lantern_limits():
    assert lantern_limit(1.5, 2.0, 0.0) == pytest.approx(2 * math.pi * 1.5 * 2.0)
    # m = n: relative gap (pi^4/8 - pi^2/6) / n^2 + O(n^-4); about 1.6e-4 at n = 256
    for n in (256, 1024, 4096):
        gap = lantern_area_closed_form(n, n, 1, 1) / (2 * math.pi) - 1
        assert gap == pytest.approx((math.pi**4 / 8 - math.pi**2 / 6) / n**2, rel=1e-3)
    assert abs(lantern_area_closed_form(256, 256, 1, 1) - 2 * math.pi) / (2 * math.pi) < 1e-3
    # m = n^3: the area grows without bound
    areas = [lantern_area_closed_form(n**3, n, 1, 1) for n in (4, 8, 16, 32)]
    assert all(b > 1.9 * a for a, b in zip(areas, areas[1:]))


@pytest.mark.parametrize("bad", [(0, 4, 1, 1), (4, 1, 1, 1), (4, 4, -1, 1), (4, 4, 1, 0)])
def test_lantern_invalid(bad):
    with pytest.raises(InvalidParameter):
        lantern_area_closed_form(*bad)


def test_a2_value_and_residual():
    a2 = babuska_aziz_a2()
    assert a2 == pytest.approx(0.49291, abs=1e-5)
    assert abs(1 / a2 + math.tan(1 / a2)) < 1e-12


def test_a2_is_largest_root_by_scan():
    """Independent oracle: sign changes of 1/x + tan(1/x) away from the poles."""
    x = np.linspace(0.05, 10, 400_001)
    g = 1 / x + np.tan(1 / x)
    change = np.flatnonzero(np.sign(g[:-1]) != np.sign(g[1:]))
    # a pole flips the sign through infinity; a root through a small value
    roots = [0.5 * (x[i] + x[i + 1]) for i in change if min(abs(g[i]), abs(g[i + 1])) < 1e-2]
    assert max(roots) == pytest.approx(babuska_aziz_a2(), abs=1e-4)


def test_a2_against_mpmath():
    mp = pytest.importorskip("mpmath")
    y = mp.findroot(lambda y: y + mp.tan(y), 2.0)
    assert babuska_aziz_a2() == pytest.approx(float(1 / y), rel=1e-14)


def test_fit_exact_slopes():
    h = np.array([0.5, 0.25, 0.125, 0.0625])
    assert fit_loglog(h, h).slope == pytest.approx(1.0, abs=1e-12)
    fit = fit_loglog(h, 3 * h**2)
    assert fit.slope == pytest.approx(2.0, abs=1e-12)
    assert fit.intercept == pytest.approx(math.log(3))
    assert fit.r_squared == pytest.approx(1.0)


def test_fit_errors():
    with pytest.raises(InsufficientData):
        fit_loglog([1, 2, 3], [1, 2, 3])
    with pytest.raises(NonpositiveError):
        fit_loglog([1, 2, 3, 4], [1, 0, 3, 4])


def test_cr_rate_on_alpha_one():
    records = run_convergence(CYL, [1.0], [8, 16, 32, 64, 128], kinds=("cr",))
    assert 1.6 <= fit_rate(records, "err_cr").slope <= 2.2
    assert all(math.isnan(r.err_lagrange) for r in records)


def test_reference_area():
    assert reference_area(CYL) == pytest.approx(4 * 1.1 * math.asin(1 / 1.1), rel=1e-15)
    bump = builtin("gauss-bump", {"sigma": 0.4})
    fine = area_exact(bump, generate_uniform(64), triangle_rule(10, 1)).value
    assert reference_area(bump) == pytest.approx(fine, rel=1e-11)


@pytest.mark.parametrize("N,alpha", [(8, 1.0), (16, 1.6), (32, 2.0), (12, 2.4)])
def test_strip_reduction_matches_full_mesh(N, alpha):
    full_field = dataclasses.replace(CYL, y_invariant=False)
    ref = reference_area(CYL)
    reduced = study_point(CYL, N, alpha, ref, seminorms=True)
    full = study_point(full_field, N, alpha, ref, seminorms=True)
    for col in ("area_lagrange", "area_cr", "seminorm_lagrange", "seminorm_cr", "h", "max_circumradius", "max_angle"):
        assert getattr(reduced, col) == pytest.approx(getattr(full, col), rel=1e-13), col


def test_threads_do_not_change_results():
    args = (CYL, [1.2, 2.4], [16, 32, 64])
    assert run_convergence(*args, threads=1) == run_convergence(*args, threads=4)


def test_record_order_and_collapse():
    records = run_convergence(CYL, [2.0, 1.2], [16, 32])
    assert [(r.alpha, r.N) for r in records] == [(2.0, 16), (2.0, 32), (1.2, 16), (1.2, 32)]
    ratios = collapse_ratios(records, "err_cr")
    assert set(ratios) == {16, 32} and all(v >= 1.0 for v in ratios.values())


@pytest.mark.parametrize("kw", [dict(Ns=[32, 16]), dict(Ns=[]), dict(alphas=[0.5]), dict(threads=0)])
def test_run_convergence_invalid(kw):
    args = dict(field=CYL, alphas=[1.2], Ns=[16, 32])
    args.update(kw)
    with pytest.raises(InvalidParameter):
        run_convergence(**args)


def test_csv_and_gnuplot(tmp_path):
    records = run_convergence(CYL, [1.2, 2.4], [16, 32])
    text = format_csv(records)
    lines = text.splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert len(lines) == 5
    row = dict(zip(CSV_COLUMNS, lines[1].split(",")))
    assert float(row["err_cr"]) == records[0].err_cr  # repr round-trips exactly
    assert float(row["max_angle_deg"]) == pytest.approx(math.degrees(records[0].max_angle))

    cr_only = format_csv(records, kinds=(Kind.CR,)).splitlines()[0].split(",")
    assert "err_lagrange" not in cr_only and "err_cr" in cr_only

    csv = write_csv(records, tmp_path / "study.csv")
    gp = write_gnuplot(csv, [1.2, 2.4])
    script = gp.read_text()
    assert gp.suffix == ".gp"
    assert "set logscale xy" in script and "multiplot" in script
    assert script.count("alpha=1.2") == 2 and script.count("alpha=2.4") == 2


def test_module_exports():
    for name in analysis.__all__:
        assert hasattr(analysis, name)


def test_cr_beats_lagrange_on_flat_triangles():
    rec = study_point(CYL, 128, 2.4, reference_area(CYL))
    assert rec.err_cr * 10 <= rec.err_lagrange
