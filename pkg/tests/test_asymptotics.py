import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import k0e

from tt_toda import spectral as sp
from tt_toda.asymptotics import (
    FitWindowError,
    bessel_laplace_check,
    connection_problem_report,
    fit_origin,
    fit_solution,
    fit_stokes_far_field,
    hatw_matrix_residual,
    hatw_transform,
    sine_matrix,
)
from tt_toda.toda_solver import assemble_tt_toda, solve_bvp


def _solve(N, m, **kw):
    return solve_bvp(assemble_tt_toda(N, np.asarray(m, dtype=float), **kw))


def test_zero_m_fits():
    sol = _solve(4, np.zeros(4))
    g, c, _ = fit_origin(sol)
    np.testing.assert_allclose(c, 0, atol=1e-3)
    np.testing.assert_allclose(g, 0, atol=1e-3)
    s_fit, info = fit_stokes_far_field(sol, 4)
    np.testing.assert_allclose(s_fit, 0, atol=1e-6)
    assert info["windows"][1] is None
    rep = connection_problem_report(np.zeros(4))
    assert rep["pass"]


def test_rank_two_one_sixth():
    m = np.array([1 / 6, -1 / 6])
    fit = fit_solution(_solve(2, m), 2)
    # reduced unknown u = 2 w, fitted against log(2|t|)
    assert fit.gamma_fit[0] == pytest.approx(-1 / 6, abs=1e-3)
    assert fit.const_fit[0] == pytest.approx(-math.log(sp.chat_id(m)[0]), abs=1e-2)
    assert fit.s_fit[0] == pytest.approx(-1.0, rel=0.02)
    assert fit.stderr["s"][1] < 1e-3


def test_rank_three():
    fit = fit_solution(_solve(3, [0.2, 0.0, -0.2]), 3)
    assert fit.s_fit[0] == pytest.approx(1 + 2 * math.cos(2 * math.pi * 1.2 / 3), rel=0.02)


def test_rank_four_both_modes():
    m = np.array([0.3, 0.1, -0.1, -0.3])
    fit = fit_solution(_solve(4, m), 4)
    np.testing.assert_allclose(fit.s_fit, sp.stokes_params(m).essential, rtol=0.03)
    np.testing.assert_allclose(fit.gamma_fit, -m[:2], atol=1e-3)
    np.testing.assert_allclose(fit.const_fit, -np.log(sp.chat_id(m)[:2]), atol=1e-2)
    assert fit.rank_info["matrix_rank"] == 2


@pytest.mark.parametrize("N,m", [(2, [1 / 6, -1 / 6]), (3, [0.2, 0.0, -0.2]), (4, [0.3, 0.1, -0.1, -0.3])])
def test_leading_mode_window_shift(N, m):
    sol = _solve(N, m)
    s0, info = fit_stokes_far_field(sol, N)
    a, b = info["windows"][1]
    for shift in (-0.2, 0.2):
        d = shift * (b - a)
        s1, _ = fit_stokes_far_field(sol, N, x_window={1: (a + d, b + d)})
        assert abs(s1[0] / s0[0] - 1) <= 5e-3


def test_subleading_term_improves_fit():
    sol = _solve(2, [0.25, -0.25])
    _, with_sub = fit_stokes_far_field(sol, 2)
    _, without = fit_stokes_far_field(sol, 2, subleading=False)
    assert with_sub["residual"][1] < without["residual"][1]


def test_short_domain_is_reported():
    sol = _solve(2, [0.25, -0.25], s_max=math.log(3.0), nodes=1000)
    with pytest.raises(FitWindowError, match="extend"):
        fit_stokes_far_field(sol, 2)
    with pytest.raises(FitWindowError):
        fit_origin(sol, window=(sol.grid[0], sol.grid[0] + 1e-3))


def test_hatw_trivial_and_rank_two():
    np.testing.assert_allclose(hatw_transform(np.zeros(5), 5), 0)
    w0 = 0.37
    hw = hatw_transform([w0], 2)
    # (4i/2) w_0 sin(pi/2)
    assert hw[1] == pytest.approx(2j * w0)
    np.testing.assert_allclose(hw, hatw_transform([w0, -w0], 2, route="matrix"), atol=1e-15)


@given(st.integers(2, 9), st.lists(st.floats(-2, 2), min_size=4, max_size=4))
def test_hatw_routes_and_matrix_identity(N, vals):
    w = vals[: N // 2]
    np.testing.assert_allclose(hatw_transform(w, N), hatw_transform(w, N, route="matrix"), atol=1e-12)
    assert hatw_matrix_residual(w, N) <= 1e-12


@pytest.mark.parametrize("N", range(2, 10))
def test_sine_matrix_full_rank(N):
    S = sine_matrix(N)
    assert np.linalg.matrix_rank(S) == N // 2


def test_bessel_laplace_check():
    rows = bessel_laplace_check([5, 10, 50, 100])
    assert all(r["pass"] for r in rows)
    by_x = {r["x"]: r for r in rows}
    assert by_x[10.0]["rel_error"] <= 0.15
    assert by_x[100.0]["rel_error"] <= 0.015
    for r in rows:
        assert r["quadrature"] > 0
        assert r["scaled_quadrature"] == pytest.approx(k0e(2 * r["x"]) / math.pi, rel=1e-12)
    with pytest.raises(ValueError):
        bessel_laplace_check([0.5])


@settings(max_examples=20)
@given(st.floats(1.0, 500.0))
def test_bessel_error_within_bound(x):
    (row,) = bessel_laplace_check([x])
    assert row["pass"]


def test_report_structure():
    rep = connection_problem_report(np.array([0.25, -0.25]))
    assert rep["pass"] and rep["converged"]
    assert rep["stokes"][0]["error"] <= 0.02
    assert rep["origin_constants"][0]["error"] <= 1e-2
    assert set(rep["tolerances"]) == {"s_rel", "const_abs"}
