import math

import mpmath
import numpy as np
import pytest
from conftest import random_generic_m
from hypothesis import given, settings
from hypothesis import strategies as st

from tt_toda import spectral as sp
from tt_toda.linear_ode import frobenius_at_infinity, normalized_system
from tt_toda.mellin import (
    MellinParams,
    MellinSectorError,
    ResidueConditionError,
    cross_validation_table,
    exact_B_inverse,
    exact_solution_matrix,
    g_quadrature,
    g_residue_series,
    g_shift,
    laplace_leading,
    make_params,
    ode_residual,
    residue_coefficient,
    scalar_ode_residual,
    shift_residual,
)

P2 = make_params([-1 / 6, 1 / 6])


def _rel(a, b):
    return abs(a - b) / abs(b)


def test_quadrature_matches_series_rank_two():
    assert _rel(g_quadrature(P2, 5.0), g_residue_series(P2, 5.0, K_terms=None)) <= 1e-8


def test_zero_parameters_rank_two():
    p = make_params([0.0, 0.0])
    assert _rel(g_quadrature(p, 8.0), g_residue_series(p, 8.0, K_terms=None)) <= 1e-9


def test_off_axis_argument():
    z = 3.0 * np.exp(1j * math.pi / 4)
    assert _rel(g_quadrature(P2, z), g_residue_series(P2, z, K_terms=None)) <= 1e-8


def test_contour_abscissa_independence():
    a = g_quadrature(make_params([-0.2, 0.0, 0.2], c=-0.3), 1.5)
    b = g_quadrature(make_params([-0.2, 0.0, 0.2], c=-1.1), 1.5)
    assert _rel(a, b) <= 1e-10


def test_laplace_band():
    for z, band in ((0.05, 0.15), (0.01, 0.03)):
        ratio = g_quadrature(P2, z) / laplace_leading(P2, z)
        assert abs(ratio - 1) <= band


def test_leading_residue_against_contour_integral():
    p = make_params([-0.3, 0.1, 0.2])
    B = p.B
    N1 = p.np1

    def F(t):
        out = mpmath.mpf(N1) ** (-N1 * t)
        for Bj in B:
            out *= mpmath.gamma(Bj - t)
        return out

    with mpmath.workdps(30):
        r = 0.05
        res = mpmath.quad(lambda th: F(B[0] + r * mpmath.expj(th)) * 1j * r * mpmath.expj(th), [0, 2 * mpmath.pi]) / (2j * mpmath.pi)
    # upward line, closed to the right (clockwise): coefficient is -2 pi i times the residue
    C0 = complex(-2j * mpmath.pi * res)
    assert abs(residue_coefficient(p, 0) - C0) <= 1e-12 * abs(C0)


def test_sector_and_residue_conditions():
    with pytest.raises(MellinSectorError):
        g_quadrature(P2, -1.0)
    with pytest.raises(ResidueConditionError):
        g_residue_series(make_params([0.0, -1.0]), 3.0)
    with pytest.raises(ValueError):
        make_params([0.0, 0.0], c=5.0)


def test_shift_is_a_rotation():
    p = make_params([-0.3, 0.1, 0.2], c=-0.5)
    q = p
    for _ in range(3):
        q = g_shift(q)
    np.testing.assert_array_equal(q.b, p.b)
    assert q.contour_abscissa == pytest.approx(p.contour_abscissa - 1.0)
    np.testing.assert_array_equal(g_shift(p).b, [0.1, 0.2, -0.3])


@pytest.mark.parametrize("z", [0.4, 1.0, 3.0])
def test_differential_identities(z):
    p = make_params([-0.25, 0.0, 0.25])
    assert shift_residual(p, z) <= 1e-7
    assert scalar_ode_residual(p, z) <= 1e-6


def test_exact_solution_matrix():
    m = np.array([0.2, -0.2])
    X = exact_solution_matrix(m, 3.0)
    assert np.isfinite(np.linalg.cond(X))
    assert ode_residual(m, 1.3) <= 1e-7
    assert ode_residual(np.array([0.3, 0.1, -0.1, -0.3]), 0.9) <= 1e-7


@pytest.mark.parametrize("N", [2, 3, 4])
def test_b_inverse_factorization(N, rng):
    m = random_generic_m(rng, N, margin=0.1, scale=0.4)
    Binv = exact_B_inverse(m)
    conn = sp.build_D1(sp.asymptotic_from_m(m))
    np.testing.assert_allclose(Binv, conn.Gamma_m @ conn.V_m, atol=1e-7 * np.max(np.abs(Binv)))
    # X = X_inf B^{-1}, X_inf from the Frobenius series of the linear equation
    z = 3.0
    X_inf = frobenius_at_infinity(normalized_system(m), K=80).evaluate(z)
    np.testing.assert_allclose(exact_solution_matrix(m, z), X_inf @ Binv, atol=1e-7 * np.max(np.abs(Binv)))


def test_first_row_of_b_inverse():
    m = np.array([0.15, 0.0, -0.15])
    C0 = residue_coefficient(MellinParams(-m), 0)
    om = np.exp(2j * math.pi / 3)
    row = exact_B_inverse(m)[0]
    # column exponents d - c + 1/2 for n+1 = 3
    np.testing.assert_allclose(row, C0 * om ** (np.array([1.5, 0.5, -0.5]) * m[0]), rtol=1e-12)


def test_cross_validation_table():
    rows = cross_validation_table(np.array([1 / 6, -1 / 6]), [0.05, 0.5, 2.0, 3j + 1])
    assert [r["in_overlap"] for r in rows] == [False, True, True, True]
    for r in rows:
        if r["in_overlap"]:
            assert r["rel_difference"] <= 1e-8
        assert r["scalar_ode_residual"] <= 1e-6


@settings(max_examples=15, deadline=None)
@given(st.floats(0.5, 6.0), st.floats(-1.2, 1.2), st.floats(-0.45, 0.45))
def test_two_routes_agree_in_overlap(r, phi, m0):
    p = MellinParams(np.array([-m0, m0]))
    z = r * np.exp(1j * phi)
    assert _rel(g_quadrature(p, z, tol=1e-12), g_residue_series(p, z, K_terms=None)) <= 1e-8
