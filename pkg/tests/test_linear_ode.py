import math
from fractions import Fraction

import numpy as np
import pytest
from conftest import random_generic_m

from tt_toda import mellin as me
from tt_toda import spectral as sp
from tt_toda.algebra import Rank, d_power, structure
from tt_toda.linear_ode import (
    canonical_at_zero,
    frobenius_at_infinity,
    loop_monodromy,
    main_system,
    normalized_system,
    numeric_connection_inverse,
    numeric_D1,
    numeric_monodromy,
    numeric_stokes,
    propagate,
    rhs,
    subsidiary_system,
    verify_against_closed_form,
)


def _tilde(Q, N):
    r = Rank(N)
    T = np.diag(d_power(r, 0.5) if r.is_even else d_power(r, -r.d))
    return Q * T[None, :] / T[:, None]


def test_rhs_trivial_cases():
    S = structure(3)
    np.testing.assert_allclose(rhs(normalized_system(np.zeros(3)), 1.0), -S.Pi)
    sysm = main_system(np.zeros(3), np.zeros(3), 1.0)
    z = 0.4 - 0.2j
    np.testing.assert_allclose(rhs(sysm, z), -S.Pi / z**2 + S.Pi.T, atol=1e-14)
    with pytest.raises(ZeroDivisionError):
        rhs(sysm, 0)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_rhs_cyclic_symmetry(N, rng):
    S = structure(N)
    sysm = normalized_system(random_generic_m(rng, N))
    for z in rng.normal(size=50) + 1j * rng.normal(size=50):
        lhs = S.d_mat @ rhs(sysm, z) @ S.d_inv
        np.testing.assert_allclose(lhs, S.omega * rhs(sysm, S.omega * z), atol=1e-13 * (1 + abs(z) ** -2))


def test_frobenius_first_coefficient_and_residual():
    S = structure(4)
    fro = frobenius_at_infinity(normalized_system(np.zeros(4)), K=5)
    np.testing.assert_allclose(fro.coeffs[0], S.Pi)
    m = np.array([0.3, 0.1, -0.1, -0.3])
    sysm = normalized_system(m)
    fro = frobenius_at_infinity(sysm, K=60)
    z, h = 10.0 + 0.0j, 1e-4
    dX = (fro.evaluate(z + h) - fro.evaluate(z - h)) / (2 * h)
    assert np.max(np.abs(dX - rhs(sysm, z) @ fro.evaluate(z))) <= 1e-10


def test_loop_monodromy_at_infinity():
    sysm = normalized_system(np.array([0.2, 0.0, -0.2]))
    Y1, expected, info = loop_monodromy(sysm)
    assert np.max(np.abs(Y1 - expected)) <= 1e-9
    assert info["frobenius_branch_residual"] <= 1e-12
    assert info["det_drift"] <= 1e-9


def test_stokes_trivial_at_m_zero():
    sysm = normalized_system(np.zeros(2))
    for k in (1, 2):
        np.testing.assert_allclose(numeric_stokes(sysm, k), np.eye(2), atol=1e-8)


def test_stokes_rank_two_one_sixth():
    sysm = normalized_system(np.array([1 / 6, -1 / 6]))
    Qt = _tilde(numeric_stokes(sysm, Fraction(3, 2)), 2)
    assert Qt[0, 1].real == pytest.approx(-1.0, abs=1e-5)
    assert abs(Qt[0, 1].imag) < 1e-8


@pytest.mark.parametrize("N", [3, 4])
def test_stokes_support_pattern(N, rng):
    m = random_generic_m(rng, N)
    sysm = normalized_system(m)
    r = Rank(N)
    for k in (Fraction(1), Fraction(1) + Fraction(1, N)):
        Q = numeric_stokes(sysm, k)
        np.testing.assert_allclose(np.diag(Q), 1, atol=1e-6)
        allowed = sp.ray_support(k, r)
        for i in range(N):
            for j in range(N):
                if i != j and (i, j) not in allowed:
                    assert abs(Q[i, j]) <= 1e-6


def test_d1_at_m_zero_matches_closed_form():
    for N in (2, 3):
        D_num, spread = numeric_D1(normalized_system(np.zeros(N)))
        D = sp.build_D1(sp.asymptotic_from_m(np.zeros(N))).D1
        np.testing.assert_allclose(D_num, D, atol=1e-7 * np.max(np.abs(D)))
        assert spread < 1e-9


def test_d_from_def_and_loop_product():
    m = np.array([0.2, 0.0, -0.2])
    N = 3
    sysm = normalized_system(m)
    nm = numeric_monodromy(sysm)
    s = sp.stokes_params(m)
    D1 = sp.build_D1(sp.asymptotic_from_m(m)).D1
    # D_k = Q_k D_{k+1/(n+1)} with the numeric D_{1+1/3}
    C2inv, _ = numeric_connection_inverse(sysm, Fraction(4, 3), 0.06)
    D2 = np.linalg.inv(C2inv)
    np.testing.assert_allclose(sp.Q_zero(1, s) @ D2, D1, atol=1e-7 * np.max(np.abs(D1)))
    # D_1 conjugates the ordered product of one period of Stokes factors to e^{2 pi i m}
    P = np.eye(N, dtype=complex)
    for k in sorted(nm.Q_num):
        P = P @ nm.Q_num[k]
    D = nm.D1_num
    assert np.max(np.abs(P @ D @ np.diag(np.exp(-2j * math.pi * m)) - D)) <= 1e-7 * np.max(np.abs(D))
    ev = np.linalg.eigvals(nm.loop_monodromy)
    want = np.exp(-2j * math.pi * m)
    assert np.max(np.min(np.abs(ev[:, None] - want[None, :]), axis=1)) <= 1e-7


def test_canonical_solution_continues_as_a_solution():
    m = np.array([0.25, -0.25])
    sysm = normalized_system(m)
    X1 = canonical_at_zero(sysm, 1)
    a, b = 0.3, 1.2
    Yb, info = propagate(sysm, X1(a), [a, b])
    np.testing.assert_allclose(Yb, X1(b), atol=1e-8 * np.max(np.abs(Yb)))
    assert info["det_drift"] <= 1e-9


def test_canonical_solution_against_mellin_rank_two():
    m = np.array([0.15, -0.15])
    X1 = canonical_at_zero(normalized_system(m), 1)
    kap = 1j * (2 * math.pi) ** 1.5 / math.sqrt(2)
    for z in (0.5, 1.0, 2.0):
        X = me.exact_solution_matrix(m, z)
        np.testing.assert_allclose(X, kap * X1(z), atol=1e-7 * np.max(np.abs(X)))


def test_canonical_solution_against_mellin_rank_three():
    # the exact solution uses half-integer rotations: it differs from kappa X_1
    # by a constant unit lower-triangular factor
    m = np.array([0.2, 0.0, -0.2])
    X1 = canonical_at_zero(normalized_system(m), 1)
    kap = 1j * (2 * math.pi) ** 2 / math.sqrt(3)
    Us = [np.linalg.solve(kap * X1(z), me.exact_solution_matrix(m, z)) for z in (0.5, 1.0, 2.0)]
    for U in Us:
        np.testing.assert_allclose(U, Us[0], atol=1e-7)
    np.testing.assert_allclose(np.triu(Us[0], 1), 0, atol=1e-8)
    np.testing.assert_allclose(np.diag(Us[0]), 1, atol=1e-8)


def test_subsidiary_system_is_a_conjugate():
    data = sp.asymptotic_from_m(np.array([0.1, -0.1]), np.array([1.5, 1 / 1.5]))
    sub = subsidiary_system(data, 0.8)
    h = np.diag(sub.h)
    z = 0.7 + 0.1j
    np.testing.assert_allclose(rhs(sub, z), h @ rhs(normalized_system(data), z) @ np.linalg.inv(h), atol=1e-13)


def test_verify_against_closed_form_report():
    res = verify_against_closed_form(np.array([1 / 6, -1 / 6]))
    assert res["stokes_max_error"] < 1e-8
    assert res["D1_rel_error"] < 1e-8
