import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from conftest import generic_m, random_generic_m
from hypothesis import given, settings
from hypothesis import strategies as st

from tt_toda import spectral as sp
from tt_toda.algebra import Rank, is_sl_delta_real, structure


def _data(m, chat=None):
    return sp.asymptotic_from_m(m, chat, len(m))


def _random_chat(rng, N):
    h = np.exp(rng.normal(size=N // 2))
    ch = np.ones(N)
    ch[: N // 2] = h
    ch[N - N // 2 :] = 1 / h[::-1]
    return ch


# --- asymptotic data ------------------------------------------------------------


def test_derive_asymptotic_rank_two():
    d = sp.derive_asymptotic(sp.ModelInput(rank=Rank(2), c=np.array([1.0, 1.0]), k=np.array([0.0, 1.0])))
    # closed form m_0 = (k_1 - k_0) / (2 k_0 + 2 k_1 + 4)
    assert d.m[0] == pytest.approx(1 / 6, abs=1e-14)
    assert d.N == pytest.approx(3.0)


def test_derive_asymptotic_rank_three():
    d = sp.derive_asymptotic(sp.ModelInput(rank=Rank(3), c=np.ones(3), k=np.array([1.0, 0.0, 0.0])))
    # closed form m_0 = (k_1 - k_0) / (k_0 + 2 k_1 + 3)
    assert d.m[0] == pytest.approx(-0.25, abs=1e-14)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_zero_exponents_give_zero_m(N):
    d = sp.derive_asymptotic(sp.ModelInput(rank=Rank(N), c=np.full(N, 2.0), k=np.zeros(N)))
    np.testing.assert_allclose(d.m, 0, atol=1e-15)


def test_model_input_validation():
    with pytest.raises(sp.NonGenericError, match="non-generic"):
        sp.ModelInput(rank=Rank(2), c=np.ones(2), k=np.array([-1.0, 0.0]))
    with pytest.raises(ValueError, match="symmetry"):
        sp.ModelInput(rank=Rank(3), c=np.ones(3), k=np.array([0.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        sp.ModelInput(rank=Rank(2), c=np.array([1.0, -1.0]), k=np.zeros(2))


def test_t_of_z_and_h():
    d = sp.derive_asymptotic(sp.ModelInput(rank=Rank(2), c=np.ones(2), k=np.array([0.0, 1.0])))
    assert sp.t_of_z(1.0, d) == pytest.approx(2 / 3, rel=1e-15)
    d0 = _data(np.zeros(3))
    assert sp.t_of_z(0.7, d0) == pytest.approx(0.7)
    np.testing.assert_allclose(sp.h_of_t(3.3, d0), np.eye(3))
    with pytest.raises(ValueError):
        sp.t_of_z(-1.0, d0)


def test_non_generic_m_rejected():
    with pytest.raises(sp.NonGenericError):
        _data(np.array([0.5, -0.5]))  # m_1 - m_0 = -1


# --- Stokes data ------------------------------------------------------------------


@pytest.mark.parametrize("m0", [0.0, 1 / 6, 0.1, 0.25, 0.4, -0.3])
def test_stokes_rank_two_closed_form(m0):
    s = sp.stokes_params([m0, -m0])
    assert s.essential[0] == pytest.approx(-2 * math.sin(math.pi * m0), abs=1e-14)


@pytest.mark.parametrize("m0", [0.0, 0.1, 0.2, -0.4])
def test_stokes_rank_three_closed_form(m0):
    s = sp.stokes_params([m0, 0.0, -m0])
    assert s.essential[0] == pytest.approx(1 + 2 * math.cos(2 * math.pi * (m0 + 1) / 3), abs=1e-14)


@pytest.mark.parametrize("N", range(2, 8))
def test_monodromy_eigenvalues(N, rng):
    # oracle: eigensolve of the explicit product Q_1 Q_{1+1/(n+1)} Pi
    for _ in range(3):
        m = random_generic_m(rng, N)
        s = sp.stokes_params(m)
        ev = np.linalg.eigvals(sp.build_M(s))
        want = np.exp(2j * np.pi * (m - np.arange(N)) / N)
        dist = np.abs(ev[:, None] - want[None, :])
        assert np.max(np.min(dist, axis=0)) < 1e-10
        assert np.max(np.min(dist, axis=1)) < 1e-10


def test_ray_support_examples():
    assert sp.ray_support(1, Rank(4)) == frozenset({(1, 0), (2, 3)})
    for k in range(-3, 4):
        assert sp.ray_support(k, Rank(2)) == frozenset()
    with pytest.raises(ValueError):
        sp.as_ray(Fraction(1, 3), Rank(4))


@given(st.integers(2, 9), st.integers(-20, 20))
def test_ray_support_period_two(N, j):
    r = Rank(N)
    k = Fraction(j, N)
    assert sp.ray_support(k, r) == sp.ray_support(k + 2, r)


@given(st.integers(2, 9))
def test_ray_supports_partition_pairs(N):
    # over one period every ordered pair (i, j), i != j, appears exactly once
    r = Rank(N)
    seen = []
    for k in sp.Q_period(r):
        seen.extend(sp.ray_support(k, r))
    assert len(seen) == len(set(seen)) == N * (N - 1)


def test_qtilde_examples():
    s2 = sp.StokesData.from_essential(Rank(2), [0.7])
    np.testing.assert_array_equal(sp.build_Qtilde(Fraction(3, 2), s2), [[1, 0.7], [0, 1]])
    s3 = sp.StokesData.from_essential(Rank(3), [0.7])
    np.testing.assert_array_equal(sp.build_Qtilde(1, s3), [[1, 0, 0], [0.7, 1, 0], [0, 0, 1]])
    z = sp.StokesData.from_essential(Rank(5), [0.0, 0.0])
    for k in sp.Q_period(Rank(5)):
        np.testing.assert_array_equal(sp.build_Qtilde(k, z), np.eye(5))


def test_mtilde_examples():
    s2 = sp.StokesData.from_essential(Rank(2), [0.3])
    np.testing.assert_allclose(sp.build_Mtilde(s2), [[-0.3, 1], [-1, 0]])
    np.testing.assert_allclose(sp.char_poly(sp.build_Mtilde(s2)), [1, 0.3, 1], atol=1e-15)
    s3 = sp.StokesData.from_essential(Rank(3), [0.3])
    np.testing.assert_allclose(sp.build_Mtilde(s3), [[0, 1, 0], [-0.3, 0.3, 1], [1, 0, 0]])
    np.testing.assert_allclose(sp.char_poly(sp.build_Mtilde(s3)), [1, -0.3, 0.3, -1], atol=1e-15)
    ev = np.linalg.eigvals(sp.build_Mtilde(sp.StokesData.from_essential(Rank(2), [0.0])))
    np.testing.assert_allclose(sorted(ev, key=np.imag), [-1j, 1j], atol=1e-15)


def test_char_poly_against_numpy(rng):
    for N in range(2, 8):
        A = rng.normal(size=(N, N))
        np.testing.assert_allclose(sp.char_poly(A), np.poly(A), atol=1e-9)


@given(st.integers(2, 9), st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_char_poly_identity(N, vals):
    s = sp.StokesData.from_essential(Rank(N), vals[: N // 2])
    np.testing.assert_allclose(sp.char_poly(sp.build_Mtilde(s)), sp.expected_char_poly(s), atol=1e-10)


def test_invert_stokes_examples():
    np.testing.assert_allclose(sp.invert_stokes(sp.StokesData.from_essential(Rank(2), [-1.0])), [1 / 6, -1 / 6], atol=1e-12)
    for N in range(2, 7):
        z = sp.StokesData.from_essential(Rank(N), np.zeros(N // 2))
        np.testing.assert_allclose(sp.invert_stokes(z), 0, atol=1e-12)


def test_invert_stokes_outside_image():
    with pytest.raises(sp.NonGenericError):
        sp.invert_stokes(sp.StokesData.from_essential(Rank(2), [2.5]))


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 6).flatmap(lambda N: generic_m(N)))
def test_round_trip(m):
    np.testing.assert_allclose(sp.invert_stokes(sp.stokes_params(m)), m, atol=1e-8)


# --- connection data -----------------------------------------------------------


def test_connection_eigs_trivial():
    np.testing.assert_allclose(sp.connection_eigs(_data(np.zeros(4))), 1, rtol=1e-14)
    ch = np.array([2.0, 0.5, 1 / 0.5, 1 / 2.0])
    np.testing.assert_allclose(sp.connection_eigs(_data(np.zeros(4), ch)), ch[::-1] / ch, rtol=1e-14)


def test_connection_eig_rank_two_high_precision():
    m0 = mpmath.mpf(1) / 6
    with mpmath.workdps(50):
        ref = 2 ** (-2 * m0) * mpmath.gamma((1 - 2 * m0) / 2) / mpmath.gamma((1 + 2 * m0) / 2)
    e = sp.connection_eigs(_data(np.array([1 / 6, -1 / 6])))
    assert e[0] == pytest.approx(float(ref), rel=1e-10)


@given(st.integers(2, 7).flatmap(lambda N: generic_m(N)))
def test_chat_id_properties(m):
    ch = sp.chat_id(m)
    np.testing.assert_allclose(ch * ch[::-1], 1, rtol=1e-12)
    np.testing.assert_allclose(sp.connection_eigs(_data(m, ch)), 1, rtol=1e-10)


def test_chat_id_trivial():
    np.testing.assert_allclose(sp.chat_id(np.zeros(5)), 1, rtol=1e-15)


def test_pm_is_identity_for_rank_two():
    conn = sp.build_D1(_data(np.array([0.2, -0.2])))
    np.testing.assert_allclose(conn.P_m, np.eye(2), atol=1e-13)


@pytest.mark.parametrize("N", [2, 4, 6])
def test_companion_and_cyclic_routes_agree(N, rng):
    data = _data(random_generic_m(rng, N))
    a = sp.build_D1(data, route="companion").D1
    b = sp.build_D1(data, route="cyclic").D1
    np.testing.assert_allclose(a, b, atol=1e-10 * np.max(np.abs(a)))
    F = sp.companion_conjugator(sp.build_Mtilde(sp.stokes_params(data)), sp.stokes_params(data))
    np.testing.assert_allclose(np.diag(F), 1)


@pytest.mark.parametrize("N", [2, 3, 4, 5])
def test_cyclic_relations(N, rng):
    S = structure(N)
    for _ in range(4):
        m = random_generic_m(rng, N)
        data = _data(m, _random_chat(rng, N))
        s = sp.stokes_params(data)
        conn = sp.build_D1(data)
        E = sp.build_E1(conn, data)
        k2 = Fraction(1) + Fraction(1, N)
        M0 = sp.Q_zero(1, s) @ sp.Q_zero(k2, s) @ S.Pi
        Mi = sp.Q_infinity(1, s) @ sp.Q_infinity(k2, s) @ S.Pi
        D = conn.D1
        rhs = M0 @ D @ np.diag(np.exp(-2j * np.pi * m / N)) @ S.d_mat
        assert np.max(np.abs(rhs - D)) <= 1e-9 * np.max(np.abs(D))
        assert np.max(np.abs(M0 @ E @ Mi - E)) <= 1e-9 * np.max(np.abs(E))
        assert abs(np.linalg.det(E) - np.linalg.det(S.C / N)) <= 1e-10
        ev = np.linalg.eigvals(E @ np.linalg.inv(conn.E1_id))
        np.testing.assert_allclose(np.sort_complex(ev), np.sort_complex(conn.e.astype(complex)), rtol=1e-8, atol=1e-10)


def test_e1_at_m_zero_is_e1_id():
    data = _data(np.zeros(4))
    conn = sp.build_D1(data)
    E = sp.build_E1(conn, data)
    np.testing.assert_allclose(E, conn.E1_id, atol=1e-12)


@pytest.mark.parametrize("N", [2, 3, 4])
def test_global_criterion(N, rng):
    for _ in range(3):
        m = random_generic_m(rng, N)
        good = _data(m, sp.chat_id(m))
        assert sp.global_criterion(sp.build_D1(good), good, t=0.7)
        ch = sp.chat_id(m).copy()
        ch[0] *= 2.0
        ch[-1] /= 2.0
        bad = _data(m, ch)
        assert not sp.global_criterion(sp.build_D1(bad), bad)
        s = sp.stokes_params(m)
        S = structure(N)
        for k in sp.Q_period(Rank(N)):
            assert is_sl_delta_real(S.Omega @ sp.Q_zero(k, s) @ S.Omega_inv, 1e-8)


def test_positivity_region():
    assert sp.positivity_region_test(sp.StokesData.from_essential(Rank(4), [0.0, 0.0]))
    assert sp.positivity_region_test(sp.stokes_params([0.05, -0.05]))
    assert not sp.positivity_region_test(sp.StokesData.from_essential(Rank(2), [2.0]))
    assert not sp.positivity_region_test(sp.StokesData.from_essential(Rank(2), [-2.5]))


@pytest.mark.parametrize("x", [0.5, 3.0, 40.0])
def test_bessel_laplace_integral(x):
    from scipy.special import k0e

    # (1/2pi) int_0^inf exp(-x(l + 1/l)) dl/l = K_0(2x)/pi
    assert sp.bessel_laplace_integral(x, scaled=True) == pytest.approx(k0e(2 * x) / math.pi, rel=1e-12)
    assert sp.bessel_laplace_integral(x) > 0
