import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_bvp as scipy_solve_bvp

from tt_toda import toda_solver as ts
from tt_toda.toda_solver import (
    BvpProblem,
    SolverOptions,
    assemble_tt_toda,
    check_a3,
    full_system_residual,
    functional_value,
    pohozaev_residual,
    solve_bvp,
    supersolution_guess,
    tail_defect,
    tt_toda_w,
)


def test_problem_validation():
    with pytest.raises(ValueError):
        BvpProblem(2, 2.0, 2.0, np.array([0.1]))
    with pytest.raises(ValueError):
        BvpProblem(1, 2.0, 2.0, np.array([1.5]))  # 2 - b gamma < 0
    with pytest.raises(ValueError):
        BvpProblem(1, 2.0, 2.0, np.array([0.1]), s_min=1.0, s_max=0.0)
    with pytest.raises(ValueError):
        assemble_tt_toda(2, [0.5, -0.5])
    with pytest.raises(ValueError):
        solve_bvp(BvpProblem(1, 2.0, 2.0, np.array([0.0])), SolverOptions(left_bc="dirichlet"))
    assert check_a3([1.0], 2.0, 2.0) and not check_a3([1.0], 2.0, 2.0, strict=True)


def test_zero_gamma_gives_zero_solution():
    sol = solve_bvp(BvpProblem(3, 2.0, 1.0, np.zeros(3), nodes=500))
    assert sol.converged
    np.testing.assert_allclose(sol.u, 0, atol=1e-14)


def test_reduction_parameters():
    p2 = assemble_tt_toda(2, [0.2, -0.2])
    assert (p2.n_eqs, p2.a, p2.b) == (1, 2.0, 2.0)
    np.testing.assert_allclose(p2.gamma, [-0.4])
    p3 = assemble_tt_toda(3, [0.2, 0.0, -0.2])
    assert (p3.n_eqs, p3.a, p3.b) == (1, 2.0, 1.0)
    p4 = assemble_tt_toda(4, [0.3, 0.1, -0.1, -0.3])
    assert (p4.n_eqs, p4.a, p4.b) == (2, 2.0, 2.0)


def test_rank_two_solution_properties():
    p = assemble_tt_toda(2, [1 / 6, -1 / 6])
    sol = solve_bvp(p)
    assert sol.converged and sol.residual_norm <= 1e-10
    assert sol.u.min() >= -1e-12
    assert np.all(np.diff(sol.u[0]) <= 1e-12)
    fine = solve_bvp(p.with_(nodes=2 * p.nodes - 1))
    assert np.max(np.abs(sol.u - fine.u[:, ::2])) <= 1e-6


def test_rank_two_against_scipy_collocation():
    # independent solver for u'' = e^{2s}(e^{2u} - e^{-2u}), u'(s0) = gamma, u(s1) = 0
    gam = -1 / 3
    p = BvpProblem(1, 2.0, 2.0, np.array([gam]), s_min=math.log(1e-2), s_max=math.log(20.0), nodes=6001)
    ours = solve_bvp(p, SolverOptions(left_bc="neumann"))

    def f(s, y):
        return np.vstack([y[1], np.exp(2 * s) * (np.exp(2 * y[0]) - np.exp(-2 * y[0]))])

    def bc(ya, yb):
        return np.array([ya[1] - gam, yb[0]])

    s = np.linspace(p.s_min, p.s_max, 400)
    y0 = np.vstack([gam * (s - p.s_max), np.full_like(s, gam)])
    ref = scipy_solve_bvp(f, bc, s, y0, tol=1e-9, max_nodes=200000)
    assert ref.success
    np.testing.assert_allclose(ours.u[0], ref.sol(p.grid)[0], atol=2e-5)


@pytest.mark.parametrize("N1,m", [(4, [0.3, 0.1, -0.1, -0.3]), (5, [0.3, 0.1, 0.0, -0.1, -0.3])])
def test_full_system_residual(N1, m):
    sol = solve_bvp(assemble_tt_toda(N1, m))
    assert full_system_residual(N1, sol) <= 1e-8
    W = tt_toda_w(N1, sol)
    np.testing.assert_allclose(W + W[::-1], 0, atol=1e-15)


def test_functional_of_zero_solution():
    p = BvpProblem(3, 2.0, 1.0, np.zeros(3))
    R = 5.0
    want = (1 / 2 + 2 + 1) * math.pi * R**2
    assert functional_value(p, np.zeros((3, p.nodes)), R=R) == pytest.approx(want, rel=1e-5)


@pytest.mark.parametrize("N1,m", [(2, [1 / 6, -1 / 6]), (3, [0.2, 0.0, -0.2]), (4, [0.3, 0.1, -0.1, -0.3])])
def test_solution_minimises_functional(N1, m, rng):
    p = assemble_tt_toda(N1, m)
    sol = solve_bvp(p)
    I0 = functional_value(p, sol.u)
    s = p.grid
    for _ in range(10):
        c, w = rng.uniform(-6, 2), rng.uniform(0.3, 1.5)
        phi = np.exp(-(((s - c) / w) ** 2))[None, :] * rng.normal(size=(p.n_eqs, 1))
        for eps in (1e-1, 1e-2):
            assert functional_value(p, sol.u + eps * phi) > I0
    # coercivity: the potential terms are positive
    dirichlet = math.pi * float(np.sum(np.trapezoid((np.gradient(sol.u, s, axis=1) - p.gamma[:, None]) ** 2, s, axis=1)))
    assert I0 >= dirichlet


def test_pohozaev_trivial_cases():
    p = BvpProblem(2, 2.0, 2.0, np.zeros(2))
    assert pohozaev_residual(p, np.zeros((2, p.nodes)), (0.1, 5.0)) == pytest.approx(0.0, abs=1e-14)
    q = assemble_tt_toda(2, [1 / 6, -1 / 6])
    sol = solve_bvp(q)
    assert pohozaev_residual(q, sol.u, (1.0, 1.0)) == 0.0


def test_pohozaev_first_order():
    res = []
    for nodes in (1001, 2001, 4001):
        p = assemble_tt_toda(2, [1 / 6, -1 / 6], nodes=nodes)
        res.append(pohozaev_residual(p, solve_bvp(p).u, (0.1, 5.0)))
    for a, b in zip(res, res[1:]):
        assert 2 * 0.7 <= a / b <= 2 * 1.3


@settings(max_examples=8, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_monotone_in_gamma(seed):
    r = np.random.default_rng(seed)
    N1 = int(r.integers(2, 7))
    d, b = N1 // 2, (2.0 if N1 % 2 == 0 else 1.0)
    while True:
        g1 = r.uniform(-1.5, 1.5, d)
        g2 = g1 + r.uniform(0.01, 0.4, d)
        if check_a3(g1, 2.0, b, strict=True) and check_a3(g2, 2.0, b, strict=True):
            break
    p1 = BvpProblem(d, 2.0, b, g1, nodes=1500)
    u1, u2 = solve_bvp(p1).u, solve_bvp(p1.with_(gamma=g2)).u
    assert np.all(u1 - u2 >= -1e-12)


def test_auto_boundary_condition_falls_back_near_the_edge():
    near = BvpProblem(1, 2.0, 2.0, np.array([0.997]))
    sol = solve_bvp(near)
    assert sol.diagnostics["left_bc"] == "neumann"
    robin = solve_bvp(near, SolverOptions(left_bc="robin"))
    assert tail_defect(near, robin.u) > 1.0
    ok = solve_bvp(assemble_tt_toda(2, [0.25, -0.25]))
    assert ok.diagnostics["left_bc"] == "robin" and ok.diagnostics["tail_defect"] < 1e-3


def test_supersolution_start():
    p = assemble_tt_toda(4, [0.3, 0.1, -0.1, -0.3])
    guess = supersolution_guess(p)
    assert guess.shape == (2, p.nodes) and np.all(guess[:, -1] == 0)
    a = solve_bvp(p)
    b = solve_bvp(p, SolverOptions(initial=guess))
    assert b.converged
    np.testing.assert_allclose(a.u, b.u, atol=1e-9)


def test_backends_agree(rng):
    if ts._kernels_c is None:
        pytest.skip("compiled kernel not built")
    p = assemble_tt_toda(4, [0.3, 0.1, -0.1, -0.3], nodes=300)
    M = p.nodes - 1
    vb = rng.normal(size=(M, 2)) * 0.1
    vc = np.zeros_like(vb)
    s = p.grid[:-1]
    lin = p.gamma[None, :] * (s[:, None] - p.s_max)
    args = (vb, vc, lin, s, p.h, p.a, p.b, p.alpha(), True, True)
    Fc, Jc = ts.assemble(*args, backend="cython")
    Fp, Jp = ts.assemble(*args, backend="python")
    np.testing.assert_allclose(Fc, Fp, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose(Jc, Jp, rtol=1e-12, atol=1e-12)
    sc = solve_bvp(p, SolverOptions(backend="cython"))
    sp_ = solve_bvp(p, SolverOptions(backend="python"))
    np.testing.assert_allclose(sc.u, sp_.u, atol=1e-12)


def test_pure_python_switch():
    code = "from tt_toda.toda_solver import kernel_backend; print(kernel_backend())"
    out = subprocess.run([sys.executable, "-c", code], env={**os.environ, "TT_TODA_PURE_PYTHON": "1"}, capture_output=True, text=True)
    assert out.stdout.strip() == "python"
