"""Radial solutions of the open Toda-type system

    Delta u_1 = e^{a u_1} - e^{u_2 - u_1},
    Delta u_i = e^{u_i - u_{i-1}} - e^{u_{i+1} - u_i},
    Delta u_n = e^{u_n - u_{n-1}} - e^{-b u_n},

on the punctured plane, with ``u_i ~ gamma_i log r`` at ``0`` and ``u_i -> 0`` at
infinity.

In ``s = log r`` the radial Laplacian becomes ``e^{-2s} d^2/ds^2``, so the
problem is the two-point boundary value problem ``u'' = e^{2s} f(u)`` on
``[s_min, s_max]``.  It is discretized by second differences on a uniform grid
and solved by damped Newton iteration on the banded Jacobian, with
continuation in ``gamma``.

The tt*-Toda equations reduce to this system: with ``y = 2|t|`` and
``u_i = 2 w_{i-1}`` (``i = 1..d``) one gets ``a = 2`` and ``b = 2`` (``n+1``
even) or ``b = 1`` (``n+1`` odd), and ``gamma_i = -2 m_{i-1}``.
"""

from __future__ import annotations

import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.linalg import solve_banded

from . import _kernels_py
from .algebra import Rank

try:  # compiled kernel, if the extension was built
    from . import _kernels as _kernels_c
except ImportError:  # pragma: no cover - depends on the build
    _kernels_c = None

__all__ = [
    "BvpProblem",
    "RadialSolution",
    "SolverOptions",
    "kernel_backend",
    "assemble",
    "solve_bvp",
    "functional_value",
    "pohozaev_residual",
    "assemble_tt_toda",
    "full_system_residual",
    "tt_toda_w",
    "supersolution_guess",
    "check_a3",
]

log = logging.getLogger(__name__)


def kernel_backend() -> str:
    """``"cython"`` if the compiled kernel is in use, else ``"python"``.

    Setting ``TT_TODA_PURE_PYTHON=1`` forces the reference implementation.
    """
    if _kernels_c is not None and os.environ.get("TT_TODA_PURE_PYTHON", "") not in ("1", "true"):
        return "cython"
    return "python"


def assemble(*args, backend: str | None = None, **kwargs):
    """Dispatch to the compiled or the numpy kernel (same signature)."""
    which = backend or kernel_backend()
    if which == "cython":
        if _kernels_c is None:
            raise RuntimeError("compiled kernel not available")
        return _kernels_c.assemble(*args, **kwargs)
    return _kernels_py.assemble(*args, **kwargs)


def check_a3(gamma: Sequence[float], a: float, b: float, strict: bool = False) -> bool:
    """The admissibility inequalities for ``gamma``."""
    g = np.asarray(gamma, dtype=float)
    vals = [a * g[0] + 2.0] + [g[i + 1] - g[i] + 2.0 for i in range(g.size - 1)] + [2.0 - b * g[-1]]
    tol = 1e-14
    return all(v > tol for v in vals) if strict else all(v >= -tol for v in vals)


@dataclass(frozen=True)
class BvpProblem:
    n_eqs: int
    a: float
    b: float
    gamma: np.ndarray
    s_min: float = math.log(1e-4)
    s_max: float = math.log(40.0)
    nodes: int = 4000

    def __post_init__(self) -> None:
        g = np.asarray(self.gamma, dtype=float).reshape(-1)
        object.__setattr__(self, "gamma", g)
        if g.size != self.n_eqs or self.n_eqs < 1:
            raise ValueError(f"gamma must have length n_eqs = {self.n_eqs}")
        if not (self.a > 0 and self.b > 0):
            raise ValueError("a and b must be positive")
        if not self.s_min < self.s_max:
            raise ValueError("need s_min < s_max")
        if self.nodes < 8:
            raise ValueError("need at least 8 nodes")
        if not check_a3(g, self.a, self.b):
            raise ValueError(f"gamma = {g.tolist()} violates the admissibility inequalities")

    @property
    def generic(self) -> bool:
        return check_a3(self.gamma, self.a, self.b, strict=True)

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.s_min, self.s_max, self.nodes)

    @property
    def h(self) -> float:
        return (self.s_max - self.s_min) / (self.nodes - 1)

    def alpha(self, gamma: np.ndarray | None = None) -> np.ndarray:
        """``2 + dE_k(gamma)``: growth rates of the terms ``e^{2s + E_k}`` near 0."""
        g = self.gamma if gamma is None else gamma
        G = _kernels_py.exponent_jacobian(self.n_eqs, self.a, self.b)
        return 2.0 + G @ g

    def with_(self, **kw) -> "BvpProblem":
        d = dict(n_eqs=self.n_eqs, a=self.a, b=self.b, gamma=self.gamma, s_min=self.s_min, s_max=self.s_max, nodes=self.nodes)
        d.update(kw)
        return BvpProblem(**d)


@dataclass
class SolverOptions:
    tol: float = 1e-10
    max_newton: int = 60
    max_halvings: int = 30
    continuation_steps: int = 4
    max_continuation: int = 10
    left_bc: str = "auto"  # "robin", "neumann" or "auto"
    tail_defect_max: float = 0.25  # "auto": largest tail defect accepted for Robin
    backend: str | None = None
    initial: np.ndarray | None = None  # full u on the grid, shape (n, nodes)


@dataclass
class RadialSolution:
    problem: BvpProblem
    grid: np.ndarray
    u: np.ndarray  # shape (n_eqs, nodes)
    residual_norm: float
    converged: bool
    diagnostics: dict = field(default_factory=dict)

    def slope(self) -> np.ndarray:
        return np.gradient(self.u, self.grid, axis=1)


def _linear_part(problem: BvpProblem, gamma: np.ndarray, s: np.ndarray) -> np.ndarray:
    return gamma[None, :] * (s[:, None] - problem.s_max)


def _two_sum(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    t = x + y
    z = t - x
    return t, (x - (t - z)) + (y - z)


def _newton(problem: BvpProblem, gamma: np.ndarray, v: np.ndarray, opts: SolverOptions) -> tuple[np.ndarray, float, bool, int]:
    """Damped Newton with Armijo backtracking on the residual 2-norm."""
    s = problem.grid[:-1]
    lin = _linear_part(problem, gamma, s)
    n = problem.n_eqs
    alpha = problem.alpha(gamma)
    robin = opts.left_bc == "robin"
    h = problem.h

    def ev(vb, vc):
        with np.errstate(over="ignore", invalid="ignore"):
            return assemble(vb, vc, lin, s, h, problem.a, problem.b, alpha, robin, True, backend=opts.backend)

    vb, vc = np.array(v, dtype=float), np.zeros_like(v)
    F, ab = ev(vb, vc)
    norm = float(np.max(np.abs(F)))
    stalled = 0
    for it in range(opts.max_newton):
        if norm <= opts.tol:
            return vb + vc, norm, True, it
        if not np.isfinite(norm):
            return vb + vc, norm, False, it
        dv = solve_banded((n, n), ab, -F).reshape(vb.shape)
        lam = 1.0
        base = float(np.linalg.norm(F))
        for _ in range(opts.max_halvings):
            tb, tc = _two_sum(vb, vc + lam * dv)
            Ft, abt = ev(tb, tc)
            nt = float(np.linalg.norm(Ft))
            if np.isfinite(nt) and nt <= (1.0 - 1e-4 * lam) * base:
                break
            lam *= 0.5
        else:
            return vb + vc, norm, False, it
        new_norm = float(np.max(np.abs(Ft)))
        stalled = stalled + 1 if new_norm >= norm else 0
        vb, vc, F, ab, norm = tb, tc, Ft, abt, new_norm
        if stalled >= 3:
            break
    return vb + vc, norm, norm <= opts.tol, it + 1


def tail_defect(problem: BvpProblem, u: np.ndarray) -> float:
    """``max_k e^{2 s_min} X_k(u(s_min)) / alpha_k^2``.

    The Robin condition integrates the equation over ``(-inf, s_min)`` along
    the linear profile ``gamma s + c``; the neglected deviation from that
    profile is of this relative size.  Values of order one mean the domain
    does not reach the asymptotic regime at the origin.
    """
    X = _exp_terms(problem, np.asarray(u)[:, :1])[0]
    alpha = problem.alpha()
    with np.errstate(divide="ignore"):
        return float(np.max(np.exp(2.0 * problem.s_min) * X / alpha**2))


def solve_bvp(problem: BvpProblem, opts: SolverOptions | None = None) -> RadialSolution:
    """Solve the radial problem by continuation in ``gamma`` from ``0``.

    Left boundary: ``u'(s_min) = gamma`` (``left_bc="neumann"``) or that slope
    plus the integral of ``e^{2s} f(u)`` over ``(-inf, s_min)`` evaluated along
    the asymptotic profile (``"robin"``).  The default ``"auto"`` uses Robin
    and falls back to Neumann when :func:`tail_defect` exceeds
    ``opts.tail_defect_max`` (``gamma`` so close to the edge of the admissible
    region that the domain is too short for the profile).  Right boundary:
    ``u(s_max) = 0``.
    """
    opts = opts or SolverOptions()
    if opts.left_bc not in ("robin", "neumann", "auto"):
        raise ValueError("left_bc must be 'robin', 'neumann' or 'auto'")
    if opts.left_bc != "auto":
        sol = _solve_fixed(problem, opts)
        sol.diagnostics["tail_defect"] = tail_defect(problem, sol.u)
        return sol
    generic = problem.generic
    if generic:
        sol = _solve_fixed(problem, replace(opts, left_bc="robin"))
        defect = tail_defect(problem, sol.u)
        if sol.converged and defect <= opts.tail_defect_max:
            sol.diagnostics["tail_defect"] = defect
            return sol
        log.warning("tail defect %.3g too large for the Robin condition (s_min = %.3g); using Neumann", defect, problem.s_min)
    sol = _solve_fixed(problem, replace(opts, left_bc="neumann"))
    sol.diagnostics["tail_defect"] = tail_defect(problem, sol.u)
    return sol


def _solve_fixed(problem: BvpProblem, opts: SolverOptions) -> RadialSolution:
    if opts.left_bc == "robin" and not problem.generic:
        raise ValueError("the Robin condition needs strictly admissible gamma")
    s_all = problem.grid
    n = problem.n_eqs
    M = problem.nodes - 1
    history: list[dict] = []
    if opts.initial is not None:
        u0 = np.asarray(opts.initial, dtype=float)
        lam, step = 1.0, 1.0
        v = (u0[:, :-1].T - _linear_part(problem, problem.gamma, s_all[:-1]))
        v, norm, ok, its = _newton(problem, problem.gamma, v, opts)
        history.append({"lambda": 1.0, "newton": its, "residual": norm, "ok": ok})
    else:
        v = np.zeros((M, n))
        lam = 0.0
        step = 1.0 / opts.continuation_steps
        ok, norm = True, 0.0
        count = 0
        while lam < 1.0 and count < 4 * opts.max_continuation:
            target = min(1.0, lam + step)
            g = target * problem.gamma
            # keep u fixed across the change of linear part
            v_try = v + _linear_part(problem, lam * problem.gamma - g, s_all[:-1])
            v_new, norm, ok, its = _newton(problem, g, v_try, opts)
            count += 1
            history.append({"lambda": target, "newton": its, "residual": norm, "ok": ok})
            if ok:
                v, lam = v_new, target
                step = min(step * 1.5, 1.0 - lam) if lam < 1.0 else step
            else:
                step /= 2.0
                if step < 1e-3:
                    break
        if lam < 1.0:
            ok = False
    u = np.zeros((n, problem.nodes))
    u[:, :-1] = (v + _linear_part(problem, problem.gamma, s_all[:-1])).T
    res = norm if ok else float("inf")
    converged = bool(ok and res <= opts.tol)
    diag = {"continuation": history, "left_bc": opts.left_bc, "backend": opts.backend or kernel_backend(), "generic": problem.generic}
    if not converged:
        log.warning("radial solve did not converge: residual %.3e", res)
    return RadialSolution(problem, s_all, u, res, converged, diag)


# ---------------------------------------------------------------------------
# diagnostics: functional, Pohozaev identity


def _exp_terms(problem: BvpProblem, u: np.ndarray) -> np.ndarray:
    """``e^{E_k(u)}`` for ``k = 0..n`` at every node, shape ``(nodes, n+1)``."""
    return np.exp(_kernels_py.exponents(u.T, problem.a, problem.b))


def _weights(problem: BvpProblem) -> np.ndarray:
    """Coefficients ``1/a, 1, ..., 1, 1/b`` of the potential terms."""
    c = np.ones(problem.n_eqs + 1)
    c[0] = 1.0 / problem.a
    c[-1] = 1.0 / problem.b
    return c


def functional_value(problem: BvpProblem, u: np.ndarray, R: float | None = None, gamma: np.ndarray | None = None) -> float:
    """The energy of ``w_i = u_i - gamma_i log(r/R)`` on the disc of radius ``R``.

    ``I = 1/2 sum int |grad w_i|^2 + int (e^{a u_1}/a + sum_{i>=2} e^{u_i - u_{i-1}} + e^{-b u_n}/b)``,
    by the trapezoid rule in ``s`` plus the exact contribution of ``(0, r_min)``
    along the asymptotic profile.  ``u`` has shape ``(n, nodes)`` on the grid.
    """
    g = problem.gamma if gamma is None else np.asarray(gamma, dtype=float)
    s = problem.grid
    R = math.exp(problem.s_max) if R is None else R
    lR = math.log(R)
    keep = s <= lR + 1e-12
    s, uu = s[keep], np.asarray(u)[:, keep]
    if s[-1] < lR - 1e-12 and keep.sum() < problem.nodes:
        # close the last partial cell with a linearly interpolated node at R
        j = s.size
        full = np.asarray(u)
        th = (lR - s[-1]) / (problem.grid[j] - s[-1])
        s = np.append(s, lR)
        uu = np.hstack([uu, (full[:, j - 1] + th * (full[:, j] - full[:, j - 1]))[:, None]])
    ws = np.gradient(uu, s, axis=1) - g[:, None]
    dirichlet = math.pi * float(np.sum(np.trapezoid(ws**2, s, axis=1)))
    X = _exp_terms(problem, uu)
    c = _weights(problem)
    pot = 2 * math.pi * float(np.trapezoid(np.exp(2 * s) * (X @ c), s))
    alpha = problem.alpha(g)
    with np.errstate(divide="ignore"):
        tail = 2 * math.pi * float(np.sum(c * np.exp(2 * s[0]) * X[0] / alpha))
    return dirichlet + pot + tail


def pohozaev_residual(problem: BvpProblem, u: np.ndarray, annulus: tuple[float, float]) -> float:
    """``|LHS - RHS|`` of the Pohozaev identity on ``r0 < |x| < r1``.

    Bulk integrals use the trapezoid rule over the grid nodes inside the
    annulus; the boundary fluxes use one-sided first differences, so the
    residual is ``O(h)``.
    """
    s = problem.grid
    r0, r1 = annulus
    i0 = int(np.searchsorted(s, math.log(r0)))
    i1 = int(np.searchsorted(s, math.log(r1), side="right")) - 1
    if i1 <= i0:
        return 0.0
    u = np.asarray(u)
    ss = s[i0 : i1 + 1]
    X = _exp_terms(problem, u[:, i0 : i1 + 1]) - 1.0
    c = _weights(problem)
    lhs = 2 * math.pi * 2 * float(np.trapezoid(np.exp(2 * ss) * (X @ c), ss))
    h = problem.h
    # one-sided differences pointing into the annulus
    du0 = (u[:, i0 + 1] - u[:, i0]) / h
    du1 = (u[:, i1] - u[:, i1 - 1]) / h
    rr0, rr1 = math.exp(s[i0]), math.exp(s[i1])
    pot1 = float(X[-1] @ c) * 2 * math.pi * rr1**2
    pot0 = float(X[0] @ c) * 2 * math.pi * rr0**2
    # radial: -(x.grad u) du/dnu + 1/2 (x.nu)|grad u|^2 -> -pi u_s^2 outside, +pi u_s^2 inside
    flux = -math.pi * float(np.sum(du1**2)) + math.pi * float(np.sum(du0**2))
    rhs = pot1 - pot0 + flux
    return abs(lhs - rhs)


# ---------------------------------------------------------------------------
# tt*-Toda reduction


def assemble_tt_toda(rank: Rank | int, m: Sequence[float], **grid) -> BvpProblem:
    """The radial problem for ``w_0, ..., w_{d-1}`` of the tt*-Toda system.

    The independent variable is ``y = 2|t|`` (so ``s = log y``), the unknowns are
    ``u_i = 2 w_{i-1}`` and ``gamma_i = -2 m_{i-1}``.
    """
    r = rank if isinstance(rank, Rank) else Rank(int(rank))
    m = np.asarray(m, dtype=float)
    if m.size != r.np1:
        raise ValueError(f"m must have length {r.np1}")
    if np.max(np.abs(m + m[::-1])) > 1e-10:
        raise ValueError("m must satisfy m_i + m_(n-i) = 0")
    gam = -2.0 * m[: r.d]
    b = 2.0 if r.is_even else 1.0
    prob = BvpProblem(r.d, 2.0, b, gam, **grid)
    if not prob.generic:
        raise ValueError("m is not generic (boundary of the admissible region)")
    return prob


def tt_toda_w(rank: Rank | int, sol: RadialSolution) -> np.ndarray:
    """All ``w_0..w_n`` on the grid from a reduced solution (anti-symmetry, ``w_d = 0`` if odd)."""
    r = rank if isinstance(rank, Rank) else Rank(int(rank))
    W = np.zeros((r.np1, sol.grid.size))
    for i in range(r.d):
        W[i] = 0.5 * sol.u[i]
        W[r.n - i] = -W[i]
    return W


def full_system_residual(rank: Rank | int, sol: RadialSolution) -> float:
    """Max discrete residual of ``2 w_{t tbar} = e^{2(w_i - w_{i-1})} - e^{2(w_{i+1} - w_i)}``.

    In ``s = log(2|t|)``: ``w_{t tbar} = e^{-2s} w_ss``; checked at all interior
    nodes for every ``i = 0..n``.
    """
    r = rank if isinstance(rank, Rank) else Rank(int(rank))
    W = tt_toda_w(r, sol)
    s = sol.grid
    h = sol.problem.h
    d2 = ((W[:, :-2] - W[:, 1:-1]) - (W[:, 1:-1] - W[:, 2:])) / h**2
    lhs = 2.0 * d2
    Wm = np.roll(W, 1, axis=0)
    Wp = np.roll(W, -1, axis=0)
    rhs = np.exp(2 * s[1:-1]) * (np.exp(2 * (W - Wm)) - np.exp(2 * (Wp - W)))[:, 1:-1]
    return float(np.max(np.abs(lhs - rhs)))


def supersolution_guess(problem: BvpProblem, beta: Sequence[float] | None = None) -> np.ndarray:
    """Initial guess ``beta_i (s_max - s)`` (large near 0, zero at the right end).

    With ``a beta_1 > beta_2 - beta_1 > ... >= 2`` this is the profile of the
    local supersolution used in the a priori bound near the origin.
    """
    n = problem.n_eqs
    if beta is None:
        beta = np.cumsum(np.arange(n, 0, -1) + 1.0) / max(problem.a, 1.0)
    beta = np.asarray(beta, dtype=float)
    s = problem.grid
    return beta[:, None] * np.maximum(problem.s_max - s, 0.0)[None, :]
