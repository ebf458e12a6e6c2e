"""Asymptotic data read off a computed radial solution.

Near ``t = 0`` a solution behaves like ``w_i = -m_i log|t| - log chat_i + o(1)``;
near infinity the combinations

    W_p(x) = sum_j w_j sin((2j+1) p pi/(n+1)),   p = 1..d,

decay like ``-((n+1)/8) s_p (pi L_p x)^(-1/2) e^(-2 L_p x)`` with
``L_p = 2 sin(p pi/(n+1))`` and ``x = |t|``.  This module fits both ends and
compares the fitted values with the closed forms of :mod:`tt_toda.spectral`.

All grids are in ``s = log(2|t|)``, the variable used by
:mod:`tt_toda.toda_solver`.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import Rank, structure
from .spectral import bessel_laplace_integral, chat_id, stokes_params
from .toda_solver import (
    RadialSolution,
    SolverOptions,
    _exp_terms,
    assemble_tt_toda,
    solve_bvp,
    tt_toda_w,
)

__all__ = [
    "FitResult",
    "FitWindowError",
    "fit_origin",
    "hatw_transform",
    "hatw_matrix_residual",
    "sine_matrix",
    "far_field_combinations",
    "fit_stokes_far_field",
    "fit_solution",
    "connection_problem_report",
    "bessel_laplace_check",
    "MIN_WINDOW_NODES",
    "FAR_FIELD_BAND",
]

log = logging.getLogger(__name__)

MIN_WINDOW_NODES = 20
FAR_FIELD_BAND = (1e-9, 1e-3)
# the condition w = 0 at the right end perturbs W_p by a relative amount of
# about e^{-4 L_p (x_max - x)}; nodes where that exceeds this are not used
TRUNCATION_REL = 1e-6
LOG2 = math.log(2.0)


class FitWindowError(ValueError):
    """The requested fit window does not contain enough usable nodes."""


@dataclass
class FitResult:
    """Fitted data at both ends of a solution.

    ``gamma_fit`` and ``const_fit`` describe ``w_i ~ gamma_i log|t| + const_i``
    near ``0`` (so ``gamma_fit ~ -m_i`` and ``const_fit ~ -log chat_i``) for
    ``i = 0..d-1``; ``s_fit`` holds ``s_1..s_d``.
    """

    gamma_fit: np.ndarray
    const_fit: np.ndarray
    s_fit: np.ndarray
    fit_windows: dict = field(default_factory=dict)
    stderr: dict = field(default_factory=dict)
    sub_fit: np.ndarray | None = None
    rank_info: dict = field(default_factory=dict)


def _as_rank(rank: Rank | int) -> Rank:
    return rank if isinstance(rank, Rank) else Rank(int(rank))


def _lstsq(A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray, float]:
    """Least squares with standard errors and the residual 2-norm."""
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - A @ coef
    dof = max(A.shape[0] - A.shape[1], 1)
    sigma2 = float(r @ r) / dof
    cov = sigma2 * np.linalg.pinv(A.T @ A)
    return coef, np.sqrt(np.abs(np.diag(cov))), float(np.linalg.norm(r))


# ---------------------------------------------------------------------------
# t = 0


def _origin_correction(sol: RadialSolution) -> np.ndarray:
    """Leading correction to ``u - gamma s - C`` near the origin.

    Each term ``e^{2s} e^{E_k(u)}`` grows like ``e^{alpha_k s}``; integrating
    it twice against the asymptotic profile contributes
    ``e^{2s} e^{E_k}/alpha_k^2``.  Shape ``(n, nodes)``.
    """
    prob = sol.problem
    n = prob.n_eqs
    X = _exp_terms(prob, sol.u)  # (nodes, n+1)
    alpha = prob.alpha()
    q = np.exp(2 * sol.grid)[:, None] * X / alpha**2
    return (q[:, :n] - q[:, 1:]).T


def fit_origin(sol: RadialSolution, window: tuple[float, float] | None = None, correct: bool = True) -> tuple[np.ndarray, np.ndarray, dict]:
    """Fit ``w_i = gamma_i log|t| + const_i`` on an ``s``-window near the left end.

    The default window is the first two units of ``s`` (about one decade in
    ``|t|``).  With ``correct`` the analytic ``O(e^{alpha s})`` correction is
    removed before the linear regression.  Returns ``(gamma_fit, const_fit,
    info)`` with ``info`` holding the window and standard errors.
    """
    s = sol.grid
    if window is None:
        window = (s[0], s[0] + 2.0)
    sel = (s >= window[0] - 1e-12) & (s <= window[1] + 1e-12)
    if int(sel.sum()) < MIN_WINDOW_NODES:
        raise FitWindowError(f"origin window {window} holds {int(sel.sum())} nodes; need at least {MIN_WINDOW_NODES}")
    u = sol.u
    if correct:
        u = u - _origin_correction(sol)
    n = sol.problem.n_eqs
    A = np.vstack([s[sel], np.ones(int(sel.sum()))]).T
    slope = np.empty(n)
    inter = np.empty(n)
    err_s = np.empty(n)
    err_c = np.empty(n)
    for i in range(n):
        coef, se, _ = _lstsq(A, u[i, sel])
        slope[i], inter[i] = coef
        err_s[i], err_c[i] = se
    # u = 2 w and s = log 2 + log|t|
    gamma_fit = 0.5 * slope
    const_fit = 0.5 * (inter + slope * LOG2)
    info = {
        "window": (float(window[0]), float(window[1])),
        "nodes": int(sel.sum()),
        "stderr_gamma": 0.5 * err_s,
        "stderr_const": 0.5 * np.hypot(err_c, err_s * LOG2),
        "corrected": correct,
    }
    return gamma_fit, const_fit, info


# ---------------------------------------------------------------------------
# the hat-w transform


def _full_w(w: Sequence[float], rank: Rank) -> np.ndarray:
    w = np.asarray(w, dtype=float).reshape(-1)
    N = rank.np1
    if w.size == N:
        if np.max(np.abs(w + w[::-1]), initial=0.0) > 1e-10 * max(1.0, np.max(np.abs(w))):
            raise ValueError("w must satisfy w_i + w_(n-i) = 0")
        return w
    if w.size != rank.d:
        raise ValueError(f"w must have length {rank.d} or {N}")
    full = np.zeros(N)
    full[: rank.d] = w
    full[N - rank.d :] = -w[::-1]
    return full


def sine_matrix(rank: Rank | int) -> np.ndarray:
    """``S[p-1, j] = sin((2j+1) p pi/(n+1))`` for ``p = 1..d``, ``j = 0..d-1``."""
    r = _as_rank(rank)
    p = np.arange(1, r.d + 1)[:, None]
    j = np.arange(r.d)[None, :]
    return np.sin((2 * j + 1) * p * math.pi / r.np1)


def hatw_transform(w: Sequence[float], rank: Rank | int, route: str = "closed") -> np.ndarray:
    """``hat w_p``, ``p = 0..n``.

    ``route="closed"``: ``(4i/(n+1)) sum_j w_j sin((2j+1) p pi/(n+1))``;
    ``route="matrix"``: ``d^{-1/2} Omega^{-1} (-2w)``.  ``w`` may be the full
    anti-symmetric vector or its first ``d`` entries.
    """
    r = _as_rank(rank)
    wf = _full_w(w, r)
    N = r.np1
    if route == "matrix":
        S = structure(N)
        return np.diag(S.half_d).conj() * (S.Omega_inv @ (-2.0 * wf))
    if route != "closed":
        raise ValueError("route must be 'closed' or 'matrix'")
    p = np.arange(N)[:, None]
    j = np.arange(r.d)[None, :]
    sines = np.sin((2 * j + 1) * p * math.pi / N)
    return 4j / N * (sines @ wf[: r.d])


def hatw_matrix_residual(w: Sequence[float], rank: Rank | int) -> float:
    """Max-entry residual of ``d^{1/2} Omega diag(-2w) Omega^{-1} d^{-1/2} = sum_p hat w_p PiHat^p``."""
    r = _as_rank(rank)
    wf = _full_w(w, r)
    S = structure(r.np1)
    hw = hatw_transform(wf, r, route="matrix")
    lhs = S.half_d @ S.Omega @ np.diag(-2.0 * wf) @ S.Omega_inv @ S.half_d.conj()
    rhs = np.zeros_like(lhs)
    P = np.eye(r.np1, dtype=complex)
    for p in range(r.np1):
        rhs = rhs + hw[p] * P
        P = P @ S.PiHat
    return float(np.max(np.abs(lhs - rhs)))


# ---------------------------------------------------------------------------
# infinity


def far_field_combinations(sol: RadialSolution, rank: Rank | int) -> tuple[np.ndarray, np.ndarray]:
    """``(x, W)`` with ``x = |t|`` on the grid and ``W[p-1] = W_p(x)``."""
    r = _as_rank(rank)
    W = tt_toda_w(r, sol)
    x = 0.5 * np.exp(sol.grid)
    return x, sine_matrix(r) @ W[: r.d]


def _mode(N: int, L: float, sp: float, sub: float, x: np.ndarray) -> np.ndarray:
    return -(N / 8.0) * sp * (math.pi * L * x) ** -0.5 * np.exp(-2 * L * x) * (1.0 + sub / x)


def fit_stokes_far_field(
    sol: RadialSolution,
    rank: Rank | int,
    window: tuple[float, float] | None = None,
    subleading: bool = True,
    x_window: dict | None = None,
) -> tuple[np.ndarray, dict]:
    """Fit ``s_1..s_d`` from the decay of ``W_p``.

    For each ``p`` the nodes with ``|W_p|`` inside ``window`` (default
    ``[1e-9, 1e-3]``) and ``x`` below the truncation cutoff
    ``x_max - log(1/TRUNCATION_REL)/(4 L_p)`` are used, optionally restricted
    by ``x_window[p]``.  The
    transformed data ``W_p (pi L_p x)^{1/2} e^{2 L_p x} (-8/(n+1))`` is
    regressed on ``{1, 1/x}`` (or on ``{1}`` without ``subleading``).  Modes are
    fitted from the slowest decay outward; the products of already fitted
    modes whose decay rate is comparable to ``e^{-2 L_p x}`` enter as extra
    regressors, which absorbs the quadratic cross-talk.  A combination that
    stays below the lower threshold everywhere gives ``s_p = 0``.  Rows of the sine
    matrix that vanish identically are skipped and reported.
    """
    r = _as_rank(rank)
    N = r.np1
    lo, hi = window or FAR_FIELD_BAND
    x, Wc = far_field_combinations(sol, r)
    Smat = sine_matrix(r)
    row_ok = np.max(np.abs(Smat), axis=1) > 1e-12
    info: dict = {
        "matrix_rank": int(np.linalg.matrix_rank(Smat)),
        "dropped_rows": [int(p + 1) for p in np.flatnonzero(~row_ok)],
        "windows": {},
        "stderr": {},
        "sub": {},
        "residual": {},
        "x_cutoff": {},
    }
    L = 2 * np.sin(np.arange(1, r.d + 1) * math.pi / N)
    order = np.argsort(L, kind="stable")
    s_fit = np.full(r.d, np.nan)
    fitted: list[tuple[float, float, float]] = []  # (L, s, sub)
    for idx in order:
        p = int(idx) + 1
        if not row_ok[idx]:
            continue
        Wp = Wc[idx]
        x_cut = float(x[-1]) - math.log(1.0 / TRUNCATION_REL) / (4.0 * L[idx])
        info["x_cutoff"][p] = x_cut
        sel = (np.abs(Wp) >= lo) & (np.abs(Wp) <= hi) & (x <= x_cut)
        if x_window and p in x_window:
            a, b = x_window[p]
            sel &= (x >= a) & (x <= b)
        if np.max(np.abs(Wp)) < lo:
            # the mode never rises above the noise floor: no decaying term at all
            s_fit[idx] = 0.0
            fitted.append((float(L[idx]), 0.0, 0.0))
            info["windows"][p] = None
            info["stderr"][p] = 0.0
            info["sub"][p] = 0.0
            info["residual"][p] = 0.0
            continue
        if int(sel.sum()) < MIN_WINDOW_NODES:
            raise FitWindowError(
                f"far-field window for p={p} holds {int(sel.sum())} nodes; extend the domain (larger s_max) or refine the grid"
            )
        xs = x[sel]
        T = (-8.0 / N) * np.sqrt(math.pi * L[idx] * xs) * np.exp(2 * L[idx] * xs)
        cols = [np.ones(xs.size)]
        if subleading:
            cols.append(1.0 / xs)
        for a_i, (La, sa, ca) in enumerate(fitted):
            for Lb, sb, cb in fitted[a_i:]:
                # only products decaying no faster than twice the target rate matter
                if La + Lb < 2.0 * L[idx] + 2.0:
                    prod = _mode(N, La, sa, ca, xs) * _mode(N, Lb, sb, cb, xs) * T
                    cols.append(prod)
                    cols.append(prod / xs)
        A = np.vstack(cols).T
        coef, se, res = _lstsq(A, Wp[sel] * T)
        s_fit[idx] = coef[0]
        sub = float(coef[1]) if subleading else 0.0
        fitted.append((float(L[idx]), float(coef[0]), sub))
        info["windows"][p] = (float(xs.min()), float(xs.max()))
        info["stderr"][p] = float(se[0])
        info["sub"][p] = sub
        info["residual"][p] = res
    return s_fit, info


def fit_solution(sol: RadialSolution, rank: Rank | int, origin_window=None, far_window=None) -> FitResult:
    """Both fits bundled into a :class:`FitResult`."""
    g, c, oinfo = fit_origin(sol, origin_window)
    s_fit, finfo = fit_stokes_far_field(sol, rank, far_window)
    return FitResult(
        gamma_fit=g,
        const_fit=c,
        s_fit=s_fit,
        fit_windows={"origin": oinfo["window"], "far": finfo["windows"]},
        stderr={"gamma": oinfo["stderr_gamma"], "const": oinfo["stderr_const"], "s": finfo["stderr"]},
        sub_fit=np.array([finfo["sub"].get(p, np.nan) for p in range(1, _as_rank(rank).d + 1)]),
        rank_info={"matrix_rank": finfo["matrix_rank"], "dropped_rows": finfo["dropped_rows"]},
    )


# ---------------------------------------------------------------------------
# end-to-end comparison


def _rel(fit: float, ref: float, floor: float = 1e-12) -> float:
    return abs(fit - ref) / max(abs(ref), floor)


def connection_problem_report(
    m: Sequence[float],
    rank: Rank | int | None = None,
    solver_opts: SolverOptions | None = None,
    s_tol: float = 0.02,
    const_tol: float = 1e-2,
    zero_tol: float = 1e-6,
    **grid,
) -> dict:
    """Solve for ``m``, fit both ends and compare with the closed forms.

    ``s`` entries pass when the relative error is at most ``s_tol`` (absolute
    ``zero_tol`` when the closed-form value is zero); constants pass when the
    absolute error against ``-log chat^id`` is at most ``const_tol``.
    """
    m = np.asarray(m, dtype=float)
    r = _as_rank(rank if rank is not None else m.size)
    t0 = time.perf_counter()
    s_ref = stokes_params(m, r).essential
    const_ref = -np.log(chat_id(m, r))[: r.d]
    prob = assemble_tt_toda(r, m, **grid)
    sol = solve_bvp(prob, solver_opts)
    fit = fit_solution(sol, r)
    rows_s = []
    for p in range(r.d):
        ref, val = float(s_ref[p]), float(fit.s_fit[p])
        if abs(ref) < zero_tol:
            err, ok = abs(val - ref), abs(val - ref) <= zero_tol
        else:
            err = _rel(val, ref)
            ok = err <= s_tol
        rows_s.append({"p": p + 1, "closed_form": ref, "fitted": val, "error": err, "pass": bool(ok)})
    rows_c = []
    for i in range(r.d):
        ref, val = float(const_ref[i]), float(fit.const_fit[i])
        err = abs(val - ref)
        rows_c.append({"i": i, "closed_form": ref, "fitted": val, "error": err, "pass": bool(err <= const_tol)})
    rows_g = [
        {"i": i, "imposed": float(-m[i]), "fitted": float(fit.gamma_fit[i]), "error": abs(float(fit.gamma_fit[i]) + float(m[i]))}
        for i in range(r.d)
    ]
    elapsed = time.perf_counter() - t0
    passed = sol.converged and all(x["pass"] for x in rows_s + rows_c)
    return {
        "rank": r.np1,
        "m": m.tolist(),
        "converged": bool(sol.converged),
        "residual": float(sol.residual_norm),
        "stokes": rows_s,
        "origin_constants": rows_c,
        "origin_slopes": rows_g,
        "windows": fit.fit_windows,
        "tolerances": {"s_rel": s_tol, "const_abs": const_tol},
        "seconds": elapsed,
        "pass": bool(passed),
    }


def bessel_laplace_check(x_values: Sequence[float], factor: float = 1.5) -> list[dict]:
    """Compare ``(1/2pi) int_0^inf e^{-x(l+1/l)} dl/l`` with ``(1/2)(pi x)^{-1/2} e^{-2x}``.

    Each row carries the relative error and whether it is within ``factor/x``.
    """
    rows = []
    for x in x_values:
        x = float(x)
        if x < 1.0:
            raise ValueError("x must be at least 1")
        # compare with the common factor e^{-2x} removed
        q = bessel_laplace_integral(x, scaled=True)
        a = 0.5 * (math.pi * x) ** -0.5
        rel = abs(q - a) / q
        e2x = math.exp(-2 * x)
        rows.append({"x": x, "quadrature": q * e2x, "asymptotic": a * e2x, "scaled_quadrature": q, "scaled_asymptotic": a, "rel_error": rel, "bound": factor / x, "pass": bool(rel <= factor / x)})
    return rows
