"""The Mellin-Barnes function ``g`` and the exact solution it generates.

For real ``b_0, ..., b_n`` and ``B_i = (b_i + i)/(n+1)``,

    g(zeta) = int_{c - i inf}^{c + i inf} prod_i Gamma(B_i - t) ((n+1) zeta)^{-(n+1) t} dt,

with ``c < min B_i`` and ``|arg zeta| < pi/2``.  Two independent evaluations are
provided:

* :func:`g_quadrature` - trapezoid rule on the vertical line.  The abscissa is
  moved to the real saddle point of the integrand when ``|zeta|`` is small, so
  the exponentially small values near ``zeta = 0`` are computed without
  cancellation.
* :func:`g_residue_series` - the sum of residues at the poles ``B_i + k``, a
  convergent series in ``zeta^{-(n+1)}`` that also continues ``g`` analytically
  to every sheet of ``log zeta``.

With ``b = -m`` the functions ``g(omega^a zeta)`` and their shifts assemble
into an exact fundamental solution of the normalized equation
(:func:`exact_solution_matrix`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.special import gamma as _real_gamma
from scipy.special import loggamma

from .algebra import Rank

__all__ = [
    "MellinParams",
    "MellinSectorError",
    "ResidueConditionError",
    "make_params",
    "g_quadrature",
    "g_residue_series",
    "residue_series_condition",
    "g_eval",
    "residue_coefficient",
    "laplace_leading",
    "g_shift",
    "shift_residual",
    "scalar_ode_residual",
    "column_exponents",
    "exact_solution_matrix",
    "exact_B_inverse",
    "ode_residual",
    "cross_validation_table",
]

SWITCH_FACTOR = 2.0  # series/quadrature switchover at |zeta| = 2(n+1)


class MellinSectorError(ValueError):
    """The argument lies on or outside the sector of the integral."""


class ResidueConditionError(ValueError):
    """Poles of different gamma factors collide or are too far apart."""


@dataclass(frozen=True)
class MellinParams:
    """Parameters ``b`` of ``g`` and the abscissa of the contour."""

    b: np.ndarray
    contour_abscissa: float | None = None

    def __post_init__(self) -> None:
        b = np.asarray(self.b, dtype=float).reshape(-1)
        Rank(b.size)
        object.__setattr__(self, "b", b)
        if self.contour_abscissa is not None and not self.contour_abscissa < self.B.min():
            raise ValueError(f"contour abscissa {self.contour_abscissa} must be < min B_i = {self.B.min()}")

    @property
    def rank(self) -> Rank:
        return Rank(self.b.size)

    @property
    def np1(self) -> int:
        return self.b.size

    @property
    def B(self) -> np.ndarray:
        """Pole positions ``B_i = (b_i + i)/(n+1)``."""
        return (self.b + np.arange(self.np1)) / self.np1

    def residue_condition(self) -> bool:
        bp = self.b + np.arange(self.np1)
        diff = np.abs(bp[:, None] - bp[None, :])
        off = ~np.eye(self.np1, dtype=bool)
        return bool(np.all(diff[off] > 0) and np.all(diff[off] < self.np1))


def make_params(b: Sequence[float], c: float | None = None) -> MellinParams:
    return MellinParams(np.asarray(b, dtype=float), c)


# ---------------------------------------------------------------------------
# quadrature


def _log_integrand(B: np.ndarray, t: np.ndarray, log_nz: complex) -> np.ndarray:
    N1 = B.size
    out = np.zeros(t.shape, dtype=complex)
    for Bi in B:
        out += loggamma(Bi - t)
    return out - N1 * t * log_nz


def _auto_abscissa(p: MellinParams, zeta: complex) -> float:
    B = p.B
    gap = 0.5
    # real saddle of the integrand: B - t ~ 1/((n+1) Re zeta) + 1/2
    saddle = float(np.mean(B) + 0.5 - 1.0 / (p.np1 * max(zeta.real, 1e-300)))
    return min(float(B.min()) - gap, saddle)


def g_quadrature(params: MellinParams, zeta: complex, tol: float = 1e-10, delta: float = 1e-3, max_halvings: int = 14) -> complex:
    """``g(zeta)`` by the trapezoid rule on ``Re t = c``.

    Accuracy is relative: the step is halved until two successive sums agree to
    ``tol`` relative to their size, and the tails are cut where the integrand is
    below ``tol`` times its peak.  Gamma products are formed in log space.
    """
    zeta = complex(zeta)
    if zeta == 0 or abs(math.atan2(zeta.imag, zeta.real)) > math.pi / 2 - delta:
        raise MellinSectorError(f"zeta = {zeta} is outside |arg zeta| <= pi/2 - {delta}")
    N1 = params.np1
    B = params.B
    c = params.contour_abscissa if params.contour_abscissa is not None else _auto_abscissa(params, zeta)
    log_nz = math.log(N1) + np.log(zeta)

    def logf(y: np.ndarray) -> np.ndarray:
        return _log_integrand(B, c + 1j * y, log_nz)

    # tails: extend until the integrand has dropped below tol * peak on both sides
    y0 = np.linspace(-4.0, 4.0, 161)
    peak = float(np.max(logf(y0).real))
    cut = peak + math.log(tol) - 8.0
    lo, hi = -4.0, 4.0
    while logf(np.array([hi])).real[0] > cut:
        hi *= 2.0
    while logf(np.array([lo])).real[0] > cut:
        lo *= 2.0
    ys = np.linspace(lo, hi, 4001)
    peak = max(peak, float(np.max(logf(ys).real)))

    def trap(h: float) -> complex:
        y = np.arange(lo, hi + h / 2, h)
        lf = logf(y)
        return complex(h * np.sum(np.exp(lf - peak)))

    h = min(0.25, (hi - lo) / 64)
    prev = trap(h)
    for _ in range(max_halvings):
        h /= 2
        cur = trap(h)
        if abs(cur - prev) <= tol * abs(cur):
            return 1j * cur * math.exp(peak)
        prev = cur
    raise ArithmeticError(f"trapezoid rule did not converge for zeta = {zeta}")


# ---------------------------------------------------------------------------
# residue series


def residue_coefficient(params: MellinParams, i: int) -> complex:
    """Leading coefficient ``C_i`` of ``zeta^{-(b_i + i)}`` at infinity.

    ``C_i = 2 pi i (n+1)^{-(b_i+i)} prod_{j != i} Gamma(B_j - B_i)``; for ``i = 0``
    this is the closed form ``2 pi i (n+1)^{-b_0} prod Gamma((b_j - b_0 + j)/(n+1))``.
    """
    if not params.residue_condition():
        raise ResidueConditionError("residue condition 0 < |b'_i - b'_j| < n+1 fails")
    B = params.B
    N1 = params.np1
    prod = 1.0
    for j in range(N1):
        if j != i:
            prod *= _real_gamma(B[j] - B[i])
    return 2j * math.pi * N1 ** (-N1 * B[i]) * prod


def g_residue_series(params: MellinParams, zeta: complex, K_terms: int | None = 5, arg: float | None = None, rtol: float = 1e-17) -> complex:
    """Sum of residues: ``sum_i C_i zeta^{-(b_i+i)} (1 + sum_k c_ik zeta^{-(n+1)k})``.

    The residue of ``Gamma(u - t)`` at ``u + k`` is ``-(-1)^k/k!``.  With
    ``K_terms=None`` the (convergent) series is summed until the terms fall below
    ``rtol`` relative to the largest term.  ``arg`` selects the sheet of
    ``log zeta`` (default: principal).
    """
    return _residue_sum(params, zeta, K_terms, arg, rtol)[0]


def residue_series_condition(params: MellinParams, zeta: complex, arg: float | None = None) -> float:
    """Largest term over the sum of the converged series.

    Multiplied by the unit roundoff this bounds the cancellation error; near
    ``zeta = 0``, where ``g`` is exponentially small, it is huge.
    """
    total, biggest = _residue_sum(params, zeta, None, arg, 1e-17)
    return float(2 * math.pi * biggest / max(abs(total), 1e-300))


def _residue_sum(params: MellinParams, zeta: complex, K_terms: int | None, arg: float | None, rtol: float) -> tuple[complex, float]:
    if not params.residue_condition():
        raise ResidueConditionError("residue condition 0 < |b'_i - b'_j| < n+1 fails")
    zeta = complex(zeta)
    if zeta == 0:
        raise ValueError("zeta must be nonzero")
    N1 = params.np1
    B = params.B
    phi = math.atan2(zeta.imag, zeta.real) if arg is None else float(arg)
    log_nz = math.log(N1 * abs(zeta)) + 1j * phi
    total = 0j
    biggest = 0.0
    for i in range(N1):
        prod = 1.0
        for j in range(N1):
            if j != i:
                prod *= _real_gamma(B[j] - B[i])
        base = np.exp(-N1 * B[i] * log_nz)
        step = np.exp(-N1 * log_nz)
        k = 0
        term_pow = base
        coef = prod
        while True:
            term = coef * term_pow
            total += term
            biggest = max(biggest, abs(term))
            k += 1
            if K_terms is not None and k > K_terms:
                break
            # Gamma(x - k) = Gamma(x - k + 1)/(x - k); (-1)^k/k! updates by -1/k
            den = np.prod([B[j] - B[i] - k for j in range(N1) if j != i])
            coef = coef * (-1.0 / k) / den
            term_pow = term_pow * step
            if K_terms is None and abs(coef * term_pow) < rtol * max(biggest, 1e-300) and k > 2:
                break
            if k > 5000:
                raise ArithmeticError("residue series did not converge")
    return complex(2j * math.pi * total), biggest


def g_eval(params: MellinParams, zeta: complex, arg: float | None = None, tol: float = 1e-11) -> complex:
    """``g`` on any sheet: quadrature inside the sector at moderate ``|zeta|``, series otherwise."""
    zeta = complex(zeta)
    phi = math.atan2(zeta.imag, zeta.real) if arg is None else float(arg)
    inside = abs(phi) < math.pi / 2 - 0.15
    if inside and abs(zeta) < SWITCH_FACTOR * params.np1:
        p = replace(params, contour_abscissa=None)
        return g_quadrature(p, abs(zeta) * complex(math.cos(phi), math.sin(phi)), tol=tol)
    return g_residue_series(params, zeta, K_terms=None, arg=phi)


def laplace_leading(params: MellinParams, zeta: complex) -> complex:
    """Leading term of ``g`` as ``zeta -> 0`` inside the sector."""
    N1 = params.np1
    sb = float(np.sum(params.b)) / N1
    zeta = complex(zeta)
    return 1j * (2 * math.pi) ** ((N1 + 1) / 2.0) * N1 ** (-0.5 - sb) * zeta ** (-sb) * np.exp(-1.0 / zeta)


# ---------------------------------------------------------------------------
# shifts and differential identities


def g_shift(params: MellinParams) -> MellinParams:
    """Parameters of ``g^[1] = zeta (zeta d/dzeta + b_0) g``: ``b`` rotated left.

    The contour moves left by ``1/(n+1)`` so that it stays to the left of the
    relabelled poles.
    """
    c = params.contour_abscissa
    return MellinParams(np.roll(params.b, -1), None if c is None else c - 1.0 / params.np1)


def _euler_derivative(f, zeta: complex, h: float | None = None) -> complex:
    """``zeta f'(zeta)`` by a 4th-order central difference in ``log zeta``."""
    h = h or 1e-3
    lz = np.log(complex(zeta))
    vals = [f(np.exp(lz + s * h)) for s in (-2, -1, 1, 2)]
    return (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)


def shift_residual(params: MellinParams, zeta: complex, h: float = 1e-3) -> float:
    """Relative residual of ``zeta (zeta g' + b_0 g) = g^[1]``."""
    f = lambda z: g_eval(params, z)
    lhs = complex(zeta) * (_euler_derivative(f, zeta, h) + params.b[0] * f(zeta))
    rhs = g_eval(g_shift(params), zeta)
    return abs(lhs - rhs) / abs(rhs)


def scalar_ode_residual(params: MellinParams, zeta: complex, h: float | None = None) -> float:
    """Relative residual of ``zeta(theta + b_n) ... zeta(theta + b_0) g = g``.

    Each first-order factor is applied by numerical differentiation of the
    previous stage, evaluated on a small log-polar stencil, so the identity is
    checked without using the shift formula.  The default step
    ``0.02 min(1, |zeta|)`` balances the ``(h/|zeta|)^4`` truncation error (``g``
    varies like ``e^{-1/zeta}`` near 0) against roundoff amplified by the
    nested differences.
    """
    N1 = params.np1
    zeta = complex(zeta)
    if h is None:
        h = 0.02 * min(1.0, abs(zeta))

    def stage(k: int, z: complex) -> complex:
        if k == 0:
            return g_eval(params, z)
        prev = lambda w: stage(k - 1, w)
        return z * (_euler_derivative(prev, z, h) + params.b[k - 1] * prev(z))

    if N1 > 3:
        # the nested stencil grows as 4^k; cascade through the shift identity
        # for all but the last three factors
        p = params
        for _ in range(N1 - 3):
            p = g_shift(p)
        sub = MellinParams(p.b)

        def stage_sub(k: int, z: complex) -> complex:
            if k == 0:
                return g_eval(sub, z)
            prev = lambda w: stage_sub(k - 1, w)
            return z * (_euler_derivative(prev, z, h) + params.b[N1 - 3 + k - 1] * prev(z))

        lhs = stage_sub(3, zeta)
    else:
        lhs = stage(N1, zeta)
    rhs = g_eval(params, zeta)
    return abs(lhs - rhs) / abs(rhs)


# ---------------------------------------------------------------------------
# exact solution of the normalized equation


def column_exponents(rank: Rank) -> np.ndarray:
    """``a_c`` such that column ``c`` of the exact solution uses ``g(omega^{a_c} zeta)``.

    Even ``n+1``: ``g(zeta)`` sits in column ``(n+1)/2`` and ``a_c = (n+1)/2 - c``.
    Odd ``n+1``: half-integer rotations ``a_c = d - c + 1/2`` supply the sign
    ``(-1)^{n+1}`` needed to close the cycle of shifts.
    """
    c = np.arange(rank.np1)
    if rank.is_even:
        return rank.np1 // 2 - c + 0.0
    return rank.d - c + 0.5


def exact_solution_matrix(m: Sequence[float], zeta: complex, arg: float | None = None, tol: float = 1e-11) -> np.ndarray:
    """The exact solution ``X(zeta)`` built from ``g^{-m}`` and its shifts.

    ``X[k, c] = (-1)^k omega^{-k a_c} g^[k](omega^{a_c} zeta)``, so that row
    ``k+1`` is ``-zeta(zeta d/dzeta - m_k)`` applied to row ``k``.
    """
    m = np.asarray(m, dtype=float)
    rank = Rank(m.size)
    N1 = rank.np1
    zeta = complex(zeta)
    phi = math.atan2(zeta.imag, zeta.real) if arg is None else float(arg)
    a = column_exponents(rank)
    shifted = [MellinParams(np.roll(-m, -k)) for k in range(N1)]
    X = np.empty((N1, N1), dtype=complex)
    for c in range(N1):
        ph = phi + 2 * math.pi * a[c] / N1
        w = abs(zeta) * complex(math.cos(ph), math.sin(ph))
        for k in range(N1):
            val = g_eval(shifted[k], w, arg=ph, tol=tol)
            X[k, c] = (-1) ** k * np.exp(-2j * math.pi * k * a[c] / N1) * val
    return X


def exact_B_inverse(m: Sequence[float]) -> np.ndarray:
    """``lim zeta^{-m} X(zeta)`` read off from the leading residue coefficients.

    Row ``k`` comes from the leading term ``C_0^[k] zeta^{m_k}`` of ``g^[k]``:
    ``(-1)^k C_0^[k] omega^{a_c (m_k - k)}``.
    """
    m = np.asarray(m, dtype=float)
    rank = Rank(m.size)
    N1 = rank.np1
    a = column_exponents(rank)
    out = np.empty((N1, N1), dtype=complex)
    for k in range(N1):
        C = residue_coefficient(MellinParams(np.roll(-m, -k)), 0)
        out[k] = (-1) ** k * C * np.exp(2j * math.pi * a * (m[k] - k) / N1)
    return out


def ode_residual(m: Sequence[float], zeta: complex, h: float = 1e-4) -> float:
    """Relative residual of ``X' = (-Pi/zeta^2 + m/zeta) X`` by central differences."""
    m = np.asarray(m, dtype=float)
    N1 = m.size
    zeta = complex(zeta)
    Pi = np.roll(np.eye(N1), 1, axis=1)
    X = exact_solution_matrix(m, zeta)
    dz = h * abs(zeta)
    Xp = exact_solution_matrix(m, zeta + dz)
    Xm = exact_solution_matrix(m, zeta - dz)
    Xp2 = exact_solution_matrix(m, zeta + 2 * dz)
    Xm2 = exact_solution_matrix(m, zeta - 2 * dz)
    dX = (Xm2 - 8 * Xm + 8 * Xp - Xp2) / (12 * dz)
    A = -Pi / zeta**2 + np.diag(m) / zeta
    return float(np.max(np.abs(dX - A @ X)) / np.max(np.abs(X)))


def cross_validation_table(m: Sequence[float], zetas: Sequence[complex], tol: float = 1e-12, overlap_digits: float = 9.0) -> list[dict]:
    """``g^{-m}`` at each ``zeta`` by both routes, with the identity residuals.

    Columns: quadrature and series values and their relative difference
    (``None`` outside the quadrature sector), the series condition number, an
    ``in_overlap`` flag (inside the sector and condition number small enough
    for ``overlap_digits`` correct digits), the shift and scalar-equation
    residuals, and the ratio of ``g`` to its Laplace leading term.
    """
    params = MellinParams(-np.asarray(m, dtype=float))
    eps = np.finfo(float).eps
    rows = []
    for z in zetas:
        z = complex(z)
        phi = math.atan2(z.imag, z.real)
        inside = abs(phi) < math.pi / 2
        ser = g_residue_series(params, z, K_terms=None)
        cond = residue_series_condition(params, z)
        quad = g_quadrature(params, z, tol=tol) if inside else None
        diff = abs(quad - ser) / abs(quad) if inside else None
        best = quad if inside else ser
        rows.append(
            {
                "zeta": z,
                "g_quadrature": quad,
                "g_series": ser,
                "rel_difference": diff,
                "series_condition": cond,
                "in_overlap": bool(inside and cond * eps < 10.0 ** (-overlap_digits)),
                "shift_residual": shift_residual(params, z),
                "scalar_ode_residual": scalar_ode_residual(params, z),
                "laplace_ratio": best / laplace_leading(params, z) if inside else None,
            }
        )
    return rows
