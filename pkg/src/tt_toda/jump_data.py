"""Jump data of the Riemann-Hilbert problem at large ``|t|``.

The contour in the punctured ``zeta``-plane is the union of the ``2n+2``
singular directions, taken in the reference sector ``[theta_1, theta_1 + 2 pi)``
at zero, together with the circle ``|zeta| = x^2``.  On the infinity rays the
jump is ``Gt(zeta) = e(zeta) Qt_k e(zeta)^{-1}`` with
``e(zeta) = exp(d^{-1}/zeta) exp(x^2 zeta d)``.  Parametrizing a ray by
``l = x |zeta|`` gives

    Gt = I + sum_{i != j} exp(-x (l + 1/l) L_|j-i|) s_ij e_ij.

Only the explicitly displayed first-order consequence of the problem is
evaluated here (:func:`first_order_reconstruction`); the singular integral
equation itself is not solved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .algebra import Rank, structure
from .spectral import (
    E1_id,
    Q_infinity,
    Q_period,
    Q_zero,
    StokesData,
    as_ray,
    bessel_laplace_integral,
    build_Qtilde,
    ray_angle,
    ray_support,
)

__all__ = [
    "Ray",
    "ContourSpec",
    "build_contour",
    "infinity_angle",
    "build_jump",
    "build_jump_conjugated",
    "jump_decay_fit",
    "z_initial",
    "z_matrix_chain",
    "rh_condition_residual",
    "rh_reality_residual",
    "monodromy_consistency_residual",
    "first_order_matrix",
    "first_order_reconstruction",
    "hatw_shape_residual",
    "conjugation_residual",
    "z_chain_residual",
    "identity_report",
    "ValidityError",
]

TWO_PI = 2.0 * math.pi


class ValidityError(ValueError):
    """``x`` is below the range where the first-order formula is meaningful."""


def _as_rank(rank: Rank | int) -> Rank:
    return rank if isinstance(rank, Rank) else Rank(int(rank))


def _step(rank: Rank) -> Fraction:
    return Fraction(1, rank.np1)


def _opposite_shift(rank: Rank) -> Fraction:
    """``c`` with ``Psi^inf_k = Psi^0_{c-k} Z_{c-k}``."""
    N = rank.np1
    return Fraction(2 * rank.n + 1, N) if rank.is_even else Fraction(2)


def _reflect_index(rank: Rank) -> Fraction:
    """``c'`` in the identities ``Q^inf_k ~ (Q^0_{c'-k})^{-1}`` and the reality condition."""
    return _opposite_shift(rank) - _step(rank)


@dataclass(frozen=True)
class Ray:
    """One singular direction of the contour.

    ``angle`` lies in the reference sector; ``k_zero`` and ``k_infinity`` are
    the indices under which it appears as ``theta^(0)`` and ``theta^(inf)``.
    Rays are oriented away from the origin.
    """

    angle: float
    k_zero: Fraction
    k_infinity: Fraction
    outward: bool = True


@dataclass(frozen=True)
class ContourSpec:
    rank: Rank
    x: float
    rays: tuple[Ray, ...]
    circle_radius: float
    circle_positive: bool = True

    @property
    def sector(self) -> tuple[float, float]:
        a = ray_angle(1, self.rank)
        return a, a + TWO_PI


def infinity_angle(k, rank: Rank | int) -> float:
    """``theta^(inf)_k = -theta^(0)_k``."""
    r = _as_rank(rank)
    return -ray_angle(k, r)


def build_contour(rank: Rank | int, x: float) -> ContourSpec:
    """The ``2n+2`` rays (sorted by angle) and the circle ``|zeta| = x^2``."""
    r = _as_rank(rank)
    if not x > 0:
        raise ValueError("x must be positive")
    N = r.np1
    lo = ray_angle(1, r)
    c = _reflect_index(r)
    rays = []
    for j in range(2 * N):
        k0 = Fraction(1) - Fraction(j, N)
        ang = ray_angle(k0, r)
        # theta^(inf)_{c'-k} = theta^(0)_k
        rays.append(Ray(angle=ang, k_zero=k0, k_infinity=c - k0))
    rays.sort(key=lambda q: q.angle)
    angles = [q.angle for q in rays]
    assert angles[0] >= lo - 1e-12 and angles[-1] < lo + TWO_PI
    assert all(b - a > 1e-9 for a, b in zip(angles, angles[1:]))
    return ContourSpec(rank=r, x=float(x), rays=tuple(rays), circle_radius=float(x) ** 2)


def _L(rank: Rank, p: int) -> float:
    return 2.0 * math.sin(abs(p) * math.pi / rank.np1)


def build_jump(k, l: float, s: StokesData, x: float) -> np.ndarray:
    """``Gt`` on the infinity ray ``theta^(inf)_k`` at ``l = x |zeta|``, explicit form."""
    if not (l > 0 and x > 0):
        raise ValueError("l and x must be positive")
    r = s.rank
    Qt = build_Qtilde(as_ray(k, r), s)
    G = np.eye(r.np1)
    for i, j in ray_support(k, r):
        G[i, j] = math.exp(-x * (l + 1.0 / l) * _L(r, j - i)) * Qt[i, j]
    return G


def build_jump_conjugated(k, l: float, s: StokesData, x: float) -> np.ndarray:
    """``e(zeta) Qt^(inf)_k e(zeta)^{-1}`` at ``zeta = (l/x) e^{i theta^(inf)_k}``.

    The conjugation is done entrywise in the exponent, so large ``x`` does not
    overflow.  Returns a complex matrix (real up to rounding).
    """
    r = s.rank
    N = r.np1
    zeta = (l / x) * np.exp(1j * infinity_angle(k, r))
    om = np.exp(2j * np.pi * np.arange(N) / N)
    # log e(zeta) = diag(omega^{-i}/zeta + x^2 zeta omega^i)
    le = np.conj(om) / zeta + x * x * zeta * om
    Qt = build_Qtilde(as_ray(k, r), s).astype(complex)
    return Qt * np.exp(le[:, None] - le[None, :])


def jump_decay_fit(s: StokesData, k, xs: Sequence[float] = tuple(np.linspace(3, 10, 15))) -> dict:
    """Log-linear fit of ``max_{l} |Gt - I|`` over ``x`` on one ray.

    The maximum over ``l`` sits at ``l = 1``; per entry the decay rate is
    ``2 L_|j-i|`` and the fitted constant estimates ``A_|j-i|``.
    """
    r = s.rank
    xs = np.asarray(xs, dtype=float)
    lgrid = np.exp(np.linspace(-2, 2, 81))
    out = {}
    for i, j in sorted(ray_support(k, r)):
        vals = []
        for x in xs:
            vals.append(max(abs(build_jump(k, l, s, x)[i, j]) for l in lgrid))
        vals = np.asarray(vals)
        if np.all(vals == 0):
            out[(i, j)] = {"rate": None, "A": 0.0}
            continue
        slope, icpt = np.polyfit(xs, np.log(vals), 1)
        out[(i, j)] = {"rate": -slope, "expected_rate": 2 * _L(r, j - i), "A": math.exp(icpt)}
    return out


# ---------------------------------------------------------------------------
# the Z-chain


def z_initial(E1: np.ndarray, s: StokesData) -> np.ndarray:
    """``Z_1`` from ``E_1`` (``E_1 = Z_1 Q^inf_{n/(n+1)}`` when ``n+1`` is even, ``Z_1 = E_1`` otherwise)."""
    r = s.rank
    E1 = np.asarray(E1, dtype=complex)
    if r.is_even:
        return E1 @ np.linalg.inv(Q_infinity(Fraction(r.n, r.np1), s))
    return E1.copy()


def z_matrix_chain(E1: np.ndarray, s: StokesData, periods: int = 1) -> dict[Fraction, np.ndarray]:
    """``k -> Z_k`` for ``k = 1, 1 + 1/(n+1), ...`` over ``periods`` periods.

    ``Z_{k+1/(n+1)} = (Q^0_k)^{-1} Z_k (Q^inf_{c'-k})^{-1}``.
    """
    r = s.rank
    st = _step(r)
    c = _reflect_index(r)
    Z = z_initial(E1, s)
    k = Fraction(1)
    out = {k: Z}
    for _ in range(2 * r.np1 * periods):
        Z = np.linalg.solve(Q_zero(k, s), Z) @ np.linalg.inv(Q_infinity(c - k, s))
        k = k + st
        out[k] = Z
    return out


def rh_condition_residual(s: StokesData) -> float:
    """Max over one period of ``|Q^inf_k - (C/N)^{-1} (Q^0_{c'-k})^{-1} (C/N)|``."""
    r = s.rank
    S = structure(r.np1)
    Cn = S.C / r.np1
    Cn_inv = np.linalg.inv(Cn)
    c = _reflect_index(r)
    worst = 0.0
    for k in Q_period(r):
        rhs = Cn_inv @ np.linalg.inv(Q_zero(c - k, s)) @ Cn
        worst = max(worst, float(np.max(np.abs(Q_infinity(k, s) - rhs))))
    return worst


def rh_reality_residual(s: StokesData) -> float:
    """Max over one period of ``|Q^0_k - C conj(Q^0_{c'-k})^{-1} C|``."""
    r = s.rank
    C = structure(r.np1).C
    c = _reflect_index(r)
    worst = 0.0
    for k in Q_period(r):
        rhs = C @ np.linalg.inv(np.conj(Q_zero(c - k, s))) @ C
        worst = max(worst, float(np.max(np.abs(Q_zero(k, s) - rhs))))
    return worst


def _stokes_matrix(Qf, k: Fraction, rank: Rank) -> np.ndarray:
    st = _step(rank)
    S = np.eye(rank.np1, dtype=complex)
    for j in range(rank.np1):
        S = S @ Qf(k + j * st)
    return S


def monodromy_consistency_residual(s: StokesData, E1: np.ndarray | None = None) -> float:
    """``|E_1^{-1} S^0_1 S^0_2 E_1 S^inf_1 S^inf_2 - I|``.

    Continuing ``Psi^inf_1 = Psi^0_1 E_1`` once around the origin must give the
    same result whether the loop is read at zero or at infinity.
    """
    r = s.rank
    E = E1_id(s) if E1 is None else np.asarray(E1, dtype=complex)
    M0 = _stokes_matrix(lambda q: Q_zero(q, s), Fraction(1), r) @ _stokes_matrix(lambda q: Q_zero(q, s), Fraction(2), r)
    Mi = _stokes_matrix(lambda q: Q_infinity(q, s), Fraction(1), r) @ _stokes_matrix(lambda q: Q_infinity(q, s), Fraction(2), r)
    R = np.linalg.solve(E, M0 @ E) @ Mi
    return float(np.max(np.abs(R - np.eye(r.np1))))


# ---------------------------------------------------------------------------
# first-order reconstruction of w


def first_order_matrix(s: StokesData, x: float) -> np.ndarray:
    """``(1/2 pi i) int_Gamma (Gt - I) dzeta/zeta`` over all infinity rays.

    On a ray ``dzeta/zeta = dl/l``, so entry ``(i, j)`` is
    ``(s_ij/i) B(x L_|j-i|)`` with ``B(y) = (1/2pi) int_0^inf e^{-y(l+1/l)} dl/l``.
    Every off-diagonal position lies on exactly one ray per turn.
    """
    r = s.rank
    N = r.np1
    out = np.zeros((N, N), dtype=complex)
    B = {p: bessel_laplace_integral(x * _L(r, p)) for p in range(1, N)}
    seen = set()
    for j in range(2 * N):
        k = Fraction(1) - Fraction(j, N)
        Qt = build_Qtilde(k, s)
        for a, b in ray_support(k, r):
            if (a, b) in seen:
                raise AssertionError("an entry lies on two rays")
            seen.add((a, b))
            out[a, b] = Qt[a, b] * B[abs(b - a)] / 1j
    return out


def first_order_reconstruction(s: StokesData | Sequence[float], x: float, rank: Rank | int | None = None, x_min: float = 5.0) -> np.ndarray:
    """Leading-order ``w_0..w_n`` at ``|t| = x`` from the Stokes parameters.

    ``Yt(0) - I`` to first order equals ``sum_p hat w_p PiHat^p``; reading off
    ``hat w_p`` from the first row and inverting ``hat w = d^{-1/2} Omega^{-1}(-2 w)``
    gives ``w``.  Odd ``n+1`` is handled through the doubled system of size
    ``2(n+1)``.
    """
    if not isinstance(s, StokesData):
        r = _as_rank(rank if rank is not None else 2 * len(s))
        s = StokesData.from_essential(r, s)
    r = s.rank
    if x < x_min:
        raise ValidityError(f"x = {x} is below the validity floor {x_min}")
    N = r.np1
    if not r.is_even:
        # w -> (w, -w reversed) is a solution of twice the size with
        # s#_{2i} = s_i and s#_{odd} = 0
        r2 = Rank(2 * N)
        s2 = np.zeros(r2.d)
        s2[1::2] = s.essential
        w2 = first_order_reconstruction(StokesData.from_essential(r2, s2), x, x_min=x_min)
        return w2[:N]
    S = structure(N)
    Y1 = first_order_matrix(s, x)
    hw = np.zeros(N, dtype=complex)
    hw[1:] = Y1[0, 1:]
    w = -0.5 * (S.Omega @ (np.diag(S.half_d) * hw))
    return w.real


def hatw_shape_residual(s: StokesData, x: float) -> float:
    """Distance of :func:`first_order_matrix` from the span of ``PiHat^p`` (even ``n+1``)."""
    rank = s.rank
    Y1 = first_order_matrix(s, x)
    S = structure(rank.np1)
    hw = Y1[0].copy()
    R = np.zeros_like(Y1)
    P = np.eye(rank.np1, dtype=complex)
    for p in range(rank.np1):
        R = R + hw[p] * P
        P = P @ S.PiHat
    return float(np.max(np.abs(Y1 - R)))


def conjugation_residual(s: StokesData, x: float, ls: Sequence[float] = (0.25, 0.5, 1.0, 2.0, 4.0)) -> float:
    """Max over all rays and sample ``l`` of ``|build_jump - build_jump_conjugated|``."""
    worst = 0.0
    for ray in build_contour(s.rank, x).rays:
        for l in ls:
            G1 = build_jump(ray.k_infinity, l, s, x)
            G2 = build_jump_conjugated(ray.k_infinity, l, s, x)
            worst = max(worst, float(np.max(np.abs(G1 - G2))))
    return worst


def z_chain_residual(s: StokesData, E1: np.ndarray | None = None, periods: int = 1) -> float:
    """Max ``|Z_k - C/(n+1)|`` along the chain started from ``E_1`` (default ``E_1^id``)."""
    r = s.rank
    target = structure(r.np1).C / r.np1
    E = E1_id(s) if E1 is None else E1
    return max(float(np.max(np.abs(Z - target))) for Z in z_matrix_chain(E, s, periods).values())


def identity_report(s: StokesData, x: float = 6.0) -> dict:
    """All jump-data identities for one set of Stokes parameters."""
    contour = build_contour(s.rank, x)
    return {
        "rays": [{"angle": q.angle, "k_zero": str(q.k_zero), "k_infinity": str(q.k_infinity)} for q in contour.rays],
        "circle_radius": contour.circle_radius,
        "conjugation_residual": conjugation_residual(s, x),
        "rh_condition_residual": rh_condition_residual(s),
        "rh_reality_residual": rh_reality_residual(s),
        "z_chain_residual": z_chain_residual(s),
        "monodromy_consistency_residual": monodromy_consistency_residual(s),
        "decay_fit": {f"{i},{j}": v for (i, j), v in jump_decay_fit(s, 1).items()},
        "w_first_order": first_order_reconstruction(s, x),
    }
