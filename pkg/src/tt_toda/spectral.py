"""Closed-form monodromy data.

Everything here is explicit: the asymptotic data ``(m, chat)`` obtained from the
holomorphic data ``c_i z**k_i``, the Stokes parameters ``s_i`` and Stokes
factors, the monodromy matrix and its characteristic polynomial, the
connection matrices ``D_1`` and ``E_1`` together with the eigenvalues ``e_i``,
and the predicates that single out global solutions.

Ray indices ``k`` live in ``(1/(n+1)) Z`` and are handled as
:class:`fractions.Fraction` so that sector bookkeeping is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._gamma import GammaPoleError, gamma
from .algebra import Rank, d_power, is_sl_delta_real, structure

__all__ = [
    "ModelInput",
    "AsymptoticData",
    "StokesData",
    "ConnectionData",
    "NonGenericError",
    "as_ray",
    "derive_asymptotic",
    "asymptotic_from_m",
    "mprime",
    "t_of_z",
    "h_of_t",
    "stokes_params",
    "ray_angle",
    "ray_support",
    "build_Qtilde",
    "Qtilde_to_Q",
    "Q_zero",
    "Q_infinity",
    "Q_period",
    "build_M",
    "build_Mtilde",
    "char_poly",
    "expected_char_poly",
    "invert_stokes",
    "gamma_diag",
    "vandermonde",
    "kappa",
    "connection_eigs",
    "chat_id",
    "companion_form",
    "companion_conjugator",
    "cyclic_K",
    "build_D1",
    "build_E1",
    "E1_id",
    "global_criterion",
    "positivity_region_test",
    "bessel_laplace_integral",
]


class NonGenericError(ValueError):
    """Input lies outside the open region of generic asymptotic data."""


# ---------------------------------------------------------------------------
# data types


@dataclass(frozen=True)
class ModelInput:
    """Holomorphic data ``p_i(z) = c_i z**k_i`` with ``p_i = p_{n-i+1}``."""

    rank: Rank
    c: np.ndarray
    k: np.ndarray

    def __post_init__(self) -> None:
        N = self.rank.np1
        c = np.asarray(self.c, dtype=float).reshape(-1)
        k = np.asarray(self.k, dtype=float).reshape(-1)
        if c.shape != (N,) or k.shape != (N,):
            raise ValueError(f"c and k must have length n+1 = {N}")
        if np.any(c <= 0):
            raise ValueError("all c_i must be > 0")
        if np.any(k <= -1):
            raise NonGenericError("k_i <= -1: non-generic")
        for i in range(N):
            j = (N - i) % N  # p_i = p_{n-i+1}
            if not (math.isclose(c[i], c[j], rel_tol=1e-12) and math.isclose(k[i], k[j], rel_tol=1e-12, abs_tol=1e-14)):
                raise ValueError(f"symmetry p_i = p_(n-i+1) violated at i={i}")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "k", k)


@dataclass(frozen=True)
class AsymptoticData:
    """The data ``m`` and ``chat`` describing a solution at ``t = 0``."""

    rank: Rank
    m: np.ndarray
    chat: np.ndarray
    N: float | None = None
    c_prod: float | None = None

    @property
    def m_prime(self) -> np.ndarray:
        return self.m - np.arange(self.rank.np1)

    def mp(self, i: int) -> float:
        return mprime(self.m, i)


@dataclass(frozen=True)
class StokesData:
    """Stokes parameters ``s_0..s_{n+1}`` with ``s_0 = s_{n+1} = 1``."""

    rank: Rank
    s: np.ndarray  # full vector, length n+2

    @property
    def essential(self) -> np.ndarray:
        return self.s[1 : self.rank.d + 1].copy()

    def __getitem__(self, i: int) -> float:
        return float(self.s[i])

    @classmethod
    def from_essential(cls, rank: Rank, s_ess: Sequence[float]) -> "StokesData":
        s_ess = np.asarray(s_ess, dtype=float).reshape(-1)
        if s_ess.shape != (rank.d,):
            raise ValueError(f"expected {rank.d} essential Stokes parameters")
        N = rank.np1
        s = np.ones(N + 1)
        for i in range(1, N):
            s[i] = s_ess[min(i, N - i) - 1]
        return cls(rank, s)


@dataclass
class ConnectionData:
    rank: Rank
    Gamma_m: np.ndarray
    V_m: np.ndarray
    P_m: np.ndarray
    D1: np.ndarray  # the connection matrix of the normalized equation
    K: np.ndarray
    e: np.ndarray
    E1: np.ndarray | None = None
    E1_id: np.ndarray | None = None
    extras: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# asymptotic data


def _rank(rank: Rank | int) -> Rank:
    return rank if isinstance(rank, Rank) else Rank(int(rank))


def derive_asymptotic(inp: ModelInput) -> AsymptoticData:
    """Compute ``m``, ``chat``, ``N`` and ``c = prod c_i`` from ``(c_i, k_i)``."""
    r = inp.rank
    N1 = r.np1
    Nsum = float(np.sum(inp.k + 1.0))
    cprod = float(np.prod(inp.c))
    # m_{i-1} - m_i = -1 + (n+1)(k_i+1)/N
    delta = -1.0 + N1 * (inp.k + 1.0) / Nsum
    m = np.zeros(N1)
    for i in range(1, N1):
        m[i] = m[i - 1] - delta[i]
    m -= m.mean()
    m = 0.5 * (m - m[::-1])  # impose m_i + m_{n-i} = 0 exactly
    # log chat_{i-1} - log chat_i = (m_i - m_{i-1}) log((n+1)/N) + log c_i - (k_i+1)/N log c
    lratio = (m - np.roll(m, 1)) * math.log(N1 / Nsum) + np.log(inp.c) - (inp.k + 1.0) / Nsum * math.log(cprod)
    lc = np.zeros(N1)
    for i in range(1, N1):
        lc[i] = lc[i - 1] - lratio[i]
    lc -= lc.mean()
    lc = 0.5 * (lc - lc[::-1])
    return AsymptoticData(r, m, np.exp(lc), Nsum, cprod)


def _check_generic(m: np.ndarray, tol: float = 0.0) -> None:
    gaps = np.roll(m, 1) - m  # m_{i-1} - m_i, cyclically
    if np.any(gaps <= -1.0 + tol):
        i = int(np.argmin(gaps))
        raise NonGenericError(f"m_(i-1) - m_i = {gaps[i]:.6g} <= -1 at i={i}: non-generic")


def asymptotic_from_m(m: Sequence[float], chat: Sequence[float] | None = None, rank: Rank | int | None = None) -> AsymptoticData:
    """Wrap an ``m`` vector (and optional ``chat``) as :class:`AsymptoticData`.

    ``m`` must satisfy ``m_i + m_{n-i} = 0`` and lie in the open region.
    """
    m = np.asarray(m, dtype=float).reshape(-1)
    r = _rank(rank if rank is not None else m.size)
    if m.size != r.np1:
        raise ValueError(f"m must have length n+1 = {r.np1}")
    if np.max(np.abs(m + m[::-1])) > 1e-10:
        raise ValueError("m must satisfy m_i + m_(n-i) = 0")
    m = 0.5 * (m - m[::-1])
    _check_generic(m)
    if chat is None:
        ch = np.ones(r.np1)
    else:
        ch = np.asarray(chat, dtype=float).reshape(-1)
        if ch.size != r.np1 or np.any(ch <= 0):
            raise ValueError("chat must be a positive vector of length n+1")
    return AsymptoticData(r, m, ch)


def mprime(m: np.ndarray, i: int) -> float:
    """``m'_i = m_i - i`` extended by ``m'_{i+n+1} = m'_i - (n+1)``."""
    N = len(m)
    q, j = divmod(i, N)
    return float(m[j] - j - q * N)


def t_of_z(z: float, data: AsymptoticData) -> float:
    """``t = ((n+1)/N) c**(1/(n+1)) z**(N/(n+1))`` for real ``z > 0``."""
    if isinstance(z, complex) and z.imag != 0:
        raise ValueError("only z on the positive real axis is supported")
    z = float(np.real(z))
    if z <= 0:
        raise ValueError("z must be > 0")
    N1 = data.rank.np1
    Nsum = data.N if data.N is not None else N1
    c = data.c_prod if data.c_prod is not None else 1.0
    return N1 / Nsum * c ** (1.0 / N1) * z ** (Nsum / N1)


def h_of_t(t: float, data: AsymptoticData) -> np.ndarray:
    """``h = chat * t**m`` (a real diagonal matrix for ``t > 0``)."""
    if t <= 0:
        raise ValueError("t must be > 0")
    return np.diag(data.chat * t ** data.m)


# ---------------------------------------------------------------------------
# Stokes data


def _shift(rank: Rank) -> float:
    # roots of the char. polynomial are omega**(m'_j + shift)
    return rank.n / 2.0


def stokes_params(data: AsymptoticData | Sequence[float], rank: Rank | int | None = None) -> StokesData:
    """``s_i`` = i-th elementary symmetric function of ``omega**(m_j - j + n/2)``."""
    m = data.m if isinstance(data, AsymptoticData) else np.asarray(data, dtype=float)
    r = data.rank if isinstance(data, AsymptoticData) else _rank(rank if rank is not None else len(m))
    N1 = r.np1
    mp_ = m - np.arange(N1)
    roots = np.exp(2j * np.pi * (mp_ + _shift(r)) / N1)
    # expand prod (1 + x r_j) to read off elementary symmetric functions
    e = np.array([1.0 + 0j])
    for z in roots:
        e = np.concatenate([e, [0]]) + np.concatenate([[0], e * z])
    if np.max(np.abs(e.imag)) > 1e-10:
        raise ArithmeticError("Stokes parameters are not real")
    s = e.real.copy()
    s[0] = s[-1] = 1.0
    s = 0.5 * (s + s[::-1])
    return StokesData(r, s)


def as_ray(k: Fraction | int | float | str, rank: Rank) -> Fraction:
    """Convert a ray index to an exact fraction with denominator dividing n+1."""
    if isinstance(k, Fraction):
        q = k
    elif isinstance(k, (int, np.integer)):
        q = Fraction(int(k))
    elif isinstance(k, str):
        q = Fraction(k)
    else:
        q = Fraction(k).limit_denominator(rank.np1)
        if abs(float(q) - float(k)) > 1e-12:
            raise ValueError(f"ray index {k} is not in (1/(n+1))Z")
    if (q * rank.np1).denominator != 1:
        raise ValueError(f"ray index {k} is not in (1/(n+1))Z")
    return q


def _theta_units(k: Fraction, rank: Rank) -> int:
    """Ray angle in units of pi/(2(n+1))."""
    N1 = rank.np1
    base = -2 if rank.is_even else -1
    v = base - 2 * (k - 1) * N1
    assert v.denominator == 1
    return int(v)


def ray_angle(k, rank: Rank) -> float:
    """Singular direction ``theta_k`` at zero."""
    k = as_ray(k, rank)
    return _theta_units(k, rank) * math.pi / (2 * rank.np1)


def ray_support(k, rank: Rank) -> frozenset[tuple[int, int]]:
    """Pairs ``(i, j)`` with ``arg(omega**j - omega**i) = theta_k`` mod 2 pi.

    ``omega**j - omega**i = 2i sin(pi (j-i)/(n+1)) exp(i pi (i+j)/(n+1))``, so in
    units of ``pi/(2(n+1))`` the argument is ``2(i+j) + (n+1)`` for ``j > i`` and
    ``2(i+j) - (n+1)`` for ``j < i``; everything reduces to integer arithmetic.
    """
    k = as_ray(k, rank)
    N1 = rank.np1
    mod = 4 * N1
    th = _theta_units(k, rank) % mod
    out = set()
    for i in range(N1):
        for j in range(N1):
            if i == j:
                continue
            a = 2 * (i + j) + (N1 if j > i else -N1)
            if a % mod == th:
                out.add((i, j))
    return frozenset(out)


def _sign(i: int, j: int, rank: Rank) -> float:
    if rank.is_even:
        return 1.0 if i < j else -1.0
    if i < j:
        return 1.0 if (j - i) % 2 == 0 else -1.0
    return 1.0 if (i - j) % 2 == 1 else -1.0


def build_Qtilde(k, s: StokesData, rank: Rank | None = None) -> np.ndarray:
    """Real Stokes factor ``I + sum_{(i,j) in R_k} s_|i-j| e_ij``."""
    r = rank or s.rank
    Q = np.eye(r.np1)
    for i, j in ray_support(k, r):
        Q[i, j] = _sign(i, j, r) * s.s[abs(i - j)]
    return Q


def _tilde_conj(rank: Rank) -> np.ndarray:
    """The diagonal ``T`` with ``Q = T Qtilde T^{-1}``."""
    if rank.is_even:
        return d_power(rank, 0.5)
    return d_power(rank, -rank.d)


def Qtilde_to_Q(Qt: np.ndarray, rank: Rank) -> np.ndarray:
    T = np.diag(_tilde_conj(rank))
    return Qt * T[:, None] / T[None, :]


def Q_zero(k, s: StokesData) -> np.ndarray:
    """Stokes factor ``Q_k`` at zero (complex, non-tilde normalization)."""
    return Qtilde_to_Q(build_Qtilde(k, s), s.rank)


def Q_infinity(k, s: StokesData) -> np.ndarray:
    """Stokes factor at infinity, ``d^{-1} Q_k d``."""
    S = structure(s.rank.np1)
    return S.d_inv @ Q_zero(k, s) @ S.d_mat


def Q_period(rank: Rank) -> list[Fraction]:
    """Ray indices ``1, 1 + 1/(n+1), ..., 3 - 1/(n+1)`` covering one period."""
    return [Fraction(1) + Fraction(j, rank.np1) for j in range(2 * rank.np1)]


def build_M(s: StokesData) -> np.ndarray:
    """``M = Q_1 Q_{1+1/(n+1)} Pi``."""
    r = s.rank
    S = structure(r.np1)
    return Q_zero(1, s) @ Q_zero(Fraction(1) + Fraction(1, r.np1), s) @ S.Pi


def build_Mtilde(s: StokesData) -> np.ndarray:
    """Real monodromy matrix whose characteristic polynomial encodes ``s``."""
    r = s.rank
    S = structure(r.np1)
    P = S.PiHat if r.is_even else S.Pi
    return build_Qtilde(1, s) @ build_Qtilde(Fraction(1) + Fraction(1, r.np1), s) @ P


def char_poly(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first.

    Faddeev-LeVerrier recursion; exact for integer matrices and well
    conditioned for the small matrices used here.
    """
    M = np.asarray(M)
    N = M.shape[0]
    c = np.zeros(N + 1, dtype=M.dtype if np.iscomplexobj(M) else float)
    c[0] = 1.0
    Mk = np.zeros_like(M, dtype=c.dtype)
    eye = np.eye(N)
    for k in range(1, N + 1):
        Mk = M @ (Mk + c[k - 1] * eye)
        c[k] = -np.trace(Mk) / k
    return c


def expected_char_poly(s: StokesData) -> np.ndarray:
    N1 = s.rank.np1
    if s.rank.is_even:
        return s.s.copy()
    return np.array([(-1) ** i * s.s[i] for i in range(N1 + 1)])


def invert_stokes(s: StokesData, tol: float = 1e-8) -> np.ndarray:
    """Recover ``m`` from the Stokes parameters.

    The roots of the characteristic polynomial are ``omega**(m'_j - 1/2)`` for
    even n+1 and ``omega**(m'_j + n/2)`` for odd n+1.  Their
    arguments fix ``m'_j`` modulo ``n+1``; the strict ordering
    ``m'_0 > m'_1 > ... > m'_n > m'_0 - (n+1)`` together with
    ``sum m'_j = -n(n+1)/2`` fixes the lift uniquely.
    """
    r = s.rank
    N1 = r.np1
    coeffs = expected_char_poly(s)
    roots = np.roots(coeffs)
    if np.max(np.abs(np.abs(roots) - 1.0)) > tol:
        raise NonGenericError("characteristic roots are not on the unit circle: s outside the image")
    a = np.sort(np.angle(roots) * N1 / (2 * math.pi))[::-1]  # in (-(n+1)/2, (n+1)/2]
    if np.min(np.abs(np.diff(np.concatenate([a, [a[0] - N1]])))) < 1e-9:
        raise NonGenericError("repeated characteristic roots: non-generic")
    shift = -0.5 if r.is_even else _shift(r)
    target = -r.n * N1 / 2.0 + N1 * shift
    kk = (target - a.sum()) / N1
    kr = round(kk)
    if abs(kk - kr) > 1e-6:
        raise NonGenericError("root arguments inconsistent with a traceless m")
    p = (-kr) % N1
    q = (kr + p) // N1
    v = np.concatenate([a[p:], a[:p] - N1]) + N1 * q
    m = v - shift + np.arange(N1)
    if np.max(np.abs(m + m[::-1])) > 1e-6:
        raise NonGenericError("recovered m is not anti-symmetric: s outside the image")
    m = 0.5 * (m - m[::-1])
    _check_generic(m, tol=1e-12)
    return m


# ---------------------------------------------------------------------------
# connection data


def _gamma_product(m: np.ndarray, i: int) -> float:
    N1 = len(m)
    out = 1.0
    for j in range(1, N1):
        a = (mprime(m, i) - mprime(m, i + j)) / N1
        if a <= 0:
            raise GammaPoleError(f"gamma argument {a} <= 0: non-generic m")
        out *= gamma(a)
    return out


def gamma_diag(data: AsymptoticData) -> np.ndarray:
    """``Gamma_m = diag((-1)**i C_0^[i])``."""
    m = data.m
    N1 = data.rank.np1
    vals = [(-1) ** i * 2j * math.pi * N1 ** m[i] * _gamma_product(m, i) for i in range(N1)]
    return np.diag(np.array(vals, dtype=complex))


def _eta_exponents(rank: Rank) -> np.ndarray:
    """Exponents ``a_c`` with ``eta_c = omega**a_c`` for the column arguments."""
    N1 = rank.np1
    c = np.arange(N1)
    if rank.is_even:
        return N1 // 2 - c + 0.0
    return rank.d - c + 0.5


def vandermonde(data: AsymptoticData) -> np.ndarray:
    """``V_m[k, c] = eta_c**m'_k`` with lifted arguments ``eta_c``."""
    N1 = data.rank.np1
    a = _eta_exponents(data.rank)
    mp_ = data.m_prime
    return np.exp(2j * np.pi * np.outer(mp_, a) / N1)


def kappa(rank: Rank) -> complex:
    N1 = rank.np1
    return 1j * (2 * math.pi) ** ((N1 + 1) / 2.0) * N1 ** -0.5


def connection_eigs(data: AsymptoticData) -> np.ndarray:
    """Eigenvalues ``e_i`` of ``E_1 (E_1^id)^{-1}`` (gamma-product form)."""
    m = data.m
    N1 = data.rank.np1
    n = N1 - 1
    e = np.empty(N1)
    for i in range(N1):
        lg = math.log(data.chat[n - i]) - math.log(data.chat[i])
        lg += (m[n - i] - m[i]) * math.log(N1)
        e[i] = math.exp(lg) * _gamma_product(m, n - i) / _gamma_product(m, i)
    return e


def chat_id(m: Sequence[float] | AsymptoticData, rank: Rank | int | None = None) -> np.ndarray:
    """The unique positive ``chat`` for which all ``e_i = 1``."""
    if isinstance(m, AsymptoticData):
        mv = m.m
    else:
        mv = np.asarray(m, dtype=float)
    N1 = len(mv)
    n = N1 - 1
    out = np.empty(N1)
    for i in range(N1):
        l2 = (mv[n - i] - mv[i]) * math.log(N1)
        l2 += math.log(_gamma_product(mv, n - i)) - math.log(_gamma_product(mv, i))
        out[i] = math.exp(0.5 * l2)
    return out


def companion_form(s: StokesData) -> np.ndarray:
    """Companion matrix with first column ``(-s_n, ..., -s_1, -1)``."""
    N1 = s.rank.np1
    A = np.zeros((N1, N1))
    coeffs = expected_char_poly(s)
    A[:, 0] = -np.array([coeffs[N1 - 1 - i] for i in range(N1)])
    for i in range(N1 - 1):
        A[i, i + 1] = 1.0
    return A


def companion_conjugator(Mt: np.ndarray, s: StokesData, blocks: tuple[int, int] | None = None) -> np.ndarray:
    """Solve ``F Mt = A F`` for ``F = blockdiag(L, U)`` with unit diagonal.

    ``L`` is lower and ``U`` upper triangular.  The linear system is solved by
    least squares and the solution is checked to be exact and unique.
    """
    r = s.rank
    N1 = r.np1
    if blocks is None:
        p = N1 // 2
        blocks = (N1 - p, p) if not r.is_even else (p, p)
    b0, _ = blocks
    A = companion_form(s)
    free = []
    for i in range(N1):
        for j in range(N1):
            if i == j:
                continue
            if i < b0 and j < b0 and j < i:
                free.append((i, j))
            elif i >= b0 and j >= b0 and j > i:
                free.append((i, j))
    # F Mt - A F = 0, linear in F = I + sum x_ij E_ij
    nf = len(free)
    rows = N1 * N1
    G = np.zeros((rows, nf), dtype=complex)
    for col, (i, j) in enumerate(free):
        E = np.zeros((N1, N1))
        E[i, j] = 1.0
        G[:, col] = (E @ Mt - A @ E).reshape(-1)
    rhs = -(Mt - A).reshape(-1)
    if nf:
        x, *_ = np.linalg.lstsq(G, rhs, rcond=None)
        sv = np.linalg.svd(G, compute_uv=False)
        if sv[-1] < 1e-10 * max(1.0, sv[0]):
            raise ArithmeticError("companion conjugator is not unique")
    else:
        x = np.zeros(0)
    F = np.eye(N1, dtype=complex)
    for col, (i, j) in enumerate(free):
        F[i, j] = x[col]
    res = np.max(np.abs(F @ Mt - A @ F))
    if res > 1e-8 * max(1.0, np.max(np.abs(Mt))):
        raise ArithmeticError(f"no block-triangular companion conjugator (residual {res:.2e})")
    return F.real if np.max(np.abs(F.imag)) < 1e-10 else F


def cyclic_K(M: np.ndarray, rank: Rank) -> np.ndarray:
    """Matrix whose column ``c`` is ``M**(p-c) e_p`` (``p = floor((n+1)/2)``)."""
    N1 = rank.np1
    p = N1 // 2
    K = np.zeros((N1, N1), dtype=complex)
    Minv = np.linalg.inv(M)
    for c in range(N1):
        e = np.zeros(N1, dtype=complex)
        e[p] = 1.0
        power = p - c
        step = M if power >= 0 else Minv
        for _ in range(abs(power)):
            e = step @ e
        K[:, c] = e
    return K


def build_D1(data: AsymptoticData, route: str = "auto") -> ConnectionData:
    """Connection matrix ``D_1`` of the normalized equation, ``kappa K V^{-1} Gamma^{-1}``.

    ``route='companion'`` (even n+1 only) takes ``K = P_m^{-T}`` with
    ``P_m^T = d^{1/2} F d^{-1/2}`` from :func:`companion_conjugator`;
    ``route='cyclic'`` builds ``K`` from powers of ``M`` directly.
    ``route='auto'`` uses the companion route when n+1 is even.
    """
    r = data.rank
    s = stokes_params(data)
    Gm = gamma_diag(data)
    V = vandermonde(data)
    M = build_M(s)
    K_cyc = cyclic_K(M, r)
    if route == "auto":
        route = "companion" if r.is_even else "cyclic"
    if route == "companion":
        if not r.is_even:
            raise ValueError("the companion route is only available for even n+1")
        F = companion_conjugator(build_Mtilde(s), s)
        hd = d_power(r, 0.5)
        PmT = hd @ F @ np.conj(hd)
        K = np.linalg.inv(PmT)
        Pm = PmT.T
    elif route == "cyclic":
        K = K_cyc
        Pm = np.linalg.inv(K).T
        F = None
    else:
        raise ValueError(f"unknown route {route!r}")
    D1 = kappa(r) * K @ np.linalg.inv(V) @ np.linalg.inv(Gm)
    e = connection_eigs(data)
    return ConnectionData(r, Gm, V, Pm, D1, K, e, extras={"F": F, "M": M, "s": s, "K_cyclic": K_cyc})


def E1_id(s: StokesData) -> np.ndarray:
    S = structure(s.rank.np1)
    N1 = s.rank.np1
    if s.rank.is_even:
        return S.C @ Q_infinity(Fraction(N1 - 1, N1), s) / N1
    return S.C / N1


def build_E1(conn: ConnectionData, data: AsymptoticData) -> np.ndarray:
    """``E_1`` from ``D_1 t^m = (normalized D_1) chat^{-1}`` (t-independent)."""
    r = data.rank
    N1 = r.np1
    S = structure(N1)
    s = conn.extras["s"]
    Dt = conn.D1 @ np.diag(1.0 / data.chat)
    E = Dt @ S.Delta @ np.linalg.inv(np.conj(Dt))
    if r.is_even:
        Qb = np.conj(Q_zero(Fraction(N1 - 1, N1), s))
        E = E @ np.linalg.inv(Qb)
    E = E @ S.d_inv @ S.C / N1
    conn.E1 = E
    conn.E1_id = E1_id(s)
    return E


def global_criterion(conn: ConnectionData, data: AsymptoticData, t: float = 1.0, tol: float = 1e-8) -> bool:
    """``Omega D_1 t^m`` and every ``Omega Q_k Omega^{-1}`` lie in SL^Delta(R)."""
    r = data.rank
    S = structure(r.np1)
    D1t = conn.D1 @ np.linalg.inv(h_of_t(t, data)) @ np.diag(t ** data.m)
    if not is_sl_delta_real(S.Omega @ D1t, tol * max(1.0, np.max(np.abs(S.Omega @ D1t)))):
        return False
    s = conn.extras["s"]
    for k in Q_period(r):
        Q = Q_zero(k, s)
        if not is_sl_delta_real(S.Omega @ Q @ S.Omega_inv, tol):
            return False
    return True


def positivity_region_test(s: StokesData) -> bool:
    """Positive definiteness of ``S + S^H`` for the two products at infinity."""
    r = s.rank
    N1 = r.np1
    for start in (Fraction(3, 2), Fraction(5, 2)):
        k0 = as_ray(start, r) if (start * N1).denominator == 1 else None
        if k0 is None:
            # for odd n+1 the half-integer rays are not singular directions;
            # start at the nearest ray above
            k0 = Fraction(math.ceil(start * N1), N1)
        Smat = np.eye(N1, dtype=complex)
        for j in range(N1):
            Smat = Smat @ Q_infinity(k0 + Fraction(j, N1), s)
        H = Smat + Smat.conj().T
        if np.min(np.linalg.eigvalsh(H)) <= 0:
            return False
    return True


def bessel_laplace_integral(x: float, scaled: bool = False) -> float:
    """``(1/2pi) int_0^inf exp(-x(l + 1/l)) dl/l`` by quadrature in ``u = log l``.

    With ``scaled`` the factor ``e^{-2x}`` is left out, which keeps large ``x``
    representable.
    """
    from scipy.integrate import quad

    if x <= 0:
        raise ValueError("x must be positive")
    # l + 1/l - 2 = 4 sinh(u/2)^2; the integrand is below e^-700 past u_max
    u_max = 2.0 * math.asinh(math.sqrt(700.0 / (4.0 * x)))
    val, _ = quad(
        lambda u: math.exp(-4.0 * x * math.sinh(0.5 * u) ** 2),
        0.0,
        u_max,
        epsabs=0,
        epsrel=1e-13,
        limit=200,
    )
    val = 2.0 * val / (2.0 * math.pi)
    return val if scaled else val * math.exp(-2.0 * x)
