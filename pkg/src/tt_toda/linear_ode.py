"""The meromorphic zeta-equations and their numerically computed monodromy data.

Three systems share the shape ``X' = (-A/zeta**2 + B/zeta + zeta**0 * C) X``:

``normalized``  ``A = Pi``,            ``B = m``, ``C = 0``
``subsidiary``  ``A = h Pi h^{-1}``,   ``B = m``, ``C = 0``
``main``        ``A = W = e^{-w} Pi e^{w}``, ``B = -x w_x``, ``C = x**2 W^T``

For the first two, the solution normalized at infinity is a convergent
Frobenius series ``(I + sum phi_k zeta^{-k}) zeta^m`` (entire in ``1/zeta``).
Canonical solutions at zero are characterized by their asymptotics in a sector.
On a ray inside the sector, the optimally truncated formal series at zero only
pins each column down modulo solutions that are recessive relative to it (a
flag). Two rays of the sector that differ by ``pi`` carry opposite dominance
orders, and a unit triangular factorization of the two flags recovers the
canonical basis. The exponentials involved reach ``exp(2/|zeta|)``, so this is
done in extended precision with :mod:`mpmath`, at a precision set by the
matching radius.

Plain double-precision integration (:func:`propagate`) is still used for path
continuation, Abel-identity drift checks and loop monodromy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.integrate import solve_ivp

from .algebra import Rank, structure
from .spectral import AsymptoticData, as_ray, ray_angle

__all__ = [
    "OdeSystem",
    "FrobeniusSolution",
    "CanonicalSolution",
    "NumericMonodromy",
    "ResonanceError",
    "normalized_system",
    "subsidiary_system",
    "main_system",
    "rhs",
    "frobenius_at_infinity",
    "frobenius_mp",
    "formal_series_at_zero",
    "default_match_radius",
    "canonical_at_zero",
    "numeric_connection_inverse",
    "numeric_stokes",
    "numeric_D1",
    "propagate",
    "loop_monodromy",
    "numeric_monodromy",
    "verify_against_closed_form",
]


class ResonanceError(ArithmeticError):
    """The Frobenius recursion hits a resonant denominator."""


@dataclass(frozen=True)
class OdeSystem:
    kind: str
    rank: Rank
    m: np.ndarray | None = None
    h: np.ndarray | None = None  # diagonal entries
    w: np.ndarray | None = None
    xwx: np.ndarray | None = None
    x: float | None = None

    @property
    def lead(self) -> np.ndarray:
        """The matrix ``A`` of the ``-A/zeta**2`` term."""
        S = structure(self.rank.np1)
        if self.kind == "normalized":
            return S.Pi.astype(complex)
        if self.kind == "subsidiary":
            return (self.h[:, None] * S.Pi / self.h[None, :]).astype(complex)
        if self.kind == "main":
            ew = np.exp(self.w)
            return (S.Pi * ew[None, :] / ew[:, None]).astype(complex)
        raise ValueError(f"unknown kind {self.kind!r}")

    @property
    def simple(self) -> np.ndarray:
        """The matrix ``B`` of the ``B/zeta`` term."""
        if self.kind in ("normalized", "subsidiary"):
            return np.diag(self.m).astype(complex)
        return -np.diag(self.xwx).astype(complex)

    @property
    def regular(self) -> np.ndarray | None:
        if self.kind == "main":
            return (self.x**2 * self.lead.T).astype(complex)
        return None

    @property
    def diagonalizer(self) -> np.ndarray:
        """``T`` with ``A = T d T^{-1}`` (``T = h Omega`` or ``e^{-w} Omega``)."""
        S = structure(self.rank.np1)
        if self.kind == "normalized":
            return S.Omega
        if self.kind == "subsidiary":
            return self.h[:, None] * S.Omega
        return np.exp(-self.w)[:, None] * S.Omega


def normalized_system(data: AsymptoticData | Sequence[float], rank: Rank | None = None) -> OdeSystem:
    m = data.m if isinstance(data, AsymptoticData) else np.asarray(data, dtype=float)
    r = data.rank if isinstance(data, AsymptoticData) else (rank or Rank(len(m)))
    return OdeSystem("normalized", r, m=np.asarray(m, dtype=float))


def subsidiary_system(data: AsymptoticData, t: float) -> OdeSystem:
    h = data.chat * t**data.m
    return OdeSystem("subsidiary", data.rank, m=data.m.copy(), h=h)


def main_system(w: Sequence[float], xwx: Sequence[float], x: float) -> OdeSystem:
    w = np.asarray(w, dtype=float)
    return OdeSystem("main", Rank(len(w)), w=w, xwx=np.asarray(xwx, dtype=float), x=float(x))


def rhs(system: OdeSystem, zeta: complex) -> np.ndarray:
    """Coefficient matrix of the system at ``zeta``."""
    if zeta == 0:
        raise ZeroDivisionError("zeta = 0 is the irregular singular point")
    out = -system.lead / zeta**2 + system.simple / zeta
    if system.regular is not None:
        out = out + system.regular
    return out


# ---------------------------------------------------------------------------
# Frobenius solution at infinity


def _check_frobenius_kind(system: OdeSystem) -> None:
    if system.kind not in ("normalized", "subsidiary"):
        raise ValueError("the Frobenius solution at infinity needs a simple pole at infinity")


@dataclass(frozen=True)
class FrobeniusSolution:
    coeffs: list[np.ndarray]
    m: np.ndarray
    radius_hint: float

    def evaluate(self, zeta: complex, arg: float | None = None) -> np.ndarray:
        """``(I + sum phi_k zeta^{-k}) zeta^m``; ``arg`` selects the sheet."""
        a = np.angle(zeta) if arg is None else arg
        z = abs(zeta) * np.exp(1j * a)
        N = len(self.m)
        S = np.eye(N, dtype=complex)
        zp = 1.0 + 0j
        for phi in self.coeffs:
            zp /= z
            S = S + phi * zp
        return S * np.exp(self.m * (math.log(abs(zeta)) + 1j * a))[None, :]


def frobenius_at_infinity(system: OdeSystem, K: int = 20) -> FrobeniusSolution:
    """Coefficients ``phi_1..phi_K`` of the solution normalized at infinity.

    Substituting into the equation gives
    ``(k + m_i - m_j) (phi_k)_{ij} = (A phi_{k-1})_{ij}``.
    """
    _check_frobenius_kind(system)
    A = system.lead
    m = system.m
    N = len(m)
    phi = np.eye(N, dtype=complex)
    out = []
    norms = []
    for k in range(1, K + 1):
        num = A @ phi
        den = k + m[:, None] - m[None, :]
        bad = np.abs(den) < 1e-12
        if np.any(bad & (np.abs(num) > 1e-12)):
            raise ResonanceError(f"resonant Frobenius recursion at order {k}")
        den = np.where(bad, 1.0, den)
        phi = np.where(bad, 0.0, num / den)
        out.append(phi)
        norms.append(np.max(np.abs(phi)))
    # radius at which consecutive terms shrink by 10x
    ratios = [norms[k] / norms[k - 1] for k in range(1, len(norms)) if norms[k - 1] > 0]
    radius = 10.0 * max(ratios[-3:]) if ratios else 1.0
    return FrobeniusSolution(out, m.copy(), float(radius))


def _lead_entries(system: OdeSystem) -> list[tuple[int, int, complex]]:
    A = system.lead
    return [(i, j, complex(A[i, j])) for i, j in zip(*np.nonzero(A))]


def frobenius_mp(system: OdeSystem, r, phi, dps: int) -> mpmath.matrix:
    """Frobenius solution at ``zeta = r e^{i phi}`` (on the cover) in ``dps`` digits."""
    _check_frobenius_kind(system)
    with mpmath.workdps(dps):
        N = system.rank.np1
        r = mpmath.mpf(r)
        phi = mpmath.mpf(phi)
        zinv = mpmath.exp(-1j * phi) / r
        m = [mpmath.mpf(float(v)) for v in system.m]
        lead = [(i, j, mpmath.mpc(a)) for i, j, a in _lead_entries(system)]
        term = [[mpmath.mpc(1 if i == j else 0) for j in range(N)] for i in range(N)]
        total = [row[:] for row in term]
        eps = mpmath.mpf(10) ** (-dps)
        big = mpmath.mpf(1)
        k = 0
        small_run = 0
        while True:
            k += 1
            new = [[mpmath.mpc(0)] * N for _ in range(N)]
            for i, l, a in lead:
                row = term[l]
                tgt = new[i]
                for j in range(N):
                    tgt[j] += a * row[j]
            tmax = mpmath.mpf(0)
            for i in range(N):
                for j in range(N):
                    den = k + m[i] - m[j]
                    if abs(den) < 1e-12:
                        if abs(new[i][j]) > eps * big:
                            raise ResonanceError(f"resonant Frobenius recursion at order {k}")
                        new[i][j] = mpmath.mpc(0)
                    else:
                        new[i][j] = new[i][j] * zinv / den
                    total[i][j] += new[i][j]
                    tmax = max(tmax, abs(new[i][j]))
            term = new
            big = max(big, tmax)
            if tmax < eps * big:
                small_run += 1
                if small_run >= 3:
                    break
            else:
                small_run = 0
            if k > 100000:
                raise ArithmeticError("Frobenius series failed to converge")
        logz = mpmath.log(r) + 1j * phi
        X = mpmath.matrix(N, N)
        for j in range(N):
            zm = mpmath.exp(m[j] * logz)
            for i in range(N):
                X[i, j] = total[i][j] * zm
        return X


# ---------------------------------------------------------------------------
# formal solution at zero and canonical solutions


def formal_series_at_zero(system: OdeSystem, order: int, dps: int = 30) -> list[mpmath.matrix]:
    """Coefficients ``x_0 = I, x_1, ..., x_order`` of ``T (I + sum x_k zeta^k) e^{d/zeta}``.

    With ``mu = T^{-1} m T`` the recursion reads ``[x_{k+1}, d] = (k - mu) x_k``
    off the diagonal and ``(k+1) (x_{k+1})_{jj} = sum_{l != j} mu_{jl} (x_{k+1})_{lj}``.
    """
    _check_frobenius_kind(system)
    with mpmath.workdps(dps):
        N = system.rank.np1
        # exact roots of unity at working precision
        om = [mpmath.expjpi(mpmath.mpf(2 * j) / N) for j in range(N)]
        T = _exact_T(system, dps)
        mu = mpmath.inverse(T) * mpmath.diag([mpmath.mpf(float(v)) for v in system.m]) * T
        xs = [mpmath.eye(N)]
        for k in range(order):
            xk = xs[-1]
            rhs_ = (k * mpmath.eye(N) - mu) * xk
            nxt = mpmath.matrix(N, N)
            for j in range(N):
                for i in range(N):
                    if i != j:
                        nxt[i, j] = rhs_[i, j] / (om[j] - om[i])
                acc = mpmath.mpc(0)
                for l in range(N):
                    if l != j:
                        acc += mu[j, l] * nxt[l, j]
                nxt[j, j] = acc / (k + 1)
            xs.append(nxt)
        return xs


def _exact_T(system: OdeSystem, dps: int) -> mpmath.matrix:
    N = system.rank.np1
    with mpmath.workdps(dps):
        T = mpmath.matrix(N, N)
        for i in range(N):
            for j in range(N):
                T[i, j] = mpmath.expjpi(mpmath.mpf(2 * ((i * j) % N)) / N)
        if system.kind == "subsidiary":
            for i in range(N):
                for j in range(N):
                    T[i, j] *= mpmath.mpf(float(system.h[i]))
        return T


def _formal_column_mp(system: OdeSystem, j: int, r, phi, dps: int):
    """Optimally truncated column ``j`` of the formal solution at ``r e^{i phi}``."""
    with mpmath.workdps(dps):
        N = system.rank.np1
        T = _exact_T(system, dps)
        om = [mpmath.expjpi(mpmath.mpf(2 * l) / N) for l in range(N)]
        mu = mpmath.inverse(T) * mpmath.diag([mpmath.mpf(float(v)) for v in system.m]) * T
        z = mpmath.mpf(r) * mpmath.expj(mpmath.mpf(phi))
        x = [mpmath.mpc(1 if i == j else 0) for i in range(N)]
        acc = x[:]
        zk = mpmath.mpc(1)
        prev = mpmath.inf
        k = 0
        eps = mpmath.mpf(10) ** (-dps)
        while True:
            # off-diagonal part of x_{k+1}
            mx = [sum((mu[i, l] * x[l] for l in range(N)), mpmath.mpc(0)) for i in range(N)]
            nxt = [mpmath.mpc(0)] * N
            for i in range(N):
                if i != j:
                    nxt[i] = (k * x[i] - mx[i]) / (om[j] - om[i])
            nxt[j] = sum((mu[j, l] * nxt[l] for l in range(N) if l != j), mpmath.mpc(0)) / (k + 1)
            k += 1
            zk = zk * z
            term = [v * zk for v in nxt]
            size = max(abs(v) for v in term)
            if size > prev and k > 2:
                break  # optimal truncation: stop before the smallest term grows
            for i in range(N):
                acc[i] += term[i]
            prev = size
            x = nxt
            if size < eps:
                break
            if k > 200000:
                raise ArithmeticError("formal series truncation did not terminate")
        col = T * mpmath.matrix(acc)
        ex = mpmath.exp(om[j] / z)
        return [col[i] * ex for i in range(N)], k


def default_match_radius(rank: Rank, target: float = 1e-12) -> float:
    """Radius at which the truncation error ``exp(-L_1/r)`` reaches ``target``.

    ``L_1 = 2 sin(pi/(n+1))`` is the smallest distance between two of the
    exponents ``omega^j``; it controls the optimally truncated formal series.
    """
    L1 = 2.0 * math.sin(math.pi / rank.np1)
    return L1 / math.log(1.0 / target)


def _dps_for(r: float, digits: int = 25) -> int:
    # the flag matrices carry entries up to exp(2/r) that cancel in the factorization
    return int(digits + 2.0 * 2.0 / (r * math.log(10.0)) + 10)


def sector_bisector(k, rank: Rank) -> float:
    return ray_angle(k, rank) + math.pi / (2 * rank.np1)


def flag_rays(k, rank: Rank) -> tuple[float, float]:
    """Two rays inside the sector of index ``k`` differing by ``pi``.

    Both sit halfway between singular directions, so no two exponentials
    ``exp(omega^j / zeta)`` have equal modulus on them, and the dominance order
    on the second ray is the reverse of the order on the first.
    """
    theta = ray_angle(k, rank)
    a = theta - math.pi / 2 + math.pi / (2 * rank.np1)
    return a, a + math.pi


def _flag_matrix(system: OdeSystem, r: float, phi: float, dps: int):
    N = system.rank.np1
    Xinf = frobenius_mp(system, r, phi, dps)
    F = mpmath.matrix(N, N)
    orders = []
    for j in range(N):
        col, K = _formal_column_mp(system, j, r, phi, dps)
        orders.append(K)
        for i in range(N):
            F[i, j] = col[i]
    return mpmath.inverse(Xinf) * F, orders


def _unit_lu(A: mpmath.matrix) -> tuple[mpmath.matrix, mpmath.matrix]:
    """Doolittle factorization without pivoting: ``A = L R``, ``L`` unit lower."""
    N = A.rows
    L = mpmath.eye(N)
    R = mpmath.matrix(N, N)
    for i in range(N):
        for j in range(i, N):
            R[i, j] = A[i, j] - sum((L[i, q] * R[q, j] for q in range(i)), mpmath.mpc(0))
        for j in range(i + 1, N):
            L[j, i] = (A[j, i] - sum((L[j, q] * R[q, i] for q in range(i)), mpmath.mpc(0))) / R[i, i]
    return L, R


def numeric_connection_inverse(system: OdeSystem, k, r: float, dps: int | None = None) -> tuple[np.ndarray, dict]:
    """``C_k^{-1}`` where ``X_inf = X_k C_k``.

    On a ray inside the sector, ``X_inf^{-1} F`` (``F`` the optimally truncated
    formal solution) equals ``C_k^{-1} T`` with ``T`` unit triangular in the
    dominance order of that ray: each column is exact up to solutions that are
    recessive relative to it. On the opposite ray the order is reversed, so
    ``V_a^{-1} V_b = T_a^{-1} T_b`` is a (unit upper)(unit lower) product that
    pins ``T_a`` down uniquely.
    """
    k = as_ray(k, system.rank)
    rank = system.rank
    N = rank.np1
    dps = dps or _dps_for(r)
    psi_a, psi_b = flag_rays(k, rank)
    om = np.exp(2j * np.pi * np.arange(N) / N)
    # most recessive first on ray a
    order = list(np.argsort((om * np.exp(-1j * psi_a)).real, kind="stable"))
    with mpmath.workdps(dps):
        Va, orders_a = _flag_matrix(system, r, psi_a, dps)
        Vb, orders_b = _flag_matrix(system, r, psi_b, dps)
        W = mpmath.inverse(Va) * Vb
        Wp = mpmath.matrix(N, N)
        for a in range(N):
            for b in range(N):
                # permuted to dominance order, then reversed
                Wp[a, b] = W[order[N - 1 - a], order[N - 1 - b]]
        L, R = _unit_lu(Wp)
        # A = J L J is unit upper in dominance order and equals T_a^{-1}
        A = mpmath.matrix(N, N)
        for a in range(N):
            for b in range(N):
                A[a, b] = L[N - 1 - a, N - 1 - b]
        Cinv = mpmath.matrix(N, N)
        for i in range(N):
            for b in range(N):
                Cinv[i, order[b]] = sum((Va[i, order[q]] * A[q, b] for q in range(N)), mpmath.mpc(0))
        diag_dev = max(float(abs(R[i, i] - 1)) for i in range(N))
        out = np.array([[complex(Cinv[i, j]) for j in range(N)] for i in range(N)])
    info = {
        "radius": r,
        "rays": (psi_a, psi_b),
        "dps": dps,
        "orders": orders_a + orders_b,
        "flag_consistency": diag_dev,
    }
    return out, info


@dataclass
class CanonicalSolution:
    """Evaluator for the canonical solution on the sector with index ``k``."""

    system: OdeSystem
    k: Fraction
    Cinv: np.ndarray  # X_k = X_inf @ Cinv
    info: dict = field(default_factory=dict)

    def __call__(self, zeta: complex, arg: float | None = None, dps: int | None = None) -> np.ndarray:
        a = np.angle(zeta) if arg is None else arg
        r = abs(zeta)
        if r >= 0.5:
            X = frobenius_at_infinity(self.system, K=max(40, int(60 / r))).evaluate(zeta, a)
        else:
            d_ = dps or _dps_for(r, 20)
            with mpmath.workdps(d_):
                Xm = frobenius_mp(self.system, r, a, d_)
                X = np.array([[complex(Xm[i, j]) for j in range(Xm.cols)] for i in range(Xm.rows)])
        return X @ self.Cinv


def canonical_at_zero(system: OdeSystem, k, match_radius: float | None = None, agree: float = 1e-8, max_halvings: int = 4) -> CanonicalSolution:
    """Canonical solution at zero on the sector ``Omega_k``.

    The matching radius is halved until two successive radii agree to ``agree``
    (relative, entrywise max).
    """
    k = as_ray(k, system.rank)
    r = match_radius or default_match_radius(system.rank)
    prev, info = numeric_connection_inverse(system, k, r)
    for _ in range(max_halvings):
        r2 = r / 2.0
        cur, info = numeric_connection_inverse(system, k, r2)
        diff = np.max(np.abs(cur - prev)) / max(1.0, np.max(np.abs(cur)))
        info["agreement"] = float(diff)
        if diff <= agree:
            return CanonicalSolution(system, k, cur, info)
        prev, r = cur, r2
    raise ArithmeticError(f"canonical solution did not stabilise (last change {diff:.2e})")


def numeric_D1(system: OdeSystem, match_radius: float | None = None, samples: int = 3) -> tuple[np.ndarray, float]:
    """Connection matrix ``C_1`` (``X_inf = X_1 C_1``) and the sample spread.

    ``C_1^{-1}`` is computed at ``samples`` radii along the bisector; the returned
    matrix is their mean and the spread is the residual of the overdetermined fit.
    """
    r0 = match_radius or default_match_radius(system.rank)
    mats = []
    for f in np.linspace(1.0, 0.7, samples):
        Ci, _ = numeric_connection_inverse(system, 1, r0 * f)
        mats.append(Ci)
    mean = sum(mats) / len(mats)
    spread = max(np.max(np.abs(M_ - mean)) for M_ in mats) / max(1.0, np.max(np.abs(mean)))
    return np.linalg.inv(mean), float(spread)


def numeric_stokes(system: OdeSystem, k, match_radius: float | None = None) -> np.ndarray:
    """``Q_k = C_k C_{k+1/(n+1)}^{-1}`` from two canonical solutions."""
    k = as_ray(k, system.rank)
    k2 = k + Fraction(1, system.rank.np1)
    r = match_radius or default_match_radius(system.rank)
    C1inv, _ = numeric_connection_inverse(system, k, r)
    C2inv, _ = numeric_connection_inverse(system, k2, r)
    return np.linalg.solve(C1inv, C2inv)


# ---------------------------------------------------------------------------
# path continuation in double precision


def propagate(system: OdeSystem, Y0: np.ndarray, path: Sequence[complex] | Callable, t_span=(0.0, 1.0), rtol: float = 1e-11, atol: float = 1e-13, dpath: Callable | None = None) -> tuple[np.ndarray, dict]:
    """Continue a fundamental solution along a path with RK45 (Dormand-Prince).

    ``path`` is either a list of vertices (straight segments) or a callable
    ``p(s)`` with derivative ``dpath(s)`` on ``t_span``.  Returns the final value and
    diagnostics including ``det`` drift (Abel: the coefficient is traceless).
    """
    N = Y0.shape[0]
    Y = np.asarray(Y0, dtype=complex)
    det0 = np.linalg.det(Y)
    segments = []
    if callable(path):
        segments.append((path, dpath, t_span))
    else:
        pts = list(path)
        for a, b in zip(pts[:-1], pts[1:]):
            segments.append((lambda s, a=a, b=b: a + (b - a) * s, lambda s, a=a, b=b: b - a, (0.0, 1.0)))
    length = 0.0
    for p, dp, span in segments:
        def f(s, y, p=p, dp=dp):
            Ym = y.reshape(N, N)
            return (rhs(system, p(s)) @ Ym * dp(s)).reshape(-1)

        sol = solve_ivp(f, span, Y.reshape(-1), method="RK45", rtol=rtol, atol=atol)
        if not sol.success:
            raise ArithmeticError(f"integration failed at s={sol.t[-1]}: {sol.message}")
        Y = sol.y[:, -1].reshape(N, N)
        ss = np.linspace(span[0], span[1], 65)
        length += float(np.sum(np.abs(np.diff([p(v) for v in ss]))))
    det1 = np.linalg.det(Y)
    return Y, {"det_drift": abs(det1 - det0) / max(abs(det0), 1e-300), "path_length": length}


def loop_monodromy(system: OdeSystem, R: float = 2.0, phi0: float = 0.0) -> tuple[np.ndarray, np.ndarray, dict]:
    """Continue ``X_inf`` once clockwise around ``|zeta| = R``.

    Returns ``(continued, expected, info)`` with ``expected = X_inf(zeta) e^{-2 pi i m}``.
    """
    fro = frobenius_at_infinity(system, K=60)
    Y0 = fro.evaluate(R * np.exp(1j * phi0), phi0)
    path = lambda s: R * np.exp(1j * (phi0 - s))
    dpath = lambda s: -1j * R * np.exp(1j * (phi0 - s))
    Y1, info = propagate(system, Y0, path, (0.0, 2 * math.pi), dpath=dpath)
    expected = Y0 @ np.diag(np.exp(-2j * math.pi * system.m))
    direct = fro.evaluate(R * np.exp(1j * phi0), phi0 - 2 * math.pi)
    info["frobenius_branch_residual"] = float(np.max(np.abs(direct - expected)))
    return Y1, expected, info


@dataclass
class NumericMonodromy:
    Q_num: dict
    D1_num: np.ndarray
    loop_monodromy: np.ndarray
    diagnostics: dict = field(default_factory=dict)


def numeric_monodromy(system: OdeSystem, rays: Sequence | None = None, match_radius: float | None = None) -> NumericMonodromy:
    """Stokes factors over one period, ``C_1`` and the loop monodromy at infinity."""
    r = system.rank
    if rays is None:
        rays = [Fraction(1) + Fraction(j, r.np1) for j in range(2 * r.np1)]
    rad = match_radius or default_match_radius(r)
    inv = {}
    needed = sorted({as_ray(k, r) for k in rays} | {as_ray(k, r) + Fraction(1, r.np1) for k in rays})
    for k in needed:
        inv[k], _ = numeric_connection_inverse(system, k, rad)
    Q = {as_ray(k, r): np.linalg.solve(inv[as_ray(k, r)], inv[as_ray(k, r) + Fraction(1, r.np1)]) for k in rays}
    D1 = np.linalg.inv(inv[Fraction(1)])
    Y1, expected, info = loop_monodromy(system)
    Y0inv = np.linalg.inv(expected @ np.diag(np.exp(2j * math.pi * system.m)))
    return NumericMonodromy(Q, D1, Y0inv @ Y1, info)


def verify_against_closed_form(data: AsymptoticData | Sequence[float], match_radius: float | None = None) -> dict:
    """Numeric Stokes factors and ``D_1`` of the normalized equation next to the closed forms.

    Returns per-ray maximal entrywise errors of ``Q_k`` over one period and the
    relative error of ``D_1``.
    """
    from .spectral import asymptotic_from_m, build_D1, stokes_params, Q_zero

    if not isinstance(data, AsymptoticData):
        data = asymptotic_from_m(list(np.asarray(data, dtype=float)))
    system = normalized_system(data)
    s = stokes_params(data)
    nm = numeric_monodromy(system, match_radius=match_radius)
    rows = []
    for k in sorted(nm.Q_num):
        err = float(np.max(np.abs(nm.Q_num[k] - Q_zero(k, s))))
        rows.append({"k": str(k), "max_abs_error": err})
    D1c = build_D1(data).D1
    D1n, spread = numeric_D1(system, match_radius)
    return {
        "stokes": rows,
        "stokes_max_error": max(r_["max_abs_error"] for r_ in rows),
        "D1_closed": D1c,
        "D1_numeric": D1n,
        "D1_rel_error": float(np.max(np.abs(D1n - D1c)) / np.max(np.abs(D1c))),
        "D1_sample_spread": spread,
    }
