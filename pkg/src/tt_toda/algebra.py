"""Constant structure matrices of sl_{n+1} and the automorphisms acting on them.

Conventions
-----------
* ``omega = exp(2*pi*i/(n+1))``; ``d = diag(1, omega, ..., omega**n)``.
* ``Omega[i, j] = omega**(i*j)``.
* ``Pi`` has ones in the positions ``(i, i+1)`` (indices mod n+1), so that
  ``(Pi @ v)[i] = v[i+1]`` and ``Pi = Omega @ d @ inv(Omega)``.
* ``Delta`` is the anti-diagonal permutation, ``C = Omega @ inv(conj(Omega))``.
* Fractional powers of ``d`` always use the principal branch
  ``d**a = diag(exp(2*pi*i*a*j/(n+1)))``.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "MAX_RANK",
    "Rank",
    "StructureMatrices",
    "build_structure",
    "structure",
    "d_power",
    "apply_tau",
    "apply_sigma",
    "apply_c",
    "apply_theta",
    "is_sl_delta_real",
]

MAX_RANK = 16


@dataclass(frozen=True)
class Rank:
    """The size ``n+1`` of the matrices, with ``n+1 = 2d`` or ``2d+1``."""

    np1: int

    def __post_init__(self) -> None:
        if not isinstance(self.np1, (int, np.integer)) or isinstance(self.np1, bool):
            raise TypeError("np1 must be an integer")
        if self.np1 < 2:
            raise ValueError(f"n+1 must be >= 2, got {self.np1}")
        if self.np1 > MAX_RANK:
            raise ValueError(f"n+1 must be <= {MAX_RANK}, got {self.np1}")

    @property
    def n(self) -> int:
        return self.np1 - 1

    @property
    def d(self) -> int:
        return self.np1 // 2

    @property
    def parity(self) -> str:
        return "even" if self.np1 % 2 == 0 else "odd"

    @property
    def is_even(self) -> bool:
        return self.np1 % 2 == 0


def _as_rank(rank: Rank | int) -> Rank:
    return rank if isinstance(rank, Rank) else Rank(int(rank))


def d_power(rank: Rank | int, a: float) -> np.ndarray:
    """Principal-branch power ``d**a = diag(exp(2 pi i a j/(n+1)))``."""
    r = _as_rank(rank)
    j = np.arange(r.np1)
    return np.diag(np.exp(2j * np.pi * a * j / r.np1))


@dataclass(frozen=True)
class StructureMatrices:
    rank: Rank
    omega: complex
    d_mat: np.ndarray
    half_d: np.ndarray
    Omega: np.ndarray
    Delta: np.ndarray
    Pi: np.ndarray
    PiHat: np.ndarray
    P: np.ndarray
    C: np.ndarray

    def __post_init__(self) -> None:
        for name in ("d_mat", "half_d", "Omega", "Delta", "Pi", "PiHat", "P", "C"):
            getattr(self, name).setflags(write=False)

    @property
    def Omega_inv(self) -> np.ndarray:
        # Omega is (n+1) times a unitary matrix
        return self.Omega.conj().T / self.rank.np1

    @property
    def d_inv(self) -> np.ndarray:
        return self.d_mat.conj()


def build_structure(rank: Rank | int) -> StructureMatrices:
    """Build the constant matrices for the given rank."""
    r = _as_rank(rank)
    N = r.np1
    idx = np.arange(N)
    omega = np.exp(2j * np.pi / N)
    # exact integer exponents reduced mod N keep the roots of unity clean
    Omega = np.exp(2j * np.pi * (np.outer(idx, idx) % N) / N)
    d_mat = np.diag(np.exp(2j * np.pi * idx / N))
    half_d = d_power(r, 0.5)
    Delta = np.fliplr(np.eye(N))
    Pi = np.roll(np.eye(N), 1, axis=1)
    # signed cyclic matrix: same pattern as Pi, with -1 in the corner
    PiHat = Pi.copy()
    PiHat[N - 1, 0] = -1.0
    P = np.eye(N, dtype=complex) + 1j * Delta
    if N % 2 == 1:
        P[N // 2, N // 2] = 1 + 1j
    P *= (1 - 1j) / 2
    C = np.zeros((N, N))
    C[0, 0] = 1.0
    for i in range(1, N):
        C[i, N - i] = 1.0
    return StructureMatrices(
        rank=r,
        omega=complex(omega),
        d_mat=d_mat,
        half_d=half_d,
        Omega=Omega,
        Delta=Delta,
        Pi=Pi,
        PiHat=PiHat,
        P=P,
        C=C.astype(complex),
    )


@lru_cache(maxsize=None)
def structure(np1: int) -> StructureMatrices:
    """Cached :func:`build_structure` keyed by ``n+1``."""
    return build_structure(Rank(np1))


def _check(X: np.ndarray, rank: Rank | int) -> tuple[np.ndarray, StructureMatrices]:
    r = _as_rank(rank)
    X = np.asarray(X)
    if X.shape != (r.np1, r.np1):
        raise ValueError(f"expected a {r.np1}x{r.np1} matrix, got shape {X.shape}")
    return X, structure(r.np1)


def apply_tau(X: np.ndarray, rank: Rank | int, group: bool = False) -> np.ndarray:
    """tau(X) = d^{-1} X d (same rule on the algebra and on the group)."""
    X, S = _check(X, rank)
    return S.d_inv @ X @ S.d_mat


def apply_sigma(X: np.ndarray, rank: Rank | int, group: bool = False) -> np.ndarray:
    """sigma(X) = -Delta X^T Delta on the algebra, Delta X^{-T} Delta on the group."""
    X, S = _check(X, rank)
    if group:
        return S.Delta @ np.linalg.inv(X).T @ S.Delta
    return -S.Delta @ X.T @ S.Delta


def apply_c(X: np.ndarray, rank: Rank | int, group: bool = False) -> np.ndarray:
    """c(X) = Delta conj(X) Delta (same rule on the algebra and on the group)."""
    X, S = _check(X, rank)
    return S.Delta @ np.conj(X) @ S.Delta


def apply_theta(X: np.ndarray, rank: Rank | int, group: bool = False) -> np.ndarray:
    """theta(X) = conj(X)."""
    X, _ = _check(X, rank)
    return np.conj(X)


def is_sl_delta_real(V: np.ndarray, tol: float = 1e-12) -> bool:
    """True iff ``max |Delta conj(V) Delta - V| <= tol``."""
    V = np.asarray(V)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise ValueError("V must be a square matrix")
    W = V[::-1, ::-1].conj()
    return bool(np.max(np.abs(W - V)) <= tol)
