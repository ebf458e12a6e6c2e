"""Reference (numpy) implementation of the finite-difference kernel.

The compiled module ``_kernels`` exposes the same function; see
:func:`tt_toda.toda_solver.kernel_backend`.
"""

from __future__ import annotations

import numpy as np


def exponents(u: np.ndarray, a: float, b: float) -> np.ndarray:
    """``E[:, k]`` for ``k = 0..n``: ``a u_1``, ``u_k - u_{k-1}``, ``-b u_n``."""
    M, n = u.shape
    E = np.empty((M, n + 1))
    E[:, 0] = a * u[:, 0]
    if n > 1:
        E[:, 1:n] = u[:, 1:] - u[:, :-1]
    E[:, n] = -b * u[:, n - 1]
    return E


def exponent_jacobian(n: int, a: float, b: float) -> np.ndarray:
    """Constant matrix ``dE_k/du_l`` of shape ``(n+1, n)``."""
    G = np.zeros((n + 1, n))
    G[0, 0] = a
    for k in range(1, n):
        G[k, k] = 1.0
        G[k, k - 1] = -1.0
    G[n, n - 1] += -b
    return G


def _second_diff(v: np.ndarray, ih2: float) -> np.ndarray:
    vp = np.zeros_like(v)
    vp[:-1] = v[1:]
    D = np.empty_like(v)
    # differences of neighbours first: exact for nearby values
    D[1:] = ((v[:-1] - v[1:]) - (v[1:] - vp[1:])) * ih2
    D[0] = 2.0 * (vp[0] - v[0]) * ih2
    return D


def assemble(vb, vc, lin, s, h, a, b, alpha, robin, want_jac=True):
    """Residual and banded Jacobian of the discrete radial system.

    The unknowns at the nodes ``s[0..M-1]`` are ``v = vb + vc`` (M x n), kept as
    an unevaluated sum so that the discrete residual is not limited by the
    spacing of doubles near ``v``; the node after the last one carries
    ``v = 0``.  ``u = v + lin``, where ``lin`` is linear in ``s`` and therefore
    drops out of the second differences.  Node 0 uses a ghost
    point with ``v'(s_0) = tail`` (zero for the plain Neumann condition, the
    analytic integral of the equation over ``(-inf, s_0)`` for ``robin``).

    Returns ``F`` (length M n, node-major) and, if requested, ``ab`` in the
    layout of :func:`scipy.linalg.solve_banded` with ``l = u = n``.
    """
    vb = np.asarray(vb, dtype=float)
    vc = np.asarray(vc, dtype=float)
    M, n = vb.shape
    u = (vb + lin) + vc
    X = np.exp(exponents(u, a, b))
    w = np.exp(2.0 * s)[:, None]
    f = X[:, :n] - X[:, 1:]
    ih2 = 1.0 / (h * h)

    D = _second_diff(vb, ih2) + _second_diff(vc, ih2)
    if robin:
        q = w[0, 0] * X[0] / alpha
        D[0] -= 2.0 * (q[:n] - q[1:]) / h
    F = (D - w * f).reshape(-1)
    if not want_jac:
        return F, None

    N = M * n
    ab = np.zeros((2 * n + 1, N))
    lo = np.ones(n)
    lo[0] = a
    hi = np.ones(n)
    hi[n - 1] = b
    dd = X[:, :n] * lo + X[:, 1:] * hi
    ab[n] = (-2.0 * ih2 - w * dd).reshape(-1)
    if n > 1:
        cpl = (w * X[:, 1:n]).reshape(-1)  # +w X_i couples u_i with u_{i-1}, both ways
        base = (np.arange(M)[:, None] * n + np.arange(n - 1)[None, :]).reshape(-1)
        ab[n + 1, base] = cpl  # row base+1, column base
        ab[n - 1, base + 1] = cpl  # row base, column base+1
    ab[0, n:] = ih2
    ab[0, n : 2 * n] = 2.0 * ih2  # ghost point doubles the coupling at node 0
    ab[2 * n, : N - n] = ih2
    if robin:
        G = exponent_jacobian(n, a, b)
        q = w[0, 0] * X[0] / alpha
        dtail = q[:n, None] * G[:n] - q[1:, None] * G[1:]
        for i in range(n):
            for l in range(n):
                if abs(i - l) <= n and dtail[i, l] != 0.0:
                    ab[n + i - l, l] += -2.0 * dtail[i, l] / h
    return F, ab
