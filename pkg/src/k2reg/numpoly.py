"""Numeric bivariate polynomial helpers: products, partials, resultants, zeros."""

from __future__ import annotations

import numpy as np

__all__ = [
    "common_zeros",
    "lines_product_coeffs",
    "partial_u",
    "partial_v",
    "poly_roots",
    "polyval2",
    "resultant_v_coeffs",
    "trim2",
]


def lines_product_coeffs(lines) -> np.ndarray:
    """Coefficient grid C[i, j] of prod(a*u + b*v + c) over u^i v^j."""
    C = np.ones((1, 1), dtype=complex)
    for a, b, c in lines:
        n0, n1 = C.shape
        out = np.zeros((n0 + 1, n1 + 1), dtype=complex)
        out[1:, :n1] += a * C
        out[:n0, 1:] += b * C
        out[:n0, :n1] += c * C
        C = out
    return C


def trim2(C: np.ndarray) -> np.ndarray:
    """Drop trailing rows/columns that are exactly zero."""
    C = np.asarray(C, dtype=complex)
    while C.shape[0] > 1 and not C[-1].any():
        C = C[:-1]
    while C.shape[1] > 1 and not C[:, -1].any():
        C = C[:, :-1]
    return C


def polyval2(C: np.ndarray, u, v):
    """Evaluate sum C[i,j] u^i v^j (Horner in both variables)."""
    u = np.asarray(u)
    v = np.asarray(v)
    acc = np.zeros(np.broadcast(u, v).shape, dtype=complex)
    for row in C[::-1]:
        inner = np.zeros_like(acc)
        for c in row[::-1]:
            inner = inner * v + c
        acc = acc * u + inner
    return acc if acc.shape else complex(acc)


def partial_u(C: np.ndarray) -> np.ndarray:
    if C.shape[0] == 1:
        return np.zeros((1, C.shape[1]), dtype=complex)
    return C[1:] * np.arange(1, C.shape[0])[:, None]


def partial_v(C: np.ndarray) -> np.ndarray:
    if C.shape[1] == 1:
        return np.zeros((C.shape[0], 1), dtype=complex)
    return C[:, 1:] * np.arange(1, C.shape[1])[None, :]


def _coeffs_in_v(C: np.ndarray, u0: complex) -> np.ndarray:
    """Coefficients in v of C specialized at u = u0, ascending."""
    pows = u0 ** np.arange(C.shape[0])
    return pows @ C


def poly_roots(coeffs_ascending, rel_eps: float = 1e-9) -> np.ndarray:
    """Roots of a univariate polynomial given ascending coefficients."""
    cs = np.asarray(coeffs_ascending, dtype=complex)
    if cs.size == 0:
        return np.zeros(0, dtype=complex)
    mag = np.abs(cs).max()
    if mag == 0:
        return np.zeros(0, dtype=complex)
    keep = np.nonzero(np.abs(cs) > rel_eps * mag)[0]
    cs = cs[: keep.max() + 1]
    if cs.size <= 1:
        return np.zeros(0, dtype=complex)
    return np.roots(cs[::-1])


def resultant_v_coeffs(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Ascending u-coefficients of Res_v(P, Q) via evaluation at roots of unity.

    Both inputs are coefficient grids over u^i v^j with v-degree >= 1.
    """
    P = trim2(P)
    Q = trim2(Q)
    m = P.shape[1] - 1
    n = Q.shape[1] - 1
    if m < 1 or n < 1:
        raise ValueError("resultant_v_coeffs needs v-degree >= 1 on both sides")
    bound = m * (Q.shape[0] - 1) + n * (P.shape[0] - 1) + 1
    M = bound
    u = np.exp(2j * np.pi * np.arange(M) / M)
    A = (u[:, None] ** np.arange(P.shape[0])[None, :]) @ P
    B = (u[:, None] ** np.arange(Q.shape[0])[None, :]) @ Q
    S = np.zeros((M, m + n, m + n), dtype=complex)
    Arev = A[:, ::-1]
    Brev = B[:, ::-1]
    for r in range(n):
        S[:, r, r : r + m + 1] = Arev
    for r in range(m):
        S[:, n + r, r : r + n + 1] = Brev
    # det(S)_s = R(w^s) with w = exp(2 pi i / M), so c_k = fft(det)/M.
    return np.fft.fft(np.linalg.det(S)) / M


def _newton_polish(P, Q, Pu, Pv, Qu, Qv, z, steps: int = 40):
    u0, v0 = z
    for _ in range(steps):
        f = polyval2(P, u0, v0)
        g = polyval2(Q, u0, v0)
        j11 = polyval2(Pu, u0, v0)
        j12 = polyval2(Pv, u0, v0)
        j21 = polyval2(Qu, u0, v0)
        j22 = polyval2(Qv, u0, v0)
        det = j11 * j22 - j12 * j21
        if det == 0:
            break
        du = (f * j22 - g * j12) / det
        dv = (g * j11 - f * j21) / det
        u0, v0 = u0 - du, v0 - dv
        if abs(du) + abs(dv) < 1e-14 * (1 + abs(u0) + abs(v0)):
            break
    return u0, v0


def _poly_scale(C, u0, v0) -> float:
    pu = np.abs(u0) ** np.arange(C.shape[0])
    pv = np.abs(v0) ** np.arange(C.shape[1])
    return float(pu @ np.abs(C) @ pv)


def common_zeros(P: np.ndarray, Q: np.ndarray, residual_tol: float = 1e-8):
    """Common zeros of two bivariate polynomials; returns (points, converged)."""
    P = trim2(P)
    Q = trim2(Q)
    dvP = P.shape[1] - 1
    dvQ = Q.shape[1] - 1
    raw: list[tuple[complex, complex]] = []
    if dvP == 0 and dvQ == 0:
        return np.zeros((0, 2), dtype=complex), True
    if dvP == 0 or dvQ == 0:
        vfree, other = (P, Q) if dvP == 0 else (Q, P)
        for u0 in poly_roots(vfree[:, 0]):
            for v0 in poly_roots(_coeffs_in_v(other, u0)):
                raw.append((u0, v0))
    else:
        for u0 in poly_roots(resultant_v_coeffs(P, Q)):
            vc = _coeffs_in_v(P, u0)
            scale = np.abs(P).max() * (1 + abs(u0)) ** (P.shape[0] - 1)
            if np.abs(vc).max() <= 1e-8 * scale:
                # P vanishes along this fiber; take candidates from Q alone.
                for v0 in poly_roots(_coeffs_in_v(Q, u0)):
                    raw.append((u0, v0))
                continue
            for v0 in poly_roots(vc):
                if abs(polyval2(Q, u0, v0)) <= 1e-5 * (1 + _poly_scale(Q, u0, v0)):
                    raw.append((u0, v0))
    Pu, Pv = partial_u(P), partial_v(P)
    Qu, Qv = partial_u(Q), partial_v(Q)
    points: list[tuple[complex, complex]] = []
    converged = True
    for z in raw:
        u0, v0 = _newton_polish(P, Q, Pu, Pv, Qu, Qv, z)
        res = abs(polyval2(P, u0, v0)) + abs(polyval2(Q, u0, v0))
        scale = 1 + _poly_scale(P, u0, v0) + _poly_scale(Q, u0, v0)
        if res > residual_tol * scale:
            converged = False
            continue
        if all(abs(u0 - a) + abs(v0 - b) > 1e-7 * (1 + abs(u0) + abs(v0))
               for a, b in points):
            points.append((u0, v0))
    return np.array(points, dtype=complex).reshape(-1, 2), converged
