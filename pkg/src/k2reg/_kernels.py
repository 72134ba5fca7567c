"""Warm-started simultaneous root tracking along paths in the base.

The fiber polynomial over a path sample is a univariate polynomial in v
whose coefficients are themselves polynomials in u.  Tracking all fiber
roots step by step is the hot loop of every analytic computation here,
so it ships in two interchangeable implementations: a numba-compiled
one and a vectorized numpy one.  Setting K2REG_PURE_NUMPY=1 before
import selects the numpy path; otherwise numba is used when importable.

Both implementations enforce the same per-step contract: after moving
to a new sample, every root must sit more than three times its own
displacement away from every other root.  A violation means the step
was too coarse to certify the root-to-root matching, and the caller is
expected to retry at doubled sampling density.
"""

from __future__ import annotations

import os

import numpy as np

# Convergence of the Weierstrass sweep is quadratic from a warm start;
# the iteration cap only matters for the cold first sample.
_DK_TOL = 1e-13
_DK_MAX_ITER = 80


def _track_loops(coeffs, u_path, roots0, tol, max_iter):
    """Explicit-loop tracker; the body stays inside numba's subset."""
    nu = coeffs.shape[0]
    nv = coeffs.shape[1]
    d = nv - 1
    n = u_path.shape[0]
    out = np.empty((n, d), np.complex128)
    roots = roots0.copy()
    prev = roots0.copy()
    c = np.empty(nv, np.complex128)
    for s in range(n):
        u = u_path[s]
        for k in range(nv):
            acc = 0.0 + 0.0j
            for i in range(nu - 1, -1, -1):
                acc = acc * u + coeffs[i, k]
            c[k] = acc
        lc = c[d]
        if lc == 0:
            return out, False, s
        converged = False
        for _ in range(max_iter):
            max_step = 0.0
            for j in range(d):
                z = roots[j]
                p = 0.0 + 0.0j
                for k in range(d, -1, -1):
                    p = p * z + c[k]
                q = lc
                for k in range(d):
                    if k != j:
                        q = q * (z - roots[k])
                if q == 0:
                    return out, False, s
                step = p / q
                roots[j] = z - step
                rel = abs(step) / (1.0 + abs(roots[j]))
                if rel > max_step:
                    max_step = rel
            if max_step < tol:
                converged = True
                break
        if not converged:
            return out, False, s
        if s > 0:
            for j in range(d):
                delta = abs(roots[j] - prev[j])
                rho = np.inf
                for k in range(d):
                    if k != j:
                        gap = abs(roots[j] - roots[k])
                        if gap < rho:
                            rho = gap
                if rho <= 3.0 * delta:
                    return out, False, s
        for j in range(d):
            out[s, j] = roots[j]
            prev[j] = roots[j]
    return out, True, -1


def track_roots_pure(coeffs, u_path, roots0, tol=_DK_TOL, max_iter=_DK_MAX_ITER):
    """Vectorized numpy twin of the compiled tracker."""
    coeffs = np.ascontiguousarray(coeffs, dtype=np.complex128)
    u_path = np.ascontiguousarray(u_path, dtype=np.complex128)
    nu, nv = coeffs.shape
    d = nv - 1
    n = u_path.shape[0]
    out = np.empty((n, d), np.complex128)
    roots = np.array(roots0, dtype=np.complex128)
    prev = roots.copy()
    powers = np.arange(nu)
    eye = np.eye(d, dtype=bool)
    for s in range(n):
        c = (u_path[s] ** powers) @ coeffs
        lc = c[d]
        if lc == 0:
            return out, False, s
        desc = c[::-1]
        converged = False
        for _ in range(max_iter):
            p = np.polyval(desc, roots)
            diff = roots[:, None] - roots[None, :]
            diff[eye] = 1.0
            q = lc * diff.prod(axis=1)
            if np.any(q == 0):
                return out, False, s
            step = p / q
            roots = roots - step
            if np.max(np.abs(step) / (1.0 + np.abs(roots))) < tol:
                converged = True
                break
        if not converged:
            return out, False, s
        if s > 0:
            delta = np.abs(roots - prev)
            gaps = np.abs(roots[:, None] - roots[None, :])
            gaps[eye] = np.inf
            if np.any(gaps.min(axis=1) <= 3.0 * delta):
                return out, False, s
        out[s] = roots
        prev = roots.copy()
    return out, True, -1


PURE_NUMPY = os.environ.get("K2REG_PURE_NUMPY", "") == "1"

track_roots_jit = None
if not PURE_NUMPY:
    try:
        from numba import njit

        track_roots_jit = njit(cache=True)(_track_loops)
    except ImportError:
        PURE_NUMPY = True


def active_backend() -> str:
    return "pure-numpy" if PURE_NUMPY else "numba"


def track_roots(coeffs, u_path, roots0, tol=_DK_TOL, max_iter=_DK_MAX_ITER):
    """Track all fiber roots along u_path from the warm start roots0.

    coeffs is the (u-power, v-power) coefficient grid of the fiber
    polynomial.  Returns (roots, ok, fail_index) where roots has one row
    per path sample in the same column order as roots0.  ok is False
    when the Weierstrass sweep failed to converge or the collision
    contract was violated; fail_index is the offending sample.
    """
    if PURE_NUMPY:
        return track_roots_pure(coeffs, u_path, roots0, tol, max_iter)
    return track_roots_jit(
        np.ascontiguousarray(coeffs, dtype=np.complex128),
        np.ascontiguousarray(u_path, dtype=np.complex128),
        np.ascontiguousarray(roots0, dtype=np.complex128),
        float(tol),
        int(max_iter),
    )
