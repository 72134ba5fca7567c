"""Numerical Riemann-surface machinery for the line-product family.

The affine surface is cut out by prod L(x, y) = t.  A shear u = x + theta*y,
v = y with theta chosen so that every line keeps a nonzero v-coefficient
makes u a degree-d projection.  Small circles in the u-plane around the
images of the intersection points lift to closed loops on the fiber, and
the regulator pairing integrates log|f| d arg g - log|g| d arg f over them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from ._kernels import track_roots
from .config import IntersectionPoint, LineConfiguration
from .exact import ExactScalar
from .numpoly import (
    lines_product_coeffs,
    partial_v,
    poly_roots,
    polyval2,
    resultant_v_coeffs,
)
from .symbols import K2Symbol, registry_for

__all__ = [
    "CLOSURE_TOL",
    "EVAL_TOL",
    "QUAD_TOL",
    "SURFACE_TOL",
    "EmbeddedConfig",
    "EvaluationError",
    "LiftedLoop",
    "LoopBuildError",
    "QuadratureError",
    "SurfaceError",
    "build_gamma_loop",
    "fiber_roots",
    "integrate_eta",
    "lift_path",
    "loop_from_parametrization",
    "pairing",
    "pairing_detailed",
]

SURFACE_TOL = 1e-10
CLOSURE_TOL = 1e-8
QUAD_TOL = 1e-8
EVAL_TOL = 1e-12

_MAX_DENSITY = 1 << 15


class SurfaceError(RuntimeError):
    """Base class for analytic failures."""


class LoopBuildError(SurfaceError):
    """Loop construction failed a certificate or did not close."""


class QuadratureError(SurfaceError):
    """Quadrature did not converge within the refinement budget."""


class EvaluationError(SurfaceError):
    """A function could not be evaluated reliably on the samples."""


class EmbeddedConfig:
    """A line configuration embedded over the complex numbers at fixed t.

    theta defaults to the configuration's own projection choice; passing
    an explicit theta skips validation, which permits degenerate slices
    for fiber inspection but disables loop building.
    """

    def __init__(self, config: LineConfiguration, t=None, theta=None,
                 branch: str = "plus"):
        self.config = config
        self.branch = branch
        if theta is None:
            theta = config.choose_projection().theta
        elif not isinstance(theta, Fraction):
            theta = Fraction(theta)
        self.theta = theta
        if t is None:
            t = config.t_float(branch)
        self.t = complex(t)
        if self.t == 0:
            raise ValueError("parameter t must be nonzero")
        self.registry = registry_for(config)
        self.line_ids = [f"{i},{j}" for (i, j) in config.line_ids()]
        theta_exact = ExactScalar.from_any(theta)
        self._sheared: dict[str, tuple[complex, complex, complex]] = {}
        self.projection_valid = True
        sheared_triples = []
        for (i, j) in config.line_ids():
            a, b, c = config.line(i, j)
            b_sheared = b - a * theta_exact
            if not b_sheared:
                self.projection_valid = False
            triple = (self._c(a), self._c(b_sheared), self._c(c))
            self._sheared[f"{i},{j}"] = triple
            sheared_triples.append(triple)
        grid = lines_product_coeffs(sheared_triples)
        grid[0, 0] -= self.t
        self.grid = grid
        self._abs_grid = np.abs(grid)
        self._branch_points: Optional[np.ndarray] = None

    def _c(self, value) -> complex:
        if isinstance(value, ExactScalar):
            return complex(float(value.embed(self.branch)))
        return complex(value)

    # -- fibers ----------------------------------------------------------

    def fiber_coeffs(self, u: complex) -> np.ndarray:
        """Ascending v-coefficients of the fiber polynomial over u."""
        pows = complex(u) ** np.arange(self.grid.shape[0])
        return pows @ self.grid

    def fiber_roots(self, u: complex) -> np.ndarray:
        try:
            return poly_roots(self.fiber_coeffs(u))
        except np.linalg.LinAlgError as exc:
            raise SurfaceError(f"fiber root solve failed at u = {u}") from exc

    def branch_points_u(self) -> np.ndarray:
        """All finite u where the fiber polynomial has a repeated root."""
        if self._branch_points is None:
            disc = resultant_v_coeffs(self.grid, partial_v(self.grid))
            self._branch_points = poly_roots(disc)
        return self._branch_points

    # -- intersection-point geometry ---------------------------------------

    def node_u(self, point: IntersectionPoint) -> complex:
        return self._c(point.u_value(self.theta))

    def node_xy(self, point: IntersectionPoint) -> tuple[complex, complex]:
        return self._c(point.x), self._c(point.y)

    def safe_radius(self, point: IntersectionPoint) -> float:
        u_s = self.node_u(point)
        dists = [abs(self.node_u(p) - u_s)
                 for p in self.config.all_intersections()
                 if p.key != point.key]
        return 0.25 * min(dists)

    def safe_parameter(self, point: IntersectionPoint, r: float) -> float:
        """Largest |t| keeping the node's branch-point pair inside r/2.

        Near the node the two incident lines dominate and the local model
        l1*l2*C = t places the pair at |du| = 2*sqrt(|B1*B2*t/C|)/|det|.
        """
        A1, B1, _ = self._sheared[f"{point.i},{point.j}"]
        A2, B2, _ = self._sheared[f"{point.k},{point.l}"]
        det = A1 * B2 - A2 * B1
        x_s, y_s = self.node_xy(point)
        c_s = 1.0 + 0.0j
        for fid in self.line_ids:
            if fid in (f"{point.i},{point.j}", f"{point.k},{point.l}"):
                continue
            form = self.registry.form(fid)
            c_s *= self._c(form.a) * x_s + self._c(form.b) * y_s + self._c(form.c)
        return abs(c_s) * abs(det) ** 2 * r * r / (16.0 * abs(B1 * B2))

    # -- function evaluation -------------------------------------------------

    def _direct_form_values(self, fid: str, xs, ys) -> np.ndarray:
        try:
            form = self.registry.form(fid)
        except KeyError:
            raise EvaluationError(f"unknown form id {fid!r}") from None
        return (self._c(form.a) * xs + self._c(form.b) * ys + self._c(form.c))

    def form_values(self, fid: str, xs, ys) -> np.ndarray:
        """Values of a registry form along samples, stabilized on-surface.

        A configured line whose direct values span a huge dynamic range is
        recomputed through prod L = t, which keeps the relative accuracy
        of the small factor at machine level; ad-hoc forms are always
        evaluated directly.
        """
        return self.form_values_checked(fid, xs, ys)[0]

    def form_values_checked(self, fid: str, xs, ys) -> tuple[np.ndarray, bool]:
        """form_values plus a flag telling how the values were obtained.

        True means the product identity supplied the small factor, so tiny
        moduli still carry machine relative accuracy; False means plain
        affine evaluation, whose absolute error floor makes tiny moduli
        meaningless.  Raises when a second configured line vanishes on the
        same samples, since the identity can only absorb one small factor.
        """
        direct = self._direct_form_values(fid, xs, ys)
        if fid in self._sheared:
            mags = np.abs(direct)
            if mags.min() < 1e-5 * (1.0 + mags.max()):
                others = np.ones_like(direct)
                for other in self.line_ids:
                    if other == fid:
                        continue
                    ovals = self._direct_form_values(other, xs, ys)
                    omags = np.abs(ovals)
                    if omags.min() < 1e-5 * (1.0 + omags.max()):
                        raise EvaluationError(
                            f"forms {fid!r} and {other!r} both vanish near "
                            "the samples; cannot stabilize two small factors")
                    others = others * ovals
                return self.t / others, True
        return direct, False

    def surface_residual(self, xs, ys) -> float:
        """Max relative residual of prod L - t over the samples."""
        us = xs + float(self.theta) * ys
        res = np.abs(polyval2(self.grid, us, ys))
        scale = np.real(polyval2(self._abs_grid, np.abs(us), np.abs(ys)))
        return float((res / scale).max())


@dataclass
class LiftedLoop:
    """A sampled path on the fiber, ordered and possibly closed.

    xs, ys have one more entry than the density; for closed loops the
    last sample repeats the first up to closure_residual.
    """

    xs: np.ndarray
    ys: np.ndarray
    orientation: int
    closure_residual: float
    on_surface_residual: float
    density: int
    closed: bool = True
    emb: Optional[EmbeddedConfig] = None
    label: str = ""
    _builder: Optional[Callable[[int], "LiftedLoop"]] = field(
        default=None, repr=False, compare=False)

    def samples(self) -> list[tuple[complex, complex]]:
        return [(complex(x), complex(y)) for x, y in zip(self.xs, self.ys)]

    def refine(self) -> "LiftedLoop":
        if self._builder is None:
            raise QuadratureError(
                f"loop {self.label or '<anonymous>'} cannot be refined: "
                "no builder attached")
        return self._builder(2 * self.density)

    def reversed(self) -> "LiftedLoop":
        builder = None
        if self._builder is not None:
            base = self._builder
            builder = lambda n: base(n).reversed()
        return LiftedLoop(
            xs=self.xs[::-1].copy(),
            ys=self.ys[::-1].copy(),
            orientation=-self.orientation,
            closure_residual=self.closure_residual,
            on_surface_residual=self.on_surface_residual,
            density=self.density,
            closed=self.closed,
            emb=self.emb,
            label=self.label + "~reversed" if self.label else "",
            _builder=builder,
        )

    def csv_rows(self) -> list[tuple[int, float, float, float, float]]:
        return [(k, x.real, x.imag, y.real, y.imag)
                for k, (x, y) in enumerate(zip(self.xs, self.ys))]


def loop_from_parametrization(sample_fn: Callable[[int], tuple], density: int,
                              *, orientation: int = 1,
                              emb: Optional[EmbeddedConfig] = None,
                              label: str = "") -> LiftedLoop:
    """Wrap an explicit sampler (n -> (xs, ys) of length n+1) as a loop."""

    def builder(n: int) -> LiftedLoop:
        xs, ys = sample_fn(n)
        xs = np.asarray(xs, dtype=complex)
        ys = np.asarray(ys, dtype=complex)
        closure = abs(complex(xs[-1] - xs[0])) + abs(complex(ys[-1] - ys[0]))
        closure /= 1.0 + abs(complex(xs[0])) + abs(complex(ys[0]))
        resid = emb.surface_residual(xs, ys) if emb is not None else 0.0
        return LiftedLoop(xs, ys, orientation, closure, resid, n,
                          closed=closure < CLOSURE_TOL, emb=emb, label=label,
                          _builder=builder)

    return builder(density)


def fiber_roots(emb: EmbeddedConfig, u: complex) -> np.ndarray:
    return emb.fiber_roots(u)


def lift_path(emb: EmbeddedConfig, u_path, y_start) -> LiftedLoop:
    """Continue the fiber root nearest y_start along the given u samples."""
    u_path = np.ascontiguousarray(u_path, dtype=complex)
    if u_path.size < 2:
        raise ValueError("u_path needs at least two samples")
    roots0 = emb.fiber_roots(u_path[0])
    if roots0.size == 0:
        raise SurfaceError("empty fiber over the path start")
    j0 = int(np.argmin(np.abs(roots0 - complex(y_start))))
    if abs(roots0[j0] - complex(y_start)) > 1e-6 * (1.0 + abs(complex(y_start))):
        raise EvaluationError(
            f"y_start = {y_start} is not a fiber root over u = {u_path[0]}")
    roots_path, ok, idx = track_roots(emb.grid, u_path, roots0)
    if not ok:
        raise LoopBuildError(
            f"root tracking failed near u = {u_path[idx]} (sample {idx}); "
            "refine the path discretization")
    vs = roots_path[:, j0]
    xs = u_path - float(emb.theta) * vs
    closure = float(abs(vs[-1] - vs[0]) / (1.0 + abs(vs[0])))
    base_closed = abs(u_path[-1] - u_path[0]) < 1e-12 * (1.0 + abs(u_path[0]))
    return LiftedLoop(
        xs=xs, ys=vs, orientation=1,
        closure_residual=closure,
        on_surface_residual=emb.surface_residual(xs, vs),
        density=int(u_path.size - 1),
        closed=bool(base_closed and closure < CLOSURE_TOL),
        emb=emb)


def build_gamma_loop(emb: EmbeddedConfig, point: IntersectionPoint,
                     radius=None, density: int = 64,
                     *, max_density: int = _MAX_DENSITY,
                     closure_tol: float = CLOSURE_TOL,
                     surface_tol: float = SURFACE_TOL) -> LiftedLoop:
    """Clockwise loop on the fiber around the intersection point.

    The start branch is the fiber root nearest the first of the two lines
    through the point.  Certificates checked up front: the point's own
    two branch points sit inside r/2 with no others closer than 2r, and
    the start root is at least ten times closer to the designated line
    than any other root.
    """
    if not emb.projection_valid:
        raise LoopBuildError(
            "projection is degenerate for this theta; loops need every "
            "line to keep a nonzero v-coefficient")
    u_s = emb.node_u(point)
    safe = emb.safe_radius(point)
    r = safe if radius is None else float(radius)
    if not 0 < r <= safe:
        raise LoopBuildError(f"radius {r} outside (0, {safe}] for this point")

    bps = emb.branch_points_u()
    dist = np.abs(bps - u_s)
    inside = int((dist < 0.5 * r).sum())
    annulus = int(((dist >= 0.5 * r) & (dist < 2.0 * r)).sum())
    if inside != 2 or annulus > 0:
        raise LoopBuildError(
            f"branch-point certificate failed at {point.key}: {inside} "
            f"inside r/2 (want 2), {annulus} in the annulus [r/2, 2r) "
            f"(want 0); shrink |t| below {emb.safe_parameter(point, r):.3e} "
            "(a larger radius would stop isolating the point)")

    u0 = u_s + r
    roots0 = emb.fiber_roots(u0)
    A1, B1, C1 = emb._sheared[f"{point.i},{point.j}"]
    v_target = -(A1 * u0 + C1) / B1
    gaps = np.sort(np.abs(roots0 - v_target))
    if gaps.size >= 2 and gaps[0] > 0 and gaps[1] / gaps[0] < 10.0:
        raise LoopBuildError(
            f"start-branch gap certificate failed at {point.key}: ratio "
            f"{gaps[1] / gaps[0]:.2f} < 10; shrink r or |t|")
    j0 = int(np.argmin(np.abs(roots0 - v_target)))
    label = f"gamma[{point.i},{point.j}|{point.k},{point.l}]"

    def attempt(n: int):
        u_path = u_s + r * np.exp(-2j * np.pi * np.arange(n + 1) / n)
        u_path[-1] = u_path[0]
        roots_path, ok, idx = track_roots(emb.grid, u_path, roots0)
        if not ok:
            return ("track", idx)
        vs = roots_path[:, j0]
        closure = float(abs(vs[-1] - vs[0]) / (1.0 + abs(vs[0])))
        if closure >= closure_tol:
            return ("closure", closure)
        xs = u_path - float(emb.theta) * vs
        resid = emb.surface_residual(xs, vs)
        if resid >= surface_tol:
            return ("residual", resid)
        return LiftedLoop(xs, vs, 1, closure, resid, n, closed=True,
                          emb=emb, label=label, _builder=builder)

    def builder(n: int) -> LiftedLoop:
        m = n
        last = None
        while m <= max_density:
            got = attempt(m)
            if isinstance(got, LiftedLoop):
                return got
            last = got
            m *= 2
        kind, value = last
        if kind == "closure":
            raise LoopBuildError(
                f"loop at {point.key} does not close (residual {value:.3e}); "
                "the branch pairing is wrong at this t; shrink |t|")
        raise LoopBuildError(
            f"loop at {point.key} failed ({kind} = {value}) up to density "
            f"{max_density}; shrink r or |t|")

    return builder(density)


# -- quadrature ---------------------------------------------------------------


def _as_values(fn, xs, ys) -> np.ndarray:
    vals = np.asarray(fn(xs, ys), dtype=complex)
    if vals.shape != xs.shape:
        vals = np.broadcast_to(vals, xs.shape).astype(complex)
    return vals


def _eta_trapezoid(xs, ys, f, g, eval_tol: float):
    F = _as_values(f, xs, ys)
    G = _as_values(g, xs, ys)
    mF = np.abs(F)
    mG = np.abs(G)
    if mF.min() <= eval_tol or mG.min() <= eval_tol:
        raise EvaluationError(
            f"function modulus dips to {min(mF.min(), mG.min()):.3e} "
            f"(eval_tol {eval_tol}); the function vanishes near the path")
    dF = np.angle(F[1:] / F[:-1])
    dG = np.angle(G[1:] / G[:-1])
    ok = bool(np.abs(dF).max() < 0.5 * np.pi
              and np.abs(dG).max() < 0.5 * np.pi)
    lF = np.log(mF)
    lG = np.log(mG)
    val = float(np.sum(0.5 * (lF[:-1] + lF[1:]) * dG)
                - np.sum(0.5 * (lG[:-1] + lG[1:]) * dF))
    return val, ok


def integrate_eta(loop: LiftedLoop, f, g, *, quad_tol: float = QUAD_TOL,
                  eval_tol: float = EVAL_TOL, max_refine: int = 10) -> float:
    """Integral of log|f| d arg g - log|g| d arg f over the loop.

    Each estimate is accepted only when halving the sampling changes it
    by less than quad_tol relative and no phase step reaches pi/2; the
    loop is rebuilt at doubled density otherwise.
    """
    cur = loop
    for _ in range(max_refine):
        n = cur.xs.size - 1
        if n >= 4 and n % 2 == 0:
            full, ok_full = _eta_trapezoid(cur.xs, cur.ys, f, g, eval_tol)
            half, ok_half = _eta_trapezoid(cur.xs[::2], cur.ys[::2], f, g,
                                           eval_tol)
            if ok_full and ok_half and abs(full - half) < quad_tol * (
                    1.0 + abs(full)):
                return full
        cur = cur.refine()
    raise QuadratureError(
        f"eta quadrature did not converge after {max_refine} refinements "
        f"(density {cur.xs.size - 1})")


def _pairing_value(emb: EmbeddedConfig, xs, ys, sym: K2Symbol, fids,
                   eval_tol: float):
    two_pi = 2.0 * np.pi
    darg = {}
    logs = {}
    winding = {}
    ok = True
    for fid in fids:
        vals, stabilized = emb.form_values_checked(fid, xs, ys)
        mags = np.abs(vals)
        if not stabilized and mags.min() <= eval_tol:
            raise EvaluationError(
                f"form {fid!r} modulus dips to {mags.min():.3e} on the loop")
        d = np.angle(vals[1:] / vals[:-1])
        if np.abs(d).max() >= 0.5 * np.pi:
            ok = False
        w = float(d.sum())
        k = round(w / two_pi)
        if abs(w - two_pi * k) > 1e-6:
            ok = False
        darg[fid] = d
        logs[fid] = np.log(mags)
        winding[fid] = two_pi * k
    eta_table = {}
    for fa in fids:
        la = logs[fa]
        mid = 0.5 * (la[:-1] + la[1:])
        for fb in fids:
            eta_table[fa, fb] = float(np.sum(mid * darg[fb]))
    total = 0.0
    for left, right, coeff in sym.terms:
        log_c1 = math.log(abs(emb._c(left.constant)))
        log_c2 = math.log(abs(emb._c(right.constant)))
        part = 0.0
        for fa, ea in left.exponents.items():
            for fb, eb in right.exponents.items():
                part += ea * eb * (eta_table[fa, fb] - eta_table[fb, fa])
        part += log_c1 * sum(eb * winding[fb]
                             for fb, eb in right.exponents.items())
        part -= log_c2 * sum(ea * winding[fa]
                             for fa, ea in left.exponents.items())
        total += coeff * part
    return total / two_pi, ok


def pairing_detailed(loop: LiftedLoop, sym: K2Symbol, *,
                     quad_tol: float = QUAD_TOL, eval_tol: float = EVAL_TOL,
                     max_refine: int = 10) -> tuple[float, int]:
    """Like pairing, but also reports the sampling density accepted."""
    if not sym.terms:
        return 0.0, loop.xs.size - 1
    if loop.emb is None:
        raise EvaluationError("loop carries no embedding; cannot evaluate "
                              "configured lines")
    emb = loop.emb
    fids = sorted({fid for left, right, _ in sym.terms
                   for fid in (*left.exponents, *right.exponents)})
    cur = loop
    for _ in range(max_refine):
        n = cur.xs.size - 1
        if n >= 4 and n % 2 == 0:
            full, ok_full = _pairing_value(emb, cur.xs, cur.ys, sym, fids,
                                           eval_tol)
            half, ok_half = _pairing_value(emb, cur.xs[::2], cur.ys[::2],
                                           sym, fids, eval_tol)
            if ok_full and ok_half and abs(full - half) < quad_tol * (
                    1.0 + abs(full)):
                return full, n
        cur = cur.refine()
    raise QuadratureError(
        f"pairing did not converge after {max_refine} refinements "
        f"(density {cur.xs.size - 1})")


def pairing(loop: LiftedLoop, sym: K2Symbol, *, quad_tol: float = QUAD_TOL,
            eval_tol: float = EVAL_TOL, max_refine: int = 10) -> float:
    """(1/2pi) * integral of eta over the loop, extended to symbols.

    Expands eta additively in each slot, so only per-line integrals and
    integer winding numbers are accumulated.
    """
    return pairing_detailed(loop, sym, quad_tol=quad_tol, eval_tol=eval_tol,
                            max_refine=max_refine)[0]
