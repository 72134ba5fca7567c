"""Regulator matrices over the node loops and their limiting behavior.

The determinant of the pairing matrix between the loops attached to the
special intersection points and the matching symbols grows like a power
of log|t|; the sweeps here exhibit that growth, entry by entry, and the
quadratic-field variants reproduce the 16 * log^2 limits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .config import LineConfiguration
from .exact import ExactScalar, exact_sqrt
from .surface import (
    EVAL_TOL,
    QUAD_TOL,
    EmbeddedConfig,
    LiftedLoop,
    SurfaceError,
    build_gamma_loop,
    integrate_eta,
    loop_from_parametrization,
    pairing_detailed,
)
from .symbols import K2Symbol, RationalMonomial, m_for_point, registry_for

__all__ = [
    "LocalModelReport",
    "QuadraticFieldReport",
    "RegulatorReport",
    "limit_sweep",
    "local_model_sweep",
    "quadratic_field_regulator",
    "quadratic_unit_regulator",
    "regulator_matrix",
    "relation_shadow",
    "sweep_csv_rows",
]

_ONE = ExactScalar.from_any(1)


@dataclass
class RegulatorReport:
    """Pairing matrix over the node loops at one parameter value."""

    t: complex
    loops: list[LiftedLoop]
    elements: list[K2Symbol]
    matrix: list[list[float]]
    abs_det: float
    normalized: float
    entry_normalized: list[list[float]]
    diagnostics: dict

    def to_json_dict(self) -> dict:
        return {
            "t": {"re": self.t.real, "im": self.t.imag},
            "genus": len(self.loops),
            "elements": [e.to_json() for e in self.elements],
            "matrix": self.matrix,
            "entry_normalized": self.entry_normalized,
            "abs_det": self.abs_det,
            "normalized": self.normalized,
            "diagnostics": self.diagnostics,
        }


def regulator_matrix(emb: EmbeddedConfig, elements: Sequence[K2Symbol],
                     *, loops: Optional[Sequence[LiftedLoop]] = None,
                     radius=None, density: int = 64,
                     quad_tol: float = QUAD_TOL,
                     eval_tol: float = EVAL_TOL) -> RegulatorReport:
    """Pairing matrix of the special-point loops against the elements.

    The matrix has one row per loop and one column per element; abs_det
    uses the empty-determinant convention 1 and requires a square matrix
    otherwise.
    """
    config = emb.config
    points = config.special_set_S()
    if loops is None:
        loops = []
        for p in points:
            try:
                loops.append(build_gamma_loop(emb, p, radius=radius,
                                              density=density))
            except SurfaceError as exc:
                raise type(exc)(f"loop at point {p.key}: {exc}") from exc
    loops = list(loops)
    elements = list(elements)
    log_t = math.log(abs(emb.t))
    matrix: list[list[float]] = []
    densities: list[list[int]] = []
    for i, loop in enumerate(loops):
        row: list[float] = []
        drow: list[int] = []
        for j, elem in enumerate(elements):
            try:
                val, dens = pairing_detailed(loop, elem, quad_tol=quad_tol,
                                             eval_tol=eval_tol)
            except SurfaceError as exc:
                raise type(exc)(
                    f"entry (loop {i}: {loop.label or i}, element {j}): "
                    f"{exc}") from exc
            row.append(val)
            drow.append(dens)
        matrix.append(row)
        densities.append(drow)
    if elements and len(elements) != len(loops):
        raise ValueError(
            f"determinant needs a square matrix, got {len(loops)} loops "
            f"and {len(elements)} elements")
    if elements:
        abs_det = float(abs(np.linalg.det(np.array(matrix))))
    else:
        abs_det = 1.0
    g = len(loops)
    normalized = abs_det / abs(log_t) ** g if g else abs_det
    entry_normalized = [[v / log_t for v in row] for row in matrix]
    diagnostics = {
        "loops": [
            {
                "label": loop.label,
                "density": loop.density,
                "closure_residual": loop.closure_residual,
                "surface_residual": loop.on_surface_residual,
            }
            for loop in loops
        ],
        "entry_density": densities,
    }
    return RegulatorReport(emb.t, loops, elements, matrix, abs_det,
                           normalized, entry_normalized, diagnostics)


def limit_sweep(config: LineConfiguration, t_schedule: Sequence,
                *, elements: Optional[Sequence[K2Symbol]] = None,
                radius=None, density: int = 64,
                branch: str = "plus") -> list[RegulatorReport]:
    """Regulator reports along a strictly decreasing |t| schedule."""
    mags = [abs(complex(t)) for t in t_schedule]
    if not mags:
        raise ValueError("empty t schedule")
    if any(b >= a for a, b in zip(mags, mags[1:])):
        raise ValueError("t schedule must be strictly decreasing in |t|")
    if elements is None:
        elements = [m_for_point(config, p) for p in config.special_set_S()]
    reports = []
    for t in t_schedule:
        emb = EmbeddedConfig(config, t=t, branch=branch)
        reports.append(regulator_matrix(emb, elements, radius=radius,
                                        density=density))
    return reports


def sweep_csv_rows(reports: Sequence[RegulatorReport]):
    """Header and rows (t, normalized, abs_det, per-entry columns)."""
    if not reports:
        return ["t", "normalized", "abs_det"], []
    g = len(reports[0].loops)
    m = len(reports[0].elements)
    header = ["t", "normalized", "abs_det"] + [
        f"entry_{i}_{j}" for i in range(g) for j in range(m)]
    rows = []
    for rep in reports:
        t_cell = rep.t.real if rep.t.imag == 0 else rep.t
        rows.append([t_cell, rep.normalized, rep.abs_det]
                    + [rep.entry_normalized[i][j]
                       for i in range(g) for j in range(m)])
    return header, rows


@dataclass
class LocalModelReport:
    """Least-squares slope of the model integral against log|t|."""

    slope: float
    intercept: float
    residual: float
    values: list[tuple[float, float]]


def _local_model_loop(t: complex, h_fn: Callable, radius: float,
                      density: int) -> LiftedLoop:
    def sampler(n: int):
        xs = radius * np.exp(-2j * np.pi * np.arange(n + 1) / n)
        xs[-1] = xs[0]
        ys = t / (xs * np.asarray(h_fn(xs, np.zeros_like(xs)), dtype=complex))
        for _ in range(100):
            new = t / (xs * np.asarray(h_fn(xs, ys), dtype=complex))
            delta = np.abs(new - ys).max()
            ys = new
            if delta < 1e-15 * (1.0 + np.abs(ys).max()):
                break
        else:
            raise SurfaceError("local model sheet iteration did not converge")
        return xs, ys

    return loop_from_parametrization(sampler, density, label="local-model")


def local_model_sweep(a: int, b: int, u_fn: Callable, v_fn: Callable,
                      h_fn: Callable, t_schedule: Sequence,
                      *, radius: float = 0.3, density: int = 64,
                      quad_tol: float = QUAD_TOL) -> LocalModelReport:
    """Integrate eta(u*x^a, v*y^b) over loops on x*y*h = t and fit F(t).

    The fit is least squares of F against log|t|; for unit u, v, h the
    slope is 2*pi*a*b and the remainder extrapolates to a finite limit.
    """
    origin = np.zeros(1, dtype=complex)
    if abs(complex(np.asarray(h_fn(origin, origin)).ravel()[0])) == 0:
        raise ValueError("h must not vanish at the origin")
    for name, fn in (("u", u_fn), ("v", v_fn)):
        if abs(complex(np.asarray(fn(origin, origin)).ravel()[0])) == 0:
            raise ValueError(f"{name} must not vanish at the origin")
    values = []
    for t in t_schedule:
        t = complex(t)
        loop = _local_model_loop(t, h_fn, radius, density)
        f = lambda x, y: np.asarray(u_fn(x, y), dtype=complex) * x ** a
        g = lambda x, y: np.asarray(v_fn(x, y), dtype=complex) * y ** b
        values.append((abs(t), integrate_eta(loop, f, g, quad_tol=quad_tol)))
    logs = np.array([math.log(t) for t, _ in values])
    fs = np.array([f for _, f in values])
    if len(values) > 1:
        slope, intercept = np.polyfit(logs, fs, 1)
    else:
        slope, intercept = 0.0, float(fs[0])
    residual = float(np.abs(fs - (slope * logs + intercept)).max())
    return LocalModelReport(float(slope), float(intercept), residual,
                            [(t, float(f)) for t, f in values])


@dataclass
class QuadraticFieldReport:
    """Two-embedding regulator of the quadratic-field elliptic families."""

    kind: str
    disc: int
    epsilons: tuple[str, str]
    matrix: list[list[float]]
    abs_det: float
    normalized: float
    reference: float
    identities: dict

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "disc": self.disc,
            "epsilons": list(self.epsilons),
            "matrix": self.matrix,
            "abs_det": self.abs_det,
            "normalized": self.normalized,
            "reference": self.reference,
            "identities": self.identities,
        }


def _quadratic_regulator_matrix(a_exact: ExactScalar, eps: tuple, *,
                                radius, density: int,
                                quad_tol: float) -> list[list[float]]:
    config = LineConfiguration([(1, 0, (0, 1)), (0, 1, (0, 1))],
                               t=(a_exact * a_exact).inverse())
    registry = registry_for(config)
    elements = []
    for eps_l in eps:
        fid = registry.register(_ONE, ExactScalar.from_any(0),
                                eps_l / a_exact)
        first = RationalMonomial(_ONE, {"2,1": 1, "2,2": -1})
        second = RationalMonomial(_ONE, {fid: 1, "1,1": -1})
        elements.append(2 * K2Symbol.pair(first, second))
    point = config.special_set_S()[0]
    matrix = []
    for branch in ("plus", "minus"):
        emb = EmbeddedConfig(config, branch=branch)
        loop = build_gamma_loop(emb, point, radius=radius, density=density)
        matrix.append([pairing_detailed(loop, e, quad_tol=quad_tol)[0]
                       for e in elements])
    return matrix


def quadratic_field_regulator(a: int, *, radius=None, density: int = 64,
                              quad_tol: float = QUAD_TOL
                              ) -> QuadraticFieldReport:
    """Regulator of the integer-trace family over Q(sqrt(a^2 - 16)).

    The units eps_1,2 = (a +- sqrt(a^2-16))/2 satisfy eps_1*eps_2 = 4 and
    eps_1 + eps_2 = a exactly; the normalized determinant R / log^2|a|
    approaches 16.
    """
    if not isinstance(a, int):
        raise ValueError("a must be an integer")
    if abs(a) <= 5:
        raise ValueError("need |a| > 5")
    disc = a * a - 16
    sq = exact_sqrt(disc)
    a_exact = ExactScalar.from_any(a)
    half = ExactScalar.from_any(Fraction(1, 2))
    eps1 = (a_exact + sq) * half
    eps2 = (a_exact - sq) * half
    identities = {
        "eps_product_is_4": eps1 * eps2 == ExactScalar.from_any(4),
        "eps_sum_is_a": eps1 + eps2 == a_exact,
    }
    if not all(identities.values()):
        raise AssertionError(f"unit identities failed for a = {a}")
    matrix = _quadratic_regulator_matrix(a_exact, (eps1, eps2),
                                         radius=radius, density=density,
                                         quad_tol=quad_tol)
    abs_det = float(abs(np.linalg.det(np.array(matrix))))
    normalized = abs_det / math.log(abs(a)) ** 2
    return QuadraticFieldReport(
        kind="integer-trace", disc=disc,
        epsilons=(eps1.to_str(), eps2.to_str()),
        matrix=matrix, abs_det=abs_det, normalized=normalized,
        reference=16.0, identities=identities)


def quadratic_unit_regulator(v, p, q, n: int, *, radius=None,
                             density: int = 64,
                             quad_tol: float = QUAD_TOL
                             ) -> QuadraticFieldReport:
    """Regulator of the unit-power family eps_1 = p*v^n, eps_2 = q*v^-n.

    Requires a unit v != +-1, p*q = 4 and p*v^n != +-2; the normalized
    determinant R / n^2 approaches 16 * log^2|v|.
    """
    v = ExactScalar.from_any(v)
    p = ExactScalar.from_any(p)
    q = ExactScalar.from_any(q)
    if not isinstance(n, int) or n < 1:
        raise ValueError("n must be a positive integer")
    one = ExactScalar.from_any(1)
    if v == one or v == -one:
        raise ValueError("v must differ from +-1")
    if not (v.is_algebraic_integer() and abs(v.norm()) == 1):
        raise ValueError("v must be a unit of the ring of integers")
    if p * q != ExactScalar.from_any(4):
        raise ValueError("need p*q = 4")
    eps1 = p * v ** n
    eps2 = q * v ** (-n)
    two = ExactScalar.from_any(2)
    if eps1 == two or eps1 == -two:
        raise ValueError("need p*v^n != +-2")
    a_exact = eps1 + eps2
    identities = {
        "eps_product_is_4": eps1 * eps2 == ExactScalar.from_any(4),
        "trace_matches": eps1 + eps2 == a_exact,
    }
    matrix = _quadratic_regulator_matrix(a_exact, (eps1, eps2),
                                         radius=radius, density=density,
                                         quad_tol=quad_tol)
    abs_det = float(abs(np.linalg.det(np.array(matrix))))
    normalized = abs_det / n ** 2
    log_v = abs(math.log(abs(float(v.embed("plus")))))
    return QuadraticFieldReport(
        kind="unit-power", disc=v.disc if v.disc is not None else 0,
        epsilons=(eps1.to_str(), eps2.to_str()),
        matrix=matrix, abs_det=abs_det, normalized=normalized,
        reference=16.0 * log_v ** 2, identities=identities)


def relation_shadow(emb: EmbeddedConfig, loops: Sequence[LiftedLoop],
                    sides, *, quad_tol: float = QUAD_TOL) -> float:
    """Max |pairing(loop, lhs - rhs)| over the loops and relation sides."""
    worst = 0.0
    for lhs, rhs in sides:
        diff = lhs - rhs
        for loop in loops:
            val, _ = pairing_detailed(loop, diff, quad_tol=quad_tol)
            worst = max(worst, abs(val))
    return worst
