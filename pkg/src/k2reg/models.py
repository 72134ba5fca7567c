"""Degree-2 models of the hyperelliptic configuration shapes.

Two configuration shapes have hyperelliptic curves: two groups with the
second of size two, and three groups with two singleton groups.  Both
rewrite, by an exact change of coordinates, into a curve that is a
degree-2 cover of the x-line, carrying one symbol per nontrivial offset.
This module performs the rewriting with exact coefficients, builds the
element suite that lives on the second shape's cover (the offset symbols,
one symbol per branch scale, and two coordinate symbols), and verifies
the suite: tame values place by place, and numeric vanishing of the
suite's two linear relations against loops tracked on the degree-2 fiber.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from ._kernels import track_roots
from .config import LineConfiguration, SchemaError
from .exact import ExactScalar, exact_sqrt
from .numpoly import poly_roots
from .surface import (
    EVAL_TOL,
    QUAD_TOL,
    LiftedLoop,
    LoopBuildError,
    integrate_eta,
    loop_from_parametrization,
)
from .symbols import K2Symbol, r_element, t_element

__all__ = [
    "ElementSuite",
    "HyperModel",
    "HyperPlace",
    "ModelElement",
    "ModelFunction",
    "SuiteReport",
    "TameEntry",
    "TransformResult",
    "default_loops",
    "element_suite",
    "pair_loop",
    "tame_table",
    "three_group_model",
    "two_group_model",
    "verify_suite",
]

_ZERO = ExactScalar(0)
_ONE = ExactScalar(1)

MU_TOL = 1e-10
PLACE_TOL = 1e-8


def _as_complex(v) -> complex:
    if isinstance(v, ExactScalar):
        return complex(float(v.embed()))
    return complex(v)


def _affine_product(slopes) -> list[ExactScalar]:
    """Ascending exact coefficients of prod(c*x + 1)."""
    coeffs = [_ONE]
    for c in slopes:
        nxt = [_ZERO] * (len(coeffs) + 1)
        for i, cur in enumerate(coeffs):
            nxt[i] = nxt[i] + cur
            nxt[i + 1] = nxt[i + 1] + c * cur
        coeffs = nxt
    return coeffs


# -- transported functions and elements ---------------------------------------


@dataclass(frozen=True)
class ModelFunction:
    """One factor of a model symbol, in a shape the loop evaluator knows.

    kind is one of power_over_y (-x^power / y), affine (coeff*x + 1),
    neg_y, neg_x, power_over_lam (-x^power / coeff).
    """

    kind: str
    power: int = 0
    coeff: object = None

    def as_callable(self) -> Callable:
        p = self.power
        if self.kind == "power_over_y":
            return lambda xs, ys: -(xs ** p) / ys
        if self.kind == "affine":
            c = _as_complex(self.coeff)
            return lambda xs, ys: c * xs + 1.0
        if self.kind == "neg_y":
            return lambda xs, ys: -ys
        if self.kind == "neg_x":
            return lambda xs, ys: -xs
        if self.kind == "power_over_lam":
            c = _as_complex(self.coeff)
            return lambda xs, ys: -(xs ** p) / c
        raise ValueError(f"unknown function kind {self.kind!r}")

    def describe(self) -> str:
        if self.kind == "power_over_y":
            return f"-x^{self.power}/y"
        if self.kind == "affine":
            if isinstance(self.coeff, ExactScalar):
                return f"({self.coeff.to_str()})*x+1"
            c = complex(self.coeff)
            return f"({c.real:.12g}{c.imag:+.12g}j)*x+1"
        if self.kind == "neg_y":
            return "-y"
        if self.kind == "neg_x":
            return "-x"
        if self.kind == "power_over_lam":
            return f"-x^{self.power}/({self.coeff.to_str()})"
        return self.kind


@dataclass(frozen=True)
class ModelElement:
    """Ordered symbol {first, second} on the degree-2 model."""

    label: str
    first: ModelFunction
    second: ModelFunction

    def callables(self) -> tuple[Callable, Callable]:
        return self.first.as_callable(), self.second.as_callable()

    def describe(self) -> str:
        return f"{{{self.first.describe()}, {self.second.describe()}}}"


# -- exact rewriting of the two configuration shapes --------------------------


@dataclass(frozen=True)
class TransformResult:
    """Rewritten curve y*(y + A(x)) + x^(2*power) = 0 with its symbols.

    kind records which configuration shape was consumed.  model_coeffs
    maps (x-degree, y-degree) to the exact coefficient.  elements are the
    transported symbols {-x^power/y, alpha_i*x + 1}; source_symbols are
    the matching symbols on the configuration, when the configured lines
    can express them (the three-group match needs the line x).
    """

    kind: str
    g: int
    lam: ExactScalar
    alphas: tuple[ExactScalar, ...]
    power: int
    degree: int
    a_coeffs: tuple[ExactScalar, ...]
    model_coeffs: dict
    elements: tuple[ModelElement, ...]
    source_symbols: Optional[tuple[K2Symbol, ...]]

    def hyper_model(self) -> "HyperModel":
        if self.kind != "three-group":
            raise ValueError(
                "the element suite lives on the three-group shape; the "
                "two-group cover has half-integral branch powers")
        return HyperModel(self.g, self.lam, self.alphas)


def _model_coeffs(a_coeffs, degree) -> dict:
    coeffs = {(0, 2): _ONE, (degree, 0): _ONE}
    for i, c in enumerate(a_coeffs):
        if c:
            coeffs[(i, 1)] = c
    return coeffs


def _scaled_a(lam, alphas, power) -> tuple[ExactScalar, ...]:
    base = [lam * c for c in _affine_product(alphas)]
    base += [_ZERO] * (power + 1 - len(base))
    base[power] = base[power] + ExactScalar(2)
    return tuple(base)


def two_group_model(config: LineConfiguration) -> TransformResult:
    """Rewrite the (N1, 2) shape as a degree-2 cover of the x-line.

    Expects the normalized frame: first group x + c with leading offset
    zero, second group y and y + 1, exact parameter.  The offset symbol
    {(y+1)/y, (x+c)/x} turns into {-x^(g+1)/y, c*x + 1}.
    """
    if config.N != 2 or config.sizes[1] != 2 or config.sizes[0] < 2:
        raise SchemaError("expected two groups with sizes (N1 >= 2, 2)")
    gx, gy = config.groups
    if not (gx.a == 1 and not gx.b and gy.b == 1 and not gy.a):
        raise SchemaError("expected group directions x and y")
    if gy.offsets != (_ZERO, _ONE):
        raise SchemaError("expected second-group offsets (0, 1)")
    if gx.offsets[0] != _ZERO:
        raise SchemaError("expected a leading zero offset in the first group")
    alphas = gx.offsets[1:]
    if len(set(alphas)) != len(alphas) or any(not a for a in alphas):
        raise SchemaError("first-group offsets must be nonzero and distinct")
    lam = config.lambda_exact()
    g = config.sizes[0] - 1
    power = g + 1
    a_coeffs = _scaled_a(lam, alphas, power)
    elements = tuple(
        ModelElement(f"M[{i}]", ModelFunction("power_over_y", power),
                     ModelFunction("affine", coeff=a))
        for i, a in enumerate(alphas, start=1))
    sources = tuple(r_element(config, 2, 2, 1, 1, j, 1)
                    for j in range(2, config.sizes[0] + 1))
    return TransformResult(
        kind="two-group", g=g, lam=lam, alphas=tuple(alphas), power=power,
        degree=2 * power, a_coeffs=a_coeffs,
        model_coeffs=_model_coeffs(a_coeffs, 2 * power),
        elements=elements, source_symbols=sources)


def three_group_model(config: LineConfiguration) -> TransformResult:
    """Rewrite the (N1, 1, 1) shape as a degree-2 cover of the x-line.

    Expects the normalized frame: lines x + c, y, y - x, exact parameter.
    The offset symbol {y/(y-x), (x+c)/x} turns into {-x^(g+2)/y, c*x + 1};
    as a configured-line combination it is a difference of two triangle
    symbols, available when some offset is zero.
    """
    if config.N != 3 or config.sizes[1] != 1 or config.sizes[2] != 1:
        raise SchemaError("expected three groups with sizes (N1, 1, 1)")
    gx, gy, gd = config.groups
    if not (gx.a == 1 and not gx.b and gy.b == 1 and not gy.a):
        raise SchemaError("expected leading group directions x and y")
    if not (gd.a == ExactScalar(-1) and gd.b == 1):
        raise SchemaError("expected third group direction y - x")
    if gy.offsets != (_ZERO,) or gd.offsets != (_ZERO,):
        raise SchemaError("expected singleton groups y and y - x")
    alphas = gx.offsets
    if len(set(alphas)) != len(alphas):
        raise SchemaError("first-group offsets must be distinct")
    lam = config.lambda_exact()
    g = config.sizes[0]
    power = g + 2
    a_coeffs = _scaled_a(lam, alphas, power)
    elements = tuple(
        ModelElement(f"M[{i}]", ModelFunction("power_over_y", power),
                     ModelFunction("affine", coeff=a))
        for i, a in enumerate(alphas, start=1))
    zero_at = next((j for j, a in enumerate(alphas, start=1) if not a), None)
    sources = None
    if zero_at is not None:
        base = t_element(config, 3, 1, 2, 1, 1, zero_at)
        sources = tuple(
            t_element(config, 3, 1, 2, 1, 1, j) - base
            for j in range(1, g + 1))
    return TransformResult(
        kind="three-group", g=g, lam=lam, alphas=tuple(alphas), power=power,
        degree=2 * power, a_coeffs=a_coeffs,
        model_coeffs=_model_coeffs(a_coeffs, 2 * power),
        elements=elements, source_symbols=sources)


# -- the degree-2 model and its places -----------------------------------------


@dataclass(frozen=True)
class HyperPlace:
    """A point of the model entering the divisor table.

    Affine-chart places use the model coordinates; infinity places use
    the chart x = 1/X, y = (X*Y - 1)/X^power, where the curve reads
    Y^2 + lam*(X*Y - 1)*prod(X + alpha_i) = 0.  exact marks whether the
    coordinates are exact scalars; residual is the on-curve defect of
    numeric coordinates.
    """

    tag: str
    chart: str
    x: object
    y: object
    exact: bool
    residual: float


class HyperModel:
    """The curve y*(y + A(x)) + x^(2g+4) = 0 with A = 2x^(g+2) + lam*prod(alpha_i*x + 1).

    The branch scales mu_j satisfy lam*prod(mu_j*x + 1) = 2x^(g+2) + A(x);
    they are kept numeric, refined by Newton steps, and validated for
    pairwise separation together with the finite branch points.
    """

    def __init__(self, g, lam, alphas):
        g = int(g)
        if g < 1:
            raise ValueError("the model needs genus g >= 1")
        lam = ExactScalar.from_any(lam)
        if not lam:
            raise ValueError("lambda must be nonzero")
        alphas = tuple(ExactScalar.from_any(a) for a in alphas)
        if len(alphas) != g:
            raise ValueError(f"expected {g} offset scales, got {len(alphas)}")
        if len(set(alphas)) != len(alphas):
            raise ValueError("offset scales must be pairwise distinct")
        self.g = g
        self.lam = lam
        self.alphas = alphas
        self.power = g + 2
        self.degree = 2 * g + 4
        self.a_coeffs = _scaled_a(lam, alphas, self.power)
        branch = list(self.a_coeffs)
        branch[self.power] = branch[self.power] + ExactScalar(2)
        self.branch_coeffs = tuple(branch)
        self._a_num = np.array([_as_complex(c) for c in self.a_coeffs])
        self._a_desc = self._a_num[::-1].copy()
        self._b_num = np.array([_as_complex(c) for c in self.branch_coeffs])
        self.mus = self._solve_mus()
        self.mu_residual = self._recompose_residual()
        self._check_branch_separation()

    # -- numeric branch data ---------------------------------------------------

    def _solve_mus(self) -> np.ndarray:
        roots = poly_roots(self._b_num)
        if roots.size != self.power:
            raise ValueError("branch polynomial lost degree; lambda too small "
                             "for the working precision")
        deriv = np.polyder(self._b_num[::-1])
        for _ in range(3):
            roots = roots - (np.polyval(self._b_num[::-1], roots)
                             / np.polyval(deriv, roots))
        mus = -1.0 / roots
        order = np.lexsort((mus.imag, mus.real))
        return mus[order]

    def _recompose_residual(self) -> float:
        coeffs = np.array([_as_complex(self.lam)])
        for mu in self.mus:
            coeffs = np.convolve(coeffs, np.array([1.0, mu]))
        scale = np.abs(self._b_num).max()
        return float(np.abs(coeffs - self._b_num).max() / scale)

    def _check_branch_separation(self) -> None:
        bx = self.branch_x()
        scale = 1.0 + np.abs(bx).max()
        diffs = np.abs(bx[:, None] - bx[None, :])
        np.fill_diagonal(diffs, np.inf)
        if diffs.min() < 1e-8 * scale:
            raise ValueError(
                "branch points collide; the model does not have genus g")

    def branch_x(self) -> np.ndarray:
        """Finite branch points of the x-projection, lexicographic order."""
        finite = [-1.0 / _as_complex(a) for a in self.alphas if a]
        finite.extend(-1.0 / self.mus)
        arr = np.array(finite)
        return arr[np.lexsort((arr.imag, arr.real))]

    @property
    def infinity_merged(self) -> bool:
        return any(not a for a in self.alphas)

    def infinity_square(self) -> ExactScalar:
        acc = self.lam
        for a in self.alphas:
            acc = acc * a
        return acc

    def torsion_order(self) -> Optional[int]:
        if self.lam == _ONE:
            return 1
        if self.lam == ExactScalar(-1):
            return 2
        return None

    def integrality_flags(self) -> dict:
        lam_unit = (self.lam.is_algebraic_integer()
                    and abs(self.lam.norm()) == 1)
        integral = (self.lam.is_algebraic_integer()
                    and all(a.is_algebraic_integer() for a in self.alphas))
        return {
            "lambda_is_unit": lam_unit,
            "coefficients_are_integers": integral,
            "integral_subgroup_hypotheses": lam_unit and integral,
        }

    # -- places and divisors -----------------------------------------------------

    def infinity_places(self) -> tuple[HyperPlace, ...]:
        square = self.infinity_square()
        if not square:
            return (HyperPlace("inf", "infinity", _ZERO, _ZERO, True, 0.0),)
        if square.disc is None and square.rational_part > 0:
            root = exact_sqrt(square.rational_part)
            return (HyperPlace("inf", "infinity", _ZERO, root, True, 0.0),
                    HyperPlace("inf'", "infinity", _ZERO, -root, True, 0.0))
        sq = _as_complex(square)
        root = complex(np.sqrt(complex(sq)))
        resid = abs(root * root - sq) / (1.0 + abs(sq))
        return (HyperPlace("inf", "infinity", 0j, root, False, resid),
                HyperPlace("inf'", "infinity", 0j, -root, False, resid))

    def places(self) -> tuple[HyperPlace, ...]:
        out = [HyperPlace("O", "affine", _ZERO, _ZERO, True, 0.0),
               HyperPlace("O'", "affine", _ZERO, -self.lam, True, 0.0)]
        for j, mu in enumerate(self.mus, start=1):
            x0 = -1.0 / mu
            y0 = x0 ** self.power
            # Branch-point identity: the double fiber root -A/2 must equal
            # x^power, which is exactly the mu-root condition.
            resid = abs(-np.polyval(self._a_desc, x0) / 2.0 - y0)
            resid /= 1.0 + abs(y0)
            out.append(HyperPlace(f"P[{j}]", "affine", x0, y0, False,
                                  float(resid)))
        out.extend(self.infinity_places())
        return tuple(out)

    def _at_infinity(self, mult: int) -> dict:
        if self.infinity_merged:
            return {"inf": 2 * mult}
        return {"inf": mult, "inf'": mult}

    def divisor_table(self) -> dict:
        p = self.power
        table = {
            "x": {"O": 1, "O'": 1, **self._at_infinity(-1)},
            "y": {"O": 2 * p, **self._at_infinity(-p)},
            f"-x^{p}/y": {"O'": p, "O": -p},
        }
        for j in range(1, p + 1):
            table[f"mu[{j}]*x+1"] = {f"P[{j}]": 2, **self._at_infinity(-1)}
        return table

    # -- numeric fiber ------------------------------------------------------------

    def fiber_grid(self) -> np.ndarray:
        grid = np.zeros((self.degree + 1, 3), dtype=complex)
        grid[self.degree, 0] = 1.0
        grid[: self._a_num.size, 1] = self._a_num
        grid[0, 2] = 1.0
        return grid

    def y_roots(self, x0: complex) -> np.ndarray:
        a_val = complex(np.polyval(self._a_desc, complex(x0)))
        return poly_roots([complex(x0) ** self.degree, a_val, 1.0])

    def curve_residual(self, xs, ys) -> float:
        xs = np.asarray(xs, dtype=complex)
        ys = np.asarray(ys, dtype=complex)
        vals = ys * (ys + np.polyval(self._a_desc, xs)) + xs ** self.degree
        scale = 1.0 + np.abs(ys) ** 2 + np.abs(xs) ** self.degree
        return float((np.abs(vals) / scale).max())


# -- loops on the x-projection --------------------------------------------------


def pair_loop(model: HyperModel, p: int, q: int, *, radius: float = None,
              density: int = 512) -> LiftedLoop:
    """Closed loop tracking one fiber sheet around two branch points.

    The circle must isolate exactly the branch points p and q (indices
    into model.branch_x()); enclosing any other, or passing near the
    y-axis pole of the symbol entries, fails the certificate.  An odd
    number of enclosed branch points swaps the sheets and is rejected
    through the closure check.
    """
    bx = model.branch_x()
    if not (0 <= p < bx.size and 0 <= q < bx.size and p != q):
        raise ValueError("need two distinct branch-point indices")
    center = (bx[p] + bx[q]) / 2.0
    sep = abs(bx[p] - bx[q])
    others = np.delete(bx, [p, q])
    r_lo = 0.575 * sep
    r_hi = np.abs(others - center).min() / 1.25 if others.size else 4.0 * r_lo
    if radius is None:
        if r_hi < r_lo:
            raise LoopBuildError(
                f"branch points crowd the pair ({p}, {q}): the isolating "
                f"radius range [{r_lo:.3e}, {r_hi:.3e}] is empty")
        radius = math.sqrt(r_lo * r_hi)
        # The symbol entries have their only x-axis pole at x = 0; keep
        # the circle off it.
        for factor in (1.0, 0.9, 1.1, 0.82, 1.2):
            cand = radius * factor
            if r_lo <= cand <= r_hi and abs(abs(center) - cand) >= 0.1 * cand:
                radius = cand
                break
        else:
            raise LoopBuildError(
                f"cannot keep the pair ({p}, {q}) circle away from x = 0")
    if abs(abs(center) - radius) < 0.05 * radius:
        raise LoopBuildError("the requested circle passes through x = 0")
    start = center + radius
    roots0 = model.y_roots(start)
    if roots0.size != 2:
        raise LoopBuildError("the fiber over the start point is degenerate")
    y_anchor = roots0[np.lexsort((roots0.imag, roots0.real))][0]
    grid = model.fiber_grid()

    def sample(n: int):
        ts = np.linspace(0.0, 1.0, n + 1)
        xs = center + radius * np.exp(2j * np.pi * ts)
        base = model.y_roots(xs[0])
        j0 = int(np.argmin(np.abs(base - y_anchor)))
        paths, ok, idx = track_roots(grid, xs, base)
        if not ok:
            raise LoopBuildError(
                f"sheet tracking failed at sample {idx} of the pair "
                f"({p}, {q}) circle; the discretization is too coarse")
        return xs, paths[:, j0]

    loop = loop_from_parametrization(sample, density,
                                     label=f"pair[{p},{q}]")
    if not loop.closed:
        raise LoopBuildError(
            f"the circle around branch points ({p}, {q}) swaps the fiber "
            "sheets; it must enclose an even number of branch points")
    loop.on_surface_residual = model.curve_residual(loop.xs, loop.ys)
    return loop


def default_loops(model: HyperModel, count: int = 2, *,
                  density: int = 512) -> list[LiftedLoop]:
    """Pair loops where every loop shares one branch point with an earlier one.

    Two pair loops sharing exactly one branch point have odd intersection
    number, hence are independent; disjoint pairs can be homologous.
    """
    bx = model.branch_x()
    if count < 1 or count > bx.size - 1:
        raise ValueError(f"count must be in [1, {bx.size - 1}]")
    all_pairs = sorted(
        ((p, q) for p in range(bx.size) for q in range(p + 1, bx.size)),
        key=lambda pq: abs(bx[pq[0]] - bx[pq[1]]))
    loops: list[LiftedLoop] = []
    used: set = set()
    anchors: set = set()
    for _ in range(count):
        candidates = [pq for pq in all_pairs if pq not in used
                      and (not anchors or pq[0] in anchors or pq[1] in anchors)]
        made = None
        errors = []
        for pq in candidates:
            try:
                made = pair_loop(model, *pq, density=density)
            except LoopBuildError as exc:
                errors.append(str(exc))
                continue
            used.add(pq)
            anchors.update(pq)
            break
        if made is None:
            raise LoopBuildError(
                "could not extend the loop chain: " + "; ".join(errors[:3]))
        loops.append(made)
    return loops


# -- the element suite ----------------------------------------------------------


@dataclass(frozen=True)
class ElementSuite:
    """Symbols on the degree-2 model together with their divisor data.

    alpha_elements come from the configuration offsets, mu_elements from
    the branch scales, coordinate_element is {-y, -x} and power_element
    is {-x^power/y, -x^power/lam}.
    """

    model: HyperModel
    alpha_elements: tuple[ModelElement, ...]
    mu_elements: tuple[ModelElement, ...]
    coordinate_element: ModelElement
    power_element: ModelElement
    divisors: dict

    def elements(self) -> tuple[ModelElement, ...]:
        return (*self.alpha_elements, *self.mu_elements,
                self.coordinate_element, self.power_element)


def element_suite(model: HyperModel) -> ElementSuite:
    p = model.power
    first = ModelFunction("power_over_y", p)
    alpha_elements = tuple(
        ModelElement(f"M[{i}]", first, ModelFunction("affine", coeff=a))
        for i, a in enumerate(model.alphas, start=1))
    mu_elements = tuple(
        ModelElement(f"Mt[{j}]", first,
                     ModelFunction("affine", coeff=complex(mu)))
        for j, mu in enumerate(model.mus, start=1))
    coordinate = ModelElement("MM", ModelFunction("neg_y"),
                              ModelFunction("neg_x"))
    power_el = ModelElement("MM'", first,
                            ModelFunction("power_over_lam", p,
                                          coeff=model.lam))
    return ElementSuite(model, alpha_elements, mu_elements, coordinate,
                        power_el, model.divisor_table())


# -- tame values ------------------------------------------------------------------


@dataclass(frozen=True)
class TameEntry:
    """One tame value of the suite at one place."""

    place: str
    element: str
    value: object
    expected: ExactScalar
    exact: bool
    ok: bool

    def value_str(self) -> str:
        if isinstance(self.value, ExactScalar):
            return self.value.to_str()
        v = complex(self.value)
        return f"{v.real:.12g}{v.imag:+.12g}j"


def _entry(place, element, value, expected) -> TameEntry:
    if isinstance(value, ExactScalar):
        return TameEntry(place, element, value, expected, True,
                         value == expected)
    ok = abs(complex(value) - _as_complex(expected)) <= PLACE_TOL
    return TameEntry(place, element, value, expected, False, ok)


def tame_table(suite: ElementSuite) -> tuple[TameEntry, ...]:
    """Tame values of the mu, coordinate and power symbols, per place.

    Every value except the two coordinate-symbol values at the y-axis
    places is 1; those two are 1/lam and lam, in either order a unit, so
    the place-by-place product over each row is 1.  Values at exact
    places are computed in exact arithmetic through the stored model
    data; values at numeric places carry the 1e-8 place tolerance.
    """
    model = suite.model
    p = model.power
    lam = model.lam
    mult = 2 if model.infinity_merged else 1
    inf_places = model.infinity_places()
    a0 = model.a_coeffs[0]
    entries = []

    def chart_unit(place: HyperPlace):
        # 1 - X*Y in the infinity chart, the unit value of -y/x^power.
        if place.exact:
            return _ONE - place.x * place.y
        return 1.0 - complex(place.x) * complex(place.y)

    for j, el in enumerate(suite.mu_elements, start=1):
        x0 = -1.0 / model.mus[j - 1]
        y0 = complex(-np.polyval(model._a_desc, x0) / 2.0)
        entries.append(_entry(f"P[{j}]", el.label,
                              (-(x0 ** p) / y0) ** 2, _ONE))
        # The affine factor at x = 0 is exactly 1 whatever the slope.
        entries.append(_entry("O", el.label, _ONE ** p, _ONE))
        entries.append(_entry("O'", el.label, _ONE ** (-p), _ONE))
        for place in inf_places:
            base = chart_unit(place)
            entries.append(_entry(place.tag, el.label, base ** mult, _ONE))

    coord = suite.coordinate_element.label
    entries.append(_entry("O", coord, (_ZERO + a0).inverse(), lam.inverse()))
    entries.append(_entry("O'", coord, -(-lam), lam))
    for place in inf_places:
        base = chart_unit(place)
        if isinstance(base, ExactScalar):
            value = base.inverse() ** mult
        else:
            value = (1.0 / base) ** mult
        entries.append(_entry(place.tag, coord, value, _ONE))

    power_el = suite.power_element.label
    sign = ExactScalar(-1) ** (p * p)
    entries.append(_entry("O", power_el,
                          sign * (-(_ZERO + a0) * lam.inverse()) ** p, _ONE))
    entries.append(_entry("O'", power_el,
                          sign * (lam * (-lam).inverse()) ** p, _ONE))
    for place in inf_places:
        base = chart_unit(place)
        entries.append(_entry(place.tag, power_el, base ** (p * mult), _ONE))
    return tuple(entries)


# -- relation verification ----------------------------------------------------------


@dataclass(frozen=True)
class RelationCheck:
    """Pairing residuals of one suite relation over the verification loops."""

    label: str
    coefficients: tuple
    residuals: tuple
    threshold: float

    @property
    def ok(self) -> bool:
        return bool(self.residuals) and max(self.residuals) < self.threshold


def _relation_terms(suite: ElementSuite) -> dict:
    g = suite.model.g
    double_sum = [(el, 2) for el in suite.alpha_elements]
    double_sum += [(el, 2) for el in suite.mu_elements]
    double_sum.append((suite.power_element, -4))
    matched = [(el, 1) for el in suite.alpha_elements]
    matched += [(el, -1) for el in suite.mu_elements]
    out = {"doubled_sum": double_sum, "matched_sum": matched}
    a = suite.model.torsion_order()
    if a is not None:
        out["torsion_pair"] = [(suite.power_element, 2 * a),
                               (suite.coordinate_element, 2 * (g + 2) * a)]
    return out


def _terms_residual(loop: LiftedLoop, terms, quad_tol, eval_tol) -> float:
    total = 0.0
    for element, coeff in terms:
        f, h = element.callables()
        total += coeff * integrate_eta(loop, f, h, quad_tol=quad_tol,
                                       eval_tol=eval_tol)
    return abs(total) / (2.0 * math.pi)


@dataclass
class SuiteReport:
    """Verification record: tame table, branch residual, relation checks."""

    model: HyperModel
    tame: tuple[TameEntry, ...]
    mu_residual: float
    relations: dict
    loops: list[LiftedLoop]
    torsion_order: Optional[int]
    integrality: dict

    @property
    def tame_ok(self) -> bool:
        return all(e.ok for e in self.tame)

    @property
    def mu_ok(self) -> bool:
        return self.mu_residual < MU_TOL

    @property
    def all_ok(self) -> bool:
        return (self.tame_ok and self.mu_ok
                and all(r.ok for r in self.relations.values()))

    def to_json_dict(self) -> dict:
        model = self.model
        return {
            "model": {
                "g": model.g,
                "lambda": model.lam.to_str(),
                "alphas": [a.to_str() for a in model.alphas],
                "degree": model.degree,
                "mus": [[mu.real, mu.imag] for mu in model.mus],
            },
            "places": [
                {"tag": pl.tag, "chart": pl.chart,
                 "exact": pl.exact, "residual": pl.residual}
                for pl in model.places()],
            "divisors": {label: dict(sorted(div.items()))
                         for label, div in model.divisor_table().items()},
            "tame": [
                {"place": e.place, "element": e.element,
                 "value": e.value_str(),
                 "mode": "exact" if e.exact else "numeric", "ok": e.ok}
                for e in self.tame],
            "mu_residual": self.mu_residual,
            "relations": {
                label: {"residuals": list(check.residuals),
                        "threshold": check.threshold, "ok": check.ok}
                for label, check in sorted(self.relations.items())},
            "loops": [{"label": lp.label, "density": lp.density,
                       "closure_residual": lp.closure_residual,
                       "surface_residual": lp.on_surface_residual}
                      for lp in self.loops],
            "torsion_order": self.torsion_order,
            "integrality": self.integrality,
            "tame_ok": self.tame_ok,
            "all_ok": self.all_ok,
        }

    def tame_csv_rows(self) -> list[list]:
        rows = [["place", "element", "value", "mode", "ok"]]
        for e in self.tame:
            rows.append([e.place, e.element, e.value_str(),
                         "exact" if e.exact else "numeric", e.ok])
        return rows


def verify_suite(model_or_suite, *, loops: Sequence[LiftedLoop] = None,
                 loop_count: int = 2, density: int = 512,
                 quad_tol: float = QUAD_TOL,
                 eval_tol: float = EVAL_TOL) -> SuiteReport:
    """Check the suite: tame table, branch recomposition, both relations.

    The two linear relations (twice the offset plus branch symbols equal
    four times the power symbol; offset and branch sums agree) and, when
    lambda is a root of unity, the torsion pair, are paired against the
    given loops; every residual must stay below 10 * quad_tol.
    """
    if isinstance(model_or_suite, HyperModel):
        suite = element_suite(model_or_suite)
    else:
        suite = model_or_suite
    model = suite.model
    if loops is None:
        loops = default_loops(model, loop_count, density=density)
    else:
        loops = list(loops)
    tame = tame_table(suite)
    threshold = 10.0 * quad_tol
    relations = {}
    for label, terms in _relation_terms(suite).items():
        residuals = tuple(
            _terms_residual(loop, terms, quad_tol, eval_tol)
            for loop in loops)
        coeffs = tuple((el.label, c) for el, c in terms)
        relations[label] = RelationCheck(label, coeffs, residuals, threshold)
    return SuiteReport(
        model=model, tame=tame, mu_residual=model.mu_residual,
        relations=relations, loops=loops,
        torsion_order=model.torsion_order(),
        integrality=model.integrality_flags())
