"""Divisors, local values, and tame symbols at the places at infinity.

On the curve lambda * prod(L) = 1 no configured line vanishes at an affine
point, so every divisor and every tame symbol of a line monomial is
supported on the places at infinity. There is one such place per line:
P~(i,j) sits above the direction point of group i and is cut out by the
tangent line L_{i,j}.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .config import LineConfiguration
from .exact import ExactScalar
from .symbols import K2Symbol, RationalMonomial

__all__ = [
    "Divisor",
    "InfinitePlace",
    "K2TReport",
    "TameRow",
    "divisor_of_monomial",
    "divisor_of_ratio",
    "ord_at",
    "ord_of_line",
    "places",
    "product_formula_check",
    "tame_symbol",
    "tame_table",
    "value_at",
    "verify_k2t",
]


@dataclass(frozen=True, order=True)
class InfinitePlace:
    """The place P~(i,j) at infinity, tangent to line (i,j)."""

    i: int
    j: int

    @property
    def name(self) -> str:
        return f"{self.i}:{self.j}"


def places(config: LineConfiguration) -> list[InfinitePlace]:
    return [InfinitePlace(i, j) for i, j in config.line_ids()]


def _place_of(config: LineConfiguration, place: InfinitePlace) -> InfinitePlace:
    if not (1 <= place.i <= config.N and 1 <= place.j <= config.sizes[place.i - 1]):
        raise IndexError(f"no place {place.name} in this configuration")
    return place


def _line_index(fid: str) -> tuple[int, int]:
    if fid.startswith("~"):
        raise ValueError("divisor data exists only for configured lines")
    i, j = fid.split(",")
    return int(i), int(j)


def ord_of_line(config: LineConfiguration, place: InfinitePlace,
                k: int, l: int) -> int:
    """Order of vanishing of L_{k,l} at P~(i,j)."""
    _place_of(config, place)
    if k != place.i:
        return -1
    if l != place.j:
        return 0
    return config.d - config.sizes[place.i - 1]


def ord_at(config: LineConfiguration, place: InfinitePlace,
           m: RationalMonomial) -> int:
    return sum(e * ord_of_line(config, place, *_line_index(fid))
               for fid, e in m.exponents.items())


class Divisor:
    """Finite integer combination of places at infinity."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients=None):
        self.coefficients = {p: c for p, c in dict(coefficients or {}).items() if c}

    def degree(self) -> int:
        return sum(self.coefficients.values())

    def __getitem__(self, place: InfinitePlace) -> int:
        return self.coefficients.get(place, 0)

    def __eq__(self, other):
        return isinstance(other, Divisor) and self.coefficients == other.coefficients

    def __add__(self, other: "Divisor") -> "Divisor":
        out = dict(self.coefficients)
        for p, c in other.coefficients.items():
            out[p] = out.get(p, 0) + c
        return Divisor(out)

    def __neg__(self) -> "Divisor":
        return Divisor({p: -c for p, c in self.coefficients.items()})

    def items(self):
        return sorted(self.coefficients.items())

    def __repr__(self):
        if not self.coefficients:
            return "0"
        return " + ".join(f"{c}(P~{p.name})" for p, c in self.items())


def divisor_of_monomial(config: LineConfiguration,
                        m: RationalMonomial) -> Divisor:
    return Divisor({p: ord_at(config, p, m) for p in places(config)})


def divisor_of_ratio(config: LineConfiguration, first: tuple[int, int],
                     second: tuple[int, int]) -> Divisor:
    """div(L_{first} / L_{second})."""
    i1, j1 = first
    i2, j2 = second
    config.line(i1, j1)
    config.line(i2, j2)
    exps = {f"{i1},{j1}": 1}
    exps[f"{i2},{j2}"] = exps.get(f"{i2},{j2}", 0) - 1
    m = RationalMonomial(1, exps)
    return divisor_of_monomial(config, m)


# -- exact local values ----------------------------------------------------------


def value_at(config: LineConfiguration, place: InfinitePlace,
             m: RationalMonomial) -> ExactScalar:
    """Value at P~(i,j) of a monomial that is a unit there.

    The tangent-line exponent is removed by multiplying with a power of
    the constant function lambda * prod(L) = 1, after which each factor
    contributes its leading datum: det[i,k] for a line of another group,
    c_{i,l} - c_{i,j} for a sibling line.
    """
    _place_of(config, place)
    if ord_at(config, place, m) != 0:
        raise ValueError(f"monomial is not a unit at P~{place.name}")
    i, j = place.i, place.j
    e_tangent = m.exponents.get(f"{i},{j}", 0)
    out = m.constant * config.lambda_exact() ** (-e_tangent)
    c_ij = config.line(i, j)[2]
    for k in range(1, config.N + 1):
        for l in range(1, config.sizes[k - 1] + 1):
            if (k, l) == (i, j):
                continue
            e = m.exponents.get(f"{k},{l}", 0) - e_tangent
            if e == 0:
                continue
            if k == i:
                out = out * (config.line(i, l)[2] - c_ij) ** e
            else:
                out = out * config.det(i, k) ** e
    return out


# -- tame symbols ------------------------------------------------------------------


def _tame_pair(config: LineConfiguration, place: InfinitePlace,
               m1: RationalMonomial, m2: RationalMonomial) -> ExactScalar:
    """Tame symbol of one pair, by Euclidean reduction of the two orders."""
    sign = ExactScalar(1)
    a = ord_at(config, place, m1)
    b = ord_at(config, place, m2)
    while a != 0 and b != 0:
        # {f, g} = {f * g^q, g} * (-1)^(ord(g) * q), and symmetrically
        if abs(a) >= abs(b):
            q = -(a // b)
            m1 = m1 * m2 ** q
            sign = sign * ExactScalar(-1) ** (b * q)
            a = a + q * b
        else:
            q = -(b // a)
            m2 = m2 * m1 ** q
            sign = sign * ExactScalar(-1) ** (a * q)
            b = b + q * a
    if a == 0:
        return sign * value_at(config, place, m1) ** b
    return sign * value_at(config, place, m2) ** (-a)


def tame_symbol(config: LineConfiguration, sym: K2Symbol,
                place: InfinitePlace) -> ExactScalar:
    out = ExactScalar(1)
    for left, right, coeff in sym.terms:
        out = out * _tame_pair(config, place, left, right) ** coeff
    return out


@dataclass(frozen=True)
class TameRow:
    place: str
    ord_left: int
    ord_right: int
    value: ExactScalar


def tame_table(config: LineConfiguration, sym: K2Symbol) -> list[TameRow]:
    """One row per place and term; value includes the term coefficient."""
    rows = []
    for place in places(config):
        for left, right, coeff in sym.terms:
            rows.append(TameRow(
                place.name,
                ord_at(config, place, left),
                ord_at(config, place, right),
                _tame_pair(config, place, left, right) ** coeff))
    return rows


@dataclass(frozen=True)
class K2TReport:
    passed: bool
    per_place: dict
    failing: tuple[str, ...]


def verify_k2t(config: LineConfiguration, sym: K2Symbol) -> K2TReport:
    """Tame symbols at every place at infinity; pass iff all are 1."""
    per_place = {p.name: tame_symbol(config, sym, p) for p in places(config)}
    failing = tuple(name for name, v in sorted(per_place.items()) if v != 1)
    return K2TReport(not failing, per_place, failing)


def product_formula_check(config: LineConfiguration, sym: K2Symbol):
    """Exact product over all places of the norm of the tame value."""
    if config.field_disc is None:
        out = ExactScalar(1)
        for place in places(config):
            out = out * tame_symbol(config, sym, place)
        return out
    out = Fraction(1)
    for place in places(config):
        out = out * tame_symbol(config, sym, place).norm()
    return out
