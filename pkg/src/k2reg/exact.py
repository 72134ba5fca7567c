"""Exact arithmetic over Q and a single real quadratic extension Q(sqrt(D))."""

from __future__ import annotations

import os
import re
from fractions import Fraction
from functools import total_ordering

import mpmath

__all__ = [
    "ExactScalar",
    "FieldMismatch",
    "embed_real",
    "exact_sqrt",
    "parse_scalar",
    "squarefree_decompose",
    "working_precision",
]


class FieldMismatch(ValueError):
    """Two scalars live in different quadratic extensions."""


def working_precision() -> int:
    """Significand bits of the numeric layer; K2REG_PRECISION overrides."""
    try:
        bits = int(os.environ.get("K2REG_PRECISION", "53"))
    except ValueError:
        bits = 53
    return max(bits, 53)


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Write n = m^2 * D with D squarefree; return (m, D). Requires n > 0."""
    if n <= 0:
        raise ValueError("squarefree_decompose needs a positive integer")
    m, d = 1, 1
    p = 2
    while p * p <= n:
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            m *= p ** (e // 2)
            if e % 2:
                d *= p
        p += 1 if p == 2 else 2
    return m, d * n


# Discriminants already checked squarefree; revalidating per construction
# would cost a trial division each time.
_checked_discs: set[int] = set()


def _check_disc(disc: int) -> int:
    disc = int(disc)
    if disc not in _checked_discs:
        if disc <= 1 or squarefree_decompose(disc)[0] != 1:
            raise ValueError(f"discriminant must be squarefree and > 1: {disc}")
        _checked_discs.add(disc)
    return disc


@total_ordering
class ExactScalar:
    """rational_part + surd_part*sqrt(disc), with disc squarefree > 1 or None.

    Values are immutable; all arithmetic is exact. Results with vanishing
    surd part demote to the rational representation (disc None).
    """

    __slots__ = ("rational_part", "surd_part", "disc")

    def __init__(self, rational_part=0, surd_part=0, disc=None):
        su = Fraction(surd_part)
        if su == 0:
            disc = None
        elif disc is None:
            raise ValueError("surd part requires a discriminant")
        else:
            disc = _check_disc(disc)
        self.rational_part = Fraction(rational_part)
        self.surd_part = su
        self.disc = disc

    @staticmethod
    def from_any(x) -> "ExactScalar":
        if isinstance(x, ExactScalar):
            return x
        if isinstance(x, str):
            return parse_scalar(x)
        return ExactScalar(Fraction(x))

    # -- field structure ---------------------------------------------------

    def _match_disc(self, other: "ExactScalar") -> int | None:
        if self.disc is None:
            return other.disc
        if other.disc is None or other.disc == self.disc:
            return self.disc
        raise FieldMismatch(f"sqrt({self.disc}) vs sqrt({other.disc})")

    def __add__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        disc = self._match_disc(other)
        return ExactScalar(self.rational_part + other.rational_part,
                           self.surd_part + other.surd_part, disc)

    __radd__ = __add__

    def __neg__(self):
        return ExactScalar(-self.rational_part, -self.surd_part, self.disc)

    def __sub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        disc = self._match_disc(other)
        a1, b1 = self.rational_part, self.surd_part
        a2, b2 = other.rational_part, other.surd_part
        ra = a1 * a2 + (b1 * b2 * disc if disc is not None else 0)
        return ExactScalar(ra, a1 * b2 + a2 * b1, disc)

    __rmul__ = __mul__

    def inverse(self) -> "ExactScalar":
        if not self:
            raise ZeroDivisionError("inverse of zero")
        if self.disc is None:
            return ExactScalar(1 / self.rational_part)
        n = self.norm()
        return ExactScalar(self.rational_part / n, -self.surd_part / n, self.disc)

    def __truediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self * other.inverse()

    def __rtruediv__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return other * self.inverse()

    def __pow__(self, n: int):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self.inverse() ** (-n)
        out = ExactScalar(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def conjugate(self) -> "ExactScalar":
        return ExactScalar(self.rational_part, -self.surd_part, self.disc)

    def norm(self) -> Fraction:
        """Product with the conjugate, as a rational."""
        if self.disc is None:
            return self.rational_part * self.rational_part
        return self.rational_part**2 - self.disc * self.surd_part**2

    def trace(self) -> Fraction:
        return 2 * self.rational_part

    def is_algebraic_integer(self) -> bool:
        if self.disc is None:
            return self.rational_part.denominator == 1
        return self.trace().denominator == 1 and self.norm().denominator == 1

    # -- order and identity --------------------------------------------------

    def __bool__(self) -> bool:
        return bool(self.rational_part) or bool(self.surd_part)

    def sign(self, branch: str = "plus") -> int:
        """Exact sign of the chosen real embedding."""
        if branch == "minus":
            return self.conjugate().sign()
        a, b = self.rational_part, self.surd_part
        if b == 0:
            return (a > 0) - (a < 0)
        if a == 0:
            return 1 if b > 0 else -1
        if a > 0 and b > 0:
            return 1
        if a < 0 and b < 0:
            return -1
        # Mixed signs: |a| vs |b|sqrt(D) decided by squaring.
        big_rational = a * a > b * b * self.disc
        if a > 0:
            return 1 if big_rational else -1
        return -1 if big_rational else 1

    def __eq__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self.rational_part == other.rational_part
                and self.surd_part == other.surd_part
                and self.disc == other.disc)

    def __lt__(self, other):
        other = _coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (self - other).sign() < 0

    def __hash__(self):
        if self.disc is None:
            return hash(self.rational_part)
        return hash((self.rational_part, self.surd_part, self.disc))

    # -- embeddings ----------------------------------------------------------

    def embed(self, branch: str = "plus", extra_bits: int = 64) -> mpmath.mpf:
        """Real embedding at working_precision() + extra_bits."""
        with mpmath.workprec(working_precision() + extra_bits):
            val = mpmath.mpf(self.rational_part.numerator) / self.rational_part.denominator
            if self.disc is not None:
                surd = mpmath.mpf(self.surd_part.numerator) / self.surd_part.denominator
                root = mpmath.sqrt(self.disc)
                val = val + surd * root if branch == "plus" else val - surd * root
            return val

    def __float__(self) -> float:
        return float(self.embed())

    # -- text ----------------------------------------------------------------

    def to_str(self) -> str:
        if self.disc is None:
            return str(self.rational_part)
        sign = "+" if self.surd_part > 0 else "-"
        return f"{self.rational_part}{sign}{abs(self.surd_part)}*sqrt({self.disc})"

    def __repr__(self) -> str:
        return f"ExactScalar({self.to_str()!r})"


def _coerce(x):
    if isinstance(x, ExactScalar):
        return x
    if isinstance(x, (int, Fraction)):
        return ExactScalar(x)
    return NotImplemented


_SURD_RE = re.compile(
    r"^(?:(?P<ra>[+-]?\d+(?:/\d+)?)(?=[+-]))?"
    r"(?P<su>[+-]?\d+(?:/\d+)?)\*sqrt\((?P<disc>\d+)\)$"
)


def parse_scalar(s: str) -> ExactScalar:
    """Inverse of ExactScalar.to_str; accepts "p/q" and "p/q+r/s*sqrt(D)"."""
    text = s.strip().replace(" ", "")
    if "sqrt" not in text:
        try:
            return ExactScalar(Fraction(text))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"bad scalar string: {s!r}") from exc
    m = _SURD_RE.match(text)
    if m is None:
        raise ValueError(f"bad scalar string: {s!r}")
    ra = Fraction(m.group("ra")) if m.group("ra") else Fraction(0)
    return ExactScalar(ra, Fraction(m.group("su")), int(m.group("disc")))


def embed_real(x: ExactScalar, branch: str = "plus") -> mpmath.mpf:
    return x.embed(branch)


def exact_sqrt(q) -> ExactScalar:
    """Exact square root of a nonnegative rational, as rational or r*sqrt(D)."""
    q = Fraction(q)
    if q < 0:
        raise ValueError("exact_sqrt needs a nonnegative rational")
    if q == 0:
        return ExactScalar(0)
    m, d = squarefree_decompose(q.numerator * q.denominator)
    if d == 1:
        return ExactScalar(Fraction(m, q.denominator))
    return ExactScalar(0, Fraction(m, q.denominator), d)
