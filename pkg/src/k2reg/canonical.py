"""Hyperellipticity of the configuration curves by exact monomial ranks.

The holomorphic differentials on a three-group curve span the monomials
x^i y^j (x-y)^k over an index box fixed by the group sizes, and the
curve is hyperelliptic exactly when the quadratic combinations of that
span reach only the minimal dimension 2g - 1.  All dimensions here are
exact ranks of integer matrices; the closed-form counts are recomputed
alongside and any disagreement raises instead of returning.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb

__all__ = [
    "ClassificationRow",
    "MonomialSpace",
    "classification_table",
    "exact_rank",
    "genus_of_sizes",
    "holomorphic_count",
    "is_hyperelliptic",
    "monomial_span",
    "quadratic_span_dim",
]


def exact_rank(rows) -> int:
    """Rank of an integer matrix by fraction-free elimination.

    Bareiss updates keep every intermediate entry an exact minor of the
    input, so the division by the previous pivot is exact; the remainder
    is asserted to catch misuse on non-integer input.
    """
    m = [[int(v) for v in row] for row in rows]
    if not m or not m[0]:
        return 0
    nrows, ncols = len(m), len(m[0])
    rank = 0
    prev = 1
    for col in range(ncols):
        pivot = next((r for r in range(rank, nrows) if m[r][col]), None)
        if pivot is None:
            continue
        m[rank], m[pivot] = m[pivot], m[rank]
        lead = m[rank][col]
        for r in range(rank + 1, nrows):
            factor = m[r][col]
            row = m[r]
            top = m[rank]
            for c in range(col + 1, ncols):
                num = row[c] * lead - factor * top[c]
                q, rem = divmod(num, prev)
                assert rem == 0, "fraction-free update lost exactness"
                row[c] = q
            row[col] = 0
        prev = lead
        rank += 1
        if rank == nrows:
            break
    return rank


@dataclass(frozen=True)
class MonomialSpace:
    """Span of x^i y^j (x-y)^k over an inclusive index box.

    A box edge of -1 (or lower) makes the space empty; k_max None drops
    the (x-y) factor entirely.  The matrix holds the exact integer
    expansion of each generator over the monomials in columns.
    """

    i_max: int
    j_max: int
    k_max: int | None
    generators: tuple[tuple[int, int, int], ...]
    columns: tuple[tuple[int, int], ...]
    matrix: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return exact_rank(self.matrix)


def _expand(i: int, j: int, k: int) -> dict[tuple[int, int], int]:
    out = {}
    for m in range(k + 1):
        out[(i + m, j + k - m)] = comb(k, m) * (-1) ** (k - m)
    return out


def monomial_span(i_max: int, j_max: int, k_max: int | None = None
                  ) -> MonomialSpace:
    """The space spanned by x^i y^j (x-y)^k over the inclusive box."""
    ks = (0,) if k_max is None else tuple(range(k_max + 1))
    gens = []
    if i_max >= 0 and j_max >= 0 and (k_max is None or k_max >= 0):
        gens = [(i, j, k)
                for i in range(i_max + 1)
                for j in range(j_max + 1)
                for k in ks]
    expansions = [_expand(*g) for g in gens]
    columns = sorted({key for e in expansions for key in e}, reverse=True)
    matrix = tuple(tuple(e.get(col, 0) for col in columns)
                   for e in expansions)
    return MonomialSpace(i_max, j_max, k_max, tuple(gens), tuple(columns),
                         matrix)


def _check_sizes(n1: int, n2: int, n3: int) -> None:
    for n in (n1, n2, n3):
        if not isinstance(n, int):
            raise ValueError(f"group sizes must be integers, got {n!r}")
    if not n1 >= n2 >= n3 >= 0:
        raise ValueError(f"sizes must satisfy N1 >= N2 >= N3 >= 0, "
                         f"got ({n1}, {n2}, {n3})")
    if genus_of_sizes(n1, n2, n3) < 1:
        raise ValueError(f"sizes ({n1}, {n2}, {n3}) give genus "
                         f"{genus_of_sizes(n1, n2, n3)}; need >= 1")


def genus_of_sizes(n1: int, n2: int, n3: int) -> int:
    """Genus of the smooth curve with these group sizes."""
    return (n1 * n2 + n1 * n3 + n2 * n3) - (n1 + n2 + n3) + 1


def holomorphic_count(n1: int, n2: int, n3: int) -> int:
    """Dimension of the holomorphic-differential span, exactly.

    Computed as a matrix rank and replayed against the genus; the two
    must agree for the downstream criterion to mean anything.
    """
    _check_sizes(n1, n2, n3)
    if n3 >= 1:
        space = monomial_span(n1 - 1, n2 - 1, n3 - 1)
    else:
        space = monomial_span(n1 - 2, n2 - 2)
    rank = space.rank
    g = genus_of_sizes(n1, n2, n3)
    if rank != g:
        raise AssertionError(
            f"holomorphic span rank {rank} != genus {g} at ({n1},{n2},{n3})")
    return rank


def _excess_closed_form(n1: int, n2: int, n3: int) -> int:
    if n3 >= 2:
        return (n1 * n2 + n1 * n3 + n2 * n3) - (n1 + n2 + n3) - 1
    if n3 == 1:
        return 2 * (n1 - 1) * (n2 - 1)
    if n2 >= 3:
        return (n1 - 1) * (n2 - 1) - 2
    return 0


def quadratic_span_dim(n1: int, n2: int, n3: int) -> int:
    """Dimension of the quadratic combinations of the differentials.

    Rank of the doubled index box minus the rank of the box of
    multipliers of the curve polynomial; cross-checked against the
    closed-form excess over 2g - 1.
    """
    _check_sizes(n1, n2, n3)
    if n3 >= 1:
        w = monomial_span(2 * n1 - 2, 2 * n2 - 2, 2 * n3 - 2)
        u = monomial_span(n1 - 2, n2 - 2, n3 - 2)
    else:
        w = monomial_span(2 * n1 - 4, 2 * n2 - 4)
        u = monomial_span(n1 - 4, n2 - 4)
    dim = w.rank - u.rank
    g = genus_of_sizes(n1, n2, n3)
    expected = 2 * g - 1 + _excess_closed_form(n1, n2, n3)
    if dim != expected:
        raise AssertionError(
            f"quadratic span rank {dim} != closed form {expected} "
            f"at ({n1},{n2},{n3})")
    return dim


def is_hyperelliptic(n1: int, n2: int, n3: int) -> bool:
    """Whether the curve admits a degree-2 map to the line.

    True exactly when the quadratic span is minimal; the rank route and
    the size classification must agree.
    """
    _check_sizes(n1, n2, n3)
    g = genus_of_sizes(n1, n2, n3)
    by_rank = quadratic_span_dim(n1, n2, n3) == 2 * g - 1
    by_sizes = (n2 == n3 == 1) or (n2 == 2 and n3 == 0)
    if by_rank != by_sizes:
        raise AssertionError(
            f"rank criterion {by_rank} != size classification {by_sizes} "
            f"at ({n1},{n2},{n3})")
    return by_rank


@dataclass(frozen=True)
class ClassificationRow:
    """One line of the hyperellipticity table."""

    n1: int
    n2: int
    n3: int
    genus: int
    quadratic_dim: int
    threshold: int
    hyperelliptic: bool

    def as_cells(self) -> list:
        return [self.n1, self.n2, self.n3, self.genus, self.quadratic_dim,
                self.threshold, self.hyperelliptic]


CLASSIFICATION_HEADER = ["N1", "N2", "N3", "genus", "quadratic_dim",
                         "threshold", "hyperelliptic"]


def classification_table(max_n1: int = 4) -> list[ClassificationRow]:
    """Rows for every sorted size triple with N1 <= max_n1 and genus >= 1."""
    rows = [(n1, n2, n3)
            for n1 in range(1, max_n1 + 1)
            for n2 in range(1, n1 + 1)
            for n3 in range(0, n2 + 1)
            if genus_of_sizes(n1, n2, n3) >= 1]
    out = []
    for n1, n2, n3 in sorted(rows):
        g = genus_of_sizes(n1, n2, n3)
        dim = quadratic_span_dim(n1, n2, n3)
        out.append(ClassificationRow(n1, n2, n3, g, dim, 2 * g - 1,
                                     is_hyperelliptic(n1, n2, n3)))
    return out
