"""Line configurations: hypothesis validation, genus, special points, projection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .exact import ExactScalar
from .numpoly import (
    common_zeros,
    lines_product_coeffs,
    partial_u,
    partial_v,
    polyval2,
)

__all__ = [
    "IntersectionPoint",
    "LineConfiguration",
    "LineGroup",
    "NormalizedConfig",
    "ProjectionChoice",
    "SchemaError",
    "ValidationReport",
    "genus_forms",
]


class SchemaError(ValueError):
    """Input violates the documented JSON schema or value constraints."""


def _scalar(x) -> ExactScalar:
    return ExactScalar.from_any(x)


@dataclass(frozen=True)
class LineGroup:
    a: ExactScalar
    b: ExactScalar
    offsets: tuple[ExactScalar, ...]


@dataclass(frozen=True)
class IntersectionPoint:
    """Meeting point of line (i,j) and line (k,l), indices 1-based, i < k."""

    i: int
    j: int
    k: int
    l: int
    x: ExactScalar
    y: ExactScalar

    def u_value(self, theta: Fraction) -> ExactScalar:
        return self.x + theta * self.y

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.i, self.j, self.k, self.l)


@dataclass(frozen=True)
class ProjectionChoice:
    """Shear u = x + theta*y making every line a graph over u."""

    theta: Fraction


@dataclass(frozen=True)
class ValidationReport:
    entries: tuple[tuple[str, bool, str], ...]

    @property
    def ok(self) -> bool:
        return all(passed for _, passed, _ in self.entries)

    def as_dict(self) -> dict:
        return {name: {"passed": passed, "detail": detail}
                for name, passed, detail in self.entries}


def genus_forms(sizes) -> tuple[int, int]:
    """Both closed forms of the genus for group sizes N_1..N_N."""
    sizes = list(sizes)
    d = sum(sizes)
    pairs = sum(sizes[i] * sizes[k]
                for i in range(len(sizes)) for k in range(i + 1, len(sizes)))
    direct = pairs - d + 1
    binomial = math.comb(d - 1, 2) - sum(math.comb(n, 2) for n in sizes)
    return direct, binomial


def _theta_candidates(max_height: int = 64):
    yield Fraction(0)
    for h in range(1, max_height + 1):
        for q in range(1, h + 1):
            if math.gcd(h, q) == 1:
                yield Fraction(h, q)
                yield Fraction(-h, q)
        for p in range(1, h):
            if math.gcd(p, h) == 1:
                yield Fraction(p, h)
                yield Fraction(-p, h)


class LineConfiguration:
    """Groups of parallel lines a_i x + b_i y + c_{i,j} with parameter lambda or t.

    Indices are 1-based throughout, matching the (i,j) line labels used in
    symbols and places. The parameter may be exact or a plain float; exact
    operations demand an exact parameter.
    """

    def __init__(self, groups, *, lam=None, t=None):
        if (lam is None) == (t is None):
            raise SchemaError("exactly one of lambda / t must be given")
        norm = []
        for g in groups:
            if isinstance(g, LineGroup):
                norm.append(g)
            else:
                a, b, offs = g
                norm.append(LineGroup(_scalar(a), _scalar(b),
                                      tuple(_scalar(c) for c in offs)))
        self.groups: tuple[LineGroup, ...] = tuple(norm)
        self.param_kind = "lambda" if t is None else "t"
        value = lam if t is None else t
        if isinstance(value, float):
            if value == 0:
                raise SchemaError("parameter must be nonzero")
        else:
            value = _scalar(value)
            if not value:
                raise SchemaError("parameter must be nonzero")
        self.param_value = value

    # -- basic shape ---------------------------------------------------------

    @property
    def N(self) -> int:
        return len(self.groups)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(g.offsets) for g in self.groups)

    @property
    def d(self) -> int:
        return sum(self.sizes)

    def line(self, i: int, j: int) -> tuple[ExactScalar, ExactScalar, ExactScalar]:
        g = self.groups[i - 1]
        return g.a, g.b, g.offsets[j - 1]

    def line_ids(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(1, self.N + 1)
                for j in range(1, self.sizes[i - 1] + 1)]

    def det(self, i: int, k: int) -> ExactScalar:
        gi, gk = self.groups[i - 1], self.groups[k - 1]
        return gi.a * gk.b - gk.a * gi.b

    # -- parameter -----------------------------------------------------------

    def _is_exact_param(self) -> bool:
        return isinstance(self.param_value, ExactScalar)

    def lambda_exact(self) -> ExactScalar:
        if not self._is_exact_param():
            raise TypeError("parameter is numeric; exact value unavailable")
        v = self.param_value
        return v if self.param_kind == "lambda" else v.inverse()

    def t_exact(self) -> ExactScalar:
        if not self._is_exact_param():
            raise TypeError("parameter is numeric; exact value unavailable")
        v = self.param_value
        return v if self.param_kind == "t" else v.inverse()

    def lambda_float(self, branch: str = "plus") -> float:
        if self._is_exact_param():
            return float(self.lambda_exact().embed(branch))
        v = float(self.param_value)
        return v if self.param_kind == "lambda" else 1.0 / v

    def t_float(self, branch: str = "plus") -> float:
        if self._is_exact_param():
            return float(self.t_exact().embed(branch))
        v = float(self.param_value)
        return v if self.param_kind == "t" else 1.0 / v

    def with_t(self, t) -> "LineConfiguration":
        return LineConfiguration(self.groups, t=t)

    # -- geometry ------------------------------------------------------------

    def intersection(self, i: int, j: int, k: int, l: int) -> IntersectionPoint:
        if not i < k:
            raise ValueError("intersection wants i < k")
        ai, bi, ci = self.line(i, j)
        ak, bk, ck = self.line(k, l)
        det = ai * bk - ak * bi
        x = (bi * ck - bk * ci) / det
        y = (ak * ci - ai * ck) / det
        return IntersectionPoint(i, j, k, l, x, y)

    def all_intersections(self) -> list[IntersectionPoint]:
        out = []
        for i in range(1, self.N + 1):
            for j in range(1, self.sizes[i - 1] + 1):
                for k in range(i + 1, self.N + 1):
                    for l in range(1, self.sizes[k - 1] + 1):
                        out.append(self.intersection(i, j, k, l))
        out.sort(key=lambda p: p.key)
        return out

    def defining_value(self, x, y):
        """Exact lambda * prod L at an exact point."""
        lam = self.lambda_exact()
        x = _scalar(x)
        y = _scalar(y)
        acc = lam
        for i, j in self.line_ids():
            a, b, c = self.line(i, j)
            acc = acc * (a * x + b * y + c)
        return acc

    def lines_as_floats(self, branch: str = "plus"):
        return [(complex(a.embed(branch)), complex(b.embed(branch)),
                 complex(c.embed(branch)))
                for (i, j) in self.line_ids()
                for (a, b, c) in [self.line(i, j)]]

    # -- hypotheses ----------------------------------------------------------

    def validate(self) -> ValidationReport:
        entries = []
        sizes_ok = self.N >= 2 and all(n >= 1 for n in self.sizes)
        entries.append(("shape", sizes_ok,
                        f"N={self.N}, sizes={list(self.sizes)}"))
        dirs_ok = all(bool(g.a) or bool(g.b) for g in self.groups)
        entries.append(("directions_nonzero", dirs_ok, ""))
        nonpar = []
        if dirs_ok:
            for i in range(1, self.N + 1):
                for k in range(i + 1, self.N + 1):
                    if not self.det(i, k):
                        nonpar.append((i, k))
        entries.append(("pairwise_nonparallel", dirs_ok and not nonpar,
                        f"parallel group pairs: {nonpar}" if nonpar else ""))
        dup_offsets = [i + 1 for i, g in enumerate(self.groups)
                       if len(set(g.offsets)) != len(g.offsets)]
        entries.append(("offsets_distinct", not dup_offsets,
                        f"groups with repeats: {dup_offsets}" if dup_offsets else ""))
        concurrent = ""
        conc_ok = True
        if dirs_ok and not nonpar:
            seen: dict = {}
            for p in self.all_intersections():
                spot = (p.x, p.y)
                if spot in seen:
                    conc_ok = False
                    concurrent = f"{seen[spot]} and {p.key} meet at the same point"
                    break
                seen[spot] = p.key
        entries.append(("no_three_concurrent", conc_ok, concurrent))
        if self._is_exact_param():
            param_ok = bool(self.param_value)
        else:
            param_ok = self.param_value != 0 and math.isfinite(self.param_value)
        entries.append(("parameter_nonzero", param_ok, ""))
        return ValidationReport(tuple(entries))

    def genus(self) -> int:
        direct, binomial = genus_forms(self.sizes)
        if direct != binomial:
            raise AssertionError("genus closed forms disagree")
        if direct < 0:
            raise ValueError("negative genus")
        return direct

    def special_set_S(self) -> list[IntersectionPoint]:
        pts = [p for p in self.all_intersections()
               if (p.i, p.j) != (1, 1) and (p.i, p.k, p.l) != (1, 2, 1)]
        if len(pts) != self.genus():
            raise AssertionError("special set size must equal the genus")
        return pts

    def choose_projection(self, seed: int = 0) -> ProjectionChoice:
        # seed kept for interface stability; the enumeration is fixed.
        del seed
        points = self.all_intersections()
        for theta in _theta_candidates():
            if any(not (g.b - theta * g.a) for g in self.groups):
                continue
            us = [p.u_value(theta) for p in points]
            if len(set(us)) == len(us):
                return ProjectionChoice(theta)
        raise RuntimeError("no valid shear found in the candidate enumeration")

    # -- smoothness ----------------------------------------------------------

    def singular_candidates(self):
        """Common zeros of both partials of prod L; independent of the parameter."""
        P = lines_product_coeffs(self.lines_as_floats())
        return common_zeros(partial_u(P), partial_v(P))

    def smoothness_check(self, lam=None, tol: float = 1e-8) -> str:
        if tol <= 0:
            raise ValueError("tolerance must be positive")
        if lam is None:
            lam_f = self.lambda_float()
        elif isinstance(lam, ExactScalar):
            lam_f = float(lam.embed())
        else:
            lam_f = complex(lam)
        P = lines_product_coeffs(self.lines_as_floats())
        points, converged = self.singular_candidates()
        if not converged:
            return "inconclusive"
        margins = [abs(lam_f * polyval2(P, p[0], p[1]) - 1) for p in points]
        if any(m < tol for m in margins):
            return "singular"
        if all(m > 10 * tol for m in margins):
            return "smooth"
        return "inconclusive"

    # -- normal form -----------------------------------------------------------

    def normalize_N_le_3(self) -> "NormalizedConfig":
        if self.N not in (2, 3):
            raise ValueError("normal form needs 2 or 3 groups")
        one = ExactScalar(1)
        if self.N == 3:
            d12, d13, d23 = self.det(1, 2), self.det(1, 3), self.det(2, 3)
            s1 = d12 / d23
            s2 = d12 / d13
            s3 = one
        else:
            s1 = self.groups[0].a if self.groups[0].a else self.groups[0].b
            s2 = self.groups[1].a if self.groups[1].a else self.groups[1].b
            s3 = one
        scales = [s1, s2, s3][: self.N]
        new_dirs = [(one, ExactScalar(0)), (ExactScalar(0), one),
                    (-one, one)][: self.N]
        new_groups = []
        for g, s, (na, nb) in zip(self.groups, scales, new_dirs):
            new_groups.append(LineGroup(na, nb, tuple(c / s for c in g.offsets)))
        rescale = one
        for g, s in zip(self.groups, scales):
            rescale = rescale * s ** len(g.offsets)
        if self._is_exact_param():
            new_lam = self.lambda_exact() * rescale
            flag = new_lam.is_algebraic_integer() and all(
                c.is_algebraic_integer() for g in new_groups for c in g.offsets)
        else:
            new_lam = self.lambda_float() * float(rescale)
            flag = False
        matrix = ((self.groups[0].a / s1, self.groups[0].b / s1),
                  (self.groups[1].a / s2, self.groups[1].b / s2))
        return NormalizedConfig(LineConfiguration(new_groups, lam=new_lam),
                                matrix, flag)

    # -- serialization ---------------------------------------------------------

    @property
    def field_disc(self):
        discs = {s.disc for g in self.groups
                 for s in (g.a, g.b, *g.offsets) if s.disc is not None}
        if self._is_exact_param() and self.param_value.disc is not None:
            discs.add(self.param_value.disc)
        if len(discs) > 1:
            raise SchemaError(f"multiple discriminants in one configuration: {discs}")
        return discs.pop() if discs else None

    def to_json_dict(self) -> dict:
        out: dict = {}
        disc = self.field_disc
        if disc is not None:
            out["field"] = {"D": disc}
        out["groups"] = [{"a": g.a.to_str(), "b": g.b.to_str(),
                          "offsets": [c.to_str() for c in g.offsets]}
                         for g in self.groups]
        if self._is_exact_param():
            out[self.param_kind] = self.param_value.to_str()
        else:
            out[self.param_kind] = self.param_value
        return out

    @classmethod
    def from_json_dict(cls, data) -> "LineConfiguration":
        if not isinstance(data, dict):
            raise SchemaError("configuration must be a JSON object")
        allowed = {"field", "groups", "lambda", "t"}
        extra = set(data) - allowed
        if extra:
            raise SchemaError(f"unknown keys: {sorted(extra)}")
        disc = None
        if "field" in data:
            fld = data["field"]
            if not isinstance(fld, dict) or set(fld) - {"D"}:
                raise SchemaError("field must be an object with optional key D")
            if "D" in fld:
                if isinstance(fld["D"], bool) or not isinstance(fld["D"], int):
                    raise SchemaError("field.D must be an integer")
                disc = fld["D"]
                try:
                    ExactScalar(0, 1, disc)
                except ValueError as exc:
                    raise SchemaError(str(exc)) from exc
        if ("lambda" in data) == ("t" in data):
            raise SchemaError("exactly one of lambda / t must be present")
        if "groups" not in data or not isinstance(data["groups"], list):
            raise SchemaError("groups must be a list")

        def read_scalar(v) -> ExactScalar:
            if isinstance(v, bool) or not isinstance(v, (str, int)):
                raise SchemaError(f"scalar must be a string or integer: {v!r}")
            try:
                s = _scalar(v)
            except ValueError as exc:
                raise SchemaError(str(exc)) from exc
            if s.disc is not None and s.disc != disc:
                raise SchemaError(f"scalar sqrt({s.disc}) outside declared field")
            return s

        groups = []
        for g in data["groups"]:
            if not isinstance(g, dict) or set(g) != {"a", "b", "offsets"}:
                raise SchemaError("each group needs exactly keys a, b, offsets")
            if not isinstance(g["offsets"], list) or not g["offsets"]:
                raise SchemaError("offsets must be a nonempty list")
            groups.append((read_scalar(g["a"]), read_scalar(g["b"]),
                           [read_scalar(c) for c in g["offsets"]]))
        if len(groups) < 2:
            raise SchemaError("at least two groups required")
        kind = "lambda" if "lambda" in data else "t"
        raw = data[kind]
        value = read_scalar(raw) if isinstance(raw, (str, int)) else None
        if value is None:
            if isinstance(raw, bool) or not isinstance(raw, float):
                raise SchemaError("parameter must be a scalar string or number")
            value = raw
        try:
            if kind == "lambda":
                return cls(groups, lam=value)
            return cls(groups, t=value)
        except ValueError as exc:
            raise SchemaError(str(exc)) from exc


@dataclass(frozen=True)
class NormalizedConfig:
    """Normal-form configuration, the linear map applied, integrality flag."""

    config: LineConfiguration
    matrix: tuple[tuple[ExactScalar, ExactScalar], tuple[ExactScalar, ExactScalar]]
    integral: bool

    def apply_map(self, x: ExactScalar, y: ExactScalar):
        (m11, m12), (m21, m22) = self.matrix
        return m11 * x + m12 * y, m21 * x + m22 * y
