"""Formal symbol algebra on line configurations.

Symbols are integer combinations of pairs of rational monomials in the
configured lines. Element constructors attach their determinant constants
both as exact scalars and as formal signed products of determinant atoms;
the relation checker reduces differences symbolically, using only
bilinearity, antisymmetry, {a,-a} = 0, and explicit Steinberg instances
built from the determinant identity
det[k,m] det[p,i] - det[i,m] det[p,k] = det[p,m] det[k,i].
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

from .exact import ExactScalar
from .config import IntersectionPoint, LineConfiguration

__all__ = [
    "AffineForm",
    "FormRegistry",
    "FormalConstant",
    "K2Symbol",
    "PairExpansion",
    "RationalMonomial",
    "RelationReport",
    "admissible_assignments",
    "det_identity_check",
    "expand_bilinear",
    "generator_list",
    "m_for_point",
    "r_element",
    "registry_for",
    "relation_sides",
    "t_element",
    "verify_relation",
]

RELATION_IDS = ("i", "ii", "iii", "iv", "v", "vi", "vii")


# -- affine forms --------------------------------------------------------------


@dataclass(frozen=True)
class AffineForm:
    """a*x + b*y + c with a registry id; configured lines get id "i,j"."""

    a: ExactScalar
    b: ExactScalar
    c: ExactScalar
    form_id: str


class FormRegistry:
    """Append-only store of affine forms, deduplicated on exact triples."""

    def __init__(self, config: LineConfiguration):
        self.config = config
        self._by_id: dict[str, AffineForm] = {}
        self._by_triple: dict[tuple, str] = {}
        self._fresh = 0
        for i, j in config.line_ids():
            a, b, c = config.line(i, j)
            fid = f"{i},{j}"
            self._by_id[fid] = AffineForm(a, b, c, fid)
            self._by_triple[(a, b, c)] = fid

    def line_id(self, i: int, j: int) -> str:
        fid = f"{i},{j}"
        if fid not in self._by_id:
            raise IndexError(f"no configured line ({i},{j})")
        return fid

    def register(self, a, b, c) -> str:
        a, b, c = (ExactScalar.from_any(v) for v in (a, b, c))
        if not a and not b:
            raise ValueError("affine form needs a nonzero direction")
        key = (a, b, c)
        if key in self._by_triple:
            return self._by_triple[key]
        self._fresh += 1
        fid = f"~{self._fresh}"
        self._by_id[fid] = AffineForm(a, b, c, fid)
        self._by_triple[key] = fid
        return fid

    def form(self, fid: str) -> AffineForm:
        return self._by_id[fid]

    def known(self, fid: str) -> bool:
        return fid in self._by_id


def registry_for(config: LineConfiguration) -> FormRegistry:
    reg = getattr(config, "_form_registry", None)
    if reg is None:
        reg = FormRegistry(config)
        config._form_registry = reg
    return reg


# -- formal constants ----------------------------------------------------------


def _atom_key(atom) -> tuple:
    if atom[0] == "det":
        return (0, atom[1], atom[2], "")
    return (1, 0, 0, atom[1].to_str())


class FormalConstant:
    """Signed product of atoms: determinant symbols det[i,k] and opaque scalars."""

    __slots__ = ("sign", "atoms")

    def __init__(self, sign: int = 1, atoms=None):
        merged: dict = {}
        for atom, e in (atoms or {}).items():
            if not e:
                continue
            if atom[0] == "s":
                v = atom[1]
                if v == 1:
                    continue
                if v == -1:
                    sign *= (-1) ** e
                    continue
                if v.sign() < 0:
                    sign *= (-1) ** e
                    atom = ("s", -v)
            merged[atom] = merged.get(atom, 0) + e
        self.sign = 1 if sign > 0 else -1
        self.atoms = {a: e for a, e in merged.items() if e}

    @staticmethod
    def one() -> "FormalConstant":
        return FormalConstant()

    @staticmethod
    def from_scalar(v: ExactScalar) -> "FormalConstant":
        v = ExactScalar.from_any(v)
        if not v:
            raise ValueError("constants must be nonzero")
        return FormalConstant(1, {("s", v): 1})

    @staticmethod
    def det_atom(i: int, k: int, power: int = 1) -> "FormalConstant":
        if i == k:
            raise ValueError("det atom needs distinct groups")
        if i < k:
            return FormalConstant(1, {("det", i, k): power})
        return FormalConstant((-1) ** power, {("det", k, i): power})

    def __mul__(self, other: "FormalConstant") -> "FormalConstant":
        atoms = dict(self.atoms)
        for a, e in other.atoms.items():
            atoms[a] = atoms.get(a, 0) + e
        return FormalConstant(self.sign * other.sign, atoms)

    def __pow__(self, n: int) -> "FormalConstant":
        return FormalConstant(self.sign if n % 2 else 1,
                              {a: e * n for a, e in self.atoms.items()})

    def inverse(self) -> "FormalConstant":
        return self ** -1

    def is_one(self) -> bool:
        return self.sign == 1 and not self.atoms

    def canon(self) -> tuple:
        return (self.sign, tuple(sorted(self.atoms.items(),
                                        key=lambda kv: _atom_key(kv[0]))))

    def __eq__(self, other):
        return isinstance(other, FormalConstant) and self.canon() == other.canon()

    def __hash__(self):
        return hash(self.canon())

    def value(self, config: LineConfiguration) -> ExactScalar:
        out = ExactScalar(self.sign)
        for atom, e in self.atoms.items():
            if atom[0] == "det":
                out = out * config.det(atom[1], atom[2]) ** e
            else:
                out = out * atom[1] ** e
        return out

    def __repr__(self):
        if self.is_one():
            return "1"
        parts = [] if self.sign == 1 else ["-1"]
        for atom, e in sorted(self.atoms.items(), key=lambda kv: _atom_key(kv[0])):
            base = (f"det[{atom[1]},{atom[2]}]" if atom[0] == "det"
                    else f"({atom[1].to_str()})")
            parts.append(base if e == 1 else f"{base}^{e}")
        return "*".join(parts)


# -- monomials and symbols -------------------------------------------------------


class RationalMonomial:
    """constant * prod(form_id ** exponent); constant also kept formally."""

    __slots__ = ("constant", "exponents", "formal")

    def __init__(self, constant, exponents, formal: FormalConstant | None = None):
        constant = ExactScalar.from_any(constant)
        if not constant:
            raise ValueError("monomial constant must be nonzero")
        self.constant = constant
        self.exponents = {fid: e for fid, e in dict(exponents).items() if e}
        self.formal = formal if formal is not None else FormalConstant.from_scalar(constant)

    @staticmethod
    def one() -> "RationalMonomial":
        return RationalMonomial(1, {}, FormalConstant.one())

    def key(self) -> tuple:
        return (self.constant.to_str(), tuple(sorted(self.exponents.items())),
                self.formal.canon())

    def __mul__(self, other: "RationalMonomial") -> "RationalMonomial":
        exps = dict(self.exponents)
        for fid, e in other.exponents.items():
            exps[fid] = exps.get(fid, 0) + e
        return RationalMonomial(self.constant * other.constant, exps,
                                self.formal * other.formal)

    def __pow__(self, n: int) -> "RationalMonomial":
        return RationalMonomial(self.constant ** n,
                                {fid: e * n for fid, e in self.exponents.items()},
                                self.formal ** n)

    def inverse(self) -> "RationalMonomial":
        return self ** -1

    def __truediv__(self, other: "RationalMonomial") -> "RationalMonomial":
        return self * other.inverse()

    def __eq__(self, other):
        return isinstance(other, RationalMonomial) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def to_json(self) -> dict:
        return {"constant": self.constant.to_str(),
                "factors": {fid: e for fid, e in sorted(self.exponents.items())}}

    @staticmethod
    def from_json(data, registry: FormRegistry) -> "RationalMonomial":
        factors = data.get("factors", {})
        for fid in factors:
            if not registry.known(fid):
                raise ValueError(f"unknown form id {fid!r}")
        return RationalMonomial(ExactScalar.from_any(data["constant"]),
                                {fid: int(e) for fid, e in factors.items()})

    def __repr__(self):
        parts = [] if self.constant == 1 else [self.constant.to_str()]
        for fid, e in sorted(self.exponents.items()):
            parts.append(f"L[{fid}]" + ("" if e == 1 else f"^{e}"))
        return "*".join(parts) or "1"


class K2Symbol:
    """Integer combination of ordered monomial pairs {left, right}."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        merged: dict = {}
        keep: dict = {}
        for left, right, coeff in terms:
            k = (left.key(), right.key())
            merged[k] = merged.get(k, 0) + coeff
            keep[k] = (left, right)
        self.terms = tuple(
            (*keep[k], merged[k])
            for k in sorted(merged) if merged[k] != 0)

    @staticmethod
    def pair(left: RationalMonomial, right: RationalMonomial) -> "K2Symbol":
        return K2Symbol([(left, right, 1)])

    @staticmethod
    def zero() -> "K2Symbol":
        return K2Symbol([])

    def __add__(self, other: "K2Symbol") -> "K2Symbol":
        return K2Symbol([*self.terms, *other.terms])

    def __neg__(self) -> "K2Symbol":
        return K2Symbol([(l, r, -n) for l, r, n in self.terms])

    def __sub__(self, other: "K2Symbol") -> "K2Symbol":
        return self + (-other)

    def __rmul__(self, n: int) -> "K2Symbol":
        return K2Symbol([(l, r, n * c) for l, r, c in self.terms])

    def __eq__(self, other):
        return isinstance(other, K2Symbol) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple((l.key(), r.key(), n) for l, r, n in self.terms))

    def is_zero(self) -> bool:
        return not self.terms

    def to_json(self) -> list:
        return [{"left": l.to_json(), "right": r.to_json(), "coeff": n}
                for l, r, n in self.terms]

    @staticmethod
    def from_json(data, registry: FormRegistry) -> "K2Symbol":
        return K2Symbol([
            (RationalMonomial.from_json(t["left"], registry),
             RationalMonomial.from_json(t["right"], registry),
             int(t["coeff"]))
            for t in data])

    def __repr__(self):
        if not self.terms:
            return "0"
        return " + ".join(f"{n}*{{{l!r}, {r!r}}}" for l, r, n in self.terms)


# -- element constructors --------------------------------------------------------


def _line_monomial(config, entries) -> RationalMonomial:
    reg = registry_for(config)
    return RationalMonomial(1, {reg.line_id(i, j): e for (i, j), e in entries},
                            FormalConstant.one())


def r_element(config: LineConfiguration, i: int, j: int, k: int,
              l: int, m: int, n: int) -> K2Symbol:
    """{L_{i,j}/L_{i,k}, L_{l,m}/L_{l,n}} with i != l, j != k, m != n."""
    if i == l:
        raise ValueError("the two ratios must come from different groups")
    if j == k or m == n:
        raise ValueError("each ratio needs two distinct lines of its group")
    left = _line_monomial(config, [((i, j), 1), ((i, k), -1)])
    right = _line_monomial(config, [((l, m), 1), ((l, n), -1)])
    return K2Symbol.pair(left, right)


def t_element(config: LineConfiguration, i: int, j: int, k: int, l: int,
              m: int, n: int) -> K2Symbol:
    """{(det[i,m]/det[k,m]) L_{k,l}/L_{i,j}, (det[i,k]/det[m,k]) L_{m,n}/L_{i,j}}."""
    if len({i, k, m}) != 3:
        raise ValueError("the three lines must come from distinct groups")
    c1 = FormalConstant.det_atom(i, m) * FormalConstant.det_atom(k, m, -1)
    c2 = FormalConstant.det_atom(i, k) * FormalConstant.det_atom(m, k, -1)
    left = RationalMonomial(c1.value(config),
                            {registry_for(config).line_id(k, l): 1,
                             registry_for(config).line_id(i, j): -1}, c1)
    right = RationalMonomial(c2.value(config),
                             {registry_for(config).line_id(m, n): 1,
                              registry_for(config).line_id(i, j): -1}, c2)
    return K2Symbol.pair(left, right)


def generator_list(config: LineConfiguration) -> list[K2Symbol]:
    """The generating family; its length equals the genus."""
    sizes = config.sizes
    N = config.N
    out = []
    for j in range(2, sizes[0] + 1):
        for m in range(2, sizes[1] + 1):
            out.append(r_element(config, 1, 1, j, 2, 1, m))
    for k in range(2, N + 1):
        for m in range(k + 1, N + 1):
            for l in range(1, sizes[k - 1] + 1):
                for n in range(1, sizes[m - 1] + 1):
                    out.append(t_element(config, 1, 1, k, l, m, n))
    for j in range(2, sizes[0] + 1):
        for m in range(3, N + 1):
            for n in range(1, sizes[m - 1] + 1):
                out.append(t_element(config, 1, j, 2, 1, m, n))
    if len(out) != config.genus():
        raise AssertionError("generator count must equal the genus")
    return out


def m_for_point(config: LineConfiguration, s: IntersectionPoint) -> K2Symbol:
    """The element attached to a point of the special set."""
    keys = {p.key for p in config.special_set_S()}
    if s.key not in keys:
        raise ValueError(f"point {s.key} is not in the special set")
    i, j, k, l = s.key
    if i == 1 and k == 2:
        return r_element(config, 1, j, 1, 2, l, 1)
    if i >= 2:
        return t_element(config, 1, 1, i, j, k, l)
    return t_element(config, 1, j, 2, 1, k, l) - t_element(config, 1, 1, 2, 1, k, l)


# -- bilinear expansion -----------------------------------------------------------


@dataclass(frozen=True)
class ConstantPart:
    """{constant, line} factors per line id plus pure constant pairs."""

    lines: tuple[tuple[str, ExactScalar], ...]
    pairs: tuple[tuple[ExactScalar, ExactScalar, int], ...]


@dataclass(frozen=True)
class PairExpansion:
    function_part: tuple[tuple[tuple[str, str], int], ...]
    constant_part: ConstantPart

    def is_trivial(self) -> bool:
        return (not self.function_part and not self.constant_part.lines
                and not self.constant_part.pairs)

    def __add__(self, other: "PairExpansion") -> "PairExpansion":
        fp = dict(self.function_part)
        for key, n in other.function_part:
            fp[key] = fp.get(key, 0) + n
        lines = dict(self.constant_part.lines)
        for fid, c in other.constant_part.lines:
            lines[fid] = lines.get(fid, ExactScalar(1)) * c
        pairs: dict = {}
        for c1, c2, n in self.constant_part.pairs + other.constant_part.pairs:
            key = (c1, c2)
            pairs[key] = pairs.get(key, 0) + n
        return _package_expansion(fp, lines, pairs)


def _package_expansion(fp: dict, lines: dict, pairs: dict) -> PairExpansion:
    fp_t = tuple(sorted((k, v) for k, v in fp.items() if v != 0))
    ln_t = tuple(sorted((fid, c) for fid, c in lines.items() if c != 1))
    pr_t = tuple(sorted(((c1, c2, n) for (c1, c2), n in pairs.items()
                         if n != 0 and c1 != 1 and c2 != 1),
                        key=lambda t: (t[0].to_str(), t[1].to_str())))
    return PairExpansion(fp_t, ConstantPart(ln_t, pr_t))


def expand_bilinear(sym: K2Symbol) -> PairExpansion:
    """Expand a symbol over its line factors; constants tracked exactly."""
    fp: dict = {}
    lines: dict = {}
    pairs: dict = {}
    for left, right, n in sym.terms:
        c1, c2 = left.constant, right.constant
        for fid_a, ea in left.exponents.items():
            for fid_b, eb in right.exponents.items():
                w = n * ea * eb
                if fid_a == fid_b:
                    # {f,f} = {f,-1} = -{-1,f}
                    lines[fid_a] = lines.get(fid_a, ExactScalar(1)) * ExactScalar(-1) ** w
                elif fid_a < fid_b:
                    fp[(fid_a, fid_b)] = fp.get((fid_a, fid_b), 0) + w
                else:
                    fp[(fid_b, fid_a)] = fp.get((fid_b, fid_a), 0) - w
        if c2 != 1:
            for fid_a, ea in left.exponents.items():
                lines[fid_a] = lines.get(fid_a, ExactScalar(1)) * c2 ** (-n * ea)
        if c1 != 1:
            for fid_b, eb in right.exponents.items():
                lines[fid_b] = lines.get(fid_b, ExactScalar(1)) * c1 ** (n * eb)
        if c1 != 1 and c2 != 1:
            key = (c1, c2)
            pairs[key] = pairs.get(key, 0) + n
    return _package_expansion(fp, lines, pairs)


def _expand_formal(sym: K2Symbol):
    """Like expand_bilinear but with constants as formal atom products."""
    fp: dict = {}
    lines: dict = {}
    pairs: list = []
    neg_one = FormalConstant(-1)
    for left, right, n in sym.terms:
        c1, c2 = left.formal, right.formal
        for fid_a, ea in left.exponents.items():
            for fid_b, eb in right.exponents.items():
                w = n * ea * eb
                if fid_a == fid_b:
                    lines[fid_a] = lines.get(fid_a, FormalConstant.one()) * neg_one ** w
                elif fid_a < fid_b:
                    fp[(fid_a, fid_b)] = fp.get((fid_a, fid_b), 0) + w
                else:
                    fp[(fid_b, fid_a)] = fp.get((fid_b, fid_a), 0) - w
        if not c2.is_one():
            for fid_a, ea in left.exponents.items():
                lines[fid_a] = lines.get(fid_a, FormalConstant.one()) * c2 ** (-n * ea)
        if not c1.is_one():
            for fid_b, eb in right.exponents.items():
                lines[fid_b] = lines.get(fid_b, FormalConstant.one()) * c1 ** (n * eb)
        if not c1.is_one() and not c2.is_one():
            pairs.append((c1, c2, n))
    fp = {k: v for k, v in fp.items() if v != 0}
    lines = {fid: c for fid, c in lines.items() if not c.is_one()}
    return fp, lines, pairs


# -- constant pair reduction -------------------------------------------------------


def _cc_accumulate(Q: dict, P: dict, c1: FormalConstant, c2: FormalConstant,
                   n: int) -> int:
    """Expand n*{c1, c2} over atoms into Q (atom pairs), P ({-1, atom}), m11."""
    m11 = 0
    e = c1.atoms
    f = c2.atoms
    for a, ea in e.items():
        for b, fb in f.items():
            w = n * ea * fb
            if a == b:
                P[a] = P.get(a, 0) - w
            elif _atom_key(a) < _atom_key(b):
                Q[(a, b)] = Q.get((a, b), 0) + w
            else:
                Q[(b, a)] = Q.get((b, a), 0) - w
    if c2.sign < 0:
        for a, ea in e.items():
            P[a] = P.get(a, 0) - n * ea
    if c1.sign < 0:
        for b, fb in f.items():
            P[b] = P.get(b, 0) + n * fb
    if c1.sign < 0 and c2.sign < 0:
        m11 += n
    return m11


def _steinberg_templates(config: LineConfiguration):
    """All Steinberg pairs {u, 1-u} from ordered quadruples of groups."""
    cached = getattr(config, "_steinberg_cache", None)
    if cached is not None:
        return cached
    out = []
    seen = set()
    one = ExactScalar(1)
    for quad in itertools.permutations(range(1, config.N + 1), 4):
        i, k, m, p = quad
        denom = (FormalConstant.det_atom(p, m) * FormalConstant.det_atom(k, i)) ** -1
        u = FormalConstant.det_atom(k, m) * FormalConstant.det_atom(p, i) * denom
        w = FormalConstant(-1) * FormalConstant.det_atom(i, m) \
            * FormalConstant.det_atom(p, k) * denom
        key = (u.canon(), w.canon())
        if key in seen:
            continue
        seen.add(key)
        if one - u.value(config) != w.value(config):
            raise AssertionError("determinant identity failed on this configuration")
        Q: dict = {}
        P: dict = {}
        m11 = _cc_accumulate(Q, P, u, w, 1)
        out.append((Q, P, m11, (u, w)))
    config._steinberg_cache = out
    return out


def _reduce_cc(cc_terms, templates):
    """Reduce constant pairs modulo Steinberg templates; returns (ok, uses, residue)."""
    Q: dict = {}
    P: dict = {}
    m11 = 0
    for c1, c2, n in cc_terms:
        m11 += _cc_accumulate(Q, P, c1, c2, n)
    uses = 0
    _strip(Q)
    while Q:
        best = None
        for Qt, Pt, m11t, _ in templates:
            for mult in (1, -1, 2, -2, 3, -3, 4, -4):
                trial = _l1_after(Q, Qt, mult)
                if trial < _l1(Q) and (best is None or trial < best[0]):
                    best = (trial, Qt, Pt, m11t, mult)
        if best is None:
            return False, uses, f"irreducible atom pairs: {_fmt_q(Q)}"
        _, Qt, Pt, m11t, mult = best
        for key, v in Qt.items():
            Q[key] = Q.get(key, 0) - mult * v
        for key, v in Pt.items():
            P[key] = P.get(key, 0) - mult * v
        m11 -= mult * m11t
        uses += abs(mult)
        _strip(Q)
    odd = [a for a, v in P.items() if v % 2]
    if odd:
        return False, uses, f"odd order-two residue at atoms {odd}"
    if m11 % 2:
        return False, uses, "odd {-1,-1} residue"
    return True, uses, ""


def _strip(Q: dict) -> None:
    for key in [k for k, v in Q.items() if v == 0]:
        del Q[key]


def _l1(Q: dict) -> int:
    return sum(abs(v) for v in Q.values())


def _l1_after(Q: dict, Qt: dict, mult: int) -> int:
    total = 0
    for key in set(Q) | set(Qt):
        total += abs(Q.get(key, 0) - mult * Qt.get(key, 0))
    return total


def _fmt_q(Q: dict) -> str:
    return "; ".join(f"{a}~{b}: {v}" for (a, b), v in sorted(Q.items(),
                     key=lambda kv: (_atom_key(kv[0][0]), _atom_key(kv[0][1]))))


# -- relations ---------------------------------------------------------------------


def _check_offsets(config, *pairs):
    for i, j in pairs:
        if not (1 <= i <= config.N and 1 <= j <= config.sizes[i - 1]):
            raise ValueError(f"line ({i},{j}) out of range")


def relation_sides(config: LineConfiguration, relation_id: str,
                   assignment: dict) -> list[tuple[K2Symbol, K2Symbol]]:
    """(lhs, rhs) pairs for the chosen relation; two pairs for (i)/(ii)."""
    a = dict(assignment)
    r = lambda *ix: r_element(config, *ix)
    t = lambda *ix: t_element(config, *ix)
    i, j, k, l, m, n = (a.get(x) for x in "ijklmn")
    if relation_id == "i":
        lhs = t(i, j, k, l, m, n)
        return [(lhs, -t(k, l, i, j, m, n)), (lhs, -t(i, j, m, n, k, l))]
    if relation_id == "ii":
        lhs = r(i, j, k, l, m, n)
        return [(lhs, -r(i, k, j, l, m, n)), (lhs, -r(l, m, n, i, j, k))]
    if relation_id == "iii":
        p, q = a["p"], a["q"]
        if p in (j, k) or q in (m, n):
            raise ValueError("auxiliary offsets must differ from the acting ones")
        lhs = r(i, j, k, l, m, n)
        rhs = (r(i, p, j, l, q, m) - r(i, p, k, l, q, m)
               - r(i, p, j, l, q, n) + r(i, p, k, l, q, n))
        return [(lhs, rhs)]
    if relation_id == "iv":
        p, q = a["p"], a["q"]
        if p in (i, l):
            raise ValueError("auxiliary group must differ from the acting ones")
        _check_offsets(config, (p, q))
        lhs = r(i, j, k, l, m, n)
        rhs = (t(p, q, i, j, l, m) - t(p, q, i, k, l, m)
               - t(p, q, i, j, l, n) + t(p, q, i, k, l, n))
        return [(lhs, rhs)]
    if relation_id == "v":
        p, q = a["p"], a["q"]
        lhs = t(i, j, k, l, m, n)
        rhs = (t(i, p, k, l, m, n) - t(i, p, k, q, m, n)
               + t(i, j, k, q, m, n) + r(i, p, j, k, q, l))
        return [(lhs, rhs)]
    if relation_id == "vi":
        p, q, rr = a["p"], a["q"], a["r"]
        if q in (i, k, m):
            raise ValueError("auxiliary group must differ from the acting ones")
        _check_offsets(config, (i, p), (q, rr))
        lhs = t(i, j, k, l, m, n)
        rhs = (t(i, p, k, l, m, n) - t(i, p, q, rr, m, n) + t(i, j, q, rr, m, n)
               + t(i, p, q, rr, k, l) - t(i, j, q, rr, k, l))
        return [(lhs, rhs)]
    if relation_id == "vii":
        p, q = a["p"], a["q"]
        if p in (i, k, m):
            raise ValueError("auxiliary group must differ from the acting ones")
        _check_offsets(config, (p, q))
        lhs = t(i, j, k, l, m, n)
        rhs = (t(p, q, i, j, k, l) + t(p, q, k, l, m, n) - t(p, q, i, j, m, n))
        return [(lhs, rhs)]
    raise ValueError(f"unknown relation id {relation_id!r}")


@dataclass(frozen=True)
class RelationReport:
    relation_id: str
    assignment: dict
    passed: bool
    function_part_zero: bool
    constant_lines_trivial: bool
    steinberg_uses: int
    residue: str = ""


def verify_symbol_is_trivial(config: LineConfiguration, sym: K2Symbol,
                             relation_id: str = "custom",
                             assignment: dict | None = None) -> RelationReport:
    """Certify that a symbol reduces to zero by the allowed moves."""
    fp, lines, pairs = _expand_formal(sym)
    fp_zero = not fp
    lines_ok = not lines
    if not fp_zero or not lines_ok:
        residue = []
        if fp:
            residue.append(f"line pairs: {sorted(fp.items())}")
        if lines:
            residue.append("constant against line: "
                           + "; ".join(f"{fid}: {c!r}" for fid, c in sorted(lines.items())))
        return RelationReport(relation_id, assignment or {}, False, fp_zero,
                              lines_ok, 0, "; ".join(residue))
    templates = _steinberg_templates(config) if config.N >= 4 else []
    ok, uses, residue = _reduce_cc(pairs, templates)
    return RelationReport(relation_id, assignment or {}, ok, True, True,
                          uses, residue)


def verify_relation(config: LineConfiguration, relation_id: str,
                    assignment: dict) -> RelationReport:
    """Check one relation instance symbolically."""
    sides = relation_sides(config, relation_id, assignment)
    reports = [verify_symbol_is_trivial(config, lhs - rhs, relation_id, assignment)
               for lhs, rhs in sides]
    return RelationReport(
        relation_id, dict(assignment),
        all(rep.passed for rep in reports),
        all(rep.function_part_zero for rep in reports),
        all(rep.constant_lines_trivial for rep in reports),
        sum(rep.steinberg_uses for rep in reports),
        "; ".join(rep.residue for rep in reports if rep.residue))


def admissible_assignments(config: LineConfiguration, relation_id: str) -> list[dict]:
    """Every index assignment meeting the side conditions of the relation."""
    sizes = config.sizes
    N = config.N
    groups = range(1, N + 1)

    def offs(g):
        return range(1, sizes[g - 1] + 1)

    out = []
    if relation_id == "i":
        for i, k, m in itertools.permutations(groups, 3):
            for j in offs(i):
                for l in offs(k):
                    for n in offs(m):
                        out.append(dict(i=i, j=j, k=k, l=l, m=m, n=n))
    elif relation_id == "ii":
        for i, l in itertools.permutations(groups, 2):
            for j, k in itertools.permutations(offs(i), 2):
                for m, n in itertools.permutations(offs(l), 2):
                    out.append(dict(i=i, j=j, k=k, l=l, m=m, n=n))
    elif relation_id == "iii":
        for i, l in itertools.permutations(groups, 2):
            for j, k, p in itertools.permutations(offs(i), 3):
                for m, n, q in itertools.permutations(offs(l), 3):
                    out.append(dict(i=i, j=j, k=k, l=l, m=m, n=n, p=p, q=q))
    elif relation_id == "iv":
        for i, l, p in itertools.permutations(groups, 3):
            for j, k in itertools.permutations(offs(i), 2):
                for m, n in itertools.permutations(offs(l), 2):
                    for q in offs(p):
                        out.append(dict(i=i, j=j, k=k, l=l, m=m, n=n, p=p, q=q))
    elif relation_id == "v":
        for i, k, m in itertools.permutations(groups, 3):
            for j, p in itertools.permutations(offs(i), 2):
                for l, q in itertools.permutations(offs(k), 2):
                    for n in offs(m):
                        out.append(dict(i=i, j=j, k=k, l=l, m=m, n=n, p=p, q=q))
    elif relation_id == "vi":
        for i, k, m, q in itertools.permutations(groups, 4):
            for j in offs(i):
                for p in offs(i):
                    for l in offs(k):
                        for n in offs(m):
                            for rr in offs(q):
                                out.append(dict(i=i, j=j, k=k, l=l, m=m, n=n,
                                                p=p, q=q, r=rr))
    elif relation_id == "vii":
        for i, k, m, p in itertools.permutations(groups, 4):
            for j in offs(i):
                for l in offs(k):
                    for n in offs(m):
                        for q in offs(p):
                            out.append(dict(i=i, j=j, k=k, l=l, m=m, n=n, p=p, q=q))
    else:
        raise ValueError(f"unknown relation id {relation_id!r}")
    return out


def det_identity_check(config: LineConfiguration) -> bool:
    """det[k,m]det[p,i] - det[i,m]det[p,k] = det[p,m]det[k,i], all quadruples."""
    for i, k, m, p in itertools.permutations(range(1, config.N + 1), 4):
        lhs = (config.det(k, m) * config.det(p, i)
               - config.det(i, m) * config.det(p, k))
        if lhs != config.det(p, m) * config.det(k, i):
            return False
    return True
