"""Symbol algebra: element constructors, bilinear expansion, relation checking."""

from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from k2reg.exact import ExactScalar
from k2reg.symbols import (
    FormalConstant,
    K2Symbol,
    RationalMonomial,
    admissible_assignments,
    det_identity_check,
    expand_bilinear,
    generator_list,
    m_for_point,
    r_element,
    registry_for,
    relation_sides,
    t_element,
    verify_relation,
    verify_symbol_is_trivial,
)

from conftest import cfg_a, cfg_b, cfg_c, cfg_rel4, cfg_big3


def _mono(config, entries, constant=1):
    reg = registry_for(config)
    return RationalMonomial(constant, {reg.line_id(i, j): e for (i, j), e in entries})


# -- registry ------------------------------------------------------------------


def test_registry_line_ids_and_dedup():
    config = cfg_a()
    reg = registry_for(config)
    assert reg.line_id(1, 1) == "1,1"
    assert reg.line_id(3, 1) == "3,1"
    # an ad-hoc form matching a configured line reuses its id
    assert reg.register(1, 0, 0) == "1,1"
    fid = reg.register(1, 0, Fraction(1, 2))
    assert fid == "~1"
    assert reg.register(1, 0, Fraction(1, 2)) == "~1"
    assert reg.register(0, 1, 7) == "~2"
    with pytest.raises(ValueError):
        reg.register(0, 0, 3)
    with pytest.raises(IndexError):
        reg.line_id(1, 2)


def test_registry_cached_per_config():
    config = cfg_b()
    assert registry_for(config) is registry_for(config)


# -- element constructors ---------------------------------------------------------


def test_t_element_constants_on_three_axes():
    config = cfg_a()
    sym = t_element(config, 1, 1, 2, 1, 3, 1)
    assert len(sym.terms) == 1
    left, right, coeff = sym.terms[0]
    assert coeff == 1
    # det[1,3]/det[2,3] = 1 and det[1,2]/det[3,2] = -1 for axes x, y, y-x+1
    assert left.constant == 1
    assert left.exponents == {"2,1": 1, "1,1": -1}
    assert right.constant == -1
    assert right.exponents == {"3,1": 1, "1,1": -1}


def test_r_element_shape():
    config = cfg_b()
    sym = r_element(config, 1, 1, 2, 2, 1, 2)
    left, right, coeff = sym.terms[0]
    assert coeff == 1
    assert left.constant == 1 and right.constant == 1
    assert left.exponents == {"1,1": 1, "1,2": -1}
    assert right.exponents == {"2,1": 1, "2,2": -1}


def test_element_preconditions():
    config = cfg_c()
    with pytest.raises(ValueError):
        r_element(config, 1, 1, 2, 1, 1, 2)
    with pytest.raises(ValueError):
        r_element(config, 1, 1, 1, 2, 1, 2)
    with pytest.raises(ValueError):
        r_element(config, 1, 1, 2, 2, 1, 1)
    with pytest.raises(ValueError):
        t_element(config, 1, 1, 1, 2, 3, 1)
    with pytest.raises(IndexError):
        t_element(config, 1, 1, 2, 3, 3, 1)


# -- generators and the point assignment ------------------------------------------


def test_generator_list_matches_genus():
    for config in (cfg_a(), cfg_b(), cfg_c(), cfg_rel4(), cfg_big3()):
        gens = generator_list(config)
        assert len(gens) == config.genus()


def test_generator_list_frozen_small():
    assert generator_list(cfg_a()) == [t_element(cfg_a(), 1, 1, 2, 1, 3, 1)]
    assert generator_list(cfg_b()) == [r_element(cfg_b(), 1, 1, 2, 2, 1, 2)]
    config = cfg_c()
    assert generator_list(config) == [
        r_element(config, 1, 1, 2, 2, 1, 2),
        t_element(config, 1, 1, 2, 1, 3, 1),
        t_element(config, 1, 1, 2, 2, 3, 1),
        t_element(config, 1, 2, 2, 1, 3, 1),
    ]


def test_m_for_point_frozen():
    config = cfg_c()
    points = {p.key: p for p in config.special_set_S()}
    assert m_for_point(config, points[(1, 2, 2, 2)]) == \
        r_element(config, 1, 2, 1, 2, 2, 1)
    assert m_for_point(config, points[(2, 1, 3, 1)]) == \
        t_element(config, 1, 1, 2, 1, 3, 1)
    assert m_for_point(config, points[(2, 2, 3, 1)]) == \
        t_element(config, 1, 1, 2, 2, 3, 1)
    assert m_for_point(config, points[(1, 2, 3, 1)]) == \
        t_element(config, 1, 2, 2, 1, 3, 1) - t_element(config, 1, 1, 2, 1, 3, 1)


def test_m_for_point_rejects_outside_special_set():
    config = cfg_c()
    with pytest.raises(ValueError):
        m_for_point(config, config.intersection(1, 1, 2, 1))


# -- bilinear expansion ------------------------------------------------------------


def test_expand_four_lines():
    config = cfg_b()
    sym = K2Symbol.pair(_mono(config, [((1, 2), 1), ((1, 1), -1)]),
                        _mono(config, [((2, 2), 1), ((2, 1), -1)]))
    out = expand_bilinear(sym)
    assert dict(out.function_part) == {
        ("1,2", "2,2"): 1, ("1,2", "2,1"): -1,
        ("1,1", "2,2"): -1, ("1,1", "2,1"): 1,
    }
    assert out.constant_part.lines == ()
    assert out.constant_part.pairs == ()


def test_expand_scaled_difference_leaves_constant_term():
    config = cfg_b()
    f = _mono(config, [((1, 1), 1)])
    g = _mono(config, [((2, 1), 1)])
    scaled = K2Symbol.pair(_mono(config, [((1, 1), 1)], constant=3), g)
    out = expand_bilinear(scaled - K2Symbol.pair(f, g))
    assert out.function_part == ()
    assert out.constant_part.lines == (("2,1", ExactScalar(3)),)
    assert out.constant_part.pairs == ()


def test_expand_diagonal_gives_minus_one():
    config = cfg_b()
    f = _mono(config, [((1, 1), 1)])
    out = expand_bilinear(K2Symbol.pair(f, f))
    assert out.function_part == ()
    assert out.constant_part.lines == (("1,1", ExactScalar(-1)),)
    out2 = expand_bilinear(K2Symbol.pair(f ** 2, f))
    assert out2.is_trivial()


def test_expand_swap_negates_function_part():
    config = cfg_rel4()
    a = _mono(config, [((1, 1), 1), ((3, 1), -2)], constant=2)
    b = _mono(config, [((2, 2), 1), ((4, 1), 1)])
    fwd = dict(expand_bilinear(K2Symbol.pair(a, b)).function_part)
    rev = dict(expand_bilinear(K2Symbol.pair(b, a)).function_part)
    assert rev == {k: -v for k, v in fwd.items()}


_consts = st.sampled_from([1, 2, -1, Fraction(3, 2), -3])
_exps = st.integers(min_value=-2, max_value=2)


def _mono_strategy(config):
    reg = registry_for(config)
    ids = [reg.line_id(i, j) for i, j in config.line_ids()]
    return st.builds(
        lambda c, e: RationalMonomial(c, dict(zip(ids, e))),
        _consts, st.lists(_exps, min_size=len(ids), max_size=len(ids)))


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_expand_is_linear(data):
    config = cfg_rel4()
    monos = _mono_strategy(config)
    s1 = K2Symbol.pair(data.draw(monos), data.draw(monos))
    s2 = K2Symbol.pair(data.draw(monos), data.draw(monos))
    n = data.draw(st.integers(min_value=-3, max_value=3))
    assert expand_bilinear(s1 + n * s2) == \
        expand_bilinear(s1) + expand_bilinear(n * s2)


# -- determinant identity and Steinberg instances ----------------------------------


def test_det_identity_exhaustive():
    assert det_identity_check(cfg_rel4())


def test_formal_constant_canonicalization():
    c = FormalConstant.det_atom(3, 1)
    assert c.sign == -1 and c.atoms == {("det", 1, 3): 1}
    assert (c * c.inverse()).is_one()
    assert (FormalConstant.from_scalar(ExactScalar(-1))).canon() == (-1, ())
    d = FormalConstant.from_scalar(ExactScalar(Fraction(-2)))
    assert d.sign == -1 and ("s", ExactScalar(2)) in d.atoms


# -- relations ----------------------------------------------------------------------


def _relation_counts(config):
    return {rid: len(admissible_assignments(config, rid))
            for rid in ("i", "ii", "iii", "iv", "v", "vi", "vii")}


def test_admissible_assignment_counts_frozen():
    assert _relation_counts(cfg_rel4()) == {
        "i": 72, "ii": 8, "iii": 0, "iv": 16, "v": 16, "vi": 144, "vii": 96}
    assert _relation_counts(cfg_big3())["iii"] == 72


@pytest.mark.parametrize("rid", ["i", "ii", "iv", "v", "vi", "vii"])
def test_relations_hold_on_four_groups(rid):
    config = cfg_rel4()
    for assignment in admissible_assignments(config, rid):
        report = verify_relation(config, rid, assignment)
        assert report.passed, (rid, assignment, report.residue)


def test_relation_iii_holds_on_three_lines_per_group():
    config = cfg_big3()
    for assignment in admissible_assignments(config, "iii"):
        report = verify_relation(config, "iii", assignment)
        assert report.passed, (assignment, report.residue)


def test_relation_vii_needs_steinberg():
    config = cfg_rel4()
    assignment = dict(i=1, j=1, k=2, l=1, m=3, n=1, p=4, q=1)
    report = verify_relation(config, "vii", assignment)
    assert report.passed
    assert report.steinberg_uses >= 1


def test_t_element_alternating():
    config = cfg_rel4()
    base_pairs = ((1, 1), (2, 1), (3, 1))
    base = t_element(config, 1, 1, 2, 1, 3, 1)
    base_fp = dict(expand_bilinear(base).function_part)
    perms = [((0, 1, 2), 1), ((1, 0, 2), -1), ((0, 2, 1), -1),
             ((2, 1, 0), -1), ((1, 2, 0), 1), ((2, 0, 1), 1)]
    for order, sign in perms:
        pairs = [base_pairs[o] for o in order]
        sym = t_element(config, *pairs[0], *pairs[1], *pairs[2])
        fp = dict(expand_bilinear(sym).function_part)
        assert fp == {k: sign * v for k, v in base_fp.items()}
        report = verify_symbol_is_trivial(config, sym - sign * base)
        assert report.passed, (order, report.residue)


def test_corrupted_constant_fails():
    config = cfg_rel4()
    (lhs, rhs), = relation_sides(
        config, "vii", dict(i=1, j=1, k=2, l=1, m=3, n=1, p=4, q=1))
    left, right, _ = lhs.terms[0]
    bad = K2Symbol.pair(left * RationalMonomial(2, {}), right)
    report = verify_symbol_is_trivial(config, bad - rhs)
    assert not report.passed
    assert not report.constant_lines_trivial


def test_relation_preconditions():
    config = cfg_rel4()
    with pytest.raises(ValueError):
        verify_relation(config, "vii", dict(i=1, j=1, k=2, l=1, m=3, n=1, p=1, q=1))
    with pytest.raises(ValueError):
        verify_relation(config, "iii", dict(i=1, j=1, k=2, l=2, m=1, n=2, p=1, q=3))
    with pytest.raises(ValueError):
        verify_relation(config, "viii", dict(i=1, j=1, k=2, l=1, m=3, n=1))
    with pytest.raises(ValueError):
        relation_sides(config, "iv", dict(i=1, j=1, k=2, l=2, m=1, n=2, p=1, q=1))


# -- serialization -------------------------------------------------------------------


def test_symbol_json_round_trip():
    config = cfg_c()
    reg = registry_for(config)
    for sym in generator_list(config):
        data = sym.to_json()
        back = K2Symbol.from_json(data, reg)
        assert back.to_json() == data
    r = r_element(config, 1, 1, 2, 2, 1, 2)
    assert K2Symbol.from_json(r.to_json(), reg) == r


def test_symbol_json_frozen_shape():
    config = cfg_b()
    data = r_element(config, 1, 1, 2, 2, 1, 2).to_json()
    assert data == [{
        "left": {"constant": "1", "factors": {"1,1": 1, "1,2": -1}},
        "right": {"constant": "1", "factors": {"2,1": 1, "2,2": -1}},
        "coeff": 1,
    }]


def test_symbol_json_unknown_id_rejected():
    config = cfg_b()
    reg = registry_for(config)
    with pytest.raises(ValueError):
        K2Symbol.from_json(
            [{"left": {"constant": "1", "factors": {"9,9": 1}},
              "right": {"constant": "1", "factors": {"1,1": 1}},
              "coeff": 1}], reg)


def test_symbol_arithmetic_merges_terms():
    config = cfg_b()
    r = r_element(config, 1, 1, 2, 2, 1, 2)
    assert (r + r).terms[0][2] == 2
    assert (r - r).is_zero()
    assert (3 * r).terms[0][2] == 3
    assert (-r).terms[0][2] == -1
