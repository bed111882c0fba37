import itertools
from fractions import Fraction as F

import pytest
from hypothesis import assume, given, strategies as st

from voa_fusion.lattice import LatticeError
from voa_fusion.m1_fusion import (
    M_MINUS, M_PLUS, MT_MINUS, MT_PLUS, DegenerateForm, NotBlockDiagonal, admissible,
    best_split_bound, bilinear_space, contragredient_m1, decompose_check, decompose_bound,
    fuse_m1, fusion_rule_m1, momentum, parse_m1,
)

TAGS = [M_PLUS, M_MINUS, MT_PLUS, MT_MINUS]
S1 = bilinear_space([[2]])


def test_admissible_examples():
    lam, mu = (F(1, 3), F(1)), (F(1, 2), F(-2))
    assert admissible(lam, mu, tuple(a + b for a, b in zip(lam, mu)))
    assert admissible((0, 0), (0, 0), (0, 0))
    assert admissible((1, 0), (0, 1), (1, 1))
    assert not admissible((1, 0), (0, 1), (2, 0))
    with pytest.raises(LatticeError):
        admissible((1,), (1, 0), (1, 0))


def test_rule_examples():
    lam = momentum([F(2, 5)])
    assert fusion_rule_m1(S1, M_MINUS, M_MINUS, M_PLUS) == 1
    assert fusion_rule_m1(S1, M_PLUS, M_PLUS, M_MINUS) == 0
    assert fusion_rule_m1(S1, lam, lam, M_MINUS) == 1
    assert fusion_rule_m1(S1, lam, MT_PLUS, MT_MINUS) == 1


def test_fuse_examples():
    lam, mu = momentum([F(1, 2)]), momentum([F(1, 3)])
    assert set(fuse_m1(S1, lam, mu).finite) == {momentum([F(5, 6)]), momentum([F(1, 6)])}
    assert set(fuse_m1(S1, lam, lam).finite) == {momentum([1]), M_PLUS, M_MINUS}
    sup = fuse_m1(S1, MT_PLUS, MT_PLUS)
    assert sup.finite == (M_PLUS,) and sup.momentum_family
    assert "all l != 0" in str(sup)


def test_contragredient_m1():
    for m in (M_PLUS, momentum([F(1, 2)]), MT_MINUS):
        assert contragredient_m1(m) == m


def test_momentum_normalisation_and_parse():
    assert momentum([F(1, 2), -1]) == momentum([F(-1, 2), 1])
    assert momentum([F(1, 2)]).momentum == (F(-1, 2),)
    assert parse_m1("M(1/2,-1)", 2) == momentum([F(1, 2), -1])
    assert parse_m1("Mt-") == MT_MINUS
    for bad in ("M(0)", "M(1/2", "N+", "M(1,2)"):
        with pytest.raises(LatticeError):
            parse_m1(bad, 1)


def test_bad_forms():
    with pytest.raises(DegenerateForm):
        bilinear_space([[1, 1], [1, 1]])
    with pytest.raises(LatticeError):
        bilinear_space([[1, 2], [0, 1]])


def test_decompose_examples():
    S = bilinear_space([[2, 0], [0, 2]])
    assert decompose_check(S, M_MINUS, M_MINUS, M_PLUS, 1)
    assert decompose_bound(S, M_MINUS, M_MINUS, M_PLUS, 1) == 1
    assert decompose_check(S, M_PLUS, M_PLUS, M_PLUS, 1)
    lam, mu = momentum([F(1, 2), F(1, 3)]), momentum([F(1, 5), F(-2, 7)])
    nu = momentum([a + b for a, b in zip(lam.momentum, mu.momentum)])
    assert decompose_check(S, lam, mu, nu, 1)
    with pytest.raises(NotBlockDiagonal):
        decompose_check(bilinear_space([[2, 1], [1, 2]]), M_PLUS, M_PLUS, M_PLUS, 1)


def test_fixed_split_is_only_an_upper_bound():
    # with the split h = e1 + e2 the bound is 1 although the rule is 0;
    # the rotated split along (1, 1) is tight
    S = bilinear_space([[2, 0], [0, 2]])
    a, b, c = momentum([1, 1]), momentum([1, -1]), momentum([2, 2])
    assert fusion_rule_m1(S, a, b, c) == 0
    assert decompose_bound(S, a, b, c, 1) == 1
    assert best_split_bound(S, a, b, c)[0] == 0


# properties

rat = st.fractions(min_value=-2, max_value=2, max_denominator=6)


def vectors(d):
    return st.lists(rat, min_size=d, max_size=d).map(tuple)


@st.composite
def m1_modules(draw, d):
    if draw(st.booleans()):
        return draw(st.sampled_from(TAGS))
    x = draw(vectors(d))
    assume(any(x))
    return momentum(x)


@st.composite
def forms(draw, d, diagonal=False):
    rows = [[F(0)] * d for _ in range(d)]
    for i in range(d):
        rows[i][i] = draw(st.sampled_from([F(1), F(2), F(3, 2), F(4)]))
        for j in range(i + 1, d):
            if not diagonal:
                rows[i][j] = rows[j][i] = draw(st.sampled_from([F(0), F(1, 2), F(-1, 2), F(1, 3)]))
    return bilinear_space(rows)


@st.composite
def triples(draw, d):
    """Module triples biased towards nonzero rules: often nu = +-lambda +- mu."""
    a, b = draw(m1_modules(d)), draw(m1_modules(d))
    if a.momentum and b.momentum and draw(st.booleans()):
        s, t = draw(st.sampled_from([1, -1])), draw(st.sampled_from([1, -1]))
        x = tuple(s * p + t * r for p, r in zip(a.momentum, b.momentum))
        c = momentum(x) if any(x) else draw(st.sampled_from([M_PLUS, M_MINUS]))
    else:
        c = draw(m1_modules(d))
    return a, b, c


@given(st.integers(1, 3).flatmap(lambda d: st.tuples(forms(d), triples(d))))
def test_s3_symmetry_and_zero_one(data):
    S, (a, b, c) = data
    n = fusion_rule_m1(S, a, b, c)
    assert n in (0, 1)
    for p in itertools.permutations((a, b, c)):
        assert fusion_rule_m1(S, *p) == n
    neg = lambda m: momentum([-x for x in m.momentum]) if m.momentum else m
    assert fusion_rule_m1(S, neg(a), b, c) == n


@given(st.integers(1, 3).flatmap(lambda d: st.tuples(forms(d), m1_modules(d))))
def test_unit(data):
    S, m = data
    assert fuse_m1(S, M_PLUS, m).finite == (m,)


@given(st.integers(2, 3).flatmap(lambda d: st.tuples(forms(d, diagonal=True), triples(d),
                                                     st.integers(1, d - 1))))
def test_decompose_inequality(data):
    S, (a, b, c), k = data
    assert decompose_check(S, a, b, c, k)


@given(st.integers(2, 3).flatmap(lambda d: st.tuples(forms(d), triples(d))))
def test_some_split_is_tight(data):
    S, (a, b, c) = data
    best, _ = best_split_bound(S, a, b, c)
    assert best == fusion_rule_m1(S, a, b, c)
