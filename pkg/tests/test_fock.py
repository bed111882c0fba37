from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from oracles import sympy_delta
from voa_fusion.fock import (
    CutoffTooSmall, create, delta_coeffs, derivative_checks, fv_add, fv_scale, l_minus_one,
    lam_power, twisted_vertex, untwisted_vertex, vacuum, verify_expansions, weight2,
)
from voa_fusion.m1_fusion import bilinear_space

A1 = bilinear_space([[2]])
A2 = bilinear_space([[2, -1], [-1, 2]])


@pytest.fixture(scope="module")
def oracle4():
    return sympy_delta(4)


def test_delta_matches_sympy(oracle4):
    assert delta_coeffs(4) == oracle4


def test_delta_values():
    c = delta_coeffs(3)
    assert c[0, 0] == 0
    assert c[1, 0] == c[0, 1] == F(-1, 4)
    assert c[1, 1] == F(1, 16)
    assert all(c[m, n] == c[n, m] for m, n in c)
    with pytest.raises(ValueError):
        delta_coeffs(-1)


def test_delta_symmetric_high_order():
    c = delta_coeffs(8)
    assert all(c[m, n] == c[n, m] for m, n in c)


def test_zero_momentum_is_identity():
    s = twisted_vertex(A1, [0], vacuum(), 6)
    assert s.terms == {0: vacuum()}
    assert s.z_exponent == 0 and s.scalar_exponent == 0


def _expected_on_a(lam, n):
    """E^- E^+ lam(-1/2), expanded by hand, as {doubled exponent: vector}."""
    a1, a2, a3 = (lam_power(lam, 1, k) for k in (1, 2, 3))
    b = create(lam, 3, vacuum())
    return {
        -1: fv_scale(-n, vacuum()),
        0: fv_scale(1 - 2 * n, a1),
        1: fv_scale(2 * (1 - n), a2),
        2: fv_add(fv_scale(2 - F(4, 3) * n, a3), fv_scale(-F(2, 3) * n, b)),
    }


@pytest.mark.parametrize("S, lam", [(A1, [F(1, 2)]), (A1, [1]), (A2, [F(1, 3), F(2, 3)]),
                                    (bilinear_space([[1]]), [1])])
def test_twisted_vertex_low_orders(S, lam):
    n = S.pair(lam, lam)
    vac = twisted_vertex(S, lam, vacuum(), 1)
    assert vac.terms == {0: vacuum(), 1: fv_scale(2, lam_power(lam, 1, 1))}
    assert vac.z_exponent == -n / 2 and vac.scalar_exponent == n
    got = twisted_vertex(S, lam, lam_power(lam, 1, 1), 2)
    exp = _expected_on_a(lam, n)
    for k in range(-1, 3):
        assert got.coefficient(k) == {m: c for m, c in exp[k].items() if c}, k


def test_cutoff_guard():
    s = twisted_vertex(A1, [F(1, 2)], vacuum(), 2)
    with pytest.raises(CutoffTooSmall):
        s.coefficient(3)


def test_untwisted_vertex():
    lam, mu = [1], [F(1, 2)]
    s = untwisted_vertex(A1, lam, mu, 3)
    assert s.z_exponent == 1
    assert s.coefficient(0) == vacuum()
    assert s.coefficient(2) == create(lam, 2, vacuum())
    assert untwisted_vertex(A1, [0], mu, 3).terms == {0: vacuum()}
    target = create([1], 2, vacuum())
    assert untwisted_vertex(A1, [0], mu, 3, target).terms == {0: target}


def test_delta_sign_convention():
    """Only z^{-(m+n)} in Delta_z makes Y(L(-1)u, z) = d/dz Y(u, z)."""
    S, lam = A2, [F(1, 3), F(1, 3)]
    u = create([1, 0], 2, vacuum())
    lhs = twisted_vertex(S, lam, vacuum(), 4, u, delta_sign=1).derivative()
    rhs = twisted_vertex(S, lam, vacuum(), 2, l_minus_one(S, lam, u), delta_sign=1)
    assert any(lhs.coefficient(k) != rhs.coefficient(k) for k in range(-6, 3))
    assert all(c.passed for c in derivative_checks(S, lam, u, vacuum(), 4))


def test_verify_expansions_report_shape():
    report = verify_expansions(A1, [F(1, 2)])
    assert {t.name for t in report} == {"vacuum display", "lambda(-1/2) display", "L(-1) derivative"}
    assert all(t.passed for t in report if t.name == "L(-1) derivative")
    assert all(t.passed for t in verify_expansions(A1, [0]))


# properties

small = st.fractions(min_value=-1, max_value=1, max_denominator=3)


@st.composite
def fock_vectors(draw, dim, max_terms=2, max_mode2=3, parity=1):
    v = {}
    for _ in range(draw(st.integers(1, max_terms))):
        k = draw(st.integers(0, 2))
        mono = tuple(sorted((draw(st.integers(0, dim - 1)),
                             draw(st.sampled_from([m for m in range(1, max_mode2 + 1) if m % 2 == parity])))
                            for _ in range(k)))
        v[mono] = v.get(mono, 0) + draw(st.integers(-2, 2).filter(bool))
    return {m: F(c) for m, c in v.items() if c}


@settings(max_examples=20)
@given(st.lists(small, min_size=2, max_size=2), fock_vectors(2, max_terms=1))
def test_grading(lam, target):
    """Coefficient weight minus exponent equals the weight of a homogeneous target."""
    (w,) = {weight2(m) for m in target}
    s = twisted_vertex(A2, lam, target, 3)
    assert {weight2(m) - k for k, v in s.terms.items() for m in v} <= {w}


@settings(max_examples=15)
@given(st.lists(small, min_size=2, max_size=2), fock_vectors(2), fock_vectors(2), st.integers(-2, 2))
def test_linearity(lam, v, w, k):
    comb = fv_add(v, fv_scale(k, w))
    lhs = twisted_vertex(A2, lam, comb, 2)
    a, b = twisted_vertex(A2, lam, v, 2), twisted_vertex(A2, lam, w, 2)
    for e in range(-8, 3):
        assert lhs.coefficient(e) == fv_add(a.coefficient(e), fv_scale(k, b.coefficient(e)))


@settings(max_examples=10)
@given(st.lists(small, min_size=2, max_size=2), fock_vectors(2, max_terms=1, max_mode2=4, parity=0),
       fock_vectors(2, max_terms=1))
def test_derivative_property(lam, u, target):
    assert all(c.passed for c in derivative_checks(A2, lam, u, target, 3))
