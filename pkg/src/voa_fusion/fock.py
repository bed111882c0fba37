"""Truncated Heisenberg Fock-space computations.

Vectors are polynomials in creation modes e_i(-n) for a basis e_i of h with
Gram matrix B; ``[e_i(m), e_j(n)] = m B_ij delta_{m+n,0}``.  Modes and
z-exponents are stored doubled so that half-integers stay integral: the
monomial ``((0, 1), (0, 1), (1, 3))`` is e_0(-1/2)^2 e_1(-3/2).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Iterable, Mapping, Sequence

from .lattice import format_rational, inverse, vec
from .m1_fusion import BilinearSpace

Monomial = tuple[tuple[int, int], ...]
FockVector = dict[Monomial, Fraction]
Series = dict[int, FockVector]

VACUUM: Monomial = ()


class CutoffTooSmall(ValueError):
    pass


# vectors

def fv(terms: Mapping[Monomial, object] | None = None) -> FockVector:
    out: FockVector = {}
    for m, c in (terms or {}).items():
        c = Fraction(c)
        if c:
            out[tuple(sorted(m))] = out.get(tuple(sorted(m)), Fraction(0)) + c
    return {m: c for m, c in out.items() if c}


def vacuum() -> FockVector:
    return {VACUUM: Fraction(1)}


def _acc(out: FockVector, m: Monomial, c: Fraction) -> None:
    v = out.get(m, Fraction(0)) + c
    if v:
        out[m] = v
    else:
        out.pop(m, None)


def fv_add(*vs: FockVector) -> FockVector:
    out: FockVector = {}
    for v in vs:
        for m, c in v.items():
            _acc(out, m, c)
    return out


def fv_scale(k, v: FockVector) -> FockVector:
    k = Fraction(k)
    return {m: k * c for m, c in v.items()} if k else {}


def weight2(m: Monomial) -> int:
    """Doubled weight sum(n) of a monomial."""
    return sum(n2 for _, n2 in m)


def create(beta: Sequence, n2: int, v: FockVector) -> FockVector:
    """beta(-n) v for n = n2/2 > 0, beta given in basis coordinates."""
    out: FockVector = {}
    for i, b in enumerate(beta):
        if not b:
            continue
        for m, c in v.items():
            _acc(out, tuple(sorted(m + ((i, n2),))), c * b)
    return out


def annihilate(S: BilinearSpace, beta: Sequence, n2: int, v: FockVector) -> FockVector:
    """beta(n) v for n = n2/2 > 0: a derivation with beta(n) e_j(-n) = n (beta, e_j)."""
    pair = [sum((Fraction(beta[i]) * S.form[i][j] for i in range(S.dim)), Fraction(0))
            for j in range(S.dim)]
    n = Fraction(n2, 2)
    out: FockVector = {}
    for m, c in v.items():
        seen = set()
        for pos, (j, k2) in enumerate(m):
            if k2 != n2 or not pair[j] or (j, k2) in seen:
                continue
            seen.add((j, k2))
            mult = sum(1 for t in m if t == (j, k2))
            rest = m[:pos] + m[pos + 1:]
            _acc(out, rest, c * n * pair[j] * mult)
    return out


def s_add(a: Series, b: Series) -> Series:
    out = {k: dict(v) for k, v in a.items()}
    for k, v in b.items():
        out[k] = fv_add(out.get(k, {}), v)
    return {k: v for k, v in out.items() if v}


def s_shift(s: Series, k2: int, scalar=1) -> Series:
    return {k + k2: fv_scale(scalar, v) for k, v in s.items() if scalar}


def s_truncate(s: Series, cutoff2: int) -> Series:
    return {k: v for k, v in s.items() if k <= cutoff2 and v}


def s_min(s: Series) -> int:
    return min(s) if s else 0


# delta coefficients

class BivariateSeries:
    """Truncated power series in x, y with exact rational coefficients."""

    def __init__(self, coeffs: Mapping[tuple[int, int], Fraction], order: int):
        self.order = order
        self.c = {k: Fraction(v) for k, v in coeffs.items() if v and k[0] + k[1] <= order}

    def __add__(self, o: "BivariateSeries") -> "BivariateSeries":
        out = dict(self.c)
        for k, v in o.c.items():
            out[k] = out.get(k, Fraction(0)) + v
        return BivariateSeries(out, min(self.order, o.order))

    def scale(self, k) -> "BivariateSeries":
        return BivariateSeries({t: Fraction(k) * v for t, v in self.c.items()}, self.order)

    def __mul__(self, o: "BivariateSeries") -> "BivariateSeries":
        order = min(self.order, o.order)
        out: dict[tuple[int, int], Fraction] = {}
        for (a, b), u in self.c.items():
            for (p, q), w in o.c.items():
                if a + b + p + q <= order:
                    out[a + p, b + q] = out.get((a + p, b + q), Fraction(0)) + u * w
        return BivariateSeries(out, order)

    def __getitem__(self, k: tuple[int, int]) -> Fraction:
        return self.c.get(k, Fraction(0))


def _binom(r: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= (r - i) / (i + 1)
    return out


def delta_coeffs(cutoff: int) -> dict[tuple[int, int], Fraction]:
    """c_mn with sum c_mn x^m y^n = -log(((1+x)^{1/2} + (1+y)^{1/2}) / 2), m + n <= cutoff."""
    if cutoff < 0:
        raise ValueError("cutoff must be non-negative")
    half = Fraction(1, 2)
    sx = BivariateSeries({(k, 0): _binom(half, k) for k in range(cutoff + 1)}, cutoff)
    sy = BivariateSeries({(0, k): _binom(half, k) for k in range(cutoff + 1)}, cutoff)
    # (sx + sy)/2 = 1 + w with w(0,0) = 0
    w = (sx + sy).scale(half)
    w.c.pop((0, 0), None)
    # -log(1 + w) = sum_{k>=1} (-1)^k w^k / k
    total = BivariateSeries({}, cutoff)
    power = BivariateSeries({(0, 0): 1}, cutoff)
    for k in range(1, cutoff + 1):
        power = power * w
        total = total + power.scale(Fraction((-1) ** k, k))
    return {(m, n): total[m, n] for m in range(cutoff + 1) for n in range(cutoff + 1 - m)}


# untwisted M(1, lambda) side

def lattice_pair(S: BilinearSpace, x: Sequence, y: Sequence) -> Fraction:
    return S.pair(x, y)


def untwisted_annihilate(S: BilinearSpace, lam: Sequence, i: int, n: int, v: FockVector) -> FockVector:
    """e_i(n) on M(1, lam) for n >= 0; e_i(0) acts by (e_i, lam)."""
    e = [Fraction(int(j == i)) for j in range(S.dim)]
    if n == 0:
        return fv_scale(S.pair(e, lam), v)
    return annihilate(S, e, 2 * n, v)


def apply_delta_exp(S: BilinearSpace, lam: Sequence, u: FockVector, sign: int = -1) -> Series:
    """e^{Delta_z} u as {doubled z-power: vector}.

    Delta_z = sum c_mn sum_i h_i(m) h_i(n) z^{sign (m+n)} over an orthonormal
    basis, written here with the inverse Gram matrix so no square roots appear.
    """
    if not u:
        return {}
    wmax = max(weight2(m) for m in u) // 2
    c = delta_coeffs(wmax)
    Binv = inverse(S.form)
    d = S.dim

    def delta(v: FockVector) -> Series:
        out: Series = {}
        for (m, n), cmn in c.items():
            if not cmn or m + n == 0:
                continue
            acc: FockVector = {}
            for a in range(d):
                for b in range(d):
                    if not Binv[a][b]:
                        continue
                    w = untwisted_annihilate(S, lam, b, n, v)
                    if w:
                        w = untwisted_annihilate(S, lam, a, m, w)
                    acc = fv_add(acc, fv_scale(cmn * Binv[a][b], w))
            if acc:
                k2 = 2 * sign * (m + n)
                out[k2] = fv_add(out.get(k2, {}), acc)
        return out

    total: Series = {0: dict(u)}
    term: Series = {0: dict(u)}
    k = 0
    while term:
        k += 1
        nxt: Series = {}
        for p, v in term.items():
            for q, w in delta(v).items():
                nxt[p + q] = fv_add(nxt.get(p + q, {}), fv_scale(Fraction(1, k), w))
        term = {p: v for p, v in nxt.items() if v}
        total = s_add(total, term)
    return total


def l_minus_one(S: BilinearSpace, lam: Sequence, u: FockVector) -> FockVector:
    """L(-1) on M(1, lam): e_i(-n) -> n e_i(-n-1) as a derivation, e^lam -> lam(-1) e^lam."""
    out: FockVector = {}
    for m, c in u.items():
        for pos, (i, n2) in enumerate(m):
            new = tuple(sorted(m[:pos] + ((i, n2 + 2),) + m[pos + 1:]))
            _acc(out, new, c * Fraction(n2, 2))
    return fv_add(out, create(lam, 2, u))


# twisted operator

@dataclass
class TruncatedSeries:
    """sum_k terms[k] z^{k/2}, times prefactor 2^{-scalar_exponent} z^{z_exponent}.

    Only exponents k <= cutoff2 are meaningful.
    """

    terms: Series
    cutoff2: int
    z_exponent: Fraction
    scalar_exponent: Fraction = Fraction(0)

    def coefficient(self, k2: int) -> FockVector:
        if k2 > self.cutoff2:
            raise CutoffTooSmall(f"exponent {k2}/2 beyond computed order {self.cutoff2}/2")
        return self.terms.get(k2, {})

    def derivative(self) -> "TruncatedSeries":
        """d/dz including the prefactor z-power, which is kept factored out."""
        out: Series = {}
        for k2, v in self.terms.items():
            f = Fraction(k2, 2) + self.z_exponent
            if f:
                out[k2 - 2] = fv_scale(f, v)
        return TruncatedSeries({k: v for k, v in out.items() if v}, self.cutoff2 - 2,
                               self.z_exponent, self.scalar_exponent)


def _apply_exp(gen: list[tuple[int, FockVector]], s: Series, op, cutoff2: int) -> Series:
    """exp(sum_j X_j z^{k_j}) applied to s, where op(j, v) applies X_j to v."""
    total = dict(s)
    term = dict(s)
    k = 0
    while term:
        k += 1
        nxt: Series = {}
        for p, v in term.items():
            for j, (k2, _) in enumerate(gen):
                if p + k2 > cutoff2 and k2 >= 0:
                    continue
                w = op(j, v)
                if w:
                    nxt[p + k2] = fv_add(nxt.get(p + k2, {}), fv_scale(Fraction(1, k), w))
        term = {p: v for p, v in nxt.items() if v}
        total = s_add(total, term)
    return s_truncate(total, cutoff2) if all(k2 >= 0 for k2, _ in gen) else total


def _twisted_monomial(S: BilinearSpace, lam: Sequence, factors: Sequence[tuple[int, int]],
                      v: FockVector, cutoff2: int) -> Series:
    """W(e_{i1}(-n1) ... e_{ir}(-nr) e^lam, z) v without the prefactor."""
    d = S.dim
    basis = [[Fraction(int(j == i)) for j in range(d)] for i in range(d)]
    wmax = max((weight2(m) for m in v), default=0)
    out: Series = {}
    for subset in itertools.product((False, True), repeat=len(factors)):
        # annihilation parts: E^+ and the chosen derivative fields
        ann_modes = [k2 for k2 in range(1, wmax + 1, 2)]
        s: Series = {0: dict(v)}
        # E^+ = exp(-sum lam(n)/n z^{-n})
        gen = [(-k2, None) for k2 in ann_modes]
        s = _apply_exp(gen, s, lambda j, w: fv_scale(Fraction(-2, ann_modes[j]),
                                                     annihilate(S, lam, ann_modes[j], w)), 10 ** 9)
        for (i, n), is_ann in zip(factors, subset):
            if not is_ann:
                continue
            nxt: Series = {}
            for p, w in s.items():
                for m2 in range(1, max((weight2(t) for t in w), default=0) + 1, 2):
                    coeff = _binom(Fraction(-m2, 2) - 1, n - 1)
                    if not coeff:
                        continue
                    x = annihilate(S, basis[i], m2, w)
                    if x:
                        k2 = -m2 - 2 * n
                        nxt[p + k2] = fv_add(nxt.get(p + k2, {}), fv_scale(coeff, x))
            s = {p: w for p, w in nxt.items() if w}
        if not s:
            continue
        creators = [(i, n) for (i, n), is_ann in zip(factors, subset) if not is_ann]
        base = s_min(s) + sum(1 - 2 * n for _, n in creators)
        room = cutoff2 - base
        for i, n in creators:
            nxt = {}
            for p, w in s.items():
                for j2 in range(1, room + 2 * n + 1, 2):
                    coeff = _binom(Fraction(j2, 2) - 1, n - 1)
                    k2 = j2 - 2 * n
                    if not coeff:
                        continue
                    nxt[p + k2] = fv_add(nxt.get(p + k2, {}), fv_scale(coeff, create(basis[i], j2, w)))
            s = {p: w for p, w in nxt.items() if w}
        # E^- = exp(sum lam(-n)/n z^n)
        cre = [k2 for k2 in range(1, max(room, 0) + 1, 2)]
        s = _apply_exp([(k2, None) for k2 in cre], s,
                       lambda j, w: fv_scale(Fraction(2, cre[j]), create(lam, cre[j], w)), cutoff2)
        out = s_add(out, s_truncate(s, cutoff2))
    return out


def twisted_vertex(S: BilinearSpace, lam: Sequence, target: FockVector, power_cutoff2: int,
                   u: FockVector | None = None, delta_sign: int = -1) -> TruncatedSeries:
    """Y^tw_lam(u, z) target, u in M(1, lam) (default e^lam), truncated at z^{power_cutoff2/2}.

    Delta_z carries z^{-(m+n)} (delta_sign=-1), the convention under which the
    L(-1)-derivative property holds; delta_sign=+1 is kept for comparison.
    """
    lam = vec(lam)
    u = vacuum() if u is None else u
    target = fv(target)
    dressed = apply_delta_exp(S, lam, u, delta_sign)
    out: Series = {}
    for zp, w in dressed.items():
        for mono, c in w.items():
            factors = [(i, n2 // 2) for i, n2 in mono]
            part = _twisted_monomial(S, lam, factors, target, power_cutoff2 - zp)
            out = s_add(out, s_shift(part, zp, c))
    nrm = S.pair(lam, lam)
    return TruncatedSeries(s_truncate(out, power_cutoff2), power_cutoff2, -nrm / 2, nrm)


def untwisted_vertex(S: BilinearSpace, lam: Sequence, mu: Sequence, cutoff: int,
                     target: FockVector | None = None) -> TruncatedSeries:
    """Y_{lam,mu}(e^lam, z) (target e^mu), coefficients in M(1, lam + mu).

    The prefactor z^{(lam, mu)} is kept symbolic; cutoff is an integer power.
    """
    lam, mu = vec(lam), vec(mu)
    v = vacuum() if target is None else fv(target)
    wmax = max((weight2(m) for m in v), default=0)
    ann = [k2 for k2 in range(2, wmax + 1, 2)]
    s = _apply_exp([(-k2, None) for k2 in ann], {0: dict(v)},
                   lambda j, w: fv_scale(Fraction(-2, ann[j]), annihilate(S, lam, ann[j], w)), 10 ** 9)
    cutoff2 = 2 * cutoff
    room = cutoff2 - s_min(s)
    cre = [k2 for k2 in range(2, room + 1, 2)]
    s = _apply_exp([(k2, None) for k2 in cre], s,
                   lambda j, w: fv_scale(Fraction(2, cre[j]), create(lam, cre[j], w)), cutoff2)
    return TruncatedSeries(s_truncate(s, cutoff2), cutoff2, S.pair(lam, mu))


# comparison with the closed displays

def lam_power(lam: Sequence, n2: int, k: int) -> FockVector:
    v = vacuum()
    for _ in range(k):
        v = create(lam, n2, v)
    return v


def display_vacuum(S: BilinearSpace, lam: Sequence) -> tuple[Series, int]:
    """Expected Y^tw(e^lam, z)1 modulo z^1: 1 + lam(-1/2) z^{1/2}."""
    return {0: vacuum(), 1: lam_power(lam, 1, 1)}, 1


def display_lambda(S: BilinearSpace, lam: Sequence) -> tuple[Series, int]:
    """Expected Y^tw(e^lam, z) lam(-1/2) modulo z^2."""
    n = S.pair(lam, lam)
    a1 = lam_power(lam, 1, 1)
    return {
        -1: fv_scale(-n, vacuum()),
        0: fv_scale(1 - 2 * n, a1),
        1: fv_scale(2 * (1 - 2 * n), lam_power(lam, 1, 2)),
        2: fv_add(fv_scale(4, lam_power(lam, 1, 3)), fv_scale(Fraction(-2, 3), create(lam, 3, vacuum()))),
    }, 3


def format_fock(v: FockVector, lam: Sequence | None = None) -> str:
    if not v:
        return "0"
    parts = []
    for m, c in sorted(v.items()):
        mono = "*".join(f"e{i}(-{format_rational(Fraction(n2, 2))})" for i, n2 in m) or "1"
        parts.append(f"{format_rational(c)}*{mono}")
    return " + ".join(parts)


@dataclass
class TermCheck:
    name: str
    exponent: str
    expected: str
    actual: str
    passed: bool

    def as_dict(self) -> dict:
        return {"name": self.name, "exponent": self.exponent, "expected": self.expected,
                "actual": self.actual, "pass": self.passed}


def _compare(name: str, series: TruncatedSeries, expected: Series, top2: int) -> list[TermCheck]:
    out = []
    low = min(min(expected), s_min(series.terms))
    for k2 in range(low, top2 + 1):
        exp_v = expected.get(k2, {})
        act = series.coefficient(k2)
        out.append(TermCheck(name, format_rational(Fraction(k2, 2)), format_fock(exp_v),
                             format_fock(act), fv_add(exp_v, fv_scale(-1, act)) == {}))
    return out


def derivative_checks(S: BilinearSpace, lam: Sequence, u: FockVector, target: FockVector,
                      cutoff2: int, name: str = "L(-1) derivative") -> list[TermCheck]:
    lam = vec(lam)
    lhs = twisted_vertex(S, lam, target, cutoff2, u).derivative()
    rhs = twisted_vertex(S, lam, target, cutoff2 - 2, l_minus_one(S, lam, u))
    out = []
    low = min(s_min(lhs.terms), s_min(rhs.terms))
    for k2 in range(low, cutoff2 - 1):
        a, b = lhs.coefficient(k2), rhs.coefficient(k2)
        out.append(TermCheck(name, format_rational(Fraction(k2, 2)), format_fock(a), format_fock(b),
                             fv_add(a, fv_scale(-1, b)) == {}))
    return out


def verify_expansions(S: BilinearSpace, lam: Sequence, derivative_cutoff2: int = 4) -> list[TermCheck]:
    """Compare the engine with both closed displays and check the derivative property."""
    lam = vec(lam)
    checks = []
    exp1, top1 = display_vacuum(S, lam)
    checks += _compare("vacuum display", twisted_vertex(S, lam, vacuum(), top1), exp1, top1)
    exp2, top2 = display_lambda(S, lam)
    target = lam_power(lam, 1, 1)
    if target:
        checks += _compare("lambda(-1/2) display", twisted_vertex(S, lam, target, top2), exp2, top2)
    checks += derivative_checks(S, lam, vacuum(), vacuum(), derivative_cutoff2)
    return checks
