"""Independent reference implementations used to cross-check the library."""

from __future__ import annotations

import itertools
from fractions import Fraction

import sympy

from voa_fusion.cocycle import pi_sign
from voa_fusion.lattice import (
    Lattice, add, canonical_coset, canonical_pm_coset, frac_part, in_lattice, is_two_torsion,
    pairing, scale, vec,
)
from voa_fusion.twisted import c_chi, twist_character
from voa_fusion.vl_fusion import FusionContext, IrreducibleModule


# discriminant group by brute force

def brute_cosets(L: Lattice) -> set:
    """All x = G^-1 m mod L, found by sweeping m over a box of side det."""
    B = L.dual_gram
    d, det = L.rank, L.det
    out = set()
    for m in itertools.product(range(det), repeat=d):
        x = tuple(frac_part(sum((B[i][j] * m[j] for j in range(d)), Fraction(0))) for i in range(d))
        out.add(x)
    return out


def order_profile(L: Lattice, cosets) -> dict[int, int]:
    """Number of elements of each order in L^o/L."""
    prof: dict[int, int] = {}
    for x in cosets:
        k = 1
        while not in_lattice(L, scale(k, x)):
            k += 1
        prof[k] = prof.get(k, 0) + 1
    return prof


def profile_from_divisors(divisors) -> dict[int, int]:
    groups = [range(d) for d in divisors] or [range(1)]
    prof: dict[int, int] = {}
    for elt in itertools.product(*groups):
        k = 1
        while any((k * e) % d for e, d in zip(elt, divisors)):
            k += 1
        prof[k] = prof.get(k, 0) + 1
    return prof


# smallest admissible q, searched directly

def brute_min_q(L: Lattice, table_fn) -> int:
    B = L.dual_gram
    d = L.rank
    q = 2
    while True:
        if all((Fraction(q, 2) * B[i][j]).denominator == 1 for i in range(d) for j in range(d)) and \
                all((Fraction(q, 4) * B[i][i]).denominator == 1 for i in range(d)) and \
                all(x.denominator == 1 for row in table_fn(q) for x in row):
            return q
        q += 2


# delta coefficients from sympy differentiation

def sympy_delta(cutoff: int) -> dict[tuple[int, int], Fraction]:
    x, y = sympy.symbols("x y")
    f = -sympy.log((sympy.sqrt(1 + x) + sympy.sqrt(1 + y)) / 2)
    out = {}
    for m in range(cutoff + 1):
        for n in range(cutoff + 1 - m):
            v = sympy.diff(f, x, m, y, n).subs({x: 0, y: 0}) / (sympy.factorial(m) * sympy.factorial(n))
            v = sympy.nsimplify(sympy.simplify(v))
            out[m, n] = Fraction(int(v.p), int(v.q))
    return out


# the fusion rule read bullet by bullet

def _admissible(L, x, y, z) -> bool:
    return any(in_lattice(L, add(add(scale(p, x), scale(q, y)), scale(r, z)))
               for p, q, r in itertools.product((1, -1), repeat=3))


class TheoremOracle:
    """Fusion rules by enumerating the allowed (M2, M3) pairs for each M1."""

    def __init__(self, fc: FusionContext):
        self.fc = fc
        self.L = fc.lattice
        self.cosets = list(fc.cosets)
        self._allowed: dict = {}

    # module constructors
    def V(self, x, s=0) -> IrreducibleModule:
        if is_two_torsion(self.L, x):
            return IrreducibleModule("signed", canonical_coset(self.L, x), sign=s)
        assert s == 0
        return IrreducibleModule("pair", canonical_pm_coset(self.L, x))

    def T(self, chi: int, s: int) -> IrreducibleModule:
        return IrreducibleModule("twisted", chi=chi, sign=s)

    def dual(self, m: IrreducibleModule) -> IrreducibleModule:
        L = self.L
        if m.kind == "pair":
            return m
        if m.kind == "signed":
            odd = (2 * pairing(L, m.coset, m.coset)).numerator % 2 == 1
            return IrreducibleModule("signed", m.coset, sign=-m.sign if odd else m.sign)
        table = self.fc.characters
        chi = table.characters[m.chi]
        vals = [v + table.ctx.q * ((int(pairing(L, vec(g), vec(g))) // 2) % 2)
                for g, v in zip(table.radical.generators, chi.values)]
        return self.T(table.by_values(vals).index, m.sign)

    def tw(self, chi: int, x) -> int:
        table = self.fc.characters
        return twist_character(table, table.characters[chi], x).index

    def c(self, chi: int, x) -> int:
        table = self.fc.characters
        return c_chi(table, table.characters[chi], x)

    def pi2(self, x, y) -> int:
        return pi_sign(self.fc.cocycle, x, scale(2, y))

    def allowed(self, m1: IrreducibleModule) -> set:
        if m1 not in self._allowed:
            self._allowed[m1] = self._enumerate(m1)
        return self._allowed[m1]

    def _enumerate(self, m1: IrreducibleModule) -> set:
        L, D = self.L, self.dual
        out = set()
        chis = range(len(self.fc.characters))
        tt = lambda x: is_two_torsion(L, x)
        if m1.kind == "pair":
            lam = m1.coset
            for mu, nu in itertools.product(self.cosets, repeat=2):
                if not _admissible(L, lam, mu, nu):
                    continue
                if not tt(mu) and not tt(nu):
                    out.add((self.V(mu), self.V(nu)))
                if tt(mu):
                    for s in (1, -1):
                        out.add((self.V(mu, s), self.V(nu)))
                        out.add((D(self.V(nu)), D(self.V(mu, s))))
            for chi in chis:
                t = self.tw(chi, lam)
                for s in (1, -1):
                    out.add((self.T(chi, s), self.T(t, s)))
                    out.add((self.T(chi, s), self.T(t, -s)))
        elif m1.kind == "signed":
            lam, e = m1.coset, m1.sign
            for mu, nu in itertools.product(self.cosets, repeat=2):
                if not _admissible(L, lam, mu, nu):
                    continue
                if not tt(mu):
                    out.add((self.V(mu), self.V(nu)))
                else:
                    p = self.pi2(lam, mu)
                    for s in (1, -1):
                        out.add((self.V(mu, s), self.V(nu, s * e * p)))
            for chi in chis:
                t = self.tw(chi, lam)
                c = self.c(chi, lam)
                for s in (1, -1):
                    if e * c == 1:
                        out.add((self.T(chi, s), self.T(t, s)))
                        out.add((D(self.T(t, s)), D(self.T(chi, s))))
                    elif e == 1:
                        out.add((self.T(chi, s), self.T(t, -s)))
                        out.add((D(self.T(t, s)), D(self.T(chi, -s))))
                    else:
                        out.add((self.T(chi, s), self.T(t, -s)))
                        out.add((D(self.T(t, -s)), D(self.T(chi, s))))
        else:
            chi, e = m1.chi, m1.sign
            for lam in self.cosets:
                t = self.tw(chi, lam)
                if not tt(lam):
                    for s in (1, -1):
                        out.add((self.V(lam), self.T(t, s)))
                        out.add((D(self.T(t, s)), D(self.V(lam))))
                    continue
                c = self.c(chi, lam)
                for s in (1, -1):
                    if e == 1:
                        s3 = s if c == 1 else -s
                        out.add((self.V(lam, s), self.T(t, s3)))
                        out.add((D(self.T(t, s3)), D(self.V(lam, s))))
                    else:
                        s3 = -s if c == 1 else s
                        out.add((self.V(lam, s), self.T(t, s3)))
                        if c == 1:
                            out.add((D(self.T(t, s)), D(self.V(lam, -s))))
                        else:
                            out.add((D(self.T(t, -s)), D(self.V(lam, -s))))
        return out

    def rule(self, m1, m2, m3) -> int:
        return int((m2, m3) in self.allowed(m1))
