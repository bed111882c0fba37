"""Central characters of the finite group L^/K.

Elements of L^/K are written kappa_q^s e_x with x in L taken modulo 2L.
With the cocycle of :mod:`voa_fusion.cocycle`, e_{2g} lies in K for every
g in L, so e_{x+2g} = omega_q^{-eps0(x,2g)} e_x in the quotient.  The centre
is spanned by kappa_q and the e_r with r in the radical
R = {a in L : (a, L) in 2Z}.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .cocycle import CocycleContext, NotPlusMinusOne, RootOfUnity, epsilon0
from .lattice import (
    Check, Lattice, LatticeError, add, format_vector, in_lattice, is_two_torsion, pairing, scale,
    sub, vec,
)


class TwistedSectorError(ArithmeticError):
    pass


class NotClosed(TwistedSectorError):
    pass


class PreconditionFailed(LatticeError):
    pass


def _gf2_nullspace(rows: Sequence[Sequence[int]]) -> tuple[list[list[int]], list[int]]:
    """Reduced-echelon basis of {x : M x = 0 mod 2} and the pivot column of each vector."""
    n = len(rows[0]) if rows else 0
    a = [[x % 2 for x in r] for r in rows]
    pivots = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, len(a)) if a[i][c]), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        for i in range(len(a)):
            if i != r and a[i][c]:
                a[i] = [(x + y) % 2 for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for f in free:
        x = [0] * n
        x[f] = 1
        for row, pc in zip(a, pivots):
            if row[f]:
                x[pc] = 1
        basis.append(x)
    # each kernel vector has a 1 in its own free column and 0 in the others
    return basis, free


@dataclass(frozen=True)
class RadicalLattice:
    """R and the elementary 2-group R/2L.

    ``basis`` columns span R; ``generators`` are 0/1 vectors whose classes
    form a basis of R/2L, and ``marks[i]`` is a coordinate at which only
    generator i is nonzero.
    """

    basis: tuple[tuple[int, ...], ...]
    generators: tuple[tuple[int, ...], ...]
    marks: tuple[int, ...]

    @property
    def elementary_divisors(self) -> tuple[int, ...]:
        return (2,) * len(self.generators)

    @property
    def order(self) -> int:
        return 2 ** len(self.generators)


def compute_radical(L: Lattice) -> RadicalLattice:
    gens, marks = _gf2_nullspace(L.gram)
    d = L.rank
    cols = [tuple(g) for g in gens]
    cols += [tuple(2 * int(i == j) for i in range(d)) for j in range(d) if j not in marks]
    basis = tuple(tuple(col[i] for col in cols) for i in range(d))
    return RadicalLattice(basis, tuple(tuple(g) for g in gens), tuple(marks))


def in_radical(L: Lattice, x: Sequence) -> bool:
    return in_lattice(L, x) and all(int(c) % 2 == 0 for c in L.apply_gram(x))


def radical_coords(L: Lattice, R: RadicalLattice, r: Sequence) -> tuple[int, ...]:
    """Coefficients a in {0,1} with r = sum a_i g_i mod 2L."""
    if not in_radical(L, r):
        raise TwistedSectorError(f"{r} is not in the radical")
    a = tuple(int(r[m]) % 2 for m in R.marks)
    rest = sub(r, _combo(L, R, a))
    if any(int(c) % 2 for c in rest):
        raise TwistedSectorError("radical decomposition failed")
    return a


def _combo(L: Lattice, R: RadicalLattice, a: Sequence[int]):
    x = L.zero()
    for ai, g in zip(a, R.generators):
        if ai:
            x = add(x, vec(g))
    return x


@dataclass(frozen=True)
class CentralCharacter:
    """chi(e_g) = zeta^values[i] on the generators g of R/2L (zeta = exp(2 pi i / 2q))."""

    index: int
    values: tuple[int, ...]

    @property
    def name(self) -> str:
        return f"T{self.index}"


@dataclass(frozen=True)
class CharacterTable:
    ctx: CocycleContext
    radical: RadicalLattice
    characters: tuple[CentralCharacter, ...]

    def by_values(self, values: Sequence[int]) -> CentralCharacter:
        key = tuple(v % self.ctx.modulus for v in values)
        for chi in self.characters:
            if chi.values == key:
                return chi
        raise NotClosed(f"no enumerated character with values {key}")

    def __getitem__(self, i: int) -> CentralCharacter:
        return self.characters[i]

    def __len__(self) -> int:
        return len(self.characters)


def enumerate_characters(L: Lattice, ctx: CocycleContext) -> CharacterTable:
    """All characters of the centre with chi(kappa_q) = omega_q.

    chi(e_g)^2 = chi(e_g e_g) = omega_q^{eps0(g,g)} since e_{2g} is trivial,
    so each generator has exactly two admissible values.
    """
    R = compute_radical(L)
    options = []
    for g in R.generators:
        # zeta-exponents x with 2x = 2 eps0(g,g) mod 2q
        x = epsilon0(ctx, vec(g), vec(g))
        options.append(sorted({x, (x + ctx.q) % ctx.modulus}))
    chars = tuple(CentralCharacter(i, tuple(v))
                  for i, v in enumerate(sorted(itertools.product(*options))))
    return CharacterTable(ctx, R, chars)


def generator_power_ok(ctx: CocycleContext, R: RadicalLattice, chi: CentralCharacter) -> bool:
    """Order constraint: chi(e_g)^2 equals omega_q^{eps0(g,g)} for every generator."""
    return all((2 * v - 2 * epsilon0(ctx, vec(g), vec(g))) % ctx.modulus == 0
               for v, g in zip(chi.values, R.generators))


def character_value(table: CharacterTable, chi: CentralCharacter, r: Sequence) -> RootOfUnity:
    """chi(e_r) for r in R, as a root of unity.

    With s = g_{i1} + ... + g_{ik} (i1 < ... < ik) and r = s + 2c:
    e_{g_i1} ... e_{g_ik} = prod_{j<l} eps(g_ij, g_il) e_s and
    e_r = omega_q^{-eps0(s, 2c)} e_s in L^/K.
    """
    ctx, R = table.ctx, table.radical
    L = ctx.lattice
    a = radical_coords(L, R, r)
    chosen = [vec(g) for ai, g in zip(a, R.generators) if ai]
    exp = sum(v for ai, v in zip(a, chi.values) if ai)
    omega = 0
    for j in range(len(chosen)):
        for l in range(j + 1, len(chosen)):
            omega -= epsilon0(ctx, chosen[j], chosen[l])
    s = _combo(L, R, a)
    two_c = sub(r, s)
    omega -= epsilon0(ctx, s, two_c)
    return RootOfUnity(exp + 2 * omega, ctx.modulus)


def twist_character(table: CharacterTable, chi: CentralCharacter, x: Sequence) -> CentralCharacter:
    """chi^{(x)}(e_g) = (-1)^{(g, x)} chi(e_g)."""
    ctx = table.ctx
    L = ctx.lattice
    vals = []
    for g, v in zip(table.radical.generators, chi.values):
        p = pairing(L, vec(g), x)
        if p.denominator != 1:
            raise LatticeError("twist needs a dual-lattice vector")
        vals.append(v + ctx.q * (int(p) % 2))
    return table.by_values(vals)


def contragredient_character(table: CharacterTable, chi: CentralCharacter) -> CentralCharacter:
    """chi'(e_g) = (-1)^{(g,g)/2} chi(e_g)."""
    ctx = table.ctx
    L = ctx.lattice
    vals = [v + ctx.q * ((int(pairing(L, vec(g), vec(g))) // 2) % 2)
            for g, v in zip(table.radical.generators, chi.values)]
    return table.by_values(vals)


def c_chi(table: CharacterTable, chi: CentralCharacter, x: Sequence) -> int:
    """c_chi(x) = (-1)^{(x,2x)} eps(x, 2x) chi(e_{2x}) for 2x in L."""
    ctx = table.ctx
    L = ctx.lattice
    if not is_two_torsion(L, x):
        raise PreconditionFailed("PreconditionFailed: c_chi needs 2x in L")
    two_x = scale(2, x)
    sign_part = RootOfUnity(ctx.q * (int(pairing(L, x, two_x)) % 2), ctx.modulus)
    value = sign_part * ctx.root(epsilon0(ctx, x, two_x)) * character_value(table, chi, two_x)
    s = value.sign
    if s is None:
        raise NotPlusMinusOne(f"c_chi is not +-1 at {x}")
    return s


def twisted_dimension(L: Lattice, R: RadicalLattice) -> Fraction:
    """dim T_chi = sqrt(|L/R|) = 2^{(d - k)/2}."""
    k = len(R.generators)
    return Fraction(2) ** ((L.rank - k) // 2)


# law checks

def character_law_checks(table: CharacterTable, cosets: Sequence, radius: int = 1) -> list[Check]:
    """Twist composition, lattice invariance, c_chi periodicity and sign, double dual.

    ``cosets`` are representatives of L^o/L; lattice shifts range over the
    coordinate ball of the given radius.
    """
    L = table.ctx.lattice
    d = L.rank
    ball = [vec(c) for c in itertools.product(range(-radius, radius + 1), repeat=d)]
    chars = table.characters
    checks = []

    bad, n = None, 0
    for chi in chars:
        for x, y in itertools.product(cosets, repeat=2):
            n += 1
            if twist_character(table, twist_character(table, chi, y), x) != \
                    twist_character(table, chi, add(x, y)):
                bad = f"{chi.name}, lambda={format_vector(x)}, mu={format_vector(y)}"
                break
    checks.append(Check("twist-composition", bad is None, n, bad))

    bad = next((f"{chi.name}, alpha={format_vector(a)}" for chi in chars for a in ball
                if twist_character(table, chi, a) != chi), None)
    checks.append(Check("twist-by-lattice", bad is None, len(chars) * len(ball), bad))

    bad_per, bad_sign, n = None, None, 0
    for chi in chars:
        for x in cosets:
            if not is_two_torsion(L, x):
                continue
            try:
                base = c_chi(table, chi, x)
            except NotPlusMinusOne:
                bad_sign = bad_sign or f"{chi.name}, lambda={format_vector(x)}"
                continue
            for a in ball:
                n += 1
                try:
                    v = c_chi(table, chi, add(x, a))
                except NotPlusMinusOne:
                    bad_sign = bad_sign or f"{chi.name}, lambda={format_vector(add(x, a))}"
                    continue
                if v != base and bad_per is None:
                    bad_per = f"{chi.name}, lambda={format_vector(x)}, alpha={format_vector(a)}"
    checks.append(Check("c-periodicity", bad_per is None, n, bad_per))
    checks.append(Check("c-plus-minus-one", bad_sign is None, n, bad_sign))

    bad = next((chi.name for chi in chars
                if contragredient_character(table, contragredient_character(table, chi)) != chi), None)
    checks.append(Check("double-dual", bad is None, len(chars), bad))
    return checks
