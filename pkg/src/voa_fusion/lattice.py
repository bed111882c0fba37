"""Exact arithmetic for even positive-definite lattices, their duals and
discriminant groups.

Vectors are tuples of ``Fraction`` holding coordinates in the fixed basis of
the lattice; nothing here touches floating point.
"""

from __future__ import annotations

import itertools
import json
import re
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from importlib import resources
from math import prod
from typing import Iterable, Iterator, Sequence

from sympy import Matrix, ZZ
from sympy.matrices.normalforms import smith_normal_decomp

Vec = tuple[Fraction, ...]


@dataclass
class Check:
    """One named verification result; failures carry a witness."""

    name: str
    passed: bool
    checked: int = 0
    witness: str | None = None

    def as_dict(self) -> dict:
        d = {"name": self.name, "pass": self.passed, "checked": self.checked}
        if self.witness is not None:
            d["witness"] = self.witness
        return d


class LatticeError(ValueError):
    """Base class for invalid lattice input or arguments."""


class NotSymmetric(LatticeError):
    pass


class NotEven(LatticeError):
    pass


class NotPositiveDefinite(LatticeError):
    pass


class NotInDual(LatticeError):
    pass


class DimensionMismatch(LatticeError):
    pass


class DeterminantTooLarge(LatticeError):
    pass


def vec(xs: Iterable) -> Vec:
    return tuple(Fraction(x) for x in xs)


_RATIONAL = re.compile(r"^[+-]?\d+(/\d+)?$")


def parse_rational(token: str) -> Fraction:
    if not _RATIONAL.match(token):
        raise LatticeError(f"not a rational number: {token!r}")
    value = Fraction(token)
    return value


def parse_vector(text: str) -> Vec:
    """Parse ``"a/b,c,..."`` (no whitespace) into a rational vector."""
    if not text:
        raise LatticeError("empty vector")
    return tuple(parse_rational(tok) for tok in text.split(","))


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def format_vector(v: Sequence[Fraction]) -> str:
    return ",".join(format_rational(Fraction(x)) for x in v)


def leading_minors(rows: Sequence[Sequence]) -> list[Fraction]:
    """Leading principal minors by fraction-exact Gaussian elimination."""
    n = len(rows)
    a = [[Fraction(x) for x in row] for row in rows]
    minors = []
    running = Fraction(1)
    for k in range(n):
        pivot = a[k][k]
        running *= pivot
        minors.append(running)
        if pivot == 0:
            # remaining minors are still well defined, but the matrix is
            # already known not to be positive definite
            minors.extend([Fraction(0)] * (n - k - 1))
            break
        for i in range(k + 1, n):
            f = a[i][k] / pivot
            if f:
                for j in range(k, n):
                    a[i][j] -= f * a[k][j]
    return minors


def inverse(rows: Sequence[Sequence]) -> tuple[Vec, ...]:
    n = len(rows)
    a = [[Fraction(x) for x in row] + [Fraction(int(i == j)) for j in range(n)]
         for i, row in enumerate(rows)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise LatticeError("singular matrix")
        a[col], a[piv] = a[piv], a[col]
        p = a[col][col]
        a[col] = [x / p for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return tuple(tuple(row[n:]) for row in a)


def matvec(m: Sequence[Sequence], x: Sequence) -> Vec:
    return tuple(sum((Fraction(a) * b for a, b in zip(row, x)), Fraction(0)) for row in m)


def frac_part(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


@dataclass(frozen=True)
class Lattice:
    """An even positive-definite lattice given by its integer Gram matrix."""

    gram: tuple[tuple[int, ...], ...]

    @property
    def rank(self) -> int:
        return len(self.gram)

    @cached_property
    def det(self) -> int:
        return int(leading_minors(self.gram)[-1])

    @cached_property
    def dual_gram(self) -> tuple[Vec, ...]:
        """G^-1: Gram matrix of the dual basis, also its L-coordinates."""
        return inverse(self.gram)

    def apply_gram(self, x: Sequence[Fraction]) -> Vec:
        return matvec(self.gram, x)

    def zero(self) -> Vec:
        return (Fraction(0),) * self.rank

    def basis_vector(self, i: int) -> Vec:
        return tuple(Fraction(int(i == j)) for j in range(self.rank))

    def __str__(self) -> str:
        return json.dumps([list(r) for r in self.gram])


def validate_lattice(gram: Sequence[Sequence[int]]) -> Lattice:
    rows = [list(r) for r in gram]
    n = len(rows)
    if n == 0 or any(len(r) != n for r in rows):
        raise LatticeError("Gram matrix must be square and nonempty")
    for i, r in enumerate(rows):
        for j, x in enumerate(r):
            if isinstance(x, bool) or not isinstance(x, int):
                if isinstance(x, Fraction) and x.denominator == 1:
                    rows[i][j] = int(x)
                else:
                    raise LatticeError(f"Gram entry ({i},{j}) is not an integer: {x!r}")
    for i in range(n):
        for j in range(i + 1, n):
            if rows[i][j] != rows[j][i]:
                raise NotSymmetric(f"NotSymmetric: entries ({i},{j}) and ({j},{i}) differ")
    for i in range(n):
        if rows[i][i] % 2:
            raise NotEven(f"NotEven: diagonal entry {i} is {rows[i][i]}")
    for k, m in enumerate(leading_minors(rows)):
        if m <= 0:
            raise NotPositiveDefinite(
                f"NotPositiveDefinite: leading principal minor of size {k + 1} is {m}")
    return Lattice(tuple(tuple(r) for r in rows))


def _check_dim(L: Lattice, *xs: Sequence) -> None:
    for x in xs:
        if len(x) != L.rank:
            raise DimensionMismatch(f"vector of length {len(x)} for rank {L.rank} lattice")


def pairing(L: Lattice, x: Sequence, y: Sequence) -> Fraction:
    _check_dim(L, x, y)
    gy = L.apply_gram(y)
    return sum((Fraction(a) * b for a, b in zip(x, gy)), Fraction(0))


def norm(L: Lattice, x: Sequence) -> Fraction:
    return pairing(L, x, x)


def in_lattice(L: Lattice, x: Sequence) -> bool:
    _check_dim(L, x)
    return all(Fraction(c).denominator == 1 for c in x)


def in_dual(L: Lattice, x: Sequence) -> bool:
    _check_dim(L, x)
    return all(c.denominator == 1 for c in L.apply_gram(x))


def dual_coords(L: Lattice, x: Sequence) -> tuple[int, ...]:
    """Integer coordinates of x in the dual basis (columns of G^-1)."""
    _check_dim(L, x)
    m = L.apply_gram(x)
    if any(c.denominator != 1 for c in m):
        raise NotInDual(f"NotInDual: {format_vector(x)} does not pair integrally with L")
    return tuple(int(c) for c in m)


def canonical_coset(L: Lattice, x: Sequence) -> Vec:
    if not in_dual(L, x):
        raise NotInDual(f"NotInDual: {format_vector(x)}")
    return tuple(frac_part(Fraction(c)) for c in x)


def canonical_pm_coset(L: Lattice, x: Sequence) -> Vec:
    a = canonical_coset(L, x)
    b = canonical_coset(L, [-Fraction(c) for c in x])
    return min(a, b)


def add(x: Sequence, y: Sequence) -> Vec:
    return tuple(Fraction(a) + b for a, b in zip(x, y))


def sub(x: Sequence, y: Sequence) -> Vec:
    return tuple(Fraction(a) - b for a, b in zip(x, y))


def scale(k, x: Sequence) -> Vec:
    return tuple(Fraction(k) * a for a in x)


@dataclass(frozen=True)
class DiscriminantGroup:
    elementary_divisors: tuple[int, ...]
    generator_reps: tuple[Vec, ...]
    cardinality: int


def _snf(gram: Sequence[Sequence[int]]):
    D, U, V = smith_normal_decomp(Matrix(gram), domain=ZZ)
    n = len(gram)
    diag = [int(D[i, i]) for i in range(n)]
    return diag, [[int(V[i, j]) for j in range(n)] for i in range(n)]


def discriminant_group(L: Lattice) -> DiscriminantGroup:
    """L°/L via the Smith form U G V = D: generator i is V[:, i] / d_i."""
    diag, V = _snf(L.gram)
    divisors, reps = [], []
    for i, d in enumerate(diag):
        d = abs(d)
        if d == 1:
            continue
        divisors.append(d)
        reps.append(canonical_coset(L, [Fraction(V[r][i], d) for r in range(L.rank)]))
    return DiscriminantGroup(tuple(divisors), tuple(reps), prod(divisors))


def enumerate_cosets(L: Lattice) -> list[Vec]:
    """All canonical coset reps of L°/L, sorted lexicographically."""
    D = discriminant_group(L)
    out = set()
    for coeffs in itertools.product(*(range(d) for d in D.elementary_divisors)):
        x = L.zero()
        for k, g in zip(coeffs, D.generator_reps):
            x = add(x, scale(k, g))
        out.add(canonical_coset(L, x))
    return sorted(out)


def two_torsion_cosets(L: Lattice) -> list[Vec]:
    return [c for c in enumerate_cosets(L) if in_lattice(L, scale(2, c))]


def is_two_torsion(L: Lattice, x: Sequence) -> bool:
    return in_lattice(L, scale(2, x))


def lattice_ball(L: Lattice, radius: int) -> Iterator[Vec]:
    """Integer coordinate vectors with every entry in [-radius, radius]."""
    for c in itertools.product(range(-radius, radius + 1), repeat=L.rank):
        yield vec(c)


def check_det_bound(L: Lattice, bound: int) -> None:
    if L.det > bound:
        raise DeterminantTooLarge(f"DeterminantTooLarge: det {L.det} exceeds bound {bound}")


# presets

def _load_e8() -> Lattice:
    text = resources.files("voa_fusion").joinpath("fixtures/e8.json").read_text()
    L = validate_lattice(json.loads(text)["gram"])
    if L.det != 1:
        raise LatticeError("E8 fixture is not unimodular")
    return L


def orthogonal_sum(*lats: Lattice) -> Lattice:
    n = sum(L.rank for L in lats)
    rows = [[0] * n for _ in range(n)]
    off = 0
    for L in lats:
        for i in range(L.rank):
            for j in range(L.rank):
                rows[off + i][off + j] = L.gram[i][j]
        off += L.rank
    return validate_lattice(rows)


_A1K = re.compile(r"^A1\((\d+)\)$")


def preset(name: str) -> Lattice:
    """Named lattices: A1, A2, A1+A1, A1(k) = [[2k]], E8."""
    if name == "A1":
        return validate_lattice([[2]])
    if name == "A2":
        return validate_lattice([[2, -1], [-1, 2]])
    if name == "A1+A1":
        return validate_lattice([[2, 0], [0, 2]])
    if name == "E8":
        return _load_e8()
    m = _A1K.match(name)
    if m and int(m.group(1)) >= 1:
        return validate_lattice([[2 * int(m.group(1))]])
    raise LatticeError(f"unknown preset {name!r}")


PRESET_NAMES = ("A1", "A2", "A1+A1", "A1(k)", "E8")
