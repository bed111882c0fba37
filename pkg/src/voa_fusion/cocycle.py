"""A concrete bimultiplicative cocycle on the dual lattice.

Roots of unity are stored as exponents of zeta = exp(2 pi i / 2q), so that
omega_q = zeta^2 and -1 = zeta^q.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import lcm
from typing import Sequence

import numpy as np

from .lattice import (
    Check, Lattice, dual_coords, format_vector, in_lattice, is_two_torsion, pairing,
    two_torsion_cosets, vec,
)


class CocycleError(ArithmeticError):
    pass


class NotPlusMinusOne(CocycleError):
    pass


@dataclass(frozen=True)
class RootOfUnity:
    """zeta^exponent with zeta = exp(2 pi i / modulus); modulus is 2q."""

    exponent: int
    modulus: int

    def __post_init__(self):
        object.__setattr__(self, "exponent", self.exponent % self.modulus)

    def __mul__(self, other: "RootOfUnity") -> "RootOfUnity":
        if other.modulus != self.modulus:
            raise ValueError("roots of unity with different moduli")
        return RootOfUnity(self.exponent + other.exponent, self.modulus)

    def __pow__(self, n: int) -> "RootOfUnity":
        return RootOfUnity(self.exponent * n, self.modulus)

    def inverse(self) -> "RootOfUnity":
        return RootOfUnity(-self.exponent, self.modulus)

    @property
    def sign(self) -> int | None:
        """+1 or -1 when the value is real, otherwise None."""
        if self.exponent == 0:
            return 1
        if 2 * self.exponent == self.modulus:
            return -1
        return None

    def __str__(self) -> str:
        return f"zeta_{self.modulus}^{self.exponent}"


@dataclass(frozen=True)
class CocycleContext:
    lattice: Lattice
    q: int
    eps0: tuple[tuple[int, ...], ...]

    @property
    def modulus(self) -> int:
        return 2 * self.q

    def root(self, omega_exponent: int) -> RootOfUnity:
        """omega_q^k as a RootOfUnity."""
        return RootOfUnity(2 * omega_exponent, 2 * self.q)

    @property
    def basis(self) -> tuple[tuple[Fraction, ...], ...]:
        """The dual basis beta_1..beta_d in L-coordinates (columns of G^-1)."""
        B = self.lattice.dual_gram
        d = self.lattice.rank
        return tuple(tuple(B[r][i] for r in range(d)) for i in range(d))


def _denominator_lcm(xs) -> int:
    return lcm(1, *(Fraction(x).denominator for x in xs))


def build_context(L: Lattice) -> CocycleContext:
    """Fix q and the table eps0 with eps(beta_i, beta_j) = omega_q^eps0[i][j].

    The table is (q/2) * B U B with B = G^-1 and U the upper triangle of G
    with halved diagonal, so on L itself eps0 equals (q/2) U: the values are
    +-1, eps(a, a) = (-1)^{(a,a)/2} and the commutator is (-1)^{(a,b)}.
    """
    d = L.rank
    B = L.dual_gram
    U = [[Fraction(L.gram[i][j]) if i < j else Fraction(L.gram[i][i], 2) if i == j else Fraction(0)
          for j in range(d)] for i in range(d)]
    BU = [[sum((B[i][k] * U[k][j] for k in range(d)), Fraction(0)) for j in range(d)] for i in range(d)]
    M = [[sum((BU[i][k] * B[k][j] for k in range(d)), Fraction(0)) for j in range(d)] for i in range(d)]

    # q/2 must clear B/2... i.e. q*B/2, q*B_ii/4 and (q/2)*M integral
    need = [_denominator_lcm(x / 2 for row in B for x in row),
            _denominator_lcm(B[i][i] / 4 for i in range(d)),
            _denominator_lcm(x / 2 for row in M for x in row)]
    step = lcm(2, *need)
    q = step
    table = tuple(tuple(int(Fraction(q, 2) * M[i][j]) % q for j in range(d)) for i in range(d))
    return CocycleContext(L, q, table)


def epsilon0(ctx: CocycleContext, x: Sequence, y: Sequence) -> int:
    m = dual_coords(ctx.lattice, x)
    n = dual_coords(ctx.lattice, y)
    E = ctx.eps0
    return sum(m[i] * E[i][j] * n[j] for i in range(len(m)) if m[i] for j in range(len(n))) % ctx.q


def c0(ctx: CocycleContext, x: Sequence, y: Sequence) -> int:
    return (epsilon0(ctx, x, y) - epsilon0(ctx, y, x)) % ctx.q


def half_q_pairing(ctx: CocycleContext, x: Sequence, y: Sequence) -> int:
    """(q/2)(x, y), an integer for x, y in the dual lattice."""
    v = Fraction(ctx.q, 2) * pairing(ctx.lattice, x, y)
    if v.denominator != 1:
        raise CocycleError("q is too small for this pairing")
    return int(v)


def pi(ctx: CocycleContext, x: Sequence, y: Sequence) -> RootOfUnity:
    """pi_{x,y} = e^{(x,y) pi i} omega_q^{c0(y,x)}."""
    return ctx.root(half_q_pairing(ctx, x, y) + c0(ctx, y, x))


def pi_sign(ctx: CocycleContext, x: Sequence, alpha: Sequence) -> int:
    L = ctx.lattice
    if not is_two_torsion(L, x) or not in_lattice(L, alpha):
        raise CocycleError("pi_sign needs 2x in L and alpha in L")
    s = pi(ctx, x, alpha).sign
    if s is None:
        raise NotPlusMinusOne(f"pi_{{x,alpha}} is not +-1 for x={x}, alpha={alpha}")
    return s


# law checks

def _ball_array(rank: int, radius: int):
    axis = np.arange(-radius, radius + 1, dtype=np.int64)
    return np.stack(np.meshgrid(*([axis] * rank), indexing="ij"), -1).reshape(-1, rank)


def cocycle_law_checks(ctx: CocycleContext, radius: int = 3, sample_radius: int = 1) -> list[Check]:
    """Bimultiplicativity, diagonal and commutator laws, and pi_{x,a} = +-1.

    The pi check runs over every 2-torsion coset representative x and every
    a in the coordinate ball of the given radius, vectorized with numpy.
    """
    L = ctx.lattice
    d, q = L.rank, ctx.q
    checks = []
    B = L.dual_gram
    ball = [vec(c) for c in itertools.product(range(-sample_radius, sample_radius + 1), repeat=d)]
    duals = [tuple(sum((B[i][j] * c[j] for j in range(d)), Fraction(0)) for i in range(d))
             for c in itertools.product(range(-1, 2), repeat=d)] if d <= 3 else \
        [tuple(B[i][j] for i in range(d)) for j in range(d)]

    bad, n = None, 0
    for x, y, z in itertools.product(duals, repeat=3):
        n += 1
        xy = tuple(a + b for a, b in zip(x, y))
        if (epsilon0(ctx, xy, z) - epsilon0(ctx, x, z) - epsilon0(ctx, y, z)) % q or \
                (epsilon0(ctx, z, xy) - epsilon0(ctx, z, x) - epsilon0(ctx, z, y)) % q:
            bad = f"x={x}, y={y}, z={z}"
            break
    checks.append(Check("bimultiplicativity", bad is None, n, bad))

    G = np.array(L.gram, dtype=np.int64)
    E = np.array(ctx.eps0, dtype=np.int64)
    A = np.array([[int(c) for c in a] for a in ball], dtype=np.int64)
    D = A @ G
    DE = D @ E
    bad_diag, bad_comm = None, None
    for start in range(0, len(ball), 512):
        rows = slice(start, start + 512)
        eps = (DE[rows] @ D.T) % q
        eps_t = (D[rows] @ E.T @ D.T) % q
        P = A[rows] @ G @ A.T
        idx = np.arange(eps.shape[0])
        diag_ok = eps[idx, idx + start] == (q // 2) * ((P[idx, idx + start] // 2) % 2)
        comm_ok = (eps - eps_t) % q == (q // 2) * (P % 2)
        if bad_diag is None and not diag_ok.all():
            bad_diag = f"a={ball[start + int(np.argmin(diag_ok))]}"
        if bad_comm is None and not comm_ok.all():
            i, j = np.unravel_index(int(np.argmin(comm_ok)), comm_ok.shape)
            bad_comm = f"a={ball[start + i]}, b={ball[j]}"
    checks.append(Check("diagonal-law", bad_diag is None, len(ball), bad_diag))
    checks.append(Check("commutator-law", bad_comm is None, len(ball) ** 2, bad_comm))

    # pi_{x,a} = zeta^{q (x,a) + 2 c0(a, x)} on integer points a, for each coset rep x
    pts = _ball_array(d, radius)
    bad, n = None, 0
    for x in two_torsion_cosets(L):
        m = np.array(dual_coords(L, x), dtype=np.int64)
        two_x = np.array([int(2 * c) for c in x], dtype=np.int64)
        a_dual = pts @ G
        c = (a_dual @ E @ m - m @ E @ a_dual.T) % q
        # q (x, a) = (q/2) (2x, a)
        zexp = ((q // 2) * (pts @ G @ two_x) + 2 * c) % (2 * q)
        ok = (zexp == 0) | (zexp == q)
        n += len(pts)
        if not ok.all():
            i = int(np.argmin(ok))
            bad = f"x={format_vector(x)}, a={tuple(int(t) for t in pts[i])}"
            break
    checks.append(Check("pi-plus-minus-one", bad is None, n, bad))
    return checks
