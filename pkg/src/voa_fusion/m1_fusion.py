"""Fusion rules for irreducible M(1)^+-modules over a rational quadratic space.

The rule is stated once for rank one and holds verbatim in every rank; the
tensor-decomposition checks below compare it against the rules on an
orthogonal splitting.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .lattice import LatticeError, Vec, format_vector, inverse, leading_minors, parse_vector, vec

PLUS, MINUS, MOMENTUM, TPLUS, TMINUS = "plus", "minus", "momentum", "tplus", "tminus"


class NotBlockDiagonal(LatticeError):
    pass


class DegenerateForm(LatticeError):
    pass


@dataclass(frozen=True)
class BilinearSpace:
    form: tuple[Vec, ...]

    @property
    def dim(self) -> int:
        return len(self.form)

    def pair(self, x: Sequence, y: Sequence) -> Fraction:
        return sum((Fraction(x[i]) * self.form[i][j] * y[j]
                    for i in range(self.dim) for j in range(self.dim)), Fraction(0))


def bilinear_space(form: Sequence[Sequence]) -> BilinearSpace:
    B = tuple(vec(r) for r in form)
    n = len(B)
    if n == 0 or any(len(r) != n for r in B):
        raise LatticeError("form must be a nonempty square matrix")
    if any(B[i][j] != B[j][i] for i in range(n) for j in range(n)):
        raise LatticeError("form is not symmetric")
    try:
        inverse(B)
    except LatticeError:
        raise DegenerateForm("form is degenerate") from None
    return BilinearSpace(B)


def _normalize(x: Sequence) -> Vec:
    x = vec(x)
    return min(x, tuple(-c for c in x))


@dataclass(frozen=True)
class M1Module:
    kind: str
    momentum: Vec | None = None

    @property
    def twisted(self) -> bool:
        return self.kind in (TPLUS, TMINUS)

    @property
    def sign(self) -> int:
        return {PLUS: 1, MINUS: -1, TPLUS: 1, TMINUS: -1}.get(self.kind, 0)

    @property
    def name(self) -> str:
        if self.kind == MOMENTUM:
            return f"M({format_vector(self.momentum)})"
        return {PLUS: "M+", MINUS: "M-", TPLUS: "Mt+", TMINUS: "Mt-"}[self.kind]

    def __str__(self) -> str:
        return self.name


M_PLUS, M_MINUS, MT_PLUS, MT_MINUS = M1Module(PLUS), M1Module(MINUS), M1Module(TPLUS), M1Module(TMINUS)


def momentum(x: Sequence) -> M1Module:
    x = vec(x)
    if all(c == 0 for c in x):
        raise LatticeError("M(1,0) is reducible; use M+ or M-")
    return M1Module(MOMENTUM, _normalize(x))


def parse_m1(text: str, dim: int | None = None) -> M1Module:
    fixed = {"M+": M_PLUS, "M-": M_MINUS, "Mt+": MT_PLUS, "Mt-": MT_MINUS}
    if text in fixed:
        return fixed[text]
    m = re.fullmatch(r"M\(([^)]*)\)", text)
    if not m:
        raise LatticeError(f"cannot parse M(1)^+-module name {text!r}")
    x = parse_vector(m.group(1))
    if dim is not None and len(x) != dim:
        raise LatticeError(f"{text!r}: expected {dim} coordinates")
    return momentum(x)


def admissible(x: Sequence, y: Sequence, z: Sequence) -> bool:
    if not len(x) == len(y) == len(z):
        raise LatticeError("dimension mismatch")
    for q, r in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        if all(Fraction(a) + q * b + r * c == 0 for a, b, c in zip(x, y, z)):
            return True
    return False


def contragredient_m1(m: M1Module) -> M1Module:
    return m


def _rule_first(a: M1Module, b: M1Module, c: M1Module) -> bool:
    """Case list with M1 = a, read literally."""
    if a.kind == PLUS:
        return b == c
    if a.kind == MINUS:
        if {b.kind, c.kind} in ({PLUS, MINUS}, {TPLUS, TMINUS}) and b.kind != c.kind:
            return True
        return b.kind == c.kind == MOMENTUM and b.momentum == c.momentum
    if a.kind == MOMENTUM:
        lam = a.momentum
        if b.kind in (PLUS, MINUS) and c.kind == MOMENTUM:
            return c.momentum == lam
        if c.kind in (PLUS, MINUS) and b.kind == MOMENTUM:
            return b.momentum == lam
        if b.kind == c.kind == MOMENTUM:
            return admissible(lam, b.momentum, c.momentum)
        return b.twisted and c.twisted
    # a twisted: +1 keeps the untwisted sign, -1 flips it
    s = a.sign
    if b.kind in (PLUS, MINUS) and c.twisted:
        return b.sign * c.sign == s
    if c.kind in (PLUS, MINUS) and b.twisted:
        return b.sign * c.sign == s
    return (b.kind == MOMENTUM and c.twisted) or (b.twisted and c.kind == MOMENTUM)


def fusion_rule_m1(S: BilinearSpace, a: M1Module, b: M1Module, c: M1Module) -> int:
    for m in (a, b, c):
        if m.kind == MOMENTUM and len(m.momentum) != S.dim:
            raise LatticeError(f"{m.name} does not live in a {S.dim}-dimensional space")
    return int(_rule_first(a, b, c))


@dataclass(frozen=True)
class M1FusionSupport:
    finite: tuple[M1Module, ...]
    momentum_family: bool = False

    def __str__(self) -> str:
        parts = [m.name for m in self.finite]
        if self.momentum_family:
            parts.append("sum of M(l) over all l != 0")
        return " + ".join(parts) if parts else "0"


def _sort_key(m: M1Module):
    order = {PLUS: 0, MINUS: 1, MOMENTUM: 2, TPLUS: 3, TMINUS: 4}
    return (order[m.kind], m.momentum or ())


def fuse_m1(S: BilinearSpace, a: M1Module, b: M1Module) -> M1FusionSupport:
    cands = {M_PLUS, M_MINUS, MT_PLUS, MT_MINUS}
    moms = [m.momentum for m in (a, b) if m.kind == MOMENTUM]
    for x in moms:
        cands.add(momentum(x))
    if len(moms) == 2:
        for s in (1, -1):
            y = tuple(p + s * r for p, r in zip(*moms))
            if any(y):
                cands.add(momentum(y))
    finite = tuple(sorted((m for m in cands if fusion_rule_m1(S, a, b, m)), key=_sort_key))
    return M1FusionSupport(finite, a.twisted and b.twisted)


# tensor decompositions over an orthogonal splitting h = h1 + h2

def block_split(S: BilinearSpace, k: int) -> tuple[BilinearSpace, BilinearSpace]:
    n = S.dim
    if not 0 < k < n:
        raise NotBlockDiagonal("split position must be inside the space")
    if any(S.form[i][j] for i in range(k) for j in range(k, n)):
        raise NotBlockDiagonal("NotBlockDiagonal: form has off-block entries")
    S1 = bilinear_space([r[:k] for r in S.form[:k]])
    S2 = bilinear_space([r[k:] for r in S.form[k:]])
    return S1, S2


def constituents(m: M1Module, k: int) -> list[tuple[M1Module, M1Module]]:
    """Irreducible constituents over M_{h1}(1)^+ (x) M_{h2}(1)^+, h1 = first k coordinates."""
    if m.kind == PLUS:
        return [(M_PLUS, M_PLUS), (M_MINUS, M_MINUS)]
    if m.kind == MINUS:
        return [(M_PLUS, M_MINUS), (M_MINUS, M_PLUS)]
    if m.kind == TPLUS:
        return [(MT_PLUS, MT_PLUS), (MT_MINUS, MT_MINUS)]
    if m.kind == TMINUS:
        return [(MT_PLUS, MT_MINUS), (MT_MINUS, MT_PLUS)]
    x1, x2 = m.momentum[:k], m.momentum[k:]
    f1 = [momentum(x1)] if any(x1) else [M_PLUS, M_MINUS]
    f2 = [momentum(x2)] if any(x2) else [M_PLUS, M_MINUS]
    return [(p, r) for p in f1 for r in f2]


def tensor_bound(S1: BilinearSpace, S2: BilinearSpace, a: tuple[M1Module, M1Module],
                 b: tuple[M1Module, M1Module], c: M1Module, k: int) -> int:
    """sum_j N(a1, b1; c1_j) N(a2, b2; c2_j) over the constituents of c."""
    return sum(fusion_rule_m1(S1, a[0], b[0], c1) * fusion_rule_m1(S2, a[1], b[1], c2)
               for c1, c2 in constituents(c, k))


def decompose_check(S: BilinearSpace, a: M1Module, b: M1Module, c: M1Module, k: int) -> bool:
    """Restriction inequality on the block split h = h1 (first k coords) + h2.

    True iff the rule over S is at most the tensor-product bound for every
    choice of constituents of a and b.
    """
    S1, S2 = block_split(S, k)
    lhs = fusion_rule_m1(S, a, b, c)
    return all(lhs <= tensor_bound(S1, S2, ca, cb, c, k)
               for ca in constituents(a, k) for cb in constituents(b, k))


def decompose_bound(S: BilinearSpace, a: M1Module, b: M1Module, c: M1Module, k: int) -> int:
    """Smallest tensor-product bound over choices of constituents of a and b."""
    S1, S2 = block_split(S, k)
    return min(tensor_bound(S1, S2, ca, cb, c, k)
               for ca in constituents(a, k) for cb in constituents(b, k))


def _solve(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Vec:
    Ainv = inverse(A)
    return tuple(sum((Ainv[i][j] * b[j] for j in range(len(b))), Fraction(0)) for i in range(len(b)))


def orthogonal_split(S: BilinearSpace, h: Sequence) -> tuple[BilinearSpace, "callable"]:
    """Change coordinates so that S becomes span(h) + h^perp (block diagonal).

    Returns the new space and a map sending old coordinate vectors to new ones.
    Requires (h, h) != 0.
    """
    h = vec(h)
    n = S.dim
    hh = S.pair(h, h)
    if hh == 0:
        raise DegenerateForm("split direction is isotropic")
    Bh = tuple(sum((S.form[i][j] * h[j] for j in range(n)), Fraction(0)) for i in range(n))
    # basis of h^perp = {x : Bh . x = 0}
    piv = next(i for i in range(n) if Bh[i] != 0)
    perp = []
    for j in range(n):
        if j == piv:
            continue
        x = [Fraction(0)] * n
        x[j] = Fraction(1)
        x[piv] = -Bh[j] / Bh[piv]
        perp.append(tuple(x))
    P = [h] + perp
    newform = [[S.pair(u, v) for v in P] for u in P]
    Pt = [[P[c][r] for c in range(n)] for r in range(n)]

    def to_new(x: Sequence) -> Vec:
        return _solve(Pt, vec(x))

    return bilinear_space(newform), to_new


def transport(m: M1Module, to_new) -> M1Module:
    if m.kind != MOMENTUM:
        return m
    return momentum(to_new(m.momentum))


def small_directions(dim: int, radius: int = 2) -> Iterable[Vec]:
    for c in itertools.product(range(-radius, radius + 1), repeat=dim):
        if any(c) and _normalize(c) == vec(c):
            yield vec(c)


def _perp_basis(S: BilinearSpace, x: Vec) -> list[Vec]:
    n = S.dim
    Bx = [sum((S.form[i][j] * x[j] for j in range(n)), Fraction(0)) for i in range(n)]
    piv = next(i for i in range(n) if Bx[i] != 0)
    out = []
    for j in range(n):
        if j != piv:
            y = [Fraction(0)] * n
            y[j] = Bx[piv]
            y[piv] = -Bx[j]
            out.append(tuple(y))
    return out


def split_directions(S: BilinearSpace, mods: Sequence[M1Module], radius: int = 2) -> list[Vec]:
    """Small integer directions, the momenta themselves and vectors orthogonal to them."""
    out = list(small_directions(S.dim, radius))
    for m in mods:
        if m.kind == MOMENTUM:
            out.append(m.momentum)
            out.extend(_perp_basis(S, m.momentum))
    return out


def best_split_bound(S: BilinearSpace, a: M1Module, b: M1Module, c: M1Module,
                     radius: int = 2) -> tuple[int, Vec | None]:
    """Minimise the tensor bound over rank-one orthogonal splits."""
    best, where = None, None
    for h in split_directions(S, (a, b, c), radius):
        if S.pair(h, h) == 0:
            continue
        T, to_new = orthogonal_split(S, h)
        val = decompose_bound(T, transport(a, to_new), transport(b, to_new), transport(c, to_new), 1)
        if best is None or val < best:
            best, where = val, h
            if best == 0:
                break
    return best, where
