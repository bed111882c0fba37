"""Irreducible V_L^+-modules, their fusion rules and the fusion algebra.

Module labels:

* ``signed``  -- V_{lambda+L}^{+-} for 2 lambda in L (``VL+``, ``V[1/2]-``),
* ``pair``    -- V_{lambda+L} for 2 lambda not in L, with lambda and -lambda
  identified (``V[1/3,2/3]``),
* ``twisted`` -- V_L^{T_chi, +-} (``T0+``).
"""

from __future__ import annotations

import itertools
import os
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .cocycle import CocycleContext, build_context, pi_sign
from .lattice import (
    Check, Lattice, LatticeError, Vec, add, canonical_coset, canonical_pm_coset, check_det_bound,
    enumerate_cosets, format_vector, in_dual, in_lattice, is_two_torsion, norm, parse_vector,
    scale, sub,
)
from .twisted import (
    CharacterTable, c_chi, contragredient_character, enumerate_characters, twist_character,
    twisted_dimension,
)

DEFAULT_DET_BOUND = 10000


def det_bound_from_env() -> int:
    raw = os.environ.get("VOA_FUSION_DET_BOUND")
    if raw is None:
        return DEFAULT_DET_BOUND
    try:
        return int(raw)
    except ValueError:
        raise LatticeError(f"VOA_FUSION_DET_BOUND is not an integer: {raw!r}") from None


class UnclassifiedModule(LatticeError):
    pass


class ModuleNameError(LatticeError):
    pass


class NotUnimodular(LatticeError):
    pass


_KIND_ORDER = {"signed": 0, "pair": 1, "twisted": 2}


@dataclass(frozen=True)
class IrreducibleModule:
    kind: str
    coset: Vec | None = None
    chi: int | None = None
    sign: int = 0

    @property
    def twisted(self) -> bool:
        return self.kind == "twisted"

    @property
    def name(self) -> str:
        s = {1: "+", -1: "-", 0: ""}[self.sign]
        if self.kind == "twisted":
            return f"T{self.chi}{s}"
        if self.kind == "signed" and all(c == 0 for c in self.coset):
            return f"VL{s}"
        return f"V[{format_vector(self.coset)}]{s}"

    def sort_key(self):
        return (_KIND_ORDER[self.kind], self.coset or (), self.chi or 0, -self.sign)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class FusionElement:
    """A formal sum of irreducible modules with non-negative coefficients."""

    terms: tuple[tuple[IrreducibleModule, int], ...] = ()

    @classmethod
    def of(cls, coeffs: Mapping[IrreducibleModule, int] | Iterable[IrreducibleModule]) -> "FusionElement":
        if not isinstance(coeffs, Mapping):
            acc: dict[IrreducibleModule, int] = {}
            for m in coeffs:
                acc[m] = acc.get(m, 0) + 1
            coeffs = acc
        return cls(tuple(sorted(((m, c) for m, c in coeffs.items() if c),
                                key=lambda t: t[0].sort_key())))

    def as_dict(self) -> dict[IrreducibleModule, int]:
        return dict(self.terms)

    def __add__(self, other: "FusionElement") -> "FusionElement":
        acc = self.as_dict()
        for m, c in other.terms:
            acc[m] = acc.get(m, 0) + c
        return FusionElement.of(acc)

    def __len__(self) -> int:
        return sum(c for _, c in self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(m.name if c == 1 else f"{c}*{m.name}" for m, c in self.terms)


def admissible_mod_lattice(L: Lattice, x: Sequence, y: Sequence, z: Sequence) -> bool:
    """Some p x + q y + r z lies in L with p, q, r in {+1, -1}."""
    for q_, r_ in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        if in_lattice(L, add(add(x, scale(q_, y)), scale(r_, z))):
            return True
    return False


@dataclass
class FusionContext:
    lattice: Lattice
    cocycle: CocycleContext
    characters: CharacterTable
    modules: tuple[IrreducibleModule, ...]
    cosets: tuple[Vec, ...]
    two_torsion: frozenset
    _index: dict = field(default_factory=dict, repr=False)
    _twist: dict = field(default_factory=dict, repr=False)
    _c: dict = field(default_factory=dict, repr=False)
    _pi: dict = field(default_factory=dict, repr=False)
    _dual_chi: dict = field(default_factory=dict, repr=False)

    def index(self, m: IrreducibleModule) -> int:
        try:
            return self._index[m]
        except KeyError:
            raise UnclassifiedModule(f"UnclassifiedModule: {m.name}") from None

    def twist(self, chi: int, x: Vec) -> int:
        return self._twist[chi, canonical_coset(self.lattice, x)]

    def c(self, chi: int, x: Vec) -> int:
        return self._c[chi, canonical_coset(self.lattice, x)]

    def pi2(self, x: Vec, y: Vec) -> int:
        """pi_{x, 2y} for 2-torsion x, y."""
        L = self.lattice
        return self._pi[canonical_coset(L, x), canonical_coset(L, y)]

    def dual_chi(self, chi: int) -> int:
        return self._dual_chi[chi]

    @property
    def vl_plus(self) -> IrreducibleModule:
        return IrreducibleModule("signed", self.lattice.zero(), sign=1)


def build_fusion_context(L: Lattice, det_bound: int | None = None) -> FusionContext:
    check_det_bound(L, DEFAULT_DET_BOUND if det_bound is None else det_bound)
    ctx = build_context(L)
    table = enumerate_characters(L, ctx)
    cosets = tuple(enumerate_cosets(L))
    tt = frozenset(c for c in cosets if is_two_torsion(L, c))
    fc = FusionContext(L, ctx, table, (), cosets, tt)
    fc.modules = tuple(_classify(fc))
    fc._index = {m: i for i, m in enumerate(fc.modules)}
    for chi in table.characters:
        fc._dual_chi[chi.index] = contragredient_character(table, chi).index
        for x in cosets:
            fc._twist[chi.index, x] = twist_character(table, chi, x).index
        for x in tt:
            fc._c[chi.index, x] = c_chi(table, chi, x)
    for x in tt:
        for y in tt:
            fc._pi[x, y] = pi_sign(ctx, x, scale(2, y))
    return fc


def _classify(fc: FusionContext) -> list[IrreducibleModule]:
    L = fc.lattice
    out = []
    seen = set()
    for c in fc.cosets:
        if c in fc.two_torsion:
            out += [IrreducibleModule("signed", c, sign=1), IrreducibleModule("signed", c, sign=-1)]
        else:
            p = canonical_pm_coset(L, c)
            if p not in seen:
                seen.add(p)
                out.append(IrreducibleModule("pair", p))
    for chi in fc.characters.characters:
        out += [IrreducibleModule("twisted", chi=chi.index, sign=1),
                IrreducibleModule("twisted", chi=chi.index, sign=-1)]
    return sorted(out, key=IrreducibleModule.sort_key)


def classify(L: Lattice, det_bound: int | None = None) -> list[IrreducibleModule]:
    return list(build_fusion_context(L, det_bound).modules)


def expected_module_count(L: Lattice) -> int:
    """(|D| - |D[2]|)/2 + 2|D[2]| + 2|R/2L|."""
    from .twisted import compute_radical
    D = len(enumerate_cosets(L))
    D2 = sum(1 for c in enumerate_cosets(L) if is_two_torsion(L, c))
    return (D - D2) // 2 + 2 * D2 + 2 * compute_radical(L).order


def parse_module(fc: FusionContext, text: str) -> IrreducibleModule:
    """Parse ``VL+``, ``VL-``, ``V[a/b,...]``, ``V[a/b,...]+``, ``Tk+``, ``Tk-``."""
    L = fc.lattice
    if text in ("VL+", "VL-"):
        return IrreducibleModule("signed", L.zero(), sign=1 if text[-1] == "+" else -1)
    m = re.fullmatch(r"T(\d+)([+-])", text)
    if m:
        k = int(m.group(1))
        if k >= len(fc.characters):
            raise ModuleNameError(f"{text!r}: there are only {len(fc.characters)} characters")
        return IrreducibleModule("twisted", chi=k, sign=1 if m.group(2) == "+" else -1)
    m = re.fullmatch(r"V\[([^\]]*)\]([+-]?)", text)
    if not m:
        raise ModuleNameError(f"cannot parse module name {text!r}")
    try:
        x = parse_vector(m.group(1))
    except LatticeError as e:
        raise ModuleNameError(f"{text!r}: {e}") from None
    if len(x) != L.rank:
        raise ModuleNameError(f"{text!r}: expected {L.rank} coordinates")
    if not in_dual(L, x):
        raise ModuleNameError(f"{text!r}: vector is not in the dual lattice")
    if in_lattice(L, x):
        raise ModuleNameError(f"{text!r}: use VL+ or VL- for the lattice coset")
    sign = {"+": 1, "-": -1, "": 0}[m.group(2)]
    if is_two_torsion(L, x):
        if not sign:
            raise ModuleNameError(f"{text!r}: 2-torsion coset needs a sign")
        return IrreducibleModule("signed", canonical_coset(L, x), sign=sign)
    if sign:
        raise ModuleNameError(f"{text!r}: sign given but twice the vector is not in L")
    return IrreducibleModule("pair", canonical_pm_coset(L, x))


def contragredient(fc: FusionContext, m: IrreducibleModule) -> IrreducibleModule:
    fc.index(m)
    if m.kind == "pair":
        return m
    if m.kind == "signed":
        odd = int(2 * norm(fc.lattice, m.coset)) % 2
        return IrreducibleModule("signed", m.coset, sign=-m.sign if odd else m.sign)
    return IrreducibleModule("twisted", chi=fc.dual_chi(m.chi), sign=m.sign)


def fusion_rule(fc: FusionContext, m1: IrreducibleModule, m2: IrreducibleModule,
                m3: IrreducibleModule) -> int:
    for m in (m1, m2, m3):
        fc.index(m)
    t = sum(m.twisted for m in (m1, m2, m3))
    if t in (1, 3):
        return 0
    if m1.twisted:
        if not m2.twisted:
            # N(M1, M2; M3) = N(M2, M1; M3)
            m1, m2 = m2, m1
        else:
            # M3 untwisted: N(M1, M2; M3) = N(M1, M3'; M2') = N(M3', M1; M2')
            m1, m2, m3 = contragredient(fc, m3), m1, contragredient(fc, m2)
    return _rule_untwisted_first(fc, m1, m2, m3)


def _rule_untwisted_first(fc, m1, m2, m3) -> int:
    lam = m1.coset
    if m2.twisted:
        if fc.twist(m2.chi, lam) != m3.chi:
            return 0
        if m1.kind == "pair":
            return 1
        return int(m1.sign * m2.sign * m3.sign == fc.c(m2.chi, lam))
    if not admissible_mod_lattice(fc.lattice, lam, m2.coset, m3.coset):
        return 0
    if m1.kind == "pair" or m2.kind == "pair":
        # admissibility already forces the remaining label type
        return 1
    return int(m1.sign * m2.sign * m3.sign == fc.pi2(lam, m2.coset))


def fuse(fc: FusionContext, m1: IrreducibleModule, m2: IrreducibleModule) -> FusionElement:
    return FusionElement.of({m: fusion_rule(fc, m1, m2, m) for m in fc.modules})


def fusion_table(fc: FusionContext) -> list[list[list[int]]]:
    mods = fc.modules
    return [[[fusion_rule(fc, a, b, c) for c in mods] for b in mods] for a in mods]


# closed-form products

def _coset_class(fc: FusionContext, x: Vec) -> FusionElement:
    """[x]: the pair module, or [x]+ + [x]- when 2x lies in L."""
    L = fc.lattice
    c = canonical_coset(L, x)
    if c in fc.two_torsion:
        return FusionElement.of([IrreducibleModule("signed", c, sign=1),
                                 IrreducibleModule("signed", c, sign=-1)])
    return FusionElement.of([IrreducibleModule("pair", canonical_pm_coset(L, x))])


def _signed(fc, x, s) -> IrreducibleModule:
    return IrreducibleModule("signed", canonical_coset(fc.lattice, x), sign=s)


def _tw(chi, s) -> IrreducibleModule:
    return IrreducibleModule("twisted", chi=chi, sign=s)


def closed_form_product(fc: FusionContext, a: IrreducibleModule, b: IrreducibleModule) -> FusionElement | None:
    """Product formulas written in terms of pi, c_chi and chi^{(lambda)}.

    Returns None for pairs not covered by a listed formula (or its swap).
    """
    L = fc.lattice
    if a.twisted and not b.twisted:
        return closed_form_product(fc, b, a)
    if not a.twisted and not b.twisted:
        lam, mu = a.coset, b.coset
        if a.kind == "pair" and b.kind == "pair":
            return _coset_class(fc, add(lam, mu)) + _coset_class(fc, sub(lam, mu))
        if a.kind == "pair" or b.kind == "pair":
            return _coset_class(fc, add(lam, mu))
        p = fc.pi2(lam, mu)
        if a.sign == 1:
            return FusionElement.of([_signed(fc, add(lam, mu), b.sign * p)])
        if b.sign == 1:
            return FusionElement.of([_signed(fc, add(lam, mu), a.sign * fc.pi2(mu, lam))])
        return FusionElement.of([_signed(fc, add(lam, mu), p)])
    if not a.twisted and b.twisted:
        lam = a.coset
        chi = fc.twist(b.chi, lam)
        if a.kind == "pair":
            return FusionElement.of([_tw(chi, 1), _tw(chi, -1)])
        c = fc.c(b.chi, lam)
        if a.sign == 1:
            return FusionElement.of([_tw(chi, b.sign * c)])
        if b.sign == -1:
            return FusionElement.of([_tw(chi, c)])
        return None
    if a.sign == 1 and b.sign == 1:
        target = fc.dual_chi(b.chi)
        out: dict[IrreducibleModule, int] = {}
        for x in fc.cosets:
            if fc.twist(a.chi, x) != target:
                continue
            if x in fc.two_torsion:
                s = fc.c(a.chi, x) * (-1) ** int(2 * norm(L, x))
                out[_signed(fc, x, s)] = 1
            else:
                out[IrreducibleModule("pair", canonical_pm_coset(L, x))] = 1
        return FusionElement.of(out)
    return None


# verification

def _fmt(*ms) -> str:
    return "(" + ", ".join(m.name for m in ms) + ")"


def verify_algebra(fc: FusionContext, assoc: bool = True, duality: bool = True,
                   closed_forms: bool = True) -> list[Check]:
    mods = fc.modules
    n = len(mods)
    N = fusion_table(fc)
    dual = [fc.index(contragredient(fc, m)) for m in mods]
    checks = []

    bad = next(((i, j, k) for i, j, k in itertools.product(range(n), repeat=3)
                if N[i][j][k] not in (0, 1)), None)
    checks.append(Check("zero-one", bad is None, n ** 3,
                        None if bad is None else _fmt(*(mods[t] for t in bad))))

    bad = next(((i, j, k) for i, j, k in itertools.product(range(n), repeat=3)
                if N[i][j][k] != N[j][i][k]), None)
    checks.append(Check("commutativity", bad is None, n ** 3,
                        None if bad is None else _fmt(*(mods[t] for t in bad))))

    if assoc:
        bad = None
        for i, j, k, l in itertools.product(range(n), repeat=4):
            lhs = sum(N[i][j][m] * N[m][k][l] for m in range(n))
            rhs = sum(N[j][k][m] * N[i][m][l] for m in range(n))
            if lhs != rhs:
                bad = (i, j, k, l)
                break
        checks.append(Check("associativity", bad is None, n ** 4,
                            None if bad is None else _fmt(*(mods[t] for t in bad))))

    if duality:
        bad = next(((i, j, k) for i, j, k in itertools.product(range(n), repeat=3)
                    if N[i][j][k] != N[i][dual[k]][dual[j]]), None)
        checks.append(Check("duality", bad is None, n ** 3,
                            None if bad is None else _fmt(*(mods[t] for t in bad))))

    unit = fc.index(fc.vl_plus)
    bad = next(((j, k) for j, k in itertools.product(range(n), repeat=2)
                if N[unit][j][k] != int(j == k)), None)
    checks.append(Check("unit", bad is None, n * n,
                        None if bad is None else _fmt(mods[unit], *(mods[t] for t in bad))))

    if closed_forms:
        bad, count = None, 0
        for a, b in itertools.product(mods, repeat=2):
            expected = closed_form_product(fc, a, b)
            if expected is None:
                continue
            count += 1
            got = FusionElement.of({mods[k]: N[fc.index(a)][fc.index(b)][k] for k in range(n)})
            if got != expected:
                bad = f"{a.name} x {b.name}: table {got}, formula {expected}"
                break
        checks.append(Check("closed-forms", bad is None, count, bad))

    empty = next(((i, j) for i, j in itertools.product(range(n), repeat=2) if not any(N[i][j])), None)
    checks.append(Check("nonempty-products", empty is None, n * n,
                        None if empty is None else _fmt(*(mods[t] for t in empty))))
    return checks


def unimodular_report(fc: FusionContext) -> dict:
    L = fc.lattice
    if L.det != 1:
        raise NotUnimodular(f"NotUnimodular: det G = {L.det}")
    d = L.rank
    if d % 8:
        raise NotUnimodular(f"even unimodular lattice of rank {d} not divisible by 8")
    weights = {1: Fraction(d, 16), -1: Fraction(1, 2) + Fraction(d, 16)}
    even_sign = 1 if (d // 8) % 2 == 0 else -1
    t_even = _tw(0, even_sign)
    t_odd = _tw(0, -even_sign)
    vm = IrreducibleModule("signed", L.zero(), sign=-1)
    vp = fc.vl_plus
    table = {(a.name, b.name): str(fuse(fc, a, b)) for a in fc.modules for b in fc.modules}
    expected = {
        (vm, vm): vp, (vm, t_even): t_odd, (vm, t_odd): t_even,
        (t_even, t_even): vp, (t_odd, t_odd): vp, (t_even, t_odd): vm,
    }
    mismatches = []
    for (a, b), c in expected.items():
        for x, y in ((a, b), (b, a)):
            got = fuse(fc, x, y)
            if got != FusionElement.of([c]):
                mismatches.append(f"{x.name} x {y.name} = {got}, expected {c.name}")
    return {
        "unimodular": True,
        "rank": d,
        "modules": [m.name for m in fc.modules],
        "twisted_lowest_weights": {"T0+": str(weights[1]), "T0-": str(weights[-1])},
        "integral_twisted": t_even.name,
        "half_integral_twisted": t_odd.name,
        "twisted_dimension": str(twisted_dimension(L, fc.characters.radical)),
        "table": {f"{a} x {b}": v for (a, b), v in table.items()},
        "table_matches": not mismatches,
        "mismatches": mismatches,
    }
