"""Command-line entry point ``voa-fusion``.

Exit codes: 0 all checks pass, 1 a verification failed, 2 bad input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import fock
from .cocycle import build_context, cocycle_law_checks
from .lattice import (
    Check, Lattice, LatticeError, enumerate_cosets, format_rational, format_vector, parse_rational,
    parse_vector, preset, validate_lattice, vec,
)
from .m1_fusion import bilinear_space, fuse_m1, fusion_rule_m1, parse_m1
from .twisted import character_law_checks, twisted_dimension
from .vl_fusion import (
    FusionContext, build_fusion_context, contragredient, det_bound_from_env, expected_module_count,
    fuse, fusion_rule, fusion_table, parse_module, unimodular_report, verify_algebra,
)

SCHEMA = "voa-fusion/1"
DEFAULT_CORPUS = ("A1", "A1(2)", "A2", "A1+A1", "E8")


class InputError(Exception):
    pass


@dataclass
class Report:
    command: str
    lattice: dict | None = None
    checks: list[Check] = field(default_factory=list)
    result: object = None
    text: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def as_dict(self) -> dict:
        failed = [c.name for c in self.checks if not c.passed]
        d: dict = {"schema": SCHEMA, "command": self.command}
        if self.lattice is not None:
            d["lattice"] = self.lattice
        if self.result is not None:
            d["result"] = self.result
        d["checks"] = [c.as_dict() for c in self.checks]
        d["summary"] = {"passed": not failed, "total": len(self.checks), "failed": failed}
        return d

    def render_text(self) -> str:
        lines = list(self.text)
        for c in self.checks:
            line = f"{'PASS' if c.passed else 'FAIL'} {c.name} ({c.checked} checked)"
            if not c.passed and c.witness:
                line += f": {c.witness}"
            lines.append(line)
        return "\n".join(lines)


# input

def _load_json_source(text: str):
    if text.lstrip().startswith(("[", "{")):
        try:
            return json.loads(text)
        except json.JSONDecodeError as e:
            raise InputError(f"invalid inline JSON {text!r}: {e}") from None
    if os.path.isfile(text):
        try:
            with open(text) as f:
                return json.load(f)
        except json.JSONDecodeError as e:
            raise InputError(f"invalid JSON in {text!r}: {e}") from None
    return None


def _json_matrix(obj, key: str, source: str):
    if isinstance(obj, dict):
        if key not in obj:
            raise InputError(f"{source!r}: expected a JSON object with key {key!r}")
        obj = obj[key]
    if not isinstance(obj, list) or not all(isinstance(r, list) for r in obj):
        raise InputError(f"{source!r}: expected a matrix")
    return obj


def load_lattice(source: str) -> Lattice:
    """A preset name, an inline JSON matrix or object, or a path to {"gram": ...}."""
    obj = _load_json_source(source)
    if obj is None:
        try:
            return preset(source)
        except LatticeError:
            raise InputError(f"unknown lattice {source!r}: not a preset, JSON or file") from None
    return validate_lattice(_json_matrix(obj, "gram", source))


def _rational_entry(x, source: str) -> Fraction:
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return parse_rational(x)
        except LatticeError:
            pass
    raise InputError(f"{source!r}: entries must be integers or rational strings, got {x!r}")


def load_form(source: str, key: str = "form"):
    """A rational form: preset lattice name, inline JSON, or a file with key form or gram."""
    obj = _load_json_source(source)
    if obj is None:
        try:
            return bilinear_space(preset(source).gram)
        except LatticeError:
            raise InputError(f"unknown form {source!r}: not a preset, JSON or file") from None
    if isinstance(obj, dict) and key not in obj and "gram" in obj:
        key = "gram"
    rows = _json_matrix(obj, key, source)
    return bilinear_space([[_rational_entry(x, source) for x in r] for r in rows])


def _det_bound(args) -> int:
    return args.det_bound if args.det_bound is not None else det_bound_from_env()


def _context(args) -> FusionContext:
    return build_fusion_context(load_lattice(args.lattice), _det_bound(args))


def _echo(fc: FusionContext) -> dict:
    L = fc.lattice
    return {"gram": [list(r) for r in L.gram], "det": L.det, "q": fc.cocycle.q}


# commands

def cmd_classify(args) -> Report:
    fc = _context(args)
    mods = fc.modules
    expected = expected_module_count(fc.lattice)
    rows = []
    for m in mods:
        row = {"name": m.name, "kind": m.kind}
        if m.kind != "twisted":
            row["coset"] = format_vector(m.coset)
        rows.append(row)
    r = Report("classify", _echo(fc), result={"count": len(mods), "modules": rows})
    r.checks.append(Check("module-count", len(mods) == expected, 1,
                          None if len(mods) == expected else f"{len(mods)} != {expected}"))
    r.text = [f"{len(mods)} irreducible modules"] + [m.name for m in mods]
    return r


def cmd_rule(args) -> Report:
    fc = _context(args)
    m1, m2, m3 = (parse_module(fc, t) for t in args.modules)
    n = fusion_rule(fc, m1, m2, m3)
    return Report("rule", _echo(fc), result={"modules": [m1.name, m2.name, m3.name], "rule": n},
                  text=[str(n)])


def cmd_fuse(args) -> Report:
    fc = _context(args)
    m1, m2 = (parse_module(fc, t) for t in args.modules)
    prod = fuse(fc, m1, m2)
    return Report("fuse", _echo(fc), result={"modules": [m1.name, m2.name], "product": str(prod),
                                             "terms": [m.name for m, _ in prod.terms]},
                  text=[str(prod)])


def cmd_table(args) -> Report:
    fc = _context(args)
    names = [m.name for m in fc.modules]
    N = fusion_table(fc)
    products = {}
    text = []
    for i, a in enumerate(fc.modules):
        for j, b in enumerate(fc.modules):
            p = " + ".join(names[k] for k in range(len(names)) if N[i][j][k]) or "0"
            products[f"{a.name} x {b.name}"] = p
            text.append(f"{a.name} x {b.name} = {p}")
    return Report("table", _echo(fc), result={"modules": names, "products": products, "N": N},
                  text=text)


def cmd_verify(args) -> Report:
    fc = _context(args)
    selected = args.assoc or args.duality or args.closed_forms
    checks = verify_algebra(fc, assoc=args.assoc or not selected, duality=args.duality or not selected,
                            closed_forms=args.closed_forms or not selected)
    return Report("verify", _echo(fc), checks)


def cmd_contragredient(args) -> Report:
    fc = _context(args)
    m = parse_module(fc, args.module)
    d = contragredient(fc, m)
    return Report("contragredient", _echo(fc), result={"module": m.name, "contragredient": d.name},
                  text=[d.name])


def cmd_unimodular(args) -> Report:
    fc = _context(args)
    rep = unimodular_report(fc)
    r = Report("unimodular-report", _echo(fc), result=rep)
    r.checks.append(Check("module-count", len(fc.modules) == 4, 1,
                          None if len(fc.modules) == 4 else f"{len(fc.modules)} modules"))
    r.checks.append(Check("table", rep["table_matches"], len(rep["table"]),
                          "; ".join(rep["mismatches"]) or None))
    r.text = [f"modules: {' '.join(rep['modules'])}",
              f"twisted lowest weights: T0+ {rep['twisted_lowest_weights']['T0+']}, "
              f"T0- {rep['twisted_lowest_weights']['T0-']}",
              f"integral-weight twisted module: {rep['integral_twisted']}"]
    r.text += [f"{k} = {v}" for k, v in rep["table"].items()]
    return r


def cmd_cocycle_info(args) -> Report:
    L = load_lattice(args.lattice)
    ctx = build_context(L)
    res = {"q": ctx.q, "eps0": [list(r) for r in ctx.eps0],
           "basis": [format_vector(b) for b in ctx.basis]}
    r = Report("cocycle-info", {"gram": [list(x) for x in L.gram], "det": L.det, "q": ctx.q}, result=res)
    r.text = [f"q = {ctx.q}"] + [" ".join(str(x) for x in row) for row in ctx.eps0]
    return r


def cmd_characters(args) -> Report:
    fc = _context(args)
    T = fc.characters
    R = T.radical
    res = {
        "modulus": T.ctx.modulus,
        "generators": [format_vector(vec(g)) for g in R.generators],
        "twisted_dimension": format_rational(twisted_dimension(fc.lattice, R)),
        "characters": [{"index": c.index, "name": c.name, "values": list(c.values)} for c in T.characters],
    }
    r = Report("characters", _echo(fc), result=res)
    r.text = [f"generators of R/2L: {', '.join(res['generators']) or '(none)'}",
              f"values are exponents of exp(2 pi i / {T.ctx.modulus})"]
    r.text += [f"{c.name}: {' '.join(str(v) for v in c.values)}" for c in T.characters]
    return r


def cmd_m1(args) -> Report:
    S = load_form(args.form)
    mods = [parse_m1(t, S.dim) for t in args.modules]
    echo = {"form": [[format_rational(x) for x in r] for r in S.form]}
    if args.action == "rule":
        if len(mods) != 3:
            raise InputError("m1 rule needs three module names")
        n = fusion_rule_m1(S, *mods)
        return Report("m1 rule", echo, result={"modules": [m.name for m in mods], "rule": n}, text=[str(n)])
    if len(mods) != 2:
        raise InputError("m1 fuse needs two module names")
    sup = fuse_m1(S, *mods)
    return Report("m1 fuse", echo, result={"modules": [m.name for m in mods],
                                           "finite": [m.name for m in sup.finite],
                                           "momentum_family": sup.momentum_family,
                                           "product": str(sup)}, text=[str(sup)])


def cmd_fock_delta(args) -> Report:
    if args.cutoff < 0:
        raise InputError("--cutoff must be non-negative")
    c = fock.delta_coeffs(args.cutoff)
    rows = [{"m": m, "n": n, "c": format_rational(v)} for (m, n), v in sorted(c.items())]
    bad = next((f"c_{m}{n}" for (m, n) in c if c[m, n] != c[n, m]), None)
    r = Report("fock delta", result={"cutoff": args.cutoff, "coefficients": rows})
    r.checks.append(Check("symmetry", bad is None, len(c), bad))
    r.text = [f"c[{x['m']},{x['n']}] = {x['c']}" for x in rows]
    return r


def cmd_fock_verify(args) -> Report:
    S = load_form(args.gram, key="gram")
    try:
        lam = parse_vector(args.lam)
    except LatticeError as e:
        raise InputError(f"--lambda {args.lam!r}: {e}") from None
    if len(lam) != S.dim:
        raise InputError(f"--lambda {args.lam!r}: expected {S.dim} coordinates")
    terms = fock.verify_expansions(S, lam)
    r = Report("fock verify", {"form": [[format_rational(x) for x in row] for row in S.form]},
               result={"lambda": format_vector(lam), "norm": format_rational(S.pair(lam, lam)),
                       "terms": [t.as_dict() for t in terms]})
    for t in terms:
        r.checks.append(Check(f"{t.name} z^{t.exponent}", t.passed, 1,
                              None if t.passed else f"expected {t.expected}, actual {t.actual}"))
    return r


def corpus_run(sources: Sequence[str], det_bound: int | None = None,
               assoc: bool = True) -> tuple[list[dict], list[Check]]:
    """verify_algebra plus cocycle and character laws on each lattice; over-bound lattices are skipped."""
    bound = det_bound_from_env() if det_bound is None else det_bound
    entries, checks = [], []
    for src in sources:
        L = load_lattice(src)
        if L.det > bound:
            entries.append({"source": src, "skipped": f"det {L.det} exceeds bound {bound}"})
            continue
        fc = build_fusion_context(L, bound)
        local = verify_algebra(fc, assoc=assoc)
        local += cocycle_law_checks(fc.cocycle, radius=3 if L.rank <= 8 else 1)
        local += character_law_checks(fc.characters, enumerate_cosets(L), 1)
        for c in local:
            checks.append(Check(f"{src}: {c.name}", c.passed, c.checked, c.witness))
        entries.append({"source": src, "modules": len(fc.modules),
                        "passed": all(c.passed for c in local)})
    return entries, checks


def cmd_corpus(args) -> Report:
    sources = args.sources or list(DEFAULT_CORPUS)
    entries, checks = corpus_run(sources, _det_bound(args), assoc=not args.no_assoc)
    r = Report("corpus", checks=checks, result={"entries": entries})
    r.text = [f"{e['source']}: skipped ({e['skipped']})" if "skipped" in e else
              f"{e['source']}: {'pass' if e['passed'] else 'FAIL'} ({e['modules']} modules)"
              for e in entries]
    return r


# parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    lat = argparse.ArgumentParser(add_help=False)
    lat.add_argument("--lattice", required=True,
                     help='preset (A1, A2, A1+A1, A1(k), E8), inline JSON or a {"gram": ...} file')
    lat.add_argument("--det-bound", type=int, default=None,
                     help="refuse lattices with larger determinant (default $VOA_FUSION_DET_BOUND or 10000)")

    p = argparse.ArgumentParser(prog="voa-fusion", description="Fusion rules for lattice orbifold VOAs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common, lat], help="list irreducible modules")
    s.set_defaults(func=cmd_classify)
    s = sub.add_parser("rule", parents=[common, lat], help="fusion rule N(M1, M2; M3)")
    s.add_argument("modules", nargs=3, metavar="M")
    s.set_defaults(func=cmd_rule)
    s = sub.add_parser("fuse", parents=[common, lat], help="fusion product M1 x M2")
    s.add_argument("modules", nargs=2, metavar="M")
    s.set_defaults(func=cmd_fuse)
    s = sub.add_parser("table", parents=[common, lat], help="full fusion table")
    s.set_defaults(func=cmd_table)
    s = sub.add_parser("verify", parents=[common, lat], help="check the fusion algebra axioms")
    s.add_argument("--assoc", action="store_true")
    s.add_argument("--duality", action="store_true")
    s.add_argument("--closed-forms", action="store_true")
    s.set_defaults(func=cmd_verify)
    s = sub.add_parser("contragredient", parents=[common, lat], help="contragredient module")
    s.add_argument("module", metavar="M")
    s.set_defaults(func=cmd_contragredient)
    s = sub.add_parser("unimodular-report", parents=[common, lat], help="table for even unimodular L")
    s.set_defaults(func=cmd_unimodular)
    s = sub.add_parser("cocycle-info", parents=[common, lat], help="q and the eps0 table")
    s.set_defaults(func=cmd_cocycle_info)
    s = sub.add_parser("characters", parents=[common, lat], help="central character table")
    s.set_defaults(func=cmd_characters)

    s = sub.add_parser("m1", parents=[common], help="fusion for M(1)^+ modules")
    s.add_argument("action", choices=("rule", "fuse"))
    s.add_argument("modules", nargs="+", metavar="M", help="M+, M-, M(l1,...), Mt+, Mt-")
    s.add_argument("--form", required=True, help='inline JSON or a {"form": ...} file')
    s.set_defaults(func=cmd_m1)

    s = sub.add_parser("fock", help="truncated Fock-space expansions")
    fsub = s.add_subparsers(dest="fock_command", required=True)
    f = fsub.add_parser("delta", parents=[common], help="Delta_z coefficients c_mn")
    f.add_argument("--cutoff", type=int, required=True)
    f.set_defaults(func=cmd_fock_delta)
    f = fsub.add_parser("verify", parents=[common], help="compare the twisted operator with closed forms")
    f.add_argument("--lambda", dest="lam", required=True, help='rational vector "a/b,..."')
    f.add_argument("--gram", required=True, help="preset, inline JSON or a file")
    f.set_defaults(func=cmd_fock_verify)

    s = sub.add_parser("corpus", parents=[common], help="run all invariant suites over lattices")
    s.add_argument("sources", nargs="*", help=f"presets or files (default: {' '.join(DEFAULT_CORPUS)})")
    s.add_argument("--det-bound", type=int, default=None)
    s.add_argument("--no-assoc", action="store_true", help="skip the quartic associativity sweep")
    s.set_defaults(func=cmd_corpus)
    return p


def _error_text(e: Exception) -> str:
    name = type(e).__name__
    msg = str(e)
    return msg if msg.startswith(name) or isinstance(e, InputError) else f"{name}: {msg}"


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        report = args.func(args)
    except (InputError, LatticeError) as e:
        print(f"error: {_error_text(e)}", file=sys.stderr)
        return 2
    if getattr(args, "json", False):
        print(json.dumps(report.as_dict(), indent=2))
    else:
        print(report.render_text())
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
