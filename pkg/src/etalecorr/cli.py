"""Command-line driver: ``etalecorr <command> ...``.

Exit codes: 0 when every check passes, 1 when a check fails, 2 when an
input cannot be read or does not validate. With ``--report PATH`` a JSON
report is written; it contains no timing, so reruns are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from fractions import Fraction
from typing import Any

import numpy as np

from . import serialize
from .bundles import (
    EquivariantCorrespondence,
    GCStarBundle,
    crossed_product_algebra,
    validate_bundle,
)
from .correspondence import (
    EtaleCorrespondence,
    canonical_cutoff,
    check_cutoff,
    compose,
    homomorphism_cutoff,
    indicator_cutoff,
    is_morita,
)
from .cstar import groupoid_algebra, k0, k0_map, validate_bimodule
from .groupoid import FiniteGroupoid, GroupoidAction
from .induction import induce_algebra, k_theory_routes, omega_crossed_product
from .invsemi import InverseSemigroup, filter_space
from .verify import SUITES, run_suite

PASS, FAIL, INPUT_ERROR = 0, 1, 2


class Outcome:
    """Accumulates the machine report and the human text of one command."""

    def __init__(self, command: str):
        self.data: dict[str, Any] = {"command": command, "checks": []}
        self.lines: list[str] = []

    def say(self, line: str = "") -> None:
        self.lines.append(line)

    def check(self, name: str, passed: bool, witness: Any = None) -> bool:
        entry = {"property": name, "passed": bool(passed)}
        if witness is not None:
            entry["witness"] = witness
        self.data["checks"].append(entry)
        self.say(f"  [{'PASS' if passed else 'FAIL'}] {name}" + ("" if witness is None or passed else f": {witness}"))
        return passed

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.data["checks"])


# -- summaries -----------------------------------------------------------------------------


def summary(obj) -> dict:
    if isinstance(obj, FiniteGroupoid):
        return {"kind": "groupoid", "arrows": obj.arrow_count, "units": len(obj.units)}
    if isinstance(obj, GroupoidAction):
        return {"kind": "action", "groupoid": summary(obj.groupoid), "points": obj.point_count}
    if isinstance(obj, EtaleCorrespondence):
        return {"kind": "correspondence", "G": summary(obj.G), "H": summary(obj.H), "points": obj.point_count}
    if isinstance(obj, InverseSemigroup):
        return {"kind": "inverse_semigroup", "elements": obj.element_count}
    if isinstance(obj, GCStarBundle):
        return {"kind": "bundle", "groupoid": summary(obj.groupoid),
                "fibre_dimensions": {str(u): A.dimension for u, A in sorted(obj.fibres.items())}}
    if isinstance(obj, EquivariantCorrespondence):
        return {"kind": "equivariant_correspondence", "left": summary(obj.left), "right": summary(obj.right),
                "fibre_dimensions": {str(u): E.dimension for u, E in sorted(obj.fibres.items())}}
    if isinstance(obj, serialize.Suite):
        return {"kind": "suite", "suites": list(obj.suites), "seed": obj.seed}
    return {"kind": type(obj).__name__}


def _fmt(d: dict) -> str:
    return ", ".join(f"{k}={v}" for k, v in d.items() if not isinstance(v, dict))


def _matrix_text(M: list[list[int]]) -> list[str]:
    if not M or not M[0]:
        return ["  []"]
    width = max(len(str(v)) for row in M for v in row)
    return ["  [" + " ".join(str(v).rjust(width) for v in row) + "]" for row in M]


def _load(path: str, expect: str | tuple[str, ...] | None = None):
    obj = serialize.load(path)
    kinds = (expect,) if isinstance(expect, str) else expect
    if kinds and summary(obj)["kind"] not in kinds:
        raise serialize.InstanceError(f"expected {' or '.join(kinds)}, found {summary(obj)['kind']}", path)
    return obj


# -- commands ------------------------------------------------------------------------------


def cmd_validate(args, out: Outcome) -> None:
    try:
        obj = serialize.load(args.file)
    except serialize.InstanceError as exc:
        if exc.report is None:
            raise
        out.data["input"] = args.file
        out.say(f"{args.file}: invalid")
        for v in exc.report.violations:
            out.check(v.axiom, False, None if v.witness is None else str(v.witness))
        out.data["location"] = {"field": exc.field, "line": exc.line}
        out.say(f"  while reading {exc.field} (line {exc.line})")
        return
    out.data["input"] = summary(obj)
    out.say(f"{args.file}: {_fmt(summary(obj))}")
    out.check("instance satisfies its axioms", True)
    if isinstance(obj, InverseSemigroup):
        out.data["filters"] = len(filter_space(obj).filters)


def cmd_compose(args, out: Outcome) -> None:
    omega, lam = _load(args.omega, "correspondence"), _load(args.lam, "correspondence")
    if omega.H != lam.G:
        raise serialize.InstanceError("the middle groupoids differ", args.lam)
    c = compose(omega, lam)
    out.data["composite"] = summary(c)
    out.say(f"composite: {_fmt(summary(c))}")
    if args.output:
        serialize.dump(c, args.output)
        out.say(f"written to {args.output}")
    out.check("composite is a correspondence", True)


def cmd_morita(args, out: Outcome) -> None:
    omega = _load(args.omega, "correspondence")
    m = is_morita(omega)
    out.data["input"] = summary(omega)
    out.data["morita"] = m.morita
    out.say("Morita equivalence" if m.morita else "not Morita")
    out.check("bispace is a Morita equivalence", m.morita, m.reason)
    if m.morita:
        out.say(f"  {m.reason}")


def cmd_k0(args, out: Outcome) -> None:
    obj = _load(args.file, ("groupoid", "bundle"))
    A = groupoid_algebra(obj) if isinstance(obj, FiniteGroupoid) else crossed_product_algebra(obj)
    data = k0(A)
    out.data["input"] = summary(obj)
    out.data["k0"] = {"rank": data.rank, "block_dimensions": list(data.block_dims), "k1": data.k1}
    out.say(f"algebra dimension {A.dimension}")
    out.say(f"K0 = Z^{data.rank}, blocks {list(data.block_dims)}, K1 = 0")
    out.check("block dimensions account for the algebra",
              sum(n * n for n in data.block_dims) == A.dimension, list(data.block_dims))


def cmd_kmap(args, out: Outcome) -> None:
    omega = _load(args.omega, "correspondence")
    r = k_theory_routes(omega)
    out.data["input"] = summary(omega)
    out.data["k0_map"] = r.direct.tolist()
    out.say("K0 map (columns: blocks of C*(G), rows: blocks of C*(H)):")
    out.lines += _matrix_text(r.direct.tolist())
    out.check("factored and direct K0 maps agree", r.agree,
              {"factored": r.factored.tolist(), "direct": r.direct.tolist()})


def _fractions(c) -> list[str]:
    return [str(Fraction(v)) for v in c.values]


def cmd_cutoff(args, out: Outcome) -> None:
    omega = _load(args.omega, "correspondence")
    out.data["input"] = summary(omega)
    cutoffs = {"canonical": canonical_cutoff(omega), "indicator": indicator_cutoff(omega)}
    try:
        cutoffs["homomorphism"] = homomorphism_cutoff(omega)
    except ValueError:
        pass
    out.data["cutoffs"] = {}
    for name, c in cutoffs.items():
        out.data["cutoffs"][name] = _fractions(c)
        out.say(f"{name}: {' '.join(_fractions(c))}")
        r = check_cutoff(omega, c)
        out.check(f"{name} cutoff sums to one on every orbit", r.ok, [str(v) for v in r.violations] or None)


def cmd_induce(args, out: Outcome) -> None:
    omega = _load(args.omega, "correspondence")
    B = _load(args.bundle, "bundle")
    if B.groupoid != omega.H:
        raise serialize.InstanceError("the bundle does not live over the right groupoid", args.bundle)
    A = induce_algebra(omega, B)
    dims = {str(x): A.fibres[x].dimension for x in sorted(A.fibres)}
    out.data["input"] = {"omega": summary(omega), "bundle": summary(B)}
    out.data["induced_fibre_dimensions"] = dims
    out.say(f"induced fibre dimensions: {_fmt(dims)}")
    r = validate_bundle(A, args.tolerance)
    out.check("induced bundle is a G-C*-bundle", r.ok, [str(v) for v in r.violations] or None)
    kd = k0(crossed_product_algebra(A))
    out.data["k0"] = {"rank": kd.rank, "block_dimensions": list(kd.block_dims)}
    out.say(f"K0 of the crossed product: Z^{kd.rank}, blocks {list(kd.block_dims)}")
    if args.output:
        serialize.dump(A if type(A) is GCStarBundle else GCStarBundle(A.groupoid, A.fibres, A.maps), args.output)


def cmd_crossprod(args, out: Outcome) -> None:
    omega = _load(args.omega, "correspondence")
    E = _load(args.correspondence, "equivariant_correspondence")
    if E.groupoid != omega.H:
        raise serialize.InstanceError("the correspondence does not live over the right groupoid", args.correspondence)
    M = omega_crossed_product(omega, E)
    out.data["input"] = {"omega": summary(omega), "correspondence": summary(E)}
    out.data["dimension"] = M.dimension
    out.say(f"module dimension {M.dimension}, left dim {M.left.dimension}, right dim {M.right.dimension}")
    r = validate_bimodule(M, args.tolerance, seed=args.seed)
    out.check("crossed product is a correspondence", r.ok, [str(v) for v in r.violations] or None)
    if r.ok:
        K = k0_map(M).tolist()
        out.data["k0_map"] = K
        out.say("K0 map:")
        out.lines += _matrix_text(K)


def cmd_verify(args, out: Outcome) -> None:
    if args.all:
        names = list(SUITES)
    elif args.suite in SUITES:
        names = [args.suite]
    elif args.suite:
        obj = _load(args.suite, "suite")
        names = list(obj.suites)
        args.seed, args.tolerance, args.max_size = obj.seed, obj.tolerance, obj.max_size
    else:
        raise serialize.InstanceError(f"give a suite name ({', '.join(SUITES)}), a suite file or --all")
    out.data["settings"] = {"seed": args.seed, "tolerance": args.tolerance, "max_size": args.max_size}
    out.data["suites"] = []
    for name in names:
        start = time.perf_counter()
        res = run_suite(name, args.seed, args.tolerance, args.max_size)
        elapsed = time.perf_counter() - start
        out.data["suites"].append(res.to_dict())
        out.check(f"{name}: {res.title}", res.passed,
                  {"instances": len(res.cases), "failures": [c.to_dict() for c in res.failures[:5]]})
        out.say(f"         {len(res.cases)} instances, {len(res.failures)} failures, {elapsed:.2f}s")


COMMANDS = {
    "validate": cmd_validate, "compose": cmd_compose, "morita": cmd_morita, "k0": cmd_k0,
    "kmap": cmd_kmap, "cutoff": cmd_cutoff, "induce": cmd_induce, "crossprod": cmd_crossprod,
    "verify": cmd_verify,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--tolerance", type=float, default=1e-8, help="numerical tolerance (default 1e-8)")
    common.add_argument("--max-size", type=int, default=8, help="largest generated bispace (default 8)")
    common.add_argument("--report", metavar="PATH", help="write a JSON report to PATH")

    p = argparse.ArgumentParser(prog="etalecorr", description="Correspondences of finite groupoids and their K-theory.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("validate", parents=[common], help="parse and validate an instance file")
    s.add_argument("file")
    s = sub.add_parser("compose", parents=[common], help="compose two correspondences")
    s.add_argument("omega")
    s.add_argument("lam", metavar="lambda")
    s.add_argument("-o", "--output", help="write the composite to this file")
    s = sub.add_parser("morita", parents=[common], help="decide whether a bispace is a Morita equivalence")
    s.add_argument("omega")
    s = sub.add_parser("k0", parents=[common], help="K0 of C*(G) or of a crossed product")
    s.add_argument("file")
    s = sub.add_parser("kmap", parents=[common], help="the integer K0 map of a correspondence")
    s.add_argument("omega")
    s = sub.add_parser("cutoff", parents=[common], help="cutoff functions of a correspondence")
    s.add_argument("omega")
    s = sub.add_parser("induce", parents=[common], help="induce a bundle along a correspondence")
    s.add_argument("omega")
    s.add_argument("bundle")
    s.add_argument("-o", "--output", help="write the induced bundle to this file")
    s = sub.add_parser("crossprod", parents=[common], help="the crossed-product module of an equivariant correspondence")
    s.add_argument("omega")
    s.add_argument("correspondence")
    s = sub.add_parser("verify", parents=[common], help="run property suites")
    s.add_argument("suite", nargs="?", help=f"one of {', '.join(SUITES)}, or a suite file")
    s.add_argument("--all", action="store_true", help="run every suite")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    out = Outcome(args.command)
    start = time.perf_counter()
    try:
        COMMANDS[args.command](args, out)
        code = PASS if out.passed else FAIL
    except serialize.InstanceError as exc:
        out.data["error"] = {"message": exc.message, "file": exc.path, "field": exc.field, "line": exc.line}
        out.say(f"input error: {exc}")
        code = INPUT_ERROR
    out.data["exit_code"] = code
    out.data["passed"] = code == PASS
    elapsed = time.perf_counter() - start
    print("\n".join(out.lines))
    print(f"{('PASS', 'FAIL', 'INPUT ERROR')[code]} ({elapsed:.2f}s)")
    if args.report:
        with open(args.report, "w") as fh:
            json.dump(out.data, fh, indent=1, sort_keys=True, default=_json_default)
            fh.write("\n")
    return code


def _json_default(x):
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (set, frozenset, tuple)):
        return list(x)
    return str(x)


if __name__ == "__main__":
    sys.exit(main())
