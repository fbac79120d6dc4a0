"""JSON instance files.

Every file is one object with ``format_version`` and ``kind``. Nested
objects are written inline or as a string holding a path relative to the
file that mentions it. Complex arrays are nested lists of reals, or
``{"re": ..., "im": ...}`` when some entry has an imaginary part.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .bundles import (
    EquivariantCorrespondence,
    GCStarBundle,
    column_bundle,
    endomorphism_bundle,
    function_bundle,
    identity_correspondence_bundle,
    row_bundle,
    trivial_bundle,
    validate_bundle,
    validate_equivariant_correspondence,
)
from .correspondence import (
    EtaleCorrespondence,
    action_correspondence,
    compose,
    from_homomorphism,
    identity_correspondence,
    validate_correspondence,
)
from .cstar import FinDimCStarAlgebra, HilbertBimodule
from .groupoid import FiniteGroupoid, GroupoidAction, validate_action, validate_groupoid
from .groups import catalog
from .invsemi import InverseSemigroup, validate_semigroup
from .report import Report

__all__ = [
    "FORMAT_VERSION", "KINDS", "InstanceError", "Suite",
    "parse_instance", "load", "loads", "dump", "dumps", "to_data", "from_data",
]

FORMAT_VERSION = 1
KINDS = ("groupoid", "action", "correspondence", "inverse_semigroup", "bundle",
         "equivariant_correspondence", "suite")


class InstanceError(ValueError):
    """Malformed or invalid instance file. ``field`` is a JSON path such as
    ``$.comp[2][1]`` and ``line`` the best guess at where it sits."""

    def __init__(self, message: str, path: str | None = None, field: str | None = None,
                 line: int | None = None, report: Report | None = None):
        self.message, self.path, self.field, self.line, self.report = message, path, field, line, report
        where = ":".join(str(p) for p in (path, line) if p is not None)
        at = f" at {field}" if field else ""
        super().__init__(f"{where + ': ' if where else ''}{message}{at}")


class Suite:
    """A batch of verification suites to run with fixed settings."""

    def __init__(self, suites, seed: int = 0, tolerance: float = 1e-8, max_size: int = 8):
        self.suites, self.seed, self.tolerance, self.max_size = tuple(suites), seed, tolerance, max_size

    def __eq__(self, other):
        return isinstance(other, Suite) and vars(self) == vars(other)

    def __repr__(self):
        return f"Suite({list(self.suites)}, seed={self.seed})"


# -- arrays ------------------------------------------------------------------------------


def _array_out(a: np.ndarray):
    a = np.asarray(a)
    if np.iscomplexobj(a) and np.any(a.imag):
        return {"re": a.real.tolist(), "im": a.imag.tolist(), "shape": list(a.shape)}
    return {"re": np.real(a).tolist(), "shape": list(a.shape)}


def _labels_out(labels):
    if labels is None:
        return None
    try:
        json.dumps(labels)
    except TypeError:
        return None
    return labels


def _tuplify(x):
    return tuple(_tuplify(y) for y in x) if isinstance(x, list) else x


# -- writing -----------------------------------------------------------------------------


def to_data(obj) -> dict:
    """The JSON-ready dictionary for a constructible object."""
    body = _body(obj)
    return {"format_version": FORMAT_VERSION, **body}


def _body(obj) -> dict:
    if isinstance(obj, FiniteGroupoid):
        d = {"kind": "groupoid", "units": list(obj.units), "src": list(obj.src), "rng": list(obj.rng),
             "inv": list(obj.inv), "comp": [list(r) for r in obj.comp]}
        return _with_labels(d, obj.labels)
    if isinstance(obj, GroupoidAction):
        return {"kind": "action", "groupoid": _body(obj.groupoid), "point_count": obj.point_count,
                "anchor": list(obj.anchor), "act": [list(r) for r in obj.act]}
    if isinstance(obj, EtaleCorrespondence):
        d = {"kind": "correspondence", "G": _body(obj.G), "H": _body(obj.H), "point_count": obj.point_count,
             "rho": list(obj.rho), "sigma": list(obj.sigma),
             "left": [list(r) for r in obj.left.act], "right": [list(r) for r in obj.right.act]}
        return _with_labels(d, obj.labels)
    if isinstance(obj, InverseSemigroup):
        d = {"kind": "inverse_semigroup", "mul": [list(r) for r in obj.mul], "star": list(obj.star)}
        return _with_labels(d, obj.labels)
    if isinstance(obj, GCStarBundle):
        return {"kind": "bundle", "groupoid": _body(obj.groupoid),
                "fibres": {str(u): _algebra(A) for u, A in sorted(obj.fibres.items())},
                "maps": [_array_out(m) for m in obj.maps]}
    if isinstance(obj, EquivariantCorrespondence):
        return {"kind": "equivariant_correspondence", "left": _body(obj.left), "right": _body(obj.right),
                "fibres": {str(u): _bimodule(E) for u, E in sorted(obj.fibres.items())},
                "maps": [_array_out(m) for m in obj.maps]}
    if isinstance(obj, Suite):
        return {"kind": "suite", "suites": list(obj.suites), "seed": obj.seed,
                "tolerance": obj.tolerance, "max_size": obj.max_size}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _with_labels(d: dict, labels) -> dict:
    out = _labels_out(None if labels is None else list(labels))
    if out is not None:
        d["labels"] = out
    return d


def _algebra(A: FinDimCStarAlgebra) -> dict:
    return {f: _array_out(getattr(A, f)) for f in ("mult", "star", "trace", "unit")}


def _bimodule(E: HilbertBimodule) -> dict:
    return {f: _array_out(getattr(E, f)) for f in ("lact", "ract", "inner")}


def _format(x, indent: int = 0) -> str:
    """JSON with one line per innermost list, so tables read as tables."""
    pad, inner = " " * indent, " " * (indent + 1)
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_format(v, indent + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + f"\n{pad}}}"
    if isinstance(x, list) and any(isinstance(v, (list, dict)) for v in x):
        return "[\n" + ",\n".join(inner + _format(v, indent + 1) for v in x) + f"\n{pad}]"
    return json.dumps(x)


def dumps(obj) -> str:
    return _format(to_data(obj)) + "\n"


def dump(obj, path) -> None:
    Path(path).write_text(dumps(obj))


# -- reading -----------------------------------------------------------------------------


class _Reader:
    def __init__(self, path: Path | None, text: str | None):
        self.path, self.text = path, text

    def fail(self, message: str, field: str, report: Report | None = None):
        raise InstanceError(message, str(self.path) if self.path else None, field, self._line(field), report)

    def _line(self, field: str) -> int | None:
        if not self.text:
            return None
        keys = re.findall(r"\.([A-Za-z_0-9]+)", field)
        pos = 0
        for key in keys:
            found = self.text.find(f'"{key}"', pos)
            if found < 0:
                break
            pos = found
        line = self.text.count("\n", 0, pos) + 1
        # tables are written one row per line, so a row index is a line offset
        row = re.match(r".*\.[A-Za-z_0-9]+\[(\d+)\]", field)
        if keys and row and re.match(r'"[^"]*":\s*\[\s*\n', self.text[pos:]):
            line += int(row.group(1)) + 1
        return line

    # primitives

    def get(self, d: dict, key: str, where: str):
        if not isinstance(d, dict):
            self.fail("expected an object", where)
        if key not in d:
            self.fail(f"missing field {key!r}", where)
        return d[key]

    def integer(self, x, where: str) -> int:
        if isinstance(x, bool) or not isinstance(x, int):
            self.fail("expected an integer", where)
        return x

    def int_list(self, x, where: str, bound: int | None = None, allow_undefined: bool = False) -> list[int]:
        if not isinstance(x, list):
            self.fail("expected a list of integers", where)
        out = []
        for i, v in enumerate(x):
            v = self.integer(v, f"{where}[{i}]")
            low = -1 if allow_undefined else 0
            if v < low or (bound is not None and v >= bound):
                self.fail(f"index {v} out of range", f"{where}[{i}]")
            out.append(v)
        return out

    def table(self, x, where: str, rows: int, cols: int, bound: int, allow_undefined=True) -> list[list[int]]:
        if not isinstance(x, list) or len(x) != rows:
            self.fail(f"expected {rows} rows", where)
        out = []
        for i, row in enumerate(x):
            r = self.int_list(row, f"{where}[{i}]", bound, allow_undefined)
            if len(r) != cols:
                self.fail(f"expected {cols} entries", f"{where}[{i}]")
            out.append(r)
        return out

    def array(self, x, where: str, shape: tuple[int, ...] | None = None) -> np.ndarray:
        try:
            if isinstance(x, dict):
                a = np.asarray(x["re"], dtype=float)
                if "im" in x:
                    a = a + 1j * np.asarray(x["im"], dtype=float)
                if "shape" in x:
                    a = a.reshape(x["shape"])
            else:
                a = np.asarray(x, dtype=complex)
        except (KeyError, TypeError, ValueError) as exc:
            self.fail(f"malformed array ({exc})", where)
        if shape is not None and a.shape != shape:
            self.fail(f"expected shape {shape}, found {a.shape}", where)
        return a.astype(complex)

    def checked(self, obj, report: Report, where: str):
        if not report.ok:
            self.fail(f"axiom violated: {report.violations[0]}", where, report)
        return obj

    # references

    def resolve(self, x, where: str, kind: str):
        if isinstance(x, str):
            base = self.path.parent if self.path else Path.cwd()
            return load(base / x, expect=kind)
        if isinstance(x, dict):
            if x.get("kind", kind) != kind:
                self.fail(f"expected a {kind}, found {x.get('kind')!r}", where)
            return self.read(x, where, kind)
        self.fail(f"expected a {kind} object or a relative path", where)

    # objects

    def read(self, d, where: str, kind: str | None = None):
        if not isinstance(d, dict):
            self.fail("expected an object", where)
        kind = kind or self.get(d, "kind", where)
        if kind not in KINDS:
            self.fail(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", f"{where}.kind")
        return getattr(self, "read_" + kind)(d, where)

    def read_groupoid(self, d, where):
        if "group" in d:
            name = d["group"]
            groups = catalog()
            if name not in groups:
                self.fail(f"unknown group {name!r}", f"{where}.group")
            return FiniteGroupoid.group(groups[name])
        if "pair" in d:
            return FiniteGroupoid.pair(self.integer(d["pair"], f"{where}.pair"))
        src = self.int_list(self.get(d, "src", where), f"{where}.src")
        n = len(src)
        for f in ("src",):
            self.int_list(src, f"{where}.{f}", n)
        G = FiniteGroupoid.from_tables(
            self.int_list(self.get(d, "units", where), f"{where}.units", n),
            src,
            self.int_list(self.get(d, "rng", where), f"{where}.rng", n),
            self.int_list(self.get(d, "inv", where), f"{where}.inv", n),
            self.table(self.get(d, "comp", where), f"{where}.comp", n, n, n),
            _tuplify(d["labels"]) if "labels" in d else None,
        )
        for f in ("rng", "inv"):
            if len(getattr(G, f)) != n:
                self.fail(f"expected {n} entries", f"{where}.{f}")
        return self.checked(G, validate_groupoid(G), where)

    def _points_action(self, G: FiniteGroupoid, n: int, anchor, act, where_anchor, where_act) -> GroupoidAction:
        anchor = self.int_list(anchor, where_anchor, G.arrow_count)
        if len(anchor) != n:
            self.fail(f"expected {n} entries", where_anchor)
        table = self.table(act, where_act, G.arrow_count, n, n)
        return GroupoidAction(G, n, tuple(anchor), tuple(tuple(r) for r in table))

    def read_action(self, d, where):
        G = self.resolve(self.get(d, "groupoid", where), f"{where}.groupoid", "groupoid")
        n = self.integer(self.get(d, "point_count", where), f"{where}.point_count")
        a = self._points_action(G, n, self.get(d, "anchor", where), self.get(d, "act", where),
                                f"{where}.anchor", f"{where}.act")
        return self.checked(a, validate_action(a), where)

    def read_correspondence(self, d, where):
        if "compose" in d:
            parts = self.get(d, "compose", where)
            if not isinstance(parts, list) or not parts:
                self.fail("expected a non-empty list of correspondences", f"{where}.compose")
            out = None
            for i, p in enumerate(parts):
                c = self.resolve(p, f"{where}.compose[{i}]", "correspondence")
                if out is not None and out.H != c.G:
                    self.fail("consecutive correspondences do not share a groupoid", f"{where}.compose[{i}]")
                out = c if out is None else compose(out, c)
            return out
        if "identity" in d:
            return identity_correspondence(self.resolve(d["identity"], f"{where}.identity", "groupoid"))
        if "action" in d:
            return action_correspondence(self.resolve(d["action"], f"{where}.action", "action"))
        if "homomorphism" in d:
            G = self.resolve(self.get(d, "G", where), f"{where}.G", "groupoid")
            H = self.resolve(self.get(d, "H", where), f"{where}.H", "groupoid")
            phi = self.int_list(d["homomorphism"], f"{where}.homomorphism", H.arrow_count)
            if len(phi) != G.arrow_count:
                self.fail(f"expected {G.arrow_count} entries", f"{where}.homomorphism")
            try:
                return from_homomorphism(G, H, phi)
            except ValueError as exc:
                self.fail(str(exc), f"{where}.homomorphism")
        G = self.resolve(self.get(d, "G", where), f"{where}.G", "groupoid")
        H = self.resolve(self.get(d, "H", where), f"{where}.H", "groupoid")
        n = self.integer(self.get(d, "point_count", where), f"{where}.point_count")
        left = self._points_action(G, n, self.get(d, "rho", where), self.get(d, "left", where),
                                   f"{where}.rho", f"{where}.left")
        right = self._points_action(H.opposite(), n, self.get(d, "sigma", where), self.get(d, "right", where),
                                    f"{where}.sigma", f"{where}.right")
        labels = _tuplify(d["labels"]) if "labels" in d else None
        omega = EtaleCorrespondence(left, right, labels)
        return self.checked(omega, validate_correspondence(omega), where)

    def read_inverse_semigroup(self, d, where):
        star = self.int_list(self.get(d, "star", where), f"{where}.star")
        n = len(star)
        self.int_list(star, f"{where}.star", n)
        mul = self.table(self.get(d, "mul", where), f"{where}.mul", n, n, n, allow_undefined=False)
        S = InverseSemigroup(n, tuple(tuple(r) for r in mul), tuple(star),
                             _tuplify(d["labels"]) if "labels" in d else None)
        return self.checked(S, validate_semigroup(S), where)

    def _algebra(self, d, where) -> FinDimCStarAlgebra:
        mult = self.array(self.get(d, "mult", where), f"{where}.mult")
        n = mult.shape[0] if mult.ndim == 3 else -1
        if mult.shape != (n, n, n):
            self.fail("expected an n x n x n structure tensor", f"{where}.mult")
        return FinDimCStarAlgebra(
            mult,
            self.array(self.get(d, "star", where), f"{where}.star", (n, n)),
            self.array(self.get(d, "trace", where), f"{where}.trace", (n,)),
            self.array(self.get(d, "unit", where), f"{where}.unit", (n,)),
        )

    def _fibres(self, d, where, G: FiniteGroupoid, read):
        raw = self.get(d, "fibres", where)
        if not isinstance(raw, dict):
            self.fail("expected an object keyed by unit", f"{where}.fibres")
        out = {}
        for key, val in raw.items():
            if not key.lstrip("-").isdigit() or int(key) not in G.unit_set:
                self.fail(f"{key!r} is not a unit", f"{where}.fibres.{key}")
            out[int(key)] = read(val, f"{where}.fibres.{key}")
        missing = set(G.units) - set(out)
        if missing:
            self.fail(f"no fibre over units {sorted(missing)}", f"{where}.fibres")
        return out

    def _maps(self, d, where, G: FiniteGroupoid, dim) -> tuple[np.ndarray, ...]:
        raw = self.get(d, "maps", where)
        if not isinstance(raw, list) or len(raw) != G.arrow_count:
            self.fail(f"expected one map per arrow ({G.arrow_count})", f"{where}.maps")
        return tuple(
            self.array(m, f"{where}.maps[{g}]", (dim(G.rng[g]), dim(G.src[g]))) for g, m in enumerate(raw)
        )

    def read_bundle(self, d, where):
        if "construct" in d:
            kind = d["construct"]
            if kind == "trivial":
                return trivial_bundle(self.resolve(self.get(d, "groupoid", where), f"{where}.groupoid", "groupoid"))
            makers = {"function": function_bundle, "endomorphism": endomorphism_bundle}
            if kind not in makers:
                self.fail(f"unknown construction {kind!r}", f"{where}.construct")
            return makers[kind](self.resolve(self.get(d, "action", where), f"{where}.action", "action"))
        G = self.resolve(self.get(d, "groupoid", where), f"{where}.groupoid", "groupoid")
        fibres = self._fibres(d, where, G, self._algebra)
        A = GCStarBundle(G, fibres, self._maps(d, where, G, lambda u: fibres[u].dimension))
        return self.checked(A, validate_bundle(A), where)

    def read_equivariant_correspondence(self, d, where):
        if "construct" in d:
            kind = d["construct"]
            if kind == "identity":
                return identity_correspondence_bundle(self.resolve(self.get(d, "bundle", where), f"{where}.bundle", "bundle"))
            makers = {"column": column_bundle, "row": row_bundle}
            if kind not in makers:
                self.fail(f"unknown construction {kind!r}", f"{where}.construct")
            return makers[kind](self.resolve(self.get(d, "action", where), f"{where}.action", "action"))
        left = self.resolve(self.get(d, "left", where), f"{where}.left", "bundle")
        right = self.resolve(self.get(d, "right", where), f"{where}.right", "bundle")
        if left.groupoid != right.groupoid:
            self.fail("left and right bundles live over different groupoids", where)
        G = left.groupoid

        def bimodule(x, w):
            u = int(w.rsplit(".", 1)[1])
            A, B = left.fibres[u], right.fibres[u]
            lact = self.array(self.get(x, "lact", w), f"{w}.lact")
            e = lact.shape[1] if lact.ndim == 3 else 0
            return HilbertBimodule(
                A, B,
                self.array(lact, f"{w}.lact", (A.dimension, e, e)),
                self.array(self.get(x, "ract", w), f"{w}.ract", (B.dimension, e, e)),
                self.array(self.get(x, "inner", w), f"{w}.inner", (e, e, B.dimension)),
            )

        fibres = self._fibres(d, where, G, bimodule)
        E = EquivariantCorrespondence(left, right, fibres, self._maps(d, where, G, lambda u: fibres[u].dimension))
        return self.checked(E, validate_equivariant_correspondence(E), where)

    def read_suite(self, d, where):
        from .verify import SUITES

        names = self.get(d, "suites", where)
        if names == "all":
            names = list(SUITES)
        if not isinstance(names, list):
            self.fail("expected a list of suite names or \"all\"", f"{where}.suites")
        for i, n in enumerate(names):
            if n not in SUITES:
                self.fail(f"unknown suite {n!r}", f"{where}.suites[{i}]")
        tol = d.get("tolerance", 1e-8)
        if not isinstance(tol, (int, float)) or tol <= 0:
            self.fail("expected a positive number", f"{where}.tolerance")
        return Suite(names, self.integer(d.get("seed", 0), f"{where}.seed"), float(tol),
                     self.integer(d.get("max_size", 8), f"{where}.max_size"))


def from_data(data: dict, path: Path | None = None, text: str | None = None, expect: str | None = None):
    reader = _Reader(path, text)
    if not isinstance(data, dict):
        reader.fail("top level must be an object", "$")
    version = reader.get(data, "format_version", "$")
    if version != FORMAT_VERSION:
        reader.fail(f"unsupported format_version {version!r} (expected {FORMAT_VERSION})", "$.format_version")
    kind = reader.get(data, "kind", "$")
    if expect and kind != expect:
        reader.fail(f"expected a {expect}, found {kind!r}", "$.kind")
    return reader.read(data, "$")


def loads(text: str, path: Path | None = None, expect: str | None = None):
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"invalid JSON: {exc.msg}", str(path) if path else None, None, exc.lineno) from None
    return from_data(data, path, text, expect)


def load(path, expect: str | None = None):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InstanceError(f"cannot read file: {exc.strerror}", str(path)) from None
    return loads(text, path, expect)


parse_instance = load
