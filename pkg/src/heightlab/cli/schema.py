"""JSON system descriptions (``"schema": 1``) and point syntax.

Rationals are written as strings such as ``"3/4"``; integers may be bare.
Every validation error names the offending path.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Any

from heightlab.dynsys.lattice import ConcreteAbelianSystem, LatticeSystem
from heightlab.dynsys.p1 import P1Morphism, p1_validate, polynomial_map
from heightlab.dynsys.picard import PicardAction, ProductSystem
from heightlab.dynsys.wehler import WehlerPoint, WehlerSystem
from heightlab.errors import InputError
from heightlab.heights.elliptic import EllipticCurve
from heightlab.heights.gram import GramForm
from heightlab.heights.projective import normalize, p1_point
from heightlab.numlin.matrix import CMMatrix, RatMatrix
from heightlab.numlin.poly import RatPoly

SCHEMA_VERSION = 1
KINDS = ("p1_morphism", "lattice", "concrete_abelian", "wehler", "picard", "product")


def rational(value: Any, path: str) -> Fraction:
    if isinstance(value, bool) or isinstance(value, float):
        raise InputError("numbers must be integers or rational strings, not floats or booleans", path)
    try:
        return Fraction(value.strip()) if isinstance(value, str) else Fraction(value)
    except (TypeError, ValueError, ZeroDivisionError):
        raise InputError(f"not a rational number: {value!r}", path) from None


def integer(value: Any, path: str) -> int:
    q = rational(value, path)
    if q.denominator != 1:
        raise InputError(f"expected an integer, got {value!r}", path)
    return int(q)


def _list(value: Any, path: str) -> list:
    if not isinstance(value, list):
        raise InputError("expected a list", path)
    return value


def _matrix(value: Any, path: str) -> RatMatrix:
    rows = _list(value, path)
    if not rows:
        raise InputError("empty matrix", path)
    out = [[rational(x, f"{path}[{i}][{j}]") for j, x in enumerate(_list(r, f"{path}[{i}]"))]
           for i, r in enumerate(rows)]
    if any(len(r) != len(out) for r in out):
        raise InputError("matrix must be square", path)
    return RatMatrix(out)


def _require(d: dict, key: str, path: str):
    if key not in d:
        raise InputError(f"missing field {key!r}", path)
    return d[key]


def _hints(d: dict, path: str) -> list[RatPoly] | None:
    if "factor_hints" not in d:
        return None
    return [RatPoly([rational(c, f"{path}.factor_hints[{i}][{j}]") for j, c in enumerate(_list(h, f"{path}.factor_hints[{i}]"))])
            for i, h in enumerate(_list(d["factor_hints"], f"{path}.factor_hints"))]


class Loaded:
    """A parsed description: the system object plus the extras the commands need."""

    def __init__(self, system, description: dict, factor_hints=None):
        self.system = system
        self.description = description
        self.factor_hints = factor_hints

    @property
    def kind(self) -> str:
        return self.description["kind"]

    @property
    def label(self) -> str:
        return self.description.get("label", "")


def build(d: Any, path: str = "$") -> Loaded:
    if not isinstance(d, dict):
        raise InputError("system description must be an object", path)
    kind = _require(d, "kind", path)
    if kind not in KINDS:
        raise InputError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}", f"{path}.kind")
    label = d.get("label", "")
    if kind == "p1_morphism":
        if "polynomial" in d:
            coeffs = [integer(c, f"{path}.polynomial[{i}]") for i, c in enumerate(_list(d["polynomial"], f"{path}.polynomial"))]
            return Loaded(polynomial_map(coeffs), d)
        num = [integer(c, f"{path}.numerator[{i}]") for i, c in enumerate(_list(_require(d, "numerator", path), f"{path}.numerator"))]
        den = [integer(c, f"{path}.denominator[{i}]") for i, c in enumerate(_list(_require(d, "denominator", path), f"{path}.denominator"))]
        return Loaded(p1_validate(num, den), d)
    if kind == "lattice":
        A = _matrix(_require(d, "matrix", path), f"{path}.matrix")
        cm_d = integer(d.get("cm_d", 0), f"{path}.cm_d")
        mat: RatMatrix | CMMatrix = A
        if cm_d:
            omega = _matrix(_require(d, "omega_part", path), f"{path}.omega_part")
            mat = CMMatrix(A, omega, cm_d)
        n = mat.embed().dimension if cm_d else A.dimension
        trans = d.get("translation")
        p = [rational(x, f"{path}.translation[{i}]") for i, x in enumerate(_list(trans, f"{path}.translation"))] \
            if trans is not None else None
        gram = None
        if "gram" in d:
            G = _matrix(d["gram"], f"{path}.gram")
            try:
                gram = GramForm.cm(G, cm_d) if cm_d else GramForm(G)
            except InputError as exc:
                raise InputError(str(exc), f"{path}.gram") from None
        if p is not None and len(p) != n:
            raise InputError(f"translation has length {len(p)}, expected {n}", f"{path}.translation")
        return Loaded(LatticeSystem(mat, p, gram, label), d, _hints(d, path))
    if kind == "concrete_abelian":
        a = [integer(x, f"{path}.curve[{i}]") for i, x in enumerate(_list(_require(d, "curve", path), f"{path}.curve"))]
        if len(a) != 5:
            raise InputError("curve needs five coefficients a1, a2, a3, a4, a6", f"{path}.curve")
        E = EllipticCurve(*a)
        A = _matrix(_require(d, "matrix", path), f"{path}.matrix")
        trans = None
        if "translation" in d:
            trans = [parse_curve_point(E, t, f"{path}.translation[{i}]") for i, t in enumerate(_list(d["translation"], f"{path}.translation"))]
        return Loaded(ConcreteAbelianSystem(E, A, trans, label), d)
    if kind == "wehler":
        coeffs = _require(d, "coefficients", path)
        flat = [integer(c, f"{path}.coefficients[{i}]") for i, c in enumerate(_flat(coeffs))]
        if len(flat) != 27:
            raise InputError(f"a (2,2,2) form has 27 coefficients, got {len(flat)}", f"{path}.coefficients")
        word = d.get("word", ["x", "y", "z"])
        try:
            return Loaded(WehlerSystem(flat, word, label), d)
        except InputError as exc:
            raise InputError(str(exc), f"{path}.coefficients") from None
    if kind == "picard":
        M = _matrix(_require(d, "matrix", path), f"{path}.matrix")
        cone = None
        if "cone_generators" in d:
            cone = tuple(tuple(rational(x, f"{path}.cone_generators[{i}][{j}]") for j, x in enumerate(g))
                         for i, g in enumerate(_list(d["cone_generators"], f"{path}.cone_generators")))
        form = _matrix(d["invariant_form"], f"{path}.invariant_form") if "invariant_form" in d else None
        return Loaded(PicardAction(M, cone, label, form), d, _hints(d, path))
    left = build(_require(d, "left", path), f"{path}.left")
    right = build(_require(d, "right", path), f"{path}.right")
    return Loaded(ProductSystem(left.system, right.system, label), d)


def _flat(c):
    if isinstance(c, list):
        for x in c:
            yield from _flat(x)
    else:
        yield c


def load_text(text: str, source: str = "$") -> Loaded:
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", source) from None
    if not isinstance(d, dict):
        raise InputError("top level must be an object", source)
    version = d.get("schema")
    if version != SCHEMA_VERSION:
        raise InputError(f"unsupported schema version {version!r}; expected {SCHEMA_VERSION}", "$.schema")
    return build(d.get("system", d))


def load_file(path: str) -> Loaded:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read system file: {exc.strerror}", path) from None
    return load_text(text, path)


def parse_curve_point(E: EllipticCurve, text: Any, path: str):
    if text in ("O", "0", "inf", None):
        return E.zero()
    if isinstance(text, list):
        x, y = (rational(t, path) for t in text)
    else:
        parts = str(text).split(",")
        if len(parts) != 2:
            raise InputError(f"curve point must be 'x,y' or 'O', got {text!r}", path)
        x, y = (rational(t, path) for t in parts)
    try:
        return E.point(x, y)
    except (ValueError, InputError) as exc:
        raise InputError(str(exc), path) from None


def _p1(text: str, path: str):
    t = text.strip()
    if ":" in t:
        parts = t.split(":")
        if len(parts) != 2:
            raise InputError(f"a point of P^1 has two coordinates, got {text!r}", path)
        return normalize((rational(parts[0], path), rational(parts[1], path)))
    try:
        return p1_point(t)
    except (ValueError, ZeroDivisionError):
        raise InputError(f"not a point of P^1: {text!r}", path) from None


def parse_point(loaded: Loaded, text: str, path: str = "--point"):
    """Point syntax per kind.

    * P^1: ``2``, ``-3/4``, ``inf`` or ``a:b``
    * lattice: comma-separated rationals
    * concrete abelian: ``x,y;x,y`` with ``O`` for the identity
    * Wehler: ``a:b,c:d,e:f``
    * product: ``left|right``
    """
    S = loaded.system
    return _parse(S, text, path)


def _parse(S, text: str, path: str):
    if isinstance(S, P1Morphism):
        return _p1(text, path)
    if isinstance(S, LatticeSystem):
        v = tuple(rational(t, path) for t in text.split(","))
        if len(v) != S.dimension:
            raise InputError(f"point has {len(v)} coordinates, expected {S.dimension}", path)
        return v
    if isinstance(S, ConcreteAbelianSystem):
        pts = tuple(parse_curve_point(S.curve, t.strip(), path) for t in text.split(";"))
        if len(pts) != S.rank:
            raise InputError(f"point has {len(pts)} components, expected {S.rank}", path)
        return pts
    if isinstance(S, WehlerSystem):
        parts = text.split(",")
        if len(parts) != 3:
            raise InputError("a surface point needs three P^1 coordinates 'a:b,c:d,e:f'", path)
        x, y, z = (_p1(p if ":" in p else p + ":1", path) for p in parts)
        try:
            return S.point(x, y, z)
        except InputError as exc:
            raise InputError(str(exc), path) from None
    if isinstance(S, ProductSystem):
        if "|" not in text:
            raise InputError("product points are written 'left|right'", path)
        a, b = text.split("|", 1)
        return (_parse(S.left, a, path + ".left"), _parse(S.right, b, path + ".right"))
    raise InputError("this system has no points", path)


def format_point(x) -> str:
    """Inverse of :func:`parse_point` for reporting."""
    from heightlab.heights.projective import ProjectivePoint

    if isinstance(x, ProjectivePoint):
        return f"{x.coords[0]}:{x.coords[1]}"
    if isinstance(x, WehlerPoint):
        return ",".join(f"{Q.coords[0]}:{Q.coords[1]}" for Q in x.coords())
    if isinstance(x, tuple) and x and all(isinstance(c, Fraction) for c in x):
        return ",".join(str(c) for c in x)
    if isinstance(x, tuple) and len(x) == 2 and not hasattr(x[0], "curve"):
        return f"{format_point(x[0])}|{format_point(x[1])}"
    if isinstance(x, tuple):
        return ";".join("O" if P.is_zero else f"{P.x},{P.y}" for P in x)
    return str(x)
