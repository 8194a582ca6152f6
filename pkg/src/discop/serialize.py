"""JSON documents for instances and reports.

Rationals are always strings ("p/q" or "n") and complex rationals are "re,im".
Labels of structured instances are ``[orbit_id, k]`` pairs.  Values inside
witnesses are tagged (``{"rat": ...}``, ``{"fn": ...}``, ...) so that a parsed
report compares equal to the one that was rendered.
"""

from __future__ import annotations

import json
import string
from fractions import Fraction
from typing import Any, Dict, List, Mapping, Optional

from .classify import ClassificationReport, SupH
from .core import (
    INFINITE_MASS,
    CRat,
    Cycle,
    FiniteInstance,
    FixedPoint,
    Instance,
    Line,
    LineFamily,
    OrbitFamilyInstance,
    RayLoop,
    Schedule,
    as_rat,
)
from .decompose import ShiftBlock, ShiftDecomposition
from .errors import BadParameters, ParseError, ValidationError
from .operator import FinSuppFn
from .oracle import CrosscheckReport, Disagreement
from .verdict import Status, Verdict, Witness

SCHEMA_VERSION = 1


def dumps(doc: Any) -> str:
    """Canonical text form: sorted keys, two-space indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def loads(text: str) -> Any:
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"line {exc.lineno}, column {exc.colno}", exc.msg) from None


# --------------------------------------------------------------------------
# small pieces


def _rat(q: Fraction) -> str:
    return str(q)


def _need(doc: Mapping, key: str, where: str) -> Any:
    if key not in doc:
        raise ValidationError(f"{where}.{key}" if where else key, "missing field")
    return doc[key]


def _obj(doc: Any, where: str) -> Mapping:
    if not isinstance(doc, dict):
        raise ValidationError(where or "document", "expected an object")
    return doc


def _only(doc: Mapping, allowed, where: str) -> None:
    extra = sorted(set(doc) - set(allowed))
    if extra:
        raise ValidationError(f"{where}.{extra[0]}" if where else extra[0], "unknown field")


def render_label(x) -> Any:
    return list(x) if isinstance(x, tuple) else x


def parse_label(value, where: str = "label"):
    if isinstance(value, str):
        return value
    if (
        isinstance(value, list)
        and len(value) == 2
        and all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        return tuple(value)
    raise ValidationError(where, f"not a label: {value!r}")


def label_key(x) -> str:
    """Flat text form used for map keys: the string itself, or "id:k" for pairs."""
    return f"{x[0]}:{x[1]}" if isinstance(x, tuple) else x


def parse_label_key(inst: Instance, key: str):
    if isinstance(inst, FiniteInstance):
        return key
    try:
        a, b = key.split(":")
        return (int(a), int(b))
    except ValueError:
        raise ValidationError("vector", f"expected 'id:k', got {key!r}") from None


def render_value(v) -> Any:
    if v is None:
        return None
    if v is INFINITE_MASS:
        return {"infinite": True}
    if isinstance(v, bool):
        return {"bool": v}
    if isinstance(v, (int, Fraction)):
        return {"rat": _rat(Fraction(v))}
    if isinstance(v, CRat):
        return {"complex": str(v)}
    if isinstance(v, FinSuppFn):
        return {"fn": [[render_label(k), str(c)] for k, c in v.sorted_items()]}
    if isinstance(v, tuple):
        return {"tuple": [render_value(u) for u in v]}
    if isinstance(v, str):
        return {"text": v}
    raise TypeError(f"cannot render {v!r}")


def parse_value(doc) -> Any:
    if doc is None:
        return None
    (tag, body), = doc.items()
    if tag == "infinite":
        return INFINITE_MASS
    if tag == "bool":
        return body
    if tag == "rat":
        return Fraction(body)
    if tag == "complex":
        return CRat.parse(body)
    if tag == "fn":
        return FinSuppFn((parse_label(k), CRat.parse(c)) for k, c in body)
    if tag == "tuple":
        return tuple(parse_value(u) for u in body)
    if tag == "text":
        return body
    raise ValidationError("value", f"unknown tag {tag!r}")


def render_fn(f: FinSuppFn) -> Dict[str, str]:
    return {label_key(k): str(v) for k, v in f.sorted_items()}


def parse_vector(inst: Instance, doc: Mapping) -> FinSuppFn:
    """A vector given as ``{label: "re,im"}`` (real values may omit ",im")."""
    out = {}
    for key, text in _obj(doc, "vector").items():
        if not isinstance(text, str):
            raise ValidationError(f"vector.{key}", "values must be strings 're,im'")
        try:
            out[parse_label_key(inst, key)] = CRat.parse(text)
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"vector.{key}", f"not a complex rational: {text!r}") from None
    return FinSuppFn(out)


# --------------------------------------------------------------------------
# instances


def _orbit_doc(o) -> Dict[str, Any]:
    if isinstance(o, FixedPoint):
        return {"type": "fixed", "weight": _rat(o.weight)}
    if isinstance(o, Cycle):
        return {"type": "cycle", "weights": [_rat(w) for w in o.weights]}
    if isinstance(o, Line):
        return {"type": "line", "base": _rat(o.base), "ratio": _rat(o.ratio)}
    return {"type": "ray_loop", "ratio": _rat(o.ratio)}


_ORBIT_FIELDS = {"fixed": ("weight",), "cycle": ("weights",), "line": ("base", "ratio"), "ray_loop": ("ratio",)}


def _parse_orbit(doc, where: str):
    doc = _obj(doc, where)
    kind = _need(doc, "type", where)
    if kind not in _ORBIT_FIELDS:
        raise ValidationError(f"{where}.type", f"unknown orbit type {kind!r}")
    _only(doc, ("type",) + _ORBIT_FIELDS[kind], where)
    vals = {k: _need(doc, k, where) for k in _ORBIT_FIELDS[kind]}

    def rat(key, value=None, sub=""):
        return as_rat(vals[key] if value is None else value, field_name=f"{where}.{key}{sub}")

    try:
        if kind == "fixed":
            return FixedPoint(rat("weight"))
        if kind == "cycle":
            ws = vals["weights"]
            if not isinstance(ws, list):
                raise ValidationError(f"{where}.weights", "expected an array")
            return Cycle(tuple(rat("weights", w, f"[{i}]") for i, w in enumerate(ws)))
        if kind == "line":
            return Line(rat("base"), rat("ratio"))
        return RayLoop(rat("ratio"))
    except ValidationError as exc:
        if exc.field.startswith(where):
            raise
        raise ValidationError(f"{where}.{exc.field}", exc.reason) from None


def _schedule_doc(s: Schedule) -> Dict[str, Any]:
    if s.kind == "custom":
        raise ValidationError("line_family.schedule", "custom schedules have no file format")
    return {"schedule": s.kind, "param": None if s.param is None else _rat(s.param)}


def render_instance(inst: Instance, preview: int = 0) -> Dict[str, Any]:
    """Document for a finite or structured instance.

    ``preview`` lists the first few lines of an infinite family explicitly;
    they are informational and ignored (beyond a consistency check) on parse.
    """
    if isinstance(inst, FiniteInstance):
        return {
            "kind": "finite",
            "points": list(inst.points),
            "mu": {p: _rat(inst.weight(p)) for p in inst.points},
            "phi": {p: inst.image(p) for p in inst.points},
        }
    if isinstance(inst, OrbitFamilyInstance):
        doc: Dict[str, Any] = {"kind": "orbit_family", "orbits": [_orbit_doc(o) for o in inst.orbits]}
        if inst.family is not None:
            fam = dict(_schedule_doc(inst.family.schedule), base=_rat(inst.family.base), infinite=True)
            fam["preview"] = [_orbit_doc(inst.family.orbit(j)) for j in range(preview)]
            doc["line_family"] = fam
        return doc
    raise ValidationError("kind", f"{type(inst).__name__} has no file format")


def _parse_family(doc) -> LineFamily:
    where = "line_family"
    doc = _obj(doc, where)
    _only(doc, ("schedule", "param", "base", "infinite", "preview"), where)
    kind = _need(doc, "schedule", where)
    param = doc.get("param")
    try:
        sched = Schedule(kind, None if param is None else as_rat(param, field_name=f"{where}.param"))
        fam = LineFamily(sched, as_rat(doc.get("base", "1"), field_name=f"{where}.base"))
    except ValidationError as exc:
        raise ValidationError(exc.field if exc.field.startswith(where) else f"{where}.{exc.field}", exc.reason) from None
    for j, o in enumerate(doc.get("preview", [])):
        if _parse_orbit(o, f"{where}.preview[{j}]") != fam.orbit(j):
            raise ValidationError(f"{where}.preview[{j}]", "does not match the schedule")
    return fam


def parse_instance(doc: Any) -> Instance:
    """Build an instance from a parsed document, validating every field."""
    if isinstance(doc, (str, bytes)):
        doc = loads(doc)
    doc = _obj(doc, "")
    kind = _need(doc, "kind", "")
    if kind == "finite":
        _only(doc, ("kind", "points", "mu", "phi"), "")
        points, mu, phi = (_need(doc, k, "") for k in ("points", "mu", "phi"))
        if not isinstance(points, list) or not all(isinstance(p, str) for p in points):
            raise ValidationError("points", "expected an array of strings")
        mu, phi = _obj(mu, "mu"), _obj(phi, "phi")
        known = set(points)
        for p, q in phi.items():
            if p not in known or q not in known:
                raise ValidationError("phi", f"unknown point {p if p not in known else q!r}")
        for p in mu:
            if p not in known:
                raise ValidationError("mu", f"unknown point {p!r}")
        weights = {p: as_rat(v, field_name=f"mu.{p}") for p, v in mu.items()}
        return FiniteInstance(points, weights, phi)
    if kind == "orbit_family":
        _only(doc, ("kind", "orbits", "line_family"), "")
        orbits = doc.get("orbits", [])
        if not isinstance(orbits, list):
            raise ValidationError("orbits", "expected an array")
        specs = tuple(_parse_orbit(o, f"orbits[{i}]") for i, o in enumerate(orbits))
        fam = _parse_family(doc["line_family"]) if doc.get("line_family") is not None else None
        if not specs and fam is None:
            raise ValidationError("orbits", "an orbit family needs at least one orbit")
        return OrbitFamilyInstance(specs, fam)
    raise ValidationError("kind", f"expected 'finite' or 'orbit_family', got {kind!r}")


# --------------------------------------------------------------------------
# named families


def _letters(n: int):
    if not 1 <= n <= 26:
        raise BadParameters("point count must be between 1 and 26")
    return list(string.ascii_lowercase[:n])


def _args(text: str, kind: str):
    try:
        return [as_rat(a, field_name=kind) for a in text.split(",")] if text else []
    except ValidationError as exc:
        raise BadParameters(f"{kind}: {exc.reason}") from None


def _count(args, kind) -> int:
    if len(args) != 1 or args[0].denominator != 1:
        raise BadParameters(f"{kind} takes one integer")
    return int(args[0])


def generate(family: str) -> Dict[str, Any]:
    """Instance document for a named family written as ``name:args``.

    ``identity:n``, ``cycle:w1,...,wn``, ``line:c,q``, ``ray_loop:c``,
    ``unbounded_normal:k`` (k preview lines) and ``collapse:n``.
    """
    name, _, rest = family.partition(":")
    args = _args(rest, name)
    try:
        if name == "identity":
            pts = _letters(_count(args, name))
            return render_instance(FiniteInstance(pts, {p: 1 for p in pts}, {p: p for p in pts}))
        if name == "cycle":
            pts = _letters(len(args))
            if any(w <= 0 for w in args):
                raise BadParameters("cycle weights must be positive")
            nxt = {p: pts[(i + 1) % len(pts)] for i, p in enumerate(pts)}
            return render_instance(FiniteInstance(pts, dict(zip(pts, args)), nxt))
        if name == "line":
            if len(args) != 2:
                raise BadParameters("line takes a base and a ratio")
            return render_instance(OrbitFamilyInstance((Line(*args),)))
        if name == "ray_loop":
            if len(args) != 1 or args[0] <= 1:
                raise BadParameters("ray_loop requires a single ratio > 1")
            return render_instance(OrbitFamilyInstance((RayLoop(args[0]),)))
        if name == "unbounded_normal":
            k = _count(args, name)
            if k < 0:
                raise BadParameters("preview length must be nonnegative")
            return render_instance(OrbitFamilyInstance((), LineFamily(Schedule.reciprocal())), preview=k)
        if name == "collapse":
            n = _count(args, name)
            if n < 2:
                raise BadParameters("collapse needs at least 2 points")
            pts = _letters(n)
            return render_instance(FiniteInstance(pts, {p: 1 for p in pts}, {p: pts[-1] for p in pts}))
    except ValidationError as exc:
        raise BadParameters(f"{exc.field}: {exc.reason}") from None
    raise BadParameters(f"unknown family {name!r}")


# --------------------------------------------------------------------------
# reports


def render_verdict(v: Verdict) -> Dict[str, Any]:
    w = v.witness
    return {
        "status": v.status.value,
        "window": v.window,
        "checks": [[name, ok] for name, ok in v.checks],
        "witness": None
        if w is None
        else {
            "kind": w.kind,
            "points": [render_label(p) for p in w.points],
            "lhs": render_value(w.lhs),
            "rhs": render_value(w.rhs),
            "detail": w.detail,
            "order": w.order,
        },
    }


def parse_verdict(doc) -> Verdict:
    w = doc["witness"]
    witness = None
    if w is not None:
        witness = Witness(
            w["kind"],
            tuple(parse_label(p) for p in w["points"]),
            parse_value(w["lhs"]),
            parse_value(w["rhs"]),
            w["detail"],
            w["order"],
        )
    return Verdict(Status(doc["status"]), witness, doc["window"], tuple((n, ok) for n, ok in doc["checks"]))


_VERDICTS = (
    "densely_defined",
    "bounded",
    "normal",
    "quasinormal",
    "formally_normal_on_basis",
    "symmetric",
    "almost_surjective",
    "condition_31",
    "multiplicative",
)


def render_report(r: ClassificationReport) -> Dict[str, Any]:
    doc = {name: render_verdict(getattr(r, name)) for name in _VERDICTS}
    doc.update(
        schema_version=SCHEMA_VERSION,
        type="classification",
        sup_h={"value": None if r.sup_h.value is None else _rat(r.sup_h.value), "windowed": r.sup_h.windowed},
        infinite_orbit_witnesses=[render_label(a) for a in r.infinite_orbit_witnesses],
        window=r.window,
        n_max=r.n_max,
        consistency=[[name, ok] for name, ok in r.consistency],
    )
    return doc


def parse_report(doc) -> ClassificationReport:
    _check_type(doc, "classification")
    sup = doc["sup_h"]
    return ClassificationReport(
        **{name: parse_verdict(doc[name]) for name in _VERDICTS},
        sup_h=SupH(None if sup["value"] is None else Fraction(sup["value"]), sup["windowed"]),
        infinite_orbit_witnesses=tuple(parse_label(a) for a in doc["infinite_orbit_witnesses"]),
        window=doc["window"],
        n_max=doc["n_max"],
        consistency=tuple((n, ok) for n, ok in doc["consistency"]),
    )


def _opt_rat(q: Optional[Fraction]):
    return None if q is None else _rat(q)


def _parse_opt_rat(s):
    return None if s is None else Fraction(s)


def render_decomposition(dec: ShiftDecomposition) -> Dict[str, Any]:
    blocks = [
        {
            "anchor": render_label(b.anchor),
            "kind": b.kind,
            "members": [render_label(m) for m in b.members],
            "indices": list(b.indices),
            "weights": None if b.weights is None else [_rat(w) for w in b.weights],
            "base": _opt_rat(b.base),
            "ratio": _opt_rat(b.ratio),
        }
        for b in dec.blocks
    ]
    tail = None
    if dec.tail is not None:
        tail = dict(_schedule_doc(dec.tail.schedule), base=_rat(dec.tail.base))
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "decomposition",
        "blocks": blocks,
        "tail": tail,
        "tail_offset": dec.tail_offset,
        "window": dec.window,
        "exact": dec.exact,
    }


def parse_decomposition(doc) -> ShiftDecomposition:
    _check_type(doc, "decomposition")
    blocks = tuple(
        ShiftBlock(
            parse_label(b["anchor"]),
            b["kind"],
            tuple(parse_label(m) for m in b["members"]),
            tuple(b["indices"]),
            None if b["weights"] is None else tuple(Fraction(w) for w in b["weights"]),
            _parse_opt_rat(b["base"]),
            _parse_opt_rat(b["ratio"]),
        )
        for b in doc["blocks"]
    )
    tail = doc["tail"]
    fam = None
    if tail is not None:
        fam = LineFamily(Schedule(tail["schedule"], _parse_opt_rat(tail["param"])), Fraction(tail["base"]))
    return ShiftDecomposition(blocks, fam, doc["tail_offset"], doc["window"], doc["exact"])


def render_crosscheck(r: CrosscheckReport) -> Dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "type": "crosscheck",
        "max_points": r.max_points,
        "weight_grid": [_rat(w) for w in r.weight_grid],
        "instances_enumerated": r.instances_enumerated,
        "skipped_singular": r.skipped_singular,
        "tallies": {k: v for k, v in r.tallies},
        "disagreements": [
            {
                "index": d.index,
                "instance": render_instance(d.instance),
                "property": d.property,
                "classifier": d.classifier,
                "oracle": d.oracle,
            }
            for d in r.disagreements
        ],
    }


def parse_crosscheck(doc) -> CrosscheckReport:
    _check_type(doc, "crosscheck")
    return CrosscheckReport(
        doc["max_points"],
        tuple(Fraction(w) for w in doc["weight_grid"]),
        doc["instances_enumerated"],
        doc["skipped_singular"],
        tuple(
            Disagreement(d["index"], parse_instance(d["instance"]), d["property"], d["classifier"], d["oracle"])
            for d in doc["disagreements"]
        ),
        tuple(sorted(doc["tallies"].items())),
    )


def _check_type(doc, expected: str) -> None:
    if doc.get("schema_version") != SCHEMA_VERSION or doc.get("type") != expected:
        raise ValidationError("type", f"not a version {SCHEMA_VERSION} {expected} report")


def parse_any_report(doc):
    parser = {"classification": parse_report, "decomposition": parse_decomposition, "crosscheck": parse_crosscheck}
    kind = doc.get("type") if isinstance(doc, dict) else None
    if kind not in parser:
        raise ValidationError("type", f"unknown report type {kind!r}")
    return parser[kind](doc)


def describe(v: Verdict) -> str:
    """One-line human summary of a verdict, used by the text format."""
    if v.status is not Status.FAILS:
        return str(v)
    w = v.witness
    pts = ", ".join(label_key(p) if isinstance(p, tuple) else str(p) for p in w.points)
    parts = [f"fails: {w.kind} at {pts}"]
    if w.order is not None:
        parts.append(f"n={w.order}")
    if w.lhs is not None or w.rhs is not None:
        parts.append(f"lhs={_short(w.lhs)} rhs={_short(w.rhs)}")
    return " ".join(parts)


def _short(v) -> str:
    if isinstance(v, FinSuppFn):
        body = " + ".join(f"({c})*chi[{label_key(k)}]" for k, c in v.sorted_items())
        return body or "0"
    if v is INFINITE_MASS:
        return "inf"
    return str(v)


__all__: List[str] = [
    "SCHEMA_VERSION",
    "dumps",
    "loads",
    "render_instance",
    "parse_instance",
    "render_value",
    "parse_value",
    "render_fn",
    "parse_vector",
    "generate",
    "render_verdict",
    "parse_verdict",
    "render_report",
    "parse_report",
    "render_decomposition",
    "parse_decomposition",
    "render_crosscheck",
    "parse_crosscheck",
    "parse_any_report",
    "describe",
]
