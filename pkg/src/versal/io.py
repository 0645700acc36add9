"""Versioned JSON description files.

Every file is an object ``{"format_version": "1", "kind": ..., <payload>}``.
Exact scalars are strings (``"1/2"``, ``"1/2+3/4i"``) or JSON integers;
ring coefficients are polynomial strings in the ring's variables.  Unknown
fields are rejected with the path of the offending field.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .ainf.category import CurvedCategory
from .ainf.functor import CurvedFunctor
from .coefficients.cones import ConeCompletion, ConeMonoid, cone_completion
from .coefficients.field import format_scalar, parse_scalar
from .coefficients.novikov import LambdaPoint
from .coefficients.rings import GROUND, LocalRing, SeriesElement, _format_terms, make_local_ring
from .errors import DescriptionSyntaxError, InputError, SchemaError, VersionUnsupported
from .hochschild import HochschildCochain
from .linf.algebra import LInfinityAlgebra
from .linf.mc import GaugePath, MaurerCartanElement

FORMAT_VERSION = "1"
MAX_TRUNCATION = 32
KINDS = ("ring", "cone", "linf", "ainf", "functor", "mc", "cochain", "point")


# low-level validation

def _fields(obj, path, required=(), optional=()):
    if not isinstance(obj, dict):
        raise SchemaError(path or "$", "expected an object")
    for k in required:
        if k not in obj:
            raise SchemaError(f"{path}.{k}", "missing field")
    allowed = set(required) | set(optional)
    for k in obj:
        if k not in allowed:
            raise SchemaError(f"{path}.{k}", "unknown field")


def _list(x, path):
    if not isinstance(x, list):
        raise SchemaError(path, "expected a list")
    return x


def _str(x, path):
    if not isinstance(x, str) or not x:
        raise SchemaError(path, "expected a non-empty string")
    return x


def _int(x, path, lo=None):
    if isinstance(x, bool) or not isinstance(x, int):
        raise SchemaError(path, "expected an integer")
    if lo is not None and x < lo:
        raise SchemaError(path, f"expected an integer >= {lo}")
    return x


def _bool(x, path):
    if not isinstance(x, bool):
        raise SchemaError(path, "expected true or false")
    return x


def _scalar(x, path):
    if isinstance(x, bool):
        raise SchemaError(path, "expected a number")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        raise SchemaError(path, "floating-point numbers are not exact; write a string such as \"1/3\"")
    if isinstance(x, str):
        try:
            return parse_scalar(x)
        except (ValueError, ZeroDivisionError) as e:
            raise SchemaError(path, f"bad scalar {x!r}: {e}") from None
    raise SchemaError(path, "expected a scalar")


def _coef(x, ring, path):
    """Coefficient in ``ring`` (ground field scalars when the ring has no variables)."""
    if ring is GROUND or not ring.ngens:
        return _scalar(x, path)
    if isinstance(x, bool) or isinstance(x, float):
        raise SchemaError(path, "expected an integer or a polynomial string")
    if isinstance(x, int):
        return ring.coerce(x)
    if isinstance(x, str):
        try:
            return ring.parse(x)
        except (ValueError, ZeroDivisionError, SyntaxError) as e:
            raise SchemaError(path, f"bad ring element {x!r}: {e}") from None
    raise SchemaError(path, "expected a ring element")


def _fmt(c):
    if isinstance(c, SeriesElement):
        return str(c)
    return format_scalar(c)


def _vector(obj, ring, path, known=None):
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object {id: coefficient}")
    out = {}
    for k, v in obj.items():
        if known is not None and k not in known:
            raise SchemaError(f"{path}.{k}", "unknown basis element")
        c = _coef(v, ring, f"{path}.{k}")
        if c:
            out[k] = c
    return out


def _dump_vector(vec, order):
    return {i: _fmt(vec[i]) for i in sorted(vec, key=order)}


def _basis(items, path):
    out = []
    for k, b in enumerate(_list(items, path)):
        p = f"{path}[{k}]"
        _fields(b, p, ("id", "degree"))
        out.append((_str(b["id"], p + ".id"), _int(b["degree"], p + ".degree")))
    return out


def _entries(obj, ring, path, known):
    """``{"s": [{"inputs": [...], "output": {...}}]}`` -> ``{s: {ids: vec}}``."""
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object keyed by arity")
    out = {}
    for s_text, rows in obj.items():
        p = f"{path}.{s_text}"
        try:
            s = int(s_text)
        except ValueError:
            raise SchemaError(p, "arity keys must be integers") from None
        if str(s) != s_text or s < 1:
            raise SchemaError(p, "arity keys must be positive integers")
        table = {}
        for k, row in enumerate(_list(rows, p)):
            q = f"{p}[{k}]"
            _fields(row, q, ("inputs", "output"))
            ids = tuple(_str(a, f"{q}.inputs[{j}]") for j, a in enumerate(_list(row["inputs"], q + ".inputs")))
            for j, a in enumerate(ids):
                if a not in known:
                    raise SchemaError(f"{q}.inputs[{j}]", f"unknown basis element {a!r}")
            if len(ids) != s:
                raise SchemaError(q + ".inputs", f"expected {s} inputs")
            if ids in table:
                raise SchemaError(q, "duplicate entry")
            table[ids] = _vector(row["output"], ring, q + ".output", known)
        out[s] = table
    return out


def _dump_entries(ops, order):
    out = {}
    for s in sorted(ops):
        rows = []
        for ids in sorted(ops[s], key=lambda k: [order(i) for i in k]):
            vec = ops[s][ids]
            if vec:
                rows.append({"inputs": list(ids), "output": _dump_vector(vec, order)})
        if rows:
            out[str(s)] = rows
    return out


# rings

def _truncation(obj, path):
    N = _int(obj.get("truncation", 8), path + ".truncation", 1)
    if N > MAX_TRUNCATION:
        raise SchemaError(path + ".truncation", f"truncation above {MAX_TRUNCATION} is not supported")
    return N


def ring_from(obj, path="$"):
    _fields(obj, path, ("variables",), ("relations", "truncation"))
    variables = []
    for k, v in enumerate(_list(obj["variables"], path + ".variables")):
        p = f"{path}.variables[{k}]"
        if isinstance(v, str):
            variables.append((v, 1))
            continue
        _fields(v, p, ("name",), ("weight",))
        variables.append((_str(v["name"], p + ".name"), _int(v.get("weight", 1), p + ".weight", 1)))
    names = [n for n, _ in variables]
    if len(set(names)) != len(names):
        raise SchemaError(path + ".variables", "variable names must be distinct")
    rels = []
    for k, r in enumerate(_list(obj.get("relations", []), path + ".relations")):
        rels.append(_str(r, f"{path}.relations[{k}]"))
    N = _truncation(obj, path)
    if not variables:
        if rels:
            raise SchemaError(path + ".relations", "the ground field has no relations")
        return GROUND
    try:
        return make_local_ring(variables, rels, N)
    except (ValueError, ZeroDivisionError, SyntaxError) as e:
        if isinstance(e, InputError):
            raise
        raise SchemaError(path + ".relations", str(e)) from None


def ring_to(R: LocalRing):
    if isinstance(R, ConeCompletion):
        return cone_to(R.cone, R.N)
    return {"variables": [{"name": n, "weight": w} for n, w in zip(R.names, R.weights)],
            "relations": [_format_terms(r, R.names) for r in R.relations],
            "truncation": R.N}


def _ring_field(obj, path):
    if obj is None:
        return GROUND
    if isinstance(obj, dict) and "generators" in obj:
        c, N, _ = cone_from(obj, path)
        return cone_completion(c, N)
    return ring_from(obj, path)


# cones and points

def cone_from(obj, path="$"):
    _fields(obj, path, ("generators",), ("names", "inequalities", "truncation", "element"))
    gens = []
    for k, g in enumerate(_list(obj["generators"], path + ".generators")):
        gens.append([_int(a, f"{path}.generators[{k}][{j}]") for j, a in
                     enumerate(_list(g, f"{path}.generators[{k}]"))])
    names = obj.get("names")
    if names is not None:
        names = [_str(n, f"{path}.names[{k}]") for k, n in enumerate(_list(names, path + ".names"))]
    ineqs = obj.get("inequalities")
    if ineqs is not None:
        ineqs = [[_int(a, f"{path}.inequalities[{k}][{j}]") for j, a in
                  enumerate(_list(f, f"{path}.inequalities[{k}]"))]
                 for k, f in enumerate(_list(ineqs, path + ".inequalities"))]
    N = _truncation(obj, path)
    element = obj.get("element")
    if element is not None:
        element = _str(element, path + ".element")
    try:
        c = ConeMonoid(gens, ineqs, names)
    except ValueError as e:
        raise SchemaError(path + ".generators", str(e)) from None
    return c, N, element


def cone_to(c: ConeMonoid, N, element=None):
    out = {"generators": [list(g) for g in c.generators], "names": list(c.names), "truncation": N}
    if c.inequalities is not None:
        out["inequalities"] = [list(f) for f in c.inequalities]
    if element is not None:
        out["element"] = element
    return out


def _values(obj, names, path):
    if isinstance(obj, list):
        return [_scalar(v, f"{path}[{k}]") for k, v in enumerate(obj)]
    if isinstance(obj, dict):
        return {_str(k, path): _scalar(v, f"{path}.{k}") for k, v in obj.items()}
    raise SchemaError(path, "expected a list or an object of values")


def point_from(obj, path="$"):
    _fields(obj, path, ("cone", "omega"), ("b_field", "element", "cutoff"))
    c, N, element = cone_from(obj["cone"], path + ".cone")
    omega = _values(obj["omega"], c.names, path + ".omega")
    b = _values(obj.get("b_field", {}), c.names, path + ".b_field")
    element = obj.get("element", element)
    if element is not None:
        element = _str(element, path + ".element")
    cutoff = obj.get("cutoff")
    if cutoff is not None:
        cutoff = _scalar(cutoff, path + ".cutoff")
    try:
        point = LambdaPoint(c, omega, b)
    except InputError:
        raise
    except ValueError as e:
        raise SchemaError(path + ".omega", str(e)) from None
    return {"cone": c, "truncation": N, "point": point, "element": element, "cutoff": cutoff}


def point_to(d):
    p = d["point"]
    out = {"cone": cone_to(p.cone, d["truncation"]),
           "omega": {n: format_scalar(w) for n, w in zip(p.cone.names, p.omega)}}
    if any(p.b_field):
        out["b_field"] = {n: format_scalar(b) for n, b in zip(p.cone.names, p.b_field)}
    if d.get("element") is not None:
        out["element"] = d["element"]
    if d.get("cutoff") is not None:
        out["cutoff"] = format_scalar(d["cutoff"])
    return out


# L-infinity algebras and MC elements

def linf_from(obj, path="$"):
    _fields(obj, path, ("basis",), ("operations", "arity_cap", "name"))
    basis = _basis(obj["basis"], path + ".basis")
    ids = {i for i, _ in basis}
    if len(ids) != len(basis):
        raise SchemaError(path + ".basis", "basis ids must be distinct")
    ops = _entries(obj.get("operations", {}), GROUND, path + ".operations", ids)
    cap = obj.get("arity_cap")
    if cap is not None:
        cap = _int(cap, path + ".arity_cap", 1)
    name = obj.get("name")
    if name is not None:
        name = _str(name, path + ".name")
    try:
        return LInfinityAlgebra(basis, ops, arity_cap=cap, name=name)
    except InputError:
        raise
    except ValueError as e:
        raise SchemaError(path + ".operations", str(e)) from None


def linf_to(g: LInfinityAlgebra):
    order = g.basis.index
    ops = {s: op.raw for s, op in g.ops.items()}
    out = {"basis": [{"id": i, "degree": d} for i, d in g.basis.vectors],
           "operations": _dump_entries(ops, order)}
    if g.arity_cap != max(g.ops, default=1):
        out["arity_cap"] = g.arity_cap
    if g.name:
        out["name"] = g.name
    return out


def mc_from(obj, path="$"):
    _fields(obj, path, ("algebra", "ring", "value"), ("gamma",))
    g = linf_from(obj["algebra"], path + ".algebra")
    R = _ring_field(obj["ring"], path + ".ring")
    known = set(g.basis.ids)
    value = _vector(obj["value"], R, path + ".value", known)
    gamma = None
    if "gamma" in obj:
        layers = [_vector(v, R, f"{path}.gamma[{k}]", known)
                  for k, v in enumerate(_list(obj["gamma"], path + ".gamma"))]
        gamma = GaugePath(layers)
    try:
        alpha = MaurerCartanElement(g, R, value)
    except InputError:
        raise
    except ValueError as e:
        raise SchemaError(path + ".value", str(e)) from None
    alpha.gamma = gamma
    return alpha


def mc_to(alpha: MaurerCartanElement, gamma=None):
    g = alpha.algebra
    out = {"algebra": linf_to(g), "ring": ring_to(alpha.ring),
           "value": _dump_vector(alpha.value, g.basis.index)}
    gamma = gamma if gamma is not None else getattr(alpha, "gamma", None)
    if gamma is not None:
        out["gamma"] = [_dump_vector(layer, g.basis.index) for layer in gamma.gamma]
    return out


# A-infinity categories, functors, cochains

def ainf_from(obj, path="$"):
    _fields(obj, path, ("objects", "homs"),
            ("operations", "curvature", "ring", "arity_cap", "exact_beyond_cap", "name"))
    objects = [_str(o, f"{path}.objects[{k}]") for k, o in enumerate(_list(obj["objects"], path + ".objects"))]
    if len(set(objects)) != len(objects):
        raise SchemaError(path + ".objects", "object names must be distinct")
    R = _ring_field(obj.get("ring"), path + ".ring")
    homs = {}
    for k, h in enumerate(_list(obj["homs"], path + ".homs")):
        p = f"{path}.homs[{k}]"
        _fields(h, p, ("source", "target", "basis"))
        X, Y = _str(h["source"], p + ".source"), _str(h["target"], p + ".target")
        for side, o in (("source", X), ("target", Y)):
            if o not in objects:
                raise SchemaError(f"{p}.{side}", f"unknown object {o!r}")
        if (X, Y) in homs:
            raise SchemaError(p, "hom space listed twice")
        homs[(X, Y)] = _basis(h["basis"], p + ".basis")
    known = [i for b in homs.values() for i, _ in b]
    if len(set(known)) != len(known):
        raise SchemaError(path + ".homs", "morphism ids must be distinct")
    known = set(known)
    ops = _entries(obj.get("operations", {}), R, path + ".operations", known)
    curv = {}
    for k, row in enumerate(_list(obj.get("curvature", []), path + ".curvature")):
        p = f"{path}.curvature[{k}]"
        _fields(row, p, ("object", "output"))
        X = _str(row["object"], p + ".object")
        if X in curv:
            raise SchemaError(p, "curvature listed twice")
        curv[X] = _vector(row["output"], R, p + ".output", known)
    cap = obj.get("arity_cap")
    if cap is not None:
        cap = _int(cap, path + ".arity_cap", 1)
    exact = _bool(obj.get("exact_beyond_cap", True), path + ".exact_beyond_cap")
    name = obj.get("name")
    if name is not None:
        name = _str(name, path + ".name")
    try:
        return CurvedCategory(objects, homs, ops, curv, R, arity_cap=cap, exact_beyond_cap=exact, name=name)
    except InputError:
        raise
    except ValueError as e:
        raise SchemaError(path, str(e)) from None


def _order_of(A):
    pos = {}
    for X in A.objects:
        for Y in A.objects:
            for i in A.hom(X, Y):
                pos[i] = len(pos)
    return lambda i: pos.get(i, len(pos))


def ainf_to(A: CurvedCategory):
    order = _order_of(A)
    homs = [{"source": X, "target": Y, "basis": [{"id": i, "degree": A.deg[i]} for i in A.hom(X, Y)]}
            for X in A.objects for Y in A.objects if A.hom(X, Y)]
    out = {"objects": list(A.objects), "homs": homs, "operations": _dump_entries(A.ops, order)}
    if A.curvature:
        out["curvature"] = [{"object": X, "output": _dump_vector(A.curvature[X], order)}
                            for X in A.objects if X in A.curvature]
    if A.ring.ngens:
        out["ring"] = ring_to(A.ring)
    if A.arity_cap != max(A.ops, default=2):
        out["arity_cap"] = A.arity_cap
    if not A.exact_beyond_cap:
        out["exact_beyond_cap"] = False
    if A.name:
        out["name"] = A.name
    return out


def functor_from(obj, path="$"):
    _fields(obj, path, ("source", "target", "object_map"),
            ("components", "curvature", "arity_cap", "exact_beyond_cap", "name"))
    A = ainf_from(obj["source"], path + ".source")
    B = ainf_from(obj["target"], path + ".target")
    omap = obj["object_map"]
    if not isinstance(omap, dict):
        raise SchemaError(path + ".object_map", "expected an object")
    omap = {k: _str(v, f"{path}.object_map.{k}") for k, v in omap.items()}
    R = B.ring if B.ring.ngens else A.ring
    comps = _entries(obj.get("components", {}), R, path + ".components", set(A.deg) | set(B.deg))
    curv = {}
    for k, row in enumerate(_list(obj.get("curvature", []), path + ".curvature")):
        p = f"{path}.curvature[{k}]"
        _fields(row, p, ("object", "output"))
        curv[_str(row["object"], p + ".object")] = _vector(row["output"], R, p + ".output", set(B.deg))
    cap = obj.get("arity_cap")
    if cap is not None:
        cap = _int(cap, path + ".arity_cap", 1)
    exact = _bool(obj.get("exact_beyond_cap", True), path + ".exact_beyond_cap")
    name = obj.get("name")
    if name is not None:
        name = _str(name, path + ".name")
    try:
        return CurvedFunctor(A, B, omap, comps, curv, arity_cap=cap, exact_beyond_cap=exact, name=name)
    except InputError:
        raise
    except ValueError as e:
        raise SchemaError(path, str(e)) from None


def functor_to(F: CurvedFunctor):
    oa, ob = _order_of(F.source), _order_of(F.target)
    comps = {}
    for s in sorted(F.components):
        rows = [{"inputs": list(ids), "output": _dump_vector(F.components[s][ids], ob)}
                for ids in sorted(F.components[s], key=lambda k: [oa(i) for i in k])]
        if rows:
            comps[str(s)] = rows
    out = {"source": ainf_to(F.source), "target": ainf_to(F.target),
           "object_map": {X: F.obj_map[X] for X in F.source.objects}, "components": comps}
    if F.curvature:
        out["curvature"] = [{"object": X, "output": _dump_vector(F.curvature[X], ob)}
                            for X in F.source.objects if X in F.curvature]
    if F.arity_cap != max(F.components, default=1):
        out["arity_cap"] = F.arity_cap
    if not F.exact_beyond_cap:
        out["exact_beyond_cap"] = False
    if F.name:
        out["name"] = F.name
    return out


def cochain_from(obj, path="$"):
    _fields(obj, path, ("category", "degree"), ("components", "ring", "length_cap"))
    A = ainf_from(obj["category"], path + ".category")
    if A.ring.ngens or A.curvature:
        raise SchemaError(path + ".category", "cochains live on an uncurved ground-field category")
    d = _int(obj["degree"], path + ".degree")
    R = _ring_field(obj.get("ring"), path + ".ring")
    comps_in = obj.get("components", {})
    if not isinstance(comps_in, dict):
        raise SchemaError(path + ".components", "expected an object keyed by length")
    comps = {}
    rest = {k: v for k, v in comps_in.items() if k != "0"}
    if "0" in comps_in:
        zero = {}
        for k, row in enumerate(_list(comps_in["0"], path + ".components.0")):
            p = f"{path}.components.0[{k}]"
            _fields(row, p, ("object", "output"))
            X = _str(row["object"], p + ".object")
            if X not in A.objects:
                raise SchemaError(p + ".object", f"unknown object {X!r}")
            zero[(X,)] = _vector(row["output"], R, p + ".output", set(A.deg))
        comps[0] = zero
    comps.update(_entries(rest, R, path + ".components", set(A.deg)))
    cap = obj.get("length_cap")
    if cap is not None:
        cap = _int(cap, path + ".length_cap", 0)
    try:
        return HochschildCochain(A, d, comps, ring=R if R.ngens else None, length_cap=cap)
    except ValueError as e:
        raise SchemaError(path + ".components", str(e)) from None


def cochain_to(phi: HochschildCochain):
    A = phi.category
    order = _order_of(A)
    comps = {}
    if phi.curvature:
        comps["0"] = [{"object": X, "output": _dump_vector(phi.curvature[X], order)}
                      for X in A.objects if X in phi.curvature]
    comps.update(_dump_entries(phi.ops, order))
    out = {"category": ainf_to(A), "degree": phi.degree, "components": comps}
    if phi.ring is not None and phi.ring.ngens:
        out["ring"] = ring_to(phi.ring)
    if phi.length_cap is not None:
        out["length_cap"] = phi.length_cap
    return out


# documents

_READERS = {"ring": ring_from, "cone": lambda o, p="$": cone_from(o, p), "linf": linf_from,
            "mc": mc_from, "ainf": ainf_from, "functor": functor_from, "cochain": cochain_from,
            "point": point_from}


def _no_duplicates(pairs):
    out = {}
    for k, v in pairs:
        if k in out:
            raise SchemaError(f"$..{k}", "duplicate key")
        out[k] = v
    return out


def _bad_constant(name):
    raise ValueError(f"{name} is not allowed")


def loads(text):
    """Parse a description document; returns ``(kind, value)``."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DescriptionSyntaxError(1, e.start + 1, "input is not UTF-8") from None
    try:
        doc = json.loads(text, object_pairs_hook=_no_duplicates, parse_constant=_bad_constant)
    except json.JSONDecodeError as e:
        raise DescriptionSyntaxError(e.lineno, e.colno, e.msg) from None
    except ValueError as e:
        if isinstance(e, InputError):
            raise
        raise DescriptionSyntaxError(1, 1, str(e)) from None
    except RecursionError:
        raise DescriptionSyntaxError(1, 1, "nesting too deep") from None
    if not isinstance(doc, dict):
        raise SchemaError("$", "a description file is a JSON object")
    if "format_version" not in doc:
        raise SchemaError("$.format_version", "missing field")
    if doc["format_version"] != FORMAT_VERSION:
        raise VersionUnsupported(f"format_version {doc['format_version']!r} is not supported "
                                 f"(this reader understands {FORMAT_VERSION!r})")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SchemaError("$.kind", f"expected one of {', '.join(KINDS)}")
    payload = {k: v for k, v in doc.items() if k not in ("format_version", "kind")}
    return kind, _READERS[kind](payload, "$")


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())


def to_document(kind, value):
    if kind == "ring":
        payload = ring_to(value)
    elif kind == "cone":
        c, N, element = value
        payload = cone_to(c, N, element)
    elif kind == "point":
        payload = point_to(value)
    elif kind == "linf":
        payload = linf_to(value)
    elif kind == "mc":
        payload = mc_to(value)
    elif kind == "ainf":
        payload = ainf_to(value)
    elif kind == "functor":
        payload = functor_to(value)
    elif kind == "cochain":
        payload = cochain_to(value)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return {"format_version": FORMAT_VERSION, "kind": kind, **payload}


def dumps(kind, value):
    return json.dumps(to_document(kind, value), indent=2, sort_keys=False, ensure_ascii=False) + "\n"
