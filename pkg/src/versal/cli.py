"""Command-line interface: ``versal <subcommand> FILE [options]``.

Exit codes: 0 success, 1 a mathematical failure (violated relations,
obstructions, failed certification), 2 invalid input.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from fractions import Fraction
from importlib import resources

from . import io
from .ainf.category import Obstructed, bc_category, check_ainf, solve_bounding_cochain
from .ainf.functor import check_functor, identity_functor
from .coefficients.cones import cone_completion, is_strongly_convex, toric_binomials
from .coefficients.novikov import LambdaPoint, lambda_point_specialize, large_volume_specialize
from .coefficients.rings import _format_terms
from .errors import InputError, MathematicalFailure, NotGaugeEquivalent
from .hochschild import (DeformationFamily, deformation_to_mc, hh_cohomology, mc_to_deformation,
                         versal_extension)
from .linf.algebra import check_linf_morphism, check_linf_relations, induces_iso_on_cohomology, minimal_model
from .linf.mc import (classify_mc, gauge_equivalent, gauge_flow, kodaira_spencer, mc_residual,
                      versal_family, versality_verdict)
from .report import jsonable

DEFAULT_ARITY = 6
DEFAULT_ORDER = 8
DEFAULT_LENGTH_CAP = 4


class Outcome:
    def __init__(self, verdict, code=0, caps=None, findings=None, data=None, unchecked=None):
        self.verdict = verdict
        self.code = code
        self.caps = caps or {}
        self.findings = findings or []
        self.data = data or {}
        self.unchecked = unchecked or []

    @classmethod
    def from_report(cls, rep, data=None):
        out = cls(rep.verdict, 0 if rep.passed else 1, rep.caps, rep.findings,
                  {**rep.data, **(data or {})}, rep.unchecked)
        return out


def _fixture_dir():
    return str(resources.files("versal") / "fixtures")


def _resolve(path, fixture_dir):
    if os.path.exists(path):
        return path
    base = os.path.basename(path)
    for cand in (base, base + ".json"):
        p = os.path.join(fixture_dir, cand)
        if os.path.exists(p):
            return p
    raise InputError(f"no such file: {path}")


def _load(args, path, kinds):
    kind, value = io.load(_resolve(path, args.fixture_dir))
    if kind not in kinds:
        raise InputError(f"{path}: expected a file of kind {' or '.join(kinds)}, got {kind}")
    return kind, value


def _vec_text(vec):
    return {k: io._fmt(v) for k, v in vec.items()}


# subcommands

def cmd_check_linf(args):
    _, g = _load(args, args.file, ("linf",))
    return Outcome.from_report(check_linf_relations(g, args.arity))


def cmd_check_ainf(args):
    _, A = _load(args, args.file, ("ainf",))
    return Outcome.from_report(check_ainf(A, args.arity))


def cmd_check_functor(args):
    _, F = _load(args, args.file, ("functor",))
    return Outcome.from_report(check_functor(F, args.arity))


def cmd_mc_residual(args):
    _, alpha = _load(args, args.file, ("mc",))
    res = mc_residual(alpha)
    findings = [(i, res[i]) for i in alpha.algebra.basis if i in res]
    return Outcome("pass" if not res else "fail", 0 if not res else 1,
                   {"truncation_order": alpha.ring.N}, findings)


def cmd_gauge(args):
    _, alpha = _load(args, args.file, ("mc",))
    caps = {"truncation_order": alpha.ring.N}
    if args.other:
        _, beta = _load(args, args.other, ("mc",))
        try:
            paths = gauge_equivalent(alpha, beta)
        except NotGaugeEquivalent as e:
            return Outcome("not-equivalent", 1, caps, [(f"order {e.order}", e.obstruction)],
                           {"search": "single constant gauge parameter"})
        data = {"paths": [[_vec_text(layer) for layer in p.gamma] for p in paths]}
        return Outcome("equivalent", 0, caps, data=data)
    if alpha.gamma is None:
        raise InputError("gauge needs a second MC file or a 'gamma' field")
    beta = gauge_flow(alpha.gamma, alpha)
    res = mc_residual(beta)
    data = {"flowed": _vec_text(beta.value), "residual_zero": not res}
    return Outcome("pass" if not res else "fail", 0 if not res else 1, caps,
                   [(i, c) for i, c in res.items()], data)


def cmd_minimal_model(args):
    _, g = _load(args, args.file, ("linf",))
    h, f, H = minimal_model(g, arity_cap=args.arity)
    bound = min(args.arity, 5)
    r1 = check_linf_relations(h, bound)
    r2 = check_linf_morphism(f, bound)
    iso = induces_iso_on_cohomology(f)
    ok = r1.passed and r2.passed and iso and h.is_minimal
    findings = [("minimal", loc, res) for loc, res in r1.findings] + \
               [("morphism", loc, res) for loc, res in r2.findings]
    data = {"model": io.linf_to(h), "cohomology_dims": H.dims(), "l1_zero": h.is_minimal,
            "relations": r1.verdict, "morphism": r2.verdict, "quasi_isomorphism": iso}
    return Outcome("pass" if ok else "fail", 0 if ok else 1,
                   {"arity_cap": args.arity, "check_bound": bound},
                   [(f[:2], f[2]) for f in findings], data)


def cmd_versal(args):
    _, g = _load(args, args.file, ("linf",))
    vp = versal_family(g, args.order, arity_cap=args.arity_given)
    data = {"variables": vp.variables, "h1": vp.h1, "h2": vp.h2,
            "relations": [str(p) for p in vp.relations],
            "polynomials": {e: str(p) for e, p in vp.polynomials.items()},
            "dimension": len(vp.variables), "exact_to_order": vp.exact_to_order}
    if vp.notes:
        data["notes"] = vp.notes
    return Outcome("ok", 0, {"truncation_order": vp.order}, data=data)


def cmd_ks(args):
    _, alpha = _load(args, args.file, ("mc",))
    ks = kodaira_spencer(alpha)
    return Outcome("ok", 0, {"truncation_order": alpha.ring.N},
                   data={"matrix": ks.matrix, "h1": ks.h1, "cotangent": ks.cotangent, "rank": ks.rank})


def cmd_classify(args):
    _, beta = _load(args, args.file, ("mc",))
    vp = versal_family(beta.algebra, max(args.order, beta.ring.N), arity_cap=args.arity_given)
    cl = classify_mc(beta, vp)
    data = {"psi": {x: str(c) for x, c in zip(vp.variables, cl.psi.images)},
            "relations": [str(p) for p in vp.relations],
            "gauge": [[_vec_text(layer) for layer in p.gamma] for p in cl.paths],
            "certified": cl.certified}
    return Outcome("classified" if cl.certified else "fail", 0 if cl.certified else 1,
                   {"truncation_order": beta.ring.N}, [(i, c) for i, c in cl.residual.items()], data)


def cmd_verdict(args):
    _, beta = _load(args, args.file, ("mc",))
    v = versality_verdict(beta)
    return Outcome(v["verdict"], 0, {"truncation_order": beta.ring.N},
                   data={k: val for k, val in v.items() if k != "verdict"})


def cmd_hochschild(args):
    _, A = _load(args, args.file, ("ainf",))
    if A.ring.ngens or A.curvature:
        raise InputError("Hochschild cohomology is computed for uncurved ground-field categories")
    L = args.length_cap
    degrees = [args.degree] if args.degree is not None else [0, 1, 2, 3]
    dims = {}
    reps = {}
    for d in degrees:
        hh = hh_cohomology(A, d, L, without_length_zero=args.truncated)
        dims[d] = hh.dimension
        reps[d] = [io.cochain_to(c)["components"] for c in hh.representatives]
    return Outcome("ok", 0, {"length_cap": L},
                   data={"dimensions": dims, "representatives": reps,
                         "label": f"cohomology of the complex truncated at length cap {L}",
                         "without_length_zero": args.truncated})


def _family(A):
    if not A.ring.ngens:
        raise InputError("a deformation needs a base ring with variables")
    from .ainf.category import reduce_mod_max_ideal
    return DeformationFamily(A.ring, A, reduce_mod_max_ideal(A))


def cmd_deform_to_mc(args):
    _, A = _load(args, args.file, ("ainf",))
    alpha = deformation_to_mc(_family(A))
    return Outcome("ok", 0, {"truncation_order": A.ring.N},
                   data={"cochain": io.to_document("cochain", alpha)})


def cmd_mc_to_deform(args):
    _, alpha = _load(args, args.file, ("cochain",))
    if alpha.ring is None:
        raise InputError("the cochain needs a ring with variables")
    if alpha.degree != 2:
        raise InputError("deformations come from degree-2 cochains")
    D = mc_to_deformation(alpha)
    rep = check_ainf(D.total, args.arity)
    return Outcome(rep.verdict, 0 if rep.passed else 1, rep.caps, rep.findings,
                   {"category": io.to_document("ainf", D.total)}, rep.unchecked)


def cmd_versal_extend(args):
    _, B = _load(args, args.file, ("ainf",))
    if not args.other:
        raise InputError("versal-extend needs the family B and the target category A")
    _, A = _load(args, args.other, ("ainf",))
    fam = _family(B)
    if args.iso:
        _, iso = _load(args, args.iso, ("functor",))
    else:
        iso = identity_functor(fam.reduction)
    N = min(args.order, A.ring.N)
    ve = versal_extension(fam, A, iso, length_cap=args.length_cap, order=N)
    rep = ve.report
    check = check_functor(ve.functor, args.length_cap)
    data = dict(rep.data)
    data["functor_check"] = check.verdict
    ok = rep.passed and check.passed
    return Outcome("pass" if ok else "fail", 0 if ok else 1, rep.caps,
                   rep.findings + check.findings, data)


def _objects(A, args):
    if args.object:
        if args.object not in A.objects:
            raise InputError(f"unknown object {args.object!r}")
        return [args.object]
    return list(A.objects)


def cmd_bc_solve(args):
    _, A = _load(args, args.file, ("ainf",))
    N = min(args.order, A.ring.N) if A.ring.ngens else 0
    results, findings, code = {}, [], 0
    for X in _objects(A, args):
        r = solve_bounding_cochain(A, X, N)
        if isinstance(r, Obstructed):
            code = 1
            findings.append((X, {"order": r.order, "class": r.cls}))
            results[X] = {"obstructed": True, "order": r.order, "class": _vec_text(r.cls)}
        else:
            results[X] = {"obstructed": False, "cochain": _vec_text(r.value)}
    return Outcome("unobstructed" if not code else "obstructed", code,
                   {"truncation_order": N}, findings, {"objects": results})


def cmd_bc_build(args):
    _, A = _load(args, args.file, ("ainf",))
    N = min(args.order, A.ring.N) if A.ring.ngens else 0
    cochains = []
    for X in _objects(A, args):
        r = solve_bounding_cochain(A, X, N)
        if isinstance(r, Obstructed):
            return Outcome("obstructed", 1, {"truncation_order": N},
                           [(X, {"order": r.order, "class": r.cls})])
        cochains.append(r)
    bc = bc_category(A, cochains)
    rep = check_ainf(bc, args.arity)
    return Outcome(rep.verdict, 0 if rep.passed else 1, rep.caps, rep.findings,
                   {"category": io.to_document("ainf", bc),
                    "cochains": {c.object: _vec_text(c.value) for c in cochains},
                    "curvature_zero": not bc.curvature}, rep.unchecked)


def cmd_cone(args):
    _, (c, N, _) = _load(args, args.file, ("cone",))
    N = args.order_given or N
    convex = is_strongly_convex(c)
    data = {"strongly_convex": convex, "generators": [list(g) for g in c.generators],
            "names": list(c.names)}
    if not convex:
        return Outcome("not-strongly-convex", 1, {"truncation_order": N}, data=data)
    rels = toric_binomials(c, N)
    data["relations"] = [_format_terms(r, c.names) for r in rels]
    return Outcome("strongly-convex", 0, {"truncation_order": N}, data=data)


def _parse_values(text, flag):
    out = {}
    for part in text.split(","):
        if ":" not in part:
            raise InputError(f"{flag}: expected name:value pairs")
        k, v = part.split(":", 1)
        try:
            out[k.strip()] = Fraction(v.strip())
        except (ValueError, ZeroDivisionError):
            raise InputError(f"{flag}: bad value {v!r}") from None
    return out


def cmd_specialize(args):
    kind, value = _load(args, args.file, ("cone", "point"))
    if kind == "cone":
        c, N, element = value
        point, cutoff = None, None
    else:
        c, N, element = value["cone"], value["truncation"], value["element"]
        point, cutoff = value["point"], value["cutoff"]
    if args.order_given:
        N = args.order_given
    element = args.element or element
    if element is None:
        raise InputError("no element to specialize; pass --element")
    if args.omega:
        try:
            point = LambdaPoint(c, _parse_values(args.omega, "--omega"),
                                _parse_values(args.b_field, "--b-field") if args.b_field else None)
        except InputError:
            raise
        except ValueError as e:
            raise InputError(str(e)) from None
    if args.cutoff is not None:
        try:
            cutoff = Fraction(args.cutoff)
        except (ValueError, ZeroDivisionError):
            raise InputError(f"--cutoff: bad value {args.cutoff!r}") from None
    R = cone_completion(c, N)
    try:
        x = R.parse(element)
    except (ValueError, SyntaxError, ZeroDivisionError) as e:
        raise InputError(f"bad element {element!r}: {e}") from None
    if point is None:
        return Outcome("ok", 0, {"truncation_order": N},
                       data={"element": str(x), "point": "large volume limit",
                             "value": io._fmt(large_volume_specialize(x))})
    y = lambda_point_specialize(x, point, cutoff if cutoff is not None else float("inf"))
    return Outcome("ok", 0, {"truncation_order": N, "cutoff": y.cutoff},
                   data={"element": str(x), "value": str(y), "valuation": y.valuation()})


COMMANDS = {
    "check-linf": (cmd_check_linf, "check the L-infinity relations"),
    "check-ainf": (cmd_check_ainf, "check the A-infinity relations"),
    "check-functor": (cmd_check_functor, "check the A-infinity functor equations"),
    "mc-residual": (cmd_mc_residual, "Maurer-Cartan residual of an MC file"),
    "gauge": (cmd_gauge, "flow along a gauge path, or test gauge equivalence of two MC files"),
    "minimal-model": (cmd_minimal_model, "homotopy-transfer minimal model with certification"),
    "versal": (cmd_versal, "versal presentation of an L-infinity algebra"),
    "ks": (cmd_ks, "Kodaira-Spencer matrix of an MC element"),
    "classify": (cmd_classify, "classifying map and gauge into the versal family"),
    "verdict": (cmd_verdict, "versal / complete verdict from the Kodaira-Spencer rank"),
    "hochschild": (cmd_hochschild, "Hochschild cohomology at a length cap"),
    "deform-to-mc": (cmd_deform_to_mc, "deformation to Hochschild MC cochain"),
    "mc-to-deform": (cmd_mc_to_deform, "Hochschild MC cochain to deformation"),
    "versal-extend": (cmd_versal_extend, "solve for the classifying map of a deformation"),
    "bc-solve": (cmd_bc_solve, "solve for bounding cochains"),
    "bc-build": (cmd_bc_build, "build the bounding-cochain category"),
    "cone": (cmd_cone, "strong convexity and toric relations of a cone"),
    "specialize": (cmd_specialize, "specialize a cone-ring element to a Novikov series"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def build_parser():
    p = _Parser(prog="versal", description="Deformation theory computations with exact arithmetic.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    for name, (_, help_) in COMMANDS.items():
        q = sub.add_parser(name, help=help_, description=help_)
        q.add_argument("file")
        q.add_argument("other", nargs="?")
        q.add_argument("--order", "-n", type=int, default=None)
        q.add_argument("--arity", type=int, default=None)
        q.add_argument("--length-cap", type=int, default=DEFAULT_LENGTH_CAP)
        q.add_argument("--json", action="store_true", help="machine-readable output")
        q.add_argument("--fixture-dir", default=None)
        q.add_argument("--timing", action="store_true", help="include wall-clock time")
        q.add_argument("--degree", type=int, default=None)
        q.add_argument("--object", default=None)
        q.add_argument("--iso", default=None)
        q.add_argument("--omega", default=None)
        q.add_argument("--b-field", default=None)
        q.add_argument("--cutoff", default=None)
        q.add_argument("--element", default=None)
        q.add_argument("--truncated", action="store_true",
                       help="hochschild: drop length-0 cochains from the complex")
    return p


def _payload(command, out: Outcome):
    d = {"command": command, "verdict": out.verdict, "exit_code": out.code,
         "caps": jsonable(out.caps),
         "findings": [{"location": jsonable(loc), "residual": jsonable(res)} for loc, res in out.findings]}
    if out.unchecked:
        d["unchecked"] = jsonable(out.unchecked)
    if out.data:
        d["data"] = jsonable(out.data)
    return d


def _text(d, indent=0):
    pad = "  " * indent
    lines = []
    for k, v in d.items():
        if isinstance(v, dict) and v:
            lines.append(f"{pad}{k}:")
            lines.extend(_text(v, indent + 1))
        elif isinstance(v, list) and v and any(isinstance(x, (dict, list)) for x in v):
            lines.append(f"{pad}{k}:")
            for x in v:
                if isinstance(x, dict):
                    sub = _text(x, indent + 2)
                    sub[0] = pad + "  - " + sub[0].lstrip()
                    lines.extend(sub)
                else:
                    lines.append(f"{pad}  - {json.dumps(x, sort_keys=True, ensure_ascii=False)}")
        else:
            val = v if isinstance(v, str) else json.dumps(v, sort_keys=True, ensure_ascii=False)
            lines.append(f"{pad}{k}: {val}")
    return lines


def render(d, as_json):
    if as_json:
        return json.dumps(d, sort_keys=True, indent=2, ensure_ascii=False) + "\n"
    return "\n".join(_text(d)) + "\n"


def run(argv=None, stdout=None, stderr=None):
    """Run the CLI; returns the exit code."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    as_json = "--json" in argv
    command = next((a for a in argv if a in COMMANDS), None)
    t0 = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise InputError("missing subcommand; try --help")
        args.fixture_dir = args.fixture_dir or _fixture_dir()
        args.arity_given = args.arity
        args.arity = DEFAULT_ARITY if args.arity is None else args.arity
        args.order_given = args.order
        args.order = DEFAULT_ORDER if args.order is None else args.order
        if args.arity < 1 or args.order < 1 or args.length_cap < 0:
            raise InputError("caps must be positive")
        if args.length_cap > 8:
            raise InputError("length cap above 8 is not supported")
        out = COMMANDS[args.command][0](args)
    except SystemExit as e:   # --help
        return int(e.code or 0)
    except MathematicalFailure as e:
        out = Outcome("failure", 1, findings=[(type(e).__name__, str(e))],
                      data=_failure_data(e))
    except (InputError, ValueError, KeyError, TypeError, OSError, ArithmeticError) as e:
        out = Outcome("input-error", 2, findings=[(type(e).__name__, str(e))])
    except RecursionError:
        out = Outcome("input-error", 2, findings=[("RecursionError", "input nested too deeply")])
    except Exception as e:  # never crash; reported apart from input errors
        out = Outcome("internal-error", 2, findings=[(type(e).__name__, str(e))])
    d = _payload(command or "versal", out)
    if getattr(locals().get("args"), "timing", False):
        d["timing_seconds"] = round(time.perf_counter() - t0, 6)
    stdout.write(render(d, as_json))
    return out.code


def _failure_data(e):
    data = {}
    for attr in ("order", "obstruction", "location", "residual"):
        if hasattr(e, attr):
            data[attr] = getattr(e, attr)
    return data


def main():
    sys.exit(run())
