"""Shared test utilities: fixture loading and seeded generators."""

import copy
import io as stdio
import json
import os
import random
from collections import Counter
from fractions import Fraction as Q

import sympy
from scipy.optimize import linprog

from versal import io
from versal.cli import run
from versal.coefficients import make_local_ring
from versal.coefficients.rings import RingMap
from versal.linf.mc import GaugePath, MaurerCartanElement, gauge_flow

FIXTURES = os.path.join(os.path.dirname(__file__), os.pardir, "src", "versal", "fixtures")


def fixture(name):
    return io.load(os.path.join(FIXTURES, name + ".json"))[1]


def fixture_names():
    return sorted(f[:-5] for f in os.listdir(FIXTURES) if f.endswith(".json"))


def random_series(ring, rng, terms=3, constant=False, small=2):
    out = {}
    for _ in range(terms):
        m = tuple(rng.randint(0, 2) for _ in ring.names)
        if not constant and not any(m):
            continue
        out[m] = out.get(m, 0) + Q(rng.randint(-small, small), rng.randint(1, 2))
    return ring.element(out)


def random_mc(vp, rng, names=("r1", "r2"), N=4, gauge=True):
    """A seeded MC element of ``vp.source``: pull back the versal element along
    a random ``psi``, push it through the quasi-isomorphism and flow it.

    The base ring is ``k[[names]]`` modulo the images of the obstruction
    polynomials, so ``psi`` is well defined by construction.  Returns
    ``(beta, unflowed, psi)``.
    """
    g, f = vp.source, vp.morphism
    free = make_local_ring(list(names), [], N)
    imgs = [random_series(free, rng) for _ in vp.variables]
    phi = RingMap(vp.free_ring, free, imgs)
    rels = [phi.apply_terms(p.terms).terms for p in vp.relations]
    R = make_local_ring(list(names), [r for r in rels if r], N)
    psi = RingMap(vp.ring, R, [R.element(x.terms) for x in imgs])
    value = f.pushforward({e: c for e, c in zip(vp.h1, psi.images) if c}, N)
    alpha = MaurerCartanElement(g, R, value)
    if not gauge or not g.in_degree(0):
        return alpha, alpha, psi
    layers = [{i: random_series(R, rng, terms=2) for i in g.in_degree(0)} for _ in range(rng.randint(1, 2))]
    return gauge_flow(GaugePath(layers), alpha), alpha, psi


# oracles

def brute_mc_expansion(g, alpha, N):
    """Oracle: expand sum l^s(alpha^s)/s! with sympy over explicit coefficient lists."""
    out = {}
    for s, op in g.ops.items():
        for ids, vec in op.items():
            # multiplicity of the sorted tuple among ordered s-tuples
            mult = sympy.factorial(s)
            for c in Counter(ids).values():
                mult /= sympy.factorial(c)
            term = mult / sympy.factorial(s)
            for i in ids:
                term *= alpha.get(i, 0)
            for o, c in vec.items():
                out[o] = sympy.expand(out.get(o, 0) + term * sympy.Rational(c.numerator, c.denominator))
    return out


def truncate_poly(expr, xs, N):
    p = sympy.Poly(expr, *xs)
    return {m: Q(int(c.p), int(c.q)) for m, c in zip(p.monoms(), p.coeffs()) if sum(m) <= N and c}


def lp_contains_line(gens):
    """Independent oracle: a nonzero lambda >= 0 with sum lambda_i g_i = 0."""
    gens = [g for g in gens if any(g)]
    if not gens:
        return False
    A = [[g[j] for g in gens] for j in range(len(gens[0]))]
    res = linprog(c=[-1] * len(gens), A_eq=A, b_eq=[0] * len(A), bounds=[(0, 1)] * len(gens))
    return res.status == 0 and -res.fun > 1e-9


# cli

def call(*argv):
    out = stdio.StringIO()
    code = run(list(argv), stdout=out)
    return code, out.getvalue()


COMMANDS_FOR = {
    "linf": ["check-linf", "versal", "minimal-model"],
    "mc": ["mc-residual", "ks", "verdict", "classify", "gauge"],
    "ainf": ["check-ainf", "bc-solve", "bc-build", "hochschild", "deform-to-mc"],
    "functor": ["check-functor"],
    "cochain": ["mc-to-deform"],
    "cone": ["cone", "specialize"],
    "point": ["specialize"],
    "ring": ["cone"],
}

JUNK = [None, True, -1, 0, 7, 10 ** 6, "", "x", "1/0", "x^999", "((", "1/3", 1.5, [], {}, [[]], {"a": 1},
        "e", "t", "-1", "1e400", [1, 2, 3], "u*v", 33]


def _paths(node, path=()):
    yield path
    if isinstance(node, dict):
        for k, v in node.items():
            yield from _paths(v, path + (k,))
    elif isinstance(node, list):
        for i, v in enumerate(node):
            yield from _paths(v, path + (i,))


def _set(doc, path, value):
    if not path:
        return value
    node = doc
    for p in path[:-1]:
        node = node[p]
    if value is _DELETE:
        if isinstance(node, dict):
            del node[path[-1]]
        else:
            node.pop(path[-1])
    else:
        node[path[-1]] = value
    return doc


_DELETE = object()


def mutate(text, rng):
    """One seeded malformation of a fixture: a structural edit or a byte-level edit."""
    if rng.random() < 0.3:
        b = bytearray(text.encode())
        for _ in range(rng.randint(1, 3)):
            i = rng.randrange(len(b))
            op = rng.randrange(3)
            if op == 0:
                del b[i]
            elif op == 1:
                b.insert(i, rng.choice(b'{}[]",:0123456789\xff\\ntruex'))
            else:
                b = b[:i]
                break
        return bytes(b)
    doc = json.loads(text)
    for _ in range(rng.randint(1, 2)):
        paths = list(_paths(doc))
        path = rng.choice(paths[1:])
        r = rng.random()
        if r < 0.2:
            doc = _set(doc, path, _DELETE)
        elif r < 0.3 and isinstance(doc, dict):
            doc[rng.choice(["extra", "kinds", "x"])] = copy.deepcopy(rng.choice(JUNK))
        else:
            doc = _set(doc, path, copy.deepcopy(rng.choice(JUNK)))
    return json.dumps(doc).encode()


def fuzz_cli(cases, seed, path):
    """Run seeded malformed fixtures through the CLI.

    Returns exit-code counts and the cases that escaped the contract.
    """
    rng = random.Random(seed)
    sources = {}
    for name in fixture_names():
        with open(os.path.join(FIXTURES, name + ".json"), encoding="utf-8") as fh:
            text = fh.read()
        sources[name] = (json.loads(text)["kind"], text)
    names = sorted(sources)
    codes, bad = {0: 0, 1: 0, 2: 0}, []
    for case in range(cases):
        name = rng.choice(names)
        kind, text = sources[name]
        path.write_bytes(mutate(text, rng))
        command = rng.choice(COMMANDS_FOR[kind])
        argv = [command, str(path), "--json", "--order", "4", "--arity", "4", "--length-cap", "3"]
        if command == "specialize" and kind == "cone" and rng.random() < 0.5:
            argv += ["--omega", "u:2", "--cutoff", "6"]
        code, out = call(*argv)
        verdict = json.loads(out)["verdict"]
        if code not in (0, 1, 2) or verdict == "internal-error":
            bad.append((case, name, command, out))
        codes[code] = codes.get(code, 0) + 1
    return codes, bad
