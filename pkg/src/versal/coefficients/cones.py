"""Finitely generated cone monoids and their truncated completions."""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from ..errors import NotStronglyConvex
from ..linalg import Echelon, LinearSystem
from .rings import LocalRing, monomials_up_to


class ConeMonoid:
    """Submonoid of ``Z^n`` generated by integer vectors.

    ``inequalities`` is an optional list of integer functionals ``f`` with
    ``f . u >= 0`` on the monoid; every generator is checked against them.
    """

    def __init__(self, generators, inequalities=None, names=None):
        gens = [tuple(int(a) for a in g) for g in generators]
        if not gens:
            raise ValueError("a cone monoid needs at least one generator")
        n = len(gens[0])
        if any(len(g) != n for g in gens):
            raise ValueError("generators must share one ambient rank")
        self.ambient_rank = n
        self.generators = tuple(gens)
        self.inequalities = None
        if inequalities is not None:
            ineqs = [tuple(int(a) for a in f) for f in inequalities]
            for f in ineqs:
                if len(f) != n:
                    raise ValueError("functional has the wrong length")
                for g in gens:
                    if sum(a * b for a, b in zip(f, g)) < 0:
                        raise ValueError(f"generator {g} violates inequality {f}")
            self.inequalities = tuple(ineqs)
        if names is None:
            names = [f"r{i + 1}" for i in range(len(gens))]
        if len(names) != len(gens) or len(set(names)) != len(names):
            raise ValueError("need one distinct name per generator")
        self.names = tuple(names)

    def __repr__(self):
        return f"ConeMonoid({list(self.generators)})"

    def __eq__(self, other):
        return (isinstance(other, ConeMonoid) and self.generators == other.generators
                and self.inequalities == other.inequalities and self.names == other.names)

    def __hash__(self):
        return hash((self.generators, self.inequalities, self.names))

    def image(self, exps):
        """The monoid element ``sum e_i g_i``."""
        return tuple(sum(e * g[j] for e, g in zip(exps, self.generators))
                     for j in range(self.ambient_rank))


def _kernel(vectors):
    cols = [{j: Fraction(a) for j, a in enumerate(v) if a} for v in vectors]
    return LinearSystem(cols).kernel


def is_strongly_convex(c: ConeMonoid) -> bool:
    """True iff the rational cone spanned by the generators contains no line.

    A line exists iff some nonnegative nonzero combination of nonzero
    generators vanishes; a minimal such relation is supported on a circuit, so
    it suffices to scan subsets of size at most ``rank + 1`` whose kernel is
    one-dimensional with a full-support, one-signed kernel vector.
    """
    gens = [g for g in c.generators if any(g)]
    for size in range(2, min(len(gens), c.ambient_rank + 1) + 1):
        for sub in combinations(range(len(gens)), size):
            ker = _kernel([gens[i] for i in sub])
            if len(ker) != 1:
                continue
            v = ker[0]
            if len(v) != size:
                continue
            signs = {x > 0 for x in v.values()}
            if len(signs) == 1:
                return False
    return True


class ConeCompletion(LocalRing):
    """Truncated completion of ``k[M]`` at the ideal of nonzero elements."""

    def __init__(self, cone, relations, truncation_order):
        super().__init__(cone.names, [1] * len(cone.names), relations, truncation_order)
        self.cone = cone


def toric_binomials(c: ConeMonoid, truncation_order):
    """Minimal binomial generators of the truncated toric ideal.

    Monomials of degree ``<= N`` are grouped by their image in the monoid;
    each fiber contributes differences with its graded-lex smallest member,
    and a candidate is kept only if it is not already in the ideal generated
    by the earlier ones (modulo degree ``> N``).
    """
    k = len(c.generators)
    weights = [1] * k
    monos = monomials_up_to(weights, truncation_order)
    fibers = {}
    for m in monos:
        fibers.setdefault(c.image(m), []).append(m)
    cands = []
    for members in fibers.values():
        members.sort(key=lambda m: (sum(m), m))
        low = members[0]
        for m in members[1:]:
            cands.append((m, low))
    cands.sort(key=lambda pair: ((sum(pair[0]), pair[0]), (sum(pair[1]), pair[1])))

    key = lambda m: (sum(m), m)
    ideal = Echelon(order=key)
    kept = []
    for hi, lo in cands:
        p = {hi: Fraction(1), lo: Fraction(-1)}
        if ideal.contains(p):
            continue
        kept.append(p)
        for u in monos:
            row = {}
            for e, v in p.items():
                w = tuple(a + b for a, b in zip(u, e))
                if sum(w) <= truncation_order:
                    row[w] = v
            if row:
                ideal.add(row)
    return kept


def cone_completion(c: ConeMonoid, truncation_order) -> ConeCompletion:
    if any(not any(g) for g in c.generators):
        raise ValueError("zero generators are units, not elements of the maximal ideal")
    if not is_strongly_convex(c):
        raise NotStronglyConvex(f"{c!r} contains a line")
    return ConeCompletion(c, toric_binomials(c, truncation_order), truncation_order)
