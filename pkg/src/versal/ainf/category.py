"""Curved A-infinity categories over truncated local rings.

Composition is written in path order: ``mu^s(a_1, ..., a_s)`` with
``a_k in hom(L_(k-1), L_k)`` lands in ``hom(L_0, L_s)``.  The relations use
the bar sign ``(-1)^(|a_1| + ... + |a_i| + i)`` in front of every inner
insertion after ``a_1 .. a_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..coefficients.rings import GROUND, SeriesElement
from ..errors import InvalidCochain
from ..graded import ARITY_HARD_CAP
from ..linalg import LinearSystem, axpy
from ..report import Report
from .tensor import apply_family, coderivation


def _clean(vec):
    return {k: v for k, v in vec.items() if v}


def _constant(c):
    return c.constant() if isinstance(c, SeriesElement) else c


class CurvedCategory:
    """Objects, graded hom bases and structure maps ``mu^s`` (``s >= 0``).

    ``homs`` maps ``(X, Y)`` to a list of ``(id, degree)``; ids are unique in
    the category.  ``operations[s]`` maps composable ``s``-tuples of ids to
    vectors; ``curvature[X]`` is ``mu^0`` at ``X``.  Operations above
    ``arity_cap`` are zero when ``exact_beyond_cap`` holds and unknown
    otherwise.
    """

    def __init__(self, objects, homs, operations=None, curvature=None, ring=GROUND,
                 arity_cap=None, exact_beyond_cap=True, name=None):
        self.objects = tuple(objects)
        if len(set(self.objects)) != len(self.objects):
            raise ValueError("object names must be unique")
        self.ring = ring
        self.name = name
        self.homs = {}
        self.src, self.tgt, self.deg = {}, {}, {}
        for (X, Y), basis in homs.items():
            if X not in self.objects or Y not in self.objects:
                raise ValueError(f"hom space ({X}, {Y}) between unknown objects")
            ids = []
            for i, d in basis:
                if i in self.deg:
                    raise ValueError(f"morphism id {i!r} used twice")
                self.src[i], self.tgt[i], self.deg[i] = X, Y, int(d)
                ids.append(i)
            if ids:
                self.homs[(X, Y)] = ids
        self.ops = {}
        for s, table in (operations or {}).items():
            s = int(s)
            if not 1 <= s <= ARITY_HARD_CAP:
                raise ValueError(f"operation arity {s} outside 1..{ARITY_HARD_CAP}")
            clean = {}
            for ids, vec in table.items():
                ids = tuple(ids)
                vec = _clean(vec)
                if len(ids) != s:
                    raise ValueError(f"entry {ids} in mu^{s}")
                self._check_entry(ids, vec, 2 - s)
                if vec:
                    clean[ids] = vec
            if clean:
                self.ops[s] = clean
        self.curvature = {}
        for X, vec in (curvature or {}).items():
            vec = _clean(vec)
            for i, c in vec.items():
                if self.src.get(i) != X or self.tgt.get(i) != X or self.deg[i] != 2:
                    raise ValueError(f"curvature at {X} must be a degree-2 endomorphism")
                if _constant(c):
                    raise ValueError(f"curvature at {X} is not in the maximal ideal")
            if vec:
                self.curvature[X] = vec
        self.arity_cap = max(max(self.ops, default=2), arity_cap or 0)
        self.exact_beyond_cap = exact_beyond_cap

    def _check_entry(self, ids, vec, degree):
        for a, b in zip(ids, ids[1:]):
            if self.tgt[a] != self.src[b]:
                raise ValueError(f"entry {ids} is not composable")
        L0, Ls = self.src[ids[0]], self.tgt[ids[-1]]
        want = sum(self.deg[a] for a in ids) + degree
        for o in vec:
            if o not in self.deg:
                raise ValueError(f"unknown morphism {o!r}")
            if (self.src[o], self.tgt[o]) != (L0, Ls):
                raise ValueError(f"output {o} of {ids} lies in the wrong hom space")
            if self.deg[o] != want:
                raise ValueError(f"output {o} of {ids} has degree {self.deg[o]}, expected {want}")

    # structure access
    def hom(self, X, Y):
        return self.homs.get((X, Y), [])

    def hom_basis(self):
        return {k: [(i, self.deg[i]) for i in v] for k, v in self.homs.items()}

    def mu(self, ids, L0=None):
        ids = tuple(ids)
        if not ids:
            return self.curvature.get(L0, {})
        return self.ops.get(len(ids), {}).get(ids, {})

    @property
    def is_curved(self):
        return bool(self.curvature)

    def composable_words(self, n, start=None):
        """All composable ``n``-tuples of basis ids, deterministic order."""
        out = []
        starts = [start] if start is not None else list(self.objects)

        def rec(obj, prefix):
            if len(prefix) == n:
                out.append(tuple(prefix))
                return
            for Y in self.objects:
                for a in self.homs.get((obj, Y), []):
                    prefix.append(a)
                    rec(Y, prefix)
                    prefix.pop()

        for X in starts:
            if n == 0:
                out.append(())
            else:
                rec(X, [])
        return out

    def words(self, n):
        """Words ``(L0, ids)`` of length ``n``."""
        if n == 0:
            return [(X, ()) for X in self.objects]
        return [(self.src[w[0]], w) for w in self.composable_words(n)]

    def __eq__(self, other):
        return (isinstance(other, CurvedCategory) and self.objects == other.objects
                and self.ring == other.ring and self.hom_basis() == other.hom_basis()
                and self.ops == other.ops and self.curvature == other.curvature)

    def __repr__(self):
        label = f"{self.name}: " if self.name else ""
        return (f"CurvedCategory({label}{len(self.objects)} objects, {len(self.deg)} morphisms, "
                f"arities {sorted(self.ops)}{', curved' if self.curvature else ''})")

    def with_structure(self, operations, curvature=None, arity_cap=None, exact_beyond_cap=True,
                       ring=None, name=None):
        return CurvedCategory(self.objects, self.hom_basis(), operations, curvature,
                              ring if ring is not None else self.ring,
                              arity_cap=arity_cap or self.arity_cap,
                              exact_beyond_cap=exact_beyond_cap, name=name or self.name)


def ainf_relation(A, word):
    """The A-infinity relation on a word ``(L0, ids)``."""
    T = {word: Fraction(1)}
    return _clean(apply_family(A.ops, A.curvature, coderivation(A, A.ops, A.curvature, T, 1)))


def check_ainf(A: CurvedCategory, arity_bound=6) -> Report:
    bound = min(arity_bound, ARITY_HARD_CAP)
    rep = Report("pass", caps={"arity_bound": bound, "arity_cap": A.arity_cap,
                               "truncation_order": A.ring.N})
    extra = 1 if A.curvature else 0
    for n in range(0, bound + 1):
        if n + extra > A.arity_cap and not A.exact_beyond_cap:
            rep.unchecked.append(f"words of length {n} need mu^{n + extra} beyond the cap")
            continue
        if n == 0 and not A.curvature:
            continue
        for word in A.words(n):
            r = ainf_relation(A, word)
            if r:
                rep.add(word[1] if n else (word[0],), r)
    if rep.findings:
        rep.verdict = "fail"
    elif rep.unchecked:
        rep.verdict = "pass-with-unchecked"
    return rep


def reduce_mod_max_ideal(A: CurvedCategory) -> CurvedCategory:
    """Reduce coefficients modulo m; the curvature disappears."""
    ops = {s: {k: _clean({o: _constant(c) for o, c in v.items()}) for k, v in t.items()}
           for s, t in A.ops.items()}
    return CurvedCategory(A.objects, A.hom_basis(), ops, {}, GROUND, arity_cap=A.arity_cap,
                          exact_beyond_cap=A.exact_beyond_cap, name=A.name)


# bounding cochains

@dataclass
class BoundingCochain:
    object: str
    value: dict

    def __eq__(self, other):
        return (isinstance(other, BoundingCochain) and self.object == other.object
                and _clean(self.value) == _clean(other.value))


@dataclass
class Obstructed:
    order: int
    cls: dict                   # cohomology-class representative id -> ring coefficient
    representative: dict = field(default_factory=dict)


def mc_sum(A, obj, alpha):
    """``sum_s mu^s(alpha, ..., alpha)`` at ``obj``."""
    out = dict(A.curvature.get(obj, {}))
    cap = A.arity_cap
    power = {(obj, ()): Fraction(1)}
    for s in range(1, min(cap, max(A.ring.N, 1)) + 1):
        nxt = {}
        for (L0, ids), c in power.items():
            for a, x in alpha.items():
                v = c * x
                if v:
                    nxt[(L0, ids + (a,))] = nxt.get((L0, ids + (a,)), 0) + v
        power = {k: v for k, v in nxt.items() if v}
        if not power:
            break
        axpy(out, 1, apply_family(A.ops, {}, power))
    return _clean(out)


class EndCohomology:
    """Splitting of ``(hom(L, L), mu^1 mod m)`` used for obstruction classes."""

    def __init__(self, A0, obj):
        self.ids = A0.hom(obj, obj)
        d = lambda i: dict(A0.mu((i,)))
        self.d = d
        self.by_degree = {}
        for k in sorted({A0.deg[i] for i in self.ids}):
            cells = [i for i in self.ids if A0.deg[i] == k]
            lower = [i for i in self.ids if A0.deg[i] == k - 1]
            bsys = LinearSystem([d(i) for i in lower])
            bnd = [d(lower[j]) for j in bsys.independent]
            zsys = LinearSystem([d(i) for i in cells])
            cycles = [{cells[j]: v for j, v in t.items()} for t in zsys.kernel]
            names = [cells[max(t)] for t in zsys.kernel]
            ext = LinearSystem(bnd + cycles)
            chosen = [j - len(bnd) for j in ext.independent if j >= len(bnd)]
            self.by_degree[k] = (bnd, [cycles[j] for j in chosen], [names[j] for j in chosen],
                                 LinearSystem(bnd + [cycles[j] for j in chosen]))

    def cls(self, vec, k):
        """Coordinates of a cocycle's class; ``None`` if ``vec`` is not a cocycle."""
        if k not in self.by_degree:
            return {}
        bnd, reps, names, sys_ = self.by_degree[k]
        sol = sys_.solve(vec)
        if sol is None:
            return None
        return {names[j - len(bnd)]: c for j, c in sol.items() if j >= len(bnd)}


def solve_bounding_cochain(A: CurvedCategory, obj, truncation_order=None, complement="first"):
    """Order-by-order solution of ``sum_s mu^s(alpha^s) = 0`` at ``obj``.

    Returns a :class:`BoundingCochain` or an :class:`Obstructed` carrying the
    first nonvanishing class in ``H^2(hom(L, L), mu^1 mod m)`` and its order.
    ``complement="last"`` prefers late basis vectors in every linear solve,
    which changes the cochain by exact terms only.
    """
    R = A.ring
    N = R.N if truncation_order is None else min(int(truncation_order), R.N)
    A0 = reduce_mod_max_ideal(A)
    ones = [i for i in A.hom(obj, obj) if A.deg[i] == 1]
    cols = [dict(A0.mu((i,))) for i in ones]
    order = list(range(len(ones)))
    if complement == "last":
        order.reverse()
    system = LinearSystem([cols[j] for j in order])
    H = EndCohomology(A0, obj)
    alpha = {}
    for k in range(1, N + 1):
        E = mc_sum(A, obj, alpha)
        if not E:
            break
        basis, coords = R.graded_piece(k)
        parts = [{} for _ in basis]
        for i, c in E.items():
            for b, v in coords(c).items():
                parts[b][i] = v
        cls, rep = {}, {}
        for b, Eb in zip(basis, parts):
            if not Eb:
                continue
            sol = system.solve({i: -v for i, v in Eb.items()})
            if sol is None:
                c = H.cls(Eb, 2)
                if c is None:
                    c = {"<non-closed>": Fraction(1)}
                for h, v in c.items():
                    cls[h] = cls.get(h, R.zero) + v * b
                for i, v in Eb.items():
                    rep[i] = rep.get(i, R.zero) + v * b
                continue
            for j, v in sol.items():
                i = ones[order[j]]
                alpha[i] = alpha.get(i, R.zero) + v * b
        cls = {h: c for h, c in cls.items() if c}
        if cls:
            return Obstructed(k, cls, rep)
        alpha = {i: c for i, c in alpha.items() if c}
    if N == R.N and mc_sum(A, obj, alpha):
        raise AssertionError("order-by-order solve left a residual")
    return BoundingCochain(obj, alpha)


def bc_category(A: CurvedCategory, cochains, names=None) -> CurvedCategory:
    """The uncurved category of pairs ``(L, alpha)``.

    ``cochains`` is a list of :class:`BoundingCochain` (or a dict object ->
    value).  ``names`` optionally names the new objects; ids are renamed
    ``"<id>@<i>,<j>"`` only when an underlying object appears twice.
    """
    if isinstance(cochains, dict):
        cochains = [BoundingCochain(o, v) for o, v in cochains.items()]
    cochains = list(cochains)
    for bc in cochains:
        if bc.object not in A.objects:
            raise InvalidCochain(f"unknown object {bc.object!r}")
        for i, c in bc.value.items():
            if (A.src.get(i), A.tgt.get(i)) != (bc.object, bc.object) or A.deg[i] != 1:
                raise InvalidCochain(f"{i} is not a degree-1 endomorphism of {bc.object}")
            if _constant(c):
                raise InvalidCochain(f"cochain coefficient of {i} is not in the maximal ideal")
        res = mc_sum(A, bc.object, bc.value)
        if res:
            raise InvalidCochain(f"cochain at {bc.object} has nonzero residual {res}")
    under = [bc.object for bc in cochains]
    if names is None:
        names = under if len(set(under)) == len(under) else [f"{o}#{k}" for k, o in enumerate(under)]
    rename = len(set(under)) != len(under)
    idmap, homs = {}, {}
    for p, X in enumerate(under):
        for q, Y in enumerate(under):
            basis = []
            for i in A.hom(X, Y):
                new = f"{i}@{p},{q}" if rename else i
                idmap[(p, q, i)] = new
                basis.append((new, A.deg[i]))
            if basis:
                homs[(names[p], names[q])] = basis
    alphas = [bc.value for bc in cochains]
    cap = A.arity_cap
    ops = {}
    for n in range(1, cap + 1):
        table = {}
        for path in _object_paths(len(under), n):
            for ids in _words_over(A, [under[p] for p in path]):
                val = insert_cochains(A.ops, ids, [alphas[p] for p in path], cap)
                if val:
                    table[tuple(idmap[(path[k], path[k + 1], a)] for k, a in enumerate(ids))] = {
                        idmap[(path[0], path[-1], o)]: c for o, c in val.items()}
        if table:
            ops[n] = table
    out = CurvedCategory(names, homs, ops, {}, A.ring, arity_cap=cap,
                         exact_beyond_cap=A.exact_beyond_cap,
                         name=f"{A.name}^bc" if A.name else None)
    out.underlying = dict(zip(names, under))
    out.cochains = dict(zip(names, alphas))
    out.idmap = idmap
    return out


def _object_paths(m, n):
    out = [[]]
    for _ in range(n + 1):
        out = [p + [k] for p in out for k in range(m)]
    return out


def _words_over(A, objs):
    """Composable id tuples following the object sequence ``objs``."""
    out = [()]
    for X, Y in zip(objs, objs[1:]):
        out = [w + (a,) for w in out for a in A.hom(X, Y)]
    return out


def insert_cochains(ops, ids, alphas, cap):
    """``sum M(alpha.., a_1, alpha.., ..., a_n, alpha..)`` for a family ``ops``.

    ``alphas[k]`` is the cochain inserted at the ``k``-th object along the
    word; the total length stays within ``cap``.
    """
    n = len(ids)
    words = {(): Fraction(1)}
    for pos in range(n + 1):
        # insert any number of copies of the cochain at objs[pos], then a_(pos+1)
        grown = {}
        al = alphas[pos]
        frontier = dict(words)
        while frontier:
            for w, c in frontier.items():
                grown[w] = grown.get(w, 0) + c
            nxt = {}
            if al:
                for w, c in frontier.items():
                    if len(w) + (n - pos) >= cap:
                        continue
                    for a, x in al.items():
                        v = c * x
                        if v:
                            nxt[w + (a,)] = nxt.get(w + (a,), 0) + v
            frontier = {w: c for w, c in nxt.items() if c}
        words = {w + ((ids[pos],) if pos < n else ()): c for w, c in grown.items() if c}
    out = {}
    for w, c in words.items():
        val = ops.get(len(w), {}).get(w)
        if val:
            axpy(out, c, val)
    return _clean(out)
