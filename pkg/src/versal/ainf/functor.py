"""Curved A-infinity functors: checks, composition, inverses, transport and bc functors.

A functor ``F: A -> B`` has components ``F^s`` of degree ``1 - s`` and a
curvature term ``F^0`` (one degree-1 endomorphism of ``F(X)`` per source
object, coefficients in m).  In bar terms every ``F^s`` has degree 0, so the
induced coalgebra map carries no signs and the functor equation reads
``F o mu_A^ = mu_B o F^``.
"""

from __future__ import annotations

from fractions import Fraction

from ..coefficients.rings import SeriesElement, series_invert
from ..errors import ComponentNotInvertible, PushforwardNotBounding
from ..graded import ARITY_HARD_CAP
from ..linalg import LinearSystem, axpy
from ..report import Report
from .category import (BoundingCochain, CurvedCategory, _clean, _constant, bc_category, insert_cochains, mc_sum,
                       reduce_mod_max_ideal)
from .tensor import _expand, apply_family, coalgebra_map, coderivation


class CurvedFunctor:
    def __init__(self, source: CurvedCategory, target: CurvedCategory, obj_map, components=None,
                 curvature=None, arity_cap=None, exact_beyond_cap=True, name=None):
        self.source, self.target = source, target
        self.name = name
        self.obj_map = dict(obj_map)
        for X in source.objects:
            if self.obj_map.get(X) not in target.objects:
                raise ValueError(f"object {X} has no image in the target")
        self.components = {}
        for s, table in (components or {}).items():
            s = int(s)
            if not 1 <= s <= ARITY_HARD_CAP:
                raise ValueError(f"component arity {s} outside 1..{ARITY_HARD_CAP}")
            clean = {}
            for ids, vec in table.items():
                ids, vec = tuple(ids), _clean(vec)
                if len(ids) != s:
                    raise ValueError(f"entry {ids} in F^{s}")
                self._check_entry(ids, vec)
                if vec:
                    clean[ids] = vec
            if clean:
                self.components[s] = clean
        self.curvature = {}
        for X, vec in (curvature or {}).items():
            vec = _clean(vec)
            Y = self.obj_map.get(X)
            for o, c in vec.items():
                if (target.src.get(o), target.tgt.get(o)) != (Y, Y) or target.deg[o] != 1:
                    raise ValueError(f"F^0 at {X} must be a degree-1 endomorphism of {Y}")
                if _constant(c):
                    raise ValueError(f"F^0 at {X} is not in the maximal ideal")
            if vec:
                self.curvature[X] = vec
        self.arity_cap = max(max(self.components, default=1), arity_cap or 0)
        self.exact_beyond_cap = exact_beyond_cap

    def _check_entry(self, ids, vec):
        A, B = self.source, self.target
        for a in ids:
            if a not in A.deg:
                raise ValueError(f"unknown source morphism {a!r}")
        for a, b in zip(ids, ids[1:]):
            if A.tgt[a] != A.src[b]:
                raise ValueError(f"entry {ids} is not composable")
        X, Y = self.obj_map[A.src[ids[0]]], self.obj_map[A.tgt[ids[-1]]]
        want = sum(A.deg[a] for a in ids) + 1 - len(ids)
        for o in vec:
            if o not in B.deg:
                raise ValueError(f"unknown target morphism {o!r}")
            if (B.src[o], B.tgt[o]) != (X, Y):
                raise ValueError(f"output {o} of {ids} lies in the wrong hom space")
            if B.deg[o] != want:
                raise ValueError(f"output {o} of {ids} has degree {B.deg[o]}, expected {want}")

    @property
    def strict(self):
        return not self.curvature and all(s == 1 for s in self.components) and self.exact_beyond_cap

    def hat(self, T, max_blocks=None, exact_blocks=None):
        """The coalgebra map ``F^`` applied to a tensor of source words."""
        if max_blocks is None:
            max_blocks = ARITY_HARD_CAP
        return coalgebra_map(self.source, self, T, max_blocks, exact_blocks)

    def __call__(self, ids):
        return self.components.get(len(ids), {}).get(tuple(ids), {})

    def __eq__(self, other):
        return (isinstance(other, CurvedFunctor) and self.obj_map == other.obj_map
                and self.components == other.components and self.curvature == other.curvature
                and self.source == other.source and self.target == other.target)

    def __repr__(self):
        return (f"CurvedFunctor({self.name + ': ' if self.name else ''}arities {sorted(self.components)}"
                f"{', curved' if self.curvature else ''}{', strict' if self.strict else ''})")


def identity_functor(A: CurvedCategory) -> CurvedFunctor:
    comps = {1: {(a,): {a: Fraction(1)} for a in A.deg}}
    return CurvedFunctor(A, A, {X: X for X in A.objects}, comps, arity_cap=1)


def _blocks_bound(F):
    return F.target.arity_cap if F.target.exact_beyond_cap else ARITY_HARD_CAP


def functor_relation(F: CurvedFunctor, word):
    """``F o mu_A^ - mu_B o F^`` on one source word."""
    A, B = F.source, F.target
    T = {word: Fraction(1)}
    lhs = apply_family(F.components, {}, coderivation(A, A.ops, A.curvature, T, 1))
    rhs = apply_family(B.ops, B.curvature, F.hat(T, max_blocks=_blocks_bound(F)))
    return _clean(axpy(lhs, -1, rhs))


def check_functor(F: CurvedFunctor, arity_bound=6) -> Report:
    A, B = F.source, F.target
    bound = min(arity_bound, ARITY_HARD_CAP)
    N = max(A.ring.N, B.ring.N)
    rep = Report("pass", caps={"arity_bound": bound, "truncation_order": N})
    f0 = bool(F.curvature)
    for n in range(0, bound + 1):
        gaps = []
        if not A.exact_beyond_cap and n + (1 if A.curvature else 0) > A.arity_cap:
            gaps.append("source")
        if not F.exact_beyond_cap and n > F.arity_cap:
            gaps.append("functor")
        if not B.exact_beyond_cap and n + (N if f0 else 0) > B.arity_cap:
            gaps.append("target")
        if gaps:
            rep.unchecked.append(f"words of length {n} reach beyond the {'/'.join(gaps)} cap")
            continue
        if n == 0 and not (A.curvature or B.curvature or f0):
            continue
        for word in A.words(n):
            r = functor_relation(F, word)
            if r:
                rep.add(word[1] if n else (word[0],), r)
    if rep.findings:
        rep.verdict = "fail"
    elif rep.unchecked:
        rep.verdict = "pass-with-unchecked"
    return rep


def compose(G: CurvedFunctor, F: CurvedFunctor, arity_cap=None) -> CurvedFunctor:
    """``G o F`` (apply ``F`` first), componentwise ``G o F^``."""
    if F.target != G.source:
        raise ValueError("functors are not composable")
    A = F.source
    if F.strict:
        cap, exact = G.arity_cap, G.exact_beyond_cap
    elif G.strict or (not G.curvature and G.arity_cap == 1):
        cap, exact = F.arity_cap, F.exact_beyond_cap and G.exact_beyond_cap
    else:
        cap, exact = max(F.arity_cap, G.arity_cap), False
    cap = min(arity_cap or cap, ARITY_HARD_CAP)
    comps = {}
    for n in range(1, cap + 1):
        table = {}
        for L0, ids in A.words(n):
            T = F.hat({(L0, ids): Fraction(1)}, max_blocks=G.arity_cap)
            val = _clean(apply_family(G.components, G.curvature, T))
            if val:
                table[ids] = val
        if table:
            comps[n] = table
    curv = {}
    for X in A.objects:
        T = F.hat({(X, ()): Fraction(1)}, max_blocks=G.arity_cap)
        val = _clean(apply_family(G.components, G.curvature, T))
        if val:
            curv[X] = val
    obj = {X: G.obj_map[F.obj_map[X]] for X in A.objects}
    return CurvedFunctor(A, G.target, obj, comps, curv, arity_cap=cap, exact_beyond_cap=exact)


def _invert_matrix(rows, cols, entry):
    """Inverse of a square matrix over a local ring (or field).

    ``entry(r, c)`` gives coefficients; pivots must be units.  Returns a dict
    ``(c, r) -> coefficient`` for the inverse.
    """
    n = len(rows)
    if len(cols) != n:
        raise ComponentNotInvertible(f"hom spaces of dimensions {len(cols)} and {n}")
    M = [[entry(r, c) for c in cols] + [Fraction(int(i == k)) for k in range(n)]
         for i, r in enumerate(rows)]
    for j in range(n):
        piv = next((i for i in range(j, n) if _constant(M[i][j])), None)
        if piv is None:
            raise ComponentNotInvertible("first component is not invertible modulo the maximal ideal")
        M[j], M[piv] = M[piv], M[j]
        p = M[j][j]
        inv = series_invert(p) if isinstance(p, SeriesElement) else Fraction(1) / p
        M[j] = [x * inv for x in M[j]]
        for i in range(n):
            if i != j and M[i][j]:
                f = M[i][j]
                M[i] = [x - f * y for x, y in zip(M[i], M[j])]
    return {(c, r): M[i][n + k] for k, r in enumerate(rows) for i, c in enumerate(cols) if M[i][n + k]}


def invert_iso(F: CurvedFunctor, arity_cap=None) -> CurvedFunctor:
    """The strict inverse ``G`` with ``G o F = id`` up to the arity cap."""
    if F.curvature:
        raise ComponentNotInvertible("functors with a curvature term are not invertible here")
    A, B = F.source, F.target
    inv_obj = {}
    for X, Y in F.obj_map.items():
        if Y in inv_obj:
            raise ComponentNotInvertible(f"objects {inv_obj[Y]} and {X} have the same image")
        inv_obj[Y] = X
    if set(inv_obj) != set(B.objects):
        raise ComponentNotInvertible("object map is not surjective")
    F1 = F.components.get(1, {})
    G1 = {}
    for X, Y in ((X, Y) for X in A.objects for Y in A.objects):
        src = A.hom(X, Y)
        tgt = B.hom(F.obj_map[X], F.obj_map[Y])
        inv = _invert_matrix(tgt, src, lambda r, c: F1.get((c,), {}).get(r, 0))
        for b in tgt:
            G1[(b,)] = {a: v for (a, r), v in inv.items() if r == b}
    cap = F.arity_cap if F.strict else min(arity_cap or F.arity_cap, ARITY_HARD_CAP)
    comps = {1: G1}
    for n in range(2, cap + 1):
        table = {}
        for L0, ids in B.words(n):
            w = {(inv_obj[L0], k): v for k, v in _expand([G1[(b,)] for b in ids], Fraction(1)).items()}
            T = coalgebra_map(A, F, w, max_blocks=n - 1)
            val = _clean(apply_family(comps, {}, T))
            if val:
                table[ids] = {o: -v for o, v in val.items()}
        if table:
            comps[n] = table
    return CurvedFunctor(B, A, inv_obj, comps, arity_cap=cap, exact_beyond_cap=F.strict)


def transport_structure(A: CurvedCategory, F: CurvedFunctor, arity_cap=None):
    """Move the structure of ``A`` onto the bases of ``F.target`` along ``F``.

    The new structure is ``F^ o mu_A^ o G^`` with ``G`` the inverse of ``F``,
    so ``F: A -> A'`` is an A-infinity isomorphism.  If ``F`` is a functor
    ``A_0 -> B_0`` of the reductions, ``A'`` reduces to ``B_0`` exactly.
    Returns ``(A', F')`` where ``F'`` is ``F`` retargeted to ``A'``.
    """
    if F.source.objects != A.objects or F.source.hom_basis() != A.hom_basis():
        raise ValueError("functor source does not match the category")
    G = invert_iso(F, arity_cap)
    B = F.target
    exact = F.strict and A.exact_beyond_cap
    cap = A.arity_cap if exact else min(arity_cap or max(A.arity_cap, F.arity_cap), ARITY_HARD_CAP)
    ops = {}
    for n in range(1, cap + 1):
        table = {}
        for L0, ids in B.words(n):
            T = coalgebra_map(B, G, {(L0, ids): Fraction(1)}, max_blocks=cap)
            T = coderivation(A, A.ops, A.curvature, T, 1)
            val = _clean(apply_family(F.components, {}, T))
            if val:
                table[ids] = val
        if table:
            ops[n] = table
    curv = {}
    for Y in B.objects:
        T = coderivation(A, A.ops, A.curvature, {(G.obj_map[Y], ()): Fraction(1)}, 1)
        val = _clean(apply_family(F.components, {}, T))
        if val:
            curv[Y] = val
    A2 = CurvedCategory(B.objects, B.hom_basis(), ops, curv, A.ring, arity_cap=cap,
                        exact_beyond_cap=exact, name=A.name)
    F2 = CurvedFunctor(A, A2, F.obj_map, F.components, arity_cap=F.arity_cap,
                       exact_beyond_cap=F.exact_beyond_cap)
    return A2, F2


def pushforward_cochain(F: CurvedFunctor, obj, alpha):
    """``F^0 + sum_k F^k(alpha, ..., alpha)`` at ``F(obj)``."""
    out = dict(F.curvature.get(obj, {}))
    A = F.source
    power = {(obj, ()): Fraction(1)}
    for _ in range(1, min(F.arity_cap, max(A.ring.N, 1)) + 1):
        nxt = {}
        for (L0, ids), c in power.items():
            for a, x in alpha.items():
                v = c * x
                if v:
                    nxt[(L0, ids + (a,))] = nxt.get((L0, ids + (a,)), 0) + v
        power = {k: v for k, v in nxt.items() if v}
        if not power:
            break
        axpy(out, 1, apply_family(F.components, {}, power))
    return _clean(out)


def _complex_data(C, X, Y):
    """Cycles and boundaries of ``(hom(X, Y), mu^1)`` per degree, ground field."""
    ids = C.hom(X, Y)
    degs = sorted({C.deg[i] for i in ids})
    out = {}
    for k in degs:
        cells = [i for i in ids if C.deg[i] == k]
        lower = [i for i in ids if C.deg[i] == k - 1]
        zsys = LinearSystem([dict(C.mu((i,))) for i in cells])
        cycles = [{cells[j]: v for j, v in t.items()} for t in zsys.kernel]
        bnd = [dict(C.mu((i,))) for i in lower]
        out[k] = (cycles, bnd)
    return out


def _apply_linear(F1, vec):
    out = {}
    for a, c in vec.items():
        axpy(out, c, F1.get((a,), {}))
    return out


def cohomology_map_report(F0: CurvedFunctor):
    """Ranks of ``H(F^1)`` on every hom complex of ground-field categories."""
    A, B = F0.source, F0.target
    F1 = F0.components.get(1, {})
    rows = []
    for X in A.objects:
        for Y in A.objects:
            dA = _complex_data(A, X, Y)
            dB = _complex_data(B, F0.obj_map[X], F0.obj_map[Y])
            for k in sorted(set(dA) | set(dB)):
                zA, bA = dA.get(k, ([], []))
                zB, bB = dB.get(k, ([], []))
                hA = len(zA) - LinearSystem(bA).rank
                hB = len(zB) - LinearSystem(bB).rank
                rB = LinearSystem(bB).rank
                img = LinearSystem(bB + [_apply_linear(F1, z) for z in zA]).rank - rB
                rows.append({"hom": (X, Y), "degree": k, "dim_source": hA,
                             "dim_target": hB, "rank": img})
    return rows


def bc_functor(F: CurvedFunctor, cochains):
    """The uncurved functor ``F^bc`` between bounding-cochain categories.

    ``cochains`` is a list of :class:`BoundingCochain` on source objects.
    Returns ``(F_bc, report)``; the report certifies the quasi-embedding
    property only on the associated graded of the m-adic filtration, up to
    the truncation order.
    """
    A, B = F.source, F.target
    Abc = bc_category(A, cochains)
    under = [Abc.underlying[n] for n in Abc.objects]
    pushed = []
    for n in Abc.objects:
        b = pushforward_cochain(F, Abc.underlying[n], Abc.cochains[n])
        obj = F.obj_map[Abc.underlying[n]]
        if mc_sum(B, obj, b):
            raise PushforwardNotBounding(f"pushforward of the cochain at {n} has a residual")
        pushed.append(BoundingCochain(obj, b))
    targets = [bc.object for bc in pushed]
    tnames = targets if len(set(targets)) == len(targets) else [f"{o}#{k}" for k, o in enumerate(targets)]
    Bbc = bc_category(B, pushed, names=tnames)
    alphas = [Abc.cochains[n] for n in Abc.objects]
    comps = {}
    cap = F.arity_cap
    m = len(under)
    inv_a = {v: k for k, v in Abc.idmap.items()}
    for n in range(1, cap + 1):
        table = {}
        for L0, ids in Abc.words(n):
            path = [Abc.objects.index(L0)] + [Abc.objects.index(Abc.tgt[a]) for a in ids]
            raw = tuple(inv_a[a][2] for a in ids)
            val = insert_cochains(F.components, raw, [alphas[p] for p in path], cap)
            if val:
                table[ids] = {Bbc.idmap[(path[0], path[-1], o)]: c for o, c in val.items()}
        if table:
            comps[n] = table
    Fbc = CurvedFunctor(Abc, Bbc, dict(zip(Abc.objects, tnames)), comps, arity_cap=cap,
                        exact_beyond_cap=F.exact_beyond_cap)
    rep = quasi_embedding_certificate(F)
    rep.data["objects"] = m
    return Fbc, rep


def reduce_functor(F: CurvedFunctor) -> CurvedFunctor:
    comps = {s: {k: _clean({o: _constant(c) for o, c in v.items()}) for k, v in t.items()}
             for s, t in F.components.items()}
    return CurvedFunctor(reduce_mod_max_ideal(F.source), reduce_mod_max_ideal(F.target),
                         F.obj_map, comps, arity_cap=F.arity_cap, exact_beyond_cap=F.exact_beyond_cap)


def quasi_embedding_certificate(F: CurvedFunctor) -> Report:
    """Cohomological full faithfulness of ``F mod m``, read on each m-adic graded piece.

    On ``gr_k`` every bc structure reduces to ``mu^1 mod m`` tensored with
    ``m^k/m^(k+1)``, so the check is the same for each ``k <= N``; it says
    nothing about convergence beyond the truncation order.
    """
    F0 = reduce_functor(F)
    rows = cohomology_map_report(F0)
    ok = all(r["rank"] == r["dim_source"] == r["dim_target"] for r in rows)
    N = max(F.source.ring.N, F.target.ring.N)
    rep = Report("quasi-embedding on associated graded" if ok else "not certified",
                 caps={"truncation_order": N},
                 data={"level": f"associated graded, orders 0..{N}", "homs": rows})
    if not ok:
        for r in rows:
            if not r["rank"] == r["dim_source"] == r["dim_target"]:
                rep.add((r["hom"], r["degree"]), {"rank": r["rank"], "source": r["dim_source"],
                                                  "target": r["dim_target"]})
    return rep
