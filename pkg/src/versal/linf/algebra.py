"""L-infinity algebras, their relations, cohomology and minimal models.

All operations use the shifted convention: ``l^s`` has degree ``2 - s`` and is
graded symmetric in reduced degrees, and the relations carry only the Koszul
sign of the unshuffle.  Vectors are plain ``{id: coefficient}`` dicts.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations_with_replacement, product
from math import factorial

from ..errors import DifferentialNotSquareZero
from ..graded import (
    ARITY_HARD_CAP, SYMMETRIC, GradedBasis, MultilinearOperation, check_degrees,
    check_symmetry, koszul_sign, unshuffles,
)
from ..linalg import LinearSystem, axpy
from ..report import Report


def _as_op(s, op, basis, degree, target=None):
    if isinstance(op, MultilinearOperation):
        return op
    return MultilinearOperation(s, degree, op, SYMMETRIC, basis, target)


class LInfinityAlgebra:
    """Finite-dimensional L-infinity algebra over the ground field.

    ``operations`` maps arity ``s`` to an entry table or a
    :class:`MultilinearOperation`.  Operations of arity above ``arity_cap``
    are zero by declaration.
    """

    def __init__(self, basis, operations=None, arity_cap=None, name=None):
        if not isinstance(basis, GradedBasis):
            basis = GradedBasis(basis)
        self.basis = basis
        self.name = name
        ops = {}
        for s, op in (operations or {}).items():
            s = int(s)
            if not 1 <= s <= ARITY_HARD_CAP:
                raise ValueError(f"operation arity {s} outside 1..{ARITY_HARD_CAP}")
            op = _as_op(s, op, basis, 2 - s)
            if op.degree != 2 - s:
                raise ValueError(f"l^{s} must have degree {2 - s}")
            bad = check_degrees(op)
            if not bad.passed:
                raise ValueError(f"l^{s} violates the degree law at {bad.findings[0][0]}")
            sym = check_symmetry(op)
            if not sym.passed:
                raise ValueError(f"l^{s} is not graded symmetric at {sym.findings[0][0]}")
            if op:
                ops[s] = op
        top = max(ops, default=1)
        self.arity_cap = max(top, arity_cap or 0)
        if self.arity_cap > ARITY_HARD_CAP:
            raise ValueError(f"arity cap above the hard cap {ARITY_HARD_CAP}")
        self.ops = ops

    def op(self, s):
        return self.ops.get(s)

    def degree(self, i):
        return self.basis.degree(i)

    def in_degree(self, k):
        return self.basis.in_degree(k)

    @property
    def is_minimal(self):
        return 1 not in self.ops

    def differential(self, vec):
        return apply_op(self.ops.get(1), [vec])

    def __repr__(self):
        label = f"{self.name}: " if self.name else ""
        return f"LInfinityAlgebra({label}{len(self.basis)} generators, arities {sorted(self.ops)})"


# evaluation helpers

def apply_op(op, vecs):
    """``op`` applied multilinearly to a list of vectors."""
    if op is None:
        return {}
    out = {}
    for combo in product(*[list(v.items()) for v in vecs]):
        val = op.read(tuple(i for i, _ in combo))
        if not val:
            continue
        c = Fraction(1)
        for _, x in combo:
            c = x * c
        axpy(out, c, val)
    return out


def _powers(c, k):
    out = [Fraction(1), c]
    for _ in range(k - 1):
        out.append(out[-1] * c)
    return out


def symmetric_power(op, vec, s, prefix=()):
    """``op(prefix..., vec, ..., vec) / s!`` for ``vec`` of even reduced degree.

    Expands over multisets: each sorted tuple of distinct-id choices appears
    once with coefficient ``prod c_i^(m_i) / m_i!``.  ``prefix`` is a list of
    vectors placed before the repeated argument.
    """
    if op is None or s < 0:
        return {}
    items = list(vec.items())
    if s and not items:
        return {}
    pows = [_powers(c, s) for _, c in items]
    inv_fact = [Fraction(1, factorial(k)) for k in range(s + 1)]
    out = {}
    pre = list(product(*[list(v.items()) for v in prefix]))
    for ms in combinations_with_replacement(range(len(items)), s):
        mult = {}
        for k in ms:
            mult[k] = mult.get(k, 0) + 1
        c = None
        for k, m in mult.items():
            t = pows[k][m] * inv_fact[m]
            c = t if c is None else c * t
        ids = tuple(items[k][0] for k in ms)
        for combo in pre:
            val = op.read(tuple(i for i, _ in combo) + ids)
            if not val:
                continue
            cc = Fraction(1) if c is None else c
            for _, x in combo:
                cc = x * cc
            axpy(out, cc, val)
    return out


def _unit(i):
    return {i: Fraction(1)}


def _block_sign(blocks, degs):
    perm = [k for b in blocks for k in b]
    return koszul_sign(perm, degs)


def set_partitions(n, k):
    """Partitions of ``range(n)`` into ``k`` nonempty blocks, blocks ordered by minimum."""
    def rec(i, blocks):
        if i == n:
            if len(blocks) == k:
                yield [tuple(b) for b in blocks]
            return
        if len(blocks) + (n - i) < k:
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        if len(blocks) < k:
            blocks.append([i])
            yield from rec(i + 1, blocks)
            blocks.pop()
    yield from rec(0, [])


def linf_relation(g, ids):
    """The L-infinity relation evaluated on the basis tuple ``ids``."""
    n = len(ids)
    degs = [g.basis.reduced_degree(i) for i in ids]
    out = {}
    for j in range(1, n + 1):
        inner = g.ops.get(j)
        outer = g.ops.get(n - j + 1)
        if inner is None or outer is None:
            continue
        for sigma in unshuffles(j, n):
            w = inner.read(tuple(ids[k] for k in sigma[:j]))
            if not w:
                continue
            eps = koszul_sign(sigma, degs)
            rest = [_unit(ids[k]) for k in sigma[j:]]
            axpy(out, eps, apply_op(outer, [w] + rest))
    return out


def check_linf_relations(g: LInfinityAlgebra, arity_bound=6) -> Report:
    """Evaluate every relation of arity ``<= arity_bound`` on sorted basis tuples."""
    bound = min(arity_bound, ARITY_HARD_CAP)
    rep = Report("pass", caps={"arity_bound": bound, "algebra_arity_cap": g.arity_cap})
    if arity_bound > ARITY_HARD_CAP:
        rep.unchecked.append(f"arities {ARITY_HARD_CAP + 1}..{arity_bound}")
    ids = list(g.basis.ids)
    for n in range(1, bound + 1):
        for combo in combinations_with_replacement(ids, n):
            r = linf_relation(g, combo)
            if r:
                rep.add(combo, r)
    if rep.findings:
        rep.verdict = "fail"
    return rep


# cohomology

class Cohomology:
    """Splitting ``C = B + H + L`` of a cochain complex, degree by degree.

    ``reps[k]`` are cocycle representatives (``i``), ``project`` gives
    coordinates in ``H`` (``p``), and ``homotopy`` maps a vector to the
    preimage in ``L`` of its ``B`` component (``h``), so that
    ``d h + h d = id - i p``.
    """

    def __init__(self, g: LInfinityAlgebra):
        self.algebra = g
        basis = g.basis
        d = lambda i: g.differential(_unit(i))
        sq = [i for i in basis if g.differential(d(i))]
        if sq:
            raise DifferentialNotSquareZero(f"l^1 o l^1 is nonzero on {sq[0]}")
        self.ids = {}
        self.reps = {}
        self._decomp = {}
        self._preimage = {}
        self._nB = {}
        self._nH = {}
        degrees = basis.degrees()
        # boundaries B_k with preimages, cycles Z_k
        bnd, pre = {}, {}
        for k in degrees:
            src = basis.in_degree(k - 1)
            sys_ = LinearSystem([d(i) for i in src])
            bnd[k] = [d(src[j]) for j in sys_.independent]
            pre[k] = [_unit(src[j]) for j in sys_.independent]
        for k in degrees:
            cells = basis.in_degree(k)
            zsys = LinearSystem([d(i) for i in cells])
            cycles = [{cells[j]: v for j, v in t.items()} for t in zsys.kernel]
            names = [cells[max(t)] for t in zsys.kernel]
            ext = LinearSystem(bnd[k] + cycles)
            chosen = [j - len(bnd[k]) for j in ext.independent if j >= len(bnd[k])]
            H = [cycles[j] for j in chosen]
            self.ids[k] = [names[j] for j in chosen]
            self.reps[k] = H
            # complement L_k: preimages of B_{k+1}
            L = pre.get(k + 1, [])
            self._decomp[k] = LinearSystem(bnd[k] + H + L)
            self._nB[k] = len(bnd[k])
            self._nH[k] = len(H)
            self._preimage[k] = pre[k]
        self.basis = GradedBasis([(i, k) for k in degrees for i in self.ids[k]])

    def dim(self, k):
        return len(self.ids.get(k, []))

    def dims(self):
        return {k: len(v) for k, v in self.ids.items() if v}

    def _split(self, vec, k):
        sol = self._decomp[k].solve(vec)
        if sol is None:
            raise AssertionError("splitting does not span the degree")
        return sol

    def project(self, vec):
        """Coordinates ``{h_id: c}`` of the ``H`` component."""
        out = {}
        for k, parts in self._group(vec).items():
            sol = self._split(parts, k)
            nB = self._nB[k]
            for j, c in sol.items():
                if nB <= j < nB + self._nH[k]:
                    out[self.ids[k][j - nB]] = c
        return out

    def include(self, hvec):
        out = {}
        for i, c in hvec.items():
            k = self.basis.degree(i)
            axpy(out, c, self.reps[k][self.ids[k].index(i)])
        return out

    def homotopy(self, vec):
        out = {}
        for k, parts in self._group(vec).items():
            sol = self._split(parts, k)
            for j, c in sol.items():
                if j < self._nB[k]:
                    axpy(out, c, self._preimage[k][j])
        return out

    def is_exact(self, vec):
        """True iff ``vec`` lies in ``B``."""
        for k, parts in self._group(vec).items():
            sol = self._split(parts, k)
            if any(j >= self._nB[k] for j in sol):
                return False
        return True

    def _group(self, vec):
        by = {}
        for i, c in vec.items():
            by.setdefault(self.algebra.degree(i), {})[i] = c
        return by


def cohomology(g: LInfinityAlgebra) -> Cohomology:
    """Cached :class:`Cohomology` of ``g``."""
    H = g.__dict__.get("_cohomology")
    if H is None:
        H = g._cohomology = Cohomology(g)
    return H


# morphisms and minimal models

class LInfinityMorphism:
    """Components ``f_n`` (symmetric, reduced degree 0) from ``source`` to ``target``."""

    def __init__(self, source, target, components, arity_cap=None):
        self.source = source
        self.target = target
        self.components = {}
        for n, op in components.items():
            op = _as_op(n, op, source.basis, 1 - n, target.basis)
            if op:
                self.components[n] = op
        self.arity_cap = max(max(self.components, default=1), arity_cap or 0)

    def component(self, n):
        return self.components.get(n)

    def pushforward(self, vec, order):
        """``sum_n f_n(v, ..., v) / n!`` for a degree-1 ``vec`` with coefficients in m."""
        out = {}
        for n in range(1, min(order, self.arity_cap) + 1):
            axpy(out, 1, symmetric_power(self.components.get(n), vec, n))
        return out

    def __repr__(self):
        return f"LInfinityMorphism(arities {sorted(self.components)})"


def identity_morphism(g):
    return LInfinityMorphism(g, g, {1: {(i,): {i: Fraction(1)} for i in g.basis}},
                             arity_cap=g.arity_cap)


def _morphism_sides(f, ids, lower_only=False):
    """Both sides of the morphism relation on ``ids``.

    Returns ``(L, M)`` with ``L = sum_k sum_partitions l_k(f(..), ..., f(..))``
    and ``M = sum_j sum_unshuffles f(l'_j(..), ..)``.  With ``lower_only`` the
    ``k = 1`` and the ``j in {1, n}`` terms are dropped (homotopy transfer).
    """
    g, h = f.target, f.source
    n = len(ids)
    degs = [h.basis.reduced_degree(i) for i in ids]
    L = {}
    for k in range(2 if lower_only else 1, n + 1):
        lk = g.ops.get(k)
        if lk is None:
            continue
        for blocks in set_partitions(n, k):
            vecs = []
            for b in blocks:
                fb = f.components.get(len(b))
                v = fb.read(tuple(ids[t] for t in b)) if fb else {}
                if not v:
                    break
                vecs.append(v)
            else:
                axpy(L, _block_sign(blocks, degs), apply_op(lk, vecs))
    M = {}
    for j in range(1, n + 1):
        if lower_only and j in (1, n):
            continue
        lj = h.ops.get(j)
        fo = f.components.get(n - j + 1)
        if lj is None or fo is None:
            continue
        for sigma in unshuffles(j, n):
            w = lj.read(tuple(ids[t] for t in sigma[:j]))
            if not w:
                continue
            rest = [_unit(ids[t]) for t in sigma[j:]]
            axpy(M, koszul_sign(sigma, degs), apply_op(fo, [w] + rest))
    return L, M


def check_linf_morphism(f: LInfinityMorphism, arity_bound=5) -> Report:
    bound = min(arity_bound, ARITY_HARD_CAP)
    rep = Report("pass", caps={"arity_bound": bound, "morphism_arity_cap": f.arity_cap})
    if bound > f.arity_cap:
        rep.unchecked.append(f"arities {f.arity_cap + 1}..{bound} need components beyond the cap")
    ids = list(f.source.basis.ids)
    for n in range(1, min(bound, f.arity_cap) + 1):
        for combo in combinations_with_replacement(ids, n):
            L, M = _morphism_sides(f, combo)
            r = axpy(L, -1, M)
            if r:
                rep.add(combo, r)
    if rep.findings:
        rep.verdict = "fail"
    return rep


def minimal_model(g: LInfinityAlgebra, arity_cap=6):
    """Transfer ``g`` to its cohomology; returns ``(h, f, H)``.

    ``h`` is minimal on ``H*(g)``, ``f: h -> g`` is the transferred
    quasi-isomorphism with ``f_1`` the inclusion of representatives, and ``H``
    is the :class:`Cohomology` splitting used.  For a minimal input the
    algebra itself and the identity morphism are returned.
    """
    if g.is_minimal:
        return g, identity_morphism(g), cohomology(g)
    H = cohomology(g)
    cap = min(arity_cap, ARITY_HARD_CAP)
    hb = H.basis
    h_ops = {}
    h = LInfinityAlgebra(hb, {}, arity_cap=cap)
    f = LInfinityMorphism(h, g, {1: {(i,): H.include(_unit(i)) for i in hb}}, arity_cap=cap)
    ids = list(hb.ids)
    for n in range(2, cap + 1):
        ln_entries, fn_entries = {}, {}
        for combo in combinations_with_replacement(ids, n):
            L, M = _morphism_sides(f, combo, lower_only=True)
            K = axpy(L, -1, M)
            if not K:
                continue
            ln = H.project(K)
            fn = {k: -v for k, v in H.homotopy(K).items()}
            if ln:
                ln_entries[combo] = ln
            if fn:
                fn_entries[combo] = fn
        if ln_entries:
            h_ops[n] = MultilinearOperation(n, 2 - n, ln_entries, SYMMETRIC, hb)
            h.ops[n] = h_ops[n]
        if fn_entries:
            f.components[n] = MultilinearOperation(n, 1 - n, fn_entries, SYMMETRIC, hb, g.basis)
    h = LInfinityAlgebra(hb, h_ops, arity_cap=cap, name=f"H({g.name})" if g.name else None)
    f.source = h
    return h, f, H


def induces_iso_on_cohomology(f: LInfinityMorphism) -> bool:
    """Exact rank test that ``f_1`` induces an isomorphism ``H(source) -> H(target)``."""
    Hs, Ht = cohomology(f.source), cohomology(f.target)
    f1 = f.components.get(1)
    for k in sorted(set(Hs.ids) | set(Ht.ids)):
        src = Hs.reps.get(k, [])
        cols = [Ht.project(apply_op(f1, [v])) for v in src]
        if len(src) != Ht.dim(k) or LinearSystem(cols).rank != len(src):
            return False
    return True
