"""Hochschild cochains of an uncurved category, the Gerstenhaber DGLA and versal extension.

A cochain of degree ``d`` has components ``phi^s`` of degree ``d - s``
(``s >= 0``); ``phi^0`` picks one endomorphism per object.  In bar terms
``phi`` has degree ``d - 1``.  The composition ``phi o psi`` inserts ``psi``
once into the inputs of ``phi`` with the Koszul sign
``(-1)^((d_psi - 1) * red(prefix))``; the bracket is the graded commutator
and ``d = [mu, .]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .ainf.category import CurvedCategory, _clean, _constant, reduce_mod_max_ideal
from .ainf.functor import (CurvedFunctor, compose, functor_relation, invert_iso,
                           quasi_embedding_certificate, transport_structure)
from .ainf.tensor import apply_family, coderivation
from .coefficients.rings import RingMap, SeriesElement
from .errors import (BadTruncation, KSNotSurjective, NotMaurerCartan, ObstructionEscapes,
                     ReductionMismatch, RingHasRelations)
from .graded import ARITY_HARD_CAP
from .linalg import LinearSystem, axpy
from .report import Report


class HochschildCochain:
    """Finite cochain on a ground-field category ``A0``.

    ``components[s]`` maps composable ``s``-tuples of ids to vectors; for
    ``s = 0`` keys are object names (or 1-tuples of them).  Coefficients may
    lie in a ring ``ring`` (cochains with values in m).  ``length_cap``, when
    set, marks components of greater length as unknown rather than zero.
    """

    def __init__(self, category, degree, components=None, ring=None, length_cap=None):
        self.category = category
        self.degree = int(degree)
        self.ring = ring
        self.length_cap = length_cap
        self.ops, self.curvature = {}, {}
        A = category
        for s, table in (components or {}).items():
            s = int(s)
            for key, vec in table.items():
                vec = _clean(vec)
                if not vec:
                    continue
                if s == 0:
                    X = key[0] if isinstance(key, tuple) else key
                    if X not in A.objects:
                        raise ValueError(f"unknown object {X!r}")
                    L0, Ls, want = X, X, self.degree
                    self.curvature[X] = vec
                else:
                    ids = tuple(key)
                    if len(ids) != s or any(a not in A.deg for a in ids):
                        raise ValueError(f"bad entry {key} in component {s}")
                    for a, b in zip(ids, ids[1:]):
                        if A.tgt[a] != A.src[b]:
                            raise ValueError(f"entry {ids} is not composable")
                    L0, Ls = A.src[ids[0]], A.tgt[ids[-1]]
                    want = sum(A.deg[a] for a in ids) + self.degree - s
                    self.ops.setdefault(s, {})[ids] = vec
                for o in vec:
                    if o not in A.deg or (A.src[o], A.tgt[o]) != (L0, Ls):
                        raise ValueError(f"output {o} of {key} lies in the wrong hom space")
                    if A.deg[o] != want:
                        raise ValueError(f"output {o} of {key} has degree {A.deg[o]}, expected {want}")

    @classmethod
    def _raw(cls, category, degree, ops, curvature, ring=None, length_cap=None):
        new = cls.__new__(cls)
        new.category, new.degree, new.ring, new.length_cap = category, degree, ring, length_cap
        new.ops = {s: t for s, t in ops.items() if t}
        new.curvature = curvature
        return new

    @property
    def max_length(self):
        return max(self.ops, default=0)

    def components(self):
        out = {}
        if self.curvature:
            out[0] = {(X,): v for X, v in self.curvature.items()}
        out.update(self.ops)
        return out

    def flat(self):
        """``{(key, output id): coefficient}`` with ``key = ("@", X)`` for length 0."""
        out = {}
        for X, v in self.curvature.items():
            for o, c in v.items():
                out[(("@", X), o)] = c
        for s, t in self.ops.items():
            for ids, v in t.items():
                for o, c in v.items():
                    out[(ids, o)] = c
        return out

    def __add__(self, other):
        return _combine(self, 1, other)

    def __sub__(self, other):
        return _combine(self, -1, other)

    def __neg__(self):
        return self.scale(-1)

    def scale(self, c):
        ops = {s: {k: _clean({o: c * x for o, x in v.items()}) for k, v in t.items()}
               for s, t in self.ops.items()}
        ops = {s: {k: v for k, v in t.items() if v} for s, t in ops.items()}
        curv = {X: _clean({o: c * x for o, x in v.items()}) for X, v in self.curvature.items()}
        return HochschildCochain._raw(self.category, self.degree, ops,
                                      {X: v for X, v in curv.items() if v}, self.ring, self.length_cap)

    def truncate(self, length):
        ops = {s: t for s, t in self.ops.items() if s <= length}
        return HochschildCochain._raw(self.category, self.degree, ops, dict(self.curvature),
                                      self.ring, length)

    def __bool__(self):
        return bool(self.ops or self.curvature)

    def __eq__(self, other):
        return (isinstance(other, HochschildCochain) and self.degree == other.degree
                and self.flat() == other.flat())

    def __repr__(self):
        return f"HochschildCochain(degree={self.degree}, lengths={sorted(self.components())})"


def _combine(a, sign, b):
    if a.category is not b.category and a.category != b.category:
        raise ValueError("cochains on different categories")
    if a.degree != b.degree and a and b:
        raise ValueError("cochains of different degrees")
    ops = {s: {k: dict(v) for k, v in t.items()} for s, t in a.ops.items()}
    for s, t in b.ops.items():
        tab = ops.setdefault(s, {})
        for k, v in t.items():
            tab[k] = _clean(axpy(tab.get(k, {}), sign, v))
    ops = {s: {k: v for k, v in t.items() if v} for s, t in ops.items()}
    curv = {X: dict(v) for X, v in a.curvature.items()}
    for X, v in b.curvature.items():
        curv[X] = _clean(axpy(curv.get(X, {}), sign, v))
    caps = [c for c in (a.length_cap, b.length_cap) if c is not None]
    return HochschildCochain._raw(a.category, a.degree if a else b.degree, ops,
                                  {X: v for X, v in curv.items() if v}, a.ring or b.ring,
                                  min(caps) if caps else None)


def structure_cochain(A0: CurvedCategory) -> HochschildCochain:
    """The structure maps ``mu`` of ``A0`` as a degree-2 cochain."""
    return HochschildCochain._raw(A0, 2, {s: dict(t) for s, t in A0.ops.items()},
                                  dict(A0.curvature), A0.ring if A0.ring.ngens else None)


def gerstenhaber_product(phi, psi, length_cap=None):
    """``phi o psi`` on every word up to the natural output length."""
    A = phi.category
    top = phi.max_length + psi.max_length - 1
    if length_cap is not None:
        top = min(top, length_cap)
    parity = psi.degree - 1
    ops, curv = {}, {}
    if phi.ops:
        for n in range(0, top + 1):
            for L0, ids in A.words(n):
                T = coderivation(A, psi.ops, psi.curvature, {(L0, ids): Fraction(1)}, parity)
                val = _clean(apply_family(phi.ops, phi.curvature, T))
                if val:
                    if n:
                        ops.setdefault(n, {})[ids] = val
                    else:
                        curv[L0] = val
    caps = [c for c in (phi.length_cap, psi.length_cap, length_cap) if c is not None]
    return HochschildCochain._raw(A, phi.degree + psi.degree - 1, ops, curv,
                                  phi.ring or psi.ring, min(caps) if caps else None)


def gerstenhaber_bracket(phi, psi, length_cap=None):
    """``[phi, psi] = phi o psi - (-1)^((|phi|-1)(|psi|-1)) psi o phi``."""
    a = gerstenhaber_product(phi, psi, length_cap)
    b = gerstenhaber_product(psi, phi, length_cap)
    sign = -1 if (phi.degree - 1) * (psi.degree - 1) % 2 else 1
    out = _combine(a, -sign, b)
    out.degree = phi.degree + psi.degree - 1
    return out


def hochschild_differential(phi, length_cap=None):
    """``d(phi) = [mu, phi]`` with ``mu`` the structure of ``phi.category``."""
    return gerstenhaber_bracket(structure_cochain(phi.category), phi, length_cap)


def _check_uncurved_field(A0):
    if A0.ring.ngens:
        raise ValueError("Hochschild cochains are taken on a ground-field category")
    if A0.curvature:
        raise ValueError("the category must be uncurved")


def cochain_basis(A0, degree, length_cap, min_length=0):
    """Basis cochains of ``CC^degree`` with component lengths in ``[min_length, length_cap]``.

    Ordered by length, then word, then output id.
    """
    out = []
    for s in range(min_length, length_cap + 1):
        for L0, ids in A0.words(s):
            Ls = A0.tgt[ids[-1]] if ids else L0
            want = sum(A0.deg[a] for a in ids) + degree - s
            for o in A0.hom(L0, Ls):
                if A0.deg[o] == want:
                    comp = {0: {(L0,): {o: Fraction(1)}}} if s == 0 else {s: {ids: {o: Fraction(1)}}}
                    out.append(HochschildCochain(A0, degree, comp, length_cap=length_cap))
    return out


@dataclass
class HHResult:
    degree: int
    length_cap: int
    dimension: int
    representatives: list
    truncated: bool = True
    without_length_zero: bool = False
    cocycle_dimension: int = 0
    coboundary_dimension: int = 0
    _system: object = None
    _nb: int = 0

    def class_of(self, cocycle):
        """Coordinates of a cocycle's class on the representatives, or ``None``."""
        sol = self._system.solve(cocycle.truncate(self.length_cap).flat())
        if sol is None:
            return None
        return {j - self._nb: c for j, c in sol.items() if j >= self._nb}

    def to_dict(self):
        return {"degree": self.degree, "length_cap": self.length_cap, "dimension": self.dimension,
                "label": f"at length cap {self.length_cap}", "truncated": self.truncated,
                "without_length_zero": self.without_length_zero,
                "representatives": [c.flat() for c in self.representatives]}


def hh_cohomology(A0: CurvedCategory, degree, length_cap=4, without_length_zero=False) -> HHResult:
    """Cohomology of ``CC_{<= length_cap}``, the quotient by cochains vanishing in low length.

    Since ``d`` never shortens a cochain on an uncurved category, cochains
    vanishing in lengths ``<= L`` form a subcomplex and the quotient is
    computable.  The result is labelled with the cap.  With
    ``without_length_zero`` the complex is the truncated one, cochains with
    no length-0 component, which is a subcomplex for the same reason.
    """
    _check_uncurved_field(A0)
    L = length_cap
    lo = 1 if without_length_zero else 0
    cur = cochain_basis(A0, degree, L, lo)
    low = cochain_basis(A0, degree - 1, L, lo)
    dcur = [hochschild_differential(c, L).flat() for c in cur]
    zsys = LinearSystem(dcur)
    cycles = []
    for t in zsys.kernel:
        z = {}
        for j, v in t.items():
            axpy(z, v, cur[j].flat())
        cycles.append(_clean(z))
    bnd_all = [hochschild_differential(c, L).flat() for c in low]
    bsys = LinearSystem(bnd_all)
    bnd = [bnd_all[j] for j in bsys.independent]
    ext = LinearSystem(bnd + cycles)
    reps = [cycles[j - len(bnd)] for j in ext.independent if j >= len(bnd)]
    rep_cochains = [_unflatten(A0, degree, z, L) for z in reps]
    system = LinearSystem(bnd + reps)
    return HHResult(degree, L, len(reps), rep_cochains, True, bool(without_length_zero), len(cycles),
                    len(bnd), system, len(bnd))


def _unflatten(A0, degree, flat, length_cap=None, ring=None):
    comps = {}
    for (key, o), c in flat.items():
        if key and key[0] == "@":
            comps.setdefault(0, {}).setdefault((key[1],), {})[o] = c
        else:
            comps.setdefault(len(key), {}).setdefault(key, {})[o] = c
    return HochschildCochain(A0, degree, comps, ring=ring, length_cap=length_cap)


# deformations

@dataclass
class DeformationFamily:
    base: object
    total: CurvedCategory
    reduction: CurvedCategory

    def __post_init__(self):
        if self.total.ring != self.base:
            raise ReductionMismatch("total category is not defined over the base ring")
        red = reduce_mod_max_ideal(self.total)
        if red.ops != self.reduction.ops or red.hom_basis() != self.reduction.hom_basis() \
                or red.objects != self.reduction.objects or self.reduction.curvature:
            raise ReductionMismatch("total structure does not reduce to the declared category")

    def __eq__(self, other):
        return (isinstance(other, DeformationFamily) and self.base == other.base
                and self.total == other.total and self.reduction == other.reduction)


def deformation_to_mc(D: DeformationFamily) -> HochschildCochain:
    """``mu_total - mu_0`` as a degree-2 cochain with coefficients in m."""
    A, A0 = D.total, D.reduction
    ops = {}
    for s, t in A.ops.items():
        for ids, vec in t.items():
            diff = dict(vec)
            axpy(diff, -1, A0.ops.get(s, {}).get(ids, {}))
            diff = _clean({o: D.base.coerce(c) for o, c in diff.items()})
            if diff:
                ops.setdefault(s, {})[ids] = diff
    curv = {X: {o: D.base.coerce(c) for o, c in v.items()} for X, v in A.curvature.items()}
    for s, t in A0.ops.items():
        for ids, vec in t.items():
            if ids not in A.ops.get(s, {}):
                ops.setdefault(s, {})[ids] = {o: -D.base.coerce(c) for o, c in vec.items()}
    return HochschildCochain._raw(A0, 2, ops, curv, D.base)


def mc_equation(alpha: HochschildCochain) -> HochschildCochain:
    """``d alpha + 1/2 [alpha, alpha]`` on every word it reaches."""
    d = hochschild_differential(alpha)
    half = gerstenhaber_bracket(alpha, alpha).scale(Fraction(1, 2))
    return d + half


def mc_to_deformation(alpha: HochschildCochain, ring=None) -> DeformationFamily:
    R = ring or alpha.ring
    if R is None:
        raise ValueError("a base ring is required")
    A0 = alpha.category
    for key, c in alpha.flat().items():
        if _constant(c):
            raise ValueError(f"coefficient at {key} is not in the maximal ideal")
    res = mc_equation(alpha).flat()
    if res:
        loc = min(res, key=lambda k: (len(k[0]) if k[0][0] != "@" else 0, repr(k)))
        raise NotMaurerCartan(loc, res[loc])
    ops = {s: {k: dict(v) for k, v in t.items()} for s, t in A0.ops.items()}
    for s, t in alpha.ops.items():
        tab = ops.setdefault(s, {})
        for k, v in t.items():
            tab[k] = _clean(axpy({o: R.coerce(c) for o, c in tab.get(k, {}).items()}, 1, v))
    ops = {s: {k: {o: R.coerce(c) for o, c in v.items()} for k, v in t.items() if v}
           for s, t in ops.items()}
    cap = max([A0.arity_cap] + list(ops))
    total = CurvedCategory(A0.objects, A0.hom_basis(), ops, alpha.curvature, R,
                           arity_cap=cap, exact_beyond_cap=A0.exact_beyond_cap, name=A0.name)
    return DeformationFamily(R, total, A0)


def _linear_parts(alpha: HochschildCochain, R):
    """Cochain coefficient of each generator ``x_i`` (the order-one part)."""
    out = []
    for i in range(R.ngens):
        e = tuple(int(j == i) for j in range(R.ngens))
        flat = {}
        for key, c in alpha.flat().items():
            v = c.terms.get(e, 0) if isinstance(c, SeriesElement) else 0
            if v:
                flat[key] = v
        out.append(flat)
    return out


@dataclass
class KSMap:
    matrix: list            # rows: HH^2 representatives, columns: generators
    rank: int
    hh_dimension: int
    length_cap: int
    variables: list
    surjective: bool
    injective: bool
    hh: object = field(default=None, repr=False)

    def to_dict(self):
        return {"matrix": self.matrix, "rank": self.rank, "hh2_dimension": self.hh_dimension,
                "length_cap": self.length_cap, "variables": self.variables,
                "surjective": self.surjective, "injective": self.injective,
                "label": f"at length cap {self.length_cap}"}


def family_ks_map(D: DeformationFamily, length_cap=4) -> KSMap:
    R = D.base
    if R.has_relations:
        raise RingHasRelations("the Kodaira-Spencer map is read on a free base here")
    alpha = deformation_to_mc(D)
    hh = hh_cohomology(D.reduction, 2, length_cap)
    cols = []
    for flat in _linear_parts(alpha, R):
        c = hh.class_of(_unflatten(D.reduction, 2, {k: v for k, v in flat.items()
                                                    if _length(k[0]) <= length_cap}))
        if c is None:
            raise ValueError("order-one part is not a cocycle")
        cols.append(c)
    matrix = [[col.get(r, Fraction(0)) for col in cols] for r in range(hh.dimension)]
    rank = LinearSystem(cols).rank if cols else 0
    return KSMap(matrix, rank, hh.dimension, length_cap, list(R.names),
                 rank == hh.dimension, rank == len(cols), hh)


def _length(key):
    return 0 if key and key[0] == "@" else len(key)


# versal extension

def pullback_category(C: CurvedCategory, phi: RingMap) -> CurvedCategory:
    """Push every coefficient of ``C`` along ``phi``."""
    f = lambda c: phi(c) if isinstance(c, SeriesElement) else phi.target.coerce(c)
    ops = {s: {k: _clean({o: f(c) for o, c in v.items()}) for k, v in t.items()}
           for s, t in C.ops.items()}
    curv = {X: _clean({o: f(c) for o, c in v.items()}) for X, v in C.curvature.items()}
    return CurvedCategory(C.objects, C.hom_basis(), ops, curv, phi.target, arity_cap=C.arity_cap,
                          exact_beyond_cap=C.exact_beyond_cap, name=C.name)


def _functor_from(B1, A1, f: HochschildCochain, cap):
    comps = {1: {(a,): {a: Fraction(1)} for a in B1.deg}}
    for s, t in f.ops.items():
        tab = comps.setdefault(s, {})
        for k, v in t.items():
            tab[k] = _clean(axpy(dict(tab.get(k, {})), 1, v))
    return CurvedFunctor(B1, A1, {X: X for X in B1.objects}, comps, dict(f.curvature),
                         arity_cap=cap, exact_beyond_cap=False)


def _residual(F, cap):
    out = {}
    A = F.source
    for n in range(0, cap + 1):
        for word in A.words(n):
            for o, c in functor_relation(F, word).items():
                out[((("@", word[0]) if n == 0 else word[1]), o)] = c
    return out


@dataclass
class VersalExtension:
    psi: RingMap
    functor: CurvedFunctor
    report: Report
    transported: CurvedCategory = None


def versal_extension(B: DeformationFamily, A: CurvedCategory, iso: CurvedFunctor,
                     length_cap=4, order=None) -> VersalExtension:
    """Solve for ``Psi*: R -> S`` and ``F: Psi*B -> A`` order by order in m_S.

    ``iso`` is an A-infinity isomorphism from the reduction of ``A`` to
    ``B.reduction``.  At each order the discrepancy is written as a
    combination of Kodaira-Spencer cochains of ``B`` (correcting ``Psi*``)
    and coboundaries ``d f`` (correcting ``F``); earlier columns are
    preferred, so generators come before cochains and shorter cochains
    before longer ones.
    """
    R, S = B.base, A.ring
    if R.has_relations:
        raise RingHasRelations("the base of the versal family must be a power series ring")
    N = S.N if order is None else min(int(order), S.N)
    if R.N < N:
        raise BadTruncation(f"base truncated at {R.N} cannot be pulled back to order {N}")
    L = min(length_cap, ARITY_HARD_CAP)
    B0 = B.reduction
    ks = family_ks_map(B, L)
    if not ks.surjective:
        raise KSNotSurjective(f"Kodaira-Spencer rank {ks.rank} < dim HH^2 = {ks.hh_dimension} "
                              f"at length cap {L}")
    # make the iso strict by moving the structure of A onto the bases of B0
    A0 = reduce_mod_max_ideal(A)
    if iso.source != A0 or iso.target != B0:
        raise ReductionMismatch("iso must run from the reduction of A to the reduction of B")
    ext = CurvedFunctor(A, B0, iso.obj_map, iso.components, arity_cap=iso.arity_cap,
                        exact_beyond_cap=iso.exact_beyond_cap)
    A1, into = transport_structure(A, ext, arity_cap=max(L, A.arity_cap))
    red = reduce_mod_max_ideal(A1)
    if red.ops != B0.ops:
        raise ReductionMismatch("iso is not compatible with the structure maps")
    alpha_B = deformation_to_mc(B)
    ks_cols = [{k: v for k, v in flat.items() if _length(k[0]) <= L}
               for flat in _linear_parts(alpha_B, R)]
    basis1 = cochain_basis(B0, 1, L)
    d_cols = [{k: -v for k, v in hochschild_differential(c, L).flat().items()} for c in basis1]
    system = LinearSystem(ks_cols + d_cols)
    nk = len(ks_cols)
    images = [S.zero for _ in range(R.ngens)]
    f = HochschildCochain._raw(B0, 1, {}, {}, S, L)
    orders = []
    for k in range(1, N + 1):
        psi = RingMap(R, S, images)
        F = _functor_from(pullback_category(B.total, psi), A1, f, L)
        E = _residual(F, L)
        if not E:
            orders.append({"order": k, "discrepancy": 0})
            continue
        basis, coords = S.graded_piece(k)
        parts = [{} for _ in basis]
        for key, c in E.items():
            for b, v in coords(c).items():
                parts[b][key] = v
        orders.append({"order": k, "discrepancy": sum(len(p) for p in parts)})
        for b, Eb in zip(basis, parts):
            if not Eb:
                continue
            sol = system.solve({key: -v for key, v in Eb.items()})
            if sol is None:
                raise ObstructionEscapes(k, f"discrepancy class at order {k} lies outside the "
                                            f"Kodaira-Spencer image at length cap {L}; raise the "
                                            "caps or check the input")
            df = {}
            for j, v in sol.items():
                if j < nk:
                    images[j] = images[j] + v * b
                else:
                    axpy(df, v * b, basis1[j - nk].flat())
            if df:
                f = f + _unflatten(B0, 1, df, L, S)
    psi = RingMap(R, S, images)
    PB = pullback_category(B.total, psi)
    F = _functor_from(PB, A1, f, L)
    final = _residual(F, L)
    if _is_identity(into):
        total = _retarget(F, A)
    else:
        total = compose(invert_iso(into, arity_cap=L), F, arity_cap=L)
    rep = Report("pass" if not final else "fail",
                 caps={"length_cap": L, "truncation_order": N},
                 data={"ks_rank": ks.rank, "hh2_dimension": ks.hh_dimension, "orders": orders,
                       "psi": {n: str(x) for n, x in zip(R.names, images)}})
    for key, c in sorted(final.items(), key=lambda kv: repr(kv[0])):
        rep.add(key, c)
    qe = quasi_embedding_certificate(total)
    rep.data["quasi_embedding"] = qe.verdict
    rep.data["quasi_embedding_level"] = qe.data.get("level")
    return VersalExtension(psi, total, rep, A1)


def _is_identity(F):
    A, B = F.source, F.target
    return (F.strict and A.hom_basis() == B.hom_basis()
            and all(F.obj_map[X] == X for X in A.objects)
            and all(F.components.get(1, {}).get((a,)) == {a: 1} for a in A.deg))


def _retarget(F, A):
    return CurvedFunctor(F.source, A, F.obj_map, F.components, F.curvature,
                         arity_cap=F.arity_cap, exact_beyond_cap=F.exact_beyond_cap)
