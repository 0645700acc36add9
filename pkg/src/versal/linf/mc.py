"""Maurer-Cartan elements, gauge flows, versal presentations and classification."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from ..coefficients.field import Gaussian
from ..coefficients.rings import LocalRing, RingMap, SeriesElement, make_local_ring
from ..errors import (
    ConstantTermPresent, NotGaugeEquivalent, NotMinimal, ObstructionMismatch,
    OrderOnePartNotClosed, RingHasRelations,
)
from ..linalg import LinearSystem, axpy
from .algebra import (
    LInfinityAlgebra, cohomology, identity_morphism, minimal_model, symmetric_power,
)


class MaurerCartanElement:
    """Degree-1 vector of ``g`` with coefficients in the maximal ideal of ``ring``."""

    def __init__(self, algebra: LInfinityAlgebra, ring: LocalRing, value):
        self.algebra = algebra
        self.ring = ring
        out = {}
        for i, c in value.items():
            if algebra.degree(i) != 1:
                raise ValueError(f"{i} has degree {algebra.degree(i)}, not 1")
            c = ring.coerce(c)
            if c.constant():
                raise ConstantTermPresent(f"coefficient of {i} has constant term {c.constant()}")
            if c:
                out[i] = c
        self.value = out

    def __eq__(self, other):
        return (isinstance(other, MaurerCartanElement) and self.ring == other.ring
                and self.value == other.value)

    def __repr__(self):
        body = " + ".join(f"({c})*{i}" for i, c in self.value.items()) or "0"
        return f"MaurerCartanElement({body})"

    def pullback(self, phi: RingMap) -> "MaurerCartanElement":
        return MaurerCartanElement(self.algebra, phi.target, {i: phi(c) for i, c in self.value.items()})


def residual_of(g, vec, order):
    """``sum_s l^s(v, ..., v) / s!`` for ``s <= order``."""
    out = {}
    for s in range(1, min(order, g.arity_cap) + 1):
        axpy(out, 1, symmetric_power(g.ops.get(s), vec, s))
    return out


def mc_residual(alpha: MaurerCartanElement) -> dict:
    """The Maurer-Cartan expression of ``alpha``, a degree-2 vector."""
    return residual_of(alpha.algebra, alpha.value, alpha.ring.N)


# gauge flows

class TPoly:
    """Polynomial in the flow time ``t`` with ring coefficients."""

    __slots__ = ("c",)

    def __init__(self, coeffs):
        c = list(coeffs)
        while c and not c[-1]:
            c.pop()
        self.c = c

    @staticmethod
    def _lift(x):
        if isinstance(x, TPoly):
            return x
        if isinstance(x, (int, Fraction, Gaussian, SeriesElement)):
            return TPoly([x])
        return None

    def __add__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        n = max(len(self.c), len(o.c))
        a = self.c + [0] * (n - len(self.c))
        b = o.c + [0] * (n - len(o.c))
        return TPoly([x + y for x, y in zip(a, b)])

    __radd__ = __add__

    def __neg__(self):
        return TPoly([-x for x in self.c])

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        o = self._lift(other)
        if o is None:
            return NotImplemented
        if not self.c or not o.c:
            return TPoly([])
        out = [0] * (len(self.c) + len(o.c) - 1)
        for i, x in enumerate(self.c):
            if not x:
                continue
            for j, y in enumerate(o.c):
                if y:
                    out[i + j] = out[i + j] + x * y
        return TPoly(out)

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.c)

    def __eq__(self, other):
        o = self._lift(other)
        return o is not None and self.c == o.c

    def integral(self):
        return TPoly([0] + [x * Fraction(1, k + 1) for k, x in enumerate(self.c)])

    def at_one(self):
        return sum(self.c[1:], self.c[0]) if self.c else 0


@dataclass
class GaugePath:
    """``gamma(t) = sum_k t^k * gamma[k]`` with degree-0 vector coefficients in m."""

    gamma: list

    def at(self):
        return {i: TPoly([layer.get(i, 0) for layer in self.gamma])
                for i in {i for layer in self.gamma for i in layer}}

    def is_zero(self):
        return not any(any(c for c in layer.values()) for layer in self.gamma)


def _flow_vec(g, gamma_t, alpha0, order):
    """Time-1 value of ``d alpha/dt = sum_i l^(i+1)(gamma, alpha, ..., alpha) / i!``."""
    a0 = {i: TPoly([c]) for i, c in alpha0.items()}
    cur = dict(a0)
    for _ in range(order + 1):
        v = {}
        for i in range(0, min(order, g.arity_cap - 1) + 1):
            axpy(v, 1, symmetric_power(g.ops.get(i + 1), cur, i, prefix=[gamma_t]))
        nxt = dict(a0)
        for k, p in v.items():
            axpy(nxt, 1, {k: p.integral()})
        if nxt == cur:
            break
        cur = nxt
    out = {}
    for k, p in cur.items():
        val = p.at_one()
        if val:
            out[k] = val
    return out


def gauge_flow(gamma: GaugePath, alpha: MaurerCartanElement) -> MaurerCartanElement:
    """Flow ``alpha`` for unit time along the vector field of ``gamma``."""
    g = alpha.algebra
    for layer in gamma.gamma:
        for i, c in layer.items():
            if g.degree(i) != 0:
                raise ValueError(f"gauge parameter {i} must have degree 0")
            if alpha.ring.coerce(c).constant():
                raise ConstantTermPresent("gauge parameters must lie in the maximal ideal")
    if gamma.is_zero():
        return alpha
    out = _flow_vec(g, gamma.at(), alpha.value, alpha.ring.N)
    return MaurerCartanElement(g, alpha.ring, out)


def _pieces(ring, D, k):
    """Split ``D in F_k`` into ground-field vectors per basis element of ``F_k/F_(k+1)``."""
    basis, coords = ring.graded_piece(k)
    parts = [{} for _ in basis]
    for i, c in D.items():
        for b, v in coords(c).items():
            parts[b][i] = v
    return basis, parts


def _in_filtration(ring, D, k):
    try:
        for c in D.values():
            ring.graded_piece(k)[1](c)
    except ValueError:
        return False
    return True


def gauge_equivalent(alpha: MaurerCartanElement, beta: MaurerCartanElement):
    """Single-flowline gauge from ``alpha`` to ``beta``.

    Returns a list of :class:`GaugePath` (empty when equal).  Searches for a
    constant-in-time ``gamma`` order by order; raises
    :class:`NotGaugeEquivalent` with the lowest obstructing class of
    ``beta - flow`` in ``H^1 (x) F_k/F_(k+1)`` otherwise.
    """
    if alpha.ring != beta.ring:
        raise ValueError("MC elements over different rings")
    if alpha == beta:
        return []
    g, ring = alpha.algebra, alpha.ring
    H = cohomology(g)
    gamma = {}
    for k in range(1, ring.N + 1):
        cur = _flow_vec(g, {i: TPoly([c]) for i, c in gamma.items()}, alpha.value, ring.N) \
            if gamma else alpha.value
        D = axpy(dict(cur), -1, beta.value)
        if not D:
            break
        basis, parts = _pieces(ring, D, k)
        obstruction = {}
        for b, Db in zip(basis, parts):
            if not Db:
                continue
            if not H.is_exact(Db):
                for hid, c in H.project(Db).items():
                    obstruction[hid] = obstruction.get(hid, ring.zero) - c * b
                continue
            for i, c in H.homotopy(Db).items():
                gamma[i] = gamma.get(i, ring.zero) - c * b
        obstruction = {h: c for h, c in obstruction.items() if c}
        if obstruction:
            raise NotGaugeEquivalent(k, obstruction)
        gamma = {i: c for i, c in gamma.items() if c}
    path = GaugePath([gamma])
    final = gauge_flow(path, alpha)
    if final != beta:
        raise NotGaugeEquivalent(ring.N, {}, "gauge solve did not close; residual is non-exact")
    return [] if path.is_zero() else [path]


def compose_flows(paths, alpha):
    for p in paths:
        alpha = gauge_flow(p, alpha)
    return alpha


# versal presentations

@dataclass
class VersalPresentation:
    algebra: LInfinityAlgebra          # the minimal algebra h
    variables: list                    # names x_i, dual to h^1 ids
    h1: list                           # h^1 basis ids
    h2: list                           # h^2 basis ids
    polynomials: dict                  # h^2 id -> P_j over the free ring
    relations: list                    # nonzero P_j, graded-lex ordered
    ring: LocalRing                    # R_v
    free_ring: LocalRing
    order: int
    source: LInfinityAlgebra = None    # the algebra g that h models
    morphism: object = None            # f: h -> g
    cohomology: object = None          # splitting of g used for transfer
    exact_to_order: int = None
    notes: list = field(default_factory=list)

    @property
    def alpha_v(self):
        return MaurerCartanElement(self.algebra, self.ring,
                                   {e: self.ring.gen(x) for e, x in zip(self.h1, self.variables)})

    def pulled_back(self, psi: RingMap) -> MaurerCartanElement:
        return MaurerCartanElement(self.algebra, psi.target,
                                   {e: psi.images[k] for k, e in enumerate(self.h1)})


def variable_names(n):
    return ["x"] if n == 1 else [f"x{k + 1}" for k in range(n)]


def versal_presentation(h: LInfinityAlgebra, truncation_order) -> VersalPresentation:
    """Obstruction polynomials of a minimal algebra up to weight ``N``."""
    if not h.is_minimal:
        raise NotMinimal("versal presentations need l^1 = 0; compute a minimal model first")
    N = int(truncation_order)
    h1, h2 = h.in_degree(1), h.in_degree(2)
    names = variable_names(len(h1))
    S = make_local_ring(names, [], N)
    alpha = {e: S.gen(x) for e, x in zip(h1, names)}
    res = residual_of(h, alpha, N)
    polys = {f: res.get(f, S.zero) for f in h2}
    rels = sorted((p for p in polys.values() if p),
                  key=lambda p: S.order_key(p.leading_monomial()), reverse=True)
    R = make_local_ring(names, [p.terms for p in rels], N)
    return VersalPresentation(h, names, h1, h2, polys, rels, R, S, N, source=h,
                              morphism=identity_morphism(h), cohomology=cohomology(h),
                              exact_to_order=N)


def versal_family(g: LInfinityAlgebra, truncation_order, arity_cap=None) -> VersalPresentation:
    """Minimal model of ``g`` followed by its versal presentation."""
    N = int(truncation_order)
    cap = min(arity_cap or max(N, 2), 8)
    h, f, H = minimal_model(g, arity_cap=cap)
    vp = versal_presentation(h, N)
    vp.source, vp.morphism, vp.cohomology = g, f, H
    if not g.is_minimal and cap < N:
        vp.exact_to_order = cap
        vp.notes.append(f"transferred operations computed to arity {cap} only")
    return vp


# Kodaira-Spencer map and versality

@dataclass
class KodairaSpencer:
    matrix: list          # rows indexed by h1 ids, columns by cotangent variables
    h1: list
    cotangent: list
    rank: int

    @property
    def shape(self):
        return len(self.h1), len(self.cotangent)


def kodaira_spencer(alpha: MaurerCartanElement) -> KodairaSpencer:
    g, ring = alpha.algebra, alpha.ring
    H = cohomology(g)
    chosen, coords = ring.cotangent
    cols = [{} for _ in chosen]
    for i, c in alpha.value.items():
        for j, v in coords(c).items():
            cols[j][i] = v
    for j, col in enumerate(cols):
        if g.differential(col):
            raise OrderOnePartNotClosed(
                f"order-one part along {ring.names[chosen[j]]} is not l^1-closed")
    h1 = list(H.ids.get(1, []))
    proj = [H.project(col) for col in cols]
    matrix = [[p.get(e, Fraction(0)) for p in proj] for e in h1]
    rank = LinearSystem([{r: row[j] for r, row in enumerate(matrix) if row[j]}
                         for j in range(len(cols))]).rank
    return KodairaSpencer(matrix, h1, [ring.names[j] for j in chosen], rank)


def verdict_from_rank(rank, rows, cols):
    """``versal`` for square invertible KS, ``complete`` for strictly surjective."""
    if rank == rows == cols:
        return "versal"
    if rank == rows < cols:
        return "complete"
    return "neither"


def versality_verdict(beta: MaurerCartanElement) -> dict:
    if beta.ring.has_relations:
        raise RingHasRelations("the versality criterion needs a formal power series ring")
    ks = kodaira_spencer(beta)
    rows, cols = ks.shape
    verdict = verdict_from_rank(ks.rank, rows, cols)
    return {"verdict": verdict, "conclusive": verdict != "neither", "rank": ks.rank,
            "h1_dim": rows, "cotangent_dim": cols, "matrix": ks.matrix}


# classification

@dataclass
class Classification:
    psi: RingMap
    paths: list
    residual: dict

    @property
    def certified(self):
        return not self.residual


def classify_mc(beta: MaurerCartanElement, vp: VersalPresentation) -> Classification:
    """Find ``psi: R_v -> R`` and a gauge path with ``flow(f_* psi*alpha_v) = beta``."""
    R = beta.ring
    g = beta.algebra
    if g is not vp.source:
        raise ValueError("presentation was built for another algebra")
    if vp.order < R.N:
        vp = rebuild(vp, R.N)
    if mc_residual(beta):
        raise ObstructionMismatch("input is not a Maurer-Cartan element")
    H, f = vp.cohomology, vp.morphism
    psi = {e: R.zero for e in vp.h1}
    gamma = {}

    def current():
        a = {e: c for e, c in psi.items() if c}
        pushed = f.pushforward(a, R.N)
        if gamma:
            return _flow_vec(g, {i: TPoly([c]) for i, c in gamma.items()}, pushed, R.N)
        return pushed

    for k in range(1, R.N + 1):
        D = axpy(dict(current()), -1, beta.value)
        if not D:
            break
        if not _in_filtration(R, D, k):
            raise ObstructionMismatch(f"discrepancy below order {k}")
        basis, parts = _pieces(R, D, k)
        for b, Db in zip(basis, parts):
            if not Db:
                continue
            if g.differential(Db):
                raise ObstructionMismatch(f"non-closed discrepancy at order {k}")
            for e, c in H.project(Db).items():
                psi[e] = psi[e] - c * b
            for i, c in H.homotopy(Db).items():
                gamma[i] = gamma.get(i, R.zero) - c * b
        gamma = {i: c for i, c in gamma.items() if c}
    residual = axpy(dict(current()), -1, beta.value)
    phi = RingMap(vp.ring, R, [psi[e] for e in vp.h1])
    if not phi.well_defined():
        raise ObstructionMismatch("recovered map does not kill the obstruction polynomials")
    paths = [GaugePath([gamma])] if gamma else []
    return Classification(phi, paths, residual)


def rebuild(vp, N):
    """The same presentation at truncation order ``N``."""
    if vp.source is vp.algebra:
        return versal_presentation(vp.algebra, N)
    return versal_family(vp.source, N)
