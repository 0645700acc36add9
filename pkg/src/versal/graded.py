"""Graded bases, sparse elements, multilinear operations and Koszul signs.

Conventions: an operation of arity ``s`` is a table from ``s``-tuples of
basis identifiers to output vectors.  Graded-symmetric operations are
symmetric with respect to reduced degrees ``|v| + 1`` and store only the
canonical (basis-order sorted) tuple of each orbit.
"""

from __future__ import annotations

from fractions import Fraction
from itertools import combinations, product

from .errors import ArityMismatch, LengthMismatch, RingMismatch
from .linalg import axpy
from .report import Report

ARITY_HARD_CAP = 8

NONE = "none"
SYMMETRIC = "graded-symmetric-reduced"


class GradedBasis:
    """Finite list of ``(identifier, degree)`` pairs."""

    def __init__(self, vectors):
        vectors = [(str(i), int(d)) for i, d in vectors]
        ids = [i for i, _ in vectors]
        if len(set(ids)) != len(ids):
            raise ValueError("basis identifiers must be unique")
        self.vectors = tuple(vectors)
        self.ids = tuple(ids)
        self._deg = dict(vectors)
        self._index = {i: k for k, i in enumerate(ids)}

    def degree(self, i):
        return self._deg[i]

    def reduced_degree(self, i):
        return self._deg[i] + 1

    def index(self, i):
        return self._index[i]

    def __contains__(self, i):
        return i in self._deg

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def in_degree(self, k):
        return [i for i, d in self.vectors if d == k]

    def degrees(self):
        return sorted(set(self._deg.values()))

    def __eq__(self, other):
        return isinstance(other, GradedBasis) and self.vectors == other.vectors

    def __hash__(self):
        return hash(self.vectors)

    def __repr__(self):
        return f"GradedBasis({list(self.vectors)})"


class Element:
    """Sparse vector ``{identifier: coefficient}`` in a graded basis.

    Coefficients are ground-field scalars or ring elements (``ring`` set).
    """

    __slots__ = ("basis", "terms", "ring")

    def __init__(self, basis, terms=None, ring=None):
        self.basis = basis
        self.ring = ring
        out = {}
        for i, c in (terms or {}).items():
            if i not in basis:
                raise KeyError(f"unknown basis vector {i!r}")
            if c:
                out[i] = c
        self.terms = out

    def _check(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        if other.basis != self.basis:
            raise ValueError("elements of different graded spaces")
        if self.ring is not None and other.ring is not None and self.ring != other.ring:
            raise RingMismatch("elements over different rings")
        return other

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element(self.basis, axpy(dict(self.terms), 1, other.terms), self.ring or other.ring)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return Element(self.basis, axpy(dict(self.terms), -1, other.terms), self.ring or other.ring)

    def __neg__(self):
        return Element(self.basis, {i: -c for i, c in self.terms.items()}, self.ring)

    def __mul__(self, c):
        if isinstance(c, Element):
            return NotImplemented
        return Element(self.basis, {i: v * c for i, v in self.terms.items()}, self.ring)

    __rmul__ = __mul__

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self.basis == other.basis and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def degree(self):
        """Common degree of the terms; ``None`` if zero or inhomogeneous."""
        ds = {self.basis.degree(i) for i in self.terms}
        return ds.pop() if len(ds) == 1 else None

    def __repr__(self):
        return f"Element({self})"

    def __str__(self):
        if not self.terms:
            return "0"
        from .coefficients.rings import format_element
        return " + ".join(f"({format_element(self.terms[i])})*{i}" for i in self.basis if i in self.terms)


def _is_permutation(perm, n):
    return sorted(perm) == list(range(n))


def koszul_sign(permutation, reduced_degrees) -> int:
    """Sign of ``v_p(0) ... v_p(n-1)`` relative to ``v_0 ... v_(n-1)``.

    ``reduced_degrees[i]`` is the degree of ``v_i``.  Computed by sorting the
    permutation with adjacent transpositions, each contributing
    ``(-1)^(d_a * d_b)``.
    """
    perm = list(permutation)
    if len(perm) != len(reduced_degrees):
        raise LengthMismatch(f"permutation of length {len(perm)} with {len(reduced_degrees)} degrees")
    if not _is_permutation(perm, len(perm)):
        raise ValueError(f"{permutation} is not a permutation of 0..{len(perm) - 1}")
    sign = 1
    n = len(perm)
    for end in range(n - 1, 0, -1):
        for k in range(end):
            if perm[k] > perm[k + 1]:
                if reduced_degrees[perm[k]] % 2 and reduced_degrees[perm[k + 1]] % 2:
                    sign = -sign
                perm[k], perm[k + 1] = perm[k + 1], perm[k]
    return sign


def unshuffles(j, s):
    """All ``(j, s - j)`` unshuffles of ``range(s)``, lexicographically."""
    if not 0 <= j <= s:
        raise ValueError(f"need 0 <= j <= s, got j={j}, s={s}")
    out = []
    for head in combinations(range(s), j):
        rest = [k for k in range(s) if k not in head]
        out.append(tuple(head) + tuple(rest))
    return out


def sort_with_sign(ids, basis):
    """Sort ``ids`` by basis order; return ``(sorted ids, Koszul sign)``."""
    order = sorted(range(len(ids)), key=lambda k: basis.index(ids[k]))
    degs = [basis.reduced_degree(i) for i in ids]
    return tuple(ids[k] for k in order), koszul_sign(order, degs)


class MultilinearOperation:
    """Sparse ``s``-ary map of fixed degree.

    ``entries`` maps ``s``-tuples of input identifiers to output vectors
    (dicts or :class:`Element`).  With ``symmetry=SYMMETRIC`` the entries are
    folded onto canonical tuples; ``raw`` keeps what was supplied so that
    :func:`check_symmetry` can audit it.
    """

    def __init__(self, arity, degree, entries=None, symmetry=NONE, basis=None, target=None):
        if arity < 0 or arity > ARITY_HARD_CAP:
            raise ValueError(f"arity must lie in 0..{ARITY_HARD_CAP}")
        if symmetry not in (NONE, SYMMETRIC):
            raise ValueError(f"unknown symmetry {symmetry!r}")
        if symmetry == SYMMETRIC and basis is None:
            raise ValueError("symmetric operations need a basis for signs")
        self.arity = arity
        self.degree = degree
        self.symmetry = symmetry
        self.basis = basis
        self.target = target or basis
        raw = {}
        for key, out in (entries or {}).items():
            key = tuple(key)
            if len(key) != arity:
                raise ArityMismatch(f"entry {key} for an operation of arity {arity}")
            vec = dict(out.terms) if isinstance(out, Element) else {k: v for k, v in out.items() if v}
            if vec:
                raw[key] = vec
        self.raw = raw
        if symmetry == SYMMETRIC:
            table = {}
            for key in sorted(raw, key=lambda k: [basis.index(i) for i in k]):
                canon, sign = sort_with_sign(key, basis)
                if canon in raw:
                    table[canon] = raw[canon]
                elif canon not in table:
                    table[canon] = {k: sign * v for k, v in raw[key].items()}
            self.table = table
        else:
            self.table = raw

    def read(self, ids) -> dict:
        """Output vector on a basis tuple, with the symmetry sign applied."""
        ids = tuple(ids)
        if self.symmetry == SYMMETRIC:
            canon, sign = sort_with_sign(ids, self.basis)
            out = self.table.get(canon)
            if not out:
                return {}
            return out if sign == 1 else {k: -v for k, v in out.items()}
        return self.table.get(ids, {})

    def __bool__(self):
        return bool(self.table)

    def items(self):
        return self.table.items()

    def __repr__(self):
        return f"MultilinearOperation(arity={self.arity}, degree={self.degree}, {len(self.table)} entries)"


def evaluate(op: MultilinearOperation, args) -> Element:
    """Multilinear extension of ``op`` to elements."""
    args = list(args)
    if op.target is None:
        raise ValueError("operation has no target basis")
    if len(args) != op.arity:
        raise ArityMismatch(f"operation of arity {op.arity} applied to {len(args)} arguments")
    ring = None
    for a in args:
        if a.ring is not None:
            if ring is not None and a.ring != ring:
                raise RingMismatch("arguments over different rings")
            ring = a.ring
    out = {}
    for combo in product(*[list(a.terms.items()) for a in args]):
        ids = tuple(i for i, _ in combo)
        val = op.read(ids)
        if not val:
            continue
        c = Fraction(1)
        for _, x in combo:
            c = x * c
        axpy(out, c, val)
    return Element(op.target, out, ring)


def check_symmetry(op: MultilinearOperation) -> Report:
    rep = Report("pass", caps={"arity": op.arity})
    if op.symmetry != SYMMETRIC or op.arity <= 1:
        return rep
    b = op.basis
    for key in sorted(op.raw, key=lambda k: [b.index(i) for i in k]):
        expect = op.read(key)
        got = op.raw[key]
        if expect != got:
            diff = axpy(dict(got), -1, expect)
            rep.add(key, diff)
    for canon, out in sorted(op.table.items(), key=lambda kv: [b.index(i) for i in kv[0]]):
        for k in range(len(canon) - 1):
            if canon[k] == canon[k + 1] and b.reduced_degree(canon[k]) % 2 and out:
                rep.add(canon, out)
                break
    if rep.findings:
        rep.verdict = "fail"
    return rep


def check_degrees(op: MultilinearOperation) -> Report:
    """Every stored entry obeys ``deg(out) = sum deg(in) + op.degree``."""
    rep = Report("pass", caps={"arity": op.arity})
    src, tgt = op.basis, op.target
    for key, out in op.raw.items():
        want = sum(src.degree(i) for i in key) + op.degree
        for i in out:
            if tgt.degree(i) != want:
                rep.add(key, {i: out[i]})
    if rep.findings:
        rep.verdict = "fail"
    return rep
