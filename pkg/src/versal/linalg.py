"""Sparse exact linear algebra over the ground field.

Vectors are plain dicts ``key -> scalar`` with zero entries absent.  Keys only
need to be mutually comparable under ``order`` (used to pick pivots), so the
same machinery serves monomial coordinates, cochain coordinates and basis ids.
"""

from __future__ import annotations

from fractions import Fraction


def axpy(y: dict, a, x: dict) -> dict:
    """In place ``y += a*x``; returns ``y``."""
    if not a:
        return y
    for k, v in x.items():
        w = y.get(k, 0) + a * v
        if w:
            y[k] = w
        else:
            y.pop(k, None)
    return y


def scale(a, x: dict) -> dict:
    if not a:
        return {}
    return {k: a * v for k, v in x.items()}


class Echelon:
    """Incremental reduced row echelon form with optional tag tracking.

    Every stored row is ``(vector, tag)`` where ``tag`` records which inserted
    vectors it is a combination of.  This gives, from one structure, ranks,
    solutions of ``sum x_j col_j = b`` and kernel vectors.
    """

    def __init__(self, order=None):
        self.order = order
        self.rows: dict = {}  # pivot -> (vec, tag)

    def __len__(self):
        return len(self.rows)

    def _pivot(self, vec):
        return max(vec, key=self.order) if self.order else max(vec)

    def reduce(self, vec: dict, tag: dict | None = None):
        """Return ``(remainder, tag')`` with ``vec - combination = remainder``.

        ``tag'`` is ``tag`` minus the tags of the rows subtracted.
        """
        vec = dict(vec)
        tag = dict(tag) if tag else {}
        for p in [k for k in vec if k in self.rows]:
            c = vec.get(p)
            if not c:
                continue
            rv, rt = self.rows[p]
            axpy(vec, -c, rv)
            axpy(tag, -c, rt)
        return vec, tag

    def add(self, vec: dict, tag: dict | None = None):
        """Insert; returns ``None`` if independent, else the kernel tag."""
        vec, tag = self.reduce(vec, tag)
        if not vec:
            return tag
        p = self._pivot(vec)
        inv = Fraction(1) / vec[p]
        vec = scale(inv, vec)
        tag = scale(inv, tag)
        for q, (rv, rt) in self.rows.items():
            c = rv.get(p)
            if c:
                axpy(rv, -c, vec)
                axpy(rt, -c, tag)
        self.rows[p] = (vec, tag)
        return None

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)[0]

    def normal_form(self, vec: dict) -> dict:
        return self.reduce(vec)[0]


def rank(vectors) -> int:
    e = Echelon(order=_safe_key)
    for v in vectors:
        e.add(v)
    return len(e)


def _safe_key(k):
    return repr(k) if not isinstance(k, (int, str, tuple)) else k


class LinearSystem:
    """Columns ``col_j`` (dicts); solves ``sum x_j col_j = b`` exactly.

    Earlier columns are preferred: the returned solution is supported on the
    first independent columns, which makes every solve deterministic.
    """

    def __init__(self, columns, order=None):
        self.columns = list(columns)
        self.echelon = Echelon(order=order)
        self.kernel = []
        self.independent = []
        for j, col in enumerate(self.columns):
            k = self.echelon.add(col, {j: Fraction(1)})
            if k is None:
                self.independent.append(j)
            else:
                self.kernel.append(k)

    @property
    def rank(self) -> int:
        return len(self.echelon)

    def solve(self, b: dict):
        """A solution dict ``j -> x_j``, or ``None`` if ``b`` is not in the span."""
        rem, tag = self.echelon.reduce(b)
        if rem:
            return None
        return {j: -v for j, v in tag.items()}

    def residual(self, b: dict) -> dict:
        return self.echelon.reduce(b)[0]


def quotient_coordinates(high, candidates, order=None):
    """Basis of ``span(high + candidates) / span(high)`` drawn from ``candidates``.

    Returns ``(chosen, coords)``: ``chosen`` lists indices of the candidates
    kept, and ``coords(v)`` maps a vector of the larger span to its
    coordinates (dict ``index -> scalar``) modulo ``span(high)``.  Raises
    ``ValueError`` if ``v`` is outside the larger span.
    """
    e = Echelon(order=order)
    for h in high:
        e.add(h)
    chosen = []
    for i, c in enumerate(candidates):
        if e.add(c, {i: Fraction(1)}) is None:
            chosen.append(i)

    def coords(v):
        rem, tag = e.reduce(v)
        if rem:
            raise ValueError("vector outside the filtration piece")
        return {i: -x for i, x in tag.items()}

    return chosen, coords
