"""Truncated Novikov series and specialization at Lambda-points."""

from __future__ import annotations

import math
from fractions import Fraction

from ..errors import IrrationalPhase, NonPositiveArea
from ..linalg import LinearSystem
from .cones import ConeCompletion
from .field import Gaussian, format_scalar, phase, to_scalar
from .rings import SeriesElement

INF = math.inf


def _exp(x):
    return Fraction(x) if not isinstance(x, Fraction) else x


class NovikovElement:
    """``sum c_e q^e`` over rational ``e < cutoff``; ``cutoff`` may be ``inf``."""

    __slots__ = ("terms", "cutoff", "nonnegative")

    def __init__(self, terms=None, cutoff=INF, nonnegative=False):
        cutoff = cutoff if cutoff == INF else _exp(cutoff)
        out = {}
        for e, c in (terms or {}).items():
            e, c = _exp(e), to_scalar(c)
            if c and e < cutoff:
                out[e] = out.get(e, 0) + c
                if not out[e]:
                    del out[e]
        if nonnegative and any(e < 0 for e in out):
            raise ValueError("negative exponent in a nonnegative Novikov element")
        self.terms = out
        self.cutoff = cutoff
        self.nonnegative = nonnegative

    @classmethod
    def monomial(cls, e, coeff=1, cutoff=INF):
        return cls({e: coeff}, cutoff, nonnegative=_exp(e) >= 0)

    def valuation(self):
        return min(self.terms) if self.terms else INF

    def _floor(self):
        # every term of the true series beyond this element lies at or above it
        return min(self.valuation(), self.cutoff)

    def _coerce(self, other):
        if isinstance(other, NovikovElement):
            return other
        if isinstance(other, (int, Fraction, Gaussian)) and not isinstance(other, bool):
            return NovikovElement({0: other}, nonnegative=True)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        terms = dict(self.terms)
        for e, c in o.terms.items():
            terms[e] = terms.get(e, 0) + c
        return NovikovElement(terms, min(self.cutoff, o.cutoff),
                              self.nonnegative and o.nonnegative)

    __radd__ = __add__

    def __neg__(self):
        return NovikovElement({e: -c for e, c in self.terms.items()}, self.cutoff, self.nonnegative)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        cutoff = min(self.cutoff + o._floor(), o.cutoff + self._floor())
        terms = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                terms[e1 + e2] = terms.get(e1 + e2, 0) + c1 * c2
        return NovikovElement(terms, cutoff, self.nonnegative and o.nonnegative)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        out = NovikovElement({0: 1}, nonnegative=True)
        for _ in range(n):
            out = out * self
        return out

    def truncate(self, cutoff):
        return NovikovElement(self.terms, min(self.cutoff, cutoff), self.nonnegative)

    def agrees_with(self, other):
        """Equality of the known parts, below both cutoffs."""
        c = min(self.cutoff, other.cutoff)
        return self.truncate(c).terms == other.truncate(c).terms

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.terms == o.terms and self.cutoff == o.cutoff

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.cutoff))

    def __bool__(self):
        return bool(self.terms)

    def __repr__(self):
        return f"NovikovElement({self})"

    def __str__(self):
        if not self.terms:
            body = "0"
        else:
            parts = []
            for e in sorted(self.terms):
                c = self.terms[e]
                mono = "" if e == 0 else ("q" if e == 1 else f"q^{e}" if e.denominator == 1 else f"q^({e})")
                cs = f"({format_scalar(c)})" if isinstance(c, Gaussian) else format_scalar(c)
                if not mono:
                    parts.append(cs)
                elif cs == "1":
                    parts.append(mono)
                elif cs == "-1":
                    parts.append("-" + mono)
                else:
                    parts.append(f"{cs}*{mono}")
            body = " + ".join(parts).replace("+ -", "- ")
        if self.cutoff != INF:
            body += f" + O(q^{self.cutoff})"
        return body


def novikov_valuation(x: NovikovElement):
    return x.valuation()


class LambdaPoint:
    """Symplectic area ``omega`` and B-field ``b_field`` on a cone monoid.

    Values are given on the generators (list, or dict by generator name) and
    must extend to linear functionals; ``b_field`` is read modulo ``Z``.
    """

    def __init__(self, cone, omega, b_field=None):
        self.cone = cone
        self.omega = self._values(omega, "omega")
        self.b_field = self._values(b_field or {}, "b_field", default=0)
        self._check_linear(self.omega, exact=True, label="omega")
        self._check_linear(self.b_field, exact=False, label="b_field")
        for n, g, w in zip(cone.names, cone.generators, self.omega):
            if any(g) and w <= 0:
                raise NonPositiveArea(f"omega({n}) = {w} is not positive")
        for n, b in zip(cone.names, self.b_field):
            try:
                phase(b)
            except ValueError:
                raise IrrationalPhase(f"B({n}) = {b} is outside the supported phases 0, 1/4, 1/2, 3/4") from None

    def _values(self, vals, label, default=None):
        names = self.cone.names
        if isinstance(vals, dict):
            unknown = set(vals) - set(names)
            if unknown:
                raise ValueError(f"{label}: unknown generators {sorted(unknown)}")
            if default is None and set(vals) != set(names):
                raise ValueError(f"{label}: values required for all of {list(names)}")
            return tuple(Fraction(vals.get(n, default)) for n in names)
        vals = [Fraction(v) for v in vals]
        if len(vals) != len(names):
            raise ValueError(f"{label}: need {len(names)} values")
        return tuple(vals)

    def _check_linear(self, vals, exact, label):
        # values must respect every linear relation among the generators
        gens = self.cone.generators
        cols = [{j: Fraction(a) for j, a in enumerate(g) if a} for g in gens]
        for k in LinearSystem(cols).kernel:
            total = sum(c * vals[i] for i, c in k.items())
            if exact and total != 0:
                raise ValueError(f"{label} is not linear on the monoid")
            if not exact:
                den = math.lcm(*(c.denominator for c in k.values()))
                if (total * den) % 1:
                    raise ValueError(f"{label} is not linear modulo Z on the monoid")

    @property
    def omega_min(self):
        return min(w for w, g in zip(self.omega, self.cone.generators) if any(g))


def lambda_point_specialize(elem: SeriesElement, p: LambdaPoint, cutoff) -> NovikovElement:
    """``r^u -> exp(2 pi i B(u)) q^omega(u)``, exact below the effective cutoff.

    Monomials of degree above the ring's truncation are unknown, so the
    effective cutoff is ``min(cutoff, (N + 1) * omega_min)``.
    """
    ring = elem.ring
    if not isinstance(ring, ConeCompletion) or ring.cone != p.cone:
        raise ValueError("element must live in the completion of the point's cone")
    eff = Fraction(cutoff) if cutoff != INF else INF
    eff = min(eff, (ring.N + 1) * p.omega_min)
    terms = {}
    for e, c in elem.terms.items():
        area = sum(k * w for k, w in zip(e, p.omega))
        ph = phase(sum(k * b for k, b in zip(e, p.b_field)))
        terms[area] = terms.get(area, 0) + c * ph
    return NovikovElement(terms, eff, nonnegative=True)


def large_volume_specialize(elem: SeriesElement):
    """Constant monomials weigh 1, all others 0."""
    return elem.constant()
