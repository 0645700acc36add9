"""Truncated complete local rings ``k[[x_1..x_n]] / (I + weight > N)``.

Normal forms come from a Macaulay-style linear algebra Groebner basis: the
ideal image inside the finite monomial space is spanned by the truncated
products ``u * p`` (``u`` a monomial, ``p`` a relation), and reducing that
span to echelon form with pivots at the graded-lex largest monomial gives a
unique standard representative for every class.
"""

from __future__ import annotations

import ast
from fractions import Fraction
from functools import cached_property

from ..errors import BadTruncation, NotAUnit, RelationHasUnit, RingMismatch
from ..linalg import Echelon, quotient_coordinates, axpy
from .field import Gaussian, I, format_scalar, to_scalar


def monomials_up_to(weights, bound):
    """All exponent vectors with weighted degree ``<= bound``, ascending."""
    n = len(weights)
    out = []

    def rec(i, left, prefix):
        if i == n:
            out.append(tuple(prefix))
            return
        for e in range(left // weights[i] + 1):
            prefix.append(e)
            rec(i + 1, left - e * weights[i], prefix)
            prefix.pop()

    rec(0, bound, [])
    return sorted(out, key=lambda m: (sum(w * e for w, e in zip(weights, m)), m))


class LocalRing:
    """Use :func:`make_local_ring`; instances are immutable."""

    def __init__(self, names, weights, relations, truncation_order, *, _allow_zero=False):
        if not _allow_zero and truncation_order < 1:
            raise BadTruncation(f"truncation order must be >= 1, got {truncation_order}")
        if len(set(names)) != len(names):
            raise ValueError("variable names must be unique")
        if any(w < 1 for w in weights):
            raise ValueError("variable weights must be positive integers")
        self.names = tuple(names)
        self.weights = tuple(int(w) for w in weights)
        self.N = int(truncation_order)
        self.zero_exp = (0,) * len(self.names)
        rels = []
        for p in relations:
            p = {tuple(e): to_scalar(c) for e, c in p.items() if c}
            if p.get(self.zero_exp):
                raise RelationHasUnit(f"relation {_format_terms(p, self.names)} has a nonzero constant term")
            rels.append(p)
        self.relations = tuple(rels)
        self._echelon = Echelon(order=self.order_key)
        self._pieces = {}
        if rels:
            for u in self.monomials:
                for p in rels:
                    row = {}
                    for e, c in p.items():
                        m = tuple(a + b for a, b in zip(u, e))
                        if self.weight(m) <= self.N:
                            row[m] = c
                    if row:
                        self._echelon.add(row)
        self._key = (self.names, self.weights, self.N,
                     tuple(sorted(tuple(sorted(r.items(), key=lambda t: t[0])) for r in self._echelon_rows())))

    def _echelon_rows(self):
        return [v for v, _ in self._echelon.rows.values()]

    def weight(self, exps):
        return sum(w * e for w, e in zip(self.weights, exps))

    def order_key(self, exps):
        return (self.weight(exps), exps)

    @cached_property
    def monomials(self):
        return monomials_up_to(self.weights, self.N)

    @cached_property
    def standard_monomials(self):
        """Monomials that survive reduction; a basis of the truncated ring."""
        return [m for m in self.monomials if m not in self._echelon.rows]

    @property
    def has_relations(self):
        return bool(self._echelon.rows)

    @property
    def ngens(self):
        return len(self.names)

    def __eq__(self, other):
        return self is other or (isinstance(other, LocalRing) and self._key == other._key)

    def __hash__(self):
        return hash(self._key)

    def __repr__(self):
        vs = ", ".join(n if w == 1 else f"{n}:{w}" for n, w in zip(self.names, self.weights))
        rels = ", ".join(_format_terms(r, self.names) for r in self.relations)
        return f"LocalRing([{vs}], [{rels}], N={self.N})"

    # construction of elements
    def _normalize(self, terms):
        terms = {e: c for e, c in terms.items() if c and self.weight(e) <= self.N}
        if self._echelon.rows:
            terms = self._echelon.normal_form(terms)
        return terms

    def element(self, terms):
        return SeriesElement(self, self._normalize({tuple(e): to_scalar(c) for e, c in terms.items()}))

    def __call__(self, x):
        return self.coerce(x)

    def coerce(self, x):
        if isinstance(x, SeriesElement):
            if x.ring != self:
                raise RingMismatch(f"element of {x.ring!r} used in {self!r}")
            return x
        if isinstance(x, str):
            return self.parse(x)
        x = to_scalar(x)
        return SeriesElement(self, {self.zero_exp: x} if x else {})

    @property
    def zero(self):
        return SeriesElement(self, {})

    @property
    def one(self):
        return self.coerce(1)

    def monomial(self, exps, coeff=1):
        return self.element({tuple(exps): coeff})

    def gen(self, name):
        i = self.names.index(name)
        e = [0] * self.ngens
        e[i] = 1
        return self.monomial(e)

    def gens(self):
        return [self.gen(n) for n in self.names]

    def parse(self, text):
        return self.element(parse_polynomial(text, self.names))

    # filtrations
    def _image_vectors(self, monos):
        return [self._normalize({m: Fraction(1)}) for m in monos]

    def graded_piece(self, k):
        """Basis and coordinates for ``F_k / F_{k+1}``, ``F_k`` = weight >= k.

        Returns ``(basis, coords)`` where ``basis`` is a list of elements and
        ``coords(x)`` gives the coordinates of ``x in F_k`` modulo ``F_{k+1}``.
        """
        if k not in self._pieces:
            high = self._image_vectors([m for m in self.monomials if self.weight(m) > k])
            cand_m = [m for m in self.monomials if self.weight(m) == k]
            cands = self._image_vectors(cand_m)
            chosen, coords = quotient_coordinates(high, cands, order=self.order_key)
            basis = [SeriesElement(self, cands[i]) for i in chosen]
            pos = {i: j for j, i in enumerate(chosen)}

            def piece_coords(x, _coords=coords, _pos=pos):
                c = _coords(x.terms if isinstance(x, SeriesElement) else x)
                return {_pos[i]: v for i, v in c.items()}

            self._pieces[k] = (basis, piece_coords)
        return self._pieces[k]

    @cached_property
    def cotangent(self):
        """``(variable indices, coords)`` for the cotangent space ``m/m^2``."""
        high = self._image_vectors([m for m in self.monomials if sum(m) >= 2])
        lin = []
        for i in range(self.ngens):
            e = [0] * self.ngens
            e[i] = 1
            lin.append(tuple(e))
        chosen, coords = quotient_coordinates(high, self._image_vectors(lin), order=self.order_key)
        pos = {i: j for j, i in enumerate(chosen)}

        def cot_coords(x):
            c = coords({e: v for e, v in x.terms.items() if e != self.zero_exp})
            return {pos[i]: v for i, v in c.items()}

        return chosen, cot_coords

    def valuation(self, x):
        """Largest ``k`` with ``x in F_k`` (``N + 1`` for zero)."""
        for k in range(0, self.N + 1):
            basis, coords = self.graded_piece(k)
            try:
                c = coords(x)
            except ValueError:
                raise AssertionError("element outside F_k") from None
            if c:
                return k
            x = x - sum((v * basis[i] for i, v in c.items()), self.zero)
        return self.N + 1


def _ground():
    return LocalRing((), (), (), 0, _allow_zero=True)


GROUND = _ground()


def make_local_ring(variables, relations=(), truncation_order=8):
    """Build ``k[[vars]] / (relations)`` truncated at weight ``N``.

    ``variables`` may be a list of names, of ``(name, weight)`` pairs, or a
    ``{name: weight}`` dict.  ``relations`` may be strings or term dicts
    ``{exponent tuple: coefficient}``.
    """
    if isinstance(variables, dict):
        variables = list(variables.items())
    names, weights = [], []
    for v in variables:
        if isinstance(v, str):
            names.append(v)
            weights.append(1)
        else:
            names.append(v[0])
            weights.append(int(v[1]))
    if int(truncation_order) != truncation_order or truncation_order < 1:
        raise BadTruncation(f"truncation order must be an integer >= 1, got {truncation_order}")
    rels = [parse_polynomial(r, names) if isinstance(r, str) else r for r in relations]
    return LocalRing(names, weights, rels, truncation_order)


class SeriesElement:
    """Element of a :class:`LocalRing`, always stored in normal form."""

    __slots__ = ("ring", "terms")

    def __init__(self, ring, terms):
        self.ring = ring
        self.terms = terms

    def _other(self, x):
        if isinstance(x, SeriesElement):
            if x.ring is not self.ring and x.ring != self.ring:
                raise RingMismatch("arithmetic between elements of different rings")
            return x
        if isinstance(x, (int, Fraction, Gaussian)) and not isinstance(x, bool):
            return self.ring.coerce(x)
        return None

    def __add__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return SeriesElement(self.ring, axpy(dict(self.terms), 1, o.terms))

    __radd__ = __add__

    def __neg__(self):
        return SeriesElement(self.ring, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return SeriesElement(self.ring, axpy(dict(self.terms), -1, o.terms))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Gaussian)) and not isinstance(other, bool):
            if not other:
                return SeriesElement(self.ring, {})
            return SeriesElement(self.ring, {e: c * other for e, c in self.terms.items()})
        o = self._other(other)
        if o is None:
            return NotImplemented
        return series_mul(self, o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction, Gaussian)) and not isinstance(other, bool):
            return self * (Fraction(1) / to_scalar(other))
        o = self._other(other)
        if o is None:
            return NotImplemented
        return self * series_invert(o)

    def __rtruediv__(self, other):
        o = self._other(other)
        if o is None:
            return NotImplemented
        return o * series_invert(self)

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return series_invert(self) ** (-n)
        out = self.ring.one
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        o = self._other(other) if not isinstance(other, SeriesElement) else other
        if o is None:
            return NotImplemented
        if o.ring != self.ring:
            return False
        return self.terms == o.terms

    def __hash__(self):
        if not self.terms:
            return hash(0)
        if set(self.terms) == {self.ring.zero_exp}:
            return hash(self.terms[self.ring.zero_exp])
        return hash(frozenset(self.terms.items()))

    def constant(self):
        return self.terms.get(self.ring.zero_exp, Fraction(0))

    def in_max_ideal(self):
        return not self.constant()

    def valuation(self):
        return self.ring.valuation(self)

    def leading_monomial(self):
        return max(self.terms, key=self.ring.order_key) if self.terms else None

    def __repr__(self):
        return f"SeriesElement({self})"

    def __str__(self):
        return _format_terms(self.terms, self.ring.names)


def series_mul(a: SeriesElement, b: SeriesElement) -> SeriesElement:
    if a.ring is not b.ring and a.ring != b.ring:
        raise RingMismatch("product of elements of different rings")
    ring = a.ring
    N, wt = ring.N, ring.weight
    out = {}
    bw = [(e, c, wt(e)) for e, c in b.terms.items()]
    for e1, c1 in a.terms.items():
        w1 = wt(e1)
        for e2, c2, w2 in bw:
            if w1 + w2 > N:
                continue
            m = tuple(x + y for x, y in zip(e1, e2))
            v = out.get(m, 0) + c1 * c2
            if v:
                out[m] = v
            else:
                out.pop(m, None)
    if ring._echelon.rows:
        out = ring._echelon.normal_form(out)
    return SeriesElement(ring, out)


def series_invert(a: SeriesElement) -> SeriesElement:
    c0 = a.constant()
    if not c0:
        raise NotAUnit(f"{a} has zero constant term")
    inv0 = Fraction(1) / c0
    n = a * inv0 - 1
    # 1/(1+n) = sum (-n)^k, finite since n is nilpotent at weight N
    out = a.ring.one
    p = a.ring.one
    for _ in range(a.ring.N):
        p = p * (-n)
        if not p:
            break
        out = out + p
    return out * inv0


class RingMap:
    """Local homomorphism ``source -> target`` given on generators."""

    def __init__(self, source: LocalRing, target: LocalRing, images):
        self.source = source
        self.target = target
        if isinstance(images, dict):
            images = [images[n] for n in source.names]
        self.images = tuple(target.coerce(x) for x in images)
        if len(self.images) != source.ngens:
            raise ValueError("one image per source generator required")
        for n, x in zip(source.names, self.images):
            if not x.in_max_ideal():
                raise ValueError(f"image of {n} must lie in the maximal ideal")
        self._powers = [[target.one] for _ in self.images]

    def _power(self, i, k):
        pw = self._powers[i]
        while len(pw) <= k:
            pw.append(pw[-1] * self.images[i])
        return pw[k]

    def _image_of_monomial(self, exps):
        out = self.target.one
        for i, k in enumerate(exps):
            if k:
                out = out * self._power(i, k)
                if not out:
                    break
        return out

    def apply_terms(self, terms):
        out = self.target.zero
        for e, c in terms.items():
            out = out + c * self._image_of_monomial(e)
        return out

    def __call__(self, x):
        if not isinstance(x, SeriesElement):
            return self.target.coerce(x)
        if x.ring != self.source:
            raise RingMismatch("ring map applied to an element of another ring")
        return self.apply_terms(x.terms)

    def well_defined(self):
        """True iff relations and truncation of the source map to zero."""
        for p in self.source.relations:
            if self.apply_terms(p):
                return False
        s = self.source
        for m in monomials_up_to(s.weights, s.N + max(s.weights, default=1)):
            if s.weight(m) > s.N and all(
                    s.weight(m) - w <= s.N for w, e in zip(s.weights, m) if e):
                if self._image_of_monomial(m):
                    return False
        return True

    def compose(self, other: "RingMap") -> "RingMap":
        """``self o other`` (apply ``other`` first)."""
        if other.target != self.source:
            raise RingMismatch("ring maps are not composable")
        return RingMap(other.source, self.target, [self(x) for x in other.images])

    def __eq__(self, other):
        return (isinstance(other, RingMap) and self.source == other.source
                and self.target == other.target and self.images == other.images)

    def __repr__(self):
        body = ", ".join(f"{n} -> {x}" for n, x in zip(self.source.names, self.images))
        return f"RingMap({body})"


def identity_map(ring: LocalRing) -> RingMap:
    return RingMap(ring, ring, ring.gens())


# parsing and printing

def _format_terms(terms, names):
    if not terms:
        return "0"
    keys = sorted(terms, key=lambda m: (sum(m), m), reverse=True)
    parts = []
    for e in keys:
        c = terms[e]
        mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
        if isinstance(c, Gaussian):
            cs = f"({format_scalar(c)})"
            neg = False
        else:
            neg = c < 0
            cs = format_scalar(abs(c))
        if mono:
            body = mono if cs == "1" else f"{cs}*{mono}"
        else:
            body = cs
        if not parts:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    return "".join(parts)


MAX_EXPONENT = 64


def parse_polynomial(text: str, names) -> dict:
    """Parse ``"x^2/2 - 3*x*y + (1+I)*y"`` into ``{exponents: scalar}``.

    Supports ``+ - * /`` (division by scalars only), ``^`` or ``**`` with
    non-negative integer exponents, rational literals and the unit ``I``.
    """
    names = tuple(names)
    try:
        tree = ast.parse(text.replace("^", "**"), mode="eval")
    except SyntaxError as exc:
        raise ValueError(f"cannot parse polynomial {text!r}: {exc.msg}") from None
    zero = (0,) * len(names)

    def mul(p, q):
        out = {}
        for e1, c1 in p.items():
            for e2, c2 in q.items():
                m = tuple(a + b for a, b in zip(e1, e2))
                axpy(out, c1 * c2, {m: Fraction(1)})
        return out

    def const(p):
        if any(e != zero for e in p):
            raise ValueError(f"non-constant divisor or exponent in {text!r}")
        return p.get(zero, Fraction(0))

    def ev(node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, int):
                raise ValueError(f"unsupported literal {node.value!r} in {text!r}")
            return {zero: Fraction(node.value)} if node.value else {}
        if isinstance(node, ast.Name):
            if node.id in names:
                e = [0] * len(names)
                e[names.index(node.id)] = 1
                return {tuple(e): Fraction(1)}
            if node.id in ("I", "i"):
                return {zero: I}
            raise ValueError(f"unknown variable {node.id!r} in {text!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            p = ev(node.operand)
            return {e: -c for e, c in p.items()} if isinstance(node.op, ast.USub) else p
        if isinstance(node, ast.BinOp):
            a, b = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Add):
                return axpy(dict(a), 1, b)
            if isinstance(node.op, ast.Sub):
                return axpy(dict(a), -1, b)
            if isinstance(node.op, ast.Mult):
                return mul(a, b)
            if isinstance(node.op, ast.Div):
                d = const(b)
                if not d:
                    raise ValueError(f"division by zero in {text!r}")
                return {e: c / d for e, c in a.items()}
            if isinstance(node.op, ast.Pow):
                k = const(b)
                if isinstance(k, Gaussian) or k.denominator != 1 or k < 0:
                    raise ValueError(f"exponent must be a non-negative integer in {text!r}")
                if k > MAX_EXPONENT:
                    raise ValueError(f"exponent {k} above {MAX_EXPONENT} in {text!r}")
                out = {zero: Fraction(1)}
                for _ in range(int(k)):
                    out = mul(out, a)
                return out
        raise ValueError(f"unsupported syntax in polynomial {text!r}")

    return ev(tree.body)


def format_element(x) -> str:
    if isinstance(x, SeriesElement):
        return str(x)
    return format_scalar(x)

