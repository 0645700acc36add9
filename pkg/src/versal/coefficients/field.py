"""Exact ground-field scalars: rationals, optionally extended by i."""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


class Gaussian:
    """A Gaussian rational ``re + im*i`` with ``im != 0``.

    Arithmetic that produces a zero imaginary part returns a plain
    :class:`~fractions.Fraction`, so a scalar has exactly one representation.
    """

    __slots__ = ("re", "im")

    def __init__(self, re, im):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _parts(x):
        if isinstance(x, Gaussian):
            return x.re, x.im
        if isinstance(x, (int, Fraction, Rational)):
            return Fraction(x), Fraction(0)
        return None

    def __add__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gaussian(self.re + p[0], self.im + p[1])

    __radd__ = __add__

    def __neg__(self):
        return Gaussian(-self.re, -self.im)

    def __sub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gaussian(self.re - p[0], self.im - p[1])

    def __rsub__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gaussian(p[0] - self.re, p[1] - self.im)

    def __mul__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        a, b = p
        return gaussian(self.re * a - self.im * b, self.re * b + self.im * a)

    __rmul__ = __mul__

    def _inverse(self):
        n = self.re * self.re + self.im * self.im
        return Gaussian(self.re / n, -self.im / n)

    def __truediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        if p[1] == 0:
            if p[0] == 0:
                raise ZeroDivisionError("division by zero")
            return gaussian(self.re / p[0], self.im / p[0])
        return self * Gaussian(*p)._inverse()

    def __rtruediv__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return gaussian(*p) * self._inverse()

    def __pow__(self, n):
        if not isinstance(n, int):
            return NotImplemented
        if n < 0:
            return self._inverse() ** (-n)
        out = Fraction(1)
        base = self
        while n:
            if n & 1:
                out = base * out
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        p = self._parts(other)
        if p is None:
            return NotImplemented
        return self.re == p[0] and self.im == p[1]

    def __hash__(self):
        return hash((self.re, self.im))

    def __bool__(self):
        return True

    def conjugate(self):
        return Gaussian(self.re, -self.im)

    def __repr__(self):
        return f"Gaussian({self.re!s}, {self.im!s})"

    def __str__(self):
        return format_scalar(self)


def gaussian(re, im=0):
    """Canonical scalar for ``re + im*i``."""
    im = Fraction(im)
    if im == 0:
        return Fraction(re)
    return Gaussian(re, im)


I = Gaussian(0, 1)


def to_scalar(x):
    """Coerce ints, Fractions, Gaussians and ``"p/q"`` strings to a scalar."""
    if isinstance(x, (Fraction, Gaussian)):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_scalar(x)
    raise TypeError(f"not an exact scalar: {x!r}")


def parse_scalar(text: str):
    s = text.replace(" ", "").replace("*", "")
    if not s:
        raise ValueError("empty scalar")
    if s[-1] not in "iI":
        return Fraction(s)
    body = s[:-1]
    k = max(body.rfind("+"), body.rfind("-"))
    re_s, im_s = (body[:k], body[k:]) if k > 0 else ("", body)
    if im_s in ("", "+"):
        im = Fraction(1)
    elif im_s == "-":
        im = Fraction(-1)
    else:
        im = Fraction(im_s)
    return gaussian(Fraction(re_s) if re_s else 0, im)


def format_scalar(x) -> str:
    """Canonical text: ``"3"``, ``"-1/2"``, ``"1/2+3/4i"``."""
    if isinstance(x, Gaussian):
        im = x.im
        sign = "-" if im < 0 else "+"
        mag = "" if abs(im) == 1 else str(abs(im))
        if x.re == 0:
            return ("-" if im < 0 else "") + mag + "i"
        return f"{x.re}{sign}{mag}i"
    return str(Fraction(x))


def phase(b) -> Fraction | Gaussian:
    """``exp(2*pi*i*b)`` for ``b`` a multiple of 1/4; raises otherwise."""
    b = Fraction(b) % 1
    table = {Fraction(0): Fraction(1), Fraction(1, 4): I,
             Fraction(1, 2): Fraction(-1), Fraction(3, 4): -I}
    if b not in table:
        raise ValueError(f"phase exp(2 pi i * {b}) is not a Gaussian rational")
    return table[b]
