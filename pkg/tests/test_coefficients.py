import itertools
import random
from fractions import Fraction as Q

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from versal.coefficients import (
    I, ConeMonoid, LambdaPoint, NovikovElement, cone_completion, format_scalar, gaussian,
    is_strongly_convex, lambda_point_specialize, large_volume_specialize, make_local_ring,
    novikov_valuation, parse_scalar, phase, series_invert, series_mul, toric_binomials,
)
from versal.coefficients.rings import RingMap, identity_map
from versal.errors import (BadTruncation, IrrationalPhase, NonPositiveArea, NotAUnit,
                           NotStronglyConvex, RelationHasUnit, RingMismatch)

from helpers import lp_contains_line


# field

def test_gaussian_arithmetic_is_exact():
    z = gaussian(Q(1, 2), Q(-3, 4))
    assert z * z.conjugate() == Q(1, 4) + Q(9, 16)
    assert (z / z) == 1
    assert I * I == -1
    assert gaussian(Q(2, 4), 0) == Q(1, 2)


@pytest.mark.parametrize("text", ["3", "-1/2", "1/2+3/4i", "-i", "2i", "5/3-i"])
def test_scalar_text_round_trip(text):
    assert format_scalar(parse_scalar(text)) == text


def test_phase_table():
    assert [phase(Q(k, 4)) for k in range(4)] == [1, I, -1, -I]
    assert phase(Q(5, 4)) == I
    with pytest.raises(ValueError):
        phase(Q(1, 3))


# local rings

def test_make_local_ring_examples():
    R = make_local_ring({"x": 1}, [], 8)
    x, = R.gens()
    assert x ** 8 and not x ** 9
    T = make_local_ring({"x": 1, "y": 1}, ["x*y"], 5)
    a, b = T.gens()
    assert not a * b
    assert series_mul(a, b) == T.zero


def test_ring_errors():
    with pytest.raises(RelationHasUnit):
        make_local_ring(["x"], ["1 + x"], 4)
    with pytest.raises(BadTruncation):
        make_local_ring(["x"], [], 0)
    R = make_local_ring(["x"], [], 3)
    S = make_local_ring(["y"], [], 3)
    with pytest.raises(RingMismatch):
        R.gen("x") + S.gen("y")
    with pytest.raises(NotAUnit):
        series_invert(R.gen("x"))


def test_series_products_and_inverses():
    R = make_local_ring(["x"], [], 2)
    x, = R.gens()
    assert (1 + x) * (1 - x) == 1 - x ** 2
    assert (1 + x) ** 4 == R.parse("1 + 4*x + 6*x^2")
    R4 = make_local_ring(["x"], [], 3)
    x, = R4.gens()
    assert series_invert(1 - x) == R4.parse("1 + x + x^2 + x^3")
    assert series_invert(R4(2)) == Q(1, 2)
    R2 = make_local_ring(["x", "y"], [], 2)
    x, y = R2.gens()
    assert series_invert(1 + x + y) == R2.parse("1 - x - y + x^2 + 2*x*y + y^2")


def test_weighted_truncation():
    R = make_local_ring([("x", 1), ("y", 2)], [], 4)
    x, y = R.gens()
    assert y * y and not y * y * x
    assert not y ** 3
    assert x ** 4 and not x ** 5


def _binomial_oracle(n, N):
    return {k: sympy.binomial(n, k) for k in range(min(n, N) + 1)}


@pytest.mark.parametrize("n,N", [(4, 2), (7, 5), (10, 10), (3, 8)])
def test_binomial_oracle(n, N):
    R = make_local_ring(["x"], [], N)
    x, = R.gens()
    p = (1 + x) ** n
    assert {e[0]: c for e, c in p.terms.items()} == _binomial_oracle(n, N)


@pytest.mark.parametrize("N", [1, 3, 6])
def test_neumann_series_oracle(N):
    # 1/(1 - u) = sum u^k with u = x + 2y, coefficients via the multinomial theorem
    R = make_local_ring(["x", "y"], [], N)
    x, y = R.gens()
    inv = series_invert(1 - x - 2 * y)
    expect = {}
    for k in range(N + 1):
        for a in range(k + 1):
            expect[(a, k - a)] = Q(sympy.binomial(k, a) * 2 ** (k - a))
    assert inv.terms == expect


def _sympy_normal_form(poly_terms, relations, N, names):
    gens = sympy.symbols(names)
    def to_expr(terms):
        return sum(sympy.Rational(c.numerator, c.denominator) * sympy.prod(g ** e for g, e in zip(gens, m))
                   for m, c in terms.items())
    high = [sympy.prod(g ** e for g, e in zip(gens, m))
            for m in itertools.product(range(N + 2), repeat=len(gens)) if sum(m) == N + 1]
    G = sympy.groebner([to_expr(r) for r in relations] + high, *gens, order="grlex", domain="QQ")
    _, rem = G.reduce(to_expr(poly_terms))
    rem = sympy.Poly(rem, *gens, domain="QQ")
    return {m: Q(int(c.p), int(c.q)) for m, c in zip(rem.monoms(), rem.coeffs()) if c}


def _random_poly(rng, nvars, deg, terms=4, constant=True):
    out = {}
    for _ in range(terms):
        m = tuple(rng.randint(0, deg) for _ in range(nvars))
        if not constant and not any(m):
            continue
        out[m] = out.get(m, 0) + Q(rng.randint(-3, 3), rng.randint(1, 2))
    return {m: c for m, c in out.items() if c}


@pytest.mark.parametrize("seed", range(12))
def test_normal_forms_match_groebner_oracle(seed):
    rng = random.Random(seed)
    N = rng.randint(2, 5)
    rels = [_random_poly(rng, 2, 3, terms=3, constant=False) for _ in range(rng.randint(1, 2))]
    rels = [r for r in rels if r]
    R = make_local_ring(["x", "y"], rels, N)
    for _ in range(5):
        p = _random_poly(rng, 2, N, terms=6)
        assert R.element(p).terms == _sympy_normal_form(p, rels, N, ["x", "y"])


@pytest.mark.parametrize("seed", range(6))
def test_products_match_groebner_oracle(seed):
    rng = random.Random(100 + seed)
    N = 4
    rels = [_random_poly(rng, 2, 2, terms=2, constant=False) or {(1, 1): Q(1)}]
    R = make_local_ring(["x", "y"], rels, N)
    p, q = _random_poly(rng, 2, 3), _random_poly(rng, 2, 3)
    prod = {}
    for (a, c), (b, d) in itertools.product(p.items(), q.items()):
        m = (a[0] + b[0], a[1] + b[1])
        prod[m] = prod.get(m, 0) + c * d
    assert (R.element(p) * R.element(q)).terms == _sympy_normal_form(prod, rels, N, ["x", "y"])


coef = st.fractions(min_value=-5, max_value=5, max_denominator=4)
RING = make_local_ring(["x", "y"], ["x^2 - x*y"], 4)
elem = st.dictionaries(st.tuples(st.integers(0, 4), st.integers(0, 4)), coef, max_size=5).map(RING.element)


@settings(max_examples=60, deadline=None)
@given(elem, elem, elem)
def test_ring_axioms(a, b, c):
    assert a * b == b * a
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == RING.zero


@settings(max_examples=60, deadline=None)
@given(elem)
def test_inverse_is_two_sided(a):
    if not a.constant():
        with pytest.raises(NotAUnit):
            series_invert(a)
        return
    b = series_invert(a)
    assert a * b == 1 and b * a == 1


@settings(max_examples=40, deadline=None)
@given(elem, elem)
def test_normal_form_is_unique(a, b):
    # equal classes have identical term maps
    rel = RING.parse("x^2 - x*y")
    assert not rel
    assert (a + b * RING.element({(2, 0): 1})).terms == (a + b * RING.element({(1, 1): 1})).terms


def test_ring_map_composition_and_well_definedness():
    R = make_local_ring(["x"], ["1/2*x^2"], 6)
    S = make_local_ring(["r"], [], 6)
    r, = S.gens()
    assert not RingMap(R, S, [r]).well_defined()
    S2 = make_local_ring(["r"], ["r^2"], 6)
    assert RingMap(R, S2, [S2.gen("r")]).well_defined()
    idm = identity_map(S)
    phi = RingMap(S, S, [r + r ** 2])
    assert phi.compose(idm) == phi
    assert phi.compose(phi).images[0] == r + 2 * r ** 2 + 2 * r ** 3 + r ** 4


# cones

@pytest.mark.parametrize("gens,expect", [
    ([(1, 0), (0, 1)], True),
    ([(1, 0), (-1, 0)], False),
    ([(1, 0), (1, 1), (1, 2)], True),
])
def test_strong_convexity_examples(gens, expect):
    assert is_strongly_convex(ConeMonoid(gens)) is expect
    assert lp_contains_line(gens) is not expect


def test_strong_convexity_matches_lp_on_random_cones():
    rng = random.Random(7)
    for _ in range(40):
        n = rng.randint(1, 3)
        gens = [tuple(rng.randint(-2, 2) for _ in range(n)) for _ in range(rng.randint(1, 5))]
        assert is_strongly_convex(ConeMonoid(gens)) is not lp_contains_line(gens), gens


def _sympy_toric_ideal(gens, names):
    xs = sympy.symbols(names)
    n = len(gens[0])
    ts = sympy.symbols(f"t0:{n}")
    ss = sympy.symbols(f"s0:{n}")
    eqs = [t * s - 1 for t, s in zip(ts, ss)]
    for x, g in zip(xs, gens):
        mono = sympy.prod((t if a > 0 else s) ** abs(a) for t, s, a in zip(ts, ss, g))
        eqs.append(x - mono)
    G = sympy.groebner(eqs, *ts, *ss, *xs, order="lex")
    return [p for p in G.exprs if not (p.free_symbols & (set(ts) | set(ss)))], xs


@pytest.mark.parametrize("gens", [
    [(1, 0), (1, 1), (1, 2)],
    [(1,), (2,), (3,)],
    [(1, 0), (0, 1), (1, 1)],
    [(2, 0), (1, 1), (0, 2)],
    [(1, 0, 0), (0, 1, 0), (1, 0, 1), (0, 1, 1)],
])
def test_toric_relations_match_elimination_oracle(gens):
    N = 4
    names = [f"a{i}" for i in range(len(gens))]
    c = ConeMonoid(gens, names=names)
    R = cone_completion(c, N)
    ideal, xs = _sympy_toric_ideal(gens, names)
    # same ideal modulo degree > N: each side's generators reduce to zero in the other
    for p in ideal:
        poly = sympy.Poly(p, *xs)
        terms = {m: Q(int(k.p), int(k.q)) for m, k in zip(poly.monoms(), poly.coeffs())}
        assert not R.element(terms), p
    for rel in toric_binomials(c, N):
        assert _reduces_in(rel, ideal, xs, N)


def _reduces_in(terms, ideal, xs, N):
    high = [sympy.prod(g ** e for g, e in zip(xs, m))
            for m in itertools.product(range(N + 2), repeat=len(xs)) if sum(m) == N + 1]
    G = sympy.groebner(list(ideal) + high, *xs, order="grlex")
    expr = sum(sympy.Rational(c.numerator, c.denominator) * sympy.prod(g ** e for g, e in zip(xs, m))
               for m, c in terms.items())
    return G.reduce(expr)[1] == 0


def test_cone_completion_examples():
    R = cone_completion(ConeMonoid([(1,)]), 5)
    assert not R.has_relations and R.ngens == 1
    Q2 = cone_completion(ConeMonoid([(1, 0), (1, 1), (1, 2)], names=["a", "b", "c"]), 6)
    assert [str(Q2.element(r)) for r in Q2.relations] == ["0"]
    a, b, c = Q2.gens()
    assert a * c == b * b
    assert not cone_completion(ConeMonoid([(1, 0), (0, 1)]), 4).has_relations
    with pytest.raises(NotStronglyConvex):
        cone_completion(ConeMonoid([(1, 0), (-1, 0)]), 4)


def test_inequality_presentation_is_checked():
    ConeMonoid([(1, 0), (1, 1)], inequalities=[(1, 0), (0, 1)])
    with pytest.raises(ValueError):
        ConeMonoid([(1, -1)], inequalities=[(0, 1)])


# Novikov elements and specialization

def test_novikov_valuation_examples():
    assert novikov_valuation(NovikovElement({3: 1, 5: -2})) == 3
    assert novikov_valuation(NovikovElement()) == float("inf")
    x = NovikovElement({1: 1, 2: 1}) * NovikovElement({Q(1, 2): 1})
    assert novikov_valuation(x) == Q(3, 2)


def test_novikov_precision_propagates():
    # q + O(q^5) has relative precision 4, so its sixth power is q^6 + O(q^10)
    x = NovikovElement({1: 1}, cutoff=5)
    y = x ** 6
    assert y.terms == {6: 1} and y.cutoff == 10
    z = NovikovElement({0: 1, 1: 1}, cutoff=3) ** 2
    assert z.terms == {0: 1, 1: 2, 2: 1} and z.cutoff == 3


@settings(max_examples=80, deadline=None)
@given(st.dictionaries(st.fractions(0, 4, max_denominator=3), coef, max_size=4),
       st.dictionaries(st.fractions(0, 4, max_denominator=3), coef, max_size=4))
def test_valuation_is_additive(a, b):
    x, y = NovikovElement(a, cutoff=20), NovikovElement(b, cutoff=20)
    if x and y:
        assert novikov_valuation(x * y) == novikov_valuation(x) + novikov_valuation(y)


def _line_point(omega, b=0):
    c = ConeMonoid([(1,)], names=["u"])
    return c, LambdaPoint(c, {"u": omega}, {"u": b})


def test_specialize_examples():
    c, p = _line_point(3)
    R = cone_completion(c, 8)
    assert lambda_point_specialize(R.gen("u"), p, 10).terms == {3: 1}
    c, p = _line_point(1, Q(1, 2))
    R = cone_completion(c, 8)
    assert lambda_point_specialize(R.gen("u"), p, 10).terms == {1: -1}
    c = ConeMonoid([(1, 0), (0, 1)], names=["u", "v"])
    p = LambdaPoint(c, {"u": 1, "v": Q(3, 2)})
    R = cone_completion(c, 8)
    u, v = R.gens()
    assert lambda_point_specialize((u + v) ** 2, p, 10).terms == {2: 1, Q(5, 2): 2, 3: 1}


def test_specialize_errors():
    c = ConeMonoid([(1,)], names=["u"])
    with pytest.raises(NonPositiveArea):
        LambdaPoint(c, {"u": 0})
    with pytest.raises(IrrationalPhase):
        LambdaPoint(c, {"u": 1}, {"u": Q(1, 3)})
    quad = ConeMonoid([(1, 0), (1, 1), (1, 2)])
    with pytest.raises(ValueError):
        LambdaPoint(quad, [1, 1, 2])   # not linear: omega(a) + omega(c) != 2 omega(b)


def test_large_volume_examples():
    c = ConeMonoid([(1, 0), (0, 1)], names=["u", "v"])
    R = cone_completion(c, 6)
    u, v = R.gens()
    assert large_volume_specialize(5 + 2 * u) == 5
    assert large_volume_specialize(u * v) == 0
    assert large_volume_specialize((1 + u) ** 3) == 1


def test_gaussian_coefficients_in_rings():
    R = make_local_ring(["x"], [], 3)
    x, = R.gens()
    z = (1 + I * x) * (1 - I * x)
    assert z == 1 + x ** 2
