import itertools
from fractions import Fraction as Q

import pytest

from versal.coefficients import make_local_ring
from versal.coefficients.rings import RingMap
from versal.errors import BadTruncation, KSNotSurjective, NotMaurerCartan, RingHasRelations
from versal.ainf.category import CurvedCategory, check_ainf, reduce_mod_max_ideal
from versal.ainf.functor import (CurvedFunctor, check_functor, identity_functor, reduce_functor,
                                 transport_structure)
from versal.hochschild import (DeformationFamily, HochschildCochain, cochain_basis, deformation_to_mc,
                               family_ks_map, gerstenhaber_bracket, hh_cohomology,
                               hochschild_differential, mc_equation, mc_to_deformation,
                               pullback_category, structure_cochain, versal_extension)

from helpers import fixture


def triangular():
    """Upper triangular 2x2 matrices: a = e11, b = e12, c = e22."""
    mul = {("a", "a"): {"a": 1}, ("a", "b"): {"b": 1}, ("b", "c"): {"b": 1}, ("c", "c"): {"c": 1}}
    return CurvedCategory(["L"], {("L", "L"): [("a", 0), ("b", 0), ("c", 0)]}, {2: mul})


CATEGORIES = {"point": lambda: fixture("point"), "dual-numbers": lambda: fixture("dual-numbers"),
              "two-object": lambda: fixture("two-object"), "triangular": triangular}


def random_cochain(A0, degree, rng, length=2, density=0.4):
    out = None
    for c in cochain_basis(A0, degree, length):
        if rng.random() < density:
            term = c.scale(Q(rng.randint(-3, 3), rng.randint(1, 2)))
            out = term if out is None else out + term
    return out if out is not None else HochschildCochain(A0, degree)


def sign(p, q):
    return -1 if (p.degree - 1) * (q.degree - 1) % 2 else 1


@pytest.mark.parametrize("name", sorted(CATEGORIES))
def test_differential_squares_to_zero(name, rng):
    A0 = CATEGORIES[name]()
    assert not hochschild_differential(structure_cochain(A0))
    for degree in (0, 1, 2, 3):
        for _ in range(4):
            phi = random_cochain(A0, degree, rng)
            assert not hochschild_differential(hochschild_differential(phi))


@pytest.mark.parametrize("name", sorted(CATEGORIES))
def test_bracket_antisymmetry_and_jacobi(name, rng):
    A0 = CATEGORIES[name]()
    for _ in range(6):
        p, q, r = (random_cochain(A0, rng.randint(0, 3), rng, length=rng.randint(0, 2)) for _ in range(3))
        br = gerstenhaber_bracket
        assert br(p, q) == br(q, p).scale(-sign(p, q))
        lhs = br(p, br(q, r))
        rhs = br(br(p, q), r) + br(q, br(p, r)).scale(sign(p, q))
        assert lhs.flat() == rhs.flat()


def classical_coboundary(mul, f, n, word):
    """Oracle on a degree-zero algebra: a f(..) + sum (-1)^i f(.. a_i a_i+1 ..) + (-1)^(n+1) f(..) a."""

    def m(x, y):
        out = {}
        for i, ci in x.items():
            for j, cj in y.items():
                for o, c in mul.get((i, j), {}).items():
                    out[o] = out.get(o, 0) + ci * cj * c
        return out

    def F(args):
        # multilinear extension of f over vectors
        out = {}
        for combo in itertools.product(*[list(a.items()) for a in args]):
            coef = 1
            for _, c in combo:
                coef *= c
            for o, c in f.get(tuple(k for k, _ in combo), {}).items():
                out[o] = out.get(o, 0) + coef * c
        return out

    vecs = [{a: 1} for a in word]
    total = {}

    def add(v, s):
        for k, c in v.items():
            total[k] = total.get(k, 0) + s * c

    add(m(vecs[0], F(vecs[1:])), 1)
    for i in range(n):
        add(F(vecs[:i] + [m(vecs[i], vecs[i + 1])] + vecs[i + 2:]), (-1) ** (i + 1))
    add(m(F(vecs[:-1]), vecs[-1]), (-1) ** (n + 1))
    return {k: v for k, v in total.items() if v}


@pytest.mark.parametrize("name", ["dual-numbers", "triangular"])
@pytest.mark.parametrize("n", [1, 2, 3])
def test_differential_matches_classical_coboundary(name, n):
    # the shifted sign convention differs from the classical one by (-1)^(n+1)
    A0 = CATEGORIES[name]()
    mul = A0.ops[2]
    for f in cochain_basis(A0, n, n):
        if n not in f.ops:
            continue
        df = hochschild_differential(f)
        for word in itertools.product(A0.deg, repeat=n + 1):
            got = df.ops.get(n + 1, {}).get(word, {})
            want = classical_coboundary(mul, f.ops[n], n, word)
            assert got == {k: (-1) ** (n + 1) * v for k, v in want.items()}


def test_length_zero_differential_on_point():
    # d(c)(1) = 1*c - c*1 = 0 for every length-zero cochain on the point
    A0 = fixture("point")
    for c in cochain_basis(A0, 0, 0):
        assert not hochschild_differential(c)


@pytest.mark.parametrize("name,dims", [
    ("point", [1, 0, 0, 0]),
    ("dual-numbers", [2, 1, 1, 1]),
    ("two-object", [4, 2, 2, 2]),
    ("triangular", [1, 0, 0, 0]),
])
def test_hochschild_cohomology(name, dims):
    A0 = CATEGORIES[name]()
    assert [hh_cohomology(A0, d, 4).dimension for d in range(4)] == dims


@pytest.mark.parametrize("name,dims", [
    ("point", [0, 0, 0, 0]),
    ("dual-numbers", [0, 1, 1, 1]),
    ("two-object", [0, 2, 2, 2]),
])
def test_complex_without_length_zero(name, dims):
    A0 = CATEGORIES[name]()
    for degree in range(4):
        for c in cochain_basis(A0, degree, 4, min_length=1):
            assert not hochschild_differential(c, 4).curvature
    res = [hh_cohomology(A0, d, 4, without_length_zero=True) for d in range(4)]
    assert [h.dimension for h in res] == dims
    assert all(h.to_dict()["without_length_zero"] for h in res)


def test_epsilon_class():
    D = fixture("dual-numbers")
    hh = hh_cohomology(D, 2, 4)
    eps = fixture("cochain-epsilon")
    assert not hochschild_differential(eps)
    assert hh.class_of(eps) == {0: 1}
    for c in cochain_basis(D, 1, 3):
        assert hh.class_of(hochschild_differential(c, 4)) == {}
        assert hh.class_of(eps + hochschild_differential(c, 4)) == {0: 1}


def test_two_points_have_no_deformations():
    P = CurvedCategory(["X", "Y"], {("X", "X"): [("1X", 0)], ("Y", "Y"): [("1Y", 0)]},
                       {2: {("1X", "1X"): {"1X": 1}, ("1Y", "1Y"): {"1Y": 1}}})
    assert hh_cohomology(P, 2, 4).dimension == 0


def test_deformation_round_trip():
    for name in ("dual-numbers-deformed", "dual-numbers-reparam"):
        A = fixture(name)
        D = DeformationFamily(A.ring, A, reduce_mod_max_ideal(A))
        alpha = deformation_to_mc(D)
        assert not mc_equation(alpha)
        assert mc_to_deformation(alpha) == D
    alpha = fixture("cochain-deformation")
    assert deformation_to_mc(mc_to_deformation(alpha)) == alpha


def test_not_maurer_cartan():
    D = fixture("dual-numbers")
    R = make_local_ring(["t"], [], 4)
    t = R.gen("t")
    bad = HochschildCochain(D, 2, {2: {("e", "1"): {"e": t}}}, ring=R)
    with pytest.raises(NotMaurerCartan) as err:
        mc_to_deformation(bad)
    assert err.value.residual


def dual_family(coef, R):
    ops = {("1", "1"): {"1": 1}, ("1", "e"): {"e": 1}, ("e", "1"): {"e": 1}, ("e", "e"): {"1": coef}}
    A = CurvedCategory(["L"], {("L", "L"): [("1", 0), ("e", 0)]}, {2: ops}, ring=R)
    return DeformationFamily(R, A, fixture("dual-numbers"))


def two_family(c1, c2, R):
    homs = {("P", "P"): [("1P", 0), ("e1", 0)], ("Q", "Q"): [("1Q", 0), ("e2", 0)]}
    ops = {}
    for u, e, c in (("1P", "e1", c1), ("1Q", "e2", c2)):
        ops.update({(u, u): {u: 1}, (u, e): {e: 1}, (e, u): {e: 1}, (e, e): {u: c}})
    return DeformationFamily(R, CurvedCategory(["P", "Q"], homs, {2: ops}, ring=R), fixture("two-object"))


def test_ks_ranks():
    R = make_local_ring(["t"], [], 6)
    t, = R.gens()
    R2 = make_local_ring(["t1", "t2"], [], 6)
    t1, t2 = R2.gens()
    assert family_ks_map(dual_family(t ** 2, R)).rank == 0
    ks = family_ks_map(dual_family(t, R))
    assert (ks.rank, ks.surjective, ks.injective) == (1, True, True)
    ks = family_ks_map(dual_family(t1 + t2, R2))
    assert (ks.rank, ks.surjective, ks.injective) == (1, True, False)
    ks = family_ks_map(two_family(t1, t2, R2))
    assert (ks.rank, ks.hh_dimension, ks.surjective) == (2, 2, True)
    ks = family_ks_map(two_family(t1, t1, R2))
    assert (ks.rank, ks.surjective) == (1, False)


def test_ks_rejects_ring_with_relations():
    R = make_local_ring(["t"], ["t^2"], 4)
    with pytest.raises(RingHasRelations):
        family_ks_map(dual_family(R.gen("t"), R))


def test_gauge_related_deformations():
    # a functor identity modulo m moves the MC element within its first-order class
    R = make_local_ring(["t"], [], 5)
    t, = R.gens()
    D = dual_family(t, R)
    comps = {1: {("1",): {"1": 1}, ("e",): {"e": 1 + t, "1": t}}}
    F = CurvedFunctor(D.total, D.total, {"L": "L"}, comps)
    A2, F2 = transport_structure(D.total, F, arity_cap=4)
    assert check_ainf(A2, 4).verdict == "pass" and check_functor(F2, 4).verdict == "pass"
    assert reduce_functor(F2).components == identity_functor(D.reduction).components
    D2 = DeformationFamily(R, A2, D.reduction)
    a1, a2 = deformation_to_mc(D), deformation_to_mc(D2)
    assert not mc_equation(a2)
    hh = hh_cohomology(D.reduction, 2, 4)

    def first_order(alpha):
        return HochschildCochain(D.reduction, 2, {s: {k: {o: c.terms.get((1,), 0) for o, c in v.items()}
                                                     for k, v in tab.items()}
                                                 for s, tab in alpha.components().items() if s})

    assert hh.class_of(first_order(a1)) == hh.class_of(first_order(a2))
    assert first_order(a1) != first_order(a2)


def test_versal_extension_identity():
    A = fixture("dual-numbers-deformed")
    D = DeformationFamily(A.ring, A, fixture("dual-numbers"))
    ve = versal_extension(D, A, identity_functor(fixture("dual-numbers")))
    assert ve.report.verdict == "pass"
    assert ve.psi.images[0] == A.ring.gen("t")


def test_versal_extension_reparametrization():
    A = fixture("dual-numbers-reparam")
    U = fixture("dual-numbers-deformed")
    D = DeformationFamily(U.ring, U, fixture("dual-numbers"))
    ve = versal_extension(D, A, identity_functor(fixture("dual-numbers")), order=6)
    s = A.ring.gen("s")
    assert ve.psi.images[0] == s ** 2 + s ** 3
    assert ve.report.verdict == "pass"
    assert ve.report.data["ks_rank"] == 1
    assert check_functor(ve.functor, 4).verdict == "pass"


def two_parameter_setup():
    R = make_local_ring(["t1", "t2"], [], 6)
    t1, t2 = R.gens()
    B = two_family(t1, t2, R)
    S = make_local_ring(["s1", "s2"], [], 6)
    s1, s2 = S.gens()
    rho = RingMap(R, S, [s1 + s2 ** 2, s2 + s1 ** 2])
    return B, S, rho


def agree_mod_m2(x, y):
    return all(sum(m) >= 2 or not c for m, c in (x - y).terms.items())


def test_versal_extension_recovers_planted_map():
    B, S, rho = two_parameter_setup()
    A = pullback_category(B.total, rho)
    ve = versal_extension(B, A, identity_functor(B.reduction))
    assert ve.report.verdict == "pass" and not ve.report.findings
    assert ve.psi.images == rho.images


def test_versal_extension_after_conjugation():
    B, S, rho = two_parameter_setup()
    s1, s2 = S.gens()
    A = pullback_category(B.total, rho)
    ident = {(a,): {a: 1} for a in A.deg}
    g = CurvedFunctor(A, A, {"P": "P", "Q": "Q"},
                      {1: {**ident, ("e1",): {"e1": 1 + s2, "1P": s1}}})
    A2, _ = transport_structure(A, g, arity_cap=4)
    assert check_ainf(A2, 4).verdict == "pass"
    ve = versal_extension(B, A2, identity_functor(B.reduction))
    assert ve.report.verdict == "pass" and not ve.report.findings
    for got, want in zip(ve.psi.images, rho.images):
        assert agree_mod_m2(got, want)


def test_versal_extension_errors():
    D0 = fixture("dual-numbers")
    R = make_local_ring(["t"], [], 6)
    t, = R.gens()
    A = fixture("dual-numbers-reparam")
    with pytest.raises(KSNotSurjective):
        versal_extension(dual_family(t ** 2, R), A, identity_functor(D0), order=6)
    Rr = make_local_ring(["t"], ["t^3"], 6)
    with pytest.raises(RingHasRelations):
        versal_extension(dual_family(Rr.gen("t"), Rr), A, identity_functor(D0), order=6)
    short = make_local_ring(["t"], [], 3)
    with pytest.raises(BadTruncation):
        versal_extension(dual_family(short.gen("t"), short), A, identity_functor(D0))
