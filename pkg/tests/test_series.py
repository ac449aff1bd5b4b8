"""Series-layer tests: arithmetic against symbolic oracles, composition,
reversion, Weierstrass degrees, Newton polygons, residue operations, and
bivariate substitution."""

import random
from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings, strategies as st

from padicdyn import KValue, NotUnitError, PadicError, PrecisionError, make_ring
from padicdyn.series import (
    NewtonPolygon,
    ResidueSeries,
    Series1,
    Series2,
    compose1_into2,
    cross_subst,
    newton_polygon,
    residue_decompose,
    subst2,
)
from oracles import (
    binom_series,
    embed_fraction_series,
    frac_compose,
    frac_mul,
    frac_reversion,
    int_binom_series,
)


def series_equals_ints(s: Series1, ints: list) -> bool:
    return s.differs_at(Series1.from_coeffs(s.ring, s.D, dict(enumerate(ints))),
                        need=1) is None


# ----------------------------------------------------------------------
# ring operations
# ----------------------------------------------------------------------

def test_add_t_plus_t2(z2):
    got = Series1.identity(z2, 8) + Series1.from_coeffs(z2, 8, {2: 1})
    assert series_equals_ints(got, [0, 1, 1])


def test_mul_one_plus_t_times_one_minus_t(z2):
    got = Series1.from_coeffs(z2, 8, {0: 1, 1: 1}) * Series1.from_coeffs(z2, 8, {0: 1, 1: -1})
    assert series_equals_ints(got, [1, 0, -1])


def test_square_matches_sympy(z5):
    # (2T + T^2)^2 expanded independently
    T = sympy.symbols("T")
    expansion = sympy.Poly((2 * T + T**2) ** 2, T).all_coeffs()[::-1]
    got = Series1.from_coeffs(z5, 8, {1: 2, 2: 1}) ** 2
    assert series_equals_ints(got, [int(c) for c in expansion])


def test_mixed_degree_truncates_to_min(z2):
    a = Series1.from_coeffs(z2, 10, {1: 1, 9: 1})
    b = Series1.from_coeffs(z2, 4, {1: 1})
    assert (a + b).D == 4
    assert (a * b).D == 4


PACKED_RINGS = [
    dict(p=2, N=16),
    dict(p=3, N=24),
    dict(p=5, N=24),
    dict(p=3, unram_poly=[1, 0, 1], N=12),
    dict(p=3, eis_poly=[-3, 0, 1], N=13),
    dict(p=5, unram_poly=[2, 0, 1], eis_poly=[[-5, 0], 0, [1]], N=10),
]


@pytest.mark.parametrize("ring_args", PACKED_RINGS)
def test_packed_mul_matches_schoolbook(ring_args):
    # the packed big-integer path and the value-level loop are independent
    # routes to the same product
    ring = make_ring(**ring_args)
    rng = random.Random(42)
    for trial in range(3):
        a = Series1.from_coeffs(ring, 12, {
            i: ring.from_coords([rng.randrange(ring.pMc) for _ in range(ring.nb)])
            for i in range(13)})
        b = Series1.from_coeffs(ring, 12, {
            i: ring.from_coords([rng.randrange(ring.pMc) for _ in range(ring.nb)])
            for i in range(13)})
        assert (a * b).differs_at(a._mul_schoolbook(b), need=0) is None


# ----------------------------------------------------------------------
# composition
# ----------------------------------------------------------------------

def test_compose_identity_right(z3):
    rng = random.Random(3)
    F = Series1.from_coeffs(z3, 10, {i: rng.randrange(-9, 9) for i in range(11)})
    assert F.compose(Series1.identity(z3, 10)).differs_at(F, need=0) is None


def test_compose_self_matches_sympy(z2):
    T = sympy.symbols("T")
    inner = T + T**2
    expansion = sympy.Poly(inner.subs(T, inner).expand(), T).all_coeffs()[::-1]
    got = Series1.from_coeffs(z2, 4, {1: 1, 2: 1}).compose(
        Series1.from_coeffs(z2, 4, {1: 1, 2: 1}))
    assert series_equals_ints(got, [int(c) for c in expansion[:5]])
    assert series_equals_ints(got, [0, 1, 2, 2, 1])


def test_compose_binomial_commutes(z5):
    # [2] o [3] = [3] o [2] = [6] where [a] = (1+T)^a - 1, binomial oracle
    D = 16
    two = Series1.from_coeffs(z5, D, dict(enumerate(int_binom_series(2, D))))
    three = Series1.from_coeffs(z5, D, dict(enumerate(int_binom_series(3, D))))
    six = Series1.from_coeffs(z5, D, dict(enumerate(int_binom_series(6, D))))
    assert two.compose(three).differs_at(six) is None
    assert three.compose(two).differs_at(six) is None


def test_compose_requires_zero_constant(z2):
    F = Series1.identity(z2, 4)
    with pytest.raises(PadicError, match="g\\(0\\) = 0"):
        F.compose(Series1.from_coeffs(z2, 4, {0: 1, 1: 1}))


def test_compose_associative_random(z3):
    rng = random.Random(11)
    for _ in range(5):
        mk = lambda: Series1.from_coeffs(
            z3, 8, {i: rng.randrange(-9, 9) for i in range(1, 9)})
        F, G, H = mk(), mk(), mk()
        lhs = F.compose(G).compose(H)
        rhs = F.compose(G.compose(H))
        assert lhs.differs_at(rhs, need=0) is None


# ----------------------------------------------------------------------
# compositional inversion
# ----------------------------------------------------------------------

def test_comp_inverse_identity(z2):
    assert Series1.identity(z2, 8).comp_inverse().differs_at(
        Series1.identity(z2, 8)) is None


def test_comp_inverse_catalan(z2):
    # reversion of T + T^2: signed Catalan numbers, via the independent
    # Fraction-arithmetic reversion oracle
    D = 10
    H = Series1.from_coeffs(z2, D, {1: 1, 2: 1}).comp_inverse()
    oracle = frac_reversion([0, 1, 1], D)
    assert H.differs_at(embed_fraction_series(z2, oracle, D)) is None
    frozen = [0, 1, -1, 2, -5, 14, -42, 132, -429, 1430, -4862]
    assert series_equals_ints(H, frozen)


def test_comp_inverse_binomial_root(z5):
    # inverse of (1+T)^3 - 1 is (1+T)^(1/3) - 1; also verified by composing back
    D = 12
    F = Series1.from_coeffs(z5, D, dict(enumerate(int_binom_series(3, D))))
    H = F.comp_inverse()
    closed = embed_fraction_series(z5, binom_series(Fraction(1, 3), D), D)
    assert H.differs_at(closed) is None
    assert F.compose(H).differs_at(Series1.identity(z5, D)) is None
    assert H.compose(F).differs_at(Series1.identity(z5, D)) is None


def test_comp_inverse_nonunit_linear_is_nonintegral(z3):
    H = Series1.from_coeffs(z3, 6, {1: 3, 2: 1}).comp_inverse()
    assert H.integral is False
    assert H.coeff(1).val() == -1


def test_comp_inverse_random_roundtrip(z3):
    rng = random.Random(5)
    for _ in range(4):
        F = Series1.from_coeffs(
            z3, 10, {1: 1 + 3 * rng.randrange(9)} |
            {i: rng.randrange(-9, 9) for i in range(2, 11)})
        H = F.comp_inverse()
        assert F.compose(H).differs_at(Series1.identity(z3, 10)) is None
        assert H.compose(F).differs_at(Series1.identity(z3, 10)) is None


# ----------------------------------------------------------------------
# Weierstrass degree
# ----------------------------------------------------------------------

def test_wideg_examples(z2, z3):
    assert Series1.from_coeffs(z2, 8, {1: 2, 2: 1}).wideg() == 2
    assert Series1.identity(z2, 8).wideg() == 1
    w = Series1.one_plus_t_pow(z3, 4, 8) - Series1.identity(z3, 8)
    assert w.wideg() == 3         # = q^n(4) with n(4) = 1


def test_wideg_none_when_all_divisible(z3):
    assert Series1.from_coeffs(z3, 6, {1: 3, 2: 9}).wideg() is None


def test_wideg_rejects_non_integral(z3):
    bad = Series1.from_coeffs(z3, 4, {1: KValue.from_int(z3, 1).divide_by(z3.integer(3))})
    with pytest.raises(NotUnitError):
        bad.wideg()


def test_wideg_multiplicative_under_composition(z3):
    rng = random.Random(17)
    for _ in range(5):
        F = Series1.from_coeffs(z3, 16, {1: 3 * rng.randrange(1, 5), 2: 3, 4: 1})
        G = Series1.from_coeffs(z3, 16, {1: 3 * rng.randrange(1, 5), 3: 1})
        fg = F.compose(G)
        assert fg.wideg() == F.wideg() * G.wideg()


# ----------------------------------------------------------------------
# Newton polygons
# ----------------------------------------------------------------------

def test_polygon_two_point_hull(z3):
    poly = newton_polygon(Series1.from_coeffs(z3, 8, {1: 3, 3: 1}))
    assert poly.vertices == ((1, Fraction(1)), (3, Fraction(0)))
    assert poly.segments == ((Fraction(-1, 2), 2),)


def test_polygon_cube_minus_linear(z2):
    # (1+T)^3 - 1 - T = 2T + 3T^2 + T^3 over Z2: one root of valuation 1,
    # confirmed by solving (1+u)^3 = 1+u directly: u = -2, val(-2) = 1
    F = Series1.one_plus_t_pow(z2, 3, 8) - Series1.identity(z2, 8)
    poly = newton_polygon(F)
    assert poly.vertices == ((1, Fraction(1)), (2, Fraction(0)))
    roots = [u for u in (0, -2) if (1 + u) ** 3 == 1 + u]
    assert -2 in roots
    assert poly.roots_by_valuation() == [(Fraction(1), 1)]


def test_polygon_multiplicative_fixed_points(z3):
    F = Series1.one_plus_t_pow(z3, 4, 8) - Series1.identity(z3, 8)
    poly = newton_polygon(F)
    assert poly.vertices == ((1, Fraction(1)), (3, Fraction(0)))
    assert poly.segments[0][0] == Fraction(-1, 2)   # -1/(q-1)


def test_polygon_length_equals_wideg_minus_ord(z3, z5):
    rng = random.Random(23)
    for ring in (z3, z5):
        for _ in range(10):
            coeffs = {i: ring.p * rng.randrange(-4, 5) for i in range(1, 10)}
            coeffs[rng.randrange(2, 10)] = 1 + ring.p * rng.randrange(4)
            F = Series1.from_coeffs(ring, 10, coeffs)
            try:
                ordv, wd = F.ord(), F.wideg()
            except PadicError:
                continue
            if wd is None:
                continue
            assert newton_polygon(F).total_length == wd - ordv


def test_polygon_undecidable_coefficient_raises(z3):
    low = KValue(z3, 0, z3.integer(0).coords, 0)  # 0 with no certified digit
    F = Series1.from_coeffs(z3, 6, {1: 9, 2: low, 3: 1})
    with pytest.raises(PrecisionError, match="coefficient 2"):
        newton_polygon(F)


# ----------------------------------------------------------------------
# residue operations
# ----------------------------------------------------------------------

def test_residue_reduce_examples(z2, z3):
    assert Series1.from_coeffs(z2, 6, {1: 2, 2: 1}).residue_reduce().support() == [2]
    assert Series1.identity(z2, 6).residue_reduce().support() == [1]
    # freshman's dream: (1+T)^9 - 1 = T^9 mod 3
    assert Series1.one_plus_t_pow(z3, 9, 12).residue_reduce().support() == [9]


def test_residue_decompose_examples(z3):
    tp = ResidueSeries.t_power(z3, 3, 9)
    inner, d = residue_decompose(tp)
    assert d == 1 and inner.support() == [1]

    s = ResidueSeries.from_ints(z3, 9, {1: 1, 3: 1})
    inner, d = residue_decompose(s)
    assert d == 0 and inner.support() == [1, 3]

    # T^9 over F_3: d = 2, consistent with q = 9 for an unramified quadratic
    t9 = ResidueSeries.t_power(z3, 9, 18)
    inner, d = residue_decompose(t9)
    assert d == 2 and inner.support() == [1]


def test_residue_decompose_roundtrip(z3, z2):
    rng = random.Random(31)
    for ring in (z2, z3):
        p = ring.p
        for _ in range(10):
            d = rng.randrange(3)
            inner = {1: 1 + rng.randrange(p - 1)} | {
                k: rng.randrange(p) for k in range(2, 5)}
            fbar = ResidueSeries.from_ints(
                ring, 4 * p**d, {k * p**d: v for k, v in inner.items()})
            got_inner, got_d = residue_decompose(fbar)
            assert got_d >= d
            back = {k * p**got_d: c for k, c in enumerate(got_inner.coeffs) if not c.is_zero()}
            assert back == {k: fbar.coeffs[k] for k in fbar.support()}


def test_residue_decompose_error_case(z3):
    bad = ResidueSeries.from_ints(z3, 12, {6: 1, 9: 1})
    with pytest.raises(PadicError, match="no residue decomposition"):
        residue_decompose(bad)


# ----------------------------------------------------------------------
# bivariate substitution
# ----------------------------------------------------------------------

def test_subst2_collapse_to_one_variable(z2):
    XY = Series2.x_plus_y(z2, 8)
    T = Series1.identity(z2, 8)
    assert series_equals_ints(subst2(XY, T, T), [0, 2])


def test_subst2_identity(z2):
    G = Series2.from_coeffs(z2, 8, {(1, 0): 1, (0, 1): 1, (1, 1): 1})
    X = Series2.from_coeffs(z2, 8, {(1, 0): 1})
    Y = Series2.from_coeffs(z2, 8, {(0, 1): 1})
    assert subst2(G, X, Y).differs_at(G, need=0) is None


def test_subst2_multiplicative_closed_form(z2):
    G = Series2.from_coeffs(z2, 8, {(1, 0): 1, (0, 1): 1, (1, 1): 1})
    A = Series1.one_plus_t_pow(z2, 2, 8)
    got = subst2(G, A, A)
    assert got.differs_at(Series1.one_plus_t_pow(z2, 4, 8)) is None


def test_cross_subst_agrees_with_bivariate_subst(z3):
    rng = random.Random(41)
    G = Series2.from_coeffs(z3, 8, {(a, b): rng.randrange(-9, 9)
                                    for a in range(4) for b in range(4)
                                    if 0 < a + b <= 6})
    U = Series1.from_coeffs(z3, 8, {1: 2, 2: 1, 3: 2})
    V = Series1.from_coeffs(z3, 8, {1: 1, 2: -1})
    UX = Series2.from_coeffs(z3, 8, {(i, 0): U.coeff(i) for i in range(1, 9)})
    VY = Series2.from_coeffs(z3, 8, {(0, i): V.coeff(i) for i in range(1, 9)})
    assert cross_subst(G, U, V).differs_at(subst2(G, UX, VY), need=0) is None


def test_compose1_into2_matches_termwise(z3):
    rng = random.Random(43)
    F = Series1.from_coeffs(z3, 6, {i: rng.randrange(-9, 9) for i in range(1, 7)})
    G = Series2.from_coeffs(z3, 6, {(1, 0): 1, (0, 1): 1, (1, 1): 1})
    got = compose1_into2(F, G)
    acc = Series2.zero(z3, 6)
    power = Series2.from_coeffs(z3, 6, {(0, 0): 1})
    for k in range(1, 7):
        power = power * G
        acc = acc + power.scalar_mul(F.coeff(k))
    assert got.differs_at(acc, need=0) is None


def test_series2_literal_roundtrip(z3):
    G = Series2.from_coeffs(z3, 6, {(1, 0): 1, (0, 1): 5, (2, 3): -7})
    again = Series2.parse(z3, G.literal())
    assert again.differs_at(G, need=0) is None


def test_series1_literal_roundtrip(z5):
    F = Series1.from_coeffs(z5, 9, {1: 5, 4: -2,
                                    7: KValue.from_int(z5, 2).divide_by(z5.integer(25))})
    again = Series1.parse(z5, F.literal())
    assert again.differs_at(F, need=0) is None


# ----------------------------------------------------------------------
# properties (hypothesis)
# ----------------------------------------------------------------------

@given(st.lists(st.integers(min_value=-40, max_value=40), min_size=2, max_size=8),
       st.lists(st.integers(min_value=-40, max_value=40), min_size=2, max_size=8))
@settings(max_examples=40, deadline=None)
def test_mul_matches_fraction_oracle(a, b):
    ring = make_ring(7, N=10)
    D = 8
    fa = [Fraction(c) for c in a]
    fb = [Fraction(c) for c in b]
    want = embed_fraction_series(ring, frac_mul(fa, fb, D), D)
    got = (Series1.from_coeffs(ring, D, dict(enumerate(a)))
           * Series1.from_coeffs(ring, D, dict(enumerate(b))))
    assert got.differs_at(want, need=0) is None


@given(st.lists(st.integers(min_value=-20, max_value=20), min_size=3, max_size=7),
       st.lists(st.integers(min_value=-20, max_value=20), min_size=3, max_size=7))
@settings(max_examples=25, deadline=None)
def test_compose_matches_fraction_oracle(a, b):
    ring = make_ring(5, N=12)
    D = 6
    fa = [Fraction(c) for c in a]
    fb = [Fraction(0)] + [Fraction(c) for c in b[1:]]
    want = embed_fraction_series(ring, frac_compose(fa, fb, D), D)
    got = Series1.from_coeffs(ring, D, dict(enumerate(a))).compose(
        Series1.from_coeffs(ring, D, {i: c for i, c in enumerate(b) if i >= 1}))
    assert got.differs_at(want, need=0) is None
