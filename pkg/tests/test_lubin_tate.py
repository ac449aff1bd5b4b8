"""Lubin-Tate layer tests: series recognition, the inductive group-law and
endomorphism constructions, logarithm/exponential, recovery from a
logarithm, and endomorphism checking."""

import random
from fractions import Fraction

import pytest

from padicdyn import KValue, PadicError, PrecisionError, make_ring
from padicdyn.series import Series1, Series2, compose1_into2, cross_subst, subst2
from padicdyn.lubin_tate import (
    GroupLaw,
    LogSeries,
    LTSeries,
    endo_check,
    formal_exp,
    formal_log,
    group_from_log,
    is_lt_series,
    lt_endo,
    lt_group_law,
    solve_from_log,
)
from oracles import (
    binom_series,
    embed_fraction,
    embed_fraction_series,
    exp_minus_one,
    int_binom_series,
    log_one_plus_t,
)


def xy_law(ring, D):
    return Series2.from_coeffs(ring, D, {(1, 0): 1, (0, 1): 1, (1, 1): 1})


# ----------------------------------------------------------------------
# is_lt_series
# ----------------------------------------------------------------------

def test_is_lt_2t_plus_t2(z2):
    assert bool(is_lt_series(Series1.from_coeffs(z2, 12, {1: 2, 2: 1})))


@pytest.mark.parametrize("p", [2, 3, 5])
def test_is_lt_multiplicative(p):
    # binomial coefficients C(p,k) are divisible by p for 0 < k < p
    ring = make_ring(p, N=16)
    f = Series1.from_coeffs(ring, 12, dict(enumerate(int_binom_series(p, 12))))
    assert bool(is_lt_series(f))


def test_is_lt_rejects_wrong_residue(z2):
    diag = is_lt_series(Series1.from_coeffs(z2, 12, {1: 2, 3: 1}))
    assert not diag and diag.index == 2


def test_is_lt_rejects_wrong_linear(z3):
    diag = is_lt_series(Series1.from_coeffs(z3, 12, {1: 9, 3: 1}))
    assert not diag and diag.index == 1


# ----------------------------------------------------------------------
# group law construction
# ----------------------------------------------------------------------

def test_group_law_multiplicative_closed_form(z2):
    law = lt_group_law(LTSeries.multiplicative(z2, 20))
    assert law.G.differs_at(xy_law(z2, 20)) is None


def test_group_law_linear_part_forced(z3, ram3):
    for ring in (z3, ram3):
        law = lt_group_law(LTSeries.standard(ring, 12))
        assert law.G.coeff(1, 0) == 1
        assert law.G.coeff(0, 1) == 1


def test_group_law_substitution_check_is_independent(z3):
    # the defining property f(G) = G(f(X), f(Y)) verified by a fresh
    # substitution, not by the construction loop
    D = 20
    lt = LTSeries.standard(z3, D)
    law = lt_group_law(lt, verify=False)
    lhs = compose1_into2(lt.f, law.G)
    rhs = cross_subst(law.G, lt.f, lt.f)
    assert lhs.differs_at(rhs) is None


def test_group_law_axioms(z3, z5, ram3, unram9):
    for ring in (z3, z5, ram3, unram9):
        law = lt_group_law(LTSeries.standard(ring, 14))
        ax = law.check_axioms()
        assert ax == {"neutral": True, "commutative": True, "associative": True}


def test_group_law_refuses_non_lt_input(z3):
    with pytest.raises(PadicError, match="not a Lubin-Tate series"):
        lt_group_law(Series1.from_coeffs(z3, 10, {1: 3, 2: 1}))


def test_group_law_precision_budget():
    ring = make_ring(2, N=4)
    with pytest.raises(PrecisionError, match="budget"):
        lt_group_law(LTSeries.multiplicative(ring, 32))


# ----------------------------------------------------------------------
# endomorphisms
# ----------------------------------------------------------------------

def test_endo_identity(z3):
    lt = LTSeries.standard(z3, 16)
    assert lt_endo(1, lt).differs_at(Series1.identity(z3, 16)) is None


def test_endo_pi_is_f(z3, z5):
    for ring in (z3, z5):
        lt = LTSeries.standard(ring, 16)
        assert lt_endo(ring.pi(), lt).differs_at(lt.f) is None


def test_endo_minus_one_geometric(z2):
    # on (1+T)^2 - 1 the inverse endomorphism is (1+T)^(-1) - 1
    D = 16
    lt = LTSeries.multiplicative(z2, D)
    got = lt_endo(-1, lt)
    geo = Series1.from_coeffs(z2, D, {i: (-1) ** i for i in range(1, D + 1)})
    assert got.differs_at(geo) is None


def test_endo_ring_homomorphism_random(z3, ram3):
    rng = random.Random(99)
    for ring in (z3, ram3):
        D = 12
        lt = LTSeries.standard(ring, D)
        law = lt_group_law(lt)
        for _ in range(3):
            a, b = rng.randrange(-9, 9), rng.randrange(-9, 9)
            ea, eb = lt_endo(a, lt), lt_endo(b, lt)
            assert ea.compose(eb).differs_at(lt_endo(a * b, lt)) is None
            assert subst2(law.G, ea, eb).differs_at(lt_endo(a + b, lt)) is None


def test_endo_cross_series(z3):
    # f o [a]_{f,g} = [a]_{f,g} o g for distinct Lubin-Tate series
    D = 14
    f = LTSeries.standard(z3, D)
    g = LTSeries(Series1.from_coeffs(z3, D, {1: 3, 2: 3, 3: 1}))
    phi = lt_endo(2, f, g)
    assert f.f.compose(phi).differs_at(phi.compose(g.f)) is None


# ----------------------------------------------------------------------
# logarithm / exponential
# ----------------------------------------------------------------------

def test_formal_log_additive_law(z3):
    law = GroupLaw(Series2.x_plus_y(z3, 10))
    lg = formal_log(law)
    assert lg.L.differs_at(Series1.identity(z3, 10)) is None


def test_formal_log_multiplicative_is_log(z2):
    D = 20
    law = lt_group_law(LTSeries.multiplicative(z2, D))
    lg = formal_log(law)
    want = embed_fraction_series(z2, log_one_plus_t(D), D)
    assert lg.L.differs_at(want) is None


def test_formal_log_linearizes_addition(z3):
    # L(G(X,Y)) = L(X) + L(Y), checked by substitution
    D = 14
    law = lt_group_law(LTSeries.standard(z3, D))
    lg = formal_log(law)
    lhs = compose1_into2(lg.L, law.G)
    rhs = Series2.from_coeffs(z3, D, {(m, 0): lg.L.coeff(m) for m in range(1, D + 1)}
                              | {(0, m): lg.L.coeff(m) for m in range(1, D + 1)})
    assert lhs.differs_at(rhs) is None


def test_formal_exp_identity(z2):
    lg = LogSeries(Series1.identity(z2, 8), [0] * 9)
    assert formal_exp(lg).differs_at(Series1.identity(z2, 8)) is None


def test_formal_exp_is_exponential(z5):
    D = 12
    law = lt_group_law(LTSeries.multiplicative(z5, D))
    lg = formal_log(law)
    E = formal_exp(lg)
    want = embed_fraction_series(z5, exp_minus_one(D), D)
    assert E.differs_at(want) is None
    assert lg.L.compose(E).differs_at(Series1.identity(z5, D)) is None
    assert E.compose(lg.L).differs_at(Series1.identity(z5, D)) is None


def test_formal_exp_roundtrip_random():
    # denominators stack through the inverse, so give the check headroom
    ring = make_ring(5, N=44)
    rng = random.Random(7)
    D = 10
    for _ in range(3):
        coeffs = {1: 1} | {m: embed_fraction(ring, Fraction(rng.randrange(-20, 20), 5))
                           for m in range(2, D + 1)}
        L = Series1.from_coeffs(ring, D, coeffs)
        lg = LogSeries(L, [0, 0] + [1] * (D - 1))
        E = formal_exp(lg)
        assert L.compose(E).differs_at(Series1.identity(ring, D)) is None


# ----------------------------------------------------------------------
# group from log
# ----------------------------------------------------------------------

def test_group_from_log_additive(z3):
    lg = LogSeries(Series1.identity(z3, 8), [0] * 9)
    law, verdict, wit = group_from_log(lg)
    assert verdict == "integral"
    assert law.G.differs_at(Series2.x_plus_y(z3, 8)) is None


def test_group_from_log_multiplicative(z2):
    D = 16
    want = embed_fraction_series(z2, log_one_plus_t(D), D)
    lg = LogSeries(want, [0, 0] + [z2.e * _v2(m) for m in range(2, D + 1)])
    law, verdict, wit = group_from_log(lg)
    assert verdict == "integral"
    assert law.G.differs_at(xy_law(z2, D)) is None


def _v2(m):
    v = 0
    while m % 2 == 0:
        m //= 2
        v += 1
    return v


@pytest.mark.parametrize("p", [3, 5])
def test_group_from_log_reports_nonintegral(p):
    # L = T + T^2/p^2: the XY coefficient of G is -2/p^2, negative valuation
    ring = make_ring(p, N=20)
    L = Series1.from_coeffs(ring, 8, {
        1: 1, 2: KValue.from_int(ring, 1).divide_by(ring.integer(p * p))})
    law, verdict, wit = group_from_log(LogSeries(L, [0, 0, 2] + [0] * 6))
    assert verdict == "non-integral"
    assert wit == (1, 1)
    want = embed_fraction(ring, Fraction(-2, p * p))
    assert law.G.coeff(1, 1) == want


def test_group_from_log_inverts_formal_log(z3, ram3):
    for ring in (z3, ram3):
        law = lt_group_law(LTSeries.standard(ring, 12))
        lg = formal_log(law)
        law2, verdict, _ = group_from_log(lg)
        assert verdict == "integral"
        assert law2.G.differs_at(law.G) is None


def test_solve_from_log_reproduces_endomorphisms(z3):
    D = 12
    lt = LTSeries.standard(z3, D)
    law = lt_group_law(lt)
    lg = formal_log(law)
    for a in (2, -1, 4):
        got = solve_from_log(lg, lg.L.scalar_mul(z3.integer(a)))
        assert got.differs_at(lt_endo(a, lt)) is None


def test_log_linearizes_every_endomorphism(z3):
    # L o [a] = a L
    D = 12
    lt = LTSeries.standard(z3, D)
    lg = formal_log(lt_group_law(lt))
    for a in (2, 4, -1, 3):
        lhs = lg.L.compose(lt_endo(a, lt))
        assert lhs.differs_at(lg.L.scalar_mul(z3.integer(a))) is None


# ----------------------------------------------------------------------
# endomorphism checking
# ----------------------------------------------------------------------

def test_endo_check_identity(z2):
    law = GroupLaw(xy_law(z2, 10))
    ok, wit = endo_check(Series1.identity(z2, 10), law)
    assert ok and wit is None


def test_endo_check_multiplicative_closed_form(z2):
    law = GroupLaw(xy_law(z2, 12))
    ok, _ = endo_check(Series1.one_plus_t_pow(z2, 3, 12), law)
    assert ok


def test_endo_check_failure_witness(z2):
    law = GroupLaw(xy_law(z2, 12))
    ok, wit = endo_check(Series1.from_coeffs(z2, 12, {1: 1, 2: 1}), law)
    assert not ok
    assert sum(wit) == 2    # first failure at total degree 2


def test_log_denominator_invariant_enforced(z3):
    bad = Series1.from_coeffs(z3, 4, {1: 1, 2: KValue.from_int(z3, 1).divide_by(z3.integer(3))})
    with pytest.raises(PadicError, match="denominator bound"):
        LogSeries(bad, [0, 0, 0, 0, 0])
