"""Ring-layer tests: construction, arithmetic, valuations, units,
Teichmuller lifts, residue field, literals, and the big-integer oracle."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from padicdyn import (
    KValue,
    NotUnitError,
    OKValue,
    PrecisionError,
    RingMismatchError,
    make_ring,
    ring_from_json,
)
from oracles import teich_by_iteration


# ----------------------------------------------------------------------
# make_ring
# ----------------------------------------------------------------------

def test_make_ring_z2_base_case():
    r = make_ring(2, unram_poly=[0, 1], N=16)
    assert (r.p, r.f, r.e, r.q, r.N) == (2, 1, 1, 2, 16)
    assert r.pi() == 2


def test_make_ring_unramified_quadratic():
    r = make_ring(3, unram_poly=[1, 0, 1], N=12)
    assert r.q == 9 and r.e == 1
    x = r.from_coords([0, 1])
    assert x * x == -1


def test_make_ring_ramified_quadratic():
    r = make_ring(3, eis_poly=[-3, 0, 1], N=12)
    assert r.e == 2 and r.q == 3
    assert r.integer(3).val() == 2
    assert r.pi().val() == 1


def test_make_ring_rejects_non_eisenstein():
    with pytest.raises(ValueError, match="not Eisenstein"):
        make_ring(3, eis_poly=[-1, 0, 1])


def test_make_ring_rejects_non_prime():
    with pytest.raises(ValueError, match="not prime"):
        make_ring(6, N=4)


def test_make_ring_rejects_reducible():
    with pytest.raises(ValueError, match="reducible"):
        make_ring(3, unram_poly=[2, 0, 1], N=4)  # x^2 + 2 = (x-1)(x+1) mod 3


def test_descriptor_roundtrip(ram3):
    again = ring_from_json(ram3.to_json())
    assert again.key == ram3.key


# ----------------------------------------------------------------------
# arithmetic
# ----------------------------------------------------------------------

def test_arith_in_z3():
    r = make_ring(3, N=4)
    assert r.integer(2) + r.integer(2) == 4
    assert (r.integer(1) + 3) * (r.integer(1) - 3) == -8
    assert ((r.integer(1) + 3) * (r.integer(1) - 3)).coords[0] % 81 == 73


def test_arith_defining_relation(unram9):
    x = unram9.from_coords([0, 1])
    assert x * x + 1 == 0


def test_arith_ring_mismatch(z2, z3):
    with pytest.raises(RingMismatchError):
        z2.one() + z3.one()


# ----------------------------------------------------------------------
# valuations
# ----------------------------------------------------------------------

def test_val_examples(z3, ram3):
    assert z3.integer(6).val() == 1
    assert ram3.integer(3).val() == 2
    assert z3.integer(0).val() is None


def test_val_additivity_random(z3, ram3, unram9):
    rng = random.Random(7)
    for ring in (z3, ram3, unram9):
        for _ in range(200):
            x = ring.from_coords([rng.randrange(ring.pMc) for _ in range(ring.nb)])
            y = ring.from_coords([rng.randrange(ring.pMc) for _ in range(ring.nb)])
            vx, vy = x.val(), y.val()
            if vx is not None and vy is not None and vx + vy < ring.N:
                assert (x * y).val() == vx + vy


# ----------------------------------------------------------------------
# unit inversion
# ----------------------------------------------------------------------

def test_inv_unit_one(z5):
    assert z5.one().inv_unit() == 1


def test_inv_unit_3_mod_256():
    r = make_ring(2, N=8)
    inv = r.integer(3).inv_unit()
    assert inv * 3 == 1                   # verified by multiplication
    assert inv.coords[0] % 256 == 171


def test_inv_unit_rejects_non_unit(z2):
    with pytest.raises(NotUnitError, match="not a unit"):
        z2.integer(2).inv_unit()


def test_inv_unit_involution_random(z3, unram9, ram3):
    rng = random.Random(13)
    for ring in (z3, unram9, ram3):
        for _ in range(50):
            coords = [rng.randrange(ring.pMc) for _ in range(ring.nb)]
            coords[0] |= 1  # force a unit in the prime-to-p part
            if coords[0] % ring.p == 0:
                coords[0] += 1
            x = ring.from_coords(coords)
            if x.val() != 0:
                continue
            inv = x.inv_unit()
            assert x * inv == 1
            assert inv.inv_unit() == x


# ----------------------------------------------------------------------
# Teichmuller lifts
# ----------------------------------------------------------------------

def test_teich_trivial(z5):
    assert z5.teichmuller(z5.residue_from_int(0)) == 0
    assert z5.teichmuller(z5.residue_from_int(1)) == 1


def test_teich_5_matches_iteration_oracle():
    r = make_ring(5, N=10)
    t = r.teichmuller(r.residue_from_int(2))
    assert t.coords[0] % 25 == 7
    assert t.coords[0] % 5**10 == teich_by_iteration(2, 5, 10)


def test_teich_p2_only_unit_lift(z2):
    units = [c for c in z2.residue_elements() if not c.is_zero()]
    assert len(units) == 1
    assert z2.teichmuller(units[0]) == 1


@pytest.mark.parametrize("ring_args", [
    dict(p=2, N=10), dict(p=3, N=10), dict(p=5, N=8), dict(p=7, N=8),
    dict(p=3, unram_poly=[1, 0, 1], N=8),
    dict(p=5, unram_poly=[2, 0, 1], N=8),
    dict(p=7, unram_poly=[1, 0, 1], N=8),   # q = 49
    dict(p=2, unram_poly=[1, 1, 1], N=8),
])
def test_teich_exhaustive(ring_args):
    ring = make_ring(**ring_args)
    assert ring.q <= 49
    for c in ring.residue_elements():
        t = ring.teichmuller(c)
        assert t ** ring.q == t
        assert t.residue() == c


@given(st.integers(min_value=0, max_value=8), st.integers(min_value=0, max_value=8))
@settings(max_examples=30, deadline=None)
def test_teich_multiplicative(a, b):
    ring = make_ring(3, unram_poly=[1, 0, 1], N=8)
    elems = list(ring.residue_elements())
    ca, cb = elems[a], elems[b]
    lhs = ring.teichmuller(ca) * ring.teichmuller(cb)
    rhs = ring.teichmuller(ca * cb)
    assert lhs == rhs


# ----------------------------------------------------------------------
# residues
# ----------------------------------------------------------------------

def test_residue_examples(z3, unram9):
    assert z3.integer(7).residue() == 1
    assert z3.pi().residue() == 0
    x = unram9.from_coords([0, 1])
    assert x.residue().coords == (0, 1)


# ----------------------------------------------------------------------
# big-integer oracle (unramified case)
# ----------------------------------------------------------------------

def test_bigint_oracle_z5():
    ring = make_ring(5, N=10)
    mod = 5 ** 10
    rng = random.Random(2024)
    x, xo = ring.integer(1), 1
    for _ in range(10_000):
        n = rng.randrange(-mod, mod)
        op = rng.randrange(3)
        if op == 0:
            x, xo = x + n, (xo + n) % mod
        elif op == 1:
            x, xo = x - n, (xo - n) % mod
        else:
            x, xo = x * n, (xo * n) % mod
        assert x.coords[0] % mod == xo % mod
    assert x.prec == 10


# ----------------------------------------------------------------------
# precision semantics
# ----------------------------------------------------------------------

def test_equality_is_precision_aware(z3):
    x = OKValue(z3, z3.integer(5).coords, 2)      # 5 known mod pi^2
    y = z3.integer(5 + 9)                          # agrees mod 9 = pi^2
    assert x == y
    z = z3.integer(5 + 3)                          # differs at pi^1 < 2
    assert x != z


def test_eq_exact_demands_precision(z3):
    x = OKValue(z3, z3.integer(5).coords, 2)
    with pytest.raises(PrecisionError):
        x.eq_exact(z3.integer(5), need=10)
    assert x.eq_exact(z3.integer(5), need=2) is True
    assert x.eq_exact(z3.integer(6), need=2) is False


def test_val_reports_sentinel_at_low_precision(z3):
    x = OKValue(z3, z3.integer(9).coords, 2)   # val would be 2 = prec
    assert x.val() is None
    assert x.vlb() == 2


def test_exact_div_pi_costs_one_digit(ram3):
    x = ram3.integer(3)
    q = x.exact_div_pi(2)
    assert q.val() == 0 and q.prec == ram3.N - 2
    assert q.pi_mul(2) == x


def test_kvalue_divide(z2):
    h = KValue.from_int(z2, 1).divide_by(z2.integer(2))
    assert h.shift == -1 and h.val() == -1
    assert h * 2 == 1
    # worst case: the divisor 2 is itself only known mod pi^N
    assert h.prec == z2.N - 2
    with pytest.raises(PrecisionError):
        KValue.from_int(z2, 1).divide_by(z2.integer(0))


def test_kvalue_integral_verdict(z3):
    third = KValue.from_int(z3, 1).divide_by(z3.integer(3))
    assert third.integral_verdict() is False
    assert KValue.from_int(z3, 6).integral_verdict() is True
    assert (third * 3).integral_verdict() is True


def test_element_literal_roundtrip(unram9, ram3, z5):
    rng = random.Random(5)
    for ring in (unram9, ram3, z5):
        for _ in range(20):
            x = ring.from_coords([rng.randrange(ring.pMc) for _ in range(ring.nb)])
            assert ring.parse_element(ring.element_literal(x)).coords == x.coords
        assert ring.parse_element("-7") == ring.integer(-7)
    assert z5.parse_element("7") == z5.integer(7)      # digit 7 >= 5: integer
    assert z5.parse_element("12") == z5.integer(1 + 2 * 5)  # valid digits: literal
