"""Independent reference implementations used as test oracles.

Everything here works over exact rationals (fractions.Fraction) or plain
integers and never touches the package's arithmetic, so an agreement
between the two routes is meaningful.
"""

from fractions import Fraction
from math import comb, factorial


def frac_mul(a: list, b: list, D: int) -> list:
    out = [Fraction(0)] * (D + 1)
    for i, x in enumerate(a[: D + 1]):
        if x:
            for j, y in enumerate(b[: D + 1 - i]):
                if y:
                    out[i + j] += x * y
    return out


def frac_compose(f: list, g: list, D: int) -> list:
    """f(g(T)) for rational coefficient lists, g[0] = 0."""
    assert not g[0]
    out = [Fraction(0)] * (D + 1)
    out[0] = Fraction(f[0]) if f else Fraction(0)
    power = [Fraction(0)] * (D + 1)
    power[0] = Fraction(1)
    for k in range(1, min(len(f), D + 1)):
        power = frac_mul(power, [Fraction(c) for c in g], D)
        if f[k]:
            for d in range(D + 1):
                out[d] += Fraction(f[k]) * power[d]
    return out


def frac_reversion(f: list, D: int) -> list:
    """Compositional inverse of f = f1 T + ... with f1 != 0, by the
    triangular solve of f(h(T)) = T over Fraction."""
    f = [Fraction(c) for c in f] + [Fraction(0)] * (D + 1 - len(f))
    assert f[0] == 0 and f[1] != 0
    h = [Fraction(0)] * (D + 1)
    h[1] = 1 / f[1]
    for m in range(2, D + 1):
        val = frac_compose(f, h, m)
        h[m] = -val[m] / f[1]
    return h


def binom_series(exponent: Fraction, D: int) -> list:
    """(1+T)^exponent - 1 as rational coefficients (index 0 is 0)."""
    out = [Fraction(0)] * (D + 1)
    c = Fraction(1)
    for k in range(1, D + 1):
        c = c * (Fraction(exponent) - (k - 1)) / k
        out[k] = c
    return out


def int_binom_series(a: int, D: int) -> list:
    return [0] + [comb(a, k) if 0 <= a else _signed_comb(a, k) for k in range(1, D + 1)]


def _signed_comb(a: int, k: int) -> int:
    num = 1
    for t in range(k):
        num *= a - t
    return num // factorial(k)


def log_one_plus_t(D: int) -> list:
    return [Fraction(0)] + [Fraction((-1) ** (m + 1), m) for m in range(1, D + 1)]


def exp_minus_one(D: int) -> list:
    return [Fraction(0)] + [Fraction(1, factorial(m)) for m in range(1, D + 1)]


def teich_by_iteration(c: int, p: int, digits: int) -> int:
    """Teichmuller representative of c mod p^digits by iterating x -> x^p."""
    m = p ** digits
    x = c % m
    for _ in range(digits + 2):
        x = pow(x, p, m)
    return x


def embed_fraction(ring, fr: Fraction):
    """Embed an exact rational into K (denominator may carry powers of p)."""
    from padicdyn import KValue
    return KValue.from_int(ring, fr.numerator).divide_by(ring.integer(fr.denominator))


def embed_fraction_series(ring, coeffs: list, D: int):
    from padicdyn.series import Series1
    return Series1.from_coeffs(ring, D, {i: embed_fraction(ring, Fraction(c))
                                         for i, c in enumerate(coeffs[: D + 1])})
