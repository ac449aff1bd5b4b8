"""Fixed-precision arithmetic in finite extensions of Q_p.

A ring handle (:class:`RingSpec`) presents O_K as a two-stage tower: an
unramified layer Z_p[x]/(u(x)) with u irreducible mod p of degree f, then
a totally ramified layer adjoining a root pi of an Eisenstein polynomial
E(y) of degree e over the unramified layer.  Elements are coordinate
vectors on the monomial basis x^i * pi^j (0 <= i < f, 0 <= j < e), each
coordinate an integer kept exactly modulo p^Mc for a fixed Mc with
e*Mc >= N, so the vector pins the element down modulo pi^N.

The valuation is normalized by val(pi) = 1, hence val(p) = e, and on a
coordinate vector it is computed exactly:

    val(sum a_ij x^i pi^j) = min over nonzero a_ij of e*val_p(a_ij) + j

because the basis directions have pairwise distinct valuations mod e.

Every value carries a guaranteed absolute precision ``prec`` (pi-digits,
never above N): stored coordinates agree with the mathematically exact
value modulo pi^prec.  Operations propagate worst-case precision floors
and raise :class:`PrecisionError` rather than guess when a verdict needs
more digits than are guaranteed.
"""

from __future__ import annotations

import json
from typing import Iterator, Sequence

__all__ = [
    "PadicError",
    "RingMismatchError",
    "PrecisionError",
    "NotUnitError",
    "RingSpec",
    "ResidueValue",
    "OKValue",
    "KValue",
    "make_ring",
    "ring_from_descriptor",
    "ring_from_json",
]


class PadicError(Exception):
    """Base class for all arithmetic-layer errors."""


class RingMismatchError(PadicError):
    """Operands belong to different rings."""


class PrecisionError(PadicError):
    """Guaranteed precision is insufficient to perform or decide something."""


class NotUnitError(PadicError):
    """Inversion or exact division demanded of a non-unit."""


# ----------------------------------------------------------------------
# integer and F_p[x] helpers
# ----------------------------------------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def _is_prime(n: int) -> bool:
    # deterministic Miller-Rabin, valid far beyond any sensible p here
    if n < 2:
        return False
    for sp in _MR_BASES:
        if n % sp == 0:
            return n == sp
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _val_p(n: int, p: int) -> int | None:
    """p-adic valuation of an integer, None for 0."""
    if n == 0:
        return None
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def _fp_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _fp_sub(a, b, p):
    n = max(len(a), len(b))
    out = [((a[i] if i < len(a) else 0) - (b[i] if i < len(b) else 0)) % p
           for i in range(n)]
    return _fp_trim(out)


def _fp_mulmod(a, b, m, p):
    # product of F_p[x] polynomials reduced mod the monic polynomial m
    deg_m = len(m) - 1
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    for k in range(len(out) - 1, deg_m - 1, -1):
        c = out[k]
        if c:
            out[k] = 0
            for t in range(deg_m):
                out[k - deg_m + t] = (out[k - deg_m + t] - c * m[t]) % p
    return _fp_trim(out[:deg_m])


def _fp_powmod(a, n, m, p):
    result = [1]
    base = list(a)
    while n:
        if n & 1:
            result = _fp_mulmod(result, base, m, p)
        base = _fp_mulmod(base, base, m, p)
        n >>= 1
    return result


def _fp_gcd(a, b, p):
    a, b = _fp_trim(list(a)), _fp_trim(list(b))
    while b:
        inv_lead = pow(b[-1], p - 2, p)
        bm = [(c * inv_lead) % p for c in b]
        r = list(a)
        while len(r) >= len(bm):
            c = r[-1]
            if c:
                for t in range(len(bm)):
                    r[len(r) - len(bm) + t] = (r[len(r) - len(bm) + t] - c * bm[t]) % p
            r.pop()
        a, b = b, _fp_trim(r)
    return a


def _fp_irreducible(u: list[int], p: int) -> bool:
    """Rabin irreducibility test for a monic u over F_p."""
    f = len(u) - 1
    if f < 1:
        return False
    x = [0, 1]
    if _fp_sub(_fp_powmod(x, p**f, u, p), x, p):
        return False
    prime_divs = {d for d in range(2, f + 1) if f % d == 0 and _is_prime(d)}
    for r in prime_divs:
        g = _fp_gcd(u, _fp_sub(_fp_powmod(x, p ** (f // r), u, p), x, p), p)
        if len(g) - 1 != 0:
            return False
    return True


# ----------------------------------------------------------------------
# the ring handle
# ----------------------------------------------------------------------

class RingSpec:
    """Validated handle for O_K at working precision pi^N.

    Immutable after construction (the multiplication-matrix cache is a
    write-once memo).  Exposes q = p^f, e, f, the uniformizer ``pi``, and
    the coordinate-level kernel used by :class:`OKValue`, :class:`KValue`
    and the series layer.  Construct through :func:`make_ring`.
    """

    __slots__ = (
        "p", "f", "e", "N", "q", "Mc", "pMc", "pMc1", "nb",
        "unram_poly", "eis_poly", "key",
        "_tensor", "_wide_reduce", "_pi_coords", "_p_over_pi",
        "_mulmat_cache", "_zero", "fx", "fy", "nwide",
    )

    def __init__(self, *args, **kwargs):
        raise TypeError("use make_ring() to construct a RingSpec")

    def _same(self, other: "RingSpec") -> bool:
        return self is other or self.key == other.key

    # -- element constructors ------------------------------------------------

    def integer(self, n: int) -> "OKValue":
        coords = [0] * self.nb
        coords[0] = n % self.pMc
        return OKValue(self, tuple(coords), self.N)

    def zero(self) -> "OKValue":
        return OKValue(self, self._zero, self.N)

    def one(self) -> "OKValue":
        return self.integer(1)

    def pi(self) -> "OKValue":
        return OKValue(self, self._pi_coords, self.N)

    def from_coords(self, coords: Sequence[int], prec: int | None = None) -> "OKValue":
        if len(coords) != self.nb:
            raise ValueError(f"expected {self.nb} coordinates, got {len(coords)}")
        return OKValue(self, tuple(c % self.pMc for c in coords),
                       self.N if prec is None else prec)

    # -- coordinate kernel -----------------------------------------------------

    def _coords_add(self, a, b):
        m = self.pMc
        return tuple((x + y) % m for x, y in zip(a, b))

    def _coords_sub(self, a, b):
        m = self.pMc
        return tuple((x - y) % m for x, y in zip(a, b))

    def _coords_neg(self, a):
        m = self.pMc
        return tuple((-x) % m for x in a)

    def _coords_mul(self, a, b, mod=None):
        m = mod or self.pMc
        if self.nb == 1:
            return ((a[0] * b[0]) % m,)
        out = [0] * self.nb
        tensor = self._tensor
        for k1, x in enumerate(a):
            if x:
                row = tensor[k1]
                for k2, y in enumerate(b):
                    if y:
                        c = x * y
                        cell = row[k2]
                        for k, t in enumerate(cell):
                            if t:
                                out[k] += c * t
        return tuple(v % m for v in out)

    def _coords_val(self, coords) -> int | None:
        """Exact valuation of the canonical lift, None if all coords vanish."""
        best = None
        f = self.f
        for k, c in enumerate(coords):
            if c:
                v = self.e * _val_p(c, self.p) + (k // f)
                if best is None or v < best:
                    best = v
        return best

    def _coords_pi_mul(self, coords, t: int):
        for _ in range(t):
            coords = self._coords_mul(coords, self._pi_coords)
        return coords

    def _coords_pi_div_exact(self, coords):
        """Exact division by pi of a coordinate vector with val >= 1.

        Works with one internal extra p-digit so the quotient is exact mod
        p^Mc: z = x * (p/pi) mod p^(Mc+1) has every coordinate divisible by
        p, and z/p == x/pi mod p^Mc.
        """
        v = self._coords_val(coords)
        if v == 0:
            raise NotUnitError("coordinate vector not divisible by pi")
        z = self._coords_mul(coords, self._p_over_pi, mod=self.pMc1)
        p = self.p
        if any(c % p for c in z):
            raise NotUnitError("exact division by pi failed (not divisible)")
        m = self.pMc
        return tuple((c // p) % m for c in z)

    def _coords_inv_unit(self, coords, mod=None):
        """Inverse of a unit coordinate vector by Hensel lifting."""
        m = mod or self.pMc
        res = [coords[i] % self.p for i in range(self.f)]
        if not any(res):
            raise NotUnitError("not a unit: valuation is positive")
        if self.nb == 1:
            return (pow(coords[0], -1, m),)
        rv = ResidueValue(self, tuple(res))
        inv0 = rv.inverse().coords
        y = tuple(list(inv0) + [0] * (self.nb - self.f))
        digits = 1
        while digits < self.Mc + 2:
            prod = self._coords_mul(coords, y, mod=m)
            corr = [(-c) % m for c in prod]
            corr[0] = (corr[0] + 2) % m
            y = self._coords_mul(y, tuple(corr), mod=m)
            digits *= 2
        prod = self._coords_mul(coords, y, mod=m)
        if list(prod) != [1] + [0] * (self.nb - 1):
            raise NotUnitError("unit inversion did not converge")
        return y

    def _mult_matrix(self, coords):
        """Matrix of multiplication by the element `coords` on the basis:
        row k1 = coords of basis_k1 * element.  Memoized (write-once)."""
        key = tuple(coords)
        mat = self._mulmat_cache.get(key)
        if mat is None:
            rows = []
            for k1 in range(self.nb):
                basis = [0] * self.nb
                basis[k1] = 1
                rows.append(self._coords_mul(tuple(basis), key))
            mat = tuple(rows)
            if len(self._mulmat_cache) < 512:
                self._mulmat_cache[key] = mat
        return mat

    # -- residue field -----------------------------------------------------

    def residue_zero(self) -> "ResidueValue":
        return ResidueValue(self, (0,) * self.f)

    def residue_from_int(self, n: int) -> "ResidueValue":
        coords = [0] * self.f
        coords[0] = n % self.p
        return ResidueValue(self, tuple(coords))

    def residue_elements(self) -> Iterator["ResidueValue"]:
        """All q elements of the residue field, lexicographic by coordinates."""
        def rec(i, acc):
            if i == self.f:
                yield ResidueValue(self, tuple(acc))
                return
            for c in range(self.p):
                yield from rec(i + 1, acc + [c])
        yield from rec(0, [])

    def teichmuller(self, c: "ResidueValue") -> "OKValue":
        """The unique lift t of c with t^q = t, exact modulo pi^N."""
        if not isinstance(c, ResidueValue) or not self._same(c.ring):
            raise RingMismatchError("teichmuller lift wants a residue element of this ring")
        t = tuple(list(c.coords) + [0] * (self.nb - self.f))
        for _ in range(self.e * self.Mc + 2):
            acc = None
            base, n = t, self.q
            while n:
                if n & 1:
                    acc = base if acc is None else self._coords_mul(acc, base)
                base = self._coords_mul(base, base)
                n >>= 1
            if acc == t:
                return OKValue(self, t, self.N)
            t = acc
        raise PadicError("Teichmuller iteration did not stabilize")

    # -- serialization ------------------------------------------------------

    def descriptor(self) -> dict:
        return {
            "p": self.p,
            "unram_poly": list(self.unram_poly),
            "eis_poly": [list(c) for c in self.eis_poly],
            "N": self.N,
        }

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), sort_keys=True)

    @property
    def tag(self) -> str:
        return f"p{self.p}f{self.f}e{self.e}N{self.N}"

    # -- element literals ---------------------------------------------------

    def element_literal(self, x: "OKValue") -> str:
        """Base-p little-endian digit string per coordinate, joined by '|'."""
        parts = []
        for c in x.coords:
            digs = []
            v = c % self.pMc
            for _ in range(self.Mc):
                v, d = divmod(v, self.p)
                digs.append(_DIGITS[d])
            parts.append("".join(digs).rstrip("0") or "0")
        return "|".join(parts)

    def parse_element(self, text: str) -> "OKValue":
        """Parse an element literal (base-p little-endian digit strings per
        coordinate, '|'-separated).  A leading sign, or a decimal digit that
        is not a valid base-p digit, switches to plain-integer parsing."""
        text = text.strip()
        if text[:1] in "+-":
            return self.integer(int(text, 10))
        if (self.p <= 10 and text.isdigit()
                and any(int(c) >= self.p for c in text)):
            return self.integer(int(text, 10))
        parts = text.split("|")
        if len(parts) > self.nb:
            raise ValueError(f"too many coordinates in element literal {text!r}")
        coords = [0] * self.nb
        for k, part in enumerate(parts):
            v = 0
            for d in reversed(part.strip()):
                if d not in _DIGITS[: self.p]:
                    raise ValueError(f"bad base-{self.p} digit {d!r} in {text!r}")
                v = v * self.p + _DIGITS.index(d)
            coords[k] = v % self.pMc
        return OKValue(self, tuple(coords), self.N)

    def __repr__(self):
        return f"RingSpec(p={self.p}, f={self.f}, e={self.e}, N={self.N})"


_DIGITS = "0123456789abcdefghijklmnopqrstuvwxyz"

# extra p-digits of storage beyond ceil(N/e); these keep stored-representative
# exactness strictly above every claimable precision floor
_GUARD_DIGITS = 4


def make_ring(p: int,
              unram_poly: Sequence[int] | None = None,
              eis_poly: Sequence | None = None,
              N: int = 24) -> RingSpec:
    """Build and validate a ring handle for O_K.

    ``unram_poly``: little-endian integer coefficients of a monic polynomial
    irreducible mod p (default ``[0, 1]``, the degree-1 convention, f = 1).
    ``eis_poly``: little-endian coefficients of an Eisenstein polynomial over
    the unramified layer; each coefficient is an int or a little-endian list
    of ints (default ``[-p, 1]``, e = 1).  ``N`` is the working precision in
    pi-digits.  Each failed validity check is reported by name.
    """
    if not isinstance(p, int) or not _is_prime(p):
        raise ValueError(f"p is not prime: {p!r}")
    if N < 1:
        raise ValueError("precision check failed: N must be >= 1")

    u = [int(c) for c in (unram_poly if unram_poly is not None else [0, 1])]
    while len(u) > 1 and u[-1] == 0:
        u.pop()
    f = len(u) - 1
    if f < 1 or u[-1] != 1:
        raise ValueError("unram_poly check failed: must be monic of degree >= 1")
    if f > 1 and not _fp_irreducible([c % p for c in u], p):
        raise ValueError("unram_poly check failed: reducible mod p")

    raw_e = eis_poly if eis_poly is not None else [-p, 1]
    E = []
    for c in raw_e:
        cc = [int(t) for t in c] if isinstance(c, (list, tuple)) else [int(c)]
        if len(cc) > f:
            raise ValueError("eis_poly coefficient has degree >= f over the unramified layer")
        E.append(cc + [0] * (f - len(cc)))
    while len(E) > 1 and not any(E[-1]):
        E.pop()
    e = len(E) - 1
    if e < 1:
        raise ValueError("eis_poly check failed: must have degree >= 1")

    def k0_val(c):
        vals = [_val_p(t, p) for t in c if t]
        return min(vals) if vals else None

    if k0_val(E[-1]) != 0:
        raise ValueError("not Eisenstein: leading coefficient is not a unit")
    for j in range(1, e):
        v = k0_val(E[j])
        if v is not None and v < 1:
            raise ValueError(f"not Eisenstein: coefficient of y^{j} is a unit")
    if k0_val(E[0]) != 1:
        raise ValueError("not Eisenstein: constant term valuation is not exactly 1")

    ring = object.__new__(RingSpec)
    ring.p, ring.f, ring.e, ring.N = p, f, e, N
    ring.q = p**f
    ring.Mc = -(-N // e) + _GUARD_DIGITS
    ring.pMc = p**ring.Mc
    ring.pMc1 = p**(ring.Mc + 1)
    ring.nb = e * f
    ring.unram_poly = tuple(u)
    ring.eis_poly = tuple(tuple(c) for c in E)
    ring.key = (p, ring.unram_poly, ring.eis_poly, N)
    ring.fx, ring.fy = 2 * f - 1, 2 * e - 1
    ring.nwide = ring.fx * ring.fy
    ring._mulmat_cache = {}
    ring._zero = (0,) * ring.nb

    _build_kernel(ring)
    return ring


def _build_kernel(ring: RingSpec) -> None:
    """One-time exact construction of the multiplication tensor, the wide-grid
    reduction table, pi's coordinates and p/pi.  Internal computations run
    mod p^(Mc+2) so that stored tables are exact lifts for both the p^Mc and
    p^(Mc+1) arithmetic paths."""
    p, f, e = ring.p, ring.f, ring.e
    mod = p ** (ring.Mc + 2)
    u = ring.unram_poly

    def k0_mul(a, b):
        out = [0] * (2 * f - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    if y:
                        out[i + j] = (out[i + j] + x * y) % mod
        for k in range(2 * f - 2, f - 1, -1):
            c = out[k]
            if c:
                out[k] = 0
                for t in range(f):
                    out[k - f + t] = (out[k - f + t] - c * u[t]) % mod
        return out[:f]

    def k0_inv(a):
        res = [c % p for c in a]
        inv = _fp_powmod(res, p**f - 2, [c % p for c in u], p)
        y = list(inv) + [0] * (f - len(inv))
        digits = 1
        while digits < ring.Mc + 3:
            prod = k0_mul(a, y)
            corr = [(-c) % mod for c in prod]
            corr[0] = (corr[0] + 2) % mod
            y = k0_mul(y, corr)
            digits *= 2
        return y

    E = [[c % mod for c in coeff] for coeff in ring.eis_poly]
    lead_inv = k0_inv(E[e])
    Emon = [k0_mul(c, lead_inv) for c in E[:e]]

    def tower_mul(a, b):
        out = [[0] * f for _ in range(2 * e - 1)]
        for j1, c1 in enumerate(a):
            if any(c1):
                for j2, c2 in enumerate(b):
                    if any(c2):
                        prod = k0_mul(c1, c2)
                        row = out[j1 + j2]
                        for t in range(f):
                            row[t] = (row[t] + prod[t]) % mod
        for k in range(2 * e - 2, e - 1, -1):
            c = out[k]
            if any(c):
                out[k] = [0] * f
                for j in range(e):
                    prod = k0_mul(c, Emon[j])
                    row = out[k - e + j]
                    for t in range(f):
                        row[t] = (row[t] - prod[t]) % mod
        return out[:e]

    def flat(tower):
        return tuple(tower[j][i] % mod for j in range(e) for i in range(f))

    def basis_tower(i, j):
        t = [[0] * f for _ in range(e)]
        t[j][i] = 1
        return t

    ring._tensor = tuple(
        tuple(flat(tower_mul(basis_tower(k1 % f, k1 // f), basis_tower(k2 % f, k2 // f)))
              for k2 in range(ring.nb))
        for k1 in range(ring.nb)
    )

    # pi = image of y; for e == 1 the Eisenstein relation gives pi = -Emon[0]
    if e > 1:
        pi_tower = basis_tower(0, 1)
    else:
        pi_tower = [[(-c) % mod for c in Emon[0]]]
    ring._pi_coords = tuple(c % ring.pMc for c in flat(pi_tower))

    # wide-grid reduction: coords of x^i y^j for i < 2f-1, j < 2e-1
    wide = []
    xi = basis_tower(1, 0) if f > 1 else None
    for j in range(ring.fy):
        for i in range(ring.fx):
            acc = basis_tower(0, 0)
            for _ in range(i):
                acc = tower_mul(acc, xi)
            for _ in range(j):
                acc = tower_mul(acc, pi_tower)
            wide.append(flat(acc))
    ring._wide_reduce = tuple(wide)

    # p/pi = -pi^(e-1) * ustar^{-1}, ustar = sum_{j<e} (E_j/p) y^j; every E_j/p
    # is integral by the Eisenstein condition and ustar is a unit (E_0/p is)
    ustar = [[0] * f for _ in range(e)]
    for j in range(e):
        for t in range(f):
            c = Emon[j][t]
            if c % p:
                raise ValueError("not Eisenstein: internal divisibility check failed")
            ustar[j][t] = (c // p) % mod
    ust_inv_t = _tower_inv(ustar, tower_mul, k0_inv, e, f, e * (ring.Mc + 3))
    acc = basis_tower(0, 0)
    for _ in range(e - 1):
        acc = tower_mul(acc, pi_tower)
    pov = tower_mul(acc, ust_inv_t)
    ring._p_over_pi = tuple((-c) % ring.pMc1 for c in flat(pov))


def _tower_inv(a, tower_mul, k0_inv, e, f, target_digits):
    """Inverse of a unit in tower form by Newton iteration; the start value
    inverts the residue, each step doubles the correct pi-adic depth."""
    if e == 1:
        return [k0_inv(a[0])]
    y = [list(k0_inv(a[0]))] + [[0] * f for _ in range(e - 1)]
    depth = 1
    while depth < target_digits:
        prod = tower_mul(a, y)
        corr = [[-c for c in row] for row in prod]
        corr[0][0] += 2
        y = tower_mul(y, corr)
        depth *= 2
    return y


def ring_from_descriptor(d: dict) -> RingSpec:
    return make_ring(int(d["p"]), d.get("unram_poly"), d.get("eis_poly"), int(d["N"]))


def ring_from_json(text: str) -> RingSpec:
    return ring_from_descriptor(json.loads(text))


# ----------------------------------------------------------------------
# residue field F_q
# ----------------------------------------------------------------------

class ResidueValue:
    """Element of the residue field k = F_q as f coordinates mod p."""

    __slots__ = ("ring", "coords")

    def __init__(self, ring: RingSpec, coords: tuple):
        self.ring = ring
        self.coords = coords

    def _coerce(self, other):
        if isinstance(other, int):
            return self.ring.residue_from_int(other)
        if not isinstance(other, ResidueValue):
            raise TypeError("residue arithmetic wants residue elements")
        if not self.ring._same(other.ring):
            raise RingMismatchError("residue elements of different rings")
        return other

    def __add__(self, other):
        other = self._coerce(other)
        p = self.ring.p
        return ResidueValue(self.ring,
                            tuple((a + b) % p for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other):
        other = self._coerce(other)
        p = self.ring.p
        return ResidueValue(self.ring,
                            tuple((a - b) % p for a, b in zip(self.coords, other.coords)))

    def __neg__(self):
        p = self.ring.p
        return ResidueValue(self.ring, tuple((-a) % p for a in self.coords))

    def __mul__(self, other):
        other = self._coerce(other)
        r = self.ring
        prod = _fp_mulmod(list(self.coords), list(other.coords),
                          [c % r.p for c in r.unram_poly], r.p)
        return ResidueValue(r, tuple(prod + [0] * (r.f - len(prod))))

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        r = self.ring
        out = _fp_powmod(list(self.coords), n, [c % r.p for c in r.unram_poly], r.p)
        return ResidueValue(r, tuple(out + [0] * (r.f - len(out))))

    def inverse(self) -> "ResidueValue":
        if self.is_zero():
            raise NotUnitError("zero has no inverse in the residue field")
        return self ** (self.ring.q - 2)

    def is_zero(self) -> bool:
        return not any(self.coords)

    def __eq__(self, other):
        if isinstance(other, int):
            other = self.ring.residue_from_int(other)
        if not isinstance(other, ResidueValue):
            return NotImplemented
        return self.ring._same(other.ring) and self.coords == other.coords

    def __hash__(self):
        return hash((self.ring.key, self.coords))

    def __repr__(self):
        return f"ResidueValue{self.coords}"


# ----------------------------------------------------------------------
# O_K values
# ----------------------------------------------------------------------

class OKValue:
    """Element of O_K with a guaranteed absolute precision in pi-digits.

    Two values compare equal iff they agree modulo pi^min(prec1, prec2).
    Immutable; safe to share freely.
    """

    __slots__ = ("ring", "coords", "prec")

    def __init__(self, ring: RingSpec, coords: tuple, prec: int):
        self.ring = ring
        self.coords = coords
        self.prec = min(prec, ring.N)

    def _coerce(self, other):
        if isinstance(other, OKValue):
            if not self.ring._same(other.ring):
                raise RingMismatchError("values of different rings")
            return other
        if isinstance(other, int):
            return self.ring.integer(other)
        return None

    def val(self) -> int | None:
        """Largest v with pi^v | x if v < prec, else None (the value is
        indistinguishable from 0 at this precision)."""
        v = self.ring._coords_val(self.coords)
        if v is None or v >= self.prec:
            return None
        return v

    def vlb(self) -> int:
        """Certified valuation lower bound: val() when finite, else prec."""
        v = self.val()
        return self.prec if v is None else v

    def is_zero_at_prec(self) -> bool:
        return self.val() is None

    def unit_part_and_val(self):
        """(u, v) with x = pi^v * u and u a unit; errors if x is
        indistinguishable from 0 at precision."""
        v = self.val()
        if v is None:
            raise PrecisionError("cannot split off unit part: value is 0 at precision")
        coords = self.coords
        for _ in range(v):
            coords = self.ring._coords_pi_div_exact(coords)
        return OKValue(self.ring, coords, self.prec - v), v

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return OKValue(self.ring, self.ring._coords_add(self.coords, o.coords),
                       min(self.prec, o.prec))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return OKValue(self.ring, self.ring._coords_sub(self.coords, o.coords),
                       min(self.prec, o.prec))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return OKValue(self.ring, self.ring._coords_neg(self.coords), self.prec)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec + o.vlb(), o.prec + self.vlb())
        return OKValue(self.ring, self.ring._coords_mul(self.coords, o.coords), prec)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers live in K; use inv_unit or KValue")
        acc, base = self.ring.one(), self
        while n:
            if n & 1:
                acc = acc * base
            base = base * base
            n >>= 1
        return acc

    def inv_unit(self) -> "OKValue":
        """Inverse of a unit (val = 0); NotUnitError otherwise."""
        if self.prec < 1:
            raise PrecisionError("precision too low to certify a unit")
        if self.val() != 0:
            raise NotUnitError("not a unit")
        return OKValue(self.ring, self.ring._coords_inv_unit(self.coords), self.prec)

    def exact_div_pi(self, k: int = 1) -> "OKValue":
        """Exact division by pi^k; costs k digits of guaranteed precision."""
        coords, prec = self.coords, self.prec
        for _ in range(k):
            if prec < 1:
                raise PrecisionError("precision exhausted in exact division by pi")
            coords = self.ring._coords_pi_div_exact(coords)
            prec -= 1
        return OKValue(self.ring, coords, prec)

    def pi_mul(self, k: int) -> "OKValue":
        return OKValue(self.ring, self.ring._coords_pi_mul(self.coords, k), self.prec + k)

    def residue(self) -> ResidueValue:
        if self.prec < 1:
            raise PrecisionError("precision too low to reduce modulo pi")
        return ResidueValue(self.ring, tuple(self.coords[i] % self.ring.p
                                             for i in range(self.ring.f)))

    def to_k(self) -> "KValue":
        return KValue.from_ok(self)

    # -- comparisons ------------------------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).val() is None

    def eq_exact(self, other, need: int | None = None) -> bool:
        """Precision-demanding comparison: True certifies agreement modulo
        pi^need (default N); errors if precision cannot decide."""
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare OKValue with {type(other).__name__}")
        diff = self - o
        need = self.ring.N if need is None else need
        if diff.val() is not None:
            return False
        if diff.prec < need:
            raise PrecisionError(
                f"equality undecidable: guaranteed only modulo pi^{diff.prec}, need pi^{need}")
        return True

    __hash__ = None  # precision-aware equality is not hashable

    def literal(self) -> str:
        return self.ring.element_literal(self)

    def __repr__(self):
        v = self.val()
        vs = f"val={v}" if v is not None else f"val>={self.prec}"
        return f"OKValue({self.literal()!r}, {vs}, prec={self.prec})"


# ----------------------------------------------------------------------
# K values
# ----------------------------------------------------------------------

class KValue:
    """Element of K = Frac(O_K): value = pi^shift * mantissa, shift <= 0.

    ``prec`` is the guaranteed ABSOLUTE precision of the value; the mantissa
    coordinates are exact representatives modulo the storage modulus, and
    normalization keeps the shift maximal (mantissa not divisible by pi
    unless shift is 0).
    """

    __slots__ = ("ring", "shift", "coords", "prec")

    def __init__(self, ring: RingSpec, shift: int, coords: tuple, prec: int):
        if shift > 0:
            coords = ring._coords_pi_mul(coords, shift)
            shift = 0
        v = ring._coords_val(coords)
        if v is None:
            shift = 0
        elif shift < 0 and v > 0:
            t = min(v, -shift)
            for _ in range(t):
                coords = ring._coords_pi_div_exact(coords)
            shift += t
        self.ring = ring
        self.shift = shift
        self.coords = coords
        self.prec = min(prec, ring.N + shift)

    @classmethod
    def from_ok(cls, x: OKValue) -> "KValue":
        return cls(x.ring, 0, x.coords, x.prec)

    @classmethod
    def from_int(cls, ring: RingSpec, n: int) -> "KValue":
        return cls.from_ok(ring.integer(n))

    def to_ok(self) -> OKValue:
        """Demote to O_K; requires a certified nonnegative valuation."""
        if self.shift == 0:
            return OKValue(self.ring, self.coords, self.prec)
        verdict = self.integral_verdict()
        if verdict is False:
            raise NotUnitError("value has negative valuation")
        if verdict is None:
            raise PrecisionError("precision too low to certify integrality")
        coords = self.coords
        for _ in range(-self.shift):
            coords = self.ring._coords_pi_div_exact(coords)
        return OKValue(self.ring, coords, self.prec)

    # -- queries ------------------------------------------------------------

    def val(self) -> int | None:
        v = self.ring._coords_val(self.coords)
        if v is None or v + self.shift >= self.prec:
            return None
        return v + self.shift

    def vlb(self) -> int:
        v = self.val()
        return self.prec if v is None else v

    def is_zero_at_prec(self) -> bool:
        return self.val() is None

    def integral_verdict(self) -> bool | None:
        """True / False / None(unknown at this precision) for val >= 0."""
        v = self.val()
        if v is not None:
            return v >= 0
        return True if self.prec >= 0 else None

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, KValue):
            if not self.ring._same(other.ring):
                raise RingMismatchError("values of different rings")
            return other
        if isinstance(other, OKValue):
            if not self.ring._same(other.ring):
                raise RingMismatchError("values of different rings")
            return KValue.from_ok(other)
        if isinstance(other, int):
            return KValue.from_int(self.ring, other)
        return None

    def _aligned(self, other):
        s = min(self.shift, other.shift)
        a = self.ring._coords_pi_mul(self.coords, self.shift - s)
        b = self.ring._coords_pi_mul(other.coords, other.shift - s)
        return s, a, b

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        s, a, b = self._aligned(o)
        return KValue(self.ring, s, self.ring._coords_add(a, b), min(self.prec, o.prec))

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        s, a, b = self._aligned(o)
        return KValue(self.ring, s, self.ring._coords_sub(a, b), min(self.prec, o.prec))

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return KValue(self.ring, self.shift, self.ring._coords_neg(self.coords), self.prec)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        prec = min(self.prec + o.vlb(), o.prec + self.vlb())
        return KValue(self.ring, self.shift + o.shift,
                      self.ring._coords_mul(self.coords, o.coords), prec)

    __rmul__ = __mul__

    def divide_by(self, other) -> "KValue":
        """Division by a value of decidable valuation (y = pi^v * unit)."""
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot divide by {type(other).__name__}")
        v = o.val()
        if v is None:
            raise PrecisionError("divisor indistinguishable from 0 at precision")
        uv = o.ring._coords_val(o.coords)
        coords = o.coords
        for _ in range(uv):
            coords = o.ring._coords_pi_div_exact(coords)
        inv = self.ring._coords_inv_unit(coords)
        prec = min(self.prec - v, self.vlb() - v + (o.prec - v))
        return KValue(self.ring, self.shift - uv - o.shift,
                      self.ring._coords_mul(self.coords, inv), prec)

    def pi_shift(self, k: int) -> "KValue":
        """Multiply by pi^k (any sign); absolute precision moves by k."""
        return KValue(self.ring, self.shift + k, self.coords, self.prec + k)

    # -- comparisons ------------------------------------------------------------

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).val() is None

    def eq_exact(self, other, need: int | None = None) -> bool:
        o = self._coerce(other)
        if o is None:
            raise TypeError(f"cannot compare KValue with {type(other).__name__}")
        diff = self - o
        need = self.ring.N if need is None else need
        if diff.val() is not None:
            return False
        if diff.prec < need:
            raise PrecisionError(
                f"equality undecidable: guaranteed only modulo pi^{diff.prec}, need pi^{need}")
        return True

    __hash__ = None

    def __repr__(self):
        lit = self.ring.element_literal(OKValue(self.ring, self.coords, self.ring.N))
        head = f"pi^{self.shift}*" if self.shift else ""
        return f"KValue({head}{lit!r}, prec={self.prec})"
