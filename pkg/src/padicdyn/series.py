"""Truncated power series over O_K and K with tracked precision floors.

One- and two-variable series keep, per coefficient: a shift (power of pi,
<= 0), mantissa coordinates on the O_K basis, and a guaranteed absolute
precision.  Multiplication packs the mantissa coordinate vectors of a whole
series into one big integer (fixed-width byte cells, one block of cells per
monomial), so that a single big-integer product performs the full
convolution exactly; cells are sized so no carry can cross a boundary.
Precision floors are propagated separately: coefficientwise min-plus rules
for one variable, a sound uniform floor for two.

Newton polygons are exact: vertices are (index, valuation) points with
`fractions.Fraction` slopes, and indices whose valuation is undecidable at
the guaranteed precision are accepted only when their precision floor
already places them above the hull.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import gmpy2
import numpy as np

from .padic import (
    KValue,
    NotUnitError,
    OKValue,
    PadicError,
    PrecisionError,
    ResidueValue,
    RingMismatchError,
    RingSpec,
)

__all__ = [
    "Series1",
    "Series2",
    "ResidueSeries",
    "NewtonPolygon",
    "newton_polygon",
    "residue_decompose",
    "subst2",
]

_BIG = 10**6  # stand-in for "+infinity" in valuation/precision arrays


# ----------------------------------------------------------------------
# packed multiplication kernel
# ----------------------------------------------------------------------

def _cell_bytes(ring: RingSpec, npairs: int) -> int:
    bound = (ring.pMc - 1) ** 2 * ring.f * ring.e * max(npairs, 1)
    return ((bound.bit_length() + 7) // 8 + 7) // 8 * 8


def _pack(ring: RingSpec, rows, slot_of, total_slots: int, w: int) -> gmpy2.mpz:
    """Pack mantissa coordinate rows into one integer.

    ``rows``: object array (n, nb); ``slot_of``: slot index per row.  Each
    slot holds nwide cells of w bytes; reduced coordinate (i, j) sits in
    wide cell j*fx + i.  Cells are written 64-bit limb by limb, vectorized
    over the rows.
    """
    f, fx = ring.f, ring.fx
    nwide = ring.nwide
    buf = np.zeros(total_slots * nwide * w, dtype=np.uint8)
    n = len(rows)
    if n:
        slot_of = np.asarray(slot_of, dtype=np.int64)
        mask = (1 << 64) - 1
        byte_idx = np.arange(8, dtype=np.int64)
        for k in range(ring.nb):
            col = rows[:, k]
            if not col.any():
                continue
            wk = (k // f) * fx + (k % f)
            offs = (slot_of * nwide + wk) * w
            vals = col
            limb = 0
            while limb * 8 < w and vals.any():
                lo = (vals & mask).astype(np.uint64)
                frame = lo.view(np.uint8).reshape(n, 8)
                idx = offs[:, None] + (limb * 8 + byte_idx)[None, :]
                buf[idx.ravel()] = frame.ravel()
                vals = vals >> 64
                limb += 1
    return gmpy2.mpz(int.from_bytes(buf.tobytes(), "little"))


def _unpack(ring: RingSpec, value: gmpy2.mpz, total_slots: int, w: int,
            select=None) -> np.ndarray:
    """Inverse of :func:`_pack` for a product: object array of raw wide cells.

    With ``select`` (slot indices), only those slots are materialized as
    Python ints; shape is (len(select) or total_slots, nwide)."""
    nwide = ring.nwide
    blen = total_slots * nwide * w
    raw = int(value).to_bytes(blen, "little")
    arr = np.frombuffer(raw, dtype=np.uint64).reshape(total_slots * nwide, w // 8)
    if select is not None:
        rows = (np.asarray(select)[:, None] * nwide + np.arange(nwide)).ravel()
        arr = arr[rows]
        nslots = len(select)
    else:
        nslots = total_slots
    out = arr[:, 0].astype(object)
    for t in range(1, w // 8):
        mixed = arr[:, t]
        if mixed.any():
            out = out + (mixed.astype(object) << (64 * t))
    return out.reshape(nslots, nwide)


def _reduce_wide(ring: RingSpec, cells: np.ndarray) -> np.ndarray:
    """Reduce raw wide-grid cells to canonical basis coordinates mod p^Mc."""
    m = ring.pMc
    if ring.nwide == 1:
        return (cells % m).reshape(len(cells), 1)
    wr = ring._wide_reduce
    nb = ring.nb
    out = np.zeros((len(cells), nb), dtype=object)
    for wk in range(ring.nwide):
        col = cells[:, wk]
        if not col.any():
            continue
        coords = wr[wk]
        for k in range(nb):
            t = coords[k]
            if t:
                out[:, k] = out[:, k] + col * t
    return out % m


def _minplus(x: np.ndarray, y: np.ndarray, dout: int) -> np.ndarray:
    """out[d] = min over i+j = d of x[i] + y[j] (1-variable min-plus)."""
    out = np.full(dout + 1, _BIG, dtype=np.int64)
    nx, ny = len(x), len(y)
    for d in range(dout + 1):
        lo, hi = max(0, d - ny + 1), min(d, nx - 1)
        if lo <= hi:
            seg = x[lo:hi + 1] + y[d - hi:d - lo + 1][::-1]
            out[d] = seg.min()
    return out


def _by_degree_min(values: np.ndarray, deg: np.ndarray, dout: int) -> np.ndarray:
    """Per-total-degree minimum of a per-cell array."""
    out = np.full(dout + 1, _BIG, dtype=np.int64)
    np.minimum.at(out, deg, values)
    return out


def _matmul_mod(x: np.ndarray, y: np.ndarray, m: int) -> np.ndarray:
    """(x @ y) % m for object arrays of canonical residues, via limb-split
    int64 matrix products when the modulus permits."""
    bits = (m - 1).bit_length()
    k = x.shape[1]
    # products accumulate over k terms; keep limb products * k below 2^62
    if 2 * bits + k.bit_length() <= 62:
        return (x.astype(np.int64) @ y.astype(np.int64)).astype(object) % m
    limb = max(1, (62 - k.bit_length()) // 2)
    nl = (bits + limb - 1) // limb
    if nl * nl > 16:
        return (x @ y) % m  # object fallback
    mask = (1 << limb) - 1
    xs = []
    ys = []
    xv, yv = x, y
    for _ in range(nl):
        xs.append((xv & mask).astype(np.int64))
        ys.append((yv & mask).astype(np.int64))
        xv = xv >> limb
        yv = yv >> limb
    acc = np.zeros((x.shape[0], y.shape[1]), dtype=object)
    for i in range(nl):
        for j in range(nl):
            part = xs[i] @ ys[j]
            acc = acc + (part.astype(object) << (limb * (i + j)))
    return acc % m


# ----------------------------------------------------------------------
# shared coefficient-table plumbing
# ----------------------------------------------------------------------

def _pi_mat(ring: RingSpec, t: int):
    return ring._mult_matrix(ring._coords_pi_mul((1,) + (0,) * (ring.nb - 1), t))


def _rows_times_elem(ring: RingSpec, rows: np.ndarray, coords) -> np.ndarray:
    """Multiply every coordinate row by a fixed ring element."""
    if ring.nb == 1:
        return (rows * coords[0]) % ring.pMc
    mat = np.array(ring._mult_matrix(coords), dtype=object)
    return _matmul_mod(rows, mat, ring.pMc)


class _CoeffTable:
    """Common storage for series coefficients: shifts, mantissa rows,
    absolute precisions, and the derived valuation lower bounds."""

    __slots__ = ("ring", "sh", "co", "pr", "_vlb")

    def __init__(self, ring, sh, co, pr):
        self.ring = ring
        self.sh = sh
        self.co = co
        self.pr = pr
        self._vlb = None

    def vlb(self) -> np.ndarray:
        if self._vlb is None:
            ring = self.ring
            out = np.empty(len(self.pr), dtype=np.int64)
            for i in range(len(self.pr)):
                v = ring._coords_val(self.co[i])
                if v is None or v + self.sh[i] >= self.pr[i]:
                    out[i] = self.pr[i]
                else:
                    out[i] = v + self.sh[i]
            self._vlb = out
        return self._vlb

    def kvalue(self, i: int) -> KValue:
        return KValue(self.ring, int(self.sh[i]), tuple(self.co[i]), int(self.pr[i]))

    def normalize(self):
        """Maximize shifts (pull pi-divisibility of mantissas into shifts) and
        cap precisions at N + shift."""
        ring = self.ring
        if (self.sh < 0).any():
            for i in np.nonzero(self.sh < 0)[0]:
                v = ring._coords_val(self.co[i])
                if v is None:
                    self.sh[i] = 0
                elif v > 0:
                    t = min(v, -int(self.sh[i]))
                    coords = self.co[i]
                    for _ in range(t):
                        coords = ring._coords_pi_div_exact(coords)
                    self.co[i] = np.array(coords, dtype=object)
                    self.sh[i] += t
        np.minimum(self.pr, ring.N + self.sh, out=self.pr)
        self._vlb = None


def _align_tables(a: _CoeffTable, b: _CoeffTable, n: int):
    """Common-shift views of the first n coefficients for add/sub."""
    ring = a.ring
    sh = np.minimum(a.sh[:n], b.sh[:n])
    ca = a.co[:n].copy()
    cb = b.co[:n].copy()
    for i in range(n):
        ta, tb = int(a.sh[i] - sh[i]), int(b.sh[i] - sh[i])
        if ta:
            ca[i] = np.array(ring._coords_pi_mul(tuple(ca[i]), ta), dtype=object)
        if tb:
            cb[i] = np.array(ring._coords_pi_mul(tuple(cb[i]), tb), dtype=object)
    return sh, ca, cb


def _coerce_coeff(ring: RingSpec, v) -> KValue:
    if isinstance(v, KValue):
        if not ring._same(v.ring):
            raise RingMismatchError("coefficient from a different ring")
        return v
    if isinstance(v, OKValue):
        if not ring._same(v.ring):
            raise RingMismatchError("coefficient from a different ring")
        return KValue.from_ok(v)
    if isinstance(v, int):
        return KValue.from_int(ring, v)
    raise TypeError(f"cannot use {type(v).__name__} as a series coefficient")


# ----------------------------------------------------------------------
# one-variable series
# ----------------------------------------------------------------------

class Series1:
    """Truncated series sum c_i T^i, 0 <= i <= D, coefficients in K.

    Coefficients carry individual guaranteed precisions; `integral` is a
    tri-state verdict.  Mixed-degree operations truncate to the minimum D.
    Immutable.
    """

    __slots__ = ("ring", "D", "_t", "_packed")

    def __init__(self, ring: RingSpec, D: int, table: _CoeffTable):
        self.ring = ring
        self.D = D
        self._t = table
        self._packed = {}

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_coeffs(cls, ring: RingSpec, D: int, coeffs: dict) -> "Series1":
        """coeffs: map index -> int | OKValue | KValue; omitted indices are 0."""
        sh = np.zeros(D + 1, dtype=np.int64)
        co = np.zeros((D + 1, ring.nb), dtype=object)
        pr = np.full(D + 1, ring.N, dtype=np.int64)
        for i, v in coeffs.items():
            if not 0 <= i <= D:
                continue
            kv = _coerce_coeff(ring, v)
            sh[i], co[i], pr[i] = kv.shift, np.array(kv.coords, dtype=object), kv.prec
        t = _CoeffTable(ring, sh, co, pr)
        t.normalize()
        return cls(ring, D, t)

    @classmethod
    def zero(cls, ring: RingSpec, D: int) -> "Series1":
        return cls.from_coeffs(ring, D, {})

    @classmethod
    def identity(cls, ring: RingSpec, D: int) -> "Series1":
        """The series T."""
        return cls.from_coeffs(ring, D, {1: 1})

    @classmethod
    def one_plus_t_pow(cls, ring: RingSpec, a: int, D: int) -> "Series1":
        """(1+T)^a - 1 for an integer a, via binomial coefficients."""
        return cls.from_coeffs(ring, D, {i: _binom_int(a, i) for i in range(1, D + 1)})

    # -- accessors -------------------------------------------------------------

    def coeff(self, i: int) -> KValue:
        if not 0 <= i <= self.D:
            raise IndexError(f"coefficient index {i} outside truncation 0..{self.D}")
        return self._t.kvalue(i)

    def coeffs(self) -> list[KValue]:
        return [self._t.kvalue(i) for i in range(self.D + 1)]

    def nonzero_indices(self) -> list[int]:
        return [i for i in range(self.D + 1) if any(self._t.co[i])]

    def constant_is_zero(self) -> bool:
        return not any(self._t.co[0])

    def integral_verdict(self):
        """('yes'|'no'|'unknown', witness index or None)."""
        t = self._t
        for i in range(self.D + 1):
            if t.sh[i] < 0:
                v = self.ring._coords_val(t.co[i])
                if v is not None and v + t.sh[i] < 0 and v + t.sh[i] < t.pr[i]:
                    return "no", i
                if v is None and t.pr[i] < 0:
                    return "unknown", i
        return "yes", None

    @property
    def integral(self) -> bool | None:
        verdict, _ = self.integral_verdict()
        return {"yes": True, "no": False, "unknown": None}[verdict]

    def truncate(self, D: int) -> "Series1":
        if D >= self.D:
            return self
        t = self._t
        return Series1(self.ring, D,
                       _CoeffTable(self.ring, t.sh[:D + 1].copy(),
                                   t.co[:D + 1].copy(), t.pr[:D + 1].copy()))

    def _pad_to(self, D: int) -> "Series1":
        """Extend with exact-zero coefficients.  Internal: callers must
        guarantee the padded range cannot influence degrees they keep."""
        if D <= self.D:
            return self.truncate(D)
        t = self._t
        sh = np.zeros(D + 1, dtype=np.int64)
        co = np.zeros((D + 1, self.ring.nb), dtype=object)
        pr = np.full(D + 1, self.ring.N, dtype=np.int64)
        sh[: self.D + 1] = t.sh
        co[: self.D + 1] = t.co
        pr[: self.D + 1] = t.pr
        return Series1(self.ring, D, _CoeffTable(self.ring, sh, co, pr))

    # -- ring operations ---------------------------------------------------------

    def _check_ring(self, other: "Series1"):
        if not self.ring._same(other.ring):
            raise RingMismatchError("series over different rings")

    def __add__(self, other: "Series1") -> "Series1":
        self._check_ring(other)
        n = min(self.D, other.D) + 1
        sh, ca, cb = _align_tables(self._t, other._t, n)
        co = (ca + cb) % self.ring.pMc
        pr = np.minimum(self._t.pr[:n], other._t.pr[:n])
        t = _CoeffTable(self.ring, sh, co, pr)
        t.normalize()
        return Series1(self.ring, n - 1, t)

    def __sub__(self, other: "Series1") -> "Series1":
        self._check_ring(other)
        n = min(self.D, other.D) + 1
        sh, ca, cb = _align_tables(self._t, other._t, n)
        co = (ca - cb) % self.ring.pMc
        pr = np.minimum(self._t.pr[:n], other._t.pr[:n])
        t = _CoeffTable(self.ring, sh, co, pr)
        t.normalize()
        return Series1(self.ring, n - 1, t)

    def __neg__(self) -> "Series1":
        t = self._t
        co = (-t.co) % self.ring.pMc
        return Series1(self.ring, self.D,
                       _CoeffTable(self.ring, t.sh.copy(), co, t.pr.copy()))

    def scalar_mul(self, c) -> "Series1":
        kv = _coerce_coeff(self.ring, c)
        t = self._t
        co = _rows_times_elem(self.ring, t.co, kv.coords)
        sh = t.sh + kv.shift
        cvlb = kv.vlb()
        pr = np.minimum(t.pr + cvlb, kv.prec + t.vlb())
        out = _CoeffTable(self.ring, sh, co, pr)
        out.normalize()
        return Series1(self.ring, self.D, out)

    def _packed_form(self, dout: int):
        """(sigma, packed mpz, w, total_slots); cached per output degree."""
        w = _cell_bytes(self.ring, dout + 1)
        key = (dout, w)
        hit = self._packed.get(key)
        if hit is not None:
            return hit
        t = self._t
        n = min(self.D, dout) + 1
        sigma = int(t.sh[:n].min()) if n else 0
        rows = t.co[:n]
        if sigma < 0:
            rows = rows.copy()
            for i in range(n):
                d = int(t.sh[i] - sigma)
                if d:
                    rows[i] = np.array(self.ring._coords_pi_mul(tuple(rows[i]), d),
                                       dtype=object)
        total = 2 * dout + 1
        packed = _pack(self.ring, rows, list(range(n)), total, w)
        result = (sigma, packed, w, total)
        self._packed[key] = result
        return result

    def __mul__(self, other: "Series1") -> "Series1":
        self._check_ring(other)
        dout = min(self.D, other.D)
        sa, pa, w, total = self._packed_form(dout)
        sb, pb, w2, _ = other._packed_form(dout)
        assert w == w2
        cells = _unpack(self.ring, pa * pb, total, w, select=np.arange(dout + 1))
        co = _reduce_wide(self.ring, cells)
        sh = np.full(dout + 1, sa + sb, dtype=np.int64)
        pr = np.minimum(
            _minplus(self._t.pr[:dout + 1], other._t.vlb()[:dout + 1], dout),
            _minplus(other._t.pr[:dout + 1], self._t.vlb()[:dout + 1], dout),
        )
        # the packed product is exact only modulo pi^(e*Mc + sa + sb): every
        # slot is stored at the common shift, so coefficients with shallower
        # shifts lose their tail there
        np.minimum(pr, self.ring.e * self.ring.Mc + sa + sb, out=pr)
        t = _CoeffTable(self.ring, sh, co, pr)
        t.normalize()
        return Series1(self.ring, dout, t)

    def _mul_schoolbook(self, other: "Series1") -> "Series1":
        """Reference O(D^2) product used to cross-check the packed path."""
        self._check_ring(other)
        dout = min(self.D, other.D)
        acc = [KValue.from_int(self.ring, 0) for _ in range(dout + 1)]
        for i in range(min(self.D, dout) + 1):
            ci = self.coeff(i)
            if ci.is_zero_at_prec() and ci.prec >= self.ring.N + ci.shift:
                pass
            for j in range(min(other.D, dout - i) + 1):
                acc[i + j] = acc[i + j] + ci * other.coeff(j)
        return Series1.from_coeffs(self.ring, dout, dict(enumerate(acc)))

    def __pow__(self, n: int) -> "Series1":
        if n < 0:
            raise ValueError("negative series powers are not defined here")
        out = Series1.from_coeffs(self.ring, self.D, {0: 1})
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- composition -------------------------------------------------------------

    def compose(self, g: "Series1") -> "Series1":
        """F o g; requires g(0) = 0 exactly (stored zero constant term)."""
        self._check_ring(g)
        if not g.constant_is_zero():
            raise PadicError("composition requires g(0) = 0")
        dout = min(self.D, g.D)
        g = g.truncate(dout)
        t = self._t
        idxs = [i for i in range(1, min(self.D, dout) + 1) if any(t.co[i])]
        out = Series1.from_coeffs(self.ring, dout, {0: self._t.kvalue(0)})
        powers: dict[int, Series1] = {1: g}

        def power(n: int) -> Series1:
            hit = powers.get(n)
            if hit is not None:
                return hit
            half = power(n // 2)
            res = half * half if n % 2 == 0 else half * power(n - n // 2)
            powers[n] = res
            return res

        # dense chains are cheaper built incrementally
        if len(idxs) > dout // 2 and idxs:
            cur, k = g, 1
            for i in idxs:
                while k < i:
                    cur = cur * g
                    k += 1
                powers[i] = cur
        for i in idxs:
            out = out + power(i).scalar_mul(t.kvalue(i))
        # uncertainty of stored-zero coefficients still floors the output
        for i in range(min(self.D, dout) + 1):
            if not any(t.co[i]) and t.pr[i] < self.ring.N:
                out._t.pr[i:] = np.minimum(out._t.pr[i:], t.pr[i])
                out._t._vlb = None
        return out

    def iterate(self, n: int) -> "Series1":
        """n-fold self-composition (n >= 0)."""
        if n < 0:
            raise ValueError("negative iteration needs comp_inverse")
        out = Series1.identity(self.ring, self.D)
        for _ in range(n):
            out = self.compose(out)
        return out

    def derivative(self) -> "Series1":
        """Termwise derivative, truncated at D-1 (the top coefficient of the
        derivative is not determined by a degree-D truncation)."""
        if self.D < 1:
            raise PadicError("derivative of a degree-0 truncation")
        ring = self.ring
        t = self._t
        n = self.D
        sh = np.zeros(n, dtype=np.int64)
        co = np.zeros((n, ring.nb), dtype=object)
        pr = np.full(n, ring.N, dtype=np.int64)
        for m in range(1, self.D + 1):
            mv = t.kvalue(m) * m
            sh[m - 1], co[m - 1], pr[m - 1] = mv.shift, np.array(mv.coords, dtype=object), mv.prec
        out = _CoeffTable(ring, sh, co, pr)
        out.normalize()
        return Series1(ring, n - 1, out)

    def inv_series(self) -> "Series1":
        """Multiplicative inverse; constant term must have decidable valuation."""
        c0 = self.coeff(0)
        if c0.val() is None:
            raise PrecisionError("inverse of a series whose constant term is 0 at precision")
        one = Series1.from_coeffs(self.ring, self.D, {0: 1})
        z = Series1.from_coeffs(self.ring, self.D,
                                {0: KValue.from_int(self.ring, 1).divide_by(c0)})
        d = 1
        while d <= 2 * self.D:
            z = z * (one + (one - self * z))  # z(2 - Fz)
            d *= 2
        return z

    def comp_inverse(self) -> "Series1":
        """Compositional inverse: F o result = result o F = T up to degree D.

        Requires F(0) = 0 and F'(0) of decidable valuation; a non-unit F'(0)
        yields a result over K (flagged non-integral).  Solved triangularly:
        fixing the coefficient of T^m in F(H) = T costs one division by F'(0)
        per degree.
        """
        if not self.constant_is_zero():
            raise PadicError("compositional inverse requires F(0) = 0")
        f1 = self.coeff(1)
        if f1.val() is None:
            raise PrecisionError("F'(0) indistinguishable from 0 at precision")
        inv1 = KValue.from_int(self.ring, 1).divide_by(f1)
        coeffs = {1: inv1}
        h = Series1.from_coeffs(self.ring, self.D, coeffs)
        for m in range(2, self.D + 1):
            got = self.truncate(m).compose(h.truncate(m)).coeff(m)
            coeffs[m] = -(got.divide_by(f1))
            h = Series1.from_coeffs(self.ring, self.D, coeffs)
        return h

    # -- comparisons ----------------------------------------------------------------

    def differs_at(self, other: "Series1", need: int = 1):
        """None if equal up to min truncation at available precision (floors
        >= need), else (index, 'differs').  PrecisionError when undecidable."""
        diff = self - other
        t = diff._t
        for i in range(diff.D + 1):
            v = t.kvalue(i).val()
            if v is not None:
                return i, "differs"
            if t.pr[i] < need:
                raise PrecisionError(
                    f"equality of coefficient {i} undecidable: floor {t.pr[i]} < {need}")
        return None

    def __eq__(self, other):
        if not isinstance(other, Series1):
            return NotImplemented
        try:
            return self.differs_at(other, need=0) is None
        except RingMismatchError:
            return False

    __hash__ = None

    # -- reductions -------------------------------------------------------------------

    def residue_reduce(self) -> "ResidueSeries":
        """Coefficientwise reduction modulo pi; input must be integral."""
        verdict, idx = self.integral_verdict()
        if verdict == "no":
            raise NotUnitError(f"series is not integral at coefficient {idx}")
        if verdict == "unknown":
            raise PrecisionError(f"integrality of coefficient {idx} undecidable")
        out = []
        for i in range(self.D + 1):
            kv = self._t.kvalue(i)
            if kv.prec < 1:
                raise PrecisionError(f"coefficient {i} has no certified digit")
            out.append(kv.to_ok().residue())
        return ResidueSeries(self.ring, self.D, tuple(out))

    def wideg(self) -> int | None:
        """Weierstrass degree: smallest i <= D with val(c_i) = 0; None means
        every coefficient up to D is divisible by pi (">= D+1")."""
        verdict, idx = self.integral_verdict()
        if verdict == "no":
            raise NotUnitError(f"wideg of a non-integral series (coefficient {idx})")
        if verdict == "unknown":
            raise PrecisionError(f"integrality of coefficient {idx} undecidable")
        t = self._t
        for i in range(self.D + 1):
            if t.pr[i] < 1:
                raise PrecisionError(f"coefficient {i} has no certified digit")
            kv = t.kvalue(i)
            v = kv.val()
            if v == 0:
                return i
        return None

    def ord(self) -> int:
        """Lowest index with a nonzero-at-precision coefficient."""
        for i in range(self.D + 1):
            if self._t.kvalue(i).val() is not None:
                return i
        raise PadicError("series is 0 at the available precision")

    # -- serialization -------------------------------------------------------------------

    def literal(self) -> str:
        parts = []
        for i in range(self.D + 1):
            kv = self._t.kvalue(i)
            if any(kv.coords):
                parts.append(f"{i}:{_coeff_literal(self.ring, kv)}")
        return f"deg {self.D}; {self.ring.tag}; " + ", ".join(parts)

    @classmethod
    def parse(cls, ring: RingSpec, text: str) -> "Series1":
        head, tag, body = _split_literal(text, "deg")
        if tag != ring.tag:
            raise ValueError(f"series literal ring tag {tag!r} does not match {ring.tag!r}")
        coeffs = {}
        for item in body:
            istr, lit = item.split(":", 1)
            coeffs[int(istr)] = _parse_coeff(ring, lit)
        return cls.from_coeffs(ring, head, coeffs)

    def __repr__(self):
        nz = self.nonzero_indices()
        show = ", ".join(f"T^{i}" for i in nz[:6])
        more = "..." if len(nz) > 6 else ""
        return f"Series1(D={self.D}, support=[{show}{more}])"


def _binom_int(a: int, k: int) -> int:
    num, den = 1, 1
    for t in range(k):
        num *= a - t
        den *= t + 1
    return num // den


def _coeff_literal(ring: RingSpec, kv: KValue) -> str:
    body = ring.element_literal(OKValue(ring, kv.coords, ring.N))
    return f"pi^{kv.shift}*{body}" if kv.shift else body


def _parse_coeff(ring: RingSpec, lit: str) -> KValue:
    lit = lit.strip()
    if lit.startswith("pi^"):
        head, body = lit.split("*", 1)
        shift = int(head[3:])
        x = ring.parse_element(body)
        return KValue(ring, shift, x.coords, ring.N + shift)
    return KValue.from_ok(ring.parse_element(lit))


def _split_literal(text: str, kind: str):
    bits = [b.strip() for b in text.strip().split(";")]
    if len(bits) < 2 or not bits[0].startswith(kind + " "):
        raise ValueError(f"malformed series literal: {text!r}")
    d = int(bits[0][len(kind):].strip())
    tag = bits[1]
    body = []
    if len(bits) > 2 and bits[2]:
        body = [x.strip() for x in bits[2].split(",") if x.strip()]
    return d, tag, body


# ----------------------------------------------------------------------
# residue-field series
# ----------------------------------------------------------------------

class ResidueSeries:
    """Series over the residue field k = F_q, truncated at degree D."""

    __slots__ = ("ring", "D", "coeffs")

    def __init__(self, ring: RingSpec, D: int, coeffs: tuple):
        self.ring = ring
        self.D = D
        self.coeffs = coeffs

    @classmethod
    def from_ints(cls, ring: RingSpec, D: int, coeffs: dict) -> "ResidueSeries":
        out = [ring.residue_zero()] * (D + 1)
        for i, c in coeffs.items():
            if 0 <= i <= D:
                out[i] = ring.residue_from_int(c) if isinstance(c, int) else c
        return cls(ring, D, tuple(out))

    @classmethod
    def t_power(cls, ring: RingSpec, n: int, D: int) -> "ResidueSeries":
        return cls.from_ints(ring, D, {n: 1})

    def support(self) -> list[int]:
        return [i for i, c in enumerate(self.coeffs) if not c.is_zero()]

    def is_zero(self) -> bool:
        return not self.support()

    def __eq__(self, other):
        if not isinstance(other, ResidueSeries):
            return NotImplemented
        n = min(self.D, other.D) + 1
        return (self.ring._same(other.ring)
                and all(a == b for a, b in zip(self.coeffs[:n], other.coeffs[:n])))

    __hash__ = None

    def differs_at(self, other: "ResidueSeries"):
        n = min(self.D, other.D) + 1
        for i in range(n):
            if self.coeffs[i] != other.coeffs[i]:
                return i
        return None

    def __repr__(self):
        return f"ResidueSeries(D={self.D}, support={self.support()[:8]})"


def residue_decompose(fbar: ResidueSeries):
    """Write fbar = gbar(T^(p^d)) with the largest d >= 0 for which the inner
    series has invertible derivative at 0; returns (gbar, d).

    Errors when fbar is 0, fbar(0) != 0, or no exponent works below the
    truncation.
    """
    ring = fbar.ring
    sup = fbar.support()
    if not sup:
        raise PadicError("residue decomposition of the zero series")
    if 0 in sup:
        raise PadicError("residue decomposition requires fbar(0) = 0")
    p = ring.p
    dmax = min(_int_val(m, p) for m in sup)
    for d in range(dmax, -1, -1):
        pd = p**d
        if any(m % pd for m in sup):
            continue
        inner = {m // pd: fbar.coeffs[m] for m in sup}
        if 1 in inner and not inner[1].is_zero():
            return ResidueSeries.from_ints(ring, fbar.D // pd, inner), d
    raise PadicError(
        "no residue decomposition with invertible inner derivative exists "
        "below this truncation")


def _int_val(m: int, p: int) -> int:
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


# ----------------------------------------------------------------------
# Newton polygons
# ----------------------------------------------------------------------

class NewtonPolygon:
    """Lower convex hull of (index, valuation) points.

    ``vertices``: tuple of (index, Fraction valuation), slopes strictly
    increasing left to right.  ``segments``: tuple of (slope, horizontal
    length); a segment of slope -s and length l certifies l roots of
    valuation s (with multiplicity) in the open unit disk.
    """

    __slots__ = ("vertices", "segments")

    def __init__(self, vertices):
        self.vertices = tuple((int(i), Fraction(v)) for i, v in vertices)
        segs = []
        for (i1, v1), (i2, v2) in zip(self.vertices, self.vertices[1:]):
            segs.append((Fraction(v2 - v1, i2 - i1), i2 - i1))
        self.segments = tuple(segs)

    @property
    def total_length(self) -> int:
        return sum(l for _, l in self.segments)

    def roots_by_valuation(self) -> list[tuple[Fraction, int]]:
        return [(-s, l) for s, l in self.segments]

    def height_of_segment(self, k: int) -> Fraction:
        s, l = self.segments[k]
        return -s * l

    def hull_value(self, i: int) -> Fraction | None:
        """Height of the hull at abscissa i (None outside the span)."""
        for (i1, v1), (i2, v2) in zip(self.vertices, self.vertices[1:]):
            if i1 <= i <= i2:
                return v1 + Fraction(v2 - v1, i2 - i1) * (i - i1)
        if self.vertices and i == self.vertices[0][0]:
            return self.vertices[0][1]
        return None

    def to_dict(self) -> dict:
        return {
            "vertices": [[i, [v.numerator, v.denominator]] for i, v in self.vertices],
            "segments": [[[s.numerator, s.denominator], l] for s, l in self.segments],
        }

    def __eq__(self, other):
        return isinstance(other, NewtonPolygon) and self.vertices == other.vertices

    __hash__ = None

    def __repr__(self):
        vs = " -> ".join(f"({i},{v})" for i, v in self.vertices)
        return f"NewtonPolygon[{vs}]"


def newton_polygon(series: Series1) -> NewtonPolygon:
    """Newton polygon of a 1-variable series with integral coefficients.

    Points run from the lowest nonzero index to the Weierstrass degree when
    one exists (beyond the first unit coefficient the hull is complete).
    Coefficients whose valuation is unknown at precision must already lie
    above the hull, otherwise the polygon is undecidable and an error names
    the offending index.
    """
    wd = series.wideg()
    t = series._t
    last = wd if wd is not None else series.D
    pts = []
    unknown = []
    for i in range(last + 1):
        kv = t.kvalue(i)
        v = kv.val()
        if v is not None:
            pts.append((i, v))
        else:
            unknown.append((i, kv.prec))
    if not pts:
        raise PadicError("newton polygon of a series that is 0 at precision")

    hull = _lower_hull(pts)
    poly = NewtonPolygon(hull)
    for i, floor in unknown:
        h = poly.hull_value(i)
        if h is not None and Fraction(floor) <= h:
            raise PrecisionError(
                f"newton polygon undecidable: coefficient {i} known only to "
                f"precision {floor}, hull needs height > {h}")
    return poly


def _lower_hull(pts):
    pts = sorted(pts)
    hull = []
    for x, y in pts:
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            if (y2 - y1) * (x - x1) >= (y - y1) * (x2 - x1):
                hull.pop()
            else:
                break
        hull.append((x, y))
    # drop interior points that merely touch the hull line
    out = [hull[0]]
    for k in range(1, len(hull) - 1):
        (x1, y1), (x2, y2), (x3, y3) = out[-1], hull[k], hull[k + 1]
        if (y2 - y1) * (x3 - x1) == (y3 - y1) * (x2 - x1):
            continue
        out.append(hull[k])
    if len(hull) > 1:
        out.append(hull[-1])
    return out


# ----------------------------------------------------------------------
# two-variable series
# ----------------------------------------------------------------------

@lru_cache(maxsize=32)
def _grid(D: int):
    """Monomial bookkeeping for total-degree-D bivariate series."""
    cells = [(a, b) for b in range(D + 1) for a in range(D + 1 - b)]
    index = {cell: k for k, cell in enumerate(cells)}
    a_arr = np.array([a for a, _ in cells], dtype=np.int64)
    b_arr = np.array([b for _, b in cells], dtype=np.int64)
    stride = 2 * D + 1
    slots = a_arr + stride * b_arr
    return cells, index, a_arr, b_arr, stride, slots


class Series2:
    """Truncated bivariate series sum c_ab X^a Y^b over total degree <= D."""

    __slots__ = ("ring", "D", "_t", "_packed")

    def __init__(self, ring: RingSpec, D: int, table: _CoeffTable):
        self.ring = ring
        self.D = D
        self._t = table
        self._packed = {}

    @classmethod
    def from_coeffs(cls, ring: RingSpec, D: int, coeffs: dict) -> "Series2":
        cells, index, *_ = _grid(D)
        n = len(cells)
        sh = np.zeros(n, dtype=np.int64)
        co = np.zeros((n, ring.nb), dtype=object)
        pr = np.full(n, ring.N, dtype=np.int64)
        for (a, b), v in coeffs.items():
            if a + b > D:
                continue
            kv = _coerce_coeff(ring, v)
            k = index[(a, b)]
            sh[k], co[k], pr[k] = kv.shift, np.array(kv.coords, dtype=object), kv.prec
        t = _CoeffTable(ring, sh, co, pr)
        t.normalize()
        return cls(ring, D, t)

    @classmethod
    def zero(cls, ring: RingSpec, D: int) -> "Series2":
        return cls.from_coeffs(ring, D, {})

    @classmethod
    def x_plus_y(cls, ring: RingSpec, D: int) -> "Series2":
        return cls.from_coeffs(ring, D, {(1, 0): 1, (0, 1): 1})

    def coeff(self, a: int, b: int) -> KValue:
        _, index, *_ = _grid(self.D)
        return self._t.kvalue(index[(a, b)])

    def cells(self):
        return _grid(self.D)[0]

    def nonzero_cells(self) -> list[tuple[int, int]]:
        cells = _grid(self.D)[0]
        return [cells[k] for k in range(len(cells)) if any(self._t.co[k])]

    def integral_verdict(self):
        t = self._t
        cells = _grid(self.D)[0]
        for k in range(len(cells)):
            if t.sh[k] < 0:
                v = self.ring._coords_val(t.co[k])
                if v is not None and v + t.sh[k] < 0 and v + t.sh[k] < t.pr[k]:
                    return "no", cells[k]
                if v is None and t.pr[k] < 0:
                    return "unknown", cells[k]
        return "yes", None

    @property
    def integral(self) -> bool | None:
        verdict, _ = self.integral_verdict()
        return {"yes": True, "no": False, "unknown": None}[verdict]

    def truncate(self, D: int) -> "Series2":
        if D >= self.D:
            return self
        _, index_old, *_ = _grid(self.D)
        cells_new = _grid(D)[0]
        sel = [index_old[c] for c in cells_new]
        t = self._t
        return Series2(self.ring, D, _CoeffTable(
            self.ring, t.sh[sel].copy(), t.co[sel].copy(), t.pr[sel].copy()))

    def _pad_to(self, D: int) -> "Series2":
        """Extend with exact-zero cells.  Internal: callers must guarantee
        the padded range cannot influence cells they keep."""
        if D <= self.D:
            return self.truncate(D)
        _, index_old, *_ = _grid(self.D)
        cells_new, *_ = _grid(D)
        n = len(cells_new)
        sh = np.zeros(n, dtype=np.int64)
        co = np.zeros((n, self.ring.nb), dtype=object)
        pr = np.full(n, self.ring.N, dtype=np.int64)
        t = self._t
        for k, cell in enumerate(cells_new):
            old = index_old.get(cell)
            if old is not None:
                sh[k], co[k], pr[k] = t.sh[old], t.co[old], t.pr[old]
        return Series2(self.ring, D, _CoeffTable(self.ring, sh, co, pr))

    def swap(self) -> "Series2":
        """G(Y, X)."""
        cells, index, *_ = _grid(self.D)
        sel = [index[(b, a)] for (a, b) in cells]
        t = self._t
        return Series2(self.ring, self.D, _CoeffTable(
            self.ring, t.sh[sel].copy(), t.co[sel].copy(), t.pr[sel].copy()))

    def set_y_zero(self) -> Series1:
        """G(X, 0) as a one-variable series."""
        cells, index, *_ = _grid(self.D)
        t = self._t
        sh = np.zeros(self.D + 1, dtype=np.int64)
        co = np.zeros((self.D + 1, self.ring.nb), dtype=object)
        pr = np.full(self.D + 1, self.ring.N, dtype=np.int64)
        for a in range(self.D + 1):
            k = index[(a, 0)]
            sh[a], co[a], pr[a] = t.sh[k], t.co[k], t.pr[k]
        return Series1(self.ring, self.D, _CoeffTable(self.ring, sh, co, pr))

    def _check_ring(self, other):
        if not self.ring._same(other.ring):
            raise RingMismatchError("series over different rings")

    def _binop(self, other: "Series2", sign: int) -> "Series2":
        self._check_ring(other)
        dout = min(self.D, other.D)
        a, b = self.truncate(dout), other.truncate(dout)
        n = len(_grid(dout)[0])
        sh, ca, cb = _align_tables(a._t, b._t, n)
        co = (ca + cb) % self.ring.pMc if sign > 0 else (ca - cb) % self.ring.pMc
        pr = np.minimum(a._t.pr, b._t.pr)
        t = _CoeffTable(self.ring, sh, co, pr)
        t.normalize()
        return Series2(self.ring, dout, t)

    def __add__(self, other):
        return self._binop(other, +1)

    def __sub__(self, other):
        return self._binop(other, -1)

    def __neg__(self):
        t = self._t
        return Series2(self.ring, self.D, _CoeffTable(
            self.ring, t.sh.copy(), (-t.co) % self.ring.pMc, t.pr.copy()))

    def scalar_mul(self, c) -> "Series2":
        kv = _coerce_coeff(self.ring, c)
        t = self._t
        co = _rows_times_elem(self.ring, t.co, kv.coords)
        sh = t.sh + kv.shift
        pr = np.minimum(t.pr + kv.vlb(), kv.prec + t.vlb())
        out = _CoeffTable(self.ring, sh, co, pr)
        out.normalize()
        return Series2(self.ring, self.D, out)

    def _packed_form(self, dout: int):
        w = _cell_bytes(self.ring, len(_grid(dout)[0]))
        key = (dout, w)
        hit = self._packed.get(key)
        if hit is not None:
            return hit
        src = self.truncate(dout)
        t = src._t
        *_, stride, slots = _grid(dout)
        sigma = int(t.sh.min()) if len(t.sh) else 0
        rows = t.co
        if sigma < 0:
            rows = rows.copy()
            for i in range(len(rows)):
                d = int(t.sh[i] - sigma)
                if d:
                    rows[i] = np.array(self.ring._coords_pi_mul(tuple(rows[i]), d),
                                       dtype=object)
        packed = _pack(self.ring, rows, slots, stride * stride, w)
        result = (sigma, packed, w, stride, slots)
        self._packed[key] = result
        return result

    def __mul__(self, other: "Series2") -> "Series2":
        self._check_ring(other)
        dout = min(self.D, other.D)
        sa, pa, w, stride, slots = self._packed_form(dout)
        sb, pb, w2, _, _ = other._packed_form(dout)
        assert w == w2
        cells = _unpack(self.ring, pa * pb, stride * stride, w, select=slots)
        co = _reduce_wide(self.ring, cells)
        n = len(slots)
        sh = np.full(n, sa + sb, dtype=np.int64)
        at, bt = self.truncate(dout)._t, other.truncate(dout)._t
        # floors graded by total degree: min-plus of the per-degree aggregates
        deg = _grid(dout)[2] + _grid(dout)[3]
        pr_deg = _by_degree_min(at.pr, deg, dout)
        vl_deg_a = _by_degree_min(at.vlb(), deg, dout)
        pr_deg_b = _by_degree_min(bt.pr, deg, dout)
        vl_deg_b = _by_degree_min(bt.vlb(), deg, dout)
        floor_deg = np.minimum(_minplus(pr_deg, vl_deg_b, dout),
                               _minplus(pr_deg_b, vl_deg_a, dout))
        np.minimum(floor_deg, self.ring.e * self.ring.Mc + sa + sb, out=floor_deg)
        pr = floor_deg[deg]
        t = _CoeffTable(self.ring, sh, co, pr.astype(np.int64))
        t.normalize()
        return Series2(self.ring, dout, t)

    def __pow__(self, n: int) -> "Series2":
        if n < 0:
            raise ValueError("negative series powers are not defined here")
        out = Series2.from_coeffs(self.ring, self.D, {(0, 0): 1})
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def inv_series(self) -> "Series2":
        """Multiplicative inverse; constant term must have decidable valuation."""
        c0 = self.coeff(0, 0)
        if c0.val() is None:
            raise PrecisionError("inverse of a series whose constant term is 0 at precision")
        one = Series2.from_coeffs(self.ring, self.D, {(0, 0): 1})
        z = Series2.from_coeffs(self.ring, self.D,
                                {(0, 0): KValue.from_int(self.ring, 1).divide_by(c0)})
        d = 1
        while d <= 2 * self.D:
            z = z * (one + (one - self * z))
            d *= 2
        return z

    def differs_at(self, other: "Series2", need: int = 1):
        diff = self - other
        t = diff._t
        cells = _grid(diff.D)[0]
        for k in range(len(cells)):
            v = t.kvalue(k).val()
            if v is not None:
                return cells[k], "differs"
            if t.pr[k] < need:
                raise PrecisionError(
                    f"equality of coefficient {cells[k]} undecidable: "
                    f"floor {t.pr[k]} < {need}")
        return None

    def __eq__(self, other):
        if not isinstance(other, Series2):
            return NotImplemented
        return self.differs_at(other, need=0) is None

    __hash__ = None

    def literal(self) -> str:
        parts = []
        cells = _grid(self.D)[0]
        for k, (a, b) in enumerate(cells):
            kv = self._t.kvalue(k)
            if any(kv.coords):
                parts.append(f"{a}.{b}:{_coeff_literal(self.ring, kv)}")
        return f"deg2 {self.D}; {self.ring.tag}; " + ", ".join(parts)

    @classmethod
    def parse(cls, ring: RingSpec, text: str) -> "Series2":
        head, tag, body = _split_literal(text, "deg2")
        if tag != ring.tag:
            raise ValueError(f"series literal ring tag {tag!r} does not match {ring.tag!r}")
        coeffs = {}
        for item in body:
            cell, lit = item.split(":", 1)
            astr, bstr = cell.split(".")
            coeffs[(int(astr), int(bstr))] = _parse_coeff(ring, lit)
        return cls.from_coeffs(ring, head, coeffs)

    def __repr__(self):
        nz = self.nonzero_cells()
        show = ", ".join(f"X^{a}Y^{b}" for a, b in nz[:5])
        more = "..." if len(nz) > 5 else ""
        return f"Series2(D={self.D}, support=[{show}{more}])"


# ----------------------------------------------------------------------
# substitution
# ----------------------------------------------------------------------

def compose1_into2(F: Series1, G: Series2, powers: list[Series2] | None = None) -> Series2:
    """F(G(X, Y)); requires G(0,0) = 0.  ``powers`` may supply precomputed
    powers of G (powers[k] = G^k) to share across calls."""
    if any(G._t.co[0]):
        raise PadicError("substitution requires zero constant term")
    dout = min(F.D, G.D)
    Gt = G.truncate(dout)
    out = Series2.from_coeffs(F.ring, dout, {(0, 0): F.coeff(0)})
    idxs = [i for i in range(1, dout + 1) if i <= F.D and any(F._t.co[i])]
    local: dict[int, Series2] = {1: Gt}

    def power(n: int) -> Series2:
        if powers is not None and n < len(powers) and powers[n] is not None:
            return powers[n].truncate(dout)
        hit = local.get(n)
        if hit is None:
            half = power(n // 2)
            hit = half * half if n % 2 == 0 else half * power(n - n // 2)
            local[n] = hit
        return hit

    if len(idxs) > dout // 2 and idxs:
        cur, k = Gt, 1
        for i in idxs:
            while k < i:
                cur = cur * Gt
                k += 1
            local[i] = cur
    for i in idxs:
        out = out + power(i).scalar_mul(F.coeff(i))
    for i in range(min(F.D, dout) + 1):
        if not any(F._t.co[i]) and F._t.pr[i] < F.ring.N:
            out._t.pr = np.minimum(out._t.pr, F._t.pr[i])
            out._t._vlb = None
    return out


def _powers1(A: Series1, upto: int) -> list[Series1]:
    out = [Series1.from_coeffs(A.ring, A.D, {0: 1}), A]
    for _ in range(upto - 1):
        out.append(out[-1] * A)
    return out


def cross_subst(G: Series2, A: Series1, B: Series1,
                apowers: list[Series1] | None = None,
                bpowers: list[Series1] | None = None) -> Series2:
    """G(A(X), B(Y)) for one-variable A (read in X) and B (read in Y), both
    with zero constant term.

    Implemented as sum_j (sum_i g_ij A^i) (x) B^j — coefficient-table matrix
    products per coordinate pair, so no bivariate multiplications happen.
    ``apowers``/``bpowers`` may supply precomputed power lists (index k =
    k-th power) to share across calls; they are truncated as needed.
    """
    if not A.constant_is_zero() or not B.constant_is_zero():
        raise PadicError("substitution requires zero constant terms")
    ring = G.ring
    dout = min(G.D, A.D, B.D)
    Gt = G.truncate(dout)
    cells, index, a_arr, b_arr, _, _ = _grid(dout)
    nz = Gt.nonzero_cells()
    amax = max((a for a, b in nz), default=1)
    bmax = max((b for a, b in nz), default=1)
    if apowers is not None and len(apowers) > amax:
        Ap = [P.truncate(dout) for P in apowers[: amax + 1]]
    else:
        Ap = _powers1(A.truncate(dout), max(amax, 1))
    if bpowers is not None and len(bpowers) > bmax:
        Bp = [P.truncate(dout) for P in bpowers[: bmax + 1]]
    else:
        Bp = _powers1(B.truncate(dout), max(bmax, 1))

    # common shifts so the matrix products run over plain mantissas
    sigA = min(int(P._t.sh.min()) for P in Ap)
    sigB = min(int(P._t.sh.min()) for P in Bp)
    sigG = int(Gt._t.sh.min())

    def mant_matrix(powers, sig):
        M = np.zeros((len(powers), dout + 1, ring.nb), dtype=object)
        for n, P in enumerate(powers):
            t = P._t
            for d in range(dout + 1):
                if any(t.co[d]):
                    row = t.co[d]
                    lift = int(t.sh[d] - sig)
                    if lift:
                        row = np.array(ring._coords_pi_mul(tuple(row), lift), dtype=object)
                    M[n, d] = row
        return M

    MA = mant_matrix(Ap, sigA)          # (amax+1, dout+1, nb)
    MB = mant_matrix(Bp, sigB)          # (bmax+1, dout+1, nb)

    # S[j] = sum_i g_ij * A^i, mantissas at shift sigG + sigA
    tG = Gt._t
    S = np.zeros((bmax + 1, dout + 1, ring.nb), dtype=object)
    for k, (a, b) in enumerate(cells):
        if any(tG.co[k]):
            gc = tuple(tG.co[k])
            lift = int(tG.sh[k] - sigG)
            if lift:
                gc = ring._coords_pi_mul(gc, lift)
            S[b] = S[b] + _rows_times_elem(ring, MA[a], gc)
    S = S % ring.pMc

    # out[a, b] = sum_j S[j][a] * B^j[b]: matmul over j per coordinate pair
    nb = ring.nb
    out_co = np.zeros((len(cells), nb), dtype=object)
    Sm = S.transpose(1, 0, 2)           # (a, j, nb)
    for k1 in range(nb):
        X = Sm[:, :, k1]                # (a, j)
        if not X.any():
            continue
        for k2 in range(nb):
            Y = MB[:, :, k2]            # (j, b)
            if not Y.any():
                continue
            Z = _matmul_mod(X, Y, ring.pMc)
            vals = Z[a_arr, b_arr]
            if nb == 1:
                out_co[:, 0] = (out_co[:, 0] + vals) % ring.pMc
            else:
                tens = ring._tensor[k1][k2]
                for k in range(nb):
                    t = tens[k]
                    if t:
                        out_co[:, k] = (out_co[:, k] + vals * t) % ring.pMc

    vA = min(int(P._t.vlb().min()) for P in Ap)
    vB = min(int(P._t.vlb().min()) for P in Bp)
    pA = min(int(P._t.pr.min()) for P in Ap)
    pB = min(int(P._t.pr.min()) for P in Bp)
    floor = min(int(tG.pr.min()) + vA + vB,
                pA + int(tG.vlb().min()) + vB,
                pB + int(tG.vlb().min()) + vA,
                ring.e * ring.Mc + sigG + sigA + sigB)
    sh = np.full(len(cells), sigG + sigA + sigB, dtype=np.int64)
    pr = np.full(len(cells), floor, dtype=np.int64)
    t = _CoeffTable(ring, sh, out_co, pr)
    t.normalize()
    return Series2(ring, dout, t)


def subst2(G: Series2, A, B):
    """Substitute A for X and B for Y in G.

    With two one-variable inputs the result collapses to one variable (A and
    B are read in the same variable); with Series2 inputs the result is
    bivariate.  Both substitutes need zero constant terms.
    """
    if isinstance(A, Series1) and isinstance(B, Series1):
        if not A.constant_is_zero() or not B.constant_is_zero():
            raise PadicError("substitution requires zero constant terms")
        ring = G.ring
        dout = min(G.D, A.D, B.D)
        Gt = G.truncate(dout)
        nz = Gt.nonzero_cells()
        amax = max((a for a, b in nz), default=1)
        bmax = max((b for a, b in nz), default=1)
        Ap = _powers1(A.truncate(dout), max(amax, 1))
        Bt = B.truncate(dout)
        # Horner in B over the inner sums S_j(A) = sum_i g_ij A^i
        out = Series1.zero(ring, dout)
        for j in range(bmax, -1, -1):
            s_j = Series1.zero(ring, dout)
            for a, b in nz:
                if b == j:
                    s_j = s_j + Ap[a].scalar_mul(Gt.coeff(a, b))
            out = out * Bt + s_j if j < bmax else s_j
        return out
    if isinstance(A, Series2) and isinstance(B, Series2):
        if any(A._t.co[0]) or any(B._t.co[0]):
            raise PadicError("substitution requires zero constant terms")
        ring = G.ring
        dout = min(G.D, A.D, B.D)
        Gt, At, Bt = G.truncate(dout), A.truncate(dout), B.truncate(dout)
        nz = Gt.nonzero_cells()
        bmax = max((b for a, b in nz), default=0)
        # Horner in B over inner sums S_j(A) = sum_i g_ij A^i
        Apint: dict[int, Series2] = {}

        def apow(n):
            if n == 0:
                return Series2.from_coeffs(ring, dout, {(0, 0): 1})
            if n == 1:
                return At
            hit = Apint.get(n)
            if hit is None:
                hit = apow(n // 2) * apow(n - n // 2)
                Apint[n] = hit
            return hit

        out = Series2.zero(ring, dout)
        for j in range(bmax, -1, -1):
            s_j = Series2.zero(ring, dout)
            for a, b in nz:
                if b == j:
                    s_j = s_j + apow(a).scalar_mul(Gt.coeff(a, b))
            out = out * Bt + s_j if j < bmax else s_j
        return out
    raise TypeError("subst2 wants two Series1 or two Series2 substitutes")
