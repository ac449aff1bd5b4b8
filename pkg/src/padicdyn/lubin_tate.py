"""Lubin-Tate formal groups: construction, endomorphisms, logarithms.

The group law and endomorphisms attached to a Frobenius series f (f = pi*T
+ O(T^2), f = T^q mod pi) are built degree by degree: the homogeneous
degree-r correction is defect_r / (pi^r - pi), and the divisor splits as
pi * (pi^(r-1) - 1) with a unit second factor, so each degree costs exactly
one pi-digit of guaranteed precision in the worst case.

Precision floors for these solvers come from a first-order sensitivity
analysis rather than termwise operation floors (termwise bookkeeping cannot
see that the binomial cross terms and q = p^f each carry a factor pi, and
would decay linearly in the degree):

* f-side: perturbing the partial solution by delta changes f(solution) by
  f'(solution) * delta + O(delta^2), and f' = pi * (unit series) because
  f = T^q mod pi, so this contributes floor 1 + min(P).
* substitution side: the map S -> S(f(X), f(Y)) (or S -> S o g) is linear
  in S's coefficients, and the multiplier [f^i f^j] at total degree r with
  i + j = s has valuation >= max(0, ceil((s*q - r)/(q - 1))): a factor of
  f contributes valuation 1 unless it donates its exact-degree-q unit term.
* higher order: O(delta^2) terms have integral coefficient tensors, floor
  2 * min(P).

Both bounds are rigorous worst cases; the model simply does not multiply
the count of division losses.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .padic import (
    KValue,
    NotUnitError,
    OKValue,
    PadicError,
    PrecisionError,
    RingSpec,
)
from .series import (
    Series1,
    Series2,
    _CoeffTable,
    _grid,
    _matmul_mod,
    _powers1,
    compose1_into2,
    cross_subst,
)

__all__ = [
    "LTSeries",
    "GroupLaw",
    "LogSeries",
    "is_lt_series",
    "lt_group_law",
    "lt_endo",
    "formal_log",
    "formal_exp",
    "group_from_log",
    "endo_check",
    "solve_from_log",
]


# ----------------------------------------------------------------------
# Lubin-Tate series recognition
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class LTDiagnostics:
    ok: bool
    reason: str | None = None
    index: int | None = None

    def __bool__(self):
        return self.ok


def is_lt_series(f: Series1) -> LTDiagnostics:
    """Check f = pi*T mod degree 2 and f = T^q mod pi up to the truncation.

    Diagnostics name the first violated coefficient; undecidable
    coefficients raise PrecisionError.
    """
    ring = f.ring
    if not f.constant_is_zero():
        return LTDiagnostics(False, "constant term is not zero", 0)
    verdict, idx = f.integral_verdict()
    if verdict == "no":
        return LTDiagnostics(False, "coefficient is not integral", idx)
    if verdict == "unknown":
        raise PrecisionError(f"integrality of coefficient {idx} undecidable")
    c1 = f.coeff(1)
    if c1.prec < 2:
        raise PrecisionError("precision too low to test the linear coefficient")
    if c1.val() != 1:
        return LTDiagnostics(False, "linear coefficient is not a uniformizer", 1)
    fbar = f.residue_reduce()
    q = ring.q
    for i, c in enumerate(fbar.coeffs):
        want_unit = (i == q)
        if want_unit and not (c == 1):
            return LTDiagnostics(False, "residue coefficient at q is not 1", i)
        if not want_unit and not c.is_zero():
            return LTDiagnostics(False, "residue is not T^q", i)
    return LTDiagnostics(True)


class LTSeries:
    """A validated Lubin-Tate series: f = u*T + ... with u a uniformizer
    (the series' own linear coefficient) and f = T^q mod pi."""

    __slots__ = ("f", "_powers")

    def __init__(self, f: Series1):
        diag = is_lt_series(f)
        if not diag:
            raise PadicError(
                f"not a Lubin-Tate series: {diag.reason} (coefficient {diag.index})")
        self.f = f
        self._powers = None

    @property
    def uniformizer(self) -> OKValue:
        return self.f.coeff(1).to_ok()

    @property
    def ring(self) -> RingSpec:
        return self.f.ring

    @property
    def D(self) -> int:
        return self.f.D

    def powers(self) -> list[Series1]:
        """f^i for 0 <= i <= D, shared across the inductive solvers."""
        if self._powers is None:
            self._powers = _powers1(self.f, self.f.D)
        return self._powers

    @classmethod
    def standard(cls, ring: RingSpec, D: int) -> "LTSeries":
        """The series pi*T + T^q."""
        return cls(Series1.from_coeffs(ring, D, {1: ring.pi(), ring.q: 1}))

    @classmethod
    def multiplicative(cls, ring: RingSpec, D: int) -> "LTSeries":
        """(1+T)^p - 1 over Z_p (requires e = f = 1)."""
        if ring.e != 1 or ring.f != 1:
            raise PadicError("the multiplicative series is Lubin-Tate only over Z_p")
        return cls(Series1.one_plus_t_pow(ring, ring.p, D))


def _coerce_lt(f) -> LTSeries:
    return f if isinstance(f, LTSeries) else LTSeries(f)


# ----------------------------------------------------------------------
# sensitivity-model precision floors
# ----------------------------------------------------------------------

def _subst_multiplier_floor(s: int, r: int, q: int) -> int:
    # valuation floor of [f^i f^j] (or [g^s]) at total degree r with i+j=s
    m = s * q - r
    return 0 if m <= 0 else -(-m // (q - 1))


def _solver_precisions(D: int, q: int, N: int, seed_prec: int) -> list[int]:
    """Guaranteed absolute precision of the homogeneous degree-r piece of an
    inductive Lubin-Tate solution (group law or endomorphism).

    P[1] is the seed precision; each later degree divides once by a
    valuation-1 quantity, and the defect floor follows the sensitivity
    model in the module docstring.
    """
    P = [N, min(seed_prec, N)] + [0] * (D - 1)
    for r in range(2, D + 1):
        pmin = min(P[1:r])
        floor = min(N, 1 + pmin, 2 * pmin)
        for s in range(1, r):
            floor = min(floor, P[s] + _subst_multiplier_floor(s, r, q))
        if floor <= 1:
            raise PrecisionError(
                f"precision budget exhausted at degree {r}: N too small for this truncation")
        P[r] = floor - 1
    return P


def _divide_defect_cell(ring: RingSpec, coords, divisor_unit: OKValue,
                        prec: int) -> OKValue:
    """defect / (pi * divisor_unit) — the valuation-1 divisor of the
    inductive step, split into its pi and unit parts by the caller."""
    cell = OKValue(ring, coords, prec)
    if not any(coords):
        return OKValue(ring, coords, prec - 1)
    try:
        quot = cell.exact_div_pi()
    except NotUnitError as exc:
        raise PadicError(
            "defect not divisible by pi: input violates the Lubin-Tate invariant") from exc
    return quot * divisor_unit.inv_unit()


# ----------------------------------------------------------------------
# group law by successive approximation
# ----------------------------------------------------------------------

class GroupLaw:
    """One-dimensional formal group law G over O_K with write-once caches
    for the logarithm and for powers of G (concurrent recomputation is
    harmless: the value is deterministic)."""

    __slots__ = ("G", "_log_cache", "_pow_cache")

    def __init__(self, G: Series2):
        self.G = G
        self._log_cache = None
        self._pow_cache = {}

    @property
    def ring(self) -> RingSpec:
        return self.G.ring

    @property
    def D(self) -> int:
        return self.G.D

    def powers(self, upto: int) -> list[Series2]:
        """[1, G, G^2, ..., G^upto] at full truncation, cached."""
        have = self._pow_cache.get("p", [])
        if len(have) < upto + 1:
            if not have:
                have = [Series2.from_coeffs(self.ring, self.D, {(0, 0): 1}), self.G]
            while len(have) < upto + 1:
                have.append(have[-1] * self.G)
            self._pow_cache["p"] = have
        return have[: upto + 1]

    def log(self) -> "LogSeries":
        if self._log_cache is None:
            self._log_cache = formal_log(self)
        return self._log_cache

    def check_axioms(self) -> dict:
        """Neutral element, commutativity, associativity, all to truncation.

        Returns {'neutral': ..., 'commutative': ..., 'associative': ...} with
        True or a witness tuple.
        """
        ident = Series1.identity(self.ring, self.D)
        w = self.G.set_y_zero().differs_at(ident)
        neutral = True if w is None else w
        w = self.G.differs_at(self.G.swap())
        commutative = True if w is None else w
        associative = _associativity_witness(self)
        return {
            "neutral": neutral,
            "commutative": commutative,
            "associative": True if associative is None else associative,
        }

    def __repr__(self):
        return f"GroupLaw(D={self.D}, ring={self.ring.tag})"


def _stack_series2(ring, ss: list[Series2]):
    """Mantissa stack (len(ss), cells, nb) for integral bivariate series."""
    n_cells = len(_grid(ss[0].D)[0])
    M = np.zeros((len(ss), n_cells, ring.nb), dtype=object)
    for k, s in enumerate(ss):
        if (s._t.sh != 0).any():
            raise PadicError("integral series expected")
        M[k] = s._t.co
    return M


def _associativity_witness(law: GroupLaw):
    """Compare G(G(X,Y),Z) with G(X,G(Y,Z)) on total degree <= D.

    Writing G(V, W) = sum_j S_j(V) W^j with S_j = sum_i g_ij G^i, the two
    sides are reindexings of the same S-tables, so only powers of G and
    coefficient-matrix products are needed, never trivariate arithmetic.
    """
    ring, D = law.ring, law.D
    G = law.G
    cells, index, *_ = _grid(D)
    nz = G.nonzero_cells()
    amax = max((a for a, b in nz), default=1)
    bmax = max((b for a, b in nz), default=1)
    deg = max(amax, bmax)
    Gp = law.powers(deg)
    stack = _stack_series2(ring, Gp)          # (deg+1, cells, nb)
    tG = G._t
    nb, n_cells = ring.nb, len(cells)

    # gmat[j][i] = coefficient g_ij as coordinates
    gA = np.zeros((bmax + 1, amax + 1, nb), dtype=object)   # for S_j = sum_i g_ij G^i
    gB = np.zeros((amax + 1, bmax + 1, nb), dtype=object)   # for S'_i = sum_j g_ij G^j
    for k, (a, b) in enumerate(cells):
        if any(tG.co[k]):
            if a <= amax and b <= bmax:
                gA[b, a] = tG.co[k]
                gB[a, b] = tG.co[k]

    def combine(gmat, upto):
        # result[t] = sum_s gmat[t, s] * G^s: matmul per coordinate pair
        out = np.zeros((gmat.shape[0], n_cells, nb), dtype=object)
        for k1 in range(nb):
            X = gmat[:, :, k1]
            if not X.any():
                continue
            for k2 in range(nb):
                Y = stack[:upto + 1, :, k2]
                if not Y.any():
                    continue
                Z = _matmul_mod(X, Y, ring.pMc)
                if nb == 1:
                    out[:, :, 0] = (out[:, :, 0] + Z) % ring.pMc
                else:
                    tens = ring._tensor[k1][k2]
                    for k in range(nb):
                        t = tens[k]
                        if t:
                            out[:, :, k] = (out[:, :, k] + Z * t) % ring.pMc
        return out

    SA = combine(gA, amax)    # SA[j] = S_j(G) coefficients on (X,Y)-cells
    SB = combine(gB, bmax)    # SB[i] = S'_i(G) coefficients on (Y,Z)-cells

    floor = int(min(tG.pr.min(), min(P._t.pr.min() for P in Gp)))
    if floor < 1:
        raise PrecisionError("associativity undecidable at this precision")

    def certified_nonzero(coords) -> bool:
        v = ring._coords_val(tuple(coords))
        return v is not None and v < floor

    lhs: dict[tuple, tuple] = {}
    for j in range(bmax + 1):
        table = SA[j]
        for k in range(n_cells):
            a, b = cells[k]
            if a + b + j <= D and any(table[k]):
                lhs[(a, b, j)] = tuple(table[k])
    for i in range(amax + 1):
        table = SB[i]
        for k in range(n_cells):
            b, c = cells[k]
            if i + b + c <= D and any(table[k]):
                key = (i, b, c)
                rhs = table[k]
                got = lhs.pop(key, None)
                if got is None:
                    if certified_nonzero(rhs):
                        return key
                    continue
                if certified_nonzero(ring._coords_sub(got, tuple(rhs))):
                    return key
    for key, leftover in lhs.items():
        if certified_nonzero(leftover):
            return key
    return None


def lt_group_law(f, verify: bool = True) -> GroupLaw:
    """The unique group law G = X + Y + ... with f(G(X,Y)) = G(f(X), f(Y)).

    Classical successive approximation: the homogeneous degree-r correction
    is (defect at degree r) / (pi^r - pi).  Precision floors follow the
    sensitivity model (module docstring); construction refuses to proceed
    past the precision budget.
    """
    lt = _coerce_lt(f)
    ring, D = lt.ring, lt.D
    fpow = lt.powers()
    u1 = lt.uniformizer
    P = _solver_precisions(D, ring.q, ring.N, ring.N)

    coeffs = {(1, 0): 1, (0, 1): 1}
    G = Series2.from_coeffs(ring, D, coeffs)
    cells_by_degree: dict[int, list] = {}
    for a, b in _grid(D)[0]:
        cells_by_degree.setdefault(a + b, []).append((a, b))

    for r in range(2, D + 1):
        Gt = G.truncate(r)
        ft = lt.f.truncate(r)
        lhs = compose1_into2(ft, Gt)
        rhs = cross_subst(Gt, ft, ft, apowers=fpow, bpowers=fpow)
        defect = lhs - rhs
        _, index_r, *_ = _grid(r)
        for deg in range(2, r):
            for cell in cells_by_degree.get(deg, []):
                if any(defect._t.co[index_r[cell]]):
                    raise PadicError(
                        f"defect not cleared at degree {deg}: input violates "
                        "the Lubin-Tate invariant")
        div_unit = ((u1 ** r) - u1).exact_div_pi()
        for cell in cells_by_degree[r]:
            k = index_r[cell]
            if defect._t.sh[k] != 0:
                raise PadicError("non-integral defect: input violates the invariant")
            delta = _divide_defect_cell(ring, tuple(defect._t.co[k]), div_unit, P[r] + 1)
            if any(delta.coords):
                coeffs[cell] = delta
        G = Series2.from_coeffs(ring, D, coeffs)

    # stamp the model floors per total degree
    t = G._t
    cells = _grid(D)[0]
    for k, (a, b) in enumerate(cells):
        t.pr[k] = min(t.pr[k], P[max(a + b, 1)])
    t._vlb = None
    t.normalize()
    law = GroupLaw(G)

    if verify:
        lhs = compose1_into2(lt.f, G)
        rhs = cross_subst(G, lt.f, lt.f, apowers=fpow, bpowers=fpow)
        w = lhs.differs_at(rhs)
        if w is not None:
            raise PadicError(f"group-law verification failed at {w[0]}")
    return law


def lt_endo(a, f, g=None) -> Series1:
    """The unique series [a] = a*T + ... with f o [a] = [a] o g, integral.

    ``a`` may be an OKValue or int; f and g are Lubin-Tate series (g
    defaults to f).  Same inductive scheme and precision model as
    :func:`lt_group_law`.
    """
    lt_f = _coerce_lt(f)
    lt_g = lt_f if g is None or g is f else _coerce_lt(g)
    ring, D = lt_f.ring, lt_f.D
    if isinstance(a, int):
        a = ring.integer(a)
    if not isinstance(a, OKValue) or not ring._same(a.ring):
        raise PadicError("endomorphism multiplier must be an O_K value of this ring")
    gpow = lt_g.powers()
    f1, g1 = lt_f.uniformizer, lt_g.uniformizer
    P = _solver_precisions(D, ring.q, ring.N, a.prec)

    coeffs: dict[int, object] = {1: a}
    phi = Series1.from_coeffs(ring, D, coeffs)
    for r in range(2, D + 1):
        ft = lt_f.f.truncate(r)
        phit = phi.truncate(r)
        lhs = ft.compose(phit)
        # [phi o g]_r = sum_{s<=r} phi_s [g^s]_r
        rhs_cell = KValue.from_int(ring, 0)
        for s in range(1, r + 1):
            cs = coeffs.get(s)
            if cs is not None:
                gs = gpow[s]
                if s <= gs.D and r <= gs.D:
                    rhs_cell = rhs_cell + _coerce_k(ring, cs) * gs.coeff(r)
        defect = lhs.coeff(r) - rhs_cell
        if defect.shift != 0:
            raise PadicError("non-integral defect: input violates the invariant")
        div_unit = ((g1 ** r) - f1).exact_div_pi()
        delta = _divide_defect_cell(ring, defect.coords, div_unit, P[r] + 1)
        if any(delta.coords):
            coeffs[r] = delta
        phi = Series1.from_coeffs(ring, D, coeffs)

    t = phi._t
    for m in range(1, D + 1):
        t.pr[m] = min(t.pr[m], P[m])
    t._vlb = None
    t.normalize()
    return phi


def _coerce_k(ring, v):
    if isinstance(v, KValue):
        return v
    if isinstance(v, OKValue):
        return KValue.from_ok(v)
    return KValue.from_int(ring, v)


# ----------------------------------------------------------------------
# logarithm and exponential
# ----------------------------------------------------------------------

class LogSeries:
    """A logarithm L = T + O(T^2) over K with recorded per-coefficient
    division budgets: val(L_m) >= -divisions[m]."""

    __slots__ = ("L", "divisions")

    def __init__(self, L: Series1, divisions):
        c1 = L.coeff(1)
        if not (c1 == 1):
            raise PadicError("logarithm must have derivative 1 at 0")
        if not L.constant_is_zero():
            raise PadicError("logarithm must vanish at 0")
        self.L = L
        self.divisions = tuple(divisions)
        for m in range(L.D + 1):
            v = L.coeff(m).vlb()
            if v < -self.divisions[m]:
                raise PadicError(
                    f"denominator bound violated at degree {m}: val {v} < "
                    f"-{self.divisions[m]}")

    @property
    def ring(self):
        return self.L.ring

    @property
    def D(self):
        return self.L.D

    def max_denominator(self) -> int:
        return max((-self.L.coeff(m).vlb() for m in range(self.D + 1)), default=0)

    def derivative_is_integral_unit(self) -> bool:
        """True when L' has integral coefficients and unit constant term;
        this holds for logarithms of integral group laws and licenses the
        sensitivity floors in :func:`solve_from_log`."""
        Lp = self.L.derivative()
        verdict, _ = Lp.integral_verdict()
        return verdict == "yes" and Lp.coeff(0).val() == 0

    def __repr__(self):
        return f"LogSeries(D={self.D}, max_denominator={self.max_denominator()})"


def formal_log(law: GroupLaw) -> LogSeries:
    """Logarithm by the invariant differential: L' = 1/(dG/dX)(0, T),
    integrated termwise (the division by m at degree m is precision-tracked).
    """
    G = law.G
    ring, D = law.ring, law.D
    dgx = {}
    for b in range(D):
        dgx[b] = G.coeff(1, b)
    PX = Series1.from_coeffs(ring, D - 1, dgx)
    if not (PX.coeff(0) == 1):
        raise PadicError("dG/dX(0,0) is not 1: not a normalized group law")
    Lp = PX.inv_series()
    coeffs = {}
    divisions = [0, 0]
    for m in range(1, D + 1):
        c = Lp.coeff(m - 1)
        coeffs[m] = c.divide_by(m)
        if m > 1:
            divisions.append(ring.e * _int_val_p(m, ring.p))
    return LogSeries(Series1.from_coeffs(ring, D, coeffs), divisions[: D + 1])


def _int_val_p(m: int, p: int) -> int:
    v = 0
    while m % p == 0:
        m //= p
        v += 1
    return v


def formal_exp(log: LogSeries) -> Series1:
    """Compositional inverse of L over K; exp o L = L o exp = T."""
    return log.L.comp_inverse()


def solve_from_log(log: LogSeries, rhs):
    """Solve L(F) = rhs for F (the value of exp applied to rhs), keeping all
    intermediates shallow.

    rhs is a Series1 or Series2 with zero constant term.  Newton iteration
    F <- F - (L(F) - rhs) / L'(F) doubles the correct degree per round and
    never raises a power of a deep-denominator series (F stays close to the
    integral solution; only single L-coefficients multiply in).  When L' is
    an integral unit series the returned floors follow the solution-map
    sensitivity bound min_m prec(L_m) (tightened by the valuation of the
    recomputed residual L(F) - rhs); otherwise only termwise floors survive.
    """
    L = log.L
    ring = L.ring
    two_var = isinstance(rhs, Series2)
    D = rhs.D
    if two_var:
        if any(rhs._t.co[0]):
            raise PadicError("solve_from_log needs rhs(0) = 0")
    elif not rhs.constant_is_zero():
        raise PadicError("solve_from_log needs rhs(0) = 0")
    Lp = L.derivative()

    def eval_into(F1, upto):
        if two_var:
            return compose1_into2(L.truncate(upto), F1.truncate(upto))
        return L.truncate(upto).compose(F1.truncate(upto))

    F = rhs.truncate(1)._pad_to(D)
    d = 1
    resid = None
    while d < D:
        nd = min(2 * d, D)
        err = eval_into(F, nd) - rhs.truncate(nd)
        # the correction has order > d, so the inverse-derivative factor is
        # only needed to degree nd - d - 1 and padding it higher is inert
        zdeg = max(nd - d - 1, 1)
        if two_var:
            lpf = compose1_into2(Lp.truncate(zdeg), F.truncate(zdeg))
        else:
            lpf = Lp.truncate(zdeg).compose(F.truncate(zdeg))
        zinv = lpf.inv_series()._pad_to(nd)
        corr = err * zinv
        # mathematically corr vanishes below degree d+1: drop stored residue
        t = corr._t
        if two_var:
            _, _, a_arr, b_arr, _, _ = _grid(corr.D)
            mask = (a_arr + b_arr) <= d
            t.co[mask] = 0
            t.sh[mask] = 0
        else:
            t.co[: d + 1] = 0
            t.sh[: d + 1] = 0
        t._vlb = None
        F = F - corr._pad_to(D)
        if nd == D:
            # L(F - corr) - rhs = err - L'(F) corr exactly to degree D (the
            # higher Taylor terms have order >= 2d+2 > D); the computation is
            # exact modulo pi^(e*Mc + sum of the operand shifts)
            resid = err - lpf._pad_to(nd) * corr
            gr = ring.e * ring.Mc
            resid_gran = min(
                gr + int(err._t.sh.min()) + int(zinv._t.sh.min()),
                gr + int(lpf._t.sh.min()) + int(corr._t.sh.min()),
            )
        d = nd

    if log.derivative_is_integral_unit():
        model = min(int(L.coeff(m).prec) for m in range(1, L.D + 1))
        model = min(model, int(rhs._t.pr.min()))
        if resid is None:  # D == 1: F is the rhs linear part, exact
            rbound = None
        else:
            sv = _support_val(resid)
            rbound = resid_gran if sv is None else min(sv, resid_gran)
        floor = model if rbound is None else min(model, rbound)
        t = F._t
        np.maximum(t.pr, min(floor, ring.N), out=t.pr)
        np.minimum(t.pr, ring.N + t.sh, out=t.pr)
        t._vlb = None
    return F


def _support_val(series) -> int | None:
    """Smallest valuation among stored nonzero coefficients (None if all
    stored coefficients are exactly zero)."""
    ring = series.ring
    t = series._t
    best = None
    for i in range(len(t.sh)):
        v = ring._coords_val(t.co[i])
        if v is not None:
            v += int(t.sh[i])
            if best is None or v < best:
                best = v
    return best


def group_from_log(log: LogSeries):
    """G = exp(L(X) + L(Y)) with an integrality verdict.

    Returns (GroupLaw, verdict, witness) where verdict is 'integral',
    'non-integral' (witness = offending cell), or raises PrecisionError when
    some coefficient cannot be decided.
    """
    ring, D = log.ring, log.D
    S = Series2.from_coeffs(ring, D, {})
    coeffs = {}
    for m in range(1, D + 1):
        c = log.L.coeff(m)
        coeffs[(m, 0)] = c
        coeffs[(0, m)] = c
    S = Series2.from_coeffs(ring, D, coeffs)
    G = solve_from_log(log, S)
    verdict, witness = G.integral_verdict()
    if verdict == "unknown":
        raise PrecisionError(
            f"integrality of group-law coefficient {witness} undecidable")
    if verdict == "no":
        return GroupLaw(G), "non-integral", witness
    return GroupLaw(G), "integral", None


# ----------------------------------------------------------------------
# endomorphism checking
# ----------------------------------------------------------------------

def endo_check(F: Series1, law: GroupLaw):
    """Is F an endomorphism of G: F(G(X,Y)) = G(F(X), F(Y)) to truncation?

    Returns (True, None) or (False, witness cell); PrecisionError when a
    compared coefficient is undecidable.
    """
    verdict, idx = F.integral_verdict()
    if verdict == "no":
        raise PadicError(f"endomorphism candidate is not integral at {idx}")
    if verdict == "unknown":
        raise PrecisionError(f"integrality of coefficient {idx} undecidable")
    if not F.constant_is_zero():
        raise PadicError("endomorphism candidate must vanish at 0")
    G = law.G
    dout = min(F.D, G.D)
    kmax = max(F.nonzero_indices(), default=1)
    lhs = compose1_into2(F, G, powers=law.powers(min(kmax, dout)))
    rhs = cross_subst(G, F, F)
    w = lhs.differs_at(rhs)
    return (True, None) if w is None else (False, w[0])
