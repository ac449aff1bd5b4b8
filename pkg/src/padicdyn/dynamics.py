"""Full commuting families of p-adic power series and their verification.

A family is an evaluator alpha -> F_alpha over a fixed ring and truncation,
with three backends: endomorphism families of a Lubin-Tate series,
conjugates U^{-1} o F_alpha o U of an inner family, and tabulated families
(finite maps from element literals to series; queries outside the table are
errors, never interpolations).

The checks follow the structure of the underlying theory:

* commutation and fullness are verified on a documented sample set (the
  uniformizer, Teichmuller units, 1 + pi^k, small integers) since "for all
  alpha in O_K" is not finitely checkable;
* the family logarithm L is the unique series T + O(T^2) with
  L o F_pi = pi * L, solved coefficient by coefficient (one division by a
  valuation-1 quantity per degree) and cross-checked against the stabilized
  iterate limit pi^{-n} F_pi^{o n};
* root counts for iterate quotients and fixed-point series come from Newton
  polygons; no root is ever materialized in an extension field;
* the background formal group is recovered as exp(L(X) + L(Y)) with an
  integrality verdict, and every sampled family member is checked to be an
  endomorphism of it;
* a digit-by-digit search over Teichmuller expansions finds mu with
  val(mu) = 1 and F_mu = T^q mod pi, certifying exactly what was verified.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .padic import (
    KValue,
    NotUnitError,
    OKValue,
    PadicError,
    PrecisionError,
    RingSpec,
)
from .series import (
    NewtonPolygon,
    ResidueSeries,
    Series1,
    newton_polygon,
    residue_decompose,
)
from .lubin_tate import (
    GroupLaw,
    LogSeries,
    LTSeries,
    endo_check,
    group_from_log,
    lt_endo,
    solve_from_log,
)

__all__ = [
    "Family",
    "FamilyError",
    "family_from_lt",
    "family_conjugate",
    "family_tabulated",
    "default_samples",
    "default_unit_samples",
    "CommutingReport",
    "FullnessReport",
    "FamilyReport",
    "check_commuting",
    "check_full",
    "lubin_log",
    "lubin_log_by_iterates",
    "LambdaStats",
    "lambda_stats",
    "FixedPointProfile",
    "fixedpoint_profile",
    "RecoveryReport",
    "recover_group",
    "MuCertificate",
    "MuSearchError",
    "mu_search",
]


class FamilyError(PadicError):
    """A family backend violated its contract (bad table entry, wrong
    derivative, broken invariant)."""


# ----------------------------------------------------------------------
# families
# ----------------------------------------------------------------------

class Family:
    """Evaluator alpha -> F_alpha over a fixed ring and truncation degree.

    Evaluation is deterministic and memoized per canonical alpha literal
    (write-once; concurrent duplicate evaluation is harmless).  Every
    evaluation checks F_alpha(0) = 0 and F_alpha'(0) = alpha.
    """

    __slots__ = ("ring", "D", "backend", "_eval", "_memo", "_payload")

    def __init__(self, ring: RingSpec, D: int, backend: str, evaluator, payload=None):
        self.ring = ring
        self.D = D
        self.backend = backend
        self._eval = evaluator
        self._memo = {}
        self._payload = payload or {}

    def coerce_alpha(self, alpha) -> OKValue:
        if isinstance(alpha, int):
            return self.ring.integer(alpha)
        if isinstance(alpha, OKValue):
            if not self.ring._same(alpha.ring):
                raise FamilyError("alpha belongs to a different ring")
            return alpha
        raise FamilyError(f"cannot use {type(alpha).__name__} as a family index")

    def evaluate(self, alpha) -> Series1:
        a = self.coerce_alpha(alpha)
        key = self.ring.element_literal(a)
        hit = self._memo.get(key)
        if hit is not None:
            return hit
        F = self._eval(a)
        if not F.constant_is_zero():
            raise FamilyError(f"backend returned F with F(0) != 0 for alpha={key}")
        c1 = F.coeff(1)
        if not (c1 == KValue.from_ok(a)):
            raise FamilyError(f"backend returned F with F'(0) != alpha for alpha={key}")
        self._memo[key] = F
        return F

    def pi_series(self) -> Series1:
        return self.evaluate(self.ring.pi())

    def descriptor(self) -> dict:
        d = {"backend": self.backend, "D": self.D}
        d.update(self._payload)
        return d

    def __repr__(self):
        return f"Family({self.backend}, D={self.D}, ring={self.ring.tag})"


def family_from_lt(f) -> Family:
    """The endomorphism family alpha -> [alpha]_{f,f} of a Lubin-Tate series."""
    lt = f if isinstance(f, LTSeries) else LTSeries(f)

    def ev(a: OKValue) -> Series1:
        return lt_endo(a, lt)

    return Family(lt.ring, lt.D, "lubin-tate", ev,
                  {"f": lt.f.literal()})


def family_conjugate(U: Series1, fam: Family) -> Family:
    """The conjugated family alpha -> U^{-1} o F_alpha o U.

    U must be integral with U(0) = 0 and unit U'(0); conjugation preserves
    commutation, derivatives at 0, and fullness.
    """
    verdict, idx = U.integral_verdict()
    if verdict != "yes":
        raise FamilyError(f"conjugator must be integral (coefficient {idx})")
    if not U.constant_is_zero():
        raise FamilyError("conjugator must fix 0")
    u1 = U.coeff(1)
    if u1.val() != 0:
        raise FamilyError("conjugator derivative at 0 must be a unit")
    Uinv = U.comp_inverse()

    def ev(a: OKValue) -> Series1:
        return Uinv.compose(fam.evaluate(a).compose(U))

    return Family(fam.ring, min(fam.D, U.D), "conjugated", ev,
                  {"u": U.literal(), "inner": fam.descriptor()})


def family_tabulated(ring: RingSpec, D: int, table: dict) -> Family:
    """A family given by a finite table {alpha literal or value: Series1}.

    Queries outside the table raise FamilyError; nothing is interpolated.
    """
    canon = {}
    for k, v in table.items():
        a = ring.parse_element(k) if isinstance(k, str) else k
        if isinstance(a, int):
            a = ring.integer(a)
        s = Series1.parse(ring, v) if isinstance(v, str) else v
        canon[ring.element_literal(a)] = s.truncate(D)

    def ev(a: OKValue) -> Series1:
        key = ring.element_literal(a)
        hit = canon.get(key)
        if hit is None:
            raise FamilyError(f"alpha={key} is outside the tabulated family")
        return hit

    payload = {"table": {k: s.literal() for k, s in canon.items()}}
    return Family(ring, D, "tabulated", ev, payload)


def family_from_descriptor(ring: RingSpec, desc: dict, D: int | None = None) -> Family:
    """Rebuild a family from its descriptor record."""
    backend = desc.get("backend")
    D = D if D is not None else int(desc.get("D"))
    if backend == "lubin-tate":
        return family_from_lt(LTSeries(Series1.parse(ring, desc["f"]).truncate(D)))
    if backend == "conjugated":
        inner = family_from_descriptor(ring, desc["inner"], D)
        return family_conjugate(Series1.parse(ring, desc["u"]).truncate(D), inner)
    if backend == "tabulated":
        return family_tabulated(ring, D, desc["table"])
    raise FamilyError(f"unknown family backend {backend!r}")


# ----------------------------------------------------------------------
# sample sets
# ----------------------------------------------------------------------

def default_unit_samples(ring: RingSpec, max_teich: int = 4,
                         onepk_max: int = 3,
                         small_ints=(2, 3, -1)) -> list[OKValue]:
    """Unit sample set: Teichmuller units, 1 + pi^k (k <= onepk_max), and
    small rational integers that are units.  Covers every alpha-regime the
    fixed-point analysis distinguishes."""
    out = []
    seen = set()

    def push(x: OKValue):
        key = ring.element_literal(x)
        if key not in seen and x.val() == 0:
            seen.add(key)
            out.append(x)

    count = 0
    for c in ring.residue_elements():
        if not c.is_zero():
            t = ring.teichmuller(c)
            push(t)
            count += 1
            if count >= max_teich:
                break
    pi = ring.pi()
    for k in range(1, onepk_max + 1):
        push(ring.one() + pi ** k)
    for n in small_ints:
        x = ring.integer(n)
        if x.val() == 0:
            push(x)
    return out


def default_samples(ring: RingSpec, **kw) -> list[OKValue]:
    """Unit samples plus the uniformizer."""
    return [ring.pi()] + default_unit_samples(ring, **kw)


# ----------------------------------------------------------------------
# family checks
# ----------------------------------------------------------------------

@dataclass
class CommutingReport:
    passed: bool
    pairs_checked: int
    witness: tuple | None = None   # (alpha literal, beta literal, cell/degree)

    def to_dict(self):
        return {"passed": self.passed, "pairs_checked": self.pairs_checked,
                "witness": list(self.witness) if self.witness else None}


@dataclass
class FullnessReport:
    passed: bool
    derivatives_ok: bool | None = None
    wideg_pi: int | None = None
    wideg_ok: bool | None = None
    unit_ratio_ok: bool | None = None
    serg_d: int | None = None
    serg_ok: bool | None = None
    serg_inner_support: list | None = None
    witness: str | None = None

    def to_dict(self):
        return {k: getattr(self, k) for k in (
            "passed", "derivatives_ok", "wideg_pi", "wideg_ok",
            "unit_ratio_ok", "serg_d", "serg_ok", "serg_inner_support",
            "witness")}


@dataclass
class FamilyReport:
    commuting: CommutingReport | None = None
    full: FullnessReport | None = None

    def to_dict(self):
        return {"commuting": self.commuting.to_dict() if self.commuting else None,
                "full": self.full.to_dict() if self.full else None}


def check_commuting(fam: Family, samples) -> CommutingReport:
    """Verify F_alpha o F_beta = F_beta o F_alpha on all sample pairs.

    Failures are results (witness pair plus first differing degree), not
    errors.
    """
    samples = [fam.coerce_alpha(a) for a in samples]
    pairs = 0
    for i in range(len(samples)):
        for j in range(i + 1, len(samples)):
            a, b = samples[i], samples[j]
            Fa, Fb = fam.evaluate(a), fam.evaluate(b)
            pairs += 1
            w = Fa.compose(Fb).differs_at(Fb.compose(Fa))
            if w is not None:
                return CommutingReport(False, pairs,
                                       (fam.ring.element_literal(a),
                                        fam.ring.element_literal(b), w[0]))
    return CommutingReport(True, pairs)


def check_full(fam: Family, unit_samples) -> FullnessReport:
    """Fullness: derivative coverage on samples, wideg(F_pi) = q, F_pi'/pi a
    unit series (simple roots of all iterates), and the residue
    decomposition of F_pi with p^d = q."""
    ring = fam.ring
    rep = FullnessReport(passed=False)

    # (a) derivative coverage: evaluation itself asserts F_alpha'(0) = alpha
    for a in unit_samples:
        fam.evaluate(a)
    fam.evaluate(ring.pi())
    rep.derivatives_ok = True

    # (b) Weierstrass degree of F_pi
    Fpi = fam.pi_series()
    wd = Fpi.wideg()
    rep.wideg_pi = wd
    rep.wideg_ok = (wd == ring.q)
    if not rep.wideg_ok:
        rep.witness = f"wideg(F_pi) = {wd}, expected q = {ring.q}"
        return rep

    # (c) F_pi'/pi must be a unit series: integral with unit constant term
    dpi = Fpi.derivative()
    try:
        ratio0 = dpi.coeff(0).to_ok().exact_div_pi()
        ratio_ok = ratio0.val() == 0
        if not ratio_ok:
            rep.witness = "F_pi'(0)/pi is not a unit"
        else:
            for m in range(1, dpi.D + 1):
                c = dpi.coeff(m)
                v = c.val()
                if v == 0:
                    ratio_ok = False
                    rep.witness = f"F_pi' coefficient {m} not divisible by pi"
                    break
                if v is None and c.prec < 1:
                    raise PrecisionError(
                        f"divisibility of F_pi' coefficient {m} undecidable")
    except NotUnitError as exc:
        ratio_ok = False
        rep.witness = f"F_pi'/pi: {exc}"
    rep.unit_ratio_ok = ratio_ok
    if not ratio_ok:
        if rep.witness is None:
            rep.witness = "F_pi'/pi is not a unit series"
        return rep

    # (d) residue decomposition F_pi mod pi = Gbar(T^(p^d)) with p^d = q
    try:
        inner, d = residue_decompose(Fpi.residue_reduce())
    except PadicError as exc:
        rep.serg_ok = False
        rep.witness = str(exc)
        return rep
    rep.serg_d = d
    rep.serg_inner_support = inner.support()
    rep.serg_ok = (ring.p ** d == ring.q)
    if not rep.serg_ok:
        rep.witness = f"residue decomposition gives p^{d} != q"
        return rep

    rep.passed = True
    return rep


# ----------------------------------------------------------------------
# the family logarithm
# ----------------------------------------------------------------------

def lubin_log(fam: Family, check_samples=None) -> LogSeries:
    """The unique L = T + O(T^2) with L o F_pi = pi * L.

    Solved coefficient by coefficient: a_m (pi^m - pi) = -(lower-degree
    contributions), one division by a valuation-1 quantity per degree.  The
    functional equation L o F_alpha = alpha * L is then verified for every
    sampled unit; failure signals a non-commuting or non-full input.
    """
    ring, D = fam.ring, fam.D
    Fpi = fam.pi_series()
    fpow = [Series1.from_coeffs(ring, D, {0: 1}), Fpi]
    for _ in range(D - 1):
        fpow.append(fpow[-1] * Fpi)

    pi_k = KValue.from_ok(ring.pi())
    coeffs: dict[int, KValue] = {1: KValue.from_int(ring, 1)}
    divisions = [0, 0]
    for m in range(2, D + 1):
        acc = KValue.from_int(ring, 0)
        inherited = 0
        for j in range(1, m):
            cj = fpow[j].coeff(m)
            if not cj.is_zero_at_prec() or not cj.prec >= ring.N:
                acc = acc + coeffs[j] * cj
                inherited = max(inherited, divisions[j])
        unit = (ring.pi() ** (m - 1)) - ring.one()
        a_m = (-acc).pi_shift(-1) * KValue.from_ok(unit.inv_unit())
        coeffs[m] = a_m
        divisions.append(inherited + 1)
    L = Series1.from_coeffs(ring, D, coeffs)
    log = LogSeries(L, divisions)

    if check_samples is None:
        check_samples = default_unit_samples(ring)
    for a in check_samples:
        av = fam.coerce_alpha(a)
        lhs = L.compose(fam.evaluate(av))
        rhs = L.scalar_mul(av)
        w = lhs.differs_at(rhs)
        if w is not None:
            raise PadicError(
                "logarithm functional-equation verification failed at degree "
                f"{w[0]} for alpha={ring.element_literal(av)}: input family is "
                "not commuting/full")
    return log


def lubin_log_by_iterates(fam: Family, max_iterates: int | None = None) -> Series1:
    """Independent route to the logarithm: the stabilized limit of
    pi^{-n} F_pi^{o n}, degree by degree.

    Returns the stabilized series with its honest (iteration-dependent)
    precision floors; raises PrecisionError if the precision budget is
    exhausted before stabilization.
    """
    ring, D = fam.ring, fam.D
    Fpi = fam.pi_series()
    cap = max_iterates if max_iterates is not None else ring.N - 2
    prev = None
    cur_iter = Series1.identity(ring, D)
    for n in range(1, cap + 1):
        cur_iter = Fpi.compose(cur_iter)
        scaled = _series_pi_shift(cur_iter, -n)
        if prev is not None:
            w = scaled.differs_at(prev, need=0)
            if w is None:
                return scaled
        prev = scaled
    raise PrecisionError(
        f"iterate logarithm did not stabilize within {cap} iterations at this precision")


def _series_pi_shift(s: Series1, k: int) -> Series1:
    return Series1.from_coeffs(s.ring, s.D,
                               {i: s.coeff(i).pi_shift(k) for i in range(s.D + 1)})


# ----------------------------------------------------------------------
# roots of iterates: counts and profiles via Newton polygons
# ----------------------------------------------------------------------

@dataclass
class LambdaStats:
    n: int
    count: int
    valuation: Fraction
    polygon: NewtonPolygon

    def to_dict(self):
        return {"n": self.n, "count": self.count,
                "valuation": [self.valuation.numerator, self.valuation.denominator],
                "polygon": self.polygon.to_dict()}


def lambda_stats(fam: Family, n: int) -> LambdaStats:
    """Count the new roots of the n-th iterate of F_pi and their valuation.

    Computes Q = F_pi^(o n) / F_pi^(o n-1) by exact integral series division
    (leading coefficient pi^(n-1) * unit; exact divisibility is required and
    its failure signals an invalid family), then reads count and valuation
    off Q's Newton polygon.  Requires q^n <= D so the polygon fits.
    """
    ring = fam.ring
    if n < 1:
        raise ValueError("n must be >= 1")
    if ring.q ** n > fam.D:
        raise PrecisionError(f"truncation too small: q^{n} = {ring.q**n} > D = {fam.D}")
    Fpi = fam.pi_series()
    A = Fpi.iterate(n)
    B = Fpi.iterate(n - 1)
    Q = _exact_series_division(A, B)

    poly = newton_polygon(Q)
    expected = ring.q ** (n - 1) * (ring.q - 1)
    if len(poly.segments) != 1:
        raise PadicError(
            f"iterate quotient polygon has {len(poly.segments)} segments, "
            "expected one: invalid family")
    slope, length = poly.segments[0]
    if length != expected or -slope != Fraction(1, expected):
        raise PadicError(
            f"iterate quotient polygon ({slope}, {length}) contradicts the "
            f"expected {expected} roots of valuation 1/{expected}")
    return LambdaStats(n, length, -slope, poly)


def _exact_series_division(A: Series1, B: Series1) -> Series1:
    """Q with B * Q = A, for B = T * (pi^k * unit + O(T)): per-coefficient
    exact division by the leading coefficient; errors when divisibility or
    precision fails."""
    ring = A.ring
    ordB = B.ord()
    b0 = B.coeff(ordB)
    D = min(A.D, B.D) - ordB
    coeffs: dict[int, KValue] = {}
    for k in range(D + 1):
        acc = A.coeff(k + ordB)
        for j in range(k):
            qj = coeffs[j]
            acc = acc - qj * B.coeff(k - j + ordB)
        q_k = acc.divide_by(b0)
        verdict = q_k.integral_verdict()
        if verdict is False:
            raise PadicError(
                f"series division is not exact at index {k}: invalid family")
        if verdict is None:
            raise PrecisionError(
                f"series division undecidable at index {k} at this precision")
        coeffs[k] = q_k
    return Series1.from_coeffs(ring, D, coeffs)


@dataclass
class FixedPointProfile:
    alpha: str                      # element literal
    n_alpha: int
    wideg_of_difference: int
    polygon: NewtonPolygon

    def to_dict(self):
        return {"alpha": self.alpha, "n_alpha": self.n_alpha,
                "wideg_of_difference": self.wideg_of_difference,
                "polygon": self.polygon.to_dict()}


def fixedpoint_profile(fam: Family, alpha) -> FixedPointProfile:
    """Profile of the fixed points of F_alpha for a unit alpha.

    n(alpha) is the largest n with alpha in 1 + pi^n O_K; the routine
    computes F_alpha - T, asserts wideg = q^n, and asserts the Newton
    polygon runs from (1, n) to (q^n, 0) in n height-one segments of slopes
    -1/(q^k (q-1)), k = 0..n-1.
    """
    ring = fam.ring
    a = fam.coerce_alpha(alpha)
    if a.val() != 0:
        raise PadicError("fixed-point profiles are defined for unit alpha")
    n = (a - ring.one()).val()
    if n is None:
        raise PrecisionError(
            "alpha is indistinguishable from 1 at this precision; n(alpha) undecidable")
    lit = ring.element_literal(a)

    W = fam.evaluate(a) - Series1.identity(ring, fam.D)
    if n == 0:
        wd = W.wideg()
        if wd != 1:
            raise PadicError(f"wideg(F_alpha - T) = {wd}, expected 1 for n(alpha) = 0")
        return FixedPointProfile(lit, 0, 1, NewtonPolygon([(1, 0)]))

    if ring.q ** n > fam.D:
        raise PrecisionError(
            f"truncation too small: q^n(alpha) = {ring.q**n} > D = {fam.D}")
    wd = W.wideg()
    if wd != ring.q ** n:
        raise PadicError(
            f"wideg(F_alpha - T) = {wd}, expected q^{n} = {ring.q**n}")
    poly = newton_polygon(W)
    want_vertices = tuple((ring.q ** k, Fraction(n - k)) for k in range(n + 1))
    if poly.vertices != want_vertices:
        raise PadicError(
            f"fixed-point polygon {poly.vertices} deviates from the expected "
            f"{want_vertices}")
    return FixedPointProfile(lit, n, wd, poly)


# ----------------------------------------------------------------------
# group recovery (the constructive verification of the main theorem)
# ----------------------------------------------------------------------

@dataclass
class RecoveryReport:
    status: str                     # ok | commuting-failed | full-failed |
                                    # log-failed | non-integral | endo-failed
    commuting: CommutingReport | None = None
    full: FullnessReport | None = None
    integral: str | None = None
    witness: object = None
    endo_results: list = field(default_factory=list)
    exp_reproduced: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self):
        return {
            "status": self.status,
            "commuting": self.commuting.to_dict() if self.commuting else None,
            "full": self.full.to_dict() if self.full else None,
            "integral": self.integral,
            "witness": (list(self.witness)
                        if isinstance(self.witness, tuple) else self.witness),
            "endo_results": self.endo_results,
            "exp_reproduced": self.exp_reproduced,
        }


def recover_group(fam: Family, unit_samples=None):
    """Recover the background formal group of a full commuting family.

    Pipeline: commutation and fullness checks; the family logarithm L;
    G = exp(L(X) + L(Y)) with the integrality verdict REQUIRED to be
    integral; endo_check(F_alpha, G) for every sample; and reproduction of
    F_alpha as exp(alpha * L).  Returns (GroupLaw | None, RecoveryReport)
    with the full evidence trail.
    """
    ring = fam.ring
    if unit_samples is None:
        unit_samples = default_unit_samples(ring)
    unit_samples = [fam.coerce_alpha(a) for a in unit_samples]
    rep = RecoveryReport(status="pending")

    rep.commuting = check_commuting(fam, [ring.pi()] + unit_samples)
    if not rep.commuting.passed:
        rep.status = "commuting-failed"
        rep.witness = rep.commuting.witness
        return None, rep
    rep.full = check_full(fam, unit_samples)
    if not rep.full.passed:
        rep.status = "full-failed"
        rep.witness = rep.full.witness
        return None, rep

    try:
        log = lubin_log(fam, check_samples=unit_samples)
    except PadicError as exc:
        rep.status = "log-failed"
        rep.witness = str(exc)
        return None, rep

    law, verdict, wit = group_from_log(log)
    rep.integral = verdict
    if verdict != "integral":
        rep.status = "non-integral"
        rep.witness = wit
        return None, rep
    law._log_cache = log

    for a in [ring.pi()] + unit_samples:
        lit = ring.element_literal(a)
        Fa = fam.evaluate(a)
        ok, w = endo_check(Fa, law)
        rep.endo_results.append([lit, ok, list(w) if w else None])
        if not ok:
            rep.status = "endo-failed"
            rep.witness = (lit, w)
            return None, rep
        back = solve_from_log(log, log.L.scalar_mul(a))
        same = back.differs_at(Fa) is None
        rep.exp_reproduced.append([lit, same])
        if not same:
            rep.status = "endo-failed"
            rep.witness = (lit, "exp(alpha L) differs from F_alpha")
            return None, rep

    rep.status = "ok"
    return law, rep


# ----------------------------------------------------------------------
# mu search
# ----------------------------------------------------------------------

@dataclass
class MuCertificate:
    mu: str                        # element literal
    digits_determined: int
    congruence_degree: int
    wideg_ok: bool
    val_ok: bool

    def to_dict(self):
        return {"mu": self.mu, "digits_determined": self.digits_determined,
                "congruence_degree": self.congruence_degree,
                "wideg_ok": self.wideg_ok, "val_ok": self.val_ok}


class MuSearchError(PadicError):
    """Search exhausted without a certificate; carries diagnostics."""

    def __init__(self, message, best_degree=None, tried=0):
        super().__init__(message)
        self.best_degree = best_degree
        self.tried = tried


def mu_search(fam: Family, max_digits: int = 4) -> MuCertificate:
    """Find mu = pi * u with F_mu = T^q mod pi up to degree D, refining u
    digit by digit over Teichmuller representatives.

    A digit choice is rejected as soon as a congruence violation appears at
    a degree its extensions can no longer change (below q^(depth+2), since
    deeper digits move mu by pi^(depth+2) and the reduction of F_mu by
    degree-q^(depth+2) terms).  ``digits_determined`` counts the depths at
    which exactly one candidate survived the degree-<=D data, so the
    certificate states exactly what was verified.
    """
    ring, D = fam.ring, fam.D
    q = ring.q
    pi = ring.pi()

    unit_digits = [ring.teichmuller(c) for c in ring.residue_elements()
                   if not c.is_zero()]
    all_digits = [ring.zero()] + unit_digits

    def first_violation(mu: OKValue) -> int | None:
        try:
            fbar = fam.evaluate(mu).residue_reduce()
        except (FamilyError, PadicError) as exc:
            return -1  # evaluation itself failed; treat as immediate violation
        for i, c in enumerate(fbar.coeffs):
            want_one = (i == q)
            if want_one and not (c == 1):
                return i
            if not want_one and not c.is_zero():
                return i
        return None

    best_degree = None
    tried = 0

    def search(depth: int, u: OKValue, determined: int):
        nonlocal best_degree, tried
        digits = unit_digits if depth == 0 else all_digits
        survivors = []
        for t in digits:
            cand = u + t.pi_mul(depth) if depth else t
            mu = pi * cand
            tried += 1
            v = first_violation(mu)
            if v is None:
                survivors.append((cand, None))
                continue
            if v >= 0:
                best_degree = v if best_degree is None else max(best_degree, v)
            threshold = min(q ** (depth + 2), D + 1)
            if v >= threshold:
                survivors.append((cand, v))
        unique = len(survivors) == 1
        for cand, v in survivors:
            if v is None:
                return cand, determined + (1 if unique else 0)
            if depth + 1 < max_digits:
                hit = search(depth + 1, cand, determined + (1 if unique else 0))
                if hit is not None:
                    return hit
        return None

    found = search(0, ring.zero(), 0)
    if found is None:
        raise MuSearchError(
            f"mu search exhausted after {tried} candidates with no full "
            f"congruence to degree {D}"
            + (f"; best partial congruence degree {best_degree}"
               if best_degree is not None else ""),
            best_degree=best_degree, tried=tried)
    u, determined = found
    mu = pi * u
    Fmu = fam.evaluate(mu)
    wd = Fmu.wideg()
    return MuCertificate(
        mu=ring.element_literal(mu),
        digits_determined=determined,
        congruence_degree=D,
        wideg_ok=(wd == q),
        val_ok=(mu.val() == 1),
    )
