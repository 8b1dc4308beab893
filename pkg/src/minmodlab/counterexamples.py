"""The order-zero family f(z) = prod (1 - z/r_m)^{k_m} with k_m = r_m^{eps_m}.

Multiplicities are chosen first, k_{m+1} = ceil(e^{r_m}), and the radii follow
as r_m = k_m^{1/eps_m}, so integrality holds by construction. From the third
term on every quantity is carried as a logarithm; a term whose log radius
would leave binary64 ends the construction.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import mpmath
import numpy as np

from .errors import MinModError
from .growth import log_B, ray_log_min
from .logspace import MAX_LOG, LogReal, log_abs_expm1
from .zeros import EXACT_LIMIT, ZeroEntry, ZeroSet

MP_DPS = 60


class RuleKind(enum.Enum):
    INV_SQRT = "INV_SQRT"
    INV_LINEAR = "INV_LINEAR"
    CUSTOM = "CUSTOM"


@dataclass(frozen=True)
class EpsRule:
    kind: RuleKind
    c: float = 1.0
    table: tuple[float, ...] = ()

    @classmethod
    def inv_sqrt(cls) -> "EpsRule":
        return cls(RuleKind.INV_SQRT)

    @classmethod
    def inv_linear(cls, c: float) -> "EpsRule":
        if not c > 0:
            raise MinModError("INVALID_PARAMETER", "c must be positive")
        return cls(RuleKind.INV_LINEAR, c=c)

    @classmethod
    def custom(cls, table: Sequence[float]) -> "EpsRule":
        return cls(RuleKind.CUSTOM, table=tuple(float(v) for v in table))

    def mp(self, m: int):
        """eps_m as an mpmath number (m >= 1)."""
        if self.kind is RuleKind.INV_SQRT:
            return 1 / (2 * mpmath.sqrt(m))
        if self.kind is RuleKind.INV_LINEAR:
            return mpmath.mpf(self.c) / m
        if m > len(self.table):
            raise MinModError("INDEX_OUT_OF_RANGE", f"custom table has no eps_{m}")
        return mpmath.mpf(self.table[m - 1])

    def __call__(self, m: int) -> float:
        return float(self.mp(m))

    def label(self) -> str:
        if self.kind is RuleKind.INV_LINEAR:
            return f"INV_LINEAR({self.c!r})"
        if self.kind is RuleKind.CUSTOM:
            return "CUSTOM(" + ",".join(repr(v) for v in self.table) + ")"
        return self.kind.value


@dataclass(frozen=True)
class Term:
    log_r: float
    log_k: float
    eps: float
    k_exact: Optional[int]


@dataclass(frozen=True)
class CounterexampleSpec:
    r1: LogReal
    rule: EpsRule
    terms: tuple[Term, ...]
    # certificates[i] covers the pair (term i+1, term i+2), 1-based
    certificates: tuple[dict, ...]
    requested: int
    truncated: bool = False

    @property
    def all_certified(self) -> bool:
        return all(all(c.values()) for c in self.certificates)

    def to_zeroset(self) -> ZeroSet:
        note = f"counterexample family {self.rule.label()}, {len(self.terms)} terms"
        if self.truncated:
            note += f" (truncated from {self.requested})"
        return ZeroSet(
            (ZeroEntry(t.log_r, t.log_k, t.k_exact, 0.0) for t in self.terms),
            truncation_note=note,
        )


def _first_term(r1: LogReal, rule: EpsRule):
    r = mpmath.exp(mpmath.mpf(r1.log_value))
    if abs(r - mpmath.nint(r)) <= 1e-12 * r:
        r = mpmath.nint(r)
    if r < 4:
        raise MinModError("INVALID_PARAMETER", "r1 must be at least 4")
    cap = min(mpmath.mpf(1) / 2, rule.mp(1))
    k = int(mpmath.floor(r ** cap * (1 + mpmath.mpf(10) ** -40)))
    if k < 2:
        raise MinModError("INVALID_PARAMETER", "no integral r1^eps1 >= 2 with eps1 <= 1/2")
    eps = mpmath.log(k) / mpmath.log(r)
    return mpmath.log(r), k, eps


def build_family(r1: Union[LogReal, float], rule: EpsRule, K: int) -> CounterexampleSpec:
    if K < 1:
        raise MinModError("INVALID_PARAMETER", "K must be >= 1")
    if not isinstance(r1, LogReal):
        r1 = LogReal(math.log(r1))
    with mpmath.workdps(MP_DPS):
        log_r, k, eps = _first_term(r1, rule)
        prev_eps = eps
        for m in range(2, K + 1):
            e = rule.mp(m)
            if not 0 < e < prev_eps:
                raise MinModError("RULE_NOT_DECREASING", f"eps_{m} = {float(e)!r} does not decrease")
            prev_eps = e
        mp_terms = [(log_r, mpmath.log(k), eps, k)]
        truncated = False
        for m in range(2, K + 1):
            e_next = rule.mp(m)
            r_prev = mpmath.exp(mp_terms[-1][0])
            if r_prev <= math.log(EXACT_LIMIT):
                k_next = int(mpmath.ceil(mpmath.exp(r_prev)))
                log_k = mpmath.log(k_next)
            else:
                # ceil changes ln k by less than e^{-r_prev}: below binary64 resolution
                k_next, log_k = None, r_prev
            log_r_next = log_k / e_next
            if log_r_next > MAX_LOG:
                truncated = True
                break
            mp_terms.append((log_r_next, log_k, e_next, k_next))
        certs = []
        for (lr, lk, _, _), (_, lk2, _, _) in zip(mp_terms, mp_terms[1:]):
            j = len(certs) + 1  # index k of the left term
            certs.append({
                "square": bool(lk2 >= 2 * lr),
                "power": bool(lk2 >= (j + 1) * lr),
                "exp": bool(lk2 >= mpmath.exp(lr)),
            })
        terms = tuple(
            Term(float(lr), math.log(kk) if kk is not None else float(lk), float(e), kk)
            for lr, lk, e, kk in mp_terms
        )
    return CounterexampleSpec(r1, rule, terms, tuple(certs), K, truncated)


# -- verification -------------------------------------------------------------------


class Check(enum.Enum):
    ORDER_ZERO = "ORDER_ZERO"
    LEMMA_6_2 = "LEMMA_6_2"
    LEMMA_6_3 = "LEMMA_6_3"
    SUM_DIVERGES = "SUM_DIVERGES"
    COND_6_10 = "COND_6_10"


@dataclass(frozen=True)
class CexReport:
    check: Check
    passed: bool
    values: dict = field(default_factory=dict)


def _index(spec: CounterexampleSpec, k: int, lo: int = 1) -> Term:
    if not lo <= k <= len(spec.terms):
        raise MinModError("INDEX_OUT_OF_RANGE", f"k = {k} outside {lo}..{len(spec.terms)}")
    return spec.terms[k - 1]


def _order_zero(spec: CounterexampleSpec, zeros: ZeroSet, samples: int) -> CexReport:
    margins = []
    for k in range(1, len(spec.terms)):
        a, b = spec.terms[k - 1].log_r, spec.terms[k].log_r
        s = np.linspace(a, b, samples, endpoint=False)
        # ln ln M(r) <= ln 3 + eps_k ln r + ln ln r
        rhs = math.log(3.0) + spec.terms[k - 1].eps * s + np.log(s)
        margins.append(float(np.min(rhs - log_B(zeros, s))))
    return CexReport(Check.ORDER_ZERO, all(m >= 0 for m in margins),
                     {"min_margin_per_window": tuple(margins), "samples": samples})


def _lemma62(spec: CounterexampleSpec, zeros: ZeroSet, k: int, L: float, points: int) -> CexReport:
    if not L > 1:
        raise MinModError("INVALID_PARAMETER", "L must exceed 1")
    term = _index(spec, k, lo=2)
    sk, eps = term.log_r, term.eps
    prev = spec.terms[: k - 1]
    log_Nk = float(np.logaddexp.reduce([t.log_k for t in prev]))
    s_base = sk / L
    log_M_base = float(np.exp(log_B(zeros, s_base)[0]))  # ln M(r_k^{1/L})

    t = np.linspace(s_base, sk, points + 2)[1:-1]
    lm = ray_log_min(zeros, t)
    ratio = lm / log_M_base
    bound = L * (1 - eps / 4)

    # lower bound for ln M(r_k^{1/L}), in log-log form: ln ln M(r_k^{1/L}) >= ln((1/L)(1 - eps/8)) + ln N_k + ln ln r_k
    lhs_max = float(log_B(zeros, s_base)[0])
    rhs_max = math.log((1 - eps / 8) / L) + log_Nk + math.log(sk)
    # upper bound for m(t), termwise: each factor of m(t) against its bound
    x = t[:, None] - zeros.log_radii[None, :]
    fac = log_abs_expm1(x)  # ln|1 - t/r_m|
    below = np.arange(len(zeros)) < k - 1
    above = np.arange(len(zeros)) > k - 1
    # m < k: ln|t/r_m - 1| <= ln t ; m > k: ln(1 - t/r_m) <= 0 ; m = k: identical
    d_below = np.where(below[None, :], fac - t[:, None], -np.inf)
    d_above = np.where(above[None, :], fac, -np.inf)
    margin_min = -float(np.max(np.maximum(d_below, d_above))) + 0.0 if len(zeros) > 1 else math.inf

    side = {
        "separation": bool(prev[-1].log_r < s_base),  # r_{k-1} < r_k^{1/L}
        "first_factor": bool(8 * L * prev[-1].log_r <= term.log_k),  # r_m <= r_k^{eps_k/(8L)}, m < k
        "small_count": bool(log_Nk < eps * sk / 2),
    }
    regime_bound = L * (log_Nk + (1 - eps) * sk) / ((1 - eps / 8) * sk)
    max_ratio = float(np.max(ratio))
    ok_max = lhs_max >= rhs_max
    ok_min = margin_min >= 0
    values = {
        "k": k,
        "L": L,
        "max_ratio": max_ratio,
        "bound": bound,
        "lemma_margin": bound - max_ratio,
        "lemma_holds": max_ratio <= bound,
        "max_lower": ok_max,
        "max_lower_margin": lhs_max - rhs_max,
        "min_upper": ok_min,
        "min_upper_margin": margin_min,
        "regime_ratio_bound": regime_bound,
        "side_conditions": side,
        "in_regime": all(side.values()),
        "t_points": points,
    }
    return CexReport(Check.LEMMA_6_2, ok_max and ok_min, values)


def _lemma63(spec: CounterexampleSpec, zeros: ZeroSet, k: int, L: float) -> CexReport:
    term = _index(spec, k)
    nxt = _index(spec, k + 1)
    log_log_M = float(log_B(zeros, term.log_r)[0])
    chain = math.log(3.0) + term.eps * term.log_r + math.log(term.log_r)
    target = math.log(nxt.log_r / L)
    values = {
        "log_log_M_rk": log_log_M,
        "log_log_bound_6_3": chain,
        "log_rk": term.log_r,
        "log_log_rk1_over_L": target,
    }
    return CexReport(Check.LEMMA_6_3, log_log_M < target, values)


def _sum_diverges(spec: CounterexampleSpec, K: int) -> CexReport:
    eps = [spec.terms[0].eps] + [spec.rule(m) for m in range(2, K + 1)]
    sums = np.cumsum(eps)
    m = np.arange(1, K + 1, dtype=float)
    rate = float(np.polyfit(np.log(m), np.log(sums), 1)[0]) if K >= 2 else math.nan
    increasing = bool(np.all(np.diff(sums) > 0))
    return CexReport(Check.SUM_DIVERGES, increasing and rate > 0,
                     {"partial_sums": tuple(float(v) for v in sums), "growth_exponent": rate})


def _cond610(spec: CounterexampleSpec) -> CexReport:
    vals = tuple(t.eps * t.log_r ** (1.0 / k) for k, t in enumerate(spec.terms, start=1))
    trend = all(b > a for a, b in zip(vals, vals[1:]))
    return CexReport(Check.COND_6_10, trend, {"values": vals, "increasing": trend})


def verify_counterexample(spec: CounterexampleSpec, check: Check, k: int = 2, L: float = 2.0,
                          samples: int = 64, points: int = 10_000, sum_terms: int = 10) -> CexReport:
    zeros = spec.to_zeroset()
    if check is Check.ORDER_ZERO:
        return _order_zero(spec, zeros, samples)
    if check is Check.LEMMA_6_2:
        return _lemma62(spec, zeros, k, L, points)
    if check is Check.LEMMA_6_3:
        return _lemma63(spec, zeros, k, L)
    if check is Check.SUM_DIVERGES:
        return _sum_diverges(spec, sum_terms)
    if check is Check.COND_6_10:
        return _cond610(spec)
    raise MinModError("INVALID_PARAMETER", f"unknown check {check!r}")
