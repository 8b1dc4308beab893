"""Iteration-side checks: M-orbits, the orbit annulus criterion and growth conditions.

Nothing here decides whether a Fatou component is unbounded. Each checker
evaluates a sufficient condition on a finite window and reports margins,
witnesses and partial sums.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import MinModError, NotFoundError
from .growth import (
    geometric_grid,
    growth_profile,
    log_log_max_modulus_array,
    log_max_modulus,
    log_max_modulus_array,
    log_min_modulus,
    max_epsilon,
)
from .logspace import MAX_LOG, LogReal, iterated_exp, iterated_log, log_of
from .minmod import best_ratio_point, find_annulus_min_ge, find_good_radius, max_log_min
from .parallel import ordered_map
from .zeros import ZeroSet

ORBIT_CAP = MAX_LOG / 2


class StopReason(enum.Enum):
    STEPS_DONE = "STEPS_DONE"
    LOG_OVERFLOW = "LOG_OVERFLOW"


class ConditionId(enum.Enum):
    THEOREM1 = "THEOREM1"
    HINKKANEN = "HINKKANEN"
    THEOREM3 = "THEOREM3"
    THEOREM4 = "THEOREM4"
    THEOREM5 = "THEOREM5"
    THEOREM6 = "THEOREM6"
    COND_7_2 = "COND_7_2"
    COND_7_3 = "COND_7_3"


class Verdict(enum.Enum):
    SATISFIED_ON_WINDOW = "SATISFIED_ON_WINDOW"
    VIOLATED = "VIOLATED"
    INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class OrbitRecord:
    log_R: tuple[float, ...]
    stopped_reason: StopReason

    @property
    def increasing(self) -> bool:
        return all(b > a for a, b in zip(self.log_R, self.log_R[1:]))

    def window_index(self, s: float) -> Optional[int]:
        """n (0-based) with log R_n <= s < log R_{n+1}, or None."""
        for n, (a, b) in enumerate(zip(self.log_R, self.log_R[1:])):
            if a <= s < b:
                return n
        return None


@dataclass(frozen=True)
class CriterionReport:
    condition_id: ConditionId
    verdict: Verdict
    witnesses: tuple[tuple[float, float], ...] = ()
    partial_sums: Optional[tuple[float, ...]] = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict is Verdict.VIOLATED and not self.witnesses:
            raise MinModError("INTERNAL", "VIOLATED report without a witness")


# -- orbit -----------------------------------------------------------------------


def m_orbit(zeros: ZeroSet, log_R1: float, steps: int) -> OrbitRecord:
    """log R_1, ..., log R_steps with R_{n+1} = M(R_n), computed in log space."""
    if steps < 1:
        raise MinModError("INVALID_PARAMETER", "steps must be >= 1")
    zeros.require_nonempty()
    out = [float(log_R1)]
    reason = StopReason.STEPS_DONE
    while len(out) < steps:
        nxt = log_max_modulus(zeros, LogReal(out[-1]))
        if not nxt <= ORBIT_CAP:
            reason = StopReason.LOG_OVERFLOW
            break
        out.append(float(nxt))
    return OrbitRecord(tuple(out), reason)


# -- orbit annulus criterion ---------------------------------------------------


@dataclass(frozen=True)
class Lemma21Report:
    passed: bool
    witnesses: tuple[float, ...]  # log rho_n
    targets: tuple[float, ...]  # c(n+1) log R_{n+1}
    failed_step: Optional[int] = None
    diagnostic: dict = field(default_factory=dict)


def check_lemma21(zeros: ZeroSet, orbit: OrbitRecord, c: Sequence[float]) -> Lemma21Report:
    if len(orbit.log_R) < 2:
        raise MinModError("INVALID_PARAMETER", "orbit needs at least two entries")
    steps = len(orbit.log_R) - 1
    if len(c) < steps + 1:
        raise MinModError("INVALID_PARAMETER", f"need {steps + 1} values of c")
    if any(not cn > 1 for cn in c):
        raise MinModError("INVALID_PARAMETER", "c(n) must exceed 1")
    wit, tgt = [], []
    for n in range(steps):
        target = c[n + 1] * orbit.log_R[n + 1]
        tgt.append(target)
        try:
            rho = find_annulus_min_ge(zeros, LogReal(orbit.log_R[n]), target, c[n])
        except NotFoundError as exc:
            return Lemma21Report(False, tuple(wit), tuple(tgt), n + 1, dict(exc.diagnostic))
        except MinModError as exc:
            return Lemma21Report(False, tuple(wit), tuple(tgt), n + 1, {"reason": str(exc)})
        wit.append(rho.log_value)
    return Lemma21Report(True, tuple(wit), tuple(tgt))


def reverify_lemma21(zeros: ZeroSet, orbit: OrbitRecord, c: Sequence[float], report: Lemma21Report) -> list[bool]:
    """Independent per-step check of items (1)-(3) from the public evaluators."""
    ok = []
    for n, lr in enumerate(report.witnesses):
        s = orbit.log_R[n]
        item1 = math.isclose(log_max_modulus(zeros, LogReal(s)), orbit.log_R[n + 1], rel_tol=1e-12)
        item2 = s <= lr <= c[n] * s
        item3 = log_min_modulus(zeros, LogReal(lr)) >= c[n + 1] * orbit.log_R[n + 1]
        ok.append(item1 and item2 and item3)
    return ok


# -- sufficient conditions -------------------------------------------------------


@dataclass(frozen=True)
class Theorem1Spec:
    L: float = 2.0
    points_per_window: int = 32


@dataclass(frozen=True)
class HinkkanenSpec:
    L: float = 2.0
    C: float = 1.0
    delta: float = 1.0
    points_per_window: int = 32


@dataclass(frozen=True)
class Theorem3Spec:
    per_decade: int = 64


@dataclass(frozen=True)
class Theorem4Spec:
    m: int = 1
    s_lo: Optional[float] = None
    s_hi: Optional[float] = None
    per_decade: int = 64
    max_points: int = 4096


def _window_grid(a: float, b: float, k: int) -> np.ndarray:
    return np.linspace(a, b, k, endpoint=False)


def _decay(terms: Sequence[float]) -> Optional[float]:
    """Fitted geometric ratio of the positive terms (least squares on logs)."""
    t = np.asarray(terms, dtype=float)
    idx = np.nonzero(t > 0)[0]
    if idx.size < 2:
        return None
    slope = np.polyfit(idx.astype(float), np.log(t[idx]), 1)[0]
    return float(math.exp(slope))


def _summable_trend(terms: Sequence[float]) -> bool:
    rate = _decay(terms)
    return rate is not None and rate < 1 and terms[-1] <= terms[0]


def _best_annulus_log_min(zeros: ZeroSet, s: float, L: float) -> float:
    return max_log_min(zeros, s, L * s)[0]


def _theorem1(zeros, orbit, spec: Theorem1Spec, workers):
    if not spec.L > 1:
        raise MinModError("INVALID_PARAMETER", "L must exceed 1")
    a_n, wit = [], []
    for n in range(len(orbit.log_R) - 1):
        grid = _window_grid(orbit.log_R[n], orbit.log_R[n + 1], spec.points_per_window)
        best = np.array(ordered_map(lambda s: _best_annulus_log_min(zeros, s, spec.L), grid, workers))
        lM = log_max_modulus_array(zeros, grid)
        a = 1.0 - best / (spec.L * lM)
        k = int(np.argmax(a))
        a_n.append(float(a[k]))
        wit.append((float(grid[k]), float(a[k])))
    # a nonpositive raw value means any positive a_n works there; count it as 0
    terms = [max(a, 0.0) for a in a_n]
    sums = tuple(np.cumsum(terms).tolist())
    bad = [w for w in wit if not w[1] < 1]
    if bad:
        verdict = Verdict.VIOLATED
        wit = bad
    elif not any(terms) or _summable_trend(terms):
        verdict = Verdict.SATISFIED_ON_WINDOW
    else:
        verdict = Verdict.INCONCLUSIVE
    return CriterionReport(ConditionId.THEOREM1, verdict, tuple(wit), sums,
                           {"a_n": tuple(terms), "raw_a_n": tuple(a_n), "decay": _decay(terms), "L": spec.L})


def _hinkkanen(zeros, orbit, spec: HinkkanenSpec, workers):
    if not (spec.L > 1 and spec.C > 0 and 0 < spec.delta <= 1):
        raise MinModError("INVALID_PARAMETER", "need L > 1, C > 0, 0 < delta <= 1")
    grids = [_window_grid(a, b, spec.points_per_window) for a, b in zip(orbit.log_R, orbit.log_R[1:])]
    grid = np.concatenate(grids) if grids else np.array([orbit.log_R[0]])
    grid = grid[grid > 0]
    best = np.array(ordered_map(lambda s: _best_annulus_log_min(zeros, s, spec.L), grid, workers))
    lM = log_max_modulus_array(zeros, grid)
    required = spec.L * (1.0 - spec.C / grid ** spec.delta)
    margin = best / lM - required
    wit = tuple((float(s), float(mg)) for s, mg in zip(grid, margin))
    fails = tuple(w for w in wit if w[1] < 0)
    verdict = Verdict.VIOLATED if fails else Verdict.SATISFIED_ON_WINDOW
    return CriterionReport(ConditionId.HINKKANEN, verdict, fails if fails else wit, None,
                           {"L": spec.L, "C": spec.C, "delta": spec.delta})


def _theorem3(zeros, orbit, spec: Theorem3Spec, workers):
    windows = list(zip(orbit.log_R, orbit.log_R[1:]))
    eps = ordered_map(lambda w: max_epsilon(zeros, w[0], w[1], spec.per_decade)[0], windows, workers)
    roots = [math.sqrt(e) if e > 0 else 0.0 for e in eps]
    sums = tuple(np.cumsum(roots).tolist())
    chain = []
    for n in range(len(eps)):
        d = max(eps[n], eps[n + 1]) if n + 1 < len(eps) else eps[n]
        chain.append(232 * math.sqrt(max(d, 0.0)) + 2.0 / orbit.log_R[n])
    growth_15 = tuple(orbit.log_R[n] > 2 ** (n + 1) for n in range(len(orbit.log_R)))
    nonpositive = tuple((float(n + 1), float(e)) for n, e in enumerate(eps) if not e > 0)
    if nonpositive:
        verdict = Verdict.VIOLATED
    elif _summable_trend(roots):
        verdict = Verdict.SATISFIED_ON_WINDOW
    else:
        verdict = Verdict.INCONCLUSIVE
    wit = nonpositive or tuple((float(n + 1), float(r)) for n, r in enumerate(roots))
    return CriterionReport(ConditionId.THEOREM3, verdict, wit, sums,
                           {"epsilon_n": tuple(eps), "chain_a_n": tuple(chain),
                            "log_R_exceeds_2_pow_n": growth_15, "decay": _decay(roots)})


def theorem4_margins(zeros: ZeroSet, s: np.ndarray, m: int) -> np.ndarray:
    """ln r / log^m(ln r) - ln ln M(r); nan where the iterated log is undefined."""
    s = np.asarray(s, dtype=float)
    denom = np.array([iterated_log(v, m) for v in s])
    with np.errstate(invalid="ignore", divide="ignore"):
        rhs = np.where(denom > 0, s / denom, np.nan)
    return rhs - log_log_max_modulus_array(zeros, s)


def theorem4_grid(zeros: ZeroSet, s_lo: float, s_hi: float, per_decade: int = 64, max_points: int = 4096) -> np.ndarray:
    grid = geometric_grid(s_lo, s_hi, per_decade, max_points=max_points)
    kinks = zeros.log_radii[(zeros.log_radii >= s_lo) & (zeros.log_radii <= s_hi)]
    return np.unique(np.concatenate([grid, kinks, [s_lo, s_hi]]))


def theorem4_threshold(zeros: ZeroSet, m: int, s_lo: float, s_hi: float, per_decade: int = 64) -> Optional[float]:
    """Smallest grid ln r beyond which every grid point satisfies the condition."""
    grid = theorem4_grid(zeros, s_lo, s_hi, per_decade)
    ok = theorem4_margins(zeros, grid, m) > 0
    if not ok[-1]:
        return None
    bad = np.nonzero(~ok)[0]
    return float(grid[0] if bad.size == 0 else grid[bad[-1] + 1])


def _theorem4(zeros, orbit, spec: Theorem4Spec, workers):
    if spec.m < 1 or int(spec.m) != spec.m:
        raise MinModError("INVALID_PARAMETER", "m must be a positive integer")
    s_lo = spec.s_lo if spec.s_lo is not None else orbit.log_R[0]
    s_hi = spec.s_hi if spec.s_hi is not None else orbit.log_R[-1]
    if not s_hi >= s_lo > 0:
        raise MinModError("INVALID_PARAMETER", "need 0 < s_lo <= s_hi")
    grid = theorem4_grid(zeros, s_lo, s_hi, spec.per_decade, spec.max_points)
    margin = theorem4_margins(zeros, grid, spec.m)
    defined = ~np.isnan(margin)
    fails = tuple((float(s), float(mg)) for s, mg in zip(grid[defined], margin[defined]) if mg <= 0)
    if fails:
        verdict, wit = Verdict.VIOLATED, fails
    elif defined.any():
        verdict = Verdict.SATISFIED_ON_WINDOW
        wit = tuple((float(s), float(mg)) for s, mg in zip(grid[defined], margin[defined]))
    else:
        verdict, wit = Verdict.INCONCLUSIVE, ()
    return CriterionReport(ConditionId.THEOREM4, verdict, wit, None,
                           {"m": spec.m, "window": (s_lo, s_hi), "points": int(grid.size)})


def check_condition(zeros: ZeroSet, orbit: OrbitRecord, condition, workers: int = 1) -> CriterionReport:
    zeros.require_nonempty()
    if isinstance(condition, Theorem1Spec):
        return _theorem1(zeros, orbit, condition, workers)
    if isinstance(condition, HinkkanenSpec):
        return _hinkkanen(zeros, orbit, condition, workers)
    if isinstance(condition, Theorem3Spec):
        return _theorem3(zeros, orbit, condition, workers)
    if isinstance(condition, Theorem4Spec):
        return _theorem4(zeros, orbit, condition, workers)
    raise MinModError("INVALID_PARAMETER", f"unknown condition {condition!r}")


# -- the min/max chain behind the order-zero condition ------------------------------


@dataclass(frozen=True)
class ChainWitness:
    log_t: float
    ratio: float  # ln m(t) / ln M(t)
    factor_60: float  # 1 - 60 ln(16e) sqrt(eps(r))
    factor_230: float  # 1 - 230 sqrt(eps_n)
    epsilon_r: float
    epsilon_n: float
    log_R: float

    @property
    def holds(self) -> bool:
        return self.ratio > self.factor_60 and self.ratio > self.factor_230


def chain_witness(zeros: ZeroSet, r: LogReal, epsilon_n: Optional[float] = None, samples: int = 256) -> ChainWitness:
    """Good radius R with mu = sqrt(eps), nu = 3 sqrt(eps), then the best t in [R/4, R/2]."""
    s = log_of(r)
    eps = growth_profile(zeros, r, 0.5).epsilon
    mu = math.sqrt(eps)
    rep = find_good_radius(zeros, r, 0.5, mu, 3 * mu)
    S = rep.R.log_value
    lt, ratio = best_ratio_point(zeros, S - math.log(4.0), S - math.log(2.0), points=samples)
    eps_n = eps if epsilon_n is None else epsilon_n
    return ChainWitness(lt, ratio, 1 - 60 * math.log(16 * math.e) * mu, 1 - 230 * math.sqrt(eps_n), eps, eps_n, S)


# -- regularity conditions -----------------------------------------------------------


LogEvaluator = Callable[[float], float]


def zeros_log_M(zeros: ZeroSet) -> LogEvaluator:
    return lambda s: float(log_max_modulus_array(zeros, s)[0])


def _grid_values(r_grid) -> list[float]:
    return [log_of(r) if isinstance(r, LogReal) else float(r) for r in r_grid]


def check_regularity(logM: LogEvaluator, psi: LogEvaluator, m: float, r_grid) -> CriterionReport:
    """Margins ln M(psi(r)) - m ln psi(M(r)) at each grid point.

    ``logM`` maps ln r to ln M(r); ``psi`` maps ln r to ln psi(r).
    """
    if not m > 1:
        raise MinModError("INVALID_PARAMETER", "m must exceed 1")
    wit = []
    for s in _grid_values(r_grid):
        ps = psi(s)
        if ps < s:
            raise MinModError("PSI_BELOW_IDENTITY", f"psi(r) < r at ln r = {s!r}")
        wit.append((s, logM(ps) - m * psi(logM(s))))
    fails = tuple(w for w in wit if not w[1] >= 0)
    verdict = Verdict.VIOLATED if fails else Verdict.SATISFIED_ON_WINDOW
    return CriterionReport(ConditionId.THEOREM5, verdict, fails or tuple(wit), None, {"m": m})


def regularity_threshold(report: CriterionReport, grid) -> Optional[float]:
    """Smallest grid ln r from which every margin is nonnegative."""
    fails = {w[0] for w in report.witnesses} if report.verdict is Verdict.VIOLATED else set()
    vals = _grid_values(grid)
    last_bad = max((i for i, v in enumerate(vals) if v in fails), default=-1)
    return vals[last_bad + 1] if last_bad + 1 < len(vals) else None


def theorem6_psi(n: int, p: float, q: float) -> LogEvaluator:
    """ln psi for psi(r) = exp^n((ln r)^p); requires p q > 1 and 0 < q < 1."""
    if n < 1 or not (0 < q < 1) or not p * q > 1:
        raise MinModError("INVALID_PARAMETER", "need n >= 1, 0 < q < 1 and p q > 1")
    return lambda s: iterated_exp(s ** p, n - 1)


def check_theorem6_growth(logM: LogEvaluator, n: int, q: float, r_grid) -> CriterionReport:
    """Margins ln M(r) - exp^n((log^n r)^q), where log^n r = log^{n-1}(ln r)."""
    wit = []
    for s in _grid_values(r_grid):
        inner = iterated_log(s, n - 1)
        if not inner > 0:
            continue
        wit.append((s, logM(s) - iterated_exp(inner ** q, n)))
    fails = tuple(w for w in wit if not w[1] >= 0)
    if fails:
        verdict = Verdict.VIOLATED
    else:
        verdict = Verdict.SATISFIED_ON_WINDOW if wit else Verdict.INCONCLUSIVE
    return CriterionReport(ConditionId.THEOREM6, verdict, fails or tuple(wit), None, {"n": n, "q": q})


def ratio_probe(logM: LogEvaluator, r_grid, tol: float = 1e-2) -> CriterionReport:
    """ln M(2r)/ln M(r) along the grid; settled when the tail half varies by < tol."""
    vals = _grid_values(r_grid)
    ratios = [(s, logM(s + math.log(2.0)) / logM(s)) for s in vals]
    tail = [v for _, v in ratios[len(ratios) // 2:]]
    spread = max(tail) - min(tail) if tail else math.inf
    verdict = Verdict.SATISFIED_ON_WINDOW if spread < tol else Verdict.INCONCLUSIVE
    return CriterionReport(ConditionId.COND_7_2, verdict, tuple(ratios), None,
                           {"limit_estimate": tail[-1] if tail else None, "tail_spread": spread})


def log_derivative_probe(logM: LogEvaluator, x_grid: Sequence[float], c: float, spacing: float = 1e-3) -> CriterionReport:
    """x phi'(x)/phi(x) - 1 - c with phi(x) = ln M(e^x), by centred differences."""
    if not c > 0:
        raise MinModError("INVALID_PARAMETER", "c must be positive")
    wit = []
    for x in x_grid:
        d = (logM(x + spacing) - logM(x - spacing)) / (2 * spacing)
        wit.append((float(x), x * d / logM(x) - 1.0 - c))
    fails = tuple(w for w in wit if w[1] < 0)
    verdict = Verdict.VIOLATED if fails else Verdict.SATISFIED_ON_WINDOW
    return CriterionReport(ConditionId.COND_7_3, verdict, fails or tuple(wit), None,
                           {"c": c, "spacing": spacing})
