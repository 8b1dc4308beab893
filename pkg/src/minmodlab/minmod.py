"""Radii where the minimum modulus is provably close to the maximum modulus.

* :func:`find_good_radius` locates R with a(R)/B(R) <= nu inside
  (r^{(1-delta)(1-mu)}, r^{1-delta}).
* :func:`verify_theorem2` measures how much of [0, R/2] violates
  ln m(t) > (1 - 20 ln(2e/eta) nu) ln M(t).
* :func:`find_annulus_min_ge` finds the smallest rho in [r, r^L] with
  ln m(rho) >= a target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import MinModError, NotFoundError, PreconditionError
from .growth import (
    counting_B,
    geometric_grid,
    growth_profile,
    log_B,
    log_max_modulus_array,
    log_min_modulus_array,
    ray_log_min,
)
from .logspace import (
    LogReal,
    log_abs_expm1,
    log_of,
    log_weighted_sum,
    signed_log_abs_expm1,
    softplus,
    weighted_sum,
)
from .zeros import ZeroSet

SEARCH_POINTS_PER_DECADE = 256
SEARCH_MAX_POINTS = 1 << 17
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GoodRadiusReport:
    r: LogReal
    R: LogReal
    ratio_aB: float
    ratio_QN: float
    interval: tuple[LogReal, LogReal]
    mu: float
    nu: float
    alpha: float
    epsilon: float
    delta: float

    def satisfies_bounds(self) -> bool:
        lo, hi = self.interval
        return (lo < self.R < hi) and self.ratio_aB <= self.nu and self.ratio_QN <= 8 * self.nu


@dataclass(frozen=True)
class Theorem2Report:
    R: LogReal
    threshold_factor: float
    sampled_points: int
    violating_fraction: float  # violating length / R
    eta: float
    vacuous: bool
    rigorous: bool  # cell bounds certified (common ray) vs. endpoint sampling
    good_radius: GoodRadiusReport

    @property
    def passed(self) -> bool:
        return self.violating_fraction <= self.eta

    @property
    def log_violating_length(self) -> float:
        if self.violating_fraction <= 0:
            return -math.inf
        return math.log(self.violating_fraction) + self.R.log_value


def theorem2_factor(eta: float, nu: float) -> float:
    return 1.0 - 20.0 * math.log(2 * math.e / eta) * nu


# -- ratio helpers in log space --------------------------------------------------


def _log_a(zeros: ZeroSet, s: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(s)[:, None] - zeros.log_radii[None, :]
    return log_weighted_sum(zeros.log_mults, -softplus(-x))


def _log_Q(zeros: ZeroSet, s: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(s)[:, None] - zeros.log_radii[None, :]
    return log_weighted_sum(zeros.log_mults, np.minimum(x, 0.0))


def _log_N(zeros: ZeroSet, s: np.ndarray) -> np.ndarray:
    x = np.atleast_1d(s)[:, None] - zeros.log_radii[None, :]
    with np.errstate(divide="ignore"):
        return log_weighted_sum(zeros.log_mults, np.log(np.maximum(x, 0.0)))


def ratio_aB(zeros: ZeroSet, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.exp(_log_a(zeros, s) - log_B(zeros, s))


def ratio_QN(zeros: ZeroSet, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return np.exp(_log_Q(zeros, s) - _log_N(zeros, s))


# -- good radius -------------------------------------------------------------------


def find_good_radius(zeros: ZeroSet, r: LogReal, alpha: float, mu: float, nu: float) -> GoodRadiusReport:
    zeros.require_nonempty()
    s = log_of(r)
    if not (0 < mu <= 1 and 0 < nu <= 0.25):
        raise PreconditionError("need 0 < mu <= 1 and 0 < nu <= 1/4", mu=mu, nu=nu)
    prof = growth_profile(zeros, r, alpha)
    eps, delta = prof.epsilon, prof.delta
    if not delta < 1:
        raise PreconditionError("delta(r) >= 1", delta=delta)
    need = 2 * eps / (1 - delta)
    if not mu * nu > need:
        raise PreconditionError("mu*nu <= 2 eps/(1 - delta)", mu_nu=mu * nu, required=need)
    if not prof.order_estimate < alpha:
        raise PreconditionError("order estimate not below alpha", order=prof.order_estimate, alpha=alpha)

    lo = (1 - delta) * (1 - mu) * s
    hi = (1 - delta) * s
    count = int(math.ceil((hi - lo) / math.log(10.0) * SEARCH_POINTS_PER_DECADE)) + 1
    count = min(max(count, 3), SEARCH_MAX_POINTS)
    grid = np.linspace(lo, hi, count + 1)[1:-1]
    ratio = ratio_aB(zeros, grid)
    hits = np.nonzero(ratio <= nu)[0]
    if hits.size == 0:
        k = int(np.argmin(ratio))
        raise NotFoundError("no R with a(R)/B(R) <= nu on the grid",
                            min_ratio=float(ratio[k]), at_log_R=float(grid[k]))
    i = int(hits[0])
    R = float(grid[i])
    left = lo if i == 0 else float(grid[i - 1])
    if float(ratio_aB(zeros, left)[0]) > nu:
        a, b = left, R
        for _ in range(200):
            mid = 0.5 * (a + b)
            if mid <= a or mid >= b:
                break
            if float(ratio_aB(zeros, mid)[0]) <= nu:
                b = mid
            else:
                a = mid
        R = b
    return GoodRadiusReport(
        r=r,
        R=LogReal(R),
        ratio_aB=float(ratio_aB(zeros, R)[0]),
        ratio_QN=float(ratio_QN(zeros, R)[0]),
        interval=(LogReal(lo), LogReal(hi)),
        mu=mu,
        nu=nu,
        alpha=alpha,
        epsilon=eps,
        delta=delta,
    )


# -- theorem 2 verification -------------------------------------------------------


def _cell_violations(zeros: ZeroSet, S: float, samples: int, factor: float) -> tuple[np.ndarray, bool]:
    """Flags for the ``samples`` equal cells of [0, R/2] that may violate the bound."""
    u = np.arange(samples + 1) / (2.0 * samples)
    with np.errstate(divide="ignore"):
        s = S + np.log(u)
    if zeros.on_common_ray:
        x = s[:, None] - zeros.log_radii[None, :]
        # each factor is monotone on a cell free of zero radii: decreasing in t
        # below its zero, increasing above, so its minimum sits at one endpoint
        xc = np.where(x[1:] <= 0, x[1:], x[:-1])
        lower = weighted_sum(zeros.mults, log_abs_expm1(xc), zeros.log_mults,
                             lambda: signed_log_abs_expm1(xc))
        # a zero radius inside a cell drives ln m to -inf there
        idx = np.searchsorted(s, zeros.log_radii, side="left")
        for j in idx:
            if 0 < j <= samples:
                lower[j - 1] = -math.inf
        B = counting_B(zeros, s)
        rhs = factor * (B[1:] if factor >= 0 else B[:-1])
        return lower <= rhs, True
    lm = log_min_modulus_array(zeros, s)
    lM = log_max_modulus_array(zeros, s)
    bad = lm <= factor * lM
    return bad[:-1] | bad[1:], False


def verify_theorem2(zeros: ZeroSet, r: LogReal, alpha: float, eta: float, mu: float, nu: float,
                    samples: int = 100_000) -> Theorem2Report:
    if not 0 < eta < 0.5:
        raise MinModError("ETA_OUT_OF_RANGE", f"eta = {eta!r}")
    rep = find_good_radius(zeros, r, alpha, mu, nu)
    factor = theorem2_factor(eta, nu)
    bad, rigorous = _cell_violations(zeros, rep.R.log_value, samples, factor)
    fraction = float(np.count_nonzero(bad)) / (2.0 * samples)
    return Theorem2Report(rep.R, factor, samples, fraction, eta, factor <= 0, rigorous, rep)


# -- annulus search ---------------------------------------------------------------


def _segments(zeros: ZeroSet, s_lo: float, s_hi: float) -> np.ndarray:
    inner = zeros.log_radii[(zeros.log_radii > s_lo) & (zeros.log_radii < s_hi)]
    edges = np.concatenate([[s_lo], inner, [s_hi]])
    return np.stack([edges[:-1], edges[1:]], axis=1)


def segment_maxima(zeros: ZeroSet, s_lo: float, s_hi: float, iters: int = 120) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Per-segment maxima of ln m on a common ray.

    Between consecutive zero radii ln m(e^s) is a sum of concave functions of
    s, so golden-section search on each segment is exact up to rounding.
    Returns (segments, argmax, max).
    """
    seg = _segments(zeros, s_lo, s_hi)
    a, b = seg[:, 0].copy(), seg[:, 1].copy()
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = ray_log_min(zeros, c), ray_log_min(zeros, d)
    for _ in range(iters):
        left = fc >= fd
        b = np.where(left, d, b)
        a = np.where(left, a, c)
        nc = np.where(left, b - GOLDEN * (b - a), d)
        nd = np.where(left, c, a + GOLDEN * (b - a))
        fnew = ray_log_min(zeros, np.where(left, nc, nd))
        fc, fd = np.where(left, fnew, fd), np.where(left, fc, fnew)
        c, d = nc, nd
    cand_s = np.stack([seg[:, 0], c, d, seg[:, 1]], axis=1)
    cand_f = np.stack([ray_log_min(zeros, seg[:, 0]), fc, fd, ray_log_min(zeros, seg[:, 1])], axis=1)
    k = np.argmax(cand_f, axis=1)
    rows = np.arange(seg.shape[0])
    return seg, cand_s[rows, k], cand_f[rows, k]


def max_log_min(zeros: ZeroSet, s_lo: float, s_hi: float) -> tuple[float, float]:
    """max of ln m(t) over ln t in [s_lo, s_hi]; returns (value, ln t)."""
    if zeros.on_common_ray:
        _, arg, val = segment_maxima(zeros, s_lo, s_hi)
        k = int(np.argmax(val))
        return float(val[k]), float(arg[k])
    grid = geometric_grid(s_lo, s_hi, SEARCH_POINTS_PER_DECADE, max_points=4096)
    vals = log_min_modulus_array(zeros, grid)
    k = int(np.argmax(vals))
    return float(vals[k]), float(grid[k])


def _bisect_up(fn, a: float, b: float, target: float) -> float:
    """Smallest point (to rounding) where an increasing ``fn`` reaches target on [a, b]."""
    for _ in range(300):
        mid = 0.5 * (a + b)
        if mid <= a or mid >= b:
            break
        if fn(mid) >= target:
            b = mid
        else:
            a = mid
    return b


def find_annulus_min_ge(zeros: ZeroSet, r: LogReal, target_log: float, L: float) -> LogReal:
    """Smallest rho in [r, r^L] with ln m(rho) >= target_log."""
    zeros.require_nonempty()
    s = log_of(r)
    if not L > 1:
        raise MinModError("INVALID_PARAMETER", "L must exceed 1")
    if not math.isfinite(target_log):
        raise MinModError("INVALID_PARAMETER", "target must be finite")
    if not s > 0:
        raise MinModError("INVALID_PARAMETER", "need r > 1 so that r^L > r")
    s_hi = L * s
    if zeros.on_common_ray:
        seg, arg, val = segment_maxima(zeros, s, s_hi)
        ok = np.nonzero(val >= target_log)[0]
        if ok.size == 0:
            raise NotFoundError("target above max of ln m on [r, r^L]", achieved=float(val.max()))
        j = int(ok[0])
        a = float(seg[j, 0])
        fn = lambda v: float(ray_log_min(zeros, v)[0])
        if fn(a) >= target_log:
            return LogReal(a)
        return LogReal(_bisect_up(fn, a, float(arg[j]), target_log))
    count = int(math.ceil((s_hi - s) / math.log(10.0) * SEARCH_POINTS_PER_DECADE)) + 1
    grid = np.linspace(s, s_hi, min(max(count, 2), 8192))
    vals = log_min_modulus_array(zeros, grid)
    ok = np.nonzero(vals >= target_log)[0]
    if ok.size == 0:
        raise NotFoundError("target above sampled max of ln m", achieved=float(vals.max()))
    i = int(ok[0])
    if i == 0:
        return LogReal(float(grid[0]))
    fn = lambda v: float(log_min_modulus_array(zeros, v)[0])
    return LogReal(_bisect_up(fn, float(grid[i - 1]), float(grid[i]), target_log))


def annulus_witness_check(zeros: ZeroSet, r: LogReal, rho: LogReal, target_log: float, L: float) -> bool:
    s, p = log_of(r), log_of(rho)
    lm = float(ray_log_min(zeros, p)[0]) if zeros.on_common_ray else float(log_min_modulus_array(zeros, p)[0])
    return s <= p <= L * s and lm >= target_log


def best_ratio_point(zeros: ZeroSet, s_lo: float, s_hi: float, exclude=None, points: int = 256) -> tuple[float, float]:
    """ln t in [s_lo, s_hi] maximizing ln m(t) / ln M(t); ``exclude(s) -> bool mask``."""
    grid = np.linspace(s_lo, s_hi, points)
    if exclude is not None:
        grid = grid[~exclude(grid)]
    if grid.size == 0:
        raise NotFoundError("every candidate t excluded")
    lm = log_min_modulus_array(zeros, grid)
    lM = log_max_modulus_array(zeros, grid)
    ratio = lm / lM
    k = int(np.nanargmax(ratio))
    return float(grid[k]), float(ratio[k])
