"""Constructive Boutroux-Cartan covering and the exceptional radii it induces.

Construction (for m points counted with multiplicity and a level h):

1. Put H = m h / (m!)^{1/m}  (so that m! (H/m)^m = h^m; note H <= e h).
2. Repeatedly take the largest lam such that some closed disc of radius
   lam H / m contains lam of the remaining points; remove them as a group.
3. Output, for each group, the concentric disc of twice that radius.

Outside the output discs every closed disc D(z, k H / m) holds fewer than k
points, so the k-th nearest point is at distance >= k H / m and
prod |z - z_n| >= m! (H/m)^m = h^m. The radii sum to 2H <= 2 e h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import MinModError
from .growth import counting_N, counting_Q, ray_log_min, log_min_modulus_array
from .logspace import LogReal, log_of
from .parallel import chunks, ordered_map
from .zeros import ZeroSet

COUNT_TOL = 1e-12
MAX_POINTS = 4096


@dataclass(frozen=True)
class Disc:
    center: complex
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius)):
            raise MinModError("INVALID_DISC", f"radius {self.radius!r}")


@dataclass(frozen=True)
class CartanCover:
    discs: tuple[Disc, ...]
    h: float
    point_count: int
    group_sizes: tuple[int, ...] = ()
    # per input point: the radius lam_j H / m of its group; the union of
    # D(z_i, point_radii[i]) is a finer exclusion set inside the discs
    point_radii: tuple[float, ...] = ()

    @property
    def radius_sum(self) -> float:
        return math.fsum(d.radius for d in self.discs)


@dataclass(frozen=True)
class CoverReport:
    passed: bool
    log_min_product: float
    log_level: float  # m ln h
    witness: Optional[complex]
    grid_points: int

    @property
    def min_product(self) -> float:
        return math.exp(self.log_min_product) if self.log_min_product < 709 else math.inf


@dataclass(frozen=True)
class IntervalSet:
    """Disjoint sorted intervals of radii, stored in units of ``scale``."""

    intervals: tuple[tuple[float, float], ...]
    scale: LogReal = field(default=LogReal(0.0))

    @property
    def total_fraction(self) -> float:
        return math.fsum(hi - lo for lo, hi in self.intervals)

    @property
    def log_total_length(self) -> float:
        tot = self.total_fraction
        return math.log(tot) + self.scale.log_value if tot > 0 else -math.inf

    def contains(self, frac: np.ndarray) -> np.ndarray:
        frac = np.asarray(frac, dtype=float)
        inside = np.zeros(frac.shape, dtype=bool)
        for lo, hi in self.intervals:
            inside |= (frac >= lo) & (frac <= hi)
        return inside


@dataclass(frozen=True)
class ExceptionalResult:
    intervals: IntervalSet
    bound: float
    N: float
    Q: float
    eta: float
    point_count: int
    cover: Optional[CartanCover]

    @property
    def within_budget(self) -> bool:
        return self.intervals.total_fraction <= self.eta

    @property
    def bound_positive(self) -> bool:
        return self.bound > 0


def _as_points(points) -> np.ndarray:
    pts = np.asarray(points, dtype=complex).ravel()
    if pts.size == 0:
        raise MinModError("EMPTY_POINTS", "no points given")
    return pts


def _best_disc(pts: np.ndarray, w: np.ndarray, rho: float, lam: int) -> Optional[complex]:
    """Lexicographically smallest centre of a radius-rho disc holding >= lam weight."""
    cands = [pts]
    d = pts[:, None] - pts[None, :]
    dist = np.abs(d)
    i, j = np.nonzero(np.triu((dist > 0) & (dist <= 2 * rho), 1))
    if i.size:
        mid = 0.5 * (pts[i] + pts[j])
        dij = dist[i, j]
        off = np.sqrt(np.maximum(rho * rho - 0.25 * dij * dij, 0.0))
        perp = 1j * d[j, i] / dij
        cands += [mid + off * perp, mid - off * perp]
    c = np.concatenate(cands)
    inside = np.abs(c[:, None] - pts[None, :]) <= rho * (1 + COUNT_TOL)
    counts = inside.astype(float) @ w
    ok = np.nonzero(counts >= lam - 0.5)[0]
    if ok.size == 0:
        return None
    best = min(ok, key=lambda k: (c[k].real, c[k].imag))
    return complex(c[best])


def cartan_discs(points, h: float, weights: Optional[Sequence[int]] = None) -> CartanCover:
    pts = _as_points(points)
    if not h > 0:
        raise MinModError("NONPOSITIVE_H", f"h = {h!r}")
    w = np.ones(pts.size) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != pts.shape or np.any(w < 1) or np.any(w != np.round(w)):
        raise MinModError("INVALID_WEIGHTS", "weights must be positive integers, one per point")
    m = int(w.sum())
    if m > MAX_POINTS:
        raise MinModError("TOO_MANY_POINTS", f"{m} points exceeds {MAX_POINTS}")
    H = math.exp(math.log(m * h) - math.lgamma(m + 1) / m)
    rem = w.copy()
    point_radii = np.zeros(pts.size)
    discs, sizes = [], []
    lam_cap = m
    while rem.sum() > 0.5:
        active = np.nonzero(rem > 0)[0]
        total = int(rem.sum())
        for lam in range(min(lam_cap, total), 0, -1):
            rho = lam * H / m
            center = _best_disc(pts[active], rem[active], rho, lam)
            if center is not None:
                break
        else:  # pragma: no cover - lam = 1 always succeeds
            raise AssertionError("no admissible disc")
        # take exactly lam units of weight, nearest first
        order = active[np.argsort(np.abs(pts[active] - center), kind="stable")]
        need = lam
        for idx in order:
            if need == 0:
                break
            if abs(pts[idx] - center) > rho * (1 + COUNT_TOL):
                break
            take = min(need, rem[idx])
            rem[idx] -= take
            need -= int(take)
            point_radii[idx] = max(point_radii[idx], rho)
        discs.append(Disc(center, 2 * rho))
        sizes.append(lam)
        lam_cap = lam
    return CartanCover(tuple(discs), float(h), m, tuple(sizes), tuple(float(v) for v in point_radii))


def verify_cover(points, h: float, cover: CartanCover, grid_step: float,
                 weights: Optional[Sequence[int]] = None, workers: int = 1) -> CoverReport:
    """Grid search for points of {prod |z - z_n| <= h^m} left outside the cover.

    The lattice spans the bounding box inflated by 2eh. Only lattice points
    within distance h of some z_n are evaluated: elsewhere every factor
    exceeds h, so the product exceeds h^m.
    """
    pts = _as_points(points)
    if not grid_step > 0:
        raise MinModError("INVALID_PARAMETER", "grid_step must be positive")
    w = np.ones(pts.size) if weights is None else np.asarray(weights, dtype=float)
    m = float(w.sum())
    log_level = m * math.log(h)
    pad = 2 * math.e * h
    x0 = pts.real.min() - pad
    y0 = pts.imag.min() - pad
    idx = []
    for p in pts:
        i_lo = int(math.floor((p.real - h - x0) / grid_step))
        i_hi = int(math.ceil((p.real + h - x0) / grid_step))
        j_lo = int(math.floor((p.imag - h - y0) / grid_step))
        j_hi = int(math.ceil((p.imag + h - y0) / grid_step))
        ii, jj = np.meshgrid(np.arange(i_lo, i_hi + 1), np.arange(j_lo, j_hi + 1), indexing="ij")
        idx.append(np.stack([ii.ravel(), jj.ravel()], axis=1))
    lattice = np.unique(np.concatenate(idx), axis=0)
    z = (x0 + lattice[:, 0] * grid_step) + 1j * (y0 + lattice[:, 1] * grid_step)
    if cover.discs:
        c = np.array([d.center for d in cover.discs])
        rad = np.array([d.radius for d in cover.discs]) + grid_step
        covered = np.zeros(z.size, dtype=bool)
        for part in chunks(z.size, 65536):
            covered[part] = np.any(np.abs(z[part, None] - c[None, :]) <= rad[None, :], axis=1)
        z = z[~covered]

    def block(part):
        with np.errstate(divide="ignore"):
            return np.log(np.abs(z[part, None] - pts[None, :])) @ w

    parts = chunks(z.size, 16384)
    vals = np.concatenate(ordered_map(block, parts, workers)) if parts else np.empty(0)
    if vals.size == 0:
        return CoverReport(True, math.inf, log_level, None, 0)
    k = int(np.argmin(vals))
    low = float(vals[k])
    passed = low > log_level
    return CoverReport(passed, low, log_level, None if passed else complex(z[k]), int(z.size))


def _merge(intervals: list[tuple[float, float]]) -> tuple[tuple[float, float], ...]:
    out: list[list[float]] = []
    for lo, hi in sorted(intervals):
        if out and lo <= out[-1][1]:
            out[-1][1] = max(out[-1][1], hi)
        else:
            out.append([lo, hi])
    return tuple((lo, hi) for lo, hi in out)


def exceptional_intervals(zeros: ZeroSet, R: LogReal, eta: float) -> ExceptionalResult:
    """Radii in [0, R/2] (units of R) outside which
    ln m(r) > N(R) - (1 + ln(2e/eta)) Q(R).

    The zeros inside radius R are rescaled by 1/R and covered with h = eta/(2e).
    The circle |z| = r can only meet the exceptional set where it meets one of
    the per-point discs D(z_i/R, lam H/m), so those are projected to moduli.
    """
    zeros.require_nonempty()
    S = log_of(R)
    if not 0 < eta < 0.5:
        raise MinModError("ETA_OUT_OF_RANGE", f"eta = {eta!r} not in (0, 1/2)")
    if not S > zeros.log_radii[0]:
        raise MinModError("INVALID_PARAMETER", "R must exceed the first zero radius")
    N = float(counting_N(zeros, S)[0])
    Q = float(counting_Q(zeros, S)[0])
    bound = N - (1.0 + math.log(2 * math.e / eta)) * Q
    inner = [e for e in zeros.entries if e.log_radius < S]
    if any(e.exact_multiplicity is None for e in inner):
        raise MinModError("UNSUPPORTED", "covering needs exact multiplicities inside radius R")
    pts = np.array([math.exp(e.log_radius - S) * complex(math.cos(e.angle), math.sin(e.angle)) for e in inner])
    w = [e.exact_multiplicity for e in inner]
    cover = cartan_discs(pts, eta / (2 * math.e), weights=w)
    raw = []
    for p, rho in zip(pts, cover.point_radii):
        lo, hi = max(abs(p) - rho, 0.0), min(abs(p) + rho, 0.5)
        if lo < hi:
            raw.append((float(lo), float(hi)))
    iv = IntervalSet(_merge(raw), R)
    return ExceptionalResult(iv, bound, N, Q, eta, cover.point_count, cover)


@dataclass(frozen=True)
class OutsideCheck:
    samples: int
    min_margin: float
    worst_fraction: float
    passed: bool


def check_outside(zeros: ZeroSet, result: ExceptionalResult, samples: int = 10_000,
                  slack: float = 1e-6) -> OutsideCheck:
    """Sample r uniformly in (0, R/2] off the intervals and compare ln m(r) with the bound."""
    S = result.intervals.scale.log_value
    frac = (np.arange(1, samples + 1) - 0.5) / samples * 0.5
    keep = ~result.intervals.contains(frac)
    # fill back up to ``samples`` points by densifying only the admissible part
    grid = frac[keep]
    n_try = samples
    while grid.size < samples:
        n_try *= 2
        fine = (np.arange(1, n_try + 1) - 0.5) / n_try * 0.5
        grid = fine[~result.intervals.contains(fine)]
    grid = grid[np.linspace(0, grid.size - 1, samples).round().astype(int)]
    s = S + np.log(grid)
    if zeros.on_common_ray:
        lm = ray_log_min(zeros, s)
    else:
        lm = log_min_modulus_array(zeros, s)
    margin = lm - result.bound
    k = int(np.argmin(margin))
    tol = slack * (1.0 + abs(result.bound))
    return OutsideCheck(int(grid.size), float(margin[k]), float(grid[k]), bool(margin[k] >= -tol))
