"""Growth functionals of a canonical product given by its zeros.

With r_m the zero radii and k_m their multiplicities, the counting-function
integrals reduce to finite sums:

    n(r) = sum_{r_m <= r} k_m
    N(r) = sum_{r_m <= r} k_m ln(r / r_m)
    Q(r) = sum_m k_m min(1, r / r_m)
    B(r) = sum_m k_m ln(1 + r / r_m)
    a(r) = sum_m k_m r / (r + r_m)

Every sum is evaluated from x = ln r - ln r_m so nothing is ever exponentiated
outside binary64 range.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .errors import MinModError
from .logspace import (
    LogReal,
    log_abs_expm1,
    log_abs_one_minus,
    log_of,
    log_softplus,
    log_weighted_sum,
    signed_log_abs_expm1,
    signed_log_abs_one_minus,
    softplus,
    weighted_sum,
)
from .zeros import ZeroSet

CIRCLE_SAMPLES = 4096
REFINE_ROUNDS = 3
PROFILE_POINTS_PER_DECADE = 64
PROFILE_MAX_POINTS = 1 << 16
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class GrowthQuantities:
    n: float
    N: float
    Q: float
    B: float
    a: float

    def violations(self, rel: float = 1e-12) -> list[str]:
        """Names of the Lemma-3.1-type inequalities that fail at slack ``rel``."""
        def le(lhs, rhs):
            return lhs <= rhs + rel * (1.0 + abs(lhs) + abs(rhs))

        checks = {
            "nonnegative": min(self.n, self.N, self.Q, self.B, self.a) >= 0.0,
            "n<=Q": le(self.n, self.Q),
            "Q<=4a": le(self.Q, 4.0 * self.a),
            "B<=N+2a": le(self.B, self.N + 2.0 * self.a),
            "B<=N+Q": le(self.B, self.N + self.Q),
            "N<=B": le(self.N, self.B),
        }
        return [name for name, ok in checks.items() if not ok]


class TypeClass(enum.Enum):
    MINIMAL = "MINIMAL"
    MEAN = "MEAN"
    MAXIMAL = "MAXIMAL"
    UNDETERMINED = "UNDETERMINED"


@dataclass(frozen=True)
class GrowthProfile:
    epsilon: float
    delta: float
    delta_at: float  # log t where the max defining delta is attained
    order_estimate: float
    type_class: TypeClass
    window: tuple[float, float]  # (ln r, ln r / (1 - alpha))


# -- vectorized kernels over arrays of s = ln r ----------------------------------


def _x(zeros: ZeroSet, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return s[:, None] - zeros.log_radii[None, :]


def counting_n(zeros: ZeroSet, s) -> np.ndarray:
    return weighted_sum(zeros.mults, (_x(zeros, s) >= 0).astype(float))


def counting_N(zeros: ZeroSet, s) -> np.ndarray:
    return weighted_sum(zeros.mults, np.maximum(_x(zeros, s), 0.0), zeros.log_mults)


def counting_Q(zeros: ZeroSet, s) -> np.ndarray:
    x = _x(zeros, s)
    return weighted_sum(zeros.mults, np.exp(np.minimum(x, 0.0)), zeros.log_mults,
                        lambda: (np.ones_like(x), np.minimum(x, 0.0)))


def counting_B(zeros: ZeroSet, s) -> np.ndarray:
    x = _x(zeros, s)
    return weighted_sum(zeros.mults, softplus(x), zeros.log_mults, lambda: (np.ones_like(x), log_softplus(x)))


def counting_a(zeros: ZeroSet, s) -> np.ndarray:
    x = _x(zeros, s)
    return weighted_sum(zeros.mults, expit(x), zeros.log_mults, lambda: (np.ones_like(x), -softplus(-x)))


def log_B(zeros: ZeroSet, s) -> np.ndarray:
    """ln B(r), finite even when B itself overflows (huge multiplicities)."""
    return log_weighted_sum(zeros.log_mults, log_softplus(_x(zeros, s)))


def ray_log_min(zeros: ZeroSet, s) -> np.ndarray:
    """sum k_m ln|1 - r/r_m|: ln m(r) when all zeros share one ray."""
    x = _x(zeros, s)
    return weighted_sum(zeros.mults, log_abs_expm1(x), zeros.log_mults, lambda: signed_log_abs_expm1(x))


def circle_log_modulus(zeros: ZeroSet, s: float, phi) -> np.ndarray:
    """ln|f(r e^{i phi})| for a vector of angles ``phi``."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    x = s - zeros.log_radii
    psi = phi[:, None] - zeros.angles[None, :]
    return weighted_sum(zeros.mults, log_abs_one_minus(x[None, :], psi), zeros.log_mults,
                        lambda: signed_log_abs_one_minus(x[None, :], psi))


# -- public operations -------------------------------------------------------------


def _require_radius(r: LogReal) -> float:
    s = log_of(r)
    if not math.isfinite(s):
        raise MinModError("NONPOSITIVE_RADIUS", "radius must be positive and finite")
    return s


def growth_quantities(zeros: ZeroSet, r: LogReal) -> GrowthQuantities:
    zeros.require_nonempty()
    s = _require_radius(r)
    return GrowthQuantities(
        n=float(counting_n(zeros, s)[0]),
        N=float(counting_N(zeros, s)[0]),
        Q=float(counting_Q(zeros, s)[0]),
        B=float(counting_B(zeros, s)[0]),
        a=float(counting_a(zeros, s)[0]),
    )


def _refine_circle(zeros: ZeroSet, s: float, sign: float, extra_angles) -> tuple[float, float]:
    """Extremum of sign * ln|f| over |z| = e^s: grid, then local trisection."""
    n = CIRCLE_SAMPLES
    phi = np.concatenate([np.arange(n) * (2 * np.pi / n), np.mod(extra_angles, 2 * np.pi)])
    vals = sign * circle_log_modulus(zeros, s, phi)
    i = int(np.argmax(vals))
    best_phi, best = float(phi[i]), float(vals[i])
    half = 2 * np.pi / n
    for _ in range(REFINE_ROUNDS):
        cand = best_phi + np.linspace(-half, half, 7)
        cv = sign * circle_log_modulus(zeros, s, cand)
        j = int(np.argmax(cv))
        if cv[j] > best:
            best_phi, best = float(cand[j]), float(cv[j])
        half /= 3.0
    return sign * best, best_phi


def log_max_modulus(zeros: ZeroSet, r: LogReal, with_flag: bool = False):
    """ln M(r). Exact (= B(r)) on a common ray; otherwise a sampled lower bound.

    With ``with_flag`` returns ``(value, kind)`` where kind is ``"exact"`` or
    ``"lower_bound"``.
    """
    zeros.require_nonempty()
    s = _require_radius(r)
    if zeros.on_common_ray:
        value, kind = float(counting_B(zeros, s)[0]), "exact"
    else:
        value, _ = _refine_circle(zeros, s, 1.0, zeros.angles + np.pi)
        kind = "lower_bound"
    return (value, kind) if with_flag else value


def log_min_modulus(zeros: ZeroSet, r: LogReal, with_flag: bool = False):
    """ln m(r). Exact on a common ray (``-inf`` on a zero); else a sampled upper bound."""
    zeros.require_nonempty()
    s = _require_radius(r)
    if zeros.on_common_ray:
        value, kind = float(ray_log_min(zeros, s)[0]), "exact"
    else:
        value, _ = _refine_circle(zeros, s, -1.0, zeros.angles)
        kind = "upper_bound"
    return (value, kind) if with_flag else value


def log_log_max_modulus(zeros: ZeroSet, r: LogReal) -> float:
    """ln ln M(r) on a common ray, valid when ln M(r) itself overflows."""
    zeros.require_nonempty()
    s = _require_radius(r)
    if zeros.on_common_ray:
        return float(log_B(zeros, s)[0])
    value = log_max_modulus(zeros, r)
    return math.log(value) if value > 0 else -math.inf


def log_max_modulus_array(zeros: ZeroSet, s) -> np.ndarray:
    """Vectorized ln M over ln r values (sampled per point off a common ray)."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if zeros.on_common_ray:
        return counting_B(zeros, s)
    return np.array([_refine_circle(zeros, float(v), 1.0, zeros.angles + np.pi)[0] for v in s])


def log_min_modulus_array(zeros: ZeroSet, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if zeros.on_common_ray:
        return ray_log_min(zeros, s)
    return np.array([_refine_circle(zeros, float(v), -1.0, zeros.angles)[0] for v in s])


def log_log_max_modulus_array(zeros: ZeroSet, s) -> np.ndarray:
    s = np.atleast_1d(np.asarray(s, dtype=float))
    if zeros.on_common_ray:
        return log_B(zeros, s)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.log(log_max_modulus_array(zeros, s))


def epsilon_array(zeros: ZeroSet, s) -> np.ndarray:
    """eps(r) = ln ln M(r) / ln r."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return log_log_max_modulus_array(zeros, s) / s


def geometric_grid(s_lo: float, s_hi: float, per_decade: int, max_points: int = PROFILE_MAX_POINTS) -> np.ndarray:
    """Grid uniform in ln r at ``per_decade`` points per decade of r.

    When that would exceed ``max_points`` and s_lo > 0 the grid is taken
    uniform in ln ln r instead, which keeps relative resolution in ln r.
    """
    if s_hi <= s_lo:
        return np.array([s_lo])
    count = int(math.ceil((s_hi - s_lo) / math.log(10.0) * per_decade)) + 1
    if count <= max_points:
        return np.linspace(s_lo, s_hi, max(count, 2))
    if s_lo > 0:
        return np.exp(np.linspace(math.log(s_lo), math.log(s_hi), max_points))
    return np.linspace(s_lo, s_hi, max_points)


def golden_max(fn, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200) -> tuple[float, float]:
    """Golden-section maximization of a scalar function on [lo, hi]."""
    a, b = lo, hi
    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(max_iter):
        if b - a <= tol * max(1.0, abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - GOLDEN * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + GOLDEN * (b - a)
            fd = fn(d)
    best = max([(fa, xa) for xa, fa in ((a, fn(a)), (b, fn(b)), (c, fc), (d, fd))])
    return best[1], best[0]


def max_epsilon(zeros: ZeroSet, s_lo: float, s_hi: float, per_decade: int = PROFILE_POINTS_PER_DECADE) -> tuple[float, float]:
    """max of eps over ln r in [s_lo, s_hi]: grid + zero radii + golden refinement."""
    grid = geometric_grid(s_lo, s_hi, per_decade)
    if not zeros.on_common_ray and grid.size > 2048:
        grid = geometric_grid(s_lo, s_hi, per_decade, max_points=2048)
    kinks = zeros.log_radii[(zeros.log_radii > s_lo) & (zeros.log_radii < s_hi)]
    pts = np.unique(np.concatenate([grid, kinks, [s_lo, s_hi]]))
    eps = epsilon_array(zeros, pts)
    i = int(np.nanargmax(eps))
    best_s, best = float(pts[i]), float(eps[i])
    lo = float(pts[max(i - 1, 0)])
    hi = float(pts[min(i + 1, pts.size - 1)])
    if hi > lo:
        s_ref, e_ref = golden_max(lambda v: float(epsilon_array(zeros, v)[0]), lo, hi)
        if e_ref > best:
            best_s, best = s_ref, e_ref
    return best, best_s


def growth_profile(zeros: ZeroSet, r: LogReal, alpha: float) -> GrowthProfile:
    zeros.require_nonempty()
    s = _require_radius(r)
    if not 0.0 < alpha < 1.0:
        raise MinModError("INVALID_PARAMETER", "alpha must lie in (0, 1)")
    if s <= 0:
        raise MinModError("LOG_LOG_UNDEFINED", "eps(r) needs ln r > 0")
    llm = float(log_log_max_modulus_array(zeros, s)[0])
    if not llm > 0:
        raise MinModError("LOG_LOG_UNDEFINED", f"ln M(r) <= 1 at ln r = {s!r}")
    epsilon = llm / s
    s_hi = s / (1.0 - alpha)
    delta, delta_at = max_epsilon(zeros, s, s_hi)
    delta = max(delta, epsilon)

    # upper half of the window stands in for the limsup
    upper = geometric_grid(0.5 * (s + s_hi), s_hi, 16, max_points=512)
    eps_upper = epsilon_array(zeros, upper)
    order_estimate = float(np.max(eps_upper))
    type_class = _classify_type(upper, log_log_max_modulus_array(zeros, upper), order_estimate)
    return GrowthProfile(epsilon, delta, delta_at, order_estimate, type_class, (s, s_hi))


def _classify_type(s: np.ndarray, llm: np.ndarray, rho: float, tol: float = 1e-3) -> TypeClass:
    # trend of ln(ln M(t) / t^rho) against ln t; advisory only
    if s.size < 3 or not np.all(np.isfinite(llm)):
        return TypeClass.UNDETERMINED
    slope = np.polyfit(s, llm - rho * s, 1)[0]
    if slope < -tol:
        return TypeClass.MINIMAL
    if slope > tol:
        return TypeClass.MAXIMAL
    return TypeClass.MEAN


def tail_bound(zeros: ZeroSet, cutoff_index: int, z_modulus: LogReal) -> float:
    """Certified bound E on |ln|f| - ln|f_trunc|| for |z| = z_modulus.

    ``cutoff_index`` is the number of entries kept. Each dropped zero with
    r_m >= 2|z| perturbs ln|f| by at most 2|z|/r_m in either direction.
    """
    s = _require_radius(z_modulus)
    dropped = slice(cutoff_index, None)
    log_r = zeros.log_radii[dropped]
    if log_r.size == 0:
        return 0.0
    if np.any(log_r < s + math.log(2.0)):
        raise MinModError("CUTOFF_TOO_LOW", "a dropped zero lies inside radius 2|z|")
    log_terms = zeros.log_mults[dropped] + math.log(2.0) + s - log_r
    return float(np.exp(np.logaddexp.reduce(log_terms)))
