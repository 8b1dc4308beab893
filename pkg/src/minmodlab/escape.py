"""Escape-time sampler for the truncated canonical product.

Each grid point is iterated until |f^n(z)| exceeds the escape radius. The
iteration runs on log f(z) = sum k_m Log(1 - z/z_m), so no intermediate
value overflows before the escape test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import MinModError
from .growth import log_min_modulus_array, ray_log_min, tail_bound
from .logspace import LogReal
from .parallel import ordered_map
from .zeros import ZeroSet

THRESHOLD_STEP = 1.0 / 16
MAX_ESCAPE_LOG = 700.0


@dataclass(frozen=True)
class EscapeGrid:
    window: tuple[float, float, float, float]
    resolution: tuple[int, int]
    escape_iteration: np.ndarray  # shape (ny, nx); row 0 is im_max
    n_max: int
    escape_log_radius: float
    truncation_error: float
    terms_used: int
    certified: bool  # escape radius above the forward-invariance threshold

    def to_csv(self) -> str:
        return "".join(",".join(str(int(v)) for v in row) + "\n" for row in self.escape_iteration)

    def to_pgm(self) -> str:
        ny, nx = self.escape_iteration.shape
        vals = np.where(self.escape_iteration < 0, 0, self.escape_iteration + 1)
        rows = "".join(" ".join(str(int(v)) for v in row) + "\n" for row in vals)
        return f"P2\n{nx} {ny}\n{self.n_max + 1}\n" + rows


def escape_threshold(zeros: ZeroSet, step: float = THRESHOLD_STEP) -> Optional[float]:
    """Smallest scanned ln t with ln m(r) >= ln r + 1 for every sampled r in [t, e t].

    None when no such t exists up to ``MAX_ESCAPE_LOG`` (degree <= 1 products).
    """
    zeros.require_nonempty()
    degree = zeros.total_multiplicity
    if not degree >= 2:
        return None
    lo = min(0.0, float(zeros.log_radii[0]))
    hi = min(MAX_ESCAPE_LOG, float(zeros.log_radii[-1]) + 2.0
             + float(np.sum(zeros.mults * np.maximum(zeros.log_radii, 0.0)) + 2.0) / (degree - 1.0))
    grid = lo + step * np.arange(int(math.ceil((hi - lo) / step)) + 1)
    lm = ray_log_min(zeros, grid) if zeros.on_common_ray else log_min_modulus_array(zeros, grid)
    ok = lm >= grid + 1.0
    span = int(round(1.0 / step)) + 1
    run = 0
    for i in range(len(ok) - 1, -1, -1):
        run = run + 1 if ok[i] else 0
        if run >= span and (i == 0 or not ok[i - 1]):
            return float(grid[i])
    return None


def choose_cutoff(zeros: ZeroSet, escape_log_radius: float, budget: float,
                  max_terms: Optional[int] = None) -> tuple[int, float]:
    """Fewest leading entries whose dropped tail perturbs ln|f| by <= budget."""
    if not budget >= 0:
        raise MinModError("BUDGET_UNSATISFIABLE", f"budget {budget!r}")
    limit = len(zeros) if max_terms is None else min(max_terms, len(zeros))
    R = LogReal(escape_log_radius)
    for n in range(limit + 1):
        try:
            err = tail_bound(zeros, n, R)
        except MinModError:
            continue
        if err <= budget:
            return n, err
    raise MinModError("BUDGET_UNSATISFIABLE", f"tail above {budget!r} with {limit} terms")


def _row(zeros: ZeroSet, re: np.ndarray, im: float, n_max: int, log_esc: float) -> np.ndarray:
    z = re + 1j * im
    out = np.full(z.shape, -1, dtype=np.int64)
    roots = np.exp(zeros.log_radii + 1j * zeros.angles)
    k = zeros.mults
    with np.errstate(divide="ignore", invalid="ignore"):
        esc = np.log(np.abs(z)) > log_esc
    out[esc] = 0
    alive = ~esc
    for n in range(1, n_max + 1):
        if not alive.any():
            break
        za = z[alive]
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            logf = (k[None, :] * np.log(1.0 - za[:, None] / roots[None, :])).sum(axis=1)
        gone = logf.real > log_esc
        idx = np.nonzero(alive)[0]
        out[idx[gone]] = n
        keep = idx[~gone]
        z[keep] = np.exp(logf[~gone])
        alive[idx[gone]] = False
    return out


def escape_grid(zeros: ZeroSet, window, resolution, n_max: int, escape_log_radius: Optional[float] = None,
                budget: float = 1e-6, workers: int = 1, max_terms: Optional[int] = None) -> EscapeGrid:
    zeros.require_nonempty()
    re_min, re_max, im_min, im_max = (float(v) for v in window)
    nx, ny = (int(v) for v in resolution)
    if nx < 1 or ny < 1 or n_max < 0 or not (re_min <= re_max and im_min <= im_max):
        raise MinModError("INVALID_PARAMETER", "bad window, resolution or n_max")
    threshold = escape_threshold(zeros)
    certified = threshold is not None
    if escape_log_radius is None:
        if certified:
            escape_log_radius = threshold
        else:
            corner = max(abs(complex(a, b)) for a in (re_min, re_max) for b in (im_min, im_max))
            escape_log_radius = math.log(10.0 * (1.0 + corner))
    elif certified and escape_log_radius < threshold:
        raise MinModError("ESCAPE_RADIUS_TOO_SMALL",
                          f"ln R = {escape_log_radius!r} below threshold {threshold!r}")
    if not escape_log_radius <= MAX_ESCAPE_LOG:
        raise MinModError("INVALID_PARAMETER", f"escape log radius above {MAX_ESCAPE_LOG}")
    cutoff, err = choose_cutoff(zeros, escape_log_radius, budget, max_terms)
    trunc = zeros.prefix(cutoff) if cutoff > 0 else None

    re = np.linspace(re_min, re_max, nx) if nx > 1 else np.array([re_min])
    ims = np.linspace(im_max, im_min, ny) if ny > 1 else np.array([im_max])
    if trunc is None:
        # f == 1: nothing ever escapes unless it starts outside
        rows = [np.where(np.log(np.abs(re + 1j * v) + 1e-300) > escape_log_radius, 0, -1) for v in ims]
    else:
        rows = ordered_map(lambda v: _row(trunc, re, v, n_max, escape_log_radius), list(ims), workers)
    grid = np.vstack(rows).astype(np.int64)
    return EscapeGrid((re_min, re_max, im_min, im_max), (nx, ny), grid, n_max,
                      float(escape_log_radius), float(err), cutoff, certified)
