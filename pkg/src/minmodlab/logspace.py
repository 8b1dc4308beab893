"""Log-space scalar helpers.

Radii such as R_{n+1} = M(R_n) leave binary64 range after a single step, so
every magnitude in the package is carried as its natural logarithm.
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.special import logsumexp

from .errors import MinModError

MAX_LOG = sys.float_info.max


@dataclass(frozen=True, order=True)
class LogReal:
    """A positive magnitude stored as ``log_value = ln(magnitude)``."""

    log_value: float

    def __post_init__(self):
        if not math.isfinite(self.log_value):
            raise MinModError("NONPOSITIVE_RADIUS", f"log value {self.log_value!r} is not finite")

    @classmethod
    def of(cls, value: float) -> "LogReal":
        if not value > 0:
            raise MinModError("NONPOSITIVE_RADIUS", f"{value!r} is not positive")
        return cls(math.log(value))

    @property
    def value(self) -> float:
        """The magnitude itself; ``inf`` when it exceeds binary64."""
        return math.exp(self.log_value) if self.log_value < 709.78 else math.inf

    def __pow__(self, c: float) -> "LogReal":
        return LogReal(self.log_value * c)

    def __mul__(self, other: "LogReal") -> "LogReal":
        return LogReal(self.log_value + other.log_value)

    def __repr__(self):
        return f"LogReal({self.log_value!r})"


def log_of(r: LogReal) -> float:
    if not isinstance(r, LogReal):
        raise TypeError(f"expected LogReal, got {type(r).__name__}")
    return r.log_value


def softplus(x):
    """ln(1 + e^x), branchy form that neither overflows nor loses the tail."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x > 0
    out[pos] = x[pos] + np.log1p(np.exp(-x[pos]))
    out[~pos] = np.log1p(np.exp(x[~pos]))
    return out if out.ndim else float(out)


def log_softplus(x):
    """ln(ln(1 + e^x)); equals x to within e^x/2 for very negative x."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    tiny = x < -700.0
    out[tiny] = x[tiny]
    rest = ~tiny
    out[rest] = np.log(softplus(x[rest]))
    return out if out.ndim else float(out)


def log_abs_expm1(x):
    """ln|e^x - 1|, i.e. ln|1 - r/r_m| with x = ln r - ln r_m. ``-inf`` at 0."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    pos = x > 0
    with np.errstate(divide="ignore"):
        out[pos] = x[pos] + np.log(-np.expm1(-x[pos]))
        out[~pos] = np.log(-np.expm1(x[~pos]))
    return out if out.ndim else float(out)


def log_abs_one_minus(x, psi):
    """ln|1 - e^{x + i psi}| computed without cancellation near the zero."""
    x = np.asarray(x, dtype=float)
    psi = np.asarray(psi, dtype=float)
    x, psi = np.broadcast_arrays(x, psi)
    s2 = np.sin(0.5 * psi) ** 2
    out = np.empty(x.shape)
    pos = x > 0
    with np.errstate(divide="ignore"):
        xp = -x[pos]
        out[pos] = x[pos] + 0.5 * np.log(np.expm1(xp) ** 2 + 4.0 * np.exp(xp) * s2[pos])
        xn = x[~pos]
        out[~pos] = 0.5 * np.log(np.expm1(xn) ** 2 + 4.0 * np.exp(xn) * s2[~pos])
    return out if out.ndim else float(out)


def signed_log_abs_expm1(x):
    """(sign, ln|l|) for l = ln|e^x - 1|, exact in the far tail where l underflows."""
    x = np.asarray(x, dtype=float)
    ell = log_abs_expm1(x)
    tail = x < -36.0
    with np.errstate(divide="ignore"):
        la = np.where(tail, x + np.log1p(0.5 * np.exp(np.minimum(x, 0.0))), np.log(np.abs(ell)))
    return np.where(tail, -1.0, np.sign(ell)), la


def signed_log_abs_one_minus(x, psi):
    """(sign, ln|l|) for l = ln|1 - e^{x + i psi}|, using l ~ e^x (e^x(1/2 - c^2) - c) far out."""
    x, psi = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(psi, dtype=float))
    ell = log_abs_one_minus(x, psi)
    tail = x < -36.0
    c = np.cos(psi)
    v = -c + np.exp(np.minimum(x, 0.0)) * (0.5 - c * c)
    with np.errstate(divide="ignore"):
        la = np.where(tail, x + np.log(np.abs(v)), np.log(np.abs(ell)))
    return np.where(tail, np.sign(v), np.sign(ell)), la


def weighted_sum(weights: np.ndarray, terms: np.ndarray, log_weights: Optional[np.ndarray] = None,
                 signed_log=None) -> np.ndarray:
    """Row sums of ``terms * weights`` treating 0 * inf as 0.

    Weights beyond binary64 are applied in log space when ``log_weights`` is
    given. ``signed_log`` optionally supplies (sign, ln|term|) for terms that
    underflow, so that a huge multiplicity times a tiny term stays exact.
    """
    with np.errstate(invalid="ignore", over="ignore"):
        prod = terms * weights
    prod = np.where((terms == 0) | (weights == 0), 0.0, prod)
    if log_weights is not None:
        big = ~np.isfinite(np.broadcast_to(weights, prod.shape))
        if big.any():
            if signed_log is None:
                sign = np.sign(terms)
                with np.errstate(divide="ignore"):
                    la = np.log(np.abs(terms))
            else:
                sign, la = signed_log() if callable(signed_log) else signed_log
            with np.errstate(over="ignore", invalid="ignore"):
                alt = np.where(sign == 0, 0.0, sign * np.exp(log_weights + la))
            prod = np.where(big, alt, prod)
    return prod.sum(axis=-1)


def log_weighted_sum(log_weights: np.ndarray, log_terms: np.ndarray) -> np.ndarray:
    """ln(sum_j exp(log_weights_j + log_terms_ij)) along the last axis."""
    return logsumexp(log_terms + log_weights, axis=-1)


def iterated_log(x: float, depth: int) -> float:
    """log applied ``depth`` times; ``nan`` once an argument drops to <= 0."""
    for _ in range(depth):
        if not x > 0:
            return math.nan
        x = math.log(x)
    return x


def iterated_exp(x: float, depth: int) -> float:
    for _ in range(depth):
        if x > 709.78:
            return math.inf
        x = math.exp(x)
    return x
