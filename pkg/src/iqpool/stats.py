"""Correlation, monotonic regression and significance testing.

The validation protocol maps objective scores onto the subjective scale
with a monotonic logistic curve, measures linearity with Pearson
correlation of the mapped scores, measures ranking with Spearman
correlation of the raw scores, and compares pairs of correlation
coefficients with a Fisher-z significance test.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import norm, rankdata

from .errors import (
    FitDegenerate,
    InvalidCodeword,
    InvalidParameter,
    InvalidSampleSize,
    UndefinedCorrelation,
)

_MAX_ITER = 2000
_TOL = 1e-10
_R_CLAMP = 1.0 - 1e-12


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter(f"{name} contains non-finite values")
    return arr


def _check_pair(x, y, min_n: int) -> tuple[np.ndarray, np.ndarray]:
    xs = _as_vector(x, "x")
    ys = _as_vector(y, "y")
    if xs.size != ys.size:
        raise InvalidParameter(f"length mismatch: {xs.size} vs {ys.size}")
    if xs.size < min_n:
        raise UndefinedCorrelation(f"need at least {min_n} samples, got {xs.size}")
    return xs, ys


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    xs, ys = _check_pair(x, y, 3)
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sx = float(np.dot(dx, dx))
    sy = float(np.dot(dy, dy))
    if sx == 0.0 or sy == 0.0:
        raise UndefinedCorrelation("correlation of a constant sequence")
    r = float(np.dot(dx, dy)) / math.sqrt(sx * sy)
    return max(-1.0, min(1.0, r))


def spearman(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson correlation of fractional (average-tie) ranks."""
    xs, ys = _check_pair(x, y, 3)
    return pearson(rankdata(xs, method="average"), rankdata(ys, method="average"))


@dataclass
class RegressionFit:
    """Fitted monotonic logistic mapping from objective scores to MOS."""

    beta: np.ndarray  # (upper, lower, center, scale)
    converged: bool
    residual_rmse: float

    def apply(self, scores: Sequence[float]) -> np.ndarray:
        return logistic_curve(self.beta, np.asarray(scores, dtype=np.float64))


def logistic_curve(beta: np.ndarray, q: np.ndarray) -> np.ndarray:
    """4-parameter logistic b2 + (b1 - b2) / (1 + exp(-(q - b3)/|b4|)).

    Monotone by construction: the scale enters through its absolute
    value, so the curve is increasing when b1 > b2 and decreasing when
    b1 < b2.
    """
    b1, b2, b3, b4 = beta
    scale = abs(b4) + 1e-12
    z = np.clip((q - b3) / scale, -700.0, 700.0)
    return b2 + (b1 - b2) / (1.0 + np.exp(-z))


def logistic_fit(objective_scores: Sequence[float], mos: Sequence[float]) -> RegressionFit:
    """Least-squares fit of the monotonic logistic, simplex descent.

    Starts from a data-driven initialization (plateaus at the MOS
    extremes, center at the median score, scale at the score spread) and
    orients the plateaus by the sign of the raw correlation so decreasing
    relationships are reachable.
    """
    xs, ys = _check_pair(objective_scores, mos, 5)
    if float(np.ptp(xs)) == 0.0:
        raise FitDegenerate("objective scores are constant")

    hi, lo = float(ys.max()), float(ys.min())
    try:
        increasing = pearson(xs, ys) >= 0.0
    except UndefinedCorrelation:
        increasing = True
    b1, b2 = (hi, lo) if increasing else (lo, hi)
    scale0 = float(np.std(xs))
    beta0 = np.array([b1, b2, float(np.median(xs)), scale0 if scale0 > 0 else 1.0])

    def sse(beta: np.ndarray) -> float:
        resid = logistic_curve(beta, xs) - ys
        return float(np.dot(resid, resid))

    result = minimize(
        sse,
        beta0,
        method="Nelder-Mead",
        options={"maxiter": _MAX_ITER, "maxfev": _MAX_ITER, "xatol": _TOL, "fatol": _TOL},
    )
    rmse = math.sqrt(result.fun / xs.size)
    return RegressionFit(beta=np.asarray(result.x), converged=bool(result.success),
                         residual_rmse=rmse)


def fisher_z_statistic(r1: float, n1: int, r2: float, n2: int) -> float:
    """|z1 - z2| / sqrt(1/(n1-3) + 1/(n2-3)) with z = atanh(r)."""
    if n1 <= 3 or n2 <= 3:
        raise InvalidSampleSize(f"need n > 3 on both sides, got {n1} and {n2}")
    for r in (r1, r2):
        if not -1.0 <= r <= 1.0:
            raise InvalidParameter(f"correlation {r} outside [-1, 1]")
    # atanh diverges at |r| = 1; clamp just inside the open interval.
    z1 = math.atanh(max(-_R_CLAMP, min(_R_CLAMP, r1)))
    z2 = math.atanh(max(-_R_CLAMP, min(_R_CLAMP, r2)))
    se = math.sqrt(1.0 / (n1 - 3) + 1.0 / (n2 - 3))
    return abs(z1 - z2) / se


def significant_difference(
    r1: float, n1: int, r2: float, n2: int, alpha: float = 0.05
) -> bool:
    """Two-sided Fisher-z test of whether two correlations differ."""
    if not 0.0 < alpha < 1.0:
        raise InvalidParameter(f"alpha must be in (0, 1), got {alpha}")
    critical = float(norm.ppf(1.0 - alpha / 2.0))
    return fisher_z_statistic(r1, n1, r2, n2) > critical


# Codeword layout: three database slots x three attribute slots.
DATABASE_SLOTS = 3
ATTRIBUTE_SLOTS = 3
CODEWORD_LENGTH = DATABASE_SLOTS * ATTRIBUTE_SLOTS


@dataclass(frozen=True)
class SignificanceCodeword:
    """Nine binary digits: (database slot) x (attribute slot), row-major."""

    digits: str

    def __post_init__(self):
        if len(self.digits) != CODEWORD_LENGTH or any(d not in "01" for d in self.digits):
            raise InvalidCodeword(f"expected {CODEWORD_LENGTH} binary digits, got {self.digits!r}")

    def flags(self) -> list[bool]:
        return [d == "1" for d in self.digits]


def encode_codeword(flags: Sequence[bool]) -> SignificanceCodeword:
    if len(flags) != CODEWORD_LENGTH:
        raise InvalidCodeword(f"expected {CODEWORD_LENGTH} flags, got {len(flags)}")
    return SignificanceCodeword("".join("1" if f else "0" for f in flags))


def codeword_totals(
    codewords: Sequence[SignificanceCodeword],
) -> tuple[list[int], list[int]]:
    """Per-column sums and per-database sums over a codeword matrix."""
    if not codewords:
        raise InvalidCodeword("cannot total an empty codeword matrix")
    cols = [0] * CODEWORD_LENGTH
    for cw in codewords:
        for i, flag in enumerate(cw.flags()):
            cols[i] += int(flag)
    db_sums = [sum(cols[d * ATTRIBUTE_SLOTS : (d + 1) * ATTRIBUTE_SLOTS]) for d in range(DATABASE_SLOTS)]
    return cols, db_sums
