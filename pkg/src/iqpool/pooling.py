"""Spatial pooling: reduce an attribute map to a scalar score.

Implements the full catalog of pooling strategies compared in the
benchmark: basic statistics, percentile rescaling, the five-number
summary, Minkowski means, self-weighted (quality/distortion-weighted)
means, externally weighted means (used with information-content weights),
and weighted percentile pooling, which combines percentile thresholds
with linear weights that emphasize severe degradation.

All reductions depend only on the multiset of map values; content-based
weighting happens upstream and enters through ``weighted_pool``.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .attributes import AttributeMap, InfoSource, InfoWeightConfig, Masking, Polarity, WindowConfig
from .errors import DegenerateWeights, EmptyMap, InvalidParameter, ShapeMismatch

# Parameter sets of the benchmark grid.
MINKOWSKI_EXPONENTS = (1 / 8, 1 / 4, 1 / 2, 2.0, 4.0, 8.0)
SELF_WEIGHT_EXPONENTS = MINKOWSKI_EXPONENTS
PERCENTILE_P = 6.0
PERCENTILE_C1 = 4000.0
WPP_BIN_COUNTS = (1, 10, 20)


class PoolingKind(str, enum.Enum):
    MEAN = "mean"
    STD = "std"
    MEDIAN = "median"
    MIN = "min"
    MAX = "max"
    PERCENTILE = "percentile"
    FIVE_NUMBER = "five_number"
    MINKOWSKI = "minkowski"
    QD_WEIGHTED = "qd_weighted"
    INFO_WEIGHTED = "info_weighted"
    WEIGHTED_PERCENTILE = "weighted_percentile"


_BASIC_KINDS = (
    PoolingKind.MEAN,
    PoolingKind.STD,
    PoolingKind.MEDIAN,
    PoolingKind.MIN,
    PoolingKind.MAX,
)


def _fmt(x: float) -> str:
    return f"{x:g}"


@dataclass(frozen=True)
class PoolingSpec:
    """One pooling strategy plus its parameters."""

    kind: PoolingKind
    p: float | None = None
    c1: float | None = None
    n_bin: int | None = None
    info: InfoWeightConfig | None = None

    def __post_init__(self):
        if self.kind is PoolingKind.PERCENTILE:
            if self.p is None or not 0.0 < self.p < 100.0:
                raise InvalidParameter("percentile pooling needs p in (0, 100)")
            if self.c1 is None or not self.c1 > 0:
                raise InvalidParameter("percentile pooling needs c1 > 0")
        elif self.kind in (PoolingKind.MINKOWSKI, PoolingKind.QD_WEIGHTED):
            if self.p is None or not np.isfinite(self.p) or self.p == 0:
                raise InvalidParameter(f"{self.kind.value} needs finite p != 0")
        elif self.kind is PoolingKind.WEIGHTED_PERCENTILE:
            if self.n_bin is None or self.n_bin < 1:
                raise InvalidParameter("weighted percentile pooling needs n_bin >= 1")
        elif self.kind is PoolingKind.INFO_WEIGHTED:
            if self.info is None:
                raise InvalidParameter("info-weighted pooling needs an InfoWeightConfig")

    @property
    def id(self) -> str:
        """Stable identifier used in reports and CLI selection."""
        k = self.kind
        if k in _BASIC_KINDS or k is PoolingKind.FIVE_NUMBER:
            return k.value
        if k is PoolingKind.PERCENTILE:
            return f"percentile_p{_fmt(self.p)}_c{_fmt(self.c1)}"
        if k is PoolingKind.MINKOWSKI:
            return f"minkowski_p{_fmt(self.p)}"
        if k is PoolingKind.QD_WEIGHTED:
            return f"qd_weighted_p{_fmt(self.p)}"
        if k is PoolingKind.WEIGHTED_PERCENTILE:
            return f"weighted_percentile_n{self.n_bin}"
        src = {"both": "both", "reference": "ref", "distorted": "dist"}[self.info.source.value]
        mask = "gauss" if self.info.window.masking is Masking.GAUSSIAN else "uniform"
        return f"info_weighted_{src}_{mask}"

    @property
    def family(self) -> str:
        """Parametric family the strategy belongs to (for best-of reporting)."""
        return self.kind.value


@dataclass(frozen=True)
class PooledScore:
    value: float
    spec: PoolingSpec
    polarity: Polarity


def _values(attr_map: AttributeMap) -> np.ndarray:
    flat = attr_map.values.ravel()
    if flat.size == 0:
        raise EmptyMap("attribute map has no entries")
    return flat


def percentile(values: Iterable[float], p: float) -> float:
    """Linear-interpolation percentile at rank 1 + (p/100)(n-1)."""
    arr = np.asarray(list(values) if not isinstance(values, np.ndarray) else values,
                     dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptyMap("percentile of an empty collection")
    if not np.all(np.isfinite(arr)):
        raise InvalidParameter("percentile input contains non-finite values")
    if not 0.0 <= p <= 100.0:
        raise InvalidParameter(f"percentile target must be in [0, 100], got {p}")
    return float(np.percentile(arr, p))


def pool_basic(attr_map: AttributeMap, stat: PoolingKind) -> PooledScore:
    """Mean, std, median, min or max of the map."""
    flat = _values(attr_map)
    if stat is PoolingKind.MEAN:
        value = float(np.mean(flat))
    elif stat is PoolingKind.STD:
        value = float(np.std(flat))
    elif stat is PoolingKind.MEDIAN:
        value = float(np.median(flat))
    elif stat is PoolingKind.MIN:
        value = float(np.min(flat))
    elif stat is PoolingKind.MAX:
        value = float(np.max(flat))
    else:
        raise InvalidParameter(f"{stat} is not a basic statistic")
    return PooledScore(value, PoolingSpec(stat), attr_map.polarity)


def percentile_pool(
    attr_map: AttributeMap, p: float = PERCENTILE_P, c1: float = PERCENTILE_C1
) -> PooledScore:
    """Rescale entries beyond the target percentile, then take the mean.

    Quality maps: entries strictly below the p-th percentile are divided
    by c1.  Distortion maps: entries strictly above the (100-p)-th
    percentile are multiplied by c1.
    """
    spec = PoolingSpec(PoolingKind.PERCENTILE, p=p, c1=c1)
    flat = _values(attr_map)
    if attr_map.polarity is Polarity.QUALITY:
        thresh = percentile(flat, p)
        scaled = np.where(flat < thresh, flat / c1, flat)
    else:
        thresh = percentile(flat, 100.0 - p)
        scaled = np.where(flat > thresh, flat * c1, flat)
    return PooledScore(float(np.mean(scaled)), spec, attr_map.polarity)


def five_number(attr_map: AttributeMap) -> PooledScore:
    """Mean of {mean, first quartile, median, third quartile, max}."""
    flat = _values(attr_map)
    parts = (
        float(np.mean(flat)),
        percentile(flat, 25.0),
        percentile(flat, 50.0),
        percentile(flat, 75.0),
        float(np.max(flat)),
    )
    return PooledScore(sum(parts) / 5.0, PoolingSpec(PoolingKind.FIVE_NUMBER), attr_map.polarity)


def minkowski(attr_map: AttributeMap, p: float) -> PooledScore:
    """Mean of the p-th powers of the map entries (no outer root)."""
    spec = PoolingSpec(PoolingKind.MINKOWSKI, p=p)
    flat = _values(attr_map)
    if not float(p).is_integer() and flat.min() < 0.0:
        raise InvalidParameter("fractional exponent requires nonnegative entries")
    return PooledScore(float(np.mean(flat**p)), spec, attr_map.polarity)


def weighted_pool(attr_map: AttributeMap, weights: np.ndarray) -> PooledScore:
    """Weight-normalized mean of the map under an external weight field."""
    weights = np.asarray(weights, dtype=np.float64)
    if weights.shape != attr_map.values.shape:
        raise ShapeMismatch(
            f"weights {weights.shape} do not match map {attr_map.values.shape}"
        )
    if weights.min() < 0.0:
        raise InvalidParameter("weights must be nonnegative")
    total = float(weights.sum())
    if total <= 0.0:
        raise DegenerateWeights("weight map sums to zero")
    value = float((weights * attr_map.values).sum() / total)
    return PooledScore(value, PoolingSpec(PoolingKind.INFO_WEIGHTED, info=InfoWeightConfig()),
                       attr_map.polarity)


def qd_weighted(attr_map: AttributeMap, p: float) -> PooledScore:
    """Self-weighted mean: each entry weighted by its own p-th power."""
    spec = PoolingSpec(PoolingKind.QD_WEIGHTED, p=p)
    flat = _values(attr_map)
    if not float(p).is_integer() and flat.min() < 0.0:
        raise InvalidParameter("fractional exponent requires nonnegative entries")
    w = flat**p
    total = float(w.sum())
    if total <= 0.0:
        raise DegenerateWeights("self-weights sum to zero")
    return PooledScore(float((w * flat).sum() / total), spec, attr_map.polarity)


def weighted_percentile_targets(n_bin: int, polarity: Polarity) -> list[float]:
    """Percentile targets for weighted percentile pooling.

    Quality maps walk up from 1 in steps of 100/n_bin; distortion maps walk
    down from 100.  Targets escaping [1, 100] fall back to the endpoint.
    """
    if n_bin < 1:
        raise InvalidParameter(f"n_bin must be >= 1, got {n_bin}")
    step = 100.0 / n_bin
    targets = []
    for s in range(n_bin):
        if polarity is Polarity.QUALITY:
            t = 1.0 + step * s
            targets.append(t if t < 100.0 else 1.0)
        else:
            t = 100.0 - step * s
            targets.append(t if t > 1.0 else 100.0)
    return targets


def weighted_percentile_pool(attr_map: AttributeMap, n_bin: int) -> PooledScore:
    """Normalized linear combination of percentile thresholds.

    Quality maps give weight (1 - t/100) to the value at percentile t, so
    percentiles near the degraded low end dominate; distortion maps give
    weight t/100, favoring the high end.  The result is a convex
    combination of percentile values.
    """
    spec = PoolingSpec(PoolingKind.WEIGHTED_PERCENTILE, n_bin=n_bin)
    flat = _values(attr_map)
    targets = weighted_percentile_targets(n_bin, attr_map.polarity)
    if attr_map.polarity is Polarity.QUALITY:
        weights = [1.0 - t / 100.0 for t in targets]
    else:
        weights = [t / 100.0 for t in targets]
    if len(targets) == 1:
        # Single term: the weight cancels exactly.
        return PooledScore(percentile(flat, targets[0]), spec, attr_map.polarity)
    total = sum(weights)
    if total <= 0.0:
        raise DegenerateWeights("percentile weights sum to zero")
    acc = sum(w * percentile(flat, t) for w, t in zip(weights, targets))
    return PooledScore(acc / total, spec, attr_map.polarity)


def pool(
    attr_map: AttributeMap,
    spec: PoolingSpec,
    weights: np.ndarray | None = None,
) -> PooledScore:
    """Apply one pooling strategy to a map.

    ``weights`` is required for info-weighted pooling and ignored
    otherwise.  Quality maps are clamped to [0, 1] ahead of fractional
    exponents, where negative entries would be undefined.
    """
    if spec.kind in _BASIC_KINDS:
        return pool_basic(attr_map, spec.kind)
    if spec.kind is PoolingKind.PERCENTILE:
        return percentile_pool(attr_map, spec.p, spec.c1)
    if spec.kind is PoolingKind.FIVE_NUMBER:
        return five_number(attr_map)
    if spec.kind in (PoolingKind.MINKOWSKI, PoolingKind.QD_WEIGHTED):
        target = attr_map
        if (
            not float(spec.p).is_integer()
            and attr_map.polarity is Polarity.QUALITY
            and attr_map.values.min() < 0.0
        ):
            target = AttributeMap(
                np.clip(attr_map.values, 0.0, 1.0), attr_map.polarity, (0.0, 1.0)
            )
        if spec.kind is PoolingKind.MINKOWSKI:
            score = minkowski(target, spec.p)
        else:
            score = qd_weighted(target, spec.p)
        return PooledScore(score.value, spec, attr_map.polarity)
    if spec.kind is PoolingKind.WEIGHTED_PERCENTILE:
        return weighted_percentile_pool(attr_map, spec.n_bin)
    if spec.kind is PoolingKind.INFO_WEIGHTED:
        if weights is None:
            raise InvalidParameter("info-weighted pooling needs a weight map")
        score = weighted_pool(attr_map, weights)
        return PooledScore(score.value, spec, attr_map.polarity)
    raise InvalidParameter(f"unhandled pooling kind {spec.kind}")


def catalog(
    side: int = 11,
    gaussian_sigma: float = 1.5,
    c2: float = 10.0,
) -> list[PoolingSpec]:
    """The full benchmark grid of pooling strategies.

    Basic statistics, tuned percentile pooling, the five-number summary,
    six Minkowski exponents, six self-weighting exponents, six
    information-weighting configurations (3 sources x 2 maskings) and
    three weighted-percentile bin counts: 28 strategies in total.
    """
    specs = [PoolingSpec(kind) for kind in _BASIC_KINDS]
    specs.append(PoolingSpec(PoolingKind.PERCENTILE, p=PERCENTILE_P, c1=PERCENTILE_C1))
    specs.append(PoolingSpec(PoolingKind.FIVE_NUMBER))
    specs.extend(PoolingSpec(PoolingKind.MINKOWSKI, p=p) for p in MINKOWSKI_EXPONENTS)
    specs.extend(PoolingSpec(PoolingKind.QD_WEIGHTED, p=p) for p in SELF_WEIGHT_EXPONENTS)
    for source in (InfoSource.BOTH, InfoSource.REFERENCE_ONLY, InfoSource.DISTORTED_ONLY):
        for masking in (Masking.GAUSSIAN, Masking.UNIFORM):
            window = WindowConfig(side=side, masking=masking, gaussian_sigma=gaussian_sigma)
            specs.append(
                PoolingSpec(
                    PoolingKind.INFO_WEIGHTED,
                    info=InfoWeightConfig(source=source, window=window, c2=c2),
                )
            )
    specs.extend(PoolingSpec(PoolingKind.WEIGHTED_PERCENTILE, n_bin=n) for n in WPP_BIN_COUNTS)
    return specs


def select_specs(ids: Sequence[str] | None, specs: Sequence[PoolingSpec]) -> list[PoolingSpec]:
    """Subset a catalog by id, preserving catalog order."""
    if ids is None:
        return list(specs)
    by_id = {s.id: s for s in specs}
    missing = [i for i in ids if i not in by_id]
    if missing:
        raise InvalidParameter(f"unknown pooling ids: {missing}; known: {sorted(by_id)}")
    wanted = set(ids)
    return [s for s in specs if s.id in wanted]
