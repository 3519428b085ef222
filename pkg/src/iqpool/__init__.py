"""iqpool: spatial pooling strategies for full-reference image quality maps."""

from .attributes import (
    AttributeMap,
    GrayImage,
    InfoSource,
    InfoWeightConfig,
    Masking,
    Polarity,
    WindowConfig,
    information_weight_map,
    local_stddev_map,
    register_attribute,
    squared_error_map,
    ssim_map,
    to_grayscale,
)
from .bench import BenchConfig, CorrelationReport, emit_reports, run_bench
from .dataset import EvalRecord, ScoreCache, group_records, load_image, load_manifest
from .pooling import (
    PooledScore,
    PoolingKind,
    PoolingSpec,
    catalog,
    five_number,
    minkowski,
    percentile,
    percentile_pool,
    pool,
    pool_basic,
    qd_weighted,
    weighted_percentile_pool,
    weighted_percentile_targets,
    weighted_pool,
)
from .stats import (
    RegressionFit,
    SignificanceCodeword,
    codeword_totals,
    encode_codeword,
    logistic_fit,
    pearson,
    significant_difference,
    spearman,
)
from .synth import generate_synthetic_dataset

__version__ = "0.1.0"
