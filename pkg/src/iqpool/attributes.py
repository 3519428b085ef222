"""Per-pixel quality/distortion maps and content-based weight maps.

A full-reference attribute compares a reference and a distorted grayscale
image and produces a per-pixel map: either a quality map (higher is better,
e.g. structural similarity) or a distortion map (higher is worse, e.g.
squared error).  Windowed attributes return the valid region only, cropped
by ``side - 1`` pixels per axis; no border padding is invented.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Dict

import numpy as np
from scipy.signal import correlate2d

from .errors import InvalidImage, InvalidParameter, ShapeMismatch, WindowTooLarge

# ITU-R BT.601 luma weights.
_LUMA_WEIGHTS = (0.299, 0.587, 0.114)


class Polarity(str, enum.Enum):
    QUALITY = "quality"        # higher = better
    DISTORTION = "distortion"  # higher = worse


class Masking(str, enum.Enum):
    UNIFORM = "uniform"
    GAUSSIAN = "gaussian"


class InfoSource(str, enum.Enum):
    """Which image(s) contribute local variance to the information weights."""

    BOTH = "both"
    REFERENCE_ONLY = "reference"
    DISTORTED_ONLY = "distorted"


@dataclass(frozen=True)
class WindowConfig:
    """Sliding-window shape: odd side, uniform or Gaussian masking."""

    side: int = 11
    masking: Masking = Masking.GAUSSIAN
    gaussian_sigma: float = 1.5

    def __post_init__(self):
        if self.side < 3 or self.side % 2 == 0:
            raise InvalidParameter(f"window side must be odd and >= 3, got {self.side}")
        if self.masking is Masking.GAUSSIAN and not self.gaussian_sigma > 0:
            raise InvalidParameter("gaussian_sigma must be > 0")

    def kernel(self) -> np.ndarray:
        """Window weights, normalized to sum to 1."""
        if self.masking is Masking.UNIFORM:
            return np.full((self.side, self.side), 1.0 / (self.side * self.side))
        half = (self.side - 1) // 2
        y, x = np.mgrid[-half : half + 1, -half : half + 1]
        w = np.exp(-(x * x + y * y) / (2.0 * self.gaussian_sigma**2))
        return w / w.sum()


@dataclass(frozen=True)
class InfoWeightConfig:
    """Configuration of content-based (information) weighting."""

    source: InfoSource = InfoSource.BOTH
    window: WindowConfig = field(default_factory=WindowConfig)
    c2: float = 10.0

    def __post_init__(self):
        if not self.c2 > 0:
            raise InvalidParameter("c2 must be > 0")


@dataclass
class GrayImage:
    """2-D luma image, float64 values in [0, 255]."""

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels, dtype=np.float64)
        if px.ndim != 2 or px.size == 0:
            raise InvalidImage(f"expected non-empty 2-D image, got shape {px.shape}")
        if not np.all(np.isfinite(px)):
            raise InvalidImage("image contains non-finite values")
        if px.min() < 0.0 or px.max() > 255.0:
            raise InvalidImage("luma values must lie in [0, 255]")
        self.pixels = px

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


@dataclass
class AttributeMap:
    """Per-pixel attribute values plus the polarity they carry.

    ``value_range`` is declared metadata (the attribute's codomain), not a
    clamp applied to the data.
    """

    values: np.ndarray
    polarity: Polarity
    value_range: tuple[float, float]

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.ndim != 2 or vals.size == 0:
            raise InvalidImage(f"expected non-empty 2-D map, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise InvalidImage("attribute map contains non-finite values")
        self.values = vals

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


def _require_same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatch(f"shapes differ: {a.shape} vs {b.shape}")


def to_grayscale(rgb: np.ndarray) -> GrayImage:
    """Convert an (H, W, 3) RGB array to luma via BT.601 weights."""
    arr = np.asarray(rgb, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[-1] != 3 or arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidImage(f"expected (H, W, 3) RGB array, got shape {arr.shape}")
    wr, wg, wb = _LUMA_WEIGHTS
    luma = wr * arr[..., 0] + wg * arr[..., 1] + wb * arr[..., 2]
    # Weight rounding can overshoot the 8-bit range by a few ulps.
    np.clip(luma, 0.0, 255.0, out=luma)
    return GrayImage(luma)


def squared_error_map(ref: GrayImage, dist: GrayImage) -> AttributeMap:
    """Pixelwise squared difference; a distortion map in [0, 255^2]."""
    _require_same_shape(ref.pixels, dist.pixels)
    diff = ref.pixels - dist.pixels
    return AttributeMap(diff * diff, Polarity.DISTORTION, (0.0, 255.0**2))


def _windowed_mean(arr: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return correlate2d(arr, kernel, mode="valid")


def ssim_map(
    ref: GrayImage,
    dist: GrayImage,
    window: WindowConfig | None = None,
    k1: float = 0.01,
    k2: float = 0.03,
    dynamic_range: float = 255.0,
) -> AttributeMap:
    """Per-pixel structural similarity over local windows.

    Local means, variances and covariance are window-weighted moments
    (no sample-size correction), stabilized by C1=(k1*L)^2 and
    C2=(k2*L)^2.  The output covers the valid region only.
    """
    _require_same_shape(ref.pixels, dist.pixels)
    window = window or WindowConfig()
    if ref.height < window.side or ref.width < window.side:
        raise WindowTooLarge(
            f"{window.side}x{window.side} window exceeds {ref.height}x{ref.width} image"
        )
    kern = window.kernel()
    x, y = ref.pixels, dist.pixels

    mu_x = _windowed_mean(x, kern)
    mu_y = _windowed_mean(y, kern)
    # Second moments on globally centered values: avoids the cancellation
    # of E[x^2] - mu^2 at 8-bit magnitudes and makes flat inputs exactly 0.
    xc = x - x.mean()
    yc = y - y.mean()
    mu_xc = _windowed_mean(xc, kern)
    mu_yc = _windowed_mean(yc, kern)
    var_x = _windowed_mean(xc * xc, kern) - mu_xc * mu_xc
    var_y = _windowed_mean(yc * yc, kern) - mu_yc * mu_yc
    cov_xy = _windowed_mean(xc * yc, kern) - mu_xc * mu_yc

    c1 = (k1 * dynamic_range) ** 2
    c2 = (k2 * dynamic_range) ** 2
    values = ((2.0 * mu_x * mu_y + c1) * (2.0 * cov_xy + c2)) / (
        (mu_x * mu_x + mu_y * mu_y + c1) * (var_x + var_y + c2)
    )
    # Roundoff can leave values a few ulps outside the codomain.
    np.clip(values, -1.0, 1.0, out=values)
    return AttributeMap(values, Polarity.QUALITY, (-1.0, 1.0))


def local_stddev_map(img: GrayImage, window: WindowConfig) -> np.ndarray:
    """Windowed (optionally Gaussian-masked) standard deviation, valid region."""
    if img.height < window.side or img.width < window.side:
        raise WindowTooLarge(
            f"{window.side}x{window.side} window exceeds {img.height}x{img.width} image"
        )
    kern = window.kernel()
    centered = img.pixels - img.pixels.mean()
    mu = _windowed_mean(centered, kern)
    var = _windowed_mean(centered * centered, kern) - mu * mu
    return np.sqrt(np.maximum(var, 0.0))


def information_weight_map(
    ref: GrayImage, dist: GrayImage, cfg: InfoWeightConfig
) -> np.ndarray:
    """Nonnegative per-pixel weights from local signal variances.

    With both sources the weight is log[(1 + var_ref/c2)(1 + var_dist/c2)];
    single-source configurations drop the other factor.
    """
    _require_same_shape(ref.pixels, dist.pixels)
    if not cfg.c2 > 0:
        raise InvalidParameter("c2 must be > 0")
    factor = np.ones(1)
    if cfg.source in (InfoSource.BOTH, InfoSource.REFERENCE_ONLY):
        sd = local_stddev_map(ref, cfg.window)
        factor = factor * (1.0 + sd * sd / cfg.c2)
    if cfg.source in (InfoSource.BOTH, InfoSource.DISTORTED_ONLY):
        sd = local_stddev_map(dist, cfg.window)
        factor = factor * (1.0 + sd * sd / cfg.c2)
    return np.log(factor)


def center_crop(values: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Crop equally from all sides down to ``shape``.

    Aligns a full-resolution map with the valid region left by a windowed
    one (odd window sides leave even, symmetric margins).
    """
    th, tw = shape
    h, w = values.shape
    if th > h or tw > w:
        raise ShapeMismatch(f"cannot crop {values.shape} to larger {shape}")
    mh, mw = (h - th) // 2, (w - tw) // 2
    return values[mh : mh + th, mw : mw + tw]


AttributeFn = Callable[[GrayImage, GrayImage, WindowConfig], AttributeMap]

_ATTRIBUTES: Dict[str, AttributeFn] = {}


def register_attribute(name: str, fn: AttributeFn) -> None:
    """Register a named full-reference attribute for use in benchmarks."""
    _ATTRIBUTES[name] = fn


def attribute_names() -> list[str]:
    return list(_ATTRIBUTES)


def compute_attribute(
    name: str, ref: GrayImage, dist: GrayImage, window: WindowConfig
) -> AttributeMap:
    try:
        fn = _ATTRIBUTES[name]
    except KeyError:
        raise InvalidParameter(
            f"unknown attribute {name!r}; registered: {sorted(_ATTRIBUTES)}"
        ) from None
    return fn(ref, dist, window)


register_attribute("squared_error", lambda ref, dist, window: squared_error_map(ref, dist))
register_attribute("ssim", lambda ref, dist, window: ssim_map(ref, dist, window))
