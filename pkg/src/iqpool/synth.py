"""Synthetic desk-scale dataset: procedural references, graded distortions.

Generates reference textures and, for each, three distortion families at
nested severities: additive noise (one fixed noise field scaled up),
Gaussian blur (growing sigma) and block-DCT quantization (growing step).
Subjective scores are simulated by anchoring MOS to the mean structural
similarity of each pair, so harsher severities always score lower.
Everything is seeded and byte-reproducible.
"""

from __future__ import annotations

import csv
from pathlib import Path

import numpy as np
from PIL import Image
from scipy.fft import dctn, idctn
from scipy.ndimage import gaussian_filter

from .attributes import GrayImage, ssim_map
from .dataset import MANIFEST_COLUMNS

DATABASE_ID = "synthetic"
NOISE_SIGMAS = (4.0, 8.0, 14.0, 24.0, 40.0)
BLUR_SIGMAS = (0.5, 1.0, 1.8, 3.2, 6.0)
QUANT_STEPS = (8.0, 16.0, 28.0, 48.0, 90.0)
FAMILIES = ("noise", "blur", "quantize")
_BLOCK = 8


def _rescale(arr: np.ndarray, lo: float, hi: float) -> np.ndarray:
    a_min, a_max = arr.min(), arr.max()
    if a_max == a_min:
        return np.full_like(arr, (lo + hi) / 2.0)
    return lo + (arr - a_min) * (hi - lo) / (a_max - a_min)


def _reference_images(rng: np.random.Generator, size: int) -> list[np.ndarray]:
    yy, xx = np.mgrid[0:size, 0:size] / size

    texture = gaussian_filter(rng.normal(size=(size, size)), 2.0)
    refs = [_rescale(texture, 20.0, 235.0)]

    waves = xx + 0.35 * np.sin(2 * np.pi * 3 * xx) * np.sin(2 * np.pi * 2 * yy)
    refs.append(_rescale(waves + 0.1 * gaussian_filter(rng.normal(size=(size, size)), 1.5), 15.0, 240.0))

    board = ((xx * 8).astype(int) + (yy * 8).astype(int)) % 2
    refs.append(_rescale(board + 0.4 * gaussian_filter(rng.normal(size=(size, size)), 1.0), 25.0, 230.0))

    radius = np.hypot(xx - 0.5, yy - 0.5)
    rings = np.sin(2 * np.pi * 6 * radius)
    refs.append(_rescale(rings + 0.3 * gaussian_filter(rng.normal(size=(size, size)), 1.2), 20.0, 235.0))

    return [np.round(r).astype(np.uint8) for r in refs]


def _quantize_blocks(img: np.ndarray, step: float) -> np.ndarray:
    h, w = img.shape
    ph, pw = (-h) % _BLOCK, (-w) % _BLOCK
    padded = np.pad(img, ((0, ph), (0, pw)), mode="edge")
    blocks = padded.reshape(padded.shape[0] // _BLOCK, _BLOCK, padded.shape[1] // _BLOCK, _BLOCK)
    blocks = blocks.transpose(0, 2, 1, 3)
    coeffs = dctn(blocks, axes=(2, 3), norm="ortho")
    coeffs = np.round(coeffs / step) * step
    out = idctn(coeffs, axes=(2, 3), norm="ortho")
    out = out.transpose(0, 2, 1, 3).reshape(padded.shape)
    return out[:h, :w]


def _distort(ref: np.ndarray, family: str, severity: int, noise_field: np.ndarray) -> np.ndarray:
    base = ref.astype(np.float64)
    if family == "noise":
        out = base + NOISE_SIGMAS[severity] * noise_field
    elif family == "blur":
        out = gaussian_filter(base, BLUR_SIGMAS[severity], mode="reflect")
    elif family == "quantize":
        out = _quantize_blocks(base, QUANT_STEPS[severity])
    else:
        raise ValueError(f"unknown distortion family {family!r}")
    return np.round(np.clip(out, 0.0, 255.0)).astype(np.uint8)


def _mos_anchor(ref: np.ndarray, dist: np.ndarray) -> float:
    smap = ssim_map(GrayImage(ref.astype(np.float64)), GrayImage(dist.astype(np.float64)))
    return 100.0 * float(np.mean(smap.values))


def generate_synthetic_dataset(
    out_dir: str | Path, seed: int = 7, size: int = 96
) -> Path:
    """Write images plus manifest.csv under ``out_dir``; return manifest path.

    Produces 4 references x 3 families x 5 severities = 60 records.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(seed)
    refs = _reference_images(rng, size)

    rows = []
    for ref_idx, ref in enumerate(refs):
        ref_name = f"ref_{ref_idx}.png"
        Image.fromarray(ref, mode="L").save(out / ref_name)
        noise_field = rng.standard_normal(ref.shape)
        for family in FAMILIES:
            for severity in range(5):
                dist = _distort(ref, family, severity, noise_field)
                dist_name = f"dist_{ref_idx}_{family}_{severity}.png"
                Image.fromarray(dist, mode="L").save(out / dist_name)
                mos = _mos_anchor(ref, dist)
                rows.append([DATABASE_ID, ref_name, dist_name, family, repr(mos), "false"])

    manifest = out / "manifest.csv"
    with open(manifest, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_COLUMNS)
        writer.writerows(rows)
    return manifest
