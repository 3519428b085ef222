"""Request/response models of the scoring and benchmarking API."""

from __future__ import annotations

from typing import List, Optional

from pydantic import BaseModel, Field


class WindowParams(BaseModel):
    side: int = 11
    masking: str = "gaussian"  # "gaussian" | "uniform"
    gaussian_sigma: float = 1.5


class PoolRequest(BaseModel):
    reference_path: str
    distorted_path: str
    attributes: List[str] = ["squared_error", "ssim"]
    poolings: Optional[List[str]] = None  # None = full catalog
    c2: float = 10.0
    window: WindowParams = Field(default_factory=WindowParams)


class ScoreItem(BaseModel):
    attribute: str
    pooling: str
    value: float
    polarity: str
    degenerate_weights: bool = False


class PoolResponse(BaseModel):
    reference_path: str
    distorted_path: str
    scores: List[ScoreItem]


class SynthRequest(BaseModel):
    out_dir: str
    seed: int = 7
    size: int = 96


class SynthResponse(BaseModel):
    manifest: str
    records: int


class BenchRequest(BaseModel):
    manifests: List[str]
    out_dir: str
    attributes: List[str] = ["squared_error", "ssim"]
    poolings: Optional[List[str]] = None
    alpha: float = 0.05
    threads: int = 1
    c2: float = 10.0
    window: WindowParams = Field(default_factory=WindowParams)
    per_type_samples: bool = False
    overall_best: bool = False
    cache: Optional[str] = None


class BenchResponse(BaseModel):
    rows: int
    records_total: int
    records_used: int
    skipped: int
    outputs: List[str]


class CodewordItem(BaseModel):
    first: str
    second: str
    distortion_type: str
    codeword: str


class SignificanceRequest(BaseModel):
    correlations_csv: str
    alpha: float = 0.05
    per_type: bool = False
    out: Optional[str] = None


class SignificanceResponse(BaseModel):
    rows: List[CodewordItem]
    col_sums: List[int]
    db_sums: List[int]
    database_slots: List[str]
    attribute_slots: List[str]
    output: Optional[str] = None


class StrategiesResponse(BaseModel):
    poolings: List[str]
    attributes: List[str]


class HealthResponse(BaseModel):
    status: str = "ok"
