"""Endpoint implementations shared by the HTTP app and the CLI client."""

from __future__ import annotations

from pathlib import Path

from fastapi import HTTPException

from ..attributes import Masking, WindowConfig, attribute_names
from ..bench import BenchConfig, emit_reports, run_bench, significance_from_csv, write_codeword_csv
from ..dataset import load_manifest
from ..errors import IQPoolError
from ..pooling import catalog, select_specs
from ..synth import generate_synthetic_dataset
from . import schemas


def _window(params: schemas.WindowParams) -> WindowConfig:
    try:
        masking = Masking(params.masking)
        return WindowConfig(side=params.side, masking=masking,
                            gaussian_sigma=params.gaussian_sigma)
    except (ValueError, IQPoolError) as exc:
        raise HTTPException(status_code=400, detail=str(exc)) from exc


def _bad_request(exc: Exception) -> HTTPException:
    return HTTPException(status_code=400, detail=f"{type(exc).__name__}: {exc}")


def pool_pair(req: schemas.PoolRequest) -> schemas.PoolResponse:
    from ..bench import compute_pair_scores
    from ..dataset import load_image

    window = _window(req.window)
    try:
        specs = select_specs(req.poolings, catalog(side=window.side,
                                                   gaussian_sigma=window.gaussian_sigma,
                                                   c2=req.c2))
        unknown = [a for a in req.attributes if a not in attribute_names()]
        if unknown:
            raise HTTPException(
                status_code=400,
                detail=f"unknown attributes {unknown}; registered: {attribute_names()}",
            )
        ref = load_image(req.reference_path)
        dist = load_image(req.distorted_path)
        scores, polarities = compute_pair_scores(ref, dist, tuple(req.attributes), specs, window)
    except HTTPException:
        raise
    except (IQPoolError, OSError) as exc:
        raise _bad_request(exc) from exc

    items = []
    for attr in req.attributes:
        for spec in specs:
            value, degenerate = scores[(attr, spec.id)]
            items.append(
                schemas.ScoreItem(
                    attribute=attr,
                    pooling=spec.id,
                    value=value,
                    polarity=polarities[attr],
                    degenerate_weights=degenerate,
                )
            )
    return schemas.PoolResponse(
        reference_path=req.reference_path, distorted_path=req.distorted_path, scores=items
    )


def synthesize(req: schemas.SynthRequest) -> schemas.SynthResponse:
    try:
        manifest = generate_synthetic_dataset(req.out_dir, seed=req.seed, size=req.size)
        records = load_manifest(manifest)
    except (IQPoolError, OSError, ValueError) as exc:
        raise _bad_request(exc) from exc
    return schemas.SynthResponse(manifest=str(manifest), records=len(records))


def bench(req: schemas.BenchRequest) -> schemas.BenchResponse:
    window = _window(req.window)
    config = BenchConfig(
        manifests=list(req.manifests),
        out_dir=req.out_dir,
        attributes=tuple(req.attributes),
        pooling_ids=req.poolings,
        alpha=req.alpha,
        threads=req.threads,
        c2=req.c2,
        window=window,
        per_type_significance=req.per_type_samples,
        overall_best=req.overall_best,
        cache_path=req.cache,
    )
    try:
        report = run_bench(config)
        outputs = emit_reports(report, req.out_dir)
    except (IQPoolError, OSError) as exc:
        raise _bad_request(exc) from exc
    return schemas.BenchResponse(
        rows=len(report.rows),
        records_total=report.records_total,
        records_used=report.records_used,
        skipped=len(report.skipped),
        outputs=[str(p) for p in outputs],
    )


def significance(req: schemas.SignificanceRequest) -> schemas.SignificanceResponse:
    try:
        rows, col_sums, db_sums, db_slots, attr_slots = significance_from_csv(
            req.correlations_csv, alpha=req.alpha, per_type=req.per_type
        )
    except (IQPoolError, OSError, ValueError) as exc:
        raise _bad_request(exc) from exc
    output = None
    if req.out:
        out_path = Path(req.out)
        out_path.parent.mkdir(parents=True, exist_ok=True)
        write_codeword_csv(out_path, rows, col_sums, db_sums, db_slots, attr_slots)
        output = str(out_path)
    return schemas.SignificanceResponse(
        rows=[
            schemas.CodewordItem(
                first=r.first,
                second=r.second,
                distortion_type=r.distortion_type,
                codeword=r.codeword.digits,
            )
            for r in rows
        ],
        col_sums=col_sums,
        db_sums=db_sums,
        database_slots=db_slots,
        attribute_slots=attr_slots,
        output=output,
    )


def strategies() -> schemas.StrategiesResponse:
    return schemas.StrategiesResponse(
        poolings=[s.id for s in catalog()], attributes=attribute_names()
    )
