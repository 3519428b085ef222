"""FastAPI wiring around the scoring and benchmarking handlers."""

from __future__ import annotations

from fastapi import FastAPI

from . import handlers, schemas


def create_app() -> FastAPI:
    app = FastAPI(
        title="iqpool",
        description="Image-quality map pooling and correlation benchmarking service",
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse()

    @app.get("/strategies", response_model=schemas.StrategiesResponse)
    def strategies():
        return handlers.strategies()

    @app.post("/pool", response_model=schemas.PoolResponse)
    def pool_pair(req: schemas.PoolRequest):
        return handlers.pool_pair(req)

    @app.post("/synth", response_model=schemas.SynthResponse)
    def synthesize(req: schemas.SynthRequest):
        return handlers.synthesize(req)

    @app.post("/bench", response_model=schemas.BenchResponse)
    def bench(req: schemas.BenchRequest):
        return handlers.bench(req)

    @app.post("/significance", response_model=schemas.SignificanceResponse)
    def significance(req: schemas.SignificanceRequest):
        return handlers.significance(req)

    return app
