"""Command-line client for the pooling/benchmark service.

Every subcommand builds the service's request model and either performs
the call in-process or, with ``--server URL``, against a running
instance; the CLI itself contains no scoring logic.  Exit codes: 0 on
success, 1 on configuration errors, 2 when a benchmark skipped records.
"""

from __future__ import annotations

import sys

import click
import httpx
from fastapi import HTTPException

from .service import handlers, schemas


def _fail(detail: str, code: int = 1) -> None:
    click.echo(f"error: {detail}", err=True)
    sys.exit(code)


def _call(server: str | None, path: str, request, handler, response_cls):
    if server:
        try:
            with httpx.Client(base_url=server, timeout=600.0) as client:
                resp = client.post(path, json=request.model_dump())
        except httpx.HTTPError as exc:
            _fail(f"cannot reach {server}: {exc}")
        if resp.status_code >= 400:
            try:
                detail = resp.json().get("detail", resp.text)
            except ValueError:
                detail = resp.text
            _fail(str(detail))
        return response_cls.model_validate(resp.json())
    try:
        return handler(request)
    except HTTPException as exc:
        _fail(str(exc.detail))


def _window_params(side: int, sigma: float, masking: str) -> schemas.WindowParams:
    return schemas.WindowParams(side=side, masking=masking, gaussian_sigma=sigma)


def _split_csv(value: str | None) -> list[str] | None:
    if value is None or value == "all":
        return None
    return [v.strip() for v in value.split(",") if v.strip()]


server_option = click.option("--server", default=None, metavar="URL",
                             help="Send the request to a running service instead of in-process.")
window_options = (
    click.option("--window", "window_side", type=int, default=11, show_default=True,
                 help="Sliding-window side (odd)."),
    click.option("--window-sigma", type=float, default=1.5, show_default=True,
                 help="Gaussian window sigma in pixels."),
    click.option("--window-masking", type=click.Choice(["gaussian", "uniform"]),
                 default="gaussian", show_default=True),
)


def _apply(options, fn):
    for opt in reversed(options):
        fn = opt(fn)
    return fn


@click.group()
def main():
    """Pool image-quality maps and benchmark pooling strategies."""


@main.command()
@click.option("--manifest", "manifests", multiple=True, required=True,
              help="Dataset manifest CSV (repeatable).")
@click.option("--out", "out_dir", required=True, help="Output directory for report files.")
@click.option("--attributes", default="squared_error,ssim", show_default=True,
              help="Comma-separated attribute names.")
@click.option("--pooling", default="all", show_default=True,
              help="Comma-separated pooling ids, or 'all'.")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--threads", type=int, default=1, show_default=True)
@click.option("--c2", type=float, default=10.0, show_default=True,
              help="Channel-noise constant of the information weights.")
@click.option("--per-type-samples", is_flag=True,
              help="Significance codewords per distortion type instead of whole-database.")
@click.option("--overall", "overall_best", is_flag=True,
              help="Select best family members over whole databases, not per type.")
@click.option("--cache", default=None, help="JSON-lines pooled-score cache file.")
@server_option
def bench(manifests, out_dir, attributes, pooling, alpha, threads, c2,
          per_type_samples, overall_best, cache, server, window_side, window_sigma,
          window_masking):
    """Run the full correlation study over one or more manifests."""
    req = schemas.BenchRequest(
        manifests=list(manifests),
        out_dir=out_dir,
        attributes=_split_csv(attributes) or [],
        poolings=_split_csv(pooling),
        alpha=alpha,
        threads=threads,
        c2=c2,
        window=_window_params(window_side, window_sigma, window_masking),
        per_type_samples=per_type_samples,
        overall_best=overall_best,
        cache=cache,
    )
    resp = _call(server, "/bench", req, handlers.bench, schemas.BenchResponse)
    click.echo(f"records: {resp.records_used}/{resp.records_total} used, "
               f"{resp.skipped} skipped")
    click.echo(f"report rows: {resp.rows}")
    for path in resp.outputs:
        click.echo(f"wrote {path}")
    if resp.skipped:
        sys.exit(2)


bench = _apply(window_options, bench)
main.add_command(bench)


@main.command()
@click.argument("reference")
@click.argument("distorted")
@click.option("--attributes", default="squared_error,ssim", show_default=True)
@click.option("--pooling", default="all", show_default=True)
@click.option("--c2", type=float, default=10.0, show_default=True)
@click.option("--json", "as_json", is_flag=True, help="Emit scores as JSON.")
@server_option
def pool(reference, distorted, attributes, pooling, c2, as_json, server,
         window_side, window_sigma, window_masking):
    """Score one reference/distorted pair under every pooling strategy."""
    req = schemas.PoolRequest(
        reference_path=reference,
        distorted_path=distorted,
        attributes=_split_csv(attributes) or [],
        poolings=_split_csv(pooling),
        c2=c2,
        window=_window_params(window_side, window_sigma, window_masking),
    )
    resp = _call(server, "/pool", req, handlers.pool_pair, schemas.PoolResponse)
    if as_json:
        click.echo(resp.model_dump_json(indent=2))
        return
    width = max(len(s.pooling) for s in resp.scores)
    for item in resp.scores:
        note = "  (degenerate weights, mean fallback)" if item.degenerate_weights else ""
        click.echo(f"{item.attribute:14s} {item.pooling:{width}s} {item.value!r}{note}")


pool = _apply(window_options, pool)
main.add_command(pool)


@main.command()
@click.option("--out", "out_dir", required=True, help="Directory for images and manifest.")
@click.option("--seed", type=int, default=7, show_default=True)
@click.option("--size", type=int, default=96, show_default=True,
              help="Side length of the generated images.")
@server_option
def synth(out_dir, seed, size, server):
    """Generate the synthetic desk-scale dataset."""
    req = schemas.SynthRequest(out_dir=out_dir, seed=seed, size=size)
    resp = _call(server, "/synth", req, handlers.synthesize, schemas.SynthResponse)
    click.echo(f"wrote {resp.records} records to {resp.manifest}")


@main.command()
@click.argument("correlations_csv")
@click.option("--alpha", type=float, default=0.05, show_default=True)
@click.option("--per-type-samples", is_flag=True,
              help="One codeword matrix per distortion type.")
@click.option("--out", default=None, help="Write the codeword matrix CSV here.")
@server_option
def significance(correlations_csv, alpha, per_type_samples, out, server):
    """Codeword matrix from a previously emitted correlations CSV."""
    req = schemas.SignificanceRequest(
        correlations_csv=correlations_csv, alpha=alpha, per_type=per_type_samples, out=out
    )
    resp = _call(server, "/significance", req, handlers.significance,
                 schemas.SignificanceResponse)
    for row in resp.rows:
        click.echo(f"{row.first} vs {row.second} [{row.distortion_type}]: {row.codeword}")
    click.echo("Col. Sum: " + " ".join(str(v) for v in resp.col_sums))
    click.echo("DB Sum:   " + " ".join(str(v) for v in resp.db_sums))
    if resp.output:
        click.echo(f"wrote {resp.output}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
