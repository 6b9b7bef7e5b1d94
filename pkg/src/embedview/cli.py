"""Command line interface: ingest, compute, serve, export, bench, fetch."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .errors import EmbedviewError


@click.group()
def main():
    """Scalable embedding visualization engine."""


def _fail(e: Exception):
    raise click.ClickException(str(e))


@main.command()
@click.argument("file", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["auto", "csv", "json", "parquet"]),
              default="auto", show_default=True)
@click.option("--x", "x_col", default=None, help="x projection column")
@click.option("--y", "y_col", default=None, help="y projection column")
@click.option("--vector", default=None, help="high-dimensional vector column")
@click.option("--text", default=None, help="text column for labels/search")
@click.option("--category", default=None, help="default color-by column")
@click.option("--delimiter", default=",", show_default=True)
@click.option("--cache", envvar="ATLAS_CACHE_DIR", default=None,
              help="cache directory (env ATLAS_CACHE_DIR)")
def ingest(file, fmt, x_col, y_col, vector, text, category, delimiter, cache):
    """Ingest FILE into a content-addressed workspace."""
    from .session import DatasetConfig, ingest_to_workspace

    try:
        ws = ingest_to_workspace(
            file,
            cache_dir=cache,
            format=None if fmt == "auto" else fmt,
            config=DatasetConfig(x=x_col, y=y_col, text=text,
                                 vector=vector, category=category),
            delimiter=delimiter,
        )
    except EmbedviewError as e:
        _fail(e)
    meta = json.loads((ws / "meta.json").read_text())
    click.echo(f"ingested {meta['row_count']} rows -> {ws}")
    for col in meta["columns"]:
        click.echo(f"  {col['name']}: {col['dtype']}")


@main.command()
@click.option("--cache", envvar="ATLAS_CACHE_DIR", default=None)
@click.option("--workspace", default=None, help="workspace hash (default: latest)")
@click.option("--grid", default=256, show_default=True)
@click.option("--sigmas", default="32,16,8", show_default=True,
              help="bandwidth levels, coarse to fine")
def compute(cache, workspace, grid, sigmas):
    """Compute density, clusters, labels, and indexes for the workspace."""
    from .session import Session, resolve_workspace

    try:
        ws = resolve_workspace(cache, workspace)
        session = Session.from_workspace(ws)
        levels = [float(s) for s in sigmas.split(",")]
        artifacts = session.compute(grid=grid, sigmas=levels)
    except EmbedviewError as e:
        _fail(e)
    n_clusters = [len(l["clusters"]) for l in artifacts["clusters"]["levels"]]
    click.echo(f"computed {len(n_clusters)} levels, clusters per level: {n_clusters}")
    click.echo(f"labels planned: {len(artifacts['labels']['labels'])}")


@main.command()
@click.option("--port", envvar="ATLAS_PORT", default=8000, show_default=True)
@click.option("--host", envvar="ATLAS_HOST", default="127.0.0.1", show_default=True)
@click.option("--cache", envvar="ATLAS_CACHE_DIR", default=None)
@click.option("--workspace", default=None)
@click.option("--ui-dir", envvar="ATLAS_UI_DIR", default=None)
def serve(port, host, cache, workspace, ui_dir):
    """Serve the HTTP/WebSocket API for the ingested dataset."""
    import uvicorn

    from .service import create_app
    from .session import Session, resolve_workspace

    try:
        ws = resolve_workspace(cache, workspace)
        session = Session.from_workspace(ws)
        if session.label_plan is None:
            click.echo("artifacts missing; computing now", err=True)
            session.compute()
    except EmbedviewError as e:
        _fail(e)
    if ui_dir is None and Path("frontend/dist").is_dir():
        ui_dir = "frontend/dist"
    app = create_app(session, ui_dir=ui_dir)
    click.echo(f"serving {session.table.row_count} rows on http://{host}:{port}")
    uvicorn.run(app, host=host, port=int(port), log_level="warning")


@main.command()
@click.option("--selection", "selection_file", required=True,
              type=click.Path(exists=True, dir_okay=False),
              help="JSON file: selection context or a single predicate")
@click.option("--out", "out_file", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "parquet"]), default=None,
              help="default: by --out extension")
@click.option("--cache", envvar="ATLAS_CACHE_DIR", default=None)
@click.option("--workspace", default=None)
def export(selection_file, out_file, fmt, cache, workspace):
    """Export the rows matching a selection to CSV or Parquet."""
    from .data import export as export_table
    from .query import SelectionContext, evaluate, predicate_from_json, resolve
    from .session import Session, resolve_workspace

    try:
        ws = resolve_workspace(cache, workspace)
        session = Session.from_workspace(ws)
        sel = json.loads(Path(selection_file).read_text())
        if "entries" in sel:
            pred = resolve(SelectionContext.from_json(sel), None)
        else:
            pred = predicate_from_json(sel)
        mask = evaluate(session.table, pred)
        if fmt is None:
            fmt = "parquet" if out_file.endswith(".parquet") else "csv"
        Path(out_file).write_bytes(export_table(session.table, mask, fmt))
    except EmbedviewError as e:
        _fail(e)
    click.echo(f"exported {int(mask.sum())} rows -> {out_file}")


@main.command()
@click.option("--points", "n_points", default=100_000, show_default=True)
@click.option("--categories", default=4, show_default=True)
@click.option("--frames", default=30, show_default=True)
@click.option("--width", default=800, show_default=True)
@click.option("--height", default=800, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--backend", type=click.Choice(["auto", "compiled", "pure"]),
              default="auto", show_default=True)
@click.option("--compare", is_flag=True,
              help="run every available backend and report all")
@click.option("--out", "out_file", default=None, help="write JSON report here")
def bench(n_points, categories, frames, width, height, seed, backend, compare, out_file):
    """Measure rasterizer throughput on seeded synthetic data."""
    from .render import Viewport, benchmark, benchmark_comparison, write_report

    try:
        vp = Viewport((0.5, 0.5), float(min(width, height)), width, height)
        if compare:
            report = benchmark_comparison(
                n_points, categories, frames, seed=seed, viewport=vp
            )
            runs = report["runs"]
        else:
            report = benchmark(
                n_points, categories, frames, viewport=vp,
                seed=seed, backend=backend,
            )
            runs = [report]
    except EmbedviewError as e:
        _fail(e)
    for run in runs:
        s = run["stats"]
        click.echo(
            f"backend={run['params']['backend']}: "
            f"mean {s['mean_fps']:.1f} fps, p5 {s['p5_fps']:.1f} fps, "
            f"{run['throughput']['points_per_second'] / 1e6:.2f}M points/s"
        )
    if out_file:
        write_report(report, out_file)
        click.echo(f"report -> {out_file}")


@main.command()
@click.argument("url")
@click.option("--out", "out_file", default=None, help="default: last URL segment")
@click.option("--timeout", default=60.0, show_default=True)
def fetch(url, out_file, timeout):
    """Download a dataset file over HTTPS."""
    import httpx

    if not url.startswith(("http://", "https://")):
        raise click.UsageError("expected an http(s) URL")
    out_file = out_file or url.rstrip("/").rsplit("/", 1)[-1] or "download"
    try:
        with httpx.stream("GET", url, timeout=timeout, follow_redirects=True) as r:
            r.raise_for_status()
            with open(out_file, "wb") as f:
                for chunk in r.iter_bytes():
                    f.write(chunk)
    except Exception as e:
        raise click.ClickException(f"fetch failed: {e}")
    click.echo(f"saved {out_file}")


if __name__ == "__main__":
    sys.exit(main())
