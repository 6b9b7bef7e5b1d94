"""HTTP + WebSocket service exposing the engine to browser clients.

JSON endpoints carry the revision they were computed against; clients may
echo a ``revision`` field in POST bodies to detect races (stale revision ->
409, retry after refetch). Density tiles and the point stream are little-
endian binary (layouts documented in the README). Selection mutations
serialize through the session lock and push ``{"revision": n}`` over the
``/updates`` websocket.
"""

from __future__ import annotations

import asyncio
import json
import struct
from pathlib import Path
from typing import Optional

import numpy as np
from fastapi import Body, FastAPI, HTTPException, Query, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, RedirectResponse, Response

from . import density as density_mod
from .cluster import DEFAULT_NOISE_QUANTILE
from .data import column_stats
from .errors import EmbedviewError, NotFound, ParamError, QueryError
from .labels import visible as labels_visible
from .neighbors import text_search
from .query import (
    SelectionContext,
    boxplot,
    evaluate,
    heatmap2d,
    histogram1d,
    resolve,
)
from .session import Session

POINT_RECORD = struct.Struct("<Iffi")
DEFAULT_POINT_LIMIT = 200_000


def _snapshot(session: Session, view: Optional[str]):
    """(revision, resolved predicate mask) captured atomically."""
    with session._lock:
        rev = session.revision
        ctx = SelectionContext(dict(session.selection.entries))
    return rev, evaluate(session.table, resolve(ctx, view))


def _check_revision(session: Session, body: dict):
    rev = body.get("revision")
    if rev is not None and int(rev) != session.revision:
        raise HTTPException(
            status_code=409,
            detail={"error": "revision mismatch", "revision": session.revision},
        )


def create_app(session: Session, ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="embedview", docs_url=None, redoc_url=None)

    @app.exception_handler(NotFound)
    async def _nf(_, exc):
        return JSONResponse({"error": str(exc)}, status_code=404)

    @app.exception_handler(QueryError)
    async def _qe(_, exc):
        return JSONResponse({"error": str(exc)}, status_code=400)

    @app.exception_handler(ParamError)
    async def _pe(_, exc):
        return JSONResponse({"error": str(exc)}, status_code=400)

    @app.exception_handler(EmbedviewError)
    async def _ee(_, exc):
        return JSONResponse({"error": str(exc)}, status_code=400)

    # -- schema / stats ------------------------------------------------------

    @app.get("/schema")
    async def schema():
        t = session.table
        return {
            "row_count": t.row_count,
            "columns": [
                {
                    "name": c.name,
                    "dtype": c.dtype,
                    "stats": column_stats(t, c.name).to_dict(),
                }
                for c in t.columns
            ],
            "config": session.config.to_dict(),
            "extent": list(session.extent),
            "revision": session.revision,
        }

    @app.get("/stats/{column}")
    async def stats(column: str):
        return {
            "column": column,
            "stats": column_stats(session.table, column).to_dict(),
            "revision": session.revision,
        }

    # -- aggregation ---------------------------------------------------------

    @app.post("/query/histogram")
    async def query_histogram(body: dict = Body(...)):
        _check_revision(session, body)
        view = body.get("view")
        rev, mask = _snapshot(session, view)
        hist = histogram1d(
            session.table,
            body["column"],
            int(body.get("bins", 30)),
            mask,
        )
        return {"revision": rev, "histogram": hist.to_dict()}

    @app.post("/query/heatmap")
    async def query_heatmap(body: dict = Body(...)):
        _check_revision(session, body)
        rev, mask = _snapshot(session, body.get("view"))
        hm = heatmap2d(
            session.table, body["x"], body["y"],
            int(body.get("nx", 32)), int(body.get("ny", 32)), mask,
        )
        return {"revision": rev, "heatmap": hm.to_dict()}

    @app.post("/query/boxplot")
    async def query_boxplot(body: dict = Body(...)):
        _check_revision(session, body)
        rev, mask = _snapshot(session, body.get("view"))
        boxes = boxplot(session.table, body["value"], body.get("group"), mask)
        return {
            "revision": rev,
            "boxes": [
                {"group": g, "stats": s.to_dict()} for g, s in boxes.items()
            ],
        }

    # -- selection -----------------------------------------------------------

    @app.post("/selection")
    async def set_selection(body: dict = Body(...)):
        _check_revision(session, body)
        if "view" not in body:
            raise QueryError("selection body needs a 'view'")
        rev = session.set_selection(body["view"], body.get("predicate"))
        for q in list(session.subscribers):
            q.put_nowait(rev)
        return {"revision": rev}

    @app.get("/selection")
    async def get_selection():
        with session._lock:
            return {
                "revision": session.revision,
                "selection": session.selection.to_json(),
            }

    # -- density -------------------------------------------------------------

    @app.post("/density")
    async def density_tile(body: dict = Body(default={})):
        _check_revision(session, body)
        view = body.get("view", "embedding")
        rev, mask = _snapshot(session, view)
        nx = int(body.get("nx", 256))
        ny = int(body.get("ny", 256))
        sigma = float(body.get("sigma", 8.0))
        cat_value = body.get("category_value")
        if cat_value is not None:
            cat_col = body.get("category_column") or session.config.category
            if not cat_col:
                raise QueryError("no categorical column configured")
            col = session.table.column(cat_col)
            if col.dtype != "categorical":
                raise QueryError(f"{cat_col!r} is not categorical")
            try:
                code = col.dictionary.index(cat_value)
            except ValueError:
                raise NotFound(f"unknown category {cat_value!r}")
            mask = mask & (col.values == code) & (col.validity == 0)
        raw = density_mod.bin_points(
            session.points, mask, session.extent, nx, ny
        )
        fld = density_mod.smooth_deriche(raw, sigma, session.extent)
        return Response(
            content=fld.to_bytes(),
            media_type="application/octet-stream",
            headers={"X-Revision": str(rev)},
        )

    # -- clusters / labels ----------------------------------------------------

    @app.get("/clusters")
    async def clusters():
        return {"revision": session.revision, "clusters": session.clusters_json}

    @app.get("/labels")
    async def labels(zoom: Optional[float] = Query(default=None)):
        plan = session.require_label_plan()
        out = plan.to_json()
        if zoom is not None:
            out["labels"] = [
                l for l in out["labels"]
                if l["min_zoom"] is not None
                and l["min_zoom"] <= min(max(zoom, plan.z_lo), plan.z_hi)
            ]
        out["revision"] = session.revision
        return out

    @app.get("/labels/visible")
    async def labels_in_view(
        cx: float, cy: float, zoom: float, width: float = 800, height: float = 800
    ):
        plan = session.require_label_plan()
        placements = labels_visible(plan, (cx, cy), zoom, width, height)
        return {
            "revision": session.revision,
            "labels": [
                {**p.label.to_dict(), "screen": [p.screen_x, p.screen_y]}
                for p in placements
            ],
        }

    # -- neighbors / search ----------------------------------------------------

    @app.post("/knn2d")
    async def knn2d(body: dict = Body(...)):
        k = int(body.get("k", 10))
        hits = session.spatial.knn((float(body["x"]), float(body["y"])), k)
        return {
            "revision": session.revision,
            "neighbors": [{"row": r, "distance": d} for r, d in hits],
        }

    @app.post("/knnvec")
    async def knnvec(body: dict = Body(...)):
        if session.vectors is None:
            raise QueryError("no vector column configured")
        row = int(body["row"])
        if not 0 <= row < session.table.row_count:
            raise NotFound(f"row {row} out of range")
        hits = session.vectors.knn(row, int(body.get("k", 10)))
        return {
            "revision": session.revision,
            "neighbors": [{"row": r, "distance": d} for r, d in hits],
        }

    @app.post("/search")
    async def search(body: dict = Body(...)):
        column = body.get("column") or session.config.text
        if not column:
            raise QueryError("no text column configured")
        rows = text_search(
            session.table, column, str(body.get("query", "")),
            int(body.get("limit", 100)),
        )
        return {"revision": session.revision, "rows": rows}

    # -- point stream / rows / export ------------------------------------------

    @app.get("/points")
    async def points(
        minx: Optional[float] = None, maxx: Optional[float] = None,
        miny: Optional[float] = None, maxy: Optional[float] = None,
        limit: int = DEFAULT_POINT_LIMIT,
        category: Optional[str] = None,
        view: Optional[str] = None,
    ):
        pts = session.points
        keep = np.isfinite(pts).all(axis=1)
        if view is not None:
            _, mask = _snapshot(session, view)
            keep &= mask
        if minx is not None:
            keep &= pts[:, 0] >= minx
        if maxx is not None:
            keep &= pts[:, 0] <= maxx
        if miny is not None:
            keep &= pts[:, 1] >= miny
        if maxy is not None:
            keep &= pts[:, 1] <= maxy
        ids = np.flatnonzero(keep)
        if limit > 0 and len(ids) > limit:
            stride = int(np.ceil(len(ids) / limit))
            ids = ids[::stride]

        cat_col = category or session.config.category
        if cat_col and session.table.has_column(cat_col):
            col = session.table.column(cat_col)
            codes = (
                np.where(col.validity == 0, col.values, -1).astype(np.int32)
                if col.dtype == "categorical"
                else np.full(session.table.row_count, -1, np.int32)
            )
        else:
            codes = np.full(session.table.row_count, -1, np.int32)

        rec = np.empty(
            len(ids),
            dtype=[("id", "<u4"), ("x", "<f4"), ("y", "<f4"), ("cat", "<i4")],
        )
        rec["id"] = ids
        rec["x"] = pts[ids, 0]
        rec["y"] = pts[ids, 1]
        rec["cat"] = codes[ids]
        return Response(
            content=rec.tobytes(),
            media_type="application/octet-stream",
            headers={"X-Revision": str(session.revision)},
        )

    @app.get("/rows")
    async def rows(offset: int = 0, limit: int = 50, view: Optional[str] = None):
        rev, mask = _snapshot(session, view)
        ids = np.flatnonzero(mask)
        window = ids[max(offset, 0) : max(offset, 0) + max(min(limit, 1000), 0)]
        cols = session.table.columns
        return {
            "revision": rev,
            "total": int(len(ids)),
            "offset": int(offset),
            "rows": [
                {"_id": int(i), **{c.name: _json_cell(c, int(i)) for c in cols}}
                for i in window
            ],
        }

    @app.get("/export")
    async def export_rows(format: str = "parquet"):
        from .data import export as export_table

        rev, mask = _snapshot(session, None)
        blob = export_table(session.table, mask, format)
        media = "text/csv" if format == "csv" else "application/octet-stream"
        return Response(
            content=blob, media_type=media,
            headers={
                "Content-Disposition": f"attachment; filename=selection.{format}",
                "X-Revision": str(rev),
                "X-Row-Count": str(int(mask.sum())),
            },
        )

    # -- websocket -------------------------------------------------------------

    @app.websocket("/updates")
    async def updates(ws: WebSocket):
        await ws.accept()
        queue: asyncio.Queue = asyncio.Queue()
        session.subscribers.append(queue)
        try:
            await ws.send_text(json.dumps({"revision": session.revision}))
            while True:
                rev = await queue.get()
                await ws.send_text(json.dumps({"revision": rev}))
        except WebSocketDisconnect:
            pass
        finally:
            if queue in session.subscribers:
                session.subscribers.remove(queue)

    # -- static UI ---------------------------------------------------------------

    if ui_dir and Path(ui_dir).is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

        @app.get("/")
        async def root():
            return RedirectResponse("/ui/")

    else:

        @app.get("/")
        async def root():
            return {
                "name": "embedview",
                "row_count": session.table.row_count,
                "revision": session.revision,
            }

    return app


def _json_cell(col, i: int):
    v = col.cell(i)
    if isinstance(v, float):
        if v != v:
            return "NaN"
        if v in (float("inf"), float("-inf")):
            return "Infinity" if v > 0 else "-Infinity"
    return v
