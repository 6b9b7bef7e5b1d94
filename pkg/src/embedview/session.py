"""Dataset sessions: workspace cache, computed artifacts, selection state.

A workspace is a cache directory keyed by the content hash of the source
file; it holds the normalized dataset (parquet), the column configuration,
and the computed artifacts (clusters + label plan) so serving restarts are
instant. A Session wraps one loaded dataset with its selection context and
a monotone revision counter; reads run concurrently while selection
mutations serialize through a lock.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import cluster as cluster_mod
from . import labels as labels_mod
from .data import ColumnTable, IngestOptions, VALID, export, ingest
from .errors import EmbedviewError, NotFound, QueryError
from .neighbors import SpatialIndex2D, VectorIndex
from .query import MatchAll, SelectionContext, evaluate, predicate_from_json, resolve

LATEST_FILE = "latest.json"

# label box geometry at unit text size (px per char, px line height)
LABEL_CHAR_W = 7.0
LABEL_PAD_W = 12.0
LABEL_LINE_H = 16.0

ZOOM_OCTAVES = 8  # planned zoom range spans z_fit .. z_fit * 2**8


def default_cache_dir(override: Optional[str] = None) -> Path:
    if override:
        return Path(override)
    env = os.environ.get("ATLAS_CACHE_DIR")
    if env:
        return Path(env)
    return Path.home() / ".cache" / "embedview"


def detect_format(path: str) -> str:
    ext = Path(path).suffix.lower()
    return {".csv": "csv", ".json": "json", ".jsonl": "json",
            ".ndjson": "json", ".parquet": "parquet"}.get(ext, "csv")


@dataclass
class DatasetConfig:
    x: Optional[str] = None
    y: Optional[str] = None
    text: Optional[str] = None
    vector: Optional[str] = None
    category: Optional[str] = None

    def to_dict(self):
        return {k: getattr(self, k) for k in ("x", "y", "text", "vector", "category")}

    @classmethod
    def from_dict(cls, d):
        return cls(**{k: d.get(k) for k in ("x", "y", "text", "vector", "category")})


def ingest_to_workspace(
    source_path: str,
    cache_dir: Optional[str] = None,
    format: Optional[str] = None,
    config: Optional[DatasetConfig] = None,
    delimiter: str = ",",
) -> Path:
    """Ingest a file and normalize it into a content-addressed workspace."""
    data = Path(source_path).read_bytes()
    fmt = format or detect_format(source_path)
    table = ingest(data, fmt, IngestOptions(delimiter=delimiter))
    config = config or DatasetConfig()
    config = _autoconfigure(table, config)

    root = default_cache_dir(cache_dir)
    key = hashlib.sha256(data).hexdigest()[:16]
    ws = root / key
    ws.mkdir(parents=True, exist_ok=True)
    (ws / "dataset.parquet").write_bytes(
        export(table, np.ones(table.row_count, dtype=bool), "parquet")
    )
    meta = {
        "source": str(source_path),
        "format": fmt,
        "hash": key,
        "row_count": table.row_count,
        "columns": [{"name": c.name, "dtype": c.dtype} for c in table.columns],
        "config": config.to_dict(),
    }
    (ws / "meta.json").write_text(json.dumps(meta, indent=2))
    (root / LATEST_FILE).write_text(json.dumps({"workspace": key}))
    return ws


def _autoconfigure(table: ColumnTable, config: DatasetConfig) -> DatasetConfig:
    """Fill unset column roles from conventional names / dtypes."""
    names = {c.name.lower(): c.name for c in table.columns}
    if config.x is None and "x" in names:
        config.x = names["x"]
    if config.y is None and "y" in names:
        config.y = names["y"]
    if config.text is None:
        for c in table.columns:
            if c.dtype == "text":
                config.text = c.name
                break
    if config.vector is None:
        for c in table.columns:
            if c.dtype == "vector":
                config.vector = c.name
                break
    if config.category is None:
        for c in table.columns:
            if c.dtype == "categorical":
                config.category = c.name
                break
    for role in ("x", "y", "text", "vector", "category"):
        name = getattr(config, role)
        if name is not None and not table.has_column(name):
            raise NotFound(f"configured {role} column {name!r} does not exist")
    return config


def resolve_workspace(cache_dir: Optional[str] = None,
                      workspace: Optional[str] = None) -> Path:
    root = default_cache_dir(cache_dir)
    if workspace:
        ws = root / workspace
    else:
        latest = root / LATEST_FILE
        if not latest.exists():
            raise EmbedviewError(
                f"no ingested dataset in {root}; run `embedview ingest` first"
            )
        ws = root / json.loads(latest.read_text())["workspace"]
    if not (ws / "meta.json").exists():
        raise EmbedviewError(f"workspace {ws} is missing meta.json")
    return ws


class Session:
    """One dataset + its computed artifacts + mutable selection state."""

    def __init__(self, table: ColumnTable, config: DatasetConfig,
                 workspace: Optional[Path] = None):
        self.table = table
        self.config = config
        self.workspace = workspace
        self.selection = SelectionContext()
        self.revision = 0
        self._lock = threading.Lock()
        self.subscribers = []   # asyncio.Queue list, managed by the service

        self.points = self._projection()
        self.extent = self._extent()
        self.spatial = SpatialIndex2D(self.points)
        self.vectors = None
        if config.vector and table.has_column(config.vector):
            col = table.column(config.vector)
            self.vectors = VectorIndex(col.values, col.validity)

        self.cluster_model = None
        self.label_plan = None

    # -- construction ------------------------------------------------------

    @classmethod
    def from_workspace(cls, workspace: Path) -> "Session":
        meta = json.loads((workspace / "meta.json").read_text())
        table = ingest((workspace / "dataset.parquet").read_bytes(), "parquet")
        session = cls(table, DatasetConfig.from_dict(meta["config"]), workspace)
        art = workspace / "artifacts.json"
        if art.exists():
            session.load_artifacts(json.loads(art.read_text()))
        return session

    def _projection(self) -> np.ndarray:
        cfg = self.config
        n = self.table.row_count
        if cfg.x and cfg.y:
            cx = self.table.column(cfg.x)
            cy = self.table.column(cfg.y)
            pts = np.stack([cx.values.astype(float), cy.values.astype(float)], axis=1)
            bad = (cx.validity != VALID) | (cy.validity != VALID)
            pts[bad] = np.nan
            return pts
        if cfg.vector and self.table.has_column(cfg.vector):
            from .projection import pca2d

            col = self.table.column(cfg.vector)
            pts = pca2d(col.values)
            pts[col.validity != VALID] = np.nan
            return pts
        if cfg.text and self.table.has_column(cfg.text):
            from .projection import hash_embed, pca2d

            col = self.table.column(cfg.text)
            texts = [col.cell(i) or "" for i in range(n)]
            return pca2d(hash_embed(texts))
        raise EmbedviewError(
            "dataset has no projection: configure x/y columns, a vector "
            "column, or a text column"
        )

    def _extent(self):
        finite = np.isfinite(self.points).all(axis=1)
        if not finite.any():
            return (0.0, 1.0, 0.0, 1.0)
        xs, ys = self.points[finite, 0], self.points[finite, 1]
        x0, x1 = float(xs.min()), float(xs.max())
        y0, y1 = float(ys.min()), float(ys.max())
        mx = (x1 - x0) * 0.02 or 0.5
        my = (y1 - y0) * 0.02 or 0.5
        return (x0 - mx, x1 + mx, y0 - my, y1 + my)

    # -- artifacts -----------------------------------------------------------

    def zoom_range(self, view_px: float = 800.0):
        x0, x1, y0, y1 = self.extent
        z_fit = view_px / max(x1 - x0, y1 - y0)
        return z_fit, z_fit * 2.0 ** ZOOM_OCTAVES

    def compute(self, grid: int = cluster_mod.DEFAULT_GRID,
                sigmas=cluster_mod.DEFAULT_SIGMAS, persist: bool = True) -> dict:
        """Build clusters and the label plan; optionally cache them on disk."""
        self.cluster_model = cluster_mod.build_multiresolution(
            self.points, self.extent, grid=grid, sigmas=sigmas,
            table=self.table, text_column=self.config.text,
        )
        candidates = []
        for level in self.cluster_model.levels:
            for s in level.summaries:
                candidates.append(labels_mod.LabelCandidate(
                    anchor=s.anchor,
                    text=s.label,
                    priority=s.peak_density,
                    box=(LABEL_CHAR_W * len(s.label) + LABEL_PAD_W, LABEL_LINE_H),
                ))
        z_lo, z_hi = self.zoom_range()
        self.label_plan = labels_mod.plan(candidates, z_lo, z_hi)

        artifacts = {
            "clusters": self.cluster_model.to_json(),
            "labels": self.label_plan.to_json(),
            "extent": list(self.extent),
            "params": {"grid": grid, "sigmas": list(sigmas)},
        }
        if persist and self.workspace is not None:
            (self.workspace / "artifacts.json").write_text(json.dumps(artifacts))
        self._clusters_json = artifacts["clusters"]
        return artifacts

    def load_artifacts(self, artifacts: dict):
        self._clusters_json = artifacts["clusters"]
        self.label_plan = labels_mod.LabelPlan.from_json(artifacts["labels"])
        self.cluster_model = None  # full model (with assignments) not persisted

    @property
    def clusters_json(self):
        if getattr(self, "_clusters_json", None) is None:
            raise EmbedviewError("artifacts not computed; run `embedview compute`")
        return self._clusters_json

    def require_label_plan(self) -> labels_mod.LabelPlan:
        if self.label_plan is None:
            raise EmbedviewError("artifacts not computed; run `embedview compute`")
        return self.label_plan

    # -- selection ----------------------------------------------------------

    def set_selection(self, view: str, predicate_json) -> int:
        """Set or clear one view's predicate; bumps and returns the revision."""
        pred = None if predicate_json is None else predicate_from_json(predicate_json)
        if pred is not None:
            self._check_predicate_columns(pred)
        with self._lock:
            self.selection.set(view, pred)
            self.revision += 1
            return self.revision

    def _check_predicate_columns(self, pred):
        # surface unknown columns at selection time, not first query time
        from . import query as q

        cols = []
        stack = [pred]
        while stack:
            p = stack.pop()
            if isinstance(p, (q.And, q.Or)):
                stack.extend(p.children)
            elif isinstance(p, q.Not):
                stack.append(p.child)
            elif isinstance(p, (q.Interval, q.Member, q.Validity)):
                cols.append(p.column)
            elif isinstance(p, (q.Rect, q.Polygon)):
                cols.extend([p.x_column, p.y_column])
        for c in cols:
            self.table.column(c)

    def mask_for(self, view: Optional[str] = None) -> np.ndarray:
        """Row mask of the cross-filter resolved against ``view``."""
        return evaluate(self.table, resolve(self.selection, view))

    def resolved_predicate(self, view: Optional[str] = None):
        return resolve(self.selection, view)
