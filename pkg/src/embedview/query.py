"""Predicate evaluation and binned aggregation with cross-filter semantics.

Predicates form a small algebra (interval, member, rect, polygon, validity,
and/or/not) with a canonical tagged-union JSON encoding; a SelectionContext
maps view ids to predicates and resolves each view against every selection
except its own.

Invalid cells (null/nan/inf) never satisfy value predicates; they are
reachable only through ``validity`` predicates targeting their class, or
through plain boolean negation of other predicates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .data import INF, NAN, NULL, VALID, Column, ColumnStats, ColumnTable
from .errors import QueryError

PREDICATE_JSON_VERSION = 1

VALIDITY_CLASSES = {"null": NULL, "nan": NAN, "inf": INF}


# ---------------------------------------------------------------------------
# predicate algebra

@dataclass(frozen=True)
class MatchAll:
    pass


@dataclass(frozen=True)
class Interval:
    column: str
    lo: float
    hi: float
    closed_lo: bool = True
    closed_hi: bool = True

    def __post_init__(self):
        if not (self.lo <= self.hi):
            raise QueryError(f"interval requires lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class Member:
    column: str
    values: frozenset

    def __post_init__(self):
        object.__setattr__(self, "values", frozenset(self.values))


@dataclass(frozen=True)
class Rect:
    x_column: str
    y_column: str
    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise QueryError("rect requires x0 <= x1 and y0 <= y1")


@dataclass(frozen=True)
class Polygon:
    x_column: str
    y_column: str
    points: tuple

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) < 3:
            raise QueryError("polygon requires at least 3 vertices")
        object.__setattr__(self, "points", pts)


@dataclass(frozen=True)
class Validity:
    column: str
    klass: str

    def __post_init__(self):
        if self.klass not in VALIDITY_CLASSES:
            raise QueryError(f"unknown validity class {self.klass!r}")


@dataclass(frozen=True)
class And:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class Or:
    children: tuple

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))


@dataclass(frozen=True)
class Not:
    child: object


Predicate = Union[MatchAll, Interval, Member, Rect, Polygon, Validity, And, Or, Not]


def predicate_to_json(p: Predicate) -> dict:
    """Canonical tagged-union encoding (member values sorted)."""
    if isinstance(p, MatchAll):
        return {"type": "all"}
    if isinstance(p, Interval):
        return {
            "type": "interval",
            "column": p.column,
            "lo": p.lo,
            "hi": p.hi,
            "closed": [p.closed_lo, p.closed_hi],
        }
    if isinstance(p, Member):
        return {"type": "member", "column": p.column, "values": sorted(p.values)}
    if isinstance(p, Rect):
        return {
            "type": "rect",
            "x": p.x_column,
            "y": p.y_column,
            "x0": p.x0,
            "x1": p.x1,
            "y0": p.y0,
            "y1": p.y1,
        }
    if isinstance(p, Polygon):
        return {
            "type": "polygon",
            "x": p.x_column,
            "y": p.y_column,
            "points": [[x, y] for x, y in p.points],
        }
    if isinstance(p, Validity):
        return {"type": "validity", "column": p.column, "class": p.klass}
    if isinstance(p, And):
        return {"type": "and", "children": [predicate_to_json(c) for c in p.children]}
    if isinstance(p, Or):
        return {"type": "or", "children": [predicate_to_json(c) for c in p.children]}
    if isinstance(p, Not):
        return {"type": "not", "child": predicate_to_json(p.child)}
    raise QueryError(f"not a predicate: {p!r}")


def predicate_from_json(obj) -> Predicate:
    if not isinstance(obj, dict) or "type" not in obj:
        raise QueryError(f"malformed predicate JSON: {obj!r}")
    try:
        t = obj["type"]
        if t == "all":
            return MatchAll()
        if t == "interval":
            closed = obj.get("closed", [True, True])
            return Interval(
                obj["column"], float(obj["lo"]), float(obj["hi"]),
                bool(closed[0]), bool(closed[1]),
            )
        if t == "member":
            return Member(obj["column"], frozenset(obj["values"]))
        if t == "rect":
            return Rect(
                obj["x"], obj["y"],
                float(obj["x0"]), float(obj["x1"]),
                float(obj["y0"]), float(obj["y1"]),
            )
        if t == "polygon":
            return Polygon(obj["x"], obj["y"], tuple(map(tuple, obj["points"])))
        if t == "validity":
            return Validity(obj["column"], obj["class"])
        if t == "and":
            return And(tuple(predicate_from_json(c) for c in obj["children"]))
        if t == "or":
            return Or(tuple(predicate_from_json(c) for c in obj["children"]))
        if t == "not":
            return Not(predicate_from_json(obj["child"]))
    except QueryError:
        raise
    except (KeyError, TypeError, ValueError) as e:
        raise QueryError(f"malformed predicate JSON: {e}") from None
    raise QueryError(f"unknown predicate type {obj['type']!r}")


# ---------------------------------------------------------------------------
# selection context

@dataclass
class SelectionContext:
    """Named per-view predicates combined under cross-filter semantics."""

    entries: dict = field(default_factory=dict)

    def set(self, view: str, predicate: Optional[Predicate]):
        if predicate is None or isinstance(predicate, MatchAll):
            self.entries.pop(view, None)
        else:
            self.entries[view] = predicate

    def to_json(self) -> dict:
        return {
            "version": PREDICATE_JSON_VERSION,
            "entries": {
                view: predicate_to_json(p)
                for view, p in sorted(self.entries.items())
            },
        }

    @classmethod
    def from_json(cls, obj) -> "SelectionContext":
        entries = obj.get("entries", obj if isinstance(obj, dict) else {})
        ctx = cls()
        for view, pj in entries.items():
            ctx.set(view, predicate_from_json(pj))
        return ctx


def resolve(context: SelectionContext, target: Optional[str] = None) -> Predicate:
    """Conjunction of all entries except the target view's own.

    ``target=None`` keeps every entry (used for exports). An empty
    conjunction collapses to match-all.
    """
    parts = [p for view, p in sorted(context.entries.items()) if view != target]
    if not parts:
        return MatchAll()
    if len(parts) == 1:
        return parts[0]
    return And(tuple(parts))


# ---------------------------------------------------------------------------
# evaluation

def _numeric_column(table: ColumnTable, name: str) -> Column:
    col = table.column(name)
    if col.dtype != "numerical":
        raise QueryError(f"column {name!r} is {col.dtype}, expected numerical")
    return col


def evaluate(table: ColumnTable, p: Predicate) -> np.ndarray:
    """Boolean row mask; bit i set iff row i satisfies the predicate."""
    n = table.row_count
    if isinstance(p, MatchAll):
        return np.ones(n, dtype=bool)
    if isinstance(p, Interval):
        col = _numeric_column(table, p.column)
        v = col.values
        ok = col.validity == VALID
        lo = v >= p.lo if p.closed_lo else v > p.lo
        hi = v <= p.hi if p.closed_hi else v < p.hi
        return ok & lo & hi
    if isinstance(p, Member):
        col = table.column(p.column)
        if col.dtype == "categorical":
            lookup = {s: i for i, s in enumerate(col.dictionary)}
            codes = np.array(
                sorted(lookup[s] for s in p.values if s in lookup), dtype=np.int32
            )
            return (col.validity == VALID) & np.isin(col.values, codes)
        if col.dtype == "multi_categorical":
            lookup = {s: i for i, s in enumerate(col.dictionary)}
            codes = np.array(
                sorted(lookup[s] for s in p.values if s in lookup), dtype=np.int32
            )
            hit = np.isin(col.values, codes)
            rows = np.repeat(np.arange(n), np.diff(col.offsets))
            out = np.zeros(n, dtype=bool)
            np.logical_or.at(out, rows[hit], True)
            return out & (col.validity == VALID)
        raise QueryError(
            f"member() needs a categorical column, {p.column!r} is {col.dtype}"
        )
    if isinstance(p, Rect):
        cx = _numeric_column(table, p.x_column)
        cy = _numeric_column(table, p.y_column)
        ok = (cx.validity == VALID) & (cy.validity == VALID)
        return (
            ok
            & (cx.values >= p.x0) & (cx.values <= p.x1)
            & (cy.values >= p.y0) & (cy.values <= p.y1)
        )
    if isinstance(p, Polygon):
        cx = _numeric_column(table, p.x_column)
        cy = _numeric_column(table, p.y_column)
        ok = (cx.validity == VALID) & (cy.validity == VALID)
        return ok & _points_in_polygon(cx.values, cy.values, p.points)
    if isinstance(p, Validity):
        col = table.column(p.column)
        return col.validity == VALIDITY_CLASSES[p.klass]
    if isinstance(p, And):
        out = np.ones(n, dtype=bool)
        for c in p.children:
            out &= evaluate(table, c)
        return out
    if isinstance(p, Or):
        out = np.zeros(n, dtype=bool)
        for c in p.children:
            out |= evaluate(table, c)
        return out
    if isinstance(p, Not):
        return ~evaluate(table, p.child)
    raise QueryError(f"not a predicate: {p!r}")


def _points_in_polygon(xs, ys, points) -> np.ndarray:
    """Even-odd rule ray casting, vectorized over rows."""
    inside = np.zeros(len(xs), dtype=bool)
    px = np.array([p[0] for p in points])
    py = np.array([p[1] for p in points])
    j = len(points) - 1
    with np.errstate(invalid="ignore", divide="ignore"):
        for i in range(len(points)):
            xi, yi, xj, yj = px[i], py[i], px[j], py[j]
            crosses = (yi > ys) != (yj > ys)
            if yi != yj:
                t = (ys - yi) / (yj - yi)
                xcross = xi + t * (xj - xi)
                inside ^= crosses & (xs < xcross)
            j = i
    return inside


# ---------------------------------------------------------------------------
# aggregation

DEFAULT_BIN_COUNT = 30
MAX_HEATMAP_BINS = 256


@dataclass
class Histogram:
    kind: str                      # "numerical" | "categorical"
    counts: np.ndarray             # filtered counts per bin
    totals: np.ndarray             # unfiltered counts per bin
    edges: Optional[np.ndarray] = None       # numerical: nbins + 1 edges
    categories: Optional[list] = None        # categorical: labels per bin
    codes: Optional[np.ndarray] = None       # categorical: dictionary codes
    scale_hint: str = "linear"

    def to_dict(self):
        d = {
            "kind": self.kind,
            "counts": self.counts.tolist(),
            "totals": self.totals.tolist(),
            "scale_hint": self.scale_hint,
        }
        if self.edges is not None:
            d["edges"] = self.edges.tolist()
        if self.categories is not None:
            d["categories"] = list(self.categories)
            d["codes"] = self.codes.tolist()
        return d


@dataclass
class Heatmap:
    x_edges: np.ndarray
    y_edges: np.ndarray
    counts: np.ndarray   # (ny, nx), row index = y bin
    totals: np.ndarray

    def to_dict(self):
        return {
            "x_edges": self.x_edges.tolist(),
            "y_edges": self.y_edges.tolist(),
            "counts": self.counts.tolist(),
            "totals": self.totals.tolist(),
        }


@dataclass
class BoxStats:
    q1: float
    median: float
    q3: float
    whisker_lo: float
    whisker_hi: float
    outlier_count: int

    def to_dict(self):
        return {
            "q1": self.q1,
            "median": self.median,
            "q3": self.q3,
            "whisker_lo": self.whisker_lo,
            "whisker_hi": self.whisker_hi,
            "outlier_count": self.outlier_count,
        }


def bin_index(values: np.ndarray, lo: float, hi: float, nbins: int) -> np.ndarray:
    """Uniform binning rule shared by histograms and heatmaps.

    Bins are right-open except the last, which is closed:
    k = floor((v - lo) * nbins / (hi - lo)), with v == hi landing in the
    last bin. Out-of-range values map to -1.
    """
    values = np.asarray(values)
    k = np.full(len(values), -1, dtype=np.int64)
    if hi <= lo:
        k[values == lo] = 0
        return k
    sel = (values >= lo) & (values <= hi)
    raw = np.floor((values[sel] - lo) * nbins / (hi - lo))
    k[sel] = raw.astype(np.int64)
    k[values == hi] = nbins - 1
    return k


def choose_scale(stats: ColumnStats) -> str:
    """Log scale only for strictly positive columns spanning > 3 decades."""
    if (
        stats.min is not None
        and stats.max is not None
        and stats.min > 0
        and stats.max / stats.min > 1000
    ):
        return "log"
    return "linear"


def histogram1d(
    table: ColumnTable,
    column: str,
    nbins: int = DEFAULT_BIN_COUNT,
    mask: Optional[np.ndarray] = None,
) -> Histogram:
    """Filtered + unfiltered bin counts for one column.

    Numerical columns get ``nbins`` uniform bins over the column's valid
    [min, max]; categorical bins are dictionary codes sorted by total count
    descending (ties by code). Multi-categorical rows contribute one count
    per element, so the totals of such columns may sum past the row count.
    """
    col = table.column(column)
    if mask is None:
        mask = np.ones(table.row_count, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)

    if col.dtype == "numerical":
        from .data import column_stats

        stats = column_stats(table, column)
        valid = col.validity == VALID
        if stats.min is None:
            return Histogram(
                "numerical",
                counts=np.zeros(0, dtype=np.int64),
                totals=np.zeros(0, dtype=np.int64),
                edges=np.zeros(0),
            )
        lo, hi = stats.min, stats.max
        if hi <= lo:
            nbins = 1
        edges = np.linspace(lo, hi, nbins + 1)
        k = bin_index(col.values, lo, hi, nbins)
        in_range = valid & (k >= 0)
        totals = np.bincount(k[in_range], minlength=nbins)
        counts = np.bincount(k[in_range & mask], minlength=nbins)
        return Histogram(
            "numerical", counts=counts, totals=totals, edges=edges,
            scale_hint=choose_scale(stats),
        )

    if col.dtype == "categorical":
        ncat = len(col.dictionary)
        if ncat == 0:
            return Histogram(
                "categorical",
                counts=np.zeros(0, dtype=np.int64),
                totals=np.zeros(0, dtype=np.int64),
                categories=[], codes=np.zeros(0, dtype=np.int32),
            )
        valid = col.validity == VALID
        totals = np.bincount(col.values[valid], minlength=ncat)
        counts = np.bincount(col.values[valid & mask], minlength=ncat)
        order = np.lexsort((np.arange(ncat), -totals))
        return Histogram(
            "categorical",
            counts=counts[order],
            totals=totals[order],
            categories=[col.dictionary[c] for c in order],
            codes=order.astype(np.int32),
        )

    if col.dtype == "multi_categorical":
        ncat = len(col.dictionary)
        if ncat == 0:
            return Histogram(
                "categorical",
                counts=np.zeros(0, dtype=np.int64),
                totals=np.zeros(0, dtype=np.int64),
                categories=[], codes=np.zeros(0, dtype=np.int32),
            )
        valid = col.validity == VALID
        rows = np.repeat(np.arange(table.row_count), np.diff(col.offsets))
        use_t = valid[rows]
        totals = np.bincount(col.values[use_t], minlength=ncat)
        use_c = use_t & mask[rows]
        counts = np.bincount(col.values[use_c], minlength=ncat)
        order = np.lexsort((np.arange(ncat), -totals))
        return Histogram(
            "categorical",
            counts=counts[order],
            totals=totals[order],
            categories=[col.dictionary[c] for c in order],
            codes=order.astype(np.int32),
        )

    raise QueryError(f"histogram1d does not support dtype {col.dtype!r}")


def heatmap2d(
    table: ColumnTable,
    x_column: str,
    y_column: str,
    nx: int,
    ny: int,
    mask: Optional[np.ndarray] = None,
) -> Heatmap:
    """2D count grid over two numerical columns; invalid-in-either rows drop."""
    nx = min(int(nx), MAX_HEATMAP_BINS)
    ny = min(int(ny), MAX_HEATMAP_BINS)
    if nx < 1 or ny < 1:
        raise QueryError("heatmap needs nx, ny >= 1")
    cx = _numeric_column(table, x_column)
    cy = _numeric_column(table, y_column)
    if mask is None:
        mask = np.ones(table.row_count, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)

    ok = (cx.validity == VALID) & (cy.validity == VALID)
    if not ok.any():
        return Heatmap(
            np.zeros(0), np.zeros(0),
            np.zeros((ny, nx), dtype=np.int64),
            np.zeros((ny, nx), dtype=np.int64),
        )
    xlo, xhi = float(cx.values[ok].min()), float(cx.values[ok].max())
    ylo, yhi = float(cy.values[ok].min()), float(cy.values[ok].max())
    kx = bin_index(cx.values, xlo, xhi, nx)
    ky = bin_index(cy.values, ylo, yhi, ny)
    use = ok & (kx >= 0) & (ky >= 0)
    flat_t = ky[use] * nx + kx[use]
    totals = np.bincount(flat_t, minlength=nx * ny).reshape(ny, nx)
    flat_c = ky[use & mask] * nx + kx[use & mask]
    counts = np.bincount(flat_c, minlength=nx * ny).reshape(ny, nx)
    return Heatmap(
        np.linspace(xlo, xhi, nx + 1), np.linspace(ylo, yhi, ny + 1),
        counts, totals,
    )


def _box_from_values(v: np.ndarray) -> BoxStats:
    q1, med, q3 = np.quantile(v, [0.25, 0.5, 0.75])  # Type-7 interpolation
    iqr = q3 - q1
    lo_fence, hi_fence = q1 - 1.5 * iqr, q3 + 1.5 * iqr
    inside = v[(v >= lo_fence) & (v <= hi_fence)]
    whisker_lo = float(inside.min())
    whisker_hi = float(inside.max())
    outliers = int(((v < lo_fence) | (v > hi_fence)).sum())
    return BoxStats(float(q1), float(med), float(q3), whisker_lo, whisker_hi, outliers)


def boxplot(
    table: ColumnTable,
    value_column: str,
    group_column: Optional[str] = None,
    mask: Optional[np.ndarray] = None,
) -> dict:
    """Type-7 quartiles with 1.5*IQR whiskers, optionally per category group.

    Returns {group_label_or_None: BoxStats}; groups with no valid rows are
    omitted.
    """
    col = _numeric_column(table, value_column)
    if mask is None:
        mask = np.ones(table.row_count, dtype=bool)
    else:
        mask = np.asarray(mask, dtype=bool)
    use = (col.validity == VALID) & mask

    if group_column is None:
        v = col.values[use]
        return {} if v.size == 0 else {None: _box_from_values(v)}

    gcol = table.column(group_column)
    if gcol.dtype != "categorical":
        raise QueryError(
            f"group column {group_column!r} is {gcol.dtype}, expected categorical"
        )
    out = {}
    for code, label in enumerate(gcol.dictionary):
        sel = use & (gcol.validity == VALID) & (gcol.values == code)
        v = col.values[sel]
        if v.size:
            out[label] = _box_from_values(v)
    return out
