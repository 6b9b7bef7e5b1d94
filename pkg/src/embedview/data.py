"""Columnar dataset: ingest CSV/JSON/Parquet, schema inference, stats, export.

Storage model
-------------
Every column keeps a per-row validity code (VALID/NULL/NAN/INF) next to its
typed payload:

* numerical          float64 array (nan placeholder at null positions)
* categorical        int32 codes into a sorted string dictionary (-1 = null)
* multi_categorical  arrow-style offsets(int64, n+1) + flat int32 codes
* text               object array of str (None = null)
* vector             (n, d) float64 matrix, one fixed d for all valid rows

Row ids are ingestion order (0..row_count-1) and never change afterwards;
tables are immutable once built.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .errors import IngestError, IoError, NotFound, SchemaError

VALID, NULL, NAN, INF = 0, 1, 2, 3

DTYPES = ("numerical", "categorical", "multi_categorical", "text", "vector")

_NUM_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_INF_TOKENS = {"inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}


def classify_token(tok: str):
    """Classify one raw CSV/string cell.

    Returns a (kind, value) pair with kind in {"null", "num", "nan", "inf",
    "str"}. Numbers accept integer, float, and scientific notation; the
    spellings of NaN/Infinity are matched case-insensitively.
    """
    t = tok.strip()
    if t == "":
        return ("null", None)
    low = t.lower()
    if low in ("nan", "+nan", "-nan"):
        return ("nan", math.nan)
    if low in _INF_TOKENS:
        return ("inf", -math.inf if low.startswith("-") else math.inf)
    if _NUM_RE.match(t):
        return ("num", float(t))
    return ("str", tok)


def _classify_cell(cell):
    """Classify an arbitrary python cell (str, number, bool, list, None)."""
    if cell is None:
        return ("null", None)
    if isinstance(cell, bool):
        return ("str", "true" if cell else "false")
    if isinstance(cell, (int, np.integer)):
        return ("num", float(cell))
    if isinstance(cell, (float, np.floating)):
        v = float(cell)
        if math.isnan(v):
            return ("nan", v)
        if math.isinf(v):
            return ("inf", v)
        return ("num", v)
    if isinstance(cell, str):
        return classify_token(cell)
    if isinstance(cell, (list, tuple, np.ndarray)):
        return ("list", list(cell))
    return ("str", str(cell))


def _stringify(cell) -> str:
    kind, v = _classify_cell(cell)
    if kind == "str":
        return v
    if kind == "num":
        return repr(v) if isinstance(cell, (float, np.floating)) else str(cell)
    if kind == "list":
        return json.dumps(v, default=str)
    if kind == "nan":
        return "NaN"
    if kind == "inf":
        return "Infinity" if v > 0 else "-Infinity"
    return ""


def infer_dtype(cells: Iterable) -> str:
    """Infer the column dtype from a raw cell sample.

    Rules: numerical iff every valid cell parses as a number (NaN/Infinity
    spellings count as numeric); fixed-length all-numeric lists are vectors;
    other lists are multi_categorical; strings are categorical while the
    distinct count stays within max(50, 0.5 * rows), text beyond that.
    """
    cells = list(cells)
    n_rows = len(cells)
    kinds = [_classify_cell(c) for c in cells]
    valid = [(k, v) for k, v in kinds if k != "null"]
    if not valid:
        return "categorical"

    if any(k == "list" for k, _ in valid):
        if not all(k == "list" for k, _ in valid):
            return "text"
        lengths = set()
        all_numeric = True
        for _, items in valid:
            lengths.add(len(items))
            for el in items:
                ek, _ = _classify_cell(el)
                if ek not in ("num", "nan", "inf"):
                    all_numeric = False
        if all_numeric and lengths and min(lengths) >= 1:
            if len(lengths) > 1:
                raise SchemaError(
                    f"mixed vector dimensionality: lengths {sorted(lengths)}"
                )
            return "vector"
        return "multi_categorical"

    if all(k in ("num", "nan", "inf") for k, _ in valid):
        return "numerical"

    distinct = {_stringify_scalar(k, v) for k, v in valid}
    if len(distinct) <= max(50, 0.5 * n_rows):
        return "categorical"
    return "text"


def _stringify_scalar(kind, v):
    if kind == "str":
        return v
    if kind == "num":
        return repr(v) if v != int(v) else str(int(v))
    if kind == "nan":
        return "NaN"
    if kind == "inf":
        return "Infinity" if v > 0 else "-Infinity"
    return ""


@dataclass
class Column:
    name: str
    dtype: str
    values: object
    validity: np.ndarray
    dictionary: Optional[list] = None
    offsets: Optional[np.ndarray] = None  # multi_categorical only

    def __len__(self):
        return len(self.validity)

    def list_at(self, i: int) -> list:
        """Dictionary codes of row i (multi_categorical)."""
        return list(self.values[self.offsets[i] : self.offsets[i + 1]])

    def cell(self, i: int):
        """Row i as a plain python value (None for nullized cells)."""
        v = self.validity[i]
        if self.dtype == "numerical":
            return None if v == NULL else float(self.values[i])
        if self.dtype == "categorical":
            return None if v != VALID else self.dictionary[self.values[i]]
        if self.dtype == "multi_categorical":
            if v != VALID:
                return None
            return [self.dictionary[c] for c in self.list_at(i)]
        if self.dtype == "text":
            return None if v != VALID else self.values[i]
        if self.dtype == "vector":
            return None if v == NULL else [float(x) for x in self.values[i]]
        raise AssertionError(self.dtype)


@dataclass
class ColumnStats:
    valid_count: int
    null_count: int
    nan_count: int
    inf_count: int
    min: Optional[float] = None
    max: Optional[float] = None
    distinct_count: Optional[int] = None
    dimensionality: Optional[int] = None

    def to_dict(self):
        d = {
            "valid_count": self.valid_count,
            "null_count": self.null_count,
            "nan_count": self.nan_count,
            "inf_count": self.inf_count,
        }
        for k in ("min", "max", "distinct_count", "dimensionality"):
            v = getattr(self, k)
            if v is not None:
                d[k] = v
        return d


class ColumnTable:
    """Immutable ordered collection of equal-length columns."""

    def __init__(self, columns: list[Column]):
        if columns:
            n = len(columns[0])
            for c in columns:
                if len(c) != n:
                    raise SchemaError(
                        f"column {c.name!r} has {len(c)} rows, expected {n}"
                    )
        self.columns = list(columns)
        self.row_count = len(columns[0]) if columns else 0
        self._by_name = {c.name: c for c in columns}

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        try:
            return self._by_name[name]
        except KeyError:
            raise NotFound(f"unknown column {name!r}") from None

    def has_column(self, name: str) -> bool:
        return name in self._by_name

    def __repr__(self):
        cols = ", ".join(f"{c.name}:{c.dtype}" for c in self.columns)
        return f"ColumnTable({self.row_count} rows; {cols})"


# ---------------------------------------------------------------------------
# column builders

def build_column(name: str, cells: list, dtype: Optional[str] = None) -> Column:
    """Materialize a typed Column from raw cells.

    ``dtype`` forces the target type (ingest type hints); cells that cannot be
    coerced under a forced numerical dtype become null.
    """
    if dtype is None:
        dtype = infer_dtype(cells)
    if dtype not in DTYPES:
        raise SchemaError(f"unknown dtype {dtype!r}")
    n = len(cells)
    validity = np.zeros(n, dtype=np.uint8)

    if dtype == "numerical":
        values = np.full(n, np.nan)
        for i, c in enumerate(cells):
            kind, v = _classify_cell(c)
            if kind == "num":
                values[i] = v
            elif kind == "nan":
                validity[i] = NAN
            elif kind == "inf":
                validity[i] = INF
                values[i] = v
            else:
                validity[i] = NULL
        return Column(name, dtype, values, validity)

    if dtype == "categorical":
        raw = []
        for i, c in enumerate(cells):
            kind, v = _classify_cell(c)
            if kind == "null" or kind == "list":
                validity[i] = NULL
                raw.append(None)
            else:
                raw.append(_stringify_scalar(kind, v))
        dictionary = sorted({s for s in raw if s is not None})
        lookup = {s: i for i, s in enumerate(dictionary)}
        codes = np.array(
            [lookup[s] if s is not None else -1 for s in raw], dtype=np.int32
        )
        return Column(name, dtype, codes, validity, dictionary=dictionary)

    if dtype == "multi_categorical":
        lists = []
        for i, c in enumerate(cells):
            kind, v = _classify_cell(c)
            if kind == "list":
                lists.append([_stringify(el) for el in v])
            elif kind == "null":
                validity[i] = NULL
                lists.append([])
            else:
                lists.append([_stringify_scalar(kind, v)])
        dictionary = sorted({s for items in lists for s in items})
        lookup = {s: i for i, s in enumerate(dictionary)}
        offsets = np.zeros(n + 1, dtype=np.int64)
        flat = []
        for i, items in enumerate(lists):
            flat.extend(lookup[s] for s in items)
            offsets[i + 1] = len(flat)
        codes = np.array(flat, dtype=np.int32)
        return Column(name, dtype, codes, validity, dictionary=dictionary,
                      offsets=offsets)

    if dtype == "text":
        values = np.empty(n, dtype=object)
        for i, c in enumerate(cells):
            kind, v = _classify_cell(c)
            if kind == "null":
                validity[i] = NULL
                values[i] = None
            else:
                values[i] = _stringify(c)
        return Column(name, dtype, values, validity)

    # vector
    dim = None
    rows = []
    for i, c in enumerate(cells):
        kind, v = _classify_cell(c)
        if kind == "null":
            validity[i] = NULL
            rows.append(None)
            continue
        if kind != "list":
            raise SchemaError(f"column {name!r}: scalar cell in vector column")
        vec = np.array([_classify_cell(el)[1] for el in v], dtype=np.float64)
        if dim is None:
            dim = len(vec)
        elif len(vec) != dim:
            raise SchemaError(
                f"mixed vector dimensionality in {name!r}: {len(vec)} vs {dim}"
            )
        if np.isnan(vec).any():
            validity[i] = NAN
        elif np.isinf(vec).any():
            validity[i] = INF
        rows.append(vec)
    dim = dim if dim is not None else 1
    values = np.full((n, dim), np.nan)
    for i, vec in enumerate(rows):
        if vec is not None:
            values[i] = vec
    return Column(name, "vector", values, validity)


def column_stats(table: ColumnTable, name: str) -> ColumnStats:
    """Validity partition counts plus per-dtype extras (min/max, distinct, d)."""
    col = table.column(name)
    v = col.validity
    stats = ColumnStats(
        valid_count=int((v == VALID).sum()),
        null_count=int((v == NULL).sum()),
        nan_count=int((v == NAN).sum()),
        inf_count=int((v == INF).sum()),
    )
    if col.dtype == "numerical":
        finite = col.values[v == VALID]
        if finite.size:
            stats.min = float(finite.min())
            stats.max = float(finite.max())
    elif col.dtype in ("categorical", "multi_categorical"):
        stats.distinct_count = len(col.dictionary)
    elif col.dtype == "vector":
        stats.dimensionality = int(col.values.shape[1])
    return stats


# ---------------------------------------------------------------------------
# ingest

@dataclass
class IngestOptions:
    delimiter: str = ","
    type_hints: dict = field(default_factory=dict)


def ingest(source, format: str, options: Optional[IngestOptions] = None) -> ColumnTable:
    """Parse a byte stream (or bytes) in the declared format into a table."""
    options = options or IngestOptions()
    if hasattr(source, "read"):
        data = source.read()
    else:
        data = source
    if not isinstance(data, (bytes, bytearray)):
        raise IngestError(f"expected bytes, got {type(data).__name__}")

    if format == "csv":
        return _ingest_csv(bytes(data), options)
    if format == "json":
        return _ingest_json(bytes(data), options)
    if format == "parquet":
        return _ingest_parquet(bytes(data), options)
    raise IngestError(f"unknown format {format!r}")


def _ingest_csv(data: bytes, options: IngestOptions) -> ColumnTable:
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise IngestError(f"CSV is not valid UTF-8: {e}", byte=e.start) from None
    reader = csv.reader(io.StringIO(text), delimiter=options.delimiter)
    try:
        header = next(reader, None)
    except csv.Error as e:
        raise IngestError(f"bad CSV header: {e}", row=0) from None
    if not header or all(h.strip() == "" for h in header):
        raise IngestError("missing or empty CSV header", row=0)
    if len(set(header)) != len(header):
        raise IngestError("duplicate column names in CSV header", row=0)

    ncols = len(header)
    cells = [[] for _ in range(ncols)]
    try:
        for rownum, row in enumerate(reader, start=1):
            if not row:
                if ncols == 1:
                    row = [""]  # a null cell round-trips as a blank line
                else:
                    continue
            if len(row) != ncols:
                raise IngestError(
                    f"expected {ncols} fields, found {len(row)}", row=rownum
                )
            for j, tok in enumerate(row):
                cells[j].append(tok)
    except csv.Error as e:
        raise IngestError(f"malformed CSV: {e}", row=reader.line_num) from None

    cols = [
        build_column(h, cells[j], options.type_hints.get(h))
        for j, h in enumerate(header)
    ]
    return ColumnTable(cols)


def _ingest_json(data: bytes, options: IngestOptions) -> ColumnTable:
    try:
        text = data.decode("utf-8-sig")
    except UnicodeDecodeError as e:
        raise IngestError(f"JSON is not valid UTF-8: {e}", byte=e.start) from None

    records = None
    try:
        parsed = json.loads(text)
        if isinstance(parsed, list):
            records = parsed
        elif isinstance(parsed, dict):
            records = [parsed]
        else:
            raise IngestError("top-level JSON must be an array of objects")
    except json.JSONDecodeError:
        records = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise IngestError(
                    f"bad JSON line: {e.msg}", row=lineno
                ) from None

    keys = []
    seen = set()
    for i, rec in enumerate(records):
        if not isinstance(rec, dict):
            raise IngestError("JSON rows must be objects", row=i)
        for k in rec:
            if k not in seen:
                seen.add(k)
                keys.append(k)

    cols = [
        build_column(
            k, [rec.get(k) for rec in records], options.type_hints.get(k)
        )
        for k in keys
    ]
    return ColumnTable(cols)


def _ingest_parquet(data: bytes, options: IngestOptions) -> ColumnTable:
    import polars as pl

    try:
        df = pl.read_parquet(io.BytesIO(data))
    except Exception as e:
        raise IngestError(f"unreadable parquet: {e}") from None

    cols = []
    for name in df.columns:
        series = df[name]
        cells = series.to_list()
        cols.append(build_column(name, cells, options.type_hints.get(name)))
    return ColumnTable(cols)


# ---------------------------------------------------------------------------
# export

def _csv_cell(col: Column, i: int) -> str:
    v = col.validity[i]
    if col.dtype == "numerical":
        if v == NULL:
            return ""
        if v == NAN:
            return "NaN"
        if v == INF:
            return "Infinity" if col.values[i] > 0 else "-Infinity"
        x = float(col.values[i])
        return str(int(x)) if x == int(x) and abs(x) < 1e16 else repr(x)
    if v != VALID:
        return ""
    if col.dtype == "categorical":
        return col.dictionary[col.values[i]]
    if col.dtype == "text":
        return col.values[i]
    if col.dtype == "multi_categorical":
        return json.dumps([col.dictionary[c] for c in col.list_at(i)])
    # vector cells are JSON lists in CSV (lossy round trip; use parquet)
    return json.dumps([float(x) for x in col.values[i]])


def export(table: ColumnTable, mask: np.ndarray, format: str):
    """Serialize the masked rows, preserving column order.

    Returns bytes. Parquet preserves every dtype faithfully; CSV flattens
    list-typed cells to JSON strings.
    """
    mask = np.asarray(mask, dtype=bool)
    if mask.shape != (table.row_count,):
        raise IoError(
            f"mask length {mask.shape} does not match row count {table.row_count}"
        )
    idx = np.flatnonzero(mask)

    if format == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(table.names)
        for i in idx:
            writer.writerow([_csv_cell(c, i) for c in table.columns])
        return buf.getvalue().encode("utf-8")

    if format == "parquet":
        import polars as pl

        series = []
        for col in table.columns:
            if col.dtype == "numerical":
                vals = [
                    None if col.validity[i] == NULL else float(col.values[i])
                    for i in idx
                ]
                series.append(pl.Series(col.name, vals, dtype=pl.Float64))
            elif col.dtype == "categorical":
                series.append(
                    pl.Series(col.name, [col.cell(i) for i in idx], dtype=pl.Utf8)
                )
            elif col.dtype == "text":
                series.append(
                    pl.Series(col.name, [col.cell(i) for i in idx], dtype=pl.Utf8)
                )
            elif col.dtype == "multi_categorical":
                series.append(
                    pl.Series(
                        col.name,
                        [col.cell(i) for i in idx],
                        dtype=pl.List(pl.Utf8),
                    )
                )
            else:  # vector
                vals = [
                    None if col.validity[i] == NULL else [float(x) for x in col.values[i]]
                    for i in idx
                ]
                series.append(pl.Series(col.name, vals, dtype=pl.List(pl.Float64)))
        df = pl.DataFrame(series)
        out = io.BytesIO()
        try:
            df.write_parquet(out, compression="uncompressed")
        except Exception as e:
            raise IoError(f"parquet write failed: {e}") from None
        return out.getvalue()

    raise IoError(f"unknown export format {format!r}")


def table_equal(a: ColumnTable, b: ColumnTable, rtol: float = 1e-9) -> bool:
    """Column-wise equality of values and validity (floats within rtol)."""
    if a.names != b.names or a.row_count != b.row_count:
        return False
    for ca, cb in zip(a.columns, b.columns):
        if ca.dtype != cb.dtype:
            return False
        if not np.array_equal(ca.validity, cb.validity):
            return False
        ok = ca.validity == VALID
        if ca.dtype == "numerical":
            va, vb = ca.values[ok], cb.values[ok]
            if not np.allclose(va, vb, rtol=rtol, atol=0, equal_nan=True):
                return False
            # signed infinities live at INF rows
            ia = ca.values[ca.validity == INF]
            ib = cb.values[cb.validity == INF]
            if not np.array_equal(np.sign(ia), np.sign(ib)):
                return False
        elif ca.dtype == "vector":
            if ca.values.shape != cb.values.shape:
                return False
            if not np.allclose(
                ca.values[ok], cb.values[ok], rtol=rtol, atol=0, equal_nan=True
            ):
                return False
        else:
            for i in range(a.row_count):
                if ca.cell(i) != cb.cell(i):
                    return False
    return True
