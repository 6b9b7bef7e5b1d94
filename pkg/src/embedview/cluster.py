"""Density-based clustering of the 2D projection with automatic labels.

Clusters form around strict local maxima of the smoothed density grid;
every above-threshold cell follows steepest ascent to a peak and points
inherit their cell's cluster. Labels come from class-based TF-IDF over a
cluster's texts. All tie-breaks are deterministic, so identical inputs
always produce identical models.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from .density import DensityField, bin_points, density_at, smooth_deriche
from .errors import ParamError
from .stopwords import STOPWORDS

NOISE = -1

DEFAULT_NOISE_QUANTILE = 0.05
DEFAULT_MIN_SEPARATION = 4.0
DEFAULT_GRID = 256
DEFAULT_SIGMAS = (32.0, 16.0, 8.0)

# The recursive smoother's exponential tail leaves a faint halo (~1e-8 of the
# peak) across the whole grid; cells that far below the maximum are numerical
# residue, never cluster structure, so the noise threshold is floored at this
# fraction of the densest cell.
NOISE_FLOOR_REL = 1e-4

# 8-neighborhood in (drow, dcol) lexicographic order; ascent ties resolve
# in this order
_NEIGHBORS = ((-1, -1), (-1, 0), (-1, 1), (0, -1), (0, 1), (1, -1), (1, 0), (1, 1))

_TOKEN_SPLIT = re.compile(r"[^a-z0-9]+")


def noise_threshold(field: DensityField, noise_quantile: float) -> float:
    """Quantile of the positive cell densities, floored at a fixed fraction
    of the grid maximum (0 when the grid is empty)."""
    positive = field.grid[field.grid > 0]
    if positive.size == 0:
        return 0.0
    return max(
        float(np.quantile(positive, noise_quantile)),
        NOISE_FLOOR_REL * float(field.grid.max()),
    )


def _local_maxima(grid: np.ndarray) -> np.ndarray:
    """Boolean mask of strict 8-neighborhood local maxima."""
    padded = np.pad(grid, 1, mode="constant", constant_values=-np.inf)
    out = np.ones_like(grid, dtype=bool)
    for dr, dc in _NEIGHBORS:
        out &= grid > padded[1 + dr : 1 + dr + grid.shape[0],
                             1 + dc : 1 + dc + grid.shape[1]]
    return out


def find_peaks(
    field: DensityField,
    noise_quantile: float = DEFAULT_NOISE_QUANTILE,
    min_separation_cells: float = DEFAULT_MIN_SEPARATION,
):
    """Strict local maxima above the noise threshold, greedily thinned.

    Candidates are visited by descending density (ties by (row, col));
    a candidate within ``min_separation_cells`` of an already kept peak is
    dropped. Returns [(row, col, density)] in keep order, which is also the
    cluster id order.
    """
    g = field.grid
    if not (g > 0).any():
        return []
    thresh = noise_threshold(field, noise_quantile)
    maxima = _local_maxima(g) & (g >= thresh) & (g > 0)
    rows, cols = np.nonzero(maxima)
    if rows.size == 0:
        return []
    dens = g[rows, cols]
    order = np.lexsort((cols, rows, -dens))

    kept = []
    kr = np.empty(rows.size)
    kc = np.empty(rows.size)
    min_sep2 = float(min_separation_cells) ** 2
    for idx in order:
        r, c, d = int(rows[idx]), int(cols[idx]), float(dens[idx])
        k = len(kept)
        if k == 0 or ((kr[:k] - r) ** 2 + (kc[:k] - c) ** 2 >= min_sep2).all():
            kr[k], kc[k] = r, c
            kept.append((r, c, d))
    return kept


def _ascent_assignment(grid: np.ndarray, thresh: float, peaks) -> np.ndarray:
    """Per-cell cluster ids via steepest ascent to a peak cell.

    Below-threshold cells are NOISE. Ascent terminals that are not listed
    peaks (maxima thinned away by min-separation) join the nearest listed
    peak, ties by lower cluster id.
    """
    ny, nx = grid.shape
    if not peaks:
        return np.full((ny, nx), NOISE, dtype=np.int32)

    # steepest neighbor per cell (first strictly-greater max in _NEIGHBORS
    # order), else the cell itself
    flat = np.arange(ny * nx).reshape(ny, nx)
    padded = np.pad(grid, 1, mode="constant", constant_values=-np.inf)
    best_val = grid.copy()
    nxt = flat.copy()
    for dr, dc in _NEIGHBORS:
        nv = padded[1 + dr : 1 + dr + ny, 1 + dc : 1 + dc + nx]
        take = nv > best_val
        best_val = np.where(take, nv, best_val)
        rr = np.clip(np.arange(ny)[:, None] + dr, 0, ny - 1)
        cc = np.clip(np.arange(nx)[None, :] + dc, 0, nx - 1)
        nxt = np.where(take, flat[rr, cc], nxt)

    nxt = nxt.ravel()
    while True:
        nxt2 = nxt[nxt]
        if np.array_equal(nxt2, nxt):
            break
        nxt = nxt2

    terminal_ids = np.full(ny * nx, NOISE, dtype=np.int32)
    peak_rc = np.array([(r, c) for r, c, _ in peaks])
    peak_d = np.array([d for _, _, d in peaks])
    for cid, (r, c, _) in enumerate(peaks):
        terminal_ids[r * nx + c] = cid
    # thinned maxima: terminals that are not listed peaks join the nearest
    # peak at least as dense (the suppressor qualifies, so one always exists)
    flat_grid = grid.ravel()
    terminals = np.unique(nxt)
    for t in terminals:
        if terminal_ids[t] == NOISE:
            tr, tc = divmod(int(t), nx)
            elig = np.nonzero(peak_d >= flat_grid[t])[0]
            if elig.size == 0:
                elig = np.arange(len(peaks))
            d2 = (peak_rc[elig, 0] - tr) ** 2 + (peak_rc[elig, 1] - tc) ** 2
            terminal_ids[t] = int(elig[np.argmin(d2)])

    cell_ids = terminal_ids[nxt].reshape(ny, nx)
    cell_ids[grid < thresh] = NOISE
    cell_ids[grid <= 0] = NOISE
    return cell_ids


def assign_points(
    points,
    field: DensityField,
    peaks,
    noise_quantile: float = DEFAULT_NOISE_QUANTILE,
) -> np.ndarray:
    """Cluster id (or NOISE) per point, inherited from its grid cell."""
    pts = np.asarray(points, dtype=np.float64)
    n = len(pts)
    out = np.full(n, NOISE, dtype=np.int32)
    if not peaks:
        return out
    thresh = noise_threshold(field, noise_quantile)
    cell_ids = _ascent_assignment(field.grid, thresh, peaks)

    x0, x1, y0, y1 = field.extent
    nx, ny = field.nx, field.ny
    finite = np.isfinite(pts).all(axis=1)
    x = np.where(finite, pts[:, 0], x0 - 1.0)
    y = np.where(finite, pts[:, 1], y0 - 1.0)
    kx = np.floor((x - x0) * nx / (x1 - x0)).astype(np.int64)
    kx[x == x1] = nx - 1
    ky = np.floor((y - y0) * ny / (y1 - y0)).astype(np.int64)
    ky[y == y1] = ny - 1
    ok = finite & (kx >= 0) & (kx < nx) & (ky >= 0) & (ky < ny)
    out[ok] = cell_ids[ky[ok], kx[ok]]
    return out


def tokenize(text: str) -> list:
    """Lowercase, split on non-alphanumeric, drop short tokens + stopwords."""
    return [
        t for t in _TOKEN_SPLIT.split(text.lower())
        if len(t) >= 3 and t not in STOPWORDS
    ]


def _cluster_token_counts(table, text_column, assignment):
    """Per-cluster token frequency dicts, indexed by cluster id."""
    from .data import VALID

    col = table.column(text_column)
    n_clusters = int(assignment.max()) + 1 if (assignment >= 0).any() else 0
    counts = [dict() for _ in range(n_clusters)]
    for i in range(len(assignment)):
        cid = assignment[i]
        if cid < 0 or col.validity[i] != VALID:
            continue
        cell = col.cell(i)
        if not isinstance(cell, str):
            continue
        bag = counts[cid]
        for tok in tokenize(cell):
            bag[tok] = bag.get(tok, 0) + 1
    return counts


def summarize_cluster(
    table,
    text_column,
    assignment,
    cluster_id: int,
    top_k: int = 3,
) -> str:
    """Class-based TF-IDF label for one cluster.

    Token score = (occurrences within the cluster) * log(total clusters /
    clusters containing the token); the label joins the top_k tokens in
    score order, ties alphabetical. Falls back to "cluster {id}" when no
    usable text exists.
    """
    if text_column is None or not table.has_column(text_column):
        return f"cluster {cluster_id}"
    counts = _cluster_token_counts(table, text_column, np.asarray(assignment))
    return _label_from_counts(counts, cluster_id, top_k)


def _label_from_counts(counts, cluster_id, top_k):
    if cluster_id >= len(counts) or not counts[cluster_id]:
        return f"cluster {cluster_id}"
    k = len(counts)
    df = {}
    for bag in counts:
        for tok in bag:
            df[tok] = df.get(tok, 0) + 1
    scored = sorted(
        (
            (-freq * np.log(k / df[tok]), tok)
            for tok, freq in counts[cluster_id].items()
        ),
    )
    return ", ".join(tok for _, tok in scored[:top_k])


@dataclass
class ClusterSummary:
    id: int
    label: str
    anchor: tuple          # data-space density-weighted centroid
    size: int
    peak_density: float

    def to_dict(self):
        return {
            "id": self.id,
            "label": self.label,
            "anchor": [self.anchor[0], self.anchor[1]],
            "size": self.size,
            "peak_density": self.peak_density,
        }


@dataclass
class ClusterLevel:
    sigma: float
    field: DensityField
    peaks: list            # [(row, col, density)]
    assignment: np.ndarray
    summaries: list        # [ClusterSummary]

    def to_dict(self):
        return {
            "sigma": self.sigma,
            "clusters": [s.to_dict() for s in self.summaries],
        }


@dataclass
class ClusterModel:
    levels: list = field(default_factory=list)

    def to_json(self):
        return {"levels": [lv.to_dict() for lv in self.levels]}


def build_multiresolution(
    points,
    extent,
    grid: int = DEFAULT_GRID,
    sigmas=DEFAULT_SIGMAS,
    table=None,
    text_column=None,
    noise_quantile: float = DEFAULT_NOISE_QUANTILE,
    min_separation_cells: float = DEFAULT_MIN_SEPARATION,
    top_k: int = 3,
    backend: str = "auto",
) -> ClusterModel:
    """One clustering level per bandwidth, coarse to fine."""
    sigmas = [float(s) for s in sigmas]
    if not sigmas:
        raise ParamError("need at least one sigma level")
    if any(b >= a for a, b in zip(sigmas, sigmas[1:])):
        raise ParamError("sigma levels must be strictly descending")

    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    raw = (
        bin_points(pts, None, extent, grid, grid)
        if len(pts)
        else np.zeros((grid, grid))
    )

    model = ClusterModel()
    for sigma in sigmas:
        fld = smooth_deriche(raw, sigma, extent, backend=backend)
        peaks = find_peaks(fld, noise_quantile, min_separation_cells)
        assignment = (
            assign_points(pts, fld, peaks, noise_quantile)
            if len(pts)
            else np.zeros(0, dtype=np.int32)
        )

        token_counts = None
        if table is not None and text_column is not None and table.has_column(text_column):
            token_counts = _cluster_token_counts(table, text_column, assignment)

        summaries = []
        weights = density_at(fld, pts[:, 0], pts[:, 1]) if len(pts) else np.zeros(0)
        for cid, (r, c, dens) in enumerate(peaks):
            members = assignment == cid
            size = int(members.sum())
            if size:
                w = weights[members]
                wsum = float(w.sum())
                if wsum > 0:
                    anchor = (
                        float((pts[members, 0] * w).sum() / wsum),
                        float((pts[members, 1] * w).sum() / wsum),
                    )
                else:
                    anchor = (
                        float(pts[members, 0].mean()),
                        float(pts[members, 1].mean()),
                    )
            else:
                # peak cell center: a peak with no member points keeps a
                # well-defined anchor
                x0, x1, y0, y1 = fld.extent
                anchor = (
                    x0 + (c + 0.5) * (x1 - x0) / fld.nx,
                    y0 + (r + 0.5) * (y1 - y0) / fld.ny,
                )
            label = (
                _label_from_counts(token_counts, cid, top_k)
                if token_counts is not None
                else f"cluster {cid}"
            )
            summaries.append(ClusterSummary(cid, label, anchor, size, dens))
        model.levels.append(ClusterLevel(sigma, fld, peaks, assignment, summaries))
    return model
