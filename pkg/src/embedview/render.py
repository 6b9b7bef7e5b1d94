"""Deterministic reference rasterizer and throughput benchmark.

Points composite with weighted-blended order-independent transparency using
unit weights: every splat accumulates premultiplied color C += a*c and
coverage A += a, plus a revealage product R *= (1 - a). The resolve
    color = (C / max(A, eps)) * (1 - R) + background * R
is symmetric in the contributions, so draw order cannot change the frame
beyond float reassociation.
"""

from __future__ import annotations

import json
import os
import platform
import time
from dataclasses import dataclass, field

import numpy as np

from ._kernels import BACKEND, available_backends, get_backend
from .density import DensityField, contours as density_contours
from .errors import ParamError

OIT_EPS = 1e-6


def default_threads() -> int:
    """Splat band count: EMBEDVIEW_THREADS env override, else cpu count (<= 8)."""
    env = os.environ.get("EMBEDVIEW_THREADS")
    if env:
        return max(1, int(env))
    return min(os.cpu_count() or 1, 8)

CATEGORY_PALETTE = np.array([
    [0.121, 0.466, 0.705], [1.000, 0.498, 0.054], [0.172, 0.627, 0.172],
    [0.839, 0.152, 0.156], [0.580, 0.403, 0.741], [0.549, 0.337, 0.294],
    [0.890, 0.466, 0.760], [0.498, 0.498, 0.498], [0.737, 0.741, 0.133],
    [0.090, 0.745, 0.811],
])


@dataclass
class Viewport:
    center: tuple      # data-space (x, y)
    zoom: float        # pixels per data unit
    width: int
    height: int

    def __post_init__(self):
        if not self.zoom > 0:
            raise ParamError(f"zoom must be > 0, got {self.zoom}")
        if self.width < 1 or self.height < 1:
            raise ParamError("viewport must be at least 1x1")

    def data_to_screen(self, x, y):
        sx = (np.asarray(x) - self.center[0]) * self.zoom + self.width / 2
        sy = self.height / 2 - (np.asarray(y) - self.center[1]) * self.zoom
        return sx, sy

    def screen_to_data(self, sx, sy):
        x = (np.asarray(sx) - self.width / 2) / self.zoom + self.center[0]
        y = self.center[1] - (np.asarray(sy) - self.height / 2) / self.zoom
        return x, y

    def data_bounds(self):
        hx = self.width / (2 * self.zoom)
        hy = self.height / (2 * self.zoom)
        return (self.center[0] - hx, self.center[0] + hx,
                self.center[1] - hy, self.center[1] + hy)


@dataclass
class PointStyle:
    radius: float = 2.0
    alpha: float = 0.7
    palette: np.ndarray = field(default_factory=lambda: CATEGORY_PALETTE.copy())
    default_color: tuple = (0.121, 0.466, 0.705)

    def __post_init__(self):
        if not self.radius > 0:
            raise ParamError("point radius must be > 0")
        if not 0 < self.alpha <= 1:
            raise ParamError("alpha must be in (0, 1]")


def _resolve_oit(cr, cg, cb, a_sum, rev, background):
    # all accumulators are finite by construction (a <= 1 per splat, finite
    # colors), so a single clamp suffices
    inv = 1.0 / np.maximum(a_sum, OIT_EPS)
    show = 1.0 - rev
    inv *= show
    fb = np.empty(cr.shape + (4,))
    np.multiply(cr, inv, out=fb[..., 0])
    np.multiply(cg, inv, out=fb[..., 1])
    np.multiply(cb, inv, out=fb[..., 2])
    fb[..., 0] += background[0] * rev
    fb[..., 1] += background[1] * rev
    fb[..., 2] += background[2] * rev
    fb[..., 3] = show
    return np.clip(fb, 0.0, 1.0, out=fb)


def rasterize_points(
    points,
    codes=None,
    mask=None,
    viewport: Viewport = None,
    style: PointStyle = None,
    background=(1.0, 1.0, 1.0),
    backend: str = "auto",
    threads: int = None,
) -> np.ndarray:
    """Splat anti-aliased discs with OIT compositing.

    Returns a (height, width, 4) float framebuffer with components in
    [0, 1]. Disc coverage uses 2x2 rim supersampling; draw order is
    irrelevant to within float reassociation, and the thread count never
    changes the output (pixel bands are exclusively owned).
    """
    style = style or PointStyle()
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if mask is None:
        mask = np.ones(n, dtype=bool)
    mask = np.asarray(mask, dtype=bool)

    sx, sy = viewport.data_to_screen(pts[:, 0], pts[:, 1])
    sx, sy = sx[mask], sy[mask]
    if codes is None:
        rgb = np.broadcast_to(
            np.asarray(style.default_color, dtype=np.float64), (mask.sum(), 3)
        ).copy()
    else:
        codes = np.asarray(codes)[mask]
        pal = np.asarray(style.palette, dtype=np.float64)
        rgb = pal[np.clip(codes, 0, len(pal) - 1)]
        rgb[codes < 0] = style.default_color

    kern = get_backend(backend)
    cr, cg, cb, a_sum, rev = kern.splat(
        sx, sy, rgb, float(style.alpha), float(style.radius),
        viewport.width, viewport.height,
        threads=threads if threads is not None else default_threads(),
    )
    return _resolve_oit(cr, cg, cb, a_sum, rev, background)


def _field_opacity(fld: DensityField, alpha_max: float):
    positive = fld.grid[fld.grid > 0]
    if positive.size == 0:
        return np.zeros_like(fld.grid), 0.0
    q95 = float(np.quantile(positive, 0.95))
    if q95 <= 0:
        return np.zeros_like(fld.grid), 0.0
    return np.clip(fld.grid / q95, 0.0, 1.0) * alpha_max, q95


def _sample_field(grid, extent, viewport):
    """Bilinear resample of a field grid onto the viewport pixel lattice."""
    x0, x1, y0, y1 = extent
    ny, nx = grid.shape
    px = np.arange(viewport.width) + 0.5
    py = np.arange(viewport.height) + 0.5
    dx, dy_ = viewport.screen_to_data(px[None, :], py[:, None])
    gx = np.clip((dx - x0) / (x1 - x0) * nx - 0.5, 0, nx - 1)
    gy = np.clip((dy_ - y0) / (y1 - y0) * ny - 0.5, 0, ny - 1)
    inside = (dx >= x0) & (dx <= x1) & (dy_ >= y0) & (dy_ <= y1)
    ix = np.clip(np.floor(gx).astype(np.int64), 0, nx - 2)
    iy = np.clip(np.floor(gy).astype(np.int64), 0, ny - 2)
    fx, fy = gx - ix, gy - iy
    v = (
        grid[iy, ix] * (1 - fx) * (1 - fy)
        + grid[iy, ix + 1] * fx * (1 - fy)
        + grid[iy + 1, ix] * (1 - fx) * fy
        + grid[iy + 1, ix + 1] * fx * fy
    )
    return np.where(inside, v, 0.0)


def render_density(
    fields,
    viewport: Viewport,
    levels=(0.25, 0.5, 0.75),
    palette=None,
    alpha_max: float = 0.85,
    background=(1.0, 1.0, 1.0),
    contour_darken: float = 0.55,
) -> np.ndarray:
    """Composite per-category density layers with OIT, plus 1px contours.

    Density maps to opacity as clamp(d / q95, 0, 1) * alpha_max, where q95
    is the 95th percentile of that field's positive cells. ``levels`` are
    fractions of q95 at which contour lines are stroked. Contour pixels
    join the same OIT accumulation, so category order does not matter.
    """
    fields = list(fields)
    if not fields:
        raise ParamError("need at least one density field")
    extent = fields[0].extent
    for f in fields:
        if f.extent != extent:
            raise ParamError("density fields must share an extent")
    pal = np.asarray(palette if palette is not None else CATEGORY_PALETTE,
                     dtype=np.float64)

    H, W = viewport.height, viewport.width
    cr = np.zeros((H, W)); cg = np.zeros((H, W)); cb = np.zeros((H, W))
    a_sum = np.zeros((H, W)); rev = np.ones((H, W))

    for k, fld in enumerate(fields):
        color = pal[k % len(pal)]
        opacity, q95 = _field_opacity(fld, alpha_max)
        a = _sample_field(opacity, extent, viewport)
        cr += a * color[0]; cg += a * color[1]; cb += a * color[2]
        a_sum += a
        rev *= 1.0 - a

        if q95 > 0:
            line = color * contour_darken
            abs_levels = [l * q95 for l in levels if 0 < l * q95 <= fld.grid.max()]
            cset = density_contours(fld, abs_levels)
            for polylines in cset.polylines:
                for pts in polylines:
                    _stroke_polyline(
                        pts, viewport, cr, cg, cb, a_sum, rev, line
                    )

    return _resolve_oit(cr, cg, cb, a_sum, rev, background)


def _stroke_polyline(pts, viewport, cr, cg, cb, a_sum, rev, color):
    """1px opaque stroke accumulated through the OIT planes."""
    sx, sy = viewport.data_to_screen(pts[:, 0], pts[:, 1])
    pixels = set()
    for i in range(len(sx) - 1):
        x0, y0, x1, y1 = sx[i], sy[i], sx[i + 1], sy[i + 1]
        steps = max(1, int(np.ceil(max(abs(x1 - x0), abs(y1 - y0)))))
        t = np.arange(steps + 1) / steps
        xs = np.floor(x0 + (x1 - x0) * t).astype(np.int64)
        ys = np.floor(y0 + (y1 - y0) * t).astype(np.int64)
        pixels.update(zip(xs.tolist(), ys.tolist()))
    H, W = a_sum.shape
    for x, y in sorted(pixels):
        if 0 <= x < W and 0 <= y < H:
            cr[y, x] += color[0]; cg[y, x] += color[1]; cb[y, x] += color[2]
            a_sum[y, x] += 1.0
            rev[y, x] = 0.0


def framebuffer_to_png(fb: np.ndarray, path):
    from PIL import Image

    img = (np.clip(fb, 0, 1) * 255).round().astype(np.uint8)
    Image.fromarray(img, mode="RGBA").save(path)


# ---------------------------------------------------------------------------
# benchmark harness

BENCH_REPORT_SCHEMA = {
    "type": "object",
    "required": ["schema_version", "params", "stats", "throughput", "machine"],
    "properties": {
        "schema_version": {"const": 1},
        "params": {
            "type": "object",
            "required": ["points", "categories", "frames", "width", "height",
                         "seed", "radius", "alpha", "backend"],
        },
        "stats": {
            "type": "object",
            "required": ["mean_fps", "p5_fps", "frame_times_ms"],
            "additionalProperties": False,
            "properties": {
                "mean_fps": {"type": "number", "exclusiveMinimum": 0},
                "p5_fps": {"type": "number", "exclusiveMinimum": 0},
                "frame_times_ms": {"type": "array", "items": {"type": "number"}},
            },
        },
        "throughput": {
            "type": "object",
            "required": ["points_per_second"],
        },
        "machine": {"type": "object"},
    },
}


def benchmark(
    n_points: int,
    k_categories: int = 4,
    frames: int = 30,
    viewport: Viewport = None,
    seed: int = 0,
    radius: float = 2.0,
    alpha: float = 0.7,
    backend: str = "auto",
) -> dict:
    """Render an animated zoom+orbit over seeded mixture data and time it.

    The report's ``stats`` object holds exactly mean_fps, p5_fps, and the
    per-frame time series; see BENCH_REPORT_SCHEMA.
    """
    if n_points < 1:
        raise ParamError("benchmark needs n_points >= 1")
    from .synth import make_points

    viewport = viewport or Viewport((0.5, 0.5), 800.0, 800, 800)
    pts, codes = make_points(n_points, k_categories, seed)
    style = PointStyle(radius=radius, alpha=alpha)

    frame_times = []
    for f in range(frames):
        t = f / max(frames - 1, 1)
        vp = Viewport(
            (0.5 + 0.12 * np.sin(2 * np.pi * t), 0.5 + 0.12 * np.cos(2 * np.pi * t)),
            viewport.zoom * 2.0 ** (2.0 * t),
            viewport.width,
            viewport.height,
        )
        t0 = time.perf_counter()
        rasterize_points(pts, codes, None, vp, style, backend=backend)
        frame_times.append(time.perf_counter() - t0)

    frame_times = np.array(frame_times)
    total = float(frame_times.sum())
    fps = 1.0 / frame_times
    backend_used = BACKEND if backend == "auto" else backend
    return {
        "schema_version": 1,
        "params": {
            "points": int(n_points), "categories": int(k_categories),
            "frames": int(frames), "width": viewport.width,
            "height": viewport.height, "seed": int(seed),
            "radius": float(radius), "alpha": float(alpha),
            "backend": backend_used,
        },
        "stats": {
            "mean_fps": frames / total,
            "p5_fps": float(np.quantile(fps, 0.05)),
            "frame_times_ms": [1e3 * t for t in frame_times],
        },
        "throughput": {"points_per_second": n_points * frames / total},
        "machine": {
            "platform": platform.platform(),
            "python": platform.python_version(),
            "cpu_count": __import__("os").cpu_count(),
            "available_backends": available_backends(),
        },
    }


def benchmark_comparison(n_points, k_categories=4, frames=10, seed=0, **kw) -> dict:
    """Run the same scene on every available backend (compiled vs pure)."""
    return {
        "schema_version": 1,
        "runs": [
            benchmark(n_points, k_categories, frames, seed=seed, backend=b, **kw)
            for b in available_backends()
        ],
    }


def write_report(report: dict, path):
    with open(path, "w") as f:
        json.dump(report, f, indent=2)
        f.write("\n")
