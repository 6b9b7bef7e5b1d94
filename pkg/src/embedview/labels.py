"""Zoom-consistent de-overlapping label placement.

Each label owns a fixed pixel box centered on its data-space anchor; the
screen distance between anchors grows linearly with zoom, so any two boxes
stop overlapping above a pair-specific zoom. Planning assigns every label
the smallest zoom on a geometric grid at which it clears every
higher-priority label that can ever be visible with it; visibility is the
interval [min_zoom, +inf), so zooming in never hides a label and panning
never changes the visible set ("consistency while zooming").
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParamError

ZOOM_RATIO = 2.0 ** 0.125   # 8 grid steps per zoom octave


@dataclass(frozen=True)
class LabelCandidate:
    anchor: tuple      # data-space (x, y)
    text: str
    priority: float    # cluster peak density
    box: tuple         # (width, height) screen pixels at unit text size

    def __post_init__(self):
        w, h = self.box
        if not (w > 0 and h > 0):
            raise ParamError(f"label box must be positive, got {self.box}")
        if not math.isfinite(self.priority):
            raise ParamError("label priority must be finite")


@dataclass
class PlannedLabel:
    anchor: tuple
    text: str
    priority: float
    box: tuple
    min_zoom: float    # grid zoom, or +inf for "never shown"

    def to_dict(self):
        return {
            "anchor": [self.anchor[0], self.anchor[1]],
            "text": self.text,
            "priority": self.priority,
            "box": [self.box[0], self.box[1]],
            "min_zoom": None if math.isinf(self.min_zoom) else self.min_zoom,
        }


@dataclass
class LabelPlan:
    z_lo: float
    z_hi: float
    labels: list       # PlannedLabel, priority-descending

    def to_json(self):
        return {
            "z_lo": self.z_lo,
            "z_hi": self.z_hi,
            "labels": [l.to_dict() for l in self.labels],
        }

    @classmethod
    def from_json(cls, obj):
        labels = [
            PlannedLabel(
                anchor=tuple(l["anchor"]),
                text=l["text"],
                priority=l["priority"],
                box=tuple(l["box"]),
                min_zoom=math.inf if l["min_zoom"] is None else l["min_zoom"],
            )
            for l in obj["labels"]
        ]
        return cls(obj["z_lo"], obj["z_hi"], labels)


def zoom_grid(z_lo: float, z_hi: float) -> np.ndarray:
    """Geometric zoom steps z_lo * 2^(k/8) covering [z_lo, z_hi]."""
    if not (z_lo > 0 and z_lo <= z_hi):
        raise ParamError(f"need 0 < z_lo <= z_hi, got [{z_lo}, {z_hi}]")
    steps = int(math.floor(8.0 * math.log2(z_hi / z_lo) * (1 + 1e-12))) + 1
    g = z_lo * ZOOM_RATIO ** np.arange(steps)
    return g[g <= z_hi * (1 + 1e-12)]


def boxes_overlap(a_anchor, a_box, b_anchor, b_box, zoom: float) -> bool:
    """Strict overlap of two fixed pixel boxes at a given zoom."""
    dx = abs(a_anchor[0] - b_anchor[0]) * zoom
    dy = abs(a_anchor[1] - b_anchor[1]) * zoom
    return dx < (a_box[0] + b_box[0]) / 2 and dy < (a_box[1] + b_box[1]) / 2


def plan(candidates, z_lo: float, z_hi: float) -> LabelPlan:
    """Assign a minimum zoom to each candidate, higher priority first.

    For each pair the planner finds the first grid zoom at which the boxes
    no longer overlap; the later (lower-priority) label must wait for that
    zoom unless the earlier one is itself deferred past it. A label whose
    box never clears some always-earlier label gets min_zoom = +inf.
    """
    grid = zoom_grid(z_lo, z_hi)
    G = len(grid)

    order = sorted(
        candidates,
        key=lambda c: (-c.priority, c.anchor[0], c.anchor[1], c.text),
    )
    if not order:
        return LabelPlan(z_lo, z_hi, [])

    ax = np.array([c.anchor[0] for c in order])
    ay = np.array([c.anchor[1] for c in order])
    hw = np.array([c.box[0] for c in order]) / 2.0
    hh = np.array([c.box[1] for c in order]) / 2.0

    NEVER = G  # grid index meaning "past the planned range"
    min_idx = np.empty(len(order), dtype=np.int64)

    for i, cand in enumerate(order):
        if i == 0:
            min_idx[0] = 0
            continue
        dx = np.abs(ax[:i] - ax[i])
        dy = np.abs(ay[:i] - ay[i])
        sx = hw[:i] + hw[i]
        sy = hh[:i] + hh[i]
        # overlap[g, j], monotone false-ward in g; count of overlapping
        # zooms = first overlap-free grid index
        overlap = (np.outer(grid, dx) < sx) & (np.outer(grid, dy) < sy)
        sep_idx = overlap.sum(axis=0)
        binding = min_idx[:i] < sep_idx
        required = int(sep_idx[binding].max()) if binding.any() else 0
        min_idx[i] = required

    labels = [
        PlannedLabel(
            anchor=c.anchor,
            text=c.text,
            priority=c.priority,
            box=c.box,
            min_zoom=float(grid[k]) if k < G else math.inf,
        )
        for c, k in zip(order, min_idx)
    ]
    return LabelPlan(float(z_lo), float(z_hi), labels)


@dataclass
class LabelPlacement:
    label: PlannedLabel
    screen_x: float
    screen_y: float


def visible(plan_: LabelPlan, center, zoom: float, width: float, height: float):
    """Labels shown for a viewport: min_zoom filter plus an anchor test
    against the viewport expanded by one box extent.

    Zoom is clamped into the planned range; screen y points down.
    """
    z = min(max(zoom, plan_.z_lo), plan_.z_hi)
    cx, cy = center
    out = []
    for lab in plan_.labels:
        if not lab.min_zoom <= z:
            continue
        ax_, ay_ = lab.anchor
        w, h = lab.box
        half_w = (width / 2 + w) / z
        half_h = (height / 2 + h) / z
        if not (cx - half_w <= ax_ <= cx + half_w and cy - half_h <= ay_ <= cy + half_h):
            continue
        out.append(
            LabelPlacement(
                lab,
                screen_x=(ax_ - cx) * z + width / 2,
                screen_y=height / 2 - (ay_ - cy) * z,
            )
        )
    return out
