/** Label overlay visibility: the client-side mirror of the planner's
 * `visible` query. A label shows iff the (clamped) zoom has reached its
 * min_zoom and its anchor sits inside the viewport expanded by one box
 * extent; visibility is monotone in zoom, so zooming in never pops a
 * label that stays in view. */

import type { LabelPlanJson, PlannedLabel } from "./types.js";
import type { Viewport } from "./viewport.js";
import { dataToScreen } from "./viewport.js";

export interface LabelPlacement {
  label: PlannedLabel;
  screenX: number;
  screenY: number;
}

export function clampZoom(plan: LabelPlanJson, zoom: number): number {
  return Math.min(Math.max(zoom, plan.z_lo), plan.z_hi);
}

export function eligibleByZoom(plan: LabelPlanJson, zoom: number): PlannedLabel[] {
  const z = clampZoom(plan, zoom);
  return plan.labels.filter((l) => l.min_zoom !== null && l.min_zoom <= z);
}

export function anchorInExpandedView(
  label: PlannedLabel,
  vp: Viewport,
  zoom: number,
): boolean {
  const [ax, ay] = label.anchor;
  const [w, h] = label.box;
  const halfW = (vp.width / 2 + w) / zoom;
  const halfH = (vp.height / 2 + h) / zoom;
  return (
    ax >= vp.cx - halfW && ax <= vp.cx + halfW &&
    ay >= vp.cy - halfH && ay <= vp.cy + halfH
  );
}

export function visibleLabels(plan: LabelPlanJson, vp: Viewport): LabelPlacement[] {
  const z = clampZoom(plan, vp.zoom);
  const zoomed: Viewport = { ...vp, zoom: z };
  const out: LabelPlacement[] = [];
  for (const label of eligibleByZoom(plan, vp.zoom)) {
    if (!anchorInExpandedView(label, zoomed, z)) continue;
    const [sx, sy] = dataToScreen(zoomed, label.anchor[0], label.anchor[1]);
    out.push({ label, screenX: sx, screenY: sy });
  }
  return out;
}

export function boxesOverlap(
  a: PlannedLabel, b: PlannedLabel, zoom: number,
): boolean {
  const dx = Math.abs(a.anchor[0] - b.anchor[0]) * zoom;
  const dy = Math.abs(a.anchor[1] - b.anchor[1]) * zoom;
  return dx < (a.box[0] + b.box[0]) / 2 && dy < (a.box[1] + b.box[1]) / 2;
}
