/** Embedding view: canvas scatter with OIT compositing, pan/zoom, lasso
 * and rectangle selection, density mode, and the label overlay. */

import { ApiClient } from "./api.js";
import { tileDensityAt } from "./decode.js";
import { visibleLabels } from "./labels.js";
import { CATEGORY_PALETTE, createPlanes, resolve, splatDisc } from "./oit.js";
import { polygon, rect } from "./predicate.js";
import { Store } from "./state.js";
import type { LabelPlanJson, PointRecord, Schema } from "./types.js";
import { dataToScreen, panBy, screenToData, zoomAround } from "./viewport.js";

export const EMBEDDING_VIEW_ID = "embedding";

const POINT_RADIUS = 2.0;
const POINT_ALPHA = 0.7;
const LOD_LIMIT = 200_000;

type Gesture =
  | { kind: "pan"; lastX: number; lastY: number }
  | { kind: "lasso"; path: [number, number][] }
  | { kind: "rect"; x0: number; y0: number; x1: number; y1: number };

export class EmbeddingView {
  private ctx: CanvasRenderingContext2D;
  private pointCache: PointRecord[] = [];
  private labelPlan: LabelPlanJson | null = null;
  private gesture: Gesture | null = null;
  private densityFrame: ImageData | null = null;

  constructor(
    private canvas: HTMLCanvasElement,
    private api: ApiClient,
    private store: Store,
    private schema: Schema,
  ) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("2d canvas unavailable");
    this.ctx = ctx;
    this.bindGestures();
  }

  async load(): Promise<void> {
    this.pointCache = await this.api.points({
      limit: LOD_LIMIT,
      view: EMBEDDING_VIEW_ID,
    });
    try {
      this.labelPlan = await this.api.labels();
    } catch {
      this.labelPlan = null; // artifacts not computed yet
    }
    if (this.store.state.mode === "density") {
      await this.loadDensity();
    }
    this.draw();
  }

  async loadDensity(): Promise<void> {
    const vp = this.store.state.viewport;
    // grid at half the viewport resolution: density is smooth
    const tile = await this.api.densityTile({
      nx: Math.max(unsignedHalf(vp.width), 32),
      ny: Math.max(unsignedHalf(vp.height), 32),
      sigma: 8.0,
      view: EMBEDDING_VIEW_ID,
    });
    const frame = this.ctx.createImageData(vp.width, vp.height);
    let peak = 0;
    const sorted = Float32Array.from(tile.grid).sort();
    const positive = sorted.filter((v) => v > 0);
    peak = positive.length
      ? positive[Math.min(Math.floor(positive.length * 0.95), positive.length - 1)]
      : 1;
    for (let py = 0; py < vp.height; py++) {
      for (let px = 0; px < vp.width; px++) {
        const [dx, dy] = screenToData(vp, px + 0.5, py + 0.5);
        const d = tileDensityAt(tile, dx, dy);
        const a = Math.min(d / peak, 1) * 0.85;
        const o = (py * vp.width + px) * 4;
        const [r, g, b] = CATEGORY_PALETTE[0];
        frame.data[o] = 255 * (r * a + 1 - a);
        frame.data[o + 1] = 255 * (g * a + 1 - a);
        frame.data[o + 2] = 255 * (b * a + 1 - a);
        frame.data[o + 3] = 255;
      }
    }
    this.densityFrame = frame;
  }

  draw(): void {
    const vp = this.store.state.viewport;
    this.canvas.width = vp.width;
    this.canvas.height = vp.height;

    if (this.store.state.mode === "density" && this.densityFrame) {
      this.ctx.putImageData(this.densityFrame, 0, 0);
    } else {
      const planes = createPlanes(vp.width, vp.height);
      for (const p of this.pointCache) {
        const [sx, sy] = dataToScreen(vp, p.x, p.y);
        const color = p.cat >= 0
          ? CATEGORY_PALETTE[p.cat % CATEGORY_PALETTE.length]
          : CATEGORY_PALETTE[0];
        splatDisc(planes, sx, sy, POINT_RADIUS, POINT_ALPHA,
                  color[0], color[1], color[2]);
      }
      const rgba = resolve(planes, [1, 1, 1]);
      this.ctx.putImageData(new ImageData(rgba, vp.width, vp.height), 0, 0);
    }

    this.drawLabels();
    this.drawGesture();
  }

  private drawLabels(): void {
    if (!this.labelPlan) return;
    const vp = this.store.state.viewport;
    this.ctx.font = "12px sans-serif";
    this.ctx.textAlign = "center";
    this.ctx.textBaseline = "middle";
    for (const place of visibleLabels(this.labelPlan, vp)) {
      this.ctx.fillStyle = "rgba(255,255,255,0.75)";
      const [w, h] = place.label.box;
      this.ctx.fillRect(place.screenX - w / 2, place.screenY - h / 2, w, h);
      this.ctx.fillStyle = "#222";
      this.ctx.fillText(place.label.text, place.screenX, place.screenY);
    }
  }

  private drawGesture(): void {
    if (!this.gesture) return;
    this.ctx.strokeStyle = "#1f77b4";
    this.ctx.setLineDash([4, 3]);
    if (this.gesture.kind === "rect") {
      const g = this.gesture;
      this.ctx.strokeRect(g.x0, g.y0, g.x1 - g.x0, g.y1 - g.y0);
    } else if (this.gesture.kind === "lasso" && this.gesture.path.length > 1) {
      this.ctx.beginPath();
      const [x0, y0] = this.gesture.path[0];
      this.ctx.moveTo(x0, y0);
      for (const [x, y] of this.gesture.path.slice(1)) this.ctx.lineTo(x, y);
      this.ctx.stroke();
    }
    this.ctx.setLineDash([]);
  }

  private bindGestures(): void {
    this.canvas.addEventListener("wheel", (ev) => {
      ev.preventDefault();
      const factor = Math.pow(2, -ev.deltaY / 480);
      this.store.update({
        viewport: zoomAround(
          this.store.state.viewport, ev.offsetX, ev.offsetY, factor,
        ),
      });
      this.draw();
      if (this.store.state.mode === "density") {
        void this.loadDensity().then(() => this.draw());
      }
    });

    this.canvas.addEventListener("pointerdown", (ev) => {
      this.canvas.setPointerCapture(ev.pointerId);
      if (ev.shiftKey) {
        this.gesture = {
          kind: "rect", x0: ev.offsetX, y0: ev.offsetY,
          x1: ev.offsetX, y1: ev.offsetY,
        };
      } else if (ev.altKey) {
        this.gesture = { kind: "lasso", path: [[ev.offsetX, ev.offsetY]] };
      } else {
        this.gesture = { kind: "pan", lastX: ev.offsetX, lastY: ev.offsetY };
      }
    });

    this.canvas.addEventListener("pointermove", (ev) => {
      const g = this.gesture;
      if (!g) return;
      if (g.kind === "pan") {
        this.store.update({
          viewport: panBy(
            this.store.state.viewport, ev.offsetX - g.lastX, ev.offsetY - g.lastY,
          ),
        });
        g.lastX = ev.offsetX;
        g.lastY = ev.offsetY;
      } else if (g.kind === "rect") {
        g.x1 = ev.offsetX;
        g.y1 = ev.offsetY;
      } else {
        g.path.push([ev.offsetX, ev.offsetY]);
      }
      this.draw();
    });

    this.canvas.addEventListener("pointerup", () => {
      const g = this.gesture;
      this.gesture = null;
      if (!g || g.kind === "pan") return void this.draw();
      void this.commitSelection(g).then(() => this.draw());
    });
  }

  private async commitSelection(g: Gesture): Promise<void> {
    const { x, y } = this.schema.config;
    if (!x || !y) return;
    const vp = this.store.state.viewport;
    if (g.kind === "rect") {
      const [dx0, dy0] = screenToData(vp, Math.min(g.x0, g.x1), Math.max(g.y0, g.y1));
      const [dx1, dy1] = screenToData(vp, Math.max(g.x0, g.x1), Math.min(g.y0, g.y1));
      const pred = rect(x, y, dx0, dx1, dy0, dy1);
      const rev = await this.api.setSelection(EMBEDDING_VIEW_ID, pred);
      this.store.setSelectionLocal(EMBEDDING_VIEW_ID, pred, rev);
    } else if (g.kind === "lasso" && g.path.length >= 3) {
      const pts = g.path.map(([sx, sy]) => screenToData(vp, sx, sy));
      const pred = polygon(x, y, pts);
      const rev = await this.api.setSelection(EMBEDDING_VIEW_ID, pred);
      this.store.setSelectionLocal(EMBEDDING_VIEW_ID, pred, rev);
    }
  }
}

function unsignedHalf(v: number): number {
  return Math.max(Math.floor(v / 2), 1);
}
