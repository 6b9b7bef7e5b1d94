/** Sidebar charts: one histogram/bar chart per column, brushable.
 * Total marks draw muted behind the filtered marks; each chart's own brush
 * posts a predicate under the chart's view id, and the chart refetches
 * with that view id so it never filters itself. */

import { ApiClient } from "./api.js";
import { interval, member, validity } from "./predicate.js";
import { Store } from "./state.js";
import type { ColumnInfo, Histogram, Predicate } from "./types.js";

export function chartViewId(column: string): string {
  return `chart:${column}`;
}

/** Numeric brush [lo, hi] to an interval predicate (closed both ends). */
export function brushToPredicate(column: string, lo: number, hi: number): Predicate {
  return interval(column, Math.min(lo, hi), Math.max(lo, hi));
}

/** Toggle a category in the current member selection; empty set clears. */
export function toggleCategory(
  current: Predicate | undefined,
  column: string,
  value: string,
): Predicate | null {
  const values = new Set(
    current && current.type === "member" ? current.values : [],
  );
  if (values.has(value)) {
    values.delete(value);
  } else {
    values.add(value);
  }
  return values.size ? member(column, values) : null;
}

const BAR_LIMIT = 18;

export class ColumnChart {
  readonly viewId: string;
  private hist: Histogram | null = null;
  private canvas: HTMLCanvasElement;
  private countEl: HTMLElement;
  private brushStart: number | null = null;

  constructor(
    root: HTMLElement,
    private api: ApiClient,
    private store: Store,
    readonly column: ColumnInfo,
  ) {
    this.viewId = chartViewId(column.name);
    const title = document.createElement("div");
    title.className = "ev-chart-title";
    title.textContent = column.name;
    this.countEl = document.createElement("span");
    this.countEl.className = "ev-chart-counts";
    title.appendChild(this.countEl);
    root.appendChild(title);
    this.appendInvalidBadges(title);
    this.canvas = document.createElement("canvas");
    this.canvas.width = 240;
    this.canvas.height = 80;
    root.appendChild(this.canvas);
    this.bindBrush();
  }

  private appendInvalidBadges(title: HTMLElement): void {
    const s = this.column.stats;
    for (const klass of ["null", "nan", "inf"] as const) {
      const count = s[`${klass}_count`];
      if (!count) continue;
      const badge = document.createElement("button");
      badge.className = "ev-badge";
      badge.textContent = `${klass}: ${count}`;
      badge.addEventListener("click", () => {
        void this.api
          .setSelection(this.viewId, validity(this.column.name, klass))
          .then((rev) =>
            this.store.setSelectionLocal(
              this.viewId, validity(this.column.name, klass), rev,
            ),
          );
      });
      title.appendChild(badge);
    }
  }

  async refresh(): Promise<void> {
    const { revision, value } = await this.api.histogram(
      this.column.name, this.viewId,
    );
    if (!this.store.acceptResponse(revision)) return;
    this.hist = value;
    this.draw();
  }

  draw(): void {
    const h = this.hist;
    if (!h) return;
    const ctx = this.canvas.getContext("2d");
    if (!ctx) return;
    const { width, height } = this.canvas;
    ctx.clearRect(0, 0, width, height);
    const n = Math.min(h.totals.length, h.kind === "categorical" ? BAR_LIMIT : 64);
    if (n === 0) return;
    const peak = Math.max(...h.totals, 1);
    const bw = width / n;
    const filtered = h.counts.reduce((a, b) => a + b, 0);
    const total = h.totals.reduce((a, b) => a + b, 0);
    this.countEl.textContent = ` ${filtered.toLocaleString()} of ${total.toLocaleString()}`;
    for (let i = 0; i < n; i++) {
      const totalH = (h.totals[i] / peak) * (height - 4);
      const countH = (h.counts[i] / peak) * (height - 4);
      ctx.fillStyle = "#d0d7de";
      ctx.fillRect(i * bw + 1, height - totalH, bw - 2, totalH);
      ctx.fillStyle = "#1f77b4";
      ctx.fillRect(i * bw + 1, height - countH, bw - 2, countH);
    }
  }

  private bindBrush(): void {
    this.canvas.addEventListener("pointerdown", (ev) => {
      this.brushStart = ev.offsetX;
    });
    this.canvas.addEventListener("pointerup", (ev) => {
      const start = this.brushStart;
      this.brushStart = null;
      const h = this.hist;
      if (start === null || !h) return;
      void this.commitBrush(h, start, ev.offsetX);
    });
  }

  private async commitBrush(h: Histogram, pxA: number, pxB: number): Promise<void> {
    let pred: Predicate | null = null;
    if (h.kind === "numerical" && h.edges && h.edges.length > 1) {
      const lo = this.pxToValue(h, Math.min(pxA, pxB));
      const hi = this.pxToValue(h, Math.max(pxA, pxB));
      pred = Math.abs(pxA - pxB) < 3 ? null : brushToPredicate(this.column.name, lo, hi);
    } else if (h.kind === "categorical" && h.categories) {
      const n = Math.min(h.totals.length, BAR_LIMIT);
      const idx = Math.min(Math.floor(pxA / (this.canvas.width / n)), n - 1);
      const current = this.store.state.selections[this.viewId];
      pred = toggleCategory(current, this.column.name, h.categories[idx]);
    }
    const rev = await this.api.setSelection(this.viewId, pred);
    this.store.setSelectionLocal(this.viewId, pred, rev);
  }

  private pxToValue(h: Histogram, px: number): number {
    const edges = h.edges!;
    const t = Math.min(Math.max(px / this.canvas.width, 0), 1);
    return edges[0] + t * (edges[edges.length - 1] - edges[0]);
  }
}

export function buildSidebar(
  root: HTMLElement,
  api: ApiClient,
  store: Store,
  columns: ColumnInfo[],
): ColumnChart[] {
  const charts: ColumnChart[] = [];
  for (const col of columns) {
    if (col.dtype !== "numerical" && col.dtype !== "categorical"
        && col.dtype !== "multi_categorical") {
      continue;
    }
    const holder = document.createElement("div");
    holder.className = "ev-chart";
    root.appendChild(holder);
    charts.push(new ColumnChart(holder, api, store, col));
  }
  return charts;
}
