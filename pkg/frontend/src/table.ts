/** Virtualized table: only the visible row window is materialized.
 * The window math is pure so it can be tested without a DOM. */

export interface WindowSpec {
  /** first row index to materialize (includes overscan) */
  start: number;
  /** number of rows to materialize */
  count: number;
  /** pixel offset of the materialized block from the top */
  offsetPx: number;
  /** total scrollable height in pixels */
  totalPx: number;
}

export function computeWindow(
  scrollTop: number,
  viewportPx: number,
  rowPx: number,
  totalRows: number,
  overscan = 5,
): WindowSpec {
  const first = Math.min(
    Math.floor(Math.max(scrollTop, 0) / rowPx),
    Math.max(totalRows - 1, 0),
  );
  const visible = Math.ceil(viewportPx / rowPx) + 1;
  const start = Math.max(first - overscan, 0);
  const end = Math.min(first + visible + overscan, totalRows);
  return {
    start,
    count: Math.max(end - start, 0),
    offsetPx: start * rowPx,
    totalPx: totalRows * rowPx,
  };
}

export interface TableHost {
  fetchRows(offset: number, limit: number): Promise<{
    total: number;
    rows: Record<string, unknown>[];
  }>;
  onRowClick?(row: Record<string, unknown>): void;
}

const ROW_PX = 24;

/** Minimal DOM binding around computeWindow; row fetches are cached per
 * window and invalidated by reset() on revision changes. */
export class VirtualTable {
  private total = 0;
  private cache = new Map<number, Record<string, unknown>[]>();
  private body: HTMLElement;
  private spacer: HTMLElement;

  constructor(
    private root: HTMLElement,
    private columns: string[],
    private host: TableHost,
  ) {
    this.root.classList.add("ev-table");
    this.root.style.overflowY = "auto";
    this.spacer = document.createElement("div");
    this.spacer.style.position = "relative";
    this.body = document.createElement("div");
    this.body.style.position = "absolute";
    this.body.style.left = "0";
    this.body.style.right = "0";
    this.spacer.appendChild(this.body);
    this.root.appendChild(this.spacer);
    this.root.addEventListener("scroll", () => void this.render());
  }

  async reset(): Promise<void> {
    this.cache.clear();
    await this.render();
  }

  async render(): Promise<void> {
    const probe = await this.fetchWindow(0, 1);
    this.total = probe.total;
    const win = computeWindow(
      this.root.scrollTop, this.root.clientHeight || 400, ROW_PX, this.total,
    );
    this.spacer.style.height = `${win.totalPx}px`;
    this.body.style.top = `${win.offsetPx}px`;
    const page = await this.fetchWindow(win.start, win.count);
    this.body.replaceChildren();
    if (this.total === 0) {
      const empty = document.createElement("div");
      empty.className = "ev-empty";
      empty.textContent = "no rows match the current selection";
      this.body.appendChild(empty);
      return;
    }
    for (const row of page.rows) {
      const el = document.createElement("div");
      el.className = "ev-row";
      el.style.height = `${ROW_PX}px`;
      el.textContent = this.columns.map((c) => String(row[c] ?? "")).join(" | ");
      el.addEventListener("click", () => this.host.onRowClick?.(row));
      this.body.appendChild(el);
    }
  }

  private async fetchWindow(offset: number, limit: number) {
    const key = offset * 1e9 + limit;
    const hit = this.cache.get(key);
    if (hit) return { total: this.total, rows: hit };
    const page = await this.host.fetchRows(offset, limit);
    this.cache.set(key, page.rows);
    this.total = page.total;
    return page;
  }
}
