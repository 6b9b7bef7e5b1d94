/** Typed client for the embedview HTTP/WS API.
 *
 * Every JSON response carries the revision it was computed against; the
 * client exposes it so the store can discard stale responses. A 409 means
 * a request raced a selection change - callers refetch at the new
 * revision.
 */

import { decodeDensityTile, decodePoints } from "./decode.js";
import type {
  BoxGroup,
  DensityTile,
  Histogram,
  LabelPlanJson,
  Neighbor,
  PointRecord,
  Predicate,
  RowsPage,
  Schema,
} from "./types.js";

export class ApiError extends Error {
  constructor(
    public status: number,
    message: string,
  ) {
    super(message);
  }
}

export interface Revisioned<T> {
  revision: number;
  value: T;
}

async function expectOk(r: Response): Promise<Response> {
  if (!r.ok) {
    let detail = r.statusText;
    try {
      const body = await r.json();
      detail = body.error ?? JSON.stringify(body.detail ?? body);
    } catch {
      /* non-JSON error body */
    }
    throw new ApiError(r.status, detail);
  }
  return r;
}

export class ApiClient {
  constructor(
    readonly base: string = "",
    private fetchFn: typeof fetch = fetch,
  ) {}

  private async getJson(path: string): Promise<any> {
    const r = await expectOk(await this.fetchFn(this.base + path));
    return r.json();
  }

  private async postJson(path: string, body: unknown): Promise<any> {
    const r = await expectOk(
      await this.fetchFn(this.base + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
    return r.json();
  }

  schema(): Promise<Schema> {
    return this.getJson("/schema");
  }

  async histogram(
    column: string,
    view?: string,
    bins?: number,
  ): Promise<Revisioned<Histogram>> {
    const body = await this.postJson("/query/histogram", { column, view, bins });
    return { revision: body.revision, value: body.histogram };
  }

  async heatmap(
    x: string, y: string, nx: number, ny: number, view?: string,
  ): Promise<Revisioned<{ counts: number[][]; totals: number[][] }>> {
    const body = await this.postJson("/query/heatmap", { x, y, nx, ny, view });
    return { revision: body.revision, value: body.heatmap };
  }

  async boxplot(
    value: string, group?: string, view?: string,
  ): Promise<Revisioned<BoxGroup[]>> {
    const body = await this.postJson("/query/boxplot", { value, group, view });
    return { revision: body.revision, value: body.boxes };
  }

  async setSelection(view: string, predicate: Predicate | null): Promise<number> {
    const body = await this.postJson("/selection", { view, predicate });
    return body.revision;
  }

  async getSelection(): Promise<{
    revision: number;
    entries: Record<string, Predicate>;
  }> {
    const body = await this.getJson("/selection");
    return { revision: body.revision, entries: body.selection.entries };
  }

  async densityTile(opts: {
    nx?: number; ny?: number; sigma?: number;
    view?: string | null; category_value?: string;
  }): Promise<DensityTile> {
    const r = await expectOk(
      await this.fetchFn(this.base + "/density", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(opts),
      }),
    );
    return decodeDensityTile(await r.arrayBuffer());
  }

  async points(opts: {
    minx?: number; maxx?: number; miny?: number; maxy?: number;
    limit?: number; view?: string;
  } = {}): Promise<PointRecord[]> {
    const params = new URLSearchParams();
    for (const [k, v] of Object.entries(opts)) {
      if (v !== undefined) params.set(k, String(v));
    }
    const r = await expectOk(
      await this.fetchFn(this.base + "/points?" + params.toString()),
    );
    return decodePoints(await r.arrayBuffer());
  }

  async rows(offset: number, limit: number, view?: string): Promise<RowsPage> {
    const params = new URLSearchParams({
      offset: String(offset),
      limit: String(limit),
    });
    if (view !== undefined) params.set("view", view);
    return this.getJson("/rows?" + params.toString());
  }

  labels(zoom?: number): Promise<LabelPlanJson> {
    const q = zoom === undefined ? "" : `?zoom=${zoom}`;
    return this.getJson("/labels" + q);
  }

  clusters(): Promise<any> {
    return this.getJson("/clusters");
  }

  async knn2d(x: number, y: number, k: number): Promise<Neighbor[]> {
    const body = await this.postJson("/knn2d", { x, y, k });
    return body.neighbors;
  }

  async knnVec(row: number, k: number): Promise<Neighbor[]> {
    const body = await this.postJson("/knnvec", { row, k });
    return body.neighbors;
  }

  async search(query: string, limit = 50, column?: string): Promise<number[]> {
    const body = await this.postJson("/search", { query, limit, column });
    return body.rows;
  }

  exportUrl(format: "csv" | "parquet"): string {
    return `${this.base}/export?format=${format}`;
  }

  /**
   * Revision update stream: WebSocket when available, falling back to
   * polling GET /selection. Returns a stop function.
   */
  watchRevisions(onRevision: (rev: number) => void, pollMs = 1000): () => void {
    const WS: typeof WebSocket | undefined = (globalThis as any).WebSocket;
    if (WS && this.base.startsWith("http")) {
      const ws = new WS(this.base.replace(/^http/, "ws") + "/updates");
      ws.onmessage = (ev: MessageEvent) => {
        try {
          onRevision(JSON.parse(String(ev.data)).revision);
        } catch {
          /* ignore malformed frames */
        }
      };
      return () => ws.close();
    }
    const timer = setInterval(async () => {
      try {
        onRevision((await this.getSelection()).revision);
      } catch {
        /* service briefly unavailable; keep polling */
      }
    }, pollMs);
    return () => clearInterval(timer);
  }
}
