/** App assembly: embedding view + coordinated sidebar charts + table. */

import { ApiClient } from "./api.js";
import { buildSidebar } from "./charts.js";
import { EmbeddingView } from "./scatter.js";
import { initialState, Store } from "./state.js";
import { VirtualTable } from "./table.js";
import { Tooltip } from "./tooltip.js";
import { fitZoom } from "./viewport.js";

const VIEW_W = 800;
const VIEW_H = 600;

export async function boot(root: HTMLElement, base = ""): Promise<void> {
  const api = new ApiClient(base);
  const schema = await api.schema();

  const store = new Store(initialState(
    {
      cx: (schema.extent[0] + schema.extent[1]) / 2,
      cy: (schema.extent[2] + schema.extent[3]) / 2,
      zoom: fitZoom(schema.extent, VIEW_W, VIEW_H),
      width: VIEW_W,
      height: VIEW_H,
    },
    schema.config.category,
  ));
  store.observeRevision(schema.revision);

  root.innerHTML = `
    <div class="ev-layout">
      <div class="ev-main">
        <div class="ev-toolbar">
          <button id="ev-mode">density mode</button>
          <input id="ev-search" placeholder="search text..." />
          <a id="ev-export" href="${api.exportUrl("parquet")}" download>export selection</a>
        </div>
        <div class="ev-canvas-holder" style="position:relative">
          <canvas id="ev-canvas" width="${VIEW_W}" height="${VIEW_H}"></canvas>
        </div>
        <div id="ev-table" style="height:220px"></div>
      </div>
      <div id="ev-sidebar" class="ev-sidebar"></div>
    </div>`;

  const canvas = root.querySelector<HTMLCanvasElement>("#ev-canvas")!;
  const view = new EmbeddingView(canvas, api, store, schema);
  const charts = buildSidebar(
    root.querySelector("#ev-sidebar")!, api, store, schema.columns,
  );
  const table = new VirtualTable(
    root.querySelector("#ev-table")!,
    schema.columns.map((c) => c.name),
    {
      fetchRows: async (offset, limit) => {
        const page = await api.rows(offset, limit);
        return { total: page.total, rows: page.rows };
      },
      onRowClick: (row) => {
        const x = Number(row[schema.config.x ?? ""]);
        const y = Number(row[schema.config.y ?? ""]);
        if (Number.isFinite(x) && Number.isFinite(y)) {
          store.update({ viewport: { ...store.state.viewport, cx: x, cy: y } });
          view.draw();
        }
      },
    },
  );

  const tooltip = new Tooltip(
    root.querySelector(".ev-canvas-holder")!, api,
    schema.config.vector !== null,
  );
  canvas.addEventListener("mousemove", (ev) => {
    if (ev.buttons) return;
    void tooltip.showAt(
      store.state.viewport, ev.offsetX, ev.offsetY, view["pointCache"],
    );
  });

  const modeBtn = root.querySelector<HTMLButtonElement>("#ev-mode")!;
  modeBtn.addEventListener("click", () => {
    const mode = store.state.mode === "points" ? "density" : "points";
    store.update({ mode });   // viewport untouched: toggling preserves it
    modeBtn.textContent = mode === "points" ? "density mode" : "points mode";
    void (mode === "density" ? view.loadDensity() : Promise.resolve()).then(
      () => view.draw(),
    );
  });

  const search = root.querySelector<HTMLInputElement>("#ev-search")!;
  search.addEventListener("change", () => {
    void api.search(search.value, 100).then((rows) => {
      console.log(`search "${search.value}": ${rows.length} rows`, rows.slice(0, 10));
    });
  });

  const refreshAll = async () => {
    await Promise.all([
      ...charts.map((c) => c.refresh()),
      view.load(),
      table.reset(),
    ]);
  };
  await refreshAll();

  // revision stream: any selection change anywhere refreshes every view
  api.watchRevisions((rev) => {
    if (rev > store.state.revision) {
      store.observeRevision(rev);
      void refreshAll();
    }
  });
}

declare global {
  interface Window {
    embedviewBoot: typeof boot;
  }
}

if (typeof window !== "undefined") {
  window.embedviewBoot = boot;
  const mount = document.getElementById("app");
  if (mount) {
    void boot(mount);
  }
}
