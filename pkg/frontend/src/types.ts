/** Wire types mirroring the service's documented JSON contracts. */

export type Dtype =
  | "numerical"
  | "categorical"
  | "multi_categorical"
  | "text"
  | "vector";

export interface ColumnStats {
  valid_count: number;
  null_count: number;
  nan_count: number;
  inf_count: number;
  min?: number;
  max?: number;
  distinct_count?: number;
  dimensionality?: number;
}

export interface ColumnInfo {
  name: string;
  dtype: Dtype;
  stats: ColumnStats;
}

export interface Schema {
  row_count: number;
  columns: ColumnInfo[];
  config: {
    x: string | null;
    y: string | null;
    text: string | null;
    vector: string | null;
    category: string | null;
  };
  extent: [number, number, number, number];
  revision: number;
}

/** Tagged-union predicate encoding (version 1). */
export type Predicate =
  | { type: "all" }
  | { type: "interval"; column: string; lo: number; hi: number; closed: [boolean, boolean] }
  | { type: "member"; column: string; values: string[] }
  | { type: "rect"; x: string; y: string; x0: number; x1: number; y0: number; y1: number }
  | { type: "polygon"; x: string; y: string; points: [number, number][] }
  | { type: "validity"; column: string; class: "null" | "nan" | "inf" }
  | { type: "and"; children: Predicate[] }
  | { type: "or"; children: Predicate[] }
  | { type: "not"; child: Predicate };

export interface Histogram {
  kind: "numerical" | "categorical";
  counts: number[];
  totals: number[];
  edges?: number[];
  categories?: string[];
  codes?: number[];
  scale_hint: "linear" | "log";
}

export interface BoxGroup {
  group: string | null;
  stats: {
    q1: number;
    median: number;
    q3: number;
    whisker_lo: number;
    whisker_hi: number;
    outlier_count: number;
  };
}

export interface PlannedLabel {
  anchor: [number, number];
  text: string;
  priority: number;
  box: [number, number];
  /** null means "never shown" */
  min_zoom: number | null;
}

export interface LabelPlanJson {
  z_lo: number;
  z_hi: number;
  labels: PlannedLabel[];
  revision?: number;
}

export interface Neighbor {
  row: number;
  distance: number;
}

export interface PointRecord {
  id: number;
  x: number;
  y: number;
  cat: number;
}

export interface DensityTile {
  nx: number;
  ny: number;
  extent: [number, number, number, number];
  sigma: number;
  totalWeight: number;
  /** row-major (ny rows by nx columns), row index = y cell */
  grid: Float32Array;
}

export interface RowsPage {
  revision: number;
  total: number;
  offset: number;
  rows: Record<string, unknown>[];
}
