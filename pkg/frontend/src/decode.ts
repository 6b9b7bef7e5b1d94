/** Decoders for the service's little-endian binary payloads. */

import type { DensityTile, PointRecord } from "./types.js";

export const POINT_RECORD_BYTES = 16; // u32 id, f32 x, f32 y, i32 cat

export function decodePoints(buf: ArrayBuffer): PointRecord[] {
  if (buf.byteLength % POINT_RECORD_BYTES !== 0) {
    throw new Error(`point stream length ${buf.byteLength} not a record multiple`);
  }
  const view = new DataView(buf);
  const n = buf.byteLength / POINT_RECORD_BYTES;
  const out: PointRecord[] = new Array(n);
  for (let i = 0; i < n; i++) {
    const o = i * POINT_RECORD_BYTES;
    out[i] = {
      id: view.getUint32(o, true),
      x: view.getFloat32(o + 4, true),
      y: view.getFloat32(o + 8, true),
      cat: view.getInt32(o + 12, true),
    };
  }
  return out;
}

const TILE_MAGIC = 0x4c495444; // "DTIL" little-endian
const TILE_HEADER_BYTES = 4 + 4 + 4 + 4 + 8 * 4 + 4 + 4;

export function decodeDensityTile(buf: ArrayBuffer): DensityTile {
  const view = new DataView(buf);
  if (view.getUint32(0, true) !== TILE_MAGIC) {
    throw new Error("not a density tile (bad magic)");
  }
  const version = view.getUint32(4, true);
  if (version !== 1) {
    throw new Error(`unsupported tile version ${version}`);
  }
  const nx = view.getUint32(8, true);
  const ny = view.getUint32(12, true);
  const extent: [number, number, number, number] = [
    view.getFloat64(16, true),
    view.getFloat64(24, true),
    view.getFloat64(32, true),
    view.getFloat64(40, true),
  ];
  const sigma = view.getFloat32(48, true);
  const totalWeight = view.getFloat32(52, true);
  const grid = new Float32Array(buf, TILE_HEADER_BYTES, nx * ny);
  return { nx, ny, extent, sigma, totalWeight, grid };
}

/** Bilinear sample of a tile at data coordinates; 0 outside the extent. */
export function tileDensityAt(tile: DensityTile, x: number, y: number): number {
  const [x0, x1, y0, y1] = tile.extent;
  if (x < x0 || x > x1 || y < y0 || y > y1) return 0;
  const { nx, ny, grid } = tile;
  const gx = Math.min(Math.max(((x - x0) / (x1 - x0)) * nx - 0.5, 0), nx - 1);
  const gy = Math.min(Math.max(((y - y0) / (y1 - y0)) * ny - 0.5, 0), ny - 1);
  const ix = Math.min(Math.floor(gx), nx - 2);
  const iy = Math.min(Math.floor(gy), ny - 2);
  const fx = gx - ix;
  const fy = gy - iy;
  return (
    grid[iy * nx + ix] * (1 - fx) * (1 - fy) +
    grid[iy * nx + ix + 1] * fx * (1 - fy) +
    grid[(iy + 1) * nx + ix] * (1 - fx) * fy +
    grid[(iy + 1) * nx + ix + 1] * fx * fy
  );
}
