/** Pan/zoom transform shared by the embedding view and label overlay.
 * Screen y points down; zoom is pixels per data unit. */

export interface Viewport {
  cx: number;
  cy: number;
  zoom: number;
  width: number;
  height: number;
}

export function dataToScreen(vp: Viewport, x: number, y: number): [number, number] {
  return [
    (x - vp.cx) * vp.zoom + vp.width / 2,
    vp.height / 2 - (y - vp.cy) * vp.zoom,
  ];
}

export function screenToData(vp: Viewport, sx: number, sy: number): [number, number] {
  return [
    (sx - vp.width / 2) / vp.zoom + vp.cx,
    vp.cy - (sy - vp.height / 2) / vp.zoom,
  ];
}

export function dataBounds(vp: Viewport): [number, number, number, number] {
  const hx = vp.width / (2 * vp.zoom);
  const hy = vp.height / (2 * vp.zoom);
  return [vp.cx - hx, vp.cx + hx, vp.cy - hy, vp.cy + hy];
}

/** Zoom about a fixed screen point (wheel target stays put). */
export function zoomAround(vp: Viewport, sx: number, sy: number, factor: number): Viewport {
  const [dx, dy] = screenToData(vp, sx, sy);
  const zoom = vp.zoom * factor;
  return {
    ...vp,
    zoom,
    cx: dx - (sx - vp.width / 2) / zoom,
    cy: dy + (sy - vp.height / 2) / zoom,
  };
}

export function panBy(vp: Viewport, dxPx: number, dyPx: number): Viewport {
  return {
    ...vp,
    cx: vp.cx - dxPx / vp.zoom,
    cy: vp.cy + dyPx / vp.zoom,
  };
}

/** Zoom that fits an extent into a viewport with a small margin. */
export function fitZoom(
  extent: [number, number, number, number],
  width: number,
  height: number,
  margin = 0.95,
): number {
  const [x0, x1, y0, y1] = extent;
  return margin * Math.min(width / (x1 - x0), height / (y1 - y0));
}
