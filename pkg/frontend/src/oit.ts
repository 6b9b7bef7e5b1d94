/**
 * Weighted-blended order-independent compositing, the same contract the
 * reference rasterizer implements: per pixel accumulate C += a*color,
 * A += a, revealage R *= (1 - a); resolve to
 * (C / max(A, eps)) * (1 - R) + background * R.
 * Draw order therefore cannot change the frame beyond float noise.
 */

export const OIT_EPS = 1e-6;

export interface OitPlanes {
  width: number;
  height: number;
  cr: Float64Array;
  cg: Float64Array;
  cb: Float64Array;
  aSum: Float64Array;
  rev: Float64Array;
}

export function createPlanes(width: number, height: number): OitPlanes {
  const n = width * height;
  const planes = {
    width,
    height,
    cr: new Float64Array(n),
    cg: new Float64Array(n),
    cb: new Float64Array(n),
    aSum: new Float64Array(n),
    rev: new Float64Array(n),
  };
  planes.rev.fill(1);
  return planes;
}

export function accumulate(
  planes: OitPlanes,
  pix: number,
  alpha: number,
  r: number,
  g: number,
  b: number,
): void {
  planes.cr[pix] += alpha * r;
  planes.cg[pix] += alpha * g;
  planes.cb[pix] += alpha * b;
  planes.aSum[pix] += alpha;
  planes.rev[pix] *= 1 - alpha;
}

/**
 * Splat an anti-aliased disc. Coverage per pixel is the fraction of its
 * 2x2 subsamples inside the disc, exactly like the reference renderer.
 */
export function splatDisc(
  planes: OitPlanes,
  cx: number,
  cy: number,
  radius: number,
  alpha: number,
  r: number,
  g: number,
  b: number,
): void {
  if (!Number.isFinite(cx) || !Number.isFinite(cy)) return;
  const span = Math.floor(2 * radius + 0.5) + 1;
  const bx = Math.ceil(cx - radius - 0.75);
  const by = Math.ceil(cy - radius - 0.75);
  const r2 = radius * radius;
  for (let oy = 0; oy < span; oy++) {
    const iy = by + oy;
    if (iy < 0 || iy >= planes.height) continue;
    const dya = iy + 0.25 - cy;
    const dyb = iy + 0.75 - cy;
    const dy2a = dya * dya;
    const dy2b = dyb * dyb;
    for (let ox = 0; ox < span; ox++) {
      const ix = bx + ox;
      if (ix < 0 || ix >= planes.width) continue;
      const dxa = ix + 0.25 - cx;
      const dxb = ix + 0.75 - cx;
      const dx2a = dxa * dxa;
      const dx2b = dxb * dxb;
      let hits = 0;
      if (dx2a + dy2a <= r2) hits++;
      if (dx2b + dy2a <= r2) hits++;
      if (dx2a + dy2b <= r2) hits++;
      if (dx2b + dy2b <= r2) hits++;
      if (hits === 0) continue;
      accumulate(planes, iy * planes.width + ix, alpha * hits * 0.25, r, g, b);
    }
  }
}

/** Resolve accumulated planes into RGBA bytes (premultiplied over bg). */
export function resolve(
  planes: OitPlanes,
  background: [number, number, number],
  out?: Uint8ClampedArray<ArrayBuffer>,
): Uint8ClampedArray<ArrayBuffer> {
  const n = planes.width * planes.height;
  const rgba = out ?? new Uint8ClampedArray(new ArrayBuffer(n * 4));
  for (let i = 0; i < n; i++) {
    const a = planes.aSum[i];
    const rev = planes.rev[i];
    const show = 1 - rev;
    const inv = show / Math.max(a, OIT_EPS);
    rgba[i * 4] = 255 * Math.min(Math.max(planes.cr[i] * inv + background[0] * rev, 0), 1);
    rgba[i * 4 + 1] = 255 * Math.min(Math.max(planes.cg[i] * inv + background[1] * rev, 0), 1);
    rgba[i * 4 + 2] = 255 * Math.min(Math.max(planes.cb[i] * inv + background[2] * rev, 0), 1);
    rgba[i * 4 + 3] = 255;
  }
  return rgba;
}

/** Resolve one pixel to float RGB (used by tests and tooltips). */
export function resolvePixel(
  planes: OitPlanes,
  pix: number,
  background: [number, number, number],
): [number, number, number] {
  const rev = planes.rev[pix];
  const show = 1 - rev;
  const inv = show / Math.max(planes.aSum[pix], OIT_EPS);
  return [
    Math.min(Math.max(planes.cr[pix] * inv + background[0] * rev, 0), 1),
    Math.min(Math.max(planes.cg[pix] * inv + background[1] * rev, 0), 1),
    Math.min(Math.max(planes.cb[pix] * inv + background[2] * rev, 0), 1),
  ];
}

/** Categorical palette shared with the reference renderer. */
export const CATEGORY_PALETTE: [number, number, number][] = [
  [0.121, 0.466, 0.705], [1.0, 0.498, 0.054], [0.172, 0.627, 0.172],
  [0.839, 0.152, 0.156], [0.58, 0.403, 0.741], [0.549, 0.337, 0.294],
  [0.89, 0.466, 0.76], [0.498, 0.498, 0.498], [0.737, 0.741, 0.133],
  [0.09, 0.745, 0.811],
];
