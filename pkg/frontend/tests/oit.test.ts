/** The client-side compositor must reproduce the reference renderer:
 * fixtures.json carries pixel values computed by the engine's CPU
 * rasterizer for the same scene. */

import { describe, expect, it } from "vitest";
import { readFileSync } from "node:fs";
import { join, dirname } from "node:path";
import { fileURLToPath } from "node:url";

import { CATEGORY_PALETTE, createPlanes, resolvePixel, splatDisc } from "../src/oit.js";
import { dataToScreen } from "../src/viewport.js";

const fixtures = JSON.parse(
  readFileSync(join(dirname(fileURLToPath(import.meta.url)), "fixtures.json"), "utf8"),
);

function renderFixtureScene(order: number[]) {
  const f = fixtures.oit;
  const vp = f.viewport;
  const planes = createPlanes(vp.width, vp.height);
  for (const i of order) {
    const p = f.points[i];
    const [sx, sy] = dataToScreen(
      { cx: vp.cx, cy: vp.cy, zoom: vp.zoom, width: vp.width, height: vp.height },
      p.x, p.y,
    );
    const [r, g, b] = CATEGORY_PALETTE[p.cat];
    splatDisc(planes, sx, sy, f.radius, f.alpha, r, g, b);
  }
  return planes;
}

describe("oit compositor", () => {
  it("matches the reference renderer's pixels", () => {
    const planes = renderFixtureScene([0, 1, 2]);
    for (const probe of fixtures.oit.pixels) {
      const got = resolvePixel(planes, probe.py * 64 + probe.px, [1, 1, 1]);
      for (let c = 0; c < 3; c++) {
        expect(Math.abs(got[c] - probe.rgb[c])).toBeLessThan(1e-9);
      }
    }
  });

  it("is order independent", () => {
    const a = renderFixtureScene([0, 1, 2]);
    const b = renderFixtureScene([2, 0, 1]);
    for (let pix = 0; pix < 64 * 64; pix++) {
      const pa = resolvePixel(a, pix, [1, 1, 1]);
      const pb = resolvePixel(b, pix, [1, 1, 1]);
      for (let c = 0; c < 3; c++) {
        expect(Math.abs(pa[c] - pb[c])).toBeLessThan(1e-5);
      }
    }
  });

  it("single opaque splat resolves to its own color", () => {
    const planes = createPlanes(16, 16);
    splatDisc(planes, 8.0, 8.0, 3.0, 1.0, 0.3, 0.5, 0.7);
    const got = resolvePixel(planes, 8 * 16 + 8, [1, 1, 1]);
    expect(got[0]).toBeCloseTo(0.3, 12);
    expect(got[1]).toBeCloseTo(0.5, 12);
    expect(got[2]).toBeCloseTo(0.7, 12);
  });

  it("empty planes resolve to the background", () => {
    const planes = createPlanes(4, 4);
    expect(resolvePixel(planes, 5, [0.9, 0.8, 0.7])).toEqual([0.9, 0.8, 0.7]);
  });
});
