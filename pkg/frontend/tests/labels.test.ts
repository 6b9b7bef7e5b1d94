import { describe, expect, it } from "vitest";

import {
  anchorInExpandedView,
  boxesOverlap,
  eligibleByZoom,
  visibleLabels,
} from "../src/labels.js";
import type { LabelPlanJson, PlannedLabel } from "../src/types.js";

function mkLabel(
  anchor: [number, number], minZoom: number | null, text = "t",
): PlannedLabel {
  return { anchor, text, priority: 1, box: [60, 16], min_zoom: minZoom };
}

const plan: LabelPlanJson = {
  z_lo: 1,
  z_hi: 256,
  labels: [
    mkLabel([0, 0], 1, "a"),
    mkLabel([0.5, 0.2], 4, "b"),
    mkLabel([-0.4, 0.4], 32, "c"),
    mkLabel([0.1, -0.6], null, "never"),
  ],
};

describe("label visibility", () => {
  it("filters by min_zoom with clamping", () => {
    expect(eligibleByZoom(plan, 1).map((l) => l.text)).toEqual(["a"]);
    expect(eligibleByZoom(plan, 10).map((l) => l.text)).toEqual(["a", "b"]);
    // above z_hi clamps: everything with finite min_zoom shows
    expect(eligibleByZoom(plan, 1e9).map((l) => l.text)).toEqual(["a", "b", "c"]);
    // below z_lo clamps up to z_lo
    expect(eligibleByZoom(plan, 0.01).map((l) => l.text)).toEqual(["a"]);
  });

  it("null min_zoom never shows", () => {
    expect(eligibleByZoom(plan, 1e12).some((l) => l.text === "never")).toBe(false);
  });

  it("zooming in on a fixed center never removes an in-view label", () => {
    const center = { cx: 0, cy: 0, width: 800, height: 600 };
    let prev = new Set<string>();
    for (let step = 0; step < 20; step++) {
      const zoom = 1 * Math.pow(1.35, step);
      const vp = { ...center, zoom };
      const cur = new Set(visibleLabels(plan, vp).map((p) => p.label.text));
      for (const text of prev) {
        const label = plan.labels.find((l) => l.text === text)!;
        const stillInView = anchorInExpandedView(
          label, { ...vp, zoom: Math.min(Math.max(zoom, 1), 256) },
          Math.min(Math.max(zoom, 1), 256),
        );
        if (stillInView) {
          expect(cur.has(text), `label ${text} popped at step ${step}`).toBe(true);
        }
      }
      prev = cur;
    }
  });

  it("with an unbounded canvas the visible set only grows", () => {
    const huge = { cx: 0, cy: 0, width: 1e9, height: 1e9 };
    let prev = new Set<string>();
    for (let step = 0; step < 20; step++) {
      const cur = new Set(
        visibleLabels(plan, { ...huge, zoom: Math.pow(1.35, step) })
          .map((p) => p.label.text),
      );
      for (const t of prev) expect(cur.has(t)).toBe(true);
      prev = cur;
    }
  });

  it("screen placement follows the y-down transform", () => {
    const got = visibleLabels(plan, { cx: 0, cy: 0, zoom: 10, width: 400, height: 300 });
    const a = got.find((p) => p.label.text === "a")!;
    expect(a.screenX).toBe(200);
    expect(a.screenY).toBe(150);
  });

  it("overlap test is strict and symmetric", () => {
    const a = mkLabel([0, 0], 1);
    const b = mkLabel([1, 0], 1);
    // boxes 60px wide: separate once 1.0 * zoom >= 60
    expect(boxesOverlap(a, b, 59.9)).toBe(true);
    expect(boxesOverlap(a, b, 60.0)).toBe(false);
    expect(boxesOverlap(b, a, 59.9)).toBe(true);
  });
});
