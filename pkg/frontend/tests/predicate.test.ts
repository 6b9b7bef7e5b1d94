import { describe, expect, it } from "vitest";

import {
  canonicalize,
  interval,
  member,
  polygon,
  predicatesEqual,
  rect,
  validity,
} from "../src/predicate.js";
import { toggleCategory, brushToPredicate, chartViewId } from "../src/charts.js";

describe("predicate builders", () => {
  it("member sorts and dedupes values", () => {
    const p = member("country", ["US", "Italy", "US"]);
    expect(p).toEqual({ type: "member", column: "country", values: ["Italy", "US"] });
  });

  it("canonicalize recurses through boolean nodes", () => {
    const messy = {
      type: "and" as const,
      children: [
        { type: "member" as const, column: "c", values: ["b", "a", "b"] },
        { type: "not" as const, child: { type: "member" as const, column: "d", values: ["z", "y"] } },
      ],
    };
    const canon = canonicalize(messy);
    expect((canon as any).children[0].values).toEqual(["a", "b"]);
    expect((canon as any).children[1].child.values).toEqual(["y", "z"]);
  });

  it("predicatesEqual ignores member ordering", () => {
    expect(
      predicatesEqual(member("c", ["x", "y"]), member("c", ["y", "x"])),
    ).toBe(true);
    expect(predicatesEqual(member("c", ["x"]), member("c", ["y"]))).toBe(false);
  });

  it("shapes match the documented wire format", () => {
    expect(interval("v", 0, 1)).toEqual({
      type: "interval", column: "v", lo: 0, hi: 1, closed: [true, true],
    });
    expect(rect("x", "y", 0, 1, 2, 3)).toEqual({
      type: "rect", x: "x", y: "y", x0: 0, x1: 1, y0: 2, y1: 3,
    });
    expect(polygon("x", "y", [[0, 0], [1, 0], [0, 1]]).type).toBe("polygon");
    expect(validity("v", "nan")).toEqual({ type: "validity", column: "v", class: "nan" });
  });
});

describe("chart brush helpers", () => {
  it("brush swaps reversed bounds", () => {
    expect(brushToPredicate("v", 5, 2)).toEqual(interval("v", 2, 5));
  });

  it("toggleCategory builds up and tears down a member set", () => {
    const p1 = toggleCategory(undefined, "c", "US");
    expect(p1).toEqual(member("c", ["US"]));
    const p2 = toggleCategory(p1!, "c", "Italy");
    expect(p2).toEqual(member("c", ["Italy", "US"]));
    const p3 = toggleCategory(p2!, "c", "US");
    expect(p3).toEqual(member("c", ["Italy"]));
    expect(toggleCategory(p3!, "c", "Italy")).toBeNull();
  });

  it("chart view ids are namespaced per column", () => {
    expect(chartViewId("price")).toBe("chart:price");
    expect(chartViewId("a")).not.toBe(chartViewId("b"));
  });
});
