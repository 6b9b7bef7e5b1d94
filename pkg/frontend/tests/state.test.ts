import { describe, expect, it } from "vitest";

import { initialState, Store } from "../src/state.js";
import { member } from "../src/predicate.js";

const vp = { cx: 0, cy: 0, zoom: 1, width: 100, height: 100 };

describe("revision discipline", () => {
  it("acknowledges newer revisions and drops stale responses", () => {
    const store = new Store(initialState(vp));
    expect(store.acceptResponse(3)).toBe(true);
    expect(store.state.revision).toBe(3);
    // out-of-order arrival computed against an older revision
    expect(store.acceptResponse(2)).toBe(false);
    expect(store.state.revision).toBe(3);
    // same-revision responses stay renderable
    expect(store.acceptResponse(3)).toBe(true);
  });

  it("observeRevision never regresses", () => {
    const store = new Store(initialState(vp));
    store.observeRevision(5);
    store.observeRevision(4);
    expect(store.state.revision).toBe(5);
  });

  it("selection mirror tracks set and clear", () => {
    const store = new Store(initialState(vp));
    const p = member("country", ["US"]);
    store.setSelectionLocal("chart:country", p, 1);
    expect(store.state.selections["chart:country"]).toEqual(p);
    expect(store.state.revision).toBe(1);
    store.setSelectionLocal("chart:country", null, 2);
    expect(store.state.selections["chart:country"]).toBeUndefined();
    expect(store.state.revision).toBe(2);
  });

  it("notifies subscribers and supports unsubscribe", () => {
    const store = new Store(initialState(vp));
    let calls = 0;
    const off = store.subscribe(() => calls++);
    store.update({ mode: "density" });
    off();
    store.update({ mode: "points" });
    expect(calls).toBe(1);
  });
});
