/** View state store with revision-based staleness control.
 *
 * Every asynchronous response is tagged with the revision it was computed
 * against; a response older than the newest acknowledged revision is
 * dropped, so out-of-order arrivals can never paint stale data.
 */

import type { Predicate } from "./types.js";
import type { Viewport } from "./viewport.js";

export type DisplayMode = "points" | "density";

export interface ViewState {
  viewport: Viewport;
  colorBy: string | null;
  mode: DisplayMode;
  selections: Record<string, Predicate>;
  revision: number;
}

export type Listener = (state: ViewState) => void;

export class Store {
  private listeners = new Set<Listener>();

  constructor(public state: ViewState) {}

  subscribe(fn: Listener): () => void {
    this.listeners.add(fn);
    return () => this.listeners.delete(fn);
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const fn of this.listeners) fn(this.state);
  }

  /** Acknowledge a revision observed from any response or the WS stream. */
  observeRevision(revision: number): void {
    if (revision > this.state.revision) {
      this.update({ revision });
    }
  }

  /**
   * True when a response computed at `revision` is still current and may
   * be rendered; also acknowledges newer revisions.
   */
  acceptResponse(revision: number): boolean {
    if (revision < this.state.revision) {
      return false;
    }
    this.observeRevision(revision);
    return true;
  }

  setSelectionLocal(view: string, predicate: Predicate | null, revision: number): void {
    const selections = { ...this.state.selections };
    if (predicate === null) {
      delete selections[view];
    } else {
      selections[view] = predicate;
    }
    this.update({ selections });
    this.observeRevision(revision);
  }
}

export function initialState(
  viewport: Viewport,
  colorBy: string | null = null,
): ViewState {
  return { viewport, colorBy, mode: "points", selections: {}, revision: 0 };
}
