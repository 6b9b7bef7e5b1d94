/** Predicate builders and canonicalization matching the service encoding. */

import type { Predicate } from "./types.js";

export function interval(
  column: string,
  lo: number,
  hi: number,
  closed: [boolean, boolean] = [true, true],
): Predicate {
  return { type: "interval", column, lo, hi, closed };
}

export function member(column: string, values: Iterable<string>): Predicate {
  return { type: "member", column, values: [...new Set(values)].sort() };
}

export function rect(
  x: string, y: string,
  x0: number, x1: number, y0: number, y1: number,
): Predicate {
  return { type: "rect", x, y, x0, x1, y0, y1 };
}

export function polygon(
  x: string, y: string, points: [number, number][],
): Predicate {
  return { type: "polygon", x, y, points };
}

export function validity(
  column: string, klass: "null" | "nan" | "inf",
): Predicate {
  return { type: "validity", column, class: klass };
}

/**
 * Canonical form: member values sorted and deduplicated, nested members
 * normalized recursively. The server echoes selections back in this form,
 * so round-trip comparisons are string-equal after canonicalization.
 */
export function canonicalize(p: Predicate): Predicate {
  switch (p.type) {
    case "member":
      return { ...p, values: [...new Set(p.values)].sort() };
    case "and":
    case "or":
      return { ...p, children: p.children.map(canonicalize) };
    case "not":
      return { ...p, child: canonicalize(p.child) };
    default:
      return p;
  }
}

export function predicatesEqual(a: Predicate, b: Predicate): boolean {
  return JSON.stringify(canonicalize(a)) === JSON.stringify(canonicalize(b));
}
