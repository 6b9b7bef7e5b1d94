"""Independent brute-force oracles shared by the unit and acceptance suites.

Everything here re-implements the contract from scratch (plain python loops,
sorted-array interpolation) so the vectorized engine is checked against a
path that shares no code with it.
"""

import math

import numpy as np

from embedview.data import INF, NAN, NULL, VALID
from embedview.query import (
    And,
    Interval,
    MatchAll,
    Member,
    Not,
    Or,
    Polygon,
    Rect,
    Validity,
)


def row_satisfies(table, p, i) -> bool:
    """Per-row predicate interpreter (no numpy vectorization)."""
    if isinstance(p, MatchAll):
        return True
    if isinstance(p, And):
        return all(row_satisfies(table, c, i) for c in p.children)
    if isinstance(p, Or):
        return any(row_satisfies(table, c, i) for c in p.children)
    if isinstance(p, Not):
        return not row_satisfies(table, p.child, i)
    if isinstance(p, Validity):
        klass = {"null": NULL, "nan": NAN, "inf": INF}[p.klass]
        return table.column(p.column).validity[i] == klass
    if isinstance(p, Interval):
        col = table.column(p.column)
        if col.validity[i] != VALID:
            return False
        v = float(col.values[i])
        lo_ok = v >= p.lo if p.closed_lo else v > p.lo
        hi_ok = v <= p.hi if p.closed_hi else v < p.hi
        return lo_ok and hi_ok
    if isinstance(p, Member):
        col = table.column(p.column)
        if col.validity[i] != VALID:
            return False
        cell = col.cell(i)
        if isinstance(cell, list):
            return any(e in p.values for e in cell)
        return cell in p.values
    if isinstance(p, Rect):
        cx, cy = table.column(p.x_column), table.column(p.y_column)
        if cx.validity[i] != VALID or cy.validity[i] != VALID:
            return False
        return (p.x0 <= cx.values[i] <= p.x1) and (p.y0 <= cy.values[i] <= p.y1)
    if isinstance(p, Polygon):
        cx, cy = table.column(p.x_column), table.column(p.y_column)
        if cx.validity[i] != VALID or cy.validity[i] != VALID:
            return False
        return point_in_polygon(float(cx.values[i]), float(cy.values[i]), p.points)
    raise AssertionError(p)


def point_in_polygon(x, y, pts):
    inside = False
    j = len(pts) - 1
    for i in range(len(pts)):
        xi, yi = pts[i]
        xj, yj = pts[j]
        if (yi > y) != (yj > y):
            xcross = xi + (y - yi) / (yj - yi) * (xj - xi)
            if x < xcross:
                inside = not inside
        j = i
    return inside


def random_predicate(rng, depth=0):
    kind = rng.integers(0, 8 if depth < 2 else 6)
    if kind == 0:
        lo, hi = sorted(rng.normal(0, 10, 2))
        return Interval("num_a", float(lo), float(hi),
                        bool(rng.random() < 0.5), bool(rng.random() < 0.5))
    if kind == 1:
        cats = [f"cat_{i}" for i in range(8)]
        pick = rng.choice(cats, size=rng.integers(1, 4), replace=False)
        return Member("cat", frozenset(str(c) for c in pick))
    if kind == 2:
        tags = [f"tag{i}" for i in range(5)]
        pick = rng.choice(tags, size=rng.integers(1, 3), replace=False)
        return Member("tags", frozenset(str(t) for t in pick))
    if kind == 3:
        x0, x1 = sorted(rng.normal(0, 10, 2))
        y0, y1 = sorted(rng.normal(0, 10, 2))
        return Rect("num_a", "num_b", float(x0), float(x1), float(y0), float(y1))
    if kind == 4:
        return Validity(
            str(rng.choice(["num_a", "num_b", "cat"])),
            str(rng.choice(["null", "nan", "inf"])),
        )
    if kind == 5:
        ang = np.sort(rng.uniform(0, 2 * math.pi, rng.integers(3, 7)))
        r = rng.uniform(3, 15)
        pts = [(r * math.cos(a), r * math.sin(a)) for a in ang]
        return Polygon("num_a", "num_b", tuple(pts))
    if kind == 6:
        return Not(random_predicate(rng, depth + 1))
    return (And if rng.random() < 0.5 else Or)(
        tuple(random_predicate(rng, depth + 1) for _ in range(rng.integers(1, 4)))
    )


def hist_oracle_numerical(values, validity, mask, lo, hi, nbins):
    totals = [0] * nbins
    counts = [0] * nbins
    for i, v in enumerate(values):
        if validity[i] != VALID:
            continue
        if v < lo or v > hi:
            continue
        k = int(math.floor((v - lo) * nbins / (hi - lo))) if hi > lo else 0
        if v == hi:
            k = nbins - 1
        totals[k] += 1
        if mask[i]:
            counts[k] += 1
    return counts, totals


def quartiles_oracle(sorted_vals, p):
    """Type-7: h = (n-1)p, linear interpolation between floor/ceil ranks."""
    n = len(sorted_vals)
    h = (n - 1) * p
    lo = int(math.floor(h))
    hi = min(lo + 1, n - 1)
    return sorted_vals[lo] + (h - lo) * (sorted_vals[hi] - sorted_vals[lo])
