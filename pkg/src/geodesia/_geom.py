"""Small 2-D helpers on plain float tuples (faster than tiny numpy arrays)."""
from __future__ import annotations

import math

Point = tuple[float, float]


def sub(a: Point, b: Point) -> Point:
    return (a[0] - b[0], a[1] - b[1])


def add(a: Point, b: Point) -> Point:
    return (a[0] + b[0], a[1] + b[1])


def scale(a: Point, k: float) -> Point:
    return (a[0] * k, a[1] * k)


def lerp(a: Point, b: Point, t: float) -> Point:
    return (a[0] + (b[0] - a[0]) * t, a[1] + (b[1] - a[1]) * t)


def dot(a: Point, b: Point) -> float:
    return a[0] * b[0] + a[1] * b[1]


def cross(a: Point, b: Point) -> float:
    return a[0] * b[1] - a[1] * b[0]


def orient(a: Point, b: Point, c: Point) -> float:
    """Twice the signed area of abc (positive when counter-clockwise)."""
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def dist(a: Point, b: Point) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def norm(a: Point) -> float:
    return math.hypot(a[0], a[1])


def seg_point_dist(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    ll = dx * dx + dy * dy
    if ll == 0.0:
        return dist(p, a)
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / ll
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy)


def line_intersection(p: Point, q: Point, a: Point, b: Point):
    """Parameters (lam, mu) with p + lam (q-p) = a + mu (b-a), or None if parallel."""
    r = (q[0] - p[0], q[1] - p[1])
    d = (b[0] - a[0], b[1] - a[1])
    den = r[0] * d[1] - r[1] * d[0]
    if den == 0.0:
        return None
    w = (a[0] - p[0], a[1] - p[1])
    lam = (w[0] * d[1] - w[1] * d[0]) / den
    mu = (w[0] * r[1] - w[1] * r[0]) / den
    return lam, mu


def segments_cross(a: Point, b: Point, c: Point, d: Point, eps: float = 0.0) -> bool:
    """Proper crossing test (shared endpoints and touching do not count)."""
    o1 = orient(a, b, c)
    o2 = orient(a, b, d)
    o3 = orient(c, d, a)
    o4 = orient(c, d, b)
    return ((o1 > eps and o2 < -eps) or (o1 < -eps and o2 > eps)) and (
        (o3 > eps and o4 < -eps) or (o3 < -eps and o4 > eps)
    )


def polygon_area(poly) -> float:
    s = 0.0
    n = len(poly)
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def polygon_is_simple(poly, eps: float = 0.0) -> bool:
    n = len(poly)
    if n < 3:
        return False
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue
            c, d = poly[j], poly[(j + 1) % n]
            if segments_cross(a, b, c, d, eps):
                return False
    # repeated vertices also break simplicity
    seen = set()
    for p in poly:
        key = (round(p[0], 12), round(p[1], 12))
        if key in seen:
            return False
        seen.add(key)
    return True


def point_in_convex(p: Point, poly, eps: float = 0.0) -> bool:
    """Point in a counter-clockwise convex polygon (boundary included up to eps)."""
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        ll = dist(a, b)
        if ll == 0.0:
            continue
        if orient(a, b, p) / ll < -eps:
            return False
    return True


def point_in_polygon(p: Point, poly) -> bool:
    inside = False
    n = len(poly)
    x, y = p
    for i in range(n):
        x0, y0 = poly[i]
        x1, y1 = poly[(i + 1) % n]
        if (y0 > y) != (y1 > y):
            xi = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
            if xi > x:
                inside = not inside
    return inside


def circumcenter(a: Point, b: Point, c: Point):
    bx, by = b[0] - a[0], b[1] - a[1]
    cx, cy = c[0] - a[0], c[1] - a[1]
    d = 2.0 * (bx * cy - by * cx)
    if d == 0.0:
        return None
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    return (a[0] + (cy * b2 - by * c2) / d, a[1] + (bx * c2 - cx * b2) / d)


def barycentric(p: Point, a: Point, b: Point, c: Point):
    den = orient(a, b, c)
    l1 = orient(p, b, c) / den
    l2 = orient(a, p, c) / den
    return l1, l2, 1.0 - l1 - l2
