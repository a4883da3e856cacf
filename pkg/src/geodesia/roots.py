"""Polynomials in one variable and sign-change root isolation.

Coefficients are stored lowest degree first. Roots are bracketed with
interval bounds of the Taylor expansion at each sub-interval midpoint and
refined by bisection.
"""
from __future__ import annotations

import math

Poly = list


def padd(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0.0) + (b[i] if i < len(b) else 0.0) for i in range(n)]


def psub(a: Poly, b: Poly) -> Poly:
    n = max(len(a), len(b))
    return [(a[i] if i < len(a) else 0.0) - (b[i] if i < len(b) else 0.0) for i in range(n)]


def pmul(a: Poly, b: Poly) -> Poly:
    out = [0.0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x == 0.0:
            continue
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def pscale(a: Poly, k: float) -> Poly:
    return [x * k for x in a]


def peval(a: Poly, x: float) -> float:
    r = 0.0
    for c in reversed(a):
        r = r * x + c
    return r


def pderiv(a: Poly) -> Poly:
    return [i * a[i] for i in range(1, len(a))] or [0.0]


def ptaylor(a: Poly, m: float) -> Poly:
    """Coefficients of a(m + t) in t."""
    c = list(a)
    n = len(c)
    for i in range(n):
        for j in range(n - 2, i - 1, -1):
            c[j] += m * c[j + 1]
    return c


def _range(a: Poly, m: float, h: float):
    c = ptaylor(a, m)
    spread = 0.0
    hp = 1.0
    for k in range(1, len(c)):
        hp *= h
        spread += abs(c[k]) * hp
    return c[0] - spread, c[0] + spread


def _bisect(a: Poly, lo: float, hi: float, flo: float, tol: float) -> float:
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        fm = peval(a, mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def sign_changes(a: Poly, lo: float, hi: float, tol: float = 1e-12, min_width: float = 1e-13):
    """Roots in [lo, hi] where the polynomial changes sign, as (root, direction).

    Direction is +1 for a crossing from negative to positive and -1 for the
    reverse. Even-multiplicity touches are not reported.
    """
    while len(a) > 1 and a[-1] == 0.0:
        a = a[:-1]
    if len(a) <= 1:
        return []
    scale = max(abs(x) for x in a)
    if scale == 0.0:
        return []
    a = [x / scale for x in a]
    da = pderiv(a)
    out = []
    stack = [(lo, hi, peval(a, lo), peval(a, hi))]
    while stack:
        x0, x1, f0, f1 = stack.pop()
        m, h = 0.5 * (x0 + x1), 0.5 * (x1 - x0)
        rlo, rhi = _range(a, m, h)
        if rlo > 0.0 or rhi < 0.0:
            continue
        dlo, dhi = _range(da, m, h)
        if dlo > 0.0 or dhi < 0.0 or h < min_width:
            if (f0 > 0.0 and f1 < 0.0) or (f0 < 0.0 and f1 > 0.0):
                r = _bisect(a, x0, x1, f0, tol)
                out.append((r, 1 if f1 > 0 else -1))
            continue
        fm = peval(a, m)
        # right half first so that the stack yields roots in increasing order
        stack.append((m, x1, fm, f1))
        stack.append((x0, m, f0, fm))
    out.sort()
    return out


def first_descent(a: Poly, lo: float, hi: float, tol: float = 1e-12):
    """Smallest root in [lo, hi] where the polynomial goes from positive to negative."""
    for r, d in sign_changes(a, lo, hi, tol):
        if d < 0:
            return r
    return None


def affine_sq(ax: Poly, ay: Poly) -> Poly:
    return padd(pmul(ax, ax), pmul(ay, ay))


def is_finite(a: Poly) -> bool:
    return all(math.isfinite(x) for x in a)
