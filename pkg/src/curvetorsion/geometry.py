"""Convex polygon plumbing on the complex plane.

Polygons are tuples of complex vertices in counterclockwise order.  Half
planes are (anchor, normal) pairs meaning Re(conj(normal) * (z - anchor)) >= 0.
"""

from __future__ import annotations

import numpy as np


def halfplane_value(z, anchor: complex, normal: complex):
    """Signed distance-like value; nonnegative inside the half plane."""
    return ((z - anchor) * np.conj(normal)).real


def clip_halfplane(poly, anchor: complex, normal: complex, tol: float = 0.0):
    """Sutherland-Hodgman clip of a convex polygon against one half plane."""
    if not poly:
        return ()
    out = []
    n = len(poly)
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        fa = halfplane_value(a, anchor, normal)
        fb = halfplane_value(b, anchor, normal)
        if fa >= -tol:
            out.append(a)
            if fb < -tol:
                t = fa / (fa - fb)
                out.append(a + t * (b - a))
        elif fb >= -tol:
            t = fa / (fa - fb)
            out.append(a + t * (b - a))
    return tuple(out)


def polygon_area(poly) -> float:
    if len(poly) < 3:
        return 0.0
    v = np.asarray(poly, dtype=np.complex128)
    w = np.roll(v, -1)
    return float(0.5 * np.sum((np.conj(v) * w).imag))


def ensure_ccw(poly):
    if polygon_area(poly) < 0:
        return tuple(reversed(poly))
    return tuple(poly)


def dedupe_vertices(poly, tol: float):
    if not poly:
        return ()
    out = []
    for v in poly:
        if not out or abs(v - out[-1]) > tol:
            out.append(v)
    if len(out) > 1 and abs(out[0] - out[-1]) <= tol:
        out.pop()
    return tuple(out)


def is_convex(poly, tol: float = 0.0) -> bool:
    """All consecutive edge cross products share one sign (up to tol)."""
    n = len(poly)
    if n < 3:
        return False
    sign = 0
    for i in range(n):
        u = poly[(i + 1) % n] - poly[i]
        w = poly[(i + 2) % n] - poly[(i + 1) % n]
        cr = (np.conj(u) * w).imag
        if abs(cr) <= tol:
            continue
        s = 1 if cr > 0 else -1
        if sign == 0:
            sign = s
        elif s != sign:
            return False
    return True


def point_in_polygon(z, poly, tol: float = 0.0):
    """Membership in a CCW convex polygon; vectorized over z."""
    zz = np.asarray(z, dtype=np.complex128)
    inside = np.ones(zz.shape, dtype=bool)
    n = len(poly)
    for i in range(n):
        a = poly[i]
        b = poly[(i + 1) % n]
        edge = b - a
        inside &= ((zz - a) * np.conj(1j * edge)).real >= -tol
    return inside


def polygon_bbox(poly):
    v = np.asarray(poly, dtype=np.complex128)
    return (
        float(v.real.min()),
        float(v.real.max()),
        float(v.imag.min()),
        float(v.imag.max()),
    )


def square_polygon(center: complex, half_width: float):
    c = complex(center)
    h = float(half_width)
    return (
        c + complex(-h, -h),
        c + complex(h, -h),
        c + complex(h, h),
        c + complex(-h, h),
    )


def sample_polygon(poly, n: int, rng, max_consecutive_misses: int = 100_000):
    """Uniform points inside a convex polygon by bounding-box rejection.

    Raises ``RuntimeError`` after ``max_consecutive_misses`` straight misses;
    callers translate this into their own empty-domain error.
    """
    re0, re1, im0, im1 = polygon_bbox(poly)
    out = np.empty(n, dtype=np.complex128)
    got = 0
    misses = 0
    while got < n:
        batch = max(256, 2 * (n - got))
        re = rng.uniform(re0, re1, batch)
        im = rng.uniform(im0, im1, batch)
        z = re + 1j * im
        ok = point_in_polygon(z, poly)
        hits = z[ok]
        if hits.size == 0:
            misses += batch
            if misses >= max_consecutive_misses:
                raise RuntimeError("rejection sampling kept missing the polygon")
            continue
        misses = 0
        take = min(hits.size, n - got)
        out[got : got + take] = hits[:take]
        got += take
    return out


def minimal_arc(angles: np.ndarray):
    """Smallest circular arc covering all angles.

    Returns (aperture, idx_lo, idx_hi) where the indices point into the
    input array at the two extreme samples of the covering arc.  The cover
    is the complement of the largest gap between consecutive sorted angles.
    """
    a = np.mod(np.asarray(angles, dtype=np.float64), 2.0 * np.pi)
    n = a.size
    if n == 0:
        raise ValueError("no angles supplied")
    if n == 1:
        return 0.0, 0, 0
    order = np.argsort(a, kind="stable")
    s = a[order]
    gaps = np.diff(s, append=s[0] + 2.0 * np.pi)
    kmax = int(np.argmax(gaps))
    aperture = float(2.0 * np.pi - gaps[kmax])
    idx_lo = int(order[(kmax + 1) % n])
    idx_hi = int(order[kmax])
    return aperture, idx_lo, idx_hi


def dist_point_segment(p: complex, a: complex, b: complex) -> float:
    ab = b - a
    denom = (ab * np.conj(ab)).real
    if denom == 0.0:
        return abs(p - a)
    t = ((p - a) * np.conj(ab)).real / denom
    t = min(1.0, max(0.0, t))
    return abs(p - (a + t * ab))


def dist_point_triangle(p: complex, a: complex, b: complex, c: complex) -> float:
    """Distance from p to the (possibly degenerate) triangle hull of a, b, c."""
    cross = lambda u, v: (np.conj(u) * v).imag
    d1 = cross(b - a, p - a)
    d2 = cross(c - b, p - b)
    d3 = cross(a - c, p - c)
    if (d1 >= 0 and d2 >= 0 and d3 >= 0) or (d1 <= 0 and d2 <= 0 and d3 <= 0):
        area = abs(cross(b - a, c - a))
        span = max(abs(b - a), abs(c - b), abs(a - c), 1e-300)
        if area > 1e-14 * span * span:
            return 0.0
    return min(
        dist_point_segment(p, a, b),
        dist_point_segment(p, b, c),
        dist_point_segment(p, c, a),
    )
