"""Jacobian of the three-fold sum map: direct determinant and the exact
nested line-integral representation, plus the sector-containment test.

The integral form writes the Jacobian as the product of the first torsion
polynomial at the three points times a triple line integral of rational
combinations of the torsion triple along straight segments.  Segments must
stay away from zeros of L1 and L2 (the integrand divides by their squares),
which is checked before any quadrature runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from numpy.polynomial.legendre import leggauss

from .curves import CurveGamma, TorsionTriple, torsion_triple
from .decomposition import Region
from .errors import AllSamplesZero, NonConvergence, SegmentHitsSingularity
from .geometry import dist_point_triangle, minimal_arc
from .polynomials import roots


class Triple(NamedTuple):
    """Three sample points in the plane."""

    z1: complex
    z2: complex
    z3: complex


@dataclass(frozen=True)
class QuadratureSpec:
    """Gauss-Legendre node count per segment (the only scheme offered)."""

    nodes_per_segment: int = 16
    scheme: str = "GaussLegendre"

    def __post_init__(self):
        if self.nodes_per_segment < 4:
            raise ValueError("nodes_per_segment must be at least 4")
        if self.scheme != "GaussLegendre":
            raise ValueError("only GaussLegendre quadrature is provided")


def phi_sum(curve: CurveGamma, t: Triple) -> np.ndarray:
    """Componentwise sum Gamma(z1) + Gamma(z2) + Gamma(z3)."""
    return curve(t.z1) + curve(t.z2) + curve(t.z3)


def phi_alt(curve: CurveGamma, t: Triple) -> np.ndarray:
    """Alternating sum -Gamma(z1) + Gamma(z2) - Gamma(z3)."""
    return -curve(t.z1) + curve(t.z2) - curve(t.z3)


def _det3_values(c1: np.ndarray, c2: np.ndarray, c3: np.ndarray):
    """Cofactor determinant of columns; exactly antisymmetric in c1 <-> c2."""
    a, d, g = c1[..., 0], c1[..., 1], c1[..., 2]
    b, e, h = c2[..., 0], c2[..., 1], c2[..., 2]
    c, f, i = c3[..., 0], c3[..., 1], c3[..., 2]
    return a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)


def derivative_columns(curve: CurveGamma, z):
    """Gamma'(z) as an (..., 3) array."""
    zz = np.asarray(z, dtype=np.complex128)
    ders = [c.derivative() for c in curve.components]
    return np.stack([np.asarray(d(zz)) for d in ders], axis=-1)


def jacobian_direct(curve: CurveGamma, t: Triple) -> complex:
    """Determinant of the derivative columns at the three points."""
    c1 = derivative_columns(curve, t.z1)
    c2 = derivative_columns(curve, t.z2)
    c3 = derivative_columns(curve, t.z3)
    return complex(_det3_values(c1, c2, c3))


def jacobian_direct_batch(curve: CurveGamma, z1, z2, z3) -> np.ndarray:
    """Vectorized ``jacobian_direct`` over arrays of triples."""
    return _det3_values(
        derivative_columns(curve, z1),
        derivative_columns(curve, z2),
        derivative_columns(curve, z3),
    )


def _singular_points(tt: TorsionTriple, cluster_tol: float = 1e-7):
    cached = getattr(tt, "_singular_cache", None)
    if cached is not None:
        return cached
    pts = []
    for poly in (tt.L1, tt.L2):
        p = poly.trimmed(1e-12)
        if p.degree >= 1:
            pts.extend(r for r, _ in roots(p, cluster_tol).roots)
        elif p.degree < 0:
            raise SegmentHitsSingularity(
                "an integrand denominator polynomial vanishes identically"
            )
    pts = tuple(pts)
    object.__setattr__(tt, "_singular_cache", pts)
    return pts


def check_triple_clear(tt: TorsionTriple, t: Triple, margin: float = 1e-6) -> float:
    """Distance from the nearest L1/L2 zero to the triangle hull of the triple.

    All integration segments (the two outer ones and the inner family they
    sweep) lie inside the hull, so one distance test covers them all.

    Raises SegmentHitsSingularity below the margin.
    """
    best = math.inf
    for p in _singular_points(tt):
        best = min(best, dist_point_triangle(p, t.z1, t.z2, t.z3))
        if best < margin:
            raise SegmentHitsSingularity(
                f"integrand pole within {best:.3e} of an integration segment"
            )
    return best


def _nested_quadrature(tt: TorsionTriple, t: Triple, n: int) -> complex:
    """One pass of the tensorized three-level Gauss-Legendre rule."""
    x, w = leggauss(n)
    tau = 0.5 * (x + 1.0)
    wt = 0.5 * w

    z1, z2, z3 = complex(t.z1), complex(t.z2), complex(t.z3)
    w1 = z1 + (z2 - z1) * tau
    w2 = z2 + (z3 - z2) * tau

    L1, L2, L3 = tt.L1, tt.L2, tt.L3
    r2_w1 = np.asarray(L2(w1)) / np.asarray(L1(w1)) ** 2
    r2_w2 = np.asarray(L2(w2)) / np.asarray(L1(w2)) ** 2

    seg = w2[None, :] - w1[:, None]
    y = w1[:, None, None] + seg[:, :, None] * tau[None, None, :]
    r3 = np.asarray(L1(y)) * np.asarray(L3(y)) / np.asarray(L2(y)) ** 2
    inner = seg * np.tensordot(r3, wt, axes=([2], [0]))

    mid = (z3 - z2) * np.tensordot(inner * r2_w2[None, :], wt, axes=([1], [0]))
    outer = (z2 - z1) * np.dot(wt, r2_w1 * mid)
    lead = complex(L1(z1)) * complex(L1(z2)) * complex(L1(z3))
    return complex(lead * outer)


def jacobian_integral(curve: CurveGamma, t: Triple, q: QuadratureSpec, *,
                      singularity_margin: float = 1e-6,
                      rel_tol: float = 1e-6,
                      abs_tol: float = 0.0,
                      max_doublings: int = 4,
                      tt: TorsionTriple | None = None) -> complex:
    """Jacobian via the nested line-integral representation.

    Node counts double until two consecutive evaluations agree to
    ``rel_tol`` (or, when set, the absolute floor ``abs_tol``); failure to
    stabilize within ``max_doublings`` raises NonConvergence.  Raises
    SegmentHitsSingularity when a zero of L1 or L2 lies within
    ``singularity_margin`` of the swept segments.
    """
    if tt is None:
        tt = torsion_triple(curve)
    check_triple_clear(tt, t, singularity_margin)
    n = q.nodes_per_segment
    prev = _nested_quadrature(tt, t, n)
    for _ in range(max_doublings):
        n *= 2
        cur = _nested_quadrature(tt, t, n)
        if abs(cur - prev) <= max(rel_tol * max(abs(cur), 1e-12), abs_tol):
            return cur
        prev = cur
    raise NonConvergence(
        f"quadrature not stable to {rel_tol} after doubling to {n} nodes"
    )


def jacobian_identity_trials(curve: CurveGamma, n_trials: int, seed: int, *,
                             q: QuadratureSpec | None = None,
                             box_radius: float = 1.0,
                             margin: float = 0.3,
                             tolerance: float = 1e-6,
                             max_attempts_factor: int = 300):
    """Integral-versus-direct Jacobian over random admissible triples.

    Triples are drawn uniformly from a box and rejected when an L1/L2 zero
    comes within ``margin`` of their triangle hull (the exclusion count is
    reported).  Returns a dict with pass/fail counts, the exclusion count,
    and the worst relative deviation |integral - direct| / max(1, |direct|).
    """
    tt = torsion_triple(curve)
    rng = np.random.default_rng(seed)
    q = q or QuadratureSpec(nodes_per_segment=12)
    passes = failures = excluded = 0
    worst = 0.0
    attempts = 0
    while passes + failures < n_trials and attempts < max_attempts_factor * n_trials:
        attempts += 1
        pts = rng.uniform(-box_radius, box_radius, 6)
        t = Triple(complex(pts[0], pts[1]), complex(pts[2], pts[3]),
                   complex(pts[4], pts[5]))
        try:
            integral = jacobian_integral(
                curve, t, q, singularity_margin=margin,
                abs_tol=0.1 * tolerance, max_doublings=5, tt=tt,
            )
        except (SegmentHitsSingularity, NonConvergence):
            excluded += 1
            continue
        direct = jacobian_direct(curve, t)
        dev = abs(integral - direct) / max(1.0, abs(direct))
        worst = max(worst, dev)
        if dev <= tolerance:
            passes += 1
        else:
            failures += 1
    return {
        "trials": passes + failures,
        "passes": passes,
        "failures": failures,
        "excluded_count": excluded,
        "worst_relative_deviation": worst,
    }


def modulus_inside_integral(tt: TorsionTriple, t: Triple, q: QuadratureSpec) -> float:
    """The nested integral with every factor replaced by its modulus."""
    n = q.nodes_per_segment
    x, w = leggauss(n)
    tau = 0.5 * (x + 1.0)
    wt = 0.5 * w

    z1, z2, z3 = complex(t.z1), complex(t.z2), complex(t.z3)
    w1 = z1 + (z2 - z1) * tau
    w2 = z2 + (z3 - z2) * tau
    L1, L2, L3 = tt.L1, tt.L2, tt.L3
    r2_w1 = np.abs(np.asarray(L2(w1))) / np.abs(np.asarray(L1(w1))) ** 2
    r2_w2 = np.abs(np.asarray(L2(w2))) / np.abs(np.asarray(L1(w2))) ** 2

    seg = w2[None, :] - w1[:, None]
    y = w1[:, None, None] + seg[:, :, None] * tau[None, None, :]
    r3 = np.abs(np.asarray(L1(y))) * np.abs(np.asarray(L3(y))) / np.abs(np.asarray(L2(y))) ** 2
    inner = np.abs(seg) * np.tensordot(r3, wt, axes=([2], [0]))

    mid = abs(z3 - z2) * np.tensordot(inner * r2_w2[None, :], wt, axes=([1], [0]))
    outer = abs(z2 - z1) * float(np.dot(wt, r2_w1 * mid))
    lead = abs(complex(L1(z1))) * abs(complex(L1(z2))) * abs(complex(L1(z3)))
    return float(lead * outer)


def sector_contained(f, region: Region, aperture_budget: float,
                     n_samples: int, *, seed: int = 0):
    """Minimal angular arc of f over region samples versus a budget.

    Returns (contained, measured_aperture, witness) where the witness is a
    sample point at an extreme argument when the budget is exceeded, else
    None.  Zero values of f are skipped; if every sample vanishes,
    AllSamplesZero is raised.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = np.random.default_rng(seed)
    pts = region.sample(n_samples, rng)
    vals = np.asarray(f(pts))
    scale = float(np.max(np.abs(vals))) if vals.size else 0.0
    nz = np.abs(vals) > 1e-13 * scale
    if not np.any(nz):
        raise AllSamplesZero("f vanished at every sample point")
    pts_nz = pts[nz]
    aperture, i_lo, i_hi = minimal_arc(np.angle(vals[nz]))
    contained = aperture <= aperture_budget
    witness = None if contained else complex(pts_nz[i_hi])
    return contained, float(aperture), witness
