"""Sampling verifiers for the geometric Jacobian lower bound and the
triple-integral inequality.

The geometric ratio compares |Jacobian| against the product of the cube
roots of the torsion moduli and the pairwise point distances; region
verifiers aggregate the ratio over reproducibly sampled triples and record
the worst witness for replay.
"""

from __future__ import annotations

from dataclasses import dataclass

import math

import numpy as np
from numpy.polynomial.legendre import leggauss

from .curves import CurveGamma, TorsionTriple, torsion_triple
from .decomposition import Region, SigmaExponents, admissible
from .errors import DegenerateTriple, EmptyRegion
from .jacobian import (
    QuadratureSpec,
    Triple,
    check_triple_clear,
    jacobian_direct,
    jacobian_direct_batch,
    modulus_inside_integral,
)


@dataclass(frozen=True)
class RatioSample:
    """One triple with its Jacobian modulus, lower-bound value, and ratio."""

    triple: Triple
    jacobian_mod: float
    bound_value: float
    ratio: float

    def to_json(self) -> dict:
        return {
            "triple": [[z.real, z.imag] for z in self.triple],
            "jacobian_mod": self.jacobian_mod,
            "bound_value": self.bound_value,
            "ratio": self.ratio,
        }


@dataclass(frozen=True)
class VerificationReport:
    """Aggregated ratio statistics over one region."""

    region_id: str
    n_samples: int
    min_ratio: float
    median_ratio: float
    max_ratio: float
    worst_witness: RatioSample
    excluded_count: int
    exploratory: bool = False

    def to_json(self) -> dict:
        return {
            "region_id": self.region_id,
            "n_samples": self.n_samples,
            "min_ratio": self.min_ratio,
            "median_ratio": self.median_ratio,
            "max_ratio": self.max_ratio,
            "worst_witness": self.worst_witness.to_json(),
            "excluded_count": self.excluded_count,
            "exploratory": self.exploratory,
        }


def _bound_values(tt: TorsionTriple, z1, z2, z3):
    l3 = np.abs(np.asarray(tt.L3(z1)) * np.asarray(tt.L3(z2)) * np.asarray(tt.L3(z3)))
    dist = np.abs(z2 - z1) * np.abs(z3 - z1) * np.abs(z3 - z2)
    return l3 ** (1.0 / 3.0) * dist


def geometric_ratio(curve: CurveGamma, t: Triple, *,
                    tt: TorsionTriple | None = None) -> RatioSample:
    """|Jacobian| over the torsion/distance lower-bound product.

    Raises DegenerateTriple for coincident points or a vanishing torsion
    value at any of the three points.
    """
    if t.z1 == t.z2 or t.z2 == t.z3 or t.z1 == t.z3:
        raise DegenerateTriple("triple has coincident points")
    if tt is None:
        tt = torsion_triple(curve)
    bound = float(_bound_values(tt, t.z1, t.z2, t.z3))
    if bound == 0.0:
        raise DegenerateTriple("torsion vanishes at a sample point")
    jac = abs(jacobian_direct(curve, t))
    return RatioSample(triple=t, jacobian_mod=jac, bound_value=bound, ratio=jac / bound)


def verify_region(curve: CurveGamma, region: Region, sig: SigmaExponents,
                  n: int, seed: int, *, exploratory: bool = False,
                  tt: TorsionTriple | None = None) -> VerificationReport:
    """Sample n triples uniformly from the region and aggregate the ratio.

    Inadmissible exponent triples are refused unless ``exploratory`` is
    set, in which case the report carries the flag and asserts nothing.
    Deterministic for a fixed (seed, n).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    if not exploratory and not admissible(sig):
        raise ValueError(
            "region is inadmissible; pass exploratory=True to sample it anyway"
        )
    if tt is None:
        tt = torsion_triple(curve)
    rng = np.random.default_rng(seed)
    pts = region.sample(3 * n, rng)
    z1, z2, z3 = pts[0::3], pts[1::3], pts[2::3]

    bound = _bound_values(tt, z1, z2, z3)
    jac = np.abs(jacobian_direct_batch(curve, z1, z2, z3))
    good = (bound > 0.0) & (z1 != z2) & (z2 != z3) & (z1 != z3) & np.isfinite(jac)
    excluded = int(n - int(np.count_nonzero(good)))
    if not np.any(good):
        raise EmptyRegion("every sampled triple was excluded")
    ratios = jac[good] / bound[good]
    order = int(np.argmin(ratios))
    idx = np.flatnonzero(good)[order]
    witness = RatioSample(
        triple=Triple(complex(z1[idx]), complex(z2[idx]), complex(z3[idx])),
        jacobian_mod=float(jac[idx]),
        bound_value=float(bound[idx]),
        ratio=float(ratios[order]),
    )
    return VerificationReport(
        region_id=region.region_id,
        n_samples=n,
        min_ratio=float(np.min(ratios)),
        median_ratio=float(np.median(ratios)),
        max_ratio=float(np.max(ratios)),
        worst_witness=witness,
        excluded_count=excluded,
        exploratory=exploratory,
    )


def triple_integral_bound_check(t: Triple, q: QuadratureSpec):
    """Nested modulus integral against the pairwise-distance product.

    lhs integrates |w2 - w1| over the two outer segments with moduli kept
    inside; rhs is the product of the three pairwise distances.  Returns
    (lhs, rhs, ratio) with ratio = lhs / rhs (inf when rhs vanishes but lhs
    does not, 0 when both vanish).
    """
    n = q.nodes_per_segment
    x, w = leggauss(n)
    tau = 0.5 * (x + 1.0)
    wt = 0.5 * w
    z1, z2, z3 = complex(t.z1), complex(t.z2), complex(t.z3)
    w1 = z1 + (z2 - z1) * tau
    w2 = z2 + (z3 - z2) * tau
    block = np.abs(w2[None, :] - w1[:, None])
    inner = abs(z3 - z2) * np.tensordot(block, wt, axes=([1], [0]))
    lhs = abs(z2 - z1) * float(np.dot(wt, inner))
    rhs = abs(z3 - z1) * abs(z3 - z2) * abs(z2 - z1)
    if rhs > 0.0:
        ratio = lhs / rhs
    else:
        ratio = math.inf if lhs > 0.0 else 0.0
    return lhs, rhs, ratio


def modulus_comparability_check(curve: CurveGamma, region: Region | None,
                              t: Triple, q: QuadratureSpec, *,
                              singularity_margin: float = 1e-6,
                              tt: TorsionTriple | None = None):
    """|Jacobian| against the modulus-inside nested integral.

    The two sides are comparable on decomposition regions; both values are
    returned for ratio reporting (the region argument is carried for
    report context only).  Raises SegmentHitsSingularity like the integral
    Jacobian does.
    """
    if tt is None:
        tt = torsion_triple(curve)
    if t.z1 == t.z2 and t.z2 == t.z3:
        return 0.0, 0.0
    check_triple_clear(tt, t, singularity_margin)
    lhs = abs(jacobian_direct(curve, t))
    rhs = modulus_inside_integral(tt, t, q)
    return lhs, rhs
