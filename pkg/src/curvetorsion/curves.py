"""Curves in C^3, their torsion triple, and curve-level transformations.

A curve is a triple of complex polynomials.  The torsion triple consists of
the first component's derivative, the 2x2 Wronskian-type determinant of the
first two components, and the full 3x3 determinant of the derivative frame;
the affine arclength weight is the cube root of the last one's modulus.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import NonConvergence, SingularAtOrigin
from .polynomials import ComplexPolynomial, det2, det3

# Coefficient-residue factor below which a computed determinant counts as
# identically zero (cancellation in the cofactor expansion is exact in theory
# but rounded in practice).
_ZERO_DET_REL = 1e-10

_SINGULAR_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class CurveGamma:
    """Polynomial curve (P1, P2, P3) with a degree bound N."""

    components: tuple
    degree_bound: int

    def __post_init__(self):
        if len(self.components) != 3:
            raise ValueError("a curve needs exactly three components")
        comps = tuple(
            c if isinstance(c, ComplexPolynomial) else ComplexPolynomial(c)
            for c in self.components
        )
        object.__setattr__(self, "components", comps)
        max_deg = max(c.degree for c in comps)
        if self.degree_bound < max(max_deg, 1):
            raise ValueError("degree_bound is below the largest component degree")

    @classmethod
    def from_components(cls, p1, p2, p3, degree_bound: int | None = None) -> "CurveGamma":
        comps = tuple(
            c if isinstance(c, ComplexPolynomial) else ComplexPolynomial(c)
            for c in (p1, p2, p3)
        )
        n = max(max(c.degree for c in comps), 1) if degree_bound is None else degree_bound
        return cls(components=comps, degree_bound=n)

    @cached_property
    def torsion(self) -> "TorsionTriple":
        return torsion_triple(self)

    @property
    def nondegenerate(self) -> bool:
        return not self.torsion.degenerate

    def __call__(self, z):
        """Evaluate the curve; returns shape (..., 3) for array input."""
        zz = np.asarray(z, dtype=np.complex128)
        vals = np.stack([np.asarray(c(zz)) for c in self.components], axis=-1)
        return vals

    def derivative_frame(self):
        """Rows (P_i', P_i'', P_i''') as a 3x3 polynomial matrix."""
        rows = []
        for c in self.components:
            d1 = c.derivative()
            d2 = d1.derivative()
            d3 = d2.derivative()
            rows.append((d1, d2, d3))
        return rows

    def to_json(self) -> dict:
        return {
            "N": int(self.degree_bound),
            "components": [c.to_json() for c in self.components],
        }

    @classmethod
    def from_json(cls, data) -> "CurveGamma":
        comps = [ComplexPolynomial.from_json(c) for c in data["components"]]
        return cls(components=tuple(comps), degree_bound=int(data["N"]))


@dataclass(frozen=True)
class TorsionTriple:
    """L1 = P1', L2 = 2x2 leading minor, L3 = full derivative determinant."""

    L1: ComplexPolynomial
    L2: ComplexPolynomial
    L3: ComplexPolynomial
    degenerate: bool

    def polys(self):
        return (self.L1, self.L2, self.L3)


def torsion_triple(curve: CurveGamma) -> TorsionTriple:
    """Build the torsion triple of a curve.

    A degenerate curve (L3 with all coefficients at cancellation level) is
    returned flagged, not rejected.
    """
    frame = curve.derivative_frame()
    l1 = frame[0][0]
    l2 = det2([[frame[0][0], frame[0][1]], [frame[1][0], frame[1][1]]])
    l3 = det3(frame)
    scale = 1.0
    for j in range(3):
        col_max = max(frame[i][j].max_coeff() for i in range(3))
        scale *= max(col_max, 1.0)
    degenerate = l3.is_zero(rel_tol=_ZERO_DET_REL, scale=scale)
    if degenerate:
        l3 = ComplexPolynomial([0.0])
    return TorsionTriple(L1=l1, L2=l2, L3=l3, degenerate=degenerate)


def lambda_weight(tt: TorsionTriple, z):
    """Affine arclength weight |L3(z)|**(1/3); vectorized over z."""
    val = np.abs(np.asarray(tt.L3(np.asarray(z, dtype=np.complex128)))) ** (1.0 / 3.0)
    if val.shape == ():
        return float(val)
    return val


@dataclass(frozen=True)
class AffineMap3:
    """Affine map z -> M z + offset on C^3 with a cached determinant."""

    matrix: np.ndarray
    offset: np.ndarray
    determinant: complex

    @classmethod
    def create(cls, matrix, offset=None) -> "AffineMap3":
        m = np.asarray(matrix, dtype=np.complex128).reshape(3, 3).copy()
        off = (
            np.zeros(3, dtype=np.complex128)
            if offset is None
            else np.asarray(offset, dtype=np.complex128).reshape(3).copy()
        )
        m.setflags(write=False)
        off.setflags(write=False)
        return cls(matrix=m, offset=off, determinant=complex(np.linalg.det(m)))

    @classmethod
    def identity(cls) -> "AffineMap3":
        return cls.create(np.eye(3))

    def compose(self, other: "AffineMap3") -> "AffineMap3":
        """self after other: z -> self(other(z))."""
        return AffineMap3.create(
            self.matrix @ other.matrix, self.matrix @ other.offset + self.offset
        )

    def to_json(self) -> dict:
        return {
            "matrix": [[[float(v.real), float(v.imag)] for v in row] for row in self.matrix],
            "offset": [[float(v.real), float(v.imag)] for v in self.offset],
            "determinant": [float(self.determinant.real), float(self.determinant.imag)],
        }


def affine_apply(curve: CurveGamma, amap: AffineMap3) -> CurveGamma:
    """Apply an affine map componentwise to the curve."""
    comps = []
    for i in range(3):
        acc = ComplexPolynomial([amap.offset[i]])
        for j in range(3):
            acc = acc + amap.matrix[i, j] * curve.components[j]
        comps.append(acc)
    return CurveGamma.from_components(*comps, degree_bound=curve.degree_bound)


def normalize_at_origin(curve: CurveGamma) -> tuple[CurveGamma, AffineMap3]:
    """Normalize so the curve passes through 0 with unit derivative frame.

    The returned curve g satisfies g(0) = 0 and g^(j)(0) = e_j for j = 1..3;
    the returned map reproduces the transformation.

    Raises
    ------
    SingularAtOrigin
        When the derivative frame at 0 is numerically singular.
    """
    frame = curve.derivative_frame()
    m = np.array(
        [[frame[i][j](0.0) for j in range(3)] for i in range(3)], dtype=np.complex128
    )
    if abs(np.linalg.det(m)) < _SINGULAR_FLOOR:
        raise SingularAtOrigin("derivative frame at the origin is singular; recenter first")
    inv = np.linalg.inv(m)
    gamma0 = np.array([c(0.0) for c in curve.components], dtype=np.complex128)
    amap = AffineMap3.create(inv, -inv @ gamma0)
    out = affine_apply(curve, amap)

    new_frame = out.derivative_frame()
    at0 = np.array(
        [[new_frame[i][j](0.0) for j in range(3)] for i in range(3)], dtype=np.complex128
    )
    origin = np.array([c(0.0) for c in out.components], dtype=np.complex128)
    if np.max(np.abs(at0 - np.eye(3))) > 1e-9 or np.max(np.abs(origin)) > 1e-9:
        raise NonConvergence("normalization postconditions missed the 1e-9 target")
    return out, amap


def offspring_curve(curve: CurveGamma, h, K: int) -> CurveGamma:
    """Average of K translates: components (1/K) * sum_j P_i(z + h_j)."""
    h = list(h)
    if K < 1:
        raise ValueError("K must be at least 1")
    if len(h) != K:
        raise ValueError("length of h must equal K")
    comps = []
    for c in curve.components:
        acc = c.shift(h[0])
        for hj in h[1:]:
            acc = acc + c.shift(hj)
        comps.append((1.0 / K) * acc)
    return CurveGamma.from_components(*comps, degree_bound=curve.degree_bound)
