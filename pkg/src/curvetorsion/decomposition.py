"""Decomposition of the complex plane into comparability regions.

Two root-geometry decompositions are chained over the torsion triple
(L1, L2, L3): the first cuts the plane into Voronoi cells, angular sectors,
and half-distance layers of a polynomial's roots, on each of which the
polynomial is comparable to c * |z - b|**k; the second cuts a cell radially
into dyadic annuli around root radii and gap annuli between them.  Chaining
them classifies every region as T00/T01/T10/T11 and attaches the exponent
triple sigma from the classification table.

Annular pieces are convexified: radii are thickened by a factor B and the
curved boundaries replaced by a tangent line (inner) and a chord (outer),
which requires sector apertures of at most pi/8.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .curves import CurveGamma, AffineMap3, TorsionTriple, affine_apply, torsion_triple
from .errors import (
    ApertureTooWide,
    CurveTorsionError,
    DegenerateTorsion,
    EmptyRegion,
    EpsNotDivisor,
    NonConvergence,
    RetriesExhausted,
    RootFindingFailed,
)
from .geometry import (
    clip_halfplane,
    dedupe_vertices,
    dist_point_segment,
    ensure_ccw,
    halfplane_value,
    minimal_arc,
    point_in_polygon,
    polygon_area,
    sample_polygon,
    square_polygon,
)
from .polynomials import ComplexPolynomial, roots
from .polynomials import _eval_error_bound as _poly_noise_bound

TAU = 2.0 * math.pi

DEFAULT_THICKENING = 1.1
DEFAULT_DYADIC_FACTOR = 2.0
MAX_APERTURE = math.pi / 8.0
_REFINE_DEPTH_CAP = 48

REGION_TYPES = ("T00", "T01", "T10", "T11")


@dataclass(frozen=True)
class SigmaExponents:
    """Region classification tag with its exponent triple.

    ``k`` is the torsion exponent from the first decomposition, ``k_sub``
    the L1 exponent (0 when the region type does not use one), ``k_mid``
    the L2 exponent.  ``sigma`` always agrees with the table row for the
    region type.
    """

    region_type: str
    k: int
    k_sub: int
    k_mid: int
    sigma: tuple

    @staticmethod
    def table(region_type: str, k: int, k_sub: int, k_mid: int) -> tuple:
        if region_type == "T00":
            return (k_sub, k_mid - 2 * k_sub, k + k_sub - 2 * k_mid)
        if region_type == "T01":
            return (0, k_mid, -2 * k_mid)
        if region_type == "T10":
            return (k_sub, k_mid - 2 * k_sub, k_sub - 2 * k_mid)
        if region_type == "T11":
            return (0, k_mid, -2 * k_mid)
        raise ValueError(f"unknown region type {region_type!r}")

    @classmethod
    def from_exponents(cls, region_type: str, k: int, k_sub: int, k_mid: int) -> "SigmaExponents":
        if min(k, k_sub, k_mid) < 0:
            raise ValueError("exponents must be nonnegative")
        return cls(
            region_type=region_type,
            k=int(k),
            k_sub=int(k_sub),
            k_mid=int(k_mid),
            sigma=cls.table(region_type, int(k), int(k_sub), int(k_mid)),
        )

    def consistent(self) -> bool:
        return self.sigma == self.table(self.region_type, self.k, self.k_sub, self.k_mid)


def admissible(sig: SigmaExponents) -> bool:
    """Exponent triples the geometric lower bound is proved for."""
    s1, s2, s3 = sig.sigma
    band = s2 + s3 / 2.0
    return s3 != -1 and (band < -2.0 or band >= 0.0)


def exponent_exclusions_ok(sig: SigmaExponents) -> bool:
    """Explicit exponent exclusions enforced on retried decompositions."""
    if sig.region_type == "T10":
        if sig.k_sub == 1:
            return False
        if 2 * sig.k_mid == -1 - sig.k_sub:
            return False
    if sig.region_type == "T00":
        if 2 * sig.k_mid == sig.k + sig.k_sub + 1:
            return False
        for i in (1, 2, 3, 4):
            if 3 * sig.k_sub == sig.k + i:
                return False
    return True


@dataclass
class Region:
    """A convex cell of the plane, described around its current center.

    ``halfplanes`` hold every linear constraint (Voronoi bisectors, sector
    edges, convexification tangent and chord, inherited parent constraints);
    ``polygon`` is the clipped convex boundary and is empty for unbounded
    sector tails, where ``sampling_polygon`` carries a working-radius
    truncation used for sampling only.
    """

    center: complex
    theta_range: tuple | None
    radial_range: tuple
    halfplanes: tuple
    polygon: tuple
    sampling_polygon: tuple
    parent_voronoi: int
    region_id: str
    unbounded: bool
    thickening: float
    region_type: str | None = None
    sigma: SigmaExponents | None = None
    comparability: dict = field(default_factory=dict)
    comparability_stats: dict = field(default_factory=dict)
    apertures: dict = field(default_factory=dict)
    sector_flag: bool = False
    band_scale: float | None = None
    depth: int = 0

    def contains(self, z, tol: float = 1e-9):
        """Membership by the center/sector/radius constraint set; vectorized."""
        zz = np.asarray(z, dtype=np.complex128)
        ok = np.ones(zz.shape, dtype=bool)
        for anchor, normal in self.halfplanes:
            scale = max(1.0, abs(normal))
            ok &= halfplane_value(zz, anchor, normal) >= -tol * scale
        return ok

    def sample(self, n: int, rng) -> np.ndarray:
        if not self.sampling_polygon:
            raise EmptyRegion(f"region {self.region_id} has no sampling polygon")
        try:
            return sample_polygon(self.sampling_polygon, n, rng)
        except RuntimeError as exc:
            raise EmptyRegion(f"region {self.region_id}: {exc}") from exc


@dataclass(frozen=True)
class D1Cell:
    region: Region
    center: complex
    exponent: int
    constant: float
    voronoi_index: int


@dataclass(frozen=True)
class D2Cell:
    region: Region
    kind: str  # "gap" | "dyadic" | "const"
    exponent: int
    constant: float


@dataclass
class DecompositionReport:
    regions: list
    epsilon_used: float
    thickening_B: float
    working_radius: float
    dyadic_factor: float
    cluster_tol: float
    region_budget: int
    seed: int
    excluded_exponents_log: list = field(default_factory=list)
    root_info: dict = field(default_factory=dict)

    @property
    def region_count(self) -> int:
        return len(self.regions)

    def inadmissible(self) -> list:
        return [r for r in self.regions if r.sigma is not None and not admissible(r.sigma)]


# ---------------------------------------------------------------------------
# region construction


def _validate_eps(eps: float):
    m = TAU / eps
    if abs(m - round(m)) > 1e-9 * max(1.0, m):
        raise EpsNotDivisor(f"2*pi/eps = {m} is not an integer")
    if eps > MAX_APERTURE + 1e-12:
        raise ApertureTooWide(f"aperture {eps} exceeds pi/8")
    return int(round(m))


def _build_region(
    center: complex,
    theta_range,
    radial_range,
    *,
    thickening: float,
    working_half_width: float,
    extra_halfplanes=(),
    region_id: str = "",
    parent_voronoi: int = 0,
    depth: int = 0,
) -> Region | None:
    """Convexify one annular sector and clip it against inherited constraints.

    Returns None when the clipped cell is empty.  The tangent/chord
    construction needs cos(aperture / 2) >= 1 / thickening, which holds for
    apertures up to pi/8 with the default thickening 1.1.
    """
    r_lo, r_hi = float(radial_range[0]), float(radial_range[1])
    if not (r_lo >= 0.0 and r_hi > r_lo):
        return None
    b = complex(center)
    B = float(thickening)
    hps = list(extra_halfplanes)

    if theta_range is None:
        if r_lo > 0.0 or math.isfinite(r_hi):
            raise ApertureTooWide("full-circle cells must span (0, inf)")
        square = square_polygon(0.0, working_half_width)
        poly = tuple(square)
        for anchor, normal in hps:
            poly = clip_halfplane(poly, anchor, normal)
        poly = dedupe_vertices(ensure_ccw(poly), 1e-12 * working_half_width)
        if polygon_area(poly) <= 0.0:
            return None
        return Region(
            center=b,
            theta_range=None,
            radial_range=(r_lo, r_hi),
            halfplanes=tuple(hps),
            polygon=(),
            sampling_polygon=poly,
            parent_voronoi=parent_voronoi,
            region_id=region_id,
            unbounded=True,
            thickening=B,
            depth=depth,
        )

    t0, t1 = float(theta_range[0]), float(theta_range[1])
    aperture = t1 - t0
    if aperture <= 0.0 or aperture > MAX_APERTURE + 1e-12:
        raise ApertureTooWide(f"sector aperture {aperture} outside (0, pi/8]")
    if math.cos(aperture / 2.0) < 1.0 / B:
        raise ApertureTooWide("thickening too small for tangent-chord convexification")
    tm = 0.5 * (t0 + t1)
    e0 = complex(math.cos(t0), math.sin(t0))
    e1 = complex(math.cos(t1), math.sin(t1))
    em = complex(math.cos(tm), math.sin(tm))

    hps.append((b, 1j * e0))
    hps.append((b, -1j * e1))
    if r_lo > 0.0:
        hps.append((b + (r_lo / B) * em, em))
    if math.isfinite(r_hi):
        hps.append((b + (B * r_hi * math.cos(aperture / 2.0)) * em, -em))

    square = square_polygon(0.0, working_half_width)
    poly = tuple(square)
    for anchor, normal in hps:
        poly = clip_halfplane(poly, anchor, normal)
        if not poly:
            return None
    scale = max(working_half_width, abs(b) + (r_hi if math.isfinite(r_hi) else 0.0), 1e-30)
    poly = dedupe_vertices(ensure_ccw(poly), 1e-13 * scale)
    if len(poly) < 3 or polygon_area(poly) <= (1e-14 * scale) ** 2:
        return None

    unbounded = False
    if not math.isfinite(r_hi):
        edge = working_half_width * (1.0 - 1e-9)
        for v in poly:
            if abs(v.real) >= edge or abs(v.imag) >= edge:
                unbounded = True
                break
    return Region(
        center=b,
        theta_range=(t0, t1),
        radial_range=(r_lo, r_hi),
        halfplanes=tuple(hps),
        polygon=() if unbounded else poly,
        sampling_polygon=poly,
        parent_voronoi=parent_voronoi,
        region_id=region_id,
        unbounded=unbounded,
        thickening=B,
        depth=depth,
    )


# ---------------------------------------------------------------------------
# first decomposition: Voronoi cells x sectors x half-distance layers


def _root_set(Q: ComplexPolynomial, cluster_tol: float):
    try:
        return roots(Q, cluster_tol)
    except NonConvergence as exc:
        raise RootFindingFailed(str(exc)) from exc


def _halfdistance_layers(j: int, locs: np.ndarray, mults, lead_abs: float):
    """Layers (r_lo, r_hi], exponent, constant around root j.

    The exponent on a layer sums the multiplicities of the center and of
    every root whose half distance has been passed; the constant collects
    |lead| times the full distances to the remaining far roots.
    """
    b = locs[j]
    others = sorted(
        (abs(locs[i] - b), mults[i]) for i in range(len(mults)) if i != j
    )
    merged = []
    for dist, mult in others:
        if merged and dist <= merged[-1][0] * (1.0 + 1e-9):
            merged[-1] = (merged[-1][0], merged[-1][1] + mult)
        else:
            merged.append((dist, mult))
    layers = []
    k = mults[j]
    lo = 0.0
    for idx in range(len(merged) + 1):
        hi = merged[idx][0] / 2.0 if idx < len(merged) else math.inf
        c = lead_abs
        for dist, mult in merged[idx:]:
            c *= dist**mult
        layers.append((lo, hi, k, c))
        if idx < len(merged):
            k += merged[idx][1]
            lo = hi
    return layers


def _sector_indices_for_domain(b: complex, domain: Region | None, m: int, eps: float):
    """Indices of the sectors around b that can meet the domain."""
    if domain is None or not domain.sampling_polygon:
        return range(m)
    poly = domain.sampling_polygon
    if point_in_polygon(np.asarray([b]), poly, tol=1e-12)[0]:
        return range(m)
    angles = np.angle(np.asarray(poly, dtype=np.complex128) - b)
    aperture, i_lo, _ = minimal_arc(angles)
    start = float(np.mod(angles[i_lo], TAU))
    lo = start - 1.5 * eps
    hi = start + aperture + 1.5 * eps
    if hi - lo >= TAU:
        return range(m)
    n0 = math.floor(lo / eps)
    n1 = math.ceil(hi / eps)
    return sorted({idx % m for idx in range(n0, n1 + 1)})


def _domain_radial_window(b: complex, domain: Region | None):
    if domain is None or not domain.sampling_polygon:
        return (0.0, math.inf)
    poly = domain.sampling_polygon
    verts = np.asarray(poly, dtype=np.complex128)
    dmax = float(np.max(np.abs(verts - b)))
    if point_in_polygon(np.asarray([b]), poly, tol=1e-12)[0]:
        dmin = 0.0
    else:
        dmin = min(
            dist_point_segment(b, poly[i], poly[(i + 1) % len(poly)]) for i in range(len(poly))
        )
    if domain.unbounded:
        dmax = math.inf
    return (dmin, dmax)


def _d1_cells(Q, domain, eps, ctx, id_prefix):
    """Cells of the root-geometry decomposition of Q, clipped to a domain."""
    Qt = Q.trimmed(1e-12)
    if Qt.degree <= 0:
        c0 = abs(Qt.coeffs[0])
        if domain is not None:
            return [D1Cell(domain, domain.center, 0, c0, domain.parent_voronoi)]
        m = ctx["m_sectors"]
        cells = []
        for n in range(m):
            region = _build_region(
                0.0,
                (n * eps, (n + 1) * eps),
                (0.0, math.inf),
                thickening=ctx["B"],
                working_half_width=ctx["half_width"],
                region_id=f"{id_prefix}s{n}",
            )
            if region is not None:
                cells.append(D1Cell(region, 0.0, 0, c0, 0))
        return cells

    rs = _root_set(Qt, ctx["cluster_tol"])
    ctx["root_log"][id_prefix] = {
        "residual": rs.residual,
        "roots": [[complex(r).real, complex(r).imag, int(mu)] for r, mu in rs.roots],
    }
    locs = rs.locations()
    mults = list(rs.multiplicities())
    lead_abs = float(abs(Qt.coeffs[-1]))
    m = ctx["m_sectors"]
    cells = []
    extra_domain = domain.halfplanes if domain is not None else ()
    for j in range(len(mults)):
        b = locs[j]
        vor = tuple(
            ((locs[i] + b) / 2.0, b - locs[i]) for i in range(len(mults)) if i != j
        )
        layers = _halfdistance_layers(j, locs, mults, lead_abs)
        dmin, dmax = _domain_radial_window(b, domain)
        sector_ids = _sector_indices_for_domain(b, domain, m, eps)
        for n in sector_ids:
            theta = (n * eps, (n + 1) * eps)
            for li, (lo, hi, k, c) in enumerate(layers):
                if hi < dmin / 1.5 or lo > dmax * 1.5:
                    continue
                region = _build_region(
                    b,
                    theta,
                    (lo, hi),
                    thickening=ctx["B"],
                    working_half_width=ctx["half_width"],
                    extra_halfplanes=tuple(extra_domain) + vor,
                    region_id=f"{id_prefix}v{j}.s{n}.l{li}",
                    parent_voronoi=j,
                )
                if region is not None:
                    cells.append(D1Cell(region, complex(b), int(k), float(c), j))
    return cells


def d1_decompose(Q: ComplexPolynomial, domain: Region | None, eps: float, *,
                 thickening: float = DEFAULT_THICKENING,
                 working_radius: float | None = None,
                 cluster_tol: float = 1e-7) -> list:
    """Public first decomposition: |Q| ~ c * |z - b|**k on each cell."""
    if Q.trimmed(1e-12).degree <= 0:
        raise ValueError("Q must be nonconstant")
    m = _validate_eps(eps)
    ctx = _make_ctx(
        polys=[Q], eps=eps, m=m, thickening=thickening,
        working_radius=working_radius, cluster_tol=cluster_tol, seed=0,
    )
    return _d1_cells(Q, domain, eps, ctx, "d1:")


# ---------------------------------------------------------------------------
# second decomposition: dyadic and gap annuli around a center


def _radial_structure(Q, b, ctx):
    """Gap/dyadic radial intervals of Q around b.

    Returns list of (lo, hi, kind, exponent, constant, scale).
    """
    Qt = Q.trimmed(1e-12)
    rs = _root_set(Qt, ctx["cluster_tol"])
    lead_abs = float(abs(Qt.coeffs[-1]))
    radii = []
    m0 = 0
    scale0 = max(1.0, max((abs(r - b) for r, _ in rs.roots), default=1.0))
    for r, mu in rs.roots:
        rho = abs(r - b)
        if rho <= 1e-9 * scale0:
            m0 += mu
        else:
            radii.append((rho, mu))
    radii.sort()
    merged = []
    for rho, mu in radii:
        if merged and rho <= merged[-1][0] * (1.0 + 1e-9):
            merged[-1] = (merged[-1][0], merged[-1][1] + mu)
        else:
            merged.append((rho, mu))
    A = ctx["dyadic_factor"]
    chains = []
    for rho, mu in merged:
        if chains and rho <= chains[-1][1] * A * A:
            lo, hi, cm = chains[-1]
            chains[-1] = (lo, rho, cm + mu)
        else:
            chains.append((rho, rho, mu))

    far = list(merged)  # (radius, mult) not yet absorbed
    intervals = []
    inside = m0
    edge = 0.0

    def gap_constant():
        c = lead_abs
        for rho, mu in far:
            c *= rho**mu
        return c

    for lo_r, hi_r, cm in chains:
        gap_hi = lo_r / A
        if gap_hi > edge:
            intervals.append((edge, gap_hi, "gap", inside, gap_constant(), None))
        band_scale = math.sqrt(lo_r * hi_r)
        intervals.append((max(edge, lo_r / A), hi_r * A, "dyadic", 0, band_scale, band_scale))
        consumed = 0
        while far and far[0][0] <= hi_r * (1.0 + 1e-12):
            consumed += far.pop(0)[1]
        inside += consumed
        edge = hi_r * A
    intervals.append((edge, math.inf, "gap", inside, gap_constant(), None))
    return [iv for iv in intervals if iv[1] > iv[0]]


def _d2_cells(Q, b, domain: Region, ctx, id_prefix):
    Qt = Q.trimmed(1e-12)
    if Qt.degree <= 0:
        return [D2Cell(domain, "const", 0, float(abs(Qt.coeffs[0])))]
    if abs(complex(b) - domain.center) > 1e-9 * (1.0 + abs(domain.center)):
        raise ValueError("second decomposition center must match the domain center")
    d_lo, d_hi = domain.radial_range
    structure = _radial_structure(Qt, complex(b), ctx)
    cells = []
    for idx, (lo, hi, kind, k, c, scale) in enumerate(structure):
        lo2, hi2 = max(lo, d_lo), min(hi, d_hi)
        if hi2 <= lo2:
            continue
        if domain.theta_range is None:
            if lo2 == 0.0 and not math.isfinite(hi2) and len(structure) == 1:
                region = domain
            else:
                raise ApertureTooWide("domain must lie inside a sector")
        else:
            region = _build_region(
                complex(b),
                domain.theta_range,
                (lo2, hi2),
                thickening=ctx["B"],
                working_half_width=ctx["half_width"],
                extra_halfplanes=domain.halfplanes,
                region_id=f"{domain.region_id}|{id_prefix}{kind[0]}{idx}",
                parent_voronoi=domain.parent_voronoi,
            )
        if region is None:
            continue
        if kind == "dyadic":
            region.band_scale = scale
        cells.append(D2Cell(region, kind, int(k), float(c)))
    return cells


def d2_decompose(Q: ComplexPolynomial, b: complex, domain: Region, *,
                 dyadic_factor: float = DEFAULT_DYADIC_FACTOR,
                 thickening: float = DEFAULT_THICKENING,
                 working_radius: float | None = None,
                 cluster_tol: float = 1e-7) -> list:
    """Public second decomposition around center b inside one sector cell."""
    if Q.trimmed(1e-12).degree <= 0:
        raise ValueError("Q must be nonconstant")
    ctx = _make_ctx(
        polys=[Q], eps=MAX_APERTURE, m=16, thickening=thickening,
        working_radius=working_radius, cluster_tol=cluster_tol, seed=0,
        dyadic_factor=dyadic_factor,
    )
    out = _d2_cells(Q, b, domain, ctx, "d2:")
    return [c for c in out if c.kind != "const"]


def convexify(center: complex, theta_range, radial_range, *,
              thickening: float = DEFAULT_THICKENING,
              working_radius: float = 100.0,
              extra_halfplanes=()) -> Region:
    """Convexify one annular sector into a Region.

    Raises ApertureTooWide for sectors wider than pi/8.  Unbounded sectors
    keep an empty polygon and a symbolic infinite outer radius.
    """
    region = _build_region(
        complex(center),
        theta_range,
        radial_range,
        thickening=thickening,
        working_half_width=1.25 * working_radius + abs(center),
        extra_halfplanes=extra_halfplanes,
        region_id="cell",
    )
    if region is None:
        raise EmptyRegion("the annular sector clipped to nothing")
    return region


# ---------------------------------------------------------------------------
# pipeline


def _make_ctx(*, polys, eps, m, thickening, working_radius, cluster_tol, seed,
              dyadic_factor: float = DEFAULT_DYADIC_FACTOR):
    if working_radius is None:
        rmax = 1.0
        for p in polys:
            pt = p.trimmed(1e-12)
            if pt.degree >= 1:
                rs = _root_set(pt, cluster_tol)
                if rs.roots:
                    rmax = max(rmax, max(abs(r) for r, _ in rs.roots))
        working_radius = 10.0 * rmax
    return {
        "eps": eps,
        "m_sectors": m,
        "B": thickening,
        "working_radius": working_radius,
        "half_width": 1.25 * working_radius,
        "cluster_tol": cluster_tol,
        "dyadic_factor": dyadic_factor,
        "seed": seed,
        "root_log": {},
    }


def _boundary_points(poly, per_edge: int) -> np.ndarray:
    n = len(poly)
    ts = np.arange(per_edge, dtype=np.float64) / per_edge
    segs = [poly[i] + (poly[(i + 1) % n] - poly[i]) * ts for i in range(n)]
    return np.concatenate(segs)


def _measure_apertures(region: Region, named_polys, n_samples: int):
    """Argument apertures of each polynomial over the region boundary.

    The argument of a zero-free analytic function on a convex cell takes
    its extremes on the boundary, so a deterministic boundary grid bounds
    every interior sample.  Zeros sit only at cell corners by construction
    and are skipped.
    """
    if not region.sampling_polygon:
        raise EmptyRegion(f"region {region.region_id} has no sampling polygon")
    per_edge = max(6, n_samples // max(len(region.sampling_polygon), 1))
    pts = _boundary_points(region.sampling_polygon, per_edge)
    # Boundary vertices carry clipping roundoff; near a root of the
    # polynomial the resulting value is pure noise with a random argument,
    # so values are kept only when they dominate both the evaluation error
    # and the value swing of a vertex-position error.
    pos_err = 64.0 * 2.220446049250313e-16 * (np.max(np.abs(pts)) + 1e-30)
    out = {}
    for name, poly in named_polys:
        if poly.degree <= 0:
            out[name] = 0.0
            continue
        vals = np.asarray(poly(pts))
        swing = np.abs(np.asarray(poly.derivative()(pts))) * pos_err
        nz = vals[np.abs(vals) > 32.0 * _poly_noise_bound(poly.coeffs, pts) + 8.0 * swing]
        if nz.size == 0:
            out[name] = 0.0
            continue
        aperture, _, _ = minimal_arc(np.angle(nz))
        out[name] = aperture
    return out


def _child_thickening(theta_range) -> float:
    """Smallest thickening the tangent-chord construction tolerates.

    Refinement children stay inside their parent, so they do not need the
    full overlap thickening of the original cells; keeping it would put a
    floor of (B - 1/B) * r on the radial extent and stall the refinement.
    """
    aperture = theta_range[1] - theta_range[0]
    need = 1.0 / math.cos(aperture / 2.0)
    return max(1.002, 1.001 * need + 0.001)


def _split_region(region: Region, ctx):
    """Split one region into two children (radial first, angular when tight)."""
    r_lo, r_hi = region.radial_range
    eps = ctx["eps"]
    children_spec = None
    if not math.isfinite(r_hi):
        mid = ctx["working_radius"] / 16.0 if r_lo == 0.0 else 4.0 * r_lo
        children_spec = [((r_lo, mid), region.theta_range), ((mid, math.inf), region.theta_range)]
    elif r_lo == 0.0:
        children_spec = [((0.0, r_hi / 4.0), region.theta_range), ((r_hi / 4.0, r_hi), region.theta_range)]
    elif r_hi / r_lo > 1.0 + 0.75 * eps:
        mid = math.sqrt(r_lo * r_hi)
        children_spec = [((r_lo, mid), region.theta_range), ((mid, r_hi), region.theta_range)]
    else:
        t0, t1 = region.theta_range
        tm = 0.5 * (t0 + t1)
        children_spec = [((r_lo, r_hi), (t0, tm)), ((r_lo, r_hi), (tm, t1))]
    children = []
    for i, (radial, theta) in enumerate(children_spec):
        child = _build_region(
            region.center,
            theta,
            radial,
            thickening=min(region.thickening, _child_thickening(theta)),
            working_half_width=ctx["half_width"],
            extra_halfplanes=region.halfplanes,
            region_id=f"{region.region_id}.r{i}",
            parent_voronoi=region.parent_voronoi,
            depth=region.depth + 1,
        )
        if child is not None:
            child.region_type = region.region_type
            child.sigma = region.sigma
            child.comparability = dict(region.comparability)
            child.band_scale = region.band_scale
            children.append(child)
    return children


_REFINE_MARGIN = 0.98


def _refine_regions(regions, named_polys_budgets, ctx, n_samples: int, budget: int):
    """Bisect regions until every boundary aperture fits its budget.

    A small margin below the budget absorbs the discretization gap between
    the boundary grid used here and whatever sampling a later check uses.
    """
    out = []
    queue = list(regions)
    while queue:
        region = queue.pop()
        try:
            apertures = _measure_apertures(
                region, [(n, p) for n, p, _ in named_polys_budgets], n_samples
            )
        except EmptyRegion:
            continue
        region.apertures = apertures
        over = [
            name
            for name, _, bud in named_polys_budgets
            if apertures[name] > _REFINE_MARGIN * bud
        ]
        if not over:
            out.append(region)
            continue
        if region.depth >= _REFINE_DEPTH_CAP or len(out) + len(queue) >= budget:
            region.sector_flag = True
            out.append(region)
            continue
        children = _split_region(region, ctx)
        if not children:
            region.sector_flag = True
            out.append(region)
            continue
        queue.extend(children)
    return out


def _measure_comparability(region: Region, ctx, n_samples: int):
    """Extremes of |L| / (c |z - b|**k) over the region boundary.

    The log of the ratio is harmonic on the cell (roots and centers sit at
    corners at worst), so boundary extremes bound every interior sample;
    corner points at roundoff level are dropped as in the aperture test.
    """
    stats = {}
    if not region.sampling_polygon:
        region.comparability_stats = {"unsampled": True}
        return
    per_edge = max(6, n_samples // max(len(region.sampling_polygon), 1))
    pts = _boundary_points(region.sampling_polygon, per_edge)
    pos_err = 64.0 * 2.220446049250313e-16 * (np.max(np.abs(pts)) + 1e-30)
    for name, (center, k, c, poly) in region.comparability.items():
        if c == 0.0 or poly.degree < 0:
            stats[name] = {"zero": True}
            continue
        vals = np.abs(np.asarray(poly(pts)))
        denom = c * np.abs(pts - center) ** k
        swing = np.abs(np.asarray(poly.derivative()(pts))) * pos_err
        good = (denom > 0) & (np.abs(pts - center) > 4.0 * pos_err) & (
            vals > 32.0 * _poly_noise_bound(poly.coeffs, pts) + 8.0 * swing
        )
        ratio = vals[good] / denom[good]
        ratio = ratio[np.isfinite(ratio) & (ratio > 0)]
        if ratio.size == 0:
            stats[name] = {"zero": True}
            continue
        lo, hi = float(np.min(ratio)), float(np.max(ratio))
        stats[name] = {
            "min_ratio": lo,
            "max_ratio": hi,
            "ratio_bound": 1.25 * max(hi, 1.0 / lo),
        }
    region.comparability_stats = stats


def classify_regions(tt: TorsionTriple, eps: float | None = None, *,
                     thickening: float = DEFAULT_THICKENING,
                     dyadic_factor: float = DEFAULT_DYADIC_FACTOR,
                     working_radius: float | None = None,
                     refine: bool = True,
                     refine_samples: int = 400,
                     comparability_samples: int = 500,
                     region_budget: int = 20_000,
                     cluster_tol: float = 1e-7,
                     seed: int = 0) -> DecompositionReport:
    """Full classification pipeline over the torsion triple.

    The torsion polynomial is decomposed first; each cell is then split
    radially by the L1 root radii into gap pieces (T0 side) and dyadic
    bands (T1 side, re-decomposed around L1 roots), and each of those is
    split again by L2 into T00/T01/T10/T11 regions carrying the sigma
    triple from the classification table.  A polynomial with no roots at
    all is classified on the constant side (type x1) with exponent 0.

    After classification, regions are bisected until the sampled argument
    aperture of each L_i fits the budget (deg L_i + 1) * eps; regions that
    cannot be refined within the depth cap are flagged.
    """
    if tt.degenerate:
        raise DegenerateTorsion("torsion vanishes identically")
    L1, L2, L3 = (p.trimmed(1e-12) for p in tt.polys())
    degs = {"L1": max(L1.degree, 0), "L2": max(L2.degree, 0), "L3": max(L3.degree, 0)}
    d = max(degs.values())
    if eps is None:
        m = 28 * (d + 1)
        eps = TAU / m
    else:
        m = _validate_eps(eps)
    ctx = _make_ctx(
        polys=[L1, L2, L3], eps=eps, m=m, thickening=thickening,
        working_radius=working_radius, cluster_tol=cluster_tol, seed=seed,
        dyadic_factor=dyadic_factor,
    )

    def finish(regions):
        kept = []
        for region in regions:
            sig = SigmaExponents.from_exponents(
                region.region_type, region._k, region._k_sub, region._k_mid
            )
            region.sigma = sig
            kept.append(region)
        if refine:
            budgets = [
                (name, poly, (degs[name] + 1) * eps)
                for name, poly in (("L1", L1), ("L2", L2), ("L3", L3))
            ]
            kept = _refine_regions(kept, budgets, ctx, refine_samples, region_budget)
        for region in kept:
            try:
                _measure_comparability(region, ctx, comparability_samples)
            except EmptyRegion:
                region.comparability_stats = {"unsampled": True}
        for region in kept:
            region.comparability = {
                name: (center, k, c)
                for name, (center, k, c, _poly) in region.comparability.items()
            }
        return DecompositionReport(
            regions=kept,
            epsilon_used=eps,
            thickening_B=thickening,
            working_radius=ctx["working_radius"],
            dyadic_factor=dyadic_factor,
            cluster_tol=cluster_tol,
            region_budget=region_budget,
            seed=seed,
            root_info=ctx["root_log"],
        )

    def tag(region, rtype, k, k_sub, k_mid, comp):
        region.region_type = rtype
        region._k = k
        region._k_sub = k_sub
        region._k_mid = k_mid
        region.comparability = comp
        return region

    if all(v == 0 for v in degs.values()):
        whole = _build_region(
            0.0, None, (0.0, math.inf),
            thickening=thickening, working_half_width=ctx["half_width"],
            region_id="all",
        )
        c1, c2, c3 = (float(abs(p.coeffs[0])) for p in (L1, L2, L3))
        tag(whole, "T11", 0, 0, 0, {
            "L1": (0j, 0, c1, L1), "L2": (0j, 0, c2, L2), "L3": (0j, 0, c3, L3),
        })
        return finish([whole])

    leaves = []
    for cell3 in _d1_cells(L3, None, eps, ctx, "L3:"):
        b = cell3.center
        comp3 = (b, cell3.exponent, cell3.constant, L3)
        for p1 in _d2_cells(L1, b, cell3.region, ctx, "L1:"):
            if p1.kind == "gap":
                comp1 = (b, p1.exponent, p1.constant, L1)
                for p2 in _d2_cells(L2, b, p1.region, ctx, "L2:"):
                    if p2.kind == "gap":
                        leaves.append(tag(
                            p2.region, "T00", cell3.exponent, p1.exponent, p2.exponent,
                            {"L3": comp3, "L1": comp1, "L2": (b, p2.exponent, p2.constant, L2)},
                        ))
                    elif p2.kind == "dyadic":
                        for inner in _d1_cells(L2, p2.region, eps, ctx, "L2i:"):
                            leaves.append(tag(
                                inner.region, "T01", cell3.exponent, 0, inner.exponent,
                                {"L3": comp3, "L1": comp1,
                                 "L2": (inner.center, inner.exponent, inner.constant, L2)},
                            ))
                    else:
                        leaves.append(tag(
                            p2.region, "T01", cell3.exponent, 0, 0,
                            {"L3": comp3, "L1": comp1, "L2": (b, 0, p2.constant, L2)},
                        ))
            else:
                if p1.kind == "const":
                    t1_cells = [D1Cell(p1.region, b, 0, p1.constant, cell3.voronoi_index)]
                else:
                    t1_cells = _d1_cells(L1, p1.region, eps, ctx, "L1i:")
                for cell1 in t1_cells:
                    bp = cell1.center
                    comp1 = (bp, cell1.exponent, cell1.constant, L1)
                    for p2 in _d2_cells(L2, bp, cell1.region, ctx, "L2:"):
                        if p2.kind == "gap":
                            leaves.append(tag(
                                p2.region, "T10", cell3.exponent, cell1.exponent, p2.exponent,
                                {"L3": comp3, "L1": comp1,
                                 "L2": (bp, p2.exponent, p2.constant, L2)},
                            ))
                        elif p2.kind == "dyadic":
                            for inner in _d1_cells(L2, p2.region, eps, ctx, "L2i:"):
                                leaves.append(tag(
                                    inner.region, "T11", cell3.exponent, cell1.exponent,
                                    inner.exponent,
                                    {"L3": comp3, "L1": comp1,
                                     "L2": (inner.center, inner.exponent, inner.constant, L2)},
                                ))
                        else:
                            leaves.append(tag(
                                p2.region, "T11", cell3.exponent, cell1.exponent, 0,
                                {"L3": comp3, "L1": comp1, "L2": (bp, 0, p2.constant, L2)},
                            ))
    return finish(leaves)


def affine_retry(curve: CurveGamma, report: DecompositionReport, *,
                 deltas=(1e-2, 1e-1), classify_kwargs: dict | None = None):
    """Perturb the curve until every region classifies admissibly.

    Candidate maps are I + delta * E_ij over the standard matrix units in
    row-major order for each delta, applied in a fixed order so retried
    reports are reproducible.  Returns (curve, map, report) for the first
    fully admissible classification; the identity when the input report is
    already admissible.

    Raises
    ------
    RetriesExhausted
        When no candidate in the family yields an admissible report.
    """
    kwargs = dict(classify_kwargs or {})
    kwargs.setdefault("seed", report.seed)

    def fully_admissible(rep):
        return all(
            admissible(r.sigma) and exponent_exclusions_ok(r.sigma) for r in rep.regions
        )

    if fully_admissible(report):
        return curve, AffineMap3.identity(), report

    log = []
    for delta in deltas:
        for i in range(3):
            for j in range(3):
                mat = np.eye(3, dtype=np.complex128)
                mat[i, j] += delta
                amap = AffineMap3.create(mat)
                if abs(amap.determinant) < 1e-12:
                    log.append({"delta": delta, "unit": [i, j], "outcome": "singular"})
                    continue
                curve2 = affine_apply(curve, amap)
                tt2 = torsion_triple(curve2)
                if tt2.degenerate:
                    log.append({"delta": delta, "unit": [i, j], "outcome": "degenerate"})
                    continue
                try:
                    rep2 = classify_regions(tt2, **kwargs)
                except CurveTorsionError as exc:
                    log.append({
                        "delta": delta, "unit": [i, j],
                        "outcome": f"failed:{type(exc).__name__}",
                    })
                    continue
                bad = [
                    r for r in rep2.regions
                    if not (admissible(r.sigma) and exponent_exclusions_ok(r.sigma))
                ]
                entry = {
                    "delta": delta,
                    "unit": [i, j],
                    "outcome": "accepted" if not bad else "inadmissible",
                    "inadmissible_count": len(bad),
                }
                log.append(entry)
                if not bad:
                    rep2.excluded_exponents_log = log
                    return curve2, amap, rep2
    raise RetriesExhausted(
        f"no admissible classification after {len(log)} perturbations"
    )
