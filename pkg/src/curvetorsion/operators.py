"""Desk-scale estimators for the weighted convolution and extension operators.

The convolution operator integrates f(z - Gamma(w)) against the affine
arclength weight over a disk; its restricted weak-type pairing against a
pair of measurable sets in C^3 is estimated by Monte Carlo with mandatory
seeds.  The extension operator is an oscillatory integral over the support
disk, evaluated on a polar tensor grid.

The frequency pairing z . Gamma(w) is the real inner product of C^3 read as
R^6: sum_j Re(z_j) Re(Gamma_j) + Im(z_j) Im(Gamma_j).  This convention is
fixed here and used everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss

from .curves import CurveGamma, lambda_weight, torsion_triple
from .errors import NonConvergence, ZeroVolume

_BALL6_UNIT_VOLUME = math.pi**3 / 6.0


@dataclass(frozen=True)
class MeasurableSet:
    """Ball or box in C^3 (= R^6) with cached Lebesgue volume."""

    kind: str
    center: tuple
    size: float
    volume: float = field(init=False)

    def __post_init__(self):
        if self.kind not in ("ball", "box"):
            raise ValueError("kind must be 'ball' or 'box'")
        if self.size <= 0:
            raise ValueError("size must be positive")
        center = tuple(complex(c) for c in self.center)
        if len(center) != 3:
            raise ValueError("center must have three complex entries")
        object.__setattr__(self, "center", center)
        if self.kind == "ball":
            vol = _BALL6_UNIT_VOLUME * self.size**6
        else:
            vol = (2.0 * self.size) ** 6
        object.__setattr__(self, "volume", float(vol))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        """Membership for an (n, 3) complex array."""
        delta = pts - np.asarray(self.center, dtype=np.complex128)
        if self.kind == "ball":
            return np.sum(np.abs(delta) ** 2, axis=-1) <= self.size**2
        coords = np.concatenate([delta.real, delta.imag], axis=-1)
        return np.max(np.abs(coords), axis=-1) <= self.size

    def sample(self, n: int, rng) -> np.ndarray:
        center = np.asarray(self.center, dtype=np.complex128)
        if self.kind == "box":
            coords = rng.uniform(-self.size, self.size, size=(n, 6))
        else:
            g = rng.standard_normal((n, 6))
            norm = np.linalg.norm(g, axis=1, keepdims=True)
            radii = self.size * rng.random(n) ** (1.0 / 6.0)
            coords = g / norm * radii[:, None]
        return center + coords[:, :3] + 1j * coords[:, 3:]

    def translate(self, v) -> "MeasurableSet":
        v = np.asarray(v, dtype=np.complex128).reshape(3)
        return MeasurableSet(
            kind=self.kind,
            center=tuple(complex(c) for c in (np.asarray(self.center) + v)),
            size=self.size,
        )

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "center": [[c.real, c.imag] for c in self.center],
            "size": self.size,
            "volume": self.volume,
        }


@dataclass(frozen=True)
class WeakTypeReport:
    """Pairing estimate with its derived restricted weak-type quantities."""

    pairing: float
    alpha: float
    beta: float
    rwt_ratio: float
    mc_samples: int
    mc_stderr: float
    volume_e: float
    volume_f: float
    weak_type_gap: float

    def to_json(self) -> dict:
        return {
            "pairing": self.pairing,
            "alpha": self.alpha,
            "beta": self.beta,
            "rwt_ratio": self.rwt_ratio,
            "mc_samples": self.mc_samples,
            "mc_stderr": self.mc_stderr,
            "volume_e": self.volume_e,
            "volume_f": self.volume_f,
            "weak_type_gap": self.weak_type_gap,
        }


@dataclass(frozen=True)
class PQPair:
    """Lebesgue exponent pair, optionally born from the theta family."""

    p: float
    q: float
    theta: float | None = None

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ValueError("exponents must be at least 1")
        if self.theta is not None:
            if not 0.0 < self.theta < 1.0:
                raise ValueError("theta must lie in (0, 1)")
            if (
                abs(self.p - 6.0 / (3.0 + self.theta)) > 1e-12
                or abs(self.q - 6.0 / (2.0 + self.theta)) > 1e-12
            ):
                raise ValueError("theta-parameterized pair must satisfy its formulas")

    @classmethod
    def from_theta(cls, theta: float) -> "PQPair":
        return cls(p=6.0 / (3.0 + theta), q=6.0 / (2.0 + theta), theta=theta)


@dataclass(frozen=True)
class BallSpec:
    """Ball whose weighted measure is calibrated to an eighth of x."""

    x: float
    k_prime: int
    nu: float = field(init=False)
    radius: float = field(init=False)

    def __post_init__(self):
        if self.x <= 0:
            raise ValueError("x must be positive")
        if self.k_prime < 0:
            raise ValueError("k_prime must be nonnegative")
        nu = 3.0 / (self.k_prime + 6.0)
        object.__setattr__(self, "nu", nu)
        object.__setattr__(self, "radius", (16.0 * math.pi * nu) ** (-nu) * self.x**nu)


def ball_measure_check(spec: BallSpec):
    """Weighted measure of the calibrated ball against x / 8.

    The weight |z|**(k'/3) integrates in polar coordinates to
    2*pi*R**(k'/3 + 2) / (k'/3 + 2), which the radius is built to turn into
    exactly x / 8.
    """
    expo = spec.k_prime / 3.0 + 2.0
    sigma = 2.0 * math.pi * spec.radius**expo / expo
    return sigma, spec.x / 8.0


def _disk_samples(n: int, radius: float, rng) -> np.ndarray:
    r = radius * np.sqrt(rng.random(n))
    theta = 2.0 * math.pi * rng.random(n)
    return r * np.exp(1j * theta)


def _complex_stderr(samples: np.ndarray, scale: float) -> float:
    n = samples.size
    if n < 2:
        return 0.0
    mean = samples.mean()
    var = float(np.mean(np.abs(samples - mean) ** 2)) * n / (n - 1)
    return scale * math.sqrt(var / n)


def convolve(curve: CurveGamma, f, z, disk_radius: float, n_mc: int, seed: int):
    """Monte Carlo estimate of the weighted convolution at one point.

    ``f`` must accept an (n, 3) complex array and return (n,) values.
    Returns (value, stderr); the estimate is area(D) times the sample mean
    of f(z - Gamma(w)) lambda(w) over w uniform in the disk.
    """
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    rng = np.random.default_rng(seed)
    w = _disk_samples(n_mc, disk_radius, rng)
    tt = torsion_triple(curve)
    weights = lambda_weight(tt, w)
    pts = np.asarray(z, dtype=np.complex128).reshape(1, 3) - curve(w)
    samples = np.asarray(f(pts)) * weights
    area = math.pi * disk_radius**2
    value = complex(area * samples.mean())
    return value, _complex_stderr(samples, area)


def pairing(curve: CurveGamma, E: MeasurableSet, F: MeasurableSet,
            disk_radius: float, n_mc: int, seed: int) -> WeakTypeReport:
    """Estimate <T chi_E, chi_F> and derive alpha, beta, and the weak-type ratio.

    One (z, w) pair per sample: z uniform in F, w uniform in the disk.  The
    identities alpha |F| = pairing = beta |E| hold exactly by construction;
    the weak-type ratio divides the pairing by |E|**(1/2) |F|**(2/3), and
    ``weak_type_gap`` reports alpha**4 beta**2 / |E| for the equivalent
    lower-bound form.
    """
    if E.volume <= 0.0 or F.volume <= 0.0:
        raise ZeroVolume("both sets need positive volume")
    if n_mc < 1:
        raise ValueError("n_mc must be positive")
    rng = np.random.default_rng(seed)
    z = F.sample(n_mc, rng)
    w = _disk_samples(n_mc, disk_radius, rng)
    tt = torsion_triple(curve)
    weights = lambda_weight(tt, w)
    inside = E.contains(z - curve(w))
    samples = np.where(inside, weights, 0.0)
    scale = F.volume * math.pi * disk_radius**2
    est = float(scale * samples.mean())
    stderr = _complex_stderr(samples.astype(np.complex128), scale)
    alpha = est / F.volume
    beta = est / E.volume
    return WeakTypeReport(
        pairing=est,
        alpha=alpha,
        beta=beta,
        rwt_ratio=est / (E.volume**0.5 * F.volume ** (2.0 / 3.0)),
        mc_samples=n_mc,
        mc_stderr=stderr,
        volume_e=E.volume,
        volume_f=F.volume,
        weak_type_gap=alpha**4 * beta**2 / E.volume,
    )


def _polar_grid(support_radius: float, n_quad: int):
    x, w = leggauss(n_quad)
    r = 0.5 * support_radius * (x + 1.0)
    wr = 0.5 * support_radius * w
    m_t = max(8, 2 * n_quad)
    theta = 2.0 * math.pi * np.arange(m_t) / m_t
    nodes = r[:, None] * np.exp(1j * theta[None, :])
    weights = (wr * r)[:, None] * (2.0 * math.pi / m_t) * np.ones((1, m_t))
    return nodes.ravel(), weights.ravel()


def _real_pairing(z, gamma_vals: np.ndarray) -> np.ndarray:
    zz = np.asarray(z, dtype=np.complex128).reshape(3)
    return (
        gamma_vals.real @ zz.real + gamma_vals.imag @ zz.imag
    )


def extension(curve: CurveGamma, f, z, n_quad: int, support_radius: float, *,
              check_convergence: bool = True, rel_tol: float = 1e-6) -> complex:
    """Oscillatory extension integral over the support disk of f.

    ``f`` maps an (n,) complex array to (n,) values supported in
    |w| <= support_radius.  Doubling the polar grid must leave the value
    stable to ``rel_tol`` times the weighted L1 mass of f, else
    NonConvergence is raised.
    """
    if n_quad < 4:
        raise ValueError("n_quad must be at least 4")
    tt = torsion_triple(curve)

    def one_pass(nq):
        nodes, weights = _polar_grid(support_radius, nq)
        gamma_vals = curve(nodes)
        phase = np.exp(1j * _real_pairing(z, gamma_vals))
        fw = np.asarray(f(nodes))
        lam = lambda_weight(tt, nodes)
        integrand = phase * fw * lam
        value = complex(np.sum(weights * integrand))
        mass = float(np.sum(weights * np.abs(fw) * lam))
        return value, mass

    value, mass = one_pass(n_quad)
    if check_convergence:
        value2, mass2 = one_pass(2 * n_quad)
        tol = rel_tol * max(abs(value2), mass2, 1e-12)
        if abs(value2 - value) > tol:
            raise NonConvergence(
                f"extension quadrature moved by {abs(value2 - value):.3e} on doubling"
            )
        value = value2
    return value


def weighted_l1_mass(curve: CurveGamma, f, n_quad: int, support_radius: float) -> float:
    """Discretized weighted L1 norm of f on the same polar grid."""
    tt = torsion_triple(curve)
    nodes, weights = _polar_grid(support_radius, n_quad)
    return float(np.sum(weights * np.abs(np.asarray(f(nodes))) * lambda_weight(tt, nodes)))


def weighted_lp_norm(curve: CurveGamma, f, p: float, n_quad: int,
                     support_radius: float) -> float:
    tt = torsion_triple(curve)
    nodes, weights = _polar_grid(support_radius, n_quad)
    vals = np.abs(np.asarray(f(nodes))) ** p * lambda_weight(tt, nodes)
    return float(np.sum(weights * vals) ** (1.0 / p))


@dataclass(frozen=True)
class GridSpec:
    """Tensor evaluation grid in R^6 for discretized output norms."""

    half_width: float = 4.0
    points_per_axis: int = 4

    def points(self) -> np.ndarray:
        axis = np.linspace(-self.half_width, self.half_width, self.points_per_axis)
        mesh = np.meshgrid(*([axis] * 6), indexing="ij")
        coords = np.stack([m.ravel() for m in mesh], axis=-1)
        return coords[:, :3] + 1j * coords[:, 3:]

    @property
    def cell_volume(self) -> float:
        step = 2.0 * self.half_width / max(self.points_per_axis - 1, 1)
        return step**6


def norm_ratio_scan(curve: CurveGamma, pq_pairs, family, grid: GridSpec, *,
                    n_quad: int = 24, dilations=(1.0,)) -> dict:
    """Discretized output/input norm ratios; evidence only, no assertions.

    ``family`` is a list of (name, f, support_radius).  For each pair, test
    function, and dilation s the scan evaluates the extension on the grid,
    forms the L^q grid norm over the L^p weighted input norm of
    f_s(w) = f(s w), and reports per-(pair, function) flatness across the
    dilations (max ratio over min ratio).
    """
    pts = grid.points()
    rows = []
    for pair in pq_pairs:
        for name, f, support in family:
            for s in dilations:
                fs = (lambda func, sc: (lambda w: func(sc * w)))(f, s)
                radius = support / s
                vals = np.array(
                    [
                        extension(curve, fs, z, n_quad, radius, check_convergence=False)
                        for z in pts
                    ]
                )
                mags = np.abs(vals)
                if math.isinf(pair.q):
                    lq = float(np.max(mags))
                else:
                    lq = float(np.sum(mags**pair.q * grid.cell_volume) ** (1.0 / pair.q))
                lp = weighted_lp_norm(curve, fs, pair.p, n_quad, radius)
                rows.append(
                    {
                        "p": pair.p,
                        "q": pair.q,
                        "theta": pair.theta,
                        "function": name,
                        "dilation": s,
                        "lq_norm": lq,
                        "lp_norm": lp,
                        "ratio": lq / lp if lp > 0 else math.inf,
                    }
                )
    flatness = {}
    for row in rows:
        key = (row["p"], row["q"], row["function"])
        flatness.setdefault(key, []).append(row["ratio"])
    flat_rows = [
        {
            "p": p,
            "q": q,
            "function": fn,
            "flatness": (max(r) / min(r)) if min(r) > 0 else math.inf,
        }
        for (p, q, fn), r in sorted(flatness.items(), key=lambda kv: str(kv[0]))
    ]
    return {"rows": rows, "flatness": flat_rows}
