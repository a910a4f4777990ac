import math

import numpy as np
import pytest

from curvetorsion import (
    BallSpec,
    GridSpec,
    MeasurableSet,
    PQPair,
    ZeroVolume,
    ball_measure_check,
    convolve,
    extension,
    norm_ratio_scan,
    pairing,
    weighted_l1_mass,
)
from curvetorsion.curves import CurveGamma

from conftest import poly

ONES = lambda pts: np.ones(pts.shape[0], dtype=complex)
UNIT_DISK = lambda w: np.where(np.abs(w) <= 1.0, 1.0 + 0j, 0j)
GAUSS = lambda w: np.exp(-2.0 * np.abs(w) ** 2)


class TestMeasurableSet:
    def test_ball_volume(self):
        ball = MeasurableSet(kind="ball", center=(0, 0, 0), size=2.0)
        assert abs(ball.volume - math.pi**3 / 6.0 * 2.0**6) <= 1e-12 * ball.volume

    def test_box_volume(self):
        box = MeasurableSet(kind="box", center=(1j, 0, 0), size=0.5)
        assert abs(box.volume - 1.0) <= 1e-12

    def test_membership_and_sampling(self, rng):
        ball = MeasurableSet(kind="ball", center=(1, 1j, 0), size=1.5)
        pts = ball.sample(2000, rng)
        assert ball.contains(pts).all()
        far = pts + 100.0
        assert not ball.contains(far).any()


class TestConvolve:
    def test_constant_function_closed_form(self, moment_curve):
        value, stderr = convolve(moment_curve, ONES, np.zeros(3), 1.0, 20000, seed=7)
        target = 12 ** (1 / 3) * math.pi
        assert stderr == 0.0
        assert abs(value - target) <= 1e-12 * target

    def test_zero_function(self, moment_curve):
        value, stderr = convolve(
            moment_curve, lambda pts: np.zeros(pts.shape[0]), np.zeros(3), 1.0, 500, seed=1
        )
        assert value == 0

    def test_degenerate_curve_zero(self):
        curve = CurveGamma.from_components(poly(0, 1), poly(0, 0, 1), poly(0))
        value, _ = convolve(curve, ONES, np.zeros(3), 1.0, 500, seed=1)
        assert value == 0


class TestPairing:
    def _balls(self, r=1.0):
        return (
            MeasurableSet(kind="ball", center=(0, 0, 0), size=r),
            MeasurableSet(kind="ball", center=(0, 0, 0), size=r),
        )

    def test_definitional_identities(self, moment_curve):
        E, F = self._balls()
        rep = pairing(moment_curve, E, F, 1.0, 20000, seed=5)
        assert abs(rep.alpha * F.volume - rep.pairing) <= 1e-10 * rep.pairing
        assert abs(rep.beta * E.volume - rep.pairing) <= 1e-10 * rep.pairing
        assert rep.weak_type_gap == pytest.approx(rep.alpha**4 * rep.beta**2 / E.volume)

    def test_regression_pinned_ratio(self, moment_curve):
        E, F = self._balls()
        rep = pairing(moment_curve, E, F, 1.0, 20000, seed=5)
        assert abs(rep.rwt_ratio - 1.5138453911243523) < 1e-9

    def test_disjoint_sets_vanish(self, moment_curve):
        E = MeasurableSet(kind="ball", center=(1000, 0, 0), size=1.0)
        F = MeasurableSet(kind="ball", center=(0, 0, 0), size=1.0)
        rep = pairing(moment_curve, E, F, 1.0, 5000, seed=3)
        assert rep.pairing <= 3 * rep.mc_stderr + 1e-12

    def test_stderr_scaling(self, moment_curve):
        E, F = self._balls()
        errs = [pairing(moment_curve, E, F, 1.0, n, seed=1).mc_stderr for n in (1000, 10000, 100000)]
        for a, b in zip(errs, errs[1:]):
            assert math.sqrt(10) / 2 <= a / b <= 2 * math.sqrt(10)

    def test_translation_invariance(self, moment_curve):
        E, F = self._balls()
        base = pairing(moment_curve, E, F, 1.0, 40000, seed=11)
        v = np.array([0.3 + 0.1j, -0.2j, 0.05])
        moved = pairing(moment_curve, E.translate(v), F.translate(v), 1.0, 40000, seed=12)
        spread = base.mc_stderr + moved.mc_stderr
        assert abs(base.pairing - moved.pairing) <= 3 * spread

    def test_multi_scale_ratio_stability(self, moment_curve):
        ratios = []
        for r in (0.5, 1.0, 2.0):
            E, F = self._balls(r)
            ratios.append(pairing(moment_curve, E, F, 1.0, 40000, seed=9).rwt_ratio)
        assert max(ratios) / min(ratios) < 10.0

    def test_zero_volume_rejected(self, moment_curve):
        with pytest.raises((ZeroVolume, ValueError)):
            MeasurableSet(kind="ball", center=(0, 0, 0), size=0.0)


class TestBallMeasure:
    @pytest.mark.parametrize("k_prime", range(7))
    @pytest.mark.parametrize("x", [0.25, 1.0, 8.0])
    def test_measure_identity(self, k_prime, x):
        sigma, target = ball_measure_check(BallSpec(x=x, k_prime=k_prime))
        assert abs(sigma - target) <= 1e-12 * max(1.0, target)
        assert target == x / 8.0

    def test_unit_case(self):
        spec = BallSpec(x=1.0, k_prime=0)
        assert abs(spec.radius - (8 * math.pi) ** -0.5) < 1e-15
        sigma, target = ball_measure_check(spec)
        assert abs(sigma - 0.125) < 1e-15

    def test_k3_x8(self):
        sigma, target = ball_measure_check(BallSpec(x=8.0, k_prime=3))
        assert abs(sigma - 1.0) <= 1e-12

    def test_monotone_in_x(self):
        vals = [ball_measure_check(BallSpec(x=x, k_prime=2))[0] for x in (1.0, 0.5, 0.1, 0.01)]
        assert all(a > b for a, b in zip(vals, vals[1:]))

    def test_invariants(self):
        spec = BallSpec(x=2.0, k_prime=4)
        assert spec.nu == pytest.approx(3.0 / 10.0)
        assert spec.radius == pytest.approx((16 * math.pi * spec.nu) ** -spec.nu * 2.0**spec.nu)


class TestExtension:
    def test_no_oscillation_closed_form(self, moment_curve):
        val = extension(moment_curve, UNIT_DISK, np.zeros(3), 24, 1.0)
        target = 12 ** (1 / 3) * math.pi
        assert abs(val - target) <= 1e-10 * target

    def test_zero_function(self, moment_curve):
        val = extension(moment_curve, lambda w: np.zeros_like(w), np.ones(3), 16, 1.0)
        assert val == 0

    def test_endpoint_bound(self, moment_curve, rng):
        for f, support in ((UNIT_DISK, 1.0), (GAUSS, 3.0)):
            mass = weighted_l1_mass(moment_curve, f, 24, support)
            for _ in range(50):
                coords = rng.uniform(-5, 5, 6)
                z = coords[:3] + 1j * coords[3:]
                val = abs(extension(moment_curve, f, z, 24, support, check_convergence=False))
                assert val <= mass * (1 + 1e-12)


class TestPQPair:
    def test_theta_family(self):
        pair = PQPair.from_theta(0.5)
        assert pair.p == pytest.approx(6.0 / 3.5)
        assert pair.q == pytest.approx(6.0 / 2.5)

    def test_invalid_theta_pair(self):
        with pytest.raises(ValueError):
            PQPair(p=2.0, q=2.0, theta=0.5)

    def test_theta_out_of_range(self):
        with pytest.raises(ValueError):
            PQPair.from_theta(1.5)


class TestNormRatioScan:
    def test_scan_shapes_and_endpoint_row(self, moment_curve):
        grid = GridSpec(half_width=3.0, points_per_axis=3)
        family = [("bump", GAUSS, 3.0), ("plateau", UNIT_DISK, 1.0)]
        pairs = [PQPair.from_theta(t) for t in (0.25, 0.5, 0.75)]
        pairs.append(PQPair(p=1.0, q=math.inf))
        table = norm_ratio_scan(moment_curve, pairs, family, grid, n_quad=10,
                                dilations=(0.5, 1.0, 2.0))
        assert len(table["rows"]) == 4 * 2 * 3
        for row in table["rows"]:
            if math.isinf(row["q"]):
                assert row["ratio"] <= 1.0 + 1e-12
        keys = {(f["p"], f["q"], f["function"]) for f in table["flatness"]}
        assert len(keys) == 4 * 2
        for entry in table["flatness"]:
            assert entry["flatness"] >= 1.0
