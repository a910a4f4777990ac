import numpy as np
import pytest

from curvetorsion import (
    AffineMap3,
    CurveGamma,
    SingularAtOrigin,
    affine_apply,
    lambda_weight,
    normalize_at_origin,
    offspring_curve,
    torsion_triple,
)
from conftest import poly, random_curve


class TestTorsionTriple:
    def test_moment_curve(self, moment_curve):
        tt = torsion_triple(moment_curve)
        assert tt.L1 == poly(1)
        assert tt.L2 == poly(2)
        assert tt.L3 == poly(12)
        assert not tt.degenerate

    def test_planar_curve_degenerate(self):
        curve = CurveGamma.from_components(poly(0, 1), poly(0, 0, 1), poly(0))
        tt = torsion_triple(curve)
        assert tt.degenerate
        assert tt.L3.degree == -1

    def test_normalized_curve_unit_torsion(self, normalized_curve):
        tt = torsion_triple(normalized_curve)
        assert np.allclose(tt.L1.coeffs, [1])
        assert np.allclose(tt.L2.coeffs, [1])
        assert np.allclose(tt.L3.coeffs, [1])

    def test_z2z4_torsion(self, curve_z2z4):
        # symbolic oracle: frame rows (1,0,0), (2z,2,0), (4z^3,12z^2,24z)
        # so L3 = 2 * 24z = 48z; checked against a numeric determinant below
        tt = torsion_triple(curve_z2z4)
        assert tt.L1 == poly(1)
        assert tt.L2 == poly(2)
        assert np.allclose(tt.L3.coeffs, [0, 48])
        z0 = 0.7 + 0.3j
        frame = curve_z2z4.derivative_frame()
        m = np.array([[frame[i][j](z0) for j in range(3)] for i in range(3)])
        assert abs(tt.L3(z0) - np.linalg.det(m)) < 1e-10 * abs(np.linalg.det(m))


class TestLambdaWeight:
    def test_moment_constant(self, moment_curve):
        tt = torsion_triple(moment_curve)
        for z in (0.0, 2 - 1j, 100j):
            assert abs(lambda_weight(tt, z) - 12 ** (1 / 3)) < 1e-12

    def test_degenerate_zero(self):
        curve = CurveGamma.from_components(poly(0, 1), poly(0, 0, 1), poly(0))
        tt = torsion_triple(curve)
        assert lambda_weight(tt, 3 + 4j) == 0.0

    def test_z2z4_at_one(self, curve_z2z4):
        tt = torsion_triple(curve_z2z4)
        assert abs(lambda_weight(tt, 1.0) - 48 ** (1 / 3)) < 1e-12


class TestAffineApply:
    def test_identity(self, moment_curve):
        out = affine_apply(moment_curve, AffineMap3.identity())
        for a, b in zip(out.components, moment_curve.components):
            assert np.allclose(a.coeffs, b.coeffs)

    def test_diag_normalizes_moment(self, moment_curve, normalized_curve):
        amap = AffineMap3.create(np.diag([1.0, 0.5, 1.0 / 6.0]))
        out = affine_apply(moment_curve, amap)
        tt = torsion_triple(out)
        assert np.allclose(tt.L3.coeffs, [1.0])
        for a, b in zip(out.components, normalized_curve.components):
            assert np.allclose(a.coeffs, b.coeffs)

    def test_double_scales_torsion_by_eight(self, moment_curve, rng):
        out = affine_apply(moment_curve, AffineMap3.create(2.0 * np.eye(3)))
        tt0 = torsion_triple(moment_curve)
        tt1 = torsion_triple(out)
        z = rng.normal(size=10) + 1j * rng.normal(size=10)
        assert np.allclose(tt1.L3(z), 8.0 * np.asarray(tt0.L3(z)))

    def test_determinant_cache_matches_cofactor(self, rng):
        m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
        amap = AffineMap3.create(m)
        a, b, c = m[0]
        d, e, f = m[1]
        g, h, i = m[2]
        cof = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
        assert abs(amap.determinant - cof) <= 1e-12 * abs(cof)

    def test_torsion_scaling_property(self, rng):
        for _ in range(50):
            curve = random_curve(rng, int(rng.integers(2, 5)))
            tt = torsion_triple(curve)
            if tt.degenerate:
                continue
            m = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
            if abs(np.linalg.det(m)) < 1e-3:
                continue
            amap = AffineMap3.create(m, rng.normal(size=3) + 1j * rng.normal(size=3))
            tt2 = torsion_triple(affine_apply(curve, amap))
            z = rng.normal(size=20) + 1j * rng.normal(size=20)
            lhs = np.asarray(tt2.L3(z))
            rhs = amap.determinant * np.asarray(tt.L3(z))
            assert np.max(np.abs(lhs - rhs)) <= 1e-8 * np.max(np.abs(rhs) + 1)


class TestNormalizeAtOrigin:
    def test_moment_to_limiting_form(self, moment_curve):
        out, amap = normalize_at_origin(moment_curve)
        assert np.allclose(out.components[0].coeffs, [0, 1], atol=1e-12)
        assert np.allclose(out.components[1].coeffs, [0, 0, 0.5], atol=1e-12)
        assert np.allclose(out.components[2].coeffs, [0, 0, 0, 1 / 6], atol=1e-12)

    def test_fixed_point(self, normalized_curve):
        out, amap = normalize_at_origin(normalized_curve)
        assert np.allclose(amap.matrix, np.eye(3), atol=1e-12)
        assert np.allclose(amap.offset, 0, atol=1e-12)

    def test_shifted_curve_postconditions(self):
        curve = CurveGamma.from_components(poly(1, 1), poly(0, 0, 1), poly(0, 0, 0, 1))
        out, _ = normalize_at_origin(curve)
        frame = out.derivative_frame()
        at0 = np.array([[frame[i][j](0.0) for j in range(3)] for i in range(3)])
        origin = np.array([c(0.0) for c in out.components])
        assert np.max(np.abs(at0 - np.eye(3))) < 1e-9
        assert np.max(np.abs(origin)) < 1e-9

    def test_idempotent(self, rng):
        for _ in range(10):
            curve = random_curve(rng, 4)
            tt = torsion_triple(curve)
            if tt.degenerate or abs(tt.L3(0.0)) < 1e-6:
                continue
            once, _ = normalize_at_origin(curve)
            twice, _ = normalize_at_origin(once)
            for a, b in zip(once.components, twice.components):
                n = max(a.coeffs.size, b.coeffs.size)
                ca = np.zeros(n, complex)
                cb = np.zeros(n, complex)
                ca[: a.coeffs.size] = a.coeffs
                cb[: b.coeffs.size] = b.coeffs
                assert np.max(np.abs(ca - cb)) < 1e-9

    def test_singular_at_origin(self):
        curve = CurveGamma.from_components(poly(0, 0, 1), poly(0, 0, 0, 1), poly(0, 0, 0, 0, 1))
        with pytest.raises(SingularAtOrigin):
            normalize_at_origin(curve)


class TestOffspring:
    def test_single_translate_identity(self, moment_curve):
        out = offspring_curve(moment_curve, [0.0], 1)
        for a, b in zip(out.components, moment_curve.components):
            assert np.array_equal(a.coeffs, b.coeffs)

    def test_averaging_with_itself(self, moment_curve):
        out = offspring_curve(moment_curve, [0.0, 0.0], 2)
        for a, b in zip(out.components, moment_curve.components):
            assert np.allclose(a.coeffs, b.coeffs, atol=1e-15)

    def test_binomial_shift_oracle(self, moment_curve):
        out = offspring_curve(moment_curve, [0.0, 1.0], 2)
        assert np.allclose(out.components[0].coeffs, [0.5, 1])
        assert np.allclose(out.components[1].coeffs, [0.5, 1, 1])
        assert np.allclose(out.components[2].coeffs, [0.5, 1.5, 1.5, 1])

    def test_common_shift_is_reparametrization(self, rng):
        curve = random_curve(rng, 4)
        h0 = complex(rng.normal(), rng.normal())
        out = offspring_curve(curve, [h0, h0, h0], 3)
        for a, b in zip(out.components, curve.components):
            assert np.array_equal(a.coeffs, ((1 / 3) * (b.shift(h0) + b.shift(h0) + b.shift(h0))).coeffs)
            assert np.allclose(a.coeffs, b.shift(h0).coeffs, rtol=1e-12, atol=1e-12)

    def test_offspring_torsion_degree_bound(self, rng):
        for _ in range(5):
            curve = random_curve(rng, 5)
            h = rng.normal(size=3) + 1j * rng.normal(size=3)
            out = offspring_curve(curve, list(h), 3)
            tt = torsion_triple(out)
            assert tt.L3.trimmed(1e-10).degree <= 3 * curve.degree_bound - 6

    def test_length_mismatch(self, moment_curve):
        with pytest.raises(ValueError):
            offspring_curve(moment_curve, [0.0], 2)


class TestSerialization:
    def test_curve_json_roundtrip(self, curve_mixed):
        data = curve_mixed.to_json()
        back = CurveGamma.from_json(data)
        assert back.degree_bound == curve_mixed.degree_bound
        for a, b in zip(back.components, curve_mixed.components):
            assert np.array_equal(a.coeffs, b.coeffs)
