import json
import math

import numpy as np
import pytest

from pinchlab import AnalysisConfig, GeodesicSphere, SpaceForm, analyze, sample_shape
from pinchlab.analysis import (
    l2_constants,
    lp_norm,
    minkowski_gaps,
    minkowski_residuals,
    normalize_to_unit_volume,
    pinching_fields,
    pinching_quantities,
    quasi_isometry_report,
    radius_bound_report,
    sphere_lattice,
    sphere_volume,
    proximity_predicates,
    total_curvature_check,
    volume,
)
from pinchlab.curvature import compute_curvature
from pinchlab.enclosing import extrinsic_radius
from pinchlab.errors import ClassViolation, DegenerateError, DomainError
from pinchlab.shapes import GridSpec
from pinchlab.spaceform import radial_project

from conftest import CATALOG_CASES, case_id, sampled

# catalog members with H_2 > 0
CLASS_CASES = [c for c in CATALOG_CASES if c[1].get("amplitude", 0) < 0.3]
AMPLITUDES = [0.2, 0.1, 0.05, 0.025]


def prepared(name, normalize=False, nodes=64, level=0, **params):
    ball, s = extrinsic_radius(sampled(name, nodes=nodes, level=level, **params))
    if normalize:
        s, ball, _ = normalize_to_unit_volume(s, ball)
    return s, ball, compute_curvature(s)


def bounds_of(s, ball, c, cfg):
    return radius_bound_report(s, c, ball, cfg)


class TestNorms:
    def test_constant(self):
        s = sampled("ellipsoid", nodes=16, semiaxes=[2, 1, 1])
        for p in (1, 2, 4):
            assert lp_norm(np.full(s.size, 3.0), p, s.weights) == pytest.approx(3 * s.volume ** (1 / p), rel=1e-14)
        assert lp_norm(np.full(s.size, -3.0), math.inf, s.weights) == 3.0

    def test_unit_sphere_h2(self):
        s, _, c = prepared("round_sphere")
        assert lp_norm(c.Hk(2), 1, s.weights) == pytest.approx(4 * math.pi, rel=1e-6)
        assert volume(s) == s.volume

    def test_ellipsoid_h2_self_convergence(self):
        vals = [lp_norm(compute_curvature(sampled("ellipsoid", level=L, semiaxes=[2, 1, 1])).Hk(2), 2,
                        sampled("ellipsoid", level=L, semiaxes=[2, 1, 1]).weights) for L in (0, 2)]
        assert vals[0] == pytest.approx(vals[1], rel=1e-5)

    def test_sphere_volume(self):
        assert sphere_volume(2) == pytest.approx(4 * math.pi)
        assert sphere_volume(3) == pytest.approx(2 * math.pi**2)
        assert sphere_volume(4) == pytest.approx(8 * math.pi**2 / 3)


class TestNormalization:
    def test_sphere_radius_two(self):
        s, ball, f = normalize_to_unit_volume(*reversed(extrinsic_radius(sampled("round_sphere", radius=2.0))))
        assert s.volume == pytest.approx(1.0, abs=1e-12)
        assert ball.radius == pytest.approx(2 / math.sqrt(16 * math.pi), rel=1e-9)
        assert f == pytest.approx(1 / math.sqrt(16 * math.pi), rel=1e-9)

    def test_identity_on_unit_volume(self):
        s, ball, _ = prepared("ellipsoid", normalize=True, semiaxes=[2, 1, 1])
        s2, ball2, f = normalize_to_unit_volume(s, ball)
        assert f == pytest.approx(1.0, abs=1e-12)
        assert ball2.radius == pytest.approx(ball.radius, rel=1e-12)

    def test_curvature_rescales_spherical_metric(self):
        s, ball, _ = prepared("geodesic_sphere", normalize=True, radius=0.7)
        # curvature delta scales by 1/f^2 while delta R^2 is invariant
        assert s.space.delta * ball.radius**2 == pytest.approx(0.49, rel=1e-9)

    @pytest.mark.parametrize("case", CLASS_CASES, ids=case_id)
    def test_deficit_sign_invariant(self, case):
        name, params = case
        cfg = AnalysisConfig(k=2, p=1)
        raw = bounds_of(*prepared(name, **params), cfg).deficit_p
        norm = bounds_of(*prepared(name, normalize=True, **params), cfg).deficit_p
        if abs(raw) > 1e-6:
            assert np.sign(raw) == np.sign(norm)


class TestMinkowski:
    @pytest.mark.parametrize("radius", [0.5, 2.0])
    def test_centered_sphere_equality(self, radius):
        s, _, c = prepared("round_sphere", radius=radius, center=[1.0, 0.0, -1.0])
        np.testing.assert_allclose(minkowski_gaps(s, c, 2), 0, atol=1e-6 * s.volume)

    def test_geodesic_sphere_equality(self):
        s, _, c = prepared("geodesic_sphere", radius=0.9)
        np.testing.assert_allclose(minkowski_gaps(s, c, 2), 0, atol=1e-6)

    def test_ellipsoid_strict(self):
        g0 = minkowski_gaps(*prepared("ellipsoid", semiaxes=[2, 1, 1])[::2], 1)[0]
        s, _, c = prepared("ellipsoid", level=2, semiaxes=[2, 1, 1])
        g2 = minkowski_gaps(s, c, 1)[0]
        assert g0 > 1e-3 and g2 == pytest.approx(g0, rel=1e-6)

    @pytest.mark.parametrize("case", CATALOG_CASES, ids=case_id)
    def test_formula_residuals_vanish(self, case):
        name, params = case
        s, _, c = prepared(name, **params)
        assert np.max(np.abs(minkowski_residuals(s, c, 2))) < 1e-9 * s.volume

    def test_class_violation(self):
        s, _, c = prepared("perturbed_sphere", amplitude=0.35)
        with pytest.raises(ClassViolation):
            minkowski_gaps(s, c, 2)


class TestRadiusBounds:
    def test_unit_sphere(self):
        b = bounds_of(*prepared("round_sphere"), AnalysisConfig(k=2, p=1))
        assert abs(b.deficit_p) < 1e-6 and abs(b.deficit_inf) < 1e-6 and abs(b.scal_deficit) < 1e-6

    def test_geodesic_sphere(self):
        b = bounds_of(*prepared("geodesic_sphere", radius=math.pi / 4), AnalysisConfig(k=2, p=1))
        assert abs(b.deficit_p) < 1e-6 and abs(b.deficit_mean) < 1e-6

    def test_ellipsoid_strict(self):
        b = bounds_of(*prepared("ellipsoid", semiaxes=[2, 1, 1]), AnalysisConfig(k=2, p=1))
        assert b.deficit_p > 1e-3
        assert all(v > 1e-3 for v in b.deficits_by_p.values())

    def test_deficit_formula(self):
        s, ball, c = prepared("ellipsoid", semiaxes=[1.5, 1.2, 0.8])
        b = bounds_of(s, ball, c, AnalysisConfig(k=1, p=2))
        expected = ball.radius - math.sqrt(s.volume) / math.sqrt(np.sum(s.weights * c.Hk(1) ** 2))
        assert b.deficit_p == pytest.approx(expected, rel=1e-12)


class TestPinching:
    def test_sphere_vanishes(self):
        s, ball, c = prepared("round_sphere", normalize=True, radius=1.3)
        pin = pinching_quantities(s, c, ball, AnalysisConfig(k=2, p=1))
        assert abs(pin.C) < 1e-8 and pin.phi_sq < 1e-8 and pin.psi_sq < 1e-8

    def test_fields_vanish_on_geodesic_sphere(self):
        s, ball, _ = prepared("geodesic_sphere", radius=0.8)
        phi, psi = pinching_fields(s, ball.radius)
        assert np.max(np.abs(phi)) < 1e-8 and np.max(psi) < 1e-8

    def test_small_amplitude_bounds(self):
        s, ball, c = prepared("perturbed_sphere", normalize=True, amplitude=0.05)
        pin = pinching_quantities(s, c, ball, AnalysisConfig(k=2, p=1))
        assert 0 < pin.C < 1 and pin.bounds_applicable
        assert pin.phi_sq <= pin.A1 * pin.C and pin.psi_sq <= pin.A2 * pin.C

    def test_sweep_decreases(self):
        rows = []
        for t in AMPLITUDES:
            s, ball, c = prepared("perturbed_sphere", normalize=True, amplitude=t)
            rows.append(pinching_quantities(s, c, ball, AnalysisConfig(k=2, p=1)))
        for key in ("C", "phi_sq", "psi_sq"):
            vals = [getattr(r, key) for r in rows]
            assert all(a > b for a, b in zip(vals, vals[1:])), (key, vals)

    def test_constants(self):
        A1, A2 = l2_constants(SpaceForm(0.0), 2, 3.0, 2.0)
        assert A2 == pytest.approx(2.0**2 + 2.0)
        assert A1 == pytest.approx(1.0 + 2 * 3.0**-1)
        A1s, A2s = l2_constants(SpaceForm(4.0), 2, 3.0, 2.0)
        assert A2s == A2 and A1s == pytest.approx(A2 / 4)

    def test_k_one_rejected(self):
        s, ball, c = prepared("round_sphere", normalize=True)
        with pytest.raises(DomainError):
            pinching_quantities(s, c, ball, AnalysisConfig(k=1, p=1))

    def test_not_applicable_without_normalization(self):
        s, ball, c = prepared("perturbed_sphere", amplitude=0.05, radius=2.0)
        pin = pinching_quantities(s, c, ball, AnalysisConfig(k=2, p=1))
        assert not pin.bounds_applicable and "volume" in pin.bounds_reason


class TestProximity:
    def test_sphere(self):
        s, ball, _ = prepared("round_sphere")
        th = proximity_predicates(s, ball, 2 * s.spacing)
        assert th.annulus_ok and th.covering_ok
        assert th.annulus_margin < 1e-12
        assert th.hausdorff <= s.spacing

    def test_ellipsoid_annulus_fails(self):
        s, ball, _ = prepared("ellipsoid", semiaxes=[2, 1, 1])
        th = proximity_predicates(s, ball, 0.1)
        assert not th.annulus_ok
        assert th.annulus_margin == pytest.approx(1.0, abs=1e-6)

    def test_hausdorff_decreases_along_sweep(self):
        h = []
        for t in AMPLITUDES:
            s, ball, _ = prepared("perturbed_sphere", normalize=True, amplitude=t)
            h.append(proximity_predicates(s, ball, 1.0).hausdorff)
        assert all(a > b for a, b in zip(h, h[1:]))

    def test_hausdorff_against_dense_oracle(self):
        s, ball, _ = prepared("perturbed_sphere", amplitude=0.1)
        th = proximity_predicates(s, ball, 1.0)
        # dense resample of the surface and of the sphere
        dense = sample_shape(s.shape, GridSpec(nodes=256)).x
        from scipy.spatial import cKDTree

        sph = ball.center + ball.radius * sphere_lattice(2, 40000)
        d1 = cKDTree(sph).query(dense)[0].max()
        d2 = cKDTree(dense).query(sph)[0].max()
        lo, hi = th.hausdorff_bracket
        assert lo - 1e-3 <= max(d1, d2) <= hi + 1e-3

    def test_lattice_is_unit(self):
        for n in (2, 3, 4):
            pts = sphere_lattice(n, 500)
            assert pts.shape == (500, n + 1)
            np.testing.assert_allclose(np.linalg.norm(pts, axis=1), 1.0)

    def test_epsilon_positive(self):
        s, ball, _ = prepared("round_sphere", nodes=16)
        with pytest.raises(DomainError):
            proximity_predicates(s, ball, 0.0)


class TestQuasiIsometry:
    @pytest.mark.parametrize("name,params", [("round_sphere", {"radius": 1.5, "center": [0.2, 0, 0]}),
                                             ("geodesic_sphere", {"radius": 1.0})])
    def test_centered_sphere(self, name, params):
        s, ball, _ = prepared(name, **params)
        q = quasi_isometry_report(s, ball)
        np.testing.assert_allclose(q.F, s.x, atol=1e-8)
        assert q.max_distortion < 1e-8

    def test_small_amplitude_below_bound(self):
        s, ball, _ = prepared("perturbed_sphere", normalize=True, amplitude=0.05)
        q = quasi_isometry_report(s, ball)
        assert q.violations == 0 and np.all(q.distortion <= q.bound + 1e-9)

    @pytest.mark.parametrize("name,params", [("perturbed_sphere", {"amplitude": 0.2}),
                                             ("perturbed_geodesic_sphere", {"amplitude": 0.1})])
    def test_stretch_against_finite_differences(self, name, params, rng):
        s, ball, _ = prepared(name, nodes=16, **params)
        q = quasi_isometry_report(s, ball)
        idx = rng.choice(s.size, 10, replace=False)
        h = 1e-6
        for i in idx:
            u = s.params[i]
            J = np.empty((s.n, s.space.coord_dim))
            for a in range(s.n):
                e = np.zeros(s.n)
                e[a] = h
                Fp = radial_project(s.space, ball.center, ball.radius, s.chart_points(u + e)[0])
                Fm = radial_project(s.space, ball.center, ball.radius, s.chart_points(u - e)[0])
                J[a] = (Fp - Fm) / (2 * h)
            lam = np.sort(np.linalg.eigvals(np.linalg.solve(s.metric[i], J @ J.T)).real)
            np.testing.assert_allclose(lam, q.stretch[i], atol=1e-6)

    def test_degenerate(self):
        s, ball, _ = prepared("round_sphere", nodes=16)
        bad = type(ball)(center=s.x[0].copy(), radius=ball.radius)
        with pytest.raises(DegenerateError):
            quasi_isometry_report(s.with_center(s.x[1]), bad)


class TestTotalCurvature:
    def test_unit_sphere(self):
        s, _, c = prepared("round_sphere")
        assert abs(total_curvature_check(s, c, 2).margin) < 1e-6

    def test_scale_invariance(self):
        s, _, c = prepared("round_sphere", radius=3.0)
        tc = total_curvature_check(s, c, 2)
        assert tc.integral == pytest.approx(4 * math.pi, abs=1e-6)

    def test_ellipsoid_strict(self):
        s, _, c = prepared("ellipsoid", semiaxes=[2, 1, 1])
        assert total_curvature_check(s, c, 1).margin > 1e-3

    def test_spherical_rejected(self):
        s, _, c = prepared("geodesic_sphere", nodes=16)
        with pytest.raises(DomainError):
            total_curvature_check(s, c, 2)


class TestConfig:
    @pytest.mark.parametrize("kw", [{"k": 0}, {"p": 0.5}, {"theta": 0.0}, {"epsilon": -1.0}])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            AnalysisConfig(**kw)

    def test_k_exceeds_dimension(self):
        with pytest.raises(DomainError):
            analyze(sampled("round_sphere", nodes=16), AnalysisConfig(k=3))


class TestAnalyze:
    @pytest.mark.parametrize("case", CLASS_CASES, ids=case_id)
    def test_all_checks_pass(self, case):
        name, params = case
        rep = analyze(sampled(name, **params), AnalysisConfig(k=2, p=1))
        assert rep.passed, rep.failed_checks()
        json.dumps(rep.to_dict(), allow_nan=False)

    def test_three_dimensional(self):
        for k in (1, 2, 3):
            rep = analyze(sampled("ellipsoid", nodes=16, semiaxes=[2, 1, 1, 1]), AnalysisConfig(k=k))
            assert rep.passed, (k, rep.failed_checks())

    def test_homothety_invariance_euclidean(self):
        a = analyze(sampled("ellipsoid", semiaxes=[2, 1, 1]))
        b = analyze(sampled("ellipsoid", semiaxes=[5, 2.5, 2.5]))
        assert b.bounds.deficit_p == pytest.approx(a.bounds.deficit_p, rel=1e-9)
        assert b.pinching.C == pytest.approx(a.pinching.C, rel=1e-9)
        assert b.radius == pytest.approx(a.radius, rel=1e-9)

    def test_homothety_invariance_spherical(self):
        a = analyze(sample_shape(GeodesicSphere(radius=0.8, delta=1.0)))
        b = analyze(sample_shape(GeodesicSphere(radius=0.4, delta=4.0)))
        assert b.delta == pytest.approx(a.delta, rel=1e-9)
        assert b.radius == pytest.approx(a.radius, rel=1e-9)

    def test_class_violation(self):
        with pytest.raises(ClassViolation):
            analyze(sampled("perturbed_sphere", amplitude=0.35))

    def test_failed_check_reported(self):
        rep = analyze(sampled("perturbed_sphere", amplitude=0.2), AnalysisConfig(k=2, theta=1e-3))
        assert rep.quasi_isometry["within_theta"] is False
        assert rep.passed  # theta is informational, not an inequality of the theory
