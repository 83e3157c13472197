import math

import numpy as np
import pytest
from scipy import integrate

from spectral_limits.geometry import (
    Circle,
    FlatTorus,
    ModelParams,
    Sphere,
    Spindle,
    ball_volume,
    bishop_gromov_ratio,
    embedding_distance,
    geodesic_distance,
    mc_ball_volume,
    model_ball_volume,
    model_sn,
    sphere_area,
    unit_ball_volume,
)


class TestModelFunctions:
    def test_sn_at_zero(self):
        assert model_sn(1.0, 0.0) == 0.0

    def test_sn_k1(self):
        assert model_sn(1.0, 1.0) == pytest.approx(math.sinh(1.0), rel=1e-15)

    def test_sn_k4(self):
        assert model_sn(4.0, 0.5) == pytest.approx(math.sinh(1.0) / 2.0, rel=1e-15)

    def test_sn_negative_radius(self):
        with pytest.raises(ValueError):
            model_sn(1.0, -0.1)

    def test_unit_ball_volumes(self):
        assert unit_ball_volume(1) == pytest.approx(2.0)
        assert unit_ball_volume(2) == pytest.approx(math.pi)
        assert unit_ball_volume(3) == pytest.approx(4.0 * math.pi / 3.0)

    def test_model_ball_volume_zero(self):
        assert model_ball_volume(2, 1.0, 0.0) == 0.0

    def test_model_ball_volume_m2(self):
        # symbolic: vol(S^1) * int_0^r sinh = 2 pi (cosh r - 1)
        want = 2.0 * math.pi * (math.cosh(0.5) - 1.0)
        assert model_ball_volume(2, 1.0, 0.5) == pytest.approx(want, rel=1e-10)

    def test_model_ball_volume_m1(self):
        # vol(S^0) = 2 and the integrand is identically one
        assert model_ball_volume(1, 1.0, 0.3) == pytest.approx(0.6, rel=1e-12)

    def test_model_ball_volume_increasing(self):
        rs = np.linspace(0.05, 2.0, 25)
        vols = [model_ball_volume(2, 1.5, r) for r in rs]
        assert np.all(np.diff(vols) > 0)


class TestModelParams:
    def test_valid(self):
        ModelParams(m=2, K=1.0, D=2.0, v=0.3)

    @pytest.mark.parametrize(
        "kwargs", [dict(m=0), dict(K=0.5), dict(D=0.5), dict(v=1.5), dict(v=0.0)]
    )
    def test_invalid(self, kwargs):
        base = dict(m=2, K=1.0, D=1.0, v=0.5)
        base.update(kwargs)
        with pytest.raises(ValueError):
            ModelParams(**base)


class TestDistances:
    def test_circle_antipodal(self, circle):
        x, y = circle.point([0.0]), circle.point([math.pi])
        assert geodesic_distance(circle, x, y) == pytest.approx(math.pi)
        assert embedding_distance(circle, x, y) == pytest.approx(2.0)

    def test_sphere_pole_to_equator(self, sphere2):
        x = sphere2.point([0.0, 0.0, 1.0])
        y = sphere2.point([1.0, 0.0, 0.0])
        assert geodesic_distance(sphere2, x, y) == pytest.approx(math.pi / 2.0)

    def test_torus_shift(self, torus):
        x, y = torus.point([0.0, 0.0]), torus.point([0.6, 0.0])
        assert geodesic_distance(torus, x, y) == pytest.approx(0.4)

    def test_self_distance(self, spindle2):
        z = spindle2.uniform_intrinsic(1, np.random.default_rng(0))[0]
        p = spindle2.point(z)
        assert embedding_distance(spindle2, p, p) == 0.0
        assert geodesic_distance(spindle2, p, p) == pytest.approx(0.0, abs=1e-12)

    def test_spindle_profile_coordinate(self, spindle2):
        # first embedded coordinate at theta = pi/2 equals the profile
        # arclength integral, computed here by independent quadrature
        want, _ = integrate.quad(
            lambda p: math.sqrt(1.0 - 0.5 * math.cos(p) ** 2), 0.0, math.pi / 2
        )
        pt = spindle2.point([math.pi / 2.0, 1.0, 0.0])
        assert pt.embedded[0] == pytest.approx(want, rel=1e-10)

    def test_point_embeds_consistently(self, spindle3):
        z = spindle3.uniform_intrinsic(5, np.random.default_rng(1))
        for zi in z:
            p = spindle3.point(zi)
            assert np.allclose(p.embedded, spindle3.embed(zi[None, :])[0], atol=1e-12)


@pytest.mark.parametrize("mkey", ["circle", "sphere2", "torus", "spindle2"])
class TestMetricProperties:
    def _model(self, request, mkey):
        return request.getfixturevalue(mkey)

    def test_triangle_inequality(self, request, mkey):
        mfd = self._model(request, mkey)
        n_triples = 1000
        rng = np.random.default_rng(42)
        z = mfd.uniform_intrinsic(3 * n_triples, rng)
        d = lambda a, b: mfd.geodesic(a, b)
        for t in range(n_triples):
            a, b, c = z[3 * t], z[3 * t + 1], z[3 * t + 2]
            assert d(a, c) <= d(a, b) + d(b, c) + 1e-9

    def test_symmetry(self, request, mkey):
        mfd = self._model(request, mkey)
        rng = np.random.default_rng(7)
        z = mfd.uniform_intrinsic(40, rng)
        for i in range(0, 40, 2):
            assert mfd.geodesic(z[i], z[i + 1]) == pytest.approx(
                mfd.geodesic(z[i + 1], z[i]), abs=1e-10
            )

    def test_embedding_sandwich(self, request, mkey):
        mfd = self._model(request, mkey)
        rng = np.random.default_rng(11)
        z = mfd.uniform_intrinsic(200, rng)
        emb = mfd.embed(z)
        L = mfd.embedding_constant
        for i in range(0, 200, 2):
            dg = mfd.geodesic(z[i], z[i + 1])
            de = float(np.linalg.norm(emb[i] - emb[i + 1]))
            assert de <= dg + 1e-9
            assert dg <= L * de + 1e-9


class TestSpindleGeodesics:
    @pytest.mark.parametrize("m", [2, 3])
    def test_round_sphere_oracle(self, m):
        # at c = 1 the spindle is the unit round sphere: the spherical law
        # of cosines in (polar angle, fiber angle) is an exact oracle
        sp = Spindle(m=m, c=1.0)
        rng = np.random.default_rng(5)
        z = sp.uniform_intrinsic(200, rng)
        for i in range(0, 200, 2):
            t1, t2 = z[i][0], z[i + 1][0]
            u1 = z[i][1:] / np.linalg.norm(z[i][1:])
            u2 = z[i + 1][1:] / np.linalg.norm(z[i + 1][1:])
            dphi = math.acos(min(1.0, max(-1.0, float(np.dot(u1, u2)))))
            want = math.acos(min(1.0, max(-1.0,
                math.cos(t1) * math.cos(t2)
                + math.sin(t1) * math.sin(t2) * math.cos(dphi))))
            got = sp.geodesic(z[i], z[i + 1])
            assert got == pytest.approx(want, abs=1e-9)

    def test_meridian(self, spindle2):
        u = np.array([1.0, 0.0])
        assert spindle2.geodesic(np.r_[0.3, u], np.r_[1.2, u]) == pytest.approx(0.9)

    def test_near_tip_cone_limit(self, spindle2):
        # near a tip the spindle is a cone of total angle 2 pi c; unrolling
        # it maps geodesics to straight segments, so the chord at unrolled
        # angle c * dphi is the oracle (c * pi < pi, the apex is avoided)
        c = spindle2.c
        t1, t2 = 0.05, 0.07
        a = np.r_[t1, 1.0, 0.0]
        b = np.r_[t2, -1.0, 0.0]
        chord = math.sqrt(t1**2 + t2**2 - 2 * t1 * t2 * math.cos(c * math.pi))
        got = spindle2.geodesic(a, b)
        assert got == pytest.approx(chord, rel=2e-3)
        assert got <= t1 + t2

    def test_point_at_tip(self, spindle2):
        # the tip is a single point: distance from it is the polar angle
        tip = np.r_[0.0, 1.0, 0.0]
        other = np.r_[0.8, -1.0, 0.0]
        assert spindle2.geodesic(tip, other) == pytest.approx(0.8, abs=1e-9)

    def test_equator_arc(self, spindle2):
        c = spindle2.c
        a = np.r_[math.pi / 2, 1.0, 0.0]
        b = np.r_[math.pi / 2, math.cos(1.0), math.sin(1.0)]
        assert spindle2.geodesic(a, b) == pytest.approx(c * 1.0, abs=1e-9)


class TestBallVolumes:
    def test_sphere_cap(self, sphere2):
        x = sphere2.point([0.0, 0.0, 1.0])
        want = 2.0 * math.pi * (1.0 - math.cos(0.5))
        assert ball_volume(sphere2, x, 0.5) == pytest.approx(want, rel=1e-12)

    def test_zero_radius(self, sphere2):
        x = sphere2.point([0.0, 0.0, 1.0])
        assert ball_volume(sphere2, x, 0.0) == 0.0

    def test_torus_flat_disk(self, torus):
        x = torus.point([0.2, 0.7])
        assert ball_volume(torus, x, 0.3) == pytest.approx(math.pi * 0.09, rel=1e-12)

    def test_circle_ball(self, circle):
        x = circle.point([1.0])
        assert ball_volume(circle, x, 0.4) == pytest.approx(0.8)
        assert ball_volume(circle, x, 10.0) == pytest.approx(2.0 * math.pi)

    def test_spindle_mc_matches_sphere(self):
        sp = Spindle(2, c=1.0)
        x = sp.point([math.pi / 2.0, 1.0, 0.0])
        val, stderr = mc_ball_volume(sp, x, 0.8, n_mc=4000,
                                     rng=np.random.default_rng(3))
        want = 2.0 * math.pi * (1.0 - math.cos(0.8))
        assert abs(val - want) < 4.0 * stderr + 1e-12
        assert stderr > 0

    def test_higher_sphere_quadrature(self):
        s3 = Sphere(3, 1.0)
        x = s3.point([1.0, 0.0, 0.0, 0.0])
        want, _ = integrate.quad(lambda t: math.sin(t) ** 2, 0.0, 0.7)
        want *= sphere_area(2)
        assert ball_volume(s3, x, 0.7) == pytest.approx(want, rel=1e-10)


class TestBishopGromov:
    def test_sphere_value(self, sphere2):
        x = sphere2.point([0.0, 0.0, 1.0])
        cap = 2.0 * math.pi * (1.0 - math.cos(0.5))
        vk = 2.0 * math.pi * (math.cosh(0.5) - 1.0)
        assert bishop_gromov_ratio(sphere2, x, 0.5, 1.0) == pytest.approx(
            cap / vk, rel=1e-10
        )

    def test_small_radius_limit(self, sphere2):
        x = sphere2.point([0.0, 0.0, 1.0])
        assert bishop_gromov_ratio(sphere2, x, 1e-4, 1.0) == pytest.approx(
            1.0, abs=1e-6
        )

    def test_circle_identically_one(self, circle):
        x = circle.point([0.4])
        assert bishop_gromov_ratio(circle, x, 0.1, 1.0) == pytest.approx(1.0)

    @pytest.mark.parametrize("mkey", ["sphere2", "torus"])
    def test_monotone_in_radius(self, request, mkey):
        mfd = request.getfixturevalue(mkey)
        x = mfd.point(mfd.uniform_intrinsic(1, np.random.default_rng(0))[0])
        rs = np.linspace(0.05, 1.2, 30)
        ratios = [bishop_gromov_ratio(mfd, x, r, 1.0) for r in rs]
        assert np.all(np.diff(ratios) <= 1e-8)


def test_total_volumes():
    assert Circle(2.0).total_volume == pytest.approx(4.0 * math.pi)
    assert Sphere(2, 2.0).total_volume == pytest.approx(16.0 * math.pi)
    assert FlatTorus((1.0, 2.0)).total_volume == pytest.approx(2.0)
    assert Spindle(2).total_volume == pytest.approx(2.0 * math.sqrt(2.0) * math.pi)
    assert Spindle(3).total_volume == pytest.approx(math.pi**2)
