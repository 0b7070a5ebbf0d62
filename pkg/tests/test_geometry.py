import numpy as np
import pytest

from fanolab.errors import (NonPositiveDensity, ProfileClassError,
                            RadiusOutOfRange)
from fanolab.geometry import (Grid, MetricProfile, curvature, dump_profile,
                              fs_background, fs_density, parse_profile,
                              product_compose, volume_ratio)

from conftest import perturbed_profile


class TestGrid:
    def test_spacing(self):
        g = Grid(20.0, 1024)
        assert g.h == pytest.approx(40.0 / 1023)
        assert g.s[0] == -20.0 and g.s[-1] == 20.0

    def test_minimum_size(self):
        with pytest.raises(ValueError):
            Grid(20.0, 32)
        with pytest.raises(ValueError):
            Grid(-1.0, 128)


class TestBackground:
    def test_center_value(self):
        g = Grid(20.0, 1025)
        fs = fs_background(g)
        assert fs.w[512] == pytest.approx(0.5, abs=1e-15)

    def test_volume(self):
        fs = fs_background(Grid(20.0, 1024))
        assert abs(fs.volume - 4.0 * np.pi) <= 1e-10

    def test_diameter(self):
        rep = curvature(fs_background(Grid(20.0, 1024)))
        assert abs(rep.diameter - np.pi) <= 1e-6

    def test_moment_range(self):
        fs = fs_background(Grid(20.0, 1024))
        mom = fs.moment()
        assert np.all(np.diff(mom) > 0)
        assert mom[0] == 0.0
        assert mom[-1] == pytest.approx(2.0, abs=1e-8)


class TestProfileInvariants:
    def test_positivity_enforced(self):
        g = Grid(10.0, 128)
        w = fs_density(g.s)
        w[60] = -1e-3
        with pytest.raises(NonPositiveDensity):
            MetricProfile(g, w)

    def test_class_enforced(self):
        g = Grid(10.0, 128)
        with pytest.raises(ProfileClassError):
            MetricProfile(g, 2.0 * fs_density(g.s))

    def test_off_class_opt_out(self):
        g = Grid(10.0, 128)
        p = MetricProfile(g, 2.0 * fs_density(g.s), check_class=False)
        with pytest.raises(ProfileClassError):
            p.require_canonical()


class TestCurvature:
    def test_background_is_round(self):
        rep = curvature(fs_background(Grid(20.0, 1024)))
        assert np.max(np.abs(rep.gauss - 1.0)) <= 1e-6
        assert np.max(np.abs(rep.scalar - 1.0)) <= 1e-6
        assert np.max(np.abs(rep.scalar_riemannian - 2.0)) <= 2e-6
        assert np.max(np.abs(rep.ricci_potential)) <= 1e-6

    def test_normalization_of_potential(self):
        rep = curvature(perturbed_profile(Grid(12.0, 1025), 0.1, "sech"))
        assert rep.normalization_check() == pytest.approx(1.0, abs=1e-10)

    def test_gauss_bonnet_perturbed(self):
        rep = curvature(perturbed_profile(Grid(12.0, 2049), 0.1, "sech"))
        assert abs(rep.gauss_bonnet - 4.0 * np.pi) <= 1e-4

    def test_gauss_bonnet_second_order(self):
        errs = []
        for n in (129, 257):
            rep = curvature(perturbed_profile(Grid(12.0, n), 0.1, "sech"))
            errs.append(abs(rep.gauss_bonnet - 4.0 * np.pi))
        assert 3.5 <= errs[0] / errs[1] <= 4.5

    def test_potential_defining_relation_second_order(self):
        from fanolab._num import d2

        res = []
        for n in (1025, 2049):
            g = Grid(10.0, n)
            p = perturbed_profile(g, 0.1, "sech")
            rep = curvature(p)
            resid = np.abs(d2(rep.ricci_potential, g.h)
                           - (1.0 - rep.gauss) * p.w)
            res.append(float(np.max(resid[2:-2])))
        assert 3.5 <= res[0] / res[1] <= 4.5

    def test_rejects_nonpositive(self):
        g = Grid(10.0, 128)
        p = MetricProfile(g, fs_density(g.s), check_class=False)
        p.w[5] = 0.0
        with pytest.raises(NonPositiveDensity):
            curvature(p)


class TestVolumeRatio:
    def test_euclidean_limit(self):
        fs = fs_background(Grid(12.0, 1025))
        ratio = volume_ratio(fs, 0.0, 0.05)
        assert ratio == pytest.approx(np.pi, rel=0.02)

    def test_round_sphere_unit_ball(self):
        fs = fs_background(Grid(12.0, 1025))
        ratio = volume_ratio(fs, 0.0, 1.0)
        exact = 2.0 * np.pi * (1.0 - np.cos(1.0))
        assert ratio == pytest.approx(exact, rel=1e-4)
        assert 1.0 < ratio < 4.0

    def test_off_center(self):
        fs = fs_background(Grid(12.0, 1025))
        ratio = volume_ratio(fs, 0.7, 0.5)
        exact = 2.0 * np.pi * (1.0 - np.cos(0.5)) / 0.25
        assert ratio == pytest.approx(exact, rel=1e-3)

    def test_radius_out_of_range(self):
        fs = fs_background(Grid(12.0, 257))
        with pytest.raises(RadiusOutOfRange):
            volume_ratio(fs, 0.0, 0.0)
        with pytest.raises(RadiusOutOfRange):
            volume_ratio(fs, 0.0, 1.5)

    def test_small_ball_limit_perturbed(self):
        p = perturbed_profile(Grid(12.0, 1025), 0.1, "sech")
        assert volume_ratio(p, 0.3, 0.04) == pytest.approx(np.pi, rel=0.02)


class TestProduct:
    def test_scalar_additivity(self):
        g = Grid(14.0, 513)
        prod = product_compose(fs_background(g), fs_background(g))
        assert np.max(np.abs(prod.scalar() - 2.0)) <= 1e-5

    def test_diameter_pythagoras(self):
        g = Grid(20.0, 1024)
        prod = product_compose(fs_background(g), fs_background(g))
        assert prod.diameter == pytest.approx(np.sqrt(2.0) * np.pi,
                                              abs=1e-5)

    def test_volume_fubini(self):
        g = Grid(14.0, 513)
        prod = product_compose(fs_background(g),
                               perturbed_profile(g, 0.1, "sech"))
        assert abs(prod.volume_fubini() - prod.volume) <= 1e-8


class TestSerialization:
    def test_round_trip(self):
        p = perturbed_profile(Grid(9.0, 129), 0.05, "sech2")
        text = dump_profile(p)
        q = parse_profile(text, check_class=False)
        assert q.grid.same_as(p.grid)
        np.testing.assert_array_equal(q.w, p.w)

    def test_header_versioned(self):
        text = dump_profile(fs_background(Grid(9.0, 129)))
        assert text.splitlines()[0].startswith("# fanolab-profile-v1")
        with pytest.raises(ValueError):
            parse_profile("garbage\n1 2\n")
