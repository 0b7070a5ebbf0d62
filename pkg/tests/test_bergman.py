import math

import numpy as np
import pytest

from fanolab.bergman import (bergman_density, comparison_function,
                             fs_density_level, gram, gram_offdiagonal,
                             laplace_identity_residual,
                             norm_scaling_sweep, partial_c0_defect,
                             product_factorization_gap, section_sup_norms,
                             trace_integral, transition)
from fanolab.errors import (MismatchedSystems, ProfileClassError,
                            QuadratureFailure)
from fanolab.flow import state_from_potential
from fanolab.geometry import Grid, MetricProfile, curvature, fs_background

from conftest import perturbed_profile


def closed_form_gram(nu):
    """d_k = 4*pi*2^nu*k!(2nu-k)!/(2nu+1)! for the background metric."""
    return np.array([4.0 * np.pi * 2.0 ** nu * math.factorial(k)
                     * math.factorial(2 * nu - k)
                     / math.factorial(2 * nu + 1)
                     for k in range(2 * nu + 1)])


@pytest.fixture(scope="module")
def fs():
    return fs_background(Grid(20.0, 1025))


@pytest.fixture(scope="module")
def bumpy():
    p = perturbed_profile(Grid(20.0, 1025), 0.25, "sech2")
    return MetricProfile(p.grid, p.w / (p.area_integral() / 2.0),
                         check_class=True)


class TestGram:
    def test_background_closed_forms(self, fs):
        system = gram(fs, 1)
        expected = np.array([8.0, 4.0, 8.0]) * np.pi / 3.0
        assert np.max(np.abs(system.d - expected)) <= 1e-8

    def test_background_closed_forms_high_power(self, fs):
        for nu in (2, 3, 4):
            system = gram(fs, nu)
            assert np.max(np.abs(system.d - closed_form_gram(nu))) <= 1e-8

    def test_symmetry(self, fs):
        for nu in (1, 2, 3):
            d = gram(fs, nu).d
            np.testing.assert_allclose(d, d[::-1], rtol=1e-12)

    def test_refuses_off_class(self):
        g = Grid(20.0, 1025)
        doubled = MetricProfile(g, 2.0 * fs_background(g).w,
                                check_class=False)
        with pytest.raises(ProfileClassError):
            gram(doubled, 1)

    def test_refuses_bad_power(self, fs):
        with pytest.raises(ValueError):
            gram(fs, 0)

    def test_unconverged_tail(self):
        # a window too narrow for the slowest integrand tail
        g = Grid(4.0, 256)
        w = fs_background(g).w
        profile = MetricProfile(g, w, check_class=False)
        profile.require_canonical = lambda *a, **k: None
        with pytest.raises(QuadratureFailure):
            gram(profile, 8)

    def test_offdiagonal_vanishes(self, bumpy):
        for j, k in ((0, 1), (1, 3), (0, 4)):
            assert abs(gram_offdiagonal(bumpy, 2, j, k)) <= 1e-12


class TestDensityOfStates:
    def test_background_constant_level(self, fs):
        for nu in (1, 2):
            dens = bergman_density(gram(fs, nu))
            assert np.max(np.abs(dens.values - fs_density_level(nu))) <= 1e-6

    def test_trace_identity(self, fs, bumpy):
        for profile in (fs, bumpy):
            for nu in (1, 2, 3, 4):
                assert abs(trace_integral(gram(profile, nu))
                           - (2 * nu + 1)) <= 1e-6

    def test_basis_rescaling_invariance(self, bumpy):
        system = gram(bumpy, 2)
        base = bergman_density(system).values
        scales = np.array([3.0, 0.25, 7.0, 1.5, 0.125])
        rescaled = bergman_density(system, scales=scales).values
        assert np.max(np.abs(rescaled - base)) <= 1e-12


class TestTransition:
    def test_identity_transition(self, fs):
        system = gram(fs, 2)
        spec = transition(system, system)
        np.testing.assert_allclose(spec.lam, 1.0, atol=1e-14)
        assert spec.a == pytest.approx(1.0)

    def test_sorted_with_unit_top(self, fs, bumpy):
        spec = transition(gram(fs, 2), gram(bumpy, 2))
        lam = spec.lam_sorted
        assert np.all(np.diff(lam) >= 0.0)
        assert lam[-1] == pytest.approx(1.0, abs=1e-15)
        assert lam[0] > 0.0

    def test_mismatched_powers(self, fs):
        with pytest.raises(MismatchedSystems):
            transition(gram(fs, 1), gram(fs, 2))

    def test_lambda_floor_from_oscillation(self, standard_run):
        # lam_min exceeds the bound assembled from run oscillation data
        grid = standard_run.snapshots[0].grid
        nu = 2
        base = gram(MetricProfile(grid, standard_run.snapshots[0].profile.w),
                    nu)
        snap = standard_run.snapshots[2]   # t = 1 on the standard run
        system = gram(MetricProfile(grid, snap.profile.w), nu)
        spec = transition(base, system)
        defect = partial_c0_defect(snap, spec, base)
        x0 = comparison_function(transition(base, base), base)
        osc_phi = float(np.max(snap.phi) - np.min(snap.phi))
        osc_x0 = float(np.max(x0) - np.min(x0))
        floor = np.exp(-nu * (osc_phi + defect + osc_x0))
        assert spec.lam_min >= floor


class TestDefect:
    def test_background_start_is_zero(self, stationary_run):
        grid = stationary_run.snapshots[0].grid
        base = gram(MetricProfile(grid,
                                  stationary_run.snapshots[0].profile.w),
                    2)
        spec = transition(base, base)
        defect = partial_c0_defect(stationary_run.snapshots[0], spec, base)
        assert defect <= 1e-10

    def test_bounded_along_standard_run(self, standard_scan):
        rows = [r for r in standard_scan if r["nu"] == 2]
        early = max(r["defect"] for r in rows if r["t"] <= 1.0)
        assert max(r["defect"] for r in rows) <= 2.0 * early

    def test_requires_potential(self, fs):
        from fanolab.flow import FlowState
        system = gram(fs, 1)
        spec = transition(system, system)
        state = FlowState(0.0, fs, gauge="density-only")
        from fanolab.errors import MissingPotential
        with pytest.raises(MissingPotential):
            partial_c0_defect(state, spec, system)


class TestSectionNorms:
    def test_middle_section_peak(self, fs):
        norms = section_sup_norms(gram(fs, 1))
        assert norms.sup_abs[1] ** 2 == pytest.approx(3.0 / (8.0 * np.pi),
                                                      abs=1e-8)

    def test_gradient_symmetry(self, fs):
        norms = section_sup_norms(gram(fs, 1))
        assert norms.sup_grad[0] == pytest.approx(norms.sup_grad[2],
                                                  rel=1e-10)
        assert np.all(np.isfinite(norms.sup_grad))

    def test_sqrt_power_scaling(self, fs, bumpy):
        for profile in (fs, bumpy):
            sweep = norm_scaling_sweep(profile, range(1, 9))
            a0 = sweep[1]
            for nu, value in sweep.items():
                assert value <= 3.0 * a0 * np.sqrt(nu)


class TestLaplaceIdentity:
    def test_background_residual_small(self):
        fs_fine = fs_background(Grid(5.0, 5121))
        resid = laplace_identity_residual(gram(fs_fine, 1),
                                          curvature(fs_fine))
        assert resid <= 1e-6

    def test_second_order_refinement(self):
        resids = []
        for n in (513, 1025):
            prof = fs_background(Grid(12.0, n))
            resids.append(laplace_identity_residual(gram(prof, 1),
                                                    curvature(prof)))
        assert 3.5 <= resids[0] / resids[1] <= 4.5

    def test_second_order_perturbed(self):
        resids = []
        for n in (513, 1025):
            g = Grid(12.0, n)
            raw = perturbed_profile(g, 0.2, "sech2")
            prof = MetricProfile(g, raw.w / (raw.area_integral() / 2.0))
            resids.append(laplace_identity_residual(gram(prof, 2),
                                                    curvature(prof)))
        assert 3.5 <= resids[0] / resids[1] <= 4.5


class TestProduct:
    def test_density_factorizes(self):
        g = Grid(14.0, 257)
        fs_c = fs_background(g)
        raw = perturbed_profile(g, 0.2, "sech")
        bump = MetricProfile(g, raw.w / (raw.area_integral() / 2.0))
        for nu in (1, 2):
            gap = product_factorization_gap(gram(fs_c, nu), gram(bump, nu))
            assert gap <= 1e-10
