import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fanolab.errors import InsufficientSnapshots, MissingPotential
from fanolab.flow import FlowState, state_from_potential
from fanolab.functionals import (CONSTANT_INVARIANT, EQUIVALENCE_QUANTITIES,
                                 dirichlet_energy, equivalence_suite,
                                 gradient_energy_gap, inequality_monitor,
                                 report, two_window_verdict, verdicts_agree)
from fanolab.geometry import Grid, fs_background


GRID = Grid(20.0, 1025)


def make_state(phi):
    return state_from_potential(GRID, phi, gauge="raw")


class TestReport:
    def test_zero_potential(self):
        rep = report(make_state(np.zeros(GRID.n)))
        for field in ("sup_phi", "inf_phi", "osc_phi",
                      "neg_mean_phi_evolved", "mean_phi_ref", "i_energy",
                      "dirichlet"):
            assert getattr(rep, field) == pytest.approx(0.0, abs=1e-12)

    def test_constant_potential(self):
        rep = report(make_state(np.full(GRID.n, 2.5)))
        assert rep.sup_phi == rep.inf_phi == pytest.approx(2.5)
        assert rep.osc_phi == 0.0
        assert rep.i_energy == pytest.approx(0.0, abs=1e-12)
        assert rep.neg_mean_phi_evolved == pytest.approx(-2.5, abs=1e-6)
        assert rep.mean_phi_ref == pytest.approx(2.5, abs=1e-6)

    def test_energy_is_dirichlet_at_n1(self):
        # integration by parts identity; second order in the grid, so
        # checked at a fine grid and for the h^2 rate
        gaps = []
        for n in (8193, 16385, 32769):
            g = Grid(20.0, n)
            phi = 0.2 / np.cosh(g.s) ** 2
            rep = report(state_from_potential(g, phi, gauge="raw"))
            gaps.append(abs(rep.i_energy - rep.dirichlet))
        assert gaps[-1] <= 1e-8
        assert 3.5 <= gaps[0] / gaps[1] <= 4.5

    def test_energy_nonnegative(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            amp = rng.uniform(0.01, 0.3)
            width = rng.uniform(0.5, 3.0)
            phi = amp * np.exp(-(GRID.s / width) ** 2)
            rep = report(make_state(phi))
            assert rep.i_energy >= -1e-10

    @given(shift=st.floats(-5.0, 5.0, allow_nan=False))
    @settings(max_examples=20, deadline=None)
    def test_oscillation_constant_invariance(self, shift):
        phi = 0.1 / np.cosh(GRID.s)
        base = report(make_state(phi)).osc_phi
        shifted = report(make_state(phi + shift)).osc_phi
        assert abs(base - shifted) <= 1e-12

    def test_requires_potential(self):
        with pytest.raises(MissingPotential):
            report(FlowState(0.0, fs_background(GRID),
                             gauge="density-only"))


class TestGradientGap:
    def test_constant_shift_is_invisible(self):
        phi = 0.15 * np.exp(-GRID.s ** 2 / 2.0)
        state = make_state(phi)
        assert gradient_energy_gap(state, phi + 1.7) <= 1e-12

    def test_zero_for_matching_profiles(self):
        state = make_state(np.zeros(GRID.n))
        assert gradient_energy_gap(state, np.zeros(GRID.n)) == 0.0

    def test_bounded_on_standard_run(self, standard_run):
        from fanolab.bergman import comparison_function, gram, transition
        from fanolab.geometry import MetricProfile

        grid = standard_run.snapshots[0].grid
        base = gram(MetricProfile(grid,
                                  standard_run.snapshots[0].profile.w), 2)
        gaps = []
        for snap in standard_run.snapshots:
            system = gram(MetricProfile(grid, snap.profile.w), 2)
            x = comparison_function(transition(base, system), base)
            gaps.append(gradient_energy_gap(snap, x))
        gaps = np.array(gaps)
        early = gaps[standard_run.times <= 1.0].max()
        assert gaps.max() <= 2.0 * early


class TestVerdicts:
    def test_two_window_bounded_constant(self):
        v = two_window_verdict(np.linspace(0, 10, 21), np.ones(21))
        assert v.bounded

    def test_two_window_unbounded_growth(self):
        t = np.linspace(0, 10, 21)
        v = two_window_verdict(t, np.exp(t))
        assert not v.bounded

    def test_needs_samples(self):
        with pytest.raises(InsufficientSnapshots):
            two_window_verdict([0.0, 1.0], [1.0, 1.0])

    def test_stationary_monitors_zero(self, stationary_run):
        monitors = inequality_monitor(stationary_run)
        for name, verdict in monitors.items():
            assert verdict.bounded, name
        for name in ("mean_vs_sup", "sup_vs_mean"):
            assert abs(monitors[name].empirical_constant) <= 1e-6

    def test_standard_run_bounded(self, standard_run):
        monitors = inequality_monitor(standard_run)
        assert all(v.bounded for v in monitors.values())
        perelman = standard_run.series["perelman_sum"]
        assert perelman.max() <= 1.5 * perelman[0]

    def test_equivalence_agreement_on_converging_run(self, standard_run):
        verdicts = equivalence_suite(standard_run)
        assert verdicts_agree(verdicts, EQUIVALENCE_QUANTITIES)
        assert all(v.bounded for v in verdicts.values())

    def test_constant_mode_run_divergence(self, constant_mode_run):
        verdicts = equivalence_suite(constant_mode_run)
        sensitive = [q for q in EQUIVALENCE_QUANTITIES
                     if q not in CONSTANT_INVARIANT]
        # the unstable constant mode drives all five constant-sensitive
        # quantities together
        assert all(not verdicts[q].bounded for q in sensitive)
        assert verdicts_agree(verdicts, sensitive)
        # oscillation and the energy functional cannot see a constant
        # mode by construction and stay bounded
        for name in CONSTANT_INVARIANT:
            assert verdicts[name].bounded
