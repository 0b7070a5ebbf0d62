import numpy as np
import pytest

from fanolab.bergman import bergman_scan
from fanolab.flow import FlowConfig, FlowState, run_flow, state_from_potential
from fanolab.geometry import Grid, MetricProfile, fs_density


def perturbed_profile(grid: Grid, amplitude: float = 0.3,
                      shape: str = "sech2") -> MetricProfile:
    s = grid.s
    bump = 1.0 / np.cosh(s) ** 2 if shape == "sech2" else 1.0 / np.cosh(s)
    w = fs_density(s) * (1.0 + amplitude * bump)
    return MetricProfile(grid, w, check_class=False)


@pytest.fixture(scope="session")
def standard_run():
    """The acceptance run: amplitude 0.3 to T = 20 at L = 20, N = 1024."""
    grid = Grid(20.0, 1024)
    init = FlowState(0.0, perturbed_profile(grid), gauge="density-only")
    cfg = FlowConfig(L=20.0, n=1024, T=20.0, scheme="imex", snapshot_dt=0.5)
    return run_flow(cfg, init)


@pytest.fixture(scope="session")
def standard_scan(standard_run):
    return bergman_scan(standard_run.snapshots, nus=(1, 2, 3))


@pytest.fixture(scope="session")
def stationary_run():
    cfg = FlowConfig(L=20.0, n=1024, T=5.0, scheme="imex", snapshot_dt=0.5)
    return run_flow(cfg)


@pytest.fixture(scope="session")
def constant_mode_run():
    """Raw-gauge run from the pure constant potential: phi(t) = e^t."""
    grid = Grid(20.0, 512)
    init = state_from_potential(grid, np.ones(grid.n), gauge="raw")
    cfg = FlowConfig(L=20.0, n=512, T=3.0, scheme="imex", gauge="raw",
                     snapshot_dt=0.25, imex_dt=0.001)
    return run_flow(cfg, init)
