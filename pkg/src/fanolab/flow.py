"""Normalized Ricci flow of circle-invariant sphere metrics.

Two equivalent reductions of the flow in the fixed canonical class:

  density form    dw/dt = (log(w/w0))'' + (w - w0)
  potential form  dphi/dt = log((w0 + phi'')/w0) + phi      (w = w0 + phi'')

The density form is gauge-free (no additive constant) and is the
production path.  The potential form carries the unstable constant mode
c e^t; the "shoot" gauge kills it by bisecting the initial additive
constant until the mean of dphi/dt at the horizon is negligible.

Time stepping: explicit RK4 / Euler honor the parabolic bound
dt <= safety * h^2 * min(w) / 2, which near the poles (tiny w) makes
explicit stepping affordable only for short desk-scale runs.  The
default production scheme ("imex") is a backward-Euler step solved by
Newton iteration with a tridiagonal Jacobian, unconditionally stable and
sharing the same spatial operators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import solve_banded

from ._num import (cumtrapz0, d2, d2_interior, d2_neumann, lstsq_slope,
                   trapz, trapz_tail)
from .errors import (InsufficientSnapshots, MissingPotential, PositivityLoss,
                     ShootFailure, StabilityViolation)
from .geometry import (Grid, MetricProfile, curvature, fs_density,
                       fs_background)

GAUGES = ("raw", "shoot", "density-only")
SCHEMES = ("rk4", "euler", "imex")


@dataclass
class FlowState:
    """Flow unknown at one time: density, optional potential, gauge tag."""

    t: float
    profile: MetricProfile
    phi: np.ndarray | None = None
    phidot: np.ndarray | None = None
    gauge: str = "density-only"

    @property
    def grid(self) -> Grid:
        return self.profile.grid

    def require_potential(self) -> np.ndarray:
        if self.phi is None:
            raise MissingPotential("state carries no Kahler potential")
        return self.phi


def state_from_potential(grid: Grid, phi: np.ndarray, t: float = 0.0,
                         gauge: str = "raw") -> FlowState:
    phi = np.asarray(phi, dtype=float)
    w = fs_density(grid.s) + d2_neumann(phi, grid.h)
    _check_positive(w, grid)
    profile = MetricProfile(grid, w, check_class=False)
    return FlowState(t=t, profile=profile, phi=phi, gauge=gauge)


def reconstruct_potential(profile: MetricProfile) -> np.ndarray:
    """Double integration of w - w0 with phi'(-L) = 0 and phi(-L) = 0."""
    h = profile.grid.h
    dev = profile.deviation()
    return cumtrapz0(cumtrapz0(dev, h), h)


@dataclass
class FlowConfig:
    L: float = 20.0
    n: int = 1024
    T: float = 20.0
    scheme: str = "imex"
    gauge: str = "density-only"
    dt: float | None = None        # None: stability bound (explicit) / imex_dt
    imex_dt: float = 0.01
    snapshot_dt: float = 0.5
    safety: float = 0.5
    shoot_tol: float = 1e-8
    project_volume: bool = True
    track_potential: bool = True

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.gauge not in GAUGES:
            raise ValueError(f"unknown gauge {self.gauge!r}")

    @property
    def grid(self) -> Grid:
        return Grid(self.L, self.n)


def stability_bound(w: np.ndarray, h: float, safety: float = 0.5) -> float:
    """Parabolic step bound safety * h^2 * min(w) / 2 for explicit schemes."""
    return safety * h * h * float(np.min(w)) / 2.0


def _check_positive(w, grid, t=None):
    if np.all(w > 0.0):
        return
    i = int(np.argmin(w))
    when = "" if t is None else f" at t={t:.6g}"
    raise PositivityLoss(
        f"density lost positivity{when}: w({grid.s[i]:.4f}) = {w[i]:.3e}",
        index=i, s=float(grid.s[i]), value=float(w[i]))


# -- density form -------------------------------------------------------------

def _density_rhs(w, w0, h):
    rhs = d2_interior(np.log(w / w0), h)
    rhs[1:-1] += w[1:-1] - w0[1:-1]
    return rhs


def _pin(w, w0):
    w[0] = w0[0]
    w[-1] = w0[-1]
    return w


def _explicit_advance(y, dt, rhs, scheme):
    if scheme == "euler":
        return y + dt * rhs(y)
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _newton_banded(y0, dt, rhs, jac_diag_coeff, grid, t, positivity=None,
                   pinned=True, coeff_at_row=False):
    """Backward-Euler solve y = y0 + dt*rhs(y) with tridiagonal Newton.

    jac_diag_coeff(y) returns the pointwise factor c(y) of the diffusive
    part of the rhs Jacobian.  The density form differentiates
    D2(log y), whose stencil couplings carry the factor of the neighbor
    sample; the potential form differentiates c(y)*D2(y), whose
    couplings carry the row factor (coeff_at_row=True).  With
    pinned=True the two edge rows hold the edge values fixed (density
    form); otherwise the edge rows keep the identity part of the
    equation (potential form, where only the second difference vanishes
    at the edges).
    """
    n = grid.n
    h2 = grid.h ** 2
    y = y0.copy()
    for _ in range(40):
        g = y - y0 - dt * rhs(y)
        c = jac_diag_coeff(y)
        ab = np.zeros((3, n))
        ab[1, :] = 1.0 - dt            # diagonal of I - dt*(c*D2 + I)
        ab[1, 1:-1] += dt * 2.0 * c[1:-1] / h2
        if coeff_at_row:
            ab[0, 2:] = -dt * c[1:-1] / h2      # A[i, i+1], factor at i
            ab[2, :-2] = -dt * c[1:-1] / h2     # A[i, i-1], factor at i
        else:
            ab[0, 2:] = -dt * c[2:] / h2        # A[i, i+1], factor at i+1
            ab[2, :-2] = -dt * c[:-2] / h2      # A[i, i-1], factor at i-1
        if pinned:
            ab[1, 0] = 1.0
            ab[1, -1] = 1.0
            g[0] = y[0] - y0[0]
            g[-1] = y[-1] - y0[-1]
        else:
            # zero-slope edge rows of the potential operator
            ab[1, 0] += dt * 2.0 * c[0] / h2
            ab[1, -1] += dt * 2.0 * c[-1] / h2
            ab[0, 1] = -dt * 2.0 * c[0] / h2
            ab[2, -2] = -dt * 2.0 * c[-1] / h2
        step = solve_banded((1, 1), ab, g)
        lam = 1.0
        if positivity is not None:
            while lam > 1e-10 and not positivity(y - lam * step):
                lam *= 0.5
            if lam <= 1e-10:
                break
        y = y - lam * step
        # step-based convergence; full steps refine the solve even when
        # the tail rows make the Jacobian ill-conditioned
        if lam == 1.0 and np.max(np.abs(step)) < 1e-12 * max(
                1.0, float(np.max(np.abs(y)))):
            return y
    raise PositivityLoss(f"implicit solve failed to converge at t={t:.6g}",
                         index=None)


def step_density(state: FlowState, dt: float, scheme: str = "rk4",
                 safety: float = 0.5) -> FlowState:
    """One time step of the density-form flow; edges pinned to background."""
    grid = state.grid
    w0 = fs_density(grid.s)
    if scheme in ("rk4", "euler"):
        bound = stability_bound(state.profile.w, grid.h, safety)
        if dt > bound * (1.0 + 1e-12):
            raise StabilityViolation(
                f"dt = {dt:.3e} exceeds parabolic bound {bound:.3e}")
    w = state.profile.w.copy()
    _pin(w, w0)

    if scheme in ("rk4", "euler"):

        def rhs(y):
            _check_positive(y, grid, state.t)
            return _density_rhs(y, w0, grid.h)

        w_new = _explicit_advance(w, dt, rhs, scheme)
    elif scheme == "imex":
        def rhs(y):
            return _density_rhs(y, w0, grid.h)

        w_new = _newton_banded(
            w, dt, rhs, lambda y: 1.0 / y, grid, state.t,
            positivity=lambda y: bool(np.all(y > 0.0)))
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    _pin(w_new, w0)
    _check_positive(w_new, grid, state.t + dt)
    profile = MetricProfile(grid, w_new, check_class=False)
    return FlowState(t=state.t + dt, profile=profile, gauge=state.gauge)


# -- potential form ------------------------------------------------------------

def _potential_rhs(phi, w0, h, grid, t=None):
    lap = d2_neumann(phi, h)
    ratio = lap / w0
    if np.any(ratio <= -1.0):
        i = int(np.argmin(ratio))
        raise PositivityLoss(
            f"potential step lost Kahler positivity: "
            f"w({grid.s[i]:.4f}) = {(w0 + lap)[i]:.3e}",
            index=i, s=float(grid.s[i]), value=float((w0 + lap)[i]))
    return np.log1p(ratio) + phi


def step_potential(state: FlowState, dt: float, scheme: str = "rk4",
                   safety: float = 0.5) -> FlowState:
    """One time step of the potential-form flow (reference has u = 0)."""
    if state.gauge not in ("raw", "shoot"):
        raise MissingPotential(
            f"potential stepping needs gauge raw/shoot, got {state.gauge!r}")
    phi = state.require_potential().copy()
    grid = state.grid
    w0 = fs_density(grid.s)

    def rhs(p):
        return _potential_rhs(p, w0, grid.h, grid, state.t)

    if scheme in ("rk4", "euler"):
        w = w0 + d2_neumann(phi, grid.h)
        bound = stability_bound(w, grid.h, safety)
        if dt > bound * (1.0 + 1e-12):
            raise StabilityViolation(
                f"dt = {dt:.3e} exceeds parabolic bound {bound:.3e}")
        phi_new = _explicit_advance(phi, dt, rhs, scheme)
    elif scheme == "imex":
        def coeff(p):
            return 1.0 / (w0 + d2_neumann(p, grid.h))

        def positive(p):
            return bool(np.all(w0 + d2_neumann(p, grid.h) > 0.0))

        phi_new = _newton_banded(phi, dt, rhs, coeff, grid, state.t,
                                 positivity=positive, pinned=False,
                                 coeff_at_row=True)
    else:
        raise ValueError(f"unknown scheme {scheme!r}")

    new = state_from_potential(grid, phi_new, t=state.t + dt,
                               gauge=state.gauge)
    new.phidot = _potential_rhs(phi_new, w0, grid.h, grid)
    return new


# -- run driver ----------------------------------------------------------------

@dataclass
class RunRecord:
    config: FlowConfig
    times: np.ndarray
    snapshots: list
    series: dict
    termination: str = "completed"
    shoot_constant: float | None = None

    def decay_rate(self, t_min: float = 5.0, t_max: float | None = None) -> float:
        """Least-squares slope of log max|w - w0| over [t_min, t_max]."""
        t_max = self.config.T if t_max is None else t_max
        mask = (self.times >= t_min) & (self.times <= t_max)
        if mask.sum() < 2:
            raise InsufficientSnapshots("decay window has fewer than 2 samples")
        dev = np.maximum(self.series["max_dev"][mask], 1e-300)
        return lstsq_slope(self.times[mask], np.log(dev))


def _step_count(total, dt):
    return max(1, int(math.ceil(total / dt - 1e-12)))


def run_flow(config: FlowConfig, initial: FlowState | None = None,
             geometry_every: bool = True) -> RunRecord:
    """Integrate to the horizon, recording snapshots at the cadence.

    Density-only gauge evolves the density and reconstructs the
    potential; raw/shoot gauges evolve the potential itself.  The
    recorded potential of a shoot run has its initial additive constant
    fixed by bisection so the mean of dphi/dt at the horizon is below
    shoot_tol.
    """
    grid = config.grid
    w0 = fs_density(grid.s)
    if initial is None:
        initial = FlowState(0.0, fs_background(grid), gauge=config.gauge)

    shoot_c = None
    if config.gauge == "shoot":
        phi0 = initial.require_potential()
        shoot_c = _shoot_constant(config, phi0)
        initial = state_from_potential(grid, phi0 + shoot_c, t=initial.t,
                                       gauge="shoot")

    explicit = config.scheme in ("rk4", "euler")
    target_vol = trapz(w0, grid.h)
    # class projection direction: decays like the background squared, so
    # adjustments vanish at the pinned edges instead of kinking them
    proj_dir = w0 * w0
    proj_norm = trapz(proj_dir, grid.h)

    def project(w):
        w += ((target_vol - trapz(w, grid.h)) / proj_norm) * proj_dir
        return w

    state = initial
    if config.gauge == "density-only":
        w = state.profile.w.copy()
        _pin(w, w0)
        if config.project_volume:
            project(w)
            _check_positive(w, grid, state.t)
        state = FlowState(state.t, MetricProfile(grid, w, check_class=False),
                          gauge="density-only")

    n_snaps = _step_count(config.T, config.snapshot_dt)
    snap_times = [min(config.T, (j + 1) * config.snapshot_dt)
                  for j in range(n_snaps)]

    times = [state.t]
    snapshots = [_with_potential(state, config)]
    rows = [_series_row(snapshots[-1], w0, geometry_every)]
    termination = "completed"

    t = state.t
    try:
        for t_next in snap_times:
            while t < t_next - 1e-12:
                if explicit:
                    bound = stability_bound(_current_w(state, w0, grid),
                                            grid.h, config.safety)
                    dt = config.dt if config.dt is not None else 0.95 * bound
                else:
                    dt = config.dt if config.dt is not None else config.imex_dt
                dt = min(dt, t_next - t)
                state = _advance(state, dt, config)
                t = state.t
                if config.gauge == "density-only" and config.project_volume:
                    project(state.profile.w)
            snap = _with_potential(state, config)
            times.append(t)
            snapshots.append(snap)
            rows.append(_series_row(snap, w0, geometry_every))
    except PositivityLoss as exc:
        termination = f"positivity-loss: {exc}"

    series = {key: np.array([r[key] for r in rows]) for key in rows[0]}
    return RunRecord(config=config, times=np.array(times),
                     snapshots=snapshots, series=series,
                     termination=termination, shoot_constant=shoot_c)


def _current_w(state, w0, grid):
    if state.gauge == "density-only":
        return state.profile.w
    return w0 + d2_neumann(state.phi, grid.h)


def _advance(state, dt, config):
    if config.gauge == "density-only":
        return step_density(state, dt, config.scheme, config.safety)
    return step_potential(state, dt, config.scheme, config.safety)


def _with_potential(state, config):
    if state.phi is not None or not config.track_potential:
        return state
    phi = reconstruct_potential(state.profile)
    return FlowState(state.t, state.profile, phi=phi, gauge=state.gauge)


def _series_row(state, w0, geometry_every):
    w = state.profile.w
    h = state.grid.h
    row = {
        "t": state.t,
        "min_w": float(np.min(w)),
        "max_dev": float(np.max(np.abs(w - w0))),
        "volume": 2.0 * np.pi * trapz_tail(w, h),
    }
    if state.phi is not None:
        row["osc_phi"] = float(np.max(state.phi) - np.min(state.phi))
        row["sup_phi"] = float(np.max(state.phi))
        row["gauge_const"] = float(state.phi[0])
    else:
        row["osc_phi"] = math.nan
        row["sup_phi"] = math.nan
        row["gauge_const"] = math.nan
    if geometry_every:
        rep = curvature(state.profile)
        row["diam"] = rep.diameter
        row["sup_R"] = rep.sup_scalar
        row["sup_u"] = rep.sup_potential
        row["perelman_sum"] = rep.perelman_sum
    return row


def _shoot_constant(config, phi0):
    """Bisect the initial additive constant until |mean phidot(T)| is tiny."""
    base = replace(config, gauge="raw", track_potential=True)

    def final_mean(c):
        return _shoot_run(base, phi0 + c)

    m0 = final_mean(0.0)
    m1 = final_mean(1.0)
    slope = m1 - m0
    if slope == 0.0:
        raise ShootFailure("horizon mean is insensitive to the constant")
    c_star = -m0 / slope
    lo, hi = c_star - 0.5, c_star + 0.5
    f_lo, f_hi = final_mean(lo), final_mean(hi)
    tries = 0
    while f_lo * f_hi > 0.0:
        lo -= 0.5
        hi += 0.5
        f_lo, f_hi = final_mean(lo), final_mean(hi)
        tries += 1
        if tries > 20:
            raise ShootFailure(
                "bisection bracket not found for the initial constant")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = final_mean(mid)
        if abs(f_mid) < config.shoot_tol or (hi - lo) < 1e-15:
            return mid
        if f_lo * f_mid <= 0.0:
            hi = mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)


def _shoot_run(config, phi0):
    grid = config.grid
    state = state_from_potential(grid, phi0, gauge="raw")
    w0 = fs_density(grid.s)
    t = 0.0
    while t < config.T - 1e-12:
        if config.scheme in ("rk4", "euler"):
            w = w0 + d2_neumann(state.phi, grid.h)
            dt = (config.dt if config.dt is not None
                  else 0.95 * stability_bound(w, grid.h, config.safety))
        else:
            dt = config.dt if config.dt is not None else config.imex_dt
        state = step_potential(state, min(dt, config.T - t),
                               config.scheme, config.safety)
        t = state.t
    return float(np.mean(state.phidot))


# -- consistency monitor -------------------------------------------------------

def scalar_evolution_residual(run: RunRecord, interior: int = 4) -> np.ndarray:
    """Max-norm residual of dR/dt = Lap R + R^2 - R per snapshot interval.

    The time derivative is the centered difference across the interval;
    the right side is averaged over its endpoints, so the residual is
    O(dt_snap^2) + O(h^2) and the spatial part dominates when snapshots
    are recorded densely enough.  The outermost `interior` samples are
    excluded: the pinned window edges carry a truncation boundary layer
    that does not satisfy the continuum identity.
    """
    snaps = run.snapshots
    if len(snaps) < 2:
        raise InsufficientSnapshots(
            "scalar evolution residual needs at least two snapshots")
    h = snaps[0].grid.h
    sl = slice(interior, -interior if interior else None)
    reports = [curvature(s.profile) for s in snaps]
    out = []
    for j in range(len(snaps) - 1):
        dt = snaps[j + 1].t - snaps[j].t
        r0, r1 = reports[j].scalar, reports[j + 1].scalar
        w_mid0, w_mid1 = snaps[j].profile.w, snaps[j + 1].profile.w
        rhs0 = d2(r0, h) / w_mid0 + r0 * r0 - r0
        rhs1 = d2(r1, h) / w_mid1 + r1 * r1 - r1
        resid = (r1 - r0) / dt - 0.5 * (rhs0 + rhs1)
        out.append(float(np.max(np.abs(resid[sl]))))
    return np.array(out)
