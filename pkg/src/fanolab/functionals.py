"""Potential-level functionals and run-level boundedness monitors.

All functionals are volume-normalized against the fixed class volume
V = 4*pi.  For circle-invariant potentials the Dirichlet energy is
(2*pi/V) Int phi'(s)^2 ds, and at complex dimension one the standard
energy functional

    I(phi) = (1/V) Int phi (dA_ref - dA_evolved)

equals the Dirichlet energy by parts, hence is nonnegative.

Boundedness along runs is decided by the two-window drift rule: a
series is flagged bounded when its maximum over the late half does not
exceed its maximum over the early half by more than the slack fraction
(default 10%).  The constants in the monitored inequalities are
existential, so acceptance must be drift-based rather than absolute.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._num import d1, trapz_tail
from .errors import InsufficientSnapshots, MissingPotential
from .geometry import TOTAL_VOLUME, fs_density


@dataclass
class FunctionalReport:
    sup_phi: float
    inf_phi: float
    osc_phi: float
    neg_mean_phi_evolved: float   # (1/V) Int (-phi) dA_evolved
    mean_phi_ref: float           # (1/V) Int phi dA_ref
    i_energy: float               # (1/V) Int phi (dA_ref - dA_evolved)
    dirichlet: float              # (1/V) Int |d phi|^2 against dA_ref


def dirichlet_energy(grid, values: np.ndarray) -> float:
    """(1/V) Int sqrt(-1) d f wedge dbar f for a circle-invariant f."""
    df = d1(np.asarray(values, dtype=float), grid.h)
    return 2.0 * np.pi * trapz_tail(df * df, grid.h) / TOTAL_VOLUME


def report(state) -> FunctionalReport:
    """All potential functionals of one snapshot."""
    phi = state.require_potential()
    grid = state.profile.grid
    h = grid.h
    w = state.profile.w
    w0 = fs_density(grid.s)
    two_pi = 2.0 * np.pi

    sup_phi = float(np.max(phi))
    inf_phi = float(np.min(phi))
    neg_mean = -two_pi * trapz_tail(phi * w, h) / TOTAL_VOLUME
    mean_ref = two_pi * trapz_tail(phi * w0, h) / TOTAL_VOLUME
    i_energy = two_pi * trapz_tail(phi * (w0 - w), h) / TOTAL_VOLUME
    return FunctionalReport(
        sup_phi=sup_phi,
        inf_phi=inf_phi,
        osc_phi=sup_phi - inf_phi,
        neg_mean_phi_evolved=neg_mean,
        mean_phi_ref=mean_ref,
        i_energy=i_energy,
        dirichlet=dirichlet_energy(grid, phi),
    )


def gradient_energy_gap(state, comparison: np.ndarray) -> float:
    """|Dirichlet(phi) - Dirichlet(X)| at one snapshot.

    X is the section-built comparison function; both energies ignore
    additive constants, so the gap is gauge-free.
    """
    phi = state.require_potential()
    grid = state.profile.grid
    return abs(dirichlet_energy(grid, phi)
               - dirichlet_energy(grid, np.asarray(comparison)))


# -- drift verdicts -----------------------------------------------------------

@dataclass
class DriftVerdict:
    name: str
    series: np.ndarray
    early_max: float
    late_max: float
    bounded: bool

    @property
    def empirical_constant(self) -> float:
        return float(np.max(self.series))


def two_window_verdict(times, values, name="series", slack=0.10,
                       atol=1e-8) -> DriftVerdict:
    """Bounded iff max over the late half <= max over the early half
    (up to the slack fraction and an absolute floor for all-zero runs)."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.size < 4:
        raise InsufficientSnapshots(
            f"{name}: drift verdict needs at least 4 samples")
    t_mid = 0.5 * (times[0] + times[-1])
    early = values[times <= t_mid]
    late = values[times > t_mid]
    if early.size == 0 or late.size == 0:
        raise InsufficientSnapshots(f"{name}: a drift window is empty")
    early_max = float(np.max(early))
    late_max = float(np.max(late))
    budget = early_max + slack * max(abs(early_max), atol)
    return DriftVerdict(name=name, series=values, early_max=early_max,
                        late_max=late_max, bounded=late_max <= budget)


def _reports(run) -> list[FunctionalReport]:
    return [report(s) for s in run.snapshots]


def inequality_monitor(run, delta: float = 1.0 / 3.0, slack: float = 0.10) -> dict:
    """Empirical constants of the monitored potential inequalities.

    For each inequality the series is (left side minus structural part);
    its max is the empirical constant and the two-window rule gives the
    verdict.  delta must stay below the reference alpha-invariant for
    the sup-versus-mean inequality to carry its meaning.
    """
    if len(run.snapshots) < 4:
        raise InsufficientSnapshots("inequality monitor needs >= 4 snapshots")
    reps = _reports(run)
    times = run.times
    n = 1

    sup_phi = np.array([r.sup_phi for r in reps])
    neg_mean = np.array([r.neg_mean_phi_evolved for r in reps])

    out = {}
    out["mean_vs_sup"] = two_window_verdict(
        times, neg_mean - n * sup_phi, "mean_vs_sup", slack)
    out["sup_vs_mean"] = two_window_verdict(
        times, sup_phi - (1.0 - delta) / delta * neg_mean, "sup_vs_mean",
        slack)
    if "perelman_sum" in run.series:
        out["perelman"] = two_window_verdict(
            times, run.series["perelman_sum"], "perelman", slack)
    return out


EQUIVALENCE_QUANTITIES = (
    "phi_c0", "sup_phi", "inf_phi", "mean_ref",
    "neg_mean_evolved", "i_energy", "osc_phi",
)

# quantities blind to the additive constant mode by construction
CONSTANT_INVARIANT = ("i_energy", "osc_phi")


def equivalence_suite(run, slack: float = 0.10) -> dict:
    """Boundedness verdicts for the seven equivalent potential quantities.

    Each quantity is monitored in absolute value ("uniformly bounded").
    The unstable constant mode drives the five constant-sensitive
    quantities together; the oscillation and the energy functional are
    invariant under adding constants to the potential, so they can never
    see that mode (their verdicts stay bounded on a pure constant-mode
    run, and agreement is asserted within the constant-sensitive five).
    """
    reps = _reports(run)
    times = run.times
    series = {
        "phi_c0": np.array([max(abs(r.sup_phi), abs(r.inf_phi))
                            for r in reps]),
        "sup_phi": np.array([abs(r.sup_phi) for r in reps]),
        "inf_phi": np.array([abs(r.inf_phi) for r in reps]),
        "mean_ref": np.array([abs(r.mean_phi_ref) for r in reps]),
        "neg_mean_evolved": np.array([abs(r.neg_mean_phi_evolved)
                                      for r in reps]),
        "i_energy": np.array([abs(r.i_energy) for r in reps]),
        "osc_phi": np.array([r.osc_phi for r in reps]),
    }
    return {name: two_window_verdict(times, vals, name, slack)
            for name, vals in series.items()}


def verdicts_agree(verdicts: dict, names) -> bool:
    flags = [verdicts[n].bounded for n in names]
    return all(flags) or not any(flags)
