"""Anticanonical section systems, their density of states, and monitors.

On the model sphere the sections of the nu-th anticanonical power are
the monomials z^k, k = 0..2nu, and rotation invariance makes every Gram
matrix diagonal.  With the cylinder coordinate s = log|z|^2:

    |z^k|^2_{h^nu}      = e^{(k-nu)s} w(s)^nu
    Gram weight          d_k = 2*pi Int e^{(k-nu)s} w(s)^{nu+1} ds
    density of states    F(s) = (1/nu) log Sum_k e^{(k-nu)s} w^nu / d_k
    |grad z^k|^2_{h^nu} = e^{(k-nu)s} w^{nu-1} (k - nu + nu (log w)')^2 / d_k

F is independent of the orthonormal basis choice; for the background
metric homogeneity forces F = (1/nu) log((2nu+1)/V) at every point.

Comparing the time-t system to the time-0 one through the diagonal
rescaling factors lambda_k = sqrt(d_k(0)/d_k(t)) (largest normalized to
one) produces the comparison function

    X(s) = (1/nu) log Sum_k lambda_k^2 e^{(k-nu)s} w0(s)^nu / d_k(0)

and the sup-normalized gap between phi - sup phi and X - sup X is the
partial C0 defect monitored along runs; both normalizations drop the
additive constants so the defect is gauge-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._num import d1, d2, trapz_tail
from .errors import GridMismatch, MismatchedSystems
from .geometry import GeometryReport, MetricProfile, fs_density

TRACE_TOL = 1e-10


@dataclass
class SectionSystem:
    """Monomial basis of the nu-th power with its diagonal Gram weights."""

    nu: int
    profile: MetricProfile
    d: np.ndarray

    @property
    def size(self) -> int:
        """Number of basis sections, 2nu + 1."""
        return 2 * self.nu + 1

    def log_sq_norms(self, scales: np.ndarray | None = None) -> np.ndarray:
        """log |S_k|^2 samples, shape (2nu+1, n); rows are basis elements.

        scales optionally rescales each basis vector (the Gram weights
        rescale with them, so densities built from the rows are
        invariant).
        """
        grid = self.profile.grid
        k = np.arange(self.size, dtype=float)
        d = self.d if scales is None else self.d * np.asarray(scales) ** 2
        out = ((k[:, None] - self.nu) * grid.s[None, :]
               + self.nu * np.log(self.profile.w)[None, :]
               - np.log(d)[:, None])
        if scales is not None:
            out += 2.0 * np.log(np.asarray(scales))[:, None]
        return out


def gram(profile: MetricProfile, nu: int) -> SectionSystem:
    """Diagonal Gram weights d_k by tail-completed quadrature.

    Refuses profiles off the canonical class and raises
    QuadratureFailure when an integrand tail has not converged inside
    the window.
    """
    if nu < 1:
        raise ValueError("tensor power nu must be >= 1")
    profile.require_canonical()
    grid = profile.grid
    logw = np.log(profile.w)
    d = np.empty(2 * nu + 1)
    for k in range(2 * nu + 1):
        f = np.exp((k - nu) * grid.s + (nu + 1) * logw)
        d[k] = 2.0 * np.pi * trapz_tail(f, grid.h, strict=True)
    return SectionSystem(nu=nu, profile=profile, d=d)


def gram_offdiagonal(profile: MetricProfile, nu: int, j: int, k: int,
                     n_theta: int = 64) -> complex:
    """Numeric <S_j, S_k> inner product including the angular integral.

    Exactly zero for j != k by rotation symmetry; evaluating the theta
    quadrature explicitly spot-checks the diagonal reduction.
    """
    grid = profile.grid
    logw = np.log(profile.w)
    radial = np.exp(0.5 * (j + k - 2 * nu) * grid.s + (nu + 1) * logw)
    theta = np.linspace(0.0, 2.0 * np.pi, n_theta, endpoint=False)
    angular = np.exp(1j * (j - k) * theta).mean()
    return complex(2.0 * np.pi * trapz_tail(radial, grid.h) * angular)


@dataclass
class BergmanDensity:
    """Samples of the log density of states F over the grid."""

    nu: int
    values: np.ndarray

    @property
    def inf(self) -> float:
        return float(np.min(self.values))

    @property
    def sup(self) -> float:
        return float(np.max(self.values))


def _logsumexp_rows(log_terms: np.ndarray) -> np.ndarray:
    m = np.max(log_terms, axis=0)
    return m + np.log(np.sum(np.exp(log_terms - m[None, :]), axis=0))


def bergman_density(system: SectionSystem,
                    scales: np.ndarray | None = None) -> BergmanDensity:
    lse = _logsumexp_rows(system.log_sq_norms(scales))
    return BergmanDensity(nu=system.nu, values=lse / system.nu)


def fs_density_level(nu: int) -> float:
    """Background value of F: (1/nu) log((2nu+1)/(4*pi))."""
    return float(np.log((2 * nu + 1) / (4.0 * np.pi)) / nu)


def trace_integral(system: SectionSystem) -> float:
    """Int e^{nu F} dA, equal to the basis count 2nu + 1 in the continuum."""
    grid = system.profile.grid
    lse = _logsumexp_rows(system.log_sq_norms())
    f = np.exp(lse) * system.profile.w
    return 2.0 * np.pi * trapz_tail(f, grid.h)


# -- transition spectra --------------------------------------------------------

@dataclass
class TransitionSpectrum:
    """Diagonal part of the change of orthonormal basis between two times.

    lam keeps basis order (index k), lam_sorted is the ascending view
    with the largest entry normalized to one; a is the removed overall
    factor.
    """

    nu: int
    lam: np.ndarray
    a: float

    @property
    def lam_sorted(self) -> np.ndarray:
        return np.sort(self.lam)

    @property
    def lam_min(self) -> float:
        return float(np.min(self.lam))


def transition(system_t0: SectionSystem,
               system_t: SectionSystem) -> TransitionSpectrum:
    if system_t0.nu != system_t.nu:
        raise MismatchedSystems(
            f"tensor powers differ: {system_t0.nu} vs {system_t.nu}")
    if not system_t0.profile.grid.same_as(system_t.profile.grid):
        raise MismatchedSystems("systems live on different grids")
    raw = np.sqrt(system_t0.d / system_t.d)
    a = float(np.max(raw))
    return TransitionSpectrum(nu=system_t0.nu, lam=raw / a, a=a)


def comparison_function(spectrum: TransitionSpectrum,
                        system_t0: SectionSystem) -> np.ndarray:
    """X = (1/nu) log Sum_k lambda_k^2 |S_k(0)|^2 on the grid."""
    if spectrum.nu != system_t0.nu:
        raise MismatchedSystems(
            f"tensor powers differ: {spectrum.nu} vs {system_t0.nu}")
    log_terms = system_t0.log_sq_norms() + \
        2.0 * np.log(spectrum.lam)[:, None]
    return _logsumexp_rows(log_terms) / spectrum.nu


def partial_c0_defect(state, spectrum: TransitionSpectrum,
                      system_t0: SectionSystem) -> float:
    """Sup-norm gap between phi - sup phi and X - sup X at one snapshot.

    Both terms are sup-normalized, so the defect ignores the additive
    gauge constants of both the potential and the comparison function;
    boundedness of the defect along a run is the tamed-flow content.
    """
    phi = state.require_potential()
    if not state.profile.grid.same_as(system_t0.profile.grid):
        raise GridMismatch("state and section system grids differ")
    x = comparison_function(spectrum, system_t0)
    return float(np.max(np.abs((phi - phi.max()) - (x - x.max()))))


# -- pointwise norms and identities ---------------------------------------------

@dataclass
class SectionNorms:
    nu: int
    sup_abs: np.ndarray     # per-k sup |S_k|
    sup_grad: np.ndarray    # per-k sup |grad S_k|

    @property
    def max_sup_abs(self) -> float:
        return float(np.max(self.sup_abs))

    @property
    def max_sup_grad(self) -> float:
        return float(np.max(self.sup_grad))


def section_sup_norms(system: SectionSystem) -> SectionNorms:
    grid = system.profile.grid
    w = system.profile.w
    nu = system.nu
    log_sq = system.log_sq_norms()
    sup_abs = np.exp(0.5 * np.max(log_sq, axis=1))

    logw = np.log(w)
    dlogw = d1(logw, grid.h)
    k = np.arange(system.size, dtype=float)[:, None]
    log_grad_sq = ((k - nu) * grid.s[None, :] + (nu - 1) * logw[None, :]
                   - np.log(system.d)[:, None])
    amp = (k - nu + nu * dlogw[None, :]) ** 2
    grad_sq = np.exp(log_grad_sq) * amp
    sup_grad = np.sqrt(np.max(grad_sq, axis=1))
    return SectionNorms(nu=nu, sup_abs=sup_abs, sup_grad=sup_grad)


def norm_scaling_sweep(profile: MetricProfile, nus=range(1, 9)) -> dict:
    """max_k sup|S_k| per tensor power, for the sqrt(nu) scaling check."""
    return {nu: section_sup_norms(gram(profile, nu)).max_sup_abs
            for nu in nus}


def laplace_identity_residual(system: SectionSystem,
                              report: GeometryReport) -> float:
    """Max residual of Lap|S|^2 = |grad S|^2 - nu R |S|^2 over the basis.

    The identity is exact in the continuum; the discrete residual is
    pure scheme error and halves twice under grid refinement.
    """
    if report.profile is not system.profile and \
            not report.profile.grid.same_as(system.profile.grid):
        raise GridMismatch("system and report grids differ")
    grid = system.profile.grid
    w = system.profile.w
    nu = system.nu
    scalar = report.scalar

    logw = np.log(w)
    dlogw = d1(logw, grid.h)
    k_idx = np.arange(system.size, dtype=float)[:, None]
    sq = np.exp(system.log_sq_norms())
    grad_sq = (np.exp((k_idx - nu) * grid.s[None, :]
                      + (nu - 1) * logw[None, :] - np.log(system.d)[:, None])
               * (k_idx - nu + nu * dlogw[None, :]) ** 2)

    worst = 0.0
    for row_sq, row_grad in zip(sq, grad_sq):
        lap = d2(row_sq, grid.h) / w
        resid = lap - (row_grad - nu * scalar * row_sq)
        worst = max(worst, float(np.max(np.abs(resid))))
    return worst


# -- products --------------------------------------------------------------------

def product_factorization_gap(sys_a: SectionSystem,
                              sys_b: SectionSystem) -> float:
    """Max |F_product - (F_a + F_b)| over the product grid.

    The tensor basis z^k (x) zeta^l diagonalizes the product Gram with
    weights d_k d_l, so the product density of states splits into the
    sum of the factors.
    """
    if sys_a.nu != sys_b.nu:
        raise MismatchedSystems("factor systems must share the tensor power")
    nu = sys_a.nu
    la = sys_a.log_sq_norms()
    lb = sys_b.log_sq_norms()
    # log terms on the product: |S_k|^2 |S_l|^2, flattened over (k, l)
    terms = (la[:, None, :, None] + lb[None, :, None, :]).reshape(
        sys_a.size * sys_b.size, -1)
    f_prod = _logsumexp_rows(terms) / nu
    f_split = (bergman_density(sys_a).values[:, None]
               + bergman_density(sys_b).values[None, :]).reshape(-1)
    return float(np.max(np.abs(f_prod - f_split)))


# -- run-level scan ---------------------------------------------------------------

def bergman_scan(snapshots, nus=(1, 2, 3)) -> list[dict]:
    """Per-(snapshot, nu) monitor rows for a recorded flow run.

    Each row carries inf/sup of F, the partial C0 defect against the
    time-0 system, and the per-basis sup norms; rows feed the CSV
    emission and the tamed-flow verdict.
    """
    base = {nu: gram(_canonicalized(snapshots[0].profile), nu) for nu in nus}
    rows = []
    for snap in snapshots:
        profile = _canonicalized(snap.profile)
        for nu in nus:
            system = gram(profile, nu)
            dens = bergman_density(system)
            spectrum = transition(base[nu], system)
            defect = partial_c0_defect(snap, spectrum, base[nu])
            norms = section_sup_norms(system)
            rows.append({
                "t": snap.t,
                "nu": nu,
                "inf_F": dens.inf,
                "sup_F": dens.sup,
                "defect": defect,
                "max_sup_S": norms.max_sup_abs,
                "max_sup_gradS": norms.max_sup_grad,
            })
    return rows


def _canonicalized(profile: MetricProfile) -> MetricProfile:
    if profile.check_class:
        return profile
    return MetricProfile(profile.grid, profile.w,
                         is_background=profile.is_background)
