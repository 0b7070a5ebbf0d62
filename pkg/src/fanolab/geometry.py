"""Rotation-invariant metrics on the sphere and their pointwise geometry.

The model space is the Riemann sphere with a circle-invariant Kahler
metric.  In the cylinder coordinate s = log|z|^2 the metric is encoded by
a single positive density w(s): the Kahler form integrates to
2*pi*Int(w ds), the class normalization fixes Int(w ds) = 2 (total area
4*pi), and the Riemannian metric reads (w/2) ds^2 + 2w dtheta^2.

Key pointwise formulas used throughout the package:

    Gauss curvature      K(s)  = -(log w)''(s) / w(s)
    scalar curvature     R = K          (complex-trace convention; the
                                         Riemannian scalar is 2K)
    meridian length      dl = sqrt(w/2) ds,  diam = Int sqrt(w/2) ds
    Ricci potential      u'' = (1 - K) w = w + (log w)'',
                         normalized by (1/V) Int e^{-u} dA = 1

The window [-L, L] truncates the two poles; densities are pinned to the
background value at the edge samples and all quadratures complete the
exponential tails analytically.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from ._num import cumtrapz0, d1, d2, trapz_tail
from .errors import (GridMismatch, NonPositiveDensity, NormalizationFailure,
                     ProfileClassError, RadiusOutOfRange)

TOTAL_VOLUME = 4.0 * np.pi     # fixed canonical-class volume of the sphere
CLASS_TOL = 1e-4               # |Int w ds - 2| tolerance for class membership
PROFILE_FORMAT = "fanolab-profile-v1"
CONVENTION = "canonical-4pi"


@dataclass(frozen=True)
class Grid:
    """Uniform samples of the cylinder coordinate s in [-L, L]."""

    L: float
    n: int

    def __post_init__(self):
        if not self.L > 0:
            raise ValueError("grid half-width must be positive")
        if self.n < 64:
            raise ValueError("grid needs at least 64 samples")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n - 1)

    @property
    def s(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n)

    def same_as(self, other: "Grid") -> bool:
        return self.n == other.n and self.L == other.L


def fs_density(s):
    """Background (Fubini-Study) density 2 e^s/(1+e^s)^2 = sech^2(s/2)/2."""
    return 0.5 / np.cosh(np.asarray(s, dtype=float) / 2.0) ** 2


def fs_log_density(s):
    s = np.asarray(s, dtype=float)
    half = np.abs(s) / 2.0
    # log cosh(x) = x + log1p(e^{-2x}) - log 2, stable for large x
    logcosh = half + np.log1p(np.exp(-2.0 * half)) - np.log(2.0)
    return np.log(0.5) - 2.0 * logcosh


@dataclass
class MetricProfile:
    """Discretized metric density w(s_i) of a sphere metric in the class.

    Positivity is enforced on construction.  The class normalization
    (area 4*pi) is enforced unless check_class=False; off-class profiles
    are rejected by every consumer that needs the canonical class.
    """

    grid: Grid
    w: np.ndarray
    is_background: bool = False
    check_class: bool = True

    def __post_init__(self):
        self.w = np.asarray(self.w, dtype=float)
        if self.w.shape != (self.grid.n,):
            raise ValueError("density samples must match the grid")
        if not np.all(self.w > 0.0):
            i = int(np.argmin(self.w))
            raise NonPositiveDensity(
                f"w({self.grid.s[i]:.4f}) = {self.w[i]:.3e} <= 0")
        if self.check_class:
            self.require_canonical()

    # -- invariants ---------------------------------------------------------

    def area_integral(self) -> float:
        """Int w ds, 2 for profiles in the class.

        Tails are completed in closed form from the background (edge
        samples are pinned to it), which is exact for pinned tails and
        sharper than the fitted-rate completion at small windows.
        """
        core = float(np.trapezoid(self.w, dx=self.grid.h))
        return core + 4.0 / (1.0 + np.exp(self.grid.L))

    @property
    def volume(self) -> float:
        return 2.0 * np.pi * self.area_integral()

    def require_canonical(self, tol: float = CLASS_TOL):
        err = abs(self.area_integral() - 2.0)
        if err > tol:
            raise ProfileClassError(
                f"profile volume off the canonical class by {err:.3e} "
                f"(tolerance {tol:.1e})")

    def moment(self) -> np.ndarray:
        """Antiderivative Int_{-L}^{s} w: strictly increasing, ~0 to ~2."""
        return cumtrapz0(self.w, self.grid.h)

    def deviation(self) -> np.ndarray:
        return self.w - fs_density(self.grid.s)


def fs_background(grid: Grid) -> MetricProfile:
    """Reference round metric: volume 4*pi, K = 1, vanishing Ricci potential."""
    return MetricProfile(grid, fs_density(grid.s), is_background=True)


@dataclass
class GeometryReport:
    """Pointwise and global geometric quantities of one profile."""

    profile: MetricProfile
    gauss: np.ndarray              # K
    scalar: np.ndarray             # R in the complex-trace convention (= K)
    scalar_riemannian: np.ndarray  # 2K
    ricci_potential: np.ndarray    # u, volume-normalized
    grad_potential: np.ndarray     # |grad u| samples
    diameter: float
    volume: float
    gauss_bonnet: float            # 2*pi Int K w ds, topologically 4*pi

    @property
    def sup_scalar(self) -> float:
        return float(np.max(np.abs(self.scalar)))

    @property
    def sup_potential(self) -> float:
        return float(np.max(np.abs(self.ricci_potential)))

    @property
    def sup_grad_potential(self) -> float:
        return float(np.max(self.grad_potential))

    @property
    def perelman_sum(self) -> float:
        """sup|R| + diam + sup|u| + sup|grad u|, the monitored combination."""
        return (self.sup_scalar + self.diameter + self.sup_potential
                + self.sup_grad_potential)

    def normalization_check(self) -> float:
        """(1/V) Int e^{-u} dA, equal to 1 by construction of u."""
        h = self.profile.grid.h
        integral = trapz_tail(np.exp(-self.ricci_potential) * self.profile.w, h)
        return 2.0 * np.pi * integral / self.volume


def curvature(profile: MetricProfile) -> GeometryReport:
    """Curvatures, diameter, volume and normalized Ricci potential.

    The potential solves u'' = w + (log w)'' with u'(-L) = 0 and the
    additive constant fixed exactly by (1/V) Int e^{-u} dA = 1.
    """
    grid = profile.grid
    h = grid.h
    w = profile.w
    if not np.all(w > 0.0):
        i = int(np.argmin(w))
        raise NonPositiveDensity(f"w({grid.s[i]:.4f}) = {w[i]:.3e} <= 0")

    # (log w)'' = -w0 + (log(w/w0))'' with the background part in closed
    # form; differencing only the ratio keeps the tiny tail samples from
    # amplifying roundoff by 1/(h^2 w).
    w0 = fs_density(grid.s)
    d2logw = -w0 + d2(np.log(w / w0), h)
    gauss = -d2logw / w

    diameter = trapz_tail(np.sqrt(w / 2.0), h)
    volume = 2.0 * np.pi * trapz_tail(w, h)
    gauss_bonnet = 2.0 * np.pi * trapz_tail(gauss * w, h)

    # u'' = (1 - K) w, written as w + (log w)'' to avoid the 1/w roundtrip
    rhs = w + d2logw
    du = cumtrapz0(rhs, h)
    u0 = cumtrapz0(du, h)
    weight = trapz_tail(np.exp(-u0) * w, h)
    if not np.isfinite(weight) or weight <= 0.0:
        raise NormalizationFailure(
            "e^{-u} volume integral is not finite and positive")
    shift = np.log(2.0 * np.pi * weight / volume)
    u = u0 + shift
    grad_u = np.abs(d1(u, h)) / np.sqrt(w)

    return GeometryReport(
        profile=profile,
        gauss=gauss,
        scalar=gauss.copy(),
        scalar_riemannian=2.0 * gauss,
        ricci_potential=u,
        grad_potential=grad_u,
        diameter=diameter,
        volume=volume,
        gauss_bonnet=gauss_bonnet,
    )


# -- geodesic balls ----------------------------------------------------------

class _SmoothField:
    """Spline view of (log w)' and K inside the window, background outside."""

    def __init__(self, profile: MetricProfile):
        from scipy.interpolate import CubicSpline

        grid = profile.grid
        self.L = grid.L
        logw = np.log(profile.w)
        self._spline = CubicSpline(grid.s, logw)
        self._dspline = self._spline.derivative()
        self._d2spline = self._spline.derivative(2)

    def log_density(self, s):
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) <= self.L
        out = fs_log_density(s)
        if np.any(inside):
            out = np.where(inside, self._spline(np.clip(s, -self.L, self.L)),
                           out)
        return out

    def density(self, s):
        return np.exp(self.log_density(s))

    def dlog_density(self, s):
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) <= self.L
        out = -np.tanh(s / 2.0)
        return np.where(inside, self._dspline(np.clip(s, -self.L, self.L)),
                        out)

    def gauss(self, s):
        s = np.asarray(s, dtype=float)
        inside = np.abs(s) <= self.L
        w = self.density(s)
        out = np.where(
            inside,
            -self._d2spline(np.clip(s, -self.L, self.L)) / w,
            1.0,
        )
        return out


def volume_ratio(profile: MetricProfile, center: float, r: float,
                 n_dirs: int = 48, n_steps: int = 200) -> float:
    """Vol(B(x, r)) / r^2 for the geodesic ball centered on the meridian.

    The exponential map is integrated along a fan of directions from the
    center; the ball area is the direction integral of the radial Jacobi
    field.  Valid while the ball stays away from the poles, which the
    precondition r <= 1 guarantees for centers near the equator.
    """
    if not (0.0 < r <= 1.0):
        raise RadiusOutOfRange(f"radius {r} outside (0, 1]")
    field_ = _SmoothField(profile)

    psi = np.linspace(0.0, np.pi, n_dirs)
    w0 = float(field_.density(center))
    # arc-length initial velocities: metric (w/2) ds^2 + 2w dtheta^2
    state = np.zeros((6, n_dirs))
    state[0] = center
    state[1] = np.cos(psi) * np.sqrt(2.0 / w0)   # ds/dl
    state[2] = np.sin(psi) / np.sqrt(2.0 * w0)   # dtheta/dl
    state[3] = 0.0                               # Jacobi field J
    state[4] = 1.0                               # J'
    state[5] = 0.0                               # accumulated Int J dl

    def rhs(y):
        s, p, q, jac, djac, _ = y
        g = field_.dlog_density(s)
        k = field_.gauss(s)
        return np.stack([
            p,
            g * (-0.5 * p * p + 2.0 * q * q),
            -g * p * q,
            djac,
            -k * jac,
            jac,
        ])

    dl = r / n_steps
    y = state
    for _ in range(n_steps):
        k1 = rhs(y)
        k2 = rhs(y + 0.5 * dl * k1)
        k3 = rhs(y + 0.5 * dl * k2)
        k4 = rhs(y + dl * k3)
        y = y + (dl / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    area = 2.0 * float(np.trapezoid(y[5], dx=np.pi / (n_dirs - 1)))
    return area / (r * r)


# -- products (n = 2 test bed) ----------------------------------------------

@dataclass
class ProductGeometry:
    """Product of two sphere factors; exercises the n = 2 formulas.

    Volume forms multiply, complex-trace scalar curvatures add, and the
    diameter is the Pythagorean combination of the factor diameters.
    """

    factor_a: MetricProfile
    factor_b: MetricProfile
    report_a: GeometryReport = field(repr=False, default=None)
    report_b: GeometryReport = field(repr=False, default=None)

    @property
    def volume(self) -> float:
        return self.report_a.volume * self.report_b.volume

    @property
    def diameter(self) -> float:
        return float(np.hypot(self.report_a.diameter, self.report_b.diameter))

    def scalar(self) -> np.ndarray:
        """R(x_a, x_b) = R_a(x_a) + R_b(x_b) on the product grid."""
        return self.report_a.scalar[:, None] + self.report_b.scalar[None, :]

    def volume_fubini(self) -> float:
        """Iterated quadrature of the product volume form."""
        wa, wb = self.factor_a.w, self.factor_b.w
        ha, hb = self.factor_a.grid.h, self.factor_b.grid.h
        inner = np.array([trapz_tail(wa * wbj, ha) for wbj in wb])
        return (2.0 * np.pi) ** 2 * trapz_tail(inner, hb)


def product_compose(a: MetricProfile, b: MetricProfile) -> ProductGeometry:
    return ProductGeometry(a, b, report_a=curvature(a), report_b=curvature(b))


# -- serialization -----------------------------------------------------------

def dump_profile(profile: MetricProfile) -> str:
    """Two-column text table with a header recording L, N and convention."""
    buf = io.StringIO()
    grid = profile.grid
    buf.write(f"# {PROFILE_FORMAT} L={grid.L!r} N={grid.n} "
              f"convention={CONVENTION} background={int(profile.is_background)}\n")
    buf.write("# s w\n")
    for s, w in zip(grid.s, profile.w):
        buf.write(f"{float(s)!r} {float(w)!r}\n")
    return buf.getvalue()


def save_profile(profile: MetricProfile, path):
    with open(path, "w") as fh:
        fh.write(dump_profile(profile))


def parse_profile(text: str, check_class: bool = True) -> MetricProfile:
    lines = text.splitlines()
    if not lines or PROFILE_FORMAT not in lines[0]:
        raise ValueError(f"not a {PROFILE_FORMAT} table")
    header = dict(tok.split("=", 1) for tok in lines[0].split()
                  if "=" in tok)
    grid = Grid(L=float(header["L"]), n=int(header["N"]))
    rows = [ln.split() for ln in lines[1:]
            if ln.strip() and not ln.startswith("#")]
    if len(rows) != grid.n:
        raise ValueError(f"expected {grid.n} samples, found {len(rows)}")
    w = np.array([float(r[1]) for r in rows])
    return MetricProfile(grid, w,
                         is_background=bool(int(header.get("background", "0"))),
                         check_class=check_class)


def load_profile(path, check_class: bool = True) -> MetricProfile:
    with open(path) as fh:
        return parse_profile(fh.read(), check_class=check_class)
