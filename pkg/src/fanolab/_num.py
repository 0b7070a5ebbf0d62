"""Finite differences and quadrature on the uniform cylinder grid.

All derivatives are second-order accurate: central stencils inside,
one-sided second-order stencils at the two window edges.  Integrals are
trapezoid sums plus a fitted exponential tail completion: the window
truncates integrands that decay like e^{-rho|s|}, and the geometric tail
f(L)/rho recovers the lost mass to relative accuracy ~e^{-L}.
"""

from __future__ import annotations

import numpy as np

from .errors import QuadratureFailure


def d1(f: np.ndarray, h: float) -> np.ndarray:
    """First derivative, O(h^2) everywhere."""
    out = np.empty_like(f, dtype=float)
    out[1:-1] = (f[2:] - f[:-2]) / (2.0 * h)
    out[0] = (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    out[-1] = (3.0 * f[-1] - 4.0 * f[-2] + f[-3]) / (2.0 * h)
    return out


def d2(f: np.ndarray, h: float) -> np.ndarray:
    """Second derivative, O(h^2) everywhere."""
    out = np.empty_like(f, dtype=float)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    out[0] = (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
    out[-1] = (2.0 * f[-1] - 5.0 * f[-2] + 4.0 * f[-3] - f[-4]) / (h * h)
    return out


def d2_interior(f: np.ndarray, h: float) -> np.ndarray:
    """Second derivative with the two edge samples forced to zero.

    Flow operators use this variant: densities are pinned to the
    background at the window edges, so perturbation second-differences
    vanish there and the implicit solver stays tridiagonal.
    """
    out = np.zeros_like(f, dtype=float)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    return out


def d2_neumann(f: np.ndarray, h: float) -> np.ndarray:
    """Second derivative with zero-slope (ghost point) edge rows.

    The potential form uses this: pole regularity of the untruncated
    problem is zero slope, which removes the truncation's spurious
    slowly-growing edge modes while keeping the physical constant mode.
    """
    out = np.empty_like(f, dtype=float)
    out[1:-1] = (f[2:] - 2.0 * f[1:-1] + f[:-2]) / (h * h)
    out[0] = 2.0 * (f[1] - f[0]) / (h * h)
    out[-1] = 2.0 * (f[-2] - f[-1]) / (h * h)
    return out


def cumtrapz0(f: np.ndarray, h: float) -> np.ndarray:
    """Cumulative trapezoid antiderivative vanishing at the left edge."""
    out = np.empty_like(f, dtype=float)
    out[0] = 0.0
    np.cumsum((f[1:] + f[:-1]) * (0.5 * h), out=out[1:])
    return out


def _tail(samples, h: float):
    """Geometric tail estimate past one edge: (value, error_estimate).

    Returns None when the samples are not sign-consistent decaying.
    samples are the last four values walking toward the edge.  The decay
    rate is the one-sided second-order log-slope at the third sample and
    the edge value is extrapolated from it: the computed edge sample is
    avoided because integrands built from boundary stencils carry a
    different error constant there, which would degrade the completed
    integral to first order in h.  The error estimate is the spread
    between the two- and three-point rate fits: a clean exponential tail
    makes it tiny, an unconverged tail makes it comparable to the tail.
    """
    f3, f2, f1, f0 = (float(v) for v in samples)
    if f0 == 0.0 and f1 == 0.0:
        return 0.0, 0.0
    if f1 == 0.0 or f2 == 0.0 or f3 == 0.0:
        return None
    sign = 1.0 if f1 > 0.0 else -1.0
    if (f2 > 0.0) != (f1 > 0.0) or (f3 > 0.0) != (f1 > 0.0):
        return None
    a1, a2, a3 = abs(f1), abs(f2), abs(f3)
    if not (a3 > a2 > a1):
        return None
    l1, l2, l3 = np.log(a1), np.log(a2), np.log(a3)
    rho = (3.0 * l1 - 4.0 * l2 + l3) / (-2.0 * h)
    rho2 = (l2 - l1) / h
    if rho <= 0.0 or rho2 <= 0.0:
        return None
    # tail = Int_{edge}^{inf}: extrapolate one panel from the last
    # interior sample, then the geometric remainder
    value = sign * a1 * np.exp(-rho * h) / rho
    alt = sign * a1 * np.exp(-rho2 * h) / rho2
    return value, abs(value - alt)


def trapz(f: np.ndarray, h: float) -> float:
    return float(np.trapezoid(f, dx=h))


def trapz_tail(f: np.ndarray, h: float, *, tol: float = 1e-12,
               strict: bool = False) -> float:
    """Trapezoid integral over the window plus fitted tail completions.

    With strict=True a tail that is neither negligible (|edge| <= tol
    relative to the peak) nor cleanly decaying raises QuadratureFailure;
    otherwise such a tail is dropped.
    """
    core = float(np.trapezoid(f, dx=h))
    scale = float(np.max(np.abs(f))) if f.size else 0.0
    floor = tol * max(scale, 1e-300)
    total = core
    for samples, side in ((f[3::-1], "left"), (f[-4:], "right")):
        f_edge = float(samples[3])
        if abs(f_edge) <= floor and abs(samples[2]) <= floor:
            continue
        fit = _tail(samples, h)
        if fit is None:
            if strict:
                raise QuadratureFailure(
                    f"integrand tail on the {side} edge is not decaying "
                    f"(edge value {f_edge:.3e}, tolerance {floor:.3e})")
            continue
        est, err = fit
        if strict and err > 1e-6 * max(abs(core), scale, abs(est) * 1e3):
            raise QuadratureFailure(
                f"tail completion on the {side} edge has not converged: "
                f"estimate {est:.3e} with uncertainty {err:.3e}")
        total += est
    return total


def lstsq_slope(x: np.ndarray, y: np.ndarray) -> float:
    """Least-squares slope of y against x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm = x - x.mean()
    denom = float(np.dot(xm, xm))
    if denom == 0.0:
        return 0.0
    return float(np.dot(xm, y - y.mean()) / denom)
