"""Numeric integrability bracketing, independent of the exact engines.

The oracle tests local integrability of |f|^{-2 alpha} near the origin
directly.  In log-polar coordinates z = eps e^{-x + i theta},
w = eps e^{-y + i phi} the volume form is eps^4 e^{-2x-2y} dx dtheta
dy dphi and the origin sits at box depth infinity, so the integral is
probed on three nested boxes max(x, y) < X1 < X2 < X3:

  * shell trend: contributions of the two outer shells decay
    geometrically below the threshold and grow above it;
  * refinement trend: a singularity sitting on the zero curve inside
    the box (alpha >= 1 regime) makes the quadrature sum grow when the
    angular resolution doubles (the coarse sum reuses every other
    angular node, so one evaluation pass serves both).

Per node only log|f| is stored, compressed into a histogram against the
measure weights; each alpha in the grid is then a sum over histogram
bins, which keeps a full grid scan at a few seconds per germ.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InconclusiveBracket
from .germs import CurveGerm

DEFAULT_ALPHA_GRID = np.round(np.arange(0.0125, 1.0 + 1e-9, 0.0125), 6)


@dataclass
class OracleBracket:
    lo: float
    hi: float
    decisions: dict

    @property
    def width(self) -> float:
        return self.hi - self.lo

    def contains(self, value) -> bool:
        return self.lo <= float(value) <= self.hi


def lct_numeric_oracle(germ: CurveGerm, alpha_grid=None, eps: float = 0.5,
                       depth: float | None = None, dx: float = 0.3,
                       n_theta: int = 16,
                       bin_width: float = 0.02) -> OracleBracket:
    """Bracket [lo, hi] with convergence below lo, divergence above hi.

    hi falls back to the top of the grid when no divergence is seen
    (thresholds at the upper boundary); InconclusiveBracket is raised
    when not a single grid point is decisively convergent.

    A repeated tangent direction off the coordinate axes hides its
    near-branch mass between angular nodes at depth, so one extra pass
    per repeated rational direction runs with that direction rotated
    onto an axis (a volume-preserving reparametrization; the verdicts
    stay purely numeric).  Divergence in any pass decides; convergence
    requires all passes.
    """
    alphas = DEFAULT_ALPHA_GRID if alpha_grid is None else \
        np.asarray(alpha_grid, dtype=float)
    if np.any(alphas <= 0.0) or np.any(alphas > 1.0):
        raise ValueError("alpha grid must lie in (0, 1]")

    passes = [germ] + [_aligned(germ, p, q)
                       for p, q in _repeated_directions(germ)]
    per_pass = [_scan_decisions(g, alphas, eps, depth, dx, n_theta,
                                bin_width) for g in passes]
    decisions = {}
    for alpha in (float(a) for a in alphas):
        votes = [d[alpha] for d in per_pass]
        if "divergent" in votes:
            decisions[alpha] = "divergent"
        elif all(v == "convergent" for v in votes):
            decisions[alpha] = "convergent"
        else:
            decisions[alpha] = "inconclusive"

    hi = min((a for a, d in decisions.items() if d == "divergent"),
             default=float(alphas.max()))
    convergent = [a for a, d in decisions.items()
                  if d == "convergent" and a <= hi]
    if not convergent:
        raise InconclusiveBracket(
            "integrability trends are flat over the whole grid")
    lo = max(convergent)
    return OracleBracket(lo=lo, hi=hi, decisions=decisions)


def _repeated_directions(germ: CurveGerm):
    """Rational non-axis tangent directions of multiplicity >= 2.

    An irreducible repeated direction of degree >= 2 has no rational
    rotation aligning it and the bracket cannot be trusted, so it
    degrades to InconclusiveBracket.
    """
    import sympy

    if germ.weight_z or germ.weight_w:
        return []
    z, w = sympy.symbols("z w")
    mult = germ.poly.multiplicity()
    lowest = sum(sympy.Rational(c.numerator, c.denominator)
                 * z ** i * w ** j
                 for (i, j), c in germ.poly.terms.items() if i + j == mult)
    out = []
    for fac, e in sympy.Poly(lowest, z, w).factor_list()[1]:
        if e < 2:
            continue
        if fac.total_degree() > 1:
            raise InconclusiveBracket(
                f"repeated non-rational tangent direction {fac.as_expr()}")
        coeff_z = fac.coeff_monomial(z)
        coeff_w = fac.coeff_monomial(w)
        from fractions import Fraction

        p = Fraction(sympy.Rational(coeff_z).p, sympy.Rational(coeff_z).q)
        q = Fraction(sympy.Rational(coeff_w).p, sympy.Rational(coeff_w).q)
        if p == 0 or q == 0:
            continue                     # already a coordinate axis
        out.append((p, q))
    return out


def _aligned(germ: CurveGerm, p, q):
    """Coordinates (u, v) = (p z + q w, z): the direction becomes {u=0}."""
    from fractions import Fraction

    one = Fraction(1)
    return CurveGerm(germ.poly.linear_change(0, one, one / q, -p / q))


def _scan_decisions(germ, alphas, eps, depth, dx, n_theta, bin_width):
    deg = max(1, germ.poly.total_degree())
    x3 = min(48.0, 600.0 / deg) if depth is None else depth
    x1, x2 = 0.5 * x3, 0.75 * x3

    nx = int(round(x3 / dx))
    xs = (np.arange(nx) + 0.5) * dx
    thetas = 2.0 * np.pi * np.arange(n_theta) / n_theta
    phis = 2.0 * np.pi * (np.arange(n_theta) + 0.5) / n_theta

    # flattened z-nodes (x, theta) and w-nodes (y, phi)
    zs = (eps * np.exp(-xs)[:, None]
          * np.exp(1j * thetas)[None, :]).ravel()
    ws = (eps * np.exp(-xs)[:, None]
          * np.exp(1j * phis)[None, :]).ravel()
    x_flat = np.repeat(xs, n_theta)
    fine_mask_z = np.tile(np.arange(n_theta) % 2 == 0, nx)

    # per-pair measure log-weight (angular factors folded in later)
    log_cell = 4.0 * np.log(eps) + 2.0 * np.log(dx) \
        + 2.0 * np.log(2.0 * np.pi / n_theta)

    shell_of_x = np.digitize(x_flat, [x1, x2])     # 0, 1, 2 per node

    n_bins = int(np.ceil((deg * x3 + 60.0) / bin_width)) + 2
    l_offset = -(deg * x3 + 40.0) - 4.0 * abs(np.log(eps))
    # histograms: [fineness, shell, bin] of summed measure weights
    hists = np.zeros((2, 3, n_bins))

    a_w, b_w = germ.weight_z, germ.weight_w
    log_abs_z = np.log(eps) - x_flat

    chunk = max(1, 2_000_000 // max(len(zs), 1))
    for start in range(0, len(ws), chunk):
        sl = slice(start, start + chunk)
        f = germ.poly.eval_complex(zs[:, None], ws[None, sl])
        with np.errstate(divide="ignore"):
            logf = np.log(np.abs(f))
        if a_w:
            logf += a_w * log_abs_z[:, None]
        if b_w:
            logf += b_w * (np.log(eps) - x_flat[sl])[None, :]
        weight = np.exp(log_cell - 2.0 * x_flat[:, None]
                        - 2.0 * x_flat[sl][None, :])
        shell = np.maximum(shell_of_x[:, None],
                           shell_of_x[sl][None, :])
        fine = fine_mask_z[:, None] & fine_mask_z[sl][None, :]

        ok = np.isfinite(logf)
        bins = np.clip(((logf - l_offset) / bin_width).astype(int),
                       0, n_bins - 1)
        flat_bins = (shell * n_bins + bins)[ok]
        wts = weight[ok]
        hists[0] += np.bincount(flat_bins, weights=wts,
                                minlength=3 * n_bins).reshape(3, n_bins)
        coarse_sel = ok & fine
        flat_c = (shell * n_bins + bins)[coarse_sel]
        hists[1] += np.bincount(flat_c, weights=weight[coarse_sel] * 4.0,
                                minlength=3 * n_bins).reshape(3, n_bins)

    centers = l_offset + (np.arange(n_bins) + 0.5) * bin_width
    decisions = {}
    for alpha in alphas:
        log_i = np.full((2, 3), -np.inf)
        for fine_idx in (0, 1):
            for shell in range(3):
                w_bin = hists[fine_idx, shell]
                mask = w_bin > 0.0
                if not np.any(mask):
                    continue
                vals = np.log(w_bin[mask]) - 2.0 * alpha * centers[mask]
                m = vals.max()
                log_i[fine_idx, shell] = m + np.log(np.exp(vals - m).sum())
        shell_ratio = log_i[0, 2] - log_i[0, 1]
        total_fine = _logsumexp(log_i[0])
        total_coarse = _logsumexp(log_i[1])
        refine_ratio = total_fine - total_coarse
        if refine_ratio > np.log(2.0) or shell_ratio > np.log(1.15):
            decisions[float(alpha)] = "divergent"
        elif shell_ratio < np.log(0.87) and refine_ratio < np.log(2.0):
            decisions[float(alpha)] = "convergent"
        else:
            decisions[float(alpha)] = "inconclusive"
    return decisions


def _logsumexp(vals):
    m = np.max(vals)
    if not np.isfinite(m):
        return m
    return m + np.log(np.sum(np.exp(vals - m)))
