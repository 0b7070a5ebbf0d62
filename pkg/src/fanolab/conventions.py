"""The conventions sheet: every normalization the numbers depend on.

This module is the single source; the repository copy CONVENTIONS.md is
generated from TEXT, and experiment manifests record its hash so every
summary value is traceable to a fixed set of conventions.
"""

import hashlib

TEXT = """\
# Conventions sheet (fanolab)

version: 1

## Class normalization
- The metric class is fixed so the sphere has total area V = 4*pi;
  in the cylinder coordinate s = log|z|^2 the density satisfies
  Int w ds = 2 and the moment coordinate Int_{-L}^{s} w runs over (0, 2).
- The background (round) density is w0(s) = 2 e^s/(1+e^s)^2
  = sech^2(s/2)/2, with w0(0) = 1/2 and vanishing Ricci potential.
- All constants downstream depend on this choice; e.g. the background
  density-of-states level at power nu is (1/nu) log((2 nu + 1)/(4 pi)).

## Curvature conventions
- Scalar curvature R is the complex trace g^{ij~} R_{ij~}; at complex
  dimension one R equals the Gauss curvature K = -(log w)''/w and the
  Riemannian scalar is 2K.  All pointwise identities (section Laplacian,
  curvature evolution) are stated and checked in the complex convention.
- |grad f|^2 means g^{zz~} f_z f_z~ = f'(s)^2 / w for circle-invariant f.
- The Ricci potential solves u'' = (1 - K) w with u'(-L) = 0 and the
  additive constant fixed exactly by (1/V) Int e^{-u} dA = 1.

## Flow conventions
- Density form dw/dt = (log(w/w0))'' + (w - w0); potential form
  dphi/dt = log((w0 + phi'')/w0) + phi (the reference is always the
  background, so its potential term vanishes).
- Window [-L, L], default L = 20; edge samples pinned to the background;
  initial perturbations are volume-projected onto the class.
- Explicit schemes honor dt <= safety * h^2 * min(w)/2; the production
  scheme is backward Euler with tridiagonal Newton (unconditionally
  stable), retained explicit schemes cross-check short runs.

## Energy functional
- I(phi) = (1/V) Int phi (dA_ref - dA_evolved): the unique standard
  energy making the seven boundedness conditions equivalent; equals the
  Dirichlet energy (2 pi/V) Int phi'^2 ds at n = 1.

## Comparison function and defect
- lambda_k(t) = sqrt(d_k(0)/d_k(t)) normalized so max_k lambda_k = 1;
  X = (1/nu) log Sum lambda_k^2 |S_k(0)|^2.
- The partial C0 defect is sup |(phi - sup phi) - (X - sup X)|: both
  sides sup-normalized, so the monitor ignores additive gauge constants.

## Quadrature
- Trapezoid over the window plus fitted exponential tail completion
  (one-sided second-order log-slope, edge panel extrapolated).

## File formats
- Profiles: two-column text (s, w), header records L, N, convention.
- Run CSV columns: t, min_w, max_dev, osc_phi, sup_phi, volume, diam,
  sup_R, sup_u, gauge_const, I_energy, neg_mean, perelman_sum,
  c0_defect, energy_gap.
- Scan CSV columns: t, nu, inf_F, sup_F, defect, max_sup_S,
  max_sup_gradS.
- JSON summaries carry schema "fanolab-summary-v1"; floats print with
  repr (shortest round trip), '.' decimal separator, no locale.
"""


def sheet_hash() -> str:
    return hashlib.sha256(TEXT.encode()).hexdigest()
