"""Exact thresholds by embedded resolution of the germ.

The germ's divisor is factored over Q once; each blowup substitutes
coordinates, divides out the exceptional order, and records the new
exceptional divisor's data

    v = v_1 + v_2 + m,         k = k_1 + k_2 + 1,

with (v_i, k_i) the data of the (at most two) divisors through the
blown-up point and m the multiplicity of the strict transform there.
Candidate values are (k+1)/v over the exceptionals plus 1/m over the
components of the divisor (strict factors and weighted axes, which have
k = 0); the threshold is the candidate minimum once the total transform
is simple normal crossing everywhere.

Recursion stops at a point as soon as the reduced total transform there
is at most two smooth transversal branches.  A point of the exceptional
where the strict transform crosses with total intersection multiplicity
one is automatically such a point, so only repeated restriction roots
and the two chart origins (where old divisors live) recurse.  Repeated
roots that are not rational raise IrrationalCenter and the caller
degrades to a numeric bracket.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import sympy

from ..errors import (InsufficientMultiplicity, IrrationalCenter,
                      NonTermination)
from .germs import CurveGerm, GermAnalysis, analyze
from .poly import QQPoly
from .results import LctResult

DEPTH_CAP = 64


@dataclass
class BlowupNode:
    """Data of one exceptional divisor in the blowup tree."""

    v: int
    k: int
    depth: int

    @property
    def candidate(self) -> Fraction:
        return Fraction(self.k + 1, self.v)


@dataclass
class _Axis:
    """A chart axis that is part of the total transform."""

    which: str       # "x" or "y"
    v: int
    k: int
    witness: dict


def lct_resolution(germ: CurveGerm, depth_cap: int = DEPTH_CAP) -> LctResult:
    """Exact threshold with the minimizing divisor as witness.

    Raises IrrationalCenter when a recursion point is not rational (the
    exception carries the candidates found so far, whose minimum is a
    valid upper bound for bracket building).
    """
    if germ.is_unit:
        return LctResult.unit_germ()
    ana = analyze(germ)
    candidates: list[tuple[Fraction, dict]] = []
    axes = []
    if ana.axis_z > 0:
        candidates.append((Fraction(1, ana.axis_z),
                           {"kind": "axis", "axis": "z",
                            "multiplicity": ana.axis_z}))
        axes.append(_Axis("x", ana.axis_z, 0, candidates[-1][1]))
    if ana.axis_w > 0:
        candidates.append((Fraction(1, ana.axis_w),
                           {"kind": "axis", "axis": "w",
                            "multiplicity": ana.axis_w}))
        axes.append(_Axis("y", ana.axis_w, 0, candidates[-1][1]))
    for idx, (q, m) in enumerate(ana.factors):
        candidates.append((Fraction(1, m),
                           {"kind": "component", "index": idx,
                            "multiplicity": m}))

    factors = [(q, m) for q, m in ana.factors]
    try:
        _resolve(factors, axes, 0, candidates, depth_cap)
    except IrrationalCenter as exc:
        exc.candidates = candidates
        raise
    value, witness = min(candidates, key=lambda c: c[0])
    return LctResult(value=value, method="resolution", witness=witness)


def _resolve(factors, axes, depth, candidates, cap):
    """Resolve the germ at the origin of the current chart."""
    if depth > cap:
        raise NonTermination(f"blowup depth exceeded {cap}")
    factors = [(q, m) for q, m in factors if q.constant_term() == 0]
    if _snc_ok(factors, axes):
        return

    strict_mult = sum(m * q.multiplicity() for q, m in factors)
    v_new = strict_mult + sum(a.v for a in axes)
    k_new = 1 + sum(a.k for a in axes)
    node = BlowupNode(v=v_new, k=k_new, depth=depth)
    candidates.append((node.candidate,
                       {"kind": "exceptional", "v": v_new, "k": k_new,
                        "depth": depth}))

    old_x = next((a for a in axes if a.which == "x"), None)
    old_y = next((a for a in axes if a.which == "y"), None)
    exc_x = _Axis("x", v_new, k_new, {"kind": "exceptional-axis"})
    exc_y = _Axis("y", v_new, k_new, {"kind": "exceptional-axis"})

    # chart A: (x, y) -> (x, x y); E = {x = 0}, old y-axis survives as
    # {y = 0}, old x-axis leaves the chart
    strict_a = [(q.blow_x().divide_x(q.multiplicity()), m)
                for q, m in factors]
    for root in _recursion_roots(strict_a, origin_axis=old_y is not None):
        shifted = [(q.shift_y(root), m) for q, m in strict_a]
        new_axes = [exc_x] + ([old_y] if root == 0 and old_y else [])
        _resolve(shifted, new_axes, depth + 1, candidates, cap)

    # chart B: (x, y) -> (x y, y); E = {y = 0}, old x-axis survives as
    # {x = 0}; only the chart origin is not already covered by chart A
    strict_b = [(q.blow_y().divide_y(q.multiplicity()), m)
                for q, m in factors]
    through_origin = [(q, m) for q, m in strict_b
                      if q.constant_term() == 0]
    if through_origin:
        new_axes = [exc_y] + ([old_x] if old_x else [])
        _resolve(strict_b, new_axes, depth + 1, candidates, cap)


def _snc_ok(factors, axes) -> bool:
    """Reduced total transform at the origin is simple normal crossing."""
    if not factors:
        return True                      # at most two chart axes
    if len(factors) + len(axes) > 2:
        return False
    if any(q.multiplicity() >= 2 for q, _ in factors):
        return False
    if len(factors) == 2:
        (q1, _), (q2, _) = factors
        g1, g2 = q1.gradient_at_origin(), q2.gradient_at_origin()
        return g1[0] * g2[1] - g1[1] * g2[0] != 0
    if len(factors) == 1 and len(axes) == 1:
        q = factors[0][0]
        gx, gy = q.gradient_at_origin()
        # transversal to {x=0} needs d/dy != 0; to {y=0} needs d/dx != 0
        return gy != 0 if axes[0].which == "x" else gx != 0
    return True                          # one smooth branch, no axes


def _recursion_roots(strict_factors, origin_axis: bool):
    """Rational points of the exceptional where resolution continues.

    A simple transversal crossing of a single smooth branch needs no
    further blowup, so the recursion set is: roots where the aggregated
    restriction multiplicity is >= 2, plus the chart origin when an old
    axis passes through it and some branch meets it.  A repeated root
    living in an irreducible factor of degree >= 2 has no rational
    coordinate and aborts to IrrationalCenter.
    """
    y = sympy.Symbol("y")
    agg: dict[Fraction, int] = {}
    irrational: dict = {}
    for q, _ in strict_factors:
        coeffs = q.restrict_x0()
        if not coeffs or all(c == 0 for c in coeffs):
            raise IrrationalCenter(
                "strict transform restriction vanished identically "
                "(implementation guard)")
        poly = sympy.Poly(
            sum(sympy.Rational(c.numerator, c.denominator) * y ** k
                for k, c in enumerate(coeffs)), y)
        if poly.degree() == 0:
            continue
        for fac, mult in poly.factor_list()[1]:
            if fac.degree() == 1:
                b, a = fac.all_coeffs()[1], fac.all_coeffs()[0]
                root = Fraction(-sympy.Rational(b).p * sympy.Rational(a).q,
                                sympy.Rational(b).q * sympy.Rational(a).p)
                agg[root] = agg.get(root, 0) + mult
            else:
                key = tuple(fac.all_coeffs())
                irrational[key] = irrational.get(key, 0) + mult
    for key, mult in irrational.items():
        if mult >= 2:
            raise IrrationalCenter(
                f"repeated non-rational intersection (factor {key}, "
                f"multiplicity {mult})", factor=key)
    roots = {r for r, mult in agg.items() if mult >= 2}
    if origin_axis and agg.get(Fraction(0), 0) >= 1:
        roots.add(Fraction(0))
    return sorted(roots)


def blowup_pullback(germ: CurveGerm, exceptional_order: int):
    """Chart germs of a section divisor pulled through one point blowup.

    For a germ of multiplicity >= m at the blown-up point, the chart
    germ is f(x, xy)/x^m with weight m-1 on the exceptional axis (the
    divisor of the pulled-back section is the strict transform plus
    (m-1) times the exceptional curve).  Both charts are returned.
    """
    m = int(exceptional_order)
    if m < 1:
        raise ValueError("exceptional order must be >= 1")
    if germ.weight_z or germ.weight_w:
        raise ValueError("blowup pullback expects a weightless germ")
    mult = germ.poly.multiplicity()
    if mult < m:
        raise InsufficientMultiplicity(
            f"germ multiplicity {mult} below requested order {m}")
    chart_a = CurveGerm(germ.poly.blow_x().divide_x(m), weight_z=m - 1)
    chart_b = CurveGerm(germ.poly.blow_y().divide_y(m), weight_w=m - 1)
    return chart_a, chart_b
