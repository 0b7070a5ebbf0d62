"""Exact local integrability thresholds of plane curve germs.

Public surface: germ parsing and transforms, the two exact engines
(polygon and resolution) with an auto dispatcher, the independent
numeric bracketing oracle, the product bound, powers, blowup pullback
and the certified surface floors.
"""

from __future__ import annotations

from fractions import Fraction

from ..errors import DegenerateNewton
from .families import BatchGerm, TABLE_ROWS, seeded_batch, table_germs
from .germs import CurveGerm, analyze, multiplicity, parse_germ
from .newton import lct_newton
from .oracle import OracleBracket, lct_numeric_oracle
from .poly import QQPoly
from .resolution import BlowupNode, blowup_pullback, lct_resolution
from .results import LctResult, holder_combine
from .surfaces import SurfaceFloor, delpezzo_floor

__all__ = [
    "BatchGerm", "BlowupNode", "CurveGerm", "LctResult", "OracleBracket",
    "QQPoly", "SurfaceFloor", "TABLE_ROWS", "analyze", "blowup_pullback",
    "delpezzo_floor", "holder_combine", "lct", "lct_newton",
    "lct_numeric_oracle", "lct_power", "lct_resolution", "multiplicity",
    "multiplicity_bound", "parse_germ", "seeded_batch", "table_germs",
]


def lct(germ: CurveGerm, method: str = "auto") -> LctResult:
    """Threshold by the requested engine.

    auto runs the polygon first and falls back to resolution when the
    nondegeneracy certificate fails; unit germs short-circuit to the
    infinite pattern result.
    """
    if germ.is_unit:
        return LctResult.unit_germ()
    if method == "auto":
        try:
            return lct_newton(germ)
        except DegenerateNewton:
            return lct_resolution(germ)
    if method == "newton":
        return lct_newton(germ)
    if method == "resolution":
        return lct_resolution(germ)
    if method == "oracle":
        bracket = lct_numeric_oracle(germ)
        return LctResult(value=None, method="oracle-bracket",
                         witness={"kind": "numeric-bracket"},
                         bracket=(bracket.lo, bracket.hi))
    raise ValueError(f"unknown method {method!r}")


def lct_power(germ: CurveGerm, m: int, method: str = "auto") -> LctResult:
    """Threshold of the m-th power: the base value divided by m."""
    if m < 1:
        raise ValueError("power must be >= 1")
    base = lct(germ, method=method)
    if base.infinite:
        return base
    if base.value is None:
        lo, hi = base.bracket
        return LctResult(value=None, method="oracle-bracket",
                         witness=base.witness,
                         bracket=(lo / m, hi / m))
    witness = dict(base.witness or {})
    witness["power"] = m
    return LctResult(value=base.value / m, method=base.method,
                     witness=witness)


def multiplicity_bound(germ: CurveGerm) -> Fraction:
    """Always-valid lower bound 1/mult(total divisor) for the threshold.

    This is the sound instance of the classical coefficient criterion:
    a pure power z^k or w^k in the lowest-degree form has k equal to the
    vanishing order, so the bound it certifies coincides with 1/mult.
    (The criterion read for arbitrary mixed monomials is false: any germ
    (az+bw)^k with ab != 0 carries the monomial z^{k/2}w^{k/2}-ish
    pattern yet has threshold exactly 1/k.)
    """
    total = germ.poly.multiplicity() + germ.weight_multiplicity
    if total == 0:
        return Fraction(1)
    return min(Fraction(1), Fraction(1, total))
