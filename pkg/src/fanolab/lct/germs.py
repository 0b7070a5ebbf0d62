"""Plane curve germs with rational coefficients and divisor weights."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import sympy
from sympy.parsing.sympy_parser import (convert_xor, parse_expr,
                                        standard_transformations)

from ..errors import NotAGermAtOrigin, ParseError
from .poly import QQPoly

_TRANSFORMS = standard_transformations + (convert_xor,)


@dataclass(frozen=True)
class CurveGerm:
    """Germ of the divisor Z(poly) + weight_z {z=0} + weight_w {w=0} at 0.

    The weights carry monomial divisor components accumulated alongside
    the polynomial (blowup bookkeeping); they contribute to integrability
    thresholds but never trigger blowups by themselves.
    """

    poly: QQPoly
    weight_z: int = 0
    weight_w: int = 0

    def __post_init__(self):
        if not self.poly:
            raise ValueError("germ polynomial must be nonzero")
        if self.weight_z < 0 or self.weight_w < 0:
            raise ValueError("divisor weights must be nonnegative")

    @property
    def is_unit(self) -> bool:
        """True when the full divisor misses the origin (alpha = +inf)."""
        return (self.poly.constant_term() != 0
                and self.weight_z == 0 and self.weight_w == 0)

    @property
    def weight_multiplicity(self) -> int:
        return self.weight_z + self.weight_w

    def with_weights(self, weight_z=None, weight_w=None) -> "CurveGerm":
        return CurveGerm(self.poly,
                         self.weight_z if weight_z is None else weight_z,
                         self.weight_w if weight_w is None else weight_w)

    def power(self, m: int) -> "CurveGerm":
        if m < 1:
            raise ValueError("power must be >= 1")
        return CurveGerm(self.poly ** m, self.weight_z * m, self.weight_w * m)

    def linear_change(self, a, b, c, d) -> "CurveGerm":
        """Invertible linear substitution; only for weightless germs
        (weights mark coordinate axes, which a general change destroys)."""
        if self.weight_z or self.weight_w:
            raise ValueError("cannot change coordinates under axis weights")
        return CurveGerm(self.poly.linear_change(a, b, c, d))

    def __str__(self):
        bits = []
        if self.weight_z:
            bits.append(f"z^{self.weight_z}")
        if self.weight_w:
            bits.append(f"w^{self.weight_w}")
        bits.append(f"({self.poly!r})")
        return " * ".join(bits)


def parse_germ(text: str, require_vanishing: bool = False,
               weights=None) -> CurveGerm:
    """Parse a bivariate polynomial in z, w with rational coefficients.

    The result is normalized (expanded, coefficients reduced).  With
    require_vanishing=True a nonzero constant term raises
    NotAGermAtOrigin; otherwise unit germs are legal and carry
    alpha = +infinity.
    """
    z, w = sympy.symbols("z w")
    try:
        expr = parse_expr(text, local_dict={"z": z, "w": w},
                          transformations=_TRANSFORMS, evaluate=True)
        expr = sympy.expand(expr)
        poly = sympy.Poly(expr, z, w, domain="QQ")
    except NotAGermAtOrigin:
        raise
    except Exception as exc:
        raise ParseError(f"cannot parse germ {text!r}: {exc}") from exc
    if poly.is_zero:
        raise ParseError(f"germ {text!r} is the zero polynomial")
    qq = QQPoly({(int(i), int(j)): Fraction(c.p, c.q)
                 for (i, j), c in poly.terms()})
    wz = ww = 0
    if weights:
        for axis, mult in dict(weights).items():
            if axis not in ("z", "w"):
                raise ParseError(f"unknown weight axis {axis!r}")
            if int(mult) < 0:
                raise ParseError("weight multiplicities must be >= 0")
            if axis == "z":
                wz = int(mult)
            else:
                ww = int(mult)
    germ = CurveGerm(qq, wz, ww)
    if require_vanishing and germ.is_unit:
        raise NotAGermAtOrigin(
            f"germ {text!r} has nonzero constant term and no weights")
    return germ


def multiplicity(germ: CurveGerm) -> int:
    """Vanishing order of the polynomial part at the origin.

    Weight contributions are reported separately
    (germ.weight_multiplicity); a unit polynomial has order 0.
    """
    return germ.poly.multiplicity()


@dataclass
class GermAnalysis:
    """Squarefree-irreducible decomposition of the germ at the origin."""

    unit: bool
    constant: Fraction
    # irreducible non-axis factors vanishing at the origin, with powers
    factors: list = field(default_factory=list)
    axis_z: int = 0     # {z=0} multiplicity: polynomial content + weight
    axis_w: int = 0

    @property
    def strict_multiplicity(self) -> int:
        return sum(m * q.multiplicity() for q, m in self.factors)

    @property
    def total_multiplicity(self) -> int:
        return self.strict_multiplicity + self.axis_z + self.axis_w


_X_POLY = QQPoly({(1, 0): Fraction(1)})
_Y_POLY = QQPoly({(0, 1): Fraction(1)})


def analyze(germ: CurveGerm) -> GermAnalysis:
    """Factor over Q and fold axis factors into the axis multiplicities."""
    const, raw = germ.poly.factor()
    out = GermAnalysis(unit=germ.is_unit, constant=const,
                       axis_z=germ.weight_z, axis_w=germ.weight_w)
    for q, m in raw:
        if q.constant_term() != 0:
            continue                      # unit factor: no divisor at 0
        scaled = _monic_like(q)
        if scaled == _X_POLY:
            out.axis_z += m
        elif scaled == _Y_POLY:
            out.axis_w += m
        else:
            out.factors.append((scaled, m))
    return out


def _monic_like(q: QQPoly) -> QQPoly:
    lead = q.terms[min(q.terms)]
    return q * (Fraction(1) / lead)
