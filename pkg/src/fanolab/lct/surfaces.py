"""Certified alpha-invariant floors for the supported surface classes.

These are recorded values, not computations over all sections: the
local engines in this package reproduce the individual germ thresholds
the floors rest on, but the enumeration of section families on the
surfaces themselves is out of computational scope.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import UnsupportedSurface


@dataclass(frozen=True)
class SurfaceFloor:
    """Floors for the first two section-family invariants.

    strict flags record whether the floor is attained (False: value
    can equal the floor) or strictly exceeded (True), which downstream
    threshold logic must honor.
    """

    c1_square: int
    nu: int
    alpha1: Fraction
    alpha1_strict: bool
    alpha2: Fraction | None
    alpha2_strict: bool
    note: str


def delpezzo_floor(c1_square: int, nu: int = 1) -> SurfaceFloor:
    """Floor values per degree; valid for every tensor power nu >= 1."""
    if nu < 1:
        raise ValueError("tensor power must be >= 1")
    if c1_square == 1:
        return SurfaceFloor(
            c1_square=1, nu=nu,
            alpha1=Fraction(5, 6), alpha1_strict=False,
            alpha2=None, alpha2_strict=False,
            note="degree-1 surface: every section threshold >= 5/6")
    if c1_square == 3:
        return SurfaceFloor(
            c1_square=3, nu=nu,
            alpha1=Fraction(2, 3), alpha1_strict=False,
            alpha2=Fraction(2, 3), alpha2_strict=True,
            note="cubic surface: worst section hits 2/3 only on the "
                 "triple-line configuration, unique up to scale, so the "
                 "two-section invariant is strictly above 2/3")
    raise UnsupportedSurface(
        f"no certified floor for c1^2 = {c1_square} (supported: 1, 3)")
