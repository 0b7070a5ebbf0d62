"""Result container for local integrability thresholds."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction


@dataclass
class LctResult:
    """Local threshold of a germ, exact unless method is oracle-bracket.

    value is an exact rational in (0, 1] for vanishing germs, None for
    unit germs (infinite: the section is locally nonvanishing, every
    power is integrable) and for bracket-only results.
    """

    value: Fraction | None
    method: str                        # pattern | newton | resolution | oracle-bracket
    witness: dict | None = None
    bracket: tuple[float, float] | None = None
    infinite: bool = False

    def __post_init__(self):
        if self.method != "oracle-bracket" and not self.infinite:
            if not isinstance(self.value, Fraction):
                raise ValueError("exact methods must carry a Fraction value")
            if not (0 < self.value <= 1):
                raise ValueError(f"threshold {self.value} outside (0, 1]")

    @property
    def exact(self) -> bool:
        return self.infinite or isinstance(self.value, Fraction)

    def as_float(self) -> float:
        if self.infinite:
            return float("inf")
        if self.value is not None:
            return float(self.value)
        lo, hi = self.bracket
        return 0.5 * (lo + hi)

    @classmethod
    def unit_germ(cls) -> "LctResult":
        return cls(value=None, method="pattern",
                   witness={"kind": "unit-germ"}, infinite=True)


def holder_combine(f: LctResult, g: LctResult) -> Fraction:
    """Lower bound for the threshold of a product: a*b/(a+b).

    The harmonic-type combination 1/alpha(fg) <= 1/alpha(f) + 1/alpha(g);
    the returned value is a bound, not the product's threshold.  A unit
    factor contributes nothing (1/inf = 0).
    """
    for r in (f, g):
        if not r.exact:
            raise ValueError("holder combination needs exact inputs")
    if f.infinite and g.infinite:
        raise ValueError("product of two unit germs has no finite bound")
    if f.infinite:
        return g.value
    if g.infinite:
        return f.value
    return f.value * g.value / (f.value + g.value)
