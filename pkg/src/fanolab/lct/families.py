"""Reference germ table and seeded randomized batches.

The table lists the singularity types of plane-curve germs cut out by
cubic-curve sections near a point, with their exact local thresholds;
batches derive test germs from the table rows by rational linear
coordinate changes (threshold invariant) and powers (threshold divides
by the exponent).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .germs import CurveGerm, parse_germ

TABLE_ROWS = (
    ("smooth point", "z", Fraction(1)),
    ("transversal intersection of two lines", "z*w", Fraction(1)),
    ("transversal intersection of a line and a conic", "z*w", Fraction(1)),
    ("ordinary double point", "z^2 - w^2*(w+1)", Fraction(1)),
    ("cusp", "z^3 - w^2", Fraction(5, 6)),
    ("tangential intersection of a line and a conic", "z*(z + w^2)",
     Fraction(3, 4)),
    ("intersection of three different lines", "z*w*(z+w)", Fraction(2, 3)),
    ("point on a double line", "z^2", Fraction(1, 2)),
    ("point on a triple line", "z^3", Fraction(1, 3)),
)


def table_germs():
    """(name, germ, exact threshold) for the nine table rows."""
    return [(name, parse_germ(text), value)
            for name, text, value in TABLE_ROWS]


@dataclass
class BatchGerm:
    name: str
    base_text: str
    matrix: tuple
    power: int
    germ: CurveGerm
    expected: Fraction


def seeded_batch(count: int, seed: int, max_power: int = 4) -> list[BatchGerm]:
    """Deterministic batch of transformed table germs with known values."""
    rng = random.Random(seed)
    rows = [(n, t, v) for n, t, v in TABLE_ROWS]
    out = []
    while len(out) < count:
        name, text, value = rows[len(out) % len(rows)]
        while True:
            a, b, c, d = (Fraction(rng.randint(-3, 3), rng.randint(1, 3))
                          for _ in range(4))
            if a * d - b * c != 0:
                break
        m = rng.choice([1, 1, 1] + list(range(2, max_power + 1)))
        germ = parse_germ(text).linear_change(a, b, c, d).power(m)
        out.append(BatchGerm(name=name, base_text=text,
                             matrix=(a, b, c, d), power=m,
                             germ=germ, expected=value / m))
    return out
