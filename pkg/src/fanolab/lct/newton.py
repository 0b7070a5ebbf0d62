"""Newton-polygon evaluation of local thresholds.

The polygon of the germ (polynomial support shifted by the axis
weights) meets the diagonal (t, t) at parameter t0; the threshold of a
nondegenerate germ is min(1, 1/t0).  Exactness requires the
nondegeneracy certificate: every compact edge polynomial must be
squarefree after dehomogenization (vertex faces are monomials and are
automatically nondegenerate).  t0 is computed exactly as

    t0 = max over boundary normals (a, b) of  h(a, b) / (a + b),

h the support function min(a i + b j) over the shifted support, the
normals being (1, 0), (0, 1) and the inner normals of the compact
edges.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd

from ..errors import DegenerateNewton, NotAGermAtOrigin
from .germs import CurveGerm
from .results import LctResult


def newton_vertices(support) -> list[tuple[int, int]]:
    """Vertices of the lower-left polygon boundary, by increasing i."""
    best = {}
    for i, j in support:
        if i not in best or j < best[i]:
            best[i] = j
    frontier = []
    for i, j in sorted(best.items()):
        if not frontier or j < frontier[-1][1]:
            frontier.append((i, j))
    chain: list[tuple[int, int]] = []
    for p in frontier:
        while len(chain) >= 2:
            (i1, j1), (i2, j2) = chain[-2], chain[-1]
            if (i2 - i1) * (p[1] - j2) - (j2 - j1) * (p[0] - i2) <= 0:
                chain.pop()
            else:
                break
        chain.append(p)
    return chain


def diagonal_parameter(support) -> Fraction:
    """Exact t0 where the diagonal meets the polygon boundary."""
    verts = newton_vertices(support)
    normals = [(1, 0), (0, 1)]
    for (i1, j1), (i2, j2) in zip(verts, verts[1:]):
        normals.append((j1 - j2, i2 - i1))
    t0 = Fraction(0)
    for a, b in normals:
        h = min(a * i + b * j for i, j in support)
        t0 = max(t0, Fraction(h, a + b))
    return t0


def edge_polynomials(support, terms):
    """Per compact edge, the dehomogenized coefficient list."""
    verts = newton_vertices(support)
    out = []
    for (i1, j1), (i2, j2) in zip(verts, verts[1:]):
        g = gcd(i2 - i1, j1 - j2)
        step = ((i2 - i1) // g, (j2 - j1) // g)
        coeffs = []
        for k in range(g + 1):
            pt = (i1 + k * step[0], j1 + k * step[1])
            coeffs.append(terms.get(pt, Fraction(0)))
        out.append(((i1, j1), (i2, j2), coeffs))
    return out


def _univariate_squarefree(coeffs) -> bool:
    """gcd(P, P') constant, by exact Euclid over the rationals."""
    p = list(coeffs)
    q = [c * k for k, c in enumerate(p)][1:]

    def strip(v):
        while v and v[-1] == 0:
            v.pop()
        return v

    p, q = strip(p), strip(q)
    while q:
        # remainder of p by q
        r = list(p)
        while len(r) >= len(q) and any(r):
            factor = r[-1] / q[-1]
            shift = len(r) - len(q)
            for idx, c in enumerate(q):
                r[idx + shift] -= factor * c
            strip(r)
        p, q = q, strip(r)
    return len(p) == 1


def lct_newton(germ: CurveGerm) -> LctResult:
    """Exact threshold by the polygon diagonal, for nondegenerate germs.

    Raises DegenerateNewton (carrying the polygon value, still a valid
    upper bound) when some edge polynomial has a repeated root, in
    which case the resolution engine is the authority.
    """
    if germ.is_unit:
        raise NotAGermAtOrigin("unit germ: threshold is infinite")
    shift = (germ.weight_z, germ.weight_w)
    support = {(i + shift[0], j + shift[1]) for i, j in germ.poly.support()}
    t0 = diagonal_parameter(support)
    value = min(Fraction(1), Fraction(1) / t0) if t0 > 0 else Fraction(1)

    shifted_terms = {(i + shift[0], j + shift[1]): c
                     for (i, j), c in germ.poly.terms.items()}
    degenerate = []
    for v1, v2, coeffs in edge_polynomials(support, shifted_terms):
        if not _univariate_squarefree(coeffs):
            degenerate.append((v1, v2))
    if degenerate:
        raise DegenerateNewton(
            f"edge polynomial(s) {degenerate} not squarefree; polygon "
            f"value {value} is only an upper bound",
            upper_bound=value, t0=t0, polygon=newton_vertices(support))
    return LctResult(
        value=value, method="newton",
        witness={"kind": "newton-diagonal", "t0": t0,
                 "vertices": newton_vertices(support)})
