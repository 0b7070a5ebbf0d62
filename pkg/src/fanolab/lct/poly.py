"""Exact bivariate polynomials over the rationals.

Thin dict-of-monomials representation tuned for the blowup loop:
substitutions (z, w) -> (z, z*w) are monomial maps, recentering is a
binomial expansion, and every coefficient stays a Fraction.  Sympy is
used only where real algebra is needed (irreducible factorization).
"""

from __future__ import annotations

from fractions import Fraction

import sympy

_Z, _W = sympy.symbols("z w")


class QQPoly:
    """Immutable polynomial sum of c * x^i * y^j with Fraction c."""

    __slots__ = ("terms",)

    def __init__(self, terms):
        clean = {}
        for (i, j), c in terms.items():
            c = Fraction(c)
            if c != 0:
                clean[(int(i), int(j))] = c
        self.terms = clean

    # -- construction ---------------------------------------------------

    @classmethod
    def zero(cls):
        return cls({})

    @classmethod
    def constant(cls, c):
        return cls({(0, 0): Fraction(c)})

    @classmethod
    def variable(cls, which: int):
        return cls({(1, 0) if which == 0 else (0, 1): Fraction(1)})

    @classmethod
    def from_sympy(cls, expr) -> "QQPoly":
        poly = sympy.Poly(expr, _Z, _W, domain="QQ")
        return cls({(int(i), int(j)): Fraction(c.p, c.q)
                    for (i, j), c in poly.terms()})

    def to_sympy(self):
        return sympy.Add(*[sympy.Rational(c.numerator, c.denominator)
                           * _Z ** i * _W ** j
                           for (i, j), c in self.terms.items()])

    # -- basic queries ----------------------------------------------------

    def __bool__(self):
        return bool(self.terms)

    def __eq__(self, other):
        return isinstance(other, QQPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "0"
        bits = []
        for (i, j), c in sorted(self.terms.items()):
            mono = "".join(s for s, e in (("z", i), ("w", j)) if e) or ""
            pow_ = (f"z^{i}" if i > 1 else "z" if i == 1 else "") + \
                   ("*" if i and j else "") + \
                   (f"w^{j}" if j > 1 else "w" if j == 1 else "")
            bits.append(f"{c}{'*' if pow_ else ''}{pow_}")
        return " + ".join(bits)

    def constant_term(self) -> Fraction:
        return self.terms.get((0, 0), Fraction(0))

    def multiplicity(self) -> int:
        """Vanishing order at the origin: min i+j over the support."""
        if not self.terms:
            raise ValueError("zero polynomial has no multiplicity")
        return min(i + j for i, j in self.terms)

    def total_degree(self) -> int:
        return max(i + j for i, j in self.terms) if self.terms else 0

    def support(self):
        return set(self.terms)

    def gradient_at_origin(self):
        return (self.terms.get((1, 0), Fraction(0)),
                self.terms.get((0, 1), Fraction(0)))

    def x_order(self) -> int:
        """Largest m with x^m dividing the polynomial."""
        return min(i for i, _ in self.terms) if self.terms else 0

    def y_order(self) -> int:
        return min(j for _, j in self.terms) if self.terms else 0

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, Fraction(0)) + c
        return QQPoly(out)

    def __neg__(self):
        return QQPoly({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return QQPoly({k: c * other for k, c in self.terms.items()})
        out = {}
        for (i1, j1), c1 in self.terms.items():
            for (i2, j2), c2 in other.terms.items():
                key = (i1 + i2, j1 + j2)
                out[key] = out.get(key, Fraction(0)) + c1 * c2
        return QQPoly(out)

    __rmul__ = __mul__

    def __pow__(self, m: int):
        if m < 0:
            raise ValueError("negative power")
        out = QQPoly.constant(1)
        base = self
        while m:
            if m & 1:
                out = out * base
            base = base * base
            m >>= 1
        return out

    # -- substitutions ------------------------------------------------------

    def blow_x(self) -> "QQPoly":
        """Substitute (x, y) -> (x, x*y): monomial map (i,j) -> (i+j, j)."""
        return QQPoly({(i + j, j): c for (i, j), c in self.terms.items()})

    def blow_y(self) -> "QQPoly":
        """Substitute (x, y) -> (x*y, y): monomial map (i,j) -> (i, i+j)."""
        return QQPoly({(i, i + j): c for (i, j), c in self.terms.items()})

    def divide_x(self, m: int) -> "QQPoly":
        if any(i < m for i, _ in self.terms):
            raise ValueError(f"not divisible by x^{m}")
        return QQPoly({(i - m, j): c for (i, j), c in self.terms.items()})

    def divide_y(self, m: int) -> "QQPoly":
        if any(j < m for _, j in self.terms):
            raise ValueError(f"not divisible by y^{m}")
        return QQPoly({(i, j - m): c for (i, j), c in self.terms.items()})

    def shift_y(self, r) -> "QQPoly":
        """Recenter y -> y + r by binomial expansion."""
        r = Fraction(r)
        if r == 0:
            return self
        out = {}
        for (i, j), c in self.terms.items():
            coeff = c
            power = [Fraction(1)]
            for _ in range(j):
                power.append(power[-1] * r)
            binom = 1
            for l in range(j + 1):
                key = (i, l)
                out[key] = out.get(key, Fraction(0)) + \
                    coeff * binom * power[j - l]
                binom = binom * (j - l) // (l + 1)
        return QQPoly(out)

    def swap(self) -> "QQPoly":
        return QQPoly({(j, i): c for (i, j), c in self.terms.items()})

    def linear_change(self, a, b, c, d) -> "QQPoly":
        """Substitute x -> a x + b y, y -> c x + d y (must be invertible)."""
        a, b, c, d = (Fraction(v) for v in (a, b, c, d))
        if a * d - b * c == 0:
            raise ValueError("coordinate change is singular")
        fx = QQPoly({(1, 0): a, (0, 1): b})
        fy = QQPoly({(1, 0): c, (0, 1): d})
        out = QQPoly.zero()
        # Horner-style over cached powers keeps this quadratic, which is
        # plenty for germ degrees
        px = {0: QQPoly.constant(1)}
        py = {0: QQPoly.constant(1)}
        for (i, j), coeff in sorted(self.terms.items()):
            for n, base, cache in ((i, fx, px), (j, fy, py)):
                while n not in cache:
                    top = max(cache)
                    cache[top + 1] = cache[top] * base
            out = out + px[i] * py[j] * coeff
        return out

    # -- restrictions ---------------------------------------------------------

    def restrict_x0(self) -> list[Fraction]:
        """Coefficients of the univariate restriction to {x = 0}."""
        if not self.terms:
            return []
        deg = max(j for i, j in self.terms if i == 0) \
            if any(i == 0 for i, _ in self.terms) else -1
        if deg < 0:
            return []
        out = [Fraction(0)] * (deg + 1)
        for (i, j), c in self.terms.items():
            if i == 0:
                out[j] = c
        return out

    def restrict_y0(self) -> list[Fraction]:
        return self.swap().restrict_x0()

    # -- numeric evaluation ------------------------------------------------------

    def eval_complex(self, z, w):
        """Vectorized complex evaluation (float coefficients)."""
        import numpy as np

        out = np.zeros(np.broadcast(z, w).shape, dtype=complex)
        zp = {}
        wp = {}
        for (i, j), c in self.terms.items():
            if i not in zp:
                zp[i] = z ** i
            if j not in wp:
                wp[j] = w ** j
            out = out + float(c) * zp[i] * wp[j]
        return out

    # -- factorization -------------------------------------------------------------

    def factor(self):
        """Irreducible factorization over Q: (constant, [(QQPoly, mult)])."""
        poly = sympy.Poly(self.to_sympy(), _Z, _W, domain="QQ")
        const, factors = poly.factor_list()
        out = []
        for fac, mult in factors:
            out.append((QQPoly.from_sympy(fac.as_expr()), int(mult)))
        return Fraction(sympy.Rational(const).p, sympy.Rational(const).q), out
