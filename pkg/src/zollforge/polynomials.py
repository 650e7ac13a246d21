"""Sparse multivariate polynomials with exact coefficient arithmetic.

Coefficients may be ints, Fractions, elements of Q(sqrt 5) (GoldenRational),
or floats; the four kinds mix freely through Python's operator protocol.
Exact kinds stay exact under ring operations, differentiation, and linear
substitution, so harmonicity checks can compare against zero literally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ConfigurationError, DomainError

_SQRT5 = math.sqrt(5.0)


# ---------------------------------------------------------------------------
# the quadratic field Q(sqrt 5)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GoldenRational:
    """a + b*sqrt(5) with rational a, b; closed under +, -, *, /."""

    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    @staticmethod
    def _coerce(other):
        if isinstance(other, GoldenRational):
            return other
        if isinstance(other, (int, Fraction)):
            return GoldenRational(Fraction(other), Fraction(0))
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GoldenRational(self.a + o.a, self.b + o.b)

    __radd__ = __add__

    def __neg__(self):
        return GoldenRational(-self.a, -self.b)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GoldenRational(self.a - o.a, self.b - o.b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GoldenRational(o.a - self.a, o.b - self.b)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GoldenRational(
            self.a * o.a + 5 * self.b * o.b, self.a * o.b + self.b * o.a
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        nrm = o.a * o.a - 5 * o.b * o.b
        if nrm == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 5)")
        return self * GoldenRational(o.a / nrm, -o.b / nrm)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __float__(self):
        return float(self.a) + float(self.b) * _SQRT5

    def __repr__(self):
        return f"({self.a}+{self.b}*sqrt5)"


GOLDEN_RATIO = GoldenRational(Fraction(1, 2), Fraction(1, 2))
GOLDEN_RATIO_INV = GoldenRational(Fraction(-1, 2), Fraction(1, 2))


def _is_exact(c) -> bool:
    return isinstance(c, (int, Fraction, GoldenRational))


# ---------------------------------------------------------------------------
# sparse polynomials
# ---------------------------------------------------------------------------


class Polynomial:
    """Polynomial in n_vars variables as a map exponent-tuple -> coefficient."""

    __slots__ = ("terms", "n_vars")

    def __init__(self, terms: dict, n_vars: int):
        if n_vars < 1:
            raise ConfigurationError("polynomial needs at least one variable")
        clean = {}
        for mono, coeff in terms.items():
            key = tuple(int(e) for e in mono)
            if len(key) != n_vars or any(e < 0 for e in key):
                raise DomainError(f"bad exponent tuple {mono}")
            if coeff == 0:
                continue
            if key in clean:
                coeff = clean[key] + coeff
                if coeff == 0:
                    del clean[key]
                    continue
            clean[key] = coeff
        self.terms = clean
        self.n_vars = int(n_vars)

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n_vars: int) -> "Polynomial":
        return cls({}, n_vars)

    @classmethod
    def constant(cls, c, n_vars: int) -> "Polynomial":
        return cls({(0,) * n_vars: c}, n_vars)

    @classmethod
    def variable(cls, i: int, n_vars: int) -> "Polynomial":
        e = [0] * n_vars
        e[i] = 1
        return cls({tuple(e): 1}, n_vars)

    # -- ring operations ----------------------------------------------------

    def _check_vars(self, other: "Polynomial"):
        if self.n_vars != other.n_vars:
            raise DomainError("variable-count mismatch")

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        self._check_vars(other)
        terms = dict(self.terms)
        for mono, coeff in other.terms.items():
            terms[mono] = terms.get(mono, 0) + coeff
        return Polynomial(terms, self.n_vars)

    def __sub__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self + (-other)

    def __neg__(self):
        return Polynomial({m: -c for m, c in self.terms.items()}, self.n_vars)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            self._check_vars(other)
            terms: dict = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    key = tuple(a + b for a, b in zip(m1, m2))
                    terms[key] = terms.get(key, 0) + c1 * c2
            return Polynomial(terms, self.n_vars)
        return Polynomial(
            {m: c * other for m, c in self.terms.items()}, self.n_vars
        )

    def __rmul__(self, other):
        return Polynomial({m: other * c for m, c in self.terms.items()}, self.n_vars)

    def __pow__(self, k: int):
        if k < 0:
            raise DomainError("negative polynomial power")
        out = Polynomial.constant(1, self.n_vars)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n_vars == other.n_vars and self.terms == other.terms

    def __repr__(self):
        if not self.terms:
            return "Polynomial(0)"
        parts = [f"{c}*x^{m}" for m, c in sorted(self.terms.items())]
        return "Polynomial(" + " + ".join(parts) + ")"

    # -- structure ------------------------------------------------------------

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def degrees_present(self) -> tuple[int, ...]:
        return tuple(sorted({sum(m) for m in self.terms}))

    def is_homogeneous(self) -> bool:
        return len(self.degrees_present()) <= 1

    def homogeneous_components(self) -> dict[int, "Polynomial"]:
        parts: dict[int, dict] = {}
        for m, c in self.terms.items():
            parts.setdefault(sum(m), {})[m] = c
        return {d: Polynomial(t, self.n_vars) for d, t in sorted(parts.items())}

    def is_exact(self) -> bool:
        return all(_is_exact(c) for c in self.terms.values())

    def max_abs_coeff(self) -> float:
        if not self.terms:
            return 0.0
        return max(abs(float(c)) for c in self.terms.values())

    # -- calculus ----------------------------------------------------------

    def derivative(self, i: int) -> "Polynomial":
        terms: dict = {}
        for m, c in self.terms.items():
            if m[i] == 0:
                continue
            key = list(m)
            key[i] -= 1
            terms[tuple(key)] = c * m[i]
        return Polynomial(terms, self.n_vars)

    def laplacian(self) -> "Polynomial":
        """Sum of second partials in the ambient Euclidean space."""
        out = Polynomial.zero(self.n_vars)
        for i in range(self.n_vars):
            out = out + self.derivative(i).derivative(i)
        return out

    def hess_sum(self) -> "Polynomial":
        """Sum over all pairs (a, b) of d2 P / dx_a dx_b.

        This is Hess P applied twice to the all-ones vector; dividing by the
        number of variables gives the second normal derivative along the
        diagonal direction, as needed for hyperplane restrictions.
        """
        firsts = [self.derivative(i) for i in range(self.n_vars)]
        out = Polynomial.zero(self.n_vars)
        for f in firsts:
            for j in range(self.n_vars):
                out = out + f.derivative(j)
        return out

    # -- substitution and evaluation ------------------------------------------

    def compose_linear(self, matrix) -> "Polynomial":
        """P(M x) for a matrix given as rows; column count sets the new vars."""
        rows = [list(r) for r in matrix]
        if len(rows) != self.n_vars:
            raise DomainError("matrix row count must match variable count")
        n_new = len(rows[0])
        subs = [
            Polynomial({tuple(int(j == k) for k in range(n_new)): rows[i][j]
                        for j in range(n_new)}, n_new)
            for i in range(self.n_vars)
        ]
        # cache powers of each substituted variable up to its max exponent
        max_exp = [0] * self.n_vars
        for m in self.terms:
            for i, e in enumerate(m):
                max_exp[i] = max(max_exp[i], e)
        powers = []
        for i in range(self.n_vars):
            row = [Polynomial.constant(1, n_new)]
            for _ in range(max_exp[i]):
                row.append(row[-1] * subs[i])
            powers.append(row)
        out = Polynomial.zero(n_new)
        for m, c in self.terms.items():
            term = Polynomial.constant(c, n_new)
            for i, e in enumerate(m):
                if e:
                    term = term * powers[i][e]
            out = out + term
        return out

    def substitute(self, i: int, replacement: "Polynomial") -> "Polynomial":
        """Replace variable i by a polynomial in the same variables."""
        self._check_vars(replacement)
        max_e = max((m[i] for m in self.terms), default=0)
        pows = [Polynomial.constant(1, self.n_vars)]
        for _ in range(max_e):
            pows.append(pows[-1] * replacement)
        out = Polynomial.zero(self.n_vars)
        for m, c in self.terms.items():
            key = list(m)
            e = key[i]
            key[i] = 0
            out = out + Polynomial({tuple(key): c}, self.n_vars) * pows[e]
        return out

    def evaluate(self, points) -> "float | list[float]":
        """Float evaluation at one point (sequence) or many (sequence of)."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        flat = pts.reshape(-1, self.n_vars)
        out = np.zeros(flat.shape[0])
        for m, c in self.terms.items():
            term = float(c) * np.ones(flat.shape[0])
            for i, e in enumerate(m):
                if e:
                    term *= flat[:, i] ** e
            out += term
        return float(out[0]) if single else out

    def to_float(self) -> "Polynomial":
        return Polynomial({m: float(c) for m, c in self.terms.items()}, self.n_vars)

    def coefficient_rows(self) -> list:
        """Sorted [*exponents, float(coeff)] rows for serialization."""
        return [
            [*m, float(c)] for m, c in sorted(self.terms.items(), reverse=True)
        ]


# ---------------------------------------------------------------------------
# complex-pair helpers: real and imaginary parts of (x + i y)^m
# ---------------------------------------------------------------------------


def complex_power_parts(m: int, n_vars: int = 3, ix: int = 0, iy: int = 1):
    """(Re, Im) of (x_ix + i x_iy)^m as exact integer polynomials."""
    if m < 0:
        raise DomainError("negative complex power")
    re = Polynomial.constant(1, n_vars)
    im = Polynomial.zero(n_vars)
    x = Polynomial.variable(ix, n_vars)
    y = Polynomial.variable(iy, n_vars)
    for _ in range(m):
        re, im = re * x - im * y, re * y + im * x
    return re, im
