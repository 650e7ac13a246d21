"""Smoke checks for polynomials.py before building symmetry.py on top."""

from fractions import Fraction

import numpy as np

from zollforge.polynomials import (
    GOLDEN_RATIO,
    GOLDEN_RATIO_INV,
    GoldenRational,
    Polynomial,
    complex_power_parts,
)

# --- GoldenRational ---------------------------------------------------------
phi = GOLDEN_RATIO
phin = GOLDEN_RATIO_INV
one = GoldenRational(Fraction(1), Fraction(0))
assert phi * phi == phi + one, "phi^2 = phi + 1"
assert phi * phin == one, "phi * phi^{-1} = 1"
assert phi - phin == one, "phi - phi^{-1} = 1"
gold = (1 + np.sqrt(5)) / 2
assert abs(float(phi) - gold) < 1e-15
assert abs(float(phin) - 1 / gold) < 1e-15
assert abs(float(phi / phi) - 1.0) == 0.0
q = GoldenRational(Fraction(3, 7), Fraction(-2, 5))
assert q * (one / q) == one
print("GoldenRational ok")

# --- Polynomial basics ------------------------------------------------------
x = Polynomial.variable(0, 3)
y = Polynomial.variable(1, 3)
t = Polynomial.variable(2, 3)

p = (x + y) ** 2
assert p == x * x + 2 * x * y + y * y
assert p.degree() == 2
assert p.is_homogeneous()
assert (x**3 + y).degrees_present() == (1, 3)
assert not (x**3 + y).is_homogeneous()
comps = (x**3 + y).homogeneous_components()
assert comps[3] == x**3 and comps[1] == y
assert Polynomial.zero(3).degree() == -1

# laplacian: Delta x^3 = 6x
assert (x**3).laplacian() == 6 * x
# Delta (x^2 + y^2 + t^2) = 6
r2 = x * x + y * y + t * t
assert r2.laplacian() == Polynomial.constant(6, 3)

# harmonic check: Re (x+iy)^3 = x^3 - 3xy^2 is harmonic
re3, im3 = complex_power_parts(3)
assert re3 == x**3 - 3 * x * y**2
assert im3 == 3 * x**2 * y - y**3
assert re3.laplacian().is_zero
assert im3.laplacian().is_zero
re24, im24 = complex_power_parts(24)
assert re24.laplacian().is_zero and im24.laplacian().is_zero
assert re24.degree() == 24

# derivative
assert (x**2 * y).derivative(0) == 2 * x * y
assert (x**2 * y).derivative(1) == x * x
assert (x**2 * y).derivative(2).is_zero

# hess_sum: P = (sum x_i)^2 in 4 vars -> Hess = 2*ones -> hess_sum = 2*16 = 32
s4 = sum(
    (Polynomial.variable(i, 4) for i in range(4)), Polynomial.zero(4)
)
assert (s4 * s4).hess_sum() == Polynomial.constant(32, 4)
# power sum cubed: P = sum x_i^3, Hess diag(6 x_i): hess_sum = 6 sum x_i
p3 = sum(
    (Polynomial.variable(i, 4) ** 3 for i in range(4)), Polynomial.zero(4)
)
assert p3.hess_sum() == 6 * s4

# compose_linear with a rotation: x -> y, y -> -x (90 deg about t)
rot = [[0, 1, 0], [-1, 0, 0], [0, 0, 1]]
q = re3.compose_linear(rot)
# Re((y - ix)^3) = Re((-i)^3 (x+iy)^3) = Re(i z^3) = -Im z^3
assert q == -1 * im3, f"compose mismatch: {q.terms} vs {(-1 * im3).terms}"

# rectangular compose: pull back 4-var power sum to 3 vars via L^T (3 rows? no:
# compose_linear rows give new-variable count = len of each row; matrix is
# old_vars x new_vars acting as x_old = M @ x_new)
half = Fraction(1, 2)
LT = [
    [half, half, -half],
    [half, -half, half],
    [-half, half, half],
    [-half, -half, -half],
]
q4 = p3.compose_linear(LT)
assert q4.n_vars == 3
# sum over simplex directions of cubes: known to be harmonic in R^3
assert q4.laplacian().is_zero, f"pullback laplacian: {q4.laplacian().terms}"
assert q4.is_exact()

# substitute: eliminate last var via x3 = -(x0+x1+x2)
s3neg = -1 * sum(
    (Polynomial.variable(i, 4) for i in range(3)), Polynomial.zero(4)
)
sub = (s4 * s4).substitute(3, s3neg)
assert sub.is_zero

# evaluate
val = re3.evaluate([1.0, 2.0, 5.0])
assert abs(val - (1 - 3 * 1 * 4)) < 1e-14
vals = re3.evaluate(np.array([[1.0, 2.0, 5.0], [0.5, 0.25, 0.0]]))
assert vals.shape == (2,)
assert abs(vals[1] - (0.5**3 - 3 * 0.5 * 0.25**2)) < 1e-15

# golden coefficients survive arithmetic and floatify
gp = GOLDEN_RATIO * x + GOLDEN_RATIO_INV * y
gp2 = gp * gp
c_xy = gp2.terms[(1, 1, 0)]
assert c_xy == GoldenRational(Fraction(2), Fraction(0)) * (phi * phin)
assert gp2.is_exact()
fl = gp2.to_float()
assert not fl.is_exact()
assert abs(fl.terms[(2, 0, 0)] - gold**2) < 1e-15

# max_abs_coeff
assert re3.max_abs_coeff() == 3.0

# coefficient_rows round trip shape
rows = re3.coefficient_rows()
assert all(len(r) == 4 for r in rows)

print("Polynomial ok")
print("all polynomial smoke checks passed")
