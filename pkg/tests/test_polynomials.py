"""Exact polynomial arithmetic: golden-ratio scalars, ring operations,
Laplacians, linear substitution, and float conversion."""

from fractions import Fraction

import numpy as np

from zollforge.polynomials import (
    GOLDEN_RATIO,
    GOLDEN_RATIO_INV,
    GoldenRational,
    Polynomial,
    complex_power_parts,
)


# ---------------------------------------------------------------------------
# golden-ratio scalars
# ---------------------------------------------------------------------------


def test_golden_rational_identities():
    phi = GOLDEN_RATIO
    phin = GOLDEN_RATIO_INV
    one = GoldenRational(Fraction(1), Fraction(0))
    assert phi * phi == phi + one, "phi^2 must equal phi + 1"
    assert phi * phin == one, "phi * phi^{-1} must equal 1"
    assert phi - phin == one, "phi - phi^{-1} must equal 1"


def test_golden_rational_float_value():
    gold = (1 + np.sqrt(5)) / 2
    assert abs(float(GOLDEN_RATIO) - gold) < 1e-15
    assert abs(float(GOLDEN_RATIO_INV) - 1 / gold) < 1e-15


def test_golden_rational_division():
    one = GoldenRational(Fraction(1), Fraction(0))
    q = GoldenRational(Fraction(3, 7), Fraction(-2, 5))
    assert q * (one / q) == one, "q * q^{-1} must equal 1"


# ---------------------------------------------------------------------------
# ring operations
# ---------------------------------------------------------------------------


def _xyz():
    return tuple(Polynomial.variable(i, 3) for i in range(3))


def test_basic_arithmetic_and_degrees():
    x, y, t = _xyz()
    p = (x + y) ** 2
    assert p == x * x + 2 * x * y + y * y
    assert p.degree() == 2
    assert p.is_homogeneous()
    assert (x**3 + y).degrees_present() == (1, 3)
    assert not (x**3 + y).is_homogeneous()
    assert Polynomial.zero(3).degree() == -1


def test_homogeneous_components():
    x, y, _ = _xyz()
    comps = (x**3 + y).homogeneous_components()
    assert sorted(comps) == [1, 3]
    assert comps[3] == x**3
    assert comps[1] == y


def test_laplacian_values():
    x, y, t = _xyz()
    assert (x**3).laplacian() == 6 * x
    r2 = x * x + y * y + t * t
    assert r2.laplacian() == Polynomial.constant(6, 3)


def test_complex_power_parts_harmonic():
    x, y, _ = _xyz()
    re3, im3 = complex_power_parts(3)
    assert re3 == x**3 - 3 * x * y**2
    assert im3 == 3 * x**2 * y - y**3
    assert re3.laplacian().is_zero
    assert im3.laplacian().is_zero
    re24, im24 = complex_power_parts(24)
    assert re24.laplacian().is_zero and im24.laplacian().is_zero
    assert re24.degree() == 24


def test_derivative():
    x, y, _ = _xyz()
    p = x**2 * y
    assert p.derivative(0) == 2 * x * y
    assert p.derivative(1) == x * x
    assert p.derivative(2).is_zero


def test_hess_sum():
    s4 = sum((Polynomial.variable(i, 4) for i in range(4)), Polynomial.zero(4))
    assert (s4 * s4).hess_sum() == Polynomial.constant(32, 4)
    p3 = sum(
        (Polynomial.variable(i, 4) ** 3 for i in range(4)), Polynomial.zero(4)
    )
    assert p3.hess_sum() == 6 * s4


# ---------------------------------------------------------------------------
# composition and substitution
# ---------------------------------------------------------------------------


def test_compose_linear_rotation():
    re3, im3 = complex_power_parts(3)
    rot = [[0, 1, 0], [-1, 0, 0], [0, 0, 1]]
    q = re3.compose_linear(rot)
    assert q == -1 * im3, f"compose mismatch: {q.terms}"


def test_compose_linear_rectangular_exact():
    p3 = sum(
        (Polynomial.variable(i, 4) ** 3 for i in range(4)), Polynomial.zero(4)
    )
    half = Fraction(1, 2)
    LT = [
        [half, half, -half],
        [half, -half, half],
        [-half, half, half],
        [-half, -half, -half],
    ]
    q4 = p3.compose_linear(LT)
    assert q4.n_vars == 3
    assert q4.is_exact()
    assert q4.laplacian().is_zero, f"pullback laplacian: {q4.laplacian().terms}"


def test_substitute_eliminates_variable():
    s4 = sum((Polynomial.variable(i, 4) for i in range(4)), Polynomial.zero(4))
    s3neg = -1 * sum(
        (Polynomial.variable(i, 4) for i in range(3)), Polynomial.zero(4)
    )
    assert (s4 * s4).substitute(3, s3neg).is_zero


# ---------------------------------------------------------------------------
# evaluation and float conversion
# ---------------------------------------------------------------------------


def test_evaluate_single_and_batch():
    re3, _ = complex_power_parts(3)
    val = re3.evaluate([1.0, 2.0, 5.0])
    assert abs(val - (1 - 3 * 1 * 4)) < 1e-14
    vals = re3.evaluate(np.array([[1.0, 2.0, 5.0], [0.5, 0.25, 0.0]]))
    assert vals.shape == (2,)
    assert abs(vals[1] - (0.5**3 - 3 * 0.5 * 0.25**2)) < 1e-15


def test_golden_coefficients_survive_arithmetic():
    x, y, _ = _xyz()
    phi, phin = GOLDEN_RATIO, GOLDEN_RATIO_INV
    gp = phi * x + phin * y
    gp2 = gp * gp
    two = GoldenRational(Fraction(2), Fraction(0))
    assert gp2.terms[(1, 1, 0)] == two * (phi * phin)
    assert gp2.is_exact()
    fl = gp2.to_float()
    assert not fl.is_exact()
    gold = (1 + np.sqrt(5)) / 2
    assert abs(fl.terms[(2, 0, 0)] - gold**2) < 1e-15


def test_coefficient_rows_and_max_abs():
    re3, _ = complex_power_parts(3)
    assert re3.max_abs_coeff() == 3.0
    rows = re3.coefficient_rows()
    assert all(len(r) == 4 for r in rows)
