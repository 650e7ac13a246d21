"""Finite symmetry groups and the invariant-polynomial catalog: generator
invariance tables, group closures, exact simplex identities, hyperplane
Laplacians, critical-point data, and catalog integrity."""

import math
from fractions import Fraction

import numpy as np
import pytest

from zollforge.errors import ConfigurationError
from zollforge.polynomials import Polynomial
from zollforge.sphere import OrthogonalTransform
from zollforge.symmetry import (
    F_polynomial,
    H_polynomial,
    _ICO_CYCLE,
    _ICO_FIVEFOLD_Y,
    _close_exact,
    _icosahedral_forms,
    _octahedral_forms,
    _product,
    _witness_transforms,
    axial_rotation,
    build_group,
    catalog_entry,
    critical_points_powersum,
    form_product_invariance,
    invariant_polynomial,
    is_invariant,
    poly_laplacian,
    power_sum_polynomial,
    restrict_to_sphere,
    simplex_frame,
    stabilizer_verify,
    two_root_check,
    vandermonde_polynomial,
    vtilde_polynomial,
)


# ---------------------------------------------------------------------------
# generator invariance table
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_axial_invariance_table(n):
    F, H = F_polynomial(n), H_polynomial(n)
    ok, _ = is_invariant(F, axial_rotation(2 * math.pi / n).matrix, mode="float")
    assert ok, f"F_{n} must be invariant under the 2pi/{n} rotation"
    ok, m = is_invariant(F, axial_rotation(math.pi / n).matrix, mode="float")
    assert not ok, f"F_{n} must be broken by the pi/{n} rotation"
    assert m > 1e-6, f"breaking margin too small: {m:.2e}"
    ok, _ = is_invariant(H, axial_rotation(2 * math.pi / n).matrix, mode="float")
    assert ok, f"H_{n} must be invariant under the 2pi/{n} rotation"


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_equatorial_flip_splits_f_from_h(n):
    sig = np.diag([1.0, -1.0, -1.0])
    okF, _ = is_invariant(F_polynomial(n), sig, mode="float")
    okH, m = is_invariant(H_polynomial(n), sig, mode="float")
    assert okF, f"(zbar, -t) must fix F_{n}"
    assert not okH, f"(zbar, -t) must break H_{n} (margin {m:.2e})"


def test_mixed_rotation_distinguishes_degrees():
    # (-zeta_6 z, -t) fixes F_3 but not F_3 + F_6
    w = axial_rotation(math.pi + math.pi / 3, flip_t=True)
    ok, _ = is_invariant(F_polynomial(3), w.matrix, mode="float")
    assert ok, "F_3 must be invariant under (-zeta_6 z, -t)"
    ok, m = is_invariant(F_polynomial(3) + F_polynomial(6), w.matrix, mode="float")
    assert not ok and m > 1e-6, f"F_3 + F_6 must be broken, margin {m:.2e}"


# ---------------------------------------------------------------------------
# group construction
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name,n,order",
    [
        ("Id", None, 1),
        ("Id[Z2", None, 2),
        ("Zn", 3, 3),
        ("Dn", 3, 6),
        ("Dn", 4, 8),
        ("Zn[Z2n", 3, 6),
        ("Zn[Dn", 3, 6),
        ("Dn[D2n", 3, 12),
        ("T", None, 12),
        ("T[O", None, 24),
        ("O", None, 24),
        ("I", None, 60),
    ],
)
def test_group_orders(name, n, order):
    g = build_group(name, n)
    assert g.order == order, f"{g.name}: expected order {order}, got {g.order}"


def test_concrete_group_names():
    assert build_group("Z3[Z6").order == 6
    assert build_group("D2[D4").order == 8


@pytest.mark.parametrize(
    "args,match",
    [
        (("Zn", None), "needs the parameter"),
        (("Q7", 3), "unknown group"),
        (("Dn", 1), "needs n > 1"),
    ],
)
def test_group_name_errors(args, match):
    with pytest.raises(ConfigurationError, match=match):
        build_group(*args)


def test_mixed_group_has_no_central_inversion():
    g = build_group("Dn[D2n", 2)
    for el in g.elements:
        assert np.max(np.abs(el.matrix + np.eye(3))) > 1e-9, \
            "-Id must not occur in a mixed-orientation group"


# ---------------------------------------------------------------------------
# exact simplex identities
# ---------------------------------------------------------------------------


def test_simplex_pullback_of_cubes_is_3xyt():
    frame = simplex_frame(2)
    x, y, t = (Polynomial.variable(i, 3) for i in range(3))
    cubes = frame.pullback(power_sum_polynomial(2, 3))
    assert cubes == 3 * (x * y * t), f"got {cubes.coefficient_rows()}"


def test_simplex_pullback_of_vtilde_is_octahedral_product():
    frame = simplex_frame(2)
    p_oct = _product(_octahedral_forms())
    vt = frame.pullback(vtilde_polynomial(2))
    assert vt == -3 * p_oct
    assert p_oct.laplacian().is_zero, "octahedral product must be harmonic"


def test_simplex_frame_gram_matrix():
    for n in (2, 3, 4):
        fr = simplex_frame(n)
        V = np.asarray(fr.vertices, dtype=float)
        G = V @ V.T
        d = n + 2
        target = -np.ones((d, d)) / (n + 1) + np.eye(d) * (1 + 1 / (n + 1))
        assert np.max(np.abs(G - target)) < 1e-12, \
            f"simplex vertex Gram matrix off at n={n}"


def test_simplex_permutations_are_rotations():
    frame = simplex_frame(2)
    # 4-cycle is odd, 3-cycle is even; both must give orthogonal matrices
    for perm in ((1, 2, 3, 0), (1, 2, 0, 3)):
        T, exact = frame.rotation_from_permutation(perm)
        R = T.matrix
        assert np.max(np.abs(R @ R.T - np.eye(3))) < 1e-12
        assert np.max(np.abs(np.array(exact, dtype=float) - R)) < 1e-12


# ---------------------------------------------------------------------------
# hyperplane Laplacian
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_power_sum_cubed_harmonic_on_hyperplane(n):
    fr = simplex_frame(n)
    assert poly_laplacian(power_sum_polynomial(n, 3), fr).is_zero, \
        f"sum x^3 must be harmonic on the hyperplane (n={n})"
    assert not poly_laplacian(power_sum_polynomial(n, 5), fr).is_zero, \
        f"sum x^5 must not be harmonic on the hyperplane (n={n})"


def test_vandermonde_harmonic_both_branches():
    frame = simplex_frame(2)
    assert poly_laplacian(vandermonde_polynomial(2), frame).is_zero
    assert poly_laplacian(vtilde_polynomial(2), frame).is_zero


# ---------------------------------------------------------------------------
# critical points and the two-root bound
# ---------------------------------------------------------------------------


@pytest.mark.parametrize("m", [3, 5])
def test_critical_points_gradients_and_ordering(m):
    cs = critical_points_powersum(2, m)
    assert max(cs.gradient_norms) < 1e-10, \
        f"tangential gradient too large: {max(cs.gradient_norms):.2e}"
    vals = list(cs.values)
    assert all(a > b for a, b in zip(vals, vals[1:])), \
        f"critical values must decrease strictly: {vals}"


def test_critical_points_reject_even_power():
    with pytest.raises(ConfigurationError):
        critical_points_powersum(2, 4)


def test_two_root_check_examples():
    assert two_root_check(3, 0.0, 0.0) == 1
    assert two_root_check(5, 1.0, 0.0) == 2


def test_two_root_check_random_cases():
    rng = np.random.default_rng(7)
    for _ in range(50):
        m = int(rng.choice([3, 5, 7, 9]))
        c, d = rng.normal(scale=2.0, size=2)
        k = two_root_check(m, float(c), float(d))
        assert k <= 2, f"y^{m} + {c} y + {d} reported {k} roots"


# ---------------------------------------------------------------------------
# icosahedral entry
# ---------------------------------------------------------------------------


def test_icosahedral_product_degree_and_harmonicity():
    p_ico = _product(_icosahedral_forms())
    assert p_ico.degree() == 15
    assert p_ico.laplacian().is_zero


def test_icosahedral_orientation_choice():
    forms = _icosahedral_forms()
    good = build_group("I").exact_matrices
    assert all(form_product_invariance(forms, ex)[0] for ex in good), \
        "the shipped icosahedral group must preserve the form product"
    # the mirror-oriented five-fold generator closes to a group that does not
    alt = _close_exact([_ICO_CYCLE, _ICO_FIVEFOLD_Y])
    assert len(alt) == 60
    bad = sum(0 if form_product_invariance(forms, ex)[0] else 1 for ex in alt)
    assert bad > 0, "mirror orientation should break the form product"


# ---------------------------------------------------------------------------
# individual catalog constructions
# ---------------------------------------------------------------------------


def test_reflection_only_entry():
    P = invariant_polynomial("Id[Z2")
    ok, _ = is_invariant(P, np.diag([1.0, 1.0, -1.0]), mode="float")
    assert ok, "the reflection-only polynomial must be even in t"
    for w in _witness_transforms("Id[Z2", None):
        okw, mw = is_invariant(P, np.asarray(w, dtype=float), mode="float")
        assert not okw, f"witness fails to break the stabilizer: margin {mw:.2e}"


def test_trivial_stabilizer_entry_degrees():
    P = invariant_polynomial("Id")
    assert P.degrees_present() == (3, 5, 7)
    for d, comp in P.homogeneous_components().items():
        assert comp.laplacian().is_zero, f"degree-{d} component not harmonic"


def test_octahedral_entry_dual_verification_route():
    e = catalog_entry("O")
    assert e.report.element_route == "exact-coefficient"
    rep = stabilizer_verify(
        e.polynomial, e.group, e.witnesses, forms=_octahedral_forms()
    )
    assert rep.element_route == "linear-forms"
    assert min(rep.witness_margins) > 1e-3


def test_power_sum_degree_collision_rejected():
    with pytest.raises(ConfigurationError):
        invariant_polynomial("O", m=5)


def test_conjugation_covariance():
    # composing with A turns a G-invariant into an A^-1 G A-invariant
    A = OrthogonalTransform.rotation((0.3, -0.5, 0.81), 0.77)
    P = invariant_polynomial("Dn[D2n", 3).to_float().compose_linear(
        A.matrix.tolist()
    )
    for el in build_group("Dn[D2n", 3).elements:
        conj = A.matrix.T @ el.matrix @ A.matrix
        ok, m = is_invariant(P, conj, mode="float")
        assert ok, f"conjugated element fails invariance: margin {m:.2e}"


# ---------------------------------------------------------------------------
# full catalog
# ---------------------------------------------------------------------------


def test_catalog_size_and_entries(catalog_build):
    entries, _ = catalog_build
    assert len(entries) == 31
    names = {e.name for e in entries}
    for fixed in ("Id", "Id[Z2", "T", "T[O", "O", "I"):
        assert fixed in names, f"missing fixed entry {fixed}"
    for n in range(2, 7):
        assert f"D{n}[D{2 * n}" in names


def test_catalog_orders_match_classification(catalog_build):
    entries, _ = catalog_build
    expected_fixed = {"Id": 1, "Id[Z2": 2, "T": 12, "T[O": 24, "O": 24, "I": 60}
    for e in entries:
        if e.name in expected_fixed:
            assert e.group.order == expected_fixed[e.name], e.name
    by_name = {e.name: e for e in entries}
    for n in range(2, 7):
        assert by_name[f"Z{n}"].group.order == n
        assert by_name[f"D{n}"].group.order == 2 * n
        assert by_name[f"Z{n}[Z{2 * n}"].group.order == 2 * n
        assert by_name[f"Z{n}[D{n}"].group.order == 2 * n
        assert by_name[f"D{n}[D{2 * n}"].group.order == 4 * n


def test_catalog_polynomials_exact_odd_harmonic(catalog_build):
    entries, _ = catalog_build
    for e in entries:
        assert e.polynomial.is_exact(), f"{e.name}: coefficients must be exact"
        for d, comp in e.polynomial.homogeneous_components().items():
            assert d % 2 == 1 and d >= 3, f"{e.name}: bad degree {d}"
            assert comp.laplacian().is_zero, f"{e.name}: degree {d} not harmonic"


def test_catalog_witness_margins(catalog_build):
    entries, _ = catalog_build
    for e in entries:
        assert min(e.report.witness_margins) > 1e-3, \
            f"{e.name}: weakest witness margin {min(e.report.witness_margins):.2e}"


def test_catalog_json_payload(catalog_build):
    entries, _ = catalog_build
    d = entries[0].to_json_dict()
    assert set(d) == {"group", "order", "degree", "poly", "witnesses"}


# ---------------------------------------------------------------------------
# restriction to the sphere
# ---------------------------------------------------------------------------


def test_restriction_matches_polynomial_on_sphere():
    rng = np.random.default_rng(7)
    f3 = restrict_to_sphere(F_polynomial(3))
    pts = rng.normal(size=(50, 3))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    err = np.abs(F_polynomial(3).to_float().evaluate(pts) - f3.evaluate(pts)).max()
    assert err < 1e-10, f"band-limited restriction off by {err:.2e}"
