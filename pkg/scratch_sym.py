"""Smoke checks for symmetry.py before the real test suite."""

import math
import time

import numpy as np

from zollforge.polynomials import Polynomial, GOLDEN_RATIO
from zollforge.symmetry import (
    F_polynomial,
    H_polynomial,
    axial_rotation,
    axial_conjugation,
    build_group,
    build_catalog,
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
    type_iii_group,
    vandermonde_polynomial,
    vtilde_polynomial,
    _icosahedral_forms,
    _octahedral_forms,
    _product,
    _ICO_FIVEFOLD,
    _ICO_FIVEFOLD_Y,
    _ICO_CYCLE,
    _close_exact,
)

rng = np.random.default_rng(7)


def check(label, ok, detail=""):
    mark = "ok " if ok else "FAIL"
    print(f"[{mark}] {label} {detail}")
    if not ok:
        raise SystemExit(f"smoke failure: {label}")


# -- invariance table spot checks -------------------------------------------
for n in (2, 3, 4, 5):
    F, H = F_polynomial(n), H_polynomial(n)
    ok, _ = is_invariant(F, axial_rotation(2 * math.pi / n).matrix, mode="float")
    check(f"F_{n} invariant under 2pi/{n} rotation", ok)
    ok, m = is_invariant(F, axial_rotation(math.pi / n).matrix, mode="float")
    check(f"F_{n} broken by pi/{n} rotation", not ok, f"margin {m:.2e}")
    ok, _ = is_invariant(H, axial_rotation(2 * math.pi / n).matrix, mode="float")
    check(f"H_{n} invariant under 2pi/{n} rotation", ok)
    # sigma = (zbar, -t) preserves F_n, breaks H_n
    sig = np.diag([1.0, -1.0, -1.0])
    okF, _ = is_invariant(F, sig, mode="float")
    okH, m = is_invariant(H, sig, mode="float")
    check(f"sigma fixes F_{n} and breaks H_{n}", okF and not okH, f"margin {m:.2e}")

# spec-style example: F_3 invariant under (-zeta_6 z, -t)
w = axial_rotation(math.pi + math.pi / 3, flip_t=True)
ok, _ = is_invariant(F_polynomial(3), w.matrix, mode="float")
check("F_3 invariant under (-zeta_6 z, -t)", ok)
ok, m = is_invariant(
    F_polynomial(3) + F_polynomial(6), w.matrix, mode="float"
)
check("F_3+F_6 broken by (-zeta_6 z, -t)", not ok, f"margin {m:.2e}")

# -- group closures -----------------------------------------------------------
for name, n, order in (
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
):
    g = build_group(name, n)
    check(f"group {g.name} order {order}", g.order == order, f"got {g.order}")

g = build_group("Z3[Z6")
check("concrete name Z3[Z6", g.order == 6, g.name)

# -- exact simplex identities -------------------------------------------------
frame = simplex_frame(2)
x, y, t = (Polynomial.variable(i, 3) for i in range(3))
cubes = frame.pullback(power_sum_polynomial(2, 3))
check("s3 o L^T == 3xyt", cubes == 3 * (x * y * t), repr(cubes.coefficient_rows()))

p_oct = _product(_octahedral_forms())
vt = frame.pullback(vtilde_polynomial(2))
check("Vtilde o L^T == -3 * octahedral product", vt == -3 * p_oct)

check("octahedral product harmonic", p_oct.laplacian().is_zero)

# -- hyperplane Laplacian -----------------------------------------------------
for nn in (2, 3):
    fr = simplex_frame(nn)
    lap3 = poly_laplacian(power_sum_polynomial(nn, 3), fr)
    check(f"sum x^3 harmonic on V (n={nn})", lap3.is_zero)
    lap5 = poly_laplacian(power_sum_polynomial(nn, 5), fr)
    check(f"sum x^5 NOT harmonic on V (n={nn})", not lap5.is_zero)
v4 = vandermonde_polynomial(2)
check("V harmonic on V (n=2, branch A)", poly_laplacian(v4, frame).is_zero)
check(
    "s3*V harmonic on V (n=2, branch B)",
    poly_laplacian(vtilde_polynomial(2), frame).is_zero,
)

# -- critical points and two-root --------------------------------------------
for m in (3, 5):
    cs = critical_points_powersum(2, m)
    print(f"     n=2 m={m}: values {cs.values} gaps {cs.vertex_gap:.2e}")
    check(f"critical points n=2 m={m}", max(cs.gradient_norms) < 1e-10)
check("two_root_check(3, 0, 0) == 1", two_root_check(3, 0.0, 0.0) == 1)
check("two_root_check(5, 1, 0) == 2", two_root_check(5, 1.0, 0.0) == 2)
for _ in range(50):
    m = int(rng.choice([3, 5, 7, 9]))
    c, d = rng.normal(scale=2.0, size=2)
    k = two_root_check(m, float(c), float(d))
    assert k <= 2
print("     random two_root_check all <= 2")

# -- icosahedral orientation --------------------------------------------------
forms_i = _icosahedral_forms()
p_ico = _product(forms_i)
print(f"     icosahedral degree {p_ico.degree()}, terms {len(p_ico.terms)}")
check("icosahedral product harmonic", p_ico.laplacian().is_zero)

gI = build_group("I")
bad = 0
for i, ex in enumerate(gI.exact_matrices):
    ok, sc = form_product_invariance(forms_i, ex)
    if not ok:
        bad += 1
check("icosahedral product invariant under all 60 (B orientation)", bad == 0,
      f"{bad} failures")

alt = _close_exact([_ICO_CYCLE, _ICO_FIVEFOLD_Y])
print(f"     A-orientation closure size {len(alt)}")
bad_a = sum(
    0 if form_product_invariance(forms_i, ex)[0] else 1 for ex in alt
)
print(f"     A-orientation failures: {bad_a} of {len(alt)}")

# -- reflection-only entry ----------------------------------------------------
P_refl = invariant_polynomial("Id[Z2")
print(f"     Id[Z2 degrees {P_refl.degrees_present()}")
ok, _ = is_invariant(P_refl, np.diag([1.0, 1.0, -1.0]), mode="float")
check("Id[Z2 polynomial invariant under t -> -t", ok)
from zollforge.symmetry import _witness_transforms
margins = []
for w in _witness_transforms("Id[Z2", None):
    okw, mw = is_invariant(P_refl, np.asarray(w, dtype=float), mode="float")
    margins.append(mw)
    assert not okw, f"witness fails to break: margin {mw}"
print(f"     Id[Z2 witness margins min {min(margins):.3e}")

# -- trivial-stabilizer entry -------------------------------------------------
P_id = invariant_polynomial("Id")
check("Id polynomial degrees {3,5,7}", P_id.degrees_present() == (3, 5, 7))
for d, comp in P_id.homogeneous_components().items():
    check(f"Id component degree {d} harmonic", comp.laplacian().is_zero)

# -- catalog entries ----------------------------------------------------------
t0 = time.perf_counter()
for name in ("Id", "Id[Z2", "T", "T[O", "O", "I"):
    t1 = time.perf_counter()
    e = catalog_entry(name)
    dt = time.perf_counter() - t1
    print(
        f"     entry {e.name:8s} order {e.group.order:3d} deg {e.degree:2d} "
        f"route {e.report.element_route:18s} "
        f"min witness {min(e.report.witness_margins):.3e}  [{dt:.2f}s]"
    )
for n in (2, 3):
    for fam in ("Zn", "Dn", "Zn[Z2n", "Zn[Dn", "Dn[D2n"):
        t1 = time.perf_counter()
        e = catalog_entry(fam, n)
        dt = time.perf_counter() - t1
        print(
            f"     entry {e.name:8s} order {e.group.order:3d} deg {e.degree:2d} "
            f"route {e.report.element_route:18s} "
            f"min witness {min(e.report.witness_margins):.3e}  [{dt:.2f}s]"
        )
print(f"     fixed + n=2,3 entries: {time.perf_counter() - t0:.2f}s")

# dual route on the octahedral entry
eO = catalog_entry("O")
rep = stabilizer_verify(
    eO.polynomial, eO.group, eO.witnesses, forms=_octahedral_forms()
)
check("octahedral entry passes via linear-forms route too",
      rep.element_route == "linear-forms")

# conjugation covariance on one entry
A = OrthA = None
from zollforge.sphere import OrthogonalTransform
A = OrthogonalTransform.rotation((0.3, -0.5, 0.81), 0.77)
P3 = invariant_polynomial("Dn[D2n", 3)
PA = P3.to_float().compose_linear(A.matrix.tolist())
gD = build_group("Dn[D2n", 3)
worst = 0.0
for el in gD.elements:
    conj = A.matrix.T @ el.matrix @ A.matrix
    okc, mc = is_invariant(PA, conj, mode="float")
    worst = max(worst, mc)
    assert okc
check("conjugation covariance on D3[D6", True, f"max margin {worst:.2e}")

# -- full catalog -------------------------------------------------------------
t0 = time.perf_counter()
cat = build_catalog()
dt = time.perf_counter() - t0
check("full catalog entry count", len(cat) == 31, f"{len(cat)} in {dt:.1f}s")
print(f"     full catalog wall time {dt:.1f}s")
slowest = max(cat, key=lambda e: e.polynomial.degree())
print(f"     highest degree {slowest.degree} ({slowest.name})")

# JSON round trip
d = cat[0].to_json_dict()
assert set(d) == {"group", "order", "degree", "poly", "witnesses"}

# -- restriction to the sphere ------------------------------------------------
f3 = restrict_to_sphere(F_polynomial(3))
pts = rng.normal(size=(50, 3))
pts /= np.linalg.norm(pts, axis=1, keepdims=True)
vals_poly = F_polynomial(3).to_float().evaluate(pts)
vals_fun = f3.evaluate(pts)
err = np.abs(vals_poly - vals_fun).max()
check("restriction matches polynomial on S^2", err < 1e-10, f"err {err:.2e}")

print("ALL SMOKE CHECKS PASSED")
