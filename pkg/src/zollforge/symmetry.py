"""Finite symmetry groups of S^2 and their invariant odd harmonic polynomials.

Catalog of conjugacy-class representatives of the finite subgroups of O(3)
that do not contain -Id, each paired with a polynomial P -- a sum of
homogeneous harmonic polynomials of odd degree >= 3 -- whose stabilizer
G_P = {T in O(3) : P o T = P} is exactly that group.  Correctness of each
catalog entry is enforced by machine-checkable gates: exact harmonicity of
every homogeneous component, group closure against the classification
order, invariance under every group element, and a battery of breaking
witnesses with quantified margins.

Conventions:
  * R^3 ~ C x R with coordinates (z, t), z = x + i y; polynomial variables
    are indexed (0, 1, 2) = (x, y, t).
  * Proper axial maps: (z, t) -> (zeta z, eps t); improper axial maps
    involve a conjugation: (z, t) -> (zeta zbar, eps t), eps = +-1.
  * Matrices act on column vectors; a transform A acts on polynomials by
    (P o A)(u) = P(A u), so stabilizers satisfy G_{P o A} = A^-1 G_P A.
  * Proper subgroups G1 of index two in G2 splice to the improper group
    G1[G2 = G1 union {-T : T in G2 minus G1} of order |G2|.
"""

from __future__ import annotations

import itertools
import math
import re as _re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import (
    CatalogIntegrityError,
    ConfigurationError,
    DomainError,
    NumericalError,
)
from .polynomials import (
    GOLDEN_RATIO,
    GOLDEN_RATIO_INV,
    GoldenRational,
    Polynomial,
    complex_power_parts,
)
from .sphere import OrthogonalTransform, SphereFunction, standard_grid

_MATCH_TOL = 1e-10
_INVARIANT_RTOL = 1e-8
_WITNESS_RFLOOR = 1e-6
_CLOSURE_CAP = 240


# ---------------------------------------------------------------------------
# exact matrices: nested tuples of int / Fraction / GoldenRational entries
# ---------------------------------------------------------------------------


def _canon_entry(e):
    if isinstance(e, GoldenRational):
        return e.a if e.b == 0 else e
    if isinstance(e, bool):
        raise ConfigurationError("boolean matrix entry")
    if isinstance(e, int):
        return Fraction(e)
    if isinstance(e, Fraction):
        return e
    raise ConfigurationError(f"matrix entry {e!r} is not exact")


def _exact_matrix(rows) -> tuple:
    return tuple(tuple(_canon_entry(e) for e in row) for row in rows)


def _mat_mul(A: tuple, B: tuple) -> tuple:
    if len(B) != len(A[0]):
        raise DomainError("incompatible exact matrix product")
    cols = len(B[0])
    out = []
    for row in A:
        acc = []
        for j in range(cols):
            s = Fraction(0)
            for k, a in enumerate(row):
                s = s + a * B[k][j]
            acc.append(_canon_entry(s))
        out.append(tuple(acc))
    return tuple(out)


def _mat_transpose(A: tuple) -> tuple:
    return tuple(tuple(A[i][j] for i in range(len(A))) for j in range(len(A[0])))


def _mat_neg(A: tuple) -> tuple:
    return tuple(tuple(-e for e in row) for row in A)


def _mat_float(A) -> np.ndarray:
    return np.array([[float(e) for e in row] for row in A], dtype=float)


def _exact_identity(d: int) -> tuple:
    return _exact_matrix(
        [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    )


def _exact_diag(*entries) -> tuple:
    d = len(entries)
    return _exact_matrix(
        [[entries[i] if i == j else 0 for j in range(d)] for i in range(d)]
    )


def _matrix_of(A):
    """(float matrix, exact matrix or None) for the accepted input kinds."""
    if isinstance(A, OrthogonalTransform):
        return A.matrix, None
    if isinstance(A, np.ndarray):
        return np.asarray(A, dtype=float), None
    rows = [list(r) for r in A]
    try:
        exact = _exact_matrix(rows)
    except ConfigurationError:
        return np.array(rows, dtype=float), None
    return _mat_float(exact), exact


# ---------------------------------------------------------------------------
# axial polynomial pair: F_n / H_n
# ---------------------------------------------------------------------------


def F_polynomial(n: int) -> Polynomial:
    """F_n = z^n + zbar^n (n odd) or (i z^n - i zbar^n) t (n even).

    Harmonic, homogeneous of odd degree, with axial stabilizer D_n[D_2n.
    """
    if n < 2:
        raise ConfigurationError(f"F_polynomial needs n > 1, got {n}")
    re_part, im_part = complex_power_parts(n)
    if n % 2 == 1:
        return 2 * re_part
    t = Polynomial.variable(2, 3)
    return -2 * (im_part * t)


def H_polynomial(n: int) -> Polynomial:
    """H_n = i z^n - i zbar^n (n odd) or -(z^n + zbar^n) t (n even).

    Equals F_n composed with (z, t) -> (xi z, t) for xi^n = i; its
    stabilizer is the corresponding conjugate of D_n[D_2n and contains
    Z_n[D_n.
    """
    if n < 2:
        raise ConfigurationError(f"H_polynomial needs n > 1, got {n}")
    re_part, im_part = complex_power_parts(n)
    if n % 2 == 1:
        return -2 * im_part
    t = Polynomial.variable(2, 3)
    return -2 * (re_part * t)


# ---------------------------------------------------------------------------
# axial transforms
# ---------------------------------------------------------------------------


def _axial_matrix(angle: float, conj: bool = False, flip_t: bool = False):
    c, s = math.cos(angle), math.sin(angle)
    eps = -1.0 if flip_t else 1.0
    if conj:
        block = [[c, s, 0.0], [s, -c, 0.0]]
    else:
        block = [[c, -s, 0.0], [s, c, 0.0]]
    return np.array(block + [[0.0, 0.0, eps]])


def axial_rotation(angle: float, flip_t: bool = False) -> OrthogonalTransform:
    """(z, t) -> (e^{i angle} z, +-t)."""
    return OrthogonalTransform(_axial_matrix(angle, conj=False, flip_t=flip_t))


def axial_conjugation(angle: float, flip_t: bool = False) -> OrthogonalTransform:
    """(z, t) -> (e^{i angle} zbar, +-t)."""
    return OrthogonalTransform(_axial_matrix(angle, conj=True, flip_t=flip_t))


# ---------------------------------------------------------------------------
# finite groups
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FiniteGroup:
    """Closed list of O(3) elements with optional exact matrices."""

    name: str
    elements: tuple
    generators: tuple
    exact_matrices: tuple | None = None

    @property
    def order(self) -> int:
        return len(self.elements)

    def _stack(self) -> np.ndarray:
        return np.stack([e.matrix for e in self.elements])

    def index_of(self, matrix, tol: float = _MATCH_TOL):
        m = np.asarray(matrix, dtype=float)
        d = np.abs(self._stack() - m[None]).max(axis=(1, 2))
        i = int(np.argmin(d))
        return i if d[i] <= tol else None

    def contains(self, transform, tol: float = _MATCH_TOL) -> bool:
        m = transform.matrix if isinstance(transform, OrthogonalTransform) else transform
        return self.index_of(m, tol) is not None

    def verify(self, expected_order: int | None = None) -> None:
        """Identity, closure, inverses, -Id exclusion, table associativity."""
        mats = self._stack()
        k = mats.shape[0]
        if expected_order is not None and k != expected_order:
            raise CatalogIntegrityError(
                f"group {self.name}: order {k}, classification expects "
                f"{expected_order}"
            )
        i_id = self.index_of(np.eye(3))
        if i_id is None:
            raise CatalogIntegrityError(f"group {self.name}: identity missing")
        if self.index_of(-np.eye(3)) is not None:
            raise CatalogIntegrityError(f"group {self.name}: contains -Id")
        prods = np.einsum("iab,jbc->ijac", mats, mats)
        diffs = np.abs(prods[:, :, None] - mats[None, None]).max(axis=(3, 4))
        table = diffs.argmin(axis=2)
        worst = diffs.min(axis=2).max()
        if worst > _MATCH_TOL:
            raise CatalogIntegrityError(
                f"group {self.name}: closure failure, product deviates by "
                f"{worst:.3e}"
            )
        inv_d = np.abs(
            mats.transpose(0, 2, 1)[:, None] - mats[None]
        ).max(axis=(2, 3))
        if inv_d.min(axis=1).max() > _MATCH_TOL:
            raise CatalogIntegrityError(f"group {self.name}: inverse missing")
        left = table[table, :]
        right = table[:, table]
        if not np.array_equal(left, right):
            raise CatalogIntegrityError(
                f"group {self.name}: Cayley table is not associative"
            )


def _close_float(generators, cap: int = _CLOSURE_CAP):
    elements = [np.eye(3)]
    frontier = [np.eye(3)]
    while frontier:
        fresh = []
        for m in frontier:
            for g in generators:
                p = m @ g
                if all(np.abs(p - e).max() > _MATCH_TOL for e in elements):
                    elements.append(p)
                    fresh.append(p)
                    if len(elements) > cap:
                        raise CatalogIntegrityError(
                            f"group closure exceeded {cap} elements"
                        )
        frontier = fresh
    return elements


def _close_exact(generators, cap: int = _CLOSURE_CAP):
    ident = _exact_identity(3)
    seen = {ident}
    elements = [ident]
    frontier = [ident]
    while frontier:
        fresh = []
        for m in frontier:
            for g in generators:
                p = _mat_mul(m, g)
                if p not in seen:
                    seen.add(p)
                    elements.append(p)
                    fresh.append(p)
                    if len(elements) > cap:
                        raise CatalogIntegrityError(
                            f"group closure exceeded {cap} elements"
                        )
        frontier = fresh
    return elements


def _group_from_exact(name, exact_elements, exact_generators) -> FiniteGroup:
    elements = tuple(
        OrthogonalTransform(_mat_float(m)) for m in exact_elements
    )
    generators = tuple(
        OrthogonalTransform(_mat_float(m)) for m in exact_generators
    )
    return FiniteGroup(name, elements, generators, tuple(exact_elements))


def _group_from_float(name, float_elements, float_generators) -> FiniteGroup:
    return FiniteGroup(
        name,
        tuple(OrthogonalTransform(m) for m in float_elements),
        tuple(OrthogonalTransform(m) for m in float_generators),
        None,
    )


def type_iii_group(g1: FiniteGroup, g2: FiniteGroup, name: str) -> FiniteGroup:
    """G1[G2 = G1 union {-T : T in G2 minus G1}; requires [G2 : G1] = 2."""
    if 2 * g1.order != g2.order:
        raise ConfigurationError(
            f"{name}: |{g2.name}| = {g2.order} is not twice |{g1.name}| = "
            f"{g1.order}"
        )
    for e in g1.elements:
        if not g2.contains(e):
            raise ConfigurationError(f"{name}: {g1.name} is not inside {g2.name}")
    elements = [e.matrix for e in g1.elements]
    added = []
    for e in g2.elements:
        if not g1.contains(e):
            elements.append(-e.matrix)
            added.append(-e.matrix)
    gens = [g.matrix for g in g1.generators] + added[:1]
    return _group_from_float(name, elements, gens)


# -- named constructions -----------------------------------------------------

_FIXED_NAMES = ("Id", "T", "O", "I", "Id[Z2", "T[O")
_FAMILY_NAMES = ("Zn", "Dn", "Zn[Z2n", "Zn[Dn", "Dn[D2n")


def _parse_group_name(name: str, n: int | None):
    s = str(name).strip()
    if s in _FIXED_NAMES:
        if n is not None:
            raise ConfigurationError(f"group {s!r} takes no parameter n")
        return s, None
    if s in _FAMILY_NAMES:
        if n is None:
            raise ConfigurationError(f"group family {s!r} needs the parameter n")
        n = int(n)
        if n < 2:
            raise ConfigurationError(f"group family {s!r} needs n > 1, got {n}")
        return s, n
    concrete = (
        (r"Z(\d+)\[Z(\d+)", "Zn[Z2n", 2),
        (r"Z(\d+)\[D(\d+)", "Zn[Dn", 1),
        (r"D(\d+)\[D(\d+)", "Dn[D2n", 2),
        (r"Z(\d+)", "Zn", None),
        (r"D(\d+)", "Dn", None),
    )
    for pattern, family, ratio in concrete:
        hit = _re.fullmatch(pattern, s)
        if hit is None:
            continue
        k = int(hit.group(1))
        if k < 2:
            raise ConfigurationError(f"group {s!r} needs index > 1")
        if ratio is not None and int(hit.group(2)) != ratio * k:
            raise ConfigurationError(f"group {s!r} has mismatched indices")
        if n is not None and int(n) != k:
            raise ConfigurationError(f"group {s!r} conflicts with n = {n}")
        return family, k
    raise ConfigurationError(f"unknown group name {name!r}")


def _display_name(family: str, n: int | None) -> str:
    if n is None:
        return family
    return {
        "Zn": f"Z{n}",
        "Dn": f"D{n}",
        "Zn[Z2n": f"Z{n}[Z{2 * n}",
        "Zn[Dn": f"Z{n}[D{n}",
        "Dn[D2n": f"D{n}[D{2 * n}",
    }[family]


_SIGMA_EXACT = _exact_diag(1, -1, -1)  # (zbar, -t)

# octahedron generators: quarter turns about the t- and x-axes
_OCT_GEN_T = _exact_matrix([[0, -1, 0], [1, 0, 0], [0, 0, 1]])
_OCT_GEN_X = _exact_matrix([[1, 0, 0], [0, 0, -1], [0, 1, 0]])

# icosahedron generators: coordinate 3-cycle and an exact golden 5-fold turn
# about the vertex axis (1, 0, phi) of the icosahedron whose mirror planes
# are the fifteen zero planes of the invariant product polynomial
_ICO_CYCLE = _exact_matrix([[0, 1, 0], [0, 0, 1], [1, 0, 0]])
_half = Fraction(1, 2)
_ICO_FIVEFOLD_Y = _exact_matrix(
    [
        [GOLDEN_RATIO_INV * _half, -GOLDEN_RATIO * _half, _half],
        [GOLDEN_RATIO * _half, _half, GOLDEN_RATIO_INV * _half],
        [-_half, GOLDEN_RATIO_INV * _half, GOLDEN_RATIO * _half],
    ]
)
_SWAP_XY = _exact_matrix([[0, 1, 0], [1, 0, 0], [0, 0, 1]])
_ICO_FIVEFOLD = _mat_mul(_SWAP_XY, _mat_mul(_ICO_FIVEFOLD_Y, _SWAP_XY))


def build_group(name: str, n: int | None = None) -> FiniteGroup:
    """Closed, verified element list for a classification representative.

    Accepts fixed names (Id, T, O, I, Id[Z2, T[O), family names with the
    parameter n (Zn, Dn, Zn[Z2n, Zn[Dn, Dn[D2n), or concrete spellings such
    as Z3, D4, Z3[Z6.
    """
    family, k = _parse_group_name(name, n)
    label = _display_name(family, k)
    if family == "Id":
        group = _group_from_exact(label, [_exact_identity(3)], [])
        expected = 1
    elif family == "Id[Z2":
        flip = _exact_diag(1, 1, -1)
        group = _group_from_exact(label, [_exact_identity(3), flip], [flip])
        expected = 2
    elif family == "Zn":
        gen = _axial_matrix(2.0 * math.pi / k)
        group = _group_from_float(label, _close_float([gen]), [gen])
        expected = k
    elif family == "Dn":
        gens = [_axial_matrix(2.0 * math.pi / k), _mat_float(_SIGMA_EXACT)]
        group = _group_from_float(label, _close_float(gens), gens)
        expected = 2 * k
    elif family == "O":
        gens = [_OCT_GEN_T, _OCT_GEN_X]
        group = _group_from_exact(label, _close_exact(gens), gens)
        expected = 24
    elif family == "I":
        gens = [_ICO_CYCLE, _ICO_FIVEFOLD]
        group = _group_from_exact(label, _close_exact(gens), gens)
        expected = 60
    elif family in ("T", "T[O"):
        frame = simplex_frame(2)
        even_only = family == "T"
        mats = []
        for sigma in itertools.permutations(range(4)):
            if even_only and _permutation_sign(sigma) < 0:
                continue
            mats.append(frame.rotation_from_permutation(sigma)[1])
        gens = [
            frame.rotation_from_permutation((1, 2, 0, 3))[1],
            frame.rotation_from_permutation(
                (1, 0, 3, 2) if even_only else (1, 0, 2, 3)
            )[1],
        ]
        group = _group_from_exact(label, mats, gens)
        expected = 12 if even_only else 24
    elif family == "Zn[Z2n":
        group = type_iii_group(build_group("Zn", k), build_group("Zn", 2 * k), label)
        expected = 2 * k
    elif family == "Zn[Dn":
        group = type_iii_group(build_group("Zn", k), build_group("Dn", k), label)
        expected = 2 * k
    else:  # Dn[D2n
        group = type_iii_group(build_group("Dn", k), build_group("Dn", 2 * k), label)
        expected = 4 * k
    group.verify(expected)
    return group


# ---------------------------------------------------------------------------
# the regular simplex in the hyperplane V^{n+1} = ones-perp of R^{n+2}
# ---------------------------------------------------------------------------


def _permutation_sign(sigma) -> int:
    inv = 0
    for i in range(len(sigma)):
        for j in range(i + 1, len(sigma)):
            if sigma[i] > sigma[j]:
                inv += 1
    return -1 if inv % 2 else 1


@dataclass(frozen=True)
class SimplexFrame:
    """Vertices v_i = ((n+2) e_i - ones)/sqrt((n+1)(n+2)) and a basis of V."""

    n: int
    vertices: np.ndarray
    basis: np.ndarray
    basis_exact: tuple | None

    def permutation_matrix(self, sigma) -> tuple:
        """Exact (n+2)x(n+2) matrix of e_i -> e_{sigma(i)}."""
        d = self.n + 2
        if sorted(sigma) != list(range(d)):
            raise ConfigurationError(f"{sigma} is not a permutation of {d} items")
        return _exact_matrix(
            [[1 if sigma[j] == i else 0 for j in range(d)] for i in range(d)]
        )

    def rotation_from_permutation(self, sigma):
        """(OrthogonalTransform, exact matrix or None) of B P_sigma B^T."""
        p = self.permutation_matrix(sigma)
        if self.basis_exact is not None:
            exact = _mat_mul(
                self.basis_exact, _mat_mul(p, _mat_transpose(self.basis_exact))
            )
            return OrthogonalTransform(_mat_float(exact)), exact
        m = self.basis @ _mat_float(p) @ self.basis.T
        return OrthogonalTransform(m), None

    def pullback(self, P: Polynomial) -> Polynomial:
        """P restricted to V in basis coordinates: u -> P(B^T u)."""
        if P.n_vars != self.n + 2:
            raise DomainError(
                f"polynomial has {P.n_vars} variables, frame needs {self.n + 2}"
            )
        if self.basis_exact is not None:
            return P.compose_linear(_mat_transpose(self.basis_exact))
        return P.to_float().compose_linear(self.basis.T.tolist())


def simplex_frame(n: int) -> SimplexFrame:
    if n < 1:
        raise ConfigurationError(f"simplex dimension must be >= 1, got {n}")
    d = n + 2
    scale = 1.0 / math.sqrt((n + 1) * (n + 2))
    vertices = scale * (d * np.eye(d) - np.ones((d, d)))
    gram = vertices @ vertices.T
    target = -np.full((d, d), 1.0 / (n + 1)) + np.eye(d) * (1.0 + 1.0 / (n + 1))
    if np.abs(gram - target).max() > 1e-12:
        raise NumericalError("simplex vertex Gram matrix off by more than 1e-12")
    if n == 2:
        h = Fraction(1, 2)
        basis_exact = _exact_matrix(
            [[h, h, -h, -h], [h, -h, h, -h], [h, -h, -h, h]]
        )
        basis = _mat_float(basis_exact)
    else:
        basis_exact = None
        diffs = np.zeros((d, n + 1))
        for j in range(n + 1):
            diffs[j, j] = 1.0
            diffs[j + 1, j] = -1.0
        q, _ = np.linalg.qr(diffs)
        basis = q.T
    if np.abs(basis @ np.ones(d)).max() > 1e-12:
        raise NumericalError("hyperplane basis is not orthogonal to ones")
    if np.abs(basis @ basis.T - np.eye(n + 1)).max() > 1e-12:
        raise NumericalError("hyperplane basis is not orthonormal")
    return SimplexFrame(n, vertices, basis, basis_exact)


def power_sum_polynomial(n: int, m: int) -> Polynomial:
    """sum_k x_k^m in R^{n+2}; restricts to an eigenfunction only for m = 3."""
    if m < 2 or m % 2 == 0:
        raise ConfigurationError(f"power sum needs odd m > 1, got {m}")
    d = n + 2
    out = Polynomial.zero(d)
    for i in range(d):
        out = out + Polynomial.variable(i, d) ** m
    return out


def vandermonde_polynomial(n: int) -> Polynomial:
    """prod_{i<j} (x_i - x_j) in R^{n+2}: the lowest-degree alternating form."""
    d = n + 2
    out = Polynomial.constant(1, d)
    for i in range(d):
        for j in range(i + 1, d):
            out = out * (Polynomial.variable(i, d) - Polynomial.variable(j, d))
    return out


def vtilde_polynomial(n: int) -> Polynomial:
    """Vandermonde, times the cubic power sum when its degree is even."""
    v = vandermonde_polynomial(n)
    if n % 4 in (0, 1):
        return v
    return power_sum_polynomial(n, 3) * v


def poly_laplacian(P: Polynomial, frame: SimplexFrame | None = None) -> Polynomial:
    """Ambient Laplacian, or the hyperplane Laplacian on V reduced mod sum x.

    With a frame, computes Delta_V P = Delta P - Hess P(N, N)/|ones|^2 and
    then eliminates the last variable via x_last = -(x_0 + ... ); the result
    is the zero polynomial exactly when P restricts harmonically to V.
    """
    if frame is None:
        return P.laplacian()
    d = frame.n + 2
    if P.n_vars != d:
        raise DomainError(
            f"polynomial has {P.n_vars} variables, frame needs {d}"
        )
    lap = P.laplacian() + Fraction(-1, d) * P.hess_sum()
    tail = Polynomial.zero(d)
    for i in range(d - 1):
        tail = tail - Polynomial.variable(i, d)
    return lap.substitute(d - 1, tail)


# ---------------------------------------------------------------------------
# invariance tests
# ---------------------------------------------------------------------------


def is_invariant(P: Polynomial, A, mode: str = "auto"):
    """(invariant, margin): compares coefficients of P o A against P.

    Exact mode needs exact coefficients and an exact matrix and decides by
    rational/golden arithmetic; float mode reports the largest coefficient
    deviation as the margin and accepts below 1e-8 of the coefficient scale.
    """
    fm, em = _matrix_of(A)
    if fm.shape != (P.n_vars, P.n_vars):
        raise DomainError(
            f"transform shape {fm.shape} does not act on {P.n_vars} variables"
        )
    if mode == "auto":
        mode = "exact" if (P.is_exact() and em is not None) else "float"
    if mode == "exact":
        if em is None or not P.is_exact():
            raise ConfigurationError(
                "exact invariance requires exact coefficients and matrix"
            )
        diff = P.compose_linear(em) - P
        return diff.is_zero, diff.max_abs_coeff()
    if mode != "float":
        raise ConfigurationError(f"unknown invariance mode {mode!r}")
    pf = P.to_float()
    diff = pf.compose_linear(fm.tolist()) - pf
    margin = diff.max_abs_coeff()
    return margin <= _INVARIANT_RTOL * max(1.0, pf.max_abs_coeff()), margin


def form_product_invariance(forms, A):
    """Exact invariance of prod(forms) under A by matching composed factors.

    Each composed linear form must be an exact scalar multiple of a distinct
    original form.  Returns (invariant, scalar) where scalar is the product
    of the matching factors (so -1 detects an exact sign flip); scalar is
    None when some factor has no match at all.
    """
    _, em = _matrix_of(A)
    if em is None:
        raise ConfigurationError("form matching requires an exact matrix")
    remaining = list(range(len(forms)))
    scalar = Fraction(1)
    for f in forms:
        if f.degree() != 1 or not f.is_homogeneous():
            raise ConfigurationError("form matching needs homogeneous linear forms")
        g = f.compose_linear(em)
        hit = None
        for idx in remaining:
            base = forms[idx]
            mono = next(iter(base.terms))
            if mono not in g.terms:
                continue
            num = g.terms[mono]
            if isinstance(num, int):
                num = Fraction(num)
            c = num / base.terms[mono]
            if (g - c * base).is_zero:
                hit = (idx, c)
                break
        if hit is None:
            return False, None
        remaining.remove(hit[0])
        scalar = scalar * hit[1]
    return scalar == 1, scalar


@dataclass(frozen=True)
class StabilizerReport:
    """Outcome of an invariance-plus-witness verification."""

    group_name: str
    order: int
    element_route: str
    max_element_margin: float
    witness_margins: tuple
    scale: float


def _iter_with_exact(group):
    if isinstance(group, FiniteGroup):
        exacts = group.exact_matrices or (None,) * group.order
        return group.name, list(zip(group.elements, exacts))
    items = []
    for a in group:
        fm, em = _matrix_of(a)
        items.append((OrthogonalTransform(fm), em))
    return "ad-hoc", items


def stabilizer_verify(P: Polynomial, group, witnesses=(), forms=None) -> StabilizerReport:
    """Assert P is invariant under every group element and broken by every
    witness with margin above 1e-6 of the coefficient scale.

    When the polynomial is supplied as a product of linear forms, element
    invariance is certified exactly by factor matching; otherwise by
    coefficient comparison (exact when both sides permit, float fallback).
    Raises CatalogIntegrityError on the first failure.
    """
    scale = max(1.0, P.max_abs_coeff())
    name, items = _iter_with_exact(group)
    max_margin = 0.0
    if forms is not None:
        route = "linear-forms"
        for i, (elem, exact) in enumerate(items):
            if exact is None:
                raise ConfigurationError(
                    "linear-form verification needs exact group matrices"
                )
            ok, scalar = form_product_invariance(forms, exact)
            if not ok:
                raise CatalogIntegrityError(
                    f"{name}: element {i} does not preserve the form product "
                    f"(scalar {scalar})"
                )
    else:
        exact_route = all(exact is not None for _, exact in items) and P.is_exact()
        route = "exact-coefficient" if exact_route else "float-coefficient"
        for i, (elem, exact) in enumerate(items):
            if exact_route:
                ok, margin = is_invariant(P, exact, mode="exact")
            else:
                ok, margin = is_invariant(P, elem.matrix, mode="float")
            max_margin = max(max_margin, margin)
            if not ok:
                raise CatalogIntegrityError(
                    f"{name}: element {i} breaks invariance, margin {margin:.3e}"
                )
    floor = _WITNESS_RFLOOR * scale
    margins = []
    for j, w in enumerate(witnesses):
        fm, _ = _matrix_of(w)
        _, margin = is_invariant(P, fm, mode="float")
        margins.append(margin)
        if margin <= floor:
            raise CatalogIntegrityError(
                f"{name}: witness {j} fails to break invariance "
                f"(margin {margin:.3e} <= {floor:.3e})"
            )
    return StabilizerReport(
        group_name=name,
        order=len(items),
        element_route=route,
        max_element_margin=float(max_margin),
        witness_margins=tuple(float(m) for m in margins),
        scale=float(scale),
    )


# ---------------------------------------------------------------------------
# power-sum critical points and the two-root bound
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PowerSumCriticalSet:
    """Critical data of sum x^m on S^n inside the hyperplane V^{n+1}.

    Representatives of C_k^+ have k entries a_k > 0 and n+2-k entries
    b_k < 0; C_k^- = -C_k^+; values t_k = f(C_k^+) decrease strictly in k.
    """

    n: int
    m: int
    values: tuple
    representatives: tuple
    gradient_norms: tuple
    vertex_gap: float


def critical_points_powersum(n: int, m: int) -> PowerSumCriticalSet:
    if m < 2 or m % 2 == 0:
        raise ConfigurationError(f"power sum needs odd m > 1, got {m}")
    if n < 1:
        raise ConfigurationError(f"sphere dimension must be >= 1, got {n}")
    d = n + 2
    nhat = np.ones(d) / math.sqrt(d)
    reps, values, gnorms = [], [], []
    for k in range(1, d // 2 + 1):
        a = math.sqrt((d - k) / (d * k))
        b = -math.sqrt(k / (d * (d - k)))
        x = np.array([a] * k + [b] * (d - k))
        if abs(x.sum()) > 1e-12 or abs(x @ x - 1.0) > 1e-12:
            raise NumericalError(f"critical representative k={k} off the sphere")
        grad = m * x ** (m - 1)
        tangential = grad - (grad @ nhat) * nhat - (grad @ x) * x
        gnorm = float(np.linalg.norm(tangential))
        if gnorm > 1e-10:
            raise NumericalError(
                f"critical representative k={k} has tangential gradient "
                f"{gnorm:.3e}"
            )
        reps.append(tuple(float(v) for v in x))
        values.append(float(k * a**m + (d - k) * b**m))
        gnorms.append(gnorm)
    for t_prev, t_next in zip(values, values[1:]):
        if not t_prev > t_next:
            raise NumericalError(
                f"critical values not strictly decreasing: {values}"
            )
    if values[-1] < -1e-15:
        raise NumericalError(f"last critical value negative: {values[-1]:.3e}")
    vertex = simplex_frame(n).vertices[0]
    # C_1^+ representative has its positive entry first, matching vertex v_1
    gap = float(np.linalg.norm(np.array(reps[0]) - vertex))
    return PowerSumCriticalSet(
        n=n,
        m=m,
        values=tuple(values),
        representatives=tuple(reps),
        gradient_norms=tuple(gnorms),
        vertex_gap=gap,
    )


def two_root_check(m: int, c: float, d: float) -> int:
    """Distinct real roots of y^{m-1} - c y - d for odd m; always <= 2.

    Sign-change sweep over the Cauchy bound with bisection polish, plus a
    tangency probe at the single real critical point of the polynomial.
    """
    if m < 2 or m % 2 == 0:
        raise ConfigurationError(f"two_root_check needs odd m > 1, got {m}")

    def q(y: float) -> float:
        return y ** (m - 1) - c * y - d

    bound = 1.0 + max(abs(c), abs(d))
    ys = np.linspace(-bound, bound, 10001)
    vals = ys ** (m - 1) - c * ys - d
    roots = [float(ys[i]) for i in np.nonzero(vals == 0.0)[0]]
    sign_change = np.nonzero(vals[:-1] * vals[1:] < 0.0)[0]
    for i in sign_change:
        lo, hi = float(ys[i]), float(ys[i + 1])
        for _ in range(60):
            mid = 0.5 * (lo + hi)
            if q(lo) * q(mid) <= 0.0:
                hi = mid
            else:
                lo = mid
        roots.append(0.5 * (lo + hi))
    # unique real critical point: (m-1) y^{m-2} = c with m-2 odd
    s = c / (m - 1)
    y_crit = math.copysign(abs(s) ** (1.0 / (m - 2)), s) if s != 0.0 else 0.0
    if abs(q(y_crit)) <= 1e-10 * max(1.0, bound ** (m - 1)):
        roots.append(y_crit)
    roots.sort()
    distinct = []
    for r in roots:
        if not distinct or abs(r - distinct[-1]) > 1e-8 * max(1.0, bound):
            distinct.append(r)
    count = len(distinct)
    if count > 2:
        raise NumericalError(
            f"y^{m - 1} - {c} y - {d} produced {count} distinct real roots"
        )
    return count


# ---------------------------------------------------------------------------
# catalog polynomials
# ---------------------------------------------------------------------------


def _octahedral_forms():
    x, y, t = (Polynomial.variable(i, 3) for i in range(3))
    return [x, y, t, x - y, x + y, y - t, y + t, t - x, t + x]


def _icosahedral_forms():
    x, y, t = (Polynomial.variable(i, 3) for i in range(3))
    phi, psi = GOLDEN_RATIO, GOLDEN_RATIO_INV
    triples = []
    for a, b, c in ((phi, psi, 1), (1, phi, psi), (psi, 1, phi)):
        triples.extend(
            [
                (a, b, c),
                (-a, b, c),
                (a, -b, c),
                (a, b, -c),
            ]
        )
    forms = [x, y, t]
    for a, b, c in triples:
        forms.append(a * x + b * y + c * t)
    return forms


def _product(forms) -> Polynomial:
    out = Polynomial.constant(1, forms[0].n_vars)
    for f in forms:
        out = out * f
    return out


def _zonal_axis_sum() -> Polynomial:
    """Odd zonal solid harmonics of degrees 3, 5, 7 about the t, x, y axes.

    Each summand is fixed exactly by the orthogonal maps fixing its axis;
    three distinct axes and distinct degrees force a trivial stabilizer.
    """
    x, y, t = (Polynomial.variable(i, 3) for i in range(3))
    r2 = x * x + y * y + t * t
    deg3_t = 2 * t**3 - 3 * (x * x) * t - 3 * (y * y) * t
    deg5_x = 63 * x**5 - 70 * x**3 * r2 + 15 * x * r2**2
    deg7_y = (
        429 * y**7 - 693 * y**5 * r2 + 315 * y**3 * r2**2 - 35 * y * r2**3
    )
    return deg3_t + deg5_x + deg7_y


# inverse quarter turn about the x-axis, and the x <-> t axis swap
_X_QUARTER_INV = _exact_matrix([[1, 0, 0], [0, 0, 1], [0, -1, 0]])
_V_SWAP_XT = _exact_matrix([[0, 0, 1], [0, 1, 0], [1, 0, 0]])


def _reflection_only_polynomial() -> Polynomial:
    """Invariant polynomial of the single-reflection group {Id, (z, -t)}.

    Sum of two axial pairs with stabilizers conjugate by the quarter turn
    T(x, y, t) = (x, -t, y); their degree components intersect the eight
    candidate stabilizers of the cubic part in exactly {Id, (-zbar, t)},
    and the final axis swap moves the fixed reflection onto t -> -t.
    """
    p1 = H_polynomial(4) + H_polynomial(8)
    p2 = H_polynomial(2) + H_polynomial(4)
    core = p1.compose_linear(_X_QUARTER_INV) + p2
    return core.compose_linear(_V_SWAP_XT)


def invariant_polynomial(name: str, n: int | None = None, m: int | None = None) -> Polynomial:
    """The catalog polynomial (in R^3) whose stabilizer is the named group.

    The optional m selects the power-sum degree of the simplex entries
    (default 3, the only choice whose restriction is an eigenfunction).
    """
    family, k = _parse_group_name(name, n)
    if m is not None and family not in ("T", "T[O"):
        raise ConfigurationError(f"group {name!r} takes no power-sum degree")
    if family == "Dn[D2n":
        return F_polynomial(k)
    if family == "Zn[Dn":
        return H_polynomial(k) + H_polynomial(2 * k)
    if family == "Zn[Z2n":
        return H_polynomial(k) + F_polynomial(3 * k)
    if family == "Dn":
        return F_polynomial(k) + F_polynomial(2 * k)
    if family == "Zn":
        return F_polynomial(k) + H_polynomial(2 * k) + F_polynomial(4 * k)
    if family == "O":
        return _product(_octahedral_forms())
    if family == "I":
        return _product(_icosahedral_forms())
    if family == "Id":
        return _zonal_axis_sum()
    if family == "Id[Z2":
        return _reflection_only_polynomial()
    frame = simplex_frame(2)
    mm = 3 if m is None else int(m)
    if mm < 2 or mm % 2 == 0:
        raise ConfigurationError(f"power-sum degree must be odd > 1, got {mm}")
    cubes = frame.pullback(power_sum_polynomial(2, mm))
    if family == "T[O":
        return cubes
    vt = frame.pullback(vtilde_polynomial(2))
    if mm == vt.degree():
        raise ConfigurationError(
            f"power-sum degree {mm} collides with the alternating part"
        )
    return vt + cubes


# ---------------------------------------------------------------------------
# catalog assembly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CatalogEntry:
    """Verified (group, polynomial, witnesses) triple."""

    name: str
    group: FiniteGroup
    polynomial: Polynomial
    witnesses: tuple
    report: StabilizerReport

    @property
    def degree(self) -> int:
        return self.polynomial.degree()

    def to_json_dict(self) -> dict:
        return {
            "group": self.name,
            "order": self.group.order,
            "degree": self.degree,
            "poly": self.polynomial.coefficient_rows(),
            "witnesses": [w.matrix.tolist() for w in self.witnesses],
        }


def _witness_transforms(family: str, k: int | None):
    minus_zbar = np.diag([-1.0, 1.0, 1.0])  # (-zbar, t)
    sigma = np.diag([1.0, -1.0, -1.0])  # (zbar, -t)
    if family == "Dn[D2n":
        return [
            _axial_matrix(2.0 * math.pi / (3 * k)),
            _axial_matrix(math.pi / k),
            minus_zbar,
        ]
    if family == "Zn[Dn":
        return [
            _axial_matrix(math.pi + math.pi / k, flip_t=True),
            sigma,
            _axial_matrix(math.pi / k),
        ]
    if family == "Zn[Z2n":
        return [
            _axial_matrix(-math.pi / k, conj=True, flip_t=True),
            sigma,
            minus_zbar,
        ]
    if family == "Dn":
        return [
            _axial_matrix(math.pi + math.pi / k, flip_t=True),
            _axial_matrix(math.pi / k),
            minus_zbar,
        ]
    if family == "Zn":
        return [
            sigma,
            _axial_matrix(math.pi + math.pi / k, flip_t=True),
            minus_zbar,
            _axial_matrix(math.pi / k),
        ]
    if family == "Id":
        # every non-identity sign pattern, -Id, and a quarter turn about
        # each coordinate axis
        mats = [
            np.diag([1.0, 1.0, -1.0]),
            np.diag([-1.0, 1.0, 1.0]),
            np.diag([1.0, -1.0, 1.0]),
            np.diag([-1.0, -1.0, 1.0]),
            np.diag([1.0, -1.0, -1.0]),
            np.diag([-1.0, 1.0, -1.0]),
            -np.eye(3),
            _mat_float(_OCT_GEN_T),
            _mat_float(_OCT_GEN_X),
            np.array([[0.0, 0.0, 1.0], [0.0, 1.0, 0.0], [-1.0, 0.0, 0.0]]),
        ]
        return mats
    if family == "Id[Z2":
        # all candidates from the eight-element stabilizer of the cubic
        # component that the higher components must reject, conjugated by
        # the axis swap, plus -Id
        candidates = [
            _exact_diag(-1, -1, 1),
            _exact_matrix([[0, -1, 0], [1, 0, 0], [0, 0, -1]]),
            _exact_matrix([[0, 1, 0], [-1, 0, 0], [0, 0, -1]]),
            _exact_diag(1, -1, 1),
            _exact_matrix([[0, 1, 0], [1, 0, 0], [0, 0, -1]]),
            _exact_matrix([[0, -1, 0], [-1, 0, 0], [0, 0, -1]]),
        ]
        mats = [
            _mat_float(_mat_mul(_V_SWAP_XT, _mat_mul(c, _V_SWAP_XT)))
            for c in candidates
        ]
        mats.append(-np.eye(3))
        return mats
    if family == "T":
        frame = simplex_frame(2)
        mats = [
            frame.rotation_from_permutation(sigma)[0].matrix
            for sigma in itertools.permutations(range(4))
            if _permutation_sign(sigma) < 0
        ]
        mats.append(-np.eye(3))
        return mats
    if family == "T[O":
        return [
            -np.eye(3),
            OrthogonalTransform.rotation((0.0, 0.0, 1.0), 2.0 * math.pi / 5.0).matrix,
            OrthogonalTransform.rotation((0.0, 0.0, 1.0), 2.0 * math.pi / 3.0).matrix,
        ]
    if family == "O":
        return [
            np.diag([-1.0, 1.0, 1.0]),
            OrthogonalTransform.rotation((0.0, 0.0, 1.0), math.pi / 4.0).matrix,
            -np.eye(3),
        ]
    if family == "I":
        return [
            -np.eye(3),
            _mat_float(_SWAP_XY),
            OrthogonalTransform.rotation((0.0, 0.0, 1.0), 2.0 * math.pi / 5.0).matrix,
        ]
    raise ConfigurationError(f"no witness battery for {family!r}")


def _component_gates(label: str, P: Polynomial) -> None:
    if not P.is_exact():
        raise CatalogIntegrityError(f"{label}: coefficients are not exact")
    if P.is_zero:
        raise CatalogIntegrityError(f"{label}: zero polynomial")
    for degree, comp in P.homogeneous_components().items():
        if degree % 2 == 0 or degree < 3:
            raise CatalogIntegrityError(
                f"{label}: component degree {degree} is not odd >= 3"
            )
        if not comp.laplacian().is_zero:
            raise CatalogIntegrityError(
                f"{label}: degree-{degree} component is not harmonic"
            )


def catalog_entry(name: str, n: int | None = None) -> CatalogEntry:
    """Build and gate one catalog entry; raises CatalogIntegrityError."""
    family, k = _parse_group_name(name, n)
    label = _display_name(family, k)
    P = invariant_polynomial(family, k)
    _component_gates(label, P)
    group = build_group(family, k)
    witnesses = tuple(
        w if isinstance(w, OrthogonalTransform) else OrthogonalTransform(w)
        for w in _witness_transforms(family, k)
    )
    forms = _icosahedral_forms() if family == "I" else None
    report = stabilizer_verify(P, group, witnesses, forms=forms)
    return CatalogEntry(
        name=label,
        group=group,
        polynomial=P,
        witnesses=witnesses,
        report=report,
    )


_FIXED_CATALOG = ("Id", "Id[Z2", "T", "T[O", "O", "I")


def build_catalog(n_values=(2, 3, 4, 5, 6)) -> tuple:
    """Catalog entries for all fixed groups and each family at each n."""
    entries = [catalog_entry(name) for name in _FIXED_CATALOG]
    for n in n_values:
        for family in ("Zn", "Dn", "Zn[Z2n", "Zn[Dn", "Dn[D2n"):
            entries.append(catalog_entry(family, n))
    return tuple(entries)


# ---------------------------------------------------------------------------
# restriction to the sphere
# ---------------------------------------------------------------------------


def restrict_to_sphere(P: Polynomial, l_max: int | None = None) -> SphereFunction:
    """Restriction of a 3-variable polynomial to S^2 as a band-limited
    function; sums of solid harmonics restrict exactly at l_max = degree."""
    if P.n_vars != 3:
        raise DomainError(f"restriction needs 3 variables, got {P.n_vars}")
    band = P.degree() if l_max is None else int(l_max)
    band = max(band, 0)
    grid = standard_grid(band)
    values = P.to_float().evaluate(grid.nodes)
    return SphereFunction(grid.project(values, band), band)
