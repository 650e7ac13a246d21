"""Generalized Funk transform at a deformed state and its right inverse.

The transform integrates a function over the graphed equator family with the
state's Q-density weight:

    (F f)(v) = integral over theta of  f(F_v(theta)) Q(theta) J(theta),

which at the round state (psi = 0, Phi = 0) reduces to the classical Funk
transform: eigenvalue 2 pi P_l(0) on even degree-l harmonics, 0 on odd ones.

The adjoint F* pairs direction values with their even extension to the full
sphere: <g1, g2> = 2 sum w g1 g2 (direction weights sum to 2 pi, so the
doubled pairing represents the sphere integral of even functions).  With
that pairing F* = 2 M^T W on values, and at the round state F* agrees with
F on even functions, giving the classical normal-operator eigenvalues
(2 pi P_l(0))^2 on even degree-l harmonics.

The normal operator L = F F* acts on direction values as a dense matrix;
restricting to even band-limited functions gives a small symmetric
positive-definite system whose solve yields a right inverse R with
F(R(g)) = g on that subspace.

kernel_K gives the geometric kernel of L with respect to the full-sphere
measure (L g)(u) = integral over S^2 of K(u, .) times the even extension of
g: at an intersection-transverse pair of directions it is the two-point sum

    Q_u T_u Q_v T_v / sqrt(1 - <N_u, N_v>^2)

over the intersections y of the two graphed curves, with N the in-sphere
unit normals at y.  At the round state and orthogonal directions this
equals 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .area import PsiPatch, density_Q, density_T, transform_tables
from .equators import (
    CircleFunction,
    DirectionGrid,
    TangentField,
    equator_frame,
    uniform_angles,
)
from .errors import (
    ConfigurationError,
    DomainError,
    InvertibilityError,
    SingularityError,
)
from .sphere import SphereFunction, basis_matrix, n_coeffs, sh_index

COND_LIMIT = 1e8


# ---------------------------------------------------------------------------
# functions on the direction grid (even functions on the sphere / RP^2)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProjectiveFunction:
    """Values on a direction grid (one value per projective class)."""

    values: np.ndarray
    grid: DirectionGrid

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1).copy()
        if v.shape[0] != self.grid.n_directions:
            raise ConfigurationError("value count does not match the grid")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def mean(self) -> float:
        return self.grid.mean(self.values)

    def zero_mean(self) -> "ProjectiveFunction":
        return ProjectiveFunction(self.values - self.mean(), self.grid)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def norm(self) -> float:
        return float(math.sqrt(self.grid.integrate(self.values**2)))

    def __add__(self, other):
        return ProjectiveFunction(self.values + other.values, self.grid)

    def __sub__(self, other):
        return ProjectiveFunction(self.values - other.values, self.grid)

    def __rmul__(self, s: float):
        return ProjectiveFunction(float(s) * self.values, self.grid)

    __mul__ = __rmul__


def even_coeff_indices(l_max: int) -> np.ndarray:
    idx = []
    for l in range(0, l_max + 1, 2):
        for m in range(-l, l + 1):
            idx.append(sh_index(l, m))
    return np.asarray(idx, dtype=int)


# ---------------------------------------------------------------------------
# the transform
# ---------------------------------------------------------------------------


def funk(psi: SphereFunction, Phi: TangentField, f: SphereFunction,
         n_angles: int = 256, patch: PsiPatch | None = None) -> ProjectiveFunction:
    """Transform of f at the state (psi, Phi)."""
    F, QJ = transform_tables(psi, Phi, n_angles, patch)
    vals = f.evaluate(F.reshape(-1, 3)).reshape(QJ.shape)
    out = (vals * QJ).sum(axis=-1) * (2.0 * math.pi / n_angles)
    return ProjectiveFunction(out, Phi.grid)


def funk_matrix(psi: SphereFunction, Phi: TangentField, l_max: int,
                n_angles: int = 256, patch: PsiPatch | None = None) -> np.ndarray:
    """Matrix of the transform from coefficients to direction values."""
    F, QJ = transform_tables(psi, Phi, n_angles, patch)
    n_dir = QJ.shape[0]
    out = np.empty((n_dir, n_coeffs(l_max)))
    blk = max(1, 2 ** 22 // (n_angles * n_coeffs(l_max)))  # ~32 MB blocks
    scale = 2.0 * math.pi / n_angles
    for a in range(0, n_dir, blk):
        b = min(a + blk, n_dir)
        basis = basis_matrix(F[a:b].reshape(-1, 3), l_max)
        basis = basis.reshape(b - a, n_angles, -1)
        out[a:b] = np.einsum("dmc,dm->dc", basis, QJ[a:b]) * scale
    return out


def dual_funk(psi: SphereFunction, Phi: TangentField, g, l_max: int,
              n_angles: int = 256, patch: PsiPatch | None = None,
              matrix: np.ndarray | None = None) -> SphereFunction:
    """Adjoint transform F* of direction values, as a band-limited function."""
    vals = g.values if isinstance(g, ProjectiveFunction) else np.asarray(g, dtype=float)
    if matrix is None:
        matrix = funk_matrix(psi, Phi, l_max, n_angles, patch)
    grid = Phi.grid
    return SphereFunction(2.0 * (matrix.T @ (grid.weights * vals)), l_max)


# ---------------------------------------------------------------------------
# normal operator and right inverse
# ---------------------------------------------------------------------------


class FunkKernelMatrix:
    """The normal operator F F* on direction values, with an even-subspace
    reduction used for the right inverse.

    matrix:    (Nd, C) transform on coefficients.
    reduced:   4 G^T G with G = matrix^T W E, the operator L on even
               band-limited coefficient vectors (E = even basis at the
               directions, W = quadrature weights, analysis map 2 E^T W).
    """

    def __init__(self, psi: SphereFunction, Phi: TangentField, l_max: int,
                 n_angles: int = 256, patch: PsiPatch | None = None):
        self.grid = Phi.grid
        self.l_max = int(l_max)
        self.n_angles = int(n_angles)
        self.matrix = funk_matrix(psi, Phi, l_max, n_angles, patch)
        self.even_idx = even_coeff_indices(l_max)
        self.E = basis_matrix(self.grid.directions, l_max)[:, self.even_idx]
        W = self.grid.weights
        self.G = self.matrix.T @ (W[:, None] * self.E)
        self.reduced = 4.0 * self.G.T @ self.G
        # conditioning of the even zero-mean block (constants excluded)
        sub = self.reduced[1:, 1:]
        eig = np.linalg.eigvalsh(sub)
        if eig[0] <= 0:
            self.cond_zero_mean = math.inf
        else:
            self.cond_zero_mean = float(eig[-1] / eig[0])

    def dense(self) -> np.ndarray:
        """(F F*) as a matrix on direction values: 2 (M M^T) diag(w)."""
        return 2.0 * (self.matrix @ self.matrix.T) * self.grid.weights[None, :]

    def kernel_values(self, cesaro: bool = False) -> np.ndarray:
        """Band-limited kernel table: (j,k) entry approximates kernel_K(v_j, v_k).

        The eigen-expansion of the kernel converges slowly pointwise (its
        coefficients decay like l^{-1/2}); cesaro=True returns the mean of
        the partial sums over even degree cutoffs, which converges where the
        kernel is smooth (off the diagonal) and is the table to compare
        against kernel_K.
        """
        if not cesaro:
            return self.matrix @ self.matrix.T
        parts = []
        run = np.zeros((self.grid.n_directions, self.grid.n_directions))
        for l in range(0, self.l_max + 1, 2):
            lo, hi = sh_index(l, -l), sh_index(l, l) + 1
            run = run + self.matrix[:, lo:hi] @ self.matrix[:, lo:hi].T
            parts.append(run.copy())
        return np.mean(parts, axis=0)

    def apply(self, g) -> ProjectiveFunction:
        vals = g.values if isinstance(g, ProjectiveFunction) else np.asarray(g, dtype=float)
        return ProjectiveFunction(
            2.0 * (self.matrix @ (self.matrix.T @ (self.grid.weights * vals))),
            self.grid,
        )

    def apply_transform(self, f: SphereFunction) -> ProjectiveFunction:
        c = f.pad_to(self.l_max).coeffs if f.l_max < self.l_max else f.coeffs
        if c.shape[0] != self.matrix.shape[1]:
            raise ConfigurationError("band limit exceeds the assembled matrix")
        return ProjectiveFunction(self.matrix @ c, self.grid)

    def right_inverse(self, g) -> SphereFunction:
        """Even band-limited h with F(h) = g (g even band-limited)."""
        if self.cond_zero_mean > COND_LIMIT:
            raise InvertibilityError(
                f"even zero-mean block condition {self.cond_zero_mean:.2e} "
                f"exceeds {COND_LIMIT:.0e}"
            )
        vals = g.values if isinstance(g, ProjectiveFunction) else np.asarray(g, dtype=float)
        ghat = 2.0 * self.E.T @ (self.grid.weights * vals)
        yhat = np.linalg.solve(self.reduced, ghat)
        return SphereFunction(2.0 * (self.G @ yhat), self.l_max)


def operator_L(psi: SphereFunction, Phi: TangentField, l_max: int,
               n_angles: int = 256, patch: PsiPatch | None = None) -> FunkKernelMatrix:
    return FunkKernelMatrix(psi, Phi, l_max, n_angles, patch)


def right_inverse_R(psi: SphereFunction, Phi: TangentField, g, l_max: int,
                    n_angles: int = 256, patch: PsiPatch | None = None,
                    operator: FunkKernelMatrix | None = None) -> SphereFunction:
    op = operator or FunkKernelMatrix(psi, Phi, l_max, n_angles, patch)
    return op.right_inverse(g)


# ---------------------------------------------------------------------------
# classical eigenvalues (used by the CLI eigencheck)
# ---------------------------------------------------------------------------


def legendre_at_zero(l_max: int) -> np.ndarray:
    """P_l(0) via the recurrence P_l(0) = -((l-1)/l) P_{l-2}(0)."""
    out = np.zeros(l_max + 1)
    out[0] = 1.0
    for l in range(2, l_max + 1, 2):
        out[l] = -(l - 1) / l * out[l - 2]
    return out


def eigencheck_table(l_max: int = 12, n_angles: int = 256) -> list[dict]:
    """Computed transform eigenvalues at the round state vs 2 pi P_l(0)."""
    from .equators import standard_directions

    grid_l = max(l_max, 12)
    dgrid = standard_directions(grid_l)
    psi = SphereFunction.zero(grid_l)
    Phi = TangentField.zero(dgrid, 2)
    mat = funk_matrix(psi, Phi, l_max, n_angles)
    E = basis_matrix(dgrid.directions, l_max)
    W = dgrid.weights
    pl0 = legendre_at_zero(l_max)
    rows = []
    for l in range(l_max + 1):
        lam_or = 2.0 * math.pi * pl0[l] if l % 2 == 0 else 0.0
        errs = []
        for m in range(-l, l + 1):
            col = mat[:, sh_index(l, m)]
            if l % 2 == 0:
                # projection onto Y_{l,m} over RP^2 (norm 1/2 there)
                lam = 2.0 * float(col @ (W * E[:, sh_index(l, m)]))
                errs.append(abs(lam - lam_or) / max(abs(lam_or), 1e-300))
            else:
                errs.append(float(np.max(np.abs(col))))
        rows.append(
            {
                "l": l,
                "oracle": lam_or,
                "max_err": max(errs),
                "kind": "even_rel_err" if l % 2 == 0 else "odd_max_abs",
            }
        )
    return rows


# ---------------------------------------------------------------------------
# geometric kernel
# ---------------------------------------------------------------------------


def _on_curve_residual(y: np.ndarray, circ: CircleFunction, frame) -> float:
    """sin(latitude of y above v's equator) minus sin(Phi_v at y's foot)."""
    s = float(np.clip(y @ frame.v, -1.0, 1.0))
    xp = y - s * frame.v
    nx = np.linalg.norm(xp)
    if nx < 1e-14:
        # pole of the chart: |s| = 1 > |sin Phi|, so the sign is that of s
        return s
    th = math.atan2(xp @ frame.e2, xp @ frame.e1)
    return s - math.sin(circ.evaluate(th))


def _curve_point_and_tangent(circ: CircleFunction, frame, th: float):
    q = float(circ.evaluate(th))
    w = float(circ.derivative().evaluate(th))
    x = math.cos(th) * frame.e1 + math.sin(th) * frame.e2
    tau = -math.sin(th) * frame.e1 + math.cos(th) * frame.e2
    y = math.cos(q) * x + math.sin(q) * frame.v
    nvec = -math.sin(q) * x + math.cos(q) * frame.v
    tang = w * nvec + math.cos(q) * tau
    return y, tang / np.linalg.norm(tang)


def _circle_pair(Phi, u, v):
    if Phi is None:
        z = CircleFunction.zero(1)
        return z, z
    if isinstance(Phi, TangentField):
        return Phi.circle(u), Phi.circle(v)
    return Phi[0], Phi[1]


def curve_intersections(Phi, u: np.ndarray, v: np.ndarray,
                        n_scan: int = 256, tol: float = 1e-13) -> list[tuple[float, float]]:
    """Parameter pairs (theta_u, theta_v) where the two graphed curves meet."""
    circ_u, circ_v = _circle_pair(Phi, u, v)
    fr_u = equator_frame(u)
    fr_v = equator_frame(v)

    def res(th):
        y, _ = _curve_point_and_tangent(circ_u, fr_u, th)
        return _on_curve_residual(y, circ_v, fr_v)

    ths = uniform_angles(n_scan)
    vals = np.array([res(t) for t in ths])
    roots = []
    for i in range(n_scan):
        a, b = ths[i], ths[(i + 1) % n_scan] + (2 * math.pi if i + 1 == n_scan else 0)
        ra, rb = vals[i], vals[(i + 1) % n_scan]
        if ra == 0.0:
            roots.append(a)
            continue
        if ra * rb < 0:
            lo, hi, rlo = a, b, ra
            for _ in range(100):
                mid = 0.5 * (lo + hi)
                rm = res(mid)
                if abs(rm) < tol or hi - lo < 1e-15:
                    break
                if rlo * rm <= 0:
                    hi = mid
                else:
                    lo, rlo = mid, rm
            roots.append(0.5 * (lo + hi))
    out = []
    for th_u in roots:
        y, _ = _curve_point_and_tangent(circ_u, fr_u, th_u)
        xp = y - (y @ fr_v.v) * fr_v.v
        xp = xp / np.linalg.norm(xp)
        th_v = math.atan2(xp @ fr_v.e2, xp @ fr_v.e1)
        out.append((float(th_u), float(th_v)))
    return out


def kernel_K(psi: SphereFunction, Phi: TangentField, u: np.ndarray,
             v: np.ndarray, n_angles: int = 256) -> float:
    """Kernel of F F* at a pair of directions (sum over curve intersections)."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if abs(abs(u @ v) - 1.0) < 1e-12:
        raise DomainError("kernel is singular at coincident directions")
    pairs = curve_intersections(Phi, u, v)
    if len(pairs) != 2:
        raise SingularityError(
            f"expected 2 curve intersections, found {len(pairs)}"
        )
    circ_u, circ_v = _circle_pair(Phi, u, v)
    fr_u = equator_frame(u)
    fr_v = equator_frame(v)
    Qu = density_Q(psi, circ_u, u, n_angles)
    Tu = density_T(psi, circ_u, u, n_angles)
    Qv = density_Q(psi, circ_v, v, n_angles)
    Tv = density_T(psi, circ_v, v, n_angles)
    total = 0.0
    for th_u, th_v in pairs:
        y_u, t_u = _curve_point_and_tangent(circ_u, fr_u, th_u)
        y_v, t_v = _curve_point_and_tangent(circ_v, fr_v, th_v)
        if np.linalg.norm(y_u - y_v) > 1e-8:
            raise SingularityError("intersection mismatch between the curves")
        N_u = np.cross(y_u, t_u)
        N_v = np.cross(y_v, t_v)
        dot = float(np.clip(N_u @ N_v, -1.0, 1.0))
        denom = math.sqrt(max(1.0 - dot * dot, 0.0))
        if denom < 1e-10:
            raise SingularityError("tangential curve intersection")
        total += (
            Qu.evaluate(th_u) * Tu.evaluate(th_u)
            * Qv.evaluate(th_v) * Tv.evaluate(th_v) / denom
        )
    return float(total)
