"""Linearization of the zero-centered Euler-Lagrange density in the
tangent-field direction, and its inverse.

At the round state the density linearizes per direction to the circle Jacobi
operator -d^2/dtheta^2 - 1 acting on the graph function, i.e. the Fourier
multiplier (k^2 - 1): mode k = 1 is its kernel (the center components,
projected away), so P acts on the zero-center modes {1, cos k, sin k: k >= 2}
and S divides by (k^2 - 1) there.

Away from the round state P has no closed form; it is computed by centered
finite differences of the zero-centered density, optionally with Richardson
extrapolation as a step-size control.  P stays exactly block-diagonal over
directions (the density on one graphed curve depends only on that curve's
graph function), so S is assembled as a dense per-direction Fourier-block
inverse at the state's truncation.

The closed-form derivative of the density in the conformal factor at the
round state is (n-1) <grad f(x), v> along each equator; solving the circle
Jacobi equation with that right-hand side yields the tangent field phi(f)
that pairs with f in the kernel of the full linearization.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .area import PsiPatch, build_patch, h_values
from .equators import (
    CircleFunction,
    DirectionGrid,
    TangentField,
    derivative_coeffs,
    fourier_coeffs_from_values,
    fourier_design,
    uniform_angles,
)
from .errors import (
    ConfigurationError,
    DomainError,
    InvertibilityError,
    NumericalError,
    SolvabilityError,
)
from .sphere import SphereFunction

FIRST_HARMONIC_TOL = 1e-9
CENTER_TOL = 1e-11
COND_LIMIT = 1e8


# ---------------------------------------------------------------------------
# closed forms at the round state
# ---------------------------------------------------------------------------


def dH_in_psi_at_zero(f: SphereFunction, grid: DirectionGrid,
                      k_max: int) -> TangentField:
    """Derivative of the density in the conformal direction f at the round
    state: (n-1) <grad f(x), v> on each equator (n = 2 here).

    For odd f the restriction to each circle has only even Fourier modes,
    hence zero center.
    """
    n_samples = max(4 * (k_max + 1), 2 * f.l_max + 2, 64)
    pts = grid.circle_points(n_samples)
    grad = f.gradient(pts.reshape(-1, 3)).reshape(pts.shape)
    vals = np.einsum("dmi,di->dm", grad, grid.directions)
    return TangentField.from_values(grid, k_max, vals)


def jacobi_solve(v, rhs: CircleFunction) -> CircleFunction:
    """Solve phi'' + phi = rhs on the circle Sigma_v (round state, n = 2).

    Fourier-diagonal: mode k divides by (1 - k^2).  The k = 1 modes span the
    kernel; the rhs must be orthogonal to them (SolvabilityError otherwise)
    and the solution is normalized to zero first harmonics.
    """
    c = rhs.coeffs.copy()
    K = rhs.k_max
    if K >= 1 and max(abs(c[1]), abs(c[K + 1])) > FIRST_HARMONIC_TOL:
        raise SolvabilityError(
            f"rhs has first-harmonic content "
            f"{max(abs(c[1]), abs(c[K + 1])):.3e} > {FIRST_HARMONIC_TOL:.0e}"
        )
    k = np.arange(1, K + 1, dtype=float)
    mult = 1.0 - k * k
    c[0] = c[0] / 1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        c[1:K + 1] = np.where(k == 1.0, 0.0, c[1:K + 1] / mult)
        c[K + 1:] = np.where(k == 1.0, 0.0, c[K + 1:] / mult)
    return CircleFunction(c, K)


def phi_of_f(f: SphereFunction, grid: DirectionGrid,
             k_max: int | None = None) -> TangentField:
    """The tangent field phi(f) pairing with odd f in the linearized kernel.

    Solves the circle Jacobi equation direction by direction with the
    closed-form right-hand side; for f = <x, w> this returns the constant
    <w, v> on each equator (the translation family).
    """
    K = k_max if k_max is not None else 2 * f.l_max
    rhs = dH_in_psi_at_zero(f, grid, K)
    c = rhs.coeffs
    if K >= 1:
        worst = float(np.max(np.abs(c[:, [1, K + 1]]))) if c.shape[0] else 0.0
        if worst > FIRST_HARMONIC_TOL:
            raise SolvabilityError(
                f"first-harmonic content {worst:.3e} in the right-hand side"
            )
    k = np.arange(1, K + 1, dtype=float)
    mult = 1.0 - k * k
    out = c.copy()
    with np.errstate(divide="ignore", invalid="ignore"):
        out[:, 1:K + 1] = np.where(k == 1.0, 0.0, c[:, 1:K + 1] / mult)
        out[:, K + 1:] = np.where(k == 1.0, 0.0, c[:, K + 1:] / mult)
    return TangentField(grid, K, out)


def phi_diagnostics_csv(f: SphereFunction, grid: DirectionGrid,
                        k_max: int | None = None) -> str:
    """CSV rows (v_index, k, rhs_k, phi_k) for the per-direction solves."""
    K = k_max if k_max is not None else 2 * f.l_max
    rhs = dH_in_psi_at_zero(f, grid, K)
    phi = phi_of_f(f, grid, K)
    buf = io.StringIO()
    buf.write("v_index,k,rhs_a,rhs_b,phi_a,phi_b\n")
    for j in range(grid.n_directions):
        r, p = rhs.coeffs[j], phi.coeffs[j]
        buf.write(f"{j},0,{r[0]:.12e},0.0,{p[0]:.12e},0.0\n")
        for k in range(1, K + 1):
            buf.write(
                f"{j},{k},{r[k]:.12e},{r[K + k]:.12e},"
                f"{p[k]:.12e},{p[K + k]:.12e}\n"
            )
    return buf.getvalue()


# ---------------------------------------------------------------------------
# linearization state
# ---------------------------------------------------------------------------


@dataclass
class LinearizedState:
    """Linearization point (psi, Phi) with FD controls and cached tables."""

    psi: SphereFunction
    Phi: TangentField
    h_fd: float = 1e-4
    n_angles: int = 128
    use_richardson: bool = False

    def __post_init__(self):
        if not 1e-6 <= self.h_fd <= 1e-3:
            raise ConfigurationError(
                f"h_fd = {self.h_fd:.3e} outside [1e-6, 1e-3]"
            )
        if self.n_angles < 2 * self.Phi.k_max + 2:
            raise ConfigurationError(
                "n_angles too small for the tangent-field truncation"
            )
        self._patch = None
        self._psi_patches = {}
        self._blocks = None
        self._q0 = None
        self._w0 = None

    @property
    def k_max(self) -> int:
        return self.Phi.k_max

    @property
    def grid(self) -> DirectionGrid:
        return self.Phi.grid

    @property
    def is_round(self) -> bool:
        return not (np.any(self.psi.coeffs) or np.any(self.Phi.coeffs))

    @property
    def patch(self) -> PsiPatch:
        if self._patch is None:
            margin = self.Phi.max_abs() + 0.02
            self._patch = build_patch(self.psi, self.grid, self.n_angles, margin)
        return self._patch

    def base_values(self):
        if self._q0 is None:
            self._q0 = self.Phi.values_on_angles(self.n_angles)
            dPhi = TangentField(self.grid, self.k_max,
                                derivative_coeffs(self.Phi.coeffs, self.k_max))
            self._w0 = dPhi.values_on_angles(self.n_angles)
        return self._q0, self._w0


def _zero_centered_coeffs(H: np.ndarray, k_max: int) -> np.ndarray:
    c = fourier_coeffs_from_values(H, k_max)
    c[..., 1] = 0.0
    c[..., k_max + 1] = 0.0
    return c


def _require_zero_center(field: TangentField, what: str) -> None:
    K = field.k_max
    if K >= 1:
        worst = float(np.max(np.abs(field.coeffs[:, [1, K + 1]])))
        if worst > CENTER_TOL * max(1.0, float(np.max(np.abs(field.coeffs)))):
            raise DomainError(f"{what} must be zero-center (got {worst:.3e})")


def _fd_coeffs(state: LinearizedState, dq: np.ndarray, dw: np.ndarray,
               h: float) -> np.ndarray:
    """Centered FD of the zero-centered density field along (dq, dw)."""
    q0, w0 = state.base_values()
    Hp = h_values(state.patch, q0 + h * dq, w0 + h * dw)
    Hm = h_values(state.patch, q0 - h * dq, w0 - h * dw)
    return _zero_centered_coeffs((Hp - Hm) / (2.0 * h), state.k_max)


def operator_P(state: LinearizedState, phi: TangentField) -> TangentField:
    """Linearized zero-centered density in the tangent-field direction."""
    _require_zero_center(phi, "operator_P input")
    K = state.k_max
    if phi.k_max != K:
        raise ConfigurationError("field truncation differs from the state")
    if state.is_round:
        k = np.arange(1, K + 1, dtype=float)
        mult = k * k - 1.0
        c = phi.coeffs.copy()
        c[:, 0] *= -1.0
        c[:, 1:K + 1] *= mult
        c[:, K + 1:] *= mult
        return TangentField(state.grid, K, c)
    scale = phi.max_abs()
    if scale == 0.0:
        return TangentField.zero(state.grid, K)
    unit = (1.0 / scale) * phi
    dq = unit.values_on_angles(state.n_angles)
    dw = TangentField(state.grid, K,
                      derivative_coeffs(unit.coeffs, K)).values_on_angles(state.n_angles)
    h = state.h_fd
    c1 = _fd_coeffs(state, dq, dw, h)
    if state.use_richardson:
        c2 = _fd_coeffs(state, dq, dw, 0.5 * h)
        gap = float(np.max(np.abs(c2 - c1)))
        ref = max(float(np.max(np.abs(c2))), 1e-30)
        if gap / ref > 1e-3:
            raise NumericalError(
                f"Richardson disagreement {gap / ref:.3e} > 1e-3; "
                f"adjust h_fd = {h:.1e}"
            )
        c1 = (4.0 * c2 - c1) / 3.0
    return TangentField(state.grid, K, scale * c1)


# ---------------------------------------------------------------------------
# the inverse S
# ---------------------------------------------------------------------------


def _mode_rows(k_max: int) -> np.ndarray:
    """Coefficient slots of the zero-center modes [a0, a2..aK, b2..bK]."""
    return np.concatenate((
        [0],
        np.arange(2, k_max + 1),
        k_max + np.arange(2, k_max + 1),
    )).astype(int)


def _assemble_blocks(state: LinearizedState) -> np.ndarray:
    """Per-direction matrices of P on the zero-center modes, shape (Nd, B, B)."""
    K = state.k_max
    rows = _mode_rows(K)
    B = rows.size
    M = state.n_angles
    design = fourier_design(uniform_angles(M), K)  # (2K+1, M)
    n_dir = state.grid.n_directions
    blocks = np.empty((n_dir, B, B))
    h = state.h_fd
    for col, slot in enumerate(rows):
        e = np.zeros(2 * K + 1)
        e[slot] = 1.0
        dq = np.broadcast_to(e @ design, (n_dir, M))
        dw = np.broadcast_to(derivative_coeffs(e, K) @ design, (n_dir, M))
        c1 = _fd_coeffs(state, dq, dw, h)
        if state.use_richardson:
            c2 = _fd_coeffs(state, dq, dw, 0.5 * h)
            c1 = (4.0 * c2 - c1) / 3.0
        blocks[:, :, col] = c1[:, rows]
    return blocks


def operator_S(state: LinearizedState, xi: TangentField) -> TangentField:
    """Inverse of P on zero-center fields (per-direction block solve)."""
    _require_zero_center(xi, "operator_S input")
    K = state.k_max
    if xi.k_max != K:
        raise ConfigurationError("field truncation differs from the state")
    if state.is_round:
        k = np.arange(1, K + 1, dtype=float)
        mult = k * k - 1.0
        c = xi.coeffs.copy()
        c[:, 0] /= -1.0
        with np.errstate(divide="ignore", invalid="ignore"):
            c[:, 1:K + 1] = np.where(k == 1.0, 0.0, c[:, 1:K + 1] / mult)
            c[:, K + 1:] = np.where(k == 1.0, 0.0, c[:, K + 1:] / mult)
        return TangentField(state.grid, K, c)
    if state._blocks is None:
        blocks = _assemble_blocks(state)
        cond = float(np.max(np.linalg.cond(blocks)))
        if cond > COND_LIMIT:
            raise InvertibilityError(
                f"linearized block condition {cond:.3e} exceeds {COND_LIMIT:.0e}"
            )
        state._blocks = blocks
    rows = _mode_rows(K)
    rhs = xi.coeffs[:, rows]
    sol = np.linalg.solve(state._blocks, rhs[:, :, None])[:, :, 0]
    out = np.zeros_like(xi.coeffs)
    out[:, rows] = sol
    return TangentField(state.grid, K, out)


# ---------------------------------------------------------------------------
# FD of the density in the conformal direction at a general state
# ---------------------------------------------------------------------------


def dh_in_psi_fd(state: LinearizedState, f: SphereFunction) -> TangentField:
    """Centered FD of the zero-centered density in the conformal direction f.

    Rebuilds the psi tube patch at psi +/- h f (the tangent field is fixed,
    so the base jets q, w are reused).
    """
    q0, w0 = state.base_values()
    h = state.h_fd
    scale = max(f.norm(), 1e-300)
    fu = (1.0 / scale) * f
    margin = state.Phi.max_abs() + 0.02
    Hs = []
    for s in (+1.0, -1.0):
        patch = build_patch(state.psi + (s * h) * fu, state.grid,
                            state.n_angles, margin)
        Hs.append(h_values(patch, q0, w0))
    c = _zero_centered_coeffs((Hs[0] - Hs[1]) / (2.0 * h), state.k_max)
    return TangentField(state.grid, state.k_max, scale * c)
