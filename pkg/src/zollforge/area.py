"""Area density of graphed equators and its first variation.

For a conformal factor psi and a tangent field Phi, the graphed curve of a
direction v is theta -> F_v(theta) = cos(q) x(theta) + sin(q) v with
q = Phi_v(theta).  Its length in the metric g = e^{2 psi}(g_round + dpsi^2)
is the integral over theta of the density

    J(p, q, u, w) = e^{(n-1) p} cos(q)^{n-3} sqrt(S),
    S = |u ^ w|^2 + cos(q)^2 (cos(q)^2 + |u|^2 + |w|^2),

evaluated on the jet

    p = psi(F),  q = Phi_v,  u = d/dtheta psi(F),  w = d/dtheta Phi_v.

Here n-1 is the curve dimension (n = 2 throughout the pipelines; the Jet
interface keeps n general so the formulas can be checked against finite
differences in higher dimension, where u, w are vectors and the wedge term
is active).

The first variation of the length under a normal perturbation delta Phi = phi
has density

    H = D1J * dn_psi + D2J - (d/dtheta D3J) * dn_psi - d/dtheta D4J,

with dn_psi = <grad psi, n_v> along F_v, and the round equators of the round
sphere (psi = 0, Phi = 0) are critical: H == 0.

Two further densities enter the generalized Funk transform:

    Q = (n-1) - B - div X,   X = [(cos^2 q + |w|^2) u - <u, w> w] / S,
    B = (n-1) u.X - (n-3) tan(q) w.X + xi'.X,   xi = log sqrt(S),
    T = e^{(n-1) p} cos(q)^{-1} sqrt(S / (|w|^2 + cos^2 q)),

with the exact identity Q * J = (n-1) J - d/dtheta(D3J) used as an internal
cross-check, and T * |F_v'| = J so that integrating T against the curve's
round arclength gives the metric length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .equators import (
    CircleFunction,
    DirectionGrid,
    TangentField,
    equator_frame,
    fourier_coeffs_from_values,
    uniform_angles,
)
from .errors import ConfigurationError, DomainError, GraphValidityError, SingularityError
from .sphere import SphereFunction

# ---------------------------------------------------------------------------
# jets and the density J at a single point (general curve dimension)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Jet:
    """Pointwise jet (p, q, u, w) of a graphed-curve configuration.

    u and w are vectors of length n - 1 (scalars are promoted); n = 2 is the
    curve case used by all pipelines.
    """

    p: float
    q: float
    u: np.ndarray
    w: np.ndarray
    n: int = 2

    def __post_init__(self):
        u = np.atleast_1d(np.asarray(self.u, dtype=float))
        w = np.atleast_1d(np.asarray(self.w, dtype=float))
        if u.shape != (self.n - 1,) or w.shape != (self.n - 1,):
            raise ConfigurationError(
                f"jet vectors must have length n-1={self.n - 1}"
            )
        if abs(self.q) >= math.pi / 2:
            raise GraphValidityError("|q| >= pi/2 leaves the graph regime")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "w", w)


def _S_of(jet: Jet) -> float:
    c2 = math.cos(jet.q) ** 2
    uu = float(jet.u @ jet.u)
    ww = float(jet.w @ jet.w)
    uw = float(jet.u @ jet.w)
    wedge = uu * ww - uw * uw
    return wedge + c2 * (c2 + uu + ww)


def J(jet: Jet) -> float:
    """Area density at one jet."""
    S = _S_of(jet)
    if S <= 0:
        raise SingularityError("degenerate jet: S <= 0")
    return (
        math.exp((jet.n - 1) * jet.p)
        * math.cos(jet.q) ** (jet.n - 3)
        * math.sqrt(S)
    )


def dJ(jet: Jet) -> tuple[float, float, np.ndarray, np.ndarray]:
    """Partial derivatives (D1, D2, D3, D4) of J in (p, q, u, w)."""
    n = jet.n
    c = math.cos(jet.q)
    c2 = c * c
    uu = float(jet.u @ jet.u)
    ww = float(jet.w @ jet.w)
    uw = float(jet.u @ jet.w)
    S = _S_of(jet)
    val = J(jet)
    D1 = (n - 1) * val
    D2 = -math.tan(jet.q) * val * ((n - 3) + c2 * (2 * c2 + uu + ww) / S)
    D3 = val * ((ww + c2) * jet.u - uw * jet.w) / S
    D4 = val * ((uu + c2) * jet.w - uw * jet.u) / S
    return D1, D2, D3, D4


# ---------------------------------------------------------------------------
# spectral helpers on uniform angle grids
# ---------------------------------------------------------------------------


def spectral_derivative(values: np.ndarray) -> np.ndarray:
    """d/dtheta of 2 pi periodic samples along the last axis."""
    vals = np.asarray(values, dtype=float)
    n = vals.shape[-1]
    spec = np.fft.rfft(vals, axis=-1)
    k = np.arange(spec.shape[-1], dtype=float)
    spec = spec * (1j * k)
    if n % 2 == 0:
        spec[..., -1] = 0.0
    return np.fft.irfft(spec, n=n, axis=-1)


# ---------------------------------------------------------------------------
# conformal-factor tube patches (fast repeated jet extraction)
# ---------------------------------------------------------------------------


def _cheb_nodes_weights(n_s: int, s_lim: float):
    k = np.arange(n_s)
    ang = math.pi * (2 * k + 1) / (2 * n_s)
    nodes = s_lim * np.cos(ang)
    bary = (-1.0) ** k * np.sin(ang)
    return nodes, bary


def _diff_matrix(nodes: np.ndarray, bary: np.ndarray) -> np.ndarray:
    n = nodes.shape[0]
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = (bary[j] / bary[i]) / (nodes[i] - nodes[j])
        D[i, i] = -np.sum(D[i])
    return D


def _bary_eval(nodes: np.ndarray, bary: np.ndarray, vals: np.ndarray,
               targets: np.ndarray) -> np.ndarray:
    """Barycentric interpolation; vals (..., Ns), targets (...,)."""
    diff = targets[..., None] - nodes
    hit = np.abs(diff) < 1e-13
    any_hit = hit.any(axis=-1)
    wd = bary / np.where(hit, 1.0, diff)
    wd = np.where(hit, 0.0, wd)
    den = np.sum(wd, axis=-1)
    out = np.einsum("...s,...s->...", wd, vals) / np.where(den == 0, 1.0, den)
    if np.any(any_hit):
        idx = np.argmax(hit, axis=-1)
        exact = np.take_along_axis(vals, idx[..., None], axis=-1)[..., 0]
        out = np.where(any_hit, exact, out)
    return out


class PsiPatch:
    """psi sampled on tubes around all grid equators.

    Within the tube of direction v, psi(cos s x(theta) + sin s v) is stored on
    Chebyshev s-nodes per (direction, theta).  Because the s-line is a great
    circle through x(theta) and v, the restriction is a trigonometric
    polynomial of degree <= l_max in s, so Chebyshev interpolation on a short
    interval converges to machine precision; the s-derivative of the patch is
    exactly the normal derivative <grad psi, n_v> at latitude s.
    """

    def __init__(self, psi: SphereFunction, grid: DirectionGrid,
                 n_angles: int, s_lim: float = 0.45, n_s: int = 20):
        if s_lim >= math.pi / 2:
            raise ConfigurationError("tube half-width must stay below pi/2")
        self.psi = psi
        self.grid = grid
        self.n_angles = int(n_angles)
        self.s_lim = float(s_lim)
        self.n_s = int(n_s)
        self.s_nodes, self.s_bary = _cheb_nodes_weights(self.n_s, self.s_lim)
        self._dmat = _diff_matrix(self.s_nodes, self.s_bary)
        x = grid.circle_points(self.n_angles)  # (Nd, M, 3)
        v = grid.directions[:, None, None, :]
        pts = (
            np.cos(self.s_nodes)[None, None, :, None] * x[:, :, None, :]
            + np.sin(self.s_nodes)[None, None, :, None] * v
        )
        self.values = psi.evaluate(pts.reshape(-1, 3)).reshape(
            grid.n_directions, self.n_angles, self.n_s
        )
        self._dvalues = self.values @ self._dmat.T

    def jets(self, q: np.ndarray):
        """(p, u, dn_psi) along s = q(theta); q has shape (Nd, n_angles)."""
        if np.max(np.abs(q)) > self.s_lim:
            raise DomainError("tangent field leaves the sampled tube")
        p = _bary_eval(self.s_nodes, self.s_bary, self.values, q)
        dn = _bary_eval(self.s_nodes, self.s_bary, self._dvalues, q)
        u = spectral_derivative(p)
        return p, u, dn


def build_patch(psi: SphereFunction, grid: DirectionGrid, n_angles: int,
                max_abs_q: float = 0.0, n_s: int = 20) -> PsiPatch:
    s_lim = min(1.45, max(0.45, 1.2 * max_abs_q + 0.1))
    return PsiPatch(psi, grid, n_angles, s_lim=s_lim, n_s=n_s)


# ---------------------------------------------------------------------------
# vectorized field pipelines (curve case n = 2)
# ---------------------------------------------------------------------------


def _field_jets(psi: SphereFunction, Phi: TangentField, n_angles: int,
                patch: PsiPatch | None = None):
    """Jet arrays (q, w, p, u, dn) of shape (Nd, n_angles)."""
    q = Phi.values_on_angles(n_angles)
    if np.max(np.abs(q)) >= math.pi / 2 - 1e-9:
        raise GraphValidityError("tangent field leaves the graph regime")
    w = spectral_derivative(q)
    if patch is None:
        patch = build_patch(psi, Phi.grid, n_angles, float(np.max(np.abs(q))))
    p, u, dn = patch.jets(q)
    return q, w, p, u, dn


def _density_J(q, w, p, u):
    c = np.cos(q)
    c2 = c * c
    S = c2 * (c2 + u * u + w * w)
    return np.exp(p) / c * np.sqrt(S), S, c


def _h_from_jets(q, w, p, u, dn):
    Jv, S, c = _density_J(q, w, p, u)
    c2 = c * c
    D2 = -np.tan(q) * Jv * (-1.0 + c2 * (2.0 * c2 + u * u + w * w) / S)
    D3 = Jv * u * c2 / S
    D4 = Jv * w * c2 / S
    return Jv * dn + D2 - spectral_derivative(D3) * dn - spectral_derivative(D4)


def _q_from_jets(q, w, p, u):
    Jv, S, c = _density_J(q, w, p, u)
    c2 = c * c
    X = u / (c2 + u * u + w * w)
    du = spectral_derivative(u)
    dw = spectral_derivative(w)
    S_q = -2.0 * c * np.sin(q) * (2.0 * c2 + u * u + w * w)
    S_u = 2.0 * c2 * u
    S_w = 2.0 * c2 * w
    xi_prime = (S_q * w + S_u * du + S_w * dw) / (2.0 * S)
    B = (u + np.tan(q) * w + xi_prime) * X
    return 1.0 - B - spectral_derivative(X)


def _t_from_jets(q, w, p, u):
    Jv, S, c = _density_J(q, w, p, u)
    return np.exp(p) / c * np.sqrt(S / (w * w + c * c))


def h_values(patch: PsiPatch, q: np.ndarray, w: np.ndarray) -> np.ndarray:
    """H from explicit per-direction jets (q, dq/dtheta) over a psi patch.

    Primitive for finite-difference linearization: the caller perturbs q and
    w directly while the psi tube interpolant is reused unchanged.
    """
    p, u, dn = patch.jets(q)
    return _h_from_jets(q, w, p, u, dn)


def h_field(psi: SphereFunction, Phi: TangentField, n_angles: int,
            patch: PsiPatch | None = None) -> np.ndarray:
    """First-variation density H on (directions x angles)."""
    q, w, p, u, dn = _field_jets(psi, Phi, n_angles, patch)
    return _h_from_jets(q, w, p, u, dn)


def q_field(psi: SphereFunction, Phi: TangentField, n_angles: int,
            patch: PsiPatch | None = None) -> np.ndarray:
    q, w, p, u, _ = _field_jets(psi, Phi, n_angles, patch)
    return _q_from_jets(q, w, p, u)


def t_field(psi: SphereFunction, Phi: TangentField, n_angles: int,
            patch: PsiPatch | None = None) -> np.ndarray:
    q, w, p, u, _ = _field_jets(psi, Phi, n_angles, patch)
    return _t_from_jets(q, w, p, u)


def j_field(psi: SphereFunction, Phi: TangentField, n_angles: int,
            patch: PsiPatch | None = None) -> np.ndarray:
    q, w, p, u, _ = _field_jets(psi, Phi, n_angles, patch)
    return _density_J(q, w, p, u)[0]


def areas_field(psi: SphereFunction, Phi: TangentField, n_angles: int,
                patch: PsiPatch | None = None) -> np.ndarray:
    """Metric length of every graphed curve, shape (Nd,)."""
    Jv = j_field(psi, Phi, n_angles, patch)
    return Jv.sum(axis=-1) * (2.0 * math.pi / n_angles)


def transform_tables(psi: SphereFunction, Phi: TangentField, n_angles: int,
                     patch: PsiPatch | None = None):
    """(graph points (Nd, M, 3), Q*J weights (Nd, M)) for the Funk transform."""
    q, w, p, u, dn = _field_jets(psi, Phi, n_angles, patch)
    Jv, S, c = _density_J(q, w, p, u)
    QJ = _q_from_jets(q, w, p, u) * Jv
    x = Phi.grid.circle_points(n_angles)
    v = Phi.grid.directions[:, None, :]
    F = np.cos(q)[..., None] * x + np.sin(q)[..., None] * v
    return F, QJ


# ---------------------------------------------------------------------------
# single-direction operations (direct evaluation; any unit direction)
# ---------------------------------------------------------------------------


def _circle_of(Phi, v) -> CircleFunction:
    if Phi is None:
        return CircleFunction.zero(1)
    if isinstance(Phi, CircleFunction):
        return Phi
    if isinstance(Phi, TangentField):
        return Phi.circle(v)
    raise ConfigurationError(f"unsupported tangent-field argument {type(Phi)}")


def direction_jets(psi: SphereFunction, Phi, v, n_angles: int = 256):
    """Direct (gradient-based) jets along one graphed curve.

    Returns (theta, q, w, p, u, dn, F, nvec); independent of the tube-patch
    interpolation, so it doubles as its accuracy check.
    """
    circ = _circle_of(Phi, v)
    fr = equator_frame(v)
    th = uniform_angles(n_angles)
    q = np.asarray(circ.evaluate(th), dtype=float)
    if np.max(np.abs(q)) >= math.pi / 2 - 1e-9:
        raise GraphValidityError("tangent field leaves the graph regime")
    w = np.asarray(circ.derivative().evaluate(th), dtype=float)
    x = fr.point(th)
    F = np.cos(q)[:, None] * x + np.sin(q)[:, None] * fr.v
    nvec = -np.sin(q)[:, None] * x + np.cos(q)[:, None] * fr.v
    p = psi.evaluate(F)
    u = spectral_derivative(p)
    dn = np.einsum("ij,ij->i", psi.gradient(F), nvec)
    return th, q, w, p, u, dn, F, nvec


def area(psi: SphereFunction, Phi, v, n_angles: int = 256) -> float:
    """Metric length of the graphed curve of one direction."""
    _, q, w, p, u, _, _, _ = direction_jets(psi, Phi, v, n_angles)
    Jv, _, _ = _density_J(q, w, p, u)
    return float(Jv.sum() * 2.0 * math.pi / n_angles)


def euler_lagrange(psi: SphereFunction, Phi, v, n_angles: int = 256,
                   k_max: int | None = None) -> CircleFunction:
    """First-variation density H_v as a circle function."""
    _, q, w, p, u, dn, _, _ = direction_jets(psi, Phi, v, n_angles)
    H = _h_from_jets(q, w, p, u, dn)
    K = k_max if k_max is not None else min(n_angles // 2 - 1, 2 * psi.l_max + _circle_of(Phi, v).k_max + 4)
    return CircleFunction.from_values(H, K)


def normal_derivative(psi: SphereFunction, Phi, v, n_angles: int = 256,
                      k_max: int | None = None) -> CircleFunction:
    """<grad psi, n_v> along the graphed curve."""
    _, _, _, _, _, dn, _, _ = direction_jets(psi, Phi, v, n_angles)
    K = k_max if k_max is not None else n_angles // 2 - 1
    return CircleFunction.from_values(dn, K)


def density_Q(psi: SphereFunction, Phi, v, n_angles: int = 256,
              k_max: int | None = None) -> CircleFunction:
    _, q, w, p, u, _, _, _ = direction_jets(psi, Phi, v, n_angles)
    Q = _q_from_jets(q, w, p, u)
    K = k_max if k_max is not None else n_angles // 2 - 1
    return CircleFunction.from_values(Q, K)


def density_T(psi: SphereFunction, Phi, v, n_angles: int = 256,
              k_max: int | None = None) -> CircleFunction:
    _, q, w, p, u, _, _, _ = direction_jets(psi, Phi, v, n_angles)
    T = _t_from_jets(q, w, p, u)
    K = k_max if k_max is not None else n_angles // 2 - 1
    return CircleFunction.from_values(T, K)


def euler_lagrange_field(psi: SphereFunction, Phi: TangentField,
                         n_angles: int, k_max: int,
                         patch: PsiPatch | None = None) -> TangentField:
    """H as a tangent field (Fourier data per direction)."""
    H = h_field(psi, Phi, n_angles, patch)
    return TangentField(Phi.grid, k_max, fourier_coeffs_from_values(H, k_max))


def diagnostics_rows(psi: SphereFunction, Phi: TangentField,
                     n_angles: int = 64) -> list[dict]:
    """Per-(direction, angle) table of J, H, Q, T for CSV export."""
    q, w, p, u, dn = _field_jets(psi, Phi, n_angles)
    Jv, _, _ = _density_J(q, w, p, u)
    H = _h_from_jets(q, w, p, u, dn)
    Q = _q_from_jets(q, w, p, u)
    T = _t_from_jets(q, w, p, u)
    th = uniform_angles(n_angles)
    rows = []
    for j in range(Phi.grid.n_directions):
        vx, vy, vz = Phi.grid.directions[j]
        for m in range(n_angles):
            rows.append(
                {
                    "direction": j, "vx": vx, "vy": vy, "vz": vz,
                    "theta": th[m], "J": Jv[j, m], "H": H[j, m],
                    "Q": Q[j, m], "T": T[j, m],
                }
            )
    return rows
