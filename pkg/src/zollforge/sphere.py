"""Spectral engine on the unit two-sphere.

Conventions (single source of truth for the whole package):

* Real orthonormal spherical harmonics without the Condon-Shortley phase.
  With x = cos(theta) and m > 0:

      Y_{l,0}  = N_{l,0} P_l(x)
      Y_{l,m}  = sqrt(2) N_{l,m} P_l^m(x) cos(m phi)
      Y_{l,-m} = sqrt(2) N_{l,m} P_l^m(x) sin(m phi)

      N_{l,m}  = sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!)

  and the associated Legendre functions carry no (-1)^m:

      P_m^m     = (2m-1)!! (1-x^2)^{m/2}
      P_{m+1}^m = (2m+1) x P_m^m
      (l-m) P_l^m = (2l-1) x P_{l-1}^m - (l+m-1) P_{l-2}^m

* Coefficient storage is a flat vector indexed by sh_index(l, m) = l^2 + l + m.
* Antipodal parity: Y_{l,m}(-x) = (-1)^l Y_{l,m}(x).
* Laplace-Beltrami eigenvalue on degree l: -l(l+1).
* Quadrature grid: Gauss-Legendre nodes in cos(theta) times a uniform
  longitude grid; weights sum to 4 pi and integrate products Y_a Y_b exactly
  for deg(a) + deg(b) <= 2 n_theta - 1.

Gradients use pole-safe identities (theta-derivative and m/sin(theta) terms
are evaluated through neighbouring-order Legendre functions, which are finite
at the poles), so evaluation points may include the poles exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError

# ---------------------------------------------------------------------------
# indexing helpers
# ---------------------------------------------------------------------------

_CHUNK = 8192  # evaluation points per block; keeps Legendre tables ~10 MB


def sh_index(l: int, m: int) -> int:
    """Flat index of the (l, m) harmonic: l^2 + l + m."""
    if abs(m) > l:
        raise DomainError(f"invalid harmonic order |m|={abs(m)} > l={l}")
    return l * l + l + m


def sh_degree_of(index: int) -> tuple[int, int]:
    """Inverse of sh_index."""
    l = int(math.isqrt(index))
    return l, index - l * l - l


def n_coeffs(l_max: int) -> int:
    return (l_max + 1) ** 2


def _pair(l: int, m: int) -> int:
    # triangular index for the (l, m>=0) Legendre table
    return l * (l + 1) // 2 + m


def _norm_constants(l_max: int) -> np.ndarray:
    out = np.empty(_pair(l_max, l_max) + 1)
    for l in range(l_max + 1):
        for m in range(l + 1):
            lg = math.lgamma(l - m + 1) - math.lgamma(l + m + 1)
            out[_pair(l, m)] = math.sqrt((2 * l + 1) / (4.0 * math.pi) * math.exp(lg))
    return out


# ---------------------------------------------------------------------------
# Legendre tables and pointwise basis evaluation
# ---------------------------------------------------------------------------


def _legendre_table(ct: np.ndarray, st: np.ndarray, l_max: int) -> np.ndarray:
    """All P_l^m(ct), 0 <= m <= l <= l_max, rows indexed by _pair(l, m)."""
    n = ct.shape[0]
    P = np.zeros((_pair(l_max, l_max) + 1, n))
    P[0] = 1.0
    for m in range(l_max + 1):
        if m > 0:
            P[_pair(m, m)] = (2 * m - 1) * st * P[_pair(m - 1, m - 1)]
        if m + 1 <= l_max:
            P[_pair(m + 1, m)] = (2 * m + 1) * ct * P[_pair(m, m)]
        for l in range(m + 2, l_max + 1):
            P[_pair(l, m)] = (
                (2 * l - 1) * ct * P[_pair(l - 1, m)] - (l + m - 1) * P[_pair(l - 2, m)]
            ) / (l - m)
    return P


def _dP_dtheta(P: np.ndarray, l: int, m: int) -> np.ndarray:
    """d/dtheta of P_l^m(cos theta); finite everywhere including poles."""
    if l == 0:
        return np.zeros_like(P[0])
    if m == 0:
        return -P[_pair(l, 1)] if l >= 1 else np.zeros_like(P[0])
    hi = P[_pair(l, m + 1)] if m + 1 <= l else 0.0
    return 0.5 * ((l + m) * (l - m + 1) * P[_pair(l, m - 1)] - hi)


def _m_over_sin(P: np.ndarray, l: int, m: int) -> np.ndarray:
    """(m / sin theta) P_l^m(cos theta) for m >= 1; finite at the poles."""
    lo = P[_pair(l - 1, m - 1)]
    hi = P[_pair(l - 1, m + 1)] if m + 1 <= l - 1 else 0.0
    return 0.5 * (hi + (l + m - 1) * (l + m) * lo)


def _prepare_angles(points: np.ndarray):
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    x, y, z = pts[:, 0], pts[:, 1], pts[:, 2]
    st = np.hypot(x, y)
    ct = np.clip(z, -1.0, 1.0)
    safe = st > 0.0
    cp = np.where(safe, x / np.where(safe, st, 1.0), 1.0)
    sp = np.where(safe, y / np.where(safe, st, 1.0), 0.0)
    return pts, ct, st, cp, sp


def _phi_trig(cp: np.ndarray, sp: np.ndarray, m_max: int):
    """cos(m phi), sin(m phi) for m = 0..m_max via the angle-addition recurrence."""
    n = cp.shape[0]
    C = np.empty((m_max + 1, n))
    S = np.empty((m_max + 1, n))
    C[0], S[0] = 1.0, 0.0
    for m in range(1, m_max + 1):
        C[m] = C[m - 1] * cp - S[m - 1] * sp
        S[m] = S[m - 1] * cp + C[m - 1] * sp
    return C, S


def _basis_block(points: np.ndarray, l_max: int) -> np.ndarray:
    """Dense matrix of basis values, shape (n_points, n_coeffs)."""
    _, ct, st, cp, sp = _prepare_angles(points)
    P = _legendre_table(ct, st, l_max)
    C, S = _phi_trig(cp, sp, l_max)
    norms = _norm_constants(l_max)
    out = np.empty((ct.shape[0], n_coeffs(l_max)))
    sqrt2 = math.sqrt(2.0)
    for l in range(l_max + 1):
        out[:, sh_index(l, 0)] = norms[_pair(l, 0)] * P[_pair(l, 0)]
        for m in range(1, l + 1):
            base = sqrt2 * norms[_pair(l, m)] * P[_pair(l, m)]
            out[:, sh_index(l, m)] = base * C[m]
            out[:, sh_index(l, -m)] = base * S[m]
    return out


def basis_matrix(points: np.ndarray, l_max: int) -> np.ndarray:
    """Basis values at arbitrary unit points, chunked to bound memory."""
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    out = np.empty((pts.shape[0], n_coeffs(l_max)))
    for a in range(0, pts.shape[0], _CHUNK):
        out[a : a + _CHUNK] = _basis_block(pts[a : a + _CHUNK], l_max)
    return out


def _accumulate_block(points, coeffs, l_max, want_grad):
    """Evaluate sum_c coeffs Y (and gradient) on one block of points."""
    pts, ct, st, cp, sp = _prepare_angles(points)
    P = _legendre_table(ct, st, l_max)
    C, S = _phi_trig(cp, sp, l_max)
    norms = _norm_constants(l_max)
    sqrt2 = math.sqrt(2.0)
    n = ct.shape[0]
    val = np.zeros(n)
    gth = np.zeros(n) if want_grad else None  # d/dtheta part
    gph = np.zeros(n) if want_grad else None  # (1/sin) d/dphi part
    for l in range(l_max + 1):
        c0 = coeffs[sh_index(l, 0)]
        if c0 != 0.0:
            nl = norms[_pair(l, 0)]
            val += c0 * nl * P[_pair(l, 0)]
            if want_grad:
                gth += c0 * nl * _dP_dtheta(P, l, 0)
        for m in range(1, l + 1):
            cc = coeffs[sh_index(l, m)]
            cs = coeffs[sh_index(l, -m)]
            if cc == 0.0 and cs == 0.0:
                continue
            nl = sqrt2 * norms[_pair(l, m)]
            mix = cc * C[m] + cs * S[m]
            val += nl * P[_pair(l, m)] * mix
            if want_grad:
                gth += nl * _dP_dtheta(P, l, m) * mix
                # (1/sin) d/dphi of (cc cos + cs sin)(m phi) brings in m/sin
                gph += nl * _m_over_sin(P, l, m) * (-cc * S[m] + cs * C[m])
    if not want_grad:
        return val, None
    # unit frame vectors e_theta, e_phi (well defined limits used at poles)
    e_th = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e_ph = np.stack([-sp, cp, np.zeros(n)], axis=-1)
    grad = gth[:, None] * e_th + gph[:, None] * e_ph
    return val, grad


def _second_derivs_block(points, coeffs, l_max):
    """Coordinate second derivatives (f, f_t, f_p, f_tt, f_tp, f_pp).

    Subscripts t, p mean raw d/dtheta and d/dphi.  Not pole-safe: callers
    must keep points away from the coordinate poles.
    """
    pts, ct, st, cp, sp = _prepare_angles(points)
    if np.any(st < 1e-12):
        raise DomainError("second-derivative evaluation at a coordinate pole")
    P = _legendre_table(ct, st, l_max)
    C, S = _phi_trig(cp, sp, l_max)
    norms = _norm_constants(l_max)
    sqrt2 = math.sqrt(2.0)
    n = ct.shape[0]
    f = np.zeros(n)
    ft = np.zeros(n)
    fp = np.zeros(n)
    ftt = np.zeros(n)
    ftp = np.zeros(n)
    fpp = np.zeros(n)

    def dP(l, m):
        return _dP_dtheta(P, l, m)

    def d2P(l, m):
        if m == 0:
            return -dP(l, 1) if l >= 1 else np.zeros(n)
        hi = dP(l, m + 1) if m + 1 <= l else 0.0
        return 0.5 * ((l + m) * (l - m + 1) * dP(l, m - 1) - hi)

    for l in range(l_max + 1):
        c0 = coeffs[sh_index(l, 0)]
        if c0 != 0.0:
            nl = norms[_pair(l, 0)]
            f += c0 * nl * P[_pair(l, 0)]
            ft += c0 * nl * dP(l, 0)
            ftt += c0 * nl * d2P(l, 0)
        for m in range(1, l + 1):
            cc = coeffs[sh_index(l, m)]
            cs = coeffs[sh_index(l, -m)]
            if cc == 0.0 and cs == 0.0:
                continue
            nl = sqrt2 * norms[_pair(l, m)]
            mix = cc * C[m] + cs * S[m]
            dmix = m * (-cc * S[m] + cs * C[m])
            f += nl * P[_pair(l, m)] * mix
            ft += nl * dP(l, m) * mix
            fp += nl * P[_pair(l, m)] * dmix
            ftt += nl * d2P(l, m) * mix
            ftp += nl * dP(l, m) * dmix
            fpp += nl * P[_pair(l, m)] * (-m * m) * mix
    return f, ft, fp, ftt, ftp, fpp


# ---------------------------------------------------------------------------
# quadrature grid
# ---------------------------------------------------------------------------


class SphereGrid:
    """Gauss-Legendre x uniform-longitude quadrature grid.

    Integrates spherical polynomials of degree <= 2 n_theta - 1 exactly in
    latitude and trigonometric polynomials of degree < n_phi exactly in
    longitude; weights sum to 4 pi.
    """

    def __init__(self, n_theta: int, n_phi: int):
        if n_theta < 1 or n_phi < 1:
            raise ConfigurationError("grid resolution must be positive")
        self.n_theta = int(n_theta)
        self.n_phi = int(n_phi)
        x_gl, w_gl = np.polynomial.legendre.leggauss(self.n_theta)
        order = np.argsort(-x_gl)  # north to south
        self.cos_theta = x_gl[order]
        self._w_theta = w_gl[order]
        self.theta = np.arccos(self.cos_theta)
        self.phi = 2.0 * math.pi * np.arange(self.n_phi) / self.n_phi
        st = np.sqrt(1.0 - self.cos_theta**2)
        nodes = np.empty((self.n_theta * self.n_phi, 3))
        weights = np.empty(self.n_theta * self.n_phi)
        for i in range(self.n_theta):
            sl = slice(i * self.n_phi, (i + 1) * self.n_phi)
            nodes[sl, 0] = st[i] * np.cos(self.phi)
            nodes[sl, 1] = st[i] * np.sin(self.phi)
            nodes[sl, 2] = self.cos_theta[i]
            weights[sl] = self._w_theta[i] * (2.0 * math.pi / self.n_phi)
        self.nodes = nodes
        self.weights = weights
        self._basis_cache: dict[int, np.ndarray] = {}

    @classmethod
    def for_band_limit(cls, l_max: int) -> "SphereGrid":
        """Resolution exact for products of two degree-l_max functions."""
        return cls(2 * l_max + 2, 4 * l_max + 4)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    def basis(self, l_max: int) -> np.ndarray:
        if l_max not in self._basis_cache:
            self._basis_cache[l_max] = basis_matrix(self.nodes, l_max)
        return self._basis_cache[l_max]

    def integrate(self, samples: np.ndarray) -> float:
        return float(self.weights @ np.asarray(samples, dtype=float))

    def project(self, samples: np.ndarray, l_max: int) -> np.ndarray:
        """Coefficients of the L2-orthogonal projection of sampled values."""
        samples = np.asarray(samples, dtype=float)
        if samples.shape[-1] != self.n_nodes:
            raise DomainError(
                f"expected {self.n_nodes} samples, got {samples.shape[-1]}"
            )
        return self.basis(l_max).T @ (self.weights * samples)

    def node_table(self) -> list[dict]:
        """Rows (theta, phi, x, y, z, weight) for CSV export."""
        rows = []
        for i in range(self.n_theta):
            for j in range(self.n_phi):
                k = i * self.n_phi + j
                rows.append(
                    {
                        "theta": self.theta[i],
                        "phi": self.phi[j],
                        "x": self.nodes[k, 0],
                        "y": self.nodes[k, 1],
                        "z": self.nodes[k, 2],
                        "weight": self.weights[k],
                    }
                )
        return rows


_GRID_CACHE: dict[tuple[int, int], SphereGrid] = {}


def standard_grid(l_max: int) -> SphereGrid:
    key = (2 * l_max + 2, 4 * l_max + 4)
    if key not in _GRID_CACHE:
        _GRID_CACHE[key] = SphereGrid(*key)
    return _GRID_CACHE[key]


# ---------------------------------------------------------------------------
# orthogonal transforms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OrthogonalTransform:
    """An element of O(3) acting on functions by (A . f)(x) = f(A x)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float).reshape(3, 3)
        if not np.allclose(m.T @ m, np.eye(3), atol=1e-12):
            raise DomainError("matrix is not orthogonal within 1e-12")
        object.__setattr__(self, "matrix", m)

    @property
    def det_sign(self) -> int:
        return 1 if np.linalg.det(self.matrix) > 0 else -1

    @classmethod
    def identity(cls) -> "OrthogonalTransform":
        return cls(np.eye(3))

    @classmethod
    def rotation(cls, axis, angle: float) -> "OrthogonalTransform":
        u = np.asarray(axis, dtype=float)
        nu = np.linalg.norm(u)
        if nu == 0:
            raise DomainError("rotation axis must be nonzero")
        u = u / nu
        K = np.array([[0, -u[2], u[1]], [u[2], 0, -u[0]], [-u[1], u[0], 0]])
        m = np.eye(3) + math.sin(angle) * K + (1 - math.cos(angle)) * (K @ K)
        return cls(m)

    @classmethod
    def antipodal(cls) -> "OrthogonalTransform":
        return cls(-np.eye(3))

    def compose(self, other: "OrthogonalTransform") -> "OrthogonalTransform":
        return OrthogonalTransform(self.matrix @ other.matrix)

    def inverse(self) -> "OrthogonalTransform":
        return OrthogonalTransform(self.matrix.T)

    def apply(self, points: np.ndarray) -> np.ndarray:
        return np.asarray(points, dtype=float) @ self.matrix.T


# ---------------------------------------------------------------------------
# band-limited functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SphereFunction:
    """Band-limited real function on the sphere, stored by coefficients."""

    coeffs: np.ndarray
    l_max: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1).copy()
        if c.shape[0] != n_coeffs(self.l_max):
            raise ConfigurationError(
                f"coefficient vector length {c.shape[0]} does not match "
                f"l_max={self.l_max} (expected {n_coeffs(self.l_max)})"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    # -- constructors --------------------------------------------------

    @classmethod
    def zero(cls, l_max: int) -> "SphereFunction":
        return cls(np.zeros(n_coeffs(l_max)), l_max)

    @classmethod
    def harmonic(cls, l: int, m: int, l_max: int | None = None) -> "SphereFunction":
        l_max = l if l_max is None else l_max
        c = np.zeros(n_coeffs(l_max))
        c[sh_index(l, m)] = 1.0
        return cls(c, l_max)

    @classmethod
    def from_callable(cls, fn, l_max: int, grid: SphereGrid | None = None):
        grid = grid or standard_grid(l_max)
        samples = np.asarray(fn(grid.nodes), dtype=float).reshape(-1)
        return cls(grid.project(samples, l_max), l_max)

    # -- structure -----------------------------------------------------

    def coeff(self, l: int, m: int) -> float:
        return float(self.coeffs[sh_index(l, m)])

    def degree_slice(self, l: int) -> np.ndarray:
        return self.coeffs[l * l : (l + 1) * (l + 1)]

    def pad_to(self, l_max: int) -> "SphereFunction":
        if l_max < self.l_max:
            raise ConfigurationError("pad_to cannot shrink the band limit")
        c = np.zeros(n_coeffs(l_max))
        c[: self.coeffs.shape[0]] = self.coeffs
        return SphereFunction(c, l_max)

    def truncated(self, l_cut: int) -> "SphereFunction":
        """Sharp truncation: keep degrees l <= l_cut (band limit unchanged)."""
        c = self.coeffs.copy()
        c[n_coeffs(min(l_cut, self.l_max)) :] = 0.0
        return SphereFunction(c, self.l_max)

    # -- algebra ---------------------------------------------------------

    def __add__(self, other: "SphereFunction") -> "SphereFunction":
        L = max(self.l_max, other.l_max)
        return SphereFunction(
            self.pad_to(L).coeffs + other.pad_to(L).coeffs, L
        )

    def __sub__(self, other: "SphereFunction") -> "SphereFunction":
        return self + (-1.0) * other

    def __rmul__(self, s: float) -> "SphereFunction":
        return SphereFunction(float(s) * self.coeffs, self.l_max)

    def __mul__(self, s: float) -> "SphereFunction":
        return self.__rmul__(s)

    def __neg__(self) -> "SphereFunction":
        return (-1.0) * self

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def inner(self, other: "SphereFunction") -> float:
        L = max(self.l_max, other.l_max)
        return float(self.pad_to(L).coeffs @ other.pad_to(L).coeffs)

    # -- analysis --------------------------------------------------------

    def evaluate(self, points: np.ndarray) -> np.ndarray | float:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        flat = pts.reshape(-1, 3)
        out = np.empty(flat.shape[0])
        for a in range(0, flat.shape[0], _CHUNK):
            out[a : a + _CHUNK], _ = _accumulate_block(
                flat[a : a + _CHUNK], self.coeffs, self.l_max, False
            )
        if single:
            return float(out[0])
        return out.reshape(pts.shape[:-1])

    def gradient(self, points: np.ndarray) -> np.ndarray:
        """Riemannian gradient, returned as tangent vectors in R^3."""
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        flat = pts.reshape(-1, 3)
        out = np.empty((flat.shape[0], 3))
        for a in range(0, flat.shape[0], _CHUNK):
            _, g = _accumulate_block(
                flat[a : a + _CHUNK], self.coeffs, self.l_max, True
            )
            out[a : a + _CHUNK] = g
        if single:
            return out[0]
        return out.reshape(pts.shape)

    def coordinate_second_derivatives(self, points: np.ndarray):
        """(f, f_theta, f_phi, f_thth, f_thph, f_phph) at off-pole points."""
        pts = np.asarray(points, dtype=float).reshape(-1, 3)
        parts = [np.empty(pts.shape[0]) for _ in range(6)]
        for a in range(0, pts.shape[0], _CHUNK):
            blk = _second_derivs_block(pts[a : a + _CHUNK], self.coeffs, self.l_max)
            for dst, src in zip(parts, blk):
                dst[a : a + _CHUNK] = src
        return tuple(parts)

    def laplacian(self) -> "SphereFunction":
        c = self.coeffs.copy()
        for l in range(self.l_max + 1):
            c[l * l : (l + 1) * (l + 1)] *= -l * (l + 1)
        return SphereFunction(c, self.l_max)

    def odd_part(self) -> "SphereFunction":
        c = self.coeffs.copy()
        for l in range(0, self.l_max + 1, 2):
            c[l * l : (l + 1) * (l + 1)] = 0.0
        return SphereFunction(c, self.l_max)

    def even_part(self) -> "SphereFunction":
        c = self.coeffs.copy()
        for l in range(1, self.l_max + 1, 2):
            c[l * l : (l + 1) * (l + 1)] = 0.0
        return SphereFunction(c, self.l_max)

    def remove_linear(self) -> "SphereFunction":
        """Project out the degree-1 component."""
        c = self.coeffs.copy()
        if self.l_max >= 1:
            c[1:4] = 0.0
        return SphereFunction(c, self.l_max)

    def mean(self) -> float:
        """Average value over the sphere."""
        return self.coeff(0, 0) / math.sqrt(4.0 * math.pi)

    def rotate(self, A: OrthogonalTransform) -> "SphereFunction":
        """Pullback f o A, computed by resampling on the standard grid."""
        grid = standard_grid(self.l_max)
        samples = self.evaluate(A.apply(grid.nodes))
        return SphereFunction(grid.project(samples, self.l_max), self.l_max)

    # -- serialization -----------------------------------------------------

    def to_json_dict(self) -> dict:
        return {
            "type": "sphere_function",
            "l_max": self.l_max,
            "coeffs": [float(c) for c in self.coeffs],
            "indexing": "l*l + l + m",
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "SphereFunction":
        return cls(np.asarray(d["coeffs"], dtype=float), int(d["l_max"]))

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json(cls, s: str) -> "SphereFunction":
        return cls.from_json_dict(json.loads(s))


# ---------------------------------------------------------------------------
# module-level operations (functional aliases)
# ---------------------------------------------------------------------------


def project(samples: np.ndarray, l_max: int, grid: SphereGrid | None = None):
    grid = grid or standard_grid(l_max)
    return SphereFunction(grid.project(samples, l_max), l_max)


def evaluate(f: SphereFunction, points: np.ndarray):
    return f.evaluate(points)


def gradient(f: SphereFunction, points: np.ndarray):
    return f.gradient(points)


def laplacian(f: SphereFunction) -> SphereFunction:
    return f.laplacian()


def odd_part(f: SphereFunction) -> SphereFunction:
    return f.odd_part()


def even_part(f: SphereFunction) -> SphereFunction:
    return f.even_part()


def remove_linear(f: SphereFunction) -> SphereFunction:
    return f.remove_linear()


def rotate(f: SphereFunction, A: OrthogonalTransform) -> SphereFunction:
    return f.rotate(A)
