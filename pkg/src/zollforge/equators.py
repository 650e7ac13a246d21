"""Oriented great circles, their frames, and tangent fields of equators.

A direction v in S^2 labels the oriented great circle Sigma_v = v-perp (its
"equator").  A tangent field Phi assigns to every direction a function
Phi_v on Sigma_v with |Phi_v| < pi/2, and the graphed curve

    F_v(x) = cos(Phi_v(x)) x + sin(Phi_v(x)) v,   x in Sigma_v,

is the equator tilted towards v.  Odd symmetry Phi_{-v}(x) = -Phi_v(x) makes
the family projective (curves depend on +-v only up to orientation).

Frames: each direction gets an orthonormal basis (e1, e2) of v-perp from one
of two charts, switching at |<v, e3>| = 0.9:

    |v3| <= 0.9 :  e1 = normalize(e3 x v),  e2 = v x e1
    |v3| >  0.9 :  e1 = normalize(e1_ref x v),  e2 = v x e1   (e1_ref = x-axis)

Circle functions are truncated Fourier series on [0, 2 pi) with coefficient
layout [a_0, a_1..a_K, b_1..b_K] for a_0 + sum_k (a_k cos k th + b_k sin k th).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    DomainError,
    GraphValidityError,
    SingularityError,
)
from .sphere import SphereFunction, SphereGrid, standard_grid

_CHART_BOUNDARY = 0.9
_E3 = np.array([0.0, 0.0, 1.0])
_E1_REF = np.array([1.0, 0.0, 0.0])


# ---------------------------------------------------------------------------
# frames
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquatorFrame:
    """Orthonormal basis (e1, e2) of the plane orthogonal to v."""

    v: np.ndarray
    e1: np.ndarray
    e2: np.ndarray

    def point(self, theta) -> np.ndarray:
        th = np.asarray(theta, dtype=float)
        return (
            np.cos(th)[..., None] * self.e1 + np.sin(th)[..., None] * self.e2
        )

    def angle_of(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.arctan2(x @ self.e2, x @ self.e1)


def equator_frame(v: np.ndarray) -> EquatorFrame:
    v = np.asarray(v, dtype=float)
    nv = np.linalg.norm(v)
    if not np.isclose(nv, 1.0, atol=1e-10):
        raise DomainError("direction must be a unit vector")
    v = v / nv
    ref = _E3 if abs(v[2]) <= _CHART_BOUNDARY else _E1_REF
    e1 = np.cross(ref, v)
    e1 = e1 / np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    return EquatorFrame(v=v, e1=e1, e2=e2)


def _frames_array(directions: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized frame construction for an array of unit directions."""
    v = np.asarray(directions, dtype=float)
    use_polar = np.abs(v[:, 2]) > _CHART_BOUNDARY
    ref = np.where(use_polar[:, None], _E1_REF, _E3)
    e1 = np.cross(ref, v)
    e1 = e1 / np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(v, e1)
    return e1, e2


# ---------------------------------------------------------------------------
# circle functions
# ---------------------------------------------------------------------------


def fourier_design(thetas: np.ndarray, k_max: int) -> np.ndarray:
    """Design matrix, rows [1, cos th, ..., cos K th, sin th, ..., sin K th]."""
    th = np.asarray(thetas, dtype=float).reshape(-1)
    rows = [np.ones_like(th)]
    for k in range(1, k_max + 1):
        rows.append(np.cos(k * th))
    for k in range(1, k_max + 1):
        rows.append(np.sin(k * th))
    return np.stack(rows, axis=0)


def uniform_angles(n: int) -> np.ndarray:
    return 2.0 * math.pi * np.arange(n) / n


_DESIGN_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _uniform_design(n: int, k_max: int) -> np.ndarray:
    key = (n, k_max)
    if key not in _DESIGN_CACHE:
        _DESIGN_CACHE[key] = fourier_design(uniform_angles(n), k_max)
    return _DESIGN_CACHE[key]


def fourier_coeffs_from_values(values: np.ndarray, k_max: int) -> np.ndarray:
    """Leading Fourier coefficients of uniformly sampled rows.

    Exact for trigonometric polynomials of degree <= k_max sampled at
    n > 2 k_max points.
    """
    vals = np.asarray(values, dtype=float)
    n = vals.shape[-1]
    if n < 2 * k_max + 1:
        raise ConfigurationError(
            f"{n} samples cannot resolve Fourier modes up to k={k_max}"
        )
    spec = np.fft.rfft(vals, axis=-1)
    out = np.zeros(vals.shape[:-1] + (2 * k_max + 1,))
    out[..., 0] = spec[..., 0].real / n
    out[..., 1 : k_max + 1] = 2.0 * spec[..., 1 : k_max + 1].real / n
    out[..., k_max + 1 :] = -2.0 * spec[..., 1 : k_max + 1].imag / n
    return out


def derivative_coeffs(coeffs: np.ndarray, k_max: int) -> np.ndarray:
    """Coefficients of d/dtheta in the same layout."""
    c = np.asarray(coeffs, dtype=float)
    out = np.zeros_like(c)
    k = np.arange(1, k_max + 1, dtype=float)
    out[..., 1 : k_max + 1] = k * c[..., k_max + 1 :]
    out[..., k_max + 1 :] = -k * c[..., 1 : k_max + 1]
    return out


def _transport_coeffs(c: np.ndarray, k_max: int, alpha: float, det: int) -> np.ndarray:
    """Coefficients of f(theta - alpha) (det=+1) or f(alpha - theta) (det=-1)."""
    out = np.empty_like(c)
    k = np.arange(1, k_max + 1, dtype=float)
    ck, sk = np.cos(k * alpha), np.sin(k * alpha)
    a, b = c[1 : k_max + 1], c[k_max + 1 :]
    out[0] = c[0]
    if det >= 0:
        out[1 : k_max + 1] = a * ck - b * sk
        out[k_max + 1 :] = a * sk + b * ck
    else:
        out[1 : k_max + 1] = a * ck + b * sk
        out[k_max + 1 :] = a * sk - b * ck
    return out


def antipodal_coeffs(coeffs: np.ndarray, k_max: int) -> np.ndarray:
    """Coefficients of Phi_{-v} given those of Phi_v.

    The antipodal frame satisfies e1 -> -e1, e2 -> e2, i.e. th -> pi - th,
    and oddness flips the sign of the value.
    """
    c = np.asarray(coeffs, dtype=float)
    out = np.empty_like(c)
    k = np.arange(1, k_max + 1)
    sign = (-1.0) ** k
    out[..., 0] = -c[..., 0]
    out[..., 1 : k_max + 1] = -sign * c[..., 1 : k_max + 1]
    out[..., k_max + 1 :] = sign * c[..., k_max + 1 :]
    return out


@dataclass(frozen=True)
class CircleFunction:
    """Truncated Fourier series on a single oriented circle."""

    coeffs: np.ndarray
    k_max: int

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=float).reshape(-1).copy()
        if c.shape[0] != 2 * self.k_max + 1:
            raise ConfigurationError(
                f"coefficient length {c.shape[0]} does not match k_max={self.k_max}"
            )
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zero(cls, k_max: int) -> "CircleFunction":
        return cls(np.zeros(2 * k_max + 1), k_max)

    @classmethod
    def from_values(cls, values: np.ndarray, k_max: int) -> "CircleFunction":
        return cls(fourier_coeffs_from_values(values, k_max), k_max)

    @classmethod
    def from_modes(cls, a0=0.0, a=None, b=None, k_max=None) -> "CircleFunction":
        a = dict(a or {})
        b = dict(b or {})
        K = k_max if k_max is not None else max([0, *a.keys(), *b.keys()])
        c = np.zeros(2 * K + 1)
        c[0] = a0
        for k, val in a.items():
            c[k] = val
        for k, val in b.items():
            c[K + k] = val
        return cls(c, K)

    def a(self, k: int) -> float:
        return float(self.coeffs[0] if k == 0 else self.coeffs[k])

    def b(self, k: int) -> float:
        if k < 1:
            raise DomainError("sine coefficients start at k=1")
        return float(self.coeffs[self.k_max + k])

    def evaluate(self, theta) -> np.ndarray | float:
        th = np.asarray(theta, dtype=float)
        design = fourier_design(th.reshape(-1), self.k_max)
        out = self.coeffs @ design
        if th.ndim == 0:
            return float(out[0])
        return out.reshape(th.shape)

    def values(self, n: int) -> np.ndarray:
        return self.coeffs @ _uniform_design(n, self.k_max)

    def derivative(self) -> "CircleFunction":
        return CircleFunction(derivative_coeffs(self.coeffs, self.k_max), self.k_max)

    def shifted(self, alpha: float) -> "CircleFunction":
        """The function theta -> f(theta + alpha)."""
        return CircleFunction(
            _transport_coeffs(self.coeffs, self.k_max, -float(alpha), 1), self.k_max
        )

    def zero_center(self) -> "CircleFunction":
        c = self.coeffs.copy()
        if self.k_max >= 1:
            c[1] = 0.0
            c[self.k_max + 1] = 0.0
        return CircleFunction(c, self.k_max)

    def center(self) -> tuple[float, float]:
        if self.k_max < 1:
            return (0.0, 0.0)
        return (float(self.coeffs[1]), float(self.coeffs[self.k_max + 1]))

    def max_abs(self, n: int = 512) -> float:
        return float(np.max(np.abs(self.values(max(n, 4 * self.k_max + 4)))))

    def __add__(self, other: "CircleFunction") -> "CircleFunction":
        if self.k_max != other.k_max:
            raise ConfigurationError("circle functions have different truncation")
        return CircleFunction(self.coeffs + other.coeffs, self.k_max)

    def __rmul__(self, s: float) -> "CircleFunction":
        return CircleFunction(float(s) * self.coeffs, self.k_max)

    __mul__ = __rmul__

    def __sub__(self, other: "CircleFunction") -> "CircleFunction":
        return self + (-1.0) * other

    def norm(self) -> float:
        # L2([0, 2 pi)) norm under orthogonality of the trig basis
        w = np.full(self.coeffs.shape, math.pi)
        w[0] = 2.0 * math.pi
        return float(math.sqrt(np.sum(w * self.coeffs**2)))


# ---------------------------------------------------------------------------
# direction grid (quadrature on RP^2 via a hemisphere)
# ---------------------------------------------------------------------------


class DirectionGrid:
    """One direction per projective class, with frames and RP^2 weights.

    Built from a sphere quadrature grid by keeping nodes in the open upper
    hemisphere; a node exactly on the equator ring (odd latitude counts
    only) is kept for phi in [0, pi) at full weight.  Weights sum to 2 pi.
    """

    def __init__(self, base: SphereGrid):
        self.base = base
        z = base.nodes[:, 2]
        keep = z > 1e-14
        ring = np.abs(z) <= 1e-14
        if np.any(ring):
            phis = np.arctan2(base.nodes[:, 1], base.nodes[:, 0])
            keep = keep | (ring & (phis >= -1e-14) & (phis < math.pi - 1e-14))
        self.indices = np.nonzero(keep)[0]
        self.directions = base.nodes[self.indices]
        self.weights = base.weights[self.indices]
        self.e1, self.e2 = _frames_array(self.directions)
        self._lookup: dict[tuple, tuple[int, int]] = {}
        for j, v in enumerate(self.directions):
            self._lookup[self._key(v)] = (j, +1)
            self._lookup[self._key(-v)] = (j, -1)
        self._circle_cache: dict[int, np.ndarray] = {}

    @staticmethod
    def _key(v: np.ndarray) -> tuple:
        return tuple(np.round(np.asarray(v, dtype=float), 9))

    @classmethod
    def standard(cls, l_max: int) -> "DirectionGrid":
        return cls(standard_grid(l_max))

    @property
    def n_directions(self) -> int:
        return self.directions.shape[0]

    def index_of(self, v: np.ndarray) -> tuple[int, int]:
        """(row, sign): sign -1 means v is the antipode of the stored one."""
        key = self._key(np.asarray(v, dtype=float))
        if key not in self._lookup:
            raise DomainError("direction is not a grid node (or its antipode)")
        return self._lookup[key]

    def frame(self, j: int) -> EquatorFrame:
        return EquatorFrame(self.directions[j], self.e1[j], self.e2[j])

    def circle_points(self, n_angles: int) -> np.ndarray:
        """Equator sample points, shape (n_directions, n_angles, 3)."""
        if n_angles not in self._circle_cache:
            th = uniform_angles(n_angles)
            pts = (
                np.cos(th)[None, :, None] * self.e1[:, None, :]
                + np.sin(th)[None, :, None] * self.e2[:, None, :]
            )
            self._circle_cache[n_angles] = pts
        return self._circle_cache[n_angles]

    def integrate(self, values: np.ndarray) -> float:
        return float(self.weights @ np.asarray(values, dtype=float))

    def mean(self, values: np.ndarray) -> float:
        return self.integrate(values) / (2.0 * math.pi)


_DIRECTION_CACHE: dict[int, DirectionGrid] = {}


def standard_directions(l_max: int) -> DirectionGrid:
    if l_max not in _DIRECTION_CACHE:
        _DIRECTION_CACHE[l_max] = DirectionGrid.standard(l_max)
    return _DIRECTION_CACHE[l_max]


# ---------------------------------------------------------------------------
# tangent fields
# ---------------------------------------------------------------------------


class TangentField:
    """A circle function on every grid direction (odd across antipodes).

    Coefficient matrix has shape (n_directions, 2 k_max + 1) in the layout
    [a_0, a_1..a_K, b_1..b_K] per row.  An optional analytic callable
    fn(points, v) -> values gives exact off-grid evaluation.
    """

    def __init__(self, grid: DirectionGrid, k_max: int, coeffs: np.ndarray,
                 analytic=None):
        coeffs = np.asarray(coeffs, dtype=float)
        if coeffs.shape != (grid.n_directions, 2 * k_max + 1):
            raise ConfigurationError(
                f"coefficient matrix shape {coeffs.shape} does not match "
                f"({grid.n_directions}, {2 * k_max + 1})"
            )
        self.grid = grid
        self.k_max = int(k_max)
        self.coeffs = coeffs
        self.analytic = analytic

    # -- constructors ----------------------------------------------------

    @classmethod
    def zero(cls, grid: DirectionGrid, k_max: int) -> "TangentField":
        return cls(grid, k_max, np.zeros((grid.n_directions, 2 * k_max + 1)))

    @classmethod
    def from_callable(cls, grid: DirectionGrid, k_max: int, fn,
                      n_samples: int | None = None) -> "TangentField":
        n = n_samples or max(4 * (k_max + 1), 64)
        pts = grid.circle_points(n)
        vals = np.empty((grid.n_directions, n))
        for j in range(grid.n_directions):
            vals[j] = np.asarray(fn(pts[j], grid.directions[j]), dtype=float)
        return cls(grid, k_max, fourier_coeffs_from_values(vals, k_max), analytic=fn)

    @classmethod
    def from_values(cls, grid: DirectionGrid, k_max: int,
                    values: np.ndarray) -> "TangentField":
        return cls(grid, k_max, fourier_coeffs_from_values(values, k_max))

    # -- per-direction access ---------------------------------------------

    def circle(self, v_or_index) -> CircleFunction:
        if isinstance(v_or_index, (int, np.integer)):
            return CircleFunction(self.coeffs[int(v_or_index)], self.k_max)
        j, sign = self.grid.index_of(v_or_index)
        row = self.coeffs[j]
        if sign < 0:
            row = antipodal_coeffs(row, self.k_max)
        return CircleFunction(row, self.k_max)

    def values_on_angles(self, n_angles: int) -> np.ndarray:
        """(n_directions, n_angles) values on the uniform angle grid."""
        return self.coeffs @ _uniform_design(n_angles, self.k_max)

    def max_abs(self, n_angles: int = 256) -> float:
        return float(np.max(np.abs(self.values_on_angles(n_angles))))

    def check_graph_validity(self, margin: float = 0.0) -> None:
        m = self.max_abs()
        if m >= math.pi / 2 - margin:
            raise GraphValidityError(
                f"tangent field max |phi| = {m:.6f} leaves the graph regime"
            )

    # -- structure ----------------------------------------------------------

    def center_components(self) -> np.ndarray:
        """First-harmonic pairs (a_1, b_1) per direction, shape (Nd, 2)."""
        if self.k_max < 1:
            return np.zeros((self.grid.n_directions, 2))
        return np.stack(
            [self.coeffs[:, 1], self.coeffs[:, self.k_max + 1]], axis=1
        )

    def zero_center(self) -> "TangentField":
        c = self.coeffs.copy()
        if self.k_max >= 1:
            c[:, 1] = 0.0
            c[:, self.k_max + 1] = 0.0
        return TangentField(self.grid, self.k_max, c)

    def truncated(self, k_cut: int) -> "TangentField":
        """Sharp truncation to Fourier modes k <= k_cut."""
        c = self.coeffs.copy()
        if k_cut < self.k_max:
            c[:, k_cut + 1 : self.k_max + 1] = 0.0
            c[:, self.k_max + 1 + k_cut :] = 0.0
        return TangentField(self.grid, self.k_max, c)

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))

    def rotate(self, A) -> "TangentField":
        """Pullback (x, v) -> Phi(A^{-1}x, A^{-1}v) for A preserving the grid.

        A must map every grid direction to a grid direction or its antipode
        (DomainError otherwise).  Works for any orthogonal A, including
        orientation-reversing ones.
        """
        R = np.asarray(getattr(A, "matrix", A), dtype=float)
        det = 1 if np.linalg.det(R) > 0 else -1
        new = np.empty_like(self.coeffs)
        for j in range(self.grid.n_directions):
            v2 = R @ self.grid.directions[j]
            j2, sign = self.grid.index_of(v2)
            fr_j = self.grid.frame(j)
            e1s, csrc = fr_j.e1, self.coeffs[j]
            if sign < 0:
                csrc = antipodal_coeffs(csrc, self.k_max)
                e1s = -e1s
            fr2 = self.grid.frame(j2)
            a1 = R @ e1s
            alpha = math.atan2(a1 @ fr2.e2, a1 @ fr2.e1)
            new[j2] = _transport_coeffs(csrc, self.k_max, alpha, det)
        return TangentField(self.grid, self.k_max, new)

    def __add__(self, other: "TangentField") -> "TangentField":
        self._check_compatible(other)
        return TangentField(self.grid, self.k_max, self.coeffs + other.coeffs)

    def __sub__(self, other: "TangentField") -> "TangentField":
        self._check_compatible(other)
        return TangentField(self.grid, self.k_max, self.coeffs - other.coeffs)

    def __rmul__(self, s: float) -> "TangentField":
        return TangentField(self.grid, self.k_max, float(s) * self.coeffs)

    __mul__ = __rmul__

    def _check_compatible(self, other: "TangentField") -> None:
        if self.grid is not other.grid or self.k_max != other.k_max:
            if self.k_max != other.k_max or not np.array_equal(
                self.grid.directions, other.grid.directions
            ):
                raise ConfigurationError("tangent fields live on different grids")

    # -- off-grid evaluation -------------------------------------------------

    def evaluate_at(self, x: np.ndarray, v: np.ndarray,
                    n_neighbors: int = 6):
        """Phi_v at equator points x (|x|=1, x perp v); x may be batched
        with shape (..., 3).

        Uses the analytic callable when present; otherwise inverse-distance
        interpolation over nearby grid directions, evaluating each grid
        circle at the projection of x onto that equator.
        """
        x = np.asarray(x, dtype=float)
        v = np.asarray(v, dtype=float)
        single = x.ndim == 1
        xb = x.reshape(-1, 3)
        if self.analytic is not None:
            out = np.asarray(self.analytic(xb, v), dtype=float).reshape(-1)
        else:
            dots = self.grid.directions @ v
            sign = np.where(dots >= 0.0, 1.0, -1.0)
            d2 = 2.0 * (1.0 - np.abs(np.clip(dots, -1.0, 1.0)))  # chordal^2
            order = np.argsort(d2)[:n_neighbors]
            if d2[order[0]] < 1e-18:
                j = order[0]
                out = self._grid_value_at(j, sign[j], xb)
            else:
                wts = 1.0 / (d2[order] + 1e-18)
                vals = np.stack(
                    [self._grid_value_at(j, sign[j], xb) for j in order]
                )
                out = (wts @ vals) / np.sum(wts)
        if single:
            return float(out[0])
        return out.reshape(x.shape[:-1])

    def _grid_value_at(self, j: int, sign: float, x: np.ndarray) -> np.ndarray:
        """Values of grid circle j (or its antipode) at the feet of points x
        (shape (N, 3)) projected onto that equator."""
        vj = sign * self.grid.directions[j]
        row = self.coeffs[j]
        if sign < 0:
            row = antipodal_coeffs(row, self.k_max)
            e1, e2 = -self.grid.e1[j], self.grid.e2[j]
        else:
            e1, e2 = self.grid.e1[j], self.grid.e2[j]
        xp = x - (x @ vj)[:, None] * vj
        nx = np.linalg.norm(xp, axis=-1)
        if np.any(nx < 1e-14):
            raise SingularityError("point is parallel to the grid direction")
        xp = xp / nx[:, None]
        th = np.arctan2(xp @ e2, xp @ e1)
        return row @ fourier_design(th, self.k_max)

    # -- serialization ---------------------------------------------------------

    def to_json_dict(self) -> dict:
        inter = np.empty_like(self.coeffs)
        inter[:, 0] = self.coeffs[:, 0]
        inter[:, 1::2] = self.coeffs[:, 1 : self.k_max + 1]
        inter[:, 2::2] = self.coeffs[:, self.k_max + 1 :]
        return {
            "type": "tangent_field",
            "k_max": self.k_max,
            "layout": "[a0, a1, b1, a2, b2, ...] per direction",
            "directions": [[float(c) for c in v] for v in self.grid.directions],
            "coeffs": [[float(c) for c in row] for row in inter],
        }

    @classmethod
    def from_json_dict(cls, d: dict, grid: DirectionGrid) -> "TangentField":
        k_max = int(d["k_max"])
        inter = np.asarray(d["coeffs"], dtype=float)
        dirs = np.asarray(d["directions"], dtype=float)
        if inter.shape != (grid.n_directions, 2 * k_max + 1) or not np.allclose(
            dirs, grid.directions, atol=1e-9
        ):
            raise ConfigurationError("serialized field does not match the grid")
        c = np.empty_like(inter)
        c[:, 0] = inter[:, 0]
        c[:, 1 : k_max + 1] = inter[:, 1::2]
        c[:, k_max + 1 :] = inter[:, 2::2]
        return cls(grid, k_max, c)

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())


# ---------------------------------------------------------------------------
# geometric operations
# ---------------------------------------------------------------------------


def _phi_value(Phi, v, theta):
    if Phi is None:
        return np.zeros_like(np.asarray(theta, dtype=float))
    if isinstance(Phi, CircleFunction):
        return Phi.evaluate(theta)
    if isinstance(Phi, TangentField):
        return Phi.circle(v).evaluate(theta)
    if np.isscalar(Phi):
        return float(Phi) * np.ones_like(np.asarray(theta, dtype=float))
    raise ConfigurationError(f"unsupported tangent-field argument {type(Phi)}")


def graph_point(v: np.ndarray, theta, Phi=None) -> np.ndarray:
    """F_v(x(theta)) = cos(Phi) x + sin(Phi) v on the tilted equator."""
    fr = equator_frame(v)
    th = np.asarray(theta, dtype=float)
    q = np.asarray(_phi_value(Phi, fr.v, th), dtype=float)
    if np.any(np.abs(q) >= math.pi / 2):
        raise GraphValidityError("`|phi| < pi/2` violated at a graph point")
    x = fr.point(th)
    return np.cos(q)[..., None] * x + np.sin(q)[..., None] * fr.v


def variational_vector(v: np.ndarray, theta, Phi=None) -> np.ndarray:
    """Unit normal n_v = -sin(Phi) x + cos(Phi) v to the graphed curve in S^2."""
    fr = equator_frame(v)
    th = np.asarray(theta, dtype=float)
    q = np.asarray(_phi_value(Phi, fr.v, th), dtype=float)
    x = fr.point(th)
    return -np.sin(q)[..., None] * x + np.cos(q)[..., None] * fr.v


def restrict(f: SphereFunction, v: np.ndarray, Phi=None,
             k_max: int | None = None, n_samples: int | None = None) -> CircleFunction:
    """Fourier expansion of f along the (possibly tilted) equator of v."""
    K = k_max if k_max is not None else 2 * f.l_max
    n = n_samples or max(2 * K + 2, 4 * f.l_max + 4)
    th = uniform_angles(n)
    pts = graph_point(v, th, Phi)
    return CircleFunction.from_values(f.evaluate(pts), K)


def center_map(Phi: TangentField) -> np.ndarray:
    """First-harmonic components (a_1, b_1) of Phi per direction."""
    return Phi.center_components()


def project_zero_center(Phi: TangentField) -> TangentField:
    """Remove the first harmonic of every circle (the 'recentering' modes)."""
    return Phi.zero_center()


def dual_hypersurface(p: np.ndarray, Phi: TangentField,
                      n_samples: int = 128, tol: float = 1e-12,
                      max_iter: int = 80,
                      alpha_values: np.ndarray | None = None) -> np.ndarray:
    """Directions whose graphed curves pass through the point p.

    For each angle alpha on a uniform grid (or the explicit alpha_values),
    the candidate direction is

        v(alpha, s) = cos(s) w(alpha) + sin(s) p,   w(alpha) in p-perp,

    and s solves s = Phi_v(x_p(v)) with x_p(v) = (p - <p, v> v)/cos(s), found
    by bisection.  Returns an array of unit directions, one per alpha.
    """
    p = np.asarray(p, dtype=float)
    p = p / np.linalg.norm(p)
    fr = equator_frame(p)  # gives an orthonormal basis (e1, e2) of p-perp
    alphas = uniform_angles(n_samples) if alpha_values is None \
        else np.asarray(alpha_values, dtype=float)
    out = np.empty((alphas.size, 3))
    s_lim = math.pi / 2 - 1e-6

    def residual(alpha, s):
        w = math.cos(alpha) * fr.e1 + math.sin(alpha) * fr.e2
        v = math.cos(s) * w + math.sin(s) * p
        xp = (p - math.sin(s) * v) / math.cos(s)
        xp = xp / np.linalg.norm(xp)
        return s - Phi.evaluate_at(xp, v), v

    for i, alpha in enumerate(alphas):
        lo, hi = -s_lim, s_lim
        r_lo, _ = residual(alpha, lo)
        r_hi, _ = residual(alpha, hi)
        if r_lo == 0.0:
            out[i] = residual(alpha, lo)[1]
            continue
        if r_lo * r_hi > 0:
            raise SingularityError("dual direction root not bracketed")
        for _ in range(max_iter):
            mid = 0.5 * (lo + hi)
            r_mid, v_mid = residual(alpha, mid)
            if abs(r_mid) < tol or hi - lo < tol:
                break
            if r_lo * r_mid <= 0:
                hi = mid
            else:
                lo, r_lo = mid, r_mid
        out[i] = v_mid
    return out
