"""Star-shaped surfaces in R^3 and their curvature fields.

A function psi on the unit sphere defines the surface iota(x) = e^{psi(x)} x.
This module evaluates the induced metric, the outward unit normal, the
Weingarten map, the mean curvature, and their first variations in psi, all
from the spectral representation of psi (finite differences appear only in
test oracles).

Sign and normalization conventions, with round-sphere values in parentheses:

    N      outward unit normal  (x - grad psi) / sqrt(1 + |grad psi|^2)  (= x)
    A      Weingarten map with the convention  d iota o A = dN           (= Id)
    H      mean curvature, trace of A in the induced metric             (= 2)
    Hvec   mean-curvature vector  -H N                          (points inward)
    K      Gaussian curvature  det A                                     (= 1)

All differential operators on psi act in the round metric of the sphere.
Pointwise matrices (Weingarten map, metric, Hessian) are expressed in the
orthonormal coordinate frame (e_theta, e_phi), so they are undefined at the
two coordinate poles; quadrature grids never contain the poles.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .sphere import SphereFunction, SphereGrid, standard_grid

SPHERE_DIM = 2  # the "n" in the curvature formulas; surfaces live in R^{n+1}

# ---------------------------------------------------------------------------
# pointwise frame data
# ---------------------------------------------------------------------------


def _frame_blocks(f: SphereFunction, points: np.ndarray):
    """Value, frame gradient, frame Hessian, and the frame itself.

    Returns (values, grad, hess, e_th, e_ph) with grad of shape (n, 2) and
    hess of shape (n, 2, 2), components taken in the orthonormal coordinate
    frame (e_theta, e_phi).  The covariant Hessian on the sphere is obtained
    from raw coordinate derivatives by the usual Christoffel corrections

        H_tt = f_tt,   H_tp = (f_tp - cot(t) f_p) / sin(t),
        H_pp = f_pp / sin(t)^2 + cot(t) f_t.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    val, ft, fp, ftt, ftp, fpp = f.coordinate_second_derivatives(pts)
    ct = np.clip(pts[:, 2], -1.0, 1.0)
    st = np.hypot(pts[:, 0], pts[:, 1])
    cp = pts[:, 0] / st
    sp = pts[:, 1] / st
    e_th = np.stack([ct * cp, ct * sp, -st], axis=-1)
    e_ph = np.stack([-sp, cp, np.zeros_like(st)], axis=-1)
    grad = np.stack([ft, fp / st], axis=-1)
    cot = ct / st
    hess = np.empty((pts.shape[0], 2, 2))
    hess[:, 0, 0] = ftt
    hess[:, 0, 1] = hess[:, 1, 0] = (ftp - cot * fp) / st
    hess[:, 1, 1] = fpp / (st * st) + cot * ft
    return val, grad, hess, e_th, e_ph


def _shape_from_blocks(val, grad, hess):
    """Frame matrix of the Weingarten map from pointwise frame data."""
    w = 1.0 + np.einsum("ni,ni->n", grad, grad)
    hg = np.einsum("nij,nj->ni", hess, grad)
    mats = np.eye(2)[None] - hess + grad[:, :, None] * hg[:, None, :] / w[:, None, None]
    return (np.exp(-val) / np.sqrt(w))[:, None, None] * mats


def _mean_from_blocks(val, grad, hess):
    """Closed mean-curvature formula from pointwise frame data."""
    w = 1.0 + np.einsum("ni,ni->n", grad, grad)
    lap = hess[:, 0, 0] + hess[:, 1, 1]
    quad = np.einsum("ni,nij,nj->n", grad, hess, grad)
    return np.exp(-val) / np.sqrt(w) * (SPHERE_DIM - lap + quad / w)


def _metric_from_blocks(val, grad):
    """Frame matrix of the induced metric e^{2 psi}(can + dpsi (x) dpsi)."""
    mats = np.eye(2)[None] + grad[:, :, None] * grad[:, None, :]
    return np.exp(2.0 * val)[:, None, None] * mats


# ---------------------------------------------------------------------------
# surface type
# ---------------------------------------------------------------------------


class StarShapedSurface:
    """The surface iota(x) = e^{psi(x)} x with cached node data.

    Node values of psi, its frame gradient, and its frame Hessian are
    precomputed on the quadrature grid so that whole-field curvature
    evaluations reuse them; pointwise queries recompute at the requested
    points.  cache_residual() cross-checks the cached values against the
    independent value/gradient evaluation path.
    """

    def __init__(self, psi: SphereFunction, grid: SphereGrid | None = None):
        self.psi = psi
        self.grid = standard_grid(psi.l_max) if grid is None else grid
        val, grad, hess, e_th, e_ph = _frame_blocks(psi, self.grid.nodes)
        if not np.all(np.isfinite(np.exp(val))):
            raise DomainError("e^psi is not finite on the evaluation grid")
        self.values = val
        self.grad_frame = grad
        self.hess_frame = hess
        self._e_th = e_th
        self._e_ph = e_ph

    # -- cached-field accessors -------------------------------------------

    def cache_residual(self) -> float:
        """Sup distance between cached node data and fresh evaluation."""
        nodes = self.grid.nodes
        dv = np.max(np.abs(self.psi.evaluate(nodes) - self.values))
        fresh = self.psi.gradient(nodes)
        cached = (
            self.grad_frame[:, :1] * self._e_th + self.grad_frame[:, 1:] * self._e_ph
        )
        dg = np.max(np.linalg.norm(fresh - cached, axis=-1))
        return float(max(dv, dg))

    def mean_curvature_field(self) -> np.ndarray:
        """H at every grid node, from the cached frame data."""
        return _mean_from_blocks(self.values, self.grad_frame, self.hess_frame)

    def gauss_curvature_field(self) -> np.ndarray:
        """det of the Weingarten map at every grid node."""
        a = _shape_from_blocks(self.values, self.grad_frame, self.hess_frame)
        return np.linalg.det(a)

    # -- pointwise geometry -------------------------------------------------

    def embed(self, x: np.ndarray) -> np.ndarray:
        """iota(x) = e^{psi(x)} x for unit x (single point or batch)."""
        pts = np.asarray(x, dtype=float)
        radii = np.exp(self.psi.evaluate(pts))
        if pts.ndim == 1:
            return radii * pts
        return np.asarray(radii)[..., None] * pts

    def unit_normal(self, x: np.ndarray) -> np.ndarray:
        """Outward unit normal (x - grad psi)/sqrt(1 + |grad psi|^2)."""
        pts = np.asarray(x, dtype=float)
        g = self.psi.gradient(pts)
        raw = pts - g
        norms = np.sqrt(1.0 + np.sum(g * g, axis=-1))
        return raw / norms[..., None] if pts.ndim > 1 else raw / norms

    def frame(self, x: np.ndarray):
        """Orthonormal coordinate frame (e_theta, e_phi) at off-pole x."""
        _, _, _, e_th, e_ph = _frame_blocks(self.psi, x)
        if np.asarray(x).ndim == 1:
            return e_th[0], e_ph[0]
        return e_th, e_ph

    def shape_operator(self, x: np.ndarray) -> np.ndarray:
        """Weingarten map as a 2x2 matrix in the (e_theta, e_phi) frame.

        Convention d iota o A = dN; on the round sphere A is the identity,
        and the mean-curvature vector is -trace_g(A) N.
        """
        val, grad, hess, _, _ = _frame_blocks(self.psi, x)
        a = _shape_from_blocks(val, grad, hess)
        return a[0] if np.asarray(x).ndim == 1 else a

    def mean_curvature(self, x: np.ndarray) -> float | np.ndarray:
        """e^{-psi}(1+|grad|^2)^{-1/2}(-lap psi + 2 + Hess psi(grad,grad)/(1+|grad|^2))."""
        val, grad, hess, _, _ = _frame_blocks(self.psi, x)
        h = _mean_from_blocks(val, grad, hess)
        return float(h[0]) if np.asarray(x).ndim == 1 else h

    def induced_metric(self, x: np.ndarray) -> np.ndarray:
        """Frame matrix of g_psi = e^{2 psi}(can + dpsi (x) dpsi)."""
        val, grad, _, _, _ = _frame_blocks(self.psi, x)
        g = _metric_from_blocks(val, grad)
        return g[0] if np.asarray(x).ndim == 1 else g

    def gauss_curvature(self, x: np.ndarray) -> float | np.ndarray:
        """Gaussian curvature det A of the embedded surface."""
        a = self.shape_operator(np.asarray(x, dtype=float).reshape(-1, 3))
        k = np.linalg.det(a)
        return float(k[0]) if np.asarray(x).ndim == 1 else k

    # -- export -------------------------------------------------------------

    def export_curvature_csv(self, path: str) -> int:
        """Dump node-by-node curvature data; returns the number of rows."""
        nodes = self.grid.nodes
        theta = np.arccos(np.clip(nodes[:, 2], -1.0, 1.0))
        phi = np.mod(np.arctan2(nodes[:, 1], nodes[:, 0]), 2.0 * np.pi)
        mean = self.mean_curvature_field()
        gauss = self.gauss_curvature_field()
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["theta", "phi", "x", "y", "z", "psi", "mean_curvature", "gauss_curvature"]
            )
            for i in range(nodes.shape[0]):
                writer.writerow(
                    [
                        f"{theta[i]:.12e}",
                        f"{phi[i]:.12e}",
                        f"{nodes[i, 0]:.12e}",
                        f"{nodes[i, 1]:.12e}",
                        f"{nodes[i, 2]:.12e}",
                        f"{self.values[i]:.12e}",
                        f"{mean[i]:.12e}",
                        f"{gauss[i]:.12e}",
                    ]
                )
        return int(nodes.shape[0])


# ---------------------------------------------------------------------------
# functional entry points
# ---------------------------------------------------------------------------


def embed(s: StarShapedSurface, x: np.ndarray) -> np.ndarray:
    return s.embed(x)


def unit_normal(s: StarShapedSurface, x: np.ndarray) -> np.ndarray:
    return s.unit_normal(x)


def shape_operator(s: StarShapedSurface, x: np.ndarray) -> np.ndarray:
    return s.shape_operator(x)


def mean_curvature(s: StarShapedSurface, x: np.ndarray) -> float | np.ndarray:
    return s.mean_curvature(x)


def induced_metric(s: StarShapedSurface, x: np.ndarray) -> np.ndarray:
    return s.induced_metric(x)


# ---------------------------------------------------------------------------
# first variations at the round sphere
# ---------------------------------------------------------------------------


def first_variation_H(f: SphereFunction) -> SphereFunction:
    """d/dt at t=0 of the mean curvature of e^{t f} x, as -lap f - 2 f.

    Spectral: the degree-l band is scaled by l(l+1) - 2, so constants map
    to -2c and degree-1 harmonics are annihilated (first-order translations
    preserve the mean curvature).
    """
    return -1.0 * f.laplacian() - float(SPHERE_DIM) * f


def first_variation_shape(f: SphereFunction, x: np.ndarray) -> np.ndarray:
    """d/dt at t=0 of the Weingarten map of e^{t f} x: -Hess f - f Id."""
    val, _, hess, _, _ = _frame_blocks(f, x)
    mats = -hess - val[:, None, None] * np.eye(2)[None]
    return mats[0] if np.asarray(x).ndim == 1 else mats


# ---------------------------------------------------------------------------
# Hessian multiplicity diagnostic
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HessianProfile:
    """Eigenvalues of a covariant Hessian, clustered at a tolerance.

    On the 2-sphere a dominant cluster of multiplicity >= n - 1 = 1 always
    exists, so has_dominant_cluster is reported, never asserted; the
    diagnostic only bites for hypersurfaces of dimension >= 4.
    """

    eigenvalues: tuple[float, ...]
    cluster_values: tuple[float, ...]
    multiplicities: tuple[int, ...]
    tol: float

    @property
    def max_multiplicity(self) -> int:
        return max(self.multiplicities)

    @property
    def has_dominant_cluster(self) -> bool:
        return self.max_multiplicity >= SPHERE_DIM - 1


def hessian_multiplicity(f: SphereFunction, p: np.ndarray, tol: float = 1e-8) -> HessianProfile:
    """Eigenvalue multiplicity profile of Hess f at the off-pole point p.

    Sorted eigenvalues are greedily split wherever a gap exceeds tol; each
    cluster is reported by its mean value and its size, and the sizes sum
    to the sphere dimension.
    """
    if tol < 0.0:
        raise ConfigurationError("clustering tolerance must be nonnegative")
    _, _, hess, _, _ = _frame_blocks(f, np.asarray(p, dtype=float).reshape(1, 3))
    eig = np.linalg.eigvalsh(hess[0])
    clusters: list[list[float]] = [[float(eig[0])]]
    for lam in eig[1:]:
        if float(lam) - clusters[-1][-1] <= tol:
            clusters[-1].append(float(lam))
        else:
            clusters.append([float(lam)])
    return HessianProfile(
        eigenvalues=tuple(float(v) for v in eig),
        cluster_values=tuple(float(np.mean(c)) for c in clusters),
        multiplicities=tuple(len(c) for c in clusters),
        tol=float(tol),
    )
