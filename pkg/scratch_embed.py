import numpy as np

from zollforge.embedding import (
    HessianProfile,
    StarShapedSurface,
    first_variation_H,
    first_variation_shape,
    hessian_multiplicity,
)
from zollforge.sphere import OrthogonalTransform, SphereFunction, standard_grid

rng = np.random.default_rng(7)


def random_psi(l_max, scale, r):
    c = r.normal(size=(l_max + 1) ** 2) * scale
    return SphereFunction(c, l_max)


def random_points(n, r):
    v = r.normal(size=(n, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    # keep away from coordinate poles
    bad = np.hypot(v[:, 0], v[:, 1]) < 0.2
    v[bad] = np.array([0.6, 0.64, np.sqrt(1 - 0.6**2 - 0.64**2)])
    return v


# --- trivial cases ---------------------------------------------------------
zero = SphereFunction.zero(4)
s0 = StarShapedSurface(zero)
x = np.array([0.6, 0.48, 0.64])
print("psi=0 embed:", np.max(np.abs(s0.embed(x) - x)))
print("psi=0 normal:", np.max(np.abs(s0.unit_normal(x) - x)))
print("psi=0 A-Id:", np.max(np.abs(s0.shape_operator(x) - np.eye(2))))
print("psi=0 H-2:", abs(s0.mean_curvature(x) - 2.0))

c = np.log(2.0)
const = (c * np.sqrt(4 * np.pi)) * SphereFunction.harmonic(0, 0, l_max=4)
sc = StarShapedSurface(const)
print("psi=log2 embed:", np.max(np.abs(sc.embed(x) - 2 * x)))
print("psi=c A:", np.max(np.abs(sc.shape_operator(x) - np.exp(-c) * np.eye(2))))
print("psi=c H:", abs(sc.mean_curvature(x) - 2.0 * np.exp(-c)))

# --- cache consistency -----------------------------------------------------
psi = random_psi(8, 0.03, rng)
s = StarShapedSurface(psi)
print("cache residual:", s.cache_residual())

# --- FD Weingarten oracle --------------------------------------------------
pts = random_points(6, rng)
h = 1e-5
worst_a = 0.0
worst_n = 0.0
worst_g = 0.0
for p in pts:
    e1, e2 = s.frame(p)
    a = s.shape_operator(p)
    dN = np.empty((3, 2))
    dI = np.empty((3, 2))
    for j, e in enumerate((e1, e2)):
        pp = np.cos(h) * p + np.sin(h) * e
        pm = np.cos(h) * p - np.sin(h) * e
        dN[:, j] = (s.unit_normal(pp) - s.unit_normal(pm)) / (2 * h)
        dI[:, j] = (s.embed(pp) - s.embed(pm)) / (2 * h)
    a_fd, *_ = np.linalg.lstsq(dI, dN, rcond=None)
    worst_a = max(worst_a, np.max(np.abs(a_fd - a)) / np.max(np.abs(a)))
    # normal orthogonality to FD tangents
    worst_n = max(worst_n, np.max(np.abs(s.unit_normal(p) @ dI)))
    # FD induced metric
    g_fd = dI.T @ dI
    g = s.induced_metric(p)
    worst_g = max(worst_g, np.max(np.abs(g_fd - g)) / np.max(np.abs(g)))
print("FD Weingarten rel:", worst_a)
print("normal.tangent:", worst_n)
print("FD metric rel:", worst_g)
print("|N|-1:", abs(np.linalg.norm(s.unit_normal(pts[0])) - 1.0))

# --- trace vs closed formula ----------------------------------------------
a_all = s.shape_operator(pts)
tr = np.trace(a_all, axis1=1, axis2=2)
hc = s.mean_curvature(pts)
print("trace-vs-formula rel:", np.max(np.abs(tr - hc) / np.abs(hc)))

# --- g_psi self-adjointness -------------------------------------------------
g_all = s.induced_metric(pts)
ga = np.einsum("nij,njk->nik", g_all, a_all)
print("self-adjoint:", np.max(np.abs(ga - np.transpose(ga, (0, 2, 1)))))

# --- equivariance ------------------------------------------------------------
A = OrthogonalTransform.rotation(np.array([0.3, -0.5, 0.81]), 0.8341)
psiA = psi.rotate(A)  # psi o A
sA = StarShapedSurface(psiA)
hx = sA.mean_curvature(pts)
hAx = s.mean_curvature(pts @ A.matrix.T)
print("equivariance:", np.max(np.abs(hx - hAx)))

# --- first variation: Richardson FD -----------------------------------------
f = random_psi(6, 1.0, rng).odd_part()
var = first_variation_H(f)
pts2 = random_points(5, rng)
t = 2e-4
worst = 0.0
for p in pts2:
    def H_at(tt):
        return StarShapedSurface(tt * f).mean_curvature(p)
    d1 = (H_at(t) - 2.0) / t
    d2 = (H_at(t / 2) - 2.0) / (t / 2)
    rich = 2 * d2 - d1
    worst = max(worst, abs(rich - var.evaluate(p)) / max(1.0, abs(var.evaluate(p))))
print("first variation H rel:", worst)

const_f = (3.0 * np.sqrt(4 * np.pi)) * SphereFunction.harmonic(0, 0)
print("fvar const:", abs(first_variation_H(const_f).evaluate(x) + 2.0 * 3.0))
y1 = SphereFunction.harmonic(1, 0)
print("fvar Y1 norm:", first_variation_H(y1).norm())

# endomorphism variant: -Hess f - f I; check against FD of shape operator
p = pts2[0]
va = first_variation_shape(f, p)
def A_at(tt):
    return StarShapedSurface(tt * f).shape_operator(p)
d1 = (A_at(t) - np.eye(2)) / t
d2 = (A_at(t / 2) - np.eye(2)) / (t / 2)
rich = 2 * d2 - d1
print("first variation A rel:", np.max(np.abs(rich - va)) / np.max(np.abs(va)))

# --- Gauss consistency: det A vs Brioschi intrinsic curvature ---------------
def brioschi_K(surf, theta, phi, h):
    # coordinate metric components E,F,G of g_psi via embed on a stencil
    def X(th, ph):
        pt = np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
        return surf.embed(pt)

    def metric(th, ph):
        Xt = (X(th + h, ph) - X(th - h, ph)) / (2 * h)
        Xp = (X(th, ph + h) - X(th, ph - h)) / (2 * h)
        return np.array([Xt @ Xt, Xt @ Xp, Xp @ Xp])

    m0 = metric(theta, phi)
    E, F, G = m0
    Et = (metric(theta + h, phi)[0] - metric(theta - h, phi)[0]) / (2 * h)
    Ep = (metric(theta, phi + h)[0] - metric(theta, phi - h)[0]) / (2 * h)
    Ft = (metric(theta + h, phi)[1] - metric(theta - h, phi)[1]) / (2 * h)
    Fp = (metric(theta, phi + h)[1] - metric(theta, phi - h)[1]) / (2 * h)
    Gt = (metric(theta + h, phi)[2] - metric(theta - h, phi)[2]) / (2 * h)
    Gp = (metric(theta, phi + h)[2] - metric(theta, phi - h)[2]) / (2 * h)
    Epp = (metric(theta, phi + h)[0] - 2 * E + metric(theta, phi - h)[0]) / h**2
    Gtt = (metric(theta + h, phi)[2] - 2 * G + metric(theta - h, phi)[2]) / h**2
    Ftp = (
        metric(theta + h, phi + h)[1]
        - metric(theta + h, phi - h)[1]
        - metric(theta - h, phi + h)[1]
        + metric(theta - h, phi - h)[1]
    ) / (4 * h**2)
    M1 = np.array(
        [
            [-0.5 * Epp + Ftp - 0.5 * Gtt, 0.5 * Et, Ft - 0.5 * Ep],
            [Fp - 0.5 * Gt, E, F],
            [0.5 * Gp, F, G],
        ]
    )
    M2 = np.array([[0.0, 0.5 * Ep, 0.5 * Gt], [0.5 * Ep, E, F], [0.5 * Gt, F, G]])
    return (np.linalg.det(M1) - np.linalg.det(M2)) / (E * G - F * F) ** 2

worst_k = 0.0
for p in pts2[:3]:
    th = np.arccos(p[2])
    ph = np.arctan2(p[1], p[0])
    k_fd = brioschi_K(s, th, ph, 5e-4)
    k = s.gauss_curvature(p)
    worst_k = max(worst_k, abs(k_fd - k) / abs(k))
print("Gauss consistency rel:", worst_k)

# --- hessian multiplicity -----------------------------------------------------
prof = hessian_multiplicity(f, pts2[1], tol=1e-8)
print("profile:", prof.eigenvalues, prof.multiplicities, sum(prof.multiplicities))
# FD oracle for Hessian eigenvalues: geodesic second differences
p = pts2[1]
e1, e2 = s.frame(p)
hfd = 1e-4
def quad(v):
    gp = np.cos(hfd) * p + np.sin(hfd) * v
    gm = np.cos(hfd) * p - np.sin(hfd) * v
    return (f.evaluate(gp) - 2 * f.evaluate(p) + f.evaluate(gm)) / hfd**2
up = (e1 + e2) / np.sqrt(2.0)
um = (e1 - e2) / np.sqrt(2.0)
h_fd = np.array([[quad(e1), (quad(up) - quad(um)) / 2], [0, quad(e2)]])
h_fd[1, 0] = h_fd[0, 1]
eig_fd = np.linalg.eigvalsh(h_fd)
print("hess FD rel:", np.max(np.abs(eig_fd - prof.eigenvalues)) / np.max(np.abs(eig_fd)))

# degenerate profile: linear function has Hess = -f * can, double eigenvalue
lin = SphereFunction.harmonic(1, 1)
prof_lin = hessian_multiplicity(lin, p, tol=1e-10)
print("linear profile:", prof_lin.multiplicities, prof_lin.cluster_values, -lin.evaluate(p))

# CSV dump
n = s.export_curvature_csv("/tmp/curv.csv")
import csv as _csv
with open("/tmp/curv.csv") as fh:
    rows = list(_csv.reader(fh))
print("csv rows:", n, len(rows) - 1, rows[0][:4], rows[1][5][:8])
