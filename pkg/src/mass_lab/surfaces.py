"""Embedded surface geometry: fundamental forms, curvatures, meshes.

Surfaces are parametrized by (theta, phi) with theta in [0, pi] the polar
angle measured from the x1-axis (the axis all our harmonic functions are
asymptotic to) and phi the azimuth.  Revolution surfaces have profile
(z(theta), rho(theta)) rotated about the x1-axis.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, MeshError, SingularityError
from .metrics import FlatMetric, geometry_at

_POLE_OFFSET = 1e-6


def _fd1(f, t, h=1e-5):
    return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)


def _fd2(f, t, h=1e-4):
    return (-f(t - 2 * h) + 16 * f(t - h) - 30 * f(t) + 16 * f(t + h)
            - f(t + 2 * h)) / (12 * h**2)


class SurfaceModel:
    kind = "abstract"

    def point(self, theta, phi):
        raise NotImplementedError

    def d1(self, theta, phi):
        """(2, 3) array of first parameter derivatives (theta, phi rows)."""
        raise NotImplementedError

    def d2(self, theta, phi):
        """(2, 2, 3) array of second parameter derivatives."""
        raise NotImplementedError

    def scaled(self, factor):
        return ScaledSurface(self, factor)


class RevolutionSurface(SurfaceModel):
    """Profile (z(theta), rho(theta)) rotated about the x1-axis."""

    kind = "revolution"

    def __init__(self, rho, z, drho=None, dz=None, d2rho=None, d2z=None):
        self.rho = rho
        self.z = z
        self.drho = drho if drho is not None else (lambda t: _fd1(rho, t))
        self.dz = dz if dz is not None else (lambda t: _fd1(z, t))
        self.d2rho = d2rho if d2rho is not None else (lambda t: _fd2(rho, t))
        self.d2z = d2z if d2z is not None else (lambda t: _fd2(z, t))

    def point(self, theta, phi):
        return np.array([self.z(theta),
                         self.rho(theta) * np.cos(phi),
                         self.rho(theta) * np.sin(phi)])

    def d1(self, theta, phi):
        c, s = np.cos(phi), np.sin(phi)
        rho, drho, dz = self.rho(theta), self.drho(theta), self.dz(theta)
        return np.array([[dz, drho * c, drho * s],
                         [0.0, -rho * s, rho * c]])

    def d2(self, theta, phi):
        c, s = np.cos(phi), np.sin(phi)
        rho, drho = self.rho(theta), self.drho(theta)
        d2rho, d2z = self.d2rho(theta), self.d2z(theta)
        out = np.empty((2, 2, 3))
        out[0, 0] = [d2z, d2rho * c, d2rho * s]
        out[0, 1] = out[1, 0] = [0.0, -drho * s, drho * c]
        out[1, 1] = [0.0, -rho * c, -rho * s]
        return out


class CoordinateSphere(RevolutionSurface):
    kind = "coordinate-sphere"

    def __init__(self, radius):
        self.radius = float(radius)
        r = self.radius
        super().__init__(
            rho=lambda t: r * np.sin(t), z=lambda t: r * np.cos(t),
            drho=lambda t: r * np.cos(t), dz=lambda t: -r * np.sin(t),
            d2rho=lambda t: -r * np.sin(t), d2z=lambda t: -r * np.cos(t))


class Ellipsoid(RevolutionSurface):
    """Semi-axes (a, a, c) with c along the revolution (x1) axis."""

    kind = "ellipsoid"

    def __init__(self, a, c):
        self.a, self.c = float(a), float(c)
        a_, c_ = self.a, self.c
        super().__init__(
            rho=lambda t: a_ * np.sin(t), z=lambda t: c_ * np.cos(t),
            drho=lambda t: a_ * np.cos(t), dz=lambda t: -c_ * np.sin(t),
            d2rho=lambda t: -a_ * np.sin(t), d2z=lambda t: -c_ * np.cos(t))


class ScaledSurface(SurfaceModel):
    kind = "scaled"

    def __init__(self, base, factor):
        if factor <= 0:
            raise ArgumentError("scale factor must be positive")
        self.base = base
        self.factor = float(factor)

    def point(self, theta, phi):
        return self.factor * self.base.point(theta, phi)

    def d1(self, theta, phi):
        return self.factor * self.base.d1(theta, phi)

    def d2(self, theta, phi):
        return self.factor * self.base.d2(theta, phi)


# ---------------------------------------------------------------------------
# fundamental forms
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FundamentalForms:
    sigma: np.ndarray       # first fundamental form (2, 2)
    second: np.ndarray      # second fundamental form w.r.t. ``normal`` (2, 2)
    H: float                # mean curvature, trace convention sphere -> 2/r
    K: float                # intrinsic Gauss curvature (Gauss equation)
    kappa: tuple            # principal curvatures (sorted)
    normal: np.ndarray      # unit normal components n^i
    point: np.ndarray


def _riemann_from_ricci(g, ricci, R):
    """3-D Riemann tensor R_ijkl reconstructed from the Ricci tensor."""
    term = (np.einsum("ik,jl->ijkl", g, ricci) + np.einsum("jl,ik->ijkl", g, ricci)
            - np.einsum("il,jk->ijkl", g, ricci) - np.einsum("jk,il->ijkl", g, ricci))
    gg = np.einsum("ik,jl->ijkl", g, g) - np.einsum("il,jk->ijkl", g, g)
    return term - 0.5 * R * gg


def fundamental_forms(surface, metric, node, side=None, outward_from=None):
    """First/second forms, H, K and principal curvatures at a parameter node.

    The unit normal is oriented away from ``outward_from`` (default: the
    origin), which for our star-shaped catalog is the infinity-pointing
    normal on the exterior side and the outward normal of the fill-in.
    """
    theta, phi = node
    if theta < _POLE_OFFSET:
        theta = _POLE_OFFSET
    elif theta > np.pi - _POLE_OFFSET:
        theta = np.pi - _POLE_OFFSET

    x = surface.point(theta, phi)
    E = surface.d1(theta, phi)          # (2, 3)
    D2 = surface.d2(theta, phi)         # (2, 2, 3)
    sample = geometry_at(metric, x, side)
    g = metric.components(x, side)

    sigma = np.einsum("ai,ij,bj->ab", E, g, E)
    if np.linalg.det(sigma) <= 0:
        raise SingularityError(f"degenerate parametrization at node {node}")

    # normal: metric-orthogonal to both tangents, unit, outward
    cov = np.cross(E[0], E[1])          # covector up to scale
    n = np.linalg.solve(g, cov)
    n = n / np.sqrt(n @ g @ n)
    center = np.zeros(3) if outward_from is None else np.asarray(outward_from)
    if np.dot(n, x - center) < 0:
        n = -n

    n_low = g @ n
    second = -np.einsum("k,abk->ab", n_low,
                        D2 + np.einsum("kij,ai,bj->abk",
                                       sample.christoffel, E, E))

    sigma_inv = np.linalg.inv(sigma)
    shape_op = sigma_inv @ second
    H = float(np.trace(shape_op))
    kappa = tuple(sorted(np.linalg.eigvals(shape_op).real))

    # intrinsic K via the Gauss equation: K = sec_ambient(T Sigma) + det II/det sigma
    riem = _riemann_from_ricci(g, sample.ricci, sample.R)
    e1 = E[0] / np.sqrt(sigma[0, 0])
    v = E[1] - (E[1] @ g @ e1) * e1
    e2 = v / np.sqrt(v @ g @ v)
    sec = float(np.einsum("ijkl,i,j,k,l->", riem, e1, e2, e1, e2))
    K = sec + float(np.linalg.det(second) / np.linalg.det(sigma))

    return FundamentalForms(sigma=sigma, second=second, H=H, K=K, kappa=kappa,
                            normal=n, point=x)


def area_element(surface, metric, node, side=None):
    theta, phi = node
    x = surface.point(theta, phi)
    E = surface.d1(theta, phi)
    g = metric.components(x, side)
    sigma = np.einsum("ai,ij,bj->ab", E, g, E)
    return float(np.sqrt(np.linalg.det(sigma)))


def principal_bounds(family, r, k1=None, k2=None, n_theta=256, n_phi=4):
    """Extremal principal curvatures of the rescaled surface (1/r) Sigma_r
    in the flat background, and whether 0 < k1 < kappa < k2 holds."""
    surface = family(r) if callable(family) else family
    rescaled = surface.scaled(1.0 / r)
    flat = FlatMetric()
    kmin, kmax = np.inf, -np.inf
    thetas = np.linspace(_POLE_OFFSET, np.pi - _POLE_OFFSET, n_theta)
    phis = np.linspace(0.0, 2 * np.pi, n_phi, endpoint=False)
    for th in thetas:
        for ph in phis:
            ff = fundamental_forms(rescaled, flat, (th, ph))
            kmin = min(kmin, ff.kappa[0])
            kmax = max(kmax, ff.kappa[1])
    satisfies = None
    if k1 is not None and k2 is not None:
        satisfies = bool(0.0 < k1 < kmin and kmax < k2)
    else:
        satisfies = bool(kmin > 0.0)
    return float(kmin), float(kmax), satisfies


# ---------------------------------------------------------------------------
# meshes and Euler characteristics
# ---------------------------------------------------------------------------


@dataclass
class LevelSetMesh:
    vertices: np.ndarray    # (V, 3)
    faces: np.ndarray       # (F, 3) int triangles

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_faces(self):
        return len(self.faces)

    def edges(self):
        e = np.vstack([self.faces[:, [0, 1]], self.faces[:, [1, 2]],
                       self.faces[:, [2, 0]]])
        e.sort(axis=1)
        return np.unique(e, axis=0)

    def boundary_loop_count(self):
        e = np.vstack([self.faces[:, [0, 1]], self.faces[:, [1, 2]],
                       self.faces[:, [2, 0]]])
        e.sort(axis=1)
        uniq, counts = np.unique(e, axis=0, return_counts=True)
        boundary = uniq[counts == 1]
        if len(boundary) == 0:
            return 0
        # count connected components of the boundary edge graph
        parent = {}

        def find(a):
            while parent.get(a, a) != a:
                parent[a] = parent.get(parent[a], parent[a])
                a = parent[a]
            return a

        for a, b in boundary:
            parent.setdefault(a, a)
            parent.setdefault(b, b)
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
        return len({find(v) for v in parent})


def euler_characteristic(mesh):
    """V - E + F of a triangulated surface; rejects non-manifold edges."""
    faces = np.asarray(mesh.faces)
    e = np.vstack([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    e.sort(axis=1)
    uniq, counts = np.unique(e, axis=0, return_counts=True)
    if np.any(counts > 2):
        raise MeshError("non-manifold edge (bounds more than 2 faces)")
    V = mesh.n_vertices
    return int(V - len(uniq) + mesh.n_faces)


def icosphere(subdivisions=2):
    """Triangulated sphere from a subdivided icosahedron."""
    t = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
        [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
        [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1]], dtype=float)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [(0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
             (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
             (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
             (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1)]
    verts = list(verts)
    for _ in range(subdivisions):
        cache = {}

        def midpoint(i, j):
            key = (min(i, j), max(i, j))
            if key not in cache:
                m = verts[i] + verts[j]
                verts.append(m / np.linalg.norm(m))
                cache[key] = len(verts) - 1
            return cache[key]

        new_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            new_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = new_faces
    return LevelSetMesh(vertices=np.array(verts), faces=np.array(faces))


def torus_mesh(n_u=24, n_v=12, R=2.0, a=0.5):
    us = 2 * np.pi * np.arange(n_u) / n_u
    vs = 2 * np.pi * np.arange(n_v) / n_v
    verts, faces = [], []
    for i, u in enumerate(us):
        for j, v in enumerate(vs):
            verts.append([(R + a * np.cos(v)) * np.cos(u),
                          (R + a * np.cos(v)) * np.sin(u),
                          a * np.sin(v)])
    idx = lambda i, j: (i % n_u) * n_v + (j % n_v)
    for i in range(n_u):
        for j in range(n_v):
            faces.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
            faces.append((idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)))
    return LevelSetMesh(vertices=np.array(verts), faces=np.array(faces))


def annulus_mesh(r_in=1.0, r_out=3.0, n_r=6, n_t=32):
    """Flat annulus (disk with a hole): chi = 0, two boundary loops."""
    verts, faces = [], []
    radii = np.linspace(r_in, r_out, n_r)
    for i, r in enumerate(radii):
        for j in range(n_t):
            t = 2 * np.pi * j / n_t
            verts.append([r * np.cos(t), r * np.sin(t), 0.0])
    idx = lambda i, j: i * n_t + (j % n_t)
    for i in range(n_r - 1):
        for j in range(n_t):
            faces.append((idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)))
            faces.append((idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)))
    return LevelSetMesh(vertices=np.array(verts), faces=np.array(faces))


def gauss_bonnet_check(surface, metric, n_theta=64, n_phi=64, side=None):
    """(1/2 pi) * integral of K dA over a closed parametrized surface."""
    nodes, wts = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(nodes)
    phis = 2 * np.pi * np.arange(n_phi) / n_phi
    total = 0.0
    for th, w in zip(thetas, wts):
        for ph in phis:
            ff = fundamental_forms(surface, metric, (th, ph), side)
            dA = np.sqrt(np.linalg.det(ff.sigma)) / np.sin(th)
            total += ff.K * dA * w * (2 * np.pi / n_phi)
    return total / (2 * np.pi)
