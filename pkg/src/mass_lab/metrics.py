"""Analytic 3-metric families: components, curvature, ADM mass, decay diagnostics.

All metrics are Riemannian and live on (subsets of) R^3 in Cartesian
coordinates x = (x1, x2, x3).  Conformally flat models g = phi^4 delta carry
analytic first and second derivatives; anything else falls back on scale-aware
central finite differences.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import ArgumentError, DomainError

_DELTA = np.eye(3)


def _fd_step(x):
    return max(1e-4, 1e-4 * float(np.linalg.norm(x)))


@dataclass(frozen=True)
class CurvatureSample:
    point: np.ndarray
    R: float
    ricci: np.ndarray          # symmetric (3, 3)
    christoffel: np.ndarray    # (3, 3, 3), [k, i, j] = Gamma^k_ij


class MetricModel:
    """Base class.  Subclasses implement ``components`` and, when cheap,
    analytic coordinate derivatives."""

    kind = "abstract"
    tau = 1.0
    spherically_symmetric = False
    is_conformally_flat = False

    def components(self, x, side=None):
        raise NotImplementedError

    def check_point(self, x):
        """Raise DomainError if x is outside the chart."""

    def d_components(self, x, side=None):
        """d[k, i, j] = partial_k g_ij, central differences by default."""
        h = _fd_step(x)
        d = np.empty((3, 3, 3))
        for k in range(3):
            e = np.zeros(3)
            e[k] = h
            d[k] = (self.components(x + e, side) - self.components(x - e, side)) / (2 * h)
        return d

    def dd_components(self, x, side=None):
        """dd[l, k, i, j] = partial_l partial_k g_ij."""
        h = _fd_step(x)
        dd = np.empty((3, 3, 3, 3))
        g0 = self.components(x, side)
        for l in range(3):
            el = np.zeros(3)
            el[l] = h
            for k in range(l, 3):
                ek = np.zeros(3)
                ek[k] = h
                if k == l:
                    val = (self.components(x + el, side) - 2 * g0
                           + self.components(x - el, side)) / h**2
                else:
                    val = (self.components(x + el + ek, side)
                           - self.components(x + el - ek, side)
                           - self.components(x - el + ek, side)
                           + self.components(x - el - ek, side)) / (4 * h**2)
                dd[l, k] = val
                dd[k, l] = val
        return dd

    # -- convenience ---------------------------------------------------

    def inverse(self, x, side=None):
        return np.linalg.inv(self.components(x, side))

    def sqrt_det(self, x, side=None):
        return float(np.sqrt(np.linalg.det(self.components(x, side))))

    def christoffel(self, x, side=None):
        return christoffel_from(self.d_components(x, side), self.inverse(x, side))


def christoffel_from(dg, g_inv):
    """Gamma^k_ij from dg[k,i,j] = partial_k g_ij and the inverse metric."""
    # S[i, j, l] = d_i g_jl + d_j g_il - d_l g_ij
    sym = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    return 0.5 * np.einsum("kl,ijl->kij", g_inv, sym)


def geometry_at(metric, point, side=None):
    """Christoffels, Ricci and scalar curvature at a point."""
    x = np.asarray(point, dtype=float)
    metric.check_point(x)
    g = metric.components(x, side)
    g_inv = np.linalg.inv(g)
    dg = metric.d_components(x, side)
    ddg = metric.dd_components(x, side)

    gamma = christoffel_from(dg, g_inv)

    # partial_m g^{kl} = -g^{ka} (partial_m g_ab) g^{bl}
    dg_inv = -np.einsum("ka,mab,bl->mkl", g_inv, dg, g_inv)
    # S[i, j, l] and its coordinate derivative T[m, i, j, l]
    sym = dg + dg.transpose(1, 0, 2) - dg.transpose(1, 2, 0)
    dsym = ddg + ddg.transpose(0, 2, 1, 3) - ddg.transpose(0, 2, 3, 1)
    dgamma = 0.5 * (np.einsum("mkl,ijl->mkij", dg_inv, sym)
                    + np.einsum("kl,mijl->mkij", g_inv, dsym))

    # R_ij = d_k Gamma^k_ij - d_j Gamma^k_ik + Gamma^k_kl Gamma^l_ij
    #        - Gamma^k_jl Gamma^l_ik
    ricci = (np.einsum("kkij->ij", dgamma)
             - np.einsum("jkik->ij", dgamma)
             + np.einsum("kkl,lij->ij", gamma, gamma)
             - np.einsum("kjl,lik->ij", gamma, gamma))
    ricci = 0.5 * (ricci + ricci.T)
    R = float(np.einsum("ij,ij->", g_inv, ricci))
    return CurvatureSample(point=x, R=R, ricci=ricci, christoffel=gamma)


# ---------------------------------------------------------------------------
# concrete families
# ---------------------------------------------------------------------------


class FlatMetric(MetricModel):
    kind = "flat"
    tau = 1.0
    spherically_symmetric = True
    is_conformally_flat = True

    def components(self, x, side=None):
        return _DELTA.copy()

    def d_components(self, x, side=None):
        return np.zeros((3, 3, 3))

    def dd_components(self, x, side=None):
        return np.zeros((3, 3, 3, 3))

    # radial picture: g = A dr^2 + B r^2 dOmega^2 with A = B = 1
    def radial_AB(self, r):
        return 1.0, 1.0

    def conformal_phi(self, r):
        """phi, phi', phi'' of the conformal factor (g = phi^4 delta)."""
        r = np.asarray(r, dtype=float)
        return np.ones_like(r), np.zeros_like(r), np.zeros_like(r)

    def flat_laplacian_phi(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))


class RadialConformalMetric(MetricModel):
    """g = phi(r)^4 delta for a radial conformal factor with two derivatives."""

    kind = "conformally-flat"
    spherically_symmetric = True
    is_conformally_flat = True

    def __init__(self, phi, dphi, d2phi, tau=1.0, r_min=0.0):
        self._phi = phi
        self._dphi = dphi
        self._d2phi = d2phi
        self.tau = tau
        self.r_min = r_min

    def check_point(self, x):
        # boundary traces at r = r_min are allowed (minimal-sphere gluing)
        r = float(np.linalg.norm(x))
        if r < self.r_min * (1.0 - 1e-12):
            raise DomainError(f"r = {r:g} < chart limit {self.r_min:g}")

    def conformal_phi(self, r):
        r = np.asarray(r, dtype=float)
        return self._phi(r), self._dphi(r), self._d2phi(r)

    def flat_laplacian_phi(self, r):
        r = np.asarray(r, dtype=float)
        return self._d2phi(r) + 2.0 * self._dphi(r) / r

    def radial_AB(self, r):
        p = self._phi(np.asarray(r, dtype=float)) ** 4
        return p, p

    def components(self, x, side=None):
        r = np.linalg.norm(x)
        return self._phi(r) ** 4 * _DELTA

    def d_components(self, x, side=None):
        r = np.linalg.norm(x)
        p, dp = self._phi(r), self._dphi(r)
        grad = 4.0 * p**3 * dp * x / r
        return np.einsum("k,ij->kij", grad, _DELTA)

    def dd_components(self, x, side=None):
        r = np.linalg.norm(x)
        p, dp, d2p = self._phi(r), self._dphi(r), self._d2phi(r)
        n = x / r
        # hessian of phi(r): phi'' n n + phi'/r (delta - n n)
        hess_phi = d2p * np.outer(n, n) + dp / r * (_DELTA - np.outer(n, n))
        grad_phi = dp * n
        h4 = (12.0 * p**2 * np.outer(grad_phi, grad_phi) + 4.0 * p**3 * hess_phi)
        return np.einsum("lk,ij->lkij", h4, _DELTA)

    def scalar_curvature_conformal(self, r):
        """R = -8 phi^-5 Delta_flat phi, the conformal transformation law."""
        p = self._phi(np.asarray(r, dtype=float))
        return -8.0 * p ** (-5) * self.flat_laplacian_phi(r)


class SchwarzschildIsotropic(RadialConformalMetric):
    """Schwarzschild time-symmetric slice, g = (1 + m/2r)^4 delta, r > m/2."""

    kind = "schwarzschild-isotropic"

    def __init__(self, mass):
        self.mass = float(mass)
        m = self.mass
        super().__init__(
            phi=lambda r: 1.0 + 0.5 * m / r,
            dphi=lambda r: -0.5 * m / r**2,
            d2phi=lambda r: m / r**3,
            tau=1.0,
            r_min=0.5 * m,
        )


class ConformallyFlatMetric(MetricModel):
    """g = phi(x)^4 delta for a general scalar field with two derivatives."""

    kind = "conformally-flat"
    is_conformally_flat = True

    def __init__(self, phi, grad_phi, hess_phi, tau=1.0):
        self.phi = phi
        self.grad_phi = grad_phi
        self.hess_phi = hess_phi
        self.tau = tau

    def components(self, x, side=None):
        return self.phi(x) ** 4 * _DELTA

    def d_components(self, x, side=None):
        grad = 4.0 * self.phi(x) ** 3 * np.asarray(self.grad_phi(x))
        return np.einsum("k,ij->kij", grad, _DELTA)

    def dd_components(self, x, side=None):
        p = self.phi(x)
        gp = np.asarray(self.grad_phi(x))
        hp = np.asarray(self.hess_phi(x))
        h4 = 12.0 * p**2 * np.outer(gp, gp) + 4.0 * p**3 * hp
        return np.einsum("lk,ij->lkij", h4, _DELTA)

    def scalar_curvature_conformal(self, x):
        p = self.phi(x)
        lap = float(np.trace(np.asarray(self.hess_phi(x))))
        return -8.0 * p ** (-5) * lap


class SphericallySymmetricMetric(MetricModel):
    """g = A(r) dr^2 + B(r) r^2 dOmega^2 expressed in Cartesian coordinates."""

    kind = "spherically-symmetric"
    spherically_symmetric = True

    def __init__(self, A, B, tau=1.0, r_min=0.0):
        self.A = A
        self.B = B
        self.tau = tau
        self.r_min = r_min

    def check_point(self, x):
        r = float(np.linalg.norm(x))
        if r <= self.r_min:
            raise DomainError(f"r = {r:g} <= chart limit {self.r_min:g}")

    def radial_AB(self, r):
        return self.A(r), self.B(r)

    def components(self, x, side=None):
        r = np.linalg.norm(x)
        n = x / r
        return self.B(r) * _DELTA + (self.A(r) - self.B(r)) * np.outer(n, n)


class GluedMetric(MetricModel):
    """Exterior metric outside a coordinate sphere r0 glued to a fill-in ball.

    Two charts: exterior points are Cartesian x with |x| >= r0 in the exterior
    metric; fill-in points are Cartesian xbar with |xbar| <= rho_bar in the
    fill-in metric.  ``side`` in {"exterior", "fillin"} selects the chart
    (mandatory on the interface).  The collar picture uses the Gaussian normal
    coordinate t (t > 0 towards infinity) in which both sides read
    dt^2 + rho(t)^2 dOmega^2.
    """

    kind = "glued"

    def __init__(self, exterior, fillin, interface_radius):
        if not exterior.spherically_symmetric:
            raise ArgumentError("glued metrics need a spherically symmetric exterior")
        if not fillin.spherically_symmetric:
            raise ArgumentError("glued metrics need a spherically symmetric fill-in")
        self.exterior = exterior
        self.fillin = fillin
        self.r0 = float(interface_radius)
        self.tau = exterior.tau
        # area radius of the interface sphere seen from outside
        _, B = exterior.radial_AB(self.r0)
        self.rho = float(np.sqrt(B) * self.r0)
        # fill-in chart radius with the same area radius (flat fill-in: equal)
        _, Bf = fillin.radial_AB(self.rho)
        if abs(np.sqrt(Bf) * self.rho - self.rho) > 1e-12 * self.rho:
            raise ArgumentError("fill-in does not induce the interface metric "
                                "at radius rho; only isometric fill-ins are supported")
        self.rho_bar = self.rho

    def _resolve(self, x, side):
        r = float(np.linalg.norm(x))
        if side is None:
            if abs(r - self.r0) < 1e-13 * max(1.0, self.r0):
                raise DomainError("point on the glued interface needs a side flag")
            side = "exterior" if r > self.r0 else "fillin"
        return side

    def components(self, x, side=None):
        side = self._resolve(x, side)
        base = self.exterior if side == "exterior" else self.fillin
        return base.components(x)

    def d_components(self, x, side=None):
        side = self._resolve(x, side)
        base = self.exterior if side == "exterior" else self.fillin
        return base.d_components(x)

    def dd_components(self, x, side=None):
        side = self._resolve(x, side)
        base = self.exterior if side == "exterior" else self.fillin
        return base.dd_components(x)

    # -- collar picture -------------------------------------------------

    def collar_radius(self, t):
        """rho(t): area radius along the unit-speed normal geodesic, t=0 on
        the interface, t > 0 in the exterior."""
        t = float(t)
        if t >= 0.0:
            r = self._exterior_r_of_t(t)
            _, B = self.exterior.radial_AB(r)
            return float(np.sqrt(B) * r)
        rbar = self._fillin_r_of_t(t)
        _, B = self.fillin.radial_AB(rbar)
        return float(np.sqrt(B) * rbar)

    def _exterior_r_of_t(self, t):
        A = lambda r: self.exterior.radial_AB(r)[0]
        sol = solve_ivp(lambda s, r: 1.0 / np.sqrt(A(r[0])), (0.0, t),
                        [self.r0], rtol=1e-12, atol=1e-14, dense_output=True)
        return float(sol.y[0, -1])

    def _fillin_r_of_t(self, t):
        A = lambda r: self.fillin.radial_AB(r)[0]
        sol = solve_ivp(lambda s, r: 1.0 / np.sqrt(A(r[0])), (0.0, t),
                        [self.rho_bar], rtol=1e-12, atol=1e-14, dense_output=True)
        return float(sol.y[0, -1])

    def collar_components(self, t, theta=0.0):
        """Metric components in collar coordinates (t, theta, varphi)."""
        rho = self.collar_radius(t)
        return np.diag([1.0, rho**2, rho**2 * np.sin(theta) ** 2])


# ---------------------------------------------------------------------------
# ADM mass and decay
# ---------------------------------------------------------------------------


def sphere_grid(n_theta=64, n_phi=128):
    """Gauss-Legendre x trapezoid product grid on the unit sphere.

    Returns (theta, phi, weights) with sum(w) = 4*pi for the flat round
    measure; theta/phi are 1-D, weights is (n_theta, n_phi).
    """
    nodes, wts = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(nodes)            # cos(theta) in (-1, 1)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    w = np.outer(wts, np.full(n_phi, 2.0 * np.pi / n_phi))
    return theta, phi, w


def _adm_surface_integral(metric, radius, n_theta=64, n_phi=128):
    theta, phi, w = sphere_grid(n_theta, n_phi)
    total = 0.0
    for it, th in enumerate(theta):
        for ip, ph in enumerate(phi):
            n = np.array([np.cos(th),
                          np.sin(th) * np.cos(ph),
                          np.sin(th) * np.sin(ph)])
            x = radius * n
            dg = metric.d_components(x)
            integrand = float(np.einsum("iij->j", dg) @ n
                              - np.einsum("jii->j", dg) @ n)
            total += integrand * w[it, ip]
    return total * radius**2 / (16.0 * np.pi)


def richardson(values, ratios, order=1):
    """One stage of Richardson extrapolation assuming error ~ ratio^-order.

    ``values[i]`` computed at scale ``ratios[i]`` with ratios increasing.
    Applies repeated elimination of successive integer orders starting at
    ``order``.
    """
    vals = list(values)
    r = list(ratios)
    p = order
    while len(vals) > 1:
        new = []
        for i in range(len(vals) - 1):
            f = (r[i + 1] / r[i]) ** p
            new.append((f * vals[i + 1] - vals[i]) / (f - 1.0))
        vals = new
        r = r[:-1]
        p += 1
    return vals[0]


def adm_mass(metric, radius, method="surface-integral", extrapolate=False,
             n_theta=64, n_phi=128, extrap_order=1):
    """ADM mass estimate from a coordinate sphere of the given radius."""
    if radius <= 0:
        raise DomainError("radius must be positive")
    metric.check_point(np.array([radius, 0.0, 0.0]))
    if method == "conformal-flux":
        if not metric.is_conformally_flat:
            raise ArgumentError("conformal-flux needs a conformally flat metric")
        if hasattr(metric, "conformal_phi"):
            _, dp, _ = metric.conformal_phi(radius)
            return float(-2.0 * radius**2 * dp)
        theta, phi, w = sphere_grid(n_theta, n_phi)
        total = 0.0
        for it, th in enumerate(theta):
            for ip, ph in enumerate(phi):
                n = np.array([np.cos(th),
                              np.sin(th) * np.cos(ph),
                              np.sin(th) * np.sin(ph)])
                x = radius * n
                total += float(np.asarray(metric.grad_phi(x)) @ n) * w[it, ip]
        return float(-total * radius**2 / (2.0 * np.pi))
    if method != "surface-integral":
        raise ArgumentError(f"unknown ADM method {method!r}")
    if not extrapolate:
        return _adm_surface_integral(metric, radius, n_theta, n_phi)
    radii = [radius, 2.0 * radius, 4.0 * radius]
    vals = [_adm_surface_integral(metric, r, n_theta, n_phi) for r in radii]
    return float(richardson(vals, radii, order=extrap_order))


_EXACT = "exact"


def decay_report(metric, radii, n_samples=200, seed=7):
    """Log-log fit of sup |g - delta|, |dg|, |ddg| over coordinate spheres."""
    radii = list(radii)
    if len(radii) < 3:
        raise ArgumentError("need at least 3 radii for a decay fit")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ArgumentError("radii must be increasing")
    rng = np.random.default_rng(seed)
    dirs = rng.normal(size=(n_samples, 3))
    dirs /= np.linalg.norm(dirs, axis=1)[:, None]

    sup_g, sup_dg, sup_ddg, sup_R = [], [], [], []
    for r in radii:
        m0 = m1 = m2 = mr = 0.0
        for n in dirs:
            x = r * n
            m0 = max(m0, float(np.max(np.abs(metric.components(x) - _DELTA))))
            m1 = max(m1, float(np.max(np.abs(metric.d_components(x)))))
            m2 = max(m2, float(np.max(np.abs(metric.dd_components(x)))))
            mr = max(mr, abs(geometry_at(metric, x).R))
        sup_g.append(m0)
        sup_dg.append(m1)
        sup_ddg.append(m2)
        sup_R.append(mr)

    def fit(sups):
        if max(sups) < 1e-14:
            return _EXACT
        logs = np.log(np.maximum(sups, 1e-300))
        slope = np.polyfit(np.log(radii), logs, 1)[0]
        return float(-slope)

    tau_g = fit(sup_g)
    tau_R = fit(sup_R)
    integrable = True if tau_R == _EXACT else tau_R > 3.0
    return {
        "tau_g": tau_g,
        "tau_dg": fit(sup_dg),
        "tau_ddg": fit(sup_ddg),
        "tau_R": tau_R,
        "scalar_curvature_integrable": integrable,
        "tau_exceeds_half": True if tau_g == _EXACT else tau_g > 0.5,
        "sup_g": sup_g,
        "radii": radii,
    }


# ---------------------------------------------------------------------------
# vector fields (for the positivity conditions)
# ---------------------------------------------------------------------------


class VectorFieldModel:
    """Vector field X^i(x) with a declared decay order at infinity."""

    def __init__(self, components, decay_order=0.0):
        self._components = components
        self.decay_order = float(decay_order)

    def __call__(self, x):
        return np.asarray(self._components(np.asarray(x, dtype=float)), dtype=float)

    def norm(self, metric, x, side=None):
        X = self(x)
        g = metric.components(np.asarray(x, dtype=float), side)
        return float(np.sqrt(X @ g @ X))

    def divergence(self, metric, x, side=None):
        """div X = (1/sqrt g) d_i (sqrt g X^i), central differences."""
        x = np.asarray(x, dtype=float)
        h = _fd_step(x)
        total = 0.0
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            fp = metric.sqrt_det(x + e, side) * self(x + e)[i]
            fm = metric.sqrt_det(x - e, side) * self(x - e)[i]
            total += (fp - fm) / (2 * h)
        return float(total / metric.sqrt_det(x, side))

    def decay_consistent(self, radii, tol=0.3, n_samples=64, seed=3):
        """Check the fitted decay exponent against the declared order."""
        rng = np.random.default_rng(seed)
        dirs = rng.normal(size=(n_samples, 3))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        sups = []
        for r in radii:
            sups.append(max(float(np.linalg.norm(self(r * n))) for n in dirs))
        if max(sups) < 1e-14:
            return True
        slope = -np.polyfit(np.log(radii), np.log(np.maximum(sups, 1e-300)), 1)[0]
        return slope >= self.decay_order - tol
