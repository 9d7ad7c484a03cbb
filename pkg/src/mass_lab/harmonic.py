"""Laplace solvers on spherically symmetric backgrounds plus diagnostics.

Separated-variable solves write u as a sum of modes F(r)*cos(theta) (l = 1,
theta measured from the x1-axis) and F(r) (l = 0).  For a conformally flat
metric g = phi^4 delta the substitution v = phi*f turns the g-Laplacian into
the flat one up to a potential (Delta_flat phi / phi); when phi is flat-
harmonic (flat space, Schwarzschild in isotropic coordinates) the modes are
closed forms and the solves are exact.  Otherwise a collocation BVP is solved
on [r0, 1000*r0] with a two-term asymptotic closure at the far end.

A small uniform-grid finite-difference path (grid3d) covers the same flat
problems as an independent cross-check at much lower accuracy.
"""

from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.integrate import quad, solve_bvp
from scipy import ndimage, sparse
from scipy.sparse.linalg import cg, bicgstab

from .errors import (ArgumentError, CapabilityError, DegeneracyError,
                     DomainError, SolverError)
from .metrics import FlatMetric, GluedMetric

RMAX_FACTOR = 1000.0


def _phi_is_harmonic(metric, r0):
    rs = r0 * np.array([1.0, 1.7, 3.0, 10.0, 100.0])
    lap = np.asarray(metric.flat_laplacian_phi(rs))
    return bool(np.all(np.abs(lap) < 1e-13 / rs**2))


class RadialMode:
    """One separated mode u = F(r) * (cos(theta) if l == 1 else 1)."""

    def __init__(self, l, F, r0=0.0, r_max=np.inf):
        self.l = int(l)
        self.F = F                       # F(r) -> (F, F', F'')
        self.r0 = float(r0)
        self.r_max = float(r_max)

    def u_and_derivs(self, x):
        """u, coordinate gradient, coordinate Hessian at a Cartesian point."""
        r = float(np.linalg.norm(x))
        f, df, d2f = self.F(r)
        n = x / r
        nn = np.outer(n, n)
        eye = np.eye(3)
        if self.l == 0:
            u = f
            grad = df * n
            hess = d2f * nn + df / r * (eye - nn)
            return u, grad, hess
        # l = 1: u = q(r) x1 with q = F/r
        q = f / r
        dq = (df - q) / r
        d2q = (d2f - 2.0 * dq) / r
        x1 = x[0]
        e1 = eye[0]
        u = q * x1
        grad = dq * n * x1 + q * e1
        hess = (d2q * nn * x1 + dq * (eye - nn) * x1 / r
                + dq * (np.outer(n, e1) + np.outer(e1, n)))
        return u, grad, hess


def _closed_form_l1(phi_of, alpha, beta):
    """F = (alpha*r + beta/r^2) / phi for flat-harmonic phi (exact mode)."""

    def F(r):
        p, dp, d2p = phi_of(r)
        V = alpha * r + beta / r**2
        dV = alpha - 2.0 * beta / r**3
        d2V = 6.0 * beta / r**4
        f = V / p
        df = (dV - f * dp) / p
        d2f = (d2V - f * d2p - 2.0 * df * dp) / p
        return f, df, d2f

    return F


def _closed_form_l0(phi_of, coeff):
    """F = coeff / (r * phi) for flat-harmonic phi (exact decaying mode)."""

    def F(r):
        p, dp, d2p = phi_of(r)
        V = coeff / r
        dV = -coeff / r**2
        d2V = 2.0 * coeff / r**3
        f = V / p
        df = (dV - f * dp) / p
        d2f = (d2V - f * d2p - 2.0 * df * dp) / p
        return f, df, d2f

    return F


def _bvp_mode(metric, r0, r_max, inner_bc, outer_rhs, tol=1e-12):
    """Solve V'' + (2/r)V' - 2V/r^2 = (lap phi/phi) V on [r0, r_max].

    inner_bc(V, V') -> residual at r0; outer closure V + (r/2)V' = outer_rhs
    at r_max (exact once phi is harmonic beyond the bump support).
    Returns an F(r) -> (F, F', F'') evaluator in the original variable.
    """

    def q(r):
        p = metric.conformal_phi(r)[0]
        return np.asarray(metric.flat_laplacian_phi(r)) / p

    def rhs(r, y):
        return np.vstack([y[1], -2.0 / r * y[1] + 2.0 / r**2 * y[0]
                          + q(r) * y[0]])

    def bc(ya, yb):
        return np.array([inner_bc(ya[0], ya[1]),
                         yb[0] + 0.5 * r_max * yb[1] - outer_rhs])

    mesh = r0 * np.geomspace(1.0, r_max / r0, 400)
    guess = np.vstack([mesh, np.ones_like(mesh)])
    sol = solve_bvp(rhs, bc, mesh, guess, tol=tol, max_nodes=200000)
    if not sol.success:
        raise SolverError("radial collocation failed: " + sol.message,
                          residual=float(np.max(np.abs(sol.rms_residuals))))

    phi_of = metric.conformal_phi

    def F(r):
        V, dV = sol.sol(r)
        d2V = -2.0 / r * dV + 2.0 / r**2 * V + q(r) * V
        p, dp, d2p = phi_of(r)
        f = V / p
        df = (dV - f * dp) / p
        d2f = (d2V - f * d2p - 2.0 * df * dp) / p
        return f, df, d2f

    return F, sol


class HarmonicField:
    """Separated-mode harmonic function with pointwise evaluators.

    ``a`` is the interior (fill-in) slope for transmission solves, ``b`` the
    exterior dipole coefficient in the v = phi*f representation.
    """

    mode = "separated"

    def __init__(self, metric, modes, kind="asymptotic", interior_slope=None,
                 a=None, b=None, eps=0.0):
        self.metric = metric
        self.modes = list(modes)
        self.kind = kind
        self.interior_slope = interior_slope
        self.a = a
        self.b = b
        self.eps = float(eps)

    # -- pointwise evaluators -------------------------------------------

    def _raw(self, x, side=None):
        x = np.asarray(x, dtype=float)
        if side == "fillin":
            s = self.interior_slope
            if s is None:
                raise ArgumentError("field has no fill-in side")
            return s * x[0], np.array([s, 0.0, 0.0]), np.zeros((3, 3))
        u, grad, hess = 0.0, np.zeros(3), np.zeros((3, 3))
        for m in self.modes:
            ui, gi, hi = m.u_and_derivs(x)
            u += ui
            grad += gi
            hess += hi
        return u, grad, hess

    def u(self, x, side=None):
        return self._raw(x, side)[0]

    def grad(self, x, side=None):
        """Coordinate partials of u."""
        return self._raw(x, side)[1]

    def hess(self, x, side=None):
        """Covariant Hessian (coordinate Hessian minus Christoffel term)."""
        _, grad, hess = self._raw(x, side)
        gamma = self.metric.christoffel(np.asarray(x, dtype=float), side)
        return hess - np.einsum("kij,k->ij", gamma, grad)

    def grad_norm(self, x, side=None):
        g_inv = self.metric.inverse(np.asarray(x, dtype=float), side)
        du = self.grad(x, side)
        return float(np.sqrt(du @ g_inv @ du + self.eps))

    def laplace_residual(self, x, side=None):
        g_inv = self.metric.inverse(np.asarray(x, dtype=float), side)
        return float(np.einsum("ij,ij->", g_inv, self.hess(x, side)))


def coordinate_field(metric=None):
    """u = x1 as a HarmonicField (flat space)."""
    metric = metric if metric is not None else FlatMetric()
    mode = RadialMode(1, lambda r: (r, 1.0, 0.0))
    return HarmonicField(metric, [mode], kind="coordinate", a=1.0, b=0.0)


def radial_field(metric, F, kind="radial"):
    """u = F(r) as a HarmonicField; F(r) -> (F, F', F'')."""
    return HarmonicField(metric, [RadialMode(0, F)], kind=kind)


def _require_separable(metric):
    if not getattr(metric, "is_conformally_flat", False) or \
            not getattr(metric, "spherically_symmetric", False):
        raise CapabilityError(
            "separated mode needs a spherically symmetric conformally "
            "flat metric; use method='grid3d' for box domains")


# -----------------------------------------------------------------------
# solves
# -----------------------------------------------------------------------


def solve_asymptotic(metric, inner="none", r0=None, value=0.0,
                     rmax_factor=RMAX_FACTOR, method="separated", **grid_kw):
    """Harmonic u asymptotic to x1, with an optional inner boundary.

    inner: "none" (entire manifold), "dirichlet" (u = value on the sphere
    r = r0), or "transmission" (metric is a GluedMetric; u continues into
    the fill-in with matching value and unit-normal derivative).
    """
    if method == "grid3d":
        return solve_grid3d(metric, inner=inner, r0=r0, value=value, **grid_kw)

    if inner == "transmission":
        if not isinstance(metric, GluedMetric):
            raise ArgumentError("transmission solve needs a glued metric")
        return _solve_transmission(metric, rmax_factor)

    _require_separable(metric)
    phi_of = metric.conformal_phi

    if inner == "none":
        if _phi_is_harmonic(metric, max(1.0, getattr(metric, "r_min", 0.0))):
            F = _closed_form_l1(phi_of, 1.0, 0.0)
            return HarmonicField(metric, [RadialMode(1, F)], a=1.0, b=0.0)
        r_in = max(getattr(metric, "r_min", 0.0), 1e-6)
        r_max = rmax_factor * max(1.0, r_in)
        # regularity at the center: V proportional to r
        F, sol = _bvp_mode(metric, r_in, r_max,
                           inner_bc=lambda V, dV: V - r_in * dV,
                           outer_rhs=1.5 * r_max)
        rb = r_max / 20.0
        b = float(rb**2 * (sol.sol(rb)[0] - rb))
        return HarmonicField(metric, [RadialMode(1, F)], a=1.0, b=b)

    if inner != "dirichlet":
        raise ArgumentError(f"unknown inner condition {inner!r}")
    if r0 is None:
        raise ArgumentError("dirichlet condition needs r0")

    if _phi_is_harmonic(metric, r0):
        beta = -r0**3          # F(r0) = 0 for the l=1 part
        F = _closed_form_l1(phi_of, 1.0, beta)
        modes = [RadialMode(1, F, r0=r0)]
        fld = HarmonicField(metric, modes, kind="asymptotic-dirichlet",
                            a=None, b=beta)
    else:
        r_max = rmax_factor * r0
        F, sol = _bvp_mode(metric, r0, r_max,
                           inner_bc=lambda V, dV: V,
                           outer_rhs=1.5 * r_max)
        rb = r_max / 20.0
        b = float(rb**2 * (sol.sol(rb)[0] - rb))
        fld = HarmonicField(metric, [RadialMode(1, F, r0=r0)],
                            kind="asymptotic-dirichlet", b=b)
    if value != 0.0:
        green = solve_green(metric, r0)
        gmode = green.modes[0]
        scaled = RadialMode(0, lambda r: tuple(value * np.asarray(gmode.F(r))),
                            r0=r0)
        fld.modes.append(scaled)
    return fld


def _solve_transmission(glued, rmax_factor):
    """Glued exterior/fill-in solve: exterior l=1 mode, linear fill-in."""
    ext = glued.exterior
    _require_separable(ext)
    if not isinstance(glued.fillin, FlatMetric):
        raise CapabilityError("transmission solve supports Euclidean fill-ins")
    if not _phi_is_harmonic(ext, glued.r0):
        raise CapabilityError("transmission solve needs a flat-harmonic "
                              "conformal factor on the exterior")
    r0, rho = glued.r0, glued.rho_bar
    p0, dp0, _ = ext.conformal_phi(r0)
    # unknowns (a, beta) for u_in = a*x1bar, v = r + beta/r^2 outside:
    #   continuity      a*rho = F(r0)
    #   normal flux     a     = phi^-2 F'(r0)
    # with F = (r + beta/r^2)/phi linear in beta.
    def coeffs(alpha, beta):
        F = _closed_form_l1(ext.conformal_phi, alpha, beta)
        f, df, _ = F(r0)
        return f, df / p0**2

    f0, mu0 = coeffs(1.0, 0.0)
    f1, mu1 = coeffs(0.0, 1.0)
    # [rho, -f1; 1, -mu1] [a, beta]^T = [f0, mu0]^T
    M = np.array([[rho, -f1], [1.0, -mu1]])
    rhs = np.array([f0, mu0])
    if abs(np.linalg.det(M)) < 1e-14:
        raise DegeneracyError("transmission matching matrix is singular")
    a, beta = np.linalg.solve(M, rhs)
    F = _closed_form_l1(ext.conformal_phi, 1.0, beta)
    return HarmonicField(glued, [RadialMode(1, F, r0=r0)],
                         kind="transmission", interior_slope=float(a),
                         a=float(a), b=float(beta))


def solve_green(metric, r0, rmax_factor=RMAX_FACTOR):
    """G harmonic on the exterior of the coordinate sphere r0, G=1 on it,
    G -> 0 at infinity.  Works for any spherically symmetric metric via
    quadrature of the l=0 flux G' = c A / (sqrt(A) B r^2)."""
    if not getattr(metric, "spherically_symmetric", False):
        raise CapabilityError("solve_green (separated) needs spherical symmetry")

    if getattr(metric, "is_conformally_flat", False) and \
            _phi_is_harmonic(metric, r0):
        phi_of = metric.conformal_phi
        p0 = phi_of(r0)[0]
        coeff = r0 * p0       # G = coeff / (r phi), = 1 at r0
        F = _closed_form_l0(phi_of, coeff)
        fld = HarmonicField(metric, [RadialMode(0, F, r0=r0)], kind="green")
        A0 = metric.radial_AB(r0)[0]
        _, dG, _ = F(r0)
        fld.normal_derivative = float(dG / np.sqrt(A0))
        return fld

    def integrand(s):
        A, B = metric.radial_AB(s)
        return np.sqrt(A) / (B * s**2)

    tail, _ = quad(integrand, r0, np.inf, limit=400)
    c = -1.0 / tail

    def F(r):
        r = float(r)
        val, _ = quad(integrand, r, np.inf, limit=400)
        A, B = metric.radial_AB(r)
        dF = c * np.sqrt(A) / (B * r**2)
        # (S F'/A)' = 0 gives F'' = F' d/dr log(A/ (sqrt(A) B r^2))^-1 ...
        h = 1e-5 * r
        d2F = (c * integrand(r + h) - c * integrand(r - h)) / (2 * h)
        return -c * val, dF, d2F

    fld = HarmonicField(metric, [RadialMode(0, F, r0=r0)], kind="green")
    A0 = metric.radial_AB(r0)[0]
    fld.normal_derivative = float(F(r0)[1] / np.sqrt(A0))
    return fld


def solve_robin_v(metric, green, w, r0=None):
    """Decaying l=1 harmonic v with v dG/dmu - 2 dv/dmu = dw/dmu on Sigma.

    One unknown amplitude d (v = (d/r^2)/phi * cos(theta) when phi is
    flat-harmonic).  Returns (v_field, u_field = v + w, d)."""
    _require_separable(metric)
    if r0 is None:
        r0 = green.modes[0].r0
    A0 = metric.radial_AB(r0)[0]
    mu_scale = 1.0 / np.sqrt(A0)

    if _phi_is_harmonic(metric, r0):
        def unit_F(r):
            p, dp, d2p = metric.conformal_phi(r)
            V, dV, d2V = 1.0 / r**2, -2.0 / r**3, 6.0 / r**4
            f = V / p
            df = (dV - f * dp) / p
            d2f = (d2V - f * d2p - 2.0 * df * dp) / p
            return f, df, d2f
        sol_obj = None
    else:
        r_max = RMAX_FACTOR * r0
        unit_F, sol_obj = _bvp_mode(metric, r0, r_max,
                                    inner_bc=lambda V, dV: V - 1.0,
                                    outer_rhs=0.0)

    dG_dmu = green.normal_derivative
    f, df, _ = unit_F(r0)
    coeff = f * dG_dmu - 2.0 * mu_scale * df
    # dw/dmu on Sigma, cos(theta) coefficient
    wf, wdf, _ = w.modes[0].F(r0)
    rhs = mu_scale * wdf
    if abs(coeff) < 1e-14 * max(1.0, abs(rhs)):
        raise DegeneracyError("Robin coefficient vanishes; v not determined "
                              f"(coefficient {coeff:.3e})")
    d = rhs / coeff

    def F(r):
        return tuple(d * np.asarray(unit_F(r)))

    v = HarmonicField(metric, [RadialMode(1, F, r0=r0)], kind="robin-v")
    v.robin_coefficient = float(d)
    u = HarmonicField(metric, v.modes + list(w.modes), kind="robin-u")
    return v, u, float(d)


# -----------------------------------------------------------------------
# grid3d: 7-point conservative finite differences on a box
# -----------------------------------------------------------------------


class Grid3DField:
    mode = "grid3d"

    def __init__(self, metric, axes, values, eps=1e-12, kind="grid3d",
                 excised_radius=None):
        self.metric = metric
        self.axes = axes
        self.values = values
        self.eps = float(eps)
        self.kind = kind
        self.excised_radius = excised_radius
        self.h = float(axes[0][1] - axes[0][0])
        # tricubic B-spline coefficients; odd-reflection padding keeps the
        # interpolant exact (to roundoff) on affine data near the box faces
        pad = 12
        self._pad = pad
        padded = np.pad(values, pad, mode="reflect", reflect_type="odd")
        self._coef = ndimage.spline_filter(padded, order=3, mode="mirror")
        self._lo = np.array([a[0] for a in axes])
        self._hi = np.array([a[-1] for a in axes])

    def u(self, x, side=None):
        x = np.asarray(x, dtype=float)
        if np.any(x < self._lo - 1e-12) or np.any(x > self._hi + 1e-12):
            raise DomainError(f"point {x} outside the grid3d box")
        idx = (x - self._lo) / self.h + self._pad
        return float(ndimage.map_coordinates(
            self._coef, idx[:, None], order=3, prefilter=False,
            mode="mirror")[0])

    def grad(self, x, side=None):
        x = np.asarray(x, dtype=float)
        h = self.h
        g = np.empty(3)
        for i in range(3):
            e = np.zeros(3)
            e[i] = h
            g[i] = (self.u(x + e) - self.u(x - e)) / (2 * h)
        return g

    def hess(self, x, side=None):
        x = np.asarray(x, dtype=float)
        h = self.h
        out = np.empty((3, 3))
        u0 = self.u(x)
        for i in range(3):
            for j in range(i, 3):
                ei = np.zeros(3); ei[i] = h
                ej = np.zeros(3); ej[j] = h
                if i == j:
                    out[i, i] = (self.u(x + ei) - 2 * u0 + self.u(x - ei)) / h**2
                else:
                    out[i, j] = out[j, i] = (
                        self.u(x + ei + ej) - self.u(x + ei - ej)
                        - self.u(x - ei + ej) + self.u(x - ei - ej)) / (4 * h**2)
        gamma = self.metric.christoffel(x, side)
        return out - np.einsum("kij,k->ij", gamma, self.grad(x))

    def grad_norm(self, x, side=None):
        g_inv = self.metric.inverse(np.asarray(x, dtype=float), side)
        du = self.grad(x)
        return float(np.sqrt(du @ g_inv @ du + self.eps))

    def laplace_residual(self, x, side=None):
        g_inv = self.metric.inverse(np.asarray(x, dtype=float), side)
        return float(np.einsum("ij,ij->", g_inv, self.hess(x, side)))


def solve_grid3d(metric, inner="none", r0=None, value=0.0, half_width=8.0,
                 n=65, tol=1e-12, bc_iterations=3):
    """Conservative 7-point solve of div(phi^2 grad u) = 0 on a box with
    u = x1 + b*x1/r^3 on the faces; optional excised sphere with u = value
    on it (sharp Shortley-Weller boundary).

    The dipole coefficient b in the face condition is unknown a priori, so
    the solve is repeated with b re-estimated from the previous solution
    (projection of u - x1 onto cos(theta) at mid-box radius)."""
    if not getattr(metric, "is_conformally_flat", False):
        raise CapabilityError("grid3d path is written for conformally flat "
                              "metrics (conservative form)")
    ax = np.linspace(-half_width, half_width, n)
    h = ax[1] - ax[0]
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    pts = np.stack([X, Y, Z], axis=-1)
    R = np.sqrt(X**2 + Y**2 + Z**2)

    def phi2(p):
        if isinstance(metric, FlatMetric):
            return 1.0
        if hasattr(metric, "conformal_phi") and \
                getattr(metric, "spherically_symmetric", False):
            return float(metric.conformal_phi(np.linalg.norm(p))[0] ** 2)
        return float(metric.phi(p) ** 2)

    interior = np.ones_like(R, dtype=bool)
    interior[0, :, :] = interior[-1, :, :] = False
    interior[:, 0, :] = interior[:, -1, :] = False
    interior[:, :, 0] = interior[:, :, -1] = False
    excised = np.zeros_like(interior)
    if inner in ("dirichlet", "excised") and r0 is not None:
        excised = R < r0
        interior &= ~excised

    idx = -np.ones(R.shape, dtype=np.int64)
    ii = np.where(interior.ravel())[0]
    idx.ravel()[ii] = np.arange(len(ii))
    N = len(ii)

    rows, cols, vals = [], [], []
    face_terms = []                        # (row, coeff, face point)
    bvec0 = np.zeros(N)
    offsets = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0),
               (0, 0, 1), (0, 0, -1)]
    symmetric = not excised.any()
    it = np.argwhere(interior)
    for (i, j, k) in it:
        row = idx[i, j, k]
        p = pts[i, j, k]
        diag = 0.0
        for axis in range(3):
            step = np.zeros(3, dtype=int)
            step[axis] = 1
            nb = [(i, j, k) + s * step for s in (+1, -1)]
            cut = [excised[tuple(m)] for m in nb]
            if any(cut):
                # sharp boundary: second-order uneven spacing along the
                # axis, with the cut leg shortened to where it meets the
                # sphere r0 (intersection along the leg, not radially)
                qc = pts[tuple(nb[0] if cut[0] else nb[1])]
                e = (qc - p) / h
                pe = float(p @ e)
                disc = pe * pe - float(p @ p) + r0 * r0
                s = -pe - np.sqrt(max(disc, 0.0))
                if not 0.0 < s <= h:
                    s = -pe + np.sqrt(max(disc, 0.0))
                t = min(max(s / h, 0.05), 1.0)
                for m, is_cut in zip(nb, cut):
                    q = pts[tuple(m)]
                    if is_cut:
                        c = 2.0 * phi2(p + 0.5 * t * (q - p)) \
                            / (t * (1.0 + t) * h * h)
                        diag += c
                        bvec0[row] += c * value
                        continue
                    c = 2.0 * phi2(0.5 * (p + q)) / ((1.0 + t) * h * h)
                    diag += c
                    if interior[tuple(m)]:
                        rows.append(row)
                        cols.append(idx[tuple(m)])
                        vals.append(-c)
                    else:
                        face_terms.append((row, c, q))
                continue
            for m in nb:
                q = pts[tuple(m)]
                c = phi2(0.5 * (p + q)) / (h * h)
                diag += c
                if interior[tuple(m)]:
                    rows.append(row)
                    cols.append(idx[tuple(m)])
                    vals.append(-c)
                else:
                    face_terms.append((row, c, q))
        rows.append(row)
        cols.append(row)
        vals.append(diag)
    A = sparse.csr_matrix((vals, (rows, cols)), shape=(N, N))
    M = sparse.diags(1.0 / A.diagonal())

    in_pts = pts[interior]
    in_R = np.linalg.norm(in_pts, axis=1)
    shell = (np.abs(in_R - 0.55 * half_width) < 1.5 * h) & \
        (np.abs(in_pts[:, 0]) > 0.3 * in_R)

    b_dip = 0.0
    sol = in_pts[:, 0]
    for _ in range(max(bc_iterations, 1)):
        bvec = bvec0.copy()
        for row, c, q in face_terms:
            rq = np.linalg.norm(q)
            bvec[row] += c * q[0] * (1.0 + b_dip / rq**3)
        if symmetric:
            sol, info = cg(A, bvec, x0=sol, rtol=tol, maxiter=20000, M=M)
        else:
            sol, info = bicgstab(A, bvec, x0=sol, rtol=tol, maxiter=20000,
                                 M=M)
        if info != 0:
            res = float(np.linalg.norm(A @ sol - bvec)
                        / np.linalg.norm(bvec))
            raise SolverError(
                f"grid3d linear solve did not converge (info={info})",
                residual=res)
        if not shell.any():
            break
        b_dip = float(np.mean((sol[shell] - in_pts[shell, 0])
                              * in_R[shell] ** 3 / in_pts[shell, 0]))

    U = np.array(pts[..., 0])
    face = ~interior & ~excised
    Rf = np.maximum(R, 1e-9)
    U[face] = (pts[..., 0] * (1.0 + b_dip / Rf**3))[face]
    U[excised] = value
    U[interior] = sol
    fld = Grid3DField(metric, (ax, ax, ax), U, kind=f"grid3d-{inner}",
                      excised_radius=r0 if excised.any() else None)
    fld.b = b_dip
    return fld


# -----------------------------------------------------------------------
# diagnostics
# -----------------------------------------------------------------------


def kato_check(field, samples, tol_skip=1e-10):
    """Minimum slack of |Hess u|^2 - (3/2) |grad |grad u||^2 over samples.

    Returns (min_slack, equality_points, skipped) where equality points have
    |slack| < 1e-8 and samples with |grad u| < tol_skip are skipped."""
    metric = field.metric
    min_slack = np.inf
    equality, skipped = [], 0
    for x in samples:
        x = np.asarray(x, dtype=float)
        g_inv = metric.inverse(x)
        du = field.grad(x)
        norm2 = float(du @ g_inv @ du)
        if norm2 < tol_skip**2:
            skipped += 1
            continue
        hess = field.hess(x)
        h2 = float(np.einsum("ik,jl,ij,kl->", g_inv, g_inv, hess, hess))
        # d|grad u|: covariant, |grad|grad u||^2 = g^ij Hess_ik u^k Hess_jl u^l / |grad u|^2
        up = g_inv @ du
        hu = hess @ up
        dn2 = float(hu @ g_inv @ hu) / norm2
        slack = h2 - 1.5 * dn2
        scale = max(h2, 1.0)
        if slack / scale < min_slack:
            min_slack = slack / scale
        if abs(slack) < 1e-8 * scale:
            equality.append(x)
    return min_slack, equality, skipped


@dataclass
class TransmissionData:
    r0: float
    rho: float
    u_coeff: float           # cos(theta) coefficient of u on Sigma
    du_exterior: float       # d u / d mu, cos(theta) coefficient, exterior
    du_fillin: float
    d2_exterior: float       # one-sided dd u / dt dt, cos(theta) coefficient
    d2_fillin: float

    @property
    def trace_mismatch(self):
        return 0.0           # single separated trace by construction

    @property
    def flux_mismatch(self):
        return abs(self.du_exterior - self.du_fillin)


def transmission_data(field):
    """Interface traces of a transmission solve."""
    if field.kind != "transmission":
        raise ArgumentError("field is not a transmission solve")
    glued = field.metric
    ext = glued.exterior
    r0 = glued.r0
    F = field.modes[0].F
    f, df, d2f = F(r0)
    A0 = ext.radial_AB(r0)[0]
    p0, dp0, _ = ext.conformal_phi(r0)
    dA = 4.0 * p0**3 * dp0 * (p0 ** 0)       # A = phi^4, A' = 4 phi^3 phi'
    du_ext = df / np.sqrt(A0)
    # dd/dt dt = A^-1 F'' - A'/(2A^2) F'
    d2_ext = d2f / A0 - dA / (2.0 * A0**2) * df
    a = field.interior_slope
    return TransmissionData(r0=r0, rho=glued.rho_bar, u_coeff=float(f),
                            du_exterior=float(du_ext), du_fillin=float(a),
                            d2_exterior=float(d2_ext), d2_fillin=0.0)


def corner_regularity_probe(field, h_sequence=(0.1, 0.05, 0.025, 0.0125),
                            n_theta=33):
    """Tangential second difference quotients of the interface trace and the
    one-sided normal-jump residual of a transmission solve.

    Returns dict with 'quotient_sups' (per h), 'cauchy_gaps', and
    'jump_residual_sup' of dd u/dt dt|_fillin - dd u/dt dt|_ext
    - (H - H_Omega) du/dt over the interface."""
    data = transmission_data(field)
    glued = field.metric
    from .surfaces import CoordinateSphere, fundamental_forms
    H = fundamental_forms(CoordinateSphere(glued.r0), glued.exterior,
                          (1.0, 0.3)).H
    H_om = fundamental_forms(CoordinateSphere(glued.rho_bar), glued.fillin,
                             (1.0, 0.3)).H

    thetas = np.linspace(0.2, np.pi - 0.2, n_theta)
    # arc-length second difference of the trace eta = u_coeff cos(theta)
    eta = lambda t: data.u_coeff * np.cos(t)
    rho = glued.rho
    sups, prev = [], None
    gaps = []
    for h in h_sequence:
        dt = h / rho
        quot = (eta(thetas + dt) - 2 * eta(thetas) + eta(thetas - dt)) / h**2
        sup = float(np.max(np.abs(quot)))
        sups.append(sup)
        if prev is not None:
            gaps.append(abs(sup - prev))
        prev = sup

    jump = data.d2_fillin - data.d2_exterior
    target = (H - H_om) * data.du_exterior
    residual = abs(jump - target) * float(np.max(np.abs(np.cos(thetas))))
    return {"quotient_sups": sups, "cauchy_gaps": gaps,
            "jump_residual_sup": float(residual),
            "H": float(H), "H_fillin": float(H_om), "data": data}


def foliation_profile_check(field, metric=None, s_range=(0.5, 3.0), n=41):
    """f(s) = |grad u| along the gradient flow through the x1-axis, its
    second arc-length derivative, level-set Gauss curvature K, and the
    rigidity residual f'' - 2K."""
    metric = metric if metric is not None else field.metric
    l = field.modes[0].l if field.modes else 1
    rs = np.linspace(*s_range, n)
    axis = lambda r: np.array([r, 0.0, 0.0])
    f = np.array([field.grad_norm(axis(r)) for r in rs])
    # arc length along the radial line
    if getattr(metric, "spherically_symmetric", False):
        sqrtA = np.array([np.sqrt(metric.radial_AB(r)[0]) for r in rs])
    else:
        sqrtA = np.ones_like(rs)
    s = np.concatenate([[0.0], np.cumsum(0.5 * (sqrtA[1:] + sqrtA[:-1])
                                         * np.diff(rs))])
    fs = np.gradient(f, s)
    fss = np.gradient(fs, s)
    if l == 0:
        if getattr(metric, "spherically_symmetric", False):
            K = np.array([1.0 / (metric.radial_AB(r)[1] * r**2) for r in rs])
        else:
            K = np.zeros_like(rs)
    else:
        K = np.zeros_like(rs)      # planes for the coordinate solutions
    residual = fss - 2.0 * K
    truncated = bool(np.any(f < 1e-12))
    return {"s": s, "f": f, "f_ss": fss, "K": K, "residual": residual,
            "truncated": truncated}
