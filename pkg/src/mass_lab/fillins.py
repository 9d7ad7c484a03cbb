"""Fill-ins of a boundary sphere (Euclidean, conformal) and the mollified
collar metric family with its concentrated-curvature limit."""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from .errors import ArgumentError, PreconditionError
from .metrics import FlatMetric, GluedMetric, RadialConformalMetric
from .surfaces import CoordinateSphere, fundamental_forms
from .harmonic import solve_green

TWO_PI = 2.0 * np.pi


@dataclass
class FillinModel:
    kind: str                  # "euclidean-ball" | "conformal" | "custom"
    radius: float              # chart radius of the fill-in ball (if a ball)
    H_omega: object            # callable theta -> mean curvature on boundary
    induced_radius: float      # area radius of the boundary round metric
    isometry_residual: float


@dataclass
class CornerJump:
    H: object                  # exterior-side mean curvature, theta -> value
    H_omega: object
    isometry_residual: float

    def jump(self, theta):
        return self.H_omega(theta) - self.H(theta)


def euclidean_fillin(surface, metric, n_theta=64):
    """Flat region bounded by the isometric image of (Sigma, induced metric).

    Coordinate spheres in spherically symmetric metrics map to round balls;
    surfaces in the flat metric fill in with themselves (jump 0); other
    revolution surfaces go through the isometric-embedding profile."""
    if getattr(metric, "spherically_symmetric", False) and \
            isinstance(surface, CoordinateSphere) and \
            not isinstance(metric, FlatMetric):
        r0 = surface.radius
        _, B = metric.radial_AB(r0)
        rho = float(np.sqrt(B) * r0)
        H_om = lambda th: 2.0 / rho
        H_ext = _H_profile(surface, metric, n_theta)
        fill = FillinModel(kind="euclidean-ball", radius=rho, H_omega=H_om,
                           induced_radius=rho, isometry_residual=0.0)
        return fill, CornerJump(H=H_ext, H_omega=H_om, isometry_residual=0.0)

    if isinstance(metric, FlatMetric):
        H_ext = _H_profile(surface, metric, n_theta)
        rad = getattr(surface, "radius", np.nan)
        fill = FillinModel(kind="euclidean-ball", radius=float(rad),
                           H_omega=H_ext, induced_radius=float(rad),
                           isometry_residual=0.0)
        return fill, CornerJump(H=H_ext, H_omega=H_ext, isometry_residual=0.0)

    from .embedding import induced_revolution_metric, embed_revolution
    rev = induced_revolution_metric(surface, metric, n=max(n_theta, 128))
    emb = embed_revolution(rev)
    H_ext = _H_profile(surface, metric, n_theta)
    fill = FillinModel(kind="euclidean-ball", radius=np.nan, H_omega=emb.H0,
                       induced_radius=np.nan,
                       isometry_residual=emb.roundtrip_residual)
    return fill, CornerJump(H=H_ext, H_omega=emb.H0,
                            isometry_residual=emb.roundtrip_residual)


def _H_profile(surface, metric, n_theta):
    ths = np.linspace(1e-3, np.pi - 1e-3, n_theta)
    vals = np.array([fundamental_forms(surface, metric, (t, 0.0)).H
                     for t in ths])
    spline = CubicSpline(ths, vals)
    return lambda th: float(spline(np.clip(th, ths[0], ths[-1])))


def conformal_fillin(metric, surface, cross_check=True):
    """Conformal fill-in g* = G^4 g of the exterior of a coordinate sphere.

    H* on Sigma is -H - 4 dG/dmu; when requested it is cross-checked against
    the second fundamental form of Sigma in g* with the fill-in orientation
    (normal pointing into the exterior region, the interior of the
    compactified fill-in)."""
    if not isinstance(surface, CoordinateSphere):
        raise ArgumentError("conformal fill-in needs a coordinate sphere")
    r0 = surface.radius
    green = solve_green(metric, r0)
    dG_dmu = green.normal_derivative
    H = fundamental_forms(surface, metric, (1.0, 0.0)).H
    H_star = -H - 4.0 * dG_dmu

    result = FillinModel(kind="conformal", radius=r0,
                         H_omega=lambda th: H_star,
                         induced_radius=_area_radius(surface, metric),
                         isometry_residual=0.0)
    result.green = green
    result.H_star = float(H_star)
    if cross_check:
        result.H_star_direct = _H_star_direct(metric, green, r0)
        result.cross_check_error = abs(result.H_star - result.H_star_direct)
    return result


def _area_radius(surface, metric):
    r0 = surface.radius
    _, B = metric.radial_AB(r0)
    return float(np.sqrt(B) * r0)


def _H_star_direct(metric, green, r0):
    """Mean curvature of the r0 sphere in g* = G^4 g from fundamental forms,
    with the normal oriented toward increasing r (outward for the fill-in)."""
    if not getattr(metric, "is_conformally_flat", False):
        raise ArgumentError("direct H* cross-check needs a conformally flat "
                            "exterior")
    G_of = green.modes[0].F

    def psi(r):
        return G_of(r)[0] * metric.conformal_phi(r)[0]

    def dpsi(r):
        g, dg, _ = G_of(r)
        p, dp, _ = metric.conformal_phi(r)
        return dg * p + g * dp

    def d2psi(r):
        g, dg, d2g = G_of(r)
        p, dp, d2p = metric.conformal_phi(r)
        return d2g * p + 2.0 * dg * dp + g * d2p

    gstar = RadialConformalMetric(psi, dpsi, d2psi, r_min=0.0)
    node = (1.0, 0.0)
    x = CoordinateSphere(r0).point(*node)
    # fill-in orientation: inversion sends the compactified exterior to a
    # ball whose outward normal points toward decreasing r here
    ff = fundamental_forms(CoordinateSphere(r0), gstar, node,
                           outward_from=2.0 * x)
    return float(ff.H)


# -----------------------------------------------------------------------
# mollified collar metrics
# -----------------------------------------------------------------------


def _bump(s):
    """Standard mollifier on (-1, 1), unit integral."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1.0
    out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
    return out


_BUMP_NODES, _BUMP_WTS = np.polynomial.legendre.leggauss(48)
_BUMP_NORM = float(np.sum(_bump(_BUMP_NODES) * _BUMP_WTS))
BUMP_PEAK = float(np.exp(-1.0) / _BUMP_NORM)     # phi_mollifier(0)


def _smoothstep(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    a = np.where(x > 0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
    b = np.where(x < 1, np.exp(-1.0 / np.maximum(1.0 - x, 1e-300)), 0.0)
    return a / (a + b)


class MollifiedMetric:
    """Collar metric dt^2 + rho_delta(t)^2 dOmega^2 smoothing the corner.

    The area-radius profile rho(t) of the glued metric (kinked at t = 0) is
    mollified at the running scale w(t) = delta^2 inside the core and
    tapering to 0 at |t| = delta, so g_delta = g outside the collar exactly."""

    def __init__(self, glued, delta, n_profile=4001):
        if not isinstance(glued, GluedMetric):
            raise ArgumentError("mollify needs a glued metric")
        self.glued = glued
        self.delta = float(delta)
        d = self.delta
        span = 2.5 * d
        # piecewise spline of the exact collar profile (kink at t = 0)
        ts_e = np.linspace(0.0, span, n_profile)
        ts_o = np.linspace(-span, 0.0, n_profile)
        rho_e = self._exact_profile(ts_e, "exterior")
        rho_o = self._exact_profile(ts_o, "fillin")
        self._sp_e = CubicSpline(ts_e, rho_e)
        self._sp_o = CubicSpline(ts_o, rho_o)

    def _exact_profile(self, ts, side):
        glued = self.glued
        base = glued.exterior if side == "exterior" else glued.fillin
        start = glued.r0 if side == "exterior" else glued.rho_bar
        A = lambda r: base.radial_AB(r)[0]
        tspan = (0.0, ts[-1] if side == "exterior" else ts[0])
        if tspan[1] == 0.0:
            rs = np.full_like(ts, start)
        else:
            sol = solve_ivp(lambda s, r: 1.0 / np.sqrt(A(r[0])), tspan,
                            [start], t_eval=ts if side == "exterior"
                            else ts[::-1], rtol=1e-12, atol=1e-14)
            rs = sol.y[0] if side == "exterior" else sol.y[0][::-1]
        B = np.array([base.radial_AB(r)[1] for r in rs])
        return np.sqrt(B) * rs

    def rho(self, t):
        """Unsmoothed glued profile."""
        t = float(t)
        return float(self._sp_e(t)) if t >= 0.0 else float(self._sp_o(t))

    def width(self, t):
        d = self.delta
        core = d * d
        s = (d - abs(t)) / (d - core) if d > core else 1.0
        return core * float(_smoothstep(np.clip(s, 0.0, 1.0) * 2.0))

    def rho_delta(self, t):
        t = float(t)
        w = self.width(t)
        if w <= 0.0 or abs(t) >= self.delta:
            return self.rho(t)
        # the profile has a kink at collar position 0 = argument s* = t/w;
        # split the mollifier quadrature there so every panel is smooth
        panels = [(-1.0, 1.0)]
        if abs(t) < w:
            s_star = t / w
            panels = [(-1.0, s_star), (s_star, 1.0)]
        num = den = 0.0
        for lo, hi in panels:
            if hi - lo < 1e-15:
                continue
            s = 0.5 * (lo + hi) + 0.5 * (hi - lo) * _BUMP_NODES
            wgt = 0.5 * (hi - lo) * _BUMP_WTS * _bump(s)
            num += float(np.sum(wgt * [self.rho(t - w * si) for si in s]))
            den += float(np.sum(wgt))
        return num / den

    def _derivs(self, t):
        h = max(self.delta**2 / 40.0, 1e-9)
        f = [self.rho_delta(t + k * h) for k in (-2, -1, 0, 1, 2)]
        d1 = (f[0] - 8 * f[1] + 8 * f[3] - f[4]) / (12 * h)
        d2 = (-f[0] + 16 * f[1] - 30 * f[2] + 16 * f[3] - f[4]) / (12 * h**2)
        return f[2], d1, d2

    def R(self, t):
        """Scalar curvature of dt^2 + rho^2 dOmega^2 at collar position t."""
        rho, d1, d2 = self._derivs(t)
        return float(2.0 / rho**2 * (1.0 - d1**2) - 4.0 * d2 / rho)

    def components(self, t, theta=np.pi / 2):
        rho = self.rho_delta(t)
        return np.diag([1.0, rho**2, rho**2 * np.sin(theta) ** 2])

    def c0_distance(self, n=101):
        ts = np.linspace(-self.delta, self.delta, n)
        return float(max(abs(self.rho_delta(t) - self.rho(t)) for t in ts))

    def lipschitz_sample(self, n=201):
        ts = np.linspace(-1.5 * self.delta, 1.5 * self.delta, n)
        vals = np.array([self.rho_delta(t) for t in ts])
        return float(np.max(np.abs(np.diff(vals) / np.diff(ts))))


def mollify(glued, delta):
    if not isinstance(glued, GluedMetric):
        raise ArgumentError("mollify needs a glued metric")
    # the collar chart must stay inside both charts
    if delta >= 0.5 * glued.r0:
        raise ArgumentError(f"delta = {delta:g} too large for the collar "
                            f"(interface radius {glued.r0:g})")
    return MollifiedMetric(glued, delta)


def _collar_grad_norm(field, glued, t, theta):
    """|grad u0| at collar position (t, theta) in the appropriate chart."""
    if t >= 0.0:
        r = glued._exterior_r_of_t(t)
        x = r * np.array([np.cos(theta), np.sin(theta), 0.0])
        return field.grad_norm(x, "exterior")
    rbar = glued._fillin_r_of_t(t)
    x = rbar * np.array([np.cos(theta), np.sin(theta), 0.0])
    return field.grad_norm(x, "fillin")


def collar_integral(glued, field, deltas, n_theta=16, resolve=False):
    """oint int_{-delta}^{delta} R_delta |grad u| dt dA per delta, plus a
    limit estimate compared against twice the corner term.

    With resolve=True the harmonic mode is re-solved on each mollified
    metric instead of reusing the fixed transmission solve."""
    deltas = list(deltas)
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        pass                      # monotone decreasing expected
    values = []
    for d in deltas:
        mm = mollify(glued, d)
        values.append(_one_collar_integral(mm, field, n_theta,
                                           resolve=resolve))
    values = np.array(values)

    diffs = np.diff(values)
    no_extrapolation = bool(np.any(diffs[:-1] * diffs[1:] < 0)) \
        if len(values) > 2 else False
    if len(values) >= 2 and not no_extrapolation:
        # one Richardson step at the empirical order
        if len(values) >= 3 and abs(values[1] - values[2]) > 0:
            ratio = (values[0] - values[1]) / (values[1] - values[2])
            order = np.log(abs(ratio)) / np.log(deltas[0] / deltas[1]) \
                if ratio > 0 else 1.0
        else:
            order = 1.0
        order = min(max(order, 0.5), 3.0)
        k = (deltas[-2] / deltas[-1]) ** order
        limit = values[-1] + (values[-1] - values[-2]) / (k - 1.0)
    else:
        limit = values[-1]
    return {"deltas": deltas, "values": values.tolist(),
            "limit": float(limit), "no_extrapolation": no_extrapolation}


def _one_collar_integral(mm, field, n_theta, resolve=False):
    glued = mm.glued
    d = mm.delta
    mu, wmu = np.polynomial.legendre.leggauss(n_theta)

    if resolve:
        mode = _resolve_collar_mode(mm, field)
    else:
        mode = None

    def grad_norm(t, theta):
        if mode is not None:
            f, df = mode(t)
            rho = mm.rho_delta(t)
            c, s = np.cos(theta), np.sin(theta)
            return float(np.sqrt((df * c) ** 2 + (f * s / rho) ** 2))
        return _collar_grad_norm(field, glued, t, theta)

    def t_integrand(t):
        R = mm.R(t)
        rho2 = mm.rho_delta(t) ** 2
        tot = 0.0
        for m, w in zip(mu, wmu):
            tot += grad_norm(t, np.arccos(m)) * w
        return R * rho2 * TWO_PI * tot

    # panels: smooth spike in the |t| < delta^2 core, small blend wings
    core = d * d
    total = 0.0
    for lo, hi, n in ((-d, -core, 24), (-core, core, 64), (core, d, 24)):
        xs, ws = np.polynomial.legendre.leggauss(n)
        ts = 0.5 * (lo + hi) + 0.5 * (hi - lo) * xs
        total += 0.5 * (hi - lo) * float(np.sum(
            [t_integrand(t) * w for t, w in zip(ts, ws)]))
    return total


def _resolve_collar_mode(mm, field):
    """Re-solve the l=1 mode f'' + 2(rho'/rho) f' - 2 f/rho^2 = 0 on the
    mollified collar, matching the fixed solve outside the collar."""
    from scipy.integrate import solve_bvp
    glued = mm.glued
    d = mm.delta
    span = 2.0 * d

    def coeffs(t):
        rho, d1, _ = mm._derivs(float(t))
        return rho, d1

    def rhs(t, y):
        out = np.zeros_like(y)
        for i, ti in enumerate(np.atleast_1d(t)):
            rho, d1 = coeffs(ti)
            out[0, i] = y[1, i]
            out[1, i] = -2.0 * d1 / rho * y[1, i] + 2.0 / rho**2 * y[0, i]
        return out

    def u_coeff(t):
        # cos(theta) coefficient of the fixed solve at collar position t
        return _axis_value(field, glued, t)

    def bc(ya, yb):
        return np.array([ya[0] - u_coeff(-span), yb[0] - u_coeff(span)])

    ts = np.linspace(-span, span, 81)
    guess = np.vstack([[u_coeff(t) for t in ts],
                       np.gradient([u_coeff(t) for t in ts], ts)])
    sol = solve_bvp(rhs, bc, ts, guess, tol=1e-8, max_nodes=20000)

    def mode(t):
        f, df = sol.sol(float(t))
        return float(f), float(df)

    return mode


def _axis_value(field, glued, t):
    if t >= 0.0:
        r = glued._exterior_r_of_t(t)
        return field.u(np.array([r, 0.0, 0.0]), "exterior")
    rbar = glued._fillin_r_of_t(t)
    return field.u(np.array([rbar, 0.0, 0.0]), "fillin")
