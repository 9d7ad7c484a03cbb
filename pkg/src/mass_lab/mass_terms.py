"""Mass-formula terms: bulk integrals, boundary terms, level-set topology,
Brown-York mass, and the assembled identity/inequality checks."""

import json
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ArgumentError, PreconditionError
from .metrics import FlatMetric, GluedMetric, adm_mass, geometry_at
from .surfaces import CoordinateSphere, LevelSetMesh, euler_characteristic, \
    fundamental_forms
from .harmonic import transmission_data

TWO_PI = 2.0 * np.pi


# -----------------------------------------------------------------------
# bulk integral
# -----------------------------------------------------------------------


def _scalar_curvature(metric, x, side=None):
    if hasattr(metric, "scalar_curvature_conformal") and \
            getattr(metric, "spherically_symmetric", False):
        return float(metric.scalar_curvature_conformal(np.linalg.norm(x)))
    if isinstance(metric, FlatMetric):
        return 0.0
    return geometry_at(metric, x, side).R


def bkks_bulk(field, metric=None, region="exterior", r0=None, r_max=1.0e4,
              n_theta=48, n_panel=8, panels_per_decade=12, eps=1e-10,
              return_error=False):
    """Integral of |Hess u|^2/|grad u| + R |grad u| over the region.

    Axisymmetric quadrature: Gauss-Legendre in cos(theta) times geometric
    radial panels out to r_max (the integrand decays like r^-4)."""
    metric = metric if metric is not None else field.metric

    def integrand(x, side):
        g_inv = metric.inverse(x, side)
        du = field.grad(x, side)
        norm = float(np.sqrt(du @ g_inv @ du))
        hess = field.hess(x, side)
        h2 = float(np.einsum("ik,jl,ij,kl->", g_inv, g_inv, hess, hess))
        R = _scalar_curvature(metric, x, side) if side != "fillin" else \
            _scalar_curvature(metric.fillin if isinstance(metric, GluedMetric)
                              else metric, x)
        return h2 / max(norm, eps) + R * norm

    mu, wmu = np.polynomial.legendre.leggauss(n_theta)   # mu = cos(theta)
    sth = np.sqrt(1.0 - mu**2)

    def shell(r_lo, r_hi, side, base_metric):
        xs, ws = np.polynomial.legendre.leggauss(n_panel)
        rs = 0.5 * (r_lo + r_hi) + 0.5 * (r_hi - r_lo) * xs
        wr = 0.5 * (r_hi - r_lo) * ws
        total = 0.0
        for r, w_r in zip(rs, wr):
            sq = base_metric.sqrt_det(np.array([r, 0.0, 0.0]))
            for m, w_m in zip(mu, wmu):
                x = np.array([r * m, r * np.sqrt(1 - m**2), 0.0])
                total += integrand(x, side) * sq * r**2 * w_r * w_m * TWO_PI
        return total

    if region == "fillin":
        if not isinstance(metric, GluedMetric):
            raise ArgumentError("fillin region needs a glued metric")
        rho = metric.rho_bar
        edges = np.linspace(1e-6, rho, 8)
        val = sum(shell(a, b, "fillin", metric.fillin)
                  for a, b in zip(edges[:-1], edges[1:]))
        return (val, 0.0) if return_error else val

    if region == "both":
        e = bkks_bulk(field, metric, "exterior", r0=r0, r_max=r_max,
                      n_theta=n_theta, n_panel=n_panel,
                      panels_per_decade=panels_per_decade)
        f = bkks_bulk(field, metric, "fillin")
        return e + f

    if r0 is None:
        r0 = metric.r0 if isinstance(metric, GluedMetric) else \
            (field.modes[0].r0 or 1.0)
    base = metric.exterior if isinstance(metric, GluedMetric) else metric
    n_dec = int(np.ceil(np.log10(r_max / r0)))
    edges = r0 * np.geomspace(1.0, r_max / r0, n_dec * panels_per_decade + 1)
    val = sum(shell(a, b, "exterior", base)
              for a, b in zip(edges[:-1], edges[1:]))
    if return_error:
        coarse = sum(shell(a, b, "exterior", base) for a, b in zip(
            edges[:-1:2], edges[2::2]))
        return val, abs(val - coarse)
    return val


# -----------------------------------------------------------------------
# boundary terms
# -----------------------------------------------------------------------


@dataclass
class AngleTermSample:
    theta: float
    beta: float              # angle between grad u and the surface
    tangential: float        # <grad_S beta, nhat>
    weight: float            # |grad u|
    kappa_datum: float       # geodesic-curvature form of the same integrand


def _surface_frame(surface, metric, theta, side):
    """Outward unit normal, theta-tangent, induced sigma_thth, area factor."""
    ff = fundamental_forms(surface, metric, (theta, 0.0), side)
    x = ff.point
    E = surface.d1(theta, 0.0)
    g = metric.components(x, side)
    s_tt = float(E[0] @ g @ E[0])
    s_pp = float(E[1] @ g @ E[1])
    return ff, x, E, s_tt, s_pp


def boundary_terms(field, surface, metric=None, side=None, n_theta=64,
                   h_beta=1e-4, tol_tangent=1e-10, collect=True):
    """H-term -oint H |grad u| and angle term oint <grad_S beta, nhat>|grad u|
    over a revolution surface, for an axisymmetric field.

    Returns (H_term, angle_term, samples); nodes with |grad_S u| below
    tolerance are excluded from the angle quadrature and counted."""
    metric = metric if metric is not None else field.metric

    def beta_at(theta):
        ff = fundamental_forms(surface, metric, (theta, 0.0), side)
        du = field.grad(ff.point, side)
        g_inv = metric.inverse(ff.point, side)
        norm = float(np.sqrt(du @ g_inv @ du))
        u_nu = float(ff.normal @ du)     # normal is a vector, du a covector
        s = np.clip(u_nu / norm, -1.0, 1.0)
        return float(np.arcsin(s)), norm, u_nu

    nodes, wts = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(nodes)            # weight already absorbs sin(theta)

    H_term = 0.0
    angle_term = 0.0
    samples = []
    excluded = 0
    for th, w in zip(thetas, wts):
        ff, x, E, s_tt, s_pp = _surface_frame(surface, metric, th, side)
        # Gauss-Legendre in cos(theta): dA = sqrt(det sigma) dtheta dphi
        #                                 = sqrt(s_tt s_pp)/sin(theta) dmu dphi
        dA = np.sqrt(s_tt * s_pp) / np.sin(th) * w * TWO_PI
        beta, norm, u_nu = beta_at(th)
        H_term -= ff.H * norm * dA

        du = field.grad(x, side)
        eta_p = float(E[0] @ du)         # d/dtheta of the trace
        grad_s = abs(eta_p) / np.sqrt(s_tt)
        if grad_s < tol_tangent:
            excluded += 1
            continue
        # 4th-order centered derivative of beta in theta
        h = h_beta
        b = [beta_at(th + k * h)[0] for k in (-2, -1, 1, 2)]
        dbeta = (b[0] - 8 * b[1] + 8 * b[2] - b[3]) / (12 * h)
        tang = dbeta / np.sqrt(s_tt) * np.sign(eta_p)
        angle_term += tang * norm * dA

        kappa = _lemma_combination(field, surface, metric, th, side)
        if collect:
            samples.append(AngleTermSample(theta=float(th), beta=beta,
                                           tangential=float(tang),
                                           weight=norm,
                                           kappa_datum=float(kappa)))
    return H_term, angle_term, samples, excluded


def _lemma_combination(field, surface, metric, theta, side, h=1e-4):
    """<grad_S d_nu u, grad_S u>/|grad u| - (d_nu u/|grad u|) Hess_S u(n,n),
    the geodesic-curvature form of the angle-term integrand."""

    def at(th):
        ff = fundamental_forms(surface, metric, (th, 0.0), side)
        du = field.grad(ff.point, side)
        g_inv = metric.inverse(ff.point, side)
        norm = float(np.sqrt(du @ g_inv @ du))
        u_nu = float(ff.normal @ du)
        E = surface.d1(th, 0.0)
        g = metric.components(ff.point, side)
        s_tt = float(E[0] @ g @ E[0])
        eta = field.u(ff.point, side)
        return u_nu, norm, s_tt, eta

    u_nu0, norm0, s_tt0, eta0 = at(theta)
    vals = [at(theta + k * h) for k in (-2, -1, 1, 2)]
    d_unu = (vals[0][0] - 8 * vals[1][0] + 8 * vals[2][0] - vals[3][0]) / (12 * h)
    d_eta = (vals[0][3] - 8 * vals[1][3] + 8 * vals[2][3] - vals[3][3]) / (12 * h)
    d2_eta = (-vals[0][3] + 16 * vals[1][3] - 30 * eta0 + 16 * vals[2][3]
              - vals[3][3]) / (12 * h**2)
    d_stt = (vals[0][2] - 8 * vals[1][2] + 8 * vals[2][2] - vals[3][2]) / (12 * h)
    gamma_t = d_stt / (2.0 * s_tt0)
    inner = d_unu * d_eta / s_tt0                  # <grad_S d_nu u, grad_S u>
    hess_nn = (d2_eta - gamma_t * d_eta) / s_tt0   # Hess_S u (nhat, nhat)
    return inner / norm0 - (u_nu0 / norm0) * hess_nn


# -----------------------------------------------------------------------
# level-set topology
# -----------------------------------------------------------------------


@dataclass
class LevelSetDeficit:
    t_grid: np.ndarray
    chi: np.ndarray
    deficit: float
    T: float
    transitions: tuple
    skipped: int


def _chi_of_level(field, t, box_half, n, mask_radius=None, side=None,
                  interior=False):
    """Euler characteristic of {u = t} inside a coordinate box via marching
    cubes; plane-like sheets capped by the box count chi = 1 (an extracted
    open disk already has chi = 1, so no correction term is needed)."""
    from skimage import measure
    ax = np.linspace(-box_half, box_half, n)
    X, Y, Z = np.meshgrid(ax, ax, ax, indexing="ij")
    R = np.sqrt(X**2 + Y**2 + Z**2)
    h = 2.0 * box_half / (n - 1)
    if interior:
        mask = R < mask_radius if mask_radius else None
        mask_mc = R < mask_radius + 2 * h if mask_radius else None
        vol = field.interior_slope * X if field.interior_slope is not None \
            else np.zeros_like(X)
    else:
        mask = R > mask_radius if mask_radius else None
        mask_mc = R > mask_radius - 2 * h if mask_radius else None
        vol = np.zeros_like(X)
        it = np.nditer(X, flags=["multi_index"])
        for _ in it:
            i = it.multi_index
            x = np.array([X[i], Y[i], Z[i]])
            if mask is not None and not mask[i]:
                # continuous extension: project onto the excision sphere so
                # partially-masked boundary cells see smooth values
                r = max(np.linalg.norm(x), 1e-9)
                x = x * ((mask_radius * (1 + 1e-9)) / r)
            vol[i] = field.u(x, side)
    # range check on the true domain; the extraction mask is relaxed by two
    # cells so level sheets grazing the excision sphere are not clipped (the
    # extended values glue radial annuli there, which do not change chi)
    lo, hi = vol[mask].min() if mask is not None else vol.min(), \
        vol[mask].max() if mask is not None else vol.max()
    if not (lo < t < hi):
        return None
    try:
        verts, faces, _, _ = measure.marching_cubes(
            vol, level=t, mask=mask_mc, allow_degenerate=False)
    except (ValueError, RuntimeError):
        return None
    mesh = LevelSetMesh(vertices=verts, faces=faces)
    return euler_characteristic(mesh)


def level_set_deficit(field, t_range=None, resolution=48, box_half=None,
                      inner_radius=None, n_per_piece=2):
    """2 pi * integral of (chi(Sigma_t) - 1) dt.

    chi(t) is piecewise-constant in t with transitions exactly at the
    critical values of u on the inner boundary, so the integral is done
    exactly on the pieces with chi sampled at interior points of each."""
    glued = isinstance(field.metric, GluedMetric)
    if inner_radius is None:
        if glued:
            inner_radius = field.metric.r0
        else:
            inner_radius = field.modes[0].r0 if field.modes and \
                field.modes[0].r0 > 0 else None

    # critical values of u on the excision/interface sphere
    transitions = ()
    if inner_radius:
        ths = np.linspace(0.0, np.pi, 181)
        vals = np.array([field.u(inner_radius *
                                 np.array([np.cos(t), np.sin(t), 0.0]),
                                 "exterior" if glued else None)
                         for t in ths])
        transitions = (float(vals.min()), float(vals.max()))

    if t_range is None:
        T = 1.5 * max(1.0, *(abs(v) for v in transitions)) if transitions \
            else 1.5
        t_range = (-T, T)
    T = max(abs(t_range[0]), abs(t_range[1]))
    if box_half is None:
        box_half = 2.0 * T + (inner_radius or 0.0) + 1.0

    edges = sorted({t_range[0], t_range[1],
                    *(v for v in transitions
                      if t_range[0] < v < t_range[1])})
    t_grid, chi_vals, skipped = [], [], 0
    deficit = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        probes = np.linspace(lo, hi, n_per_piece + 2)[1:-1]
        chis = []
        for t in probes:
            chi_e = _chi_of_level(field, t, box_half, resolution,
                                  mask_radius=inner_radius,
                                  side="exterior" if glued else None)
            chi = chi_e
            if glued and field.interior_slope:
                lim = abs(field.interior_slope) * field.metric.rho_bar
                if abs(t) < lim:
                    chi_i = _chi_of_level(field, t, field.metric.rho_bar * 1.2,
                                          resolution,
                                          mask_radius=field.metric.rho_bar,
                                          interior=True)
                    chi = (chi_e or 0) + (chi_i or 0)
            if chi is None:
                if abs(t) >= (max(abs(v) for v in transitions)
                              if transitions else 0.0):
                    chi = 1              # plane-like level out of the box: graph sheet
                else:
                    skipped += 1
                    continue
            chis.append(chi)
            t_grid.append(t)
            chi_vals.append(chi)
        if chis:
            chi_piece = int(np.median(chis))
            deficit += (chi_piece - 1) * (hi - lo)
    return LevelSetDeficit(t_grid=np.array(t_grid), chi=np.array(chi_vals),
                           deficit=TWO_PI * deficit, T=T,
                           transitions=transitions, skipped=skipped)


# -----------------------------------------------------------------------
# Brown-York mass
# -----------------------------------------------------------------------


def brown_york(surface, metric, embedding, n_theta=64, side=None):
    """(1/8 pi) oint (H0 - H) d sigma with H0 from the isometric embedding."""
    nodes, wts = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(nodes)
    total = 0.0
    for th, w in zip(thetas, wts):
        ff, x, E, s_tt, s_pp = _surface_frame(surface, metric, th, side)
        if ff.K <= 0.0:
            raise PreconditionError(
                f"Gauss curvature non-positive at theta={th:.3f}; "
                "Brown-York mass undefined")
        dA = np.sqrt(s_tt * s_pp) / np.sin(th) * w * TWO_PI
        total += (embedding.H0(th) - ff.H) * dA
    return total / (8.0 * np.pi)


# -----------------------------------------------------------------------
# assembled checks
# -----------------------------------------------------------------------


@dataclass
class BkksReport:
    bulk_exterior: float
    bulk_fillin: float
    boundary_H_term: float
    angle_term: float
    corner_term: float
    chi_deficit: float
    mass: float
    residual: float
    min_grad: float = np.nan

    CSV_COLUMNS = ("bulk_exterior", "bulk_fillin", "boundary_H_term",
                   "angle_term", "corner_term", "chi_deficit", "mass",
                   "residual", "min_grad")

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True)

    def to_csv_row(self):
        return ",".join(repr(float(getattr(self, c)))
                        for c in self.CSV_COLUMNS)


def verify_prop11(metric, field, inner_radius=None, mass=None,
                  resolution=48, n_theta=64):
    """Residual of 8 pi m + 2 pi int (chi - 1) dt >= bulk - oint H|grad u|
    + angle term, with every term evaluated numerically."""
    if mass is None:
        if isinstance(metric, FlatMetric):
            mass = 0.0
        else:
            mass = adm_mass(metric, 50.0, method="conformal-flux")
    if inner_radius:
        surface = CoordinateSphere(inner_radius)
        H_term, angle, samples, _ = boundary_terms(field, surface, metric,
                                                   n_theta=n_theta)
        bulk = bkks_bulk(field, metric, "exterior", r0=inner_radius)
        deficit = level_set_deficit(field, resolution=resolution,
                                    inner_radius=inner_radius).deficit
    else:
        H_term, angle, samples = 0.0, 0.0, []
        bulk = 0.0 if isinstance(metric, FlatMetric) else \
            bkks_bulk(field, metric, "exterior", r0=1.0)
        deficit = 0.0
    lhs = 8.0 * np.pi * mass + deficit
    rhs = bulk + H_term + angle
    return {"lhs": float(lhs), "rhs": float(rhs),
            "residual": float(lhs - rhs), "mass": float(mass),
            "chi_deficit": float(deficit), "bulk": float(bulk),
            "H_term": float(H_term), "angle_term": float(angle)}


def corner_term(field, glued, n_theta=64):
    """(1/8 pi) oint (H_Omega - H) |grad u| d sigma on the interface."""
    surface = CoordinateSphere(glued.r0)
    fill_surface = CoordinateSphere(glued.rho_bar)
    nodes, wts = np.polynomial.legendre.leggauss(n_theta)
    thetas = np.arccos(nodes)
    total = 0.0
    for th, w in zip(thetas, wts):
        ff, x, E, s_tt, s_pp = _surface_frame(surface, glued.exterior, th,
                                              None)
        ffo = fundamental_forms(fill_surface, glued.fillin, (th, 0.0))
        g_inv = glued.exterior.inverse(x)
        du = field.grad(x, "exterior")
        norm = float(np.sqrt(du @ g_inv @ du))
        dA = np.sqrt(s_tt * s_pp) / np.sin(th) * w * TWO_PI
        total += (ffo.H - ff.H) * norm * dA
    return total / (8.0 * np.pi)


def verify_thm12(glued, field=None, n_samples=2000, seed=11):
    """Evaluate the fill-in mass inequality on a glued configuration;
    equality is asserted when min |grad u| > 0 (reported)."""
    from .harmonic import solve_asymptotic
    if field is None:
        field = solve_asymptotic(glued, "transmission")
    mass = adm_mass(glued.exterior, 50.0, method="conformal-flux")
    bulk_e = bkks_bulk(field, glued, "exterior")
    bulk_f = bkks_bulk(field, glued, "fillin")
    corner = corner_term(field, glued)

    rng = np.random.default_rng(seed)
    min_grad = np.inf
    for _ in range(n_samples):
        n = rng.normal(size=3)
        n /= np.linalg.norm(n)
        r = glued.r0 * np.exp(rng.uniform(0.0, np.log(50.0)))
        min_grad = min(min_grad, field.grad_norm(r * n, "exterior"))
    if field.interior_slope is not None:
        min_grad = min(min_grad, abs(field.interior_slope))

    rhs = (bulk_e + bulk_f) / (16.0 * np.pi) + corner
    return BkksReport(bulk_exterior=float(bulk_e), bulk_fillin=float(bulk_f),
                      boundary_H_term=0.0, angle_term=0.0,
                      corner_term=float(corner), chi_deficit=0.0,
                      mass=float(mass), residual=float(mass - rhs),
                      min_grad=float(min_grad))


def verify_corollary13(omega_metric, ambient_metric, X, Y, C1=2.0 / 3.0,
                       C2=2.0 / 3.0, H=None, H_omega=None, n_samples=500,
                       radius_range=(1.0, 20.0), seed=5):
    """Pointwise condition report for the drift-field mass positivity
    criteria: R >= C1|X|^2 - 2 div X on the fill-in, R >= C2|Y|^2 - 2 div Y
    outside, and H - <Y, mu> <= H_Omega - <X, nu> on the boundary."""
    if C1 < 2.0 / 3.0 or C2 < 2.0 / 3.0:
        raise ArgumentError("constants C1, C2 must be at least 2/3")
    rng = np.random.default_rng(seed)

    def sweep(metric, Z, C):
        worst = np.inf
        witness = None
        for _ in range(n_samples):
            n = rng.normal(size=3)
            n /= np.linalg.norm(n)
            r = np.exp(rng.uniform(np.log(radius_range[0]),
                                   np.log(radius_range[1])))
            x = r * n
            R = _scalar_curvature(metric, x)
            margin = R - C * Z.norm(metric, x)**2 + 2.0 * Z.divergence(metric, x)
            if margin < worst:
                worst, witness = margin, x
        return worst, witness

    m_omega, w_omega = sweep(omega_metric, X, C1)
    m_amb, w_amb = sweep(ambient_metric, Y, C2)
    boundary_margin = None
    if H is not None and H_omega is not None:
        boundary_margin = float(H_omega - H)   # zero drift on the boundary
    ok = m_omega >= -1e-10 and m_amb >= -1e-10 and \
        (boundary_margin is None or boundary_margin >= -1e-10)
    decay_ok = Y.decay_consistent(np.geomspace(5.0, 200.0, 6)) \
        if Y.decay_order else True
    return {"condition_a_margin": float(m_omega), "witness_a": w_omega,
            "condition_b_margin": float(m_amb), "witness_b": w_amb,
            "boundary_margin": boundary_margin, "decay_warning": not decay_ok,
            "mass_nonnegative_implied": bool(ok)}
