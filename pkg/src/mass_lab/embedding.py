"""Isometric embedding of revolution-symmetric surface metrics into flat
space, and the Brown-York convergence study built on it."""

import json
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicSpline

from .errors import ArgumentError, CapabilityError, PreconditionError
from .metrics import FlatMetric, adm_mass
from .surfaces import (CoordinateSphere, RevolutionSurface, SurfaceModel,
                       fundamental_forms, principal_bounds)


@dataclass
class RevolutionMetric:
    """ds^2 = E dtheta^2 + Phi^2 dphi^2 on S^2, theta in [0, pi]."""
    E: object            # callable theta -> E
    Phi: object          # callable theta -> Phi
    dPhi: object         # callable theta -> Phi'
    round_radius: float = None     # set when the metric is exactly round

    def pole_residual(self):
        eps = 1e-5
        r1 = abs(self.Phi(eps) / eps - np.sqrt(self.E(eps)))
        r2 = abs(self.Phi(np.pi - eps) / eps - np.sqrt(self.E(np.pi - eps)))
        return max(r1, r2)


def induced_revolution_metric(surface, metric, n=256):
    """Induced metric of a revolution surface in a spherically symmetric
    ambient metric, sampled and splined over theta."""
    ths = np.linspace(1e-4, np.pi - 1e-4, n)
    E_vals = np.empty(n)
    Phi_vals = np.empty(n)
    for i, th in enumerate(ths):
        x = surface.point(th, 0.0)
        d1 = surface.d1(th, 0.0)
        g = metric.components(x)
        E_vals[i] = d1[0] @ g @ d1[0]
        Phi_vals[i] = np.sqrt(d1[1] @ g @ d1[1])
    # a constant E with Phi = sqrt(E) sin(theta) is the round sphere; take
    # the exact closed form rather than splines in that case
    rho0 = np.sqrt(E_vals[0])
    if np.max(np.abs(E_vals - rho0**2)) < 1e-10 * rho0**2 and \
            np.max(np.abs(Phi_vals - rho0 * np.sin(ths))) < 1e-10 * rho0:
        return round_metric(rho0)
    sE = CubicSpline(ths, E_vals)
    sP = CubicSpline(ths, Phi_vals)
    return RevolutionMetric(E=lambda t: float(sE(np.clip(t, ths[0], ths[-1]))),
                            Phi=lambda t: float(sP(np.clip(t, ths[0], ths[-1]))),
                            dPhi=lambda t: float(sP(np.clip(t, ths[0], ths[-1]),
                                                    1)))


def round_metric(rho0):
    """The round metric rho0^2 (dtheta^2 + sin^2 theta dphi^2)."""
    return RevolutionMetric(E=lambda t: rho0**2,
                            Phi=lambda t: rho0 * np.sin(t),
                            dPhi=lambda t: rho0 * np.cos(t),
                            round_radius=float(rho0))


@dataclass
class EmbeddingResult:
    surface: object          # profile RevolutionSurface in flat space
    H0: object               # callable theta -> mean curvature of the image
    margin: float            # min of E - Phi'^2 over the grid
    closure_residual: float  # pole-closure defect of the z-quadrature
    roundtrip_residual: float
    is_round: bool = False


def embed_revolution(rev, n=256):
    """Profile (Phi(theta), z(theta)) with z' = sqrt(E - Phi'^2).

    Round metrics short-circuit to the sphere (H0 = 2/rho).  A negative
    embeddability margin raises with a witness angle."""
    if rev.round_radius is not None:
        rho0 = rev.round_radius
        sphere = CoordinateSphere(rho0)
        return EmbeddingResult(surface=sphere, H0=lambda th: 2.0 / rho0,
                               margin=0.0, closure_residual=0.0,
                               roundtrip_residual=0.0, is_round=True)

    ths = np.linspace(1e-4, np.pi - 1e-4, n)
    disc = np.array([rev.E(t) - rev.dPhi(t) ** 2 for t in ths])
    margin = float(disc.min())
    if margin < 0.0:
        witness = float(ths[int(np.argmin(disc))])
        raise PreconditionError(
            "metric not embeddable as a surface of revolution: "
            f"E - Phi'^2 = {margin:.3e} < 0 at theta = {witness:.4f}",
        )

    def dz(t):
        return -np.sqrt(max(rev.E(t) - rev.dPhi(t) ** 2, 0.0))

    # z by quadrature (z decreasing from the theta=0 pole)
    z_vals = np.empty(n)
    z_vals[0] = 0.0
    for i in range(1, n):
        seg, _ = quad(dz, ths[i - 1], ths[i], limit=100)
        z_vals[i] = z_vals[i - 1] + seg
    z_vals -= 0.5 * (z_vals[0] + z_vals[-1])        # center vertically
    sz = CubicSpline(ths, z_vals)

    profile = RevolutionSurface(
        rho=lambda t: rev.Phi(np.clip(t, ths[0], ths[-1])),
        z=lambda t: float(sz(np.clip(t, ths[0], ths[-1]))),
        drho=lambda t: rev.dPhi(np.clip(t, ths[0], ths[-1])),
        dz=lambda t: dz(np.clip(t, ths[0], ths[-1])))

    flat = FlatMetric()

    def H0(th):
        return float(fundamental_forms(profile, flat, (th, 0.0)).H)

    rt = 0.0
    for t in np.linspace(0.3, np.pi - 0.3, 9):
        d1 = profile.d1(t, 0.0)
        rt = max(rt, abs(d1[0] @ d1[0] - rev.E(t)),
                 abs(d1[1] @ d1[1] - rev.Phi(t) ** 2))

    # pole closure: Phi' -> -+sqrt(E) at the poles for a smooth cap
    closure = rev.pole_residual()
    return EmbeddingResult(surface=profile, H0=H0, margin=margin,
                           closure_residual=float(closure),
                           roundtrip_residual=float(rt))


def rescale_surface(family, r):
    """Sigma~_r = (1/r) Sigma_r in the flat background."""
    if r <= 0:
        raise ArgumentError("scale must be positive")
    surface = family(r) if callable(family) else family
    return surface.scaled(1.0 / r)


def by_convergence_study(metric, family, r_list, mass=None, k_bounds=None,
                         n_theta=64):
    """Brown-York masses of the family at each scale, empirical rate fit,
    and limit estimate."""
    from .mass_terms import brown_york
    if mass is None:
        mass = 0.0 if isinstance(metric, FlatMetric) else \
            adm_mass(metric, 50.0, method="conformal-flux")
    rows = []
    for r in r_list:
        surface = family(r) if callable(family) else family.scaled(r)
        flag = ""
        if k_bounds is not None:
            kmin, kmax, ok = principal_bounds(lambda _: surface, r,
                                              *k_bounds, n_theta=64)
            if not ok:
                flag = "principal-curvature-condition-violated"
        try:
            if isinstance(surface, CoordinateSphere) and \
                    getattr(metric, "spherically_symmetric", False):
                _, B = metric.radial_AB(surface.radius)
                rev = round_metric(float(np.sqrt(B) * surface.radius))
            else:
                rev = induced_revolution_metric(surface, metric)
            emb = embed_revolution(rev)
            min_K = min(fundamental_forms(surface, metric, (t, 0.0)).K
                        for t in np.linspace(0.05, np.pi - 0.05, 25))
            area = _area(surface, metric)
            mby = brown_york(surface, metric, emb, n_theta=n_theta)
            rows.append({"r": float(r), "area": float(area),
                         "min_K": float(min_K), "m_BY": float(mby),
                         "flag": flag})
        except PreconditionError as exc:
            rows.append({"r": float(r), "area": np.nan, "min_K": np.nan,
                         "m_BY": np.nan, "flag": f"error: {exc}"})

    good = [(row["r"], row["m_BY"]) for row in rows
            if np.isfinite(row["m_BY"])]
    rate, limit = np.nan, np.nan
    if len(good) >= 3:
        rs = np.array([g[0] for g in good][-3:])
        ms = np.array([g[1] for g in good][-3:])
        err = np.abs(ms - mass)
        with np.errstate(divide="ignore"):
            p = np.polyfit(np.log(rs), np.log(np.maximum(err, 1e-300)), 1)
        rate = float(-p[0])
        # Richardson-style limit from the last two rows at the fitted rate
        k = (rs[-2] / rs[-1]) ** rate if rate == rate else 0.5
        if abs(1.0 - k) > 1e-12:
            limit = float((ms[-1] - k * ms[-2]) / (1.0 - k))
    return {"rows": rows, "rate": rate, "limit": limit, "mass": float(mass)}


def _area(surface, metric, n_theta=48):
    nodes, wts = np.polynomial.legendre.leggauss(n_theta)
    ths = np.arccos(nodes)
    total = 0.0
    for th, w in zip(ths, wts):
        x = surface.point(th, 0.0)
        d1 = surface.d1(th, 0.0)
        g = metric.components(x)
        s_tt = d1[0] @ g @ d1[0]
        s_pp = d1[1] @ g @ d1[1]
        total += np.sqrt(s_tt * s_pp) / np.sin(th) * w * 2.0 * np.pi
    return total


def study_csv(study, path):
    cols = ("r", "area", "min_K", "m_BY", "flag")
    lines = ["# Brown-York convergence study: " + ",".join(cols)]
    lines.append(",".join(cols))
    for row in study["rows"]:
        lines.append(",".join(
            row["flag"] if c == "flag" else repr(float(row[c]))
            for c in cols))
    text = "\n".join(lines) + "\n"
    with open(path, "w") as fh:
        fh.write(text)
    return path


def study_json_summary(study):
    return json.dumps({"rate": study["rate"], "limit": study["limit"],
                       "mass": study["mass"],
                       "n_rows": len(study["rows"])}, sort_keys=True)
