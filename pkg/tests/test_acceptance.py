"""Acceptance gate: every numbered criterion prints one pass/fail line.

Run with ``pytest -v -s tests/test_acceptance.py`` to see the lines as the
criteria execute; each also asserts, so a red criterion fails the suite.
"""

import time

import numpy as np

from mass_lab import (CoordinateSphere, Ellipsoid, FlatMetric, GluedMetric,
                      SchwarzschildIsotropic, adm_mass, bkks_bulk,
                      brown_york, by_convergence_study, collar_integral,
                      conformal_fillin, coordinate_field,
                      corner_regularity_probe, corner_term, embed_revolution,
                      induced_revolution_metric, kato_check,
                      level_set_deficit, mollify, solve_asymptotic,
                      solve_green, solve_grid3d, solve_robin_v,
                      transmission_data, verify_prop11, verify_thm12)
from mass_lab.fillins import BUMP_PEAK

EIGHT_PI = 8.0 * np.pi


def report(num, desc, checks):
    """checks: list of (label, ok) pairs; prints one line for the criterion."""
    ok = all(v for _, v in checks)
    verdict = "PASS" if ok else "FAIL"
    print(f"[{verdict}] criterion {num:2d}: {desc}")
    if not ok:
        bad = ", ".join(label for label, v in checks if not v)
        raise AssertionError(f"criterion {num} failed: {bad}")


def test_criterion_01():
    t0 = time.monotonic()
    flat = FlatMetric()
    checks = []
    checks.append(("adm surface", abs(adm_mass(flat, 50.0)) < 1e-10))
    checks.append(("adm flux",
                   abs(adm_mass(flat, 50.0, method="conformal-flux")) < 1e-10))
    sphere = CoordinateSphere(2.0)
    emb = embed_revolution(induced_revolution_metric(sphere, flat))
    checks.append(("m_BY", abs(brown_york(sphere, flat, emb)) < 1e-10))
    field = coordinate_field(flat)
    checks.append(("bulk ODE",
                   abs(bkks_bulk(field, flat, region="exterior", r0=1.0))
                   < 1e-10))
    deficit = level_set_deficit(field, resolution=24)
    checks.append(("chi deficit", abs(deficit.deficit) < 1e-10))

    grid = solve_grid3d(flat, n=37, half_width=6.0)
    rng = np.random.default_rng(3)
    sup_u = sup_res = sup_hess = 0.0
    for _ in range(40):
        x = rng.uniform(-4.0, 4.0, 3)
        sup_u = max(sup_u, abs(grid.u(x) - x[0]))
        sup_res = max(sup_res, abs(grid.laplace_residual(x)))
        sup_hess = max(sup_hess, float(np.max(np.abs(grid.hess(x)))))
    checks.append(("grid3d u", sup_u < 1e-5))
    checks.append(("grid3d residual", sup_res < 1e-5))
    checks.append(("grid3d bulk integrand", sup_hess < 1e-5))
    dt = time.monotonic() - t0
    checks.append(("runtime < 5 s", dt < 5.0))
    report(1, f"flat nulls: ODE 1e-10, grid3d 1e-5 ({dt:.1f} s)", checks)


def test_criterion_02():
    t0 = time.monotonic()
    checks = []
    for m in (0.5, 1.0, 2.0):
        g = SchwarzschildIsotropic(m)
        flux = adm_mass(g, 100.0, method="conformal-flux")
        checks.append((f"flux m={m}", abs(flux - m) < 1e-12))
        surf = adm_mass(g, 100.0, extrapolate=True)
        checks.append((f"surface m={m}", abs(surf - m) < 1e-3))
    dt = time.monotonic() - t0
    checks.append(("runtime < 10 s", dt < 10.0))
    report(2, f"Schwarzschild ADM: flux exact, surface extrapolates "
              f"({dt:.1f} s)", checks)


def test_criterion_03(glued, transmission_field):
    f = transmission_field
    checks = [("a", abs(f.a - 1.0 / 3.0) < 1e-10),
              ("b", abs(f.b - 1.0 / 8.0) < 1e-10)]
    sup_dev = 0.0
    for th in np.linspace(0.05, np.pi - 0.05, 9):
        x = np.array([np.cos(th), np.sin(th), 0.0])
        sup_dev = max(sup_dev,
                      abs(f.grad_norm(x, side="fillin") - 1.0 / 3.0))
    checks.append(("|grad u| = 1/3", sup_dev < 1e-8))
    report(3, "transmission oracle (a, b) = (1/3, 1/8), |grad u| = 1/3",
           checks)


def test_criterion_04(glued, transmission_field):
    t0 = time.monotonic()
    rep = verify_thm12(glued, transmission_field)
    dt = time.monotonic() - t0
    checks = [
        ("corner = 0.500", abs(rep.corner_term - 0.5) < 1e-3),
        ("bulk/16pi = 0.500",
         abs(rep.bulk_exterior / (16.0 * np.pi) - 0.5) < 1e-2),
        ("RHS = m = 1", abs(rep.residual) / rep.mass < 1e-3),
        ("runtime < 60 s", dt < 60.0),
    ]
    report(4, f"mass formula equality on glued Schwarzschild/ball "
              f"({dt:.1f} s)", checks)


def test_criterion_05():
    flat = FlatMetric()
    field = coordinate_field(flat)
    rep = verify_prop11(flat, field, inner_radius=1.0, mass=0.0)
    checks = [
        ("chi deficit = -4 pi",
         abs(rep["chi_deficit"] - (-4.0 * np.pi)) < 1e-3),
        ("H term = -8 pi", abs(rep["H_term"] - (-EIGHT_PI)) < 1e-3),
        ("angle term = +4 pi",
         abs(rep["angle_term"] - 4.0 * np.pi) < 1e-3),
        ("residual", abs(rep["residual"]) < 1e-3),
    ]
    report(5, "level-set identity on the flat exterior of the unit ball",
           checks)


def test_criterion_06(schw, transmission_field):
    rng = np.random.default_rng(17)
    checks = []
    fields = [("transmission", transmission_field, 1.01),
              ("schwarzschild-dirichlet",
               solve_asymptotic(schw, "dirichlet", r0=1.0), 1.01),
              ("flat-dirichlet",
               solve_asymptotic(FlatMetric(), "dirichlet", r0=1.0), 1.01)]
    for label, f, r_lo in fields:
        samples = []
        for _ in range(10_000):
            x = rng.normal(size=3)
            x *= rng.uniform(r_lo, 25.0) / np.linalg.norm(x)
            samples.append(x)
        slack, _, _ = kato_check(f, samples)
        checks.append((f"{label} slack", slack >= -1e-8))
    g = solve_green(FlatMetric(), 1.0)       # u = 1/r
    samples = []
    for _ in range(10_000):
        x = rng.normal(size=3)
        x *= rng.uniform(1.05, 25.0) / np.linalg.norm(x)
        samples.append(x)
    slack, equality, _ = kato_check(g, samples)
    checks.append(("1/r equality", abs(slack) < 1e-10))
    checks.append(("1/r all equality points", len(equality) == len(samples)))
    report(6, "refined Kato slack >= -1e-8 at 1e4 samples; 1/r equality",
           checks)


def test_criterion_07(flat, schw):
    checks = []
    for metric, r0, oracle, label in [
            (flat, 1.0, 1.0, "flat r0=1"),
            (flat, 2.0, 8.0, "flat r0=2"),
            (schw, 1.0, 9.0 / 8.0, "schwarzschild r0=1")]:
        green = solve_green(metric, r0)
        w = solve_asymptotic(metric, "dirichlet", r0=r0)
        _, _, d = solve_robin_v(metric, green, w, r0=r0)
        checks.append((label, abs(d - oracle) < 1e-10))
    report(7, "Robin coefficients d = 1, 8, 9/8", checks)


def test_criterion_08(flat, schw):
    cf = conformal_fillin(schw, CoordinateSphere(1.0))
    checks = [("cross-check 1e-6", cf.cross_check_error < 1e-6)]
    for r0 in (1.0, 2.0):
        ff = conformal_fillin(flat, CoordinateSphere(r0))
        checks.append((f"flat H* = 2/r0 (r0={r0})",
                       abs(ff.H_star - 2.0 / r0) < 1e-12))
    report(8, "conformal fill-in H* = -H - 4 dG/dmu vs direct curvature",
           checks)


def test_criterion_09(schw):
    s1 = CoordinateSphere(1.0)
    m1 = brown_york(s1, schw, embed_revolution(
        induced_revolution_metric(s1, schw)))
    s10 = CoordinateSphere(10.0)
    m10 = brown_york(s10, schw, embed_revolution(
        induced_revolution_metric(s10, schw)))
    checks = [("m_BY(1) = 1.5", abs(m1 - 1.5) < 1e-6),
              ("m_BY(10) = 1.0500", abs(m10 - 1.05) < 1e-4)]
    report(9, "Brown-York closed-form values", checks)


def test_criterion_10(schw):
    t0 = time.monotonic()
    radii = [10.0, 31.622776601683793, 100.0, 316.22776601683796]
    bounds = [0.051, 0.017, 0.0051, 0.0017]
    study = by_convergence_study(schw, lambda r: CoordinateSphere(r),
                                 radii, mass=1.0)
    checks = []
    for row, bound in zip(study["rows"], bounds):
        err = abs(row["m_BY"] - 1.0)
        checks.append((f"sphere r={row['r']:g}",
                       0.9 * bound <= err <= 1.1 * bound))
    ell = by_convergence_study(schw,
                               lambda r: Ellipsoid(r, 2.0 * r),
                               [10.0, 20.0, 40.0, 80.0], mass=1.0)
    errs = [abs(row["m_BY"] - 1.0) for row in ell["rows"]]
    checks.append(("ellipsoid monotone",
                   all(a > b for a, b in zip(errs, errs[1:]))))
    checks.append(("ellipsoid limit 1.00 +- 2e-2",
                   abs(ell["limit"] - 1.0) < 2e-2))
    dt = time.monotonic() - t0
    checks.append(("runtime < 5 min", dt < 300.0))
    report(10, f"large-sphere/ellipsoid Brown-York convergence ({dt:.1f} s)",
           checks)


def test_criterion_11(glued, transmission_field):
    out = collar_integral(glued, transmission_field, [0.1, 0.05, 0.025])
    checks = [("limit = 8 pi within 5%",
               abs(out["limit"] - EIGHT_PI) < 0.05 * EIGHT_PI)]

    flat_glued = GluedMetric(FlatMetric(), FlatMetric(), 1.0)
    flat_field = solve_asymptotic(flat_glued, "transmission", r0=1.0)
    flat_out = collar_integral(flat_glued, flat_field, [0.1, 0.05])
    checks.append(("flat/flat = 0",
                   all(abs(v) < 1e-6 for v in flat_out["values"])))

    jump = 16.0 / 27.0
    for delta in (0.1, 0.05, 0.025):
        peak = mollify(glued, delta).R(0.0)
        predicted = 2.0 * jump * BUMP_PEAK / delta**2
        checks.append((f"peak delta={delta}",
                       abs(peak / predicted - 1.0) < 0.1))
    report(11, "collar integral -> 8 pi; flat/flat null; delta^-2 peaks",
           checks)


def test_criterion_12(transmission_field):
    probe = corner_regularity_probe(transmission_field)
    checks = [("jump residual < 1e-6",
               probe["jump_residual_sup"] < 1e-6),
              ("tangential quotients Cauchy 1e-4",
               all(g < 1e-4 for g in probe["cauchy_gaps"]))]
    report(12, "corner regularity: normal jump and tangential quotients",
           checks)
