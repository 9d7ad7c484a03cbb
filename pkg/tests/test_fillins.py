"""Fill-in construction, conformal fill-in, and collar mollification."""

import numpy as np
import pytest

from mass_lab import (ArgumentError, CoordinateSphere, FlatMetric,
                      GluedMetric, collar_integral, conformal_fillin,
                      euclidean_fillin, mollify, solve_asymptotic)
from mass_lab.fillins import BUMP_PEAK

EIGHT_PI = 8.0 * np.pi


def test_euclidean_fillin_schwarzschild_sphere(schw):
    """Unit sphere, m = 1: round ball of radius 9/4, H jump 16/27."""
    fill, jump = euclidean_fillin(CoordinateSphere(1.0), schw)
    assert abs(fill.radius - 9.0 / 4.0) < 1e-10
    th = 1.1
    assert abs(jump.H(th) - 8.0 / 27.0) < 1e-8
    assert abs(jump.H_omega(th) - 8.0 / 9.0) < 1e-10
    assert abs(jump.jump(th) - 16.0 / 27.0) < 1e-8
    assert jump.isometry_residual < 1e-10


def test_euclidean_fillin_flat_is_trivial(flat):
    fill, jump = euclidean_fillin(CoordinateSphere(2.0), flat)
    assert abs(fill.radius - 2.0) < 1e-12
    assert abs(jump.jump(0.7)) < 1e-10


def test_conformal_fillin_schwarzschild(schw):
    cf = conformal_fillin(schw, CoordinateSphere(1.0))
    # H* = -H - 4 dG/dmu with H = 8/27, dG/dmu = -8/27
    assert abs(cf.H_star - 8.0 / 9.0) < 1e-9
    assert cf.cross_check_error < 1e-6


def test_conformal_fillin_flat_inversion(flat):
    for r0 in (1.0, 2.5):
        cf = conformal_fillin(flat, CoordinateSphere(r0))
        assert abs(cf.H_star - 2.0 / r0) < 1e-10
        assert cf.cross_check_error < 1e-8


def test_mollify_rejects_wide_collar(glued):
    with pytest.raises(ArgumentError):
        mollify(glued, 0.5)


def test_mollified_peak_scaling(glued):
    """R_delta(0) follows the 2 (H_Omega - H) phi_m(0) / delta^2 law."""
    jump = 16.0 / 27.0
    for delta in (0.1, 0.05):
        mm = mollify(glued, delta)
        predicted = 2.0 * jump * BUMP_PEAK / delta**2
        assert abs(mm.R(0.0) / predicted - 1.0) < 0.1


def test_mollified_c0_convergence(glued):
    dists = [mollify(glued, d).c0_distance(21) for d in (0.1, 0.05, 0.025)]
    assert dists[0] > dists[1] > dists[2]
    assert dists[2] < 1e-3


def test_collar_integral_limit(glued, transmission_field):
    out = collar_integral(glued, transmission_field, [0.1, 0.05, 0.025])
    assert abs(out["limit"] - EIGHT_PI) < 0.05 * EIGHT_PI
    # the collar values themselves approach the limit monotonically
    errs = [abs(v - EIGHT_PI) for v in out["values"]]
    assert errs[0] > errs[1] > errs[2]


def test_collar_integral_flat_corner_free(flat):
    gf = GluedMetric(FlatMetric(), FlatMetric(), 1.0)
    f = solve_asymptotic(gf, "transmission", r0=1.0)
    out = collar_integral(gf, f, [0.1, 0.05])
    assert all(abs(v) < 1e-6 for v in out["values"])
