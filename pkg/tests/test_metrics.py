"""Metric models, curvature samples, and the ADM mass integrals."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mass_lab import (DomainError, FlatMetric, GluedMetric,
                      SchwarzschildIsotropic, adm_mass, decay_report,
                      geometry_at, richardson)
from mass_lab.metrics import sphere_grid


def test_flat_adm_both_methods(flat):
    assert abs(adm_mass(flat, 50.0)) < 1e-10
    assert abs(adm_mass(flat, 50.0, method="conformal-flux")) < 1e-12


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
def test_schwarzschild_conformal_flux_exact(m):
    g = SchwarzschildIsotropic(m)
    for radius in (10.0, 100.0):
        assert abs(adm_mass(g, radius, method="conformal-flux") - m) < 1e-12


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
def test_schwarzschild_surface_integral_extrapolates(m):
    g = SchwarzschildIsotropic(m)
    val = adm_mass(g, 100.0, extrapolate=True)
    assert abs(val - m) < 1e-3


def test_schwarzschild_scalar_flat():
    g = SchwarzschildIsotropic(1.0)
    for x in ([2.0, 0.3, -0.1], [0.0, 5.0, 1.0]):
        sample = geometry_at(g, np.asarray(x))
        assert abs(sample.R) < 1e-7


def test_decay_report_rates(flat, schw):
    rep = decay_report(schw, [10.0, 30.0, 100.0])
    assert 0.8 < rep["tau_g"] < 1.2
    assert rep["tau_exceeds_half"]
    assert rep["scalar_curvature_integrable"]


def test_richardson_linear_sequence():
    # f(h) = 3 + 2 h with h halved each step (scale doubled)
    vals = [3 + 2 * h for h in (0.4, 0.2, 0.1)]
    lim = richardson(vals, [1.0, 2.0, 4.0], order=1)
    assert abs(lim - 3.0) < 1e-12


def test_sphere_grid_weights():
    theta, phi, w = sphere_grid(32, 64)
    assert abs(w.sum() - 4 * np.pi) < 1e-10
    x1 = np.cos(theta)[:, None] * np.ones_like(phi)[None, :]
    assert abs((w * x1).sum()) < 1e-12
    assert abs((w * x1 * x1).sum() - 4 * np.pi / 3) < 1e-10


def test_glued_metric_sides(glued):
    x = np.array([0.5, 0.0, 0.0])
    g_in = glued.components(x, side="fillin")
    assert np.allclose(g_in, np.eye(3))
    y = np.array([2.0, 0.0, 0.0])
    g_out = glued.components(y)
    phi = (1.0 + 0.5 / 2.0) ** 4
    assert np.allclose(g_out, phi * np.eye(3))


def test_glued_interface_needs_side(glued):
    x = np.array([1.0, 0.0, 0.0])
    with pytest.raises(DomainError):
        glued.components(x)
    assert np.allclose(glued.components(x, side="fillin"), np.eye(3))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=3, max_size=3))
def test_metric_symmetric_positive_definite(x):
    g = SchwarzschildIsotropic(1.0)
    x = np.asarray(x)
    if np.linalg.norm(x) < 0.6:
        return
    gx = g.components(x)
    assert np.allclose(gx, gx.T)
    assert np.all(np.linalg.eigvalsh(gx) > 0)
    assert np.allclose(g.inverse(x) @ gx, np.eye(3), atol=1e-10)


def test_christoffel_matches_fd(schw):
    x = np.array([1.7, -0.4, 0.9])
    gam = schw.christoffel(x)
    h = 1e-5
    dg = np.empty((3, 3, 3))
    for k in range(3):
        e = np.zeros(3)
        e[k] = h
        dg[k] = (schw.components(x + e) - schw.components(x - e)) / (2 * h)
    ginv = schw.inverse(x)
    ref = np.empty((3, 3, 3))
    for k in range(3):
        for i in range(3):
            for j in range(3):
                ref[k, i, j] = 0.5 * sum(
                    ginv[k, l] * (dg[i][l, j] + dg[j][l, i] - dg[l][i, j])
                    for l in range(3))
    assert np.allclose(gam, ref, atol=1e-6)
