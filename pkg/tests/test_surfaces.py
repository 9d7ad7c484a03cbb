"""Surface geometry: fundamental forms, meshes, Euler characteristics."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mass_lab import (CoordinateSphere, Ellipsoid, MeshError,
                      euler_characteristic, fundamental_forms,
                      gauss_bonnet_check, icosphere, principal_bounds)
from mass_lab.surfaces import ScaledSurface, annulus_mesh, torus_mesh


def test_unit_sphere_flat_forms(flat):
    s = CoordinateSphere(1.0)
    for th in (0.4, 1.2, 2.6):
        f = fundamental_forms(s, flat, (th, 0.7))
        assert abs(f.H - 2.0) < 1e-8
        assert abs(f.K - 1.0) < 1e-8


def test_sphere_radius_scaling(flat):
    for r in (2.0, 5.0):
        f = fundamental_forms(CoordinateSphere(r), flat, (1.1, 0.3))
        assert abs(f.H - 2.0 / r) < 1e-8
        assert abs(f.K - 1.0 / r**2) < 1e-8


@settings(max_examples=20, deadline=None)
@given(st.floats(0.3, 2.8), st.floats(1.2, 4.0))
def test_scaling_covariance(th, lam):
    # H scales like 1/lambda, K like 1/lambda^2
    from mass_lab import FlatMetric
    flat = FlatMetric()
    e = Ellipsoid(1.0, 2.0)
    f1 = fundamental_forms(e, flat, (th, 0.5))
    f2 = fundamental_forms(ScaledSurface(e, lam), flat, (th, 0.5))
    assert abs(f2.H - f1.H / lam) < 1e-6 * max(1.0, abs(f1.H))
    assert abs(f2.K - f1.K / lam**2) < 1e-6 * max(1.0, abs(f1.K))


def test_ellipsoid_meridian_curvature_range(flat):
    """Semi-axes (1, 1, 2): principal curvatures span [a/c^2, c/a^2]."""
    e = Ellipsoid(1.0, 2.0)
    lo, hi, ok = principal_bounds(lambda r: ScaledSurface(e, r), 1.0,
                                  k1=0.2, k2=2.1)
    assert abs(lo - 0.25) < 1e-3
    assert abs(hi - 2.0) < 1e-3
    assert ok


def test_schwarzschild_sphere_gauss(schw):
    """Unit coordinate sphere, m = 1: K = 16/81 from the Gauss equation."""
    f = fundamental_forms(CoordinateSphere(1.0), schw, (1.0, 0.2))
    assert abs(f.K - 16.0 / 81.0) < 1e-7


def test_gauss_bonnet_sphere(flat, schw):
    for metric in (flat, schw):
        chi = gauss_bonnet_check(CoordinateSphere(1.5), metric)
        assert abs(chi - 2.0) < 1e-6


def test_euler_characteristic_meshes():
    assert euler_characteristic(icosphere(2)) == 2
    assert euler_characteristic(torus_mesh()) == 0
    assert euler_characteristic(annulus_mesh()) == 0


def test_euler_characteristic_rejects_nonmanifold():
    import mass_lab.surfaces as S
    mesh = S.LevelSetMesh(
        vertices=np.array([[0.0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1],
                           [1, 1, 1]]),
        faces=np.array([[0, 1, 2], [0, 1, 3], [0, 1, 4]]))
    with pytest.raises(MeshError):
        euler_characteristic(mesh)


def test_second_form_outward_orientation(flat):
    # outward normal on a sphere about a different center flips H's sign
    s = CoordinateSphere(1.0)
    f_in = fundamental_forms(s, flat, (0.8, 0.1),
                             outward_from=np.array([5.0, 0.0, 0.0]))
    assert f_in.H < 0
