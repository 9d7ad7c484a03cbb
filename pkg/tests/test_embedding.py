"""Isometric embedding of revolution metrics and Brown-York convergence."""

import numpy as np
import pytest

from mass_lab import (CoordinateSphere, Ellipsoid, PreconditionError,
                      RevolutionMetric, brown_york, by_convergence_study,
                      embed_revolution, induced_revolution_metric,
                      round_metric)
from mass_lab.surfaces import ScaledSurface


def by_oracle(rho, m):
    """Closed form for a round sphere of areal radius rho in Schwarzschild."""
    return rho * (1.0 - np.sqrt(1.0 - 2.0 * m / rho))


def test_round_short_circuit():
    emb = embed_revolution(round_metric(3.0))
    assert emb.is_round
    assert abs(emb.H0(0.9) - 2.0 / 3.0) < 1e-12


def test_flat_sphere_brown_york_null(flat):
    s = CoordinateSphere(2.0)
    emb = embed_revolution(induced_revolution_metric(s, flat))
    assert abs(brown_york(s, flat, emb)) < 1e-10


def test_schwarzschild_brown_york_oracle(schw):
    s1 = CoordinateSphere(1.0)
    emb = embed_revolution(induced_revolution_metric(s1, schw))
    # areal radius 9/4: m_BY = (9/4)(1 - 1/3) = 3/2
    assert abs(brown_york(s1, schw, emb) - 1.5) < 1e-6

    s10 = CoordinateSphere(10.0)
    emb = embed_revolution(induced_revolution_metric(s10, schw))
    rho = 10.0 * 1.05**2
    assert abs(brown_york(s10, schw, emb) - by_oracle(rho, 1.0)) < 1e-6
    assert abs(brown_york(s10, schw, emb) - 1.05) < 1e-4


def test_ellipsoid_embedding_consistency(flat):
    """Embedding the induced metric of a flat ellipsoid reproduces its H."""
    from mass_lab import fundamental_forms
    e = Ellipsoid(1.0, 2.0)
    emb = embed_revolution(induced_revolution_metric(e, flat))
    for th in (0.5, 1.0, 1.5, 2.3):
        direct = fundamental_forms(e, flat, (th, 0.0)).H
        assert abs(emb.H0(th) - direct) < 2e-5


def test_embedding_rejects_negative_curvature():
    # E(theta) for a surface whose Weyl condition E - Phi'^2 > 0 fails
    E = lambda th: 1.0
    Phi = lambda th: 1.8 * np.sin(th)
    dPhi = lambda th: 1.8 * np.cos(th)
    rev = RevolutionMetric(E, Phi, dPhi)
    with pytest.raises(PreconditionError):
        embed_revolution(rev)


def test_convergence_study_spheres(schw):
    study = by_convergence_study(schw, lambda r: CoordinateSphere(r),
                                 [10.0, 20.0, 40.0], mass=1.0)
    errs = [abs(row["m_BY"] - 1.0) for row in study["rows"]]
    assert errs[0] > errs[1] > errs[2]
    assert abs(study["rate"] - 1.0) < 0.1
    assert abs(study["limit"] - 1.0) < 1e-3


def test_convergence_rows_flag_positive_curvature(schw):
    study = by_convergence_study(schw, lambda r: CoordinateSphere(r),
                                 [10.0, 20.0, 40.0], mass=1.0,
                                 k_bounds=(0.5, 2.0))
    for row in study["rows"]:
        assert row["min_K"] > 0
        assert row["flag"] == ""
