"""Bulk, boundary, corner, and topological terms of the mass formula."""

import numpy as np
import pytest

from mass_lab import (ArgumentError, CoordinateSphere, FlatMetric,
                      GluedMetric, PreconditionError, RevolutionSurface,
                      SchwarzschildIsotropic, VectorFieldModel, bkks_bulk,
                      boundary_terms, brown_york, coordinate_field,
                      corner_term, embed_revolution, induced_revolution_metric,
                      level_set_deficit, solve_asymptotic, transmission_data,
                      verify_corollary13, verify_thm12)

EIGHT_PI = 8.0 * np.pi


def test_flat_bulk_null(flat):
    f = coordinate_field(flat)
    assert abs(bkks_bulk(f, flat, region="exterior", r0=1.0)) < 1e-10


def test_flat_boundary_terms_unit_sphere(flat):
    """u = x1 on the unit sphere: -H-term = -8 pi, angle term = +4 pi."""
    f = coordinate_field(flat)
    H_term, angle_term, samples, excluded = boundary_terms(
        f, CoordinateSphere(1.0), flat)
    assert abs(H_term - (-EIGHT_PI)) < 1e-10
    assert abs(angle_term - 4.0 * np.pi) < 1e-8
    assert excluded <= 2


def test_flat_deficit_unit_ball(flat):
    f = coordinate_field(flat)
    d = level_set_deficit(f, inner_radius=1.0)
    assert abs(d.deficit - (-4.0 * np.pi)) < 1e-12
    assert set(d.chi) <= {0, 1}
    assert d.transitions == (-1.0, 1.0)


def test_glued_deficit_vanishes(transmission_field):
    d = level_set_deficit(transmission_field)
    assert np.all(d.chi == 1)
    assert abs(d.deficit) < 1e-12


def test_glued_bulk_equality_case(glued, transmission_field):
    val = bkks_bulk(transmission_field, glued, region="exterior", r0=1.0)
    assert abs(val - EIGHT_PI) < 0.25
    assert abs(bkks_bulk(transmission_field, glued, region="fillin",
                         r0=1.0)) < 1e-10


def test_corner_term_oracle(glued, transmission_field):
    assert abs(corner_term(transmission_field, glued) - 0.5) < 1e-3


@pytest.mark.parametrize("m", [0.5, 1.0, 2.0])
def test_thm12_equality_family(m):
    glued = GluedMetric(SchwarzschildIsotropic(m), FlatMetric(), 1.0)
    field = solve_asymptotic(glued, "transmission", r0=1.0)
    rep = verify_thm12(glued, field)
    assert rep.min_grad > 0.0
    assert abs(rep.residual) / m < 1e-3


def test_thm12_report_columns(glued, transmission_field):
    rep = verify_thm12(glued, transmission_field)
    row = rep.to_csv_row()
    assert len(row.split(",")) == len(rep.CSV_COLUMNS)
    assert abs(rep.corner_term - 0.5) < 1e-3
    assert abs(rep.mass - 1.0) < 1e-12


def test_brown_york_rejects_nonconvex(flat):
    """A pinched dumbbell of revolution has K < 0 at the waist."""
    rho = lambda th: np.sin(th) * (1.0 - 0.75 * np.sin(th) ** 2) + 1e-9
    z = lambda th: np.cos(th)
    s = RevolutionSurface(z, rho)
    rev = induced_revolution_metric(s, flat)
    with pytest.raises(PreconditionError):
        embed_revolution(rev)


def test_corollary13_zero_drift(glued):
    zero = VectorFieldModel(lambda x: np.zeros(3), decay_order=0.0)
    rep = verify_corollary13(glued.fillin, glued.exterior, zero, zero,
                             H=2.0, H_omega=2.0, n_samples=100)
    assert rep["mass_nonnegative_implied"]
    assert rep["condition_a_margin"] >= -1e-10
    assert rep["boundary_margin"] == 0.0


def test_corollary13_rejects_small_constants(glued):
    zero = VectorFieldModel(lambda x: np.zeros(3))
    with pytest.raises(ArgumentError):
        verify_corollary13(glued.fillin, glued.exterior, zero, zero, C1=0.5)


def test_bulk_quadrature_error_estimate(glued, transmission_field):
    val, err = bkks_bulk(transmission_field, glued, region="exterior",
                         r0=1.0, return_error=True)
    assert err < 0.05
    assert abs(val - EIGHT_PI) < max(0.25, 10 * err)
