"""Numerical mass formulas on explicit asymptotically flat 3-manifolds:
ADM and Brown-York masses, harmonic-function mass identities, fill-ins,
and corner mollification, verified against closed-form oracles."""

__version__ = "0.1.0"

from .errors import (ArgumentError, CapabilityError, DegeneracyError,
                     DomainError, MassLabError, MeshError, PreconditionError,
                     SingularityError, SolverError)
from .metrics import (ConformallyFlatMetric, FlatMetric, GluedMetric,
                      MetricModel, RadialConformalMetric,
                      SchwarzschildIsotropic, SphericallySymmetricMetric,
                      VectorFieldModel, adm_mass, decay_report, geometry_at,
                      richardson)
from .surfaces import (CoordinateSphere, Ellipsoid, LevelSetMesh,
                       RevolutionSurface, ScaledSurface, SurfaceModel,
                       euler_characteristic, fundamental_forms,
                       gauss_bonnet_check, icosphere, principal_bounds)
from .harmonic import (Grid3DField, HarmonicField, RadialMode,
                       TransmissionData, coordinate_field,
                       corner_regularity_probe, foliation_profile_check,
                       kato_check, radial_field, solve_asymptotic,
                       solve_green, solve_grid3d, solve_robin_v,
                       transmission_data)
from .mass_terms import (AngleTermSample, BkksReport, LevelSetDeficit,
                         bkks_bulk, boundary_terms, brown_york, corner_term,
                         level_set_deficit, verify_corollary13, verify_prop11,
                         verify_thm12)
from .fillins import (CornerJump, FillinModel, MollifiedMetric,
                      collar_integral, conformal_fillin, euclidean_fillin,
                      mollify)
from .embedding import (EmbeddingResult, RevolutionMetric,
                        by_convergence_study, embed_revolution,
                        induced_revolution_metric, rescale_surface,
                        round_metric)
