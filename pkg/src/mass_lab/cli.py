"""Config-driven experiment runner.

Usage: mass-lab <experiment> --config <path> [--out <dir>] [--seed <n>]
       [--threads <n>]

Exit codes: 0 success, 1 usage/validation, 2 precondition failure,
3 solver failure.
"""

import argparse
import difflib
import importlib.resources
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import (ArgumentError, CapabilityError, DomainError,
                     MassLabError, PreconditionError, SolverError)
from .metrics import (FlatMetric, GluedMetric, RadialConformalMetric,
                      SchwarzschildIsotropic, adm_mass)
from .surfaces import CoordinateSphere, Ellipsoid, RevolutionSurface

METRIC_KINDS = ("flat", "schwarzschild", "glued-schwarzschild-ball",
                "conformal-bump")
SURFACE_KINDS = ("sphere", "ellipsoid", "revolution-profile")
EXPERIMENTS = ("adm", "brown-york", "bkks-verify", "fillin", "mollify",
               "converge", "kato", "robin")


@dataclass
class ExperimentConfig:
    experiment: str
    raw: dict
    metric: object
    surface: object = None
    seed: int = 0
    tolerances: dict = field(default_factory=dict)
    resolutions: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)


def _nearest(name, options):
    match = difflib.get_close_matches(name, options, n=1)
    return f" (did you mean {match[0]!r}?)" if match else ""


def _build_metric(spec, errors):
    kind = spec.get("kind", "")
    if kind == "flat":
        return FlatMetric()
    if kind == "schwarzschild":
        return SchwarzschildIsotropic(spec.get("mass", 1.0))
    if kind == "glued-schwarzschild-ball":
        return GluedMetric(SchwarzschildIsotropic(spec.get("mass", 1.0)),
                           FlatMetric(), spec.get("r0", 1.0))
    if kind == "conformal-bump":
        amp = spec.get("mass", 0.1)
        phi = lambda r: 1.0 + amp * np.exp(-((r - 3.0) ** 2))
        dphi = lambda r: -2.0 * amp * (r - 3.0) * np.exp(-((r - 3.0) ** 2))
        d2phi = lambda r: amp * (4.0 * (r - 3.0) ** 2 - 2.0) * \
            np.exp(-((r - 3.0) ** 2))
        return RadialConformalMetric(phi, dphi, d2phi, tau=2.0, r_min=0.0)
    errors.append(f"unknown metric kind {kind!r}"
                  + _nearest(kind, METRIC_KINDS))
    return None


def _build_surface(spec, errors):
    if spec is None:
        return None
    kind = spec.get("kind", "")
    if kind == "sphere":
        return CoordinateSphere(spec.get("radius", 1.0))
    if kind == "ellipsoid":
        return Ellipsoid(spec.get("a", 1.0), spec.get("c", 2.0))
    if kind == "revolution-profile":
        path = spec.get("file")
        if not path or not os.path.exists(path):
            errors.append(f"profile file not found: {path!r}")
            return None
        data = np.loadtxt(path)
        from scipy.interpolate import CubicSpline
        sp = CubicSpline(data[:, 0], data[:, 1])
        return RevolutionSurface(
            rho=lambda t: float(sp(t)) * np.sin(t),
            z=lambda t: float(sp(t)) * np.cos(t))
    errors.append(f"unknown surface kind {kind!r}"
                  + _nearest(kind, SURFACE_KINDS))
    return None


def validate_config(path):
    """Parse and validate a config file; returns ExperimentConfig or a list
    of error strings."""
    errors = []
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except OSError as exc:
        return [f"cannot read config: {exc}"]
    except json.JSONDecodeError as exc:
        return [f"config is not valid JSON: {exc}"]

    import jsonschema
    schema = json.loads(importlib.resources.files("mass_lab")
                        .joinpath("config_schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    for err in validator.iter_errors(raw):
        errors.append(err.message)

    exp = raw.get("experiment", "")
    if exp not in EXPERIMENTS:
        errors.append(f"unknown experiment {exp!r}"
                      + _nearest(exp, EXPERIMENTS))
    metric = _build_metric(raw.get("metric", {}), errors) \
        if isinstance(raw.get("metric"), dict) else None
    if metric is None and not errors:
        errors.append("missing metric")
    surface = _build_surface(raw.get("surface"), errors)

    for name, val in raw.get("tolerances", {}).items():
        if not (isinstance(val, (int, float)) and val > 0):
            errors.append(f"tolerance {name!r} must be positive")
    deltas = raw.get("deltas")
    if deltas and any(b >= a for a, b in zip(deltas, deltas[1:])):
        errors.append("delta sequence must be strictly decreasing")

    if errors:
        return errors
    return ExperimentConfig(experiment=exp, raw=raw, metric=metric,
                            surface=surface, seed=raw.get("seed", 0),
                            tolerances=raw.get("tolerances", {}),
                            resolutions=raw.get("resolutions", {}),
                            output=raw.get("output", {}))


@dataclass
class RunReport:
    experiment: str
    input_digest: str
    payload: dict
    wall_time: float
    version: str
    columns: tuple = ()
    rows: tuple = ()


def _digest(raw):
    import hashlib
    return hashlib.sha256(
        json.dumps(raw, sort_keys=True).encode()).hexdigest()[:16]


def _fmt(x):
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def emit_table(report, fmt, path):
    """Write the report as CSV (fixed column order, 17-significant-digit
    floats) or JSON."""
    if fmt == "csv":
        lines = [f"# mass-lab {report.experiment} "
                 f"digest={report.input_digest} columns="
                 + ",".join(report.columns)]
        lines.append(",".join(report.columns))
        for row in report.rows:
            lines.append(",".join(_fmt(v) for v in row))
        text = "\n".join(lines) + "\n"
    elif fmt == "json":
        text = json.dumps({"experiment": report.experiment,
                           "digest": report.input_digest,
                           "payload": report.payload}, sort_keys=True,
                          default=_fmt) + "\n"
    else:
        raise ArgumentError(f"unknown table format {fmt!r}")
    with open(path, "w") as fh:
        fh.write(text)
    return path


# -----------------------------------------------------------------------
# experiment bodies
# -----------------------------------------------------------------------


def _exp_adm(cfg):
    radius = cfg.raw.get("radius", 50.0)
    m_surf = adm_mass(cfg.metric, radius,
                      extrapolate=cfg.raw.get("extrapolate", True))
    try:
        m_flux = adm_mass(cfg.metric, radius, method="conformal-flux")
    except (CapabilityError, ArgumentError):
        m_flux = float("nan")
    return {"radius": radius, "adm_surface": m_surf,
            "adm_conformal_flux": m_flux}, \
        ("radius", "adm_surface", "adm_conformal_flux"), \
        [(radius, m_surf, m_flux)]


def _exp_brown_york(cfg):
    from .embedding import embed_revolution, induced_revolution_metric, \
        round_metric
    from .mass_terms import brown_york
    surface = cfg.surface or CoordinateSphere(1.0)
    if isinstance(surface, CoordinateSphere) and \
            getattr(cfg.metric, "spherically_symmetric", False):
        _, B = cfg.metric.radial_AB(surface.radius)
        rev = round_metric(float(np.sqrt(B) * surface.radius))
    else:
        rev = induced_revolution_metric(surface, cfg.metric)
    emb = embed_revolution(rev)
    mby = brown_york(surface, cfg.metric, emb)
    return {"m_BY": mby}, ("m_BY",), [(mby,)]


def _exp_bkks_verify(cfg):
    from .mass_terms import verify_thm12, BkksReport
    if not isinstance(cfg.metric, GluedMetric):
        raise PreconditionError("bkks-verify needs a glued metric")
    rep = verify_thm12(cfg.metric)
    payload = json.loads(rep.to_json())
    return payload, BkksReport.CSV_COLUMNS, \
        [tuple(payload[c] for c in BkksReport.CSV_COLUMNS)]


def _exp_fillin(cfg):
    from .fillins import conformal_fillin, euclidean_fillin
    surface = cfg.surface or CoordinateSphere(1.0)
    metric = cfg.metric
    fill, jump = euclidean_fillin(surface, metric)
    th = 1.0
    row = {"H": jump.H(th), "H_omega": jump.H_omega(th),
           "jump": jump.jump(th),
           "isometry_residual": jump.isometry_residual}
    if isinstance(surface, CoordinateSphere) and \
            getattr(metric, "spherically_symmetric", False):
        cf = conformal_fillin(metric, surface)
        row["H_star"] = cf.H_star
        row["H_star_cross_check"] = cf.cross_check_error
    cols = tuple(row)
    return row, cols, [tuple(row[c] for c in cols)]


def _exp_mollify(cfg):
    from .fillins import BUMP_PEAK, mollify
    if not isinstance(cfg.metric, GluedMetric):
        raise PreconditionError("mollify needs a glued metric")
    deltas = cfg.raw.get("deltas", [0.1, 0.05, 0.025])
    rows = []
    for d in deltas:
        mm = mollify(cfg.metric, d)
        peak = mm.R(0.0)
        rows.append((d, peak, mm.c0_distance(21), mm.lipschitz_sample(51)))
    return {"deltas": deltas, "peaks": [r[1] for r in rows],
            "bump_peak": BUMP_PEAK}, \
        ("delta", "peak_R", "c0_distance", "lipschitz"), rows


def _exp_converge(cfg):
    from .embedding import by_convergence_study
    r_list = cfg.raw.get("r_list", [10.0, 31.6, 100.0])
    surf_spec = cfg.raw.get("surface", {"kind": "sphere"})
    if surf_spec.get("kind") == "ellipsoid":
        a = surf_spec.get("a", 1.0)
        c = surf_spec.get("c", 2.0)
        family = lambda r: Ellipsoid(a * r, c * r)
    else:
        family = lambda r: CoordinateSphere(r)
    study = by_convergence_study(cfg.metric, family, r_list)
    rows = [(row["r"], row["area"], row["min_K"], row["m_BY"], row["flag"])
            for row in study["rows"]]
    return {"rate": study["rate"], "limit": study["limit"],
            "mass": study["mass"]}, \
        ("r", "area", "min_K", "m_BY", "flag"), rows


def _make_field(cfg):
    from .harmonic import (coordinate_field, radial_field, solve_asymptotic)
    kind = cfg.raw.get("field", "coordinate")
    if kind == "coordinate":
        return coordinate_field(cfg.metric)
    if kind == "inverse-radius":
        return radial_field(cfg.metric,
                            lambda r: (1.0 / r, -1.0 / r**2, 2.0 / r**3))
    if kind == "transmission":
        return solve_asymptotic(cfg.metric, "transmission")
    if kind == "dirichlet":
        return solve_asymptotic(cfg.metric, "dirichlet",
                                r0=cfg.raw.get("radius", 1.0))
    raise ArgumentError(f"unknown field kind {kind!r}")


def _exp_kato(cfg):
    from .harmonic import kato_check
    field = _make_field(cfg)
    rng = np.random.default_rng(cfg.seed)
    n = cfg.raw.get("n_samples", 1000)
    samples = []
    glued = isinstance(cfg.metric, GluedMetric)
    r_lo = cfg.metric.r0 if glued else \
        max(getattr(cfg.metric, "r_min", 0.0) * 1.5, 0.5)
    for _ in range(n):
        u = rng.normal(size=3)
        u /= np.linalg.norm(u)
        samples.append(u * rng.uniform(r_lo + 0.01, 20.0))
    slack, eq, skipped = kato_check(field, samples)
    return {"min_slack": slack, "equality_points": len(eq),
            "skipped": skipped, "n_samples": n}, \
        ("min_slack", "equality_points", "skipped", "n_samples"), \
        [(slack, len(eq), skipped, n)]


def _exp_robin(cfg):
    from .harmonic import solve_asymptotic, solve_green, solve_robin_v
    r0 = cfg.raw.get("radius", 1.0)
    green = solve_green(cfg.metric, r0)
    w = solve_asymptotic(cfg.metric, "dirichlet", r0=r0)
    _, _, d = solve_robin_v(cfg.metric, green, w, r0=r0)
    return {"r0": r0, "d": d, "dG_dmu": green.normal_derivative}, \
        ("r0", "d", "dG_dmu"), [(r0, d, green.normal_derivative)]


_BODIES = {"adm": _exp_adm, "brown-york": _exp_brown_york,
           "bkks-verify": _exp_bkks_verify, "fillin": _exp_fillin,
           "mollify": _exp_mollify, "converge": _exp_converge,
           "kato": _exp_kato, "robin": _exp_robin}


def run_experiment(cfg, out_dir="."):
    """Run one experiment; writes requested outputs, removing partial files
    on failure.  Returns (RunReport, exit_code)."""
    from . import __version__
    t0 = time.time()
    written = []
    try:
        payload, columns, rows = _BODIES[cfg.experiment](cfg)
        report = RunReport(experiment=cfg.experiment,
                           input_digest=_digest(cfg.raw), payload=payload,
                           wall_time=time.time() - t0, version=__version__,
                           columns=columns, rows=tuple(rows))
        for fmt in ("csv", "json"):
            name = cfg.output.get(fmt)
            if name:
                path = os.path.join(out_dir, name)
                written.append(path)
                emit_table(report, fmt, path)
        return report, 0
    except (PreconditionError, DomainError, CapabilityError,
            ArgumentError) as exc:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        print(f"precondition error: {exc}", file=sys.stderr)
        return None, 2
    except (SolverError, MassLabError) as exc:
        for path in written:
            if os.path.exists(path):
                os.remove(path)
        print(f"solver error: {exc}", file=sys.stderr)
        return None, 3


def main(argv=None):
    parser = argparse.ArgumentParser(prog="mass-lab")
    parser.add_argument("experiment", choices=EXPERIMENTS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=".")
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("MASS_LAB_THREADS", "1")))
    args = parser.parse_args(argv)

    cfg = validate_config(args.config)
    if isinstance(cfg, list):
        for err in cfg:
            print(f"config error: {err}", file=sys.stderr)
        return 1
    if cfg.experiment != args.experiment:
        print(f"config error: config is for {cfg.experiment!r}, "
              f"not {args.experiment!r}", file=sys.stderr)
        return 1
    if args.seed is not None:
        cfg.seed = args.seed

    os.makedirs(args.out, exist_ok=True)
    report, code = run_experiment(cfg, out_dir=args.out)
    if report is not None:
        print(json.dumps({"experiment": report.experiment,
                          "digest": report.input_digest,
                          "wall_time": round(report.wall_time, 3),
                          "payload": report.payload}, sort_keys=True,
                         default=_fmt))
    return code


if __name__ == "__main__":
    sys.exit(main())
