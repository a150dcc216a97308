"""Config-driven runs behind the ``extremal``, ``envelope`` and ``verify`` commands.

Each run returns a report dict and a pass flag and writes its artifacts to
``out``.  The report is updated in place as stages finish, so a caller that
catches an exception still holds the partial result.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from . import config as cfg
from . import io
from .cross import connected_components, envelope_mask, envelope_volume_fraction
from .extension import (cauchy_reconstruct, fit_rational, sample_cross, uniqueness_residual,
                        verify_extension)
from .extremal import ScalarField, regularize_usc, solve_relative_extremal
from .geometry import Shape, rasterize
from .singularity import envelope_trace

DEFAULT_THRESHOLDS = {"max_rel_error": 1e-6, "uniqueness": 1e-10, "removability": 1e-8}


def _out(out) -> Path | None:
    if out is None:
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def factor_field(omega: Shape, a: Shape, grid, solver: dict | None, tol: float | None = None) -> ScalarField:
    """Extremal field of ``(omega, a)`` on ``grid`` with the solver options of a config."""
    params = cfg.solver(solver, tol)
    specs = {"omega_spec": omega, "a_spec": a} if cfg.fitted(solver) else {}
    return solve_relative_extremal(rasterize(omega, grid), rasterize(a, grid), params, **specs)


def run_extremal(doc: dict, out=None, tol: float | None = None, report: dict | None = None):
    report = {} if report is None else report
    out = _out(out)
    grid = cfg.grid(doc["grid"])
    field = factor_field(cfg.shape(doc["omega"]), cfg.shape(doc["a"]), grid, doc.get("solver"), tol)
    if doc.get("regularize", False):
        field = regularize_usc(field)
    v = field.values[field.defined()]
    report.update({"max": float(v.max()), "min": float(v.min()),
                   "iterations": field.iterations, "residual": field.residual})
    if out is not None:
        io.field_to_csv(field, out / "field.csv")
        io.field_to_pgm(field, out / "field.pgm")
        io.write_json(report, out / "summary.json")
    return report, True


def envelope_fields(cross_doc: dict, grid_z, grid_w, solver: dict | None, tol: float | None = None):
    cross = cfg.cross(cross_doc)
    omega_a = factor_field(cross.d_spec, cross.a_spec, grid_z, solver, tol)
    omega_b = factor_field(cross.g_spec, cross.b_spec, grid_w, solver, tol)
    return omega_a, omega_b


def run_envelope(doc: dict, out=None, tol: float | None = None, report: dict | None = None,
                 fields: tuple[ScalarField, ScalarField] | None = None):
    """``fields`` overrides the solved factor fields (used to inject artificial inputs)."""
    report = {} if report is None else report
    out = _out(out)
    grid_z, grid_w = cfg.grid(doc["grid_z"]), cfg.grid(doc["grid_w"])
    if fields is None:
        fields = envelope_fields(doc["cross"], grid_z, grid_w, doc.get("solver"), tol)
    omega_a, omega_b = fields
    env = envelope_mask(omega_a, omega_b)
    report["volume_fraction"] = envelope_volume_fraction(env, omega_a.domain_mask, omega_b.domain_mask)
    if out is not None:
        io.product_mask_to_rle(env, out / "envelope_rle.csv")
    report["component_count"] = connected_components(env, keep_labels=False).count if env.any() else 0
    if out is not None:
        io.write_json(report, out / "summary.json")
    return report, True


def run_verify(doc: dict, out=None, seed: int | None = None, tol: float | None = None,
               report: dict | None = None):
    """Sample, fit and verify; then the optional uniqueness and removability checks."""
    report = {} if report is None else report
    out = _out(out)
    thresholds = {**DEFAULT_THRESHOLDS, **doc.get("thresholds", {})}
    cross = cfg.cross(doc["cross"])
    m = cfg.singular_set(doc["singular_set"])
    truth = cfg.ground_truth(doc["ground_truth"], m)
    strategy = cfg.sampling(doc.get("sampling"), seed)
    test_seed = strategy.seed
    checks = {}

    samples = sample_cross(truth, cross, m, strategy)
    fit = fit_rational(samples, m, doc["fit"]["m"], tuple(doc["fit"]["deg"]))
    report.update({"n_samples": len(samples), "conditioning": fit.conditioning,
                   "coefficients": [[complex(c) for c in row] for row in fit.coeffs]})

    env_doc = doc["envelope"]
    grid_z, grid_w = cfg.grid(env_doc["grid_z"]), cfg.grid(env_doc["grid_w"])
    omega_a, omega_b = envelope_fields(doc["cross"], grid_z, grid_w, env_doc.get("solver"), tol)
    env = envelope_mask(omega_a, omega_b)
    trace = envelope_trace(m, env)
    reference = truth
    if "control" in doc:
        reference = truth.shifted(cfg.complex_value(doc["control"]["offset"]))
        report["control_offset"] = complex(cfg.complex_value(doc["control"]["offset"]))
    err = verify_extension(fit, reference, env, trace, doc.get("n_test", 500), test_seed)
    report.update({"max_rel_error": err.max_rel_error, "mean_rel_error": err.mean_rel_error,
                   "n_test_points": err.n_test_points, "region": err.region})
    checks["max_rel_error"] = err.max_rel_error <= thresholds["max_rel_error"]

    if "uniqueness" in doc:
        deg = tuple(doc["uniqueness"].get("deg", doc["fit"]["deg"]))
        res = uniqueness_residual(cross, m, fit.m, deg, strategy)
        report["uniqueness_residual"] = res
        checks["uniqueness"] = res <= thresholds["uniqueness"]

    if "removability" in doc:
        r = doc["removability"]
        center = tuple(cfg.complex_value(c) for c in r["center"])
        value = cauchy_reconstruct(fit, center, tuple(r["radii"]), r.get("n_quad", 64))
        exact = complex(reference(np.array([center[0]]), np.array([center[1]]))[0])
        report["removability"] = {"value": value, "exact": exact, "error": abs(value - exact)}
        checks["removability"] = abs(value - exact) <= thresholds["removability"]

    passed = all(checks.values())
    report["thresholds"] = thresholds
    report["checks"] = checks
    report["passed"] = passed
    if out is not None:
        io.write_json(report, out / "report.json")
    return report, passed
