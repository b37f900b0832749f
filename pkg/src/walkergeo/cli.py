"""Scenario ingestion, deterministic sampling, check dispatch, reports.

A scenario is a JSON object naming a split-form metric, optional conformal
factor, optional generating-potential data, optional chart change, a point
sample, and a list of check identifiers. Every identifier maps to exactly
one operation of the geometry modules; a check row records the residual of
that operation at one point and passes when

    |residual| < abs + rel * scale

with the scale reported by the check itself (zero for checks whose target
is exactly zero). Reports are byte-identical across runs and across the
--jobs setting for a fixed scenario and engine version.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import numbers
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

from . import __version__, conventions
from .charts import (
    ChartTransform,
    affine_slope_transform,
    commutation_after_transform,
    derived_spec,
    frame_relation,
    operator_transform_check,
    transform_metric_check,
)
from .conformal import (
    ConformalSpec,
    direct_hatted_tables,
    hatted_curvature_direct,
    hatted_curvature_predicted,
    predicted_hatted_tables,
    upsilon,
)
from .geometry import WalkerSpec, riemann_ricci
from .hyperheavenly import (
    HHData,
    hh_lagrangian,
    hh_walker_spec,
    phi_mixed,
    ricci_alignment_residual,
    scalar_hat,
    sym_x_gradient,
)
from .nullgeo import distribution_report, s_vector
from .spinor import (
    classify_quartic,
    curvature_spinors,
    metric_and_frames,
    spin_coefficients,
)

__all__ = [
    "ScenarioError",
    "sample_points",
    "validate_scenario",
    "run_scenario",
    "run_scenario_data",
    "report_json_bytes",
    "report_text",
    "catalog",
    "catalog_names",
    "CHECKS",
    "main",
]


class ScenarioError(ValueError):
    """Scenario rejected; the message names the offending field path."""


# ---------------------------------------------------------------------------
# deterministic sampling

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB


def splitmix64_stream(seed: int):
    """The 64-bit splitmix generator, bit-exact across implementations."""
    state = seed & _MASK
    while True:
        state = (state + _GAMMA) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * _MIX1) & _MASK
        z = ((z ^ (z >> 27)) * _MIX2) & _MASK
        yield z ^ (z >> 31)


def unit_doubles(seed: int):
    """Uniform doubles in [0, 1) from the top 53 bits of each word."""
    for z in splitmix64_stream(seed):
        yield (z >> 11) * 2.0 ** -53


def sample_points(seed, count, box, accept=None):
    """Ordered rejection sample of `count` points uniform in the box.

    box holds per-coordinate (min, max) pairs flattened to eight reals.
    accept, when given, filters candidates; exhausting the attempt budget
    means the acceptance rate is below one percent and the sampler raises.
    """
    if count < 1:
        raise ScenarioError("points.count: must be at least 1")
    if len(box) != 8:
        raise ScenarioError("points.box: expected eight reals")
    bounds = [(float(box[2 * i]), float(box[2 * i + 1])) for i in range(4)]
    for i, (lo, hi) in enumerate(bounds):
        if not lo <= hi:
            raise ScenarioError(
                "points.box: lower bound above upper in slot %d" % i)
    gen = unit_doubles(seed)
    out = []
    attempts = 0
    budget = max(1000, 100 * count)
    while len(out) < count and attempts < budget:
        attempts += 1
        p = tuple(lo + next(gen) * (hi - lo) for lo, hi in bounds)
        if accept is None or accept(p):
            out.append(p)
    if len(out) < count:
        rate = 100.0 * (1.0 - len(out) / attempts)
        raise ScenarioError(
            "points: sampler rejected %.1f%% of %d draws; the exclusion "
            "leaves the box effectively empty" % (rate, attempts))
    return out


# ---------------------------------------------------------------------------
# schema validation


def _fail(path, msg):
    raise ScenarioError("%s: %s" % (path, msg))


def _need_str(obj, path):
    if not isinstance(obj, str) or not obj:
        _fail(path, "expected a nonempty expression string")
    return obj


def _need_real(obj, path):
    if isinstance(obj, bool) or not isinstance(obj, numbers.Real):
        _fail(path, "expected a real number")
    return float(obj)


def _need_int(obj, path):
    if isinstance(obj, bool) or not isinstance(obj, numbers.Integral):
        _fail(path, "expected an integer")
    return int(obj)


def _need_keys(obj, path, required, optional=()):
    if not isinstance(obj, dict):
        _fail(path, "expected an object")
    for k in obj:
        if k not in required and k not in optional:
            _fail("%s.%s" % (path, k), "unknown field")
    for k in required:
        if k not in obj:
            _fail("%s.%s" % (path, k), "missing field")


@dataclass
class Scenario:
    """Validated scenario with the engine objects already constructed."""

    name: str
    ws: WalkerSpec
    cs: Optional[ConformalSpec]
    affine: Optional[tuple]
    data: Optional[HHData]
    ws_hh: Optional[WalkerSpec]
    ct: Optional[ChartTransform]
    points: list
    checks: list
    tol_rel: float
    tol_abs: float


def validate_scenario(obj) -> Scenario:
    _need_keys(obj, "scenario", ("name", "metric", "points", "checks"),
               ("conformal_factor", "hh", "chart", "tol"))
    name = _need_str(obj["name"], "name")

    _need_keys(obj["metric"], "metric", ("a", "b", "c"))
    ws = WalkerSpec(a=_need_str(obj["metric"]["a"], "metric.a"),
                    b=_need_str(obj["metric"]["b"], "metric.b"),
                    c=_need_str(obj["metric"]["c"], "metric.c"))

    cs = None
    affine = None
    if "conformal_factor" in obj:
        cf = obj["conformal_factor"]
        if isinstance(cf, str):
            cs = ConformalSpec(_need_str(cf, "conformal_factor"))
        else:
            _need_keys(cf, "conformal_factor", ("affine",))
            _need_keys(cf["affine"], "conformal_factor.affine", ("M", "N"))
            mm = _need_real(cf["affine"]["M"], "conformal_factor.affine.M")
            nn = _need_real(cf["affine"]["N"], "conformal_factor.affine.N")
            if mm * nn == 0.0:
                _fail("conformal_factor.affine", "slopes must be nonzero")
            affine = (mm, nn)
            cs = ConformalSpec("1/(%r*u + %r*v)" % (mm, nn))

    data = None
    ws_hh = None
    if "hh" in obj:
        _need_keys(obj["hh"], "hh", ("theta", "mu", "Shat"))
        if affine is None:
            _fail("hh", "requires conformal_factor.affine slope data")
        data = HHData(affine[0], affine[1],
                      theta=_need_str(obj["hh"]["theta"], "hh.theta"),
                      mu=_need_str(obj["hh"]["mu"], "hh.mu"),
                      shat=_need_real(obj["hh"]["Shat"], "hh.Shat"))
        ws_hh = hh_walker_spec(data)
    elif affine is not None:
        # slope-only data serves the closed-form scalar and mixed checks
        data = HHData(affine[0], affine[1])

    ct = None
    if "chart" in obj:
        _need_keys(obj["chart"], "chart", ("D", "E"))
        mats = []
        for key in ("D", "E"):
            ent = obj["chart"][key]
            if not isinstance(ent, list) or len(ent) != 4:
                _fail("chart.%s" % key, "expected four expression strings")
            mats.append(tuple(_need_str(ent[i], "chart.%s[%d]" % (key, i))
                              for i in range(4)))
        ct = ChartTransform.from_flat(mats[0], mats[1])

    pts_field = obj["points"]
    if isinstance(pts_field, dict):
        _need_keys(pts_field, "points", ("seed", "count", "box"))
        seed = _need_int(pts_field["seed"], "points.seed")
        count = _need_int(pts_field["count"], "points.count")
        box = pts_field["box"]
        if not isinstance(box, list) or len(box) != 8:
            _fail("points.box", "expected eight reals")
        box = [_need_real(box[i], "points.box[%d]" % i) for i in range(8)]
        accept = _positivity_filter(cs)
        points = sample_points(seed, count, box, accept=accept)
    elif isinstance(pts_field, list):
        if not pts_field:
            _fail("points", "explicit list must not be empty")
        points = []
        for i, entry in enumerate(pts_field):
            if not isinstance(entry, list) or len(entry) != 4:
                _fail("points[%d]" % i, "expected four reals")
            points.append(tuple(
                _need_real(entry[j], "points[%d][%d]" % (i, j))
                for j in range(4)))
    else:
        _fail("points", "expected a sampler object or an explicit list")

    checks = obj["checks"]
    if not isinstance(checks, list) or not checks:
        _fail("checks", "expected a nonempty list of check identifiers")
    for i, cid in enumerate(checks):
        if not isinstance(cid, str) or cid not in CHECKS:
            _fail("checks[%d]" % i,
                  "unknown check %r; known: %s"
                  % (cid, ", ".join(sorted(CHECKS))))
        missing = CHECKS[cid].requires - _present_features(cs, affine, data,
                                                           ws_hh, ct)
        if missing:
            _fail("checks[%d]" % i,
                  "%s requires scenario field(s): %s"
                  % (cid, ", ".join(sorted(missing))))

    tol_rel, tol_abs = 1e-8, 1e-10
    if "tol" in obj:
        _need_keys(obj["tol"], "tol", ("rel", "abs"))
        tol_rel = _need_real(obj["tol"]["rel"], "tol.rel")
        tol_abs = _need_real(obj["tol"]["abs"], "tol.abs")
        if tol_rel < 0 or tol_abs < 0:
            _fail("tol", "tolerances must be nonnegative")

    return Scenario(name=name, ws=ws, cs=cs, affine=affine, data=data,
                    ws_hh=ws_hh, ct=ct, points=points, checks=list(checks),
                    tol_rel=tol_rel, tol_abs=tol_abs)


def _positivity_filter(cs):
    if cs is None:
        return None

    def accept(p):
        # the sampler keeps the factor clear of its singular locus
        try:
            return cs.value(p) > 0.05
        except (ValueError, ZeroDivisionError, OverflowError):
            return False

    return accept


def _present_features(cs, affine, data, ws_hh, ct):
    feats = set()
    if cs is not None:
        feats.add("conformal_factor")
    if affine is not None:
        feats.add("conformal_factor.affine")
    if ws_hh is not None:
        feats.add("hh")
    if ct is not None:
        feats.add("chart")
    return feats


# ---------------------------------------------------------------------------
# check registry

# fixed probe function for the operator-law checks, generic in all four
# coordinates so no transformation term drops out
_PROBE_F = "u*v + 0.3*x*y - 0.2*u*x + y"


def _chk_curvature_zero(sc, p):
    omega = sc.cs.field if sc.cs is not None else None
    m, fr = metric_and_frames(sc.ws, p, 4, omega=omega)
    c = curvature_spinors(m, fr)
    worst = max(max(abs(t) for t in c.psi_minus),
                max(abs(t) for t in c.psi_plus),
                max(abs(c.phi[r][s]) for r in range(3) for s in range(3)),
                abs(c.lam))
    return worst, 0.0


def _chk_coefficients_zero(sc, p):
    omega = sc.cs.field if sc.cs is not None else None
    tables = spin_coefficients(sc.ws, p, 3, omega=omega)
    return max(abs(v) for v in tables.values().values()), 0.0


def _chk_walker_scalar_pin(sc, p):
    m, fr = metric_and_frames(sc.ws, p, 4)
    sval = riemann_ricci(m).scalar.value
    aj, bj, cj = sc.ws.block(p, 2)
    pin = (aj.derivative((2, 0, 0, 0)) + bj.derivative((0, 2, 0, 0))
           + 2.0 * cj.derivative((1, 1, 0, 0)))
    return abs(sval - pin), abs(sval)


def _chk_walker_degeneracy(sc, p):
    m, fr = metric_and_frames(sc.ws, p, 4)
    c = curvature_spinors(m, fr)
    worst = max(abs(c.psi_plus[0]), abs(c.psi_plus[1]),
                max(abs(c.phi[r][0]) for r in range(3)))
    return worst, 0.0


def _chk_wps_multiple(sc, p):
    ws = sc.ws_hh if sc.ws_hh is not None else sc.ws
    m, fr = metric_and_frames(ws, p, 4)
    c = curvature_spinors(m, fr)
    return max(abs(c.psi_plus[0]), abs(c.psi_plus[1])), 0.0


def _chk_weyl_conformal_invariance(sc, p):
    m, fr = metric_and_frames(sc.ws, p, 4)
    base = curvature_spinors(m, fr)
    hat = hatted_curvature_direct(sc.ws, sc.cs, p, order=4)
    worst = max(max(abs(a - b) for a, b in zip(base.psi_minus, hat.psi_minus)),
                max(abs(a - b) for a, b in zip(base.psi_plus, hat.psi_plus)))
    scale = max(max(abs(t) for t in base.psi_minus),
                max(abs(t) for t in base.psi_plus))
    return worst, scale


def _chk_curvature_shift_law(sc, p):
    m, fr = metric_and_frames(sc.ws, p, 4)
    base = curvature_spinors(m, fr)
    pred = hatted_curvature_predicted(base, sc.ws, sc.cs, p, order=4)
    hat = hatted_curvature_direct(sc.ws, sc.cs, p, order=4)
    worst = max(max(abs(pred.phi[r][s] - hat.phi[r][s])
                    for r in range(3) for s in range(3)),
                abs(pred.lam - hat.lam))
    scale = max(max(abs(hat.phi[r][s]) for r in range(3) for s in range(3)),
                abs(hat.lam))
    return worst, scale


def _chk_spin_table_law(sc, p):
    m, fr = metric_and_frames(sc.ws, p, 3)
    tables = spin_coefficients(sc.ws, p, 3)
    ups = upsilon(sc.cs, fr)
    om = sc.cs.value(p)
    worst = 0.0
    for preset in ("plane-down", "plane-up"):
        pred = predicted_hatted_tables(tables, ups, preset, om)
        direct = direct_hatted_tables(sc.ws, sc.cs, preset, p, order=3)
        for nm, val in pred.values().items():
            dv = direct.value(nm)
            worst = max(worst, abs(val - dv) / (1.0 + abs(dv)))
    return worst, 1.0


def _chk_ricci_alignment(sc, p):
    return ricci_alignment_residual(sc.cs, p).max_abs, 0.0


def _chk_einstein_residual(sc, p):
    hat = hatted_curvature_direct(sc.ws, sc.cs, p, order=4)
    worst = max(max(abs(hat.phi[r][s]) for r in range(3) for s in range(3)),
                abs(hat.lam))
    return worst, 0.0


def _chk_scalar_closed_form(sc, p):
    pair = scalar_hat(sc.ws, sc.data, p)
    return abs(pair.formula - pair.direct), abs(pair.direct)


def _chk_mixed_ricci_formula(sc, p):
    pair = phi_mixed(sc.ws, sc.data, p)
    worst = max(abs(f - d) for f, d in zip(pair.formula, pair.direct))
    return worst, max(abs(d) for d in pair.direct)


def _chk_hh_alignment(sc, p):
    hat = hatted_curvature_direct(sc.ws_hh, sc.data.factor_spec(), p, order=4)
    worst = max(max(abs(hat.phi[r][0]) for r in range(3)),
                max(abs(hat.phi[r][1]) for r in range(3)))
    return worst, 0.0


def _chk_hh_residual_zero(sc, p):
    return max(abs(t) for t in sym_x_gradient(sc.data, p)), 0.0


def _chk_hh_lagrangian_zero(sc, p):
    return abs(hh_lagrangian(sc.data, p)), 0.0


def _chk_obstruction_gradient(sc, p):
    inv = s_vector(sc.ws, sc.cs, p)
    return max(inv.gradient_residual, inv.integrability_residual), 0.0


def _chk_obstruction_orthogonality(sc, p):
    rep = distribution_report(sc.ws, sc.cs, p)
    return max(abs(rep.grad_product), rep.null_residual,
               rep.span_residual), 0.0


def _chk_chart_congruence(sc, p):
    return transform_metric_check(sc.ws, sc.ct, p).congruence_residual, 0.0


def _chk_chart_mixing_agreement(sc, p):
    rel = frame_relation(sc.ct, sc.ws, derived_spec(sc.ws, sc.ct), p,
                         tol=float("inf"))
    return max(rel.mixing_gap, rel.det_residual), 0.0


def _chk_chart_operator_law(sc, p):
    oc = operator_transform_check(sc.ct, sc.ws, _PROBE_F, p)
    return max(oc.plane_residual, oc.transverse_residual), 0.0


def _chk_chart_slope_transport(sc, p):
    out = affine_slope_transform(sc.ct, sc.affine, p)
    return out.kernel_residual, 0.0


def _chk_chart_commutation(sc, p):
    return commutation_after_transform(sc.ws, sc.ct, _PROBE_F, p), 0.0


@dataclass(frozen=True)
class CheckDef:
    """One check: owning operation, scenario requirements, description."""

    runner: Callable
    requires: frozenset
    description: str


def _def(runner, requires, description):
    return CheckDef(runner=runner, requires=frozenset(requires),
                    description=description)


CHECKS = {
    "curvature_zero": _def(
        _chk_curvature_zero, (),
        "every curvature-spinor component of the scenario metric vanishes"),
    "coefficients_zero": _def(
        _chk_coefficients_zero, (),
        "every named spin coefficient of the scenario metric vanishes"),
    "walker_scalar_pin": _def(
        _chk_walker_scalar_pin, (),
        "curvature scalar equals the double plane gradient of the block"),
    "walker_degeneracy": _def(
        _chk_walker_degeneracy, (),
        "leading quartic components and the plane Ricci column vanish"),
    "wps_multiple": _def(
        _chk_wps_multiple, (),
        "the primed quartic part has a repeated principal direction"),
    "weyl_conformal_invariance": _def(
        _chk_weyl_conformal_invariance, ("conformal_factor",),
        "stored quartic parts are unchanged by the conformal factor"),
    "curvature_shift_law": _def(
        _chk_curvature_shift_law, ("conformal_factor",),
        "predicted rescaled curvature parts match direct recomputation"),
    "spin_table_law": _def(
        _chk_spin_table_law, ("conformal_factor",),
        "predicted rescaled coefficient tables match direct recomputation"),
    "ricci_alignment": _def(
        _chk_ricci_alignment, ("conformal_factor",),
        "plane-aligned Ricci components of the scaled metric vanish"),
    "einstein_residual": _def(
        _chk_einstein_residual, ("conformal_factor",),
        "trace-free and scalar curvature parts of the scaled metric vanish"),
    "scalar_closed_form": _def(
        _chk_scalar_closed_form, ("conformal_factor.affine",),
        "closed-form scalar part matches the direct value"),
    "mixed_ricci_formula": _def(
        _chk_mixed_ricci_formula, ("conformal_factor.affine",),
        "component formulas for the mixed Ricci block match direct values"),
    "hh_alignment": _def(
        _chk_hh_alignment, ("hh",),
        "derived-block geometry has both aligned Ricci columns zero"),
    "hh_residual_zero": _def(
        _chk_hh_residual_zero, ("hh",),
        "second plane derivatives of the potential functional vanish"),
    "hh_lagrangian_zero": _def(
        _chk_hh_lagrangian_zero, ("hh",),
        "the potential functional itself vanishes"),
    "obstruction_gradient": _def(
        _chk_obstruction_gradient, ("conformal_factor",),
        "obstruction covector equals the normalized factor gradient"),
    "obstruction_orthogonality": _def(
        _chk_obstruction_orthogonality, ("conformal_factor",),
        "obstruction covector is null and orthogonal to the factor gradient"),
    "chart_congruence": _def(
        _chk_chart_congruence, ("chart",),
        "transformed block reproduces the full metric congruence"),
    "chart_mixing_agreement": _def(
        _chk_chart_mixing_agreement, ("chart",),
        "both cross-term expressions for the frame mixing agree"),
    "chart_operator_law": _def(
        _chk_chart_operator_law, ("chart",),
        "plane and transverse derivative operators transform as mapped"),
    "chart_slope_transport": _def(
        _chk_chart_slope_transport, ("chart", "conformal_factor.affine"),
        "affine slope covector transports with zero kernel leakage"),
    "chart_commutation": _def(
        _chk_chart_commutation, ("chart",),
        "operator commutation residual survives the chart change"),
}


# ---------------------------------------------------------------------------
# report assembly


def run_scenario_data(obj, tol_rel=None, tol_abs=None, jobs=1):
    """Validate, run every (check, point) pair, and assemble the report."""
    sc = validate_scenario(obj)
    if tol_rel is not None:
        sc.tol_rel = float(tol_rel)
    if tol_abs is not None:
        sc.tol_abs = float(tol_abs)

    tasks = [(cid, p) for cid in sc.checks for p in sc.points]

    def run_one(task):
        cid, p = task
        row = {"check": cid, "point": [float(t) for t in p]}
        try:
            residual, scale = CHECKS[cid].runner(sc, p)
            row["residual"] = float(residual)
            row["scale"] = float(scale)
            row["pass"] = bool(
                abs(residual) < sc.tol_abs + sc.tol_rel * scale)
        except Exception as exc:  # surfaced per row, report stays well formed
            row["error"] = "%s: %s" % (type(exc).__name__, exc)
            row["pass"] = False
        return row

    if jobs and jobs > 1:
        with ThreadPoolExecutor(max_workers=int(jobs)) as ex:
            rows = list(ex.map(run_one, tasks))
    else:
        rows = [run_one(t) for t in tasks]

    summary = {}
    for cid in sc.checks:
        sub = [r for r in rows if r["check"] == cid]
        residuals = [r["residual"] for r in sub if "residual" in r]
        summary[cid] = {
            "points": len(sub),
            "max_residual": max(residuals) if residuals else None,
            "pass": all(r["pass"] for r in sub),
        }

    return {
        "scenario": sc.name,
        "engine": {
            "package": "walkergeo",
            "version": __version__,
            "conventions_fingerprint": conventions.render(),
        },
        "tolerances": {"rel": sc.tol_rel, "abs": sc.tol_abs},
        "points": [[float(t) for t in p] for p in sc.points],
        "rows": rows,
        "summary": summary,
        "pass": all(r["pass"] for r in rows),
    }


def run_scenario(path, tol_rel=None, tol_abs=None, jobs=1):
    """Load a scenario file and run it."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario: invalid JSON (%s)" % exc) from None
    return run_scenario_data(obj, tol_rel=tol_rel, tol_abs=tol_abs, jobs=jobs)


def report_json_bytes(report) -> bytes:
    return (json.dumps(report, indent=2, sort_keys=True) + "\n").encode()


def report_text(report) -> str:
    lines = ["scenario %s: %s" % (report["scenario"],
                                  "PASS" if report["pass"] else "FAIL")]
    lines.append("tolerances: rel %g, abs %g" % (
        report["tolerances"]["rel"], report["tolerances"]["abs"]))
    lines.append("%-28s %7s %14s  %s" % ("check", "points", "max residual",
                                         "status"))
    for cid, info in report["summary"].items():
        mr = ("%14.6e" % info["max_residual"]
              if info["max_residual"] is not None else "%14s" % "n/a")
        lines.append("%-28s %7d %s  %s" % (
            cid, info["points"], mr, "pass" if info["pass"] else "FAIL"))
    failures = [r for r in report["rows"] if not r["pass"]]
    if failures:
        lines.append("")
        lines.append("failing rows:")
        for r in failures:
            where = ", ".join("%.6g" % t for t in r["point"])
            if "error" in r:
                lines.append("  %s @ (%s): %s" % (r["check"], where,
                                                  r["error"]))
            else:
                lines.append("  %s @ (%s): residual %.6e scale %.6e"
                             % (r["check"], where, r["residual"], r["scale"]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# built-in catalog

_POLY_BLOCK = {
    "a": "0.3*u*u*y + x",
    "b": "v*x*x - u",
    "c": "u*v + 0.2*x*y",
}
_AFFINE_07 = {"affine": {"M": 0.7, "N": -1.3}}
# box keeping the affine factor positive and bounded
_AFFINE_BOX = [0.2, 1.2, -1.0, -0.1, -1.0, 1.0, -1.0, 1.0]

_CATALOG = (
    ("flat", "zero block; everything vanishes identically", {
        "name": "flat",
        "metric": {"a": "0", "b": "0", "c": "0"},
        "points": {"seed": 1, "count": 20,
                   "box": [-1.0, 1.0, -1.0, 1.0, -1.0, 1.0, -1.0, 1.0]},
        "checks": ["curvature_zero", "coefficients_zero"],
        "tol": {"rel": 1e-12, "abs": 1e-12},
    }),
    ("walker-poly", "polynomial block; scalar pin and degeneracy pattern", {
        "name": "walker-poly",
        "metric": dict(_POLY_BLOCK),
        "points": {"seed": 2, "count": 10,
                   "box": [-0.8, 0.8, -0.8, 0.8, -0.8, 0.8, -0.8, 0.8]},
        "checks": ["walker_scalar_pin", "walker_degeneracy", "wps_multiple"],
    }),
    ("conf-null", "flat block with an affine-reciprocal factor; fully flat "
                  "scaled geometry", {
        "name": "conf-null",
        "metric": {"a": "0", "b": "0", "c": "0"},
        "conformal_factor": dict(_AFFINE_07),
        "points": {"seed": 3, "count": 12, "box": list(_AFFINE_BOX)},
        "checks": ["einstein_residual", "ricci_alignment",
                   "scalar_closed_form", "obstruction_gradient",
                   "obstruction_orthogonality"],
    }),
    ("conf-generic", "polynomial block with a generic exponential factor", {
        "name": "conf-generic",
        "metric": dict(_POLY_BLOCK),
        "conformal_factor": "exp(0.1*x + 0.2*u)",
        "points": {"seed": 4, "count": 10,
                   "box": [-0.8, 0.8, -0.8, 0.8, -0.8, 0.8, -0.8, 0.8]},
        "checks": ["curvature_shift_law", "spin_table_law",
                   "weyl_conformal_invariance", "obstruction_gradient",
                   "obstruction_orthogonality"],
    }),
    ("hh-zero", "zero potential data; the scaled geometry is fully flat", {
        "name": "hh-zero",
        "metric": {"a": "0", "b": "0", "c": "0"},
        "conformal_factor": dict(_AFFINE_07),
        "hh": {"theta": "0", "mu": "0", "Shat": 0.0},
        "points": {"seed": 5, "count": 10, "box": list(_AFFINE_BOX)},
        "checks": ["einstein_residual", "hh_alignment", "hh_lagrangian_zero",
                   "hh_residual_zero", "ricci_alignment",
                   "scalar_closed_form", "mixed_ricci_formula",
                   "wps_multiple"],
    }),
    ("hh-theta", "product potential; an exact solution of the reduced "
                 "equation", {
        "name": "hh-theta",
        # block derived from the potential: a=-2Nu, b=-2Mv, c=0
        "metric": {"a": "2.6*u", "b": "-1.4*v", "c": "0"},
        "conformal_factor": dict(_AFFINE_07),
        "hh": {"theta": "u*v", "mu": "0", "Shat": 0.0},
        "points": {"seed": 6, "count": 10, "box": list(_AFFINE_BOX)},
        "checks": ["hh_alignment", "hh_residual_zero", "wps_multiple",
                   "scalar_closed_form", "mixed_ricci_formula",
                   "ricci_alignment", "walker_scalar_pin"],
    }),
    ("hh-curved", "product potential with nonzero scalar part", {
        "name": "hh-curved",
        # derived block picks up constant terms from the scalar part
        "metric": {"a": "u + 0.025", "b": "-2*v + 0.1", "c": "-0.05"},
        "conformal_factor": {"affine": {"M": 1.0, "N": -0.5}},
        "hh": {"theta": "u*v", "mu": "0", "Shat": 1.2},
        "points": {"seed": 7, "count": 10,
                   "box": [0.3, 1.3, -1.2, -0.2, -1.0, 1.0, -1.0, 1.0]},
        "checks": ["hh_alignment", "wps_multiple", "scalar_closed_form",
                   "mixed_ricci_formula", "ricci_alignment"],
    }),
    ("chart-identity", "trivial chart change; every transform law collapses "
                       "to an identity", {
        "name": "chart-identity",
        "metric": dict(_POLY_BLOCK),
        "conformal_factor": dict(_AFFINE_07),
        "chart": {"D": ["1", "0", "0", "1"], "E": ["0", "0", "0", "0"]},
        "points": {"seed": 8, "count": 10, "box": list(_AFFINE_BOX)},
        "checks": ["chart_congruence", "chart_mixing_agreement",
                   "chart_operator_law", "chart_slope_transport",
                   "chart_commutation"],
    }),
)


def catalog_names():
    return [name for name, _, _ in _CATALOG]


def catalog():
    """Deep copies of the built-in scenarios, in catalog order."""
    return [copy.deepcopy(body) for _, _, body in _CATALOG]


def catalog_entry(name):
    for nm, _, body in _CATALOG:
        if nm == name:
            return copy.deepcopy(body)
    raise KeyError(name)


# ---------------------------------------------------------------------------
# command line


def _fmt_component(z) -> str:
    z = complex(z)
    if z.imag == 0.0:
        return "%.6g" % z.real
    return "%.6g%+.6gi" % (z.real, z.imag)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="walkergeo",
        description="Residual checks for split-form neutral four-geometries")
    sub = parser.add_subparsers(dest="command", required=True)

    pc = sub.add_parser("check", help="run a scenario file or catalog entry")
    pc.add_argument("scenario", help="path to a scenario JSON file, or a "
                                     "catalog entry name")
    pc.add_argument("--tol-rel", type=float, default=None)
    pc.add_argument("--tol-abs", type=float, default=None)
    pc.add_argument("--jobs", type=int, default=1)
    pc.add_argument("--out", default=None, help="write the JSON report here")

    sub.add_parser("catalog", help="list the built-in scenarios")

    pl = sub.add_parser("classify", help="classify a quartic by its root "
                                         "multiplicities")
    pl.add_argument("--psitilde", required=True,
                    help="five comma-separated components")

    sub.add_parser("conventions", help="print the pinned-convention "
                                       "fingerprint")

    args = parser.parse_args(argv)

    if args.command == "catalog":
        for name, desc, _ in _CATALOG:
            print("%-16s %s" % (name, desc))
        return 0

    if args.command == "conventions":
        sys.stdout.write(conventions.render())
        return 0

    if args.command == "classify":
        parts = args.psitilde.split(",")
        if len(parts) != 5:
            print("classify: --psitilde needs five comma-separated reals",
                  file=sys.stderr)
            return 2
        try:
            q = [float(t) for t in parts]
        except ValueError:
            print("classify: --psitilde needs five comma-separated reals",
                  file=sys.stderr)
            return 2
        res = classify_quartic(q)
        print("multiplicity pattern: %s" % res.label)
        gap = "inf" if math.isinf(res.gap) else "%.6e" % res.gap
        print("separation gap: %s" % gap)
        for direction, mult, real in res.directions:
            print("  direction (%s, %s)  multiplicity %d%s"
                  % (_fmt_component(direction[0]),
                     _fmt_component(direction[1]), mult,
                     "" if real else "  [complex]"))
        return 0

    # check
    try:
        if os.path.exists(args.scenario):
            report = run_scenario(args.scenario, tol_rel=args.tol_rel,
                                  tol_abs=args.tol_abs, jobs=args.jobs)
        elif args.scenario in catalog_names():
            report = run_scenario_data(catalog_entry(args.scenario),
                                       tol_rel=args.tol_rel,
                                       tol_abs=args.tol_abs, jobs=args.jobs)
        else:
            print("check: %r is neither a file nor a catalog entry"
                  % args.scenario, file=sys.stderr)
            return 2
    except ScenarioError as exc:
        print("scenario error: %s" % exc, file=sys.stderr)
        return 2
    sys.stdout.write(report_text(report))
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(report_json_bytes(report))
    return 0 if report["pass"] else 1


if __name__ == "__main__":
    sys.exit(main())
