"""Scenario engine: sampler determinism, schema rejection, report shape."""

import json

import pytest

from walkergeo import conventions
from walkergeo.cli import (
    CHECKS,
    ScenarioError,
    catalog,
    catalog_entry,
    catalog_names,
    main,
    report_json_bytes,
    run_scenario,
    run_scenario_data,
    sample_points,
    splitmix64_stream,
    unit_doubles,
    validate_scenario,
)

# published reference words for the 64-bit splitmix stream at seed 0
SPLITMIX_SEED0 = (
    0xE220A8397B1DCDAF,
    0x6E789E6AA1B965F4,
    0x06C45D188009454F,
    0xF88BB8A8724C81EC,
    0x1B39896A51A8749B,
)


def poly_scenario(**over):
    base = {
        "name": "t",
        "metric": {"a": "0.3*u*u*y + x", "b": "v*x*x - u",
                   "c": "u*v + 0.2*x*y"},
        "points": {"seed": 2, "count": 3,
                   "box": [-0.8, 0.8, -0.8, 0.8, -0.8, 0.8, -0.8, 0.8]},
        "checks": ["walker_scalar_pin"],
    }
    base.update(over)
    return base


def test_splitmix_reference_vector():
    gen = splitmix64_stream(0)
    assert tuple(next(gen) for _ in range(5)) == SPLITMIX_SEED0


def test_unit_doubles_top_bits():
    gen = unit_doubles(0)
    for word in SPLITMIX_SEED0:
        d = next(gen)
        assert d == (word >> 11) * 2.0 ** -53
        assert 0.0 <= d < 1.0


def test_sample_points_deterministic():
    box = [0.0, 1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]
    assert sample_points(42, 3, box) == sample_points(42, 3, box)
    # frozen draw pins the stream-to-point mapping
    first = sample_points(42, 1, box)[0]
    assert first == pytest.approx(
        (0.74156487877182331, 0.1599103928769201,
         0.27860113025513866, 0.34419071652363753), abs=0.0)


def test_sample_points_respects_box():
    box = [2.0, 3.0, -1.0, -0.5, 0.0, 0.25, 10.0, 10.0]
    for p in sample_points(7, 50, box):
        assert 2.0 <= p[0] < 3.0
        assert -1.0 <= p[1] < -0.5
        assert 0.0 <= p[2] < 0.25
        assert p[3] == 10.0


def test_sample_points_bad_requests():
    box = [0.0, 1.0] * 4
    with pytest.raises(ScenarioError, match="points.count"):
        sample_points(1, 0, box)
    with pytest.raises(ScenarioError, match="points.box"):
        sample_points(1, 1, [0.0, 1.0])
    with pytest.raises(ScenarioError, match="slot 2"):
        sample_points(1, 1, [0.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0])


def test_sampler_exclusion_inequality():
    # factor 1/(u+v) is kept above 0.05, so accepted points have u+v < 20
    sc = validate_scenario({
        "name": "excl",
        "metric": {"a": "0", "b": "0", "c": "0"},
        "conformal_factor": "1/(u + v)",
        "points": {"seed": 9, "count": 40,
                   "box": [1.0, 40.0, 1.0, 40.0, -1.0, 1.0, -1.0, 1.0]},
        "checks": ["einstein_residual"],
    })
    assert len(sc.points) == 40
    assert all(p[0] + p[1] < 20.0 for p in sc.points)
    assert any(p[0] + p[1] > 15.0 for p in sc.points)


def test_sampler_unsatisfiable():
    with pytest.raises(ScenarioError, match="rejected"):
        validate_scenario({
            "name": "stuck",
            "metric": {"a": "0", "b": "0", "c": "0"},
            "conformal_factor": "1/(u + v)",
            "points": {"seed": 9, "count": 5,
                       "box": [25.0, 30.0, 25.0, 30.0, 0.0, 1.0, 0.0, 1.0]},
            "checks": ["einstein_residual"],
        })


def drop(obj, key):
    obj = json.loads(json.dumps(obj))
    del obj["metric"][key]
    return obj


@pytest.mark.parametrize("mutate, fragment", [
    (lambda s: drop(s, "b"), "metric.b"),
    (lambda s: {**s, "extra": 1}, "scenario.extra"),
    (lambda s: {**s, "checks": ["no_such_check"]}, "checks\\[0\\]"),
    (lambda s: {**s, "checks": []}, "checks"),
    (lambda s: {**s, "checks": ["chart_congruence"]}, "checks\\[0\\]"),
    (lambda s: {**s, "hh": {"theta": "0", "mu": "0", "Shat": 0.0}}, "hh"),
    (lambda s: {**s, "chart": {"D": ["1", "0", "0"], "E": ["0"] * 4}},
     "chart.D"),
    (lambda s: {**s, "points": {"seed": 1, "count": 2, "box": [0.0, 1.0]}},
     "points.box"),
    (lambda s: {**s, "points": {"seed": 1, "box": [0.0, 1.0] * 4}},
     "points.count"),
    (lambda s: {**s, "tol": {"rel": -1.0, "abs": 0.0}}, "tol"),
    (lambda s: {**s, "conformal_factor": {"affine": {"M": 0.0, "N": 1.0}}},
     "conformal_factor.affine"),
    (lambda s: {**s, "metric": {"a": "0", "b": "0", "c": 3}}, "metric.c"),
    (lambda s: {**s, "points": []}, "points"),
    (lambda s: {**s, "points": [[0.1, 0.2, 0.3]]}, "points\\[0\\]"),
])
def test_schema_rejection(mutate, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        validate_scenario(mutate(poly_scenario()))


def test_checks_must_match_present_fields():
    # a factor check without any factor names the offending list slot
    bad = poly_scenario(checks=["walker_scalar_pin", "ricci_alignment"])
    with pytest.raises(ScenarioError, match="checks\\[1\\]"):
        validate_scenario(bad)


def test_catalog_names():
    assert catalog_names() == [
        "flat", "walker-poly", "conf-null", "conf-generic",
        "hh-zero", "hh-theta", "hh-curved", "chart-identity",
    ]
    assert [c["name"] for c in catalog()] == catalog_names()


def test_catalog_entries_are_valid_scenarios():
    for body in catalog():
        sc = validate_scenario(body)
        assert sc.points and sc.checks


@pytest.mark.parametrize("name", [
    "flat", "walker-poly", "conf-null", "conf-generic",
    "hh-zero", "hh-theta", "hh-curved", "chart-identity",
])
def test_catalog_scenarios_pass(name):
    report = run_scenario_data(catalog_entry(name))
    failing = [r for r in report["rows"] if not r["pass"]]
    assert report["pass"], failing[:3]


def test_report_structure():
    report = run_scenario_data(poly_scenario())
    assert report["scenario"] == "t"
    assert report["engine"]["package"] == "walkergeo"
    assert report["engine"]["conventions_fingerprint"] == conventions.render()
    assert report["tolerances"] == {"rel": 1e-8, "abs": 1e-10}
    assert len(report["points"]) == 3
    assert len(report["rows"]) == 3
    row = report["rows"][0]
    assert set(row) == {"check", "point", "residual", "scale", "pass"}
    summary = report["summary"]["walker_scalar_pin"]
    assert summary["points"] == 3
    assert summary["pass"] is True
    assert summary["max_residual"] >= 0.0


def test_report_bytes_deterministic_across_jobs():
    body = catalog_entry("conf-generic")
    one = report_json_bytes(run_scenario_data(body, jobs=1))
    again = report_json_bytes(run_scenario_data(body, jobs=1))
    threaded = report_json_bytes(run_scenario_data(body, jobs=3))
    assert one == again == threaded
    json.loads(one.decode())


def test_row_order_is_checks_then_points():
    body = poly_scenario(checks=["walker_scalar_pin", "walker_degeneracy"])
    report = run_scenario_data(body)
    ids = [r["check"] for r in report["rows"]]
    assert ids == ["walker_scalar_pin"] * 3 + ["walker_degeneracy"] * 3
    pts = [tuple(r["point"]) for r in report["rows"][:3]]
    assert pts == [tuple(p) for p in report["points"]]


def test_explicit_point_list():
    body = poly_scenario(points=[[0.1, -0.2, 0.3, 0.4], [0.0, 0.0, 0.0, 0.0]])
    report = run_scenario_data(body)
    assert report["points"] == [[0.1, -0.2, 0.3, 0.4], [0.0, 0.0, 0.0, 0.0]]
    assert report["pass"]


def test_tol_override_forces_failure():
    report = run_scenario_data(catalog_entry("conf-null"),
                               tol_rel=0.0, tol_abs=1e-20)
    assert not report["pass"]
    assert report["tolerances"] == {"rel": 0.0, "abs": 1e-20}


def test_error_rows_are_captured():
    # base point on the factor's singular locus: the runner raises and the
    # report keeps a well-formed failing row instead of crashing
    body = {
        "name": "singular",
        "metric": {"a": "0", "b": "0", "c": "0"},
        "conformal_factor": {"affine": {"M": 0.7, "N": -1.3}},
        "points": [[0.0, 0.0, 0.3, 0.2]],
        "checks": ["scalar_closed_form"],
    }
    report = run_scenario_data(body)
    assert not report["pass"]
    row = report["rows"][0]
    assert row["pass"] is False and "error" in row
    assert report["summary"]["scalar_closed_form"]["max_residual"] is None
    json.loads(report_json_bytes(report).decode())


def test_every_check_is_a_distinct_operation():
    runners = [d.runner for d in CHECKS.values()]
    assert len(set(runners)) == len(CHECKS)
    known = {"conformal_factor", "conformal_factor.affine", "hh", "chart"}
    for cid, d in CHECKS.items():
        assert d.description
        assert d.requires <= known, cid


def test_run_scenario_from_file(tmp_path):
    path = tmp_path / "flat.json"
    path.write_text(json.dumps(catalog_entry("flat")), encoding="utf-8")
    report = run_scenario(str(path))
    assert report["pass"]


def test_run_scenario_rejects_bad_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ScenarioError, match="invalid JSON"):
        run_scenario(str(path))


def test_main_check_pass_and_out(tmp_path, capsys):
    out = tmp_path / "report.json"
    assert main(["check", "flat", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "scenario flat: PASS" in text
    assert "curvature_zero" in text
    on_disk = json.loads(out.read_text(encoding="utf-8"))
    assert on_disk["pass"] is True


def test_main_check_failure_exit_code(tmp_path, capsys):
    # a generic factor has no reason to satisfy the alignment condition
    body = poly_scenario(name="misaligned",
                         conformal_factor="exp(0.1*x + 0.2*u)",
                         checks=["ricci_alignment"])
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(body), encoding="utf-8")
    assert main(["check", str(path)]) == 1
    assert "FAIL" in capsys.readouterr().out


def test_main_check_unknown_name(capsys):
    assert main(["check", "no-such-entry"]) == 2
    assert "neither a file nor a catalog entry" in capsys.readouterr().err


def test_main_check_scenario_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(poly_scenario(checks=["nope"])),
                    encoding="utf-8")
    assert main(["check", str(path)]) == 2
    assert "checks[0]" in capsys.readouterr().err


def test_main_catalog_lists_names(capsys):
    assert main(["catalog"]) == 0
    out = capsys.readouterr().out
    for name in catalog_names():
        assert name in out


def test_main_classify(capsys):
    assert main(["classify", "--psitilde", "0,0,0,0,1"]) == 0
    out = capsys.readouterr().out
    assert "multiplicity pattern: 4" in out
    assert main(["classify", "--psitilde", "1,2,3"]) == 2
    assert main(["classify", "--psitilde", "a,b,c,d,e"]) == 2


def test_main_conventions(capsys):
    assert main(["conventions"]) == 0
    assert capsys.readouterr().out == conventions.render()


def test_jobs_flag_passthrough(tmp_path, capsys):
    out1 = tmp_path / "one.json"
    out3 = tmp_path / "three.json"
    assert main(["check", "walker-poly", "--out", str(out1)]) == 0
    capsys.readouterr()
    assert main(["check", "walker-poly", "--jobs", "3",
                 "--out", str(out3)]) == 0
    capsys.readouterr()
    assert out1.read_bytes() == out3.read_bytes()
