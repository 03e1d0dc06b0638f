"""Acceptance gate: runs ``gmtlab all --seed 42`` twice and grades each criterion.

One PASS/FAIL line per criterion is printed in the terminal summary.
"""
import json
import subprocess
import sys

import pytest

from conftest import ACCEPTANCE_LINES

RUNTIME_LIMITS = {
    "metric_axioms": 30,
    "ratio_bound": 120,
    "density_gap": 300,
    "spherical_area_koranyi": 300,
    "spherical_area_cc": 300,
    "euclidean_area": 60,
    "sigma2_chain": 180,
    "federer_inequalities": 120,
}


def _run_all(out_dir):
    proc = subprocess.run(
        [sys.executable, "-m", "gmtlab.cli", "all", "--seed", "42", "--out", str(out_dir)],
        capture_output=True, text=True,
    )
    reports = {p.stem: json.loads(p.read_text()) for p in out_dir.glob("*.json")}
    return proc.returncode, reports, proc.stderr


@pytest.fixture(scope="module")
def runs(tmp_path_factory):
    first = _run_all(tmp_path_factory.mktemp("first"))
    second = _run_all(tmp_path_factory.mktemp("second"))
    return first, second


@pytest.fixture(scope="module")
def reports(runs):
    return runs[0][1]


def _criteria(report, names=None):
    crit = report["criteria"]
    if names is not None:
        crit = [c for c in crit if any(c["name"].startswith(n) for n in names)]
    return crit


def _grade(number, title, checks, runtime_keys, reports):
    """checks: list of (report name, criterion-name prefixes or None for all)."""
    failures, selected = [], []
    for name, prefixes in checks:
        crit = _criteria(reports[name], prefixes)
        if not crit:
            failures.append(f"{name}: no criteria")
        selected.extend(crit)
        failures += [f"{name}.{c['name']}: {c['detail']}" for c in crit if not c["passed"]]
    for key in runtime_keys:
        clock = reports[key]["wall_clock_s"]
        if clock >= RUNTIME_LIMITS[key]:
            failures.append(f"{key} took {clock:.1f}s (limit {RUNTIME_LIMITS[key]}s)")
    clock = sum(reports[k]["wall_clock_s"] for k in runtime_keys)
    status = "PASS" if not failures else "FAIL"
    detail = f"{len(selected)} checks, {clock:.1f}s" + ("" if not failures else "; " + " | ".join(failures))
    line = f"[{status}] criterion {number}: {title} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert not failures, line


def test_c1_metric_axioms(reports):
    _grade(1, "metric axioms, invariance and homogeneity", [("metric_axioms", None)], ["metric_axioms"], reports)


def test_c2_cc_axis_constant(reports):
    _grade(2, "CC axis constant and beta = 1/(2 pi)", [("ratio_bound", ["axis_constant", "beta_oracle"])],
           ["ratio_bound"], reports)


def test_c3_ratio_bound(reports):
    _grade(3, "alpha/beta in (1, 4], resolution-stable, Koranyi control = 1",
           [("ratio_bound", ["ratio_in_bounds", "ratio_stable", "koranyi_control"])], ["ratio_bound"], reports)
    assert 1.01 <= reports["ratio_bound"]["quantities"]["ratio_cc"]["value"] <= 4


def test_c4_density_gap(reports):
    _grade(4, "centred density = beta, Federer density = alpha, strict gap",
           [("density_gap", None)], ["density_gap"], reports)


def test_c5_spherical_area(reports):
    _grade(5, "mu_SR = alpha S2 on Koranyi and CC vertical segments",
           [("spherical_area_koranyi", None), ("spherical_area_cc", None)],
           ["spherical_area_koranyi", "spherical_area_cc"], reports)


def test_c6_euclidean_area(reports):
    _grade(6, "Euclidean segment H1 and area formula", [("euclidean_area", None)], ["euclidean_area"], reports)


def test_c7_sigma2_chain(reports):
    _grade(7, "S2 ratio chain tends to 1, implied bound 1/2", [("sigma2_chain", None)], ["sigma2_chain"], reports)


def test_c8_finite_oracle_suite(reports):
    _grade(8, "finite cover oracles and both differentiation inequalities",
           [("federer_inequalities", None)], ["federer_inequalities"], reports)
    assert reports["federer_inequalities"]["quantities"]["counts"]["value"]["instances"] == 200


def test_c9_determinism(runs):
    (code1, first, _), (code2, second, err) = runs

    def strip(reps):
        return {k: {f: v for f, v in r.items() if f != "wall_clock_s"} for k, r in reps.items()}

    same = strip(first) == strip(second) and len(first) == 8
    ok = same and code1 == 0 and code2 == 0
    line = (f"[{'PASS' if ok else 'FAIL'}] criterion 9: 'gmtlab all --seed 42' twice gives identical reports "
            f"(exit codes {code1}, {code2}; {len(first)} reports)")
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, err
