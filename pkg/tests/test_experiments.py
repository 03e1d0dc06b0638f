import json
import math

import numpy as np
import pytest

from gmtlab.experiments import (
    DEFAULTS,
    EXPERIMENTS,
    ConfigError,
    ExperimentConfig,
    check_instance,
    finite_density,
    random_instance,
    resolve_params,
    run_experiment,
    six_point_instance,
)


def test_every_experiment_has_defaults():
    assert set(EXPERIMENTS) == set(DEFAULTS)


def test_params_are_bounded():
    with pytest.raises(ConfigError):
        resolve_params(ExperimentConfig("ratio_bound", params={"tol_beta": 5.0}))
    with pytest.raises(ConfigError):
        resolve_params(ExperimentConfig("ratio_bound", params={"nonsense": 1}))
    with pytest.raises(ConfigError):
        run_experiment(ExperimentConfig("no_such_experiment"))
    p = resolve_params(ExperimentConfig("sigma2_chain", params={"radius_ladder": [0.1, 0.05]}))
    assert p["radius_ladder"] == [0.1, 0.05] and p["tol_chain"] == 0.05


def test_config_from_json():
    cfg = ExperimentConfig.from_json({"experiment": "ratio_bound", "seed": 7, "tol_beta": 0.01})
    assert cfg.seed == 7 and cfg.params == {"tol_beta": 0.01}


def test_report_is_self_contained():
    rep = run_experiment(ExperimentConfig("metric_axioms", seed=3, params={"samples": 50}))
    doc = json.loads(json.dumps(rep.to_json()))
    assert doc["schema_version"] and doc["seed"] == 3 and doc["inputs"]["samples"] == 50
    assert doc["passed"] and all("tolerance" in c for c in doc["criteria"])
    assert all(q["provenance"] for q in doc["quantities"].values())
    again = run_experiment(ExperimentConfig("metric_axioms", seed=3, params=doc["inputs"]))
    assert again.to_json(include_clock=False) == rep.to_json(include_clock=False)


def test_estimator_failure_becomes_failed_criterion():
    # a delta below the sampling resolution makes the cover estimator refuse
    rep = run_experiment(ExperimentConfig("spherical_area_koranyi", params={"n_samples": 1001, "delta_ladder": [0.01, 0.005]}))
    assert not rep.passed and rep.criteria[-1]["name"] == "completed"


def test_finite_density_cases():
    inst = six_point_instance()
    assert finite_density(inst, "q0") == pytest.approx(0.25)
    inst.sizes[frozenset(["q0"])] = 0.0
    assert finite_density(inst, "q0") == math.inf
    inst.weights["q0"] = 0.0
    assert finite_density(inst, "q0") is None


def test_random_instances_pass_checks():
    rng = np.random.default_rng(11)
    for _ in range(20):
        res = check_instance(random_instance(rng))
        assert res["greedy_ge_exact"] and res["exact_monotone"] and res["subadditive"]
        assert res["upper"] != "fail" and res["lower"] != "fail"


def test_small_sigma2_chain_runs():
    rep = run_experiment(ExperimentConfig("sigma2_chain", params={"radius_ladder": [0.2, 0.1], "n_samples": 5001}))
    assert rep.passed, rep.criteria
    assert rep.quantities["sigma2_lower_bound"]["value"] == 0.5
