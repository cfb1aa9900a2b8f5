import math

import pytest

from depapprox.harness import (
    FAMILY_NAMES,
    METRICS,
    RHS_TEMPLATES,
    SHARP_CONSTANT,
    BoundRow,
    ExperimentConfig,
    estimate_constant,
    evaluate_bounds,
    evaluate_point,
    rhs_without_constant,
    sharp_constant_experiment,
)
from depapprox.measures import FamilyParams, poisson
from depapprox.metrics import nonuniform_kolmogorov
from depapprox.models import exact_sum_distribution, poisson_binomial_model, two_runs_model
from depapprox.moments import summarize


def make_row(ratio, passed=True, family="poisson", metric="kolmogorov", c0=1):
    return BoundRow(
        model="poisson_binomial", params={"n": 10, "p": ratio}, family=family, metric=metric,
        lhs=ratio, rhs=1.0, ratio=ratio, conditions_pass=passed, argmax_x=0,
        lam=1.0, gamma2=0.0, delta_tilde=0.0, r0=0.0, r1=0.0, c0=c0,
    )


# --------------------------------------------------------------------------
# Templates
# --------------------------------------------------------------------------


def test_eighteen_templates():
    assert set(RHS_TEMPLATES) == {(f, m) for f in FAMILY_NAMES for m in METRICS}
    assert len(RHS_TEMPLATES) == 18


@pytest.mark.parametrize(
    "family,metric,expected",
    [
        ("poisson", "kolmogorov", 0.5 / 4),
        ("poisson2", "kolmogorov", 0.5**2 / 16 + 0.2 / 8),
        ("compound", "kolmogorov", 0.2 / 8),
        ("tp", "kolmogorov", (0.2 + 0.3) / 8 + 0.6 / 4),
        ("nb", "kolmogorov", 0.2 / 8 + 0.09 / 32),
        ("bi", "local", 0.2 / 16 + 0.09 / 64),
        ("poisson", "wasserstein", 0.5 / 2),
        ("tp", "local", 0.5 / 16 + 0.6 / 8),
    ],
)
def test_template_values(family, metric, expected):
    # lam = 4, gamma2 = -0.3, delta_tilde = 0.6, R0 = 0.5, R1 = 0.2
    assert RHS_TEMPLATES[family, metric](4.0, -0.3, 0.6, 0.5, 0.2) == pytest.approx(expected, rel=1e-14)


def test_rhs_from_summary():
    s = summarize(poisson_binomial_model([0.005] * 400))
    assert rhs_without_constant("poisson", "kolmogorov", s) == pytest.approx(s.r0 / s.lam, rel=1e-15)


# --------------------------------------------------------------------------
# Constant estimation
# --------------------------------------------------------------------------


def test_single_row_estimate():
    est = estimate_constant([make_row(0.7)])[("poisson", "kolmogorov")]
    assert est.value == 0.7 and est.n_rows == 1


def test_failed_rows_are_excluded():
    rows = [make_row(0.3), make_row(0.7), make_row(9.9, passed=False)]
    est = estimate_constant(rows)[("poisson", "kolmogorov")]
    assert est.value == 0.7
    assert est.row.ratio == 0.7


def test_no_passing_rows_gives_empty_estimate():
    est = estimate_constant([make_row(2.0, passed=False)])[("poisson", "kolmogorov")]
    assert est.empty and math.isnan(est.value)


def test_estimate_by_c0():
    rows = [make_row(0.4, c0=1), make_row(0.9, c0=2), make_row(0.5, c0=1)]
    est = estimate_constant(rows, by_c0=True)
    assert est[("poisson", "kolmogorov", 1)].value == 0.5
    assert est[("poisson", "kolmogorov", 2)].value == 0.9


def test_infinite_ratios_are_ignored():
    est = estimate_constant([make_row(math.inf), make_row(0.2)])[("poisson", "kolmogorov")]
    assert est.value == 0.2


# --------------------------------------------------------------------------
# Evaluation
# --------------------------------------------------------------------------


def test_poisson_row_matches_direct_computation():
    rows, _ = evaluate_point("poisson_binomial", {"n": 200, "p": 0.005}, ["poisson"], ["kolmogorov"])
    (row,) = rows
    model = poisson_binomial_model([0.005] * 200)
    s = summarize(model)
    lhs = nonuniform_kolmogorov(exact_sum_distribution(model), poisson(FamilyParams(s.lam)), s.lam).value
    assert row.lhs == lhs
    assert row.ratio == pytest.approx(lhs * s.lam / s.r0, rel=1e-14)
    assert row.conditions_pass


def test_sign_admissibility():
    # Poisson binomial has gamma2 < 0, 2-runs at small p has gamma2 > 0
    rows, skipped = evaluate_point("poisson_binomial", {"n": 300, "p": 0.005})
    assert not any(r.family == "nb" for r in rows)
    assert any(s.family == "nb" for s in skipped)
    rows, skipped = evaluate_point("two_runs", {"n": 600, "p": 0.05})
    assert not any(r.family == "bi" for r in rows)
    assert any(r.family == "nb" for r in rows)


def test_failed_conditions_are_kept_and_flagged():
    rows, _ = evaluate_point("two_runs", {"n": 100, "p": 0.2}, ["poisson"], ["kolmogorov"])
    assert rows and not rows[0].conditions_pass
    assert "nu1_le_1/100" in rows[0].failed_conditions


def test_wasserstein_dominates_kolmogorov_unweighted():
    rows, _ = evaluate_point("two_runs", {"n": 800, "p": 0.05}, ["poisson"], ["wasserstein", "kolmogorov"])
    by_metric = {r.metric: r for r in rows}
    model = two_runs_model(800, 0.05)
    s = summarize(model)
    exact = exact_sum_distribution(model)
    k = nonuniform_kolmogorov(exact, poisson(FamilyParams(s.lam)), s.lam, weighted=False).value
    assert by_metric["wasserstein"].lhs >= k


def test_sweep_is_cartesian():
    cfg = ExperimentConfig("k1k2", {"n": [20, 40], "k1": 1, "k2": [1, 2], "p": 0.1})
    pts = cfg.sweep_points()
    assert len(pts) == 4
    assert {(p["n"], p["k2"]) for p in pts} == {(20, 1), (20, 2), (40, 1), (40, 2)}


def test_p_vector_is_not_swept():
    cfg = ExperimentConfig("poisson_binomial", {"p_vector": [0.1, 0.2, 0.3]})
    assert cfg.sweep_points() == [{"p_vector": [0.1, 0.2, 0.3]}]


@pytest.mark.parametrize(
    "kwargs",
    [
        {"families": ["gamma"]},
        {"metrics": ["hellinger"]},
        {"output_format": "xml"},
    ],
)
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        ExperimentConfig("two_runs", {"n": 10, "p": 0.1}, **kwargs)


def test_empty_sweep_rejected():
    with pytest.raises(ValueError):
        ExperimentConfig("two_runs", {"n": [], "p": 0.1})


def test_yaml_config(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text(
        "model: two_runs\n"
        "n: [400, 800]\n"
        "p: 0.05\n"
        "families: [poisson, nb]\n"
        "metrics: [kolmogorov]\n"
        "truncation_eps: 1.0e-13\n"
        "output_format: json\n"
    )
    cfg = ExperimentConfig.from_file(path)
    assert cfg.model == "two_runs" and cfg.params == {"n": [400, 800], "p": 0.05}
    assert cfg.truncation_eps == 1e-13 and cfg.output_format == "json"
    report = evaluate_bounds(cfg)
    assert len(report.rows) == 4


def test_yaml_must_be_mapping(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("- 1\n- 2\n")
    with pytest.raises(ValueError):
        ExperimentConfig.from_file(path)


def test_report_is_deterministic_and_order_free():
    cfg = ExperimentConfig("poisson_binomial", {"n": [150, 300, 450], "p": 0.006}, families=["poisson", "compound"])
    serial = evaluate_bounds(cfg)
    cfg.workers = 2
    parallel = evaluate_bounds(cfg)
    assert serial.to_csv() == parallel.to_csv()
    assert serial.to_csv() == evaluate_bounds(ExperimentConfig(**{**cfg.__dict__, "workers": 1})).to_csv()


def test_csv_layout():
    cfg = ExperimentConfig("two_runs", {"n": 500, "p": 0.05}, families=["poisson"], metrics=["local"])
    lines = evaluate_bounds(cfg).to_csv().splitlines()
    header = lines[0].split(",")
    for col in ("family", "metric", "lhs", "rhs", "ratio", "conditions_pass", "argmax_x"):
        assert col in header
    assert header[:3] == ["model", "n", "p"]
    assert len(lines) == 2


# --------------------------------------------------------------------------
# Sharp constant
# --------------------------------------------------------------------------


def test_sharp_constant_first_row():
    (row,) = sharp_constant_experiment([2000], 0.005)
    assert row.lam == pytest.approx(10.0) and row.lam2 == pytest.approx(0.05)
    assert abs(row.value - 0.399) < 0.06
    assert row.regime_ok


def test_sharp_constant_out_of_regime_is_flagged():
    (row,) = sharp_constant_experiment([1], 1.0)
    assert not row.regime_ok


def test_sharp_constant_target():
    assert SHARP_CONSTANT == pytest.approx(0.3989422804, rel=1e-10)
