import csv
import json
import subprocess
import sys

import numpy as np
import pytest
from scipy.special import logit

from survml.cli import main
from survml.pipeline import ModelBundle

from conftest import FOUR_CSV


def write_config(tmp_path, name="config.json", **cfg):
    path = tmp_path / name
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return str(path)


def run(tmp_path, command, out="out", **cfg):
    cfg.setdefault("duration", "Y")
    cfg.setdefault("event", "delta")
    cfg.setdefault("id_column", "id")
    return main([command, "--config", write_config(tmp_path, **cfg), "--out", str(tmp_path / out)])


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def four(tmp_path):
    (tmp_path / "four.csv").write_text(FOUR_CSV, encoding="utf-8")
    return dict(input="four.csv", categorical=["gender"])


@pytest.fixture
def sim_csv(tmp_path):
    rng = np.random.default_rng(0)
    n = 300
    age = rng.integers(30, 60, n)
    x = rng.normal(size=n)
    T = rng.exponential(1 / (0.1 * np.exp(0.7 * x)))
    C = rng.uniform(2, 8, n)
    lines = ["id,age,x,Y,delta"] + [f"p{i},{age[i]},{float(x[i])!r},{float(min(T[i], C[i]))!r},{int(T[i] <= C[i])}"
                                    for i in range(n)]
    (tmp_path / "sim.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return dict(input="sim.csv")


def test_expand_four_rows(tmp_path, four, capsys):
    assert run(tmp_path, "expand", **four) == 0
    assert len(read_csv(tmp_path / "out" / "pseudo.csv")) == 21
    assert "rows=21" in capsys.readouterr().out


def test_expand_empty_table(tmp_path):
    (tmp_path / "empty.csv").write_text("id,age,Y,delta\n", encoding="utf-8")
    assert run(tmp_path, "expand", input="empty.csv") == 0
    assert read_csv(tmp_path / "out" / "pseudo.csv") == []


def test_expand_bad_schema(tmp_path, four, capsys):
    assert run(tmp_path, "expand", **{**four, "event": "dead"}) != 0
    assert "error" in capsys.readouterr().err


def test_unknown_or_missing_config(tmp_path, four, capsys):
    assert run(tmp_path, "expand", **four, colour="red") != 0
    assert "unknown config keys" in capsys.readouterr().err
    assert main(["expand", "--config", str(tmp_path / "nope.json")]) != 0
    assert run(tmp_path, "fit", **four, kind="deep_net") != 0


def test_fit_km_curve(tmp_path, four):
    assert run(tmp_path, "fit", **four, kind="km") == 0
    bundle = ModelBundle.from_json((tmp_path / "out" / "model.json").read_text())
    assert bundle.model(5.0) == 0.75


def test_fit_xgb_without_rounds_fails(tmp_path, four, capsys):
    assert run(tmp_path, "fit", **four, kind="xgb", n_rounds=0) != 0
    assert "n_rounds" in capsys.readouterr().err


def test_refit_is_byte_identical(tmp_path, sim_csv):
    cfg = dict(sim_csv, kind="xgb", n_rounds=5, subsample_rows=0.7, subsample_cols=0.5, seed=11)
    assert run(tmp_path, "fit", out="a", **cfg) == 0
    assert run(tmp_path, "fit", out="b", **cfg) == 0
    for name in ("model.json", "training_log.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("kind", ["cart", "forest", "adaboost", "gbm", "logistic", "poisson", "survival_tree",
                                  "survival_forest", "cox", "na"])
def test_every_kind_fits_and_evaluates(tmp_path, sim_csv, kind):
    extra = {"n_trees": 5} if "forest" in kind else {}
    assert run(tmp_path, "fit", **sim_csv, kind=kind, **extra) == 0
    assert run(tmp_path, "evaluate", **sim_csv, model="out/model.json", out="ev") == 0
    report = json.loads((tmp_path / "ev" / "metrics.json").read_text())
    assert np.isfinite(report["smr"])


def test_evaluate_perfect_oracle_auc(tmp_path, sim_csv):
    assert run(tmp_path, "fit", **sim_csv, kind="cart", min_node_size=1) == 0
    assert run(tmp_path, "evaluate", **sim_csv, model="out/model.json", metrics=["auc"], out="ev") == 0
    assert json.loads((tmp_path / "ev" / "metrics.json").read_text())["auc"] == 1.0


def test_evaluate_continuous_metrics(tmp_path, sim_csv):
    assert run(tmp_path, "fit", **sim_csv, kind="cox") == 0
    assert run(tmp_path, "evaluate", **sim_csv, model="out/model.json", tau=4.0, brier_times=[1, 2],
               out="ev") == 0
    report = json.loads((tmp_path / "ev" / "metrics.json").read_text())
    assert {"c_index_harrell", "c_index_uno", "brier@1", "brier@2", "ibs"} <= set(report)
    assert report["c_index_harrell"] > 0.6


def test_evaluate_incompatible_metric(tmp_path, sim_csv, capsys):
    assert run(tmp_path, "fit", **sim_csv, kind="logistic") == 0
    assert run(tmp_path, "evaluate", **sim_csv, model="out/model.json", metrics=["brier"]) != 0
    assert "not available" in capsys.readouterr().err


def test_evaluate_missing_model(tmp_path, four):
    assert run(tmp_path, "evaluate", **four, model="absent.json") != 0


def test_explain_pfi_on_stump(tmp_path, sim_csv):
    assert run(tmp_path, "fit", **sim_csv, kind="cart", max_depth=1, columns=["x"]) == 0
    assert run(tmp_path, "explain", **sim_csv, columns=["x"], model="out/model.json", explain="pfi",
               out="ex") == 0
    rows = read_csv(tmp_path / "ex" / "pfi.csv")
    assert len(rows) == 2
    used = ModelBundle.from_json((tmp_path / "out" / "model.json").read_text()).model.feature[0]
    assert float(rows[1 - used]["value"]) == 0.0


def test_explain_pdp_and_shap(tmp_path, sim_csv):
    assert run(tmp_path, "fit", **sim_csv, kind="logistic") == 0
    cfg = dict(sim_csv, model="out/model.json", explain=["pdp", "shap"], features=["x"], n_points=7,
               n_samples=30, max_rows=200, seed=4)
    assert run(tmp_path, "explain", out="e1", **cfg) == 0
    assert run(tmp_path, "explain", out="e2", **cfg) == 0
    assert len(read_csv(tmp_path / "e1" / "pdp_x.csv")) == 7
    assert (tmp_path / "e1" / "shap.csv").read_bytes() == (tmp_path / "e2" / "shap.csv").read_bytes()


def test_price_immortal_and_certain_death(tmp_path):
    (tmp_path / "alive.csv").write_text("id,age,Y,delta\na,40,5,0\nb,50,6,0\n", encoding="utf-8")
    (tmp_path / "dead.csv").write_text("id,age,Y,delta\na,40,0.5,1\nb,50,0.25,1\n", encoding="utf-8")
    contract = dict(sum_insured=1000, horizon=5, interest=0.04)
    assert run(tmp_path, "fit", input="alive.csv", kind="km", out="m1") == 0
    assert run(tmp_path, "price", input="alive.csv", model="m1/model.json", age_column="age",
               out="p1", **contract) == 0
    assert [float(r["premium"]) for r in read_csv(tmp_path / "p1" / "premiums.csv")] == [0.0, 0.0]
    assert len(read_csv(tmp_path / "p1" / "premium_by_age.csv")) == 2
    assert run(tmp_path, "fit", input="dead.csv", kind="km", out="m2") == 0
    assert run(tmp_path, "price", input="dead.csv", model="m2/model.json", out="p2", **contract) == 0
    for r in read_csv(tmp_path / "p2" / "premiums.csv"):
        assert float(r["premium"]) == pytest.approx(1000 / 1.04, rel=1e-14)


def test_price_geometric_closed_form(tmp_path, sim_csv):
    assert run(tmp_path, "fit", **sim_csv, kind="logistic", columns=["x"]) == 0
    path = tmp_path / "out" / "model.json"
    doc = json.loads(path.read_text())
    q = 0.03
    doc["model"]["beta"] = [float(logit(q))] + [0.0] * (len(doc["model"]["beta"]) - 1)
    path.write_text(json.dumps(doc))
    C, n, i = 500.0, 8, 0.02
    assert run(tmp_path, "price", **sim_csv, columns=["x"], model="out/model.json", sum_insured=C,
               horizon=n, interest=i, out="p") == 0
    v = 1 / (1 + i)
    r = (1 - q) * v
    closed = C * q * v * (1 - r ** n) / (1 - r)
    for row in read_csv(tmp_path / "p" / "premiums.csv"):
        assert float(row["premium"]) == pytest.approx(closed, rel=1e-10)


def test_console_script_help():
    proc = subprocess.run([sys.executable, "-m", "survml.cli", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0 and "expand" in proc.stdout
