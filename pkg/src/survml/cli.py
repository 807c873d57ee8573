"""Command line: ``survml <expand|fit|evaluate|explain|price> --config FILE [--seed N] [--out DIR]``.

The config is a flat JSON object. Data go to files in ``--out`` (and a short
summary to stdout); diagnostics go to stderr. Exit status is 0 on success.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import data as sd
from .estimators import censoring_survival
from .interpret import partial_dependence, permutation_importance, shap_sample
from .metrics import (brier_score, c_index_harrell, c_index_uno, integrated_brier, smr, smr_discrete,
                      weighted_roc, write_report)
from .pipeline import MODEL_KINDS, ModelBundle, fit_model, training_log
from .pricing import ContractSpec, premium_by_age, pure_premium, survival_from_q
from .trees import cart_variable_importance
from .trees.importance import write_importance_csv

COMMON_KEYS = {"input", "duration", "event", "id_column", "categorical", "columns", "interval_length",
               "time_varying", "seed", "out", "threads"}
FIT_KEYS = {"kind", "n_trees", "max_features", "bootstrap", "max_depth", "min_node_size", "criterion",
            "n_learners", "n_stages", "loss", "huber_quantile", "n_rounds", "learning_rate",
            "reg_lambda", "gamma", "subsample_rows", "subsample_cols", "min_child_hessian",
            "base_score", "weight_column", "min_events_per_leaf", "min_logrank", "max_iter", "tol"}
COMMAND_KEYS = {
    "expand": COMMON_KEYS,
    "fit": COMMON_KEYS | FIT_KEYS,
    "evaluate": COMMON_KEYS | {"model", "metrics", "tau", "brier_times"},
    "explain": COMMON_KEYS | {"model", "explain", "features", "n_points", "instance", "n_samples",
                              "repeats", "max_rows", "tau"},
    "price": COMMON_KEYS | {"model", "sum_insured", "horizon", "interest", "age_column"},
}
PATH_KEYS = ("input", "model")


class ConfigError(ValueError):
    pass


def load_config(path, command):
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(config, dict):
        raise ConfigError("config must be a JSON object")
    unknown = sorted(set(config) - COMMAND_KEYS[command])
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: {unknown}")
    base = Path(path).resolve().parent
    for key in PATH_KEYS:
        if key in config:
            p = Path(config[key])
            if not p.is_absolute():
                p = base / p
            if not p.exists():
                raise ConfigError(f"{key} file not found: {p}")
            config[key] = str(p)
    for key in ("input", "duration", "event"):
        if key not in config:
            raise ConfigError(f"missing config key {key!r}")
    return config


def _table(config):
    return sd.load_survival_table(config["input"], config["duration"], config["event"],
                                  id_column=config.get("id_column"),
                                  categorical=config.get("categorical", ()),
                                  columns=config.get("columns"))


def _bundle(config):
    if "model" not in config:
        raise ConfigError("missing config key 'model'")
    with open(config["model"], encoding="utf-8") as fh:
        return ModelBundle.from_json(fh.read())


def _out(config):
    out = Path(config.get("out", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_expand(config):
    table = sd.impute_missing(_table(config))
    pseudo = sd.exposure_expansion(table, float(config.get("interval_length", 1.0)),
                                   config.get("time_varying", ()))
    path = _out(config) / "pseudo.csv"
    pseudo.to_csv(path)
    print(f"individuals={len(table)} rows={len(pseudo)} degenerate={int(pseudo.degenerate.sum())}")
    return path


def cmd_fit(config):
    kind = config.get("kind")
    if kind not in MODEL_KINDS:
        raise ConfigError(f"unknown model kind {kind!r}; expected one of {list(MODEL_KINDS)}")
    if kind == "xgb" and int(config.get("n_rounds", 100)) < 1:
        raise ConfigError("n_rounds must be at least 1")
    table = _table(config)
    fit_cfg = {k: v for k, v in config.items() if k in FIT_KEYS | {"interval_length", "time_varying"}}
    fit_cfg.pop("kind")
    bundle = fit_model(kind, table, fit_cfg, seed=int(config.get("seed", 0)))
    out = _out(config)
    (out / "model.json").write_text(bundle.to_json(), encoding="utf-8")
    with open(out / "training_log.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["round", "train_objective"])
        for r, v in training_log(bundle):
            writer.writerow([int(r), repr(float(v))])
    print(f"kind={kind} model={out / 'model.json'}")
    return bundle


def _prepared_pseudo(bundle, table):
    pseudo = sd.exposure_expansion(sd.impute_missing(table), bundle.interval_length, bundle.time_varying)
    keep = ~pseudo.degenerate
    return bundle.encode_pseudo(pseudo)[keep], pseudo.delta[keep], pseudo.ei[keep]


DISCRETE_METRICS = ("smr", "auc")
CONTINUOUS_METRICS = ("smr", "c_index_harrell", "c_index_uno", "brier", "ibs")


def cmd_evaluate(config):
    bundle = _bundle(config)
    table = _table(config)
    allowed = DISCRETE_METRICS if bundle.discrete else CONTINUOUS_METRICS
    metrics = config.get("metrics", list(allowed))
    bad = [m for m in metrics if m not in allowed]
    if bad:
        family = "discrete" if bundle.discrete else "continuous"
        raise ConfigError(f"metrics {bad} are not available for {family} model {bundle.kind}")
    report = {"kind": bundle.kind}
    if bundle.discrete:
        X, delta, ei = _prepared_pseudo(bundle, table)
        q = bundle.mortality(X)
        if "smr" in metrics:
            report["smr"] = smr_discrete(delta, ei, q)
        if "auc" in metrics:
            report["auc"] = weighted_roc(delta, ei, q).auc
    else:
        tab = sd.impute_missing(table)
        X = bundle.encode_table(tab)
        d, e = tab.durations, tab.events
        tau = float(config.get("tau", np.quantile(d, 0.9)))
        predict = lambda times, X_: bundle.survival_at(X_, times)  # noqa: E731
        risk = 1.0 - bundle.survival_at(X, np.full(len(d), tau))
        G = censoring_survival(d, e)
        if "smr" in metrics:
            report["smr"] = smr(predict, X, d, e, tau)
        if "c_index_harrell" in metrics:
            report["c_index_harrell"] = c_index_harrell(risk, d, e)
        if "c_index_uno" in metrics:
            report["c_index_uno"] = c_index_uno(risk, d, e, G, tau=tau)
        if "brier" in metrics:
            for t in config.get("brier_times", [tau]):
                report[f"brier@{t}"] = brier_score(predict, X, d, e, float(t), G)
        if "ibs" in metrics:
            report["ibs"] = integrated_brier(predict, X, d, e, tau, G)
        report["tau"] = tau
    path = _out(config) / "metrics.json"
    write_report(report, path)
    print(json.dumps(report, sort_keys=True))
    return report


def _prediction_function(bundle, config):
    if bundle.discrete:
        return bundle.mortality
    tau = float(config.get("tau", 1.0))
    # survival models are explained through their cumulative hazard
    return lambda X: -np.log(np.clip(bundle.survival_at(X, np.full(len(X), tau)), 1e-300, None))


def cmd_explain(config):
    bundle = _bundle(config)
    table = _table(config)
    seed = int(config.get("seed", 0))
    out = _out(config)
    if bundle.discrete:
        X, delta, ei = _prepared_pseudo(bundle, table)
        y = delta
    else:
        tab = sd.impute_missing(table)
        X, y, ei = bundle.encode_table(tab), tab.events, None
    max_rows = config.get("max_rows")
    if max_rows is not None and len(X) > int(max_rows):
        rows = np.sort(np.random.default_rng(seed).choice(len(X), int(max_rows), replace=False))
        X, y = X[rows], y[rows]
        ei = None if ei is None else ei[rows]
    predict = _prediction_function(bundle, config)
    names = list(bundle.column_names)
    kinds = config.get("explain", ["pfi"])
    kinds = [kinds] if isinstance(kinds, str) else kinds
    written = []
    for kind in kinds:
        if kind == "pfi":
            metric = lambda yy, p: float(np.mean((np.asarray(yy, float) - p) ** 2))  # noqa: E731
            exp = permutation_importance(predict, X, y, metric, int(config.get("repeats", 5)), seed, names)
            path = out / "pfi.csv"
            exp.to_csv(path)
        elif kind == "pdp":
            for f in config.get("features", names[:1]):
                exp = partial_dependence(predict, X, f, n_points=int(config.get("n_points", 20)),
                                         feature_names=names)
                label = f if isinstance(f, str) else "_".join(map(str, f))
                path = out / f"pdp_{_safe(label)}.csv"
                exp.to_csv(path)
                written.append(path)
            continue
        elif kind == "shap":
            i = int(config.get("instance", 0))
            exp = shap_sample(predict, X, X[i], int(config.get("n_samples", 200)), seed, names)
            path = out / "shap.csv"
            exp.to_csv(path)
        elif kind == "cart_importance":
            if bundle.kind != "cart":
                raise ConfigError("cart_importance needs a cart model")
            imp = cart_variable_importance(bundle.model, X, y, ei, np.ones(len(y)), feature_names=names)
            path = out / "cart_importance.csv"
            write_importance_csv(imp, path)
        else:
            raise ConfigError(f"unknown explanation {kind!r}")
        written.append(path)
    for p in written:
        print(p)
    return written


def _safe(label):
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in str(label))


def cmd_price(config):
    bundle = _bundle(config)
    table = sd.impute_missing(_table(config))
    spec = ContractSpec(float(config.get("sum_insured", 1.0)), int(config.get("horizon", 10)),
                        float(config.get("interest", 0.0)))
    n = spec.horizon
    premiums = np.empty(len(table))
    if bundle.discrete:
        n_int = int(np.ceil(n / bundle.interval_length))
        for r in range(len(table)):
            cov = {k: table.covariates[k][r] for k in table.schema}
            q = bundle.individual_mortality(cov, n_int)
            S_int = survival_from_q(q)
            steps = np.arange(n + 1) / bundle.interval_length
            premiums[r] = pure_premium(S_int[np.minimum(np.floor(steps + 1e-9).astype(int), n_int)], spec)
    else:
        X = bundle.encode_table(table)
        S = bundle.survival_curve(X, np.arange(n + 1, dtype=float))
        S[:, 0] = 1.0
        premiums = np.array([pure_premium(S[r], spec) for r in range(len(table))])
    out = _out(config)
    with open(out / "premiums.csv", "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "premium"])
        for i, p in zip(table.ids, premiums):
            writer.writerow([i, repr(float(p))])
    age_col = config.get("age_column")
    if age_col is not None:
        if age_col not in table.schema:
            raise ConfigError(f"unknown age column {age_col!r}")
        ages = np.floor(table.covariates[age_col].astype(float)).astype(int)
        premium_by_age(ages, premiums, out / "premium_by_age.csv")
    print(f"rows={len(table)} mean_premium={float(np.mean(premiums)) if len(premiums) else 0.0!r}")
    return premiums


COMMANDS = {"expand": cmd_expand, "fit": cmd_fit, "evaluate": cmd_evaluate, "explain": cmd_explain,
            "price": cmd_price}


def build_parser():
    parser = argparse.ArgumentParser(prog="survml", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="flat JSON config file")
    parser.add_argument("--seed", type=int, help="overrides the config seed")
    parser.add_argument("--out", help="output directory (overrides the config)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, args.command)
        if args.seed is not None:
            config["seed"] = args.seed
        if args.out is not None:
            config["out"] = args.out
        if "threads" in config:
            os.environ["TOOL_THREADS"] = str(int(config["threads"]))
        COMMANDS[args.command](config)
    except (ConfigError, sd.SchemaError, ValueError, TypeError, KeyError, OSError,
            ZeroDivisionError) as exc:
        print(f"survml {args.command}: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
