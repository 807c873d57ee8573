"""Fit any supported model kind on a survival table and (de)serialize it.

Discrete kinds are fitted on the one-hot encoded pseudo table (interval
index included as a feature) and predict per-interval mortality. Continuous
kinds are fitted on the encoded survival table and predict survival curves.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import data as sd
from .boosting import BoostedModel, adaboost_fit, gbm_fit, xgboost_fit
from .estimators import CoxModel, cox_fit, curve_from_dict, kaplan_meier, nelson_aalen
from .glm import GlmModel, log_exposure, logistic_fit_weighted, poisson_fit_offset
from .trees import Forest, Tree, fit_forest, grow_maximal_tree, grow_survival_tree

DISCRETE_KINDS = ("cart", "forest", "adaboost", "gbm", "xgb", "logistic", "poisson")
CONTINUOUS_KINDS = ("survival_tree", "survival_forest", "cox", "km", "na")
MODEL_KINDS = DISCRETE_KINDS + CONTINUOUS_KINDS

# kinds whose likelihood is not identifiable under full one-hot coding
REFERENCE_CODED = ("logistic", "poisson", "cox")
TREE_KEYS = ("min_node_size", "max_depth", "criterion")
SURV_TREE_KEYS = ("min_events_per_leaf", "min_logrank", "max_depth")


def _pick(config, keys):
    return {k: config[k] for k in keys if k in config}


def encoding_to_json(encoding):
    return [[name, level, int(idx)] for name, slots in encoding.items() for level, idx in slots.items()]


def encoding_from_json(rows):
    enc = {}
    for name, level, idx in rows:
        enc.setdefault(name, {})[level] = int(idx)
    return enc


@dataclass
class ModelBundle:
    """A fitted model with everything needed to encode new data for it."""

    kind: str
    model: object
    encoding: dict
    column_names: list
    schema: dict
    interval_length: float = 1.0
    time_varying: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    @property
    def discrete(self):
        return self.kind in DISCRETE_KINDS

    # -- encoding ----------------------------------------------------------
    def encode_pseudo(self, pseudo):
        cov, schema = pseudo.feature_table()
        return sd.encode(cov, schema, self.encoding, self.column_names).values

    def encode_table(self, table):
        return sd.encode(table.covariates, table.schema, self.encoding, self.column_names).values

    # -- predictions -------------------------------------------------------
    def mortality(self, X):
        """Per-row interval mortality for discrete kinds (encoded pseudo rows)."""
        m = self.model
        if self.kind in ("cart", "forest"):
            proba = m.predict_proba(X)
            ones = np.flatnonzero(m.classes == 1)
            return proba[:, ones[0]] if ones.size else np.zeros(len(X))
        if self.kind == "adaboost":
            # logistic calibration of the vote margin
            return 1.0 / (1.0 + np.exp(-2.0 * m.raw_score(X)))
        if self.kind == "gbm":
            return np.clip(m.predict(X), 0.0, 1.0)
        if self.kind == "xgb":
            return m.predict(X)
        if self.kind in ("logistic", "poisson"):
            return m.predict(X)
        raise TypeError(f"{self.kind} does not predict interval mortality")

    def individual_mortality(self, covariates, n_intervals):
        cov, schema = sd.expand_individual(covariates, self.schema, n_intervals, self.time_varying,
                                           self.interval_length)
        X = sd.encode(cov, schema, self.encoding, self.column_names).values
        return self.mortality(X)

    def survival_at(self, X, times):
        """Survival of encoded rows ``X`` at per-row ``times`` (continuous kinds)."""
        times = np.asarray(times, dtype=float)
        m = self.model
        if self.kind == "km":
            return np.asarray(m(times))
        if self.kind == "na":
            return np.exp(-np.asarray(m(times)))
        if self.kind == "cox":
            return np.exp(-np.asarray(m.baseline(times)) * np.exp(np.asarray(X) @ m.beta))
        if self.kind in ("survival_tree", "survival_forest"):
            out = np.empty(times.size)
            for t in np.unique(times):
                rows = np.flatnonzero(times == t)
                out[rows] = np.exp(-m.cumulative_hazard(X[rows], [t])[:, 0])
            return out
        raise TypeError(f"{self.kind} does not predict survival curves")

    def survival_curve(self, X, grid):
        """Matrix of survival values, rows of ``X`` by ``grid``."""
        X = np.asarray(X, dtype=float)
        return np.column_stack([self.survival_at(X, np.full(X.shape[0], t)) for t in grid])

    # -- serialization -----------------------------------------------------
    def to_json(self):
        doc = {"kind": self.kind, "encoding": encoding_to_json(self.encoding),
               "column_names": list(self.column_names), "schema": dict(self.schema),
               "interval_length": self.interval_length, "time_varying": list(self.time_varying),
               "config": self.config, "model": self.model.to_dict()}
        return json.dumps(doc, sort_keys=True, indent=1)

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        kind = doc["kind"]
        if kind not in MODEL_KINDS:
            raise ValueError(f"unknown model kind {kind!r}")
        md = doc["model"]
        if kind in ("km", "na"):
            model = curve_from_dict(md)
        elif kind == "cox":
            model = CoxModel.from_dict(md)
        elif kind in ("cart", "survival_tree"):
            model = Tree.from_dict(md)
        elif kind in ("forest", "survival_forest"):
            model = Forest.from_dict(md)
        elif kind in ("adaboost", "gbm", "xgb"):
            model = BoostedModel.from_dict(md)
        else:
            model = GlmModel.from_dict(md)
        return cls(kind, model, encoding_from_json(doc["encoding"]), doc["column_names"], doc["schema"],
                   doc["interval_length"], doc["time_varying"], doc.get("config", {}))


def training_log(bundle):
    m = bundle.model
    if isinstance(m, BoostedModel):
        return list(m.log)
    report = getattr(m, "report", None)
    if report is not None:
        return [(i, v) for i, v in enumerate(report.trace)]
    return []


def fit_model(kind, table, config=None, seed=0):
    """Impute, encode and fit ``kind`` on a :class:`~survml.data.SurvivalTable`."""
    config = dict(config or {})
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}")
    table = sd.impute_missing(table)
    L = float(config.get("interval_length", 1.0))
    tv = list(config.get("time_varying", []))

    if kind in DISCRETE_KINDS:
        pseudo = sd.exposure_expansion(table, L, tv)
        keep = ~pseudo.degenerate
        enc = _encoded(kind, pseudo)
        X, delta, ei, ec = enc.values[keep], pseudo.delta[keep], pseudo.ei[keep], pseudo.ec[keep]
        model = _fit_discrete(kind, X, delta, ei, ec, config, seed)
    else:
        enc = _encoded(kind, table)
        model = _fit_continuous(kind, enc.values, table.durations, table.events, config, seed)
    return ModelBundle(kind, model, enc.encoding, enc.column_names, dict(table.schema), L,
                       [t if isinstance(t, str) else list(t) for t in tv], config)


def _encoded(kind, table):
    enc = sd.one_hot_encode(table)
    if kind not in REFERENCE_CODED:
        return enc
    return sd.one_hot_encode(table, sd.drop_reference_levels(enc.encoding)[0])


def _fit_discrete(kind, X, delta, ei, ec, config, seed):
    if kind == "cart":
        return grow_maximal_tree(X, delta, ei, task="classification", size_weights=np.ones(len(delta)),
                                 **_pick(config, TREE_KEYS))
    if kind == "forest":
        return fit_forest(X, delta, ei, kind="classification", n_trees=int(config.get("n_trees", 100)),
                          max_features=config.get("max_features"), bootstrap=bool(config.get("bootstrap", True)),
                          seed=seed, tree_config=_pick(config, TREE_KEYS))
    if kind == "adaboost":
        return adaboost_fit(X, 2 * delta - 1, n_learners=int(config.get("n_learners", 50)),
                            max_depth=int(config.get("max_depth", 2)))
    if kind == "gbm":
        return gbm_fit(X, delta.astype(float), loss=config.get("loss", "squared"),
                       n_stages=int(config.get("n_stages", 100)),
                       learning_rate=float(config.get("learning_rate", 0.1)),
                       max_depth=int(config.get("max_depth", 3)),
                       min_node_size=int(config.get("min_node_size", 5)),
                       huber_quantile=float(config.get("huber_quantile", 0.9)))
    if kind == "xgb":
        weights = ec if config.get("weight_column", "ei") == "ec" else ei
        return xgboost_fit(X, delta, weights, loss="exposure_binomial",
                           n_rounds=int(config.get("n_rounds", 100)),
                           learning_rate=float(config.get("learning_rate", 0.1)),
                           reg_lambda=float(config.get("reg_lambda", 1.0)),
                           gamma=float(config.get("gamma", 0.0)),
                           max_depth=int(config.get("max_depth", 6)),
                           subsample_rows=float(config.get("subsample_rows", 1.0)),
                           subsample_cols=float(config.get("subsample_cols", 1.0)),
                           min_child_hessian=float(config.get("min_child_hessian", 1e-3)),
                           base_score=config.get("base_score"), seed=seed)
    if kind == "logistic":
        return logistic_fit_weighted(X, delta, ei, tol=float(config.get("tol", 1e-8)),
                                     max_iter=int(config.get("max_iter", 100)))
    # poisson: rows with zero central exposure carry no information on the rate
    pos = ec > 0
    return poisson_fit_offset(X[pos], delta[pos], log_exposure(ec[pos]), tol=float(config.get("tol", 1e-8)),
                              max_iter=int(config.get("max_iter", 100)))


def _fit_continuous(kind, X, durations, events, config, seed):
    if kind == "km":
        return kaplan_meier(durations, events)
    if kind == "na":
        return nelson_aalen(durations, events)
    if kind == "cox":
        return cox_fit(X, durations, events, max_iter=int(config.get("max_iter", 100)),
                       tol=float(config.get("tol", 1e-8)))
    if kind == "survival_tree":
        return grow_survival_tree(X, durations, events, **_pick(config, SURV_TREE_KEYS))
    return fit_forest(X, (durations, events), kind="survival", n_trees=int(config.get("n_trees", 100)),
                      max_features=config.get("max_features"), bootstrap=bool(config.get("bootstrap", True)),
                      seed=seed, tree_config=_pick(config, SURV_TREE_KEYS))


__all__ = ["CONTINUOUS_KINDS", "DISCRETE_KINDS", "MODEL_KINDS", "ModelBundle", "fit_model",
           "training_log"]
