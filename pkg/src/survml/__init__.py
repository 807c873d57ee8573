"""Censoring-aware trees, boosting and survival estimators for mortality modelling."""

from .data import (PseudoTable, SchemaError, SurvivalTable, exposure_expansion, impute_missing,
                   load_survival_table, one_hot_encode, stratified_split)
from .estimators import (CoxModel, censoring_survival, cox_fit, kaplan_meier, logrank_statistic,
                         nelson_aalen)
from .pipeline import ModelBundle, fit_model
from .pricing import ContractSpec, pure_premium

__version__ = "0.1.0"

__all__ = [
    "ContractSpec", "CoxModel", "ModelBundle", "PseudoTable", "SchemaError", "SurvivalTable",
    "censoring_survival", "cox_fit", "exposure_expansion", "fit_model", "impute_missing",
    "kaplan_meier", "load_survival_table", "logrank_statistic", "nelson_aalen", "one_hot_encode",
    "pure_premium", "stratified_split",
]
