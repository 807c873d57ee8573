"""AdaBoost, gradient boosting and second-order tree boosting."""

from ..optim import gradient_descent
from .adaboost import adaboost_fit
from .gbm import gbm_fit
from .losses import (AbsoluteLoss, CoxPartialLoss, ExposureBinomialLoss, HuberLoss, LogisticLoss,
                     LossFunction, SquaredLoss, get_loss)
from .model import BoostedModel, predict_mortality, survival_from_mortality
from .xgb import grow_xgb_tree, xgb_leaf_weight, xgb_split_gain, xgboost_fit, xgboost_fit_pseudo

__all__ = [
    "AbsoluteLoss", "BoostedModel", "CoxPartialLoss", "ExposureBinomialLoss", "HuberLoss",
    "LogisticLoss", "LossFunction", "SquaredLoss", "adaboost_fit", "gbm_fit", "get_loss",
    "gradient_descent", "grow_xgb_tree", "predict_mortality", "survival_from_mortality",
    "xgb_leaf_weight", "xgb_split_gain", "xgboost_fit", "xgboost_fit_pseudo",
]
