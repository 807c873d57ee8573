"""CART, pruning, surrogate importance, survival trees and forests."""

from .cart import best_split, grow_maximal_tree, split_gain
from .forest import Forest, fit_forest
from .importance import Surrogate, cart_variable_importance, surrogate_split
from .impurity import entropy, gini, impurity
from .pruning import PruneSequence, penalized_risk, prune_sequence, select_subtree, weak_link_scores
from .survival_tree import best_logrank_split, grow_survival_tree
from .tree import LEAF, Split, Tree

__all__ = [
    "LEAF", "Forest", "PruneSequence", "Split", "Surrogate", "Tree", "best_logrank_split",
    "best_split", "cart_variable_importance", "entropy", "fit_forest", "gini", "grow_maximal_tree",
    "grow_survival_tree", "impurity", "penalized_risk", "prune_sequence", "select_subtree",
    "split_gain", "surrogate_split", "weak_link_scores",
]
