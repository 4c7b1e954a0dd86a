"""Shapley-value explanations of the slicing policy."""
from .rollouts import RolloutGame, characteristic_values, explain_state
from .shapley import (
    ShapleyReport,
    all_masks,
    explanation_loss,
    mask_state,
    normalize_importance,
    permutation_coalitions,
    shapley_exact,
    shapley_mc,
)

__all__ = [
    "RolloutGame",
    "ShapleyReport",
    "all_masks",
    "characteristic_values",
    "explain_state",
    "explanation_loss",
    "mask_state",
    "normalize_importance",
    "permutation_coalitions",
    "shapley_exact",
    "shapley_mc",
]
