"""
Inter-annotator agreement
"""

import numpy as np
from statsmodels.stats import inter_rater

from ..models.errors import KappaUndefinedError, EntailKitValidationError


def fleiss_kappa(rating_matrix: np.ndarray | list[list[int]]) -> float:
    """
    Fleiss' kappa of an items x categories count table

    When chance agreement is 1 (every rating in one category) kappa is
    defined as 1.0 for perfect observed agreement.

    Raises:
        EntailKitValidationError: If the table is not 2-D, has negative
            counts, or items were rated by different numbers (< 2) of raters
        KappaUndefinedError: Chance agreement is 1 without perfect agreement
    """
    table = np.asarray(rating_matrix, dtype=np.float64)
    if table.ndim != 2 or table.shape[0] == 0 or table.shape[1] == 0:
        raise EntailKitValidationError(f"Rating matrix must be a non-empty items x categories table, got {table.shape}")
    if (table < 0).any():
        raise EntailKitValidationError("Rating counts must be non-negative")
    raters = table.sum(axis=1)
    if not np.all(raters == raters[0]) or raters[0] < 2:
        raise EntailKitValidationError(
            f"Every item needs the same number (>= 2) of ratings, got {sorted(set(raters.tolist()))}"
        )

    n = raters[0]
    category_share = table.sum(axis=0) / table.sum()
    chance = float((category_share**2).sum())
    if np.isclose(chance, 1.0):
        observed = float(((table * (table - 1)).sum(axis=1) / (n * (n - 1))).mean())
        if np.isclose(observed, 1.0):
            return 1.0
        raise KappaUndefinedError(f"Chance agreement is 1 but observed agreement is {observed:.6f}")
    return float(inter_rater.fleiss_kappa(table, method="fleiss"))


def ratings_table(labels: np.ndarray | list[list[int]]) -> np.ndarray:
    """items x raters category labels -> items x categories counts"""
    table, _ = inter_rater.aggregate_raters(np.asarray(labels))
    return table
