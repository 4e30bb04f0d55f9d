"""Warm-started penalty paths and penalty selection by BIC or cross-validation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import CutGrid, SurvivalData, sufficient_stats
from .likelihood import log_likelihood
from .solver import DEFAULT_OPTIONS, FitOptions, PenalizedFit, adaptive_ridge_fit

__all__ = [
    "PathResult",
    "penalty_grid",
    "regularization_path",
    "model_dimension",
    "bic",
    "attach_bic",
    "cv_fold_indices",
    "cross_validate",
    "select_penalty",
]

# A neighbour pair counts as a break when w_l (a_{l+1}-a_l)^2 >= 1/2, the
# midpoint of the indicator's near-0 / near-1 dichotomy; by the weight-update
# identity this is |a_{l+1}-a_l| >= delta.
BREAK_THRESHOLD = 0.5


def penalty_grid(pen_min: float, pen_max: float, count: int) -> np.ndarray:
    """`count` log-equispaced penalties from pen_min to pen_max inclusive."""
    if not 0.0 < pen_min < pen_max:
        raise ValueError("need 0 < pen_min < pen_max")
    if count < 2:
        raise ValueError("need at least 2 penalties")
    values = np.exp(np.linspace(math.log(pen_min), math.log(pen_max), count))
    values[0] = pen_min
    values[-1] = pen_max
    return values


@dataclass
class PathResult:
    """Per-penalty fits along an ascending penalty grid, plus criterion values."""

    penalties: np.ndarray
    fits: list[PenalizedFit | None]
    bic: np.ndarray | None = None
    cv: np.ndarray | None = None
    failures: list[str] = field(default_factory=list)


def regularization_path(
    stats,
    penalties: np.ndarray,
    opts: FitOptions = DEFAULT_OPTIONS,
    w0: np.ndarray | None = None,
) -> PathResult:
    """Fit every penalty in ascending order, warm-starting from the previous fit.

    Each fit reuses the preceding penalty's final weights (and log-hazard) as
    its starting point; the first fit starts from all-ones weights unless w0
    is given. A failed fit leaves a None entry and the next penalty falls
    back to a cold start.
    """
    penalties = np.asarray(penalties, dtype=float)
    if penalties.size and np.any(np.diff(penalties) <= 0.0):
        raise ValueError("penalties must be strictly increasing")
    fits: list[PenalizedFit | None] = []
    failures: list[str] = []
    warm_w = w0
    warm_a = None
    for pen in penalties:
        try:
            fit = adaptive_ridge_fit(stats, float(pen), opts, w0=warm_w, a0=warm_a)
        except ValueError as exc:
            fits.append(None)
            failures.append(f"pen={pen:g}: {exc}")
            warm_w = None
            warm_a = None
            continue
        fits.append(fit)
        warm_w = fit.w
        warm_a = fit.a
    return PathResult(penalties, fits, failures=failures)


def model_dimension(fit: PenalizedFit) -> int:
    """Number of constant log-hazard segments after fusion (BIC complexity d)."""
    if fit.w.size == 0:
        return 1
    breaks = fit.w * np.square(np.diff(fit.a)) >= BREAK_THRESHOLD
    return 1 + int(breaks.sum())


def bic(fit: PenalizedFit, n: int) -> float:
    """-2 * loglik + d * log(n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return -2.0 * fit.loglik + model_dimension(fit) * math.log(n)


def attach_bic(path: PathResult, n: int) -> PathResult:
    path.bic = np.array(
        [bic(f, n) if f is not None else np.nan for f in path.fits]
    )
    return path


def cv_fold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Partition 0..n-1 into k folds by seeded shuffle (unstratified)."""
    if k < 2:
        raise ValueError("need at least 2 folds")
    if n < k:
        raise ValueError("need at least as many observations as folds")
    rng = np.random.default_rng(seed)
    return [np.sort(part) for part in np.array_split(rng.permutation(n), k)]


def _cv_once(
    data: SurvivalData,
    grid: CutGrid,
    penalties: np.ndarray,
    folds: list[np.ndarray],
    opts: FitOptions,
) -> np.ndarray:
    n = data.n
    cv = np.zeros(penalties.size)
    for fold in folds:
        held = np.zeros(n, dtype=bool)
        held[fold] = True
        test_stats = sufficient_stats(data.subset(fold), grid)
        if test_stats.exposure.sum() == 0.0:
            raise ValueError("fold with zero total exposure")
        train_stats = sufficient_stats(data.subset(np.flatnonzero(~held)), grid)
        path = regularization_path(train_stats, penalties, opts)
        for j, fit in enumerate(path.fits):
            cv[j] += log_likelihood(test_stats, fit.a) if fit is not None else np.nan
    return cv


def cross_validate(
    data: SurvivalData,
    grid: CutGrid,
    penalties: np.ndarray,
    k: int = 10,
    seed: int = 0,
    opts: FitOptions = DEFAULT_OPTIONS,
) -> np.ndarray:
    """k-fold cross-validated log-likelihood, one value per penalty.

    For each fold, a warm-started path is fitted on the complement and the
    held-out fold's unpenalized likelihood is evaluated at each fit; values
    are summed over folds. Larger is better. A degenerate partition (a fold
    with zero exposure) is redrawn once before failing.
    """
    penalties = np.asarray(penalties, dtype=float)
    try:
        folds = cv_fold_indices(data.n, k, seed)
        return _cv_once(data, grid, penalties, folds, opts)
    except ValueError as exc:
        if "zero total exposure" not in str(exc):
            raise
        folds = cv_fold_indices(data.n, k, seed + 1)
        return _cv_once(data, grid, penalties, folds, opts)


def select_penalty(path: PathResult, criterion: str = "bic") -> tuple[float, PenalizedFit, int]:
    """Best entry by min BIC or max CV; ties break toward the larger penalty."""
    if criterion == "bic":
        values = path.bic
        sign = 1.0
    elif criterion == "cv":
        values = path.cv
        sign = -1.0
    else:
        raise ValueError(f"unknown criterion {criterion!r}")
    if values is None:
        raise ValueError(f"{criterion} values not computed for this path")
    values = np.asarray(values, dtype=float)
    best = None
    for i in range(values.size - 1, -1, -1):  # reverse scan: ties pick larger pen
        if path.fits[i] is None or not np.isfinite(values[i]):
            continue
        if best is None or sign * values[i] < sign * values[best]:
            best = i
    if best is None:
        raise ValueError("no usable fit in the path")
    return float(path.penalties[best]), path.fits[best], best
