"""Survival quantities from fits: segment extraction, curves, bootstrap bands,
quantile readouts, and a Kaplan-Meier comparator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .data import CutGrid, SufficientStats, SurvivalData, sufficient_stats
from .likelihood import LOG_RATE_MIN
from .selection import (
    BREAK_THRESHOLD,
    attach_bic,
    cross_validate,
    regularization_path,
    select_penalty,
)
from .solver import DEFAULT_OPTIONS, FitOptions, PenalizedFit

__all__ = [
    "SegmentedHazard",
    "BootstrapBands",
    "KaplanMeierCurve",
    "extract_segments",
    "survival_quantile",
    "bootstrap_bands",
    "kaplan_meier",
]


@dataclass(frozen=True)
class SegmentedHazard:
    """Piecewise-constant hazard: K rates separated by K-1 breakpoints.

    The last segment extends to infinity. Adjacent rates must differ, so the
    segmentation is maximal; use `merged` to collapse equal neighbours.
    """

    breakpoints: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).reshape(-1)
        rates = np.asarray(self.rates, dtype=float).reshape(-1)
        if rates.size != bp.size + 1:
            raise ValueError("need exactly one more rate than breakpoints")
        if bp.size and (np.any(bp <= 0.0) or not np.all(np.isfinite(bp))):
            raise ValueError("breakpoints must be positive and finite")
        if bp.size > 1 and np.any(np.diff(bp) <= 0.0):
            raise ValueError("breakpoints must be strictly increasing")
        if np.any(rates < 0.0) or not np.all(np.isfinite(rates)):
            raise ValueError("rates must be non-negative and finite")
        if rates.size > 1 and np.any(rates[1:] == rates[:-1]):
            raise ValueError("adjacent rates must differ (segments are maximal)")
        for name, arr in (("breakpoints", bp), ("rates", rates)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @classmethod
    def merged(cls, breakpoints, rates) -> "SegmentedHazard":
        """Build a SegmentedHazard, collapsing runs of equal adjacent rates."""
        bp = list(np.asarray(breakpoints, dtype=float).reshape(-1))
        rates = list(np.asarray(rates, dtype=float).reshape(-1))
        keep_b, keep_r = [], []
        for i, r in enumerate(rates):
            if keep_r and r == keep_r[-1]:
                continue
            if i > 0:
                keep_b.append(bp[i - 1])
            keep_r.append(r)
        return cls(np.array(keep_b), np.array(keep_r))

    def hazard(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.rates[np.searchsorted(self.breakpoints, t, side="left")]

    def cumulative_hazard(self, t) -> np.ndarray:
        """Exact integral of the step hazard from 0 to t."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0.0):
            raise ValueError("negative time")
        starts = np.concatenate(([0.0], self.breakpoints))
        ends = np.concatenate((self.breakpoints, [np.inf]))
        seg_time = np.clip(t[..., None] - starts, 0.0, ends - starts)
        return seg_time @ self.rates

    def survival(self, t) -> np.ndarray:
        return np.exp(-self.cumulative_hazard(t))


def extract_segments(
    fit: PenalizedFit,
    grid: CutGrid,
    stats: SufficientStats,
    refit: bool = True,
) -> SegmentedHazard:
    """Merge bins whose weighted squared log-rate difference is below threshold.

    Detected breakpoints are the cuts c_l with w_l (a_{l+1}-a_l)^2 >= 1/2.
    With refit (default), each merged segment's rate is the closed-form
    estimate on its pooled events and exposure; otherwise the rate is the
    exposure-weighted mean of exp-scale parameters kept from the fit.
    """
    L = stats.n_bins
    if fit.a.shape != (L,) or grid.n_bins != L:
        raise ValueError("fit, grid and stats disagree on the number of bins")
    if L == 1:
        is_break = np.zeros(0, dtype=bool)
    else:
        is_break = fit.w * np.square(np.diff(fit.a)) >= BREAK_THRESHOLD
    bounds = np.flatnonzero(is_break) + 1  # bin index where each new segment starts
    starts = np.concatenate(([0], bounds))
    stops = np.concatenate((bounds, [L]))
    rates = np.empty(starts.size)
    for j, (lo, hi) in enumerate(zip(starts, stops)):
        if refit:
            events = stats.events[lo:hi].sum()
            exposure = stats.exposure[lo:hi].sum()
            rates[j] = events / exposure if exposure > 0.0 else 0.0
        else:
            exposure = stats.exposure[lo:hi]
            if exposure.sum() > 0.0:
                mean_a = float(fit.a[lo:hi] @ exposure / exposure.sum())
            else:
                mean_a = float(fit.a[lo:hi].mean())
            rates[j] = 0.0 if mean_a <= LOG_RATE_MIN else math.exp(mean_a)
    return SegmentedHazard.merged(grid.cuts[bounds - 1], rates)


def survival_quantile(curve, p: float, times: np.ndarray | None = None):
    """Time at which survival first drops to 1-p, or None if never reached.

    For a SegmentedHazard the crossing is solved exactly; for a sampled curve
    (`curve` = survival values over `times`) the convention is the smallest
    grid time t with S(t) <= 1-p.
    """
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0, 1)")
    target = 1.0 - p
    if isinstance(curve, SegmentedHazard):
        needed = -math.log(target)
        starts = np.concatenate(([0.0], curve.breakpoints))
        base = curve.cumulative_hazard(starts)
        idx = None
        for j in range(starts.size):
            end = curve.cumulative_hazard(curve.breakpoints[j]) if j < curve.breakpoints.size else np.inf
            if needed <= end:
                idx = j
                break
        if idx is None or curve.rates[idx] == 0.0 and needed > base[idx]:
            return None
        if needed == base[idx]:
            return float(starts[idx])
        return float(starts[idx] + (needed - base[idx]) / curve.rates[idx])
    values = np.asarray(curve, dtype=float)
    times = np.asarray(times, dtype=float)
    if values.shape != times.shape:
        raise ValueError("curve and times must have matching shapes")
    hit = np.flatnonzero(values <= target)
    return float(times[hit[0]]) if hit.size else None


@dataclass(frozen=True)
class BootstrapBands:
    """Pointwise quantile curves over bootstrap survival estimates."""

    times: np.ndarray
    median: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float
    n_replicates: int
    criterion: str
    seed: int


def bootstrap_bands(
    data: SurvivalData,
    grid: CutGrid,
    penalties: np.ndarray,
    criterion: str = "bic",
    n_boot: int = 100,
    time_grid: np.ndarray | None = None,
    seed: int = 0,
    opts: FitOptions = DEFAULT_OPTIONS,
    refit: bool = True,
    cv_folds: int = 10,
    level: float = 0.95,
) -> BootstrapBands:
    """Pointwise survival bands from resampling individuals with replacement.

    Each replicate reruns the whole pipeline (path, penalty selection by the
    requested criterion, segment extraction), so the bands carry both the
    estimation and the cut-selection variability. Bands are the empirical
    (1 +/- level)/2 quantiles; the central curve is the pointwise median.
    Replicate RNG streams are derived from (seed, replicate index), so any
    execution order gives the same result. A failed replicate is redrawn
    from fresh streams, up to n_boot extra attempts.
    """
    if n_boot < 2:
        raise ValueError("need at least 2 bootstrap replicates")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    if time_grid is None:
        time_grid = np.linspace(0.0, data.max_time, 201)
    time_grid = np.asarray(time_grid, dtype=float)
    curves = np.empty((n_boot, time_grid.size))
    done = 0
    for attempt in range(2 * n_boot):
        if done == n_boot:
            break
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(attempt,)))
        idx = rng.integers(0, data.n, data.n)
        sample = data.subset(idx)
        try:
            stats = sufficient_stats(sample, grid)
            path = regularization_path(stats, penalties, opts)
            if criterion == "cv":
                path.cv = cross_validate(
                    sample, grid, penalties, k=cv_folds,
                    seed=int(rng.integers(2**31 - 1)), opts=opts,
                )
            else:
                attach_bic(path, sample.n)
            _, fit, _ = select_penalty(path, criterion)
            seg = extract_segments(fit, grid, stats, refit=refit)
        except ValueError:
            continue
        curves[done] = seg.survival(time_grid)
        done += 1
    if done < n_boot:
        raise ValueError(f"bootstrap failed: only {done} of {n_boot} replicates fitted")
    alpha = (1.0 - level) / 2.0
    lower, median, upper = np.quantile(curves, [alpha, 0.5, 1.0 - alpha], axis=0)
    return BootstrapBands(
        times=time_grid,
        median=median,
        lower=lower,
        upper=upper,
        level=level,
        n_replicates=n_boot,
        criterion=criterion,
        seed=seed,
    )


@dataclass(frozen=True)
class KaplanMeierCurve:
    """Product-limit survival estimate with log-scale Greenwood intervals."""

    times: np.ndarray  # distinct event times, ascending
    survival: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    level: float

    def evaluate(self, t) -> np.ndarray:
        """Right-continuous step evaluation; S = 1 before the first event."""
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right")
        return np.concatenate(([1.0], self.survival))[idx]

    def evaluate_bounds(self, t) -> tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        idx = np.searchsorted(self.times, t, side="right")
        lo = np.concatenate(([1.0], self.lower))[idx]
        hi = np.concatenate(([1.0], self.upper))[idx]
        return lo, hi


def kaplan_meier(data: SurvivalData, level: float = 0.95) -> KaplanMeierCurve:
    """Kaplan-Meier estimate at distinct event times with pointwise CI.

    The interval is Greenwood's variance on the log-survival scale,
    S * exp(+/- z * sqrt(sum d / (r (r - d)))), clamped to [0, 1].
    """
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    order = np.argsort(data.time, kind="stable")
    times = data.time[order]
    status = data.status[order]
    uniq = np.unique(times[status == 1])
    n_at_risk = data.n - np.searchsorted(times, uniq, side="left")
    d = np.array([int(status[times == t].sum()) for t in uniq])
    frac = 1.0 - d / n_at_risk
    surv = np.cumprod(frac)
    # Greenwood increments; the last factor may be exactly zero
    with np.errstate(divide="ignore", invalid="ignore"):
        inc = np.where(n_at_risk > d, d / (n_at_risk * (n_at_risk - d)), np.inf)
    var_log = np.cumsum(inc)
    z = NormalDist().inv_cdf(0.5 + level / 2.0)
    with np.errstate(invalid="ignore"):
        half = np.where(np.isfinite(var_log), z * np.sqrt(var_log), np.inf)
        lower = np.where(surv > 0.0, surv * np.exp(-half), 0.0)
        upper = np.where(surv > 0.0, surv * np.exp(half), 0.0)
    return KaplanMeierCurve(
        times=uniq.astype(float),
        survival=surv,
        lower=np.clip(lower, 0.0, 1.0),
        upper=np.clip(upper, 0.0, 1.0),
        level=level,
    )
