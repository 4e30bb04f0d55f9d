"""Simulation scenarios, the total-variation error metric, and the
Monte-Carlo harness comparing estimated hazards against the truth."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data import CutGrid, SurvivalData, sufficient_stats
from .inference import SegmentedHazard, extract_segments
from .selection import attach_bic, cross_validate, regularization_path, select_penalty
from .solver import DEFAULT_OPTIONS, FitOptions, ridge_fit

__all__ = [
    "WeibullHazard",
    "UniformCensoring",
    "WeibullCensoring",
    "TrueModel",
    "McSummary",
    "scenario_pch",
    "scenario_weibull",
    "sample_event_times",
    "apply_censoring",
    "simulate_dataset",
    "total_variation",
    "monte_carlo_experiment",
    "CUT_COUNT_BUCKETS",
]

CUT_COUNT_BUCKETS = ("0", "1", "2", "3", "4", "5+")


@dataclass(frozen=True)
class WeibullHazard:
    """Weibull hazard a (t/b)^(a-1) / b with shape a and scale b."""

    shape: float
    scale: float

    def __post_init__(self):
        if self.shape <= 0.0 or self.scale <= 0.0:
            raise ValueError("shape and scale must be positive")

    def hazard(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        return self.shape / self.scale * (t / self.scale) ** (self.shape - 1.0)

    def cumulative_hazard(self, t) -> np.ndarray:
        return (np.asarray(t, dtype=float) / self.scale) ** self.shape

    def survival(self, t) -> np.ndarray:
        return np.exp(-self.cumulative_hazard(t))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.scale * rng.weibull(self.shape, size)


@dataclass(frozen=True)
class UniformCensoring:
    low: float
    high: float

    def __post_init__(self):
        if not 0.0 < self.low <= self.high:
            raise ValueError("need 0 < low <= high")

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.uniform(self.low, self.high, size)


@dataclass(frozen=True)
class WeibullCensoring:
    shape: float
    scale: float

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return self.scale * rng.weibull(self.shape, size)


@dataclass(frozen=True)
class TrueModel:
    """A true hazard (piecewise-constant or Weibull) plus a censoring law."""

    hazard: SegmentedHazard | WeibullHazard
    censoring: UniformCensoring | WeibullCensoring


def scenario_pch() -> TrueModel:
    """Five-piece hazard (0, .005, .01, .02, .04) with breaks at 20/40/50/70,
    censored uniformly on [70, 90]; about 62% of failures are observed."""
    hazard = SegmentedHazard(
        breakpoints=np.array([20.0, 40.0, 50.0, 70.0]),
        rates=np.array([0.0, 0.5e-2, 1e-2, 2e-2, 4e-2]),
    )
    return TrueModel(hazard, UniformCensoring(70.0, 90.0))


def scenario_weibull() -> TrueModel:
    """Weibull(shape 5, scale 60) events, Weibull(shape 30, scale 60)
    censoring; same 62% observed-failure share as the step scenario."""
    return TrueModel(WeibullHazard(5.0, 60.0), WeibullCensoring(30.0, 60.0))


def sample_event_times(model: TrueModel, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw event times by inverting the cumulative hazard.

    For a step hazard the unit-exponential draw is mapped through the
    piecewise-linear cumulative hazard segment by segment; zero-rate segments
    carry no probability mass. The hazard must be proper (positive final
    rate), otherwise mass would escape to infinity.
    """
    hz = model.hazard
    if isinstance(hz, WeibullHazard):
        return hz.sample(rng, size)
    if hz.rates[-1] <= 0.0:
        raise ValueError("improper distribution: hazard vanishes at infinity")
    e = rng.exponential(1.0, size)
    starts = np.concatenate(([0.0], hz.breakpoints))
    cum_at_end = hz.cumulative_hazard(hz.breakpoints)  # at segment ends, finite ones
    cum_at_start = np.concatenate(([0.0], cum_at_end))
    seg = np.searchsorted(cum_at_end, e, side="right")
    return starts[seg] + (e - cum_at_start[seg]) / hz.rates[seg]


def apply_censoring(tstar, c) -> tuple[np.ndarray, np.ndarray]:
    """(observed time, event indicator); a tie counts as an observed event."""
    tstar = np.asarray(tstar, dtype=float)
    c = np.asarray(c, dtype=float)
    return np.minimum(tstar, c), (tstar <= c).astype(np.int64)


def simulate_dataset(model: TrueModel, n: int, rng: np.random.Generator) -> SurvivalData:
    tstar = sample_event_times(model, rng, n)
    c = model.censoring.sample(rng, n)
    time, status = apply_censoring(tstar, c)
    return SurvivalData(time, status)


def _simpson(values: np.ndarray, h: float) -> float:
    # composite Simpson; values has an odd length >= 3
    return h / 3.0 * float(values[0] + values[-1] + 4.0 * values[1:-1:2].sum() + 2.0 * values[2:-2:2].sum())


def _bisect_crossing(f, c: float, lo: float, hi: float) -> float:
    flo = float(f(lo)) - c
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if (float(f(mid)) - c) * flo <= 0.0:
            hi = mid
        else:
            lo = mid
            flo = float(f(lo)) - c
    return 0.5 * (lo + hi)


def total_variation(f, g, t_max: float, step: float = 0.01) -> float:
    """Integral of |f - g| over [0, t_max] between hazard functions.

    Step-vs-step is summed exactly on the merged breakpoint partition. When
    either side is continuous (a WeibullHazard or any object with a vectorized
    `hazard`), each step piece is integrated by composite Simpson after
    splitting at sign changes of the difference, so the integrand is smooth
    on every piece.
    """
    if t_max <= 0.0:
        raise ValueError("t_max must be positive")
    if isinstance(f, SegmentedHazard) and isinstance(g, SegmentedHazard):
        edges = np.unique(np.concatenate(([0.0, t_max], f.breakpoints, g.breakpoints)))
        edges = edges[(edges >= 0.0) & (edges <= t_max)]
        mids = 0.5 * (edges[:-1] + edges[1:])
        return float(np.sum(np.abs(f.hazard(mids) - g.hazard(mids)) * np.diff(edges)))
    # at least one continuous hazard: partition at any step breakpoints
    edges = [0.0, t_max]
    for side in (f, g):
        if isinstance(side, SegmentedHazard):
            edges.extend(b for b in side.breakpoints if 0.0 < b < t_max)
    edges = np.unique(np.asarray(edges))
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        # a step side is constant on the open piece; evaluating it at the
        # midpoint avoids picking the wrong branch at a shared breakpoint
        sides = [
            (lambda t, v=float(side.hazard(0.5 * (lo + hi))): np.full(np.shape(t), v))
            if isinstance(side, SegmentedHazard)
            else side.hazard
            for side in (f, g)
        ]
        diff = lambda t: np.asarray(sides[0](t), dtype=float) - np.asarray(sides[1](t), dtype=float)
        pieces = [lo]
        n_nodes = max(int(math.ceil((hi - lo) / step)), 2)
        probe = np.linspace(lo, hi, n_nodes + 1)
        d = diff(probe)
        for i in range(n_nodes):
            if d[i] == 0.0 or d[i] * d[i + 1] < 0.0:
                root = _bisect_crossing(lambda t: diff(np.array([t]))[0], 0.0, probe[i], probe[i + 1])
                if pieces[-1] < root < hi:
                    pieces.append(root)
        pieces.append(hi)
        for a, b in zip(pieces[:-1], pieces[1:]):
            if b <= a:
                continue
            n_sub = max(int(math.ceil((b - a) / step)), 2)
            n_sub += n_sub % 2  # Simpson needs an even interval count
            grid = np.linspace(a, b, n_sub + 1)
            total += _simpson(np.abs(diff(grid)), (b - a) / n_sub)
    return total


@dataclass(frozen=True)
class McSummary:
    """Monte-Carlo aggregate: cut-count distribution and mean total variation."""

    n: int
    reps: int
    criterion: str
    cut_count_proportions: dict[str, float]
    mean_tv: float
    mean_tv_ridge: float | None
    failures: int


def _bucket(n_cuts: int) -> str:
    return str(n_cuts) if n_cuts < 5 else "5+"


def monte_carlo_experiment(
    model: TrueModel,
    n: int,
    reps: int,
    criterion: str,
    grid: CutGrid,
    penalties: np.ndarray,
    seed: int = 0,
    opts: FitOptions = DEFAULT_OPTIONS,
    tv_horizon: float | None = None,
    ridge_pen: float | None = None,
    cv_folds: int = 10,
    refit: bool = True,
) -> McSummary:
    """Repeatedly simulate, fit a path, select a penalty, and score the fit.

    Per replicate the detected cut count and the total variation against the
    true hazard on [0, tv_horizon] are recorded; with `ridge_pen` a
    fixed-weight ridge fit at that penalty is scored alongside. Replicate RNG
    streams derive from (seed, replicate index), so results do not depend on
    execution order. Failed replicates are counted and excluded.
    """
    if reps < 1:
        raise ValueError("reps must be at least 1")
    if tv_horizon is None:
        tv_horizon = 80.0 if isinstance(model.hazard, SegmentedHazard) else 60.0
    counts = {b: 0 for b in CUT_COUNT_BUCKETS}
    tvs = []
    tvs_ridge = []
    failures = 0
    for rep in range(reps):
        rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(rep,)))
        data = simulate_dataset(model, n, rng)
        stats = sufficient_stats(data, grid)
        try:
            path = regularization_path(stats, penalties, opts)
            if criterion == "cv":
                path.cv = cross_validate(
                    data, grid, penalties, k=cv_folds,
                    seed=int(rng.integers(2**31 - 1)), opts=opts,
                )
            else:
                attach_bic(path, data.n)
            _, fit, _ = select_penalty(path, criterion)
            seg = extract_segments(fit, grid, stats, refit=refit)
            if ridge_pen is not None:
                rfit = ridge_fit(stats, ridge_pen, opts)
                ridge_seg = SegmentedHazard.merged(grid.cuts, np.exp(rfit.a))
        except ValueError:
            failures += 1
            continue
        counts[_bucket(seg.breakpoints.size)] += 1
        tvs.append(total_variation(model.hazard, seg, tv_horizon))
        if ridge_pen is not None:
            tvs_ridge.append(total_variation(model.hazard, ridge_seg, tv_horizon))
    used = reps - failures
    if used == 0:
        raise ValueError("all replicates failed")
    return McSummary(
        n=n,
        reps=reps,
        criterion=criterion,
        cut_count_proportions={b: counts[b] / used for b in CUT_COUNT_BUCKETS},
        mean_tv=float(np.mean(tvs)),
        mean_tv_ridge=float(np.mean(tvs_ridge)) if ridge_pen is not None else None,
        failures=failures,
    )
