"""Banded LDL solves and the penalized fitting loops.

`newton_fit` maximizes the penalized objective for fixed weights;
`adaptive_ridge_fit` alternates Newton fits with the weight update
w_l = ((a_{l+1}-a_l)^2 + delta^2)^-1 that makes the squared-difference
penalty approximate a count of unequal neighbours. `ridge_fit` keeps all
weights at 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import SufficientStats
from .likelihood import (
    LOG_RATE_MAX,
    LOG_RATE_MIN,
    BandMatrix,
    clip_log_rates,
    log_likelihood,
    neg_hessian,
    penalized_log_likelihood,
    score,
)

__all__ = [
    "FitOptions",
    "PenalizedFit",
    "NewtonResult",
    "NotPositiveDefiniteError",
    "solve_band_spd",
    "ldl_pivots",
    "initial_log_hazard",
    "newton_fit",
    "adaptive_ridge_fit",
    "ridge_fit",
    "weight_update",
]

_EPS = float(np.finfo(float).eps)


class NotPositiveDefiniteError(ValueError):
    """Raised when the LDL factorization hits a non-positive pivot."""

    def __init__(self, pivot_index: int):
        self.pivot_index = pivot_index
        super().__init__(f"matrix not positive definite (pivot {pivot_index})")


@dataclass(frozen=True)
class FitOptions:
    newton_tol: float = 1e-8  # max-abs (projected) score
    newton_max_iter: int = 100
    outer_tol: float = 1e-6  # max-abs change in a across outer iterations
    outer_max_iter: int = 1000
    delta: float = 1e-5  # weight-update smoothing constant
    max_step_halvings: int = 50

    def __post_init__(self):
        if min(self.newton_tol, self.outer_tol, self.delta) <= 0.0:
            raise ValueError("tolerances must be positive")
        if min(self.newton_max_iter, self.outer_max_iter, self.max_step_halvings) < 1:
            raise ValueError("iteration caps must be at least 1")


DEFAULT_OPTIONS = FitOptions()


@dataclass(frozen=True)
class PenalizedFit:
    """Converged (or capped) state of one penalized fit."""

    a: np.ndarray
    w: np.ndarray
    pen: float
    converged: bool
    outer_iterations: int
    loglik: float  # unpenalized, at a
    pen_loglik: float


@dataclass(frozen=True)
class NewtonResult:
    a: np.ndarray
    converged: bool
    iterations: int
    objective: float


def solve_band_spd(m: BandMatrix, rhs: np.ndarray) -> np.ndarray:
    """Solve m x = rhs for a symmetric positive definite tridiagonal m.

    Specialized LDL^T factorization on the two bands: one forward sweep for
    the factors fused with forward substitution, then a backward sweep.
    O(L) time and memory.
    """
    n = m.size
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape != (n,):
        raise ValueError("right-hand side length does not match matrix size")
    diag = m.diag.tolist()
    off = m.offdiag.tolist()
    x = rhs.tolist()
    d = [0.0] * n
    sub = [0.0] * max(n - 1, 0)  # unit lower-bidiagonal multipliers
    prev = diag[0]
    if prev <= 0.0:
        raise NotPositiveDefiniteError(0)
    d[0] = prev
    for i in range(1, n):
        li = off[i - 1] / prev
        sub[i - 1] = li
        prev = diag[i] - li * off[i - 1]
        if prev <= 0.0:
            raise NotPositiveDefiniteError(i)
        d[i] = prev
        x[i] -= li * x[i - 1]
    x[n - 1] /= d[n - 1]
    for i in range(n - 2, -1, -1):
        x[i] = x[i] / d[i] - sub[i] * x[i + 1]
    return np.asarray(x)


def ldl_pivots(m: BandMatrix) -> np.ndarray:
    """Diagonal of D in the LDL^T factorization (all positive iff m is SPD)."""
    n = m.size
    d = np.empty(n)
    prev = float(m.diag[0])
    d[0] = prev
    for i in range(1, n):
        if prev <= 0.0:
            raise NotPositiveDefiniteError(i - 1)
        prev = float(m.diag[i]) - float(m.offdiag[i - 1]) ** 2 / prev
        d[i] = prev
    return d


def _solve_with_jitter(h: BandMatrix, g: np.ndarray) -> np.ndarray:
    """Newton direction, shifting the diagonal when roundoff breaks the pivots.

    With fused weights near delta^-2 and a very large penalty, the penalty
    part of the Hessian dwarfs the likelihood curvature and its accumulated
    roundoff can flip the last pivot's sign even though the true matrix is
    positive definite. The shifted direction stays an ascent direction and
    the step-halving objective guard does the rest. A matrix that is still
    not factorable after escalating shifts is genuinely singular.
    """
    try:
        return solve_band_spd(h, g)
    except NotPositiveDefiniteError:
        jitter = 16.0 * _EPS * max(float(h.diag.max()), 1.0)
        for _ in range(40):
            try:
                return solve_band_spd(BandMatrix(h.diag + jitter, h.offdiag), g)
            except NotPositiveDefiniteError:
                jitter *= 10.0
        raise


def initial_log_hazard(stats: SufficientStats) -> np.ndarray:
    """Haldane-corrected log rates: finite on empty bins, near the MLE elsewhere."""
    safe_exposure = np.where(stats.exposure > 0.0, stats.exposure, 1.0)
    a0 = np.where(
        stats.exposure > 0.0,
        np.log((stats.events + 0.5) / safe_exposure),
        LOG_RATE_MIN,
    )
    return clip_log_rates(a0)


def _stationary(a: np.ndarray, g: np.ndarray, diag: np.ndarray, tol: float) -> bool:
    """Projected score test with a floating-point floor.

    When adaptive weights reach delta^-2, the score terms pen*w*(a_{l+1}-a_l)
    are quantized at pen*w*ulp(a), so a fixed tolerance can be unattainable;
    the per-component floor scales with the Hessian diagonal accordingly.
    """
    floor = 8.0 * _EPS * diag * (1.0 + float(np.abs(a).max()))
    ok = np.abs(g) <= tol + floor
    # Coordinates pinned at a clamp bound and pushing outward are stationary.
    ok |= ((a <= LOG_RATE_MIN) & (g < 0.0)) | ((a >= LOG_RATE_MAX) & (g > 0.0))
    return bool(ok.all())


def newton_fit(
    stats: SufficientStats,
    w: np.ndarray,
    pen: float,
    a0: np.ndarray | None = None,
    opts: FitOptions = DEFAULT_OPTIONS,
) -> NewtonResult:
    """Maximize the penalized objective over a for fixed weights.

    Newton steps with step halving, so the objective never decreases across
    accepted steps. Stops when the projected score passes `_stationary`, the
    iteration cap is reached, or no step makes progress.
    """
    w = np.asarray(w, dtype=float)
    a = initial_log_hazard(stats) if a0 is None else clip_log_rates(np.asarray(a0, dtype=float))
    exp_a = np.exp(a)
    obj = penalized_log_likelihood(stats, a, w, pen, exp_a)
    iterations = 0
    converged = False
    while True:
        g = score(stats, a, w, pen, exp_a)
        h = neg_hessian(stats, a, w, pen, exp_a)
        if _stationary(a, g, h.diag, opts.newton_tol):
            converged = True
            break
        if iterations >= opts.newton_max_iter:
            break
        iterations += 1
        # Bins with no exposure and no penalty coupling are decoupled from the
        # objective entirely; freeze them instead of failing the factorization.
        dead = h.diag == 0.0
        if dead.any():
            h = BandMatrix(np.where(dead, 1.0, h.diag), h.offdiag)
            g = np.where(dead, 0.0, g)
        step = _solve_with_jitter(h, g)
        t = 1.0
        accepted = None
        # near the optimum the true gain can sit below the objective's float
        # evaluation noise; without this slack the line search falsely stalls.
        # The noise scales with the summed term magnitudes (which can cancel
        # heavily), not with the objective value itself.
        term_scale = float(np.abs(a) @ stats.events + exp_a @ stats.exposure)
        if w.size and pen:
            term_scale += 0.5 * pen * float(w @ np.square(np.diff(a)))
        slack = 4.0 * _EPS * (1.0 + term_scale)
        for _ in range(opts.max_step_halvings + 1):
            trial = clip_log_rates(a + t * step)
            exp_trial = np.exp(trial)
            obj_trial = penalized_log_likelihood(stats, trial, w, pen, exp_trial)
            if obj_trial >= obj - slack:
                accepted = (trial, exp_trial, obj_trial)
                break
            t *= 0.5
        if accepted is None or not np.any(accepted[0] != a):
            break  # no progress possible at float resolution
        a, exp_a, obj = accepted
    return NewtonResult(a, converged, iterations, obj)


def weight_update(a: np.ndarray, delta: float) -> np.ndarray:
    """w_l = ((a_{l+1} - a_l)^2 + delta^2)^-1."""
    return 1.0 / (np.square(np.diff(a)) + delta * delta)


def adaptive_ridge_fit(
    stats: SufficientStats,
    pen: float,
    opts: FitOptions = DEFAULT_OPTIONS,
    w0: np.ndarray | None = None,
    a0: np.ndarray | None = None,
) -> PenalizedFit:
    """Alternate Newton fits and weight updates until a stabilizes.

    Weights start at w0 (all ones by default; pass the previous penalty's
    weights for a warm start along a penalty path). The returned weights are
    the update computed from the final a, so w_l (a_{l+1}-a_l)^2 lies in
    [0, 1) and thresholds as an unequal-neighbour indicator.
    """
    if pen < 0.0:
        raise ValueError("penalty must be non-negative")
    L = stats.n_bins
    w = np.ones(max(L - 1, 0)) if w0 is None else np.asarray(w0, dtype=float).copy()
    if w.shape != (max(L - 1, 0),) or np.any(w < 0.0) or not np.all(np.isfinite(w)):
        raise ValueError("invalid starting weights")
    a = initial_log_hazard(stats) if a0 is None else clip_log_rates(np.asarray(a0, dtype=float))
    converged = False
    outer = 0
    for outer in range(1, opts.outer_max_iter + 1):
        result = newton_fit(stats, w, pen, a, opts)
        a_new = result.a
        moved = float(np.abs(a_new - a).max())
        a = a_new
        w = weight_update(a, opts.delta)
        # Convergence is measured on a, not w: on fused segments the weights
        # keep drifting toward delta^-2 long after a has stabilized.
        if moved <= opts.outer_tol and result.converged:
            converged = True
            break
    exp_a = np.exp(a)
    return PenalizedFit(
        a=a,
        w=w,
        pen=pen,
        converged=converged,
        outer_iterations=outer,
        loglik=log_likelihood(stats, a, exp_a),
        pen_loglik=penalized_log_likelihood(stats, a, w, pen, exp_a),
    )


def ridge_fit(
    stats: SufficientStats,
    pen: float,
    opts: FitOptions = DEFAULT_OPTIONS,
    a0: np.ndarray | None = None,
) -> PenalizedFit:
    """Single Newton fit with all weights fixed at 1 (no weight update)."""
    if pen < 0.0:
        raise ValueError("penalty must be non-negative")
    w = np.ones(max(stats.n_bins - 1, 0))
    result = newton_fit(stats, w, pen, a0, opts)
    exp_a = np.exp(result.a)
    return PenalizedFit(
        a=result.a,
        w=w,
        pen=pen,
        converged=result.converged,
        outer_iterations=1,
        loglik=log_likelihood(stats, result.a, exp_a),
        pen_loglik=penalized_log_likelihood(stats, result.a, w, pen, exp_a),
    )
