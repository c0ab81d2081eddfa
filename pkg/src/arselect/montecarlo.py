"""Simulation experiments: paths, MSPE estimates, and benchmark ratios.

Seeding is hierarchical: an experiment takes one integer seed, and
replication r draws from the substream keyed ``(seed, r)`` (plus an
attempt counter when a degenerate draw must be redone), so runs are
reproducible and replications are independent regardless of order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.signal import lfilter

from .errors import (OutOfDomainError, SingularMomentError,
                     TooFewObservationsError)
from .estimation import (
    Series,
    fit_direct,
    fit_plugin,
    masked_fit_direct,
    masked_fit_plugin,
    predict_with,
)
from .methods import Method
from .selection import SelectionResult, select_predictor, subset_select
from .theory import (
    ArModel,
    companion_matrix,
    horizon_variance,
    loss_table,
    optimal_candidates,
    three_step_excess_ratio,
)
from .tolerances import DEFAULT_BURN_IN

__all__ = [
    "SimPath",
    "simulate",
    "MspeEstimate",
    "mc_mspe",
    "ThreeStepRatio",
    "BENCHMARK_MODELS",
    "REFERENCE_RATIOS",
    "replicate_table1",
    "FrequencyResult",
    "selection_frequency",
]

#: The four second-order benchmark models ``a_1 = sqrt(-a_2)``, newest first.
BENCHMARK_MODELS: tuple[tuple[float, float], ...] = (
    (0.9, -0.81),
    (0.8, -0.64),
    (0.6, -0.36),
    (0.5, -0.25),
)

#: Previously reported three-step ratio estimates for the benchmark
#: models at selected sample sizes, used by the ``--check`` gate.
REFERENCE_RATIOS: dict[int, tuple[float, float, float, float]] = {
    150: (0.700, 0.891, 1.398, 1.719),
    300: (0.688, 0.843, 1.365, 1.782),
    500: (0.649, 0.879, 1.365, 1.762),
    1000: (0.673, 0.872, 1.379, 1.761),
}


@dataclass(frozen=True)
class SimPath:
    """A simulated path with the innovations that generated it.

    The retained window satisfies the model recursion against the
    retained innovations exactly (the burn-in is discarded from both).
    """

    series: Series
    innovations: np.ndarray
    seed: object
    burn_in: int


def _draw_innovations(rng: np.random.Generator, size: int, sigma2: float,
                      dist: str, df: float | None) -> np.ndarray:
    if sigma2 == 0.0:
        return np.zeros(size)
    scale = math.sqrt(sigma2)
    if dist == "normal":
        return scale * rng.standard_normal(size)
    if dist == "uniform":
        half_width = math.sqrt(3.0 * sigma2)
        return rng.uniform(-half_width, half_width, size)
    if dist == "student-t":
        dof = 12.0 if df is None else float(df)
        if dof <= 8.0:
            raise OutOfDomainError(
                "student-t innovations need more than 8 degrees of freedom")
        return scale * math.sqrt((dof - 2.0) / dof) * rng.standard_t(dof, size)
    raise ValueError(f"unknown innovation distribution {dist!r}")


def simulate(model: ArModel, n: int, seed, burn_in: int = DEFAULT_BURN_IN,
             dist: str = "normal", df: float | None = None,
             sigma2: float | None = None) -> SimPath:
    """Simulate ``n`` observations of the model after a warm-up period.

    The recursion starts from a zero state and the first ``burn_in``
    observations are dropped.  ``sigma2`` overrides the model's
    innovation variance (zero gives the deterministic skeleton, useful
    for noiseless checks).  Identical arguments give identical paths.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if burn_in < 0:
        raise ValueError("burn_in must be >= 0")
    variance = model.sigma2 if sigma2 is None else float(sigma2)
    if variance < 0.0:
        raise ValueError("sigma2 override must be >= 0")
    rng = np.random.default_rng(seed)
    eps = _draw_innovations(rng, burn_in + n, variance, dist, df)
    denom = np.concatenate(([1.0], -model.coeffs))
    path = lfilter([1.0], denom, eps)
    return SimPath(series=Series(path[burn_in:]),
                   innovations=eps[burn_in:].copy(),
                   seed=seed, burn_in=burn_in)


# ---------------------------------------------------------------------------
# MSPE of a fixed candidate


@dataclass(frozen=True)
class MspeEstimate:
    """Monte Carlo mean squared prediction error of one candidate."""

    horizon: int
    candidate: int | tuple[int, ...]
    method: Method
    n: int
    reps: int
    mean: float
    std_error: float
    redraws: int


def _candidate_forecast(values: np.ndarray, n: int, h: int, candidate,
                        method: Method, window: int | None) -> float:
    """Point forecast of x_{n+h} fitted on the first n observations."""
    fit_series = Series(values[:n])
    if isinstance(candidate, (int, np.integer)):
        k = int(candidate)
        coeffs = (fit_plugin(fit_series, h, k) if method is Method.PLUGIN
                  else fit_direct(fit_series, h, k))
        return predict_with(fit_series, coeffs)
    bits = tuple(int(b) for b in candidate)
    lags = tuple(i + 1 for i, b in enumerate(bits) if b)
    size = len(bits) if window is None else window
    if method is Method.PLUGIN:
        coeffs = masked_fit_plugin(fit_series, h, lags, size)
        lag_view = values[n - size: n][::-1]
    else:
        coeffs = masked_fit_direct(fit_series, h, lags)
        lag_view = values[:n][::-1][[lag - 1 for lag in lags]]
    return float(lag_view @ coeffs)


def _candidate_error(values: np.ndarray, n: int, h: int, candidate,
                     method: Method, window: int | None) -> float:
    """Forecast error for x_{n+h} fitted on the first n observations."""
    target = values[n + h - 1]
    return target - _candidate_forecast(values, n, h, candidate, method, window)


def mc_mspe(model: ArModel, h: int, candidate, method: Method, n: int,
            reps: int, seed, burn_in: int = DEFAULT_BURN_IN,
            dist: str = "normal", df: float | None = None) -> MspeEstimate:
    """Estimate the h-step MSPE of one (candidate, method) pair.

    Each replication simulates ``n + h`` observations, fits on the first
    ``n``, and scores the forecast of the last one.  A replication whose
    fit is numerically singular is redrawn from a fresh substream at
    most three times before giving up.
    """
    if reps < 2:
        raise ValueError("reps must be >= 2")
    method = Method(method)
    sq = np.empty(reps)
    redraws = 0
    for rep in range(reps):
        for attempt in range(4):
            path = simulate(model, n + h, seed=(seed, rep, attempt),
                            burn_in=burn_in, dist=dist, df=df)
            try:
                err = _candidate_error(path.series.values, n, h, candidate,
                                       method, None)
            except (SingularMomentError, TooFewObservationsError):
                if attempt == 3:
                    raise
                redraws += 1
                continue
            sq[rep] = err ** 2
            break
    mean = float(sq.mean())
    std_error = float(sq.std(ddof=1)) / math.sqrt(reps)
    label = candidate if isinstance(candidate, (int, np.integer)) \
        else tuple(int(b) for b in candidate)
    return MspeEstimate(horizon=h, candidate=label, method=method, n=n,
                        reps=reps, mean=mean, std_error=std_error,
                        redraws=redraws)


# ---------------------------------------------------------------------------
# benchmark ratio experiment


@dataclass(frozen=True)
class ThreeStepRatio:
    """Excess-MSPE ratio of the order-1 direct to order-2 plug-in
    three-step predictor for one benchmark model."""

    coeffs: tuple[float, float]
    n: int
    reps: int
    direct_mspe: float
    plugin_mspe: float
    floor: float
    ratio: float
    std_error: float
    limit: float


def replicate_table1(n: int = 300, reps: int = 20000, seed: int = 0,
                     burn_in: int = DEFAULT_BURN_IN,
                     models: Sequence[tuple[float, float]] = BENCHMARK_MODELS,
                     ) -> list[ThreeStepRatio]:
    """Re-run the benchmark comparing direct and plug-in three-step forecasts.

    For each model, both predictors are scored on the same simulated
    paths.  The excess mean-squared prediction error over the exact
    three-step floor equals the mean squared deviation of the forecast
    from the true conditional mean (the irreducible future noise is
    orthogonal to both forecasts), so each replication scores the
    forecasts against that conditional mean directly.  Subtracting the
    realized future value instead would leave the shared future-noise
    variance in both averages and drown the excess, which is O(1/n), in
    Monte Carlo error.  The reported ratio is the direct excess over the
    plug-in excess, with a delta-method standard error that accounts for
    the pairing.  The accompanying limit is the exact asymptotic value
    of the same ratio.
    """
    if reps < 2:
        raise ValueError("reps must be >= 2")
    h = 3
    out = []
    for index, coeffs in enumerate(models):
        model = ArModel(coeffs, 1.0)
        floor = horizon_variance(model, h)
        p = model.order
        cond_coeffs = np.linalg.matrix_power(
            companion_matrix(np.asarray(coeffs, dtype=float)), h)[0, :]
        direct_sq = np.empty(reps)
        plugin_sq = np.empty(reps)
        for rep in range(reps):
            for attempt in range(4):
                path = simulate(model, n + h, seed=(seed, index, rep, attempt),
                                burn_in=burn_in)
                values = path.series.values
                cond_mean = float(cond_coeffs @ values[n - p: n][::-1])
                try:
                    d_hat = _candidate_forecast(values, n, h, 1,
                                                Method.DIRECT, None)
                    p_hat = _candidate_forecast(values, n, h, 2,
                                                Method.PLUGIN, None)
                except (SingularMomentError, TooFewObservationsError):
                    if attempt == 3:
                        raise
                    continue
                direct_sq[rep] = (d_hat - cond_mean) ** 2
                plugin_sq[rep] = (p_hat - cond_mean) ** 2
                break
        dx = float(direct_sq.mean())
        dy = float(plugin_sq.mean())
        ratio = dx / dy
        cov = np.cov(direct_sq, plugin_sq, ddof=1) / reps
        var = (cov[0, 0] - 2.0 * ratio * cov[0, 1] + ratio ** 2 * cov[1, 1]) \
            / dy ** 2
        out.append(ThreeStepRatio(
            coeffs=tuple(coeffs), n=n, reps=reps,
            direct_mspe=floor + dx,
            plugin_mspe=floor + dy,
            floor=floor, ratio=ratio,
            std_error=math.sqrt(max(var, 0.0)),
            limit=three_step_excess_ratio(coeffs[1]),
        ))
    return out


def check_ratios(rows: Sequence[ThreeStepRatio], *,
                 widen: float = 1.0) -> list[str]:
    """Compare replicated ratios to the stored references and exact limits.

    Returns a list of human-readable failures (empty means all within
    tolerance).  The reference comparison applies only at sample sizes
    with stored values; the limit comparison always applies.
    """
    failures = []
    for pos, row in enumerate(rows):
        reference_row = REFERENCE_RATIOS.get(row.n)
        if reference_row is not None and pos < len(reference_row):
            tol = max(0.06, 3.0 * row.std_error) * widen
            gap = abs(row.ratio - reference_row[pos])
            if gap > tol:
                failures.append(
                    f"model {row.coeffs}: ratio {row.ratio:.4f} vs reference "
                    f"{reference_row[pos]:.3f} (|gap| {gap:.4f} > tol {tol:.4f})")
        gap = abs(row.ratio - row.limit)
        tol = 0.08 * widen
        if gap > tol:
            failures.append(
                f"model {row.coeffs}: ratio {row.ratio:.4f} vs limit "
                f"{row.limit:.4f} (|gap| {gap:.4f} > tol {tol:.4f})")
    return failures


# ---------------------------------------------------------------------------
# selection frequencies


@dataclass(frozen=True)
class FrequencyResult:
    """How often each (candidate, method) pair was selected."""

    horizon: int
    max_order: int
    n: int
    reps: int
    counts: dict
    #: asymptotically optimal (order, method) pairs, dense search only
    optimal: set | None


def selection_frequency(model: ArModel, h: int, max_order: int, n: int,
                        reps: int, seed, subset: bool = False,
                        burn_in: int = DEFAULT_BURN_IN) -> FrequencyResult:
    """Selection frequencies over independent simulated paths."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    counts: dict = {}
    for rep in range(reps):
        path = simulate(model, n, seed=(seed, rep), burn_in=burn_in)
        result: SelectionResult = (
            subset_select(path.series, h, max_order) if subset
            else select_predictor(path.series, h, max_order))
        key = ((result.mask.bits if subset else result.order), result.method)
        counts[key] = counts.get(key, 0) + 1
    optimal = None
    if not subset and max_order >= model.order:
        optimal = optimal_candidates(loss_table(model, h, max_order))
    return FrequencyResult(horizon=h, max_order=max_order, n=n, reps=reps,
                           counts=counts, optimal=optimal)
