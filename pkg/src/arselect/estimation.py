"""Least-squares fitting of multistep predictors from one observed series.

All index conventions are one-based in the math and documented per
function; internally ``values[j - 1]`` holds the j-th observation.  The
order-k regressor at time j is ``(x_j, x_{j-1}, ..., x_{j-k+1})`` and a
fit at horizon h on a prefix ``x_1..x_i`` only ever touches those i
observations, which is what makes the accumulated-prediction-error
statistics honest out-of-sample quantities.

Two layers live here.  The public batch fits (:func:`fit_one_step`,
:func:`fit_direct`, :func:`fit_plugin`) work on a whole series.  The
prefix machinery (:class:`_CrossProducts` and the ``prefix_*`` helpers)
evaluates the same least-squares problems for every prefix of the series
at once, via cumulative sums of lagged cross products and a batched
solve; :func:`sequential_fitter` exposes it as a per-time stream.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .errors import (
    SingularMomentError,
    TooFewObservationsError,
)
from .methods import Method
from .theory import iterate_plugin_coeffs
from .tolerances import COND_GUARD, TOL_LIN

__all__ = [
    "Series",
    "LsFit",
    "sample_moment",
    "fit_one_step",
    "fit_direct",
    "fit_plugin",
    "ls_fit",
    "predict",
    "predict_with",
    "masked_fit_direct",
    "masked_fit_plugin",
    "sequential_fitter",
]


@dataclass(frozen=True)
class Series:
    """A finite, all-finite univariate time series.

    ``values[j - 1]`` is the j-th observation x_j.
    """

    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if values.ndim != 1 or values.size == 0:
            raise ValueError("series must be a nonempty 1-D sequence")
        if not np.all(np.isfinite(values)):
            raise ValueError("series contains non-finite values")
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.size)


@dataclass(frozen=True)
class LsFit:
    """All least-squares quantities for one (horizon, order) pair.

    ``n_used`` counts the outer products entering the horizon-h moment
    matrix.  For horizon one the plug-in and direct coefficient vectors
    are the same object.
    """

    horizon: int
    order: int
    gamma_hat: np.ndarray
    a_one_step: np.ndarray
    a_plugin: np.ndarray
    a_direct: np.ndarray
    n_used: int


# ---------------------------------------------------------------------------
# batch (whole-series) fits


def _window_matrix(values: np.ndarray, h: int, k: int) -> np.ndarray:
    """Rows ``x_j(k)`` for j = k..n-h (newest observation first)."""
    n = values.size
    cols = [values[k - 1 - c: n - h - c] for c in range(k)]
    return np.stack(cols, axis=1)


def _check_window(n: int, h: int, k: int) -> int:
    count = n - h - k + 1
    if count < 1:
        raise TooFewObservationsError(
            f"need at least {h + k} observations for horizon {h} and order {k}, "
            f"have {n}")
    return count


def sample_moment(series: Series, h: int, k: int) -> np.ndarray:
    """Average of ``x_j(k) x_j(k)'`` over j = k..n-h.

    Exactly ``n - h - k + 1`` outer products enter the average.
    """
    if h < 1 or k < 1:
        raise ValueError("horizon and order must be >= 1")
    count = _check_window(series.n, h, k)
    window = _window_matrix(series.values, h, k)
    return window.T @ window / count


def _guarded_solve(moment: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    cond = np.linalg.cond(moment)
    if not np.isfinite(cond) or cond > COND_GUARD:
        raise SingularMomentError(
            f"{what}: moment matrix condition number {cond:.3e} exceeds guard")
    try:
        sol = np.linalg.solve(moment, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularMomentError(f"{what}: {exc}") from exc
    residual = np.max(np.abs(moment @ sol - rhs))
    scale = (np.max(np.abs(moment)) * np.max(np.abs(sol), initial=0.0)
             + np.max(np.abs(rhs), initial=0.0))
    if scale > 0.0 and residual > TOL_LIN * scale:
        raise SingularMomentError(
            f"{what}: normal-equation residual {residual:.3e} above tolerance")
    return np.atleast_1d(sol)


def fit_direct(series: Series, h: int, k: int) -> np.ndarray:
    """Direct h-step coefficients: regress ``x_{j+h}`` on ``x_j(k)``."""
    if h < 1 or k < 1:
        raise ValueError("horizon and order must be >= 1")
    count = _check_window(series.n, h, k)
    values = series.values
    window = _window_matrix(values, h, k)
    targets = values[k + h - 1:]
    moment = window.T @ window / count
    rhs = window.T @ targets / count
    return _guarded_solve(moment, rhs, f"direct fit h={h} k={k}")


def fit_one_step(series: Series, k: int) -> np.ndarray:
    """One-step coefficients; identical to the direct fit at horizon one."""
    return fit_direct(series, 1, k)


def fit_plugin(series: Series, h: int, k: int) -> np.ndarray:
    """Plug-in h-step coefficients: iterate the one-step fit h-1 times."""
    a_one = fit_one_step(series, k)
    if h == 1:
        return a_one
    return iterate_plugin_coeffs(a_one, h)


def ls_fit(series: Series, h: int, k: int) -> LsFit:
    """Bundle moment matrix, one-step, plug-in and direct fits."""
    count = _check_window(series.n, h, k)
    a_one = fit_one_step(series, k)
    a_plugin = a_one if h == 1 else iterate_plugin_coeffs(a_one, h)
    a_direct = a_one if h == 1 else fit_direct(series, h, k)
    return LsFit(
        horizon=h,
        order=k,
        gamma_hat=sample_moment(series, h, k),
        a_one_step=a_one,
        a_plugin=a_plugin,
        a_direct=a_direct,
        n_used=count,
    )


def predict_with(series: Series, coeffs: np.ndarray) -> float:
    """Forecast from the newest lag window: ``sum_c coeffs[c] * x_{n-c}``."""
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=float))
    k = coeffs.size
    if k > series.n:
        raise TooFewObservationsError(
            f"need {k} observations for an order-{k} forecast, have {series.n}")
    lag = series.values[series.n - k:][::-1]
    return float(lag @ coeffs)


def predict(series: Series, fit: LsFit, method: Method) -> float:
    """Forecast ``x_{n+h}`` with the plug-in or direct coefficients of a fit."""
    vec = fit.a_plugin if Method(method) is Method.PLUGIN else fit.a_direct
    return predict_with(series, vec)


# ---------------------------------------------------------------------------
# masked (subset-of-lags) batch fits


def _normalize_lags(lags: Sequence[int]) -> tuple[int, ...]:
    out = tuple(sorted(set(int(v) for v in lags)))
    if not out:
        raise ValueError("lag set must be nonempty")
    if out[0] < 1:
        raise ValueError("lags are one-based and must be >= 1")
    return out


def _masked_window(values: np.ndarray, h: int, lags: tuple[int, ...]) -> np.ndarray:
    """Rows ``(x_{j+1-l})_{l in lags}`` for j = max(lags)..n-h."""
    n = values.size
    j0 = lags[-1]
    cols = [values[j0 - lag: n - h - lag + 1] for lag in lags]
    return np.stack(cols, axis=1)


def masked_fit_direct(series: Series, h: int, lags: Sequence[int]) -> np.ndarray:
    """Direct h-step fit restricted to a subset of lags.

    Regresses ``x_{j+h}`` on ``(x_{j+1-l} : l in lags)`` with the sum
    starting at the largest requested lag, so a contiguous lag set
    ``1..k`` reproduces :func:`fit_direct` exactly.
    """
    if h < 1:
        raise ValueError("horizon must be >= 1")
    lags = _normalize_lags(lags)
    j0 = lags[-1]
    count = series.n - h - j0 + 1
    if count < 1:
        raise TooFewObservationsError(
            f"need at least {h + j0} observations for horizon {h} and max lag {j0}")
    window = _masked_window(series.values, h, lags)
    targets = series.values[j0 + h - 1:]
    moment = window.T @ window / count
    rhs = window.T @ targets / count
    return _guarded_solve(moment, rhs, f"masked direct fit h={h} lags={lags}")


def masked_fit_plugin(series: Series, h: int, lags: Sequence[int],
                      window_size: int) -> np.ndarray:
    """Plug-in h-step fit on a subset of lags, embedded in a full window.

    The one-step fit on the masked lags is zero-filled into a length
    ``window_size`` coefficient vector, iterated h-1 times through the
    full companion matrix, and returned at length ``window_size`` (apply
    with the full lag window).
    """
    lags = _normalize_lags(lags)
    if window_size < lags[-1]:
        raise ValueError("window_size must cover the largest lag")
    one = masked_fit_direct(series, 1, lags)
    embedded = np.zeros(window_size)
    embedded[[lag - 1 for lag in lags]] = one
    if h == 1:
        return embedded
    return iterate_plugin_coeffs(embedded, h)


# ---------------------------------------------------------------------------
# prefix machinery


class _CrossProducts:
    """Cumulative lagged cross products of one series at one horizon.

    ``moment_windows`` and ``rhs_windows`` reconstruct, for any subset of
    lag offsets and any collection of prefix ends, the exact sums that a
    from-scratch refit on that prefix would accumulate.  Cumulative sums
    are taken once; a window is a difference of two entries, so every
    prefix gets the same arithmetic as a full batch pass.
    """

    def __init__(self, values: np.ndarray, horizon: int, max_offset: int) -> None:
        n = values.size
        self.values = values
        self.horizon = horizon
        self.max_offset = max_offset
        self._moment: dict[tuple[int, int], np.ndarray] = {}
        for s in range(max_offset):
            for r in range(s + 1):
                prod = np.zeros(n + 1)
                prod[s + 1:] = values[s - r: n - r] * values[: n - s]
                self._moment[(r, s)] = np.cumsum(prod)
        self._rhs: dict[tuple[int, int], np.ndarray] = {}
        for hh in {1, horizon}:
            for r in range(max_offset):
                prod = np.zeros(n + 1)
                if n - hh - r > 0:
                    prod[r + 1: n - hh + 1] = values[: n - hh - r] * values[r + hh:]
                self._rhs[(r, hh)] = np.cumsum(prod)

    def moment_windows(self, offsets: Sequence[int], j0: int,
                       uppers: np.ndarray) -> np.ndarray:
        """Stack of moment-sum matrices for windows j = j0..u, one per u."""
        m = len(offsets)
        out = np.empty((uppers.size, m, m))
        for ai in range(m):
            for bi in range(ai, m):
                r, s = offsets[ai], offsets[bi]
                col = self._moment[(min(r, s), max(r, s))]
                vals = col[uppers] - col[j0 - 1]
                out[:, ai, bi] = vals
                out[:, bi, ai] = vals
        return out

    def rhs_windows(self, offsets: Sequence[int], hh: int, j0: int,
                    uppers: np.ndarray) -> np.ndarray:
        out = np.empty((uppers.size, len(offsets)))
        for ai, r in enumerate(offsets):
            col = self._rhs[(r, hh)]
            out[:, ai] = col[uppers] - col[j0 - 1]
        return out


def _batched_solve(systems: np.ndarray, rhs: np.ndarray,
                   i_values: np.ndarray, what: str) -> np.ndarray:
    """Solve a stack of small normal-equation systems, naming bad steps."""
    try:
        sol = np.linalg.solve(systems, rhs[..., None])[..., 0]
    except np.linalg.LinAlgError:
        sol = np.empty_like(rhs)
        for t in range(rhs.shape[0]):
            try:
                sol[t] = np.linalg.solve(systems[t], rhs[t])
            except np.linalg.LinAlgError as exc:
                raise SingularMomentError(
                    f"{what}: singular moment matrix at time {int(i_values[t])}"
                ) from exc
    residual = np.abs(np.einsum("tij,tj->ti", systems, sol) - rhs).max(axis=1)
    scale = (np.abs(systems).max(axis=(1, 2)) * np.abs(sol).max(axis=1)
             + np.abs(rhs).max(axis=1))
    bad = np.flatnonzero((scale > 0.0) & (residual > TOL_LIN * scale))
    if bad.size:
        raise SingularMomentError(
            f"{what}: unreliable solve at time {int(i_values[bad[0]])} "
            f"(relative residual {residual[bad[0]] / scale[bad[0]]:.3e})")
    return sol


def prefix_direct_solutions(cp: _CrossProducts, offsets: Sequence[int],
                            horizon: int, i_values: np.ndarray) -> np.ndarray:
    """Direct-fit coefficients for each prefix ``x_1..x_i``, stacked."""
    j0 = offsets[-1] + 1
    uppers = i_values - horizon
    systems = cp.moment_windows(offsets, j0, uppers)
    rhs = cp.rhs_windows(offsets, horizon, j0, uppers)
    return _batched_solve(systems, rhs, i_values,
                          f"sequential direct fit h={horizon}")


def prefix_plugin_solutions(cp: _CrossProducts, offsets: Sequence[int],
                            horizon: int, i_values: np.ndarray,
                            embed_dim: int) -> np.ndarray:
    """Plug-in coefficients per prefix, embedded at length ``embed_dim``."""
    one = prefix_direct_solutions(cp, offsets, 1, i_values)
    if len(offsets) == embed_dim:
        embedded = one
    else:
        embedded = np.zeros((i_values.size, embed_dim))
        embedded[:, list(offsets)] = one
    if horizon == 1:
        return embedded
    comp = np.zeros((i_values.size, embed_dim, embed_dim))
    comp[:, 0, :] = embedded
    if embed_dim > 1:
        comp[:, np.arange(1, embed_dim), np.arange(embed_dim - 1)] = 1.0
    vec = embedded.copy()
    for _ in range(horizon - 1):
        vec = np.einsum("tij,ti->tj", comp, vec)
    return vec


def prefix_predictions(values: np.ndarray, solutions: np.ndarray,
                       offsets: Sequence[int], i_values: np.ndarray) -> np.ndarray:
    """Apply per-prefix coefficient rows to their own newest lag windows."""
    lag = np.empty((i_values.size, len(offsets)))
    for ai, r in enumerate(offsets):
        lag[:, ai] = values[i_values - r - 1]
    return np.einsum("tm,tm->t", solutions, lag)


# ---------------------------------------------------------------------------
# streaming interface


def sequential_fitter(series: Series, h: int, max_order: int,
                      well_defined_from: int | None = None,
                      ) -> Iterator[tuple[int, dict[int, LsFit] | None]]:
    """Yield ``(i, fits)`` with one :class:`LsFit` per order for each prefix.

    The stream starts at the smallest i where all orders up to
    ``max_order`` have at least as many usable windows as parameters and
    runs through ``n - h``.  A prefix whose moment matrix is singular is
    yielded as ``(i, None)`` while ``i`` is still below
    ``well_defined_from``; at or past that point singularity is an
    error, because the caller has certified the stream usable from there.

    Every yielded coefficient vector reproduces the batch fit on the same
    prefix (same sums, same solver).
    """
    if h < 1 or max_order < 1:
        raise ValueError("horizon and max_order must be >= 1")
    n = series.n
    values = series.values
    first = max(2 * max_order, 2 * max_order + h - 1)
    cp = _CrossProducts(values, h, max_order)
    for i in range(first, n - h + 1):
        i_arr = np.array([i])
        fits: dict[int, LsFit] = {}
        try:
            for k in range(1, max_order + 1):
                offsets = tuple(range(k))
                count = i - h - k + 1
                moment = cp.moment_windows(offsets, k, i_arr - h)[0]
                gamma_hat = moment / count
                cond = np.linalg.cond(gamma_hat)
                if not np.isfinite(cond) or cond > COND_GUARD:
                    raise SingularMomentError(
                        f"sequential fit h={h} k={k}: condition number "
                        f"{cond:.3e} exceeds guard at time {i}")
                a_one = _batched_solve(
                    cp.moment_windows(offsets, k, i_arr - 1),
                    cp.rhs_windows(offsets, 1, k, i_arr - 1),
                    i_arr, f"sequential one-step fit k={k}")[0]
                a_direct = _batched_solve(
                    moment[None], cp.rhs_windows(offsets, h, k, i_arr - h),
                    i_arr, f"sequential direct fit h={h} k={k}")[0]
                a_plugin = a_one if h == 1 else iterate_plugin_coeffs(a_one, h)
                fits[k] = LsFit(horizon=h, order=k, gamma_hat=gamma_hat,
                                a_one_step=a_one, a_plugin=a_plugin,
                                a_direct=a_direct, n_used=count)
        except SingularMomentError:
            if well_defined_from is not None and i >= well_defined_from:
                raise
            yield i, None
            continue
        yield i, fits
