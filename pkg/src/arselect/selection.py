"""Data-driven choice of the forecasting order (or lag subset) and method.

The procedure runs in three steps.  Step 1 screens the one-step direct
APEs and keeps their minimizer as a lower bound for the plug-in search.
Step 2 minimizes the horizon-h direct APE over all orders and the
horizon-h plug-in APE over orders at or above the step-1 choice.  Step 3
keeps whichever of the two finalists has the smaller APE, with ties
going to the direct predictor.  The subset variant runs the same three
steps over every nonzero 0/1 mask on the lag window, with "at or above"
read as mask containment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Mapping, Sequence

import numpy as np

from .ape import ape_direct, ape_plugin, start_index
from .errors import SubsetTooLargeError, UnderspecifiedOrderError
from .estimation import (
    Series,
    _window_matrix,
    fit_direct,
    masked_fit_direct,
    masked_fit_plugin,
)
from .methods import Method
from .theory import (
    ArModel,
    autocovariances,
    companion_matrix,
    h_step_order,
    optimal_direct_coeffs,
)
from .tolerances import SUBSET_ORDER_CAP, TOL_ZERO

__all__ = [
    "SubsetMask",
    "SelectionAudit",
    "SelectionResult",
    "select_predictor",
    "bic_values",
    "bic_order",
    "subset_select",
    "SubsetLossEstimate",
    "theoretical_subset_losses",
]


@dataclass(frozen=True)
class SubsetMask:
    """A 0/1 flag per lag of a window; flagged lags enter the regression."""

    bits: tuple[int, ...]

    def __post_init__(self) -> None:
        bits = tuple(int(b) for b in self.bits)
        if not bits or any(b not in (0, 1) for b in bits):
            raise ValueError("mask must be a nonempty sequence of 0/1 flags")
        if not any(bits):
            raise ValueError("mask must flag at least one lag")
        object.__setattr__(self, "bits", bits)

    @property
    def lags(self) -> tuple[int, ...]:
        """One-based lags flagged by the mask."""
        return tuple(i + 1 for i, b in enumerate(self.bits) if b)

    def contains(self, other: "SubsetMask") -> bool:
        """True when every lag flagged by ``other`` is flagged here too."""
        if len(self.bits) != len(other.bits):
            raise ValueError("masks compare only within one window size")
        return all(mine >= theirs for mine, theirs in zip(self.bits, other.bits))


@dataclass(frozen=True)
class SelectionAudit:
    """Everything the three steps looked at, keyed by order or mask bits."""

    start_one_step: int
    start: int
    one_step_direct_ape: Mapping
    direct_ape: Mapping
    plugin_ape: Mapping
    one_step_choice: int | tuple[int, ...]
    direct_choice: int | tuple[int, ...]
    plugin_choice: int | tuple[int, ...]


@dataclass(frozen=True)
class SelectionResult:
    """Outcome of the order-and-method (or subset-and-method) selection."""

    horizon: int
    max_order: int
    method: Method
    order: int | None
    mask: SubsetMask | None
    audit: SelectionAudit

    @property
    def chosen(self) -> int | SubsetMask:
        return self.order if self.order is not None else self.mask


def _argmin(apes: Mapping, keys: Sequence) -> object:
    """Smallest key (in the given enumeration order) attaining the minimum."""
    best_key = None
    best = math.inf
    for key in keys:
        value = apes[key]
        if value < best:
            best = value
            best_key = key
    return best_key


def select_predictor(series: Series, h: int, max_order: int) -> SelectionResult:
    """Pick the forecasting order and method for horizon h.

    Ties between orders go to the smaller order; a step-3 tie goes to
    the direct predictor.  For ``h == 1`` the two finalists coincide, so
    the direct predictor always wins.
    """
    if h < 1 or max_order < 1:
        raise ValueError("horizon and max_order must be >= 1")
    orders = range(1, max_order + 1)

    start_one = start_index(series, 1, max_order)
    one_step_ape = {k: ape_direct(series, 1, k, start_one).ape for k in orders}
    k_one = _argmin(one_step_ape, orders)

    start_h = start_one if h == 1 else start_index(series, h, max_order)
    direct_ape_map = {k: ape_direct(series, h, k, start_h).ape for k in orders}
    plugin_ape_map = {k: ape_plugin(series, h, k, start_h).ape for k in orders}
    k_direct = _argmin(direct_ape_map, orders)
    k_plugin = _argmin(plugin_ape_map, range(k_one, max_order + 1))

    if direct_ape_map[k_direct] > plugin_ape_map[k_plugin]:
        method, order = Method.PLUGIN, k_plugin
    else:
        method, order = Method.DIRECT, k_direct

    audit = SelectionAudit(
        start_one_step=start_one,
        start=start_h,
        one_step_direct_ape=one_step_ape,
        direct_ape=direct_ape_map,
        plugin_ape=plugin_ape_map,
        one_step_choice=k_one,
        direct_choice=k_direct,
        plugin_choice=k_plugin,
    )
    return SelectionResult(horizon=h, max_order=max_order, method=method,
                           order=order, mask=None, audit=audit)


# ---------------------------------------------------------------------------
# penalized order choice


def bic_values(series: Series, h: int, max_order: int,
               penalty: float | None = None) -> dict[int, float]:
    """Penalized log residual variance of the direct fit, per order.

    The score is ``log(rss / n) + k * c / n`` where ``rss`` sums squared
    in-sample residuals of the full-sample direct fit over its window
    and ``c`` defaults to ``log n``.  A zero residual sum yields
    ``-inf``, which still orders correctly.
    """
    if h < 1 or max_order < 1:
        raise ValueError("horizon and max_order must be >= 1")
    n = series.n
    c = math.log(n) if penalty is None else float(penalty)
    out: dict[int, float] = {}
    for k in range(1, max_order + 1):
        coeffs = fit_direct(series, h, k)
        window = _window_matrix(series.values, h, k)
        targets = series.values[k + h - 1:]
        rss = float(np.sum((targets - window @ coeffs) ** 2))
        sigma2_hat = rss / n
        score = (-math.inf if sigma2_hat == 0.0 else math.log(sigma2_hat))
        out[k] = score + k * c / n
    return out


def bic_order(series: Series, h: int, max_order: int,
              penalty: float | None = None) -> int:
    """Order minimizing :func:`bic_values`; ties go to the smaller order."""
    scores = bic_values(series, h, max_order, penalty)
    return int(_argmin(scores, range(1, max_order + 1)))


# ---------------------------------------------------------------------------
# subset (mask) selection


def _all_masks(window: int) -> list[tuple[int, ...]]:
    """Every nonzero mask on the window, in lexicographic bit order."""
    return [bits for bits in product((0, 1), repeat=window) if any(bits)]


def _mask_geq(a: tuple[int, ...], b: tuple[int, ...]) -> bool:
    return all(x >= y for x, y in zip(a, b))


def subset_select(series: Series, h: int, window: int) -> SelectionResult:
    """Run the three-step selection over every lag subset of the window.

    Enumeration is exhaustive (``2**window - 1`` masks), so the window
    is capped.  Step 2 restricts the plug-in search to masks containing
    the step-1 mask; argmin ties go to the lexicographically smallest
    mask and the step-3 tie to the direct predictor.
    """
    if h < 1 or window < 1:
        raise ValueError("horizon and window must be >= 1")
    if window > SUBSET_ORDER_CAP:
        raise SubsetTooLargeError(
            f"window {window} exceeds the exhaustive-enumeration cap "
            f"{SUBSET_ORDER_CAP}")
    masks = _all_masks(window)

    start_one = start_index(series, 1, window)
    one_step_ape = {m: ape_direct(series, 1, m, start_one).ape for m in masks}
    mask_one = _argmin(one_step_ape, masks)

    start_h = start_one if h == 1 else start_index(series, h, window)
    direct_ape_map = {m: ape_direct(series, h, m, start_h).ape for m in masks}
    mask_direct = _argmin(direct_ape_map, masks)
    containing = [m for m in masks if _mask_geq(m, mask_one)]
    plugin_ape_map = {m: ape_plugin(series, h, m, start_h).ape
                      for m in containing}
    mask_plugin = _argmin(plugin_ape_map, containing)

    if direct_ape_map[mask_direct] > plugin_ape_map[mask_plugin]:
        method, chosen = Method.PLUGIN, mask_plugin
    else:
        method, chosen = Method.DIRECT, mask_direct

    audit = SelectionAudit(
        start_one_step=start_one,
        start=start_h,
        one_step_direct_ape=one_step_ape,
        direct_ape=direct_ape_map,
        plugin_ape=plugin_ape_map,
        one_step_choice=mask_one,
        direct_choice=mask_direct,
        plugin_choice=mask_plugin,
    )
    return SelectionResult(horizon=h, max_order=window, method=method,
                           order=None, mask=SubsetMask(chosen), audit=audit)


# ---------------------------------------------------------------------------
# population view of subset candidates


@dataclass(frozen=True)
class SubsetLossEstimate:
    """Scaled excess MSPE of one mask under both methods.

    A loss is ``math.inf`` when the mask drops a lag the corresponding
    population coefficient vector needs; standard errors are ``None``
    for infinite entries.
    """

    plugin_loss: float
    direct_loss: float
    plugin_se: float | None
    direct_se: float | None


def required_masks(model: ArModel, h: int, window: int
                   ) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Minimal masks a candidate must contain, per method.

    The plug-in predictor needs every lag with a nonzero model
    coefficient; the direct predictor needs every lag with a nonzero
    h-step projection coefficient.
    """
    p = model.order
    if window < p:
        raise UnderspecifiedOrderError(
            f"window {window} cannot carry the order-{p} model")
    plugin_bits = [0] * window
    for i, value in enumerate(model.coeffs):
        plugin_bits[i] = int(abs(value) > TOL_ZERO)
    p_h = h_step_order(model, h)
    table = autocovariances(model, h + p - 1)
    direct_bits = [0] * window
    if p_h > 0:
        proj = optimal_direct_coeffs(table, h, p_h)
        for i in range(p_h):
            direct_bits[i] = int(abs(proj[i]) > TOL_ZERO)
    return tuple(plugin_bits), tuple(direct_bits)


def theoretical_subset_losses(model: ArModel, h: int, window: int, *,
                              n: int = 400, reps: int = 2000, seed: int = 0,
                              ) -> dict[tuple[int, ...], SubsetLossEstimate]:
    """Monte Carlo estimate of each mask's scaled excess MSPE.

    For masks containing the required lags, simulates ``reps``
    independent paths, fits on the first ``n`` observations, and scores
    the forecast of ``x_{n+h}`` against the true conditional mean of
    that value; the mean squared deviation equals the excess MSPE over
    the floor exactly (the future noise is orthogonal to any fit), so
    the report is ``n * mean`` with a matching standard error and none
    of the future-noise variance.  Masks missing a required lag get an
    infinite loss outright.
    """
    from .montecarlo import simulate  # deferred: montecarlo imports this module

    if window > SUBSET_ORDER_CAP:
        raise SubsetTooLargeError(
            f"window {window} exceeds the exhaustive-enumeration cap "
            f"{SUBSET_ORDER_CAP}")
    if reps < 2:
        raise ValueError("reps must be >= 2")
    plugin_req, direct_req = required_masks(model, h, window)
    p = model.order
    cond_coeffs = np.linalg.matrix_power(
        companion_matrix(np.asarray(model.coeffs, dtype=float)), h)[0, :]
    masks = _all_masks(window)

    sq_errors: dict[tuple[tuple[int, ...], Method], list[float]] = {}
    live: list[tuple[tuple[int, ...], Method]] = []
    for bits in masks:
        if _mask_geq(bits, plugin_req):
            live.append((bits, Method.PLUGIN))
        if _mask_geq(bits, direct_req):
            live.append((bits, Method.DIRECT))
    for key in live:
        sq_errors[key] = []

    for rep in range(reps):
        path = simulate(model, n + h, seed=(seed, rep))
        values = path.series.values
        fit_series = Series(values[:n])
        cond_mean = float(cond_coeffs @ values[n - p: n][::-1])
        for bits, method in live:
            lags = tuple(i + 1 for i, b in enumerate(bits) if b)
            if method is Method.DIRECT:
                coeffs = masked_fit_direct(fit_series, h, lags)
                lag_view = values[:n][::-1][[lag - 1 for lag in lags]]
            else:
                coeffs = masked_fit_plugin(fit_series, h, lags, window)
                lag_view = values[n - window: n][::-1]
            deviation = float(lag_view @ coeffs) - cond_mean
            sq_errors[(bits, method)].append(deviation ** 2)

    out: dict[tuple[int, ...], SubsetLossEstimate] = {}
    for bits in masks:
        stats = {}
        for method, required in ((Method.PLUGIN, plugin_req),
                                 (Method.DIRECT, direct_req)):
            if not _mask_geq(bits, required):
                stats[method] = (math.inf, None)
                continue
            errs = np.asarray(sq_errors[(bits, method)])
            loss = n * float(errs.mean())
            se = n * float(errs.std(ddof=1)) / math.sqrt(reps)
            stats[method] = (loss, se)
        out[bits] = SubsetLossEstimate(
            plugin_loss=stats[Method.PLUGIN][0],
            direct_loss=stats[Method.DIRECT][0],
            plugin_se=stats[Method.PLUGIN][1],
            direct_se=stats[Method.DIRECT][1],
        )
    return out
