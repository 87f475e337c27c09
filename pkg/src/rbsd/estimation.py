"""Horvitz-Thompson estimators of the average treatment effect.

Two estimands are served: the plain average effect over all ``N x S``
cells, and the lag-``l`` effect which drops the first ``l`` timesteps and
only credits cells whose trailing window of ``l + 1`` assignments is
entirely treated or entirely control.

Probabilities may be given as a :class:`~rbsd.design.DesignSpec` (exact
values are then derived from the design) or explicitly as arrays that
broadcast against the outcome panel.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional, Union

import numpy as np
import numpy.typing as npt
from scipy import stats

from .design import AssignmentMatrix, DesignSpec
from .exposure import WindowProbability, marginal_probs, window_prob_arrays

__all__ = [
    "EstimateReport",
    "UnitEffects",
    "exposure_mapping_estimate",
    "ht_tau",
    "ht_tau_lag",
    "one_sample_ztest",
    "std_error",
    "two_sample_ztest",
    "unit_effects",
]

Matrix = Union[npt.ArrayLike, AssignmentMatrix]
MarginalProbs = Union[DesignSpec, float, npt.ArrayLike]
WindowProbs = Union[
    DesignSpec,
    WindowProbability,
    tuple[Union[float, npt.ArrayLike], Union[float, npt.ArrayLike]],
]


@dataclass(frozen=True)
class UnitEffects:
    values: npt.NDArray[np.float64]
    lag: Optional[int] = None

    @property
    def mean(self) -> float:
        return _mean(self.values)


@dataclass(frozen=True)
class EstimateReport:
    estimand: str
    point: float
    std_error: float
    z: float
    p_value: float
    ci_low: float
    ci_high: float
    alpha: float
    n_units: int
    n_steps_used: int
    lag: Optional[int] = None

    def reject(self) -> bool:
        return self.p_value < self.alpha

    def to_dict(self) -> dict:
        return asdict(self)


def _mean(values: npt.NDArray[np.float64]) -> float:
    # fsum is exact-rounded, so the result does not depend on summation order
    return math.fsum(values) / len(values)


def _panel(W: Matrix, Y: npt.ArrayLike) -> tuple[np.ndarray, np.ndarray]:
    w = np.asarray(W.values if isinstance(W, AssignmentMatrix) else W)
    y = np.asarray(getattr(Y, "values", Y), dtype=float)
    if w.ndim != 2 or y.shape != w.shape:
        raise ValueError(
            f"assignment shape {w.shape} and outcome shape {y.shape} must be equal 2-D"
        )
    if not np.isin(w, (0, 1)).all():
        raise ValueError("assignment entries must be 0 or 1")
    if not np.isfinite(y).all():
        raise ValueError("outcomes must be finite")
    return w.astype(bool), y


def _check_open_unit(name: str, arr: np.ndarray) -> None:
    if not ((arr > 0) & (arr < 1)).all():
        raise ValueError(f"{name} probabilities must lie strictly inside (0, 1)")


def _marginals(probs: MarginalProbs, shape: tuple[int, int]) -> np.ndarray:
    if isinstance(probs, DesignSpec):
        if probs.n_steps != shape[1]:
            raise ValueError(f"design has S={probs.n_steps}, panel has S={shape[1]}")
        arr = marginal_probs(probs)
    else:
        arr = np.asarray(probs, dtype=float)
    arr = np.broadcast_to(arr, shape)
    _check_open_unit("treatment", arr)
    return arr


def _windows(
    probs: WindowProbs, lag: int, shape: tuple[int, int]
) -> tuple[np.ndarray, np.ndarray]:
    width = (shape[0], shape[1] - lag)
    if isinstance(probs, DesignSpec):
        if probs.n_steps != shape[1]:
            raise ValueError(f"design has S={probs.n_steps}, panel has S={shape[1]}")
        treated, control = window_prob_arrays(probs, lag)
    elif isinstance(probs, WindowProbability):
        if probs.lag != lag:
            raise ValueError(f"window probabilities are for lag {probs.lag}, not {lag}")
        treated, control = probs.p_all_treated, probs.p_all_control
    else:
        treated, control = probs
    treated = np.broadcast_to(np.asarray(treated, dtype=float), width)
    control = np.broadcast_to(np.asarray(control, dtype=float), width)
    _check_open_unit("all-treated window", treated)
    _check_open_unit("all-control window", control)
    return treated, control


def _window_indicators(w: np.ndarray, lag: int) -> tuple[np.ndarray, np.ndarray]:
    """Boolean arrays, shape (N, S - lag): trailing window all ones / all zeros."""
    n_steps = w.shape[1]
    all_on = w[:, lag:].copy()
    all_off = ~w[:, lag:]
    for j in range(1, lag + 1):
        shifted = w[:, lag - j : n_steps - j]
        all_on &= shifted
        all_off &= ~shifted
    return all_on, all_off


def unit_effects(
    W: Matrix,
    Y: npt.ArrayLike,
    probs: Union[MarginalProbs, WindowProbs],
    lag: Optional[int] = None,
) -> UnitEffects:
    """Per-unit Horvitz-Thompson effects.

    With ``lag=None`` each unit gets the average over all timesteps of
    ``W Y / P(W=1) - (1 - W) Y / P(W=0)``. With an integer lag the average
    runs over window ends ``lag+1..S`` and uses window indicators and
    window probabilities instead.
    """
    w, y = _panel(W, Y)
    if lag is None:
        p1 = _marginals(probs, w.shape)  # type: ignore[arg-type]
        contrib = np.where(w, y / p1, -y / (1.0 - p1))
    else:
        if lag < 0 or lag + 1 > w.shape[1]:
            raise ValueError(f"lag {lag} invalid for S={w.shape[1]}")
        treated, control = _windows(probs, lag, w.shape)  # type: ignore[arg-type]
        on, off = _window_indicators(w, lag)
        y_used = y[:, lag:]
        contrib = np.where(on, y_used / treated, 0.0) - np.where(off, y_used / control, 0.0)
    values = contrib.sum(axis=1) / contrib.shape[1]
    return UnitEffects(values=values, lag=lag)


def std_error(effects: Union[UnitEffects, npt.ArrayLike]) -> float:
    """``sqrt(sum_n (ITE_n - mean)^2 / (N (N - 1)))``."""
    values = np.asarray(getattr(effects, "values", effects), dtype=float)
    n = values.size
    if n < 2:
        raise ValueError(f"standard error needs at least 2 units, got {n}")
    centered = values - _mean(values)
    return math.sqrt(math.fsum(centered * centered) / (n * (n - 1)))


def one_sample_ztest(point: float, se: float) -> tuple[float, float]:
    """Two-sided z-test of ``point`` against zero. Returns ``(z, p_value)``.

    ``se == 0`` is accepted only when ``point == 0`` (giving ``(0, 1)``).
    """
    if se < 0 or not math.isfinite(se):
        raise ValueError(f"standard error must be finite and non-negative, got {se}")
    if se == 0:
        if point == 0:
            return 0.0, 1.0
        raise ValueError("zero standard error with a non-zero estimate")
    z = point / se
    return z, float(2.0 * stats.norm.sf(abs(z)))


def two_sample_ztest(
    mean_t: float, mean_c: float, se_t: float, se_c: float
) -> tuple[float, float]:
    """Two-sided z-test for a difference of two independent means."""
    if se_t < 0 or se_c < 0:
        raise ValueError("standard errors must be non-negative")
    return one_sample_ztest(mean_t - mean_c, math.hypot(se_t, se_c))


def _report(
    estimand: str,
    effects: UnitEffects,
    alpha: float,
    n_steps_used: int,
) -> EstimateReport:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    point = effects.mean
    n = effects.values.size
    if n < 2:
        # a single unit carries no information about the spread of unit effects
        se = z = p_value = lo = hi = math.nan
    else:
        se = std_error(effects)
        if se == 0 and point != 0:
            z = math.copysign(math.inf, point)
            p_value = 0.0
        else:
            z, p_value = one_sample_ztest(point, se)
        half = float(stats.norm.ppf(1 - alpha / 2)) * se
        lo, hi = point - half, point + half
    return EstimateReport(
        estimand=estimand,
        point=point,
        std_error=se,
        z=z,
        p_value=p_value,
        ci_low=lo,
        ci_high=hi,
        alpha=alpha,
        n_units=n,
        n_steps_used=n_steps_used,
        lag=effects.lag,
    )


def ht_tau(
    W: Matrix, Y: npt.ArrayLike, probs: MarginalProbs, alpha: float = 0.05
) -> EstimateReport:
    """Horvitz-Thompson estimate of the average treatment effect.

    Parameters
    ----------
    W : array_like or AssignmentMatrix
        Realized ``N x S`` assignment.
    Y : array_like or OutcomeMatrix
        Outcomes observed under ``W``.
    probs : DesignSpec, float or array_like
        ``P(W[n, s] = 1)``; anything broadcastable to ``(N, S)``.
    alpha : float
        Level for the z-test and the ``1 - alpha`` confidence interval.
    """
    effects = unit_effects(W, Y, probs)
    return _report("tau", effects, alpha, np.shape(getattr(Y, "values", Y))[1])


def ht_tau_lag(
    W: Matrix,
    Y: npt.ArrayLike,
    lag: int,
    probs: WindowProbs,
    alpha: float = 0.05,
) -> EstimateReport:
    """Horvitz-Thompson estimate of the lag-``lag`` average effect.

    ``probs`` is a design, a :class:`WindowProbability`, or a pair
    ``(p_all_treated, p_all_control)`` broadcastable to ``(N, S - lag)``.
    """
    effects = unit_effects(W, Y, probs, lag=lag)
    n_steps = np.shape(getattr(Y, "values", Y))[1]
    return _report("tau_lag", effects, alpha, n_steps - lag)


# Exposure levels for the one-step interference mapping, indexed by
# 2 * W[s] + W[s-1].
D00, D01, D10, D11 = 0, 1, 2, 3


def exposure_mapping_estimate(
    W: Matrix,
    Y: npt.ArrayLike,
    probs: WindowProbs,
    alpha: float = 0.05,
) -> EstimateReport:
    """Contrast of full exposure (``d11``) against no exposure (``d00``).

    Every (unit, timestep >= 2) observation is mapped to one of four
    exposure levels from its current and previous assignment; observations
    at ``d11`` and ``d00`` are weighted by the inverse of their generalized
    exposure probability. The sum is normalized per (unit, timestep) so the
    result sits on the same scale as :func:`ht_tau_lag` with ``lag=1``.
    """
    w, y = _panel(W, Y)
    n_units, n_steps = w.shape
    if n_steps < 2:
        raise ValueError("exposure mapping needs at least 2 timesteps")
    pi11, pi00 = _windows(probs, 1, w.shape)
    level = 2 * w[:, 1:].astype(np.int8) + w[:, :-1].astype(np.int8)
    y_now = y[:, 1:]
    per_unit = np.zeros(n_units)
    for n in range(n_units):
        terms = []
        for t in range(n_steps - 1):
            if level[n, t] == D11:
                terms.append(y_now[n, t] / pi11[n, t])
            elif level[n, t] == D00:
                terms.append(-y_now[n, t] / pi00[n, t])
        per_unit[n] = math.fsum(terms) / (n_steps - 1)
    return _report("exposure_d11_d00", UnitEffects(per_unit, lag=1), alpha, n_steps - 1)
