"""Skewed synthetic outcome panels.

Item-level sales are modelled as a zero-inflated log-normal baseline per
item with small multiplicative day-to-day noise. User purchase counts
follow a discrete power law.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import numpy.typing as npt
from scipy import stats

__all__ = [
    "FrequencyTable",
    "empirical_skew",
    "OutcomeMatrix",
    "gen_lognormal_items",
    "gen_powerlaw_users",
]

LOGNORMAL_MU = 2.4507
LOGNORMAL_SIGMA = 1.4764
POWERLAW_COEFFICIENT = 0.80
POWERLAW_EXPONENT = 2.5


@dataclass(frozen=True)
class OutcomeMatrix:
    """An ``N x S`` panel of real-valued outcomes."""

    values: npt.NDArray[np.float64]
    unit_ids: Optional[tuple[str, ...]] = None

    def __post_init__(self) -> None:
        arr = np.array(self.values, dtype=float, copy=True)
        if arr.ndim != 2 or 0 in arr.shape:
            raise ValueError(f"outcome panel must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise ValueError("outcome panel contains non-finite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.unit_ids is not None:
            ids = tuple(str(u) for u in self.unit_ids)
            if len(ids) != arr.shape[0]:
                raise ValueError(f"{len(ids)} unit ids for {arr.shape[0]} units")
            object.__setattr__(self, "unit_ids", ids)

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def n_units(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def gen_lognormal_items(
    n_units: int,
    n_steps: int,
    seed: int,
    mean_log: float = LOGNORMAL_MU,
    sd_log: float = LOGNORMAL_SIGMA,
    zero_frac: float = 0.7,
    winsor_pct: float = 99.0,
    jitter_sd: float = 0.1,
) -> OutcomeMatrix:
    """Zero-inflated log-normal item panel.

    Each item is inactive (all zeros) with probability ``zero_frac``;
    otherwise it gets a baseline drawn from ``LogNormal(mean_log, sd_log)``.
    Daily values are the baseline times ``LogNormal(0, jitter_sd)`` noise.
    Positive values are then capped at their ``winsor_pct`` percentile
    (``100`` disables the cap).
    """
    if n_units < 1 or n_steps < 1:
        raise ValueError("n_units and n_steps must be positive")
    if not 0.0 <= zero_frac < 1.0:
        raise ValueError(f"zero_frac must lie in [0, 1), got {zero_frac}")
    if not 0.0 < winsor_pct <= 100.0:
        raise ValueError(f"winsor_pct must lie in (0, 100], got {winsor_pct}")
    if sd_log <= 0 or jitter_sd < 0:
        raise ValueError("sd_log must be positive and jitter_sd non-negative")
    rng = np.random.default_rng(seed)
    active = rng.random(n_units) >= zero_frac
    baseline = np.where(active, rng.lognormal(mean_log, sd_log, n_units), 0.0)
    noise = rng.lognormal(0.0, jitter_sd, (n_units, n_steps)) if jitter_sd else 1.0
    panel = baseline[:, None] * noise
    positive = panel[panel > 0]
    if winsor_pct < 100.0 and positive.size:
        panel = np.minimum(panel, np.percentile(positive, winsor_pct))
    return OutcomeMatrix(panel)


@dataclass(frozen=True)
class FrequencyTable:
    """Counts of each observed value of a discrete sample."""

    values: npt.NDArray[np.int64]
    counts: npt.NDArray[np.int64]
    samples: npt.NDArray[np.int64] = field(repr=False)
    coefficient: float = POWERLAW_COEFFICIENT
    exponent: float = POWERLAW_EXPONENT

    def frequency(self, x: int) -> int:
        hit = np.nonzero(self.values == x)[0]
        return int(self.counts[hit[0]]) if hit.size else 0

    def skewness(self, winsor_pct: float = 100.0) -> float:
        data = self.samples.astype(float)
        if winsor_pct < 100.0:
            data = np.minimum(data, np.percentile(data, winsor_pct))
        return float(stats.skew(data))

    def to_dict(self) -> dict:
        return {
            "coefficient": self.coefficient,
            "exponent": self.exponent,
            "n": int(self.samples.size),
            "values": self.values.tolist(),
            "counts": self.counts.tolist(),
        }


def gen_powerlaw_users(
    n_users: int,
    seed: int,
    coefficient: float = POWERLAW_COEFFICIENT,
    exponent: float = POWERLAW_EXPONENT,
) -> FrequencyTable:
    """Purchase counts per user with ``P(x) ~ x**-exponent`` for ``x >= 1``.

    ``coefficient`` is carried along as the fitted scale for reporting; the
    sample itself is drawn from the normalized Zipf law.
    """
    if exponent <= 1:
        raise ValueError(f"exponent must exceed 1, got {exponent}")
    if n_users < 1:
        raise ValueError("n_users must be positive")
    rng = np.random.default_rng(seed)
    samples = rng.zipf(exponent, n_users).astype(np.int64)
    values, counts = np.unique(samples, return_counts=True)
    return FrequencyTable(values, counts, samples, coefficient, exponent)


def empirical_skew(values: Sequence[float]) -> float:
    """Fisher-Pearson skewness coefficient."""
    return float(stats.skew(np.asarray(values, dtype=float)))
