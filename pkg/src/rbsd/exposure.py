"""Exact assignment and window probabilities for each design.

These are the denominators of the Horvitz-Thompson estimators. A "window"
of lag ``l`` ending at timestep ``s`` is the stretch ``s-l..s`` of one row;
the estimators need the probability that it is all ones or all zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Union

import numpy as np
import numpy.typing as npt

from .design import DesignKind, DesignSpec, as_fraction

__all__ = [
    "UnsupportedWindowError",
    "WindowProbability",
    "marginal_prob",
    "marginal_probs",
    "run_probability",
    "window_prob_arrays",
    "window_probs",
]


class UnsupportedWindowError(ValueError):
    """Raised when a window probability is degenerate or undefined."""


@dataclass(frozen=True)
class WindowProbability:
    design: DesignSpec
    lag: int
    p_all_treated: float
    p_all_control: float
    step: Optional[int] = None

    def to_dict(self) -> dict:
        out = {
            "design": self.design.to_dict(),
            "lag": self.lag,
            "p_all_treated": self.p_all_treated,
            "p_all_control": self.p_all_control,
        }
        if self.step is not None:
            out["step"] = self.step
        return out


def run_probability(
    n_steps: int,
    p: Union[float, Fraction],
    j: int,
    exact: bool = False,
) -> Union[float, Fraction]:
    """Probability that ``j + 1`` fixed positions of a random fixed-weight row are all ones.

    The row is a uniform permutation of ``pS`` ones and ``(1 - p)S`` zeros, so
    the answer is ``C(pS, j+1) / C(S, j+1)``. It is computed as the product
    ``prod_{i=0..j} (pS - i) / (S - i)``, which never forms a factorial.

    Parameters
    ----------
    n_steps : int
        Row length ``S``.
    p : float or Fraction
        Share of ones; ``p * S`` must be an integer.
    j : int
        Window lag; the window has ``j + 1`` positions.
    exact : bool
        Return a :class:`fractions.Fraction` instead of a float.

    Returns
    -------
    float or Fraction
        Zero when the window is longer than the number of ones.
    """
    if n_steps < 1:
        raise ValueError(f"n_steps must be positive, got {n_steps}")
    if j < 0:
        raise ValueError(f"j must be non-negative, got {j}")
    if j + 1 > n_steps:
        raise ValueError(f"window of length {j + 1} does not fit in S={n_steps}")
    share = as_fraction(p)
    ones = share * n_steps
    if ones.denominator != 1:
        raise ValueError(f"p*S must be an integer: p={p}, S={n_steps}")
    ones = int(ones)
    if exact:
        out = Fraction(1)
        for i in range(j + 1):
            out *= Fraction(ones - i, n_steps - i)
        return max(out, Fraction(0))
    if j + 1 > ones:
        return 0.0
    out = 1.0
    for i in range(j + 1):
        out *= (ones - i) / (n_steps - i)
    return out


def marginal_prob(spec: DesignSpec, n: int, s: int) -> float:
    """``P(W[n, s] = 1)`` for 1-based unit ``n`` and timestep ``s``."""
    if not 1 <= n <= spec.n_units:
        raise IndexError(f"unit index {n} outside 1..{spec.n_units}")
    if not 1 <= s <= spec.n_steps:
        raise IndexError(f"timestep index {s} outside 1..{spec.n_steps}")
    return float(marginal_probs(spec)[s - 1])


def marginal_probs(spec: DesignSpec) -> npt.NDArray[np.float64]:
    """Treatment probability of every timestep, shape ``(S,)``.

    Every supported design treats units exchangeably, so one row suffices.
    """
    if spec.kind is DesignKind.REGULAR_SWITCHBACK:
        return np.asarray(spec.weights, dtype=float)[spec.coin_index()]
    return np.full(spec.n_steps, spec.p)


def window_prob_arrays(
    spec: DesignSpec, lag: int
) -> tuple[npt.NDArray[np.float64], npt.NDArray[np.float64]]:
    """All-treated and all-control window probabilities per window end.

    Returns two arrays of shape ``(S - lag,)``; entry ``i`` belongs to the
    window ending at timestep ``lag + 1 + i``.

    Raises
    ------
    UnsupportedWindowError
        If the window does not fit or some probability is 0 or 1.
    """
    n_steps = spec.n_steps
    if lag < 0:
        raise UnsupportedWindowError(f"lag must be non-negative, got {lag}")
    if lag + 1 > n_steps:
        raise UnsupportedWindowError(f"lag {lag} needs at least {lag + 1} timesteps, S={n_steps}")
    width = n_steps - lag
    p = spec.p
    kind = spec.kind
    if kind is DesignKind.ITEM_RANDOMIZED:
        treated = np.full(width, p)
        control = np.full(width, 1.0 - p)
    elif kind is DesignKind.SWITCHBACK:
        share = as_fraction(p)
        treated = np.full(width, float(run_probability(n_steps, share, lag)))
        control = np.full(width, float(run_probability(n_steps, 1 - share, lag)))
    elif kind is DesignKind.IID_MULTI_UNIT:
        treated = np.full(width, p ** (lag + 1))
        control = np.full(width, (1.0 - p) ** (lag + 1))
    elif kind is DesignKind.REGULAR_SWITCHBACK:
        q = np.asarray(spec.weights, dtype=float)
        coin = spec.coin_index()
        treated = np.empty(width)
        control = np.empty(width)
        for i in range(width):
            # coins covering timesteps i+1..i+lag+1 (1-based) are contiguous
            used = q[coin[i] : coin[i + lag] + 1]
            treated[i] = np.prod(used)
            control[i] = np.prod(1.0 - used)
    elif kind is DesignKind.RBSD:
        value = float(run_probability(n_steps, Fraction(1, 2), lag))
        treated = np.full(width, value)
        control = np.full(width, value)
    else:  # pragma: no cover
        raise UnsupportedWindowError(f"unsupported design kind {kind}")
    for name, arr in (("all-treated", treated), ("all-control", control)):
        if not ((arr > 0) & (arr < 1)).all():
            raise UnsupportedWindowError(
                f"{name} window probability is degenerate for {kind.value} with "
                f"lag={lag}, S={n_steps}, p={p}"
            )
    return treated, control


def window_probs(
    spec: DesignSpec, lag: int, step: Optional[int] = None
) -> WindowProbability:
    """Window probabilities for ``spec`` at a given lag.

    For every design except a regular design with uneven breakpoints the
    result does not depend on the window end, and ``step`` may be omitted.
    Otherwise pass the 1-based timestep ``step`` at which the window ends.
    """
    treated, control = window_prob_arrays(spec, lag)
    if step is None:
        if np.ptp(treated) > 0 or np.ptp(control) > 0:
            raise UnsupportedWindowError(
                "window probabilities vary with the window end for this design; "
                "pass step="
            )
        return WindowProbability(spec, lag, float(treated[0]), float(control[0]))
    if not lag + 1 <= step <= spec.n_steps:
        raise UnsupportedWindowError(
            f"window end {step} outside {lag + 1}..{spec.n_steps}"
        )
    i = step - lag - 1
    return WindowProbability(spec, lag, float(treated[i]), float(control[i]), step=step)
