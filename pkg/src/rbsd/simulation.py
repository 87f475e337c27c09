"""Carryover outcome model and the Monte-Carlo evaluation loop.

Outcomes follow a linear additive model: the A/A baseline plus
``delta[j]`` for every ``j`` with ``W[n, s - j] = 1``. Assignments before the
first timestep count as control.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

from .design import AssignmentMatrix, DesignSpec, sample
from .estimation import EstimateReport, ht_tau, ht_tau_lag
from .synthetic import OutcomeMatrix

__all__ = [
    "CarryoverModel",
    "CellMetrics",
    "ReplicateRecord",
    "SimulationReport",
    "aa_study",
    "apply_carryover",
    "box_summary",
    "monte_carlo",
    "replicate_seed",
    "true_estimands",
]

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class CarryoverModel:
    """Direct effect ``deltas[0]`` and carryover effects ``deltas[1:]``."""

    deltas: tuple[float, ...] = (0.0,)

    def __post_init__(self) -> None:
        deltas = tuple(float(d) for d in self.deltas)
        if not deltas:
            raise ValueError("deltas must contain at least the direct effect")
        if not all(math.isfinite(d) for d in deltas):
            raise ValueError("deltas must be finite")
        object.__setattr__(self, "deltas", deltas)

    @property
    def carryover_order(self) -> int:
        nonzero = [j for j, d in enumerate(self.deltas) if d != 0]
        return max(nonzero, default=0)


def _values(x) -> np.ndarray:
    return np.asarray(getattr(x, "values", x))


def apply_carryover(
    base: Union[OutcomeMatrix, npt.ArrayLike],
    W: Union[AssignmentMatrix, npt.ArrayLike],
    model: CarryoverModel,
) -> OutcomeMatrix:
    """Observed outcomes when ``W`` is applied on top of ``base``."""
    y = np.array(_values(base), dtype=float)
    w = _values(W).astype(float)
    if y.shape != w.shape:
        raise ValueError(f"base shape {y.shape} and assignment shape {w.shape} differ")
    n_steps = y.shape[1]
    for j, delta in enumerate(model.deltas):
        if delta == 0 or j >= n_steps:
            continue
        y[:, j:] += delta * w[:, : n_steps - j]
    return OutcomeMatrix(y, getattr(base, "unit_ids", None))


def true_estimands(
    base: Union[OutcomeMatrix, npt.ArrayLike],
    model: CarryoverModel,
    lag: int,
) -> tuple[float, float]:
    """``(tau, tau_lag)`` from the all-treated and all-control counterfactuals."""
    y = np.asarray(_values(base), dtype=float)
    if not 0 <= lag < y.shape[1]:
        raise ValueError(f"lag {lag} invalid for S={y.shape[1]}")
    treated = apply_carryover(y, np.ones_like(y), model).values
    control = apply_carryover(y, np.zeros_like(y), model).values
    diff = treated - control
    tau = math.fsum(diff.ravel()) / diff.size
    tail = diff[:, lag:]
    return tau, math.fsum(tail.ravel()) / tail.size


def replicate_seed(master_seed: int, design_index: int, replicate: int) -> int:
    """Stable 64-bit seed for one (design, replicate) pair."""
    seq = np.random.SeedSequence([master_seed & _MASK64, design_index, replicate])
    return int(seq.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ReplicateRecord:
    design: str
    replicate: int
    estimator: str
    estimate: float
    std_error: float
    p_value: float


@dataclass(frozen=True)
class CellMetrics:
    design: str
    estimator: str
    truth: float
    me: float
    mse: float
    fpr: Optional[float]
    fnr: Optional[float]
    reps: int
    alpha: float

    def to_dict(self) -> dict:
        return {
            "design": self.design,
            "estimator": self.estimator,
            "truth": self.truth,
            "me": self.me,
            "mse": self.mse,
            "fpr": self.fpr,
            "fnr": self.fnr,
            "reps": self.reps,
            "alpha": self.alpha,
        }


@dataclass
class SimulationReport:
    deltas: tuple[float, ...]
    lag: int
    alpha: float
    reps: int
    master_seed: int
    cells: list[CellMetrics]
    replicates: list[ReplicateRecord] = field(repr=False)

    def cell(self, design: str, estimator: str) -> CellMetrics:
        for c in self.cells:
            if c.design == design and c.estimator == estimator:
                return c
        raise KeyError((design, estimator))

    def sigma_hat(self, design: str, estimator: str) -> npt.NDArray[np.float64]:
        return np.array(
            [
                r.std_error
                for r in self.replicates
                if r.design == design and r.estimator == estimator
            ]
        )

    def estimates(self, design: str, estimator: str) -> npt.NDArray[np.float64]:
        return np.array(
            [
                r.estimate
                for r in self.replicates
                if r.design == design and r.estimator == estimator
            ]
        )

    def to_dict(self) -> dict:
        return {
            "deltas": list(self.deltas),
            "lag": self.lag,
            "alpha": self.alpha,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "cells": [c.to_dict() for c in self.cells],
        }


ESTIMATORS = ("tau", "tau_lag")


def _run_one(
    base: np.ndarray,
    spec: DesignSpec,
    seed: int,
    model: CarryoverModel,
    estimators: Sequence[str],
    lag: int,
    alpha: float,
) -> list[EstimateReport]:
    W = sample(spec, seed)
    Y = apply_carryover(base, W, model)
    out = []
    for name in estimators:
        if name == "tau":
            out.append(ht_tau(W, Y, spec, alpha=alpha))
        else:
            out.append(ht_tau_lag(W, Y, lag, spec, alpha=alpha))
    return out


def monte_carlo(
    base: Union[OutcomeMatrix, npt.ArrayLike],
    specs: Sequence[DesignSpec],
    model: CarryoverModel,
    estimators: Sequence[str] = ESTIMATORS,
    reps: int = 100,
    alpha: float = 0.05,
    master_seed: int = 0,
    lag: int = 1,
    threads: Optional[int] = None,
) -> SimulationReport:
    """Repeatedly re-randomize, inject effects, and score each estimator.

    Replicate ``r`` of design ``d`` samples with
    ``replicate_seed(master_seed, d, r)``, so the same assignments are reused
    across carryover models and results do not depend on ``threads``.

    For each (design, estimator) cell the report carries the mean error and
    mean squared error against the matching true estimand, and either the
    false positive rate (true estimand exactly zero) or the false negative
    rate (otherwise) of a two-sided z-test at level ``alpha``.
    """
    y = np.asarray(_values(base), dtype=float)
    if y.ndim != 2:
        raise ValueError("base outcomes must be a 2-D panel")
    if reps < 1:
        raise ValueError(f"reps must be at least 1, got {reps}")
    unknown = set(estimators) - set(ESTIMATORS)
    if unknown:
        raise ValueError(f"unknown estimators {sorted(unknown)}; expected {ESTIMATORS}")
    labels = [spec.label for spec in specs]
    if len(set(labels)) != len(labels):
        raise ValueError(f"design labels must be unique, got {labels}")
    for spec in specs:
        if spec.shape != y.shape:
            raise ValueError(
                f"design {spec.label} has shape {spec.shape}, base panel has {y.shape}"
            )
    tau, tau_lag = true_estimands(y, model, lag)
    truths = {"tau": tau, "tau_lag": tau_lag}

    jobs = [(d, r) for d in range(len(specs)) for r in range(reps)]

    def work(job: tuple[int, int]) -> list[EstimateReport]:
        d, r = job
        seed = replicate_seed(master_seed, d, r)
        return _run_one(y, specs[d], seed, model, estimators, lag, alpha)

    with ThreadPoolExecutor(max_workers=threads or 1) as pool:
        results = list(pool.map(work, jobs))

    records = []
    for (d, r), reports in zip(jobs, results):
        for name, rep in zip(estimators, reports):
            records.append(
                ReplicateRecord(labels[d], r, name, rep.point, rep.std_error, rep.p_value)
            )

    cells = []
    for d, label in enumerate(labels):
        for k, name in enumerate(estimators):
            reports = [results[d * reps + r][k] for r in range(reps)]
            errors = np.array([rep.point for rep in reports]) - truths[name]
            rejected = np.array([rep.p_value < alpha for rep in reports])
            null = truths[name] == 0
            cells.append(
                CellMetrics(
                    design=label,
                    estimator=name,
                    truth=truths[name],
                    me=math.fsum(errors) / reps,
                    mse=math.fsum(errors**2) / reps,
                    fpr=float(rejected.mean()) if null else None,
                    fnr=None if null else float(1.0 - rejected.mean()),
                    reps=reps,
                    alpha=alpha,
                )
            )
    return SimulationReport(
        deltas=model.deltas,
        lag=lag,
        alpha=alpha,
        reps=reps,
        master_seed=master_seed,
        cells=cells,
        replicates=records,
    )


def box_summary(values: npt.ArrayLike) -> dict[str, float]:
    """Median, quartiles, and Tukey whiskers (1.5 IQR, clipped to the data)."""
    x = np.sort(np.asarray(values, dtype=float))
    q1, med, q3 = np.percentile(x, [25, 50, 75])
    iqr = q3 - q1
    lo = x[x >= q1 - 1.5 * iqr].min()
    hi = x[x <= q3 + 1.5 * iqr].max()
    return {
        "lower_whisker": float(lo),
        "lower_quartile": float(q1),
        "median": float(med),
        "upper_quartile": float(q3),
        "upper_whisker": float(hi),
    }


def aa_study(
    base: Union[OutcomeMatrix, npt.ArrayLike],
    specs: Sequence[DesignSpec],
    reps: int = 100,
    lag: int = 1,
    master_seed: int = 0,
    alpha: float = 0.05,
    threads: Optional[int] = None,
) -> dict[str, dict[str, dict[str, float]]]:
    """Spread of estimated standard errors when there is no effect at all.

    Returns ``{design: {"sigma": box, "sigma_lag": box, "tau": box,
    "tau_lag": box}}`` where each box comes from :func:`box_summary`.
    """
    report = monte_carlo(
        base,
        specs,
        CarryoverModel((0.0,)),
        reps=reps,
        alpha=alpha,
        master_seed=master_seed,
        lag=lag,
        threads=threads,
    )
    out = {}
    for spec in specs:
        label = spec.label
        out[label] = {
            "sigma": box_summary(report.sigma_hat(label, "tau")),
            "sigma_lag": box_summary(report.sigma_hat(label, "tau_lag")),
            "tau": box_summary(report.estimates(label, "tau")),
            "tau_lag": box_summary(report.estimates(label, "tau_lag")),
        }
    return out
