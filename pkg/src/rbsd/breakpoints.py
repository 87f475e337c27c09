"""Minimax breakpoint placement for regular switchback designs.

For ``K`` breakpoints after the fixed first one (``s_0 = 1``) and carryover
order ``m`` the worst-case variance of the lag estimator is proportional to

    4 * sum_{k=0..K} (s_{k+1} - s_k)^2
    + 8 m (s_K - s_1) + 4 m^2 K - 4 m^2
    + 4 * sum_{k=1..K-1} max(0, m - s_{k+1} + s_k)^2

with the closing sentinel ``s_{K+1} = S + 1``. The optimal weights are all
one half.

Because ``s_K - s_1`` telescopes over the interior gaps, the objective is a
sum of per-gap costs plus a constant, which makes an exact dynamic program
over (breakpoints placed, last position) possible.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional, Sequence

import numpy as np

__all__ = [
    "BreakpointProblem",
    "BreakpointSolution",
    "objective",
    "optimize",
]

EXHAUSTIVE_LIMIT = 10**7


@dataclass(frozen=True)
class BreakpointProblem:
    n_steps: int
    n_breakpoints: int
    carryover: int

    def __post_init__(self) -> None:
        if not 1 <= self.n_breakpoints < self.n_steps:
            raise ValueError(
                f"need 1 <= K < S, got K={self.n_breakpoints}, S={self.n_steps}"
            )
        if not 0 <= self.carryover < self.n_steps:
            raise ValueError(f"need 0 <= m < S, got m={self.carryover}, S={self.n_steps}")


@dataclass(frozen=True)
class BreakpointSolution:
    breakpoints: tuple[int, ...]
    objective_value: int
    weights: tuple[float, ...]
    mode: str

    def to_dict(self) -> dict:
        return {
            "breakpoints": list(self.breakpoints),
            "objective_value": self.objective_value,
            "weights": list(self.weights),
            "mode": self.mode,
        }


def objective(breakpoints: Sequence[int], m: int, n_steps: int) -> int:
    """Minimax variance objective for a breakpoint set starting at 1."""
    s = [int(b) for b in breakpoints]
    if not s or s[0] != 1:
        raise ValueError("breakpoints must start at 1")
    if any(b <= a for a, b in zip(s, s[1:])) or s[-1] > n_steps:
        raise ValueError(f"breakpoints must be strictly increasing within 1..{n_steps}")
    k_total = len(s) - 1
    ext = s + [n_steps + 1]
    value = 4 * sum((ext[k + 1] - ext[k]) ** 2 for k in range(k_total + 1))
    if k_total >= 1:
        value += 8 * m * (s[k_total] - s[1])
    value += 4 * m * m * k_total - 4 * m * m
    value += 4 * sum(max(0, m - s[k + 1] + s[k]) ** 2 for k in range(1, k_total))
    return value


def _objective_batch(interior: np.ndarray, m: int, n_steps: int) -> np.ndarray:
    """Vectorized objective for rows of ``s_1..s_K``."""
    rows = interior.shape[0]
    full = np.hstack(
        [
            np.ones((rows, 1), dtype=np.int64),
            interior,
            np.full((rows, 1), n_steps + 1, dtype=np.int64),
        ]
    )
    gaps = np.diff(full, axis=1)
    k_total = interior.shape[1]
    value = 4 * (gaps**2).sum(axis=1)
    value += 8 * m * (interior[:, -1] - interior[:, 0])
    value += 4 * m * m * k_total - 4 * m * m
    inner = gaps[:, 1:k_total]
    value += 4 * (np.maximum(0, m - inner) ** 2).sum(axis=1)
    return value


def _exhaustive(problem: BreakpointProblem, threads: Optional[int]) -> tuple[tuple[int, ...], int]:
    S, K, m = problem.n_steps, problem.n_breakpoints, problem.carryover
    total = math.comb(S - 1, K)
    if total > EXHAUSTIVE_LIMIT:
        raise ValueError(
            f"exhaustive search over {total} subsets exceeds {EXHAUSTIVE_LIMIT}; use mode='dp'"
        )
    combos = itertools.combinations(range(2, S + 1), K)

    def best(block: np.ndarray) -> tuple[int, tuple[int, ...]]:
        values = _objective_batch(block, m, S)
        i = int(np.argmin(values))  # first minimum = lexicographically smallest
        return int(values[i]), tuple(int(x) for x in block[i])

    workers = threads or 1
    results = []
    with ThreadPoolExecutor(max_workers=workers) as pool:
        while True:
            wave = []
            for _ in range(workers):
                block = list(itertools.islice(combos, 50_000))
                if block:
                    wave.append(np.asarray(block, dtype=np.int64))
            if not wave:
                break
            results.extend(pool.map(best, wave))
    # blocks arrive in lexicographic order; min() keeps the earliest minimum
    value, interior = min(results, key=lambda r: r[0])
    return (1,) + interior, value


def _gap_cost(gap: int, m: int, interior: bool) -> int:
    if not interior:
        return 4 * gap * gap
    return 4 * gap * gap + 8 * m * gap + 4 * max(0, m - gap) ** 2


def _dp(problem: BreakpointProblem) -> tuple[tuple[int, ...], int]:
    S, K, m = problem.n_steps, problem.n_breakpoints, problem.carryover
    inf = math.inf
    # tail[k][pos]: cheapest completion when s_k = pos (k = 1..K), covering the
    # gaps s_k -> s_{k+1} -> ... -> S + 1
    tail = [[inf] * (S + 2) for _ in range(K + 1)]
    for pos in range(2, S + 1):
        tail[K][pos] = _gap_cost(S + 1 - pos, m, interior=False)
    for k in range(K - 1, 0, -1):
        for pos in range(2, S + 1):
            tail[k][pos] = min(
                (_gap_cost(nxt - pos, m, True) + tail[k + 1][nxt] for nxt in range(pos + 1, S + 1)),
                default=inf,
            )
    const = 4 * m * m * K - 4 * m * m
    first = min(range(2, S + 1), key=lambda pos: (_gap_cost(pos - 1, m, False) + tail[1][pos], pos))
    value = _gap_cost(first - 1, m, False) + tail[1][first]
    chosen = [1, first]
    for k in range(1, K):
        pos = chosen[-1]
        target = tail[k][pos]
        for nxt in range(pos + 1, S + 1):
            if _gap_cost(nxt - pos, m, True) + tail[k + 1][nxt] == target:
                chosen.append(nxt)
                break
    return tuple(chosen), int(value + const)


def optimize(
    problem: BreakpointProblem,
    mode: Literal["auto", "exhaustive", "dp"] = "auto",
    threads: Optional[int] = None,
) -> BreakpointSolution:
    """Find the breakpoint set minimizing :func:`objective`.

    Ties go to the lexicographically smallest set in both modes. ``auto``
    uses exhaustive enumeration when it has at most ``10**7`` candidates.
    """
    if mode == "auto":
        small = math.comb(problem.n_steps - 1, problem.n_breakpoints) <= EXHAUSTIVE_LIMIT
        mode = "exhaustive" if small else "dp"
    if mode == "exhaustive":
        bps, value = _exhaustive(problem, threads)
    elif mode == "dp":
        bps, value = _dp(problem)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return BreakpointSolution(
        breakpoints=bps,
        objective_value=value,
        weights=(0.5,) * len(bps),
        mode=mode,
    )
