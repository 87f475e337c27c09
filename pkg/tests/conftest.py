"""Shared oracles and the acceptance summary hook."""

import itertools
from fractions import Fraction

import numpy as np
import pytest

from rbsd.design import DesignKind, as_fraction

ACCEPTANCE_LINES: list[str] = []


def record_criterion(number: int, ok: bool, detail: str) -> None:
    line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def enumerate_support(spec):
    """Exact (matrix, probability) pairs of a tiny design, straight from its definition.

    Built without touching the samplers, so it can serve as their oracle.
    """
    n, s = spec.n_units, spec.n_steps
    p = as_fraction(spec.p)
    kind = spec.kind
    out = {}

    def add(matrix, prob):
        key = tuple(map(tuple, matrix))
        out[key] = out.get(key, Fraction(0)) + prob

    if kind is DesignKind.ITEM_RANDOMIZED:
        k = int(p * n)
        combos = list(itertools.combinations(range(n), k))
        for chosen in combos:
            m = [[1 if i in chosen else 0] * s for i in range(n)]
            add(m, Fraction(1, len(combos)))
    elif kind is DesignKind.SWITCHBACK:
        k = int(p * s)
        combos = list(itertools.combinations(range(s), k))
        for chosen in combos:
            row = [1 if j in chosen else 0 for j in range(s)]
            add([row] * n, Fraction(1, len(combos)))
    elif kind is DesignKind.IID_MULTI_UNIT:
        for cells in itertools.product((0, 1), repeat=n * s):
            ones = sum(cells)
            prob = p**ones * (1 - p) ** (n * s - ones)
            add([list(cells[i * s : (i + 1) * s]) for i in range(n)], prob)
    elif kind is DesignKind.REGULAR_SWITCHBACK:
        bps = list(spec.breakpoints)
        q = [as_fraction(w) for w in spec.weights]
        rows = []
        for coins in itertools.product((0, 1), repeat=len(bps)):
            row = []
            for t in range(1, s + 1):
                k = max(i for i, b in enumerate(bps) if b <= t)
                row.append(coins[k])
            prob = Fraction(1)
            for c, qk in zip(coins, q):
                prob *= qk if c else 1 - qk
            rows.append((row, prob))
        for combo in itertools.product(rows, repeat=n):
            prob = Fraction(1)
            for _, pr in combo:
                prob *= pr
            add([r for r, _ in combo], prob)
    elif kind is DesignKind.RBSD:
        base = [1] * int(p * s) + [0] * (s - int(p * s))
        perms = list(itertools.permutations(base))
        weight = Fraction(1, len(perms))
        for combo in itertools.product(perms, repeat=n // 2):
            prob = weight ** (n // 2)
            top = [list(r) for r in combo]
            add(top + [[1 - x for x in r] for r in top], prob)
    return [(np.array(k), v) for k, v in out.items()]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
