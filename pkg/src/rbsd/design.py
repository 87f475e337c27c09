"""Design specifications and assignment-matrix samplers.

Five designs are supported. All of them produce an ``N x S`` binary matrix
``W`` where ``W[n, s] = 1`` means unit ``n`` is treated at timestep ``s``.

========================  ==============================================
kind                      sampling mechanism
========================  ==============================================
``item``                  ``pN`` whole rows treated, chosen without
                          replacement
``switchback``            ``pS`` whole columns treated, chosen without
                          replacement
``iid``                   independent Bernoulli(p) per cell
``regular``               one Bernoulli(q_k) coin per unit and breakpoint
``rbsd``                  ``N/2`` random permutations of a fixed-weight
                          row, stacked with their complements
========================  ==============================================

Breakpoints and timestep indices are 1-based in every public signature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence, Union

import numpy as np
import numpy.typing as npt

__all__ = [
    "AssignmentMatrix",
    "DesignKind",
    "DesignSpec",
    "InvalidDesignError",
    "RejectionCapExceeded",
    "as_fraction",
    "balance_violations",
    "check_balanced",
    "check_regular",
    "regularity_violations",
    "sample",
    "sample_bsd_rejection_oracle",
]

ArrayLike = Union[npt.ArrayLike, "AssignmentMatrix"]


class InvalidDesignError(ValueError):
    """Raised when a design specification violates one of its invariants."""


class RejectionCapExceeded(RuntimeError):
    """Raised when the rejection sampler runs out of attempts."""


class DesignKind(str, enum.Enum):
    ITEM_RANDOMIZED = "item"
    SWITCHBACK = "switchback"
    IID_MULTI_UNIT = "iid"
    REGULAR_SWITCHBACK = "regular"
    RBSD = "rbsd"

    @classmethod
    def parse(cls, value: Union[str, "DesignKind"]) -> "DesignKind":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("-", "_")
        aliases = {
            "item": cls.ITEM_RANDOMIZED,
            "item_randomized": cls.ITEM_RANDOMIZED,
            "itemrandomized": cls.ITEM_RANDOMIZED,
            "switchback": cls.SWITCHBACK,
            "iid": cls.IID_MULTI_UNIT,
            "iid_multi_unit": cls.IID_MULTI_UNIT,
            "iidmultiunit": cls.IID_MULTI_UNIT,
            "regular": cls.REGULAR_SWITCHBACK,
            "regular_switchback": cls.REGULAR_SWITCHBACK,
            "regularswitchback": cls.REGULAR_SWITCHBACK,
            "rbsd": cls.RBSD,
        }
        try:
            return aliases[key]
        except KeyError:
            raise InvalidDesignError(
                f"unknown design kind {value!r}; expected one of "
                f"{sorted(k.value for k in cls)}"
            ) from None


def as_fraction(p: Union[float, int, str, Fraction]) -> Fraction:
    """Convert a treatment share to a Fraction.

    Floats are snapped to the nearest fraction with denominator at most
    10**6, so ``0.6`` becomes ``3/5`` rather than its binary expansion.
    """
    if isinstance(p, Fraction):
        return p
    if isinstance(p, str):
        return Fraction(p)
    if isinstance(p, int):
        return Fraction(p)
    return Fraction(p).limit_denominator(10**6)


def _integral(share: Fraction, total: int) -> Optional[int]:
    value = share * total
    return int(value) if value.denominator == 1 else None


@dataclass(frozen=True)
class DesignSpec:
    """Parameterized description of one design.

    Parameters
    ----------
    kind : DesignKind or str
        Which design to sample from.
    n_units, n_steps : int
        Matrix dimensions ``N`` and ``S``.
    p : float
        Treatment share. Must be in (0, 1).
    breakpoints : sequence of int, optional
        1-based randomization points, starting at 1 and strictly increasing.
        Used by ``regular`` (default: every timestep) and ``rbsd`` (which
        only supports every timestep).
    weights : sequence of float, optional
        Per-breakpoint treatment probabilities for ``regular``. Defaults to
        ``p`` for every breakpoint.
    name : str, optional
        Label used in reports. Defaults to the kind value.
    """

    kind: DesignKind
    n_units: int
    n_steps: int
    p: float = 0.5
    breakpoints: Optional[tuple[int, ...]] = None
    weights: Optional[tuple[float, ...]] = None
    name: Optional[str] = field(default=None, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", DesignKind.parse(self.kind))
        if self.breakpoints is not None:
            object.__setattr__(
                self, "breakpoints", tuple(int(b) for b in self.breakpoints)
            )
        if self.weights is not None:
            object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        object.__setattr__(self, "p", float(self.p))
        self._validate()
        if self.kind in (DesignKind.REGULAR_SWITCHBACK, DesignKind.RBSD):
            if self.breakpoints is None:
                object.__setattr__(
                    self, "breakpoints", tuple(range(1, self.n_steps + 1))
                )
            if self.weights is None:
                object.__setattr__(
                    self, "weights", (self.p,) * len(self.breakpoints)
                )

    def _validate(self) -> None:
        kind = self.kind
        for attr in ("n_units", "n_steps"):
            value = getattr(self, attr)
            if not isinstance(value, (int, np.integer)) or value < 1:
                raise InvalidDesignError(f"{attr} must be a positive integer, got {value!r}")
        if not 0.0 < self.p < 1.0:
            raise InvalidDesignError(f"p must lie strictly inside (0, 1), got {self.p}")
        share = as_fraction(self.p)
        if kind in (DesignKind.ITEM_RANDOMIZED, DesignKind.RBSD):
            if _integral(share, self.n_units) is None:
                raise InvalidDesignError(
                    f"p*N must be an integer: p={self.p}, N={self.n_units}"
                )
        if kind in (DesignKind.SWITCHBACK, DesignKind.RBSD):
            if _integral(share, self.n_steps) is None:
                raise InvalidDesignError(
                    f"p*S must be an integer: p={self.p}, S={self.n_steps}"
                )
        if kind is DesignKind.RBSD:
            if self.n_units % 2:
                raise InvalidDesignError(f"rbsd requires an even N, got N={self.n_units}")
            if share != Fraction(1, 2):
                raise InvalidDesignError(f"rbsd requires p = 1/2, got p={self.p}")
        if kind in (DesignKind.REGULAR_SWITCHBACK, DesignKind.RBSD):
            if self.breakpoints is not None:
                _validate_breakpoints(self.breakpoints, self.n_steps)
                if kind is DesignKind.RBSD and self.breakpoints != tuple(
                    range(1, self.n_steps + 1)
                ):
                    raise InvalidDesignError(
                        "rbsd only supports breakpoints at every timestep (1..S)"
                    )
            if self.weights is not None:
                n_bp = (
                    len(self.breakpoints)
                    if self.breakpoints is not None
                    else self.n_steps
                )
                if len(self.weights) != n_bp:
                    raise InvalidDesignError(
                        f"weights has length {len(self.weights)}, expected one per "
                        f"breakpoint ({n_bp})"
                    )
                for k, w in enumerate(self.weights):
                    if not 0.0 < w < 1.0:
                        raise InvalidDesignError(
                            f"weight {k + 1} must lie strictly inside (0, 1), got {w}"
                        )
                if kind is DesignKind.RBSD and any(w != self.p for w in self.weights):
                    raise InvalidDesignError("rbsd fixes every weight to p")
        elif self.breakpoints is not None or self.weights is not None:
            raise InvalidDesignError(
                f"breakpoints/weights are only meaningful for regular and rbsd, "
                f"not {kind.value}"
            )

    @property
    def label(self) -> str:
        return self.name or self.kind.value

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_units, self.n_steps)

    def coin_index(self) -> npt.NDArray[np.int64]:
        """0-based index of the breakpoint governing each timestep."""
        bps = self.breakpoints or tuple(range(1, self.n_steps + 1))
        steps = np.arange(1, self.n_steps + 1)
        return np.searchsorted(np.asarray(bps), steps, side="right") - 1

    def with_shape(self, n_units: int, n_steps: int) -> "DesignSpec":
        """Return a copy resized to another panel.

        Custom breakpoints of a regular design survive only if ``S`` is unchanged.
        """
        keep = n_steps == self.n_steps
        custom = self.kind is DesignKind.REGULAR_SWITCHBACK
        return DesignSpec(
            kind=self.kind,
            n_units=n_units,
            n_steps=n_steps,
            p=self.p,
            breakpoints=self.breakpoints if keep and custom else None,
            weights=self.weights if keep and custom else None,
            name=self.name,
        )

    def to_dict(self) -> dict:
        out = {
            "kind": self.kind.value,
            "n_units": int(self.n_units),
            "n_steps": int(self.n_steps),
            "p": self.p,
        }
        if self.breakpoints is not None:
            out["breakpoints"] = list(self.breakpoints)
            out["weights"] = list(self.weights)
        if self.name is not None:
            out["name"] = self.name
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "DesignSpec":
        known = {"kind", "n_units", "n_steps", "p", "breakpoints", "weights", "name"}
        unknown = set(data) - known
        if unknown:
            raise InvalidDesignError(f"unknown design fields: {sorted(unknown)}")
        if "kind" not in data:
            raise InvalidDesignError("design is missing 'kind'")
        kwargs = dict(data)
        for key in ("breakpoints", "weights"):
            if kwargs.get(key) is not None:
                kwargs[key] = tuple(kwargs[key])
        return cls(**kwargs)


def _validate_breakpoints(breakpoints: Sequence[int], n_steps: int) -> None:
    if len(breakpoints) == 0:
        raise InvalidDesignError("breakpoints must not be empty")
    if breakpoints[0] != 1:
        raise InvalidDesignError(f"first breakpoint must be 1, got {breakpoints[0]}")
    for a, b in zip(breakpoints, breakpoints[1:]):
        if b <= a:
            raise InvalidDesignError(f"breakpoints must be strictly increasing: {a} then {b}")
    if breakpoints[-1] > n_steps:
        raise InvalidDesignError(
            f"breakpoint {breakpoints[-1]} exceeds the number of timesteps S={n_steps}"
        )


@dataclass(frozen=True)
class AssignmentMatrix:
    """An ``N x S`` binary treatment assignment with its provenance.

    ``values`` is stored read-only as ``int8``.
    """

    values: npt.NDArray[np.int8]
    spec: Optional[DesignSpec] = None
    seed: Optional[int] = None

    def __post_init__(self) -> None:
        arr = np.array(self.values, copy=True)
        if arr.ndim != 2:
            raise ValueError(f"assignment matrix must be 2-D, got shape {arr.shape}")
        if arr.size and not np.isin(arr, (0, 1)).all():
            raise ValueError("assignment entries must be 0 or 1")
        arr = arr.astype(np.int8)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        if self.spec is not None and arr.shape != self.spec.shape:
            raise ValueError(
                f"matrix shape {arr.shape} does not match spec shape {self.spec.shape}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape  # type: ignore[return-value]

    @property
    def n_units(self) -> int:
        return self.values.shape[0]

    @property
    def n_steps(self) -> int:
        return self.values.shape[1]

    def row(self, n: int) -> npt.NDArray[np.int8]:
        """Assignments of unit ``n`` (1-based)."""
        return self.values[n - 1]

    def column(self, s: int) -> npt.NDArray[np.int8]:
        """Assignments of every unit at timestep ``s`` (1-based)."""
        return self.values[:, s - 1]

    def window(self, n: int, s_from: int, s_to: int) -> npt.NDArray[np.int8]:
        """Assignments of unit ``n`` over timesteps ``s_from..s_to`` inclusive."""
        return self.values[n - 1, s_from - 1 : s_to]

    def __array__(self, dtype=None, copy=None):
        return self.values if dtype is None else self.values.astype(dtype)


def _as_array(W: ArrayLike) -> npt.NDArray[np.int8]:
    if isinstance(W, AssignmentMatrix):
        return W.values
    return np.asarray(W)


def _rng(seed: int) -> np.random.Generator:
    if seed < 0 or seed >= 2**64:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return np.random.default_rng(int(seed))


def sample(spec: DesignSpec, seed: int) -> AssignmentMatrix:
    """Draw one assignment matrix from ``spec``.

    The draw is a pure function of ``(spec, seed)``.
    """
    rng = _rng(seed)
    n, s = spec.shape
    share = as_fraction(spec.p)
    kind = spec.kind
    if kind is DesignKind.ITEM_RANDOMIZED:
        chosen = rng.choice(n, size=int(share * n), replace=False)
        z = np.zeros(n, dtype=np.int8)
        z[chosen] = 1
        values = np.repeat(z[:, None], s, axis=1)
    elif kind is DesignKind.SWITCHBACK:
        chosen = rng.choice(s, size=int(share * s), replace=False)
        z = np.zeros(s, dtype=np.int8)
        z[chosen] = 1
        values = np.repeat(z[None, :], n, axis=0)
    elif kind is DesignKind.IID_MULTI_UNIT:
        values = (rng.random((n, s)) < spec.p).astype(np.int8)
    elif kind is DesignKind.REGULAR_SWITCHBACK:
        q = np.asarray(spec.weights)
        coins = (rng.random((n, q.size)) < q).astype(np.int8)
        values = coins[:, spec.coin_index()]
    elif kind is DesignKind.RBSD:
        base = np.zeros(s, dtype=np.int8)
        base[: int(share * s)] = 1
        half = rng.permuted(np.tile(base, (n // 2, 1)), axis=1)
        values = np.vstack([half, 1 - half])
    else:  # pragma: no cover
        raise InvalidDesignError(f"unsupported design kind {kind}")
    return AssignmentMatrix(values=values, spec=spec, seed=int(seed))


def balance_violations(W: ArrayLike, p: Union[float, Fraction]) -> list[str]:
    """List every row/column sum that breaks p-balance (1-based indices)."""
    arr = _as_array(W)
    if arr.ndim != 2:
        raise ValueError(f"assignment matrix must be 2-D, got shape {arr.shape}")
    n, s = arr.shape
    share = as_fraction(p)
    if not 0 < share < 1:
        raise ValueError(f"p must lie strictly inside (0, 1), got {p}")
    row_target = _integral(share, s)
    col_target = _integral(share, n)
    if row_target is None or col_target is None:
        raise ValueError(
            f"p-balance needs integer p*N and p*S; got p={p}, N={n}, S={s}"
        )
    problems = []
    for i, total in enumerate(arr.sum(axis=1), start=1):
        if total != row_target:
            problems.append(f"row {i} sums to {int(total)}, expected {row_target}")
    for j, total in enumerate(arr.sum(axis=0), start=1):
        if total != col_target:
            problems.append(f"column {j} sums to {int(total)}, expected {col_target}")
    return problems


def check_balanced(W: ArrayLike, p: Union[float, Fraction]) -> bool:
    """True iff every row sums to ``pS`` and every column to ``pN``."""
    return not balance_violations(W, p)


def regularity_violations(W: ArrayLike, breakpoints: Iterable[int]) -> list[str]:
    """List rows that change value away from a breakpoint."""
    arr = _as_array(W)
    bps = tuple(int(b) for b in breakpoints)
    _validate_breakpoints(bps, arr.shape[1])
    allowed = np.zeros(arr.shape[1], dtype=bool)
    allowed[np.asarray(bps) - 1] = True
    # changes[:, j] compares timestep j+2 to j+1 (1-based)
    changes = arr[:, 1:] != arr[:, :-1]
    bad = changes & ~allowed[1:]
    problems = []
    for i, j in zip(*np.nonzero(bad)):
        problems.append(
            f"row {i + 1} switches at timestep {j + 2}, which is not a breakpoint"
        )
    return problems


def check_regular(W: ArrayLike, breakpoints: Iterable[int]) -> bool:
    """True iff each row is constant on every ``[s_k, s_{k+1})`` segment."""
    return not regularity_violations(W, breakpoints)


def sample_bsd_rejection_oracle(
    n_units: int,
    n_steps: int,
    p: float,
    seed: int,
    max_attempts: int = 10**6,
) -> AssignmentMatrix:
    """Draw iid Bernoulli(p) matrices until one is p-balanced.

    Only for tiny instances (``N*S <= 24``); this is the reference
    distribution that tests compare the constructive sampler against.
    """
    if n_units * n_steps > 24:
        raise ValueError(
            f"rejection oracle is limited to N*S <= 24, got {n_units * n_steps}"
        )
    share = as_fraction(p)
    if _integral(share, n_units) is None or _integral(share, n_steps) is None:
        raise InvalidDesignError(f"p*N and p*S must be integers: p={p}, N={n_units}, S={n_steps}")
    rng = _rng(seed)
    row_target, col_target = int(share * n_steps), int(share * n_units)
    for _ in range(max_attempts):
        draw = (rng.random((n_units, n_steps)) < float(share)).astype(np.int8)
        if (draw.sum(axis=1) == row_target).all() and (
            draw.sum(axis=0) == col_target
        ).all():
            return AssignmentMatrix(values=draw, seed=int(seed))
    raise RejectionCapExceeded(
        f"no balanced matrix after max_attempts={max_attempts} draws"
    )

