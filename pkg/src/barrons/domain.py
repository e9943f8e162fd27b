"""Core types and loss arithmetic for online portfolio selection.

Conventions used throughout the package:

* Price relatives are rescaled so the best asset of every round has
  relative exactly 1.  Log-loss regret is invariant to per-round scaling,
  so the normalization is free and it pins down all the constants below.
* Wealth fractions live on the clipped simplex: probability vectors whose
  coordinates are at least ``1/(n*t)``.  The floor keeps every per-round
  log-loss and gradient finite no matter how adversarial the market is:
  the inner product with a normalized round is at least ``1/(n*t)``, so
  the gradient sup-norm never exceeds ``n*t``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SUM_TOL",
    "FLOOR_TOL",
    "ProblemDims",
    "MarketRound",
    "PortfolioState",
    "LossRecord",
    "normalize_round",
    "loss_and_gradient",
    "loss_grad_arrays",
    "smooth_comparator",
    "uniform_portfolio",
    "nudge_interior",
]

SUM_TOL = 1e-9     # allowed slack on sum(x) == 1
FLOOR_TOL = 1e-12  # allowed slack below the coordinate floor


def _frozen_array(values) -> np.ndarray:
    arr = np.array(values, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProblemDims:
    """Asset count ``n`` and horizon ``t``; requires ``n >= 2`` and ``t > n``."""

    n: int
    t: int

    def __post_init__(self):
        n, t = self.n, self.t
        if int(n) != n or int(t) != t:
            raise ValueError("asset count and horizon must be integers")
        if n < 2:
            raise ValueError(f"need at least two assets, got n={n}")
        if t <= n:
            raise ValueError(f"horizon must exceed the asset count, got t={t}, n={n}")

    @property
    def floor(self) -> float:
        """Per-coordinate lower bound of the clipped simplex, 1/(n*t)."""
        return 1.0 / (self.n * self.t)


@dataclass(frozen=True)
class MarketRound:
    """One round of price relatives, scaled so the max entry is exactly 1."""

    r: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.r)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("a market round needs at least two assets")
        if not np.all(np.isfinite(arr)):
            raise ValueError("price relatives must be finite")
        if np.any(arr < 0.0):
            raise ValueError("price relatives must be nonnegative")
        if arr.max() != 1.0:
            raise ValueError("round is not normalized: max entry must be exactly 1")
        object.__setattr__(self, "r", arr)

    @property
    def n(self) -> int:
        return self.r.size


def normalize_round(raw) -> MarketRound:
    """Scale a raw vector of price relatives so its best asset reads 1.

    Raises ValueError if any entry is negative or non-finite, or if no entry
    is strictly positive.  Zeros are allowed (a worthless asset) as long as
    some other asset survives the round.
    """
    arr = np.asarray(raw, dtype=float)
    if arr.ndim != 1 or arr.size < 2:
        raise ValueError("a market round needs at least two assets")
    if not np.all(np.isfinite(arr)):
        raise ValueError("price relatives must be finite")
    if np.any(arr < 0.0):
        raise ValueError("price relatives must be nonnegative")
    top = arr.max()
    if top <= 0.0:
        raise ValueError("at least one price relative must be strictly positive")
    return MarketRound(arr / top)


@dataclass(frozen=True)
class PortfolioState:
    """A point of the simplex: nonnegative wealth fractions summing to one."""

    x: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.x)
        if arr.ndim != 1 or arr.size < 2:
            raise ValueError("a portfolio needs at least two assets")
        if not np.all(np.isfinite(arr)):
            raise ValueError("portfolio weights must be finite")
        object.__setattr__(self, "x", arr)

    @property
    def n(self) -> int:
        return self.x.size

    @classmethod
    def checked(cls, x, dims: ProblemDims) -> "PortfolioState":
        """Construct and enforce clipped-simplex membership for `dims`."""
        state = cls(x)
        if state.n != dims.n:
            raise ValueError(f"expected {dims.n} assets, got {state.n}")
        if abs(state.x.sum() - 1.0) > SUM_TOL:
            raise ValueError(f"weights sum to {state.x.sum()!r}, not 1")
        lo = state.x.min()
        if lo < dims.floor - FLOOR_TOL:
            raise ValueError(
                f"coordinate {lo!r} breaches the clipped-simplex floor {dims.floor!r}"
            )
        return state


def uniform_portfolio(dims: ProblemDims) -> PortfolioState:
    return PortfolioState(np.full(dims.n, 1.0 / dims.n))


@dataclass(frozen=True)
class LossRecord:
    """Log-loss of one round together with its gradient at the played point."""

    loss: float
    gradient: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "gradient", _frozen_array(self.gradient))


def loss_grad_arrays(x: np.ndarray, r: np.ndarray):
    """Raw-array fast path: returns ``(-log <x, r>, -r / <x, r>)``."""
    wealth = float(x @ r)
    if wealth <= 0.0:
        raise ValueError(f"nonpositive round wealth {wealth!r}: portfolio dead on this round")
    return -np.log(wealth), -r / wealth


def column_sums(mat: np.ndarray) -> np.ndarray:
    """Column sums of an (m, n) matrix with pairwise accumulation.

    ``mat.sum(axis=0)`` reduces along the strided axis, which numpy does
    with a sequential loop; over thousands of correlated terms that loses
    enough digits to stall Newton polishing at ~1e-10.  Summing the
    transposed copy runs along contiguous memory and gets the pairwise
    algorithm.
    """
    return np.ascontiguousarray(np.asarray(mat).T).sum(axis=1)


def loss_and_gradient(x: PortfolioState, r: MarketRound) -> LossRecord:
    """Per-round log-loss ``-log <x, r>`` and its gradient ``-r / <x, r>``.

    On the clipped simplex the round wealth is at least ``1/(n*t)`` (the
    best asset alone contributes the floor times 1), so the loss is at most
    ``log(n*t)`` and the gradient sup-norm at most ``n*t``.
    """
    if x.n != r.n:
        raise ValueError(f"portfolio has {x.n} assets but the round has {r.n}")
    loss, grad = loss_grad_arrays(x.x, r.r)
    return LossRecord(loss, grad)


def smooth_comparator(u_prime, dims: ProblemDims) -> PortfolioState:
    """Pull a full-simplex comparator into the clipped simplex.

    Maps ``u' -> (1 - 1/t) u' + 1/(n*t)``.  The image has every coordinate
    at least the floor and still sums to one; its total log-loss exceeds the
    original's by at most ``1/(1 - 1/t) <= 2`` over a whole horizon, so
    clipped-simplex regret statements transfer to the full simplex.
    """
    arr = np.asarray(u_prime, dtype=float)
    if arr.shape != (dims.n,):
        raise ValueError(f"comparator must have {dims.n} coordinates")
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValueError("comparator must be a nonnegative vector")
    if abs(arr.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"comparator sums to {arr.sum()!r}, not 1")
    u = (1.0 - 1.0 / dims.t) * arr + dims.floor
    return PortfolioState.checked(u, dims)


def nudge_interior(x: np.ndarray, dims: ProblemDims, mix: float = 1e-7) -> np.ndarray:
    """Mix a whisper of the uniform portfolio into `x`.

    Solver warm starts must be strictly inside the clipped simplex; a point
    returned by a previous solve can sit on the floor to machine precision.
    The mix pushes every coordinate a safe margin above the floor without
    moving the point meaningfully.
    """
    u = np.full(dims.n, 1.0 / dims.n)
    return (1.0 - mix) * np.asarray(x, dtype=float) + mix * u
