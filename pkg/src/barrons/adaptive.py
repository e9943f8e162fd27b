"""Restart controller wrapped around the barrier-regularized Newton learner.

The curvature weight ``beta`` wants to be as large as the data allows, but
how large that is depends on gradients that have not happened yet.  The
controller starts at the most optimistic value (1/2) and maintains, after
every round, a data-dependent ceiling computed from a barrier-regularized
leader of the current epoch.  The moment the ceiling drops below ``beta``,
the weight is halved and the learner restarts from scratch: uniform play,
fresh covariance, fresh rate schedule, and an empty epoch history.  Halving
can only happen a logarithmic number of times before the ceiling's floor is
reached, so restarts cost a bounded number of epochs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import BarronsState, barrons_init, barrons_step
from .domain import (
    LossRecord,
    MarketRound,
    PortfolioState,
    ProblemDims,
    column_sums,
    nudge_interior,
    uniform_portfolio,
)
from .solver import Objective, SolverConfig, minimize_over_clipped_simplex

__all__ = [
    "AdaConfig",
    "AdaState",
    "EpochBudgetError",
    "ada_init",
    "ada_step",
    "alpha",
    "default_eta",
    "epoch_budget",
    "leader_objective",
    "regularized_leader",
]

GAMMA_MAX = 1.0 / 25.0
ETA_MAX = 1.0 / 300.0


def default_eta(dims: ProblemDims) -> float:
    """Base learning rate 1 / (2048 n log(t)^2); tiny by design."""
    return 1.0 / (2048.0 * dims.n * math.log(dims.t) ** 2)


def epoch_budget(dims: ProblemDims) -> int:
    """Most epochs any run may open: ceil(log2(32 n t)) + 1.

    A restart at the end of epoch k requires the ceiling to sit below
    (1/2)^k, and the ceiling never drops under 1/(16 n t), so the epoch
    index exceeding this budget signals an implementation bug rather than
    an adversarial market.
    """
    return math.ceil(math.log2(32.0 * dims.n * dims.t)) + 1


class EpochBudgetError(RuntimeError):
    """The restart count exceeded its provable budget (implementation bug)."""


@dataclass(frozen=True)
class AdaConfig:
    """Controller parameters; `eta_base=None` means the dimension default."""

    beta_init: float = 0.5
    eta_base: Optional[float] = None
    gamma: float = GAMMA_MAX

    def resolve(self, dims: ProblemDims) -> "AdaConfig":
        eta = self.eta_base if self.eta_base is not None else default_eta(dims)
        if not (0.0 < self.beta_init <= 0.5):
            raise ValueError(f"beta_init must lie in (0, 1/2], got {self.beta_init!r}")
        if not (0.0 < self.gamma <= GAMMA_MAX):
            raise ValueError(f"gamma must lie in (0, 1/25], got {self.gamma!r}")
        if not (0.0 < eta <= min(ETA_MAX, 1.0)):
            raise ValueError(f"eta_base must lie in (0, 1/300], got {eta!r}")
        return AdaConfig(self.beta_init, eta, self.gamma)


class AdaState:
    """Mutable controller state.  Single-owner: one run, one instance.

    ``last_alpha``/``last_u`` describe the most recently completed round and
    survive a restart; ``epoch_prev_alpha`` is the ceiling of the previous
    round of the *current* epoch (None on epoch-opening rounds), kept so a
    restart can assert that the ceiling actually held one round earlier.
    """

    def __init__(self, dims: ProblemDims, cfg: AdaConfig):
        self.dims = dims
        self.cfg = cfg
        self.beta = cfg.beta_init
        self.gamma = cfg.gamma
        self.eta_base = cfg.eta_base
        self.epoch = 1
        self.global_round = 0
        self.inner: BarronsState = barrons_init(dims, self.beta, self.eta_base)
        self.rounds: list[np.ndarray] = []   # price relatives of the current epoch
        self.u: Optional[np.ndarray] = None  # current epoch leader (warm start)
        self.last_alpha: Optional[float] = None
        self.last_u: Optional[np.ndarray] = None
        self.epoch_prev_alpha: Optional[float] = None


def ada_init(dims: ProblemDims, cfg: Optional[AdaConfig] = None) -> AdaState:
    cfg = (cfg or AdaConfig()).resolve(dims)
    return AdaState(dims, cfg)


def leader_objective(rounds: np.ndarray, gamma: float) -> Objective:
    """Cumulative log-loss over `rounds` plus a barrier of weight 1/gamma."""
    r_mat = np.asarray(rounds, dtype=float)
    inv_gamma = 1.0 / gamma

    def value(u):
        return float(-np.log(r_mat @ u).sum() - inv_gamma * np.log(u).sum())

    def gradient(u):
        p = r_mat @ u
        return -column_sums(r_mat / p[:, None]) - inv_gamma / u

    def hessian(u):
        p = r_mat @ u
        scaled = r_mat / p[:, None]
        return scaled.T @ scaled + np.diag(inv_gamma / (u * u))

    def value_many(pts):
        p = pts @ r_mat.T
        return -np.log(p).sum(axis=1) - inv_gamma * np.log(pts).sum(axis=1)

    return Objective(value, gradient, hessian, value_many)


def regularized_leader(
    rounds,
    gamma: float,
    warm_start: np.ndarray,
    dims: ProblemDims,
    solver_cfg: Optional[SolverConfig] = None,
) -> PortfolioState:
    """Minimizer of epoch log-loss plus barrier over the clipped simplex.

    The barrier term keeps the leader a multiple of gamma away from the
    faces, which is what makes consecutive leaders stable round to round.
    """
    rows = [np.asarray(r, dtype=float) for r in rounds]
    if not rows:
        raise ValueError("need at least one round to fit a leader")
    r_mat = np.stack(rows)
    if r_mat.ndim != 2 or r_mat.shape[1] != dims.n:
        raise ValueError(f"rounds must be vectors of {dims.n} price relatives")
    obj = leader_objective(r_mat, gamma)
    warm = PortfolioState(nudge_interior(warm_start, dims))
    return minimize_over_clipped_simplex(obj, warm, dims, solver_cfg)


def alpha(u: np.ndarray, xs: np.ndarray, grads: np.ndarray) -> float:
    """Ceiling for the curvature weight given the epoch history.

    ``min(1/2, 1 / (8 max_s |<u - x_s, g_s>|))`` with exactly-zero inner
    products skipped: they impose no constraint.  On the clipped simplex the
    inner products are at most 2nt, so the ceiling never drops below
    1/(16 n t).
    """
    u = np.asarray(u, dtype=float)
    vals = np.abs(((u - np.asarray(xs)) * np.asarray(grads)).sum(axis=1))
    vals = vals[vals > 0.0]
    if vals.size == 0:
        return 0.5
    return min(0.5, 1.0 / (8.0 * float(vals.max())))


def ada_step(
    state: AdaState,
    rnd: MarketRound,
    solver_cfg: Optional[SolverConfig] = None,
):
    """One controller round: step the learner, refresh the ceiling, maybe restart.

    Returns ``(state, LossRecord, restarted)``.  The loss always belongs to
    the epoch that played the round; when the ceiling check fails, the step
    the learner just solved is discarded along with the rest of the epoch
    state, and the next round opens the new epoch from uniform.  The check
    runs after every round, including a round that itself opened an epoch.
    """
    state.global_round += 1
    prev_in_epoch = state.epoch_prev_alpha

    _, record = barrons_step(state.inner, rnd, solver_cfg)
    state.rounds.append(np.array(rnd.r))

    warm = state.u if state.u is not None else uniform_portfolio(state.dims).x
    leader = regularized_leader(state.rounds, state.gamma, warm, state.dims, solver_cfg)
    state.u = np.array(leader.x)
    state.last_u = state.u

    ceiling = alpha(state.u, np.stack(state.inner.xs), np.stack(state.inner.grads))
    state.last_alpha = ceiling

    restarted = state.beta > ceiling
    if restarted:
        # Had the ceiling been this low a round earlier, the restart would
        # already have fired then (beta has not changed in between).
        assert prev_in_epoch is None or state.beta <= prev_in_epoch
        if state.epoch + 1 > epoch_budget(state.dims):
            raise EpochBudgetError(
                f"epoch {state.epoch + 1} would exceed the budget {epoch_budget(state.dims)}"
            )
        state.beta *= 0.5
        state.epoch += 1
        state.inner = barrons_init(state.dims, state.beta, state.eta_base)
        state.rounds = []
        state.u = None
        state.epoch_prev_alpha = None
    else:
        state.epoch_prev_alpha = ceiling
    return state, record, restarted
