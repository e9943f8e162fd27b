"""Barrier-regularized online Newton steps with increasing per-coordinate rates.

One mirror-descent step per round.  The regularizer mixes a quadratic built
from the running gradient covariance (weight ``beta``) with per-coordinate
log-barriers whose learning rates start at ``eta_base`` and only ever grow:
a coordinate that has visited small values earns a faster rate, up to a
factor of ``e``.  Rates are a deterministic function of the points played,
so the schedule can be audited from a trace after the fact.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .domain import (
    LossRecord,
    MarketRound,
    PortfolioState,
    ProblemDims,
    loss_grad_arrays,
    nudge_interior,
    uniform_portfolio,
)
from .solver import Objective, SolveDiagnostics, SolverConfig, minimize_over_clipped_simplex

__all__ = [
    "BarronsState",
    "barrons_init",
    "barrons_step",
    "bregman_divergence",
    "omd_step_objective",
]


class BarronsState:
    """Mutable learner state for one epoch.  Single-owner: one run, one instance.

    Fields
    ------
    t         epoch-round index of the next round to be played (starts at 1)
    x         current play, a point of the clipped simplex
    cov       n*I plus the sum of outer products of observed gradients
    log_max   running max of log_t(1 / (n * x_s,i)) over played points
    eta       current per-coordinate learning rates, eta_base * exp(log_max)
    xs, grads played points and their gradients, oldest first
    """

    def __init__(self, dims: ProblemDims, beta: float, eta_base: float):
        self.dims = dims
        self.beta = float(beta)
        self.eta_base = float(eta_base)
        self.t = 1
        self.x = uniform_portfolio(dims).x.copy()
        self.cov = float(dims.n) * np.eye(dims.n)
        self.log_max = np.zeros(dims.n)
        self.eta = np.full(dims.n, self.eta_base)
        self.xs: list[np.ndarray] = []
        self.grads: list[np.ndarray] = []


def barrons_init(dims: ProblemDims, beta: float, eta_base: float) -> BarronsState:
    """Fresh state: uniform play, covariance n*I, all rates at eta_base."""
    if not (0.0 < beta <= 0.5):
        raise ValueError(f"beta must lie in (0, 1/2], got {beta!r}")
    if not (0.0 < eta_base <= 1.0):
        raise ValueError(f"eta_base must lie in (0, 1], got {eta_base!r}")
    return BarronsState(dims, beta, eta_base)


def omd_step_objective(
    grad_t: np.ndarray,
    cov: np.ndarray,
    x_prev: np.ndarray,
    beta: float,
    eta: np.ndarray,
) -> Objective:
    """Linearized loss plus divergence from the previous play.

    Written in displacement form (value 0 at ``x_prev``): additive constants
    do not move the argmin, and evaluating ``z - log1p(z)`` on the relative
    displacement ``z = (x - x_prev)/x_prev`` keeps line-search comparisons
    meaningful when the rates 1/eta are large and steps are tiny.
    """
    inv_eta = 1.0 / eta

    def value(x):
        d = x - x_prev
        z = d / x_prev
        return float(grad_t @ d + 0.5 * beta * (d @ cov @ d) + inv_eta @ (z - np.log1p(z)))

    def gradient(x):
        d = x - x_prev
        return grad_t + beta * (cov @ d) + inv_eta * d / (x * x_prev)

    def hessian(x):
        return beta * cov + np.diag(inv_eta / (x * x))

    def value_many(pts):
        d = pts - x_prev
        z = d / x_prev
        quad = 0.5 * beta * np.einsum("ij,jk,ik->i", d, cov, d)
        return d @ grad_t + quad + (z - np.log1p(z)) @ inv_eta

    return Objective(value, gradient, hessian, value_many)


def barrons_step(
    state: BarronsState,
    rnd: MarketRound,
    solver_cfg: Optional[SolverConfig] = None,
    diagnostics: Optional[SolveDiagnostics] = None,
):
    """Play the stored point against one round and advance the state.

    Order matters and is observable: the loss is charged at the current
    play; the covariance and the rate schedule absorb the current round
    before the step is solved, so the step already uses this round's
    curvature and rates.  Returns ``(state, LossRecord)`` with the state
    mutated in place.
    """
    dims = state.dims
    r = rnd.r
    if r.size != dims.n:
        raise ValueError(f"round has {r.size} assets, expected {dims.n}")
    assert r.max() == 1.0, "round must be normalized before stepping"

    x_t = state.x
    loss, grad = loss_grad_arrays(x_t, r)

    state.cov = state.cov + np.outer(grad, grad)
    state.log_max = np.maximum(state.log_max, np.log(1.0 / (dims.n * x_t)) / np.log(dims.t))
    state.eta = state.eta_base * np.exp(state.log_max)

    obj = omd_step_objective(grad, state.cov, x_t, state.beta, state.eta)
    warm = PortfolioState(nudge_interior(x_t, dims))
    x_next = minimize_over_clipped_simplex(obj, warm, dims, solver_cfg, diagnostics)

    state.xs.append(x_t)
    state.grads.append(grad)
    state.x = np.array(x_next.x)
    state.t += 1
    return state, LossRecord(loss, grad)


def bregman_divergence(
    x: np.ndarray,
    y: np.ndarray,
    cov: np.ndarray,
    beta: float,
    eta: np.ndarray,
) -> float:
    """Divergence of the mixed quadratic/log-barrier regularizer.

    Equals ``beta/2 (x-y)' cov (x-y) + sum_i (1/eta_i) h(x_i/y_i)`` with
    ``h(z) = z - 1 - log z``.  Nonnegative, zero iff ``x == y`` (for
    positive definite ``cov``; the barrier part alone is already zero only
    at equal points).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0.0) or np.any(y <= 0.0):
        raise ValueError("divergence needs strictly positive coordinates")
    d = x - y
    z = d / y
    quad = 0.5 * beta * float(d @ np.asarray(cov) @ d)
    return quad + float((1.0 / np.asarray(eta)) @ (z - np.log1p(z)))
