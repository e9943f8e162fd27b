"""Newton barrier solver for strictly convex minimization over the clipped simplex.

Feasible set: ``sum(x) == 1`` and ``x_i >= 1/(n*t)``.  The equality
constraint is kept exact by stepping inside the zero-sum subspace; the
coordinate floor is handled with a path-following log-barrier so minimizers
are allowed to sit on the floor (the barrier weight is driven down to
``min_barrier_mu``, which parks face-active coordinates within ~1e-12 of it).

Callers supply the objective as value/gradient/Hessian closures.  The
Hessian must be positive definite on the interior; every target objective in
this package (mirror-descent steps, regularized leaders, best-CRP fits) is
strictly convex there.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .domain import ProblemDims, PortfolioState, SUM_TOL

__all__ = [
    "Objective",
    "SolverConfig",
    "SolverFailure",
    "SolveDiagnostics",
    "minimize_over_clipped_simplex",
    "grid_search_oracle",
]

_ARMIJO = 1e-4
_BACKTRACK = 0.5
_BOUNDARY_FRACTION = 0.99


@dataclass
class Objective:
    """Smooth strictly convex function given by closures.

    `evaluate_many` is optional: a vectorized value oracle over an (m, n)
    array of points, used only by the grid search.  When provided it must
    agree with `evaluate` row by row.
    """

    evaluate: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    hessian: Callable[[np.ndarray], np.ndarray]
    evaluate_many: Optional[Callable[[np.ndarray], np.ndarray]] = None


@dataclass(frozen=True)
class SolverConfig:
    kkt_tol: float = 1e-10
    max_newton_iters: int = 100
    barrier_mu_init: float = 1.0
    barrier_shrink: float = 0.1
    min_barrier_mu: float = 1e-12

    def __post_init__(self):
        if self.kkt_tol <= 0:
            raise ValueError("kkt_tol must be positive")
        if self.max_newton_iters < 1:
            raise ValueError("max_newton_iters must be at least 1")
        if self.barrier_mu_init <= 0 or self.min_barrier_mu <= 0:
            raise ValueError("barrier weights must be positive")
        if not (0.0 < self.barrier_shrink < 1.0):
            raise ValueError("barrier_shrink must lie in (0, 1)")
        if self.min_barrier_mu > self.barrier_mu_init:
            raise ValueError("min_barrier_mu cannot exceed barrier_mu_init")


class SolverFailure(RuntimeError):
    """Raised when a barrier stage cannot be driven to tolerance.

    Carries the last iterate and its first-order residual so the caller can
    decide whether the partial answer is acceptable.
    """

    def __init__(self, message: str, last_iterate: np.ndarray, residual: float, mu: float):
        super().__init__(f"{message} (mu={mu:g}, residual={residual:.3e})")
        self.last_iterate = np.array(last_iterate, dtype=float)
        self.residual = float(residual)
        self.mu = float(mu)


@dataclass
class SolveDiagnostics:
    """Optional per-solve instrumentation (iteration counts, stage descent)."""

    newton_iters: int = 0
    stages: list = field(default_factory=list)  # dicts: mu, iters, residual, phi


def _null_basis(n: int) -> np.ndarray:
    # Columns span the zero-sum subspace, so steps preserve sum(x) exactly.
    z = np.zeros((n, n - 1))
    z[: n - 1, :] = np.eye(n - 1)
    z[n - 1, :] = -1.0
    return z


def _stage_residual(obj, s, floor, mu):
    g = obj.gradient(floor + s) - mu / s
    resid = g - g.mean()
    return g, float(np.linalg.norm(resid))


def _center(obj, s, floor, mu, tol, cfg, basis, diag):
    """Newton iterations for one barrier stage.  Returns the centered slacks.

    Iterates on the slack vector ``s = x - floor`` rather than on x: when a
    minimizer sits on the floor, its distance to the wall shrinks to ~mu and
    would only be resolved to one ulp of x itself, while s carries it at
    full precision.  The objective still sees ``floor + s``; only the
    barrier term needs the fine detail.
    """
    stage = {"mu": mu, "iters": 0, "residual": np.inf, "phi": []}
    resid_norm = np.inf
    pin = 0.0
    for _ in range(cfg.max_newton_iters):
        g, resid_norm = _stage_residual(obj, s, floor, mu)
        if resid_norm <= tol:
            break

        h_obj = obj.hessian(floor + s)
        # Smallest residual doubles can express here: moving any coordinate
        # by one ulp jolts the gradient by curvature * ulp.  Objectives with
        # 1/eta ~ 1e5 barrier curvature pin this above kkt_tol, and no
        # representable iterate does better.
        pin = float(np.max(
            np.abs(np.diagonal(h_obj)) * np.spacing(np.abs(floor + s))
            + (mu / s**2) * np.spacing(s)
        ))
        if resid_norm <= max(tol, 4.0 * pin):
            break

        h = h_obj + np.diag(mu / s**2)
        hz = basis.T @ h @ basis
        rhs = -(basis.T @ g)
        try:
            y = np.linalg.solve(hz, rhs)
        except np.linalg.LinAlgError:
            y = None
        if y is None or not np.all(np.isfinite(y)):
            ridge = 1e-10 * max(1.0, float(np.trace(hz)) / hz.shape[0])
            y = np.linalg.solve(hz + ridge * np.eye(hz.shape[0]), rhs)
        ds = basis @ y
        slope = float(g @ ds)
        if slope >= 0.0:
            # Numerically indefinite reduced Hessian; fall back to steepest
            # descent inside the subspace.
            ds = -(g - g.mean())
            slope = float(g @ ds)
            if slope >= 0.0:
                break

        step = 1.0
        shrinking = ds < 0.0
        if np.any(shrinking):
            step = min(1.0, _BOUNDARY_FRACTION * float(np.min(s[shrinking] / -ds[shrinking])))

        phi0 = float(obj.evaluate(floor + s)) - mu * float(np.log(s).sum())
        # Comparisons below float noise carry no information; near the
        # optimum the predicted decrease sinks under roundoff of phi itself.
        noise = 1e-12 * (1.0 + abs(phi0))
        accepted = False
        while step > 1e-16:
            sn = s + step * ds
            if np.array_equal(sn, s):
                # The step rounds away entirely; shorter ones will too.
                break
            if sn.min() > 0.0:
                phin = float(obj.evaluate(floor + sn)) - mu * float(np.log(sn).sum())
                if phin <= phi0 + _ARMIJO * step * slope + noise:
                    accepted = True
                    break
            step *= _BACKTRACK
        if not accepted:
            # No measurable progress left at this floating-point scale.
            if resid_norm <= max(10.0 * cfg.kkt_tol, tol, 4.0 * pin):
                break
            raise SolverFailure("line search stalled", floor + s, resid_norm, mu)

        s = sn
        stage["iters"] += 1
        stage["phi"].append(phin)
        if diag is not None:
            diag.newton_iters += 1
    else:
        _, resid_norm = _stage_residual(obj, s, floor, mu)
        if resid_norm > max(tol, 4.0 * pin):
            raise SolverFailure("newton iteration budget exhausted", floor + s, resid_norm, mu)

    stage["residual"] = resid_norm
    if diag is not None:
        diag.stages.append(stage)
    return s


def _first_barrier_weight(obj, s, floor, dims, cfg) -> float:
    """Complementarity estimate at the warm start.

    Scales the first barrier weight to how far the warm start is from
    satisfying first-order conditions: a stale start walks the full barrier
    path, while re-solving from a returned optimum jumps straight to the
    final stage (and therefore terminates in a couple of Newton steps).
    """
    g = obj.gradient(floor + s)
    lam = g - g.min()
    lam[lam < 10.0 * cfg.kkt_tol] = 0.0
    comp = float(lam @ s)
    return min(cfg.barrier_mu_init, max(comp / dims.n, cfg.min_barrier_mu))


def minimize_over_clipped_simplex(
    obj: Objective,
    warm_start: PortfolioState,
    dims: ProblemDims,
    cfg: SolverConfig | None = None,
    diagnostics: SolveDiagnostics | None = None,
) -> PortfolioState:
    """Minimize a strictly convex objective over the clipped simplex.

    The warm start must be strictly feasible: summing to one with every
    coordinate strictly above the floor.  Raises SolverFailure when a
    barrier stage exhausts its Newton budget.
    """
    if cfg is None:
        cfg = SolverConfig()
    floor = dims.floor
    x = np.array(getattr(warm_start, "x", warm_start), dtype=float)
    if x.shape != (dims.n,):
        raise ValueError(f"warm start must have {dims.n} coordinates")
    if abs(x.sum() - 1.0) > SUM_TOL:
        raise ValueError(f"warm start sums to {x.sum()!r}, not 1")
    if x.min() <= floor:
        raise ValueError("warm start must be strictly above the clipped-simplex floor")

    basis = _null_basis(dims.n)
    s = x - floor
    mu = _first_barrier_weight(obj, s, floor, dims, cfg)
    while True:
        final = mu <= cfg.min_barrier_mu
        tol = cfg.kkt_tol if final else max(cfg.kkt_tol, 1e-3 * mu)
        s = _center(obj, s, floor, mu, tol, cfg, basis, diagnostics)
        if final:
            break
        mu = max(mu * cfg.barrier_shrink, cfg.min_barrier_mu)

    x = floor + s
    x = x / x.sum()
    return PortfolioState.checked(x, dims)


def _batch_values(obj: Objective, points: np.ndarray) -> np.ndarray:
    if obj.evaluate_many is not None:
        return np.asarray(obj.evaluate_many(points), dtype=float)
    return np.array([obj.evaluate(row) for row in points], dtype=float)


def _axis(lo: float, hi: float, step: float) -> np.ndarray:
    count = int(np.floor((hi - lo) / step + 1e-12))
    return lo + step * np.arange(count + 1)


def _sweep_n2(obj, floor, step):
    a = _axis(floor, 1.0 - floor, step)
    pts = np.column_stack([a, 1.0 - a])
    vals = _batch_values(obj, pts)
    return pts[int(np.argmin(vals))]


def _sweep_n3(obj, floor, step, box=None):
    lo1, hi1 = floor, 1.0 - 2.0 * floor
    lo2, hi2 = floor, 1.0 - 2.0 * floor
    if box is not None:
        (c1, c2), w = box
        lo1, hi1 = max(lo1, c1 - w), min(hi1, c1 + w)
        lo2, hi2 = max(lo2, c2 - w), min(hi2, c2 + w)
    a1 = _axis(lo1, hi1, step)
    a2 = _axis(lo2, hi2, step)
    g1, g2 = np.meshgrid(a1, a2, indexing="ij")
    g3 = 1.0 - g1 - g2
    keep = g3 >= floor - 1e-15
    pts = np.column_stack([g1[keep], g2[keep], g3[keep]])
    if pts.size == 0:
        raise ValueError("grid resolution too coarse for this simplex")
    vals = _batch_values(obj, pts)
    return pts[int(np.argmin(vals))]


def grid_search_oracle(obj: Objective, dims: ProblemDims, resolution: float) -> PortfolioState:
    """Grid minimizer over the clipped simplex, independent of the Newton path.

    Two assets: one exhaustive sweep of the whole segment at the requested
    resolution.  Three assets: an exhaustive coarse sweep followed by boxed
    re-sweeps shrinking to the requested resolution; strict convexity keeps
    the true optimum inside a tightening neighborhood of the incumbent, and
    the generous box (25 parent cells) absorbs valley anisotropy.  Lattices
    are anchored at the floor so face-active optima are represented exactly.
    """
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    if dims.n == 2:
        best = _sweep_n2(obj, dims.floor, resolution)
    elif dims.n == 3:
        step = max(resolution, 2e-3)
        best = _sweep_n3(obj, dims.floor, step)
        while step > resolution:
            nxt = max(step / 5.0, resolution)
            best = _sweep_n3(obj, dims.floor, nxt, box=((best[0], best[1]), 25.0 * step))
            step = nxt
    else:
        raise ValueError("grid oracle supports 2 or 3 assets only")
    return PortfolioState.checked(best, dims)
