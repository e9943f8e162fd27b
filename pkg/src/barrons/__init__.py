"""Online portfolio selection with barrier-regularized online Newton steps."""

from .adaptive import (
    AdaConfig,
    AdaState,
    EpochBudgetError,
    ada_init,
    ada_step,
    alpha,
    default_eta,
    epoch_budget,
    leader_objective,
    regularized_leader,
)
from .baselines import (
    EgLearner,
    OgdLearner,
    OnsLearner,
    SoftBayesLearner,
    UpGridLearner,
    best_crp,
    eg_step,
    ogd_step,
    ons_objective,
    project_simplex,
    soft_bayes_step,
    universal_portfolio_grid,
)
from .core import (
    BarronsState,
    barrons_init,
    barrons_step,
    bregman_divergence,
    omd_step_objective,
)
from .domain import (
    LossRecord,
    MarketRound,
    PortfolioState,
    ProblemDims,
    loss_and_gradient,
    loss_grad_arrays,
    normalize_round,
    smooth_comparator,
    uniform_portfolio,
)
from .harness import (
    ExperimentResult,
    growth_ratios,
    load_trace,
    run_experiment,
    run_market,
    save_trace,
    sweep,
    verify_trace,
    write_sweep_csv,
    write_sweep_json,
)
from .markets import MARKET_KINDS, MarketSpec, generate, load_csv, write_csv
from .solver import (
    Objective,
    SolveDiagnostics,
    SolverConfig,
    SolverFailure,
    grid_search_oracle,
    minimize_over_clipped_simplex,
)

__version__ = "0.1.0"

__all__ = [
    "AdaConfig",
    "AdaState",
    "BarronsState",
    "EgLearner",
    "EpochBudgetError",
    "ExperimentResult",
    "LossRecord",
    "MARKET_KINDS",
    "MarketRound",
    "MarketSpec",
    "Objective",
    "OgdLearner",
    "OnsLearner",
    "PortfolioState",
    "ProblemDims",
    "SoftBayesLearner",
    "SolveDiagnostics",
    "SolverConfig",
    "SolverFailure",
    "UpGridLearner",
    "ada_init",
    "ada_step",
    "alpha",
    "barrons_init",
    "barrons_step",
    "best_crp",
    "bregman_divergence",
    "default_eta",
    "eg_step",
    "epoch_budget",
    "generate",
    "grid_search_oracle",
    "growth_ratios",
    "leader_objective",
    "load_csv",
    "load_trace",
    "loss_and_gradient",
    "loss_grad_arrays",
    "minimize_over_clipped_simplex",
    "normalize_round",
    "ogd_step",
    "omd_step_objective",
    "ons_objective",
    "project_simplex",
    "regularized_leader",
    "run_experiment",
    "run_market",
    "save_trace",
    "smooth_comparator",
    "soft_bayes_step",
    "sweep",
    "uniform_portfolio",
    "universal_portfolio_grid",
    "verify_trace",
    "write_csv",
    "write_sweep_csv",
    "write_sweep_json",
]
