"""Multi-fidelity Bayesian optimization with deep Gaussian process surrogates.

The package stacks exact GP layers into a sequentially composed deep GP
over a discrete fidelity ladder, and drives a cost-aware UCB loop that
decides both where to evaluate next and at which fidelity. Synthetic
benchmarks and a coiled-tube reactor proxy (tracer transport plus
tanks-in-series scoring) are included as pluggable objectives.
"""

from .acquisition import acquisition_base_draws, solve_ucb, ucb_values
from .campaign import (
    CampaignState,
    CostModel,
    EvaluationRecord,
    UCBConfig,
    argmax_highest,
    continue_run,
    fidelity_scores,
    initial_design,
    recommend,
    run,
    run_single_fidelity,
    select_fidelity,
    update_costs,
)
from .dgp import (
    DGPTrainConfig,
    FidelityLevel,
    LevelTrace,
    MFDeepGP,
    MultiFidelityDataset,
    default_ladder,
    ladder_from_nominals,
    load_checkpoint,
    predict_all_levels,
    predict_level,
    predict_level_many,
    propagate,
    save_checkpoint,
    train,
)
from .gp import (
    GPDataset,
    TrainedGP,
    fit,
    log_marginal_likelihood,
    posterior_covariance,
    predict,
    sample_posterior,
)
from .kernels import KernelSpec, kernel_eval, kernel_matrix
from .space import DesignSpace

__version__ = "0.1.0"
