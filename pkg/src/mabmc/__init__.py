"""Samplers for posteriors with intractable normalizing constants.

Five Markov chain algorithms over a common Model interface: plain
Metropolis-Hastings (MH, when the likelihood is tractable), joint-space
pseudo-marginal (PMC), the modified pseudo-marginal and single-variable
exchange samplers with randomized acceptance ratios (MPMC, SVE), and the
multi-armed-bandit combination (MABMC) that picks between the two randomized
ratios each iteration with a symmetric decision rule.  Finite built-in models
come with an exact enumeration oracle that certifies detailed balance and
every transition probability in rational arithmetic.
"""

from .estimators import (
    RatioDraw,
    deterministic_log_ratio_part,
    draw_mpmc_ratio,
    draw_sve_ratio,
    empirical_relative_error,
    pearson_chi_square,
)
from .model import FiniteModel, Model
from .models import GaussianModel, IsingModel, build_toy_1, build_toy_2
from .rng import RandomStream
from .samplers import (
    ChainState,
    ChainTrace,
    DecisionRule,
    IterationRecord,
    constant_rule,
    decide,
    invalid_max_rule,
    max_min_rule,
    run_chain,
    step_mabmc,
    step_mh,
    step_mpmc,
    step_pmc_joint,
    step_sve,
)

__all__ = [
    "ChainState",
    "ChainTrace",
    "DecisionRule",
    "FiniteModel",
    "GaussianModel",
    "IsingModel",
    "IterationRecord",
    "Model",
    "RandomStream",
    "RatioDraw",
    "build_toy_1",
    "build_toy_2",
    "constant_rule",
    "decide",
    "deterministic_log_ratio_part",
    "draw_mpmc_ratio",
    "draw_sve_ratio",
    "empirical_relative_error",
    "invalid_max_rule",
    "max_min_rule",
    "pearson_chi_square",
    "run_chain",
    "step_mabmc",
    "step_mh",
    "step_mpmc",
    "step_pmc_joint",
    "step_sve",
]

__version__ = "0.1.0"
