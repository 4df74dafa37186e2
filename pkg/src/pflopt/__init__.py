"""Personalized federated learning optimization workbench.

A numpy/scipy library implementing the unified personalized-FL objective
``F(w, beta) = (1/M) sum_m f_m(w, beta_m)`` with six objective families,
analytic smoothness constants, six optimizers (local SGD plus accelerated
coordinate and variance-reduced coordinate methods) with closed-form
hyperparameter rules, synthetic data generators, a simulated multi-client
experiment harness, and independent verification oracles.
"""

from .datagen import SynthConfig, gen_mixture, gen_weightshare, load_csv
from .harness import ExperimentConfig, preset, run_experiment
from .model import (ClientShard, FederatedDataset, GroundTruth,
                    PartitionedModel, SmoothnessProfile, axpy_model, flatten,
                    unflatten)
from .objectives import (LogisticBase, ObjectiveSpec, QuadraticBase,
                         estimate_mu_prime, eval_loss, grad_full, grad_sample,
                         smoothness_profile)
from .optimizers import (OptimizerConfig, StepSchedule, acd_params,
                         asvrcd_params, build_optimizer, lsgd_stepsize_bound)
from .rng import RngStream
from .telemetry import (RunRecord, aggregate, estimation_error, run_optimizer,
                        zeta_star_sq)
from .verify import fd_gradient, hessian_block_norm, reference_solve

__all__ = [
    "SynthConfig", "gen_mixture", "gen_weightshare", "load_csv",
    "ExperimentConfig", "preset", "run_experiment",
    "ClientShard", "FederatedDataset", "GroundTruth", "PartitionedModel",
    "SmoothnessProfile", "axpy_model", "flatten", "unflatten",
    "LogisticBase", "ObjectiveSpec", "QuadraticBase", "estimate_mu_prime",
    "eval_loss", "grad_full", "grad_sample", "smoothness_profile",
    "OptimizerConfig", "StepSchedule", "acd_params", "asvrcd_params",
    "build_optimizer", "lsgd_stepsize_bound",
    "RngStream", "RunRecord", "aggregate", "estimation_error", "run_optimizer",
    "zeta_star_sq",
    "fd_gradient", "hessian_block_norm", "reference_solve",
]

__version__ = "0.1.0"
