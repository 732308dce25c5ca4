"""Variational quantum classifiers with trainable and data-conditioned Hermitian observables."""

from .experiment import ExperimentConfig, run_experiment, train_one_seed
from .models import VARIANTS, build_model, model_backward, model_forward, model_step
from .qstate import AnsatzConfig, encode, forward_state

__all__ = [
    "AnsatzConfig",
    "ExperimentConfig",
    "VARIANTS",
    "build_model",
    "encode",
    "forward_state",
    "model_backward",
    "model_forward",
    "model_step",
    "run_experiment",
    "train_one_seed",
]

__version__ = "0.1.0"
