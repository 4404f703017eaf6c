"""Spectral clipping operators, clipped optimizers and Frank-Wolfe tools."""

from . import errors, frank_wolfe, linalg, optimizers, schedules, synthetic
from .frank_wolfe import (
    FwParams,
    RegularizerSpec,
    SpectralBall,
    cfw_run,
    equivalence_check,
    fw_params_from_problem,
    momentum_coefficient_audit,
)
from .linalg import (
    global_clip,
    matrix_inverse_sqrt,
    soft_spectral_clip,
    spectral_clip_exact,
    subspace_distance,
)
from .optimizers import BaseOptimizerSpec, OptimizerState, SpectraConfig, spectra_step
from .synthetic import LogisticProblem, gen_weight_reg_dataset

__version__ = "0.1.0"
