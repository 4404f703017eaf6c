"""Experiment harness: configs, suites, metric files and the CLI."""

from .config import RunConfig, dump_config, parse_config, parse_config_text
from .experiments import (
    FStarCertificate,
    compute_f_star,
    run_experiment,
    run_fw_weight_reg,
    run_lemma_mc,
    run_momentum_audit,
    run_noise_analysis,
    run_spike_robustness,
)
from .metrics import ExperimentResult, MetricRecord, emit_metrics, validate_metrics_csv
