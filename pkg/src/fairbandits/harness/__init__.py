"""Experiment runner, presets and output writers."""

from fairbandits.harness.config import ExperimentConfig, NamedPolicy, config_from_dict, load_config
from fairbandits.harness.outputs import emit_outputs, render_files
from fairbandits.harness.presets import PRESETS, load_preset
from fairbandits.harness.runner import ResultBundle, derive_seed, run_cell, run_experiment

__all__ = [
    "ExperimentConfig",
    "NamedPolicy",
    "config_from_dict",
    "load_config",
    "emit_outputs",
    "render_files",
    "PRESETS",
    "load_preset",
    "ResultBundle",
    "derive_seed",
    "run_cell",
    "run_experiment",
]
