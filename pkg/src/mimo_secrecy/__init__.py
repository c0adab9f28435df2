"""Secrecy analysis of AN-aided multi-cell massive MIMO downlinks.

Closed-form bounds live in :mod:`mimo_secrecy.closedform`; the independent
simulation oracle in :mod:`mimo_secrecy.montecarlo`; the command line in
:mod:`mimo_secrecy.cli`.
"""

from .config import (AnMethod, ConfigError, DerivedParams, PathLossModel,
                     SystemConfig, Training, build_path_loss, derive_params,
                     parse_config_file, validate_config, with_params)

__all__ = [
    "AnMethod", "ConfigError", "DerivedParams", "PathLossModel",
    "SystemConfig", "Training", "build_path_loss", "derive_params",
    "parse_config_file", "validate_config", "with_params",
]

__version__ = "0.1.0"
