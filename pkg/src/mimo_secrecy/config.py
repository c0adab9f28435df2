"""Scenario configuration, validation, path-loss model and derived scalars.

All powers are linear scale internally; dB values are converted exactly once
when a config file is parsed.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np


class ConfigError(ValueError):
    """A scenario parameter violates one of the model constraints."""


class Training(enum.Enum):
    PERFECT = "perfect"
    PILOT_CONTAMINATION = "contaminated"


class AnMethod(enum.Enum):
    NULL_SPACE = "null"
    RANDOM = "random"


@dataclass(frozen=True)
class SystemConfig:
    """User-set scenario parameters. Immutable; safe to share across tasks."""

    M: int                      # number of cells
    N_t: int                    # BS antennas
    N_e: int                    # eavesdropper antennas
    K: int                      # mobile terminals per cell
    rho: float                  # inter-cell factor in [0, 1]
    P: float                    # total transmit power, linear
    phi: float                  # power allocation factor in (0, 1]
    p_tau: float = 1.0          # pilot power, linear
    tau: int = 10               # pilot sequence length
    T_coh: int = 100            # coherence interval length (symbols)
    training: Training = Training.PERFECT
    an_method: AnMethod = AnMethod.NULL_SPACE
    sigma_mt_sq: float = 1.0    # MT noise variance


@dataclass(frozen=True)
class DerivedParams:
    """Shorthand scalars used throughout the analysis."""

    a: float        # 1 + rho*(M-1)
    b: float        # (M-1)*rho + 1/P
    c: float        # 1 + rho^2*(M-1)
    zeta: float     # a*beta/alpha - beta*c/(a*(1-beta))
    lam: float      # p_tau*tau / (1 + p_tau*tau*a), channel-estimate quality
    eta: float      # q/p
    alpha: float    # N_e/N_t
    beta: float     # K/N_t
    p: float        # per-user signal power phi*P/K
    q: float        # per-stream AN power (1-phi)*P/(N_t-K)


class PathLossMode(enum.Enum):
    SIMPLIFIED = "simplified"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class PathLossModel:
    """Path losses between every BS and the local-cell users / eavesdropper.

    l_user[m, k] is the loss between BS m and the k-th local user; l_eve[m]
    between BS m and the eavesdropper. Cell index 0 is the local cell.
    """

    mode: PathLossMode
    l_user: np.ndarray      # shape (M, K)
    l_eve: np.ndarray       # shape (M,)

    def __post_init__(self):
        object.__setattr__(self, "l_user", np.asarray(self.l_user, dtype=float))
        object.__setattr__(self, "l_eve", np.asarray(self.l_eve, dtype=float))


def validate_config(cfg: SystemConfig) -> SystemConfig:
    """Return cfg unchanged if every invariant holds, else raise ConfigError."""
    if cfg.M < 1:
        raise ConfigError("M must be a positive integer")
    if cfg.N_t < 1 or cfg.N_e < 1 or cfg.K < 1:
        raise ConfigError("N_t, N_e and K must be positive integers")
    if cfg.K >= cfg.N_t:
        raise ConfigError("K must be < N_t (no degrees of freedom left for AN)")
    if not 0.0 <= cfg.rho <= 1.0:
        raise ConfigError("rho must lie in [0, 1]")
    if not 0.0 < cfg.phi <= 1.0:
        raise ConfigError("phi must lie in (0, 1]")
    if cfg.P <= 0:
        raise ConfigError("P must be positive")
    if cfg.p_tau <= 0:
        raise ConfigError("p_tau must be positive")
    if cfg.tau < 1:
        raise ConfigError("tau must be a positive integer")
    if cfg.T_coh < 1:
        raise ConfigError("coherence interval must be a positive integer")
    if cfg.sigma_mt_sq <= 0:
        raise ConfigError("sigma_mt_sq must be positive")
    if cfg.training is Training.PILOT_CONTAMINATION and cfg.tau < cfg.K:
        raise ConfigError("tau >= K required under pilot contamination")
    return cfg


def derive_params(cfg: SystemConfig) -> DerivedParams:
    """Compute all derived scalars for a validated config (pure function)."""
    M, rho, P = cfg.M, cfg.rho, cfg.P
    a = 1.0 + rho * (M - 1)
    b = (M - 1) * rho + 1.0 / P
    c = 1.0 + rho ** 2 * (M - 1)
    alpha = cfg.N_e / cfg.N_t
    beta = cfg.K / cfg.N_t
    p = cfg.phi * P / cfg.K
    q = (1.0 - cfg.phi) * P / (cfg.N_t - cfg.K)
    eta = q / p
    pt = cfg.p_tau * cfg.tau
    lam = pt / (1.0 + pt * a)
    zeta = a * beta / alpha - beta * c / (a * (1.0 - beta))
    return DerivedParams(a=a, b=b, c=c, zeta=zeta, lam=lam, eta=eta,
                         alpha=alpha, beta=beta, p=p, q=q)


def build_path_loss(cfg: SystemConfig,
                    l_user: np.ndarray | None = None,
                    l_eve: np.ndarray | None = None) -> PathLossModel:
    """Simplified model (1 locally, rho elsewhere) or caller-supplied matrices."""
    if l_user is None and l_eve is None:
        l_u = np.full((cfg.M, cfg.K), cfg.rho)
        l_u[0, :] = 1.0
        l_e = np.full(cfg.M, cfg.rho)
        l_e[0] = 1.0
        return PathLossModel(PathLossMode.SIMPLIFIED, l_u, l_e)
    l_u = np.asarray(l_user, dtype=float)
    if l_u.shape != (cfg.M, cfg.K):
        raise ConfigError(f"explicit l_user must have shape ({cfg.M}, {cfg.K})")
    if l_eve is None:
        l_e = np.full(cfg.M, cfg.rho)
        l_e[0] = 1.0
    else:
        l_e = np.asarray(l_eve, dtype=float)
        if l_e.shape != (cfg.M,):
            raise ConfigError(f"explicit l_eve must have shape ({cfg.M},)")
    if np.any(l_u < 0) or np.any(l_u > 1) or np.any(l_e < 0) or np.any(l_e > 1):
        raise ConfigError("path-loss entries must lie in [0, 1]")
    return PathLossModel(PathLossMode.EXPLICIT, l_u, l_e)


def db_to_linear(x_db: float) -> float:
    return 10.0 ** (x_db / 10.0)


_CONFIG_KEYS = {
    "cells", "bs_antennas", "eve_antennas", "users", "rho", "power_db", "phi",
    "pilot_power_db", "pilot_length", "coherence", "training", "an_method",
    "trials", "seed",
}


@dataclass(frozen=True)
class RunSettings:
    """Config-file extras that are not scenario physics."""

    trials: int = 3000
    seed: int = 0


def parse_config_file(path) -> tuple[SystemConfig, RunSettings]:
    """Read a flat `key = value` config file with # comments."""
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _CONFIG_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
            if key in values:
                raise ConfigError(f"{path}:{lineno}: duplicate key '{key}'")
            values[key] = val

    def need(key):
        if key not in values:
            raise ConfigError(f"{path}: missing required key '{key}'")
        return values[key]

    def geti(key, default=None):
        val = values.get(key)
        if val is None:
            if default is None:
                need(key)
            return default
        try:
            return int(val)
        except ValueError:
            raise ConfigError(f"{path}: key '{key}' must be an integer") from None

    def getf(key, default=None):
        val = values.get(key)
        if val is None:
            if default is None:
                need(key)
            return default
        try:
            return float(val)
        except ValueError:
            raise ConfigError(f"{path}: key '{key}' must be a number") from None

    training_s = values.get("training", "perfect")
    try:
        training = Training(training_s)
    except ValueError:
        raise ConfigError(f"{path}: training must be 'perfect' or 'contaminated'") from None
    an_s = values.get("an_method", "null")
    try:
        an_method = AnMethod(an_s)
    except ValueError:
        raise ConfigError(f"{path}: an_method must be 'null' or 'random'") from None

    cfg = SystemConfig(
        M=geti("cells"),
        N_t=geti("bs_antennas"),
        N_e=geti("eve_antennas"),
        K=geti("users"),
        rho=getf("rho"),
        P=db_to_linear(getf("power_db")),
        phi=getf("phi"),
        p_tau=db_to_linear(getf("pilot_power_db", 0.0)),
        tau=geti("pilot_length", geti("users")),
        T_coh=geti("coherence", 100),
        training=training,
        an_method=an_method,
    )
    settings = RunSettings(trials=geti("trials", 3000), seed=geti("seed", 0))
    return validate_config(cfg), settings


def with_params(cfg: SystemConfig, **kwargs) -> SystemConfig:
    """Return a validated copy of cfg with fields replaced."""
    return validate_config(replace(cfg, **kwargs))
