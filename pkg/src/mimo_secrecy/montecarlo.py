"""Monte-Carlo oracle for the closed-form analysis.

Simulates the full multi-cell downlink: channel draws, pilot-based MMSE
estimation (or genie CSI), matched-filter precoding, null-space or random
AN shaping, and the eavesdropper's MMSE combiner. Every quantity the
closed forms predict (user rate, eavesdropper SINR/capacity, secrecy rate,
outage) has an estimator here that shares no code with the predictions.

Reproducibility: trial t of a run with seed s uses the dedicated substream
``np.random.default_rng([s, t])``, so results are independent of execution
order and chunking.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr

from .config import (AnMethod, PathLossModel, SystemConfig, Training,
                     build_path_loss, derive_params)

log = logging.getLogger(__name__)

_COND_LIMIT = 1e12
_MAX_RETRIES = 10


class SingularNoiseError(ArithmeticError):
    """AN covariance at the eavesdropper stayed ill-conditioned after retries."""


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    trials: int
    seed: int


@dataclass(frozen=True)
class ChannelRealization:
    """One coherence block of small-scale fading and channel estimates.

    h[m, j, k, :] is the channel from BS m to user k of cell j (unit-variance
    entries; path loss applied where channels are used). hhat[m, k, :] is BS
    m's estimate of its own user k. g[m] is the N_e x N_t channel from BS m
    to the eavesdropper.
    """

    h: np.ndarray
    hhat: np.ndarray
    g: np.ndarray


def _cn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def _loss(pl: PathLossModel, m: int, j: int, k: int) -> float:
    """Path loss BS m -> user k of cell j (circulant extension of l_user)."""
    return float(pl.l_user[(m - j) % pl.l_user.shape[0], k])


def sample_channels(cfg: SystemConfig, pl: PathLossModel, rng) -> ChannelRealization:
    M, K, N_t, N_e = cfg.M, cfg.K, cfg.N_t, cfg.N_e
    h = _cn(rng, M, M, K, N_t)
    g = _cn(rng, M, N_e, N_t)
    if cfg.training is Training.PERFECT:
        hhat = np.stack([h[m, m] for m in range(M)])
        return ChannelRealization(h=h, hhat=hhat, g=g)
    pt = cfg.p_tau * cfg.tau
    hhat = np.empty((M, K, N_t), complex)
    for m in range(M):
        # pilot observation: co-pilot users of every cell superpose
        obs = np.zeros((K, N_t), complex)
        for j in range(M):
            lv = np.array([_loss(pl, m, j, k) for k in range(K)])
            obs += np.sqrt(pt * lv)[:, None] * h[m, j]
        obs += _cn(rng, K, N_t)
        for k in range(K):
            s = 1.0 + pt * sum(_loss(pl, m, j, k) for j in range(M))
            hhat[m, k] = math.sqrt(pt * _loss(pl, m, m, k)) / s * obs[k]
    return ChannelRealization(h=h, hhat=hhat, g=g)


def build_an(cfg: SystemConfig, hhat_m: np.ndarray, rng,
             method: AnMethod) -> np.ndarray:
    """AN shaping matrix V (N_t x (N_t - K)) with unit-norm columns."""
    n = cfg.N_t - cfg.K
    if method is AnMethod.NULL_SPACE:
        Q, _ = qr(hhat_m.conj().T, mode="full")
        V = Q[:, cfg.K:]
        if np.max(np.abs(hhat_m @ V)) > 1e-8 * np.max(np.abs(hhat_m)):
            raise ArithmeticError("null-space construction failed orthogonality check")
        return V
    V = _cn(rng, cfg.N_t, n)
    return V / np.linalg.norm(V, axis=0, keepdims=True)


def _beams(hhat_m: np.ndarray) -> np.ndarray:
    return hhat_m.conj() / np.linalg.norm(hhat_m, axis=1, keepdims=True)


def _eve_sinr(cfg: SystemConfig, dp, pl: PathLossModel, real: ChannelRealization,
              V: list, w0: np.ndarray) -> float:
    """MMSE-combined SINR of the eavesdropper against the AN floor.

    Worst case for the legitimate system: the eavesdropper suffers no
    receiver noise and no inter-user interference, only the AN covariance
    X = sum_m q * l_eve[m] * (G_m V_m)(G_m V_m)^H.
    """
    X = np.zeros((cfg.N_e, cfg.N_e), complex)
    for m in range(cfg.M):
        GV = real.g[m] @ V[m]
        X += dp.q * pl.l_eve[m] * (GV @ GV.conj().T)
    if np.linalg.cond(X) > _COND_LIMIT:
        raise SingularNoiseError("AN covariance condition number exceeds limit")
    gw = real.g[0] @ w0
    return float(dp.p * pl.l_eve[0] * np.real(gw.conj() @ np.linalg.solve(X, gw)))


def _user_sinr(cfg: SystemConfig, dp, pl: PathLossModel, real: ChannelRealization,
               W: np.ndarray, V: list, k: int = 0) -> float:
    """Instantaneous SINR of user k in cell 0 (unit receiver noise)."""
    h0k = {m: real.h[m, 0, k] for m in range(cfg.M)}
    sig = dp.p * _loss(pl, 0, 0, k) * abs(h0k[0] @ W[0, k]) ** 2
    den = cfg.sigma_mt_sq
    for m in range(cfg.M):
        lm = _loss(pl, m, 0, k)
        hv = h0k[m] @ V[m]
        den += dp.q * lm * float(np.sum(np.abs(hv) ** 2))
        hw = h0k[m] @ W[m].T
        pw = dp.p * lm * np.abs(hw) ** 2
        den += float(np.sum(pw))
        if m == 0:
            den -= float(pw[k])
    return sig / den


def _trial_rng(seed: int, t: int):
    return np.random.default_rng([seed, t])


def _run_trials(cfg: SystemConfig, trials: int, seed: int,
                pl: PathLossModel | None, fn):
    """Drive `fn(rng, realization, V_by_method, W)` over independent trials.

    Trials whose AN covariance is ill-conditioned are redrawn (at most
    _MAX_RETRIES times each, logged); results come back as an array per
    returned component.
    """
    if pl is None:
        pl = build_path_loss(cfg)
    dp = derive_params(cfg)
    out = None
    for t in range(trials):
        rng = _trial_rng(seed, t)
        for attempt in range(_MAX_RETRIES + 1):
            real = sample_channels(cfg, pl, rng)
            W = np.stack([_beams(real.hhat[m]) for m in range(cfg.M)])
            V = {
                method: [build_an(cfg, real.hhat[m], rng, method)
                         for m in range(cfg.M)]
                for method in AnMethod
            }
            try:
                vals = fn(dp, pl, real, W, V)
                break
            except SingularNoiseError:
                log.warning("trial %d: ill-conditioned AN covariance, retry %d",
                            t, attempt + 1)
        else:
            raise SingularNoiseError(
                f"trial {t}: AN covariance ill-conditioned after {_MAX_RETRIES} retries")
        if out is None:
            out = [np.empty(trials) for _ in vals]
        for arr, v in zip(out, vals):
            arr[t] = v
    return out


def _estimate(samples: np.ndarray, seed: int) -> McEstimate:
    n = len(samples)
    return McEstimate(mean=float(np.mean(samples)),
                      stderr=float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else 0.0,
                      trials=n, seed=seed)


def mc_user_rate(cfg: SystemConfig, trials: int, seed: int,
                 pl: PathLossModel | None = None) -> dict[str, McEstimate]:
    """Ergodic rate log2(1 + SINR) of user 0 in cell 0, per AN method."""

    def fn(dp, pl_, real, W, V):
        return [math.log2(1.0 + _user_sinr(cfg, dp, pl_, real, W, V[m]))
                for m in AnMethod]

    null_r, rand_r = _run_trials(cfg, trials, seed, pl, fn)
    return {"null": _estimate(null_r, seed), "random": _estimate(rand_r, seed)}


def mc_eve_sinr_samples(cfg: SystemConfig, trials: int, seed: int,
                        pl: PathLossModel | None = None) -> np.ndarray:
    """Per-trial eavesdropper SINR samples (AN design from cfg.an_method)."""

    def fn(dp, pl_, real, W, V):
        return [_eve_sinr(cfg, dp, pl_, real, V[cfg.an_method], W[0, 0])]

    (samples,) = _run_trials(cfg, trials, seed, pl, fn)
    return samples


def mc_eve_capacity(cfg: SystemConfig, trials: int, seed: int,
                    pl: PathLossModel | None = None) -> McEstimate:
    samples = mc_eve_sinr_samples(cfg, trials, seed, pl)
    return _estimate(np.log2(1.0 + samples), seed)


def mc_secrecy(cfg: SystemConfig, trials: int, seed: int,
               pl: PathLossModel | None = None) -> dict[str, McEstimate]:
    """Ergodic secrecy rate [user rate - eavesdropper capacity]+ per AN method.

    User and eavesdropper quantities share channel realizations, so the
    per-trial difference has lower variance than independent runs.
    """

    def fn(dp, pl_, real, W, V):
        out = []
        for m in AnMethod:
            r = math.log2(1.0 + _user_sinr(cfg, dp, pl_, real, W, V[m]))
            ce = math.log2(1.0 + _eve_sinr(cfg, dp, pl_, real, V[m], W[0, 0]))
            out.append(r - ce)
        return out

    null_d, rand_d = _run_trials(cfg, trials, seed, pl, fn)
    out = {}
    for name, diffs in (("null", null_d), ("random", rand_d)):
        est = _estimate(diffs, seed)
        out[name] = McEstimate(mean=max(0.0, est.mean), stderr=est.stderr,
                               trials=est.trials, seed=est.seed)
    return out


def mc_report(cfg: SystemConfig, trials: int, seed: int,
              pl: PathLossModel | None = None) -> dict:
    """Rate, eavesdropper capacity and secrecy estimates from one shared run.

    Returns {"rate": {method: McEstimate}, "eve_cap": {...}, "secrecy": {...}};
    the secrecy estimate is the clipped mean of the per-trial differences.
    """

    def fn(dp, pl_, real, W, V):
        out = []
        for m in AnMethod:
            r = math.log2(1.0 + _user_sinr(cfg, dp, pl_, real, W, V[m]))
            ce = math.log2(1.0 + _eve_sinr(cfg, dp, pl_, real, V[m], W[0, 0]))
            out.extend((r, ce))
        return out

    rn, cn_, rr, cr = _run_trials(cfg, trials, seed, pl, fn)
    report = {"rate": {}, "eve_cap": {}, "secrecy": {}}
    for name, rates, caps in (("null", rn, cn_), ("random", rr, cr)):
        report["rate"][name] = _estimate(rates, seed)
        report["eve_cap"][name] = _estimate(caps, seed)
        d = _estimate(rates - caps, seed)
        report["secrecy"][name] = McEstimate(mean=max(0.0, d.mean), stderr=d.stderr,
                                             trials=d.trials, seed=d.seed)
    return report


def mc_outage(cfg: SystemConfig, rate_value: float, r0: float,
              trials: int, seed: int,
              pl: PathLossModel | None = None) -> McEstimate:
    """Secrecy outage frequency: eavesdropper capacity exceeds rate_value - r0.

    rate_value must be the same deterministic user-rate bound the closed-form
    outage uses, so both sides answer the same question.
    """
    thr = 2.0 ** (rate_value - r0) - 1.0
    samples = mc_eve_sinr_samples(cfg, trials, seed, pl)
    hits = (samples > thr).astype(float) if thr > 0 else np.ones_like(samples)
    return _estimate(hits, seed)
