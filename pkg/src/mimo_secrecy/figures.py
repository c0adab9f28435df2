"""Figure presets: each reproduces the sweep data behind one published-style
plot, writing one CSV per curve, a manifest mapping curves to files, and a
rendered PNG of all curves.

Presets are closed-form except for the outage panels, where the cheap
Monte-Carlo outage estimator is included for reference; the heavy
Monte-Carlo validation lives in the compare command and the test suite.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from . import closedform as cf
from .cli import COLUMNS, UsageError, _rows_for_point, apply_sweep
from .config import (AnMethod, SystemConfig, Training, db_to_linear,
                     derive_params, with_params)


@dataclass(frozen=True)
class Curve:
    name: str
    cfg: SystemConfig
    var: str
    grid: tuple
    quantities: tuple
    optimize_phi: bool = False


def _cfg(M=7, N_t=100, alpha=0.1, beta=0.1, rho=0.1, P_db=10.0, phi=0.75,
         training=Training.PERFECT, tau=None, p_tau=None):
    K = max(1, int(round(beta * N_t)))
    N_e = max(1, int(round(alpha * N_t)))
    P = db_to_linear(P_db)
    if tau is None:
        tau = K
    if p_tau is None:
        p_tau = P / K
    return with_params(SystemConfig(M=M, N_t=N_t, N_e=N_e, K=K, rho=rho, P=P,
                                    phi=phi, p_tau=p_tau, tau=tau, T_coh=1000,
                                    training=training))


def _beta_grid(lo=0.05, hi=0.90, step=0.05):
    return tuple(round(b, 10) for b in np.arange(lo, hi + step / 2, step))


def _fig0():
    curves = []
    for rho, alpha in ((0.1, 0.1), (0.1, 0.3), (0.3, 0.1)):
        base = _cfg(rho=rho, alpha=alpha)
        curves.append(Curve(f"eve_cap_rho{rho}_alpha{alpha}", base, "beta",
                            _beta_grid(), ("eve_cap", "eve_cap_ub")))
    return curves


def _fig2(contaminated=False):
    training = Training.PILOT_CONTAMINATION if contaminated else Training.PERFECT
    rho = 0.1 if contaminated else 0.3
    base = _cfg(rho=rho, training=training)
    # multiples of 20 keep alpha = N_e/N_t exactly at 0.1 along the sweep
    nt_grid = (20, 40, 60, 80, 100, 140, 200, 280, 400, 500)
    curves = [
        Curve("secrecy_vs_nt", base, "Nt", nt_grid,
              ("secrecy_lb_I", "secrecy_lb_II")),
        Curve("outage_vs_r0", base, "R0",
              tuple(round(r, 10) for r in np.linspace(0.25, 3.0, 12)),
              ("outage_ub", "mc_outage")),
    ]
    return curves


def _phi_preset(contaminated=False):
    training = Training.PILOT_CONTAMINATION if contaminated else Training.PERFECT
    P_db = 20.0 if contaminated else 10.0
    combos = ((0.1, 0.1), (0.2, 0.1), (0.3, 0.1))
    if not contaminated:
        combos += ((0.1, 0.2),)
    phi_grid = tuple(round(p, 10) for p in np.linspace(0.01, 0.99, 99))
    curves = []
    for alpha, beta in combos:
        base = _cfg(alpha=alpha, beta=beta, P_db=P_db, training=training)
        curves.append(Curve(f"secrecy_vs_phi_alpha{alpha}_beta{beta}", base,
                            "phi", phi_grid, ("secrecy_lb_II",)))
    return curves


def _fig6():
    grid = _beta_grid(0.05, 0.50)
    curves = []
    for training, name in ((Training.PERFECT, "perfect"),
                           (Training.PILOT_CONTAMINATION, "contaminated")):
        base = _cfg(alpha=0.3, training=training)
        curves.append(Curve(f"opt_secrecy_vs_beta_{name}", base, "beta", grid,
                            ("secrecy_lb_II", "phi_opt"), optimize_phi=True))
    return curves


def _fig7():
    base = _cfg(alpha=0.1, P_db=20.0, training=Training.PILOT_CONTAMINATION,
                p_tau=1.0)
    curves = [Curve("alpha_sec_vs_beta", base, "beta", _beta_grid(0.05, 0.70),
                    ("alpha_sec",))]
    # pilot-power panel: lambda sweep at fixed tau realizes p_tau in
    # [-10, 20] dB through lambda = p_tau*tau / (1 + p_tau*tau*a)
    for beta in (0.05, 0.5):
        b = _cfg(alpha=0.1, beta=beta, P_db=20.0,
                 training=Training.PILOT_CONTAMINATION, p_tau=1.0)
        a = derive_params(b).a
        pt = db_to_linear(np.linspace(-10.0, 20.0, 31)) * b.tau
        lam_grid = tuple(float(l) for l in pt / (1.0 + pt * a))
        curves.append(Curve(f"alpha_sec_vs_lambda_beta{beta}", b, "lambda",
                            lam_grid, ("alpha_sec",)))
    return curves


def _fig8():
    curves = []
    for K, T in ((5, 100), (5, 500), (20, 100), (20, 500)):
        base = with_params(_cfg(alpha=0.1, beta=K / 100,
                                training=Training.PILOT_CONTAMINATION,
                                p_tau=1.0, tau=K), T_coh=T)
        taus = sorted(set(np.linspace(K, T - 1, 60).astype(int).tolist()))
        curves.append(Curve(f"net_secrecy_K{K}_T{T}", base, "tau",
                            tuple(taus), ("net_secrecy",), optimize_phi=True))
    return curves


PRESETS = {
    "fig0": _fig0,
    "fig2": lambda: _fig2(False),
    "fig3": lambda: _fig2(True),
    "fig4": lambda: _phi_preset(False),
    "fig5": lambda: _phi_preset(True),
    "fig6": _fig6,
    "fig7": _fig7,
    "fig8": _fig8,
}


def _curve_rows(curve: Curve, trials: int, seed: int):
    rows = []
    for value in curve.grid:
        cfg_v = apply_sweep(curve.cfg, curve.var, value)
        rows.extend(_rows_for_point(cfg_v, curve.var, value, curve.quantities,
                                    trials, seed, 1.0, curve.optimize_phi))
    # optimal-phi marker rows for the phi sweeps
    if curve.var == "phi" and "secrecy_lb_II" in curve.quantities:
        dp = derive_params(curve.cfg)
        try:
            po = cf.phi_opt(curve.cfg, dp)
        except cf.NoSecrecyRegionError:
            return rows
        for m in cf.METHODS:
            val = max(0.0, cf.secrecy_lb_ii_raw(curve.cfg, dp, m, po[m]))
            rows.append(("phi", f"{po[m]:.12g}", "phi_opt", m,
                         curve.cfg.training.value, f"{val:.12g}", "",
                         str(trials), str(seed)))
    return rows


def run_figure(fid: str, outdir: str, trials: int, seed: int) -> None:
    if fid not in PRESETS:
        raise UsageError(f"unknown figure id '{fid}' (choose from {sorted(PRESETS)})")
    curves = PRESETS[fid]()
    os.makedirs(outdir, exist_ok=True)
    manifest = []
    fig, ax = plt.subplots(figsize=(7, 5))
    for curve in curves:
        rows = _curve_rows(curve, trials, seed)
        path = os.path.join(outdir, f"{fid}_{curve.name}.csv")
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(COLUMNS)
            w.writerows(rows)
        manifest.append((curve.name, os.path.basename(path)))
        _plot_rows(ax, curve, rows)
    ax.set_xlabel(curves[0].var)
    ax.set_ylabel("estimate")
    ax.set_title(fid)
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=6)
    png = os.path.join(outdir, f"{fid}.png")
    fig.savefig(png, dpi=150)
    plt.close(fig)
    with open(os.path.join(outdir, f"{fid}_manifest.txt"), "w",
              encoding="utf-8") as fh:
        for name, base in manifest:
            fh.write(f"{name},{base}\n")
        fh.write(f"plot,{os.path.basename(png)}\n")


def _plot_rows(ax, curve: Curve, rows) -> None:
    series = {}
    markers = []
    for var, value, q, method, _tr, est, _err, _n, _s in rows:
        if var == "phi" and q == "phi_opt" and curve.var == "phi":
            markers.append((float(value), float(est)))
            continue
        series.setdefault((q, method), []).append((float(value), float(est)))
    for (q, method), pts in sorted(series.items()):
        xs, ys = zip(*sorted(pts))
        ax.plot(xs, ys, label=f"{curve.name}:{q}:{method}", lw=1)
    if markers:
        xs, ys = zip(*markers)
        ax.plot(xs, ys, "ko", ms=4, mfc="none")
