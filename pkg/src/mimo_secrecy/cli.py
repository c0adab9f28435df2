"""Command-line front end: parameter sweeps, figure presets, and
closed-form vs Monte-Carlo comparison reports.

All numeric output goes to CSV with the fixed column set

    variable, value, quantity, an_method, training, estimate, stderr, trials, seed

(stderr is empty for closed-form rows). Reruns with the same seed are
byte-identical. The figure path additionally renders a PNG of each preset
next to its CSV data.

Exit codes: 0 success, 1 config error, 2 usage error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import math
import os
import sys

import numpy as np

from . import closedform as cf
from . import montecarlo as mc
from .config import (AnMethod, ConfigError, SystemConfig, Training,
                     derive_params, parse_config_file, with_params)

COLUMNS = ("variable", "value", "quantity", "an_method", "training",
           "estimate", "stderr", "trials", "seed")

SWEEP_VARIABLES = ("Nt", "beta", "phi", "alpha", "rho", "R0", "tau", "lambda")

CLOSED_QUANTITIES = ("rate_lb", "secrecy_lb_I", "secrecy_lb_II", "eve_cap",
                     "eve_cap_ub", "outage_ub", "phi_opt", "alpha_sec",
                     "net_secrecy")
MC_QUANTITIES = ("mc_rate", "mc_eve_cap", "mc_outage")
QUANTITIES = CLOSED_QUANTITIES + MC_QUANTITIES

DEFAULT_R0 = 1.0


class UsageError(ValueError):
    """Bad flag combination or a quantity invalid for the configured mode."""


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def apply_sweep(cfg: SystemConfig, var: str, value: float) -> SystemConfig:
    """Rebind one sweep variable; ratio variables rescale the antenna counts.

    Nt sweeps hold K and the eavesdropper ratio alpha fixed; beta and alpha
    sweeps hold N_t fixed and round K / N_e to the nearest integer; lambda
    sweeps solve for the pilot power at fixed tau.
    """
    if var == "Nt":
        n_t = int(round(value))
        n_e = max(1, int(round(cfg.N_e / cfg.N_t * n_t)))
        return with_params(cfg, N_t=n_t, N_e=n_e)
    if var == "beta":
        k = max(1, int(round(value * cfg.N_t)))
        extra = {}
        # keep the tau = K and p_tau = P/K couplings of the base scenario
        if cfg.training is Training.PILOT_CONTAMINATION:
            if cfg.tau == cfg.K:
                extra["tau"] = k
            elif cfg.tau < k:
                extra["tau"] = k
            if math.isclose(cfg.p_tau, cfg.P / cfg.K):
                extra["p_tau"] = cfg.P / k
        return with_params(cfg, K=k, **extra)
    if var == "phi":
        return with_params(cfg, phi=float(value))
    if var == "alpha":
        return with_params(cfg, N_e=max(1, int(round(value * cfg.N_t))))
    if var == "rho":
        return with_params(cfg, rho=float(value))
    if var == "tau":
        return with_params(cfg, tau=int(round(value)))
    if var == "lambda":
        a = 1.0 + cfg.rho * (cfg.M - 1)
        if not 0.0 < value < 1.0 / a:
            raise ConfigError(f"lambda must lie in (0, 1/a) = (0, {1.0 / a:.6g})")
        p_tau = value / (cfg.tau * (1.0 - value * a))
        return with_params(cfg, p_tau=p_tau)
    if var == "R0":
        return cfg
    raise UsageError(f"unknown sweep variable '{var}'")


def _check_quantities(cfg: SystemConfig, var: str, quantities) -> None:
    for q in quantities:
        if q not in QUANTITIES:
            raise UsageError(f"unknown quantity '{q}'")
    if cfg.training is Training.PERFECT:
        if "net_secrecy" in quantities:
            raise UsageError("net_secrecy requires pilot-contamination training")
        if var in ("tau", "lambda"):
            raise UsageError(f"sweep over '{var}' requires pilot-contamination training")


def _rows_for_point(cfg, var, value, quantities, trials, seed, r0,
                    optimize_phi=False):
    """All CSV rows of one grid point, in the order quantities were given."""
    dp = derive_params(cfg)
    tr = cfg.training.value
    rows = []

    def add(q, method, est, err=""):
        rows.append((var, _fmt(value), q, method, tr, _fmt(est),
                     err, str(trials), str(seed)))

    if var == "R0":
        r0 = float(value)
    for q in quantities:
        if q == "rate_lb":
            r = cf.rate_lb(cfg, dp, finite=True)
            for m in cf.METHODS:
                add(q, m, r[m])
        elif q == "secrecy_lb_I":
            b = cf.secrecy_lb(cfg, dp, "I", finite=True)
            for m in cf.METHODS:
                add(q, m, b[m].secrecy_lb)
        elif q == "secrecy_lb_II":
            try:
                for m in cf.METHODS:
                    if optimize_phi:
                        phi = cf.phi_opt(cfg, dp)[m]
                        val = max(0.0, cf.secrecy_lb_ii_raw(cfg, dp, m, phi))
                    else:
                        val = cf.secrecy_lb(cfg, dp, "II")[m].secrecy_lb
                    add(q, m, val)
            except (cf.BoundNotApplicableError, cf.NoSecrecyRegionError):
                continue
        elif q == "eve_cap":
            add(q, cfg.an_method.value, cf.eve_capacity(cfg, dp))
        elif q == "eve_cap_ub":
            try:
                add(q, cfg.an_method.value, cf.eve_capacity_ub(cfg, dp))
            except cf.BoundNotApplicableError:
                continue
        elif q == "outage_ub":
            o = cf.outage_ub(cfg, dp, r0)
            for m in cf.METHODS:
                add(q, m, o[m])
        elif q == "phi_opt":
            try:
                po = cf.phi_opt(cfg, dp)
            except cf.NoSecrecyRegionError:
                continue
            for m in cf.METHODS:
                add(q, m, po[m])
        elif q == "alpha_sec":
            asec = cf.alpha_sec(cfg, dp)
            for m in cf.METHODS:
                add(q, m, asec[m])
        elif q == "net_secrecy":
            ns = cf.net_secrecy(cfg, dp, cfg.tau, optimize_phi=optimize_phi)
            for m in cf.METHODS:
                add(q, m, ns[m])
        elif q == "mc_rate":
            est = mc.mc_user_rate(cfg, trials, seed)
            for m in cf.METHODS:
                add(q, m, est[m].mean, _fmt(est[m].stderr))
        elif q == "mc_eve_cap":
            est = mc.mc_eve_capacity(cfg, trials, seed)
            add(q, cfg.an_method.value, est.mean, _fmt(est.stderr))
        elif q == "mc_outage":
            rate = cf.rate_lb(cfg, dp, finite=True)
            for m in cf.METHODS:
                cfg_m = with_params(cfg, an_method=AnMethod(m))
                est = mc.mc_outage(cfg_m, rate[m], r0, trials, seed)
                add(q, m, est.mean, _fmt(est.stderr))
    return rows


def run_sweep(cfg: SystemConfig, var: str, grid, quantities, trials: int,
              seed: int, out_path: str, optimize_phi: bool = False) -> None:
    grid = list(grid)
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise UsageError("sweep grid must be strictly increasing")
    _check_quantities(cfg, var, quantities)
    rows = []
    for value in grid:
        cfg_v = apply_sweep(cfg, var, value)
        rows.extend(_rows_for_point(cfg_v, var, value, quantities, trials,
                                    seed, DEFAULT_R0, optimize_phi))
    _write_csv(out_path, rows)


def _write_csv(path: str, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(COLUMNS)
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# comparison report
# ---------------------------------------------------------------------------

def run_compare(cfg: SystemConfig, trials: int, seed: int, out=None) -> int:
    """Closed-form vs Monte-Carlo table with bound-direction z-scores.

    A lower bound fails when it exceeds the estimate by more than 4 stderr,
    an upper bound when it undercuts it by the same margin, and the exact
    eavesdropper capacity when it misses on either side.
    """
    if out is None:
        out = sys.stdout
    dp = derive_params(cfg)
    rate = cf.rate_lb(cfg, dp, finite=True)
    est_rate = mc.mc_user_rate(cfg, trials, seed)
    lines = [f"{'row':28s} {'closed':>12s} {'mc':>12s} {'stderr':>10s} {'z':>8s}"]
    worst_fail = False

    def row(name, closed, est, direction):
        nonlocal worst_fail
        z = (closed - est.mean) / est.stderr if est.stderr > 0 else 0.0
        bad = (direction == "lower" and z > 4.0) or \
              (direction == "upper" and z < -4.0) or \
              (direction == "exact" and abs(z) > 4.0)
        worst_fail = worst_fail or bad
        flag = "  FAIL" if bad else ""
        lines.append(f"{name:28s} {closed:12.5f} {est.mean:12.5f} "
                     f"{est.stderr:10.5f} {z:8.2f}{flag}")

    for m in cf.METHODS:
        row(f"rate_lb[{m}]", rate[m], est_rate[m], "lower")
    try:
        cap = cf.eve_capacity(cfg, dp)
        est_cap = mc.mc_eve_capacity(cfg, trials, seed)
        row("eve_cap", cap, est_cap, "exact")
        outage = cf.outage_ub(cfg, dp, DEFAULT_R0)
        for m in cf.METHODS:
            cfg_m = with_params(cfg, an_method=AnMethod(m))
            est_o = mc.mc_outage(cfg_m, rate[m], DEFAULT_R0, trials, seed)
            row(f"outage_ub[{m}]", outage[m], est_o, "upper")
    except cf.NoArtificialNoiseError:
        lines.append(f"{'eve_cap':28s} not applicable (no AN)")
        for m in cf.METHODS:
            lines.append(f"{'outage_ub[' + m + ']':28s} not applicable (no AN)")
    print("\n".join(lines), file=out)
    return 3 if worst_fail else 0


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def _parse_sweep_arg(s: str):
    try:
        var, rng = s.split("=", 1)
        start, stop, steps = rng.split(":")
        grid = np.linspace(float(start), float(stop), int(steps))
    except ValueError:
        raise UsageError("--sweep expects VAR=start:stop:steps") from None
    if var not in SWEEP_VARIABLES:
        raise UsageError(f"unknown sweep variable '{var}'")
    if var in ("Nt", "tau"):
        grid = [int(round(v)) for v in grid]
    return var, list(grid)


def _build_parser():
    ap = argparse.ArgumentParser(prog="mimo-secrecy",
                                 description="Secrecy analysis of AN-aided "
                                             "multi-cell massive MIMO downlinks")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        p.add_argument("--config", required=config_required,
                       help="scenario config file (key = value lines)")
        p.add_argument("--trials", type=int, default=None,
                       help="Monte-Carlo trials (default from config, else 3000)")
        p.add_argument("--seed", type=int, default=None,
                       help="master seed (fallback: MIMO_SECRECY_SEED, then config)")

    sw = sub.add_parser("sweep", help="parameter sweep to CSV")
    common(sw)
    sw.add_argument("--sweep", required=True, metavar="VAR=start:stop:steps")
    sw.add_argument("--quantities", required=True,
                    help="comma-separated subset of: " + ", ".join(QUANTITIES))
    sw.add_argument("--out", required=True, help="output CSV path")

    fg = sub.add_parser("figure", help="reproduce a preset figure (CSV + PNG)")
    common(fg, config_required=False)
    fg.add_argument("--figure", required=True,
                    help="preset id: fig0, fig2, ..., fig8")
    fg.add_argument("--out", required=True, help="output directory")

    cp = sub.add_parser("compare", help="closed-form vs Monte-Carlo report")
    common(cp)
    return ap


def _resolve_seed(args, settings) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("MIMO_SECRECY_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError("MIMO_SECRECY_SEED must be an integer") from None
    return settings.seed


def main(argv=None) -> int:
    ap = _build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _dispatch(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except (ArithmeticError, cf.NoArtificialNoiseError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


def _dispatch(args) -> int:
    from .figures import run_figure

    if args.command == "figure":
        if args.config is not None:
            raise UsageError("figure presets are self-contained; drop --config")
        trials = args.trials if args.trials is not None else 3000
        seed = args.seed
        if seed is None:
            env = os.environ.get("MIMO_SECRECY_SEED")
            seed = int(env) if env is not None else 0
        run_figure(args.figure, args.out, trials, seed)
        return 0

    cfg, settings = parse_config_file(args.config)
    trials = args.trials if args.trials is not None else settings.trials
    seed = _resolve_seed(args, settings)

    if args.command == "sweep":
        var, grid = _parse_sweep_arg(args.sweep)
        quantities = [q.strip() for q in args.quantities.split(",") if q.strip()]
        if not quantities:
            raise UsageError("--quantities must name at least one quantity")
        run_sweep(cfg, var, grid, quantities, trials, seed, args.out)
        return 0
    if args.command == "compare":
        return run_compare(cfg, trials, seed)
    raise UsageError(f"unknown command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
