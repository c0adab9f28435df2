"""Closed-form secrecy analysis: eavesdropper capacity (exact series,
reference quadrature, and Wishart-matched upper bound), user SINR lower
bounds for perfect training and pilot contamination, secrecy-rate bounds,
feasibility thresholds, optimal power split, outage bound, and the
training-length optimizer.

Conventions
-----------
* "null" / "random" index the two AN shaping designs.
* The SINR tail of the eavesdropper is represented as a complementary
  distribution T(x) = P{gamma_eve > x}: T(0) = 1 and T is non-increasing.
* The numerator coefficients of T are the elementary symmetric polynomials
  of the pole multiset {mu_j, multiplicity b_j}. For a single pole group
  (M = 1, rho = 0 or rho = 1) this is the exact finite-antenna law of an
  MMSE combiner against equal-power interferers; for two groups it is the
  large-antenna limit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy import integrate
from scipy.special import gammaln

from .config import (AnMethod, DerivedParams, PathLossModel, SystemConfig,
                     Training, derive_params, with_params)
from .specfun import (LogSignedReal, PoleSet, SeriesUnstableError,
                      TailCorruptionError, check_recombination, eval_tail_log,
                      _integral_I_mp, log_elementary_symmetric, pf_weights)

METHODS = ("null", "random")


class NoArtificialNoiseError(ValueError):
    """phi = 1 leaves the eavesdropper's noise matrix singular."""


class BoundNotApplicableError(ValueError):
    """beta >= 1 - c*alpha/a^2: the Wishart-matched upper bound diverges."""


class NoSecrecyRegionError(ValueError):
    """alpha >= alpha_sec: the secrecy rate is zero for every phi."""


@dataclass(frozen=True)
class MethodPair:
    null: float
    random: float

    def __getitem__(self, key: str) -> float:
        return getattr(self, key)


@dataclass(frozen=True)
class TailDistribution:
    """Complementary distribution of the eavesdropper SINR."""

    coeffs: tuple          # LogSignedReal numerator coefficients, i = 0..N_e-1
    poles: PoleSet

    def tail(self, x: float) -> float:
        return eval_tail_log(x, list(self.coeffs), self.poles)


@dataclass(frozen=True)
class WishartMatch:
    """Single-Wishart approximation of the AN covariance at the eavesdropper."""

    xi: float          # scale
    dof: float         # degrees of freedom
    applicable: bool   # dof - N_e > 1


@dataclass(frozen=True)
class SecrecyBounds:
    rate_lb: float
    eve_capacity: float
    secrecy_lb: float
    flavor: str        # "I" (exact capacity) or "II" (capacity upper bound)


# ---------------------------------------------------------------------------
# Eavesdropper tail and capacity
# ---------------------------------------------------------------------------

def eve_poles(cfg: SystemConfig, dp: DerivedParams) -> PoleSet:
    if dp.eta <= 0:
        raise NoArtificialNoiseError(
            "eta = 0: no AN power, the eavesdropper noise matrix is singular")
    n = cfg.N_t - cfg.K
    if cfg.M * n < cfg.N_e:
        raise ValueError("M*(N_t-K) >= N_e required for an invertible AN covariance")
    if cfg.M == 1 or cfg.rho == 0.0:
        return PoleSet(((dp.eta, n),))
    if cfg.rho == 1.0:
        # equal path loss merges both groups into a single pole
        return PoleSet(((dp.eta, cfg.M * n),))
    return PoleSet(((dp.eta, n), (cfg.rho * dp.eta, (cfg.M - 1) * n)))


def eve_tail(cfg: SystemConfig, dp: DerivedParams) -> TailDistribution:
    poles = eve_poles(cfg, dp)
    coeffs = tuple(log_elementary_symmetric(poles, cfg.N_e))
    return TailDistribution(coeffs=coeffs, poles=poles)


def _tail_xmax(dist: TailDistribution, tol: float = 1e-10) -> float:
    """Truncation point: past x_max the integrand contributes < tol."""
    deg_gap = dist.poles.total_multiplicity - (len(dist.coeffs) - 1)
    x = max(1.0, max(1.0 / mu for mu, _ in dist.poles.poles))
    for _ in range(200):
        # beyond x, T(y) <= T(x) (x/y)^{deg_gap}; integral of T/(1+y) is then
        # bounded by T(x) * x / (deg_gap - 1)
        if dist.tail(x) * x / max(deg_gap - 1, 1) < tol:
            return x
        x *= 1.6
    return x


def eve_capacity_quadrature(cfg: SystemConfig, dp: DerivedParams,
                            dist: TailDistribution | None = None) -> float:
    """Reference capacity (1/ln 2) * integral of T(x)/(1+x), adaptive quadrature."""
    if dist is None:
        dist = eve_tail(cfg, dp)
    xmax = _tail_xmax(dist)
    pts = sorted({1.0 / mu for mu, _ in dist.poles.poles if 1.0 / mu < xmax})
    val, err = integrate.quad(lambda x: dist.tail(x) / (1.0 + x), 0.0, xmax,
                              points=pts or None, limit=400)
    if err > 1e-6 * (1.0 + abs(val)):
        raise ArithmeticError(f"quadrature did not converge (estimated error {err:.3e})")
    return val / math.log(2.0)


def eve_capacity_series(cfg: SystemConfig, dp: DerivedParams,
                        dist: TailDistribution | None = None) -> float:
    """Exact capacity by partial-fraction series.

    Assembled in mpmath with adaptive precision: the result is accepted once
    two precisions agree to 1e-10 relative and the partial-fraction weights
    pass the recombination check. Raises SeriesUnstableError otherwise; the
    quadrature path is the fallback.
    """
    if dist is None:
        dist = eve_tail(cfg, dp)
    poles = dist.poles
    total = poles.total_multiplicity
    prev = None
    for prec in (max(140, 4 * total), max(280, 8 * total)):
        val = _series_value(cfg, dist, prec)
        if prev is not None and abs(val - prev) <= 1e-10 * (1.0 + abs(val)):
            break
        prev = val
    else:
        raise SeriesUnstableError("series capacity did not stabilize with precision")
    if not math.isfinite(val) or val < -1e-12:
        raise SeriesUnstableError(f"series capacity value {val} is not usable")
    # spot-check the weights of the highest-degree numerator term
    i_top = cfg.N_e - 1
    ws = [pf_weights(i_top, poles, j, prec=max(280, 8 * total))
          for j in range(len(poles.poles))]
    check_recombination(i_top, poles, ws)
    return max(0.0, val)


def _series_value(cfg: SystemConfig, dist: TailDistribution, prec: int) -> float:
    poles = dist.poles
    with mp.workprec(prec):
        mu0 = mp.mpf(1)
        for mu, b in poles.poles:
            mu0 *= mp.mpf(mu) ** b
        total = mp.mpf(0)
        for i, lam_i in enumerate(dist.coeffs):
            if lam_i.sign == 0:
                continue
            inner = mp.mpf(0)
            for j, (mu_j, b_j) in enumerate(poles.poles):
                ws = pf_weights(i, poles, j, prec=prec)
                inv_mu = 1 / mp.mpf(mu_j)
                # the l = 1 terms are required: the complete partial-fraction
                # expansion starts at l = 1 and every I(., l) is finite
                for l, w in enumerate(ws, start=1):
                    if w != 0:
                        inner += w * _integral_I_mp(inv_mu, l)
            total += mp.exp(mp.mpf(lam_i.log_magnitude)) * lam_i.sign * inner
        return float(total / (mu0 * mp.log(2)))


_SERIES_MULTIPLICITY_LIMIT = 50


def eve_capacity(cfg: SystemConfig, dp: DerivedParams) -> float:
    """Eavesdropper capacity via the cheapest reliable route.

    Small pole multiplicities use the exact series (quadrature as fallback);
    large ones go straight to quadrature, where the series gains nothing but
    costs arbitrary-precision arithmetic.
    """
    dist = eve_tail(cfg, dp)
    if dist.poles.total_multiplicity <= _SERIES_MULTIPLICITY_LIMIT:
        try:
            return eve_capacity_series(cfg, dp, dist)
        except SeriesUnstableError:
            pass
    return eve_capacity_quadrature(cfg, dp, dist)


def wishart_match(cfg: SystemConfig, dp: DerivedParams) -> WishartMatch:
    """Moment-match q*W1 + rho*q*W2 to a single scaled Wishart matrix."""
    if dp.q <= 0:
        raise NoArtificialNoiseError("q = 0: nothing to match")
    xi = dp.q * dp.c / dp.a
    dof = (cfg.N_t - cfg.K) * dp.a ** 2 / dp.c
    return WishartMatch(xi=xi, dof=dof, applicable=(dof - cfg.N_e > 1.0))


def eve_capacity_ub(cfg: SystemConfig, dp: DerivedParams) -> float:
    """Jensen/Wishart upper bound on the eavesdropper capacity.

    Evaluated in both algebraic forms (eta form and phi form); they agree to
    machine accuracy by construction and both are returned only after a
    consistency assertion.
    """
    a, c, al, be, eta = dp.a, dp.c, dp.alpha, dp.beta, dp.eta
    if be >= 1.0 - c * al / a ** 2:
        raise BoundNotApplicableError(
            "beta >= 1 - c*alpha/a^2: upper bound not applicable "
            "(capacity stays finite up to beta = 1 - alpha/M)")
    if eta <= 0:
        raise NoArtificialNoiseError("eta = 0: eavesdropper capacity unbounded")
    denom = eta * a * (1.0 - be) - c * eta * al / a
    v1 = math.log2(1.0 + al / denom)
    z, phi = dp.zeta, cfg.phi
    v2 = math.log2(((1.0 - z) * phi + z) / (z - z * phi))
    if abs(v1 - v2) > 1e-12 * (1.0 + abs(v1)):
        raise AssertionError(f"upper-bound forms disagree: {v1} vs {v2}")
    return v1


# ---------------------------------------------------------------------------
# User SINR lower bounds
# ---------------------------------------------------------------------------

def _chi_moments(n_t: int) -> tuple[float, float, float]:
    """E[x], E[x^2], var[x] for x = ||h||, h standard complex Gaussian in C^n."""
    ex = math.exp(gammaln(n_t + 0.5) - gammaln(n_t))
    ex2 = float(n_t)
    return ex, ex2, ex2 - ex * ex


def _simplified_pl(cfg: SystemConfig) -> PathLossModel:
    from .config import build_path_loss
    return build_path_loss(cfg)


def user_sinr(cfg: SystemConfig, dp: DerivedParams,
              pl: PathLossModel | None = None, finite: bool = False) -> MethodPair:
    """Perfect-training SINR of the use-and-forget rate bound.

    finite=False gives the large-antenna limits of the simplified model;
    finite=True keeps the exact chi moments and accepts an explicit path-loss
    matrix (user index 0 of the local cell is evaluated).
    """
    if not finite:
        M, rho, be, phi, P, eta = cfg.M, cfg.rho, dp.beta, cfg.phi, cfg.P, dp.eta
        noise = be / (phi * P)
        d_null = (M - 1) * rho * (1.0 - be) * eta + (M - 1) * be * rho + be + noise
        d_rand = ((M - 1) * rho + 1.0) * (1.0 - be) * eta + (M - 1) * be * rho + be + noise
        return MethodPair(null=1.0 / d_null, random=1.0 / d_rand)
    if pl is None:
        pl = _simplified_pl(cfg)
    ex, ex2, varx = _chi_moments(cfg.N_t)
    l = pl.l_user[:, 0]
    n_an = cfg.N_t - cfg.K
    # interference: K-1 in-cell beams plus K beams from each other cell
    interf = (cfg.K - 1) * l[0] + cfg.K * float(np.sum(l[1:]))
    noise = cfg.K / (cfg.phi * cfg.P)
    an_other = dp.eta * float(np.sum(l[1:])) * n_an
    num = l[0] * ex * ex
    d_null = l[0] * varx + an_other + interf + noise
    d_rand = d_null + dp.eta * l[0] * n_an
    return MethodPair(null=num / d_null, random=num / d_rand)


def _pc_weights(cfg: SystemConfig, l: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Pilot-contamination weights lambda_m and mu_m for one local user.

    lambda_m = p_tau*tau*l_m^2 / (1 + p_tau*tau*sum_p l_p)
    mu_m     = l_m (1 + p_tau*tau*sum_{p != m} l_p) / (1 + p_tau*tau*sum_p l_p)
    """
    pt = cfg.p_tau * cfg.tau
    s = 1.0 + pt * float(np.sum(l))
    lam_m = pt * l ** 2 / s
    mu_m = l * (s - pt * l) / s
    return lam_m, mu_m


def user_sinr_pc(cfg: SystemConfig, dp: DerivedParams,
                 pl: PathLossModel | None = None, finite: bool = False) -> MethodPair:
    """Pilot-contamination SINR of the rate bound.

    finite=True evaluates the general expression with exact chi moments and
    an arbitrary path-loss vector; finite=False gives the large-antenna
    simplified-model limits

        gamma_null = lam / ((a-lam)(1-b)eta + a*b + (c-1)lam + b/(phi P))
        gamma_rand = lam / (a(1-b)eta     + a*b + (c-1)lam + b/(phi P))

    (b = beta here). Note the a*beta interference term: deriving the limit
    from the general expression gives (K-1) + (M-1)(K-1)rho -> a*beta, which
    Monte-Carlo confirms as the correct lower bound.
    """
    if not finite:
        a, c, be, lam, eta = dp.a, dp.c, dp.beta, dp.lam, dp.eta
        noise = be / (cfg.phi * cfg.P)
        base = a * be + (c - 1.0) * lam + noise
        d_null = (a - lam) * (1.0 - be) * eta + base
        d_rand = a * (1.0 - be) * eta + base
        return MethodPair(null=lam / d_null, random=lam / d_rand)
    if pl is None:
        pl = _simplified_pl(cfg)
    ex, ex2, varx = _chi_moments(cfg.N_t)
    l = pl.l_user[:, 0]
    lam_m, mu_m = _pc_weights(cfg, l)
    n_an = cfg.N_t - cfg.K
    noise = cfg.K / (cfg.phi * cfg.P)
    num = lam_m[0] * ex * ex
    interf = (cfg.K - 1) * float(np.sum(l))              # co-cell beams l != k
    contam = float(np.sum(lam_m[1:])) * ex2              # co-pilot beams, m != n
    mu_sum = float(np.sum(mu_m))
    an_null = dp.eta * n_an * (mu_m[0] + float(np.sum(l[1:])))
    an_rand = dp.eta * n_an * float(np.sum(l))
    d_common = lam_m[0] * varx + mu_sum + interf + contam + noise
    return MethodPair(null=num / (d_common + an_null),
                      random=num / (d_common + an_rand))


def rate_lb(cfg: SystemConfig, dp: DerivedParams,
            pl: PathLossModel | None = None, finite: bool = False) -> MethodPair:
    """log2(1 + gamma) for the configured training mode."""
    fn = user_sinr if cfg.training is Training.PERFECT else user_sinr_pc
    g = fn(cfg, dp, pl, finite)
    return MethodPair(null=math.log2(1.0 + g.null), random=math.log2(1.0 + g.random))


# ---------------------------------------------------------------------------
# Secrecy-rate bounds as rational functions of phi
# ---------------------------------------------------------------------------

def _phi_rational(cfg: SystemConfig, dp: DerivedParams, method: str):
    """Coefficients (u, v, g) of the asymptotic SINR gamma(phi) = g*phi/(u + v*phi).

    Substituting eta = beta(1/phi - 1)/(1-beta) into the asymptotic SINR of
    each training mode / AN design yields this one-parameter family; the
    BoundII secrecy expression, both zero crossings, alpha_sec and phi* all
    follow from (u, v, g).
    """
    a, b, c, be, lam = dp.a, dp.b, dp.c, dp.beta, dp.lam
    if cfg.training is Training.PERFECT:
        if method == "null":
            return be * b, be, 1.0
        return be * (b + 1.0), 0.0, 1.0
    if method == "null":
        return be * (b + 1.0 - lam), lam * (be + c - 1.0), lam
    return be * (b + 1.0), lam * (c - 1.0), lam


def _secrecy_quadratics(cfg: SystemConfig, dp: DerivedParams, method: str):
    """Numerator and denominator quadratics of the BoundII log argument.

    secrecy_II(phi) = log2(N(phi)/D(phi)) with
      N = zeta*(u + (v+g-u)phi - (v+g)phi^2)
      D = zeta*u + (u(1-zeta) + v*zeta)phi + v(1-zeta)phi^2
    """
    u, v, g = _phi_rational(cfg, dp, method)
    z = dp.zeta
    n = (z * u, z * (v + g - u), -z * (v + g))
    d = (z * u, u * (1.0 - z) + v * z, v * (1.0 - z))
    return n, d


def secrecy_lb_ii_raw(cfg: SystemConfig, dp: DerivedParams, method: str,
                      phi: float | None = None) -> float:
    """BoundII secrecy expression before [.]+ clipping (may be negative)."""
    if phi is None:
        phi = cfg.phi
    n, d = _secrecy_quadratics(cfg, dp, method)
    num = n[0] + n[1] * phi + n[2] * phi * phi
    den = d[0] + d[1] * phi + d[2] * phi * phi
    if num <= 0 or den <= 0:
        return -math.inf
    return math.log2(num / den)


def secrecy_lb(cfg: SystemConfig, dp: DerivedParams, flavor: str,
               finite: bool = False,
               pl: PathLossModel | None = None) -> dict[str, SecrecyBounds]:
    """Secrecy-rate lower bounds per AN method.

    flavor "I" subtracts the exact eavesdropper capacity (quadrature path,
    cross-checked by the series where stable); flavor "II" subtracts the
    Wishart upper bound, which equals the closed phi-polynomial form.
    """
    rates = rate_lb(cfg, dp, pl, finite)
    if flavor == "I":
        cap = eve_capacity_quadrature(cfg, dp)
    elif flavor == "II":
        cap = eve_capacity_ub(cfg, dp)
    else:
        raise ValueError("flavor must be 'I' or 'II'")
    out = {}
    for m in METHODS:
        r = rates[m]
        out[m] = SecrecyBounds(rate_lb=r, eve_capacity=cap,
                               secrecy_lb=max(0.0, r - cap), flavor=flavor)
    return out


def alpha_sec(cfg: SystemConfig, dp: DerivedParams) -> MethodPair:
    """Largest eavesdropper-antenna ratio admitting a positive secrecy rate.

    alpha_sec = g*beta*a^2(1-beta) / (u*a*(1-beta) + g*beta*c), reducing to
    the four published expressions for the two training modes and designs.
    """
    a, c, be = dp.a, dp.c, dp.beta
    out = {}
    for m in METHODS:
        u, v, g = _phi_rational(cfg, dp, m)
        out[m] = g * be * a ** 2 * (1.0 - be) / (u * a * (1.0 - be) + g * be * c)
    return MethodPair(**out)


def phi_crossings(cfg: SystemConfig, dp: DerivedParams) -> dict[str, tuple[float, float]]:
    """Zeros (phi0, phi1) of the BoundII secrecy rate; requires alpha < alpha_sec."""
    a_sec = alpha_sec(cfg, dp)
    out = {}
    for m in METHODS:
        if dp.alpha >= a_sec[m]:
            raise NoSecrecyRegionError(
                f"alpha = {dp.alpha} >= alpha_sec = {a_sec[m]} for method '{m}'")
        u, v, g = _phi_rational(cfg, dp, m)
        phi1 = (g * dp.zeta - u) / (g * dp.zeta + v)
        out[m] = (0.0, phi1)
    return out


def phi_opt(cfg: SystemConfig, dp: DerivedParams) -> MethodPair:
    """Maximizer of the BoundII secrecy rate over phi, in closed form.

    d/dphi log(N/D) = 0 gives a quadratic (the cubic terms cancel); the root
    inside (0, phi1) is the unique maximizer.
    """
    crossings = phi_crossings(cfg, dp)
    out = {}
    for m in METHODS:
        (n0, n1, n2), (d0, d1, d2) = _secrecy_quadratics(cfg, dp, m)
        c0 = n1 * d0 - n0 * d1
        c1 = 2.0 * (n2 * d0 - n0 * d2)
        c2 = n2 * d1 - n1 * d2
        phi1 = crossings[m][1]
        if c2 == 0.0:
            roots = [-c0 / c1] if c1 != 0 else []
        else:
            disc = c1 * c1 - 4.0 * c2 * c0
            if disc < 0:
                roots = []
            else:
                sq = math.sqrt(disc)
                roots = [(-c1 - sq) / (2.0 * c2), (-c1 + sq) / (2.0 * c2)]
        inside = [r for r in roots if 0.0 < r < phi1]
        if not inside:
            raise ArithmeticError(f"no stationary point in (0, {phi1}) for '{m}'")
        out[m] = min(inside)
    return MethodPair(**out)


# ---------------------------------------------------------------------------
# Outage and net secrecy rate
# ---------------------------------------------------------------------------

def outage_ub(cfg: SystemConfig, dp: DerivedParams, r0: float,
              dist: TailDistribution | None = None,
              finite: bool = True) -> MethodPair:
    """Upper bound on the secrecy outage probability at target rate r0."""
    if r0 < 0:
        raise ValueError("target secrecy rate must be nonnegative")
    if dist is None:
        dist = eve_tail(cfg, dp)
    rates = rate_lb(cfg, dp, finite=finite)
    out = {}
    for m in METHODS:
        thr = 2.0 ** (rates[m] - r0) - 1.0
        out[m] = 1.0 if thr <= 0 else dist.tail(thr)
    return MethodPair(**out)


def net_secrecy(cfg: SystemConfig, dp: DerivedParams, tau: int,
                optimize_phi: bool = False) -> MethodPair:
    """Net secrecy rate (1 - tau/T) * BoundII with lambda recomputed from tau."""
    if cfg.training is not Training.PILOT_CONTAMINATION:
        raise ValueError("net secrecy rate is defined for pilot contamination")
    if not cfg.K <= tau < cfg.T_coh:
        raise ValueError("tau must satisfy K <= tau < T_coh")
    cfg_t = with_params(cfg, tau=int(tau))
    dp_t = derive_params(cfg_t)
    factor = 1.0 - tau / cfg.T_coh
    out = {}
    for m in METHODS:
        if optimize_phi:
            try:
                phi = phi_opt(cfg_t, dp_t)[m]
            except NoSecrecyRegionError:
                out[m] = 0.0
                continue
        else:
            phi = cfg.phi
        val = secrecy_lb_ii_raw(cfg_t, dp_t, m, phi)
        out[m] = factor * max(0.0, val if math.isfinite(val) else 0.0)
    return MethodPair(**out)


def optimize_tau(cfg: SystemConfig, dp: DerivedParams) -> dict[str, tuple[int, float]]:
    """Scan integer tau in [K, T_coh) with phi re-optimized at each point.

    Returns per method the maximizing (tau*, net rate); ties resolve to the
    smallest tau (cheapest training).
    """
    if cfg.K >= cfg.T_coh:
        raise ValueError("empty feasible range: K >= T_coh")
    best = {m: (cfg.K, -1.0) for m in METHODS}
    for tau in range(cfg.K, cfg.T_coh):
        vals = net_secrecy(cfg, dp, tau, optimize_phi=True)
        for m in METHODS:
            if vals[m] > best[m][1]:
                best[m] = (tau, vals[m])
    return best
