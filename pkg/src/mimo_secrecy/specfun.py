"""Numerical primitives for the eavesdropper-capacity closed form.

Everything here deals with the rational tail function

    T(x) = sum_i lam_i x^i / prod_j (1 + mu_j x)^{b_j}

whose multiplicities b_j reach several hundred at realistic antenna counts,
so coefficients are carried in log domain and the partial-fraction weights
are obtained by local power-series arithmetic rather than repeated symbolic
differentiation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.special import gammaln


class CoincidentPolesError(ValueError):
    """Two pole scales coincide; the caller must merge the pole groups."""


class TailCorruptionError(ValueError):
    """Tail evaluation left [0, 1] by more than the numerical guard band."""


class SeriesUnstableError(ArithmeticError):
    """Partial-fraction recombination failed; use the quadrature path."""


@dataclass(frozen=True)
class LogSignedReal:
    """sign * exp(log_magnitude); sign == 0 encodes exact zero."""

    log_magnitude: float
    sign: int

    @classmethod
    def from_real(cls, x: float) -> "LogSignedReal":
        if x == 0:
            return cls(-math.inf, 0)
        return cls(math.log(abs(x)), 1 if x > 0 else -1)

    def value(self) -> float:
        if self.sign == 0:
            return 0.0
        return self.sign * math.exp(self.log_magnitude)


@dataclass(frozen=True)
class PoleSet:
    """Distinct positive pole scales mu_j with integer multiplicities b_j."""

    poles: tuple[tuple[float, int], ...]

    def __post_init__(self):
        object.__setattr__(self, "poles", tuple((float(m), int(b)) for m, b in self.poles))
        for mu, b in self.poles:
            if mu <= 0:
                raise ValueError("pole scales must be positive")
            if b < 1:
                raise ValueError("pole multiplicities must be >= 1")
        mus = [m for m, _ in self.poles]
        for i in range(len(mus)):
            for j in range(i + 1, len(mus)):
                if abs(mus[i] - mus[j]) <= 1e-12 * max(abs(mus[i]), abs(mus[j])):
                    raise CoincidentPolesError(
                        f"pole scales {mus[i]} and {mus[j]} coincide; merge the groups")

    @property
    def total_multiplicity(self) -> int:
        return sum(b for _, b in self.poles)


def integral_I(a: float, n: int) -> float:
    """integral_0^inf dx / ((x+1)(x+a)^n) in closed form.

    Uses the partial-fraction identity; the removable singularity at a = 1
    is handled by its exact limit 1/n.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if abs(a - 1.0) < 1e-8:
        return 1.0 / n
    if abs(a - 1.0) < 0.1:
        # the closed form cancels ~n*log10(1/|a-1|) digits near a = 1;
        # evaluate it in extended precision there
        return float(_integral_I_mp(a, n))
    am1 = a - 1.0
    total = math.log(a) / am1 ** n
    for k in range(2, n + 1):
        total -= a ** (1 - k) / ((k - 1) * am1 ** (n - k + 1))
    return total


def _integral_I_mp(a, n: int):
    """mpmath version of integral_I for high-precision series assembly."""
    a = mp.mpf(a)
    if abs(a - 1) < mp.mpf("1e-25"):
        return mp.mpf(1) / n
    # compensate the cancellation between the log term and the partial sums
    extra = int(n * max(0.0, -mp.log(abs(a - 1), 2))) + 30
    with mp.extraprec(extra):
        am1 = a - 1
        total = mp.log(a) / am1 ** n
        for k in range(2, n + 1):
            total -= a ** (1 - k) / ((k - 1) * am1 ** (n - k + 1))
        return total


def log_binomial(n: int, k: int) -> LogSignedReal:
    """Binomial coefficient as a log-signed value, accurate via log-gamma."""
    if k < 0 or n < 0:
        raise ValueError("n and k must be nonnegative")
    if k > n:
        raise ValueError("k must not exceed n")
    if k == 0 or k == n:
        return LogSignedReal(0.0, 1)
    return LogSignedReal(float(gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)), 1)


def log_sum_signed(terms) -> LogSignedReal:
    """Stable sum of LogSignedReal terms (log-sum-exp with sign tracking)."""
    terms = [t for t in terms if t.sign != 0]
    if not terms:
        return LogSignedReal(-math.inf, 0)
    m = max(t.log_magnitude for t in terms)
    acc = math.fsum(t.sign * math.exp(t.log_magnitude - m) for t in terms)
    if acc == 0.0:
        return LogSignedReal(-math.inf, 0)
    return LogSignedReal(m + math.log(abs(acc)), 1 if acc > 0 else -1)


def log_elementary_symmetric(poles: PoleSet, count: int) -> list[LogSignedReal]:
    """First `count` elementary symmetric polynomials of the pole multiset.

    e_i of {mu_j repeated b_j times} equals the degree-i coefficient of
    prod_j (1 + mu_j t)^{b_j}; within one group that coefficient is
    binom(b_j, u) mu_j^u, and groups combine by convolution. All arithmetic
    stays in log domain (realistic antenna counts overflow floats).
    """
    coeffs = [LogSignedReal(0.0, 1)] + [LogSignedReal(-math.inf, 0)] * (count - 1)
    for mu, b in poles.poles:
        lmu = math.log(mu)
        group = [
            LogSignedReal(log_binomial(b, u).log_magnitude + u * lmu, 1)
            for u in range(min(b, count - 1) + 1)
        ]
        out = []
        for i in range(count):
            out.append(log_sum_signed(
                LogSignedReal(coeffs[i - u].log_magnitude + group[u].log_magnitude,
                              coeffs[i - u].sign)
                for u in range(min(i, len(group) - 1) + 1)))
        coeffs = out
    return coeffs


def pf_weights(i: int, poles: PoleSet, j: int, prec: int | None = None) -> list:
    """Partial-fraction weights w_l, l = 1..b_j, of x^i / prod_s (x + 1/mu_s)^{b_s}
    around the pole x = -1/mu_j.

    w_l is the coefficient of (x - x0)^{b_j - l} in the local Taylor expansion
    of x^i * prod_{s != j} (x + 1/mu_s)^{-b_s}; the expansion is built by
    multiplying truncated power series in mpmath arbitrary precision.
    Returns a list of mpmath floats.
    """
    if not 0 <= j < len(poles.poles):
        raise ValueError("pole index out of range")
    total = poles.total_multiplicity
    if i >= total:
        raise ValueError("numerator degree must keep the rational function proper")
    mu_j, b_j = poles.poles[j]
    # the local Taylor construction cancels heavily when pole scales are
    # close; the penalty term covers the d0^{-b_s} growth of the factors.
    # an explicit prec acts as a floor, never below the safe default.
    penalty = 0
    for s, (mu_s, b_s) in enumerate(poles.poles):
        if s != j:
            gap = abs(1.0 / mu_s - 1.0 / mu_j)
            spread = 1.0 / mu_s + 1.0 / mu_j
            penalty += int(b_s * max(0.0, math.log2(spread / gap))) + 8
    prec = max(prec or 0, 200, 4 * total + penalty)
    with mp.workprec(prec):
        x0 = -1 / mp.mpf(mu_j)
        # numerator x^i about x0
        ser = [mp.binomial(i, t) * x0 ** (i - t) for t in range(min(i, b_j - 1) + 1)]
        ser += [mp.mpf(0)] * (b_j - len(ser))
        for s, (mu_s, b_s) in enumerate(poles.poles):
            if s == j:
                continue
            d0 = x0 + 1 / mp.mpf(mu_s)
            fac = []
            coef = d0 ** (-b_s)
            for k in range(b_j):
                fac.append(coef)
                coef = coef * (-b_s - k) / ((k + 1) * d0)
            ser = _series_mul(ser, fac, b_j)
        return [ser[b_j - l] for l in range(1, b_j + 1)]


def _series_mul(a, b, n):
    out = [mp.mpf(0)] * n
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for k in range(min(n - i, len(b))):
            out[i + k] += ai * b[k]
    return out


def check_recombination(i: int, poles: PoleSet, weights_by_pole: list[list],
                        rel_tol: float = 1e-8, n_points: int = 20,
                        rng=None) -> None:
    """Verify sum_j sum_l w_jl/(x+1/mu_j)^l reproduces x^i / prod (x+1/mu_s)^{b_s}.

    Raises SeriesUnstableError on failure. Evaluation in mpmath so that the
    check itself cannot overflow at large multiplicities.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    scale = max(1.0 / mu for mu, _ in poles.poles)
    xs = rng.uniform(0.05, 3.0, size=n_points) * scale
    # the recombined sum cancels from the weight magnitude down to the value
    # of the rational function; budget precision for that gap at each point
    log2_maxw = max((mp.mag(w) for ws in weights_by_pole for w in ws if w != 0),
                    default=0)
    for x in xs:
        log2_direct = i * math.log2(x) - sum(
            b * math.log2(x + 1.0 / mu) for mu, b in poles.poles)
        prec = max(120, int(log2_maxw - log2_direct) + 80)
        with mp.workprec(prec):
            x = mp.mpf(float(x))
            direct = x ** i
            for mu, b in poles.poles:
                direct /= (x + 1 / mp.mpf(mu)) ** b
            recomb = mp.mpf(0)
            for (mu, b), ws in zip(poles.poles, weights_by_pole):
                base = x + 1 / mp.mpf(mu)
                for l, w in enumerate(ws, start=1):
                    recomb += w / base ** l
            err = abs(recomb - direct) / (abs(direct) + mp.mpf("1e-300"))
            if err > rel_tol:
                raise SeriesUnstableError(
                    f"partial-fraction recombination error {float(err):.3e} at x={float(x):.4g}")


def eval_tail_log(x: float, coeffs: list[LogSignedReal], poles: PoleSet) -> float:
    """Evaluate T(x) = sum_i lam_i x^i / prod_j (1 + mu_j x)^{b_j} in log domain.

    Returns a probability in [0, 1]; values may be clamped only within 1e-9
    of the boundary, anything further out raises TailCorruptionError.
    """
    if x < 0:
        raise ValueError("x must be nonnegative")
    if x == 0.0:
        num = coeffs[0].value() if coeffs else 0.0
        return float(num)
    lx = math.log(x)
    log_num_terms = [
        LogSignedReal(c.log_magnitude + i * lx, c.sign)
        for i, c in enumerate(coeffs)
    ]
    num = log_sum_signed(log_num_terms)
    log_den = sum(b * math.log1p(mu * x) for mu, b in poles.poles)
    if num.sign <= 0:
        val = 0.0 if num.sign == 0 else -math.exp(num.log_magnitude - log_den)
    else:
        val = math.exp(num.log_magnitude - log_den)
    if not -1e-9 <= val <= 1.0 + 1e-9:
        raise TailCorruptionError(f"tail value {val} outside [0, 1]")
    return min(1.0, max(0.0, val))
