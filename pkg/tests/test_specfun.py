import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from mimo_secrecy.specfun import (CoincidentPolesError, LogSignedReal,
                                  PoleSet, SeriesUnstableError,
                                  TailCorruptionError, check_recombination,
                                  eval_tail_log, integral_I, log_binomial,
                                  log_elementary_symmetric, log_sum_signed,
                                  pf_weights)


class TestIntegralI:
    @pytest.mark.parametrize("a", [0.1, 0.5, 0.99, 1.01, 2.0, 10.0])
    @pytest.mark.parametrize("n", [1, 2, 3, 4, 5, 6])
    def test_against_quadrature(self, a, n):
        ref, err = integrate.quad(lambda x: 1.0 / ((x + 1) * (x + a) ** n),
                                  0.0, np.inf)
        assert integral_I(a, n) == pytest.approx(ref, rel=1e-8, abs=err * 10)

    @pytest.mark.parametrize("n", [1, 2, 5, 17])
    def test_removable_singularity(self, n):
        assert integral_I(1.0, n) == pytest.approx(1.0 / n)
        # values just off a = 1 stay continuous
        assert integral_I(1.0 + 5e-9, n) == pytest.approx(1.0 / n, rel=1e-6)

    def test_domain_errors(self):
        with pytest.raises(ValueError):
            integral_I(-1.0, 2)
        with pytest.raises(ValueError):
            integral_I(2.0, 0)


class TestLogArithmetic:
    @pytest.mark.parametrize("n,k", [(0, 0), (5, 2), (60, 30), (1000, 137)])
    def test_log_binomial_exact(self, n, k):
        assert log_binomial(n, k).value() == pytest.approx(math.comb(n, k),
                                                           rel=1e-12)

    def test_log_binomial_huge_stays_finite(self):
        v = log_binomial(630, 315)
        assert math.isfinite(v.log_magnitude) and v.sign == 1

    def test_log_binomial_errors(self):
        with pytest.raises(ValueError):
            log_binomial(3, 5)
        with pytest.raises(ValueError):
            log_binomial(-1, 0)

    def test_log_sum_signed_cancellation(self):
        big = LogSignedReal.from_real(1e6)
        neg = LogSignedReal.from_real(-1e6)
        small = LogSignedReal.from_real(3.5)
        total = log_sum_signed([big, small, neg])
        assert total.value() == pytest.approx(3.5, rel=1e-8)

    def test_log_sum_signed_zero(self):
        z = log_sum_signed([LogSignedReal.from_real(2.0),
                            LogSignedReal.from_real(-2.0)])
        assert z.sign == 0 and z.value() == 0.0


class TestPoleSet:
    def test_rejects_coincident(self):
        with pytest.raises(CoincidentPolesError):
            PoleSet(((1.0, 3), (1.0 + 1e-15, 2)))

    def test_rejects_bad_values(self):
        with pytest.raises(ValueError):
            PoleSet(((0.0, 3),))
        with pytest.raises(ValueError):
            PoleSet(((1.0, 0),))

    def test_total_multiplicity(self):
        assert PoleSet(((1.0, 3), (2.0, 4))).total_multiplicity == 7


class TestElementarySymmetric:
    def test_against_polynomial_expansion(self):
        # e_i of the multiset equals the coefficients of (1+2t)^3 (1+0.5t)^2
        poles = PoleSet(((2.0, 3), (0.5, 2)))
        p = np.polynomial.Polynomial([1.0])
        for mu, b in poles.poles:
            p *= np.polynomial.Polynomial([1.0, mu]) ** b
        got = [c.value() for c in log_elementary_symmetric(poles, 4)]
        np.testing.assert_allclose(got, p.coef[:4], rtol=1e-12)

    def test_leading_one(self):
        poles = PoleSet(((0.037, 90), (0.0037, 540)))
        coeffs = log_elementary_symmetric(poles, 10)
        assert coeffs[0].value() == pytest.approx(1.0)
        assert all(c.sign == 1 for c in coeffs)

    def test_large_multiplicity_no_overflow(self):
        poles = PoleSet(((3.0, 400),))
        coeffs = log_elementary_symmetric(poles, 6)
        # e_i = binom(400, i) 3^i
        for i, c in enumerate(coeffs):
            expect = math.log(math.comb(400, i)) + i * math.log(3.0)
            assert c.log_magnitude == pytest.approx(expect, rel=1e-12)


class TestPartialFractions:
    def test_single_pole_binomial_weights(self):
        # x^i/(x+d)^b expands with binomial weights around -d
        poles = PoleSet(((0.5, 6),))  # pole at -2
        ws = pf_weights(3, poles, 0)
        for l, w in enumerate(ws, start=1):
            # w_l = binom(i, b-l) * x0^(i-(b-l)) at x0 = -2, i = 3, b = 6
            t = 6 - l
            expect = mp.binomial(3, t) * (-2.0) ** (3 - t) if t <= 3 else 0
            assert abs(float(w - expect)) < 1e-12

    def test_recombination_two_groups(self):
        poles = PoleSet(((1.0, 4), (0.25, 8)))
        for i in range(3):
            ws = [pf_weights(i, poles, j) for j in range(2)]
            check_recombination(i, poles, ws)

    def test_recombination_catches_corruption(self):
        poles = PoleSet(((1.0, 4), (0.25, 8)))
        ws = [pf_weights(1, poles, j) for j in range(2)]
        ws[0][0] += 1.0
        with pytest.raises(SeriesUnstableError):
            check_recombination(1, poles, ws)

    @settings(max_examples=15, deadline=None)
    @given(b1=st.integers(1, 12), b2=st.integers(1, 12),
           mu2=st.floats(0.01, 0.9), i=st.integers(0, 4))
    def test_recombination_property(self, b1, b2, mu2, i):
        if i >= b1 + b2:
            return
        poles = PoleSet(((1.0, b1), (mu2, b2)))
        ws = [pf_weights(i, poles, j) for j in range(2)]
        check_recombination(i, poles, ws)

    def test_degree_check(self):
        poles = PoleSet(((1.0, 2),))
        with pytest.raises(ValueError):
            pf_weights(2, poles, 0)
        with pytest.raises(ValueError):
            pf_weights(0, poles, 3)


class TestTailEvaluation:
    def make(self, poles, count):
        return [c for c in log_elementary_symmetric(poles, count)], poles

    def test_boundaries_and_monotonicity(self):
        poles = PoleSet(((1.0, 4), (0.1, 24)))
        coeffs, poles = self.make(poles, 3)
        assert eval_tail_log(0.0, coeffs, poles) == pytest.approx(1.0)
        xs = np.logspace(-3, 3, 200)
        vals = [eval_tail_log(float(x), coeffs, poles) for x in xs]
        assert all(0.0 <= v <= 1.0 for v in vals)
        assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))

    def test_large_multiplicity_tail_no_overflow(self):
        poles = PoleSet(((0.037, 90), (0.0037, 540)))
        coeffs, poles = self.make(poles, 10)
        v = eval_tail_log(10.0, coeffs, poles)
        assert 0.0 <= v <= 1.0

    def test_corruption_detected(self):
        poles = PoleSet(((1.0, 4),))
        coeffs = [LogSignedReal.from_real(50.0)]  # T(0) = 50
        with pytest.raises(TailCorruptionError):
            eval_tail_log(0.5, coeffs, poles)

    def test_negative_x_rejected(self):
        poles = PoleSet(((1.0, 4),))
        with pytest.raises(ValueError):
            eval_tail_log(-1.0, [LogSignedReal.from_real(1.0)], poles)
