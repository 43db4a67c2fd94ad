"""Sum and maximum of independent branches."""
import math

import numpy as np
import pytest
from scipy import integrate

from kmu_shadowed import (BranchSet, ShadowedParams, cdf, max_cdf, max_pdf, mgf, pdf, sum_cdf,
                          sum_cdf_asymptotic, sum_cdf_iid, sum_pdf, sum_pdf_asymptotic, sum_pdf_iid)
from kmu_shadowed.errors import DomainError

# oracle: self-convolution of the mixture-series density (mpmath quadrature, 50 digits)
CONV_REF = 0.34752764090389431992533203647255254208379458702706
# oracle: derivative of the i.i.d. sum CDF written as a negative-binomial mixture of
# regularized incomplete gamma functions (mpmath)
IID3_PDF_REF = 0.27496944122170315639980086722324522493727655250111
# oracle: same mixture CDF for M = 2
IID2_CDF_REF = 0.2382594900814660135278408338020484416701989692917

PRESET = [(1.2, 4.0), (2.7, 2.0), (3.1, 1.0)]


def preset(m, gbar=1.0):
    return BranchSet(ShadowedParams(gbar, k, mu, m) for k, mu in PRESET)


def quad(f, lo, hi, points=None):
    val, _ = integrate.quad(f, lo, hi, points=points, limit=400, epsabs=1e-14, epsrel=1e-12)
    return val


class TestBranchSet:
    def test_requires_branches(self):
        with pytest.raises(DomainError):
            BranchSet([])
        with pytest.raises(DomainError):
            BranchSet([(1, 1, 1, 1)])

    def test_arguments_in_printed_order(self):
        bs = BranchSet([ShadowedParams(1, 1, 2, 3), ShadowedParams(2, 0.5, 1, 4)])
        betas, nu, xs = bs.phi2_arguments()
        assert betas == [2 - 3, 1 - 4, 3, 4]
        assert nu == 3
        assert xs == [-bs[0].a, -bs[1].a, -bs[0].b, -bs[1].b]

    def test_sequence_protocol(self):
        bs = preset(1.0)
        assert len(bs) == 3 and list(bs)[1].mu == 2.0 and bs.mu_total == 7.0


class TestSumPdf:
    @pytest.mark.parametrize("p", [ShadowedParams(2, 1.5, 2.3, 1.7), ShadowedParams(1, 0, 0.6, 0.4),
                                   ShadowedParams(0.5, 6, 3, 1e8)])
    def test_single_branch(self, p):
        g = np.array([0.05, 0.4, 1.0, 3.0]) * p.gamma_bar
        assert np.allclose(sum_pdf(BranchSet([p]), g), pdf(p, g), rtol=1e-9, atol=0)
        assert np.allclose(sum_cdf(BranchSet([p]), g), cdf(p, g), rtol=1e-9, atol=1e-13)

    def test_zero(self):
        assert sum_pdf(preset(1.0), 0.0) == 0.0
        one = BranchSet([ShadowedParams(1, 1, 0.5, 2), ShadowedParams(1, 2, 0.5, 1)])
        assert sum_pdf(one, 0.0) == pytest.approx(float(sum_pdf(one, 1e-12)), rel=1e-9)
        with pytest.raises(DomainError):
            sum_pdf(BranchSet([ShadowedParams(1, 1, 0.3, 2), ShadowedParams(1, 2, 0.5, 1)]), 0.0)

    def test_equal_branch_convolution_oracle(self):
        p = ShadowedParams(1, 1, 1, 2)
        assert abs(sum_pdf(BranchSet([p, p]), 1.5) - CONV_REF) < 1e-6
        assert abs(sum_pdf(BranchSet([p, p]), 1.5) / CONV_REF - 1) < 1e-12

    @pytest.mark.parametrize("g", [0.1, 0.7, 2.0, 5.0, 10.0])
    def test_convolution_of_different_branches(self, g):
        p1, p2 = ShadowedParams(1.0, 1.5, 1.3, 0.8), ShadowedParams(2.0, 0.4, 2.2, 3.0)
        ref = quad(lambda x: float(pdf(p1, x)) * float(pdf(p2, g - x)), 0, g)
        assert abs(sum_pdf(BranchSet([p1, p2]), g) - ref) < 1e-6 * max(ref, 1e-3)

    def test_mgf_factorization(self):
        bs = BranchSet([ShadowedParams(1.0, 1.5, 1.3, 0.8), ShadowedParams(2.0, 0.4, 2.2, 3.0)])
        for s in (-0.5, -1.0, -2.0):
            lap = quad(lambda g: math.exp(s * g) * float(sum_pdf(bs, g)), 0, 60, points=[1, 3, 10])
            ref = math.prod(float(mgf(b, s)) for b in bs)
            assert abs(lap - ref) < 1e-6

    @pytest.mark.parametrize("m", [0.5, 1.0, 5.0, 50.0, 1e8])
    def test_pdf_integrates_to_cdf(self, m):
        bs = preset(m, gbar=3.0)
        upper = 40.0
        val = quad(lambda g: float(sum_pdf(bs, g)), 0, upper, points=[2, 5, 10, 20])
        assert abs(val - float(sum_cdf(bs, upper))) < 1e-9

    def test_tail_relative_accuracy(self):
        # sum of two exponentials with distinct means has a closed-form density
        p1 = ShadowedParams(1.0, 0.0, 1.0, 1.0)
        p2 = ShadowedParams(3.0, 0.0, 1.0, 1.0)
        g = np.array([1.0, 30.0, 120.0])
        ref = (np.exp(-g / 3.0) - np.exp(-g)) / (3.0 - 1.0)
        assert np.allclose(sum_pdf(BranchSet([p1, p2]), g), ref, rtol=1e-10, atol=0)


class TestSumCdf:
    def test_zero(self):
        assert sum_cdf(preset(2.0), 0.0) == 0.0

    def test_bounds_and_monotone(self):
        g = np.linspace(0, 80, 300)
        F = sum_cdf(preset(0.5, gbar=2.0), g)
        assert np.all(np.diff(F) >= -1e-12) and F.max() <= 1 + 1e-9

    def test_small_argument_slope(self):
        bs = preset(1.0, gbar=4.0)
        g = np.array([1e-4, 1e-3]) * 4.0
        F = sum_cdf(bs, g)
        slope = math.log(F[1] / F[0]) / math.log(g[1] / g[0])
        assert abs(slope / bs.mu_total - 1) < 0.02


class TestIid:
    def test_m1(self):
        p = ShadowedParams(2, 1.5, 2.3, 1.7)
        g = np.array([0.3, 1.0, 4.0])
        assert np.allclose(sum_pdf_iid(p, 1, g), pdf(p, g), rtol=1e-12)
        assert np.allclose(sum_cdf_iid(p, 1, g), cdf(p, g), rtol=1e-12)

    def test_three_branches_oracle(self):
        p = ShadowedParams(1, 1, 1, 2)
        assert abs(sum_pdf_iid(p, 3, 2.0) / IID3_PDF_REF - 1) < 1e-12
        assert abs(sum_pdf(BranchSet([p] * 3), 2.0) / sum_pdf_iid(p, 3, 2.0) - 1) < 1e-7

    def test_cdf_oracle(self):
        p = ShadowedParams(1, 0.5, 1.2, 0.8)
        assert abs(sum_cdf_iid(p, 2, 1.0) - IID2_CDF_REF) < 1e-12
        assert abs(sum_cdf(BranchSet([p, p]), 1.0) - IID2_CDF_REF) < 1e-12

    def test_normalization(self):
        p = ShadowedParams(1.3, 2.0, 0.8, 1.5)
        val = quad(lambda g: float(sum_pdf_iid(p, 2, g)) if g > 0 else 0.0, 0, 200,
                   points=[0.5, 2, 5, 10, 30])
        assert abs(val - 1) < 1e-7

    def test_zero_and_domain(self):
        assert sum_cdf_iid(ShadowedParams(1, 1, 1, 2), 2, 0.0) == 0.0
        with pytest.raises(DomainError):
            sum_pdf_iid(ShadowedParams(1, 1, 0.4, 2), 2, 0.0)
        with pytest.raises(DomainError):
            sum_pdf_iid(ShadowedParams(1, 1, 1, 2), 0, 1.0)

    @pytest.mark.parametrize("p", [ShadowedParams(1, 1, 1, 2), ShadowedParams(2, 0.3, 2.5, 0.7),
                                   ShadowedParams(0.5, 4, 0.8, 6), ShadowedParams(3, 0, 1.5, 1),
                                   ShadowedParams(1, 2, 3.3, 1e8), ShadowedParams(1.5, 1.2, 0.6, 0.4)])
    @pytest.mark.parametrize("M", [2, 3])
    def test_equal_branches_match_iid(self, p, M):
        g = p.gamma_bar * np.array([0.2, 1.0, 3.0, 8.0])
        a = sum_pdf(BranchSet([p] * M), g)
        b = sum_pdf_iid(p, M, g)
        assert np.all(np.abs(a / b - 1) < 1e-7)


class TestAsymptotic:
    def test_ratio_at_high_snr(self):
        bs = preset(1.5, gbar=1e4)
        assert abs(sum_pdf(bs, 1.0) / sum_pdf_asymptotic(bs, 1.0) - 1) < 1e-2
        assert abs(sum_cdf(bs, 1.0) / sum_cdf_asymptotic(bs, 1.0) - 1) < 1e-2

    def test_monomial_single_branch(self):
        p = ShadowedParams(1e6, 1.0, 2.0, 1.0)
        bs = BranchSet([p])
        pref = math.exp(bs.log_prefactor())
        assert sum_pdf_asymptotic(bs, 1.0) == pytest.approx(pref / math.gamma(2.0), rel=1e-14)
        assert sum_cdf_asymptotic(bs, 3.0) == pytest.approx(pref * 9.0 / math.gamma(3.0), rel=1e-13)

    def test_zero(self):
        assert sum_pdf_asymptotic(preset(1.0), 0.0) == 0.0
        assert sum_cdf_asymptotic(preset(1.0), 0.0) == 0.0


class TestMax:
    def test_single_branch(self):
        p = ShadowedParams(2, 1.5, 2.3, 1.7)
        g = np.array([0.3, 1.0, 4.0])
        assert np.array_equal(max_cdf(BranchSet([p]), g), cdf(p, g))
        assert np.array_equal(max_pdf(BranchSet([p]), g), pdf(p, g))

    def test_zero(self):
        assert max_cdf(preset(1.0), 0.0) == 0.0

    def test_normalization(self):
        bs = preset(1.0)
        val = quad(lambda g: float(max_pdf(bs, g)), 0, 40, points=[0.5, 1, 2, 5])
        assert abs(val - 1) < 1e-7

    def test_finite_difference(self):
        bs = preset(0.7, gbar=2.0)
        g = np.array([0.5, 1.5, 3.0, 6.0])
        h = 1e-5
        fd = (max_cdf(bs, g + h) - max_cdf(bs, g - h)) / (2 * h)
        assert np.all(np.abs(fd - max_pdf(bs, g)) < 1e-6)

    def test_bounded_by_branches(self):
        bs = preset(2.0)
        g = np.linspace(0, 10, 60)
        F = max_cdf(bs, g)
        assert np.all(F <= np.min([cdf(b, g) for b in bs], axis=0) + 1e-15)
        assert np.all(np.diff(F) >= -1e-15)
