"""Special functions against independent oracles.

Frozen reference values come from ``tests/oracles.py`` (mpmath at 50 digits,
brute-force double/multiple series or closed forms).
"""
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kmu_shadowed.errors import ConvergenceError, DomainError
from kmu_shadowed.specialfn import (DEFAULT_CONTROL, PHI2_SERIES_MAX_ARG, NumericControl, bessel_i,
                                    inverse_laplace, kummer_1f1, lauricella_fd, ln_gamma,
                                    log_kummer_1f1, phi2, phi2_multi)

# oracle: Taylor series of 1F1 at 50 digits
HYP1F1_2_3_15 = 2.8807506979280288100453579822752336973358888303865
# oracle: closed form sqrt(2/(pi x)) sinh(x)
BESSEL_HALF_2 = 2.0462368630890550366051836120207323192675390214947
# oracle: brute-force double series at 50 digits
PHI2_REF = 0.17975121716546472501207192790732983986481330147975
# oracles: brute-force multiple series of F_D
FD3_REF = 0.70715151133153853876112920784659823195707475280323
FD2_REF = 0.81315210454501944836356497705880018884375017408423

settings.register_profile("kmu", max_examples=40, deadline=None)
settings.load_profile("kmu")


def phi2_double_series_mp(b1, b2, c, w, z):
    """Double series of Phi2 summed by mpmath with 90 digits (absorbs the cancellation)."""
    with mp.workdps(90):
        return float(mp.hyper2d({"m": [b1], "n": [b2]}, {"m+n": [c]}, w, z))


def rel(a, b):
    return abs(a - b) / abs(b)


class TestNumericControl:
    def test_defaults(self):
        c = NumericControl()
        assert (c.rel_tol, c.abs_tol, c.max_terms, c.quad_points) == (1e-10, 1e-300, 100000, 201)
        assert c.inv_laplace_terms == 26

    @pytest.mark.parametrize("kw", [dict(rel_tol=0), dict(abs_tol=-1), dict(max_terms=0),
                                    dict(quad_points=14), dict(inv_laplace_terms=9),
                                    dict(rel_tol=float("nan"))])
    def test_invalid(self, kw):
        with pytest.raises(DomainError):
            NumericControl(**kw)


class TestLnGamma:
    def test_values(self):
        assert ln_gamma(1.0) == 0.0
        assert ln_gamma(0.5) == pytest.approx(0.5723649429247001, rel=1e-14)
        assert ln_gamma(10.0) == pytest.approx(math.log(362880), rel=1e-14)

    @pytest.mark.parametrize("x", [0.0, -1.0, float("inf"), float("nan")])
    def test_domain(self, x):
        with pytest.raises(DomainError):
            ln_gamma(x)


class TestKummer:
    def test_trivial(self):
        assert kummer_1f1(2.0, 3.0, 0.0) == 1.0
        assert kummer_1f1(1.0, 1.0, 1.0) == pytest.approx(math.e, rel=1e-14)

    def test_oracle(self):
        assert rel(kummer_1f1(2.0, 3.0, 1.5), HYP1F1_2_3_15) < 1e-13

    def test_large_argument_against_mpmath(self):
        for a, b, z in [(0.7, 2.5, 300.0), (40.0, 3.0, -250.0), (2.0, 60.0, 800.0)]:
            ref = float(mp.hyp1f1(a, b, z))
            assert rel(kummer_1f1(a, b, z), ref) < 1e-11

    def test_sign_change(self):
        # 1F1(5; 1/2; -20) is negative; the evaluator must not force positivity
        ref = float(mp.hyp1f1(5, 0.5, -20))
        assert ref < 0
        assert rel(kummer_1f1(5.0, 0.5, -20.0), ref) < 1e-10
        with pytest.raises(DomainError):
            log_kummer_1f1(5.0, 0.5, -20.0)

    @given(a=st.floats(0.01, 5), gap=st.floats(0.1, 5), z=st.floats(0.0, 20))
    def test_kummer_transform_consistency(self, a, gap, z):
        b = a + gap
        direct = float(mp.hyp1f1(a, b, -z))
        assert rel(kummer_1f1(a, b, -z), direct) < 1e-9
        assert rel(math.exp(-z) * kummer_1f1(b - a, b, z), kummer_1f1(a, b, -z)) < 1e-9

    def test_vectorized(self):
        z = np.array([-3.0, 0.0, 2.0])
        out = kummer_1f1(1.5, 2.5, z)
        assert out.shape == (3,)
        for zi, v in zip(z, out):
            assert rel(v, float(mp.hyp1f1(1.5, 2.5, zi))) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            kummer_1f1(1.0, 0.0, 1.0)
        with pytest.raises(DomainError):
            kummer_1f1(1.0, 2.0, float("inf"))

    def test_term_cap(self):
        with pytest.raises(ConvergenceError) as info:
            kummer_1f1(1.0, 2.0, 500.0, NumericControl(max_terms=10))
        assert info.value.terms is not None


class TestBessel:
    def test_trivial(self):
        assert bessel_i(0, 0.0) == 1.0
        assert bessel_i(1, 0.0) == 0.0

    def test_half_order(self):
        assert rel(bessel_i(0.5, 2.0), BESSEL_HALF_2) < 1e-12

    @pytest.mark.parametrize("nu,x", [(-1, 3.0), (-0.4, 0.7), (2.3, 40.0), (0.0, 700.0)])
    def test_against_mpmath(self, nu, x):
        assert rel(bessel_i(nu, x), float(mp.besseli(nu, x))) < 1e-12

    def test_domain(self):
        with pytest.raises(DomainError):
            bessel_i(0.5, -1.0)
        with pytest.raises(DomainError):
            bessel_i(-1.5, 1.0)


class TestPhi2:
    def test_zero_arguments(self):
        assert phi2(0.3, 2.0, 1.7, 0.0, 0.0) == 1.0

    def test_z_zero_reduces_to_1f1(self):
        assert rel(phi2(1.0, 2.0, 3.0, -0.7, 0.0), float(mp.hyp1f1(1, 3, -0.7))) < 1e-13

    def test_double_series_oracle(self):
        assert rel(phi2(0.5, 1.5, 2.0, -1.0, -2.0), PHI2_REF) < 1e-12

    def test_swap_symmetry(self):
        assert rel(phi2(0.5, 1.5, 2.0, -1.0, -2.0), phi2(1.5, 0.5, 2.0, -2.0, -1.0)) < 1e-13

    def test_equal_arguments_identity_extreme_m(self):
        # Phi2(b1, b2; c; w, w) = 1F1(b1 + b2; c; w), here at the CDF call site with m = 1e8
        mu, m, w = 2.0, 1e8, -3.0
        ref = float(mp.hyp1f1(mu, mu + 1, w))
        assert rel(phi2(mu - m, m, mu + 1.0, w, w), ref) < 1e-12

    def test_cdf_call_site_moderate_m(self):
        mu, m, kappa, w = 2.3, 50.0, 1.5, -6.0
        z = w * m / (mu * kappa + m)
        ref = phi2_double_series_mp(mu - m, m, mu + 1.0, w, z)
        assert rel(phi2(mu - m, m, mu + 1.0, w, z), ref) < 1e-10

    def test_large_argument_routes_to_inversion(self):
        w, z = -(PHI2_SERIES_MAX_ARG + 30.0), -20.0
        ref = phi2_double_series_mp(0.8, 1.3, 2.9, w, z)
        assert rel(phi2(0.8, 1.3, 2.9, w, z), ref) < 1e-9

    @pytest.mark.parametrize("b1,b2,c,w,z", [
        (2.0, 1.5, 0.7, -5.0, -1.0),     # c below b1 + b2
        (-0.6, 1.2, 1.9, -8.0, -3.0),    # negative first parameter
        (1.4, 2.2, 9.5, -30.0, -12.0),
        (0.9, -2.5, 1.1, -4.0, -15.0),   # negative second parameter
    ])
    def test_generic_against_double_series(self, b1, b2, c, w, z):
        ref = phi2_double_series_mp(b1, b2, c, w, z)
        assert abs(phi2(b1, b2, c, w, z) - ref) <= 1e-9 * max(1.0, abs(ref))

    def test_negative_values_are_returned(self):
        # with c < b1 + b2 the function changes sign; z = 0 gives 1F1(b1; c; w)
        ref = float(mp.hyp1f1(5, 0.5, -20))
        assert rel(phi2(5.0, 3.0, 0.5, -20.0, 0.0), ref) < 1e-9

    def test_positive_argument_rejected(self):
        with pytest.raises(DomainError):
            phi2(1.0, 1.0, 2.0, 0.5, -1.0)

    @given(b1=st.floats(0.1, 4), b2=st.floats(0.1, 4), extra=st.floats(0.0, 4),
           w=st.floats(-20, 0), z=st.floats(-20, 0))
    def test_monotone_in_each_argument(self, b1, b2, extra, w, z):
        # for c >= b1 + b2 each term of the shifted series is monotone
        c = b1 + b2 + extra
        f0 = phi2(b1, b2, c, w, z)
        assert phi2(b1, b2, c, w - 0.5, z) <= f0 * (1 + 1e-12)
        assert phi2(b1, b2, c, w, z - 0.5) <= f0 * (1 + 1e-12)


class TestPhi2Multi:
    def test_zero_arguments(self):
        assert phi2_multi([0.4, 2.0, 1.1], 3.0, [0.0, 0.0, 0.0]) == 1.0

    def test_cross_method_reference(self):
        assert rel(phi2_multi([0.5, 1.5], 2.0, [-1.0, -2.0]), PHI2_REF) < 1e-8

    def test_repeated_arguments_collapse_example(self):
        b1, b2, nu, x1, x2 = 0.7, 1.9, 3.3, -4.0, -1.5
        lhs = phi2_multi([b1, b1, b2, b2], nu, [x1, x1, x2, x2])
        assert rel(lhs, phi2(2 * b1, 2 * b2, nu, x1, x2)) < 1e-8

    @given(b1=st.floats(0.2, 5), b2=st.floats(0.2, 5), nu=st.floats(0.5, 10),
           x1=st.floats(-10, 0), x2=st.floats(-10, 0),
           N=st.integers(1, 3), M=st.integers(1, 3))
    def test_repeated_arguments_collapse(self, b1, b2, nu, x1, x2, N, M):
        lhs = phi2_multi([b1] * N + [b2] * M, nu, [x1] * N + [x2] * M)
        rhs = phi2(b1 * N, b2 * M, nu, x1, x2)
        assert abs(lhs - rhs) <= 1e-7 * abs(rhs) + 1e-13

    def test_cross_method_grid(self):
        rng = np.random.default_rng(20240601)
        worst = 0.0
        for _ in range(100):
            b1, b2 = rng.uniform(0.2, 5, 2)
            c = rng.uniform(0.5, 10)
            w, z = rng.uniform(-20, 0, 2)
            s = phi2(b1, b2, c, w, z)
            i = phi2_multi([b1, b2], c, [w, z])
            worst = max(worst, abs(s - i) / max(abs(s), 1e-300))
        assert worst < 1e-8

    def test_domain(self):
        with pytest.raises(DomainError):
            phi2_multi([1.0], 2.0, [0.5])
        with pytest.raises(DomainError):
            phi2_multi([1.0, 2.0], 2.0, [-1.0])
        with pytest.raises(DomainError):
            phi2_multi([1.0], 0.0, [-1.0])


class TestLauricella:
    def test_zero_arguments(self):
        assert lauricella_fd(0.7, [1.0, 2.5], 2.0, [0.0, 0.0]) == 1.0

    def test_gauss_reduction(self):
        assert rel(lauricella_fd(0.5, [1.0], 1.5, [-1.0]), math.pi / 4) < 1e-12

    def test_log2(self):
        assert rel(lauricella_fd(1.0, [1.0], 2.0, [-1.0]), math.log(2)) < 1e-12

    def test_multiple_series_oracles(self):
        assert rel(lauricella_fd(1.3, [0.7, -0.4, 2.0], 3.1, [-0.5, -0.2, -0.35]), FD3_REF) < 1e-8
        assert rel(lauricella_fd(0.8, [1.5, 0.6], 2.2, [-0.4, -0.1]), FD2_REF) < 1e-8

    @pytest.mark.parametrize("a,b,c,x", [(1.5, 1.0, 2.0, -1.0), (7.5, 2.0, 8.0, -300.0),
                                          (0.3, 0.9, 4.0, -1e5), (2.5, -1.5, 3.0, -40.0)])
    def test_appell_single_against_mpmath(self, a, b, c, x):
        assert rel(lauricella_fd(a, [b], c, [x]), float(mp.hyp2f1(a, b, c, x))) < 1e-10

    def test_domain(self):
        with pytest.raises(DomainError):
            lauricella_fd(2.0, [1.0], 1.5, [-1.0])
        with pytest.raises(DomainError):
            lauricella_fd(0.5, [1.0], 1.5, [0.3])


class TestInverseLaplace:
    def test_step(self):
        assert inverse_laplace(lambda s: 1 / s, 1.0) == pytest.approx(1.0, rel=1e-10)

    def test_ramp(self):
        assert inverse_laplace(lambda s: 1 / s ** 2, 2.0) == pytest.approx(2.0, rel=1e-10)

    def test_exponential(self):
        assert inverse_laplace(lambda s: 1 / (s + 1), 1.0) == pytest.approx(math.exp(-1), rel=1e-10)

    def test_log_mode_power(self):
        # L^-1[s^-nu](t) = t^(nu-1)/Gamma(nu)
        nu = 3.7
        got = inverse_laplace(lambda s: -nu * np.log(s), np.array([0.5, 4.0]), log=True)
        ref = np.array([0.5, 4.0]) ** (nu - 1) / math.gamma(nu)
        assert np.allclose(got, ref, rtol=1e-10)

    def test_detects_failure(self):
        with pytest.raises(ConvergenceError):
            inverse_laplace(lambda s: np.full(s.shape, np.nan, complex), 1.0)

    def test_deeper_contour_retry(self):
        # poles at +-16i defeat the default depth; the retry ladder resolves them
        got = inverse_laplace(lambda s: 1 / (s * s + 256.0), 1.0)
        assert got == pytest.approx(math.sin(16.0) / 16.0, rel=1e-7)

    def test_domain(self):
        with pytest.raises(DomainError):
            inverse_laplace(lambda s: 1 / s, 0.0)

    def test_default_is_deterministic(self):
        f = lambda s: 1 / (s + 1) ** 2.5  # noqa: E731
        assert inverse_laplace(f, 1.3, DEFAULT_CONTROL) == inverse_laplace(f, 1.3, DEFAULT_CONTROL)
