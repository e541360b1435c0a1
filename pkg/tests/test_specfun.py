import math

import numpy as np
import pytest
from scipy import special, stats

from aircomp.numerics import QuadratureSpec, integrate
from aircomp.specfun import (RicianParams, bessel_i0, bessel_i0e, marcum_q1,
                             poisson_inverse_moment, rician_ccdf, rician_pdf)

TIGHT = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-15)


def i0_series_oracle(x: float, terms: int = 50) -> float:
    """Independent 50-term power series with compensated summation."""
    vals = []
    term = 1.0
    for m in range(terms):
        vals.append(term)
        term *= (x / 2.0) ** 2 / ((m + 1) ** 2)
    return math.fsum(vals)


class TestBesselI0:
    def test_zero(self):
        assert bessel_i0(0.0) == 1.0

    @pytest.mark.parametrize("x,expected", [(1.0, 1.266066), (10.0, 2815.7166)])
    def test_reference_values(self, x, expected):
        assert bessel_i0(x) == pytest.approx(i0_series_oracle(x), rel=1e-12)
        assert bessel_i0(x) == pytest.approx(expected, rel=1e-6)

    @pytest.mark.parametrize("x", [0.1, 1.0, 5.0, 20.0, 29.9, 30.1, 80.0, 500.0])
    def test_scaled_consistency(self, x):
        assert bessel_i0e(x) == pytest.approx(special.i0e(x), rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            bessel_i0(-1.0)

    def test_overflow_directs_to_scaled(self):
        with pytest.raises(OverflowError):
            bessel_i0(800.0)
        assert bessel_i0e(800.0) > 0


class TestMarcumQ1:
    def test_b_zero_is_one(self):
        for a in (0.0, 0.5, 2.5, 6.0):
            assert marcum_q1(a, 0.0) == 1.0

    def test_a_zero_gaussian_tail(self):
        assert marcum_q1(0.0, 2.0) == pytest.approx(math.exp(-2.0), abs=1e-14)

    @pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 3.0])
    def test_diagonal_identity(self, a):
        ident = 0.5 * (1.0 + float(bessel_i0e(a * a)))
        assert marcum_q1(a, a) == pytest.approx(ident, abs=1e-10)

    @pytest.mark.parametrize("a,b", [(0.3, 1.2), (1.0, 1.0), (2.0, 4.0),
                                     (6.4, 5.0), (6.4, 8.0), (0.1, 0.1)])
    def test_against_noncentral_chi2(self, a, b):
        # Q1(a, b) is the survival of a 2-dof noncentral chi-square at b^2
        assert marcum_q1(a, b) == pytest.approx(
            stats.ncx2.sf(b * b, 2, a * a), abs=1e-11)

    def test_monotone_in_arguments(self):
        bs = np.linspace(0.0, 6.0, 25)
        for a in (0.0, 0.5, 1.5, 3.0, 6.4):
            vals = np.asarray(marcum_q1(a, bs))
            assert np.all(np.diff(vals) <= 1e-14)
        a_grid = np.linspace(0.0, 6.0, 25)
        for b in (0.5, 1.5, 3.0):
            vals = [marcum_q1(float(a), b) for a in a_grid]
            assert np.all(np.diff(vals) >= -1e-14)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            marcum_q1(-1.0, 1.0)
        with pytest.raises(ValueError):
            marcum_q1(1.0, -1.0)


class TestRician:
    def test_params_invariant(self):
        for b in (0.0, 1.0, 10.0, 15.0, 20.0):
            rp = RicianParams.from_b_factor(b)
            assert rp.c ** 2 + 2 * rp.sigma ** 2 == pytest.approx(1.0, abs=1e-14)

    def test_invalid_factor(self):
        with pytest.raises(ValueError):
            RicianParams.from_b_factor(-1.0)

    def test_pdf_zero_at_origin(self):
        assert rician_pdf(0.0, RicianParams.from_b_factor(15.0)) == 0.0

    def test_rayleigh_degenerate(self):
        rp = RicianParams.from_b_factor(0.0)
        for v in (0.1, 0.5, 1.0, 2.0):
            assert rician_pdf(v, rp) == pytest.approx(
                2.0 * v * math.exp(-v * v), rel=1e-12)

    @pytest.mark.parametrize("b", [0.0, 1.0, 10.0, 15.0, 20.0])
    def test_unit_mass_and_second_moment(self, b):
        rp = RicianParams.from_b_factor(b)
        hi = rp.c + 25.0 * rp.sigma
        mass = integrate(lambda v: np.asarray(rician_pdf(v, rp)), 0.0, hi, TIGHT)
        mom2 = integrate(lambda v: np.asarray(v) ** 2 * np.asarray(rician_pdf(v, rp)),
                         0.0, hi, TIGHT)
        assert mass == pytest.approx(1.0, abs=1e-9)
        assert mom2 == pytest.approx(1.0, abs=1e-8)

    def test_ccdf_limits(self):
        rp = RicianParams.from_b_factor(15.0)
        assert rician_ccdf(0.0, rp) == 1.0
        assert rician_ccdf(50.0, rp) == pytest.approx(0.0, abs=1e-30)

    def test_ccdf_matches_pdf_quadrature(self):
        rp = RicianParams.from_b_factor(15.0)
        cdf = integrate(lambda v: np.asarray(rician_pdf(v, rp)), 0.0, 1.0, TIGHT)
        assert rician_ccdf(1.0, rp) == pytest.approx(1.0 - cdf, abs=1e-9)

    def test_negative_rejected(self):
        rp = RicianParams.from_b_factor(1.0)
        with pytest.raises(ValueError):
            rician_pdf(-0.1, rp)
        with pytest.raises(ValueError):
            rician_ccdf(-0.1, rp)


class TestPoissonInverseMoment:
    @pytest.mark.parametrize("x", [0.1, 1.0, 10.0, 100.0])
    def test_against_truncated_pmf(self, x):
        m = np.arange(1, int(x + 40 * math.sqrt(x) + 60))
        oracle = float(np.sum(stats.poisson.pmf(m, x) / m))
        assert poisson_inverse_moment(x) == pytest.approx(oracle, abs=1e-10)

    @pytest.mark.parametrize("x", [0.5, 5.0, 50.0])
    def test_against_exponential_integral_identity(self, x):
        # independent route: e^{-x} (Ei(x) - gamma - ln x)
        ident = math.exp(-x) * (special.expi(x) - np.euler_gamma - math.log(x))
        assert poisson_inverse_moment(x) == pytest.approx(ident, rel=1e-10)

    def test_bounds(self):
        for x in (0.01, 0.1, 1.0, 10.0, 100.0, 700.0):
            val = poisson_inverse_moment(x)
            assert 0.0 < val < 1.0 - math.exp(-x)

    def test_small_x_limit(self):
        x = 1e-8
        assert poisson_inverse_moment(x) == pytest.approx(x * math.exp(-x), rel=1e-6)

    def test_large_x_behavior(self):
        assert poisson_inverse_moment(100.0) == pytest.approx(0.01, rel=0.05)

    def test_invalid_rejected(self):
        with pytest.raises(ValueError):
            poisson_inverse_moment(0.0)
        with pytest.raises(ValueError):
            poisson_inverse_moment(-1.0)
