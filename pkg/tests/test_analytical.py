import math

import numpy as np
import pytest
from scipy import integrate as sp_integrate

from aircomp.analytical import (VARIANTS, eta_star_realization,
                                eta_upper_bound, mse_analytic, optimize_eta,
                                rician_mean)
from aircomp.model import NetworkParams, Realization
from aircomp.specfun import marcum_q1, poisson_inverse_moment, rician_pdf


def make_params(**kw):
    base = dict(density=0.05, radius=10.0, alpha=2.1, epsilon=1.0,
                rician_b=15.0, p_max=1000.0, noise_power=1.0)
    base.update(kw)
    return NetworkParams(**base)


def brute_force_breakdown(params, eta, variant):
    """Nested scipy quadrature of the defining double integrals."""
    rp = params.rician()
    s = params.alpha * params.epsilon
    ratio = math.sqrt(params.p_max / eta)
    v_cap = rp.c + 25.0 * rp.sigma

    def capped_inner(r):
        d = r ** (0.5 * s) / ratio
        hi = min(d, v_cap)
        if hi <= 0:
            return 0.0
        val, _ = sp_integrate.quad(
            lambda v: rician_pdf(v, rp)
            * (ratio ** 2 * v * v * r ** (1.0 - params.alpha)
               - 2.0 * ratio * v * r ** (1.0 - 0.5 * params.alpha)),
            0.0, hi, limit=200)
        return val

    capped, _ = sp_integrate.quad(capped_inner, 1.0, params.radius, limit=200)

    kappa = 2.0 if variant == "printed" else 0.0
    a = rp.c / rp.sigma

    def marcum_integrand(r):
        d = r ** (0.5 * s) / ratio
        poly = r ** (s - params.alpha) - 2.0 * r ** (0.5 * (s - params.alpha)) + kappa
        return poly * r * float(marcum_q1(a, d / rp.sigma))

    marc, _ = sp_integrate.quad(marcum_integrand, 1.0, params.radius, limit=200)
    geom = 0.5 * (params.radius ** 2 - 1.0)
    k_factor = poisson_inverse_moment(params.mean_count)
    return k_factor * (2.0 * math.pi * params.density * (capped + geom + marc)
                       + params.noise_power / eta)


class TestMseAnalytic:
    @pytest.mark.parametrize("variant", VARIANTS)
    @pytest.mark.parametrize("eta", [1.0, 25.0, 400.0])
    def test_against_nested_quadrature(self, variant, eta):
        params = make_params()
        got = mse_analytic(params, eta, variant).total
        want = brute_force_breakdown(params, eta, variant)
        assert got == pytest.approx(want, rel=1e-6)

    def test_variant_gap_identity(self):
        # printed - rederived = K * 2 pi lambda * int 2 r Q1(c/s, D(r)/s) dr
        params = make_params()
        eta = 25.0
        rp = params.rician()
        ratio = math.sqrt(params.p_max / eta)
        s = params.alpha * params.epsilon
        gap_integral, _ = sp_integrate.quad(
            lambda r: 2.0 * r * float(marcum_q1(
                rp.c / rp.sigma, r ** (0.5 * s) / ratio / rp.sigma)),
            1.0, params.radius, limit=200)
        k = poisson_inverse_moment(params.mean_count)
        want_gap = k * 2.0 * math.pi * params.density * gap_integral
        got_gap = (mse_analytic(params, eta, "printed").total
                   - mse_analytic(params, eta, "rederived").total)
        assert got_gap == pytest.approx(want_gap, rel=1e-7)
        assert got_gap > 0

    def test_epsilon_zero_branch(self):
        params = make_params(epsilon=0.0)
        got = mse_analytic(params, 25.0, "rederived").total
        want = brute_force_breakdown(params, 25.0, "rederived")
        assert got == pytest.approx(want, rel=1e-6)

    def test_breakdown_reassembles(self):
        params = make_params()
        b = mse_analytic(params, 25.0, "rederived")
        total = b.k_factor * (2.0 * math.pi * params.density * (
            b.capped_term + b.geometry_term + b.marcumq_term) + b.noise_term)
        assert b.total == pytest.approx(total, rel=1e-14)
        assert b.geometry_term == pytest.approx(0.5 * (params.radius ** 2 - 1.0))
        assert b.noise_term == pytest.approx(params.noise_power / 25.0)

    def test_noise_dominates_small_eta(self):
        params = make_params()
        tiny = mse_analytic(params, 1e-9, "rederived")
        assert tiny.noise_term / tiny.total * tiny.k_factor > 0.999

    def test_invalid_inputs(self):
        params = make_params()
        with pytest.raises(ValueError):
            mse_analytic(params, 25.0, "exact")
        with pytest.raises(ValueError):
            mse_analytic(params, 0.0)

    def test_rician_mean_reference(self):
        # B = 0 Rayleigh: E[h] = sqrt(pi)/2
        assert rician_mean(make_params(rician_b=0.0)) == pytest.approx(
            math.sqrt(math.pi) / 2.0, rel=1e-8)


class TestEtaUpperBound:
    def test_components_positive_and_max(self):
        b = eta_upper_bound(make_params())
        assert b.value == max(b.capped_moment_printed,
                              b.capped_moment_appendix, b.ratio_moment)
        assert all(c > 0 for c in b.components)

    def test_capped_readings_reciprocal(self):
        params = make_params()
        b = eta_upper_bound(params)
        prod = b.capped_moment_printed * b.capped_moment_appendix
        assert prod == pytest.approx(params.p_max ** 2, rel=1e-12)

    def test_bound_below_p_max_scale(self):
        # with the bracket < 1 the larger capped reading exceeds P_max
        b = eta_upper_bound(make_params())
        assert max(b.capped_moment_printed, b.capped_moment_appendix) >= \
            make_params().p_max


class TestEtaStarRealization:
    def test_single_device_closed_form(self):
        # one device at d = 1, h = 1: eta_ref = P_max keeps it on the cap,
        # so eta* = ((P_max + w^2) / sqrt(P_max))^2
        params = make_params()
        re = Realization(distances=np.array([1.0]), fadings=np.array([1.0]),
                         radius=params.radius, window="disc")
        got = eta_star_realization(re, params.p_max, params)
        want = ((params.p_max + params.noise_power) ** 2) / params.p_max
        assert got == pytest.approx(want, rel=1e-12)

    def test_empty_rejected(self):
        params = make_params()
        re = Realization(distances=np.array([]), fadings=np.array([]),
                         radius=params.radius, window="disc")
        with pytest.raises(ValueError):
            eta_star_realization(re, 1.0, params)


class TestOptimizeEta:
    def test_interior_optimum_figure_setup(self):
        params = make_params(density=0.05, radius=10.0)
        opt = optimize_eta(params)
        assert not opt.boundary
        assert not opt.extended
        assert 0 < opt.eta < opt.search_hi
        # first-order check: the optimum beats nearby points
        for factor in (0.97, 1.03):
            assert opt.mse <= mse_analytic(params, opt.eta * factor,
                                           opt.variant).total + 1e-15

    def test_respects_variant(self):
        params = make_params()
        a = optimize_eta(params, variant="printed")
        b = optimize_eta(params, variant="rederived")
        assert a.variant == "printed" and b.variant == "rederived"
        assert a.mse > b.mse  # printed carries the extra positive term
