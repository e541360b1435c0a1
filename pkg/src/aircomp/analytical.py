"""Analytical MSE of over-the-air aggregation in the Poisson IoT cell.

Two formula variants are carried side by side because the printed closed form
and its own step-by-step derivation disagree in the constant of the
Marcum-Q-weighted radial integral:

* "printed": constant +2, the closed form as published.
* "rederived": constant 0, obtained by expanding the capped/inverted branch
  split directly (the unit masses of the two branches cancel against the
  CDF/CCDF split).

The Monte Carlo estimator adjudicates between them; reports always state
which variant matched.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import NetworkParams, Realization, transmit_power
from .numerics import MinimizeResult, QuadratureSpec, integrate, minimize_unimodal
from .specfun import marcum_q1, poisson_inverse_moment, rician_pdf

__all__ = [
    "VARIANTS",
    "AnalyticBreakdown",
    "EtaBound",
    "EtaOptimum",
    "mse_analytic",
    "eta_upper_bound",
    "eta_star_realization",
    "optimize_eta",
    "rician_mean",
]

VARIANTS = ("printed", "rederived")

_RADIAL_SPEC = QuadratureSpec(rel_tol=1e-8, abs_tol=1e-14, max_subdivisions=2000)
_FADING_SPEC = QuadratureSpec(rel_tol=1e-9, abs_tol=1e-15, max_subdivisions=2000)

# The Rician density at v > c + 20 sigma carries ~1e-90 of the mass; integrals
# against it are truncated there.
_TAIL_SIGMAS = 20.0


@dataclass(frozen=True)
class AnalyticBreakdown:
    """Term-by-term decomposition of the analytical MSE.

    total = k_factor * (2 pi lambda * (capped_term + geometry_term
            + marcumq_term) + noise_term)
    """

    variant: str
    k_factor: float
    capped_term: float
    geometry_term: float
    marcumq_term: float
    noise_term: float
    total: float


def _power_integral(lo, hi, p: float):
    """Integral of r^p dr from lo to hi, with the p = -1 logarithmic limit."""
    if abs(p + 1.0) < 1e-9:
        return np.log(hi / lo)
    return (np.power(hi, p + 1.0) - np.power(lo, p + 1.0)) / (p + 1.0)


def _fading_cutoff(params: NetworkParams) -> float:
    rp = params.rician()
    return rp.c + _TAIL_SIGMAS * rp.sigma


def mse_analytic(params: NetworkParams, eta: float,
                 variant: str = "rederived") -> AnalyticBreakdown:
    """Evaluate the analytical MSE at denoising factor eta.

    The capped-branch double integral over (r, v) is evaluated with the
    integration order swapped so the radial part is closed-form and a single
    adaptive quadrature over the fading magnitude remains; the Marcum-Q
    weighted term is one adaptive radial quadrature.
    """
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    if not eta > 0:
        raise ValueError("eta must be > 0")
    rp = params.rician()
    alpha, eps, r_max = params.alpha, params.epsilon, params.radius
    s = alpha * eps
    ratio = math.sqrt(params.p_max / eta)  # sqrt(P_max / eta)

    def d_of_r(r):
        return np.power(r, 0.5 * s) / ratio

    v_cap = _fading_cutoff(params)

    if s > 0:
        # v <= D(r)  <=>  r >= (v * ratio)^(2/s)
        v_hi = min(float(d_of_r(r_max)), v_cap)

        def capped_integrand(v):
            v = np.asarray(v, dtype=float)
            with np.errstate(over="ignore"):
                r_lo = np.clip(np.power(v * ratio, 2.0 / s), 1.0, r_max)
            j1 = _power_integral(r_lo, r_max, 1.0 - alpha)
            j2 = _power_integral(r_lo, r_max, 1.0 - 0.5 * alpha)
            return rician_pdf(v, rp) * (ratio ** 2 * v * v * j1
                                        - 2.0 * ratio * v * j2)

        capped_term = integrate(capped_integrand, 0.0, v_hi, _FADING_SPEC) \
            if v_hi > 0 else 0.0
    else:
        # epsilon = 0: the capping threshold is radius-independent
        d_const = 1.0 / ratio
        v_hi = min(d_const, v_cap)
        j1 = float(_power_integral(1.0, r_max, 1.0 - alpha))
        j2 = float(_power_integral(1.0, r_max, 1.0 - 0.5 * alpha))

        def capped_integrand(v):
            v = np.asarray(v, dtype=float)
            return rician_pdf(v, rp) * (ratio ** 2 * v * v * j1
                                        - 2.0 * ratio * v * j2)

        capped_term = integrate(capped_integrand, 0.0, v_hi, _FADING_SPEC) \
            if v_hi > 0 else 0.0

    kappa = 2.0 if variant == "printed" else 0.0
    a_marcum = rp.c / rp.sigma

    def marcum_integrand(r):
        r = np.asarray(r, dtype=float)
        poly = np.power(r, s - alpha) - 2.0 * np.power(r, 0.5 * (s - alpha)) + kappa
        return poly * r * np.asarray(marcum_q1(a_marcum, d_of_r(r) / rp.sigma))

    marcumq_term = integrate(marcum_integrand, 1.0, r_max, _RADIAL_SPEC)

    geometry_term = 0.5 * (r_max ** 2 - 1.0)
    noise_term = params.noise_power / eta
    k_factor = poisson_inverse_moment(params.mean_count)
    bracket = 2.0 * math.pi * params.density * (
        capped_term + geometry_term + marcumq_term) + noise_term
    return AnalyticBreakdown(
        variant=variant,
        k_factor=k_factor,
        capped_term=float(capped_term),
        geometry_term=geometry_term,
        marcumq_term=float(marcumq_term),
        noise_term=noise_term,
        total=k_factor * bracket,
    )


def rician_mean(params: NetworkParams) -> float:
    """E[|h|] by quadrature of v f(v); diagnostic for the search bound."""
    rp = params.rician()
    return integrate(lambda v: np.asarray(v) * np.asarray(rician_pdf(v, rp)),
                     0.0, _fading_cutoff(params), _FADING_SPEC)


@dataclass(frozen=True)
class EtaBound:
    """Upper bound of the denoising-factor search interval.

    The capped-power moment appears in two mutually reciprocal printed
    readings; the safe bound takes the larger.  rician_mean_printed is the
    sqrt(pi/2) sigma value the published ratio uses; rician_mean_exact is the
    quadrature diagnostic.
    """

    value: float
    capped_moment_printed: float
    capped_moment_appendix: float
    ratio_moment: float
    rician_mean_printed: float
    rician_mean_exact: float

    @property
    def components(self) -> tuple[float, float]:
        return (max(self.capped_moment_printed, self.capped_moment_appendix),
                self.ratio_moment)


def eta_upper_bound(params: NetworkParams) -> EtaBound:
    """Maximum denoising factor bounding the search interval."""
    r_max, alpha, eps = params.radius, params.alpha, params.epsilon
    if r_max <= 1.0:
        raise ValueError("radius must exceed 1 m")
    rp = params.rician()
    bracket = 3.0 * r_max ** 2 / (2.0 * (r_max ** 3 - 1.0))
    capped_printed = params.p_max * bracket ** (alpha * eps)
    capped_appendix = params.p_max * (1.0 / bracket) ** (alpha * eps)

    two_pi_lam = 2.0 * math.pi * params.density
    num = two_pi_lam * params.p_max * float(_power_integral(1.0, r_max, 1.0 - alpha)) \
        + params.noise_power
    mean_printed = math.sqrt(math.pi / 2.0) * rp.sigma
    den = two_pi_lam * math.sqrt(params.p_max) \
        * float(_power_integral(1.0, r_max, 1.0 - 0.5 * alpha)) * mean_printed
    ratio_moment = (num / den) ** 2

    return EtaBound(
        value=max(capped_printed, capped_appendix, ratio_moment),
        capped_moment_printed=capped_printed,
        capped_moment_appendix=capped_appendix,
        ratio_moment=ratio_moment,
        rician_mean_printed=mean_printed,
        rician_mean_exact=rician_mean(params),
    )


def eta_star_realization(re: Realization, eta_ref: float,
                         params: NetworkParams, mode: str = "clamp") -> float:
    """Stationary point of the per-realization objective in eta.

    ((sum d^-a P_k h^2 + w^2) / (sum d^-a/2 sqrt(P_k) h))^2, with the
    transmit powers frozen at eta_ref (the power-control branch of each
    device depends on eta; the bound derivation treats powers as given).
    """
    d, h = _effective_devices(re, mode)
    if d.size == 0:
        raise ValueError("empty realization")
    p = transmit_power(d, h, eta_ref, params)
    amp = d ** (-0.5 * params.alpha) * np.sqrt(p) * h
    num = float(np.sum(amp ** 2)) + params.noise_power
    den = float(np.sum(amp))
    return (num / den) ** 2


def _effective_devices(re: Realization, mode: str) -> tuple[np.ndarray, np.ndarray]:
    """Apply the inner-disc policy: clamp distances to 1 m or drop the devices."""
    if mode == "clamp":
        return np.maximum(re.distances, 1.0), re.fadings
    if mode == "annulus":
        keep = re.distances >= 1.0
        return re.distances[keep], re.fadings[keep]
    raise ValueError(f"unknown mode {mode!r}")


@dataclass(frozen=True)
class EtaOptimum:
    eta: float
    mse: float
    variant: str
    bound: EtaBound
    search_hi: float   # after any safety inflation
    boundary: bool     # minimizer flagged an edge cell
    extended: bool     # search interval was inflated beyond the bound


def optimize_eta(params: NetworkParams, variant: str = "rederived",
                 tol: float = 1e-6, safety: float = 10.0,
                 max_extensions: int = 3) -> EtaOptimum:
    """Minimize the analytical MSE over the denoising factor.

    Searches (1e-6 * noise_power, eta_hat] on a log axis; if the minimizer
    lands on the upper edge the interval is inflated by the safety factor
    (at most max_extensions times) and the result is flagged.
    """
    bound = eta_upper_bound(params)
    lo = 1e-6 * params.noise_power
    hi = bound.value

    def objective(eta: float) -> float:
        return mse_analytic(params, eta, variant).total

    extended = False
    result: MinimizeResult = minimize_unimodal(objective, lo, hi, tol=tol)
    for _ in range(max_extensions):
        if not (result.boundary and result.edge == "high"):
            break
        hi *= safety
        extended = True
        result = minimize_unimodal(objective, lo, hi, tol=tol)
    return EtaOptimum(eta=result.x_min, mse=result.g_min, variant=variant,
                      bound=bound, search_hi=hi,
                      boundary=result.boundary, extended=extended)
