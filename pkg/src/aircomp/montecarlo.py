"""Empirical MSE estimation over sampled network realizations.

The per-realization MSE is the conditional expectation over symbols and
noise, so Monte Carlo variance comes only from the layout, the device count,
and the fading draws.  Iteration i always uses the random stream derived
from (seed, i); runs are therefore bit-identical regardless of worker count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from multiprocessing import Pool

import numpy as np

from .analytical import _effective_devices, _fading_cutoff, _power_integral
from .model import NetworkParams, Realization, realization_rng, sample_ppp_disc, \
    transmit_power
from .numerics import QuadratureSpec, integrate
from .specfun import rician_pdf

__all__ = [
    "EmptyRealizationError",
    "MseEstimate",
    "CampbellReport",
    "realization_mse",
    "frozen_power_objective",
    "estimate_mse",
    "campbell_check",
]


class EmptyRealizationError(ValueError):
    """Raised when a realization has no devices after mode filtering."""


@dataclass(frozen=True)
class MseEstimate:
    mean: float
    std_error: float
    n_total: int
    n_used: int
    mode: str

    def __post_init__(self):
        if self.n_used > self.n_total:
            raise ValueError("n_used cannot exceed n_total")


def frozen_power_objective(re: Realization, powers: np.ndarray, eta: float,
                           params: NetworkParams, mode: str = "clamp") -> float:
    """Per-realization objective in eta with the transmit powers held fixed."""
    if not eta > 0:
        raise ValueError("eta must be > 0")
    d, h = _effective_devices(re, mode)
    k = d.size
    if k == 0:
        raise EmptyRealizationError("realization has no devices")
    amp = d ** (-0.5 * params.alpha) * np.sqrt(powers) * h / math.sqrt(eta)
    return (float(np.sum((amp - 1.0) ** 2)) + params.noise_power / eta) / k


def realization_mse(re: Realization, eta: float, params: NetworkParams,
                    mode: str = "clamp") -> float:
    """Conditional MSE of one realization at denoising factor eta."""
    d, h = _effective_devices(re, mode)
    if d.size == 0:
        raise EmptyRealizationError("realization has no devices")
    powers = transmit_power(d, h, eta, params)
    return frozen_power_objective(re, powers, eta, params, mode)


def _mc_chunk(args) -> list[float]:
    params, eta, seed, indices, mode, window = args
    out = []
    for i in indices:
        re = sample_ppp_disc(realization_rng(seed, i), params, window=window)
        d, _ = _effective_devices(re, mode)
        if d.size == 0:
            out.append(math.nan)  # skipped iteration marker
        else:
            out.append(realization_mse(re, eta, params, mode))
    return out


def estimate_mse(params: NetworkParams, eta: float, n_iter: int, seed: int,
                 mode: str = "clamp", window: str = "disc",
                 n_jobs: int = 1) -> MseEstimate:
    """Sample mean and standard error of the MSE over n_iter realizations.

    Empty realizations are skipped (the device-count expectation conditions
    on K >= 1).  The reduction runs in iteration order, so the result does
    not depend on n_jobs.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be >= 1")
    if not eta > 0:
        raise ValueError("eta must be > 0")
    indices = list(range(n_iter))
    if n_jobs <= 1:
        values = _mc_chunk((params, eta, seed, indices, mode, window))
    else:
        chunks = [indices[j::n_jobs] for j in range(n_jobs)]
        with Pool(processes=n_jobs) as pool:
            parts = pool.map(_mc_chunk, [
                (params, eta, seed, chunk, mode, window) for chunk in chunks])
        values = [math.nan] * n_iter
        for chunk, part in zip(chunks, parts):
            for i, v in zip(chunk, part):
                values[i] = v
    samples = np.array([v for v in values if not math.isnan(v)])
    n_used = samples.size
    if n_used == 0:
        raise EmptyRealizationError("no non-empty realizations")
    mean = float(np.mean(samples))
    std_error = float(np.std(samples, ddof=1) / math.sqrt(n_used)) if n_used > 1 else 0.0
    return MseEstimate(mean=mean, std_error=std_error,
                       n_total=n_iter, n_used=n_used, mode=mode)


@dataclass(frozen=True)
class CampbellReport:
    """Empirical vs quadrature means of additive functionals over the annulus."""

    names: tuple[str, ...]
    empirical: tuple[float, ...]
    target: tuple[float, ...]
    z_scores: tuple[float, ...]
    n_iter: int

    def max_abs_z(self) -> float:
        return max(abs(z) for z in self.z_scores)


def campbell_check(params: NetworkParams, n_iter: int, seed: int,
                   window: str = "disc") -> CampbellReport:
    """Check E[sum_k g(d_k, h_k)] against 2 pi lambda int_1^R E_v[g] r dr.

    Test functionals over devices with d in [1, R]: the count, the received
    power sum d^-a h^2, and the received amplitude sum d^-a/2 h.
    """
    if n_iter < 1000:
        raise ValueError("campbell_check needs n_iter >= 1000")
    alpha = params.alpha
    sums = np.zeros((n_iter, 3))
    for i in range(n_iter):
        re = sample_ppp_disc(realization_rng(seed, i), params, window=window)
        keep = re.distances >= 1.0
        d = re.distances[keep]
        h = re.fadings[keep]
        sums[i] = (d.size,
                   float(np.sum(d ** -alpha * h ** 2)),
                   float(np.sum(d ** (-0.5 * alpha) * h)))

    rp = params.rician()
    spec = QuadratureSpec(rel_tol=1e-10, abs_tol=1e-14)
    mean_h = integrate(lambda v: np.asarray(v) * np.asarray(rician_pdf(v, rp)),
                       0.0, _fading_cutoff(params), spec)
    two_pi_lam = 2.0 * math.pi * params.density
    r_max = params.radius
    targets = (
        params.density * math.pi * (r_max ** 2 - 1.0),
        two_pi_lam * float(_power_integral(1.0, r_max, 1.0 - alpha)),  # E[h^2] = 1
        two_pi_lam * float(_power_integral(1.0, r_max, 1.0 - 0.5 * alpha)) * mean_h,
    )
    emp = sums.mean(axis=0)
    se = sums.std(axis=0, ddof=1) / math.sqrt(n_iter)
    z = tuple(float((e - t) / s) for e, t, s in zip(emp, targets, se))
    return CampbellReport(
        names=("count", "received_power", "received_amplitude"),
        empirical=tuple(float(v) for v in emp),
        target=targets, z_scores=z, n_iter=n_iter)
