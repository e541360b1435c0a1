"""Acceptance suite: one check per criterion, printed as pass/fail lines.

The suite is what `aircomp validate` runs.  Criterion 3 adjudicates the two
analytical-formula variants against the Monte Carlo estimator over the
device-density grid; criteria 4-6 reuse or extend that machinery.
"""

from __future__ import annotations

import json
import math
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytical import (VARIANTS, eta_star_realization, eta_upper_bound,
                         mse_analytic, optimize_eta)
from .model import NetworkParams, realization_rng, sample_ppp_disc, transmit_power
from .montecarlo import campbell_check, estimate_mse, frozen_power_objective
from .numerics import QuadratureSpec, integrate
from .specfun import (RicianParams, bessel_i0e, marcum_q1,
                      poisson_inverse_moment, rician_pdf)

SEED = 0
SECOND_SEED = 1

FIG_ALPHA = 2.1
FIG_DENSITY = 0.05
FIG_B = 15.0
FIG_SNR_P_MAX = 1000.0  # SNR = 30 dB with noise power 1
FIG2_LAMBDAS = tuple(np.linspace(0.01, 0.1, 10))
FIG2_RADII = (10.0, 40.0)
FIG3_RADIUS = 15.0


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _fig_params(**kw) -> NetworkParams:
    base = dict(density=FIG_DENSITY, radius=FIG2_RADII[0], alpha=FIG_ALPHA,
                epsilon=1.0, rician_b=FIG_B, p_max=FIG_SNR_P_MAX,
                noise_power=1.0)
    base.update(kw)
    return NetworkParams(**base)


# --- criterion 1: special functions -----------------------------------------

def _poisson_inverse_oracle(x: float) -> float:
    """Direct truncated-PMF summation of E[1/K; K >= 1]."""
    m_hi = int(x + 40.0 * math.sqrt(x) + 60.0)
    total = 0.0
    for m in range(1, m_hi + 1):
        total += math.exp(m * math.log(x) - x - math.lgamma(m + 1)) / m
    return total


def criterion_1() -> CriterionResult:
    errs = []
    for a in (0.0, 0.5, 1.0, 2.0, 3.0):
        if marcum_q1(a, 0.0) != 1.0:
            errs.append(f"Q1({a}, 0) != 1")
    for b in (0.1, 0.5, 1.0, 2.0, 5.0):
        if abs(marcum_q1(0.0, b) - math.exp(-b * b / 2.0)) > 1e-12:
            errs.append(f"Q1(0, {b}) off")
    for a in (0.5, 1.0, 2.0, 3.0):
        ident = 0.5 * (1.0 + float(bessel_i0e(a * a)))
        if abs(marcum_q1(a, a) - ident) > 1e-10:
            errs.append(f"Q1({a}, {a}) identity off by "
                        f"{abs(marcum_q1(a, a) - ident):.2e}")
    spec = QuadratureSpec(rel_tol=1e-11, abs_tol=1e-15)
    for b_factor in (0.0, 1.0, 10.0, 15.0, 20.0):
        rp = RicianParams.from_b_factor(b_factor)
        hi = rp.c + 25.0 * rp.sigma
        mass = integrate(lambda v: np.asarray(rician_pdf(v, rp)), 0.0, hi, spec)
        mom2 = integrate(lambda v: np.asarray(v) ** 2 * np.asarray(rician_pdf(v, rp)),
                         0.0, hi, spec)
        if abs(mass - 1.0) > 1e-8:
            errs.append(f"pdf mass at B={b_factor} off by {abs(mass - 1):.2e}")
        if abs(mom2 - 1.0) > 1e-8:
            errs.append(f"second moment at B={b_factor} off by {abs(mom2 - 1):.2e}")
    for x in (0.1, 1.0, 10.0, 100.0):
        diff = abs(poisson_inverse_moment(x) - _poisson_inverse_oracle(x))
        if diff > 1e-10:
            errs.append(f"poisson_inverse_moment({x}) off by {diff:.2e}")
    return CriterionResult(1, "special-function suite", not errs,
                           "; ".join(errs) or "all identities within tolerance")


# --- criterion 2: Campbell oracle --------------------------------------------

def criterion_2(n_iter: int = 10_000) -> CriterionResult:
    params = _fig_params(radius=15.0)
    report = campbell_check(params, n_iter, SEED)
    detail = ", ".join(f"z[{n}]={z:+.2f}" for n, z in
                       zip(report.names, report.z_scores))
    if report.max_abs_z() <= 3.0:
        return CriterionResult(2, "Campbell oracle", True, detail)
    # flaky-test policy: one rerun with a fixed second seed; both must fail
    retry = campbell_check(params, n_iter, SECOND_SEED)
    detail += " | retry " + ", ".join(f"z[{n}]={z:+.2f}" for n, z in
                                      zip(retry.names, retry.z_scores))
    return CriterionResult(2, "Campbell oracle", retry.max_abs_z() <= 3.0, detail)


# --- criteria 3-4: Fig-2 grid -------------------------------------------------

def compute_fig2_grid(n_iter: int = 10_000, mode: str = "clamp") -> list[dict]:
    """Per-point eta optimization, both analytic variants, and Monte Carlo."""
    grid = []
    for radius in FIG2_RADII:
        for lam in FIG2_LAMBDAS:
            params = _fig_params(density=float(lam), radius=radius)
            opt = optimize_eta(params, "rederived")
            analytic = {v: mse_analytic(params, opt.eta, v).total for v in VARIANTS}
            est = estimate_mse(params, opt.eta, n_iter, SEED, mode=mode)
            z = {v: (analytic[v] - est.mean) / est.std_error for v in VARIANTS}
            grid.append({"radius": radius, "density": float(lam), "eta": opt.eta,
                         "analytic": analytic, "mc_mean": est.mean,
                         "mc_stderr": est.std_error, "z": z})
    return grid


def criterion_3(grid: list[dict]) -> CriterionResult:
    matches = []
    lines = []
    for pt in grid:
        matching = [v for v in VARIANTS if abs(pt["z"][v]) <= 3.0]
        matches.append(matching)
        lines.append(f"R={pt['radius']:.0f} lam={pt['density']:.2f} "
                     f"z_rederived={pt['z']['rederived']:+.2f} "
                     f"z_printed={pt['z']['printed']:+.2f} "
                     f"match={matching or ['none']}")
    all_matched = all(m for m in matches)
    counts = {v: sum(v in m for m in matches) for v in VARIANTS}
    named = max(counts, key=counts.get)
    consistent = counts[named] >= 0.9 * len(grid)
    passed = all_matched and consistent
    detail = (f"matching variant: {named} ({counts[named]}/{len(grid)} points); "
              + "; ".join(lines))
    if not all_matched:
        detail += (" | NOTE: the analytical formula factorizes E[1/K] out of the "
                   "random sum; the exact conditional MSE differs by a factor "
                   "mean_count*E[1/K;K>=1] on the misalignment term, which "
                   "exceeds 3 standard errors at moderate device counts")
    return CriterionResult(3, "Theorem adjudication on the density grid",
                           passed, detail)


def _isotonic_decreasing(y: np.ndarray) -> np.ndarray:
    """Least-squares nonincreasing fit by pool-adjacent-violators."""
    vals = list(-y)
    weights = [1.0] * len(vals)
    blocks = []
    for v, w in zip(vals, weights):
        blocks.append([v, w])
        while len(blocks) > 1 and blocks[-2][0] > blocks[-1][0]:
            v2, w2 = blocks.pop()
            v1, w1 = blocks.pop()
            blocks.append([(v1 * w1 + v2 * w2) / (w1 + w2), w1 + w2])
    fit = []
    idx = 0
    for v, w in blocks:
        fit.extend([v] * int(w))
        idx += int(w)
    return -np.array(fit)


def criterion_4(grid: list[dict]) -> CriterionResult:
    msgs = []
    passed = True
    for radius in FIG2_RADII:
        pts = [p for p in grid if p["radius"] == radius]
        means = np.array([p["mc_mean"] for p in pts])
        errs = np.array([p["mc_stderr"] for p in pts])
        strict = bool(np.all(np.diff(means) < 0))
        fit = _isotonic_decreasing(means)
        dev = float(np.max(np.abs(fit - means) / errs))
        ok = strict or dev < 1.0
        passed = passed and ok
        msgs.append(f"R={radius:.0f}: strictly decreasing={strict}, "
                    f"max isotonic deviation={dev:.2f} stderr")
    return CriterionResult(4, "MSE decreasing in device density", passed,
                           "; ".join(msgs))


# --- criterion 5: radius sweep ------------------------------------------------

def criterion_5() -> CriterionResult:
    msgs = []
    passed = True
    for b_factor in (10.0, 15.0, 20.0):
        radii = np.arange(5.0, 40.0 + 1e-9, 1.0)
        mses = np.array([
            optimize_eta(_fig_params(radius=float(r), rician_b=b_factor),
                         "rederived").mse
            for r in radii])
        i = int(np.argmin(mses))
        interior = 0 < i < radii.size - 1
        reduction = 1.0 - mses[i] / mses[0]
        msgs.append(f"B={b_factor:.0f}: R_opt={radii[i]:.0f} m, "
                    f"reduction vs 5 m = {100 * reduction:.1f}%, "
                    f"interior={interior}")
        passed = passed and interior
        if b_factor == 15.0:
            in_band = 10.0 <= radii[i] <= 20.0 and 0.05 <= reduction <= 0.20
            passed = passed and in_band
            if not in_band:
                bound = eta_upper_bound(_fig_params(radius=float(radii[i]),
                                                    rician_b=b_factor))
                msgs.append(
                    "DISCREPANCY: outside the published band; formula-variant "
                    f"gap and bound readings: capped printed "
                    f"{bound.capped_moment_printed:.4g} vs appendix "
                    f"{bound.capped_moment_appendix:.4g}")
    return CriterionResult(5, "optimal access radius", passed, "; ".join(msgs))


# --- criterion 6: eta optimization vs dense grid -------------------------------

def criterion_6() -> CriterionResult:
    params = _fig_params(radius=FIG3_RADIUS)
    opt = optimize_eta(params, "rederived")
    hi = opt.search_hi  # includes any documented safety inflation
    etas = np.exp(np.linspace(math.log(1e-6 * params.noise_power),
                              math.log(hi), 1000))
    mses = np.array([mse_analytic(params, float(e), "rederived").total
                     for e in etas])
    j = int(np.argmin(mses))
    eta_rel = abs(opt.eta - etas[j]) / etas[j]
    mse_rel = abs(opt.mse - mses[j]) / mses[j]
    contained = etas[j] <= hi
    passed = eta_rel <= 0.01 and mse_rel <= 0.001 and contained
    detail = (f"eta_opt={opt.eta:.6g} vs grid {etas[j]:.6g} "
              f"(rel {100 * eta_rel:.2f}%), mse rel {100 * mse_rel:.4f}%, "
              f"bound {hi:.6g} contains grid argmin: {contained}")
    if eta_rel > 0.01:
        step = float(etas[1] / etas[0] - 1.0)
        detail += (f" | NOTE: the 1000-point log grid over the search interval "
                   f"has {100 * step:.2f}% spacing, so its argmin can sit up to "
                   f"half a step (~{50 * step:.2f}%) from the true optimum; the "
                   f"1% eta tolerance is below the oracle's own resolution")
    return CriterionResult(6, "eta optimizer vs dense grid", passed, detail)


# --- criterion 7: per-realization stationary point -----------------------------

def criterion_7() -> CriterionResult:
    params = _fig_params(radius=5.0)  # mean count ~3.9, small realizations
    eta_ref = 5.0
    found = 0
    index = 0
    failures = []
    while found < 20 and index < 10_000:
        re = sample_ppp_disc(realization_rng(SEED, index), params)
        index += 1
        if not 1 <= re.count <= 10:
            continue
        found += 1
        eta_star = eta_star_realization(re, eta_ref, params)
        powers = transmit_power(np.maximum(re.distances, 1.0), re.fadings,
                                eta_ref, params)
        g_star = frozen_power_objective(re, powers, eta_star, params)
        g_up = frozen_power_objective(re, powers, eta_star * 1.1, params)
        g_dn = frozen_power_objective(re, powers, eta_star / 1.1, params)
        if not (g_star <= g_up and g_star <= g_dn):
            failures.append(f"index {index - 1}: G({eta_star:.4g}) above a "
                            "perturbed point")
    passed = found == 20 and not failures
    detail = (f"{found} realizations checked" +
              ("" if not failures else "; " + "; ".join(failures)))
    return CriterionResult(7, "per-realization eta stationarity", passed, detail)


# --- criterion 8: determinism ---------------------------------------------------

def criterion_8() -> CriterionResult:
    from .cli import main as cli_main

    config = {
        "network": {"density": 0.05, "radius": 10.0, "alpha": 2.1,
                    "rician_b": 15.0, "snr_db": 30.0},
        "sweep": {"parameter": "lambda", "from": 0.02, "to": 0.05, "steps": 2},
        "eta_policy": {"fixed": 10.0},
        "mc": {"iters": 300, "seed": 7},
    }
    with tempfile.TemporaryDirectory() as tmp:
        cfg_path = Path(tmp) / "config.json"
        outputs = []
        for run, jobs in (("a", 1), ("b", 1), ("c", 4)):
            cfg = dict(config, output_dir=str(Path(tmp) / run))
            cfg_path.write_text(json.dumps(cfg))
            code = cli_main(["sweep", "--config", str(cfg_path),
                             "--jobs", str(jobs)])
            if code != 0:
                return CriterionResult(8, "determinism", False,
                                       f"sweep exited with code {code}")
            outputs.append((Path(tmp) / run / "results.csv").read_bytes())
    same_run = outputs[0] == outputs[1]
    same_jobs = outputs[0] == outputs[2]
    return CriterionResult(
        8, "determinism", same_run and same_jobs,
        f"repeat run identical: {same_run}; jobs 1 vs 4 identical: {same_jobs}")


# --- runner ---------------------------------------------------------------------

def run_acceptance(numbers: list[int] | None = None,
                   n_iter: int = 10_000) -> list[CriterionResult]:
    wanted = set(numbers) if numbers else set(range(1, 9))
    results: list[CriterionResult] = []
    grid = None
    if wanted & {3, 4}:
        grid = compute_fig2_grid(n_iter=n_iter)
    runners = {
        1: criterion_1,
        2: lambda: criterion_2(n_iter=n_iter),
        3: lambda: criterion_3(grid),
        4: lambda: criterion_4(grid),
        5: criterion_5,
        6: criterion_6,
        7: criterion_7,
        8: criterion_8,
    }
    for number in sorted(wanted):
        t0 = time.time()
        result = runners[number]()
        result.seconds = time.time() - t0
        results.append(result)
        status = "PASS" if result.passed else "FAIL"
        print(f"[{status}] criterion {result.number}: {result.name} "
              f"({result.seconds:.1f}s)\n        {result.detail}")
    return results
