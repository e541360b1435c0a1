"""Generic numerical kernels: adaptive 1-D quadrature and bounded scalar minimization.

The quadrature is a globally adaptive Gauss-Kronrod (G7, K15) scheme with the
embedded 7-point Gauss rule providing the per-panel error estimate.  The
minimizer is a golden-section search on a logarithmic axis, preceded by a
coarse log-spaced grid scan that selects the bracketing cell (and guards
against mild non-unimodality).
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "QuadratureSpec",
    "QuadratureError",
    "MinimizeResult",
    "integrate",
    "minimize_unimodal",
]


class QuadratureError(RuntimeError):
    """Raised when the adaptive scheme cannot reach the requested tolerance.

    Carries the best available estimate and its error bound so callers can
    decide whether to accept a degraded result.
    """

    def __init__(self, message: str, best_estimate: float | None = None,
                 error_bound: float | None = None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_bound = error_bound


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0:
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol}")
        if self.abs_tol < 0:
            raise ValueError(f"abs_tol must be >= 0, got {self.abs_tol}")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


# 15-point Kronrod nodes on [-1, 1]; odd-indexed entries are the embedded
# 7-point Gauss nodes (standard QUADPACK constants).
_XK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0, 0.207784955007898, 0.405845151377397,
    0.586087235467691, 0.741531185599394, 0.864864423359769,
    0.949107912342759, 0.991455371120813,
])
_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728, 0.204432940075298,
    0.190350578064785, 0.169004726639267, 0.140653259715525,
    0.104790010322250, 0.063092092629979, 0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def _make_vector_eval(f):
    """Wrap f so it can be called on a node array, probing once for support."""
    probed = {"vectorized": None}

    def evaluate(x: np.ndarray) -> np.ndarray:
        if probed["vectorized"] is not False:
            try:
                y = np.asarray(f(x), dtype=float)
                if y.shape == x.shape:
                    probed["vectorized"] = True
                    return y
            except Exception:
                pass
            probed["vectorized"] = False
        return np.array([float(f(xi)) for xi in x])

    return evaluate


def _gk15(evaluate, a: float, b: float) -> tuple[float, float]:
    """One Gauss-Kronrod panel: returns (K15 estimate, error estimate)."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = evaluate(mid + half * _XK)
    if not np.all(np.isfinite(y)):
        raise QuadratureError(
            f"integrand returned a non-finite value on [{a!r}, {b!r}]")
    ik = half * float(_WK @ y)
    ig = half * float(_WG @ y[1::2])
    # QUADPACK-style sharpened error estimate
    mean = ik / (b - a)
    resasc = half * float(_WK @ np.abs(y - mean))
    diff = abs(ik - ig)
    if resasc > 0 and diff > 0:
        err = resasc * min(1.0, (200.0 * diff / resasc) ** 1.5)
    else:
        err = diff
    return ik, err


def integrate(f, a: float, b: float, spec: QuadratureSpec | None = None) -> float:
    """Adaptive integral of f over [a, b] to within max(abs_tol, rel_tol*|I|)."""
    if spec is None:
        spec = QuadratureSpec()
    if not (math.isfinite(a) and math.isfinite(b)):
        raise ValueError("integration limits must be finite")
    if a > b:
        raise ValueError(f"require a <= b, got a={a!r}, b={b!r}")
    if a == b:
        return 0.0

    evaluate = _make_vector_eval(f)
    val, err = _gk15(evaluate, a, b)
    # max-heap of panels keyed by error (heapq is a min-heap; negate)
    panels = [(-err, a, b, val, err)]
    total = val
    total_err = err
    for _ in range(spec.max_subdivisions):
        if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
            return total
        _, pa, pb, pval, perr = heapq.heappop(panels)
        pm = 0.5 * (pa + pb)
        if pm <= pa or pm >= pb:
            # interval no longer splittable in double precision
            heapq.heappush(panels, (-perr, pa, pb, pval, perr))
            break
        lv, le = _gk15(evaluate, pa, pm)
        rv, re_ = _gk15(evaluate, pm, pb)
        total += lv + rv - pval
        total_err += le + re_ - perr
        heapq.heappush(panels, (-le, pa, pm, lv, le))
        heapq.heappush(panels, (-re_, pm, pb, rv, re_))
    if total_err <= max(spec.abs_tol, spec.rel_tol * abs(total)):
        return total
    raise QuadratureError(
        f"quadrature did not converge after {spec.max_subdivisions} "
        f"subdivisions (estimate {total!r}, error bound {total_err!r})",
        best_estimate=total, error_bound=total_err)


_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class MinimizeResult:
    x_min: float
    g_min: float
    boundary: bool  # True when the grid pre-scan minimum sat on an edge cell
    edge: str | None = None  # "low" or "high" when boundary is True


def minimize_unimodal(g, lo: float, hi: float, tol: float = 1e-6,
                      grid_points: int = 64) -> MinimizeResult:
    """Minimize g over [lo, hi] via log-axis grid pre-scan + golden section.

    The pre-scan (>= 64 log-spaced points, ties broken toward the lowest
    argument) selects the bracketing cell; golden-section search then runs in
    log-argument space until the bracket's relative width falls below tol.
    The returned point is never worse than the best grid point.
    """
    if not (0 < lo < hi):
        raise ValueError(f"require 0 < lo < hi, got lo={lo!r}, hi={hi!r}")
    if grid_points < 64:
        grid_points = 64

    xs = np.exp(np.linspace(math.log(lo), math.log(hi), grid_points))
    gs = np.array([float(g(x)) for x in xs])
    if not np.all(np.isfinite(gs)):
        raise ValueError("objective returned a non-finite value during pre-scan")
    best = int(np.argmin(gs))  # argmin takes the first (lowest-argument) tie

    boundary = best == 0 or best == grid_points - 1
    edge = "low" if best == 0 else "high" if best == grid_points - 1 else None
    la = math.log(xs[max(best - 1, 0)])
    lb = math.log(xs[min(best + 1, grid_points - 1)])

    # golden-section on t = log(x)
    h = lb - la
    c = la + (1.0 - _INV_PHI) * h
    d = la + _INV_PHI * h
    gc = float(g(math.exp(c)))
    gd = float(g(math.exp(d)))
    while h > tol:
        if gc < gd:
            lb, d, gd = d, c, gc
            h = lb - la
            c = la + (1.0 - _INV_PHI) * h
            gc = float(g(math.exp(c)))
        else:
            la, c, gc = c, d, gd
            h = lb - la
            d = la + _INV_PHI * h
            gd = float(g(math.exp(d)))

    if gc < gd:
        x_min, g_min = math.exp(c), gc
    else:
        x_min, g_min = math.exp(d), gd
    # never return a point worse than the best pre-scan grid point
    if gs[best] < g_min:
        x_min, g_min = float(xs[best]), float(gs[best])
    return MinimizeResult(x_min=x_min, g_min=g_min, boundary=boundary, edge=edge)
