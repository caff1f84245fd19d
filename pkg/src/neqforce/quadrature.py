"""Adaptive integral engines for thermally weighted spectra.

Three integral shapes recur in fluctuation-force kernels: frequency
integrals weighted by the Bose occupation, oscillatory integrals with a
distance-set phase, and exponentially damped wavevector integrals.  All
three run on one batched adaptive Gauss-Kronrod (7,15) core.  A Matsubara
summation with a geometric tail bound serves the equilibrium baselines.

Integrands must be vectorized: they receive a 1-d numpy array of
abscissae and return an array of the same length (real or complex).
"""

import math
from dataclasses import dataclass

import numpy as np

from .constants import HBAR, K_B

__all__ = [
    "QuadratureSettings",
    "IntegralResult",
    "DivergentSumError",
    "ConvergenceWarning",
    "bose_weighted_integral",
    "oscillatory_tail_integral",
    "evanescent_integral",
    "matsubara_sum",
]


class DivergentSumError(RuntimeError):
    """Matsubara terms kept growing; the summand does not decay."""


class ConvergenceWarning(UserWarning):
    """An adaptive integral stopped before reaching its tolerance."""


@dataclass(frozen=True)
class QuadratureSettings:
    """Tolerances and truncation controls shared by all engines.

    rel_tol            relative tolerance on converged values
    abs_floor          absolute error floor (units of the integral value)
    bose_cutoff_x      dimensionless cutoff hbar*omega/(k_B T) of Bose-weighted
                       integrals; also sets damped-integral truncation
    max_subdivisions   cap on the total number of segments per integral
    matsubara_tail_tol relative size at which the Matsubara tail is dropped
    """

    rel_tol: float = 1e-6
    abs_floor: float = 1e-30
    bose_cutoff_x: float = 60.0
    max_subdivisions: int = 10000
    matsubara_tail_tol: float = 1e-9

    def __post_init__(self):
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be > 0")
        if self.bose_cutoff_x < 20:
            raise ValueError("bose_cutoff_x must be >= 20")
        if self.max_subdivisions < 4:
            raise ValueError("max_subdivisions must be >= 4")


DEFAULT_SETTINGS = QuadratureSettings()


@dataclass
class IntegralResult:
    """Value plus error bookkeeping for one adaptive integral."""

    value: complex
    error_estimate: float
    evaluations: int
    converged: bool


# 15-point Kronrod extension of 7-point Gauss (nodes on [-1, 1]).
_XGK_HALF = np.array([
    0.991455371120813, 0.949107912342759, 0.864864423359769,
    0.741531185599394, 0.586087235467691, 0.405845151377397,
    0.207784955007898, 0.0,
])
_WGK_HALF = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
])
_WG_HALF = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
])

_XGK = np.concatenate([-_XGK_HALF[:-1], _XGK_HALF[::-1]])
_WGK = np.concatenate([_WGK_HALF[:-1], _WGK_HALF[::-1]])
_WG = np.zeros(15)
_WG[1::2] = np.concatenate([_WG_HALF[:-1], _WG_HALF[::-1]])

_EPS = np.finfo(float).eps


def _rule_error(y, resk_u, resg_u, half):
    """Kronrod-vs-Gauss error model per segment (QUADPACK style), real y."""
    resabs = np.abs(y) @ _WGK * half
    reskh = 0.5 * resk_u
    resasc = (np.abs(y - reskh[:, None]) @ _WGK) * half
    err = np.abs((resk_u - resg_u) * half)
    safe = np.where(resasc > 0.0, resasc, 1.0)
    scaled = resasc * np.minimum(1.0, (200.0 * err / safe) ** 1.5)
    err = np.where((resasc > 0.0) & (err > 0.0), scaled, err)
    return np.maximum(err, 50.0 * _EPS * resabs)


def _eval_segments(f, a, b):
    """Apply the (7,15) pair on each [a_i, b_i]; one vectorized call of f."""
    half = 0.5 * (b - a)
    center = 0.5 * (a + b)
    nodes = center[:, None] + half[:, None] * _XGK[None, :]
    y = np.asarray(f(nodes.ravel())).reshape(len(a), 15)
    resk_u = y @ _WGK
    resg_u = y @ _WG
    vals = resk_u * half
    if np.iscomplexobj(y):
        err = (_rule_error(y.real, resk_u.real, resg_u.real, half)
               + _rule_error(y.imag, resk_u.imag, resg_u.imag, half))
    else:
        err = _rule_error(y, resk_u, resg_u, half)
    return vals, err, y.size


def _fsum_values(vals):
    if np.iscomplexobj(vals):
        return complex(math.fsum(vals.real), math.fsum(vals.imag))
    return math.fsum(vals)


def _adaptive(f, edges, settings):
    """Refine the worst segments until the global tolerance is met.

    Segment sums use exact compensated accumulation (math.fsum), so the
    alternating-sign cancellation of oscillatory kernels does not build up
    rounding error.
    """
    edges = np.asarray(edges, dtype=float)
    a, b = edges[:-1], edges[1:]
    vals, errs, n_eval = _eval_segments(f, a, b)
    evals = n_eval
    while True:
        total = _fsum_values(vals)
        err_total = math.fsum(errs)
        tol = max(settings.rel_tol * abs(total), settings.abs_floor)
        if err_total <= tol:
            return IntegralResult(total, err_total, evals, True)
        room = settings.max_subdivisions - len(a)
        if room <= 0:
            return IntegralResult(total, err_total, evals, False)
        # Split every segment that exceeds an equidistributed error budget;
        # at least one segment always does when the total is above tol.
        over = errs > tol / len(a)
        if not np.any(over):
            over[np.argmax(errs)] = True
        idx = np.flatnonzero(over)
        if len(idx) > room:
            idx = idx[np.argsort(errs[idx])[::-1][:room]]
        mid = 0.5 * (a[idx] + b[idx])
        new_a = np.concatenate([a[idx], mid])
        new_b = np.concatenate([mid, b[idx]])
        new_vals, new_errs, n_eval = _eval_segments(f, new_a, new_b)
        evals += n_eval
        keep = np.ones(len(a), dtype=bool)
        keep[idx] = False
        a = np.concatenate([a[keep], new_a])
        b = np.concatenate([b[keep], new_b])
        vals = np.concatenate([vals[keep], new_vals])
        errs = np.concatenate([errs[keep], new_errs])


def _merge_edges(lo, hi, base, breakpoints):
    """Sorted unique edges on [lo, hi], with bracketed breakpoints inserted."""
    pts = [np.asarray(base, dtype=float)]
    bp = np.asarray(breakpoints, dtype=float)
    if bp.size:
        bp = bp[(bp > lo) & (bp < hi)]
        # Bracket each seeded feature so a narrow peak gets its own segment.
        pts.append(bp)
        pts.append(np.clip(bp * 0.95, lo, hi))
        pts.append(np.clip(bp * 1.05, lo, hi))
    edges = np.unique(np.concatenate(pts))
    edges[0], edges[-1] = lo, hi
    return np.unique(edges)


def bose_weighted_integral(f, temperature, settings=DEFAULT_SETTINGS,
                           breakpoints=(), extra_edges=()):
    """Integral of f(omega) * n(omega, T) over omega > 0.

    n is the Bose occupation 1/(exp(hbar*omega/k_B T) - 1).  The range is
    truncated to [1e-6, 1] * omega_max with omega_max = bose_cutoff_x *
    k_B*T/hbar.  Integrands that are regular after Bose weighting keep a
    small residual mass below the lower cutoff; it is restored by a
    midpoint-rule estimate (exact to O(omega_min^3) for smooth kernels),
    whose first-order spread is added to the error estimate.  T = 0
    returns exactly zero without evaluating f.
    """
    if temperature < 0:
        raise ValueError("temperature must be >= 0")
    if temperature == 0:
        return IntegralResult(0.0, 0.0, 0, True)
    omega_max = settings.bose_cutoff_x * K_B * temperature / HBAR
    omega_min = 1e-6 * omega_max
    x_scale = HBAR / (K_B * temperature)

    def weighted(w):
        return f(w) / np.expm1(x_scale * w)

    base = np.geomspace(omega_min, omega_max, 17)
    extra = np.asarray(extra_edges, dtype=float)
    if extra.size:
        extra = extra[(extra > omega_min) & (extra < omega_max)]
        base = np.union1d(base, extra)
    edges = _merge_edges(omega_min, omega_max, base, breakpoints)
    result = _adaptive(weighted, edges, settings)
    probe = np.asarray(weighted(np.array([0.5 * omega_min, omega_min])))
    tail = omega_min * probe[0]
    result.value = result.value + tail
    result.error_estimate += 0.5 * omega_min * float(abs(probe[1] - probe[0]))
    result.evaluations += 2
    return result


def oscillatory_tail_integral(g, phase_scale, omega_max,
                              settings=DEFAULT_SETTINGS, breakpoints=()):
    """Integral of g(omega) * exp(i*phase_scale*omega) on [0, omega_max].

    The interval is pre-partitioned into half oscillation periods
    pi/phase_scale so that each segment sees at most one sign change of
    the phase factor; segments are then refined adaptively and summed
    with compensated accumulation.  The result is complex; callers take
    the component they need.  phase_scale = 0 degenerates to a plain
    adaptive integral of g.
    """
    if phase_scale < 0:
        raise ValueError("phase_scale must be >= 0")
    if omega_max <= 0:
        raise ValueError("omega_max must be > 0")

    def integrand(w):
        val = np.asarray(g(w), dtype=complex)
        if phase_scale > 0.0:
            val = val * np.exp(1j * phase_scale * w)
        return val

    half_period = math.pi / phase_scale if phase_scale > 0 else math.inf
    if half_period >= omega_max:
        base = np.linspace(0.0, omega_max, 9)
    else:
        n_seg = int(math.ceil(omega_max / half_period))
        if n_seg > settings.max_subdivisions:
            n_seg = settings.max_subdivisions
        base = np.linspace(0.0, omega_max, n_seg + 1)
    edges = _merge_edges(0.0, omega_max, base, breakpoints)
    return _adaptive(integrand, edges, settings)


def evanescent_integral(h, q_scale, settings=DEFAULT_SETTINGS,
                        breakpoints=()):
    """Integral of h(q) on (0, q_max) for exponentially damped kernels.

    q is the decaying transverse wavevector variable; the damping scale
    q_scale (typically twice the separation) sets the truncation
    q_max = bose_cutoff_x / q_scale, beyond which an exp(-q_scale*q)
    kernel retains less than exp(-bose_cutoff_x) of its peak.
    """
    if q_scale <= 0:
        raise ValueError("q_scale must be > 0")
    q_max = settings.bose_cutoff_x / q_scale
    base = np.concatenate([[0.0], q_max * np.geomspace(1e-4, 1.0, 13)])
    edges = _merge_edges(0.0, q_max, base, breakpoints)
    return _adaptive(h, edges, settings)


def matsubara_sum(g, temperature, settings=DEFAULT_SETTINGS):
    """k_B*T * [g(0)/2 + sum_{n>=1} g(xi_n)] with xi_n = 2*pi*n*k_B*T/hbar.

    Truncates once two consecutive terms fall below matsubara_tail_tol
    times the running sum; a geometric bound on the dropped tail is added
    to the error estimate.  Five consecutive growing terms raise
    DivergentSumError.
    """
    if temperature <= 0:
        raise ValueError("matsubara_sum requires T > 0")
    xi1 = 2.0 * math.pi * K_B * temperature / HBAR
    terms = [0.5 * float(g(np.array([0.0]))[0])]
    evals = 1
    growth_streak = 0
    small_streak = 0
    prev_mag = None
    converged = False
    n = 0
    while n < settings.max_subdivisions:
        n += 1
        t = float(g(np.array([n * xi1]))[0])
        evals += 1
        terms.append(t)
        mag = abs(t)
        if prev_mag is not None:
            if mag > prev_mag and mag > 0:
                growth_streak += 1
                if growth_streak >= 5:
                    raise DivergentSumError(
                        "Matsubara terms grew for 5 consecutive indices "
                        f"(n = {n}); summand does not decay")
            else:
                growth_streak = 0
        partial = math.fsum(terms)
        if mag <= settings.matsubara_tail_tol * abs(partial):
            small_streak += 1
            if small_streak >= 2:
                converged = True
                break
        else:
            small_streak = 0
        prev_mag = mag
    total = math.fsum(terms)
    # Geometric tail bound from the last observed decay ratio.
    tail = 0.0
    if len(terms) >= 3 and abs(terms[-1]) > 0:
        ratio = abs(terms[-1]) / abs(terms[-2]) if abs(terms[-2]) > 0 else 1.0
        if ratio < 1.0:
            tail = abs(terms[-1]) * ratio / (1.0 - ratio)
        else:
            tail = abs(terms[-1])
    value = K_B * temperature * total
    err = K_B * temperature * tail
    return IntegralResult(value, err, evals, converged)


def refined_trapezoid(g, x_max, settings=DEFAULT_SETTINGS, n_start=129):
    """Trapezoid rule on [0, x_max] with doubling until the value settles.

    Used for zero-temperature imaginary-axis integrals, where the kernel
    is smooth and exponentially decaying; the returned error estimate is
    the last refinement change.
    """
    if x_max <= 0:
        raise ValueError("x_max must be > 0")
    x = np.linspace(0.0, x_max, n_start)
    y = np.asarray(g(x), dtype=float)
    evals = x.size
    h = x[1] - x[0]
    val = float(np.trapz(y, dx=h))
    err = math.inf
    converged = False
    while x.size <= 2 ** 21:
        mids = 0.5 * (x[:-1] + x[1:])
        y_mid = np.asarray(g(mids), dtype=float)
        evals += mids.size
        h *= 0.5
        new_val = 0.5 * val + h * float(np.sum(y_mid))
        err = abs(new_val - val)
        val = new_val
        merged = np.empty(x.size + mids.size)
        merged[0::2] = x
        merged[1::2] = mids
        x = merged
        merged_y = np.empty_like(merged)
        merged_y[0::2] = y
        merged_y[1::2] = y_mid
        y = merged_y
        if err <= max(settings.rel_tol * abs(val), settings.abs_floor):
            converged = True
            break
    return IntegralResult(val, err, evals, converged)
