"""Force-curve sweeps and their structure: equilibria, self-propelled
pairs, oscillation wavelength.

Zero crossings of the total force are bracketed on the sampled grid and
refined by bisection on the full force (curves alias badly when
interpolated, so refinement re-evaluates the force).  Stability follows
the attraction-positive sign convention: a zero where the force turns
from repulsive (negative) to attractive (positive) with growing
separation restores the separation and is stable.

A self-propelled pair is a separation where both spheres accelerate
equally along the axis, so the pair translates at fixed separation.
"""

import math
import warnings
from dataclasses import dataclass, replace

import numpy as np

from .constants import thermal_wavelength
from .quadrature import DEFAULT_SETTINGS
from .sphere_plate import SpherePlateSystem, total_force_on_sphere
from .two_spheres import (TwoSphereSystem, ForceBreakdown,
                          total_force_on_sphere1, total_force_on_sphere2)

__all__ = [
    "CurveSample", "ForceCurve", "EquilibriumPoint", "SppPoint",
    "WavelengthEstimate", "AnalysisError", "default_grid", "force_curve",
    "find_equilibria", "find_spp", "oscillation_wavelength",
]


class AnalysisError(ValueError):
    pass


@dataclass
class CurveSample:
    """Breakdowns of the forces on both bodies at one separation."""

    d: float
    breakdown1: ForceBreakdown
    breakdown2: ForceBreakdown


@dataclass
class ForceCurve:
    """Sampled force curve plus the system/settings that produced it."""

    system: object
    settings: object
    samples: list

    @property
    def d(self):
        return np.array([s.d for s in self.samples])

    def totals(self, body=2):
        return np.array([
            (s.breakdown2 if body == 2 else s.breakdown1).total
            for s in self.samples])


@dataclass
class EquilibriumPoint:
    d_star: float
    stability: str          # "stable" | "unstable"
    bracket: tuple          # (d_lo, d_hi)


@dataclass
class SppPoint:
    d_star: float
    stability: str          # "stable" | "unstable"
    mass_ratio: float       # m2 / m1


@dataclass
class WavelengthEstimate:
    wavelength: float       # m
    std: float              # m, spread of the per-gap estimates
    n_zeros: int

    def __float__(self):
        return self.wavelength


def _at_separation(system, d):
    return replace(system, separation=float(d))


def _breakdowns(system, settings):
    if isinstance(system, TwoSphereSystem):
        return (total_force_on_sphere1(system, settings),
                total_force_on_sphere2(system, settings))
    b = total_force_on_sphere(system, settings)
    # Only the sphere force is modeled in this geometry; both slots carry it.
    return b, b


def default_grid(system, points=200):
    """Log grid from 4*max(R) to 20*lambda_T of the coldest nonzero
    temperature (the oscillatory far field lives at multiples of
    lambda_T)."""
    if isinstance(system, TwoSphereSystem):
        radii = (system.sphere1.radius, system.sphere2.radius)
        temps = (system.sphere1.temperature, system.sphere2.temperature,
                 system.t_env)
    else:
        radii = (system.sphere.radius,)
        temps = (system.sphere.temperature, system.plate.temperature,
                 system.t_env)
    nonzero = [t for t in temps if t > 0]
    if not nonzero:
        raise AnalysisError("default grid needs one nonzero temperature")
    lo = 4.0 * max(radii)
    hi = 20.0 * thermal_wavelength(min(nonzero))
    return np.geomspace(lo, hi, points)


def force_curve(system, d_grid, settings=DEFAULT_SETTINGS):
    """Evaluate both force breakdowns over a sorted separation grid.

    Per-point numerical failures are recorded as NaN samples flagged
    non-converged instead of aborting the sweep.
    """
    d_grid = np.asarray(d_grid, dtype=float)
    if d_grid.ndim != 1 or len(d_grid) < 1:
        raise AnalysisError("d_grid must be a non-empty 1-d array")
    if np.any(np.diff(d_grid) <= 0):
        raise AnalysisError("d_grid must be strictly increasing")
    samples = []
    for d in d_grid:
        sys_d = _at_separation(system, d)
        try:
            b1, b2 = _breakdowns(sys_d, settings)
        except (ArithmeticError, RuntimeError) as exc:
            warnings.warn(f"force evaluation failed at d = {d:.6g} m: {exc}",
                          RuntimeWarning)
            nan = ForceBreakdown(math.nan, math.nan, math.nan, math.nan,
                                 converged=False)
            b1 = b2 = nan
        samples.append(CurveSample(d=float(d), breakdown1=b1, breakdown2=b2))
    return ForceCurve(system=system, settings=settings, samples=samples)


def _bisect(fn, lo, hi, f_lo, f_hi, rel_tol=1e-4):
    """Bisection on a bracketed sign change of the full force."""
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid, mid, f_lo, f_hi
        if (f_lo < 0) != (f_mid < 0):
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return lo, hi, f_lo, f_hi


def find_equilibria(curve, body=2, rel_tol=1e-4):
    """Zero-force separations of the sampled curve, bisection-refined.

    Stability from the crossing direction with increasing d:
    negative -> positive (repulsive to attractive) is stable.
    """
    if len(curve.samples) < 2:
        raise AnalysisError("curve needs at least 2 samples")
    d = curve.d
    f = curve.totals(body)

    def force_at(x):
        sys_x = _at_separation(curve.system, x)
        b1, b2 = _breakdowns(sys_x, curve.settings)
        return (b2 if body == 2 else b1).total

    points = []
    for i in range(len(d) - 1):
        if not (np.isfinite(f[i]) and np.isfinite(f[i + 1])):
            continue
        if f[i] == 0.0 or (f[i] < 0) == (f[i + 1] < 0):
            continue
        lo, hi, f_lo, f_hi = _bisect(force_at, d[i], d[i + 1],
                                     f[i], f[i + 1], rel_tol)
        stability = "stable" if f_lo < 0 else "unstable"
        points.append(EquilibriumPoint(d_star=0.5 * (lo + hi),
                                       stability=stability,
                                       bracket=(lo, hi)))
    return points


def find_spp(curve, masses=None, rel_tol=1e-4):
    """Self-propelled pair points of a two-sphere curve.

    With the axis pointing from sphere 1 to sphere 2 and attraction
    positive, the axial accelerations are a1 = +F1/m1 and a2 = -F2/m2;
    an SPP solves a1 = a2.  Stability: the pair restores its separation
    when d(a2 - a1)/dd < 0.  Default masses scale as solid spheres,
    m_j proportional to R_j^3, so only the mass ratio enters.
    """
    system = curve.system
    if not isinstance(system, TwoSphereSystem):
        raise AnalysisError("self-propelled pairs need a two-sphere system")
    if masses is None:
        m1 = system.sphere1.radius ** 3
        m2 = system.sphere2.radius ** 3
    else:
        m1, m2 = masses
        if m1 <= 0 or m2 <= 0:
            raise AnalysisError("masses must be positive")
    mass_ratio = m2 / m1

    d = curve.d
    f1 = curve.totals(body=1)
    f2 = curve.totals(body=2)
    h = -f2 / m2 - f1 / m1      # a2 - a1

    def h_at(x):
        sys_x = _at_separation(system, x)
        b1, b2 = _breakdowns(sys_x, curve.settings)
        return -b2.total / m2 - b1.total / m1

    points = []
    for i in range(len(d) - 1):
        if not (np.isfinite(h[i]) and np.isfinite(h[i + 1])):
            continue
        if h[i] == 0.0 or (h[i] < 0) == (h[i + 1] < 0):
            continue
        lo, hi, h_lo, h_hi = _bisect(h_at, d[i], d[i + 1],
                                     h[i], h[i + 1], rel_tol)
        stability = "stable" if h_lo > 0 else "unstable"
        points.append(SppPoint(d_star=0.5 * (lo + hi), stability=stability,
                               mass_ratio=mass_ratio))
    return points


def oscillation_wavelength(curve_or_d, values=None, component="self_emission"):
    """Oscillation wavelength from the zero spacings of the self term.

    Consecutive zeros of an oscillation are half a period apart, so the
    wavelength is twice the mean spacing; the spread of the individual
    gap estimates is reported as std.  Accepts a ForceCurve (using the
    chosen breakdown component of body 2) or plain (d, values) arrays.
    Requires at least 4 zero crossings.
    """
    if values is None:
        curve = curve_or_d
        d = curve.d
        vals = np.array([getattr(s.breakdown2, component)
                         for s in curve.samples])
    else:
        d = np.asarray(curve_or_d, dtype=float)
        vals = np.asarray(values, dtype=float)
    finite = np.isfinite(vals)
    d, vals = d[finite], vals[finite]
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    zeros = []
    for i in sign_change:
        frac = vals[i] / (vals[i] - vals[i + 1])
        zeros.append(d[i] + frac * (d[i + 1] - d[i]))
    if len(zeros) < 4:
        raise AnalysisError(
            f"need at least 4 zero crossings of the oscillatory term, "
            f"found {len(zeros)}")
    gaps = np.diff(zeros)
    return WavelengthEstimate(wavelength=2.0 * float(np.mean(gaps)),
                              std=2.0 * float(np.std(gaps)),
                              n_zeros=len(zeros))
