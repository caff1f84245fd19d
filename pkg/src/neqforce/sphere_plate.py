"""Forces on a small sphere facing a half-space plate.

The plate-sourced term splits into a propagating part (radiation
pressure of far-field photons, independent of separation) and an
evanescent near-field part damped as exp(-2 d q).  The sphere's own
emission, scattered back by the plate, oscillates with separation like
the two-sphere self term and falls off at large d.  Equilibrium is the
dipole Casimir force over the plate's imaginary-axis reflection.

Separation d is measured from the sphere center to the plate surface;
positive force = attraction toward the plate.

The transverse-wavevector integrals at fixed frequency are smooth
(damped or at most half-period oscillatory per segment), so they use
fixed composite Gauss-Kronrod rules evaluated for a whole batch of
frequencies at once; the outer frequency integral is adaptive, seeded
with material resonances and with the half-period spacing pi*c/(2 d) of
the reflected-wave phase.
"""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .constants import C, HBAR, K_B
from .materials import (ValidityWarning, _fresnel_from_kz2, dipole_T,
                        polarizability_imag_axis, response_breakpoints,
                        warn_dipole_validity)
from .quadrature import (DEFAULT_SETTINGS, IntegralResult, _WGK, _XGK,
                         _adaptive, bose_weighted_integral,
                         evanescent_integral, matsubara_sum,
                         refined_trapezoid)
from .two_spheres import ForceBreakdown, _unwrap

__all__ = [
    "SpherePlateSystem", "SpherePlateBreakdown",
    "plate_source_force", "sphere_self_force", "equilibrium_force",
    "total_force_on_sphere", "propagating_angular_kernel",
]

_PREF_SOURCE = 3.0 * HBAR / (2.0 * C * math.pi)
_PREF_SELF = -3.0 * HBAR * C / math.pi

# Batch ceiling for (frequencies x inner nodes) kernel tables.
_MAX_TABLE = 6_000_000


@dataclass(frozen=True)
class SpherePlateSystem:
    """Sphere at center-to-surface distance d above a half-space plate."""

    sphere: object
    plate: object
    separation: float     # m, sphere center to plate surface
    t_env: float = 0.0    # K

    def __post_init__(self):
        if self.separation <= self.sphere.radius:
            raise ValueError("separation must exceed the sphere radius")
        if self.t_env < 0:
            raise ValueError("t_env must be >= 0")
        if self.separation / self.sphere.radius < 4:
            warnings.warn(
                f"separation/radius ratio "
                f"{self.separation / self.sphere.radius:.2f} < 4: "
                "one-reflection treatment degrades at close approach",
                ValidityWarning, stacklevel=2)


@dataclass
class SpherePlateBreakdown(ForceBreakdown):
    """ForceBreakdown plus the propagating/evanescent split of the
    plate-sourced deviation."""

    plate_propagating: float = 0.0
    plate_evanescent: float = 0.0


def _breakpoints(sys):
    bp = set(response_breakpoints(sys.sphere.dielectric))
    bp |= set(response_breakpoints(sys.plate.dielectric))
    return tuple(sorted(bp))


def _segment_nodes(edges):
    """GK15 node table (n_seg, 15) and half-widths for a 1-d edge list."""
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    nodes = 0.5 * (a + b)[:, None] + half[:, None] * _XGK[None, :]
    return nodes, half


def _chunks(n_omega, n_nodes):
    step = max(1, _MAX_TABLE // max(n_nodes, 1))
    for lo in range(0, n_omega, step):
        yield lo, min(lo + step, n_omega)


# ---------------------------------------------------------------------------
# Plate-sourced force

def propagating_angular_kernel(plate, omega, settings=DEFAULT_SETTINGS):
    """Angular reflection deficit sum_P integral_0^1 t (1 - |r^P|^2) dt.

    t = k_perp c / omega is the sine of the emission angle; the deficit
    (1 - |r|^2) is the plate's far-field emissivity factor.  Finite in the
    omega -> 0 limit, where it is set by the static permittivity.
    """
    w = float(omega)
    eps = complex(np.asarray(plate.dielectric.epsilon(np.array([w])))[0])
    mu = complex(plate.mu)

    def kern(t):
        kz2 = (w / C) ** 2 * (1.0 - t ** 2)
        tot = np.zeros_like(t)
        for pol in ("M", "N"):
            r = _fresnel_from_kz2(eps, mu, w, kz2, pol)
            tot = tot + t * (1.0 - np.abs(r) ** 2)
        return tot

    res = _adaptive(kern, np.array([0.0, 0.5, 0.9, 0.99, 1.0]), settings)
    return float(res.value)


_ANGULAR_EDGES = np.concatenate([
    np.linspace(0.0, 0.9, 10), [0.95, 0.98, 0.995, 1.0]])


def _angular_kernel_batch(eps, mu, w):
    """propagating_angular_kernel for an array of frequencies."""
    t_nodes, t_half = _segment_nodes(_ANGULAR_EDGES)
    t = t_nodes.ravel()[None, :]
    kz2 = (w[:, None] / C) ** 2 * (1.0 - t ** 2)
    tot = np.zeros_like(kz2, dtype=float)
    for pol in ("M", "N"):
        r = _fresnel_from_kz2(eps[:, None], mu, w[:, None], kz2, pol)
        tot += t * (1.0 - np.abs(r) ** 2)
    seg = tot.reshape(len(w), -1, 15) @ _WGK
    return seg @ t_half


def _exchange_bracket(eps, mu, w, kz2, kp2, re_wt_n, re_wt_m):
    """sum_P wt_P * [r^P (2 k_perp^2 c^2/w^2 - 1) + r^Pbar] (complex)."""
    r_n = _fresnel_from_kz2(eps, mu, w, kz2, "N")
    r_m = _fresnel_from_kz2(eps, mu, w, kz2, "M")
    fac = 2.0 * kp2 * (C / w) ** 2 - 1.0
    return (re_wt_n * (r_n * fac + r_m) + re_wt_m * (r_m * fac + r_n))


def _evanescent_q_edges(d, w_lo, w_hi, settings):
    """Common q grid: resolves exp(-2 d q) decades and the w/c crossover."""
    q_max = settings.bose_cutoff_x / (2.0 * d)
    edges = [np.array([0.0]), np.geomspace(1e-5 * q_max, q_max, 17)]
    lo, hi = 0.3 * w_lo / C, 3.0 * w_hi / C
    if lo < q_max:
        edges.append(np.geomspace(lo, min(hi, q_max), 9))
    return np.unique(np.concatenate(edges))


def _evanescent_exchange_batch(sys, w, eps, wt_n, wt_m, settings):
    """Near-field exchange integral for a batch of frequencies.

    Returns integral over q of q exp(-2 d q) Im[bracket], with the
    polarization weights (Im T or Re T) folded into the bracket.
    """
    d = sys.separation
    q_edges = _evanescent_q_edges(d, float(w.min()), float(w.max()), settings)
    q_nodes, q_half = _segment_nodes(q_edges)
    q = q_nodes.ravel()[None, :]
    out = np.empty(len(w))
    for lo, hi in _chunks(len(w), q.size):
        wc = w[lo:hi, None]
        kp2 = q ** 2 + (wc / C) ** 2
        br = _exchange_bracket(eps[lo:hi, None], complex(sys.plate.mu), wc,
                               -q ** 2, kp2, wt_n[lo:hi, None],
                               wt_m[lo:hi, None])
        kern = q * np.exp(-2.0 * d * q) * br.imag
        seg = kern.reshape(hi - lo, -1, 15) @ _WGK
        out[lo:hi] = seg @ q_half
    return out


def _plate_source_results(sys, temperature, settings):
    """(propagating, evanescent) IntegralResults of the plate-sourced force."""
    if temperature == 0:
        return (IntegralResult(0.0, 0.0, 0, True),
                IntegralResult(0.0, 0.0, 0, True))
    bp = _breakpoints(sys)
    mu = complex(sys.plate.mu)

    def f_pr(warr):
        eps = np.asarray(sys.plate.dielectric.epsilon(warr))
        t_n, t_m = dipole_T(sys.sphere, warr)
        re_sum = t_n.real + t_m.real
        return _PREF_SOURCE * warr * re_sum * _angular_kernel_batch(
            eps, mu, warr)

    def f_ev(warr):
        eps = np.asarray(sys.plate.dielectric.epsilon(warr))
        t_n, t_m = dipole_T(sys.sphere, warr)
        inner = _evanescent_exchange_batch(sys, warr, eps, t_n.imag,
                                           t_m.imag, settings)
        return _PREF_SOURCE * warr * 2.0 * (C / warr) ** 2 * inner

    pr = bose_weighted_integral(f_pr, temperature, settings, breakpoints=bp)
    ev = bose_weighted_integral(f_ev, temperature, settings, breakpoints=bp)
    return pr, ev


def plate_source_force(sys, temperature, settings=DEFAULT_SETTINGS):
    """(propagating, evanescent) force on the sphere from plate radiation.

    The propagating part carries no separation dependence; the
    evanescent part decays with d through the exp(-2 d q) damping.
    Both vanish at T = 0.
    """
    pr, ev = _plate_source_results(sys, temperature, settings)
    return (_unwrap(pr, "plate propagating force"),
            _unwrap(ev, "plate evanescent force"))


# ---------------------------------------------------------------------------
# Sphere self force

def _self_inner_batch(sys, w, eps, wt_n, wt_m, settings):
    """Traveling plus near-field exchange integral of the self force.

    Traveling waves: integral over k_z in (0, w/c) of
    k_z e^{2 i d k_z} bracket, on a common half-period grid (step
    pi/(2 d)) shared by the frequency batch, each frequency adding its
    partial final segment; the phase advances by at most pi per segment,
    where the embedded rule is accurate to machine level for smooth
    reflection kernels.  Near field: q integral as in the plate-source
    term but with the real part of the bracket.
    """
    d = sys.separation
    mu = complex(sys.plate.mu)
    kz_step = math.pi / (2.0 * d)
    kz_hi = float(w.max()) / C
    n_full = int(kz_hi / kz_step)
    full_edges = np.arange(n_full + 1) * kz_step
    if len(full_edges) >= 2:
        nodes, half = _segment_nodes(full_edges)
        kz_flat = nodes.ravel()[None, :]
        seg_hi = full_edges[1:]
    out = np.zeros(len(w), dtype=float)

    inner_nodes = (n_full + 1) * 15
    for lo, hi in _chunks(len(w), inner_nodes):
        wc = w[lo:hi, None]
        epsc = eps[lo:hi, None]
        wtn, wtm = wt_n[lo:hi, None], wt_m[lo:hi, None]
        kz_max = wc / C

        def trav_kernel(kz):
            kp2 = (wc / C) ** 2 - kz ** 2
            br = _exchange_bracket(epsc, mu, wc, kz ** 2, kp2, wtn, wtm)
            return (kz * np.exp(2.0j * d * kz) * br).real

        acc = np.zeros(hi - lo)
        if len(full_edges) >= 2:
            kern = trav_kernel(kz_flat)
            seg = kern.reshape(hi - lo, -1, 15) @ _WGK
            mask = seg_hi[None, :] <= kz_max
            acc += np.sum(np.where(mask, seg * half[None, :], 0.0), axis=1)
        # Partial final segment [n*step, w/c] per frequency.
        a = np.floor(kz_max / kz_step) * kz_step
        a = np.minimum(a, kz_max)
        phalf = 0.5 * (kz_max - a)
        pnodes = 0.5 * (a + kz_max) + phalf * _XGK[None, :]
        acc += (trav_kernel(pnodes) @ _WGK) * phalf[:, 0]
        out[lo:hi] = acc

    # Near-field remainder.
    q_edges = _evanescent_q_edges(d, float(w.min()), float(w.max()), settings)
    q_nodes, q_half = _segment_nodes(q_edges)
    q = q_nodes.ravel()[None, :]
    for lo, hi in _chunks(len(w), q.size):
        wc = w[lo:hi, None]
        kp2 = q ** 2 + (wc / C) ** 2
        br = _exchange_bracket(eps[lo:hi, None], mu, wc, -q ** 2, kp2,
                               wt_n[lo:hi, None], wt_m[lo:hi, None])
        kern = q * np.exp(-2.0 * d * q) * br.real
        seg = kern.reshape(hi - lo, -1, 15) @ _WGK
        out[lo:hi] += seg @ q_half
    return out


def _self_result(sys, temperature, settings):
    if temperature == 0:
        return IntegralResult(0.0, 0.0, 0, True)

    def f(warr):
        eps = np.asarray(sys.plate.dielectric.epsilon(warr))
        t_n, t_m = dipole_T(sys.sphere, warr)
        inner = _self_inner_batch(sys, warr, eps, t_n.real, t_m.real,
                                  settings)
        return _PREF_SELF * inner / warr

    # The reflected-wave phase 2 d omega / c makes the frequency integrand
    # oscillate with period pi c / (2 d); pre-partition at that spacing.
    omega_max = settings.bose_cutoff_x * K_B * temperature / HBAR
    step = math.pi * C / (2.0 * sys.separation)
    if step < omega_max:
        edges = np.arange(0.0, omega_max, step)[1:]
    else:
        edges = ()
    return bose_weighted_integral(f, temperature, settings,
                                  breakpoints=_breakpoints(sys),
                                  extra_edges=edges)


def sphere_self_force(sys, temperature, settings=DEFAULT_SETTINGS):
    """Force on the sphere from its own radiation reflected by the plate.

    Oscillates in d (interference of direct and plate-reflected
    emission); contains traveling and near-field parts but no
    separation-independent term.
    """
    return _unwrap(_self_result(sys, temperature, settings), "self force")


# ---------------------------------------------------------------------------
# Equilibrium force

def _equilibrium_kernel(sys, xi_scalar, settings):
    """One Matsubara mode of the equilibrium force (before k_B T weight).

    The magnetic term enters as xi^2 r^M and the electric one as
    (2 kappa^2 c^2 - xi^2) r^N, the exact product of xi^2 with the
    (2 kappa^2 c^2/xi^2 - 1) exchange factor, so the xi -> 0 mode needs
    no special casing: it reduces to the electrostatic image expression.
    """
    d = sys.separation
    xi = float(xi_scalar)
    alpha = float(np.asarray(
        polarizability_imag_axis(sys.sphere, np.array([xi])))[0])
    eps_p = float(np.asarray(
        sys.plate.dielectric.epsilon_imag_axis(np.array([xi])))[0])
    mu_p = complex(sys.plate.mu).real

    def h(kp):
        kappa = np.sqrt(kp ** 2 + (xi / C) ** 2)
        kappa_m = np.sqrt(kp ** 2 + eps_p * mu_p * (xi / C) ** 2)
        r_m = (mu_p * kappa - kappa_m) / (mu_p * kappa + kappa_m)
        r_n = (eps_p * kappa - kappa_m) / (eps_p * kappa + kappa_m)
        bracket = xi ** 2 * r_m + (2.0 * (kappa * C) ** 2 - xi ** 2) * r_n
        return kp * np.exp(-2.0 * kappa * d) * bracket

    res = evanescent_integral(h, 2.0 * d, settings)
    return (2.0 / C ** 2) * alpha * res.value


def _equilibrium_result(sys, temperature, settings):
    def g(xi_arr):
        return np.array([_equilibrium_kernel(sys, xi, settings)
                         for xi in np.atleast_1d(xi_arr)])

    if temperature > 0:
        return matsubara_sum(g, temperature, settings)
    xi_max = settings.bose_cutoff_x * C / (2.0 * sys.separation)
    res = refined_trapezoid(g, xi_max, settings)
    res.value = HBAR / (2.0 * math.pi) * res.value
    res.error_estimate *= HBAR / (2.0 * math.pi)
    return res


def equilibrium_force(sys, temperature, settings=DEFAULT_SETTINGS):
    """Equilibrium dipole Casimir force toward the plate (N, attractive
    for a dielectric sphere over a dielectric plate)."""
    return _unwrap(_equilibrium_result(sys, temperature, settings),
                   "equilibrium force")


def total_force_on_sphere(sys, settings=DEFAULT_SETTINGS):
    """Total force on the sphere: equilibrium at T_env plus the plate and
    sphere source deviations, with the plate term's propagating and
    evanescent shares reported separately."""
    warn_dipole_validity(sys.sphere,
                         max(sys.sphere.temperature, sys.t_env))
    flags = []

    eq = _equilibrium_result(sys, sys.t_env, settings)
    flags.append(eq.converged)

    t_p = sys.plate.temperature
    if t_p == sys.t_env:
        d_pr = d_ev = 0.0
    else:
        hot_pr, hot_ev = _plate_source_results(sys, t_p, settings)
        cold_pr, cold_ev = _plate_source_results(sys, sys.t_env, settings)
        flags += [hot_pr.converged, hot_ev.converged,
                  cold_pr.converged, cold_ev.converged]
        d_pr = float(hot_pr.value - cold_pr.value)
        d_ev = float(hot_ev.value - cold_ev.value)

    t_s = sys.sphere.temperature
    if t_s == sys.t_env:
        self_term = 0.0
    else:
        hot = _self_result(sys, t_s, settings)
        cold = _self_result(sys, sys.t_env, settings)
        flags += [hot.converged, cold.converged]
        self_term = float(hot.value - cold.value)

    eq_val = float(eq.value)
    inter = d_pr + d_ev
    return SpherePlateBreakdown(
        equilibrium=eq_val,
        interaction_from_other=inter,
        self_emission=self_term,
        total=eq_val + inter + self_term,
        converged=all(flags),
        plate_propagating=d_pr,
        plate_evanescent=d_ev,
    )
