"""Engine-level checks against analytic integrals and brute-force rules."""

import math

import numpy as np
import pytest

from neqforce.constants import HBAR, K_B
from neqforce.quadrature import (DivergentSumError, QuadratureSettings,
                                 bose_weighted_integral, evanescent_integral,
                                 matsubara_sum, oscillatory_tail_integral,
                                 refined_trapezoid)

SET = QuadratureSettings()
KT = K_B * 300.0 / HBAR


def test_settings_invariants():
    with pytest.raises(ValueError):
        QuadratureSettings(rel_tol=0.0)
    with pytest.raises(ValueError):
        QuadratureSettings(bose_cutoff_x=10.0)


def test_bose_linear_integrand():
    res = bose_weighted_integral(lambda w: w, 300.0, SET)
    exact = KT ** 2 * math.pi ** 2 / 6.0
    assert res.converged
    assert res.value == pytest.approx(exact, rel=SET.rel_tol)


def test_bose_cubic_integrand():
    res = bose_weighted_integral(lambda w: w ** 3, 300.0, SET)
    exact = KT ** 4 * math.pi ** 4 / 15.0
    assert res.converged
    assert res.value == pytest.approx(exact, rel=SET.rel_tol)


def test_bose_zero_temperature_short_circuit():
    calls = []

    def f(w):
        calls.append(w)
        return w

    res = bose_weighted_integral(f, 0.0, SET)
    assert res.value == 0.0
    assert res.evaluations == 0
    assert not calls


def test_bose_cutoff_insensitivity():
    f = lambda w: w ** 3
    lo = bose_weighted_integral(f, 300.0, QuadratureSettings(bose_cutoff_x=60))
    hi = bose_weighted_integral(f, 300.0, QuadratureSettings(bose_cutoff_x=80))
    assert abs(hi.value - lo.value) <= 10 * SET.rel_tol * abs(lo.value)


def test_bose_resonance_breakpoint_capture():
    # A Lorentzian much narrower than the initial grid must still be caught.
    # The w/w0 factor keeps the integrand regular after Bose weighting.
    w0, width = 0.3 * 60 * KT, 1e-4 * 60 * KT

    def f(w):
        return (w / w0) * width ** 2 / ((w - w0) ** 2 + width ** 2)

    seeded = bose_weighted_integral(f, 300.0, SET, breakpoints=(w0,))
    dense = _trapz_bose(f, 300.0, w0, width)
    assert seeded.value == pytest.approx(dense, rel=1e-4)


def _trapz_bose(f, temperature, w0, width):
    wmax = SET.bose_cutoff_x * K_B * temperature / HBAR
    w = np.unique(np.concatenate([
        np.geomspace(1e-6 * wmax, wmax, 300000),
        np.linspace(w0 - 50 * width, w0 + 50 * width, 200000),
    ]))
    y = f(w) / np.expm1(HBAR * w / (K_B * temperature))
    return np.trapz(y, w)


def test_oscillatory_laplace_value():
    omega_scale, phase = 1e14, 3e-14
    res = oscillatory_tail_integral(lambda w: np.exp(-w / omega_scale),
                                    phase, 60 * omega_scale, SET)
    exact = 1.0 / (1.0 / omega_scale - 1j * phase)
    assert res.converged
    assert abs(res.value - exact) <= 5 * SET.rel_tol * abs(exact)


def test_oscillatory_zero_phase_degenerates():
    omega_scale = 1e14
    res = oscillatory_tail_integral(lambda w: np.exp(-w / omega_scale),
                                    0.0, 60 * omega_scale, SET)
    assert res.value.real == pytest.approx(omega_scale, rel=5 * SET.rel_tol)
    assert res.value.imag == pytest.approx(0.0, abs=1e-10 * omega_scale)


def test_oscillatory_lorentzian_vs_dense_trapezoid():
    w0 = 2e14
    width = w0 / 50
    phase = 2 * 30e-6 / 3e8

    def g(w):
        return width ** 2 / ((w - w0) ** 2 + width ** 2)

    res = oscillatory_tail_integral(g, phase, 10 * w0, SET)
    w = np.linspace(1e-3, 10 * w0, 1_000_000)
    dense = np.trapz(g(w) * np.exp(1j * phase * w), w)
    assert abs(res.value - dense) <= 1e-5 * abs(dense)


def test_evanescent_gamma_integral():
    d = 1e-6
    res = evanescent_integral(lambda q: q * np.exp(-2 * d * q), 2 * d, SET)
    assert res.converged
    assert res.value == pytest.approx(1.0 / (2 * d) ** 2, rel=SET.rel_tol)


def test_evanescent_zero_integrand():
    res = evanescent_integral(lambda q: np.zeros_like(q), 2e-6, SET)
    assert res.value == 0.0


def test_matsubara_geometric_series():
    res = matsubara_sum(lambda xi: np.exp(-xi / KT), 300.0, SET)
    r = math.exp(-2 * math.pi)
    exact = K_B * 300.0 * (0.5 + r / (1 - r))
    assert res.converged
    assert res.value == pytest.approx(exact, rel=1e-9)


def test_matsubara_zero_summand():
    res = matsubara_sum(lambda xi: np.zeros_like(xi), 300.0, SET)
    assert res.value == 0.0


def test_matsubara_vs_direct_summation():
    d = 20e-6
    c = 299792458.0

    def g(xi):
        x = xi * d / c
        return np.exp(-2 * x) * (3 + 6 * x + 5 * x ** 2)

    res = matsubara_sum(g, 300.0, SET)
    xi1 = 2 * math.pi * K_B * 300.0 / HBAR
    n = np.arange(1, 1_000_000)
    direct = K_B * 300.0 * (0.5 * g(np.array([0.0]))[0] + g(n * xi1).sum())
    assert res.value == pytest.approx(direct, rel=1e-8)


def test_matsubara_divergence_detected():
    with pytest.raises(DivergentSumError):
        matsubara_sum(lambda xi: np.exp(xi / KT), 300.0, SET)


def test_refinement_monotonicity():
    # Halving rel_tol moves a converged value by at most both error bars.
    def f(w):
        return w ** 2 / (1 + (w / (20 * KT)) ** 4)

    loose = bose_weighted_integral(f, 300.0, QuadratureSettings(rel_tol=1e-5))
    tight = bose_weighted_integral(f, 300.0, QuadratureSettings(rel_tol=5e-6))
    assert loose.converged and tight.converged
    assert (abs(loose.value - tight.value)
            <= loose.error_estimate + tight.error_estimate)


def test_linearity_random_pairs():
    rng = np.random.RandomState(7)
    for _ in range(5):
        a, b = rng.uniform(0.5, 3.0, size=2)
        w1, w2 = rng.uniform(1.0, 30.0, size=2) * KT

        def f(w):
            return np.exp(-w / w1)

        def g(w):
            return (w / w2) ** 2

        fa = bose_weighted_integral(f, 300.0, SET).value
        ga = bose_weighted_integral(g, 300.0, SET).value
        combo = bose_weighted_integral(lambda w: a * f(w) + b * g(w),
                                       300.0, SET).value
        ref = a * fa + b * ga
        assert combo == pytest.approx(ref, rel=10 * SET.rel_tol)


def test_brute_force_equivalence_random_instances():
    # Random smooth-plus-peak integrands against a dense trapezoid rule.
    rng = np.random.RandomState(42)
    for _ in range(20):
        t = rng.uniform(100.0, 600.0)
        wmax = SET.bose_cutoff_x * K_B * t / HBAR
        w0 = rng.uniform(0.05, 0.5) * wmax
        width = w0 * rng.uniform(0.01, 0.1)
        amp = 10 ** rng.uniform(-2, 2)
        p = rng.uniform(0.5, 3.0)

        def f(w):
            return ((w / wmax) ** p
                    + amp * (w / w0) * width ** 2 / ((w - w0) ** 2
                                                     + width ** 2))

        res = bose_weighted_integral(f, t, SET, breakpoints=(w0,))
        dense = _trapz_bose(f, t, w0, width)
        assert res.value == pytest.approx(dense, rel=5 * SET.rel_tol), \
            f"T={t}, w0={w0}, width={width}"


def test_refined_trapezoid_exponential():
    res = refined_trapezoid(lambda x: np.exp(-x), 60.0, SET)
    assert res.converged
    assert res.value == pytest.approx(1.0, rel=1e-6)
