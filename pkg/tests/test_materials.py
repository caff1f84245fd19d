"""Dielectric models, polarizabilities, T-amplitudes, Fresnel coefficients."""

import math

import numpy as np
import pytest

from neqforce.constants import C
from neqforce import materials as mat
from neqforce.materials import (Constant, FrequencyRangeError, LorentzSet,
                                Oscillator, PlateSpec,
                                PolarizabilityPoleError, SphereSpec,
                                Tabulated, UnsupportedMaterialError,
                                builtin_material, dipole_T, epsilon,
                                epsilon_imag_axis, fresnel,
                                fresnel_imag_axis, polarizability,
                                static_expansion)

W_RES = 1e14
LORENTZ = LorentzSet(eps_inf=1.0,
                     oscillators=(Oscillator(W_RES, 3e28, 1e12),))


def test_constant_model_any_frequency():
    model = Constant(4.0 + 0.0j)
    assert epsilon(model, 1e12) == 4.0
    assert epsilon(model, 1e16) == 4.0


def test_lorentz_static_limit():
    # eps0 = 1 + strength / omega_res^2 = 1 + 3e28/1e28 = 4
    val = epsilon(LORENTZ, 1e6)
    assert val.real == pytest.approx(4.0, rel=1e-10)


def test_sio2_tabulated_static_value():
    model = builtin_material("sio2")
    assert epsilon(model, 1e8).real == pytest.approx(3.7, rel=1e-3)


def test_epsilon_rejects_nonpositive_frequency():
    with pytest.raises(ValueError):
        epsilon(LORENTZ, 0.0)


def test_passivity_of_builtins():
    w = np.geomspace(1e10, 1e16, 4000)
    for name in ("sio2", "sic"):
        model = builtin_material(name)
        eps = epsilon(model, w)
        assert np.all(eps.imag >= 0)
        sphere = SphereSpec(radius=1e-6, dielectric=model)
        assert np.all(polarizability(sphere, w).imag >= 0)


def test_imag_axis_static_and_high_frequency_limits():
    assert epsilon_imag_axis(LORENTZ, 0.0) == pytest.approx(4.0)
    assert epsilon_imag_axis(LORENTZ, 1e18) == pytest.approx(1.0, abs=1e-6)


def test_imag_axis_monotone_decreasing():
    xi = np.geomspace(1e10, 1e16, 200)
    vals = epsilon_imag_axis(LORENTZ, xi)
    assert np.all(np.diff(vals) < 0)
    assert np.all(vals >= 1.0)


def test_imag_axis_kramers_kronig_cross_check():
    # Broad-damping oscillator so a tabulation resolves the loss peak.
    model = LorentzSet(eps_inf=1.0,
                       oscillators=(Oscillator(W_RES, 3e28, 5e12),))
    closed = epsilon_imag_axis(model, 1e14)
    assert 1.0 < closed < 4.0
    grid = np.geomspace(1e9, 1e17, 6000)
    eps = model.epsilon(grid)
    tab = Tabulated(grid, eps.real, eps.imag)
    kk = tab.epsilon_imag_axis(1e14)
    assert kk == pytest.approx(closed, rel=5e-3)


def test_tabulated_range_error_names_bound():
    grid = np.geomspace(1e12, 1e15, 50)
    eps = LORENTZ.epsilon(grid)
    tab = Tabulated(grid, eps.real, eps.imag)
    with pytest.raises(FrequencyRangeError, match="below"):
        tab.epsilon(1e11)
    with pytest.raises(FrequencyRangeError, match="above"):
        tab.epsilon(1e16)


def test_tabulated_validation():
    with pytest.raises(mat.MaterialError):
        Tabulated([1e12, 1e12], [1, 1], [0, 0])
    with pytest.raises(mat.MaterialError):
        Tabulated([1e12, 1e13], [1, 1], [0, -1])


def test_static_expansion_paper_eps():
    # alpha_i0 = 3 R^3 / (eps0 + 2)^2 with eps0 = 3.7
    model = builtin_material("sio2")
    sphere = SphereSpec(radius=1e-6, dielectric=model)
    se = static_expansion(sphere)
    assert se.alpha_i0 == pytest.approx(3e-18 / 5.7 ** 2, rel=1e-3)
    assert se.alpha_i0 * (se.eps0 + 2) ** 2 == pytest.approx(3e-18, rel=1e-12)


def test_static_expansion_eps4():
    sphere = SphereSpec(radius=1e-6, dielectric=LORENTZ)
    se = static_expansion(sphere)
    assert se.alpha0 == pytest.approx(0.5e-18, rel=1e-8)


def test_static_expansion_vacuum_sphere():
    sphere = SphereSpec(radius=1e-6, dielectric=Constant(1.0))
    se = static_expansion(sphere)
    assert se.alpha0 == 0.0
    assert se.alpha_i0 == pytest.approx(1e-18 / 3.0)
    assert se.lambda_in == 0.0


def test_static_expansion_lambda_in_matches_closed_form():
    # d(Im eps)/dw at 0 for one oscillator: strength*damping/omega_res^4
    se = static_expansion(SphereSpec(radius=1e-6, dielectric=LORENTZ))
    expected = C * 3e28 * 1e12 / W_RES ** 4
    assert se.lambda_in == pytest.approx(expected, rel=1e-5)


def test_conductor_rejected():
    metallic = LorentzSet(eps_inf=1.0,
                          oscillators=(Oscillator(1e10, 1e32, 1e9),))
    with pytest.raises(UnsupportedMaterialError):
        static_expansion(SphereSpec(radius=1e-6, dielectric=metallic))


def test_polarizability_values():
    sphere = SphereSpec(radius=1e-6, dielectric=Constant(4.0))
    assert polarizability(sphere, 1e14) == pytest.approx(0.5e-18)
    vac = SphereSpec(radius=1e-6, dielectric=Constant(1.0))
    assert polarizability(vac, 1e14) == 0.0


def test_polarizability_lossy_imaginary_part():
    sphere = SphereSpec(radius=1e-6, dielectric=Constant(3.7 + 0.1j))
    alpha = polarizability(sphere, 1e14)
    expected_im = 3 * 1e-18 * 0.1 / abs(3.7 + 0.1j + 2) ** 2
    assert alpha.imag == pytest.approx(expected_im, rel=1e-12)
    assert alpha.imag > 0


def test_polarizability_pole_rejected():
    sphere = SphereSpec(radius=1e-6, dielectric=Constant(-2.0 + 0.0j))
    with pytest.raises(PolarizabilityPoleError):
        polarizability(sphere, np.array([1e14]))


def test_dipole_T_magnetic_vanishes_for_mu_one():
    sphere = SphereSpec(radius=1e-6, dielectric=Constant(3.7 + 0.1j))
    t_n, t_m = dipole_T(sphere, np.array([2e14]))
    assert np.all(t_m == 0)


def test_dipole_T_lossless_has_no_real_part():
    sphere = SphereSpec(radius=1e-6, dielectric=Constant(4.0))
    t_n, _ = dipole_T(sphere, np.array([2e14]))
    assert t_n[0].real == 0.0
    assert t_n[0].imag > 0


def test_dipole_T_lossy_sign():
    sphere = SphereSpec(radius=1e-6, dielectric=Constant(3.7 + 0.1j))
    w = 2e14
    t_n, _ = dipole_T(sphere, np.array([w]))
    alpha = polarizability(sphere, w)
    assert t_n[0].real == pytest.approx(-(2 * w ** 3 / (3 * C ** 3))
                                        * alpha.imag, rel=1e-12)
    assert t_n[0].real < 0


def test_dipole_T_radius_cubed_scaling():
    w = np.array([2e14])
    small = SphereSpec(radius=1e-6, dielectric=Constant(3.0 + 0.5j))
    big = SphereSpec(radius=2e-6, dielectric=Constant(3.0 + 0.5j))
    t1, _ = dipole_T(small, w)
    t2, _ = dipole_T(big, w)
    assert t2[0] == pytest.approx(8 * t1[0], rel=1e-14)


def test_fresnel_normal_incidence():
    plate = PlateSpec(dielectric=Constant(4.0))
    w = np.array([1e14])
    k0 = np.array([0.0])
    assert fresnel(plate, w, k0, "M")[0] == pytest.approx(-1 / 3)
    assert fresnel(plate, w, k0, "N")[0] == pytest.approx(+1 / 3)


def test_fresnel_mirror_limit():
    plate = PlateSpec(dielectric=Constant(1e8))
    r = fresnel(plate, np.array([1e14]), np.array([0.0]), "M")[0]
    assert r == pytest.approx(-1.0, abs=3e-4)


def test_fresnel_propagating_bounded():
    rng = np.random.RandomState(3)
    for _ in range(50):
        eps = complex(rng.uniform(1, 8), rng.uniform(0, 4))
        w = 10 ** rng.uniform(12, 15)
        kp = rng.uniform(0, 0.999) * w / C
        plate = PlateSpec(dielectric=Constant(eps))
        for pol in ("M", "N"):
            assert abs(fresnel(plate, np.array([w]),
                               np.array([kp]), pol)[0]) <= 1 + 1e-12


def test_fresnel_swap_symmetry():
    rng = np.random.RandomState(11)
    for _ in range(100):
        eps = complex(rng.uniform(1, 6), rng.uniform(0, 3))
        mu = complex(rng.uniform(1, 3), rng.uniform(0, 1))
        w = 10 ** rng.uniform(12, 15)
        kp = 10 ** rng.uniform(2, 8)
        direct = fresnel(PlateSpec(dielectric=Constant(eps), mu=mu),
                         np.array([w]), np.array([kp]), "N")[0]
        swapped = fresnel(PlateSpec(dielectric=Constant(mu), mu=eps),
                          np.array([w]), np.array([kp]), "M")[0]
        assert direct == pytest.approx(swapped, rel=1e-13, abs=1e-15)


def test_fresnel_evanescent_branch():
    plate = PlateSpec(dielectric=Constant(2.0 + 1.0j))
    w = 1e14
    r = fresnel(plate, np.array([w]), np.array([2 * w / C]), "M")[0]
    assert np.isfinite(r)
    # Both square roots sit on the decaying branch; |r| < 1 deep evanescent.
    assert abs(r) < 1


def test_fresnel_branch_continuity_across_light_line():
    # Bisection straddle onto k_perp = w/c; r is continuous there.
    plate = PlateSpec(dielectric=Constant(2.0 + 1.0j))
    w = 2e14
    k0 = w / C
    for pol in ("M", "N"):
        delta = 1e-3
        while delta > 1e-13:
            lo = fresnel(plate, np.array([w]),
                         np.array([k0 * (1 - delta)]), pol)[0]
            hi = fresnel(plate, np.array([w]),
                         np.array([k0 * (1 + delta)]), pol)[0]
            delta *= 0.5
        assert abs(hi - lo) < 1e-6


def test_fresnel_imag_axis_static_image_factor():
    plate = PlateSpec(dielectric=Constant(3.7))
    r = fresnel_imag_axis(plate, np.array([0.0]), np.array([1e5]), "N")
    assert r[0] == pytest.approx((3.7 - 1) / (3.7 + 1))


def test_scale_frequency_shifts_resonances():
    shifted = LORENTZ.scale_frequency(1.17)
    assert shifted.resonance_frequencies()[0] == pytest.approx(W_RES / 1.17)
    w = 1e13
    assert shifted.epsilon(np.array([w]))[0] == pytest.approx(
        LORENTZ.epsilon(np.array([1.17 * w]))[0])
    # imaginary axis follows the same rescaling
    assert shifted.epsilon_imag_axis(np.array([w]))[0] == pytest.approx(
        LORENTZ.epsilon_imag_axis(np.array([1.17 * w]))[0])


def test_lossy_constant_has_no_imag_axis():
    with pytest.raises(UnsupportedMaterialError):
        Constant(2.0 + 1.0j).epsilon_imag_axis(1e13)


def test_material_file_roundtrip(tmp_path):
    spec = {
        "name": "custom",
        "type": "lorentz",
        "parameters": {"eps_inf": 2.0, "oscillators": [
            {"omega_res": 1e14, "strength": 1e28, "damping": 1e12}]},
    }
    path = tmp_path / "custom.json"
    import json
    path.write_text(json.dumps(spec))
    model = mat.load_material_file(path)
    assert isinstance(model, LorentzSet)
    assert model.eps_inf == 2.0


def test_material_env_dir_lookup(tmp_path, monkeypatch):
    import json
    spec = {"name": "envmat", "type": "constant", "parameters": {"eps": [5.0, 0.0]}}
    (tmp_path / "envmat.json").write_text(json.dumps(spec))
    monkeypatch.setenv(mat.MATERIALS_DIR_ENV, str(tmp_path))
    model = mat.resolve_material("envmat")
    assert isinstance(model, Constant)
    assert model.eps == 5.0


def test_tabulated_csv_loading(tmp_path):
    import json
    rows = ["# omega_rad_s, eps_re, eps_im"]
    for w in np.geomspace(1e12, 1e15, 40):
        e = LORENTZ.epsilon(np.array([w]))[0]
        rows.append(f"{w:.9e},{e.real:.9e},{e.imag:.9e}")
    (tmp_path / "tab.csv").write_text("\n".join(rows))
    spec = {"name": "tabbed", "type": "tabulated", "parameters": {"csv": "tab.csv"}}
    (tmp_path / "tabbed.json").write_text(json.dumps(spec))
    model = mat.load_material_file(tmp_path / "tabbed.json")
    assert isinstance(model, Tabulated)
    mid = model.epsilon(1e13)
    assert mid.real == pytest.approx(
        LORENTZ.epsilon(np.array([1e13]))[0].real, rel=1e-3)
