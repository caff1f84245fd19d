"""Dielectric models, dipole response, and plate reflection coefficients.

Every force kernel consumes frequency-resolved response through this
module: complex permittivity on the real axis, real permittivity on the
imaginary axis, sphere dipole polarizabilities and the derived T-matrix
amplitudes, and Fresnel reflection coefficients of a half-space.

Units are SI throughout: frequencies in rad/s, lengths in m,
polarizabilities in m^3.
"""

import csv
import json
import os
import warnings
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .constants import C, thermal_peak_frequency
from .quadrature import DEFAULT_SETTINGS, _adaptive, _merge_edges

__all__ = [
    "MaterialError", "FrequencyRangeError", "UnsupportedMaterialError",
    "PolarizabilityPoleError", "ValidityWarning",
    "DielectricModel", "Oscillator", "LorentzSet", "Tabulated", "Constant",
    "ScaledFrequency", "scale_frequency",
    "SphereSpec", "PlateSpec", "StaticExpansion", "PlateExpansion",
    "epsilon", "epsilon_imag_axis", "static_expansion",
    "plate_static_expansion", "polarizability", "magnetic_polarizability",
    "polarizability_imag_axis", "dipole_T", "dipole_validity_ratio",
    "warn_dipole_validity", "fresnel", "fresnel_imag_axis",
    "response_breakpoints", "builtin_material", "load_material_file",
    "material_from_dict", "resolve_material", "MATERIALS_DIR_ENV",
]

MATERIALS_DIR_ENV = "NEQFORCE_MATERIALS_DIR"
_DATA_DIR = Path(__file__).parent / "data"

# |epsilon| above this at the probe frequency is treated as conductor-like;
# the dipole expansion used here does not apply to conductors.
CONDUCTOR_EPS_LIMIT = 1e3


class MaterialError(ValueError):
    pass


class FrequencyRangeError(MaterialError):
    """Requested frequency outside the tabulated grid."""


class UnsupportedMaterialError(MaterialError):
    """Material outside the validity of the dipole/insulator treatment."""


class PolarizabilityPoleError(MaterialError):
    """epsilon = -2 exactly: lossless plasmon pole of the dipole response."""


class ValidityWarning(UserWarning):
    """Parameters leave the asymptotic validity range of the model."""


class DielectricModel(ABC):
    """Complex permittivity evaluable on the real and imaginary axes."""

    @abstractmethod
    def epsilon(self, omega):
        """epsilon(omega) for real omega > 0 (vectorized)."""

    @abstractmethod
    def epsilon_imag_axis(self, xi):
        """Real epsilon(i*xi) for xi >= 0 (vectorized)."""

    @abstractmethod
    def resonance_frequencies(self):
        """Sorted tuple of resonance positions in rad/s (may be empty)."""

    def scale_frequency(self, factor):
        """Model with the frequency argument rescaled: eps~(w) = eps(factor*w)."""
        return ScaledFrequency(self, factor)


@dataclass(frozen=True)
class Oscillator:
    """One Lorentz oscillator: strength/(omega_res^2 - w^2 - i*damping*w)."""

    omega_res: float   # rad/s
    strength: float    # (rad/s)^2
    damping: float     # rad/s

    def __post_init__(self):
        if self.omega_res <= 0:
            raise MaterialError("oscillator omega_res must be > 0")
        if self.strength < 0 or self.damping < 0:
            raise MaterialError("oscillator strength and damping must be >= 0")


@dataclass(frozen=True)
class LorentzSet(DielectricModel):
    """Sum of Lorentz oscillators over a constant background eps_inf >= 1."""

    eps_inf: float = 1.0
    oscillators: tuple = ()
    name: str = ""

    def __post_init__(self):
        if self.eps_inf < 1.0:
            raise MaterialError("eps_inf must be >= 1")
        object.__setattr__(self, "oscillators", tuple(self.oscillators))

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=float)
        eps = np.full(w.shape, self.eps_inf, dtype=complex)
        for osc in self.oscillators:
            eps += osc.strength / (osc.omega_res ** 2 - w ** 2
                                   - 1j * osc.damping * w)
        return eps

    def epsilon_imag_axis(self, xi):
        x = np.asarray(xi, dtype=float)
        eps = np.full(x.shape, self.eps_inf, dtype=float)
        for osc in self.oscillators:
            eps += osc.strength / (osc.omega_res ** 2 + x ** 2
                                   + osc.damping * x)
        return eps

    def resonance_frequencies(self):
        return tuple(sorted(o.omega_res for o in self.oscillators))


@dataclass(frozen=True)
class Constant(DielectricModel):
    """Frequency-independent permittivity (Im eps >= 0)."""

    eps: complex
    name: str = ""

    def __post_init__(self):
        if complex(self.eps).imag < 0:
            raise MaterialError("constant permittivity must have Im >= 0")

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=float)
        return np.full(w.shape, complex(self.eps))

    def epsilon_imag_axis(self, xi):
        e = complex(self.eps)
        if e.imag != 0:
            raise UnsupportedMaterialError(
                "a lossy constant permittivity has no causal "
                "imaginary-axis continuation")
        x = np.asarray(xi, dtype=float)
        return np.full(x.shape, e.real)

    def resonance_frequencies(self):
        return ()


class Tabulated(DielectricModel):
    """Permittivity sampled on a strictly increasing frequency grid.

    Real and imaginary parts are interpolated separately, linearly in
    log(omega) (optical data spans decades).  Requests outside the grid
    raise FrequencyRangeError.  The imaginary-axis value follows from the
    Kramers-Kronig transform of Im eps over the tabulated range.
    """

    def __init__(self, omega, eps_re, eps_im, name=""):
        omega = np.asarray(omega, dtype=float)
        eps_re = np.asarray(eps_re, dtype=float)
        eps_im = np.asarray(eps_im, dtype=float)
        if omega.ndim != 1 or omega.size < 2:
            raise MaterialError("tabulated grid needs at least 2 samples")
        if not (omega.shape == eps_re.shape == eps_im.shape):
            raise MaterialError("tabulated columns must have equal length")
        if np.any(np.diff(omega) <= 0):
            raise MaterialError("tabulated omega grid must be strictly increasing")
        if np.any(omega <= 0):
            raise MaterialError("tabulated omega values must be > 0")
        if np.any(eps_im < 0):
            raise MaterialError("tabulated Im eps must be >= 0 (passivity)")
        self.omega = omega
        self.eps_re = eps_re
        self.eps_im = eps_im
        self.name = name
        self._log_w = np.log(omega)

    def _check_range(self, w):
        lo, hi = self.omega[0], self.omega[-1]
        if np.any(w < lo):
            raise FrequencyRangeError(
                f"omega = {float(np.min(w)):.6g} rad/s below tabulated "
                f"minimum {lo:.6g} rad/s")
        if np.any(w > hi):
            raise FrequencyRangeError(
                f"omega = {float(np.max(w)):.6g} rad/s above tabulated "
                f"maximum {hi:.6g} rad/s")

    def epsilon(self, omega):
        w = np.asarray(omega, dtype=float)
        self._check_range(w)
        lw = np.log(w)
        re = np.interp(lw, self._log_w, self.eps_re)
        im = np.interp(lw, self._log_w, self.eps_im)
        return re + 1j * im

    def epsilon_imag_axis(self, xi):
        x = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty(x.shape)
        for i, xv in enumerate(x):
            def kernel(w):
                im = np.interp(np.log(w), self._log_w, self.eps_im)
                return w * im / (w ** 2 + xv ** 2)
            edges = _merge_edges(self.omega[0], self.omega[-1],
                                 self.omega, ())
            res = _adaptive(kernel, edges, DEFAULT_SETTINGS)
            if not res.converged:
                warnings.warn(
                    "Kramers-Kronig quadrature stopped at estimated error "
                    f"{res.error_estimate:.3g}", ValidityWarning)
            out[i] = 1.0 + (2.0 / np.pi) * res.value
        return out if np.ndim(xi) else float(out[0])

    def resonance_frequencies(self):
        im = self.eps_im
        peaks = [self.omega[i] for i in range(1, len(im) - 1)
                 if im[i] >= im[i - 1] and im[i] > im[i + 1] and im[i] > 0]
        return tuple(peaks)


@dataclass(frozen=True)
class ScaledFrequency(DielectricModel):
    """Frequency-rescaled view of a base model: eps~(w) = eps(factor*w).

    Rescaling shifts every resonance from w_r to w_r/factor (isotope-like
    shifting of optical resonances).
    """

    base: DielectricModel
    factor: float

    def __post_init__(self):
        if self.factor <= 0:
            raise MaterialError("scale factor must be > 0")

    def epsilon(self, omega):
        return self.base.epsilon(np.asarray(omega, dtype=float) * self.factor)

    def epsilon_imag_axis(self, xi):
        return self.base.epsilon_imag_axis(
            np.asarray(xi, dtype=float) * self.factor)

    def resonance_frequencies(self):
        return tuple(w / self.factor
                     for w in self.base.resonance_frequencies())


def scale_frequency(model, factor):
    return model.scale_frequency(factor)


# ---------------------------------------------------------------------------
# Body specifications

@dataclass(frozen=True)
class SphereSpec:
    """A sphere: radius (m), dielectric model, permeability, temperature (K)."""

    radius: float
    dielectric: DielectricModel
    mu: complex = 1.0
    temperature: float = 0.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be > 0")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class PlateSpec:
    """A half-space plate: dielectric model, permeability, temperature (K)."""

    dielectric: DielectricModel
    mu: complex = 1.0
    temperature: float = 0.0

    def __post_init__(self):
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


@dataclass(frozen=True)
class StaticExpansion:
    """Low-frequency response coefficients of an insulating sphere.

    eps(w)   ~ eps0 + i*lambda_in*w/c
    alpha(w) ~ alpha0 + i*alpha_i0*lambda_in*w/c
    with alpha0 = (eps0-1)/(eps0+2)*R^3 and alpha_i0 = 3 R^3/(eps0+2)^2.
    """

    eps0: float
    lambda_in: float   # m
    alpha0: float      # m^3
    alpha_i0: float    # m^3


@dataclass(frozen=True)
class PlateExpansion:
    """Low-frequency permittivity expansion of a plate: eps0 + i*lambda_in*w/c."""

    eps0: float
    lambda_in: float   # m


# ---------------------------------------------------------------------------
# Response operations

def epsilon(model, omega):
    """Complex permittivity at real omega > 0."""
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("omega must be > 0")
    return model.epsilon(omega)


def epsilon_imag_axis(model, xi):
    """Real permittivity at imaginary frequency i*xi, xi >= 0."""
    x = np.asarray(xi, dtype=float)
    if np.any(x < 0):
        raise ValueError("xi must be >= 0")
    return model.epsilon_imag_axis(xi)


def _static_probe_frequency(model):
    res = model.resonance_frequencies()
    if res:
        return 1e-6 * min(res)
    if isinstance(model, Tabulated):
        return float(model.omega[0])
    return None


def _eps_derivative_im(model, w0):
    """d(Im eps)/d omega at w0 by central differences with step halving."""
    h = 0.5 * w0
    prev = None
    for _ in range(60):
        lo = max(w0 - h, 1e-300)
        der = (model.epsilon(np.array([w0 + h]))[0].imag
               - model.epsilon(np.array([lo]))[0].imag) / (w0 + h - lo)
        if prev is not None:
            if abs(der - prev) <= 1e-6 * max(abs(der), 1e-300):
                return der
        prev = der
        h *= 0.5
    return prev


def _static_eps_and_slope(model):
    w0 = _static_probe_frequency(model)
    if w0 is None:
        # Constant model: flat response, no internal loss slope.
        e = model.epsilon(np.array([1.0]))[0]
        if e.imag != 0:
            raise UnsupportedMaterialError(
                "lossy constant permittivity has no real static limit")
        return e.real, 0.0
    e0 = model.epsilon(np.array([w0]))[0]
    if not np.isfinite(e0) or abs(e0) > CONDUCTOR_EPS_LIMIT:
        raise UnsupportedMaterialError(
            f"|eps| = {abs(e0):.3g} at omega -> 0: conductor-like response "
            "is outside the dipole-order insulator treatment")
    slope = _eps_derivative_im(model, w0)
    return e0.real, C * slope


def static_expansion(sphere):
    """StaticExpansion of an insulating sphere (errors on conductors)."""
    eps0, lambda_in = _static_eps_and_slope(sphere.dielectric)
    r3 = sphere.radius ** 3
    return StaticExpansion(
        eps0=eps0,
        lambda_in=lambda_in,
        alpha0=(eps0 - 1.0) / (eps0 + 2.0) * r3,
        alpha_i0=3.0 * r3 / (eps0 + 2.0) ** 2,
    )


def plate_static_expansion(plate):
    """PlateExpansion (eps0, lambda_in) of an insulating plate."""
    eps0, lambda_in = _static_eps_and_slope(plate.dielectric)
    return PlateExpansion(eps0=eps0, lambda_in=lambda_in)


def _alpha_from_eps(eps, r3):
    denom = eps + 2.0
    if np.any(denom == 0):
        raise PolarizabilityPoleError(
            "epsilon = -2: dipole polarizability pole (lossless plasmon "
            "resonance rejected)")
    return (eps - 1.0) / denom * r3


def polarizability(sphere, omega):
    """Electric dipole polarizability alpha(omega) in m^3 (complex)."""
    eps = epsilon(sphere.dielectric, omega)
    return _alpha_from_eps(eps, sphere.radius ** 3)


def magnetic_polarizability(sphere, omega):
    """Magnetic dipole polarizability beta(omega) in m^3 (complex)."""
    w = np.asarray(omega, dtype=float)
    mu = complex(sphere.mu)
    beta = _alpha_from_eps(np.full(w.shape, mu), sphere.radius ** 3)
    return beta


def polarizability_imag_axis(sphere, xi):
    """alpha(i*xi) in m^3 (real for passive insulators)."""
    eps = epsilon_imag_axis(sphere.dielectric, xi)
    return _alpha_from_eps(np.asarray(eps, dtype=float), sphere.radius ** 3)


def dipole_T(sphere, omega):
    """Dipole T-matrix amplitudes (T_N, T_M) = i*(2 w^3/3 c^3)*(alpha, beta).

    T_N carries the electric dipole response; T_M vanishes for mu = 1 at
    this order.  Re T <= 0 for passive media (emission).
    """
    w = np.asarray(omega, dtype=float)
    pref = 1j * (2.0 * w ** 3) / (3.0 * C ** 3)
    t_n = pref * polarizability(sphere, omega)
    if complex(sphere.mu) == 1.0:
        t_m = np.zeros(w.shape, dtype=complex)
    else:
        t_m = pref * magnetic_polarizability(sphere, omega)
    return t_n, t_m


def dipole_validity_ratio(sphere, omega):
    """|sqrt(eps)| * R * omega / c; must be << 1 for the dipole order."""
    eps = epsilon(sphere.dielectric, omega)
    w = np.asarray(omega, dtype=float)
    return np.abs(np.sqrt(eps)) * sphere.radius * w / C


def warn_dipole_validity(sphere, temperature):
    """Warn when the dipole truncation degrades at the thermal peak.

    Checks the size parameter |sqrt(eps)| R w/c and the omitted
    quadratic T-matrix terms |T|^2 against |Re T| and |Im T| at the peak
    of the thermal weight.
    """
    if temperature <= 0:
        return
    w_th = thermal_peak_frequency(temperature)
    ratio = float(dipole_validity_ratio(sphere, np.array([w_th]))[0])
    if ratio > 0.3:
        warnings.warn(
            f"dipole validity ratio |sqrt(eps)| R w/c = {ratio:.3g} > 0.3 "
            f"at the thermal peak (R = {sphere.radius:.3g} m, T = "
            f"{temperature:g} K)", ValidityWarning, stacklevel=2)
    t_n = dipole_T(sphere, np.array([w_th]))[0][0]
    t2 = abs(t_n) ** 2
    floor = min(abs(t_n.real), abs(t_n.imag))
    if t2 > 0 and floor > 0 and t2 > 0.3 * floor:
        warnings.warn(
            "omitted quadratic T-matrix terms are not negligible: "
            f"|T|^2 / min(|Re T|, |Im T|) = {t2 / floor:.3g} at the "
            "thermal peak", ValidityWarning, stacklevel=2)


# ---------------------------------------------------------------------------
# Plate reflection

def _sqrt_upper(z):
    """Square root with Im >= 0 (and Re >= 0 for positive real arguments)."""
    r = np.sqrt(np.asarray(z, dtype=complex))
    return np.where(r.imag < 0, -r, r)


def _fresnel_from_kz2(eps, mu, w, kz2_vac, polarization):
    kz2_med = eps * mu * (w / C) ** 2 - ((w / C) ** 2 - kz2_vac)
    s_vac = _sqrt_upper(kz2_vac)
    s_med = _sqrt_upper(kz2_med)
    if polarization == "M":
        num, den = mu * s_vac - s_med, mu * s_vac + s_med
    elif polarization == "N":
        num, den = eps * s_vac - s_med, eps * s_vac + s_med
    else:
        raise ValueError("polarization must be 'M' or 'N'")
    return num / den


def fresnel(plate, omega, k_perp, polarization):
    """Fresnel reflection coefficient r^P(k_perp, omega) of the half-space.

    P = 'M' is the magnetic (TE) polarization; 'N' (TM) follows from 'M'
    by interchanging mu and epsilon.  The square-root branch has
    Im >= 0, so evanescent transmitted waves decay into the plate.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0):
        raise ValueError("omega must be > 0")
    kp = np.asarray(k_perp, dtype=float)
    if np.any(kp < 0):
        raise ValueError("k_perp must be >= 0")
    eps = plate.dielectric.epsilon(w)
    mu = complex(plate.mu)
    kz2_vac = (w / C) ** 2 - kp ** 2
    return _fresnel_from_kz2(eps, mu, w, kz2_vac, polarization)


def fresnel_imag_axis(plate, xi, k_perp, polarization):
    """Reflection coefficient at imaginary frequency i*xi (real output).

    r^M = (mu*kappa - kappa_m)/(mu*kappa + kappa_m) with
    kappa = sqrt(k_perp^2 + xi^2/c^2), kappa_m the in-medium analog; r^N
    swaps mu and epsilon.  At xi = 0 this reduces to the electrostatic
    image factors (eps0-1)/(eps0+1) and (mu-1)/(mu+1).
    """
    x = np.asarray(xi, dtype=float)
    kp = np.asarray(k_perp, dtype=float)
    eps = np.asarray(plate.dielectric.epsilon_imag_axis(x), dtype=float)
    mu = complex(plate.mu)
    if mu.imag != 0:
        raise UnsupportedMaterialError(
            "complex constant permeability has no causal imaginary-axis "
            "continuation")
    mu = mu.real
    kappa = np.sqrt(kp ** 2 + (x / C) ** 2)
    kappa_m = np.sqrt(kp ** 2 + eps * mu * (x / C) ** 2)
    if polarization == "M":
        num, den = mu * kappa - kappa_m, mu * kappa + kappa_m
    elif polarization == "N":
        num, den = eps * kappa - kappa_m, eps * kappa + kappa_m
    else:
        raise ValueError("polarization must be 'M' or 'N'")
    out = np.where(den != 0, num / np.where(den != 0, den, 1.0), 0.0)
    return out


def response_breakpoints(model):
    """Frequencies worth pre-seeding in spectral integrals.

    Returns the bare resonance positions plus the locations where
    |eps + 2| is locally minimal (sphere dipole resonances sit there,
    blue-shifted from the bare resonance).
    """
    res = model.resonance_frequencies()
    if not res:
        return ()
    grid = np.geomspace(0.2 * min(res), 5.0 * max(res), 600)
    try:
        m = np.abs(model.epsilon(grid) + 2.0)
    except FrequencyRangeError:
        grid = np.asarray(
            model.omega if isinstance(model, Tabulated) else res)
        m = np.abs(model.epsilon(grid) + 2.0)
    interior = (m[1:-1] <= m[:-2]) & (m[1:-1] < m[2:])
    dips = grid[1:-1][interior]
    return tuple(sorted(set(res) | set(float(w) for w in dips)))


# ---------------------------------------------------------------------------
# Material library and file formats

def _lorentz_from_params(params, name):
    osc = tuple(
        Oscillator(omega_res=float(o["omega_res"]),
                   strength=float(o["strength"]),
                   damping=float(o["damping"]))
        for o in params.get("oscillators", ()))
    return LorentzSet(eps_inf=float(params.get("eps_inf", 1.0)),
                      oscillators=osc, name=name)


def _tabulated_from_csv(path, name):
    rows = []
    with open(path, newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            rows.append([float(v) for v in row[:3]])
    arr = np.asarray(rows)
    return Tabulated(arr[:, 0], arr[:, 1], arr[:, 2], name=name)


def material_from_dict(spec, base_dir=None):
    """Build a model from a JSON-style mapping.

    Expected keys: name, type in {lorentz, tabulated, constant},
    parameters (per type), and optionally scale_frequency.
    """
    name = spec.get("name", "")
    kind = spec.get("type")
    params = spec.get("parameters", {})
    if kind == "lorentz":
        model = _lorentz_from_params(params, name)
    elif kind == "constant":
        eps = params["eps"]
        if isinstance(eps, (list, tuple)):
            eps = complex(eps[0], eps[1])
        model = Constant(eps=complex(eps), name=name)
    elif kind == "tabulated":
        if "csv" in params:
            base = Path(base_dir) if base_dir else Path(".")
            model = _tabulated_from_csv(base / params["csv"], name)
        else:
            arr = np.asarray(params["samples"], dtype=float)
            model = Tabulated(arr[:, 0], arr[:, 1], arr[:, 2], name=name)
    else:
        raise MaterialError(f"unknown material type {kind!r}")
    factor = spec.get("scale_frequency")
    if factor is not None:
        model = model.scale_frequency(float(factor))
    return model


def load_material_file(path):
    path = Path(path)
    with open(path) as fh:
        spec = json.load(fh)
    return material_from_dict(spec, base_dir=path.parent)


def builtin_material(name):
    """Packaged presets: 'sio2' (two-oscillator surrogate) and 'sic'."""
    key = name.lower()
    alias = {"sio2": "sio2_surrogate", "sio2_surrogate": "sio2_surrogate",
             "sic": "sic_spitzer", "sic_spitzer": "sic_spitzer"}
    if key not in alias:
        raise MaterialError(f"no builtin material named {name!r}")
    return load_material_file(_DATA_DIR / f"{alias[key]}.json")


def resolve_material(ref, materials_dir=None):
    """Resolve a config reference: mapping (inline), file path, or name.

    Names are looked up as <name>.json first in materials_dir (or the
    directory named by NEQFORCE_MATERIALS_DIR), then among the packaged
    presets.
    """
    if isinstance(ref, DielectricModel):
        return ref
    if isinstance(ref, dict):
        return material_from_dict(ref)
    ref = str(ref)
    p = Path(ref)
    if p.suffix == ".json" and p.exists():
        return load_material_file(p)
    search = []
    if materials_dir:
        search.append(Path(materials_dir))
    env_dir = os.environ.get(MATERIALS_DIR_ENV)
    if env_dir:
        search.append(Path(env_dir))
    for d in search:
        cand = d / f"{ref}.json"
        if cand.exists():
            return load_material_file(cand)
    return builtin_material(ref)
