"""Command-line front end: curve sweeps, equilibria, SPP reports, and the
asymptotic validation suite.

Configs are JSON (microns and kelvin); outputs are CSV for curves and
JSON for structured reports, in SI units, byte-reproducible for a fixed
config and version.  Exit codes: 0 success, 1 validation failure,
2 config error, 3 numerical failure.
"""

import argparse
import json
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__
from .analysis import find_equilibria, find_spp, force_curve
from .asymptotics import Regime, validate_against_numeric
from .materials import (LorentzSet, MaterialError, Oscillator, PlateSpec,
                        SphereSpec, resolve_material)
from .quadrature import QuadratureSettings
from .sphere_plate import SpherePlateSystem
from .two_spheres import ATTRACTION_POSITIVE, TwoSphereSystem

__all__ = ["main", "ConfigError", "load_config", "build_system",
           "run_validation_suite"]

_UM = 1e-6


class ConfigError(ValueError):
    def __init__(self, path, message):
        self.path = path
        super().__init__(f"config error at {path}: {message}")


def _require(cfg, key, path, kind=None):
    if key not in cfg:
        raise ConfigError(f"{path}.{key}", "missing required field")
    val = cfg[key]
    if kind is not None and not isinstance(val, kind):
        raise ConfigError(f"{path}.{key}",
                          f"expected {kind.__name__}, got {type(val).__name__}")
    return val


def load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError("<file>", str(exc))
    except json.JSONDecodeError as exc:
        raise ConfigError("<file>", f"invalid JSON: {exc}")


def _temperature(block, key, path):
    val = _require(block, key, path, (int, float))
    if val < 0:
        raise ConfigError(f"{path}.{key}", "temperature must be >= 0")
    return float(val)


def _material(cfg_materials, key, path, materials_dir=None):
    ref = _require(cfg_materials, key, path)
    try:
        return resolve_material(ref, materials_dir)
    except (MaterialError, OSError, KeyError, TypeError) as exc:
        raise ConfigError(f"{path}.{key}", f"unresolvable material: {exc}")


def build_system(cfg, materials_dir=None):
    """TwoSphereSystem or SpherePlateSystem from a config mapping.

    The separation is filled per grid point later; here it is seeded with
    the grid minimum.
    """
    geometry = _require(cfg, "geometry", "config", str)
    mats = _require(cfg, "materials", "config", dict)
    temps = _require(cfg, "temperatures_K", "config", dict)
    d_lo = grid_from_config(cfg)[0]

    if geometry == "two_spheres":
        radii = _require(cfg, "radii_um", "config", list)
        if len(radii) != 2:
            raise ConfigError("config.radii_um", "need exactly 2 radii")
        s1 = SphereSpec(radius=float(radii[0]) * _UM,
                        dielectric=_material(mats, "sphere1",
                                             "config.materials",
                                             materials_dir),
                        temperature=_temperature(temps, "T1",
                                                 "config.temperatures_K"))
        s2 = SphereSpec(radius=float(radii[1]) * _UM,
                        dielectric=_material(mats, "sphere2",
                                             "config.materials",
                                             materials_dir),
                        temperature=_temperature(temps, "T2",
                                                 "config.temperatures_K"))
        t_env = _temperature(temps, "T_env", "config.temperatures_K")
        return TwoSphereSystem(s1, s2, d_lo, t_env)

    if geometry == "sphere_plate":
        radii = cfg.get("radii_um")
        if isinstance(radii, list):
            if len(radii) != 1:
                raise ConfigError("config.radii_um",
                                  "sphere_plate takes a single radius")
            radius = float(radii[0])
        else:
            radius = float(_require(cfg, "radii_um", "config", (int, float)))
        sphere = SphereSpec(radius=radius * _UM,
                            dielectric=_material(mats, "sphere",
                                                 "config.materials",
                                                 materials_dir),
                            temperature=_temperature(
                                temps, "T_s", "config.temperatures_K"))
        plate = PlateSpec(dielectric=_material(mats, "plate",
                                               "config.materials",
                                               materials_dir),
                          temperature=_temperature(temps, "T_p",
                                                   "config.temperatures_K"))
        t_env = _temperature(temps, "T_env", "config.temperatures_K")
        return SpherePlateSystem(sphere, plate, d_lo, t_env)

    raise ConfigError("config.geometry",
                      f"must be 'two_spheres' or 'sphere_plate', got "
                      f"{geometry!r}")


def grid_from_config(cfg):
    g = _require(cfg, "d_grid_um", "config", dict)
    lo = _require(g, "min", "config.d_grid_um", (int, float)) * _UM
    hi = _require(g, "max", "config.d_grid_um", (int, float)) * _UM
    n = _require(g, "points", "config.d_grid_um", int)
    spacing = g.get("spacing", "log")
    if n < 1:
        raise ConfigError("config.d_grid_um.points", "must be >= 1")
    if not 0 < lo <= hi:
        raise ConfigError("config.d_grid_um", "need 0 < min <= max")
    if spacing == "log":
        return np.geomspace(lo, hi, n)
    if spacing == "lin":
        return np.linspace(lo, hi, n)
    raise ConfigError("config.d_grid_um.spacing", "must be 'lin' or 'log'")


def settings_from_config(cfg, rel_tol=None):
    q = cfg.get("quadrature", {}) if cfg else {}
    if not isinstance(q, dict):
        raise ConfigError("config.quadrature", "must be a mapping")
    allowed = {"rel_tol", "abs_floor", "bose_cutoff_x", "max_subdivisions",
               "matsubara_tail_tol"}
    unknown = set(q) - allowed
    if unknown:
        raise ConfigError("config.quadrature",
                          f"unknown fields {sorted(unknown)}")
    if rel_tol is not None:
        q = dict(q, rel_tol=rel_tol)
    try:
        return QuadratureSettings(**q)
    except (TypeError, ValueError) as exc:
        raise ConfigError("config.quadrature", str(exc))


def _curve(cfg, settings, threads):
    system = build_system(cfg)
    grid = grid_from_config(cfg)
    if threads > 1:
        def one(d):
            return force_curve(replace(system, separation=float(d)),
                               np.array([d]), settings).samples[0]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            samples = list(pool.map(one, grid))
        curve = force_curve(system, grid[:1], settings)
        curve.samples = samples
        return curve
    return force_curve(system, grid, settings)


def cmd_curve(cfg, out_path, settings, threads=1):
    curve = _curve(cfg, settings, threads)
    lines = [
        f"# neqforce {__version__} curve",
        f"# sign convention: {ATTRACTION_POSITIVE}",
        "# units: d_m in m, forces in N; breakdown columns are for body 2"
        " (sphere 2 or the sphere)",
        "d_m,F_total_1,F_total_2,F_eq,F_interaction,F_self,convergence_flag",
    ]
    clean = True
    for s in curve.samples:
        b1, b2 = s.breakdown1, s.breakdown2
        flag = int(b1.converged and b2.converged
                   and math.isfinite(b1.total) and math.isfinite(b2.total))
        clean = clean and bool(flag)
        lines.append(",".join([
            f"{s.d:.17e}", f"{b1.total:.17e}", f"{b2.total:.17e}",
            f"{b2.equilibrium:.17e}", f"{b2.interaction_from_other:.17e}",
            f"{b2.self_emission:.17e}", str(flag)]))
    with open(out_path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0 if clean else 3


def cmd_equilibria(cfg, out_path, settings, threads=1):
    curve = _curve(cfg, settings, threads)
    points = find_equilibria(curve)
    report = {
        "version": __version__,
        "geometry": cfg["geometry"],
        "sign_convention": ATTRACTION_POSITIVE,
        "points": [{"d_star_m": p.d_star, "stability": p.stability,
                    "bracket_m": [p.bracket[0], p.bracket[1]]}
                   for p in points],
    }
    with open(out_path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    clean = all(s.breakdown1.converged and s.breakdown2.converged
                for s in curve.samples)
    return 0 if clean else 3


def cmd_spp(cfg, out_path, settings, threads=1):
    if cfg.get("geometry") != "two_spheres":
        raise ConfigError("config.geometry",
                          "SPP requires two spheres")
    masses = cfg.get("masses_kg")
    if masses is not None and (not isinstance(masses, list)
                               or len(masses) != 2):
        raise ConfigError("config.masses_kg", "need [m1, m2]")
    curve = _curve(cfg, settings, threads)
    points = find_spp(curve, masses=tuple(masses) if masses else None)
    report = {
        "version": __version__,
        "geometry": "two_spheres",
        "mass_model": "explicit" if masses else "solid_sphere_radius_cubed",
        "points": [{"d_star_m": p.d_star, "stability": p.stability,
                    "mass_ratio": p.mass_ratio} for p in points],
    }
    with open(out_path, "w") as fh:
        json.dump(report, fh, indent=2)
        fh.write("\n")
    clean = all(s.breakdown1.converged and s.breakdown2.converged
                for s in curve.samples)
    return 0 if clean else 3


# ---------------------------------------------------------------------------
# Validation suite

def _validation_material():
    w_r = 2.0 * math.pi * 299792458.0 / 1e-6   # resonance at 1 um
    return LorentzSet(eps_inf=1.0, oscillators=(
        Oscillator(omega_res=w_r, strength=2.0 * w_r ** 2,
                   damping=0.05 * w_r),), name="validation_lorentz")


def default_validation_suite():
    """(label, regime, system, tolerance) cases covering every regime.

    Scale separations chosen so each closed form holds within its
    tolerance; temperatures set the thermal wavelength per case.
    """
    from .constants import HBAR, C, K_B
    mat = _validation_material()

    def t_of(lam_t):
        return HBAR * C / (K_B * lam_t)

    def spheres(d, r1, r2, t1=0.0, t2=0.0, t_env=0.0):
        return TwoSphereSystem(
            SphereSpec(radius=r1, dielectric=mat, temperature=t1),
            SphereSpec(radius=r2, dielectric=mat, temperature=t2),
            d, t_env)

    def plate_sys(d, r, t_s=0.0, t_p=0.0, t_env=0.0):
        return SpherePlateSystem(
            SphereSpec(radius=r, dielectric=mat, temperature=t_s),
            PlateSpec(dielectric=mat, temperature=t_p), d, t_env)

    t100 = t_of(100e-6)    # lambda_T = 100 um
    t30 = t_of(30e-6)      # lambda_T = 30 um
    t3000 = t_of(3000e-6)  # lambda_T = 3 mm
    cases = [
        ("interaction low-T, d/lambda_T=0.1",
         Regime.TWO_SPHERE_LOW_T,
         spheres(10e-6, 5e-8, 5e-8, t1=t100), 0.05),
        ("interaction low-T, d/lambda_T=1",
         Regime.TWO_SPHERE_LOW_T,
         spheres(100e-6, 5e-8, 5e-8, t1=t100), 0.05),
        ("interaction low-T, d/lambda_T=10",
         Regime.TWO_SPHERE_LOW_T,
         spheres(1000e-6, 5e-8, 5e-8, t1=t100), 0.05),
        ("self force, d largest",
         Regime.TWO_SPHERE_SELF_LARGE_D,
         spheres(900e-6, 1e-7, 1e-7, t2=t30), 0.05),
        ("self force, lambda_T largest",
         Regime.TWO_SPHERE_SELF_HIGH_LAMBDA_T,
         spheres(1e-6, 2.5e-8, 2.5e-8, t2=t30), 0.05),
        ("two-sphere equilibrium, short distance",
         Regime.TWO_SPHERE_EQ_SHORT,
         spheres(30e-6, 5e-7, 5e-7, t_env=t3000), 0.02),
        ("two-sphere equilibrium, long distance",
         Regime.TWO_SPHERE_EQ_LONG,
         spheres(770e-6, 1e-6, 1e-6, t_env=300.0), 0.02),
        ("plate propagating, low T",
         Regime.PLATE_PROP_LOW_T,
         plate_sys(100e-6, 1e-7, t_p=t30), 0.05),
        ("plate evanescent, d largest",
         Regime.PLATE_EVAN_LARGE_D,
         plate_sys(1800e-6, 1e-7, t_p=t30), 0.05),
        ("plate evanescent, lambda_T largest",
         Regime.PLATE_EVAN_HIGH_LAMBDA_T,
         plate_sys(1e-6, 2.5e-8, t_p=t100), 0.05),
        ("plate self force, lambda_T largest",
         Regime.PLATE_SELF_HIGH_LAMBDA_T,
         plate_sys(1e-6, 2.5e-8, t_s=t100), 0.05),
        ("sphere-plate equilibrium, short distance (power law)",
         Regime.PLATE_EQ_SHORT,
         plate_sys(30e-6, 1e-7, t_env=t3000), 0.05),
        ("sphere-plate equilibrium, long distance",
         Regime.PLATE_EQ_LONG,
         plate_sys(770e-6, 1e-6, t_env=300.0), 0.03),
    ]
    return cases


def run_validation_suite(settings, threshold=30.0):
    """Run every regime check; returns (reports, all_passed)."""
    reports = []
    all_ok = True
    for label, regime, system, tol in default_validation_suite():
        rep = validate_against_numeric(regime, system, settings, threshold)
        passed = bool(rep.regime_valid and rep.rel_dev < tol)
        all_ok = all_ok and passed
        reports.append({
            "label": label,
            "regime": regime.value,
            "numeric": rep.numeric,
            "closed_form": rep.closed_form,
            "rel_dev": rep.rel_dev,
            "tolerance": tol,
            "regime_valid": rep.regime_valid,
            "passed": passed,
        })
    return reports, all_ok


def cmd_validate(cfg, out_path, settings):
    reports, all_ok = run_validation_suite(settings)
    payload = {"version": __version__, "passed": all_ok, "regimes": reports}
    if out_path:
        with open(out_path, "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    for rep in reports:
        status = "pass" if rep["passed"] else "FAIL"
        print(f"{status}  {rep['regime']:34s} rel_dev={rep['rel_dev']:.3e} "
              f"(tol {rep['tolerance']:g})  {rep['label']}")
    return 0 if all_ok else 1


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="neqforce",
        description="Equilibrium and non-equilibrium fluctuation forces "
                    "for small spheres and plates (dipole order).")
    parser.add_argument("--version", action="version",
                        version=f"neqforce {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, needs_config in (("curve", True), ("equilibria", True),
                               ("spp", True), ("validate", False)):
        p = sub.add_parser(name)
        p.add_argument("--config", required=needs_config,
                       help="JSON run configuration")
        p.add_argument("--out", required=(name != "validate"),
                       help="output file (CSV for curve, JSON otherwise)")
        p.add_argument("--threads", type=int, default=1)
        p.add_argument("--rel-tol", type=float, default=None,
                       help="override quadrature relative tolerance")
    args = parser.parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else {}
        settings = settings_from_config(cfg, args.rel_tol)
        if args.command == "curve":
            return cmd_curve(cfg, args.out, settings, args.threads)
        if args.command == "equilibria":
            return cmd_equilibria(cfg, args.out, settings, args.threads)
        if args.command == "spp":
            return cmd_spp(cfg, args.out, settings, args.threads)
        return cmd_validate(cfg, args.out, settings)
    except ConfigError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ArithmeticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
