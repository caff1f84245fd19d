"""Equilibrium and non-equilibrium fluctuation forces between small
spheres and between a sphere and a plate, at dipole order in the
one-reflection approximation, for bodies held at independent
temperatures."""

__version__ = "0.1.0"

from .constants import CONSTANTS, PhysicalConstants, thermal_wavelength
from .quadrature import (IntegralResult, QuadratureSettings,
                         bose_weighted_integral, evanescent_integral,
                         matsubara_sum, oscillatory_tail_integral)
from .materials import (Constant, DielectricModel, LorentzSet, Oscillator,
                        PlateSpec, ScaledFrequency, SphereSpec,
                        StaticExpansion, Tabulated, builtin_material,
                        dipole_T, epsilon, epsilon_imag_axis, fresnel,
                        fresnel_imag_axis, load_material_file,
                        polarizability, resolve_material, scale_frequency,
                        static_expansion)
from .two_spheres import (ForceBreakdown, TwoSphereSystem,
                          equilibrium_force, interaction_force_F12,
                          self_force_F22, total_force_on_sphere1,
                          total_force_on_sphere2)
from .sphere_plate import (SpherePlateBreakdown, SpherePlateSystem,
                           plate_source_force, sphere_self_force,
                           total_force_on_sphere)
from .asymptotics import Regime, evaluate, validate_against_numeric
from .analysis import (CurveSample, EquilibriumPoint, ForceCurve, SppPoint,
                       default_grid, find_equilibria, find_spp, force_curve,
                       oscillation_wavelength)

__all__ = [
    "CONSTANTS", "PhysicalConstants", "thermal_wavelength",
    "IntegralResult", "QuadratureSettings", "bose_weighted_integral",
    "evanescent_integral", "matsubara_sum", "oscillatory_tail_integral",
    "Constant", "DielectricModel", "LorentzSet", "Oscillator", "PlateSpec",
    "ScaledFrequency", "SphereSpec", "StaticExpansion", "Tabulated",
    "builtin_material", "dipole_T", "epsilon", "epsilon_imag_axis",
    "fresnel", "fresnel_imag_axis", "load_material_file", "polarizability",
    "resolve_material", "scale_frequency", "static_expansion",
    "ForceBreakdown", "TwoSphereSystem", "equilibrium_force",
    "interaction_force_F12", "self_force_F22", "total_force_on_sphere1",
    "total_force_on_sphere2", "SpherePlateBreakdown", "SpherePlateSystem",
    "plate_source_force", "sphere_self_force", "total_force_on_sphere",
    "Regime", "evaluate", "validate_against_numeric",
    "CurveSample", "EquilibriumPoint", "ForceCurve", "SppPoint",
    "default_grid", "find_equilibria", "find_spp", "force_curve",
    "oscillation_wavelength",
]
