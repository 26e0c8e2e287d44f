# crystal.py
"""
Physical constants, lattice geometry and photon kinematics.

Units everywhere: keV, Å, Å⁻¹, radians. Vacuum dispersion (n = 1) is assumed;
the x-ray index differs from 1 by ~1e-6, which shifts table angles by far less
than the reproduction tolerance.
"""
import math
from typing import Tuple

from scipy import constants as codata

from errors import InvalidInputError
from models import BeamKinematics, CrystalReflection, EnergySplit, Photon


# h·c in keV·Å (12.398419843...)
HC = codata.h * codata.c / codata.e * 1e10 / 1e3

DIAMOND_LATTICE_A = 3.5668
DIAMOND_111 = (1, 1, 1)


def make_reflection(lattice_constant: float, miller: Tuple[int, int, int]) -> CrystalReflection:
    if not lattice_constant > 0:
        raise InvalidInputError(f"lattice constant must be positive, got {lattice_constant}")
    if len(miller) != 3:
        raise InvalidInputError(f"Miller indices need three integers, got {miller!r}")
    if tuple(miller) == (0, 0, 0):
        raise InvalidInputError("Miller indices (0,0,0) do not define a reflection")

    return CrystalReflection(
        lattice_constant=float(lattice_constant),
        miller=tuple(int(i) for i in miller)
    )


def diamond_111(lattice_constant: float = DIAMOND_LATTICE_A) -> CrystalReflection:
    return make_reflection(lattice_constant, DIAMOND_111)


def wavenumber(energy: float) -> float:
    """Vacuum wavenumber |k| = 2π·E/HC in Å⁻¹"""
    if not energy > 0:
        raise InvalidInputError(f"photon energy must be positive, got {energy}")
    return 2.0 * math.pi * energy / HC


def photon(energy: float) -> Photon:
    return Photon(energy=energy, wavenumber=wavenumber(energy))


def split(pump_energy: float, signal_fraction: float) -> EnergySplit:
    """Share the pump photon between signal and idler (ω_s + ω_i = ω_p)"""
    if not pump_energy > 0:
        raise InvalidInputError(f"pump energy must be positive, got {pump_energy}")
    if not 0.0 < signal_fraction < 1.0:
        raise InvalidInputError(f"signal fraction must lie in (0, 1), got {signal_fraction}")

    signal_energy = pump_energy * signal_fraction
    return EnergySplit(
        pump_energy=pump_energy,
        signal_fraction=signal_fraction,
        signal_energy=signal_energy,
        idler_energy=pump_energy - signal_energy
    )


def kinematics(reflection: CrystalReflection, energies: EnergySplit) -> BeamKinematics:
    return BeamKinematics(
        reflection=reflection,
        split=energies,
        k_pump=wavenumber(energies.pump_energy),
        k_signal=wavenumber(energies.signal_energy),
        k_idler=wavenumber(energies.idler_energy)
    )


def bragg_angle(reflection: CrystalReflection, energy: float) -> float:
    """Kinematic Bragg angle sin θ_B = G / 2k"""
    ratio = reflection.g_magnitude / (2.0 * wavenumber(energy))
    if ratio > 1.0:
        raise InvalidInputError(
            f"{energy} keV is below the cutoff of reflection {reflection.miller}"
        )
    return math.asin(ratio)
