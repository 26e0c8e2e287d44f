# nonlinearity.py
"""
Plasma-nonlinearity current density for x-ray down-conversion.

The projected envelope at the signal frequency is

    J_s ∝ ω_i ω_p (G·ê_s)(ê_p·ê_i) − ω_s ω_i (G·ê_p)(ê_i·ê_s) + ω_s ω_p (G·ê_i)(ê_p·ê_s)

up to the prefactor −q²ρ_g ω_s E_p E_i* / (4 m² ω_p² ω_i² ω_s²). That prefactor
is the same for every polarization channel at fixed frequencies and is
strictly negative, so it is dropped: relative magnitudes and relative signs,
which are all the Bell-state classification uses, are unchanged. The bracket
is divided by ω_p² so that it is homogeneous of degree zero in the energies.
"""
import math
from typing import Sequence, Tuple

import numpy as np

from crystal import wavenumber
from errors import InvalidInputError
from models import (
    BeamKinematics,
    BellState,
    Channel,
    ChannelAmplitudes,
    PhaseMatchSolution,
    PolarizationLabel,
)
from phasematch import unit_vector

H = PolarizationLabel.H
V = PolarizationLabel.V

CHANNEL_A = Channel(pump=H, signal=H, idler=H)
CHANNEL_B = Channel(pump=H, signal=V, idler=V)
CHANNEL_C = Channel(pump=V, signal=H, idler=V)
CHANNEL_D = Channel(pump=V, signal=V, idler=H)

ENERGY_TOL = 1e-9

V_HAT = np.array([0.0, 0.0, 1.0])


def polarization_vectors(theta: float) -> Tuple[np.ndarray, np.ndarray]:
    """Ĥ(θ) = ẑ × k̂(θ) in the scattering plane and V̂ = ẑ normal to it"""
    h_hat = np.array([-math.sin(theta), math.cos(theta), 0.0])
    return h_hat, V_HAT.copy()


def _field(label: PolarizationLabel, theta: float) -> np.ndarray:
    h_hat, v_hat = polarization_vectors(theta)
    return h_hat if label is H else v_hat


def _check_energies(omega_p: float, omega_s: float, omega_i: float) -> None:
    if min(omega_p, omega_s, omega_i) <= 0:
        raise InvalidInputError(
            f"photon energies must be positive (ω_p={omega_p}, ω_s={omega_s}, ω_i={omega_i})"
        )
    if abs(omega_s + omega_i - omega_p) > ENERGY_TOL * omega_p:
        raise InvalidInputError(
            f"energy not conserved: {omega_s} + {omega_i} != {omega_p} keV"
        )


def _bracket(
    omega_p: float,
    omega_s: float,
    omega_i: float,
    g_vec: np.ndarray,
    e_p: np.ndarray,
    e_s: np.ndarray,
    e_i: np.ndarray
) -> float:
    first = omega_i * omega_p * np.dot(g_vec, e_s) * np.dot(e_p, e_i)
    second = omega_s * omega_i * np.dot(g_vec, e_p) * np.dot(e_i, e_s)
    third = omega_s * omega_p * np.dot(g_vec, e_i) * np.dot(e_p, e_s)
    return float((first - second + third) / (omega_p * omega_p))


def bracket_amplitude(
    channel: Channel,
    theta_p: float,
    theta_s: float,
    theta_i: float,
    omega_p: float,
    omega_s: float,
    omega_i: float,
    g_vec: Sequence[float]
) -> float:
    _check_energies(omega_p, omega_s, omega_i)
    return _bracket(
        omega_p,
        omega_s,
        omega_i,
        np.asarray(g_vec, dtype=float),
        _field(channel.pump, theta_p),
        _field(channel.signal, theta_s),
        _field(channel.idler, theta_i)
    )


def full_current_oracle(
    theta_p: float,
    theta_s: float,
    theta_i: float,
    omega_p: float,
    omega_s: float,
    omega_i: float,
    g_vec: Sequence[float],
    e_p: Sequence[float],
    e_i: Sequence[float],
    e_s: Sequence[float]
) -> complex:
    """
    Unprojected cold-plasma current, evaluated term by term with plane waves
    and ρ₀(r) = ρ_g·exp(iG·r), then projected on ê_s.

    ∇ρ₀ → iGρ₀ and ∇(E_p·E_i*) → i(k_p − k_i)(E_p·E_i*) for the
    difference-frequency envelope. q, m, ρ_g and the field amplitudes are
    set to one; the result is divided by the envelope prefactor quoted above and by ω_p²
    so that it lands in the same units as bracket_amplitude.
    """
    _check_energies(omega_p, omega_s, omega_i)
    g_vec = np.asarray(g_vec, dtype=complex)
    e_p = np.asarray(e_p, dtype=float)
    e_i = np.asarray(e_i, dtype=float)
    e_s = np.asarray(e_s, dtype=float)

    k_p = wavenumber(omega_p) * unit_vector(theta_p)
    k_i = wavenumber(omega_i) * unit_vector(theta_i)

    # E_p/2 · E_i*/2
    envelope = 0.25
    grad_rho = 1j * g_vec
    grad_product = 1j * (k_p - k_i) * np.dot(e_p, e_i) * envelope

    density_term = -grad_product / (omega_s * omega_i * omega_p)
    pump_term = -np.dot(grad_rho, e_p) * envelope * e_i / (omega_p * omega_p * omega_i)
    idler_term = np.dot(grad_rho, e_i) * envelope * e_p / (omega_i * omega_i * omega_p)

    current = 1j * (density_term + pump_term + idler_term)
    projected = np.dot(current, e_s)

    prefactor = -omega_s / (4.0 * omega_p ** 2 * omega_i ** 2 * omega_s ** 2)
    return complex(projected / prefactor / (omega_p * omega_p))


def selection_rule(
    pump: PolarizationLabel,
    signal: PolarizationLabel,
    idler: PolarizationLabel
) -> bool:
    """In-plane pump keeps signal and idler alike; a normal pump makes them differ"""
    if pump is H:
        return signal is idler
    return signal is not idler


def channel_amplitudes(solution: PhaseMatchSolution, kin: BeamKinematics) -> ChannelAmplitudes:
    energies = kin.split
    g_vec = (0.0, -kin.g, 0.0)
    angles = (solution.theta_p, solution.theta_s, solution.theta_i)
    omegas = (energies.pump_energy, energies.signal_energy, energies.idler_energy)

    a, b, c, d = (
        bracket_amplitude(channel, *angles, *omegas, g_vec)
        for channel in (CHANNEL_A, CHANNEL_B, CHANNEL_C, CHANNEL_D)
    )
    return ChannelAmplitudes(a=a, b=b, c=c, d=d, theta_p=solution.theta_p, solution=solution)


# =================================================
# TWO-PHOTON POLARIZATION STATE
# =================================================

def concurrence(first: float, second: float) -> float:
    """Entanglement of (x|..> + y|..>)/norm: 1 when |x| = |y|, 0 when either vanishes"""
    norm = first * first + second * second
    if norm == 0.0:
        return 0.0
    return 2.0 * abs(first * second) / norm


def pair_state(amplitudes: ChannelAmplitudes, pump: PolarizationLabel) -> np.ndarray:
    """Normalized state in the (HH, HV, VH, VV) basis, signal first"""
    if pump is H:
        state = np.array([amplitudes.a, 0.0, 0.0, amplitudes.b])
    else:
        state = np.array([0.0, amplitudes.c, amplitudes.d, 0.0])

    norm = np.linalg.norm(state)
    if norm == 0.0:
        raise InvalidInputError(f"no pairs are generated with pump {pump.value} at this angle")
    return state / norm


def bell_vector(state: BellState) -> np.ndarray:
    root_half = 1.0 / math.sqrt(2.0)
    vectors = {
        BellState.PHI_PLUS: [root_half, 0.0, 0.0, root_half],
        BellState.PHI_MINUS: [root_half, 0.0, 0.0, -root_half],
        BellState.PSI_PLUS: [0.0, root_half, root_half, 0.0],
        BellState.PSI_MINUS: [0.0, root_half, -root_half, 0.0],
    }
    return np.array(vectors[state])


def bell_fidelity(amplitudes: ChannelAmplitudes, state: BellState) -> float:
    psi = pair_state(amplitudes, state.pump_polarization)
    return float(np.dot(bell_vector(state), psi) ** 2)
