# test_nonlinearity.py
import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crystal import diamond_111, kinematics, split
from errors import InvalidInputError
from models import BellState, Branch, Channel, PolarizationLabel
from nonlinearity import (
    CHANNEL_A,
    CHANNEL_B,
    CHANNEL_C,
    CHANNEL_D,
    bell_fidelity,
    bell_vector,
    bracket_amplitude,
    channel_amplitudes,
    concurrence,
    full_current_oracle,
    pair_state,
    polarization_vectors,
    selection_rule,
)
from phasematch import solve_at

H = PolarizationLabel.H
V = PolarizationLabel.V

ALL_CHANNELS = [
    Channel(pump=p, signal=s, idler=i)
    for p, s, i in itertools.product((H, V), repeat=3)
]


def random_configurations(rng, count):
    """Phase-matched (kinematics, solution) pairs at random energies, splits and pump angles"""
    reflection = diamond_111()
    configurations = []
    while len(configurations) < count:
        kin = kinematics(reflection, split(rng.uniform(8.0, 60.0), rng.uniform(0.1, 0.9)))
        branch = Branch.PLUS if rng.random() < 0.5 else Branch.MINUS
        solution = solve_at(rng.uniform(0.0, math.pi), kin, branch)
        if solution is not None:
            configurations.append((kin, solution))
    return configurations


def field(label, theta):
    h_hat, v_hat = polarization_vectors(theta)
    return h_hat if label is H else v_hat


# ===== oracle =====

def test_bracket_matches_full_current():
    rng = np.random.default_rng(7)

    for kin, solution in random_configurations(rng, 1000):
        energies = kin.split
        omegas = (energies.pump_energy, energies.signal_energy, energies.idler_energy)
        angles = (solution.theta_p, solution.theta_s, solution.theta_i)
        g_vec = (0.0, -kin.g, 0.0)
        scale = kin.g

        for channel in ALL_CHANNELS:
            expected = bracket_amplitude(channel, *angles, *omegas, g_vec)
            oracle = full_current_oracle(
                *angles,
                *omegas,
                g_vec,
                e_p=field(channel.pump, solution.theta_p),
                e_i=field(channel.idler, solution.theta_i),
                e_s=field(channel.signal, solution.theta_s)
            )
            assert abs(oracle.real - expected) <= 1e-12 * scale
            assert abs(oracle.imag) <= 1e-12 * scale


# ===== selection rules =====

def test_selection_rule_table():
    allowed = {str(c) for c in ALL_CHANNELS if selection_rule(c.pump, c.signal, c.idler)}
    assert allowed == {str(CHANNEL_A), str(CHANNEL_B), str(CHANNEL_C), str(CHANNEL_D)}


def test_forbidden_channels_vanish():
    rng = np.random.default_rng(11)

    for kin, solution in random_configurations(rng, 100):
        energies = kin.split
        omegas = (energies.pump_energy, energies.signal_energy, energies.idler_energy)
        angles = (solution.theta_p, solution.theta_s, solution.theta_i)

        for channel in ALL_CHANNELS:
            value = bracket_amplitude(channel, *angles, *omegas, (0.0, -kin.g, 0.0))
            if not selection_rule(channel.pump, channel.signal, channel.idler):
                assert abs(value) <= 1e-14


def test_channel_closed_forms(off_degenerate_kin):
    kin = off_degenerate_kin
    f_s, f_i, g = 0.6, 0.4, kin.g

    for theta_p in np.linspace(0.2, math.pi - 0.2, 15):
        solution = solve_at(theta_p, kin, Branch.MINUS)
        amplitudes = channel_amplitudes(solution, kin)
        t_s, t_i = solution.theta_s, solution.theta_i

        expected_a = -g * (
            f_i * math.cos(t_s) * math.cos(theta_p - t_i)
            - f_s * f_i * math.cos(theta_p) * math.cos(t_i - t_s)
            + f_s * math.cos(t_i) * math.cos(theta_p - t_s)
        )
        assert amplitudes.a == pytest.approx(expected_a, abs=1e-12)
        assert amplitudes.b == pytest.approx(f_s * f_i * g * math.cos(theta_p), abs=1e-12)
        assert amplitudes.c == pytest.approx(-f_i * g * math.cos(t_s), abs=1e-12)
        assert amplitudes.d == pytest.approx(-f_s * g * math.cos(t_i), abs=1e-12)


def test_zero_reciprocal_vector_switches_everything_off():
    for channel in ALL_CHANNELS:
        assert bracket_amplitude(channel, 0.3, 0.3, 0.3, 25.0, 12.5, 12.5, (0.0, 0.0, 0.0)) == 0.0


# ===== symmetries =====

@settings(max_examples=100, deadline=None)
@given(
    st.floats(min_value=-math.pi, max_value=math.pi),
    st.floats(min_value=-math.pi, max_value=math.pi),
    st.floats(min_value=-math.pi, max_value=math.pi),
    st.floats(min_value=0.05, max_value=0.95),
)
def test_signal_idler_exchange(theta_p, theta_s, theta_i, fraction):
    omega_p = 25.0
    omega_s = omega_p * fraction
    omega_i = omega_p - omega_s
    g_vec = (0.0, -3.05, 0.0)

    def amplitude(channel, t_s, t_i, w_s, w_i):
        return bracket_amplitude(channel, theta_p, t_s, t_i, omega_p, w_s, w_i, g_vec)

    straight = {c: amplitude(c, theta_s, theta_i, omega_s, omega_i) for c in (CHANNEL_A, CHANNEL_B, CHANNEL_C, CHANNEL_D)}
    exchanged = {c: amplitude(c, theta_i, theta_s, omega_i, omega_s) for c in (CHANNEL_A, CHANNEL_B, CHANNEL_C, CHANNEL_D)}

    assert exchanged[CHANNEL_A] == pytest.approx(straight[CHANNEL_A], abs=1e-12)
    assert exchanged[CHANNEL_B] == pytest.approx(straight[CHANNEL_B], abs=1e-12)
    assert exchanged[CHANNEL_C] == pytest.approx(straight[CHANNEL_D], abs=1e-12)
    assert exchanged[CHANNEL_D] == pytest.approx(straight[CHANNEL_C], abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.1, max_value=10.0), st.floats(min_value=0.05, max_value=0.95))
def test_energy_scale_invariance(factor, fraction):
    omega_s = 25.0 * fraction
    reference = bracket_amplitude(CHANNEL_A, 1.1, 0.4, 1.9, 25.0, omega_s, 25.0 - omega_s, (0.0, -3.05, 0.0))
    scaled = bracket_amplitude(
        CHANNEL_A, 1.1, 0.4, 1.9,
        25.0 * factor, omega_s * factor, 25.0 * factor - omega_s * factor,
        (0.0, -3.05, 0.0)
    )
    assert scaled == pytest.approx(reference, rel=1e-9, abs=1e-12)


def test_energy_conservation_enforced():
    with pytest.raises(InvalidInputError):
        bracket_amplitude(CHANNEL_A, 0.3, 0.3, 0.3, 25.0, 12.0, 12.0, (0.0, -3.0, 0.0))


def test_non_positive_energy_rejected():
    with pytest.raises(InvalidInputError):
        bracket_amplitude(CHANNEL_A, 0.3, 0.3, 0.3, 25.0, 0.0, 25.0, (0.0, -3.0, 0.0))


# ===== pair state =====

def test_normal_incidence_is_maximally_entangled(degenerate_kin):
    amplitudes = channel_amplitudes(solve_at(math.pi / 2, degenerate_kin, Branch.PLUS), degenerate_kin)
    assert abs(amplitudes.c) == pytest.approx(abs(amplitudes.d), rel=1e-12)
    assert abs(amplitudes.c) > 0.1
    assert amplitudes.c * amplitudes.d < 0

    assert concurrence(amplitudes.c, amplitudes.d) == pytest.approx(1.0, abs=1e-12)
    assert bell_fidelity(amplitudes, BellState.PSI_MINUS) == pytest.approx(1.0, abs=1e-12)
    assert bell_fidelity(amplitudes, BellState.PSI_PLUS) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("first, second, expected", [
    (1.0, 1.0, 1.0),
    (-2.0, 2.0, 1.0),
    (1.0, 0.0, 0.0),
    (0.0, 0.0, 0.0),
    (3.0, 4.0, 24.0 / 25.0),
])
def test_concurrence(first, second, expected):
    assert concurrence(first, second) == pytest.approx(expected)


def test_pair_state_is_normalized(off_degenerate_kin):
    amplitudes = channel_amplitudes(solve_at(1.0, off_degenerate_kin, Branch.MINUS), off_degenerate_kin)
    for pump in (H, V):
        assert np.linalg.norm(pair_state(amplitudes, pump)) == pytest.approx(1.0, rel=1e-15)


def test_bell_vectors_are_orthonormal():
    basis = np.array([bell_vector(state) for state in BellState])
    assert np.allclose(basis @ basis.T, np.eye(4), atol=1e-15)
