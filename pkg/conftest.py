import math

import pytest

from bellfinder import bell_table
from crystal import diamond_111, kinematics, split
from models import Branch


PUMP_KEV = 25.0


def angle_distance(a: float, b: float) -> float:
    """Distance between two angles on the circle"""
    return abs(math.remainder(a - b, 2.0 * math.pi))


@pytest.fixture(scope="session")
def reflection():
    return diamond_111()


@pytest.fixture(scope="session")
def degenerate_kin(reflection):
    return kinematics(reflection, split(PUMP_KEV, 0.5))


@pytest.fixture(scope="session")
def off_degenerate_kin(reflection):
    return kinematics(reflection, split(PUMP_KEV, 0.6))


@pytest.fixture(scope="session")
def degenerate_table():
    return bell_table(PUMP_KEV, 0.5)


@pytest.fixture(scope="session")
def off_degenerate_table():
    return bell_table(PUMP_KEV, 0.6)


@pytest.fixture(scope="session")
def off_degenerate_both():
    return bell_table(PUMP_KEV, 0.6, branches=(Branch.PLUS, Branch.MINUS))
