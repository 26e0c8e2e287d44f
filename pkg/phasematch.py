# phasematch.py
"""
Momentum triangle k_s + k_i = k_p + G in a fixed scattering-plane frame.

Frame: the scattering plane is x–y, G = (0, -|G|), the atomic planes run
along x̂, and every beam angle is signed from x̂ toward +ŷ, so that
k̂(θ) = (cos θ, sin θ, 0).
"""
import math
from typing import List, Optional, Tuple

import numpy as np

from errors import DegenerateGeometryError, InvalidInputError
from models import BeamKinematics, Branch, PhaseMatchSolution


# |cos α| may overshoot 1 by this much and still count as a tangent triangle.
# Only the overshoot side is widened: |Q| up to ~1e-12 relative beyond
# k_s + k_i (or short of |k_s − k_i|) gives one solution instead of none.
TANGENT_TOL = 1e-12

RESIDUAL_TOL = 1e-9


def wrap_angle(theta: float) -> float:
    """Map any angle onto (-π, π]"""
    wrapped = math.pi - (math.pi - theta) % (2.0 * math.pi)
    # % can round up to exactly 2π just above π
    return math.pi if wrapped <= -math.pi else wrapped


def unit_vector(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta), 0.0])


def _planar(theta: float) -> np.ndarray:
    return np.array([math.cos(theta), math.sin(theta)])


def momentum_transfer(theta_p: float, k_p: float, g: float) -> np.ndarray:
    """Q = k_p·k̂(θ_p) + G, the vector the signal and idler must share"""
    if not k_p > 0 or not g > 0:
        raise InvalidInputError(f"wavenumbers must be positive (k_p={k_p}, g={g})")
    return k_p * _planar(theta_p) + np.array([0.0, -g])


def phase_mismatch(
    theta_p: float,
    theta_s: float,
    theta_i: float,
    k_p: float,
    k_s: float,
    k_i: float,
    g: float
) -> np.ndarray:
    """k_s + k_i − k_p − G; the zero vector iff the three beams are phase matched"""
    return (
        k_s * _planar(theta_s)
        + k_i * _planar(theta_i)
        - k_p * _planar(theta_p)
        - np.array([0.0, -g])
    )


def _residual(q: np.ndarray, k_s: float, theta_s: float, k_i: float, theta_i: float) -> float:
    return float(np.linalg.norm(k_s * _planar(theta_s) + k_i * _planar(theta_i) - q))


def _closing_solution(
    q: np.ndarray,
    k_s: float,
    k_i: float,
    theta_s: float,
    branch: Branch,
    theta_p: Optional[float]
) -> PhaseMatchSolution:
    closing = q - k_s * _planar(theta_s)
    theta_i = math.atan2(closing[1], closing[0])
    theta_s = wrap_angle(theta_s)
    theta_i = wrap_angle(theta_i)

    return PhaseMatchSolution(
        theta_p=theta_p,
        theta_s=theta_s,
        theta_i=theta_i,
        branch=branch,
        residual=_residual(q, k_s, theta_s, k_i, theta_i)
    )


def solve_signal_idler(
    q: np.ndarray,
    k_s: float,
    k_i: float,
    theta_p: Optional[float] = None
) -> Tuple[PhaseMatchSolution, ...]:
    """
    Close the triangle Q = k_s·k̂(θ_s) + k_i·k̂(θ_i).

    Returns both branches (θ_s = θ_Q ± α) when they are distinct, a single
    PLUS-labelled solution when the triangle is flat, and an empty tuple when
    the triangle inequality fails.
    """
    if not k_s > 0 or not k_i > 0:
        raise InvalidInputError(f"wavenumbers must be positive (k_s={k_s}, k_i={k_i})")

    q = np.asarray(q, dtype=float)[:2]
    q_norm = float(np.hypot(q[0], q[1]))
    if q_norm == 0.0:
        raise DegenerateGeometryError("momentum transfer is zero; its direction is undefined")

    cos_alpha = (q_norm * q_norm + k_s * k_s - k_i * k_i) / (2.0 * q_norm * k_s)
    if abs(cos_alpha) > 1.0 + TANGENT_TOL:
        return ()

    cos_alpha = min(1.0, max(-1.0, cos_alpha))
    alpha = math.acos(cos_alpha)
    theta_q = math.atan2(q[1], q[0])

    if alpha == 0.0 or alpha == math.pi:
        return (_closing_solution(q, k_s, k_i, theta_q + alpha, Branch.PLUS, theta_p),)

    return (
        _closing_solution(q, k_s, k_i, theta_q + alpha, Branch.PLUS, theta_p),
        _closing_solution(q, k_s, k_i, theta_q - alpha, Branch.MINUS, theta_p),
    )


def branch_solution(
    q: np.ndarray,
    k_s: float,
    k_i: float,
    branch: Branch,
    theta_p: Optional[float] = None
) -> Optional[PhaseMatchSolution]:
    solutions = solve_signal_idler(q, k_s, k_i, theta_p=theta_p)
    if not solutions:
        return None
    if len(solutions) == 1:
        return solutions[0].copy(update={"branch": branch})
    return solutions[0] if branch is Branch.PLUS else solutions[1]


def solve_at(theta_p: float, kin: BeamKinematics, branch: Branch) -> Optional[PhaseMatchSolution]:
    q = momentum_transfer(theta_p, kin.k_pump, kin.g)
    return branch_solution(q, kin.k_signal, kin.k_idler, branch, theta_p=theta_p)


# =================================================
# FEASIBILITY EDGES
# =================================================

def feasibility_edges(k_p: float, k_s: float, k_i: float, g: float) -> List[float]:
    """
    Pump angles where |Q| = k_s + k_i or |Q| = |k_s − k_i|.

    |Q|² = k_p² + g² − 2·k_p·g·sin θ_p, so each edge is a pair of angles
    mirrored about π/2.
    """
    edges = set()
    for length in (k_s + k_i, abs(k_s - k_i)):
        s = (k_p * k_p + g * g - length * length) / (2.0 * k_p * g)
        if -1.0 <= s <= 1.0:
            base = math.asin(s)
            edges.add(wrap_angle(base))
            edges.add(wrap_angle(math.pi - base))
    return sorted(edges)


def tangent_solution(theta_p: float, kin: BeamKinematics, branch: Branch) -> PhaseMatchSolution:
    """The flat triangle at a feasibility edge, built without acos round-off"""
    q = momentum_transfer(theta_p, kin.k_pump, kin.g)
    q_norm = float(np.hypot(q[0], q[1]))
    theta_q = math.atan2(q[1], q[0])

    k_s, k_i = kin.k_signal, kin.k_idler
    if abs(q_norm - (k_s + k_i)) <= abs(q_norm - abs(k_s - k_i)):
        theta_s = theta_i = theta_q
    elif k_s >= k_i:
        theta_s, theta_i = theta_q, theta_q + math.pi
    else:
        theta_s, theta_i = theta_q + math.pi, theta_q

    theta_s, theta_i = wrap_angle(theta_s), wrap_angle(theta_i)
    return PhaseMatchSolution(
        theta_p=theta_p,
        theta_s=theta_s,
        theta_i=theta_i,
        branch=branch,
        residual=_residual(q, k_s, theta_s, k_i, theta_i)
    )


def mirror_solution(solution: PhaseMatchSolution) -> PhaseMatchSolution:
    """Reflect every beam through the plane holding G and the surface normal (θ → π − θ)"""
    flipped = Branch.MINUS if solution.branch is Branch.PLUS else Branch.PLUS
    return solution.copy(update={
        "theta_p": None if solution.theta_p is None else wrap_angle(math.pi - solution.theta_p),
        "theta_s": wrap_angle(math.pi - solution.theta_s),
        "theta_i": wrap_angle(math.pi - solution.theta_i),
        "branch": flipped,
    })
