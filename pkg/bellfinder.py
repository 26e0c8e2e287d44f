# bellfinder.py
"""
Locate the pump angles that produce maximally entangled pairs.

For each phase-matching branch the four channel amplitudes are sampled over
θ_p; consecutive samples where f = |first| − |second| changes sign are
refined with brentq and the sign of first·second names the Bell state.
Brackets that straddle a feasibility edge (where the momentum triangle goes
flat and both branches meet) are resolved on the flat triangle itself.
"""
import logging
import math
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import brentq

from crystal import diamond_111, kinematics, split
from errors import FeasibilityError, InvalidBracketError, InvalidInputError
from models import (
    AmplitudePair,
    BeamKinematics,
    BellPoint,
    BellState,
    Branch,
    ChannelAmplitudes,
    CrossingBracket,
    CrystalReflection,
    EntanglementSample,
    ScanCurve,
    ScanSample,
)
from nonlinearity import channel_amplitudes, concurrence
from phasematch import feasibility_edges, solve_at, tangent_solution

logger = logging.getLogger("xraybell.bellfinder")

DEFAULT_RANGE = (0.01, math.pi - 0.01)
DEFAULT_SAMPLES = 2000

# Minus alone covers every configuration up to the θ → π − θ mirror
DEFAULT_BRANCHES = (Branch.MINUS,)

ZERO_FRACTION = 1e-6     # ε_zero relative to the pair's curve maximum
ROOT_XTOL = 1e-12
EDGE_TOL = 1e-9
DEDUP_TOL = 1e-6

_STATE_ORDER = list(BellState)
_BRANCH_ORDER = [Branch.PLUS, Branch.MINUS]


# =================================================
# SAMPLING
# =================================================

def evaluate(theta_p: float, kin: BeamKinematics, branch: Branch) -> Optional[ChannelAmplitudes]:
    solution = solve_at(theta_p, kin, branch)
    if solution is None:
        return None
    return channel_amplitudes(solution, kin)


def _sample(theta_p: float, kin: BeamKinematics, branch: Branch) -> ScanSample:
    amplitudes = evaluate(theta_p, kin, branch)
    if amplitudes is None:
        return ScanSample(theta_p=theta_p, feasible=False)
    return ScanSample(
        theta_p=theta_p,
        feasible=True,
        a2=amplitudes.a ** 2,
        b2=amplitudes.b ** 2,
        c2=amplitudes.c ** 2,
        d2=amplitudes.d ** 2
    )


def _check_grid(theta_range: Tuple[float, float], n_samples: int) -> np.ndarray:
    lower, upper = theta_range
    if n_samples < 2:
        raise InvalidInputError(f"a scan needs at least 2 samples, got {n_samples}")
    if not 0.0 < lower < upper < math.pi:
        raise InvalidInputError(f"scan range ({lower}, {upper}) must lie inside (0, π)")
    return np.linspace(lower, upper, n_samples)


def scan_branch(
    kin: BeamKinematics,
    branch: Branch,
    theta_range: Tuple[float, float] = DEFAULT_RANGE,
    n_samples: int = DEFAULT_SAMPLES
) -> ScanCurve:
    grid = _check_grid(theta_range, n_samples)
    return ScanCurve(
        signal_fraction=kin.split.signal_fraction,
        branch=branch,
        kinematics=kin,
        samples=[_sample(float(theta), kin, branch) for theta in grid]
    )


def _scan_curves(
    kin: BeamKinematics,
    branches: Iterable[Branch],
    theta_range: Tuple[float, float],
    n_samples: int
) -> Dict[Branch, ScanCurve]:
    curves = {branch: scan_branch(kin, branch, theta_range, n_samples) for branch in branches}

    lower, upper = theta_range
    inner_edges = [
        theta for theta in feasibility_edges(kin.k_pump, kin.k_signal, kin.k_idler, kin.g)
        if lower < theta < upper
    ]
    # a coarse grid may miss a feasible window, but never one bounded by an edge inside the range
    if not inner_edges and not any(curve.feasible_count for curve in curves.values()):
        energies = kin.split
        raise FeasibilityError(
            f"no phase-matched pump angle in ({theta_range[0]}, {theta_range[1]}) rad "
            f"for {energies.pump_energy} keV -> {energies.signal_energy} + "
            f"{energies.idler_energy} keV"
        )

    for branch, curve in curves.items():
        logger.debug(f"{branch.value} branch: {curve.feasible_count}/{n_samples} feasible samples")
    return curves


def scan(
    pump_energy: float,
    signal_fraction: float,
    theta_range: Tuple[float, float] = DEFAULT_RANGE,
    n_samples: int = DEFAULT_SAMPLES,
    reflection: Optional[CrystalReflection] = None
) -> Dict[Branch, ScanCurve]:
    """Squared channel amplitudes over θ_p for both phase-matching branches"""
    kin = kinematics(reflection or diamond_111(), split(pump_energy, signal_fraction))
    curves = _scan_curves(kin, _BRANCH_ORDER, theta_range, n_samples)
    logger.info(
        f"Scanned {n_samples} pump angles at {pump_energy} keV, fraction {signal_fraction}"
    )
    return curves


def entanglement_profile(curve: ScanCurve) -> List[EntanglementSample]:
    profile = []
    for sample in curve.samples:
        if not sample.feasible:
            profile.append(EntanglementSample(theta_p=sample.theta_p, feasible=False))
            continue
        profile.append(EntanglementSample(
            theta_p=sample.theta_p,
            feasible=True,
            concurrence_h=concurrence(*sample.magnitudes(AmplitudePair.AB)),
            concurrence_v=concurrence(*sample.magnitudes(AmplitudePair.CD))
        ))
    return profile


# =================================================
# CROSSINGS
# =================================================

def _difference(first: float, second: float) -> float:
    return abs(first) - abs(second)


def find_crossings(curve: ScanCurve, pair: AmplitudePair) -> List[CrossingBracket]:
    """Consecutive sample pairs where |first| − |second| changes sign, touches zero, or feasibility flips"""
    brackets = []

    for left, right in zip(curve.samples, curve.samples[1:]):
        if left.feasible and right.feasible:
            f_left = _difference(*left.magnitudes(pair))
            f_right = _difference(*right.magnitudes(pair))
            if f_left == 0.0 or f_right == 0.0 or (f_left < 0.0) != (f_right < 0.0):
                brackets.append(CrossingBracket(
                    lower=left.theta_p, upper=right.theta_p, pair=pair, branch=curve.branch
                ))
        elif left.feasible != right.feasible:
            brackets.append(CrossingBracket(
                lower=left.theta_p, upper=right.theta_p, pair=pair, branch=curve.branch, edge=True
            ))

    return brackets


def _difference_at(theta_p: float, kin: BeamKinematics, branch: Branch, pair: AmplitudePair) -> float:
    amplitudes = evaluate(theta_p, kin, branch)
    if amplitudes is None:
        # only reachable within round-off of a feasibility edge
        amplitudes = channel_amplitudes(tangent_solution(theta_p, kin, branch), kin)
    return _difference(*amplitudes.pair(pair))


def _classify(
    amplitudes: ChannelAmplitudes,
    pair: AmplitudePair,
    branch: Branch,
    floor: float
) -> Optional[BellPoint]:
    first, second = amplitudes.pair(pair)
    magnitude = 0.5 * (abs(first) + abs(second))

    if magnitude <= floor:
        logger.debug(
            f"Rejected {pair.value} crossing at θp={amplitudes.theta_p:.9f}: "
            f"amplitude {magnitude:.3e} below {floor:.3e}"
        )
        return None

    same_sign = first * second > 0
    if pair is AmplitudePair.AB:
        state = BellState.PHI_PLUS if same_sign else BellState.PHI_MINUS
    else:
        state = BellState.PSI_PLUS if same_sign else BellState.PSI_MINUS

    solution = amplitudes.solution
    return BellPoint(
        state=state,
        theta_p=amplitudes.theta_p,
        theta_s=solution.theta_s,
        theta_i=solution.theta_i,
        branch=branch,
        amplitude=magnitude,
        pump_polarization=state.pump_polarization
    )


def _refine_edge(bracket: CrossingBracket, kin: BeamKinematics) -> Optional[ChannelAmplitudes]:
    branch, pair = bracket.branch, bracket.pair

    if solve_at(bracket.upper, kin, branch) is not None:
        feasible_end = bracket.upper
    else:
        feasible_end = bracket.lower

    edges = [
        theta for theta in feasibility_edges(kin.k_pump, kin.k_signal, kin.k_idler, kin.g)
        if bracket.lower <= theta <= bracket.upper
    ]
    if not edges:
        logger.warning(f"No analytic feasibility edge inside [{bracket.lower}, {bracket.upper}]")
        return None
    theta_edge = min(edges, key=lambda theta: abs(theta - feasible_end))

    at_edge = channel_amplitudes(tangent_solution(theta_edge, kin, branch), kin)
    first, second = at_edge.pair(pair)
    f_edge = _difference(first, second)

    if abs(f_edge) <= EDGE_TOL * max(abs(first), abs(second)):
        return at_edge

    f_far = _difference_at(feasible_end, kin, branch, pair)
    if (f_edge < 0.0) == (f_far < 0.0) and f_far != 0.0:
        return None

    lower, upper = sorted((theta_edge, feasible_end))
    root = brentq(_difference_at, lower, upper, args=(kin, branch, pair), xtol=ROOT_XTOL)
    return evaluate(root, kin, branch) or channel_amplitudes(tangent_solution(root, kin, branch), kin)


def refine_crossing(
    bracket: CrossingBracket,
    pair: AmplitudePair,
    curve: ScanCurve
) -> Optional[BellPoint]:
    """
    Pin a crossing to |Δθ_p| ≤ 1e-9 rad and classify it.

    Returns None when the crossing is rejected: both amplitudes are at or
    below ε_zero there, or an edge bracket holds no crossing.
    """
    if pair is not bracket.pair:
        bracket = bracket.copy(update={"pair": pair})
    kin = curve.kinematics
    branch = bracket.branch
    floor = ZERO_FRACTION * curve.pair_maximum(pair)

    if bracket.edge:
        amplitudes = _refine_edge(bracket, kin)
        if amplitudes is None:
            return None
        return _classify(amplitudes, pair, branch, floor)

    f_lower = _difference_at(bracket.lower, kin, branch, pair)
    f_upper = _difference_at(bracket.upper, kin, branch, pair)

    if f_lower == 0.0:
        root = bracket.lower
    elif f_upper == 0.0:
        root = bracket.upper
    elif (f_lower < 0.0) == (f_upper < 0.0):
        raise InvalidBracketError(
            f"|{pair.value[0]}| - |{pair.value[1]}| keeps its sign on "
            f"[{bracket.lower}, {bracket.upper}]"
        )
    else:
        root = brentq(
            _difference_at, bracket.lower, bracket.upper,
            args=(kin, branch, pair), xtol=ROOT_XTOL
        )

    amplitudes = evaluate(root, kin, branch)
    logger.debug(f"Refined {pair.value} crossing on {branch.value} branch to θp={root:.12f}")
    return _classify(amplitudes, pair, branch, floor)


# =================================================
# TABLES
# =================================================

def _deduplicate(points: Sequence[BellPoint]) -> List[BellPoint]:
    ordered = sorted(
        points,
        key=lambda p: (p.theta_p, _STATE_ORDER.index(p.state), _BRANCH_ORDER.index(p.branch))
    )
    kept: List[BellPoint] = []
    for point in ordered:
        duplicate = any(
            other.state is point.state and abs(other.theta_p - point.theta_p) <= DEDUP_TOL
            for other in kept
        )
        if not duplicate:
            kept.append(point)
    return kept


def bell_table(
    pump_energy: float,
    signal_fraction: float,
    theta_range: Tuple[float, float] = DEFAULT_RANGE,
    n_samples: int = DEFAULT_SAMPLES,
    reflection: Optional[CrystalReflection] = None,
    branches: Sequence[Branch] = DEFAULT_BRANCHES
) -> List[BellPoint]:
    """Every maximally entangled operating point in the scan range, sorted by θ_p"""
    kin = kinematics(reflection or diamond_111(), split(pump_energy, signal_fraction))
    ordered_branches = [b for b in _BRANCH_ORDER if b in set(branches)]
    if not ordered_branches:
        raise InvalidInputError("at least one phase-matching branch is required")

    curves = _scan_curves(kin, ordered_branches, theta_range, n_samples)

    points = []
    for curve in curves.values():
        for pair in AmplitudePair:
            for bracket in find_crossings(curve, pair):
                point = refine_crossing(bracket, pair, curve)
                if point is not None:
                    points.append(point)

    table = _deduplicate(points)
    logger.info(
        f"✅ {len(table)} Bell points at {pump_energy} keV, fraction {signal_fraction} "
        f"({', '.join(b.value for b in ordered_branches)})"
    )
    return table
