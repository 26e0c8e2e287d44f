# models.py
import math
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, root_validator, validator


class FrozenModel(BaseModel):

    class Config:
        frozen = True


# =================================================
# ENUMS
# =================================================

class Branch(str, Enum):
    """Which side of the momentum-transfer vector the signal leaves on"""
    PLUS = "plus"
    MINUS = "minus"


class PolarizationLabel(str, Enum):
    H = "H"   # in the scattering plane
    V = "V"   # normal to it


class AmplitudePair(str, Enum):
    AB = "AB"   # pump H: |HH> vs |VV>
    CD = "CD"   # pump V: |HV> vs |VH>


class BellState(str, Enum):
    PHI_PLUS = "phi_plus"
    PHI_MINUS = "phi_minus"
    PSI_PLUS = "psi_plus"
    PSI_MINUS = "psi_minus"

    @property
    def pump_polarization(self) -> PolarizationLabel:
        if self in (BellState.PHI_PLUS, BellState.PHI_MINUS):
            return PolarizationLabel.H
        return PolarizationLabel.V


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


# =================================================
# CRYSTAL + KINEMATICS
# =================================================

class CrystalReflection(FrozenModel):

    lattice_constant: float               # Å
    miller: Tuple[int, int, int]
    d_spacing: float = 0.0                # Å, derived
    g_magnitude: float = 0.0              # Å⁻¹, derived

    @root_validator(pre=True)
    def derive_spacing(cls, values):
        a = float(values.get("lattice_constant", 0.0))
        raw = tuple(values.get("miller", (0, 0, 0)))
        if len(raw) != 3 or any(float(m) != int(float(m)) for m in raw):
            raise ValueError(f"Miller indices must be three integers, got {raw}")
        h, k, l = (int(float(m)) for m in raw)
        values["miller"] = (h, k, l)

        if a <= 0:
            raise ValueError(f"lattice constant must be positive, got {a}")
        if (h, k, l) == (0, 0, 0):
            raise ValueError("Miller indices (0,0,0) do not define a reflection")

        d = a / math.sqrt(h * h + k * k + l * l)
        values["d_spacing"] = d
        values["g_magnitude"] = 2.0 * math.pi / d
        return values

    def __repr__(self):
        h, k, l = self.miller
        return f"<CrystalReflection ({h}{k}{l}) a={self.lattice_constant} Å>"


class Photon(FrozenModel):

    energy: float        # keV
    wavenumber: float    # Å⁻¹

    @validator("energy")
    def positive_energy(cls, v):
        if v <= 0:
            raise ValueError(f"photon energy must be positive, got {v}")
        return v


class EnergySplit(FrozenModel):

    pump_energy: float
    signal_fraction: float
    signal_energy: float
    idler_energy: float

    @root_validator
    def conserve_energy(cls, values):
        fraction = values.get("signal_fraction")
        if fraction is not None and not 0.0 < fraction < 1.0:
            raise ValueError(f"signal fraction must lie in (0, 1), got {fraction}")

        pump = values.get("pump_energy")
        signal, idler = values.get("signal_energy"), values.get("idler_energy")
        if None not in (pump, signal, idler):
            if abs(signal + idler - pump) > 1e-12 * pump:
                raise ValueError("signal + idler energy must equal the pump energy")
        return values

    @property
    def degenerate(self) -> bool:
        return self.signal_energy == self.idler_energy


class BeamKinematics(FrozenModel):
    """Everything the triangle solver and the amplitude kernel need at one split"""

    reflection: CrystalReflection
    split: EnergySplit
    k_pump: float
    k_signal: float
    k_idler: float

    @property
    def g(self) -> float:
        return self.reflection.g_magnitude


# =================================================
# PHASE MATCHING
# =================================================

class PhaseMatchSolution(FrozenModel):

    theta_p: Optional[float] = None
    theta_s: float
    theta_i: float
    branch: Branch
    residual: float      # Å⁻¹

    @validator("theta_s", "theta_i")
    def half_open_turn(cls, v):
        if not -math.pi < v <= math.pi:
            raise ValueError(f"beam angle {v} outside (-π, π]")
        return v

    def swapped(self) -> "PhaseMatchSolution":
        return self.copy(update={"theta_s": self.theta_i, "theta_i": self.theta_s})


# =================================================
# AMPLITUDES
# =================================================

class Channel(FrozenModel):

    pump: PolarizationLabel
    signal: PolarizationLabel
    idler: PolarizationLabel

    def __str__(self):
        return f"{self.pump.value}->{self.signal.value}{self.idler.value}"


class ChannelAmplitudes(FrozenModel):
    """A, B under an in-plane pump; C, D under a normal pump"""

    a: float
    b: float
    c: float
    d: float
    theta_p: float
    solution: PhaseMatchSolution

    def pair(self, which: AmplitudePair) -> Tuple[float, float]:
        if which is AmplitudePair.AB:
            return self.a, self.b
        return self.c, self.d


# =================================================
# SCANS + BELL POINTS
# =================================================

class ScanSample(FrozenModel):

    theta_p: float
    feasible: bool
    a2: Optional[float] = None
    b2: Optional[float] = None
    c2: Optional[float] = None
    d2: Optional[float] = None

    @root_validator
    def amplitudes_follow_feasibility(cls, values):
        squares = [values.get(key) for key in ("a2", "b2", "c2", "d2")]
        if values.get("feasible"):
            if any(s is None or s < 0 for s in squares):
                raise ValueError("feasible sample needs four non-negative squared amplitudes")
        elif any(s is not None for s in squares):
            raise ValueError("infeasible sample cannot carry amplitudes")
        return values

    def magnitudes(self, which: AmplitudePair) -> Tuple[float, float]:
        if which is AmplitudePair.AB:
            return math.sqrt(self.a2), math.sqrt(self.b2)
        return math.sqrt(self.c2), math.sqrt(self.d2)


class ScanCurve(FrozenModel):

    signal_fraction: float
    branch: Branch
    kinematics: BeamKinematics
    samples: List[ScanSample]

    @validator("samples")
    def strictly_increasing(cls, samples):
        for left, right in zip(samples, samples[1:]):
            if not right.theta_p > left.theta_p:
                raise ValueError("scan samples must be strictly increasing in theta_p")
        return samples

    @property
    def feasible_count(self) -> int:
        return sum(1 for s in self.samples if s.feasible)

    def pair_maximum(self, which: AmplitudePair) -> float:
        return max(
            (max(s.magnitudes(which)) for s in self.samples if s.feasible),
            default=0.0
        )


class EntanglementSample(FrozenModel):

    theta_p: float
    feasible: bool
    concurrence_h: Optional[float] = None    # pump H, from |A| and |B|
    concurrence_v: Optional[float] = None    # pump V, from |C| and |D|


class CrossingBracket(FrozenModel):
    """Two consecutive scan samples that enclose a crossing or a feasibility edge"""

    lower: float
    upper: float
    pair: AmplitudePair
    branch: Branch
    edge: bool = False

    @root_validator
    def ordered(cls, values):
        lower, upper = values.get("lower"), values.get("upper")
        if lower is not None and upper is not None and not lower < upper:
            raise ValueError(f"bracket [{lower}, {upper}] is empty")
        return values


class BellPoint(FrozenModel):

    state: BellState
    theta_p: float
    theta_s: float
    theta_i: float
    branch: Branch
    amplitude: float
    pump_polarization: PolarizationLabel

    @root_validator
    def pump_matches_state(cls, values):
        state = values.get("state")
        pump = values.get("pump_polarization")
        if state is not None and pump is not None and state.pump_polarization is not pump:
            raise ValueError(f"{state.value} needs pump {state.pump_polarization.value}, got {pump.value}")
        amplitude = values.get("amplitude")
        if amplitude is not None and amplitude <= 0:
            raise ValueError("Bell point amplitude must be positive")
        return values

    def __repr__(self):
        return f"<BellPoint {self.state.value} θp={self.theta_p:.6f} ({self.branch.value})>"
