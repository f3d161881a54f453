import math
from enum import Enum
from typing import Annotated, Dict, List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.config import settings

Vector3 = Tuple[float, float, float]
ComplexPair = Tuple[float, float]


class FieldKind(str, Enum):
    E = "E"
    B = "B"
    A = "A"


class Sign(str, Enum):
    PLUS = "+"
    MINUS = "-"


class Convention(str, Enum):
    PRINTED_22 = "printed_22"
    DERIVATION_13 = "derivation_13"


class ConventionSelection(str, Enum):
    PRINTED_22 = "printed_22"
    DERIVATION_13 = "derivation_13"
    BOTH = "both"

    def expand(self) -> List[Convention]:
        if self is ConventionSelection.BOTH:
            return [Convention.PRINTED_22, Convention.DERIVATION_13]
        return [Convention(self.value)]


class AmplitudeConvention(str, Enum):
    PHYSICAL = "physical"
    UNIT = "unit"


class StateKind(str, Enum):
    VACUUM = "vacuum"
    FOCK = "fock"
    COHERENT = "coherent"
    THERMAL = "thermal"
    MIXTURE = "mixture"
    PURE_SUPERPOSITION = "pure_superposition"


class CheckId(str, Enum):
    """Every check the harness can run, with the equation it exercises"""

    EQ2_5 = "eq2_5"
    EQ2_SANDWICH = "eq2_sandwich"
    EQ3_SANDWICH = "eq3_sandwich"
    EQ7 = "eq7"
    EQ8 = "eq8"
    EQ9 = "eq9"
    EQ10 = "eq10"
    EQ11 = "eq11"
    EQ12 = "eq12"
    EQ13 = "eq13"
    EQ14 = "eq14"
    EQ15 = "eq15"
    EQ16 = "eq16"
    EQ17 = "eq17"
    EQ18 = "eq18"
    EQ23 = "eq23"
    EQ24 = "eq24"
    EQ27 = "eq27"
    EQ28 = "eq28"
    EQ29 = "eq29"
    EQ35 = "eq35"
    EQ36 = "eq36"
    HELICITY = "helicity"
    ORACLE_DENSE = "oracle_dense"
    ORACLE_FACTORIZED = "oracle_factorized"
    ORACLE_WICK = "oracle_wick"
    ORACLE_FD_EQ23 = "oracle_fd_eq23"


CURL_IDS = (CheckId.EQ7, CheckId.EQ8, CheckId.EQ9, CheckId.EQ10, CheckId.EQ15, CheckId.EQ16)
DIVERGENCE_IDS = (
    CheckId.EQ11,
    CheckId.EQ12,
    CheckId.EQ13,
    CheckId.EQ14,
    CheckId.EQ17,
    CheckId.EQ18,
)
CONTINUITY_IDS = (CheckId.EQ23, CheckId.EQ27, CheckId.EQ36)

CHECK_DESCRIPTIONS: Dict[CheckId, str] = {
    CheckId.EQ2_5: "operator Maxwell equations for the field operators",
    CheckId.EQ2_SANDWICH: "Faraday law sandwiched into each named tensor's fixed-slot string",
    CheckId.EQ3_SANDWICH: "Ampere law sandwiched into each named tensor's fixed-slot string",
    CheckId.EQ7: "curl E + (1/c) dt N = 0",
    CheckId.EQ8: "curl M + (1/c) dt H = 0",
    CheckId.EQ9: "curl N - (1/c) dt E = 0",
    CheckId.EQ10: "curl H - (1/c) dt M = 0",
    CheckId.EQ11: "div E = 0",
    CheckId.EQ12: "div H = 0",
    CheckId.EQ13: "div M = 0",
    CheckId.EQ14: "div N = 0",
    CheckId.EQ15: "curl Ebb - (1/c) dt Sbb = 0",
    CheckId.EQ16: "curl Sbb + (1/c) dt Ebb = 0",
    CheckId.EQ17: "div Ebb = 0",
    CheckId.EQ18: "div Sbb = 0",
    CheckId.EQ23: "energy continuity dt W + div T = 0",
    CheckId.EQ24: "integral energy balance over the periodic box",
    CheckId.EQ27: "momentum continuity with the stress tensor",
    CheckId.EQ28: "integral momentum balance over a half box",
    CheckId.EQ29: "tensor potential, curl A = Ebb and div A = 0",
    CheckId.EQ35: "orbital/spin split of the integrated angular momentum",
    CheckId.EQ36: "angular momentum continuity",
    CheckId.HELICITY: "helicity reversal negates the spin part L_spin",
    CheckId.ORACLE_DENSE: "plane-wave correlator path vs dense trace",
    CheckId.ORACLE_FACTORIZED: "trace path vs coherent-state factorisation",
    CheckId.ORACLE_WICK: "trace path vs Gaussian pairing sum",
    CheckId.ORACLE_FD_EQ23: "finite-difference residual convergence order of energy continuity",
}


class Verdict(str, Enum):
    PASS = "pass"
    FAIL = "fail"
    REPORTED_ONLY = "reported-only"


class SignConvention(str, Enum):
    PRINTED = "printed"
    FLIPPED = "flipped"


class BoxRegion(str, Enum):
    FULL_BOX = "full_box"
    HALF_BOX = "half_box"


class ReportFormat(str, Enum):
    JSON = "json"
    CSV = "csv"


class SpacetimePoint(BaseModel):
    """A spacetime point (r; t)"""

    model_config = ConfigDict(frozen=True)

    r: Vector3 = Field(default=(0.0, 0.0, 0.0), description="Position (length units)")
    t: float = Field(default=0.0, description="Time (time units)")

    @model_validator(mode="after")
    def check_finite(self) -> "SpacetimePoint":
        if not all(math.isfinite(x) for x in (*self.r, self.t)):
            raise ValueError("spacetime point components must be finite")
        return self

    @property
    def position(self) -> np.ndarray:
        return np.asarray(self.r, dtype=float)

    def shifted(self, axis: str, step: float) -> "SpacetimePoint":
        """Point displaced by `step` along x, y, z or t"""
        if axis == "t":
            return SpacetimePoint(r=self.r, t=self.t + step)
        r = list(self.r)
        r["xyz".index(axis)] += step
        return SpacetimePoint(r=tuple(r), t=self.t)


class ModeEntry(BaseModel):
    n: Tuple[int, int, int] = Field(..., description="Integer wavevector index, k = (2 pi / L) n")
    pol_index: Literal[1, 2] = Field(default=1, description="Polarisation index")


class ModeSetSpec(BaseModel):
    box_length: float = Field(default=2 * math.pi, gt=0, description="Periodic box side L")
    c: float = Field(default=1.0, gt=0, description="Speed of light")
    hbar: float = Field(default=1.0, gt=0, description="Reduced Planck constant")
    convention: AmplitudeConvention = Field(
        default=AmplitudeConvention.UNIT, description="Mode amplitude convention"
    )
    modes: List[ModeEntry] = Field(..., min_length=1, description="Ordered mode entries")

    @field_validator("modes")
    @classmethod
    def validate_modes(cls, v: List[ModeEntry]) -> List[ModeEntry]:
        seen = set()
        for entry in v:
            if entry.n == (0, 0, 0):
                raise ValueError("zero wavevector n=(0,0,0) is not a mode")
            key = (entry.n, entry.pol_index)
            if key in seen:
                raise ValueError(f"duplicate mode entry n={entry.n} pol_index={entry.pol_index}")
            seen.add(key)
        return v


class StateSpec(BaseModel):
    """Declarative description of a test state; per-mode lists follow the mode order"""

    kind: StateKind = Field(..., description="State family")
    occupations: Optional[List[Annotated[int, Field(ge=0)]]] = Field(
        None, description="Fock occupations per mode"
    )
    amplitudes: Optional[List[ComplexPair]] = Field(
        None, description="Coherent amplitudes per mode as [re, im]"
    )
    mean_photons: Optional[List[Annotated[float, Field(ge=0)]]] = Field(
        None, description="Thermal mean photon numbers per mode"
    )
    components: Optional[List["StateSpec"]] = Field(
        None, description="Component states of a mixture or superposition"
    )
    weights: Optional[List[Annotated[float, Field(ge=0)]]] = Field(
        None, description="Mixture weights (sum to 1)"
    )
    coefficients: Optional[List[ComplexPair]] = Field(
        None, description="Superposition coefficients as [re, im] (normalised on build)"
    )

    @model_validator(mode="after")
    def check_kind_fields(self) -> "StateSpec":
        required = {
            StateKind.FOCK: ("occupations",),
            StateKind.COHERENT: ("amplitudes",),
            StateKind.THERMAL: ("mean_photons",),
            StateKind.MIXTURE: ("components", "weights"),
            StateKind.PURE_SUPERPOSITION: ("components", "coefficients"),
        }.get(self.kind, ())
        for name in required:
            if getattr(self, name) is None:
                raise ValueError(f"'{name}' is required for kind '{self.kind.value}'")

        if self.kind is StateKind.MIXTURE:
            if len(self.weights) != len(self.components):
                raise ValueError("weights and components must have the same length")
            if abs(sum(self.weights) - 1.0) > 1e-12:
                raise ValueError(f"mixture weights sum to {sum(self.weights)!r}, expected 1")
        if self.kind is StateKind.PURE_SUPERPOSITION:
            if len(self.coefficients) != len(self.components):
                raise ValueError("coefficients and components must have the same length")
        return self

    def per_mode_lengths(self) -> List[int]:
        """Lengths of every per-mode list in this spec and its components"""
        lengths = [
            len(values)
            for values in (self.occupations, self.amplitudes, self.mean_photons)
            if values is not None
        ]
        for component in self.components or []:
            lengths.extend(component.per_mode_lengths())
        return lengths


StateSpec.model_rebuild()


class NamedState(BaseModel):
    name: str = Field(..., min_length=1, description="State label used in reports")
    spec: StateSpec = Field(..., description="State specification")


class SamplingSpec(BaseModel):
    seed: int = Field(default=settings.DEFAULT_SEED, description="Seed for slot-1 point sampling")
    count: int = Field(
        default=settings.DEFAULT_SAMPLE_COUNT, ge=1, description="Number of sampled slot-1 points"
    )


class Tolerances(BaseModel):
    analytic: float = Field(
        default=settings.DEFAULT_ANALYTIC_TOL, gt=0, description="Continuity, integral and split checks"
    )
    identity: float = Field(default=1e-12, gt=0, description="Curl, divergence and operator checks")
    potential: float = Field(default=1e-13, gt=0, description="Tensor potential check")
    oracle: float = Field(default=1e-12, gt=0, description="Dense trace path agreement")
    factorization: float = Field(default=1e-10, gt=0, description="Coherent factorisation agreement")
    wick: float = Field(default=1e-6, gt=0, description="Gaussian pairing agreement")
    fd_order_window: Tuple[float, float] = Field(
        default=settings.DEFAULT_FD_ORDER_WINDOW,
        description="Accepted finite-difference convergence order",
    )

    @field_validator("fd_order_window")
    @classmethod
    def validate_window(cls, v: Tuple[float, float]) -> Tuple[float, float]:
        if not 0 < v[0] < v[1]:
            raise ValueError("fd_order_window must be an increasing pair of positive numbers")
        return v


class Scenario(BaseModel):
    """Reproducibility unit: one mode set, a list of states and the checks to run on them"""

    name: str = Field(..., min_length=1, description="Scenario name")
    description: Optional[str] = Field(None, description="Free text")
    mode_set: ModeSetSpec = Field(..., description="Plane-wave mode basis")
    cutoffs: List[Annotated[int, Field(ge=1)]] = Field(..., description="Fock cutoff per mode")
    states: List[NamedState] = Field(..., min_length=1, description="Named test states")
    fixed_points: List[SpacetimePoint] = Field(
        ..., min_length=3, max_length=3, description="Spacetime points of slots 2-4"
    )
    sample_points: Optional[List[SpacetimePoint]] = Field(
        None, description="Explicit slot-1 points; sampled from `sampling` when absent"
    )
    sampling: SamplingSpec = Field(default_factory=SamplingSpec, description="Point sampling")
    identities: Union[Literal["all"], List[CheckId]] = Field(
        default="all", description="Checks to run"
    )
    conventions: ConventionSelection = Field(
        default=ConventionSelection.BOTH, description="Ordering conventions to evaluate"
    )
    r0: Optional[Vector3] = Field(None, description="Angular momentum origin; box centre if absent")
    tolerances: Tolerances = Field(default_factory=Tolerances, description="Check tolerances")
    integral_times: Optional[List[float]] = Field(
        None, description="Slot-1 times for the integral balances; one period if absent"
    )
    fd_step: Optional[float] = Field(
        None, gt=0, description="Largest time step of the half-box central difference"
    )
    helicity_pairs: List[Tuple[str, str]] = Field(
        default_factory=list, description="State pairs of opposite helicity"
    )

    @model_validator(mode="after")
    def check_references(self) -> "Scenario":
        mode_count = len(self.mode_set.modes)
        if len(self.cutoffs) != mode_count:
            raise ValueError(
                f"cutoffs: {len(self.cutoffs)} entries for {mode_count} modes"
            )
        names = [state.name for state in self.states]
        if len(set(names)) != len(names):
            raise ValueError("states: state names must be unique")
        for index, state in enumerate(self.states):
            for length in state.spec.per_mode_lengths():
                if length != mode_count:
                    raise ValueError(
                        f"states.{index}.spec: per-mode list of length {length} "
                        f"for {mode_count} modes"
                    )
        for index, pair in enumerate(self.helicity_pairs):
            for name in pair:
                if name not in names:
                    raise ValueError(f"helicity_pairs.{index}: unknown state '{name}'")
        if self.integral_times is not None and len(self.integral_times) < 3:
            raise ValueError("integral_times: at least 3 samples are required")
        return self

    def selected_checks(self) -> List[CheckId]:
        if self.identities == "all":
            return list(CheckId)
        return list(self.identities)


class ResidualReport(BaseModel):
    identity: CheckId = Field(..., description="Check identifier")
    convention: Optional[Convention] = Field(None, description="Ordering convention, if any")
    state: str = Field(..., description="State name, '*' for state-independent checks")
    points: List[SpacetimePoint] = Field(default=[], description="Evaluation points")
    point_residuals: List[float] = Field(default=[], description="Residual norm per point")
    residual_norm: float = Field(..., ge=0, description="Max residual norm over points")
    scale: float = Field(..., ge=0, description="Norm of the largest constituent term")
    relative: float = Field(..., ge=0, description="residual_norm / scale (0 when both vanish)")
    tolerance: float = Field(..., gt=0, description="Pass threshold on `relative`")
    verdict: Verdict = Field(..., description="pass, fail or reported-only")
    sign_convention: Optional[SignConvention] = Field(
        None, description="Relative sign used for continuity laws"
    )
    extras: Dict[str, float] = Field(default={}, description="Archived auxiliary numbers")
    note: Optional[str] = Field(None, description="Human readable remark")


class EnvironmentStamp(BaseModel):
    version: str = Field(..., description="qclab version")
    c: float = Field(..., description="Speed of light used")
    hbar: float = Field(..., description="hbar used")
    amplitude_convention: AmplitudeConvention = Field(..., description="Mode amplitude convention")
    continuity_sign: str = Field(..., description="Continuity sign policy")


class SuiteReport(BaseModel):
    scenario: str = Field(..., description="Scenario name")
    reports: List[ResidualReport] = Field(default=[], description="Per-check residual reports")
    environment: EnvironmentStamp = Field(..., description="Environment stamp")
    overall: Verdict = Field(..., description="pass unless a pass/fail check failed")
