"""Brute-force cross-checks that share only the state and the mode basis with the main path.

Correlators are formed here as explicit products of dense field-operator matrices traced
against the density operator, derivatives as central differences and volume integrals
as uniform-grid rectangle sums.
"""

import logging
from dataclasses import dataclass
from functools import reduce
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from ...core.exceptions import InvalidArgumentError
from ...models.schemas import Convention, FieldKind, Sign, SpacetimePoint
from ..correlation import densities
from ..correlation.correlators import NAMED_PATTERNS, SlotPattern
from ..quantum.fields import field_operator
from ..quantum.fock import DensityOperator, FockSpace
from ..quantum.modes import ModeSet

logger = logging.getLogger(__name__)

# relative residuals at or below this are rounding noise
FLOOR = 1e-13
STEP_WARNING_FRACTION = 20
DEFAULT_STEP_FRACTION = 100


@dataclass(frozen=True)
class FDScheme:
    h: float
    order: int = 2
    richardson: bool = False

    def __post_init__(self) -> None:
        if self.order not in (2, 4):
            raise InvalidArgumentError(f"central-difference order must be 2 or 4, got {self.order}")
        if not self.h > 0:
            raise InvalidArgumentError(f"step must be positive, got {self.h}")


@dataclass(frozen=True, eq=False)
class FDResult:
    value: np.ndarray
    error_estimate: Optional[float] = None
    step_warning: bool = False


@dataclass(frozen=True)
class ConvergenceEstimate:
    order: Optional[float]
    floor_reached: bool


class DenseTraceOracle:
    """Dense trace evaluation of normal-ordered correlators for one state"""

    def __init__(self, rho: DensityOperator, space: FockSpace, ms: ModeSet) -> None:
        if rho.matrix.shape != (space.dim, space.dim):
            raise InvalidArgumentError(
                f"dimension mismatch: state is {rho.matrix.shape[0]}, space is {space.dim}"
            )
        self.rho = rho
        self.space = space
        self.ms = ms
        self._operators: Dict[Tuple, np.ndarray] = {}
        self._fixed: Dict[Tuple, np.ndarray] = {}

    def operator(self, kind: FieldKind, sign: Sign, p: SpacetimePoint) -> np.ndarray:
        key = (kind, sign, p)
        if key not in self._operators:
            self._operators[key] = field_operator(self.space, self.ms, kind, sign, p).components
        return self._operators[key]

    def _product(self, slots: Sequence[Tuple[FieldKind, Sign]], points: Sequence[SpacetimePoint]):
        operators = [self.operator(kind, sign, p) for (kind, sign), p in zip(slots, points)]
        return reduce(lambda acc, op: acc[..., None, :, :] @ op, operators)

    def correlator(self, pattern: SlotPattern, points: Sequence[SpacetimePoint]) -> np.ndarray:
        """Tr(rho F_1 F_2 ... F_n) with one Cartesian axis per slot"""
        if len(points) != pattern.rank:
            raise InvalidArgumentError(f"pattern {pattern} needs {pattern.rank} points, got {len(points)}")
        key = (pattern.fixed, tuple(points[1:]))
        if key not in self._fixed:
            self._fixed[key] = self._product(pattern.fixed, points[1:])
        kind, sign = pattern.slots[0]
        # slot-1 operators are not cached: FD stencils visit many distinct points
        first = field_operator(self.space, self.ms, kind, sign, points[0]).components
        left = self.rho.matrix @ first
        return np.einsum("aik,...ki->a...", left, self._fixed[key])

    def combined(
        self, convention: Convention, p1: SpacetimePoint, fixed_points: Sequence[SpacetimePoint]
    ) -> Tuple[np.ndarray, np.ndarray]:
        """Ebb = E + H and Sbb = M - N at one slot-1 point"""
        points = [p1, *fixed_points]
        named = {
            name: self.correlator(pattern, points)
            for name, pattern in NAMED_PATTERNS[convention].items()
        }
        return named["E"] + named["H"], named["M"] - named["N"]


def dense_correlator(
    rho: DensityOperator,
    space: FockSpace,
    ms: ModeSet,
    pattern: SlotPattern,
    points: Sequence[SpacetimePoint],
) -> np.ndarray:
    return DenseTraceOracle(rho, space, ms).correlator(pattern, points)


def default_step(ms: ModeSet, axis: str = "x") -> float:
    step = ms.min_wavelength / DEFAULT_STEP_FRACTION
    return step / ms.c if axis == "t" else step


def _stencil(
    f: Callable[[SpacetimePoint], np.ndarray], p: SpacetimePoint, axis: str, h: float, order: int
) -> np.ndarray:
    if order == 2:
        return (np.asarray(f(p.shifted(axis, h))) - np.asarray(f(p.shifted(axis, -h)))) / (2 * h)
    values = [np.asarray(f(p.shifted(axis, step * h))) for step in (2, 1, -1, -2)]
    return (-values[0] + 8 * values[1] - 8 * values[2] + values[3]) / (12 * h)


def fd_derivative(
    f: Callable[[SpacetimePoint], np.ndarray],
    p: SpacetimePoint,
    axis: str,
    scheme: FDScheme,
    ms: Optional[ModeSet] = None,
) -> FDResult:
    """Central-difference derivative along x, y, z or t.

    With `ms` given, a step above a twentieth of the shortest wavelength (or of the
    shortest period for t) sets `step_warning`.
    """
    if axis not in ("x", "y", "z", "t"):
        raise InvalidArgumentError(f"axis must be x, y, z or t, got {axis!r}")

    step_warning = False
    if ms is not None:
        limit = ms.min_wavelength / STEP_WARNING_FRACTION
        if axis == "t":
            limit /= ms.c
        if scheme.h > limit:
            step_warning = True
            logger.warning(f"FD step {scheme.h:.3e} along {axis} exceeds {limit:.3e}")

    value = _stencil(f, p, axis, scheme.h, scheme.order)
    error_estimate = None
    if scheme.richardson:
        refined = _stencil(f, p, axis, scheme.h / 2, scheme.order)
        ratio = 2**scheme.order
        error_estimate = float(np.linalg.norm(refined - value)) * ratio / (ratio - 1)
    return FDResult(value=value, error_estimate=error_estimate, step_warning=step_warning)


def nyquist_grid(ms: ModeSet) -> int:
    """Points per axis that integrate every four-mode product exactly"""
    largest = max(int(np.max(np.abs(mode.n))) for mode in ms.modes)
    return 4 * largest + 2


def grid_integral(
    f: Callable[[List[SpacetimePoint]], np.ndarray],
    box_length: float,
    n_grid: int,
    t: float = 0.0,
) -> np.ndarray:
    """Rectangle rule over the periodic box; `f` maps a list of points to stacked values"""
    if n_grid < 2:
        raise InvalidArgumentError(f"grid needs at least 2 points per axis, got {n_grid}")
    axis = np.arange(n_grid) * box_length / n_grid
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    points = [SpacetimePoint(r=tuple(float(x) for x in r), t=t) for r in grid]
    values = np.asarray(f(points))
    return values.sum(axis=0) * (box_length / n_grid) ** 3


def convergence_order(samples: Sequence[Tuple[float, float]]) -> ConvergenceEstimate:
    """Least-squares slope of log(residual) against log(h).

    If any sample sits at the noise floor the floor flag is returned instead of a slope.
    """
    if len(samples) < 3:
        raise InvalidArgumentError(f"convergence order needs at least 3 samples, got {len(samples)}")
    steps = np.array([h for h, _ in samples], dtype=float)
    residuals = np.array([r for _, r in samples], dtype=float)
    if np.any(np.diff(steps) >= 0) or np.any(steps <= 0):
        raise InvalidArgumentError("steps must be positive and strictly decreasing")
    if np.any(residuals <= FLOOR):
        return ConvergenceEstimate(order=None, floor_reached=True)
    slope, _ = np.polyfit(np.log(steps), np.log(residuals), 1)
    return ConvergenceEstimate(order=float(slope), floor_reached=False)


@dataclass(frozen=True)
class FDContinuity:
    steps: Tuple[float, ...]
    residuals: Tuple[float, ...]
    estimate: ConvergenceEstimate


def fd_energy_continuity(
    oracle: DenseTraceOracle,
    convention: Convention,
    fixed_points: Sequence[SpacetimePoint],
    p1: SpacetimePoint,
    h0: Optional[float] = None,
) -> FDContinuity:
    """Energy continuity from dense correlators and order-2 differences at h, h/2, h/4.

    Residuals are relative to omega_max * (|W| + |T| / c), the natural size of either
    term, so a density that is constant in slot 1 lands on the floor.
    """
    ms = oracle.ms
    c = ms.c
    omega_max = c * 2 * np.pi / ms.min_wavelength
    base = h0 or default_step(ms)

    def energy(p: SpacetimePoint) -> np.ndarray:
        e, s = oracle.combined(convention, p, fixed_points)
        return densities.at_point(densities.energy_density, e, s).real

    def flow(p: SpacetimePoint) -> np.ndarray:
        e, s = oracle.combined(convention, p, fixed_points)
        return densities.at_point(densities.flow_density, e, s, c).real

    reference = omega_max * (abs(float(energy(p1))) + float(np.linalg.norm(flow(p1))) / c)
    steps = (base, base / 2, base / 4)
    residuals = []
    for h in steps:
        rate = fd_derivative(energy, p1, "t", FDScheme(h=h / c)).value
        divergence = sum(
            fd_derivative(flow, p1, axis, FDScheme(h=h)).value[k] for k, axis in enumerate("xyz")
        )
        absolute = abs(float(rate + divergence))
        residuals.append(absolute / reference if reference > 0 else absolute)
    return FDContinuity(
        steps=steps,
        residuals=tuple(residuals),
        estimate=convergence_order(list(zip(steps, residuals))),
    )
