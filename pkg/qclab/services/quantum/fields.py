"""Field operators over the truncated Fock space and the operator Maxwell equations"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ...core.exceptions import InvalidArgumentError
from ...models.schemas import FieldKind, Sign, SpacetimePoint
from .fock import FockSpace, ladder
from .modes import ModeSet, mode_derivative, mode_function

logger = logging.getLogger(__name__)

LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    LEVI_CIVITA[_i, _j, _k] = 1.0
    LEVI_CIVITA[_i, _k, _j] = -1.0
LEVI_CIVITA.setflags(write=False)


@dataclass(frozen=True, eq=False)
class OperatorVector:
    """Cartesian components of a field operator, shape (3, dim, dim)"""

    components: np.ndarray
    field: FieldKind
    sign: Sign
    point: SpacetimePoint
    axis: Optional[str] = None

    def adjoint(self) -> "OperatorVector":
        flipped = Sign.MINUS if self.sign is Sign.PLUS else Sign.PLUS
        return OperatorVector(
            components=self.components.conj().transpose(0, 2, 1),
            field=self.field,
            sign=flipped,
            point=self.point,
            axis=self.axis,
        )


@dataclass(frozen=True)
class OperatorResidual:
    name: str
    residual: float
    scale: float

    @property
    def relative(self) -> float:
        return relative_residual(self.residual, self.scale)


def relative_residual(residual: float, scale: float) -> float:
    """residual / scale; falls back to the absolute residual when every term vanishes"""
    if scale == 0.0:
        return residual
    return residual / scale


def _check_modes(space: FockSpace, ms: ModeSet) -> None:
    if space.mode_count != len(ms):
        raise InvalidArgumentError(
            f"mode-count mismatch: space has {space.mode_count} modes, mode set {len(ms)}"
        )


def _assemble(space: FockSpace, sign: Sign, coefficients: np.ndarray) -> np.ndarray:
    ladders = np.stack(
        [ladder(space, m)[0 if sign is Sign.PLUS else 1] for m in range(space.mode_count)]
    )
    return np.einsum("mj,mab->jab", coefficients, ladders)


def field_operator(
    space: FockSpace, ms: ModeSet, field: FieldKind, sign: Sign, p: SpacetimePoint
) -> OperatorVector:
    """Sum over modes of mode function times annihilator (+) or creator (-)"""
    _check_modes(space, ms)
    coefficients = np.stack([mode_function(mode, field, sign, p) for mode in ms.modes])
    return OperatorVector(_assemble(space, sign, coefficients), field, sign, p)


def field_operator_derivative(
    space: FockSpace,
    ms: ModeSet,
    field: FieldKind,
    sign: Sign,
    p: SpacetimePoint,
    axis: str,
) -> OperatorVector:
    _check_modes(space, ms)
    coefficients = np.stack([mode_derivative(mode, field, sign, p, axis) for mode in ms.modes])
    return OperatorVector(_assemble(space, sign, coefficients), field, sign, p, axis=axis)


def _spatial_jacobian(
    space: FockSpace, ms: ModeSet, field: FieldKind, sign: Sign, p: SpacetimePoint
) -> np.ndarray:
    # [k, l] = d_k F_l
    return np.stack(
        [field_operator_derivative(space, ms, field, sign, p, axis).components for axis in "xyz"]
    )


def operator_curl(
    space: FockSpace, ms: ModeSet, field: FieldKind, sign: Sign, p: SpacetimePoint
) -> np.ndarray:
    return np.einsum("jkl,klab->jab", LEVI_CIVITA, _spatial_jacobian(space, ms, field, sign, p))


def operator_divergence(
    space: FockSpace, ms: ModeSet, field: FieldKind, sign: Sign, p: SpacetimePoint
) -> np.ndarray:
    return np.einsum("jjab->ab", _spatial_jacobian(space, ms, field, sign, p))


def _norm(stack: np.ndarray) -> float:
    return float(np.linalg.norm(stack.ravel()))


def maxwell_residuals(
    space: FockSpace, ms: ModeSet, sign: Sign, p: SpacetimePoint
) -> Dict[str, OperatorResidual]:
    """Residuals of the four source-free operator Maxwell equations at one point.

    eq2: curl E + (1/c) dt B, eq3: curl B - (1/c) dt E, eq4: div E, eq5: div B.
    Each scale is the largest Frobenius norm among the terms of the equation.
    """
    c = ms.c
    curl_e = operator_curl(space, ms, FieldKind.E, sign, p)
    curl_b = operator_curl(space, ms, FieldKind.B, sign, p)
    dt_e = field_operator_derivative(space, ms, FieldKind.E, sign, p, "t").components / c
    dt_b = field_operator_derivative(space, ms, FieldKind.B, sign, p, "t").components / c

    residuals = {
        "eq2": OperatorResidual("eq2", _norm(curl_e + dt_b), max(_norm(curl_e), _norm(dt_b))),
        "eq3": OperatorResidual("eq3", _norm(curl_b - dt_e), max(_norm(curl_b), _norm(dt_e))),
    }
    for name, field in (("eq4", FieldKind.E), ("eq5", FieldKind.B)):
        jacobian = _spatial_jacobian(space, ms, field, sign, p)
        terms = [_norm(jacobian[j, j]) for j in range(3)]
        residuals[name] = OperatorResidual(
            name, _norm(np.einsum("jjab->ab", jacobian)), max(terms)
        )
    return residuals
