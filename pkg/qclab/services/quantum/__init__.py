"""Quantum-state, mode-basis and field-operator services"""

from .fields import (
    LEVI_CIVITA,
    OperatorVector,
    field_operator,
    field_operator_derivative,
    maxwell_residuals,
    relative_residual,
)
from .fock import (
    DensityOperator,
    FockSpace,
    build_fock_space,
    ladder,
    make_state,
    normal_moment_matrix,
    trace_expect,
)
from .modes import Mode, ModeSet, build_mode_set, mode_derivative, mode_function, mode_set_from_spec

__all__ = [
    'FockSpace', 'DensityOperator', 'build_fock_space', 'ladder', 'make_state',
    'trace_expect', 'normal_moment_matrix',
    'Mode', 'ModeSet', 'build_mode_set', 'mode_set_from_spec', 'mode_function', 'mode_derivative',
    'LEVI_CIVITA', 'OperatorVector', 'field_operator', 'field_operator_derivative',
    'maxwell_residuals', 'relative_residual',
]
