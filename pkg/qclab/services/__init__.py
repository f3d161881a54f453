"""Services module - organized by computational layer"""

# Quantum state, modes and field operators
from .quantum import build_fock_space, make_state, mode_set_from_spec

# Correlation tensors and conservation laws
from .correlation import CoherenceTensors, correlator_field

# Verification
from .verification import DenseTraceOracle, harness_service

__all__ = [
    # Quantum
    'build_fock_space', 'make_state', 'mode_set_from_spec',
    # Correlation
    'CoherenceTensors', 'correlator_field',
    # Verification
    'DenseTraceOracle', 'harness_service',
]
