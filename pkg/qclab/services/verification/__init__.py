"""Independent oracle paths and the scenario harness"""

from .harness import HarnessService, harness_service
from .oracle import (
    ConvergenceEstimate,
    DenseTraceOracle,
    FDResult,
    FDScheme,
    convergence_order,
    dense_correlator,
    fd_derivative,
    fd_energy_continuity,
    grid_integral,
)

__all__ = [
    'HarnessService', 'harness_service',
    'DenseTraceOracle', 'dense_correlator', 'FDScheme', 'FDResult', 'fd_derivative',
    'grid_integral', 'ConvergenceEstimate', 'convergence_order', 'fd_energy_continuity',
]
