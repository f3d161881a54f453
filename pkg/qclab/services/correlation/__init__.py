"""Correlation tensors, density algebra and conservation-law residuals"""

from .conservation import (
    AngularSplit,
    BoxIntegrator,
    CoherenceTensors,
    DensityBundle,
    angular_split,
    angular_split_report,
    build_report,
    continuity_residual,
    curl_divergence_residual,
    density_bundle,
    helicity_residual,
    integral_balance,
    is_pass_fail,
    operator_maxwell_residual,
    potential_residual,
    sandwich_residual,
)
from .correlators import (
    NAMED_PATTERNS,
    CorrelatorField,
    FixedSlotProducts,
    SlotPattern,
    coherent_factorized,
    combined_ES,
    correlator_field,
    evaluate,
    evaluate_many,
    first_order_tensors,
    named_tensors,
    slot1_curl,
    slot1_derivative,
    slot1_divergence,
    slot1_inverse_curl,
    wick_gaussian,
)

__all__ = [
    # Tensors
    'SlotPattern', 'NAMED_PATTERNS', 'CorrelatorField', 'FixedSlotProducts',
    'correlator_field', 'evaluate', 'evaluate_many', 'named_tensors', 'combined_ES',
    'first_order_tensors', 'coherent_factorized', 'wick_gaussian',
    'slot1_derivative', 'slot1_curl', 'slot1_divergence', 'slot1_inverse_curl',
    # Conservation
    'CoherenceTensors', 'DensityBundle', 'AngularSplit', 'BoxIntegrator',
    'build_report', 'is_pass_fail', 'curl_divergence_residual', 'sandwich_residual',
    'operator_maxwell_residual', 'density_bundle', 'continuity_residual', 'integral_balance',
    'potential_residual', 'angular_split', 'angular_split_report', 'helicity_residual',
]
