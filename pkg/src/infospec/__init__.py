"""Finite-dimensional numerics for information-spectrum coding theorems."""

from .capacity import (
    CodeBook,
    CQEnsemble,
    ThresholdError,
    average_error,
    capacity_estimate,
    converse_error_bound,
    cq_state,
    hn_bound,
    pgm_codebook,
    pretty_good_measurement,
)
from .channels import POVM, KrausChannel, apply, compose, entanglement_fidelity
from .compression import (
    CompressionScheme,
    EmptyProjectorError,
    achievability_bound,
    best_case_scheme,
    build_scheme,
    converse_fidelity_bound,
    mixed_chain,
    mixed_projector,
    mixed_rate_estimate,
    scheme_fidelity,
)
from .densecoding import (
    WeylSet,
    conditional_sup_entropy,
    dc_capacity_estimate,
    dc_converse_bound,
    dc_simulate,
    horodecki_capacity,
    minimize_lambda,
    weyl,
    weyl_twirl,
)
from .estimators import (
    DenseCodingEstimator,
    PrettyGoodDecoder,
    SpectralRateEstimator,
    TypicalSubspaceCompressor,
)
from .operators import (
    SubsystemShape,
    partial_trace,
    spectral_projection,
    tensor,
    tensor_power,
    von_neumann_entropy,
)
from .spectrum import (
    BipartiteSource,
    ProductSpectrum,
    SourceSequence,
    UnsupportedStructureError,
    WindowError,
    conditional_entropy_estimate,
    difference_trace,
    inf_divergence_estimate,
    mutual_information_estimate,
    product_trace_fastpath,
    spectral_entropy_estimates,
    sup_divergence_estimate,
    trace_curve,
)
from .validation import NotHermitianError, check_random_state

__version__ = "0.1.0"
