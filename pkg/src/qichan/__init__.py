"""Finite-dimensional quantum channel analysis.

Given a channel by its element (Kraus) matrices, this package computes the
algebra of observables the channel preserves, the channel that corrects
them, the complementary flow to the environment, the classical pointer
structure that both sides agree on, and capacity estimates for the
observables involved.
"""

from .algebras import (
    AlgebraStructure,
    OperatorBasisSet,
    center,
    commutant,
    generate_star_algebra,
    intersect,
    span_of,
    spans_equal,
    structure_decompose,
)
from .capacity import CapacityEstimate, Ensemble, holevo_quantity, observable_capacity, shannon_capacity
from .channels import (
    Channel,
    DiscreteObservable,
    Instrument,
    Isometry,
    apply,
    apply_dual,
    channels_equal,
    choi_of,
    complement,
    compose,
    dilate,
    identity_channel,
    kraus_from_choi,
    luders_collapse,
    measure_instrument,
    povm_probabilities,
    tensor,
    unitary_channel,
    validate_channel,
)
from .correction import (
    CodeSubspace,
    CorrectableReport,
    correctable_operator_system,
    correctable_report,
    correction_channel,
    homomorphism_residual,
    interaction_span,
    kl_check,
    oqec_check,
    preserved_algebra,
    restrict,
    span_equivalent,
)
from .decoherence import (
    PointerReport,
    StochasticMap,
    SweepResult,
    broadcast_pointer,
    coarse_grain_solve,
    correlation_check,
    dephasing_sweep,
    effect_region_sample,
    full_decoherence_check,
    iterated_fixed_points,
    pointer_algebra,
)
from .numlin import (
    Tolerance,
    hermitian_eig,
    kron,
    nullspace,
    partial_trace,
    psd_sqrt_pinv,
)

__version__ = "0.1.0"

__all__ = [
    "AlgebraStructure",
    "CapacityEstimate",
    "Channel",
    "CodeSubspace",
    "CorrectableReport",
    "DiscreteObservable",
    "Ensemble",
    "Instrument",
    "Isometry",
    "OperatorBasisSet",
    "PointerReport",
    "StochasticMap",
    "SweepResult",
    "Tolerance",
    "apply",
    "apply_dual",
    "broadcast_pointer",
    "center",
    "channels_equal",
    "choi_of",
    "coarse_grain_solve",
    "commutant",
    "complement",
    "compose",
    "correctable_operator_system",
    "correctable_report",
    "correction_channel",
    "correlation_check",
    "dephasing_sweep",
    "dilate",
    "effect_region_sample",
    "full_decoherence_check",
    "generate_star_algebra",
    "hermitian_eig",
    "holevo_quantity",
    "homomorphism_residual",
    "identity_channel",
    "interaction_span",
    "intersect",
    "iterated_fixed_points",
    "kl_check",
    "kraus_from_choi",
    "kron",
    "luders_collapse",
    "measure_instrument",
    "nullspace",
    "observable_capacity",
    "oqec_check",
    "partial_trace",
    "pointer_algebra",
    "povm_probabilities",
    "preserved_algebra",
    "psd_sqrt_pinv",
    "restrict",
    "shannon_capacity",
    "span_equivalent",
    "span_of",
    "spans_equal",
    "structure_decompose",
    "tensor",
    "unitary_channel",
    "validate_channel",
]
