"""Exact density-matrix simulation of the three-spin phase-error code."""

from .channels import (
    Correlated,
    GradientDiffusionParams,
    Independent,
    apply_dephasing,
    gradient_diffusion_rate,
    monte_carlo_dephasing,
)
from .circuits import (
    Circuit,
    Gate,
    apply_circuit,
    correction_circuit,
    decoder_circuit,
    encoder_circuit,
    parse_circuit,
)
from .qec import (
    FidelityReport,
    InputAxis,
    PipelineConfig,
    analytic_corrected_z,
    entanglement_fidelity,
    fidelity_report,
    retained_polarization,
    run_pipeline,
)
from .qstate import (
    ProductOperatorSum,
    coherence_decompose,
    matrix_to_po,
    partial_trace_to_spin1,
    po,
    po_to_matrix,
    pseudopure_input,
)

__version__ = "0.1.0"
