"""Simulation and estimation toolbox for RIS-aided MIMO channel estimation.

The package covers the full downlink pipeline: two-hop geometric channel
generation, beam training with RIS codebooks (including training beamwidth
adaptation), compilation of filtered pilots into a decoupled measurement, and
recovery of the effective channel either by least squares or by atomic norm
minimization solved as a semidefinite program.
"""

from .geometry import (
    SpatialFrequency,
    compose_frequency,
    dft_matrix,
    khatri_rao_cols,
    kronecker,
    steering_from_frequency,
    steering_vector,
)
from .channel import (
    ChannelPair,
    Hop,
    PathSet,
    SystemDims,
    build_channel,
    cascaded_channel,
    effective_channel,
    sample_paths,
)
from .codebook import (
    CodebookKind,
    RISCodebook,
    SubsetStrategy,
    adapted_codebook,
    beam_gain,
    coverage_check,
    full_dft_codebook,
    subset_codebook,
)
from .training import (
    CompiledMeasurement,
    decouple,
    default_beamformers,
    matched_filter,
    pilot_matrix,
    run_frame,
    run_protocol,
    simulate_training,
)
from .estimation import (
    ANMSolution,
    NumericFailure,
    SolverOptions,
    anm_estimate,
    atomic_norm,
    design_ris_control,
    ls_estimate,
    objective_value,
    psd_project,
    regularization_tau,
    toeplitz_adjoint,
    toeplitz_materialize,
)
from .experiments import (
    DegenerateInstance,
    Estimator,
    ExperimentConfig,
    SweepResult,
    nmse,
    run_trial,
    sigma_for_snr,
    sweep_frames,
    sweep_separation,
    sweep_snr,
)

__all__ = [name for name in dir() if not name.startswith("_")]
