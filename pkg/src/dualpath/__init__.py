"""Simulation and moment reconstruction for dual-path microwave detection.

The package models a propagating quantum microwave state entering a
beam-splitter receiver followed by noisy amplification chains and IQ
demodulation, draws shot records from the resulting Gaussian model, and
recovers signal, amplifier-noise and ancilla moments from those records by
three routes: the dual-path combination method, single-path reference
subtraction, and full reference-state tomography of the splitter output.
"""

from .benchmark import (
    ComparisonGrid,
    RatioTable,
    fit_amp_scaling,
    fit_order_scaling,
    fit_shot_scaling,
    run_comparison,
)
from .chain import (
    ChainConfig,
    DetectionModel,
    amplifier,
    beam_splitter,
    build_dual_path,
    build_single_path,
    effective_noise_occupation,
    envelope_noise_occupation,
    iq_readout,
    loss,
    raw_noise_occupation,
)
from .entanglement import (
    NegativityResult,
    TwoModeCovariance,
    WitnessReport,
    moments_to_covariance,
    negativity_gaussian,
    witness_report,
)
from .kernels import backend
from .moments import (
    envelopes,
    estimate_channel_moments,
    estimate_channel_moments_blockwise,
    estimate_moments,
    estimate_moments_blockwise,
    exact_channel_moments,
    exact_envelope_moments,
)
from .reconstruction import (
    AncillaMoments,
    ReconstructionResult,
    blockwise_reconstruction,
    combination_estimators,
    dpm_reconstruct,
    envelope_to_raw,
    refstate_reconstruct,
    spm_noise_from_reference,
    spm_reconstruct,
)
from .sampling import ShotBatch, load_csv, sample, save_csv, split_blocks
from .states import (
    GaussianState,
    coherent,
    joint_wick_moments,
    linear_transform,
    squeezed_vacuum,
    symplectic_eigenvalues,
    tensor,
    thermal,
    vacuum,
    wick_moments,
)
from .tables import JointMomentTable, MomentTable, NoiseJointTable

__version__ = "0.1.0"

__all__ = [
    "AncillaMoments",
    "ChainConfig",
    "ComparisonGrid",
    "DetectionModel",
    "GaussianState",
    "JointMomentTable",
    "MomentTable",
    "NegativityResult",
    "NoiseJointTable",
    "RatioTable",
    "ReconstructionResult",
    "ShotBatch",
    "TwoModeCovariance",
    "WitnessReport",
    "amplifier",
    "backend",
    "beam_splitter",
    "blockwise_reconstruction",
    "build_dual_path",
    "build_single_path",
    "coherent",
    "combination_estimators",
    "dpm_reconstruct",
    "effective_noise_occupation",
    "envelope_noise_occupation",
    "envelope_to_raw",
    "envelopes",
    "estimate_channel_moments",
    "estimate_channel_moments_blockwise",
    "estimate_moments",
    "estimate_moments_blockwise",
    "exact_channel_moments",
    "exact_envelope_moments",
    "fit_amp_scaling",
    "fit_order_scaling",
    "fit_shot_scaling",
    "iq_readout",
    "joint_wick_moments",
    "linear_transform",
    "load_csv",
    "loss",
    "moments_to_covariance",
    "negativity_gaussian",
    "raw_noise_occupation",
    "refstate_reconstruct",
    "run_comparison",
    "sample",
    "save_csv",
    "spm_noise_from_reference",
    "spm_reconstruct",
    "split_blocks",
    "squeezed_vacuum",
    "symplectic_eigenvalues",
    "tensor",
    "thermal",
    "vacuum",
    "wick_moments",
    "witness_report",
]
