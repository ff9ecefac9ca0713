"""Steady states, CPA analysis and bistability of a two-sided cavity with Lambda atoms."""

from ._accel import BACKEND
from .cpa import (
    CpaPoint,
    RegimeLabel,
    bistability_onset,
    cpa_bands,
    cpa_cavity_detuning,
    cpa_frequencies_at_intensity,
    cpa_frequency_thresholds,
    cpa_intensity_taylor,
    cpa_intracavity_intensity,
    regime_classify,
    verify_cpa,
)
from .dynamics import AtomCavityState, LiouvillianSpec, integrate_to_steady_state, oracle_compare
from .errors import (
    AsymmetricCavity,
    CpaError,
    FormulaDomain,
    GridError,
    NoMatchingRoot,
    NotBistable,
    NotFound,
    RootFindingFailure,
    VariantMismatch,
)
from .model import (
    build_coefficients,
    output_fields,
    solve_steady_states,
    steady_state_polynomial,
    susceptibility,
)
from .params import ModelVariant, ProbeDrive, SystemParams
from .sweep import MapPolicy, cpa_locus_map, density_map, hysteresis_trace, input_output_curve

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CpaPoint",
    "RegimeLabel",
    "bistability_onset",
    "cpa_bands",
    "cpa_cavity_detuning",
    "cpa_frequencies_at_intensity",
    "cpa_frequency_thresholds",
    "cpa_intensity_taylor",
    "cpa_intracavity_intensity",
    "regime_classify",
    "verify_cpa",
    "AtomCavityState",
    "LiouvillianSpec",
    "integrate_to_steady_state",
    "oracle_compare",
    "AsymmetricCavity",
    "CpaError",
    "FormulaDomain",
    "GridError",
    "NoMatchingRoot",
    "NotBistable",
    "NotFound",
    "RootFindingFailure",
    "VariantMismatch",
    "build_coefficients",
    "output_fields",
    "solve_steady_states",
    "steady_state_polynomial",
    "susceptibility",
    "ModelVariant",
    "ProbeDrive",
    "SystemParams",
    "MapPolicy",
    "cpa_locus_map",
    "density_map",
    "hysteresis_trace",
    "input_output_curve",
]
