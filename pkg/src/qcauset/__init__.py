"""Quantum-enhanced and classical Markov chain sampling of small causal sets."""

from __future__ import annotations

from .action import (
    SmearedActionParams,
    bd_action_2d_exact,
    bd_action_4d,
    bd_action_d,
    bd_action_smeared,
    bd_truncated,
    f4,
)
from .causet import (
    AbundanceVector,
    CausalMatrix,
    CausalSet,
    abundances,
    count_violations,
    enumerate_causal_sets,
    interval_cardinality,
    is_transitive,
    transitive_closure,
)
from .errors import ConfigError, QCausetError, ResourceLimitError, UsageError, VerificationError
from .mcmc import AcceptanceRule, accept, run_chain
from .pauli import GammaConfig, PauliHamiltonian, build_h_bd, build_h_mix, build_h_tc, combine
from .proposals import ParameterSample, ProposalStrategy, propose
from .qsim import EvolutionParams, StateVector, basis_state, evolve, sample_measurement
from .spectral import (
    GapResult,
    TransitionMatrix,
    build_transition_matrix,
    fit_scaling,
    gap_for,
    jackknife_gap,
    spectral_gap,
    thermalization_bounds,
)

__version__ = "0.1.0"

__all__ = [
    "AbundanceVector",
    "AcceptanceRule",
    "CausalMatrix",
    "CausalSet",
    "ConfigError",
    "EvolutionParams",
    "GammaConfig",
    "GapResult",
    "ParameterSample",
    "PauliHamiltonian",
    "ProposalStrategy",
    "QCausetError",
    "ResourceLimitError",
    "SmearedActionParams",
    "StateVector",
    "TransitionMatrix",
    "UsageError",
    "VerificationError",
    "abundances",
    "accept",
    "annotations",
    "basis_state",
    "bd_action_2d_exact",
    "bd_action_4d",
    "bd_action_d",
    "bd_action_smeared",
    "bd_truncated",
    "build_h_bd",
    "build_h_mix",
    "build_h_tc",
    "build_transition_matrix",
    "combine",
    "count_violations",
    "enumerate_causal_sets",
    "evolve",
    "f4",
    "fit_scaling",
    "interval_cardinality",
    "is_transitive",
    "jackknife_gap",
    "propose",
    "run_chain",
    "sample_measurement",
    "gap_for",
    "spectral_gap",
    "thermalization_bounds",
    "transitive_closure",
]
