"""qmemsim: desk-scale simulator for classical and quantum memory models."""

__version__ = "0.1.0"

from .pauli import PauliOperator, commutes, multiply
from .gf2 import BinaryMatrix, coset_min_weight, rank_gf2, nullspace_gf2
from .models import (
    CodeModel,
    build_model,
    code_distance,
    support_dims,
    validate_model,
)
from .barriers import (
    BarrierResult,
    barrier_scan,
    exact_barrier,
    ordered_flip_barrier,
    syndrome_energy,
)
from .thermal import (
    LifetimeRecord,
    ThermalState,
    equilibrium_energy_check,
    lifetime_trial,
    measure_observables,
    metropolis_sweep,
)
from .decoders import (
    Correction,
    get_decoder,
    greedy_cooling,
    majority_vote,
    match_defects_2d,
    ml_bruteforce,
)
from .spectral import SpectrumReport, dense_hamiltonian, ground_splitting
from .harness import ExperimentConfig, FitResult, fit_arrhenius, report, run_experiment

__all__ = [
    "PauliOperator", "commutes", "multiply",
    "BinaryMatrix", "coset_min_weight", "rank_gf2", "nullspace_gf2",
    "CodeModel", "build_model", "code_distance", "support_dims", "validate_model",
    "BarrierResult", "barrier_scan", "exact_barrier", "ordered_flip_barrier",
    "syndrome_energy",
    "LifetimeRecord", "ThermalState", "equilibrium_energy_check", "lifetime_trial",
    "measure_observables", "metropolis_sweep",
    "Correction", "get_decoder", "greedy_cooling", "majority_vote",
    "match_defects_2d", "ml_bruteforce",
    "SpectrumReport", "dense_hamiltonian", "ground_splitting",
    "ExperimentConfig", "FitResult", "fit_arrhenius", "report", "run_experiment",
]
