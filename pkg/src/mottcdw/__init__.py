"""First-order Mott insulator to density-wave transition in the extended Bose-Hubbard model.

Modules
-------
model     parameters and the exact zero-hopping Landau free energy
qspace    tridiagonal Hamiltonian in the imbalance basis and its observables
wkb       band edges, barriers and tunnelling actions
oracles   brute-force combinatorics and exact diagonalisation on small lattices
sweep     phase-diagram sweeps and the quench protocol
"""
from .errors import (ConsistencyError, DomainError, MottCDWError, NumericError, SizeError,
                     UnsupportedFillingError)
from .model import LandauCurve, ModelParams, classify_landscape, landau_f, phi
from .qspace import QHamiltonian, SpectrumResult, build_hamiltonian, ground_state, observables, solve
from .sweep import PhasePoint, SweepConfig, hysteresis_protocol, run_sweep
from .wkb import WkbProfile, barrier_analysis, gamma_mean, momentum, tunneling_action

__version__ = "0.1.0"

__all__ = [
    "ConsistencyError", "DomainError", "LandauCurve", "ModelParams", "MottCDWError",
    "NumericError", "PhasePoint", "QHamiltonian", "SizeError", "SpectrumResult",
    "SweepConfig", "UnsupportedFillingError", "WkbProfile", "barrier_analysis",
    "build_hamiltonian", "classify_landscape", "gamma_mean", "ground_state",
    "hysteresis_protocol", "landau_f", "momentum", "observables", "phi", "run_sweep",
    "solve", "tunneling_action",
]
