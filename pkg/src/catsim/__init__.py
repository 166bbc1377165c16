"""Coherent versus incoherent simulation of the discretized Arnold cat map."""
from .circuit import Circuit, Gate, apply_classical, as_permutation, build_step_circuit, invert
from .coherent import (MeasurementRecord, NoiseModel, QuantumState, apply_circuit_coherent,
                       apply_fourier, born_distribution, from_density, measure_diagonal, sample_shots)
from .errors import (CatsimError, ConsistencyError, NotApplicableError, StructuralError,
                     ValidationError)
from .lattice import LatticePoint, LatticeSize, forward, inverse, iterate, pushforward
from .observables import (amplitude_power_spectrum, chi_square_two_sample, coarse_grain,
                          density_harmonics, tv_distance)
from .stochastic import (EmpiricalDensity, estimate_density, run_trajectory, sample_initial,
                         sample_trajectories)

__version__ = "0.1.0"
