"""Helium ionisation potential on a simulated two-qubit trapped-ion device.

Binary encoding of a small CI Hamiltonian, a two-parameter VQE, noisy
per-shot sampling, and the quantum-computed-moments energy correction.
"""

from .bootstrap import BootstrapSummary, bootstrap, bootstrap_many, prefix_analysis
from .circuits import (
    HARTREE_FOCK_PARAMS,
    OPTIMAL_PARAMS,
    Circuit,
    Gate,
    Params,
    ansatz_native,
    ansatz_state,
    ansatz_textbook,
    measurement_circuit,
)
from .encoding import decode, encode, exact_ground, helium_hamiltonian
from .estimation import ShotPlan, hamiltonian_expectation, pauli_expectation, plan_shots
from .moments import (
    Cumulants,
    Moments,
    cumulants,
    hollenberg_witte,
    moments_from_shots,
    power_decompositions,
    qcm_energy,
    qcm_energy_exact,
)
from .optimizer import VqeConfig, run_vqe, success_probability
from .pauli import MeasurementBasis, PauliSum, group_into_bases, qubitwise_commute
from .pipeline import IpResult, RunConfig, cmd_ip
from .simulator import NoiseModel, ShotTable, helium_noise, measure_bases, sample_shots

__version__ = "0.1.0"
