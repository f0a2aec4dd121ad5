"""Spin-boson dynamics on qubit registers: variational and Trotter evolution,
gate-level noise, and resource estimation."""

from .circuit import ParamCircuit, build_ansatz, build_trotter, run_statevector
from .errors import (
    CapacityError,
    ContractViolationError,
    MitigationError,
    SbdynError,
    SearchAbortError,
    StalledManifoldError,
    StructuralError,
)
from .experiments import (
    AdvantageReport,
    DepthSearchResult,
    FitResult,
    ResourceEstimate,
    extrapolate_advantage,
    fit_depths,
    noise_sweep,
    run_trajectory_suite,
    trotter_depth_search,
    variational_depth_search,
)
from .mclachlan import McLachlanSystem, assemble_mclachlan, solve_parameters
from .model import Layout, SpinBosonSpec, build_hamiltonian, initial_state
from .noise import DeviceNoiseParams, ScaledNoiseModel, run_density_matrix
from .noisy_eval import SampledMcLachlanEvaluator
from .pauli import PauliSum, PauliTerm
from .propagate import (
    IntegratorConfig,
    TrajectoryRecord,
    propagate_trotter,
    propagate_variational,
)
from .states import DensityMatrix, StateVector, exact_propagate, fidelity

__version__ = "0.1.0"
