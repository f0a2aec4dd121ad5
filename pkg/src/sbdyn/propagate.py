"""Time evolution drivers: variational equation-of-motion integration and Trotter stepping.

The variational driver integrates M(theta) theta_dot = V(theta) with the
adaptive integrator and records, at every accepted step, the spin-up
population P_z and the infidelity against the exact propagated state.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .circuit import ParamCircuit, build_ansatz, run_statevector, trotter_params
from .errors import ContractViolationError
from .mclachlan import McLachlanSystem, assemble_mclachlan, solve_parameters
from .model import (
    MappedModel,
    SpinBosonSpec,
    build_hamiltonian,
    initial_state,
    spin_orientation,
)
from .pauli import pauli_to_matrix
from .rk45 import IntegrationResult, integrate_rk45
from .states import ExactPropagator, StateVector

DEFAULT_T_FINAL = 10.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Adaptive-step and linear-solve tolerances for the equation of motion."""

    atol: float = 1e-6
    rtol: float = 1e-3
    svd_cutoff: float = 1e-6
    first_step_fraction: float = 1e-3
    max_step_fraction: float = 0.1

    @classmethod
    def statevector(cls) -> "IntegratorConfig":
        return cls(atol=1e-6, rtol=1e-3, svd_cutoff=1e-6)

    @classmethod
    def sampled(cls) -> "IntegratorConfig":
        """Looser tolerances for shot-noise-limited matrix elements."""
        return cls(atol=1e-3, rtol=1e-3, svd_cutoff=1e-3)


@dataclass
class TrajectoryRecord:
    """Accepted-step history of one evolution run."""

    ts: np.ndarray
    thetas: np.ndarray  # (n_steps, n_params)
    p_z: np.ndarray
    infidelity: np.ndarray
    nfev: int = 0
    n_accepted: int = 0
    n_rejected: int = 0
    extras: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def final_infidelity(self) -> float:
        return float(self.infidelity[-1])

    @property
    def max_infidelity(self) -> float:
        return float(np.max(self.infidelity))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            extra_keys = sorted(self.extras)
            w.writerow(
                ["t", "p_z", "infidelity"]
                + extra_keys
                + [f"theta_{i}" for i in range(self.thetas.shape[1])]
            )
            for i, t in enumerate(self.ts):
                w.writerow(
                    [t, self.p_z[i], self.infidelity[i]]
                    + [self.extras[k][i] for k in extra_keys]
                    + list(self.thetas[i])
                )

    def to_json(self, path) -> None:
        payload = {
            "t": self.ts.tolist(),
            "p_z": self.p_z.tolist(),
            "infidelity": self.infidelity.tolist(),
            "theta": self.thetas.tolist(),
            "nfev": self.nfev,
            "n_accepted": self.n_accepted,
            "n_rejected": self.n_rejected,
        }
        payload.update({k: v.tolist() for k, v in self.extras.items()})
        with open(path, "w") as f:
            json.dump(payload, f, indent=2)


SystemFn = Callable[[np.ndarray], McLachlanSystem]


def propagate_variational(
    spec: SpinBosonSpec,
    depth: int,
    t_final: float = DEFAULT_T_FINAL,
    config: IntegratorConfig | None = None,
    system_fn: SystemFn | None = None,
    observe: Callable[[float, np.ndarray], dict[str, float]] | None = None,
) -> TrajectoryRecord:
    """Integrate the variational parameters from theta(0) = 0 to ``t_final``.

    ``system_fn`` maps a parameter vector to the (M, V) system; by default the
    matrix elements are assembled exactly from statevectors.  ``observe`` can
    append extra per-step scalar records (e.g. sampled observables).
    """
    if config is None:
        config = IntegratorConfig.statevector()
    model = build_hamiltonian(spec)
    circuit = build_ansatz(spec, depth)
    if system_fn is None:
        def system_fn(theta: np.ndarray) -> McLachlanSystem:
            return assemble_mclachlan(circuit, theta, model.hamiltonian)

    h_dense = pauli_to_matrix(model.hamiltonian, model.n_qubits)
    exact = ExactPropagator(h_dense, initial_state(spec, model.layout))

    def rhs(_t: float, theta: np.ndarray) -> np.ndarray:
        return solve_parameters(system_fn(theta), config.svd_cutoff)

    records: dict[str, list[float]] = {"p_z": [], "infidelity": []}
    extra_records: dict[str, list[float]] = {}

    def callback(t: float, theta: np.ndarray) -> None:
        psi = run_statevector(circuit, theta)
        records["p_z"].append(spin_orientation(psi, model.layout))
        records["infidelity"].append(1.0 - abs(exact.overlap_with(psi.amplitudes, t)))
        if observe is not None:
            for k, v in observe(t, theta).items():
                extra_records.setdefault(k, []).append(v)

    result = integrate_rk45(
        rhs,
        (0.0, t_final),
        np.zeros(circuit.n_params),
        rtol=config.rtol,
        atol=config.atol,
        first_step=config.first_step_fraction * t_final,
        max_step=config.max_step_fraction * t_final,
        callback=callback,
    )
    return TrajectoryRecord(
        ts=result.ts,
        thetas=result.ys,
        p_z=np.array(records["p_z"]),
        infidelity=np.array(records["infidelity"]),
        nfev=result.nfev,
        n_accepted=result.n_accepted,
        n_rejected=result.n_rejected,
        extras={k: np.array(v) for k, v in extra_records.items()},
    )


def propagate_trotter(
    spec: SpinBosonSpec,
    depth: int,
    t_final: float = DEFAULT_T_FINAL,
    checkpoints: int | None = None,
) -> TrajectoryRecord:
    """Evolve with ``depth`` first-order product-formula layers of size t_final/depth.

    Records P_z and infidelity after every layer (the only times at which the
    product formula defines a state).
    """
    if depth < 1:
        raise ContractViolationError("Trotter depth must be >= 1")
    model = build_hamiltonian(spec)
    circuit = build_ansatz(spec, 1)
    h_dense = pauli_to_matrix(model.hamiltonian, model.n_qubits)
    exact = ExactPropagator(h_dense, initial_state(spec, model.layout))
    dt = t_final / depth
    layer = trotter_params(spec, dt, 1)

    ts = [0.0]
    psi = run_statevector(circuit, np.zeros(circuit.n_params))
    p_z = [spin_orientation(psi, model.layout)]
    infid = [1.0 - abs(exact.overlap_with(psi.amplitudes, 0.0))]
    amp = psi.amplitudes
    prep_free = _strip_preparation(circuit)
    for j in range(1, depth + 1):
        amp = _apply_circuit(prep_free, layer, amp)
        t = j * dt
        ts.append(t)
        state = StateVector(amp, validate=False)
        p_z.append(spin_orientation(state, model.layout))
        infid.append(1.0 - abs(exact.overlap_with(amp, t)))
    return TrajectoryRecord(
        ts=np.array(ts),
        thetas=np.tile(layer, (depth + 1, 1)),
        p_z=np.array(p_z),
        infidelity=np.array(infid),
    )


def _strip_preparation(circuit: ParamCircuit) -> ParamCircuit:
    """Drop the leading non-parameterized preparation gates of an ansatz circuit."""
    n_prep = 0
    while n_prep < len(circuit.gates) and circuit.gates[n_prep].kind == "x":
        n_prep += 1
    return ParamCircuit(
        circuit.n_qubits, circuit.gates[n_prep:], n_params=circuit.n_params
    )


def _apply_circuit(circuit: ParamCircuit, params: np.ndarray, amp: np.ndarray) -> np.ndarray:
    from .circuit import apply_matrix

    for g in circuit.gates:
        amp = apply_matrix(amp, g.matrix(params), g.qubits, circuit.n_qubits)
    return amp
