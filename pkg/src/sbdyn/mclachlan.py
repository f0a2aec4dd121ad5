"""McLachlan equations of motion: gradient states, M/V assembly, regularized solve."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .circuit import ROTATION_GENERATOR, ParamCircuit, apply_matrix
from .errors import StalledManifoldError, StructuralError
from .pauli import PauliSum, apply_pauli_sum, single_pauli

_GEN = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


@dataclass
class McLachlanSystem:
    m_matrix: np.ndarray
    v_vector: np.ndarray
    include_global_phase: bool = True


def occurrence_list(circuit: ParamCircuit) -> list[tuple[int, int, float, str, int]]:
    """All parameterized gate occurrences: (position, param, mult, generator axis, qubit)."""
    out = []
    for param, positions in sorted(circuit.occurrence_map.items()):
        for pos in positions:
            g = circuit.gates[pos]
            out.append((pos, param, g.mult, ROTATION_GENERATOR[g.kind], g.qubits[0]))
    return out


def _forward_states(circuit: ParamCircuit, params: np.ndarray) -> list[np.ndarray]:
    """States after 0..N gates."""
    psi = np.zeros(2**circuit.n_qubits, dtype=complex)
    psi[0] = 1.0
    states = [psi]
    for g in circuit.gates:
        psi = apply_matrix(psi, g.matrix(params), g.qubits, circuit.n_qubits)
        states.append(psi)
    return states


def occurrence_states(circuit: ParamCircuit, params: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    """Final state and, per occurrence, the generator-inserted state chi_a.

    chi_a = U_N ... U_{a+1} P_a U_a ... U_1 |0>, so that
    d|Phi>/d theta_i = sum_{a in occ(i)} (-i mult_a / 2) chi_a.
    """
    params = np.asarray(params, dtype=float)
    if params.shape[0] != circuit.n_params:
        raise StructuralError("parameter vector length mismatch")
    fwd = _forward_states(circuit, params)
    chis = []
    for pos, _param, _mult, axis, qubit in occurrence_list(circuit):
        chi = apply_matrix(fwd[pos + 1], _GEN[axis], (qubit,), circuit.n_qubits)
        for g in circuit.gates[pos + 1 :]:
            chi = apply_matrix(chi, g.matrix(params), g.qubits, circuit.n_qubits)
        chis.append(chi)
    return fwd[-1], chis


def gradient_states(circuit: ParamCircuit, params: np.ndarray) -> list[tuple[int, np.ndarray]]:
    """Analytic derivative state per logical parameter (product rule over occurrences)."""
    phi, chis = occurrence_states(circuit, params)
    occs = occurrence_list(circuit)
    grads = {p: np.zeros_like(phi) for p in range(circuit.n_params)}
    for (pos, param, mult, _axis, _qubit), chi in zip(occs, chis):
        grads[param] = grads[param] + (-0.5j * mult) * chi
    return sorted(grads.items())


def assemble_mclachlan(
    circuit: ParamCircuit,
    params: np.ndarray,
    h: PauliSum,
    include_global_phase: bool = True,
) -> McLachlanSystem:
    """M_ij = Re(<d_i|d_j> + <d_i|Phi><d_j|Phi>), V_i = Im(<d_i|H|Phi> - <d_i|Phi><H>)."""
    phi, _ = occurrence_states(circuit, params)
    grads = gradient_states(circuit, params)
    G = np.array([g for _p, g in grads])  # (N_theta, dim)
    hphi = apply_pauli_sum(h, phi)
    gram = G.conj() @ G.T
    a = G.conj() @ phi  # a_i = <d_i Phi | Phi>
    m = np.real(gram)
    v = np.imag(G.conj() @ hphi)
    if include_global_phase:
        m = m + np.real(np.outer(a, a))
        v = v - np.imag(a * np.vdot(phi, hphi))
    return McLachlanSystem(m_matrix=m, v_vector=v, include_global_phase=include_global_phase)


def solve_parameters(system: McLachlanSystem, svd_cutoff: float) -> np.ndarray:
    """theta_dot = pinv(M) V with singular values below the absolute cutoff zeroed."""
    u, s, vt = np.linalg.svd(system.m_matrix)
    keep = s >= svd_cutoff
    if not keep.any():
        raise StalledManifoldError(s)
    inv = np.where(keep, 1.0 / np.where(keep, s, 1.0), 0.0)
    return vt.T @ (inv * (u.T @ system.v_vector))
