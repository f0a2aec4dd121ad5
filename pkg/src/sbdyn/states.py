"""Pure and mixed quantum states plus the exact matrix-exponential oracle."""
from __future__ import annotations

import numpy as np

from .errors import CapacityError, ContractViolationError, StructuralError
from .pauli import PauliSum, apply_pauli_sum
from .tolerances import HERMITICITY_TOL, MAX_DENSITY_QUBITS, MAX_STATE_QUBITS, NORM_TOL


class StateVector:
    """Normalized complex amplitude vector over ``n_qubits`` qubits."""

    def __init__(self, amplitudes: np.ndarray, validate: bool = True):
        amplitudes = np.asarray(amplitudes, dtype=complex)
        n = int(round(np.log2(amplitudes.shape[0])))
        if 2**n != amplitudes.shape[0]:
            raise StructuralError("amplitude vector length is not a power of two")
        if n > MAX_STATE_QUBITS:
            raise CapacityError(f"{n}-qubit statevector exceeds the dense bound")
        if validate and abs(np.linalg.norm(amplitudes) - 1.0) > NORM_TOL:
            raise ContractViolationError("statevector is not normalized")
        self.amplitudes = amplitudes
        self.n_qubits = n

    @classmethod
    def basis(cls, index: int, n_qubits: int) -> "StateVector":
        amp = np.zeros(2**n_qubits, dtype=complex)
        amp[index] = 1.0
        return cls(amp, validate=False)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, np.conj(self.amplitudes))

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self.n_qubits})"


class DensityMatrix:
    """Hermitian, unit-trace, PSD matrix over ``n_qubits`` qubits."""

    def __init__(self, entries: np.ndarray, validate: bool = True):
        entries = np.asarray(entries, dtype=complex)
        n = int(round(np.log2(entries.shape[0])))
        if entries.shape[0] != entries.shape[1] or 2**n != entries.shape[0]:
            raise StructuralError("density matrix must be square with power-of-two dimension")
        if n > MAX_DENSITY_QUBITS:
            raise CapacityError(f"{n}-qubit density matrix exceeds the dense bound")
        if validate:
            if np.max(np.abs(entries - entries.conj().T)) > HERMITICITY_TOL:
                raise ContractViolationError("density matrix is not Hermitian")
            if abs(np.trace(entries).real - 1.0) > HERMITICITY_TOL:
                raise ContractViolationError("density matrix trace is not 1")
            if np.linalg.eigvalsh(entries).min() < -1e-9:
                raise ContractViolationError("density matrix has a negative eigenvalue")
        self.entries = entries
        self.n_qubits = n

    @classmethod
    def from_statevector(cls, psi: StateVector) -> "DensityMatrix":
        return cls(psi.projector(), validate=False)

    def probabilities(self) -> np.ndarray:
        return np.clip(np.real(np.diag(self.entries)), 0.0, None)

    def __repr__(self) -> str:
        return f"DensityMatrix(n_qubits={self.n_qubits})"


def exact_propagate(h: np.ndarray, psi0: StateVector, t: float) -> StateVector:
    """exp(-i h t) |psi0> via eigendecomposition; ground truth for infidelities."""
    h = np.asarray(h)
    if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL:
        raise ContractViolationError("exact_propagate requires a Hermitian matrix")
    evals, evecs = np.linalg.eigh(h)
    c = evecs.conj().T @ psi0.amplitudes
    out = evecs @ (np.exp(-1j * evals * t) * c)
    out = out / np.linalg.norm(out)
    return StateVector(out, validate=False)


class ExactPropagator:
    """Cached eigendecomposition for repeated exact evolution of one Hamiltonian."""

    def __init__(self, h: np.ndarray, psi0: StateVector):
        h = np.asarray(h)
        if np.max(np.abs(h - h.conj().T)) > HERMITICITY_TOL:
            raise ContractViolationError("ExactPropagator requires a Hermitian matrix")
        self.evals, self.evecs = np.linalg.eigh(h)
        self._c0 = self.evecs.conj().T @ psi0.amplitudes

    def state_at(self, t: float) -> StateVector:
        out = self.evecs @ (np.exp(-1j * self.evals * t) * self._c0)
        return StateVector(out / np.linalg.norm(out), validate=False)

    def overlap_with(self, psi: np.ndarray, t: float) -> complex:
        """<psi_exact(t)|psi> without forming the exact state in the computational basis."""
        w = self.evecs.conj().T @ psi
        return complex(np.vdot(np.exp(-1j * self.evals * t) * self._c0, w))


def expectation(op: PauliSum, state: StateVector | DensityMatrix) -> float:
    """<op> on a pure or mixed state; op must be Hermitian."""
    if not op.is_hermitian():
        raise ContractViolationError("expectation requires a Hermitian operator")
    if isinstance(state, StateVector):
        val = np.vdot(state.amplitudes, apply_pauli_sum(op, state.amplitudes))
    elif isinstance(state, DensityMatrix):
        val = op.identity_offset * np.trace(state.entries)
        for t in op.terms:
            # tr(P rho) = sum_j ph(j) rho[j, j ^ flip] with P[i, j] = ph(j) delta_{i, j^flip}
            flip, phase_mask, ny = t.masks()
            idx = np.arange(2**state.n_qubits)
            from .pauli import _popcount

            signs = 1 - 2 * (_popcount(idx & phase_mask) & 1)
            val += t.coefficient * (1j**ny) * np.sum(signs * state.entries[idx, idx ^ flip])
    else:
        raise StructuralError(f"unsupported state type {type(state)!r}")
    return float(np.real(val))


def fidelity(a: StateVector, b: StateVector) -> float:
    """|<a|b>|; global-phase invariant."""
    if a.n_qubits != b.n_qubits:
        raise StructuralError("fidelity of states on different registers")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)))
