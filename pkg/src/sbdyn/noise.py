"""Device noise model: Kraus channels, density-matrix execution, readout error.

Error rates are interpreted as average-gate-fidelity errors and mapped onto
depolarizing channels; idle decay during each gate is modeled as amplitude
damping (T1) plus pure dephasing (T2).  A single scale factor eta divides all
error rates and multiplies both coherence times, interpolating between the
calibrated device (eta = 1) and a shot-noise-only machine (eta = infinity).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np

from .circuit import ParamCircuit, apply_matrix
from .errors import ContractViolationError, MitigationError
from .states import DensityMatrix

_I2 = np.eye(2, dtype=complex)
_PAULIS_1Q = [
    _I2,
    np.array([[0, 1], [1, 0]], dtype=complex),
    np.array([[0, -1j], [1j, 0]], dtype=complex),
    np.array([[1, 0], [0, -1]], dtype=complex),
]

KRAUS_COMPLETENESS_TOL = 1e-12


@dataclass(frozen=True)
class DeviceNoiseParams:
    """Calibration summary of the target device (times in seconds)."""

    t1: float = 122.55e-6
    t2: float = 149.53e-6
    readout_error: float = 1.63e-2
    error_1q: float = 2.09e-4
    error_2q: float = 7.78e-3
    gate_len_1q: float = 35.6e-9
    gate_len_2q: float = 536.89e-9

    def to_json(self) -> str:
        return json.dumps(self.__dict__, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "DeviceNoiseParams":
        return cls(**json.loads(text))


def depolarizing_kraus(lam: float, n_qubits: int) -> list[np.ndarray]:
    """rho -> (1 - lam) rho + lam I / d as a Kraus set over n_qubits."""
    if not (0.0 <= lam <= 1.0 + 1e-12):
        raise ContractViolationError(f"depolarizing parameter {lam} outside [0, 1]")
    dim = 2**n_qubits
    paulis = _PAULIS_1Q
    ops = [np.array([[1.0 + 0j]])]
    for _ in range(n_qubits):
        ops = [np.kron(p, o) for p in paulis for o in ops]
    kraus = [math.sqrt(1.0 - lam * (dim * dim - 1) / (dim * dim)) * np.eye(dim, dtype=complex)]
    w = math.sqrt(lam) / dim
    kraus += [w * op for op in ops[1:]]
    return kraus


def thermal_relaxation_kraus(duration: float, t1: float, t2: float) -> list[np.ndarray]:
    """Amplitude damping (T1) composed with pure dephasing (T2), T2 <= 2 T1."""
    t2 = min(t2, 2.0 * t1)
    gamma = 1.0 - math.exp(-duration / t1)
    # residual coherence after removing the T1 contribution
    coh = math.exp(-duration / t2 + duration / (2.0 * t1))
    p_z = (1.0 - coh) / 2.0
    ad = [
        np.array([[1, 0], [0, math.sqrt(1 - gamma)]], dtype=complex),
        np.array([[0, math.sqrt(gamma)], [0, 0]], dtype=complex),
    ]
    deph = [
        math.sqrt(1 - p_z) * _I2,
        math.sqrt(p_z) * np.array([[1, 0], [0, -1]], dtype=complex),
    ]
    return [d @ a for d in deph for a in ad]


def kraus_completeness_defect(kraus: list[np.ndarray]) -> float:
    dim = kraus[0].shape[0]
    s = sum(k.conj().T @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(dim))))


def error_to_depolarizing(error: float, n_qubits: int) -> float:
    """Depolarizing parameter with average gate infidelity ``error``.

    Average fidelity of a d-dimensional depolarizing channel is
    1 - lam (d - 1) / d, hence lam = error * d / (d - 1).
    """
    dim = 2**n_qubits
    return error * dim / (dim - 1)


@dataclass(frozen=True)
class ScaledNoiseModel:
    """Device parameters with all error sources reduced by the factor eta."""

    params: DeviceNoiseParams
    eta: float = 1.0

    def __post_init__(self):
        if not (self.eta >= 1.0):
            raise ContractViolationError("eta must be >= 1 (use math.inf for noiseless)")

    @property
    def is_noiseless(self) -> bool:
        return math.isinf(self.eta)

    def scaled(self) -> DeviceNoiseParams:
        if self.is_noiseless:
            return replace(self.params, readout_error=0.0, error_1q=0.0, error_2q=0.0)
        return replace(
            self.params,
            t1=self.params.t1 * self.eta,
            t2=self.params.t2 * self.eta,
            readout_error=self.params.readout_error / self.eta,
            error_1q=self.params.error_1q / self.eta,
            error_2q=self.params.error_2q / self.eta,
        )

    def gate_kraus(self, n_qubits: int) -> list[list[np.ndarray]]:
        """Per-qubit-count channel stack applied after each gate.

        Returns the depolarizing channel on the gate's qubits followed by a
        thermal-relaxation channel per involved qubit (as 1-qubit Kraus sets).
        """
        if self.is_noiseless:
            return []
        p = self.scaled()
        error = p.error_1q if n_qubits == 1 else p.error_2q
        duration = p.gate_len_1q if n_qubits == 1 else p.gate_len_2q
        stack = [depolarizing_kraus(error_to_depolarizing(error, n_qubits), n_qubits)]
        stack += [thermal_relaxation_kraus(duration, p.t1, p.t2)] * n_qubits
        return stack

    @cached_property
    def _channel_superops(self) -> dict[int, list[np.ndarray]]:
        """Fused (depolarizing, then per-qubit thermal) superoperators by gate arity."""
        out = {}
        for arity in (1, 2):
            stack = self.gate_kraus(arity)
            out[arity] = [superop_from_kraus(k) for k in stack]
        return out


def superop_from_kraus(kraus: list[np.ndarray]) -> np.ndarray:
    """Superoperator on a row-major-flattened density matrix.

    Flattening rho (2^n x 2^n) row-major yields a 2n-qubit vector whose low n
    bits index columns and high n bits index rows; the channel acts on the
    qubit tuple (rows..., cols...) with matrix sum_k conj(K_k) kron K_k.
    """
    return sum(np.kron(k.conj(), k) for k in kraus)


def apply_kraus(rho: np.ndarray, kraus: list[np.ndarray], qubits: tuple[int, ...], n: int) -> np.ndarray:
    """rho -> sum_k K_k rho K_k^dagger on the given qubits of a 2^n density matrix."""
    vec = _apply_channel(rho.reshape(-1), superop_from_kraus(kraus), qubits, n)
    return vec.reshape(rho.shape)


def _apply_channel(vec: np.ndarray, superop: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    both = tuple(n + q for q in qubits) + tuple(qubits)
    return apply_matrix(vec, superop, both, 2 * n)


def run_density_matrix(
    circuit: ParamCircuit,
    params: np.ndarray | None,
    noise: ScaledNoiseModel | None = None,
) -> DensityMatrix:
    """Execute a circuit on a density matrix with per-gate noise channels."""
    if params is None:
        params = np.zeros(circuit.n_params)
    params = np.asarray(params, dtype=float)
    n = circuit.n_qubits
    dim = 2**n
    vec = np.zeros(dim * dim, dtype=complex)
    vec[0] = 1.0
    noisy = noise is not None and not noise.is_noiseless
    superops = noise._channel_superops if noisy else None
    for g in circuit.gates:
        u = g.matrix(params)
        vec = apply_matrix(vec, u, tuple(n + q for q in g.qubits), 2 * n)
        vec = apply_matrix(vec, u.conj(), g.qubits, 2 * n)
        if noisy:
            stack = superops[len(g.qubits)]
            vec = _apply_channel(vec, stack[0], g.qubits, n)
            for q, s in zip(g.qubits, stack[1:]):
                vec = _apply_channel(vec, s, (q,), n)
    return DensityMatrix(vec.reshape(dim, dim), validate=False)


# ---------------------------------------------------------------------------
# readout
# ---------------------------------------------------------------------------


def confusion_matrix(n_qubits: int, p_flip: float) -> np.ndarray:
    """P(observed i | prepared j) for independent symmetric per-qubit flips."""
    one = np.array([[1 - p_flip, p_flip], [p_flip, 1 - p_flip]])
    c = np.array([[1.0]])
    for _ in range(n_qubits):
        c = np.kron(one, c)
    return c


def sample_counts(
    probabilities: np.ndarray,
    shots: int,
    rng: np.random.Generator,
    confusion: np.ndarray | None = None,
) -> np.ndarray:
    """Multinomial counts of measured bitstrings, readout error included."""
    p = np.clip(np.asarray(probabilities, dtype=float), 0.0, None)
    p = p / p.sum()
    if confusion is not None:
        p = confusion @ p
    return rng.multinomial(shots, p)


def mitigate_readout(counts: np.ndarray, confusion: np.ndarray) -> np.ndarray:
    """Constrained least-squares unfolding of measured frequencies.

    Solves min ||C q - f||_2 subject to q >= 0, then renormalizes to a
    probability vector.
    """
    from scipy.optimize import nnls

    f = np.asarray(counts, dtype=float)
    total = f.sum()
    if total <= 0:
        raise MitigationError("no counts to mitigate")
    q, _ = nnls(confusion, f / total)
    s = q.sum()
    if s <= 0:
        raise MitigationError("mitigation produced an empty distribution")
    return q / s


def calibrate_confusion(
    true_confusion: np.ndarray, shots: int, rng: np.random.Generator
) -> np.ndarray:
    """Estimate the confusion matrix by preparing and measuring each basis state."""
    dim = true_confusion.shape[0]
    est = np.zeros_like(true_confusion)
    for j in range(dim):
        est[:, j] = rng.multinomial(shots, true_confusion[:, j]) / shots
    return est


def marginal_probability(probabilities: np.ndarray, qubit: int, n_qubits: int) -> float:
    """P(qubit = 1) under a basis-state distribution."""
    idx = np.arange(2**n_qubits)
    return float(probabilities[(idx >> qubit) & 1 == 1].sum())
