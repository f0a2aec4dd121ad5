"""Sampled estimation of the equation-of-motion matrix elements.

Every entry of M and V is reduced to real parts of overlaps between
generator-inserted circuit states, each measurable as the ancilla <Z> of one
Hadamard-test circuit: the ancilla starts in |+>, branch selection
(anti-)controls a Pauli insertion, and a final Hadamard maps Re<v0|v1> onto
the ancilla Z expectation.  Circuits run either on a density matrix with
per-gate noise channels and readout error (finite eta) or on a statevector
(eta = infinity), with multinomial shot noise in both cases.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .circuit import Gate, ParamCircuit, build_ansatz
from .errors import StructuralError
from .mclachlan import McLachlanSystem, occurrence_list, occurrence_states
from .model import Layout, build_hamiltonian
from .noise import (
    ScaledNoiseModel,
    confusion_matrix,
    mitigate_readout,
    run_density_matrix,
)
from .model import SpinBosonSpec
from .pauli import PauliTerm, apply_pauli_term

_CONTROLLED = {"X": "cnot", "Y": "cy", "Z": "cz"}
_BASIS_CHANGE = {"X": "h", "Y": "ydag"}


@dataclass
class EvalCounters:
    """Cumulative accounting of the sampling workload."""

    n_system_calls: int = 0
    n_circuits: int = 0

    def as_dict(self) -> dict[str, int]:
        return {"n_system_calls": self.n_system_calls, "n_circuits": self.n_circuits}


@dataclass
class _Insertion:
    position: int
    axis: str
    qubit: int


class SampledMcLachlanEvaluator:
    """Builds M(theta), V(theta) from (simulated) circuit measurements.

    Parameters
    ----------
    shots:
        Shots per circuit; ``None`` means analytically exact expectation
        values (still routed through the same circuits/noise channels).
    noise:
        Gate/readout error model; ``eta = math.inf`` selects the statevector
        fast path (shot noise only).
    """

    def __init__(
        self,
        spec: SpinBosonSpec,
        depth: int,
        noise: ScaledNoiseModel,
        shots: int | None = 8192,
        seed: int = 0,
        include_global_phase: bool = True,
    ):
        self.spec = spec
        self.depth = depth
        self.noise = noise
        self.shots = shots
        self.rng = np.random.default_rng(seed)
        self.include_global_phase = include_global_phase
        self.layout = Layout(spec.M, spec.n_max, with_ancilla=True)
        self.model = build_hamiltonian(spec, with_ancilla=True)
        self.circuit = build_ansatz(spec, depth, self.layout)
        self.ancilla = self.layout.ancilla_qubit
        self.occurrences = occurrence_list(self.circuit)
        self.counters = EvalCounters()
        self._confusion2 = confusion_matrix(1, self.noise.scaled().readout_error)
        self.h_terms = [
            (float(t.coefficient.real), t.axes) for t in self.model.hamiltonian.terms
        ]
        self.h_identity = float(self.model.hamiltonian.identity_offset.real)

    # -- public API ---------------------------------------------------------

    def system(self, theta: np.ndarray) -> McLachlanSystem:
        self.counters.n_system_calls += 1
        occs = self.occurrences
        n_occ = len(occs)
        if self.noise.is_noiseless:
            overlap = self._statevector_overlaps(theta)
        else:
            overlap = self._hadamard_test_overlaps(theta)
        re_chi, r_vec, re_h, h_exp = overlap

        # map occurrences onto logical parameters: O[param, a] = mult_a / 2
        n_params = self.circuit.n_params
        omap = np.zeros((n_params, n_occ))
        for a, (_pos, param, mult, _ax, _q) in enumerate(occs):
            omap[param, a] = mult / 2.0
        m = omap @ re_chi @ omap.T
        v = omap @ re_h + self.h_identity * (omap @ r_vec)
        if self.include_global_phase:
            b = omap @ r_vec
            m = m - np.outer(b, b)
            v = v - b * h_exp
        return McLachlanSystem(m_matrix=m, v_vector=v, include_global_phase=self.include_global_phase)

    # -- statevector fast path (eta = infinity) -----------------------------

    def _statevector_overlaps(self, theta):
        phi, chis = occurrence_states(self.circuit, theta)
        n_occ = len(chis)
        re_chi = np.eye(n_occ)
        for a in range(n_occ):
            for b in range(a + 1, n_occ):
                val = self._sample(float(np.vdot(chis[a], chis[b]).real))
                re_chi[a, b] = re_chi[b, a] = val
        r_vec = np.array(
            [self._sample(float(np.vdot(chi, phi).real)) for chi in chis]
        )
        re_h = np.zeros(n_occ)
        h_exp = self.h_identity
        for coeff, axes in self.h_terms:
            p_phi = apply_pauli_term(PauliTerm(1.0, axes), phi)
            for a, chi in enumerate(chis):
                re_h[a] += coeff * self._sample(float(np.vdot(chi, p_phi).real))
            h_exp += coeff * self._sample(float(np.vdot(phi, p_phi).real))
        return re_chi, r_vec, re_h, h_exp

    def _sample(self, value: float) -> float:
        """Binomial shot noise on an expectation value in [-1, 1]."""
        self.counters.n_circuits += 1
        if self.shots is None:
            return value
        p = min(1.0, max(0.0, (1.0 + value) / 2.0))
        hits = self.rng.binomial(self.shots, p)
        return 2.0 * hits / self.shots - 1.0

    # -- density-matrix path (finite eta) -----------------------------------

    def _hadamard_test_overlaps(self, theta):
        bound = self._bound_gates(theta)
        occs = self.occurrences
        n_occ = len(occs)
        re_chi = np.eye(n_occ)
        for a in range(n_occ):
            for b in range(a + 1, n_occ):
                val = self._run_test(bound, self._ins(occs[a]), self._ins(occs[b]), None)
                re_chi[a, b] = re_chi[b, a] = val
        r_vec = np.array(
            [self._run_test(bound, self._ins(o), None, None) for o in occs]
        )
        re_h = np.zeros(n_occ)
        for coeff, axes in self.h_terms:
            for a, occ in enumerate(occs):
                re_h[a] += coeff * self._run_test(bound, self._ins(occ), None, axes)
        h_exp = self.h_identity + sum(
            coeff * self._pauli_expectation(bound, axes) for coeff, axes in self.h_terms
        )
        return re_chi, r_vec, re_h, h_exp

    @staticmethod
    def _ins(occ) -> _Insertion:
        pos, _param, _mult, axis, qubit = occ
        return _Insertion(position=pos, axis=axis, qubit=qubit)

    def _bound_gates(self, theta: np.ndarray) -> list[Gate]:
        theta = np.asarray(theta, dtype=float)
        if theta.shape[0] != self.circuit.n_params:
            raise StructuralError("parameter vector length mismatch")
        out = []
        for g in self.circuit.gates:
            if g.param is not None:
                out.append(Gate(g.kind, g.qubits, angle=g.mult * float(theta[g.param])))
            else:
                out.append(g)
        return out

    def _run_test(
        self,
        bound: list[Gate],
        branch0: _Insertion,
        branch1: _Insertion | None,
        end_axes: str | None,
    ) -> float:
        """Ancilla <Z> = Re<v0|v1> for one Hadamard-test circuit.

        Branch 0 (ancilla |0>) inserts the branch0 Pauli, branch 1 inserts
        branch1 (or the end-of-circuit Hamiltonian string ``end_axes``).
        """
        anc = self.ancilla
        gates: list[Gate] = [Gate("h", (anc,))]
        for pos, g in enumerate(bound):
            gates.append(g)
            if pos == branch0.position:
                gates.append(Gate("x", (anc,)))
                gates.append(Gate(_CONTROLLED[branch0.axis], (anc, branch0.qubit)))
                gates.append(Gate("x", (anc,)))
            if branch1 is not None and pos == branch1.position:
                gates.append(Gate(_CONTROLLED[branch1.axis], (anc, branch1.qubit)))
        if end_axes is not None:
            for q, ax in enumerate(end_axes):
                if ax != "I":
                    gates.append(Gate(_CONTROLLED[ax], (anc, q)))
        gates.append(Gate("h", (anc,)))
        probs = self._execute(gates)
        p1 = self._marginal(probs, (anc,))[1]
        return 1.0 - 2.0 * self._readout(np.array([1.0 - p1, p1]), self._confusion2)

    def _pauli_expectation(self, bound: list[Gate], axes: str) -> float:
        """<P> on the bare ansatz via basis rotation and bit-parity readout."""
        gates = list(bound)
        support = tuple(q for q, ax in enumerate(axes) if ax != "I")
        for q in support:
            if axes[q] in _BASIS_CHANGE:
                gates.append(Gate(_BASIS_CHANGE[axes[q]], (q,)))
        probs = self._marginal(self._execute(gates), support)
        confusion = confusion_matrix(len(support), self.noise.scaled().readout_error)
        probs = self._readout_dist(probs, confusion)
        idx = np.arange(probs.size)
        parity = np.ones(probs.size)
        for bit in range(len(support)):
            parity *= 1 - 2.0 * ((idx >> bit) & 1)
        return float(np.dot(parity, probs))

    def _execute(self, gates: list[Gate]) -> np.ndarray:
        self.counters.n_circuits += 1
        circ = ParamCircuit(self.circuit.n_qubits, gates, n_params=0)
        rho = run_density_matrix(circ, None, self.noise)
        return rho.probabilities()

    def _marginal(self, probs: np.ndarray, qubits: tuple[int, ...]) -> np.ndarray:
        """Distribution over the given qubits (qubits[0] = output bit 0)."""
        idx = np.arange(probs.size)
        out = np.zeros(2 ** len(qubits))
        sub = np.zeros_like(idx)
        for bit, q in enumerate(qubits):
            sub |= ((idx >> q) & 1) << bit
        np.add.at(out, sub, probs)
        return out

    def _readout(self, probs: np.ndarray, confusion: np.ndarray) -> float:
        """Measured-and-mitigated P(1) of a single bit distribution."""
        return float(self._readout_dist(probs, confusion)[1])

    def _readout_dist(self, probs: np.ndarray, confusion: np.ndarray) -> np.ndarray:
        measured = confusion @ probs
        if self.shots is None:
            counts = measured
        else:
            counts = self.rng.multinomial(self.shots, measured / measured.sum())
        if np.allclose(confusion, np.eye(confusion.shape[0])):
            total = counts.sum()
            return counts / total
        return mitigate_readout(counts, confusion)
