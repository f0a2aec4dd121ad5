"""Spin-boson Hamiltonian construction and the direct (one-hot) boson-to-qubit mapping.

Qubit layout (little-endian): qubit 0 is the spin; mode ``k`` occupies qubits
``1 + k*(n_max+1) .. (k+1)*(n_max+1)``, lowest index = occupation level 0.
The optional ancilla (gradient evaluation) is reserved as the highest index.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError
from .pauli import PauliSum, PauliTerm, single_pauli
from .states import StateVector

USC_RANGE = (0.1, 1.0)


@dataclass(frozen=True)
class SpinBosonSpec:
    """Model definition; all energies in units of the (uniform) mode frequency."""

    M: int
    n_max: int
    omega: float = 1.0
    epsilon: float = 0.0
    delta: float = 0.0
    g: float = 0.5

    def __post_init__(self):
        if self.M < 1 or self.n_max < 1:
            raise ContractViolationError("require M >= 1 and n_max >= 1")

    @property
    def range_note(self) -> str | None:
        ratio = self.g / self.omega
        if not (USC_RANGE[0] <= ratio <= USC_RANGE[1]):
            return f"g/omega = {ratio:g} outside the documented USC range {USC_RANGE}"
        return None

    def to_json(self) -> str:
        return json.dumps(
            {
                "M": self.M,
                "n_max": self.n_max,
                "omega": self.omega,
                "epsilon": self.epsilon,
                "delta": self.delta,
                "g": self.g,
            }
        )

    @classmethod
    def from_json(cls, text: str) -> "SpinBosonSpec":
        return cls(**json.loads(text))


@dataclass(frozen=True)
class Layout:
    """Qubit index assignment for a spin plus M one-hot mode registers."""

    M: int
    n_max: int
    with_ancilla: bool = False

    spin_qubit: int = 0

    @property
    def n_qubits(self) -> int:
        return self.M * (self.n_max + 1) + 1 + (1 if self.with_ancilla else 0)

    @property
    def ancilla_qubit(self) -> int:
        if not self.with_ancilla:
            raise ContractViolationError("layout reserves no ancilla")
        return self.M * (self.n_max + 1) + 1

    def mode_qubit(self, k: int, level: int) -> int:
        if not (0 <= k < self.M and 0 <= level <= self.n_max):
            raise ContractViolationError("mode/level outside layout")
        return 1 + k * (self.n_max + 1) + level


@dataclass(frozen=True)
class BosonOpDecomposition:
    """Pauli decompositions of the mapped ladder operators of one mode."""

    create: PauliSum
    annihilate: PauliSum
    number: PauliSum
    coupling_even: PauliSum
    coupling_odd: PauliSum


@dataclass(frozen=True)
class MappedModel:
    hamiltonian: PauliSum
    n_qubits: int
    n_h: int
    layout: Layout
    spec: SpinBosonSpec


def _sigma_plus_minus(qubit: int, n: int, plus: bool) -> PauliSum:
    s = 1j if plus else -1j
    return PauliSum(
        [single_pauli("X", qubit, n, 0.5), single_pauli("Y", qubit, n, 0.5 * s)]
    )


def map_boson_ops(mode: int, n_max: int, layout: Layout) -> BosonOpDecomposition:
    """Direct-mapping decompositions a~+, a~, a~+a~ and the even/odd coupling split."""
    if n_max < 1:
        raise ContractViolationError("n_max must be >= 1")
    n = layout.n_qubits
    create = PauliSum(n_qubits=n)
    for lvl in range(n_max):
        # sqrt(lvl+1) * sigma+_{lvl} sigma-_{lvl+1}
        t = _sigma_plus_minus(layout.mode_qubit(mode, lvl), n, True) @ _sigma_plus_minus(
            layout.mode_qubit(mode, lvl + 1), n, False
        )
        create = create + np.sqrt(lvl + 1) * t
    annihilate = create.adjoint()

    number = PauliSum(n_qubits=n)
    for lvl in range(n_max):
        a, b = layout.mode_qubit(mode, lvl), layout.mode_qubit(mode, lvl + 1)
        w = (lvl + 1) / 4.0
        zz = single_pauli("Z", a, n) * single_pauli("Z", b, n)
        number = number + PauliSum(
            [
                single_pauli("Z", a, n, w),
                single_pauli("Z", b, n, -w),
                PauliTerm(-w, zz.axes),
                PauliTerm(w, "I" * n),  # (1/2 I_a + 1/2 I_b) * w
            ]
        )

    even = PauliSum(n_qubits=n)
    odd = PauliSum(n_qubits=n)
    for lvl in range(n_max):
        a, b = layout.mode_qubit(mode, lvl), layout.mode_qubit(mode, lvl + 1)
        c = -1j * np.sqrt(lvl + 1) / 2.0
        xx = single_pauli("X", a, n) * single_pauli("X", b, n)
        yy = single_pauli("Y", a, n) * single_pauli("Y", b, n)
        part = c * PauliSum([xx, yy])
        if lvl % 2 == 0:
            even = even + part
        else:
            odd = odd + part
    return BosonOpDecomposition(create, annihilate, number, even, odd)


def n_h_formula(M: int, n_max: int) -> int:
    """Hamiltonian term count including identity contributions."""
    return 7 * M * n_max + 2


def build_hamiltonian(spec: SpinBosonSpec, with_ancilla: bool = False) -> MappedModel:
    """Qubit-mapped H/omega for the resonant uniform spin-boson model."""
    layout = Layout(spec.M, spec.n_max, with_ancilla=with_ancilla)
    n = layout.n_qubits
    h = PauliSum(n_qubits=n)
    for k in range(spec.M):
        ops = map_boson_ops(k, spec.n_max, layout)
        h = h + spec.omega * ops.number
        coupling = ops.create + ops.annihilate
        sx = PauliSum([single_pauli("X", layout.spin_qubit, n)])
        h = h + spec.g * (sx @ coupling)
    h = h + PauliSum([single_pauli("Z", layout.spin_qubit, n, spec.epsilon / 2.0)])
    h = h + PauliSum([single_pauli("X", layout.spin_qubit, n, spec.delta)])
    return MappedModel(
        hamiltonian=h,
        n_qubits=n,
        n_h=n_h_formula(spec.M, spec.n_max),
        layout=layout,
        spec=spec,
    )


def initial_state(spec: SpinBosonSpec, layout: Layout) -> StateVector:
    """Non-interacting ground state: spin |0>, each mode one-hot at level 0."""
    index = 0
    for k in range(spec.M):
        index |= 1 << layout.mode_qubit(k, 0)
    return StateVector.basis(index, layout.n_qubits)


def spin_orientation(state: StateVector, layout: Layout) -> float:
    """P_z = (<sigma_z on the spin qubit> + 1) / 2."""
    from .states import expectation

    sz = PauliSum([single_pauli("Z", layout.spin_qubit, layout.n_qubits)])
    return (expectation(sz, state) + 1.0) / 2.0


def physical_subspace_indices(layout: Layout) -> np.ndarray:
    """Basis indices where every mode register is one-hot (spin free)."""
    per_mode = [
        [1 << layout.mode_qubit(k, lvl) for lvl in range(layout.n_max + 1)]
        for k in range(layout.M)
    ]
    idxs = [0, 1]  # spin qubit
    for mode in per_mode:
        idxs = [i | m for i in idxs for m in mode]
    return np.array(sorted(idxs))
