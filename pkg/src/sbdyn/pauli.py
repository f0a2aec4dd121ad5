"""Pauli operator algebra on a fixed qubit register.

Conventions (used throughout the package):
- qubit indices are little-endian: bit ``q`` of a basis-state index is the
  state of qubit ``q``.  Ket labels are printed high-index-to-low-index, so
  the 3-qubit basis state with qubit 1 set prints as ``"010"``.
- ``axes`` strings are indexed by qubit: ``axes[q]`` is the single-qubit
  Pauli acting on qubit ``q``.
- sigma_z |0> = +|0>.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, StructuralError
from .tolerances import COEFF_REALITY_TOL

PAULI_CHARS = "IXYZ"

_P1 = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# single-qubit product table: (a, b) -> (phase, result)
_MUL = {}
for _a in PAULI_CHARS:
    for _b in PAULI_CHARS:
        m = _P1[_a] @ _P1[_b]
        for _c in PAULI_CHARS:
            for ph in (1, -1, 1j, -1j):
                if np.allclose(m, ph * _P1[_c]):
                    _MUL[_a, _b] = (ph, _c)
del _a, _b, _c, m, ph


@dataclass(frozen=True)
class PauliTerm:
    """A weighted Pauli string: ``coefficient * axes[n-1] x ... x axes[0]``."""

    coefficient: complex
    axes: str

    def __post_init__(self):
        if any(c not in PAULI_CHARS for c in self.axes):
            raise StructuralError(f"invalid Pauli axes {self.axes!r}")

    @property
    def n_qubits(self) -> int:
        return len(self.axes)

    @property
    def is_identity(self) -> bool:
        return set(self.axes) <= {"I"}

    def __mul__(self, other: "PauliTerm") -> "PauliTerm":
        if len(self.axes) != len(other.axes):
            raise StructuralError("Pauli product of mismatched register sizes")
        phase = 1 + 0j
        out = []
        for a, b in zip(self.axes, other.axes):
            ph, c = _MUL[a, b]
            phase *= ph
            out.append(c)
        return PauliTerm(self.coefficient * other.coefficient * phase, "".join(out))

    def adjoint(self) -> "PauliTerm":
        return PauliTerm(np.conj(self.coefficient), self.axes)

    def matrix(self) -> np.ndarray:
        """Dense matrix with qubit 0 as the least significant bit."""
        m = np.array([[1.0 + 0j]])
        for c in self.axes:  # kron builds high qubits on the left
            m = np.kron(_P1[c], m)
        return self.coefficient * m

    def masks(self) -> tuple[int, int, int]:
        """(flip_mask, phase_mask, n_y): apply P|i> = i^n_y * (-1)^popcount(i & phase_mask) |i ^ flip_mask>."""
        flip = phase = ny = 0
        for q, c in enumerate(self.axes):
            if c in "XY":
                flip |= 1 << q
            if c in "ZY":
                phase |= 1 << q
            if c == "Y":
                ny += 1
        return flip, phase, ny


class PauliSum:
    """A real- or complex-weighted sum of Pauli strings.

    Identity strings are merged into ``identity_offset``; terms with equal
    axes are merged on insert.  Immutable by convention: all arithmetic
    returns new instances.
    """

    def __init__(self, terms=(), identity_offset: complex = 0.0, n_qubits: int | None = None):
        self._terms: dict[str, complex] = {}
        self.identity_offset = complex(identity_offset)
        self._n_qubits = n_qubits
        for t in terms:
            self._insert(t)

    def _insert(self, term: PauliTerm):
        if self._n_qubits is None:
            self._n_qubits = term.n_qubits
        elif term.n_qubits != self._n_qubits:
            raise StructuralError("mixed register sizes in PauliSum")
        if term.is_identity:
            self.identity_offset += term.coefficient
            return
        c = self._terms.get(term.axes, 0j) + term.coefficient
        if c == 0:
            self._terms.pop(term.axes, None)
        else:
            self._terms[term.axes] = c

    @property
    def n_qubits(self) -> int:
        if self._n_qubits is None:
            raise StructuralError("empty PauliSum has no register size")
        return self._n_qubits

    @property
    def terms(self) -> list[PauliTerm]:
        return [PauliTerm(c, ax) for ax, c in sorted(self._terms.items())]

    @property
    def n_stored_terms(self) -> int:
        return len(self._terms)

    def is_hermitian(self, tol: float = COEFF_REALITY_TOL) -> bool:
        if abs(self.identity_offset.imag) > tol:
            return False
        return all(abs(c.imag) <= tol for c in self._terms.values())

    def __add__(self, other: "PauliSum") -> "PauliSum":
        out = PauliSum(self.terms, self.identity_offset, self._n_qubits)
        for t in other.terms:
            out._insert(t)
        out.identity_offset += other.identity_offset
        return out

    def __sub__(self, other: "PauliSum") -> "PauliSum":
        return self + (-1.0) * other

    def __rmul__(self, scalar) -> "PauliSum":
        return PauliSum(
            [PauliTerm(scalar * t.coefficient, t.axes) for t in self.terms],
            scalar * self.identity_offset,
            self._n_qubits,
        )

    def __matmul__(self, other: "PauliSum") -> "PauliSum":
        n = self.n_qubits
        ident = PauliTerm(1.0, "I" * n)
        mine = self.terms + [PauliTerm(self.identity_offset, "I" * n)]
        theirs = other.terms + [PauliTerm(other.identity_offset, "I" * n)]
        out = PauliSum(n_qubits=n)
        for a in mine:
            for b in theirs:
                out._insert(a * b)
        return out

    def adjoint(self) -> "PauliSum":
        return PauliSum(
            [t.adjoint() for t in self.terms], np.conj(self.identity_offset), self._n_qubits
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, PauliSum):
            return NotImplemented
        return (
            self._terms == other._terms
            and self.identity_offset == other.identity_offset
        )

    def __repr__(self) -> str:
        parts = [f"{c}*{ax[::-1]}" for ax, c in sorted(self._terms.items())]
        if self.identity_offset:
            parts.append(f"{self.identity_offset}*I")
        return "PauliSum(" + " + ".join(parts or ["0"]) + ")"

    def commutes_with(self, other: "PauliSum") -> bool:
        ab = self @ other
        ba = other @ self
        diff = ab - ba
        return diff.n_stored_terms == 0 and diff.identity_offset == 0


def single_pauli(axis: str, qubit: int, n_qubits: int, coefficient: complex = 1.0) -> PauliTerm:
    axes = ["I"] * n_qubits
    axes[qubit] = axis
    return PauliTerm(coefficient, "".join(axes))


def pauli_to_matrix(op: PauliSum, n_qubits: int) -> np.ndarray:
    """Dense matrix of a PauliSum, little-endian qubit ordering."""
    if op._n_qubits is not None and op.n_qubits != n_qubits:
        raise StructuralError(
            f"PauliSum is on {op.n_qubits} qubits, requested {n_qubits}"
        )
    dim = 2**n_qubits
    out = np.zeros((dim, dim), dtype=complex)
    for t in op.terms:
        out += t.matrix()
    out += op.identity_offset * np.eye(dim)
    return out


def apply_pauli_term(term: PauliTerm, vec: np.ndarray) -> np.ndarray:
    """Matrix-free application of a Pauli string to a statevector."""
    n = term.n_qubits
    if vec.shape[0] != 2**n:
        raise StructuralError("state dimension does not match Pauli register")
    flip, phase_mask, ny = term.masks()
    idx = np.arange(2**n)
    signs = 1 - 2 * (_popcount(idx & phase_mask) & 1)
    out = np.empty_like(vec)
    out[idx ^ flip] = (term.coefficient * (1j**ny)) * signs * vec
    return out


def apply_pauli_sum(op: PauliSum, vec: np.ndarray) -> np.ndarray:
    out = op.identity_offset * vec
    for t in op.terms:
        out = out + apply_pauli_term(t, vec)
    return out


def _popcount(a: np.ndarray) -> np.ndarray:
    if hasattr(np, "bitwise_count"):
        # bitwise_count returns uint8; cast so downstream arithmetic can go negative
        return np.bitwise_count(a).astype(np.int64)
    a = a.copy()
    out = np.zeros_like(a)
    while a.any():
        out += a & 1
        a >>= 1
    return out
