"""Parameterized circuit representation, ansatz/Trotter builders, statevector execution.

Rotation convention: Rz(a) = exp(-i a Z / 2), likewise Rx, Ry.  The ansatz
realizes exp(-i theta P) as a rotation with angle 2*theta (times the term
weight), so every parameterized gate carries a (parameter id, multiplier)
binding with angle = multiplier * theta.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ContractViolationError, StructuralError
from .model import Layout, SpinBosonSpec
from .states import StateVector

FIXED_KINDS = {"x", "h", "ydag", "ydag_inv", "cnot", "cy", "cz"}
ROTATION_KINDS = {"rx", "ry", "rz"}

_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


def _rx(a: float) -> np.ndarray:
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -1j * s], [-1j * s, c]])


def _ry(a: float) -> np.ndarray:
    c, s = math.cos(a / 2), math.sin(a / 2)
    return np.array([[c, -s], [s, c]], dtype=complex)


def _rz(a: float) -> np.ndarray:
    return np.array([[np.exp(-1j * a / 2), 0], [0, np.exp(1j * a / 2)]])


_FIXED_MATRICES = {
    "x": _X,
    "h": _H,
    "ydag": _rx(math.pi / 2),
    "ydag_inv": _rx(-math.pi / 2),
}

_ROTATIONS = {"rx": _rx, "ry": _ry, "rz": _rz}

#: generator Pauli axis of each rotation kind (R = exp(-i angle G / 2))
ROTATION_GENERATOR = {"rx": "X", "ry": "Y", "rz": "Z"}


@dataclass(frozen=True)
class Gate:
    """One circuit element.  Rotations carry exactly one binding: either a
    fixed ``angle`` or a ``(param, mult)`` pair (angle = mult * theta)."""

    kind: str
    qubits: tuple[int, ...]
    angle: float | None = None
    param: int | None = None
    mult: float = 1.0

    def __post_init__(self):
        if self.kind in FIXED_KINDS:
            if self.angle is not None or self.param is not None:
                raise StructuralError(f"{self.kind} gate carries no binding")
        elif self.kind in ROTATION_KINDS:
            if (self.angle is None) == (self.param is None):
                raise StructuralError("rotation gates carry exactly one binding")
        else:
            raise StructuralError(f"unknown gate kind {self.kind!r}")

    def bound_angle(self, params: np.ndarray) -> float:
        if self.kind in FIXED_KINDS:
            raise StructuralError(f"{self.kind} gate has no angle")
        if self.angle is not None:
            return self.angle
        return self.mult * float(params[self.param])

    def matrix(self, params: np.ndarray | None = None) -> np.ndarray:
        if self.kind in ("cnot", "cy", "cz"):
            # control = qubits[0] = index bit 0, target = qubits[1]
            if self.kind == "cnot":
                return np.array(
                    [[1, 0, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0], [0, 1, 0, 0]], dtype=complex
                )
            if self.kind == "cy":
                return np.array(
                    [[1, 0, 0, 0], [0, 0, 0, -1j], [0, 0, 1, 0], [0, 1j, 0, 0]],
                    dtype=complex,
                )
            return np.diag([1, 1, 1, -1]).astype(complex)
        if self.kind in _FIXED_MATRICES:
            return _FIXED_MATRICES[self.kind]
        return _ROTATIONS[self.kind](self.bound_angle(params))


@dataclass(frozen=True)
class CircuitCost:
    n_cx: int
    n_cx_linear_topology: int


class ParamCircuit:
    """Ordered gate list over ``n_qubits`` with a logical-parameter binding map."""

    def __init__(self, n_qubits: int, gates: list[Gate], n_params: int = 0):
        self.n_qubits = n_qubits
        self.gates = list(gates)
        self.n_params = n_params
        occ: dict[int, list[int]] = {p: [] for p in range(n_params)}
        for pos, g in enumerate(self.gates):
            if g.param is not None:
                if not (0 <= g.param < n_params):
                    raise StructuralError(f"gate references parameter {g.param} out of range")
                occ[g.param].append(pos)
        for p, positions in occ.items():
            if not positions:
                raise StructuralError(f"parameter {p} is never referenced")
        self.occurrence_map = occ

    def count_cx(self, assume_linear_topology: bool = False) -> CircuitCost:
        n_cx = sum(1 for g in self.gates if g.kind == "cnot")
        return CircuitCost(n_cx, n_cx * self.n_qubits if assume_linear_topology else n_cx)

    def dump(self) -> str:
        """Line-oriented text format: ``GATE q0[,q1] [param_id|angle] [multiplier]``."""
        lines = []
        for g in self.gates:
            parts = [g.kind.upper(), ",".join(str(q) for q in g.qubits)]
            if g.param is not None:
                parts += [f"p{g.param}", repr(g.mult)]
            elif g.angle is not None:
                parts.append(repr(g.angle))
            lines.append(" ".join(parts))
        return "\n".join(lines) + "\n"

    @classmethod
    def parse(cls, text: str, n_qubits: int) -> "ParamCircuit":
        gates = []
        max_param = -1
        for line in text.splitlines():
            if not line.strip():
                continue
            parts = line.split()
            kind = parts[0].lower()
            qubits = tuple(int(q) for q in parts[1].split(","))
            angle = param = None
            mult = 1.0
            if len(parts) == 4:
                param = int(parts[2][1:])
                mult = float(parts[3])
                max_param = max(max_param, param)
            elif len(parts) == 3:
                angle = float(parts[2])
            gates.append(Gate(kind, qubits, angle=angle, param=param, mult=mult))
        return cls(n_qubits, gates, n_params=max_param + 1)


def apply_matrix(state: np.ndarray, mat: np.ndarray, qubits: tuple[int, ...], n: int) -> np.ndarray:
    """Apply a 2^k x 2^k matrix to the given qubits of a statevector.

    ``mat`` is little-endian in ``qubits``: its index bit 0 corresponds to
    qubits[0].
    """
    k = len(qubits)
    psi = state.reshape([2] * n)
    # numpy axis q of the reshaped tensor corresponds to qubit n-1-q
    axes = [n - 1 - q for q in qubits]
    psi = np.moveaxis(psi, axes, range(k))
    # moveaxis puts qubits[0] on the slowest axis of the front block; the
    # front block flattened has qubits[0] as the *high* bit, so reorder mat.
    m = mat.reshape([2] * (2 * k))
    # reorder mat indices from little-endian to tensor (slow-to-fast) order
    perm = list(range(k - 1, -1, -1))
    m = m.transpose(perm + [k + p for p in perm]).reshape(2**k, 2**k)
    psi = (m @ psi.reshape(2**k, -1)).reshape([2] * n)
    psi = np.moveaxis(psi, range(k), axes)
    return psi.reshape(-1)


def run_statevector(circuit: ParamCircuit, params: np.ndarray | None = None) -> StateVector:
    """Deterministic statevector execution starting from |0...0>."""
    if params is None:
        params = np.zeros(circuit.n_params)
    params = np.asarray(params, dtype=float)
    if params.shape[0] != circuit.n_params:
        raise StructuralError(
            f"expected {circuit.n_params} parameters, got {params.shape[0]}"
        )
    psi = np.zeros(2**circuit.n_qubits, dtype=complex)
    psi[0] = 1.0
    for g in circuit.gates:
        psi = apply_matrix(psi, g.matrix(params), g.qubits, circuit.n_qubits)
    return StateVector(psi, validate=False)


# ---------------------------------------------------------------------------
# ansatz / Trotter builders
# ---------------------------------------------------------------------------


class AnsatzParams:
    """Deterministic parameter indexing for the Hamiltonian-ansatz layers.

    Per layer, in order: theta_z (spin sigma_z), theta_x (spin sigma_x), then
    per mode k and level pair n: theta_num[k, n], then theta_coup[k, n].
    """

    def __init__(self, M: int, n_max: int, depth: int):
        self.M, self.n_max, self.depth = M, n_max, depth
        self.per_layer = 2 * (M * n_max + 1)

    @property
    def n_params(self) -> int:
        return self.depth * self.per_layer

    def theta_z(self, layer: int) -> int:
        return layer * self.per_layer

    def theta_x(self, layer: int) -> int:
        return layer * self.per_layer + 1

    def theta_num(self, layer: int, k: int, lvl: int) -> int:
        return layer * self.per_layer + 2 + k * self.n_max + lvl

    def theta_coup(self, layer: int, k: int, lvl: int) -> int:
        return layer * self.per_layer + 2 + self.M * self.n_max + k * self.n_max + lvl


def _pauli_exp_gates(
    axes: list[str], qubits: list[int], param: int, mult: float
) -> list[Gate]:
    """exp(-i (mult/2) theta P) via basis change -> CNOT ladder -> Rz -> uncompute.

    ``mult`` is the Rz angle multiplier, so the realized exponent weight is
    mult/2 per unit theta.
    """
    pre, post = [], []
    for ax, q in zip(axes, qubits):
        if ax == "X":
            pre.append(Gate("h", (q,)))
            post.append(Gate("h", (q,)))
        elif ax == "Y":
            pre.append(Gate("ydag", (q,)))
            post.append(Gate("ydag_inv", (q,)))
    ladder = [Gate("cnot", (qubits[i], qubits[i + 1])) for i in range(len(qubits) - 1)]
    rz = Gate("rz", (qubits[-1],), param=param, mult=mult)
    return pre + ladder + [rz] + list(reversed(ladder)) + list(reversed(post))


#: default intra-layer block order.  The entangling coupling block comes
#: first: at depth 1 any order that ends in a diagonal-on-the-initial-state
#: block would reduce that block to a global phase and freeze its parameter.
DEFAULT_BLOCK_ORDER = ("coupling", "number", "spin")


def build_ansatz(
    spec: SpinBosonSpec,
    depth: int,
    layout: Layout | None = None,
    block_order: tuple[str, ...] = DEFAULT_BLOCK_ORDER,
) -> ParamCircuit:
    """Variational Hamiltonian ansatz: prep X gates + ``depth`` layers.

    Each layer applies, per ``block_order``: the spin rotations
    exp(-i theta_z Z) exp(-i theta_x X); the per-mode number blocks
    exp(-i theta w (Z_a - Z_b - Z_a Z_b)) with w = (n+1)/4; and the per-mode
    coupling blocks exp(-i theta sqrt(n+1)/2 (XXX + XYY)) over even level
    pairs then odd ones.
    """
    if depth < 1:
        raise ContractViolationError("depth must be >= 1")
    if set(block_order) != {"spin", "number", "coupling"}:
        raise ContractViolationError(f"invalid block order {block_order!r}")
    if layout is None:
        layout = Layout(spec.M, spec.n_max)
    pidx = AnsatzParams(spec.M, spec.n_max, depth)
    gates: list[Gate] = []
    for k in range(spec.M):
        gates.append(Gate("x", (layout.mode_qubit(k, 0),)))
    spin = layout.spin_qubit
    for layer in range(depth):
        for block in block_order:
            if block == "spin":
                gates.append(Gate("rz", (spin,), param=pidx.theta_z(layer), mult=2.0))
                gates.append(Gate("rx", (spin,), param=pidx.theta_x(layer), mult=2.0))
            elif block == "number":
                for k in range(spec.M):
                    for lvl in range(spec.n_max):
                        a, b = layout.mode_qubit(k, lvl), layout.mode_qubit(k, lvl + 1)
                        p = pidx.theta_num(layer, k, lvl)
                        w2 = (lvl + 1) / 2.0  # Rz multiplier for weight (n+1)/4
                        gates.append(Gate("rz", (a,), param=p, mult=w2))
                        gates.append(Gate("rz", (b,), param=p, mult=-w2))
                        gates.append(Gate("cnot", (a, b)))
                        gates.append(Gate("rz", (b,), param=p, mult=-w2))
                        gates.append(Gate("cnot", (a, b)))
            else:
                for k in range(spec.M):
                    for parity in (0, 1):
                        for lvl in range(parity, spec.n_max, 2):
                            a, b = layout.mode_qubit(k, lvl), layout.mode_qubit(k, lvl + 1)
                            p = pidx.theta_coup(layer, k, lvl)
                            mult = math.sqrt(lvl + 1)  # Rz multiplier -> weight sqrt(n+1)/2
                            gates += _pauli_exp_gates(["X", "X", "X"], [spin, a, b], p, mult)
                            gates += _pauli_exp_gates(["X", "Y", "Y"], [spin, a, b], p, mult)
    return ParamCircuit(layout.n_qubits, gates, n_params=pidx.n_params)


def trotter_params(spec: SpinBosonSpec, total_time: float, depth: int) -> np.ndarray:
    """Parameter vector that turns the ansatz into a first-order Trotter circuit."""
    pidx = AnsatzParams(spec.M, spec.n_max, depth)
    theta = np.zeros(pidx.n_params)
    dt = total_time / depth
    for layer in range(depth):
        theta[pidx.theta_z(layer)] = spec.epsilon / 2.0 * dt
        theta[pidx.theta_x(layer)] = spec.delta * dt
        for k in range(spec.M):
            for lvl in range(spec.n_max):
                theta[pidx.theta_num(layer, k, lvl)] = spec.omega * dt
                theta[pidx.theta_coup(layer, k, lvl)] = spec.g * dt
    return theta


def build_trotter(
    spec: SpinBosonSpec,
    total_time: float,
    depth: int,
    layout: Layout | None = None,
    block_order: tuple[str, ...] = DEFAULT_BLOCK_ORDER,
) -> ParamCircuit:
    """First-order Trotter circuit: the ansatz skeleton with fixed angles."""
    if total_time < 0:
        raise ContractViolationError("total_time must be >= 0")
    ansatz = build_ansatz(spec, depth, layout, block_order)
    theta = trotter_params(spec, total_time, depth)
    gates = []
    for g in ansatz.gates:
        if g.param is not None:
            gates.append(Gate(g.kind, g.qubits, angle=g.mult * float(theta[g.param])))
        else:
            gates.append(g)
    return ParamCircuit(ansatz.n_qubits, gates, n_params=0)
