import math
from pathlib import Path

import numpy as np
import pytest
from scipy.linalg import expm

from sbdyn.circuit import (
    Gate,
    ParamCircuit,
    _pauli_exp_gates,
    build_ansatz,
    build_trotter,
    run_statevector,
    trotter_params,
)
from sbdyn.errors import ContractViolationError, StructuralError
from sbdyn.model import SpinBosonSpec, build_hamiltonian, initial_state
from sbdyn.pauli import PauliTerm, pauli_to_matrix
from sbdyn.states import ExactPropagator

GOLDEN = Path(__file__).parent / "data" / "ansatz_m1_n1_d1.txt"


def test_gate_binding_rules():
    with pytest.raises(StructuralError):
        Gate("rz", (0,))  # no binding
    with pytest.raises(StructuralError):
        Gate("rz", (0,), angle=1.0, param=0)  # double binding
    with pytest.raises(StructuralError):
        Gate("h", (0,), angle=1.0)
    with pytest.raises(StructuralError):
        Gate("sycamore", (0,))


def test_cnot_convention():
    # control = qubits[0] = index bit 0
    psi = np.zeros(4, dtype=complex)
    psi[1] = 1.0  # qubit 0 set
    circ = ParamCircuit(2, [Gate("cnot", (0, 1))])
    out = run_statevector(circ)  # |00> stays
    assert out.amplitudes[0] == 1.0
    from sbdyn.circuit import apply_matrix

    out2 = apply_matrix(psi, Gate("cnot", (0, 1)).matrix(), (0, 1), 2)
    assert out2[3] == 1.0  # |01> -> |11>


def test_controlled_gates_match_dense():
    for kind, single in [("cy", [[0, -1j], [1j, 0]]), ("cz", [[1, 0], [0, -1]])]:
        g = Gate(kind, (0, 1))
        ref = np.zeros((4, 4), dtype=complex)
        ref[0, 0] = ref[2, 2] = 1.0  # control clear: identity
        s = np.array(single, dtype=complex)
        for a in range(2):
            for b in range(2):
                ref[1 + 2 * a, 1 + 2 * b] = s[a, b]
        np.testing.assert_allclose(g.matrix(), ref, atol=1e-12)


def test_rotation_convention():
    # Rz(a) = exp(-i a Z/2)
    g = Gate("rz", (0,), angle=0.8)
    ref = expm(-0.4j * np.diag([1.0, -1.0]))
    np.testing.assert_allclose(g.matrix(), ref, atol=1e-12)


def test_pauli_exp_gates_match_expm():
    theta, mult = 0.37, math.sqrt(2)
    gates = _pauli_exp_gates(["X", "Y", "Y"], [0, 1, 2], 0, mult)
    circ = ParamCircuit(3, gates, n_params=1)
    rng = np.random.default_rng(0)
    psi = rng.normal(size=8) + 1j * rng.normal(size=8)
    psi /= np.linalg.norm(psi)
    from sbdyn.circuit import apply_matrix

    out = psi
    for g in circ.gates:
        out = apply_matrix(out, g.matrix(np.array([theta])), g.qubits, 3)
    pm = PauliTerm(1.0, "XYY").matrix()
    ref = expm(-1j * (mult / 2.0) * theta * pm) @ psi
    np.testing.assert_allclose(out, ref, atol=1e-12)


def test_ansatz_layer_unitarity_and_zero_identity():
    spec = SpinBosonSpec(M=2, n_max=2, epsilon=-0.5, delta=0.3)
    circ = build_ansatz(spec, 2)
    rng = np.random.default_rng(1)
    out = run_statevector(circ, rng.normal(size=circ.n_params))
    assert abs(out.norm() - 1.0) < 1e-10
    # theta = 0 leaves only the preparation
    psi0 = run_statevector(circ, np.zeros(circ.n_params))
    ref = initial_state(spec, build_hamiltonian(spec).layout)
    np.testing.assert_allclose(psi0.amplitudes, ref.amplitudes, atol=1e-12)


def test_ansatz_parameter_count_and_occurrences():
    spec = SpinBosonSpec(M=2, n_max=3)
    circ = build_ansatz(spec, 2)
    assert circ.n_params == 2 * 2 * (2 * 3 + 1)
    counts = {p: len(pos) for p, pos in circ.occurrence_map.items()}
    # spin parameters once per layer, number 3x, coupling 2x
    assert sorted(counts.values()) == sorted([1] * 2 * 2 + [3] * 6 * 2 + [2] * 6 * 2)
    n_occ = sum(counts.values())
    assert n_occ == 2 * (5 * 2 * 3 + 2)  # d (5 M n_max + 2)


def test_trotter_matches_dense_product_formula():
    spec = SpinBosonSpec(M=1, n_max=2, epsilon=-1.0, delta=0.4, g=0.5)
    model = build_hamiltonian(spec)
    t, d = 0.9, 3
    circ = build_trotter(spec, t, d)
    psi = run_statevector(circ).amplitudes

    from sbdyn.model import map_boson_ops
    from sbdyn.pauli import PauliSum, single_pauli

    n = model.n_qubits
    lay = model.layout
    ops = map_boson_ops(0, spec.n_max, lay)
    sx = PauliSum([single_pauli("X", 0, n)])
    blocks = [
        pauli_to_matrix(spec.g * (sx @ (1j * ops.coupling_even)), n),
        pauli_to_matrix(spec.g * (sx @ (1j * ops.coupling_odd)), n),
        pauli_to_matrix(spec.omega * ops.number, n),
        pauli_to_matrix(PauliSum([single_pauli("Z", 0, n, spec.epsilon / 2)]), n),
        pauli_to_matrix(PauliSum([single_pauli("X", 0, n, spec.delta)]), n),
    ]
    layer = np.eye(2**n, dtype=complex)
    for b in blocks:
        layer = expm(-1j * b * t / d) @ layer
    ref = initial_state(spec, lay).amplitudes
    for _ in range(d):
        ref = layer @ ref
    assert abs(abs(np.vdot(ref, psi)) - 1.0) < 1e-10


def test_trotter_error_scales_as_inverse_depth():
    spec = SpinBosonSpec(M=1, n_max=1, epsilon=-1.0)
    model = build_hamiltonian(spec)
    h = pauli_to_matrix(model.hamiltonian, model.n_qubits)
    prop = ExactPropagator(h, initial_state(spec, model.layout))
    t = 10.0
    errs = []
    for d in (100, 200, 400):
        psi = run_statevector(build_trotter(spec, t, d)).amplitudes
        ov = abs(prop.overlap_with(psi, t))
        errs.append(math.sqrt(max(0.0, 2.0 - 2.0 * ov)))  # phase-aligned error norm
    for e1, e2 in zip(errs, errs[1:]):
        assert e1 / e2 == pytest.approx(2.0, rel=0.2)


def test_dump_golden_and_parse_roundtrip():
    circ = build_ansatz(SpinBosonSpec(M=1, n_max=1), 1)
    dump = circ.dump()
    assert dump == GOLDEN.read_text()
    back = ParamCircuit.parse(dump, circ.n_qubits)
    assert back.n_params == circ.n_params
    assert [g.kind for g in back.gates] == [g.kind for g in circ.gates]
    theta = np.array([0.2, -0.1, 0.4, 0.6])
    np.testing.assert_allclose(
        run_statevector(back, theta).amplitudes,
        run_statevector(circ, theta).amplitudes,
        atol=1e-12,
    )


def test_count_cx():
    circ = build_ansatz(SpinBosonSpec(M=1, n_max=1), 1)
    cost = circ.count_cx(assume_linear_topology=True)
    # number block: 2 CNOT; two 3-qubit exponentials: 4 CNOT each
    assert cost.n_cx == 10
    assert cost.n_cx_linear_topology == 10 * circ.n_qubits


def test_depth_validation():
    with pytest.raises(ContractViolationError):
        build_ansatz(SpinBosonSpec(M=1, n_max=1), 0)
    with pytest.raises(ContractViolationError):
        build_ansatz(SpinBosonSpec(M=1, n_max=1), 1, block_order=("spin", "number"))


def test_trotter_params_values():
    spec = SpinBosonSpec(M=1, n_max=2, epsilon=-1.0, delta=0.4, g=0.5)
    theta = trotter_params(spec, 10.0, 5)
    from sbdyn.circuit import AnsatzParams

    pidx = AnsatzParams(1, 2, 5)
    assert theta[pidx.theta_z(0)] == pytest.approx(-1.0)  # eps/2 * dt
    assert theta[pidx.theta_x(3)] == pytest.approx(0.8)
    assert theta[pidx.theta_num(2, 0, 1)] == pytest.approx(2.0)
    assert theta[pidx.theta_coup(4, 0, 0)] == pytest.approx(1.0)
