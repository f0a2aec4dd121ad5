"""Centralized numerical tolerance constants."""

HERMITICITY_TOL = 1e-10
NORM_TOL = 1e-10
PHASE_TOL = 1e-12

#: coefficients of a Hermitian-flagged Pauli sum must be real to within this
COEFF_REALITY_TOL = 1e-12

#: dense density matrices are limited to this many qubits
MAX_DENSITY_QUBITS = 12

#: dense statevectors are limited to this many qubits
MAX_STATE_QUBITS = 14
