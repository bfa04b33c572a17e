"""Quantum lattice-gas cellular automata: collision circuits, invariant
counting, phase-estimation readout and sublinear streaming, each checked
against classical reference simulators."""

from .classical import Lattice1D, LatticeTri, QuantityRecord
from .collisions import CollisionSpec, build_fhp_b234_circuit, fhp_unitary_collision
from .pauli import PauliString, count_invariants, decompose_hermitian, evolution_matrix
from .qsim import Circuit, Gate, Measurement, OutcomeDistribution, Statevector, run_circuit

__version__ = "0.1.0"

__all__ = [
    "Circuit", "CollisionSpec", "Gate", "Lattice1D", "LatticeTri", "Measurement",
    "OutcomeDistribution", "PauliString", "QuantityRecord", "Statevector",
    "build_fhp_b234_circuit", "count_invariants", "decompose_hermitian",
    "evolution_matrix", "fhp_unitary_collision", "run_circuit",
]
