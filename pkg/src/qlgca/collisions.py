"""Collision unitaries and gate-level collision circuits for D1Q3 and FHP.

Register layouts (qubit 0 is the least-significant bit):

* D1Q3 discrimination circuit: cell ``n_0..n_2`` on qubits 0-2, ancillas
  ``z_0`` = 3 and ``z_1`` = 4.
* FHP B2/B3/B4 circuit: cell ``n_0..n_5`` on qubits 0-5, the verification
  flag ``b`` on qubit 6 and the coin ``a`` on qubit 7.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import numpy as np

from . import classical
from .pauli import observable_from_terms
from .qsim import (
    Circuit,
    Gate,
    Measurement,
    Statevector,
    cnot,
    h,
    marginal,
    run_circuit,
    swap,
    x,
    z,
)

VERIFY_TOL = 1e-10

D1Q3_CELL = (0, 1, 2)
D1Q3_Z0, D1Q3_Z1 = 3, 4
FHP_CELL = tuple(range(6))
FHP_B, FHP_A = 6, 7

# Pauli form of the D1Q3 collision, label -> coefficient
D1Q3_PAULI_TERMS = {
    "III": Fraction(3, 4), "IZZ": Fraction(1, 4), "XXX": Fraction(1, 4),
    "XYY": Fraction(1, 4), "YXY": Fraction(-1, 4), "YYX": Fraction(1, 4),
    "ZIZ": Fraction(-1, 4), "ZZI": Fraction(1, 4),
}

# swap networks applied in list order; each sends bit i to bit i + angle/60
ROTATION_SWAPS = {
    60: ((5, 0), (5, 1), (5, 2), (5, 3), (5, 4)),
    120: ((4, 0), (4, 2), (5, 1), (5, 3)),
    180: ((3, 0), (4, 1), (5, 2)),
}
ROTATION_ANGLES = (60, 120, 180, 240)

FHP_BLOCK = np.array([[-1, 2, 2], [2, -1, 2], [2, 2, -1]]) / 3.0
FHP_SELECTIONS = ("B2", "B3", "B4")


@dataclass(frozen=True)
class CollisionSpec:
    """A collision rule as data.

    Deterministic pairs swap their two states; each stochastic orbit sends
    a member to each of the other two with probability 1/2.
    """

    v: int
    fixed_states: frozenset = field(default_factory=frozenset)
    deterministic_pairs: tuple[tuple[int, int], ...] = ()
    stochastic_orbits: tuple[tuple[int, int, int], ...] = ()

    def __post_init__(self):
        seen = list(self.fixed_states)
        seen += [s for p in self.deterministic_pairs for s in p]
        seen += [s for o in self.stochastic_orbits for s in o]
        if sorted(seen) != list(range(1 << self.v)):
            raise ValueError("fixed states, pairs and orbits must partition the cell states")

    def transition_matrix(self) -> np.ndarray:
        """Row = input state, column = output state, value = probability."""
        dim = 1 << self.v
        t = np.zeros((dim, dim))
        for s in self.fixed_states:
            t[s, s] = 1.0
        for a, b in self.deterministic_pairs:
            t[a, b] = t[b, a] = 1.0
        for orbit in self.stochastic_orbits:
            for s in orbit:
                for o in orbit:
                    if o != s:
                        t[s, o] = 0.5
        return t


def _spec(v, pairs=(), orbits=()) -> CollisionSpec:
    moved = {s for p in pairs for s in p} | {s for o in orbits for s in o}
    fixed = frozenset(set(range(1 << v)) - moved)
    return CollisionSpec(v, fixed, tuple(pairs), tuple(orbits))


def identity_spec(v: int) -> CollisionSpec:
    return _spec(v)


def d1q3_spec() -> CollisionSpec:
    return _spec(3, pairs=[(2, 5)])


def _check_selection(selection: Iterable[str]) -> tuple[str, ...]:
    sel = tuple(sorted(set(selection)))
    if not sel:
        raise ValueError("collision selection must be non-empty")
    bad = [s for s in sel if s not in FHP_SELECTIONS]
    if bad:
        raise ValueError(f"unknown FHP collisions {bad}; choose from {FHP_SELECTIONS}")
    return sel


def fhp_spec(selection: Iterable[str] = FHP_SELECTIONS) -> CollisionSpec:
    sel = _check_selection(selection)
    pairs = [classical.B3_ORBIT] if "B3" in sel else []
    orbits = [o for name, o in (("B2", classical.B2_ORBIT), ("B4", classical.B4_ORBIT))
              if name in sel]
    return _spec(6, pairs, orbits)


def d1q3_collision_matrix() -> np.ndarray:
    """Permutation matrix exchanging basis states 2 and 5."""
    c = np.eye(8)
    c[:, [2, 5]] = c[:, [5, 2]]
    return c


def d1q3_pauli_collision() -> np.ndarray:
    """The D1Q3 collision evaluated from its Pauli form."""
    c = observable_from_terms({k: float(v) for k, v in D1Q3_PAULI_TERMS.items()})
    if np.abs(c.imag).max() > 1e-12:
        raise ArithmeticError("Pauli form of the collision is not real")
    c = c.real
    err = np.abs(c - d1q3_collision_matrix()).max()
    if err > 1e-12:
        raise ArithmeticError(f"Pauli form disagrees with the collision matrix ({err:.2e})")
    return c


def fhp_unitary_collision(selection: Iterable[str] = FHP_SELECTIONS,
                          block: np.ndarray | None = None) -> np.ndarray:
    """Unitary FHP zero-momentum collision on 64 states.

    B3 is the 21 <-> 42 transposition; B2 and B4 act by ``block`` (the
    symmetric stochastic block by default) on the ordered orbits
    ``(9, 18, 36)`` and ``(27, 45, 54)``. Factors have disjoint support and
    are multiplied as ``C_B3 @ C_B24``.
    """
    sel = _check_selection(selection)
    blk = FHP_BLOCK if block is None else np.asarray(block, dtype=float)
    c3 = np.eye(64)
    if "B3" in sel:
        a, b = classical.B3_ORBIT
        c3[:, [a, b]] = c3[:, [b, a]]
    c24 = np.eye(64)
    for name, orbit in (("B2", classical.B2_ORBIT), ("B4", classical.B4_ORBIT)):
        if name in sel:
            idx = np.array(orbit)
            c24[np.ix_(idx, idx)] = blk
    return c3 @ c24


def fhp_observables() -> dict[str, np.ndarray]:
    """Mass and momentum observables of an FHP cell as 64x64 diagonals."""
    s = np.arange(64)
    px2, py2 = classical.fhp_momentum_units(s)
    return {
        "M": np.diag(classical.popcount(s).astype(float)),
        "Px": np.diag(px2 / 2.0),
        "Py": np.diag(py2 * classical.SQRT3_2),
    }


def d1q3_observables() -> dict[str, np.ndarray]:
    """D1Q3 mass ``IIZ + 2 IZI + ZII`` and momentum ``IIZ - ZII``.

    Both are affine images of the classical quantities (``Z = 1 - 2n``).
    """
    return {
        "m": observable_from_terms({"IIZ": 1, "IZI": 2, "ZII": 1}),
        "p": observable_from_terms({"IIZ": 1, "ZII": -1}),
    }


def build_d1q3_qpe_collision_circuit() -> Circuit:
    """Discrimination circuit: ZIZ and ZZI are read into z0 and z1, and the
    cell is flipped when (ZIZ, ZZI) = (+1, -1), which picks out 010 and 101."""
    n2, n1, n0 = 2, 1, 0
    z0, z1 = D1Q3_Z0, D1Q3_Z1
    c = Circuit(5, registers={"cell": D1Q3_CELL, "ancilla": (z0, z1)})
    c.extend([h(z1), h(z0)])
    c.extend([z(n2, z0), z(n0, z0)])
    c.extend([z(n1, z1), z(n2, z1)])
    c.extend([h(z1), h(z0)])
    for q in (n2, n1, n0):
        c.append(x(q, (z1, True), (z0, False)))
    return c


def _rotation_pairs(angle: int) -> tuple[tuple[int, int], ...]:
    if angle not in ROTATION_ANGLES:
        raise ValueError(f"rotation angle must be one of {ROTATION_ANGLES}, got {angle}")
    if angle == 240:
        return ROTATION_SWAPS[120] * 2
    return ROTATION_SWAPS[angle]


def rotation_gates(angle: int, controls=(), offset: int = 0) -> list[Gate]:
    return [swap(a + offset, b + offset, *controls) for a, b in _rotation_pairs(angle)]


def build_rotation_circuit(angle: int) -> Circuit:
    """SWAP network permuting bit ``i`` to bit ``(i + angle/60) mod 6``."""
    return Circuit(6, rotation_gates(angle), {"cell": FHP_CELL})


def rotation_permutation(angle: int) -> np.ndarray:
    """Index oracle: ``perm[s]`` is the image of basis state ``s``."""
    return np.array([classical.rotate_cell(s, angle // 60) for s in range(64)])


def build_fhp_b234_circuit() -> Circuit:
    """Zero-momentum FHP collisions with a verification flag and a coin.

    The flag ``b`` is left set after the collision (it is not uncomputed).
    """
    b, a = FHP_B, FHP_A
    c = Circuit(8, registers={"cell": FHP_CELL, "ancilla": (b, a)})
    # B3: n_{i+1} ^= n_i leaves ones on n_1..n_5 only for 21 and 42
    chain = [cnot(i, i + 1) for i in (4, 3, 2, 1, 0)]
    c.extend(chain)
    c.append(x(b, 5, 4, 3, 2, 1))
    c.extend(reversed(chain))
    c.extend(rotation_gates(180, controls=(b,)))
    # B2/B4: n_{i+3} ^= n_i is zero on all three pairs for the symmetric class
    pairs = [cnot(i, i + 3) for i in (0, 1, 2)]
    c.extend(pairs)
    c.append(x(b, (5, False), (4, False), (3, False)))
    c.extend(reversed(pairs))
    c.extend(rotation_gates(120, controls=(b,)))
    c.append(h(a, b))
    c.extend(rotation_gates(120, controls=(a,)))
    c.append(Measurement((a,)))
    return c


@dataclass
class VerificationReport:
    matrix: np.ndarray
    expected: np.ndarray
    row_deviation: np.ndarray
    tol: float = VERIFY_TOL

    @property
    def passed(self) -> bool:
        return bool(np.all(self.row_deviation <= self.tol))

    @property
    def failing_rows(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.row_deviation > self.tol)]

    @property
    def max_deviation(self) -> float:
        return float(self.row_deviation.max())


def cell_transition_matrix(circuit: Circuit, cell: tuple[int, ...] | None = None) -> np.ndarray:
    """Exact cell-to-cell transition probabilities, ancillas starting in |0>."""
    cell = tuple(circuit.registers.get("cell", ())) if cell is None else tuple(cell)
    if not cell:
        raise ValueError("circuit declares no cell register")
    n = circuit.n_qubits
    dim = 1 << len(cell)
    out = np.zeros((dim, dim))
    for s in range(dim):
        idx = sum(((s >> j) & 1) << q for j, q in enumerate(cell))
        for br in run_circuit(Statevector.basis(n, idx), circuit):
            out[s] += br.probability * marginal(br.state.probabilities(), n, cell)
    return out


def verify_collision_circuit(circuit: Circuit, spec: CollisionSpec,
                             tol: float = VERIFY_TOL) -> VerificationReport:
    """Compare the exact cell marginal of ``circuit`` with ``spec`` row by row."""
    cell = tuple(circuit.registers.get("cell", range(spec.v)))
    if len(cell) != spec.v:
        raise ValueError(f"cell register has {len(cell)} qubits, spec needs {spec.v}")
    got = cell_transition_matrix(circuit, cell)
    want = spec.transition_matrix()
    tv = 0.5 * np.abs(got - want).sum(axis=1)
    return VerificationReport(got, want, tv, tol)


def write_matrix_csv(matrix: np.ndarray, path) -> None:
    dim = matrix.shape[1]
    with open(path, "w") as fh:
        fh.write("input," + ",".join(str(j) for j in range(dim)) + "\n")
        for i, row in enumerate(matrix):
            fh.write(f"{i}," + ",".join(f"{p:.12g}" for p in row) + "\n")
