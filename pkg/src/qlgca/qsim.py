"""Dense statevector simulation of small gate circuits.

Qubit 0 is the least-significant bit of a basis-state index, so the cell
register ``|n_2 n_1 n_0>`` of a D1Q3 site is the integer ``4 n_2 + 2 n_1 + n_0``.

Multi-controlled gates are simulated directly; lowering them to an elementary
basis is done separately in :mod:`qlgca.decompose`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

NORM_TOL = 1e-12
UNITARY_TOL = 1e-12

_S2 = 1.0 / math.sqrt(2.0)

FIXED_MATRICES = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
    "H": np.array([[_S2, _S2], [_S2, -_S2]], dtype=complex),
    "S": np.diag([1, 1j]).astype(complex),
    "SDG": np.diag([1, -1j]).astype(complex),
    "T": np.diag([1, np.exp(1j * math.pi / 4)]),
    "TDG": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "SWAP": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}

PARAM_KINDS = ("RY", "RZ", "P")
KINDS = tuple(FIXED_MATRICES) + PARAM_KINDS + ("U",)


class CircuitError(ValueError):
    """Raised for malformed gates, circuits or mismatched states."""


def _param_matrix(kind: str, theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind == "RY":
        return np.array([[c, -s], [s, c]], dtype=complex)
    if kind == "RZ":
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    if kind == "P":
        return np.diag([1, np.exp(1j * theta)]).astype(complex)
    raise CircuitError(f"unknown parametrised gate {kind!r}")


@dataclass(frozen=True, eq=False)
class Gate:
    """A (possibly multi-controlled) unitary acting on ``targets``.

    ``controls`` holds ``(qubit, filled)`` pairs; an open control
    (``filled=False``) fires on ``|0>``. Target order matters for blocks on
    more than one qubit: ``targets[0]`` is the least-significant bit of the
    block's index.
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[tuple[int, bool], ...] = ()
    param: float | None = None
    matrix: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        object.__setattr__(
            self, "controls", tuple((int(q), bool(f)) for q, f in self.controls)
        )
        if self.kind not in KINDS:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        qubits = list(self.targets) + [q for q, _ in self.controls]
        if len(set(qubits)) != len(qubits):
            raise CircuitError(f"{self.kind}: control and target qubits overlap")
        if min(qubits, default=0) < 0:
            raise CircuitError(f"{self.kind}: negative qubit index")
        if self.kind in PARAM_KINDS and self.param is None:
            raise CircuitError(f"{self.kind} needs an angle")
        if self.kind == "U":
            if self.matrix is None:
                raise CircuitError("generic gate needs a matrix")
            m = np.asarray(self.matrix, dtype=complex)
            dim = 1 << len(self.targets)
            if m.shape != (dim, dim):
                raise CircuitError(f"matrix shape {m.shape} does not fit {dim}")
            err = np.abs(m.conj().T @ m - np.eye(dim)).max()
            if err > UNITARY_TOL:
                raise CircuitError(f"generic block is not unitary (error {err:.2e})")
            object.__setattr__(self, "matrix", m)
        elif self.kind == "SWAP" and len(self.targets) != 2:
            raise CircuitError("SWAP acts on two targets")
        elif self.kind != "SWAP" and len(self.targets) != 1:
            raise CircuitError(f"{self.kind} acts on one target")

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + tuple(q for q, _ in self.controls)

    def block(self) -> np.ndarray:
        """Unitary acting on the targets when all controls fire."""
        if self.kind == "U":
            return self.matrix
        if self.kind in PARAM_KINDS:
            return _param_matrix(self.kind, self.param)
        return FIXED_MATRICES[self.kind]

    def inverse(self) -> "Gate":
        if self.kind in ("S", "T"):
            return Gate(self.kind + "DG", self.targets, self.controls)
        if self.kind in ("SDG", "TDG"):
            return Gate(self.kind[:-2], self.targets, self.controls)
        if self.kind in PARAM_KINDS:
            return Gate(self.kind, self.targets, self.controls, param=-self.param)
        if self.kind == "U":
            return Gate("U", self.targets, self.controls, matrix=self.matrix.conj().T)
        return self

    def __repr__(self):
        ctl = "".join(f" {q}({int(f)})" for q, f in self.controls)
        par = "" if self.param is None else f"({self.param!r})"
        return f"Gate({self.kind}{par} {list(self.targets)}{' |' + ctl if ctl else ''})"


@dataclass(frozen=True)
class Measurement:
    qubits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if not self.qubits or len(set(self.qubits)) != len(self.qubits):
            raise CircuitError("measurement needs distinct qubits")


# shorthand constructors used throughout the circuit builders
def x(t, *controls):
    return Gate("X", (t,), tuple(_ctl(c) for c in controls))


def h(t, *controls):
    return Gate("H", (t,), tuple(_ctl(c) for c in controls))


def z(t, *controls):
    return Gate("Z", (t,), tuple(_ctl(c) for c in controls))


def swap(a, b, *controls):
    return Gate("SWAP", (a, b), tuple(_ctl(c) for c in controls))


def cnot(control, target):
    return Gate("X", (target,), ((control, True),))


def _ctl(c):
    # bare int -> filled control; (q, filled) tuples pass through
    if isinstance(c, tuple):
        return c
    return (c, True)


@dataclass
class Circuit:
    """Ordered gates and measurements on ``n_qubits`` qubits.

    ``registers`` names groups of qubits (e.g. ``cell``, ``ancilla``); the
    verification and QPE code reads them to find the register layout.
    """

    n_qubits: int
    elements: list = field(default_factory=list)
    registers: dict[str, tuple[int, ...]] = field(default_factory=dict)

    def __post_init__(self):
        if self.n_qubits < 1:
            raise CircuitError("a circuit needs at least one qubit")
        for el in self.elements:
            self._check(el)
        self.registers = {k: tuple(v) for k, v in self.registers.items()}
        for name, qs in self.registers.items():
            if any(q >= self.n_qubits or q < 0 for q in qs):
                raise CircuitError(f"register {name!r} out of range")

    def _check(self, el):
        qs = el.qubits
        if max(qs) >= self.n_qubits:
            raise CircuitError(
                f"{el!r} references qubit {max(qs)} on a {self.n_qubits}-qubit circuit"
            )

    def append(self, el) -> "Circuit":
        self._check(el)
        self.elements.append(el)
        return self

    def extend(self, els: Iterable) -> "Circuit":
        for el in els:
            self.append(el)
        return self

    def __add__(self, other: "Circuit") -> "Circuit":
        if other.n_qubits != self.n_qubits:
            raise CircuitError("cannot concatenate circuits of different widths")
        regs = dict(self.registers)
        regs.update(other.registers)
        return Circuit(self.n_qubits, self.elements + other.elements, regs)

    def __len__(self):
        return len(self.elements)

    @property
    def gates(self) -> list[Gate]:
        return [el for el in self.elements if isinstance(el, Gate)]

    @property
    def has_measurement(self) -> bool:
        return any(isinstance(el, Measurement) for el in self.elements)

    def inverse(self) -> "Circuit":
        if self.has_measurement:
            raise CircuitError("a circuit with measurements has no inverse")
        return Circuit(
            self.n_qubits, [g.inverse() for g in reversed(self.elements)], self.registers
        )


@dataclass(frozen=True, eq=False)
class Statevector:
    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (1 << self.n_qubits,):
            raise CircuitError(
                f"{self.n_qubits} qubits need {1 << self.n_qubits} amplitudes, "
                f"got shape {amps.shape}"
            )
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int = 0) -> "Statevector":
        if not 0 <= index < (1 << n_qubits):
            raise CircuitError(f"basis index {index} out of range")
        amps = np.zeros(1 << n_qubits, dtype=complex)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probabilities(self) -> np.ndarray:
        return np.abs(self.amplitudes) ** 2


def _apply_to_tensor(psi: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    """Apply ``gate`` to ``psi`` of shape ``(2,)*n + batch``; returns a new array."""
    out = psi.copy()
    axis = lambda q: n - 1 - q  # noqa: E731
    sel = [slice(None)] * psi.ndim
    for q, filled in gate.controls:
        sel[axis(q)] = 1 if filled else 0
    sel = tuple(sel)
    sub = psi[sel]
    # axes of the remaining array that correspond to the targets, after the
    # control axes were indexed away
    remaining = [a for a in range(psi.ndim) if not isinstance(sel[a], int)]
    t_axes = [remaining.index(axis(t)) for t in gate.targets]
    k = len(gate.targets)
    # block index bit j <-> targets[j]; tensor dims are ordered most significant first
    blk = gate.block().reshape((2,) * (2 * k))
    blk_in = list(range(2 * k - 1, k - 1, -1))  # input axes for targets[0..k-1]
    moved = np.tensordot(blk, sub, axes=(blk_in, t_axes))
    # tensordot puts output axes (targets[k-1]..targets[0]) first
    src = list(range(k))
    dst = [t_axes[k - 1 - i] for i in range(k)]
    out[sel] = np.moveaxis(moved, src, dst)
    return out


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    if max(gate.qubits) >= state.n_qubits:
        raise CircuitError(
            f"{gate!r} does not fit a {state.n_qubits}-qubit state"
        )
    n = state.n_qubits
    psi = state.amplitudes.reshape((2,) * n)
    return Statevector(n, _apply_to_tensor(psi, gate, n).reshape(-1))


@dataclass(frozen=True, eq=False)
class Branch:
    probability: float
    state: Statevector
    record: tuple[tuple[tuple[int, ...], str], ...] = ()


def _project(state: Statevector, qubits: Sequence[int], outcome: int):
    idx = np.arange(1 << state.n_qubits)
    mask = np.ones(idx.shape, dtype=bool)
    for j, q in enumerate(qubits):
        mask &= ((idx >> q) & 1) == ((outcome >> j) & 1)
    amps = np.where(mask, state.amplitudes, 0)
    p = float(np.sum(np.abs(amps) ** 2))
    return p, amps


def _outcome_label(outcome: int, width: int) -> str:
    # last listed qubit is the leftmost character
    return format(outcome, f"0{width}b")


def run_circuit(
    state: Statevector,
    circuit: Circuit,
    mode: str = "exact",
    seed: int | None = None,
    prune: float = 1e-14,
) -> list[Branch]:
    """Run ``circuit`` on ``state``.

    In ``exact`` mode every measurement splits each live branch into its
    outcomes (branches below ``prune`` probability are dropped). In
    ``sampled`` mode one outcome is drawn per measurement from a generator
    seeded with ``seed`` and a single branch is returned.
    """
    if state.n_qubits != circuit.n_qubits:
        raise CircuitError(
            f"state has {state.n_qubits} qubits, circuit has {circuit.n_qubits}"
        )
    if mode not in ("exact", "sampled"):
        raise CircuitError(f"unknown mode {mode!r}")
    rng = np.random.default_rng(seed) if mode == "sampled" else None
    branches = [Branch(1.0, state, ())]
    for el in circuit.elements:
        if isinstance(el, Gate):
            branches = [Branch(b.probability, apply_gate(b.state, el), b.record) for b in branches]
            continue
        new = []
        for b in branches:
            outcomes = []
            for o in range(1 << len(el.qubits)):
                p, amps = _project(b.state, el.qubits, o)
                if p > 0:
                    outcomes.append((o, p, amps))
            if rng is not None:
                probs = np.array([p for _, p, _ in outcomes])
                outcomes = [outcomes[rng.choice(len(outcomes), p=probs / probs.sum())]]
            for o, p, amps in outcomes:
                # sampled branches carry the probability of the drawn record
                total = b.probability * p
                if rng is None and total < prune:
                    continue
                amps = amps / np.linalg.norm(amps)
                rec = b.record + ((el.qubits, _outcome_label(o, len(el.qubits))),)
                new.append(Branch(total, Statevector(b.state.n_qubits, amps), rec))
        branches = new
    return branches


def unitary_of_circuit(circuit: Circuit) -> np.ndarray:
    """Matrix of a measurement-free circuit, gates applied left to right."""
    if circuit.has_measurement:
        raise CircuitError("circuit contains a measurement; it has no unitary")
    n = circuit.n_qubits
    dim = 1 << n
    u = np.eye(dim, dtype=complex).reshape((2,) * n + (dim,))
    for g in circuit.elements:
        u = _apply_to_tensor(u, g, n)
    return u.reshape(dim, dim)


def apply_circuit_to_columns(circuit: Circuit, columns: np.ndarray) -> np.ndarray:
    """Apply a measurement-free circuit to each column of ``columns``."""
    if circuit.has_measurement:
        raise CircuitError("circuit contains a measurement")
    n = circuit.n_qubits
    cols = np.asarray(columns, dtype=complex)
    batch = cols.shape[1]
    u = cols.reshape((2,) * n + (batch,))
    for g in circuit.elements:
        u = _apply_to_tensor(u, g, n)
    return u.reshape(1 << n, batch)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Born-rule distribution over a measured qubit subset.

    Keys are bitstrings with ``qubits[-1]`` as the leftmost character, so the
    bitstring read as binary is the outcome integer with bit ``j`` taken from
    ``qubits[j]``.
    """

    qubits: tuple[int, ...]
    probabilities: Mapping[str, float]

    def __post_init__(self):
        probs = dict(self.probabilities)
        if any(p < 0 for p in probs.values()):
            raise CircuitError("negative probability")
        total = sum(probs.values())
        if abs(total - 1.0) > NORM_TOL:
            raise CircuitError(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "probabilities", probs)
        object.__setattr__(self, "qubits", tuple(self.qubits))

    def as_array(self) -> np.ndarray:
        arr = np.zeros(1 << len(self.qubits))
        for k, p in self.probabilities.items():
            arr[int(k, 2)] = p
        return arr

    @classmethod
    def from_array(cls, qubits: Sequence[int], probs: np.ndarray) -> "OutcomeDistribution":
        width = len(qubits)
        return cls(
            tuple(qubits),
            {_outcome_label(i, width): float(p) for i, p in enumerate(probs) if p > 0},
        )

    def total_variation(self, other: "OutcomeDistribution") -> float:
        return 0.5 * float(np.abs(self.as_array() - other.as_array()).sum())

    def __getitem__(self, key: str) -> float:
        return self.probabilities.get(key, 0.0)


def marginal(probs: np.ndarray, n_qubits: int, qubits: Sequence[int]) -> np.ndarray:
    """Marginal of a full basis-state probability vector onto ``qubits``."""
    idx = np.arange(1 << n_qubits)
    out_idx = np.zeros_like(idx)
    for j, q in enumerate(qubits):
        out_idx |= ((idx >> q) & 1) << j
    return np.bincount(out_idx, weights=probs, minlength=1 << len(qubits))


def measure_distribution(state: Statevector, qubits: Sequence[int]) -> OutcomeDistribution:
    qubits = tuple(int(q) for q in qubits)
    if not qubits:
        raise CircuitError("empty qubit subset")
    if len(set(qubits)) != len(qubits) or min(qubits) < 0 or max(qubits) >= state.n_qubits:
        raise CircuitError(f"invalid qubit subset {qubits}")
    probs = marginal(state.probabilities(), state.n_qubits, qubits)
    probs = probs / probs.sum()
    return OutcomeDistribution.from_array(qubits, probs)


def sample_counts(distribution: OutcomeDistribution, shots: int, seed=None) -> dict[str, int]:
    """Multinomial draw of ``shots`` outcomes; reproducible under ``seed``."""
    if shots < 1:
        raise ValueError("shots must be at least 1")
    keys = sorted(distribution.probabilities)
    p = np.array([distribution.probabilities[k] for k in keys])
    counts = np.random.default_rng(seed).multinomial(shots, p / p.sum())
    return {k: int(c) for k, c in zip(keys, counts) if c}
