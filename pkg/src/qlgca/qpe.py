"""Quantity retrieval by phase estimation on diagonal phase operators.

A classical per-cell quantity ``q(s)`` is encoded as the diagonal unitary
``U|s> = exp(i theta(s))|s>``. Two conventions are supported:

* ``paper``: ``theta = -q(s)``, generally a non-dyadic phase, so the
  ancilla spectrum is spread over several outcomes;
* ``dyadic``: ``theta = 2 pi q(s) / 2**n``, which puts integer quantities
  below ``2**n`` on a single outcome.

Layout: cell register on qubits ``0..v-1``, ancilla ``k`` on qubit ``v+k``
controlling ``U**(2**k)``; ancilla ``k`` is bit ``k`` of the outcome.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from . import classical
from .qsim import (
    Circuit,
    Gate,
    OutcomeDistribution,
    Statevector,
    h,
    marginal,
    run_circuit,
    swap,
)

CONVENTIONS = ("paper", "dyadic")
QUANTITIES = ("mass", "px", "py")
MODEL_V = {"d1q3": 3, "d1q2": 2, "fhp": 6}
ROW_TOL = 1e-12
DEFAULT_ANCILLAS = 3


def quantity_values(quantity, model: str, rest_weight: int = 2) -> np.ndarray:
    """Classical ``q(s)`` for every cell state ``s`` of ``model``.

    ``quantity`` is ``mass``, ``px``, ``py`` or an explicit array. D1Q3 mass
    uses the physical rest-particle weight 2 by default.
    """
    if model not in MODEL_V:
        raise ValueError(f"unknown model {model!r}")
    dim = 1 << MODEL_V[model]
    if not isinstance(quantity, str):
        q = np.asarray(quantity, dtype=float)
        if q.shape != (dim,):
            raise ValueError(f"custom quantity needs {dim} values")
        return q
    if quantity not in QUANTITIES:
        raise ValueError(f"unknown quantity {quantity!r}")
    recs = [classical.quantities(s, model, rest_weight) for s in range(dim)]
    if quantity == "mass":
        return np.array([r.mass for r in recs], dtype=float)
    axis = 0 if quantity == "px" else 1
    if axis >= len(recs[0].momentum):
        raise ValueError(f"{model} has no {quantity} component")
    return np.array([r.momentum[axis] for r in recs], dtype=float)


@dataclass(frozen=True, eq=False)
class PhaseOperator:
    v: int
    phases: np.ndarray  # radians per application
    convention: str = "paper"
    quantity: np.ndarray | None = None

    def __post_init__(self):
        ph = np.asarray(self.phases, dtype=float)
        if ph.shape != (1 << self.v,):
            raise ValueError(f"need {1 << self.v} phases")
        if self.convention not in CONVENTIONS:
            raise ValueError(f"convention must be one of {CONVENTIONS}")
        object.__setattr__(self, "phases", ph)

    @property
    def diagonal(self) -> np.ndarray:
        return np.exp(1j * self.phases)

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal)

    def power(self, k: int) -> np.ndarray:
        """Diagonal of ``U**k``, by exponentiating each phase directly."""
        return np.exp(1j * k * self.phases)

    def eigenphase_fraction(self) -> np.ndarray:
        """``phi(s)`` in ``[0, 1)`` with ``U|s> = exp(2 pi i phi)|s>``."""
        return np.mod(self.phases / (2 * math.pi), 1.0)


def phase_operator(quantity, model: str, convention: str = "paper",
                   n_ancillas: int = DEFAULT_ANCILLAS, rest_weight: int = 2) -> PhaseOperator:
    q = quantity_values(quantity, model, rest_weight)
    if convention == "paper":
        phases = -q
    elif convention == "dyadic":
        phases = 2 * math.pi * q / (1 << n_ancillas)
    else:
        raise ValueError(f"convention must be one of {CONVENTIONS}")
    return PhaseOperator(MODEL_V[model], phases, convention, q)


def qft_gates(qubits) -> list[Gate]:
    """QFT ``|j> -> 2**(-n/2) sum_y exp(2 pi i j y / 2**n)|y>``, qubits[k] = bit k."""
    qs = list(qubits)
    n = len(qs)
    gates = []
    for i in range(n - 1, -1, -1):
        gates.append(h(qs[i]))
        for j in range(i - 1, -1, -1):
            gates.append(Gate("P", (qs[i],), ((qs[j], True),), math.pi / (1 << (i - j))))
    for i in range(n // 2):
        gates.append(swap(qs[i], qs[n - 1 - i]))
    return gates


def inverse_qft_gates(qubits) -> list[Gate]:
    return [g.inverse() for g in reversed(qft_gates(qubits))]


def build_qpe_circuit(op: PhaseOperator, n_ancillas: int = DEFAULT_ANCILLAS) -> Circuit:
    if n_ancillas < 1:
        raise ValueError("need at least one ancilla")
    v = op.v
    anc = tuple(range(v, v + n_ancillas))
    c = Circuit(v + n_ancillas, registers={"cell": tuple(range(v)), "ancilla": anc})
    c.extend(h(a) for a in anc)
    for k, a in enumerate(anc):
        c.append(Gate("U", tuple(range(v)), ((a, True),), matrix=np.diag(op.power(1 << k))))
    c.extend(inverse_qft_gates(anc))
    return c


def qpe_kernel(phi: float, n_ancillas: int) -> np.ndarray:
    """Closed-form outcome probabilities for eigenphase fraction ``phi``."""
    n = 1 << n_ancillas
    y = np.arange(n)
    j = np.arange(n)
    amp = np.exp(2j * math.pi * np.outer(phi - y / n, j)).sum(axis=1) / n
    return np.abs(amp) ** 2


def _cell_state(s, v: int) -> np.ndarray:
    if isinstance(s, (int, np.integer)):
        if not 0 <= s < 1 << v:
            raise ValueError(f"cell state {s} out of range")
        vec = np.zeros(1 << v, dtype=complex)
        vec[s] = 1.0
        return vec
    vec = np.asarray(s, dtype=complex)
    if vec.shape != (1 << v,):
        raise ValueError("superposed input has the wrong length")
    return vec / np.linalg.norm(vec)


def qpe_distribution(op: PhaseOperator, s, n_ancillas: int = DEFAULT_ANCILLAS,
                     circuit: Circuit | None = None) -> OutcomeDistribution:
    """Exact ancilla distribution of the phase-estimation circuit on input ``s``."""
    c = build_qpe_circuit(op, n_ancillas) if circuit is None else circuit
    cell = _cell_state(s, op.v)
    amps = np.kron(np.eye(1 << n_ancillas)[0], cell).astype(complex)
    (br,) = run_circuit(Statevector(c.n_qubits, amps), c)
    anc = c.registers["ancilla"]
    probs = marginal(br.state.probabilities(), c.n_qubits, anc)
    probs = np.clip(probs, 0.0, None)
    return OutcomeDistribution.from_array(anc, probs / probs.sum())


@dataclass
class SpectrumReport:
    quantity_name: str
    model: str
    convention: str
    n_ancillas: int
    quantity: np.ndarray
    rows: dict[int, OutcomeDistribution] = field(default_factory=dict)

    def matrix(self) -> np.ndarray:
        return np.array([self.rows[s].as_array() for s in sorted(self.rows)])

    def aggregate(self, states=None) -> np.ndarray:
        """Mean outcome histogram over separate runs of ``states``."""
        states = sorted(self.rows) if states is None else list(states)
        return np.mean([self.rows[s].as_array() for s in states], axis=0)

    def write_csv(self, path) -> None:
        n = 1 << self.n_ancillas
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["state", "quantity"] + [format(y, f"0{self.n_ancillas}b") for y in range(n)])
            for s in sorted(self.rows):
                w.writerow([s, f"{self.quantity[s]:.12g}"]
                           + [f"{p:.12g}" for p in self.rows[s].as_array()])

    def write_histogram_csv(self, path, states=None) -> None:
        """One row per distinct quantity value plus the aggregate over ``states``."""
        n = 1 << self.n_ancillas
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["group"] + [format(y, f"0{self.n_ancillas}b") for y in range(n)])
            for q, members in _groups(self.quantity).items():
                members = [m for m in members if m in self.rows]
                if not members:
                    continue
                w.writerow([f"q={q:.12g}"] + [f"{p:.12g}" for p in self.aggregate(members)])
            w.writerow(["aggregate"] + [f"{p:.12g}" for p in self.aggregate(states)])


def spectrum_report(quantity, model: str, n_ancillas: int = DEFAULT_ANCILLAS,
                    convention: str = "paper", rest_weight: int = 2,
                    states=None) -> SpectrumReport:
    op = phase_operator(quantity, model, convention, n_ancillas, rest_weight)
    c = build_qpe_circuit(op, n_ancillas)
    states = range(1 << op.v) if states is None else states
    rows = {int(s): qpe_distribution(op, int(s), n_ancillas, c) for s in states}
    name = quantity if isinstance(quantity, str) else "custom"
    return SpectrumReport(name, model, convention, n_ancillas, op.quantity, rows)


def _groups(q: np.ndarray, decimals: int = 9) -> dict[float, list[int]]:
    out: dict[float, list[int]] = {}
    for s, val in enumerate(np.round(q, decimals)):
        out.setdefault(float(val) + 0.0, []).append(s)
    return out


@dataclass(frozen=True)
class EquivalenceResult:
    passed: bool
    max_equal_tv: float
    distinct_modes: int
    separated: bool | None


def equal_quantity_equivalence_check(report: SpectrumReport, quantity=None,
                                     tol: float = ROW_TOL) -> EquivalenceResult:
    """Rows must agree when quantities agree; in the dyadic convention the
    modal outcomes must also differ between distinct quantity values."""
    q = report.quantity if quantity is None else np.asarray(quantity, dtype=float)
    groups = {k: [s for s in m if s in report.rows] for k, m in _groups(q).items()}
    groups = {k: m for k, m in groups.items() if m}
    worst = 0.0
    for members in groups.values():
        ref = report.rows[members[0]]
        for s in members[1:]:
            worst = max(worst, ref.total_variation(report.rows[s]))
    modes = {k: int(np.argmax(report.rows[m[0]].as_array())) for k, m in groups.items()}
    distinct = len(set(modes.values()))
    separated = distinct == len(groups) if report.convention == "dyadic" else None
    passed = worst <= tol and separated is not False
    return EquivalenceResult(passed, worst, distinct, separated)
