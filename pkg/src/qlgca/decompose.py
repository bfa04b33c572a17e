"""Lowering of multi-controlled circuits to single-qubit gates and CNOTs.

Rules, applied recursively:

* open controls are conjugated by X;
* a controlled SWAP becomes CNOT(b, a), MCX(controls + a -> b), CNOT(b, a);
  a bare SWAP becomes three CNOTs;
* an X with ``k >= 3`` controls uses a Toffoli V-chain on ``k - 2`` clean work
  qubits appended after the circuit's own qubits;
* a Toffoli becomes 6 CNOTs and 9 H/T/TDG gates;
* any other gate with ``k >= 2`` controls computes the AND of its controls
  into a work qubit and applies the singly-controlled gate from there;
* singly-controlled Z, Y, H, P, RZ and RY have fixed CNOT sandwiches.

Work qubits are always returned to |0>, so the lowered circuit acts as the
source circuit on every input whose work register is zero.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .qsim import Circuit, CircuitError, Gate, Measurement, apply_circuit_to_columns

EQUIV_TOL = 1e-9


@dataclass
class DecompositionReport:
    elementary_gate_count: int
    histogram: dict[str, int]
    basis: tuple[str, ...] = ("single-qubit", "CNOT")
    work_qubits: int = 0
    max_deviation: float = 0.0
    measurements: int = 0


def _g(kind, t, controls=(), param=None) -> Gate:
    return Gate(kind, (t,), tuple(controls), param)


def _cx(c, t) -> Gate:
    return Gate("X", (t,), ((c, True),))


def toffoli_gates(a: int, b: int, t: int) -> list[Gate]:
    """Standard 6-CNOT Toffoli with controls ``a``, ``b`` and target ``t``."""
    return [
        _g("H", t), _cx(b, t), _g("TDG", t), _cx(a, t), _g("T", t),
        _cx(b, t), _g("TDG", t), _cx(a, t), _g("T", b), _g("T", t),
        _g("H", t), _cx(a, b), _g("T", a), _g("TDG", b), _cx(a, b),
    ]


class _Lowerer:
    def __init__(self, n_qubits: int):
        self.n = n_qubits
        self.work_used = 0
        self.out: list = []

    def work(self, k: int) -> list[int]:
        self.work_used = max(self.work_used, k)
        return [self.n + i for i in range(k)]

    def emit(self, g: Gate):
        self.out.append(g)

    def lower(self, g: Gate, busy: int = 0):
        """Lower ``g``; work qubits below ``busy`` are held by an enclosing rule."""
        opened = [q for q, f in g.controls if not f]
        if opened:
            for q in opened:
                self.emit(_g("X", q))
            self.lower(Gate(g.kind, g.targets, tuple((q, True) for q, _ in g.controls),
                            g.param, g.matrix), busy)
            for q in opened:
                self.emit(_g("X", q))
            return
        ctl = [q for q, _ in g.controls]
        k = len(ctl)
        if g.kind == "SWAP":
            a, b = g.targets
            if k == 0:
                for c, t in ((a, b), (b, a), (a, b)):
                    self.emit(_cx(c, t))
                return
            self.emit(_cx(b, a))
            self.lower(Gate("X", (b,), tuple((q, True) for q in ctl + [a])), busy)
            self.emit(_cx(b, a))
            return
        if g.kind == "U":
            if k:
                raise CircuitError("controlled generic blocks are not lowered")
            if len(g.targets) != 1:
                raise CircuitError("multi-qubit generic blocks are not lowered")
            self.emit(g)
            return
        t = g.targets[0]
        if k == 0:
            self.emit(g)
        elif g.kind == "X":
            self._mcx(ctl, t, busy)
        elif k == 1:
            self._single_controlled(g, ctl[0], t)
        else:
            # AND of the controls into a work qubit, then a single control
            w = self.work(busy + 1)[busy]
            self._mcx(ctl, w, busy + 1)
            self._single_controlled(g, w, t)
            self._mcx(ctl, w, busy + 1)

    def _mcx(self, ctl: list[int], t: int, busy: int):
        k = len(ctl)
        if k == 1:
            self.emit(_cx(ctl[0], t))
            return
        if k == 2:
            self.out.extend(toffoli_gates(ctl[0], ctl[1], t))
            return
        w = self.work(busy + k - 2)[busy:]
        ladder = [(ctl[0], ctl[1], w[0])]
        for i in range(2, k - 1):
            ladder.append((ctl[i], w[i - 2], w[i - 1]))
        for a, b, c in ladder:
            self.out.extend(toffoli_gates(a, b, c))
        self.out.extend(toffoli_gates(ctl[-1], w[-1], t))
        for a, b, c in reversed(ladder):
            self.out.extend(toffoli_gates(a, b, c))

    def _single_controlled(self, g: Gate, c: int, t: int):
        kind = g.kind
        if kind == "Z":
            self.out.extend([_g("H", t), _cx(c, t), _g("H", t)])
        elif kind == "Y":
            self.out.extend([_g("SDG", t), _cx(c, t), _g("S", t)])
        elif kind == "H":
            # H = W X W^dagger with W = RY(pi/4) H
            q = math.pi / 4
            self.out.extend([_g("RY", t, param=-q), _g("H", t), _cx(c, t),
                             _g("H", t), _g("RY", t, param=q)])
        elif kind in ("P", "S", "SDG", "T", "TDG"):
            theta = {"S": math.pi / 2, "SDG": -math.pi / 2, "T": math.pi / 4,
                     "TDG": -math.pi / 4}.get(kind, g.param)
            self.out.extend([_g("P", c, param=theta / 2), _cx(c, t),
                             _g("P", t, param=-theta / 2), _cx(c, t),
                             _g("P", t, param=theta / 2)])
        elif kind in ("RZ", "RY"):
            half = g.param / 2
            self.out.extend([_g(kind, t, param=half), _cx(c, t),
                             _g(kind, t, param=-half), _cx(c, t)])
        else:
            raise CircuitError(f"no controlled lowering for {kind}")


def _segments(elements):
    seg = []
    for el in elements:
        if isinstance(el, Measurement):
            yield seg
            seg = []
        else:
            seg.append(el)
    yield seg


def equivalence_deviation(source: Circuit, lowered: Circuit) -> float:
    """Largest entry difference between each measurement-free segment of
    ``source`` and its lowering, on inputs with the work register at zero."""
    n, m = source.n_qubits, lowered.n_qubits
    dim = 1 << n
    cols = np.zeros((1 << m, dim), dtype=complex)
    cols[np.arange(dim), np.arange(dim)] = 1.0
    worst = 0.0
    for s_seg, l_seg in zip(_segments(source.elements), _segments(lowered.elements)):
        want = apply_circuit_to_columns(Circuit(n, s_seg), np.eye(dim, dtype=complex))
        got = apply_circuit_to_columns(Circuit(m, l_seg), cols)
        full = np.zeros_like(got)
        full[:dim] = want
        worst = max(worst, float(np.abs(got - full).max()))
    return worst


def decompose_to_basis(circuit: Circuit, check: bool = True,
                       tol: float = EQUIV_TOL) -> tuple[Circuit, DecompositionReport]:
    """Lower ``circuit`` to {single-qubit, CNOT}, verifying unitary equivalence."""
    low = _Lowerer(circuit.n_qubits)
    for el in circuit.elements:
        if isinstance(el, Measurement):
            low.out.append(el)
        else:
            low.lower(el)
    n_total = circuit.n_qubits + low.work_used
    regs = dict(circuit.registers)
    if low.work_used:
        regs["work"] = tuple(range(circuit.n_qubits, n_total))
    lowered = Circuit(n_total, low.out, regs)
    hist = Counter(
        ("CX" if g.controls else g.kind) for g in lowered.gates
    )
    dev = equivalence_deviation(circuit, lowered) if check else float("nan")
    if check and dev > tol:
        raise CircuitError(f"lowered circuit deviates from the source by {dev:.2e}")
    report = DecompositionReport(
        elementary_gate_count=sum(hist.values()),
        histogram=dict(sorted(hist.items())),
        work_qubits=low.work_used,
        max_deviation=dev,
        measurements=sum(isinstance(el, Measurement) for el in lowered.elements),
    )
    return lowered, report
