"""Line-oriented text formats for circuits and lattices.

Circuit format::

    qubits 8
    register cell 0 1 2 3 4 5
    X 5 | 4(1)
    SWAP 3 0 | 6(1)
    RY(0.785398) 2
    MEASURE 7

One gate per line: kind (with an optional angle), target qubits, then after
``|`` the controls as ``qubit(polarity)`` with 1 = filled and 0 = open.
Lines starting with ``#`` are comments.

Lattice format: a header ``model N [M]`` (N columns, M rows for FHP), then
one row per line of space-separated cell integers.
"""

from __future__ import annotations

import re

import numpy as np

from .classical import Lattice1D, LatticeTri
from .qsim import PARAM_KINDS, Circuit, CircuitError, Gate, Measurement

MODEL_V = {"d1q3": 3, "d1q2": 2, "fhp": 6}

_KIND = re.compile(r"^([A-Z]+)(?:\(([^)]*)\))?$")
_CTRL = re.compile(r"^(\d+)\(([01])\)$")


class FormatError(ValueError):
    """Malformed text input; the message names the line and column."""

    def __init__(self, line: int, col: int, msg: str):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


def _tokens(text: str):
    """Yield (column, token) pairs, columns 1-based."""
    for m in re.finditer(r"\S+", text):
        yield m.start() + 1, m.group()


def format_circuit(circuit: Circuit) -> str:
    lines = [f"qubits {circuit.n_qubits}"]
    for name, qs in circuit.registers.items():
        lines.append(f"register {name} " + " ".join(map(str, qs)))
    for el in circuit.elements:
        if isinstance(el, Measurement):
            lines.append("MEASURE " + " ".join(map(str, el.qubits)))
            continue
        if el.kind == "U":
            raise CircuitError("generic blocks have no text form")
        head = el.kind if el.param is None else f"{el.kind}({el.param!r})"
        line = head + " " + " ".join(map(str, el.targets))
        if el.controls:
            line += " | " + " ".join(f"{q}({int(f)})" for q, f in el.controls)
        lines.append(line)
    return "\n".join(lines) + "\n"


def _int(tok: str, ln: int, col: int, what: str) -> int:
    try:
        val = int(tok)
    except ValueError:
        raise FormatError(ln, col, f"expected {what}, got {tok!r}") from None
    if val < 0:
        raise FormatError(ln, col, f"{what} must be non-negative")
    return val


def parse_circuit(text: str) -> Circuit:
    n = None
    registers: dict[str, tuple[int, ...]] = {}
    elements = []
    for ln, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        toks = list(_tokens(line))
        if not toks:
            continue
        col, head = toks[0]
        if n is None:
            if head != "qubits" or len(toks) != 2:
                raise FormatError(ln, col, "first line must be 'qubits N'")
            n = _int(toks[1][1], ln, toks[1][0], "qubit count")
            continue
        if head == "register":
            if len(toks) < 3:
                raise FormatError(ln, col, "register needs a name and qubits")
            registers[toks[1][1]] = tuple(_int(t, ln, c, "qubit") for c, t in toks[2:])
            continue
        if head == "MEASURE":
            qs = tuple(_int(t, ln, c, "qubit") for c, t in toks[1:])
            elements.append((ln, col, Measurement(qs)))
            continue
        m = _KIND.match(head)
        if not m:
            raise FormatError(ln, col, f"bad gate token {head!r}")
        kind, par = m.group(1), m.group(2)
        param = None
        if par is not None:
            try:
                param = float(par)
            except ValueError:
                raise FormatError(ln, col, f"bad angle {par!r}") from None
        elif kind in PARAM_KINDS:
            raise FormatError(ln, col, f"{kind} needs an angle")
        targets, controls = [], []
        seen_bar = False
        for c, t in toks[1:]:
            if t == "|":
                seen_bar = True
            elif seen_bar:
                cm = _CTRL.match(t)
                if not cm:
                    raise FormatError(ln, c, f"bad control {t!r}; use q(1) or q(0)")
                controls.append((int(cm.group(1)), cm.group(2) == "1"))
            else:
                targets.append(_int(t, ln, c, "target qubit"))
        try:
            elements.append((ln, col, Gate(kind, tuple(targets), tuple(controls), param)))
        except CircuitError as e:
            raise FormatError(ln, col, str(e)) from None
    if n is None:
        raise FormatError(1, 1, "empty circuit file")
    circ = Circuit(n, registers=registers)
    for ln, col, el in elements:
        try:
            circ.append(el)
        except CircuitError as e:
            raise FormatError(ln, col, str(e)) from None
    return circ


def format_lattice(lattice, model: str) -> str:
    cells = np.atleast_2d(lattice.cells)
    rows, cols = cells.shape
    head = f"{model} {cols}" + (f" {rows}" if model == "fhp" else "")
    body = "\n".join(" ".join(str(int(c)) for c in row) for row in cells)
    return head + "\n" + body + "\n"


def parse_lattice(text: str):
    """Parse a lattice file; returns ``(model, lattice)``."""
    lines = [(ln, raw.split("#", 1)[0]) for ln, raw in enumerate(text.splitlines(), 1)]
    lines = [(ln, s) for ln, s in lines if s.strip()]
    if not lines:
        raise FormatError(1, 1, "empty lattice file")
    ln, head = lines[0]
    toks = list(_tokens(head))
    model = toks[0][1].lower()
    if model not in MODEL_V:
        raise FormatError(ln, toks[0][0], f"unknown model {toks[0][1]!r}")
    if len(toks) not in (2, 3):
        raise FormatError(ln, 1, "header must be 'model N [M]'")
    n_cols = _int(toks[1][1], ln, toks[1][0], "column count")
    n_rows = _int(toks[2][1], ln, toks[2][0], "row count") if len(toks) == 3 else 1
    if model != "fhp" and n_rows != 1:
        raise FormatError(ln, toks[2][0], f"{model} lattices have one row")
    limit = 1 << MODEL_V[model]
    rows = []
    for ln, s in lines[1:]:
        row = []
        for c, t in _tokens(s):
            val = _int(t, ln, c, "cell value")
            if val >= limit:
                raise FormatError(ln, c, f"cell value {val} exceeds {limit - 1}")
            row.append(val)
        if len(row) != n_cols:
            raise FormatError(ln, 1, f"expected {n_cols} cells, found {len(row)}")
        rows.append(row)
    if len(rows) != n_rows:
        last = lines[-1][0]
        raise FormatError(last, 1, f"expected {n_rows} rows, found {len(rows)}")
    if model == "fhp":
        if n_rows % 2:
            raise FormatError(lines[0][0], toks[2][0], "FHP row count must be even")
        return model, LatticeTri(np.array(rows))
    return model, Lattice1D(np.array(rows[0]), MODEL_V[model])
