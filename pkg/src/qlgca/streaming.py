"""Sublinear-space D1Q2 streaming as a quantum walk.

``N = 2**n_space`` sites are held in ``n_space`` qubits. Layout: occupation
``n`` on qubit 0, velocity ``v`` on qubit 1 (``|0>`` = right, ``|1>`` =
left), position ``x`` on qubits ``2..n_space+1``. The prepared state is

    (1/sqrt(2N)) sum_x sum_v |x>|v>|n_v(x)>

so ``P(x, v, n=1) = n_v(x) / (2N)`` and the mass at ``x`` is recovered as
``2N * P(x, n=1)``.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import classical
from .qsim import (
    Circuit,
    Gate,
    OutcomeDistribution,
    Statevector,
    apply_circuit_to_columns,
    h,
    marginal,
    sample_counts,
    x,
)

OCC, VEL = 0, 1
MAX_SPACE = 10


def space_qubits(n_space: int) -> tuple[int, ...]:
    return tuple(range(2, 2 + n_space))


def _check_space(n_space: int):
    if not 1 <= n_space <= MAX_SPACE:
        raise ValueError(f"n_space must lie in [1, {MAX_SPACE}]")


def controlled_shift(direction: str, n_space: int) -> Circuit:
    """Modular increment (right, open velocity control) or decrement (left,
    filled velocity control) of the position register as an MCX ladder."""
    _check_space(n_space)
    if direction not in ("right", "left"):
        raise ValueError("direction must be 'right' or 'left'")
    xs = space_qubits(n_space)
    vel = (VEL, direction == "left")
    # a carry (or borrow) reaches bit k when all lower bits are 1 (or 0)
    low_filled = direction == "right"
    c = Circuit(n_space + 2, registers=_registers(n_space))
    for k in range(n_space - 1, -1, -1):
        ctl = [(xs[j], low_filled) for j in range(k)] + [vel]
        c.append(x(xs[k], *ctl))
    return c


def _registers(n_space: int) -> dict[str, tuple[int, ...]]:
    return {"occupation": (OCC,), "velocity": (VEL,), "space": space_qubits(n_space)}


def streaming_step(n_space: int) -> Circuit:
    return controlled_shift("right", n_space) + controlled_shift("left", n_space)


def streaming_operator(n_space: int) -> np.ndarray:
    """Explicit ``S = sum_v Delta_v (x) |v><v| (x) I_n`` in the circuit's index order."""
    n_pos = 1 << n_space
    shift = {0: np.roll(np.eye(n_pos), 1, axis=0), 1: np.roll(np.eye(n_pos), -1, axis=0)}
    proj = {0: np.diag([1.0, 0.0]), 1: np.diag([0.0, 1.0])}
    # index = x * 4 + v * 2 + n, so kron order is x, v, n
    return sum(np.kron(np.kron(shift[v], proj[v]), np.eye(2)) for v in (0, 1))


def as_field(initial, n_space: int) -> np.ndarray:
    """``(N, 2)`` int array of ``(n_right, n_left)`` from a lattice or array."""
    if isinstance(initial, classical.Lattice1D):
        cells = initial.cells
        f = np.stack([cells & 1, (cells >> 1) & 1], axis=1)
    else:
        f = np.asarray(initial, dtype=np.int64)
    if f.shape != (1 << n_space, 2):
        raise ValueError(f"field must have shape ({1 << n_space}, 2), got {f.shape}")
    if not np.isin(f, (0, 1)).all():
        raise ValueError("occupations must be 0 or 1")
    return f


def field_to_lattice(f: np.ndarray) -> classical.Lattice1D:
    return classical.Lattice1D(f[:, 0] + 2 * f[:, 1], 2)


def initialization_circuit(initial, n_space: int) -> Circuit:
    """Uniform superposition over (x, v), then one MCX per occupied (x, v)."""
    f = as_field(initial, n_space)
    xs = space_qubits(n_space)
    c = Circuit(n_space + 2, registers=_registers(n_space))
    c.append(h(VEL))
    c.extend(h(q) for q in xs)
    for pos in range(1 << n_space):
        for vel in (0, 1):
            if f[pos, vel]:
                ctl = [(q, bool((pos >> j) & 1)) for j, q in enumerate(xs)]
                c.append(Gate("X", (OCC,), tuple(ctl) + ((VEL, bool(vel)),)))
    return c


def build_d1q2_sublinear_circuit(initial, n_space: int, steps: int) -> Circuit:
    if steps < 0:
        raise ValueError("steps must be non-negative")
    c = initialization_circuit(initial, n_space)
    step = streaming_step(n_space)
    for _ in range(steps):
        c = c + step
    return c


def density_from_probabilities(probs: np.ndarray, n_space: int) -> np.ndarray:
    """Exact mass per site, ``2N * P(x, n=1)``."""
    n_pos = 1 << n_space
    p = np.asarray(probs).reshape(n_pos, 2, 2)
    return 2 * n_pos * p[:, :, 1].sum(axis=1)


def estimate_density(counts, N: int, shots: int) -> np.ndarray:
    """Mass estimate ``2N * #(x, n=1) / shots`` from full-register outcomes.

    ``counts`` maps outcome indices (or bitstrings over qubits 0.. with the
    highest qubit leftmost) to counts.
    """
    if shots < 1:
        raise ValueError("shots must be at least 1")
    hits = np.zeros(N)
    for key, cnt in counts.items():
        idx = int(key, 2) if isinstance(key, str) else int(key)
        if idx & 1:
            hits[idx >> 2] += cnt
    return 2 * N * hits / shots


def sigma_bound(exact_mass: np.ndarray, N: int, shots: int) -> np.ndarray:
    """Per-site multinomial standard deviation of :func:`estimate_density`."""
    p = np.asarray(exact_mass, dtype=float) / (2 * N)
    return 2 * N * np.sqrt(p * (1 - p) / shots)


@dataclass
class DensityRun:
    n_space: int
    exact: np.ndarray  # (steps + 1, N)
    classical: np.ndarray  # (steps + 1, N)
    sampled: np.ndarray | None = None
    shots: int | None = None

    @property
    def max_exact_deviation(self) -> float:
        return float(np.abs(self.exact - self.classical).max())

    def sigma(self) -> np.ndarray:
        return sigma_bound(self.classical, 1 << self.n_space, self.shots)

    def write_csv(self, path) -> None:
        n_pos = 1 << self.n_space
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            head = ["step", "x", "classical", "exact"]
            if self.sampled is not None:
                head += ["sampled", "sigma"]
                sig = self.sigma()
            w.writerow(head)
            for t in range(self.exact.shape[0]):
                for pos in range(n_pos):
                    row = [t, pos, int(self.classical[t, pos]), f"{self.exact[t, pos]:.12g}"]
                    if self.sampled is not None:
                        row += [f"{self.sampled[t, pos]:.12g}", f"{sig[t, pos]:.12g}"]
                    w.writerow(row)


def run_density(initial, n_space: int, steps: int, shots: int | None = None,
                seed: int | None = None) -> DensityRun:
    """Density after each of ``0..steps`` streaming steps, exact and sampled.

    Every step is simulated from the circuit state; sampled profiles draw
    ``shots`` outcomes per step from one seeded generator.
    """
    f = as_field(initial, n_space)
    n = n_space + 2
    n_pos = 1 << n_space
    init = initialization_circuit(f, n_space)
    step = streaming_step(n_space)
    psi = apply_circuit_to_columns(init, Statevector.basis(n).amplitudes[:, None])
    lat = field_to_lattice(f)
    exact, ref, sampled = [], [], []
    rng = np.random.default_rng(seed)
    qubits = tuple(range(n))
    for t in range(steps + 1):
        if t:
            psi = apply_circuit_to_columns(step, psi)
            lat = classical.d1q2_stream(lat)
        probs = np.abs(psi[:, 0]) ** 2
        exact.append(density_from_probabilities(probs, n_space))
        ref.append(classical.site_mass(lat))
        if shots:
            dist = OutcomeDistribution.from_array(qubits, probs / probs.sum())
            counts = sample_counts(dist, shots, seed=rng.integers(2**63))
            sampled.append(estimate_density(counts, n_pos, shots))
    return DensityRun(
        n_space, np.array(exact), np.array(ref, dtype=float),
        np.array(sampled) if shots else None, shots,
    )


def post_streaming_residual(initial, n_space: int) -> float:
    """Largest amplitude mismatch with ``|psi(x, t+1)> = sum_v I_v |psi(x - v, t)>``."""
    f = as_field(initial, n_space)
    n = n_space + 2
    n_pos = 1 << n_space
    init = initialization_circuit(f, n_space)
    before = apply_circuit_to_columns(init, Statevector.basis(n).amplitudes[:, None])[:, 0]
    after = apply_circuit_to_columns(streaming_step(n_space), before[:, None])[:, 0]
    b = before.reshape(n_pos, 2, 2)
    a = after.reshape(n_pos, 2, 2)
    # velocity 0 moves +1, velocity 1 moves -1
    want = np.stack([np.roll(b[:, 0, :], 1, axis=0), np.roll(b[:, 1, :], -1, axis=0)], axis=1)
    return float(np.abs(a - want).max())


def marginal_occupation(probs: np.ndarray, n_space: int) -> float:
    return float(marginal(probs, n_space + 2, (OCC,))[1])
