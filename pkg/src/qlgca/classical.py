"""Bit-exact classical lattice-gas automata: D1Q3, FHP (zero-momentum
collisions, no rest particle) and collisionless D1Q2.

Cells are integers whose bit ``i`` is the occupation ``n_i``.

* D1Q3: ``n_0`` moves right (+1), ``n_1`` rests, ``n_2`` moves left (-1).
* D1Q2: ``n_0`` moves right, ``n_1`` moves left.
* FHP: ``n_i`` moves along ``c_i = (cos(pi i/3), sin(pi i/3))``.

The triangular FHP grid is stored as ``cells[row, col]`` with odd rows
shifted half a site to the right, so site ``(r, c)`` sits at
``(c + (r % 2)/2, r * sqrt(3)/2)``. Periodic wrap needs an even row count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Union

import numpy as np

SQRT3_2 = math.sqrt(3.0) / 2.0

D1Q3_RIGHT, D1Q3_REST, D1Q3_LEFT = 0, 1, 2

# 2 * c_i, exact integers: x in half units, y in units of sqrt(3)/2
FHP_PX2 = np.array([2, 1, -1, -2, -1, 1])
FHP_PY2 = np.array([0, 1, 1, 0, -1, -1])

# (row step, col step on even rows, col step on odd rows) for each c_i
FHP_NEIGHBOURS = (
    (0, 1, 1),
    (1, 0, 1),
    (1, -1, 0),
    (0, -1, -1),
    (-1, -1, 0),
    (-1, 0, 1),
)

B3_ORBIT = (21, 42)
B2_ORBIT = (9, 18, 36)
B4_ORBIT = (27, 45, 54)
ZERO_ASYMMETRY_CLASS = (0, 9, 18, 27, 36, 45, 54, 63)


def rotate_cell(cell: int, steps: int, v: int = 6) -> int:
    """Move every bit ``i`` to ``(i + steps) mod v`` (a rotation by 60*steps degrees)."""
    steps %= v
    mask = (1 << v) - 1
    return ((cell << steps) | (cell >> (v - steps))) & mask


def asymmetric_pairs(cell: int) -> int:
    """Number of opposite direction pairs ``(i, i+3)`` with different occupation."""
    return sum(((cell >> i) & 1) != ((cell >> (i + 3)) & 1) for i in range(3))


def d1q3_collide(cell: int) -> int:
    if not 0 <= cell < 8:
        raise ValueError(f"D1Q3 cell must be < 8, got {cell}")
    return {2: 5, 5: 2}.get(cell, cell)


def is_fhp_collisional(cell: int) -> bool:
    return cell in B3_ORBIT or cell in B2_ORBIT or cell in B4_ORBIT


BitSource = Union[np.random.Generator, Iterator[int]]


def _draw_bit(source: BitSource) -> int:
    if isinstance(source, np.random.Generator):
        return int(source.integers(0, 2))
    return int(next(source)) & 1


def fhp_collide(cell: int, source: BitSource) -> int:
    """Zero-momentum FHP collision of one cell.

    Collisional cells consume exactly one bit from ``source``. B3 cells rotate
    by 180 degrees regardless of it; B2/B4 cells rotate by 120 degrees on bit
    0 and by 240 degrees on bit 1.
    """
    if not 0 <= cell < 64:
        raise ValueError(f"FHP cell must be < 64, got {cell}")
    if not is_fhp_collisional(cell):
        return cell
    bit = _draw_bit(source)
    if cell in B3_ORBIT:
        return rotate_cell(cell, 3)
    return rotate_cell(cell, 2 + 2 * bit)


def _fhp_tables() -> tuple[np.ndarray, np.ndarray]:
    t0 = np.arange(64)
    t1 = np.arange(64)
    for s in range(64):
        if is_fhp_collisional(s):
            t0[s] = fhp_collide(s, iter([0]))
            t1[s] = fhp_collide(s, iter([1]))
    return t0, t1


FHP_TABLE_0, FHP_TABLE_1 = _fhp_tables()
FHP_COLLISIONAL = np.array([is_fhp_collisional(s) for s in range(64)])


@dataclass(frozen=True, eq=False)
class Lattice1D:
    cells: np.ndarray
    v: int

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64)
        if cells.ndim != 1 or cells.size < 1:
            raise ValueError("a 1D lattice needs at least one site")
        if cells.min() < 0 or cells.max() >= 1 << self.v:
            raise ValueError(f"cells must lie in [0, {1 << self.v})")
        object.__setattr__(self, "cells", cells)

    @property
    def N(self) -> int:
        return self.cells.size

    def __eq__(self, other):
        return (isinstance(other, Lattice1D) and self.v == other.v
                and np.array_equal(self.cells, other.cells))


@dataclass(frozen=True, eq=False)
class LatticeTri:
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.int64)
        if cells.ndim != 2 or cells.size < 1:
            raise ValueError("a triangular lattice is a non-empty 2D array")
        if cells.shape[0] % 2:
            raise ValueError("periodic triangular lattices need an even row count")
        if cells.min() < 0 or cells.max() >= 64:
            raise ValueError("FHP cells must lie in [0, 64)")
        object.__setattr__(self, "cells", cells)

    def __eq__(self, other):
        return isinstance(other, LatticeTri) and np.array_equal(self.cells, other.cells)


def d1q3_collide_lattice(lattice: Lattice1D) -> Lattice1D:
    cells = lattice.cells.copy()
    two, five = cells == 2, cells == 5
    cells[two], cells[five] = 5, 2
    return Lattice1D(cells, 3)


def _stream_1d(cells: np.ndarray, velocities: dict[int, int]) -> np.ndarray:
    out = np.zeros_like(cells)
    for bit, vel in velocities.items():
        out |= np.roll((cells >> bit) & 1, vel) << bit
    return out


def d1q3_stream(lattice: Lattice1D) -> Lattice1D:
    return Lattice1D(_stream_1d(lattice.cells, {0: 1, 1: 0, 2: -1}), 3)


def d1q3_step(lattice: Lattice1D) -> Lattice1D:
    if lattice.v != 3:
        raise ValueError("D1Q3 needs v = 3")
    return d1q3_stream(d1q3_collide_lattice(lattice))


def d1q2_stream(lattice: Lattice1D) -> Lattice1D:
    if lattice.v != 2:
        raise ValueError("D1Q2 needs v = 2")
    return Lattice1D(_stream_1d(lattice.cells, {0: 1, 1: -1}), 2)


def fhp_collide_lattice(lattice: LatticeTri, rng: np.random.Generator) -> LatticeTri:
    """Collide every cell; one random bit per collisional cell, row-major order."""
    cells = lattice.cells
    mask = FHP_COLLISIONAL[cells]
    bits = np.zeros_like(cells)
    bits[mask] = rng.integers(0, 2, size=int(mask.sum()))
    return LatticeTri(np.where(bits == 1, FHP_TABLE_1[cells], FHP_TABLE_0[cells]))


def fhp_stream(lattice: LatticeTri) -> LatticeTri:
    cells = lattice.cells
    rows, cols = cells.shape
    r = np.arange(rows)[:, None]
    c = np.arange(cols)[None, :]
    odd = (r % 2).astype(bool)
    out = np.zeros_like(cells)
    for i, (dr, dc_even, dc_odd) in enumerate(FHP_NEIGHBOURS):
        tr = np.broadcast_to((r + dr) % rows, cells.shape)
        tc = (c + np.where(odd, dc_odd, dc_even)) % cols
        out[tr, tc] |= ((cells >> i) & 1) << i
    return LatticeTri(out)


def fhp_step(lattice: LatticeTri, rng: np.random.Generator) -> LatticeTri:
    return fhp_stream(fhp_collide_lattice(lattice, rng))


@dataclass(frozen=True)
class QuantityRecord:
    mass: float
    momentum: tuple[float, ...]


def quantities(cell: int, model: str, rest_weight: int = 1) -> QuantityRecord:
    """Mass and momentum of one cell.

    D1Q3 mass counts occupied bits, the rest particle weighted by
    ``rest_weight`` (2 gives the physical mass). D1Q3 momentum is
    ``n_0 - n_2``. FHP momentum is ``sum_i c_i n_i``.
    """
    bits = [(cell >> i) & 1 for i in range(6)]
    if model == "d1q3":
        if not 0 <= cell < 8:
            raise ValueError("D1Q3 cell must be < 8")
        mass = bits[0] + rest_weight * bits[1] + bits[2]
        return QuantityRecord(mass, (bits[0] - bits[2],))
    if model == "d1q2":
        if not 0 <= cell < 4:
            raise ValueError("D1Q2 cell must be < 4")
        return QuantityRecord(bits[0] + bits[1], (bits[0] - bits[1],))
    if model == "fhp":
        if not 0 <= cell < 64:
            raise ValueError("FHP cell must be < 64")
        px2, py2 = fhp_momentum_units(cell)
        return QuantityRecord(sum(bits), (px2 / 2, py2 * SQRT3_2))
    raise ValueError(f"unknown model {model!r}")


def fhp_momentum_units(cells) -> tuple:
    """Exact FHP momentum as integers ``(2 p_x, 2 p_y / sqrt(3))``."""
    cells = np.asarray(cells)
    px2 = sum(FHP_PX2[i] * ((cells >> i) & 1) for i in range(6))
    py2 = sum(FHP_PY2[i] * ((cells >> i) & 1) for i in range(6))
    if cells.ndim == 0:
        return int(px2), int(py2)
    return px2, py2


def popcount(cells) -> np.ndarray:
    cells = np.asarray(cells)
    out = np.zeros_like(cells)
    for i in range(8):
        out += (cells >> i) & 1
    return out


def lattice_totals(lattice, model: str, rest_weight: int = 2) -> dict[str, int]:
    """Exact lattice-wide conserved totals.

    D1Q3 mass weights the rest particle by ``rest_weight``; only the weight 2
    is conserved by the 010 <-> 101 collision. FHP momentum is reported in
    the integer units of :func:`fhp_momentum_units`.
    """
    cells = lattice.cells
    if model == "fhp":
        px2, py2 = fhp_momentum_units(cells)
        return {"mass": int(popcount(cells).sum()), "px2": int(np.sum(px2)),
                "py2": int(np.sum(py2))}
    if model == "d1q3":
        b = [(cells >> i) & 1 for i in range(3)]
        return {"mass": int((b[0] + rest_weight * b[1] + b[2]).sum()),
                "momentum": int((b[0] - b[2]).sum())}
    if model == "d1q2":
        b = [(cells >> i) & 1 for i in range(2)]
        return {"mass": int((b[0] + b[1]).sum()), "momentum": int((b[0] - b[1]).sum())}
    raise ValueError(f"unknown model {model!r}")


def site_mass(lattice, rest_weight: int = 1) -> np.ndarray:
    cells = lattice.cells
    if isinstance(lattice, Lattice1D) and lattice.v == 3 and rest_weight != 1:
        return popcount(cells) + (rest_weight - 1) * ((cells >> 1) & 1)
    return popcount(cells)


def density_profile(lattice: Lattice1D, window: int = 0, rest_weight: int = 1) -> np.ndarray:
    """Per-site mass averaged over ``[x - window, x + window]`` with periodic wrap."""
    if window < 0:
        raise ValueError("window must be non-negative")
    m = site_mass(lattice, rest_weight).astype(float)
    acc = np.zeros_like(m)
    for s in range(-window, window + 1):
        acc += np.roll(m, s)
    return acc / (2 * window + 1)
