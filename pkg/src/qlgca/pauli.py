"""Pauli-basis algebra for cell observables and invariant counting.

Pauli strings are enumerated lexicographically in the letters ``I, X, Y, Z``
with qubit ``v-1`` as the most significant position, which is also the
leftmost character of a written label (``IIZ`` is Z on qubit 0). Index ``i``
of the basis has base-4 digit ``(i >> 2q) & 3`` on qubit ``q``.

A string is handled in symplectic form: an X-mask, a Z-mask and the phase
``i**popcount(x & z)`` that turns ``X^x Z^z`` into the Hermitian product with
Y letters. Its action on a basis state is ``|k> -> phase * (-1)**|z & k| |k ^ x>``,
so decompositions never need a dense product of 2**v matrices.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple

import numpy as np

from .exact_rank import exact_rank, rank_float

LETTERS = "IXYZ"
HERMITIAN_TOL = 1e-10
UNITARY_TOL = 1e-10
COMMUTE_TOL = 1e-10
_MAX_DENOMINATOR = 720


class PauliError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class PauliString:
    """Word over ``I, X, Y, Z``; ``letters[q]`` is the factor on qubit ``q``."""

    letters: str

    def __post_init__(self):
        if not self.letters or set(self.letters) - set(LETTERS):
            raise PauliError(f"not a Pauli word: {self.letters!r}")

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Build from the written form, qubit ``v-1`` leftmost (``IIZ`` = Z on qubit 0)."""
        return cls(label[::-1])

    @classmethod
    def from_index(cls, index: int, v: int) -> "PauliString":
        return cls("".join(LETTERS[(index >> (2 * q)) & 3] for q in range(v)))

    @property
    def label(self) -> str:
        return self.letters[::-1]

    @property
    def v(self) -> int:
        return len(self.letters)

    @property
    def index(self) -> int:
        return sum(LETTERS.index(ch) << (2 * q) for q, ch in enumerate(self.letters))

    @property
    def x_mask(self) -> int:
        return sum(1 << q for q, ch in enumerate(self.letters) if ch in "XY")

    @property
    def z_mask(self) -> int:
        return sum(1 << q for q, ch in enumerate(self.letters) if ch in "YZ")

    def __str__(self):
        return self.label


def enumerate_basis(v: int) -> list[PauliString]:
    if v < 1:
        raise PauliError("need at least one qubit")
    return [PauliString.from_index(i, v) for i in range(4 ** v)]


@lru_cache(maxsize=None)
def _symplectic(v: int):
    """X-masks, Z-masks and phases of every basis string, in enumeration order."""
    idx = np.arange(4 ** v)
    digits = np.stack([(idx >> (2 * q)) & 3 for q in range(v)])
    weights = (1 << np.arange(v))[:, None]
    xs = (((digits == 1) | (digits == 2)) * weights).sum(0)
    zs = (((digits == 2) | (digits == 3)) * weights).sum(0)
    n_y = (digits == 2).sum(0)
    return xs, zs, 1j ** n_y


@lru_cache(maxsize=None)
def _popcount_parity(v: int) -> np.ndarray:
    """(-1)**popcount(a & b) for all a, b < 2**v (the Sylvester Hadamard matrix)."""
    k = np.arange(1 << v)
    a = k[:, None] & k[None, :]
    bits = np.zeros_like(a)
    for q in range(v):
        bits ^= (a >> q) & 1
    return 1 - 2 * bits


def pauli_matrix(p: PauliString) -> np.ndarray:
    n = 1 << p.v
    k = np.arange(n)
    xm, zm = p.x_mask, p.z_mask
    phase = 1j ** bin(xm & zm).count("1")
    m = np.zeros((n, n), dtype=complex)
    m[k ^ xm, k] = phase * _popcount_parity(p.v)[zm, k]
    return m


def _pauli_traces(mats: np.ndarray, v: int) -> np.ndarray:
    """``trace(P_j A)`` for every basis string ``j`` and every matrix in the batch.

    ``mats`` has shape ``(batch, 2**v, 2**v)``; the result has shape
    ``(batch, 4**v)`` in enumeration order.
    """
    n = 1 << v
    k = np.arange(n)
    # D[b, x, m] = A_b[m, m ^ x]
    gathered = mats[:, k[None, :], k[None, :] ^ k[:, None]]
    sums = gathered @ _popcount_parity(v)  # [b, x, z], the parity matrix is symmetric
    xs, zs, phase = _symplectic(v)
    return sums[:, xs, zs] * phase[None, :]


@dataclass
class ObservableDecomposition:
    """Pauli coefficients of a Hermitian operator, in basis enumeration order.

    When the coefficients are exact rationals, ``numerators / denominator``
    holds them exactly and ``coefficients`` is their float image.
    """

    v: int
    coefficients: np.ndarray
    numerators: np.ndarray | None = None
    denominator: int | None = None

    @property
    def exact(self) -> bool:
        return self.numerators is not None

    def coefficient(self, label: str):
        j = PauliString.from_label(label).index
        if self.exact:
            return Fraction(int(self.numerators[j]), self.denominator)
        return float(self.coefficients[j])

    def terms(self) -> dict[str, Fraction | float]:
        """Nonzero coefficients keyed by written label, in enumeration order."""
        out = {}
        if self.exact:
            for j in np.flatnonzero(self.numerators):
                out[PauliString.from_index(int(j), self.v).label] = Fraction(
                    int(self.numerators[j]), self.denominator
                )
        else:
            for j in np.flatnonzero(np.abs(self.coefficients) > 1e-12):
                out[PauliString.from_index(int(j), self.v).label] = float(self.coefficients[j])
        return out

    def reconstruct(self) -> np.ndarray:
        out = np.zeros((1 << self.v, 1 << self.v), dtype=complex)
        for j in np.flatnonzero(self.coefficients):
            out += self.coefficients[j] * pauli_matrix(PauliString.from_index(int(j), self.v))
        return out

    def __str__(self):
        return " + ".join(f"{c}*{lab}" for lab, c in self.terms().items()) or "0"


def _check_square(mat: np.ndarray, v: int | None = None) -> int:
    mat = np.asarray(mat)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise PauliError(f"expected a square matrix, got shape {mat.shape}")
    dim = mat.shape[0]
    nv = dim.bit_length() - 1
    if dim != 1 << nv or nv < 1:
        raise PauliError(f"dimension {dim} is not a power of two")
    if v is not None and nv != v:
        raise PauliError(f"matrix acts on {nv} qubits, expected {v}")
    return nv


def _check_hermitian(o: np.ndarray):
    err = np.abs(o - o.conj().T).max()
    if err > HERMITIAN_TOL:
        raise PauliError(f"operator is not Hermitian (error {err:.2e})")


def _check_unitary(c: np.ndarray):
    err = np.abs(c.conj().T @ c - np.eye(c.shape[0])).max()
    if err > UNITARY_TOL:
        raise PauliError(f"operator is not unitary (error {err:.2e})")


def decompose_hermitian(o: np.ndarray, v: int | None = None) -> ObservableDecomposition:
    o = np.asarray(o, dtype=complex)
    v = _check_square(o, v)
    _check_hermitian(o)
    tr = _pauli_traces(o[None], v)[0] / (1 << v)
    return ObservableDecomposition(v, tr.real.copy())


def evolve_observable(c: np.ndarray, o: np.ndarray) -> np.ndarray:
    """Heisenberg-picture evolution ``C^dagger O C``."""
    c = np.asarray(c, dtype=complex)
    o = np.asarray(o, dtype=complex)
    if c.shape != o.shape:
        raise PauliError(f"shape mismatch {c.shape} vs {o.shape}")
    _check_square(c)
    _check_unitary(c)
    return c.conj().T @ o @ c


def rational_scale(c: np.ndarray, max_denominator: int = _MAX_DENOMINATOR) -> int | None:
    """Smallest ``d`` making ``d * c`` a Gaussian-integer matrix, or None."""
    c = np.asarray(c, dtype=complex)
    for d in range(1, max_denominator + 1):
        s = c * d
        if (np.abs(s.real - np.rint(s.real)).max() < 1e-12
                and np.abs(s.imag - np.rint(s.imag)).max() < 1e-12):
            return d
    return None


@dataclass
class EvolutionMatrix:
    """``M[i, j] = beta[i, j] - delta[i, j]`` for conjugation by a collision.

    Exact matrices store integer ``numerators`` over a common ``denominator``;
    otherwise only ``values`` (floats) are available and ``exact`` is False.
    """

    v: int
    numerators: np.ndarray | None
    denominator: int | None
    values: np.ndarray

    @property
    def exact(self) -> bool:
        return self.numerators is not None

    def entry(self, i: int, j: int):
        if self.exact:
            return Fraction(int(self.numerators[i, j]), self.denominator)
        return float(self.values[i, j])

    def beta_row(self, i: int) -> ObservableDecomposition:
        """Pauli decomposition of the evolved ``i``-th basis string."""
        vals = self.values[i].copy()
        vals[i] += 1.0
        if not self.exact:
            return ObservableDecomposition(self.v, vals)
        num = self.numerators[i].copy()
        num[i] += self.denominator
        return ObservableDecomposition(self.v, vals, num, self.denominator)

    def fixed_rows(self) -> np.ndarray:
        """Indices of basis strings mapped to themselves by conjugation."""
        src = self.numerators if self.exact else np.where(np.abs(self.values) > 1e-12, 1, 0)
        return np.flatnonzero(~np.any(src != 0, axis=1))


def evolution_matrix(c: np.ndarray, v: int | None = None, chunk: int = 256) -> EvolutionMatrix:
    """Pauli-basis matrix of ``O -> C^dagger O C`` minus the identity.

    If ``C`` is a rational matrix (``d * C`` integral for a small ``d``), all
    arithmetic runs on Gaussian integers of modest size, which float64
    represents exactly, and the result carries exact integer numerators over
    ``d**2 * 2**v``. Otherwise a float matrix is returned with ``exact=False``.
    """
    c = np.asarray(c, dtype=complex)
    v = _check_square(c, v)
    _check_unitary(c)
    n = 1 << v
    d = rational_scale(c)
    scaled = c * d if d is not None else c
    if d is not None:
        scaled = np.rint(scaled.real) + 1j * np.rint(scaled.imag)
    xs, zs, phase = _symplectic(v)
    parity = _popcount_parity(v)
    k = np.arange(n)
    rows = np.empty((4 ** v, 4 ** v))
    cd = scaled.conj().T
    for start in range(0, 4 ** v, chunk):
        sl = slice(start, min(start + chunk, 4 ** v))
        bx, bz, bph = xs[sl], zs[sl], phase[sl]
        # (P_i C)[r, :] = phase * (-1)**|z & (r ^ x)| * C[r ^ x, :]
        src = k[None, :] ^ bx[:, None]
        signs = parity[bz[:, None], src] * bph[:, None]
        pc = signs[:, :, None] * scaled[src]
        traces = _pauli_traces(cd[None] @ pc, v)
        if np.abs(traces.imag).max() > 1e-6 * n:
            raise PauliError("conjugated Pauli strings are not Hermitian")
        rows[sl] = traces.real
    if d is None:
        return EvolutionMatrix(v, None, None, rows / n - np.eye(4 ** v))
    num = np.rint(rows).astype(np.int64)
    den = d * d * n
    num -= den * np.eye(4 ** v, dtype=np.int64)
    return EvolutionMatrix(v, num, den, num / den)


def rank(m: EvolutionMatrix, float_check_limit: int = 256) -> int:
    """Exact rank; small matrices are cross-checked against an SVD count."""
    if not m.exact:
        return rank_float(m.values)
    r = exact_rank(m.numerators)
    if m.numerators.shape[0] <= float_check_limit:
        rf = rank_float(m.values)
        if rf != r:
            raise ArithmeticError(f"exact rank {r} disagrees with SVD rank {rf}")
    return r


@dataclass
class InvariantReport:
    v: int
    rank: int
    invariant_count: int
    conserved_basis_strings: list[PauliString] = field(default_factory=list)
    model: str = ""
    collisions: tuple[str, ...] = ()

    def to_json(self) -> str:
        return json.dumps(
            {
                "model": self.model,
                "collisions": list(self.collisions),
                "v": self.v,
                "rank": self.rank,
                "invariant_count": self.invariant_count,
                "fixed_basis_strings": [p.label for p in self.conserved_basis_strings],
            },
            indent=2,
        )


def count_invariants(c: np.ndarray, v: int | None = None, *, model: str = "",
                     collisions: Iterable[str] = ()) -> InvariantReport:
    m = evolution_matrix(c, v)
    r = rank(m)
    fixed = [PauliString.from_index(int(i), m.v) for i in m.fixed_rows()]
    return InvariantReport(m.v, r, 4 ** m.v - r, fixed, model, tuple(collisions))


class Commutation(NamedTuple):
    commutes: bool
    residual: float

    def __bool__(self):
        return self.commutes


def commutes(c: np.ndarray, o: np.ndarray, tol: float = COMMUTE_TOL) -> Commutation:
    c = np.asarray(c, dtype=complex)
    o = np.asarray(o, dtype=complex)
    if c.shape != o.shape:
        raise PauliError(f"shape mismatch {c.shape} vs {o.shape}")
    res = float(np.abs(c @ o - o @ c).max())
    return Commutation(res <= tol, res)


def evolution_table(c: np.ndarray, v: int | None = None) -> list[tuple[PauliString, ObservableDecomposition]]:
    m = evolution_matrix(c, v)
    return [(PauliString.from_index(i, m.v), m.beta_row(i)) for i in range(4 ** m.v)]


def write_evolution_table_csv(table, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["input_string", "output_term", "coefficient_numerator",
                    "coefficient_denominator"])
        for p, dec in table:
            for lab, coef in dec.terms().items():
                coef = Fraction(coef).limit_denominator(1 << 20) if not isinstance(coef, Fraction) else coef
                w.writerow([p.label, lab, coef.numerator, coef.denominator])


def observable_from_terms(terms: dict[str, float]) -> np.ndarray:
    """Dense matrix of ``sum coef * P(label)``."""
    labels = list(terms)
    if not labels:
        raise PauliError("empty observable")
    v = len(labels[0])
    out = np.zeros((1 << v, 1 << v), dtype=complex)
    for lab, coef in terms.items():
        out += coef * pauli_matrix(PauliString.from_label(lab))
    return out


def single_z(q: int, v: int) -> str:
    """Written label of Z on qubit ``q`` (e.g. ``single_z(2, 6) == 'IIIZII'``)."""
    return PauliString("".join("Z" if i == q else "I" for i in range(v))).label
