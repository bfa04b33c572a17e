"""Infeasibility of orthogonal cell states under quantum-walk streaming.

With the D1Q2 cell states written through amplitudes ``a..h``, the
orthogonality and normalization conditions collapse onto six aggregates:

    A = |a|^2 + |b|^2,  B = |c|^2 + |d|^2,  C = |e|^2 + |f|^2,
    D = |g|^2 + |h|^2,  E = a* c + b* d,    F = c* e + d* f

with ``A..D`` real and non-negative and ``E, F`` complex. The resulting
linear system has no solution. A certificate is a combination of the
equations whose left sides cancel while the right sides do not.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import sympy as sp
from scipy.optimize import least_squares

REAL_VARS = ("A", "B", "C", "D", "ReE", "ImE", "ReF", "ImF")
AGGREGATES = {
    "A": "|a|^2 + |b|^2",
    "B": "|c|^2 + |d|^2",
    "C": "|e|^2 + |f|^2",
    "D": "|g|^2 + |h|^2",
    "E": "conj(a) c + conj(b) d",
    "F": "conj(c) e + conj(d) f",
}

# each equation: (label, [(variable, conjugated)], rhs)
ORTHOGONALITY = (
    ("A+F=0", [("A", False), ("F", False)], 0),
    ("E+B=0", [("E", False), ("B", False)], 0),
    ("E+F=0", [("E", False), ("F", False)], 0),
    ("E+F*=0", [("E", False), ("F", True)], 0),
    ("E+C=0", [("E", False), ("C", False)], 0),
    ("D+F=0", [("D", False), ("F", False)], 0),
)
NORMALIZATION = (
    ("A+B=1", [("A", False), ("B", False)], 1),
    ("A+C=1", [("A", False), ("C", False)], 1),
    ("B+D=1", [("B", False), ("D", False)], 1),
    ("C+D=1", [("C", False), ("D", False)], 1),
)


@dataclass(frozen=True)
class ConstraintSystem:
    equations: tuple
    aggregates: dict = field(default_factory=lambda: dict(AGGREGATES))

    @property
    def labels(self) -> list[str]:
        return [lab for lab, _, _ in self.equations]

    def real_form(self) -> tuple[np.ndarray, np.ndarray, list[str]]:
        """Split every equation into real and imaginary parts over ``REAL_VARS``.

        Rows whose imaginary part is identically ``0 = 0`` are dropped.
        """
        rows, rhs, names = [], [], []
        col = {v: i for i, v in enumerate(REAL_VARS)}
        for lab, terms, b in self.equations:
            re = np.zeros(len(REAL_VARS))
            im = np.zeros(len(REAL_VARS))
            for var, conj in terms:
                if var in "ABCD":
                    re[col[var]] += 1
                else:
                    re[col["Re" + var]] += 1
                    im[col["Im" + var]] += -1 if conj else 1
            rows.append(re)
            rhs.append(float(b))
            names.append(f"Re({lab})")
            if im.any():
                rows.append(im)
                rhs.append(0.0)
                names.append(f"Im({lab})")
        return np.array(rows), np.array(rhs), names

    def evaluate(self, values: dict) -> dict[str, complex]:
        """Residual ``lhs - rhs`` of each equation at the given aggregate values."""
        out = {}
        for lab, terms, b in self.equations:
            lhs = sum(np.conj(values[v]) if c else values[v] for v, c in terms)
            out[lab] = complex(lhs - b)
        return out


def nogo_constraint_system(relaxed: bool = False) -> ConstraintSystem:
    """The ten-equation system; ``relaxed`` sets every normalization to 0."""
    norm = tuple((lab.replace("=1", "=0"), t, 0) for lab, t, _ in NORMALIZATION) if relaxed \
        else NORMALIZATION
    return ConstraintSystem(ORTHOGONALITY + norm)


def contradiction_chain(system: ConstraintSystem) -> list[str]:
    """Symbolic derivation of ``0 = 1`` from A+F=0, E+F=0, E+B=0 and A+B=1.

    Returns an empty list when the system lacks those equations.
    """
    need = {"A+F=0", "E+F=0", "E+B=0", "A+B=1"}
    if not need <= set(system.labels):
        return []
    A, B, E, F = sp.symbols("A B E F")
    combo = (A + F) - (E + F) + (E + B)
    assert sp.simplify(combo - (A + B)) == 0
    return [
        "(A+F) - (E+F) + (E+B) = 0 - 0 + 0",
        f"{sp.simplify(combo)} = 0",
        "A + B = 1",
        "0 = 1",
    ]


def fredholm_certificate(system: ConstraintSystem):
    """Exact ``y`` with ``y^T M = 0`` and ``y^T b != 0``, or None if consistent."""
    m, b, names = system.real_form()
    mat = sp.Matrix(m.astype(int).tolist())
    rhs = sp.Matrix([sp.Rational(int(v)) for v in b])
    for y in mat.T.nullspace():
        yb = (y.T * rhs)[0]
        if yb != 0:
            y = y / yb
            return {n: str(c) for n, c in zip(names, y) if c != 0}
    return None


def least_squares_bound(system: ConstraintSystem) -> float:
    """Minimum of ``||M x - b||`` over all real ``x`` (a lower bound for the
    sign-constrained problem)."""
    m, b, _ = system.real_form()
    x, *_ = np.linalg.lstsq(m, b, rcond=None)
    return float(np.linalg.norm(m @ x - b))


def min_residual(system: ConstraintSystem, restarts: int = 1000, seed: int = 0) -> float:
    """Smallest residual norm found by bounded least squares from random starts."""
    m, b, _ = system.real_form()
    lo = np.array([0, 0, 0, 0, -np.inf, -np.inf, -np.inf, -np.inf])
    hi = np.full(len(REAL_VARS), np.inf)
    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(restarts):
        x0 = rng.uniform(-2, 2, len(REAL_VARS))
        x0[:4] = np.abs(x0[:4])
        res = least_squares(lambda x: m @ x - b, x0, bounds=(lo, hi), method="trf",
                            ftol=1e-15, xtol=1e-15, gtol=1e-15)
        best = min(best, float(np.linalg.norm(res.fun)))
    return best


@dataclass
class InfeasibilityCertificate:
    infeasible: bool
    contradiction_chain: list[str]
    fredholm: dict | None
    lower_bound: float
    min_residual: float
    restarts: int

    def to_json(self) -> str:
        return json.dumps({
            "infeasible": self.infeasible,
            "contradiction_chain": self.contradiction_chain,
            "fredholm_combination": self.fredholm,
            "lower_bound": round(self.lower_bound, 12),
            "min_residual": round(self.min_residual, 12),
            "restarts": self.restarts,
        }, indent=2)


def check_infeasible(system: ConstraintSystem | None = None, restarts: int = 1000,
                     seed: int = 0) -> InfeasibilityCertificate:
    system = nogo_constraint_system() if system is None else system
    cert = fredholm_certificate(system)
    return InfeasibilityCertificate(
        infeasible=cert is not None,
        contradiction_chain=contradiction_chain(system),
        fredholm=cert,
        lower_bound=least_squares_bound(system),
        min_residual=min_residual(system, restarts, seed),
        restarts=restarts,
    )
