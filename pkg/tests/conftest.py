import numpy as np
import pytest
from hypothesis import settings

from qlgca.collisions import d1q3_collision_matrix, fhp_unitary_collision
from qlgca.pauli import evolution_matrix, rank

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

FHP_CASES = {
    "B3": ("B3",),
    "B2,4": ("B2", "B4"),
    "B2,3,4": ("B2", "B3", "B4"),
}

_CRITERIA = []


def commutant_dimension(c, tol=1e-9):
    """Independent invariant count: sum of squared eigenvalue multiplicities."""
    ev = np.linalg.eigvals(c)
    seen = []
    for e in ev:
        for k, (rep, cnt) in enumerate(seen):
            if abs(e - rep) < tol:
                seen[k] = (rep, cnt + 1)
                break
        else:
            seen.append((e, 1))
    return sum(cnt * cnt for _, cnt in seen)


def _summary(c):
    m = evolution_matrix(c)
    num, den = m.numerators, m.denominator
    beta = num + den * np.eye(num.shape[0], dtype=np.int64)
    return {
        "rank": rank(m),
        "size": num.shape[0],
        "denominator": den,
        "row_norms_exact": bool(np.all((beta * beta).sum(axis=1) == den * den)),
        "fixed": {int(i) for i in m.fixed_rows()},
        "commutant": commutant_dimension(c),
    }


@pytest.fixture(scope="session")
def d1q3_summary():
    return _summary(d1q3_collision_matrix())


@pytest.fixture(scope="session")
def fhp_summaries():
    """Evolution-matrix facts for the three FHP collision selections.

    Only scalars and index sets are kept; the 4096 x 4096 matrices are
    dropped after each rank computation.
    """
    return {name: _summary(fhp_unitary_collision(sel)) for name, sel in FHP_CASES.items()}


@pytest.fixture
def criterion(request):
    def record(number, ok, detail=""):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(_CRITERIA):
        terminalreporter.write_line(line)
