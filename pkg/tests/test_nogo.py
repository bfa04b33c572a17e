import json
from fractions import Fraction

import numpy as np
import pytest

from qlgca.nogo import (
    AGGREGATES,
    check_infeasible,
    contradiction_chain,
    fredholm_certificate,
    least_squares_bound,
    min_residual,
    nogo_constraint_system,
)


def test_ten_equations_over_six_aggregates():
    s = nogo_constraint_system()
    assert s.labels == ["A+F=0", "E+B=0", "E+F=0", "E+F*=0", "E+C=0", "D+F=0",
                        "A+B=1", "A+C=1", "B+D=1", "C+D=1"]
    assert sorted(AGGREGATES) == ["A", "B", "C", "D", "E", "F"]
    m, b, names = s.real_form()
    # six complex orthogonality relations and four real normalizations
    assert m.shape == (16, 8)
    assert len(b) == m.shape[0] == len(names)


def test_half_substitution():
    s = nogo_constraint_system()
    res = s.evaluate({"A": 0.5, "B": 0.5, "C": 0.5, "D": 0.5, "E": -0.5, "F": -0.5})
    # every normalization holds; the mixed orthogonality relations fail
    assert res["A+B=1"] == 0
    assert res["E+F=0"] != 0 and res["E+F*=0"] != 0
    assert res["A+F=0"] == 0 and res["E+B=0"] == 0


def test_first_three_force_zero_mass():
    chain = contradiction_chain(nogo_constraint_system())
    assert chain[1] == "A + B = 0"
    assert chain[-2:] == ["A + B = 1", "0 = 1"]


def test_fredholm_combination():
    cert = fredholm_certificate(nogo_constraint_system())
    assert cert is not None
    m, b, names = nogo_constraint_system().real_form()
    y = np.array([float(Fraction(cert.get(n, "0"))) for n in names])
    assert np.abs(y @ m).max() < 1e-12
    assert y @ b == pytest.approx(1)


def test_relaxed_system_is_feasible():
    s = nogo_constraint_system(relaxed=True)
    assert fredholm_certificate(s) is None
    assert contradiction_chain(s) == []
    assert least_squares_bound(s) < 1e-12
    assert min_residual(s, restarts=5) < 1e-6


def test_lower_bound_value():
    assert least_squares_bound(nogo_constraint_system()) == pytest.approx(0.755929, abs=1e-6)


def test_restarts_never_beat_the_bound():
    s = nogo_constraint_system()
    assert min_residual(s, restarts=50, seed=3) >= least_squares_bound(s) - 1e-9


def test_certificate_json():
    cert = check_infeasible(restarts=10)
    data = json.loads(cert.to_json())
    assert data["infeasible"] is True
    assert {"contradiction_chain", "min_residual"} <= set(data)
    assert data["min_residual"] >= 0.1
