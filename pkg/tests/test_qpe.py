import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlgca.qpe import (
    PhaseOperator,
    build_qpe_circuit,
    equal_quantity_equivalence_check,
    phase_operator,
    qpe_distribution,
    qpe_kernel,
    qft_gates,
    spectrum_report,
)
from qlgca.qsim import Circuit, unitary_of_circuit


def test_paper_mass_operator():
    op = phase_operator("mass", "d1q3", "paper")
    assert op.phases.tolist() == [0, -1, -2, -3, -1, -2, -3, -4]
    assert np.allclose(op.diagonal, np.exp(-1j * np.array([0, 1, 2, 3, 1, 2, 3, 4])))


def test_constant_quantity_is_identity():
    op = phase_operator(np.zeros(8), "d1q3")
    assert np.array_equal(op.matrix(), np.eye(8))


def test_fhp_py_of_cell_21_is_zero():
    op = phase_operator("py", "fhp")
    assert abs(op.phases[21]) < 1e-15


def test_bad_inputs():
    with pytest.raises(ValueError):
        phase_operator("mass", "d1q3", "other")
    with pytest.raises(ValueError):
        phase_operator("energy", "d1q3")
    with pytest.raises(ValueError):
        phase_operator("py", "d1q3")
    with pytest.raises(ValueError):
        build_qpe_circuit(phase_operator("mass", "d1q3"), 0)
    with pytest.raises(ValueError):
        qpe_distribution(phase_operator("mass", "d1q3"), 8)


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_qft_matches_dft(n):
    u = unitary_of_circuit(Circuit(n, qft_gates(range(n))))
    j = np.arange(1 << n)
    dft = np.exp(2j * math.pi * np.outer(j, j) / (1 << n)) / math.sqrt(1 << n)
    assert np.abs(u - dft).max() < 1e-12


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_circuit_matches_kernel(n):
    op = phase_operator("mass", "d1q3", "paper")
    for s in range(8):
        got = qpe_distribution(op, s, n).as_array()
        want = qpe_kernel(op.eigenphase_fraction()[s], n)
        assert np.abs(got - want).max() < 1e-10


@given(st.floats(0, 1, exclude_max=True), st.integers(1, 5))
def test_kernel_circuit_agreement_random_phase(phi, n):
    op = PhaseOperator(1, np.array([0.0, 2 * math.pi * phi]))
    got = qpe_distribution(op, 1, n).as_array()
    assert np.abs(got - qpe_kernel(phi, n)).max() < 1e-10
    assert abs(got.sum() - 1) < 1e-12


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, (1 << n) - 1))))
def test_dyadic_phase_gives_point_mass(nk):
    n, k = nk
    op = PhaseOperator(1, np.array([0.0, 2 * math.pi * k / (1 << n)]), "dyadic")
    probs = qpe_distribution(op, 1, n).as_array()
    assert probs[k] == pytest.approx(1, abs=1e-12)


def test_zero_phase_gives_outcome_zero():
    op = phase_operator("mass", "fhp", "paper")
    assert qpe_distribution(op, 0, 3)["000"] == pytest.approx(1, abs=1e-12)


def test_paper_rows_for_equal_mass():
    rep = spectrum_report("mass", "d1q3", 3, "paper")
    assert rep.rows[0b001].total_variation(rep.rows[0b100]) <= 1e-12
    assert rep.rows[0b011].total_variation(rep.rows[0b110]) <= 1e-12
    assert equal_quantity_equivalence_check(rep).passed
    assert np.allclose(rep.matrix().sum(axis=1), 1, atol=1e-12)


def test_dyadic_mass_separates_five_values():
    rep = spectrum_report("mass", "d1q3", 3, "dyadic")
    res = equal_quantity_equivalence_check(rep)
    assert res.passed and res.separated and res.distinct_modes == 5
    for s in range(8):
        row = rep.rows[s].as_array()
        assert row.max() == pytest.approx(1, abs=1e-12)
        assert int(np.argmax(row)) == int(rep.quantity[s])


def test_fhp_single_particle_rows_agree():
    states = [1 << i for i in range(6)]
    rep = spectrum_report("mass", "fhp", 3, "paper", states=states)
    res = equal_quantity_equivalence_check(rep)
    assert res.passed and res.max_equal_tv <= 1e-12


def test_constant_quantity_rows_all_equal():
    rep = spectrum_report(np.full(8, 1.5), "d1q3", 3, "paper")
    m = rep.matrix()
    assert np.abs(m - m[0]).max() <= 1e-12


def test_aliasing_by_full_turn():
    q = np.array([0, 1, 2, 3, 1, 2, 3, 1 + 2 * math.pi])
    rep = spectrum_report(q, "d1q3", 3, "paper")
    assert rep.rows[7].total_variation(rep.rows[1]) < 1e-12
    # the classical values still differ
    assert rep.quantity[7] != rep.quantity[1]


def test_dyadic_shift_rotates_rows():
    base = spectrum_report("mass", "d1q3", 3, "dyadic", rest_weight=2)
    q = base.quantity + 1
    shifted = spectrum_report(q, "d1q3", 3, "dyadic")
    for s in range(8):
        assert np.allclose(np.roll(base.rows[s].as_array(), 1), shifted.rows[s].as_array(),
                           atol=1e-12)


@given(st.floats(-10, 10))
def test_shift_keeps_row_equality(c):
    q = phase_operator("mass", "d1q3").quantity + c
    rep = spectrum_report(q, "d1q3", 3, "paper")
    assert equal_quantity_equivalence_check(rep).max_equal_tv <= 1e-12


def test_superposed_input_mixes_rows():
    op = phase_operator("mass", "d1q3", "dyadic")
    vec = np.zeros(8)
    vec[[0, 7]] = 1
    probs = qpe_distribution(op, vec).as_array()
    assert probs[0] == pytest.approx(0.5) and probs[4] == pytest.approx(0.5)


def test_csv_exports(tmp_path):
    rep = spectrum_report("mass", "d1q3", 3, "paper")
    rep.write_csv(tmp_path / "rows.csv")
    rep.write_histogram_csv(tmp_path / "hist.csv")
    rows = (tmp_path / "rows.csv").read_text().splitlines()
    assert rows[0].split(",")[:3] == ["state", "quantity", "000"]
    assert len(rows) == 9
    hist = (tmp_path / "hist.csv").read_text().splitlines()
    assert [h.split(",")[0] for h in hist] == ["group", "q=0", "q=1", "q=2", "q=3", "q=4",
                                               "aggregate"]
