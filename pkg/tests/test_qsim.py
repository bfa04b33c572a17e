import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qlgca.qsim import (
    Circuit,
    CircuitError,
    Gate,
    Measurement,
    OutcomeDistribution,
    Statevector,
    apply_circuit_to_columns,
    apply_gate,
    cnot,
    h,
    measure_distribution,
    run_circuit,
    sample_counts,
    swap,
    unitary_of_circuit,
    x,
)

S2 = 1 / math.sqrt(2)


def test_hadamard_on_zero():
    out = apply_gate(Statevector.basis(1), h(0))
    assert np.allclose(out.amplitudes, [S2, S2], atol=1e-15)


def test_cnot_flips_target_when_control_set():
    # |q1 q0> = |01>: control qubit 0 is set
    out = apply_gate(Statevector.basis(2, 0b01), cnot(0, 1))
    assert np.argmax(np.abs(out.amplitudes)) == 0b11


def test_fredkin_swaps_only_when_control_set():
    g = swap(0, 1, (2, True))
    assert np.argmax(np.abs(apply_gate(Statevector.basis(3, 0b101), g).amplitudes)) == 0b110
    assert np.argmax(np.abs(apply_gate(Statevector.basis(3, 0b001), g).amplitudes)) == 0b001


def test_open_control_fires_on_zero():
    g = x(0, (1, False))
    assert np.argmax(np.abs(apply_gate(Statevector.basis(2, 0b00), g).amplitudes)) == 0b01
    assert np.argmax(np.abs(apply_gate(Statevector.basis(2, 0b10), g).amplitudes)) == 0b10


def test_measurement_free_circuit_gives_one_branch():
    c = Circuit(2, [h(0), cnot(0, 1)])
    (b,) = run_circuit(Statevector.basis(2), c)
    assert b.probability == 1.0
    assert b.record == ()
    assert np.allclose(b.state.amplitudes, [S2, 0, 0, S2])


def test_measured_hadamard_splits_in_two():
    c = Circuit(1, [h(0), Measurement((0,))])
    branches = run_circuit(Statevector.basis(1), c)
    assert sorted(b.record[0][1] for b in branches) == ["0", "1"]
    assert all(abs(b.probability - 0.5) < 1e-15 for b in branches)


def test_sampled_mode_is_seeded():
    c = Circuit(3, [h(0), h(1), h(2), Measurement((0, 1, 2))])
    a = run_circuit(Statevector.basis(3), c, mode="sampled", seed=7)
    b = run_circuit(Statevector.basis(3), c, mode="sampled", seed=7)
    assert len(a) == 1 and a[0].record == b[0].record


def test_empty_circuit_unitary_is_identity():
    assert np.array_equal(unitary_of_circuit(Circuit(3)), np.eye(8))


def test_unitary_rejects_measurement():
    with pytest.raises(CircuitError):
        unitary_of_circuit(Circuit(1, [Measurement((0,))]))


def test_measure_distribution_bell_pair():
    state = run_circuit(Statevector.basis(2), Circuit(2, [h(0), cnot(0, 1)]))[0].state
    dist = measure_distribution(state, (0, 1))
    assert dist["00"] == pytest.approx(0.5) and dist["11"] == pytest.approx(0.5)
    assert dist["01"] == 0.0


def test_bitstring_order_puts_last_qubit_left():
    dist = measure_distribution(Statevector.basis(3, 0b001), (0, 2))
    assert dist["01"] == 1.0


@pytest.mark.parametrize("qubits", [(), (0, 0), (3,), (-1,)])
def test_invalid_subsets_rejected(qubits):
    with pytest.raises(CircuitError):
        measure_distribution(Statevector.basis(3), qubits)


def test_point_distribution_samples_exactly():
    dist = OutcomeDistribution((0, 1), {"10": 1.0})
    assert sample_counts(dist, 100, seed=3) == {"10": 100}


def test_uniform_sampling_counts_and_seed():
    dist = OutcomeDistribution.from_array((0,), np.array([0.5, 0.5]))
    counts = sample_counts(dist, 10**6, seed=0)
    assert abs(counts["0"] - 500_000) < 1500
    assert counts == sample_counts(dist, 10**6, seed=0)


@pytest.mark.parametrize(
    "make",
    [
        lambda: Gate("X", (0,), ((0, True),)),
        lambda: Gate("FOO", (0,)),
        lambda: Gate("RY", (0,)),
        lambda: Gate("U", (0,), matrix=np.array([[1, 1], [0, 1]])),
        lambda: Gate("U", (0,), matrix=np.eye(4)),
        lambda: Gate("SWAP", (0,)),
    ],
)
def test_malformed_gates_rejected(make):
    with pytest.raises(CircuitError):
        make()


def test_out_of_range_qubit_rejected():
    with pytest.raises(CircuitError):
        Circuit(2, [x(2)])


def test_state_size_mismatch_rejected():
    with pytest.raises(CircuitError):
        run_circuit(Statevector.basis(2), Circuit(3))


def test_distribution_must_be_normalised():
    with pytest.raises(CircuitError):
        OutcomeDistribution((0,), {"0": 0.3})


# random circuits over up to four qubits

N_MAX = 4


@st.composite
def gates(draw, n):
    kinds = ["X", "Y", "Z", "H", "S", "T", "RY", "RZ", "P"] + (["SWAP"] if n > 1 else [])
    kind = draw(st.sampled_from(kinds))
    k = 2 if kind == "SWAP" else 1
    qs = draw(st.permutations(range(n)))
    n_ctl = draw(st.integers(0, n - k))
    targets = tuple(qs[:k])
    controls = tuple((q, draw(st.booleans())) for q in qs[k:k + n_ctl])
    param = draw(st.floats(-math.pi, math.pi)) if kind in ("RY", "RZ", "P") else None
    return Gate(kind, targets, controls, param)


@st.composite
def circuits(draw, measure=False):
    n = draw(st.integers(1, N_MAX))
    els = draw(st.lists(gates(n), max_size=12))
    if measure:
        for _ in range(draw(st.integers(1, 2))):
            pos = draw(st.integers(0, len(els)))
            qs = draw(st.lists(st.integers(0, n - 1), min_size=1, max_size=n, unique=True))
            els.insert(pos, Measurement(tuple(qs)))
    return Circuit(n, els)


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return Statevector(n, v / np.linalg.norm(v))


@given(circuits(), st.integers(0, 2**32 - 1))
def test_norm_is_preserved(c, seed):
    (b,) = run_circuit(random_state(c.n_qubits, seed), c)
    assert abs(b.state.norm - 1) < 1e-12


@given(circuits(measure=True), st.integers(0, 2**32 - 1))
def test_branch_probabilities_sum_to_one(c, seed):
    branches = run_circuit(random_state(c.n_qubits, seed), c, prune=0.0)
    assert abs(sum(b.probability for b in branches) - 1) < 1e-12


@given(circuits(), st.integers(0, 2**32 - 1))
def test_unitary_agrees_with_statevector_run(c, seed):
    psi = random_state(c.n_qubits, seed)
    u = unitary_of_circuit(c)
    (b,) = run_circuit(psi, c)
    assert np.abs(u @ psi.amplitudes - b.state.amplitudes).max() < 1e-12
    assert np.abs(u.conj().T @ u - np.eye(u.shape[0])).max() < 1e-12


@given(st.integers(1, N_MAX).flatmap(lambda n: st.tuples(
    st.lists(gates(n), max_size=8), st.lists(gates(n), max_size=8), st.just(n))))
def test_composition_is_matrix_product(parts):
    a, b, n = parts
    ca, cb = Circuit(n, a), Circuit(n, b)
    lhs = unitary_of_circuit(ca + cb)
    rhs = unitary_of_circuit(cb) @ unitary_of_circuit(ca)
    assert np.abs(lhs - rhs).max() < 1e-12


@given(circuits())
def test_inverse_circuit_undoes(c):
    u = unitary_of_circuit(c + c.inverse())
    assert np.abs(u - np.eye(u.shape[0])).max() < 1e-12


@given(circuits(), st.integers(0, 2**32 - 1))
def test_column_batch_matches_unitary(c, seed):
    cols = np.stack([random_state(c.n_qubits, (seed + k) % 2**32).amplitudes for k in range(3)], axis=1)
    assert np.abs(apply_circuit_to_columns(c, cols) - unitary_of_circuit(c) @ cols).max() < 1e-12
