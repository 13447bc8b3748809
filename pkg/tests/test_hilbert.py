import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pureqm.hilbert import (
    LayoutConflictError,
    NonUnitaryError,
    StateVector,
    SubsystemLayout,
    UndefinedRelativeStateError,
    UnitaryOp,
    apply,
    basis_state,
    born_probability,
    complete_unitary,
    component_norm,
    qubit,
    relative_state,
    repeat,
    tensor,
)

from conftest import random_state, random_unitary

CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]])


def test_layout_rejects_duplicates_and_small_dims():
    with pytest.raises(LayoutConflictError):
        SubsystemLayout.of(("S", 2), ("S", 2))
    with pytest.raises(ValueError):
        SubsystemLayout.of(("S", 1))
    assert SubsystemLayout.of(("S", 2), ("E", 3)).dim == 6


def test_state_must_be_normalized():
    layout = SubsystemLayout.of(("S", 2))
    with pytest.raises(ValueError):
        StateVector(layout, [1.0, 1.0])
    with pytest.raises(ValueError):
        StateVector(layout, [1.0, 0.0, 0.0])


def test_state_is_immutable():
    s = basis_state("S", 0)
    with pytest.raises(ValueError):
        s.amplitudes[0] = 0.5


def test_tensor_of_basis_states():
    s = tensor([basis_state("S", 0), basis_state("A", 0)])
    assert s.layout.names == ("S", "A")
    assert np.array_equal(s.amplitudes, [1, 0, 0, 0])


def test_tensor_initial_state_ordering():
    c0, c1 = 0.6, 0.8
    s = tensor([qubit("S", c0, c1), basis_state("A", 0), basis_state("E", 0)])
    assert s.nonzero() == {(0, 0, 0): c0, (1, 0, 0): c1}
    assert s.amplitudes[0b000] == c0 and s.amplitudes[0b100] == c1


def test_tensor_two_copies_of_entangled_pair():
    # hand expansion of (0.6|00> + 0.8|11>)^{(x)2} on S1 A1 S2 A2
    pair = StateVector(SubsystemLayout.of(("S", 2), ("A", 2)), [0.6, 0, 0, 0.8])
    two = repeat(pair, 2)
    assert two.layout.names == ("S1", "A1", "S2", "A2")
    want = np.zeros(16)
    want[0b0000], want[0b0011], want[0b1100], want[0b1111] = 0.36, 0.48, 0.48, 0.64
    assert np.allclose(two.amplitudes, want, atol=1e-15, rtol=0)


def test_tensor_rejects_name_clash():
    with pytest.raises(LayoutConflictError):
        tensor([basis_state("S", 0), basis_state("S", 1)])


def test_apply_identity_is_exact(rng):
    s = random_state(rng, SubsystemLayout.of(("S", 2), ("A", 3)))
    out = apply(UnitaryOp(("A",), np.eye(3)), s)
    assert np.max(np.abs(out.amplitudes - s.amplitudes)) == 0


def test_premeasurement_coupling():
    s = tensor([qubit("S", 0.6, 0.8j), basis_state("A", 0)])
    out = apply(UnitaryOp(("S", "A"), CNOT), s)
    assert out.nonzero() == {(0, 0): 0.6, (1, 1): 0.8j}


def test_apply_respects_target_order():
    # control on A, target S, given in reverse layout order
    s = tensor([basis_state("S", 0), basis_state("A", 1)])
    out = apply(UnitaryOp(("A", "S"), CNOT), s)
    assert out.nonzero() == {(1, 1): 1}


def test_apply_unknown_target():
    with pytest.raises(KeyError):
        apply(UnitaryOp(("X",), np.eye(2)), basis_state("S", 0))


def test_apply_dimension_mismatch():
    with pytest.raises(ValueError):
        apply(UnitaryOp(("S",), np.eye(3)), basis_state("S", 0))


def test_non_unitary_rejected_at_construction():
    with pytest.raises(NonUnitaryError):
        UnitaryOp(("S",), [[1, 1], [0, 1]])


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dims=st.lists(st.integers(2, 3), min_size=2, max_size=4))
def test_norm_preservation_and_reversibility(seed, dims):
    rng = np.random.default_rng(seed)
    layout = SubsystemLayout(tuple((f"q{i}", d) for i, d in enumerate(dims)))
    s = random_state(rng, layout)
    k = rng.integers(1, len(dims) + 1)
    targets = [f"q{i}" for i in rng.permutation(len(dims))[:k]]
    d = int(np.prod([layout.dim_of(t) for t in targets]))
    u = UnitaryOp(targets, random_unitary(rng, d))
    out = apply(u, s)
    assert abs(out.norm - 1) <= 1e-12
    back = apply(u.inverse(), out)
    assert np.max(np.abs(back.amplitudes - s.amplitudes)) <= 1e-12


def test_apply_matches_full_kron(rng):
    layout = SubsystemLayout.of(("S", 2), ("A", 3), ("E", 2))
    s = random_state(rng, layout)
    m = random_unitary(rng, 3)
    full = np.kron(np.kron(np.eye(2), m), np.eye(2))
    assert np.allclose(apply(UnitaryOp(("A",), m), s).amplitudes, full @ s.amplitudes, atol=1e-14)


def test_born_probability_examples():
    assert born_probability(basis_state("S", 1), "S", 1) == 1.0
    assert born_probability(qubit("S", 0.6, 0.8), "S", 0) == pytest.approx(0.36, abs=1e-15)
    c0, c1 = 0.6, 0.8j
    amps = np.zeros(8, complex)
    amps[0b000], amps[0b111] = c0, c1
    s = StateVector(SubsystemLayout.of(("S", 2), ("A", 2), ("E", 2)), amps)
    assert born_probability(s, "A", 1) == pytest.approx(abs(c1) ** 2, abs=1e-15)


def test_born_probability_out_of_range():
    with pytest.raises(ValueError):
        born_probability(basis_state("S", 0), "S", 2)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_completeness_and_relative_state_consistency(seed):
    rng = np.random.default_rng(seed)
    layout = SubsystemLayout.of(("S", 2), ("A", 3), ("F", 2))
    s = random_state(rng, layout)
    for name in layout.names:
        probs = [born_probability(s, name, j) for j in range(layout.dim_of(name))]
        assert abs(sum(probs) - 1) <= 1e-12
        for j, p in enumerate(probs):
            assert abs(component_norm(s, name, j) ** 2 - p) <= 1e-12
            assert abs(relative_state(s, name, j).norm - 1) <= 1e-12


def test_relative_state_of_entangled_pair():
    s = StateVector(SubsystemLayout.of(("S", 2), ("A", 2)), [0.6, 0, 0, 0.8])
    assert np.array_equal(relative_state(s, "A", 0).amplitudes, [1, 0])
    assert relative_state(s, "A", 0).layout.names == ("S",)


def test_relative_state_of_product_is_factor(rng):
    psi = random_state(rng, SubsystemLayout.of(("S", 2)))
    s = tensor([psi, basis_state("A", 0)])
    assert relative_state(s, "A", 0).allclose(psi, atol=1e-15)


def test_relative_state_multiple_conditioning():
    amps = np.zeros(8)
    amps[0b000] = amps[0b111] = 1 / np.sqrt(2)
    s = StateVector(SubsystemLayout.of(("S", 2), ("A", 2), ("F", 2)), amps)
    r = relative_state(s, ["A", "F"], (1, 1))
    assert r.layout.names == ("S",) and np.allclose(r.amplitudes, [0, 1])


def test_relative_state_zero_component():
    s = StateVector(SubsystemLayout.of(("S", 2), ("A", 2)), [0.6, 0, 0, 0.8])
    s0 = tensor([basis_state("S", 0), basis_state("A", 0)])
    with pytest.raises(UndefinedRelativeStateError):
        relative_state(s0, "A", 1)
    with pytest.raises(ValueError):
        relative_state(s, "A", 2)


def test_json_round_trip(rng):
    s = random_state(rng, SubsystemLayout.of(("S", 2), ("E", 3)))
    doc = s.to_json()
    assert doc["layout"] == [["S", 2], ["E", 3]]
    assert StateVector.from_json(doc).allclose(s, atol=0)


def test_permuted_keeps_amplitudes(rng):
    s = random_state(rng, SubsystemLayout.of(("S", 2), ("A", 3)))
    p = s.permuted(["A", "S"])
    assert p.amplitude(S=1, A=2) == s.amplitude(S=1, A=2)


def test_complete_unitary(rng):
    v = random_state(rng, SubsystemLayout.of(("E", 4))).amplitudes
    u = complete_unitary(v)
    assert np.allclose(u[:, 0], v)
    assert np.allclose(u.conj().T @ u, np.eye(4), atol=1e-13)
