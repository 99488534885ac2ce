import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qkcompose import circuit
from qkcompose.circuit import CircuitDescriptor, DescriptorParseError

import oracles


def random_circuit(n, L, rng):
    layers = circuit.enumerate_layers(n)
    return CircuitDescriptor(n, tuple(layers[i] for i in rng.integers(len(layers), size=L)))


@pytest.mark.parametrize("n", range(1, 7))
def test_enumerate_layers_matches_brute_force(n):
    got = circuit.enumerate_layers(n)
    assert got == oracles.brute_force_layers(n)
    assert got[0] == (0,) * n


def test_enumerate_layer_counts():
    # brute-force counts over all 6**n code tuples
    assert [len(circuit.enumerate_layers(n)) for n in range(1, 7)] == [3, 10, 37, 151, 597, 2327]


def test_layer_space_formula_example():
    assert circuit.layer_space_size_formula(5, 4, 1, 1) == 70


@settings(max_examples=100, deadline=None)
@given(g=st.integers(1, 8), n=st.integers(1, 8), K=st.integers(1, 30), L=st.integers(1, 10))
def test_layer_space_formula_factorials(g, n, K, L):
    expected = math.factorial(g + n - 1) // (math.factorial(n) * math.factorial(g - 1)) * K * L
    assert circuit.layer_space_size_formula(g, n, K, L) == expected


@pytest.mark.parametrize("args", [(0, 1, 1, 1), (5, 0, 1, 1), (5, 4, -1, 1), (5, 4, 1, 1.5)])
def test_layer_space_formula_rejects(args):
    with pytest.raises(ValueError):
        circuit.layer_space_size_formula(*args)


def test_descriptor_validation():
    with pytest.raises(ValueError, match="not free"):
        CircuitDescriptor(2, ((1, 3),))
    with pytest.raises(ValueError, match="control"):
        CircuitDescriptor(2, ((3, 0),))
    with pytest.raises(ValueError):
        CircuitDescriptor(2, ((0, 0, 0),))
    with pytest.raises(ValueError):
        CircuitDescriptor(2, ((6, 0),))


def test_matrix_layout_and_params():
    c = CircuitDescriptor.from_matrix([[2, 0], [0, 3], [2, 2]])
    assert c.depth == 2 and c.n_qubits == 3
    assert c.layers == ((2, 0, 2), (0, 3, 2))
    assert circuit.param_count(c) == 3
    assert circuit.rz_qubits(c) == [0, 2, 2]
    np.testing.assert_array_equal(c.matrix, [[2, 0], [0, 3], [2, 2]])


def test_extend_theta_inherits_then_defaults():
    th = circuit.extend_theta(np.array([0.3]), (2, 0, 2))
    np.testing.assert_array_equal(th, [0.3, 1.0, 1.0])


def test_serialize_format():
    c = CircuitDescriptor.from_matrix([[1, 2, 0], [0, 0, 3]])
    assert circuit.serialize(c) == "1,2,0\n0,0,3"
    assert str(c) == "1,2,0;0,0,3"


@settings(max_examples=80, deadline=None)
@given(n=st.integers(1, 5), L=st.integers(0, 6), seed=st.integers(0, 10**6))
def test_serialize_round_trip(n, L, seed):
    c = random_circuit(n, L, np.random.default_rng(seed))
    assert circuit.deserialize(circuit.serialize(c)) == c
    assert circuit.deserialize(circuit.serialize(c, sep=";")) == c
    if L:  # a zero-depth descriptor is all newlines, so an extra one adds a row
        assert circuit.deserialize(circuit.serialize(c) + "\n") == c


@pytest.mark.parametrize("text,row,col", [
    ("1,x\n0,0", 0, 1),
    ("1,7\n0,0", 0, 1),
    ("3,0\n0,0", 0, 0),
    ("0,1\n0,3", 1, 1),
])
def test_deserialize_locates_errors(text, row, col):
    with pytest.raises(DescriptorParseError) as info:
        circuit.deserialize(text)
    assert (info.value.row, info.value.col) == (row, col)


def test_deserialize_ragged_rows():
    with pytest.raises(DescriptorParseError, match="lengths"):
        circuit.deserialize("1,0\n0")


@pytest.mark.parametrize("n,L", [(1, 3), (2, 4), (3, 5), (4, 5)])
def test_circuit_states_match_dense(n, L, backend):
    rng = np.random.default_rng(10 * n + L)
    for _ in range(5):
        c = random_circuit(n, L, rng)
        theta = rng.uniform(0, 2 * np.pi, circuit.param_count(c))
        X = rng.uniform(0, 2 * np.pi, size=(4, n))
        S = circuit.circuit_states(c, theta, X, backend=backend)
        for i in range(4):
            ref = oracles.circuit_unitary(c.matrix, theta, X[i]) @ oracles.encode(X[i])
            np.testing.assert_allclose(S[i], ref, atol=1e-12)


def test_single_vector_application(backend):
    c = CircuitDescriptor.from_matrix([[2, 0, 1], [2, 3, 0]])
    x = np.array([0.4, 1.3])
    theta = np.array([0.7, 1.9])  # both R_Z in layer 0
    psi = circuit.apply_parametrized_circuit(c, theta, x, oracles.encode(x), backend)
    np.testing.assert_allclose(psi, oracles.circuit_unitary(c.matrix, theta, x) @ oracles.encode(x),
                               atol=1e-13)


def test_default_rz_undoes_encoding_phase():
    # R_Z(x) right after the encoding leaves H^n|0> up to nothing
    c = CircuitDescriptor.from_matrix([[2], [2]])
    x = np.array([[0.8, 2.1]])
    S = circuit.circuit_states(c, circuit.default_theta(c), x)
    np.testing.assert_allclose(S[0], np.full(4, 0.5), atol=1e-14)


def test_theta_checks():
    c = CircuitDescriptor.from_matrix([[2], [0]])
    with pytest.raises(ValueError, match="R_Z"):
        circuit.circuit_states(c, [1.0, 2.0], np.zeros((1, 2)))
    with pytest.raises(ValueError, match="finite"):
        circuit.circuit_states(c, [np.nan], np.zeros((1, 2)))
    with pytest.raises(ValueError, match="dimension"):
        circuit.circuit_states(c, [1.0], np.zeros((1, 3)))


def test_backends_agree_bitwise():
    from qkcompose import _backend
    if _backend.available() != ["cython", "python"]:
        pytest.skip("compiled core not built")
    rng = np.random.default_rng(7)
    c = random_circuit(4, 6, rng)
    theta = rng.uniform(0, 6, circuit.param_count(c))
    X = rng.uniform(0, 6, (20, 4))
    a = circuit.circuit_states(c, theta, X, backend="cython")
    b = circuit.circuit_states(c, theta, X, backend="python")
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-15)
