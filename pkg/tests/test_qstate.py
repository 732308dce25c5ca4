import numpy as np
import pytest
from hypothesis import given, strategies as st

from pvqc import qstate
from pvqc.gradients import cnot_unitary, dense_circuit_oracle, single_qubit_unitary, _rotation_matrix
from pvqc.qstate import AnsatzConfig

from conftest import random_state

SQ2 = np.sqrt(0.5)


def test_zero_state_examples():
    np.testing.assert_array_equal(qstate.zero_state(2), [1, 0, 0, 0])
    np.testing.assert_array_equal(qstate.zero_state(1), [1, 0])
    big = qstate.zero_state(12)
    assert big.shape == (4096,) and big[0] == 1 and np.count_nonzero(big) == 1


@pytest.mark.parametrize("n", [0, 15, -1])
def test_zero_state_range(n):
    with pytest.raises(ValueError):
        qstate.zero_state(n)


def test_ansatz_config():
    cfg = AnsatzConfig(3, 2)
    assert cfg.n_params == 18 and cfg.dim == 8
    for bad in [(0, 1), (1, 0), (15, 1)]:
        with pytest.raises(ValueError):
            AnsatzConfig(*bad)


def test_rotation_examples():
    zero = qstate.zero_state(1)
    np.testing.assert_allclose(qstate.apply_rotation(zero, 0, "Y", np.pi), [0, 1], atol=1e-15)
    np.testing.assert_allclose(qstate.apply_rotation(zero, 0, "Y", np.pi / 2), [SQ2, SQ2], atol=1e-15)
    for theta in (0.3, -2.0, 5.5):
        np.testing.assert_allclose(qstate.apply_rotation(zero, 0, "Z", theta), [np.exp(-0.5j * theta), 0], atol=1e-15)


def test_rotation_bad_qubit():
    with pytest.raises(ValueError):
        qstate.apply_rotation(qstate.zero_state(2), 2, "Y", 0.1)
    with pytest.raises(ValueError):
        qstate.apply_rotation(qstate.zero_state(2), 0, "W", 0.1)


def test_cnot_examples(nprng):
    ket10 = np.zeros(4, complex)
    ket10[0b10] = 1
    out = qstate.apply_cnot(ket10, control=1, target=0)
    assert out[0b11] == 1 and np.count_nonzero(out) == 1
    np.testing.assert_array_equal(qstate.apply_cnot(qstate.zero_state(2), 0, 1), qstate.zero_state(2))
    s = random_state(nprng, 3)
    np.testing.assert_array_equal(qstate.apply_cnot(qstate.apply_cnot(s, 0, 2), 0, 2), s)


@pytest.mark.parametrize("c,t", [(0, 0), (0, 3), (-1, 1)])
def test_cnot_rejects(c, t):
    with pytest.raises(ValueError):
        qstate.apply_cnot(qstate.zero_state(3), c, t)


def test_gates_match_kronecker_construction(nprng):
    for n in (1, 2, 3):
        for _ in range(5):
            s = random_state(nprng, n)
            for q in range(n):
                for axis in "XYZ":
                    theta = nprng.uniform(-7, 7)
                    dense = single_qubit_unitary(_rotation_matrix(axis, theta), q, n) @ s
                    assert np.max(np.abs(qstate.apply_rotation(s, q, axis, theta) - dense)) < 1e-12
            for c in range(n):
                for t in range(n):
                    if c != t:
                        np.testing.assert_array_equal(qstate.apply_cnot(s, c, t), cnot_unitary(c, t, n) @ s)


def test_encode_examples():
    np.testing.assert_allclose(qstate.encode([0, 0], 2), [1, 0, 0, 0], atol=1e-15)
    np.testing.assert_allclose(qstate.encode([np.pi], 1), [0, 1], atol=1e-15)
    state = qstate.encode([np.pi / 2, 0], 4)
    # cos(pi/4)**2 from qubits 0 and 2; frozen from the tensor-product expansion
    assert abs(state[0] - 0.5) < 1e-15
    assert abs(state[0b0101] - 0.5) < 1e-15


def test_encode_cyclic_repetition_matches_oracle():
    x = np.array([0.3, -1.1, 2.0])
    expected = qstate.zero_state(4)
    for q, angle in enumerate([0.3, -1.1, 2.0, 0.3]):
        expected = single_qubit_unitary(_rotation_matrix("Y", angle), q, 4) @ expected
    np.testing.assert_allclose(qstate.encode(x, 4), expected, atol=1e-14)


def test_encode_errors():
    with pytest.raises(ValueError):
        qstate.encode([], 2)
    with pytest.raises(ValueError):
        qstate.encode([np.nan], 2)


def test_variational_examples():
    for depth in (1, 3):
        cfg = AnsatzConfig(3, depth)
        out = qstate.apply_variational(qstate.zero_state(3), np.zeros(cfg.n_params), cfg)
        assert qstate.fidelity(out, qstate.zero_state(3)) > 1 - 1e-12
    cfg = AnsatzConfig(1, 1)
    out = qstate.apply_variational(qstate.zero_state(1), [0, np.pi, 0], cfg)
    assert qstate.fidelity(out, [0, 1]) > 1 - 1e-12
    with pytest.raises(ValueError):
        qstate.apply_variational(qstate.zero_state(2), np.zeros(5), AnsatzConfig(2, 1))


def test_forward_state_zero_input():
    cfg = AnsatzConfig(3, 2)
    np.testing.assert_allclose(qstate.forward_state(np.zeros(2), np.zeros(cfg.n_params), cfg), qstate.zero_state(3), atol=1e-15)


def test_forward_state_seed0_against_oracle():
    rng = np.random.default_rng(0)
    cfg = AnsatzConfig(3, 2)
    x = rng.uniform(-np.pi, np.pi, 2)
    params = rng.uniform(0, 2 * np.pi, cfg.n_params)
    assert np.max(np.abs(qstate.forward_state(x, params, cfg) - dense_circuit_oracle(x, params, cfg))) < 1e-10


def test_batched_matches_rowwise(nprng):
    cfg = AnsatzConfig(3, 2)
    x = nprng.normal(size=(5, 2))
    params = nprng.normal(size=(5, cfg.n_params))
    batched = qstate.forward_state(x, params, cfg)
    for i in range(5):
        np.testing.assert_array_equal(batched[i], qstate.forward_state(x[i], params[i], cfg))


@given(st.integers(1, 4), st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_norm_preserved(n, depth, seed):
    rng = np.random.default_rng(seed)
    cfg = AnsatzConfig(n, depth)
    psi = qstate.forward_state(rng.normal(size=3), rng.uniform(-10, 10, cfg.n_params), cfg)
    assert abs(np.vdot(psi, psi).real - 1) < 1e-9


def test_deterministic():
    cfg = AnsatzConfig(4, 2)
    x = np.array([0.1, 0.2])
    p = np.linspace(0, 6, cfg.n_params)
    a = qstate.forward_state(x, p, cfg)
    b = qstate.forward_state(x, p, cfg)
    assert a.tobytes() == b.tobytes()
