import numpy as np
import pytest
from hypothesis import given, strategies as st

from pvqc import gradients, observable, qstate
from pvqc.qstate import AnsatzConfig

from conftest import rel_err


def energy(x, cfg, measurement):
    return lambda p: float(gradients.measure(qstate.forward_state(x, p, cfg), measurement)[0])


def test_closed_form_single_qubit():
    cfg = AnsatzConfig(1, 1)
    for theta in (np.pi / 2, 0.7, -2.3):
        grad = gradients.parameter_shift([0.0], [0.0, theta, 0.0], cfg, 0)
        assert abs(grad[1] + np.sin(theta)) < 1e-14
    grad = gradients.parameter_shift([0.0], [0.0, np.pi / 2, 0.0], cfg, 0)
    assert abs(grad[1] + 1.0) < 1e-14


def test_zero_observable_zero_gradient():
    cfg = AnsatzConfig(2, 2)
    zero = np.zeros((4, 4), complex)
    assert not np.any(gradients.parameter_shift([0.0, 0.0], np.zeros(cfg.n_params), cfg, zero))


def test_random_three_qubit_matches_fd(nprng):
    cfg = AnsatzConfig(3, 2)
    x = nprng.uniform(-np.pi, np.pi, 2)
    params = nprng.uniform(0, 2 * np.pi, cfg.n_params)
    mat = observable.hermitian_from_params(nprng.normal(size=64))
    shift = gradients.parameter_shift(x, params, cfg, mat)
    fd = gradients.finite_difference(energy(x, cfg, mat), params)
    rel, ab = rel_err(shift, fd)
    assert rel < 1e-5 and ab < 1e-8


@pytest.mark.parametrize("measurement_kind", ["pauli", "matrix", "stack", "callable"])
def test_adjoint_equals_parameter_shift(measurement_kind, nprng):
    cfg = AnsatzConfig(3, 2)
    x = nprng.normal(size=(4, 2))
    params = nprng.uniform(0, 6, (4, cfg.n_params))
    mats = np.array([observable.hermitian_from_params(nprng.normal(size=64)) for _ in range(4)])
    measurement = {
        "pauli": 1,
        "matrix": mats[0],
        "stack": mats,
        "callable": lambda states, rows: np.einsum("sij,sj->si", mats[rows], states),
    }[measurement_kind]
    values, adj = gradients.adjoint_gradient(x, params, cfg, measurement)
    shift = gradients.parameter_shift(x, params, cfg, measurement)
    np.testing.assert_allclose(adj, shift, atol=1e-12)
    np.testing.assert_allclose(values, gradients.measure(qstate.forward_state(x, params, cfg), measurement), atol=1e-13)


def test_grad_entry_point_is_parameter_shift(nprng):
    cfg = AnsatzConfig(2, 1)
    params = nprng.normal(size=cfg.n_params)
    np.testing.assert_array_equal(
        gradients.grad_expectation_wrt_angles([0.1, 0.2], params, cfg, 0),
        gradients.parameter_shift([0.1, 0.2], params, cfg, 0),
    )


def test_wrong_param_count():
    with pytest.raises(ValueError):
        gradients.parameter_shift([0.0], np.zeros(4), AnsatzConfig(1, 1), 0)


@given(st.integers(1, 3), st.integers(0, 2**32 - 1))
def test_shift_periodicity(n, seed):
    rng = np.random.default_rng(seed)
    cfg = AnsatzConfig(n, 2)
    x = rng.normal(size=2)
    params = rng.uniform(-3, 3, cfg.n_params)
    mat = observable.hermitian_from_params(rng.normal(size=4**n))
    a = gradients.parameter_shift(x, params, cfg, mat)
    b = gradients.parameter_shift(x, params + 2 * np.pi, cfg, mat)
    assert np.max(np.abs(a - b)) < 1e-10


@given(st.integers(1, 3), st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_linear_in_observable(n, seed, alpha):
    rng = np.random.default_rng(seed)
    cfg = AnsatzConfig(n, 1)
    x = rng.normal(size=2)
    params = rng.uniform(-3, 3, cfg.n_params)
    values = rng.normal(size=4**n)
    g = gradients.parameter_shift(x, params, cfg, observable.hermitian_from_params(values))
    g_scaled = gradients.parameter_shift(x, params, cfg, observable.hermitian_from_params(alpha * values))
    assert np.max(np.abs(g_scaled - alpha * g)) < 1e-10


def test_finite_difference_examples():
    np.testing.assert_allclose(gradients.finite_difference(lambda p: p @ p, [1.0, 2.0]), [2, 4], atol=1e-8)
    np.testing.assert_array_equal(gradients.finite_difference(lambda p: 3.0, [1.0, 2.0, 3.0]), np.zeros(3))
    assert abs(gradients.finite_difference(lambda p: np.sin(p[0]), [0.0])[0] - 1) < 1e-10


def test_finite_difference_errors():
    with pytest.raises(ArithmeticError):
        gradients.finite_difference(lambda p: np.inf, [0.0])
    with pytest.raises(ValueError):
        gradients.finite_difference(lambda p: 0.0, [0.0], step=0)


def test_oracle_examples():
    cfg = AnsatzConfig(3, 2)
    np.testing.assert_allclose(gradients.dense_circuit_oracle(np.zeros(2), np.zeros(cfg.n_params), cfg), qstate.zero_state(3))
    np.testing.assert_allclose(
        gradients.dense_circuit_oracle([0.0], [0.0, np.pi, 0.0], AnsatzConfig(1, 1)), [0, 1], atol=1e-15
    )
    with pytest.raises(ValueError):
        gradients.dense_circuit_oracle([0.0], np.zeros(15), AnsatzConfig(5, 1))


def test_oracle_matches_simulator_100(nprng):
    worst = 0.0
    for _ in range(100):
        cfg = AnsatzConfig(int(nprng.integers(1, 5)), int(nprng.integers(1, 4)))
        x = nprng.uniform(-np.pi, np.pi, int(nprng.integers(1, 5)))
        params = nprng.uniform(0, 2 * np.pi, cfg.n_params)
        diff = qstate.forward_state(x, params, cfg) - gradients.dense_circuit_oracle(x, params, cfg)
        worst = max(worst, float(np.max(np.abs(diff))))
    assert worst < 1e-10
