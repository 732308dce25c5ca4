"""Angle gradients of expectation values, plus independent oracles for tests.

A *measurement* is one of

* ``int`` -- Pauli-Z on that qubit,
* ``(N, N)`` complex array -- one Hermitian observable for every row,
* ``(batch, N, N)`` complex array -- one observable per input row,
* a callable ``f(states, rows) -> B @ states`` with ``rows`` giving the input
  row each state belongs to (lets callers avoid materializing matrices).

``parameter_shift`` is the reference method.  ``adjoint_gradient`` returns the
same numbers from one forward and one backward sweep and is what training
uses.
"""

from __future__ import annotations

from functools import reduce

import numpy as np

from . import qstate
from .qstate import AnsatzConfig

SHIFT = np.pi / 2


def apply_measurement(states: np.ndarray, measurement, rows: np.ndarray) -> np.ndarray:
    """``B @ psi`` for each state row."""
    if callable(measurement):
        return measurement(states, rows)
    if isinstance(measurement, (int, np.integer)):
        signs = qstate_signs(states, int(measurement))
        return states * signs
    mat = np.asarray(measurement)
    if mat.ndim == 2:
        return states @ mat.T
    return np.einsum("sij,sj->si", mat[rows], states)


def qstate_signs(states: np.ndarray, qubit: int) -> np.ndarray:
    n = qstate.n_qubits_of(states)
    if not 0 <= qubit < n:
        raise ValueError(f"readout qubit {qubit} out of range for {n} qubits")
    return 1.0 - 2.0 * ((np.arange(1 << n) >> qubit) & 1)


def measure(states: np.ndarray, measurement, rows: np.ndarray | None = None) -> np.ndarray:
    states = np.atleast_2d(states)
    if rows is None:
        rows = np.arange(states.shape[0])
    if isinstance(measurement, (int, np.integer)):
        return np.abs(states) ** 2 @ qstate_signs(states, int(measurement))
    applied = apply_measurement(states, measurement, rows)
    return np.einsum("si,si->s", np.conj(states), applied).real


def _as_rows(x, params, cfg: AnsatzConfig):
    x = np.atleast_2d(np.asarray(x, dtype=np.float64))
    params = np.asarray(params, dtype=np.float64)
    if params.shape[-1] != cfg.n_params:
        raise ValueError(f"expected {cfg.n_params} circuit angles, got {params.shape[-1]}")
    batch = max(x.shape[0], params.shape[0] if params.ndim == 2 else 1)
    x = np.broadcast_to(x, (batch, x.shape[1]))
    params = np.broadcast_to(params, (batch, cfg.n_params))
    return x, params


def parameter_shift(x, params, cfg: AnsatzConfig, measurement) -> np.ndarray:
    """Exact angle gradient ``(E(t + pi/2) - E(t - pi/2)) / 2`` for every angle.

    Returns shape ``(n_params,)`` for a single input, else ``(batch, n_params)``.
    """
    single = np.ndim(x) == 1 and np.ndim(params) == 1
    x, params = _as_rows(x, params, cfg)
    batch, n_par = params.shape
    shifts = np.concatenate([SHIFT * np.eye(n_par), -SHIFT * np.eye(n_par)])
    shifted = (params[:, None, :] + shifts[None, :, :]).reshape(-1, n_par)
    rows = np.repeat(np.arange(batch), 2 * n_par)
    states = qstate.forward_state(x[rows], shifted, cfg)
    values = measure(states, measurement, rows).reshape(batch, 2, n_par)
    grad = 0.5 * (values[:, 0] - values[:, 1])
    return grad[0] if single else grad


def adjoint_gradient(x, params, cfg: AnsatzConfig, measurement):
    """Expectations and angle gradients via reverse-mode state propagation.

    Returns ``(values, grads)`` shaped like :func:`parameter_shift` output.
    """
    single = np.ndim(x) == 1 and np.ndim(params) == 1
    x, params = _as_rows(x, params, cfg)
    rows = np.arange(params.shape[0])
    psi = qstate.forward_state(x, params, cfg)
    lam = apply_measurement(psi, measurement, rows)
    values = np.einsum("si,si->s", np.conj(psi), lam).real
    grads = adjoint_sweep(psi, lam, params, cfg)
    if single:
        return values[0], grads[0]
    return values, grads


def adjoint_sweep(psi: np.ndarray, lam: np.ndarray, params: np.ndarray, cfg: AnsatzConfig) -> np.ndarray:
    """Angle gradients from the final state ``psi`` and ``lam = B psi``.

    For ``G = exp(-i t P / 2)``, ``dE/dt = Im <lam|P|psi>`` with both vectors
    taken right after the gate; gates are then undone one at a time.
    ``params`` is ``(batch, n_params)``.
    """
    params = np.broadcast_to(params, (psi.shape[0], cfg.n_params))
    grads = np.zeros(params.shape)
    n = cfg.n_qubits
    for kind, q, axis, k in reversed(list(qstate.gate_sequence(cfg))):
        if kind == "ring":
            inv = qstate.inverse_ring_permutation(n)
            psi = psi[:, inv]
            lam = lam[:, inv]
            continue
        generated = qstate.apply_generator(psi, q, axis)
        grads[:, k] = np.einsum("si,si->s", np.conj(lam), generated).imag
        angle = -params[:, k]
        psi = qstate.apply_rotation(psi, q, axis, angle)
        lam = qstate.apply_rotation(lam, q, axis, angle)
    return grads


def grad_expectation_wrt_angles(x, params, cfg: AnsatzConfig, measurement) -> np.ndarray:
    """Contract entry point: parameter-shift gradient of one measured expectation."""
    return parameter_shift(x, params, cfg, measurement)


def finite_difference(f, p, step: float = 1e-5) -> np.ndarray:
    """Central differences ``(f(p + h e_k) - f(p - h e_k)) / 2h`` per coordinate."""
    if step <= 0:
        raise ValueError("step must be positive")
    p = np.array(p, dtype=np.float64)
    flat = p.reshape(-1)
    grad = np.empty_like(flat)
    for k in range(flat.size):
        orig = flat[k]
        flat[k] = orig + step
        up = f(p)
        flat[k] = orig - step
        down = f(p)
        flat[k] = orig
        if not (np.isfinite(up) and np.isfinite(down)):
            raise ArithmeticError(f"non-finite function value at coordinate {k}")
        grad[k] = (up - down) / (2.0 * step)
    return grad.reshape(p.shape)


# --- dense Kronecker-product oracle ---------------------------------------

_I2 = np.eye(2, dtype=np.complex128)
_P0 = np.diag([1.0, 0.0]).astype(np.complex128)
_P1 = np.diag([0.0, 1.0]).astype(np.complex128)
_X = np.array([[0, 1], [1, 0]], dtype=np.complex128)
_ORACLE_MAX_QUBITS = 4


def _rotation_matrix(axis: str, angle: float) -> np.ndarray:
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    if axis == "X":
        return np.array([[c, -1j * s], [-1j * s, c]])
    if axis == "Y":
        return np.array([[c, -s], [s, c]], dtype=np.complex128)
    return np.array([[np.exp(-0.5j * angle), 0], [0, np.exp(0.5j * angle)]])


def _embed(ops: dict[int, np.ndarray], n: int) -> np.ndarray:
    # highest qubit is the leftmost Kronecker factor (little-endian indices)
    return reduce(np.kron, [ops.get(q, _I2) for q in reversed(range(n))])


def single_qubit_unitary(gate: np.ndarray, qubit: int, n: int) -> np.ndarray:
    return _embed({qubit: gate}, n)


def cnot_unitary(control: int, target: int, n: int) -> np.ndarray:
    return _embed({control: _P0}, n) + _embed({control: _P1, target: _X}, n)


def dense_circuit_oracle(x, params, cfg: AnsatzConfig) -> np.ndarray:
    """Final state from explicit ``2**n x 2**n`` matrices (n <= 4 only)."""
    n = cfg.n_qubits
    if n > _ORACLE_MAX_QUBITS:
        raise ValueError(f"dense oracle supports at most {_ORACLE_MAX_QUBITS} qubits")
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("feature vector must be non-empty")
    angles = np.asarray(params, dtype=np.float64).reshape(cfg.depth, n, 3)
    unitary = np.eye(1 << n, dtype=np.complex128)
    for q in range(n):
        unitary = single_qubit_unitary(_rotation_matrix("Y", x[q % x.size]), q, n) @ unitary
    for layer in range(cfg.depth):
        for q in range(n):
            alpha, beta, gamma = angles[layer, q]
            block = _rotation_matrix("Z", gamma) @ _rotation_matrix("Y", beta) @ _rotation_matrix("Z", alpha)
            unitary = single_qubit_unitary(block, q, n) @ unitary
        if n > 1:
            for q in range(n):
                unitary = cnot_unitary(q, (q + 1) % n, n) @ unitary
    initial = np.zeros(1 << n, dtype=np.complex128)
    initial[0] = 1.0
    return unitary @ initial
