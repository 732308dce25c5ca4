"""Dense statevector simulation of the encoding and variational circuits.

States are complex128 numpy arrays of length ``2**n`` (or ``(batch, 2**n)``
for many circuits at once).  Qubit ordering is little-endian: qubit ``q`` is
bit ``q`` of the basis-state index.

Every gate function accepts a batch of states and either a scalar angle or
one angle per row, which is what makes per-input (FWP) circuits cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_QUBITS = 14


@dataclass(frozen=True)
class AnsatzConfig:
    """Circuit shape: ``depth`` layers of RZ-RY-RZ rotations plus a CNOT ring."""

    n_qubits: int
    depth: int = 2

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {self.n_qubits}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    @property
    def n_params(self) -> int:
        return self.depth * self.n_qubits * 3


def n_qubits_of(state: np.ndarray) -> int:
    dim = state.shape[-1]
    n = dim.bit_length() - 1
    if dim < 2 or (1 << n) != dim:
        raise ValueError(f"state length {dim} is not a power of two")
    return n


def zero_state(n_qubits: int) -> np.ndarray:
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    state = np.zeros(1 << n_qubits, dtype=np.complex128)
    state[0] = 1.0
    return state


def _split(state: np.ndarray, qubit: int) -> np.ndarray:
    n = n_qubits_of(state)
    if not 0 <= qubit < n:
        raise ValueError(f"qubit {qubit} out of range for {n} qubits")
    lead = state.shape[:-1]
    return state.reshape(lead + (1 << (n - qubit - 1), 2, 1 << qubit))


def _angle_column(angle, state: np.ndarray) -> np.ndarray:
    """Broadcast a scalar or per-row angle against the split view."""
    angle = np.asarray(angle, dtype=np.float64)
    if not np.all(np.isfinite(angle)):
        raise ValueError("rotation angle must be finite")
    if angle.ndim == 0:
        return angle
    if state.ndim != 2 or angle.shape != state.shape[:1]:
        raise ValueError("per-row angles need a (batch, dim) state with matching batch size")
    return angle[:, None, None]


def apply_rotation(state: np.ndarray, qubit: int, axis: str, angle) -> np.ndarray:
    """Apply ``exp(-i * angle * P / 2)`` with ``P`` in {X, Y, Z} to one qubit."""
    view = _split(state, qubit)
    theta = _angle_column(angle, state)
    c = np.cos(theta / 2)
    s = np.sin(theta / 2)
    a0 = view[..., 0, :]
    a1 = view[..., 1, :]
    out = np.empty_like(view)
    axis = axis.upper()
    if axis == "Y":
        out[..., 0, :] = c * a0 - s * a1
        out[..., 1, :] = s * a0 + c * a1
    elif axis == "X":
        out[..., 0, :] = c * a0 - 1j * s * a1
        out[..., 1, :] = -1j * s * a0 + c * a1
    elif axis == "Z":
        phase = np.exp(-0.5j * theta)
        out[..., 0, :] = phase * a0
        out[..., 1, :] = np.conj(phase) * a1
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")
    return out.reshape(state.shape)


def apply_generator(state: np.ndarray, qubit: int, axis: str) -> np.ndarray:
    """Apply the Pauli generator ``P`` itself (used by the adjoint gradient)."""
    view = _split(state, qubit)
    out = np.empty_like(view)
    a0 = view[..., 0, :]
    a1 = view[..., 1, :]
    axis = axis.upper()
    if axis == "X":
        out[..., 0, :], out[..., 1, :] = a1, a0
    elif axis == "Y":
        out[..., 0, :], out[..., 1, :] = -1j * a1, 1j * a0
    elif axis == "Z":
        out[..., 0, :], out[..., 1, :] = a0, -a1
    else:
        raise ValueError(f"unknown rotation axis {axis!r}")
    return out.reshape(state.shape)


@lru_cache(maxsize=None)
def _cnot_permutation(n_qubits: int, control: int, target: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits)
    return np.where((idx >> control) & 1, idx ^ (1 << target), idx)


def apply_cnot(state: np.ndarray, control: int, target: int) -> np.ndarray:
    n = n_qubits_of(state)
    if control == target:
        raise ValueError("control and target must differ")
    if not (0 <= control < n and 0 <= target < n):
        raise ValueError(f"CNOT qubits ({control}, {target}) out of range for {n} qubits")
    return state[..., _cnot_permutation(n, control, target)]


@lru_cache(maxsize=None)
def ring_permutation(n_qubits: int) -> np.ndarray:
    """Index map of the whole CNOT ring ``0->1, 1->2, ..., (n-1)->0``.

    ``new_state = state[perm]``; the inverse ring is ``argsort(perm)``.
    """
    perm = np.arange(1 << n_qubits)
    if n_qubits == 1:
        return perm
    for i in range(n_qubits):
        # composing gathers: applying CNOT after perm means perm[cnot_perm]
        perm = perm[_cnot_permutation(n_qubits, i, (i + 1) % n_qubits)]
    return perm


@lru_cache(maxsize=None)
def inverse_ring_permutation(n_qubits: int) -> np.ndarray:
    return np.argsort(ring_permutation(n_qubits))


def encode(x, n_qubits: int) -> np.ndarray:
    """RY angle encoding, feature ``i mod d`` on qubit ``i``.

    ``x`` may be a single feature vector or a ``(batch, d)`` matrix.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] == 0:
        raise ValueError("feature vector must be non-empty")
    if not np.all(np.isfinite(x)):
        raise ValueError("features must be finite")
    if not 1 <= n_qubits <= MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {MAX_QUBITS}], got {n_qubits}")
    d = x.shape[-1]
    # product state: build per-qubit (cos, sin) factors and Kronecker them
    half = x[..., [i % d for i in range(n_qubits)]] / 2.0
    state = np.ones(x.shape[:-1] + (1,), dtype=np.complex128)
    for q in range(n_qubits):
        factor = np.stack([np.cos(half[..., q]), np.sin(half[..., q])], axis=-1)
        # qubit q becomes the next more-significant bit
        state = (factor[..., :, None] * state[..., None, :]).reshape(x.shape[:-1] + (-1,))
    return state


def _angles(params, cfg: AnsatzConfig) -> np.ndarray:
    params = np.asarray(params, dtype=np.float64)
    if params.shape[-1] != cfg.n_params:
        raise ValueError(f"expected {cfg.n_params} circuit angles, got {params.shape[-1]}")
    if not np.all(np.isfinite(params)):
        raise ValueError("circuit angles must be finite")
    return params.reshape(params.shape[:-1] + (cfg.depth, cfg.n_qubits, 3))


def gate_sequence(cfg: AnsatzConfig):
    """Yield ``(kind, qubit, axis, flat_index)`` in application order.

    ``kind`` is ``"rot"`` or ``"ring"``; ``flat_index`` indexes the angle vector.
    """
    for layer in range(cfg.depth):
        for q in range(cfg.n_qubits):
            base = (layer * cfg.n_qubits + q) * 3
            yield "rot", q, "Z", base
            yield "rot", q, "Y", base + 1
            yield "rot", q, "Z", base + 2
        if cfg.n_qubits > 1:
            yield "ring", None, None, None


def apply_variational(state: np.ndarray, params, cfg: AnsatzConfig) -> np.ndarray:
    """Apply W(theta): per layer, RZ(gamma) RY(beta) RZ(alpha) on every qubit then a CNOT ring.

    ``params`` has ``cfg.n_params`` entries (layer-major, qubit-major, then
    alpha/beta/gamma) or shape ``(batch, n_params)`` for per-row circuits.
    """
    flat = np.asarray(params, dtype=np.float64)
    _angles(flat, cfg)
    if n_qubits_of(state) != cfg.n_qubits:
        raise ValueError("state size does not match the ansatz")
    if flat.ndim == 2 and state.ndim == 1:
        state = np.broadcast_to(state, (flat.shape[0], state.shape[0]))
    for kind, q, axis, k in gate_sequence(cfg):
        if kind == "rot":
            state = apply_rotation(state, q, axis, flat[..., k])
        else:
            state = state[..., ring_permutation(cfg.n_qubits)]
    return state


def forward_state(x, params, cfg: AnsatzConfig) -> np.ndarray:
    """Final state W(theta) U(x) |0...0>."""
    return apply_variational(encode(x, cfg.n_qubits), params, cfg)


def fidelity(a: np.ndarray, b: np.ndarray) -> float:
    return float(abs(np.vdot(a, b)) ** 2)
