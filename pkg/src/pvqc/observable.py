"""Hermitian observables from N**2 real parameters.

Parameter layout for an ``N x N`` matrix (``N = 2**n``)::

    [d_11 .. d_NN | a_ij (i<j, row-major) | c_ij (i<j, row-major)]

with ``B[i, i] = d_ii``, ``B[i, j] = a_ij + 1j * c_ij`` and
``B[j, i] = conj(B[i, j])`` for ``i < j``.

The expectation is linear in the parameters, ``<psi|B|psi> = b . g(psi)``,
where ``g`` is :func:`expectation_grad_params`.  Training code leans on that
identity so it never has to materialize one matrix per sample.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .qstate import n_qubits_of

IMAG_TOLERANCE = 1e-10


class ConsistencyError(RuntimeError):
    """A numerical invariant that should hold by construction was violated."""


class ConvergenceError(ArithmeticError):
    pass


@lru_cache(maxsize=16)
def upper_indices(dim: int) -> tuple[np.ndarray, np.ndarray]:
    rows, cols = np.triu_indices(dim, k=1)
    return rows, cols


def n_params_for(n_qubits: int) -> int:
    return 1 << (2 * n_qubits)


def _dim_from_count(count: int) -> int:
    dim = int(round(np.sqrt(count)))
    if dim * dim != count or dim < 2 or dim & (dim - 1):
        raise ValueError(f"{count} is not N**2 for a power-of-two N >= 2")
    return dim


def hermitian_from_params(values) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    if values.ndim != 1:
        raise ValueError("observable parameters must be a flat vector")
    if not np.all(np.isfinite(values)):
        raise ValueError("observable parameters must be finite")
    dim = _dim_from_count(values.size)
    n_off = dim * (dim - 1) // 2
    rows, cols = upper_indices(dim)
    upper = values[dim:dim + n_off] + 1j * values[dim + n_off:]
    mat = np.zeros((dim, dim), dtype=np.complex128)
    mat[rows, cols] = upper
    mat[cols, rows] = np.conj(upper)
    mat[np.diag_indices(dim)] = values[:dim]
    return mat


def params_from_hermitian(mat: np.ndarray) -> np.ndarray:
    mat = np.asarray(mat)
    dim = mat.shape[0]
    if mat.shape != (dim, dim):
        raise ValueError("expected a square matrix")
    rows, cols = upper_indices(dim)
    upper = mat[rows, cols]
    return np.concatenate([np.real(np.diag(mat)), np.real(upper), np.imag(upper)]).astype(np.float64)


def expectation(state: np.ndarray, mat: np.ndarray) -> float:
    """Real expectation ``<psi|B|psi>``; a non-negligible imaginary part raises."""
    state = np.asarray(state)
    if state.ndim != 1 or mat.shape != (state.size, state.size):
        raise ValueError(f"state of length {state.size} does not fit a {mat.shape} observable")
    value = np.vdot(state, mat @ state)
    if abs(value.imag) >= IMAG_TOLERANCE:
        raise ConsistencyError(f"expectation has imaginary residue {value.imag:.3e}")
    return float(value.real)


def pauli_z_signs(n_qubits: int, qubit: int) -> np.ndarray:
    if not 0 <= qubit < n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {n_qubits} qubits")
    bits = (np.arange(1 << n_qubits) >> qubit) & 1
    return 1.0 - 2.0 * bits


def pauli_z_expectation(state: np.ndarray, qubit: int):
    """``<Z_qubit>`` in O(N); accepts a single state or a batch of rows."""
    signs = pauli_z_signs(n_qubits_of(state), qubit)
    return np.abs(state) ** 2 @ signs


def outer_to_params(outer: np.ndarray) -> np.ndarray:
    """Map ``M[i, j] = sum_s w_s conj(psi_s[i]) psi_s[j]`` to the parameter gradient."""
    dim = outer.shape[-1]
    rows, cols = upper_indices(dim)
    upper = outer[..., rows, cols]
    diag = np.real(np.diagonal(outer, axis1=-2, axis2=-1))
    return np.concatenate([diag, 2.0 * upper.real, -2.0 * upper.imag], axis=-1)


def expectation_grad_params(state: np.ndarray) -> np.ndarray:
    """Gradient of ``<psi|B(b)|psi>`` with respect to ``b``.

    Equal to ``conj(psi_k) psi_l`` per complex entry; in the real layout:
    ``|psi_i|**2`` for diagonals, ``2 Re(conj(psi_i) psi_j)`` and
    ``-2 Im(conj(psi_i) psi_j)`` for the off-diagonal pairs.  Batched input
    gives one row per state.
    """
    state = np.asarray(state, dtype=np.complex128)
    outer = np.conj(state)[..., :, None] * state[..., None, :]
    return outer_to_params(outer)


def weighted_grad_params(states: np.ndarray, weights) -> np.ndarray:
    """``sum_s weights[s] * expectation_grad_params(states[s])`` without per-row vectors."""
    return packed_grad(states, np.asarray(weights, dtype=np.float64)[:, None])[:, 0]


def batch_expectation(states: np.ndarray, values) -> np.ndarray:
    """Expectations of a batch of states under one shared parameter vector."""
    mat = hermitian_from_params(values)
    raw = np.einsum("si,ij,sj->s", np.conj(states), mat, states)
    if np.any(np.abs(raw.imag) >= IMAG_TOLERANCE):
        raise ConsistencyError("expectation has non-negligible imaginary residue")
    return raw.real


@lru_cache(maxsize=8)
def _full_layout(dim: int):
    """Per matrix entry ``(r, c)`` (flattened): where its real and imaginary
    parts live in the parameter vector, and the sign of the imaginary part."""
    n_off = dim * (dim - 1) // 2
    rows, cols = upper_indices(dim)
    slot = np.zeros((dim, dim), dtype=np.int64)
    slot[rows, cols] = np.arange(n_off)
    slot[cols, rows] = np.arange(n_off)
    r, c = np.indices((dim, dim))
    pos_re = np.where(r == c, r, dim + slot).ravel()
    pos_im = np.where(r == c, 0, dim + n_off + slot).ravel()
    sign_im = np.sign(c - r).astype(np.float64).ravel()
    return pos_re, pos_im, sign_im


@lru_cache(maxsize=8)
def _row_offsets(dim: int) -> np.ndarray:
    """Start of each matrix row's strictly-upper entries in row-major packed order."""
    return np.concatenate([[0], np.cumsum(np.arange(dim - 1, 0, -1))]).astype(np.int64)


_CHUNK_ELEMENTS = 1 << 22


def _block_rows(dim: int, width: int) -> int:
    return max(1, min(dim, _CHUNK_ELEMENTS // max(1, dim * width)))


def apply_packed(stack: np.ndarray, states: np.ndarray) -> np.ndarray:
    """``out[s, :, k] = B(stack[:, k]) @ states[s]`` for a stack of parameter vectors.

    ``stack`` is ``(N**2, K)``; no per-column matrix is ever materialized.
    Columns are gathered a block of matrix rows at a time.
    """
    states = np.atleast_2d(states)
    batch, dim = states.shape
    width = stack.shape[1]
    if stack.shape[0] != dim * dim:
        raise ValueError(f"parameter stack has {stack.shape[0]} rows, expected {dim * dim}")
    pos_re, pos_im, sign_im = _full_layout(dim)
    both = np.concatenate([states.real, states.imag])
    out_re = np.zeros((batch, dim * width))
    out_im = np.zeros((batch, dim * width))
    step = _block_rows(dim, width)
    for j0 in range(0, dim, step):
        j1 = min(dim, j0 + step)
        sl = slice(j0 * dim, j1 * dim)
        # entry (j, i) of B; B[i, j] = re(j, i) - 1j * im(j, i)
        re = stack[pos_re[sl]].reshape(j1 - j0, dim * width)
        im = (stack[pos_im[sl]] * sign_im[sl, None]).reshape(j1 - j0, dim * width)
        x = both[:, j0:j1] @ re
        y = both[:, j0:j1] @ im
        out_re += x[:batch] + y[batch:]
        out_im += x[batch:] - y[:batch]
    return (out_re + 1j * out_im).reshape(batch, dim, width)


def packed_grad(states: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``out[:, k] = sum_s weights[s, k] * expectation_grad_params(states[s])``.

    Returns an ``(N**2, K)`` stack built block by block from
    ``M_k = sum_s w_sk conj(psi_s) psi_s^T``.
    """
    states = np.atleast_2d(states)
    batch, dim = states.shape
    weights = np.asarray(weights, dtype=np.float64).reshape(batch, -1)
    width = weights.shape[1]
    n_off = dim * (dim - 1) // 2
    rows, cols = upper_indices(dim)
    offsets = _row_offsets(dim)
    out = np.empty((dim * dim, width))
    right = (states[:, :, None] * weights[:, None, :]).reshape(batch, dim * width)
    left = np.conj(states).T
    step = _block_rows(dim, width)
    for i0 in range(0, dim, step):
        i1 = min(dim, i0 + step)
        block = (left[i0:i1] @ right).reshape((i1 - i0) * dim, width)
        local = np.arange(i1 - i0)
        out[i0:i1] = block[local * dim + i0 + local].real
        lo = offsets[i0]
        hi = offsets[i1] if i1 < dim else n_off
        picked = block[(rows[lo:hi] - i0) * dim + cols[lo:hi]]
        out[dim + lo:dim + hi] = 2.0 * picked.real
        out[dim + n_off + lo:dim + n_off + hi] = -2.0 * picked.imag
    return out


def eigen_bounds(mat: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> tuple[float, float]:
    """Extreme eigenvalues of a Hermitian matrix by cyclic complex Jacobi rotations.

    Test utility, limited to dimension 64.
    """
    eigenvalues = jacobi_eigenvalues(mat, tol=tol, max_sweeps=max_sweeps)
    return float(eigenvalues.min()), float(eigenvalues.max())


def jacobi_eigenvalues(mat: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    a = np.array(mat, dtype=np.complex128)
    dim = a.shape[0]
    if a.shape != (dim, dim):
        raise ValueError("expected a square matrix")
    if dim > 64:
        raise ValueError("eigen_bounds is limited to dimension 64")
    for _ in range(max_sweeps):
        off = np.abs(a - np.diag(np.diag(a)))
        if off.max(initial=0.0) < tol:
            return np.real(np.diag(a))
        for p in range(dim - 1):
            for q in range(p + 1, dim):
                apq = a[p, q]
                r = abs(apq)
                if r < tol * 1e-3:
                    continue
                # phase D = diag(1, conj(apq)/r) makes the pivot real, then a
                # real rotation zeroes it: U = D R, A <- U^H A U
                phase = np.conj(apq) / r
                alpha = a[p, p].real
                beta = a[q, q].real
                theta = 0.5 * np.arctan2(2.0 * r, alpha - beta)
                c, s = np.cos(theta), np.sin(theta)
                u = np.array([[c, -s], [s * phase, c * phase]], dtype=np.complex128)
                cols = a[:, [p, q]] @ u
                a[:, p], a[:, q] = cols[:, 0], cols[:, 1]
                rows = np.conj(u).T @ a[[p, q], :]
                a[p, :], a[q, :] = rows[0], rows[1]
                a[p, q] = a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    raise ConvergenceError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
