"""su(n) in the fundamental representation.

The basis ``T_a = i * lambda_a / 2`` (generalized Gell-Mann matrices) is
orthonormal for the positive pairing ``(A, B) = -2 tr(AB)`` on su(n), which
extends sesquilinearly as ``2 tr(A^dagger B)``.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


@lru_cache(maxsize=None)
def _gell_mann(n: int) -> np.ndarray:
    mats = []
    for j in range(n):
        for k in range(j + 1, n):
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = m[k, j] = 1.0
            mats.append(m)
            m = np.zeros((n, n), dtype=complex)
            m[j, k] = -1j
            m[k, j] = 1j
            mats.append(m)
    for d in range(1, n):
        m = np.zeros((n, n), dtype=complex)
        m[np.arange(d), np.arange(d)] = 1.0
        m[d, d] = -d
        mats.append(m * np.sqrt(2.0 / (d * (d + 1))))
    out = np.array(mats)
    out.setflags(write=False)
    return out


def su_basis(n: int) -> np.ndarray:
    """Orthonormal basis of su(n), shape ``(n*n - 1, n, n)``.

    For n = 2 this is ``(i sigma_1/2, i sigma_2/2, i sigma_3/2)``.
    """
    if n < 2:
        raise ValueError(f"representation dimension must be >= 2, got {n}")
    return 0.5j * _gell_mann(n)


def lie_dim(n: int) -> int:
    return n * n - 1


def to_coeffs(values: np.ndarray, n: int) -> np.ndarray:
    """Real coordinates of anti-Hermitian matrices in the ``su_basis``.

    ``values`` has trailing shape ``(n, n)``; the result has trailing shape
    ``(n*n - 1,)``. Any component outside su(n) is dropped.
    """
    T = su_basis(n)
    c = -2.0 * np.einsum("...ij,aji->...a", values, T)
    return c.real


def from_coeffs(coeffs: np.ndarray, n: int) -> np.ndarray:
    T = su_basis(n)
    return np.einsum("...a,aij->...ij", coeffs, T)


def adjoint_matrix(U: np.ndarray) -> np.ndarray:
    """Real matrices ``R`` with ``U T_b U^dagger = sum_a R[a, b] T_a``.

    ``U`` has shape ``(..., n, n)``; the result ``(..., d, d)`` is orthogonal
    when ``U`` is unitary.
    """
    n = U.shape[-1]
    T = su_basis(n)
    conj = np.einsum("...ij,bjk,...lk->...bil", U, T, U.conj())
    return (-2.0 * np.einsum("aji,...bij->...ab", T, conj)).real


def expm_antihermitian(A: np.ndarray) -> np.ndarray:
    """Batched exponential of anti-Hermitian matrices, unitary to rounding."""
    H = 1j * A
    H = 0.5 * (H + np.conj(np.swapaxes(H, -1, -2)))
    w, V = np.linalg.eigh(H)
    return np.einsum("...ij,...j,...kj->...ik", V, np.exp(-1j * w), V.conj())
