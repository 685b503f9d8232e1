"""Exterior algebra over n modes as occupation bitmasks.

Basis state ``S`` (bit i set <=> v_i present) is ``v_{i1} ^ v_{i2} ^ ...``
with ascending indices. ``ext(v_i)`` carries the sign ``(-1)^{#bits of S
below i}``, so operators on a new, higher mode never disturb the signs of
lower ones.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np
import scipy.sparse as sp

from .operators import BasisSpec, TruncatedOperator

MAX_MODES = 24


def popcount(states: np.ndarray) -> np.ndarray:
    return np.bitwise_count(np.asarray(states, dtype=np.uint64)).astype(np.int64)


@lru_cache(maxsize=None)
def _ext_tables(n: int, i: int):
    states = np.arange(2**n, dtype=np.int64)
    bit = 1 << i
    src = states[(states & bit) == 0]
    sign = 1 - 2 * (popcount(src & (bit - 1)) & 1)
    for arr in (src, sign):
        arr.setflags(write=False)
    return src, src | bit, sign


def _check_modes(n: int, i: int | None = None) -> None:
    if not 0 <= n <= MAX_MODES:
        raise ValueError(f"number of fermionic modes must be in [0, {MAX_MODES}], got {n}")
    if i is not None and not 0 <= i < n:
        raise ValueError(f"mode index {i} out of range for {n} modes")


def ext_op(n: int, i: int) -> TruncatedOperator:
    """Exterior multiplication by ``v_i`` as an exact integer matrix."""
    _check_modes(n, i)
    src, dst, sign = _ext_tables(n, i)
    m = sp.csr_matrix((sign, (dst, src)), shape=(2**n, 2**n), dtype=np.int64)
    return TruncatedOperator(m, BasisSpec(fermion_modes=n))


def int_op(n: int, i: int) -> TruncatedOperator:
    """Interior multiplication by ``v_i``, the adjoint of ``ext_op``."""
    e = ext_op(n, i)
    return TruncatedOperator(e.matrix.T.tocsr(), e.basis)


def clifford_c(n: int, i: int) -> TruncatedOperator:
    """``c_i = ext(v_i) + int(v_i)``, self-adjoint, ``c_i^2 = 1``."""
    e = ext_op(n, i).matrix
    return TruncatedOperator((e + e.T).tocsr(), BasisSpec(fermion_modes=n), hermitian=True)


def clifford_cbar(n: int, i: int) -> TruncatedOperator:
    """``cbar_i = ext(v_i) - int(v_i)``, anti-self-adjoint, ``cbar_i^2 = -1``."""
    e = ext_op(n, i).matrix
    return TruncatedOperator((e - e.T).tocsr(), BasisSpec(fermion_modes=n))


def number_op(n: int, i: int | None = None) -> TruncatedOperator:
    """``N_i = ext(v_i) int(v_i)``, or the total number when ``i`` is None."""
    _check_modes(n, i)
    states = np.arange(2**n, dtype=np.int64)
    occ = popcount(states) if i is None else (states >> i) & 1
    return TruncatedOperator(sp.diags(occ.astype(np.int64), format="csr"), BasisSpec(fermion_modes=n), hermitian=True)


def parity_op(n: int) -> TruncatedOperator:
    occ = popcount(np.arange(2**n))
    return TruncatedOperator(sp.diags(1 - 2 * (occ & 1), format="csr"), BasisSpec(fermion_modes=n), hermitian=True)


@dataclass(frozen=True, eq=False)
class FermionState:
    """Amplitudes over the ``2**n`` bitmask basis states."""

    amplitudes: np.ndarray
    n_modes: int

    def __post_init__(self):
        a = np.asarray(self.amplitudes)
        if a.shape[0] != 2**self.n_modes:
            raise ValueError(f"expected {2**self.n_modes} amplitudes, got {a.shape[0]}")
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def vacuum(cls, n: int) -> "FermionState":
        a = np.zeros(2**n, dtype=complex)
        a[0] = 1.0
        return cls(a, n)

    @classmethod
    def basis_state(cls, n: int, occupied) -> "FermionState":
        a = np.zeros(2**n, dtype=complex)
        a[sum(1 << i for i in occupied)] = 1.0
        return cls(a, n)

    def particle_number(self, k: int) -> "FermionState":
        keep = popcount(np.arange(2**self.n_modes)) == k
        a = np.where(keep.reshape((-1,) + (1,) * (self.amplitudes.ndim - 1)), self.amplitudes, 0)
        return FermionState(a, self.n_modes)

    def inner(self, other: "FermionState") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _ext_apply(amps: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    """``ext(v)`` on amplitude arrays ``(2**n, ...)``; ``v`` may vary per column."""
    v = np.asarray(v)
    out = np.zeros(amps.shape, dtype=np.result_type(amps, v))
    for i in range(n):
        coef = v[i]
        if not np.any(coef):
            continue
        src, dst, sign = _ext_tables(n, i)
        sign = sign.reshape((-1,) + (1,) * (amps.ndim - 1))
        out[dst] += sign * coef * amps[src]
    return out


def _int_apply(amps: np.ndarray, v: np.ndarray, n: int) -> np.ndarray:
    v = np.conj(np.asarray(v))
    out = np.zeros(amps.shape, dtype=np.result_type(amps, v))
    for i in range(n):
        if not np.any(v[i]):
            continue
        src, dst, sign = _ext_tables(n, i)
        sign = sign.reshape((-1,) + (1,) * (amps.ndim - 1))
        out[src] += sign * v[i] * amps[dst]
    return out


def ext(v, state: FermionState) -> FermionState:
    """Wedge ``v`` (a vector in the one-particle space) onto ``state``."""
    return FermionState(_ext_apply(state.amplitudes, v, state.n_modes), state.n_modes)


def int_(v, state: FermionState) -> FermionState:
    """Contraction with ``v``; the adjoint of ``ext(v)``."""
    return FermionState(_int_apply(state.amplitudes, v, state.n_modes), state.n_modes)


@lru_cache(maxsize=None)
def sector_states(n: int, k: int) -> np.ndarray:
    """Bitmasks with ``k`` bits among ``n``, ascending: the k-particle basis."""
    states = np.arange(2**n, dtype=np.int64)
    out = states[popcount(states) == k]
    out.setflags(write=False)
    return out


def _bits(states: np.ndarray, n: int) -> np.ndarray:
    """Occupied indices of each state, ascending, ``(len(states), k)``."""
    occ = (states[:, None] >> np.arange(n)[None, :]) & 1
    k = int(occ[0].sum()) if len(states) else 0
    return np.nonzero(occ)[1].reshape(len(states), k)


def exterior_power_map(F: np.ndarray, k: int) -> TruncatedOperator:
    """``Lambda^k F`` on the k-particle sector, built as ``F v_1 ^ ... ^ F v_k``.

    Integer input stays integer, so multiplicativity can be checked exactly.
    """
    F = np.asarray(F)
    n = F.shape[0]
    if F.shape != (n, n):
        raise ValueError(f"one-particle map must be square, got {F.shape}")
    if not 0 <= k <= n:
        raise ValueError(f"sector k={k} out of range for {n} modes")
    _check_modes(n)
    cols = sector_states(n, k)
    basis = BasisSpec(fermion_modes=n, subspace=f"k={k}")
    if k == 0:
        return TruncatedOperator(np.ones((1, 1), dtype=F.dtype), basis)
    occ = _bits(cols, n)
    amps = np.zeros((2**n, len(cols)), dtype=F.dtype)
    amps[0] = 1
    for r in range(k - 1, -1, -1):
        amps = _ext_apply(amps, F[:, occ[:, r]], n)
    return TruncatedOperator(amps[cols], basis)


def fock_map(F: np.ndarray) -> TruncatedOperator:
    """``Lambda F`` on the whole exterior algebra (block diagonal in k)."""
    F = np.asarray(F)
    n = F.shape[0]
    out = np.zeros((2**n, 2**n), dtype=np.result_type(F, float))
    for k in range(n + 1):
        st = sector_states(n, k)
        out[np.ix_(st, st)] = exterior_power_map(F, k).matrix
    return TruncatedOperator(out, BasisSpec(fermion_modes=n))


def sector_dim(n: int, k: int) -> int:
    return comb(n, k)
