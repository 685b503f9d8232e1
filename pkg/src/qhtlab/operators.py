"""Finite matrices tagged with the tensor-product basis they act on."""

from __future__ import annotations

from dataclasses import dataclass, replace
from math import prod

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class BasisSpec:
    """Descriptor of ``(oscillator modes) (x) (Fock) (x) (lattice factor)``.

    ``mode_cutoffs`` lists the Hermite cutoff K of each bosonic mode,
    ``fermion_modes`` the number of fermionic modes (dimension ``2**n``) and
    ``lattice_dim`` the size of a lattice factor (0 when absent).
    ``subspace`` names a restriction, e.g. ``"interior"``.
    """

    mode_cutoffs: tuple[int, ...] = ()
    fermion_modes: int = 0
    lattice_dim: int = 0
    subspace: str = ""

    @property
    def full_dim(self) -> int:
        return prod(self.mode_cutoffs) * 2**self.fermion_modes * max(self.lattice_dim, 1)


@dataclass(frozen=True, eq=False)
class TruncatedOperator:
    matrix: object
    basis: BasisSpec
    hermitian: bool = False

    def __post_init__(self):
        m = self.matrix
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"operator matrix must be square, got {m.shape}")
        if not self.basis.subspace and m.shape[0] != self.basis.full_dim:
            raise ValueError(f"matrix size {m.shape[0]} does not match basis dimension {self.basis.full_dim}")

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.asarray(self.matrix)

    def _check(self, other: "TruncatedOperator") -> None:
        if other.basis != self.basis:
            raise ValueError(f"basis mismatch: {self.basis} vs {other.basis}")

    def __matmul__(self, other):
        if isinstance(other, TruncatedOperator):
            self._check(other)
            return TruncatedOperator(self.matrix @ other.matrix, self.basis)
        return self.matrix @ other

    def __add__(self, other):
        self._check(other)
        return TruncatedOperator(self.matrix + other.matrix, self.basis, self.hermitian and other.hermitian)

    def __sub__(self, other):
        self._check(other)
        return TruncatedOperator(self.matrix - other.matrix, self.basis, self.hermitian and other.hermitian)

    def __mul__(self, scalar):
        real = np.isreal(scalar)
        return TruncatedOperator(self.matrix * scalar, self.basis, self.hermitian and bool(real))

    __rmul__ = __mul__

    def __neg__(self):
        return TruncatedOperator(-self.matrix, self.basis, self.hermitian)

    @property
    def H(self) -> "TruncatedOperator":
        return TruncatedOperator(self.matrix.conj().T, self.basis, self.hermitian)

    def hermitian_defect(self) -> float:
        diff = self.matrix - self.matrix.conj().T
        if sp.issparse(diff):
            return float(abs(diff).max()) if diff.nnz else 0.0
        return float(np.max(np.abs(diff), initial=0.0))

    def restrict(self, mask: np.ndarray, name: str) -> "TruncatedOperator":
        """Compression onto the basis states selected by boolean ``mask``."""
        idx = np.flatnonzero(mask)
        m = self.matrix
        sub = m[idx][:, idx] if sp.issparse(m) else m[np.ix_(idx, idx)]
        return TruncatedOperator(sub, replace(self.basis, subspace=name), self.hermitian)


def identity(basis: BasisSpec, dtype=float) -> TruncatedOperator:
    return TruncatedOperator(sp.identity(basis.full_dim, dtype=dtype, format="csr"), basis, True)


def anticommutator(A: TruncatedOperator, B: TruncatedOperator) -> TruncatedOperator:
    """``AB + BA`` on a common basis."""
    A._check(B)
    return TruncatedOperator(A.matrix @ B.matrix + B.matrix @ A.matrix, A.basis)


def commutator(A: TruncatedOperator, B: TruncatedOperator) -> TruncatedOperator:
    A._check(B)
    return TruncatedOperator(A.matrix @ B.matrix - B.matrix @ A.matrix, A.basis)
