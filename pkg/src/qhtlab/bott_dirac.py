"""Truncated Bott-Dirac operator on (oscillator modes) (x) (exterior algebra).

Basis ordering: bosonic levels ``(k_1, ..., k_n)`` in C order, then the
fermionic bitmask as the fastest index.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import prod

import numpy as np
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph
import scipy.sparse.linalg as spla

from . import fock
from .holonomy import path_ordered_exp
from .lattice import FlowPath
from .operators import BasisSpec, TruncatedOperator
from .oscillator import ModeParams, mode_matrices
from .sobolev import SobolevBasis

DENSE_LIMIT = 4096
KRYLOV_TOL = 1e-10
DEFAULT_MAX_DIM = 2**21


class ResourceError(RuntimeError):
    pass


def _on_mode(mat: np.ndarray, i: int, n: int, K: int) -> sp.csr_matrix:
    left = sp.identity(K**i, format="csr")
    right = sp.identity(K ** (n - i - 1), format="csr")
    return sp.kron(sp.kron(left, sp.csr_matrix(mat)), right, format="csr")


def _modes(params: ModeParams, n: int | None) -> int:
    n = params.n_modes if n is None else n
    if n < 1:
        raise ValueError(f"need at least one mode, got n={n}")
    if n > params.n_modes:
        raise ValueError(f"mode parameters define only {params.n_modes} scales, need {n}")
    return n


def assemble_bott_dirac(params: ModeParams, n: int | None = None, max_dim: int = DEFAULT_MAX_DIM) -> TruncatedOperator:
    """``B_n = sum_i tau2 cbar_i D_i + s_i c_i X_i`` with cutoff ``params.K`` per mode."""
    n = _modes(params, n)
    K = params.K
    dim = K**n * 2**n
    if dim > max_dim:
        raise ResourceError(f"Bott-Dirac dimension {dim} exceeds the configured bound {max_dim}")
    B = sp.csr_matrix((dim, dim))
    for i in range(n):
        X, D = mode_matrices(K, params.s[i], params.tau2)
        c = fock.clifford_c(n, i).matrix.astype(float)
        cbar = fock.clifford_cbar(n, i).matrix.astype(float)
        B = B + params.tau2 * sp.kron(_on_mode(D, i, n, K), cbar, format="csr")
        B = B + params.s[i] * sp.kron(_on_mode(X, i, n, K), c, format="csr")
    B.eliminate_zeros()
    return TruncatedOperator(B.tocsr(), BasisSpec(mode_cutoffs=(K,) * n, fermion_modes=n), hermitian=True)


def occupations(n: int, K: int) -> tuple[np.ndarray, np.ndarray]:
    """Bosonic levels ``(dim, n)`` and fermion occupations ``(dim, n)`` per basis state."""
    levels = np.array(np.unravel_index(np.arange(K**n), (K,) * n)).T
    bits = (np.arange(2**n)[:, None] >> np.arange(n)[None, :]) & 1
    k = np.repeat(levels, 2**n, axis=0)
    f = np.tile(bits, (K**n, 1))
    return k, f


def interior_mask(n: int, K: int) -> np.ndarray:
    """States with every bosonic level at most ``K - 2`` (off the truncation edge)."""
    k, _ = occupations(n, K)
    return np.all(k <= K - 2, axis=1)


def closed_form_diagonal(params: ModeParams, n: int | None = None) -> np.ndarray:
    """``sum_i 2 tau2 s_i (k_i + f_i)`` per basis state."""
    n = _modes(params, n)
    k, f = occupations(n, params.K)
    s = np.asarray(params.s[:n])
    return 2.0 * params.tau2 * ((k + f) * s).sum(axis=1)


def closed_form_spectrum(params: ModeParams, n: int | None = None, m: int | None = None) -> np.ndarray:
    """Lowest ``m`` values of the closed-form multiset over interior states."""
    n = _modes(params, n)
    vals = np.sort(closed_form_diagonal(params, n)[interior_mask(n, params.K)])
    return vals if m is None else vals[:m]


def bott_dirac_square(params: ModeParams, n: int | None = None, interior: bool = True) -> TruncatedOperator:
    """``B_n^2`` from the truncated matrix product.

    On the interior subspace this block is exactly invariant; the full
    truncated square also carries spurious low modes on the top level.
    """
    n = _modes(params, n)
    B = assemble_bott_dirac(params, n)
    B2 = TruncatedOperator((B.matrix @ B.matrix).tocsr(), B.basis, hermitian=True)
    return B2.restrict(interior_mask(n, params.K), "interior") if interior else B2


def spectrum(op: TruncatedOperator, m: int | None = None, hermitian_tol: float = 1e-12) -> np.ndarray:
    """Lowest ``m`` eigenvalues (all if None), ascending.

    The matrix is split into the connected components of its sparsity graph
    (an exact block decomposition); blocks up to ``DENSE_LIMIT`` are solved
    densely, larger ones with a Krylov solver from a fixed start vector.
    """
    A = op.matrix
    scale = float(abs(A).max()) if sp.issparse(A) else float(np.max(np.abs(A), initial=0.0))
    if op.hermitian_defect() > hermitian_tol * max(scale, 1.0):
        raise ValueError("spectrum requires a self-adjoint operator")
    A = sp.csr_matrix(A)
    ncomp, labels = csgraph.connected_components(abs(A) > 0, directed=False)
    order = np.argsort(labels, kind="stable")
    bounds = np.searchsorted(labels[order], np.arange(ncomp + 1))
    want = op.dim if m is None else min(m, op.dim)
    vals = []
    for c in range(ncomp):
        idx = order[bounds[c] : bounds[c + 1]]
        block = A[idx][:, idx]
        if len(idx) <= DENSE_LIMIT or want >= len(idx) - 1:
            vals.append(np.linalg.eigvalsh(block.toarray()))
        else:
            v0 = np.ones(len(idx)) / np.sqrt(len(idx))
            ev = spla.eigsh(block, k=min(want, len(idx) - 2), which="SA", v0=v0, tol=KRYLOV_TOL, return_eigenvectors=False)
            vals.append(np.sort(ev))
    out = np.sort(np.concatenate(vals)) if vals else np.zeros(0)
    return out[:want]


@dataclass(frozen=True)
class SquareResidual:
    interior: float
    edge: float
    edge_states: int


def verify_square_closed_form(params: ModeParams, n: int | None = None) -> SquareResidual:
    """Compare ``B_n^2`` with the closed form ``sum_i -tau2^2 d_i^2 + s_i^2 x_i^2 + tau2 s_i (2N_i - 1)``.

    The closed form is diagonal in this basis with entries
    ``2 tau2 s_i (k_i + f_i)``. Residuals are max-abs entries of the
    difference, split by interior rows/columns versus the edge.
    """
    n = _modes(params, n)
    B2 = bott_dirac_square(params, n, interior=False).matrix
    diff = (B2 - sp.diags(closed_form_diagonal(params, n))).tocoo()
    inside = interior_mask(n, params.K)
    both = inside[diff.row] & inside[diff.col]
    vals = np.abs(diff.data)
    edge_touched = np.unique(np.concatenate([diff.row[~both & (vals > 0)], diff.col[~both & (vals > 0)]]))
    return SquareResidual(
        interior=float(vals[both].max(initial=0.0)),
        edge=float(vals[~both].max(initial=0.0)),
        edge_states=int(len(edge_touched)),
    )


def embed_product_state(vec: np.ndarray, n: int, K: int) -> np.ndarray:
    """Append a bosonic ground state and an empty fermionic mode to a state of ``n`` modes."""
    v = np.asarray(vec).reshape(K**n, 2**n)
    out = np.zeros((K**n, K, 2 ** (n + 1)), dtype=v.dtype)
    out[:, 0, : 2**n] = v
    return out.reshape(-1)


def embedding_matrix(n: int, K: int) -> sp.csr_matrix:
    """Isometry from the ``n``-mode space into the ``n+1``-mode space."""
    dim = K**n * 2**n
    cols = np.arange(dim)
    rows = np.flatnonzero(embed_product_state(np.arange(1, dim + 1), n, K))
    return sp.csr_matrix((np.ones(dim), (rows, cols)), shape=(K ** (n + 1) * 2 ** (n + 1), dim))


@dataclass(frozen=True)
class CommutatorProfile:
    gamma: np.ndarray
    increments: np.ndarray
    eigenvalues: np.ndarray
    weights: np.ndarray

    @property
    def n(self) -> np.ndarray:
        return np.arange(1, len(self.gamma) + 1)


def holonomy_derivatives(path: FlowPath, basis: SobolevBasis, indices, fd_step: float = 1e-5) -> np.ndarray:
    """Central differences ``d Hol(gamma, x_i xi_i) / d x_i`` at ``x = 0``, ``(m, n, n)``.

    The step in ``x_i`` is scaled by the mode weight so that the connection
    perturbation has size ``fd_step`` for every mode.
    """
    idx = np.atleast_1d(indices)
    n = basis.rep_dim
    pts = path.points
    if len(pts) < 2 or len(idx) == 0:
        return np.zeros((len(idx), n, n), dtype=complex)
    mid = 0.5 * (pts[1:] + pts[:-1])
    disp = pts[1:] - pts[:-1]
    prof = basis.interpolated_profile(idx, mid) / basis.weights[idx][:, None]
    gen = np.einsum("ka,maij->mkij", disp, basis.generator(idx))
    inc = prof[:, :, None, None] * gen
    delta = fd_step * basis.weights[idx] * np.sqrt(basis.torus.volume)
    step = np.moveaxis(inc * delta[:, None, None, None], 1, 0)
    plus = path_ordered_exp(step)
    minus = path_ordered_exp(-step)
    return (plus - minus) / (2 * delta[:, None, None])


def commutator_growth_profile(
    path: FlowPath, basis: SobolevBasis, tau2: float, n_max: int | None = None, fd_step: float = 1e-5, chunk: int = 512
) -> CommutatorProfile:
    """``Gamma(n) = sum_{i<=n} tau2^2 ||d Hol / d x_i||^2`` at the zero connection."""
    n_max = basis.size if n_max is None else n_max
    if n_max > basis.size:
        raise ValueError(f"n_max={n_max} exceeds basis size {basis.size}")
    incr = np.empty(n_max)
    for lo in range(0, n_max, chunk):
        idx = np.arange(lo, min(lo + chunk, n_max))
        der = holonomy_derivatives(path, basis, idx, fd_step)
        incr[idx] = tau2**2 * np.linalg.norm(der, ord=2, axis=(1, 2)) ** 2
    return CommutatorProfile(np.cumsum(incr), incr, basis.eigenvalues[:n_max].copy(), basis.weights[:n_max].copy())


def decay_slope(profile: CommutatorProfile, first: int | None = None) -> tuple[float, int]:
    """Log-log slope of shell-averaged increments against ``weight^-2``.

    Uses modes from ``first`` (default: the last decade, ``n_max // 10``)
    onward, averaged over each eigenvalue shell. A slope of 1 means the
    increments follow the regulator suppression exactly. Returns the slope
    and the number of shells fitted.
    """
    n_max = len(profile.increments)
    first = n_max // 10 if first is None else first
    lam = np.round(profile.eigenvalues[first:], 9)
    inc = profile.increments[first:]
    w = profile.weights[first:]
    shells = np.unique(lam)
    xs, ys = [], []
    for s in shells:
        sel = lam == s
        avg = inc[sel].mean()
        if avg > 0:
            xs.append(np.log(w[sel][0] ** -2.0))
            ys.append(np.log(avg))
    if len(xs) < 2:
        return float("nan"), len(xs)
    slope = np.polyfit(xs, ys, 1)[0]
    return float(slope), len(xs)


def dimension(params: ModeParams, n: int) -> int:
    return prod((params.K,) * n) * 2**n
