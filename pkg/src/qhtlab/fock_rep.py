"""Global-algebra representation on ``Lambda* H^sigma (x) L^2(A_n)``.

Only connection-dependent flows act here; there is no multiplication by
functions on the base.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import fock
from .holonomy import _increments, adjoint_flow_operator, path_ordered_exp
from .lattice import SiteFlow, VectorField
from .operators import BasisSpec, TruncatedOperator
from .oscillator import BosonicState, ModeParams, quadrature_grid, translation_matrix
from .qhd import LeakageError, _apply_axis
from .sobolev import SobolevBasis


@dataclass(frozen=True, eq=False)
class SigmaSpaceVector:
    """Coefficients over regulated-orthonormal basis modes ``xi_i``."""

    coeffs: np.ndarray
    modes: tuple

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True, eq=False)
class FockSectorState:
    """Amplitudes ``(2**n_f,) + (K,)*n_b``: fermionic bitmask, then bosonic levels."""

    amplitudes: np.ndarray
    fermion_modes: int

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape[0] != 2**self.fermion_modes:
            raise ValueError("leading axis must enumerate the fermionic bitmasks")
        object.__setattr__(self, "amplitudes", amp)

    @classmethod
    def product(cls, xi: fock.FermionState, eta: BosonicState) -> "FockSectorState":
        return cls(np.multiply.outer(xi.amplitudes, eta.amplitudes), xi.n_modes)

    @property
    def boson_modes(self) -> int:
        return self.amplitudes.ndim - 1

    def with_amplitudes(self, amp) -> "FockSectorState":
        return FockSectorState(amp, self.fermion_modes)

    def sector_norms(self) -> np.ndarray:
        """Norm of the k-particle block for ``k = 0..n_f``."""
        counts = fock.popcount(np.arange(2**self.fermion_modes))
        flat = np.abs(self.amplitudes.reshape(len(counts), -1)) ** 2
        return np.sqrt(np.bincount(counts, weights=flat.sum(axis=1), minlength=self.fermion_modes + 1))

    def max_particles(self) -> int:
        nz = np.flatnonzero(self.sector_norms())
        return int(nz[-1]) if len(nz) else 0

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __sub__(self, other: "FockSectorState") -> "FockSectorState":
        return self.with_amplitudes(self.amplitudes - other.amplitudes)


@dataclass(frozen=True)
class SectorNorm:
    k: int
    norm: float
    svd_prediction: float

    @property
    def residual(self) -> float:
        return abs(self.norm - self.svd_prediction)


class FockRepresentation:
    """Fiber-wise Fock action of holonomy-diffeomorphisms, plus translations.

    Parameters
    ----------
    basis : SobolevBasis
        One-particle space is spanned by ``basis`` modes ``fermion_indices``.
    modes : ModeParams
        Oscillator scales of the bosonic chart ``boson_indices``.
    fermion_indices, boson_indices : sequence of int, optional
        Defaults: the first ``n_f`` modes (``n_f = 6`` or fewer) and the first
        ``modes.n_modes`` modes.
    quad_order : int, optional
        Gauss-Hermite points per bosonic mode (default ``modes.K``).
    """

    def __init__(self, basis: SobolevBasis, modes: ModeParams, fermion_indices=None, boson_indices=None, quad_order=None, steps=32, leakage_tol=1e-8):
        self.basis = basis
        self.modes = modes
        self.fermion_indices = np.arange(min(6, basis.size)) if fermion_indices is None else np.asarray(fermion_indices, dtype=int)
        self.boson_indices = np.arange(modes.n_modes) if boson_indices is None else np.asarray(boson_indices, dtype=int)
        if len(self.boson_indices) != modes.n_modes:
            raise ValueError("one oscillator scale is needed per bosonic chart mode")
        for arr in (self.fermion_indices, self.boson_indices):
            if arr.max(initial=-1) >= basis.size:
                raise ValueError("mode index beyond basis truncation")
        self.quad_order = modes.K if quad_order is None else int(quad_order)
        self.steps = steps
        self.leakage_tol = leakage_tol
        self._grids = [quadrature_grid(self.quad_order, modes.K, modes.s[j], modes.tau2) for j in range(modes.n_modes)]
        self._e = basis.l2_coeffs(self.fermion_indices).reshape(len(self.fermion_indices), -1)

    @property
    def n_fermion(self) -> int:
        return len(self.fermion_indices)

    @property
    def n_boson(self) -> int:
        return self.modes.n_modes

    # -- one-particle space --------------------------------------------------

    def _one_particle(self, flow: SiteFlow, conn=None, hol=None, conjugate=True) -> TruncatedOperator:
        F = adjoint_flow_operator(flow, conn, hol)
        A = self.basis.torus.volume_element * (self._e @ (F @ self._e.T))
        if not conjugate:
            w = self.basis.weights[self.fermion_indices]
            A = w[:, None] * A / w[None, :]
        return TruncatedOperator(A, BasisSpec(lattice_dim=self.n_fermion, subspace="one-particle"))

    def one_particle_action(self, X: VectorField, t: float, conn, conjugate: bool = True) -> TruncatedOperator:
        """Matrix of ``omega -> Hol (e^{-tX})^* omega Hol^*`` in the ``xi`` basis.

        With ``conjugate`` the regulator is conjugated through, so the matrix
        equals the L^2 action in the ``e_i`` basis; without it the action is
        taken directly in the regulated inner product.
        """
        return self._one_particle(SiteFlow(X, t, self.steps), conn, conjugate=conjugate)

    def sector_norm_bound(self, X: VectorField, t: float, conn, k_max: int, conjugate: bool = True) -> list[SectorNorm]:
        A = self.one_particle_action(X, t, conn, conjugate).matrix
        return sector_norms(A, k_max)

    # -- Fock space ---------------------------------------------------------

    def fock_action(self, F, state: FockSectorState) -> FockSectorState:
        """``Lambda F`` on the fermionic factor, block by block."""
        F = F.matrix if isinstance(F, TruncatedOperator) else np.asarray(F)
        if F.shape != (state.fermion_modes,) * 2:
            raise ValueError("one-particle map does not match the fermionic modes")
        if state.max_particles() > F.shape[0]:
            raise ValueError("particle number exceeds the mode count")
        return state.with_amplitudes(_apply_axis(state.amplitudes, fock.fock_map(F).matrix, 0))

    def nodes(self) -> np.ndarray:
        axes = [g[0] for g in self._grids]
        return np.array(list(itertools.product(*axes))).reshape(-1, self.n_boson)

    def combined_action(self, X: VectorField, t: float, state: FockSectorState, conjugate: bool = True, flow=None) -> FockSectorState:
        """``F(xi (x) eta)(nabla) = F_nabla(xi) eta(nabla)`` on the quadrature grid."""
        if state.fermion_modes != self.n_fermion or state.boson_modes != self.n_boson:
            raise ValueError("state does not match the representation")
        flow = SiteFlow(X, t, self.steps) if flow is None else flow
        nb = self.n_boson
        amp = state.amplitudes
        for j, (_, V) in enumerate(self._grids):
            amp = _apply_axis(amp, V, j + 1)
        q = self.quad_order
        amp = amp.reshape(amp.shape[0], q**nb)
        moving = flow.path.shape[0] >= 2
        if moving:
            G = np.stack([_increments(flow.path, self.basis.oneform(i)) for i in self.boson_indices])
        d = self.basis.rep_dim
        out = np.empty_like(amp)
        for p, x in enumerate(self.nodes()):
            hol = path_ordered_exp(np.tensordot(x, G, axes=(0, 0))) if moving else np.broadcast_to(np.eye(d, dtype=complex), (self.basis.torus.n_sites, d, d))
            A = self._one_particle(flow, hol=hol, conjugate=conjugate).matrix
            out[:, p] = fock.fock_map(A).matrix @ amp[:, p]
        out = out.reshape((out.shape[0],) + (q,) * nb)
        for j, (_, V) in enumerate(self._grids):
            out = _apply_axis(out, V.T, j + 1)
        return state.with_amplitudes(out)

    def translate_U_fock(self, omega, state: FockSectorState) -> FockSectorState:
        """Translation by chart coordinates ``omega`` on the bosonic factor only."""
        if hasattr(omega, "coeffs") and hasattr(omega, "torus"):
            allc = self.basis.coordinates(omega)
            x = allc[self.boson_indices]
            total = np.linalg.norm(allc)
            leak = np.linalg.norm(np.delete(allc, self.boson_indices)) / total if total > 0 else 0.0
            if leak > self.leakage_tol:
                raise LeakageError(f"translation has relative weight {leak:.3e} outside the chart (limit {self.leakage_tol:.1e})")
        else:
            x = np.asarray(omega, dtype=float).ravel()
        if len(x) != self.n_boson:
            raise ValueError(f"expected {self.n_boson} coordinates, got {len(x)}")
        m = self.modes
        amp = state.amplitudes
        for j in range(self.n_boson):
            amp = _apply_axis(amp, translation_matrix(m.K, m.s[j], m.tau2, x[j]), j + 1)
        return state.with_amplitudes(amp)

    def continuity_profile(self, X: VectorField, t_list, state: FockSectorState) -> np.ndarray:
        """``||F_t Psi - Psi||`` for the combined action along ``t_list``."""
        return np.array([(self.combined_action(X, t, state) - state).norm() for t in t_list])


def sector_norms(A: np.ndarray, k_max: int) -> list[SectorNorm]:
    """``||Lambda^k A||`` against the product of the top-k singular values."""
    n = A.shape[0]
    if not 0 <= k_max <= n:
        raise ValueError(f"k_max={k_max} out of range for {n} modes")
    sv = np.linalg.svd(A, compute_uv=False)
    out = []
    for k in range(k_max + 1):
        Lk = fock.exterior_power_map(A, k).matrix
        nrm = float(np.linalg.norm(Lk, ord=2)) if Lk.size else 0.0
        out.append(SectorNorm(k, nrm, float(np.prod(sv[:k]))))
    return out


def orthogonality_defect(A) -> float:
    """``||A^T A - 1||_max`` for a real one-particle matrix."""
    A = A.matrix if isinstance(A, TruncatedOperator) else np.asarray(A)
    return float(np.abs(A.conj().T @ A - np.eye(A.shape[1])).max())
