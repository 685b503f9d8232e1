"""Truncated representation on ``L^2(A_n) (x) L^2(M, C^d)``.

The bosonic factor carries one oscillator per chosen Sobolev mode; its
coordinate ``x_i`` is the coefficient of ``xi_i`` in the connection. The
holonomy-diffeomorphism acts fiber-wise: at each point of a Gauss-Hermite
grid over ``A_n`` it is the lattice operator for the connection ``sum x_i xi_i``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .forms import LatticeSpinor, OneForm
from .holonomy import _increments, path_ordered_exp
from .lattice import SiteFlow, VectorField
from .oscillator import BosonicState, ModeParams, quadrature_grid, translation_matrix
from .sobolev import SobolevBasis, coords_to_connection

DEFAULT_LEAKAGE = 1e-8


class LeakageError(ValueError):
    """A translation has weight outside the bosonic chart."""


@dataclass(frozen=True, eq=False)
class YMState:
    """Amplitudes ``(K,)*n + (S, d)``: bosonic levels, then lattice site and fiber."""

    amplitudes: np.ndarray
    n_modes: int
    volume_element: float

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex))
        if self.amplitudes.ndim != self.n_modes + 2:
            raise ValueError("amplitude array does not match the mode count")

    @classmethod
    def product(cls, eta: BosonicState, psi: LatticeSpinor) -> "YMState":
        amp = np.multiply.outer(eta.amplitudes, psi.values)
        return cls(amp, eta.n_modes, psi.torus.volume_element)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0]

    def with_amplitudes(self, amp) -> "YMState":
        return YMState(amp, self.n_modes, self.volume_element)

    def inner(self, other: "YMState") -> complex:
        if self.amplitudes.shape != other.amplitudes.shape:
            raise ValueError("states live on different truncations")
        return complex(np.vdot(self.amplitudes, other.amplitudes) * self.volume_element)

    def norm(self) -> float:
        return float(np.sqrt(self.inner(self).real))

    def __sub__(self, other: "YMState") -> "YMState":
        return self.with_amplitudes(self.amplitudes - other.amplitudes)

    def edge_weight(self) -> float:
        """Squared norm fraction on the top bosonic level of any mode."""
        K = self.cutoff
        total = np.sum(np.abs(self.amplitudes) ** 2)
        if total == 0:
            return 0.0
        top = np.zeros(self.amplitudes.shape[: self.n_modes], dtype=bool)
        for i in range(self.n_modes):
            sl = [slice(None)] * self.n_modes
            sl[i] = K - 1
            top[tuple(sl)] = True
        return float(np.sum(np.abs(self.amplitudes[top]) ** 2) / total)


def _apply_axis(arr: np.ndarray, mat: np.ndarray, axis: int) -> np.ndarray:
    return np.moveaxis(np.tensordot(mat, arr, axes=(1, axis)), 0, axis)


@dataclass(frozen=True)
class WeylReport:
    sign: int
    residual: float
    residuals: dict


class QHDRepresentation:
    """Translations and holonomy-diffeomorphisms on the truncated state space.

    Parameters
    ----------
    basis : SobolevBasis
        Supplies the connection modes and the lattice.
    modes : ModeParams
        Oscillator scales; ``modes.s[j]`` belongs to chart coordinate ``j``.
    mode_indices : sequence of int, optional
        Sobolev modes used as chart coordinates (default: the first
        ``modes.n_modes``). Other modes are held at zero.
    quad_order : int, optional
        Gauss-Hermite points per mode, at least ``modes.K`` (the default).
    steps : int
        RK4 steps for the flows.
    leakage_tol : float
        Relative weight of a translation outside the chart that is tolerated.
    """

    def __init__(self, basis: SobolevBasis, modes: ModeParams, mode_indices=None, quad_order=None, steps=32, leakage_tol=DEFAULT_LEAKAGE):
        self.basis = basis
        self.modes = modes
        self.mode_indices = np.arange(modes.n_modes) if mode_indices is None else np.asarray(mode_indices, dtype=int)
        if len(self.mode_indices) != modes.n_modes:
            raise ValueError("one oscillator scale is needed per chart mode")
        if self.mode_indices.max(initial=-1) >= basis.size:
            raise ValueError("chart mode beyond basis truncation")
        self.quad_order = modes.K if quad_order is None else int(quad_order)
        self.steps = steps
        self.leakage_tol = leakage_tol
        self._grids = [quadrature_grid(self.quad_order, modes.K, modes.s[j], modes.tau2) for j in range(modes.n_modes)]

    @property
    def n_modes(self) -> int:
        return self.modes.n_modes

    @property
    def torus(self):
        return self.basis.torus

    # -- states ------------------------------------------------------------

    def product_state(self, eta: BosonicState, psi: LatticeSpinor) -> YMState:
        if eta.n_modes != self.n_modes or eta.cutoff != self.modes.K:
            raise ValueError("bosonic factor does not match the chart")
        if psi.torus != self.torus:
            raise ValueError("spinor lives on a different lattice")
        return YMState.product(eta, psi)

    def random_state(self, rng: np.random.Generator, max_level: int | None = None) -> YMState:
        """Normalized random state with bosonic levels up to ``max_level``."""
        K = self.modes.K
        shape = (K,) * self.n_modes + (self.torus.n_sites, self.basis.rep_dim)
        amp = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
        if max_level is not None:
            keep = np.zeros((K,) * self.n_modes, dtype=bool)
            keep[(slice(0, max_level + 1),) * self.n_modes] = True
            amp[~keep] = 0
        st = YMState(amp, self.n_modes, self.torus.volume_element)
        return st.with_amplitudes(amp / st.norm())

    # -- translations ------------------------------------------------------

    def chart_coordinates(self, omega) -> tuple[np.ndarray, float]:
        """Chart coordinates of ``omega`` and the relative weight left outside.

        ``omega`` is a coordinate vector (no leakage by construction) or a
        lattice one-form expanded in the full basis.
        """
        if isinstance(omega, OneForm):
            allc = self.basis.coordinates(omega)
            x = allc[self.mode_indices]
            rest = np.delete(allc, self.mode_indices)
            total = np.linalg.norm(allc)
            return x, float(np.linalg.norm(rest) / total) if total > 0 else 0.0
        x = np.asarray(omega, dtype=float).ravel()
        if len(x) != self.n_modes:
            raise ValueError(f"expected {self.n_modes} coordinates, got {len(x)}")
        return x, 0.0

    def translation_matrices(self, omega) -> list[np.ndarray]:
        x, leak = self.chart_coordinates(omega)
        if leak > self.leakage_tol:
            raise LeakageError(f"translation has relative weight {leak:.3e} outside the chart (limit {self.leakage_tol:.1e})")
        m = self.modes
        return [translation_matrix(m.K, m.s[j], m.tau2, x[j]) for j in range(self.n_modes)]

    def translate_U(self, omega, state: YMState) -> YMState:
        """``(U_omega Psi)(x) = Psi(x + omega)``; identity on the spinor factor."""
        amp = state.amplitudes
        for j, T in enumerate(self.translation_matrices(omega)):
            amp = _apply_axis(amp, T, j)
        return state.with_amplitudes(amp)

    # -- holonomy-diffeomorphisms ------------------------------------------

    def _fiber_increments(self, flow: SiteFlow) -> np.ndarray:
        """Holonomy increments of each chart mode along the flow, ``(n, K, S, d, d)``."""
        if flow.path.shape[0] < 2:
            return np.zeros((self.n_modes, 0, self.torus.n_sites, self.basis.rep_dim, self.basis.rep_dim), dtype=complex)
        return np.stack([_increments(flow.path, self.basis.oneform(i)) for i in self.mode_indices])

    def nodes(self) -> np.ndarray:
        """Chart coordinates of every quadrature node, ``(q^n, n)``."""
        axes = [g[0] for g in self._grids]
        return np.array(list(itertools.product(*axes))).reshape(-1, self.n_modes)

    def act_holonomy_diffeo_YM(self, f, X: VectorField, t: float, state: YMState, shift=None, unitarize=True, flow=None) -> YMState:
        """Fiber-wise ``f e^X`` with ``nabla = sum_i x_i xi_i (+ shift)`` at each node.

        ``shift`` is an optional extra connection added at every node (used
        to evaluate ``e^X`` with a translated connection).
        """
        if X.torus != self.torus:
            raise ValueError("vector field lives on a different lattice")
        flow = SiteFlow(X, t, self.steps) if flow is None else flow
        n = self.n_modes
        amp = state.amplitudes
        for j, (_, V) in enumerate(self._grids):
            amp = _apply_axis(amp, V, j)
        q = self.quad_order
        amp = amp.reshape((q**n,) + amp.shape[n:])
        G = self._fiber_increments(flow)
        extra = _increments(flow.path, shift) if (shift is not None and flow.path.shape[0] >= 2) else 0.0
        scale = np.sqrt(flow.jacobian)[:, None] if unitarize else 1.0
        if f is not None and not (np.isscalar(f) and f == 1):
            fvals = np.broadcast_to(np.asarray(f), (self.torus.n_sites,)).astype(complex)
            scale = scale * flow.interpolate_at_sources(fvals)[:, None]
        out = np.empty_like(amp)
        for p, x in enumerate(self.nodes()):
            inc = np.tensordot(x, G, axes=(0, 0)) + extra
            hol = path_ordered_exp(inc) if flow.path.shape[0] >= 2 else np.eye(self.basis.rep_dim)
            src = flow.interpolate_at_sources(amp[p])
            out[p] = scale * np.einsum("...ij,...j->...i", hol, src)
        out = out.reshape((q,) * n + out.shape[1:])
        for j, (_, V) in enumerate(self._grids):
            out = _apply_axis(out, V.T, j)
        return state.with_amplitudes(out)

    def quadrature_self_check(self, f, X: VectorField, t: float, state: YMState, extra_points: int = 8) -> float:
        """Change of the action when the quadrature order grows by ``extra_points``."""
        finer = QHDRepresentation(self.basis, self.modes, self.mode_indices, self.quad_order + extra_points, self.steps, self.leakage_tol)
        a = self.act_holonomy_diffeo_YM(f, X, t, state)
        b = finer.act_holonomy_diffeo_YM(f, X, t, state)
        return (a - b).norm() / max(state.norm(), np.finfo(float).tiny)

    # -- checks --------------------------------------------------------------

    def weyl_conjugation_check(self, X: VectorField, t: float, omega, probes, omega_connection=None) -> WeylReport:
        """Compare ``U_omega^{-1} e^X U_omega`` with ``e^X[nabla -> nabla + eps omega]``.

        ``omega_connection`` overrides the connection used on the right-hand
        side (for instance a continuum field); by default it is the lattice
        form ``sum_i omega_i xi_i``. The residual for each sign is the largest
        relative difference over the probe states.
        """
        x, _ = self.chart_coordinates(omega)
        if omega_connection is None:
            omega_connection = coords_to_connection(x, self.basis, self.mode_indices)
        flow = SiteFlow(X, t, self.steps)
        res = {+1: 0.0, -1: 0.0}
        for psi in probes:
            lhs = self.translate_U(-x, self.act_holonomy_diffeo_YM(None, X, t, self.translate_U(x, psi), flow=flow))
            nrm = max(psi.norm(), np.finfo(float).tiny)
            for eps in (+1, -1):
                rhs = self.act_holonomy_diffeo_YM(None, X, t, psi, shift=_Scaled(omega_connection, eps), flow=flow)
                res[eps] = max(res[eps], (lhs - rhs).norm() / nrm)
        sign = min(res, key=lambda e: (res[e], -e))
        return WeylReport(sign, res[sign], res)

    def strong_continuity_profile(self, omega, t_list, state: YMState) -> np.ndarray:
        """``||U_{t omega} Psi - Psi||`` for each ``t``."""
        x, _ = self.chart_coordinates(omega)
        return np.array([(self.translate_U(t * x, state) - state).norm() for t in t_list])


class _Scaled:
    """``eps * conn`` evaluated lazily."""

    def __init__(self, conn, eps: float):
        self.conn = conn
        self.eps = eps
        self.rep_dimension = conn.rep_dimension

    def at(self, points):
        return self.eps * self.conn.at(points)


def vacuum_overlap_distance(t: float, omega1: float, s: float, tau2: float) -> float:
    """``||U_{t omega} Omega - Omega||`` for the Gaussian ground state of one mode."""
    return float(np.sqrt(2.0 * (1.0 - np.exp(-(t**2) * omega1**2 * s / (4.0 * tau2)))))
