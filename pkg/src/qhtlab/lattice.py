"""Flat periodic 3-torus, vector-field flows and their Jacobians."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, ClassVar

import numpy as np

from .forms import OneForm

_CORNERS = np.array([[(c >> 2) & 1, (c >> 1) & 1, c & 1] for c in range(8)])


@dataclass(frozen=True)
class LatticeTorus:
    """Cubic lattice of ``N**3`` sites on a periodic box of side ``L``.

    Sites are enumerated in C order of their integer coordinates
    ``(i0, i1, i2)``, i.e. flat index ``(i0 * N + i1) * N + i2``.
    """

    sites_per_axis: int
    box_length: float
    dimension: ClassVar[int] = 3

    def __post_init__(self):
        if int(self.sites_per_axis) != self.sites_per_axis or self.sites_per_axis < 2:
            raise ValueError(f"sites_per_axis must be an integer >= 2, got {self.sites_per_axis}")
        if not self.box_length > 0:
            raise ValueError(f"box_length must be positive, got {self.box_length}")

    @property
    def spacing(self) -> float:
        return self.box_length / self.sites_per_axis

    @property
    def n_sites(self) -> int:
        return self.sites_per_axis**3

    @property
    def shape(self) -> tuple[int, int, int]:
        N = self.sites_per_axis
        return (N, N, N)

    @property
    def volume_element(self) -> float:
        return self.spacing**3

    @property
    def volume(self) -> float:
        return self.box_length**3

    def site_indices(self) -> np.ndarray:
        N = self.sites_per_axis
        return np.stack(np.meshgrid(np.arange(N), np.arange(N), np.arange(N), indexing="ij"), -1).reshape(-1, 3)

    def site_coords(self) -> np.ndarray:
        return self.spacing * self.site_indices().astype(float)

    def flat_index(self, ijk: np.ndarray) -> np.ndarray:
        N = self.sites_per_axis
        ijk = np.mod(ijk, N)
        return (ijk[..., 0] * N + ijk[..., 1]) * N + ijk[..., 2]

    def neighbour(self, axis: int, step: int = 1) -> np.ndarray:
        """Flat index of the site ``step`` cells away along ``axis``, per site."""
        ijk = self.site_indices()
        ijk[:, axis] += step
        return self.flat_index(ijk)

    def wrap(self, points: np.ndarray) -> np.ndarray:
        L = self.box_length
        return points - L * np.floor(points / L)

    def stencil(self, points: np.ndarray, gradient: bool = False):
        """Trilinear interpolation stencil at arbitrary points.

        Returns flat corner indices ``(P, 8)``, weights ``(P, 8)`` and, when
        ``gradient`` is set, weight derivatives ``(P, 8, 3)``.
        """
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        h = self.spacing
        u = points / h
        base = np.floor(u)
        frac = u - base
        base = base.astype(np.int64)
        idx = self.flat_index(base[:, None, :] + _CORNERS[None, :, :])
        lin = np.where(_CORNERS[None, :, :] == 1, frac[:, None, :], 1.0 - frac[:, None, :])
        weights = lin.prod(axis=-1)
        if not gradient:
            return idx, weights
        dlin = np.where(_CORNERS == 1, 1.0, -1.0) / h
        grad = np.empty(weights.shape + (3,))
        for a in range(3):
            others = [b for b in range(3) if b != a]
            grad[..., a] = dlin[None, :, a] * lin[..., others[0]] * lin[..., others[1]]
        return idx, weights, grad

    def interpolate(self, samples: np.ndarray, points: np.ndarray) -> np.ndarray:
        """Trilinear interpolation of per-site ``samples`` (leading axis = site)."""
        idx, w = self.stencil(points)
        vals = samples[idx]
        return np.einsum("pc,pc...->p...", w, vals)


def build_torus(N: int, L: float) -> LatticeTorus:
    return LatticeTorus(N, float(L))


@dataclass(frozen=True, eq=False)
class VectorField:
    """Vector field sampled at lattice sites, trilinearly interpolated.

    ``smoothness`` is ``"constant"`` for translation-generating fields, which
    are the isometric flows on the flat torus, and ``"analytic-sampled"`` for
    samples of a smooth field.
    """

    torus: LatticeTorus
    components: np.ndarray
    smoothness: str = "analytic-sampled"
    _value: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=float).reshape(self.torus.n_sites, 3)
        object.__setattr__(self, "components", comps)
        if self.smoothness not in ("constant", "analytic-sampled"):
            raise ValueError(f"unknown smoothness tag {self.smoothness!r}")

    @classmethod
    def constant(cls, torus: LatticeTorus, vector) -> "VectorField":
        v = np.asarray(vector, dtype=float).reshape(3)
        comps = np.broadcast_to(v, (torus.n_sites, 3)).copy()
        return cls(torus, comps, "constant", _value=v)

    @classmethod
    def sampled(cls, torus: LatticeTorus, fn: Callable[[np.ndarray], np.ndarray]) -> "VectorField":
        """Sample ``fn(points) -> (P, 3)`` at the sites."""
        return cls(torus, np.asarray(fn(torus.site_coords()), dtype=float))

    @property
    def is_isometric(self) -> bool:
        return self.smoothness == "constant"

    def __neg__(self) -> "VectorField":
        v = None if self._value is None else -self._value
        return VectorField(self.torus, -self.components, self.smoothness, _value=v)

    def at(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if self._value is not None:
            return np.broadcast_to(self._value, points.shape).copy()
        return self.torus.interpolate(self.components, points)

    def derivative_at(self, points: np.ndarray) -> np.ndarray:
        """``D[p, i, j] = dX_i / dx_j`` of the interpolant."""
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        if self._value is not None:
            return np.zeros((len(points), 3, 3))
        idx, _, grad = self.torus.stencil(points, gradient=True)
        return np.einsum("pcj,pci->pij", grad, self.components[idx])


@dataclass(frozen=True)
class FlowPath:
    """Integral curve samples of a vector field, unwrapped (no periodic jumps)."""

    base: np.ndarray
    times: np.ndarray
    points: np.ndarray
    box_length: float

    @property
    def end(self) -> np.ndarray:
        L = self.box_length
        return self.points[-1] - L * np.floor(self.points[-1] / L)

    def reversed(self) -> "FlowPath":
        T = self.times[-1]
        return FlowPath(self.points[-1].copy(), T - self.times[::-1], self.points[::-1].copy(), self.box_length)

    def concatenate(self, other: "FlowPath") -> "FlowPath":
        """Append ``other``, translated so that it starts where ``self`` ends."""
        shift = self.points[-1] - other.points[0]
        times = np.concatenate([self.times, self.times[-1] + other.times[1:] - other.times[0]])
        points = np.concatenate([self.points, other.points[1:] + shift])
        return FlowPath(self.base, times, points, self.box_length)


def _rk4(X: VectorField, points: np.ndarray, t: float, steps: int, jacobian: bool = False):
    """Classical fourth-order integration of dx/dt = X(x) for many points.

    Returns the trajectory ``(steps + 1, P, 3)`` and, if requested, the
    linearized flow ``(P, 3, 3)`` from the variational equation
    ``dJ/dt = DX(x) J``.
    """
    x = np.array(points, dtype=float).reshape(-1, 3)
    traj = np.empty((steps + 1,) + x.shape)
    traj[0] = x
    J = np.broadcast_to(np.eye(3), (len(x), 3, 3)).copy() if jacobian else None
    dt = t / steps

    def rhs(y, Jy):
        v = X.at(y)
        if Jy is None:
            return v, None
        return v, np.einsum("pij,pjk->pik", X.derivative_at(y), Jy)

    for k in range(steps):
        k1, j1 = rhs(x, J)
        k2, j2 = rhs(x + 0.5 * dt * k1, None if J is None else J + 0.5 * dt * j1)
        k3, j3 = rhs(x + 0.5 * dt * k2, None if J is None else J + 0.5 * dt * j2)
        k4, j4 = rhs(x + dt * k3, None if J is None else J + dt * j3)
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if J is not None:
            J = J + (dt / 6.0) * (j1 + 2 * j2 + 2 * j3 + j4)
        traj[k + 1] = x
    return traj, J


def _check_field(M: LatticeTorus, X: VectorField) -> None:
    if X.torus != M:
        raise ValueError("vector field lives on a different lattice")


def integrate_flow(M: LatticeTorus, X: VectorField, m, t: float, steps: int = 64) -> FlowPath:
    """Integral curve ``gamma(s) = exp_s(X)(m)`` for ``s`` from 0 to ``t``."""
    _check_field(M, X)
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    m = np.asarray(m, dtype=float).reshape(3)
    if t == 0:
        return FlowPath(m.copy(), np.zeros(1), m[None, :].copy(), M.box_length)
    traj, _ = _rk4(X, m[None, :], t, steps)
    return FlowPath(m.copy(), np.linspace(0.0, t, steps + 1), traj[:, 0, :], M.box_length)


def flow_trajectories(X: VectorField, points: np.ndarray, t: float, steps: int) -> np.ndarray:
    """Vectorized ``integrate_flow``: unwrapped trajectories ``(steps+1, P, 3)``."""
    if t == 0:
        return np.asarray(points, dtype=float).reshape(1, -1, 3).copy()
    return _rk4(X, points, t, steps)[0]


def flow_jacobians(X: VectorField, points: np.ndarray, t: float, steps: int = 64) -> np.ndarray:
    """Determinant of the linearized time-``t`` flow map at each point."""
    points = np.asarray(points, dtype=float).reshape(-1, 3)
    if t == 0 or X.is_isometric:
        return np.ones(len(points))
    _, J = _rk4(X, points, t, steps, jacobian=True)
    return np.linalg.det(J)


def flow_jacobian(M: LatticeTorus, X: VectorField, m, t: float, steps: int = 64) -> float:
    """Volume change of the flow at ``m``; 1 for divergence-free fields."""
    _check_field(M, X)
    return float(flow_jacobians(X, np.asarray(m, dtype=float), t, steps)[0])


class SiteFlow:
    """The inverse flow ``e^{-tX}`` evaluated at every lattice site.

    For a target site ``m'`` the source is ``m = e^{-tX}(m')`` and ``path``
    holds the curve from ``m`` to ``m'``. Everything here is independent of
    the connection, so one instance serves many connections.
    """

    def __init__(self, X: VectorField, t: float, steps: int = 32):
        self.field = X
        self.torus = M = X.torus
        self.t = t
        self.targets = M.site_coords()
        if t == 0:
            back = self.targets[None].copy()
            J = np.broadcast_to(np.eye(3), (M.n_sites, 3, 3))
        else:
            back, J = _rk4(X, self.targets, -t, steps, jacobian=not X.is_isometric)
            if J is None:
                J = np.broadcast_to(np.eye(3), (M.n_sites, 3, 3))
        self.path = back[::-1]
        self.sources = back[-1]
        # det D(e^{-tX}) at the target: the unitarizing volume factor.
        self.jacobian = np.linalg.det(J)
        disp = self.sources - self.targets
        h = M.spacing
        dphi = np.broadcast_to(np.eye(3), (M.n_sites, 3, 3)).copy()
        for a in range(3):
            fwd = M.neighbour(a, +1)
            bwd = M.neighbour(a, -1)
            dphi[:, :, a] += (disp[fwd] - disp[bwd]) / (2 * h)
        # dphi[m, i, a] = d phi^i / d x^a by centered differences.
        self.differential = dphi
        self._stencil = M.stencil(self.sources)

    def midpoints(self) -> tuple[np.ndarray, np.ndarray]:
        """Segment midpoints ``(K, S, 3)`` and displacements ``(K, S, 3)``."""
        p = self.path
        return 0.5 * (p[1:] + p[:-1]), p[1:] - p[:-1]

    def interpolate_at_sources(self, samples: np.ndarray) -> np.ndarray:
        idx, w = self._stencil
        return np.einsum("pc,pc...->p...", w, samples[idx])

    def pullback_values(self, values: np.ndarray) -> np.ndarray:
        """``(e^{-tX})^* omega`` for per-site form values ``(S, 3, ...)``."""
        at_src = self.interpolate_at_sources(values)
        return np.einsum("pia,pi...->pa...", self.differential, at_src)


def pullback_oneform(M: LatticeTorus, X: VectorField, t: float, omega: OneForm, steps: int = 32) -> OneForm:
    """Pull back the form part of ``omega`` along ``e^{-tX}``; Lie values untouched."""
    _check_field(M, X)
    if omega.torus != M:
        raise ValueError("one-form lives on a different lattice")
    if t == 0:
        return omega.copy()
    flow = SiteFlow(X, t, steps)
    return omega.with_values(flow.pullback_values(omega.values))
