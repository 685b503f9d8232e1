"""Lie-algebra-valued one-forms, connections and lattice spinors.

All per-site arrays are flat in the site index (see ``LatticeTorus``):
one-forms are ``(S, 3, n, n)`` complex, spinors ``(S, n)`` complex.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable

import numpy as np

from . import lie

if TYPE_CHECKING:
    from .lattice import LatticeTorus

ANTIHERMITIAN_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class OneForm:
    """A g-valued one-form sampled at the lattice sites."""

    torus: "LatticeTorus"
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        S = self.torus.n_sites
        if v.ndim != 4 or v.shape[:2] != (S, 3) or v.shape[2] != v.shape[3]:
            raise ValueError(f"expected values of shape ({S}, 3, n, n), got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def rep_dimension(self) -> int:
        return self.values.shape[-1]

    @classmethod
    def zeros(cls, torus, n: int = 2):
        return cls(torus, np.zeros((torus.n_sites, 3, n, n), dtype=complex))

    @classmethod
    def constant(cls, torus, components):
        """Same matrix at every site; ``components`` has shape ``(3, n, n)``."""
        comps = np.asarray(components, dtype=complex)
        return cls(torus, np.broadcast_to(comps, (torus.n_sites,) + comps.shape).copy())

    @classmethod
    def sampled(cls, torus, fn: Callable[[np.ndarray], np.ndarray]):
        """Sample ``fn(points) -> (P, 3, n, n)`` at the sites."""
        return cls(torus, fn(torus.site_coords()))

    @classmethod
    def from_coeffs(cls, torus, coeffs: np.ndarray, n: int = 2):
        """Build from real su(n) coordinates of shape ``(S, 3, n*n-1)``."""
        c = np.asarray(coeffs, dtype=float).reshape(torus.n_sites, 3, lie.lie_dim(n))
        return cls(torus, lie.from_coeffs(c, n))

    @property
    def coeffs(self) -> np.ndarray:
        return lie.to_coeffs(self.values, self.rep_dimension)

    def antihermitian_defect(self) -> float:
        v = self.values
        return float(np.max(np.abs(v + np.conj(np.swapaxes(v, -1, -2))), initial=0.0))

    def is_antihermitian(self, tol: float = ANTIHERMITIAN_TOL) -> bool:
        return self.antihermitian_defect() <= tol

    def copy(self):
        return type(self)(self.torus, self.values.copy())

    def with_values(self, values):
        return type(self)(self.torus, values)

    def _combine(self, other, op):
        if not isinstance(other, OneForm):
            return NotImplemented
        if other.torus != self.torus:
            raise ValueError("one-forms live on different lattices")
        return type(self)(self.torus, op(self.values, other.values))

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        return type(self)(self.torus, self.values * scalar)

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(self.torus, -self.values)

    def at(self, points: np.ndarray) -> np.ndarray:
        """Trilinear interpolation, ``(P, 3, n, n)``."""
        return self.torus.interpolate(self.values, points)


class Connection(OneForm):
    """A point of configuration space: an su(n)-valued one-form (gauge potential)."""


class AnalyticConnection:
    """Connection given by a callable, evaluated exactly (no interpolation)."""

    def __init__(self, torus, fn: Callable[[np.ndarray], np.ndarray], n: int = 2):
        self.torus = torus
        self.fn = fn
        self.rep_dimension = n

    def at(self, points: np.ndarray) -> np.ndarray:
        points = np.asarray(points, dtype=float).reshape(-1, 3)
        return np.asarray(self.fn(points), dtype=complex)


class SumConnection:
    """``sum_k weight_k * part_k`` for parts exposing ``at(points)``."""

    def __init__(self, parts, weights=None):
        self.parts = list(parts)
        self.weights = [1.0] * len(self.parts) if weights is None else list(weights)
        self.torus = self.parts[0].torus
        self.rep_dimension = self.parts[0].rep_dimension

    def at(self, points: np.ndarray) -> np.ndarray:
        out = 0
        for w, part in zip(self.weights, self.parts):
            if w != 0:
                out = out + w * part.at(points)
        if isinstance(out, int):
            P = np.asarray(points).reshape(-1, 3).shape[0]
            n = self.rep_dimension
            return np.zeros((P, 3, n, n), dtype=complex)
        return out


@dataclass(frozen=True, eq=False)
class LatticeSpinor:
    """A section of L^2(M) (x) C^n sampled at the sites."""

    torus: "LatticeTorus"
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.ndim != 2 or v.shape[0] != self.torus.n_sites:
            raise ValueError(f"expected values of shape ({self.torus.n_sites}, n), got {v.shape}")
        object.__setattr__(self, "values", v)

    @property
    def rep_dimension(self) -> int:
        return self.values.shape[-1]

    def inner(self, other: "LatticeSpinor") -> complex:
        return complex(self.torus.volume_element * np.vdot(self.values, other.values))

    def norm(self) -> float:
        return float(np.sqrt(self.torus.volume_element) * np.linalg.norm(self.values))
