"""Scaled Hermite bases for the one-mode spaces L^2(R).

Mode ``i`` uses the eigenfunctions of ``-tau2^2 d^2/dx^2 + s_i^2 x^2``; its
ground state is the normalized Gaussian ``(s/(tau2 pi))^{1/4} exp(-s x^2/(2 tau2))``
appended by the inductive embeddings.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg


@dataclass(frozen=True)
class ModeParams:
    """``tau2``, the scale sequence ``s`` (non-decreasing) and Hermite cutoff ``K``."""

    tau2: float
    s: tuple[float, ...]
    K: int

    def __post_init__(self):
        s = tuple(float(v) for v in self.s)
        object.__setattr__(self, "s", s)
        if not self.tau2 > 0:
            raise ValueError(f"tau2 must be positive, got {self.tau2}")
        if self.K < 2:
            raise ValueError(f"Hermite cutoff K must be >= 2, got {self.K}")
        if any(v <= 0 for v in s):
            raise ValueError("mode scales s_i must be positive")
        if any(b < a for a, b in zip(s, s[1:])):
            raise ValueError(f"mode scales must be non-decreasing, got {s}")

    @classmethod
    def preset(cls, name: str, n: int, tau2: float = 1.0, K: int = 8) -> "ModeParams":
        """``"linear"``: s_i = i (default); ``"unit"``: s_i = 1 for all i."""
        if name == "linear":
            s = tuple(float(i) for i in range(1, n + 1))
        elif name == "unit":
            s = (1.0,) * n
        else:
            raise ValueError(f"unknown s preset {name!r}")
        return cls(tau2, s, K)

    @property
    def n_modes(self) -> int:
        return len(self.s)

    def length(self, i: int) -> float:
        """Ground-state width ``sqrt(tau2 / s_i)`` of mode ``i`` (0-based)."""
        return float(np.sqrt(self.tau2 / self.s[i]))


def mode_matrices(K: int, s: float, tau2: float) -> tuple[np.ndarray, np.ndarray]:
    """Position and derivative matrices ``(X, D)`` in the scaled Hermite basis."""
    if K < 2:
        raise ValueError(f"K must be >= 2, got {K}")
    k = np.arange(1, K)
    X = np.diag(np.sqrt(tau2 * k / (2.0 * s)), 1)
    X = X + X.T
    D = np.diag(np.sqrt(s * k / (2.0 * tau2)), 1)
    D = D - D.T
    return X, D


def hermite_functions(K: int, y: np.ndarray) -> np.ndarray:
    """Orthonormal Hermite functions ``h_k(y)``, ``k < K``, shape ``(K, len(y))``."""
    y = np.asarray(y, dtype=float)
    out = np.empty((K,) + y.shape)
    out[0] = np.pi**-0.25 * np.exp(-0.5 * y * y)
    if K > 1:
        out[1] = np.sqrt(2.0) * y * out[0]
    for k in range(1, K - 1):
        out[k + 1] = np.sqrt(2.0 / (k + 1)) * y * out[k] - np.sqrt(k / (k + 1)) * out[k - 1]
    return out


def mode_wavefunctions(K: int, x: np.ndarray, s: float, tau2: float) -> np.ndarray:
    """Basis wave functions of a mode at coordinates ``x``, ``(K, len(x))``."""
    ell = np.sqrt(tau2 / s)
    return hermite_functions(K, np.asarray(x) / ell) / np.sqrt(ell)


@lru_cache(maxsize=64)
def _gauss_hermite(q: int, K: int):
    y, w = np.polynomial.hermite.hermgauss(q)
    # Polynomial part of h_k so that V[j, k] = sqrt(w_j) H~_k(y_j) needs no exp(+y^2).
    p = np.empty((K, q))
    p[0] = np.pi**-0.25
    if K > 1:
        p[1] = np.sqrt(2.0) * y * p[0]
    for k in range(1, K - 1):
        p[k + 1] = np.sqrt(2.0 / (k + 1)) * y * p[k] - np.sqrt(k / (k + 1)) * p[k - 1]
    V = (np.sqrt(w)[:, None] * p.T).copy()
    y.setflags(write=False)
    V.setflags(write=False)
    return y, V


def quadrature_grid(q: int, K: int, s: float, tau2: float) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Hermite nodes matched to a mode and the node transform.

    Returns physical nodes ``x`` (length q) and ``V`` (q x K) with
    ``V^T V = 1`` for ``q >= K``; ``V @ coeffs`` are scaled nodal values and
    ``V.T @ diag(f(x)) @ V`` is the quadrature matrix of multiplication by f.
    """
    if q < K:
        raise ValueError(f"quadrature order {q} must be >= the Hermite cutoff {K}")
    y, V = _gauss_hermite(q, K)
    return y * np.sqrt(tau2 / s), V


def translation_matrix(K: int, s: float, tau2: float, a: float) -> np.ndarray:
    """``exp(a d/dx)`` in the truncated basis: ``(T eta)(x) = eta(x + a)``."""
    _, D = mode_matrices(K, s, tau2)
    return scipy.linalg.expm(a * D)


@dataclass(frozen=True, eq=False)
class BosonicState:
    """Amplitudes over ``{0..K-1}^n``, one axis per oscillator mode."""

    amplitudes: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "amplitudes", np.asarray(self.amplitudes, dtype=complex))

    @property
    def n_modes(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def vacuum(n: int, K: int) -> BosonicState:
    amp = np.zeros((K,) * n, dtype=complex)
    amp[(0,) * n] = 1.0
    return BosonicState(amp)


def embed_vacuum(eta: BosonicState, params: ModeParams | None = None) -> BosonicState:
    """Append mode ``n+1`` in its ground state (the normalized Gaussian factor)."""
    n = eta.n_modes
    if params is not None and params.n_modes <= n:
        raise ValueError(f"mode parameters cover only {params.n_modes} modes, need {n + 1}")
    e0 = np.zeros(eta.cutoff)
    e0[0] = 1.0
    return BosonicState(np.multiply.outer(eta.amplitudes, e0))


def mode_inner(eta: BosonicState, zeta: BosonicState) -> complex:
    if eta.amplitudes.shape != zeta.amplitudes.shape:
        raise ValueError(f"shape mismatch {eta.amplitudes.shape} vs {zeta.amplitudes.shape}")
    return complex(np.vdot(eta.amplitudes, zeta.amplitudes))
