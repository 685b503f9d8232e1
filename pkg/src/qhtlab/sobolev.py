"""Hodge Laplacian on lattice one-forms, the regulated inner product and its
orthonormal eigenbasis.

The regulated inner product is ``<W w1, W w2>`` with ``W = 1 + tau1 Delta^sigma``
and the plain L^2 pairing ``h^3 sum_sites 2 tr(A^dagger B)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import lie
from .forms import Connection, OneForm
from .lattice import LatticeTorus
from .operators import BasisSpec, TruncatedOperator

BASIS_FILE_VERSION = 1
TIE_BREAK_RULE = "eigenvalue, then Fourier index (lexicographic), then cos before sin, then axis, then Lie index"


@dataclass(frozen=True)
class SobolevParams:
    tau1: float
    sigma: float

    def __post_init__(self):
        if not self.tau1 > 0:
            raise ValueError(f"tau1 must be positive, got {self.tau1}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")

    def weight(self, lam):
        lam = np.asarray(lam, dtype=float)
        return 1.0 + self.tau1 * np.where(lam > 0, np.abs(lam), 0.0) ** self.sigma


def _d0(M: LatticeTorus) -> sp.csr_matrix:
    S = M.n_sites
    rows, cols, vals = [], [], []
    site = np.arange(S)
    for a in range(3):
        e = site * 3 + a
        rows += [e, e]
        cols += [M.neighbour(a, +1), site]
        vals += [np.ones(S), -np.ones(S)]
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(3 * S, S))


def _d1(M: LatticeTorus) -> sp.csr_matrix:
    S = M.n_sites
    site = np.arange(S)
    rows, cols, vals = [], [], []
    for p, (a, b) in enumerate([(0, 1), (0, 2), (1, 2)]):
        f = site * 3 + p
        terms = [(site, a, 1.0), (M.neighbour(a, +1), b, 1.0), (M.neighbour(b, +1), a, -1.0), (site, b, -1.0)]
        for s, ax, sign in terms:
            rows.append(f)
            cols.append(s * 3 + ax)
            vals.append(np.full(S, sign))
    return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(3 * S, 3 * S))


def hodge_laplacian(M: LatticeTorus, n: int = 2) -> TruncatedOperator:
    """DEC Hodge Laplacian ``d delta + delta d`` on su(n)-valued one-forms.

    Diagonal Hodge stars of the cubic lattice: ``*0 = h^3``, ``*1 = h``,
    ``*2 = 1/h``. Acts on ``OneForm.coeffs`` vectors, identity on the Lie factor.
    """
    h = M.spacing
    d0, d1 = _d0(M), _d1(M)
    star0_inv = 1.0 / h**3
    star1, star1_inv = h, 1.0 / h
    star2 = 1.0 / h
    lap = (d0 @ d0.T) * (star0_inv * star1) + (d1.T @ d1) * (star1_inv * star2)
    d = lie.lie_dim(n)
    full = sp.kron(lap, sp.identity(d), format="csr")
    return TruncatedOperator(full, BasisSpec(lattice_dim=full.shape[0]), hermitian=True)


def laplacian_symbol(M: LatticeTorus) -> np.ndarray:
    """Eigenvalue ``(2/h)^2 sum_j sin^2(pi k_j / N)`` on the FFT grid, ``(N, N, N)``."""
    N = M.sites_per_axis
    s = np.sin(np.pi * np.arange(N) / N) ** 2
    tot = s[:, None, None] + s[None, :, None] + s[None, None, :]
    return (2.0 / M.spacing) ** 2 * tot


def laplacian_power(M: LatticeTorus, values: np.ndarray, sigma: float) -> np.ndarray:
    """``Delta^sigma`` applied to per-site data ``(S, ...)`` by spectral calculus."""
    N = M.sites_per_axis
    arr = np.asarray(values)
    rest = arr.shape[1:]
    grid = arr.reshape((N, N, N) + rest)
    lam = laplacian_symbol(M)
    mult = np.where(lam > 0, lam, 0.0) ** sigma
    spec = np.fft.fftn(grid, axes=(0, 1, 2)) * mult.reshape((N, N, N) + (1,) * len(rest))
    out = np.fft.ifftn(spec, axes=(0, 1, 2)).reshape(arr.shape)
    return out.real if np.isrealobj(arr) else out


def regulate(M: LatticeTorus, values: np.ndarray, params: SobolevParams) -> np.ndarray:
    """``(1 + tau1 Delta^sigma)`` applied to per-site data."""
    return values + params.tau1 * laplacian_power(M, values, params.sigma)


def l2_inner(w1: OneForm, w2: OneForm) -> complex:
    if w1.torus != w2.torus:
        raise ValueError("one-forms live on different lattices")
    return complex(2.0 * w1.torus.volume_element * np.vdot(w1.values, w2.values))


def sobolev_inner(w1: OneForm, w2: OneForm, params: SobolevParams) -> complex:
    """Regulated inner product, conjugate-linear in the first slot."""
    if w1.torus != w2.torus:
        raise ValueError("one-forms live on different lattices")
    M = w1.torus
    a = regulate(M, w1.values, params)
    b = regulate(M, w2.values, params)
    return complex(2.0 * M.volume_element * np.vdot(a, b))


def _symmetric(k: np.ndarray, N: int) -> np.ndarray:
    off = (N - 1) // 2
    return np.mod(k + off, N) - off


def _mode_labels(M: LatticeTorus, n_rep: int):
    """All real Fourier eigenforms with their sort keys."""
    N = M.sites_per_axis
    d = lie.lie_dim(n_rep)
    seen = set()
    modes = []
    for k in np.ndindex(N, N, N):
        ks = tuple(int(v) for v in _symmetric(np.array(k), N))
        kn = tuple(int(v) for v in _symmetric(-np.array(k), N))
        canon = max(ks, kn)
        if canon in seen:
            continue
        seen.add(canon)
        folded = sorted(min(abs(v), N - abs(v)) for v in canon)
        unit = float(sum(np.sin(np.pi * f / N) ** 2 for f in folded))
        kinds = ("cos",) if ks == kn else ("cos", "sin")
        for kind in kinds:
            for axis in range(3):
                for a in range(d):
                    modes.append((round(unit, 12), canon, 0 if kind == "cos" else 1, axis, a, unit))
    modes.sort(key=lambda m: m[:5])
    return modes


class SobolevBasis:
    """Regulated-orthonormal eigenforms ``xi_i = e_i / (1 + tau1 lambda_i^sigma)``.

    ``e_i`` are L^2-orthonormal real Fourier eigenforms of the Hodge
    Laplacian, one Lie generator and one axis each. Vectors are produced on
    demand from their labels.
    """

    def __init__(self, torus: LatticeTorus, params: SobolevParams, size: int, rep_dim: int = 2):
        self.torus = torus
        self.params = params
        self.rep_dim = rep_dim
        self.lie_dim = lie.lie_dim(rep_dim)
        total = 3 * torus.n_sites * self.lie_dim
        if not 0 <= size <= total:
            raise ValueError(f"basis size {size} exceeds the one-form dimension {total}")
        modes = _mode_labels(torus, rep_dim)[:size]
        self.labels = [(m[1], "cos" if m[2] == 0 else "sin", m[3], m[4]) for m in modes]
        self.eigenvalues = np.array([(2.0 / torus.spacing) ** 2 * m[5] for m in modes])
        self.weights = params.weight(self.eigenvalues)
        self._k = np.array([lab[0] for lab in self.labels], dtype=float).reshape(-1, 3)
        self._sin = np.array([lab[1] == "sin" for lab in self.labels])
        self._axis = np.array([lab[2] for lab in self.labels], dtype=int)
        self._lie = np.array([lab[3] for lab in self.labels], dtype=int)
        N = torus.sites_per_axis
        selfconj = np.all((self._k == 0) | (np.abs(self._k) * 2 == N), axis=1) if size else np.zeros(0, bool)
        self._amp = np.where(selfconj, 1.0, np.sqrt(2.0)) / np.sqrt(torus.volume)

    @property
    def size(self) -> int:
        return len(self.labels)

    def index_of(self, k, kind: str = "cos", axis: int = 0, lie_index: int = 0) -> int:
        key = (tuple(int(v) for v in k), kind, axis, lie_index)
        return self.labels.index(key)

    def profile(self, indices, points: np.ndarray) -> np.ndarray:
        """Scalar profile of ``e_i`` at exact coordinates, ``(m, P)``."""
        idx = np.atleast_1d(indices)
        phase = 2 * np.pi / self.torus.box_length * (self._k[idx] @ np.asarray(points, dtype=float).reshape(-1, 3).T)
        vals = np.where(self._sin[idx][:, None], np.sin(phase), np.cos(phase))
        return self._amp[idx][:, None] * vals

    def interpolated_profile(self, indices, points: np.ndarray) -> np.ndarray:
        """Trilinear interpolation of the sampled profile of ``e_i``, ``(m, P)``."""
        M = self.torus
        sidx, w = M.stencil(points)
        corners = M.site_coords()[sidx.ravel()]
        vals = self.profile(indices, corners).reshape(len(np.atleast_1d(indices)), *sidx.shape)
        return np.einsum("mpc,pc->mp", vals, w)

    def l2_coeffs(self, indices=None) -> np.ndarray:
        """``e_i`` as su(n) coordinate arrays, ``(m, S, 3, d)``."""
        idx = np.arange(self.size) if indices is None else np.atleast_1d(indices)
        prof = self.profile(idx, self.torus.site_coords())
        out = np.zeros((len(idx), self.torus.n_sites, 3, self.lie_dim))
        out[np.arange(len(idx))[:, None], np.arange(self.torus.n_sites)[None, :], self._axis[idx][:, None], self._lie[idx][:, None]] = prof
        return out

    def coeffs(self, indices=None) -> np.ndarray:
        """``xi_i`` as su(n) coordinate arrays, ``(m, S, 3, d)``."""
        idx = np.arange(self.size) if indices is None else np.atleast_1d(indices)
        return self.l2_coeffs(idx) / self.weights[idx][:, None, None, None]

    def oneform(self, i: int) -> OneForm:
        return OneForm.from_coeffs(self.torus, self.coeffs(i)[0], self.rep_dim)

    def generator(self, indices) -> np.ndarray:
        """Lie generator times axis unit vector of each mode, ``(m, 3, n, n)``."""
        idx = np.atleast_1d(indices)
        T = lie.su_basis(self.rep_dim)
        out = np.zeros((len(idx), 3, self.rep_dim, self.rep_dim), dtype=complex)
        out[np.arange(len(idx)), self._axis[idx]] = T[self._lie[idx]]
        return out

    def coordinates(self, omega: OneForm, indices=None) -> np.ndarray:
        """Regulated coefficients ``<xi_i | omega>_s`` (real part, real forms)."""
        idx = np.arange(self.size) if indices is None else np.atleast_1d(indices)
        c = omega.coeffs
        return self.weights[idx] * self.torus.volume_element * np.einsum("msad,sad->m", self.l2_coeffs(idx), c)


def build_sobolev_basis(M: LatticeTorus, params: SobolevParams, n: int, rep_dim: int = 2) -> SobolevBasis:
    return SobolevBasis(M, params, n, rep_dim)


def coords_to_connection(x, basis: SobolevBasis, indices=None) -> Connection:
    """``sum_i x_i xi_i`` as a connection; ``indices`` selects the modes (default: first len(x))."""
    x = np.asarray(x, dtype=float).ravel()
    idx = np.arange(len(x)) if indices is None else np.atleast_1d(indices)
    if len(idx) != len(x):
        raise ValueError("coordinate vector and mode list differ in length")
    if len(idx) and idx.max() >= basis.size:
        raise ValueError("mode index beyond basis truncation")
    c = np.einsum("m,msad->sad", x, basis.coeffs(idx)) if len(idx) else np.zeros((basis.torus.n_sites, 3, basis.lie_dim))
    return Connection(basis.torus, lie.from_coeffs(c, basis.rep_dim))


def save_basis(path, basis: SobolevBasis) -> None:
    """Cache eigenvalues, labels and L^2-normalized vectors with a versioned header."""
    header = {
        "format": "qhtlab-sobolev-basis",
        "version": BASIS_FILE_VERSION,
        "N": basis.torus.sites_per_axis,
        "L": basis.torus.box_length,
        "tau1": basis.params.tau1,
        "sigma": basis.params.sigma,
        "rep_dim": basis.rep_dim,
        "size": basis.size,
        "tie_break": TIE_BREAK_RULE,
    }
    with open(Path(path), "wb") as fh:
        np.savez(
            fh,
            header=np.array(json.dumps(header, sort_keys=True)),
            eigenvalues=basis.eigenvalues,
            labels=np.array([list(lab[0]) + [lab[1] == "sin", lab[2], lab[3]] for lab in basis.labels], dtype=int).reshape(-1, 6),
            vectors=basis.l2_coeffs(),
        )


def load_basis(path) -> tuple[dict, np.ndarray, np.ndarray]:
    """Read a basis cache: ``(header, eigenvalues, L^2 vectors)``."""
    with np.load(Path(path)) as data:
        header = json.loads(str(data["header"]))
        if header.get("format") != "qhtlab-sobolev-basis":
            raise ValueError("not a basis cache file")
        if header["version"] > BASIS_FILE_VERSION:
            raise ValueError(f"unsupported basis cache version {header['version']}")
        return header, data["eigenvalues"].copy(), data["vectors"].copy()
