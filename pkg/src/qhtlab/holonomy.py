"""Parallel transport along flows and holonomy-diffeomorphism operators.

Sign convention: transport along a segment with displacement ``dx`` at a
point where the connection is ``A`` multiplies by ``exp(-A . dx)``; later
segments act from the left.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import lie
from .forms import Connection, LatticeSpinor, OneForm
from .lattice import FlowPath, LatticeTorus, SiteFlow, VectorField

FORMAT_VERSION = 1


def path_ordered_exp(increments: np.ndarray) -> np.ndarray:
    """``exp(-inc[K-1]) ... exp(-inc[0])`` for increments ``(K, ..., n, n)``."""
    K = increments.shape[0]
    n = increments.shape[-1]
    U = np.broadcast_to(np.eye(n, dtype=complex), increments.shape[1:]).copy()
    if K == 0:
        return U
    steps = lie.expm_antihermitian(-increments)
    for k in range(K):
        U = steps[k] @ U
    return U


def _increments(points: np.ndarray, conn) -> np.ndarray:
    """Connection contracted with segment displacements, ``(K, P, n, n)``."""
    mid = 0.5 * (points[1:] + points[:-1])
    disp = points[1:] - points[:-1]
    K, P = mid.shape[:2]
    A = conn.at(mid.reshape(-1, 3))
    A = A.reshape((K, P) + A.shape[1:])
    return np.einsum("kpa,kpaij->kpij", disp, A)


def transport(points: np.ndarray, conn) -> np.ndarray:
    """Holonomies along many sampled paths ``points[k, p, :]`` at once."""
    points = np.asarray(points, dtype=float)
    n = conn.rep_dimension
    if points.shape[0] < 2:
        return np.broadcast_to(np.eye(n, dtype=complex), (points.shape[1], n, n)).copy()
    return path_ordered_exp(_increments(points, conn))


def holonomy(path: FlowPath, conn) -> np.ndarray:
    """Hol(gamma, conn): the transport from the start of ``path`` to its end."""
    return transport(path.points[:, None, :], conn)[0]


def apply_holonomy_diffeo(
    f,
    X: VectorField,
    t: float,
    conn,
    psi: LatticeSpinor,
    steps: int = 32,
    unitarize: bool = True,
    flow: SiteFlow | None = None,
) -> LatticeSpinor:
    """``(f e^X psi)(m') = J^{1/2} f(m) Hol(gamma, conn) psi(m)``, ``m = e^{-tX}(m')``.

    ``f`` is ``None``/``1`` (the global algebra) or per-site samples. ``J``
    is the Jacobian of ``e^{-tX}`` at ``m'``; dropping it (``unitarize=False``)
    gives the bare transport, which is not norm preserving for compressible X.
    """
    M = X.torus
    if psi.torus != M:
        raise ValueError("spinor lives on a different lattice")
    if flow is None:
        flow = SiteFlow(X, t, steps)
    psi_src = flow.interpolate_at_sources(psi.values)
    hol = transport(flow.path, conn)
    out = np.einsum("pij,pj->pi", hol, psi_src)
    if f is not None and not (np.isscalar(f) and f == 1):
        fvals = np.broadcast_to(np.asarray(f), (M.n_sites,))
        out *= flow.interpolate_at_sources(fvals.astype(complex))[:, None]
    if unitarize:
        out *= np.sqrt(flow.jacobian)[:, None]
    return LatticeSpinor(M, out)


def adjoint_flow_on_oneform(
    X: VectorField, t: float, conn, omega: OneForm, steps: int = 32, flow: SiteFlow | None = None
) -> OneForm:
    """``Hol (e^{-tX})^* omega Hol^{-1}`` evaluated at every site ``m2``."""
    if omega.torus != X.torus:
        raise ValueError("one-form lives on a different lattice")
    if flow is None:
        flow = SiteFlow(X, t, steps)
    pulled = flow.pullback_values(omega.values)
    hol = transport(flow.path, conn)
    out = np.einsum("pij,pajk,plk->pail", hol, pulled, hol.conj())
    return omega.with_values(out)


def adjoint_flow_operator(flow: SiteFlow, conn, hol: np.ndarray | None = None) -> sp.csr_matrix:
    """Real sparse matrix of ``adjoint_flow_on_oneform`` on su(n) coordinates.

    Acts on flattened ``OneForm.coeffs`` vectors, index ``(site*3 + axis)*d + a``.
    ``hol`` may pass precomputed per-site holonomies instead of ``conn``.
    """
    M = flow.torus
    if hol is None:
        hol = transport(flow.path, conn)
    n = hol.shape[-1]
    d = lie.lie_dim(n)
    S = M.n_sites
    R = lie.adjoint_matrix(hol)  # (S, d, d)
    idx, w = flow._stencil  # (S, 8)
    D = flow.differential  # (S, i, a)
    vals = np.einsum("sc,sia,sxy->scaixy", w, D, R)
    site = np.arange(S)[:, None, None, None, None, None]
    ax_a = np.arange(3)[None, None, :, None, None, None]
    ax_i = np.arange(3)[None, None, None, :, None, None]
    la = np.arange(d)[None, None, None, None, :, None]
    lb = np.arange(d)[None, None, None, None, None, :]
    src = idx[:, :, None, None, None, None]
    rows = np.broadcast_to((site * 3 + ax_a) * d + la, vals.shape)
    cols = np.broadcast_to((src * 3 + ax_i) * d + lb, vals.shape)
    size = S * 3 * d
    return sp.csr_matrix((vals.ravel(), (rows.ravel(), cols.ravel())), shape=(size, size))


def _header(conn: OneForm) -> dict:
    M = conn.torus
    return {
        "format": "qhtlab-connection",
        "version": FORMAT_VERSION,
        "n": conn.rep_dimension,
        "N": M.sites_per_axis,
        "L": M.box_length,
        "axis_order": ["site", "axis", "row", "col"],
        "site_order": "C order over (i0, i1, i2)",
        "dtype": "<c16",
    }


def save_connection(path, conn: OneForm, fmt: str = "bin") -> None:
    """Write a connection as one JSON header line followed by site-major data.

    ``fmt="bin"`` stores little-endian complex128, ``fmt="csv"`` stores rows
    ``site,axis,row,col,re,im`` with round-trip float formatting.
    """
    path = Path(path)
    header = _header(conn)
    header["encoding"] = fmt
    if fmt == "bin":
        with open(path, "wb") as fh:
            fh.write((json.dumps(header, sort_keys=True) + "\n").encode())
            fh.write(conn.values.astype("<c16").tobytes())
    elif fmt == "csv":
        n = conn.rep_dimension
        with open(path, "w", newline="") as fh:
            fh.write("# " + json.dumps(header, sort_keys=True) + "\n")
            wr = csv.writer(fh)
            wr.writerow(["site", "axis", "row", "col", "re", "im"])
            for (s, a, i, j), z in np.ndenumerate(conn.values):
                wr.writerow([s, a, i, j, repr(float(z.real)), repr(float(z.imag))])
    else:
        raise ValueError(f"unknown format {fmt!r}")


def load_connection(path) -> Connection:
    path = Path(path)
    with open(path, "rb") as fh:
        first = fh.readline().decode()
        payload = fh.read()
    if first.startswith("# "):
        first = first[2:]
    header = json.loads(first)
    if header.get("format") != "qhtlab-connection":
        raise ValueError(f"{path} is not a connection file")
    if header["version"] > FORMAT_VERSION:
        raise ValueError(f"unsupported connection file version {header['version']}")
    M = LatticeTorus(header["N"], header["L"])
    n = header["n"]
    shape = (M.n_sites, 3, n, n)
    if header["encoding"] == "bin":
        values = np.frombuffer(payload, dtype="<c16").reshape(shape).astype(complex)
    else:
        values = np.zeros(shape, dtype=complex)
        rows = csv.reader(payload.decode().splitlines())
        next(rows)
        for s, a, i, j, re, im in rows:
            values[int(s), int(a), int(i), int(j)] = complex(float(re), float(im))
    return Connection(M, values)
