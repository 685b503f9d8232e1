import json

import numpy as np
import pytest
import scipy.linalg
from scipy.integrate import solve_ivp
from numpy.testing import assert_allclose

from qhtlab import lie
from qhtlab.forms import AnalyticConnection, Connection, LatticeSpinor, OneForm
from qhtlab.holonomy import (
    adjoint_flow_on_oneform,
    adjoint_flow_operator,
    apply_holonomy_diffeo,
    holonomy,
    load_connection,
    path_ordered_exp,
    save_connection,
    transport,
)
from qhtlab.lattice import SiteFlow, VectorField, build_torus, integrate_flow

from test_lattice import compressible, swirl


def smooth_fn(p, amp=0.6):
    x = 2 * np.pi * p
    coeffs = np.stack([np.stack([np.sin(x[:, 0] + a + 2 * ax) + 0.5 * np.cos(x[:, 1] - a) for a in range(3)], -1) for ax in range(3)], 1)
    return lie.from_coeffs(amp * coeffs, 2)


@pytest.fixture(scope="module")
def M():
    return build_torus(8, 1.0)


@pytest.fixture(scope="module")
def conn(M):
    return Connection.sampled(M, smooth_fn)


def test_zero_connection_gives_identity(M):
    flow = SiteFlow(swirl(M), 0.7)
    hol = transport(flow.path, OneForm.zeros(M))
    assert_allclose(hol, np.broadcast_to(np.eye(2), hol.shape), atol=1e-14)


def test_abelian_loop(M):
    theta = 0.7
    A = np.zeros((3, 2, 2), complex)
    A[0] = 1j * theta * np.diag([1.0, -1.0])
    loop = integrate_flow(M, VectorField.constant(M, (1, 0, 0)), [0.2, 0.1, 0.5], 1.0, steps=1000)
    want = scipy.linalg.expm(-1j * theta * np.diag([1.0, -1.0]))
    assert_allclose(holonomy(loop, Connection.constant(M, A)), want, atol=1e-8)


def test_path_reversal_inverts(M, conn):
    path = integrate_flow(M, swirl(M), [0.1, 0.2, 0.3], 1.3, steps=200)
    prod = holonomy(path.reversed(), conn) @ holonomy(path, conn)
    assert_allclose(prod, np.eye(2), atol=1e-10)


def test_concatenation_composes(M, conn):
    X = swirl(M)
    p = integrate_flow(M, X, [0.1, 0.2, 0.3], 0.5, 50)
    q = integrate_flow(M, X, p.points[-1], 0.4, 40)
    assert_allclose(holonomy(p.concatenate(q), conn), holonomy(q, conn) @ holonomy(p, conn), atol=1e-13)


def test_holonomy_is_unitary(M, conn):
    U = holonomy(integrate_flow(M, swirl(M), [0.3, 0.3, 0.3], 2.0, 300), conn)
    assert_allclose(U.conj().T @ U, np.eye(2), atol=1e-12)
    assert abs(np.linalg.det(U) - 1) < 1e-12


def test_path_ordered_exp_matches_ode_solution(M):
    # Oracle: integrate dU/ds = -A(gamma(s)) . gamma'(s) U with a high-accuracy ODE solver.
    conn = AnalyticConnection(M, smooth_fn)
    v = np.array([0.3, -0.2, 0.5])
    start = np.array([0.1, 0.4, 0.2])
    T = 1.5

    def rhs(s, y):
        U = y.reshape(2, 2)
        A = np.einsum("a,aij->ij", v, conn.at(start + s * v)[0])
        return (-A @ U).ravel()

    sol = solve_ivp(rhs, (0, T), np.eye(2, dtype=complex).ravel(), rtol=1e-12, atol=1e-13)
    want = sol.y[:, -1].reshape(2, 2)
    path = integrate_flow(M, VectorField.constant(M, v), start, T, steps=4000)
    assert_allclose(holonomy(path, conn), want, atol=1e-7)


def test_later_segments_act_on_the_left():
    inc = np.zeros((2, 2, 2), complex)
    inc[0] = lie.su_basis(2)[0]
    inc[1] = lie.su_basis(2)[1]
    got = path_ordered_exp(inc)
    assert_allclose(got, scipy.linalg.expm(-inc[1]) @ scipy.linalg.expm(-inc[0]), atol=1e-14)


def test_gauge_covariance_of_constant_gauge(M, conn):
    # A constant gauge transformation g conjugates the connection and the holonomy.
    g = scipy.linalg.expm(lie.from_coeffs(np.array([0.3, -0.8, 0.5]), 2))
    rotated = Connection(M, g @ conn.values @ g.conj().T)
    path = integrate_flow(M, swirl(M), [0.2, 0.7, 0.1], 1.0, 100)
    assert_allclose(holonomy(path, rotated), g @ holonomy(path, conn) @ g.conj().T, atol=1e-12)


def random_spinor(M, rng):
    return LatticeSpinor(M, rng.standard_normal((M.n_sites, 2)) + 1j * rng.standard_normal((M.n_sites, 2)))


def test_holonomy_diffeo_unitary_for_commensurate_flow(rng):
    M = build_torus(16, 1.0)
    h = M.spacing
    conn = Connection.sampled(M, smooth_fn)
    X = VectorField.constant(M, (3 * h, -2 * h, h))
    a, b = random_spinor(M, rng), random_spinor(M, rng)
    fa, fb = apply_holonomy_diffeo(None, X, 1.0, conn, a), apply_holonomy_diffeo(None, X, 1.0, conn, b)
    assert_allclose(fa.inner(fb), a.inner(b), rtol=1e-6)
    assert_allclose(fa.norm(), a.norm(), rtol=1e-6)


def test_holonomy_diffeo_trivial_cases(M, conn, rng):
    psi = random_spinor(M, rng)
    f = np.cos(np.arange(M.n_sites))
    out = apply_holonomy_diffeo(f, swirl(M), 0.0, conn, psi)
    assert_allclose(out.values, f[:, None] * psi.values, atol=1e-14)
    h = M.spacing
    shifted = apply_holonomy_diffeo(None, VectorField.constant(M, (h, 0, 0)), 1.0, OneForm.zeros(M), psi)
    want = np.roll(psi.values.reshape(8, 8, 8, 2), 1, axis=0).reshape(-1, 2)
    assert_allclose(shifted.values, want, atol=1e-13)


def test_negative_control_without_jacobian():
    M = build_torus(16, 1.0)
    conn = Connection.sampled(M, smooth_fn)
    c = M.site_coords() - 0.5
    bump = np.exp(-np.sum(c**2, axis=1) / (2 * 0.25**2))
    psi = LatticeSpinor(M, np.stack([bump, 0.5j * bump], -1))
    X = compressible(M)
    bare = apply_holonomy_diffeo(None, X, 0.5, conn, psi, unitarize=False)
    kept = apply_holonomy_diffeo(None, X, 0.5, conn, psi, unitarize=True)
    drift_bare = abs(bare.norm() - psi.norm()) / psi.norm()
    drift_kept = abs(kept.norm() - psi.norm()) / psi.norm()
    assert drift_bare > 0.1
    assert drift_kept < 0.02


def test_adjoint_operator_matches_direct_action(M, conn, rng):
    X = compressible(M)
    flow = SiteFlow(X, 0.6)
    omega = OneForm.from_coeffs(M, rng.standard_normal((M.n_sites, 3, 3)))
    direct = adjoint_flow_on_oneform(X, 0.6, conn, omega, flow=flow)
    R = adjoint_flow_operator(flow, conn)
    assert_allclose((R @ omega.coeffs.ravel()).reshape(M.n_sites, 3, 3), direct.coeffs, atol=1e-12)


def test_adjoint_action_stays_antihermitian(M, conn, rng):
    omega = OneForm.from_coeffs(M, rng.standard_normal((M.n_sites, 3, 3)))
    out = adjoint_flow_on_oneform(swirl(M), 0.5, conn, omega)
    assert out.antihermitian_defect() < 1e-12


@pytest.mark.parametrize("fmt", ["bin", "csv"])
def test_connection_roundtrip(tmp_path, M, conn, fmt):
    path = tmp_path / f"conn.{fmt}"
    save_connection(path, conn, fmt)
    back = load_connection(path)
    assert back.torus == M
    assert_allclose(back.values, conn.values, rtol=0, atol=0)
    head = path.read_bytes().split(b"\n", 1)[0].decode().lstrip("# ")
    meta = json.loads(head)
    assert meta["format"] == "qhtlab-connection" and meta["version"] == 1 and meta["encoding"] == fmt


def test_load_rejects_foreign_files(tmp_path):
    p = tmp_path / "x.bin"
    p.write_text(json.dumps({"format": "other"}) + "\n")
    with pytest.raises(ValueError):
        load_connection(p)
    p.write_text(json.dumps({"format": "qhtlab-connection", "version": 99}) + "\n")
    with pytest.raises(ValueError):
        load_connection(p)


def test_spinor_on_other_lattice_rejected(M, conn, rng):
    other = build_torus(4, 1.0)
    with pytest.raises(ValueError):
        apply_holonomy_diffeo(None, swirl(M), 0.3, conn, random_spinor(other, rng))
