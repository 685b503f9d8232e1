from functools import reduce

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp
from numpy.testing import assert_allclose

from qhtlab import bott_dirac as bd
from qhtlab.lattice import VectorField, build_torus, integrate_flow
from qhtlab.operators import BasisSpec, TruncatedOperator, identity
from qhtlab.oscillator import ModeParams, mode_matrices
from qhtlab.sobolev import SobolevParams, build_sobolev_basis

from test_fock import jw_creation


def brute_force_bott_dirac(p, n):
    """Dense Kronecker assembly with Jordan-Wigner fermions, mode 0 least significant."""
    K = p.K
    IK = np.eye(K)
    out = 0
    for i in range(n):
        X, D = mode_matrices(K, p.s[i], p.tau2)
        a = jw_creation(n, i).astype(float)
        c, cbar = a + a.T, a - a.T
        Xi = reduce(np.kron, [X if j == i else IK for j in range(n)])
        Di = reduce(np.kron, [D if j == i else IK for j in range(n)])
        out = out + p.tau2 * np.kron(Di, cbar) + p.s[i] * np.kron(Xi, c)
    return out


@pytest.mark.parametrize("n,K,s", [(1, 4, (1.0,)), (2, 3, (1.0, 2.0)), (3, 2, (0.5, 1.0, 3.0))])
def test_assembly_matches_brute_force(n, K, s):
    p = ModeParams(0.7, s, K)
    assert_allclose(bd.assemble_bott_dirac(p, n).dense(), brute_force_bott_dirac(p, n), atol=1e-14)


def test_explicit_single_mode():
    p = ModeParams(1.0, (1.0,), 2)
    B = bd.assemble_bott_dirac(p).dense()
    want = np.zeros((4, 4))
    want[1, 2] = want[2, 1] = np.sqrt(2.0)
    assert_allclose(B, want, atol=1e-15)
    assert_allclose(np.linalg.eigvalsh(B @ B), [0, 0, 2, 2], atol=1e-14)


def test_self_adjoint_and_odd(rng):
    p = ModeParams(0.5, (1.0, 2.0), 6)
    B = bd.assemble_bott_dirac(p)
    assert B.hermitian_defect() < 1e-12
    ev = bd.spectrum(B)
    assert_allclose(ev, -ev[::-1], atol=1e-10)


def test_vacuum_is_annihilated():
    p = ModeParams(1.0, (1.0, 2.0, 3.0), 5)
    B = bd.assemble_bott_dirac(p)
    v = np.zeros(B.dim)
    v[0] = 1
    assert np.abs(B @ v).max() < 1e-14


def test_spectrum_single_mode_example():
    p = ModeParams(1.0, (1.0,), 16)
    assert_allclose(bd.spectrum(bd.bott_dirac_square(p), 4), [0, 2, 2, 4], atol=1e-10)


def test_spectrum_two_modes_example():
    p = ModeParams(1.0, (1.0, 2.0), 10)
    ev = bd.spectrum(bd.bott_dirac_square(p), 6)
    assert_allclose(ev, [0, 2, 2, 4, 4, 4], atol=1e-10)


@pytest.mark.parametrize("n,K,s,tau2", [(1, 12, (1.0,), 0.5), (2, 8, (1.0, 2.0), 1.0), (3, 5, (1.0, 2.0, 3.0), 0.5)])
def test_interior_spectrum_is_closed_form_multiset(n, K, s, tau2):
    p = ModeParams(tau2, s, K)
    B2 = bd.bott_dirac_square(p, n)
    dense = np.linalg.eigvalsh(B2.dense())
    assert_allclose(dense, bd.closed_form_spectrum(p, n), atol=1e-9)
    assert np.sum(np.abs(dense) < 1e-9) == 1
    assert dense.min() > -1e-10


def test_square_closed_form_residuals():
    for n, K, s in [(1, 10, (1.0,)), (3, 5, (1.0, 2.0, 3.0))]:
        r = bd.verify_square_closed_form(ModeParams(1.0, s, K), n)
        assert r.interior < 1e-12
        assert r.edge > 1.0


def test_edge_defect_only_on_top_level():
    p = ModeParams(1.0, (1.0, 2.0), 6)
    B2 = bd.bott_dirac_square(p, interior=False).matrix
    diff = (B2 - sp.diags(bd.closed_form_diagonal(p))).tocoo()
    k, _ = bd.occupations(2, 6)
    rows = np.unique(diff.row[np.abs(diff.data) > 1e-12])
    assert np.all(np.any(k[rows] >= 4, axis=1))
    assert np.all(np.any(k[rows] == 5, axis=1))


def test_spectrum_generic_and_errors():
    eye = identity(BasisSpec(fermion_modes=3))
    assert_allclose(bd.spectrum(eye), np.ones(8))
    bad = TruncatedOperator(np.array([[0.0, 1.0], [0.0, 0.0]]), BasisSpec(fermion_modes=1))
    with pytest.raises(ValueError):
        bd.spectrum(bad)


def test_krylov_branch_matches_tridiagonal_oracle(rng):
    n = 5000
    d = rng.standard_normal(n)
    e = rng.standard_normal(n - 1)
    A = sp.diags([e, d, e], [-1, 0, 1], format="csr")
    op = TruncatedOperator(A, BasisSpec(lattice_dim=n), hermitian=True)
    got = bd.spectrum(op, 5)
    want = scipy.linalg.eigvalsh_tridiagonal(d, e, select="i", select_range=(0, 4))
    assert_allclose(got, want, atol=1e-8)


def test_resource_guard():
    with pytest.raises(bd.ResourceError):
        bd.assemble_bott_dirac(ModeParams(1.0, (1.0,) * 4, 10), max_dim=1000)


def test_embedding_isometry_and_spectrum(rng):
    n, K = 2, 5
    p = ModeParams(1.0, (1.0, 2.0, 3.0), K)
    dim = K**n * 2**n
    for _ in range(20):
        a = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        b = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
        ea, eb = bd.embed_product_state(a, n, K), bd.embed_product_state(b, n, K)
        assert abs(np.vdot(ea, eb) - np.vdot(a, b)) <= 1e-14 * np.linalg.norm(a) * np.linalg.norm(b)
    P = bd.embedding_matrix(n, K)[:, bd.interior_mask(n, K)]
    big = bd.bott_dirac_square(p, n + 1, interior=False).matrix
    compressed = (P.T @ big @ P).toarray()
    assert_allclose(np.linalg.eigvalsh(compressed), bd.spectrum(bd.bott_dirac_square(p, n)), atol=1e-9)


def short_path(M):
    X = VectorField.constant(M, np.ones(3) / np.sqrt(3))
    return integrate_flow(M, X, np.zeros(3), M.spacing / 100, steps=8)


def test_commutator_profile_zero_loop_and_monotone():
    M = build_torus(8, 1.0)
    B = build_sobolev_basis(M, SobolevParams(1.0, 2.0), 300)
    still = integrate_flow(M, VectorField.constant(M, (1, 0, 0)), np.zeros(3), 0.0)
    assert np.all(bd.commutator_growth_profile(still, B, 1.0).gamma == 0)
    prof = bd.commutator_growth_profile(short_path(M), B, 1.0)
    assert np.all(np.diff(prof.gamma) >= 0)
    assert_allclose(prof.n, np.arange(1, 301))


def test_holonomy_derivative_against_line_integral():
    # Oracle: first-order holonomy is -int xi_i . dgamma along the (short) path.
    M = build_torus(8, 1.0)
    B = build_sobolev_basis(M, SobolevParams(1.0, 2.0), 120)
    path = short_path(M)
    idx = np.arange(120)
    der = bd.holonomy_derivatives(path, B, idx)
    pts = path.points
    mid, disp = 0.5 * (pts[1:] + pts[:-1]), pts[1:] - pts[:-1]
    prof = B.interpolated_profile(idx, mid) / B.weights[:, None]
    want = -np.einsum("mk,ka,maij->mij", prof, disp, B.generator(idx))
    assert_allclose(der, want, atol=1e-9 * np.abs(want).max())


@pytest.mark.parametrize("sigma", [2.0, 3.0])
def test_increments_follow_regulator(sigma):
    M = build_torus(8, 1.0)
    B = build_sobolev_basis(M, SobolevParams(1.0, sigma), 1500)
    prof = bd.commutator_growth_profile(short_path(M), B, 1.0)
    slope, shells = bd.decay_slope(prof)
    assert shells >= 5
    assert abs(slope - 1.0) < 0.25
