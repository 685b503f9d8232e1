import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from qhtlab.forms import OneForm
from qhtlab.lattice import build_torus
from qhtlab.sobolev import (
    SobolevParams,
    _d0,
    _d1,
    build_sobolev_basis,
    coords_to_connection,
    hodge_laplacian,
    l2_inner,
    laplacian_power,
    load_basis,
    regulate,
    save_basis,
    sobolev_inner,
)


@pytest.fixture(scope="module")
def basis():
    return build_sobolev_basis(build_torus(8, 1.0), SobolevParams(1.0, 2.0), 200)


def test_params_validation():
    with pytest.raises(ValueError):
        SobolevParams(0.0, 1.0)
    with pytest.raises(ValueError):
        SobolevParams(1.0, -1.0)


def test_exterior_derivatives_compose_to_zero():
    M = build_torus(4, 1.0)
    assert abs(_d1(M) @ _d0(M)).max() == 0


def test_hodge_laplacian_is_componentwise_seven_point():
    M = build_torus(4, 1.0)
    lap = hodge_laplacian(M, 2).matrix
    rng = np.random.default_rng(0)
    v = rng.standard_normal((M.n_sites, 3, 3))
    got = (lap @ v.ravel()).reshape(v.shape)
    h = M.spacing
    want = 6 * v
    for a in range(3):
        want = want - v[M.neighbour(a, 1)] - v[M.neighbour(a, -1)]
    assert_allclose(got, want / h**2, atol=1e-10)


def test_basis_spectrum_matches_dense_eigendecomposition():
    # Oracle: dense symmetric eigensolver on the DEC Laplacian (scalar part).
    M = build_torus(4, 1.0)
    lap = hodge_laplacian(M, 2).matrix.toarray()[::3, ::3]
    dense = np.sort(np.repeat(scipy.linalg.eigvalsh(lap), 3))
    B = build_sobolev_basis(M, SobolevParams(1.0, 1.0), 3 * M.n_sites * 3)
    assert_allclose(B.eigenvalues, dense, atol=1e-10)


def test_gram_identity(basis):
    M = basis.torus
    xi = basis.coeffs()
    reg = regulate(M, np.moveaxis(xi, 0, -1), basis.params)
    gram = M.volume_element * np.einsum("sadm,sadn->mn", reg, reg)
    assert_allclose(gram, np.eye(basis.size), atol=1e-10)


def test_gram_through_matrix_inner_product(basis):
    for i, j in [(0, 0), (3, 3), (10, 57), (150, 150), (7, 199)]:
        assert_allclose(sobolev_inner(basis.oneform(i), basis.oneform(j), basis.params), float(i == j), atol=1e-10)


def test_harmonic_modes(basis):
    harmonic = [i for i, lab in enumerate(basis.labels) if lab[0] == (0, 0, 0)]
    assert harmonic == list(range(9))
    assert np.all(basis.eigenvalues[harmonic] == 0.0)
    assert np.all(basis.weights[harmonic] == 1.0)


def test_eigenforms(basis):
    M = basis.torus
    lap = hodge_laplacian(M, 2).matrix
    e = basis.l2_coeffs().reshape(basis.size, -1)
    res = (lap @ e.T).T - basis.eigenvalues[:, None] * e
    assert np.abs(res).max() / basis.eigenvalues.max() < 1e-12


def test_plane_wave_eigenvalues_match_symbol(basis):
    M = basis.torus
    for i, lab in enumerate(basis.labels):
        k = np.array(lab[0])
        want = (2 / M.spacing) ** 2 * np.sum(np.sin(np.pi * k / M.sites_per_axis) ** 2)
        assert abs(basis.eigenvalues[i] - want) <= 1e-12 * max(1.0, want)


def test_sobolev_norm_identity(basis):
    M = basis.torus
    for i in (0, 20, 120, 199):
        e = OneForm.from_coeffs(M, basis.l2_coeffs(i)[0])
        w = basis.weights[i]
        assert_allclose(sobolev_inner(e, e, basis.params).real, w**2 * l2_inner(e, e).real, rtol=1e-10)


def test_ordering_is_deterministic(basis):
    again = build_sobolev_basis(basis.torus, basis.params, 200)
    assert again.labels == basis.labels
    assert np.all(np.diff(basis.eigenvalues) >= -1e-12)
    lab = basis.labels[9:15]
    # First shell: one Fourier index, cos before sin, then axis, then Lie index.
    assert [x[1] for x in lab] == ["cos"] * 6


def test_fft_power_matches_matrix_power():
    M = build_torus(4, 1.0)
    lap = hodge_laplacian(M, 2).matrix
    v = np.random.default_rng(2).standard_normal((M.n_sites, 3, 3))
    twice = lap @ (lap @ v.ravel())
    assert_allclose(laplacian_power(M, v, 2.0).ravel(), twice, rtol=1e-10, atol=1e-8)
    assert_allclose(laplacian_power(M, v, 1.0).ravel(), lap @ v.ravel(), rtol=1e-10, atol=1e-10)


def test_mismatched_lattices_rejected():
    a = OneForm.zeros(build_torus(4, 1.0))
    b = OneForm.zeros(build_torus(8, 1.0))
    with pytest.raises(ValueError):
        sobolev_inner(a, b, SobolevParams(1.0, 1.0))


@settings(max_examples=20, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=12, max_size=12))
def test_coordinates_roundtrip(x):
    M = build_torus(4, 1.0)
    B = build_sobolev_basis(M, SobolevParams(0.5, 1.5), 40)
    idx = np.array([0, 4, 9, 10, 11, 15, 20, 22, 30, 31, 38, 39])
    conn = coords_to_connection(x, B, idx)
    assert_allclose(B.coordinates(conn, idx), x, atol=1e-10)
    assert conn.is_antihermitian()


def test_coords_to_connection_checks_sizes(basis):
    with pytest.raises(ValueError):
        coords_to_connection([1.0, 2.0], basis, [0])
    with pytest.raises(ValueError):
        coords_to_connection([1.0], basis, [basis.size])


def test_basis_cache_roundtrip(tmp_path, basis):
    p = tmp_path / "basis.npz"
    save_basis(p, basis)
    header, lam, vecs = load_basis(p)
    assert header["size"] == basis.size and header["version"] == 1
    assert "tie_break" in header
    assert_allclose(lam, basis.eigenvalues)
    assert_allclose(vecs, basis.l2_coeffs())


def test_size_bounds():
    M = build_torus(2, 1.0)
    with pytest.raises(ValueError):
        build_sobolev_basis(M, SobolevParams(1.0, 1.0), 3 * 8 * 3 + 1)
