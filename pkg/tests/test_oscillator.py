import numpy as np
import pytest
from numpy.testing import assert_allclose

from qhtlab.oscillator import (
    BosonicState,
    ModeParams,
    embed_vacuum,
    hermite_functions,
    mode_inner,
    mode_matrices,
    mode_wavefunctions,
    quadrature_grid,
    translation_matrix,
    vacuum,
)


def test_params_validation():
    with pytest.raises(ValueError):
        ModeParams(0.0, (1.0,), 4)
    with pytest.raises(ValueError):
        ModeParams(1.0, (1.0,), 1)
    with pytest.raises(ValueError):
        ModeParams(1.0, (2.0, 1.0), 4)
    with pytest.raises(ValueError):
        ModeParams(1.0, (-1.0,), 4)
    assert ModeParams.preset("linear", 3).s == (1.0, 2.0, 3.0)
    assert ModeParams.preset("unit", 2).s == (1.0, 1.0)
    with pytest.raises(ValueError):
        ModeParams.preset("cubic", 2)


def test_hermite_functions_orthonormal():
    y = np.linspace(-14, 14, 8001)
    h = hermite_functions(12, y)
    gram = np.trapezoid(h[:, None] * h[None], y, axis=-1)
    assert_allclose(gram, np.eye(12), atol=1e-10)


@pytest.mark.parametrize("s,tau2", [(1.0, 1.0), (2.0, 0.5), (3.0, 1.0)])
def test_mode_matrices_against_quadrature(s, tau2):
    # Oracle: matrix elements <phi_k | x | phi_l> and <phi_k | d/dx | phi_l> by
    # trapezoid quadrature, with the derivative taken by finite differences.
    K = 10
    x = np.linspace(-12, 12, 24001) * np.sqrt(tau2 / s)
    phi = mode_wavefunctions(K, x, s, tau2)
    Xq = np.trapezoid(phi[:, None] * x * phi[None], x, axis=-1)
    dphi = np.gradient(phi, x, axis=1)
    Dq = np.trapezoid(phi[:, None] * dphi[None], x, axis=-1)
    X, D = mode_matrices(K, s, tau2)
    assert_allclose(X, Xq, atol=1e-8)
    assert_allclose(D, Dq, atol=1e-5)


def test_canonical_commutator_below_edge():
    X, D = mode_matrices(12, 2.0, 0.7)
    comm = D @ X - X @ D
    assert_allclose(comm[:-1, :-1], np.eye(11), atol=1e-13)


def test_quadrature_transform():
    x, V = quadrature_grid(10, 10, 2.0, 0.5)
    assert_allclose(V.T @ V, np.eye(10), atol=1e-13)
    assert_allclose(V @ V.T, np.eye(10), atol=1e-13)
    X, _ = mode_matrices(10, 2.0, 0.5)
    # Diagonalizing X: the nodes are its eigenvalues.
    assert_allclose(np.sort(np.linalg.eigvalsh(X)), np.sort(x), atol=1e-12)
    with pytest.raises(ValueError):
        quadrature_grid(5, 10, 1.0, 1.0)


def test_translation_shifts_wavefunction():
    K, s, tau2, a = 40, 1.0, 1.0, 0.6
    T = translation_matrix(K, s, tau2, a)
    eta = np.zeros(K)
    eta[:4] = [0.5, -0.3, 0.2, 0.1]
    x = np.linspace(-4, 4, 41)
    got = (T @ eta) @ mode_wavefunctions(K, x, s, tau2)
    want = eta @ mode_wavefunctions(K, x + a, s, tau2)
    assert_allclose(got, want, atol=1e-10)
    assert_allclose(T.T @ T, np.eye(K), atol=1e-12)


def test_vacuum_and_embedding():
    v = vacuum(2, 5)
    assert v.n_modes == 2 and v.cutoff == 5
    assert v.norm() == 1.0
    rng = np.random.default_rng(0)
    a = BosonicState(rng.standard_normal((4, 4)))
    b = BosonicState(rng.standard_normal((4, 4)))
    ea, eb = embed_vacuum(a), embed_vacuum(b)
    assert ea.n_modes == 3
    assert_allclose(mode_inner(ea, eb), mode_inner(a, b), rtol=1e-14)
    with pytest.raises(ValueError):
        embed_vacuum(a, ModeParams(1.0, (1.0, 1.0), 4))
    with pytest.raises(ValueError):
        mode_inner(a, ea)
