import time
from functools import reduce

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from numpy.testing import assert_allclose

from qhtlab import fock


def jw_creation(n, i):
    """Jordan-Wigner creation operator; mode 0 is the least significant bit."""
    Z = np.diag([1, -1])
    up = np.array([[0, 0], [1, 0]])
    I2 = np.eye(2, dtype=int)
    factors = [Z if j < i else (up if j == i else I2) for j in range(n)]
    return reduce(np.kron, factors[::-1])


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_ext_matches_jordan_wigner(n):
    for i in range(n):
        assert np.array_equal(fock.ext_op(n, i).matrix.toarray(), jw_creation(n, i))


def test_car_relations_exact():
    n = 6
    eye = np.eye(2**n, dtype=np.int64)
    ext = [fock.ext_op(n, i).matrix.toarray() for i in range(n)]
    intr = [fock.int_op(n, i).matrix.toarray() for i in range(n)]
    c = [fock.clifford_c(n, i).matrix.toarray() for i in range(n)]
    cb = [fock.clifford_cbar(n, i).matrix.toarray() for i in range(n)]
    for i in range(n):
        for j in range(n):
            d = int(i == j)
            assert np.array_equal(ext[i] @ intr[j] + intr[j] @ ext[i], d * eye)
            assert np.array_equal(ext[i] @ ext[j] + ext[j] @ ext[i], 0 * eye)
            assert np.array_equal(c[i] @ cb[j] + cb[j] @ c[i], 0 * eye)
            assert np.array_equal(c[i] @ c[j] + c[j] @ c[i], 2 * d * eye)
            assert np.array_equal(cb[i] @ cb[j] + cb[j] @ cb[i], -2 * d * eye)


def test_car_twelve_modes_fast():
    n = 12
    t0 = time.perf_counter()
    eye_diag = np.ones(2**n)
    for i in (0, 5, 11):
        e = fock.ext_op(n, i).matrix
        for j in (0, 6, 11):
            f = fock.ext_op(n, j).matrix
            ac = e @ f.T + f.T @ e
            want = eye_diag if i == j else np.zeros(2**n)
            assert ac.nnz == 0 or np.array_equal(ac.toarray(), np.diag(want))
            assert np.array_equal(ac.diagonal(), want)
    assert time.perf_counter() - t0 < 1.0


def test_number_and_parity():
    n = 4
    N = fock.number_op(n).matrix.toarray()
    total = sum((fock.ext_op(n, i).matrix @ fock.int_op(n, i).matrix).toarray() for i in range(n))
    assert np.array_equal(N, total)
    P = fock.parity_op(n).matrix.toarray()
    for i in range(n):
        c = fock.clifford_c(n, i).matrix.toarray()
        assert np.array_equal(P @ c, -c @ P)


def test_states_and_ext_on_vectors():
    vac = fock.FermionState.vacuum(3)
    st = fock.ext(np.array([1, 0, 0]), fock.ext(np.array([0, 1, 0]), vac))
    # v0 ^ v1 is the basis state 0b011 with sign +1.
    assert_allclose(st.amplitudes, fock.FermionState.basis_state(3, [0, 1]).amplitudes)
    swapped = fock.ext(np.array([0, 1, 0]), fock.ext(np.array([1, 0, 0]), vac))
    assert_allclose(swapped.amplitudes, -st.amplitudes)
    back = fock.int_(np.array([1, 0, 0]), st)
    assert_allclose(back.amplitudes, fock.FermionState.basis_state(3, [1]).amplitudes)
    assert st.particle_number(2).norm() == 1.0
    with pytest.raises(ValueError):
        fock.FermionState(np.zeros(5), 2)


def test_mode_range_checks():
    with pytest.raises(ValueError):
        fock.ext_op(3, 3)
    with pytest.raises(ValueError):
        fock.exterior_power_map(np.eye(3), 4)
    with pytest.raises(ValueError):
        fock.exterior_power_map(np.ones((2, 3)), 1)


def test_exterior_power_is_determinant_at_top():
    F = np.array([[2, 1, 0], [1, 3, -1], [0, 2, 1]])
    assert fock.exterior_power_map(F, 3).matrix[0, 0] == round(np.linalg.det(F))
    assert np.array_equal(fock.exterior_power_map(F, 1).matrix, F)
    assert np.array_equal(fock.exterior_power_map(F, 0).matrix, np.ones((1, 1), dtype=F.dtype))


int_mats = arrays(np.int64, (4, 4), elements=st.integers(-4, 4))


@settings(max_examples=40, deadline=None)
@given(int_mats, int_mats, st.integers(0, 4))
def test_exterior_power_multiplicative_exact(F, G, k):
    lhs = fock.exterior_power_map(F @ G, k).matrix
    rhs = fock.exterior_power_map(F, k).matrix @ fock.exterior_power_map(G, k).matrix
    assert np.array_equal(lhs, rhs)


@settings(max_examples=40, deadline=None)
@given(int_mats, arrays(np.int64, (2, 4), elements=st.integers(-4, 4)))
def test_wedge_of_images(F, vw):
    v, w = vw
    vac = fock.FermionState.vacuum(4)
    lhs = fock.fock_map(F).matrix @ fock.ext(v, fock.ext(w, vac)).amplitudes
    rhs = fock.ext(F @ v, fock.ext(F @ w, vac)).amplitudes
    assert np.array_equal(lhs, rhs)


@pytest.mark.parametrize("n", [2, 4, 6])
def test_sector_norm_is_singular_value_product(rng, n):
    A = rng.standard_normal((n, n))
    sv = np.linalg.svd(A, compute_uv=False)
    for k in range(n + 1):
        Lk = fock.exterior_power_map(A, k).matrix
        assert_allclose(np.linalg.norm(Lk, 2), np.prod(sv[:k]), rtol=1e-12)
        # Oracle: singular values of Lambda^k A are products of k distinct singular values.
        assert_allclose(np.linalg.svd(Lk, compute_uv=False)[0], np.prod(sv[:k]), rtol=1e-12)


def test_sector_dimensions():
    for n in range(7):
        for k in range(n + 1):
            assert len(fock.sector_states(n, k)) == fock.sector_dim(n, k)


def _dense_defect(A, B, expected):
    return max(
        np.abs(a @ b + b @ a - expected[i, j] * np.eye(a.shape[0])).max() for i, a in enumerate(A) for j, b in enumerate(B)
    )


def test_monomial_anticommutator_matches_dense():
    from qhtlab.suites import _anticommutator_defect, _monomial

    n = 3
    ops = {name: [make(n, i).matrix for i in range(n)] for name, make in (("c", fock.clifford_c), ("e", fock.ext_op), ("i", fock.int_op))}
    mono = {k: tuple(np.stack(x) for x in zip(*(_monomial(m) for m in v))) for k, v in ops.items()}
    dense = {k: [m.toarray() for m in v] for k, v in ops.items()}
    for a, b in (("e", "i"), ("c", "c"), ("e", "e"), ("c", "i")):
        for expected in (np.eye(n, dtype=int), 2 * np.eye(n, dtype=int), np.zeros((n, n), dtype=int)):
            assert _anticommutator_defect(mono[a], mono[b], expected) == _dense_defect(dense[a], dense[b], expected)
    # A single flipped sign must be caught.
    bad = fock.ext_op(n, 1).matrix.toarray()
    bad[np.nonzero(bad)[0][0], np.nonzero(bad)[1][0]] *= -1
    flipped = [dense["e"][0], bad, dense["e"][2]]
    mono_bad = tuple(np.stack(x) for x in zip(*(_monomial(m) for m in flipped)))
    assert _anticommutator_defect(mono_bad, mono["i"], np.eye(n, dtype=int)) > 0
    with pytest.raises(ValueError):
        _monomial(np.ones((2, 2)))
