import numpy as np
import pytest

from shiftkrylov import (DimensionError, NearSingularError,
                         SingularMatrixError, hessenberg_eigen,
                         hessenberg_least_squares, householder_qr,
                         rank_revealing_qr, solve_small_dense)


def test_qr_identity():
    q, r = householder_qr(np.eye(3))
    assert np.allclose(q, np.eye(3), atol=1e-15)
    assert np.allclose(r, np.eye(3), atol=1e-15)


def test_qr_single_column_normalization():
    q, r = householder_qr(np.array([[0.0], [3.0], [4.0]]))
    assert np.allclose(r, [[5.0]], atol=1e-14)
    assert np.allclose(q, [[0.0], [0.6], [0.8]], atol=1e-14)


def test_qr_reconstruction_random():
    rng = np.random.default_rng(6)
    m = rng.standard_normal((6, 3)) + 1j * rng.standard_normal((6, 3))
    q, r = householder_qr(m)
    scale = np.linalg.norm(m)
    assert np.linalg.norm(q @ r - m) <= 1e-12 * scale
    assert np.linalg.norm(q.conj().T @ q - np.eye(3)) <= 1e-12
    # sign convention: real non-negative diagonal
    d = np.diag(r)
    assert np.all(d.imag == 0) and np.all(d.real >= 0)
    assert np.allclose(np.tril(r, -1), 0)


def test_qr_requires_tall():
    with pytest.raises(DimensionError):
        householder_qr(np.ones((2, 3)))


def test_hessenberg_ls_exact():
    y, resid = hessenberg_least_squares(np.array([[1.0], [0.0]]),
                                        np.array([2.0, 0.0]))
    assert np.allclose(y, [2.0]) and resid == pytest.approx(0.0, abs=1e-15)


def test_hessenberg_ls_pure_residual():
    y, resid = hessenberg_least_squares(np.array([[1.0], [0.0]]),
                                        np.array([0.0, 3.0]))
    assert np.allclose(y, [0.0]) and resid == pytest.approx(3.0)


def _band_hessenberg(rows, cols, band, seed):
    rng = np.random.default_rng(seed)
    h = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    for c in range(cols):
        h[c + band + 1:, c] = 0.0
    return h


def test_hessenberg_ls_against_normal_equations():
    h = _band_hessenberg(12, 8, 2, seed=9)
    g = np.random.default_rng(10).standard_normal(12)
    y, resid = hessenberg_least_squares(h, g)
    # independent oracle: solve the normal equations directly
    y_ne = np.linalg.solve(h.conj().T @ h, h.conj().T @ g)
    assert np.linalg.norm(y - y_ne) <= 1e-10 * np.linalg.norm(y_ne)
    # residual norm contract: matches the explicitly recomputed residual
    explicit = np.linalg.norm(g - h @ y)
    assert abs(resid - explicit) <= 1e-12 * max(explicit, 1.0)


def test_hessenberg_ls_singular_column_named():
    h = np.zeros((3, 2))
    h[0, 0] = 1.0
    with pytest.raises(SingularMatrixError) as err:
        hessenberg_least_squares(h, np.ones(3))
    assert err.value.column == 1


def test_solve_identity():
    x, resid = solve_small_dense(np.eye(2), np.array([3.0, 4.0]))
    assert np.array_equal(x, [3.0, 4.0]) and resid == 0.0


def test_solve_diagonal():
    x, _ = solve_small_dense(np.diag([2.0, 4.0]), np.eye(2))
    assert np.allclose(x, np.diag([0.5, 0.25]), atol=1e-15)


def test_solve_random_residual():
    rng = np.random.default_rng(13)
    m = rng.standard_normal((10, 10)) + 10 * np.eye(10)
    rhs = rng.standard_normal((10, 2))
    x, resid = solve_small_dense(m, rhs)
    assert resid <= 1e-10 * np.linalg.norm(rhs)
    assert np.linalg.norm(m @ x - rhs) <= 1e-10 * np.linalg.norm(rhs)


def test_solve_near_singular_raises():
    m = np.array([[1.0, 0.0], [0.0, 1e-16]])
    with pytest.raises(NearSingularError):
        solve_small_dense(m, np.ones(2))


def test_eigen_diagonal_largest():
    pairs = hessenberg_eigen(np.diag([1.0, 2.0, 3.0]), "largest", 1)
    assert pairs.values[0] == pytest.approx(3.0)
    vec = np.abs(pairs.vectors[:, 0])
    assert np.allclose(vec, [0.0, 0.0, 1.0], atol=1e-12)


def test_eigen_rotation_pair():
    pairs = hessenberg_eigen(np.array([[0.0, -1.0], [1.0, 0.0]]),
                             "smallest", 2)
    assert sorted(pairs.values, key=lambda z: z.imag) == \
        pytest.approx([-1j, 1j])


def test_eigen_matches_charpoly_roots():
    h = _band_hessenberg(12, 12, 0, seed=21).real
    pairs = hessenberg_eigen(h, "smallest", 12)
    # independent oracle: roots of the characteristic polynomial
    roots = np.roots(np.poly(h))
    got = np.sort_complex(pairs.values)
    want = np.sort_complex(roots)
    assert np.allclose(got, want, rtol=1e-8, atol=1e-8)


def test_eigen_trace_invariant():
    h = _band_hessenberg(9, 9, 1, seed=33)
    pairs = hessenberg_eigen(h, "largest", 9)
    assert np.sum(pairs.values) == pytest.approx(np.trace(h), rel=1e-8)


def test_eigen_residual_field():
    h = _band_hessenberg(7, 7, 0, seed=4)
    pairs = hessenberg_eigen(h, "largest", 3)
    assert np.all(pairs.residuals <= 1e-8 * np.linalg.norm(h))
    assert pairs.ordering == "by-modulus-descending"


def test_rank_revealing_exact_collinearity():
    v = np.array([1.0, 2.0, -1.0])
    m = np.column_stack([v, 2 * v])
    (_, _), rank, dependent = rank_revealing_qr(m, 1e-10)
    assert rank == 1 and dependent == [1]


def test_rank_revealing_full_rank():
    (_, _), rank, dependent = rank_revealing_qr(np.eye(4), 1e-10)
    assert rank == 4 and dependent == []


def test_rank_revealing_near_dependence():
    rng = np.random.default_rng(17)
    m = rng.standard_normal((6, 3))
    m[:, 2] = m[:, 0] + m[:, 1] + 1e-14 * rng.standard_normal(6)
    (_, _), rank, dependent = rank_revealing_qr(m, 1e-10)
    assert rank == 2 and dependent == [2]
    # SVD oracle confirms the configured dependency level
    s = np.linalg.svd(m, compute_uv=False)
    assert s[2] / s[0] < 1e-10


def test_rank_revealing_scale_invariance():
    rng = np.random.default_rng(29)
    m = rng.standard_normal((6, 4))
    m[:, 3] = m[:, 1]  # one dependent column
    (_, _), rank, dep = rank_revealing_qr(m, 1e-10)
    scales = np.array([1.0, 5e-3, 12.0, 0.3])
    (_, _), rank_s, dep_s = rank_revealing_qr(m * scales[None, :], 1e-10)
    assert rank_s == rank and dep_s == dep
