import numpy as np
import pytest

from shiftkrylov import (DimensionError, RecycleSpace, SparseMatrix,
                         arnoldi_extend, block_arnoldi, block_arnoldi_extend,
                         block_arnoldi_start, start_arnoldi,
                         subspace_equality_angle)
from shiftkrylov.recycling import shifted_hessenberg

from conftest import (block_krylov_powers, projected_sylvester_powers,
                      random_sparse, sylvester_powers)


def test_identity_breaks_down_immediately():
    a = SparseMatrix.identity(4)
    v = np.array([1.0, 2.0, 0.0, -1.0])
    state = arnoldi_extend(a, start_arnoldi(v), 3)
    assert state.breakdown and state.steps == 1
    assert state.hess.shape == (1, 1)
    assert state.hess[0, 0] == pytest.approx(1.0)


def test_grade_equals_distinct_eigenvalues():
    a = SparseMatrix.diagonal([1.0, 2.0])
    v = np.array([1.0, 1.0]) / np.sqrt(2.0)
    state = arnoldi_extend(a, start_arnoldi(v), 5)
    assert state.breakdown and state.steps == 2
    # the basis spans the whole space
    assert np.linalg.matrix_rank(state.basis) == 2


def test_arnoldi_relation_random():
    a = random_sparse(20, density=0.3, seed=2)
    v = np.random.default_rng(3).standard_normal(20)
    state = arnoldi_extend(a, start_arnoldi(v), 5)
    ad = a.to_dense()
    rel = np.linalg.norm(ad @ state.basis[:, :5] - state.basis @ state.hess)
    assert rel <= 1e-10 * a.frobenius_norm
    gram = state.basis.conj().T @ state.basis
    assert np.linalg.norm(gram - np.eye(6)) <= 1e-10 * 6


def test_arnoldi_extend_incrementally_matches():
    a = random_sparse(15, density=0.4, seed=9)
    v = np.random.default_rng(5).standard_normal(15)
    one = arnoldi_extend(a, start_arnoldi(v), 4)
    two = arnoldi_extend(a, arnoldi_extend(a, start_arnoldi(v), 2), 2)
    assert np.allclose(one.basis, two.basis, atol=1e-14)
    assert np.allclose(one.hess, two.hess, atol=1e-14)


# ---------------------------------------------------------------------------
# block process
# ---------------------------------------------------------------------------

def test_block_initial_dependence_replaced():
    a = random_sparse(10, seed=1)
    v = np.random.default_rng(1).standard_normal(10)
    r0 = np.column_stack([v, v])  # two identical columns
    state = block_arnoldi_start(r0, seed=3)
    assert len(state.replacements) == 1
    assert state.replacements[0].step == 0
    gram = state.basis.conj().T @ state.basis
    assert np.linalg.norm(gram - np.eye(2)) <= 1e-12


def test_block_identity_grade_one():
    a = SparseMatrix.identity(6)
    r0 = np.random.default_rng(4).standard_normal((6, 2))
    state = block_arnoldi(a, r0, 1, seed=5)
    ell = 2
    h11 = state.hess[:ell, :ell]
    assert np.allclose(h11, np.eye(2), atol=1e-12)
    # every candidate column was dependent after one application
    cols = [rec.column for rec in state.replacements if rec.step == 1]
    assert sorted(cols) == [0, 1]


def test_block_relation_and_rank():
    a = random_sparse(30, density=0.2, seed=8)
    r0 = np.random.default_rng(7).standard_normal((30, 2))
    state = block_arnoldi(a, r0, 4, seed=0)
    ad = a.to_dense()
    rel = np.linalg.norm(ad @ state.w - state.basis @ state.hess)
    assert rel <= 1e-10 * a.frobenius_norm
    assert np.linalg.matrix_rank(state.w) == 8
    assert state.basis.shape == (30, 10)
    gram = state.basis.conj().T @ state.basis
    assert np.linalg.norm(gram - np.eye(10)) <= 1e-10 * 10


def test_block_extend_matches_batch():
    a = random_sparse(18, density=0.3, seed=12)
    r0 = np.random.default_rng(13).standard_normal((18, 3))
    batch = block_arnoldi(a, r0, 3, seed=1)
    inc = block_arnoldi_extend(
        a, block_arnoldi_extend(a, block_arnoldi_start(r0, seed=1), 1), 2)
    assert np.allclose(batch.basis, inc.basis, atol=1e-14)
    assert np.allclose(batch.hess, inc.hess, atol=1e-14)


def test_shifted_block_relation():
    a = random_sparse(24, density=0.25, seed=3)
    r0 = np.random.default_rng(11).standard_normal((24, 3))
    state = block_arnoldi(a, r0, 4, seed=0)
    ad = a.to_dense()
    for sigma in (0.7, -0.2 + 0.4j):
        h_sigma = shifted_hessenberg(state.hess, 3, sigma)
        rel = np.linalg.norm((ad + sigma * np.eye(24)) @ state.w
                             - state.basis @ h_sigma)
        assert rel <= 1e-9 * (a.frobenius_norm + abs(sigma))


def test_initial_residual_reconstruction():
    a = random_sparse(16, seed=6)
    r0 = np.random.default_rng(15).standard_normal((16, 3))
    state = block_arnoldi(a, r0, 3, seed=0)
    lift = np.zeros((state.basis.shape[1], 3), dtype=complex)
    lift[:3, :] = state.s0
    recon = state.basis @ lift
    assert np.linalg.norm(recon - r0) <= 1e-10 * np.linalg.norm(r0)


def test_block_krylov_sum_identity():
    # span W_j equals the sum of the per-column Krylov spaces
    a = random_sparse(20, density=0.3, seed=19)
    r0 = np.random.default_rng(21).standard_normal((20, 2))
    j = 3
    state = block_arnoldi(a, r0, j, seed=0)
    ad = a.to_dense()
    brute = block_krylov_powers(ad, r0, j)
    angle = subspace_equality_angle(state.w[:, :j * 2], brute)
    assert angle <= 1e-8


def test_angle_trivial_cases():
    x = np.eye(3)[:, :2]
    assert subspace_equality_angle(x, x) == pytest.approx(0.0, abs=1e-12)
    e1 = np.eye(2)[:, :1]
    e2 = np.eye(2)[:, 1:]
    assert subspace_equality_angle(e1, e2) == pytest.approx(np.pi / 2)
    with pytest.raises(DimensionError):
        subspace_equality_angle(np.eye(3), np.eye(3)[:, :2])


def test_block_shift_invariance():
    a = random_sparse(25, density=0.3, seed=23)
    r0 = np.random.default_rng(25).standard_normal((25, 2))
    sigma = 0.7
    shifted = SparseMatrix.from_dense(a.to_dense() + sigma * np.eye(25))
    j = 3
    plain = block_arnoldi(a, r0, j, seed=0)
    moved = block_arnoldi(shifted, r0, j, seed=0)
    angle = subspace_equality_angle(plain.w, moved.w)
    assert angle <= 1e-8


def test_sylvester_operator_invariance_oracle():
    # brute-force powers of T: F -> A F + F Dtilde span the same space as
    # powers of A, for general (non-diagonal) coupling
    rng = np.random.default_rng(31)
    a = random_sparse(18, density=0.4, seed=29)
    ad = a.to_dense()
    f = rng.standard_normal((18, 2))
    dtilde = rng.standard_normal((2, 2))
    j = 3
    q_syl = sylvester_powers(ad, dtilde, f, j)
    q_mat = block_krylov_powers(ad, f, j)
    assert subspace_equality_angle(q_syl, q_mat) <= 1e-8


def test_projected_block_arnoldi_relation_and_coupling():
    a = random_sparse(22, density=0.3, seed=41, diag_boost=4.0)
    rng = np.random.default_rng(43)
    space = RecycleSpace.from_basis(a, rng.standard_normal((22, 3)))
    r0 = rng.standard_normal((22, 2)).astype(complex)
    r0 -= space.c @ (space.c.conj().T @ r0)
    state = block_arnoldi(a, r0, 4, projector=space, seed=0)
    ad = a.to_dense()
    proj = np.eye(22) - space.c @ space.c.conj().T
    rel = np.linalg.norm(proj @ ad @ state.w - state.basis @ state.hess)
    assert rel <= 1e-10 * a.frobenius_norm
    coupling_true = space.c.conj().T @ ad @ state.w
    assert np.linalg.norm(state.coupling - coupling_true) \
        <= 1e-10 * a.frobenius_norm
    # the basis is orthogonal to C as well
    assert np.abs(space.c.conj().T @ state.basis).max() <= 1e-10


def test_projected_sylvester_invariance():
    a = random_sparse(20, density=0.35, seed=47, diag_boost=4.0)
    rng = np.random.default_rng(49)
    space = RecycleSpace.from_basis(a, rng.standard_normal((20, 3)))
    v = rng.standard_normal((20, 2)).astype(complex)
    v -= space.c @ (space.c.conj().T @ v)
    ad = a.to_dense()
    dtilde = np.diag(rng.standard_normal(2))
    j = 3
    q_syl = projected_sylvester_powers(ad, space.c, dtilde, v, j)
    q_mat = projected_sylvester_powers(ad, space.c, np.zeros((2, 2)), v, j)
    assert subspace_equality_angle(q_syl, q_mat) <= 1e-8
    # and both match the span built by the projected block Arnoldi process
    state = block_arnoldi(a, v, j, projector=space, seed=0)
    assert subspace_equality_angle(state.w, q_mat) <= 1e-8


def test_partial_invariant_closing_mid_block():
    # n = 10 with block size 3: the fourth step can only add one direction
    # before the space is exhausted, and the relation must close exactly
    # over the full space
    a = random_sparse(10, density=0.5, seed=53, diag_boost=4.0)
    r0 = np.random.default_rng(54).standard_normal((10, 3))
    state = block_arnoldi(a, r0, 8, seed=1)
    assert state.invariant
    n_cols = state.basis.shape[1]
    assert n_cols == 10                      # spans the whole space
    assert state.hess.shape == (n_cols, state.steps * 3)
    ad = a.to_dense()
    rel = np.linalg.norm(ad @ state.w - state.basis @ state.hess)
    assert rel <= 1e-9 * a.frobenius_norm
    gram = state.basis.conj().T @ state.basis
    assert np.linalg.norm(gram - np.eye(n_cols)) <= 1e-10
