"""Shared fixtures and independent oracle helpers.

The oracle routines here deliberately take different computational routes
than the library (dense reconstruction, explicit operator powers, normal
equations) so the tests check against independent arithmetic.
"""

import numpy as np
import pytest

from shiftkrylov import SparseMatrix


def random_sparse(n, density=0.2, seed=0, diag_boost=0.0):
    """Seeded random sparse matrix with a guaranteed nonzero diagonal."""
    rng = np.random.default_rng(seed)
    mask = rng.random((n, n)) < density
    a = rng.standard_normal((n, n)) * mask
    a += np.diag(rng.standard_normal(n) + diag_boost)
    return SparseMatrix.from_dense(a)


def block_krylov_powers(ad, r0, j):
    """Brute-force basis of the block Krylov space span{R, AR, ..&}."""
    blocks = [r0]
    for _ in range(j - 1):
        blocks.append(ad @ blocks[-1])
    stacked = np.hstack(blocks)
    q, _ = np.linalg.qr(stacked)
    return q


def sylvester_powers(ad, dtilde, f, j):
    """Brute-force basis of the block Krylov space of the Sylvester
    operator T: F -> A F + F Dtilde."""
    blocks = [f]
    cur = f
    for _ in range(j - 1):
        cur = ad @ cur + cur @ dtilde
        blocks.append(cur)
    q, _ = np.linalg.qr(np.hstack(blocks))
    return q


def projected_sylvester_powers(ad, c_basis, dtilde, f, j):
    """Powers of the projected Sylvester operator (I - C C*) T."""
    proj = np.eye(ad.shape[0]) - c_basis @ c_basis.conj().T
    blocks = [f]
    cur = f
    for _ in range(j - 1):
        cur = proj @ (ad @ cur + cur @ dtilde)
        blocks.append(cur)
    q, _ = np.linalg.qr(np.hstack(blocks))
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
