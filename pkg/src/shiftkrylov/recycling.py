"""Subspace recycling: the recycle-space pair (U, C), orthogonal and
oblique residual projections, the shifted augmented Arnoldi operator, and
Ritz-based space updates.

The recycle space stores a basis U together with its image C = A U, where
C has orthonormal columns.  For a shifted system the pair gives rise to an
oblique projector onto span(C + sigma U) along the orthogonal complement
of C: applying it to the residual keeps the residual computably consistent
with an updated approximation, at the cost of one k x k solve per shift.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .arnoldi import BlockArnoldiState
from .dense import hessenberg_eigen, householder_qr
from .errors import DimensionError, EigenConvergenceError, NearSingularError
from .sparse import (COMPLEX, SparseMatrix, block_matvec,
                     read_dense_matrix_market, write_dense_matrix_market)

OBLIQUE_COND_LIMIT = 1e12


@dataclass(frozen=True)
class RecycleSpace:
    """Basis pair ``(u, c)`` with ``c = A u`` and ``c* c = I``.

    ``provenance`` records where the basis came from: ``initial``,
    ``ritz-largest``, ``harmonic-ritz-smallest`` or ``solutions``.
    """

    u: np.ndarray
    c: np.ndarray
    provenance: str = "initial"

    def __post_init__(self):
        u = np.asarray(self.u, dtype=COMPLEX)
        c = np.asarray(self.c, dtype=COMPLEX)
        if u.ndim == 1:
            u = u[:, None]
        if c.ndim == 1:
            c = c[:, None]
        if u.shape != c.shape:
            raise DimensionError("u and c must have equal shape")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "c", c)

    @property
    def k(self):
        return self.u.shape[1]

    @classmethod
    def empty(cls, n, provenance="initial"):
        z = np.zeros((n, 0), dtype=COMPLEX)
        return cls(z, z, provenance)

    @classmethod
    def from_basis(cls, a: SparseMatrix, basis, provenance="initial",
                   drop_tol=None):
        """Build a valid space from raw basis vectors.

        Computes ``A @ basis``, orthonormalizes the image by QR and folds
        the triangular factor back into ``u`` so that ``c = A u`` holds
        exactly in exact arithmetic.  With ``drop_tol`` set, columns whose
        image is numerically dependent are dropped instead of raising.
        """
        basis = np.asarray(basis, dtype=COMPLEX)
        if basis.ndim == 1:
            basis = basis[:, None]
        if basis.shape[1] == 0:
            return cls.empty(a.n_rows, provenance)
        image = block_matvec(a, basis)
        q, r = householder_qr(image)
        d = np.abs(np.diag(r))
        dmax = d.max() if d.size else 0.0
        if drop_tol is not None and dmax > 0.0:
            keep = d > drop_tol * dmax
            if not np.all(keep):
                basis = basis[:, keep]
                if basis.shape[1] == 0:
                    return cls.empty(a.n_rows, provenance)
                image = block_matvec(a, basis)
                q, r = householder_qr(image)
                d = np.abs(np.diag(r))
                dmax = d.max()
        if dmax == 0.0 or d.min() <= 1e-14 * dmax:
            raise NearSingularError(
                "A @ basis is numerically rank deficient; reduce k or pass "
                "drop_tol to prune dependent directions")
        u = scipy.linalg.solve_triangular(r, np.eye(r.shape[0], dtype=COMPLEX))
        return cls(basis @ u, q, provenance)


def shift_rebase(space: RecycleSpace, delta) -> RecycleSpace:
    """Re-establish the space invariants after a pure diagonal shift.

    If ``c = A u`` holds, the image under ``A + delta I`` is
    ``c + delta u``; orthonormalizing it and folding the triangular
    factor into ``u`` rebuilds a valid space for the shifted operator
    without any new operator applications.
    """
    if space.k == 0 or delta == 0.0:
        return space
    image = space.c + delta * space.u
    q, r = householder_qr(image)
    d = np.abs(np.diag(r))
    if d.max() == 0.0 or d.min() <= 1e-14 * d.max():
        raise NearSingularError(
            f"shifted image C + {delta} U is numerically rank deficient; "
            "refresh the recycle space")
    u = space.u @ scipy.linalg.solve_triangular(
        r, np.eye(r.shape[0], dtype=COMPLEX))
    return RecycleSpace(u, q, space.provenance)


def orthogonal_residual_projection(space: RecycleSpace, r):
    """Apply ``I - C C*`` to the columns of ``r``."""
    r = np.asarray(r, dtype=COMPLEX)
    if space.k == 0:
        return r.copy()
    if r.shape[0] != space.c.shape[0]:
        raise DimensionError("row count does not match the recycle space")
    return r - space.c @ (space.c.conj().T @ r)


def oblique_project_shift(space: RecycleSpace, sigma, r, x, a: SparseMatrix):
    """Obliquely project one shifted residual and update its approximation.

    Returns ``(r_hat, x_hat)`` with ``r_hat`` orthogonal to span(C) and
    ``b - (A + sigma I) x_hat = r_hat`` preserved, using only U, C and a
    k x k solve of ``C* (C + sigma U)``.  A projector system with
    condition estimate beyond 1e12 raises :class:`NearSingularError`; the
    recycle space should be refreshed for that shift.
    """
    r = np.asarray(r, dtype=COMPLEX).ravel()
    x = np.asarray(x, dtype=COMPLEX).ravel()
    if space.k == 0:
        return r.copy(), x.copy()
    c, u = space.c, space.u
    m = c.conj().T @ (c + sigma * u)
    if np.linalg.cond(m) > OBLIQUE_COND_LIMIT:
        raise NearSingularError(
            f"oblique projector for shift {sigma} is near singular; "
            "refresh the recycle space")
    w = np.linalg.solve(m, c.conj().T @ r)
    r_hat = r - (c @ w + sigma * (u @ w))
    x_hat = x + u @ w
    return r_hat, x_hat


@dataclass(frozen=True)
class AugmentationBlocks:
    """QR-correction blocks shared by all shifts at one inner step.

    Factors ``[W_{j+1}  C  U] = [W_{j+1}  C  Uhat] T`` where T stacks
    ``p = W_{j+1}* U``, ``q2 = C* U`` and the triangular ``n_factor`` of
    the remainder, so ``[W_{j+1}  C  Uhat]`` has orthonormal columns.
    ``padded`` lists recycle directions that were numerically contained
    in span([W C]) and whose ``Uhat`` column is a filler direction with a
    zero ``n_factor`` column (the factorization stays exact).
    """

    p: np.ndarray
    q2: np.ndarray
    u_hat: np.ndarray
    n_factor: np.ndarray
    padded: tuple = ()


_CONTAINED_TOL = 1e-13


def augmentation_blocks(space: RecycleSpace, w_basis,
                        pad_seed=None) -> AugmentationBlocks:
    """Orthogonalize U against [W C] (two passes) and QR the remainder.

    A recycle direction whose remainder falls below ``1e-13`` of its own
    norm is numerically contained in span([W C]).  With ``pad_seed`` set,
    such a column of ``Uhat`` is replaced by a reproducible random filler
    orthogonal to everything and its triangular column is zeroed, which
    keeps the factorization exact; without a seed this raises
    :class:`NearSingularError` advising a smaller k.
    """
    w_basis = np.asarray(w_basis, dtype=COMPLEX)
    u, c = space.u, space.c
    k = space.k
    p = np.zeros((w_basis.shape[1], k), dtype=COMPLEX)
    q2 = np.zeros((k, k), dtype=COMPLEX)
    d = u.copy()
    for _pass in range(2):
        cw = w_basis.conj().T @ d
        p += cw
        d = d - w_basis @ cw
        cc = c.conj().T @ d
        q2 += cc
        d = d - c @ cc
    u_norms = np.linalg.norm(u, axis=0)
    u_hat = np.zeros((u.shape[0], k), dtype=COMPLEX)
    n_factor = np.zeros((k, k), dtype=COMPLEX)
    padded = []
    for col in range(k):
        w = d[:, col].copy()
        for _pass in range(2):
            for i in range(col):
                coef = np.vdot(u_hat[:, i], w)
                n_factor[i, col] += coef
                w -= coef * u_hat[:, i]
        nrm = np.linalg.norm(w)
        if nrm <= _CONTAINED_TOL * max(u_norms[col], 1e-300):
            if pad_seed is None:
                raise NearSingularError(
                    f"recycle direction {col} is numerically contained in "
                    "span([W C]); reduce k")
            rng = np.random.default_rng(
                np.random.SeedSequence((pad_seed, col)))
            w = rng.standard_normal(u.shape[0]).astype(COMPLEX)
            for _pass in range(2):
                w -= w_basis @ (w_basis.conj().T @ w)
                w -= c @ (c.conj().T @ w)
                w -= u_hat[:, :col] @ (u_hat[:, :col].conj().T @ w)
            w /= np.linalg.norm(w)
            n_factor[col, col] = 0.0
            padded.append(col)
        else:
            n_factor[col, col] = nrm
            w /= nrm
        u_hat[:, col] = w
    return AugmentationBlocks(p, q2, u_hat, n_factor, tuple(padded))


def shifted_hessenberg(hess, block_size, sigma):
    """``Hbar + sigma [I; 0]`` for a (steps+1)L x steps*L band Hessenberg."""
    h = np.array(hess, dtype=COMPLEX, copy=True)
    cols = h.shape[1]
    h[:cols, :] += sigma * np.eye(cols, dtype=COMPLEX)
    return h


def assemble_augmented(hess, coupling, blocks: AugmentationBlocks,
                       block_size, sigma):
    """The shifted augmented coefficient matrix

    ``[[Hbar + sigma I, sigma W* U], [B, I + sigma C* U], [0, sigma N]]``

    mapping coefficients of ``[W_j  U]`` to coefficients of
    ``[W_{j+1}  C  Uhat]``.
    """
    h_sigma = shifted_hessenberg(hess, block_size, sigma)
    k = blocks.q2.shape[0]
    rows_h, cols_h = h_sigma.shape
    g = np.zeros((rows_h + 2 * k, cols_h + k), dtype=COMPLEX)
    g[:rows_h, :cols_h] = h_sigma
    g[:rows_h, cols_h:] = sigma * blocks.p
    g[rows_h:rows_h + k, :cols_h] = coupling
    g[rows_h:rows_h + k, cols_h:] = np.eye(k, dtype=COMPLEX) + sigma * blocks.q2
    g[rows_h + k:, cols_h:] = sigma * blocks.n_factor
    return g


@dataclass(frozen=True)
class AugmentedShiftOperator:
    """Assembled shifted augmented Arnoldi data for one shift.

    Satisfies ``(A + sigma I) [W_j U] = [W_{j+1} C Uhat] g_bar_sigma``.
    """

    g_bar_sigma: np.ndarray
    blocks: AugmentationBlocks
    sigma: complex


def build_augmented_operator(space: RecycleSpace, arn: BlockArnoldiState,
                             sigma) -> AugmentedShiftOperator:
    """Assemble the augmented operator from a projected Arnoldi state."""
    if arn.projector_c is None or arn.coupling.shape[0] != space.k:
        if space.k != 0:
            raise DimensionError(
                "arnoldi state was not built against this recycle space")
    if space.k == 0:
        g = shifted_hessenberg(arn.hess, arn.block_size, sigma)
        empty = AugmentationBlocks(
            np.zeros((arn.hess.shape[0], 0), dtype=COMPLEX),
            np.zeros((0, 0), dtype=COMPLEX),
            np.zeros((arn.basis.shape[0], 0), dtype=COMPLEX),
            np.zeros((0, 0), dtype=COMPLEX))
        return AugmentedShiftOperator(g, empty, complex(sigma))
    blocks = augmentation_blocks(space, arn.basis)
    g = assemble_augmented(arn.hess, arn.coupling, blocks,
                           arn.block_size, sigma)
    return AugmentedShiftOperator(g, blocks, complex(sigma))


def _harmonic_matrix(h_sq, h_last):
    """Square Hessenberg block plus the standard low-rank correction whose
    eigenpairs are the harmonic Ritz pairs."""
    ell = h_last.shape[0]
    m = np.array(h_sq, dtype=COMPLEX, copy=True)
    rhs = np.zeros((m.shape[0], ell), dtype=COMPLEX)
    rhs[-ell:, :] = h_last.conj().T @ h_last
    corr = np.linalg.solve(h_sq.conj().T, rhs)
    m[:, -ell:] += corr
    return m


def update_recycle_space(arn: BlockArnoldiState, mode: str, k: int,
                         space: RecycleSpace | None = None,
                         source: str = "hessenberg") -> RecycleSpace:
    """Extract a fresh k-dimensional recycle space from a cycle's data.

    ``mode`` is ``"ritz-largest"`` or ``"harmonic-ritz-smallest"``.  The
    default ``source`` extracts from the (projected) square Hessenberg
    block and lifts through W; ``source="augmented"`` solves the
    generalized problem over the pair [W U].  The returned space satisfies
    C = A U and C* C = I without any new operator applications: the image
    is reconstructed through the Arnoldi relation.
    """
    if mode not in ("ritz-largest", "harmonic-ritz-smallest"):
        raise DimensionError(f"unknown recycle mode '{mode}'")
    if source not in ("hessenberg", "augmented"):
        raise DimensionError(f"unknown extraction source '{source}'")
    if k == 0:
        return RecycleSpace.empty(arn.basis.shape[0], provenance=mode)
    ell = arn.block_size
    j = arn.steps
    if j < 1:
        raise DimensionError("arnoldi state has no steps to extract from")
    h_sq = arn.hess[:j * ell, :]
    h_last = arn.hess[j * ell:(j + 1) * ell, (j - 1) * ell:]
    w = arn.w
    k_aug = space.k if (space is not None and arn.projector_c is not None) else 0
    n_cand = j * ell + (k_aug if source == "augmented" else 0)
    if k > n_cand:
        raise DimensionError(
            f"requested k={k} exceeds the {n_cand} available directions")

    if source == "hessenberg" or k_aug == 0:
        if mode == "ritz-largest":
            pairs = hessenberg_eigen(h_sq, "largest", k)
        else:
            try:
                m = _harmonic_matrix(h_sq, h_last)
            except np.linalg.LinAlgError as exc:
                raise EigenConvergenceError(
                    f"harmonic correction failed: {exc}")
            pairs = hessenberg_eigen(m, "smallest", k)
        coeff = pairs.vectors
        y = w @ coeff
        image = arn.basis @ (arn.hess @ coeff)
        if k_aug:
            image = image + space.c @ (arn.coupling @ coeff)
    else:
        u, c = space.u, space.c
        p = arn.basis.conj().T @ u
        q2 = c.conj().T @ u
        b = arn.coupling
        wj_u = p[:j * ell, :]
        if mode == "ritz-largest":
            a_side = np.block([[h_sq, np.zeros((j * ell, k_aug), dtype=COMPLEX)],
                               [q2.conj().T @ b + p.conj().T @ arn.hess,
                                q2.conj().T]])
            b_side = np.block([[np.eye(j * ell, dtype=COMPLEX), wj_u],
                               [wj_u.conj().T, u.conj().T @ u]])
            vals, vecs = scipy.linalg.eig(a_side, b_side, check_finite=False)
            key = np.lexsort((vals.imag, vals.real, np.abs(vals)))[::-1][:k]
        else:
            gram = np.block(
                [[b.conj().T @ b + arn.hess.conj().T @ arn.hess, b.conj().T],
                 [b, np.eye(k_aug, dtype=COMPLEX)]])
            mixed = np.block([[h_sq.conj().T,
                               b.conj().T @ q2 + arn.hess.conj().T @ p],
                              [np.zeros((k_aug, j * ell), dtype=COMPLEX), q2]])
            vals, vecs = scipy.linalg.eig(gram, mixed, check_finite=False)
            key = np.lexsort((vals.imag, vals.real, np.abs(vals)))[:k]
        coeff = vecs[:, key]
        wy = coeff[:j * ell, :]
        uz = coeff[j * ell:, :]
        y = w @ wy + u @ uz
        image = arn.basis @ (arn.hess @ wy) + c @ (b @ wy + uz)

    c_new, r_new = householder_qr(image)
    d = np.abs(np.diag(r_new))
    if d.size == 0 or d.max() == 0.0 or d.min() <= 1e-12 * d.max():
        raise NearSingularError(
            "lifted candidate images are rank deficient; keep previous space")
    u_new = y @ scipy.linalg.solve_triangular(
        r_new, np.eye(r_new.shape[0], dtype=COMPLEX))
    return RecycleSpace(u_new, c_new, provenance=mode)


def save_recycle_space(path, space: RecycleSpace):
    """Serialize U to a dense Matrix Market array file (C is recomputed on
    load to re-establish the invariants)."""
    write_dense_matrix_market(path, space.u)


def load_recycle_space(path, a: SparseMatrix, provenance="initial",
                       drop_tol=None) -> RecycleSpace:
    basis = read_dense_matrix_market(path)
    return RecycleSpace.from_basis(a, basis, provenance, drop_tol=drop_tol)


def rsbgmres(family, cfg, space: RecycleSpace | None = None, *, k=None,
             mode="ritz-largest", source="hessenberg", update=True,
             strategy=None):
    """Recycled shifted block GMRES over one augmented block Krylov space.

    Each cycle obliquely projects every active shifted residual into the
    orthogonal complement of C (consistently updating the approximations),
    builds the projected block Arnoldi process from the projected
    residuals and minimizes each shifted residual over span(U) plus the
    block Krylov space.  At cycle end the recycle space is refreshed with
    Ritz data per ``mode`` unless ``update`` is False.

    With ``space=None`` (or k = 0) the first cycle runs unaugmented and is
    identical to plain shifted block GMRES.  Returns
    ``(x, report, updated_space)``.
    """
    from .block_solvers import _run_cycles
    target_k = k if k is not None else (space.k if space is not None else 0)
    return _run_cycles(family, cfg, kind="gmres", strategy=strategy,
                       space=space, recycle_k=target_k, recycle_mode=mode,
                       recycle_source=source, recycle_update=update,
                       method="rsbgmres")


def rgmres_baseline(a: SparseMatrix, b, x0, cfg,
                    space: RecycleSpace | None = None, *, k=None,
                    mode="harmonic-ritz-smallest", update=True):
    """Single-system recycled GMRES (the sequential comparator).

    Runs the recycled engine on the one-shift family with shift zero, so
    the oblique projector degenerates to the orthogonal one and the
    augmented subproblem reduces to the classic projected form.  Returns
    ``(x, report, updated_space)``.
    """
    from .sparse import ShiftedFamily
    b = np.asarray(b, dtype=COMPLEX).ravel()
    x0 = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=COMPLEX).ravel()
    family = ShiftedFamily(a, np.array([0.0], dtype=COMPLEX),
                           b[:, None], x0[:, None])
    x, rep, out_space = rsbgmres(family, cfg, space, k=k, mode=mode,
                                 update=update)
    rep.method = "rgmres"
    return x[:, 0], rep, out_space
