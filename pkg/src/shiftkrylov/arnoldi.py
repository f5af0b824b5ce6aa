"""Single-vector and block Arnoldi processes.

Both variants orthogonalize with modified Gram-Schmidt plus one
unconditional reorthogonalization pass, which keeps basis orthonormality
near working precision without selective heuristics.  The block process
supports an optional projection against a recycle space (the image basis
``C``), in which case every operator application is ``(I - C C*) A`` and
the removed components are accumulated as coupling rows ``B_j = C* A W_j``.

Dependent block candidates are replaced by fresh pseudo-random vectors so
the block size never shrinks; every replacement is logged with the seed
key that reproduces it.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dense import householder_qr
from .errors import BreakdownError, DimensionError
from .sparse import COMPLEX, SparseMatrix, block_matvec, matvec

BREAKDOWN_RTOL = 1e-14   # happy-breakdown threshold, relative to ||A||_F
DEPENDENCY_TOL = 1e-10   # relative diagonal threshold for dependent columns
_REPLACE_RETRIES = 3


@dataclass(frozen=True)
class Replacement:
    """One dependent-direction replacement: at block ``step`` (0 is the
    initial QR), basis ``column`` was redrawn from the generator seeded
    with ``seed_key``."""

    step: int
    column: int
    seed_key: tuple


@dataclass(frozen=True)
class ArnoldiState:
    """State after ``steps`` single-vector Arnoldi steps.

    ``basis`` is n x (steps+1) with orthonormal columns and ``hess`` is
    (steps+1) x steps upper Hessenberg so that ``A V_j = V_{j+1} Hbar_j``.
    On happy breakdown the trailing zero row is dropped: ``basis`` is
    n x steps, ``hess`` is steps x steps and the relation is exact on an
    invariant subspace.
    """

    basis: np.ndarray
    hess: np.ndarray
    steps: int
    breakdown: bool = False


def start_arnoldi(v) -> ArnoldiState:
    """State holding only the normalized start vector."""
    v = np.asarray(v, dtype=COMPLEX).ravel()
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise DimensionError("start vector must be nonzero")
    return ArnoldiState(basis=(v / nrm)[:, None],
                        hess=np.zeros((1, 0), dtype=COMPLEX), steps=0)


def arnoldi_extend(a: SparseMatrix, state: ArnoldiState, steps: int) -> ArnoldiState:
    """Extend the basis by up to ``steps`` vectors.

    Returns a new state; stops early with ``breakdown=True`` when the next
    direction has norm below ``1e-14 * ||A||_F``, which signals an
    invariant subspace (for GMRES, an exact solution in the current
    space).
    """
    if steps < 1:
        raise DimensionError("steps must be >= 1")
    if state.breakdown:
        return state
    v = state.basis.copy()
    h = state.hess.copy()
    j = state.steps
    thresh = BREAKDOWN_RTOL * a.frobenius_norm
    for _ in range(steps):
        w = matvec(a, v[:, j])
        col = np.zeros(j + 1, dtype=COMPLEX)
        for _pass in range(2):
            for i in range(j + 1):
                c = np.vdot(v[:, i], w)
                col[i] += c
                w -= c * v[:, i]
        nrm = np.linalg.norm(w)
        hn = np.zeros((h.shape[0] + 1, h.shape[1] + 1), dtype=COMPLEX)
        hn[:h.shape[0], :h.shape[1]] = h
        hn[:j + 1, j] = col
        if nrm <= thresh:
            h = hn[:j + 1, :]   # drop the zero row, keep the square relation
            j += 1
            return ArnoldiState(v, h, j, breakdown=True)
        hn[j + 1, j] = nrm
        h = hn
        v = np.hstack([v, (w / nrm)[:, None]])
        j += 1
    return ArnoldiState(v, h, j)


class _InvariantSubspace(Exception):
    """Internal signal: every candidate direction is dependent and no
    replacement direction exists; the span is operator-invariant.

    ``v_partial``/``r_partial`` carry any columns the failing step did
    build before the ambient space ran out (empty for a clean closing).
    """

    def __init__(self, v_partial=None, r_partial=None):
        super().__init__("invariant subspace")
        self.v_partial = v_partial
        self.r_partial = r_partial


@dataclass(frozen=True)
class BlockArnoldiState:
    """State after ``steps`` block Arnoldi steps with block size L.

    ``basis`` is n x (steps+1)L, ``hess`` is the band upper-Hessenberg
    (steps+1)L x steps*L coefficient matrix and ``s0`` the L x L upper
    triangular factor of the initial block.  When built against a
    projector, ``coupling`` holds ``C* A W_j`` (k x steps*L) and the
    relation is ``(I - C C*) A W_j = W_{j+1} Hbar_j``; otherwise
    ``coupling`` is empty and ``A W_j = W_{j+1} Hbar_j``.

    When the span becomes operator-invariant and the ambient space is
    exhausted, the state closes with ``invariant=True``: ``basis`` then
    has steps*L columns, ``hess`` is square and the relation holds with
    no trailing block (the analogue of single-vector happy breakdown).
    """

    basis: np.ndarray
    hess: np.ndarray
    s0: np.ndarray
    block_size: int
    steps: int
    replacements: tuple = ()
    coupling: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), dtype=COMPLEX))
    projector_c: np.ndarray | None = None
    seed: int = 0
    dep_tol: float = DEPENDENCY_TOL
    invariant: bool = False

    @property
    def w(self):
        """Basis of the block Krylov space itself (first steps*L columns)."""
        return self.basis[:, :self.steps * self.block_size]


def _random_direction(n, seed_key):
    rng = np.random.default_rng(np.random.SeedSequence(seed_key))
    return rng.standard_normal(n).astype(COMPLEX)


def _orthogonalize(z, against_blocks, coeff_sink=None):
    """Two-pass MGS of the single vector ``z`` against each block; the
    accumulated coefficients per block are added into ``coeff_sink``."""
    for _pass in range(2):
        for idx, blk in enumerate(against_blocks):
            if blk is None or blk.shape[1] == 0:
                continue
            c = blk.conj().T @ z
            z = z - blk @ c
            if coeff_sink is not None:
                coeff_sink[idx] += c
    return z


def _replacement_vector(n, prev, step, column, seed, log):
    """Draw a reproducible random unit vector orthogonal to ``prev``."""
    for attempt in range(_REPLACE_RETRIES):
        seed_key = (seed, step, column, attempt)
        z = _random_direction(n, seed_key)
        z = _orthogonalize(z, prev)
        nrm = np.linalg.norm(z)
        if nrm > 1e-8 * np.sqrt(n):
            log.append(Replacement(step, column, seed_key))
            return z / nrm
    raise BreakdownError(
        f"replacement failed {_REPLACE_RETRIES} times at step {step}, "
        f"column {column}; space appears exhausted")


def _block_qr_replace(z, prev_blocks, step, tol, seed, log, scale):
    """Column-wise QR of the block ``z`` (already orthogonal to
    ``prev_blocks``), replacing dependent columns by random directions.

    ``scale`` is the Frobenius norm of the raw candidate block before any
    orthogonalization; when every new direction is below the breakdown
    threshold relative to it, the whole block is dependent (an invariant
    subspace was hit).  Otherwise a column is dependent when its diagonal
    entry falls below ``tol`` times the largest one.  Returns (v, r) with
    v orthonormal and r upper triangular with zero diagonal at replaced
    columns, so the Arnoldi relation stays exact to the threshold.
    """
    n, ell = z.shape
    _, r_probe = householder_qr(z)
    ref = np.abs(np.diag(r_probe)).max() if ell else 0.0
    all_dependent = ref <= BREAKDOWN_RTOL * scale
    v = np.zeros((n, ell), dtype=COMPLEX)
    r = np.zeros((ell, ell), dtype=COMPLEX)
    for c in range(ell):
        w = z[:, c].copy()
        for _pass in range(2):
            for i in range(c):
                coef = np.vdot(v[:, i], w)
                r[i, c] += coef
                w -= coef * v[:, i]
        nrm = np.linalg.norm(w)
        if all_dependent or nrm <= tol * ref:
            try:
                w = _replacement_vector(n, list(prev_blocks) + [v[:, :c]],
                                        step, c, seed, log)
            except BreakdownError:
                # a replacement draw only fails when the basis together
                # with the columns built so far already spans the whole
                # space, so the span is invariant; finish the coefficient
                # rows of the not-yet-processed candidates (column c was
                # already orthogonalized above) and hand the partial block
                # back for a closed relation
                for cc in range(c + 1, ell):
                    wc = z[:, cc].copy()
                    for _pass in range(2):
                        for i in range(c):
                            coef = np.vdot(v[:, i], wc)
                            r[i, cc] += coef
                            wc -= coef * v[:, i]
                raise _InvariantSubspace(v[:, :c], r[:c, :])
            r[c, c] = 0.0
        else:
            r[c, c] = nrm
            w = w / nrm
        v[:, c] = w
    return v, r


def block_arnoldi_start(r0, projector=None, *, seed=0,
                        dep_tol=DEPENDENCY_TOL) -> BlockArnoldiState:
    """Reduced QR of the initial block, with dependent-column replacement.

    ``projector`` is a recycle space (anything with an orthonormal image
    basis attribute ``c``); when given, the initial block is first
    orthogonalized against ``C`` so the augmented basis stays orthonormal.
    """
    r0 = np.asarray(r0, dtype=COMPLEX)
    if r0.ndim == 1:
        r0 = r0[:, None]
    n, ell = r0.shape
    if ell < 1:
        raise DimensionError("initial block must have at least one column")
    c_basis = None
    if projector is not None and getattr(projector, "k", 0) > 0:
        c_basis = np.asarray(projector.c, dtype=COMPLEX)
        r0 = np.column_stack(
            [_orthogonalize(r0[:, i].copy(), [c_basis]) for i in range(ell)])
    log: list[Replacement] = []
    prev = [c_basis] if c_basis is not None else []
    v1, s0 = _block_qr_replace(r0, prev, 0, dep_tol, seed, log,
                               scale=float(np.linalg.norm(r0)))
    return BlockArnoldiState(
        basis=v1, hess=np.zeros((ell, 0), dtype=COMPLEX), s0=s0,
        block_size=ell, steps=0, replacements=tuple(log),
        coupling=np.zeros((c_basis.shape[1] if c_basis is not None else 0, 0),
                          dtype=COMPLEX),
        projector_c=c_basis, seed=seed, dep_tol=dep_tol)


def block_arnoldi_extend(a: SparseMatrix, state: BlockArnoldiState,
                         steps: int = 1) -> BlockArnoldiState:
    """Run ``steps`` more block Arnoldi steps, returning a new state."""
    if steps < 1:
        raise DimensionError("steps must be >= 1")
    if state.invariant:
        return state
    ell = state.block_size
    basis = state.basis
    hess = state.hess
    coupling = state.coupling
    c_basis = state.projector_c
    k = c_basis.shape[1] if c_basis is not None else 0
    log = list(state.replacements)
    j = state.steps
    invariant = False
    for _ in range(steps):
        v_last = basis[:, j * ell:(j + 1) * ell]
        z = block_matvec(a, v_last)
        raw_scale = max(float(np.linalg.norm(z)), a.frobenius_norm)
        h_col = np.zeros(((j + 1) * ell, ell), dtype=COMPLEX)
        b_col = np.zeros((k, ell), dtype=COMPLEX)
        for c in range(ell):
            w = z[:, c]
            for _pass in range(2):
                if k:
                    cc = c_basis.conj().T @ w
                    b_col[:, c] += cc
                    w = w - c_basis @ cc
                for i in range(j + 1):
                    blk = basis[:, i * ell:(i + 1) * ell]
                    coef = blk.conj().T @ w
                    h_col[i * ell:(i + 1) * ell, c] += coef
                    w = w - blk @ coef
            z[:, c] = w
        prev = ([c_basis] if k else []) + [basis]
        try:
            v_new, r_new = _block_qr_replace(z, prev, j + 1, state.dep_tol,
                                             state.seed, log, scale=raw_scale)
        except _InvariantSubspace as sig:
            # close the relation on the invariant span: one more Hessenberg
            # column block and whatever partial basis block the step built
            # before the ambient space ran out (possibly none, in which
            # case the coefficient matrix becomes square)
            tail = 0 if sig.v_partial is None else sig.v_partial.shape[1]
            hess_n = np.zeros(((j + 1) * ell + tail, (j + 1) * ell),
                              dtype=COMPLEX)
            hess_n[:(j + 1) * ell, :j * ell] = hess
            hess_n[:(j + 1) * ell, j * ell:] = h_col
            if tail:
                hess_n[(j + 1) * ell:, j * ell:] = sig.r_partial
                basis = np.hstack([basis, sig.v_partial])
            hess = hess_n
            if k:
                coupling = np.hstack([coupling, b_col])
            j += 1
            invariant = True
            break
        hess_n = np.zeros(((j + 2) * ell, (j + 1) * ell), dtype=COMPLEX)
        hess_n[:(j + 1) * ell, :j * ell] = hess
        hess_n[:(j + 1) * ell, j * ell:] = h_col
        hess_n[(j + 1) * ell:, j * ell:] = r_new
        hess = hess_n
        if k:
            coupling = np.hstack([coupling, b_col])
        basis = np.hstack([basis, v_new])
        j += 1
    return BlockArnoldiState(
        basis=basis, hess=hess, s0=state.s0, block_size=ell, steps=j,
        replacements=tuple(log), coupling=coupling, projector_c=c_basis,
        seed=state.seed, dep_tol=state.dep_tol, invariant=invariant)


def block_arnoldi(a: SparseMatrix, r0, m: int, projector=None, *, seed=0,
                  dep_tol=DEPENDENCY_TOL) -> BlockArnoldiState:
    """Build ``m`` steps of the (optionally projected) block Arnoldi
    process for the block Krylov space generated by ``r0``."""
    r0 = np.asarray(r0, dtype=COMPLEX)
    if r0.ndim == 1:
        r0 = r0[:, None]
    if r0.shape[0] != a.n_rows:
        raise DimensionError("r0 must be an n x L block")
    state = block_arnoldi_start(r0, projector, seed=seed, dep_tol=dep_tol)
    return block_arnoldi_extend(a, state, m)


def subspace_equality_angle(x, y) -> float:
    """Largest principal angle between the spans of two orthonormal blocks.

    Computed from the singular values of the orthogonal complement
    projection, which stays accurate for small angles.
    """
    x = np.asarray(x, dtype=COMPLEX)
    y = np.asarray(y, dtype=COMPLEX)
    if x.ndim == 1:
        x = x[:, None]
    if y.ndim == 1:
        y = y[:, None]
    if x.shape[1] != y.shape[1]:
        raise DimensionError("blocks must have the same number of columns")
    resid = y - x @ (x.conj().T @ y)
    s = np.linalg.svd(resid, compute_uv=False)
    smax = min(1.0, float(s.max()) if s.size else 0.0)
    return float(np.arcsin(smax))
