"""Randomized shrunk-subspace engine for HN filtrations on finite grids.

The fiber at alpha together with the structure maps into all higher grid
points defines a matrix space A_alpha.  The minimal shrunk subspace of a
(p, q)-blow-up of that space is exactly the fiber of a member of the HN
filtration, so a shrunk-subspace oracle yields a split-and-recurse driver.

The oracle is randomized: draw a random matrix A in a blown-up space over
an extension field, run its Wong sequence, and certify the answer when the
limit lands inside the image of A.  The Wong image steps exploit the block
structure of blow-ups (the whole limit has the form k^p tensor S), and A is
sparsified beforehand by invertible column operations that stay inside the
blow-up span.
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

from . import field as fieldmod
from . import grmat, invariants
from .field import DenseMatrix, PrimeField, embed_phi, ext_field_build, kron
from .grmat import as_degree, deg_leq
from .hn_core import _insert_f2, _insert_generic, fiber_classes
from .invariants import HNFactor, HNFactorList

__all__ = ["MatrixSpace", "BlowUp", "WongState", "ShrunkFailure",
           "build_A_alpha", "wong_limit", "shrunk_subspace_random",
           "hn_cheng"]


class ShrunkFailure(RuntimeError):
    """The randomized shrunk-subspace search kept failing its certificate."""

    def __init__(self, alpha, attempts):
        super().__init__(
            "no certified shrunk subspace at %s after %d attempts"
            % (alpha, attempts))
        self.alpha = alpha
        self.attempts = attempts


def _is_f2(F):
    return isinstance(F, PrimeField) and F.q == 2


def _reduce_cols(F, cols, nrows):
    """Column-reduce dense columns.

    Returns (rank, kernel_combos); each kernel combo is a dense coefficient
    vector over the input columns.  F_2 columns ride on bitmask ints.
    """
    n = len(cols)
    if _is_f2(F):
        pivots = {}
        kernel = []
        rank = 0
        for j, col in enumerate(cols):
            v = 0
            for i, x in enumerate(col):
                if x:
                    v |= 1 << i
            t = 1 << j
            while v:
                hit = pivots.get(v.bit_length() - 1)
                if hit is None:
                    pivots[v.bit_length() - 1] = (v, t)
                    rank += 1
                    break
                v ^= hit[0]
                t ^= hit[1]
            else:
                kernel.append([(t >> r) & 1 for r in range(n)])
        return rank, kernel
    A = DenseMatrix.from_columns(cols, nrows, F)
    rank, _, kb = fieldmod.reduce(A)
    return rank, [kb.column(j) for j in range(kb.cols)]


class _Span:
    """Incremental column span over F with an F_2 bitmask fast path."""

    def __init__(self, F, nrows):
        self.F = F
        self.nrows = nrows
        self.f2 = _is_f2(F)
        self.ech = {}

    def insert(self, col):
        if self.f2:
            v = 0
            for i, x in enumerate(col):
                if x:
                    v |= 1 << i
            return _insert_f2({}, self.ech, v)
        return _insert_generic(self.F, {}, self.ech, list(col))

    @property
    def dim(self):
        return len(self.ech)

    def basis_columns(self):
        if self.f2:
            return [[(v >> i) & 1 for i in range(self.nrows)]
                    for v in self.ech.values()]
        return [list(v) for v in self.ech.values()]


class MatrixSpace:
    """A subspace of k^{nrows x ncols} given by an independent basis."""

    def __init__(self, field, nrows, ncols, basis, check=True):
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        self.basis = list(basis)
        if check:
            span = _Span(field, nrows * ncols)
            for B in self.basis:
                if B.rows != nrows or B.cols != ncols or B.field != field:
                    raise ValueError("basis matrix shape/field mismatch")
                vec = [x for row in B.data for x in row]
                if not span.insert(vec):
                    raise ValueError("basis matrices are not independent")

    @property
    def ell(self):
        return len(self.basis)

    def __repr__(self):
        return "MatrixSpace(%d x %d, ell=%d)" % (
            self.nrows, self.ncols, self.ell)


class BlowUp:
    """The Kronecker blow-up k^{p x q} tensor space."""

    def __init__(self, space, p, q):
        if p < 1 or q < 1:
            raise ValueError("blow-up sizes must be >= 1")
        self.space = space
        self.p = p
        self.q = q

    def image_core(self, ucols):
        """Core S of the blow-up image: span{A_k . u_j} over base matrices
        A_k and column blocks u_j of the given vectors; the full image of
        span(ucols) is k^p tensor S, because every block position i is
        reachable through some E_{ij} tensor A_k."""
        sp = self.space
        F = sp.field
        Np = sp.ncols
        z = F.zero
        span = _Span(F, sp.nrows)
        for u in ucols:
            for j in range(self.q):
                blk = u[j * Np:(j + 1) * Np]
                if all(x == z for x in blk):
                    continue
                for A in sp.basis:
                    span.insert(A.matvec(blk))
        return span.basis_columns()

    def image_naive(self, ucols):
        """Reference image computation: apply every E_ij tensor A_k to every
        vector and span the results in k^{p*nrows}.  Test oracle only."""
        sp = self.space
        F = sp.field
        Np, N = sp.ncols, sp.nrows
        span = _Span(F, self.p * N)
        for u in ucols:
            for j in range(self.q):
                blk = u[j * Np:(j + 1) * Np]
                for A in sp.basis:
                    w0 = A.matvec(blk)
                    for i in range(self.p):
                        w = [F.zero] * (self.p * N)
                        w[i * N:(i + 1) * N] = w0
                        span.insert(w)
        return span.basis_columns()


class WongState:
    """Wong-sequence iteration state for a matrix A inside a blow-up.

    The limit candidate W always has the form k^p tensor S for a subspace
    S of k^nrows; only a basis of S is stored.
    """

    def __init__(self, A, blow):
        self.A = A
        self.blow = blow
        self.step = 0
        self.s_basis = []
        self.last_preimage = []
        self._acols = A.columns()
        self._rank_a = None
        self._last_aug_rank = None

    @property
    def rank_a(self):
        if self._rank_a is None:
            self._rank_a, _ = _reduce_cols(self.A.field, self._acols,
                                           self.A.rows)
        return self._rank_a

    def w_columns(self):
        """Basis of W = k^p tensor S as dense columns of length p*nrows."""
        F = self.A.field
        N = self.blow.space.nrows
        out = []
        for a in range(self.blow.p):
            for s in self.s_basis:
                w = [F.zero] * (self.blow.p * N)
                w[a * N:(a + 1) * N] = s
                out.append(w)
        return out

    def preimage(self):
        """Basis of A^{-1}(W) in k^{q*ncols}, via the kernel of [A | W]."""
        F = self.A.field
        aug = self._acols + self.w_columns()
        rank, combos = _reduce_cols(F, aug, self.A.rows)
        self._last_aug_rank = rank
        na = len(self._acols)
        span = _Span(F, na)
        for c in combos:
            span.insert(c[:na])
        return span.basis_columns()

    def advance(self):
        """One Wong step W -> blow(A^{-1}(W)); True if W grew."""
        self.last_preimage = self.preimage()
        new_s = self.blow.image_core(self.last_preimage)
        self.step += 1
        if len(new_s) == len(self.s_basis):
            return False
        self.s_basis = new_s
        return True

    @property
    def contained(self):
        """Whether the (stabilized) limit lies inside Im A; valid after the
        final preimage call, whose augmented rank is cached."""
        return self._last_aug_rank == self.rank_a


def _run_wong(A, blow):
    st = WongState(A, blow)
    limit = min(blow.p * blow.space.nrows, blow.q * blow.space.ncols) + 1
    while st.advance():
        if st.step > limit:
            raise AssertionError("Wong sequence failed to stabilize")
    return st


def wong_limit(A, blow):
    """Limit of the Wong sequence of (A, blow-up space) and whether it is
    contained in the image of A."""
    st = _run_wong(A, blow)
    F = A.field
    cols = st.w_columns()
    return DenseMatrix.from_columns(cols, A.rows, F), st.contained


# ---------------------------------------------------------------------------
# randomized minimal shrunk subspace

def _assemble_blocks(blocks, g, F):
    """Stack a p x q array of g x g DenseMatrix blocks into one matrix."""
    p, q = len(blocks), len(blocks[0])
    out = DenseMatrix.zero(p * g, q * g, F)
    for i in range(p):
        for j in range(q):
            B = blocks[i][j]
            for a in range(g):
                row = out.data[i * g + a]
                brow = B.data[a]
                for b in range(g):
                    row[j * g + b] = brow[b]
    return out


def _echelon_transform(F, cols):
    """Column-echelonize; return the invertible transformation C (as a
    DenseMatrix of columns) with [cols] . C in echelon form.  Only
    "subtract a multiple of another column" operations are used."""
    n = len(cols)
    z = F.zero
    work = [list(c) for c in cols]
    trans = [[F.one if i == j else z for i in range(n)] for j in range(n)]
    pivots = {}
    for j in range(n):
        col, tr = work[j], trans[j]
        while True:
            piv = None
            for i in range(len(col) - 1, -1, -1):
                if col[i] != z:
                    piv = i
                    break
            if piv is None or piv not in pivots:
                break
            pj = pivots[piv]
            pc, pt = work[pj], trans[pj]
            c = F.mul(col[piv], F.inv(pc[piv]))
            for r in range(piv + 1):
                if pc[r] != z:
                    col[r] = F.sub(col[r], F.mul(c, pc[r]))
            for r in range(n):
                if pt[r] != z:
                    tr[r] = F.sub(tr[r], F.mul(c, pt[r]))
        if piv is not None:
            pivots[piv] = j
    return DenseMatrix.from_columns(trans, n, F)


def _partial_reduce(F, xmats):
    """Sparsify the coefficient matrices before forming A.

    Stacking all X_i vertically gives the scalar matrix whose column b
    collects the coefficients of A's block-column b.  A common invertible
    right factor C (column echelon of the stack) maps each X_i to X_i . C;
    the resulting A picks up zero block-columns while staying in the span
    of the blow-up, since only the X coefficients changed.
    """
    if not xmats:
        return xmats
    Q = xmats[0].cols
    stacked = []
    for b in range(Q):
        col = []
        for X in xmats:
            col.extend(X.column(b))
        stacked.append(col)
    C = _echelon_transform(F, stacked)
    return [X.matmul(C) for X in xmats]


def _mat_add_into(acc, M):
    F = acc.field
    for i in range(acc.rows):
        arow, mrow = acc.data[i], M.data[i]
        for j in range(acc.cols):
            if mrow[j] != F.zero:
                arow[j] = F.add(arow[j], mrow[j])


def shrunk_subspace_random(space, p, seed, q=None, g_extra=0):
    """One randomized attempt at the minimal shrunk subspace of `space`.

    Blows the space up by (p, q) (q defaults to p), extends the field by
    degree g = max(1, ceil(log^2_|k| p)) + g_extra, draws random coefficient
    matrices over the extension, embeds them as g x g blocks, partially
    column-reduces, and runs the Wong sequence.  When the limit lies in
    Im A the preimage is the certified minimal shrunk subspace of the
    blow-up, of the form k^{gq} tensor U*; the projection U* (a DenseMatrix
    whose columns span a subspace of k^ncols) is returned.  Returns None
    when the certificate fails (caller retries with a fresh seed or a
    larger blow-up).
    """
    if q is None:
        q = p
    F = space.field
    Np = space.ncols
    if space.ell == 0 or space.nrows == 0:
        # every vector shrinks to nothing: the whole space is minimal
        return DenseMatrix.identity(Np, F)
    if p <= 1:
        g = 1
    else:
        g = max(1, math.ceil(math.log(p, F.q) ** 2))
    g += g_extra
    rng = random.Random(seed)
    if g == 1:
        xmats = [DenseMatrix(p, q, F,
                             [[rng.randrange(F.q) for _ in range(q)]
                              for _ in range(p)])
                 for _ in range(space.ell)]
    else:
        ext = ext_field_build(F.q, g)
        xmats = []
        for _ in range(space.ell):
            blocks = [[embed_phi(tuple(rng.randrange(F.q) for _ in range(g)),
                                 ext)
                       for _ in range(q)] for _ in range(p)]
            xmats.append(_assemble_blocks(blocks, g, F))
    P, Q = g * p, g * q
    xmats = _partial_reduce(F, xmats)
    A = DenseMatrix.zero(P * space.nrows, Q * Np, F)
    for X, Ak in zip(xmats, space.basis):
        _mat_add_into(A, kron(X, Ak))
    st = _run_wong(A, BlowUp(space, P, Q))
    if not st.contained:
        return None
    pre = st.last_preimage     # basis of k^{Q} tensor U*
    span = _Span(F, Np)
    for c in pre:
        span.insert(c[:Np])    # first block projects onto U*
    if span.dim * Q != len(pre):
        # the preimage does not have the tensor shape the scaling law
        # demands; treat as a failed draw rather than returning junk
        return None
    return DenseMatrix.from_columns(span.basis_columns(), Np, F)


# ---------------------------------------------------------------------------
# the matrix space of a module at a grid point

def build_A_alpha(M, G, alpha):
    """Matrix space of all structure maps out of the fiber at alpha.

    Rows are the stacked fibers at the grid points strictly above alpha
    (colexicographic order, zero-dimensional fibers contribute no rows);
    the basis has one matrix per point with a nonzero structure map,
    carrying that map in its block and zeros elsewhere.

    Returns (space, p0, q0, betas) with p0 = dim at alpha, q0 = total
    stacked dimension, betas = all grid points above alpha.
    """
    alpha = as_degree(alpha)
    F = M.field
    pm = grmat.pointwise_model(M, alpha)
    p0 = pm.dim
    if p0 == 0:
        raise ValueError("zero fiber at %s" % (alpha,))
    betas = [b for b in G.points() if deg_leq(alpha, b) and b != alpha]
    placed = []
    q0 = 0
    for b in betas:
        T = grmat.structure_map(M, alpha, b)
        if T.rows == 0:
            continue
        placed.append((q0, T))
        q0 += T.rows
    basis = []
    for off, T in placed:
        if all(x == F.zero for row in T.data for x in row):
            continue
        B = DenseMatrix.zero(q0, p0, F)
        for a in range(T.rows):
            B.data[off + a] = list(T.data[a])
        basis.append(B)
    return MatrixSpace(F, q0, p0, basis), p0, q0, betas


# ---------------------------------------------------------------------------
# HN driver: Farey probes, retries, split-and-recurse

def _farey_probes(rp, rq, budget, cap):
    """Mediant descent from 0/1, 1/0 toward rp/rq: the probe ratios in
    visiting order, skipping the target itself, capped by p*q <= cap."""
    lo, hi = (0, 1), (1, 0)
    out = []
    while len(out) < budget:
        m = (lo[0] + hi[0], lo[1] + hi[1])
        if m == (rp, rq) or m[0] * m[1] > cap:
            break
        if m[0] * rq > m[1] * rp:
            hi = m
        else:
            lo = m
        out.append(m)
    return out


def _shrunk_with_retries(space, p, q, alpha, seed, g_extra, max_retries,
                         p_cap):
    """Retry schedule: fresh deterministic seed each attempt, alternately
    enlarging the field extension and the blow-up scale (ratio preserved,
    p capped by p_cap).  Over tiny base fields the default extension leaves
    a random matrix singular too often, so the extension degree must grow
    with the attempts."""
    for attempt in range(max_retries):
        m = 1 << (attempt // 2)
        while m > 1 and m * p > p_cap:
            m >>= 1
        extra = g_extra + (attempt + 1) // 2
        sub_seed = hash((seed, alpha, p, q, attempt)) & 0x7FFFFFFF
        U = shrunk_subspace_random(space, m * p, sub_seed, q=m * q,
                                   g_extra=extra)
        if U is not None:
            return U
    raise ShrunkFailure(alpha, max_retries)


def _split_fiber(space, p0, q0, alpha, seed, g_extra, max_retries,
                 farey_budget, farey_cap):
    """Find the fiber of a proper nonzero HN filtration member, or None
    when the module is certified semistable at alpha.

    The shrunk subspace of a (p, q)-blow-up of the space is the fiber of
    the largest filtration member whose factors all have discrete slope
    above p/(p+q); probing small ratios near p0/q0 often yields a usable
    split long before the exact (and large) (p0, q0) computation.
    """
    if q0 == 0 or space.ell == 0:
        return None
    g = math.gcd(p0, q0)
    rp, rq = p0 // g, q0 // g
    p_cap = p0 * q0
    for (p, q) in _farey_probes(rp, rq, farey_budget, farey_cap):
        U = _shrunk_with_retries(space, p, q, alpha, seed, g_extra,
                                 max_retries, p_cap)
        d = U.cols
        if p * rq > q * rp:
            # threshold above the whole module's ratio: any nonzero
            # result is automatically a proper submodule
            if 0 < d < p0:
                return U
        elif 0 < d < p0:
            return U
    U = _shrunk_with_retries(space, rp, rq, alpha, seed, g_extra,
                             max_retries, p_cap)
    if U.cols in (0, p0):
        return None
    return U


def _semistable_factor(cur, alpha):
    F = cur.field
    t = cur.nrows
    fc = fiber_classes(cur)
    ident = [[F.one if i == j else F.zero for i in range(t)]
             for j in range(t)]
    iv = fc.to_internal(ident)
    integ = fc.integral(iv)
    if integ <= 0:
        raise ValueError(
            "module is not bounded at %s: infinite slope integral" % (alpha,))
    dims = fc.dims(iv)
    stairs = invariants.staircases_from_dims(fc.grid, dims, alpha,
                                             thickness=t)
    return HNFactor(stairs, Fraction(t) / integ)


def _factors_rec(cur, G, alpha, seed, g_extra, max_retries, farey_budget,
                 farey_cap):
    if cur.nrows == 0:
        return []
    space, p0, q0, _ = build_A_alpha(cur, G, alpha)
    U = _split_fiber(space, p0, q0, alpha, seed, g_extra, max_retries,
                     farey_budget, farey_cap)
    if U is None:
        return [_semistable_factor(cur, alpha)]
    F = cur.field
    ucols = [U.column(j) for j in range(U.cols)]
    S = grmat.GradedMatrix(
        F, cur.row_degrees, [alpha] * U.cols,
        [[(i, v) for i, v in enumerate(col) if v != F.zero] for col in ucols])
    sub = grmat.minimize(grmat.submodule_presentation(cur, S))
    quot = grmat.quotient_presentation(cur, U)
    return (_factors_rec(sub, G, alpha, hash((seed, 1)), g_extra,
                         max_retries, farey_budget, farey_cap)
            + _factors_rec(quot, G, alpha, hash((seed, 2)), g_extra,
                           max_retries, farey_budget, farey_cap))


def hn_cheng(M, G, alpha, seed=0, g_extra=0, max_retries=8, farey_budget=6,
             farey_cap=36):
    """HN filtration at alpha via recursive shrunk-subspace splits.

    G must be a regular grid containing the degrees of M (and alpha) inside
    the support box, so that the discrete filtration transported from G
    coincides with the continuous one; slopes are computed exactly with
    cell-area weighting, making the output directly comparable with the
    brute-force search.
    """
    alpha = as_degree(alpha)
    pm = grmat.pointwise_model(M, alpha)
    if pm.dim == 0:
        return HNFactorList(alpha, [])
    S = grmat.GradedMatrix(M.field, M.row_degrees, [alpha] * pm.dim,
                           [[(i, M.field.one)] for i in pm.basis_rows])
    cur = grmat.minimize(grmat.submodule_presentation(M, S))
    factors = _factors_rec(cur, G, alpha, seed, g_extra, max_retries,
                           farey_budget, farey_cap)
    for a, b in zip(factors, factors[1:]):
        if not a.slope > b.slope:
            raise AssertionError("HN slopes not strictly decreasing")
    return HNFactorList(alpha, factors)
