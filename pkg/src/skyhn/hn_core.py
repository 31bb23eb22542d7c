"""Brute-force highest-slope search over F_q-subspaces, the full HN
filtration by iterated quotients, and slope-sorted merging.

The search needs the integral of dim <W> for very many subspaces W of the
fiber at the generator degree.  Grid cells are grouped into classes with a
common active-relation column space, so each subspace costs one small rank
computation per class.  F_2 vectors ride on bitmask ints.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

from . import grmat, invariants
from .field import DenseMatrix
from .grmat import deg_leq, induced_grid
from .invariants import HNFactor, HNFactorList, merge_factors  # noqa: F401

__all__ = ["SubspaceIter", "SlopeRecord", "brute_force_max_slope",
           "hn_filtration_at", "merge_factors", "subspaces_of_dim",
           "subspace_grid_dims"]


# ---------------------------------------------------------------------------
# echelon kernels: generic field vectors (lists) and F_2 bitmasks (ints)

def _insert_generic(F, base, tmp, v):
    """Insert v (list, mutated) into the echelon `tmp` over the read-only
    echelon `base`; pivot = last nonzero row.  True if v was independent."""
    z = F.zero
    n = len(v)
    while True:
        piv = -1
        for i in range(n - 1, -1, -1):
            if v[i] != z:
                piv = i
                break
        if piv < 0:
            return False
        pc = base.get(piv)
        if pc is None:
            pc = tmp.get(piv)
        if pc is None:
            tmp[piv] = v
            return True
        c = F.mul(v[piv], F.inv(pc[piv]))
        for r in range(piv + 1):
            if pc[r] != z:
                v[r] = F.sub(v[r], F.mul(c, pc[r]))


def _insert_f2(base, tmp, v):
    while v:
        piv = v.bit_length() - 1
        pc = base.get(piv)
        if pc is None:
            pc = tmp.get(piv)
        if pc is None:
            tmp[piv] = v
            return True
        v ^= pc
    return False


class _FiberClasses:
    """Per-presentation cache: the induced grid, per-point fiber class, and
    per-class (area weight, relation-column echelon)."""

    def __init__(self, M):
        F = M.field
        self.M = M
        self.f2 = (getattr(F, "q", None) == 2)
        t = M.nrows
        G = induced_grid(M)
        self.grid = G
        alphas = set(M.row_degrees)
        if len(alphas) != 1:
            raise ValueError("module is not uniquely generated")
        self.alpha = next(iter(alphas))
        xs, ys = G.xs, G.ys
        wx = [b - a for a, b in zip(xs, xs[1:])] + [Fraction(0)]
        wy = [b - a for a, b in zip(ys, ys[1:])] + [Fraction(0)]
        dense = [M.dense_column(j) for j in range(M.ncols)]
        if self.f2:
            dense = [sum(1 << i for i, v in enumerate(c) if v) for c in dense]
        class_by_J = {}
        self.point_class = {}   # grid point -> class index, or -1 (zero fiber)
        self.classes = []       # list of [weight, echelon dict, corank]
        for iy, y in enumerate(ys):
            for ix, x in enumerate(xs):
                pt = (x, y)
                if not deg_leq(self.alpha, pt):
                    self.point_class[pt] = -1
                    continue
                J = tuple(j for j in range(M.ncols)
                          if deg_leq(M.col_degrees[j], pt))
                cid = class_by_J.get(J)
                if cid is None:
                    ech = {}
                    rank = 0
                    for j in J:
                        if self.f2:
                            rank += _insert_f2({}, ech, dense[j])
                        else:
                            rank += _insert_generic(F, {}, ech, list(dense[j]))
                    cid = len(self.classes)
                    class_by_J[J] = cid
                    self.classes.append([Fraction(0), ech, t - rank])
                self.point_class[pt] = cid
                self.classes[cid][0] += wx[ix] * wy[iy]

    def to_internal(self, vectors):
        """Convert dense basis vectors to the internal representation."""
        if self.f2:
            return [sum(1 << i for i, v in enumerate(vec) if v)
                    for vec in vectors]
        return [list(vec) for vec in vectors]

    def class_rank(self, cid, ivecs):
        """dim of the image of span(ivecs) in the fiber of class cid."""
        weight, ech, corank = self.classes[cid]
        if corank == 0:
            return 0
        F = self.M.field
        tmp = {}
        r = 0
        if self.f2:
            for v in ivecs:
                r += _insert_f2(ech, tmp, v)
        else:
            for v in ivecs:
                r += _insert_generic(F, ech, tmp, list(v))
        return r

    def integral(self, ivecs):
        """Integral over the plane of dim <span(ivecs)> (bounded modules)."""
        total = Fraction(0)
        for cid, (weight, _, corank) in enumerate(self.classes):
            if weight and corank:
                r = self.class_rank(cid, ivecs)
                if r:
                    total += weight * r
        return total

    def dims(self, ivecs):
        """dim <span(ivecs)> at every grid point."""
        per_class = {}
        out = {}
        for pt, cid in self.point_class.items():
            if cid < 0:
                out[pt] = 0
                continue
            if cid not in per_class:
                per_class[cid] = self.class_rank(cid, ivecs)
            out[pt] = per_class[cid]
        return out


def fiber_classes(M):
    cache = getattr(M, "_fiber_classes", None)
    if cache is None:
        cache = _FiberClasses(M)
        M._fiber_classes = cache
    return cache


def subspace_grid_dims(M, basis_vectors):
    """Pointwise dims of the submodule generated by the given fiber vectors
    (dense lists over the generators), on the induced grid of M."""
    fc = fiber_classes(M)
    return fc.grid, fc.dims(fc.to_internal(basis_vectors))


# ---------------------------------------------------------------------------
# Grassmannian enumeration by reduced row-echelon patterns

def subspaces_of_dim(field, t, k):
    """Yield bases (lists of k dense row vectors of length t) of all
    k-subspaces of F_q^t, one per subspace, in deterministic order:
    pivot patterns lexicographic, then free entries odometer-style."""
    if k == 0:
        yield []
        return
    elems = list(field.elements())
    for pattern in itertools.combinations(range(t), k):
        pset = set(pattern)
        free = [(i, j) for i in range(k)
                for j in range(pattern[i] + 1, t) if j not in pset]
        for assignment in itertools.product(elems, repeat=len(free)):
            rows = [[field.zero] * t for _ in range(k)]
            for i in range(k):
                rows[i][pattern[i]] = field.one
            for (i, j), v in zip(free, assignment):
                rows[i][j] = v
            yield rows


class SubspaceIter:
    """All subspaces of F_q^t with 1 <= dim <= t, smallest dimension first."""

    def __init__(self, field, t, dims=None):
        self.field = field
        self.t = t
        self.dims = list(dims) if dims is not None else list(range(1, t + 1))

    def __iter__(self):
        for k in self.dims:
            for idx, rows in enumerate(subspaces_of_dim(self.field, self.t, k)):
                yield k, idx, rows


def gaussian_line_count(q, k):
    """Number of lines in F_q^k: (q^k - 1)/(q - 1)."""
    return (q ** k - 1) // (q - 1)


class SlopeRecord:
    """A maximizing subspace: basis columns over the generators at alpha,
    with its inverse slope (integral per dimension)."""

    def __init__(self, alpha, basis, dim, integral):
        self.alpha = alpha
        self.basis = basis            # DenseMatrix t x dim
        self.dim = dim
        self.integral = integral
        self.inv_slope = Fraction(integral, dim)

    @property
    def slope(self):
        return 1 / self.inv_slope

    def basis_vectors(self):
        return [self.basis.column(j) for j in range(self.basis.cols)]


def brute_force_max_slope(M, use_filter=True, largest=False):
    """Exhaustive highest-slope submodule search at the generator degree.

    Lines are scanned first; a dimension-k stratum is skipped when fewer
    than (q^k - 1)/(q - 1) lines reach slope mu(best)/k, since a k-subspace
    beating the current best would force all its lines above that bound.
    (The skip also rules out equal-slope subspaces at that dimension: the
    bounding chain is strict.)

    Ties favor smaller dimension, then the earlier echelon pattern.  With
    largest=True they favor the larger dimension instead, which returns the
    unique maximal subspace of maximal slope -- the first member of the HN
    filtration (the sum of two maximal-slope submodules again has maximal
    slope, so the maximal one is unique and contains all others).
    """
    F = M.field
    t = M.nrows
    if t == 0:
        raise ValueError("zero thickness: no generators")
    fc = fiber_classes(M)
    q = F.q

    line_ints = []
    lines = []
    for rows in subspaces_of_dim(F, t, 1):
        iv = fc.to_internal(rows)
        lines.append((rows, iv))
        line_ints.append(fc.integral(iv))

    best_rows, best_dim, best_int = None, 0, None
    for (rows, _), integ in zip(lines, line_ints):
        if integ <= 0:
            raise ValueError("unbounded or empty submodule integral")
        # slope 1/integ > best_dim/best_int  <=>  best_int > best_dim*integ
        if best_rows is None or best_int > best_dim * integ:
            best_rows, best_dim, best_int = rows, 1, integ

    for k in range(2, t + 1):
        if use_filter:
            # lines with slope >= mu(best)/k: 1/l >= best_dim/(k*best_int)
            reach = sum(1 for l in line_ints if k * best_int >= best_dim * l)
            if reach < gaussian_line_count(q, k):
                continue
        for rows in subspaces_of_dim(F, t, k):
            iv = fc.to_internal(rows)
            integ = fc.integral(iv)
            if integ <= 0:
                raise ValueError("unbounded or empty submodule integral")
            # k/integ > best_dim/best_int
            if k * best_int > best_dim * integ or (
                    largest and k * best_int == best_dim * integ
                    and k > best_dim):
                best_rows, best_dim, best_int = rows, k, integ

    basis = DenseMatrix.from_columns(best_rows, t, F)
    return SlopeRecord(fc.alpha, basis, best_dim, best_int)


def hn_filtration_at(M, alpha, use_filter=True):
    """HN filtration of the submodule generated by the fiber at alpha.

    Repeatedly extracts the highest-slope subspace, records its factor as
    superlevel staircases with its slope, and passes to the quotient
    presentation until nothing is left.
    """
    alpha = grmat.as_degree(alpha)
    pm = grmat.pointwise_model(M, alpha)
    if pm.dim == 0:
        return HNFactorList(alpha, [])
    S = grmat.GradedMatrix(M.field, M.row_degrees, [alpha] * pm.dim,
                           [[(i, M.field.one)] for i in pm.basis_rows])
    cur = grmat.minimize(grmat.submodule_presentation(M, S))
    factors = []
    while cur.nrows > 0:
        rec = brute_force_max_slope(cur, use_filter=use_filter, largest=True)
        fcc = fiber_classes(cur)
        dims = fcc.dims(fcc.to_internal(rec.basis_vectors()))
        stairs = invariants.staircases_from_dims(fcc.grid, dims, alpha,
                                                 thickness=rec.dim)
        factors.append(HNFactor(stairs, rec.slope))
        cur = grmat.quotient_presentation(cur, rec.basis)
    for a, b in zip(factors, factors[1:]):
        if not a.slope > b.slope:
            raise AssertionError("HN slopes not strictly decreasing")
    return HNFactorList(alpha, factors)
