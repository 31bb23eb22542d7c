"""Graded matrices over rational bidegrees: presentations of 2-parameter
persistence modules and the operations on them.

A graded matrix M with degree-labeled rows (generators) and columns
(relations) presents the module coker(M: A[R] -> A[G]).  Entries are
nonzero only where row degree <= column degree componentwise.

Degrees are pairs of exact rationals (fractions.Fraction).
"""

from __future__ import annotations

import logging
from fractions import Fraction

from . import field as fieldmod
from .field import DenseMatrix

log = logging.getLogger(__name__)

NEG_INF = float("-inf")
POS_INF = float("inf")


def as_degree(d):
    """Coerce a pair of numbers/strings to an exact rational degree."""
    x, y = d
    return (Fraction(x), Fraction(y))


def deg_leq(a, b):
    return a[0] <= b[0] and a[1] <= b[1]


def deg_join(a, b):
    return (max(a[0], b[0]), max(a[1], b[1]))


def deg_meet(a, b):
    return (min(a[0], b[0]), min(a[1], b[1]))


class GradedMatrix:
    """Homogeneous matrix over a finite field with bidegree-labeled rows/cols.

    columns[j] is a sparse list of (row index, nonzero field element),
    sorted by row index.
    """

    def __init__(self, field, row_degrees, col_degrees, columns, check=True):
        self.field = field
        self.row_degrees = [as_degree(d) for d in row_degrees]
        self.col_degrees = [as_degree(d) for d in col_degrees]
        self.columns = [sorted(((i, v) for i, v in col if v != field.zero))
                        for col in columns]
        if check:
            self._validate()

    def _validate(self):
        if len(self.columns) != len(self.col_degrees):
            raise ValueError("column count mismatch")
        for j, col in enumerate(self.columns):
            for i, v in col:
                if not 0 <= i < len(self.row_degrees):
                    raise ValueError("row index out of range in column %d" % j)
                if not deg_leq(self.row_degrees[i], self.col_degrees[j]):
                    raise ValueError(
                        "inhomogeneous entry (%d, %d): row degree %s > column degree %s"
                        % (i, j, self.row_degrees[i], self.col_degrees[j]))

    @property
    def nrows(self):
        return len(self.row_degrees)

    @property
    def ncols(self):
        return len(self.col_degrees)

    def dense_column(self, j):
        z = self.field.zero
        v = [z] * self.nrows
        for i, x in self.columns[j]:
            v[i] = x
        return v

    def __eq__(self, other):
        return (isinstance(other, GradedMatrix) and self.field == other.field
                and self.row_degrees == other.row_degrees
                and self.col_degrees == other.col_degrees
                and self.columns == other.columns)

    def __repr__(self):
        return "GradedMatrix(%d gens, %d rels over %r)" % (
            self.nrows, self.ncols, self.field)


def from_dense_columns(field, row_degrees, col_degrees, dense_cols):
    cols = [[(i, v) for i, v in enumerate(c) if v != field.zero]
            for c in dense_cols]
    return GradedMatrix(field, row_degrees, col_degrees, cols)


class Grid:
    """Product grid: strictly increasing x and y coordinate lists."""

    def __init__(self, xs, ys):
        self.xs = sorted({Fraction(x) for x in xs})
        self.ys = sorted({Fraction(y) for y in ys})

    def points(self):
        for y in self.ys:
            for x in self.xs:
                yield (x, y)

    def floor(self, d):
        """Largest grid point <= d componentwise; -inf sentinel per axis."""
        x = _coord_floor(self.xs, d[0])
        y = _coord_floor(self.ys, d[1])
        return (x, y)

    def ceil(self, d):
        """Smallest grid point >= d componentwise; +inf sentinel per axis."""
        x = _coord_ceil(self.xs, d[0])
        y = _coord_ceil(self.ys, d[1])
        return (x, y)

    def __contains__(self, d):
        return d[0] in set(self.xs) and d[1] in set(self.ys)

    def __repr__(self):
        return "Grid(%d x %d)" % (len(self.xs), len(self.ys))


def _coord_floor(coords, v):
    import bisect
    i = bisect.bisect_right(coords, v)
    return coords[i - 1] if i else NEG_INF

def _coord_ceil(coords, v):
    import bisect
    i = bisect.bisect_left(coords, v)
    return coords[i] if i < len(coords) else POS_INF


def induced_grid(M):
    """Smallest grid containing all row and column degrees of M."""
    xs = [d[0] for d in M.row_degrees] + [d[0] for d in M.col_degrees]
    ys = [d[1] for d in M.row_degrees] + [d[1] for d in M.col_degrees]
    return Grid(xs or [Fraction(0)], ys or [Fraction(0)])


def kernel(M):
    """Minimal generating set of the syzygy module {v : Mv = 0}.

    Colexicographic sweep over the join-grid of column degrees: at each
    degree the nullspace of the active columns is computed, and coefficient
    vectors not spanned by previously found generators (shifted up) are
    recorded as new syzygies at that degree.  The result is a graded matrix
    with row degrees = col degrees of M.
    """
    F = M.field
    n = M.ncols
    if n == 0:
        return GradedMatrix(F, [], [], [])
    xs = sorted({d[0] for d in M.col_degrees})
    ys = sorted({d[1] for d in M.col_degrees})
    dense_cols = [M.dense_column(j) for j in range(n)]
    gens = []   # (degree, dense coefficient vector over ncols)
    seen_active = set()
    for y in ys:
        for x in xs:
            delta = (x, y)
            J = tuple(j for j in range(n) if deg_leq(M.col_degrees[j], delta))
            if not J or J in seen_active:
                continue
            seen_active.add(J)
            A = DenseMatrix.from_columns([dense_cols[j] for j in J], M.nrows, F)
            _, _, kb = fieldmod.reduce(A)
            if kb.cols == 0:
                continue
            # echelon of previously found generators, restricted to J
            ech = _Echelon(F, len(J))
            for gdeg, gvec in gens:
                if deg_leq(gdeg, delta):
                    ech.insert([gvec[j] for j in J])
            for t in range(kb.cols):
                v = kb.column(t)
                rem = ech.insert(v)
                if rem is not None:
                    full = [F.zero] * n
                    for idx, j in enumerate(J):
                        full[j] = rem[idx]
                    gens.append((delta, full))
    cols = [[(i, v) for i, v in enumerate(gvec) if v != F.zero]
            for _, gvec in gens]
    return GradedMatrix(F, list(M.col_degrees), [g for g, _ in gens], cols)


class _Echelon:
    """Incremental column echelon over a field; insert returns the reduced
    remainder when it is nonzero (vector was independent), else None."""

    def __init__(self, F, nrows):
        self.F = F
        self.nrows = nrows
        self.pivots = {}  # row -> column vector with that last nonzero row

    def insert(self, v):
        F = self.F
        z = F.zero
        v = list(v)
        while True:
            piv = None
            for i in range(self.nrows - 1, -1, -1):
                if v[i] != z:
                    piv = i
                    break
            if piv is None:
                return None
            if piv not in self.pivots:
                self.pivots[piv] = v
                return v
            pc = self.pivots[piv]
            c = F.mul(v[piv], F.inv(pc[piv]))
            for r in range(piv + 1):
                if pc[r] != z:
                    v[r] = F.sub(v[r], F.mul(c, pc[r]))

    def contains(self, v):
        F = self.F
        z = F.zero
        v = list(v)
        while True:
            piv = None
            for i in range(self.nrows - 1, -1, -1):
                if v[i] != z:
                    piv = i
                    break
            if piv is None:
                return True
            if piv not in self.pivots:
                return False
            pc = self.pivots[piv]
            c = F.mul(v[piv], F.inv(pc[piv]))
            for r in range(piv + 1):
                if pc[r] != z:
                    v[r] = F.sub(v[r], F.mul(c, pc[r]))

    @property
    def rank(self):
        return len(self.pivots)


def minimize(M):
    """Minimal presentation of coker M.

    Two reductions run to completion: (a) cancel unit pivots, i.e. nonzero
    entries with equal row and column degree, deleting the generator and
    relation involved; (b) drop relation columns lying in the span of the
    other columns at their own degree.  Neither changes the cokernel.
    """
    F = M.field
    z = F.zero
    row_degs = list(M.row_degrees)
    col_degs = list(M.col_degrees)
    cols = [M.dense_column(j) for j in range(M.ncols)]

    # (a) unit-pivot cancellation
    while True:
        hit = None
        for j, cd in enumerate(col_degs):
            for i, v in enumerate(cols[j]):
                if v != z and row_degs[i] == cd:
                    hit = (i, j)
                    break
            if hit:
                break
        if hit is None:
            break
        i, j = hit
        piv = cols[j]
        piv_inv = F.inv(piv[i])
        for j2 in range(len(cols)):
            if j2 == j or cols[j2][i] == z:
                continue
            c = F.mul(cols[j2][i], piv_inv)
            col2 = cols[j2]
            for r in range(len(row_degs)):
                if piv[r] != z:
                    col2[r] = F.sub(col2[r], F.mul(c, piv[r]))
        del cols[j]
        del col_degs[j]
        for col in cols:
            del col[i]
        del row_degs[i]

    # (b) redundant-column pruning
    changed = True
    while changed:
        changed = False
        for j in range(len(cols)):
            others = _Echelon(F, len(row_degs))
            for j2 in range(len(cols)):
                if j2 != j and deg_leq(col_degs[j2], col_degs[j]):
                    others.insert(list(cols[j2]))
            if others.contains(cols[j]):
                del cols[j]
                del col_degs[j]
                changed = True
                break

    return from_dense_columns(F, row_degs, col_degs, cols)


def submodule_presentation(M, S):
    """Presentation of the submodule generated by the graded columns S.

    S is a GradedMatrix over the same generators as M (row_degrees equal).
    The result N has row degrees = column degrees of S, computed as the top
    block of the kernel of [S M]; columns with zero top block are pure
    syzygies of M and dropped.
    """
    if S.row_degrees != M.row_degrees:
        raise ValueError("S must be graded columns over the generators of M")
    F = M.field
    concat = GradedMatrix(F, M.row_degrees,
                          S.col_degrees + M.col_degrees,
                          S.columns + M.columns)
    K = kernel(concat)
    s = S.ncols
    out_cols = []
    out_degs = []
    for j in range(K.ncols):
        top = [(i, v) for i, v in K.columns[j] if i < s]
        if top:
            out_cols.append(top)
            out_degs.append(K.col_degrees[j])
    return GradedMatrix(F, S.col_degrees, out_degs, out_cols)


def quotient_presentation(M_alpha, B):
    """Presentation of coker(M_alpha) / <W> for a subspace W of the fiber at
    the common generator degree alpha, given by basis columns B (DenseMatrix
    over the generators).

    Column-echelonizes B, reduces the relation columns at the pivot rows,
    deletes those rows, and fully minimizes.
    """
    F = M_alpha.field
    z = F.zero
    alphas = set(M_alpha.row_degrees)
    if len(alphas) > 1:
        raise ValueError("module is not uniquely generated")
    t = M_alpha.nrows
    if B.cols == 0:
        return M_alpha
    if B.rows != t:
        raise ValueError("basis height mismatch")
    # column echelon of B, pivot = last nonzero row
    ech = _Echelon(F, t)
    for j in range(B.cols):
        if ech.insert(B.column(j)) is None:
            raise ValueError("degenerate basis: columns not independent")
    keep = [i for i in range(t) if i not in ech.pivots]
    new_cols = []
    for j in range(M_alpha.ncols):
        col = M_alpha.dense_column(j)
        for piv in sorted(ech.pivots, reverse=True):
            if col[piv] != z:
                pc = ech.pivots[piv]
                c = F.mul(col[piv], F.inv(pc[piv]))
                for r in range(piv + 1):
                    if pc[r] != z:
                        col[r] = F.sub(col[r], F.mul(c, pc[r]))
        new_cols.append([col[i] for i in keep])  # minimize drops zero columns
    pres = from_dense_columns(F, [M_alpha.row_degrees[i] for i in keep],
                              list(M_alpha.col_degrees), new_cols)
    return minimize(pres)


def shift_join(M, alpha):
    """Replace every row/column degree by its join with alpha."""
    alpha = as_degree(alpha)
    return GradedMatrix(M.field,
                        [deg_join(d, alpha) for d in M.row_degrees],
                        [deg_join(d, alpha) for d in M.col_degrees],
                        M.columns)


def grid_restrict(M, G):
    """Push degrees to their grid ceilings; out-of-grid degrees are dropped.

    Rows/columns whose ceiling hits the +inf sentinel present nothing inside
    the grid (generator never born / relation never active) and are removed;
    the counts are logged.
    """
    row_map = {}
    dropped_rows = 0
    new_row_degs = []
    for i, d in enumerate(M.row_degrees):
        c = G.ceil(d)
        if c[0] == POS_INF or c[1] == POS_INF:
            dropped_rows += 1
        else:
            row_map[i] = len(new_row_degs)
            new_row_degs.append(c)
    new_cols = []
    new_col_degs = []
    dropped_cols = 0
    for j, d in enumerate(M.col_degrees):
        c = G.ceil(d)
        if c[0] == POS_INF or c[1] == POS_INF:
            dropped_cols += 1
            continue
        new_cols.append([(row_map[i], v) for i, v in M.columns[j]])
        new_col_degs.append(c)
    if dropped_rows or dropped_cols:
        log.info("grid_restrict dropped %d generators, %d relations "
                 "(outside grid)", dropped_rows, dropped_cols)
    return GradedMatrix(M.field, new_row_degs, new_col_degs, new_cols)


class PointwiseModel:
    """The fiber V_gamma = (A[G]/Im M)_gamma with a chosen basis.

    basis_rows are the generator rows (global indices) whose classes form a
    basis; reduce_vector sends a vector over the live rows to coordinates in
    that basis.
    """

    def __init__(self, M, gamma):
        F = M.field
        z = F.zero
        gamma = as_degree(gamma)
        self.degree = gamma
        self.live_rows = [i for i, d in enumerate(M.row_degrees)
                          if deg_leq(d, gamma)]
        self._pos = {g: k for k, g in enumerate(self.live_rows)}
        n = len(self.live_rows)
        ech = _Echelon(F, n)
        for j, d in enumerate(M.col_degrees):
            if deg_leq(d, gamma):
                col = [z] * n
                for i, v in M.columns[j]:
                    col[self._pos[i]] = v
                ech.insert(col)
        self._ech = ech
        self._F = F
        self.basis_rows = [g for g in self.live_rows
                           if self._pos[g] not in ech.pivots]
        self.dim = n - ech.rank

    def reduce_vector(self, v):
        """Reduce a vector over live_rows to coordinates in basis_rows."""
        F = self._F
        z = F.zero
        v = list(v)
        for piv in sorted(self._ech.pivots, reverse=True):
            if v[piv] != z:
                pc = self._ech.pivots[piv]
                c = F.mul(v[piv], F.inv(pc[piv]))
                for r in range(piv + 1):
                    if pc[r] != z:
                        v[r] = F.sub(v[r], F.mul(c, pc[r]))
        return [v[self._pos[g]] for g in self.basis_rows]

    def class_of_row(self, i):
        """Coordinates of generator row i's class in the chosen basis."""
        F = self._F
        v = [F.zero] * len(self.live_rows)
        v[self._pos[i]] = F.one
        return self.reduce_vector(v)


def pointwise_model(M, gamma):
    return PointwiseModel(M, gamma)


def structure_map(M, gamma, delta):
    """Matrix of V_{gamma -> delta} in the pointwise-model bases."""
    gamma, delta = as_degree(gamma), as_degree(delta)
    if not deg_leq(gamma, delta):
        raise ValueError("structure map requires gamma <= delta")
    pm_g = PointwiseModel(M, gamma)
    pm_d = PointwiseModel(M, delta)
    F = M.field
    cols = []
    for g in pm_g.basis_rows:
        v = [F.zero] * len(pm_d.live_rows)
        v[pm_d._pos[g]] = F.one
        cols.append(pm_d.reduce_vector(v))
    return DenseMatrix.from_columns(cols, pm_d.dim, F)


def connected_components(M):
    """Partition rows and columns into blocks with disjoint column supports.

    Returns a list of (row_indices, col_indices).  Untouched rows become
    singleton free blocks; zero columns are attached to an empty-row block
    of their own.  This is a sound partial decomposition: blocks are genuine
    direct summands, with no indecomposability claim.
    """
    parent = list(range(M.nrows))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for col in M.columns:
        rows = [i for i, _ in col]
        for r in rows[1:]:
            union(rows[0], r)
    blocks = {}
    for i in range(M.nrows):
        blocks.setdefault(find(i), ([], []))[0].append(i)
    zero_col_blocks = []
    for j, col in enumerate(M.columns):
        if col:
            blocks[find(col[0][0])][1].append(j)
        else:
            zero_col_blocks.append(([], [j]))
    out = [blocks[k] for k in sorted(blocks, key=lambda r: min(blocks[r][0]))]
    return out + zero_col_blocks


def extract_block(M, rows, cols):
    """The sub-presentation on the given rows/columns (a direct summand)."""
    pos = {g: k for k, g in enumerate(rows)}
    new_cols = [[(pos[i], v) for i, v in M.columns[j]] for j in cols]
    return GradedMatrix(M.field,
                        [M.row_degrees[i] for i in rows],
                        [M.col_degrees[j] for j in cols],
                        new_cols)


def direct_sum(M1, M2):
    if M1.field != M2.field:
        raise ValueError("direct sum requires a common field")
    off = M1.nrows
    cols = list(M1.columns) + [[(i + off, v) for i, v in col]
                               for col in M2.columns]
    return GradedMatrix(M1.field,
                        M1.row_degrees + M2.row_degrees,
                        M1.col_degrees + M2.col_degrees,
                        cols)
