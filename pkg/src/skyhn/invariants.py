"""Betti tables, Hilbert functions, integrals, slopes, staircases, the
Skyscraper store with theta-queries, and erosion distance."""

from __future__ import annotations

import bisect
from fractions import Fraction

from . import grmat
from .grmat import (GradedMatrix, Grid, as_degree, deg_join, deg_leq,
                    induced_grid, NEG_INF, POS_INF)


class BettiTable:
    """Degree multisets b0, b1, b2 of a minimal free resolution."""

    def __init__(self, b0, b1, b2):
        self.b0 = sorted(b0)
        self.b1 = sorted(b1)
        self.b2 = sorted(b2)

    def all_degrees(self):
        return self.b0 + self.b1 + self.b2

    def __eq__(self, other):
        return (isinstance(other, BettiTable) and self.b0 == other.b0
                and self.b1 == other.b1 and self.b2 == other.b2)

    def __repr__(self):
        return "BettiTable(b0=%r, b1=%r, b2=%r)" % (self.b0, self.b1, self.b2)


def betti_numbers(M):
    """Graded Betti numbers of coker M: minimize, then take the minimal
    kernel of the minimal presentation for b2."""
    Mmin = grmat.minimize(M)
    K = grmat.minimize(grmat.kernel(Mmin))
    return BettiTable(Mmin.row_degrees, Mmin.col_degrees, K.col_degrees)


def integral_dim(bt, B):
    """Integral of the pointwise dimension over the plane, via the
    inclusion-exclusion polynomial sum_i (-1)^i sum_{g in b_i} prod(B_j - g_j).

    Requires B componentwise above every Betti degree (bounded support
    witness); the value is independent of any valid B.
    """
    B = as_degree(B)
    for d in bt.all_degrees():
        if not deg_leq(d, B):
            raise ValueError("bound %s is below the Betti degree %s" % (B, d))
    total = Fraction(0)
    for degs, sign in ((bt.b0, 1), (bt.b1, -1), (bt.b2, 1)):
        for g in degs:
            total += sign * (B[0] - g[0]) * (B[1] - g[1])
    return total


def integral_of(M):
    """Integral of dim coker M (bounded modules), via betti_numbers."""
    bt = betti_numbers(M)
    degs = bt.all_degrees()
    if not degs:
        return Fraction(0)
    B = (max(d[0] for d in degs), max(d[1] for d in degs))
    return integral_dim(bt, B)


class HilbertFn:
    """Pointwise dimensions at the lower corners of a grid's cells."""

    def __init__(self, grid, values):
        self.grid = grid
        self.values = values  # dict point -> dim

    def __getitem__(self, point):
        return self.values[as_degree(point)]


def hilbert_function(M, G):
    values = {}
    for pt in G.points():
        values[pt] = grmat.pointwise_model(M, pt).dim
    return HilbertFn(G, values)


class Staircase:
    """Uniquely generated interval: one generator degree and an antichain of
    relation degrees, sorted by x ascending (hence y descending).

    The support is {b : gen <= b and no rel <= b}; relations act closed at
    their degree.
    """

    def __init__(self, gen, rels):
        self.gen = as_degree(gen)
        rels = sorted((as_degree(r) for r in rels))
        for a, b in zip(rels, rels[1:]):
            if not (a[0] < b[0] and a[1] > b[1]):
                raise ValueError("relations do not form an antichain: %s, %s"
                                 % (a, b))
        for r in rels:
            if not deg_leq(self.gen, r):
                raise ValueError("relation %s below generator %s"
                                 % (r, self.gen))
        self.rels = rels
        if self.rels and self.rels[0] == self.gen:
            raise ValueError("empty staircase (relation at the generator)")
        self._rel_xs = [r[0] for r in self.rels]

    def key(self):
        return (self.gen, tuple(self.rels))

    def __eq__(self, other):
        return isinstance(other, Staircase) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return "Staircase(gen=%s, rels=%s)" % (self.gen, self.rels)

    def betti(self):
        """Minimal resolution degrees: syzygies sit at the joins of
        consecutive relations."""
        b2 = [(b[0], a[1]) for a, b in zip(self.rels, self.rels[1:])]
        return BettiTable([self.gen], self.rels, b2)

    def area(self):
        bt = self.betti()
        degs = bt.all_degrees()
        B = (max(d[0] for d in degs), max(d[1] for d in degs))
        return integral_dim(bt, B)

    def to_presentation(self, field):
        cols = [[(0, field.one)] for _ in self.rels]
        return GradedMatrix(field, [self.gen], list(self.rels), cols)


def staircase_contains(S, beta):
    """Membership test: gen <= beta and no relation <= beta, via binary
    search over the x-sorted antichain."""
    beta = as_degree(beta)
    if not deg_leq(S.gen, beta):
        return False
    # relations with x <= beta.x have decreasing y; only the last one (the
    # largest x) has the least y among them, so it decides
    i = bisect.bisect_right(S._rel_xs, beta[0])
    if i == 0:
        return True
    return S.rels[i - 1][1] > beta[1]


def staircases_from_dims(grid, dims, alpha, thickness=None):
    """Superlevel staircases of a dim function that is non-increasing along
    the order, constant on the cells of `grid`, and supported on <alpha>.

    dims maps grid points to counts.  Returns staircases S_1..S_T whose
    indicators sum to the dim function.
    """
    alpha = as_degree(alpha)
    pts = [p for p in grid.points() if deg_leq(alpha, p)]
    if thickness is None:
        thickness = max((dims.get(p, 0) for p in pts), default=0)
    out = []
    for j in range(1, thickness + 1):
        dead = [p for p in pts if dims.get(p, 0) < j]
        rels = _minimal_points(dead)
        out.append(Staircase(alpha, rels))
    return out


def _minimal_points(points):
    """Minimal elements of a set of degrees under componentwise order."""
    pts = sorted(set(points))
    mins = []
    for p in pts:
        if not any(deg_leq(m, p) for m in mins):
            mins.append(p)
    return mins


def superlevel_staircases(M):
    """Decompose dim coker M into staircases for a uniquely generated M.

    Valid because the dim of a uniquely generated module never grows along
    the order (every fiber is a quotient of the fiber at the generator
    degree), so each superlevel set is a staircase region.
    """
    degs = set(M.row_degrees)
    if len(degs) > 1:
        raise ValueError("module is not uniquely generated")
    if not degs:
        return []
    alpha = next(iter(degs))
    G = induced_grid(M)
    dims = {pt: grmat.pointwise_model(M, pt).dim for pt in G.points()}
    return staircases_from_dims(G, dims, alpha)


class HNFactor:
    """One HN factor: its Hilbert function as staircases, and its slope."""

    def __init__(self, staircases, slope):
        self.staircases = list(staircases)
        self.slope = Fraction(slope)

    @property
    def dim(self):
        return len(self.staircases)

    def key(self):
        return (-self.slope, tuple(sorted(s.key() for s in self.staircases)))

    def __eq__(self, other):
        return isinstance(other, HNFactor) and self.key() == other.key()

    def __repr__(self):
        return "HNFactor(slope=%s, %d staircases)" % (self.slope,
                                                      len(self.staircases))


class HNFactorList:
    """Ordered HN factors at one base degree alpha, slopes decreasing.

    Equality is canonical: factors with equal slope are compared as a
    multiset (their relative order carries no information).
    """

    def __init__(self, alpha, factors):
        self.alpha = as_degree(alpha)
        self.factors = list(factors)

    def canonical(self):
        return (self.alpha, tuple(sorted(f.key() for f in self.factors)))

    def __eq__(self, other):
        return (isinstance(other, HNFactorList)
                and self.canonical() == other.canonical())

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def __repr__(self):
        return "HNFactorList(alpha=%s, slopes=%s)" % (
            self.alpha, [f.slope for f in self.factors])


def merge_factors(lists):
    """Merge per-summand factor lists at a common alpha, sorted by strictly
    decreasing slope; equal-slope factors keep their input order."""
    lists = list(lists)
    if not lists:
        raise ValueError("nothing to merge")
    alpha = lists[0].alpha
    for l in lists:
        if l.alpha != alpha:
            raise ValueError("mismatched base degrees in merge")
    factors = [f for l in lists for f in l.factors]
    factors.sort(key=lambda f: f.slope, reverse=True)  # stable
    return HNFactorList(alpha, factors)


def slope_at(M, alpha):
    """Slope of the submodule generated by the full fiber at alpha:
    dim V_alpha / integral of dim <V_alpha>."""
    alpha = as_degree(alpha)
    pm = grmat.pointwise_model(M, alpha)
    if pm.dim == 0:
        raise ValueError("zero module at %s" % (alpha,))
    S = GradedMatrix(M.field, M.row_degrees, [alpha] * pm.dim,
                     [[(i, M.field.one)] for i in pm.basis_rows])
    N = grmat.submodule_presentation(M, S)
    return Fraction(pm.dim) / integral_of(N)


class SkyscraperStore:
    """Dictionary alpha -> HNFactorList with a provenance grid for snapping.

    Queries at non-key points snap by componentwise floor onto the grid of
    stored keys; misses return the empty entry.
    """

    def __init__(self, epsilon=None):
        self.epsilon = Fraction(epsilon) if epsilon is not None else None
        self.entries = {}

    def insert(self, factor_list):
        self.entries[factor_list.alpha] = factor_list

    def keys(self):
        return sorted(self.entries)

    def locate(self, alpha):
        alpha = as_degree(alpha)
        if alpha in self.entries:
            return self.entries[alpha]
        if self.epsilon is not None:
            e = self.epsilon
            key = ((alpha[0] // e) * e, (alpha[1] // e) * e)
        else:
            ks = self.keys()
            if not ks:
                return None
            g = Grid([k[0] for k in ks], [k[1] for k in ks])
            key = g.floor(alpha)
            if key[0] == NEG_INF or key[1] == NEG_INF:
                return None
        return self.entries.get(key)

    def __eq__(self, other):
        if not isinstance(other, SkyscraperStore):
            return NotImplemented
        return self.entries == other.entries

    def __len__(self):
        return len(self.entries)


def skyscraper_query(store, theta, alpha, beta):
    """s^theta(alpha, beta): over the located entry, count staircases
    containing beta among factors of slope >= theta."""
    alpha, beta = as_degree(alpha), as_degree(beta)
    if not deg_leq(alpha, beta):
        raise ValueError("query requires alpha <= beta")
    entry = store.locate(alpha)
    if entry is None:
        return 0
    total = 0
    for f in entry.factors:
        if f.slope >= theta:
            total += sum(1 for s in f.staircases if staircase_contains(s, beta))
    return total


def erosion_distance(r, s, theta, probe_grid):
    """Bracket the erosion distance between two stores at a fixed theta.

    Checks both one-sided conditions s(a-e, b+e) <= r(a, b) and
    r(a-e, b+e) <= s(a, b) at all probe pairs a <= b, over shifts e that are
    multiples of the probe spacing.  Returns (lower, upper); the resolution
    is the probe spacing.
    """
    xs, ys = probe_grid.xs, probe_grid.ys
    spacings = ([b - a for a, b in zip(xs, xs[1:])] +
                [b - a for a, b in zip(ys, ys[1:])])
    h = min(spacings) if spacings else Fraction(1)
    pts = list(probe_grid.points())
    pairs = [(a, b) for a in pts for b in pts if deg_leq(a, b)]

    def holds(e):
        for a, b in pairs:
            lo = (a[0] - e, a[1] - e)
            hi = (b[0] + e, b[1] + e)
            if skyscraper_query(s, theta, lo, hi) > skyscraper_query(r, theta, a, b):
                return False
            if skyscraper_query(r, theta, lo, hi) > skyscraper_query(s, theta, a, b):
                return False
        return True

    span = max(xs[-1] - xs[0], ys[-1] - ys[0]) if pts else Fraction(0)
    kmax = int(span / h) + 2
    lo_k, hi_k = 0, None
    if holds(Fraction(0)):
        return (Fraction(0), Fraction(0))
    # binary search the smallest multiple of h that works
    lo_k, hi_k = 0, kmax
    if not holds(kmax * h):
        return (kmax * h, POS_INF)
    while hi_k - lo_k > 1:
        mid = (lo_k + hi_k) // 2
        if holds(mid * h):
            hi_k = mid
        else:
            lo_k = mid
    return (lo_k * h, hi_k * h)
