"""End-to-end drivers: epsilon-approximation of the skyscraper invariant,
the exact per-cell subdivision store, the cache-friendly parallel grid scan,
filtered landscapes, and the interval-factor diagnostic.

All drivers first clip the module to a bounding box by appending cap
relations, so every integral is finite.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import reduce

from . import cheng, grmat, hn_core, invariants, subdivision
from .grmat import GradedMatrix, Grid, as_degree, deg_leq
from .invariants import (HNFactor, HNFactorList, SkyscraperStore,
                         merge_factors, staircase_contains)

__all__ = ["ScanConfig", "EngineFailure", "bounding_box", "clip_to_box",
           "regular_grid", "hn_at", "approx_skyscraper", "ExactStore",
           "exact_skyscraper", "parallel_grid_scan", "filtered_landscape",
           "factor_interval_check"]

ENGINES = ("brute", "cheng", "exact")


class ScanConfig:
    """Knobs shared by the drivers: grid spacing, engine, clipping box,
    seed, and landscape parameters."""

    def __init__(self, epsilon=1, engine="brute", seed=0, box=None, margin=1,
                 levels=(1,), thetas=(Fraction(0),), resolution=8,
                 anchor="center"):
        self.epsilon = Fraction(epsilon)
        if self.epsilon <= 0:
            raise ValueError("epsilon must be positive")
        if engine not in ENGINES:
            raise ValueError("unknown engine %r" % (engine,))
        self.engine = engine
        self.seed = seed
        self.box = tuple(Fraction(c) for c in box) if box else None
        self.margin = Fraction(margin)
        self.levels = tuple(int(k) for k in levels)
        self.thetas = tuple(Fraction(t) for t in thetas)
        self.resolution = int(resolution)
        if self.resolution < 2:
            raise ValueError("resolution must be at least 2")
        if anchor not in ("center", "source"):
            raise ValueError("anchor must be 'center' or 'source'")
        self.anchor = anchor


class EngineFailure(RuntimeError):
    """An HN engine failed at a specific base degree."""

    def __init__(self, alpha, cause):
        super().__init__("engine failure at %s: %s" % (alpha, cause))
        self.alpha = alpha
        self.cause = cause


def bounding_box(M, margin=1):
    """Axis-aligned box covering all presentation degrees plus a margin."""
    degs = list(M.row_degrees) + list(M.col_degrees)
    if not degs:
        z = Fraction(0)
        return (z, z, z, z)
    margin = Fraction(margin)
    return (min(d[0] for d in degs), min(d[1] for d in degs),
            max(d[0] for d in degs) + margin, max(d[1] for d in degs) + margin)


def clip_to_box(M, box):
    """Append cap relations killing every generator at the box's upper
    edges, making the cokernel bounded (supported inside the box)."""
    x0, y0, x1, y1 = (Fraction(c) for c in box)
    cols = [list(c) for c in M.columns]
    col_degs = list(M.col_degrees)
    one = M.field.one
    for i, (gx, gy) in enumerate(M.row_degrees):
        if not (x0 <= gx < x1 and y0 <= gy < y1):
            raise ValueError("generator %d at %s outside the box" % (i, (gx, gy)))
        col_degs.append((x1, gy))
        cols.append([(i, one)])
        col_degs.append((gx, y1))
        cols.append([(i, one)])
    return GradedMatrix(M.field, list(M.row_degrees), col_degs, cols)


def _fr_gcd(a, b):
    return Fraction(math.gcd(a.numerator * b.denominator,
                             b.numerator * a.denominator),
                    a.denominator * b.denominator)


def _progression(coords, lo, hi):
    vals = sorted(set(coords) | {lo, hi})
    diffs = [v - vals[0] for v in vals[1:]]
    h = reduce(_fr_gcd, diffs) if diffs else Fraction(1)
    n = int((hi - lo) / h)
    return [lo + k * h for k in range(n + 1)]


def regular_grid(M, extra_points, box):
    """Evenly spaced grid covering the box and containing every degree of M
    and every extra point; on such a grid discrete slopes are proportional
    to the exact area-weighted ones."""
    x0, y0, x1, y1 = box
    degs = list(M.row_degrees) + list(M.col_degrees) + \
        [as_degree(p) for p in extra_points]
    degs = [d for d in degs if x0 <= d[0] <= x1 and y0 <= d[1] <= y1]
    return Grid(_progression([d[0] for d in degs], x0, x1),
                _progression([d[1] for d in degs], y0, y1))


def _blocks(M):
    return [grmat.extract_block(M, rows, cols)
            for rows, cols in grmat.connected_components(M) if rows]


def _block_hn(block, alpha, engine, seed, cheng_grid=None, box=None):
    if engine == "cheng":
        if cheng_grid is None:
            cheng_grid = regular_grid(block, [alpha], box)
        try:
            return cheng.hn_cheng(block, cheng_grid, alpha, seed=seed)
        except cheng.ShrunkFailure as exc:
            raise EngineFailure(alpha, exc)
    return hn_core.hn_filtration_at(block, alpha)


def hn_at(M, alpha, engine="brute", seed=0, box=None, margin=1,
          cheng_grid=None):
    """HN filtration of <V_alpha> of the clipped module, computed per
    connected block and merged by slope."""
    alpha = as_degree(alpha)
    box = box or bounding_box(M, margin)
    Mc = clip_to_box(M, box)
    lists = []
    for block in _blocks(Mc):
        if grmat.pointwise_model(block, alpha).dim == 0:
            continue
        lists.append(_block_hn(block, alpha, engine, seed,
                               cheng_grid=cheng_grid, box=box))
    if not lists:
        return HNFactorList(alpha, [])
    return merge_factors(lists)


def _eps_points(box, epsilon):
    """epsilon-lattice points inside the half-open box, colexicographic."""
    x0, y0, x1, y1 = box
    kx0 = math.ceil(x0 / epsilon)
    ky0 = math.ceil(y0 / epsilon)
    xs = []
    k = kx0
    while k * epsilon < x1:
        xs.append(k * epsilon)
        k += 1
    ys = []
    k = ky0
    while k * epsilon < y1:
        ys.append(k * epsilon)
        k += 1
    return xs, ys


def approx_skyscraper(M, cfg):
    """Store of HN filtrations at every epsilon-lattice point of the
    support; an epsilon-approximation of the true invariant in erosion
    distance.  store.work counts engine runs per block."""
    box = cfg.box or bounding_box(M, cfg.margin)
    Mc = clip_to_box(M, box)
    blocks = _blocks(Mc)
    xs, ys = _eps_points(box, cfg.epsilon)
    store = SkyscraperStore(cfg.epsilon)
    store.work = [0] * len(blocks)
    grids = [None] * len(blocks)
    for y in ys:
        for x in xs:
            alpha = (x, y)
            lists = []
            for i, block in enumerate(blocks):
                if grmat.pointwise_model(block, alpha).dim == 0:
                    continue
                if cfg.engine == "cheng" and grids[i] is None:
                    lattice = [(xx, yy) for xx in xs for yy in ys]
                    grids[i] = regular_grid(block, lattice, box)
                lists.append(_block_hn(block, alpha, cfg.engine, cfg.seed,
                                       cheng_grid=grids[i], box=box))
                store.work[i] += 1
            if lists:
                store.insert(merge_factors(lists))
    return store


def _fiber_presentation(M, alpha):
    """Minimized presentation of the submodule generated by the fiber at
    alpha, or None when the fiber vanishes."""
    pm = grmat.pointwise_model(M, alpha)
    if pm.dim == 0:
        return None
    S = GradedMatrix(M.field, M.row_degrees, [alpha] * pm.dim,
                     [[(i, M.field.one)] for i in pm.basis_rows])
    return grmat.minimize(grmat.submodule_presentation(M, S))


def _cell_trees(summand, grid, corner):
    """Subdivision trees of the pieces of <V_corner> over the grid cell with
    the given lower corner, or None when the cell is empty or unbounded."""
    ax, ay = corner
    nx = next((x for x in grid.xs if x > ax), None)
    ny = next((y for y in grid.ys if y > ay), None)
    if nx is None or ny is None:
        return None
    sub = _fiber_presentation(summand, corner)
    if sub is None:
        return None
    trees = []
    for piece in _blocks(sub):
        trees.append(subdivision.exact_hnf_cell(piece, (ax, ay, nx, ny)))
    return trees


def _coalesce(alpha, lists):
    """Merge factor lists of the pieces of one summand: equal-slope factors
    combine into a single semistable factor in canonical superlevel form."""
    factors = [f for l in lists for f in l.factors]
    factors.sort(key=lambda f: f.slope, reverse=True)
    out = []
    for f in factors:
        if out and out[-1].slope == f.slope:
            stairs = subdivision._renormalize(
                out[-1].staircases + f.staircases, alpha)
            out[-1] = HNFactor(stairs, f.slope)
        else:
            out.append(f)
    return HNFactorList(alpha, out)


class ExactStore:
    """Per-summand, per-grid-cell subdivision trees; answers HN filtrations
    and skyscraper queries at arbitrary rational points of the box."""

    def __init__(self, box):
        self.box = box
        self.summands = []   # (module, grid, {corner: [SubdivTree]})

    def _add_summand(self, module):
        self.summands.append((module, grmat.induced_grid(module), {}))

    def _trees_at(self, idx, beta, cache=True):
        module, grid, cells = self.summands[idx]
        corner = grid.floor(beta)
        if corner[0] == invariants.NEG_INF or corner[1] == invariants.NEG_INF:
            return None
        if corner in cells:
            return cells[corner]
        trees = _cell_trees(module, grid, corner)
        if cache:
            cells[corner] = trees
        return trees

    def factors_at(self, beta):
        beta = as_degree(beta)
        lists = []
        for i in range(len(self.summands)):
            trees = self._trees_at(i, beta)
            if not trees:
                continue
            per_piece = [t.factors_at(beta) for t in trees]
            merged = _coalesce(beta, per_piece)
            if merged.factors:
                lists.append(merged)
        if not lists:
            return HNFactorList(beta, [])
        return merge_factors(lists)

    def query(self, theta, beta, gamma):
        """s^theta(beta, gamma): staircase memberships of gamma among HN
        factors at beta of slope >= theta."""
        beta, gamma = as_degree(beta), as_degree(gamma)
        if not deg_leq(beta, gamma):
            raise ValueError("query requires beta <= gamma")
        total = 0
        for f in self.factors_at(beta).factors:
            if f.slope >= theta:
                total += sum(1 for s in f.staircases
                             if staircase_contains(s, gamma))
        return total

    def snapshot(self, keys, epsilon=None):
        """SkyscraperStore of the exact filtrations at the given keys."""
        store = SkyscraperStore(epsilon)
        for alpha in keys:
            fl = self.factors_at(alpha)
            if fl.factors:
                store.insert(fl)
        return store


def exact_skyscraper(M, box=None, margin=1, eager=True):
    """Exact skyscraper store: the clipped module is split into summands
    and each induced-grid cell gets the subdivision trees of the fiber
    submodule at its lower corner."""
    box = box or bounding_box(M, margin)
    store = ExactStore(box)
    for block in _blocks(clip_to_box(M, box)):
        store._add_summand(block)
    if eager:
        for i, (module, grid, cells) in enumerate(store.summands):
            for corner in grid.points():
                if corner not in cells:
                    cells[corner] = _cell_trees(module, grid, corner)
    return store


def parallel_grid_scan(M, cfg):
    """Sweep the epsilon lattice colexicographically, reusing each
    summand's subdivision trees across lattice points of one grid row and
    evicting a summand's cache whenever its row pointer advances in y.
    Produces the same store as approx_skyscraper; store.work counts tree
    computations per summand (never more than the engine runs of approx)."""
    box = cfg.box or bounding_box(M, cfg.margin)
    store = ExactStore(box)
    for block in _blocks(clip_to_box(M, box)):
        store._add_summand(block)
    xs, ys = _eps_points(box, cfg.epsilon)
    out = SkyscraperStore(cfg.epsilon)
    out.work = [0] * len(store.summands)
    pointer_y = [None] * len(store.summands)
    for y in ys:
        for x in xs:
            alpha = (x, y)
            lists = []
            for i, (module, grid, cells) in enumerate(store.summands):
                corner = grid.floor(alpha)
                if (corner[0] == invariants.NEG_INF
                        or corner[1] == invariants.NEG_INF):
                    continue
                if pointer_y[i] != corner[1]:
                    cells.clear()          # y-advance evicts the cache
                    pointer_y[i] = corner[1]
                if corner not in cells:
                    cells[corner] = _cell_trees(module, grid, corner)
                    if cells[corner] is not None:
                        out.work[i] += 1
                trees = cells[corner]
                if not trees:
                    continue
                merged = _coalesce(alpha, [t.factors_at(alpha)
                                           for t in trees])
                if merged.factors:
                    lists.append(merged)
            if lists:
                out.insert(merge_factors(lists))
    return out


def _query_fn(store):
    if isinstance(store, ExactStore):
        return store.query
    return lambda theta, a, b: invariants.skyscraper_query(store, theta, a, b)


def filtered_landscape(store, k, theta, eval_points, resolution=8,
                       anchor="center", hmax=None):
    """lambda_k^theta at each evaluation point: the largest diagonal reach h
    with s^theta(alpha - h*1, alpha + h*1) >= k (anchor 'center'), or
    s^theta(alpha, alpha + h*1) >= k (anchor 'source'), found by bisection
    to resolution hmax / 2^resolution."""
    q = _query_fn(store)
    if hmax is None:
        if isinstance(store, ExactStore):
            x0, y0, x1, y1 = store.box
            hmax = max(x1 - x0, y1 - y0)
        else:
            ks = store.keys()
            if not ks:
                hmax = Fraction(1)
            else:
                hmax = max(max(b[0] for b in ks) - min(b[0] for b in ks),
                           max(b[1] for b in ks) - min(b[1] for b in ks))
                hmax += store.epsilon or Fraction(1)
    if hmax <= 0:
        hmax = Fraction(1)

    def level(alpha, h):
        if anchor == "center":
            lo = (alpha[0] - h, alpha[1] - h)
        else:
            lo = alpha
        hi = (alpha[0] + h, alpha[1] + h)
        return q(theta, lo, hi)

    out = {}
    for alpha in eval_points:
        alpha = as_degree(alpha)
        if level(alpha, Fraction(0)) < k:
            out[alpha] = Fraction(0)
            continue
        lo, hi = Fraction(0), Fraction(hmax)
        if level(alpha, hi) >= k:
            out[alpha] = hi
            continue
        for _ in range(resolution):
            mid = (lo + hi) / 2
            if level(alpha, mid) >= k:
                lo = mid
            else:
                hi = mid
        out[alpha] = lo
    return out


def factor_interval_check(store):
    """Flag factors whose superlevel decomposition has more than one
    staircase (thickness > 1); returns (alpha, factor_index, thickness)
    tuples.  Empty report: every semistable factor is an interval."""
    report = []
    for alpha in store.keys():
        for j, f in enumerate(store.entries[alpha].factors):
            if len(f.staircases) > 1:
                report.append((alpha, j, len(f.staircases)))
    return report
