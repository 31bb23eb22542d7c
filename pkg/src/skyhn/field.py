"""Exact arithmetic over prime fields, extension fields, and dense matrices.

Prime field elements are plain ints in [0, q).  Extension field elements are
tuples of base-field ints of length g (coefficient vectors, constant term
first).  All matrix routines are dense Gaussian elimination; module-level
sparsity is handled upstream.
"""

from __future__ import annotations


def _is_prime(n):
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class PrimeField:
    """The field F_q for a prime q <= 2^16. Elements are ints in [0, q)."""

    def __init__(self, q):
        if not _is_prime(q):
            raise ValueError("field order must be prime, got %r" % (q,))
        if q > 1 << 16:
            raise ValueError("field order too large: %r" % (q,))
        self.q = q
        self.zero = 0
        self.one = 1

    def add(self, a, b):
        return (a + b) % self.q

    def sub(self, a, b):
        return (a - b) % self.q

    def neg(self, a):
        return (-a) % self.q

    def mul(self, a, b):
        return (a * b) % self.q

    def inv(self, a):
        if a % self.q == 0:
            raise ZeroDivisionError("inverse of zero in F_%d" % self.q)
        return pow(a, self.q - 2, self.q)

    def elements(self):
        return range(self.q)

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.q == self.q

    def __hash__(self):
        return hash(("PrimeField", self.q))

    def __repr__(self):
        return "PrimeField(%d)" % self.q


# ---------------------------------------------------------------------------
# polynomial helpers over a prime field (coefficient lists, constant first)

def _poly_trim(c):
    while c and c[-1] == 0:
        c.pop()
    return c

def _poly_mul(F, a, b):
    out = [0] * (len(a) + len(b) - 1) if a and b else []
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % F.q
    return _poly_trim(out)

def _poly_mod(F, a, m):
    # m monic
    a = list(a)
    dm = len(m) - 1
    while len(a) - 1 >= dm and a:
        lead = a[-1]
        if lead:
            shift = len(a) - 1 - dm
            for i, mi in enumerate(m):
                a[shift + i] = (a[shift + i] - lead * mi) % F.q
        a.pop()
    return _poly_trim(a)

def _poly_powmod(F, a, e, m):
    r = [1]
    b = _poly_mod(F, a, m)
    while e:
        if e & 1:
            r = _poly_mod(F, _poly_mul(F, r, b), m)
        b = _poly_mod(F, _poly_mul(F, b, b), m)
        e >>= 1
    return r

def _poly_sub(F, a, b):
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return _poly_trim([(x - y) % F.q for x, y in zip(a, b)])

def _poly_gcd(F, a, b):
    a, b = list(a), list(b)
    while b:
        # a mod b with b made monic on the fly
        lead_inv = F.inv(b[-1])
        bm = [(c * lead_inv) % F.q for c in b]
        a = _poly_mod(F, a, bm)
        a, b = b, a
    return a


def _irreducible(F, coeffs):
    """Check irreducibility of a monic polynomial (coefficient list, monic).

    Exhaustive trial division for degree <= 8, Rabin's test otherwise.
    """
    g = len(coeffs) - 1
    if g == 1:
        return True
    if coeffs[0] == 0:  # divisible by x
        return False
    if g <= 8:
        # trial divide by every monic polynomial of degree 1..g//2
        for d in range(1, g // 2 + 1):
            for code in range(F.q ** d):
                div = []
                c = code
                for _ in range(d):
                    div.append(c % F.q)
                    c //= F.q
                div.append(1)
                if not _poly_mod(F, coeffs, div):
                    return False
        return True
    # Rabin: x^(q^g) == x mod f, and gcd(x^(q^(g/p)) - x, f) = 1 for primes p|g
    q = F.q
    xq = _poly_powmod(F, [0, 1], q ** g, coeffs)
    if _poly_sub(F, xq, [0, 1]):
        return False
    primes = set()
    n = g
    d = 2
    while d * d <= n:
        while n % d == 0:
            primes.add(d)
            n //= d
        d += 1
    if n > 1:
        primes.add(n)
    for p in primes:
        h = _poly_powmod(F, [0, 1], q ** (g // p), coeffs)
        gc = _poly_gcd(F, coeffs, _poly_sub(F, h, [0, 1]))
        if len(gc) - 1 >= 1:
            return False
    return True


class FieldExt:
    """Extension field F_{q^g} = F_q[x]/(modulus).

    Elements are tuples of g ints (coefficients, constant term first).
    `companion` is the g x g matrix of multiplication by the class of x
    acting on coefficient columns: subdiagonal ones, last column the
    negated modulus tail.
    """

    def __init__(self, base, g, modulus):
        self.base = base
        self.g = g
        self.modulus = list(modulus)  # length g+1, monic
        q = base.q
        tail = self.modulus[:g]
        comp = [[0] * g for _ in range(g)]
        for j in range(g - 1):
            comp[j + 1][j] = 1
        for i in range(g):
            comp[i][g - 1] = (-tail[i]) % q
        self.companion = comp
        self.zero = (0,) * g
        self.one = tuple([1] + [0] * (g - 1))

    def add(self, a, b):
        q = self.base.q
        return tuple((x + y) % q for x, y in zip(a, b))

    def sub(self, a, b):
        q = self.base.q
        return tuple((x - y) % q for x, y in zip(a, b))

    def neg(self, a):
        q = self.base.q
        return tuple((-x) % q for x in a)

    def mul(self, a, b):
        prod = _poly_mul(self.base, list(a), list(b))
        red = _poly_mod(self.base, prod, self.modulus)
        return tuple(red + [0] * (self.g - len(red)))

    def inv(self, a):
        # extended Euclid in F_q[x] against the modulus
        F = self.base
        if all(c == 0 for c in a):
            raise ZeroDivisionError("inverse of zero in extension field")
        r0, r1 = list(self.modulus), _poly_trim(list(a))
        s0, s1 = [], [1]
        while r1:
            lead_inv = F.inv(r1[-1])
            # divide r0 by r1
            quo = [0] * (max(len(r0) - len(r1), 0) + 1)
            rem = list(r0)
            while len(rem) >= len(r1) and rem:
                c = (rem[-1] * lead_inv) % F.q
                sh = len(rem) - len(r1)
                quo[sh] = c
                for i, x in enumerate(r1):
                    rem[sh + i] = (rem[sh + i] - c * x) % F.q
                _poly_trim(rem)
            r0, r1 = r1, rem
            snew = [(x - y) % F.q for x, y in
                    zip(s0 + [0] * len(quo), _poly_mul(F, quo, s1) + [0] * len(s0))]
            s0, s1 = s1, _poly_trim(snew)
        # r0 = gcd (a nonzero constant since modulus irreducible)
        c_inv = F.inv(r0[0])
        res = _poly_mod(F, [(x * c_inv) % F.q for x in s0], self.modulus)
        return tuple(res + [0] * (self.g - len(res)))

    def from_base(self, a):
        return tuple([a % self.base.q] + [0] * (self.g - 1))

    def elements(self):
        q, g = self.base.q, self.g
        for code in range(q ** g):
            e = []
            c = code
            for _ in range(g):
                e.append(c % q)
                c //= q
            yield tuple(e)

    def __eq__(self, other):
        return (isinstance(other, FieldExt) and other.base == self.base
                and other.modulus == self.modulus)

    def __hash__(self):
        return hash(("FieldExt", self.base.q, tuple(self.modulus)))

    def __repr__(self):
        return "FieldExt(q=%d, g=%d)" % (self.base.q, self.g)


def ext_field_build(q, g):
    """Build F_{q^g} with the lexicographically least monic irreducible modulus.

    Candidate moduli x^g + a_{g-1} x^{g-1} + ... + a_0 are enumerated in
    increasing order of the integer code sum(a_i q^i); the first irreducible
    one wins, so the construction is deterministic.  g = 1 yields F_q wrapped
    trivially (modulus x + a for the least valid a: x itself, i.e. a = 0...
    x is irreducible of degree 1, giving F_q[x]/(x) = F_q).
    """
    base = PrimeField(q)
    for code in range(q ** g):
        coeffs = []
        c = code
        for _ in range(g):
            coeffs.append(c % q)
            c //= q
        coeffs.append(1)
        if _irreducible(base, coeffs):
            return FieldExt(base, g, coeffs)
    raise AssertionError("no irreducible polynomial found (unreachable)")


def embed_phi(x, ext):
    """Embed an extension-field element as a g x g base-field matrix.

    phi(x) = sum_j x_j * companion^j; a ring homomorphism L -> k^{g x g}.
    """
    g = ext.g
    base = ext.base
    acc = DenseMatrix.zero(g, g, base)
    pw = DenseMatrix.identity(g, base)
    comp = DenseMatrix(g, g, base, [row[:] for row in ext.companion])
    for j in range(g):
        xj = x[j]
        if xj:
            for i in range(g):
                for jj in range(g):
                    acc.data[i][jj] = (acc.data[i][jj] + xj * pw.data[i][jj]) % base.q
        if j < g - 1:
            pw = comp.matmul(pw)
    return acc


class DenseMatrix:
    """Dense matrix over a PrimeField or FieldExt, row-major list of lists."""

    def __init__(self, rows, cols, field, data=None):
        self.rows = rows
        self.cols = cols
        self.field = field
        if data is None:
            z = field.zero
            data = [[z] * cols for _ in range(rows)]
        self.data = data

    @classmethod
    def zero(cls, rows, cols, field):
        return cls(rows, cols, field)

    @classmethod
    def identity(cls, n, field):
        m = cls(n, n, field)
        for i in range(n):
            m.data[i][i] = field.one
        return m

    @classmethod
    def from_columns(cls, cols, nrows, field):
        m = cls(nrows, len(cols), field)
        for j, col in enumerate(cols):
            for i in range(nrows):
                m.data[i][j] = col[i]
        return m

    def column(self, j):
        return [self.data[i][j] for i in range(self.rows)]

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def matmul(self, other):
        assert self.cols == other.rows and self.field == other.field
        F = self.field
        out = DenseMatrix.zero(self.rows, other.cols, F)
        for i in range(self.rows):
            srow = self.data[i]
            orow = out.data[i]
            for k in range(self.cols):
                a = srow[k]
                if a == F.zero:
                    continue
                brow = other.data[k]
                for j in range(other.cols):
                    b = brow[j]
                    if b != F.zero:
                        orow[j] = F.add(orow[j], F.mul(a, b))
        return out

    def matvec(self, v):
        F = self.field
        out = [F.zero] * self.rows
        for i in range(self.rows):
            acc = F.zero
            row = self.data[i]
            for k, x in enumerate(v):
                if x != F.zero and row[k] != F.zero:
                    acc = F.add(acc, F.mul(row[k], x))
            out[i] = acc
        return out

    def __eq__(self, other):
        return (isinstance(other, DenseMatrix) and self.rows == other.rows
                and self.cols == other.cols and self.field == other.field
                and self.data == other.data)

    def __repr__(self):
        return "DenseMatrix(%d, %d, %r, %r)" % (
            self.rows, self.cols, self.field, self.data)


def reduce(M):
    """Column-reduce a dense matrix.

    Returns (rank, column_basis, kernel_basis): column_basis spans the column
    space, kernel_basis spans the right null space; rank + kernel columns =
    cols.  Standard Gaussian elimination with an identity tail tracking the
    column operations.
    """
    F = M.field
    z = F.zero
    ncols, nrows = M.cols, M.rows
    # work on column vectors augmented with the transformation
    cols = [M.column(j) for j in range(ncols)]
    trans = [[F.one if i == j else z for i in range(ncols)] for j in range(ncols)]
    pivots = {}  # pivot row (last nonzero row of a reduced column) -> column
    basis_cols = []
    kernel_cols = []
    for j in range(ncols):
        col = cols[j]
        tr = trans[j]
        # kill the last nonzero row while it collides with an earlier pivot;
        # the pivot row strictly decreases, so this terminates
        while True:
            piv = None
            for i in range(nrows - 1, -1, -1):
                if col[i] != z:
                    piv = i
                    break
            if piv is None or piv not in pivots:
                break
            pj = pivots[piv]
            pc, pt = cols[pj], trans[pj]
            c = F.mul(col[piv], F.inv(pc[piv]))
            for r in range(piv + 1):
                if pc[r] != z:
                    col[r] = F.sub(col[r], F.mul(c, pc[r]))
            for r in range(ncols):
                if pt[r] != z:
                    tr[r] = F.sub(tr[r], F.mul(c, pt[r]))
        if piv is None:
            kernel_cols.append(tr)
        else:
            pivots[piv] = j
            basis_cols.append(col)
    rank = len(basis_cols)
    column_basis = DenseMatrix.from_columns(basis_cols, nrows, F)
    kernel_basis = DenseMatrix.from_columns(kernel_cols, ncols, F)
    return rank, column_basis, kernel_basis


def kron(X, A):
    """Kronecker product: block (i,j) of the result is X[i][j] * A."""
    assert X.field == A.field
    F = X.field
    out = DenseMatrix.zero(X.rows * A.rows, X.cols * A.cols, F)
    for i in range(X.rows):
        for j in range(X.cols):
            x = X.data[i][j]
            if x == F.zero:
                continue
            for a in range(A.rows):
                orow = out.data[i * A.rows + a]
                arow = A.data[a]
                for b in range(A.cols):
                    if arow[b] != F.zero:
                        orow[j * A.cols + b] = F.add(
                            orow[j * A.cols + b], F.mul(x, arow[b]))
    return out
