"""Sparse exact linear algebra over Q and F_p.

Matrices are row-major sparse: ``rows[r]`` is a dict col -> nonzero scalar.
All elimination is exact; pivoting is deterministic (lexicographic by
default, optional sparsest-row tie-breaking for rank) so that every basis
this library produces is reproducible across runs.
"""

from .fields import QQ


class Matrix:
    __slots__ = ("field", "nrows", "ncols", "rows")

    def __init__(self, field, nrows, ncols, rows=None):
        self.field = field
        self.nrows = nrows
        self.ncols = ncols
        self.rows = rows if rows is not None else {}

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, field, nrows, ncols):
        return cls(field, nrows, ncols)

    @classmethod
    def identity(cls, field, n):
        one = field.one
        return cls(field, n, n, {i: {i: one} for i in range(n)})

    @classmethod
    def from_rows(cls, field, nrows, ncols, dense):
        """Build from an iterable of dense rows (lists of field-coercible)."""
        rows = {}
        for r, row in enumerate(dense):
            assert len(row) == ncols
            d = {}
            for c, v in enumerate(row):
                v = field(v)
                if v != field.zero:
                    d[c] = v
            if d:
                rows[r] = d
        return cls(field, nrows, ncols, rows)

    @classmethod
    def from_entries(cls, field, nrows, ncols, entries):
        """entries: iterable of (row, col, value)."""
        rows = {}
        z = field.zero
        for r, c, v in entries:
            assert 0 <= r < nrows and 0 <= c < ncols
            v = field(v)
            if v == z:
                continue
            d = rows.setdefault(r, {})
            w = d.get(c)
            if w is None:
                d[c] = v
            else:
                w = field.add(w, v)
                if w == z:
                    del d[c]
                else:
                    d[c] = w
        for r in [r for r, d in rows.items() if not d]:
            del rows[r]
        return cls(field, nrows, ncols, rows)

    @classmethod
    def from_columns(cls, field, nrows, cols):
        """cols: list of sparse column dicts row -> value."""
        m = cls(field, nrows, len(cols))
        for c, col in enumerate(cols):
            for r, v in col.items():
                if v != field.zero:
                    m.rows.setdefault(r, {})[c] = v
        return m

    # -- access ------------------------------------------------------------

    def __getitem__(self, rc):
        r, c = rc
        return self.rows.get(r, {}).get(c, self.field.zero)

    def entries(self):
        for r, d in self.rows.items():
            for c, v in d.items():
                yield r, c, v

    def column(self, c):
        out = {}
        for r, d in self.rows.items():
            v = d.get(c)
            if v is not None:
                out[r] = v
        return out

    def columns(self):
        cols = [dict() for _ in range(self.ncols)]
        for r, d in self.rows.items():
            for c, v in d.items():
                cols[c][r] = v
        return cols

    def nnz(self):
        return sum(len(d) for d in self.rows.values())

    def is_zero(self):
        return not self.rows

    def copy(self):
        return Matrix(self.field, self.nrows, self.ncols,
                      {r: dict(d) for r, d in self.rows.items()})

    def to_dense(self):
        z = self.field.zero
        out = [[z] * self.ncols for _ in range(self.nrows)]
        for r, c, v in self.entries():
            out[r][c] = v
        return out

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.field == other.field
                and self.nrows == other.nrows and self.ncols == other.ncols
                and self.rows == other.rows)

    def __repr__(self):
        return "Matrix(%r, %dx%d, nnz=%d)" % (
            self.field, self.nrows, self.ncols, self.nnz())

    # -- arithmetic ----------------------------------------------------------

    def __add__(self, other):
        assert (self.nrows, self.ncols) == (other.nrows, other.ncols)
        fld = self.field
        z = fld.zero
        rows = {r: dict(d) for r, d in self.rows.items()}
        for r, d in other.rows.items():
            t = rows.setdefault(r, {})
            for c, v in d.items():
                w = t.get(c)
                w = v if w is None else fld.add(w, v)
                if w == z:
                    t.pop(c, None)
                else:
                    t[c] = w
            if not t:
                del rows[r]
        return Matrix(fld, self.nrows, self.ncols, rows)

    def __neg__(self):
        fld = self.field
        return Matrix(fld, self.nrows, self.ncols,
                      {r: {c: fld.neg(v) for c, v in d.items()}
                       for r, d in self.rows.items()})

    def __sub__(self, other):
        return self + (-other)

    def scale(self, a):
        fld = self.field
        a = fld(a)
        if a == fld.zero:
            return Matrix.zero(fld, self.nrows, self.ncols)
        return Matrix(fld, self.nrows, self.ncols,
                      {r: {c: fld.mul(a, v) for c, v in d.items()}
                       for r, d in self.rows.items()})

    def __mul__(self, other):
        assert self.ncols == other.nrows, (self.ncols, other.nrows)
        fld = self.field
        z = fld.zero
        rows = {}
        orows = other.rows
        for r, d in self.rows.items():
            acc = {}
            for k, a in d.items():
                od = orows.get(k)
                if not od:
                    continue
                for c, b in od.items():
                    w = acc.get(c)
                    ab = fld.mul(a, b)
                    w = ab if w is None else fld.add(w, ab)
                    acc[c] = w
            acc = {c: v for c, v in acc.items() if v != z}
            if acc:
                rows[r] = acc
        return Matrix(fld, self.nrows, other.ncols, rows)

    def apply(self, vec):
        """Apply to a sparse column vector (dict index -> value)."""
        fld = self.field
        z = fld.zero
        out = {}
        for r, d in self.rows.items():
            acc = z
            if len(d) <= len(vec):
                for c, v in d.items():
                    a = vec.get(c)
                    if a is not None:
                        acc = fld.add(acc, fld.mul(v, a))
            else:
                for c, a in vec.items():
                    v = d.get(c)
                    if v is not None:
                        acc = fld.add(acc, fld.mul(v, a))
            if acc != z:
                out[r] = acc
        return out

    def transpose(self):
        rows = {}
        for r, d in self.rows.items():
            for c, v in d.items():
                rows.setdefault(c, {})[r] = v
        return Matrix(self.field, self.ncols, self.nrows, rows)

    def hstack(self, other):
        assert self.nrows == other.nrows and self.field == other.field
        rows = {r: dict(d) for r, d in self.rows.items()}
        off = self.ncols
        for r, d in other.rows.items():
            t = rows.setdefault(r, {})
            for c, v in d.items():
                t[c + off] = v
        return Matrix(self.field, self.nrows, self.ncols + other.ncols, rows)

    def vstack(self, other):
        assert self.ncols == other.ncols and self.field == other.field
        rows = {r: dict(d) for r, d in self.rows.items()}
        off = self.nrows
        for r, d in other.rows.items():
            rows[r + off] = dict(d)
        return Matrix(self.field, self.nrows + other.nrows, self.ncols, rows)


def _apply_matrix_fast(mat_cols, vec, fld):
    """mat as list of column dicts; vec sparse dict.  Returns sparse dict."""
    z = fld.zero
    out = {}
    for k, a in vec.items():
        col = mat_cols[k]
        for r, v in col.items():
            w = out.get(r)
            av = fld.mul(v, a)
            w = av if w is None else fld.add(w, av)
            out[r] = w
    return {r: v for r, v in out.items() if v != z}


class Echelon:
    """Row-echelon data from sparse Gaussian elimination.

    ``rows`` are reduced pivot rows (each normalized to pivot value 1),
    ``pivots`` maps pivot column -> index into rows, in elimination order.
    """

    def __init__(self, field, ncols, rows, pivots):
        self.field = field
        self.ncols = ncols
        self.rows = rows
        self.pivots = pivots

    @property
    def rank(self):
        return len(self.pivots)

    def reduce(self, vec):
        """Reduce a sparse vector modulo the row space; returns (residue,
        coeffs) with ``vec = residue + sum coeffs[i] * rows[i]``."""
        fld = self.field
        z = fld.zero
        vec = dict(vec)
        coeffs = {}
        # rows were fully reduced against each other, single pass suffices
        for c, i in self.pivots.items():
            a = vec.get(c)
            if a is None or a == z:
                continue
            coeffs[i] = a
            row = self.rows[i]
            for cc, v in row.items():
                w = vec.get(cc, z)
                w = fld.sub(w, fld.mul(a, v))
                if w == z:
                    vec.pop(cc, None)
                else:
                    vec[cc] = w
        return vec, coeffs


def echelonize(field, vectors, ncols, full=True):
    """Sparse Gauss-Jordan on an iterable of sparse row vectors.

    Deterministic: vectors are processed in the given order and each pivot is
    the lexicographically least column of the current vector.  With
    ``full=True`` rows are fully reduced against each other (RREF of the
    span), so ``Echelon.reduce`` needs only one pass.
    """
    fld = field
    z = fld.zero
    ech = Echelon(fld, ncols, [], {})
    for vec in vectors:
        res, _ = ech.reduce(vec)
        if not res:
            continue
        c0 = min(res)
        inv = fld.inv(res[c0])
        row = {c: fld.mul(inv, v) for c, v in res.items()}
        if full:
            # clear column c0 from all existing rows
            for i, r in enumerate(ech.rows):
                a = r.get(c0)
                if a is None:
                    continue
                for cc, v in row.items():
                    w = r.get(cc, z)
                    w = fld.sub(w, fld.mul(a, v))
                    if w == z:
                        r.pop(cc, None)
                    else:
                        r[cc] = w
        ech.pivots[c0] = len(ech.rows)
        ech.rows.append(row)
    return ech


def rank(A, strategy="lex"):
    """Rank of ``A`` by sparse fraction-exact elimination.

    strategy "lex": rows processed in index order (lexicographic pivots).
    strategy "sparse": rows processed sparsest-first with index tie-break;
    an independent pivoting order used to cross-check determinism of rank.
    """
    fld = A.field
    z = fld.zero
    work = [dict(d) for r, d in sorted(A.rows.items())]
    if strategy == "sparse":
        work.sort(key=len)
    elif strategy != "lex":
        raise ValueError("unknown strategy %r" % strategy)
    pivots = {}  # col -> row dict
    rk = 0
    for vec in work:
        while vec:
            c0 = min(vec)
            prow = pivots.get(c0)
            if prow is None:
                inv = fld.inv(vec[c0])
                pivots[c0] = {c: fld.mul(inv, v) for c, v in vec.items()}
                rk += 1
                break
            a = vec[c0]
            for cc, v in prow.items():
                w = vec.get(cc, z)
                w = fld.sub(w, fld.mul(a, v))
                if w == z:
                    vec.pop(cc, None)
                else:
                    vec[cc] = w
    return rk


def kernel_basis(A):
    """Matrix whose columns form a basis of ker(A); ncols = ncols(A) - rank(A).

    Computed from the RREF of the rows: free columns give the standard
    deterministic kernel basis.
    """
    fld = A.field
    ech = echelonize(fld, (dict(d) for _, d in sorted(A.rows.items())), A.ncols)
    pivcols = ech.pivots
    free = [c for c in range(A.ncols) if c not in pivcols]
    cols = []
    for fcol in free:
        col = {fcol: fld.one}
        for pc, i in pivcols.items():
            v = ech.rows[i].get(fcol)
            if v is not None:
                col[pc] = fld.neg(v)
        cols.append(col)
    return Matrix.from_columns(fld, A.ncols, cols)


def solve(A, b):
    """Some x with A x = b, or None if the system is inconsistent.

    ``b`` may be a sparse dict or a dense list of length nrows(A).
    Returns a sparse dict col -> value (free variables set to 0).
    """
    fld = A.field
    if not isinstance(b, dict):
        assert len(b) == A.nrows, "dimension mismatch"
        b = {i: fld(v) for i, v in enumerate(b) if fld(v) != fld.zero}
    AUG = A.ncols  # augmented column index
    vecs = []
    for r in range(A.nrows):
        d = dict(A.rows.get(r, {}))
        v = b.get(r)
        if v is not None and v != fld.zero:
            d[AUG] = v
        if d:
            vecs.append(d)
    ech = echelonize(fld, vecs, A.ncols + 1)
    if AUG in ech.pivots:
        return None
    x = {}
    for c, i in ech.pivots.items():
        v = ech.rows[i].get(AUG)
        if v is not None:
            x[c] = v
    return x


def solve_matrix(A, B):
    """Solve A X = B column by column; None if any column is inconsistent."""
    fld = A.field
    cols = []
    for c in range(B.ncols):
        x = solve(A, B.column(c))
        if x is None:
            return None
        cols.append(x)
    return Matrix.from_columns(fld, A.ncols, cols)
