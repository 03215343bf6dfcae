"""Bounded chain complexes over an exact field.

Conventions, fixed once for the whole library:
  * differentials lower degree by one; d(n): C_n -> C_{n-1};
  * d(x (x) y) = dx (x) y + (-1)^{|x|} x (x) dy;
  * swapping graded tensor factors costs (-1)^{|x||y|};
  * cone(f)_n = target_n (+) source_{n-1} with d(y,x) = (dy + f x, -dx);
  * shift(C,k) moves degree d to d+k and scales d by (-1)^k.

Every constructor checks its defining identity exactly (d*d = 0, chain maps
commute with d, homotopies satisfy dH + Hd = f - g).
"""

import itertools

from .matrix import Matrix, echelonize, kernel_basis, rank, solve


class ChainComplex:
    """Bounded complex: nonzero dims recorded per degree, sparse differentials."""

    def __init__(self, field, dims, diffs=None, labels=None, check=True):
        self.field = field
        self.dims = {d: n for d, n in dims.items() if n}
        self.diffs = {}
        self.labels = labels or {}
        diffs = diffs or {}
        for d, m in diffs.items():
            if m is None or m.is_zero():
                continue
            assert m.ncols == self.dim(d) and m.nrows == self.dim(d - 1), \
                ("differential shape mismatch at degree %d" % d)
            self.diffs[d] = m
        if check:
            for d in list(self.diffs):
                m2 = self.d(d + 1)
                if not m2.is_zero():
                    prod = self.diffs[d] * m2
                    assert prod.is_zero(), "d*d != 0 at degree %d" % (d + 1)

    def dim(self, d):
        return self.dims.get(d, 0)

    def d(self, n):
        m = self.diffs.get(n)
        if m is None:
            return Matrix.zero(self.field, self.dim(n - 1), self.dim(n))
        return m

    def degrees(self):
        return sorted(self.dims)

    @property
    def d_min(self):
        return min(self.dims) if self.dims else 0

    @property
    def d_max(self):
        return max(self.dims) if self.dims else 0

    def is_zero(self):
        return not self.dims

    def total_dim(self):
        return sum(self.dims.values())

    def __repr__(self):
        return "ChainComplex(%r, dims=%s)" % (
            self.field, {d: self.dims[d] for d in self.degrees()})

    def identity_map(self):
        comps = {d: Matrix.identity(self.field, n) for d, n in self.dims.items()}
        return ChainMap(self, self, comps, check=False)


def zero_complex(field):
    return ChainComplex(field, {})


def unit_complex(field, degree=0, label=None):
    labels = {degree: [label]} if label is not None else None
    return ChainComplex(field, {degree: 1}, labels=labels)


class ChainMap:
    def __init__(self, source, target, comps, check=True):
        assert source.field == target.field, "field mismatch"
        self.source = source
        self.target = target
        self.comps = {}
        for d, m in comps.items():
            if m is None or m.is_zero():
                continue
            assert m.ncols == source.dim(d) and m.nrows == target.dim(d), \
                "component shape mismatch at degree %d" % d
            self.comps[d] = m
        if check:
            self.assert_chain_map()

    def assert_chain_map(self):
        for d in set(self.source.dims) | set(self.comps):
            lhs = self.target.d(d) * self.component(d)
            rhs = self.component(d - 1) * self.source.d(d)
            assert lhs == rhs, "does not commute with d at degree %d" % d

    def component(self, d):
        m = self.comps.get(d)
        if m is None:
            return Matrix.zero(self.source.field, self.target.dim(d),
                               self.source.dim(d))
        return m

    def compose(self, other):
        """self o other (other applied first)."""
        assert other.target is self.source or \
            other.target.dims == self.source.dims
        comps = {}
        for d in set(other.comps) | set(self.comps):
            m = self.component(d) * other.component(d)
            if not m.is_zero():
                comps[d] = m
        return ChainMap(other.source, self.target, comps, check=False)

    def __add__(self, other):
        comps = {}
        for d in set(self.comps) | set(other.comps):
            comps[d] = self.component(d) + other.component(d)
        return ChainMap(self.source, self.target, comps, check=False)

    def __sub__(self, other):
        comps = {}
        for d in set(self.comps) | set(other.comps):
            comps[d] = self.component(d) - other.component(d)
        return ChainMap(self.source, self.target, comps, check=False)

    def __neg__(self):
        return ChainMap(self.source, self.target,
                        {d: -m for d, m in self.comps.items()}, check=False)

    def scale(self, a):
        return ChainMap(self.source, self.target,
                        {d: m.scale(a) for d, m in self.comps.items()},
                        check=False)

    def is_zero(self):
        return not self.comps

    def is_injective(self):
        return all(rank(self.component(d)) == n
                   for d, n in self.source.dims.items())

    def is_surjective(self):
        return all(rank(self.component(d)) == n
                   for d, n in self.target.dims.items())

    def is_iso(self):
        return (self.source.dims == self.target.dims and self.is_injective())

    def __repr__(self):
        return "ChainMap(degrees %s)" % sorted(self.comps)


def zero_map(source, target):
    return ChainMap(source, target, {}, check=False)


class ChainHomotopy:
    """H with dH + Hd = f - g, components H_d: source_d -> target_{d+1}."""

    def __init__(self, f, g, comps, check=True):
        assert f.source is g.source or f.source.dims == g.source.dims
        assert f.target is g.target or f.target.dims == g.target.dims
        self.f = f
        self.g = g
        self.source = f.source
        self.target = f.target
        self.comps = {d: m for d, m in comps.items()
                      if m is not None and not m.is_zero()}
        for d, m in self.comps.items():
            assert m.ncols == self.source.dim(d) and \
                m.nrows == self.target.dim(d + 1)
        if check:
            self.verify()

    def component(self, d):
        m = self.comps.get(d)
        if m is None:
            return Matrix.zero(self.source.field, self.target.dim(d + 1),
                               self.source.dim(d))
        return m

    def verify(self):
        for d in set(self.source.dims) | set(self.f.comps) | set(self.g.comps):
            lhs = self.target.d(d + 1) * self.component(d) + \
                self.component(d - 1) * self.source.d(d)
            rhs = self.f.component(d) - self.g.component(d)
            assert lhs == rhs, "dH + Hd != f - g at degree %d" % d


# -- sums, shifts, cones -----------------------------------------------------

def direct_sum(complexes):
    """Returns (sum, inclusions, projections)."""
    complexes = list(complexes)
    assert complexes
    field = complexes[0].field
    dims = {}
    offs = []  # per summand: dict d -> offset
    for C in complexes:
        off = {}
        for d, n in C.dims.items():
            off[d] = dims.get(d, 0)
            dims[d] = dims.get(d, 0) + n
        offs.append(off)
    diffs = {}
    for d in list(dims) + [max(dims) + 1] if dims else []:
        entries = []
        for C, off in zip(complexes, offs):
            m = C.diffs.get(d)
            if m is None:
                continue
            ro, co = off.get(d - 1, 0), off.get(d, 0)
            for r, c, v in m.entries():
                entries.append((r + ro, c + co, v))
        if entries:
            diffs[d] = Matrix.from_entries(field, dims.get(d - 1, 0),
                                           dims.get(d, 0), entries)
    S = ChainComplex(field, dims, diffs, check=False)
    incls, projs = [], []
    for C, off in zip(complexes, offs):
        icomps, pcomps = {}, {}
        for d, n in C.dims.items():
            o = off[d]
            icomps[d] = Matrix.from_entries(field, S.dim(d), n,
                                            [(o + i, i, field.one)
                                             for i in range(n)])
            pcomps[d] = Matrix.from_entries(field, n, S.dim(d),
                                            [(i, o + i, field.one)
                                             for i in range(n)])
        incls.append(ChainMap(C, S, icomps, check=False))
        projs.append(ChainMap(S, C, pcomps, check=False))
    return S, incls, projs


def truncate_above(C, top):
    """Drop all degrees above ``top`` (a quotient complex)."""
    dims = {d: n for d, n in C.dims.items() if d <= top}
    diffs = {d: m for d, m in C.diffs.items() if d <= top}
    labels = {d: v for d, v in C.labels.items() if d <= top}
    return ChainComplex(C.field, dims, diffs, labels=labels, check=False)


def shift(C, k):
    dims = {d + k: n for d, n in C.dims.items()}
    sign = C.field.one if k % 2 == 0 else C.field.neg(C.field.one)
    diffs = {d + k: (m if k % 2 == 0 else m.scale(sign))
             for d, m in C.diffs.items()}
    labels = {d + k: v for d, v in C.labels.items()}
    return ChainComplex(C.field, dims, diffs, labels=labels, check=False)


def cone(f):
    """Mapping cone; cone_n = target_n (+) source_{n-1}."""
    C, D = f.source, f.target
    field = C.field
    dims = {}
    for d, n in D.dims.items():
        dims[d] = dims.get(d, 0) + n
    for d, n in C.dims.items():
        dims[d + 1] = dims.get(d + 1, 0) + n
    diffs = {}
    degrees = set()
    for d in dims:
        degrees.add(d)
        degrees.add(d + 1)
    for n in degrees:
        # rows: D_{n-1} then C_{n-2}; cols: D_n then C_{n-1}
        entries = []
        for r, c, v in D.d(n).entries():
            entries.append((r, c, v))
        fm = f.component(n - 1)
        for r, c, v in fm.entries():
            entries.append((r, D.dim(n) + c, v))
        dc = C.d(n - 1)
        for r, c, v in dc.entries():
            entries.append((D.dim(n - 1) + r, D.dim(n) + c, field.neg(v)))
        if entries:
            diffs[n] = Matrix.from_entries(
                field, dims.get(n - 1, 0), dims.get(n, 0), entries)
    return ChainComplex(field, dims, diffs, check=False)


def homotopy_fiber(f):
    """(fiber, projection to source, connecting map shift(target,-1) -> fiber).

    fiber = shift(cone(f), -1); the nullhomotopy of f o projection is encoded
    by the connecting component (y, x) |-> y.
    """
    C, D = f.source, f.target
    F = shift(cone(f), -1)
    field = C.field
    proj = {}
    for d, n in C.dims.items():
        # F_d = D_{d+1} (+) C_d
        proj[d] = Matrix.from_entries(field, n, F.dim(d),
                                      [(i, D.dim(d + 1) + i, field.one)
                                       for i in range(n)])
    projection = ChainMap(F, C, proj, check=True)
    shD = shift(D, -1)
    dl = {}
    for d in shD.dims:
        n = shD.dim(d)  # = D_{d+1}
        dl[d] = Matrix.from_entries(field, F.dim(d), n,
                                    [(i, i, field.one) for i in range(n)])
    delta = ChainMap(shD, F, dl, check=True)
    return F, projection, delta


def fiber_nullhomotopy(f, F, projection):
    """The canonical H with dH + Hd = -(f o projection)."""
    C, D = f.source, f.target
    field = C.field
    comps = {}
    for d in F.dims:
        nD = D.dim(d + 1)
        if nD:
            comps[d] = Matrix.from_entries(field, nD, F.dim(d),
                                           [(i, i, field.one)
                                            for i in range(nD)])
    fp = f.compose(projection)
    return ChainHomotopy(zero_map(F, D), fp, comps)


# -- homology ---------------------------------------------------------------

def homology(C):
    """Betti numbers: degree -> dim ker d_d - rank d_{d+1} (nonzero only)."""
    out = {}
    for d in C.degrees():
        b = C.dim(d) - rank(C.d(d)) - rank(C.d(d + 1))
        if b:
            out[d] = b
    return out


class HomologyData:
    """Homology with chosen cycle representatives and a classifier."""

    def __init__(self, C):
        self.complex = C
        self.field = C.field
        self.reps = {}      # d -> list of sparse cycle vectors
        self._bech = {}     # d -> echelon of boundaries
        self._hech = {}     # d -> echelon of marked residues
        for d in C.degrees():
            n = C.dim(d)
            bd = echelonize(C.field, C.d(d + 1).columns(), n)
            self._bech[d] = bd
            K = kernel_basis(C.d(d))
            reps, marked = [], []
            for c in range(K.ncols):
                z = K.column(c)
                res, _ = bd.reduce(z)
                if res:
                    marked.append((z, res))
            hech = echelonize(C.field, [], n + len(marked))
            kept = []
            for z, res in marked:
                aug = dict(res)
                aug[n + len(kept)] = C.field.one
                red, _ = hech.reduce(aug)
                if any(c < n for c in red):
                    c0 = min(c for c in red if c < n)
                    inv = C.field.inv(red[c0])
                    row = {c: C.field.mul(inv, v) for c, v in red.items()}
                    hech.pivots[c0] = len(hech.rows)
                    hech.rows.append(row)
                    kept.append(z)
            self._hech[d] = hech
            if kept:
                self.reps[d] = kept

    def betti(self, d):
        return len(self.reps.get(d, []))

    def betti_table(self):
        return {d: len(v) for d, v in self.reps.items()}

    def classify(self, d, vec):
        """Coordinates of the class of a cycle in the chosen basis."""
        fld = self.field
        n = self.complex.dim(d)
        res, _ = self._bech[d].reduce(dict(vec))
        res, _ = self._hech[d].reduce(res)
        for c, v in res.items():
            assert c >= n, "vector is not a cycle mod boundaries at degree %d" % d
        k = len(self.reps.get(d, []))
        return {c - n: fld.neg(v) for c, v in res.items() if v != fld.zero}


def homology_map(f, hs=None, ht=None):
    """Induced map on homology: degree -> Matrix (H_d(source) -> H_d(target))."""
    hs = hs or HomologyData(f.source)
    ht = ht or HomologyData(f.target)
    fld = f.source.field
    out = {}
    for d, reps in hs.reps.items():
        cols = []
        for z in reps:
            img = f.component(d).apply(z)
            cols.append(ht.classify(d, img))
        m = Matrix.from_columns(fld, ht.betti(d), cols)
        out[d] = m
    return out


def is_quasi_iso(f, through=None):
    """True when cone(f) is acyclic (optionally only in degrees <= through,
    for complexes that are exact only below a validity bound)."""
    h = homology(cone(f))
    if through is None:
        return not h
    return all(d > through for d in h)


# -- nullhomotopy search ------------------------------------------------------

def find_null_homotopy(f):
    """H with dH + Hd = f, or None (certifying no chain nullhomotopy exists).

    One global sparse linear system over all degrees; greedy degreewise
    solving can fail on solvable systems, assembling globally cannot.
    """
    C, D = f.source, f.target
    fld = C.field
    var = {}      # (d, r, c) -> index

    def vid(d, r, c):
        key = (d, r, c)
        i = var.get(key)
        if i is None:
            i = len(var)
            var[key] = i
        return i

    rows = []
    rhs = {}
    degs = sorted(set(C.dims) | set(D.dims) | set(f.comps))
    eqn = 0
    for d in degs:
        nC, nD = C.dim(d), D.dim(d)
        if nC == 0 or nD == 0:
            assert f.component(d).is_zero()
            continue
        dD = D.d(d + 1)          # D_{d+1} -> D_d
        dC = C.d(d)              # C_d -> C_{d-1}
        fm = f.component(d)
        dDcols = dD.columns() if D.dim(d + 1) else []
        dCrows = dC.rows
        for r in range(nD):
            for c in range(nC):
                row = {}
                # sum_k dD[r,k] H_d[k,c]
                for k in range(D.dim(d + 1)):
                    v = dD[r, k]
                    if v != fld.zero:
                        row[vid(d, k, c)] = v
                # sum_k H_{d-1}[r,k] dC[k,c]
                for k in range(C.dim(d - 1)):
                    v = dC[k, c]
                    if v != fld.zero:
                        i = vid(d - 1, r, k)
                        row[i] = fld.add(row.get(i, fld.zero), v)
                row = {i: v for i, v in row.items() if v != fld.zero}
                b = fm[r, c]
                if row or b != fld.zero:
                    rows.append((eqn, row, b))
                eqn += 1
    nvars = len(var)
    A = Matrix(fld, eqn, nvars,
               {e: r for e, r, _ in rows if r})
    b = {e: v for e, _, v in rows if v != fld.zero}
    x = solve(A, b)
    if x is None:
        return None
    comps = {}
    for (d, r, c), i in var.items():
        v = x.get(i)
        if v is not None and v != fld.zero:
            comps.setdefault(d, []).append((r, c, v))
    hm = {d: Matrix.from_entries(fld, D.dim(d + 1), C.dim(d), ent)
          for d, ent in comps.items()}
    return ChainHomotopy(f, zero_map(C, D), hm)


def find_homotopy(f, g):
    h = find_null_homotopy(f - g)
    if h is None:
        return None
    return ChainHomotopy(f, g, h.comps)


# -- tensor products -----------------------------------------------------------

def koszul_sign(degrees, perm):
    """Sign of permuting graded factors; perm[i] = new position of factor i."""
    s = 1
    n = len(degrees)
    for i in range(n):
        for j in range(i + 1, n):
            if perm[i] > perm[j] and (degrees[i] * degrees[j]) % 2:
                s = -s
    return s


class TensorComplex:
    """Tensor product of chain complexes with basis bookkeeping.

    Basis of degree n: tuples (p_1..p_k, i_1..i_k) with sum p = n, ordered
    lexicographically by the degree composition then the index tuple.
    """

    def __init__(self, factors, check=True):
        assert factors
        field = factors[0].field
        for F in factors:
            assert F.field == field, "field mismatch"
        self.factors = factors
        self.field = field
        self.basis = {}    # n -> list of (degs, idxs)
        self.index = {}    # (degs, idxs) -> (n, position)
        degree_lists = [F.degrees() for F in factors]
        if all(degree_lists):
            for degs in itertools.product(*degree_lists):
                n = sum(degs)
                ranges = [range(F.dim(p)) for F, p in zip(factors, degs)]
                for idxs in itertools.product(*ranges):
                    self.basis.setdefault(n, []).append((degs, idxs))
        dims = {}
        for n in sorted(self.basis):
            self.basis[n].sort()
            for pos, key in enumerate(self.basis[n]):
                self.index[key] = (n, pos)
            dims[n] = len(self.basis[n])
        diffs = {}
        for n in sorted(dims):
            ent = []
            for pos, (degs, idxs) in enumerate(self.basis[n]):
                for t, F in enumerate(factors):
                    m = F.diffs.get(degs[t])
                    if m is None:
                        continue
                    col = m.column(idxs[t])
                    sgn = (-1) ** (sum(degs[:t]) % 2)
                    for r, v in col.items():
                        ndegs = degs[:t] + (degs[t] - 1,) + degs[t + 1:]
                        nidxs = idxs[:t] + (r,) + idxs[t + 1:]
                        tgt = self.index.get((ndegs, nidxs))
                        if tgt is None:
                            continue
                        vv = v if sgn == 1 else field.neg(v)
                        ent.append((tgt[1], pos, vv))
            if ent:
                diffs[n] = Matrix.from_entries(field, dims.get(n - 1, 0),
                                               dims[n], ent)
        self.complex = ChainComplex(field, dims, diffs, check=check)

    def permutation_map(self, perm, target=None):
        """Koszul-signed map permuting factors; factor i goes to slot perm[i].

        ``target`` defaults to self (valid when the permuted factor list is
        the same, e.g. tensor powers)."""
        k = len(self.factors)
        tgt = target or self
        fld = self.field
        ent = {}
        for n, keys in self.basis.items():
            rows = []
            for pos, (degs, idxs) in enumerate(keys):
                ndegs = [0] * k
                nidxs = [0] * k
                for i in range(k):
                    ndegs[perm[i]] = degs[i]
                    nidxs[perm[i]] = idxs[i]
                s = koszul_sign(degs, perm)
                tn, tpos = tgt.index[(tuple(ndegs), tuple(nidxs))]
                assert tn == n
                rows.append((tpos, pos, fld.one if s == 1 else
                             fld.neg(fld.one)))
            ent[n] = Matrix.from_entries(fld, tgt.complex.dim(n),
                                         len(keys), rows)
        return ChainMap(self.complex, tgt.complex, ent, check=False)

    def map_tensor(self, maps, target):
        """Tensor product of degree-0 chain maps into ``target`` TensorComplex."""
        fld = self.field
        comps = {}
        for n, keys in self.basis.items():
            ent = []
            for pos, (degs, idxs) in enumerate(keys):
                terms = [(fld.one, [])]
                for t, g in enumerate(maps):
                    col = g.component(degs[t]).column(idxs[t])
                    new = []
                    for coeff, picked in terms:
                        for r, v in col.items():
                            new.append((fld.mul(coeff, v), picked + [r]))
                    terms = new
                    if not terms:
                        break
                for coeff, picked in terms:
                    tkey = (degs, tuple(picked))
                    tn, tpos = target.index[tkey]
                    ent.append((tpos, pos, coeff))
            if ent:
                comps[n] = Matrix.from_entries(fld, target.complex.dim(n),
                                               len(keys), ent)
        return ChainMap(self.complex, target.complex, comps, check=False)


def tensor(C, D):
    """The chain complex C (x) D (basis bookkeeping discarded)."""
    assert C.field == D.field, "field mismatch"
    return TensorComplex([C, D]).complex


def tensor_many(factors):
    return TensorComplex(list(factors))


# -- subquotients ----------------------------------------------------------------

class Quotient:
    def __init__(self, quotient, proj, section):
        self.complex = quotient
        self.proj = proj          # ChainMap C -> Q
        self.section = section    # dict d -> Matrix Q_d -> C_d (linear section)


def quotient_by_vectors(C, relations, check_closed=True):
    """Quotient of C by the span of the given sparse vectors per degree.

    The span must be closed under d.  Returns a Quotient with deterministic
    basis (free coordinates of the RREF of the relation span).
    """
    fld = C.field
    echs = {}
    for d in set(relations) | set(C.dims):
        vecs = relations.get(d, [])
        echs[d] = echelonize(fld, vecs, C.dim(d))
    if check_closed:
        for d, vecs in relations.items():
            dd = C.d(d)
            for v in vecs:
                img = dd.apply(v)
                res, _ = echs.get(d - 1, echelonize(fld, [], 0)).reduce(img)
                assert not res, "relations not closed under d at degree %d" % d
    qdims = {}
    free = {}
    for d in C.degrees():
        ech = echs.get(d)
        piv = ech.pivots if ech else {}
        fr = [c for c in range(C.dim(d)) if c not in piv]
        free[d] = fr
        if fr:
            qdims[d] = len(fr)
    pcomps, scomps = {}, {}
    for d, fr in free.items():
        if not fr:
            continue
        pos = {c: i for i, c in enumerate(fr)}
        ent = [(pos[c], c, fld.one) for c in fr]
        ech = echs.get(d)
        if ech:
            for pc, i in ech.pivots.items():
                row = ech.rows[i]
                for cc, v in row.items():
                    if cc in pos:
                        ent.append((pos[cc], pc, fld.neg(v)))
        pcomps[d] = Matrix.from_entries(fld, len(fr), C.dim(d), ent)
        scomps[d] = Matrix.from_entries(fld, C.dim(d), len(fr),
                                        [(c, i, fld.one)
                                         for i, c in enumerate(fr)])
    qdiffs = {}
    for d in qdims:
        if d - 1 in qdims or True:
            m = pcomps.get(d - 1)
            if m is None:
                continue
            qd = m * (C.d(d) * scomps[d])
            if not qd.is_zero():
                qdiffs[d] = qd
    Q = ChainComplex(fld, qdims, qdiffs, check=True)
    proj = ChainMap(C, Q, pcomps, check=True)
    return Quotient(Q, proj, scomps)


def span_subcomplex(C, vectors):
    """Subcomplex spanned by d-closed vectors; returns (S, inclusion)."""
    fld = C.field
    echs = {}
    for d in sorted(set(vectors)):
        echs[d] = echelonize(fld, vectors.get(d, []), C.dim(d))
    dims = {d: len(e.rows) for d, e in echs.items() if e.rows}
    diffs = {}
    icomps = {}
    for d, e in echs.items():
        if not e.rows:
            continue
        icomps[d] = Matrix.from_columns(fld, C.dim(d), e.rows)
    for d in dims:
        ent = []
        e = echs[d]
        elow = echs.get(d - 1)
        dd = C.d(d)
        for j, row in enumerate(e.rows):
            img = dd.apply(row)
            if not img:
                continue
            assert elow is not None, "span not closed under d"
            res, coeffs = elow.reduce(img)
            assert not res, "span not closed under d at degree %d" % d
            for i, v in coeffs.items():
                ent.append((i, j, v))
        if ent:
            diffs[d] = Matrix.from_entries(fld, dims.get(d - 1, 0),
                                           dims[d], ent)
    S = ChainComplex(fld, dims, diffs, check=True)
    incl = ChainMap(S, C, icomps, check=True)
    return S, incl
