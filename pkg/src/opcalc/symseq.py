"""Symmetric sequences of chain complexes and the composition product.

A level-n piece carries its Sigma_n action through the adjacent
transpositions (i, i+1), 0-indexed as generators 0..n-2.  The composition
product is computed on a canonical basis: a basis element of (X o Y)(s) is a
two-level tree (r; x-label; blocks) where the blocks partition {0..s-1} and
are listed in order of their minima.  Because the leaves are distinguishable
the symmetric groups act freely on the tree shapes, so no quotient is needed
at this stage; genuine coinvariants appear only when leaves are collapsed
(see coinvariants and the bar machinery).
"""

import itertools

from .chain import ChainComplex, ChainMap, koszul_sign, quotient_by_vectors
from .matrix import Matrix


# -- permutations -------------------------------------------------------------

def perm_compose(p, q):
    """(p o q)(i) = p[q[i]]."""
    return tuple(p[q[i]] for i in range(len(q)))

def perm_inverse(p):
    out = [0] * len(p)
    for i, v in enumerate(p):
        out[v] = i
    return tuple(out)


def adjacent_word(sigma):
    """Positions i with sigma = t_{i_k} o ... o t_{i_1} (t applied first = last
    entry).  Computed by bubble-sorting the one-line form."""
    seq = list(sigma)
    word = []
    changed = True
    while changed:
        changed = False
        for i in range(len(seq) - 1):
            if seq[i] > seq[i + 1]:
                seq[i], seq[i + 1] = seq[i + 1], seq[i]
                word.append(i)
                changed = True
    return word  # sigma = t[word[-1]] o ... o t[word[0]]


class SymRep:
    """Chain complex with a Sigma_n action via adjacent transpositions."""

    def __init__(self, n, complex, generators=None, check=True):
        self.n = n
        self.complex = complex
        if generators is None:
            generators = [complex.identity_map() for _ in range(max(0, n - 1))]
        assert len(generators) == max(0, n - 1)
        self.generators = generators
        self._perm_cache = {}
        self._monomial = None
        if check:
            self.validate()

    def validate(self):
        for g in self.generators:
            g.assert_chain_map()
            sq = g.compose(g)
            assert sq.comps == self.complex.identity_map().comps, \
                "transposition does not square to the identity"
        for i in range(len(self.generators) - 1):
            a, b = self.generators[i], self.generators[i + 1]
            ab = a.compose(b)
            braid = ab.compose(ab).compose(ab)
            assert braid.comps == self.complex.identity_map().comps, \
                "braid relation fails at %d" % i
        for i in range(len(self.generators)):
            for j in range(i + 2, len(self.generators)):
                a, b = self.generators[i], self.generators[j]
                assert a.compose(b).comps == b.compose(a).comps, \
                    "distant transpositions do not commute"

    def perm_map(self, sigma):
        sigma = tuple(sigma)
        assert len(sigma) == self.n
        m = self._perm_cache.get(sigma)
        if m is None:
            m = self.complex.identity_map()
            for i in adjacent_word(sigma):
                m = self.generators[i].compose(m)
            self._perm_cache[sigma] = m
        return m

    def is_monomial(self):
        """True when every generator matrix is a signed permutation."""
        if self._monomial is None:
            self._monomial = all(
                _signed_perm(g.component(d)) is not None
                for g in self.generators for d in self.complex.degrees())
        return self._monomial

    def gen_monomial(self, i):
        """Generator i as dict degree -> list idx -> (idx', sign)."""
        out = {}
        for d in self.complex.degrees():
            sp = _signed_perm(self.generators[i].component(d))
            assert sp is not None, "non-monomial generator"
            out[d] = sp
        return out


def _signed_perm(m):
    """If every column of m has exactly one entry +-1: list col->(row, sign);
    None otherwise."""
    if m.ncols == 0:
        return []
    cols = m.columns()
    out = []
    one = m.field.one
    mone = m.field.neg(one)
    for c in range(m.ncols):
        col = cols[c]
        if len(col) != 1:
            return None
        (r, v), = col.items()
        if v == one:
            out.append((r, 1))
        elif v == mone:
            out.append((r, -1))
        else:
            return None
    return out


def trivial_rep(n, complex):
    return SymRep(n, complex, check=False)


class SymSeq:
    """Arity-indexed chain complexes with Sigma actions, zero above the cap."""

    def __init__(self, field, levels, arity_cap, reduced=None):
        self.field = field
        self.levels = {n: r for n, r in levels.items()
                       if not r.complex.is_zero()}
        self.arity_cap = arity_cap
        for n, r in self.levels.items():
            assert n <= arity_cap and r.n == n
            assert r.complex.field == field
        if reduced is None:
            reduced = 0 not in self.levels
        if reduced:
            assert 0 not in self.levels, "reduced sequence has zero level 0"
        self.reduced = reduced

    def level(self, n):
        r = self.levels.get(n)
        if r is None:
            from .chain import zero_complex
            return SymRep(n, zero_complex(self.field),
                          [ChainMap(zero_complex(self.field),
                                    zero_complex(self.field), {}, check=False)
                           for _ in range(max(0, n - 1))], check=False)
        return r

    def dim(self, n, d):
        r = self.levels.get(n)
        return r.complex.dim(d) if r else 0

    def arities(self):
        return sorted(self.levels)

    def __repr__(self):
        return "SymSeq(levels=%s, cap=%s)" % (
            {n: dict(r.complex.dims) for n, r in sorted(self.levels.items())},
            self.arity_cap)


def unit_seq(field, arity_cap=None):
    """The monoidal unit: the base field at arity 1, degree 0."""
    from .chain import unit_complex
    return SymSeq(field, {1: trivial_rep(1, unit_complex(field, 0))},
                  arity_cap if arity_cap is not None else 10**9)


class SymSeqMap:
    """Levelwise chain map of symmetric sequences; equivariance is checked."""

    def __init__(self, source, target, comps, check=True):
        self.source = source
        self.target = target
        self.comps = {}
        for n, f in comps.items():
            if f.is_zero():
                continue
            self.comps[n] = f
        if check:
            self.validate()

    def level(self, n):
        f = self.comps.get(n)
        if f is None:
            from .chain import zero_map
            return zero_map(self.source.level(n).complex,
                            self.target.level(n).complex)
        return f

    def validate(self):
        for n, f in self.comps.items():
            f.assert_chain_map()
            src, tgt = self.source.level(n), self.target.level(n)
            for i in range(max(0, n - 1)):
                lhs = f.compose(src.generators[i])
                rhs = tgt.generators[i].compose(f)
                assert lhs.comps == rhs.comps, \
                    "map not equivariant at level %d, generator %d" % (n, i)


# -- coinvariants -------------------------------------------------------------

class Coinvariants:
    def __init__(self, complex, proj, section):
        self.complex = complex
        self.proj = proj
        self.section = section


def coinvariants(rep):
    """Quotient by the span of x - sigma.x over the transposition generators.

    Over Q this agrees with the image of the averaging idempotent (Maschke);
    over F_p with p <= n the functor is no longer exact, which is the
    documented caveat for prime fields.
    """
    C = rep.complex
    rels = {}
    for g in rep.generators:
        for d in C.degrees():
            m = g.component(d)
            for c in range(C.dim(d)):
                col = m.column(c)
                v = dict(col)
                v[c] = C.field.sub(v.get(c, C.field.zero), C.field.one)
                v = {k: x for k, x in v.items() if x != C.field.zero}
                if v:
                    rels.setdefault(d, []).append(v)
    q = quotient_by_vectors(C, rels, check_closed=False)
    return Coinvariants(q.complex, q.proj, q.section)


# -- set partitions ------------------------------------------------------------

def set_partitions(s):
    """Partitions of {0..s-1} as tuples of blocks (tuples), blocks ordered by
    minimum.  Restricted-growth-string enumeration: deterministic order."""
    if s == 0:
        yield ()
        return
    a = [0] * s
    while True:
        nblocks = max(a) + 1
        blocks = [[] for _ in range(nblocks)]
        for i, b in enumerate(a):
            blocks[b].append(i)
        yield tuple(tuple(b) for b in blocks)
        # next restricted growth string
        i = s - 1
        while i > 0:
            if a[i] <= max(a[:i]):
                break
            i -= 1
        if i == 0:
            return
        a[i] += 1
        for j in range(i + 1, s):
            a[j] = 0


def partitions_into(s, r):
    for p in set_partitions(s):
        if len(p) == r:
            yield p


# -- composition product ---------------------------------------------------------

class ComposeSummand:
    """One (r; block-size multiset) summand with basis-aligned incl/proj."""

    def __init__(self, r, sizes, incl, proj):
        self.r = r
        self.sizes = sizes
        self.incl = incl
        self.proj = proj


class ComposeWitness:
    def __init__(self):
        self.summands = {}   # level s -> list of ComposeSummand


class ComposeResult:
    def __init__(self, seq, witness, basis, index):
        self.seq = seq
        self.witness = witness
        self.basis = basis   # s -> degree -> list of elements
        self.index = index   # s -> element -> (degree, pos)


def _compose_elements(X, Y, s):
    """All basis elements of (X o Y)(s): (r, (dx, ix), ((block,(dy,iy)),...))."""
    out = []
    for part in set_partitions(s):
        r = len(part)
        xrep = X.levels.get(r)
        if xrep is None:
            continue
        yreps = [Y.levels.get(len(b)) for b in part]
        if any(t is None for t in yreps):
            continue
        xC = xrep.complex
        ydeg_ranges = [t.complex.degrees() for t in yreps]
        for dx in xC.degrees():
            for ix in range(xC.dim(dx)):
                for ydegs in itertools.product(*ydeg_ranges):
                    ranges = [range(t.complex.dim(dy))
                              for t, dy in zip(yreps, ydegs)]
                    for iys in itertools.product(*ranges):
                        children = tuple(
                            (part[j], (ydegs[j], iys[j])) for j in range(r))
                        out.append((r, (dx, ix), children))
    return out


def compose(X, Y, s_cap):
    """Composition product X o Y through level s_cap.

    Requires Y reduced and both arity caps at least s_cap (reducedness bounds
    every contributing arity by s <= s_cap)."""
    assert X.field == Y.field, "field mismatch"
    assert Y.reduced, "right factor of compose must be reduced"
    if X.arity_cap < s_cap or Y.arity_cap < s_cap:
        raise ValueError("arity caps insufficient for s_cap=%d" % s_cap)
    field = X.field
    basis = {}
    index = {}
    levels = {}
    witness = ComposeWitness()
    for s in range(0, s_cap + 1):
        elems = _compose_elements(X, Y, s)
        bydeg = {}
        for el in elems:
            r, (dx, ix), children = el
            d = dx + sum(dy for _, (dy, iy) in children)
            bydeg.setdefault(d, []).append(el)
        for d in bydeg:
            bydeg[d].sort()
        basis[s] = bydeg
        idx = {}
        for d in sorted(bydeg):
            for pos, el in enumerate(bydeg[d]):
                idx[el] = (d, pos)
        index[s] = idx
        dims = {d: len(v) for d, v in bydeg.items()}
        if not dims:
            continue
        # differential: slot order (x, y_1, ..., y_r)
        diffs = {}
        for d in sorted(dims):
            ent = []
            for pos, (r, (dx, ix), children) in enumerate(bydeg[d]):
                m = X.levels[r].complex.diffs.get(dx)
                if m is not None:
                    for rr, v in m.column(ix).items():
                        tel = (r, (dx - 1, rr), children)
                        td, tp = idx[tel]
                        ent.append((tp, pos, v))
                sgn = dx
                for j, (block, (dy, iy)) in enumerate(children):
                    ydif = Y.levels[len(block)].complex.diffs.get(dy)
                    if ydif is not None:
                        for rr, v in ydif.column(iy).items():
                            nch = children[:j] + ((block, (dy - 1, rr)),) + \
                                children[j + 1:]
                            tel = (r, (dx, ix), nch)
                            td, tp = idx[tel]
                            vv = v if sgn % 2 == 0 else field.neg(v)
                            ent.append((tp, pos, vv))
                    sgn += dy
            if ent:
                diffs[d] = Matrix.from_entries(field, dims.get(d - 1, 0),
                                               dims[d], ent)
        C = ChainComplex(field, dims, diffs, check=True)
        gens = [_compose_sigma_gen(X, Y, s, i, bydeg, idx, C)
                for i in range(max(0, s - 1))]
        levels[s] = SymRep(s, C, gens, check=True)
        # witness: summands grouped by (r, multiset of block sizes)
        groups = {}
        for d in sorted(bydeg):
            for pos, el in enumerate(bydeg[d]):
                r, _, children = el
                key = (r, tuple(sorted((len(b) for b, _ in children),
                                       reverse=True)))
                groups.setdefault(key, {}).setdefault(d, []).append(pos)
        slist = []
        for key in sorted(groups):
            r, sizes = key
            sub_dims = {d: len(ps) for d, ps in groups[key].items()}
            icomps, pcomps = {}, {}
            for d, ps in groups[key].items():
                icomps[d] = Matrix.from_entries(
                    field, dims[d], sub_dims[d],
                    [(p, i, field.one) for i, p in enumerate(ps)])
                pcomps[d] = Matrix.from_entries(
                    field, sub_dims[d], dims[d],
                    [(i, p, field.one) for i, p in enumerate(ps)])
            sub = ChainComplex(field, sub_dims, check=False)
            incl = ChainMap(sub, C, icomps, check=False)
            proj = ChainMap(C, sub, pcomps, check=False)
            slist.append(ComposeSummand(r, sizes, incl, proj))
        witness.summands[s] = slist
    seq = SymSeq(field, levels, s_cap, reduced=(0 not in levels))
    return ComposeResult(seq, witness, basis, index)


def _act_adjacent(X, Y, field, el, i):
    """Image of a basis element under the leaf transposition (i, i+1).

    A block containing both leaves keeps its set but its label transforms by
    the induced adjacent transposition in Y's representation; a block
    containing one of them swaps that leaf.  Children are then re-sorted by
    block minimum, which acts on the top label through X's representation
    with the Koszul sign of permuting the child slots.
    """
    r, (dx, ix), children = el
    child_terms = []
    for block, (dy, iy) in children:
        has_a = i in block
        has_b = (i + 1) in block
        if has_a and has_b:
            k = block.index(i)
            g = Y.levels[len(block)].generators[k].component(dy)
            terms = [((block, (dy, rr)), v) for rr, v in g.column(iy).items()]
        elif has_a or has_b:
            nb = tuple(sorted((i + 1 if t == i else i) if t in (i, i + 1)
                              else t for t in block))
            terms = [((nb, (dy, iy)), field.one)]
        else:
            terms = [((block, (dy, iy)), field.one)]
        child_terms.append(terms)
    out = {}
    for combo in itertools.product(*child_terms):
        coeff = field.one
        moved = []
        for (blk, ylab), v in combo:
            coeff = field.mul(coeff, v)
            moved.append((blk, ylab))
        order = sorted(range(r), key=lambda j: moved[j][0][0])
        sigma = [0] * r
        for newpos, j in enumerate(order):
            sigma[j] = newpos
        degs = [moved[j][1][0] for j in range(r)]
        sign = koszul_sign(degs, sigma)
        nch = tuple(moved[j] for j in order)
        xmat = X.levels[r].perm_map(tuple(sigma)).component(dx)
        for rr, v in xmat.column(ix).items():
            c2 = field.mul(coeff, v if sign == 1 else field.neg(v))
            el2 = (r, (dx, rr), nch)
            out[el2] = field.add(out.get(el2, field.zero), c2)
    return {k: v for k, v in out.items() if v != field.zero}


def _compose_sigma_gen(X, Y, s, i, bydeg, idx, C):
    field = X.field
    comps = {}
    for d in sorted(bydeg):
        ent = []
        for pos, el in enumerate(bydeg[d]):
            for el2, coeff in _act_adjacent(X, Y, field, el, i).items():
                td, tp = idx[el2]
                ent.append((tp, pos, coeff))
        comps[d] = Matrix.from_entries(field, C.dim(d), C.dim(d), ent)
    return ChainMap(C, C, comps, check=False)


def compose_map(f, g, s_cap):
    """Induced map X o Y -> X' o Y' by functoriality; f, g equivariant."""
    X, Y = f.source, g.source
    X2, Y2 = f.target, g.target
    field = X.field
    src = compose(X, Y, s_cap)
    tgt = compose(X2, Y2, s_cap)
    comps = {}
    for s in range(0, s_cap + 1):
        bydeg = src.basis.get(s, {})
        ent_bydeg = {}
        for d in sorted(bydeg):
            ent = []
            for pos, (r, (dx, ix), children) in enumerate(bydeg[d]):
                fx = f.level(r).component(dx).column(ix)
                terms = [(coeff, (dx, rr), ()) for rr, coeff in fx.items()]
                for block, (dy, iy) in children:
                    gy = g.level(len(block)).component(dy).column(iy)
                    new = []
                    for coeff, xl, ch in terms:
                        for rr, v in gy.items():
                            new.append((field.mul(coeff, v), xl,
                                        ch + ((block, (dy, rr)),)))
                    terms = new
                    if not terms:
                        break
                for coeff, xl, ch in terms:
                    el2 = (r, xl, ch)
                    td, tp = tgt.index[s][el2]
                    ent.append((tp, pos, coeff))
            ent_bydeg[d] = ent
        scomps = {}
        for d, ent in ent_bydeg.items():
            m = Matrix.from_entries(field,
                                    tgt.seq.dim(s, d),
                                    src.seq.dim(s, d), ent)
            scomps[d] = m
        if scomps:
            comps[s] = ChainMap(src.seq.level(s).complex,
                                tgt.seq.level(s).complex, scomps, check=True)
    return SymSeqMap(src.seq, tgt.seq, comps, check=True), src, tgt


# -- truncation ------------------------------------------------------------------

def level_truncate(X, i, m):
    """Levels k with i <= k < m retained (m may be math.inf)."""
    if not (1 <= i < m):
        raise ValueError("need 1 <= i < m, got (%s, %s)" % (i, m))
    levels = {n: r for n, r in X.levels.items() if i <= n < m}
    return SymSeq(X.field, levels, X.arity_cap, reduced=True)


def truncation_map(X, src_idx, tgt_idx):
    """Natural map X_i^m -> X_j^n for j <= i, n <= m (identity or zero
    levelwise)."""
    i, m = src_idx
    j, n = tgt_idx
    assert j <= i and n <= m, "no natural map in this direction"
    S = level_truncate(X, i, m)
    T = level_truncate(X, j, n)
    comps = {}
    for k, r in S.levels.items():
        if j <= k < n and k in T.levels:
            comps[k] = r.complex.identity_map()
    return SymSeqMap(S, T, comps, check=True)


def assoc_iso(X, Y, Z, s_cap):
    """Explicit comparison (X o Y) o Z -> X o (Y o Z), levelwise.

    Basis elements on both sides unravel to the same three-level trees; the
    middle and outer sort orders agree (block minima are nested), so the map
    is a signed basis bijection, the sign being the Koszul cost of
    regrouping the label slots.
    """
    field = X.field
    XY = compose(X, Y, s_cap)
    XYZ = compose(XY.seq, Z, s_cap)
    YZ = compose(Y, Z, s_cap)
    XYZ2 = compose(X, YZ.seq, s_cap)
    comps = {}
    for s in range(0, s_cap + 1):
        bydeg = XYZ.basis.get(s, {})
        scomps = {}
        for d in sorted(bydeg):
            ent = []
            for pos, (rp, (dxy, ixy), zchildren) in enumerate(bydeg[d]):
                # top label is a basis element of (X o Y)(rp)
                r, (dx, ix), ychildren = XY.basis[rp][dxy][ixy]
                # left slot order: x, y_1..y_r, z_1..z_rp
                # right slot order: x, y_1, z[B_1], y_2, z[B_2], ...
                ydegs = [dy for _, (dy, _) in ychildren]
                zdegs = [dz for _, (dz, _) in zchildren]
                # left slots: y_0..y_{r-1}, Z_0..Z_{rp-1}; right slots
                # interleave each y_j with the z-labels of its block
                perm = [0] * (r + rp)
                posn = 0
                for jj in range(r):
                    perm[jj] = posn
                    posn += 1
                    for t in ychildren[jj][0]:
                        perm[r + t] = posn
                        posn += 1
                sign = koszul_sign(ydegs + zdegs, perm)
                # build the right-hand element
                nch = []
                for jj in range(r):
                    blk = ychildren[jj][0]
                    dleaves = tuple(zchildren[t][0] for t in blk)
                    leafset = tuple(sorted(x for b in dleaves for x in b))
                    inner_children = tuple(
                        (_relabel_block(zchildren[t][0], leafset),
                         zchildren[t][1]) for t in blk)
                    inner_el = (len(blk), ychildren[jj][1], inner_children)
                    din = ychildren[jj][1][0] + \
                        sum(dz for _, (dz, _) in inner_children)
                    dpos = YZ.index[len(leafset)][inner_el]
                    nch.append((leafset, (din, dpos[1])))
                el2 = (r, (dx, ix), tuple(nch))
                td, tp = XYZ2.index[s][el2]
                ent.append((tp, pos, field.one if sign == 1
                            else field.neg(field.one)))
            scomps[d] = Matrix.from_entries(
                field, XYZ2.seq.dim(s, d), XYZ.seq.dim(s, d), ent)
        if scomps:
            comps[s] = ChainMap(XYZ.seq.level(s).complex,
                                XYZ2.seq.level(s).complex, scomps, check=True)
    return SymSeqMap(XYZ.seq, XYZ2.seq, comps, check=True), XYZ, XYZ2


def _relabel_block(block, leafset):
    pos = {x: i for i, x in enumerate(leafset)}
    return tuple(sorted(pos[x] for x in block))
