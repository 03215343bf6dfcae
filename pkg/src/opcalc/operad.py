"""Operads, bimodules, and algebras in chain complexes.

Structure maps are basis-level: gamma(k, x, blocks) takes the top label
x = (deg, idx) in O(k) and blocks = [(s_j, (deg_j, idx_j))] with consecutive
inputs, returning a sparse vector over the O(s) basis.  Non-consecutive
attachments are reduced to this form by the symmetric-group actions, which
is also how the equivariance axiom is stated and validated.
"""

import itertools

from .chain import ChainComplex, ChainMap, koszul_sign, unit_complex
from .matrix import Matrix
from .symseq import (
    SymRep, SymSeq, SymSeqMap, trivial_rep, unit_seq, compose, compose_map,
    assoc_iso, level_truncate, coinvariants, perm_inverse,
)
from .chain import tensor_many, quotient_by_vectors


def regular_rep(field, n):
    """k[Sigma_n] in degree 0: basis = one-line permutation words in
    lexicographic order; transpositions relabel letters."""
    perms = sorted(itertools.permutations(range(n)))
    pos = {p: i for i, p in enumerate(perms)}
    C = ChainComplex(field, {0: len(perms)})
    gens = []
    for i in range(n - 1):
        ent = []
        for j, p in enumerate(perms):
            q = tuple((i + 1 if v == i else (i if v == i + 1 else v))
                      for v in p)
            ent.append((pos[q], j, field.one))
        gens.append(ChainMap(C, C, {0: Matrix.from_entries(
            field, len(perms), len(perms), ent)}, check=False))
    return SymRep(n, C, gens, check=False), perms, pos


class Operad:
    def __init__(self, seq, gamma_fn, name="operad", unit_label=(0, 0)):
        assert seq.reduced, "operads here are reduced"
        self.seq = seq
        self.field = seq.field
        self._gamma = gamma_fn
        self.name = name
        self.unit_label = unit_label
        u = seq.levels.get(1)
        assert u is not None and u.complex.dim(unit_label[0]) > unit_label[1]

    def gamma(self, k, xlab, blocks):
        """gamma(x; y_1..y_k) with consecutive blocks, as {(deg,idx): coeff}."""
        assert len(blocks) == k
        return self._gamma(k, xlab, blocks)

    def level(self, n):
        return self.seq.level(n)

    def unital_exact(self):
        """True when O(1) is exactly the span of the unit in degree 0."""
        lvl = self.seq.levels.get(1)
        return lvl is not None and dict(lvl.complex.dims) == {0: 1} and \
            self.unit_label == (0, 0)

    def min_nonunit_degree(self):
        """Least degree of a basis element other than the unit (or None)."""
        best = None
        for n, r in self.seq.levels.items():
            for d in r.complex.degrees():
                cnt = r.complex.dim(d)
                if n == 1 and d == self.unit_label[0]:
                    cnt -= 1
                if cnt > 0:
                    best = d if best is None else min(best, d)
        return best

    def connective(self):
        return all(r.complex.d_min >= 0 for r in self.seq.levels.values())

    def __repr__(self):
        return "Operad(%s, cap=%d)" % (self.name, self.seq.arity_cap)


# -- builtins ------------------------------------------------------------------

def builtin(name, field, arity_cap, m=None):
    """unit, com, ass, com_truncated(m), ass_truncated(m)."""
    if name == "unit":
        seq = unit_seq(field, arity_cap)

        def gam(k, xlab, blocks):
            assert k == 1 and blocks[0][0] == 1
            return {(0, 0): field.one}
        return Operad(seq, gam, "unit")
    if name in ("com", "com_truncated"):
        top = arity_cap
        cut = m if name == "com_truncated" else None
        if cut is not None:
            assert cut >= 2, "truncation keeps at least the unit"
        levels = {n: trivial_rep(n, unit_complex(field, 0))
                  for n in range(1, top + 1) if cut is None or n < cut}
        seq = SymSeq(field, levels, arity_cap)

        def gam(k, xlab, blocks):
            s = sum(b[0] for b in blocks)
            if cut is not None and s >= cut:
                return {}
            if s > arity_cap:
                raise ValueError("gamma output arity %d beyond cap" % s)
            return {(0, 0): field.one}
        nm = "com" if cut is None else "com_truncated(%d)" % cut
        return Operad(seq, gam, nm)
    if name in ("ass", "ass_truncated"):
        cut = m if name == "ass_truncated" else None
        if cut is not None:
            assert cut >= 2
        levels = {}
        words = {}
        wpos = {}
        for n in range(1, arity_cap + 1):
            if cut is not None and n >= cut:
                continue
            rep, perms, pos = regular_rep(field, n)
            levels[n] = rep
            words[n] = perms
            wpos[n] = pos
        seq = SymSeq(field, levels, arity_cap)

        def gam(k, xlab, blocks):
            s = sum(b[0] for b in blocks)
            if cut is not None and s >= cut:
                return {}
            if s > arity_cap:
                raise ValueError("gamma output arity %d beyond cap" % s)
            w = words[k][xlab[1]]
            offs = [0]
            for sj, _ in blocks:
                offs.append(offs[-1] + sj)
            out = []
            for letter in w:
                sj, (dj, ij) = blocks[letter]
                assert dj == 0
                for v in words[sj][ij]:
                    out.append(offs[letter] + v)
            return {(0, wpos[s][tuple(out)]): field.one}
        nm = "ass" if cut is None else "ass_truncated(%d)" % cut
        return Operad(seq, gam, nm)
    raise ValueError("unknown builtin %r" % name)


# -- validation -----------------------------------------------------------------

def _block_perm(tau, sizes):
    """beta(tau; sizes): the permutation of sum(sizes) letters moving block j
    (consecutive) to the position of block j in the tau-arrangement."""
    k = len(sizes)
    offs = [0]
    for s in sizes:
        offs.append(offs[-1] + s)
    # in the tau-arrangement, position i holds block tau^{-1}(i)
    inv = perm_inverse(tau)
    noffs = {}
    acc = 0
    for i in range(k):
        noffs[inv[i]] = acc
        acc += sizes[inv[i]]
    out = [0] * offs[-1]
    for j in range(k):
        for t in range(sizes[j]):
            out[offs[j] + t] = noffs[j] + t
    return tuple(out)


def _compositions(s, parts):
    if parts == 1:
        yield (s,)
        return
    for first in range(1, s - parts + 2):
        for rest in _compositions(s - first, parts - 1):
            yield (first,) + rest


def _level_basis(O, n):
    rep = O.seq.levels.get(n)
    if rep is None:
        return []
    return [(d, i) for d in rep.complex.degrees()
            for i in range(rep.complex.dim(d))]


def validate_operad(O, cap):
    """List of violated axiom instances up to arity cap (empty = valid)."""
    bad = []
    fld = O.field
    unit = O.unit_label

    def vec_eq(a, b):
        a = {k: v for k, v in a.items() if v != fld.zero}
        b = {k: v for k, v in b.items() if v != fld.zero}
        return a == b

    # unit laws
    for s in range(1, cap + 1):
        for x in _level_basis(O, s):
            got = O.gamma(1, unit, [(s, x)])
            if not vec_eq(got, {x: fld.one}):
                bad.append(("left-unit", s, x))
            got = O.gamma(s, x, [(1, unit)] * s)
            if not vec_eq(got, {x: fld.one}):
                bad.append(("right-unit", s, x))
    # equivariance: gamma(rho(tau)x; tau.blocks) Koszul = rho(beta) gamma(x;blocks)
    for s in range(1, cap + 1):
        for k in range(1, s + 1):
            for sizes in _compositions(s, k):
                for i in range(k - 1):
                    tau = list(range(k))
                    tau[i], tau[i + 1] = tau[i + 1], tau[i]
                    tau = tuple(tau)
                    for x in _level_basis(O, k):
                        for labs in itertools.product(
                                *[_level_basis(O, sj) for sj in sizes]):
                            blocks = list(zip(sizes, labs))
                            rhs0 = O.gamma(k, x, blocks)
                            beta = _block_perm(tau, sizes)
                            rep = O.seq.levels.get(s)
                            rhs = {}
                            if rep is not None:
                                bm = rep.perm_map(beta)
                                for lab, c in rhs0.items():
                                    col = bm.component(lab[0]).column(lab[1])
                                    for rr, v in col.items():
                                        key = (lab[0], rr)
                                        rhs[key] = fld.add(
                                            rhs.get(key, fld.zero),
                                            fld.mul(c, v))
                            xrep = O.seq.levels[k]
                            xv = xrep.perm_map(tau).component(x[0]).column(x[1])
                            inv = perm_inverse(tau)
                            nblocks = [blocks[inv[t]] for t in range(k)]
                            degs = [b[1][0] for b in blocks]
                            kz = koszul_sign(degs, tau)
                            lhs = {}
                            for rr, v in xv.items():
                                res = O.gamma(k, (x[0], rr), nblocks)
                                for lab, c in res.items():
                                    vv = fld.mul(v, c)
                                    if kz < 0:
                                        vv = fld.neg(vv)
                                    lhs[lab] = fld.add(lhs.get(lab, fld.zero),
                                                       vv)
                            if not vec_eq(lhs, {k2: v for k2, v in rhs.items()}):
                                bad.append(("equivariance", s, k, sizes, tau,
                                            x, labs))
    # associativity on small nested compositions
    for s in range(1, cap + 1):
        for k in range(1, s + 1):
            for sizes in _compositions(s, k):
                for subsizes in itertools.product(
                        *[list(_compositions(sj, 1)) + (
                            list(_compositions(sj, 2)) if sj >= 2 else [])
                          for sj in sizes]):
                    for x in _level_basis(O, k):
                        for ylabs in itertools.product(
                                *[_level_basis(O, len(ss))
                                  for ss in subsizes]):
                            for zlabs in itertools.product(
                                    *[_level_basis(O, t)
                                      for ss in subsizes for t in ss]):
                                if not _assoc_ok(O, k, x, sizes, subsizes,
                                                 ylabs, zlabs):
                                    bad.append(("associativity", s, k, sizes,
                                                subsizes, x, ylabs, zlabs))
    return bad


def _assoc_ok(O, k, x, sizes, subsizes, ylabs, zlabs):
    fld = O.field
    zblocks = []
    t = 0
    for ss in subsizes:
        blk = []
        for sz in ss:
            blk.append((sz, zlabs[t]))
            t += 1
        zblocks.append(blk)
    # lhs: gamma(gamma(x; y), z-concat)
    inner = O.gamma(k, x, [(len(ss), yl) for ss, yl in zip(subsizes, ylabs)])
    lhs = {}
    flat = [b for blk in zblocks for b in blk]
    for lab, c in inner.items():
        for lab2, c2 in O.gamma(len(flat), lab, flat).items():
            lhs[lab2] = fld.add(lhs.get(lab2, fld.zero), fld.mul(c, c2))
    # rhs: gamma(x; gamma(y_j; z_j)) with the interchange Koszul sign
    sign = 1
    for a in range(len(subsizes)):
        za = sum(zl[1][0] for zl in zblocks[a])
        for b in range(a + 1, len(subsizes)):
            if (za * ylabs[b][0]) % 2:
                sign = -sign
    inners = []
    for ss, yl, blk in zip(subsizes, ylabs, zblocks):
        inners.append(O.gamma(len(ss), yl, blk))
    rhs = {}
    for combo in itertools.product(*[list(v.items()) for v in inners]):
        c = fld.one
        labs = []
        for lab, cv in combo:
            c = fld.mul(c, cv)
            labs.append(lab)
        newblocks = [(sum(ss), lab) for ss, lab in zip(subsizes, labs)]
        for lab2, c2 in O.gamma(len(subsizes), x, newblocks).items():
            vv = fld.mul(c, c2)
            if sign < 0:
                vv = fld.neg(vv)
            rhs[lab2] = fld.add(rhs.get(lab2, fld.zero), vv)
    lhs = {kk: v for kk, v in lhs.items() if v != fld.zero}
    rhs = {kk: v for kk, v in rhs.items() if v != fld.zero}
    return lhs == rhs


# -- bimodules -------------------------------------------------------------------

class Bimodule:
    """O-bimodule given by a symmetric sequence plus basis-level actions.

    rho(k, x, blocks): right action M(k) (x) O(s_1) (x) .. -> M(s),
    lam(o, labels):    left action  O(k) (x) M(r_1) (x) .. -> M(sum r),
    both with consecutive blocks.
    """

    def __init__(self, operad, seq, rho_fn, lam_fn, name="bimodule"):
        self.operad = operad
        self.field = seq.field
        self.seq = seq
        self._rho = rho_fn
        self._lam = lam_fn
        self.name = name

    @classmethod
    def truncation(cls, O, i, m):
        """O_i^m: levels i <= k < m of the operad, actions = gamma then cut."""
        seq = level_truncate(O.seq, i, m)
        keep = lambda s: i <= s < m

        def rho(k, x, blocks):
            s = sum(b[0] for b in blocks)
            if not keep(s):
                return {}
            return O.gamma(k, x, blocks)

        def lam(olab, labels):
            s = sum(r for r, _ in labels)
            if not keep(s):
                return {}
            if any(not keep(r) for r, _ in labels):
                return {}
            return O.gamma(len(labels), olab, labels)
        nm = "%s_%s^%s" % (O.name, i, m)
        return cls(O, seq, rho, lam, nm)

    def rho(self, k, x, blocks):
        return self._rho(k, x, blocks)

    def lam(self, olab, labels):
        return self._lam(olab, labels)

    def level(self, n):
        return self.seq.level(n)

    def monomial(self):
        return all(r.is_monomial() for r in self.seq.levels.values())

    def __repr__(self):
        return "Bimodule(%s)" % self.name


def operad_as_bimodule(O):
    import math
    return Bimodule.truncation(O, 1, math.inf)


def rho_map(M, s_cap):
    """The right action as a SymSeqMap compose(M.seq, O.seq) -> M.seq.

    Basis trees have arbitrary (min-sorted) blocks; the consecutive-block
    action is transported by the leaf relabeling that makes blocks
    consecutive, acting on the output through M's representation.
    """
    O = M.operad
    MO = compose(M.seq, O.seq, s_cap)
    comps = {}
    for s in range(0, s_cap + 1):
        bydeg = MO.basis.get(s, {})
        tgt = M.seq.level(s).complex
        scomps = {}
        for d in sorted(bydeg):
            ent = []
            for pos, (r, xl, children) in enumerate(bydeg[d]):
                blocks = [(len(b), ol) for b, ol in children]
                base = M.rho(r, xl, blocks)
                if not base:
                    continue
                sigma = _consecutive_to_actual(children)
                rep = M.seq.levels.get(s)
                for lab, c in base.items():
                    pm = rep.perm_map(sigma).component(lab[0])
                    for rr, v in pm.column(lab[1]).items():
                        ent.append((_pos_of(tgt, lab[0], rr), pos,
                                    M.field.mul(c, v)))
            scomps[d] = Matrix.from_entries(M.field, tgt.dim(d),
                                            len(bydeg[d]),
                                            [(r2, c2, v) for r2, c2, v in ent])
        if scomps:
            comps[s] = ChainMap(MO.seq.level(s).complex, tgt, scomps,
                                check=True)
    return SymSeqMap(MO.seq, M.seq, comps, check=True), MO


def lam_map(N, s_cap):
    """The left action as a SymSeqMap compose(O.seq, N.seq) -> N.seq."""
    O = N.operad
    ON = compose(O.seq, N.seq, s_cap)
    comps = {}
    for s in range(0, s_cap + 1):
        bydeg = ON.basis.get(s, {})
        tgt = N.seq.level(s).complex
        scomps = {}
        for d in sorted(bydeg):
            ent = []
            for pos, (k, ol, children) in enumerate(bydeg[d]):
                labels = [(len(b), nl) for b, nl in children]
                base = N.lam(ol, labels)
                if not base:
                    continue
                sigma = _consecutive_to_actual(children)
                rep = N.seq.levels.get(s)
                for lab, c in base.items():
                    pm = rep.perm_map(sigma).component(lab[0])
                    for rr, v in pm.column(lab[1]).items():
                        ent.append((_pos_of(tgt, lab[0], rr), pos,
                                    N.field.mul(c, v)))
            scomps[d] = Matrix.from_entries(N.field, tgt.dim(d),
                                            len(bydeg[d]),
                                            [(r2, c2, v) for r2, c2, v in ent])
        if scomps:
            comps[s] = ChainMap(ON.seq.level(s).complex, tgt, scomps,
                                check=True)
    return SymSeqMap(ON.seq, N.seq, comps, check=True), ON


def _pos_of(C, deg, idx):
    return idx


def _consecutive_to_actual(children):
    """Permutation sending consecutive block positions to actual leaf labels."""
    out = []
    for block, _ in children:
        out.extend(block)
    return tuple(out)


def validate_bimodule(M, cap):
    """Action axioms for a bimodule, via the equivariant SymSeqMap builders
    plus unit and associativity spot checks."""
    bad = []
    fld = M.field
    O = M.operad
    unit = O.unit_label
    for s in range(1, cap + 1):
        rep = M.seq.levels.get(s)
        if rep is None:
            continue
        for d in rep.complex.degrees():
            for i in range(rep.complex.dim(d)):
                got = M.rho(s, (d, i), [(1, unit)] * s)
                want = {(d, i): fld.one}
                if {k: v for k, v in got.items() if v != fld.zero} != want:
                    bad.append(("rho-unit", s, (d, i)))
                got = M.lam(unit, [(s, (d, i))])
                if {k: v for k, v in got.items() if v != fld.zero} != want:
                    bad.append(("lam-unit", s, (d, i)))
    return bad


# -- algebras --------------------------------------------------------------------

class Algebra:
    """O-algebra: a complex I with action maps xi: O(k) (x) I^{(x)k} -> I."""

    def __init__(self, operad, complex, xi_fn, name="algebra"):
        self.operad = operad
        self.field = complex.field
        self.complex = complex
        self._xi = xi_fn
        self.name = name

    def xi(self, k, olab, leaves):
        """leaves: tuple of (deg, idx); returns {(deg, idx): coeff}."""
        return self._xi(k, olab, tuple(leaves))

    def connectivity(self):
        """c with I concentrated in degrees >= c (d_min), or None if zero."""
        return None if self.complex.is_zero() else self.complex.d_min

    def __repr__(self):
        return "Algebra(%s, dims=%s)" % (
            self.name, {d: self.complex.dim(d)
                        for d in self.complex.degrees()})


def trivial_algebra(O, C, name=None):
    """Square-zero: unit acts by the identity, arities >= 2 act by zero."""
    assert O.unital_exact(), "trivial algebras need O(1) = unit"
    fld = C.field

    def xi(k, olab, leaves):
        if k == 1 and olab == O.unit_label:
            return {leaves[0]: fld.one}
        return {}
    return Algebra(O, C, xi, name or ("trivial(%s)" % O.name))


class FreeAlgebra(Algebra):
    """O o V with its canonical action.

    The underlying complex is the bar-degree-0 part of the bar machinery for
    the trivial word length: basis = canonical coinvariant classes of
    O(n) (x) V^{(x)n}, with the monomial fast path when O's representations
    are signed permutations."""

    def __init__(self, O, V, degree_cap, force_generic=False):
        assert not V.is_zero() and V.d_min >= 1, \
            "free algebras need generators in strictly positive degrees"
        from .bar import AlgebraBarBuilder
        fld = V.field
        self.generators = V
        self.degree_cap = degree_cap
        dummy = Algebra(O, V, lambda k, o, lv: None, "generators")
        self._builder = AlgebraBarBuilder(
            operad_as_bimodule(O), O, dummy, degree_cap, bar_cap=0,
            force_generic=force_generic)
        bc = self._builder.build(total_cap=degree_cap)
        self._bar = bc
        super().__init__(O, bc.total, self._free_xi, "free(%s)" % O.name)

    def _leaf_expand(self, lab):
        """Planar terms of a basis element: [(root-label, leaf-tuple, coeff)]."""
        d, idx = lab
        out = []
        if self._builder.monomial:
            p, t = self._bar.basis[d][idx]
            out.append(((t[1], t[2]), t[3], self.field.one))
        else:
            q = self._builder._quotients[0]
            sec = q.section[d].column(idx)
            rev = self._builder._planar_rev[0]
            for pos, v in sec.items():
                t = rev[(d, pos)]
                out.append(((t[1], t[2]), t[3], v))
        return out

    def _free_xi(self, k, olab, leaves):
        fld = self.field
        O = self.operad
        expansions = [self._leaf_expand(lv) for lv in leaves]
        acc = {}
        for combo in itertools.product(*expansions):
            coeff = fld.one
            roots = []
            words = []
            for rt, wd, v in combo:
                coeff = fld.mul(coeff, v)
                roots.append(rt)
                words.append(wd)
            # interchange: o_b passes the leaf words of earlier factors
            sign = 1
            for a in range(len(combo)):
                wa = sum(leaf[1] for leaf in words[a])
                for b in range(a + 1, len(combo)):
                    if (wa * roots[b][0]) % 2:
                        sign = -sign
            blocks = [(len(w), rt) for rt, w in zip(roots, words)]
            gam = O.gamma(k, olab, blocks)
            allw = tuple(x for w in words for x in w)
            for lab, c in gam.items():
                d_out = lab[0] + sum(leaf[1] for leaf in allw)
                if d_out > self.degree_cap:
                    continue
                tree = ("R", lab[0], lab[1], allw)
                cc = fld.mul(coeff, c)
                if sign < 0:
                    cc = fld.neg(cc)
                for key, v in self._builder.resolve_terms(
                        [(tree, cc)]).items():
                    acc[key] = fld.add(acc.get(key, fld.zero), v)
        return {kk: v for kk, v in acc.items() if v != fld.zero}

    def gen_inclusion(self):
        """ChainMap V -> underlying complex (word-length-one classes)."""
        V = self.generators
        fld = self.field
        ud, ui = self.operad.unit_label
        comps = {}
        for d in V.degrees():
            ent = []
            for i in range(V.dim(d)):
                tree = ("R", ud, ui, (("L", d, i),))
                for (dd, pos), v in self._builder.resolve_terms(
                        [(tree, fld.one)]).items():
                    assert dd == d + ud
                    ent.append((pos, i, v))
            comps[d] = Matrix.from_entries(fld, self.complex.dim(d),
                                           V.dim(d), ent)
        return ChainMap(V, self.complex, comps, check=True)


def free_algebra(O, V, degree_cap, force_generic=False):
    return FreeAlgebra(O, V, degree_cap, force_generic=force_generic)


def validate_algebra(A, arity_cap, degree_cap=None):
    """Unit and associativity axioms on basis tuples (bounded enumeration)."""
    bad = []
    fld = A.field
    O = A.operad
    I = A.complex
    cap = degree_cap if degree_cap is not None else I.d_max
    leaves = [(d, i) for d in I.degrees() for i in range(I.dim(d))
              if d <= cap]
    for lv in leaves:
        got = A.xi(1, O.unit_label, (lv,))
        if {k: v for k, v in got.items() if v != fld.zero} != {lv: fld.one}:
            bad.append(("unit", lv))
    # associativity: xi(gamma(o; o_1..o_k); x) = xi(o; xi(o_j; x_j)) + signs
    for k in range(1, arity_cap + 1):
        for sizes in _compositions_upto(arity_cap, k):
            s = sum(sizes)
            for olab in _level_basis(O, k):
                for olabs in itertools.product(
                        *[_level_basis(O, sj) for sj in sizes]):
                    for xs in itertools.product(leaves, repeat=s):
                        tot = sum(d for d, _ in xs) + olab[0] + \
                            sum(d for d, _ in olabs)
                        if tot > cap:
                            continue
                        if not _alg_assoc_ok(A, k, sizes, olab, olabs, xs):
                            bad.append(("associativity", k, sizes, olab,
                                        olabs, xs))
    return bad


def _compositions_upto(total, k):
    for s in range(k, total + 1):
        for c in _compositions(s, k):
            yield c


def _alg_assoc_ok(A, k, sizes, olab, olabs, xs):
    fld = A.field
    O = A.operad
    blocks = []
    t = 0
    for sj in sizes:
        blocks.append(xs[t:t + sj])
        t += sj
    lhs = {}
    for lab, c in O.gamma(k, olab, list(zip(sizes, olabs))).items():
        for lab2, c2 in A.xi(sum(sizes), lab, xs).items():
            lhs[lab2] = fld.add(lhs.get(lab2, fld.zero), fld.mul(c, c2))
    sign = 1
    for a in range(k):
        va = sum(d for d, _ in blocks[a])
        for b in range(a + 1, k):
            if (va * olabs[b][0]) % 2:
                sign = -sign
    inner = []
    for sj, ol, blk in zip(sizes, olabs, blocks):
        inner.append(A.xi(sj, ol, blk))
    rhs = {}
    for combo in itertools.product(*[list(v.items()) for v in inner]):
        c = fld.one
        labs = []
        for lab, cv in combo:
            c = fld.mul(c, cv)
            labs.append(lab)
        for lab2, c2 in A.xi(k, olab, tuple(labs)).items():
            vv = fld.mul(c, c2)
            if sign < 0:
                vv = fld.neg(vv)
            rhs[lab2] = fld.add(rhs.get(lab2, fld.zero), vv)
    lhs = {kk: v for kk, v in lhs.items() if v != fld.zero}
    rhs = {kk: v for kk, v in rhs.items() if v != fld.zero}
    return lhs == rhs


# -- relative composition ----------------------------------------------------------

class RelativeComposite:
    """M o_O N: levelwise cokernel of rho o 1 - 1 o lam, with actions."""

    def __init__(self, seq, proj_map, sections, mn, m_bimodule, n_bimodule):
        self.seq = seq
        self.proj = proj_map      # SymSeqMap M o N -> M o_O N
        self.sections = sections  # level -> dict degree -> Matrix
        self.mn = mn              # ComposeResult for M o N
        self.m = m_bimodule
        self.n = n_bimodule
        self.field = seq.field


def relative_compose(M, N, s_cap):
    """Coequalizer of M o O o N => M o N, levelwise with inherited actions.

    M is a Bimodule (right action used), N a Bimodule (left action used).
    """
    O = M.operad
    fld = M.field
    rho, MO = rho_map(M, s_cap)
    lamb, ON = lam_map(N, s_cap)
    idn = SymSeqMap(N.seq, N.seq, {n: N.seq.levels[n].complex.identity_map()
                                   for n in N.seq.levels}, check=False)
    idm = SymSeqMap(M.seq, M.seq, {n: M.seq.levels[n].complex.identity_map()
                                   for n in M.seq.levels}, check=False)
    f1, MON, MN1 = compose_map(rho, idn, s_cap)
    iso, MON_l, MON_r = assoc_iso(M.seq, O.seq, N.seq, s_cap)
    f2, MON2, MN2 = compose_map(idm, lamb, s_cap)
    levels = {}
    projs = {}
    sections = {}
    for s in range(0, s_cap + 1):
        C = MN1.seq.level(s).complex
        rels = {}
        src = MON.seq.level(s).complex
        m1 = f1.level(s)
        m2 = f2.level(s).compose(iso.level(s))
        dd = m1 - m2
        for d in src.degrees():
            m = dd.component(d)
            for c in range(src.dim(d)):
                v = m.column(c)
                if v:
                    rels.setdefault(d, []).append(v)
        q = quotient_by_vectors(C, rels)
        if q.complex.is_zero():
            continue
        gens = []
        rep = MN1.seq.level(s)
        for i in range(max(0, s - 1)):
            g = rep.generators[i]
            comps = {}
            for d in q.complex.degrees():
                comps[d] = (q.proj.component(d) * g.component(d)) * \
                    q.section[d]
            gens.append(ChainMap(q.complex, q.complex, comps, check=False))
        levels[s] = SymRep(s, q.complex, gens, check=True)
        projs[s] = q.proj
        sections[s] = q.section
    seq = SymSeq(fld, levels, s_cap, reduced=(0 not in levels))
    pm = {}
    for s, p in projs.items():
        pm[s] = ChainMap(MN1.seq.level(s).complex, seq.level(s).complex,
                         p.comps, check=False)
    proj_map = SymSeqMap(MN1.seq, seq, pm, check=True)
    return RelativeComposite(seq, proj_map, sections, MN1, M, N)
