"""The normalized bar construction B(M, O, I) and B(M, O, N).

Basis elements are labeled level trees: an M-labeled root, p layers of
O-labeled nodes, and either algebra labels at the leaves (algebra case) or
N-labeled bottom nodes owning disjoint sets of numbered leaves (module
case).  Simplicial degeneracies are quotiented away by keeping only trees in
which every layer contains a non-unit node; with O(1) = unit and a
1-connective algebra this normalization makes every total degree a finite
computation (each layer strictly increases width, each leaf carries degree).

Total differential on a bar-degree-p element: sum of (-1)^i d_i over the
faces plus (-1)^p times the internal differential, with slot order
root, layer 1 left-to-right, ..., layer p, bottom.

Coinvariants are handled in one of two ways: when all label representations
are monomial (signed permutations: com, ass, truncations), the basis is the
set of canonical labeled trees (children sorted, labels minimized over the
stabilizer, sign-inconsistent classes dropped); otherwise the full planar
span is materialized and the quotient is computed by elimination, which is
meant for the small structure-constant operads coming in through files.
"""

import itertools
import math

from .chain import ChainComplex, ChainMap, koszul_sign, quotient_by_vectors
from .matrix import Matrix
from .symseq import SymRep, SymSeq, SymSeqMap
from .operad import Bimodule

GENERIC_LIMIT = 20000


# -- trees ---------------------------------------------------------------------
# leaf   ("L", deg, idx)                      algebra label
# bottom ("B", deg, idx, leaves)              module label with its leaf set
# node   ("N", deg, idx, children)            O(len(children)) label
# root   ("R", deg, idx, children)            M(len(children)) label


def tree_degree(t, cache=None):
    if cache is not None:
        d = cache.get(t)
        if d is not None:
            return d
    kind = t[0]
    if kind == "L":
        out = t[1]
    elif kind == "B":
        out = t[1]
    else:
        out = t[1] + sum(tree_degree(c, cache) for c in t[3])
    if cache is not None:
        cache[t] = out
    return out


def tree_key(t, cache=None):
    if cache is not None:
        k = cache.get(t)
        if k is not None:
            return k
    kind = t[0]
    if kind == "L":
        out = (0, t[1], t[2])
    elif kind == "B":
        out = (0, t[1], t[2], t[3])
    else:
        out = (1, len(t[3]), t[1], t[2],
               tuple(tree_key(c, cache) for c in t[3]))
    if cache is not None:
        cache[t] = out
    return out


def min_leaf(t):
    if t[0] == "B":
        return t[3][0]
    return min(min_leaf(c) for c in t[3])


def bar_degree(t):
    """Number of O-layers below the root."""
    p = 0
    cur = t
    while cur[0] in ("R", "N"):
        p += 1
        cur = cur[3][0]
    return p - 1  # root does not count as a layer


def tree_levels(t):
    """Flat view: (root, layers, bottom); root/layer entries are
    (deg, idx, arity), bottom entries are the leaf/bottom label tuples."""
    assert t[0] == "R"
    root = (t[1], t[2], len(t[3]))
    layers = []
    bottom = []
    frontier = list(t[3])
    while frontier and frontier[0][0] == "N":
        layers.append([(c[1], c[2], len(c[3])) for c in frontier])
        frontier = [g for c in frontier for g in c[3]]
    for c in frontier:
        assert c[0] in ("L", "B")
        bottom.append(c)
    return root, layers, bottom


def tree_from_levels(root, layers, bottom):
    nodes = list(bottom)
    for layer in reversed(layers):
        new = []
        pos = 0
        for (d, i, k) in layer:
            new.append(("N", d, i, tuple(nodes[pos:pos + k])))
            pos += k
        assert pos == len(nodes)
        nodes = new
    d, i, k = root
    assert k == len(nodes)
    return ("R", d, i, tuple(nodes))


# -- label-space access -----------------------------------------------------------

class _Gens:
    """Monomial generator tables per (space, arity)."""

    def __init__(self):
        self.cache = {}

    def get(self, rep, arity, q):
        key = (id(rep), q)
        tab = self.cache.get(key)
        if tab is None:
            tab = rep.gen_monomial(q)
            self.cache[key] = tab
        return tab


class BarBuilder:
    """Shared machinery for algebra-case and module-case bar complexes."""

    def __init__(self, M, O, degree_cap, bar_cap=None):
        self.M = M
        self.O = O
        self.field = O.field
        self.degree_cap = degree_cap
        self.bar_cap = bar_cap
        self.unit = O.unit_label
        self._gens = _Gens()
        self._canon = {}
        self._key = {}
        self._deg = {}

    # ---- label spaces

    def space(self, t_kind, arity):
        if t_kind == "R":
            return self.M.seq.levels.get(arity)
        return self.O.seq.levels.get(arity)

    def is_unit_node(self, t):
        return (t[0] == "N" and len(t[3]) == 1 and
                (t[1], t[2]) == self.unit)

    def normalized(self, root, layers):
        for layer in layers:
            if all(k == 1 and (d, i) == self.unit for (d, i, k) in layer):
                return False
        return True

    # ---- canonicalization (monomial labels)

    def canon(self, t):
        """Canonical form of a planar tree: (tree, sign) or None for a
        sign-inconsistent (zero) class."""
        got = self._canon.get(t)
        if got is not None:
            return got if got != 0 else None
        out = self._canon_compute(t)
        self._canon[t] = out if out is not None else 0
        return out

    def _canon_compute(self, t):
        kind = t[0]
        if kind in ("L", "B"):
            return (t, 1)
        parts = []
        sign = 1
        for c in t[3]:
            pc = self.canon(c)
            if pc is None:
                return None
            parts.append(pc[0])
            sign *= pc[1]
        k = len(parts)
        rep = self.space(kind, k)
        label = (t[1], t[2])
        degs = [tree_degree(c, self._deg) for c in parts]
        keys = [tree_key(c, self._key) for c in parts]
        # insertion sort with tracked swaps
        items = list(zip(keys, degs, parts))
        for a in range(1, k):
            b = a
            while b > 0 and items[b - 1][0] > items[b][0]:
                if (items[b - 1][1] * items[b][1]) % 2:
                    sign = -sign
                tab = self._gens.get(rep, k, b - 1)[label[0]]
                i2, s2 = tab[label[1]]
                label = (label[0], i2)
                sign *= s2
                items[b - 1], items[b] = items[b], items[b - 1]
                b -= 1
        # stabilizer: adjacent equal children
        stab = [q for q in range(k - 1) if items[q][2] == items[q + 1][2]]
        if stab:
            res = self._orbit_min(rep, k, stab,
                                  [items[q][1] for q in range(k)], label)
            if res is None:
                return None
            label, s2 = res
            sign *= s2
        ch = tuple(it[2] for it in items)
        return ((kind, label[0], label[1], ch), sign)

    def _orbit_min(self, rep, k, stab_positions, child_degs, label):
        """Minimal label index in the stabilizer orbit with its relative
        sign; None when the orbit is sign-inconsistent."""
        deg = label[0]
        ops = []
        for q in stab_positions:
            tab = self._gens.get(rep, k, q)[deg]
            extra = -1 if child_degs[q] % 2 else 1
            ops.append((tab, extra))
        seen = {label[1]: 1}
        frontier = [label[1]]
        while frontier:
            nxt = []
            for i in frontier:
                s = seen[i]
                for tab, extra in ops:
                    i2, s2 = tab[i]
                    val = s * s2 * extra
                    old = seen.get(i2)
                    if old is None:
                        seen[i2] = val
                        nxt.append(i2)
                    elif old != val:
                        return None
            frontier = nxt
        best = min(seen)
        return (deg, best), seen[best]

    def orbit_min_labels(self, rep, k, stab_positions, child_degs):
        """All canonical (deg, idx) labels for a sorted children multiset."""
        out = []
        C = rep.complex
        for d in C.degrees():
            if not stab_positions:
                out.extend((d, i) for i in range(C.dim(d)))
                continue
            ops = []
            for q in stab_positions:
                tab = self._gens.get(rep, k, q)[d]
                extra = -1 if child_degs[q] % 2 else 1
                ops.append((tab, extra))
            remaining = set(range(C.dim(d)))
            while remaining:
                start = min(remaining)
                seen = {start: 1}
                frontier = [start]
                bad = False
                while frontier:
                    nxt = []
                    for i in frontier:
                        s = seen[i]
                        for tab, extra in ops:
                            i2, s2 = tab[i]
                            val = s * s2 * extra
                            old = seen.get(i2)
                            if old is None:
                                seen[i2] = val
                                nxt.append(i2)
                            elif old != val:
                                bad = True
                    frontier = nxt
                remaining -= set(seen)
                if not bad:
                    out.append((d, start))
        return out

    # ---- faces (planar level): shared by both cases

    def face_terms(self, t, bottom_action):
        """All (tree', coeff) of sum (-1)^i d_i plus (-1)^p d_int applied to
        the planar tree t.  ``bottom_action`` merges a layer node into the
        bottom labels (algebra action or module left action)."""
        fld = self.field
        root, layers, bottom = tree_levels(t)
        p = len(layers)
        out = []
        for tt, c in self.internal_terms(root, layers, bottom):
            cc = c if p % 2 == 0 else fld.neg(c)
            out.append((tt, cc))
        out.extend(self.simplicial_terms(t, bottom_action))
        return out

    def simplicial_terms(self, t, bottom_action):
        """sum over i of (-1)^i d_i alone."""
        fld = self.field
        root, layers, bottom = tree_levels(t)
        p = len(layers)
        out = []
        if p >= 1:
            out.extend(self.face0_terms(root, layers, bottom))
        for i in range(1, p):
            for tt, c in self.middle_face_terms(root, layers, bottom, i):
                out.append((tt, c if i % 2 == 0 else fld.neg(c)))
        if p >= 1:
            for tt, c in self.bottom_face_terms(root, layers, bottom,
                                                bottom_action):
                out.append((tt, c if p % 2 == 0 else fld.neg(c)))
        return out

    def internal_terms(self, root, layers, bottom, skip_root=False):
        fld = self.field
        out = []
        prefix = 0
        rd, ri, rk = root
        if not skip_root:
            rep = self.space("R", rk)
            m = rep.complex.diffs.get(rd) if rep else None
            if m is not None:
                for rr, v in m.column(ri).items():
                    out.append((tree_from_levels((rd - 1, rr, rk), layers,
                                                 bottom), v))
        prefix += rd
        for li, layer in enumerate(layers):
            for ni, (d, i, k) in enumerate(layer):
                rep = self.space("N", k)
                m = rep.complex.diffs.get(d) if rep else None
                if m is not None:
                    for rr, v in m.column(i).items():
                        nl = [list(x) for x in layers]
                        nl[li][ni] = (d - 1, rr, k)
                        vv = v if prefix % 2 == 0 else fld.neg(v)
                        out.append((tree_from_levels(
                            root, [tuple(x) for x in nl], bottom), vv))
                prefix += d
        for bi, lab in enumerate(bottom):
            for lab2, v in self.bottom_diff(lab):
                nb = list(bottom)
                nb[bi] = lab2
                vv = v if prefix % 2 == 0 else fld.neg(v)
                out.append((tree_from_levels(root, layers, nb), vv))
            prefix += lab[1]
        return out

    def face0_terms(self, root, layers, bottom):
        """d_0: absorb layer 1 into the root via the right action of O on M."""
        fld = self.field
        rd, ri, rk = root
        blocks = [((d, i), k) for (d, i, k) in layers[0]]
        res = self.M.rho(rk, (rd, ri), [(k, lab) for lab, k in blocks])
        out = []
        newk = sum(k for _, k in blocks)
        for (d2, i2), v in res.items():
            out.append((tree_from_levels((d2, i2, newk), layers[1:], bottom),
                        v))
        return out

    def middle_face_terms(self, root, layers, bottom, i):
        """d_i, 1 <= i <= p-1: operad composition of layers i and i+1."""
        fld = self.field
        upper = layers[i - 1]
        lower = layers[i]
        # interchange sign: sum over t < u of |Y_t| |x_u|
        pos = 0
        ydegs = []
        for (d, idx, k) in upper:
            ydegs.append(sum(lower[pos + j][0] for j in range(k)))
            pos += k
        sign = 1
        for a in range(len(upper)):
            for b in range(a + 1, len(upper)):
                if (ydegs[a] * upper[b][0]) % 2:
                    sign = -sign
        # per-node gamma
        pos = 0
        factors = []
        for (d, idx, k) in upper:
            blocks = [( lower[pos + j][2], (lower[pos + j][0],
                                            lower[pos + j][1]))
                      for j in range(k)]
            res = self.O.gamma(k, (d, idx), blocks)
            newk = sum(b[0] for b in blocks)
            factors.append([(lab, newk, v) for lab, v in res.items()])
            pos += k
        out = []
        for combo in itertools.product(*factors):
            coeff = self.field.one if sign == 1 else \
                self.field.neg(self.field.one)
            merged = []
            for (lab, newk, v) in combo:
                coeff = self.field.mul(coeff, v)
                merged.append((lab[0], lab[1], newk))
            nl = layers[:i - 1] + [tuple(merged)] + layers[i + 1:]
            out.append((tree_from_levels(root, nl, bottom), coeff))
        return out

    def bottom_face_terms(self, root, layers, bottom, bottom_action):
        """d_p: the last layer acts on the bottom labels."""
        lower = bottom
        upper = layers[-1]
        pos = 0
        ydegs = []
        for (d, idx, k) in upper:
            ydegs.append(sum(lower[pos + j][1] for j in range(k)))
            pos += k
        sign = 1
        for a in range(len(upper)):
            for b in range(a + 1, len(upper)):
                if (ydegs[a] * upper[b][0]) % 2:
                    sign = -sign
        pos = 0
        factors = []
        for (d, idx, k) in upper:
            labs = lower[pos:pos + k]
            factors.append(bottom_action((d, idx), k, labs))
            pos += k
        out = []
        for combo in itertools.product(*factors):
            coeff = self.field.one if sign == 1 else \
                self.field.neg(self.field.one)
            nb = []
            for (labs2, v) in combo:
                coeff = self.field.mul(coeff, v)
                nb.extend(labs2)
            out.append((tree_from_levels(root, layers[:-1], nb), coeff))
        return out

    def bottom_diff(self, lab):
        raise NotImplementedError


# -- algebra case -------------------------------------------------------------------

class BarComplex:
    """Totalized normalized bar construction of an algebra."""

    def __init__(self, total, basis, index, bar_grading, mode, valid_through,
                 builder):
        self.total = total
        self.basis = basis          # degree -> list of basis descriptors
        self.index = index
        self.bar_grading = bar_grading  # degree -> list of simplicial degrees
        self.mode = mode
        self.valid_through = valid_through
        self.builder = builder

    def betti(self):
        from .chain import homology
        h = homology(self.total)
        return {d: n for d, n in h.items() if d <= self.valid_through}


class AlgebraBarBuilder(BarBuilder):
    def __init__(self, M, O, I, degree_cap, bar_cap=None, force_generic=False):
        super().__init__(M, O, degree_cap, bar_cap)
        self.I = I
        self.monomial = (not force_generic) and M.monomial() and \
            all(r.is_monomial() for r in O.seq.levels.values())
        exact_ok = O.unital_exact() and (I.complex.is_zero() or
                                         I.complex.d_min >= 1)
        if bar_cap is None and not exact_ok:
            raise ValueError(
                "exact mode needs O(1) = unit and a 1-connective algebra; "
                "pass a bar_cap for the truncated mode")
        if not (I.complex.is_zero() or I.complex.d_min >= 1):
            raise ValueError("algebras must live in degrees >= 1")
        self.exact = bar_cap is None
        self._branches = {}

    # ---- bottoms

    def bottom_diff(self, lab):
        kind, d, i = lab
        m = self.I.complex.diffs.get(d)
        if m is None:
            return []
        return [(("L", d - 1, rr), v) for rr, v in m.column(i).items()]

    def bottom_action(self, olab, k, labs):
        res = self.I.xi(k, olab, tuple((d, i) for (_, d, i) in labs))
        return [([("L", d, i)], v) for (d, i), v in res.items()]

    # ---- enumeration (monomial path)

    def branches(self, h, budget):
        """Canonical subtrees with h layers of O below the attachment slot."""
        if budget < 0:
            return []
        key = (h, budget)
        got = self._branches.get(key)
        if got is not None:
            return got
        out = []
        if h == 0:
            C = self.I.complex
            for d in C.degrees():
                if d <= budget:
                    for i in range(C.dim(d)):
                        out.append((("L", d, i), d, frozenset()))
        else:
            subs = self.branches(h - 1, budget)
            max_arity = min(self.O.seq.arity_cap, self.degree_cap + 1)
            for k in range(1, max_arity + 1):
                rep = self.O.seq.levels.get(k)
                if rep is None:
                    continue
                omin = rep.complex.d_min
                for children, cdeg, cmask in _multisets(
                        subs, k, budget - omin, self._key):
                    stab = [q for q in range(k - 1)
                            if children[q] == children[q + 1]]
                    cdegs = [tree_degree(c, self._deg) for c in children]
                    for (d, i) in self.orbit_min_labels(rep, k, stab, cdegs):
                        if d + cdeg > budget:
                            continue
                        mask = cmask
                        if k >= 2 or (d, i) != self.unit:
                            mask = cmask | {h}
                        out.append((("N", d, i, children), d + cdeg, mask))
        out.sort(key=lambda x: tree_key(x[0], self._key))
        self._branches[key] = out
        return out

    def enumerate_trees(self, p, total_cap):
        """Canonical trees of bar degree p with total degree <= total_cap."""
        out = []
        budget = total_cap - p
        full = frozenset(range(1, p + 1))
        subs = self.branches(p, budget)
        for r in sorted(self.M.seq.levels):
            rep = self.M.seq.levels[r]
            mmin = rep.complex.d_min
            for children, cdeg, cmask in _multisets(
                    subs, r, budget - mmin, self._key):
                if cmask != full:
                    continue
                stab = [q for q in range(r - 1)
                        if children[q] == children[q + 1]]
                cdegs = [tree_degree(c, self._deg) for c in children]
                for (d, i) in self.orbit_min_labels(rep, r, stab, cdegs):
                    if d + cdeg > budget:
                        continue
                    out.append(("R", d, i, children))
        return out

    def enumerate_planar(self, p, total_cap):
        """All planar trees (generic path)."""
        out = []
        budget = total_cap - p
        full = frozenset(range(1, p + 1))

        def branches(h, b):
            res = []
            if h == 0:
                C = self.I.complex
                for d in C.degrees():
                    if d <= b:
                        for i in range(C.dim(d)):
                            res.append((("L", d, i), d, frozenset()))
                return res
            subs = branches(h - 1, b)
            for k in range(1, min(self.O.seq.arity_cap,
                                  self.degree_cap + 1) + 1):
                rep = self.O.seq.levels.get(k)
                if rep is None:
                    continue
                for combo in _ordered_tuples(subs, k, b):
                    children, cdeg, cmask = combo
                    C = rep.complex
                    for d in C.degrees():
                        if d + cdeg > b:
                            continue
                        for i in range(C.dim(d)):
                            mask = cmask
                            if k >= 2 or (d, i) != self.unit:
                                mask = cmask | {h}
                            res.append((("N", d, i, children),
                                        d + cdeg, mask))
            return res

        subs = branches(p, budget)
        for r in sorted(self.M.seq.levels):
            rep = self.M.seq.levels[r]
            for children, cdeg, cmask in _ordered_tuples(subs, r, budget):
                if cmask != full:
                    continue
                C = rep.complex
                for d in C.degrees():
                    if d + cdeg > budget:
                        continue
                    for i in range(C.dim(d)):
                        out.append(("R", d, i, children))
                        if len(out) > GENERIC_LIMIT:
                            raise ValueError(
                                "generic coinvariant path exceeded size "
                                "limit; use monomial representations")
        return out

    # ---- build

    def build(self, total_cap=None):
        fld = self.field
        if total_cap is None:
            total_cap = self.degree_cap + 1
        if self.exact:
            p_max = total_cap
            mode = "exact"
            valid = self.degree_cap
        else:
            p_max = self.bar_cap
            mode = "truncated(%d)" % self.bar_cap
            e = self.O.min_nonunit_degree()
            e = 0 if e is None else e
            imin = 0 if self.I.complex.is_zero() else self.I.complex.d_min
            # omitted simplices start at total degree T; their differential
            # can already disturb homology at T - 1
            T = (self.bar_cap + 1) * (1 + e) + imin
            valid = min(self.degree_cap, T - 2)
        if self.monomial:
            per_p = self._basis_monomial(p_max, total_cap)
        else:
            per_p = self._basis_generic(p_max, total_cap)
        basis = {}
        for p in sorted(per_p):
            for item in per_p[p]:
                d = item[0]
                basis.setdefault(d, []).append((p, item[1]))
        index = {}
        dims = {}
        for d in sorted(basis):
            basis[d].sort(key=lambda x: (x[0], self._sortkey(x[1])))
            dims[d] = len(basis[d])
            for pos, (p, desc) in enumerate(basis[d]):
                index[self._index_key(p, desc)] = (d, pos)
        self._outer_index = index
        diffs = {}
        for d in sorted(dims):
            ent = []
            for pos, (p, desc) in enumerate(basis[d]):
                for (d2, pos2), v in self._column(p, desc).items():
                    assert d2 == d - 1, (d2, d)
                    ent.append((pos2, pos, v))
            if ent:
                diffs[d] = Matrix.from_entries(fld, dims.get(d - 1, 0),
                                               dims[d], ent)
        total = ChainComplex(fld, dims, diffs, check=True)
        bg = {d: [p for (p, _) in basis[d]] for d in basis}
        return BarComplex(total, basis, index, bg, mode, valid, self)

    # monomial basis descriptors are trees; generic ones are class ids

    def _sortkey(self, desc):
        if self.monomial:
            return tree_key(desc, self._key)
        return desc

    def _index_key(self, p, desc):
        return (p, desc) if not self.monomial else desc

    def _basis_monomial(self, p_max, total_cap):
        per_p = {}
        imin = 1 if self.I.complex.is_zero() else max(1, self.I.complex.d_min)
        r0min = min(self.M.seq.levels) if self.M.seq.levels else 1
        for p in range(0, p_max + 1):
            if self.exact and p + (r0min + p) * imin > total_cap:
                break
            items = []
            for t in self.enumerate_trees(p, total_cap):
                items.append((tree_degree(t, self._deg) + p, t))
            per_p[p] = items
        return per_p

    def _basis_generic(self, p_max, total_cap):
        self._planar_index = {}
        self._planar_rev = {}
        self._quotients = {}
        per_p = {}
        imin = 1 if self.I.complex.is_zero() else max(1, self.I.complex.d_min)
        r0min = min(self.M.seq.levels) if self.M.seq.levels else 1
        for p in range(0, p_max + 1):
            if self.exact and p + (r0min + p) * imin > total_cap:
                break
            planar = self.enumerate_planar(p, total_cap)
            bydeg = {}
            for t in planar:
                d = tree_degree(t, self._deg) + p
                bydeg.setdefault(d, []).append(t)
            pidx = {}
            rev = {}
            for d in bydeg:
                bydeg[d].sort(key=lambda t: tree_key(t, self._key))
                for i, t in enumerate(bydeg[d]):
                    pidx[t] = (d, i)
                    rev[(d, i)] = t
            span = ChainComplex(self.field,
                                {d: len(v) for d, v in bydeg.items()},
                                check=False)
            rels = {}
            for d, trees in bydeg.items():
                for t in trees:
                    for group in self._swap_relation_groups(t):
                        vec = {pidx[t][1]: self.field.one}
                        for t2, c in group:
                            i2 = pidx[t2][1]
                            vec[i2] = self.field.sub(
                                vec.get(i2, self.field.zero), c)
                        vec = {k: v for k, v in vec.items()
                               if v != self.field.zero}
                        if vec:
                            rels.setdefault(d, []).append(vec)
            q = quotient_by_vectors(span, rels, check_closed=False)
            self._planar_index[p] = pidx
            self._planar_rev[p] = rev
            self._quotients[p] = q
            items = []
            for d in sorted(q.complex.dims):
                for i in range(q.complex.dim(d)):
                    items.append((d, (d, i)))
            per_p[p] = items
        return per_p

    def _swap_relation_groups(self, t):
        """One relation per (node, adjacent position): t ~ sum of terms."""
        out = []
        kind = t[0]
        if kind in ("L", "B"):
            return out
        k = len(t[3])
        rep = self.space(kind, k)
        for q in range(k - 1):
            a, b = t[3][q], t[3][q + 1]
            da = tree_degree(a, self._deg)
            db = tree_degree(b, self._deg)
            sgn = -1 if (da * db) % 2 else 1
            col = rep.generators[q].component(t[1]).column(t[2])
            nch = t[3][:q] + (b, a) + t[3][q + 2:]
            group = []
            for rr, v in col.items():
                vv = v if sgn == 1 else self.field.neg(v)
                group.append(((kind, t[1], rr, nch), vv))
            out.append(group)
        # relations inside children lift along the ambient tree
        for ci, c in enumerate(t[3]):
            for group in self._swap_relation_groups(c):
                lifted = []
                for c2, v in group:
                    nch = t[3][:ci] + (c2,) + t[3][ci + 1:]
                    lifted.append(((kind, t[1], t[2], nch), v))
                out.append(lifted)
        return out

    def _column(self, p, desc):
        fld = self.field
        acc = {}
        if self.monomial:
            planar_terms = [(desc, fld.one)]
        else:
            d, i = desc
            q = self._quotients[p]
            sec = q.section[d].column(i)
            rev = self._planar_rev[p]
            planar_terms = [(rev[(d, pos)], v) for pos, v in sec.items()]
        for t, c in planar_terms:
            for t2, c2 in self.face_terms(t, self.bottom_action):
                root, layers, bottom = tree_levels(t2)
                if not self.normalized(root, layers):
                    continue
                for (dd, pos), v in self._resolve(len(layers), t2).items():
                    coeff = fld.mul(fld.mul(c, c2), v)
                    key = (dd, pos)
                    acc[key] = fld.add(acc.get(key, fld.zero), coeff)
        return {k: v for k, v in acc.items() if v != fld.zero}

    def _resolve(self, p, t):
        """Class of the planar tree t (bar degree p) in the chosen basis."""
        fld = self.field
        if self.monomial:
            got = self.canon(t)
            if got is None:
                return {}
            t2, s = got
            d, pos = self.index_lookup(t2, p)
            return {(d, pos): fld.one if s == 1 else fld.neg(fld.one)}
        d, i = self._planar_index[p][t]
        q = self._quotients[p]
        col = q.proj.component(d).column(i)
        out = {}
        for r, v in col.items():
            dd, pos = self._outer_index[(p, (d, r))]
            out[(dd, pos)] = v
        return out

    def index_lookup(self, t, p):
        return self._outer_index[t if self.monomial else (p, t)]

    def resolve_terms(self, terms):
        """Public: list of (planar tree, coeff) -> {(deg,pos): coeff}."""
        fld = self.field
        acc = {}
        for t, c in terms:
            root, layers, bottom = tree_levels(t)
            if not self.normalized(root, layers):
                continue
            for key, v in self._resolve(len(layers), t).items():
                acc[key] = fld.add(acc.get(key, fld.zero), fld.mul(c, v))
        return {k: v for k, v in acc.items() if v != fld.zero}


def _multisets(items, k, budget, keycache):
    """Weakly increasing k-tuples of items (by list position) within budget.

    items: list of (tree, deg, mask) sorted by key."""
    out = []

    def rec(start, left, acc, deg, mask):
        if left == 0:
            out.append((tuple(acc), deg, mask))
            return
        for i in range(start, len(items)):
            t, d, m = items[i]
            if deg + d > budget:
                continue
            acc.append(t)
            rec(i, left - 1, acc, deg + d, mask | m)
            acc.pop()
    rec(0, k, [], 0, frozenset())
    return out


def _ordered_tuples(items, k, budget):
    out = []

    def rec(left, acc, deg, mask):
        if left == 0:
            out.append((tuple(acc), deg, mask))
            return
        for (t, d, m) in items:
            if deg + d > budget:
                continue
            acc.append(t)
            rec(left - 1, acc, deg + d, mask | m)
            acc.pop()
    rec(k, [], 0, frozenset())
    return out


def bar(M, O, I, degree_cap, bar_cap=None, force_generic=False):
    """B(M, O, I) for an algebra I; exact mode unless bar_cap is given."""
    builder = AlgebraBarBuilder(M, O, I, degree_cap, bar_cap,
                                force_generic=force_generic)
    return builder.build()


def tq(O, I, degree_cap, bar_cap=None, force_generic=False):
    """TQ(I) = B(O(1), O, I) with O(1) the unit bimodule at arity 1."""
    U = Bimodule.truncation(O, 1, 2)
    return bar(U, O, I, degree_cap, bar_cap, force_generic=force_generic)


# -- module case ---------------------------------------------------------------------

class ModuleBarBuilder(BarBuilder):
    """B(M, O, N) for a left module / bimodule N, levelwise in the output
    arity.  Leaves are numbered, so the symmetric groups act freely on tree
    shapes and no stabilizer bookkeeping is needed; canonical form = children
    sorted by least leaf at every node."""

    def __init__(self, M, O, N, s_cap, degree_cap, bar_cap=None):
        super().__init__(M, O, degree_cap, bar_cap)
        self.N = N
        self.s_cap = s_cap
        self._canon_m = {}

    def bottom_diff(self, lab):
        kind, d, i, leaves = lab
        rep = self.N.seq.levels.get(len(leaves))
        m = rep.complex.diffs.get(d) if rep else None
        if m is None:
            return []
        return [(("B", d - 1, rr, leaves), v) for rr, v in m.column(i).items()]

    def bottom_action(self, olab, k, labs):
        """Left action of a layer node on its bottom children, with the
        relabeling that aligns consecutive input slots with the sorted union
        of the leaf sets."""
        fld = self.field
        blocks = [(len(lab[3]), (lab[1], lab[2])) for lab in labs]
        res = self.N.lam(olab, blocks)
        if not res:
            return []
        union = tuple(sorted(x for lab in labs for x in lab[3]))
        posn = {x: i for i, x in enumerate(union)}
        sigma = []
        for lab in labs:
            sigma.extend(posn[x] for x in lab[3])
        sigma = tuple(sigma)
        rep = self.N.seq.levels[len(union)]
        out = []
        pm_cache = {}
        for (d2, i2), v in res.items():
            pm = pm_cache.get(d2)
            if pm is None:
                pm = rep.perm_map(sigma).component(d2)
                pm_cache[d2] = pm
            for rr, vv in pm.column(i2).items():
                out.append(([("B", d2, rr, union)], fld.mul(v, vv)))
        return out

    # ---- enumeration

    def enumerate_trees(self, p, s, total_cap):
        budget = total_cap - p
        full = frozenset(range(1, p + 1))
        leafset = tuple(range(s))
        out = []
        for r in sorted(self.M.seq.levels):
            rep = self.M.seq.levels[r]
            if r > s:
                continue
            for blocks in _partitions_into(leafset, r):
                combos = [self._branches_m(p, blk, budget) for blk in blocks]
                for chosen in itertools.product(*combos):
                    cdeg = sum(c[1] for c in chosen)
                    cmask = frozenset().union(*(c[2] for c in chosen))
                    if cmask != full:
                        continue
                    children = tuple(c[0] for c in chosen)
                    C = rep.complex
                    for d in C.degrees():
                        if d + cdeg > budget:
                            continue
                        for i in range(C.dim(d)):
                            out.append(("R", d, i, children))
        return out

    def _branches_m(self, h, leafset, budget):
        if budget < 0:
            return []
        out = []
        if h == 0:
            rep = self.N.seq.levels.get(len(leafset))
            if rep is not None:
                for d in rep.complex.degrees():
                    if d <= budget:
                        for i in range(rep.complex.dim(d)):
                            out.append((("B", d, i, leafset), d, frozenset()))
            return out
        for k in range(1, len(leafset) + 1):
            rep = self.O.seq.levels.get(k)
            if rep is None:
                continue
            for blocks in _partitions_into(leafset, k):
                combos = [self._branches_m(h - 1, blk, budget)
                          for blk in blocks]
                for chosen in itertools.product(*combos):
                    cdeg = sum(c[1] for c in chosen)
                    if cdeg > budget:
                        continue
                    cmask = frozenset().union(*(c[2] for c in chosen))
                    children = tuple(c[0] for c in chosen)
                    C = rep.complex
                    for d in C.degrees():
                        if d + cdeg > budget:
                            continue
                        for i in range(C.dim(d)):
                            mask = cmask
                            if k >= 2 or (d, i) != self.unit:
                                mask = cmask | {h}
                            out.append((("N", d, i, children),
                                        d + cdeg, mask))
        return out

    # ---- resolution: resort children by least leaf, expanding label actions

    def canon_m(self, t):
        got = self._canon_m.get(t)
        if got is not None:
            return got
        out = self._canon_m_compute(t)
        self._canon_m[t] = out
        return out

    def _canon_m_compute(self, t):
        kind = t[0]
        if kind == "B":
            return [(t, self.field.one)]
        fld = self.field
        parts = [self.canon_m(c) for c in t[3]]
        k = len(parts)
        rep = self.space(kind, k)
        out = {}
        for combo in itertools.product(*parts):
            coeff = fld.one
            ch = []
            for c, v in combo:
                coeff = fld.mul(coeff, v)
                ch.append(c)
            mins = [min_leaf(c) for c in ch]
            order = sorted(range(k), key=lambda j: mins[j])
            if order == list(range(k)):
                key = (kind, t[1], t[2], tuple(ch))
                out[key] = fld.add(out.get(key, fld.zero), coeff)
                continue
            sigma = [0] * k
            for newpos, j in enumerate(order):
                sigma[j] = newpos
            degs = [tree_degree(c, self._deg) for c in ch]
            sgn = koszul_sign(degs, tuple(sigma))
            nch = tuple(ch[j] for j in order)
            pm = rep.perm_map(tuple(sigma)).component(t[1])
            for rr, v in pm.column(t[2]).items():
                cc = fld.mul(coeff, v)
                if sgn < 0:
                    cc = fld.neg(cc)
                key = (kind, t[1], rr, nch)
                out[key] = fld.add(out.get(key, fld.zero), cc)
        return [(k2, v) for k2, v in out.items() if v != fld.zero]

    def resolve_terms(self, terms):
        fld = self.field
        acc = {}
        for t, c in terms:
            root, layers, bottom = tree_levels(t)
            if not self.normalized(root, layers):
                continue
            for t2, v in self.canon_m(t):
                key = self._outer_index[t2]
                acc[key] = fld.add(acc.get(key, fld.zero), fld.mul(c, v))
        return {k: v for k, v in acc.items() if v != fld.zero}

    # ---- build

    def build(self):
        fld = self.field
        total_cap = self.degree_cap + 1
        if self.bar_cap is not None:
            p_max = self.bar_cap
        else:
            p_max = self.s_cap  # width grows strictly along layers
        levels = {}
        level_basis = {}
        level_grading = {}
        simp = {}
        index = {}
        for s in range(1, self.s_cap + 1):
            bydeg = {}
            for p in range(0, min(p_max, s) + 1):
                for t in self.enumerate_trees(p, s, total_cap):
                    d = tree_degree(t, self._deg) + p
                    bydeg.setdefault(d, []).append((p, t))
            if not bydeg:
                continue
            for d in bydeg:
                bydeg[d].sort(key=lambda x: (x[0], tree_key(x[1], self._key)))
                for pos, (p, t) in enumerate(bydeg[d]):
                    index[t] = (d, pos)
            level_basis[s] = bydeg
            level_grading[s] = {d: [p for (p, _) in v]
                                for d, v in bydeg.items()}
        self._outer_index = index
        for s, bydeg in level_basis.items():
            dims = {d: len(v) for d, v in bydeg.items()}
            diffs = {}
            smats = {}
            for d in sorted(dims):
                ent = []
                sent = []
                for pos, (p, t) in enumerate(bydeg[d]):
                    ssub = self.resolve_terms(
                        self.simplicial_terms(t, self.bottom_action))
                    for (dd, pos2), v in ssub.items():
                        sent.append((pos2, pos, v))
                        ent.append((pos2, pos, v))
                    root, layers, bottom = tree_levels(t)
                    isub = self.resolve_terms(
                        self.internal_terms(root, layers, bottom))
                    for (dd, pos2), v in isub.items():
                        vv = v if p % 2 == 0 else fld.neg(v)
                        ent.append((pos2, pos, vv))
                if ent:
                    diffs[d] = Matrix.from_entries(fld, dims.get(d - 1, 0),
                                                   dims[d], ent)
                smats[d] = Matrix.from_entries(fld, dims.get(d - 1, 0),
                                               dims[d], sent)
            C = ChainComplex(fld, dims, diffs, check=True)
            gens = []
            for i in range(max(0, s - 1)):
                comps = {}
                for d in sorted(dims):
                    gent = []
                    for pos, (p, t) in enumerate(bydeg[d]):
                        for t2, c in self._relabel(t, i):
                            for (dd, pos2), v in self.resolve_terms(
                                    [(t2, c)]).items():
                                gent.append((pos2, pos, v))
                    comps[d] = Matrix.from_entries(fld, dims[d], dims[d],
                                                   gent)
                gens.append(ChainMap(C, C, comps, check=False))
            levels[s] = SymRep(s, C, gens, check=True)
            simp[s] = smats
        seq = SymSeq(fld, levels, self.s_cap, reduced=True)
        return BarModule(self, seq, level_basis, level_grading, simp)

    def _relabel(self, t, i):
        """Leaf transposition (i, i+1) applied structurally; resolution
        restores the canonical order."""
        fld = self.field
        kind = t[0]
        if kind == "B":
            leaves = t[3]
            has_a, has_b = i in leaves, (i + 1) in leaves
            if has_a and has_b:
                q = leaves.index(i)
                rep = self.N.seq.levels[len(leaves)]
                col = rep.generators[q].component(t[1]).column(t[2])
                return [(("B", t[1], rr, leaves), v) for rr, v in col.items()]
            if has_a or has_b:
                nl = tuple(sorted((i + 1 if x == i else i) if x in (i, i + 1)
                                  else x for x in leaves))
                return [(("B", t[1], t[2], nl), fld.one)]
            return [(t, fld.one)]
        parts = [self._relabel(c, i) for c in t[3]]
        out = []
        for combo in itertools.product(*parts):
            coeff = fld.one
            ch = []
            for c, v in combo:
                coeff = fld.mul(coeff, v)
                ch.append(c)
            out.append(((kind, t[1], t[2], tuple(ch)), coeff))
        return out


def _partitions_into(leafset, k):
    """Partitions of a sorted tuple into exactly k blocks ordered by min."""
    n = len(leafset)
    if k > n:
        return
    if k == 0:
        if n == 0:
            yield ()
        return
    first = leafset[0]
    rest = leafset[1:]
    # choose the remainder of the first block
    for extra_mask in range(2 ** len(rest)):
        block = [first]
        others = []
        for j, x in enumerate(rest):
            if (extra_mask >> j) & 1:
                block.append(x)
            else:
                others.append(x)
        if len(others) < k - 1:
            continue
        for sub in _partitions_into(tuple(others), k - 1):
            yield (tuple(block),) + sub


class BarModule(Bimodule):
    """A module-case bar output packaged as a bimodule: usable as the weight
    variable of a further bar construction (right action through N)."""

    def __init__(self, builder, seq, level_basis, level_grading, simp):
        self.builder = builder
        self.level_basis = level_basis
        self.bar_grading = level_grading
        self.simp = simp
        super().__init__(builder.M.operad, seq, self._rho, self._lam,
                         "B(%s,%s,%s)" % (builder.M.name,
                                          builder.O.name, builder.N.name))

    def _lam(self, olab, labels):
        raise NotImplementedError("left action of a nested bar is not needed")

    def _rho(self, r, xlab, blocks):
        """Attach operations below the leaves; absorbed by N's right action."""
        fld = self.field
        b = self.builder
        d, idx = xlab
        p, t = self.level_basis[r][d][idx]
        offs = [0]
        for bj, _ in blocks:
            offs.append(offs[-1] + bj)
        s2 = offs[-1]
        if s2 > b.s_cap:
            raise ValueError("bar module level cap exceeded by right action")
        root, layers, bottom = tree_levels(t)
        # Koszul: ops interleave with the bottom labels
        nb = len(bottom)
        perm = [0] * (nb + r)
        posn = 0
        for v, lab in enumerate(bottom):
            perm[v] = posn
            posn += 1
            for u in lab[3]:
                perm[nb + u] = posn
                posn += 1
        degs = [lab[1] for lab in bottom] + [ol[0] for _, ol in blocks]
        sgn = koszul_sign(degs, tuple(perm))
        factors = []
        for lab in bottom:
            sub = [(len(range(offs[u], offs[u + 1])), blocks[u][1])
                   for u in lab[3]]
            res = b.N.rho(len(lab[3]), (lab[1], lab[2]), sub)
            nl = tuple(x for u in lab[3]
                       for x in range(offs[u], offs[u + 1]))
            factors.append([(("B", d2, i2, nl), v)
                            for (d2, i2), v in res.items()])
        out = {}
        for combo in itertools.product(*factors):
            coeff = fld.one if sgn == 1 else fld.neg(fld.one)
            nb2 = []
            for lab2, v in combo:
                coeff = fld.mul(coeff, v)
                nb2.append(lab2)
            t2 = tree_from_levels(root, layers, nb2)
            dd, pos = b._outer_index[t2]
            key = (dd, pos)
            out[key] = fld.add(out.get(key, fld.zero), coeff)
        return {k: v for k, v in out.items() if v != fld.zero}


def module_bar(M, O, N, s_cap, degree_cap, bar_cap=None):
    """B(M, O, N) as a bimodule of bar-graded complexes."""
    return ModuleBarBuilder(M, O, N, s_cap, degree_cap, bar_cap).build()


# -- functoriality -------------------------------------------------------------------

def bar_map_algebra(src, tgt, f, check=True):
    """Induced map B(M,O,I) -> B(M,O,J) along an algebra map f: I -> J."""
    fld = src.total.field
    bsrc, btgt = src.builder, tgt.builder
    comps = {}
    for d in src.total.degrees():
        ent = []
        for pos in range(src.total.dim(d)):
            for t, c in _planar_of(bsrc, src, d, pos):
                root, layers, bottom = tree_levels(t)
                factors = []
                for lab in bottom:
                    col = f.component(lab[1]).column(lab[2])
                    factors.append([(("L", lab[1], rr), v)
                                    for rr, v in col.items()])
                for combo in itertools.product(*factors):
                    coeff = c
                    nb = []
                    for lab2, v in combo:
                        coeff = fld.mul(coeff, v)
                        nb.append(lab2)
                    t2 = tree_from_levels(root, layers, nb)
                    for (dd, pos2), v in btgt.resolve_terms(
                            [(t2, coeff)]).items():
                        ent.append((pos2, pos, v))
        comps[d] = Matrix.from_entries(fld, tgt.total.dim(d),
                                       src.total.dim(d), ent)
    return ChainMap(src.total, tgt.total, comps, check=check)


def bar_map_bimodule(src, tgt, level_fn, check=True):
    """Induced map along a bimodule map given as level_fn(r, lab) -> vector."""
    fld = src.total.field
    bsrc, btgt = src.builder, tgt.builder
    comps = {}
    for d in src.total.degrees():
        ent = []
        for pos in range(src.total.dim(d)):
            for t, c in _planar_of(bsrc, src, d, pos):
                root, layers, bottom = tree_levels(t)
                rd, ri, rk = root
                for (d2, i2), v in level_fn(rk, (rd, ri)).items():
                    t2 = tree_from_levels((d2, i2, rk), layers, bottom)
                    for (dd, pos2), vv in btgt.resolve_terms(
                            [(t2, fld.mul(c, v))]).items():
                        ent.append((pos2, pos, vv))
        comps[d] = Matrix.from_entries(fld, tgt.total.dim(d),
                                       src.total.dim(d), ent)
    return ChainMap(src.total, tgt.total, comps, check=check)


def _planar_of(builder, bc, d, pos):
    p, desc = bc.basis[d][pos]
    if builder.monomial:
        return [(desc, builder.field.one)]
    dd, i = desc
    q = builder._quotients[p]
    rev = builder._planar_rev[p]
    return [(rev[(dd, pp)], v)
            for pp, v in q.section[dd].column(i).items()]


# -- augmentation and the relative composite over an algebra ---------------------------

class AlgebraRelative:
    """M o_O I: cokernel of d_0 - d_1 on the bar-degree-zero part."""

    def __init__(self, complex, proj_from_b0, b0_index, b0_complex):
        self.complex = complex
        self.proj = proj_from_b0
        self.b0_index = b0_index
        self.b0 = b0_complex


def relative_compose_algebra(bc):
    """The relative composite computed from a bar complex (p <= 1 part)."""
    builder = bc.builder
    fld = builder.field
    b0 = {}
    b0_index = {}
    for d in bc.total.degrees():
        for pos in range(bc.total.dim(d)):
            p, desc = bc.basis[d][pos]
            if p == 0:
                b0_index[(d, pos)] = (d, len(b0.setdefault(d, [])))
                b0[d].append((d, pos))
    dims = {d: len(v) for d, v in b0.items()}
    diffs = {}
    for d in sorted(dims):
        ent = []
        for i, (dd, pos) in enumerate(b0[d]):
            col = bc.total.d(d).column(pos)
            for r, v in col.items():
                key = b0_index.get((d - 1, r))
                assert key is not None, "differential leaves the p=0 part"
                ent.append((key[1], i, v))
        if ent:
            diffs[d] = Matrix.from_entries(fld, dims.get(d - 1, 0),
                                           dims[d], ent)
    B0 = ChainComplex(fld, dims, diffs, check=True)
    rels = {}
    for d in bc.total.degrees():
        for pos in range(bc.total.dim(d)):
            p, desc = bc.basis[d][pos]
            if p != 1:
                continue
            vec = {}
            for t, c in _planar_of(builder, bc, d, pos):
                for (dd, pos2), v in builder.resolve_terms(
                        builder.simplicial_terms(
                            t, builder.bottom_action)).items():
                    key = b0_index[(dd, pos2)]
                    vec[key[1]] = fld.add(vec.get(key[1], fld.zero),
                                          fld.mul(c, v))
            vec = {k: v for k, v in vec.items() if v != fld.zero}
            if vec:
                rels.setdefault(d - 1, []).append(vec)
    q = quotient_by_vectors(B0, rels)
    return AlgebraRelative(q.complex, q, b0_index, B0)


def augmentation_to_relative(bc):
    """The bar-degree-0 projection B(M,O,I) -> M o_O I as a ChainMap."""
    rel = relative_compose_algebra(bc)
    fld = bc.total.field
    comps = {}
    for d in bc.total.degrees():
        ent = []
        for pos in range(bc.total.dim(d)):
            key = rel.b0_index.get((d, pos))
            if key is None:
                continue
            col = rel.proj.proj.component(d).column(key[1])
            for r, v in col.items():
                ent.append((r, pos, v))
        comps[d] = Matrix.from_entries(fld, rel.complex.dim(d),
                                       bc.total.dim(d), ent)
    return ChainMap(bc.total, rel.complex, comps, check=True), rel
