"""Derived operations built on top of the bar kernel: the double bar
construction with its transposed-totalization isomorphism, the one-term
model with its shuffle comparison, and shuffle transport of algebra maps
into double bars (the engine behind power maps).

The two readings of the iterated bar B(M,O,B(N,O,I)) = B(B(M,O,N),O,I)
share one basis, the (q,p)-bigraded trees M o O^q o N o O^p o I; the two
sides are the two iterated totalizations and the comparison is the
transposition sign (-1)^{pq}.  A naive chain model that literally plugs the
complex B(N,O,I) into the algebra slot has different dimensions (per-branch
instead of global normalization), so no degreewise bijection can exist for
it; the bigraded reading is the one that makes the associativity
isomorphism exact on the nose.
"""

import itertools

from .chain import (ChainComplex, ChainMap, koszul_sign, tensor_many,
                    truncate_above)
from .matrix import Matrix
from .symseq import SymRep, coinvariants
from .operad import Bimodule, operad_as_bimodule
from .bar import (
    AlgebraBarBuilder, BarComplex, bar, module_bar, tree_levels,
    tree_from_levels, tree_degree,
)


class DoubleBar:
    """Both totalizations of the (q,p)-bigraded double bar."""

    def __init__(self, side_a, side_b, iso, W, gradings):
        self.side_a = side_a      # BarComplex: bar(B(M,O,N), O, I)
        self.side_b = side_b      # ChainComplex: transposed totalization
        self.iso = iso            # ChainMap side_b -> side_a
        self.W = W                # the inner bar bimodule B(M,O,N)
        self.gradings = gradings  # degree -> list of (p_outer, q_inner)


def double_bar(M, N, O, I, degree_cap, s_cap=None, inner_degree_cap=None):
    fld = O.field
    if s_cap is None:
        s_cap = degree_cap + 1
    if inner_degree_cap is None:
        inner_degree_cap = degree_cap
    W = module_bar(M, O, N, s_cap, inner_degree_cap)
    builder = AlgebraBarBuilder(W, O, I, degree_cap)
    A = builder.build()
    # per basis element: outer p from the bar grading, inner q from W
    gradings = {}
    for d in A.total.degrees():
        out = []
        for pos in range(A.total.dim(d)):
            p, t = A.basis[d][pos]
            rd, ri = t[1], t[2]
            rk = len(t[3])
            q = W.bar_grading[rk][rd][ri]
            out.append((p, q))
        gradings[d] = out
    # side B: same spaces, transposed-order total differential
    diffs = {}
    for d in A.total.degrees():
        ent = []
        for pos in range(A.total.dim(d)):
            p, t = A.basis[d][pos]
            q = gradings[d][pos][1]
            root, layers, bottom = tree_levels(t)
            rd, ri, rk = root
            colS = W.simp[rk][rd].column(ri)
            colD = W.seq.levels[rk].complex.d(rd).column(ri)
            acc = {}

            def add(tdict, sgn):
                for key, v in tdict.items():
                    vv = v if sgn == 1 else fld.neg(v)
                    acc[key] = fld.add(acc.get(key, fld.zero), vv)

            # root inner-simplicial part, coefficient +1
            add(builder.resolve_terms(
                [(tree_from_levels((rd - 1, rr, rk), layers, bottom), v)
                 for rr, v in colS.items()]), 1)
            # outer simplicial faces, coefficient (-1)^q
            add(builder.resolve_terms(
                builder.simplicial_terms(t, builder.bottom_action)),
                1 if q % 2 == 0 else -1)
            # non-root internal, coefficient (-1)^{p+q}
            add(builder.resolve_terms(
                builder.internal_terms(root, layers, bottom,
                                       skip_root=True)),
                1 if (p + q) % 2 == 0 else -1)
            # root inner-internal: (D_W - S_W) carries (-1)^q; net (-1)^p
            dd = dict(colD)
            for rr, v in colS.items():
                w = fld.sub(dd.get(rr, fld.zero), v)
                if w == fld.zero:
                    dd.pop(rr, None)
                else:
                    dd[rr] = w
            add(builder.resolve_terms(
                [(tree_from_levels((rd - 1, rr, rk), layers, bottom), v)
                 for rr, v in dd.items()]), 1 if p % 2 == 0 else -1)
            for (d2, pos2), v in acc.items():
                if v != fld.zero:
                    ent.append((pos2, pos, v))
        if ent:
            diffs[d] = Matrix.from_entries(fld, A.total.dim(d - 1),
                                           A.total.dim(d), ent)
    B = ChainComplex(fld, dict(A.total.dims), diffs, check=True)
    icomps = {}
    for d in A.total.degrees():
        ent = []
        for pos, (p, q) in enumerate(gradings[d]):
            s = fld.one if (p * q) % 2 == 0 else fld.neg(fld.one)
            ent.append((pos, pos, s))
        icomps[d] = Matrix.from_entries(fld, A.total.dim(d),
                                        A.total.dim(d), ent)
    iso = ChainMap(B, A.total, icomps, check=True)
    return DoubleBar(A, B, iso, W, gradings)


def bar_assoc_iso(M, N, O, I, degree_cap, s_cap=None):
    """The comparison B(M,O,B(N,O,I)) -> B(B(M,O,N),O,I): a degreewise
    bijection commuting with the differentials (transposition of the two bar
    gradings with sign (-1)^{pq})."""
    db = double_bar(M, N, O, I, degree_cap, s_cap)
    return db.iso, db


# -- interleavings -----------------------------------------------------------------

def interleavings(counts):
    """All order-preserving interleavings of blocks with the given sizes.

    Yields (assignment, sign): assignment[g] = branch owning global slot g;
    sign = parity of the permutation unshuffling the concatenation.
    """
    total = sum(counts)
    branches = len(counts)

    def rec(remaining, acc, inversions):
        if len(acc) == total:
            yield tuple(acc), (-1) ** (inversions % 2)
            return
        for u in range(branches):
            if remaining[u] == 0:
                continue
            later = sum(remaining[v] for v in range(u))
            remaining[u] -= 1
            acc.append(u)
            yield from rec(remaining, acc, inversions + later)
            acc.pop()
            remaining[u] += 1
    yield from rec(list(counts), [], 0)


def _merge_branches(field, unit, branch_data, assignment):
    """Interleave branch layer stacks into global layers with unit padding.

    branch_data: per branch, (layers, bottom) where layers is a list of
    tuples of (deg, idx, arity) and bottom a list of leaf labels.
    Returns (global_layers, global_bottom, slot_map) where slot_map lists,
    per global label slot in level-major order, its source (branch, local
    slot index) or None for inserted units.
    """
    nb = len(branch_data)
    widths = [1] * nb
    progress = [0] * nb
    glayers = []
    slot_map = []
    for g, owner in enumerate(assignment):
        layer = []
        lmap = []
        for u in range(nb):
            if u == owner:
                lay = branch_data[u][0][progress[u]]
                for t, (dd, ii, kk) in enumerate(lay):
                    layer.append((dd, ii, kk))
                    lmap.append((u, progress[u], t))
                widths[u] = sum(x[2] for x in lay)
                progress[u] += 1
            else:
                for _ in range(widths[u]):
                    layer.append((unit[0], unit[1], 1))
                    lmap.append(None)
        glayers.append(tuple(layer))
        slot_map.append(lmap)
    bottom = []
    bmap = []
    for u in range(nb):
        assert progress[u] == len(branch_data[u][0])
        for t, lab in enumerate(branch_data[u][1]):
            bottom.append(lab)
            bmap.append((u, "B", t))
    return glayers, bottom, slot_map, bmap


def _attach_sign(field, root_deg, branch_data, slot_map, bmap):
    """Koszul sign for rearranging (root, branch_1 slots, branch_2 slots,..)
    into the composite level-major order, padding units being degree 0."""
    # source ordering: for each branch, its labels level-major then bottom
    src_pos = {}
    pos = 0
    degs = []
    for u, (layers, bottom) in enumerate(branch_data):
        for li, lay in enumerate(layers):
            for t, (dd, ii, kk) in enumerate(lay):
                src_pos[(u, li, t)] = pos
                degs.append(dd)
                pos += 1
        for t, lab in enumerate(bottom):
            src_pos[(u, "B", t)] = pos
            degs.append(lab[1])
            pos += 1
    # target ordering: global layers then global bottom, skipping padding
    perm = [0] * pos
    tpos = 0
    for lmap in slot_map:
        for entry in lmap:
            if entry is None:
                continue
            perm[src_pos[entry]] = tpos
            tpos += 1
    for entry in bmap:
        perm[src_pos[entry]] = tpos
        tpos += 1
    return koszul_sign(degs, tuple(perm))


def _branch_views(bc, d, pos):
    """Planar terms of a bar basis element split as (root, layers, bottom)."""
    from .bar import _planar_of
    out = []
    for t, c in _planar_of(bc.builder, bc, d, pos):
        root, layers, bottom = tree_levels(t)
        out.append((root, [tuple(l) for l in layers], list(bottom), c))
    return out


# -- one-term model ------------------------------------------------------------------

def one_term_model(Mn, O, I, degree_cap, n=None):
    """coinv(Mn (x) TQ(I)^{(x)n}) with its shuffle comparison into
    bar(Mn, O, I); the comparison is a chain map and a quasi-iso."""
    from .bar import tq as tq_fn
    assert O.unital_exact(), "the one-term model needs O(1) = unit"
    fld = O.field
    arities = Mn.seq.arities()
    if n is None:
        assert len(arities) == 1, "Mn must be concentrated in one arity"
        n = arities[0]
    T = tq_fn(O, I, degree_cap)
    target = bar(Mn, O, I, degree_cap)
    MnC = Mn.seq.levels[n].complex
    rep = Mn.seq.levels[n]
    TT = tensor_many([MnC] + [T.total] * n)
    top = degree_cap + 1
    trunc = truncate_above(TT.complex, top)
    gens = []
    for i in range(n - 1):
        perm = list(range(n + 1))
        perm[i + 1], perm[i + 2] = perm[i + 2], perm[i + 1]
        pg = TT.permutation_map(tuple(perm))
        og = rep.generators[i]
        full = TT.map_tensor([og] + [T.total.identity_map()] * n,
                             TT).compose(pg)
        gens.append(ChainMap(trunc, trunc,
                             {d: m for d, m in full.comps.items()
                              if d <= top}, check=False))
    bigrep = SymRep(n, trunc, gens, check=False)
    co = coinvariants(bigrep)
    model = co.complex
    unit = O.unit_label
    comps = {}
    for d in model.degrees():
        ent = []
        for i in range(model.dim(d)):
            for pos, c0 in co.section[d].column(i).items():
                degs, idxs = TT.basis[d][pos]
                mlab = (degs[0], idxs[0])
                acc = _shuffle_attach(
                    fld, unit, target, mlab, n,
                    [(T, degs[u + 1], idxs[u + 1]) for u in range(n)], c0)
                for (dd, pos2), v in acc.items():
                    ent.append((pos2, i, v))
        comps[d] = Matrix.from_entries(fld, target.total.dim(d),
                                       model.dim(d), ent)
    cmp_map = ChainMap(model, target.total, comps, check=True)
    return model, cmp_map, target


def _shuffle_attach(fld, unit, target, mlab, n, branches, c0):
    """Sum over shuffles of attaching TQ-type branches under an arity-n root.

    branches: per slot, (bar complex, total degree, index) of a tree whose
    root is the arity-1 unit; its subtree becomes the branch content.
    """
    acc = {}
    expansions = []
    for (bc, dd, ii) in branches:
        expansions.append([(root, layers, bottom, c)
                           for (root, layers, bottom, c)
                           in _branch_views(bc, dd, ii)])
    for combo in itertools.product(*expansions):
        coeff = c0
        branch_data = []
        ok = True
        for (root, layers, bottom, c) in combo:
            coeff = fld.mul(coeff, c)
            rd, ri, rk = root
            assert rk == 1 and (rd, ri) == unit, "branch root must be the unit"
            branch_data.append((layers, bottom))
        if not ok:
            continue
        counts = [len(bd[0]) for bd in branch_data]
        for assignment, shuf_sign in interleavings(counts):
            glayers, bottom, slot_map, bmap = _merge_branches(
                fld, unit, branch_data, assignment)
            ks = _attach_sign(fld, mlab[0], branch_data, slot_map, bmap)
            tree = tree_from_levels((mlab[0], mlab[1], n),
                                    [tuple(l) for l in glayers], bottom)
            sgn = shuf_sign * ks
            cc = coeff if sgn == 1 else fld.neg(coeff)
            for key, v in target.builder.resolve_terms(
                    [(tree, cc)]).items():
                acc[key] = fld.add(acc.get(key, fld.zero), v)
    return {k: v for k, v in acc.items() if v != fld.zero}
