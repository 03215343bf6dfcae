"""Pushout-corner maps and punctured-cube colimits of chain complexes.

Over a field, degreewise-injective maps play the role of cofibrations; the
corner map of a square of injective maps is then itself injective, and a
quasi-iso input makes it a quasi-iso.  Both facts are exactly checkable and
are exercised by the test suite.
"""

from .chain import (
    ChainComplex, ChainMap, TensorComplex, direct_sum, quotient_by_vectors,
    tensor_many, zero_complex, zero_map,
)
from .matrix import Matrix


class CommutingSquare:
    """top: TL->TR, left: TL->BL, right: TR->BR, bottom: BL->BR."""

    def __init__(self, top, left, right, bottom):
        assert top.source is left.source
        assert right.source is top.target
        assert bottom.source is left.target
        assert right.target is bottom.target
        if (right.compose(top) - bottom.compose(left)).comps:
            raise ValueError("square does not commute")
        self.top, self.left, self.right, self.bottom = top, left, right, bottom

    @property
    def tl(self):
        return self.top.source

    @property
    def tr(self):
        return self.top.target

    @property
    def bl(self):
        return self.left.target

    @property
    def br(self):
        return self.right.target


def tensor_square(f1, f2):
    """The square of f1 (x) f2 under the tensor bifunctor.

    f1: M -> N, f2: A -> B gives TL = M(x)A, TR = M(x)B, BL = N(x)A,
    BR = N(x)B with the four one-variable maps.
    """
    M, N = f1.source, f1.target
    A, B = f2.source, f2.target
    TMA = tensor_many([M, A])
    TMB = tensor_many([M, B])
    TNA = tensor_many([N, A])
    TNB = tensor_many([N, B])
    idm, idn = M.identity_map(), N.identity_map()
    ida, idb = A.identity_map(), B.identity_map()
    top = TMA.map_tensor([idm, f2], TMB)
    left = TMA.map_tensor([f1, ida], TNA)
    right = TMB.map_tensor([f1, idb], TNB)
    bottom = TNA.map_tensor([idn, f2], TNB)
    return CommutingSquare(top, left, right, bottom)


def pushout(top, left):
    """Pushout of BL <-left- TL -top-> TR in chain complexes.

    Returns (P, incl_tr: TR->P, incl_bl: BL->P) with P the cokernel of the
    difference map TL -> TR (+) BL.
    """
    TL, TR, BL = top.source, top.target, left.target
    S, incls, projs = direct_sum([TR, BL])
    diff = incls[0].compose(top) - incls[1].compose(left)
    rels = {}
    for d in TL.degrees():
        m = diff.component(d)
        vecs = [m.column(c) for c in range(TL.dim(d))]
        rels[d] = [v for v in vecs if v]
    q = quotient_by_vectors(S, rels)
    return q.complex, q.proj.compose(incls[0]), q.proj.compose(incls[1]), q


def pushout_corner_map(square):
    """ChainMap from pushout(TR <- TL -> BL) to BR induced by (right, bottom)."""
    P, itr, ibl, q = pushout(square.top, square.left)
    S = q.proj.source
    # combined (right (+) bottom): S -> BR, then factor through the quotient
    comps = {}
    BR = square.br
    TR, BL = square.tr, square.bl
    for d in S.degrees():
        r = square.right.component(d)
        b = square.bottom.component(d)
        m = r.hstack(b)  # S_d = TR_d (+) BL_d in this order
        comps[d] = m
    combined = ChainMap(S, BR, comps, check=True)
    corner_comps = {}
    for d in P.degrees():
        corner_comps[d] = combined.component(d) * q.section[d]
    return ChainMap(P, BR, corner_comps, check=True)


def punctured_cube_colimit(f, r):
    """Colimit of the r-cube on f: X -> Y with the all-Y vertex removed.

    Returns (Q, canonical ChainMap Q -> Y^{(x)r}, sigma) where sigma lists the
    ChainMaps of the adjacent transpositions acting on Q.
    """
    assert r >= 1
    X, Y = f.source, f.target
    field = X.field
    if X.is_zero():
        Z = zero_complex(field)
        Yr = tensor_many([Y] * r).complex if not Y.is_zero() else Z
        return Z, zero_map(Z, Yr), [zero_map(Z, Z) for _ in range(r - 1)]
    verts = []   # subsets of positions where Y sits, as frozensets, not full
    for mask in range(2 ** r - 1):
        verts.append(frozenset(i for i in range(r) if (mask >> i) & 1))
    verts.sort(key=lambda s: (len(s), sorted(s)))
    vpos = {S: i for i, S in enumerate(verts)}
    tcs = {}
    for S in verts:
        tcs[S] = tensor_many([Y if i in S else X for i in range(r)])
    Ytc = tensor_many([Y] * r)
    big, incls, projs = direct_sum([tcs[S].complex for S in verts])
    idX, idY = X.identity_map(), Y.identity_map()

    def edge_map(S, i):
        """C_S -> C_{S + i} applying f in slot i."""
        S2 = S | {i}
        maps = [(idY if j in S else (f if j == i else idX)) for j in range(r)]
        return tcs[S].map_tensor(maps, tcs[S2])

    rels = {}
    for S in verts:
        for i in range(r):
            if i in S:
                continue
            S2 = S | {i}
            if len(S2) == r:
                continue
            e = edge_map(S, i)
            dmap = incls[vpos[S2]].compose(e) - incls[vpos[S]]
            for d in tcs[S].complex.degrees():
                m = dmap.component(d)
                for c in range(tcs[S].complex.dim(d)):
                    v = m.column(c)
                    if v:
                        rels.setdefault(d, []).append(v)
    q = quotient_by_vectors(big, rels)
    Q = q.complex
    # canonical map to Y^{(x)r}: on vertex S apply f at every non-S slot
    comps = {}
    for S in verts:
        maps = [(idY if j in S else f) for j in range(r)]
        to_y = tcs[S].map_tensor(maps, Ytc)
        g = to_y.compose(projs[vpos[S]])
        for d, m in g.comps.items():
            if d in comps:
                comps[d] = comps[d] + m
            else:
                comps[d] = m
    full = ChainMap(big, Ytc.complex, comps, check=True)
    can_comps = {d: full.component(d) * q.section[d] for d in Q.degrees()}
    canonical = ChainMap(Q, Ytc.complex, can_comps, check=True)
    # symmetric group action: adjacent transpositions permute the slots
    sigma = []
    for t in range(r - 1):
        perm = list(range(r))
        perm[t], perm[t + 1] = perm[t + 1], perm[t]
        comps = {}
        for S in verts:
            S2 = frozenset(perm[i] for i in S)
            pm = tcs[S].permutation_map(tuple(perm), tcs[S2])
            g = incls[vpos[S2]].compose(pm).compose(projs[vpos[S]])
            for d, m in g.comps.items():
                comps[d] = comps[d] + m if d in comps else m
        act = ChainMap(big, big, comps, check=False)
        scomps = {}
        for d in Q.degrees():
            scomps[d] = (q.proj.component(d) * act.component(d)) * q.section[d]
        sigma.append(ChainMap(Q, Q, scomps, check=True))
    return Q, canonical, sigma
