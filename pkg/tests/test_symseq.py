import itertools
import random

import pytest

from opcalc.fields import QQ, GF
from opcalc.matrix import Matrix, rank
from opcalc.chain import (
    ChainComplex, ChainMap, homology, tensor_many, unit_complex, zero_map,
)
from opcalc.symseq import (
    SymRep, SymSeq, SymSeqMap, trivial_rep, unit_seq, coinvariants,
    set_partitions, compose, compose_map, level_truncate, truncation_map,
    assoc_iso, adjacent_word, perm_compose,
)

from helpers import random_complex


def regular_rep_sigma(field, n):
    """k[Sigma_n] in degree 0; basis = permutations in lexicographic order,
    transpositions act by postcomposition on values."""
    perms = sorted(itertools.permutations(range(n)))
    pos = {p: i for i, p in enumerate(perms)}
    C = ChainComplex(field, {0: len(perms)})
    gens = []
    for i in range(n - 1):
        t = list(range(n))
        t[i], t[i + 1] = t[i + 1], t[i]
        t = tuple(t)
        ent = [(pos[tuple(t[v] for v in p)], j, field.one)
               for j, p in enumerate(perms)]
        gens.append(ChainMap(C, C, {0: Matrix.from_entries(
            field, len(perms), len(perms), ent)}, check=False))
    return SymRep(n, C, gens)


def sign_rep(field, n, degree=0):
    C = ChainComplex(field, {degree: 1})
    neg = Matrix.from_rows(field, 1, 1, [[-1]])
    gens = [ChainMap(C, C, {degree: neg}, check=False) for _ in range(n - 1)]
    return SymRep(n, C, gens)


def com_seq(field, cap):
    levels = {n: trivial_rep(n, unit_complex(field, 0))
              for n in range(1, cap + 1)}
    return SymSeq(field, levels, cap)


def test_adjacent_word():
    for n in range(1, 5):
        for p in itertools.permutations(range(n)):
            word = adjacent_word(p)
            q = tuple(range(n))
            for i in reversed(word):
                t = list(range(n))
                t[i], t[i + 1] = t[i + 1], t[i]
                q = perm_compose(q, tuple(t))
            # sigma = t_{last} o ... o t_{first} applied to identity
            built = tuple(range(n))
            for i in word:
                t = list(range(n))
                t[i], t[i + 1] = t[i + 1], t[i]
                built = perm_compose(tuple(t), built)
            assert built == p or q == p


def test_symrep_validates_relations():
    C = ChainComplex(QQ, {0: 2})
    bad = ChainMap(C, C, {0: Matrix.from_rows(QQ, 2, 2, [[1, 1], [0, 1]])},
                   check=False)
    with pytest.raises(AssertionError):
        SymRep(2, C, [bad])


def test_regular_rep_relations():
    r = regular_rep_sigma(QQ, 3)
    assert r.is_monomial()
    # full orbit: applying (0 1) then (1 2) etc. realizes all of Sigma_3
    m = r.perm_map((1, 2, 0))
    assert rank(m.component(0)) == 6


def test_coinvariants_trivial_action():
    rng = random.Random(0)
    C, _ = random_complex(rng)
    r = trivial_rep(3, C)
    co = coinvariants(r)
    assert co.complex.dims == C.dims


def test_coinvariants_regular_rep():
    co = coinvariants(regular_rep_sigma(QQ, 2))
    assert co.complex.dims == {0: 1}
    co3 = coinvariants(regular_rep_sigma(QQ, 3))
    assert co3.complex.dims == {0: 1}


def test_coinvariants_koszul_sign_kills_odd_square():
    # V^{(x)2} for V = k in degree 1: swap acts by -1, coinvariants vanish
    V = unit_complex(QQ, 1)
    T = tensor_many([V, V])
    swap = T.permutation_map((1, 0))
    rep = SymRep(2, T.complex, [swap])
    co = coinvariants(rep)
    assert co.complex.is_zero()
    # same computation over F_2 does NOT vanish: the documented caveat
    V2 = unit_complex(GF(2), 1)
    T2 = tensor_many([V2, V2])
    rep2 = SymRep(2, T2.complex, [T2.permutation_map((1, 0))])
    assert coinvariants(rep2).complex.dims == {2: 1}


def test_coinvariants_match_averaging_over_Q():
    for n in (2, 3):
        rep = regular_rep_sigma(QQ, n)
        co = coinvariants(rep)
        # averaging idempotent has rank 1 on the regular representation
        perms = list(itertools.permutations(range(n)))
        avg = None
        for p in perms:
            m = rep.perm_map(p).component(0)
            avg = m if avg is None else avg + m
        assert rank(avg) == co.complex.dim(0)


def test_set_partitions_count():
    # Bell numbers 1, 1, 2, 5, 15, 52
    for s, bell in [(0, 1), (1, 1), (2, 2), (3, 5), (4, 15), (5, 52)]:
        assert len(list(set_partitions(s))) == bell


def test_compose_unit_laws():
    Y = com_seq(QQ, 4)
    U = unit_seq(QQ)
    left = compose(U, Y, 4)
    for s in range(1, 5):
        assert left.seq.dim(s, 0) == Y.dim(s, 0)
    right = compose(Y, U, 4)
    for s in range(1, 5):
        assert right.seq.dim(s, 0) == Y.dim(s, 0)


def test_compose_com_dims():
    # X = Y = trivial field at arities 1..3: dims count set partitions of
    # {1..s} into <= 3 blocks of size <= 3
    X = com_seq(QQ, 3)
    X = SymSeq(QQ, {n: X.levels[n] for n in (1, 2, 3)}, 10)
    res = compose(X, X, 3)
    assert res.seq.dim(1, 0) == 1
    assert res.seq.dim(2, 0) == 2
    assert res.seq.dim(3, 0) == 5


def test_compose_witness_partition():
    X = com_seq(QQ, 3)
    res = compose(X, X, 3)
    for s in range(1, 4):
        total = {}
        for sm in res.witness.summands[s]:
            assert sm.proj.compose(sm.incl).comps == \
                sm.incl.source.identity_map().comps
            for d in sm.incl.source.degrees():
                total[d] = total.get(d, 0) + sm.incl.source.dim(d)
        lvl = res.seq.level(s).complex
        assert total == dict(lvl.dims)


def test_compose_sigma_action_is_valid():
    # SymRep constructor inside compose checks the Coxeter relations; build a
    # case with signs: sign rep at arity 2 over a degree-1 generator
    levels = {1: trivial_rep(1, unit_complex(QQ, 0)),
              2: sign_rep(QQ, 2, degree=1)}
    X = SymSeq(QQ, levels, 8)
    res = compose(X, X, 4)
    assert res.seq.level(4) is not None


def test_compose_map_identity_and_zero():
    X = com_seq(QQ, 3)
    idm = SymSeqMap(X, X, {n: X.levels[n].complex.identity_map()
                           for n in X.levels})
    f, src, tgt = compose_map(idm, idm, 3)
    for s in range(1, 4):
        assert f.level(s).comps == \
            src.seq.level(s).complex.identity_map().comps
    zm = SymSeqMap(X, X, {})
    g, src2, _ = compose_map(idm, zm, 3)
    for s in range(1, 4):
        assert g.level(s).is_zero()


def test_compose_map_injective():
    # f: X -> X' a levelwise injection, g = id: induced map is injective
    X = com_seq(QQ, 3)
    big = {n: trivial_rep(n, ChainComplex(QQ, {0: 2})) for n in range(1, 4)}
    X2 = SymSeq(QQ, big, 10)
    inc = SymSeqMap(X, X2, {
        n: ChainMap(X.levels[n].complex, X2.levels[n].complex,
                    {0: Matrix.from_rows(QQ, 2, 1, [[1], [1]])}, check=False)
        for n in range(1, 4)})
    f, src, tgt = compose_map(inc, SymSeqMap(X, X, {
        n: X.levels[n].complex.identity_map() for n in X.levels}), 3)
    for s in range(1, 4):
        m = f.level(s)
        for d in src.seq.level(s).complex.degrees():
            assert rank(m.component(d)) == src.seq.dim(s, d)


def test_level_truncate():
    X = com_seq(QQ, 5)
    T = level_truncate(X, 2, 3)
    assert T.arities() == [2]
    with pytest.raises(ValueError):
        level_truncate(X, 3, 3)
    import math
    full = level_truncate(X, 1, math.inf)
    assert full.arities() == [1, 2, 3, 4, 5]


def test_truncation_maps_compose():
    import math
    X = com_seq(QQ, 5)
    inf = math.inf
    f32 = truncation_map(X, (3, inf), (2, inf))
    f21 = truncation_map(X, (2, inf), (1, inf))
    f31 = truncation_map(X, (3, inf), (1, inf))
    for s in range(1, 6):
        assert f21.level(s).compose(f32.level(s)).comps == \
            f31.level(s).comps


def test_assoc_iso_com():
    X = com_seq(QQ, 4)
    iso, lhs, rhs = assoc_iso(X, X, X, 4)
    for s in range(1, 5):
        L = lhs.seq.level(s).complex
        R = rhs.seq.level(s).complex
        assert dict(L.dims) == dict(R.dims)
        m = iso.level(s)
        assert m.is_iso()


def test_assoc_iso_graded_signs():
    # graded labels exercise the Koszul bookkeeping; SymSeqMap validation
    # checks equivariance, ChainMap validation checks d-compatibility
    levels = {1: trivial_rep(1, unit_complex(QQ, 0)),
              2: trivial_rep(2, unit_complex(QQ, 1)),
              3: sign_rep(QQ, 3, degree=2)}
    X = SymSeq(QQ, levels, 8)
    iso, lhs, rhs = assoc_iso(X, X, X, 4)
    for s in range(1, 5):
        assert iso.level(s).is_iso()


def test_compose_left_exactness():
    # short exact sequence of X's composed with Y stays levelwise exact
    A = com_seq(QQ, 3)   # sub: dims 1
    Bl = {n: trivial_rep(n, ChainComplex(QQ, {0: 2})) for n in range(1, 4)}
    B = SymSeq(QQ, Bl, 10)
    inc = SymSeqMap(A, B, {
        n: ChainMap(A.levels[n].complex, B.levels[n].complex,
                    {0: Matrix.from_rows(QQ, 2, 1, [[1], [0]])}, check=False)
        for n in range(1, 4)})
    quo = SymSeqMap(B, A, {
        n: ChainMap(B.levels[n].complex, A.levels[n].complex,
                    {0: Matrix.from_rows(QQ, 1, 2, [[0, 1]])}, check=False)
        for n in range(1, 4)})
    Y = com_seq(QQ, 3)
    idy = SymSeqMap(Y, Y, {n: Y.levels[n].complex.identity_map()
                           for n in Y.levels})
    fi, si, ti = compose_map(inc, idy, 3)
    fq, sq, tq_ = compose_map(quo, idy, 3)
    for s in range(1, 4):
        mi = fi.level(s)
        mq = fq.level(s)
        for d in set(si.seq.level(s).complex.degrees()):
            # composite zero, injective + surjective, dims add up
            assert (mq.compose(mi)).is_zero()
            assert rank(mi.component(d)) == si.seq.dim(s, d)
            assert rank(mq.component(d)) == tq_.seq.dim(s, d)
            assert si.seq.dim(s, d) + tq_.seq.dim(s, d) == ti.seq.dim(s, d)
