import random

import pytest

from opcalc.fields import QQ
from opcalc.matrix import Matrix, rank
from opcalc.chain import (
    ChainComplex, ChainMap, homology, is_quasi_iso, tensor_many,
    unit_complex, zero_complex, zero_map, direct_sum, cone,
)
from opcalc.cube import (
    CommutingSquare, tensor_square, pushout, pushout_corner_map,
    punctured_cube_colimit,
)

from helpers import random_complex, random_invertible


def injective_map(rng, C, extra=2):
    """C -> C (+) (padding) with a random change of basis: always injective."""
    pad, _ = random_complex(rng, d_lo=C.d_min, d_hi=max(C.d_max, C.d_min),
                            spheres=1, disks=extra)
    S, incls, projs = direct_sum([C, pad])
    # twist the target by an automorphism
    comps = {}
    for d, n in S.dims.items():
        comps[d] = random_invertible(QQ, n, rng)
    # enforce chain-map property by conjugating the differential instead:
    # simpler: use the plain inclusion (already injective)
    return incls[0], S


def test_corner_f1_identity_is_iso():
    rng = random.Random(0)
    M, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    A, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    B, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    f2, SB = injective_map(rng, A)
    sq = tensor_square(M.identity_map(), f2)
    corner = pushout_corner_map(sq)
    assert corner.is_iso()


def test_corner_f2_identity_is_iso():
    rng = random.Random(1)
    M, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    A, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    f1, SN = injective_map(rng, M)
    sq = tensor_square(f1, A.identity_map())
    corner = pushout_corner_map(sq)
    assert corner.is_iso()


def test_noncommuting_square_rejected():
    C = unit_complex(QQ, 0)
    one = C.identity_map()
    two = ChainMap(C, C, {0: Matrix.from_rows(QQ, 1, 1, [[2]])})
    with pytest.raises(ValueError):
        CommutingSquare(one, one, one, two)


@pytest.mark.parametrize("seed", range(6))
def test_corner_injective_for_injective_inputs(seed):
    rng = random.Random(seed + 100)
    M, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    A, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    f1, _ = injective_map(rng, M)
    f2, _ = injective_map(rng, A)
    sq = tensor_square(f1, f2)
    corner = pushout_corner_map(sq)
    assert corner.is_injective()


def test_corner_quasi_iso_when_f1_is():
    rng = random.Random(42)
    M, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    A, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    # f1 = inclusion of M into M (+) acyclic: injective quasi-iso
    acyc = cone(unit_complex(QQ, 1).identity_map())
    S, incls, _ = direct_sum([M, acyc])
    f1 = incls[0]
    assert is_quasi_iso(f1)
    f2, _ = injective_map(rng, A)
    corner = pushout_corner_map(tensor_square(f1, f2))
    assert corner.is_injective()
    assert is_quasi_iso(corner)


def test_punctured_cube_r1():
    rng = random.Random(2)
    X, _ = random_complex(rng, d_hi=2, spheres=1, disks=1)
    f, _ = injective_map(rng, X)
    Q, can, sigma = punctured_cube_colimit(f, 1)
    assert Q.dims == X.dims
    # canonical map agrees with f under the identification
    assert homology(Q) == homology(X)
    assert sigma == []


def test_punctured_cube_zero_source():
    Y = unit_complex(QQ, 1)
    f = zero_map(zero_complex(QQ), Y)
    Q, can, sigma = punctured_cube_colimit(f, 2)
    assert Q.is_zero()


def test_punctured_cube_r2_injective():
    rng = random.Random(3)
    X, _ = random_complex(rng, d_hi=1, spheres=1, disks=1)
    f, Y = injective_map(rng, X, extra=1)
    Q, can, sigma = punctured_cube_colimit(f, 2)
    assert all(rank(can.component(d)) == Q.dim(d) for d in Q.degrees())
    # cokernel of the canonical map is (Y/X) (x) (Y/X)
    from opcalc.chain import quotient_by_vectors
    rels = {d: [f.component(d).column(c) for c in range(X.dim(d))]
            for d in X.degrees()}
    YX = quotient_by_vectors(Y, rels).complex
    T = tensor_many([YX, YX]).complex
    Yr = can.target
    rels2 = {d: [can.component(d).column(c) for c in range(Q.dim(d))]
             for d in Q.degrees()}
    cok = quotient_by_vectors(Yr, rels2).complex
    assert {d: cok.dim(d) for d in cok.degrees()} == \
        {d: T.dim(d) for d in T.degrees()}
    for s in sigma:
        s.assert_chain_map()
        assert s.compose(s).comps == Q.identity_map().comps
