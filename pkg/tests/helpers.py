"""Shared fixtures: random bounded complexes with known homology."""

import random

from opcalc.fields import QQ
from opcalc.matrix import Matrix
from opcalc.chain import ChainComplex


def random_invertible(field, n, rng):
    """Product of random elementary matrices (exactly invertible)."""
    m = Matrix.identity(field, n)
    for _ in range(2 * n):
        kind = rng.random()
        i = rng.randrange(n)
        j = rng.randrange(n)
        if kind < 0.5 and i != j:
            # add multiple of row j to row i
            e = Matrix.identity(field, n)
            e.rows.setdefault(i, {})[j] = field(rng.randint(-2, 2))
            if e.rows[i].get(j) == field.zero:
                e.rows[i].pop(j, None)
            m = e * m
        else:
            e = Matrix.identity(field, n)
            e.rows[i][i] = field(rng.choice([1, -1, 2]))
            m = e * m
    return m


def random_complex(rng, field=QQ, d_lo=0, d_hi=4, spheres=2, disks=3,
                   twist=True):
    """Direct sum of spheres and disks in random degrees, then a random
    degreewise change of basis.  Returns (complex, betti_dict)."""
    dims = {}
    betti = {}
    disk_list = []
    for _ in range(spheres):
        d = rng.randint(d_lo, d_hi)
        dims[d] = dims.get(d, 0) + 1
        betti[d] = betti.get(d, 0) + 1
    for _ in range(disks):
        d = rng.randint(d_lo + 1, d_hi)
        disk_list.append((d, dims.get(d, 0), dims.get(d - 1, 0)))
        dims[d] = dims.get(d, 0) + 1
        dims[d - 1] = dims.get(d - 1, 0) + 1
    diffs = {}
    for d, src, tgt in disk_list:
        m = diffs.setdefault(d, Matrix.zero(field, dims.get(d - 1, 0),
                                            dims.get(d, 0)))
        m.rows.setdefault(tgt, {})[src] = field.one
    if twist:
        changes = {d: random_invertible(field, n, rng)
                   for d, n in dims.items()}
        inv = {}
        for d, P in changes.items():
            from opcalc.matrix import solve_matrix
            inv[d] = solve_matrix(P, Matrix.identity(field, P.nrows))
        newdiffs = {}
        for d, m in diffs.items():
            lo = changes.get(d - 1)
            hi = inv.get(d)
            mm = m
            if hi is not None:
                mm = mm * hi
            if lo is not None:
                mm = lo * mm
            newdiffs[d] = mm
        diffs = newdiffs
    return ChainComplex(field, dims, diffs), betti
