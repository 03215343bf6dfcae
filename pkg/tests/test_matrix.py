import random

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from opcalc.fields import QQ, GF, parse_field
from opcalc.matrix import Matrix, rank, kernel_basis, solve, solve_matrix, echelonize


def M(field, dense):
    return Matrix.from_rows(field, len(dense), len(dense[0]) if dense else 0, dense)


def test_field_parse():
    assert parse_field("Q") == QQ
    assert parse_field("Fp:5") == GF(5)
    assert parse_field("F2") == GF(2)
    with pytest.raises(ValueError):
        parse_field("Fp:6")


def test_fp_arithmetic():
    F5 = GF(5)
    assert F5.add(3, 4) == 2
    assert F5.inv(2) == 3
    assert F5(Fraction(1, 2)) == 3


def test_rank_empty():
    A = Matrix.zero(QQ, 0, 0)
    assert rank(A) == 0


def test_rank_identity():
    assert rank(Matrix.identity(QQ, 3)) == 3


def test_rank_dependent_rows():
    # hand elimination: second row is twice the first
    A = M(QQ, [[1, 2], [2, 4]])
    assert rank(A) == 1


def test_kernel_identity():
    K = kernel_basis(Matrix.identity(QQ, 4))
    assert K.ncols == 0


def test_kernel_zero_matrix():
    K = kernel_basis(Matrix.zero(QQ, 2, 3))
    assert K.ncols == 3
    assert rank(K) == 3


def test_kernel_f2():
    # [[1,1,0]] over F_2: kernel is 2-dimensional, enumerate F_2^3 to check
    F2 = GF(2)
    A = M(F2, [[1, 1, 0]])
    K = kernel_basis(A)
    assert K.ncols == 2
    kvecs = set()
    for x0 in (0, 1):
        for x1 in (0, 1):
            v = {}
            for r in range(3):
                w = (F2.mul(K[r, 0], x0) + F2.mul(K[r, 1], x1)) % 2
                if w:
                    v[r] = w
            if not A.apply(v):
                kvecs.add(tuple(sorted(v.items())))
    # all 4 combinations of basis columns are in the kernel
    assert len(kvecs) == 4
    brute = set()
    for x in range(8):
        v = {r: (x >> r) & 1 for r in range(3) if (x >> r) & 1}
        if not A.apply(v):
            brute.add(tuple(sorted(v.items())))
    assert kvecs == brute


def test_solve_identity():
    A = Matrix.identity(QQ, 3)
    b = [5, Fraction(1, 2), 0]
    x = solve(A, b)
    assert x == {0: Fraction(5), 1: Fraction(1, 2)}


def test_solve_underdetermined():
    A = M(QQ, [[1, 2]])
    x = solve(A, [3])
    assert x is not None
    # verify by substitution
    assert A.apply(x) == {0: Fraction(3)}


def test_solve_no_solution_f2():
    F2 = GF(2)
    A = M(F2, [[0]])  # 2 = 0 in F_2
    assert solve(A, [1]) is None


def test_solve_matrix():
    A = M(QQ, [[2, 0], [0, 3]])
    B = Matrix.identity(QQ, 2)
    X = solve_matrix(A, B)
    assert A * X == B


def test_matmul_and_transpose():
    A = M(QQ, [[1, 2], [3, 4]])
    B = M(QQ, [[0, 1], [1, 0]])
    assert (A * B).to_dense() == [[2, 1], [4, 3]]
    assert A.transpose().to_dense() == [[1, 3], [2, 4]]


def test_echelon_reduce_residue():
    ech = echelonize(QQ, [{0: Fraction(1), 1: Fraction(2)}], 3)
    res, coeffs = ech.reduce({0: Fraction(2), 1: Fraction(4), 2: Fraction(1)})
    assert res == {2: Fraction(1)}
    assert coeffs == {0: Fraction(2)}


def _random_matrix(field, nrows, ncols, rng, density=0.4):
    entries = []
    for r in range(nrows):
        for c in range(ncols):
            if rng.random() < density:
                entries.append((r, c, field(rng.randint(-3, 3))))
    return Matrix.from_entries(field, nrows, ncols, entries)


@pytest.mark.parametrize("seed", range(8))
@pytest.mark.parametrize("fld", [QQ, GF(2), GF(5)])
def test_rank_nullity_and_pivot_orders(fld, seed):
    rng = random.Random(seed)
    A = _random_matrix(fld, rng.randint(0, 6), rng.randint(0, 6), rng)
    r1 = rank(A, strategy="lex")
    r2 = rank(A, strategy="sparse")
    assert r1 == r2
    K = kernel_basis(A)
    assert r1 + K.ncols == A.ncols
    assert (A * K).is_zero()


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.integers(0, 4), st.integers(0, 10**6))
def test_solve_satisfies_system(nr, nc, seed):
    rng = random.Random(seed)
    A = _random_matrix(QQ, nr, nc, rng)
    xs = {c: Fraction(rng.randint(-2, 2)) for c in range(nc)}
    b = A.apply(xs)
    x = solve(A, b)
    assert x is not None
    assert A.apply(x) == b
