import random
from fractions import Fraction

import pytest

from nhkoszul.linalg import (
    Matrix,
    Subspace,
    kernel_basis,
    quotient_space,
    rank_mod_p,
    rref,
    subspace_intersect,
    vec,
)


def rand_matrix(rng, nrows, ncols, lo=-4, hi=4):
    return Matrix(
        [[Fraction(rng.randint(lo, hi)) for _ in range(ncols)] for _ in range(nrows)],
        ncols=ncols,
    )


def test_kernel_identity_is_zero():
    assert kernel_basis(Matrix.identity(3)).dim == 0


def test_kernel_zero_map_is_full():
    k = kernel_basis(Matrix.zero(2, 3))
    assert k.dim == 3
    assert k == Subspace.full(3)


def test_kernel_rank_one():
    # [[1,1],[2,2]] has null space spanned by (1,-1); canonical form has
    # leading entry 1.
    k = kernel_basis(Matrix([[1, 1], [2, 2]]))
    assert k.basis == (vec([1, -1]),)


def test_rank_plus_nullity(seed=0):
    rng = random.Random(seed)
    for _ in range(30):
        m = rand_matrix(rng, rng.randint(0, 6), rng.randint(1, 6))
        assert m.rank() + kernel_basis(m).dim == m.ncols


def test_intersect_idempotent():
    u = Subspace(3, [[1, 0, 2], [0, 1, 1]])
    assert subspace_intersect(u, u) == u


def test_intersect_transverse_lines():
    u = Subspace(2, [[1, 0]])
    w = Subspace(2, [[1, 1]])
    assert subspace_intersect(u, w).dim == 0


def test_intersect_coordinate_planes():
    u = Subspace(3, [[1, 0, 0], [0, 1, 0]])
    w = Subspace(3, [[0, 1, 0], [0, 0, 1]])
    assert subspace_intersect(u, w) == Subspace(3, [[0, 1, 0]])


def test_intersect_dimension_formula(seed=1):
    rng = random.Random(seed)
    for _ in range(25):
        n = rng.randint(1, 6)
        u = Subspace(n, rand_matrix(rng, rng.randint(0, n), n).rows)
        w = Subspace(n, rand_matrix(rng, rng.randint(0, n), n).rows)
        cap = subspace_intersect(u, w)
        assert cap.dim == u.dim + w.dim - u.sum(w).dim
        assert u.contains_space(cap) and w.contains_space(cap)


def test_quotient_by_zero_is_identity():
    v = Subspace.full(3)
    q = quotient_space(v, Subspace.zero(3))
    assert q.dim == 3
    assert q.projection == Matrix.identity(3)


def test_quotient_by_everything():
    v = Subspace.full(2)
    q = quotient_space(v, v)
    assert q.dim == 0


def test_quotient_kills_diagonal():
    v = Subspace.full(3)
    w = Subspace(3, [[1, 1, 1]])
    q = quotient_space(v, w)
    assert q.dim == 2
    assert q.projection.apply(vec([1, 1, 1])) == (Fraction(0), Fraction(0))
    assert (q.projection @ q.section) == Matrix.identity(2)
    # kernel of the projection is exactly W here (V is the full space)
    assert q.projection.kernel() == w


def test_quotient_of_proper_subspace():
    v = Subspace(3, [[1, 0, 1], [0, 1, 0]])
    w = Subspace(3, [[1, 1, 1]])
    q = quotient_space(v, w)
    assert q.dim == 1
    assert (q.projection @ q.section) == Matrix.identity(1)
    for b in w.basis:
        assert all(x == 0 for x in q.projection.apply(b))
    # section lands in V
    assert v.contains(q.section.transpose().rows[0])


def test_quotient_requires_containment():
    with pytest.raises(ValueError):
        quotient_space(Subspace(2, [[1, 0]]), Subspace(2, [[0, 1]]))


def test_canonical_bases_are_pivot_order_independent(seed=2):
    rng = random.Random(seed)
    for _ in range(20):
        n = rng.randint(1, 5)
        rows = rand_matrix(rng, rng.randint(1, 5), n).rows
        shuffled = list(rows)
        rng.shuffle(shuffled)
        scaled = [tuple(Fraction(3) * x for x in r) for r in shuffled]
        assert Subspace(n, rows) == Subspace(n, scaled)


def test_rref_known_value():
    pivots, rows = rref([vec([2, 4, 6]), vec([1, 2, 4])], 3)
    assert pivots == [0, 2]
    assert rows == [vec([1, 2, 0]), vec([0, 0, 1])]


def test_solve_and_inverse():
    a = Matrix([[2, 1], [1, 1]])
    x = a.solve(vec([3, 2]))
    assert a.apply(x) == vec([3, 2])
    inv = a.inverse()
    assert a @ inv == Matrix.identity(2)


def test_solve_unsolvable_returns_none():
    a = Matrix([[1, 0], [1, 0]])
    assert a.solve(vec([1, 2])) is None


def test_kron_shapes_and_values():
    a = Matrix([[1, 2]])
    b = Matrix([[0, 1], [1, 0]])
    k = a.kron(b)
    assert k.shape == (2, 4)
    assert k.rows[0] == vec([0, 1, 0, 2])


def test_rank_mod_p_matches_rational_rank(seed=3):
    rng = random.Random(seed)
    for _ in range(20):
        m = rand_matrix(rng, rng.randint(1, 5), rng.randint(1, 5), lo=-3, hi=3)
        # 32003 is large enough that random small-integer matrices do not
        # drop rank mod p.
        assert rank_mod_p(m, 32003) == m.rank()


def test_bit_cap_triggers(monkeypatch):
    monkeypatch.setenv("NHKOSZUL_MAX_BITS", "8")
    from nhkoszul.linalg import BitSizeExceeded

    big = Matrix([[10**9, 1], [1, 10**9]])
    with pytest.raises(BitSizeExceeded):
        big.rank()
