import random

import pytest

from orbitcoh.intlinalg import (
    ChainComplex,
    HomologySummary,
    IntMatrix,
    InvalidComplex,
    NoIntegerSolution,
    NonUnique,
    elementary_divisors,
    hstack,
    homology,
    homology_mod2,
    kernel_basis,
    kron,
    lattice_contains,
    matrix_rank,
    rank_mod2,
    row_hermite,
    same_lattice,
    smith_normal_form,
    solve_unique,
    unimodular_inverse,
)


def det(m: IntMatrix) -> int:
    # cofactor expansion; only used on small unimodular factors in tests
    n = m.rows
    if n == 0:
        return 1
    if n == 1:
        return m.data[0][0]
    total = 0
    for j in range(n):
        x = m.data[0][j]
        if x:
            minor = IntMatrix(
                n - 1, n - 1,
                [[m.data[i][k] for k in range(n) if k != j] for i in range(1, n)])
            total += (-1) ** j * x * det(minor)
    return total


def check_snf(a: IntMatrix):
    u, d, v = smith_normal_form(a)
    assert u.mul(a).mul(v) == d
    assert abs(det(u)) == 1
    assert abs(det(v)) == 1
    diag = [d.data[i][i] for i in range(min(d.rows, d.cols))]
    for i in range(d.rows):
        for j in range(d.cols):
            if i != j:
                assert d.data[i][j] == 0
    nz = [x for x in diag if x]
    assert all(x > 0 for x in nz)
    for x, y in zip(nz, nz[1:]):
        assert y % x == 0
    assert diag[len(nz):] == [0] * (len(diag) - len(nz))
    return diag


def test_snf_hand_example():
    # row/column elimination by hand gives diag(2, 4)
    diag = check_snf(IntMatrix(2, 2, [[2, 4], [6, 8]]))
    assert diag == [2, 4]


def test_snf_identity_and_zero():
    assert check_snf(IntMatrix.identity(3)) == [1, 1, 1]
    assert check_snf(IntMatrix(2, 2)) == [0, 0]


def test_snf_random_matrices():
    rng = random.Random(7)
    for _ in range(60):
        r = rng.randrange(1, 5)
        c = rng.randrange(1, 5)
        a = IntMatrix(r, c, [[rng.randrange(-8, 9) for _ in range(c)] for _ in range(r)])
        diag = check_snf(a)
        assert elementary_divisors(a) == [x for x in diag if x]


def test_solve_unique_examples():
    assert solve_unique(IntMatrix(1, 1, [[2]]), [4]) == [2]
    # 2x2 elimination: x + y = 2, x - y = 0
    assert solve_unique(IntMatrix(2, 2, [[1, 1], [1, -1]]), [2, 0]) == [1, 1]
    with pytest.raises(NoIntegerSolution):
        solve_unique(IntMatrix(1, 1, [[2]]), [3])
    with pytest.raises(NonUnique):
        solve_unique(IntMatrix(1, 2, [[1, 1]]), [2])
    with pytest.raises(NoIntegerSolution):
        solve_unique(IntMatrix(2, 1, [[1], [1]]), [1, 2])


def test_kernel_basis_examples():
    assert kernel_basis(IntMatrix(1, 2, [[1, 1]])) == [[1, -1]]
    assert kernel_basis(IntMatrix.identity(2)) == []
    # gcd reduction: saturated kernel of [[2, 4]] is spanned by (2, -1)
    assert kernel_basis(IntMatrix(1, 2, [[2, 4]])) == [[2, -1]]


def test_kernel_is_saturated():
    rng = random.Random(11)
    for _ in range(40):
        r, c = rng.randrange(1, 4), rng.randrange(1, 5)
        a = IntMatrix(r, c, [[rng.randrange(-6, 7) for _ in range(c)] for _ in range(r)])
        ker = kernel_basis(a)
        for vec in ker:
            assert all(x == 0 for x in a.apply(vec))
        assert len(ker) == c - matrix_rank(a)
        if ker:
            # saturation: Hermite pivots of the kernel have gcd content 1 per
            # SNF of the stacked basis (all invariant factors are 1)
            b = IntMatrix.from_rows(ker, c)
            assert elementary_divisors(b) == [1] * len(ker)


def test_homology_point_and_shифt():
    point = ChainComplex([1], {})
    assert homology(point).groups == ((1, ()),)
    # Z -> Z with zero map
    two = ChainComplex([1, 1], {1: IntMatrix(1, 1, [[0]])})
    assert homology(two).groups == ((1, ()), (1, ()))


def test_homology_square_graph():
    # simplicial chain of a 4-cycle: 4 vertices, 4 edges
    d1 = IntMatrix(4, 4, [
        [-1, 0, 0, 1],
        [1, -1, 0, 0],
        [0, 1, -1, 0],
        [0, 0, 1, -1],
    ])
    c = ChainComplex([4, 4], {1: d1})
    h = homology(c)
    assert h.betti(0) == 1 and h.betti(1) == 1
    assert h.is_free()


def test_homology_torsion_rp2():
    # cellular chain of RP^2: one cell in degrees 0,1,2
    c = ChainComplex([1, 1, 1], {1: IntMatrix(1, 1, [[0]]), 2: IntMatrix(1, 1, [[2]])})
    h = homology(c)
    assert h.groups == ((1, ()), (0, (2,)), (0, ()))
    assert homology_mod2(c) == [1, 1, 1]


def test_invalid_complex_rejected():
    with pytest.raises(InvalidComplex):
        ChainComplex([1, 1, 1], {1: IntMatrix(1, 1, [[1]]), 2: IntMatrix(1, 1, [[1]])})


def test_hermite_and_lattice_equality():
    h = row_hermite([[2, 0], [0, 2], [1, 1]], 2)
    assert h == [[1, 1], [0, 2]]
    assert same_lattice([[2, 0], [1, 1]], [[1, 1], [2, 0], [3, 1]], 2)
    assert not same_lattice([[2, 0]], [[1, 0]], 2)
    assert lattice_contains(h, [3, 1])
    assert not lattice_contains(h, [1, 0])


def test_unimodular_inverse():
    m = IntMatrix(2, 2, [[2, 1], [1, 1]])
    inv = unimodular_inverse(m)
    assert m.mul(inv) == IntMatrix.identity(2)


def test_kron_and_stack():
    a = IntMatrix(1, 2, [[1, 2]])
    b = IntMatrix(2, 1, [[3], [4]])
    k = kron(a, b)
    assert k.data == [[3, 6], [4, 8]]
    assert hstack([a, a]).data == [[1, 2, 1, 2]]


def test_rank_mod2():
    a = IntMatrix(2, 2, [[1, 0], [0, 3]])
    assert rank_mod2(a) == 2
    assert rank_mod2(IntMatrix(2, 2, [[2, 1], [0, 3]])) == 1
    assert rank_mod2(IntMatrix(2, 2, [[2, 4], [6, 8]])) == 0


def test_summary_str():
    s = HomologySummary(((1, ()), (0, (2,))))
    assert "H_0=Z" in str(s) and "Z/2" in str(s)
