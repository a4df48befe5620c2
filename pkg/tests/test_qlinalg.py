from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hochcat import qlinalg as ql
from hochcat.qlinalg import QMatrix


def dense_rank(rows):
    """Independent oracle: textbook Gaussian elimination on dense lists."""
    rows = [[Fraction(x) for x in r] for r in rows]
    if not rows:
        return 0
    ncols = len(rows[0])
    rk = 0
    col = 0
    r = 0
    while r < len(rows) and col < ncols:
        piv = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col] / pv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        col += 1
        rk += 1
    return rk


def test_rank_trivial_cases():
    assert ql.rank(QMatrix.zeros(3, 3)) == 0
    assert ql.rank(QMatrix.identity(5)) == 5
    assert ql.rank(QMatrix.from_rows([[1, 2], [2, 4]])) == 1


def test_rank_rationals():
    m = QMatrix.from_rows([[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), 2]])
    assert ql.rank(m) == 2
    singular = QMatrix.from_rows([[Fraction(1, 2), Fraction(1, 3)], [Fraction(3, 2), 1]])
    assert ql.rank(singular) == 1


small_entries = st.integers(min_value=-4, max_value=4).map(
    lambda n: Fraction(n, 1) if n % 2 == 0 else Fraction(n, 3)
)


@settings(max_examples=60, deadline=None)
@given(
    st.integers(min_value=1, max_value=5),
    st.integers(min_value=1, max_value=5),
    st.data(),
)
def test_rank_matches_dense_oracle_and_transpose(nr, nc, data):
    rows = [[data.draw(small_entries) for _ in range(nc)] for _ in range(nr)]
    m = QMatrix.from_rows(rows)
    r = ql.rank(m)
    assert r == dense_rank(rows)
    assert r == ql.rank(m.transpose())
    assert r + len(ql.kernel_basis(m)) == nc


def test_kernel_and_image():
    m = QMatrix.from_rows([[1, 2, 3], [2, 4, 6]])
    ker = ql.kernel_basis(m)
    assert len(ker) == 2
    for v in ker:
        assert all(x == 0 for x in m.apply(v))
    img = ql.image_basis(m)
    assert len(img) == 1
    assert img[0] == (1, 2)


def test_solve():
    m = QMatrix.from_rows([[1, 1], [0, 1]])
    assert ql.solve(m, [3, 2]) == (1, 2)
    m2 = QMatrix.from_rows([[1, 0], [1, 0]])
    assert ql.solve(m2, [1, 2]) is None
    # free coordinates are pinned to zero
    m3 = QMatrix.from_rows([[1, 1]])
    assert ql.solve(m3, [5]) == (5, 0)


def test_cohomology_dims_zero_differentials():
    d0 = QMatrix.zeros(4, 2)
    d1 = QMatrix.zeros(8, 4)
    seg = ql.ComplexSegment([d0, d1])
    assert ql.cohomology_dims(seg) == [2, 4, 8]


def test_cohomology_dims_identity():
    d0 = QMatrix.identity(1)
    d1 = QMatrix.zeros(0, 1)
    seg = ql.ComplexSegment([d0, d1])
    assert ql.cohomology_dims(seg) == [0, 0, 0]


def test_not_a_complex_reports_entry():
    d0 = QMatrix.identity(2)
    d1 = QMatrix.identity(2)
    with pytest.raises(ql.NotAComplex) as exc:
        ql.ComplexSegment([d0, d1])
    assert exc.value.degree == 0


def test_exact_sequence_verdicts():
    # 0 -> V -> V -> 0
    assert ql.is_exact_sequence([QMatrix.identity(3)])
    # 0 -> Q -(1,1)^T-> Q^2 -(1,-1)-> Q -> 0
    f = QMatrix.from_rows([[1], [1]])
    g = QMatrix.from_rows([[1, -1]])
    assert ql.is_exact_sequence([f, g])
    # fails surjectivity at the right end
    h = QMatrix.from_rows([[1], [0]])
    v = ql.is_exact_sequence([h])
    assert not v and v.reason == "last map not surjective"


def test_exactness_invariant_under_basis_permutation():
    f = QMatrix.from_rows([[1], [1]])
    g = QMatrix.from_rows([[1, -1]])
    p = QMatrix.from_rows([[0, 1], [1, 0]])
    assert ql.is_exact_sequence([p * f, g * p.transpose()])


def test_quotient_representatives():
    sub = [(Fraction(1), Fraction(0), Fraction(0))]
    space = [
        (Fraction(1), Fraction(0), Fraction(0)),
        (Fraction(1), Fraction(1), Fraction(0)),
        (Fraction(0), Fraction(1), Fraction(0)),
    ]
    reps = ql.quotient_representatives(sub, space, 3)
    assert reps == [(1, 1, 0)]


def test_subspace_coords():
    s = ql.Subspace(3, [(1, 0, 1), (0, 1, 0)])
    assert s.coords((2, 3, 2)) == (2, 3)
    assert s.coords((0, 0, 1)) is None
