from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from sierpinski_fvm.errors import InvalidLetterError
from sierpinski_fvm.simplex import (
    MeasureSpec,
    SimplexSpace,
    apply_contraction,
    apply_word,
    cell_barycenter,
    cell_corner_coords,
    cell_measure,
    index_word,
    vertex_coords,
    vertex_count,
    vertex_count_recursive,
    word_index,
    word_str,
    words,
)

dims = st.integers(min_value=2, max_value=6)


@pytest.fixture(params=[3, 4])
def space(request):
    return SimplexSpace.regular(request.param)


def test_regular_simplex_has_unit_edges():
    for d in range(2, 7):
        P = SimplexSpace.regular(d).points
        assert P.shape == (d, d - 1)
        dist = np.linalg.norm(P[:, None] - P[None, :], axis=2)
        assert np.allclose(dist[~np.eye(d, dtype=bool)], 1.0)


def test_degenerate_points_rejected():
    with pytest.raises(ValueError):
        SimplexSpace(3, np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]))
    with pytest.raises(ValueError):
        SimplexSpace(3, np.zeros((3, 3)))


def test_contraction_examples():
    s3 = SimplexSpace.regular(3)
    P = s3.points
    assert np.allclose(apply_contraction(s3, 1, P[0]), P[0])
    assert np.allclose(apply_contraction(s3, 2, P[0]), (P[0] + P[1]) / 2)
    s4 = SimplexSpace.regular(4)
    assert np.allclose(apply_contraction(s4, 4, s4.points[3]), s4.points[3])


@pytest.mark.parametrize("bad", [0, 4, -1])
def test_contraction_rejects_bad_letter(bad):
    s3 = SimplexSpace.regular(3)
    with pytest.raises(InvalidLetterError):
        apply_contraction(s3, bad, s3.points[0])


def test_barycenter_examples():
    s = SimplexSpace.regular(3)
    c, P0 = s.centroid, s.points[0]
    assert np.allclose(cell_barycenter(s, ()), c)
    assert np.allclose(cell_barycenter(s, (1,)), (c + P0) / 2)
    assert np.allclose(cell_barycenter(s, (1, 1)), (c + 3 * P0) / 4)


def test_leftmost_letter_is_outermost():
    s = SimplexSpace.regular(3)
    x = s.centroid
    expected = apply_contraction(s, 1, apply_contraction(s, 2, x))
    assert np.allclose(apply_word(s, (1, 2), x), expected)


@pytest.mark.parametrize("d,m,n", [(3, 0, 3), (3, 2, 15), (4, 1, 10)])
def test_vertex_count_examples(d, m, n):
    assert vertex_count(d, m) == n


@given(dims, st.integers(min_value=1, max_value=12))
def test_vertex_count_recurrence(d, m):
    assert vertex_count(d, m) == d * vertex_count(d, m - 1) - d * (d - 1) // 2
    assert vertex_count(d, m) == vertex_count_recursive(d, m)


def test_vertex_count_matches_geometry():
    for d, m in [(3, 2), (4, 2), (5, 1)]:
        assert vertex_count(d, m) == len(oracles.vertex_set(d, m))


def test_vertex_count_overflow_detected():
    with pytest.raises(OverflowError):
        vertex_count(3, 60)


@pytest.mark.parametrize("d,m,mu", [(3, 0, Fraction(1)), (3, 2, Fraction(1, 9)), (4, 3, Fraction(1, 64))])
def test_cell_measure_examples(d, m, mu):
    assert cell_measure(d, m) == mu


@given(dims, st.integers(min_value=0, max_value=5))
def test_cell_measures_sum_to_one(d, m):
    assert sum(cell_measure(d, m) for _ in words(d, m)) == 1


@given(st.integers(min_value=2, max_value=5), st.data())
def test_contraction_halves_distances(d, data):
    s = SimplexSpace.regular(d)
    coords = st.lists(st.floats(-10, 10), min_size=d - 1, max_size=d - 1)
    x, y = np.array(data.draw(coords)), np.array(data.draw(coords))
    i = data.draw(st.integers(1, d))
    lhs = np.linalg.norm(apply_contraction(s, i, x) - apply_contraction(s, i, y))
    assert abs(lhs - np.linalg.norm(x - y) / 2) <= 1e-12 * max(1.0, np.linalg.norm(x - y))


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_touching_point_identity(d):
    s = SimplexSpace.regular(d)
    for i in range(1, d + 1):
        for j in range(1, d + 1):
            if i != j:
                a = apply_contraction(s, i, s.points[j - 1])
                b = apply_contraction(s, j, s.points[i - 1])
                assert np.allclose(a, b, atol=1e-12)


@given(dims, st.integers(min_value=0, max_value=4), st.data())
def test_word_index_roundtrip(d, m, data):
    k = data.draw(st.integers(0, d**m - 1))
    w = index_word(d, m, k)
    assert len(w) == m
    assert word_index(d, w) == k


def test_words_are_lexicographic():
    ws = list(words(3, 2))
    assert ws == sorted(ws)
    assert [word_index(3, w) for w in ws] == list(range(9))
    assert word_index(3, (3, 3)) == 8


def test_word_str():
    assert word_str((1, 2, 3)) == "123"
    assert word_str(()) == ""
    assert word_str((1, 12)) == "1.12"


def test_measure_spec_standard():
    for d in (2, 3, 4):
        mu = MeasureSpec.standard(d)
        assert mu.is_standard
        assert all(w == 1 / d for w in mu.weights)
        assert abs(mu.hausdorff_dim - np.log(d) / np.log(2)) < 1e-15


def test_measure_spec_from_ratios():
    mu = MeasureSpec.from_ratios([0.5, 0.3, 0.25])
    assert abs(sum(mu.weights) - 1) <= 1e-12
    for w, r in zip(mu.weights, mu.ratios):
        assert abs(w - r**mu.hausdorff_dim) <= 1e-12
    assert not mu.is_standard


def test_measure_spec_validation():
    with pytest.raises(ValueError):
        MeasureSpec((0.5, 0.6), (0.5, 0.5), 1.0)
    with pytest.raises(ValueError):
        MeasureSpec((0.5, 0.5), (0.5, 1.2), 1.0)


@pytest.mark.parametrize("d,m", [(3, 2), (4, 2), (3, 3)])
def test_integer_corners_match_rational_oracle(d, m):
    coords = cell_corner_coords(d, m)
    for k, w in enumerate(words(d, m)):
        exact = oracles.corners(d, w)
        for j in range(d):
            assert tuple(Fraction(int(v), 2**m) for v in coords[k, j]) == exact[j]
            assert vertex_coords(d, w, j, m) == tuple(int(v) for v in coords[k, j])
