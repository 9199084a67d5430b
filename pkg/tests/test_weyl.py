import numpy as np
import pytest
from hypothesis import given, strategies as st

from dphlog.linalg import det_int
from dphlog.picard import PicClass, canonical_class, e, h, intersect
from dphlog.weyl import (
    apply,
    compose,
    generators,
    identity,
    inverse,
    orbit_with_witness,
    signature,
    simple_reflection,
    simple_root,
    word_element,
)

from conftest import random_word

LINES = {3: 6, 4: 10, 5: 16, 6: 27, 7: 56, 8: 240}
CONICS = {3: 3, 4: 5, 5: 10, 6: 27, 7: 126, 8: 2160}


@st.composite
def words(draw):
    r = draw(st.integers(3, 8))
    return r, draw(st.lists(st.integers(1, r), max_size=25))


def test_simple_root_r_is_h_minus_three_points():
    # alpha_r = h - e1 - e2 - e3 has square -2; 3h - ... would not
    a = PicClass.from_vector(simple_root(5, 5).tolist())
    assert a == h(5) - e(1, 5) - e(2, 5) - e(3, 5)
    assert intersect(a, a) == -2
    assert intersect(a, canonical_class(5)) == 0


def test_cremona_reflection_actions():
    r = 6
    s = simple_reflection(r, r)
    assert apply(s, h(r)) == 2 * h(r) - e(1, r) - e(2, r) - e(3, r)
    assert apply(s, e(1, r)) == h(r) - e(2, r) - e(3, r)
    assert apply(s, e(4, r)) == e(4, r)


def test_transposition_reflection():
    s1 = simple_reflection(1, 5)
    assert apply(s1, e(1, 5)) == e(2, 5)
    assert apply(s1, e(2, 5)) == e(1, 5)
    assert apply(s1, h(5)) == h(5)


@pytest.mark.parametrize("r", range(3, 9))
def test_generators_are_involutions_of_determinant_minus_one(r):
    K = canonical_class(r)
    for i, s in enumerate(generators(r), start=1):
        assert compose(s, s) == identity(r)
        assert signature(s) == -1 == det_int(s.matrix.tolist())
        assert inverse(s) == s
        assert apply(s, K) == K


def test_out_of_range_index():
    with pytest.raises(IndexError):
        simple_reflection(0, 4)
    with pytest.raises(IndexError):
        simple_reflection(5, 4)


def test_composition_determinant():
    assert signature(compose(simple_reflection(1, 4), simple_reflection(2, 4))) == 1
    assert signature(identity(7)) == 1


@given(words())
def test_signature_is_determinant_and_word_parity(data):
    r, word = data
    w = word_element(word, r)
    assert signature(w) == det_int(w.matrix.tolist()) == (-1) ** len(word)
    assert compose(w, inverse(w)) == identity(r)


def test_form_preserved_on_random_triples(rng):
    for _ in range(1000):
        r = int(rng.integers(3, 9))
        w = word_element(random_word(rng, r, int(rng.integers(0, 20))), r)
        a = PicClass(r, int(rng.integers(-5, 6)), tuple(int(x) for x in rng.integers(-4, 5, size=r)))
        b = PicClass(r, int(rng.integers(-5, 6)), tuple(int(x) for x in rng.integers(-4, 5, size=r)))
        assert intersect(apply(w, a), apply(w, b)) == intersect(a, b)
        assert apply(w, canonical_class(r)) == canonical_class(r)


def test_word_element_applies_left_to_right():
    r = 4
    x = e(1, r)
    w = word_element([1, 2], r)
    assert apply(w, x) == apply(simple_reflection(2, r), apply(simple_reflection(1, r), x))
    assert w == simple_reflection(2, r) @ simple_reflection(1, r)


@pytest.mark.parametrize("r", range(3, 9))
def test_stabilizers(r):
    c1 = h(r) - e(1, r)
    for i in range(2, r + 1):
        assert apply(simple_reflection(i, r), c1) == c1
    if r > 3:
        for i in range(1, r + 1):
            if i != r - 1:
                assert apply(simple_reflection(i, r), e(r, r)) == e(r, r)


@pytest.mark.parametrize("r", range(3, 9))
def test_orbit_sizes_and_witnesses(r):
    for seed, expected in ((e(1, r), LINES[r]), (h(r) - e(1, r), CONICS[r])):
        table = orbit_with_witness(seed)
        assert len(table) == expected
        assert len(set(table.elements)) == expected
        assert table.elements == sorted(table.elements)
        step = max(1, expected // 60)
        for x, word in list(zip(table.elements, table.witness))[::step]:
            w = word_element(word, r)
            assert apply(w, seed) == x
            assert signature(w) == (-1) ** len(word)


def test_orbit_bound_is_enforced():
    with pytest.raises(RuntimeError):
        orbit_with_witness(e(1, 8), bound=100)


def test_orbit_json_shape():
    data = orbit_with_witness(e(1, 3)).to_json()
    assert data["seed"] == [0, -1, 0, 0]
    assert len(data["elements"]) == len(data["witness"]) == 6
    assert data["witness"][data["elements"].index([0, -1, 0, 0])] == []


def test_matrix_is_read_only():
    w = simple_reflection(1, 4)
    with pytest.raises(ValueError):
        w.matrix[0, 0] = 5
