import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from cyclint.words import (EMPTY, EvenWord, UnimodularMatrix, WordError, as_word, concat, has_cube,
                           pair_matrix, periodic_stream, power, primitive_exponent, reverse, rotate,
                           tau, theorem1_stream, thue_morse_blocks, thue_morse_identities,
                           thue_morse_prefix, word_length, word_matrix)


def brute_matrix(entries):
    m = [[1, 0], [0, 1]]
    for k in entries:
        m = [[m[0][0] * k + m[0][1], m[0][0]], [m[1][0] * k + m[1][1], m[1][0]]]
    return m


def brute_exponent(entries):
    best = 1
    for n in range(1, len(entries) + 1):
        if len(entries) % n == 0 and (len(entries) // n) % 2 == 0:
            p = len(entries) // n
            if list(entries) == list(entries[:p]) * n:
                best = max(best, n)
    return best


even_words = st.integers(0, 6).flatmap(
    lambda r: st.lists(st.integers(1, 9), min_size=2 * r, max_size=2 * r)).map(lambda e: EvenWord(tuple(e)))
nonempty_words = even_words.filter(bool)


def test_word_matrix_examples():
    assert word_matrix(EMPTY).tolist() == [[1, 0], [0, 1]]
    assert word_matrix((1, 1)).tolist() == [[2, 1], [1, 1]]
    assert word_matrix((2, 1, 2, 1)).tolist() == [[11, 8], [4, 3]]
    assert brute_matrix((2, 1, 2, 1)) == [[11, 8], [4, 3]]


def test_lengths_and_exponents():
    assert [word_length(w) for w in [(), (1, 1), (2, 1, 2, 1)]] == [0, 1, 2]
    assert primitive_exponent((1, 1)) == 1
    assert primitive_exponent((1, 1, 1, 1)) == 2
    assert primitive_exponent((2, 1, 2, 1, 2, 1)) == 3
    # (1,2,1,2,1,2) has period (1,2) of even length 2 -> exponent 3
    assert primitive_exponent((1, 2) * 3) == 3
    with pytest.raises(WordError, match="empty"):
        primitive_exponent(EMPTY)


def test_concat_power_reverse_examples():
    w = EvenWord((3, 1))
    assert concat(EMPTY, w) == w
    assert power((1, 1), 2) == EvenWord((1, 1, 1, 1))
    assert concat((2, 1), (1, 2)) == EvenWord((2, 1, 1, 2))
    assert reverse((2, 1)) == EvenWord((1, 2))
    assert reverse((1, 2, 2, 1)) == EvenWord((1, 2, 2, 1))
    assert reverse(reverse((3, 1, 4, 1))) == EvenWord((3, 1, 4, 1))
    assert rotate((1, 2, 3, 4)) == EvenWord((3, 4, 1, 2))


def test_parse_and_validation():
    assert EvenWord.parse("2, 1,2,1") == EvenWord((2, 1, 2, 1))
    assert EvenWord.parse("") == EMPTY
    with pytest.raises(WordError, match="word length must be even"):
        EvenWord.parse("1")
    with pytest.raises(WordError, match="'x'"):
        EvenWord.parse("1,x")
    with pytest.raises(WordError, match="'0'"):
        EvenWord.parse("1,0")
    with pytest.raises(WordError):
        EvenWord((1, -2))


def test_unimodular_matrix():
    with pytest.raises(ValueError):
        UnimodularMatrix(1, 1, 1, 1)
    g = word_matrix((2, 1, 3, 4))
    assert (g @ g.inverse()) == UnimodularMatrix.identity()
    assert g ** 3 == g @ g @ g
    assert g ** -1 == g.inverse()
    assert g.inverse_image_of_infinity() == Fraction(-g.d, g.c)
    assert g.apply(g.apply_inverse(Fraction(3, 7))) == Fraction(3, 7)
    assert g.apply(None) == Fraction(g.a, g.c)


@given(nonempty_words)
def test_det_and_positivity(w):
    g = word_matrix(w)
    assert g.det == 1
    assert min(g.a, g.b, g.c, g.d) >= 0 and g.c >= 1
    assert g.tolist() == brute_matrix(w.entries)


@given(even_words, even_words)
def test_matrix_is_homomorphism(v, w):
    assert word_matrix(concat(v, w)) == word_matrix(v) @ word_matrix(w)
    assert word_length(concat(v, w)) == word_length(v) + word_length(w)


@given(nonempty_words)
def test_exponent_matches_brute_force(w):
    assert primitive_exponent(w) == brute_exponent(w.entries)


@settings(max_examples=50)
@given(st.integers(1, 3).flatmap(lambda r: st.lists(st.integers(1, 3), min_size=2 * r, max_size=2 * r)),
       st.integers(1, 4))
def test_exponent_of_powers(entries, n):
    w = EvenWord(tuple(entries))
    if len(w) * n > 12:
        n = max(1, 12 // len(w))
    base = brute_exponent(w.entries)
    if base == 1:
        assert primitive_exponent(power(w, n)) == n


def test_thue_morse_prefixes():
    v, w = EvenWord((1, 1)), EvenWord((2, 2))
    assert thue_morse_prefix(v, w, 0) == v
    assert thue_morse_prefix(v, w, 1) == v + w
    assert thue_morse_prefix(v, w, 2) == v + w + w + v
    assert thue_morse_prefix(v, w, 3) == v + w + w + v + w + v + v + w
    assert tau(thue_morse_blocks(2)) == thue_morse_blocks(2, start=1)
    with pytest.raises(WordError):
        thue_morse_prefix(v, w, -1)


@pytest.mark.parametrize("n", range(1, 9))
def test_thue_morse_identities(n):
    split_ok, mirror_ok = thue_morse_identities((1, 1), (2, 2), n)
    assert split_ok
    assert mirror_ok is (True if n % 2 == 0 else None)


def test_thue_morse_literal_split_form_is_wrong():
    # h^2(V) = VWWV, while h(V) h(V) = VWVW: the second factor must be h^{n-1}(W)
    blocks = thue_morse_blocks(2)
    assert blocks != thue_morse_blocks(1) + thue_morse_blocks(1)
    assert blocks == thue_morse_blocks(1) + thue_morse_blocks(1, start=1)


@pytest.mark.parametrize("n", range(0, 9))
def test_thue_morse_cubefree(n):
    assert not has_cube(thue_morse_blocks(n))


def test_has_cube_detects_cubes():
    assert has_cube((0, 0, 0))
    assert has_cube((1, 0, 1, 0, 1, 0, 1))
    assert not has_cube((0, 0, 1, 0, 0))


def test_periodic_stream_examples():
    s = periodic_stream(EMPTY, (1, 1))
    assert s.take_quotients(6) == [1] * 6
    assert periodic_stream((2, 1), (1, 1)).take_quotients(5) == [2, 1, 1, 1, 1]
    assert periodic_stream(EMPTY, (2, 2)).take_quotients(4) == [2, 2, 2, 2]
    with pytest.raises(WordError):
        periodic_stream(EMPTY, EMPTY)


def test_theorem1_stream_examples():
    s = theorem1_stream([EMPTY], [(1, 1)], ["n"])
    words = s.take(3, "words")
    assert words == [EvenWord((1, 1)), EvenWord((1, 1) * 2), EvenWord((1, 1) * 3)]
    s = theorem1_stream([EMPTY, EMPTY], [(1, 1), (2, 2)], ["n", "n"])
    assert s.take(2, "words")[1] == EvenWord((1, 1, 1, 1, 2, 2, 2, 2))
    s = theorem1_stream([(3, 1)], [(1, 1)], ["n"])
    assert s.take(2, "words")[1] == EvenWord((3, 1, 1, 1, 1, 1))
    fam = s.meta["family"]
    assert fam.k_prime == 1
    assert fam.a_total(3) == 3 + 6
    assert fam.limit_weights() == [1.0]


def test_theorem1_schedules_and_errors():
    fam = theorem1_stream([EMPTY], [(1, 1)], ["sqrt"]).meta["family"]
    assert [fam.exponent(0, n) for n in (1, 2, 4, 5, 9, 10)] == [1, 2, 2, 3, 3, 4]
    fam = theorem1_stream([EMPTY], [(1, 1)], ["log"]).meta["family"]
    assert [fam.exponent(0, n) for n in (1, 2, 3, 4, 8)] == [1, 2, 2, 3, 4]
    fam = theorem1_stream([EMPTY, EMPTY], [(1, 1), (2, 2)], ["n", "log"]).meta["family"]
    assert fam.limit_weights() == [1.0, 0.0]
    with pytest.raises(WordError, match="schedule"):
        theorem1_stream([EMPTY], [(1, 1)], ["cube"])
    with pytest.raises(WordError):
        theorem1_stream([EMPTY], [EMPTY], ["n"])
    with pytest.raises(WordError, match="assert_growth"):
        theorem1_stream([EMPTY], [(1, 1)], [lambda n: n])
    s = theorem1_stream([EMPTY], [(1, 1)], [lambda n: 2 * n], assert_growth=True)
    assert len(s.take(1, "words")[0]) == 4


def test_stream_bound_enforced():
    s = periodic_stream(EMPTY, (30, 1))
    with pytest.raises(WordError, match="alphabet bound"):
        s.take(1)


@given(st.integers(0, 10_000))
@settings(max_examples=25)
def test_pair_view_preserves_entries(seed):
    from cyclint.words import random_stream
    s = random_stream(seed)
    words = s.take(8, "words")
    flat = [k for w in words for k in w]
    pairs = s.take(len(flat) // 2, "pairs")
    assert [k for p in pairs for k in p] == flat


def test_drop_first_and_mean_length():
    s = periodic_stream((2, 1), (1, 1, 3, 3))
    assert s.drop_first().take_quotients(4) == [1, 1, 3, 3]
    assert s.mean_word_length(3) == pytest.approx(5 / 3)


def test_as_word():
    assert as_word("1,2") == EvenWord((1, 2))
    assert as_word([1, 2]) == EvenWord((1, 2))
    assert list(itertools.islice(iter(EvenWord((1, 2))), 2)) == [1, 2]
