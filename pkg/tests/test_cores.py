import itertools
import random

import pytest

from soergel_bases.coxeter import dihedral
from soergel_bases.cores import (EMPTY, Braid, Interval, Jw, MoveTuple, a_of_x, core_decomposition,
                                 f_tuple, gf_tuple, n_of, t_intervals)
from soergel_bases.errors import NotReduced, SoergelError


def test_interval_conventions():
    assert Interval(3, 2) == Interval(5, 1) == EMPTY
    assert len(Interval(2, 4)) == 3
    assert Interval(2, 3).issubset(Interval(1, 4))
    assert str(Interval(2, 3)) == "[[2,3]]"


def test_t_intervals():
    assert t_intervals((0, 1, 2)) == [Interval(1, 2), Interval(2, 3)]
    assert t_intervals((0, 1, 0)) == [Interval(1, 3)]
    assert t_intervals(()) == [EMPTY]


def test_a_of_x(ws4, ws_rank3):
    W = ws4.system
    assert a_of_x(W, "srsr") == [Interval(1, 4)]
    assert a_of_x(W, "s") == [Interval(1, 1)]
    W3 = ws_rank3.system
    A = a_of_x(W3, "srsrtst")
    assert Interval(1, 4) in A and Interval(4, 7) in A


def test_core_decompositions(ws4, ws5):
    dec = core_decomposition(ws4.system, "srs")
    assert dec.gcores == [Interval(2, 2)] and dec.elgcores == [] and dec.cores == []
    dec = core_decomposition(ws4.system, "srsr")
    assert dec.cores == [Interval(2, 3)]
    assert dec.classification[Interval(2, 3)] == "filled"
    dec = core_decomposition(ws5.system, "srsr")
    assert dec.elgcores == [Interval(2, 3)] and dec.cores == []
    with pytest.raises(NotReduced):
        core_decomposition(ws4.system, "ss")


def test_example_word_cores(ws_rank3):
    dec = core_decomposition(ws_rank3.system, "srsrtst")
    assert dec.cores == [Interval(2, 3), Interval(5, 6)]
    assert dec.classification == {Interval(2, 3): "filled", Interval(5, 6): "left"}


def test_n_of():
    assert n_of(MoveTuple((0, 1, 0, 1), []), Interval(2, 3)) == 0
    assert n_of(MoveTuple((0, 1, 0, 1), [Braid(0, 4), Braid(0, 4)]), Interval(2, 3)) == 2
    assert n_of(MoveTuple((0, 1, 0, 1), [Jw(0, 4)]), Interval(2, 3)) == 1


def test_tuples(ws4, ws5, ws_rank3):
    assert f_tuple(ws4.system, "srs").moves == []
    assert f_tuple(ws4.system, "srsr").moves == [Braid(0, 4), Braid(0, 4)]
    assert gf_tuple(ws4.system, "srsr").moves == [Braid(0, 4), Braid(0, 4)]
    assert gf_tuple(ws5.system, "srsr").moves == [Jw(0, 4)]
    assert gf_tuple(ws5.system, "srs").moves == []
    W3 = ws_rank3.system
    tup = f_tuple(W3, "srsrtst")
    assert tup.final_word(W3) == W3.parse_word("srsrtst")
    for C in core_decomposition(W3, "srsrtst").cores:
        assert n_of(tup, C) > 0


def test_bad_move_rejected(ws4):
    with pytest.raises(SoergelError):
        MoveTuple((0, 1, 0), [Braid(0, 4)]).steps(ws4.system)


def reduced_words(W, max_len):
    for n in range(1, max_len + 1):
        for w in itertools.product(range(W.rank), repeat=n):
            if all(a != b for a, b in zip(w, w[1:])) and W.is_reduced(w):
                yield w


def test_cores_inside_elgcores_and_rex_independent(ws_rank3):
    W = ws_rank3.system
    rng = random.Random(11)
    words = list(reduced_words(W, 8))
    for w in rng.sample(words, 150):
        dec = core_decomposition(W, w)
        assert set(dec.cores) <= set(dec.elgcores)
        assert dec.cores == sorted(dec.cores)
        for a, b in zip(dec.cores, dec.cores[1:]):
            assert a.b < b.a
        other = core_decomposition(W, rng.choice(W.rex_set(W.element(w))))
        assert other.cores == dec.cores


def test_f_tuples_are_compatible(ws_rank3):
    W = ws_rank3.system
    for w in ["srsr", "srsrt", "tsrsr", "srsrtst", "rtrtsr"]:
        word = W.parse_word(w)
        tup = f_tuple(W, word)
        assert tup.final_word(W) == word
        gtup = gf_tuple(W, word)
        assert gtup.final_word(W) == word
