import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from stochgdl.encoder import encode
from stochgdl.lp2cnf import CnfFormula
from stochgdl.pipeline import to_xssat
from stochgdl.xssat import (CHANCE, EXISTS, FORALL, FormatError, PrefixError, XssatFormula, evaluate, read_xssat,
                            write_xssat)

from oracles import naive_xssat, random_xssat


def F(prefix, clauses, n=None):
    n = n if n is not None else max([v for v, _, _ in prefix] + [0])
    return XssatFormula(prefix, CnfFormula(n, clauses))


def test_examples():
    assert evaluate(F([(1, EXISTS, None)], [[1]])) == 1
    assert evaluate(F([(1, CHANCE, Fraction(1, 2))], [[1]])) == Fraction(1, 2)
    assert evaluate(F([(1, FORALL, None), (2, EXISTS, None)], [[1, 2], [-1, -2]])) == 1
    assert evaluate(F([(2, EXISTS, None), (1, FORALL, None)], [[1, 2], [-1, -2]])) == 0


def test_unit_propagation_cases():
    # chance unit clause scales the value; universal unit clause zeroes it
    f = F([(1, EXISTS, None), (2, CHANCE, Fraction(1, 3))], [[2], [1, -2]])
    assert evaluate(f) == Fraction(1, 3)
    assert evaluate(F([(1, EXISTS, None), (2, FORALL, None)], [[1], [2]])) == 0
    assert evaluate(F([(1, EXISTS, None)], [[]])) == 0


def test_uncovered_variable():
    with pytest.raises(PrefixError):
        evaluate(F([(1, EXISTS, None)], [[1, 2]], n=2))


@st.composite
def formulas(draw):
    seed = draw(st.integers(0, 2 ** 32))
    return random_xssat(random.Random(seed), max_vars=10, max_clauses=25)


@settings(max_examples=200, deadline=None)
@given(formulas())
def test_matches_naive(f):
    expected = naive_xssat(f)
    assert evaluate(f) == expected
    assert evaluate(f, use_cache=False) == expected
    assert 0 <= expected <= 1


@settings(max_examples=100, deadline=None)
@given(formulas())
def test_existential_only_is_sat(f):
    f = XssatFormula([(v, EXISTS, None) for v, _, _ in f.prefix], f.clauses)
    value = evaluate(f)
    assert value in (0, 1)
    assert value == naive_xssat(f)


@settings(max_examples=100, deadline=None)
@given(formulas(), st.integers(0, 100))
def test_universal_to_existential_never_decreases(f, pick):
    universals = [i for i, (_, q, _) in enumerate(f.prefix) if q == FORALL]
    if not universals:
        return
    i = universals[pick % len(universals)]
    g = list(f.prefix)
    g[i] = (g[i][0], EXISTS, None)
    assert evaluate(XssatFormula(g, f.clauses)) >= evaluate(f)


def test_read_examples():
    f = read_xssat("p xssat 1 1\ne 1 0\n1 0\n")
    assert f.prefix == [(1, EXISTS, None)] and f.clauses.clauses == [[1]]
    f = read_xssat("p xssat 2 1\ne 1 0\nr 1/3 2 0\n1 -2 0\n")
    assert f.prefix[1] == (2, CHANCE, Fraction(1, 3))


@pytest.mark.parametrize("text, line", [
    ("e 1 0\n", 1),
    ("p xssat 1 1\ne 1 0\n1 2 0\n", 3),
    ("p xssat 1 1\nr 1/x 1 0\n1 0\n", 2),
    ("p xssat 1 2\ne 1 0\n1 0\n", 3),
    ("p xssat 1 1\ne 1 0\n1\n", 3),
])
def test_format_errors(text, line):
    with pytest.raises(FormatError) as e:
        read_xssat(text)
    assert e.value.line == line


def test_round_trip_toy(toy):
    for method in ("baseline", "dependency"):
        f, _ = to_xssat(encode(toy, 1, "x", "o", method))
        text = write_xssat(f)
        again = read_xssat(text)
        assert write_xssat(again) == text
        assert evaluate(again) == Fraction(2, 3)


@settings(max_examples=50, deadline=None)
@given(formulas())
def test_round_trip_random(f):
    text = write_xssat(f)
    assert write_xssat(read_xssat(text)) == text
