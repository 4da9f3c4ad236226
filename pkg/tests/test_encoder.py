import itertools
from fractions import Fraction

import pytest

from stochgdl.corpus import GAMES_DIR
from stochgdl.cli import prepare
from stochgdl.encoder import (CHANCE, EXISTS, FORALL, ActionOrdering, build_pc, build_plegal, build_po, build_pr,
                              build_prefix, encode, game_domains, temporal_extension)
from stochgdl.gdl import Compound, Literal, Rule, parse_gdl, parse_gdl_file, predicate, rule_str, term_str
from stochgdl.grounder import ConstraintViolation, ground, stable_model
from stochgdl.pipeline import to_xssat
from stochgdl.xssat import evaluate

C = Compound


def strs(rules):
    return [rule_str(r) for r in rules]


def test_temporal_extension_toy(toy):
    rules = temporal_extension(toy, 1)
    assert Rule(C("true", (C("step", (0,)), 0))) in rules
    assert strs(rules).count("true(step(0),0).") == 1
    assert "true(win,1) :- does(x,le,0), does(random,a,0)." in strs(rules)
    assert "terminal(1) :- not true(step(0),1)." in strs(rules)


def test_temporal_extension_horizon_zero(toy):
    rules = temporal_extension(toy, 0)
    assert "true(win,1) :- does(x,le,0), does(random,a,0)." in strs(rules)
    assert not any(r.head is not None and isinstance(r.head, C) and r.head.args[-1] == 1
                   and predicate(r.head)[0] != "true" for r in rules)


def test_pc_toy(toy):
    roles, domains = game_domains(toy)
    rules = strs(build_pc(roles, domains, "x", 1))
    assert "{does(x,le,0)} :- not ended(0)." in rules
    assert "{does(x,ri,0)} :- not ended(0)." in rules
    assert rules.count(":- does(x,le,0), does(x,ri,0).") == 1
    assert ":- not ended(0), not does(x,le,0), not does(x,ri,0)." in rules
    assert ":- not legal(x,le,0), does(x,le,0)." in rules
    assert rules.count(":- not ended(1).") == 1
    assert ":- not goal(x,100,1), ended(1), not ended(0)." in rules
    assert ":- not goal(x,100,0), ended(0)." in rules
    assert "ended(1) :- ended(0)." in rules and "ended(0) :- terminal(0)." in rules


def constraint_bits(rules):
    out = {}
    for r in rules:
        if r.head is None:
            act = r.body[0].atom.args[1]
            out[act] = [(l.atom.args[0], l.positive) for l in r.body if predicate(l.atom) == ("dec_o", 2)]
    return out


def test_po_bit_patterns():
    three = constraint_bits(build_po(ActionOrdering("o", ("a", "b", "c")), 1))
    assert three["b"] == [(1, True), (2, False)]
    assert three["a"] == [(1, False), (2, False)]
    four = constraint_bits(build_po(ActionOrdering("o", ("a", "b", "c", "d")), 1))
    assert four["d"] == [(1, True), (2, True)]
    assert build_po(ActionOrdering("o", ("noop",)), 3) == []
    choice = [r for r in build_po(ActionOrdering("o", tuple("abcde")), 1) if r.choice]
    assert strs(choice) == ["{dec_o(1,0)}.", "{dec_o(2,0)}.", "{dec_o(3,0)}."]


def test_plegal_toy():
    rules = build_plegal(ActionOrdering("random", ("a", "b", "c")), 1)
    assert "succ(a,b)." in strs(rules) and "succ(b,c)." in strs(rules)
    facts = [Rule(C("legal", ("random", a, 0))) for a in "abc"]
    gp = ground(rules + facts)
    model = {gp.atoms[i] for i in stable_model(gp)}
    assert C("tol", (3, 0)) in model
    assert [a for a in model if predicate(a) == ("tol", 2)] == [C("tol", (3, 0))]


def test_plegal_single_action():
    rules = build_plegal(ActionOrdering("random", ("noop",)), 1)
    assert len(rules) == 1 + 3      # cdom(1) plus rules for the first count step and tol
    for legal in ([], [Rule(C("legal", ("random", "noop", 0)))]):
        gp = ground(rules + legal)
        tol = [gp.atoms[i] for i in stable_model(gp) if predicate(gp.atoms[i]) == ("tol", 2)]
        assert tol == [C("tol", (len(legal), 0))]


def test_pr_toy():
    rules = build_pr(ActionOrdering("random", ("a", "b", "c")), 1)
    assert strs([r for r in rules if r.choice]) == ["{dec_r(1,0)}.", "{dec_r(2,0)}.", "{dec_r(3,0)}."]
    pairs = [(r.body[4].atom.args[0], r.body[-1].atom.args[0]) for r in rules if r.head is None]
    assert pairs == [(2, 1), (2, 2), (3, 1), (3, 2), (3, 3)]
    two = strs(build_pr(ActionOrdering("random", ("a", "b")), 1))
    assert (":- not does(random,A,0), legal(random,A,0), count(A,2,0), not ended(0), tol(2,0), dec_r(2,0)."
            in two)
    assert build_pr(ActionOrdering("random", ("noop",)), 2) == []


# -- selection probability of the chance encoding -------------------------------------

ACTIONS = tuple(f"m{k}" for k in range(1, 7))


@pytest.mark.parametrize("legal", [ACTIONS[:i] for i in range(2, 7)] + [("m2", "m5"), ("m1", "m3", "m6")])
def test_uniform_selection(legal):
    """Weighted over all dec_r assignments, each legal move is forced with probability 1/i."""
    order = ActionOrdering("random", ACTIONS)
    rules = build_plegal(order, 1) + build_pr(order, 1)
    rules += [Rule(C("legal", ("random", a, 0))) for a in legal]
    rules += [Rule(C("does", ("random", a, 0)), (), choice=True) for a in ACTIONS]
    gp = ground(rules)
    dec = [C("dec_r", (k, 0)) for k in range(1, 7)]
    weight = {a: Fraction(0) for a in ACTIONS}
    none = Fraction(0)
    for bits in itertools.product((True, False), repeat=6):
        w = Fraction(1)
        for k, b in enumerate(bits, 1):
            w *= Fraction(1, k) if b else 1 - Fraction(1, k)
        chosen = [d for d, b in zip(dec, bits) if b]
        ok = []
        for a in ACTIONS:
            try:
                stable_model(gp, chosen + [C("does", ("random", a, 0))])
                ok.append(a)
            except ConstraintViolation:
                pass
        if len(ok) == len(ACTIONS):
            none += w
        else:
            assert len(ok) == 1
            weight[ok[0]] += w
    assert none == 0
    assert {a: w for a, w in weight.items() if w} == {a: Fraction(1, len(legal)) for a in legal}


# -- prefixes ----------------------------------------------------------------------

def blocks_by_level(sq):
    out = {}
    for q in sq.prefix:
        out.setdefault(q.level, []).append((term_str(sq.program.atoms[q.atom]), q.quantifier, q.probability))
    return out


def test_toy_baseline_prefix(toy):
    sq = encode(toy, 1, "x", "o", "baseline")
    b = blocks_by_level(sq)
    assert b[0] == [("does(x,le,0)", EXISTS, None), ("does(x,ri,0)", EXISTS, None)]
    assert 1 not in b        # no opponent bits
    assert b[2] == [("does(o,noop,0)", EXISTS, None)]
    assert b[3] == [("dec_r(1,0)", CHANCE, 1), ("dec_r(2,0)", CHANCE, Fraction(1, 2)),
                    ("dec_r(3,0)", CHANCE, Fraction(1, 3))]
    rest = {a for a, _, _ in b[4]}
    assert {"does(random,a,0)", "does(random,b,0)", "does(random,c,0)", "true(win,1)", "legal(x,le,0)"} <= rest
    assert set(b) == {0, 2, 3, 4}


def test_toy_dependency_prefix(toy):
    sq = encode(toy, 1, "x", "o", "dependency")
    level = {term_str(sq.program.atoms[q.atom]): q.level for q in sq.prefix}
    assert level["legal(x,le,0)"] == 0
    assert level["true(win,1)"] == 4
    assert level["does(random,a,0)"] == 4


def test_toy_value_both_methods(toy):
    for method in ("baseline", "dependency"):
        f, _ = to_xssat(encode(toy, 1, "x", "o", method))
        assert evaluate(f) == Fraction(2, 3)


PREFIX_GAMES = [("toy.gdl", "adversary", 1), ("nim_3.gdl", "adversary", 5), ("stictactoe_p1_2.gdl", "adversary", 3),
                ("tictactoe.gdl", "random", 3)]


@pytest.mark.parametrize("name, opponent, n", PREFIX_GAMES)
def test_prefix_invariants(name, opponent, n):
    program, x, o = prepare(parse_gdl_file(GAMES_DIR / name), "first", opponent)
    base = encode(program, n, x, o, "baseline")
    dep = build_prefix(base.program, n, "dependency", x, o)
    for prefix in (base.prefix, dep):
        assert sorted(q.atom for q in prefix) == list(range(len(base.program.atoms)))
        levels = [q.level for q in prefix]
        assert levels == sorted(levels)
        for q in prefix:
            a = base.program.atoms[q.atom]
            if q.quantifier == FORALL:
                assert q.level % 4 == 1 and predicate(a) == ("dec_o", 2)
            elif q.quantifier == CHANCE:
                assert q.level % 4 == 3 and q.probability == Fraction(1, a.args[0])
            else:
                assert q.level % 2 == 0 and q.level <= 4 * n
    base_level = {q.atom: q.level for q in base.prefix}
    assert all(q.level <= base_level[q.atom] for q in dep)


def test_reserved_predicates_rejected(toy):
    text = (GAMES_DIR / "toy.gdl").read_text() + "\nended :- true(win).\n"
    with pytest.raises(ValueError):
        encode(parse_gdl(text), 1, "x", "o")
