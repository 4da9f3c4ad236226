import pytest

from stochgdl.corpus import GAMES_DIR
from stochgdl.gdl import (Compound, Literal, ParseError, Rule, ValidityError, Variable, format_program,
                          parse_gdl, parse_gdl_file, predicate, validate, with_random_opponent)
from stochgdl.semantics import GameSemantics

TOY_TEXT = (GAMES_DIR / "toy.gdl").read_text()
GAME_FILES = sorted(GAMES_DIR.glob("*.gdl"))


def test_fact():
    (r,) = parse_gdl("role(x).").rules
    assert r == Rule(Compound("role", ("x",)), ())
    assert r.is_fact


def test_rule_with_body():
    (r,) = parse_gdl("next(win):- does(x,le), does(random, a).").rules
    assert r.head == Compound("next", ("win",))
    assert r.body == (Literal(Compound("does", ("x", "le"))), Literal(Compound("does", ("random", "a"))))


def test_empty_input():
    assert parse_gdl("").rules == []
    assert parse_gdl("% only a comment\n").rules == []


def test_negation_variables_integers():
    (r,) = parse_gdl("goal(P, 100) :- player(P), not wins(P), count(-3).").rules
    assert r.head == Compound("goal", (Variable("P"), 100))
    assert not r.body[1].positive
    assert r.body[2].atom.args == (-3,)


def test_choice_and_constraint_syntax():
    rules = parse_gdl("{p(1)} :- q. :- p(1), not q.").rules
    assert rules[0].choice and rules[0].head == Compound("p", (1,))
    assert rules[1].head is None


@pytest.mark.parametrize("text, line, col", [
    ("role(x", 1, 7),
    ("role(x)).", 1, 8),
    ("role(x).\nlegal(x, a) :- .", 2, 16),
    ("role(X).", 1, 1),
    ("role(x). ?", 1, 10),
])
def test_parse_errors_have_positions(text, line, col):
    with pytest.raises(ParseError) as e:
        parse_gdl(text)
    assert (e.value.line, e.value.column) == (line, col)


def test_toy_is_valid():
    report = validate(parse_gdl(TOY_TEXT))
    assert set(report.roles) == {"x", "o", "random"}
    assert report.rule_count == len(parse_gdl(TOY_TEXT).rules)


MUTANTS = [
    ("true(step(0)).", "true only in bodies"),
    ("does(x,le).", "does only in bodies"),
    ("q :- role(x).", "role only in facts"),
    ("role(Y) :- base(Y).", "role only in facts"),
    ("q :- next(win).", "next only in heads"),
    ("q :- init(step(0)).", "init only in heads"),
    ("legal(x,le) :- does(o,noop).", "legal depends on does"),
    ("terminal :- does(x,le).", "terminal depends on does"),
    ("goal(x,0) :- does(x,ri).", "goal depends on does"),
    ("init(win) :- true(step(0)).", "init depends on true or does"),
    ("p :- not q, true(win). q :- not p, true(win). next(win) :- p.", "not stratified"),
    ("next(F) :- not true(F).", "unsafe rule"),
]


@pytest.mark.parametrize("extra, restriction", MUTANTS)
def test_single_violation_mutants(extra, restriction):
    with pytest.raises(ValidityError) as e:
        validate(parse_gdl(TOY_TEXT + "\n" + extra))
    assert e.value.restriction == restriction


def test_role_count_and_random():
    with pytest.raises(ValidityError) as e:
        validate(parse_gdl(TOY_TEXT.replace("role(o).", "")))
    assert e.value.restriction == "exactly three roles required"
    with pytest.raises(ValidityError) as e:
        validate(parse_gdl(TOY_TEXT.replace("role(random).", "role(nature).")))
    assert e.value.restriction == "missing random role"


@pytest.mark.parametrize("path", GAME_FILES, ids=lambda p: p.stem)
def test_corpus_files_valid_and_round_trip(path):
    p = parse_gdl_file(path)
    validate(p)
    again = parse_gdl(format_program(p.rules))
    assert again.rules == p.rules
    assert again.roles == p.roles


def test_random_opponent_transform():
    g = parse_gdl_file(GAMES_DIR / "tictactoe.gdl")
    t = with_random_opponent(g, "oplayer")
    validate(t)
    sem = GameSemantics(t)
    assert sem.move_domain("oplayer") == ["noop"]
    s = sem.init()
    assert len(sem.legal("xplayer", s)) == 9 and sem.legal("random", s) == ["noop"]
    s = sem.update({"xplayer": Compound("mark", (1, 1)), "oplayer": "noop", "random": "noop"}, s)
    assert len(sem.legal("random", s)) == 8
    assert sem.legal("xplayer", s) == ["noop"]
    # the transformed game never consults the opponent's moves
    assert not any(predicate(l.atom) == ("does", 2) and l.atom.args[0] == "oplayer"
                   for r in t.rules for l in r.body)
