import pytest
from hypothesis import given, settings, strategies as st

from stochgdl.encoder import encode
from stochgdl.grounder import GroundProgram, GroundRule, ground
from stochgdl.gdl import parse_gdl
from stochgdl.lp2cnf import CycleError, check_tight, completion

from oracles import brute_force_stable_models, projected_cnf_models


def prog(atoms, normal=(), choice=(), constraints=()):
    idx = {a: i for i, a in enumerate(atoms)}

    def r(head, pos=(), neg=()):
        return GroundRule(None if head is None else idx[head], tuple(idx[a] for a in pos), tuple(idx[a] for a in neg))

    return GroundProgram(atoms, [r(*x) for x in normal], [r(*x) for x in choice], [r(None, *x) for x in constraints])


def projected_models(p):
    return projected_cnf_models(p)


def test_examples():
    assert projected_models(prog(["p", "q"], normal=[("p", (), ("q",))])) == {frozenset({0})}
    assert projected_models(prog(["p"], choice=[("p",)])) == {frozenset(), frozenset({0})}
    assert projected_models(prog(["x"], constraints=[((), ("x",))])) == set()


def test_tightness():
    with pytest.raises(CycleError) as e:
        check_tight(prog(["p"], normal=[("p", ("p",))]))
    assert e.value.cycle[0] == "p"
    check_tight(prog(["p", "q"], normal=[("p", ("q",)), ("q", (), ("p",))]))


def test_toy_encoding_is_tight(toy):
    check_tight(encode(toy, 1, "x", "o").program)


def test_fact_is_unit_clause():
    cnf, vm = completion(ground(parse_gdl("a. {c}. b :- c.")))
    assert [vm.atom_vars[0]] in cnf.clauses
    assert cnf.num_vars == 3 + 1


def test_shared_bodies_share_a_variable():
    p = prog(["a", "b", "c"], normal=[("a", ("c",)), ("b", ("c",))], choice=[("c",)])
    cnf, vm = completion(p)
    assert cnf.num_vars == 3 + 1 and len(vm.aux_vars) == 1


@st.composite
def tight_programs(draw):
    n = draw(st.integers(1, 12))
    normal, choice, constraints = [], [], []
    for _ in range(draw(st.integers(0, 20))):
        kind = draw(st.sampled_from(["normal", "normal", "choice", "constraint"]))
        if kind == "constraint":
            pos = draw(st.lists(st.integers(0, n - 1), max_size=3, unique=True))
            neg = draw(st.lists(st.integers(0, n - 1), max_size=2, unique=True))
            constraints.append(GroundRule(None, tuple(pos), tuple(neg)))
            continue
        h = draw(st.integers(0, n - 1))
        pos = draw(st.lists(st.integers(0, h - 1), max_size=3, unique=True)) if h else []
        neg = draw(st.lists(st.integers(0, n - 1), max_size=2, unique=True))
        (choice if kind == "choice" else normal).append(GroundRule(h, tuple(pos), tuple(neg)))
    return GroundProgram([f"a{i}" for i in range(n)], normal, choice, constraints)


@settings(max_examples=150, deadline=None)
@given(tight_programs())
def test_completion_matches_stable_models(p):
    assert projected_models(p) == brute_force_stable_models(p)


@settings(max_examples=150, deadline=None)
@given(tight_programs())
def test_variable_count(p):
    cnf, vm = completion(p)
    bodies = {(frozenset(r.pos), frozenset(r.neg)) for r in p.rules() if r.pos or r.neg}
    assert cnf.num_vars == len(p.atoms) + len(bodies)
    assert not set(vm.atom_vars.values()) & vm.aux_vars
    for c in cnf.clauses:
        assert len(set(c)) == len(c)


def test_sidecar_lists_atoms():
    cnf, vm = completion(ground(parse_gdl("a. b :- a. {c} :- b.")))
    assert vm.sidecar().splitlines() == ["var 1 = a", "var 2 = b", "var 3 = c"]
