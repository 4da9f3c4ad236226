"""Bottom-up grounding and stratified evaluation of normal programs."""
from __future__ import annotations

from collections import defaultdict
from functools import cached_property, lru_cache
from typing import Iterable, NamedTuple

import networkx as nx

from .gdl import (Compound, GdlProgram, Literal, Rule, Variable, is_ground, predicate,
                  rule_str, substitute, term_str, variables)


class DomainError(ValueError):
    pass


class ConstraintViolation(ValueError):
    pass


class NotStratified(ValueError):
    pass


class GroundRule(NamedTuple):
    head: int | None
    pos: tuple
    neg: tuple


class GroundProgram:
    """Variable-free program over interned atoms.

    ``atoms[i]`` is the display term of atom id ``i``; ``index`` is the inverse map.
    """

    def __init__(self, atoms, normal_rules, choice_rules, constraints):
        self.atoms = list(atoms)
        self.index = {a: i for i, a in enumerate(self.atoms)}
        self.normal_rules = list(normal_rules)
        self.choice_rules = list(choice_rules)
        self.constraints = list(constraints)

    def __len__(self):
        return len(self.atoms)

    def id_of(self, term):
        return self.index[term]

    def rules(self):
        yield from self.normal_rules
        yield from self.choice_rules
        yield from self.constraints

    @cached_property
    def choice_heads(self) -> frozenset:
        return frozenset(r.head for r in self.choice_rules)

    @cached_property
    def _graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.atoms)))
        for r in self.normal_rules + self.choice_rules:
            for b in r.pos:
                if not g.has_edge(r.head, b):
                    g.add_edge(r.head, b, negative=False)
            for b in r.neg:
                if g.has_edge(r.head, b):
                    g[r.head][b]["negative"] = True
                else:
                    g.add_edge(r.head, b, negative=True)
        return g

    @cached_property
    def _components(self):
        """SCCs (lists of atom ids) in evaluation order, or None when negation is cyclic."""
        g = self._graph
        cond = nx.condensation(g)
        member = cond.graph["mapping"]
        for u, v, d in g.edges(data=True):
            if d["negative"] and member[u] == member[v]:
                return None
        order = list(reversed(list(nx.topological_sort(cond))))
        return [sorted(cond.nodes[c]["members"]) for c in order], member, order

    @cached_property
    def strata(self) -> list | None:
        """Layers of atom ids; negative dependencies point into strictly earlier layers."""
        comps = self._components
        if comps is None:
            return None
        components, member, order = comps
        g = self._graph
        level = {}
        for c, atoms in zip(order, components):
            lv = 0
            for a in atoms:
                for _, b, d in g.out_edges(a, data=True):
                    if member[b] != c:
                        lv = max(lv, level[member[b]] + d["negative"])
            level[c] = lv
        layers = defaultdict(list)
        for c, atoms in zip(order, components):
            layers[level[c]].extend(atoms)
        return [sorted(layers[k]) for k in sorted(layers)]

    @cached_property
    def rules_by_head(self) -> dict:
        out = defaultdict(list)
        for r in self.normal_rules:
            out[r.head].append(r)
        return out

    def rule_str(self, r: GroundRule, choice=False) -> str:
        lits = [term_str(self.atoms[a]) for a in r.pos] + ["not " + term_str(self.atoms[a]) for a in r.neg]
        body = ", ".join(lits)
        if r.head is None:
            return f":- {body}."
        head = term_str(self.atoms[r.head])
        if choice:
            head = "{" + head + "}"
        return f"{head} :- {body}." if body else f"{head}."

    def dump(self) -> str:
        """Rule-syntax listing with a ``#strata`` comment header."""
        lines = []
        strata = self.strata
        if strata is None:
            lines.append("% #strata none (not stratified)")
        else:
            lines.append(f"% #strata {len(strata)}")
            for i, layer in enumerate(strata):
                lines.append(f"% #stratum {i}: " + " ".join(term_str(self.atoms[a]) for a in layer))
        lines += [self.rule_str(r) for r in self.normal_rules]
        lines += [self.rule_str(r, choice=True) for r in self.choice_rules]
        lines += [self.rule_str(r) for r in self.constraints]
        return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# grounding

def _match(pattern, term, binding):
    if isinstance(pattern, Variable):
        bound = binding.get(pattern)
        if bound is None:
            binding = dict(binding)
            binding[pattern] = term
            return binding
        return binding if bound == term else None
    if isinstance(pattern, Compound):
        if not isinstance(term, Compound) or pattern.functor != term.functor or len(pattern.args) != len(term.args):
            return None
        for p, t in zip(pattern.args, term.args):
            binding = _match(p, t, binding)
            if binding is None:
                return None
        return binding
    return binding if pattern == term else None


class _AtomStore:
    """Atoms indexed by predicate and by (predicate, argument position, ground argument)."""

    def __init__(self):
        self.members = set()
        self.by_pred = defaultdict(list)
        self.by_arg = defaultdict(list)

    def add(self, atom) -> bool:
        if atom in self.members:
            return False
        self.members.add(atom)
        sig = predicate(atom)
        self.by_pred[sig].append(atom)
        if isinstance(atom, Compound):
            for i, a in enumerate(atom.args):
                self.by_arg[sig, i, a].append(atom)
        return True

    def candidates(self, pattern):
        sig = predicate(pattern)
        best = self.by_pred.get(sig, ())
        if isinstance(pattern, Compound) and len(best) > 8:
            for i, a in enumerate(pattern.args):
                if isinstance(a, (str, int)) or (isinstance(a, Compound) and is_ground(a)):
                    pool = self.by_arg.get((sig, i, a), ())
                    if len(pool) < len(best):
                        best = pool
        return best


@lru_cache(maxsize=None)
def _vars(atom) -> frozenset:
    return frozenset(variables(atom))


def _join(lits, store: _AtomStore, binding, first=None):
    """Enumerate bindings satisfying positive literals ``lits`` against ``store``.

    ``first`` optionally pins literal 0 to a list of candidate atoms (semi-naive delta).
    Literals are taken greedily by number of already bound variables.
    """
    if not lits:
        yield binding
        return
    if first is not None:
        lit, rest = lits[0], lits[1:]
        pool = first
    else:
        best = max(range(len(lits)), key=lambda i: sum(v in binding for v in _vars(lits[i])) -
                   0.001 * len(_vars(lits[i])))
        lit, rest = lits[best], lits[:best] + lits[best + 1:]
        pool = None
    inst = substitute(lit, binding)
    if pool is None and is_ground(inst):
        if inst in store.members:
            yield from _join(rest, store, binding)
        return
    for atom in pool if pool is not None else store.candidates(inst):
        b = _match(inst, atom, binding)
        if b is not None:
            yield from _join(rest, store, b)


def _fixpoint(rules, store: _AtomStore, emit):
    """Semi-naive closure: call ``emit(rule, binding)`` for every instance, add heads to ``store``."""
    positive = [[l.atom for l in r.body if l.positive] for r in rules]
    by_pred = defaultdict(list)
    for ri, lits in enumerate(positive):
        for li, a in enumerate(lits):
            by_pred[predicate(a)].append((ri, li))
    seen = set()

    def fire(ri, b):
        r = rules[ri]
        key = (ri, tuple(sorted(b.items())))
        if key in seen:
            return None
        seen.add(key)
        emit(r, b)
        if r.head is not None:
            head = substitute(r.head, b)
            if store.add(head):
                return head
        return None

    delta = []
    for ri, lits in enumerate(positive):
        if not lits:
            h = fire(ri, {})
            if h is not None:
                delta.append(h)
    delta.extend(store.members)
    delta = list(dict.fromkeys(delta))
    while delta:
        fresh = _AtomStore()
        for a in delta:
            fresh.add(a)
        new = []
        for sig in list(fresh.by_pred):
            for ri, li in by_pred.get(sig, ()):
                lits = positive[ri]
                pool = fresh.candidates(lits[li])
                if not pool:
                    continue
                ordered = [lits[li]] + lits[:li] + lits[li + 1:]
                for b in list(_join(ordered, store, {}, first=pool)):
                    h = fire(ri, b)
                    if h is not None:
                        new.append(h)
        delta = new


def ground(program: GdlProgram | Iterable[Rule], inputs: Iterable = ()) -> GroundProgram:
    """Ground a safe program bottom-up.

    ``inputs`` are atoms treated as possibly true without any rule (``true``/``does``
    facts when evaluating a game description). Choice heads are possible whenever
    their bodies are. Atoms derivable from facts through positive rules alone are
    emitted as facts and simplified out of other rule bodies.
    """
    rules = list(program.rules if isinstance(program, GdlProgram) else program)
    for r in rules:
        if r.head is not None and not r.body and not is_ground(r.head):
            raise DomainError(f"non-ground fact {rule_str(r)}")
    inputs = list(dict.fromkeys(inputs))

    # definite atoms
    definite = _AtomStore()
    horn = [r for r in rules if r.head is not None and not r.choice and all(l.positive for l in r.body)]
    _fixpoint(horn, definite, lambda r, b: None)

    possible = _AtomStore()
    for a in definite.members:
        possible.add(a)
    for a in inputs:
        possible.add(a)
    instances = []
    _fixpoint(rules, possible, lambda r, b: instances.append((r, b)))

    D = definite.members
    P = possible.members
    atoms = {}

    def intern(a):
        i = atoms.get(a)
        if i is None:
            i = atoms[a] = len(atoms)
        return i

    facts = []
    for r in rules:
        if r.is_fact and r.head in D:
            facts.append(r.head)
    for a in sorted(D - set(facts), key=term_str):
        facts.append(a)
    for a in dict.fromkeys(facts):
        intern(a)
    normal, choice, constraints = [], [], []
    seen = set()
    for r, b in instances:
        head = None if r.head is None else substitute(r.head, b)
        if head is not None and head in D and not r.choice:
            continue
        pos, neg = [], []
        dead = False
        for lit in r.body:
            a = substitute(lit.atom, b)
            if lit.positive:
                if a not in D:
                    pos.append(a)
            elif a in D:
                dead = True
                break
            elif a in P:
                neg.append(a)
        if dead:
            continue
        key = (head, r.choice, tuple(dict.fromkeys(pos)), tuple(dict.fromkeys(neg)))
        if key in seen:
            continue
        seen.add(key)
        gr = GroundRule(None if head is None else intern(head),
                        tuple(intern(a) for a in key[2]), tuple(intern(a) for a in key[3]))
        (choice if r.choice else constraints if head is None else normal).append(gr)
    for a in inputs:
        intern(a)
    fact_rules = [GroundRule(atoms[a], (), ()) for a in dict.fromkeys(facts)]
    return GroundProgram(atoms, fact_rules + normal, choice, constraints)


# ---------------------------------------------------------------------------
# evaluation

def stable_model(p: GroundProgram, inputs: Iterable = ()) -> set:
    """Unique stable model of a stratified ground program with ``inputs`` fixed true.

    ``inputs`` are atom ids or display terms; choice atoms not listed are false.
    Returns the set of true atom ids.
    """
    comps = p._components
    if comps is None:
        raise NotStratified("negative dependency inside a cycle")
    true = set()
    for a in inputs:
        true.add(a if isinstance(a, int) else p.index[a])
    fixed = set(true)
    by_head = p.rules_by_head
    for comp in comps[0]:
        rules = [r for a in comp if a not in fixed for r in by_head.get(a, ())]
        if not rules:
            continue
        changed = True
        while changed:
            changed = False
            for r in rules:
                if r.head not in true and all(b in true for b in r.pos) and not any(b in true for b in r.neg):
                    true.add(r.head)
                    changed = True
    for c in p.constraints:
        if all(b in true for b in c.pos) and not any(b in true for b in c.neg):
            raise ConstraintViolation(p.rule_str(c))
    return true


def model_terms(p: GroundProgram, model: Iterable[int]) -> set:
    return {p.atoms[i] for i in model}
