"""Clark completion of tight ground programs into CNF."""
from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .gdl import term_str
from .grounder import GroundProgram


class CycleError(ValueError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("positive dependency cycle: " + " -> ".join(map(str, self.cycle)))


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list = field(default_factory=list)

    def satisfied_by(self, true_vars) -> bool:
        return all(any((l > 0) == (abs(l) in true_vars) for l in c) for c in self.clauses)


@dataclass
class VarMap:
    atom_vars: dict          # atom id -> variable
    aux_vars: set
    atoms: list              # display terms, indexed by atom id

    def var_atom(self) -> dict:
        return {v: a for a, v in self.atom_vars.items()}

    def sidecar(self) -> str:
        lines = [f"var {v} = {term_str(self.atoms[a])}" for a, v in sorted(self.atom_vars.items(), key=lambda kv: kv[1])]
        return "\n".join(lines) + "\n"

    def project(self, true_vars) -> frozenset:
        back = self.var_atom()
        return frozenset(back[v] for v in true_vars if v in back)


def check_tight(p: GroundProgram) -> None:
    """Raise :class:`CycleError` if heads depend positively on themselves."""
    g = nx.DiGraph()
    for r in p.normal_rules + p.choice_rules:
        for b in r.pos:
            g.add_edge(r.head, b)
    try:
        cycle = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        return
    raise CycleError([term_str(p.atoms[u]) for u, _ in cycle] + [term_str(p.atoms[cycle[0][0]])])


def completion(p: GroundProgram, order=None) -> tuple[CnfFormula, VarMap]:
    """CNF whose models projected onto the atoms are exactly the stable models of ``p``.

    ``order`` lists atom ids in the desired variable order (default: by id); atom
    variables come first, body variables after. Identical bodies share a variable.
    """
    check_tight(p)
    order = list(range(len(p.atoms))) if order is None else list(order)
    atom_var = {a: i + 1 for i, a in enumerate(order)}
    nvars = len(order)
    clauses = []
    body_var = {}

    def lit(a, positive):
        return atom_var[a] if positive else -atom_var[a]

    def body(r):
        nonlocal nvars
        key = (frozenset(r.pos), frozenset(r.neg))
        b = body_var.get(key)
        if b is None:
            nvars += 1
            b = body_var[key] = nvars
            lits = [lit(a, True) for a in key[0]] + [lit(a, False) for a in key[1]]
            lits.sort(key=abs)
            for l in lits:
                clauses.append([-b, l])
            clauses.append([b] + [-l for l in lits])
        return b

    support = {a: [] for a in order}
    free = set()
    for r in p.normal_rules:
        if not r.pos and not r.neg:
            clauses.append([lit(r.head, True)])
            free.add(r.head)
            continue
        b = body(r)
        clauses.append([-b, lit(r.head, True)])
        support[r.head].append(b)
    for r in p.choice_rules:
        if not r.pos and not r.neg:
            free.add(r.head)
            continue
        support[r.head].append(body(r))
    for a in order:
        if a in free:
            continue
        clauses.append([-atom_var[a]] + list(dict.fromkeys(support[a])))
    for r in p.constraints:
        if not r.pos and not r.neg:
            clauses.append([])
            continue
        clauses.append([-body(r)])
    aux = set(range(len(order) + 1, nvars + 1))
    return CnfFormula(nvars, clauses), VarMap(atom_var, aux, p.atoms)
