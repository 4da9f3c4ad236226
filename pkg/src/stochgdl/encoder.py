"""GDL game -> stochastic quantified answer set program (SQASP).

The program is the temporal extension of the game plus four rule blocks:

* ``P_c`` -- every role does exactly one legal move until the game ends, the
  game ends within the horizon and, when it ends, the maximizer has won;
* ``P_o`` -- corrective encoding of the opponent's move through universally
  quantified bits ``dec_o(L, t)``;
* ``P_legal`` -- counts the random player's legal moves (``count``, ``tol``);
* ``P_r`` -- picks the random player's move uniformly via chance atoms
  ``dec_r(X, t)``, ``dec_r(X, t)`` being true with probability ``1/X``.

Every atom of the grounded program is placed in a quantifier block
``E0 U0 E1 R0 E2 U1 E3 R1 E4 ...``; blocks are numbered globally so that
``E_k`` has index ``2k``, ``U_i`` index ``4i+1`` and ``R_i`` index ``4i+3``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import networkx as nx

from .gdl import Compound, GdlProgram, Literal, Rule, predicate, term_str
from .grounder import GroundProgram, ground, stable_model

EXISTS, FORALL, CHANCE = "e", "a", "r"
RESERVED = {("ended", 1), ("count", 3), ("tol", 2), ("cdom", 1), ("succ", 2), ("dec_o", 2), ("dec_r", 2)}


class QuantifiedAtom(NamedTuple):
    atom: int
    quantifier: str
    probability: Fraction | None
    level: int


@dataclass(frozen=True)
class ActionOrdering:
    role: object
    ordered_actions: tuple

    def ord(self, action) -> int:
        return self.ordered_actions.index(action) + 1

    @classmethod
    def sorted(cls, role, actions):
        return cls(role, tuple(sorted(actions, key=term_str)))


@dataclass
class SqaspProgram:
    program: GroundProgram
    prefix: list
    horizon: int
    x: object
    o: object
    method: str

    def blocks(self) -> list:
        """``(level, quantifier, [atom ids])`` for every non-empty block, outermost first."""
        out = []
        for q in self.prefix:
            if out and out[-1][0] == q.level:
                out[-1][2].append(q.atom)
            else:
                out.append((q.level, q.quantifier, [q.atom]))
        return out

    def to_text(self) -> str:
        p = self.program
        lines = [p.rule_str(r) for r in p.normal_rules]
        lines += [p.rule_str(r, choice=True) for r in p.choice_rules]
        lines += [p.rule_str(r) for r in p.constraints]
        for q in self.prefix:
            a = term_str(p.atoms[q.atom])
            if q.quantifier == EXISTS:
                lines.append(f"_exists({q.level},{a}).")
            elif q.quantifier == FORALL:
                lines.append(f"_forall({q.level},{a}).")
            else:
                pr = q.probability
                lines.append(f"_chance({q.level},{pr.numerator},{pr.denominator},{a}).")
        return "\n".join(lines) + "\n"


def exists_level(k: int) -> int:
    return 2 * k


def forall_level(i: int) -> int:
    return 4 * i + 1


def chance_level(i: int) -> int:
    return 4 * i + 3


def _t(name, *args):
    return Compound(name, tuple(args))


def _pos(atom):
    return Literal(atom, True)


def _neg(atom):
    return Literal(atom, False)


# ---------------------------------------------------------------------------

def _stamp(atom, i):
    name = predicate(atom)[0]
    if name == "init":
        return _t("true", atom.args[0], 0)
    if name == "next":
        return _t("true", atom.args[0], i + 1)
    if isinstance(atom, str):
        return _t(atom, i)
    return Compound(atom.functor, atom.args + (i,))


def temporal_extension(g: GdlProgram, n: int) -> list[Rule]:
    """``n + 1`` time-stamped copies of the game rules (duplicates from ``init`` removed)."""
    out = {}
    for i in range(n + 1):
        for r in g.rules:
            head = None if r.head is None else _stamp(r.head, i)
            body = tuple(Literal(_stamp(l.atom, i), l.positive) for l in r.body)
            out.setdefault(Rule(head, body, r.choice), None)
    return list(out)


def game_domains(g: GdlProgram) -> tuple[list, dict]:
    """Roles in declaration order and each role's move domain (sorted by display string)."""
    gp = ground(g)
    model = [gp.atoms[i] for i in stable_model(gp)]
    roles = list(dict.fromkeys(a.args[0] for a in model if isinstance(a, Compound) and predicate(a) == ("role", 1)))
    domains = {r: sorted((a.args[1] for a in model if isinstance(a, Compound)
                          and predicate(a) == ("input", 2) and a.args[0] == r), key=term_str) for r in roles}
    return roles, domains


def build_pc(roles, domains: dict, x, n: int) -> list[Rule]:
    """Exactly-one legal move per role while running, termination by ``n``, and x wins at the end."""
    rules = []
    for t in range(n + 1):
        ended = _t("ended", t)
        if t < n:
            for p in roles:
                does = [_t("does", p, a, t) for a in domains[p]]
                for d in does:
                    rules.append(Rule(d, (_neg(ended),), choice=True))
                for i, d in enumerate(does):
                    for d2 in does[i + 1:]:
                        rules.append(Rule(None, (_pos(d), _pos(d2))))
                rules.append(Rule(None, (_neg(ended),) + tuple(_neg(d) for d in does)))
                for a, d in zip(domains[p], does):
                    rules.append(Rule(None, (_neg(_t("legal", p, a, t)), _pos(d))))
        rules.append(Rule(ended, (_pos(_t("terminal", t)),)))
        if t > 0:
            rules.append(Rule(ended, (_pos(_t("ended", t - 1)),)))
    rules.append(Rule(None, (_neg(_t("ended", n)),)))
    for t in range(n + 1):
        body = [_neg(_t("goal", x, 100, t)), _pos(_t("ended", t))]
        if t > 0:
            body.append(_neg(_t("ended", t - 1)))
        rules.append(Rule(None, tuple(body)))
    return rules


def opponent_bits(size: int) -> int:
    """Number of ``dec_o`` bits: ceil(log2(size))."""
    return (size - 1).bit_length()


def build_po(ordering: ActionOrdering, n: int) -> list[Rule]:
    """Corrective encoding: bit pattern ``ord(a) - 1`` (bit k has weight 2**(k-1)) forces move ``a``."""
    o = ordering.role
    bits = opponent_bits(len(ordering.ordered_actions))
    rules = []
    if bits == 0:
        return rules
    for t in range(n):
        for level in range(1, bits + 1):
            rules.append(Rule(_t("dec_o", level, t), (), choice=True))
        for a in ordering.ordered_actions:
            code = ordering.ord(a) - 1
            body = [_neg(_t("does", o, a, t)), _pos(_t("legal", o, a, t)), _neg(_t("ended", t))]
            body += [_pos(_t("dec_o", k, t)) for k in range(1, bits + 1) if code >> (k - 1) & 1]
            body += [_neg(_t("dec_o", k, t)) for k in range(1, bits + 1) if not code >> (k - 1) & 1]
            rules.append(Rule(None, tuple(body)))
    return rules


def build_plegal(ordering: ActionOrdering, n: int) -> list[Rule]:
    """Successor chain over random's moves, running counts of legal ones and their total."""
    acts = ordering.ordered_actions
    m = len(acts)
    A, B, N = (_var(v) for v in "ABN")
    rules = [Rule(_t("succ", a, b)) for a, b in zip(acts, acts[1:])]
    rules += [Rule(_t("cdom", k)) for k in range(1, m + 1)]
    for t in range(n):
        first = acts[0]
        rules.append(Rule(_t("count", first, 0, t), (_neg(_t("legal", "random", first, t)),)))
        rules.append(Rule(_t("count", first, 1, t), (_pos(_t("legal", "random", first, t)),)))
        if m > 1:
            rules.append(Rule(_t("count", B, N, t), (_pos(_t("succ", A, B)), _neg(_t("legal", "random", B, t)),
                                                     _pos(_t("count", A, N, t)))))
            for k in range(1, m + 1):
                rules.append(Rule(_t("count", B, k, t), (_pos(_t("count", A, k - 1, t)), _pos(_t("succ", A, B)),
                                                         _pos(_t("legal", "random", B, t)), _pos(_t("cdom", k)))))
        rules.append(Rule(_t("tol", N, t), (_pos(_t("count", acts[-1], N, t)),)))
    return rules


def build_pr(ordering: ActionOrdering, n: int) -> list[Rule]:
    """Chance bits selecting the j-th of i legal random moves with probability 1/i."""
    m = len(ordering.ordered_actions)
    rules = []
    if m < 2:
        return rules
    A = _var("A")
    for t in range(n):
        for k in range(1, m + 1):
            rules.append(Rule(_t("dec_r", k, t), (), choice=True))
        for i in range(2, m + 1):
            for j in range(1, i + 1):
                body = [_neg(_t("does", "random", A, t)), _pos(_t("legal", "random", A, t)),
                        _pos(_t("count", A, j, t)), _neg(_t("ended", t)), _pos(_t("tol", i, t))]
                body += [_neg(_t("dec_r", k, t)) for k in range(i, j, -1)]
                body.append(_pos(_t("dec_r", j, t)))
                rules.append(Rule(None, tuple(body)))
    return rules


def _var(name):
    from .gdl import Variable
    return Variable(name)


# ---------------------------------------------------------------------------

def _choice_level(atom, x, o):
    """Existential-block index ``t`` (of ``E_t``) associated with a choice atom, else None."""
    if not isinstance(atom, Compound):
        return None
    sig = predicate(atom)
    if sig == ("does", 3):
        role, _, i = atom.args
        if role == x:
            return 2 * i
        if role == o:
            return 2 * i + 1
        if role == "random":
            return 2 * i + 2
    elif sig == ("dec_o", 2):
        return 2 * atom.args[1] + 1
    elif sig == ("dec_r", 2):
        return 2 * atom.args[1] + 2
    return None


def _choice_quantifier(atom, x, o):
    sig = predicate(atom)
    if sig == ("dec_o", 2):
        return FORALL, None, forall_level(atom.args[1])
    if sig == ("dec_r", 2):
        return CHANCE, Fraction(1, atom.args[0]), chance_level(atom.args[1])
    return EXISTS, None, exists_level(_choice_level(atom, x, o))


def build_prefix(p: GroundProgram, n: int, method: str, x, o) -> list[QuantifiedAtom]:
    """Quantifier prefix by the baseline (``baseline``) or dependency-based (``dependency``) method."""
    if method not in ("baseline", "dependency"):
        raise ValueError(f"unknown quantification method {method!r}")
    levels = [_choice_level(a, x, o) for a in p.atoms]
    if method == "dependency":
        shifted = _dependency_levels(p, levels)
    prefix = []
    for i, a in enumerate(p.atoms):
        if levels[i] is not None:
            q, prob, level = _choice_quantifier(a, x, o)
        elif method == "baseline":
            q, prob, level = EXISTS, None, exists_level(2 * n)
        else:
            q, prob, level = EXISTS, None, exists_level(max(shifted[i], 0))
        prefix.append(QuantifiedAtom(i, q, prob, level))
    prefix.sort(key=lambda q: (q.level, q.atom))
    return prefix


def _dependency_levels(p: GroundProgram, levels) -> list:
    """Largest choice level reachable from each atom through normal rules (-1 if none)."""
    g = nx.DiGraph()
    g.add_nodes_from(range(len(p.atoms)))
    for r in p.normal_rules:
        for b in r.pos + r.neg:
            g.add_edge(r.head, b)
    cond = nx.condensation(g)
    value = {}
    for c in reversed(list(nx.topological_sort(cond))):
        best = -1
        for a in cond.nodes[c]["members"]:
            if levels[a] is not None:
                best = max(best, levels[a])
        for d in cond.successors(c):
            best = max(best, value[d])
        value[c] = best
    member = cond.graph["mapping"]
    out = []
    for a in range(len(p.atoms)):
        reach = -1
        for b in g.successors(a):
            if levels[b] is not None:
                reach = max(reach, levels[b])
            else:
                reach = max(reach, value[member[b]])
        out.append(reach)
    return out


def encode(g: GdlProgram, n: int, x, o, method: str = "baseline") -> SqaspProgram:
    """SQASP program whose value is the probability that ``x`` wins within ``n`` steps against ``o``."""
    roles, domains = game_domains(g)
    if "random" not in domains or x not in domains or o not in domains:
        raise ValueError("game needs roles x, o and random")
    rules = temporal_extension(g, n)
    clash = {predicate(r.head) for r in rules if r.head is not None} & RESERVED
    if clash:
        raise ValueError(f"game predicates collide with encoder predicates: {sorted(clash)}")
    o_order = ActionOrdering.sorted(o, domains[o])
    r_order = ActionOrdering.sorted("random", domains["random"])
    rules += build_pc(roles, domains, x, n)
    rules += build_po(o_order, n)
    rules += build_plegal(r_order, n)
    rules += build_pr(r_order, n)
    gp = ground(rules)
    prefix = build_prefix(gp, n, method, x, o)
    return SqaspProgram(gp, prefix, n, x, o, method)
