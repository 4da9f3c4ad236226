"""Game transition system of a GDL description.

The description is grounded once with every ``true(f)`` (f a base proposition)
and every ``does(p, a)`` (a in the move domain of p) as free inputs. The ground
program is then split into three layers:

* static atoms, independent of both inputs, computed once;
* state atoms, depending on ``true`` but not ``does`` (legal, terminal, goal, ...);
* action atoms, depending on ``does`` (next, ...).

Each dynamic layer is compiled into a straight-line Python function over a list
of booleans, which is what makes forward search over thousands of states cheap.
:func:`~stochgdl.grounder.stable_model` remains the reference evaluator.
"""
from __future__ import annotations

from typing import Mapping

from .gdl import Compound, GdlProgram, predicate, term_str
from .grounder import DomainError, GroundProgram, ground, stable_model

GameState = frozenset


class StateView:
    """Evaluated state: legality, termination and goals, plus the layer values for updates."""

    __slots__ = ("state", "values", "terminal", "legal", "goals")

    def __init__(self, state, values, terminal, legal, goals):
        self.state = state
        self.values = values
        self.terminal = terminal
        self.legal = legal
        self.goals = goals


def _body_expr(r):
    parts = [f"v[{b}]" for b in r.pos] + [f"not v[{b}]" for b in r.neg]
    return " and ".join(parts) if parts else "True"


def _compile_layer(gp: GroundProgram, layer: set, name: str):
    lines = [f"def {name}(v):"]
    by_head = gp.rules_by_head
    components, _, _ = gp._components
    for comp in components:
        comp = [a for a in comp if a in layer and by_head.get(a)]
        if not comp:
            continue
        rules = [r for a in comp for r in by_head[a]]
        cyclic = len(comp) > 1 or any(r.head in r.pos for r in rules)
        if not cyclic:
            (h,) = comp
            expr = " or ".join(f"({_body_expr(r)})" for r in rules)
            lines.append(f"    v[{h}] = bool({expr})")
        else:
            lines.append("    while True:")
            lines.append("        c = False")
            for r in rules:
                lines.append(f"        if not v[{r.head}] and {_body_expr(r)}:")
                lines.append(f"            v[{r.head}] = True")
                lines.append("            c = True")
            lines.append("        if not c:")
            lines.append("            break")
    lines.append("    return v")
    namespace = {}
    exec(compile("\n".join(lines), f"<{name}>", "exec"), namespace)
    return namespace[name]


def _dependents(gp: GroundProgram, sources: set) -> set:
    users = {}
    for r in gp.normal_rules:
        for b in r.pos + r.neg:
            users.setdefault(b, set()).add(r.head)
    out = set()
    stack = list(sources)
    while stack:
        a = stack.pop()
        for h in users.get(a, ()):
            if h not in out:
                out.add(h)
                stack.append(h)
    return out


class GameSemantics:
    """Accessors for roles, initial state, legality, update, termination and goals."""

    def __init__(self, program: GdlProgram):
        self.program = program
        static_gp = ground(program)
        model = {static_gp.atoms[i] for i in stable_model(static_gp)}
        self._roles = list(dict.fromkeys(
            a.args[0] for r in program.rules if r.is_fact and predicate(r.head) == ("role", 1)
            for a in [r.head]))
        self._base = sorted((a.args[0] for a in model if isinstance(a, Compound) and predicate(a) == ("base", 1)),
                            key=term_str)
        self._domains = {role: sorted((a.args[1] for a in model if isinstance(a, Compound)
                                       and predicate(a) == ("input", 2) and a.args[0] == role), key=term_str)
                         for role in self._roles}
        for role, dom in self._domains.items():
            if not dom:
                raise DomainError(f"no input facts for role {role}")
        self._init = frozenset(a.args[0] for a in model if isinstance(a, Compound) and predicate(a) == ("init", 1))

        true_atoms = [Compound("true", (f,)) for f in self._base]
        does_atoms = [Compound("does", (role, m)) for role in self._roles for m in self._domains[role]]
        gp = ground(program, true_atoms + does_atoms)
        if gp.strata is None:
            from .grounder import NotStratified
            raise NotStratified("game description is not stratified")
        self.ground_program = gp
        idx = gp.index
        self._true_id = {f: idx[a] for f, a in zip(self._base, true_atoms)}
        self._does_id = {(a.args[0], a.args[1]): idx[a] for a in does_atoms}

        state_layer = _dependents(gp, set(self._true_id.values()))
        action_layer = _dependents(gp, set(self._does_id.values()))
        state_layer -= action_layer
        inputs = set(self._true_id.values()) | set(self._does_id.values())
        static_model = stable_model(gp, ())
        self._template = [i in static_model and i not in state_layer and i not in action_layer
                          and i not in inputs for i in range(len(gp))]
        self._state_fn = _compile_layer(gp, state_layer, "state_layer")
        self._action_fn = _compile_layer(gp, action_layer, "action_layer")

        self._legal_ids = {role: [(m, idx[a]) for m in self._domains[role]
                                  if (a := Compound("legal", (role, m))) in idx]
                           for role in self._roles}
        self._terminal_id = idx.get("terminal")
        self._goal_ids = [(a.args[0], a.args[1], i) for a, i in idx.items()
                          if isinstance(a, Compound) and predicate(a) == ("goal", 2)]
        base = set(self._base)
        self._next_ids = [(a.args[0], i) for a, i in idx.items()
                          if isinstance(a, Compound) and predicate(a) == ("next", 1) and a.args[0] in base]

    # -- sextuple accessors -------------------------------------------------

    def roles(self) -> list:
        return list(self._roles)

    def base(self) -> list:
        return list(self._base)

    def init(self) -> GameState:
        return self._init

    def move_domain(self, role) -> list:
        return list(self._domains[role])

    def evaluate(self, state) -> StateView:
        v = self._template.copy()
        tid = self._true_id
        for f in state:
            v[tid[f]] = True
        self._state_fn(v)
        terminal = self._terminal_id is not None and v[self._terminal_id]
        legal = {role: [m for m, i in ids if v[i]] for role, ids in self._legal_ids.items()}
        goals = {}
        for role, value, i in self._goal_ids:
            if v[i]:
                goals.setdefault(role, set()).add(value)
        return StateView(GameState(state), v, terminal, legal, goals)

    def _apply(self, view: StateView, actions: Mapping) -> list:
        w = view.values.copy()
        did = self._does_id
        for role, move in actions.items():
            w[did[role, move]] = True
        self._action_fn(w)
        return w

    def successor(self, view: StateView, actions: Mapping) -> GameState:
        w = self._apply(view, actions)
        return GameState(f for f, i in self._next_ids if w[i])

    def compiled_model(self, state, actions: Mapping) -> set:
        """Display terms true after evaluating both compiled layers (for cross-checks)."""
        w = self._apply(self.evaluate(state), actions)
        return {self.ground_program.atoms[i] for i, b in enumerate(w) if b}

    def legal(self, role, state) -> list:
        return self.evaluate(state).legal[role]

    def terminal(self, state) -> bool:
        return self.evaluate(state).terminal

    def goal_value(self, role, state):
        values = self.evaluate(state).goals.get(role)
        return max(values) if values else None

    def update(self, actions: Mapping, state) -> GameState:
        """Successor state; ``actions`` maps every role to its move."""
        return self.successor(self.evaluate(state), actions)

    # -- reference path ------------------------------------------------------

    def reference_model(self, state, actions: Mapping | None = None) -> set:
        """Display terms of the stable model of G + S^true (+ A^does), via the generic evaluator."""
        gp = self.ground_program
        inputs = [self._true_id[f] for f in state]
        if actions:
            inputs += [self._does_id[r, m] for r, m in actions.items()]
        return {gp.atoms[i] for i in stable_model(gp, inputs)}

    def first_mover(self):
        """Adversarial role with more than one legal move initially (else the first listed)."""
        adversaries = [r for r in self._roles if r != "random"]
        view = self.evaluate(self._init)
        for r in adversaries:
            if len(view.legal[r]) > 1:
                return r
        return adversaries[0]

    def adversaries(self, maximizer) -> tuple:
        """``(x, o)`` for ``maximizer`` given as a role name or ``first``/``second``."""
        adv = [r for r in self._roles if r != "random"]
        if maximizer in ("first", "second"):
            first = self.first_mover()
            second = next(r for r in adv if r != first)
            x = first if maximizer == "first" else second
        elif maximizer in adv:
            x = maximizer
        else:
            raise ValueError(f"unknown maximizer {maximizer!r}; roles are {adv}")
        o = next(r for r in adv if r != x)
        return x, o
