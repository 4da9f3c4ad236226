"""Reader, printer and validity checker for the Prolog-style GDL fragment.

Terms are plain Python values so they hash and compare cheaply:

* constants are ``str`` (lowercase-initial identifiers),
* integers are ``int``,
* variables are :class:`Variable`,
* compound terms are :class:`Compound` (a named tuple ``functor, args``).
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, NamedTuple, Union

import networkx as nx


class Variable(NamedTuple):
    name: str

    def __repr__(self):
        return f"Variable({self.name!r})"


class Compound(NamedTuple):
    functor: str
    args: tuple

    def __repr__(self):
        return f"Compound({self.functor!r}, {self.args!r})"


Term = Union[str, int, Variable, Compound]


class Literal(NamedTuple):
    atom: Term
    positive: bool = True

    def __str__(self):
        return term_str(self.atom) if self.positive else "not " + term_str(self.atom)


@dataclass(frozen=True)
class Rule:
    """``head :- body``. ``head is None`` for constraints; ``choice`` marks ``{head}``."""

    head: Term | None
    body: tuple = ()
    choice: bool = False

    @property
    def is_constraint(self):
        return self.head is None

    @property
    def is_fact(self):
        return self.head is not None and not self.body and not self.choice

    def __str__(self):
        return rule_str(self)


class ParseError(ValueError):
    def __init__(self, message, line, column):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class ValidityError(ValueError):
    """A GDL validity restriction is violated; ``restriction`` names which one."""

    def __init__(self, restriction, detail=""):
        super().__init__(restriction + (f": {detail}" if detail else ""))
        self.restriction = restriction
        self.detail = detail


# ---------------------------------------------------------------------------
# terms

def term_str(t) -> str:
    if isinstance(t, Compound):
        return f"{t.functor}({','.join(term_str(a) for a in t.args)})"
    if isinstance(t, Variable):
        return t.name
    return str(t)


def rule_str(r: Rule) -> str:
    if r.head is None:
        head = ""
    elif r.choice:
        head = "{" + term_str(r.head) + "}"
    else:
        head = term_str(r.head)
    if not r.body:
        return head + "." if head else ":- ."
    body = ", ".join(str(lit) for lit in r.body)
    return f"{head} :- {body}." if head else f":- {body}."


def predicate(t) -> tuple[str, int]:
    """Predicate signature ``(name, arity)`` of an atom."""
    if isinstance(t, Compound):
        return t.functor, len(t.args)
    if isinstance(t, str):
        return t, 0
    raise TypeError(f"not an atom: {t!r}")


def variables(t) -> Iterator[Variable]:
    if isinstance(t, Variable):
        yield t
    elif isinstance(t, Compound):
        for a in t.args:
            yield from variables(a)


def is_ground(t) -> bool:
    return next(variables(t), None) is None


def substitute(t, binding: dict):
    if isinstance(t, Variable):
        return binding.get(t, t)
    if isinstance(t, Compound):
        return Compound(t.functor, tuple(substitute(a, binding) for a in t.args))
    return t


def rule_variables(r: Rule) -> set:
    out = set()
    if r.head is not None:
        out.update(variables(r.head))
    for lit in r.body:
        out.update(variables(lit.atom))
    return out


def substitute_rule(r: Rule, binding: dict) -> Rule:
    head = None if r.head is None else substitute(r.head, binding)
    body = tuple(Literal(substitute(l.atom, binding), l.positive) for l in r.body)
    return Rule(head, body, r.choice)


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>%[^\n]*)
  | (?P<if>:-)
  | (?P<int>-?\d+)
  | (?P<const>[a-z][A-Za-z0-9_]*)
  | (?P<var>[A-Z_][A-Za-z0-9_]*)
  | (?P<punct>[(),.{}])
    """,
    re.VERBOSE,
)


class _Tok(NamedTuple):
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        if kind not in ("ws", "comment"):
            k = m.group() if kind == "punct" else kind
            toks.append(_Tok(k, m.group(), line, pos - line_start + 1))
        chunk = m.group()
        nl = chunk.count("\n")
        if nl:
            line += nl
            line_start = pos + chunk.rfind("\n") + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text):
        self.toks = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def expect(self, kind):
        tok = self.next()
        if tok.kind != kind:
            what = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected {kind!r}, found {what}", tok.line, tok.col)
        return tok

    def program(self) -> list[Rule]:
        rules = []
        while self.peek().kind != "eof":
            rules.append(self.clause())
        return rules

    def clause(self) -> Rule:
        start = self.peek()
        head, choice = None, False
        if start.kind == "{":
            self.next()
            head = self.atom()
            self.expect("}")
            choice = True
        elif start.kind != "if":
            head = self.atom()
        body = ()
        if self.peek().kind == "if":
            self.next()
            body = self.body()
        elif head is None:
            raise ParseError("clause without head or body", start.line, start.col)
        self.expect(".")
        rule = Rule(head, body, choice)
        if head is not None and not body and predicate(head) == ("role", 1) and not is_ground(head):
            raise ParseError("variable in role fact", start.line, start.col)
        return rule

    def body(self) -> tuple:
        lits = [self.literal()]
        while self.peek().kind == ",":
            self.next()
            lits.append(self.literal())
        return tuple(lits)

    def literal(self) -> Literal:
        tok = self.peek()
        if tok.kind == "const" and tok.text == "not" and self.toks[self.i + 1].kind == "const":
            self.next()
            return Literal(self.atom(), False)
        return Literal(self.atom(), True)

    def atom(self):
        tok = self.peek()
        if tok.kind != "const":
            what = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected an atom, found {what}", tok.line, tok.col)
        return self.term()

    def term(self):
        tok = self.next()
        if tok.kind == "int":
            return int(tok.text)
        if tok.kind == "var":
            return Variable(tok.text)
        if tok.kind != "const":
            what = "end of input" if tok.kind == "eof" else repr(tok.text)
            raise ParseError(f"expected a term, found {what}", tok.line, tok.col)
        if self.peek().kind != "(":
            return tok.text
        self.next()
        args = [self.term()]
        while self.peek().kind == ",":
            self.next()
            args.append(self.term())
        close = self.peek()
        if close.kind != ")":
            what = "end of input" if close.kind == "eof" else repr(close.text)
            raise ParseError(f"unbalanced parentheses, found {what}", close.line, close.col)
        self.next()
        return Compound(tok.text, tuple(args))


@dataclass
class GdlProgram:
    rules: list
    roles: list = field(default_factory=list)
    predicate_graph: nx.DiGraph | None = None

    def __str__(self):
        return format_program(self.rules)


def parse_gdl(text: str) -> GdlProgram:
    """Parse GDL source text into a :class:`GdlProgram` (no semantic checks)."""
    rules = _Parser(text).program()
    roles = [r.head.args[0] for r in rules if r.is_fact and predicate(r.head) == ("role", 1)]
    return GdlProgram(rules=rules, roles=roles, predicate_graph=predicate_graph(rules))


def parse_gdl_file(path) -> GdlProgram:
    with open(path, encoding="utf-8") as fh:
        return parse_gdl(fh.read())


def format_program(rules: Iterable[Rule]) -> str:
    return "".join(rule_str(r) + "\n" for r in rules)


# ---------------------------------------------------------------------------
# validation

def predicate_graph(rules: Iterable[Rule]) -> nx.DiGraph:
    """Head predicate -> body predicate edges; attribute ``negative`` marks a negated occurrence."""
    g = nx.DiGraph()
    for r in rules:
        if r.head is None:
            continue
        h = predicate(r.head)
        g.add_node(h)
        for lit in r.body:
            b = predicate(lit.atom)
            if g.has_edge(h, b):
                g[h][b]["negative"] |= not lit.positive
            else:
                g.add_edge(h, b, negative=not lit.positive)
    return g


def predicate_strata(g: nx.DiGraph) -> dict | None:
    """Minimal stratum per predicate, or None if some cycle goes through negation."""
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    for u, v, data in g.edges(data=True):
        if data["negative"] and members[u] == members[v]:
            return None
    level = {}
    for c in reversed(list(nx.topological_sort(cond))):
        lv = 0
        for p in cond.nodes[c]["members"]:
            for _, b, data in g.out_edges(p, data=True):
                if members[b] != c:
                    lv = max(lv, level[members[b]] + (1 if data["negative"] else 0))
        level[c] = lv
    return {p: level[members[p]] for p in g.nodes}


@dataclass
class ValidationReport:
    roles: list
    strata: dict
    rule_count: int

    def __str__(self):
        lines = [f"valid GDL: {self.rule_count} rules",
                 "roles: " + ", ".join(term_str(r) for r in self.roles)]
        by_level = {}
        for (name, arity), lv in self.strata.items():
            by_level.setdefault(lv, []).append(f"{name}/{arity}")
        for lv in sorted(by_level):
            lines.append(f"stratum {lv}: " + " ".join(sorted(by_level[lv])))
        return "\n".join(lines)


def _depends_on(g: nx.DiGraph, sources, targets) -> bool:
    for s in sources:
        if s in g and any(t in g and (t == s or nx.has_path(g, s, t)) for t in targets):
            return True
    return False


def _names(g, *names):
    return [p for p in g.nodes if p[0] in names]


def validate(p: GdlProgram) -> ValidationReport:
    """Check the GDL validity restrictions; raise :class:`ValidityError` on the first violation."""
    for r in p.rules:
        if r.head is not None:
            name = predicate(r.head)[0]
            if name in ("true", "does"):
                raise ValidityError(f"{name} only in bodies", rule_str(r))
            if name == "role" and r.body:
                raise ValidityError("role only in facts", rule_str(r))
            if name == "role" and not is_ground(r.head):
                raise ValidityError("role only in facts", rule_str(r))
        for lit in r.body:
            name = predicate(lit.atom)[0]
            if name in ("init", "next"):
                raise ValidityError(f"{name} only in heads", rule_str(r))
            if name == "role":
                raise ValidityError("role only in facts", rule_str(r))
        _check_safety(r)

    g = predicate_graph(p.rules)
    for keyword in ("legal", "terminal", "goal"):
        if _depends_on(g, _names(g, keyword), _names(g, "does")):
            raise ValidityError(f"{keyword} depends on does")
    if _depends_on(g, _names(g, "init"), _names(g, "true", "does")):
        raise ValidityError("init depends on true or does")

    strata = predicate_strata(g)
    if strata is None:
        raise ValidityError("not stratified")

    roles = [r.head.args[0] for r in p.rules if r.is_fact and predicate(r.head) == ("role", 1)]
    if len(set(roles)) != 3:
        raise ValidityError("exactly three roles required", f"found {len(set(roles))}")
    if "random" not in roles:
        raise ValidityError("missing random role")
    return ValidationReport(roles=roles, strata=strata, rule_count=len(p.rules))


def _check_safety(r: Rule):
    bound = set()
    for lit in r.body:
        if lit.positive:
            bound.update(variables(lit.atom))
    need = set(variables(r.head)) if r.head is not None else set()
    for lit in r.body:
        if not lit.positive:
            need.update(variables(lit.atom))
    unsafe = need - bound
    if unsafe:
        names = ", ".join(sorted(v.name for v in unsafe))
        raise ValidityError("unsafe rule", f"{names} in {rule_str(r)}")


# ---------------------------------------------------------------------------
# single-player stochastic variant

_ROLE_ARG = {("does", 2), ("legal", 2), ("input", 2)}


def _expand_role_variables(r: Rule, roles) -> list[Rule]:
    role_vars = []
    atoms = ([r.head] if r.head is not None else []) + [l.atom for l in r.body]
    for a in atoms:
        if isinstance(a, Compound) and predicate(a) in _ROLE_ARG and isinstance(a.args[0], Variable):
            if a.args[0] not in role_vars:
                role_vars.append(a.args[0])
    out = [r]
    for v in role_vars:
        out = [substitute_rule(x, {v: role}) for x in out for role in roles]
    return out


def with_random_opponent(p: GdlProgram, opponent) -> GdlProgram:
    """Hand ``opponent``'s moves to the random player, leaving ``opponent`` a single ``noop``.

    The original random role must have exactly one move (a deterministic game);
    that move is taken to happen at every step and is dropped.
    """
    roles = list(dict.fromkeys(p.roles))
    if opponent not in roles or opponent == "random":
        raise ValueError(f"{opponent!r} is not an adversarial role")
    random_moves = {r.head.args[1] for r in p.rules
                    if r.is_fact and predicate(r.head) == ("input", 2) and r.head.args[0] == "random"}
    if len(random_moves) != 1:
        raise ValueError("random opponent requires a game whose random role has exactly one move")
    (idle,) = random_moves

    out = []
    for rule in p.rules:
        for r in _expand_role_variables(rule, roles):
            rewritten = _rewrite_for_random(r, opponent, idle)
            if rewritten is not None:
                out.append(rewritten)
    out.append(Rule(Compound("input", (opponent, "noop"))))
    out.append(Rule(Compound("legal", (opponent, "noop"))))
    return GdlProgram(rules=out, roles=p.roles, predicate_graph=predicate_graph(out))


def _rewrite_for_random(r: Rule, opponent, idle) -> Rule | None:
    head = r.head
    if isinstance(head, Compound) and predicate(head) in _ROLE_ARG:
        if head.args[0] == "random":
            return None
        if head.args[0] == opponent:
            head = Compound(head.functor, ("random",) + head.args[1:])
    body = []
    binding = {}
    for lit in r.body:
        a = substitute(lit.atom, binding)
        if isinstance(a, Compound) and predicate(a) in _ROLE_ARG:
            if a.args[0] == "random":
                move = a.args[1]
                if isinstance(move, Variable):
                    if not lit.positive:
                        return None
                    binding[move] = idle
                    continue
                if (move == idle) == lit.positive:
                    continue
                return None
            if a.args[0] == opponent:
                a = Compound(a.functor, ("random",) + a.args[1:])
        body.append(Literal(a, lit.positive))
    rule = Rule(head, tuple(body), r.choice)
    return substitute_rule(rule, binding) if binding else rule
