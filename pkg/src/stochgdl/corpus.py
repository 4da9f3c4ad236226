"""Game corpus: GDL sources for the benchmark games and the manifest describing them.

Board games (Tic-Tac-Toe, Connect-k with gravity) and stochastic Nim are
produced from templates by :func:`board_game_gdl` and :func:`nim_gdl`; the
shipped ``games/*.gdl`` files are their output (``python -m stochgdl.corpus``
regenerates them). A chance parameter ``p = k/m`` is realised by giving the
random role ``m`` equiprobable outcomes, ``k`` of which favour the mover.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path

GAMES_DIR = Path(str(resources.files("stochgdl") / "games"))
MANIFEST = GAMES_DIR / "manifest.txt"


@dataclass
class CorpusEntry:
    game_id: str
    gdl_path: Path
    horizon: int
    chance_param: Fraction | None = None
    opponent: str = "adversary"
    maximizer_variants: tuple = ("first", "second")
    expected: dict = field(default_factory=dict)
    notes: str = ""

    def to_line(self) -> str:
        parts = [f"game_id={self.game_id}", f"gdl={self.gdl_path.name}", f"horizon={self.horizon}"]
        if self.chance_param is not None:
            parts.append(f"p={self.chance_param}")
        if self.opponent != "adversary":
            parts.append(f"opponent={self.opponent}")
        parts.append("variants=" + ",".join(self.maximizer_variants))
        for variant, pct in self.expected.items():
            parts.append(f"expected_{variant}={pct}")
        return " ".join(parts)


def parse_manifest(text: str, base: Path) -> list[CorpusEntry]:
    """One entry per line as whitespace-separated ``key=value`` pairs; ``#`` starts a comment."""
    entries = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = {}
        for item in line.split():
            key, sep, value = item.partition("=")
            if not sep:
                raise ValueError(f"manifest line {lineno}: expected key=value, got {item!r}")
            fields[key] = value
        try:
            entry = CorpusEntry(
                game_id=fields.pop("game_id"),
                gdl_path=base / fields.pop("gdl"),
                horizon=int(fields.pop("horizon")),
            )
        except KeyError as exc:
            raise ValueError(f"manifest line {lineno}: missing {exc.args[0]}") from None
        if "p" in fields:
            entry.chance_param = Fraction(fields.pop("p"))
        entry.opponent = fields.pop("opponent", "adversary")
        if "variants" in fields:
            entry.maximizer_variants = tuple(fields.pop("variants").split(","))
        for key in list(fields):
            if key.startswith("expected_"):
                entry.expected[key[len("expected_"):]] = fields.pop(key)
        if fields:
            raise ValueError(f"manifest line {lineno}: unknown keys {sorted(fields)}")
        entries.append(entry)
    return entries


def corpus(directory=None) -> list[CorpusEntry]:
    directory = Path(directory) if directory is not None else GAMES_DIR
    return parse_manifest((directory / "manifest.txt").read_text(), directory)


def entry(game_id: str, directory=None) -> CorpusEntry:
    for e in corpus(directory):
        if e.game_id == game_id:
            return e
    raise KeyError(game_id)


# ---------------------------------------------------------------------------
# templates

def _outcome_facts(keep: int, flip: int) -> list[str]:
    if flip == 0 and keep == 1:
        return ["input(random,noop).", "legal(random,noop)."]
    lines = [" ".join(f"keeps(keep({i}))." for i in range(1, keep + 1))]
    if flip:
        lines.append(" ".join(f"flips(flip({i}))." for i in range(1, flip + 1)))
    lines += ["input(random,R) :- keeps(R).", "legal(random,R) :- keeps(R)."]
    if flip:
        lines += ["input(random,R) :- flips(R).", "legal(random,R) :- flips(R)."]
    return lines


def _line_rule(direction: str, k: int) -> str:
    lits = ["color(W)", "true(cell(X1,Y1,W))"]
    for i in range(1, k):
        a, b = i, i + 1
        if direction == "row":
            lits += [f"succ(X{a},X{b})", f"true(cell(X{b},Y1,W))"]
        elif direction == "column":
            lits += [f"succ(Y{a},Y{b})", f"true(cell(X1,Y{b},W))"]
        elif direction == "diagonal":
            lits += [f"succ(X{a},X{b})", f"succ(Y{a},Y{b})", f"true(cell(X{b},Y{b},W))"]
        else:
            lits += [f"succ(X{a},X{b})", f"succ(Y{b},Y{a})", f"true(cell(X{b},Y{b},W))"]
    return "line(W) :- " + ", ".join(lits) + "."


def board_game_gdl(title: str, width: int, height: int, k: int, gravity: bool,
                   keep: int = 1, flip: int = 0) -> str:
    """k-in-a-row on a ``width`` x ``height`` board.

    With ``flip > 0`` the placed piece takes the mover's colour with
    probability ``keep / (keep + flip)`` and the opponent's otherwise.
    """
    stochastic = flip > 0 or keep > 1
    out = [f"% {title}", "role(xplayer). role(oplayer). role(random).",
           "player(xplayer). player(oplayer).",
           "mark(xplayer,x). mark(oplayer,o). opp(xplayer,o). opp(oplayer,x).",
           "color(x). color(o).",
           " ".join(f"col({i})." for i in range(1, width + 1)),
           " ".join(f"row({i})." for i in range(1, height + 1)),
           " ".join(f"succ({i},{i + 1})." for i in range(1, max(width, height))),
           "",
           "base(cell(X,Y,x)) :- col(X), row(Y).",
           "base(cell(X,Y,o)) :- col(X), row(Y).",
           "base(cell(X,Y,b)) :- col(X), row(Y).",
           "base(control(P)) :- player(P).",
           ""]
    move = "drop(X)" if gravity else "mark(X,Y)"
    if gravity:
        out.append("input(P,drop(X)) :- player(P), col(X).")
    else:
        out.append("input(P,mark(X,Y)) :- player(P), col(X), row(Y).")
    out.append("input(P,noop) :- player(P).")
    out += _outcome_facts(keep, flip)
    out += ["",
            "init(cell(X,Y,b)) :- col(X), row(Y).",
            "init(control(xplayer)).",
            "",
            "filled(X,Y) :- true(cell(X,Y,x)).",
            "filled(X,Y) :- true(cell(X,Y,o))."]
    if gravity:
        out += ["target(X,1) :- true(cell(X,1,b)).",
                "target(X,Y) :- true(cell(X,Y,b)), succ(Z,Y), filled(X,Z)."]
    else:
        out += ["target(X,Y) :- true(cell(X,Y,b))."]
    out += [f"legal(P,{move}) :- true(control(P)), target(X,Y).",
            "legal(xplayer,noop) :- true(control(oplayer)).",
            "legal(oplayer,noop) :- true(control(xplayer)).",
            ""]
    if gravity:
        out.append("placed(X,Y) :- does(P,drop(X)), target(X,Y).")
        place = "does(P,drop(X)), target(X,Y)"
    else:
        out.append("placed(X,Y) :- does(P,mark(X,Y)).")
        place = "does(P,mark(X,Y)), true(cell(X,Y,b))"
    if stochastic:
        out.append(f"next(cell(X,Y,W)) :- {place}, does(random,R), keeps(R), mark(P,W).")
        if flip:
            out.append(f"next(cell(X,Y,W)) :- {place}, does(random,R), flips(R), opp(P,W).")
    else:
        out.append(f"next(cell(X,Y,W)) :- {place}, mark(P,W).")
    out += ["next(cell(X,Y,x)) :- true(cell(X,Y,x)).",
            "next(cell(X,Y,o)) :- true(cell(X,Y,o)).",
            "next(cell(X,Y,b)) :- true(cell(X,Y,b)), not placed(X,Y).",
            "next(control(oplayer)) :- true(control(xplayer)).",
            "next(control(xplayer)) :- true(control(oplayer)).",
            ""]
    for d in ("row", "column", "diagonal", "antidiagonal"):
        out.append(_line_rule(d, k))
    out += ["open :- true(cell(X,Y,b)).",
            "",
            "wins(P) :- mark(P,W), line(W).",
            "goal(P,100) :- wins(P).",
            "goal(P,0) :- player(P), not wins(P).",
            "terminal :- line(x).",
            "terminal :- line(o).",
            "terminal :- not open."]
    return "\n".join(out) + "\n"


def nim_gdl(pile: int, add: int = 1, stay: int = 1) -> str:
    """Stochastic Nim: take 1 or 2 from one pile; emptying it wins.

    After every player move the random role adds one piece with probability
    ``add / (add + stay)``. The game is drawn once both players made ``pile``
    moves, i.e. after ``4 * pile`` steps.
    """
    horizon = 4 * pile
    out = [f"% Stochastic Nim, initial pile {pile}, draw after {pile} moves each",
           "role(first). role(second). role(random).",
           "player(first). player(second).",
           "turn(first). turn(second). turn(after(first)). turn(after(second)).",
           "follows(first,after(first)). follows(after(first),second).",
           "follows(second,after(second)). follows(after(second),first).",
           " ".join(f"size({i})." for i in range(0, pile + 1)),
           " ".join(f"time({i})." for i in range(0, horizon + 1)),
           " ".join(f"succ({i},{i + 1})." for i in range(0, horizon)),
           "",
           "base(pile(N)) :- size(N).",
           "base(control(T)) :- turn(T).",
           "base(step(N)) :- time(N).",
           "",
           "input(P,take(1)) :- player(P).",
           "input(P,take(2)) :- player(P).",
           "input(P,noop) :- player(P).",
           " ".join(f"adds(add({i}))." for i in range(1, add + 1)),
           " ".join(f"stays(stay({i}))." for i in range(1, stay + 1)),
           "input(random,R) :- adds(R).",
           "input(random,R) :- stays(R).",
           "input(random,noop).",
           "",
           f"init(pile({pile})).",
           "init(control(first)).",
           "init(step(0)).",
           "",
           "players_turn :- true(control(P)), player(P).",
           "legal(P,take(1)) :- player(P), true(control(P)), true(pile(N)), succ(M,N).",
           "legal(P,take(2)) :- player(P), true(control(P)), true(pile(N)), succ(M,N), succ(K,M).",
           "legal(P,noop) :- player(P), not true(control(P)).",
           "legal(random,R) :- adds(R), not players_turn.",
           "legal(random,R) :- stays(R), not players_turn.",
           "legal(random,noop) :- players_turn.",
           "",
           "next(pile(M)) :- does(P,take(1)), true(pile(N)), succ(M,N).",
           "next(pile(K)) :- does(P,take(2)), true(pile(N)), succ(M,N), succ(K,M).",
           "next(pile(M)) :- does(random,R), adds(R), true(pile(N)), succ(N,M).",
           "next(pile(N)) :- does(random,R), stays(R), true(pile(N)).",
           "next(control(U)) :- true(control(T)), follows(T,U).",
           "next(step(M)) :- true(step(N)), succ(N,M).",
           "",
           "emptied_by(P) :- true(pile(0)), true(control(after(P))).",
           "goal(P,100) :- emptied_by(P).",
           "goal(P,0) :- player(P), not emptied_by(P).",
           "terminal :- true(pile(0)).",
           f"terminal :- true(step({horizon})).",
           ]
    return "\n".join(out) + "\n"


BOARD_GAMES = {
    "tictactoe.gdl": ("Tic-Tac-Toe 3x3", 3, 3, 3, False, 1, 0),
    "connect3_4x4.gdl": ("Connect-3 on 4x4 with gravity", 4, 4, 3, True, 1, 0),
    "connect4_4x4.gdl": ("Connect-4 on 4x4 with gravity", 4, 4, 4, True, 1, 0),
    "stictactoe_p1_2.gdl": ("Stochastic Tic-Tac-Toe 3x3, own colour with probability 1/2", 3, 3, 3, False, 1, 1),
    "stictactoe_p4_5.gdl": ("Stochastic Tic-Tac-Toe 3x3, own colour with probability 4/5", 3, 3, 3, False, 4, 1),
    "sconnect3_4x4_p1_2.gdl": ("Stochastic Connect-3 4x4, own colour with probability 1/2", 4, 4, 3, True, 1, 1),
    "sconnect3_4x4_p4_5.gdl": ("Stochastic Connect-3 4x4, own colour with probability 4/5", 4, 4, 3, True, 4, 1),
    "sconnect4_4x4_p1_2.gdl": ("Stochastic Connect-4 4x4, own colour with probability 1/2", 4, 4, 4, True, 1, 1),
    "sconnect4_4x4_p4_5.gdl": ("Stochastic Connect-4 4x4, own colour with probability 4/5", 4, 4, 4, True, 4, 1),
}

NIM_PILES = (2, 3, 5, 30)


def write_games(directory=GAMES_DIR):
    os.makedirs(directory, exist_ok=True)
    for name, args in BOARD_GAMES.items():
        Path(directory, name).write_text(board_game_gdl(*args))
    for pile in NIM_PILES:
        Path(directory, f"nim_{pile}.gdl").write_text(nim_gdl(pile))


if __name__ == "__main__":
    write_games()
