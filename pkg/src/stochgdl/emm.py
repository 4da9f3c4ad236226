"""Exact expectiminimax: maximal probability that one player wins within n steps."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .semantics import GameSemantics

ONE = Fraction(1)
ZERO = Fraction(0)


class TurnTakingViolation(RuntimeError):
    pass


class NoLegalMove(RuntimeError):
    pass


@dataclass
class SolveResult:
    probability: Fraction
    best_first_move: object
    x: str
    o: str
    stats: dict = field(default_factory=dict)


class Expectiminimax:
    """Memoised evaluation of the win-probability recursion for player ``x`` against ``o``.

    The transposition table is keyed on ``(state, steps_remaining)``.
    """

    def __init__(self, sem: GameSemantics, x, o, use_cache=True):
        self.sem = sem
        self.x, self.o = x, o
        self.use_cache = use_cache
        self.table = {}
        self.views = {}
        self.hits = 0

    def view(self, state):
        v = self.views.get(state)
        if v is None:
            v = self.views[state] = self.sem.evaluate(state)
        return v

    def _moves(self, v):
        lx, lo, lr = v.legal[self.x], v.legal[self.o], v.legal["random"]
        if not lx or not lo or not lr:
            empty = [r for r, l in ((self.x, lx), (self.o, lo), ("random", lr)) if not l]
            raise NoLegalMove(f"{', '.join(empty)} without legal move in nonterminal state {sorted(map(str, v.state))}")
        if len(lx) > 1 and len(lo) > 1:
            raise TurnTakingViolation(f"both {self.x} and {self.o} have several legal moves "
                                      f"in {sorted(map(str, v.state))}")
        return lx, lo, lr

    def pxw(self, state, n: int) -> Fraction:
        key = (state, n)
        if self.use_cache:
            hit = self.table.get(key)
            if hit is not None:
                self.hits += 1
                return hit
        v = self.view(state)
        if v.terminal:
            value = ONE if 100 in v.goals.get(self.x, ()) else ZERO
        elif n == 0:
            value = ZERO
        else:
            value = max(self._action_values(v, n))
        if self.use_cache:
            self.table[key] = value
        return value

    def _action_values(self, v, n):
        """Value of each legal move of x (in move-domain order) at an evaluated nonterminal state."""
        lx, lo, lr = self._moves(v)
        weight = Fraction(1, len(lr))
        succ = self.sem.successor
        for ax in lx:
            worst = None
            for ao in lo:
                total = ZERO
                for ar in lr:
                    total += self.pxw(succ(v, {self.x: ax, self.o: ao, "random": ar}), n - 1)
                total *= weight
                if worst is None or total < worst:
                    worst = total
                    if worst == 0:
                        break
            yield worst

    def best_move(self, state, n):
        v = self.view(state)
        if v.terminal or n == 0:
            return self.pxw(state, n), None
        best, move = None, None
        lx = self._moves(v)[0]
        for ax, val in zip(lx, self._action_values(v, n)):
            if best is None or val > best:
                best, move = val, ax
        return best, move


def pxw(sem: GameSemantics, state, n: int, x, o, use_cache=True) -> Fraction:
    return Expectiminimax(sem, x, o, use_cache).pxw(frozenset(state), n)


def solve(sem: GameSemantics, maximizer, n: int, use_cache=True) -> SolveResult:
    """Winning probability of ``maximizer`` (role name or ``first``/``second``) from the initial state."""
    x, o = sem.adversaries(maximizer)
    search = Expectiminimax(sem, x, o, use_cache)
    value, move = search.best_move(sem.init(), n)
    stats = {"states": len(search.views), "table": len(search.table), "cache_hits": search.hits}
    return SolveResult(value, move, x, o, stats)
