"""Exact evaluation of stochastic SAT formulas with existential, universal and chance quantifiers.

The evaluator is a DPLL-style search over the prefix with

* quantifier-aware unit propagation: a unit clause on an existential variable
  assigns it, on a universal variable makes the node worth 0, on a chance
  variable assigns it and scales the node value by the forced branch's weight;
* cutoffs: an existential node stops at 1, a universal node at 0;
* variables without occurrences in unsatisfied clauses are skipped;
* an optional cache keyed on the residual clause set. The key is an
  incrementally maintained 128-bit multiset hash of the residual clauses.

Within a block of chance variables the branching variable is the one in the
shortest residual clause (like quantifiers commute, so this is a free choice).
"""
from __future__ import annotations

import random
import re
import sys
from dataclasses import dataclass
from fractions import Fraction

from .lp2cnf import CnfFormula

EXISTS, FORALL, CHANCE = "e", "a", "r"
_MASK = (1 << 128) - 1
_K1 = 0x9E3779B97F4A7C15F39CC0605CEDC835
_K2 = 0xC2B2AE3D27D4EB4F165667B19E3779F9


class PrefixError(ValueError):
    pass


class FormatError(ValueError):
    def __init__(self, message, line):
        self.line = line
        super().__init__(f"line {line}: {message}")


@dataclass
class XssatFormula:
    prefix: list             # (var, quantifier, probability or None)
    clauses: CnfFormula

    @property
    def num_vars(self):
        return self.clauses.num_vars

    def check(self):
        seen = {}
        for v, q, p in self.prefix:
            if v in seen:
                raise PrefixError(f"variable {v} quantified twice")
            if q not in (EXISTS, FORALL, CHANCE):
                raise PrefixError(f"unknown quantifier {q!r}")
            if q == CHANCE and not 0 <= p <= 1:
                raise PrefixError(f"chance probability {p} outside [0, 1]")
            seen[v] = q
        for c in self.clauses.clauses:
            for l in c:
                if abs(l) not in seen:
                    raise PrefixError(f"variable {abs(l)} not in prefix")


def _mix(s):
    s = (s * _K1) & _MASK
    s ^= s >> 61
    return (s * _K2) & _MASK


class _Search:
    def __init__(self, f: XssatFormula, use_cache: bool):
        f.check()
        nv = max([f.num_vars] + [v for v, _, _ in f.prefix])
        self.use_cache = use_cache
        clauses = []
        for c in f.clauses.clauses:
            c = list(dict.fromkeys(c))
            if any(-l in c for l in c):
                continue
            clauses.append(c)
        self.clauses = clauses
        self.cvars = [[abs(l) for l in c] for c in clauses]
        self.size = [len(c) for c in clauses]
        self.nfalse = [0] * len(clauses)
        self.sat = [0] * len(clauses)
        self.occ = [[] for _ in range(2 * nv + 2)]
        for ci, c in enumerate(clauses):
            for l in c:
                self.occ[self._li(l)].append(ci)
        self.live = [0] * (nv + 1)
        for c in clauses:
            for l in c:
                self.live[abs(l)] += 1
        self.value = [0] * (nv + 1)      # 0 unassigned, 1 true, -1 false
        self.quant = [EXISTS] * (nv + 1)
        self.prob = [None] * (nv + 1)
        blocks = []
        for v, q, p in f.prefix:
            self.quant[v] = q
            self.prob[v] = Fraction(p) if p is not None else None
            if blocks and blocks[-1][0] == q:
                blocks[-1][1].append(v)
            else:
                blocks.append((q, [v]))
        self.blocks = blocks
        self.trail = []
        self.cache = {}
        self.hits = 0
        self.nodes = 0
        rng = random.Random(0x5EED)
        self.rnd = [rng.getrandbits(128) for _ in range(2 * nv + 2)]
        self.csum = [sum(self.rnd[self._li(l)] for l in c) & _MASK for c in clauses]
        self.key = sum(_mix(s) for s in self.csum) & _MASK if use_cache else 0

    @staticmethod
    def _li(l):
        return 2 * l if l > 0 else -2 * l + 1

    # -- assignment with propagation ------------------------------------

    def _set(self, v, val, queue):
        """Assign and update counters; returns False on an empty clause."""
        self.value[v] = val
        self.trail.append(v)
        tl, fl = (2 * v, 2 * v + 1) if val > 0 else (2 * v + 1, 2 * v)
        cache = self.use_cache
        sat, nfalse, size, live, csum = self.sat, self.nfalse, self.size, self.live, self.csum
        key = self.key
        for ci in self.occ[tl]:
            sat[ci] += 1
            if sat[ci] == 1:
                for x in self.cvars[ci]:
                    live[x] -= 1
                if cache:
                    h = (csum[ci] * _K1) & _MASK
                    key -= ((h ^ (h >> 61)) * _K2) & _MASK
        ok = True
        r = self.rnd[fl]
        for ci in self.occ[fl]:
            nfalse[ci] += 1
            if sat[ci] == 0:
                if cache:
                    s = csum[ci]
                    h = (s * _K1) & _MASK
                    key -= ((h ^ (h >> 61)) * _K2) & _MASK
                    s = csum[ci] = (s - r) & _MASK
                    h = (s * _K1) & _MASK
                    key += ((h ^ (h >> 61)) * _K2) & _MASK
                left = size[ci] - nfalse[ci]
                if left == 1:
                    queue.append(ci)
                elif left == 0:
                    ok = False
            elif cache:
                csum[ci] = (csum[ci] - r) & _MASK
        self.key = key & _MASK
        return ok

    def _unset_to(self, mark):
        trail, value = self.trail, self.value
        cache = self.use_cache
        sat, nfalse, live, csum, occ, rnd, cvars = self.sat, self.nfalse, self.live, self.csum, self.occ, self.rnd, self.cvars
        key = self.key
        while len(trail) > mark:
            v = trail.pop()
            tl, fl = (2 * v, 2 * v + 1) if value[v] > 0 else (2 * v + 1, 2 * v)
            value[v] = 0
            r = rnd[fl]
            for ci in occ[fl]:
                nfalse[ci] -= 1
                if cache:
                    s = csum[ci]
                    if sat[ci] == 0:
                        h = (s * _K1) & _MASK
                        key -= ((h ^ (h >> 61)) * _K2) & _MASK
                        s = csum[ci] = (s + r) & _MASK
                        h = (s * _K1) & _MASK
                        key += ((h ^ (h >> 61)) * _K2) & _MASK
                    else:
                        csum[ci] = (s + r) & _MASK
            for ci in occ[tl]:
                sat[ci] -= 1
                if sat[ci] == 0:
                    for x in cvars[ci]:
                        live[x] += 1
                    if cache:
                        h = (csum[ci] * _K1) & _MASK
                        key += ((h ^ (h >> 61)) * _K2) & _MASK
        self.key = key & _MASK

    def _propagate(self, queue):
        """Run unit propagation; returns the accumulated chance weight, or None if the node is worth 0."""
        weight = Fraction(1)
        value, sat, clauses = self.value, self.sat, self.clauses
        while queue:
            ci = queue.pop()
            if sat[ci]:
                continue
            unit = None
            for l in clauses[ci]:
                if value[abs(l)] == 0:
                    unit = l
                    break
            if unit is None:
                return None
            v = abs(unit)
            q = self.quant[v]
            if q == FORALL:
                return None
            if q == CHANCE:
                weight *= self.prob[v] if unit > 0 else 1 - self.prob[v]
                if weight == 0:
                    return None
            if not self._set(v, 1 if unit > 0 else -1, queue):
                return None
        return weight

    def _assign(self, v, val):
        queue = []
        if not self._set(v, val, queue):
            return None
        return self._propagate(queue)

    # -- search ---------------------------------------------------------

    def _next(self, bi, vi):
        """First block position at or after (bi, vi) holding an open relevant variable."""
        blocks, value, live = self.blocks, self.value, self.live
        while bi < len(blocks):
            vs = blocks[bi][1]
            while vi < len(vs):
                v = vs[vi]
                if value[v] == 0 and live[v] > 0:
                    return bi, vi
                vi += 1
            bi += 1
            vi = 0
        return bi, 0

    def _pick_chance(self, bi, vi):
        value, live, clauses, sat = self.value, self.live, self.clauses, self.sat
        best, best_len = None, None
        for v in self.blocks[bi][1][vi:]:
            if value[v] != 0 or live[v] == 0:
                continue
            for li in (self._li(v), self._li(-v)):
                for ci in self.occ[li]:
                    if sat[ci] == 0:
                        n = self.size[ci] - self.nfalse[ci]
                        if best_len is None or n < best_len:
                            best, best_len = v, n
        return best

    def solve(self, bi=0, vi=0):
        bi, vi = self._next(bi, vi)
        if bi == len(self.blocks):
            return Fraction(1)
        key = self.key
        if self.use_cache:
            hit = self.cache.get(key)
            if hit is not None:
                self.hits += 1
                return hit
        self.nodes += 1
        q, vs = self.blocks[bi]
        if q == CHANCE:
            v = self._pick_chance(bi, vi)
            nvi = vi
        else:
            v = vs[vi]
            nvi = vi + 1
        mark = len(self.trail)
        if q == EXISTS:
            result = Fraction(0)
            for val in (1, -1):
                w = self._assign(v, val)
                if w is not None:
                    r = w * self.solve(bi, nvi)
                    if r > result:
                        result = r
                self._unset_to(mark)
                if result == 1:
                    break
        elif q == FORALL:
            result = Fraction(1)
            for val in (-1, 1):
                w = self._assign(v, val)
                r = Fraction(0) if w is None else w * self.solve(bi, nvi)
                self._unset_to(mark)
                if r < result:
                    result = r
                if result == 0:
                    break
        else:
            p = self.prob[v]
            result = Fraction(0)
            for val, weight in ((1, p), (-1, 1 - p)):
                if weight == 0:
                    continue
                w = self._assign(v, val)
                if w is not None:
                    result += weight * w * self.solve(bi, nvi)
                self._unset_to(mark)
        if self.use_cache:
            self.cache[key] = result
        return result

    def run(self):
        queue = []
        for ci, c in enumerate(self.clauses):
            if not c:
                return Fraction(0)
            if len(c) == 1:
                queue.append(ci)
        w = self._propagate(queue)
        if w is None:
            return Fraction(0)
        return w * self.solve()


def evaluate(f: XssatFormula, use_cache=True, stats=None) -> Fraction:
    """Maximal satisfying probability of ``f`` (exact rational)."""
    limit = sys.getrecursionlimit()
    sys.setrecursionlimit(max(limit, 20000 + 4 * len(f.prefix)))
    try:
        s = _Search(f, use_cache)
        value = s.run()
    finally:
        sys.setrecursionlimit(limit)
    if stats is not None:
        stats.update(nodes=s.nodes, cache_hits=s.hits, cache_size=len(s.cache))
    return value


# ---------------------------------------------------------------------------
# text format

def write_xssat(f: XssatFormula) -> str:
    lines = [f"p xssat {f.num_vars} {len(f.clauses.clauses)}"]
    for v, q, p in f.prefix:
        if q == CHANCE:
            p = Fraction(p)
            lines.append(f"r {p.numerator}/{p.denominator} {v} 0")
        else:
            lines.append(f"{q} {v} 0")
    for c in f.clauses.clauses:
        lines.append(" ".join(map(str, list(c) + [0])))
    return "\n".join(lines) + "\n"


_PROB = re.compile(r"^(\d+)/(\d+)$")


def read_xssat(text: str) -> XssatFormula:
    header = None
    prefix, clauses = [], []
    pending = []
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tok = line.split()
        if tok[0] == "p":
            if header is not None or len(tok) != 4 or tok[1] != "xssat":
                raise FormatError("bad header", no)
            try:
                header = (int(tok[2]), int(tok[3]))
            except ValueError:
                raise FormatError("bad header", no) from None
            continue
        if header is None:
            raise FormatError("missing header", no)
        if tok[0] in ("e", "a", "r"):
            if clauses or pending:
                raise FormatError("quantifier after clauses", no)
            try:
                if tok[0] == "r":
                    m = _PROB.match(tok[1])
                    if not m or len(tok) != 4 or tok[3] != "0":
                        raise FormatError("bad chance line", no)
                    p = Fraction(int(m.group(1)), int(m.group(2)))
                    prefix.append((int(tok[2]), CHANCE, p))
                else:
                    if len(tok) != 3 or tok[2] != "0":
                        raise FormatError("bad quantifier line", no)
                    prefix.append((int(tok[1]), tok[0], None))
            except (ValueError, ZeroDivisionError):
                raise FormatError("bad quantifier line", no) from None
            continue
        try:
            nums = [int(t) for t in tok]
        except ValueError:
            raise FormatError(f"unexpected token in {line!r}", no) from None
        for n in nums:
            if n == 0:
                clauses.append(pending)
                pending = []
            else:
                if abs(n) > header[0]:
                    raise FormatError(f"variable {abs(n)} exceeds declared {header[0]}", no)
                pending.append(n)
    if header is None:
        raise FormatError("missing header", 1)
    if pending:
        raise FormatError("unterminated clause", len(text.splitlines()))
    if len(clauses) != header[1]:
        raise FormatError(f"expected {header[1]} clauses, found {len(clauses)}", len(text.splitlines()))
    f = XssatFormula(prefix, CnfFormula(header[0], clauses))
    try:
        f.check()
    except PrefixError as e:
        raise FormatError(str(e), 1) from None
    return f
