"""Game -> SQASP -> CNF -> XSSAT -> probability, end to end."""
from __future__ import annotations

from .encoder import SqaspProgram, encode
from .lp2cnf import VarMap, completion
from .xssat import EXISTS, XssatFormula, evaluate


def to_xssat(sq: SqaspProgram) -> tuple[XssatFormula, VarMap]:
    """Atom variables follow the quantifier prefix; body variables form the innermost existential block."""
    cnf, vm = completion(sq.program, [q.atom for q in sq.prefix])
    prefix = [(vm.atom_vars[q.atom], q.quantifier, q.probability) for q in sq.prefix]
    prefix += [(v, EXISTS, None) for v in sorted(vm.aux_vars)]
    return XssatFormula(prefix, cnf), vm


def solve_xssat(game, n: int, x, o, method="baseline", use_cache=True, stats=None):
    sq = encode(game, n, x, o, method)
    f, _ = to_xssat(sq)
    if stats is not None:
        stats.update(atoms=len(sq.program.atoms), clauses=len(f.clauses.clauses), variables=f.num_vars)
    return evaluate(f, use_cache, stats)
