"""Command-line front end: validate, ground, emm, encode, solve, bench."""
from __future__ import annotations

import argparse
import json
import multiprocessing
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

from . import corpus as corpus_mod
from .emm import solve as emm_solve
from .encoder import encode
from .gdl import GdlProgram, ParseError, ValidityError, parse_gdl_file, validate, with_random_opponent
from .grounder import ground
from .pipeline import to_xssat
from .semantics import GameSemantics
from .xssat import evaluate, write_xssat

METHODS = ("emm", "xssat-baseline", "xssat-dependency")


def percent(p: Fraction) -> str:
    """Percentage with two decimals, rounding half to even (computed exactly)."""
    x = Fraction(p) * 10000
    q, r = divmod(x.numerator, x.denominator)
    if 2 * r > x.denominator or (2 * r == x.denominator and q % 2):
        q += 1
    return f"{q // 100}.{q % 100:02d}"


@dataclass
class SolveReport:
    game_id: str
    method: str
    maximizer: str
    horizon: int
    probability: Fraction
    probability_pct: str
    wall_time_ms: float
    stats: dict = field(default_factory=dict)

    def record(self) -> dict:
        d = asdict(self)
        d["probability"] = str(self.probability)
        return d

    def line(self) -> str:
        return (f"{self.game_id} {self.method} maximizer={self.maximizer} horizon={self.horizon} "
                f"probability={self.probability} pct={self.probability_pct} time_ms={self.wall_time_ms:.1f}")


def prepare(program: GdlProgram, maximizer="first", opponent="adversary"):
    """Game to solve and its (x, o) roles; ``opponent="random"`` replaces o by a uniform random mover."""
    validate(program)
    x, o = GameSemantics(program).adversaries(maximizer)
    if opponent == "random":
        program = with_random_opponent(program, o)
    elif opponent != "adversary":
        raise ValueError(f"unknown opponent mode {opponent!r}")
    return program, x, o


def run_method(program, x, o, n, method, game_id="", maximizer=None, use_cache=True) -> SolveReport:
    start = time.perf_counter()
    stats = {}
    if method == "emm":
        res = emm_solve(GameSemantics(program), x, n, use_cache)
        value = res.probability
        stats.update(res.stats)
        if res.best_first_move is not None:
            stats["best_first_move"] = str(res.best_first_move)
    elif method in ("xssat-baseline", "xssat-dependency"):
        sq = encode(program, n, x, o, method.split("-", 1)[1])
        f, _ = to_xssat(sq)
        stats.update(atoms=len(sq.program.atoms), clauses=len(f.clauses.clauses), variables=f.num_vars)
        value = evaluate(f, use_cache, stats)
    else:
        raise ValueError(f"unknown method {method!r}")
    ms = (time.perf_counter() - start) * 1000
    return SolveReport(game_id, method, maximizer or x, n, value, percent(value), ms, stats)


# ---------------------------------------------------------------------------

def default_opponent(path) -> str:
    """Opponent mode recorded for ``path`` in a manifest beside it, else ``adversary``."""
    path = Path(path)
    manifest = path.parent / "manifest.txt"
    if manifest.exists():
        for e in corpus_mod.parse_manifest(manifest.read_text(), path.parent):
            if e.gdl_path.name == path.name:
                return e.opponent
    return "adversary"


def _load(args):
    program = parse_gdl_file(args.game)
    opponent = args.opponent or default_opponent(args.game)
    return prepare(program, args.maximizer, opponent)


def cmd_validate(args, out):
    program = parse_gdl_file(args.game)
    print(validate(program), file=out)
    return 0


def cmd_ground(args, out):
    if args.horizon is None:
        program = parse_gdl_file(args.game)
        validate(program)
        out.write(ground(program).dump())
        return 0
    program, x, o = _load(args)
    sq = encode(program, args.horizon, x, o, args.quant)
    out.write(sq.program.dump())
    return 0


def _emit(reports, args, out):
    if args.json:
        json.dump([r.record() for r in reports], out, indent=2)
        out.write("\n")
    else:
        for r in reports:
            print(r.line(), file=out)


def cmd_emm(args, out):
    program, x, o = _load(args)
    r = run_method(program, x, o, args.horizon, "emm", Path(args.game).stem, args.maximizer)
    _emit([r], args, out)
    return 0


def cmd_solve(args, out):
    program, x, o = _load(args)
    method = "emm" if args.method == "emm" else f"xssat-{args.quant}"
    r = run_method(program, x, o, args.horizon, method, Path(args.game).stem, args.maximizer)
    _emit([r], args, out)
    return 0


def cmd_encode(args, out):
    program, x, o = _load(args)
    sq = encode(program, args.horizon, x, o, args.quant)
    if args.emit == "sqasp":
        text, sidecar = sq.to_text(), None
    else:
        f, vm = to_xssat(sq)
        text, sidecar = write_xssat(f), vm.sidecar()
    if args.out:
        Path(args.out).write_text(text)
        if sidecar is not None:
            Path(args.out + ".map").write_text(sidecar)
    else:
        out.write(text)
    return 0


def _bench_worker(conn, entry, variant, method, horizon):
    try:
        program, x, o = prepare(parse_gdl_file(entry.gdl_path), variant, entry.opponent)
        r = run_method(program, x, o, horizon, method, entry.game_id, variant)
        conn.send(("ok", r))
    except Exception as exc:  # reported, never fatal for the run
        conn.send(("error", f"{type(exc).__name__}: {exc}"))
    finally:
        conn.close()


def bench(entries, methods, budget, horizon=None):
    """Rows ``(entry, variant, method, horizon, report or None, status)``; each solve runs under ``budget`` seconds."""
    ctx = multiprocessing.get_context("fork")
    rows = []
    for e in entries:
        h = e.horizon if horizon is None else min(horizon, e.horizon)
        for variant in e.maximizer_variants:
            for method in methods:
                recv, send = ctx.Pipe(duplex=False)
                proc = ctx.Process(target=_bench_worker, args=(send, e, variant, method, h))
                proc.start()
                send.close()
                status, report = "timeout", None
                if recv.poll(budget):
                    try:
                        kind, payload = recv.recv()
                    except EOFError:
                        kind, payload = "error", "worker died"
                    if kind == "ok":
                        status, report = "ok", payload
                    else:
                        status = payload
                if proc.is_alive():
                    proc.kill()
                proc.join()
                rows.append((e, variant, method, h, report, status))
    return rows


def bench_flags(rows):
    """Per row: ``MISMATCH`` against the expected percentage, ``DISAGREE`` between methods."""
    values = {}
    for e, variant, method, h, r, status in rows:
        if r is not None:
            values.setdefault((e.game_id, variant, h), set()).add(r.probability)
    flags = []
    for e, variant, method, h, r, status in rows:
        f = []
        if r is not None:
            exp = e.expected.get(variant)
            if exp is not None and h == e.horizon and r.probability_pct != exp:
                f.append("MISMATCH")
            if len(values[e.game_id, variant, h]) > 1:
                f.append("DISAGREE")
        flags.append(",".join(f))
    return flags


def cmd_bench(args, out):
    entries = corpus_mod.corpus(args.corpus)
    if args.games:
        wanted = set(args.games.split(","))
        entries = [e for e in entries if e.game_id in wanted]
    methods = args.methods.split(",")
    for m in methods:
        if m not in METHODS:
            raise ValueError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    rows = bench(entries, methods, args.budget, args.horizon)
    flags = bench_flags(rows)
    if args.json:
        recs = []
        for (e, variant, method, h, r, status), flag in zip(rows, flags):
            rec = r.record() if r is not None else {"game_id": e.game_id, "method": method,
                                                    "maximizer": variant, "horizon": h}
            rec.update(status=status, expected=e.expected.get(variant), flags=flag)
            recs.append(rec)
        json.dump(recs, out, indent=2)
        out.write("\n")
        return 0
    header = f"{'game':<16} {'variant':<7} {'method':<17} {'h':>3} {'pct':>7} {'expected':>8} {'flags':<17} {'time_ms':>10}  probability"
    print(header, file=out)
    for (e, variant, method, h, r, status), flag in zip(rows, flags):
        exp = e.expected.get(variant, "-") if h == e.horizon else "-"
        if r is None:
            print(f"{e.game_id:<16} {variant:<7} {method:<17} {h:>3} {status if status == 'timeout' else 'error':>7} "
                  f"{exp:>8} {'':<17} {'-':>10}  {'' if status == 'timeout' else status}", file=out)
        else:
            print(f"{e.game_id:<16} {variant:<7} {method:<17} {h:>3} {r.probability_pct:>7} {exp:>8} "
                  f"{flag:<17} {r.wall_time_ms:>10.1f}  {r.probability}", file=out)
    return 0


def build_parser():
    ap = argparse.ArgumentParser(prog="stochgdl", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    def game_args(p, horizon_required=True):
        p.add_argument("game", help="GDL file")
        p.add_argument("--horizon", type=int, required=horizon_required, default=None)
        p.add_argument("--maximizer", default="first", help="first, second or a role name (default first)")
        p.add_argument("--opponent", choices=("adversary", "random"), default=None,
                       help="random: replace the minimizing player by a uniform random mover "
                            "(default: as listed in a manifest.txt beside the game, else adversary)")
        p.add_argument("--json", action="store_true", help="structured output")

    p = sub.add_parser("validate", help="check the GDL restrictions and print a report")
    p.add_argument("game")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ground", help="dump the ground game, or with --horizon the ground encoded program")
    game_args(p, horizon_required=False)
    p.add_argument("--quant", choices=("baseline", "dependency"), default="baseline")
    p.set_defaults(func=cmd_ground)

    p = sub.add_parser("emm", help="expectiminimax winning probability")
    game_args(p)
    p.set_defaults(func=cmd_emm)

    p = sub.add_parser("encode", help="write the SQASP program or its XSSAT translation")
    game_args(p)
    p.add_argument("--quant", choices=("baseline", "dependency"), default="baseline")
    p.add_argument("--emit", choices=("sqasp", "xssat"), default="sqasp")
    p.add_argument("--out", help="output file (an .xssat also gets a PATH.map variable map)")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("solve", help="winning probability by expectiminimax or the XSSAT pipeline")
    game_args(p)
    p.add_argument("--method", choices=("emm", "xssat"), default="emm")
    p.add_argument("--quant", choices=("baseline", "dependency"), default="baseline")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="solve corpus entries, flagging mismatches")
    p.add_argument("--corpus", default=None, help="directory with manifest.txt (default: bundled games)")
    p.add_argument("--budget", type=float, default=120.0, help="seconds per solve (default 120)")
    p.add_argument("--methods", default="emm", help="comma-separated subset of " + ",".join(METHODS))
    p.add_argument("--games", default=None, help="comma-separated game ids")
    p.add_argument("--horizon", type=int, default=None, help="cap every entry's horizon")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except (ParseError, ValidityError, ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
