"""Command-line interface.

Exit codes: 0 yes/holds, 1 no/fails, 2 unknown, 3 input or validation error.
"""
from __future__ import annotations

import argparse
import json
import logging
import random
import sys
from pathlib import Path

from .brs import Brs, format_position, is_normal_form, successors
from .checker import decide_problem, fragment_verdict, parse_fragment
from .decision import Verdict
from .oracle import DEFAULT_BUDGET, DEFAULT_DEPTH, explore, find_witness
from .petri.engine import DEFAULT_NODE_BUDGET
from .rdha import Rdha, bounded_iso_check, to_prs, validate, var_of
from .saturate import decompose
from .syntax import ParseError, parse_model, print_brs
from .terms import atom
from .witness import LassoWitness

log = logging.getLogger("prsbuchi")

EXIT = {Verdict.YES: 0, Verdict.NO: 1, Verdict.UNKNOWN: 2}
EXIT_ERROR = 3

SEMANTICS_NOTE = ("Verdicts quantify over the infinite runs from the start variable only; "
                  "finite maximal runs are ignored, so a formula holds vacuously when no infinite run exists.")


class InputError(Exception):
    pass


def load_model(path: str, allow_reserved: bool = False):
    try:
        src = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from e
    try:
        return parse_model(src, allow_reserved=allow_reserved)
    except ParseError as e:
        raise InputError(f"{path}:{e.line}:{e.col}: {e.msg}") from e


def load_brs(path: str, start: str | None, normal_form: bool = True) -> tuple[Brs, str | None]:
    """Parse a model as a BRS; an RDHA is validated and translated first."""
    m = load_model(path)
    if isinstance(m, Rdha):
        errs = validate(m)
        if errs:
            raise InputError(f"{path}: invalid RDHA: " + "; ".join(errs))
        b = to_prs(m)
        if start is not None and start not in b.vars:
            start = var_of(start)
    else:
        b = m
    if normal_form and not is_normal_form(b):
        raise InputError(f"{path}: not in normal form")
    if start is not None and start not in b.vars:
        raise InputError(f"{path}: unknown variable {start!r}")
    return b, start


def witness_steps(w: LassoWitness | None, b: Brs) -> list[dict]:
    """Prefix followed by one instance of the pump, as concrete steps."""
    if w is None:
        return []
    d = w.unroll(b, 1)
    if d is None:
        return []
    return [{"rule": s.rule, "position": format_position(s.position), "term": str(s.result)} for s in d.steps]


def emit(args, payload: dict, lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, indent=2, ensure_ascii=False))
    else:
        for ln in lines:
            print(ln)


def _budgets(args) -> dict:
    return {"nodeBudget": args.node_budget, "depth": args.depth}


def _payload(args, verdict: str, condition=None, witness=None, any_unknown=False, **extra) -> dict:
    out = {"command": args.command, "model": args.model, "from": getattr(args, "start", None),
           "verdict": verdict, "condition": condition, "witness": witness or [],
           "anyUnknown": any_unknown, "budgets": _budgets(args)}
    out.update(extra)
    return out


def cmd_check(args) -> int:
    b, x = load_brs(args.model, args.start)
    bundle = decompose(b)
    v = decide_problem(bundle, x, args.problem, args.node_budget)
    steps = witness_steps(v.witness, b)
    lines = [f"problem {args.problem} from {x}: {v.decision}"]
    if v.via is not None or v.condition.value != "None":
        lines.append(f"condition: {v.condition.value}" + (f" via {v.via}" if v.via else ""))
    if v.witness is not None:
        lines.append(f"witness ({v.witness.kind.value}, pump starts after {len(v.witness.prefix)} steps):")
        lines += [f"  {s['rule']:>14}  {s['term']}" for s in steps]
    emit(args, _payload(args, v.verdict.value, v.condition.value, steps, bundle.any_unknown), lines)
    return EXIT[v.verdict]


def cmd_mc(args) -> int:
    b, x = load_brs(args.model, args.start)
    try:
        phi = parse_fragment(args.formula)
        fv = fragment_verdict(b, x, phi, args.node_budget)
    except (ValueError, TypeError) as e:
        raise InputError(f"formula: {e}") from e
    word = {Verdict.YES: "holds", Verdict.NO: "fails", Verdict.UNKNOWN: "unknown"}[fv.verdict]
    steps = witness_steps(fv.decision.witness, b)
    lines = [f"{phi} from {x}: {word}" + (" (vacuously: no infinite run)" if fv.vacuous else "")]
    lines += [f"  problem {p}: {pv.verdict.value}" for p, pv in sorted(fv.problems.items())]
    if steps:
        lines.append("counterexample run:")
        lines += [f"  {s['rule']:>14}  {s['term']}" for s in steps]
    lines.append(SEMANTICS_NOTE)
    payload = _payload(args, word, None, steps, any(pv.decision.is_unknown for pv in fv.problems.values()),
                       formula=str(phi), vacuous=fv.vacuous,
                       problems={str(p): pv.verdict.value for p, pv in fv.problems.items()})
    emit(args, payload, lines)
    return EXIT[fv.verdict]


def cmd_decompose(args) -> int:
    b, _ = load_brs(args.model, None)
    bundle = decompose(b)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    (out / "rpar.brs").write_text(print_brs(bundle.rpar), encoding="utf-8")
    (out / "rseq.brs").write_text(print_brs(bundle.rseq), encoding="utf-8")
    prov = {"anyUnknown": bundle.any_unknown, "iterations": bundle.iterations, "rules": bundle.provenance}
    (out / "provenance.json").write_text(json.dumps(prov, indent=2), encoding="utf-8")
    lines = [f"rpar: {len(bundle.rpar.rules)} rules, rseq: {len(bundle.rseq.rules)} rules, "
             f"{bundle.iterations} iterations, anyUnknown={bundle.any_unknown}", f"written to {out}"]
    emit(args, _payload(args, "unknown" if bundle.any_unknown else "yes", any_unknown=bundle.any_unknown,
                        output=str(out)), lines)
    return 0


def cmd_rdha2prs(args) -> int:
    m = load_model(args.model)
    if not isinstance(m, Rdha):
        raise InputError(f"{args.model}: expected an rdha model")
    errs = validate(m)
    if errs:
        raise InputError(f"{args.model}: invalid RDHA: " + "; ".join(errs))
    b = to_prs(m)
    text = print_brs(b)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if args.check_depth:
        ok = bounded_iso_check(m, args.check_depth, b)
        log.info("bounded isomorphism check at depth %d: %s", args.check_depth, ok)
        if not ok:
            print("bounded isomorphism check failed", file=sys.stderr)
            return 1
    return 0


def cmd_sim(args) -> int:
    b, x = load_brs(args.model, args.start, normal_form=False)
    rng = random.Random(args.seed)
    t = atom(x)
    steps = []
    lines = [f"   start  {t}"]
    for _ in range(args.depth if args.depth is not None else DEFAULT_DEPTH):
        succ = successors(t, b)
        if not succ:
            lines.append("(no enabled rule)")
            break
        rid, pos, t = succ[0] if args.seed is None else rng.choice(succ)
        mark = "*" if rid in b.accepting_ids else " "
        steps.append({"rule": rid, "position": format_position(pos), "term": str(t)})
        lines.append(f"{mark}{rid:>7}  {t}")
    emit(args, _payload(args, "yes", witness=steps), lines)
    return 0


def cmd_oracle(args) -> int:
    b, x = load_brs(args.model, args.start, normal_form=False)
    depth = args.depth if args.depth is not None else DEFAULT_DEPTH
    budget = args.node_budget if args.node_budget is not None else DEFAULT_BUDGET
    frag = explore(b, x, depth, budget)
    w = find_witness(b, x, args.problem, frag=frag)
    if w is not None:
        verdict = Verdict.YES
    elif frag.saturated:
        verdict = Verdict.NO
    else:
        verdict = Verdict.UNKNOWN
    steps = witness_steps(w, b)
    lines = [f"oracle problem {args.problem} from {x}: {verdict.value} "
             f"({len(frag.nodes)} terms, {'saturated' if frag.saturated else f'{len(frag.frontier)} frontier'})"]
    if w is not None:
        lines.append(f"witness ({w.kind.value}):")
        lines += [f"  {s['rule']:>14}  {s['term']}" for s in steps]
    emit(args, _payload(args, verdict.value, w.kind.value if w else None, steps, not frag.saturated), lines)
    return EXIT[verdict]


def cmd_xcheck(args) -> int:
    b, x = load_brs(args.model, args.start)
    bundle = decompose(b)
    depth = args.depth if args.depth is not None else DEFAULT_DEPTH
    budget = DEFAULT_BUDGET if args.node_budget is None else args.node_budget
    frag = explore(b, x, depth, budget)
    rows, disagree, any_unknown = [], False, bundle.any_unknown
    for p in (1, 2, 3):
        v = decide_problem(bundle, x, p, args.node_budget)
        w = find_witness(b, x, p, frag=frag)
        bad = (w is not None and v.decision.is_no) or (w is None and frag.saturated and v.decision.is_yes)
        disagree |= bad
        any_unknown |= v.decision.is_unknown
        rows.append({"problem": p, "engine": v.verdict.value, "oracleWitness": w is not None,
                     "saturated": frag.saturated, "agree": not bad})
    lines = [f"P{r['problem']}: engine {r['engine']:<7} oracle {'witness' if r['oracleWitness'] else '-':<7} "
             f"{'ok' if r['agree'] else 'DISAGREE'}" for r in rows]
    verdict = "no" if disagree else ("unknown" if any_unknown else "yes")
    emit(args, _payload(args, verdict, any_unknown=any_unknown, rows=rows), lines)
    return 1 if disagree else (2 if any_unknown else 0)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="prsbuchi", description=__doc__.splitlines()[0], epilog=SEMANTICS_NOTE)
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, start=True, depth=False):
        sp.add_argument("model")
        sp.add_argument("--json", action="store_true", help="emit the verdict JSON object")
        sp.add_argument("--node-budget", type=int, default=None,
                        help=f"exploration budget (engine default {DEFAULT_NODE_BUDGET}, oracle {DEFAULT_BUDGET})")
        sp.add_argument("--depth", type=int, default=None if not depth else DEFAULT_DEPTH)
        if start:
            sp.add_argument("--from", dest="start", required=True, help="start variable (or RDHA node)")
        sp.set_defaults(json=False)

    sp = sub.add_parser("check", help="decide problem 1, 2 or 3", epilog=SEMANTICS_NOTE)
    common(sp)
    sp.add_argument("--problem", type=int, choices=(1, 2, 3), required=True)
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("mc", help="check an F/GF fragment formula", epilog=SEMANTICS_NOTE)
    common(sp)
    sp.add_argument("--formula", required=True)
    sp.set_defaults(func=cmd_mc)

    sp = sub.add_parser("decompose", help="write rpar.brs, rseq.brs and provenance.json")
    common(sp, start=False)
    sp.add_argument("-o", "--output", required=True)
    sp.set_defaults(func=cmd_decompose)

    sp = sub.add_parser("rdha2prs", help="translate an RDHA to a PRS")
    common(sp, start=False)
    sp.add_argument("-o", "--output")
    sp.add_argument("--check-depth", type=int, default=0, help="also run the bounded isomorphism check")
    sp.set_defaults(func=cmd_rdha2prs)

    sp = sub.add_parser("sim", help="print one derivation")
    common(sp, depth=True)
    sp.add_argument("--seed", type=int, default=None, help="pick successors at random (default: first)")
    sp.set_defaults(func=cmd_sim)

    sp = sub.add_parser("oracle", help="bounded brute-force witness search")
    common(sp, depth=True)
    sp.add_argument("--problem", type=int, choices=(1, 2, 3), required=True)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("xcheck", help="compare the engine with the oracle on all three problems")
    common(sp, depth=True)
    sp.set_defaults(func=cmd_xcheck)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else 0
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
