"""Command-line front end.

Exit status: 0 when the command completed (the verdict is in the output),
1 on input errors, 2 when an internal limit was hit.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .core import BsrError, ClauseSet, LimitError
from .groundsolve import extrapolate_model, solve_ground, verify_model
from .instantiate import (
    Baseline,
    Direction,
    Strategy,
    encode_sort_predicates,
    ground_all,
)
from .normalize import check_normal_form, normalize
from .propagate import build_prop, closure_sizes
from .strata import FunClauseSet, check_guarded, check_theory_guards, compute_levels, flatten, prepare
from .textio import export_smt2, parse_file, print_set

SCHEMA_VERSION = 1


def _names(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [n.strip() for n in text.split(",") if n.strip()]


def _strategy(args) -> Strategy:
    directions = {}
    default = Direction.AUTO
    for item in args.direction or []:
        for part in item.split(","):
            if "=" in part:
                name, d = part.split("=", 1)
                directions[name.strip()] = Direction(d.strip())
            elif part.strip():
                default = Direction(part.strip())
    baseline = Baseline(args.baseline)
    designate = _names(args.designate)
    return Strategy(
        directions=directions,
        default_direction=default,
        order=_names(args.order),
        baseline=baseline,
        designate=designate,
        complete=baseline is Baseline.NONE or designate is None,
    )


def _emit(text: str) -> None:
    sys.stdout.write(text)
    if text and not text.endswith("\n"):
        sys.stdout.write("\n")


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _load(path) -> ClauseSet | FunClauseSet:
    return parse_file(path)


def _plain(problem) -> ClauseSet:
    if isinstance(problem, FunClauseSet):
        raise BsrError("input declares functions; run 'flatten' or 'solve' instead")
    return problem


# --------------------------------------------------------------------------- commands


def cmd_check(args) -> int:
    problem = _load(args.input)
    out = {"schema_version": SCHEMA_VERSION, "clauses": len(problem.clauses)}
    if isinstance(problem, FunClauseSet):
        lv = compute_levels(problem)
        out["stratified"] = lv.ok
        if not lv.ok:
            out["cycle"] = [f"<{s},{i}>" for s, i in lv.cycle]
    else:
        rep = check_normal_form(problem)
        out["normal_form"] = rep.ok
        out["violations"] = [{"clause": v.clause_id, "condition": v.condition, "description": v.description} for v in rep.violations]
        if problem.signature.marked:
            g = check_guarded(problem)
            out["guarded"] = g.ok
            out["guard_violations"] = [{"clause": v.clause_id, "condition": v.condition, "description": v.description} for v in g.violations]
        if problem.has_theory_atoms:
            t = check_theory_guards(problem)
            out["theory_guarded"] = t.ok
            out["theory_guard_violations"] = [{"clause": c, "atom": a, "variable": v} for c, a, v in t.violations]
    if args.json:
        _emit(_dump(out))
    else:
        lines = [f"clauses: {out['clauses']}"]
        if "stratified" in out:
            lines.append(f"stratified: {'yes' if out['stratified'] else 'no'}")
            if "cycle" in out:
                lines.append("cycle: " + " ".join(out["cycle"]))
        if "normal_form" in out:
            lines.append(f"normal form: {'yes' if out['normal_form'] else 'no'}")
            lines += [f"  {v['clause']}: {v['condition']} {v['description']}" for v in out["violations"]]
        if "guarded" in out:
            lines.append(f"guarded: {'yes' if out['guarded'] else 'no'}")
            lines += [f"  {v['clause']}: {v['condition']} {v['description']}" for v in out["guard_violations"]]
        if "theory_guarded" in out:
            lines.append(f"theory atoms guarded: {'yes' if out['theory_guarded'] else 'no'}")
            lines += [f"  {v['clause']}: {v['atom']} ({v['variable']})" for v in out["theory_guard_violations"]]
        _emit("\n".join(lines))
    return 0


def cmd_normalize(args) -> int:
    cs = normalize(_plain(_load(args.input)))
    _emit(print_set(cs, hide_synthetic=args.hide_synthetic))
    return 0


def cmd_flatten(args) -> int:
    problem = _load(args.input)
    if isinstance(problem, FunClauseSet):
        lv = compute_levels(problem)
        if not lv.ok:
            raise BsrError("not stratified: cycle through " + ", ".join(f"<{s},{i}>" for s, i in lv.cycle))
        flat = flatten(problem, lv).clauses
    else:
        flat = problem
    if args.no_saturate:
        _emit(print_set(flat))
        return 0
    stages: list = []
    m = prepare(flat, stages=stages, upper=args.upper)
    text = print_set(m)
    for s in stages:
        pts = ", ".join("(" + ", ".join(t) + ")" for t in s.points)
        text += f"# {s.pred}: {len(s.points)} point tuples {pts}; {s.added} clauses\n"
    _emit(text)
    return 0


def _prepared(args) -> ClauseSet:
    return prepare(_load(args.input))


def cmd_instantiate(args) -> int:
    cs = _prepared(args)
    st = _strategy(args)
    grounded, trace = ground_all(cs, st)
    if args.emit_trace:
        Path(args.emit_trace).write_text(trace.to_jsonl(with_snapshot=True))
    if args.json:
        out = {
            "schema_version": SCHEMA_VERSION,
            "count": trace.count,
            "designated_count": trace.designated_count,
            "final_count": trace.final_count,
            "baseline": trace.baseline,
            "trace": [s.to_json() for s in trace.steps],
        }
        _emit(_dump(out))
    else:
        text = trace.to_jsonl()
        if args.print_set:
            text += print_set(grounded)
        text += f"count {trace.count}\n"
        _emit(text)
    return 0


def cmd_encode_sorts(args) -> int:
    cs = _prepared(args)
    st = _strategy(args)
    plan = [(n, st.direction_for(n)) for n in _names(args.defer) or []]
    _emit(print_set(encode_sort_predicates(cs, plan)))
    return 0


def cmd_solve(args) -> int:
    cs = _prepared(args)
    st = _strategy(args)
    if st.baseline is not Baseline.NONE:
        st.complete = True
    work = cs
    deferred = _names(args.defer)
    if deferred:
        if st.baseline is not Baseline.NONE:
            raise BsrError("--defer cannot be combined with --baseline")
        work = encode_sort_predicates(cs, [(n, st.direction_for(n)) for n in deferred])
        st.designate = None
    grounded, trace = ground_all(work, st)
    if args.emit_trace:
        Path(args.emit_trace).write_text(trace.to_jsonl(with_snapshot=True))
    out = {"schema_version": SCHEMA_VERSION, "instances": trace.final_count}
    if grounded.has_theory_atoms:
        out["verdict"] = "unknown"
        out["reason"] = "theory atoms are not decided here; use export-smt2"
        if args.smt2:
            Path(args.smt2).write_text(export_smt2(grounded))
        _report(args, out)
        return 0
    verdict = solve_ground(grounded)
    out["verdict"] = verdict.status
    if verdict.sat:
        out["model"] = verdict.model.to_json()
        if trace.baseline == Baseline.NONE.value and not deferred:
            ext = extrapolate_model(verdict.model, cs, trace)
            rep = verify_model(cs, ext, samples=args.samples, seed=args.seed)
            out["extrapolated_model"] = ext.to_json()
            out["extrapolated_check"] = {
                "violations": len(rep.violations),
                "checked": rep.checked,
                "exhaustive": rep.exhaustive,
            }
    else:
        out["core"] = verdict.core
    if args.emit_model and verdict.sat:
        Path(args.emit_model).write_text(_dump(out.get("extrapolated_model", out["model"])))
    if args.smt2:
        Path(args.smt2).write_text(export_smt2(grounded))
    _report(args, out)
    return 0


def _report(args, out: dict) -> None:
    if args.json:
        _emit(_dump(out))
        return
    text = out["verdict"] + "\n"
    if "reason" in out:
        text += f"# {out['reason']}\n"
    if "model" in out:
        text += _dump(out["model"])
    if "extrapolated_check" in out:
        chk = out["extrapolated_check"]
        text += f"# extrapolated model: {chk['violations']} violations over {chk['checked']} checked assignments\n"
    if "core" in out:
        text += "core: " + " ".join(out["core"]) + "\n"
    _emit(text)


def cmd_export(args) -> int:
    problem = _load(args.input)
    if isinstance(problem, FunClauseSet) or args.ground:
        cs = prepare(problem)
        if args.ground:
            cs, _ = ground_all(cs, _strategy(args))
    else:
        cs = problem
    text = export_smt2(cs)
    if args.smt2:
        Path(args.smt2).write_text(text)
    else:
        _emit(text)
    return 0


def cmd_stats(args) -> int:
    from .report import compare_strategies, plot_rows, rows_to_csv

    cs = _prepared(args)
    prop = build_prop(cs)
    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    (outdir / f"{stem}.dot").write_text(prop.to_dot())
    rows = compare_strategies(cs, _names(args.designate))
    (outdir / f"{stem}_strategies.csv").write_text(rows_to_csv(rows))
    plot_rows(rows, outdir / f"{stem}_strategies.png", title=stem)
    sizes = closure_sizes(prop)
    out = {
        "schema_version": SCHEMA_VERSION,
        "closure_sizes": {k: {"down": d, "up": u} for k, (d, u) in sorted(sizes.items())},
        "strategies": {r.strategy: r.instances for r in rows},
        "files": sorted(p.name for p in outdir.glob(f"{stem}*")),
    }
    if args.json:
        _emit(_dump(out))
    else:
        text = "position down up\n" + "".join(f"{k} {d} {u}\n" for k, (d, u) in sorted(sizes.items()))
        text += rows_to_csv(rows)
        _emit(text)
    return 0


# --------------------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bsrsli", description="Instantiation-based decision procedure for BSR(SLI) clause sets.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, strategy=False):
        sp.add_argument("input", help=".bsr problem file")
        sp.add_argument("--json", action="store_true", help="machine-readable output")
        sp.add_argument("--seed", type=int, default=0, help="seed for sampled checks")
        if strategy:
            sp.add_argument("--direction", action="append", help="var=lower|upper|auto, or a default direction")
            sp.add_argument("--order", help="comma-separated elimination order")
            sp.add_argument("--baseline", choices=[b.value for b in Baseline], default="none")
            sp.add_argument("--designate", help="comma-separated variables to eliminate first")
        return sp

    common(sub.add_parser("check", help="parse and report normal-form, guard and level status"))
    sp = common(sub.add_parser("normalize", help="print the normal form"))
    sp.add_argument("--hide-synthetic", action="store_true")
    sp = common(sub.add_parser("flatten", help="flatten functions and add finite-range axioms"))
    sp.add_argument("--upper", action="store_true", help="experimental: use upward closures for the axioms")
    sp.add_argument("--no-saturate", action="store_true", help="stop after flattening")
    sp = common(sub.add_parser("instantiate", help="print the instantiation trace and instance count"), strategy=True)
    sp.add_argument("--emit-trace", help="write the trace (with closure snapshots) as JSON lines")
    sp.add_argument("--print-set", action="store_true", help="also print the instantiated set")
    sp = common(sub.add_parser("encode-sorts", help="defer variables through sort predicates"), strategy=True)
    sp.add_argument("--defer", required=True, help="comma-separated variables to guard")
    sp = common(sub.add_parser("solve", help="run the full pipeline"), strategy=True)
    sp.add_argument("--defer", help="comma-separated variables to guard instead of instantiating first")
    sp.add_argument("--emit-model", help="write the (extrapolated) model as JSON")
    sp.add_argument("--emit-trace", help="write the instantiation trace as JSON lines")
    sp.add_argument("--smt2", help="also write the ground set as SMT-LIB2")
    sp.add_argument("--samples", type=int, default=1000, help="samples for the extrapolated-model check")
    sp = common(sub.add_parser("export-smt2", help="write SMT-LIB2"), strategy=True)
    sp.add_argument("--ground", action="store_true", help="export the instantiated set")
    sp.add_argument("--smt2", help="output path (default: standard output)")
    sp = common(sub.add_parser("stats", help="preorder DOT, closure sizes and strategy comparison"), strategy=False)
    sp.add_argument("--out", default="stats", help="output directory")
    sp.add_argument("--designate", help="comma-separated variables to compare on")
    return p


COMMANDS = {
    "check": cmd_check,
    "normalize": cmd_normalize,
    "flatten": cmd_flatten,
    "instantiate": cmd_instantiate,
    "encode-sorts": cmd_encode_sorts,
    "solve": cmd_solve,
    "export-smt2": cmd_export,
    "stats": cmd_stats,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except BsrError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except LimitError as e:
        print(f"limit: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
