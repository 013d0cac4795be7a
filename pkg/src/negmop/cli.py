"""Command-line front end.

Exit codes: 0 success (sound / invariant / agree), 1 usage or input error,
2 negative verdict (unsound, not invariant), 3 inconclusive (exploration cap
reached), 4 engine invariant broken or engine/oracle disagreement.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .core import Location, is_deterministic
from .decompose import (
    classify,
    final_config_of_location,
    final_config_of_node,
    initial_config_of_node,
    subnegotiation_of_location,
    subnegotiation_of_node,
)
from .engine import compute_mop
from .errors import LimitExceeded, NegotiationError, NotDeterministic, NotSoundEvidence
from .frameworks import (
    FRAMEWORKS,
    VARIANTS,
    GenKillSpec,
    NaiveAntiPattern,
    check_invariance,
    make_framework,
)
from .io import load
from .io.dot import emit_dot
from .io.report import analysis_report, dumps, render_value, short_transformer, trace_tsv
from .oracle import PriorityScheduler, brute_mop, default_max_len, enumerate_runs
from .soundness import Status, check_soundness, default_max_configs

OK, USAGE, NEGATIVE, INCONCLUSIVE, BROKEN = 0, 1, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


class UsageError(Exception):
    pass


def _fmt_config(d, c) -> str:
    return "(" + ",".join("/".join(sorted(c[p])) for p in d.sorted_procs(c.keys())) + ")"


def _locs(raw: str | None) -> list[Location]:
    return [Location.parse(x) for x in (raw or "").split(",") if x.strip()]


def _spec(args, d) -> GenKillSpec:
    if getattr(args, "analysis", None):
        if args.analysis not in d.analyses:
            raise UsageError(f"no analysis block named {args.analysis!r} (have: {', '.join(d.analyses) or 'none'})")
        return GenKillSpec.from_block(d.analyses[args.analysis])
    if args.variant:
        return GenKillSpec.make(args.variant, _locs(args.gen), _locs(args.kill), args.loc, args.loc2)
    blocks = [k for k in d.analyses if k != "provenance"]
    if len(blocks) == 1:
        return GenKillSpec.from_block(d.analyses[blocks[0]])
    raise UsageError("genkill needs --variant (with --gen/--kill/--loc/--loc2) or --analysis NAME")


def _framework(args, d):
    if args.framework == "naive-anti-pattern":
        if not (args.loc and args.loc2):
            raise UsageError("naive-anti-pattern needs --loc and --loc2")
        return NaiveAntiPattern(d, Location.parse(args.loc), Location.parse(args.loc2), _locs(args.kill))
    spec = _spec(args, d) if args.framework == "genkill" else None
    return make_framework(args.framework, d, spec)


def _max_configs(args) -> int:
    return args.max_configs if getattr(args, "max_configs", None) else default_max_configs()


def _print_value(rendered: dict, out) -> None:
    for k, v in rendered.items():
        if k == "decimal":
            continue
        if isinstance(v, dict):
            v = " ".join(f"{a}={b}" for a, b in v.items())
        print(f"{k}\t{v}", file=out)


def _soundness_json(v) -> dict:
    out = {"status": v.status.value, "configurations": v.configurations, "cap": v.limit}
    if v.witness is not None:
        out["witness"] = [str(x) for x in v.witness]
    return out


# -- subcommands -----------------------------------------------------------


def cmd_check(args, out) -> int:
    d = load(args.file)
    det, wit = is_deterministic(d)
    v = check_soundness(d, _max_configs(args))
    if args.json:
        rep = {"diagram": d.name, "deterministic": det, "soundness": _soundness_json(v)}
        if not det:
            rep["nondeterministic_moves"] = [str(w) for w in wit]
        print(dumps(rep), file=out)
    else:
        print(f"diagram\t{d.name}", file=out)
        print(f"deterministic\t{str(det).lower()}", file=out)
        print(f"soundness\t{v.status.value}", file=out)
        print(f"configurations\t{v.configurations}", file=out)
        if v.witness is not None:
            print(f"witness\t{' '.join(map(str, v.witness))}", file=out)
            print(f"stuck_at\t{_fmt_config(d, v.stuck_at)}", file=out)
    return {Status.SOUND: OK, Status.UNSOUND: NEGATIVE, Status.LIMIT_EXCEEDED: INCONCLUSIVE}[v.status]


def _oracle_check(d, fw, value, max_configs) -> dict:
    try:
        ov = brute_mop(d, fw, max_configs=max_configs)
    except LimitExceeded as exc:
        return {"status": "capped", "detail": str(exc)}
    return {"status": "agree" if ov == value else "disagree", "value": render_value(fw, ov)}


def cmd_analyze(args, out) -> int:
    d = load(args.file)
    fw = _framework(args, d)
    det, _ = is_deterministic(d)
    sv = check_soundness(d, _max_configs(args))
    verdicts = {"deterministic": det, "soundness": _soundness_json(sv)}
    result, error, oracle = None, None, None
    code = OK
    try:
        result = compute_mop(d, fw)
    except NotDeterministic as exc:
        error, code = f"NotDeterministic: {exc}", USAGE
    except NotSoundEvidence as exc:
        error, code = f"NotSoundEvidence: {exc}", BROKEN
    if result is not None and args.oracle_check:
        oracle = _oracle_check(d, fw, result.value, _max_configs(args))
        if oracle["status"] == "disagree":
            code = BROKEN
    rep = analysis_report(d, fw, verdicts=verdicts, result=result, oracle=oracle, error=error)
    if args.json:
        print(dumps(rep), file=out)
        return code
    print(f"diagram\t{d.name}", file=out)
    print(f"framework\t{fw.name}", file=out)
    print(f"deterministic\t{str(det).lower()}", file=out)
    print(f"soundness\t{sv.status.value}", file=out)
    if error is not None:
        print(f"error\t{error}", file=out)
        return code
    _print_value(rep["result"], out)
    print(f"transformer\t{short_transformer(result.transformer)}", file=out)
    print(f"steps\t{len(result.trace.steps)}", file=out)
    if oracle is not None:
        print(f"oracle\t{oracle['status']}", file=out)
    return code


def cmd_decompose(args, out) -> int:
    d = load(args.file)
    if args.node:
        sub = subnegotiation_of_node(d, args.node)
        start = initial_config_of_node(d, args.node, _max_configs(args))
        end = final_config_of_node(d, args.node)
        what = args.node
    else:
        loc = Location.parse(args.location)
        sub = subnegotiation_of_location(d, loc)
        start = initial_config_of_node(d, loc.node, _max_configs(args))
        end = final_config_of_location(d, loc)
        what = str(loc)
    if args.emit == "dot":
        out.write(emit_dot(sub, title=f"{d.name}|{what}"))
        return OK
    print(f"pivot\t{what}", file=out)
    print(f"initial\t{_fmt_config(d, start)}", file=out)
    print(f"final\t{_fmt_config(d, end)}", file=out)
    print(f"nodes\t{' '.join(sub.diagram.nodes)}", file=out)
    print(f"shape\t{classify(sub).value}", file=out)
    return OK


def cmd_oracle(args, out) -> int:
    d = load(args.file)
    fw = _framework(args, d)
    order = tuple(x for x in (args.scheduler or "").split(",") if x)
    unknown = [n for n in order if n not in d.node_index]
    if unknown:
        raise UsageError(f"unknown nodes in --scheduler: {', '.join(unknown)}")
    s = PriorityScheduler(order)
    try:
        value = brute_mop(d, fw, s, max_configs=_max_configs(args))
    except LimitExceeded as exc:
        print(f"status\tcapped ({exc})", file=out)
        return INCONCLUSIVE
    runs = enumerate_runs(d, s, args.max_len or default_max_len(d), args.max_count)
    rep = {"diagram": d.name, "framework": fw.name, "scheduler": list(order),
           "value": render_value(fw, value), "runs": len(runs), "runs_complete": not runs.truncated}
    if args.json:
        print(dumps(rep), file=out)
        return OK
    _print_value(rep["value"], out)
    print(f"runs\t{len(runs)}{'' if not runs.truncated else ' (truncated)'}", file=out)
    return OK


def cmd_invariance(args, out) -> int:
    d = load(args.file)
    fw = _framework(args, d)
    v = check_invariance(d, fw, args.mode, seed=args.seed, count=args.count, pairs=args.pairs)
    print(f"invariant\t{str(v.invariant).lower()}", file=out)
    print(f"pairs_checked\t{v.pairs_checked}", file=out)
    if v.witness is not None:
        print(f"witness\t{v.witness[0]} {v.witness[1]}", file=out)
    return OK if v.invariant else NEGATIVE


def cmd_trace(args, out) -> int:
    from .plotting import plot_diagram, plot_trace

    d = load(args.file)
    fw = _framework(args, d)
    try:
        res = compute_mop(d, fw, snapshots=True)
    except NotSoundEvidence as exc:
        print(f"error\tNotSoundEvidence: {exc}", file=out)
        return BROKEN
    tr = res.trace
    target = Path(args.emit_stages)
    target.mkdir(parents=True, exist_ok=True)
    last: dict = {}
    for s in tr.steps:
        last[s.stage] = max(last.get(s.stage, 0), s.snapshot)
    frames = [(0, "initial")] + [(i, " ".join(d.sorted_procs(x))) for x, i in last.items()]
    for k, (i, label) in enumerate(frames):
        snap = tr.snapshots[i]
        title = f"{d.name} stage {k}: {label}"
        (target / f"stage{k:02d}.dot").write_text(emit_dot(snap, title=title))
        plot_diagram(snap, target / f"stage{k:02d}.png", title=title)
    (target / "trace.tsv").write_text(trace_tsv(tr, fw, d))
    plot_trace(tr, target / "trace.png", title=f"{d.name} reduction trace ({fw.name})")
    print(f"stages\t{len(frames) - 1}", file=out)
    print(f"steps\t{len(tr.steps)}", file=out)
    _print_value(render_value(fw, res.value), out)
    print(f"written\t{target}", file=out)
    return OK


def cmd_scaling(args, out) -> int:
    from .plotting import plot_scaling
    from .scaling import loglog_slope, measure

    d = load(args.file)
    rows = measure(d, range(1, args.kmax + 1), repeat=args.repeat, oracle_cap_s=args.oracle_cap)
    target = Path(args.out)
    target.mkdir(parents=True, exist_ok=True)
    lines = ["k\tsize\tengine_s\toracle_s\tagree"]
    for r in rows:
        o = "" if r.oracle_s is None else f"{r.oracle_s:.6f}"
        lines.append(f"{r.k}\t{r.size}\t{r.engine_s:.6f}\t{o}\t{'' if r.agree is None else str(r.agree).lower()}")
    (target / "scaling.tsv").write_text("\n".join(lines) + "\n")
    plot_scaling(rows, target / "scaling.png")
    out.write("\n".join(lines) + "\n")
    if len(rows) >= 2:
        print(f"# engine log-log slope {loglog_slope([r.size for r in rows], [r.engine_s for r in rows]):.2f}", file=out)
    return BROKEN if any(r.agree is False for r in rows) else OK


# -- argument parsing ------------------------------------------------------


def _add_framework(p, extra=()):
    p.add_argument("--framework", required=True, choices=[*FRAMEWORKS, *extra])
    p.add_argument("--variant", choices=VARIANTS)
    p.add_argument("--gen", help="comma-separated locations NODE.OUTCOME")
    p.add_argument("--kill", help="comma-separated locations NODE.OUTCOME")
    p.add_argument("--loc")
    p.add_argument("--loc2")
    p.add_argument("--analysis", help="use the named analysis block of the diagram file")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="negmop", description="Analyses of sound deterministic negotiation diagrams.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="determinism and soundness verdicts")
    p.add_argument("file")
    p.add_argument("--max-configs", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("analyze", help="run the reduction engine")
    p.add_argument("file")
    _add_framework(p)
    p.add_argument("--oracle-check", action="store_true")
    p.add_argument("--max-configs", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=cmd_analyze)

    p = sub.add_parser("decompose", help="initial/final configurations and subnegotiations")
    p.add_argument("file")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--node")
    g.add_argument("--location")
    p.add_argument("--emit", choices=["text", "dot"], default="text")
    p.add_argument("--max-configs", type=int)
    p.set_defaults(run=cmd_decompose)

    p = sub.add_parser("oracle", help="brute-force value under a priority scheduler")
    p.add_argument("file")
    _add_framework(p)
    p.add_argument("--scheduler", default="", help="comma-separated node priority list")
    p.add_argument("--max-len", type=int)
    p.add_argument("--max-count", type=int, default=10_000)
    p.add_argument("--max-configs", type=int)
    p.add_argument("--json", action="store_true")
    p.set_defaults(run=cmd_oracle)

    p = sub.add_parser("invariance", help="check that independent transformers commute")
    p.add_argument("file")
    _add_framework(p, extra=("naive-anti-pattern",))
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--count", type=int, default=20)
    p.add_argument("--pairs", choices=["independent", "all"], default="independent")
    p.set_defaults(run=cmd_invariance)

    p = sub.add_parser("trace", help="write per-stage DOT/PNG snapshots and a TSV trace")
    p.add_argument("file")
    _add_framework(p)
    p.add_argument("--emit-stages", required=True, metavar="DIR")
    p.set_defaults(run=cmd_trace)

    p = sub.add_parser("scaling", help="time the engine against brute force on chained copies")
    p.add_argument("file")
    p.add_argument("--kmax", type=int, default=8)
    p.add_argument("--repeat", type=int, default=3)
    p.add_argument("--oracle-cap", type=float, default=60.0)
    p.add_argument("--out", required=True, metavar="DIR")
    p.set_defaults(run=cmd_scaling)
    return ap


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.run(args, out)
    except (UsageError, ValueError, OSError) as exc:
        print(f"negmop: error: {exc}", file=sys.stderr)
        return USAGE
    except NotSoundEvidence as exc:
        print(f"negmop: {exc}", file=sys.stderr)
        return BROKEN
    except LimitExceeded as exc:
        print(f"negmop: exploration cap reached: {exc} (raise --max-configs or NEGOT_MAX_CONFIGS)", file=sys.stderr)
        return INCONCLUSIVE
    except NegotiationError as exc:
        print(f"negmop: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
