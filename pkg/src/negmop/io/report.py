"""JSON and tab-separated reports.

Exact rationals are written as ``"num/den"`` strings next to a decimal
rendering; infinities are ``"inf"``/``"-inf"``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from typing import Any

from ..frameworks import Cost, ExpectedCost, Framework, GenKill, MaxPlus, Relation, WorstTime

SCHEMA = "negmop.report/1"


def exact(x) -> str:
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def decimal(x) -> float:
    return float(x)


def plain(x) -> str:
    """Short human rendering: ``18``, ``7/2``, ``inf``."""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return str(Fraction(x))


def render_value(fw: Framework, v) -> dict:
    if isinstance(fw, ExpectedCost):
        e = fw.expected(v)
        return {
            "mass": exact(v.p),
            "cost": exact(v.c),
            "expected_cost": exact(e),
            "decimal": {"mass": decimal(v.p), "cost": decimal(v.c), "expected_cost": decimal(e)},
        }
    if isinstance(fw, WorstTime):
        m = fw.makespan(v)
        return {
            "per_process": {p: exact(x) for p, x in zip(fw.procs, v)},
            "makespan": exact(m),
            "decimal": {"makespan": decimal(m)},
        }
    if isinstance(fw, GenKill):
        return {"detected": fw.detected(v), "holds": fw.holds(v), "condition": fw.compiled.condition}
    return {"value": repr(v)}


def render_transformer(fw: Framework, t) -> Any:
    if isinstance(t, Cost):
        return {"mass": exact(t.p), "cost": exact(t.c)}
    if isinstance(t, MaxPlus):
        return [[exact(x) for x in row] for row in t.a]
    if isinstance(t, Relation):
        return {"states": len(t.rows), "pairs": sum(bin(r).count("1") for r in t.rows)}
    return repr(t)


def short_transformer(t) -> str:
    if isinstance(t, Cost):
        return f"({plain(t.p)},{plain(t.c)})"
    if isinstance(t, MaxPlus):
        return str(t)
    if isinstance(t, Relation):
        return f"relation[{sum(bin(r).count('1') for r in t.rows)} pairs]"
    return repr(t)


def trace_records(trace, fw: Framework, d) -> list[dict]:
    rows = []
    for i, s in enumerate(trace.steps):
        rows.append({
            "step": i,
            "kind": s.kind,
            "pivot": str(s.pivot),
            "stage": " ".join(d.sorted_procs(s.stage)),
            "fresh": str(s.fresh),
            "target": repr(s.target),
            "shape": s.shape.value,
            "transformer": short_transformer(s.transformer),
        })
    return rows


def trace_tsv(trace, fw: Framework, d) -> str:
    buf = io.StringIO()
    rows = trace_records(trace, fw, d)
    fields = ["step", "kind", "pivot", "stage", "fresh", "target", "shape", "transformer"]
    w = csv.DictWriter(buf, fieldnames=fields, delimiter="\t", lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def analysis_report(d, fw: Framework, *, verdicts: dict, result=None, trace=None, oracle: dict | None = None, error: str | None = None) -> dict:
    rep: dict = {
        "schema": SCHEMA,
        "diagram": d.name,
        "framework": {"id": fw.name, "params": fw.params()},
        "verdicts": verdicts,
    }
    if result is not None:
        rep["result"] = render_value(fw, result.value)
        rep["transformer"] = render_transformer(fw, result.transformer)
        rep["trace"] = trace_records(result.trace, fw, d)
    if oracle is not None:
        rep["oracle"] = oracle
    if error is not None:
        rep["error"] = error
    return rep


def dumps(rep: dict) -> str:
    return json.dumps(rep, indent=2, sort_keys=False)
