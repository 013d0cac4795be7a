"""Graphviz export: nodes as record boxes with one port per process."""

from __future__ import annotations

from ..core import Diagram


def _q(s: str) -> str:
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def _rec(s: str) -> str:
    return "".join("\\" + ch if ch in "{}|<> " else ch for ch in str(s))


def emit_dot(obj, title: str | None = None) -> str:
    """DOT text for a diagram, a subnegotiation or a reduction-trace snapshot.

    Output is byte-stable: nodes follow diagram order, edges follow
    (node, outcome, process) order.
    """
    d: Diagram = getattr(obj, "diagram", obj)
    name = title or d.name
    lines = [f"digraph {_q(name)} {{", "  rankdir=TB;", '  node [shape=record, fontname="Helvetica"];']
    for n in d.nodes:
        ports = "|".join(f"<{p}> {_rec(p)}" for p in d.sorted_procs(d.dom[n]))
        style = ""
        if n == d.init:
            style = ", penwidth=2"
        elif n == d.fin:
            style = ", peripheries=2"
        label = "{" + _rec(n) + "|{" + ports + "}}"
        lines.append(f'  {_q(n)} [label="{label}"{style}];')
    for n in d.nodes:
        for a in d.out.get(n, ()):
            for p in d.sorted_procs(d.dom[n]):
                for t in sorted(d.targets(n, a, p), key=lambda x: d.node_index.get(x, 0)):
                    lines.append(f"  {_q(n)}:{_q(p)} -> {_q(t)}:{_q(p)} [label={_q(a)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
