"""Reader and writer for the ``.neg`` diagram format.

::

    negotiation NAME {
      processes p1 p2;
      node n0 [p1 p2] init;
      node n1 [p1];
      node n2 [p1 p2] final;
      outcome n0.a prob=1 cost=1 time(p1)=2 { p1 -> n1; p2 -> n2; }
      outcome n1.a { p1 -> n2; }
      analysis leak { variant=may-forward; gen=n0.a; loc=n1.a }
    }

A move may list several successors (``p1 -> n1, n2;``), which makes the
diagram non-deterministic.  ``#`` and ``//`` start comments.
"""

from __future__ import annotations

import re
from fractions import Fraction
from pathlib import Path

from ..core import Diagram, Location, validate
from ..errors import DiagramSyntaxError

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t\r]+) |
    (?P<nl>\n) |
    (?P<comment>(?:\#|//)[^\n]*) |
    (?P<arrow>->) |
    (?P<number>-?\d+(?:/\d+|\.\d+)?) |
    (?P<ident>[A-Za-z_][A-Za-z0-9_'|]*(?:-(?!>)[A-Za-z0-9_'|]+)*) |
    (?P<punct>[{}\[\]();=,.]) |
    (?P<error>.)
    """,
    re.VERBOSE,
)

class _Tokens:
    def __init__(self, text: str):
        self.items: list[tuple[str, str, int, int]] = []
        line, line_start = 1, 0
        for m in _TOKEN.finditer(text):
            kind = m.lastgroup
            col = m.start() - line_start + 1
            if kind == "nl":
                line += 1
                line_start = m.end()
            elif kind in ("ws", "comment"):
                continue
            elif kind == "error":
                raise DiagramSyntaxError(f"unexpected character {m.group()!r}", line, col)
            else:
                self.items.append((kind, m.group(), line, col))
        self.items.append(("eof", "", line, 1))
        self.pos = 0

    def peek(self, offset: int = 0):
        return self.items[min(self.pos + offset, len(self.items) - 1)]

    def fail(self, message: str, tok=None):
        tok = tok or self.peek()
        raise DiagramSyntaxError(message, tok[2], tok[3])

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def expect(self, value: str):
        tok = self.next()
        if tok[1] != value:
            self.fail(f"expected {value!r}, found {tok[1] or 'end of input'!r}", tok)
        return tok

    def ident(self, what: str = "identifier") -> str:
        tok = self.next()
        if tok[0] != "ident":
            self.fail(f"expected {what}, found {tok[1] or 'end of input'!r}", tok)
        return tok[1]

    def accept(self, value: str) -> bool:
        if self.peek()[1] == value:
            self.pos += 1
            return True
        return False


def _rational(tok, toks: _Tokens) -> Fraction:
    if tok[0] != "number":
        toks.fail(f"expected a rational number, found {tok[1]!r}", tok)
    return Fraction(tok[1])


def parse(text: str, *, check: bool = True) -> Diagram:
    """Parse diagram source; raise :class:`DiagramSyntaxError` or a validation error."""
    t = _Tokens(text)
    t.expect("negotiation")
    name = t.ident("diagram name")
    t.expect("{")
    t.expect("processes")
    processes: list[str] = []
    while t.peek()[0] == "ident":
        processes.append(t.ident())
    if not processes:
        t.fail("at least one process expected")
    t.expect(";")

    nodes: dict[str, list[str]] = {}
    init = fin = None
    moves: dict[tuple[str, str], dict[str, list[str]]] = {}
    prob: dict[Location, Fraction] = {}
    cost: dict[Location, Fraction] = {}
    time: dict[Location, dict[str, Fraction]] = {}
    analyses: dict[str, dict[str, str]] = {}

    while not t.accept("}"):
        tok = t.peek()
        if tok[1] == "node":
            t.next()
            n_tok = t.peek()
            n = t.ident("node name")
            if n in nodes:
                t.fail(f"node {n} declared twice", n_tok)
            t.expect("[")
            members = []
            while t.peek()[0] == "ident":
                members.append(t.ident())
            t.expect("]")
            if t.accept("init"):
                if init is not None:
                    t.fail("second initial node")
                init = n
            elif t.accept("final"):
                if fin is not None:
                    t.fail("second final node")
                fin = n
            t.expect(";")
            nodes[n] = members
        elif tok[1] == "outcome":
            t.next()
            n_tok = t.peek()
            n = t.ident("node name")
            t.expect(".")
            a = t.ident("outcome name")
            loc = Location(n, a)
            if (n, a) in moves:
                t.fail(f"outcome {loc} declared twice", n_tok)
            while t.peek()[1] != "{":
                key_tok = t.next()
                if key_tok[1] == "prob":
                    t.expect("=")
                    prob[loc] = _rational(t.next(), t)
                elif key_tok[1] == "cost":
                    t.expect("=")
                    cost[loc] = _rational(t.next(), t)
                elif key_tok[1] == "time":
                    t.expect("(")
                    p = t.ident("process")
                    t.expect(")")
                    t.expect("=")
                    time.setdefault(loc, {})[p] = _rational(t.next(), t)
                else:
                    t.fail(f"unknown outcome attribute {key_tok[1]!r}", key_tok)
            t.expect("{")
            targets: dict[str, list[str]] = {}
            while not t.accept("}"):
                p = t.ident("process")
                t.expect("->")
                succ = [t.ident("node")]
                while t.accept(","):
                    succ.append(t.ident("node"))
                t.expect(";")
                targets.setdefault(p, []).extend(succ)
            moves[(n, a)] = targets
        elif tok[1] == "analysis":
            t.next()
            key = t.ident("analysis name")
            t.expect("{")
            block: dict[str, str] = {}
            while not t.accept("}"):
                k = t.ident("key")
                t.expect("=")
                parts = []
                while t.peek()[1] not in (";", "}") and t.peek()[0] != "eof":
                    parts.append(t.next()[1])
                block[k] = "".join(parts)
                t.accept(";")
            analyses[key] = block
        else:
            t.fail(f"expected 'node', 'outcome', 'analysis' or '}}', found {tok[1] or 'end of input'!r}")
    if t.peek()[0] != "eof":
        t.fail("trailing input after diagram")
    if init is None or fin is None:
        t.fail("diagram needs one 'init' and one 'final' node")
    for (n, _a) in moves:
        if n not in nodes:
            t.fail(f"outcome for undeclared node {n}")

    d = Diagram.build(
        name, processes, nodes, init, fin, moves,
        prob=prob, cost=cost, time=time, analyses=analyses,
    )
    return validate(d) if check else d


def load(path: str | Path, *, check: bool = True) -> Diagram:
    return parse(Path(path).read_text(encoding="utf-8"), check=check)


def _fmt(x: Fraction) -> str:
    return str(x)


def render(d: Diagram) -> str:
    """Canonical source text; ``parse(render(d))`` reproduces ``d``."""
    lines = [f"negotiation {d.name} {{", "  processes " + " ".join(d.processes) + ";"]
    for n in d.nodes:
        tag = " init" if n == d.init else " final" if n == d.fin else ""
        lines.append(f"  node {n} [{' '.join(d.sorted_procs(d.dom[n]))}]{tag};")
    for loc in d.locations:
        attrs = []
        if loc in d.prob:
            attrs.append(f"prob={_fmt(d.prob[loc])}")
        if loc in d.cost:
            attrs.append(f"cost={_fmt(d.cost[loc])}")
        for p in d.sorted_procs(d.time.get(loc, {})):
            attrs.append(f"time({p})={_fmt(d.time[loc][p])}")
        moves = []
        for p in d.sorted_procs(d.dom[loc.node]):
            ts = sorted(d.targets(loc.node, loc.outcome, p), key=lambda x: d.node_index.get(x, 0))
            if ts:
                moves.append(f"{p} -> {', '.join(ts)};")
        head = " ".join([f"  outcome {loc}"] + attrs)
        lines.append(f"{head} {{ {' '.join(moves)} }}")
    for key, block in d.analyses.items():
        body = "; ".join(f"{k}={v}" for k, v in block.items())
        lines.append(f"  analysis {key} {{ {body} }}")
    lines.append("}")
    return "\n".join(lines) + "\n"
