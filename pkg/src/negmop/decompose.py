"""Unique configurations I(m), F(m), F(l) and the subnegotiations they delimit.

Two independent routes are provided.  The reference route
(:func:`initial_config_of_node`, :func:`final_config_of_node`,
:func:`final_config_of_location`, :func:`subnegotiation_of_node`,
:func:`subnegotiation_of_location`) works on explicit configurations and is
used only for testing.  The engine route is :func:`saturate`, which fires the
single outcomes of already reduced nodes over a partial configuration.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .core import Configuration, Diagram, Location, enabled, local_graph, step
from .errors import NonConfluent, NotFound, NotUnique, RepeatFiring, StepLimit
from .soundness import reachability_graph

PartialConfig = Configuration


def fin_name(pivot) -> str:
    if isinstance(pivot, Location):
        return f"{pivot.node}_{pivot.outcome}|fin"
    return f"{pivot}|fin"


# -- reference route -------------------------------------------------------


def initial_config_of_node(d: Diagram, m: str, max_configs: int | None = None) -> Configuration:
    """The reachable configuration at which ``m`` and no other node is enabled."""
    if m == d.fin:
        return d.final_configuration
    g = reachability_graph(d, max_configs)
    hits = [c for c in g.vertices if enabled(d, c) == {m}]
    if not hits:
        if g.truncated:
            from .errors import LimitExceeded

            raise LimitExceeded(f"more than {g.limit} reachable configurations")
        raise NotFound(f"no reachable configuration enables only {m}")
    if len(hits) > 1:
        raise NotUnique(f"{len(hits)} configurations enable only {m}: {hits[:3]}")
    return hits[0]


def _explore(d: Diagram, start: Configuration, allowed: Callable[[str], bool], max_steps: int):
    """All configurations reachable from ``start`` firing only allowed nodes.

    Returns (terminal configurations, fired locations, fired nodes).
    """
    seen = {start}
    todo = deque([start])
    ends, fired = set(), set()
    while todo:
        c = todo.popleft()
        movable = [n for n in enabled(d, c) if allowed(n)]
        if not movable:
            ends.add(c)
        for n in movable:
            for a in d.out[n]:
                loc = Location(n, a)
                fired.add(loc)
                c2 = step(d, c, loc)
                if c2 not in seen:
                    if len(seen) >= max_steps:
                        raise StepLimit(f"more than {max_steps} configurations explored")
                    seen.add(c2)
                    todo.append(c2)
    return ends, fired


def _unique_end(ends, what: str) -> Configuration:
    if len(ends) != 1:
        raise NonConfluent(f"{what}: {len(ends)} distinct end configurations {sorted(map(repr, ends))[:4]}")
    return next(iter(ends))


def final_config_of_node(d: Diagram, m: str, max_steps: int = 100_000, *, start: Configuration | None = None) -> Configuration:
    """From I(m), fire nodes whose domain is inside dom(m) until none is enabled."""
    start = initial_config_of_node(d, m) if start is None else start
    x = d.dom[m]
    ends, _ = _explore(d, start, lambda n: d.dom[n] <= x, max_steps)
    return _unique_end(ends, f"F({m})")


def final_config_of_location(d: Diagram, loc: Location, max_steps: int = 100_000, *, start: Configuration | None = None) -> Configuration:
    """From I(m), fire ``loc``, then only nodes with domain strictly inside dom(m)."""
    loc = Location(*loc)
    start = initial_config_of_node(d, loc.node) if start is None else start
    x = d.dom[loc.node]
    ends, _ = _explore(d, step(d, start, loc), lambda n: d.dom[n] < x, max_steps)
    return _unique_end(ends, f"F({loc})")


@dataclass
class Subnegotiation:
    """A fragment of a diagram between I and F, closed by a fresh final node.

    ``final`` is F restricted to the pivot's domain; ``origin`` maps every node
    of ``diagram`` back to the original id (the fresh final maps to None).
    """

    diagram: Diagram
    pivot: str | Location
    final: PartialConfig
    origin: dict[str, str | None] = field(default_factory=dict)

    @property
    def kind(self) -> str:
        return "location" if isinstance(self.pivot, Location) else "node"

    @property
    def fin(self) -> str:
        return self.diagram.fin


def build_subnegotiation(d: Diagram, pivot, nodes: Iterable[str], final: Configuration) -> Subnegotiation:
    """Assemble a subnegotiation from its node set and final partial configuration.

    Moves landing on ``final(p)`` are redirected to the fresh final node; a
    location pivot keeps only its own outcome.
    """
    if isinstance(pivot, Location):
        head, only = pivot.node, pivot.outcome
    else:
        head, only = pivot, None
    x = d.dom[head]
    final = final.restrict(x)
    fin = fin_name(pivot)
    keep = set(nodes) | {head}
    order = [head] + [n for n in d.nodes if n in keep and n != head] + [fin]
    dom = {n: d.dom[n] for n in order[:-1]}
    dom[fin] = x
    out, delta = {}, {}
    for n in order[:-1]:
        outs = (only,) if n == head and only is not None else d.out[n]
        out[n] = tuple(outs)
        for a in outs:
            for p in d.dom[n]:
                ts = d.targets(n, a, p)
                delta[(n, a, p)] = frozenset(fin if t in final[p] else t for t in ts)
    out[fin] = ()
    locs = {Location(n, a) for n in out for a in out[n]}
    sub = Diagram(
        name=fin.replace("|fin", "") + "_sub",
        processes=d.sorted_procs(x),
        nodes=tuple(order),
        dom=dom,
        out=out,
        delta=delta,
        init=head,
        fin=fin,
        prob={l: v for l, v in d.prob.items() if l in locs},
        cost={l: v for l, v in d.cost.items() if l in locs},
        time={l: {p: t for p, t in v.items() if p in x} for l, v in d.time.items() if l in locs},
    )
    origin = {n: n for n in order[:-1]}
    origin[fin] = None
    return Subnegotiation(sub, pivot, final, origin)


def subnegotiation_of_node(d: Diagram, n: str, max_steps: int = 100_000) -> Subnegotiation:
    start = initial_config_of_node(d, n)
    x = d.dom[n]
    ends, fired = _explore(d, start, lambda m: d.dom[m] <= x, max_steps)
    final = _unique_end(ends, f"F({n})")
    return build_subnegotiation(d, n, {l.node for l in fired}, final)


def subnegotiation_of_location(d: Diagram, loc: Location, max_steps: int = 100_000) -> Subnegotiation:
    loc = Location(*loc)
    start = initial_config_of_node(d, loc.node)
    x = d.dom[loc.node]
    ends, fired = _explore(d, step(d, start, loc), lambda m: d.dom[m] < x, max_steps)
    final = _unique_end(ends, f"F({loc})")
    return build_subnegotiation(d, loc, {l.node for l in fired}, final)


# -- engine route ----------------------------------------------------------


def saturate(
    d: Diagram,
    start: PartialConfig,
    x: frozenset,
    strict: bool,
    reduced: Callable[[str], bool] | None = None,
    max_steps: int | None = None,
) -> tuple[PartialConfig, list[Location]]:
    """Fire single-outcome nodes with domain inside ``x`` until none is enabled.

    Nodes are fired in index order, which makes the run reproducible; each
    node may fire at most once.  ``reduced`` (default: "has one outcome")
    guards against firing a node whose subnegotiation is not yet summarized.
    """
    reduced = reduced or (lambda n: len(d.out[n]) == 1)
    inside = (lambda n: d.dom[n] < x) if strict else (lambda n: d.dom[n] <= x)
    limit = len(d.nodes) + 1 if max_steps is None else max_steps
    c = start
    fired: list[Location] = []
    done: set[str] = set()
    while True:
        ready = sorted((n for n in enabled(d, c) if inside(n)), key=d.node_index.__getitem__)
        if not ready:
            return c, fired
        n = ready[0]
        if n in done:
            raise RepeatFiring(f"{n} would fire twice while saturating from {start!r}")
        if not reduced(n) or len(d.out[n]) != 1:
            raise RepeatFiring(f"{n} is not reduced but became enabled while saturating from {start!r}")
        if len(fired) >= limit:
            raise StepLimit(f"saturation exceeded {limit} firings")
        loc = Location(n, d.out[n][0])
        c = step(d, c, loc)
        fired.append(loc)
        done.add(n)


class Shape(enum.Enum):
    ONE_TRACE = "OneTrace"
    REPLICATION = "Replication"
    GENERAL = "General"


def is_one_trace(d: Diagram) -> bool:
    return all(len(d.out[n]) == 1 for n in d.nodes if n != d.fin) and local_graph(d).is_acyclic()


def is_replication(d: Diagram) -> bool:
    lg = local_graph(d)
    for n in lg.reachable():
        for a in d.out[n]:
            ts = {d.targets(n, a, p) for p in d.dom[n]}
            if len(ts) != 1:
                return False
            (t,) = ts
            if len(t) != 1 or any(d.dom[m] != d.dom[n] for m in t):
                return False
    return True


def classify(sub: Subnegotiation | Diagram) -> Shape:
    d = sub.diagram if isinstance(sub, Subnegotiation) else sub
    if is_one_trace(d):
        return Shape.ONE_TRACE
    if is_replication(d):
        return Shape.REPLICATION
    return Shape.GENERAL
