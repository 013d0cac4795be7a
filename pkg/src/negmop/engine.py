"""Polynomial MOP computation by successive reduction of nodes and locations.

The loop repeatedly picks a non-reduced node with inclusion-minimal domain
X.  Every location of every node with domain X is first summarised by the
one trace it triggers (fresh outcome ``a_<node>_<outcome>``); then every
node with domain X is summarised by solving the flow graph of its uniform
moves (fresh outcome ``a_<node>``).  Each fresh outcome leads straight to
the configuration its subnegotiation ends in and carries the
subnegotiation's MOP as its transformer.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

import networkx as nx

from .core import Configuration, Diagram, Location, enabled, is_deterministic, local_graph
from .decompose import Shape, Subnegotiation, build_subnegotiation, classify, saturate
from .errors import (
    AlreadyReduced,
    EngineInvariantBroken,
    NotDeterministic,
    NotSoundEvidence,
    PreconditionViolated,
)
from .frameworks import FlowGraph, Framework


@dataclass
class ReducedState:
    """Flags and fresh-outcome transformers accumulated by the reduction loop."""

    nodes: set[str] = field(default_factory=set)
    locations: set[Location] = field(default_factory=set)
    registry: dict[Location, Any] = field(default_factory=dict)

    def transformer(self, fw: Framework, loc: Location):
        t = self.registry.get(loc)
        return fw.base(loc) if t is None else t

    def progress(self) -> int:
        return len(self.nodes) + len(self.locations)

    def copy(self) -> "ReducedState":
        return ReducedState(set(self.nodes), set(self.locations), dict(self.registry))


@dataclass
class Step:
    kind: str  # "location" or "node"
    pivot: str | Location
    stage: frozenset
    fresh: Location
    target: Configuration
    shape: Shape
    transformer: Any
    subnegotiation: Subnegotiation | None
    snapshot: int


@dataclass
class ReductionTrace:
    steps: list[Step] = field(default_factory=list)
    snapshots: list[Diagram] = field(default_factory=list)
    registries: list[dict] = field(default_factory=list)
    stages: list[frozenset] = field(default_factory=list)
    initially_reduced: list[str] = field(default_factory=list)

    def transformer_of(self, pivot) -> Any:
        for s in self.steps:
            if s.pivot == pivot:
                return s.transformer
        raise KeyError(pivot)


@dataclass
class MopResult:
    transformer: Any
    value: Any
    trace: ReductionTrace
    diagram: Diagram


def _fresh(d: Diagram, n: str, base: str) -> str:
    name = base
    while name in d.out[n]:
        name += "'"
    return name


def _strictly_below(d: Diagram, n: str) -> list[str]:
    return [m for m in d.nodes if m != d.fin and d.dom[m] < d.dom[n]]


def is_reduced_node(d: Diagram, state: ReducedState, n: str) -> bool:
    """Single outcome whose targets enable no firable node with domain inside dom(n)."""
    missing = [m for m in _strictly_below(d, n) if m not in state.nodes]
    if missing:
        raise PreconditionViolated(f"nodes below {n} are not reduced: {missing}")
    return _locally_final(d, n)


def _locally_final(d: Diagram, n: str) -> bool:
    if len(d.out[n]) != 1:
        return False
    (a,) = d.out[n]
    x = d.dom[n]
    c = Configuration({p: d.targets(n, a, p) for p in x})
    return not any(d.dom[m] <= x for m in enabled(d, c))


def _replace_outcomes(d: Diagram, n: str, remove, add: str, targets: Configuration, prob: Fraction) -> Diagram:
    remove = set(remove)
    out = dict(d.out)
    out[n] = tuple(a for a in d.out[n] if a not in remove) + (add,)
    delta = {k: v for k, v in d.delta.items() if not (k[0] == n and k[1] in remove)}
    for p in d.dom[n]:
        delta[(n, add, p)] = targets[p]
    gone = {Location(n, a) for a in remove}
    new = Location(n, add)
    prob_map = {l: v for l, v in d.prob.items() if l not in gone}
    prob_map[new] = prob
    return d.replace(
        out=out,
        delta=delta,
        prob=prob_map,
        cost={l: v for l, v in d.cost.items() if l not in gone},
        time={l: v for l, v in d.time.items() if l not in gone},
    )


def prune(d: Diagram) -> Diagram:
    """Drop nodes not reachable from the initial node in the local graph."""
    keep = local_graph(d).reachable() | {d.fin}
    if len(keep) == len(d.nodes):
        return d
    locs = {l for l in d.locations if l.node in keep}
    return d.replace(
        nodes=tuple(n for n in d.nodes if n in keep),
        dom={n: v for n, v in d.dom.items() if n in keep},
        out={n: v for n, v in d.out.items() if n in keep},
        delta={k: v for k, v in d.delta.items() if k[0] in keep},
        prob={l: v for l, v in d.prob.items() if l in locs},
        cost={l: v for l, v in d.cost.items() if l in locs},
        time={l: v for l, v in d.time.items() if l in locs},
    )


def one_trace_mop(d: Diagram, state: ReducedState, loc: Location, fw: Framework):
    """Transformer of the single trace started by ``loc``, with its end configuration."""
    n, a = loc
    x = d.dom[n]
    start = Configuration({p: d.targets(n, a, p) for p in x})
    end, fired = saturate(d, start, x, strict=True, reduced=lambda m: m in state.nodes)
    t = fw.compose_all([state.transformer(fw, loc)] + [state.transformer(fw, l) for l in fired])
    return t, end, fired


def red_location(d: Diagram, state: ReducedState, loc: Location, fw: Framework, *, with_sub: bool = True):
    """Replace ``loc`` by a fresh outcome leading to F(loc)."""
    loc = Location(*loc)
    if loc in state.locations:
        raise AlreadyReduced(f"location {loc} is already reduced")
    t, end, fired = one_trace_mop(d, state, loc, fw)
    sub = None
    if with_sub:
        sub = build_subnegotiation(d, loc, {l.node for l in fired}, end)
        if classify(sub) is not Shape.ONE_TRACE:
            raise EngineInvariantBroken(f"subnegotiation of {loc} is not a single trace")
    fresh = _fresh(d, loc.node, f"a_{loc.node}_{loc.outcome}")
    d2 = _replace_outcomes(d, loc.node, [loc.outcome], fresh, end, d.probability(loc))
    new = Location(loc.node, fresh)
    state.registry[new] = t
    state.locations.add(new)
    return d2, new, t, end, sub


def _replication_graph(d: Diagram, state: ReducedState, n: str, fw: Framework):
    x = d.dom[n]
    exit_ = ("exit",)
    g = FlowGraph([n], n, exit_)
    seen = {n}
    todo = [n]
    ends: set[Configuration] = set()
    while todo:
        m = todo.pop()
        for a in d.out[m]:
            loc = Location(m, a)
            if loc not in state.locations:
                raise EngineInvariantBroken(f"location {loc} should have been reduced before {n}")
            ts = {p: d.targets(m, a, p) for p in x}
            heads = set(ts.values())
            t = state.transformer(fw, loc)
            if len(heads) == 1:
                (h,) = heads
                if len(h) == 1:
                    (u,) = h
                    if d.dom[u] == x and d.out[u]:
                        if u not in seen:
                            seen.add(u)
                            g.vertices.append(u)
                            todo.append(u)
                        g.add_edge(m, u, t, loc)
                        continue
            c = Configuration(ts)
            if any(d.dom[k] <= x for k in enabled(d, c)):
                raise EngineInvariantBroken(f"outcome {loc} stops inside the domain of {n}")
            ends.add(c)
            g.add_edge(m, exit_, t, loc)
    g.vertices.append(exit_)
    return g, ends, seen


def replication_mop(d: Diagram, state: ReducedState, n: str, fw: Framework):
    """Flow-graph MOP of the replication rooted at ``n``, with its exit configuration."""
    from .errors import ExitMismatch

    g, ends, members = _replication_graph(d, state, n, fw)
    if len(ends) != 1:
        raise ExitMismatch(f"replication of {n} exits at {len(ends)} configurations: {sorted(map(repr, ends))}")
    (end,) = ends
    return fw.flow_solve(g), end, members


def red_node(d: Diagram, state: ReducedState, n: str, transformer, end: Configuration):
    """Replace all outcomes of ``n`` by a fresh one leading to F(n)."""
    if n in state.nodes:
        raise AlreadyReduced(f"node {n} is already reduced")
    fresh = _fresh(d, n, f"a_{n}")
    d2 = _replace_outcomes(d, n, d.out[n], fresh, end, Fraction(1))
    new = Location(n, fresh)
    state.registry[new] = transformer
    state.nodes.add(n)
    state.locations.add(new)
    return d2, new


def _domain_topological(d: Diagram) -> list[str]:
    g = nx.DiGraph()
    g.add_nodes_from(d.nodes)
    for a in d.nodes:
        for b in d.nodes:
            if d.dom[a] < d.dom[b]:
                g.add_edge(a, b)
    return list(nx.lexicographical_topological_sort(g, key=d.node_index.__getitem__))


def initial_state(d: Diagram) -> ReducedState:
    """Flag nodes that are reduced in the input (e.g. a single outcome leading to F)."""
    state = ReducedState()
    for n in _domain_topological(d):
        if n == d.fin:
            continue
        if all(m in state.nodes for m in _strictly_below(d, n)) and is_reduced_node(d, state, n):
            state.nodes.add(n)
            state.locations.add(Location(n, d.out[n][0]))
    return state


def _pick(d: Diagram, state: ReducedState, reverse: bool) -> str | None:
    todo = [n for n in d.nodes if n != d.fin and n not in state.nodes]
    minimal = [n for n in todo if not any(d.dom[m] < d.dom[n] for m in todo)]
    if not minimal:
        return None
    return minimal[-1] if reverse else minimal[0]


def compute_mop(
    d: Diagram,
    fw: Framework,
    *,
    reverse: bool = False,
    with_subnegotiations: bool = False,
    snapshots: bool = False,
) -> MopResult:
    """Run the reduction loop and return the initial node's summary transformer.

    ``reverse`` processes ties in decreasing node order (the result must not
    change).  ``snapshots`` keeps the diagram and registry after every step.
    """
    ok, witnesses = is_deterministic(d)
    if not ok:
        raise NotDeterministic(f"non-deterministic moves: {witnesses}")
    try:
        return _reduce(d, fw, reverse, with_subnegotiations, snapshots)
    except (EngineInvariantBroken, AlreadyReduced, PreconditionViolated) as exc:
        if isinstance(exc, NotSoundEvidence):
            raise
        raise NotSoundEvidence(
            f"{type(exc).__name__}: {exc}. The reduction invariants only hold for sound "
            "deterministic diagrams; run 'check' to look for a deadlock or livelock."
        ) from exc


def _reduce(d: Diagram, fw: Framework, reverse: bool, with_sub: bool, keep: bool) -> MopResult:
    d = prune(d)
    state = initial_state(d)
    trace = ReductionTrace(initially_reduced=sorted(state.nodes, key=d.node_index.__getitem__))
    order = (lambda ns: list(reversed(ns))) if reverse else list

    def snap():
        if keep:
            trace.snapshots.append(d)
            trace.registries.append(dict(state.registry))
        return len(trace.snapshots) - 1

    snap()
    while True:
        m = _pick(d, state, reverse)
        if m is None:
            break
        x = d.dom[m]
        trace.stages.append(x)
        stage = order([n for n in d.nodes if n != d.fin and d.dom[n] == x and n not in state.nodes])
        for n in stage:
            for a in order(list(d.out[n])):
                loc = Location(n, a)
                if loc in state.locations:
                    continue
                before = state.progress()
                d, new, t, end, sub = red_location(d, state, loc, fw, with_sub=with_sub)
                assert state.progress() > before
                trace.steps.append(Step("location", loc, x, new, end, Shape.ONE_TRACE, t, sub, snap()))
        solved = []
        for n in stage:
            t, end, members = replication_mop(d, state, n, fw)
            sub = None
            if with_sub:
                sub = build_subnegotiation(d, n, members, end)
                if classify(sub) is Shape.GENERAL:
                    raise EngineInvariantBroken(f"subnegotiation of {n} is not a replication")
            solved.append((n, t, end, sub))
        for n, t, end, sub in solved:
            d, new = red_node(d, state, n, t, end)
            shape = classify(sub) if sub is not None else Shape.REPLICATION
            trace.steps.append(Step("node", n, x, new, end, shape, t, sub, snap()))
        d = prune(d)
        if keep:
            trace.snapshots[-1] = d
    if len(d.out[d.init]) != 1:
        raise EngineInvariantBroken(f"initial node {d.init} still has {len(d.out[d.init])} outcomes")
    final = Location(d.init, d.out[d.init][0])
    t = state.transformer(fw, final)
    return MopResult(t, fw.apply(t, fw.iota), trace, d)
