"""Negotiation diagrams and their operational semantics.

A diagram has a fixed set of processes and a set of nodes; every node has a
domain (the processes that must meet there) and a set of outcomes.  Executing
outcome ``a`` of an enabled node ``n`` moves every process ``p`` of ``dom(n)``
to the node(s) ``delta(n, a, p)``.  The final node has no outcomes, so a run
ends when all processes have reached it.
"""

from __future__ import annotations

import enum
from collections.abc import Iterable, Iterator, Mapping, Sequence
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from typing import NamedTuple

import networkx as nx

from .errors import NotEnabled, NotDeterministic, ValidationError, Violation

NodeId = str
ProcessId = str
OutcomeId = str


class Location(NamedTuple):
    node: NodeId
    outcome: OutcomeId

    def __str__(self) -> str:
        return f"{self.node}.{self.outcome}"

    @classmethod
    def parse(cls, text: str) -> "Location":
        node, sep, outcome = text.strip().partition(".")
        if not sep or not node or not outcome:
            raise ValueError(f"location must look like NODE.OUTCOME, got {text!r}")
        return cls(node, outcome)


class Configuration(Mapping):
    """Immutable mapping ``process -> frozenset of nodes``.

    Deterministic diagrams only ever produce singleton sets; :meth:`node`
    returns the single member.  A configuration whose scope is a strict subset
    of the processes is a partial configuration.
    """

    __slots__ = ("_at", "_hash")

    def __init__(self, at: Mapping[ProcessId, NodeId | Iterable[NodeId]]):
        self._at = {
            p: frozenset((v,)) if isinstance(v, str) else frozenset(v) for p, v in at.items()
        }
        self._hash = hash(frozenset(self._at.items()))

    def __getitem__(self, p: ProcessId) -> frozenset[NodeId]:
        return self._at[p]

    def __iter__(self) -> Iterator[ProcessId]:
        return iter(self._at)

    def __len__(self) -> int:
        return len(self._at)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Configuration):
            return self._hash == other._hash and self._at == other._at
        return NotImplemented

    @property
    def scope(self) -> frozenset[ProcessId]:
        return frozenset(self._at)

    def node(self, p: ProcessId) -> NodeId:
        nodes = self._at[p]
        if len(nodes) != 1:
            raise NotDeterministic(f"process {p} is at {sorted(nodes)}, not a single node")
        (n,) = nodes
        return n

    def restrict(self, procs: Iterable[ProcessId]) -> "Configuration":
        return Configuration({p: self._at[p] for p in procs})

    def updated(self, changes: Mapping[ProcessId, NodeId | Iterable[NodeId]]) -> "Configuration":
        at: dict = dict(self._at)
        at.update(changes)
        return Configuration(at)

    def as_tuple(self, order: Sequence[ProcessId]) -> tuple:
        return tuple(self.node(p) if len(self._at[p]) == 1 else tuple(sorted(self._at[p])) for p in order)

    def __repr__(self) -> str:
        parts = []
        for p, nodes in self._at.items():
            parts.append(next(iter(nodes)) if len(nodes) == 1 else "{" + ",".join(sorted(nodes)) + "}")
        return "(" + ",".join(parts) + ")"


@dataclass(frozen=True)
class Diagram:
    """A negotiation diagram with optional per-location annotations.

    ``prob``, ``cost`` and ``time`` are only read by analysis frameworks; the
    semantic operations of this module ignore them.
    """

    name: str
    processes: tuple[ProcessId, ...]
    nodes: tuple[NodeId, ...]
    dom: Mapping[NodeId, frozenset[ProcessId]]
    out: Mapping[NodeId, tuple[OutcomeId, ...]]
    delta: Mapping[tuple[NodeId, OutcomeId, ProcessId], frozenset[NodeId]]
    init: NodeId
    fin: NodeId
    prob: Mapping[Location, Fraction] = field(default_factory=dict)
    cost: Mapping[Location, Fraction] = field(default_factory=dict)
    time: Mapping[Location, Mapping[ProcessId, Fraction]] = field(default_factory=dict)
    analyses: Mapping[str, Mapping[str, str]] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        name: str,
        processes: Sequence[ProcessId],
        nodes: Mapping[NodeId, Iterable[ProcessId]],
        init: NodeId,
        fin: NodeId,
        moves: Mapping[tuple[NodeId, OutcomeId], Mapping[ProcessId, NodeId | Iterable[NodeId]]],
        **annotations,
    ) -> "Diagram":
        """Convenience constructor from plain Python structures (no validation)."""
        out: dict[NodeId, list[OutcomeId]] = {n: [] for n in nodes}
        delta = {}
        for (n, a), targets in moves.items():
            out.setdefault(n, [])
            if a not in out[n]:
                out[n].append(a)
            for p, t in targets.items():
                delta[(n, a, p)] = frozenset((t,)) if isinstance(t, str) else frozenset(t)
        return cls(
            name=name,
            processes=tuple(processes),
            nodes=tuple(nodes),
            dom={n: frozenset(ps) for n, ps in nodes.items()},
            out={n: tuple(v) for n, v in out.items()},
            delta=delta,
            init=init,
            fin=fin,
            **annotations,
        )

    # -- structure ---------------------------------------------------------

    @cached_property
    def locations(self) -> tuple[Location, ...]:
        return tuple(Location(n, a) for n in self.nodes for a in self.out.get(n, ()))

    @cached_property
    def node_index(self) -> dict[NodeId, int]:
        return {n: i for i, n in enumerate(self.nodes)}

    def targets(self, n: NodeId, a: OutcomeId, p: ProcessId) -> frozenset[NodeId]:
        return self.delta.get((n, a, p), frozenset())

    def succ(self, n: NodeId, a: OutcomeId, p: ProcessId) -> NodeId:
        ts = self.targets(n, a, p)
        if len(ts) != 1:
            raise NotDeterministic(f"delta({n},{a},{p}) = {sorted(ts)}")
        (t,) = ts
        return t

    def moves(self, n: NodeId, a: OutcomeId) -> dict[ProcessId, NodeId]:
        """Deterministic successor map ``p -> delta(n,a,p)`` over ``dom(n)``."""
        return {p: self.succ(n, a, p) for p in self.dom[n]}

    def sorted_procs(self, procs: Iterable[ProcessId]) -> tuple[ProcessId, ...]:
        procs = set(procs)
        return tuple(p for p in self.processes if p in procs)

    @property
    def initial_configuration(self) -> Configuration:
        return Configuration({p: self.init for p in self.processes})

    @property
    def final_configuration(self) -> Configuration:
        return Configuration({p: self.fin for p in self.processes})

    def configuration(self, *nodes: NodeId) -> Configuration:
        """Shorthand: ``d.configuration('n1', 'n8', 'n8')`` in process order."""
        if len(nodes) != len(self.processes):
            raise ValueError("one node per process expected")
        return Configuration(dict(zip(self.processes, nodes)))

    # -- annotations -------------------------------------------------------

    def probability(self, loc: Location) -> Fraction:
        """Annotated probability, or uniform over ``out(n)`` when the node has none."""
        if loc in self.prob:
            return self.prob[loc]
        n = loc.node
        if any(Location(n, b) in self.prob for b in self.out[n]):
            return Fraction(0)
        return Fraction(1, len(self.out[n]))

    def cost_of(self, loc: Location) -> Fraction:
        return self.cost.get(loc, Fraction(0))

    def time_of(self, loc: Location, p: ProcessId) -> Fraction:
        return self.time.get(loc, {}).get(p, Fraction(0))

    def replace(self, **changes) -> "Diagram":
        return replace(self, **changes)

    def __str__(self) -> str:
        return f"Diagram({self.name}: {len(self.processes)} processes, {len(self.nodes)} nodes)"


def validate(d: Diagram, *, check_probs: bool = True) -> Diagram:
    """Return ``d`` unchanged if it is well formed, else raise :class:`ValidationError`."""
    v: list[Violation] = []
    procs = set(d.processes)
    nodes = set(d.nodes)
    for n in d.nodes:
        if not d.dom.get(n):
            v.append(Violation("DomainViolation", (n,), "empty domain"))
        elif not d.dom[n] <= procs:
            v.append(Violation("DomainViolation", (n,), f"unknown processes {sorted(d.dom[n] - procs)}"))
    for n, label in ((d.init, "initial"), (d.fin, "final")):
        if n not in nodes:
            v.append(Violation("BadInitFin", (n,), f"{label} node is not declared"))
        elif d.dom[n] != procs:
            v.append(Violation("BadInitFin", (n,), f"{label} node must involve every process"))
    if d.init == d.fin:
        v.append(Violation("BadInitFin", (d.init,), "initial and final node coincide"))
    if d.out.get(d.fin):
        v.append(Violation("BadInitFin", (d.fin,), "the final node must not have outcomes"))
    for n in d.nodes:
        if n != d.fin and not d.out.get(n):
            v.append(Violation("MissingOutcome", (n,), "only the final node may lack outcomes"))
        for a in d.out.get(n, ()):
            for p in d.sorted_procs(d.dom.get(n, ())):
                ts = d.delta.get((n, a, p))
                if not ts:
                    v.append(Violation("MissingDelta", (n, a, p), "no successor node"))
                    continue
                for t in sorted(ts):
                    if t not in nodes:
                        v.append(Violation("DomainViolation", (n, a, p), f"unknown successor {t}"))
                    elif p not in d.dom[t]:
                        v.append(Violation("DomainViolation", (n, a, p), f"{p} does not take part in {t}"))
    for (n, a, p) in d.delta:
        if n not in nodes or a not in d.out.get(n, ()) or p not in d.dom.get(n, ()):
            v.append(Violation("DomainViolation", (n, a, p), "transition for a non-existent triple"))
    for loc in list(d.prob) + list(d.cost) + list(d.time):
        if loc.node not in nodes or loc.outcome not in d.out.get(loc.node, ()):
            v.append(Violation("DomainViolation", tuple(loc), "annotation on an unknown location"))
    if check_probs and d.prob:
        for n in d.nodes:
            if n == d.fin or not d.out.get(n):
                continue
            ps = [d.probability(Location(n, a)) for a in d.out[n]]
            if any(x < 0 or x > 1 for x in ps):
                v.append(Violation("ProbSumViolation", (n,), "probabilities must lie in [0,1]"))
            elif sum(ps) != 1:
                v.append(Violation("ProbSumViolation", (n,), f"outcome probabilities sum to {sum(ps)}"))
    for loc, times in d.time.items():
        if any(t < 0 for t in times.values()):
            v.append(Violation("DomainViolation", tuple(loc), "negative execution time"))
    if v:
        raise ValidationError(v)
    return d


def is_deterministic(d: Diagram) -> tuple[bool, list[tuple[NodeId, OutcomeId, ProcessId]]]:
    """Return the verdict and every triple with more than one successor."""
    witnesses = [key for key, ts in d.delta.items() if len(ts) > 1]
    witnesses.sort(key=lambda t: (d.node_index.get(t[0], -1), t[1], t[2]))
    return not witnesses, witnesses


def _ready(d: Diagram, c: Configuration, n: NodeId) -> bool:
    dom = d.dom[n]
    return all(p in c and n in c[p] for p in dom)


def enabled(d: Diagram, c: Configuration) -> frozenset[NodeId]:
    """Nodes with at least one outcome whose whole domain is ready at ``c``."""
    candidates = set().union(*c.values()) if len(c) else set()
    return frozenset(n for n in candidates if d.out.get(n) and _ready(d, c, n))


def terminal_enabled(d: Diagram, c: Configuration) -> frozenset[NodeId]:
    """Enabled nodes without outcomes (in a valid diagram only the final node)."""
    candidates = set().union(*c.values()) if len(c) else set()
    return frozenset(n for n in candidates if not d.out.get(n) and _ready(d, c, n))


def step(d: Diagram, c: Configuration, loc: Location) -> Configuration:
    n, a = loc
    if n not in d.dom or a not in d.out.get(n, ()) or not _ready(d, c, n):
        raise NotEnabled(loc)
    return c.updated({p: d.targets(n, a, p) for p in d.dom[n]})


def replay(d: Diagram, c: Configuration, run: Iterable[Location]) -> Configuration:
    for i, loc in enumerate(run):
        try:
            c = step(d, c, Location(*loc))
        except NotEnabled as exc:
            raise NotEnabled(exc.location, i) from None
    return c


def independent(d: Diagram, l1: Location, l2: Location) -> bool:
    return not (d.dom[l1[0]] & d.dom[l2[0]])


def _location_key(d: Diagram, loc: Location) -> tuple:
    return (d.node_index.get(loc[0], len(d.nodes)), loc[0], loc[1])


def normal_form(d: Diagram, w: Sequence[Location]) -> tuple[Location, ...]:
    """Lexicographically least sequence equivalent to ``w`` under commutation.

    Greedy: repeatedly emit the smallest location that no earlier remaining
    location depends on.
    """
    rest = [Location(*x) for x in w]
    out = []
    while rest:
        best = None
        for i, loc in enumerate(rest):
            if any(not independent(d, rest[j], loc) for j in range(i)):
                continue
            if best is None or _location_key(d, loc) < _location_key(d, rest[best]):
                best = i
        out.append(rest.pop(best))
    return tuple(out)


def mazurkiewicz_equivalent(d: Diagram, w: Sequence[Location], v: Sequence[Location]) -> bool:
    if sorted(map(tuple, w)) != sorted(map(tuple, v)):
        return False
    return normal_form(d, w) == normal_form(d, v)


class LocalGraph:
    """The graph of a diagram: an edge ``n -(p,a)-> n'`` per successor triple."""

    def __init__(self, d: Diagram):
        self.diagram = d
        self.edges: list[tuple[NodeId, ProcessId, OutcomeId, NodeId]] = []
        for n in d.nodes:
            for a in d.out.get(n, ()):
                for p in d.sorted_procs(d.dom[n]):
                    for t in sorted(d.targets(n, a, p), key=lambda x: d.node_index.get(x, 0)):
                        self.edges.append((n, p, a, t))
        self.graph = nx.DiGraph()
        self.graph.add_nodes_from(d.nodes)
        self.graph.add_edges_from((n, t) for n, _, _, t in self.edges)

    def has_edge(self, n: NodeId, p: ProcessId, a: OutcomeId, t: NodeId) -> bool:
        return (n, p, a, t) in set(self.edges)

    def reachable(self, source: NodeId | None = None) -> set[NodeId]:
        source = self.diagram.init if source is None else source
        return {source} | nx.descendants(self.graph, source)

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.graph)

    def circuits(self, max_len: int | None = None, nodes: Iterable[NodeId] | None = None) -> list[list[NodeId]]:
        """Simple circuits (as node lists) of the graph, optionally restricted to ``nodes``."""
        g = self.graph if nodes is None else self.graph.subgraph(nodes)
        return [list(c) for c in nx.simple_cycles(g, length_bound=max_len)]


def local_graph(d: Diagram) -> LocalGraph:
    return LocalGraph(d)


class Order(enum.Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


def domain_order(d: Diagram, x: NodeId, y: NodeId) -> Order:
    dx, dy = d.dom[x], d.dom[y]
    if dx == dy:
        return Order.EQUAL
    if dx < dy:
        return Order.LESS
    if dx > dy:
        return Order.GREATER
    return Order.INCOMPARABLE
