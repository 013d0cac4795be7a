"""Explicit-state exploration: reachability graphs, soundness, deadlocks, domination.

Everything here enumerates configurations and is therefore exponential in
the worst case; it is the desk-scale reference the polynomial engine is
checked against.
"""

from __future__ import annotations

import enum
import os
from collections import deque
from dataclasses import dataclass, field

from .core import Configuration, Diagram, Location, enabled, local_graph, step, terminal_enabled
from .errors import LimitExceeded

DEFAULT_MAX_CONFIGS = 1_000_000


def default_max_configs() -> int:
    return int(os.environ.get("NEGOT_MAX_CONFIGS", DEFAULT_MAX_CONFIGS))


@dataclass
class ReachabilityGraph:
    root: Configuration
    vertices: list[Configuration]
    edges: list[tuple[Configuration, Location, Configuration]]
    succ: dict[Configuration, list[tuple[Location, Configuration]]]
    parent: dict[Configuration, tuple[Configuration, Location] | None]
    truncated: bool = False
    limit: int | None = None

    def __len__(self) -> int:
        return len(self.vertices)

    def __contains__(self, c: Configuration) -> bool:
        return c in self.parent

    def path_to(self, c: Configuration) -> list[Location]:
        """Shortest run from the root to ``c`` (BFS tree)."""
        run = []
        while self.parent[c] is not None:
            c, loc = self.parent[c]
            run.append(loc)
        return run[::-1]

    def coreachable(self, targets) -> set[Configuration]:
        pred: dict[Configuration, list[Configuration]] = {}
        for src, _, dst in self.edges:
            pred.setdefault(dst, []).append(src)
        seen = {t for t in targets if t in self}
        todo = deque(seen)
        while todo:
            c = todo.popleft()
            for b in pred.get(c, ()):
                if b not in seen:
                    seen.add(b)
                    todo.append(b)
        return seen


def reachability_graph(
    d: Diagram,
    max_configs: int | None = None,
    start: Configuration | None = None,
) -> ReachabilityGraph:
    """Breadth-first closure of :func:`step` from ``start`` (default ``C_init``)."""
    limit = default_max_configs() if max_configs is None else max_configs
    root = d.initial_configuration if start is None else start
    vertices = [root]
    parent: dict = {root: None}
    succ: dict = {}
    edges = []
    truncated = False
    todo = deque([root])
    while todo:
        c = todo.popleft()
        out = succ.setdefault(c, [])
        for n in sorted(enabled(d, c), key=d.node_index.__getitem__):
            for a in d.out[n]:
                loc = Location(n, a)
                c2 = step(d, c, loc)
                out.append((loc, c2))
                edges.append((c, loc, c2))
                if c2 not in parent:
                    if len(vertices) >= limit:
                        truncated = True
                        continue
                    parent[c2] = (c, loc)
                    vertices.append(c2)
                    todo.append(c2)
    if truncated:
        edges = [e for e in edges if e[2] in parent]
        for c in succ:
            succ[c] = [(l, c2) for l, c2 in succ[c] if c2 in parent]
    return ReachabilityGraph(root, vertices, edges, succ, parent, truncated, limit)


class Status(enum.Enum):
    SOUND = "Sound"
    UNSOUND = "Unsound"
    LIMIT_EXCEEDED = "LimitExceeded"


@dataclass
class SoundnessVerdict:
    status: Status
    witness: list[Location] | None = None
    stuck_at: Configuration | None = None
    configurations: int = 0
    limit: int | None = None

    @property
    def sound(self) -> bool:
        return self.status is Status.SOUND


def check_soundness(d: Diagram, max_configs: int | None = None) -> SoundnessVerdict:
    """Sound iff every reachable configuration can still reach ``C_fin``.

    Unsound verdicts carry a shortest partial run leading to a configuration
    from which ``C_fin`` is unreachable.
    """
    g = reachability_graph(d, max_configs)
    fin = d.final_configuration
    if g.truncated:
        # Dead ends found inside the explored part are conclusive.
        for c in g.vertices:
            if c != fin and not enabled(d, c):
                return SoundnessVerdict(Status.UNSOUND, g.path_to(c), c, len(g), g.limit)
        return SoundnessVerdict(Status.LIMIT_EXCEEDED, configurations=len(g), limit=g.limit)
    good = g.coreachable([fin])
    for c in g.vertices:  # BFS order, so the first bad vertex has a shortest witness
        if c not in good:
            return SoundnessVerdict(Status.UNSOUND, g.path_to(c), c, len(g), g.limit)
    return SoundnessVerdict(Status.SOUND, configurations=len(g), limit=g.limit)


def deadlocks(d: Diagram, max_configs: int | None = None) -> set[Configuration]:
    """Reachable configurations other than ``C_fin`` with no enabled node."""
    g = reachability_graph(d, max_configs)
    if g.truncated:
        raise LimitExceeded(f"more than {g.limit} reachable configurations")
    fin = d.final_configuration
    return {c for c in g.vertices if c != fin and not enabled(d, c)}


def reachable_nodes(d: Diagram, max_configs: int | None = None) -> set[str]:
    """Nodes enabled at some reachable configuration."""
    g = reachability_graph(d, max_configs)
    if g.truncated:
        raise LimitExceeded(f"more than {g.limit} reachable configurations")
    nodes: set[str] = set()
    for c in g.vertices:
        nodes |= enabled(d, c) | terminal_enabled(d, c)
    return nodes


@dataclass
class DominationVerdict:
    holds: bool
    circuits_checked: int
    counterexample: list[str] | None = None
    dominant: dict[tuple[str, ...], list[str]] = field(default_factory=dict)


def check_domination(d: Diagram, max_configs: int | None = None, max_cycle_len: int = 12) -> DominationVerdict:
    """Every reachable simple local circuit must contain a node whose domain
    includes the domains of all circuit nodes."""
    live = reachable_nodes(d, max_configs)
    lg = local_graph(d)
    checked = 0
    dominant = {}
    for circuit in lg.circuits(max_cycle_len, nodes=lg.reachable()):
        if not live.intersection(circuit):
            continue
        checked += 1
        union = frozenset().union(*(d.dom[n] for n in circuit))
        winners = [n for n in circuit if d.dom[n] == union]
        if not winners:
            return DominationVerdict(False, checked, circuit, dominant)
        dominant[tuple(circuit)] = winners
    return DominationVerdict(True, checked, None, dominant)
