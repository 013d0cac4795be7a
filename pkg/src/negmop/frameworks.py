"""Analysis frameworks: lattices, per-location transformers and flow-graph solvers.

Every framework exposes the same small interface (see :class:`Framework`).
Transformers are opaque immutable values that only the owning framework
knows how to compose, join, compare and apply.  ``compose(t1, t2)`` means
"first ``t1``, then ``t2``".
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Hashable, Iterable, Sequence

from .core import Diagram, Location, independent
from .errors import BadProbabilities, Diverged, NegotiationError, UnknownLocation

INF = math.inf
NEG_INF = -math.inf


@dataclass
class FlowGraph:
    """A sequential flow graph with transformer-labelled edges."""

    vertices: list[Hashable]
    entry: Hashable
    exit: Hashable
    edges: list[tuple[Hashable, Hashable, Any, Location | None]] = field(default_factory=list)

    def add_edge(self, u, v, transformer, provenance: Location | None = None) -> None:
        self.edges.append((u, v, transformer, provenance))

    def coreachable(self) -> set:
        """Vertices from which the exit can be reached."""
        pred: dict = {}
        for u, v, _, _ in self.edges:
            pred.setdefault(v, set()).add(u)
        seen = {self.exit}
        todo = [self.exit]
        while todo:
            v = todo.pop()
            for u in pred.get(v, ()):
                if u not in seen:
                    seen.add(u)
                    todo.append(u)
        return seen


class Framework:
    """Base class; subclasses provide the lattice and transformer algebra."""

    name = "abstract"
    exact_equality = True  # whether ``equal`` decides transformer equality

    def __init__(self, d: Diagram):
        self.diagram = d

    # values
    @property
    def iota(self):
        raise NotImplementedError

    def value_bottom(self):
        raise NotImplementedError

    def join_values(self, v1, v2):
        raise NotImplementedError

    # transformers
    def base(self, loc: Location):
        raise NotImplementedError

    def identity(self):
        raise NotImplementedError

    def bottom(self):
        raise NotImplementedError

    def compose(self, t1, t2):
        raise NotImplementedError

    def join(self, t1, t2):
        raise NotImplementedError

    def apply(self, t, v):
        raise NotImplementedError

    def equal(self, t1, t2) -> bool:
        return t1 == t2

    def compose_all(self, ts: Iterable):
        out = self.identity()
        for t in ts:
            out = self.compose(out, t)
        return out

    def sample_value(self, rng: random.Random):
        return self.iota

    def params(self) -> dict:
        return {}

    def render_value(self, v) -> Any:
        return repr(v)

    def flow_solve(self, g: FlowGraph, max_rounds: int = 100_000):
        """Least solution of T(entry) >= id, T(v) >= T(u);e for every edge e: u->v."""
        t = {v: self.bottom() for v in g.vertices}
        t[g.entry] = self.identity()
        incoming: dict = {}
        for u, v, lab, _ in g.edges:
            incoming.setdefault(v, []).append((u, lab))
        for _ in range(max_rounds):
            changed = False
            for v in g.vertices:
                acc = self.identity() if v == g.entry else self.bottom()
                for u, lab in incoming.get(v, ()):
                    acc = self.join(acc, self.compose(t[u], lab))
                if not self.equal(acc, t[v]):
                    t[v] = acc
                    changed = True
            if not changed:
                return t[g.exit]
        raise Diverged(f"{self.name}: no fixed point after {max_rounds} rounds")


# -- expected cost ---------------------------------------------------------


@dataclass(frozen=True)
class Cost:
    """Normalised pair: total mass ``p`` and expected cost conditioned on it."""

    p: Fraction
    c: Fraction

    @staticmethod
    def of(p, c) -> "Cost":
        p, c = Fraction(p), Fraction(c)
        if p < 0:
            raise BadProbabilities(f"negative mass {p}")
        return Cost(p, c if p else Fraction(0))

    def __str__(self) -> str:
        return f"({self.p}, {self.c})"


def _solve(rows: dict, rhs: dict, order: list) -> dict:
    """Gaussian elimination on sparse rows ``{var: coeff}``; exact over Fractions."""
    rows = {k: dict(v) for k, v in rows.items()}
    rhs = dict(rhs)
    for i, piv in enumerate(order):
        row = rows[piv]
        a = row.get(piv, Fraction(0))
        if a == 0:
            raise NegotiationError("singular linear system")
        for k in row:
            row[k] /= a
        rhs[piv] /= a
        for other in order[i + 1:]:
            f = rows[other].get(piv)
            if f:
                for k, val in row.items():
                    rows[other][k] = rows[other].get(k, Fraction(0)) - f * val
                rhs[other] -= f * rhs[piv]
    sol: dict = {}
    for piv in reversed(order):
        s = rhs[piv]
        for k, val in rows[piv].items():
            if k != piv and val:
                s -= val * sol[k]
        sol[piv] = s
    return sol


class ExpectedCost(Framework):
    """Probability mass and expected accumulated cost of successful runs."""

    name = "expected-cost"

    def __init__(self, d: Diagram):
        super().__init__(d)
        for n in d.nodes:
            if n == d.fin or not d.out[n]:
                continue
            total = sum(d.probability(Location(n, a)) for a in d.out[n])
            if any(Location(n, a) in d.prob for a in d.out[n]) and total != 1:
                raise BadProbabilities(f"probabilities of {n} sum to {total}")

    @property
    def iota(self) -> Cost:
        return Cost(Fraction(1), Fraction(0))

    def value_bottom(self) -> Cost:
        return Cost(Fraction(0), Fraction(0))

    def join_values(self, v1: Cost, v2: Cost) -> Cost:
        return self.join(v1, v2)

    def base(self, loc: Location) -> Cost:
        return Cost.of(self.diagram.probability(loc), self.diagram.cost_of(loc))

    def identity(self) -> Cost:
        return Cost(Fraction(1), Fraction(0))

    def bottom(self) -> Cost:
        return Cost(Fraction(0), Fraction(0))

    def compose(self, t1: Cost, t2: Cost) -> Cost:
        return Cost.of(t1.p * t2.p, t1.c + t2.c)

    def join(self, t1: Cost, t2: Cost) -> Cost:
        if not t1.p:
            return t2
        if not t2.p:
            return t1
        p = t1.p + t2.p
        return Cost(p, (t1.p * t1.c + t2.p * t2.c) / p)

    def apply(self, t: Cost, v: Cost) -> Cost:
        return Cost.of(v.p * t.p, v.c + t.c)

    def sample_value(self, rng: random.Random) -> Cost:
        return Cost.of(Fraction(rng.randint(0, 4), 4), Fraction(rng.randint(-8, 8), rng.randint(1, 3)))

    def render_value(self, v: Cost) -> dict:
        return {"mass": v.p, "cost": v.c}

    @staticmethod
    def expected(v: Cost):
        """The expected cost; infinite when successful runs do not carry full mass."""
        return v.c if v.p == 1 else INF

    def flow_solve(self, g: FlowGraph, max_rounds: int = 0) -> Cost:
        # m(v): mass of reaching the exit; k(v): sum over paths of mass * cost.
        if g.entry == g.exit:
            return self.identity()
        edges = [(u, v, t) for u, v, t, _ in g.edges if t.p > 0]
        live = FlowGraph(g.vertices, g.entry, g.exit, [(u, v, t, None) for u, v, t in edges]).coreachable()
        if g.entry not in live:
            return self.bottom()
        order = [v for v in g.vertices if v in live and v != g.exit]
        rows = {v: {v: Fraction(1)} for v in order}
        rhs_m = {v: Fraction(0) for v in order}
        for u, v, t in edges:
            if u not in rows or v not in live:
                continue
            if v == g.exit:
                rhs_m[u] += t.p
            else:
                rows[u][v] = rows[u].get(v, Fraction(0)) - t.p
        m = _solve(rows, rhs_m, order)
        m[g.exit] = Fraction(1)
        rhs_k = {v: Fraction(0) for v in order}
        for u, v, t in edges:
            if u in rows and v in live:
                rhs_k[u] += t.p * t.c * m[v]
        k = _solve(rows, rhs_k, order)
        if not m[g.entry]:
            return self.bottom()
        return Cost(m[g.entry], k[g.entry] / m[g.entry])


# -- worst-case time -------------------------------------------------------


def _add(a, b):
    if a == NEG_INF or b == NEG_INF:
        return NEG_INF
    if a == INF or b == INF:
        return INF
    return a + b


@dataclass(frozen=True)
class MaxPlus:
    """Max-plus matrix: ``v'(p) = max_q v(q) + a[q][p]``."""

    a: tuple[tuple, ...]

    def __str__(self) -> str:
        def f(x):
            return "-inf" if x == NEG_INF else "inf" if x == INF else str(x)

        return "[" + "; ".join(" ".join(f(x) for x in row) for row in self.a) + "]"


class WorstTime(Framework):
    """Per-process completion times; join is the pointwise maximum."""

    name = "worst-time"

    def __init__(self, d: Diagram):
        super().__init__(d)
        self.procs = d.processes
        self.k = len(self.procs)
        for loc, ts in d.time.items():
            if any(t < 0 for t in ts.values()):
                raise NegotiationError(f"negative time at {loc}")

    @property
    def iota(self) -> tuple:
        return tuple(Fraction(0) for _ in self.procs)

    def value_bottom(self) -> tuple:
        return tuple(NEG_INF for _ in self.procs)

    def join_values(self, v1, v2):
        return tuple(max(x, y) for x, y in zip(v1, v2))

    def _matrix(self, f) -> MaxPlus:
        return MaxPlus(tuple(tuple(f(q, p) for p in range(self.k)) for q in range(self.k)))

    def base(self, loc: Location) -> MaxPlus:
        d = self.diagram
        dom = d.dom[loc.node]
        inside = [p in dom for p in self.procs]

        def entry(q, p):
            if inside[p]:
                return d.time_of(loc, self.procs[p]) if inside[q] else NEG_INF
            return Fraction(0) if p == q else NEG_INF

        return self._matrix(entry)

    def identity(self) -> MaxPlus:
        return self._matrix(lambda q, p: Fraction(0) if p == q else NEG_INF)

    def bottom(self) -> MaxPlus:
        return self._matrix(lambda q, p: NEG_INF)

    def compose(self, t1: MaxPlus, t2: MaxPlus) -> MaxPlus:
        a, b = t1.a, t2.a
        r = range(self.k)
        return MaxPlus(tuple(tuple(max(_add(a[q][s], b[s][p]) for s in r) for p in r) for q in r))

    def join(self, t1: MaxPlus, t2: MaxPlus) -> MaxPlus:
        return MaxPlus(tuple(tuple(max(x, y) for x, y in zip(r1, r2)) for r1, r2 in zip(t1.a, t2.a)))

    def apply(self, t: MaxPlus, v) -> tuple:
        r = range(self.k)
        return tuple(max(_add(v[q], t.a[q][p]) for q in r) for p in r)

    def sample_value(self, rng: random.Random):
        return tuple(Fraction(rng.randint(0, 6)) for _ in self.procs)

    def render_value(self, v) -> dict:
        return dict(zip(self.procs, v))

    @staticmethod
    def makespan(v) -> Any:
        return max(v)

    def flow_solve(self, g: FlowGraph, max_rounds: int = 100_000) -> MaxPlus:
        """Kleene iteration; entries still growing after every simple path has
        been explored are set to +inf."""
        k = self.k
        t = {v: self.bottom() for v in g.vertices}
        t[g.entry] = self.identity()
        incoming: dict = {}
        for u, v, lab, _ in g.edges:
            incoming.setdefault(v, []).append((u, lab))
        settle = len(g.vertices) * k + 1
        for rnd in range(1, max_rounds + 1):
            new = {}
            for v in g.vertices:
                acc = self.identity() if v == g.entry else self.bottom()
                for u, lab in incoming.get(v, ()):
                    acc = self.join(acc, self.compose(t[u], lab))
                new[v] = acc
            if all(new[v] == t[v] for v in g.vertices):
                return t[g.exit]
            if rnd > settle:
                for v in g.vertices:
                    old, cur = t[v].a, new[v].a
                    new[v] = MaxPlus(tuple(
                        tuple(INF if cur[q][p] != old[q][p] else cur[q][p] for p in range(k)) for q in range(k)
                    ))
            t = new
        raise Diverged(f"worst-time: no fixed point after {max_rounds} rounds")


# -- gen/kill collecting framework -----------------------------------------

TOP = ("top",)
VARIANTS = ("may-forward", "must-forward", "may-backward", "must-backward", "anti-pattern")


@dataclass(frozen=True)
class GenKillSpec:
    variant: str
    gen: frozenset = frozenset()
    kill: frozenset = frozenset()
    loc: Location | None = None
    loc2: Location | None = None

    @staticmethod
    def make(variant: str, gen=(), kill=(), loc=None, loc2=None) -> "GenKillSpec":
        def as_loc(x):
            if x is None or isinstance(x, Location):
                return x
            return Location.parse(x) if isinstance(x, str) else Location(*x)

        if variant not in VARIANTS:
            raise ValueError(f"unknown gen/kill variant {variant!r}; expected one of {', '.join(VARIANTS)}")
        return GenKillSpec(
            variant,
            frozenset(as_loc(x) for x in gen),
            frozenset(as_loc(x) for x in kill),
            as_loc(loc),
            as_loc(loc2),
        )

    @staticmethod
    def from_block(block: dict) -> "GenKillSpec":
        def locs(key):
            raw = block.get(key, "")
            return [Location.parse(x) for x in raw.split(",") if x]

        return GenKillSpec.make(
            block.get("variant", "may-forward"),
            locs("gen"),
            locs("kill"),
            block.get("loc"),
            block.get("loc2"),
        )

    def locations(self) -> set[Location]:
        return set(self.gen) | set(self.kill) | {x for x in (self.loc, self.loc2) if x is not None}


@dataclass(frozen=True)
class Pair:
    """Two events ``x`` in ``first`` and ``y`` in ``second``, ``x`` can be
    scheduled before ``y`` and nothing in ``bad`` lies strictly between them."""

    first: frozenset
    second: frozenset
    bad: frozenset

    def start(self) -> tuple:
        return ("idle",)

    def step(self, s: tuple, loc: Location, dom: tuple[int, ...], nproc: int) -> list:
        tag = s[0]
        if tag == "idle":
            out = [s]
            if loc in self.first:
                out.append(("first", tuple("A" if i in dom else "C" for i in range(nproc))))
            if loc in self.second:
                out.append(("second", tuple(i in dom for i in range(nproc))))
            return out
        if tag == "first":
            st = s[1]
            here = {st[i] for i in dom}
            if loc in self.second and "B" not in here:
                return [TOP]
            if "B" in here:
                new = "B"
            elif "A" in here:
                new = "B" if loc in self.bad else "A"
            else:
                return [s]
            return [("first", tuple(new if i in dom else x for i, x in enumerate(st)))]
        if tag == "second":
            bits = s[1]
            seen = any(bits[i] for i in dom)
            if loc in self.first and not seen:
                return [TOP]
            return [("second", tuple(seen if i in dom else b for i, b in enumerate(bits)))]
        raise AssertionError(s)


@dataclass(frozen=True)
class Clean:
    """Some occurrence of ``target`` has no event of ``dirty`` in its past."""

    target: Location
    dirty: frozenset

    def start(self) -> tuple:
        return ("clean", None)

    def step(self, s: tuple, loc: Location, dom: tuple[int, ...], nproc: int) -> list:
        bits = s[1] or (False,) * nproc
        seen = any(bits[i] for i in dom)
        if loc == self.target and not seen:
            return [TOP]
        mark = seen or loc in self.dirty
        return [("clean", tuple(mark if i in dom else b for i, b in enumerate(bits)))]


@dataclass(frozen=True)
class EndWatch:
    """Some occurrence of ``target`` has no event of ``dirty`` in its future."""

    target: Location
    dirty: frozenset

    def start(self) -> tuple:
        return ("wait",)

    def step(self, s: tuple, loc: Location, dom: tuple[int, ...], nproc: int) -> list:
        if s[0] == "wait":
            out = [s]
            if loc == self.target:
                out.append(("watch", tuple(i in dom for i in range(nproc))))
            return out
        bits = s[1]
        if any(bits[i] for i in dom):
            if loc in self.dirty:
                return []
            return [("watch", tuple(True if i in dom else b for i, b in enumerate(bits)))]
        return [s]

    @staticmethod
    def accepting(s: tuple) -> bool:
        return s[0] == "watch"


@dataclass(frozen=True)
class CompiledVariant:
    """Trace condition for a gen/kill variant as a disjunction of trackers.

    ``negated`` is set for the must-variants: a detection refutes the
    property rather than establishing it.
    """

    spec: GenKillSpec
    trackers: tuple
    condition: str
    negated: bool


def compile_genkill_variant(spec: GenKillSpec) -> CompiledVariant:
    g, k, l = spec.gen, spec.kill, spec.loc
    gk = g | k
    if spec.variant == "anti-pattern":
        l1, l2 = spec.loc, spec.loc2 or spec.loc
        return CompiledVariant(
            spec, (Pair(frozenset({l1}), frozenset({l2}), k),),
            "events x=l1, y=l2, x != y, not y <= x, no K strictly between x and y", False,
        )
    if l is None:
        raise UnknownLocation(f"variant {spec.variant} needs a target location")
    if spec.variant == "may-forward":
        return CompiledVariant(
            spec, (Pair(g, frozenset({l}), k),),
            "events x in G, y=l, x != y, not y <= x, no K strictly between", False,
        )
    if spec.variant == "may-backward":
        return CompiledVariant(
            spec, (Pair(frozenset({l}), g, k),),
            "events x=l, y in G, x != y, not y <= x, no K strictly between", False,
        )
    if spec.variant == "must-forward":
        return CompiledVariant(
            spec, (Clean(l, gk), Pair(k - g, frozenset({l}), gk)),
            "an l with no G or K event below it, or x in K\\G, y=l, x != y, not y <= x, no G or K strictly between",
            True,
        )
    if spec.variant == "must-backward":
        return CompiledVariant(
            spec, (EndWatch(l, gk), Pair(frozenset({l}), k - g, gk)),
            "an l with no G or K event above it, or x=l, y in K\\G, x != y, not y <= x, no G or K strictly between",
            True,
        )
    raise ValueError(spec.variant)


@dataclass(frozen=True)
class Relation:
    """Tabulated relation on the finite state space; row ``i`` is a bitmask."""

    rows: tuple[int, ...]


class GenKill(Framework):
    """Collecting framework over tracker states; TOP is absorbing.

    Values are bitmasks over an explicitly enumerated state space (the
    closure of the initial states under every location of the diagram);
    state 0 is TOP.
    """

    name = "genkill"
    max_processes = 10

    def __init__(self, d: Diagram, spec: GenKillSpec):
        super().__init__(d)
        if len(d.processes) > self.max_processes:
            raise NegotiationError(f"gen/kill supports at most {self.max_processes} processes")
        known = set(d.locations)
        for loc in spec.locations():
            if loc not in known:
                raise UnknownLocation(f"location {loc} does not exist in {d.name}")
        self.spec = spec
        self.compiled = compile_genkill_variant(spec)
        self._pidx = {p: i for i, p in enumerate(d.processes)}
        self._dom = {n: tuple(sorted(self._pidx[p] for p in d.dom[n])) for n in d.nodes}
        self.states: list = [TOP]
        self.index: dict = {TOP: 0}
        self._iota = 0
        for i, tr in enumerate(self.compiled.trackers):
            self._iota |= 1 << self._intern((i, tr.start()))
        self._base_cache: dict = {}
        todo = [j for j in range(len(self.states)) if j]
        while todo:
            j = todo.pop()
            for loc in d.locations:
                for s2 in self._succ(self.states[j], loc):
                    if s2 not in self.index:
                        todo.append(self._intern(s2))
        self.size = len(self.states)
        self._full = (1 << self.size) - 1

    def _intern(self, s) -> int:
        if s not in self.index:
            self.index[s] = len(self.states)
            self.states.append(s)
        return self.index[s]

    def _succ(self, s, loc: Location) -> list:
        if s == TOP:
            return [TOP]
        i, local = s
        nxt = self.compiled.trackers[i].step(local, loc, self._dom[loc.node], len(self._pidx))
        return [TOP if x == TOP else (i, x) for x in nxt]

    @staticmethod
    def _collapse(mask: int) -> int:
        return 1 if mask & 1 else mask

    @property
    def iota(self) -> int:
        return self._iota

    def value_bottom(self) -> int:
        return 0

    def join_values(self, v1: int, v2: int) -> int:
        return self._collapse(v1 | v2)

    def base(self, loc: Location) -> Relation:
        loc = Location(*loc)
        if loc not in self._base_cache:
            rows = []
            for s in self.states:
                mask = 0
                for s2 in self._succ(s, loc):
                    mask |= 1 << self.index[s2]
                rows.append(self._collapse(mask))
            self._base_cache[loc] = Relation(tuple(rows))
        return self._base_cache[loc]

    def identity(self) -> Relation:
        return Relation(tuple(1 << i for i in range(self.size)))

    def bottom(self) -> Relation:
        return Relation((0,) * self.size)

    def apply(self, t: Relation, v: int) -> int:
        out = 0
        while v:
            low = v & -v
            out |= t.rows[low.bit_length() - 1]
            v ^= low
        return self._collapse(out)

    def compose(self, t1: Relation, t2: Relation) -> Relation:
        return Relation(tuple(self.apply(t2, r) for r in t1.rows))

    def join(self, t1: Relation, t2: Relation) -> Relation:
        return Relation(tuple(self._collapse(a | b) for a, b in zip(t1.rows, t2.rows)))

    def sample_value(self, rng: random.Random) -> int:
        return self._collapse(rng.getrandbits(self.size))

    def decode(self, v: int) -> list:
        return [self.states[i] for i in range(self.size) if v >> i & 1]

    def detected(self, v: int) -> bool:
        """Whether the value witnesses a successful run satisfying the trace condition."""
        if v & 1:
            return True
        for s in self.decode(v):
            tr = self.compiled.trackers[s[0]]
            if isinstance(tr, EndWatch) and tr.accepting(s[1]):
                return True
        return False

    def holds(self, v: int) -> bool:
        """The analysed property: detection for may/anti-pattern, its negation for must."""
        return self.detected(v) != self.compiled.negated

    def params(self) -> dict:
        s = self.spec
        return {
            "variant": s.variant,
            "gen": sorted(map(str, s.gen)),
            "kill": sorted(map(str, s.kill)),
            "loc": str(s.loc) if s.loc else None,
            "loc2": str(s.loc2) if s.loc2 else None,
        }

    def render_value(self, v: int) -> dict:
        return {"detected": self.detected(v), "holds": self.holds(v), "states": len(self.decode(v))}


# -- small frameworks ------------------------------------------------------


class NaiveAntiPattern(Framework):
    """Three-valued sequential anti-pattern detector (0 < 1 < 2, join = max).

    Not invariant under commutation of independent locations; kept as a
    negative test subject for :func:`check_invariance`.
    """

    name = "naive-anti-pattern"
    L1 = (1, 1, 2)
    L2 = (0, 2, 2)
    KILL = (0, 0, 2)
    ID = (0, 1, 2)

    def __init__(self, d: Diagram, l1: Location, l2: Location, kill: Iterable[Location] = ()):
        super().__init__(d)
        self.l1, self.l2, self.kill = Location(*l1), Location(*l2), frozenset(Location(*k) for k in kill)

    @property
    def iota(self) -> int:
        return 0

    def value_bottom(self) -> int:
        return 0

    def join_values(self, v1, v2):
        return max(v1, v2)

    def base(self, loc: Location) -> tuple:
        # ℓ2 is checked before a kill resets, and ℓ1 (re)starts last.
        t = self.ID
        if loc == self.l2:
            t = self.compose(t, self.L2)
        if loc in self.kill:
            t = self.compose(t, self.KILL)
        if loc == self.l1:
            t = self.compose(t, self.L1)
        return t

    def identity(self) -> tuple:
        return self.ID

    def bottom(self) -> tuple:
        return (0, 0, 0)

    def compose(self, t1, t2):
        return tuple(t2[t1[x]] for x in range(3))

    def join(self, t1, t2):
        return tuple(max(a, b) for a, b in zip(t1, t2))

    def apply(self, t, v):
        return t[v]

    def sample_value(self, rng: random.Random) -> int:
        return rng.randint(0, 2)


class Identity(Framework):
    """Two-point lattice where every location is the identity."""

    name = "identity"

    @property
    def iota(self):
        return True

    def value_bottom(self):
        return False

    def join_values(self, v1, v2):
        return v1 or v2

    def base(self, loc):
        return True

    def identity(self):
        return True

    def bottom(self):
        return False

    def compose(self, t1, t2):
        return t1 and t2

    def join(self, t1, t2):
        return t1 or t2

    def apply(self, t, v):
        return t and v

    def flow_solve(self, g: FlowGraph, max_rounds: int = 0):
        return g.entry in g.coreachable()


FRAMEWORKS = ("expected-cost", "worst-time", "genkill", "identity")


def make_framework(name: str, d: Diagram, spec: GenKillSpec | None = None) -> Framework:
    if name == "expected-cost":
        return ExpectedCost(d)
    if name == "worst-time":
        return WorstTime(d)
    if name == "genkill":
        if spec is None:
            raise ValueError("the gen/kill framework needs a GenKillSpec")
        return GenKill(d, spec)
    if name == "identity":
        return Identity(d)
    raise ValueError(f"unknown framework {name!r}; expected one of {', '.join(FRAMEWORKS)}")


# -- invariance ------------------------------------------------------------


@dataclass
class InvarianceVerdict:
    invariant: bool
    pairs_checked: int
    witness: tuple[Location, Location] | None = None
    value: Any = None


def check_invariance(
    d: Diagram,
    fw: Framework,
    mode: str = "exhaustive",
    *,
    seed: int = 0,
    count: int = 20,
    pairs: str = "independent",
) -> InvarianceVerdict:
    """Check that base transformers of independent locations commute.

    ``exhaustive`` compares transformers with ``fw.equal`` when the framework
    decides equality; ``sampled`` (or frameworks without decidable equality)
    compares images of ``count`` random values.  ``pairs="all"`` also checks
    dependent pairs.
    """
    rng = random.Random(seed)
    sampled = mode == "sampled" or not fw.exact_equality
    samples = [fw.iota] + [fw.sample_value(rng) for _ in range(count)] if sampled else []
    checked = 0
    for l1, l2 in itertools.combinations(d.locations, 2):
        if pairs == "independent" and not independent(d, l1, l2):
            continue
        checked += 1
        t12 = fw.compose(fw.base(l1), fw.base(l2))
        t21 = fw.compose(fw.base(l2), fw.base(l1))
        if sampled:
            for v in samples:
                if fw.apply(t12, v) != fw.apply(t21, v):
                    return InvarianceVerdict(False, checked, (l1, l2), v)
        elif not fw.equal(t12, t21):
            return InvarianceVerdict(False, checked, (l1, l2))
    return InvarianceVerdict(True, checked)
