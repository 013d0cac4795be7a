"""Brute-force reference computations.

Nothing here shares solving code with the reduction engine: MOP values are
fixed points over explicit configuration graphs, and run-language questions
are answered by matching enumerated runs against regular expressions.
"""

from __future__ import annotations

import random
import re
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable, Sequence

from .core import Configuration, Diagram, Location, enabled, step, validate
from .errors import Diverged, GenerationFailed, LimitExceeded
from .frameworks import INF, Cost, ExpectedCost, Framework, GenKillSpec, WorstTime


@dataclass(frozen=True)
class PriorityScheduler:
    """Memoryless scheduler: fire the enabled node listed first in ``order``.

    Nodes missing from ``order`` come after the listed ones, in diagram order.
    """

    order: tuple[str, ...] = ()

    def choose(self, d: Diagram, c: Configuration) -> str | None:
        en = enabled(d, c)
        if not en:
            return None
        rank = {n: i for i, n in enumerate(self.order)}
        return min(en, key=lambda n: (rank.get(n, len(rank)), d.node_index[n]))

    @staticmethod
    def by_index(d: Diagram, reverse: bool = False) -> "PriorityScheduler":
        return PriorityScheduler(tuple(reversed(d.nodes)) if reverse else tuple(d.nodes))

    @staticmethod
    def shuffled(d: Diagram, seed: int) -> "PriorityScheduler":
        nodes = list(d.nodes)
        random.Random(seed).shuffle(nodes)
        return PriorityScheduler(tuple(nodes))


@dataclass
class RunSet:
    runs: list[tuple[Location, ...]]
    truncated: bool = False

    def __iter__(self):
        return iter(self.runs)

    def __len__(self) -> int:
        return len(self.runs)


def default_max_len(d: Diagram) -> int:
    return 4 * max(1, len(d.locations))


def _successful_runs(d: Diagram, pick, max_len: int, max_count: int) -> RunSet:
    fin = d.final_configuration
    runs: list = []
    truncated = False
    stack = [(d.initial_configuration, ())]
    while stack:
        c, w = stack.pop()
        if c == fin:
            runs.append(w)
            if len(runs) >= max_count:
                return RunSet(runs, True)
            continue
        nodes = pick(c)
        if nodes and len(w) >= max_len:
            truncated = True
            continue
        for n in sorted(nodes, key=d.node_index.__getitem__, reverse=True):
            for a in reversed(d.out[n]):
                loc = Location(n, a)
                stack.append((step(d, c, loc), w + (loc,)))
    return RunSet(runs, truncated)


def enumerate_runs(d: Diagram, s: PriorityScheduler, max_len: int | None = None, max_count: int = 100_000) -> RunSet:
    """Successful runs compatible with ``s``, up to ``max_len`` locations."""
    max_len = default_max_len(d) if max_len is None else max_len

    def pick(c):
        n = s.choose(d, c)
        return [] if n is None else [n]

    return _successful_runs(d, pick, max_len, max_count)


def all_runs(d: Diagram, max_len: int | None = None, max_count: int = 100_000) -> RunSet:
    """Every successful run (all interleavings), up to ``max_len`` locations."""
    max_len = default_max_len(d) if max_len is None else max_len
    return _successful_runs(d, lambda c: enabled(d, c), max_len, max_count)


# -- value-level fixed points ----------------------------------------------


def scheduled_graph(d: Diagram, s: PriorityScheduler, max_configs: int = 1_000_000):
    """Configurations reachable under ``s`` and their labelled edges."""
    root = d.initial_configuration
    seen = {root: 0}
    order = [root]
    edges = []
    todo = deque([root])
    while todo:
        c = todo.popleft()
        n = s.choose(d, c)
        if n is None:
            continue
        for a in d.out[n]:
            loc = Location(n, a)
            c2 = step(d, c, loc)
            if c2 not in seen:
                if len(order) >= max_configs:
                    raise LimitExceeded(f"more than {max_configs} scheduled configurations")
                seen[c2] = len(order)
                order.append(c2)
                todo.append(c2)
            edges.append((c, loc, c2))
    return order, edges


def _gauss_jordan(a: list[list[Fraction]], b: list[Fraction]) -> list[Fraction]:
    n = len(a)
    m = [row[:] + [b[i]] for i, row in enumerate(a)]
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col] != 0), None)
        if piv is None:
            raise Diverged("singular system in expected-cost oracle")
        m[col], m[piv] = m[piv], m[col]
        inv = 1 / m[col][col]
        m[col] = [x * inv for x in m[col]]
        for r in range(n):
            if r != col and m[r][col] != 0:
                f = m[r][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[r][n] for r in range(n)]


def _expected_cost(d: Diagram, configs, edges, label) -> Cost:
    fin = d.final_configuration
    root = d.initial_configuration
    if fin not in configs:
        return Cost(Fraction(0), Fraction(0))
    live_edges = [(u, label(l), v) for u, l, v in edges if label(l).p > 0]
    pred: dict = {}
    for u, _, v in live_edges:
        pred.setdefault(v, []).append(u)
    good = {fin}
    todo = [fin]
    while todo:
        v = todo.pop()
        for u in pred.get(v, ()):
            if u not in good:
                good.add(u)
                todo.append(u)
    if root not in good:
        return Cost(Fraction(0), Fraction(0))
    idx = {c: i for i, c in enumerate(c for c in configs if c in good)}
    n = len(idx)
    # forward flow: x = e_root + Q^T x, then w = Q^T w + (costs carried by x)
    a = [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for u, t, v in live_edges:
        if u in idx and v in idx:
            a[idx[v]][idx[u]] -= t.p
    x = _gauss_jordan(a, [Fraction(int(c == root)) for c in idx])
    rhs = [Fraction(0)] * n
    for u, t, v in live_edges:
        if u in idx and v in idx:
            rhs[idx[v]] += t.p * t.c * x[idx[u]]
    w = _gauss_jordan(a, rhs)
    mass = x[idx[fin]]
    return Cost(mass, w[idx[fin]] / mass)


def _bellman(d: Diagram, fw: WorstTime, configs, edges, label):
    k = len(d.processes)
    bottom = tuple(-INF for _ in range(k))
    val = {c: bottom for c in configs}
    root = d.initial_configuration
    val[root] = fw.iota
    settle = len(configs) * k + 1
    rounds = 0
    while True:
        rounds += 1
        new = {c: (fw.iota if c == root else bottom) for c in configs}
        for u, l, v in edges:
            img = fw.apply(label(l), val[u])
            new[v] = tuple(max(x, y) for x, y in zip(new[v], img))
        if new == val:
            return val.get(d.final_configuration, bottom)
        if rounds > settle:
            new = {c: tuple(INF if x != y else x for x, y in zip(new[c], val[c])) for c in configs}
        val = new


def _kleene(d: Diagram, fw: Framework, configs, edges, label, budget: int):
    root = d.initial_configuration
    val = {c: fw.value_bottom() for c in configs}
    val[root] = fw.iota
    out: dict = {}
    for u, l, v in edges:
        out.setdefault(u, []).append((l, v))
    todo = deque([root])
    queued = {root}
    steps = 0
    while todo:
        steps += 1
        if steps > budget:
            raise Diverged(f"{fw.name}: oracle iteration budget {budget} exhausted")
        u = todo.popleft()
        queued.discard(u)
        for l, v in out.get(u, ()):
            new = fw.join_values(val[v], fw.apply(label(l), val[u]))
            if new != val[v]:
                val[v] = new
                if v not in queued:
                    queued.add(v)
                    todo.append(v)
    return val.get(d.final_configuration, fw.value_bottom())


def brute_mop(
    d: Diagram,
    fw: Framework,
    s: PriorityScheduler | None = None,
    *,
    overrides: dict | None = None,
    budget: int = 1_000_000,
    max_configs: int = 1_000_000,
):
    """Join over ``s``-compatible successful runs of ``[[w]](iota)``.

    ``overrides`` supplies transformers for locations the framework does not
    know (fresh outcomes introduced by reductions).
    """
    s = PriorityScheduler.by_index(d) if s is None else s
    configs, edges = scheduled_graph(d, s, max_configs)
    overrides = overrides or {}
    cache: dict = {}

    def label(loc):
        if loc not in cache:
            cache[loc] = overrides[loc] if loc in overrides else fw.base(loc)
        return cache[loc]

    if isinstance(fw, ExpectedCost):
        return _expected_cost(d, configs, edges, label)
    if isinstance(fw, WorstTime):
        return _bellman(d, fw, configs, edges, label)
    return _kleene(d, fw, configs, edges, label, budget)


def best_time(d: Diagram, max_len: int | None = None, max_count: int = 100_000):
    """Minimum over enumerated successful runs of the completion time (oracle only)."""
    fw = WorstTime(d)
    runs = all_runs(d, max_len, max_count)
    best = None
    for w in runs:
        v = fw.iota
        for loc in w:
            v = fw.apply(fw.base(loc), v)
        m = max(v)
        best = m if best is None else min(best, m)
    return best, runs.truncated


# -- run languages ---------------------------------------------------------


@dataclass(frozen=True)
class RunLanguageQuery:
    """``kind`` is E1..E4, L (generation twice without kill) or star.

    ``star`` is the trace-order condition on a pair of positions.
    """

    kind: str
    gen: frozenset = frozenset()
    kill: frozenset = frozenset()
    loc: Location | None = None
    loc2: Location | None = None

    @staticmethod
    def for_spec(spec: GenKillSpec, star: bool = False) -> "RunLanguageQuery":
        kind = {
            "may-forward": "E1",
            "must-forward": "E2",
            "may-backward": "E3",
            "must-backward": "E4",
            "anti-pattern": "star" if star else "L",
        }[spec.variant]
        loc2 = spec.loc2 or (spec.loc if spec.variant == "anti-pattern" else None)
        return RunLanguageQuery(kind, spec.gen, spec.kill, spec.loc, loc2)


class _Alphabet:
    def __init__(self, d: Diagram, runs: Iterable[Sequence[Location]]):
        locs = list(d.locations)
        for w in runs:
            locs.extend(l for l in w if l not in locs)
        self.code = {l: chr(0x100 + i) for i, l in enumerate(dict.fromkeys(locs))}

    def word(self, w) -> str:
        return "".join(self.code[l] for l in w)

    def cls(self, locs, negate: bool = False) -> str:
        chars = "".join(re.escape(self.code[l]) for l in locs if l in self.code)
        if negate:
            return f"[^{chars}]" if chars else "."
        return f"[{chars}]" if chars else "(?!)"


def query_regex(d: Diagram, q: RunLanguageQuery, alphabet: _Alphabet | None = None) -> re.Pattern:
    a = alphabet or _Alphabet(d, [])
    g, k = set(q.gen), set(q.kill)
    l = a.cls([q.loc]) if q.loc else "(?!)"
    not_k = a.cls(k, negate=True)
    not_gk = a.cls(g | k, negate=True)
    k_not_g = a.cls(k - g)
    if q.kind == "E1":
        rx = f".*{a.cls(g)}{not_k}*{l}.*"
    elif q.kind == "E2":
        rx = f"(?:{not_gk}*{l}.*|.*{k_not_g}{not_gk}*{l}.*)"
    elif q.kind == "E3":
        rx = f".*{l}{not_k}*{a.cls(g)}.*"
    elif q.kind == "E4":
        rx = f"(?:.*{l}{not_gk}*|.*{l}{not_gk}*{k_not_g}.*)"
    elif q.kind == "L":
        rx = f".*{l}{not_k}*{a.cls([q.loc2])}.*"
    else:
        raise ValueError(f"no regular expression for {q.kind}")
    return re.compile(rx, re.DOTALL)


def trace_order(d: Diagram, w: Sequence[Location]) -> list[set[int]]:
    """``below[j]`` = positions ``i`` with ``i`` before-or-equal ``j`` in the trace order."""
    below: list[set[int]] = []
    for j, lj in enumerate(w):
        acc = {j}
        dj = d.dom[lj.node]
        for i in range(j):
            if i not in acc and d.dom[w[i].node] & dj:
                acc |= below[i]
        below.append(acc)
    return below


def star_holds(d: Diagram, w: Sequence[Location], l1: Location, l2: Location, kill, *, endpoints: bool = False):
    """Positions i != j with w_i=l1, w_j=l2, not j <= i, and no kill between them.

    With ``endpoints`` the positions i and j themselves count as between
    (when i <= j), literally following the closed interval definition.
    """
    below = trace_order(d, w)
    kill = set(kill)
    for i, li in enumerate(w):
        if li != l1:
            continue
        for j, lj in enumerate(w):
            if lj != l2 or i == j or j in below[i]:
                continue
            if i in below[j]:
                between = {k for k in below[j] if i in below[k]}
                if not endpoints:
                    between -= {i, j}
            else:
                between = set()
            if not any(w[k] in kill for k in between):
                return (i, j)
    return None


@dataclass
class RegexVerdict:
    holds: bool
    witness: tuple[Location, ...] | None
    complete: bool
    runs: int


def regex_holds(
    d: Diagram,
    q: RunLanguageQuery,
    s: PriorityScheduler | None = None,
    max_len: int | None = None,
    max_count: int = 100_000,
    *,
    runs: RunSet | None = None,
) -> RegexVerdict:
    """Does some enumerated successful run belong to the query language?

    Without a scheduler all interleavings are enumerated, which is what the
    language characterisations quantify over.
    """
    if runs is None:
        runs = all_runs(d, max_len, max_count) if s is None else enumerate_runs(d, s, max_len, max_count)
    if q.kind == "star":
        for w in runs:
            if star_holds(d, w, q.loc, q.loc2, q.kill):
                return RegexVerdict(True, w, not runs.truncated, len(runs))
        return RegexVerdict(False, None, not runs.truncated, len(runs))
    alpha = _Alphabet(d, runs)
    rx = query_regex(d, q, alpha)
    for w in runs:
        if rx.fullmatch(alpha.word(w)):
            return RegexVerdict(True, w, not runs.truncated, len(runs))
    return RegexVerdict(False, None, not runs.truncated, len(runs))


# -- random sound diagrams -------------------------------------------------


@dataclass
class GeneratorStats:
    attempted: int = 0
    accepted: int = 0


STATS = GeneratorStats()


class _Builder:
    def __init__(self, rng: random.Random, procs: list[str], max_nodes: int, loops: bool):
        self.rng = rng
        self.procs = procs
        self.budget = max_nodes - 2
        self.loops = loops
        self.nodes: dict[str, list[str]] = {}
        self.moves: dict = {}
        self.prob: dict = {}
        self.cost: dict = {}
        self.time: dict = {}
        self.count = 0

    def node(self, procs) -> str:
        n = f"n{self.count}"
        self.count += 1
        self.nodes[n] = [p for p in self.procs if p in procs]
        return n

    def outcome(self, n: str, targets: dict[str, str]) -> None:
        a = "abcdefgh"[sum(1 for (m, _) in self.moves if m == n)]
        self.moves[(n, a)] = targets
        loc = Location(n, a)
        self.cost[loc] = Fraction(self.rng.randint(0, 3))
        self.time[loc] = {p: Fraction(self.rng.randint(0, 2)) for p in self.nodes[n]}

    def block(self, procs: list[str], entry: str, exit_: str, depth: int = 0) -> None:
        """Give ``entry`` outcomes so that every process in ``procs`` ends at ``exit_``."""
        r = self.rng
        kinds = ["atom"]
        if self.budget >= 1:
            kinds += ["seq", "choice"]
            if len(procs) > 1 and self.budget >= 2:
                kinds += ["par", "par"]
            if self.loops and self.budget >= 2:
                kinds.append("loop")
        kind = r.choice(kinds) if depth < 6 else "atom"
        if kind == "atom":
            for _ in range(r.choice([1, 1, 2])):
                self.outcome(entry, {p: exit_ for p in procs})
        elif kind == "seq":
            self.budget -= 1
            mid = self.node(procs)
            self.outcome(entry, {p: mid for p in procs})
            self.block(procs, mid, exit_, depth + 1)
        elif kind == "choice":
            k = min(self.budget, r.randint(2, 3))
            self.budget -= k
            for _ in range(k):
                m = self.node(procs)
                self.outcome(entry, {p: m for p in procs})
            for m in list(self.nodes)[-k:]:
                self.block(procs, m, exit_, depth + 1)
        elif kind == "par":
            shuffled = procs[:]
            r.shuffle(shuffled)
            cut = r.randint(1, len(procs) - 1)
            parts = [sorted(shuffled[:cut], key=self.procs.index), sorted(shuffled[cut:], key=self.procs.index)]
            self.budget -= 2
            heads = [self.node(part) for part in parts]
            self.outcome(entry, {p: h for part, h in zip(parts, heads) for p in part})
            for part, h in zip(parts, heads):
                self.block(part, h, exit_, depth + 1)
        else:  # loop: entry -> body ... -> latch, latch -again-> body | -done-> exit
            self.budget -= 2
            body = self.node(procs)
            latch = self.node(procs)
            self.outcome(entry, {p: body for p in procs})
            self.block(procs, body, latch, depth + 1)
            self.outcome(latch, {p: body for p in procs})
            self.outcome(latch, {p: exit_ for p in procs})

    def probabilities(self) -> None:
        by_node: dict = {}
        for (n, a) in self.moves:
            by_node.setdefault(n, []).append(a)
        for n, outs in by_node.items():
            weights = [self.rng.randint(1, 3) for _ in outs]
            total = sum(weights)
            for a, wgt in zip(outs, weights):
                self.prob[Location(n, a)] = Fraction(wgt, total)


def _combinator_diagram(rng: random.Random, procs: list[str], max_nodes: int, loops: bool, name: str) -> Diagram:
    b = _Builder(rng, procs, max_nodes, loops)
    init = b.node(procs)
    fin_id = "fin"
    b.nodes[fin_id] = list(procs)
    b.block(list(procs), init, fin_id)
    nodes = {n: v for n, v in b.nodes.items() if n != fin_id}
    nodes[f"n{b.count}"] = list(procs)
    fin = f"n{b.count}"
    moves = {k: {p: (fin if t == fin_id else t) for p, t in v.items()} for k, v in b.moves.items()}
    b.probabilities()
    return Diagram.build(name, procs, nodes, init, fin, moves, prob=b.prob, cost=b.cost, time=b.time)


def _random_diagram(rng: random.Random, procs: list[str], max_nodes: int, name: str) -> Diagram:
    k = rng.randint(1, max(1, max_nodes - 2))
    inner = [f"n{i}" for i in range(1, k + 1)]
    fin = f"n{k + 1}"
    nodes = {"n0": list(procs)}
    for n in inner:
        nodes[n] = sorted(rng.sample(procs, rng.randint(1, len(procs))), key=procs.index)
    nodes[fin] = list(procs)
    moves = {}
    for n in ["n0"] + inner:
        for a in "ab"[: rng.choice([1, 1, 2])]:
            moves[(n, a)] = {p: rng.choice([m for m in inner + [fin] if p in nodes[m]]) for p in nodes[n]}
    cost = {Location(*key): Fraction(rng.randint(0, 3)) for key in moves}
    time = {Location(*key): {p: Fraction(rng.randint(0, 2)) for p in nodes[key[0]]} for key in moves}
    return Diagram.build(name, procs, nodes, "n0", fin, moves, cost=cost, time=time)


def generate_sound_diagram(
    seed: int,
    n_procs: int = 3,
    max_nodes: int = 12,
    *,
    method: str = "mixed",
    loops: bool = True,
    attempts: int = 200,
) -> Diagram:
    """A random sound deterministic diagram.

    ``combinators`` composes soundness-preserving building blocks;
    ``rejection`` draws unconstrained diagrams until one is sound; ``mixed``
    uses rejection for every fifth seed and falls back to combinators.
    Provenance is recorded as the ``provenance`` analysis block.
    """
    from .soundness import Status, check_soundness

    rng = random.Random(seed)
    procs = [f"p{i + 1}" for i in range(n_procs)]
    name = f"gen{seed}"
    use_rejection = method == "rejection" or (method == "mixed" and seed % 5 == 0 and max_nodes >= 3)
    if use_rejection:
        for i in range(attempts):
            STATS.attempted += 1
            d = _random_diagram(rng, procs, max_nodes, name)
            if not loops:
                from .core import local_graph

                if not local_graph(d).is_acyclic():
                    continue
            if check_soundness(d, max_configs=20_000).status is Status.SOUND:
                STATS.accepted += 1
                prov = {"seed": str(seed), "method": "rejection", "attempts": str(i + 1)}
                return validate(d.replace(analyses={"provenance": prov}))
        if method == "rejection":
            raise GenerationFailed(f"no sound diagram after {attempts} attempts (seed {seed})")
    # The final node is mandatory, so budgets below two give the init -> fin chain.
    d = _combinator_diagram(rng, procs, max(max_nodes, 2), loops, name)
    prov = {"seed": str(seed), "method": "combinators", "attempts": "1"}
    return validate(d.replace(analyses={"provenance": prov}))
