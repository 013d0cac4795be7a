"""Timing of the reduction engine against brute force on chained diagrams."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

from .core import Diagram, Location
from .engine import compute_mop
from .errors import LimitExceeded
from .frameworks import ExpectedCost
from .oracle import brute_mop


def chain_copies(d: Diagram, k: int) -> Diagram:
    """Sequential composition of ``k`` renamed copies of ``d``.

    Copy ``i``'s final node and copy ``i+1``'s initial node become one
    junction node ``j{i+1}``.
    """
    if k < 1:
        raise ValueError("k must be at least 1")

    def name(n, i):
        if n == d.init and i > 0:
            return f"j{i}"
        if n == d.fin and i < k - 1:
            return f"j{i + 1}"
        return f"{n}_{i}"

    nodes, dom, out, delta = {}, {}, {}, {}
    prob, cost, time_ = {}, {}, {}
    for i in range(k):
        for n in d.nodes:
            m = name(n, i)
            nodes.setdefault(m, None)
            dom[m] = d.dom[n]
            if d.out[n] or m not in out:
                out[m] = d.out[n]
        for (n, a, p), ts in d.delta.items():
            delta[(name(n, i), a, p)] = frozenset(name(t, i) for t in ts)
        for l in d.locations:
            l2 = Location(name(l.node, i), l.outcome)
            for src, dst in ((d.prob, prob), (d.cost, cost), (d.time, time_)):
                if l in src:
                    dst[l2] = src[l]
    return Diagram(
        name=f"{d.name}x{k}",
        processes=d.processes,
        nodes=tuple(nodes),
        dom=dom,
        out=out,
        delta=delta,
        init=name(d.init, 0),
        fin=name(d.fin, k - 1),
        prob=prob,
        cost=cost,
        time=time_,
    )


@dataclass
class Timing:
    k: int
    size: int  # nodes + locations
    engine_s: float
    oracle_s: float | None  # None when capped
    agree: bool | None


def _best_of(fn, repeat: int) -> tuple[float, object]:
    best, out = math.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def measure(d: Diagram, ks, *, repeat: int = 3, oracle_cap_s: float = 60.0, oracle_max_configs: int = 200_000) -> list[Timing]:
    """Min-of-``repeat`` engine timings for each chain length; brute force once."""
    rows = []
    oracle_capped = False
    for k in ks:
        dk = chain_copies(d, k)
        fw = ExpectedCost(dk)
        te, res = _best_of(lambda: compute_mop(dk, fw), repeat)
        to, agree = None, None
        if not oracle_capped:
            t0 = time.perf_counter()
            try:
                val = brute_mop(dk, fw, max_configs=oracle_max_configs)
                to = time.perf_counter() - t0
                agree = val == res.value
            except LimitExceeded:
                oracle_capped = True
            if to is not None and to > oracle_cap_s:
                oracle_capped = True
        rows.append(Timing(k, len(dk.nodes) + len(dk.locations), te, to, agree))
    return rows


def loglog_slope(xs, ys) -> float:
    """Least-squares slope of log(y) against log(x)."""
    lx = [math.log(x) for x in xs]
    ly = [math.log(y) for y in ys]
    mx, my = sum(lx) / len(lx), sum(ly) / len(ly)
    num = sum((a - mx) * (b - my) for a, b in zip(lx, ly))
    den = sum((a - mx) ** 2 for a in lx)
    return num / den
