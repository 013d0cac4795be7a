from __future__ import annotations

import functools

import pytest
from hypothesis import HealthCheck, settings

from negmop.core import local_graph
from negmop.fixtures import load_fixture
from negmop.io import parse, render
from negmop.oracle import generate_sound_diagram

settings.register_profile(
    "negmop",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("negmop")


@pytest.fixture(scope="session")
def fig1():
    return load_fixture("fig1")


@pytest.fixture(scope="session")
def fig2():
    return load_fixture("fig2")


@pytest.fixture(scope="session")
def fig4():
    return load_fixture("fig4")


def edit(d, old: str, new: str):
    """Reparse ``d`` after a textual substitution on its canonical source."""
    src = render(d)
    assert old in src, old
    return parse(src.replace(old, new))


def fig1_acyclic():
    d = load_fixture("fig1")
    src = "\n".join(line for line in render(d).splitlines() if "n6.nOK" not in line)
    return parse(src.replace("outcome n6.OK prob=1/2", "outcome n6.OK prob=1"))


def fig2_livelock():
    """p3 is sent from n4 to n6 on outcome a and can never reach n7."""
    return edit(load_fixture("fig2"), "outcome n4.a prob=1/2 cost=1 time(p3)=1 { p3 -> n7; }",
                "outcome n4.a prob=1/2 cost=1 time(p3)=1 { p3 -> n6; }")


def fig2_deadlock():
    """p2 returns to n2 on (n3,a) while p3 waits at n7."""
    return edit(load_fixture("fig2"), "outcome n3.a prob=1/2 cost=1 time(p2)=1 { p2 -> n7; }",
                "outcome n3.a prob=1/2 cost=1 time(p2)=1 { p2 -> n2; }")


@functools.lru_cache(maxsize=None)
def generated(seed: int):
    return generate_sound_diagram(seed, n_procs=1 + seed % 4, max_nodes=12)


def corpus(seeds=range(1, 101)):
    return [generated(s) for s in seeds]


def is_acyclic(d) -> bool:
    return local_graph(d).is_acyclic()


def chain_diagram():
    """Smallest valid diagram: one process, one outcome from init to fin."""
    from negmop.core import Diagram

    return Diagram.build("chain", ["p"], {"s": ["p"], "t": ["p"]}, "s", "t", {("s", "go"): {"p": "t"}})


def swap_closure(d, w, limit: int | None = None):
    """Every run obtained from ``w`` by commuting adjacent independent locations."""
    from negmop.core import independent

    seen = {tuple(w)}
    todo = [tuple(w)]
    while todo:
        u = todo.pop()
        for i in range(len(u) - 1):
            if independent(d, u[i], u[i + 1]):
                v = u[:i] + (u[i + 1], u[i]) + u[i + 2:]
                if v not in seen:
                    seen.add(v)
                    todo.append(v)
                    if limit is not None and len(seen) > limit:
                        return None
    return seen


ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
