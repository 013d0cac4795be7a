import pytest
from hypothesis import given, strategies as st

from conftest import chain_diagram, fig2_deadlock, fig2_livelock, generated, is_acyclic
from negmop.core import Diagram, enabled, local_graph, replay
from negmop.errors import LimitExceeded
from negmop.soundness import (
    Status,
    check_domination,
    check_soundness,
    deadlocks,
    default_max_configs,
    reachability_graph,
    reachable_nodes,
)


class TestReachability:
    def test_fig1_size(self, fig1):
        g = reachability_graph(fig1, 10_000)
        assert len(g) == 10 and not g.truncated

    def test_fig2_complete(self, fig2):
        g = reachability_graph(fig2, 10_000)
        assert not g.truncated
        assert fig2.final_configuration in g

    def test_fig2_truncated(self, fig2):
        assert reachability_graph(fig2, 2).truncated

    def test_edges_follow_step(self, fig2):
        g = reachability_graph(fig2)
        for c, loc, c2 in g.edges:
            assert replay(fig2, c, [loc]) == c2

    def test_env_cap(self, monkeypatch):
        monkeypatch.setenv("NEGOT_MAX_CONFIGS", "7")
        assert default_max_configs() == 7


class TestSoundness:
    def test_fixtures_sound(self, fig1, fig2):
        assert check_soundness(fig1).status is Status.SOUND
        assert check_soundness(fig2).status is Status.SOUND

    def test_livelock_variant(self):
        d = fig2_livelock()
        v = check_soundness(d)
        assert v.status is Status.UNSOUND
        # Every prefix is doomed here, so the shortest witness is the empty run.
        assert replay(d, d.initial_configuration, v.witness) == v.stuck_at
        assert deadlocks(d) == set()

    def test_deadlock_variant(self):
        d = fig2_deadlock()
        assert check_soundness(d).status is Status.UNSOUND
        dl = deadlocks(d)
        assert dl and all(not enabled(d, c) for c in dl)

    def test_witness_cannot_complete(self):
        d = fig2_deadlock()
        v = check_soundness(d)
        g = reachability_graph(d)
        assert v.stuck_at not in g.coreachable([d.final_configuration])

    def test_cap_is_a_status(self, fig2):
        v = check_soundness(fig2, max_configs=3)
        assert v.status is Status.LIMIT_EXCEEDED and v.limit == 3

    def test_deadlocks_raise_on_cap(self, fig2):
        with pytest.raises(LimitExceeded):
            deadlocks(fig2, max_configs=3)

    def test_no_deadlocks_in_sound_fixtures(self, fig2):
        assert deadlocks(fig2) == set()
        assert deadlocks(chain_diagram()) == set()


class TestDomination:
    def test_fig2(self, fig2):
        v = check_domination(fig2)
        assert v.holds
        assert "n3" in v.dominant[next(k for k in v.dominant if set(k) == {"n3", "n5"})]

    def test_fig1(self, fig1):
        v = check_domination(fig1)
        assert v.holds and v.circuits_checked == 1

    def test_acyclic_vacuous(self):
        v = check_domination(chain_diagram())
        assert v.holds and v.circuits_checked == 0


@given(st.integers(1, 100))
def test_graph_reachable_nodes_are_realizable(seed):
    d = generated(seed)
    assert reachable_nodes(d) | {d.fin} >= local_graph(d).reachable()


@given(st.integers(1, 100))
def test_acyclic_soundness_is_deadlock_freedom(seed):
    d = generated(seed)
    if not is_acyclic(d):
        return
    assert check_soundness(d).sound == (not deadlocks(d))


def test_acyclic_unsound_has_deadlock():
    d = Diagram.build("stuck", ["p", "q"], {"s": ["p", "q"], "a": ["p"], "m": ["p", "q"], "t": ["p", "q"]}, "s", "t",
                      {("s", "go"): {"p": "a", "q": "t"}, ("a", "x"): {"p": "m"}, ("m", "y"): {"p": "t", "q": "t"}})
    assert is_acyclic(d)
    assert not check_soundness(d).sound
    assert deadlocks(d) == {d.configuration("m", "t")}


@given(st.integers(1, 100))
def test_generated_diagrams_have_dominant_nodes(seed):
    assert check_domination(generated(seed)).holds
