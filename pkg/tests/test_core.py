from fractions import Fraction
from itertools import permutations

import pytest
from hypothesis import given, strategies as st

from conftest import chain_diagram, edit, generated, swap_closure
from negmop.core import (
    Configuration,
    Diagram,
    Location as L,
    Order,
    domain_order,
    enabled,
    independent,
    is_deterministic,
    local_graph,
    mazurkiewicz_equivalent,
    normal_form,
    replay,
    step,
    terminal_enabled,
    validate,
)
from negmop.errors import NotEnabled, ValidationError
from negmop.io import parse
from negmop.oracle import all_runs


class TestValidate:
    def test_fig2_shape(self, fig2):
        assert len(fig2.nodes) == 9
        assert fig2.processes == ("p1", "p2", "p3")

    def test_final_with_outcome_rejected(self):
        d = Diagram.build("bad", ["p"], {"s": ["p"], "t": ["p"]}, "s", "t",
                          {("s", "go"): {"p": "t"}, ("t", "x"): {"p": "s"}})
        with pytest.raises(ValidationError) as e:
            validate(d)
        assert "BadInitFin" in e.value.kinds

    def test_probabilities_must_sum_to_one(self, fig2):
        with pytest.raises(ValidationError) as e:
            edit(fig2, "n3.a prob=1/2 cost=1 time(p2)=1 { p2 -> n7; }\n  outcome n3.b prob=1/2",
                 "n3.a prob=3/5 cost=1 time(p2)=1 { p2 -> n7; }\n  outcome n3.b prob=3/5")
        assert e.value.kinds == {"ProbSumViolation"}

    def test_missing_delta_names_the_triple(self):
        d = Diagram.build("bad", ["p", "q"], {"s": ["p", "q"], "t": ["p", "q"]}, "s", "t",
                          {("s", "go"): {"p": "t"}})
        with pytest.raises(ValidationError) as e:
            validate(d)
        assert [v.where for v in e.value.violations if v.kind == "MissingDelta"] == [("s", "go", "q")]

    def test_successor_outside_domain(self):
        d = Diagram.build("bad", ["p", "q"], {"s": ["p", "q"], "m": ["q"], "t": ["p", "q"]}, "s", "t",
                          {("s", "go"): {"p": "m", "q": "m"}, ("m", "x"): {"q": "t"}})
        with pytest.raises(ValidationError) as e:
            validate(d)
        assert ("s", "go", "p") in [v.where for v in e.value.violations if v.kind == "DomainViolation"]


class TestDeterminism:
    def test_fig1(self, fig1):
        assert is_deterministic(fig1) == (True, [])

    def test_fig4_witness(self, fig4):
        ok, wit = is_deterministic(fig4)
        assert not ok
        assert ("n0", "a", "p1") in wit

    def test_trivial_chain(self):
        assert is_deterministic(chain_diagram())[0]


class TestSemantics:
    def test_enabled_at_start(self, fig2):
        assert enabled(fig2, fig2.initial_configuration) == {"n0"}

    def test_enabled_after_first_step(self, fig2):
        assert enabled(fig2, fig2.configuration("n1", "n2", "n2")) == {"n1", "n2"}

    def test_final_node_reported_separately(self, fig2):
        c = fig2.configuration("n1", "n8", "n8")
        assert enabled(fig2, c) == {"n1"}
        assert terminal_enabled(fig2, c) == frozenset()
        assert terminal_enabled(fig2, fig2.final_configuration) == {"n8"}

    def test_step_follows_figure(self, fig1):
        c = step(fig1, fig1.initial_configuration, L("n0", "reg"))
        assert c == fig1.configuration("n1", "n2")

    def test_step_not_enabled(self, fig2):
        with pytest.raises(NotEnabled):
            step(fig2, fig2.initial_configuration, L("n2", "a"))

    def test_step_moves_only_domain(self, fig2):
        assert step(fig2, fig2.configuration("n1", "n2", "n2"), L("n2", "a")) == fig2.configuration("n1", "n3", "n4")

    def test_replay_to_final(self, fig2):
        w = [L("n0", "a"), L("n1", "a"), L("n2", "a"), L("n3", "a"), L("n4", "a"), L("n7", "a")]
        assert replay(fig2, fig2.initial_configuration, w) == fig2.final_configuration

    def test_replay_empty(self, fig2):
        assert replay(fig2, fig2.initial_configuration, []) == fig2.initial_configuration

    def test_replay_reports_index(self, fig2):
        with pytest.raises(NotEnabled) as e:
            replay(fig2, fig2.initial_configuration, [L("n1", "a")])
        assert e.value.index == 0

    def test_annotations_do_not_change_semantics(self, fig2):
        bare = fig2.replace(prob={}, cost={}, time={})
        for c in [fig2.initial_configuration, fig2.configuration("n1", "n2", "n2"), fig2.configuration("n8", "n3", "n7")]:
            assert enabled(bare, c) == enabled(fig2, c)
            for n in enabled(fig2, c):
                for a in fig2.out[n]:
                    assert step(bare, c, L(n, a)) == step(fig2, c, L(n, a))


class TestIndependence:
    def test_disjoint_departments(self, fig1):
        assert independent(fig1, L("n1", "send"), L("n2", "eval"))

    def test_self(self, fig2):
        assert not any(independent(fig2, l, l) for l in fig2.locations)

    def test_single_process_nodes(self, fig2):
        assert independent(fig2, L("n3", "a"), L("n4", "b"))

    def test_equivalent_runs(self, fig1):
        w = [L("n0", "reg"), L("n1", "send"), L("n2", "eval"), L("n3", "rec")]
        v = [L("n0", "reg"), L("n2", "eval"), L("n1", "send"), L("n3", "rec")]
        assert mazurkiewicz_equivalent(fig1, w, v)
        assert mazurkiewicz_equivalent(fig1, w, w)
        assert not mazurkiewicz_equivalent(fig1, w[:2], v[:2])


@given(st.integers(1, 60), st.data())
def test_normal_form_matches_swap_closure(seed, data):
    d = generated(seed)
    locs = list(d.locations)
    w = data.draw(st.lists(st.sampled_from(locs), max_size=6))
    closure = swap_closure(d, w)
    assert normal_form(d, w) in closure
    assert all(normal_form(d, v) == normal_form(d, w) for v in closure)
    others = {tuple(p) for p in permutations(w)} - closure
    assert not any(mazurkiewicz_equivalent(d, w, v) for v in others)


@given(st.integers(1, 60), st.data())
def test_equivalent_runs_reach_the_same_configuration(seed, data):
    d = generated(seed)
    runs = list(all_runs(d, max_len=len(d.locations) + 2, max_count=200))
    if not runs:
        return
    w = data.draw(st.sampled_from(runs))
    c0 = d.initial_configuration
    end = replay(d, c0, w)
    for v in list(swap_closure(d, w))[:50]:
        assert replay(d, c0, v) == end


def test_step_is_a_function_on_deterministic_diagrams(fig2):
    c = fig2.configuration("n1", "n3", "n4")
    for n in enabled(fig2, c):
        for a in fig2.out[n]:
            nxt = step(fig2, c, L(n, a))
            assert all(len(nxt[p]) == 1 for p in nxt)


class TestLocalGraph:
    def test_fig2_edges_and_loop(self, fig2):
        g = local_graph(fig2)
        assert g.has_edge("n3", "p2", "b", "n5")
        assert ["n3", "n5"] in [sorted(c) for c in g.circuits()]

    def test_fig1_has_a_loop(self, fig1):
        assert not local_graph(fig1).is_acyclic()

    def test_fig2_all_reachable(self, fig2):
        assert local_graph(fig2).reachable() == set(fig2.nodes)


class TestDomainOrder:
    def test_less(self, fig2):
        assert domain_order(fig2, "n3", "n2") is Order.LESS
        assert domain_order(fig2, "n2", "n3") is Order.GREATER

    def test_equal(self, fig2):
        assert all(domain_order(fig2, n, n) is Order.EQUAL for n in fig2.nodes)

    def test_incomparable(self, fig2):
        assert domain_order(fig2, "n1", "n3") is Order.INCOMPARABLE


def test_configuration_is_a_value():
    a = Configuration({"p": "x", "q": {"y"}})
    b = Configuration({"q": "y", "p": "x"})
    assert a == b and hash(a) == hash(b)
    assert a.restrict(["p"]).scope == {"p"}
    assert a.node("q") == "y"


def test_rational_annotations_survive(fig2):
    assert fig2.probability(L("n3", "a")) == Fraction(1, 2)
    assert fig2.cost_of(L("n0", "a")) == 1
