from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import fig2_deadlock, fig2_livelock, generated
from negmop.core import Location as L, local_graph
from negmop.decompose import Shape
from negmop.engine import (
    ReducedState,
    compute_mop,
    initial_state,
    is_reduced_node,
    one_trace_mop,
    prune,
    red_location,
    red_node,
    replication_mop,
)
from negmop.errors import AlreadyReduced, NotDeterministic, NotSoundEvidence, PreconditionViolated
from negmop.frameworks import Cost, ExpectedCost, GenKill, GenKillSpec, Identity, WorstTime
from negmop.oracle import brute_mop


def c(p, q):
    return Cost(Fraction(p), Fraction(q))


@pytest.fixture(scope="module")
def fig2_run(fig2):
    return compute_mop(fig2, ExpectedCost(fig2), with_subnegotiations=True, snapshots=True)


class TestWorkedExample:
    def test_result(self, fig2_run):
        assert fig2_run.value == c(1, 18)
        assert fig2_run.transformer == c(1, 18)

    @pytest.mark.parametrize("pivot,value", [
        ("n3", (1, 3)), ("n4", (1, 3)), ("n5", (1, 4)), ("n6", (1, 4)),
        (L("n2", "a"), (1, 7)), ("n7", (1, 9)), ("n2", (1, 16)), (L("n0", "a"), (1, 18)),
    ])
    def test_intermediate_values(self, fig2_run, pivot, value):
        assert fig2_run.trace.transformer_of(pivot) == c(*value)

    def test_reverse_order_agrees(self, fig2):
        fw = ExpectedCost(fig2)
        assert compute_mop(fig2, fw, reverse=True).value == compute_mop(fig2, fw).value

    def test_stage_order(self, fig2_run):
        assert fig2_run.trace.stages == [frozenset({"p2"}), frozenset({"p3"}), frozenset({"p2", "p3"}), frozenset({"p1", "p2", "p3"})]
        assert fig2_run.trace.initially_reduced == ["n1"]

    def test_shapes(self, fig2_run):
        for s in fig2_run.trace.steps:
            if s.kind == "location":
                assert s.shape is Shape.ONE_TRACE
            else:
                # a one-node, one-outcome replication also counts as a single trace
                assert s.shape is not Shape.GENERAL

    def test_stage_one_diagram(self, fig2_run):
        d = fig2_run.trace.snapshots[next(s.snapshot for s in fig2_run.trace.steps if s.pivot == "n6")]
        assert d.out["n3"] == ("a_n3",)
        assert d.targets("n3", "a_n3", "p2") == {"n7"}

    def test_stage_two_location(self, fig2_run):
        s = next(s for s in fig2_run.trace.steps if s.pivot == L("n2", "a"))
        d = fig2_run.trace.snapshots[s.snapshot]
        assert s.fresh == L("n2", "a_n2_a")
        assert d.targets("n2", "a_n2_a", "p2") == {"n7"} and d.targets("n2", "a_n2_a", "p3") == {"n7"}
        assert d.prob[s.fresh] == 1

    def test_fresh_outcomes_keep_probability(self, fig2_run):
        s = next(s for s in fig2_run.trace.steps if s.pivot == L("n3", "b"))
        assert fig2_run.trace.snapshots[s.snapshot].prob[s.fresh] == Fraction(1, 2)


class TestReducedNodes:
    def test_initially(self, fig2):
        state = initial_state(fig2)
        assert state.nodes == {"n1"}
        assert is_reduced_node(fig2, state, "n1")
        assert not is_reduced_node(fig2, state, "n3")

    def test_after_stage_one(self, fig2_run):
        d = fig2_run.trace.snapshots[next(s.snapshot for s in fig2_run.trace.steps if s.pivot == "n6")]
        state = ReducedState(nodes={"n1", "n3", "n4", "n5", "n6"})
        assert is_reduced_node(d, state, "n3")

    def test_precondition(self, fig2):
        with pytest.raises(PreconditionViolated):
            is_reduced_node(fig2, ReducedState(), "n2")


class TestRedSteps:
    def test_location_twice(self, fig2):
        fw = ExpectedCost(fig2)
        state = initial_state(fig2)
        d, new, t, end, _ = red_location(fig2, state, L("n3", "a"), fw)
        assert t == c(Fraction(1, 2), 1)
        assert d.targets("n3", new.outcome, "p2") == {"n7"}
        with pytest.raises(AlreadyReduced):
            red_location(d, state, new, fw)

    def test_node_n3(self, fig2):
        fw = ExpectedCost(fig2)
        state = initial_state(fig2)
        d = fig2
        for n in ("n3", "n5"):
            for a in list(d.out[n]):
                d, *_ = red_location(d, state, L(n, a), fw)
        t, end, members = replication_mop(d, state, "n3", fw)
        assert t == c(1, 3) and members == {"n3", "n5"}
        d, new = red_node(d, state, "n3", t, end)
        assert d.out["n3"] == (new.outcome,)
        assert "n5" not in prune(d).nodes
        with pytest.raises(AlreadyReduced):
            red_node(d, state, "n3", t, end)

    def test_one_trace_fires_nothing(self, fig2):
        fw = ExpectedCost(fig2)
        t, end, fired = one_trace_mop(fig2, initial_state(fig2), L("n3", "a"), fw)
        assert fired == [] and t == fw.base(L("n3", "a"))

    def test_single_exit_replication(self, fig2):
        fw = ExpectedCost(fig2)
        state = initial_state(fig2)
        t, end, members = replication_mop(fig2, state, "n1", fw)
        assert t == fw.base(L("n1", "a")) and members == {"n1"}


class TestFrameworks:
    def test_identity(self, fig2):
        assert compute_mop(fig2, Identity(fig2)).transformer is True

    def test_genkill_detects_retry(self, fig2):
        fw = GenKill(fig2, GenKillSpec.make("may-forward", gen=[L("n3", "b")], loc=L("n7", "a")))
        res = compute_mop(fig2, fw)
        assert fw.holds(res.value)
        assert res.value == brute_mop(fig2, fw)

    def test_worst_time(self, fig2):
        res = compute_mop(fig2, WorstTime(fig2))
        assert res.value == brute_mop(fig2, WorstTime(fig2))


class TestBadInput:
    def test_nondeterministic(self, fig4):
        with pytest.raises(NotDeterministic):
            compute_mop(fig4, Identity(fig4))

    @pytest.mark.parametrize("make", [fig2_livelock, fig2_deadlock])
    def test_unsound(self, make):
        d = make()
        with pytest.raises(NotSoundEvidence) as e:
            compute_mop(d, ExpectedCost(d))
        assert "check" in str(e.value)


def preserved(d, fw):
    res = compute_mop(d, fw, snapshots=True)
    tr = res.trace
    values = [brute_mop(snap, fw, overrides=reg) for snap, reg in zip(tr.snapshots, tr.registries)]
    return values, res


@pytest.mark.parametrize("name", ["fig1", "fig2"])
def test_every_step_preserves_the_mop(name, request):
    d = request.getfixturevalue(name)
    for fw in (ExpectedCost(d), WorstTime(d)):
        values, res = preserved(d, fw)
        assert values == [res.value] * len(values)


@given(st.integers(1, 100))
def test_every_step_preserves_the_mop_on_generated(seed):
    d = generated(seed)
    values, res = preserved(d, ExpectedCost(d))
    assert all(v == res.value for v in values)


def unreduced(d, registry) -> int:
    locs = sum(1 for loc in d.locations if loc not in registry)
    nodes = sum(1 for n in d.nodes if n != d.fin and d.out[n] != (f"a_{n}",))
    return locs + nodes


@given(st.integers(1, 100))
def test_progress_measure_strictly_decreases(seed):
    d = generated(seed)
    tr = compute_mop(d, Identity(d), snapshots=True).trace
    measures = [unreduced(s, r) for s, r in zip(tr.snapshots, tr.registries)]
    assert all(a > b for a, b in zip(measures, measures[1:]))
    assert len(tr.steps) <= len(d.locations) + len(d.nodes)


@given(st.integers(1, 100))
def test_reverse_tie_breaking_gives_the_same_transformer(seed):
    d = generated(seed)
    for fw in (ExpectedCost(d), WorstTime(d)):
        assert compute_mop(d, fw).transformer == compute_mop(d, fw, reverse=True).transformer


@given(st.integers(1, 100))
def test_pruning_keeps_reachable_part(seed):
    d = generated(seed)
    assert set(prune(d).nodes) == local_graph(d).reachable()
