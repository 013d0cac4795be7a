import random
import re
from collections import Counter
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from conftest import generated, is_acyclic
from negmop.core import Location as L, normal_form, replay
from negmop.engine import compute_mop
from negmop.frameworks import Cost, ExpectedCost, GenKill, GenKillSpec, Identity, WorstTime
from negmop.oracle import (
    STATS,
    PriorityScheduler,
    RunLanguageQuery,
    all_runs,
    best_time,
    brute_mop,
    enumerate_runs,
    generate_sound_diagram,
    regex_holds,
    star_holds,
)
from negmop.soundness import check_domination, check_soundness

VARIANTS = ["may-forward", "must-forward", "may-backward", "must-backward", "anti-pattern"]


def words(runs):
    return [" ".join(l.outcome for l in w) for w in runs]


class TestEnumeration:
    def test_fig1_priority_runs(self, fig1):
        s = PriorityScheduler(("n1", "n3"))
        runs = enumerate_runs(fig1, s, max_len=12)
        pattern = re.compile(r"reg send (tout|rec) eval (npr|pr (done nOK )*done OK)")
        assert len(runs) == 8 and runs.truncated
        assert all(pattern.fullmatch(w) for w in words(runs))

    def test_runs_are_successful(self, fig2):
        for w in all_runs(fig2, max_len=10):
            assert replay(fig2, fig2.initial_configuration, w) == fig2.final_configuration

    def test_single_outcome_variant_has_one_run(self, fig2):
        d = fig2.replace(out={n: tuple(a for a in outs if a == "a") for n, outs in fig2.out.items()})
        for s in (PriorityScheduler.by_index(d), PriorityScheduler.by_index(d, True), PriorityScheduler.shuffled(d, 5)):
            assert len(enumerate_runs(d, s)) == 1

    def test_zero_length(self, fig2):
        runs = enumerate_runs(fig2, PriorityScheduler.by_index(fig2), max_len=0)
        assert len(runs) == 0 and runs.truncated

    def test_count_cap(self, fig2):
        runs = all_runs(fig2, max_len=30, max_count=5)
        assert len(runs) == 5 and runs.truncated

    def test_scheduler_picks_first_listed(self, fig2):
        c = fig2.configuration("n1", "n2", "n2")
        assert PriorityScheduler(("n2",)).choose(fig2, c) == "n2"
        assert PriorityScheduler().choose(fig2, c) == "n1"
        assert PriorityScheduler().choose(fig2, fig2.final_configuration) is None


class TestBruteMop:
    @pytest.mark.parametrize("s", [None, ("n2", "n1"), ("n7", "n4", "n3")])
    def test_fig2_expected_cost(self, fig2, s):
        sched = None if s is None else PriorityScheduler(s)
        assert brute_mop(fig2, ExpectedCost(fig2), sched) == Cost(Fraction(1), Fraction(18))

    def test_identity(self, fig2):
        assert brute_mop(fig2, Identity(fig2)) is True

    def test_genkill(self, fig2):
        fw = GenKill(fig2, GenKillSpec.from_block(fig2.analyses["retry-after-b"]))
        assert fw.holds(brute_mop(fig2, fw))

    def test_best_time_is_below_worst(self, fig2):
        best, truncated = best_time(fig2, max_len=8)
        assert truncated and best is not None
        assert best <= max(compute_mop(fig2, WorstTime(fig2)).value)


class TestRegex:
    def test_e1_without_generators(self, fig1):
        assert not regex_holds(fig1, RunLanguageQuery("E1", loc=L("n4", "pr")), max_len=12).holds

    def test_e3_done_then_ok(self, fig1):
        q = RunLanguageQuery("E3", gen=frozenset({L("n6", "OK")}), loc=L("n4", "pr"))
        v = regex_holds(fig1, q, max_len=12)
        assert v.holds and L("n6", "OK") in v.witness

    def test_e1_retry(self, fig2):
        q = RunLanguageQuery.for_spec(GenKillSpec.from_block(fig2.analyses["retry-after-b"]))
        assert regex_holds(fig2, q, max_len=12).holds

    def test_double_processing(self, fig1):
        spec = GenKillSpec.from_block(fig1.analyses["double-processing"])
        assert regex_holds(fig1, RunLanguageQuery.for_spec(spec), max_len=12).holds
        assert regex_holds(fig1, RunLanguageQuery.for_spec(spec, star=True), max_len=12).holds

    def test_star_on_concurrent_pair(self, fig1):
        w = [L("n0", "reg"), L("n2", "eval"), L("n1", "send")]
        # positions are unordered in the trace, so either order counts
        assert star_holds(fig1, w, L("n1", "send"), L("n2", "eval"), frozenset())

    def test_complete_flag(self, fig2):
        v = regex_holds(fig2, RunLanguageQuery("E1"), max_len=40, max_count=10)
        assert not v.complete


class TestGenerator:
    def test_sound_and_deterministic(self):
        d = generate_sound_diagram(1)
        assert check_soundness(d).sound
        assert d.analyses["provenance"]["seed"] == "1"

    def test_reproducible(self):
        assert generate_sound_diagram(9) == generate_sound_diagram(9)

    def test_smallest_budget_is_a_chain(self):
        d = generate_sound_diagram(7, n_procs=1, max_nodes=1)
        assert len(d.nodes) == 2 and d.out[d.init] == ("a",)
        assert check_soundness(d).sound

    def test_rejection_statistics(self):
        before = STATS.accepted, STATS.attempted
        d = generate_sound_diagram(3, n_procs=2, max_nodes=6, method="rejection")
        assert d.analyses["provenance"]["method"] == "rejection"
        assert STATS.accepted == before[0] + 1 and STATS.attempted > before[1]

    def test_acyclic_request(self):
        for seed in range(1, 11):
            assert is_acyclic(generate_sound_diagram(seed, loops=False))

    @given(st.integers(1, 100))
    def test_corpus_is_sound(self, seed):
        assert check_soundness(generated(seed)).sound


@given(st.integers(1, 100), st.integers(0, 1000))
def test_each_trace_has_exactly_one_scheduled_run(seed, salt):
    d = generated(seed)
    if not is_acyclic(d):
        return
    runs = all_runs(d, max_count=3000)
    if runs.truncated:
        return
    s = PriorityScheduler.shuffled(d, salt)
    chosen = Counter(normal_form(d, w) for w in enumerate_runs(d, s))
    assert {normal_form(d, w) for w in runs} == set(chosen)
    assert set(chosen.values()) <= {1}


def test_fig4_trace_without_scheduled_run(fig4):
    s = PriorityScheduler(("n1",))
    scheduled = {normal_form(fig4, w) for w in enumerate_runs(fig4, s, max_len=6)}
    trace = (L("n0", "a"), L("n2", "a"))
    assert trace in set(all_runs(fig4, max_len=6))
    assert normal_form(fig4, trace) not in scheduled


@pytest.mark.parametrize("seed", range(1, 101, 9))
def test_engine_matches_oracle(seed):
    d = generated(seed)
    for fw in (ExpectedCost(d), WorstTime(d)):
        assert compute_mop(d, fw).value == brute_mop(d, fw)


@given(st.integers(1, 100), st.integers(0, 10**6))
def test_genkill_matches_run_languages(seed, salt):
    d = generated(seed)
    rng = random.Random(salt)
    acyclic = is_acyclic(d)
    runs = all_runs(d, max_len=None if acyclic else len(d.locations) + 4, max_count=100_000 if acyclic else 2000)
    locs = list(d.locations)
    variant = rng.choice(VARIANTS)
    spec = GenKillSpec.make(variant, rng.sample(locs, min(2, len(locs))), rng.sample(locs, rng.randint(0, 1)),
                            rng.choice(locs), rng.choice(locs))
    fw = GenKill(d, spec)
    engine = fw.detected(compute_mop(d, fw).value)
    oracle = regex_holds(d, RunLanguageQuery.for_spec(spec, star=variant == "anti-pattern"), runs=runs)
    if acyclic and oracle.complete:
        assert engine == oracle.holds
    elif oracle.holds:
        assert engine


@given(st.integers(1, 100))
def test_domination_on_corpus(seed):
    assert check_domination(generated(seed)).holds
