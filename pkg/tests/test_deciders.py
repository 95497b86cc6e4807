import random

import pytest

from castor.deciders import (BackwardNode, DeciderLimits, Reason, Verdict,
                             applicable_bound, backward_reasoning,
                             blank_halt_feasible, cycler_check, decide,
                             default_known_bounds, escape_check,
                             halt_reachability, known_bound_cutoff,
                             load_known_bounds)
from castor.machine import (HALT, LEFT, RIGHT, Transition, TransitionTable,
                            parse_machine)
from castor.sim import Configuration, RunKind, simulate, start_config, step

CHAMPION_4 = "1RB1LB_1LA0LC_0RZ0LD_1RD0LB"
CANDIDATE_6 = "1RB1RA_1LB1LC_1RD0RE_0LE0RA_0RZ0RF_0RB0RC"
CHAMPION_3 = "1RB0RB_1RC0LC_1LA0RZ"


def _configs(table, cap):
    config = start_config()
    while config.state != HALT and config.steps < cap:
        config = step(config, table)
        yield config


class TestHaltReachability:
    def test_closed_two_state_subset(self):
        # A and B only reference each other; no halt anywhere.
        assert not halt_reachability(parse_machine("1RB0LB_1LA0RA"))

    def test_champions_reach_halt(self):
        for text in [CHAMPION_3, CHAMPION_4, CANDIDATE_6]:
            assert halt_reachability(parse_machine(text))

    def test_undefined_entry_counts_as_exit(self):
        # (B,1) is undefined, so the subset is not provably closed.
        assert halt_reachability(parse_machine("1RB0LB_1LA---"))

    def test_unreachable_halt_does_not_help(self):
        # C has the only halt transition but nothing reaches C.
        assert not halt_reachability(parse_machine("1RB0LB_1LA0RA_0RZ0RZ"))


class TestBlankHaltFeasible:
    def test_halt_writing_one_is_infeasible(self):
        assert not blank_halt_feasible(parse_machine("0RB1RZ_1LA1LZ"))

    def test_champion_halt_writes_blank(self):
        assert blank_halt_feasible(parse_machine(CHAMPION_4))

    def test_no_halt_transition_is_infeasible(self):
        assert not blank_halt_feasible(parse_machine("1RB0LB_1LA0RA"))


class TestBackwardReasoning:
    def test_depth_one_proof_when_halts_write_one(self):
        proof = backward_reasoning(parse_machine("0RB1RZ_1LA1LZ"), depth=1)
        assert proof is not None
        assert all(b.conflict is not None for b in proof.branches)

    def test_blank_halter_has_no_proof(self):
        assert backward_reasoning(parse_machine(CHAMPION_3), depth=16) is None

    def test_depth_two_contradiction(self):
        # The only halt entry writes blank, but every predecessor of the
        # pre-halt configuration must have written a one into a cell the
        # final tape shows blank.  The machine itself halts dirty at step
        # 2, so it indeed never halts on a blank tape.
        machine = parse_machine("1LB1RB_0RZ1LA")
        result = simulate(machine, 100_000)
        assert result.kind is RunKind.HALTED_DIRTY
        proof = backward_reasoning(machine, depth=2)
        assert proof is not None

    def test_proof_requires_at_least_depth_one(self):
        with pytest.raises(ValueError):
            backward_reasoning(parse_machine(CHAMPION_3), depth=0)

    def test_leaf_conflicts_replay(self):
        # Every refuted branch shows a concrete, independently checkable
        # cell conflict: the transition writes one symbol, the later
        # configuration holds another.
        proof = backward_reasoning(parse_machine("1LB1RB_0RZ1LA"), depth=4)

        def check_node(node):
            assert isinstance(node, BackwardNode)
            tape = dict(node.tape)
            for branch in node.branches:
                cell = node.head - branch.transition.move
                if branch.conflict is not None:
                    c_cell, written, present = branch.conflict
                    assert c_cell == cell
                    assert written == branch.transition.write
                    assert present == tape.get(cell, 0)
                    assert written != present
                else:
                    assert branch.child is not None
                    check_node(branch.child)

        for branch in proof.branches:
            if branch.conflict is not None:
                assert branch.transition.write != 0  # final tape is blank
            else:
                check_node(branch.child)


class TestEscapeCheck:
    def test_strictly_more_than_half(self):
        assert escape_check(Configuration(head=3, steps=4, lo=0, hi=3))
        assert not escape_check(Configuration(head=2, steps=4, lo=0, hi=2))

    def test_needs_two_steps(self):
        with pytest.raises(ValueError):
            escape_check(Configuration(head=1, steps=1, hi=1))

    def test_runaway_machine_flagged_immediately(self):
        table = parse_machine("1RA1RA")
        for config in _configs(table, 10):
            if config.steps >= 2:
                assert escape_check(config)

    def test_escape_is_heuristic_not_sound(self):
        # A machine that dashes right, returns, and halts on a blank tape
        # in 5 steps; the escape rule flags it at step 2.  Strict limits
        # exclude the rule, the default keeps it for pruning speed.
        machine = parse_machine("1RB0RZ_0RC---_0LD---_0LA---")
        result = simulate(machine, 100)
        assert result.kind is RunKind.HALTED_BLANK
        assert result.steps == 5
        default = decide(machine, DeciderLimits(max_steps=1000))
        assert default.verdict is Verdict.NON_HALTING
        assert default.reason is Reason.ESCAPE_HEURISTIC
        strict = decide(machine, DeciderLimits(max_steps=1000).strict())
        assert strict.verdict is Verdict.HALTS_BLANK
        assert strict.steps == 5


class TestCyclerCheck:
    def test_shuttle_repeats_with_period_two(self):
        table = parse_machine("0RB0RZ_0LA0RZ")
        found = cycler_check(_configs(table, 50))
        assert found is not None
        i, j = found
        assert j - i == 2

    def test_halting_run_has_no_repeat(self):
        table = parse_machine(CHAMPION_4)
        assert cycler_check(_configs(table, 100)) is None

    def test_odd_periods_are_impossible(self):
        # An exact configuration repeat needs zero net head movement, and
        # every step moves one cell, so repeat periods are always even.
        import itertools
        opts = [Transition(w, d, s) for w in (0, 1) for d in (LEFT, RIGHT)
                for s in (0, 1)]
        for entries in itertools.product(opts, repeat=4):
            table = TransitionTable(2, 2, list(entries))
            seen = {}
            config = start_config()
            for _ in range(60):
                config = step(config, table)
                key = (config.state, config.head,
                       tuple(sorted(config.tape.items())))
                if key in seen:
                    assert (config.steps - seen[key]) % 2 == 0
                    break
                seen[key] = config.steps

    def test_period_four_cycle_over_two_cells_detected(self):
        # Exhaustive scan of 2-state machines for an exact repeat of
        # period 4 confined to a two-cell window, then confirm detection.
        import itertools
        opts = [Transition(w, d, s) for w in (0, 1) for d in (LEFT, RIGHT)
                for s in (0, 1)]
        found_machine = None
        for entries in itertools.product(opts, repeat=4):
            table = TransitionTable(2, 2, list(entries))
            seen = {}
            config = start_config()
            for _ in range(60):
                config = step(config, table)
                key = (config.state, config.head,
                       tuple(sorted(config.tape.items())))
                if key in seen:
                    if (config.steps - seen[key] == 4
                            and config.hi - config.lo <= 1):
                        found_machine = table
                    break
                seen[key] = config.steps
            if found_machine is not None:
                break
        assert found_machine is not None
        pair = cycler_check(_configs(found_machine, 1000))
        assert pair is not None
        assert (pair[1] - pair[0]) % 4 == 0

    def test_budget_skips_oversized_snapshots(self):
        table = parse_machine("0RB0RZ_0LA0RZ")
        # Budget 0 still detects this cycle: the looping tape is empty.
        assert cycler_check(_configs(table, 50), budget=0) is not None


class TestKnownBounds:
    def test_default_table_has_paper_bounds(self):
        bounds = default_known_bounds()
        assert bounds[(4, 2)] == 107
        assert bounds[(5, 2)] == 47_176_870

    def test_applicable_bound_picks_tightest(self):
        bounds = default_known_bounds()
        assert applicable_bound(bounds, 4, 2) == 107
        assert applicable_bound(bounds, 5, 2) == 47_176_870
        assert applicable_bound(bounds, 6, 2) is None
        assert applicable_bound(bounds, 2, 2) == 6

    def test_cutoff_fires_past_bound(self):
        limits = DeciderLimits()
        four_state = parse_machine(CHAMPION_4)
        assert known_bound_cutoff(four_state, 108, limits) is not None
        assert known_bound_cutoff(four_state, 107, limits) is None

    def test_five_states_use_larger_bound(self):
        limits = DeciderLimits()
        five = parse_machine("1RB1LE_1LC0LB_0RD0LC_0RA0RZ_1RA1RE")
        assert known_bound_cutoff(five, 107, limits) is None
        assert known_bound_cutoff(five, 108, limits) is None
        assert known_bound_cutoff(five, 47_176_871, limits) is not None

    def test_partially_defined_states_count(self):
        # Only two states carry entries, so the (2,2) bound applies.
        table = parse_machine("1RB1LB_1LA0RA_------_------")
        assert known_bound_cutoff(table, 7, DeciderLimits()) is not None

    def test_file_round_trip(self, tmp_path):
        path = tmp_path / "bounds.txt"
        path.write_text("# comment\n4 2 107\n5 2 47176870\n")
        assert load_known_bounds(str(path)) == {(4, 2): 107, (5, 2): 47_176_870}

    def test_malformed_file(self, tmp_path):
        path = tmp_path / "bounds.txt"
        path.write_text("4 2\n")
        with pytest.raises(ValueError):
            load_known_bounds(str(path))


class TestDecide:
    def test_four_state_champion(self):
        decision = decide(parse_machine(CHAMPION_4), DeciderLimits(max_steps=1000))
        assert decision.verdict is Verdict.HALTS_BLANK
        assert decision.steps == 34

    def test_six_state_candidate(self):
        decision = decide(parse_machine(CANDIDATE_6),
                          DeciderLimits(max_steps=1_000_000))
        assert decision.verdict is Verdict.HALTS_BLANK
        assert decision.steps == 438_120

    def test_halt_unreachable(self):
        decision = decide(parse_machine("1RB0LB_1LA0RA"))
        assert decision.verdict is Verdict.NON_HALTING
        assert decision.reason is Reason.HALT_UNREACHABLE

    def test_single_state_runner(self):
        decision = decide(parse_machine("1RA1RA"))
        assert decision.verdict is Verdict.NON_HALTING
        assert decision.reason is Reason.HALT_UNREACHABLE

    def test_no_blank_halt(self):
        decision = decide(parse_machine("0RB1RZ_1LA1LZ"))
        assert decision.verdict is Verdict.NO_BLANK_HALT
        assert decision.reason is Reason.BACKWARD_CONTRADICTION

    def test_unknown_when_capped_without_bound(self):
        # Six states have no known bound; a small cap leaves it open.
        decision = decide(parse_machine(CANDIDATE_6), DeciderLimits(max_steps=1000))
        assert decision.verdict is Verdict.UNKNOWN
        assert decision.cap == 1000

    def test_monotone_in_cap(self):
        rng = random.Random(42)
        for _ in range(300):
            n = rng.randint(1, 3)
            entries = [Transition(rng.randrange(2), rng.choice((LEFT, RIGHT)),
                                  rng.choice(list(range(n)) + [HALT]))
                       for _ in range(2 * n)]
            table = TransitionTable(n, 2, entries)
            small = decide(table, DeciderLimits(max_steps=100))
            big = decide(table, DeciderLimits(max_steps=10_000))
            if small.verdict is not Verdict.UNKNOWN:
                assert (small.verdict, small.steps, small.reason) == \
                    (big.verdict, big.steps, big.reason)

    def test_describe_strings(self):
        assert decide(parse_machine(CHAMPION_4)).describe() == "halts-blank 34"
        assert decide(parse_machine("1RB0LB_1LA0RA")).describe() == \
            "non-halting halt-unreachable"
